use std::io::{Read, Write};

use anyhow::{Context, Result};

use crate::output::{fmt_num, Table, PLOT_SCHEMA};
use crate::UsageError;

/// Which columns of an experiment table become the plot axes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxisSpec {
    pub x: String,
    pub y: String,
    pub series: String,
}

impl AxisSpec {
    pub fn new(x: &str, y: &str) -> Self {
        Self {
            x: x.into(),
            y: y.into(),
            series: "series".into(),
        }
    }
}

/// Reduces an experiment table to tidy `(series, x, y)` rows, averaging `y`
/// over all rows (seeds) that share a series and `x`. Groups keep the order
/// in which they first appear. Input without a header yields no output.
pub fn emit_plot_data(input: impl Read, axes: &AxisSpec, out: impl Write) -> Result<()> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(input);
    let header = reader.headers().context("reading header")?.clone();
    if header.is_empty() {
        return Ok(());
    }
    let column = |name: &str| {
        header.iter().position(|h| h == name).ok_or_else(|| {
            UsageError(format!(
                "unknown axis `{name}`; available columns: {}",
                header.iter().collect::<Vec<_>>().join(", ")
            ))
        })
    };
    let (xi, yi, si) = (column(&axes.x)?, column(&axes.y)?, column(&axes.series)?);

    let mut groups: Vec<(String, String, f64, usize)> = Vec::new();
    for (n, record) in reader.records().enumerate() {
        let record = record.with_context(|| format!("reading row {}", n + 1))?;
        let (series, x, y) = (&record[si], &record[xi], &record[yi]);
        let y: f64 = y.parse().with_context(|| {
            format!("row {}: `{y}` in column {} is not a number", n + 1, axes.y)
        })?;
        match groups.iter_mut().find(|g| g.0 == series && g.1 == x) {
            Some(g) => {
                g.2 += y;
                g.3 += 1;
            }
            None => groups.push((series.to_string(), x.to_string(), y, 1)),
        }
    }
    let mut t = Table::new(PLOT_SCHEMA, vec!["series", "x", "y"]);
    for (series, x, sum, n) in groups {
        t.rows.push(vec![series, x, fmt_num(sum / n as f64)]);
    }
    t.write_to(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const INPUT: &str = "# schema: test/1\nseries,sweep_value,seed,y\n\
        seq,1,1,2\nseq,1,2,4\npar,1,1,1\nseq,2,1,5\npar,1,2,3\n";

    fn run(input: &str, axes: &AxisSpec) -> Result<String> {
        let mut out = Vec::new();
        emit_plot_data(input.as_bytes(), axes, &mut out)?;
        Ok(String::from_utf8(out).unwrap())
    }

    #[test]
    fn averages_over_seeds() {
        let out = run(INPUT, &AxisSpec::new("sweep_value", "y")).unwrap();
        assert_eq!(
            out,
            "# schema: vcalloc-plot/1\nseries,x,y\nseq,1,3\npar,1,2\nseq,2,5\n"
        );
    }

    #[test]
    fn unknown_axis() {
        let err = run(INPUT, &AxisSpec::new("sweep_value", "nope")).unwrap_err();
        assert!(err.downcast_ref::<UsageError>().is_some());
    }

    #[test]
    fn empty_input() {
        assert_eq!(run("", &AxisSpec::new("a", "b")).unwrap(), "");
    }
}
