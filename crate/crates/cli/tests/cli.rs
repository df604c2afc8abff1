use std::fs;
use std::path::Path;
use std::process::Command;

use vcalloc_cli::{apply_preset, emit_plot_data, run_experiment, AxisSpec, ExperimentConfig, Mode};

fn small_config(dir: &Path) -> ExperimentConfig {
    let mut c = ExperimentConfig::default();
    c.stream.n_groups = 2;
    c.stream.tasks_per_group = 50;
    c.out = dir.join("out.csv");
    c
}

fn data_rows(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    assert!(text.starts_with("# schema: "), "{text}");
    assert!(!text.contains('\r'));
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    r.records()
        .map(|x| x.unwrap().iter().map(String::from).collect())
        .collect()
}

fn header(path: &Path) -> Vec<String> {
    let text = fs::read_to_string(path).unwrap();
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    r.headers().unwrap().iter().map(String::from).collect()
}

fn vcalloc() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vcalloc"))
}

#[test]
fn confirm_sweep_row_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small_config(dir.path());
    apply_preset("confirm_sweep", &mut c).unwrap();
    c.seeds = vec![1, 2];
    let written = run_experiment(&c).unwrap();
    assert_eq!(data_rows(&written[0]).len(), 28);
    assert_eq!(data_rows(&written[1]).len(), 14);
}

#[test]
fn summary_is_the_seed_mean() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small_config(dir.path());
    apply_preset("budget_sweep", &mut c).unwrap();
    c.seeds = vec![3, 4, 5];
    let written = run_experiment(&c).unwrap();
    let h = header(&written[0]);
    let col = |name: &str| h.iter().position(|x| x == name).unwrap();
    let rows = data_rows(&written[0]);
    let summary = data_rows(&written[1]);
    let hs = header(&written[1]);
    let scol = |name: &str| hs.iter().position(|x| x == name).unwrap();
    for (group, s) in rows.chunks(3).zip(&summary) {
        for metric in ["w_over_b", "mean_delay_total", "delay_release", "hire_rate"] {
            let mean: f64 = group
                .iter()
                .map(|r| r[col(metric)].parse::<f64>().unwrap())
                .sum::<f64>()
                / 3.0;
            let got: f64 = s[scol(metric)].parse().unwrap();
            // per-seed cells are printed with 12 digits
            assert!(
                (mean - got).abs() <= 1e-11 * mean.abs().max(1.0),
                "{metric}: {mean} vs {got}"
            );
        }
        assert_eq!(group[0][col("series")], s[scol("series")]);
    }
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small_config(dir.path());
    apply_preset("alpha_sweep", &mut c).unwrap();
    c.seeds = vec![1, 2];
    c.trace = Some(dir.path().join("trace.csv"));
    let first: Vec<Vec<u8>> = run_experiment(&c)
        .unwrap()
        .iter()
        .map(|p| fs::read(p).unwrap())
        .collect();
    let second: Vec<Vec<u8>> = run_experiment(&c)
        .unwrap()
        .iter()
        .map(|p| fs::read(p).unwrap())
        .collect();
    assert_eq!(first.len(), 3);
    assert_eq!(first, second);
    assert_eq!(data_rows(&dir.path().join("trace.csv")).len(), 4 * 2 * 100);
}

#[test]
fn static_mode_greedy_is_minimal() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small_config(dir.path());
    c.mode = Mode::Static;
    c.seeds = vec![7];
    let written = run_experiment(&c).unwrap();
    let h = header(&written[0]);
    assert!(h.contains(&"sum_f".to_string()) && h.contains(&"total_wage".to_string()));
    let rows = data_rows(&written[0]);
    assert_eq!(rows.len(), 4);
    let col = h.iter().position(|x| x == "sum_f").unwrap();
    let greedy: f64 = rows[0][col].parse().unwrap();
    assert_eq!(rows[0][0], "greedy");
    for r in &rows[1..] {
        assert!(greedy <= r[col].parse::<f64>().unwrap());
    }
    let nash = h.iter().position(|x| x == "nash").unwrap();
    assert_eq!(rows[0][nash], "true");
}

#[test]
fn config_file_round_trip_and_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small_config(dir.path());
    c.beta = 0.4;
    c.stream.confirm_time = 3.0;
    let path = dir.path().join("exp.toml");
    fs::write(&path, c.to_toml()).unwrap();
    assert_eq!(
        ExperimentConfig::from_toml(&fs::read_to_string(&path).unwrap()).unwrap(),
        c
    );

    let out = vcalloc()
        .args(["dynamic", "--config"])
        .arg(&path)
        .args(["--beta", "0.7", "--print-config"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let effective = ExperimentConfig::from_toml(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(effective.beta, 0.7);
    assert_eq!(effective.stream.confirm_time, 3.0);
    assert_eq!(effective.stream.n_groups, 2);
}

#[test]
fn plotdata_series() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small_config(dir.path());
    apply_preset("confirm_sweep", &mut c).unwrap();
    c.seeds = vec![1, 2];
    run_experiment(&c).unwrap();
    let mut out = Vec::new();
    let input = fs::File::open(&c.out).unwrap();
    emit_plot_data(
        input,
        &AxisSpec::new("sweep_value", "mean_delay_total"),
        &mut out,
    )
    .unwrap();
    let text = String::from_utf8(out).unwrap();
    let rows = data_rows_str(&text);
    assert_eq!(rows.len(), 14);
    let mut series: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    series.sort();
    series.dedup();
    assert_eq!(series, ["parallel_alpha_1", "sequential"]);

    let mut c = small_config(dir.path());
    apply_preset("beta_sweep", &mut c).unwrap();
    c.seeds = vec![1];
    run_experiment(&c).unwrap();
    let mut out = Vec::new();
    let input = fs::File::open(&c.out).unwrap();
    emit_plot_data(input, &AxisSpec::new("sweep_value", "w_over_b"), &mut out).unwrap();
    let rows = data_rows_str(&String::from_utf8(out).unwrap());
    let mut series: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    series.sort();
    series.dedup();
    assert_eq!(series.len(), 4);
}

fn data_rows_str(text: &str) -> Vec<Vec<String>> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    r.records()
        .map(|x| x.unwrap().iter().map(String::from).collect())
        .collect()
}

#[test]
fn plotdata_cli_errors_and_empty_input() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "").unwrap();
    let out_path = dir.path().join("plot.csv");
    let status = vcalloc()
        .args(["plotdata", "--input"])
        .arg(&empty)
        .args(["--y", "w_over_b", "--out"])
        .arg(&out_path)
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(fs::read(&out_path).unwrap(), b"");

    let table = dir.path().join("t.csv");
    fs::write(
        &table,
        "# schema: x/1\nseries,sweep_value,w_over_b\na,1,2\n",
    )
    .unwrap();
    let out = vcalloc()
        .args(["plotdata", "--input"])
        .arg(&table)
        .args(["--y", "nope"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown axis"));
}

#[test]
fn bad_config_is_usage_error() {
    let out = vcalloc()
        .args(["dynamic", "--beta=-1", "--out", "x.csv"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("beta"));
    let out = vcalloc()
        .args(["dynamic", "--preset", "nope"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn dynamic_cli_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("r.csv");
    let status = vcalloc()
        .args([
            "dynamic",
            "--n-groups",
            "1",
            "--tasks-per-group",
            "40",
            "--seeds",
            "1,2",
            "--sweep",
            "server_fund",
            "--values",
            "1,4",
            "--schedulers",
            "parallel",
            "--alpha",
            "0.3,1",
            "--out",
        ])
        .arg(&out_path)
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(data_rows(&out_path).len(), 2 * 2 * 2);
    assert!(dir.path().join("r.summary.csv").exists());
}
