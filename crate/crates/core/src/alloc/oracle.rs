use crate::error::{Error, Result};
use crate::model::{f_value, ModelParams, TaskId};

use super::greedy::split_units;
use super::{ClientBundle, Instance};

/// Limits on exhaustive enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleCap {
    pub max_units: u64,
    pub max_tasks: usize,
}

impl Default for OracleCap {
    fn default() -> Self {
        Self {
            max_units: 20,
            max_tasks: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub min_total_f: f64,
    pub s_values: Vec<(TaskId, f64)>,
}

/// [`brute_force_oracle_capped`] with the default cap.
pub fn brute_force_oracle(
    clients: &[ClientBundle],
    server_fund: f64,
    params: &ModelParams,
) -> Result<OracleResult> {
    brute_force_oracle_capped(clients, server_fund, params, OracleCap::default())
}

/// Minimum of `Σ f(s)` over every placement of whole `δ` units on top of
/// the per-task floors such that each client keeps at least its own budget
/// units and all units are placed. Off-grid remainders are ignored.
pub fn brute_force_oracle_capped(
    clients: &[ClientBundle],
    server_fund: f64,
    params: &ModelParams,
    cap: OracleCap,
) -> Result<OracleResult> {
    let inst = Instance::new(clients, server_fund, params)?;
    let n = inst.tasks.len();
    if n > cap.max_tasks {
        return Err(Error::Size(format!(
            "{n} tasks exceed cap of {}",
            cap.max_tasks
        )));
    }
    let client_units: Vec<u64> = (0..inst.members.len())
        .map(|i| split_units(inst.budget_surplus(i), params.delta).0)
        .collect();
    let total =
        client_units.iter().sum::<u64>() + split_units(inst.deposit_surplus(), params.delta).0;
    if total > cap.max_units {
        return Err(Error::Size(format!(
            "{total} units exceed cap of {}",
            cap.max_units
        )));
    }

    let mut owner = vec![0; n];
    for (i, m) in inst.members.iter().enumerate() {
        for &j in m {
            owner[j] = i;
        }
    }
    let base = inst.base_sums();
    let mut search = Search {
        inst: &inst,
        base: &base,
        delta: params.delta,
        owner: &owner,
        client_units: &client_units,
        units: vec![0; n],
        best: None,
    };
    search.recurse(0, total)?;

    let (min_total_f, units) = search
        .best
        .ok_or_else(|| Error::Infeasible("no feasible composition".into()))?;
    Ok(OracleResult {
        min_total_f,
        s_values: inst
            .tasks
            .iter()
            .zip(base.iter().zip(&units))
            .map(|(t, (b, &u))| (t.id, b + u as f64 * params.delta))
            .collect(),
    })
}

struct Search<'a> {
    inst: &'a Instance,
    base: &'a [f64],
    delta: f64,
    owner: &'a [usize],
    client_units: &'a [u64],
    units: Vec<u64>,
    best: Option<(f64, Vec<u64>)>,
}

impl Search<'_> {
    fn recurse(&mut self, pos: usize, left: u64) -> Result<()> {
        if pos + 1 == self.units.len() {
            self.units[pos] = left;
            if self.is_feasible() {
                let value = self.total_f()?;
                if self.best.as_ref().is_none_or(|(v, _)| value < *v) {
                    self.best = Some((value, self.units.clone()));
                }
            }
            return Ok(());
        }
        for u in 0..=left {
            self.units[pos] = u;
            self.recurse(pos + 1, left - u)?;
        }
        Ok(())
    }

    fn total_f(&self) -> Result<f64> {
        self.inst
            .tasks
            .iter()
            .zip(self.base.iter().zip(&self.units))
            .map(|(t, (b, &u))| f_value(b + u as f64 * self.delta, t.cost, t.ttp_cost))
            .sum()
    }

    fn is_feasible(&self) -> bool {
        let mut per_client = vec![0u64; self.client_units.len()];
        for (j, &u) in self.units.iter().enumerate() {
            per_client[self.owner[j]] += u;
        }
        per_client
            .iter()
            .zip(self.client_units)
            .all(|(have, need)| have >= need)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alloc::allocate_single_client;
    use crate::model::TaskSpec;
    use approx::assert_relative_eq;

    fn params(delta: f64) -> ModelParams {
        ModelParams::new(1.0, delta).unwrap()
    }

    #[test]
    fn agrees_with_single_client_example() {
        let tasks = vec![
            TaskSpec::new(1, 0, 1.0, 1.0).unwrap(),
            TaskSpec::new(2, 0, 1.0, 1.0).unwrap(),
        ];
        let bundle = ClientBundle::new(0, 3.5, tasks);
        let p = params(0.5);
        let oracle = brute_force_oracle(std::slice::from_ref(&bundle), 2.5, &p).unwrap();
        let plan = allocate_single_client(&bundle, 2.5, &p).unwrap();
        assert_relative_eq!(oracle.min_total_f, plan.sum_f(), max_relative = 1e-9);
        assert_relative_eq!(oracle.min_total_f, 3.0 - 5f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn zero_units_gives_base() {
        let tasks = vec![
            TaskSpec::new(1, 0, 1.0, 1.0).unwrap(),
            TaskSpec::new(2, 0, 2.0, 2.0).unwrap(),
        ];
        let bundle = ClientBundle::new(0, 4.5, tasks.clone());
        let oracle = brute_force_oracle(std::slice::from_ref(&bundle), 3.0, &params(0.5)).unwrap();
        let expected: f64 = tasks
            .iter()
            .map(|t| f_value(t.base_sum(), t.cost, t.ttp_cost).unwrap())
            .sum();
        assert_relative_eq!(oracle.min_total_f, expected, max_relative = 1e-12);
        assert_eq!(oracle.s_values[0].1, 2.5);
        assert_eq!(oracle.s_values[1].1, 5.0);
    }

    #[test]
    fn single_task_takes_everything() {
        let bundle = ClientBundle::new(0, 3.0 + 1.5, vec![TaskSpec::new(7, 0, 2.0, 2.0).unwrap()]);
        let oracle =
            brute_force_oracle(std::slice::from_ref(&bundle), 2.0 + 1.0, &params(0.5)).unwrap();
        assert_relative_eq!(oracle.s_values[0].1, 5.0 + 2.5);
    }

    #[test]
    fn cap_is_enforced() {
        let bundle = ClientBundle::new(0, 3.0 + 20.0, vec![TaskSpec::new(7, 0, 2.0, 2.0).unwrap()]);
        let err = brute_force_oracle(std::slice::from_ref(&bundle), 2.0, &params(0.5)).unwrap_err();
        assert!(matches!(err, Error::Size(_)));
        let tasks: Vec<_> = (0..5)
            .map(|i| TaskSpec::new(i, 0, 1.0, 1.0).unwrap())
            .collect();
        let bundle = ClientBundle::new(0, 7.5, tasks);
        let err = brute_force_oracle(std::slice::from_ref(&bundle), 5.0, &params(0.5)).unwrap_err();
        assert!(matches!(err, Error::Size(_)));
    }

    #[test]
    fn client_budgets_bind() {
        // the only surplus is client 1's budget; client 2's steeper task
        // cannot take any of it
        let clients = vec![
            ClientBundle::new(1, 1.5 + 2.0, vec![TaskSpec::new(1, 1, 1.0, 1.0).unwrap()]),
            ClientBundle::new(2, 1.5, vec![TaskSpec::new(2, 2, 1.0, 1.0).unwrap()]),
        ];
        let oracle = brute_force_oracle(&clients, 2.0, &params(0.5)).unwrap();
        assert_relative_eq!(oracle.s_values[0].1, 4.5);
        assert_relative_eq!(oracle.s_values[1].1, 2.5);
    }
}
