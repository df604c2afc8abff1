use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{ModelParams, TaskSpec};

use super::greedy::split_units;
use super::{assemble_plan, AllocationPlan, ClientBundle, Instance};

/// Straw-man allocation rules used as comparators for the greedy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineStrategy {
    Uniform,
    ProportionalCost,
    ProportionalTtpCost,
}

impl BaselineStrategy {
    pub const ALL: [BaselineStrategy; 3] = [
        BaselineStrategy::Uniform,
        BaselineStrategy::ProportionalCost,
        BaselineStrategy::ProportionalTtpCost,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BaselineStrategy::Uniform => "uniform",
            BaselineStrategy::ProportionalCost => "proportional_cost",
            BaselineStrategy::ProportionalTtpCost => "proportional_ttp_cost",
        }
    }

    fn weight(self, task: &TaskSpec) -> f64 {
        match self {
            BaselineStrategy::Uniform => 1.0,
            BaselineStrategy::ProportionalCost => task.cost,
            BaselineStrategy::ProportionalTtpCost => task.ttp_cost,
        }
    }
}

/// Every task gets its floors; each client's budget surplus and the
/// server's deposit surplus are then split in whole `δ` units by the
/// strategy's weights (largest-remainder rounding, ties to the lowest
/// index). Off-grid remainders go to the first task of the pool.
pub fn baseline_allocate(
    strategy: BaselineStrategy,
    clients: &[ClientBundle],
    server_fund: f64,
    params: &ModelParams,
) -> Result<AllocationPlan> {
    let inst = Instance::new(clients, server_fund, params)?;
    let delta = params.delta;
    let mut splits: Vec<(f64, f64)> = inst
        .tasks
        .iter()
        .map(|t| (t.min_budget(), t.ttp_cost))
        .collect();
    let mut residual = 0.0;

    for (i, members) in inst.members.iter().enumerate() {
        let (units, r) = split_units(inst.budget_surplus(i), delta);
        let weights: Vec<f64> = members
            .iter()
            .map(|&j| strategy.weight(&inst.tasks[j]))
            .collect();
        for (&j, u) in members.iter().zip(apportion(units, &weights)) {
            splits[j].0 += u as f64 * delta;
        }
        splits[members[0]].0 += r;
        residual += r;
    }

    let (units, r) = split_units(inst.deposit_surplus(), delta);
    let weights: Vec<f64> = inst.tasks.iter().map(|t| strategy.weight(t)).collect();
    for (j, u) in apportion(units, &weights).into_iter().enumerate() {
        splits[j].1 += u as f64 * delta;
    }
    splits[0].1 += r;
    residual += r;

    assemble_plan(&inst, &splits, params, residual)
}

/// Largest-remainder apportionment of `units` by `weights`.
fn apportion(units: u64, weights: &[f64]) -> Vec<u64> {
    let total: f64 = weights.iter().sum();
    let quotas: Vec<f64> = weights.iter().map(|w| units as f64 * w / total).collect();
    let mut out: Vec<u64> = quotas.iter().map(|q| q.floor() as u64).collect();
    let mut left = units - out.iter().sum::<u64>().min(units);
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &j in order.iter().cycle() {
        if left == 0 {
            break;
        }
        out[j] += 1;
        left -= 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alloc::allocate_multi_client;
    use approx::assert_relative_eq;

    #[test]
    fn apportionment() {
        assert_eq!(apportion(4, &[1.0, 3.0]), vec![1, 3]);
        assert_eq!(apportion(3, &[1.0, 1.0]), vec![2, 1]);
        assert_eq!(apportion(0, &[1.0, 2.0]), vec![0, 0]);
        assert_eq!(apportion(7, &[1.0, 1.0, 1.0]), vec![3, 2, 2]);
    }

    #[test]
    fn uniform_is_symmetric() {
        let tasks = vec![
            TaskSpec::new(1, 0, 1.0, 1.0).unwrap(),
            TaskSpec::new(2, 0, 1.0, 1.0).unwrap(),
        ];
        let clients = vec![ClientBundle::new(0, 3.0 + 1.0, tasks)];
        let p = ModelParams::new(1.0, 0.5).unwrap();
        let plan = baseline_allocate(BaselineStrategy::Uniform, &clients, 2.0 + 1.0, &p).unwrap();
        assert_relative_eq!(plan.allocations[0].sum(), plan.allocations[1].sum());
    }

    #[test]
    fn proportional_cost_split() {
        let tasks = vec![
            TaskSpec::new(1, 0, 1.0, 1.0).unwrap(),
            TaskSpec::new(2, 0, 3.0, 1.0).unwrap(),
        ];
        let floor: f64 = tasks.iter().map(|t| t.min_budget()).sum();
        let clients = vec![ClientBundle::new(0, floor + 4.0, tasks.clone())];
        let p = ModelParams::new(1.0, 1.0).unwrap();
        let plan =
            baseline_allocate(BaselineStrategy::ProportionalCost, &clients, 2.0, &p).unwrap();
        assert_relative_eq!(plan.allocations[0].budget - tasks[0].min_budget(), 1.0);
        assert_relative_eq!(plan.allocations[1].budget - tasks[1].min_budget(), 3.0);
    }

    #[test]
    fn never_beats_greedy() {
        let clients = vec![
            ClientBundle::new(
                1,
                1.5 + 1.75 + 2.0,
                vec![
                    TaskSpec::new(1, 1, 1.0, 1.0).unwrap(),
                    TaskSpec::new(2, 1, 1.0, 3.0).unwrap(),
                ],
            ),
            ClientBundle::new(2, 3.0 + 1.5, vec![TaskSpec::new(3, 2, 2.0, 2.0).unwrap()]),
        ];
        let fund = 6.0 + 3.0;
        let p = ModelParams::new(1.0, 0.5).unwrap();
        let greedy = allocate_multi_client(&clients, fund, &p).unwrap().sum_f();
        for s in BaselineStrategy::ALL {
            let plan = baseline_allocate(s, &clients, fund, &p).unwrap();
            assert!(greedy <= plan.sum_f() + 1e-12, "{}", s.name());
            assert_relative_eq!(plan.total_deposit(), fund, max_relative = 1e-12);
        }
    }
}
