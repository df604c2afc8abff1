use std::collections::BTreeMap;

use crate::error::Result;
use crate::model::{ClientId, ModelParams, TaskId};

use super::greedy::{split_units, UnitGreedy};
use super::single::allocate_single_client;
use super::{AllocationPlan, ClientBundle, Instance};

/// Server-side deposit split across clients.
#[derive(Debug, Clone, PartialEq)]
pub struct DepositSplit {
    pub per_client_deposit: BTreeMap<ClientId, f64>,
    /// `s = b + d` per task, clients in input order.
    pub s_values: Vec<(TaskId, f64)>,
    pub residual: f64,
}

/// Splits the server's fund across clients.
///
/// Each client's budget surplus is first spread greedily over that
/// client's own tasks, then the server's surplus deposit is spread
/// greedily over all tasks. A client's deposit is what its tasks hold
/// beyond its budget.
pub fn split_deposit(
    clients: &[ClientBundle],
    server_fund: f64,
    params: &ModelParams,
) -> Result<DepositSplit> {
    let inst = Instance::new(clients, server_fund, params)?;
    let (sums, residual) = greedy_sums(&inst, params);

    let mut per_client_deposit = BTreeMap::new();
    let mut assigned = 0.0;
    let last = inst.members.len() - 1;
    for (i, members) in inst.members.iter().enumerate() {
        let d_i = if i == last {
            server_fund - assigned
        } else {
            members.iter().map(|&j| sums[j]).sum::<f64>() - inst.budgets[i]
        };
        assigned += d_i;
        per_client_deposit.insert(inst.client_ids[i], d_i);
    }

    Ok(DepositSplit {
        per_client_deposit,
        s_values: inst.tasks.iter().map(|t| t.id).zip(sums).collect(),
        residual,
    })
}

/// Phases I–III on `s`: floors, each client's budget surplus within the
/// client, then the deposit surplus over all tasks. Off-grid remainders are
/// held back until every whole unit is placed, then each goes to the argmin
/// task of the pool it came from.
pub(crate) fn greedy_sums(inst: &Instance, params: &ModelParams) -> (Vec<f64>, f64) {
    let greedy = UnitGreedy {
        tasks: &inst.tasks,
        delta: params.delta,
        rule: params.rule,
    };
    let mut sums = inst.base_sums();
    let mut held = Vec::with_capacity(inst.members.len() + 1);

    for (i, members) in inst.members.iter().enumerate() {
        let (units, r) = split_units(inst.budget_surplus(i), params.delta);
        greedy.distribute(&mut sums, members, units);
        held.push((r, members.clone()));
    }
    let all = inst.all_members();
    let (units, r) = split_units(inst.deposit_surplus(), params.delta);
    greedy.distribute(&mut sums, &all, units);
    held.push((r, all));

    let mut residual = 0.0;
    for (r, members) in held {
        if r > 0.0 {
            let j = greedy.argmin(&sums, &members);
            sums[j] += r;
            residual += r;
        }
    }
    (sums, residual)
}

/// Equilibrium allocation for several clients: the server splits its fund
/// across clients, then each client's share is allocated with the
/// single-client algorithm.
pub fn allocate_multi_client(
    clients: &[ClientBundle],
    server_fund: f64,
    params: &ModelParams,
) -> Result<AllocationPlan> {
    let split = split_deposit(clients, server_fund, params)?;
    let mut plan = AllocationPlan {
        allocations: Vec::new(),
        per_client_deposit: BTreeMap::new(),
        residual: 0.0,
    };
    for bundle in clients {
        let d_i = split.per_client_deposit[&bundle.client_id];
        let sub = allocate_single_client(bundle, d_i, params)?;
        plan.allocations.extend(sub.allocations);
        plan.residual += sub.residual;
        plan.per_client_deposit.insert(bundle.client_id, d_i);
    }
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alloc::verify_nash;
    use crate::model::TaskSpec;
    use approx::assert_relative_eq;

    fn unit_task(id: u64, client: u64) -> TaskSpec {
        TaskSpec::new(id, client, 1.0, 1.0).unwrap()
    }

    fn params(delta: f64) -> ModelParams {
        ModelParams::new(1.0, delta).unwrap()
    }

    #[test]
    fn remaining_deposit_tie_goes_to_first_client() {
        let clients = vec![
            ClientBundle::new(1, 1.5, vec![unit_task(1, 1)]),
            ClientBundle::new(2, 1.5, vec![unit_task(2, 2)]),
        ];
        let split = split_deposit(&clients, 2.5, &params(0.5)).unwrap();
        assert_relative_eq!(split.per_client_deposit[&ClientId(1)], 1.5);
        assert_relative_eq!(split.per_client_deposit[&ClientId(2)], 1.0);
        assert_relative_eq!(split.s_values[0].1, 3.0);
        assert_relative_eq!(split.s_values[1].1, 2.5);
    }

    #[test]
    fn one_client_matches_single_algorithm() {
        let tasks = vec![
            TaskSpec::new(1, 0, 1.0, 1.0).unwrap(),
            TaskSpec::new(2, 0, 2.0, 3.0).unwrap(),
            TaskSpec::new(3, 0, 1.5, 4.0).unwrap(),
        ];
        let bundle = ClientBundle::new(0, 10.0, tasks);
        let p = params(0.25);
        let split = split_deposit(std::slice::from_ref(&bundle), 12.0, &p).unwrap();
        let single = allocate_single_client(&bundle, 12.0, &p).unwrap();
        let multi = allocate_multi_client(std::slice::from_ref(&bundle), 12.0, &p).unwrap();
        for ((_, s), a) in split.s_values.iter().zip(&single.allocations) {
            assert_relative_eq!(*s, a.sum(), max_relative = 1e-12);
        }
        assert_eq!(single.allocations, multi.allocations);
    }

    #[test]
    fn four_identical_tasks_stay_within_one_unit() {
        let clients = vec![
            ClientBundle::new(1, 3.0, vec![unit_task(1, 1), unit_task(2, 1)]),
            ClientBundle::new(2, 3.0, vec![unit_task(3, 2), unit_task(4, 2)]),
        ];
        let p = params(0.5);
        let plan = allocate_multi_client(&clients, 5.0, &p).unwrap();
        let sums: Vec<f64> = plan.allocations.iter().map(|a| a.sum()).collect();
        let max = sums.iter().cloned().fold(f64::MIN, f64::max);
        let min = sums.iter().cloned().fold(f64::MAX, f64::min);
        assert!(max - min <= 0.5 + 1e-12, "{sums:?}");
        assert_relative_eq!(sums.iter().sum::<f64>(), 11.0, max_relative = 1e-12);
        assert!(verify_nash(&plan, &clients, 5.0, &p));
    }

    #[test]
    fn deposits_are_conserved() {
        let clients = vec![
            ClientBundle::new(
                1,
                7.3,
                vec![unit_task(1, 1), TaskSpec::new(2, 1, 2.0, 2.5).unwrap()],
            ),
            ClientBundle::new(2, 4.1, vec![TaskSpec::new(3, 2, 1.2, 3.0).unwrap()]),
        ];
        let split = split_deposit(&clients, 17.77, &params(0.3)).unwrap();
        let total: f64 = split.per_client_deposit.values().sum();
        assert_relative_eq!(total, 17.77, max_relative = 1e-14);
    }
}
