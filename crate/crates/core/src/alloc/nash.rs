use std::collections::HashMap;

use crate::model::{at_least, f_value, Allocation, ModelParams, TaskId, TaskSpec};

use super::{AllocationPlan, ClientBundle};

/// Smallest improvement that counts as a profitable deviation.
pub const NASH_MARGIN: f64 = 1e-9;

/// Unilateral-deviation test on the δ-grid.
///
/// Returns `false` if some client can shorten its total verification time
/// by moving one unit of budget between two of its own tasks, or if the
/// server can raise its total wage by moving one unit of deposit between
/// any two tasks, by more than [`NASH_MARGIN`]. Floors must still hold
/// after the move for it to count.
pub fn verify_nash(
    plan: &AllocationPlan,
    clients: &[ClientBundle],
    _server_fund: f64,
    params: &ModelParams,
) -> bool {
    let by_id: HashMap<TaskId, &Allocation> =
        plan.allocations.iter().map(|a| (a.task_id, a)).collect();
    let mut flat: Vec<(&TaskSpec, &Allocation, usize)> = Vec::new();
    for (i, c) in clients.iter().enumerate() {
        for t in &c.tasks {
            match by_id.get(&t.id) {
                Some(a) => flat.push((t, a, i)),
                None => return false,
            }
        }
    }
    let delta = params.delta;
    let f = |t: &TaskSpec, s: f64| f_value(s, t.cost, t.ttp_cost).ok();

    for &(from_t, from_a, from_c) in &flat {
        let can_give_budget = at_least(from_a.budget - delta, from_t.min_budget());
        let can_give_deposit = at_least(from_a.deposit - delta, from_t.ttp_cost);
        if !can_give_budget && !can_give_deposit {
            continue;
        }
        let s_from = from_a.sum();
        for &(to_t, to_a, to_c) in &flat {
            if to_t.id == from_t.id {
                continue;
            }
            let s_to = to_a.sum();
            let change = match (
                f(from_t, s_from - delta),
                f(to_t, s_to + delta),
                f(from_t, s_from),
                f(to_t, s_to),
            ) {
                (Some(a), Some(b), Some(c), Some(d)) => (a + b) - (c + d),
                _ => return false,
            };
            // clients minimise k·Σf; the server maximises Σ(b − f)
            if can_give_budget && from_c == to_c && params.k * change < -NASH_MARGIN {
                return false;
            }
            if can_give_deposit && -change > NASH_MARGIN {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alloc::{allocate_multi_client, assemble_plan, Instance};

    fn params() -> ModelParams {
        ModelParams::new(1.0, 0.5).unwrap()
    }

    fn instance() -> (Vec<ClientBundle>, f64) {
        let clients = vec![
            ClientBundle::new(
                1,
                1.5 + 1.75 + 1.0,
                vec![
                    TaskSpec::new(1, 1, 1.0, 1.0).unwrap(),
                    TaskSpec::new(2, 1, 1.0, 3.0).unwrap(),
                ],
            ),
            ClientBundle::new(2, 3.0 + 0.5, vec![TaskSpec::new(3, 2, 2.0, 2.0).unwrap()]),
        ];
        (clients, 6.0 + 2.0)
    }

    #[test]
    fn greedy_plan_is_equilibrium() {
        let (clients, fund) = instance();
        let plan = allocate_multi_client(&clients, fund, &params()).unwrap();
        assert!(verify_nash(&plan, &clients, fund, &params()));
    }

    #[test]
    fn moved_deposit_is_detected() {
        let (clients, fund) = instance();
        let p = params();
        let plan = allocate_multi_client(&clients, fund, &p).unwrap();
        let inst = Instance::new(&clients, fund, &p).unwrap();
        let mut splits: Vec<(f64, f64)> = plan
            .allocations
            .iter()
            .map(|a| (a.budget, a.deposit))
            .collect();
        let from = (0..splits.len())
            .find(|&j| splits[j].1 - 0.5 >= inst.tasks[j].ttp_cost)
            .expect("some task holds surplus deposit");
        let to = (0..splits.len()).find(|&j| j != from).unwrap();
        splits[from].1 -= 0.5;
        splits[to].1 += 0.5;
        let off = assemble_plan(&inst, &splits, &p, 0.0).unwrap();
        assert!(!verify_nash(&off, &clients, fund, &p));
    }

    #[test]
    fn single_task_has_no_deviation() {
        let clients = vec![ClientBundle::new(
            0,
            4.0,
            vec![TaskSpec::new(1, 0, 2.0, 2.0).unwrap()],
        )];
        let plan = allocate_multi_client(&clients, 3.0, &params()).unwrap();
        assert!(verify_nash(&plan, &clients, 3.0, &params()));
    }

    #[test]
    fn missing_task_fails() {
        let (clients, fund) = instance();
        let mut plan = allocate_multi_client(&clients, fund, &params()).unwrap();
        plan.allocations.pop();
        assert!(!verify_nash(&plan, &clients, fund, &params()));
    }
}
