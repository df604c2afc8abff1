use crate::error::{Error, Result};
use crate::model::{unchecked, ModelParams, REL_TOL};

use super::multi::greedy_sums;
use super::{assemble_plan, AllocationPlan, ClientBundle, Instance};

/// Optimal split of one client's budget and the server's fund over the
/// client's tasks.
///
/// The remainder `b_i + d − Σ(min_budget + ĉ)` is handed out in units of
/// `δ`; the resulting sums are then split so that the tasks with
/// the shortest verification time receive the most deposit.
pub fn allocate_single_client(
    bundle: &ClientBundle,
    server_fund: f64,
    params: &ModelParams,
) -> Result<AllocationPlan> {
    let inst = Instance::new(std::slice::from_ref(bundle), server_fund, params)?;
    let (sums, residual) = greedy_sums(&inst, params);
    let splits = split_sums(&inst, &sums, &inst.all_members(), server_fund)?;
    assemble_plan(&inst, &splits, params, residual)
}

/// Phase III: deposit floor `ĉ` everywhere, then the surplus deposit goes
/// to tasks in ascending `f(s)` order, each taking as much as its budget
/// floor allows. Returns `(budget, deposit)` per instance task; entries
/// outside `members` are left at zero.
pub(crate) fn split_sums(
    inst: &Instance,
    sums: &[f64],
    members: &[usize],
    fund: f64,
) -> Result<Vec<(f64, f64)>> {
    let tasks = &inst.tasks;
    let mut order = members.to_vec();
    let fvals: Vec<f64> = (0..tasks.len())
        .map(|j| unchecked::f(sums[j], tasks[j].cost, tasks[j].ttp_cost))
        .collect();
    order.sort_by(|&a, &b| fvals[a].total_cmp(&fvals[b]).then(a.cmp(&b)));

    let floor: f64 = members.iter().map(|&j| tasks[j].ttp_cost).sum();
    let mut left = fund - floor;
    let mut splits = vec![(0.0, 0.0); tasks.len()];
    for &j in &order {
        let t = &tasks[j];
        let headroom = (sums[j] - t.ttp_cost - t.min_budget()).max(0.0);
        let x = left.min(headroom).max(0.0);
        let deposit = t.ttp_cost + x;
        splits[j] = (sums[j] - deposit, deposit);
        left -= x;
    }
    if left > REL_TOL * fund.max(1.0) {
        return Err(Error::Consistency(format!(
            "{left} of deposit left after exhausting budget headroom"
        )));
    }
    if left > 0.0 {
        // rounding dust
        let j = *order.last().expect("members is non-empty");
        splits[j].1 += left;
        splits[j].0 = sums[j] - splits[j].1;
    }
    Ok(splits)
}
