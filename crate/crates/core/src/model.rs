//! Per-task game model: budget and deposit floors, the closed-form wage,
//! the audit probability that keeps a rational server honest, and the
//! verification-time utility `f` together with its derivative.
//!
//! All quantities are `f64`. Floor checks accept values within
//! [`REL_TOL`] (relative) of the bound so that allocations sitting exactly
//! on a floor survive rounding.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::alloc::MarginalRule;
use crate::error::{Error, Result};

/// Relative tolerance used for floor checks and identity comparisons.
pub const REL_TOL: f64 = 1e-9;

/// Slack used by [`check_security`].
pub const SECURITY_SLACK: f64 = 1e-12;

/// Discriminants smaller than this fraction of `(b + d)^2` are rejected.
const DISCRIMINANT_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TaskId(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ClientId(pub u64);

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.0)
    }
}

impl fmt::Display for ClientId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

/// A task as submitted by a client.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub id: TaskId,
    pub client_id: ClientId,
    /// Execution cost `c`, also its execution time up to the factor `k`.
    pub cost: f64,
    /// Cost `ĉ` of having a trusted third party recompute the task.
    pub ttp_cost: f64,
    /// Arrival time in simulation time units; zero for static sets.
    pub arrival_time: f64,
}

impl TaskSpec {
    pub fn new(id: u64, client_id: u64, cost: f64, ttp_cost: f64) -> Result<Self> {
        Self::arriving(id, client_id, cost, ttp_cost, 0.0)
    }

    pub fn arriving(
        id: u64,
        client_id: u64,
        cost: f64,
        ttp_cost: f64,
        arrival_time: f64,
    ) -> Result<Self> {
        check_costs(cost, ttp_cost)?;
        if !(arrival_time.is_finite() && arrival_time >= 0.0) {
            return Err(Error::Domain(format!(
                "arrival time must be finite and nonnegative, got {arrival_time}"
            )));
        }
        Ok(Self {
            id: TaskId(id),
            client_id: ClientId(client_id),
            cost,
            ttp_cost,
            arrival_time,
        })
    }

    /// Smallest budget that lets the server earn at least its cost.
    pub fn min_budget(&self) -> f64 {
        base_budget(self.cost, self.ttp_cost)
    }

    /// Smallest combined budget-plus-deposit the allocators hand out.
    pub fn base_sum(&self) -> f64 {
        self.min_budget() + self.ttp_cost
    }
}

/// Budget/deposit split of one task and the quantities derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub task_id: TaskId,
    pub budget: f64,
    pub deposit: f64,
    pub wage: f64,
    pub audit_prob: f64,
    pub verify_time: f64,
}

impl Allocation {
    /// Derives wage, audit probability and verification time for `task`
    /// given its budget and deposit.
    pub fn new(task: &TaskSpec, budget: f64, deposit: f64, k: f64) -> Result<Self> {
        let wage = wage(budget, deposit, task.cost, task.ttp_cost)?;
        check_k(k)?;
        Ok(Self {
            task_id: task.id,
            budget,
            deposit,
            wage,
            audit_prob: task.cost / (wage + deposit),
            verify_time: k * (budget - wage),
        })
    }

    /// Combined assignment `s = b + d`.
    pub fn sum(&self) -> f64 {
        self.budget + self.deposit
    }
}

/// Global model constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Time per unit of cost.
    pub k: f64,
    /// Allocation unit used by the greedy allocators.
    pub delta: f64,
    #[serde(default)]
    pub rule: MarginalRule,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            k: 1.0,
            delta: 0.01,
            rule: MarginalRule::default(),
        }
    }
}

impl ModelParams {
    pub fn new(k: f64, delta: f64) -> Result<Self> {
        check_k(k)?;
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::Domain(format!(
                "delta must be positive, got {delta}"
            )));
        }
        Ok(Self {
            k,
            delta,
            rule: MarginalRule::default(),
        })
    }

    pub fn with_rule(self, rule: MarginalRule) -> Self {
        Self { rule, ..self }
    }

    /// `k = 1` and `δ` equal to one percent of the cheapest task.
    pub fn for_tasks<'a>(tasks: impl IntoIterator<Item = &'a TaskSpec>) -> Result<Self> {
        let min_cost = tasks
            .into_iter()
            .map(|t| t.cost)
            .fold(f64::INFINITY, f64::min);
        if !min_cost.is_finite() {
            return Err(Error::Domain("no tasks to derive delta from".into()));
        }
        Self::new(1.0, 1e-2 * min_cost)
    }
}

fn check_costs(cost: f64, ttp_cost: f64) -> Result<()> {
    if !(cost.is_finite() && cost > 0.0) {
        return Err(Error::Domain(format!("cost must be positive, got {cost}")));
    }
    if !(ttp_cost.is_finite() && ttp_cost > 0.0) {
        return Err(Error::Domain(format!(
            "ttp cost must be positive, got {ttp_cost}"
        )));
    }
    Ok(())
}

fn check_k(k: f64) -> Result<()> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::Domain(format!("k must be positive, got {k}")));
    }
    Ok(())
}

fn base_budget(cost: f64, ttp_cost: f64) -> f64 {
    cost + cost * ttp_cost / (cost + ttp_cost)
}

/// `a >= floor` up to [`REL_TOL`].
pub(crate) fn at_least(a: f64, floor: f64) -> bool {
    a >= floor - REL_TOL * floor.abs().max(1.0)
}

/// Budget floor `c + c·ĉ/(c + ĉ)`: the least budget for which the wage can
/// reach the cost while the deposit sits at its own floor `ĉ`.
pub fn min_budget(cost: f64, ttp_cost: f64) -> Result<f64> {
    check_costs(cost, ttp_cost)?;
    Ok(base_budget(cost, ttp_cost))
}

fn check_split(budget: f64, deposit: f64, cost: f64, ttp_cost: f64) -> Result<()> {
    check_costs(cost, ttp_cost)?;
    if !(budget.is_finite() && budget >= 0.0) {
        return Err(Error::Domain(format!(
            "budget must be finite and nonnegative, got {budget}"
        )));
    }
    if !(deposit.is_finite() && deposit >= 0.0) {
        return Err(Error::Domain(format!(
            "deposit must be finite and nonnegative, got {deposit}"
        )));
    }
    let floor = base_budget(cost, ttp_cost);
    if !at_least(budget, floor) {
        return Err(Error::Infeasible(format!(
            "budget {budget} below floor {floor}"
        )));
    }
    if !at_least(deposit, ttp_cost) {
        return Err(Error::Infeasible(format!(
            "deposit {deposit} below floor {ttp_cost}"
        )));
    }
    Ok(())
}

/// `√(s² − 4cĉ)`, rejecting near-singular discriminants.
fn root(sum: f64, cost: f64, ttp_cost: f64) -> Result<f64> {
    let disc = sum * sum - 4.0 * cost * ttp_cost;
    if disc < DISCRIMINANT_GUARD * sum * sum {
        return Err(Error::Infeasible(format!(
            "discriminant {disc} not positive for s = {sum}"
        )));
    }
    Ok(disc.sqrt())
}

/// Verification-time utility `f(s) = (s − √(s² − 4cĉ)) / 2`, evaluated in
/// the cancellation-free form `2cĉ / (s + √(s² − 4cĉ))`.
fn f_stable(sum: f64, cost: f64, ttp_cost: f64, root: f64) -> f64 {
    2.0 * cost * ttp_cost / (sum + root)
}

/// Larger root of `w² + w(d − b) + cĉ − bd = 0`.
pub fn wage(budget: f64, deposit: f64, cost: f64, ttp_cost: f64) -> Result<f64> {
    check_split(budget, deposit, cost, ttp_cost)?;
    let sum = budget + deposit;
    let r = root(sum, cost, ttp_cost)?;
    Ok(budget - f_stable(sum, cost, ttp_cost, r))
}

/// Probability `c / (w + d)` with which the client hires the TTP.
pub fn audit_probability(budget: f64, deposit: f64, cost: f64, ttp_cost: f64) -> Result<f64> {
    let w = wage(budget, deposit, cost, ttp_cost)?;
    Ok(cost / (w + deposit))
}

/// Expected verification time `k · (b − w)`.
pub fn verification_time(
    budget: f64,
    deposit: f64,
    cost: f64,
    ttp_cost: f64,
    k: f64,
) -> Result<f64> {
    check_k(k)?;
    let w = wage(budget, deposit, cost, ttp_cost)?;
    Ok(k * (budget - w))
}

/// `f(s)`; valid for any `s > 0` with `s² ≥ 4cĉ`, including the boundary.
pub fn f_value(sum: f64, cost: f64, ttp_cost: f64) -> Result<f64> {
    check_costs(cost, ttp_cost)?;
    if !(sum.is_finite() && sum > 0.0) {
        return Err(Error::Domain(format!("s must be positive, got {sum}")));
    }
    let disc = sum * sum - 4.0 * cost * ttp_cost;
    if disc < 0.0 {
        return Err(Error::Infeasible(format!(
            "s = {sum} gives negative discriminant {disc}"
        )));
    }
    Ok(f_stable(sum, cost, ttp_cost, disc.sqrt()))
}

/// `f'(s) = (1 − s/√(s² − 4cĉ)) / 2`, computed as `−2cĉ / (r(s + r))`.
/// Strictly negative and strictly increasing in `s`.
pub fn f_prime(sum: f64, cost: f64, ttp_cost: f64) -> Result<f64> {
    check_costs(cost, ttp_cost)?;
    if !(sum.is_finite() && sum > 0.0) {
        return Err(Error::Domain(format!("s must be positive, got {sum}")));
    }
    let r = root(sum, cost, ttp_cost)
        .map_err(|_| Error::Domain(format!("f' is singular at s = {sum}")))?;
    Ok(-2.0 * cost * ttp_cost / (r * (sum + r)))
}

/// Inputs to the hot loops are validated once up front; these skip the checks.
pub(crate) mod unchecked {
    pub fn f(sum: f64, cost: f64, ttp_cost: f64) -> f64 {
        let r = (sum * sum - 4.0 * cost * ttp_cost).max(0.0).sqrt();
        2.0 * cost * ttp_cost / (sum + r)
    }

    pub fn f_prime(sum: f64, cost: f64, ttp_cost: f64) -> f64 {
        let r = (sum * sum - 4.0 * cost * ttp_cost).max(0.0).sqrt();
        -2.0 * cost * ttp_cost / (r * (sum + r))
    }

    /// Point where `f'` equals `slope` (`slope < 0`).
    pub fn f_prime_inverse(slope: f64, cost: f64, ttp_cost: f64) -> f64 {
        let q = 1.0 - 2.0 * slope;
        2.0 * q * (cost * ttp_cost).sqrt() / ((q - 1.0) * (q + 1.0)).sqrt()
    }
}

/// Honesty condition for a rational server: `w ≥ c` and `p ≥ c / (w + d)`.
pub fn check_security(allocation: &Allocation, task: &TaskSpec) -> bool {
    let a = allocation;
    if ![a.wage, a.deposit, a.audit_prob]
        .iter()
        .all(|v| v.is_finite())
    {
        return false;
    }
    a.wage >= task.cost - SECURITY_SLACK
        && a.audit_prob >= task.cost / (a.wage + a.deposit) - SECURITY_SLACK
}
