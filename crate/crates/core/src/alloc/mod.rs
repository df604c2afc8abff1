//! Static allocation of client budgets and the server's deposit fund.
//!
//! The greedy allocators work on `s = b + d` per task: every task starts at
//! its floor `min_budget + ĉ`, the remaining fund is handed out in units of
//! `δ`, and the final sums are split back into budget and deposit.

mod baseline;
mod greedy;
mod multi;
mod nash;
mod oracle;
mod single;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{at_least, Allocation, ClientId, ModelParams, TaskId, TaskSpec};

pub use baseline::{baseline_allocate, BaselineStrategy};
pub use greedy::MarginalRule;
pub use multi::{allocate_multi_client, split_deposit, DepositSplit};
pub use nash::{verify_nash, NASH_MARGIN};
pub use oracle::{brute_force_oracle, brute_force_oracle_capped, OracleCap, OracleResult};
pub use single::allocate_single_client;

/// One client's budget and its tasks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClientBundle {
    pub client_id: ClientId,
    pub budget_total: f64,
    pub tasks: Vec<TaskSpec>,
}

impl ClientBundle {
    pub fn new(client_id: u64, budget_total: f64, tasks: Vec<TaskSpec>) -> Self {
        Self {
            client_id: ClientId(client_id),
            budget_total,
            tasks,
        }
    }

    /// Sum of the per-task budget floors.
    pub fn min_budget_total(&self) -> f64 {
        self.tasks.iter().map(TaskSpec::min_budget).sum()
    }

    pub fn ttp_cost_total(&self) -> f64 {
        self.tasks.iter().map(|t| t.ttp_cost).sum()
    }
}

/// Joint action of the server and all clients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationPlan {
    /// One entry per task, clients in input order, tasks in bundle order.
    pub allocations: Vec<Allocation>,
    pub per_client_deposit: BTreeMap<ClientId, f64>,
    /// Total off-grid remainder (each below `δ`) folded into argmin tasks.
    pub residual: f64,
}

impl AllocationPlan {
    pub fn get(&self, task: TaskId) -> Option<&Allocation> {
        self.allocations.iter().find(|a| a.task_id == task)
    }

    /// Client-side objective `Σ f(b + d)`, i.e. total budget not paid as wage.
    pub fn sum_f(&self) -> f64 {
        self.allocations.iter().map(|a| a.budget - a.wage).sum()
    }

    pub fn total_wage(&self) -> f64 {
        self.allocations.iter().map(|a| a.wage).sum()
    }

    pub fn total_deposit(&self) -> f64 {
        self.allocations.iter().map(|a| a.deposit).sum()
    }

    pub fn total_budget(&self) -> f64 {
        self.allocations.iter().map(|a| a.budget).sum()
    }
}

/// Flattened, validated view of a multi-client instance.
pub(crate) struct Instance {
    pub tasks: Vec<TaskSpec>,
    /// Task index ranges per client.
    pub members: Vec<Vec<usize>>,
    pub budgets: Vec<f64>,
    pub client_ids: Vec<ClientId>,
    pub fund: f64,
}

impl Instance {
    pub fn new(clients: &[ClientBundle], fund: f64, params: &ModelParams) -> Result<Self> {
        ModelParams::new(params.k, params.delta)?;
        if clients.is_empty() {
            return Err(Error::Domain("no clients".into()));
        }
        if !(fund.is_finite() && fund > 0.0) {
            return Err(Error::Domain(format!(
                "server fund must be positive, got {fund}"
            )));
        }
        let mut tasks = Vec::new();
        let mut members = Vec::new();
        let mut seen_tasks = BTreeSet::new();
        let mut seen_clients = BTreeSet::new();
        for c in clients {
            if !seen_clients.insert(c.client_id) {
                return Err(Error::Domain(format!(
                    "duplicate client id {}",
                    c.client_id
                )));
            }
            if c.tasks.is_empty() {
                return Err(Error::Domain(format!(
                    "client {} has no tasks",
                    c.client_id
                )));
            }
            if !(c.budget_total.is_finite() && c.budget_total > 0.0) {
                return Err(Error::Domain(format!(
                    "client {} budget must be positive, got {}",
                    c.client_id, c.budget_total
                )));
            }
            let floor = c.min_budget_total();
            if !at_least(c.budget_total, floor) {
                return Err(Error::Infeasible(format!(
                    "client {} budget {} below budget floor {}",
                    c.client_id, c.budget_total, floor
                )));
            }
            let mut idx = Vec::with_capacity(c.tasks.len());
            for t in &c.tasks {
                TaskSpec::arriving(t.id.0, t.client_id.0, t.cost, t.ttp_cost, t.arrival_time)?;
                if !seen_tasks.insert(t.id) {
                    return Err(Error::Domain(format!("duplicate task id {}", t.id)));
                }
                idx.push(tasks.len());
                tasks.push(*t);
            }
            members.push(idx);
        }
        let ttp_total: f64 = tasks.iter().map(|t| t.ttp_cost).sum();
        if !at_least(fund, ttp_total) {
            return Err(Error::Infeasible(format!(
                "server fund {fund} below deposit floor {ttp_total}"
            )));
        }
        Ok(Self {
            tasks,
            members,
            budgets: clients.iter().map(|c| c.budget_total).collect(),
            client_ids: clients.iter().map(|c| c.client_id).collect(),
            fund,
        })
    }

    pub fn base_sums(&self) -> Vec<f64> {
        self.tasks.iter().map(TaskSpec::base_sum).collect()
    }

    pub fn all_members(&self) -> Vec<usize> {
        (0..self.tasks.len()).collect()
    }

    /// Remaining budget of client `i` above its floors.
    pub fn budget_surplus(&self, i: usize) -> f64 {
        let floor: f64 = self.members[i]
            .iter()
            .map(|&j| self.tasks[j].min_budget())
            .sum();
        (self.budgets[i] - floor).max(0.0)
    }

    pub fn deposit_surplus(&self) -> f64 {
        let floor: f64 = self.tasks.iter().map(|t| t.ttp_cost).sum();
        (self.fund - floor).max(0.0)
    }
}

/// Builds a plan from per-task `(budget, deposit)` pairs in instance order.
pub(crate) fn assemble_plan(
    inst: &Instance,
    splits: &[(f64, f64)],
    params: &ModelParams,
    residual: f64,
) -> Result<AllocationPlan> {
    let allocations = inst
        .tasks
        .iter()
        .zip(splits)
        .map(|(t, &(b, d))| Allocation::new(t, b, d, params.k))
        .collect::<Result<Vec<_>>>()?;
    let per_client_deposit = inst
        .client_ids
        .iter()
        .zip(&inst.members)
        .map(|(&id, m)| (id, m.iter().map(|&j| splits[j].1).sum()))
        .collect();
    Ok(AllocationPlan {
        allocations,
        per_client_deposit,
        residual,
    })
}
