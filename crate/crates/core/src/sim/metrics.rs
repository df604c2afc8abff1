use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelParams, TaskSpec};

use super::engine::TaskTimeline;
use super::stream::StreamParams;

/// Mean per-task delay split into its four parts, in units of `τ`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DelayComponents {
    pub computation: f64,
    pub release: f64,
    pub ttp: f64,
    pub confirmation: f64,
}

impl DelayComponents {
    pub fn total(&self) -> f64 {
        self.computation + self.release + self.ttp + self.confirmation
    }
}

/// Aggregate outcome of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub n_tasks: usize,
    /// Σ wage / Σ budget.
    pub w_over_b: f64,
    /// Mean of wage / cost.
    pub w_over_c: f64,
    /// Σ wage per `τ` of makespan (first arrival to last finalization).
    pub w_over_tau: f64,
    pub total_wage: f64,
    pub mean_delay_total: f64,
    pub delay: DelayComponents,
    pub hire_rate: f64,
}

/// Summarizes a run; `timelines` must cover every task of `stream`, in
/// stream order.
pub fn collect_metrics(
    timelines: &[TaskTimeline],
    stream: &[TaskSpec],
    params: &StreamParams,
    model: &ModelParams,
) -> Result<MetricsReport> {
    if timelines.len() != stream.len() {
        return Err(Error::IncompleteTrace(format!(
            "{} of {} tasks finalized",
            timelines.len(),
            stream.len()
        )));
    }
    if stream.is_empty() {
        return Err(Error::IncompleteTrace("empty trace".into()));
    }
    let n = stream.len() as f64;
    let tau = params.tau;
    let mut wage = 0.0;
    let mut budget = 0.0;
    let mut w_over_c = 0.0;
    let mut total = 0.0;
    let mut hires = 0usize;
    let mut sums = DelayComponents::default();
    let mut first = f64::INFINITY;
    let mut last = f64::NEG_INFINITY;
    for (tl, t) in timelines.iter().zip(stream) {
        if tl.task_id != t.id {
            return Err(Error::IncompleteTrace(format!(
                "timeline for {} where {} was expected",
                tl.task_id, t.id
            )));
        }
        let a = &tl.allocation;
        wage += a.wage;
        budget += a.budget;
        w_over_c += a.wage / t.cost;
        total += tl.t_finalize - tl.t_arrive;
        sums.computation += model.k * t.cost;
        sums.release += tl.t_release - tl.t_compute_done;
        if tl.hired_ttp {
            sums.ttp += model.k * t.ttp_cost;
            hires += 1;
        }
        sums.confirmation += params.confirm_time;
        first = first.min(tl.t_arrive);
        last = last.max(tl.t_finalize);
    }
    let per_task = |x: f64| x / n / tau;
    let makespan = last - first;
    Ok(MetricsReport {
        n_tasks: stream.len(),
        w_over_b: wage / budget,
        w_over_c: w_over_c / n,
        w_over_tau: if makespan > 0.0 {
            wage / (makespan / tau)
        } else {
            f64::NAN
        },
        total_wage: wage,
        mean_delay_total: per_task(total),
        delay: DelayComponents {
            computation: per_task(sums.computation),
            release: per_task(sums.release),
            ttp: per_task(sums.ttp),
            confirmation: per_task(sums.confirmation),
        },
        hire_rate: hires as f64 / n,
    })
}
