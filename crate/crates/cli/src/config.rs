use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use vcalloc::sim::StreamParams;

use crate::UsageError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Static,
    Dynamic,
}

/// Parameter varied across the cells of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVar {
    /// Regular task cost in units of `τ`; the fund keeps its ratio to the
    /// cost.
    Cost,
    /// Confirmation time in units of `τ`.
    ConfirmTime,
    BudgetRatio,
    HeavyProb,
    /// Server fund in multiples of `d₀ = 768τ`.
    ServerFund,
    Alpha,
    Beta,
}

impl SweepVar {
    pub const ALL: [SweepVar; 7] = [
        SweepVar::Cost,
        SweepVar::ConfirmTime,
        SweepVar::BudgetRatio,
        SweepVar::HeavyProb,
        SweepVar::ServerFund,
        SweepVar::Alpha,
        SweepVar::Beta,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepVar::Cost => "cost",
            SweepVar::ConfirmTime => "confirm_time",
            SweepVar::BudgetRatio => "budget_ratio",
            SweepVar::HeavyProb => "heavy_prob",
            SweepVar::ServerFund => "server_fund",
            SweepVar::Alpha => "alpha",
            SweepVar::Beta => "beta",
        }
    }
}

impl fmt::Display for SweepVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SweepVar {
    type Err = UsageError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SweepVar::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| UsageError(format!("unknown sweep variable `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub variable: SweepVar,
    pub values: Vec<f64>,
}

impl Sweep {
    /// Stream parameters and batch knobs of one cell.
    pub fn apply(
        &self,
        value: f64,
        base: &StreamParams,
        alpha: f64,
        beta: f64,
    ) -> (StreamParams, f64, f64) {
        let mut p = *base;
        let (mut a, mut b) = (alpha, beta);
        match self.variable {
            SweepVar::Cost => {
                let fund_per_cost = base.server_fund / base.cost_mean;
                p.cost_mean = value * base.tau;
                p.server_fund = fund_per_cost * p.cost_mean;
            }
            SweepVar::ConfirmTime => p.confirm_time = value * base.tau,
            SweepVar::BudgetRatio => p.budget_ratio = value,
            SweepVar::HeavyProb => p.heavy_prob = value,
            SweepVar::ServerFund => p.server_fund = value * base.reference_fund(),
            SweepVar::Alpha => a = value,
            SweepVar::Beta => b = value,
        }
        (p, a, b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchedulerKind {
    Sequential,
    Parallel,
}

/// Random static instances for the greedy-versus-baselines comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StaticParams {
    pub n_clients: usize,
    pub tasks_per_client: usize,
    pub cost_min: f64,
    pub cost_max: f64,
    /// `ĉ / c` is drawn uniformly from `[ttp_ratio_min, ttp_ratio_max]`.
    pub ttp_ratio_min: f64,
    pub ttp_ratio_max: f64,
    /// Client budget `b_i = budget_ratio · Σc`.
    pub budget_ratio: f64,
    /// Server fund `d = fund_ratio · Σĉ`.
    pub fund_ratio: f64,
    /// Allocation unit as a fraction of the cheapest task cost.
    pub delta_fraction: f64,
}

impl Default for StaticParams {
    fn default() -> Self {
        Self {
            n_clients: 3,
            tasks_per_client: 4,
            cost_min: 10.0,
            cost_max: 100.0,
            ttp_ratio_min: 1.0,
            ttp_ratio_max: 10.0,
            budget_ratio: 2.5,
            fund_ratio: 2.0,
            delta_fraction: 1e-2,
        }
    }
}

/// Everything needed to run one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub schedulers: Vec<SchedulerKind>,
    /// Parallel releasing runs once per entry.
    pub alphas: Vec<f64>,
    pub beta: f64,
    pub seeds: Vec<u64>,
    pub out: PathBuf,
    pub trace: Option<PathBuf>,
    pub sweep: Option<Sweep>,
    pub stream: StreamParams,
    #[serde(rename = "static")]
    pub static_params: StaticParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Dynamic,
            schedulers: vec![SchedulerKind::Sequential, SchedulerKind::Parallel],
            alphas: vec![1.0],
            beta: 0.6,
            seeds: (1..=5).collect(),
            out: PathBuf::from("results.csv"),
            trace: None,
            sweep: None,
            stream: StreamParams::default(),
            static_params: StaticParams::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, UsageError> {
        toml::from_str(text).map_err(|e| UsageError(format!("invalid config: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    pub fn validate(&self) -> Result<(), UsageError> {
        let bad = |field: &str, why: &str| Err(UsageError(format!("{field}: {why}")));
        if self.seeds.is_empty() {
            return bad("seeds", "must not be empty");
        }
        if self.out.as_os_str().is_empty() {
            return bad("out", "must not be empty");
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return bad("sweep.values", "must not be empty");
            }
            if s.values.iter().any(|v| !v.is_finite()) {
                return bad("sweep.values", "must be finite");
            }
        }
        if self.mode == Mode::Static {
            let p = &self.static_params;
            if p.n_clients == 0 || p.tasks_per_client == 0 {
                return bad("static", "needs at least one client with one task");
            }
            if !(p.cost_min > 0.0 && p.cost_max >= p.cost_min) {
                return bad("static.cost_min", "need 0 < cost_min <= cost_max");
            }
            if !(p.ttp_ratio_min > 0.0 && p.ttp_ratio_max >= p.ttp_ratio_min) {
                return bad(
                    "static.ttp_ratio_min",
                    "need 0 < ttp_ratio_min <= ttp_ratio_max",
                );
            }
            if p.budget_ratio < 2.0 {
                return bad(
                    "static.budget_ratio",
                    "must be at least 2 to cover every budget floor",
                );
            }
            if p.fund_ratio < 1.0 {
                return bad(
                    "static.fund_ratio",
                    "must be at least 1 to cover every deposit floor",
                );
            }
            if !(p.delta_fraction > 0.0) {
                return bad("static.delta_fraction", "must be positive");
            }
            return Ok(());
        }
        if self.schedulers.is_empty() {
            return bad("schedulers", "must not be empty");
        }
        if self.schedulers.contains(&SchedulerKind::Parallel) && self.alphas.is_empty() {
            return bad(
                "alphas",
                "must not be empty when parallel releasing is selected",
            );
        }
        if self.alphas.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return bad("alphas", "must lie in [0, 1]");
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return bad("beta", "must be positive");
        }
        self.stream
            .validate()
            .map_err(|e| UsageError(format!("stream: {e}")))
    }
}
