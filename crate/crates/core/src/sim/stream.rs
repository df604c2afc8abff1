use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{min_budget, TaskSpec};

/// Workload and environment of one dynamic simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StreamParams {
    /// Mean inter-arrival interval; also the time unit of reported delays.
    pub tau: f64,
    pub n_groups: usize,
    pub tasks_per_group: usize,
    /// Cost of a regular task.
    pub cost_mean: f64,
    pub heavy_prob: f64,
    pub heavy_factor: f64,
    /// `ĉ = ttp_ratio · c`.
    pub ttp_ratio: f64,
    /// Per-task budget `b = budget_ratio · c`.
    pub budget_ratio: f64,
    pub confirm_time: f64,
    pub server_fund: f64,
    pub seed: u64,
}

pub const DEFAULT_TAU: f64 = 5.0;

impl Default for StreamParams {
    fn default() -> Self {
        let tau = DEFAULT_TAU;
        Self {
            tau,
            n_groups: 50,
            tasks_per_group: 100,
            cost_mean: 32.0 * tau,
            heavy_prob: 0.1,
            heavy_factor: 3.0,
            ttp_ratio: 3.0,
            budget_ratio: 2.5,
            confirm_time: 2.0 * tau,
            server_fund: 768.0 * tau,
            seed: 1,
        }
    }
}

impl StreamParams {
    /// Reference fund `d₀ = 768τ`.
    pub fn reference_fund(&self) -> f64 {
        768.0 * self.tau
    }

    pub fn n_tasks(&self) -> usize {
        self.n_groups * self.tasks_per_group
    }

    pub fn task_budget(&self, task: &TaskSpec) -> f64 {
        self.budget_ratio * task.cost
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tau", self.tau),
            ("cost_mean", self.cost_mean),
            ("heavy_factor", self.heavy_factor),
            ("ttp_ratio", self.ttp_ratio),
            ("budget_ratio", self.budget_ratio),
            ("server_fund", self.server_fund),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.confirm_time.is_finite() && self.confirm_time >= 0.0) {
            return Err(Error::Config(format!(
                "confirm_time must be nonnegative, got {}",
                self.confirm_time
            )));
        }
        if !(0.0..=1.0).contains(&self.heavy_prob) {
            return Err(Error::Config(format!(
                "heavy_prob must lie in [0, 1], got {}",
                self.heavy_prob
            )));
        }
        if self.n_groups == 0 || self.tasks_per_group == 0 {
            return Err(Error::Config(
                "stream must contain at least one task".into(),
            ));
        }
        // b / c is scale free, so one cost suffices
        let floor = min_budget(1.0, self.ttp_ratio)?;
        if self.budget_ratio < floor {
            return Err(Error::Config(format!(
                "budget_ratio {} is below the budget floor ratio {floor}",
                self.budget_ratio
            )));
        }
        Ok(())
    }
}

/// Seeded Poisson task stream. Groups are consecutive stretches of the
/// same arrival process; each task's client is its group.
pub fn generate_stream(params: &StreamParams) -> Result<Vec<TaskSpec>> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let gaps = Exp::new(1.0 / params.tau).map_err(|e| Error::Config(e.to_string()))?;
    let mut t = 0.0;
    let mut tasks = Vec::with_capacity(params.n_tasks());
    for group in 0..params.n_groups {
        for _ in 0..params.tasks_per_group {
            t += gaps.sample(&mut rng);
            let heavy = rng.random::<f64>() < params.heavy_prob;
            let cost = if heavy {
                params.heavy_factor * params.cost_mean
            } else {
                params.cost_mean
            };
            let id = tasks.len() as u64;
            tasks.push(TaskSpec::arriving(
                id,
                group as u64,
                cost,
                params.ttp_ratio * cost,
                t,
            )?);
        }
    }
    Ok(tasks)
}

/// Whether the client hires the trusted party: a Bernoulli(`p`) draw.
pub fn client_ttp_decision<R: Rng + ?Sized>(p: f64, rng: &mut R) -> bool {
    debug_assert!((0.0..=1.0).contains(&p), "probability {p}");
    rng.random::<f64>() < p
}

const DECISION_SALT: u64 = 0x7f4a_7c15_9e37_79b9;

/// Decision generator for one task. Every task draws from its own stream of
/// a generator seeded independently of the arrival process, so the draw a
/// task sees does not depend on when or alongside whom it is released.
pub(crate) fn decision_rng(seed: u64, task_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ DECISION_SALT);
    rng.set_stream(task_index);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> StreamParams {
        StreamParams {
            n_groups: 2,
            tasks_per_group: 10,
            seed,
            ..StreamParams::default()
        }
    }

    #[test]
    fn defaults_in_tau_units() {
        let p = StreamParams::default();
        assert_eq!(p.cost_mean / p.tau, 32.0);
        assert_eq!(p.confirm_time / p.tau, 2.0);
        assert_eq!(p.server_fund, p.reference_fund());
        assert_eq!(p.n_tasks(), 5000);
        p.validate().unwrap();
    }

    #[test]
    fn deterministic() {
        assert_eq!(
            generate_stream(&small(9)).unwrap(),
            generate_stream(&small(9)).unwrap()
        );
        assert_ne!(
            generate_stream(&small(9)).unwrap(),
            generate_stream(&small(10)).unwrap()
        );
    }

    #[test]
    fn stream_shape() {
        let p = small(3);
        let s = generate_stream(&p).unwrap();
        assert_eq!(s.len(), 20);
        assert!(s.windows(2).all(|w| w[0].arrival_time <= w[1].arrival_time));
        assert_eq!(s[9].client_id.0, 0);
        assert_eq!(s[10].client_id.0, 1);
        for t in &s {
            assert_eq!(t.ttp_cost, 3.0 * t.cost);
            assert!(p.task_budget(t) >= t.min_budget());
        }
    }

    #[test]
    fn no_heavy_tasks() {
        let p = StreamParams {
            heavy_prob: 0.0,
            ..small(4)
        };
        assert!(generate_stream(&p)
            .unwrap()
            .iter()
            .all(|t| t.cost == p.cost_mean));
    }

    #[test]
    fn heavy_fraction_golden() {
        let p = StreamParams::default();
        let s = generate_stream(&p).unwrap();
        let heavy = s.iter().filter(|t| t.cost > p.cost_mean).count();
        let frac = heavy as f64 / s.len() as f64;
        assert!((0.08..=0.12).contains(&frac), "{frac}");
        assert_eq!(heavy, HEAVY_AT_SEED_1);
    }

    const HEAVY_AT_SEED_1: usize = 471;

    #[test]
    fn rejects_bad_config() {
        let bad = StreamParams {
            budget_ratio: 1.7,
            ..StreamParams::default()
        };
        assert!(matches!(bad.validate(), Err(Error::Config(_))));
        let bad = StreamParams {
            heavy_prob: 1.5,
            ..StreamParams::default()
        };
        assert!(matches!(generate_stream(&bad), Err(Error::Config(_))));
        let bad = StreamParams {
            n_groups: 0,
            ..StreamParams::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn decisions() {
        let mut rng = decision_rng(1, 0);
        assert!((0..1000).all(|_| !client_ttp_decision(0.0, &mut rng)));
        assert!((0..1000).all(|_| client_ttp_decision(1.0, &mut rng)));
        let hires = (0..10_000)
            .filter(|_| client_ttp_decision(0.5, &mut rng))
            .count();
        let rate = hires as f64 / 1e4;
        assert!((0.48..=0.52).contains(&rate), "{rate}");
        assert_eq!(hires, HIRES_AT_SEED_1);
    }

    const HIRES_AT_SEED_1: usize = 4944;

    #[test]
    fn decision_streams_are_independent() {
        let a: f64 = decision_rng(1, 0).random();
        let b: f64 = decision_rng(1, 1).random();
        let c: f64 = decision_rng(2, 0).random();
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, decision_rng(1, 0).random::<f64>());
    }
}
