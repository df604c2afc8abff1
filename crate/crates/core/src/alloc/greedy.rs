//! Unit-by-unit greedy distribution of a fund over convex per-task costs.
//!
//! Each step hands one unit `δ` to the task whose marginal change of `f`
//! is the most negative; ties go to the lowest task index. Large unit
//! counts take a shortcut: a threshold on `f'` is located by bisection, every
//! task is pre-filled to just below the threshold, and the heap finishes the
//! last few units. The pre-fill stays strictly inside the set of units the
//! plain greedy would pick, so both paths produce the same result.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::model::{unchecked, TaskSpec};

/// How the greedy ranks tasks when placing the next unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginalRule {
    /// Slope of `f` across the unit about to be added, `(f(s+δ) − f(s)) / δ`.
    /// Exact on the δ-grid.
    #[default]
    Secant,
    /// Tangent slope `f'(s)` at the current point.
    Derivative,
}

impl MarginalRule {
    pub(crate) fn marginal(self, task: &TaskSpec, sum: f64, delta: f64) -> f64 {
        match self {
            MarginalRule::Secant => {
                (unchecked::f(sum + delta, task.cost, task.ttp_cost)
                    - unchecked::f(sum, task.cost, task.ttp_cost))
                    / delta
            }
            MarginalRule::Derivative => unchecked::f_prime(sum, task.cost, task.ttp_cost),
        }
    }
}

/// Below this many units the heap runs alone.
const FAST_PATH_MIN_UNITS: u64 = 256;

#[derive(Debug, Clone, Copy)]
struct Candidate {
    key: f64,
    idx: usize,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    // reversed: BinaryHeap is a max-heap and we want the smallest key,
    // then the smallest index.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .key
            .total_cmp(&self.key)
            .then_with(|| other.idx.cmp(&self.idx))
    }
}

/// Greedy distribution over the tasks listed in `members` (indices into
/// `tasks` and `sums`, ascending).
pub(crate) struct UnitGreedy<'a> {
    pub tasks: &'a [TaskSpec],
    pub delta: f64,
    pub rule: MarginalRule,
}

impl UnitGreedy<'_> {
    /// Adds `units` steps of size `δ` to `sums`, restricted to `members`.
    pub fn distribute(&self, sums: &mut [f64], members: &[usize], units: u64) {
        if units == 0 || members.is_empty() {
            return;
        }
        if members.len() == 1 {
            sums[members[0]] += units as f64 * self.delta;
            return;
        }
        let mut left = units;
        if units >= FAST_PATH_MIN_UNITS {
            left -= self.prefill(sums, members, units);
        }
        self.heap_fill(sums, members, left);
    }

    /// Index in `members` with the most negative marginal at the current sums.
    pub fn argmin(&self, sums: &[f64], members: &[usize]) -> usize {
        let mut best = members[0];
        let mut best_key = self
            .rule
            .marginal(&self.tasks[best], sums[best], self.delta);
        for &j in &members[1..] {
            let key = self.rule.marginal(&self.tasks[j], sums[j], self.delta);
            if key < best_key {
                best = j;
                best_key = key;
            }
        }
        best
    }

    fn heap_fill(&self, sums: &mut [f64], members: &[usize], units: u64) {
        if units == 0 {
            return;
        }
        let mut heap: BinaryHeap<Candidate> = members
            .iter()
            .map(|&idx| Candidate {
                key: self.rule.marginal(&self.tasks[idx], sums[idx], self.delta),
                idx,
            })
            .collect();
        for _ in 0..units {
            let Candidate { idx, .. } = heap.pop().expect("members is non-empty");
            sums[idx] += self.delta;
            heap.push(Candidate {
                key: self.rule.marginal(&self.tasks[idx], sums[idx], self.delta),
                idx,
            });
        }
    }

    /// Number of grid steps of task `j`, starting at `start`, whose tangent
    /// slope is at most `slope`.
    fn steps_below(&self, j: usize, start: f64, slope: f64, cap: u64) -> u64 {
        let t = &self.tasks[j];
        let x = unchecked::f_prime_inverse(slope, t.cost, t.ttp_cost);
        if !(x >= start) {
            return 0;
        }
        let n = ((x - start) / self.delta).floor();
        if n >= cap as f64 {
            cap
        } else {
            n as u64 + 1
        }
    }

    /// Pre-assigns units that the plain greedy is certain to hand out.
    /// Returns the number of units placed.
    fn prefill(&self, sums: &mut [f64], members: &[usize], units: u64) -> u64 {
        let n = members.len() as u64;
        let Some(target) = units.checked_sub(2 * n) else {
            return 0;
        };
        let starts: Vec<f64> = members.iter().map(|&j| sums[j]).collect();
        let total = |slope: f64| -> u64 {
            members
                .iter()
                .zip(&starts)
                .map(|(&j, &s)| self.steps_below(j, s, slope, units + 1))
                .fold(0u64, |acc, c| acc.saturating_add(c))
        };

        let mut lo = members
            .iter()
            .map(|&j| unchecked::f_prime(sums[j], self.tasks[j].cost, self.tasks[j].ttp_cost))
            .fold(f64::INFINITY, f64::min);
        if !(lo.is_finite() && lo < 0.0) || total(lo) > target {
            return 0;
        }
        let mut hi = lo / 2.0;
        let mut expanded = 0;
        while total(hi) <= target {
            lo = hi;
            hi /= 2.0;
            expanded += 1;
            if expanded > 2000 || hi == 0.0 {
                return 0;
            }
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if total(mid) <= target {
                lo = mid;
            } else {
                hi = mid;
            }
        }

        let mut placed = 0;
        for (&j, &s) in members.iter().zip(&starts) {
            // two steps of margin: one for secant vs tangent, one for rounding
            let m = self.steps_below(j, s, lo, units + 1).saturating_sub(2);
            sums[j] = s + m as f64 * self.delta;
            placed += m;
        }
        debug_assert!(placed <= target);
        placed
    }
}

/// Splits `amount` into whole units of `delta` and a residual in `[0, δ)`.
/// Quotients within `1e-9` of the next integer round up so that amounts
/// that are integral up to rounding give an empty residual.
pub(crate) fn split_units(amount: f64, delta: f64) -> (u64, f64) {
    if amount <= 0.0 {
        return (0, 0.0);
    }
    let units = (amount / delta + 1e-9).floor();
    let residual = (amount - units * delta).max(0.0);
    let residual = if residual < 1e-12 * amount.max(delta) {
        0.0
    } else {
        residual
    };
    (units as u64, residual)
}
