use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::alloc::{allocate_multi_client, ClientBundle};
use crate::error::{Error, Result};
use crate::model::{Allocation, ModelParams, TaskId, TaskSpec};

use super::ledger::{FundLedger, LedgerSnapshot, FUND_SCALE};
use super::stream::{client_ttp_decision, decision_rng, StreamParams};

/// Lifecycle of one finalized task.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskTimeline {
    pub task_id: TaskId,
    pub t_arrive: f64,
    pub t_compute_done: f64,
    pub t_release: f64,
    pub t_ttp_done: Option<f64>,
    pub t_finalize: f64,
    pub hired_ttp: bool,
    pub allocation: Allocation,
}

/// How completed tasks are released.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scheduler {
    /// One task at a time, holding the whole fund as deposit.
    Sequential,
    /// Batches gated by the locked share `alpha` and bounded by `beta`
    /// times the available fund in Σĉ.
    Parallel { alpha: f64, beta: f64 },
}

impl Scheduler {
    pub fn name(&self) -> &'static str {
        match self {
            Scheduler::Sequential => "sequential",
            Scheduler::Parallel { .. } => "parallel",
        }
    }
}

/// Output of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimRun {
    pub scheduler: Scheduler,
    /// In stream order.
    pub timelines: Vec<TaskTimeline>,
    /// Total fund in ledger units.
    pub fund_units: u64,
    /// One entry per processed event.
    pub ledger: Vec<LedgerSnapshot>,
    /// Releases forced because the front task alone exceeded the batch
    /// bound while no deposit was locked.
    pub forced_releases: usize,
}

impl SimRun {
    pub fn ledger_conserved(&self) -> bool {
        self.ledger.iter().all(|s| s.conserves(self.fund_units))
    }

    /// Every deposit came back: the run ends with nothing locked.
    pub fn all_deposits_returned(&self) -> bool {
        self.ledger
            .last()
            .is_some_and(|s| s.locked == 0 && s.available == self.fund_units)
    }
}

/// Algorithm: tasks compute on arrival, queue in completion order and are
/// released one at a time with the entire fund as deposit.
pub fn run_sequential(
    stream: &[TaskSpec],
    params: &StreamParams,
    model: &ModelParams,
) -> Result<SimRun> {
    Engine::new(stream, params, model, Scheduler::Sequential)?.run()
}

/// Completed tasks are released in batches whenever at most `alpha` of the
/// fund is locked; a batch takes queued tasks while their Σĉ stays below
/// `beta` times the available fund, and the whole available fund is split
/// across it by the multi-client allocator.
pub fn run_parallel(
    stream: &[TaskSpec],
    params: &StreamParams,
    model: &ModelParams,
    alpha: f64,
    beta: f64,
) -> Result<SimRun> {
    run_scheduler(stream, params, model, Scheduler::Parallel { alpha, beta })
}

pub fn run_scheduler(
    stream: &[TaskSpec],
    params: &StreamParams,
    model: &ModelParams,
    scheduler: Scheduler,
) -> Result<SimRun> {
    Engine::new(stream, params, model, scheduler)?.run()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Kind {
    Finalize,
    ComputeDone,
    Arrival,
}

#[derive(Debug, Clone, Copy)]
struct Event {
    time: f64,
    kind: Kind,
    task: usize,
}

impl Event {
    fn key(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.kind.cmp(&other.kind))
            .then(self.task.cmp(&other.task))
    }
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.key(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    // reversed: BinaryHeap pops the earliest event
    fn cmp(&self, other: &Self) -> Ordering {
        other.key(self)
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Progress {
    compute_done: f64,
    release: Option<(f64, Allocation)>,
    ttp_done: Option<f64>,
    finalize: Option<f64>,
}

struct Engine<'a> {
    stream: &'a [TaskSpec],
    params: &'a StreamParams,
    model: &'a ModelParams,
    scheduler: Scheduler,
    ledger: FundLedger,
    events: BinaryHeap<Event>,
    queue: VecDeque<usize>,
    progress: Vec<Progress>,
    snapshots: Vec<LedgerSnapshot>,
    forced_releases: usize,
}

impl<'a> Engine<'a> {
    fn new(
        stream: &'a [TaskSpec],
        params: &'a StreamParams,
        model: &'a ModelParams,
        scheduler: Scheduler,
    ) -> Result<Self> {
        params.validate()?;
        if let Scheduler::Parallel { alpha, beta } = scheduler {
            if !(0.0..=1.0).contains(&alpha) {
                return Err(Error::Config(format!(
                    "alpha must lie in [0, 1], got {alpha}"
                )));
            }
            if !(beta.is_finite() && beta > 0.0) {
                return Err(Error::Config(format!("beta must be positive, got {beta}")));
            }
        }
        for t in stream {
            if t.ttp_cost > params.server_fund {
                return Err(Error::Config(format!(
                    "server fund {} cannot cover the ttp cost {} of {}",
                    params.server_fund, t.ttp_cost, t.id
                )));
            }
            if params.task_budget(t) < t.min_budget() {
                return Err(Error::Config(format!("budget of {} below its floor", t.id)));
            }
        }
        let events = stream
            .iter()
            .enumerate()
            .map(|(task, t)| Event {
                time: t.arrival_time,
                kind: Kind::Arrival,
                task,
            })
            .collect();
        Ok(Self {
            stream,
            params,
            model,
            scheduler,
            ledger: FundLedger::new(params.server_fund)?,
            events,
            queue: VecDeque::new(),
            progress: vec![Progress::default(); stream.len()],
            snapshots: Vec::with_capacity(3 * stream.len()),
            forced_releases: 0,
        })
    }

    fn run(mut self) -> Result<SimRun> {
        let mut processed = 0u64;
        while let Some(ev) = self.events.pop() {
            match ev.kind {
                Kind::Arrival => {
                    let done = ev.time + self.model.k * self.stream[ev.task].cost;
                    self.progress[ev.task].compute_done = done;
                    self.events.push(Event {
                        time: done,
                        kind: Kind::ComputeDone,
                        task: ev.task,
                    });
                }
                Kind::ComputeDone => {
                    self.queue.push_back(ev.task);
                    self.assign(ev.time)?;
                }
                Kind::Finalize => {
                    self.ledger.release(self.stream[ev.task].id)?;
                    self.progress[ev.task].finalize = Some(ev.time);
                    self.assign(ev.time)?;
                }
            }
            self.snapshots.push(self.ledger.snapshot(processed));
            processed += 1;
        }
        self.finish()
    }

    /// Releases whatever the scheduler allows at time `now`.
    fn assign(&mut self, now: f64) -> Result<()> {
        let Some(&front) = self.queue.front() else {
            return Ok(());
        };
        match self.scheduler {
            Scheduler::Sequential => {
                if self.ledger.locked() == 0 {
                    self.queue.pop_front();
                    self.release_one(now, front)?;
                }
                Ok(())
            }
            Scheduler::Parallel { alpha, beta } => {
                let total = self.ledger.total() as f64;
                if self.ledger.locked() as f64 > alpha * total {
                    return Ok(());
                }
                let avail = FundLedger::to_amount(self.ledger.available());
                let bound = beta * avail;
                let mut acc = 0.0;
                let mut batch = Vec::new();
                while let Some(&j) = self.queue.front() {
                    let c_hat = self.stream[j].ttp_cost;
                    if acc + c_hat < bound && acc + c_hat <= avail {
                        acc += c_hat;
                        batch.push(j);
                        self.queue.pop_front();
                    } else {
                        break;
                    }
                }
                if batch.is_empty() {
                    if self.ledger.locked() == 0 {
                        log::debug!(
                            "{} exceeds the batch bound on an idle fund; releasing it alone",
                            self.stream[front].id
                        );
                        self.forced_releases += 1;
                        self.queue.pop_front();
                        self.release_one(now, front)?;
                    }
                    return Ok(());
                }
                self.release_batch(now, &batch)
            }
        }
    }

    fn release_one(&mut self, now: f64, j: usize) -> Result<()> {
        let units = self.ledger.available();
        self.release_with(now, j, units)
    }

    fn release_batch(&mut self, now: f64, batch: &[usize]) -> Result<()> {
        if let [j] = batch {
            return self.release_one(now, *j);
        }
        let avail_units = self.ledger.available();
        let clients: Vec<ClientBundle> = batch
            .iter()
            .map(|&j| {
                let t = self.stream[j];
                ClientBundle::new(t.id.0, self.params.task_budget(&t), vec![t])
            })
            .collect();
        let plan = allocate_multi_client(&clients, FundLedger::to_amount(avail_units), self.model)?;
        let mut assigned = 0u64;
        let mut units = Vec::with_capacity(batch.len());
        for a in &plan.allocations[..batch.len() - 1] {
            let u = (a.deposit * FUND_SCALE).round() as u64;
            assigned += u;
            units.push(u);
        }
        let last = avail_units
            .checked_sub(assigned)
            .ok_or_else(|| Error::Consistency("batch deposits exceed the available fund".into()))?;
        units.push(last);
        for (&j, u) in batch.iter().zip(units) {
            self.release_with(now, j, u)?;
        }
        Ok(())
    }

    fn release_with(&mut self, now: f64, j: usize, units: u64) -> Result<()> {
        let task = self.stream[j];
        let allocation = Allocation::new(
            &task,
            self.params.task_budget(&task),
            FundLedger::to_amount(units),
            self.model.k,
        )?;
        self.ledger.lock(task.id, units)?;
        let mut rng = decision_rng(self.params.seed, j as u64);
        let hired = client_ttp_decision(allocation.audit_prob.clamp(0.0, 1.0), &mut rng);
        let ttp_done = hired.then_some(now + self.model.k * task.ttp_cost);
        let finalize = ttp_done.unwrap_or(now) + self.params.confirm_time;
        let p = &mut self.progress[j];
        p.release = Some((now, allocation));
        p.ttp_done = ttp_done;
        self.events.push(Event {
            time: finalize,
            kind: Kind::Finalize,
            task: j,
        });
        Ok(())
    }

    fn finish(self) -> Result<SimRun> {
        let timelines = self
            .stream
            .iter()
            .zip(&self.progress)
            .map(|(t, p)| {
                let (t_release, allocation) = p.release.ok_or_else(|| {
                    Error::IncompleteTrace(format!("{} was never released", t.id))
                })?;
                let t_finalize = p.finalize.ok_or_else(|| {
                    Error::IncompleteTrace(format!("{} was never finalized", t.id))
                })?;
                Ok(TaskTimeline {
                    task_id: t.id,
                    t_arrive: t.arrival_time,
                    t_compute_done: p.compute_done,
                    t_release,
                    t_ttp_done: p.ttp_done,
                    t_finalize,
                    hired_ttp: p.ttp_done.is_some(),
                    allocation,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SimRun {
            scheduler: self.scheduler,
            timelines,
            fund_units: self.ledger.total(),
            ledger: self.snapshots,
            forced_releases: self.forced_releases,
        })
    }
}
