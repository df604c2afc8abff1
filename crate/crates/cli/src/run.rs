use anyhow::{Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use vcalloc::sim::{
    collect_metrics, generate_stream, run_scheduler, MetricsReport, Scheduler, StreamParams,
    TaskTimeline,
};
use vcalloc::{
    allocate_multi_client, baseline_allocate, verify_nash, AllocationPlan, BaselineStrategy,
    ClientBundle, ModelParams, TaskSpec,
};

use crate::config::{ExperimentConfig, Mode, SchedulerKind, SweepVar};
use crate::output::{
    fmt_num, summary_path, Table, DYNAMIC_SCHEMA, DYNAMIC_SUMMARY_SCHEMA, STATIC_SCHEMA,
    STATIC_SUMMARY_SCHEMA, TRACE_SCHEMA,
};
use crate::UsageError;

/// One simulated grid point.
#[derive(Debug, Clone)]
pub struct Cell {
    pub sweep_value: Option<f64>,
    pub scheduler: Scheduler,
    pub seed: u64,
    pub stream: StreamParams,
}

impl Cell {
    fn label(&self) -> String {
        let value = self.sweep_value.map(fmt_num).unwrap_or_else(|| "-".into());
        format!(
            "value {value}, {}, seed {}",
            series_name(&self.scheduler),
            self.seed
        )
    }
}

pub fn series_name(s: &Scheduler) -> String {
    match s {
        Scheduler::Sequential => "sequential".into(),
        Scheduler::Parallel { alpha, .. } => format!("parallel_alpha_{}", fmt_num(*alpha)),
    }
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub cell: Cell,
    pub metrics: MetricsReport,
    pub forced_releases: usize,
    pub trace: Option<Vec<(TaskSpec, TaskTimeline)>>,
}

/// Grid in `(sweep value, scheduler, seed)` order.
pub fn expand_cells(config: &ExperimentConfig) -> Vec<Cell> {
    let values: Vec<Option<f64>> = match &config.sweep {
        Some(s) => s.values.iter().copied().map(Some).collect(),
        None => vec![None],
    };
    let mut kinds = config.schedulers.clone();
    kinds.sort();
    kinds.dedup();
    let mut cells = Vec::new();
    for value in values {
        let (stream, alpha_override, beta) = match (&config.sweep, value) {
            (Some(sweep), Some(v)) => {
                let (p, a, b) = sweep.apply(v, &config.stream, 0.0, config.beta);
                let a = (sweep.variable == SweepVar::Alpha).then_some(a);
                (p, a, b)
            }
            _ => (config.stream, None, config.beta),
        };
        let mut schedulers = Vec::new();
        for kind in &kinds {
            match kind {
                SchedulerKind::Sequential => schedulers.push(Scheduler::Sequential),
                SchedulerKind::Parallel => match alpha_override {
                    Some(alpha) => schedulers.push(Scheduler::Parallel { alpha, beta }),
                    None => schedulers.extend(
                        config
                            .alphas
                            .iter()
                            .map(|&alpha| Scheduler::Parallel { alpha, beta }),
                    ),
                },
            }
        }
        for scheduler in schedulers {
            for &seed in &config.seeds {
                cells.push(Cell {
                    sweep_value: value,
                    scheduler,
                    seed,
                    stream: StreamParams { seed, ..stream },
                });
            }
        }
    }
    cells
}

pub fn simulate_cell(cell: &Cell, keep_trace: bool) -> Result<CellResult> {
    let run = || -> vcalloc::Result<CellResult> {
        let stream = generate_stream(&cell.stream)?;
        let model = ModelParams::for_tasks(&stream)?;
        let run = run_scheduler(&stream, &cell.stream, &model, cell.scheduler)?;
        let metrics = collect_metrics(&run.timelines, &stream, &cell.stream, &model)?;
        Ok(CellResult {
            cell: cell.clone(),
            metrics,
            forced_releases: run.forced_releases,
            trace: keep_trace.then(|| stream.into_iter().zip(run.timelines).collect()),
        })
    };
    run().with_context(|| format!("cell {}", cell.label()))
}

/// Runs every cell, in parallel, returning results in grid order.
pub fn run_cells(cells: &[Cell], keep_trace: bool) -> Result<Vec<CellResult>> {
    cells
        .par_iter()
        .map(|c| simulate_cell(c, keep_trace))
        .collect()
}

const DYNAMIC_METRICS: [&str; 11] = [
    "n_tasks",
    "w_over_b",
    "w_over_c",
    "w_over_tau",
    "total_wage",
    "mean_delay_total",
    "delay_computation",
    "delay_release",
    "delay_ttp",
    "delay_confirmation",
    "hire_rate",
];

fn metric_values(m: &MetricsReport) -> [f64; 11] {
    [
        m.n_tasks as f64,
        m.w_over_b,
        m.w_over_c,
        m.w_over_tau,
        m.total_wage,
        m.mean_delay_total,
        m.delay.computation,
        m.delay.release,
        m.delay.ttp,
        m.delay.confirmation,
        m.hire_rate,
    ]
}

fn cell_keys(config: &ExperimentConfig, cell: &Cell) -> Vec<String> {
    let (alpha, beta) = match cell.scheduler {
        Scheduler::Sequential => (String::new(), String::new()),
        Scheduler::Parallel { alpha, beta } => (fmt_num(alpha), fmt_num(beta)),
    };
    vec![
        config
            .sweep
            .as_ref()
            .map_or("none".to_string(), |s| s.variable.to_string()),
        cell.sweep_value.map(fmt_num).unwrap_or_default(),
        series_name(&cell.scheduler),
        cell.scheduler.name().to_string(),
        alpha,
        beta,
    ]
}

pub fn dynamic_table(config: &ExperimentConfig, results: &[CellResult]) -> Table {
    let mut header = vec![
        "sweep_variable",
        "sweep_value",
        "series",
        "scheduler",
        "alpha",
        "beta",
        "seed",
    ];
    header.extend(DYNAMIC_METRICS);
    header.push("forced_releases");
    let mut t = Table::new(DYNAMIC_SCHEMA, header);
    for r in results {
        let mut row = cell_keys(config, &r.cell);
        row.push(r.cell.seed.to_string());
        row.extend(metric_values(&r.metrics).iter().map(|&v| fmt_num(v)));
        row.push(r.forced_releases.to_string());
        t.rows.push(row);
    }
    t
}

/// Seed-averaged rows, one per `(sweep value, series)` in grid order.
pub fn dynamic_summary(config: &ExperimentConfig, results: &[CellResult]) -> Table {
    let mut header = vec![
        "sweep_variable",
        "sweep_value",
        "series",
        "scheduler",
        "alpha",
        "beta",
        "n_seeds",
    ];
    header.extend(DYNAMIC_METRICS);
    let mut t = Table::new(DYNAMIC_SUMMARY_SCHEMA, header);
    // cells of one group are contiguous: seeds vary fastest
    for group in results.chunks(config.seeds.len()) {
        let n = group.len() as f64;
        let mut sums = [0.0; 11];
        for r in group {
            for (s, v) in sums.iter_mut().zip(metric_values(&r.metrics)) {
                *s += v;
            }
        }
        let mut row = cell_keys(config, &group[0].cell);
        row.push(group.len().to_string());
        row.extend(sums.iter().map(|&s| fmt_num(s / n)));
        t.rows.push(row);
    }
    t
}

pub fn trace_table(config: &ExperimentConfig, results: &[CellResult]) -> Table {
    let mut t = Table::new(
        TRACE_SCHEMA,
        vec![
            "sweep_variable",
            "sweep_value",
            "series",
            "seed",
            "task_id",
            "client_id",
            "cost",
            "ttp_cost",
            "budget",
            "deposit",
            "wage",
            "audit_prob",
            "verify_time",
            "t_arrive",
            "t_compute_done",
            "t_release",
            "t_ttp_done",
            "t_finalize",
            "hired_ttp",
        ],
    );
    for r in results {
        let keys = cell_keys(config, &r.cell);
        for (task, tl) in r.trace.iter().flatten() {
            let a = &tl.allocation;
            t.rows.push(vec![
                keys[0].clone(),
                keys[1].clone(),
                keys[2].clone(),
                r.cell.seed.to_string(),
                task.id.0.to_string(),
                task.client_id.0.to_string(),
                fmt_num(task.cost),
                fmt_num(task.ttp_cost),
                fmt_num(a.budget),
                fmt_num(a.deposit),
                fmt_num(a.wage),
                fmt_num(a.audit_prob),
                fmt_num(a.verify_time),
                fmt_num(tl.t_arrive),
                fmt_num(tl.t_compute_done),
                fmt_num(tl.t_release),
                tl.t_ttp_done.map(fmt_num).unwrap_or_default(),
                fmt_num(tl.t_finalize),
                tl.hired_ttp.to_string(),
            ]);
        }
    }
    t
}

/// Random static instance for `seed`.
pub fn static_instance(
    config: &ExperimentConfig,
    seed: u64,
) -> Result<(Vec<ClientBundle>, f64, ModelParams)> {
    let p = &config.static_params;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut clients = Vec::with_capacity(p.n_clients);
    let mut id = 0u64;
    for i in 0..p.n_clients {
        let mut tasks = Vec::with_capacity(p.tasks_per_client);
        for _ in 0..p.tasks_per_client {
            let cost = rng.random_range(p.cost_min..=p.cost_max);
            let ratio = rng.random_range(p.ttp_ratio_min..=p.ttp_ratio_max);
            tasks.push(TaskSpec::new(id, i as u64, cost, ratio * cost)?);
            id += 1;
        }
        let budget = p.budget_ratio * tasks.iter().map(|t| t.cost).sum::<f64>();
        clients.push(ClientBundle::new(i as u64, budget, tasks));
    }
    let all = clients.iter().flat_map(|c| &c.tasks);
    let fund = p.fund_ratio * all.clone().map(|t| t.ttp_cost).sum::<f64>();
    let min_cost = all.map(|t| t.cost).fold(f64::INFINITY, f64::min);
    let model = ModelParams::new(1.0, p.delta_fraction * min_cost)?;
    Ok((clients, fund, model))
}

#[derive(Debug, Clone)]
pub struct StaticRow {
    pub seed: u64,
    pub strategy: &'static str,
    pub n_tasks: usize,
    pub sum_f: f64,
    pub total_wage: f64,
    pub total_budget: f64,
    pub total_deposit: f64,
    pub nash: bool,
}

fn static_row(seed: u64, strategy: &'static str, plan: &AllocationPlan, nash: bool) -> StaticRow {
    StaticRow {
        seed,
        strategy,
        n_tasks: plan.allocations.len(),
        sum_f: plan.sum_f(),
        total_wage: plan.total_wage(),
        total_budget: plan.total_budget(),
        total_deposit: plan.total_deposit(),
        nash,
    }
}

/// Greedy and every baseline on one random instance per seed.
pub fn run_static(config: &ExperimentConfig) -> Result<Vec<StaticRow>> {
    let per_seed: Vec<Vec<StaticRow>> = config
        .seeds
        .par_iter()
        .map(|&seed| -> Result<Vec<StaticRow>> {
            let (clients, fund, model) = static_instance(config, seed)?;
            let ctx = || format!("static instance for seed {seed}");
            let greedy = allocate_multi_client(&clients, fund, &model).with_context(ctx)?;
            let nash = verify_nash(&greedy, &clients, fund, &model);
            let mut rows = vec![static_row(seed, "greedy", &greedy, nash)];
            for s in BaselineStrategy::ALL {
                let plan = baseline_allocate(s, &clients, fund, &model).with_context(ctx)?;
                let nash = verify_nash(&plan, &clients, fund, &model);
                rows.push(static_row(seed, s.name(), &plan, nash));
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    Ok(per_seed.into_iter().flatten().collect())
}

pub fn static_table(rows: &[StaticRow]) -> Table {
    let mut t = Table::new(
        STATIC_SCHEMA,
        vec![
            "strategy",
            "seed",
            "n_tasks",
            "sum_f",
            "total_wage",
            "total_budget",
            "total_deposit",
            "nash",
        ],
    );
    for r in rows {
        t.rows.push(vec![
            r.strategy.to_string(),
            r.seed.to_string(),
            r.n_tasks.to_string(),
            fmt_num(r.sum_f),
            fmt_num(r.total_wage),
            fmt_num(r.total_budget),
            fmt_num(r.total_deposit),
            r.nash.to_string(),
        ]);
    }
    t
}

pub fn static_summary(rows: &[StaticRow]) -> Table {
    let mut t = Table::new(
        STATIC_SUMMARY_SCHEMA,
        vec![
            "strategy",
            "n_seeds",
            "sum_f",
            "total_wage",
            "total_budget",
            "total_deposit",
        ],
    );
    let mut strategies: Vec<&'static str> = Vec::new();
    for r in rows {
        if !strategies.contains(&r.strategy) {
            strategies.push(r.strategy);
        }
    }
    for s in strategies {
        let group: Vec<&StaticRow> = rows.iter().filter(|r| r.strategy == s).collect();
        let n = group.len() as f64;
        let mean = |f: fn(&StaticRow) -> f64| fmt_num(group.iter().map(|r| f(r)).sum::<f64>() / n);
        t.rows.push(vec![
            s.to_string(),
            group.len().to_string(),
            mean(|r| r.sum_f),
            mean(|r| r.total_wage),
            mean(|r| r.total_budget),
            mean(|r| r.total_deposit),
        ]);
    }
    t
}

/// Runs the configured experiment and writes its CSV files; returns the
/// paths written.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<std::path::PathBuf>> {
    config.validate()?;
    let summary = summary_path(&config.out);
    let mut written = vec![config.out.clone(), summary.clone()];
    match config.mode {
        Mode::Static => {
            if config.sweep.is_some() {
                return Err(UsageError("sweep: not supported in static mode".into()).into());
            }
            let rows = run_static(config)?;
            static_table(&rows).write_file(&config.out)?;
            static_summary(&rows).write_file(&summary)?;
        }
        Mode::Dynamic => {
            let cells = expand_cells(config);
            log::info!("running {} cells", cells.len());
            let results = run_cells(&cells, config.trace.is_some())?;
            dynamic_table(config, &results).write_file(&config.out)?;
            dynamic_summary(config, &results).write_file(&summary)?;
            if let Some(path) = &config.trace {
                trace_table(config, &results).write_file(path)?;
                written.push(path.clone());
            }
        }
    }
    Ok(written)
}
