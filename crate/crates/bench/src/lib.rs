//! Shared fixtures for the benchmarks.

use vcalloc::sim::{generate_stream, StreamParams};
use vcalloc::{ClientBundle, ModelParams, TaskSpec};

/// `n_clients` clients with `tasks_per_client` tasks each, costs cycling
/// through 1..=7 and `ĉ / c` through 1..=5; budgets `2.5·Σc`, fund `fund_ratio·Σĉ`.
pub fn static_instance(
    n_clients: usize,
    tasks_per_client: usize,
    fund_ratio: f64,
) -> (Vec<ClientBundle>, f64, ModelParams) {
    let mut id = 0u64;
    let clients: Vec<ClientBundle> = (0..n_clients)
        .map(|i| {
            let tasks: Vec<TaskSpec> = (0..tasks_per_client)
                .map(|_| {
                    let cost = 1.0 + (id % 7) as f64;
                    let t = TaskSpec::new(id, i as u64, cost, cost * (1 + id % 5) as f64).unwrap();
                    id += 1;
                    t
                })
                .collect();
            let budget = 2.5 * tasks.iter().map(|t| t.cost).sum::<f64>();
            ClientBundle::new(i as u64, budget, tasks)
        })
        .collect();
    let fund = fund_ratio
        * clients
            .iter()
            .map(ClientBundle::ttp_cost_total)
            .sum::<f64>();
    let model = ModelParams::for_tasks(clients.iter().flat_map(|c| &c.tasks)).unwrap();
    (clients, fund, model)
}

/// Default-sized stream with the fund scaled by `fund_multiple`.
pub fn default_stream(fund_multiple: f64) -> (Vec<TaskSpec>, StreamParams, ModelParams) {
    let base = StreamParams::default();
    let params = StreamParams {
        server_fund: fund_multiple * base.reference_fund(),
        ..base
    };
    let stream = generate_stream(&params).unwrap();
    let model = ModelParams::for_tasks(&stream).unwrap();
    (stream, params, model)
}
