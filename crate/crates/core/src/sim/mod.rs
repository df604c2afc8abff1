//! Discrete-event simulation of dynamically arriving tasks under sequential
//! and parallel deposit releasing.
//!
//! Tasks start computing the moment they arrive. A completed task waits in
//! a FIFO queue until the scheduler releases it with a deposit locked from
//! the server's fund; the client then hires the trusted party with the
//! task's audit probability, and after the optional audit and the chain
//! confirmation time the task is finalized and its deposit returns.

mod engine;
mod ledger;
mod metrics;
mod stream;

pub use engine::{run_parallel, run_scheduler, run_sequential, Scheduler, SimRun, TaskTimeline};
pub use ledger::{FundLedger, LedgerSnapshot, FUND_SCALE};
pub use metrics::{collect_metrics, DelayComponents, MetricsReport};
pub use stream::{client_ttp_decision, generate_stream, StreamParams, DEFAULT_TAU};
