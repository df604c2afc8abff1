//! Deposit-backed verifiable computation outsourcing: per-task incentive
//! formulas, optimal static allocation of budgets and deposit funds, and a
//! discrete-event simulator for sequential and parallel task releasing.

pub mod alloc;
pub mod error;
pub mod model;
pub mod sim;

pub use alloc::{
    allocate_multi_client, allocate_single_client, baseline_allocate, brute_force_oracle,
    brute_force_oracle_capped, split_deposit, verify_nash, AllocationPlan, BaselineStrategy,
    ClientBundle, DepositSplit, MarginalRule, OracleCap, OracleResult,
};
pub use error::{Error, Result};
pub use model::{
    audit_probability, check_security, f_prime, f_value, min_budget, verification_time, wage,
    Allocation, ClientId, ModelParams, TaskId, TaskSpec,
};
