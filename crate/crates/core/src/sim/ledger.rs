use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::TaskId;

/// Ledger amounts are counted in integer units of `1 / FUND_SCALE`, so that
/// locking and releasing never drift.
pub const FUND_SCALE: f64 = 1e9;

/// Ledger state right after an event was processed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerSnapshot {
    pub event: u64,
    pub locked: u64,
    pub available: u64,
    /// Σ deposits of released, unfinalized tasks.
    pub outstanding: u64,
}

impl LedgerSnapshot {
    pub fn conserves(&self, total: u64) -> bool {
        self.locked.checked_add(self.available) == Some(total) && self.locked == self.outstanding
    }
}

/// The server's deposit fund: total, locked deposits per task, and what is
/// left to hand out.
#[derive(Debug, Clone)]
pub struct FundLedger {
    total: u64,
    locked: u64,
    deposits: BTreeMap<TaskId, u64>,
}

impl FundLedger {
    pub fn new(fund: f64) -> Result<Self> {
        let total = (fund * FUND_SCALE).round();
        if !(total.is_finite() && total >= 1.0 && total < 2f64.powi(53)) {
            return Err(Error::Config(format!("server fund {fund} out of range")));
        }
        Ok(Self {
            total: total as u64,
            locked: 0,
            deposits: BTreeMap::new(),
        })
    }

    pub fn to_amount(units: u64) -> f64 {
        units as f64 / FUND_SCALE
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn locked(&self) -> u64 {
        self.locked
    }

    pub fn available(&self) -> u64 {
        self.total - self.locked
    }

    pub fn outstanding(&self) -> usize {
        self.deposits.len()
    }

    pub fn lock(&mut self, task: TaskId, units: u64) -> Result<()> {
        if units > self.available() {
            return Err(Error::Consistency(format!(
                "locking {units} for {task} with only {} available",
                self.available()
            )));
        }
        if self.deposits.insert(task, units).is_some() {
            return Err(Error::Consistency(format!(
                "deposit for {task} assigned twice"
            )));
        }
        self.locked += units;
        Ok(())
    }

    /// Returns the deposit of a finalized task to the available fund.
    pub fn release(&mut self, task: TaskId) -> Result<u64> {
        let units = self
            .deposits
            .remove(&task)
            .ok_or_else(|| Error::Consistency(format!("no outstanding deposit for {task}")))?;
        self.locked -= units;
        Ok(units)
    }

    pub fn snapshot(&self, event: u64) -> LedgerSnapshot {
        LedgerSnapshot {
            event,
            locked: self.locked,
            available: self.available(),
            outstanding: self.deposits.values().sum(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lock_and_release() {
        let mut l = FundLedger::new(10.0).unwrap();
        l.lock(TaskId(1), 4_000_000_000).unwrap();
        l.lock(TaskId(2), 6_000_000_000).unwrap();
        assert_eq!(l.available(), 0);
        assert!(l.snapshot(0).conserves(l.total()));
        assert!(l.lock(TaskId(3), 1).is_err());
        assert_eq!(l.release(TaskId(1)).unwrap(), 4_000_000_000);
        assert!(l.release(TaskId(1)).is_err());
        assert_eq!(FundLedger::to_amount(l.available()), 4.0);
        assert!(l.snapshot(1).conserves(l.total()));
    }

    #[test]
    fn double_assignment_rejected() {
        let mut l = FundLedger::new(10.0).unwrap();
        l.lock(TaskId(1), 1).unwrap();
        assert!(matches!(l.lock(TaskId(1), 1), Err(Error::Consistency(_))));
    }
}
