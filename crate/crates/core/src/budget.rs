//! Work budgets for exhaustive loops.
//!
//! Every enumeration estimates its cost in elementary field operations up
//! front and refuses to start when the estimate exceeds the budget.

use crate::error::{Error, Result};

/// Environment variable overriding [`WorkBudget::DEFAULT`].
pub const BUDGET_ENV: &str = "PRIMCOUNT_WORK_BUDGET";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WorkBudget(u128);

impl WorkBudget {
    pub const DEFAULT: WorkBudget = WorkBudget(10_000_000_000);

    pub const fn new(ops: u128) -> Self {
        WorkBudget(ops)
    }

    pub const fn unlimited() -> Self {
        WorkBudget(u128::MAX)
    }

    /// Default budget, or the value of `PRIMCOUNT_WORK_BUDGET` when set and parseable.
    pub fn from_env() -> Self {
        std::env::var(BUDGET_ENV)
            .ok()
            .and_then(|v| parse_ops(&v))
            .map(WorkBudget)
            .unwrap_or(Self::DEFAULT)
    }

    pub fn limit(&self) -> u128 {
        self.0
    }

    pub fn check(&self, what: &'static str, needed: u128) -> Result<()> {
        if needed > self.0 {
            Err(Error::BudgetExceeded {
                what,
                needed,
                budget: self.0,
            })
        } else {
            Ok(())
        }
    }
}

impl Default for WorkBudget {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Accepts plain integers and scientific shorthand such as `1e9`.
fn parse_ops(s: &str) -> Option<u128> {
    let s = s.trim();
    if let Ok(v) = s.parse::<u128>() {
        return Some(v);
    }
    let v: f64 = s.parse().ok()?;
    (v.is_finite() && v >= 0.0).then(|| v as u128)
}

/// `base^exp` saturating at `u128::MAX`.
pub(crate) fn saturating_pow(base: u128, exp: u32) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base);
    }
    acc
}
