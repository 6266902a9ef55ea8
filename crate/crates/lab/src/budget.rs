use mismatch_core::Budget;

use crate::error::{LabError, LabResult};

pub const BUDGET_ENV: &str = "MISMATCH_LAB_BUDGET";

/// Parses a budget override.
///
/// A bare integer replaces both the atom and the enumeration limit. Otherwise
/// the value is a comma-separated list of `key=value` pairs with keys
/// `atoms`, `enumeration`, `cells` and `simplex`. Unnamed limits keep their
/// defaults.
pub fn parse_budget(text: &str) -> LabResult<Budget> {
    let text = text.trim();
    let bad = |msg: String| LabError::parse(BUDGET_ENV, msg);
    let positive = |key: &str, v: &str| -> LabResult<u64> {
        let n: u64 = v.trim().replace('_', "").parse().map_err(|_| bad(format!("{key}: `{v}` is not an integer")))?;
        if n == 0 {
            return Err(bad(format!("{key} must be positive")));
        }
        Ok(n)
    };
    if !text.contains('=') {
        return Ok(Budget::with_limit(positive("limit", text)?));
    }
    let mut budget = Budget::default();
    for part in text.split(',').filter(|s| !s.trim().is_empty()) {
        let (key, value) = part.split_once('=').ok_or_else(|| bad(format!("`{part}` is not key=value")))?;
        let key = key.trim();
        let n = positive(key, value)?;
        let as_usize = usize::try_from(n).unwrap_or(usize::MAX);
        match key {
            "atoms" => budget.atoms = as_usize,
            "enumeration" => budget.enumeration = n,
            "cells" => budget.cells = as_usize,
            "simplex" => budget.simplex = as_usize,
            other => return Err(bad(format!("unknown budget key `{other}`"))),
        }
    }
    Ok(budget)
}

/// The budget from the environment, or the default when unset.
pub fn budget_from_env() -> LabResult<Budget> {
    match std::env::var(BUDGET_ENV) {
        Ok(v) => parse_budget(&v),
        Err(std::env::VarError::NotPresent) => Ok(Budget::default()),
        Err(e) => Err(LabError::parse(BUDGET_ENV, e)),
    }
}
