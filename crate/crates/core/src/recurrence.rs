//! The CT-size recurrence with all inequalities tight:
//!
//! ```text
//! T(r, s) = 1                              r = 0 or s = 0
//! T(r, s) = 3                              r = 1, s > 0
//! T(r, s) = T(r-1, s) + T(r-2, s-1) + 1    otherwise
//! ```
//!
//! `r` is the remaining negative-constraint budget, `s` the positive one.
//! `T` counts generated CT nodes, the node itself included.

use num_bigint::BigUint;
use num_traits::One;
use thiserror::Error;

use crate::magnitude::{BigCount, Log2Value};

/// Default cap on `r * s` for the exact backend.
pub const DEFAULT_EXACT_CEILING: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecurrenceError {
    #[error("exact evaluation of T({r}, {s}) exceeds the ceiling of {ceiling} table cells; use the log backend")]
    CeilingExceeded { r: u64, s: u64, ceiling: u64 },

    #[error("induction bound 3*r^s needs r >= 1 and s >= 1, got r = {r}, s = {s}")]
    OutOfDomain { r: u64, s: u64 },
}

/// Negative / positive constraint budgets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RecurrenceArgs {
    pub r: u64,
    pub s: u64,
}

impl RecurrenceArgs {
    pub fn new(r: u64, s: u64) -> Self {
        RecurrenceArgs { r, s }
    }
}

/// Exact `T(r, s)` with the default ceiling.
pub fn eval_exact(r: u64, s: u64) -> Result<BigCount, RecurrenceError> {
    eval_exact_with_ceiling(r, s, DEFAULT_EXACT_CEILING)
}

/// Exact `T(r, s)`; fails when `r * s > ceiling`.
pub fn eval_exact_with_ceiling(r: u64, s: u64, ceiling: u64) -> Result<BigCount, RecurrenceError> {
    if r.saturating_mul(s) > ceiling {
        return Err(RecurrenceError::CeilingExceeded { r, s, ceiling });
    }
    let row = rolling_rows(r as usize, s as usize, BigUint::one(), BigUint::from(3u32), |a, b| {
        a + b + 1u32
    });
    Ok(row[r as usize].clone())
}

/// Full exact table `t[r][s]` for `0..=r_max`, `0..=s_max`.
pub fn exact_table(r_max: usize, s_max: usize) -> Vec<Vec<BigCount>> {
    let mut t = vec![vec![BigUint::one(); s_max + 1]; r_max + 1];
    for s in 1..=s_max {
        if r_max >= 1 {
            t[1][s] = BigUint::from(3u32);
        }
        for r in 2..=r_max {
            t[r][s] = &t[r - 1][s] + &t[r - 2][s - 1] + 1u32;
        }
    }
    t
}

/// `log2 T(r, s)` via log-sum-exp, in `O(r)` memory and `O(r s)` time.
pub fn eval_log(r: u64, s: u64) -> Log2Value {
    eval_log_row(r as usize, s as usize)[r as usize]
}

/// `log2 T(i, s)` for every `i` in `0..=r_max`, at fixed `s`.
pub fn eval_log_row(r_max: usize, s: usize) -> Vec<Log2Value> {
    rolling_rows(r_max, s, Log2Value::ONE, Log2Value::from_count(3), |a, b| {
        Log2Value::sum3(*a, *b, Log2Value::ONE)
    })
}

/// s-major sweep keeping two r-rows: `T(., s-1)` and `T(., s)`.
fn rolling_rows<V: Clone>(
    r_max: usize,
    s: usize,
    one: V,
    three: V,
    step: impl Fn(&V, &V) -> V,
) -> Vec<V> {
    let mut prev = vec![one.clone(); r_max + 1];
    for _ in 1..=s {
        let mut cur = Vec::with_capacity(r_max + 1);
        cur.push(one.clone());
        if r_max >= 1 {
            cur.push(three.clone());
        }
        for r in 2..=r_max {
            let next = step(&cur[r - 1], &prev[r - 2]);
            cur.push(next);
        }
        prev = cur;
    }
    prev
}

/// `log2(3 r^s)`.
pub fn induction_bound(r: u64, s: u64) -> Result<Log2Value, RecurrenceError> {
    if r == 0 || s == 0 {
        return Err(RecurrenceError::OutOfDomain { r, s });
    }
    Ok(Log2Value::from_log2(3f64.log2() + s as f64 * (r as f64).log2()))
}

/// `3 r^s` as an exact integer.
pub fn induction_bound_exact(r: u64, s: u64) -> Result<BigCount, RecurrenceError> {
    if r == 0 || s == 0 {
        return Err(RecurrenceError::OutOfDomain { r, s });
    }
    let s = u32::try_from(s).expect("exponent fits in u32");
    Ok(BigUint::from(r).pow(s) * 3u32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn exact(r: u64, s: u64) -> BigUint {
        eval_exact(r, s).unwrap()
    }

    /// Direct transcription of the recurrence, memo-free.
    fn naive(r: u64, s: u64) -> u64 {
        match (r, s) {
            (0, _) | (_, 0) => 1,
            (1, _) => 3,
            _ => naive(r - 1, s) + naive(r - 2, s - 1) + 1,
        }
    }

    #[test]
    fn base_cases() {
        assert_eq!(exact(0, 5), BigUint::from(1u32));
        assert_eq!(exact(7, 0), BigUint::from(1u32));
        assert_eq!(exact(1, 9), BigUint::from(3u32));
        assert_eq!(exact(0, 0), BigUint::from(1u32));
    }

    #[test]
    fn small_values_unrolled() {
        // T(2,1) = T(1,1) + T(0,0) + 1
        assert_eq!(exact(2, 1), BigUint::from(5u32));
        for r in 1..=50u64 {
            assert_eq!(exact(r, 1), BigUint::from(2 * r + 1));
        }
    }

    #[test]
    fn table_and_rolling_rows_agree_with_naive() {
        let t = exact_table(18, 6);
        for r in 0..=18u64 {
            for s in 0..=6u64 {
                let n = naive(r, s);
                assert_eq!(t[r as usize][s as usize], BigUint::from(n));
                assert_eq!(exact(r, s), BigUint::from(n));
            }
        }
    }

    #[test]
    fn ceiling_is_enforced() {
        assert!(matches!(
            eval_exact(2000, 1000),
            Err(RecurrenceError::CeilingExceeded { .. })
        ));
        assert!(eval_exact_with_ceiling(2000, 1000, 2_000_000).is_ok());
    }

    #[test]
    fn log_backend_base_case() {
        assert!((eval_log(1, 4).log2() - 3f64.log2()).abs() < 1e-15);
        assert_eq!(eval_log(0, 4).log2(), 0.0);
    }

    #[test]
    fn log_backend_matches_exact() {
        let e = Log2Value::from_big(&exact(40, 20)).log2();
        assert!((eval_log(40, 20).log2() - e).abs() <= 1e-6);
        let row = eval_log_row(300, 12);
        let t = exact_table(300, 12);
        for r in 0..=300 {
            let e = Log2Value::from_big(&t[r][12]).log2();
            assert!((row[r].log2() - e).abs() <= 1e-6 * e.max(1.0));
        }
    }

    #[test]
    fn induction_bound_values() {
        assert!((induction_bound(1, 17).unwrap().log2() - 3f64.log2()).abs() < 1e-15);
        assert!((induction_bound(10, 3).unwrap().log2() - 3000f64.log2()).abs() < 1e-12);
        assert!(induction_bound(2, 1).unwrap().log2() >= Log2Value::from_big(&exact(2, 1)).log2());
        assert_eq!(induction_bound_exact(10, 3).unwrap(), BigUint::from(3000u32));
        assert!(induction_bound(0, 3).is_err());
        assert!(induction_bound_exact(3, 0).is_err());
    }

    #[test]
    fn large_log_evaluation_stays_below_induction_bound() {
        let v = eval_log(100_000, 100);
        assert!(v.log2().is_finite());
        assert!(v.log2() <= induction_bound(100_000, 100).unwrap().log2());
    }

    proptest! {
        #[test]
        fn monotone_in_both_budgets(r in 0u64..120, s in 0u64..20) {
            let t = exact(r, s);
            prop_assert!(t <= exact(r + 1, s));
            prop_assert!(t <= exact(r, s + 1));
        }
    }
}
