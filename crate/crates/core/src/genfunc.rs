//! Generating-function analysis of the CT recurrence.
//!
//! The recurrence's generating function is `F = G / H` with
//!
//! ```text
//! G(x, y) = 1 - x + 2xy - x^2 y
//! H(x, y) = (1 - x)(1 - y)(1 - x - x^2 y)
//! ```
//!
//! Coefficients of `F` are recovered exactly by series inversion. Asymptotic
//! estimates come from the critical points of `H` in the direction `(r, s)`:
//! two multiple points `q1 = (1/phi, 1)`, `q2 = (1, 1)` and, when `r > 2s`, a
//! single point `q3`. Every power `x^-r`, `y^-s` is evaluated in log2 space.

use std::f64::consts::PI;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::magnitude::Log2Value;

/// Golden ratio.
pub const PHI: f64 = 1.618_033_988_749_895;

/// Relative-to-unit residual tolerance for critical points.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;

/// Prefactor of the `q1` contribution, `4 / (3 sqrt5 - 5)`.
pub fn multiple_point_constant() -> f64 {
    4.0 / (3.0 * 5f64.sqrt() - 5.0)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenFuncError {
    #[error("{label:?} is not a valid multiple point: -x^2 y^2 Hdet = {value}")]
    NotMultiplePoint { label: PointLabel, value: f64 },

    #[error("{label:?} is not a single point")]
    NotSinglePoint { label: PointLabel },

    #[error("single-point formula needs r > 2s > 0, got r = {r}, s = {s}")]
    OutsideSingleRegime { r: u64, s: u64 },

    #[error("square-root argument {argument} is not positive (H_y = {h_y}, Q = {q})")]
    NegativeRoot { argument: f64, h_y: f64, q: f64 },

    #[error("critical point {label:?} fails the system: |H| = {h}, |s x H_x - r y H_y| = {direction}")]
    Residual {
        label: PointLabel,
        h: f64,
        direction: f64,
    },

    #[error("linear ratio and s must both be positive, got n = {n}, s = {s}")]
    InvalidLinear { n: u64, s: u64 },
}

/// Exact coefficients `c[r][s]` of `F` for `r <= r_max`, `s <= s_max`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BivariateSeries {
    coeffs: Vec<Vec<BigUint>>,
}

impl BivariateSeries {
    pub fn r_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn s_max(&self) -> usize {
        self.coeffs[0].len() - 1
    }

    pub fn coeff(&self, r: usize, s: usize) -> &BigUint {
        &self.coeffs[r][s]
    }

    pub fn rows(&self) -> &[Vec<BigUint>] {
        &self.coeffs
    }
}

type Poly = Vec<Vec<i64>>;

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = vec![vec![0; a[0].len() + b[0].len() - 1]; a.len() + b.len() - 1];
    for (i, row) in a.iter().enumerate() {
        for (j, &u) in row.iter().enumerate() {
            for (k, brow) in b.iter().enumerate() {
                for (l, &v) in brow.iter().enumerate() {
                    out[i + k][j + l] += u * v;
                }
            }
        }
    }
    out
}

/// `G` as a dense coefficient grid `[x-degree][y-degree]`.
fn numerator_poly() -> Poly {
    vec![vec![1, 0], vec![-1, 2], vec![0, -1]]
}

fn denominator_poly() -> Poly {
    let one_minus_x = vec![vec![1], vec![-1]];
    let one_minus_y = vec![vec![1, -1]];
    let kernel = vec![vec![1, 0], vec![-1, 0], vec![0, -1]];
    poly_mul(&poly_mul(&one_minus_x, &one_minus_y), &kernel)
}

/// Expands `G / H` by multiplying `G` with the formal inverse of `H`.
pub fn expand_series(r_max: usize, s_max: usize) -> BivariateSeries {
    let h = denominator_poly();
    debug_assert_eq!(h[0][0], 1);
    let terms: Vec<(usize, usize, BigInt)> = h
        .iter()
        .enumerate()
        .flat_map(|(i, row)| {
            row.iter()
                .enumerate()
                .filter(move |&(j, &c)| c != 0 && (i, j) != (0, 0))
                .map(move |(j, &c)| (i, j, BigInt::from(c)))
        })
        .collect();

    let mut inv = vec![vec![BigInt::zero(); s_max + 1]; r_max + 1];
    for r in 0..=r_max {
        for s in 0..=s_max {
            if (r, s) == (0, 0) {
                inv[0][0] = BigInt::from(1);
                continue;
            }
            let mut acc = BigInt::zero();
            for (i, j, c) in &terms {
                if *i <= r && *j <= s {
                    acc -= c * &inv[r - i][s - j];
                }
            }
            inv[r][s] = acc;
        }
    }

    let g = numerator_poly();
    let coeffs = (0..=r_max)
        .map(|r| {
            (0..=s_max)
                .map(|s| {
                    let mut acc = BigInt::zero();
                    for (i, row) in g.iter().enumerate() {
                        for (j, &c) in row.iter().enumerate() {
                            if c != 0 && i <= r && j <= s {
                                acc += BigInt::from(c) * &inv[r - i][s - j];
                            }
                        }
                    }
                    match acc.to_biguint() {
                        Some(v) => v,
                        None => {
                            debug_assert_eq!(acc.sign(), Sign::Minus);
                            panic!("negative coefficient at ({r}, {s})")
                        }
                    }
                })
                .collect()
        })
        .collect();
    BivariateSeries { coeffs }
}

pub fn g(x: f64, y: f64) -> f64 {
    1.0 - x + 2.0 * x * y - x * x * y
}

pub fn h(x: f64, y: f64) -> f64 {
    (1.0 - x) * (1.0 - y) * (1.0 - x - x * x * y)
}

/// `H` and its first and second partial derivatives at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HPartials {
    pub h: f64,
    pub h_x: f64,
    pub h_y: f64,
    pub h_xx: f64,
    pub h_yy: f64,
    pub h_xy: f64,
}

impl HPartials {
    /// `H_xx H_yy - H_xy^2`.
    pub fn hessian_det(&self) -> f64 {
        self.h_xx * self.h_yy - self.h_xy * self.h_xy
    }
}

/// Closed-form partials of `H`.
pub fn eval_h_partials(x: f64, y: f64) -> HPartials {
    HPartials {
        h: h(x, y),
        h_x: (1.0 - y) * (3.0 * x * x * y - 2.0 * x * (y - 1.0) - 2.0),
        h_y: (1.0 - x) * (x * x * (2.0 * y - 1.0) + x - 1.0),
        h_xx: -2.0 * (y - 1.0) * ((3.0 * x - 1.0) * y + 1.0),
        h_yy: -2.0 * x * x * (x - 1.0),
        h_xy: x * x * (3.0 - 6.0 * y) + 4.0 * x * (y - 1.0) + 2.0,
    }
}

/// The `Q` polynomial of the single-point formula.
pub fn q_value(x: f64, y: f64) -> f64 {
    let p = eval_h_partials(x, y);
    let (xh, yh) = (x * p.h_x, y * p.h_y);
    -xh * yh * yh - yh * xh * xh - yh * yh * x * x * p.h_xx - xh * xh * y * y * p.h_yy
        + 2.0 * xh * yh * x * y * p.h_xy
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PointKind {
    Multiple,
    Single,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PointLabel {
    Q1,
    Q2,
    Q3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub x: f64,
    pub y: f64,
    pub kind: PointKind,
    pub label: PointLabel,
}

impl CriticalPoint {
    pub fn q1() -> Self {
        CriticalPoint {
            x: (5f64.sqrt() - 1.0) / 2.0,
            y: 1.0,
            kind: PointKind::Multiple,
            label: PointLabel::Q1,
        }
    }

    pub fn q2() -> Self {
        CriticalPoint {
            x: 1.0,
            y: 1.0,
            kind: PointKind::Multiple,
            label: PointLabel::Q2,
        }
    }

    /// The direction-dependent single point; only in the positive quadrant
    /// when `r > 2s > 0`.
    pub fn q3(r: u64, s: u64) -> Option<Self> {
        if s == 0 || r <= 2 * s {
            return None;
        }
        let (r, s) = (r as f64, s as f64);
        Some(CriticalPoint {
            x: (r - 2.0 * s) / (r - s),
            y: s * (r - s) / ((r - 2.0 * s) * (r - 2.0 * s)),
            kind: PointKind::Single,
            label: PointLabel::Q3,
        })
    }
}

/// Critical points for direction `(r, s)`, plus a note when `q3` is absent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalPoints {
    pub points: Vec<CriticalPoint>,
    pub warning: Option<String>,
}

/// `q1`, `q2` and (for `r > 2s > 0`) `q3`, each checked against the system
/// `H = 0`, `s x H_x = r y H_y` where that applies.
pub fn solve_critical_points(r: u64, s: u64) -> Result<CriticalPoints, GenFuncError> {
    let mut points = vec![CriticalPoint::q1(), CriticalPoint::q2()];
    let mut warning = None;
    match CriticalPoint::q3(r, s) {
        Some(q3) => points.push(q3),
        None => {
            warning = Some(format!(
                "q3 omitted: it lies in the positive quadrant only for r > 2s > 0 (r = {r}, s = {s})"
            ))
        }
    }
    for p in &points {
        let d = eval_h_partials(p.x, p.y);
        let direction = if p.kind == PointKind::Single {
            (s as f64 * p.x * d.h_x - r as f64 * p.y * d.h_y).abs()
        } else {
            0.0
        };
        if d.h.abs() > RESIDUAL_TOLERANCE || direction > RESIDUAL_TOLERANCE * (r as f64).max(1.0) {
            return Err(GenFuncError::Residual {
                label: p.label,
                h: d.h.abs(),
                direction,
            });
        }
    }
    Ok(CriticalPoints { points, warning })
}

/// A critical point's asymptotic contribution to `T(r, s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Contribution {
    pub point: CriticalPoint,
    pub log2_value: Log2Value,
}

fn log2_power_factor(point: &CriticalPoint, r: u64, s: u64) -> f64 {
    -(r as f64) * point.x.log2() - (s as f64) * point.y.log2()
}

/// `x^-r y^-s G / sqrt(-x^2 y^2 Hdet)` with `Hdet = H_xx H_yy - H_xy^2`.
pub fn contribution_multiple(point: &CriticalPoint, r: u64, s: u64) -> Result<Contribution, GenFuncError> {
    let not_multiple = |value| GenFuncError::NotMultiplePoint {
        label: point.label,
        value,
    };
    if point.kind != PointKind::Multiple {
        return Err(not_multiple(f64::NAN));
    }
    let (x, y) = (point.x, point.y);
    let radicand = -x * x * y * y * eval_h_partials(x, y).hessian_det();
    if radicand <= 0.0 {
        return Err(not_multiple(radicand));
    }
    let log2 = log2_power_factor(point, r, s) + g(x, y).log2() - 0.5 * radicand.log2();
    Ok(Contribution {
        point: *point,
        log2_value: Log2Value::from_log2(log2),
    })
}

/// `G / sqrt(2 pi) * x^-r y^-s * sqrt(-y H_y / (s Q))` at the single point.
pub fn contribution_single(point: &CriticalPoint, r: u64, s: u64) -> Result<Contribution, GenFuncError> {
    if point.kind != PointKind::Single {
        return Err(GenFuncError::NotSinglePoint { label: point.label });
    }
    if s == 0 || r <= 2 * s {
        return Err(GenFuncError::OutsideSingleRegime { r, s });
    }
    let (x, y) = (point.x, point.y);
    let h_y = eval_h_partials(x, y).h_y;
    let q = q_value(x, y);
    let argument = -y * h_y / (s as f64 * q);
    if argument.is_nan() || argument <= 0.0 {
        return Err(GenFuncError::NegativeRoot { argument, h_y, q });
    }
    let log2 = g(x, y).log2() - 0.5 * (2.0 * PI).log2()
        + log2_power_factor(point, r, s)
        + 0.5 * argument.log2();
    Ok(Contribution {
        point: *point,
        log2_value: Log2Value::from_log2(log2),
    })
}

/// Every contribution available in direction `(r, s)`.
pub fn contributions(r: u64, s: u64) -> Result<Vec<Contribution>, GenFuncError> {
    solve_critical_points(r, s)?
        .points
        .iter()
        .map(|p| match p.kind {
            PointKind::Multiple => contribution_multiple(p, r, s),
            PointKind::Single => contribution_single(p, r, s),
        })
        .collect()
}

/// `ln` of `(n-1)^(n-1) / (n-2)^(n-2)`, the per-`s` growth of `q3` along `r = n s`.
pub fn single_point_growth_ln(n: f64) -> f64 {
    let xlnx = |v: f64| if v == 0.0 { 0.0 } else { v * v.ln() };
    xlnx(n - 1.0) - xlnx(n - 2.0)
}

/// The ratio `n0` where `(n-1)^(n-1) / (n-2)^(n-2) = phi^n`.
///
/// The two sides touch rather than cross: `phi^n` is never smaller, so the
/// root is located where the derivative of the log-difference vanishes,
/// `(n-1)/(n-2) = phi`, by bisection on `(2, 10]`.
pub fn crossover_n0() -> f64 {
    let slope = |n: f64| ((n - 1.0) / (n - 2.0)).ln() - PHI.ln();
    let (mut lo, mut hi) = (2.0 + 1e-12, 10.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if slope(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Estimated `log2 T(n s, s)`: multiple-point form `1 + c phi^(n s)` below
/// `n0`, the exact single-point formula at and above it.
pub fn approx_linear(n: u64, s: u64) -> Result<Log2Value, GenFuncError> {
    if n == 0 || s == 0 {
        return Err(GenFuncError::InvalidLinear { n, s });
    }
    let r = n * s;
    if (n as f64) < crossover_n0() {
        let fib = Log2Value::from_log2(multiple_point_constant().log2() + r as f64 * PHI.log2());
        Ok(Log2Value::ONE + fib)
    } else {
        let q3 = CriticalPoint::q3(r, s).ok_or(GenFuncError::OutsideSingleRegime { r, s })?;
        Ok(contribution_single(&q3, r, s)?.log2_value)
    }
}
