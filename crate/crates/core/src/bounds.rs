//! High-level CT size bounds, all in log2 space.
//!
//! Every value here bounds the number of CT nodes only. The low-level A*
//! cost is a separate multiplicative factor and is reported as a note.

use std::f64::consts::E;

use serde::Serialize;
use thiserror::Error;

use crate::magnitude::Log2Value;
use crate::mdd::{analytic_size_bound, radius_size_bound, with_edges_bound};
use crate::recurrence::{eval_exact_with_ceiling, eval_log};

/// Slack used for every log2 comparison between bounds.
pub const COMPARISON_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundError {
    #[error("n = {n} is outside the generating-function bound's validity range (n >= 4)")]
    OutsideValidityRange { n: u64 },

    #[error("invalid inputs: {0}")]
    InvalidInputs(String),
}

/// How edge constraints enter the negative-constraint count.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeMode {
    /// Vertex constraints only.
    #[default]
    None,
    /// 4-connected grid: each vertex adds 8 directed edges, factor 9.
    Grid,
    /// Arbitrary graph with `|E| <= n^2`: factor `2n + 1`.
    General,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    #[default]
    Makespan,
    /// `c` is read as the sum-of-costs budget `C' = kC` and replaces `kC`.
    Soc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BoundInputs {
    pub n: u64,
    pub k: u64,
    pub c: u64,
    /// Per-agent MDD size; defaults to `n C`.
    pub m: Option<u64>,
    pub edge_mode: EdgeMode,
    pub objective: Objective,
    /// Graph radius, enabling the radius-based MDD bound when `C >= 2r`.
    pub radius: Option<u64>,
}

impl BoundInputs {
    pub fn new(n: u64, k: u64, c: u64) -> Self {
        BoundInputs {
            n,
            k,
            c,
            m: None,
            edge_mode: EdgeMode::None,
            objective: Objective::Makespan,
            radius: None,
        }
    }

    pub fn validate(&self) -> Result<(), BoundError> {
        let bad = |msg: &str| Err(BoundError::InvalidInputs(msg.to_string()));
        if self.n == 0 {
            return bad("n must be at least 1");
        }
        if self.k == 0 {
            return bad("k must be at least 1");
        }
        if self.c == 0 {
            return bad("C must be at least 1");
        }
        if self.m == Some(0) {
            return bad("M must be at least 1");
        }
        Ok(())
    }

    /// Multiplier on the negative-constraint count for edge constraints.
    pub fn edge_factor(&self) -> f64 {
        match self.edge_mode {
            EdgeMode::None => 1.0,
            EdgeMode::Grid => 9.0,
            EdgeMode::General => 2.0 * self.n as f64 + 1.0,
        }
    }

    /// Positive-constraint budget: `kC`, or `C'` under sum-of-costs.
    pub fn positive_budget(&self) -> f64 {
        match self.objective {
            Objective::Makespan => self.k as f64 * self.c as f64,
            Objective::Soc => self.c as f64,
        }
    }

    /// Vertex-only negative-constraint budget: `kM`, defaulting to `n` times
    /// the positive budget.
    pub fn negative_budget(&self) -> f64 {
        match self.m {
            Some(m) => self.k as f64 * m as f64,
            None => self.n as f64 * self.positive_budget(),
        }
    }
}

/// `2^(n k C)`, or its edge-aware variants.
pub fn bound_original(inputs: &BoundInputs) -> Log2Value {
    Log2Value::from_log2(inputs.n as f64 * inputs.positive_budget() * inputs.edge_factor())
}

/// `2^(kM)`.
pub fn bound_mdd_exponential(k: u64, m: u64) -> Log2Value {
    Log2Value::from_log2(k as f64 * m as f64)
}

/// `3 (kM)^(kC)`.
pub fn bound_rec_induction(inputs: &BoundInputs) -> Log2Value {
    let negatives = inputs.negative_budget() * inputs.edge_factor();
    Log2Value::from_log2(3f64.log2() + inputs.positive_budget() * negatives.log2())
}

/// `(e n)^(kC)`, with `n` scaled by the edge factor.
pub fn bound_rec_genfunc(inputs: &BoundInputs) -> Result<Log2Value, BoundError> {
    if inputs.n < 4 {
        return Err(BoundError::OutsideValidityRange { n: inputs.n });
    }
    let ratio = inputs.n as f64 * inputs.edge_factor();
    Ok(Log2Value::from_log2(inputs.positive_budget() * (E * ratio).log2()))
}

/// `(e C)^(2kC)`: the generating-function bound with the grid MDD size `C^3`.
pub fn bound_rec_genfunc_grid_mdd(k: u64, c: u64) -> Log2Value {
    let kc = k as f64 * c as f64;
    Log2Value::from_log2(2.0 * kc * (E * c as f64).log2())
}

/// `2^(k M)` with `M` from the analytic grid bound (six times that with edges).
pub fn bound_mdd_cube(inputs: &BoundInputs) -> Log2Value {
    let mut m = analytic_size_bound(inputs.c);
    if inputs.edge_mode != EdgeMode::None {
        m = with_edges_bound(m);
    }
    Log2Value::from_log2(inputs.k as f64 * m.value as f64)
}

/// `2^(k M)` with `M` from the radius bound, when `C >= 2 r`.
pub fn bound_mdd_radius(inputs: &BoundInputs) -> Option<Log2Value> {
    let r = inputs.radius?;
    let delta = inputs.c.checked_sub(2 * r)?;
    let m = radius_size_bound(r, delta, inputs.n).value;
    Some(Log2Value::from_log2(inputs.k as f64 * m as f64))
}

/// Displayed `x` in `2^(10^x)`: the ceiling of `log10(log2 value)`.
pub fn display_exponent(value: Log2Value) -> i32 {
    if value.is_zero() || value.log2() <= 1.0 {
        0
    } else {
        value.exp10().ceil() as i32
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Exponents {
    pub org: f64,
    pub rec_ind: f64,
    pub rec_gf: f64,
}

/// All bounds for one `(n, k, C)` configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub inputs: BoundInputs,
    pub org: Log2Value,
    pub rec_ind: Log2Value,
    pub rec_gf: Log2Value,
    pub mdd_cube: Log2Value,
    pub radius_bound: Option<Log2Value>,
    pub ratio_org_over_gf: Log2Value,
    /// `log10` of each log2 value.
    pub exp10: Exponents,
    /// Hidden constant of the induction bound, already included in `rec_ind`.
    pub rec_ind_constant: f64,
    pub low_level_note: String,
}

impl BoundReport {
    pub fn display_exponents(&self) -> [i32; 3] {
        [
            display_exponent(self.org),
            display_exponent(self.rec_ind),
            display_exponent(self.rec_gf),
        ]
    }
}

pub fn compare(inputs: &BoundInputs) -> Result<BoundReport, BoundError> {
    inputs.validate()?;
    let org = bound_original(inputs);
    let rec_ind = bound_rec_induction(inputs);
    let rec_gf = bound_rec_genfunc(inputs)?;
    let per_agent_cost = inputs.c as f64;
    Ok(BoundReport {
        inputs: *inputs,
        org,
        rec_ind,
        rec_gf,
        mdd_cube: bound_mdd_cube(inputs),
        radius_bound: bound_mdd_radius(inputs),
        ratio_org_over_gf: Log2Value::from_log2(org.log2() - rec_gf.log2()),
        exp10: Exponents {
            org: org.exp10(),
            rec_ind: rec_ind.exp10(),
            rec_gf: rec_gf.exp10(),
        },
        rec_ind_constant: 3.0,
        low_level_note: format!(
            "high-level CT size only; multiply by one low-level A* search, O(nC) = O({}) states",
            inputs.n as f64 * per_agent_cost
        ),
    })
}

/// Ratio between the graph size and `s = kC` used for the bound curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotMode {
    Log,
    Sqrt,
    Linear,
}

impl PlotMode {
    pub fn s_for(self, n: u64) -> u64 {
        match self {
            PlotMode::Log => (n as f64).log2().ceil() as u64,
            PlotMode::Sqrt => {
                let mut s = (n as f64).sqrt() as u64;
                while s * s < n {
                    s += 1;
                }
                while s > 0 && (s - 1) * (s - 1) >= n {
                    s -= 1;
                }
                s
            }
            PlotMode::Linear => n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Log,
}

/// One point of the bound-versus-recurrence curves at `r = n s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub n: u64,
    pub s: u64,
    pub org: Log2Value,
    pub rec_ind: Log2Value,
    pub rec_gf: Log2Value,
    pub recurrence: Log2Value,
    pub backend: Backend,
}

/// Bounds and the recurrence itself at `r = n s`; exact when `r s` fits
/// under `ceiling`.
pub fn curve_point(mode: PlotMode, n: u64, ceiling: u64) -> Result<CurvePoint, BoundError> {
    let s = mode.s_for(n).max(1);
    let report = compare(&BoundInputs::new(n, 1, s))?;
    let r = n * s;
    let (recurrence, backend) = match eval_exact_with_ceiling(r, s, ceiling) {
        Ok(v) => (Log2Value::from_big(&v), Backend::Exact),
        Err(_) => (eval_log(r, s), Backend::Log),
    };
    Ok(CurvePoint {
        n,
        s,
        org: report.org,
        rec_ind: report.rec_ind,
        rec_gf: report.rec_gf,
        recurrence,
        backend,
    })
}
