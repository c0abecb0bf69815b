use serde::{Deserialize, Serialize};

/// A computed norm: either an exact value or a certified bracket.
///
/// `value` is the best point estimate; `lower`/`upper` bracket the true
/// norm. `gap` is the relative width of the bracket for iterative solvers and
/// the residual for direct ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub iters: usize,
    pub gap: f64,
    pub method: String,
    #[serde(default = "default_true")]
    pub converged: bool,
}

fn default_true() -> bool {
    true
}

impl NormEstimate {
    pub fn exact(value: f64, method: &str) -> Self {
        NormEstimate {
            value,
            lower: value,
            upper: value,
            iters: 0,
            gap: 0.0,
            method: method.to_string(),
            converged: true,
        }
    }

    pub fn bracket(lower: f64, upper: f64, iters: usize, method: &str, converged: bool) -> Self {
        let gap = relative_gap(lower, upper);
        NormEstimate {
            value: if upper.is_finite() {
                0.5 * (lower + upper)
            } else {
                lower
            },
            lower,
            upper,
            iters,
            gap,
            method: method.to_string(),
            converged,
        }
    }
}

pub(crate) fn relative_gap(lower: f64, upper: f64) -> f64 {
    let scale = upper.abs().max(lower.abs());
    if !upper.is_finite() {
        1.0
    } else if scale == 0.0 {
        0.0
    } else {
        (upper - lower).max(0.0) / scale
    }
}
