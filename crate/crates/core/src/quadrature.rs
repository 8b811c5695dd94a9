//! Quadrature on uniformly spaced samples.
//!
//! Composite Simpson is used whenever the interval count is even and the
//! trapezoid rule otherwise. Error estimates come from Richardson comparison
//! against the same rule at half resolution (every other sample).

use serde::{Deserialize, Serialize};

/// A computed value and an estimate of its discretization error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    /// Richardson estimate; `None` when the grid is too short to halve.
    pub error: Option<f64>,
}

impl Estimate {
    pub fn error_or_zero(&self) -> f64 {
        self.error.unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    Simpson,
    Trapezoid,
}

impl Rule {
    pub fn for_samples(n: usize) -> Self {
        if n >= 3 && (n - 1).is_multiple_of(2) {
            Rule::Simpson
        } else {
            Rule::Trapezoid
        }
    }

    pub fn order(self) -> i32 {
        match self {
            Rule::Simpson => 4,
            Rule::Trapezoid => 2,
        }
    }

    pub fn apply(self, values: &[f64], h: f64) -> f64 {
        match self {
            Rule::Simpson => simpson(values, h),
            Rule::Trapezoid => trapezoid(values, h),
        }
    }
}

fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values {
        [] | [_] => 0.0,
        [first, inner @ .., last] => h * (0.5 * (first + last) + inner.iter().sum::<f64>()),
    }
}

fn simpson(values: &[f64], h: f64) -> f64 {
    debug_assert!(values.len() % 2 == 1);
    let n = values.len() - 1;
    let mut acc = values[0] + values[n];
    for (k, v) in values.iter().enumerate().take(n).skip(1) {
        acc += if k % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    acc * h / 3.0
}

/// ∫ over uniformly spaced samples with step `h`.
pub fn integrate(values: &[f64], h: f64) -> f64 {
    Rule::for_samples(values.len()).apply(values, h)
}

/// Number of leading samples to use for a Richardson comparison: the longest
/// prefix whose interval count is even, so that every other sample still
/// ends on a grid point. `None` when fewer than five samples remain.
pub fn richardson_prefix(n: usize) -> Option<usize> {
    let m = if n % 2 == 1 { n } else { n - 1 };
    (m >= 5).then_some(m)
}

/// Richardson extrapolation error for a quantity computed at step `h` and
/// `2h`, assuming the leading error term is O(h^order).
pub fn richardson_error(fine: f64, coarse: f64, order: i32) -> f64 {
    (fine - coarse).abs() / (2f64.powi(order) - 1.0)
}

/// Integral with a Richardson error estimate.
pub fn integrate_with_estimate(values: &[f64], h: f64) -> Estimate {
    let full_rule = Rule::for_samples(values.len());
    let value = full_rule.apply(values, h);
    let error = richardson_prefix(values.len()).map(|m| {
        let prefix = &values[..m];
        let coarse: Vec<f64> = prefix.iter().step_by(2).copied().collect();
        // Same rule on both levels; Simpson only when both levels allow it.
        let rule = if full_rule == Rule::Simpson && Rule::for_samples(coarse.len()) == Rule::Simpson {
            Rule::Simpson
        } else {
            Rule::Trapezoid
        };
        richardson_error(rule.apply(prefix, h), rule.apply(&coarse, 2.0 * h), rule.order())
    });
    Estimate { value, error }
}

/// Running trapezoid integral, starting at 0.
pub fn cumulative_trapezoid(values: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in values.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        out.push(acc);
    }
    out.truncate(values.len());
    out
}
