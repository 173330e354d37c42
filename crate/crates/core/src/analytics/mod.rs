//! Closed forms for the giant component, the cycle-length bound and the
//! truncated-Poisson degree model of the giant.

mod degrees;
mod shapes;

pub use degrees::{
    build_pseudo_digraph, condition_simple, sample_degree_sequences, DegreeSequences,
    PseudoDigraph, SimpleVia, TruncatedPoisson, DEFAULT_REJECTIONS,
};
pub use shapes::{
    neighborhood_census, rho_tree, rho_tree_ln, rooted_copy_density, RootedTreeShape,
};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AnalyticsError {
    #[error("mean degree must exceed 1, got {0}")]
    DegreeTooSmall(f64),
    #[error("edge/vertex ratio must exceed 1, got {0}")]
    RatioTooSmall(f64),
    #[error("truncated Poisson needs a positive finite rate, got {0}")]
    BadRate(f64),
    #[error("degree sums differ: {outs} out-stubs vs {ins} in-stubs")]
    StubMismatch { ins: u64, outs: u64 },
    #[error("conditioned degree draw failed after {attempts} rejections (last sum {sum}, target {target})")]
    SamplingFailed { attempts: usize, sum: u64, target: u64 },
    #[error("could not make the pseudo-digraph simple: {0} bad edges left")]
    NotSimple(usize),
    #[error("invalid tree shape: {0}")]
    BadShape(String),
}

/// Roots of the two fixed-point equations with their residuals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FixpointSolution {
    pub x: f64,
    pub lambda: f64,
    pub x_residual: f64,
    pub lambda_residual: f64,
}

impl FixpointSolution {
    /// Solves for `x` at mean degree `c` and for `lambda` at edge/vertex ratio `ratio`.
    pub fn solve(c: f64, ratio: f64) -> Result<Self, AnalyticsError> {
        let x = solve_x(c)?;
        let lambda = solve_lambda_ratio(ratio)?;
        Ok(FixpointSolution {
            x,
            lambda,
            x_residual: (x * (-x).exp() - c * (-c).exp()).abs(),
            lambda_residual: (truncated_mean(lambda) - ratio).abs(),
        })
    }
}

/// The root in (0, 1) of `x e^{-x} = c e^{-c}`.
pub fn solve_x(c: f64) -> Result<f64, AnalyticsError> {
    if !(c > 1.0 && c.is_finite()) {
        return Err(AnalyticsError::DegreeTooSmall(c));
    }
    // ln x - x is increasing on (0, 1): bisect in log space, then polish.
    let target = c.ln() - c;
    let g = |lx: f64| lx - lx.exp() - target;
    let (mut lo, mut hi) = (target - 1.0, 0.0f64);
    while g(lo) > 0.0 {
        lo -= 1.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let mut x = (0.5 * (lo + hi)).exp();
    let rhs = c * (-c).exp();
    for _ in 0..3 {
        let h = x * (-x).exp() - rhs;
        let dh = (-x).exp() * (1.0 - x);
        if dh == 0.0 {
            break;
        }
        let next = x - h / dh;
        if !(next > 0.0 && next < 1.0) {
            break;
        }
        x = next;
    }
    Ok(x)
}

/// Limiting fraction of vertices in the giant strong component, `(1 - x/c)^2`.
pub fn k1_fraction(c: f64) -> Result<f64, AnalyticsError> {
    let x = solve_x(c)?;
    Ok((1.0 - x / c).powi(2))
}

/// `1 - 2e^{-c} - (c^2 + 2c) e^{-2c}`.
pub fn corollary_bound(c: f64) -> f64 {
    1.0 - 2.0 * (-c).exp() - (c * c + 2.0 * c) * (-2.0 * c).exp()
}

/// Predicted density of uncovered tree vertices, `c^2 e^{-2c}`.
pub fn phi_density_prediction(c: f64) -> f64 {
    c * c * (-2.0 * c).exp()
}

/// `f_k(lambda) = e^lambda - sum_{i<k} lambda^i / i!`, summed as the tail
/// series so small `lambda` loses no precision.
pub fn f_k(k: u32, lambda: f64) -> f64 {
    if k == 0 {
        return lambda.exp();
    }
    if lambda <= 0.0 {
        return 0.0;
    }
    let mut term = (k as f64 * lambda.ln() - ln_factorial(k)).exp();
    let mut sum = 0.0;
    let mut i = k as f64;
    loop {
        sum += term;
        i += 1.0;
        term *= lambda / i;
        if i > lambda && term <= sum * 1e-17 {
            return sum;
        }
    }
}

/// `ln f_1(lambda)`, stable for large `lambda`.
pub(crate) fn ln_f1(lambda: f64) -> f64 {
    lambda + (-(-lambda).exp()).ln_1p()
}

pub(crate) fn ln_factorial(k: u32) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

/// Mean of the truncated Poisson law, `lambda e^lambda / f_1(lambda)`.
pub fn truncated_mean(lambda: f64) -> f64 {
    if lambda == 0.0 {
        return 1.0;
    }
    lambda / -(-lambda).exp_m1()
}

/// Solves `lambda e^lambda / f_1(lambda) = m / n`.
pub fn solve_lambda(m: u64, n: u64) -> Result<f64, AnalyticsError> {
    solve_lambda_ratio(m as f64 / n as f64)
}

pub fn solve_lambda_ratio(ratio: f64) -> Result<f64, AnalyticsError> {
    if !(ratio > 1.0 && ratio.is_finite()) {
        return Err(AnalyticsError::RatioTooSmall(ratio));
    }
    // The mean is increasing from 1 and at least lambda, so the root lies in (0, ratio].
    let (mut lo, mut hi) = (0.0f64, ratio);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if truncated_mean(mid) > ratio {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-15 * ratio {
            break;
        }
    }
    let mut l = 0.5 * (lo + hi);
    for _ in 0..3 {
        let e = -(-l).exp_m1();
        let h = l / e - ratio;
        let dh = (e - l * (-l).exp()) / (e * e);
        if dh <= 0.0 {
            break;
        }
        let next = l - h / dh;
        if !(next > 0.0) {
            break;
        }
        l = next;
    }
    Ok(l)
}

/// One row of the `analytics` table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AnalyticsRow {
    pub c: f64,
    pub x: f64,
    pub k1_fraction: f64,
    pub corollary_bound: f64,
    pub phi_density_prediction: f64,
}

pub fn analytics_row(c: f64) -> Result<AnalyticsRow, AnalyticsError> {
    let x = solve_x(c)?;
    Ok(AnalyticsRow {
        c,
        x,
        k1_fraction: (1.0 - x / c).powi(2),
        corollary_bound: corollary_bound(c),
        phi_density_prediction: phi_density_prediction(c),
    })
}
