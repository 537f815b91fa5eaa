//! Inter-event analysis: contraction constants of `F(mu)`, the chi
//! constants, and the implicit lower bounds on inter-event steps and times.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::observer::Envelope;

/// Relative change of the running maximum over one decade of `k` below
/// which the power sequence is considered settled.
const BETA_SETTLE_TOL: f64 = 1e-6;
const BETA_MAX_HORIZON: usize = 100_000;

/// Lower end of the bisection bracket.
const BRACKET_LO: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContractionEstimate {
    /// Spectral radius of `F`.
    pub gamma: f64,
    /// `max_{k <= k_max} ||F^k|| / gamma^k` (or `max ||F^k||` when `gamma = 0`).
    pub beta: f64,
    pub k_max: usize,
    /// `gamma` is zero (nilpotent `F`); `beta` is then unnormalized.
    pub zero_radius: bool,
    /// The running maximum stopped changing before the horizon cap.
    pub settled: bool,
}

pub fn contraction(f: &DMatrix<f64>) -> Result<ContractionEstimate> {
    if !f.is_square() {
        return Err(Error::DimensionMismatch("contraction of a non-square matrix".into()));
    }
    let gamma = linalg::spectral_radius(f)?;
    let zero_radius = gamma == 0.0;
    let scaled = if zero_radius { f.clone() } else { f / gamma };
    let n = f.nrows();
    let mut power = DMatrix::<f64>::identity(n, n);
    let mut beta = 1.0f64;
    let mut checkpoint = 10usize;
    let mut beta_at_checkpoint = beta;
    let mut k = 0usize;
    let settled = loop {
        k += 1;
        power = &scaled * &power;
        let frobenius = power.norm();
        // the Frobenius norm bounds the spectral norm from above
        let norm = if frobenius <= beta && !zero_radius { frobenius } else { linalg::spectral_norm(&power) };
        if !norm.is_finite() {
            return Err(Error::Numerical("powers of F overflowed".into()));
        }
        beta = beta.max(norm);
        if zero_radius && norm == 0.0 {
            break true;
        }
        if k == checkpoint {
            if (beta - beta_at_checkpoint).abs() <= BETA_SETTLE_TOL * beta_at_checkpoint && k >= 100 {
                break true;
            }
            if k >= BETA_MAX_HORIZON {
                break false;
            }
            beta_at_checkpoint = beta;
            checkpoint *= 10;
        }
    };
    Ok(ContractionEstimate { gamma, beta, k_max: k, zero_radius, settled })
}

/// Inputs of the chi constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundInputs {
    pub contraction: ContractionEstimate,
    pub mu: f64,
    pub h: f64,
    /// `||H||`
    pub norm_h: f64,
    /// `||G(mu)||`
    pub norm_g: f64,
    /// `||S||`
    pub norm_s: f64,
    pub followers: usize,
    /// `||eta_tilde(t_0)||` at the simulation start.
    pub initial_error: f64,
    pub envelope: Envelope,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiConstants {
    pub chi1: f64,
    /// Defined only in the contractive regime `gamma e^{alpha h} < 1`.
    pub chi2: Option<f64>,
    /// `gamma e^{alpha h}`
    pub ratio: f64,
    pub gamma: f64,
    pub beta: f64,
    pub mu: f64,
    pub h: f64,
    pub norm_h: f64,
    pub norm_g: f64,
    pub norm_s: f64,
    pub initial_error: f64,
    pub envelope: Envelope,
}

impl ChiConstants {
    pub fn new(inp: &BoundInputs) -> Result<Self> {
        let c = inp.contraction;
        if !(c.gamma > 0.0) {
            return Err(Error::InvalidInput("bounds need a positive spectral radius".into()));
        }
        if !(inp.h > 0.0) || !(inp.mu > 0.0) || inp.followers == 0 {
            return Err(Error::InvalidInput("bounds need h > 0, mu > 0 and N > 0".into()));
        }
        let env = inp.envelope;
        let chi1 = inp.mu * inp.norm_h * (inp.followers as f64).sqrt() * env.sigma_big_m;
        let ratio = c.gamma * (env.alpha * inp.h).exp();
        let chi2 = (ratio < 1.0)
            .then(|| chi1 * c.beta * inp.norm_g * (env.alpha * inp.h).exp() / (1.0 - ratio));
        Ok(Self {
            chi1,
            chi2,
            ratio,
            gamma: c.gamma,
            beta: c.beta,
            mu: inp.mu,
            h: inp.h,
            norm_h: inp.norm_h,
            norm_g: inp.norm_g,
            norm_s: inp.norm_s,
            initial_error: inp.initial_error,
            envelope: env,
        })
    }

    pub fn contractive(&self) -> bool {
        self.ratio < 1.0
    }

    /// `chi_3(k, h)`, written with the partial geometric sum so it stays
    /// defined when `gamma e^{alpha h} >= 1`.
    pub fn chi3(&self, k: u64) -> f64 {
        let r = self.ratio;
        let rk = r.powf(k as f64);
        let geometric = if (r - 1.0).abs() < 1e-12 {
            k as f64
        } else {
            (1.0 - rk) / (1.0 - r)
        };
        self.mu * self.norm_h * self.beta * self.initial_error * rk
            + self.chi1 * self.beta * self.norm_g * (self.envelope.alpha * self.h).exp() * geometric
    }
}

/// `(e^{||S|| x} - 1) / ||S||`, or `x` when `||S|| = 0`.
fn growth(norm_s: f64, x: f64) -> f64 {
    if norm_s == 0.0 {
        x
    } else {
        (norm_s * x).exp_m1() / norm_s
    }
}

/// Unique positive root of `lhs(x) = rhs(x)` with `lhs` increasing from 0
/// and `rhs` positive and decreasing.
fn bisect(lhs: impl Fn(f64) -> f64, rhs: impl Fn(f64) -> f64) -> Result<f64> {
    let diff = |x: f64| lhs(x) - rhs(x);
    let mut lo = BRACKET_LO;
    if diff(lo) >= 0.0 {
        return Ok(lo);
    }
    let mut hi = 1.0;
    while diff(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() || hi > 1e300 {
            return Err(Error::Numerical("bound equation has no bracketed root".into()));
        }
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if diff(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (dl, dh) = (diff(lo).abs(), diff(hi).abs());
    Ok(if dl <= dh { lo } else { hi })
}

/// Residual of the step-bound equation at `s` with `chi` in the chi_3 slot.
pub fn step_residual(c: &ChiConstants, chi: f64, s: f64) -> f64 {
    growth(c.norm_s, s * c.h)
        - c.envelope.sigma_m / (c.gamma.powf(-s) * chi + c.chi1 * (c.envelope.alpha * c.h * s).exp())
}

/// Residual of the time-bound equation at `tau`.
pub fn time_residual(c: &ChiConstants, chi: f64, tau: f64) -> f64 {
    growth(c.norm_s, tau)
        - c.envelope.sigma_m
            / (c.gamma.powf(-tau / c.h) * chi + c.chi1 * (c.envelope.alpha * tau).exp())
}

fn solve_step(c: &ChiConstants, chi: f64) -> Result<f64> {
    let sigma_m = c.envelope.sigma_m;
    bisect(
        |s| growth(c.norm_s, s * c.h),
        |s| sigma_m / (c.gamma.powf(-s) * chi + c.chi1 * (c.envelope.alpha * c.h * s).exp()),
    )
}

fn solve_time(c: &ChiConstants, chi: f64) -> Result<f64> {
    let sigma_m = c.envelope.sigma_m;
    bisect(
        |tau| growth(c.norm_s, tau),
        |tau| sigma_m / (c.gamma.powf(-tau / c.h) * chi + c.chi1 * (c.envelope.alpha * tau).exp()),
    )
}

/// Time-varying lower bound `s(k, h)` on the inter-event step.
pub fn solve_bound(c: &ChiConstants, k: u64) -> Result<f64> {
    solve_step(c, c.chi3(k))
}

/// Asymptotic step bound `s*(h)`; zero when `gamma e^{alpha h} >= 1`.
pub fn solve_asymptotic(c: &ChiConstants) -> Result<f64> {
    match c.chi2 {
        Some(chi2) => solve_step(c, chi2),
        None => Ok(0.0),
    }
}

/// `(tau_d(k, h), tau_d*(h))` from the inter-event time equations.
pub fn solve_time_bounds(c: &ChiConstants, k: u64) -> Result<(f64, f64)> {
    let tau = solve_time(c, c.chi3(k))?;
    let tau_star = match c.chi2 {
        Some(chi2) => solve_time(c, chi2)?,
        None => 0.0,
    };
    Ok((tau, tau_star))
}
