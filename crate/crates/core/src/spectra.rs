//! Leader spectrum analysis: the four-way eigenvalue partition, the sampled
//! quantities `U_q(h)`, `V_q(h)`, `phi_q(h)`, `psi_{i,q}(h)`, and the matrix
//! exponential / zero-order-hold integrals used by every discretization.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::netgraph::sort_descending;

/// `|U + jV|` below this is treated as a zero of the spectral mapping.
/// For purely imaginary eigenvalues `|U + jV| = 2|sin(Im(lambda) h / 2)|`, so
/// this is the `|sin(.)| < 1e-9` test.
pub const DEGENERACY_TOL: f64 = 2e-9;

/// Exosystem `v' = S v`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeaderModel {
    s: DMatrix<f64>,
}

impl LeaderModel {
    pub fn new(s: DMatrix<f64>) -> Result<Self> {
        if !s.is_square() || s.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "leader matrix must be square and non-empty, got {}x{}",
                s.nrows(),
                s.ncols()
            )));
        }
        if s.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("leader matrix has non-finite entries".into()));
        }
        Ok(Self { s })
    }

    pub fn s(&self) -> &DMatrix<f64> {
        &self.s
    }

    pub fn dim(&self) -> usize {
        self.s.nrows()
    }

    /// Default partition tolerance `1e-9 * max(1, ||S||)`.
    pub fn default_tolerance(&self) -> f64 {
        1e-9 * linalg::spectral_norm(&self.s).max(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpectrumClass {
    /// Re > 0
    Q1,
    /// Re < 0
    Q2,
    /// Re = 0, Im != 0
    Q3,
    /// lambda = 0
    Q4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LeaderEigen {
    /// Eigenvalue as returned by the eigen-solver.
    pub raw: Complex64,
    /// Eigenvalue with the parts that fall within tolerance of zero snapped
    /// to exactly zero (Q3 onto the imaginary axis, Q4 onto the origin).
    pub value: Complex64,
    pub class: SpectrumClass,
}

impl LeaderEigen {
    pub fn theta(&self) -> f64 {
        self.value.arg()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumPartition {
    pub eigen: Vec<LeaderEigen>,
    pub zero_tolerance: f64,
}

impl SpectrumPartition {
    pub fn indices(&self, class: SpectrumClass) -> Vec<usize> {
        self.eigen
            .iter()
            .enumerate()
            .filter(|(_, e)| e.class == class)
            .map(|(q, _)| q)
            .collect()
    }

    pub fn only(&self, class: SpectrumClass) -> bool {
        self.eigen.iter().all(|e| e.class == class)
    }
}

pub fn classify(lambda: Complex64, tol: f64) -> LeaderEigen {
    let (class, value) = if lambda.re > tol {
        (SpectrumClass::Q1, lambda)
    } else if lambda.re < -tol {
        (SpectrumClass::Q2, lambda)
    } else if lambda.im.abs() > tol {
        (SpectrumClass::Q3, Complex64::new(0.0, lambda.im))
    } else {
        (SpectrumClass::Q4, Complex64::new(0.0, 0.0))
    };
    LeaderEigen { raw: lambda, value, class }
}

/// Labels every eigenvalue of `S` (with multiplicity) as Q1..Q4.
pub fn partition_spectrum(m: &LeaderModel, tol: f64) -> Result<SpectrumPartition> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    let mut ev = linalg::eigenvalues(m.s())?;
    sort_descending(&mut ev);
    Ok(SpectrumPartition {
        eigen: ev.into_iter().map(|z| classify(z, tol)).collect(),
        zero_tolerance: tol,
    })
}

/// `U_q(h)`, `V_q(h)` and the phase `phi_q(h) = Arg(U + jV)`.
///
/// `phi` is `None` when `U + jV` vanishes (the degenerate case); no limit is
/// substituted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampledEigen {
    pub u: f64,
    pub v: f64,
    pub phi: Option<f64>,
}

impl SampledEigen {
    pub fn modulus(&self) -> f64 {
        self.u.hypot(self.v)
    }

    pub fn is_degenerate(&self) -> bool {
        self.phi.is_none()
    }
}

pub fn sample_eigenvalue(lambda_q: Complex64, h: f64) -> SampledEigen {
    let u = (lambda_q.re * h).exp() - (lambda_q.im * h).cos();
    let v = (lambda_q.im * h).sin();
    let phi = if u.hypot(v) < DEGENERACY_TOL {
        None
    } else {
        Some(v.atan2(u))
    };
    SampledEigen { u, v, phi }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledQuantities {
    pub h: f64,
    pub per_eigen: Vec<SampledEigen>,
    /// `psi[i][q] = theta_i + phi_q - theta_q`; `None` where `phi_q` is degenerate.
    pub psi: Vec<Vec<Option<f64>>>,
}

pub fn sampled_quantities(
    p: &SpectrumPartition,
    theta_i: &[f64],
    h: f64,
) -> Result<SampledQuantities> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidInput(format!("sampling period must be positive, got {h}")));
    }
    let per_eigen: Vec<SampledEigen> =
        p.eigen.iter().map(|e| sample_eigenvalue(e.value, h)).collect();
    let psi = theta_i
        .iter()
        .map(|&ti| {
            p.eigen
                .iter()
                .zip(&per_eigen)
                .map(|(e, s)| s.phi.map(|phi| ti + phi - e.theta()))
                .collect()
        })
        .collect();
    Ok(SampledQuantities { h, per_eigen, psi })
}

/// Matrix exponential (scaling and squaring with Padé approximants).
pub fn expm(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "expm of a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("expm: non-finite input".into()));
    }
    if m.nrows() == 0 {
        return Ok(m.clone());
    }
    // beyond this the result overflows anyway and the Padé denominator can be singular
    let norm1 = m.column_iter().map(|c| c.abs().sum()).fold(0.0, f64::max);
    if norm1 > 1e6 {
        return Err(Error::Numerical(format!("expm: norm {norm1:.3e} too large")));
    }
    let e = m.exp();
    if e.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("expm: result overflowed".into()));
    }
    Ok(e)
}

/// Exact zero-order-hold pair for `x' = A x + B w` over a step `t`:
/// returns `(e^{A t}, int_0^t e^{A tau} d tau B)` read off the exponential of
/// the augmented block matrix `[[A, B], [0, 0]] t`.
pub fn zoh_pair(a: &DMatrix<f64>, b: &DMatrix<f64>, t: f64) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    if !a.is_square() || b.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "zoh: A is {}x{}, B is {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    let m = b.ncols();
    let mut aug = DMatrix::zeros(n + m, n + m);
    aug.view_mut((0, 0), (n, n)).copy_from(&(a * t));
    aug.view_mut((0, n), (n, m)).copy_from(&(b * t));
    let e = expm(&aug)?;
    Ok((
        e.view((0, 0), (n, n)).into_owned(),
        e.view((0, n), (n, m)).into_owned(),
    ))
}

/// `int_0^h e^{S tau} d tau`, exact for singular `S`.
pub fn zoh_integral(s: &DMatrix<f64>, h: f64) -> Result<DMatrix<f64>> {
    if !(h > 0.0) {
        return Err(Error::InvalidInput(format!("zoh_integral: h must be positive, got {h}")));
    }
    let n = s.nrows();
    Ok(zoh_pair(s, &DMatrix::identity(n, n), h)?.1)
}
