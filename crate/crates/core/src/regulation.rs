//! Regulator equations and the two follower control laws.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::observer::TriggerFunction;
use crate::spectra;

/// Relative residual above which the regulator equations are unsolvable.
pub const REGULATOR_TOL: f64 = 1e-10;

/// `x' = A x + B u + P v`, `e = C x + D u + F v`.
#[derive(Debug, Clone, PartialEq)]
pub struct FollowerModel {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
    pub p: DMatrix<f64>,
    pub f: DMatrix<f64>,
}

impl FollowerModel {
    /// Checks all block dimensions against a leader of order `n`.
    pub fn new(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DMatrix<f64>,
        d: DMatrix<f64>,
        p: DMatrix<f64>,
        f: DMatrix<f64>,
        n: usize,
    ) -> Result<Self> {
        let ni = a.nrows();
        let mi = b.ncols();
        let li = c.nrows();
        let ok = a.is_square()
            && b.nrows() == ni
            && c.ncols() == ni
            && d.shape() == (li, mi)
            && p.shape() == (ni, n)
            && f.shape() == (li, n);
        if !ok {
            return Err(Error::DimensionMismatch(format!(
                "follower blocks A {:?}, B {:?}, C {:?}, D {:?}, P {:?}, F {:?} with leader order {n}",
                a.shape(),
                b.shape(),
                c.shape(),
                d.shape(),
                p.shape(),
                f.shape()
            )));
        }
        Ok(Self { a, b, c, d, p, f })
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.c.nrows()
    }

    pub fn leader_dim(&self) -> usize {
        self.p.ncols()
    }

    /// `e = C x + D u + F v`
    pub fn regulated_error(&self, x: &DVector<f64>, u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        &self.c * x + &self.d * u + &self.f * v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegulatorSolution {
    #[serde(serialize_with = "ser_matrix")]
    pub x: DMatrix<f64>,
    #[serde(serialize_with = "ser_matrix")]
    pub u: DMatrix<f64>,
    /// `||X S - A X - B U - P||_F`
    pub residual_state: f64,
    /// `||C X + D U + F||_F`
    pub residual_output: f64,
}

fn ser_matrix<S: serde::Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    serde::Serialize::serialize(&linalg::matrix_to_rows(m), s)
}

/// Solves `X S = A X + B U + P`, `0 = C X + D U + F` as one least-squares
/// system in `(vec X, vec U)`.
pub fn solve_regulator(model: &FollowerModel, s: &DMatrix<f64>) -> Result<RegulatorSolution> {
    let n = s.nrows();
    if !s.is_square() || model.leader_dim() != n {
        return Err(Error::DimensionMismatch("leader order differs from follower P/F".into()));
    }
    let ni = model.state_dim();
    let mi = model.input_dim();
    let li = model.output_dim();
    let i_n = DMatrix::<f64>::identity(n, n);
    let i_ni = DMatrix::<f64>::identity(ni, ni);
    // column-major vec: vec(X S) = (S^T (x) I) vec X, vec(A X) = (I (x) A) vec X
    let rows = ni * n + li * n;
    let cols = ni * n + mi * n;
    let mut m = DMatrix::zeros(rows, cols);
    m.view_mut((0, 0), (ni * n, ni * n))
        .copy_from(&(s.transpose().kronecker(&i_ni) - i_n.kronecker(&model.a)));
    m.view_mut((0, ni * n), (ni * n, mi * n))
        .copy_from(&(-i_n.kronecker(&model.b)));
    m.view_mut((ni * n, 0), (li * n, ni * n))
        .copy_from(&i_n.kronecker(&model.c));
    m.view_mut((ni * n, ni * n), (li * n, mi * n))
        .copy_from(&i_n.kronecker(&model.d));
    let mut rhs = DVector::zeros(rows);
    rhs.rows_mut(0, ni * n).copy_from_slice(model.p.as_slice());
    rhs.rows_mut(ni * n, li * n).copy_from_slice((-&model.f).as_slice());

    let scale = rhs.norm().max(m.norm()).max(1.0);
    let svd = m.clone().svd(true, true);
    let sol = svd
        .solve(&rhs, f64::EPSILON * scale * rows.max(cols) as f64)
        .map_err(|e| Error::Numerical(e.to_string()))?;
    let x = DMatrix::from_column_slice(ni, n, &sol.as_slice()[..ni * n]);
    let u = DMatrix::from_column_slice(mi, n, &sol.as_slice()[ni * n..]);
    let residual_state = (&x * s - &model.a * &x - &model.b * &u - &model.p).norm();
    let residual_output = (&model.c * &x + &model.d * &u + &model.f).norm();
    let residual = residual_state.hypot(residual_output);
    let ref_scale = model.p.norm().max(model.f.norm()).max(1.0);
    if !(residual <= REGULATOR_TOL * ref_scale) {
        return Err(Error::Unsolvable { residual });
    }
    Ok(RegulatorSolution { x, u, residual_state, residual_output })
}

/// Per-follower control law.
#[derive(Debug, Clone, PartialEq)]
pub enum ControllerConfig {
    /// `u = L x - L X eta + U eta`
    Continuous { l: DMatrix<f64> },
    /// `u = K delta_hat(t_m) + U eta(t)` on `[t_m, t_m + T)`.
    PeriodicEvent {
        k: DMatrix<f64>,
        period: f64,
        trigger: TriggerFunction,
    },
}

/// Exact sampling `(e^{A T}, int_0^T e^{A tau} d tau B)`.
pub fn discretize_follower(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    period: f64,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::InvalidInput(format!("controller period must be positive, got {period}")));
    }
    spectra::zoh_pair(a, b, period)
}

fn controllability_rank(a: &DMatrix<f64>, b: &DMatrix<f64>) -> usize {
    let n = a.nrows();
    let m = b.ncols();
    let mut ctrb = DMatrix::zeros(n, n * m);
    let mut block = b.clone();
    for j in 0..n {
        ctrb.view_mut((0, j * m), (n, m)).copy_from(&block);
        block = a * block;
    }
    linalg::rank(&ctrb, 1e-10)
}

/// Sampling with period `T` keeps the controllability rank of `(A, B)`.
pub fn sampling_preserves_controllability(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    period: f64,
) -> Result<bool> {
    let (ad, bd) = discretize_follower(a, b, period)?;
    Ok(controllability_rank(&ad, &bd) == controllability_rank(a, b))
}

impl ControllerConfig {
    /// Gain shapes, closed-loop stability and (periodic mode) a
    /// non-pathological controller period.
    pub fn validate(&self, model: &FollowerModel) -> Result<()> {
        let shape = (model.input_dim(), model.state_dim());
        match self {
            ControllerConfig::Continuous { l } => {
                if l.shape() != shape {
                    return Err(Error::DimensionMismatch(format!(
                        "L is {:?}, expected {shape:?}",
                        l.shape()
                    )));
                }
                if !linalg::is_hurwitz(&(&model.a + &model.b * l))? {
                    return Err(Error::AssumptionViolated("A + B L is not Hurwitz".into()));
                }
            }
            ControllerConfig::PeriodicEvent { k, period, trigger } => {
                if k.shape() != shape {
                    return Err(Error::DimensionMismatch(format!(
                        "K is {:?}, expected {shape:?}",
                        k.shape()
                    )));
                }
                trigger.validate()?;
                let (ad, bd) = discretize_follower(&model.a, &model.b, *period)?;
                if !linalg::is_schur(&(&ad + &bd * k))? {
                    return Err(Error::AssumptionViolated("A_d + B_d K is not Schur".into()));
                }
                if !sampling_preserves_controllability(&model.a, &model.b, *period)? {
                    return Err(Error::AssumptionViolated(format!(
                        "controller period {period} is pathological for (A, B)"
                    )));
                }
            }
        }
        Ok(())
    }
}

pub fn continuous_control(
    x: &DVector<f64>,
    eta: &DVector<f64>,
    l: &DMatrix<f64>,
    sol: &RegulatorSolution,
) -> DVector<f64> {
    l * x - l * (&sol.x * eta) + &sol.u * eta
}

/// Outcome of one controller sampling instant.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicUpdate {
    /// `K delta_hat(t_m)`, held over `[t_m, t_{m+1})`; add `U eta(t)` for `u(t)`.
    pub held: DVector<f64>,
    pub triggered: bool,
}

/// Evaluates the controller triggering rule at `t_m` and updates
/// `delta_hat` in place.
pub fn periodic_event_control(
    x: &DVector<f64>,
    eta: &DVector<f64>,
    t_m: f64,
    k: &DMatrix<f64>,
    trigger: &TriggerFunction,
    sol: &RegulatorSolution,
    delta_hat: &mut DVector<f64>,
) -> PeriodicUpdate {
    let delta = x - &sol.x * eta;
    let triggered = trigger.fires((&*delta_hat - &delta).norm(), t_m);
    if triggered {
        delta_hat.copy_from(&delta);
    }
    PeriodicUpdate { held: k * &*delta_hat, triggered }
}
