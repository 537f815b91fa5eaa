//! Mixed time- and event-triggered distributed observer.
//!
//! Each follower runs a continuous observer on `eta_i` driven by a held
//! relative error built from auxiliary copies `eta_hat_p`, `p in {i} + N_i`.
//! The copies are propagated open loop with `e^{Sh}` between events and reset
//! to the broadcast value when follower `p` triggers.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netgraph::Digraph;
use crate::spectra;

/// Exponential bounds `sigma_m e^{-alpha t} <= f(t) <= sigma_big_m e^{-alpha t}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub sigma_m: f64,
    pub sigma_big_m: f64,
    pub alpha: f64,
}

/// Threshold `f_i(t)` of the triggering rule `||eta_bar_i(t_k)|| > f_i(t_k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TriggerFunction {
    /// `sigma e^{-alpha t}`; its own envelope.
    Exponential { sigma: f64, alpha: f64 },
    /// `sigma / (alpha t + 1)`
    Rational {
        sigma: f64,
        alpha: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        envelope: Option<Envelope>,
    },
    /// `sigma ln(1 + e^{-alpha t})`
    LogExp {
        sigma: f64,
        alpha: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        envelope: Option<Envelope>,
    },
    /// Fires at every sampling instant (purely time-triggered operation).
    Always,
}

impl TriggerFunction {
    pub fn exponential(sigma: f64, alpha: f64) -> Result<Self> {
        let f = TriggerFunction::Exponential { sigma, alpha };
        f.validate()?;
        Ok(f)
    }

    pub fn rational(sigma: f64, alpha: f64) -> Result<Self> {
        let f = TriggerFunction::Rational { sigma, alpha, envelope: None };
        f.validate()?;
        Ok(f)
    }

    pub fn log_exp(sigma: f64, alpha: f64) -> Result<Self> {
        let f = TriggerFunction::LogExp { sigma, alpha, envelope: None };
        f.validate()?;
        Ok(f)
    }

    /// Attaches a declared envelope to a rational or log-exp threshold.
    pub fn with_envelope(self, env: Envelope) -> Result<Self> {
        let f = match self {
            TriggerFunction::Rational { sigma, alpha, .. } => {
                TriggerFunction::Rational { sigma, alpha, envelope: Some(env) }
            }
            TriggerFunction::LogExp { sigma, alpha, .. } => {
                TriggerFunction::LogExp { sigma, alpha, envelope: Some(env) }
            }
            other => {
                return Err(Error::InvalidInput(format!(
                    "an envelope cannot be declared for {other:?}"
                )))
            }
        };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!("trigger {name} must be positive, got {x}")))
            }
        };
        match *self {
            TriggerFunction::Exponential { sigma, alpha } => {
                positive("sigma", sigma)?;
                positive("alpha", alpha)
            }
            TriggerFunction::Rational { sigma, alpha, envelope }
            | TriggerFunction::LogExp { sigma, alpha, envelope } => {
                positive("sigma", sigma)?;
                positive("alpha", alpha)?;
                if let Some(env) = envelope {
                    positive("sigma_m", env.sigma_m)?;
                    positive("sigma_big_m", env.sigma_big_m)?;
                    positive("envelope alpha", env.alpha)?;
                    if env.sigma_m > env.sigma_big_m {
                        return Err(Error::InvalidInput("envelope has sigma_m > sigma_big_m".into()));
                    }
                    // spot-check the declared bounds over a long window
                    for j in 0..=400 {
                        let t = j as f64 * 0.05 / alpha.min(env.alpha);
                        let ft = self.eval(t);
                        let decay = (-env.alpha * t).exp();
                        if ft < env.sigma_m * decay * (1.0 - 1e-12)
                            || ft > env.sigma_big_m * decay * (1.0 + 1e-12)
                        {
                            return Err(Error::InvalidInput(format!(
                                "declared envelope does not bound the trigger at t = {t}"
                            )));
                        }
                    }
                }
                Ok(())
            }
            TriggerFunction::Always => Ok(()),
        }
    }

    /// Threshold value at time `t >= 0`; zero for [`TriggerFunction::Always`].
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            TriggerFunction::Exponential { sigma, alpha } => sigma * (-alpha * t).exp(),
            TriggerFunction::Rational { sigma, alpha, .. } => sigma / (alpha * t + 1.0),
            TriggerFunction::LogExp { sigma, alpha, .. } => sigma * (-alpha * t).exp().ln_1p(),
            TriggerFunction::Always => 0.0,
        }
    }

    /// Strict comparison; a tie does not fire.
    pub fn fires(&self, error_norm: f64, t: f64) -> bool {
        match self {
            TriggerFunction::Always => true,
            _ => error_norm > self.eval(t),
        }
    }

    pub fn envelope(&self) -> Result<Envelope> {
        match *self {
            TriggerFunction::Exponential { sigma, alpha } => {
                Ok(Envelope { sigma_m: sigma, sigma_big_m: sigma, alpha })
            }
            TriggerFunction::Rational { envelope: Some(env), .. }
            | TriggerFunction::LogExp { envelope: Some(env), .. } => Ok(env),
            _ => Err(Error::UnsupportedEnvelope),
        }
    }
}

/// Sampled error dynamics `eta_tilde(k+1) = F eta_tilde(k) + G eta_bar(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorDynamics {
    pub f: DMatrix<f64>,
    pub g: DMatrix<f64>,
}

pub fn build_error_dynamics(
    s: &DMatrix<f64>,
    h_mat: &DMatrix<f64>,
    mu: f64,
    h: f64,
) -> Result<ErrorDynamics> {
    if !s.is_square() || !h_mat.is_square() {
        return Err(Error::DimensionMismatch("S and H must be square".into()));
    }
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(Error::InvalidInput(format!("gain must be non-negative, got {mu}")));
    }
    let n = s.nrows();
    let (phi, gamma) = spectra::zoh_pair(s, &DMatrix::identity(n, n), h)?;
    let g = (h_mat * mu).kronecker(&gamma);
    let f = DMatrix::<f64>::identity(h_mat.nrows(), h_mat.nrows()).kronecker(&phi) - &g;
    Ok(ErrorDynamics { f, g })
}

/// One broadcast of follower `follower` (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObserverEvent {
    pub follower: usize,
    /// Event counter; `l = 0` is the initial broadcast.
    pub l: usize,
    /// Sampling index of the event.
    pub k: u64,
    pub t: f64,
    /// Inter-event step to the next event, `None` for the last one.
    pub steps: Option<u64>,
}

/// State of all followers' observers between sampling instants.
#[derive(Debug, Clone)]
pub struct ObserverBank {
    n: usize,
    mu: f64,
    h: f64,
    phi: DMatrix<f64>,
    gamma: DMatrix<f64>,
    /// In-neighbours per follower, 0 for the leader.
    neighbors: Vec<Vec<usize>>,
    eta: Vec<DVector<f64>>,
    /// `copies[i][p]`: follower `i+1`'s copy of `eta_hat_p`.
    copies: Vec<BTreeMap<usize, DVector<f64>>>,
    triggers: Vec<TriggerFunction>,
    k: u64,
    last_event: Vec<usize>,
    events: Vec<ObserverEvent>,
}

impl ObserverBank {
    /// Sets up the bank at `t_0 = 0` and performs the initial broadcast, so
    /// every copy starts equal to the broadcasting follower's `eta_p(0)`.
    pub fn new(
        s: &DMatrix<f64>,
        graph: &Digraph,
        mu: f64,
        h: f64,
        triggers: Vec<TriggerFunction>,
        eta0: Vec<DVector<f64>>,
        v0: &DVector<f64>,
    ) -> Result<Self> {
        let n = s.nrows();
        let followers = graph.follower_count();
        if !s.is_square() || v0.len() != n {
            return Err(Error::DimensionMismatch("leader state does not match S".into()));
        }
        if eta0.len() != followers || eta0.iter().any(|e| e.len() != n) {
            return Err(Error::DimensionMismatch("one observer state of size n per follower".into()));
        }
        if triggers.len() != followers {
            return Err(Error::DimensionMismatch("one trigger per follower".into()));
        }
        for f in &triggers {
            f.validate()?;
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidInput(format!("observer gain must be positive, got {mu}")));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidInput(format!("sampling period must be positive, got {h}")));
        }
        let (phi, gamma) = spectra::zoh_pair(s, &DMatrix::identity(n, n), h)?;
        let neighbors: Vec<Vec<usize>> = (1..=followers).map(|i| graph.neighbors(i)).collect();
        let copies = neighbors
            .iter()
            .enumerate()
            .map(|(idx, nb)| {
                let mut m = BTreeMap::new();
                m.insert(idx + 1, eta0[idx].clone());
                for &p in nb {
                    let value = if p == 0 { v0.clone() } else { eta0[p - 1].clone() };
                    m.insert(p, value);
                }
                m
            })
            .collect();
        let events = (1..=followers)
            .map(|i| ObserverEvent { follower: i, l: 0, k: 0, t: 0.0, steps: None })
            .collect();
        Ok(Self {
            n,
            mu,
            h,
            phi,
            gamma,
            neighbors,
            eta: eta0,
            copies,
            triggers,
            k: 0,
            last_event: (0..followers).collect(),
            events,
        })
    }

    pub fn follower_count(&self) -> usize {
        self.eta.len()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Index of the current sampling instant.
    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn t(&self) -> f64 {
        self.k as f64 * self.h
    }

    pub fn eta(&self) -> &[DVector<f64>] {
        &self.eta
    }

    pub fn triggers(&self) -> &[TriggerFunction] {
        &self.triggers
    }

    /// Follower `i`'s (1-based) copy of `eta_hat_p`.
    pub fn copy(&self, i: usize, p: usize) -> Option<&DVector<f64>> {
        self.copies.get(i.wrapping_sub(1))?.get(&p)
    }

    /// Held input `mu sum_{j in N_i} (eta_hat_j - eta_hat_i)` per follower.
    pub fn held_inputs(&self) -> Vec<DVector<f64>> {
        self.relative_aux_error_parts()
            .into_iter()
            .map(|e| e * self.mu)
            .collect()
    }

    fn relative_aux_error_parts(&self) -> Vec<DVector<f64>> {
        self.neighbors
            .iter()
            .enumerate()
            .map(|(idx, nb)| {
                let own = &self.copies[idx][&(idx + 1)];
                let mut acc = DVector::zeros(self.n);
                for p in nb {
                    acc += &self.copies[idx][p] - own;
                }
                acc
            })
            .collect()
    }

    /// Stacked `eta_bar = eta - eta_hat`.
    pub fn absolute_aux_error(&self) -> DVector<f64> {
        stack(self.eta.iter().enumerate().map(|(idx, e)| e - &self.copies[idx][&(idx + 1)]))
    }

    /// Stacked relative auxiliary error `eta_hat_e`.
    pub fn relative_aux_error(&self) -> DVector<f64> {
        stack(self.relative_aux_error_parts().into_iter())
    }

    /// Stacked `eta_tilde = eta - 1 (x) v`.
    pub fn estimation_error(&self, v: &DVector<f64>) -> DVector<f64> {
        stack(self.eta.iter().map(|e| e - v))
    }

    /// True when every copy of the same `eta_hat_p` agrees across followers.
    pub fn broadcast_consistent(&self) -> bool {
        let mut seen: BTreeMap<usize, &DVector<f64>> = BTreeMap::new();
        for m in &self.copies {
            for (p, value) in m {
                match seen.get(p) {
                    Some(prev) if *prev != value => return false,
                    Some(_) => {}
                    None => {
                        seen.insert(*p, value);
                    }
                }
            }
        }
        true
    }

    pub fn events(&self) -> &[ObserverEvent] {
        &self.events
    }

    pub fn into_events(self) -> Vec<ObserverEvent> {
        self.events
    }

    /// Advances to the next sampling instant: the copies are propagated by
    /// `e^{Sh}`, the leader copy is refreshed to `v`, the observer states are
    /// replaced by `eta` (already propagated by the caller), and the
    /// triggering rule is evaluated on the pre-update errors. All triggered
    /// followers then broadcast simultaneously. Returns the triggered
    /// followers (1-based).
    pub fn sample(&mut self, v: &DVector<f64>, eta: Vec<DVector<f64>>) -> Result<Vec<usize>> {
        if eta.len() != self.eta.len() || eta.iter().any(|e| e.len() != self.n) || v.len() != self.n {
            return Err(Error::DimensionMismatch("observer sample dimensions".into()));
        }
        self.k += 1;
        let t = self.t();
        for m in &mut self.copies {
            for (p, value) in m.iter_mut() {
                *value = if *p == 0 { v.clone() } else { &self.phi * &*value };
            }
        }
        self.eta = eta;
        let fired: Vec<usize> = (0..self.eta.len())
            .filter(|&idx| {
                let err = (&self.eta[idx] - &self.copies[idx][&(idx + 1)]).norm();
                self.triggers[idx].fires(err, t)
            })
            .map(|idx| idx + 1)
            .collect();
        for &i in &fired {
            let value = self.eta[i - 1].clone();
            for m in &mut self.copies {
                if let Some(c) = m.get_mut(&i) {
                    c.copy_from(&value);
                }
            }
            let last = self.last_event[i - 1];
            let prev = &mut self.events[last];
            prev.steps = Some(self.k - prev.k);
            let l = prev.l + 1;
            self.last_event[i - 1] = self.events.len();
            self.events.push(ObserverEvent { follower: i, l, k: self.k, t, steps: None });
        }
        Ok(fired)
    }

    /// Standalone step: propagates every `eta_i` exactly over one period
    /// under the held input, then samples with the leader value `v_next`.
    pub fn step(&mut self, v_next: &DVector<f64>) -> Result<Vec<usize>> {
        let w = self.held_inputs();
        let eta = self
            .eta
            .iter()
            .zip(&w)
            .map(|(e, wi)| &self.phi * e + &self.gamma * wi)
            .collect();
        self.sample(v_next, eta)
    }
}

fn stack(parts: impl Iterator<Item = DVector<f64>>) -> DVector<f64> {
    let parts: Vec<DVector<f64>> = parts.collect();
    let len = parts.iter().map(|p| p.len()).sum();
    DVector::from_iterator(len, parts.into_iter().flat_map(|p| p.data.as_vec().clone()))
}
