//! Exact-propagation simulation over the merged observer/controller grid.
//!
//! The global state `z = (v, eta_1..eta_N, x_1..x_N)` obeys
//! `z' = M z + E d` between grid instants, where `d` collects the held
//! observer inputs and the held parts of the periodic controllers. Each
//! segment is advanced with the exponential of the augmented matrix.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::observer::{ObserverBank, ObserverEvent};
use crate::regulation::{self, ControllerConfig};
use crate::spectra;

use super::scenario::{PreparedScenario, Scenario, SCHEMA_VERSION};

/// Relative tolerance (in units of `h`) for merging grid instants.
const MERGE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerEvent {
    pub follower: usize,
    /// Controller sampling index.
    pub m: u64,
    pub t: f64,
}

/// Snapshot at an output instant, after that instant's updates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub k: u64,
    pub t: f64,
    pub v: Vec<f64>,
    pub eta: Vec<Vec<f64>>,
    /// `||eta_i - v||`
    pub eta_error: Vec<f64>,
    /// `||eta_i - eta_hat_i||`
    pub eta_bar: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub e: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub schema_version: u32,
    pub scenario: String,
    pub h: f64,
    pub mu: f64,
    pub followers: usize,
    /// Leader order `n`.
    pub leader_dim: usize,
    /// Follower state sizes; empty for an observer-only run.
    pub state_dims: Vec<usize>,
    /// Regulated output sizes.
    pub output_dims: Vec<usize>,
    pub samples: Vec<Sample>,
    pub observer_events: Vec<ObserverEvent>,
    pub controller_events: Vec<ControllerEvent>,
}

impl Trace {
    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }

    /// `max_i ||eta_i - v||` at the last sample.
    pub fn final_estimation_error(&self) -> Option<f64> {
        self.last().map(|s| s.eta_error.iter().copied().fold(0.0, f64::max))
    }

    /// `max_i ||e_i||` at the last sample.
    pub fn final_regulation_error(&self) -> Option<f64> {
        self.last().map(|s| {
            s.e.iter()
                .map(|e| crate::linalg::norm2(e))
                .fold(0.0, f64::max)
        })
    }

    /// Inter-event steps of one follower (1-based), in event order.
    pub fn observer_steps(&self, follower: usize) -> Vec<u64> {
        self.observer_events
            .iter()
            .filter(|e| e.follower == follower)
            .filter_map(|e| e.steps)
            .collect()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

struct Layout {
    n: usize,
    eta_off: Vec<usize>,
    x_off: Vec<usize>,
    dim: usize,
    /// Column of each follower's held controller input in `d`.
    u_off: Vec<Option<usize>>,
    inputs: usize,
}

impl Layout {
    fn new(p: &PreparedScenario) -> Self {
        let n = p.leader.dim();
        let followers = p.graph.follower_count();
        let eta_off = (0..followers).map(|i| n + i * n).collect();
        let mut off = n * (1 + followers);
        let mut x_off = Vec::new();
        for f in &p.followers {
            x_off.push(off);
            off += f.model.state_dim();
        }
        let mut col = n * followers;
        let mut u_off = Vec::new();
        for f in &p.followers {
            match f.controller {
                ControllerConfig::PeriodicEvent { .. } => {
                    u_off.push(Some(col));
                    col += f.model.input_dim();
                }
                ControllerConfig::Continuous { .. } => u_off.push(None),
            }
        }
        Layout { n, eta_off, x_off, dim: off, u_off, inputs: col }
    }

    fn system(&self, p: &PreparedScenario) -> (DMatrix<f64>, DMatrix<f64>) {
        let n = self.n;
        let mut m = DMatrix::zeros(self.dim, self.dim);
        let mut e = DMatrix::zeros(self.dim, self.inputs);
        m.view_mut((0, 0), (n, n)).copy_from(p.leader.s());
        for (i, &off) in self.eta_off.iter().enumerate() {
            m.view_mut((off, off), (n, n)).copy_from(p.leader.s());
            e.view_mut((off, i * n), (n, n)).fill_with_identity();
        }
        for (i, f) in p.followers.iter().enumerate() {
            let (xo, ni) = (self.x_off[i], f.model.state_dim());
            let eo = self.eta_off[i];
            let (a, b) = (&f.model.a, &f.model.b);
            let (xm, um) = (&f.solution.x, &f.solution.u);
            match &f.controller {
                ControllerConfig::Continuous { l } => {
                    m.view_mut((xo, xo), (ni, ni)).copy_from(&(a + b * l));
                    m.view_mut((xo, eo), (ni, n)).copy_from(&(b * (um - l * xm)));
                }
                ControllerConfig::PeriodicEvent { .. } => {
                    m.view_mut((xo, xo), (ni, ni)).copy_from(a);
                    m.view_mut((xo, eo), (ni, n)).copy_from(&(b * um));
                    let col = self.u_off[i].expect("periodic follower has an input slot");
                    e.view_mut((xo, col), (ni, f.model.input_dim())).copy_from(b);
                }
            }
        }
        (m, e)
    }
}

#[derive(Debug, Clone, Default)]
struct GridPoint {
    t: f64,
    observer: Option<u64>,
    controllers: Vec<(usize, u64)>,
}

fn build_grid(p: &PreparedScenario) -> Vec<GridPoint> {
    let h = p.h;
    let k_end = (p.horizon / h + 1e-9).floor() as u64;
    let mut raw: Vec<GridPoint> = (0..=k_end)
        .map(|k| GridPoint { t: k as f64 * h, observer: Some(k), controllers: Vec::new() })
        .collect();
    for (i, f) in p.followers.iter().enumerate() {
        if let ControllerConfig::PeriodicEvent { period, .. } = f.controller {
            let m_end = (p.horizon / period + 1e-9).floor() as u64;
            for m in 0..=m_end {
                raw.push(GridPoint { t: m as f64 * period, observer: None, controllers: vec![(i, m)] });
            }
        }
    }
    raw.sort_by(|a, b| a.t.total_cmp(&b.t).then(b.observer.is_some().cmp(&a.observer.is_some())));
    let tol = MERGE_TOL * h;
    let mut grid: Vec<GridPoint> = Vec::with_capacity(raw.len());
    for pt in raw {
        match grid.last_mut() {
            Some(last) if (pt.t - last.t).abs() <= tol => {
                if pt.observer.is_some() {
                    last.t = pt.t;
                    last.observer = pt.observer;
                }
                last.controllers.extend(pt.controllers);
            }
            _ => grid.push(pt),
        }
    }
    grid
}

struct Propagator {
    m: DMatrix<f64>,
    e: DMatrix<f64>,
    quantum: f64,
    cache: HashMap<i64, (DMatrix<f64>, DMatrix<f64>)>,
}

impl Propagator {
    fn advance(&mut self, z: &DVector<f64>, d: &DVector<f64>, dt: f64) -> Result<DVector<f64>> {
        let key = (dt / self.quantum).round() as i64;
        if !self.cache.contains_key(&key) {
            let pair = spectra::zoh_pair(&self.m, &self.e, dt)?;
            self.cache.insert(key, pair);
        }
        let (phi, gamma) = &self.cache[&key];
        Ok(phi * z + gamma * d)
    }
}

pub fn run(scenario: &Scenario) -> Result<Trace> {
    run_prepared(&scenario.prepare()?)
}

pub fn run_prepared(p: &PreparedScenario) -> Result<Trace> {
    let followers = p.graph.follower_count();
    let mut trace = Trace {
        schema_version: SCHEMA_VERSION,
        scenario: p.name.clone(),
        h: p.h,
        mu: p.mu,
        followers,
        leader_dim: p.leader.dim(),
        state_dims: p.followers.iter().map(|f| f.model.state_dim()).collect(),
        output_dims: p.followers.iter().map(|f| f.model.output_dim()).collect(),
        samples: Vec::new(),
        observer_events: Vec::new(),
        controller_events: Vec::new(),
    };
    if p.horizon == 0.0 {
        return Ok(trace);
    }
    let layout = Layout::new(p);
    let n = layout.n;
    let (m, e) = layout.system(p);
    let min_period = p
        .followers
        .iter()
        .filter_map(|f| match f.controller {
            ControllerConfig::PeriodicEvent { period, .. } => Some(period),
            _ => None,
        })
        .fold(p.h, f64::min);
    let mut prop = Propagator { m, e, quantum: 1e-12 * min_period, cache: HashMap::new() };

    let mut z = DVector::zeros(layout.dim);
    z.rows_mut(0, n).copy_from(&p.v0);
    for (i, &off) in layout.eta_off.iter().enumerate() {
        z.rows_mut(off, n).copy_from(&p.eta0[i]);
    }
    for (i, f) in p.followers.iter().enumerate() {
        z.rows_mut(layout.x_off[i], f.model.state_dim()).copy_from(&f.x0);
    }

    let mut bank = ObserverBank::new(
        p.leader.s(),
        &p.graph,
        p.mu,
        p.h,
        p.triggers.clone(),
        p.eta0.clone(),
        &p.v0,
    )?;
    let mut delta_hat: Vec<DVector<f64>> =
        p.followers.iter().map(|f| DVector::zeros(f.model.state_dim())).collect();
    let mut held_u: Vec<DVector<f64>> =
        p.followers.iter().map(|f| DVector::zeros(f.model.input_dim())).collect();
    let mut d = DVector::zeros(layout.inputs);
    let mut prev_t = 0.0;

    let eta_of = |z: &DVector<f64>, i: usize| z.rows(layout.eta_off[i], n).into_owned();
    let x_of = |z: &DVector<f64>, i: usize| {
        z.rows(layout.x_off[i], p.followers[i].model.state_dim()).into_owned()
    };

    for (idx, pt) in build_grid(p).iter().enumerate() {
        if idx > 0 {
            z = prop.advance(&z, &d, pt.t - prev_t)?;
        }
        prev_t = pt.t;
        let v = z.rows(0, n).into_owned();
        if let Some(k) = pt.observer {
            if k > 0 {
                bank.sample(&v, (0..followers).map(|i| eta_of(&z, i)).collect())?;
            }
        }
        for &(i, mi) in &pt.controllers {
            let f = &p.followers[i];
            if let ControllerConfig::PeriodicEvent { k: gain, trigger, .. } = &f.controller {
                let upd = regulation::periodic_event_control(
                    &x_of(&z, i),
                    &eta_of(&z, i),
                    pt.t,
                    gain,
                    trigger,
                    &f.solution,
                    &mut delta_hat[i],
                );
                if upd.triggered {
                    trace.controller_events.push(ControllerEvent { follower: i + 1, m: mi, t: pt.t });
                }
                held_u[i] = upd.held;
            }
        }
        if let Some(k) = pt.observer {
            if k % p.output_stride == 0 {
                trace.samples.push(snapshot(p, &layout, &z, &bank, &held_u, k, pt.t));
            }
        }
        for (i, w) in bank.held_inputs().iter().enumerate() {
            d.rows_mut(i * n, n).copy_from(w);
        }
        for (i, slot) in layout.u_off.iter().enumerate() {
            if let Some(col) = *slot {
                d.rows_mut(col, held_u[i].len()).copy_from(&held_u[i]);
            }
        }
    }
    trace.observer_events = bank.into_events();
    Ok(trace)
}

fn snapshot(
    p: &PreparedScenario,
    layout: &Layout,
    z: &DVector<f64>,
    bank: &ObserverBank,
    held_u: &[DVector<f64>],
    k: u64,
    t: f64,
) -> Sample {
    let n = layout.n;
    let v = z.rows(0, n).into_owned();
    let bar = bank.absolute_aux_error();
    let mut sample = Sample {
        k,
        t,
        v: v.iter().copied().collect(),
        eta: Vec::new(),
        eta_error: Vec::new(),
        eta_bar: Vec::new(),
        x: Vec::new(),
        e: Vec::new(),
    };
    for (i, &off) in layout.eta_off.iter().enumerate() {
        let eta = z.rows(off, n);
        sample.eta_error.push((eta - &v).norm());
        sample.eta_bar.push(bar.rows(i * n, n).norm());
        sample.eta.push(eta.iter().copied().collect());
    }
    for (i, f) in p.followers.iter().enumerate() {
        let x = z.rows(layout.x_off[i], f.model.state_dim()).into_owned();
        let eta = z.rows(layout.eta_off[i], n).into_owned();
        let u = match &f.controller {
            ControllerConfig::Continuous { l } => regulation::continuous_control(&x, &eta, l, &f.solution),
            ControllerConfig::PeriodicEvent { .. } => &held_u[i] + &f.solution.u * &eta,
        };
        sample.e.push(f.model.regulated_error(&x, &u, &v).iter().copied().collect());
        sample.x.push(x.iter().copied().collect());
    }
    sample
}
