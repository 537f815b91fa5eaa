//! Scenario files: a JSON description of one closed-loop experiment.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::design::{DesignProblem, FeasibilityReport};
use crate::error::{Error, Result};
use crate::linalg::matrix_from_rows;
use crate::netgraph::Digraph;
use crate::interevent::{self, BoundInputs};
use crate::linalg;
use crate::netgraph;
use crate::observer::{self as obs, Envelope, TriggerFunction};
use crate::regulation::{self, ControllerConfig, FollowerModel, RegulatorSolution};
use crate::spectra::LeaderModel;

pub const SCHEMA_VERSION: u32 = 1;

type Rows = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    pub graph: Digraph,
    pub leader: LeaderSpec,
    pub observer: ObserverSpec,
    /// Empty for an observer-only experiment.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub followers: Vec<FollowerSpec>,
    /// Control law shared by followers without their own.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub controller: Option<ControllerSpec>,
    pub horizon: f64,
    #[serde(default = "default_stride")]
    pub output_stride: u64,
    #[serde(default)]
    pub thresholds: Thresholds,
}

fn default_stride() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeaderSpec {
    pub s: Rows,
    pub v0: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GainSpec {
    Value(f64),
    /// `"auto"`: midpoint of the feasible gain interval.
    Auto(AutoTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AutoTag {
    Auto,
}

impl GainSpec {
    pub const AUTO: GainSpec = GainSpec::Auto(AutoTag::Auto);
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObserverSpec {
    pub h: f64,
    pub mu: GainSpec,
    pub trigger: TriggerFunction,
    /// Per-follower override of `trigger`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub triggers: Option<Vec<TriggerFunction>>,
    /// Initial observer states; zero when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta0: Option<Rows>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FollowerSpec {
    pub a: Rows,
    pub b: Rows,
    pub c: Rows,
    pub d: Rows,
    pub p: Rows,
    pub f: Rows,
    pub x0: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub controller: Option<ControllerSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum ControllerSpec {
    Continuous { l: Rows },
    PeriodicEvent { k: Rows, period: f64, trigger: TriggerFunction },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_conv: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_reg: Option<f64>,
}

/// A follower with its regulator solution and validated controller.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedFollower {
    pub model: FollowerModel,
    pub solution: RegulatorSolution,
    pub controller: ControllerConfig,
    pub x0: DVector<f64>,
}

/// Validated scenario in matrix form.
#[derive(Debug, Clone)]
pub struct PreparedScenario {
    pub name: String,
    pub graph: Digraph,
    pub leader: LeaderModel,
    pub v0: DVector<f64>,
    pub h: f64,
    pub mu: f64,
    pub design: FeasibilityReport,
    pub triggers: Vec<TriggerFunction>,
    pub eta0: Vec<DVector<f64>>,
    pub followers: Vec<PreparedFollower>,
    pub horizon: f64,
    pub output_stride: u64,
}

impl ControllerSpec {
    fn to_config(&self) -> Result<ControllerConfig> {
        Ok(match self {
            ControllerSpec::Continuous { l } => ControllerConfig::Continuous { l: matrix_from_rows(l)? },
            ControllerSpec::PeriodicEvent { k, period, trigger } => ControllerConfig::PeriodicEvent {
                k: matrix_from_rows(k)?,
                period: *period,
                trigger: *trigger,
            },
        })
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let sc: Scenario = serde_json::from_str(text)?;
        if sc.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidInput(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                sc.schema_version
            )));
        }
        Ok(sc)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn leader_model(&self) -> Result<LeaderModel> {
        LeaderModel::new(matrix_from_rows(&self.leader.s)?)
    }

    pub fn design_problem(&self) -> Result<DesignProblem> {
        DesignProblem::new(&self.leader_model()?, &self.graph)
    }

    /// Checks dimensions and assumptions, solves the regulator equations
    /// and resolves an automatic observer gain.
    pub fn prepare(&self) -> Result<PreparedScenario> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidInput(format!(
                "unsupported schema_version {}",
                self.schema_version
            )));
        }
        let leader = self.leader_model()?;
        let n = leader.dim();
        if self.leader.v0.len() != n {
            return Err(Error::DimensionMismatch(format!("v0 has {} entries, S is {n}x{n}", self.leader.v0.len())));
        }
        let h = self.observer.h;
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidInput(format!("h must be positive, got {h}")));
        }
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidInput(format!("horizon must be non-negative, got {}", self.horizon)));
        }
        if self.output_stride == 0 {
            return Err(Error::InvalidInput("output_stride must be at least 1".into()));
        }
        let followers = self.graph.follower_count();
        let problem = DesignProblem::new(&leader, &self.graph)?;
        let design = problem.feasibility(h)?;
        let mu = match self.observer.mu {
            GainSpec::Value(mu) => {
                if !(mu > 0.0 && mu.is_finite()) {
                    return Err(Error::InvalidInput(format!("mu must be positive, got {mu}")));
                }
                mu
            }
            GainSpec::Auto(_) => design.suggested_mu.ok_or_else(|| {
                Error::InfeasibleDesign(format!("no observer gain makes F(mu) Schur at h = {h}"))
            })?,
        };
        let triggers = match &self.observer.triggers {
            Some(t) if t.len() != followers => {
                return Err(Error::DimensionMismatch(format!("{} triggers for {followers} followers", t.len())))
            }
            Some(t) => t.clone(),
            None => vec![self.observer.trigger; followers],
        };
        for t in &triggers {
            t.validate()?;
        }
        let eta0 = match &self.observer.eta0 {
            Some(rows) => {
                if rows.len() != followers || rows.iter().any(|r| r.len() != n) {
                    return Err(Error::DimensionMismatch("eta0 must hold N vectors of size n".into()));
                }
                rows.iter().map(|r| DVector::from_column_slice(r)).collect()
            }
            None => vec![DVector::zeros(n); followers],
        };
        if !self.followers.is_empty() && self.followers.len() != followers {
            return Err(Error::DimensionMismatch(format!(
                "{} follower models for {followers} followers",
                self.followers.len()
            )));
        }
        let mut prepared = Vec::with_capacity(self.followers.len());
        for (idx, fs) in self.followers.iter().enumerate() {
            let model = FollowerModel::new(
                matrix_from_rows(&fs.a)?,
                matrix_from_rows(&fs.b)?,
                matrix_from_rows(&fs.c)?,
                matrix_from_rows(&fs.d)?,
                matrix_from_rows(&fs.p)?,
                matrix_from_rows(&fs.f)?,
                n,
            )?;
            if fs.x0.len() != model.state_dim() {
                return Err(Error::DimensionMismatch(format!("x0 of follower {}", idx + 1)));
            }
            let spec = fs.controller.as_ref().or(self.controller.as_ref()).ok_or_else(|| {
                Error::InvalidInput(format!("follower {} has no controller", idx + 1))
            })?;
            let controller = spec.to_config()?;
            controller.validate(&model)?;
            let solution = regulation::solve_regulator(&model, leader.s())?;
            prepared.push(PreparedFollower {
                model,
                solution,
                controller,
                x0: DVector::from_column_slice(&fs.x0),
            });
        }
        Ok(PreparedScenario {
            name: self.name.clone(),
            graph: self.graph.clone(),
            v0: DVector::from_column_slice(&self.leader.v0),
            leader,
            h,
            mu,
            design,
            triggers,
            eta0,
            followers: prepared,
            horizon: self.horizon,
            output_stride: self.output_stride,
        })
    }
}

impl PreparedScenario {
    /// Common exponential envelope of the observer triggers.
    pub fn trigger_envelope(&self) -> Result<Envelope> {
        let envs = self.triggers.iter().map(|t| t.envelope()).collect::<Result<Vec<_>>>()?;
        let first = envs[0];
        if envs.iter().any(|e| e.alpha != first.alpha) {
            return Err(Error::InvalidInput("triggers do not share a decay rate".into()));
        }
        Ok(Envelope {
            sigma_m: envs.iter().map(|e| e.sigma_m).fold(f64::INFINITY, f64::min),
            sigma_big_m: envs.iter().map(|e| e.sigma_big_m).fold(0.0, f64::max),
            alpha: first.alpha,
        })
    }

    /// Inputs of the inter-event bounds for this scenario under `envelope`.
    pub fn bound_inputs(&self, envelope: Envelope) -> Result<BoundInputs> {
        let h_mat = netgraph::build_laplacian_and_h(&self.graph).h;
        let dynamics = obs::build_error_dynamics(self.leader.s(), &h_mat, self.mu, self.h)?;
        let initial_error = self
            .eta0
            .iter()
            .map(|e| (e - &self.v0).norm_squared())
            .sum::<f64>()
            .sqrt();
        Ok(BoundInputs {
            contraction: interevent::contraction(&dynamics.f)?,
            mu: self.mu,
            h: self.h,
            norm_h: linalg::spectral_norm(&h_mat),
            norm_g: linalg::spectral_norm(&dynamics.g),
            norm_s: linalg::spectral_norm(self.leader.s()),
            followers: self.graph.follower_count(),
            initial_error,
            envelope,
        })
    }
}

/// Convenience for building matrices in scenario form.
pub fn rows_of(m: &DMatrix<f64>) -> Rows {
    crate::linalg::matrix_to_rows(m)
}
