//! The three worked examples as ready-to-run scenarios.

use nalgebra::DMatrix;

use crate::linalg::matrix_to_rows;
use crate::netgraph::Digraph;
use crate::observer::TriggerFunction;

use super::scenario::{
    ControllerSpec, FollowerSpec, GainSpec, LeaderSpec, ObserverSpec, Scenario, Thresholds,
    SCHEMA_VERSION,
};

pub fn example1_graph() -> Digraph {
    Digraph::new(3, [(0, 1), (3, 2), (1, 3), (2, 1), (2, 3)]).expect("valid graph")
}

pub fn example2_graph() -> Digraph {
    Digraph::new(
        4,
        [(0, 2), (0, 1), (4, 1), (1, 2), (4, 3), (3, 4), (3, 2), (2, 3), (2, 4)],
    )
    .expect("valid graph")
}

pub fn example3_graph() -> Digraph {
    Digraph::new(
        7,
        [(0, 6), (6, 1), (6, 4), (4, 5), (1, 7), (4, 2), (1, 3), (0, 2), (0, 3)],
    )
    .expect("valid graph")
}

/// Time-triggered observers for a fast harmonic leader, with the sampling
/// period and gain left open.
pub fn example1_with(h: f64, mu: GainSpec) -> Scenario {
    Scenario {
        schema_version: SCHEMA_VERSION,
        name: "example1".into(),
        graph: example1_graph(),
        leader: LeaderSpec {
            s: vec![vec![0.0, 100.0], vec![-100.0, 0.0]],
            v0: vec![1.0, 0.0],
        },
        observer: ObserverSpec {
            h,
            mu,
            trigger: TriggerFunction::Always,
            triggers: None,
            eta0: None,
        },
        followers: Vec::new(),
        controller: None,
        horizon: 20.0,
        output_stride: 1,
        thresholds: Thresholds { eps_conv: Some(1e-3), eps_reg: None },
    }
}

/// `h = 0.2`, `mu = 25`.
pub fn example1() -> Scenario {
    example1_with(0.2, GainSpec::Value(25.0))
}

/// Event-triggered observers with `f_i(t) = e^{-alpha t}`.
pub fn example2_with(alpha: f64) -> Scenario {
    Scenario {
        schema_version: SCHEMA_VERSION,
        name: "example2".into(),
        graph: example2_graph(),
        leader: LeaderSpec {
            s: vec![vec![0.0, 1.0], vec![-1.0, 0.0]],
            v0: vec![1.0, 0.0],
        },
        observer: ObserverSpec {
            h: 0.001,
            mu: GainSpec::Value(1.5),
            trigger: TriggerFunction::Exponential { sigma: 1.0, alpha },
            triggers: None,
            eta0: None,
        },
        followers: Vec::new(),
        controller: None,
        horizon: 20.0,
        output_stride: 10,
        thresholds: Thresholds { eps_conv: Some(1e-2), eps_reg: None },
    }
}

/// `alpha = 0.25`.
pub fn example2() -> Scenario {
    example2_with(0.25)
}

/// Seven double-integrator robots in formation behind a constant-velocity
/// leader, with periodic event-triggered state feedback.
pub fn example3() -> Scenario {
    let i2 = DMatrix::<f64>::identity(2, 2);
    let kron = |rows: usize, cols: usize, data: &[f64]| {
        matrix_to_rows(&DMatrix::from_row_slice(rows, cols, data).kronecker(&i2))
    };
    let a = kron(2, 2, &[0.0, 1.0, 0.0, 0.0]);
    let x0 = [
        [-5.0, 18.0, 0.0, 0.0],
        [3.0, -14.0, 0.0, 0.0],
        [-2.0, -9.0, 0.0, 0.0],
        [0.0, 5.0, 0.0, 0.0],
        [9.0, 4.0, 0.0, 0.0],
        [21.0, 26.0, 0.0, 0.0],
        [-16.0, -9.0, 0.0, 0.0],
    ];
    let followers = x0
        .iter()
        .map(|x| FollowerSpec {
            a: a.clone(),
            b: kron(2, 1, &[0.0, 1.0]),
            c: kron(1, 2, &[1.0, 0.0]),
            d: vec![vec![0.0; 2]; 2],
            p: vec![vec![0.0; 4]; 4],
            f: kron(1, 2, &[-1.0, 0.0]),
            x0: x.to_vec(),
            controller: None,
        })
        .collect();
    Scenario {
        schema_version: SCHEMA_VERSION,
        name: "example3".into(),
        graph: example3_graph(),
        leader: LeaderSpec { s: a, v0: vec![11.0, 11.0, 5.0, 5.0] },
        observer: ObserverSpec {
            h: 0.01,
            mu: GainSpec::Value(10.0),
            trigger: TriggerFunction::Exponential { sigma: 30.0, alpha: 0.8 },
            triggers: None,
            eta0: None,
        },
        followers,
        controller: Some(ControllerSpec::PeriodicEvent {
            k: kron(1, 2, &[-4.0, -2.0]),
            period: 0.05,
            trigger: TriggerFunction::LogExp { sigma: 35.0, alpha: 0.4, envelope: None },
        }),
        horizon: 30.0,
        output_stride: 5,
        thresholds: Thresholds { eps_conv: None, eps_reg: Some(0.1) },
    }
}

/// Built-in scenarios by example number.
pub fn builtin_scenarios() -> Vec<Scenario> {
    vec![example1(), example2(), example3()]
}

pub fn builtin(index: u32) -> Option<Scenario> {
    match index {
        1 => Some(example1()),
        2 => Some(example2()),
        3 => Some(example3()),
        _ => None,
    }
}
