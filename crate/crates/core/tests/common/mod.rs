//! Random instance generators and independent oracles shared by the
//! integration tests.
#![allow(dead_code)]

use coopreg::netgraph::Digraph;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// Random digraph over `followers` followers with a spanning tree rooted at 0.
pub fn random_rooted_graph(rng: &mut ChaCha8Rng, followers: usize) -> Digraph {
    let mut edges = std::collections::BTreeSet::new();
    let mut order: Vec<usize> = (1..=followers).collect();
    for i in (1..order.len()).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    for (pos, &v) in order.iter().enumerate() {
        let parent = if pos == 0 { 0 } else { order[rng.gen_range(0..pos + 1)] };
        let parent = if parent == v { 0 } else { parent };
        edges.insert((parent, v));
    }
    for from in 0..=followers {
        for to in 1..=followers {
            if from != to && rng.gen_bool(0.3) {
                edges.insert((from, to));
            }
        }
    }
    Digraph::new(followers, edges).unwrap()
}

fn random_similarity(rng: &mut ChaCha8Rng, n: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    loop {
        let t = DMatrix::from_fn(n, n, |i, j| {
            (if i == j { 1.0 } else { 0.0 }) + rng.gen_range(-0.4..0.4)
        });
        if let Some(inv) = t.clone().try_inverse() {
            if inv.norm() * t.norm() < 20.0 {
                return (t, inv);
            }
        }
    }
}

/// Real block-diagonal form of the requested eigenvalues (complex entries
/// must come with positive imaginary part; the conjugate is implied).
pub fn real_form(blocks: &[Complex64]) -> DMatrix<f64> {
    let n: usize = blocks.iter().map(|z| if z.im != 0.0 { 2 } else { 1 }).sum();
    let mut m = DMatrix::zeros(n, n);
    let mut at = 0;
    for z in blocks {
        if z.im != 0.0 {
            m[(at, at)] = z.re;
            m[(at + 1, at + 1)] = z.re;
            m[(at, at + 1)] = z.im;
            m[(at + 1, at)] = -z.im;
            at += 2;
        } else {
            m[(at, at)] = z.re;
            at += 1;
        }
    }
    m
}

/// Leader of order at most `n_max` mixing all four eigenvalue classes.
pub fn random_leader(rng: &mut ChaCha8Rng, n_max: usize) -> DMatrix<f64> {
    let mut blocks = Vec::new();
    let mut n = 0;
    let target = rng.gen_range(1..=n_max);
    while n < target {
        let pick = rng.gen_range(0..5);
        if pick < 2 && n + 2 <= target {
            let re = if rng.gen_bool(0.5) { 0.0 } else { rng.gen_range(-1.0..1.0) };
            blocks.push(Complex64::new(re, rng.gen_range(0.3..4.0)));
            n += 2;
        } else if pick == 2 {
            blocks.push(Complex64::new(0.0, 0.0));
            n += 1;
        } else {
            blocks.push(Complex64::new(rng.gen_range(-2.0..2.0), 0.0));
            n += 1;
        }
    }
    let (t, inv) = random_similarity(rng, n);
    &t * real_form(&blocks) * &inv
}

/// Leader whose eigenvalues are all nonzero and purely imaginary.
pub fn random_oscillator(rng: &mut ChaCha8Rng, pairs: usize) -> DMatrix<f64> {
    let blocks: Vec<Complex64> =
        (0..pairs).map(|_| Complex64::new(0.0, rng.gen_range(0.2..5.0))).collect();
    let (t, inv) = random_similarity(rng, 2 * pairs);
    &t * real_form(&blocks) * &inv
}

/// `(e^z - 1) / z`, accurate near zero.
pub fn phi1(z: Complex64) -> Complex64 {
    if z.norm() < 1e-4 {
        Complex64::new(1.0, 0.0) + z / 2.0 + z * z / 6.0 + z * z * z / 24.0
    } else {
        (z.exp() - 1.0) / z
    }
}

/// Eigenvalue of `F(mu)` predicted for the pair `(lambda_i, lambda_q)`.
pub fn mapped_eigenvalue(li: Complex64, lq: Complex64, mu: f64, h: f64) -> Complex64 {
    (lq * h).exp() - li * mu * h * phi1(lq * h)
}

/// Largest distance after greedily pairing each expected value with its
/// nearest unused computed value.
pub fn multiset_distance(expected: &[Complex64], computed: &[Complex64]) -> f64 {
    assert_eq!(expected.len(), computed.len());
    let mut used = vec![false; computed.len()];
    let mut worst = 0.0f64;
    for z in expected {
        let (j, d) = computed
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, w)| (j, (w - z).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

/// Composite Simpson rule for a complex integrand.
pub fn simpson(f: impl Fn(f64) -> Complex64, a: f64, b: f64, intervals: usize) -> Complex64 {
    let n = intervals + intervals % 2;
    let dx = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for j in 1..n {
        let w = if j % 2 == 1 { 4.0 } else { 2.0 };
        acc += f(a + j as f64 * dx) * w;
    }
    acc * dx / 3.0
}

/// Classical fourth-order Runge-Kutta for `x' = f(t, x)`.
pub fn rk4(
    f: impl Fn(f64, &DVector<f64>) -> DVector<f64>,
    x0: DVector<f64>,
    t0: f64,
    t1: f64,
    steps: usize,
) -> DVector<f64> {
    let dt = (t1 - t0) / steps as f64;
    let mut x = x0;
    for j in 0..steps {
        let t = t0 + j as f64 * dt;
        let k1 = f(t, &x);
        let k2 = f(t + dt / 2.0, &(&x + &k1 * (dt / 2.0)));
        let k3 = f(t + dt / 2.0, &(&x + &k2 * (dt / 2.0)));
        let k4 = f(t + dt, &(&x + &k3 * dt));
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
    }
    x
}
