//! Design-time feasibility of the sampled observer.
//!
//! For every pair of a follower eigenvalue `lambda_i` (of `H`) and a leader
//! eigenvalue `lambda_q` (of `S`), the squared modulus of the corresponding
//! eigenvalue of `F(mu)` minus one is the quadratic
//! `alpha mu^2 + beta mu + gamma`. `F(mu)` is Schur exactly when `mu > 0`
//! makes every such quadratic negative, which reduces to the phase,
//! magnitude and non-zero spectral mapping conditions plus a nonempty
//! intersection of the per-pair root intervals.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::netgraph::{self, Digraph};
use crate::spectra::{
    self, LeaderModel, SampledEigen, SpectrumClass, SpectrumPartition,
};

/// Intersections narrower than this are reported empty.
pub const INTERVAL_TOL: f64 = 1e-9;

/// Relative tolerance used to merge repeated eigenvalues.
const DEDUP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Holds,
    Fails,
    /// The condition is not required for this eigenvalue class.
    NotApplicable,
}

impl Verdict {
    fn from_bool(b: bool) -> Self {
        if b {
            Verdict::Holds
        } else {
            Verdict::Fails
        }
    }

    pub fn is_ok(self) -> bool {
        self != Verdict::Fails
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairCoefficients {
    /// Index into the deduplicated follower eigenvalue list.
    pub follower: usize,
    /// Index into the deduplicated leader eigenvalue list.
    pub eigen: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// The spectral mapping vanishes (`U + jV = 0`); no gain helps.
    pub degenerate: bool,
}

impl PairCoefficients {
    pub fn eval(&self, mu: f64) -> f64 {
        (self.alpha * mu + self.beta) * mu + self.gamma
    }

    pub fn discriminant(&self) -> f64 {
        self.beta * self.beta - 4.0 * self.alpha * self.gamma
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadraticCoefficients {
    pub h: f64,
    pub pairs: Vec<PairCoefficients>,
}

/// `(alpha, beta, gamma)` for one `(lambda_i, lambda_q)` pair.
///
/// Uses the closed forms in terms of `U_q`, `V_q` and `psi_{i,q}` for
/// `lambda_q != 0` and the direct limits for `lambda_q = 0`.
pub fn pair_coefficients(lambda_i: Complex64, lambda_q: Complex64, h: f64) -> (f64, f64, f64) {
    let mod_i = lambda_i.norm();
    if lambda_q == Complex64::new(0.0, 0.0) {
        return (mod_i * mod_i * h * h, -2.0 * h * lambda_i.re, 0.0);
    }
    let sampled = spectra::sample_eigenvalue(lambda_q, h);
    let ratio = mod_i / lambda_q.norm();
    let decay = (lambda_q.re * h).exp();
    let alpha = ratio * ratio * (sampled.u * sampled.u + sampled.v * sampled.v);
    // |U + jV| cos(psi) written without the Arg so it stays defined when U + jV = 0
    let rotated = Complex64::new(sampled.u, sampled.v)
        * Complex64::from_polar(1.0, lambda_i.arg() - lambda_q.arg());
    let beta = -2.0 * ratio * decay * rotated.re;
    let gamma = (2.0 * lambda_q.re * h).exp_m1();
    (alpha, beta, gamma)
}

/// Coefficients for every pair of follower and leader eigenvalues.
pub fn coefficients(
    p: &SpectrumPartition,
    lambda_i: &[Complex64],
    h: f64,
) -> Result<QuadraticCoefficients> {
    check_h(h)?;
    let mut pairs = Vec::with_capacity(lambda_i.len() * p.eigen.len());
    for (i, &li) in lambda_i.iter().enumerate() {
        for (q, e) in p.eigen.iter().enumerate() {
            let (alpha, beta, gamma) = pair_coefficients(li, e.value, h);
            let degenerate =
                e.class != SpectrumClass::Q4 && spectra::sample_eigenvalue(e.value, h).is_degenerate();
            pairs.push(PairCoefficients { follower: i, eigen: q, alpha, beta, gamma, degenerate });
        }
    }
    Ok(QuadraticCoefficients { h, pairs })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairInterval {
    pub follower: usize,
    pub eigen: usize,
    /// Open interval of positive gains making this pair's quadratic negative;
    /// `None` when no positive gain works.
    pub interval: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainInterval {
    pub pairs: Vec<PairInterval>,
    /// Intersection over all pairs; `None` when empty.
    pub intersection: Option<(f64, f64)>,
}

/// Positive solution set of `alpha mu^2 + beta mu + gamma < 0`.
pub fn negative_region(c: &PairCoefficients) -> Option<(f64, f64)> {
    if c.degenerate {
        return None;
    }
    let (a, b, g) = (c.alpha, c.beta, c.gamma);
    let (lo, hi) = if a > 0.0 {
        let disc = b * b - 4.0 * a * g;
        if !(disc > 0.0) {
            return None;
        }
        let q = -0.5 * (b + b.signum() * disc.sqrt());
        let r1 = q / a;
        let r2 = if q != 0.0 { g / q } else { 0.0 };
        (r1.min(r2), r1.max(r2))
    } else if b < 0.0 {
        (-g / b, f64::INFINITY)
    } else if b > 0.0 {
        (f64::NEG_INFINITY, -g / b)
    } else if g < 0.0 {
        (f64::NEG_INFINITY, f64::INFINITY)
    } else {
        return None;
    };
    let lo = lo.max(0.0);
    (hi > lo).then_some((lo, hi))
}

pub fn mu_interval(c: &QuadraticCoefficients) -> GainInterval {
    let pairs: Vec<PairInterval> = c
        .pairs
        .iter()
        .map(|pc| PairInterval {
            follower: pc.follower,
            eigen: pc.eigen,
            interval: negative_region(pc),
        })
        .collect();
    let intersection = intersect_all(pairs.iter().map(|p| p.interval));
    GainInterval { pairs, intersection }
}

fn intersect_all(intervals: impl Iterator<Item = Option<(f64, f64)>>) -> Option<(f64, f64)> {
    let mut lo = 0.0f64;
    let mut hi = f64::INFINITY;
    for iv in intervals {
        let (a, b) = iv?;
        lo = lo.max(a);
        hi = hi.min(b);
    }
    (hi - lo > INTERVAL_TOL).then_some((lo, hi))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairReport {
    pub lambda_i: Complex64,
    pub lambda_q: Complex64,
    pub class: SpectrumClass,
    /// Number of `(i, q)` instances collapsed into this pair.
    pub multiplicity: usize,
    pub psi: Option<f64>,
    pub phase: Verdict,
    pub magnitude: Verdict,
    pub spectral_mapping: Verdict,
    pub coefficients: PairCoefficients,
    pub interval: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub h: f64,
    pub pairs: Vec<PairReport>,
    pub phase_condition: bool,
    pub magnitude_condition: bool,
    pub spectral_mapping_condition: bool,
    pub intersection: Option<(f64, f64)>,
    pub feasible: bool,
    /// Midpoint of the intersection when feasible.
    pub suggested_mu: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub h: f64,
    pub feasible: bool,
    pub interval: Option<(f64, f64)>,
}

/// A leader spectrum and graph spectrum ready for gain/period design.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignProblem {
    partition: SpectrumPartition,
    follower_eigs: Vec<Complex64>,
    /// Deduplicated follower eigenvalues with multiplicities.
    unique_followers: Vec<(Complex64, usize)>,
    /// Deduplicated leader eigenvalues with multiplicities and class.
    unique_leader: Vec<(Complex64, SpectrumClass, usize)>,
}

impl DesignProblem {
    /// Checks the rooted spanning tree and extracts both spectra.
    pub fn new(leader: &LeaderModel, graph: &Digraph) -> Result<Self> {
        let cert = netgraph::check_spanning_tree(graph);
        if !cert.has_root_spanning_tree {
            return Err(Error::AssumptionViolated(format!(
                "graph has no spanning tree rooted at the leader (reachable: {:?})",
                cert.reachable_set
            )));
        }
        let lf = netgraph::build_laplacian_and_h(graph);
        let follower_eigs = netgraph::eigs_h(&lf)?;
        let partition = spectra::partition_spectrum(leader, leader.default_tolerance())?;
        Self::from_parts(partition, follower_eigs)
    }

    /// Builds from precomputed spectra; every `lambda_i` must have a
    /// positive real part.
    pub fn from_parts(partition: SpectrumPartition, follower_eigs: Vec<Complex64>) -> Result<Self> {
        if follower_eigs.is_empty() || partition.eigen.is_empty() {
            return Err(Error::InvalidInput("empty spectrum".into()));
        }
        if let Some(bad) = follower_eigs.iter().find(|z| !(z.re > 0.0)) {
            return Err(Error::AssumptionViolated(format!(
                "eigenvalue {bad} of H does not have a positive real part"
            )));
        }
        let unique_followers = dedup(follower_eigs.iter().map(|&z| (z, ())))
            .into_iter()
            .map(|(z, _, m)| (z, m))
            .collect();
        let unique_leader = dedup(partition.eigen.iter().map(|e| (e.value, e.class)));
        Ok(Self { partition, follower_eigs, unique_followers, unique_leader })
    }

    pub fn partition(&self) -> &SpectrumPartition {
        &self.partition
    }

    pub fn follower_eigenvalues(&self) -> &[Complex64] {
        &self.follower_eigs
    }

    fn unique_partition(&self) -> SpectrumPartition {
        SpectrumPartition {
            eigen: self
                .unique_leader
                .iter()
                .map(|&(z, class, _)| spectra::LeaderEigen { raw: z, value: z, class })
                .collect(),
            zero_tolerance: self.partition.zero_tolerance,
        }
    }

    fn unique_follower_values(&self) -> Vec<Complex64> {
        self.unique_followers.iter().map(|&(z, _)| z).collect()
    }

    /// Coefficients over the deduplicated eigenvalue pairs.
    pub fn coefficients(&self, h: f64) -> Result<QuadraticCoefficients> {
        coefficients(&self.unique_partition(), &self.unique_follower_values(), h)
    }

    pub fn mu_interval(&self, h: f64) -> Result<GainInterval> {
        Ok(mu_interval(&self.coefficients(h)?))
    }

    /// Evaluates conditions (I)-(IV) at sampling period `h`.
    pub fn feasibility(&self, h: f64) -> Result<FeasibilityReport> {
        let coeffs = self.coefficients(h)?;
        let mut pairs = Vec::with_capacity(coeffs.pairs.len());
        for pc in &coeffs.pairs {
            let (li, mi) = self.unique_followers[pc.follower];
            let (lq, class, mq) = self.unique_leader[pc.eigen];
            let sampled: SampledEigen = spectra::sample_eigenvalue(lq, h);
            let psi = sampled.phi.map(|phi| li.arg() + phi - lq.arg());
            let phase = match (class, psi) {
                (SpectrumClass::Q1 | SpectrumClass::Q3, Some(psi)) => {
                    Verdict::from_bool(psi > -PI / 2.0 && psi < PI / 2.0)
                }
                (SpectrumClass::Q1 | SpectrumClass::Q3, None) => Verdict::Fails,
                _ => Verdict::NotApplicable,
            };
            let magnitude = match (class, psi) {
                // e^{2 Re h} < csc^2(psi), multiplied through by sin^2(psi)
                (SpectrumClass::Q1, Some(psi)) => {
                    let s = psi.sin();
                    Verdict::from_bool((2.0 * lq.re * h).exp() * s * s < 1.0)
                }
                (SpectrumClass::Q1, None) => Verdict::Fails,
                _ => Verdict::NotApplicable,
            };
            let spectral_mapping = match class {
                SpectrumClass::Q3 => Verdict::from_bool(!sampled.is_degenerate()),
                _ => Verdict::NotApplicable,
            };
            pairs.push(PairReport {
                lambda_i: li,
                lambda_q: lq,
                class,
                multiplicity: mi * mq,
                psi,
                phase,
                magnitude,
                spectral_mapping,
                coefficients: *pc,
                interval: negative_region(pc),
            });
        }
        let phase_condition = pairs.iter().all(|p| p.phase.is_ok());
        let magnitude_condition = pairs.iter().all(|p| p.magnitude.is_ok());
        let spectral_mapping_condition = pairs.iter().all(|p| p.spectral_mapping.is_ok());
        let intersection = intersect_all(pairs.iter().map(|p| p.interval));
        let feasible = phase_condition
            && magnitude_condition
            && spectral_mapping_condition
            && intersection.is_some();
        let suggested_mu = if feasible {
            intersection.map(|(lo, hi)| {
                if hi.is_finite() {
                    0.5 * (lo + hi)
                } else {
                    2.0 * lo + 1.0
                }
            })
        } else {
            None
        };
        Ok(FeasibilityReport {
            h,
            pairs,
            phase_condition,
            magnitude_condition,
            spectral_mapping_condition,
            intersection,
            feasible,
            suggested_mu,
        })
    }

    /// Pointwise feasibility over a grid of sampling periods, sorted by `h`.
    pub fn sweep_h(&self, grid: &[f64]) -> Result<Vec<SweepRow>> {
        for &h in grid {
            check_h(h)?;
        }
        let mut rows = grid
            .par_iter()
            .map(|&h| {
                self.feasibility(h).map(|r| SweepRow {
                    h,
                    feasible: r.feasible,
                    interval: r.intersection,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.sort_by(|a, b| a.h.total_cmp(&b.h));
        Ok(rows)
    }

    /// `max_q Re(lambda_q) / min_i Re(lambda_i)`: the limit of the lower gain
    /// bound as `h -> 0` (the upper bound diverges).
    pub fn gain_lower_limit(&self) -> f64 {
        gain_lower_limit(&self.partition, &self.follower_eigs)
    }

    /// Admissible sampling periods in `(0, h_max]` for a purely oscillatory
    /// leader, from the closed-form inequalities on `|Im(lambda_q)| h`.
    pub fn sinusoidal_intervals(&self, h_max: f64) -> Result<Vec<(f64, f64)>> {
        sinusoidal_intervals(&self.partition, &self.follower_eigs, h_max)
    }
}

pub fn gain_lower_limit(p: &SpectrumPartition, lambda_i: &[Complex64]) -> f64 {
    let max_q = p.eigen.iter().map(|e| e.value.re).fold(f64::NEG_INFINITY, f64::max);
    let min_i = lambda_i.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    max_q / min_i
}

/// Union of open `h`-intervals in `(0, h_max]` where the leader (all of whose
/// eigenvalues are purely imaginary) admits a stabilizing gain.
pub fn sinusoidal_intervals(
    p: &SpectrumPartition,
    lambda_i: &[Complex64],
    h_max: f64,
) -> Result<Vec<(f64, f64)>> {
    check_h(h_max)?;
    if let Some(e) = p.eigen.iter().find(|e| e.class != SpectrumClass::Q3) {
        return Err(Error::WrongSpectrum(format!(
            "eigenvalue {} is classified {:?}",
            e.raw, e.class
        )));
    }
    let thetas: Vec<f64> = lambda_i.iter().map(|z| z.arg()).collect();
    let mut admissible = vec![(0.0, h_max)];
    for e in &p.eigen {
        let b = e.value.im.abs();
        let kappa_max = (b * h_max / (2.0 * PI)).ceil() as i64 + 1;
        let mut per_q = Vec::new();
        for kappa in 1..=kappa_max {
            let k = kappa as f64;
            let mut lo = (2.0 * k - 2.0) * PI;
            let mut hi = 2.0 * k * PI;
            for &t in &thetas {
                lo = lo.max((2.0 * k - 3.0) * PI + 2.0 * t);
                hi = hi.min((2.0 * k - 1.0) * PI + 2.0 * t);
                lo = lo.max((2.0 * k - 3.0) * PI - 2.0 * t);
                hi = hi.min((2.0 * k - 1.0) * PI - 2.0 * t);
            }
            if hi > lo {
                per_q.push((lo / b, hi / b));
            }
        }
        admissible = intersect_sets(&admissible, &per_q);
    }
    Ok(admissible)
}

/// Intersection of two sorted unions of disjoint open intervals.
fn intersect_sets(a: &[(f64, f64)], b: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for &(a0, a1) in a {
        for &(b0, b1) in b {
            let lo = a0.max(b0);
            let hi = a1.min(b1);
            if hi > lo {
                out.push((lo, hi));
            }
        }
    }
    out.sort_by(|x, y| x.0.total_cmp(&y.0));
    out
}

fn check_h(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("sampling period must be positive and finite, got {h}")))
    }
}

fn dedup<T: Copy + PartialEq>(items: impl Iterator<Item = (Complex64, T)>) -> Vec<(Complex64, T, usize)> {
    let mut out: Vec<(Complex64, T, usize)> = Vec::new();
    for (z, tag) in items {
        let scale = z.norm().max(1.0);
        match out
            .iter_mut()
            .find(|(w, t, _)| *t == tag && (*w - z).norm() <= DEDUP_TOL * scale)
        {
            Some(entry) => entry.2 += 1,
            None => out.push((z, tag, 1)),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn example1() -> DesignProblem {
        let leader = LeaderModel::new(DMatrix::from_row_slice(2, 2, &[0.0, 100.0, -100.0, 0.0]))
            .unwrap();
        let g = Digraph::new(3, [(0, 1), (3, 2), (1, 3), (2, 1), (2, 3)]).unwrap();
        DesignProblem::new(&leader, &g).unwrap()
    }

    #[test]
    fn q4_coefficients() {
        assert_eq!(pair_coefficients(c(1.0, 0.0), c(0.0, 0.0), 1.0), (1.0, -2.0, 0.0));
    }

    #[test]
    fn hand_evaluated_pair() {
        let (a, b, g) = pair_coefficients(c(1.0, 0.0), c(1.0, 0.0), 2f64.ln());
        assert!((a - 1.0).abs() < 1e-14);
        assert!((b + 4.0).abs() < 1e-14);
        assert!((g - 3.0).abs() < 1e-14);
        let pc = PairCoefficients { follower: 0, eigen: 0, alpha: a, beta: b, gamma: g, degenerate: false };
        let (lo, hi) = negative_region(&pc).unwrap();
        assert!((lo - 1.0).abs() < 1e-12 && (hi - 3.0).abs() < 1e-12);
    }

    #[test]
    fn q4_interval_matches_limit() {
        let li = c(1.5, 0.4);
        let h = 0.3;
        let (alpha, beta, gamma) = pair_coefficients(li, c(0.0, 0.0), h);
        let pc = PairCoefficients { follower: 0, eigen: 0, alpha, beta, gamma, degenerate: false };
        let (lo, hi) = negative_region(&pc).unwrap();
        assert_eq!(lo, 0.0);
        let expected = 2.0 * li.re / (li.norm_sqr() * h);
        assert!((hi - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn example1_h_point2_feasible() {
        let r = example1().feasibility(0.2).unwrap();
        assert!(r.feasible);
        let (lo, hi) = r.intersection.unwrap();
        assert!(lo.abs() < 1e-6);
        assert!((hi - 50.2333).abs() < 1e-2, "upper endpoint {hi}");
        let mu = r.suggested_mu.unwrap();
        assert!((mu - 0.5 * (lo + hi)).abs() < 1e-12);
    }

    #[test]
    fn example1_exact_spectral_zero() {
        let r = example1().feasibility(2.0 * PI / 100.0).unwrap();
        assert!(!r.feasible);
        assert!(!r.spectral_mapping_condition);
    }

    #[test]
    fn example1_phase_boundary() {
        let d = example1();
        let theta = d.follower_eigenvalues().iter().map(|z| z.arg().abs()).fold(0.0, f64::max);
        let h_star = (PI - 2.0 * theta) / 100.0;
        assert!(d.feasibility(h_star - 1e-7).unwrap().feasible);
        let above = d.feasibility(h_star + 1e-7).unwrap();
        assert!(!above.feasible);
        assert!(!above.phase_condition);
    }

    #[test]
    fn no_spanning_tree_is_rejected() {
        let leader = LeaderModel::new(DMatrix::from_element(1, 1, 0.0)).unwrap();
        let g = Digraph::new(2, [(0, 1)]).unwrap();
        assert!(matches!(
            DesignProblem::new(&leader, &g),
            Err(Error::AssumptionViolated(_))
        ));
    }

    #[test]
    fn q2_and_q4_never_block() {
        let p = SpectrumPartition {
            eigen: vec![
                spectra::classify(c(-0.5, 2.0), 1e-9),
                spectra::classify(c(-0.5, -2.0), 1e-9),
                spectra::classify(c(0.0, 0.0), 1e-9),
            ],
            zero_tolerance: 1e-9,
        };
        let d = DesignProblem::from_parts(p, vec![c(0.3, 0.0), c(2.0, 1.0), c(2.0, -1.0)]).unwrap();
        for &h in &[0.01, 0.3, 1.0, 5.0, 40.0] {
            assert!(d.feasibility(h).unwrap().feasible, "h = {h}");
        }
    }

    #[test]
    fn sweep_edge_cases() {
        let d = example1();
        assert!(d.sweep_h(&[]).unwrap().is_empty());
        let rows = d.sweep_h(&[0.2, 2.0 * PI / 100.0, 0.1]).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.windows(2).all(|w| w[0].h <= w[1].h));
        let pathological = rows.iter().find(|r| (r.h - 2.0 * PI / 100.0).abs() < 1e-15).unwrap();
        assert!(!pathological.feasible);
        assert!(d.sweep_h(&[0.1, -1.0]).is_err());
    }

    #[test]
    fn sinusoidal_unit_frequency_zero_phase() {
        let p = SpectrumPartition {
            eigen: vec![
                spectra::classify(c(0.0, 1.0), 1e-9),
                spectra::classify(c(0.0, -1.0), 1e-9),
            ],
            zero_tolerance: 1e-9,
        };
        let iv = sinusoidal_intervals(&p, &[c(1.0, 0.0)], 3.0).unwrap();
        assert_eq!(iv.len(), 1);
        assert!(iv[0].0.abs() < 1e-15 && (iv[0].1 - 3.0).abs() < 1e-15);
        let iv = sinusoidal_intervals(&p, &[c(1.0, 0.0)], 10.0).unwrap();
        assert!((iv[0].1 - PI).abs() < 1e-12);
        assert!((iv[1].0 - 2.0 * PI).abs() < 1e-12 && (iv[1].1 - 3.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn sinusoidal_rejects_other_classes() {
        let p = SpectrumPartition {
            eigen: vec![spectra::classify(c(1.0, 0.0), 1e-9)],
            zero_tolerance: 1e-9,
        };
        assert!(matches!(
            sinusoidal_intervals(&p, &[c(1.0, 0.0)], 1.0),
            Err(Error::WrongSpectrum(_))
        ));
    }

    #[test]
    fn example1_sinusoidal_membership() {
        let d = example1();
        let iv = d.sinusoidal_intervals(0.5).unwrap();
        let inside = |h: f64| iv.iter().any(|&(a, b)| h > a && h < b);
        assert!(inside(0.2));
        assert!(!inside(2.0 * PI / 100.0));
    }

    #[test]
    fn gain_lower_limit_sign() {
        let p = SpectrumPartition {
            eigen: vec![spectra::classify(c(-1.0, 0.0), 1e-9), spectra::classify(c(0.0, 2.0), 1e-9)],
            zero_tolerance: 1e-9,
        };
        assert!(gain_lower_limit(&p, &[c(1.0, 0.0)]) <= 0.0);
    }
}
