mod common;

use coopreg::regulation::{self, FollowerModel};
use coopreg::spectra;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

use common::*;

fn random_matrix(r: &mut rand_chacha::ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| r.gen_range(-scale..scale))
}

fn flatten(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(m.as_slice())
}

#[test]
fn expm_matches_rk4() {
    for seed in 0..40 {
        let mut r = rng(seed);
        let a = random_matrix(&mut r, 4, 4, 0.6);
        let t = r.gen_range(0.1..2.0);
        let e = spectra::expm(&(&a * t)).unwrap();
        for j in 0..4 {
            let x0 = DVector::from_fn(4, |i, _| if i == j { 1.0 } else { 0.0 });
            let col = rk4(|_, x| &a * x, x0, 0.0, t, 4000);
            let err = (&col - e.column(j)).amax();
            assert!(err < 1e-10, "seed {seed}, column {j}: {err:e}");
        }
    }
}

#[test]
fn zoh_integral_matches_joint_integration() {
    for seed in 0..30 {
        let mut r = rng(100 + seed);
        let n = r.gen_range(1..=4);
        let s = random_leader(&mut r, n);
        let n = s.nrows();
        let h = r.gen_range(0.05..1.0);
        let psi = spectra::zoh_integral(&s, h).unwrap();
        // d/dt [Phi; Psi] = [S Phi; Phi] from [I; 0]
        let mut z0 = DVector::zeros(2 * n * n);
        z0.rows_mut(0, n * n).copy_from(&flatten(&DMatrix::identity(n, n)));
        let z = rk4(
            |_, z| {
                let phi = DMatrix::from_column_slice(n, n, z.rows(0, n * n).as_slice());
                let mut dz = DVector::zeros(2 * n * n);
                dz.rows_mut(0, n * n).copy_from(&flatten(&(&s * &phi)));
                dz.rows_mut(n * n, n * n).copy_from(&flatten(&phi));
                dz
            },
            z0,
            0.0,
            h,
            4000,
        );
        let oracle = DMatrix::from_column_slice(n, n, z.rows(n * n, n * n).as_slice());
        let err = (&oracle - &psi).amax();
        assert!(err < 1e-10 * psi.amax().max(1.0), "seed {seed}: {err:e}");
    }
}

#[test]
fn discretized_follower_matches_rk4() {
    let mut checked = 0;
    for seed in 0..40 {
        let mut r = rng(200 + seed);
        let n = r.gen_range(1..=4);
        let m = r.gen_range(1..=2);
        let a = random_matrix(&mut r, n, n, 1.0) - DMatrix::identity(n, n) * 1.5;
        if !coopreg::linalg::is_hurwitz(&a).unwrap() {
            continue;
        }
        let b = random_matrix(&mut r, n, m, 1.0);
        let period = r.gen_range(0.01..0.5);
        let (ad, bd) = regulation::discretize_follower(&a, &b, period).unwrap();
        for j in 0..n {
            let x0 = DVector::from_fn(n, |i, _| if i == j { 1.0 } else { 0.0 });
            let col = rk4(|_, x| &a * x, x0, 0.0, period, 2000);
            assert!((&col - ad.column(j)).amax() < 1e-10, "seed {seed}");
        }
        for j in 0..m {
            let u = DVector::from_fn(m, |i, _| if i == j { 1.0 } else { 0.0 });
            let col = rk4(|_, x| &a * x + &b * &u, DVector::zeros(n), 0.0, period, 2000);
            assert!((&col - bd.column(j)).amax() < 1e-10, "seed {seed}");
        }
        checked += 1;
    }
    assert!(checked >= 20);
}

#[test]
fn discretization_closed_forms() {
    let b = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
    let t = 0.05;
    let (ad, bd) = regulation::discretize_follower(&DMatrix::zeros(2, 2), &b, t).unwrap();
    assert!((ad - DMatrix::<f64>::identity(2, 2)).amax() < 1e-15);
    assert!((bd - &b * t).amax() < 1e-15);
    let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
    let (ad, bd) = regulation::discretize_follower(&a, &b, t).unwrap();
    assert!((ad - DMatrix::from_row_slice(2, 2, &[1.0, t, 0.0, 1.0])).amax() < 1e-15);
    assert!((bd - DMatrix::from_row_slice(2, 1, &[t * t / 2.0, t])).amax() < 1e-15);
    assert!(regulation::discretize_follower(&a, &b, 0.0).is_err());
}

#[test]
fn regulator_construct_then_solve() {
    for seed in 0..200 {
        let mut r = rng(300 + seed);
        let n = r.gen_range(1..=4);
        let ni = r.gen_range(1..=4);
        let mi = r.gen_range(1..=3);
        let li = r.gen_range(1..=mi);
        let s = random_leader(&mut r, n);
        let n = s.nrows();
        let a = random_matrix(&mut r, ni, ni, 1.0);
        let b = random_matrix(&mut r, ni, mi, 1.0);
        let c = random_matrix(&mut r, li, ni, 1.0);
        let d = random_matrix(&mut r, li, mi, 1.0);
        let x = random_matrix(&mut r, ni, n, 2.0);
        let u = random_matrix(&mut r, mi, n, 2.0);
        let p = &x * &s - &a * &x - &b * &u;
        let f = -(&c * &x) - &d * &u;
        let model = FollowerModel::new(a, b, c, d, p, f, n).unwrap();
        let sol = regulation::solve_regulator(&model, &s).unwrap();
        let scale = model.p.norm().max(model.f.norm()).max(1.0);
        assert!(sol.residual_state < 1e-10 * scale, "seed {seed}: {:e}", sol.residual_state);
        assert!(sol.residual_output < 1e-10 * scale, "seed {seed}: {:e}", sol.residual_output);
        let recomputed = (&sol.x * &s - &model.a * &sol.x - &model.b * &sol.u - &model.p).norm();
        assert!(recomputed < 1e-10 * scale);
    }
}

/// With `eta_tilde` frozen over one controller period, the exact closed loop
/// lands on the sampled-data recursion.
#[test]
fn sampled_closed_loop_one_step() {
    for seed in 0..40 {
        let mut r = rng(400 + seed);
        let ni = r.gen_range(1..=3);
        let n = r.gen_range(1..=3);
        let s = random_matrix(&mut r, n, n, 1.0);
        let a = random_matrix(&mut r, ni, ni, 1.0);
        let b = random_matrix(&mut r, ni, ni, 1.0) + DMatrix::identity(ni, ni) * 3.0;
        let x_reg = random_matrix(&mut r, ni, n, 1.0);
        let u_reg = b.clone().try_inverse().unwrap() * (&x_reg * &s - &a * &x_reg);
        let k = random_matrix(&mut r, ni, ni, 1.0);
        let period = r.gen_range(0.01..0.3);

        let x0 = DVector::from_fn(ni, |_, _| r.gen_range(-1.0..1.0));
        let v0 = DVector::from_fn(n, |_, _| r.gen_range(-1.0..1.0));
        let eta_tilde = DVector::from_fn(n, |_, _| r.gen_range(-0.5..0.5));
        let delta_hat = DVector::from_fn(ni, |_, _| r.gen_range(-1.0..1.0));

        let x_tilde0 = &x0 - &x_reg * &v0;
        let delta = &x0 - &x_reg * (&v0 + &eta_tilde);
        let delta_tilde = &delta_hat - &delta;

        let held = &k * &delta_hat;
        let mut z0 = DVector::zeros(ni + n);
        z0.rows_mut(0, ni).copy_from(&x0);
        z0.rows_mut(ni, n).copy_from(&v0);
        let z = rk4(
            |_, z| {
                let x = z.rows(0, ni).into_owned();
                let v = z.rows(ni, n).into_owned();
                let mut dz = DVector::zeros(ni + n);
                dz.rows_mut(0, ni).copy_from(&(&a * x + &b * (&held + &u_reg * (&v + &eta_tilde))));
                dz.rows_mut(ni, n).copy_from(&(&s * v));
                dz
            },
            z0,
            0.0,
            period,
            2000,
        );
        let x_tilde_t = z.rows(0, ni) - &x_reg * z.rows(ni, n);

        let (ad, bd) = regulation::discretize_follower(&a, &b, period).unwrap();
        let predicted = (&ad + &bd * &k) * &x_tilde0
            + &bd * &k * (&delta_tilde - &x_reg * &eta_tilde)
            + &bd * &u_reg * &eta_tilde;
        let err = (&x_tilde_t - &predicted).amax();
        assert!(err < 1e-8, "seed {seed}: {err:e}");
    }
}
