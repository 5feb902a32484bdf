//! Coarray Cramér-Rao bound for the joint parameter vector
//! `[theta_1..theta_K, r_1..r_K, p_1..p_K, sigma_n^2]`.
//!
//! The Fisher information is evaluated on the vectorized exact covariance
//! through the trace identity `J_ij = T tr[R^{-1} dR_i R^{-1} dR_j]`, which
//! avoids forming the `(M+N-1)^4` Kronecker inverse. Angles are
//! differentiated in radians internally; reported DoA bounds are converted
//! to degrees squared.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::array_model::{CoprimeLayout, TargetScene};
use crate::error::{Error, Result};
use crate::sdp_core::eigh;
use crate::{CMat, CVec};

/// Fisher information and the per-target variance bounds drawn from it.
#[derive(Debug, Clone)]
pub struct FimResult {
    /// Real symmetric `(3K+1) x (3K+1)` information matrix.
    pub fim: DMatrix<f64>,
    /// Per-target DoA bound in degrees squared.
    pub crb_theta: Vec<f64>,
    /// Per-target range bound in meters squared.
    pub crb_range: Vec<f64>,
    /// Set when the FIM needed a pseudo-inverse (condition number > 1e12).
    pub singular: bool,
}

fn spatial_steering_derivative(theta_deg: f64, indices: &[i64]) -> CVec {
    let theta = theta_deg.to_radians();
    let (st, ct) = (theta.sin(), theta.cos());
    CVec::from_iterator(
        indices.len(),
        indices.iter().map(|&s| {
            let phase = -std::f64::consts::PI * s as f64 * st;
            // d/dtheta exp(-j pi s sin th) = -j pi s cos th * exp(...)
            Complex::from_polar(1.0, phase)
                * Complex::new(0.0, -std::f64::consts::PI * s as f64 * ct)
        }),
    )
}

fn frequency_steering_derivative(layout: &CoprimeLayout, range_m: f64, indices: &[i64]) -> CVec {
    let k = 4.0 * std::f64::consts::PI * layout.unit_offset_df / layout.speed_of_light;
    CVec::from_iterator(
        indices.len(),
        indices.iter().map(|&s| {
            Complex::from_polar(1.0, k * s as f64 * range_m) * Complex::new(0.0, k * s as f64)
        }),
    )
}

/// Derivative of the exact covariance with respect to each parameter, in the
/// order `theta_1..theta_K, r_1..r_K, p_1..p_K, sigma_n^2`.
pub fn covariance_derivatives(layout: &CoprimeLayout, scene: &TargetScene) -> Vec<CMat> {
    let dim = layout.joint_dim();
    let k = scene.targets.len();
    let s = &layout.integer_set;
    let mut out = Vec::with_capacity(3 * k + 1);
    let one = Complex::new(1.0, 0.0);

    let steering = |t: &crate::array_model::Target| {
        let hp = crate::array_model::spatial_steering(t.theta_deg, s);
        let hf = crate::array_model::frequency_steering(layout, t.range_m, s);
        (hp.clone(), hf.clone(), hp.kronecker(&hf))
    };

    for t in &scene.targets {
        let (_, hf, h) = steering(t);
        let dh = spatial_steering_derivative(t.theta_deg, s).kronecker(&hf);
        let mut m = CMat::zeros(dim, dim);
        m.gerc(Complex::new(t.power, 0.0), &dh, &h, one);
        m.gerc(Complex::new(t.power, 0.0), &h, &dh, one);
        out.push(m);
    }
    for t in &scene.targets {
        let (hp, _, h) = steering(t);
        let dh = hp.kronecker(&frequency_steering_derivative(layout, t.range_m, s));
        let mut m = CMat::zeros(dim, dim);
        m.gerc(Complex::new(t.power, 0.0), &dh, &h, one);
        m.gerc(Complex::new(t.power, 0.0), &h, &dh, one);
        out.push(m);
    }
    for t in &scene.targets {
        let (_, _, h) = steering(t);
        let mut m = CMat::zeros(dim, dim);
        m.gerc(one, &h, &h, one);
        out.push(m);
    }
    out.push(CMat::identity(dim, dim));
    out
}

/// Fisher information of the coarray (vectorized covariance) model.
pub fn coarray_fim(layout: &CoprimeLayout, scene: &TargetScene) -> Result<FimResult> {
    if scene.noise_power <= 0.0 {
        return Err(Error::SingularCovariance);
    }
    let rx = crate::array_model::theoretical_covariance(layout, scene)?.r_hat;
    let dim = rx.nrows();
    let (vals, vecs) = eigh(&rx);
    let lmin = *vals.last().unwrap();
    if lmin <= 0.0 {
        return Err(Error::SingularCovariance);
    }
    let mut rinv = CMat::zeros(dim, dim);
    for (idx, &v) in vals.iter().enumerate() {
        let u = vecs.column(idx);
        rinv.gerc(Complex::new(1.0 / v, 0.0), &u, &u, Complex::new(1.0, 0.0));
    }

    let derivs = covariance_derivatives(layout, scene);
    let n_par = derivs.len();
    let products: Vec<CMat> = derivs.iter().map(|u| &rinv * u).collect();

    let t_factor = scene.snapshots as f64;
    let mut fim = DMatrix::<f64>::zeros(n_par, n_par);
    for i in 0..n_par {
        for j in i..n_par {
            // tr(V_i V_j) without forming the product
            let mut acc = Complex::new(0.0, 0.0);
            for a in 0..dim {
                for b in 0..dim {
                    acc += products[i][(a, b)] * products[j][(b, a)];
                }
            }
            let v = t_factor * acc.re;
            fim[(i, j)] = v;
            fim[(j, i)] = v;
        }
    }

    let k = scene.targets.len();
    let (inv, singular) = sym_inverse_with_flag(&fim);
    let rad2_to_deg2 = (180.0 / std::f64::consts::PI).powi(2);
    let crb_theta = (0..k).map(|i| inv[(i, i)] * rad2_to_deg2).collect();
    let crb_range = (0..k).map(|i| inv[(k + i, k + i)]).collect();
    Ok(FimResult { fim, crb_theta, crb_range, singular })
}

/// Inverse of a real symmetric matrix through its eigendecomposition;
/// eigenvalues below `1e-12 lambda_max` are pseudo-inverted and flagged.
fn sym_inverse_with_flag(a: &DMatrix<f64>) -> (DMatrix<f64>, bool) {
    let n = a.nrows();
    let complex = CMat::from_fn(n, n, |i, j| Complex::new(a[(i, j)], 0.0));
    let (vals, vecs) = eigh(&complex);
    let lmax = vals[0].abs().max(1e-300);
    let mut singular = false;
    let mut inv = CMat::zeros(n, n);
    for (idx, &v) in vals.iter().enumerate() {
        if v.abs() <= 1e-12 * lmax {
            singular = true;
            continue;
        }
        let u = vecs.column(idx);
        inv.gerc(Complex::new(1.0 / v, 0.0), &u, &u, Complex::new(1.0, 0.0));
    }
    (DMatrix::from_fn(n, n, |i, j| inv[(i, j)].re), singular)
}

/// Per-target bounds from a nonsingular FIM; errors when the information
/// matrix required a pseudo-inverse.
pub fn crb_values(fim: &FimResult, k: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if fim.singular {
        return Err(Error::SingularFim);
    }
    debug_assert_eq!(fim.crb_theta.len(), k);
    Ok((fim.crb_theta.clone(), fim.crb_range.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array_model::{build_coprime_layout, theoretical_covariance, Target, TargetScene};
    use approx::assert_relative_eq;

    fn layout35() -> CoprimeLayout {
        build_coprime_layout(3, 5, 0.015, 10.0e9, 30.0e3).unwrap()
    }

    fn scene(targets: Vec<Target>, noise: f64, t: usize) -> TargetScene {
        TargetScene::new(targets, noise, t, 0).unwrap()
    }

    #[test]
    fn noise_derivative_is_identity() {
        let l = layout35();
        let sc = scene(vec![Target { theta_deg: 10.0, range_m: 800.0, power: 1.0 }], 0.1, 10);
        let derivs = covariance_derivatives(&l, &sc);
        let eye = CMat::identity(49, 49);
        assert_eq!(derivs.last().unwrap(), &eye);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let l = layout35();
        let base = scene(
            vec![
                Target { theta_deg: 22.0, range_m: 1700.0, power: 1.2 },
                Target { theta_deg: -31.0, range_m: 3600.0, power: 0.8 },
            ],
            0.3,
            10,
        );
        let derivs = covariance_derivatives(&l, &base);
        let r_of = |sc: &TargetScene| theoretical_covariance(&l, sc).unwrap().r_hat;

        for k in 0..2 {
            let h = 1e-7f64;
            let mut plus = base.clone();
            plus.targets[k].theta_deg += h.to_degrees();
            let mut minus = base.clone();
            minus.targets[k].theta_deg -= h.to_degrees();
            let fd = (r_of(&plus) - r_of(&minus)).scale(1.0 / (2.0 * h));
            let rel = (&fd - &derivs[k]).norm() / derivs[k].norm();
            assert!(rel < 1e-5, "theta_{k} derivative rel err {rel}");

            let h = 1e-3;
            let mut plus = base.clone();
            plus.targets[k].range_m += h;
            let mut minus = base.clone();
            minus.targets[k].range_m -= h;
            let fd = (r_of(&plus) - r_of(&minus)).scale(1.0 / (2.0 * h));
            let rel = (&fd - &derivs[2 + k]).norm() / derivs[2 + k].norm();
            assert!(rel < 1e-5, "range_{k} derivative rel err {rel}");

            let h = 1e-6;
            let mut plus = base.clone();
            plus.targets[k].power += h;
            let mut minus = base.clone();
            minus.targets[k].power -= h;
            let fd = (r_of(&plus) - r_of(&minus)).scale(1.0 / (2.0 * h));
            let rel = (&fd - &derivs[4 + k]).norm() / derivs[4 + k].norm();
            assert!(rel < 1e-5, "power_{k} derivative rel err {rel}");
        }
    }

    #[test]
    fn fim_scales_exactly_with_snapshots() {
        let l = layout35();
        let s1 = scene(vec![Target { theta_deg: 30.0, range_m: 2500.0, power: 1.0 }], 0.1, 100);
        let s2 = TargetScene { snapshots: 200, ..s1.clone() };
        let f1 = coarray_fim(&l, &s1).unwrap();
        let f2 = coarray_fim(&l, &s2).unwrap();
        let diff = (&f2.fim - &f1.fim.scale(2.0)).norm();
        assert!(diff < 1e-9 * f1.fim.norm(), "FIM did not double exactly");
        for (a, b) in f1.crb_theta.iter().zip(&f2.crb_theta) {
            assert_relative_eq!(a / b, 2.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn diagonal_fim_inverts_entrywise() {
        let fim = FimResult {
            fim: DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![4.0, 9.0, 16.0, 25.0])),
            crb_theta: vec![0.25 * (180.0f64 / std::f64::consts::PI).powi(2)],
            crb_range: vec![1.0 / 9.0],
            singular: false,
        };
        let (t, r) = crb_values(&fim, 1).unwrap();
        assert_relative_eq!(t[0], 0.25 * (180.0f64 / std::f64::consts::PI).powi(2));
        assert_relative_eq!(r[0], 1.0 / 9.0);
    }

    #[test]
    fn crb_decreases_with_snr() {
        let l = layout35();
        let mut prev = f64::INFINITY;
        for snr_db in [0.0, 10.0, 20.0, 30.0] {
            let noise = TargetScene::noise_power_for_snr(1.0, snr_db);
            let sc =
                scene(vec![Target { theta_deg: 30.0, range_m: 2500.0, power: 1.0 }], noise, 200);
            let f = coarray_fim(&l, &sc).unwrap();
            assert!(!f.singular);
            let bound = f.crb_theta[0].sqrt();
            assert!(bound < prev, "sqrt CRB(theta) not decreasing at {snr_db} dB");
            prev = bound;
        }
    }

    #[test]
    fn crb_invariant_to_target_relabeling() {
        let l = layout35();
        let t1 = Target { theta_deg: 10.0, range_m: 1500.0, power: 1.0 };
        let t2 = Target { theta_deg: -25.0, range_m: 3300.0, power: 0.7 };
        let fa = coarray_fim(&l, &scene(vec![t1, t2], 0.2, 64)).unwrap();
        let fb = coarray_fim(&l, &scene(vec![t2, t1], 0.2, 64)).unwrap();
        assert_relative_eq!(fa.crb_theta[0], fb.crb_theta[1], max_relative = 1e-9);
        assert_relative_eq!(fa.crb_theta[1], fb.crb_theta[0], max_relative = 1e-9);
        assert_relative_eq!(fa.crb_range[0], fb.crb_range[1], max_relative = 1e-9);
    }

    #[test]
    fn fim_is_symmetric_psd() {
        let l = layout35();
        let sc = scene(
            vec![
                Target { theta_deg: 5.0, range_m: 700.0, power: 1.0 },
                Target { theta_deg: 48.0, range_m: 4200.0, power: 1.5 },
            ],
            0.5,
            32,
        );
        let f = coarray_fim(&l, &sc).unwrap();
        assert!((&f.fim - f.fim.transpose()).norm() < 1e-9 * f.fim.norm());
        let n = f.fim.nrows();
        let c = CMat::from_fn(n, n, |i, j| Complex::new(f.fim[(i, j)], 0.0));
        let (vals, _) = eigh(&c);
        assert!(vals.iter().all(|&v| v > -1e-9 * vals[0].max(1.0)));
    }

    #[test]
    fn zero_noise_rejected() {
        let l = layout35();
        let sc = scene(vec![Target { theta_deg: 0.0, range_m: 100.0, power: 1.0 }], 0.0, 8);
        assert!(matches!(coarray_fim(&l, &sc), Err(Error::SingularCovariance)));
    }

    #[test]
    fn singular_fim_yields_no_bounds() {
        let flagged = FimResult {
            fim: DMatrix::identity(4, 4),
            crb_theta: vec![1.0],
            crb_range: vec![1.0],
            singular: true,
        };
        assert!(matches!(crb_values(&flagged, 1), Err(Error::SingularFim)));
    }
}
