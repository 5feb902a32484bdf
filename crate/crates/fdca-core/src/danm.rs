//! Decoupled atomic-norm interpolation: a single ADMM solve with constant
//! identity-scaled weights.
//!
//! With `Wp = Wf = I / (4L)` the engine objective reduces to the trace
//! program `(1/2L)(tr T(z_p) + tr T(z_f)) + mu ||Xv ∘ B - Xt||_F^2` over the
//! PSD block constraint, so hole interpolation is a special case of the
//! cyclic solver with the weights frozen.

use num_complex::Complex;

use crate::admm::{admm_solve, AdmmConfig, AdmmState};
use crate::array_model::{frequency_steering, spatial_steering, CoprimeLayout};
use crate::coarray::VirtualSignal;
use crate::error::Result;
use crate::sdp_core::ToeplitzVec;
use crate::spectral::EstimateSet;
use crate::{CMat, CVec};

/// DANM parameters; `mu` is the data-fit weight of the trace program.
#[derive(Debug, Clone)]
pub struct DanmConfig {
    pub mu: f64,
    pub admm: AdmmConfig,
}

impl Default for DanmConfig {
    fn default() -> Self {
        Self { mu: 50.0, admm: AdmmConfig::default() }
    }
}

/// Interpolated coarray matrix with its Toeplitz factors and solver info.
#[derive(Debug, Clone)]
pub struct DanmSolution {
    pub xv: CMat,
    pub z_p: ToeplitzVec,
    pub z_f: ToeplitzVec,
    pub iterations: usize,
    pub converged: bool,
}

/// Solves the decoupled trace program and returns the hole-filled matrix.
pub fn solve_danm(vs: &VirtualSignal, cfg: &DanmConfig) -> Result<DanmSolution> {
    let state = solve_danm_state(vs, cfg)?;
    Ok(DanmSolution {
        xv: state.xv.clone(),
        z_p: state.z_p.clone(),
        z_f: state.z_f.clone(),
        iterations: state.iter,
        converged: state.converged,
    })
}

/// Same as [`solve_danm`] but exposes the full ADMM state (tests and
/// warm-start experiments).
pub fn solve_danm_state(vs: &VirtualSignal, cfg: &DanmConfig) -> Result<AdmmState> {
    let n = vs.dim();
    let l = (n - 1) / 2;
    let w = CMat::identity(n, n).scale(1.0 / (4.0 * l as f64));
    let admm_cfg = AdmmConfig { mu: cfg.mu, ..cfg.admm.clone() };
    admm_solve(&w, &w, vs, &admm_cfg, None)
}

/// Atom `G(theta, r) = a_p(theta) a_f(r)^H` over the full lag manifold.
pub fn atom(layout: &CoprimeLayout, theta_deg: f64, range_m: f64) -> CMat {
    let l = layout.aperture_l() as i64;
    let lags: Vec<i64> = (-l..=l).collect();
    let ap = spatial_steering(theta_deg, &lags);
    let af = frequency_steering(layout, range_m, &lags);
    let mut g = CMat::zeros(lags.len(), lags.len());
    g.gerc(Complex::new(1.0, 0.0), &ap, &af, Complex::new(1.0, 0.0));
    g
}

/// Diagnostic: relative residual of `Xv` against the least-squares
/// combination of atoms at the given estimates.
pub fn atoms_check(xv_full: &CMat, layout: &CoprimeLayout, estimates: &EstimateSet) -> f64 {
    let k = estimates.estimates.len();
    let n2 = xv_full.nrows() * xv_full.ncols();
    if k == 0 {
        return 1.0;
    }
    let mut phi = CMat::zeros(n2, k);
    for (col, est) in estimates.estimates.iter().enumerate() {
        let g = atom(layout, est.theta_deg, est.range_m);
        for (idx, val) in g.iter().enumerate() {
            phi[(idx, col)] = *val;
        }
    }
    let x = CVec::from_iterator(n2, xv_full.iter().copied());
    // powers are real: solve Re(Phi^H Phi) p = Re(Phi^H x)
    let gram = phi.adjoint() * &phi;
    let rhs = phi.adjoint() * &x;
    let gram_re = nalgebra::DMatrix::<f64>::from_fn(k, k, |i, j| gram[(i, j)].re);
    let rhs_re = nalgebra::DVector::<f64>::from_fn(k, |i, _| rhs[i].re);
    let p = match gram_re.lu().solve(&rhs_re) {
        Some(p) => p,
        None => return 1.0,
    };
    let mut recon = CVec::zeros(n2);
    for col in 0..k {
        recon += phi.column(col).scale(p[col]);
    }
    (x - recon).norm() / xv_full.norm().max(1e-300)
}
