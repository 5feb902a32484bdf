//! 2D spatial smoothing of a fully observed coarray block, 2D MUSIC
//! spectrum evaluation, and peak extraction.
//!
//! Smoothing windows. For shifts `(s1, s2)` in `{0..V}^2` the window vector
//! holds the block entries at lag pairs `(a - s1, s2 - b)`, `a, b` in
//! `{0..V}`, flattened spatial-major. With the lag-domain convention of
//! [`crate::coarray`] every window is then a unit-modulus scalar (in general
//! a diagonal) modulation of the `(0,0)` window, and the smoothed covariance
//! `R_ss = (V+1)^{-2} sum w w^H` has the manifold `a_p(theta) ⊗ a_f(r)` with
//! per-axis entries `exp(-j pi v sin theta)` and `exp(+j 4 pi v df r / c)`.
//!
//! Spectrum evaluation sums the noise projector over its lag-difference
//! autocorrelation, which turns the scan into two small matrix products
//! instead of a projector quadratic form per grid point.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::array_model::{frequency_steering, spatial_steering, CoprimeLayout};
use crate::coarray::VirtualSignal;
use crate::error::{Error, Result};
use crate::{CMat, CVec};

/// Spatially smoothed coarray covariance over `(V+1)^2` windows.
#[derive(Debug, Clone)]
pub struct SmoothedCovariance {
    pub r_ss: CMat,
    pub window_v: usize,
}

/// Smooths the central `(2V+1)^2` block of the virtual signal.
///
/// Errors if any lag pair in the block is a hole; callers either restrict to
/// the consecutive part (`v = U`) or interpolate first (`v = L`).
pub fn spatial_smooth_2d(vs: &VirtualSignal, v: usize) -> Result<SmoothedCovariance> {
    let l = vs.aperture_l;
    if v > l {
        return Err(Error::ShapeMismatch {
            expected: format!("window V <= L = {l}"),
            got: format!("V = {v}"),
        });
    }
    let at = |l1: i64, l2: i64| ((l as i64 + l1) as usize, (l as i64 + l2) as usize);
    for l1 in -(v as i64)..=v as i64 {
        for l2 in -(v as i64)..=v as i64 {
            if vs.mask_b[at(l1, l2)] == 0.0 {
                return Err(Error::InvalidScene(format!(
                    "lag pair ({l1}, {l2}) is a hole; interpolate or restrict to the consecutive part"
                )));
            }
        }
    }

    let m = v + 1;
    let dim = m * m;
    let mut r_ss = CMat::zeros(dim, dim);
    let mut w = CVec::zeros(dim);
    for s1 in 0..m as i64 {
        for s2 in 0..m as i64 {
            for a in 0..m as i64 {
                for b in 0..m as i64 {
                    let idx = (a as usize) * m + b as usize;
                    w[idx] = vs.xv[at(a - s1, s2 - b)];
                }
            }
            r_ss.gerc(Complex::new(1.0, 0.0), &w, &w, Complex::new(1.0, 0.0));
        }
    }
    r_ss.scale_mut(1.0 / (m * m) as f64);
    let rh = r_ss.adjoint();
    Ok(SmoothedCovariance { r_ss: (r_ss + rh).scale(0.5), window_v: v })
}

/// Noise-subspace projector of a smoothed covariance for a known source count.
#[derive(Debug, Clone)]
pub struct NoiseSubspace {
    pub projector: CMat,
    pub window_v: usize,
}

pub fn noise_subspace(rss: &SmoothedCovariance, k: usize) -> Result<NoiseSubspace> {
    let dim = rss.r_ss.nrows();
    if k >= dim {
        return Err(Error::Subspace { k, max: dim - 1 });
    }
    let (_, vecs) = crate::sdp_core::eigh(&rss.r_ss);
    // eigh sorts descending; the noise subspace is the trailing dim - k columns
    let mut projector = CMat::zeros(dim, dim);
    for idx in k..dim {
        let u = vecs.column(idx);
        projector.gerc(Complex::new(1.0, 0.0), &u, &u, Complex::new(1.0, 0.0));
    }
    let ph = projector.adjoint();
    Ok(NoiseSubspace { projector: (projector + ph).scale(0.5), window_v: rss.window_v })
}

impl NoiseSubspace {
    /// Smoothed-manifold steering `a_p(theta) ⊗ a_f(r)`, `v` in `{0..V}`.
    pub fn steering(&self, layout: &CoprimeLayout, theta_deg: f64, range_m: f64) -> CVec {
        let indices: Vec<i64> = (0..=self.window_v as i64).collect();
        let ap = spatial_steering(theta_deg, &indices);
        let af = frequency_steering(layout, range_m, &indices);
        ap.kronecker(&af)
    }

    /// MUSIC denominator `a^H P_N a`, normalized by `||a||^2`.
    pub fn denominator(&self, layout: &CoprimeLayout, theta_deg: f64, range_m: f64) -> f64 {
        let a = self.steering(layout, theta_deg, range_m);
        let pa = &self.projector * &a;
        (a.dotc(&pa)).re / a.norm_squared()
    }

    /// Lag-difference autocorrelation of the projector: coefficient matrix
    /// `S` with `denom = sum S[d1, d2] e^{j pi d1 sin th} e^{-j 4 pi d2 df r / c}`.
    fn autocorrelation(&self) -> CMat {
        let m = self.window_v + 1;
        let side = 2 * self.window_v + 1;
        let mut s = CMat::zeros(side, side);
        for a in 0..m {
            for b in 0..m {
                let row = a * m + b;
                for ap in 0..m {
                    for bp in 0..m {
                        let d1 = a as i64 - ap as i64 + self.window_v as i64;
                        let d2 = b as i64 - bp as i64 + self.window_v as i64;
                        s[(d1 as usize, d2 as usize)] += self.projector[(row, ap * m + bp)];
                    }
                }
            }
        }
        s
    }
}

/// 2D MUSIC pseudospectrum over rectangular grids.
#[derive(Debug, Clone)]
pub struct Spectrum2D {
    pub theta_grid: Vec<f64>,
    pub range_grid: Vec<f64>,
    /// `theta` along rows, `range` along columns.
    pub values: DMatrix<f64>,
}

/// Evaluates `1 / (a^H U_N U_N^H a)` over the grid.
pub fn music_spectrum_2d(
    rss: &SmoothedCovariance,
    k: usize,
    theta_grid: &[f64],
    range_grid: &[f64],
    layout: &CoprimeLayout,
) -> Result<Spectrum2D> {
    if theta_grid.is_empty() || range_grid.is_empty() {
        return Err(Error::Config("spectrum grids must be nonempty".into()));
    }
    let ns = noise_subspace(rss, k)?;
    let v = ns.window_v as i64;
    let s = ns.autocorrelation();
    let side = (2 * v + 1) as usize;

    // F[d2, j] = e^{-j 4 pi (d2 - V) df r_j / c}
    let kf = 4.0 * std::f64::consts::PI * layout.unit_offset_df / layout.speed_of_light;
    let f = CMat::from_fn(side, range_grid.len(), |d2, j| {
        Complex::from_polar(1.0, -kf * (d2 as i64 - v) as f64 * range_grid[j])
    });
    // E[i, d1] = e^{j pi (d1 - V) sin theta_i}
    let e = CMat::from_fn(theta_grid.len(), side, |i, d1| {
        Complex::from_polar(
            1.0,
            std::f64::consts::PI * (d1 as i64 - v) as f64 * theta_grid[i].to_radians().sin(),
        )
    });
    let denom = e * s * f;

    let norm = ((v + 1) * (v + 1)) as f64;
    let values = DMatrix::from_fn(theta_grid.len(), range_grid.len(), |i, j| {
        1.0 / (denom[(i, j)].re / norm).max(1e-18)
    });
    Ok(Spectrum2D { theta_grid: theta_grid.to_vec(), range_grid: range_grid.to_vec(), values })
}

/// One extracted spectral peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub theta_deg: f64,
    pub range_m: f64,
    pub peak_value: f64,
}

/// The `K` largest strict local maxima, sorted by peak value descending.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateSet {
    pub estimates: Vec<Estimate>,
}

/// Extracts the `K` largest 8-neighborhood strict local maxima, optionally
/// refining each by a separable parabolic fit of the reciprocal surface
/// (the MUSIC denominator is locally quadratic around a peak).
pub fn pick_peaks(spectrum: &Spectrum2D, k: usize, refine: bool) -> Result<EstimateSet> {
    let (rows, cols) = spectrum.values.shape();
    let mut maxima: Vec<(f64, usize, usize)> = Vec::new();
    for i in 1..rows.saturating_sub(1) {
        for j in 1..cols.saturating_sub(1) {
            let v = spectrum.values[(i, j)];
            let mut strict = true;
            'hood: for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let n = spectrum.values[((i as i64 + di) as usize, (j as i64 + dj) as usize)];
                    if n >= v {
                        strict = false;
                        break 'hood;
                    }
                }
            }
            if strict {
                maxima.push((v, i, j));
            }
        }
    }
    if maxima.len() < k {
        return Err(Error::UnderResolved { found: maxima.len(), needed: k });
    }
    maxima.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    maxima.truncate(k);

    let estimates = maxima
        .into_iter()
        .map(|(value, i, j)| {
            let theta = refine_axis(&spectrum.theta_grid, i, refine, |idx| {
                1.0 / spectrum.values[(idx, j)]
            });
            let range = refine_axis(&spectrum.range_grid, j, refine, |idx| {
                1.0 / spectrum.values[(i, idx)]
            });
            Estimate { theta_deg: theta, range_m: range, peak_value: value }
        })
        .collect();
    Ok(EstimateSet { estimates })
}

fn refine_axis(grid: &[f64], idx: usize, refine: bool, g: impl Fn(usize) -> f64) -> f64 {
    if !refine || idx == 0 || idx + 1 >= grid.len() {
        return grid[idx];
    }
    let (gm, g0, gp) = (g(idx - 1), g(idx), g(idx + 1));
    let curv = gm - 2.0 * g0 + gp;
    if curv <= 0.0 {
        return grid[idx];
    }
    let delta = ((gm - gp) / (2.0 * curv)).clamp(-0.5, 0.5);
    let step = grid[1] - grid[0];
    grid[idx] + delta * step
}

/// Uniform grid helper: `start..stop` (exclusive) with the given step.
pub fn uniform_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut idx = 0usize;
    loop {
        let x = start + idx as f64 * step;
        if x >= stop - 1e-12 {
            break;
        }
        out.push(x);
        idx += 1;
    }
    out
}
