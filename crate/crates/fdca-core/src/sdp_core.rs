//! Shared structured linear algebra for the interpolation solvers:
//! Hermitian-Toeplitz embedding and its adjoint, a sorted Hermitian
//! eigendecomposition, PSD projection, and the noise-subspace eigen-filter.
//!
//! Conventions. A Hermitian Toeplitz matrix `T(z)` of dimension `n` is
//! parameterized by its first column `z` (length `n`, `z[0]` real):
//! `T[i, j] = z[i - j]` for `i >= j` and `conj(z[j - i])` otherwise. The
//! adjoint maps a matrix `W` to the vector of subdiagonal sums, which under
//! the pairing `<a, z> = a[0] z[0] + 2 sum_{k>=1} Re(conj(a[k]) z[k])`
//! satisfies `tr[W T(z)] = <toeplitz_adjoint(W), z>` for Hermitian `W`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::{CMat, CVec};

/// First column of a Hermitian Toeplitz matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzVec {
    pub z: CVec,
}

impl ToeplitzVec {
    /// Validates that the leading entry (the main diagonal) is real.
    pub fn new(z: CVec) -> Result<Self> {
        let im = z[0].im.abs();
        let scale = z.norm().max(1.0);
        if im > 1e-9 * scale {
            return Err(Error::InvalidDiagonal(im));
        }
        let mut z = z;
        z[0] = Complex::new(z[0].re, 0.0);
        Ok(Self { z })
    }

    pub fn zeros(dim: usize) -> Self {
        Self { z: CVec::zeros(dim) }
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    /// `tr T(z) = n * z[0]`.
    pub fn trace(&self) -> f64 {
        self.z.len() as f64 * self.z[0].re
    }
}

/// Embeds the first column into the full Hermitian Toeplitz matrix.
pub fn toeplitz_embed(z: &ToeplitzVec) -> CMat {
    let n = z.dim();
    CMat::from_fn(n, n, |i, j| {
        if i >= j {
            z.z[i - j]
        } else {
            z.z[j - i].conj()
        }
    })
}

/// Extracts the first column of a (numerically) Toeplitz matrix by averaging
/// each diagonal; exact inverse of [`toeplitz_embed`] on Toeplitz input.
pub fn toeplitz_extract(t: &CMat) -> ToeplitzVec {
    let n = t.nrows();
    let mut z = CVec::zeros(n);
    for k in 0..n {
        let mut acc = Complex::new(0.0, 0.0);
        for i in k..n {
            acc += t[(i, i - k)];
            acc += t[(i - k, i)].conj();
        }
        z[k] = acc / (2.0 * (n - k) as f64);
    }
    z[0] = Complex::new(z[0].re, 0.0);
    ToeplitzVec { z }
}

/// Adjoint of the Toeplitz embedding: component `k` is the sum of the
/// entries of `W` on its `k`-th subdiagonal.
pub fn toeplitz_adjoint(w: &CMat) -> CVec {
    let n = w.nrows();
    debug_assert_eq!(n, w.ncols());
    let mut alpha = CVec::zeros(n);
    for k in 0..n {
        let mut acc = Complex::new(0.0, 0.0);
        for i in k..n {
            acc += w[(i, i - k)];
        }
        alpha[k] = acc;
    }
    alpha
}

/// Real pairing under which [`toeplitz_adjoint`] is the gradient of
/// `z -> tr[W T(z)]`.
pub fn adjoint_pairing(alpha: &CVec, z: &CVec) -> f64 {
    let mut acc = alpha[0].re * z[0].re;
    for k in 1..z.len() {
        acc += 2.0 * (alpha[k].conj() * z[k]).re;
    }
    acc
}

/// Hermitian eigendecomposition with eigenvalues sorted descending and
/// eigenvector columns permuted to match.
pub fn eigh(a: &CMat) -> (Vec<f64>, CMat) {
    let n = a.nrows();
    let sym = (a + a.adjoint()).scale(0.5);
    let mut fm = faer::Mat::<faer::c64>::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            let z = sym[(i, j)];
            fm[(i, j)] = faer::c64::new(z.re, z.im);
        }
    }
    let evd = fm
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("hermitian eigendecomposition failed");
    let raw_vals = evd.S();
    let raw_vecs = evd.U();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| raw_vals[j].re.partial_cmp(&raw_vals[i].re).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| raw_vals[i].re).collect();
    let vecs = CMat::from_fn(n, n, |i, dst| {
        let z = raw_vecs[(i, order[dst])];
        Complex::new(z.re, z.im)
    });
    (vals, vecs)
}

/// Frobenius-nearest PSD matrix: symmetrize, clamp negative eigenvalues.
pub fn psd_project(a: &CMat) -> CMat {
    let (vals, vecs) = eigh(a);
    reassemble_clamped(&vals, &vecs, |v| v.max(0.0))
}

fn reassemble_clamped(vals: &[f64], vecs: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let n = vecs.nrows();
    let kept: Vec<(usize, f64)> = vals
        .iter()
        .enumerate()
        .filter_map(|(idx, &v)| {
            let fv = f(v);
            (fv != 0.0).then_some((idx, fv))
        })
        .collect();
    if kept.is_empty() {
        return CMat::zeros(n, n);
    }
    let mut u = CMat::zeros(n, kept.len());
    let mut u_scaled = CMat::zeros(n, kept.len());
    for (dst, &(src, fv)) in kept.iter().enumerate() {
        u.set_column(dst, &vecs.column(src));
        u_scaled.set_column(dst, &vecs.column(src).scale(fv));
    }
    let out = u_scaled * u.adjoint();
    let oh = out.adjoint();
    (out + oh).scale(0.5)
}

/// Relative PSD tolerance: eigenvalues above `-1e-8 * lambda_max` count as
/// nonnegative.
pub const PSD_REL_TOL: f64 = 1e-8;

/// Noise-subspace eigen-filter: `W = U max(gamma - Lambda, 0) U^H` in the
/// eigenbasis of PSD `T`. For rank-deficient `T` with `gamma` below its
/// smallest signal eigenvalue this is `gamma` times the noise-subspace
/// projector, and `gamma I - W` is always PSD.
pub fn omega_filter(t: &CMat, gamma: f64) -> Result<CMat> {
    if gamma <= 0.0 {
        return Err(Error::Config("omega filter requires gamma > 0".into()));
    }
    let (vals, vecs) = eigh(t);
    let lmax = vals[0].max(0.0);
    if let Some(&lmin) = vals.last() {
        if lmin < -PSD_REL_TOL * lmax.max(1.0) {
            return Err(Error::NotPsd(lmin));
        }
    }
    Ok(reassemble_clamped(&vals, &vecs, |v| (gamma - v).max(0.0)))
}

/// Number of eigenvalues above `rel_tol * lambda_max`.
pub fn numerical_rank(t: &CMat, rel_tol: f64) -> usize {
    let (vals, _) = eigh(t);
    let lmax = vals[0].max(0.0);
    if lmax <= 0.0 {
        return 0;
    }
    vals.iter().filter(|&&v| v > rel_tol * lmax).count()
}

/// Four equally sized blocks `[[TL, TR], [BL, BR]]` assembled into one
/// Hermitian matrix, as used by the PSD constraints of the interpolation
/// solvers (TL/BR Hermitian Toeplitz, TR the coarray matrix, BL its adjoint).
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPsd {
    assembled: CMat,
    half: usize,
}

impl BlockPsd {
    pub fn from_blocks(tl: &CMat, tr: &CMat, bl: &CMat, br: &CMat) -> Self {
        let half = tl.nrows();
        debug_assert!(
            tr.nrows() == half && bl.nrows() == half && br.nrows() == half,
            "all four blocks must share dimensions"
        );
        let mut assembled = CMat::zeros(2 * half, 2 * half);
        assembled.view_mut((0, 0), (half, half)).copy_from(tl);
        assembled.view_mut((0, half), (half, half)).copy_from(tr);
        assembled.view_mut((half, 0), (half, half)).copy_from(bl);
        assembled.view_mut((half, half), (half, half)).copy_from(br);
        Self { assembled, half }
    }

    pub fn from_assembled(assembled: CMat) -> Self {
        let half = assembled.nrows() / 2;
        debug_assert_eq!(assembled.nrows(), 2 * half);
        Self { assembled, half }
    }

    pub fn zeros(half: usize) -> Self {
        Self { assembled: CMat::zeros(2 * half, 2 * half), half }
    }

    pub fn assembled(&self) -> &CMat {
        &self.assembled
    }

    pub fn half(&self) -> usize {
        self.half
    }

    pub fn tl(&self) -> CMat {
        self.assembled.view((0, 0), (self.half, self.half)).into()
    }

    pub fn tr(&self) -> CMat {
        self.assembled.view((0, self.half), (self.half, self.half)).into()
    }

    pub fn bl(&self) -> CMat {
        self.assembled.view((self.half, 0), (self.half, self.half)).into()
    }

    pub fn br(&self) -> CMat {
        self.assembled.view((self.half, self.half), (self.half, self.half)).into()
    }
}

/// Random Hermitian matrix with standard normal entries (test and
/// initialization helper).
pub fn random_hermitian(rng: &mut impl rand::Rng, n: usize) -> CMat {
    use rand_distr::{Distribution, StandardNormal};
    let raw = CMat::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex::new(re, im)
    });
    let rh = raw.adjoint();
    (raw + rh).scale(0.5)
}
