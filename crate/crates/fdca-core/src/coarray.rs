//! Space-frequency difference coarray: lag set with holes, redundancy-averaged
//! virtual signal matrix, and the consecutive central block.
//!
//! The virtual signal lives on the `(2L+1) x (2L+1)` lag grid, row `a`
//! holding spatial lag `l1 = a - L` and column `b` holding frequency lag
//! `l2 = b - L`. For a physical covariance entry between (sensor `i`,
//! carrier `q`) and (sensor `i'`, carrier `q'`) the lag pair is
//! `l1 = s_i - s_i'` and `l2 = s_q' - s_q`, the sign chosen so that the
//! noiseless entry equals `sum_k p_k exp(-j pi l1 sin theta_k)
//! exp(-j 4 pi l2 df r_k / c)`, i.e. the matrix equals `A_p P A_f^H` on
//! observed lags.

use num_complex::Complex;
use std::collections::HashMap;

use crate::array_model::{CoprimeLayout, SampleCovariance};
use crate::error::{Error, Result};
use crate::{C64, CMat};

/// Difference set of the coprime integer set: lags, holes, and the largest
/// hole-free central segment `[-U, U]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceSet {
    pub lags: Vec<i64>,
    pub holes: Vec<i64>,
    pub consecutive_u: usize,
    pub aperture_l: usize,
}

/// Computes the difference set `{ +-(N m - M n) }` and cross-checks it
/// against brute-force pairwise differences of the integer set.
pub fn difference_set(layout: &CoprimeLayout) -> DifferenceSet {
    let l = layout.aperture_l() as i64;
    let mut present = vec![false; (2 * l + 1) as usize];
    for mm in 0..layout.m_coprime as i64 {
        for nn in 0..layout.n_coprime as i64 {
            let diff = layout.n_coprime as i64 * mm - layout.m_coprime as i64 * nn;
            present[(diff + l) as usize] = true;
            present[(-diff + l) as usize] = true;
        }
    }
    // brute-force cross-check over the physical set
    let mut brute = vec![false; (2 * l + 1) as usize];
    for &a in &layout.integer_set {
        for &b in &layout.integer_set {
            brute[(a - b + l) as usize] = true;
        }
    }
    debug_assert_eq!(present, brute, "formula and brute-force difference sets disagree");

    let lags: Vec<i64> = (-l..=l).filter(|&x| present[(x + l) as usize]).collect();
    let holes: Vec<i64> = (-l..=l).filter(|&x| !present[(x + l) as usize]).collect();
    let mut u = 0usize;
    while (u as i64) < l && present[(u as i64 + 1 + l) as usize] {
        u += 1;
    }
    DifferenceSet { lags, holes, consecutive_u: u, aperture_l: l as usize }
}

impl DifferenceSet {
    pub fn contains(&self, lag: i64) -> bool {
        self.lags.binary_search(&lag).is_ok()
    }

    /// Number of non-negative lags.
    pub fn non_negative_count(&self) -> usize {
        self.lags.iter().filter(|&&x| x >= 0).count()
    }
}

/// Zero-initialized interpolated coarray matrix plus its observation mask.
#[derive(Debug, Clone, PartialEq)]
pub struct VirtualSignal {
    /// `(2L+1) x (2L+1)` lag-domain matrix, holes zero.
    pub xv: CMat,
    /// Binary mask, 1 on observed lag pairs.
    pub mask_b: nalgebra::DMatrix<f64>,
    pub aperture_l: usize,
}

impl VirtualSignal {
    /// Wraps a fully observed lag matrix (e.g. an interpolated solve result).
    pub fn fully_observed(xv: CMat) -> Self {
        let n = xv.nrows();
        debug_assert_eq!(n % 2, 1);
        let aperture_l = (n - 1) / 2;
        Self { xv, mask_b: nalgebra::DMatrix::from_element(n, n, 1.0), aperture_l }
    }

    pub fn dim(&self) -> usize {
        2 * self.aperture_l + 1
    }

    /// Value at lag pair `(l1, l2)`.
    pub fn at(&self, l1: i64, l2: i64) -> C64 {
        let l = self.aperture_l as i64;
        self.xv[((l1 + l) as usize, (l2 + l) as usize)]
    }

    pub fn observed_count(&self) -> usize {
        self.mask_b.iter().filter(|&&b| b != 0.0).count()
    }

    pub fn norm_fro(&self) -> f64 {
        self.xv.norm()
    }
}

/// Derives the redundancy-averaged virtual signal from a physical covariance.
///
/// Every physical pair mapping to the same lag pair is averaged, then the
/// matrix is conjugate-symmetrized; holes stay zero and are excluded by the
/// mask.
pub fn derive_virtual_signal(
    layout: &CoprimeLayout,
    covariance: &SampleCovariance,
) -> Result<VirtualSignal> {
    let n_phys = layout.num_sensors();
    let dim = layout.joint_dim();
    if covariance.r_hat.nrows() != dim || covariance.r_hat.ncols() != dim {
        return Err(Error::ShapeMismatch {
            expected: format!("{dim} x {dim}"),
            got: format!("{} x {}", covariance.r_hat.nrows(), covariance.r_hat.ncols()),
        });
    }
    let l = layout.aperture_l() as i64;
    let side = (2 * l + 1) as usize;
    let mut acc = CMat::zeros(side, side);
    let mut count = nalgebra::DMatrix::<f64>::zeros(side, side);

    // spatial-lag multiplicity map: lag -> list of (i, i') sensor pairs
    let mut by_lag: HashMap<i64, Vec<(usize, usize)>> = HashMap::new();
    for (i, &si) in layout.integer_set.iter().enumerate() {
        for (ip, &sip) in layout.integer_set.iter().enumerate() {
            by_lag.entry(si - sip).or_default().push((i, ip));
        }
    }

    for (&l1, spatial_pairs) in &by_lag {
        for (&l2, freq_pairs) in &by_lag {
            let (row, col) = ((l1 + l) as usize, (l2 + l) as usize);
            for &(i, ip) in spatial_pairs {
                for &(qp, q) in freq_pairs {
                    // frequency lag l2 = s_q' - s_q, so the pair list keyed by
                    // s_a - s_b supplies (q', q) directly.
                    acc[(row, col)] += covariance.r_hat[(i * n_phys + q, ip * n_phys + qp)];
                    count[(row, col)] += 1.0;
                }
            }
        }
    }

    let mut xv = CMat::zeros(side, side);
    let mut mask = nalgebra::DMatrix::<f64>::zeros(side, side);
    for row in 0..side {
        for col in 0..side {
            if count[(row, col)] > 0.0 {
                xv[(row, col)] = acc[(row, col)] / count[(row, col)];
                mask[(row, col)] = 1.0;
            }
        }
    }
    // conjugate symmetrization over mirrored lag pairs
    let sym = CMat::from_fn(side, side, |row, col| {
        let mirrored = xv[(side - 1 - row, side - 1 - col)].conj();
        if mask[(row, col)] > 0.0 {
            (xv[(row, col)] + mirrored) * Complex::new(0.5, 0.0)
        } else {
            Complex::new(0.0, 0.0)
        }
    });
    Ok(VirtualSignal { xv: sym, mask_b: mask, aperture_l: l as usize })
}

/// Central fully observed `(2U+1) x (2U+1)` block of the virtual signal.
pub fn consecutive_submatrix(vs: &VirtualSignal, diffset: &DifferenceSet) -> CMat {
    let u = diffset.consecutive_u;
    let l = vs.aperture_l;
    let side = 2 * u + 1;
    let offset = l - u;
    let block = vs.xv.view((offset, offset), (side, side)).into_owned();
    debug_assert!(
        vs.mask_b.view((offset, offset), (side, side)).iter().all(|&b| b > 0.0),
        "consecutive block must be fully observed"
    );
    block
}
