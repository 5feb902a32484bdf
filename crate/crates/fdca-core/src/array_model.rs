//! FDCA geometry, steering vectors, snapshot simulation, and covariances.
//!
//! The array places `M + N - 1` sensors on the coprime integer grid
//! `S = {N m} ∪ {M n}` (unit spacing `d`) and reuses the same integer set
//! for the per-sensor carrier offsets (`f0 + S * df`). A receive snapshot
//! stacks all (sensor, frequency) pairs, sensor index major, so the joint
//! steering vector is the Kronecker product of a spatial and a frequency
//! steering vector over `S`.


use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::{CMat, CVec, SPEED_OF_LIGHT};

/// Coprime FDCA geometry: integer set, spacing, and carrier offsets.
#[derive(Debug, Clone, PartialEq)]
pub struct CoprimeLayout {
    pub m_coprime: usize,
    pub n_coprime: usize,
    /// Unit inter-element spacing in meters (reporting only; spatial phases
    /// bake in half-wavelength spacing).
    pub unit_spacing_d: f64,
    /// Reference carrier frequency in Hz (reporting only).
    pub ref_freq_f0: f64,
    /// Unit frequency offset in Hz.
    pub unit_offset_df: f64,
    /// Sorted, deduplicated coprime integer set `{Nm} ∪ {Mn}`.
    pub integer_set: Vec<i64>,
    /// Propagation speed in m/s.
    pub speed_of_light: f64,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 { a } else { gcd(b, a % b) }
}

/// Builds the FDCA layout from coprime `(M, N)` with `2 <= M < N`.
pub fn build_coprime_layout(
    m: usize,
    n: usize,
    d: f64,
    f0: f64,
    df: f64,
) -> Result<CoprimeLayout> {
    if m < 2 || m >= n {
        return Err(Error::InvalidLayout(format!(
            "need 2 <= M < N, got M = {m}, N = {n}"
        )));
    }
    if gcd(m, n) != 1 {
        return Err(Error::InvalidLayout(format!(
            "M = {m} and N = {n} are not coprime (gcd = {})",
            gcd(m, n)
        )));
    }
    if d <= 0.0 || df <= 0.0 {
        return Err(Error::InvalidLayout(
            "spacing d and frequency offset df must be positive".into(),
        ));
    }
    let mut set: Vec<i64> = (0..m as i64)
        .map(|mm| n as i64 * mm)
        .chain((0..n as i64).map(|nn| m as i64 * nn))
        .collect();
    set.sort_unstable();
    set.dedup();
    debug_assert_eq!(set.len(), m + n - 1);
    Ok(CoprimeLayout {
        m_coprime: m,
        n_coprime: n,
        unit_spacing_d: d,
        ref_freq_f0: f0,
        unit_offset_df: df,
        integer_set: set,
        speed_of_light: SPEED_OF_LIGHT,
    })
}

impl CoprimeLayout {
    /// Number of physical sensors (= number of carrier offsets).
    pub fn num_sensors(&self) -> usize {
        self.integer_set.len()
    }

    /// Joint (sensor, frequency) dimension `(M + N - 1)^2`.
    pub fn joint_dim(&self) -> usize {
        self.num_sensors() * self.num_sensors()
    }

    /// Aperture index `L = M (N - 1)`, the largest coprime integer.
    pub fn aperture_l(&self) -> usize {
        self.m_coprime * (self.n_coprime - 1)
    }

    /// Sensor positions `S * d` in meters.
    pub fn positions(&self) -> Vec<f64> {
        self.integer_set
            .iter()
            .map(|&s| s as f64 * self.unit_spacing_d)
            .collect()
    }

    /// Carrier frequencies `f0 + S * df` in Hz.
    pub fn carrier_freqs(&self) -> Vec<f64> {
        self.integer_set
            .iter()
            .map(|&s| self.ref_freq_f0 + s as f64 * self.unit_offset_df)
            .collect()
    }

    /// Unambiguous range `c / (2 df)` in meters.
    pub fn unambiguous_range(&self) -> f64 {
        self.speed_of_light / (2.0 * self.unit_offset_df)
    }
}

/// One target: DoA in degrees, range in meters, reflection power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    pub theta_deg: f64,
    pub range_m: f64,
    pub power: f64,
}

/// Targets plus noise level, snapshot count, and RNG seed.
///
/// A scene may be empty (noise-only); estimation pipelines require at least
/// one target, simulation and covariance construction do not.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetScene {
    pub targets: Vec<Target>,
    pub noise_power: f64,
    pub snapshots: usize,
    pub rng_seed: u64,
}

impl TargetScene {
    pub fn new(
        targets: Vec<Target>,
        noise_power: f64,
        snapshots: usize,
        rng_seed: u64,
    ) -> Result<Self> {
        if noise_power < 0.0 {
            return Err(Error::InvalidScene("noise power must be >= 0".into()));
        }
        if snapshots == 0 {
            return Err(Error::InvalidScene("need at least one snapshot".into()));
        }
        for (k, t) in targets.iter().enumerate() {
            if t.power <= 0.0 {
                return Err(Error::InvalidScene(format!(
                    "target {k} has non-positive power {}",
                    t.power
                )));
            }
            if t.theta_deg.abs() >= 90.0 {
                return Err(Error::InvalidScene(format!(
                    "target {k} DoA {} deg outside (-90, 90)",
                    t.theta_deg
                )));
            }
            if t.range_m < 0.0 {
                return Err(Error::InvalidScene(format!(
                    "target {k} range {} m is negative",
                    t.range_m
                )));
            }
        }
        Ok(Self { targets, noise_power, snapshots, rng_seed })
    }

    /// Errors if any target range reaches the unambiguous limit `c/(2 df)`.
    pub fn validate_against(&self, layout: &CoprimeLayout) -> Result<()> {
        let rmax = layout.unambiguous_range();
        for (k, t) in self.targets.iter().enumerate() {
            if t.range_m >= rmax {
                return Err(Error::InvalidScene(format!(
                    "target {k} range {} m >= unambiguous limit {rmax} m",
                    t.range_m
                )));
            }
        }
        Ok(())
    }

    pub fn total_power(&self) -> f64 {
        self.targets.iter().map(|t| t.power).sum()
    }

    /// Noise power for a given SNR in dB, with SNR defined as total target
    /// power over per-element noise power.
    pub fn noise_power_for_snr(total_power: f64, snr_db: f64) -> f64 {
        total_power / 10f64.powf(snr_db / 10.0)
    }
}

/// Spatial steering entries `exp(-j pi s sin(theta))` over the given indices.
pub fn spatial_steering(theta_deg: f64, indices: &[i64]) -> CVec {
    let st = theta_deg.to_radians().sin();
    CVec::from_iterator(
        indices.len(),
        indices
            .iter()
            .map(|&s| Complex::from_polar(1.0, -std::f64::consts::PI * s as f64 * st)),
    )
}

/// Frequency steering entries `exp(+j 4 pi s df r / c)` over the given indices.
pub fn frequency_steering(layout: &CoprimeLayout, range_m: f64, indices: &[i64]) -> CVec {
    let k = 4.0 * std::f64::consts::PI * layout.unit_offset_df * range_m / layout.speed_of_light;
    CVec::from_iterator(
        indices.len(),
        indices.iter().map(|&s| Complex::from_polar(1.0, k * s as f64)),
    )
}

/// Joint steering `h_p(theta) ⊗ h_f(r)` over the coprime set, length `(M+N-1)^2`.
pub fn joint_steering(layout: &CoprimeLayout, theta_deg: f64, range_m: f64) -> CVec {
    let hp = spatial_steering(theta_deg, &layout.integer_set);
    let hf = frequency_steering(layout, range_m, &layout.integer_set);
    hp.kronecker(&hf)
}

/// Multi-snapshot receive data, one column per snapshot.
#[derive(Debug, Clone)]
pub struct SnapshotMatrix {
    pub data: CMat,
}

/// Hermitian sample (or exact) covariance of the joint receive vector.
#[derive(Debug, Clone)]
pub struct SampleCovariance {
    pub r_hat: CMat,
}

/// Assembles snapshots from explicit per-target source sequences plus noise.
///
/// `sources` is `K x T`; `noise` is `(M+N-1)^2 x T`. This is the
/// deterministic core behind [`simulate_snapshots`]; tests drive it with
/// constant sources.
pub fn snapshots_from_sources(
    layout: &CoprimeLayout,
    targets: &[Target],
    sources: &CMat,
    noise: &CMat,
) -> Result<SnapshotMatrix> {
    let dim = layout.joint_dim();
    if sources.nrows() != targets.len() || noise.nrows() != dim || sources.ncols() != noise.ncols()
    {
        return Err(Error::ShapeMismatch {
            expected: format!("sources {} x T, noise {dim} x T", targets.len()),
            got: format!(
                "sources {} x {}, noise {} x {}",
                sources.nrows(),
                sources.ncols(),
                noise.nrows(),
                noise.ncols()
            ),
        });
    }
    let t = sources.ncols();
    let mut data = noise.clone();
    for (k, tgt) in targets.iter().enumerate() {
        let h = joint_steering(layout, tgt.theta_deg, tgt.range_m);
        for col in 0..t {
            let s = sources[(k, col)];
            for row in 0..dim {
                data[(row, col)] += s * h[row];
            }
        }
    }
    Ok(SnapshotMatrix { data })
}

fn complex_gaussian_matrix(rng: &mut ChaCha12Rng, rows: usize, cols: usize, var: f64) -> CMat {
    let scale = (var / 2.0).sqrt();
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex::new(re * scale, im * scale)
    })
}

/// Simulates `x(t) = sum_k s_k(t) h(theta_k, r_k) + n(t)` with i.i.d.
/// circular complex Gaussian sources (variance `p_k`) and noise (variance
/// `sigma_n^2`), deterministic for a given scene seed.
pub fn simulate_snapshots(layout: &CoprimeLayout, scene: &TargetScene) -> Result<SnapshotMatrix> {
    scene.validate_against(layout)?;
    let mut rng = ChaCha12Rng::seed_from_u64(scene.rng_seed);
    let t = scene.snapshots;
    let mut sources = complex_gaussian_matrix(&mut rng, scene.targets.len(), t, 1.0);
    for (k, tgt) in scene.targets.iter().enumerate() {
        let amp = tgt.power.sqrt();
        for col in 0..t {
            sources[(k, col)] *= amp;
        }
    }
    let noise = complex_gaussian_matrix(&mut rng, layout.joint_dim(), t, scene.noise_power);
    snapshots_from_sources(layout, &scene.targets, &sources, &noise)
}

/// Sample covariance `(1/T) sum_t x(t) x(t)^H`, symmetrized.
pub fn sample_covariance(snapshots: &SnapshotMatrix) -> SampleCovariance {
    let t = snapshots.data.ncols();
    let mut r = &snapshots.data * snapshots.data.adjoint();
    r.scale_mut(1.0 / t as f64);
    let rh = r.adjoint();
    r = (r + rh).scale(0.5);
    SampleCovariance { r_hat: r }
}

/// Exact covariance `sum_k p_k h h^H + sigma_n^2 I` for uncorrelated targets.
pub fn theoretical_covariance(layout: &CoprimeLayout, scene: &TargetScene) -> Result<SampleCovariance> {
    scene.validate_against(layout)?;
    let dim = layout.joint_dim();
    let mut r = CMat::from_diagonal_element(dim, dim, Complex::new(scene.noise_power, 0.0));
    for tgt in &scene.targets {
        let h = joint_steering(layout, tgt.theta_deg, tgt.range_m);
        // r += p * h h^H
        r.gerc(Complex::new(tgt.power, 0.0), &h, &h, Complex::new(1.0, 0.0));
    }
    let rh = r.adjoint();
    Ok(SampleCovariance { r_hat: (r + rh).scale(0.5) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use crate::C64;
    use proptest::prelude::*;

    fn layout35() -> CoprimeLayout {
        build_coprime_layout(3, 5, 0.015, 10.0e9, 30.0e3).unwrap()
    }

    #[test]
    fn coprime_set_3_5_matches_prototype() {
        let l = layout35();
        assert_eq!(l.integer_set, vec![0, 3, 5, 6, 9, 10, 12]);
        assert_eq!(l.num_sensors(), 7);
        assert_eq!(l.aperture_l(), 12);
    }

    #[test]
    fn coprime_set_2_3_by_enumeration() {
        let l = build_coprime_layout(2, 3, 0.015, 1.0e9, 30.0e3).unwrap();
        assert_eq!(l.integer_set, vec![0, 2, 3, 4]);
    }

    #[test]
    fn non_coprime_and_misordered_pairs_rejected() {
        assert!(build_coprime_layout(4, 6, 0.015, 1e9, 3e4).is_err());
        assert!(build_coprime_layout(5, 3, 0.015, 1e9, 3e4).is_err());
        assert!(build_coprime_layout(1, 4, 0.015, 1e9, 3e4).is_err());
    }

    #[test]
    fn spatial_steering_values() {
        let l = layout35();
        let a = spatial_steering(0.0, &l.integer_set);
        for v in a.iter() {
            assert_relative_eq!(v.re, 1.0, epsilon = 1e-15);
            assert_relative_eq!(v.im, 0.0, epsilon = 1e-15);
        }
        // sin 30 deg = 1/2, s = 2 -> exp(-j pi) = -1
        let a = spatial_steering(30.0, &[2]);
        assert_relative_eq!(a[0].re, -1.0, epsilon = 1e-12);
        assert_relative_eq!(a[0].im, 0.0, epsilon = 1e-12);
        // full set: elementwise exp(-j pi s / 2)
        let a = spatial_steering(30.0, &l.integer_set);
        for (v, &s) in a.iter().zip(&l.integer_set) {
            let want = Complex::from_polar(1.0, -std::f64::consts::PI * s as f64 * 0.5);
            assert_relative_eq!((v - want).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn frequency_steering_values() {
        let l = layout35();
        let a = frequency_steering(&l, 0.0, &l.integer_set);
        for v in a.iter() {
            assert_relative_eq!(v.re, 1.0, epsilon = 1e-15);
        }
        // r = c/(4 df), s = 1 -> phase pi
        let r = l.speed_of_light / (4.0 * l.unit_offset_df);
        let a = frequency_steering(&l, r, &[1]);
        assert_relative_eq!(a[0].re, -1.0, epsilon = 1e-12);
        // r = 2500 m, df = 30 kHz, s = 1
        let a = frequency_steering(&l, 2500.0, &[1]);
        let want = Complex::from_polar(
            1.0,
            4.0 * std::f64::consts::PI * 30.0e3 * 2500.0 / l.speed_of_light,
        );
        assert_relative_eq!((a[0] - want).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn joint_steering_is_double_loop_flattening() {
        let l = layout35();
        let h = joint_steering(&l, 0.0, 0.0);
        assert_eq!(h.len(), 49);
        for v in h.iter() {
            assert_relative_eq!(v.re, 1.0, epsilon = 1e-15);
        }
        let (theta, r) = (30.0, 2500.0);
        let h = joint_steering(&l, theta, r);
        let hp = spatial_steering(theta, &l.integer_set);
        let hf = frequency_steering(&l, r, &l.integer_set);
        let n = l.num_sensors();
        for i in 0..n {
            for q in 0..n {
                let want = hp[i] * hf[q];
                assert_relative_eq!((h[i * n + q] - want).norm(), 0.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn constant_source_hook_reproduces_steering_columns() {
        let l = layout35();
        let targets = vec![Target { theta_deg: 30.0, range_m: 2500.0, power: 1.0 }];
        let t = 4;
        let sources = CMat::from_element(1, t, Complex::new(1.0, 0.0));
        let noise = CMat::zeros(l.joint_dim(), t);
        let snaps = snapshots_from_sources(&l, &targets, &sources, &noise).unwrap();
        let h = joint_steering(&l, 30.0, 2500.0);
        for col in 0..t {
            for row in 0..l.joint_dim() {
                assert_relative_eq!((snaps.data[(row, col)] - h[row]).norm(), 0.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn simulation_is_deterministic_per_seed() {
        let l = layout35();
        let scene = TargetScene::new(
            vec![Target { theta_deg: 10.0, range_m: 1000.0, power: 1.0 }],
            0.5,
            16,
            42,
        )
        .unwrap();
        let a = simulate_snapshots(&l, &scene).unwrap();
        let b = simulate_snapshots(&l, &scene).unwrap();
        assert_eq!(a.data, b.data);
        let scene2 = TargetScene { rng_seed: 43, ..scene };
        let c = simulate_snapshots(&l, &scene2).unwrap();
        assert_ne!(a.data, c.data);
    }

    #[test]
    fn noise_only_covariance_approaches_identity() {
        let l = layout35();
        let scene = TargetScene::new(vec![], 1.0, 20_000, 7).unwrap();
        let snaps = simulate_snapshots(&l, &scene).unwrap();
        let r = sample_covariance(&snaps);
        let dim = l.joint_dim();
        let eye = CMat::identity(dim, dim);
        let err = (&r.r_hat - &eye).norm() / eye.norm();
        assert!(err < 0.1, "relative error {err}");
    }

    #[test]
    fn single_snapshot_covariance_is_outer_product() {
        let l = layout35();
        let scene = TargetScene::new(
            vec![Target { theta_deg: -20.0, range_m: 900.0, power: 2.0 }],
            0.1,
            1,
            3,
        )
        .unwrap();
        let snaps = simulate_snapshots(&l, &scene).unwrap();
        let r = sample_covariance(&snaps);
        let x = snaps.data.column(0).clone_owned();
        let want = &x * x.adjoint();
        assert!((&r.r_hat - &want).norm() < 1e-12 * want.norm());
    }

    #[test]
    fn noiseless_single_target_covariance_has_rank_one() {
        let l = layout35();
        let scene = TargetScene::new(
            vec![Target { theta_deg: 12.0, range_m: 700.0, power: 1.0 }],
            0.0,
            8,
            5,
        )
        .unwrap();
        let snaps = simulate_snapshots(&l, &scene).unwrap();
        let r = sample_covariance(&snaps);
        let (vals, _) = crate::sdp_core::eigh(&r.r_hat);
        assert!(vals[0] > 1e-6);
        for &v in &vals[1..] {
            assert!(v.abs() < 1e-10 * vals[0]);
        }
    }

    #[test]
    fn sample_covariance_matches_theoretical_in_the_mean() {
        let l = layout35();
        let scene = TargetScene::new(
            vec![
                Target { theta_deg: 30.0, range_m: 2500.0, power: 1.0 },
                Target { theta_deg: -10.0, range_m: 800.0, power: 0.5 },
            ],
            0.2,
            100_000,
            11,
        )
        .unwrap();
        let snaps = simulate_snapshots(&l, &scene).unwrap();
        let r = sample_covariance(&snaps);
        let rx = theoretical_covariance(&l, &scene).unwrap();
        let err = (&r.r_hat - &rx.r_hat).norm() / rx.r_hat.norm();
        assert!(err < 0.05, "relative Frobenius error {err}");
    }

    #[test]
    fn theoretical_covariance_structure() {
        let l = layout35();
        let noise_only = TargetScene::new(vec![], 0.7, 1, 0).unwrap();
        let r = theoretical_covariance(&l, &noise_only).unwrap();
        let want = CMat::from_diagonal_element(49, 49, Complex::new(0.7, 0.0));
        assert_eq!(r.r_hat, want);

        let one = TargetScene::new(
            vec![Target { theta_deg: 25.0, range_m: 1500.0, power: 2.0 }],
            0.0,
            1,
            0,
        )
        .unwrap();
        let r = theoretical_covariance(&l, &one).unwrap();
        let trace: C64 = r.r_hat.diagonal().iter().sum();
        assert_relative_eq!(trace.re, 2.0 * 49.0, epsilon = 1e-9);

        let two = TargetScene::new(
            vec![
                Target { theta_deg: 25.0, range_m: 1500.0, power: 2.0 },
                Target { theta_deg: -40.0, range_m: 3000.0, power: 0.5 },
            ],
            0.3,
            1,
            0,
        )
        .unwrap();
        let r = theoretical_covariance(&l, &two).unwrap();
        let trace: C64 = r.r_hat.diagonal().iter().sum();
        assert_relative_eq!(trace.re, (2.0 + 0.5 + 0.3) * 49.0, epsilon = 1e-9);
    }

    #[test]
    fn range_at_unambiguous_limit_rejected() {
        let l = layout35();
        let rmax = l.unambiguous_range();
        let scene = TargetScene::new(
            vec![Target { theta_deg: 0.0, range_m: rmax, power: 1.0 }],
            0.0,
            1,
            0,
        )
        .unwrap();
        assert!(scene.validate_against(&l).is_err());
    }

    proptest! {
        #[test]
        fn steering_entries_are_unit_modulus(theta in -89.0f64..89.0, r in 0.0f64..4900.0) {
            let l = layout35();
            let h = joint_steering(&l, theta, r);
            for v in h.iter() {
                prop_assert!((v.norm() - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn theoretical_covariance_is_hermitian_psd(
            theta in -80.0f64..80.0,
            r in 0.0f64..4500.0,
            p in 0.1f64..5.0,
            noise in 0.0f64..2.0,
        ) {
            let l = layout35();
            let scene = TargetScene::new(
                vec![Target { theta_deg: theta, range_m: r, power: p }],
                noise, 1, 0,
            ).unwrap();
            let rx = theoretical_covariance(&l, &scene).unwrap().r_hat;
            prop_assert!((&rx - rx.adjoint()).norm() < 1e-10);
            let (vals, _) = crate::sdp_core::eigh(&rx);
            let lmax = vals[0].max(1.0);
            prop_assert!(vals.iter().all(|&v| v > -1e-10 * lmax));
        }
    }
}
