//! Scenario configuration: sectioned key/value text (TOML) with keys named
//! after the domain type fields.

use serde::Deserialize;

use crate::array_model::{build_coprime_layout, CoprimeLayout, Target, TargetScene};
use crate::error::{Error, Result};

/// How SNR is defined everywhere in this crate (logged in report headers):
/// total target power over per-element noise power.
pub const SNR_DEFINITION: &str = "total_signal_power_over_per_element_noise_power";

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutCfg {
    pub m_coprime: usize,
    pub n_coprime: usize,
    /// Defaults to half the carrier wavelength.
    pub unit_spacing_d: Option<f64>,
    #[serde(default = "default_f0")]
    pub ref_freq_f0: f64,
    #[serde(default = "default_df")]
    pub unit_offset_df: f64,
    pub speed_of_light: Option<f64>,
}

fn default_f0() -> f64 {
    10.0e9
}

fn default_df() -> f64 {
    30.0e3
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneCfg {
    /// Rows of `[theta_deg, range_m, power]`.
    pub targets: Vec<[f64; 3]>,
    pub noise_power: Option<f64>,
    /// Alternative to `noise_power`.
    pub snr_db: Option<f64>,
    pub snapshots: usize,
    #[serde(default)]
    pub rng_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Sst,
    Danm,
    Crm,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Sst => "sst",
            Method::Danm => "danm",
            Method::Crm => "crm",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sst" => Ok(Method::Sst),
            "danm" => Ok(Method::Danm),
            "crm" => Ok(Method::Crm),
            other => Err(Error::Config(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodCfg {
    #[serde(default = "default_method")]
    pub name: Method,
    #[serde(default = "default_mu")]
    pub mu: f64,
    #[serde(default = "default_gamma_p")]
    pub gamma_p: f64,
    #[serde(default = "default_gamma_f")]
    pub gamma_f: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_max_outer")]
    pub max_outer: usize,
    #[serde(default)]
    pub nu_p: f64,
    #[serde(default)]
    pub nu_f: f64,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    /// Per-round budget of the cyclic solver's warm-started inner solves.
    #[serde(default = "default_inner_max_iters")]
    pub inner_max_iters: usize,
    #[serde(default = "default_tol")]
    pub primal_tol: f64,
    #[serde(default = "default_tol")]
    pub dual_tol: f64,
    #[serde(default = "default_true")]
    pub refine_peaks: bool,
}

fn default_method() -> Method {
    Method::Crm
}
fn default_mu() -> f64 {
    50.0
}
fn default_gamma_p() -> f64 {
    0.6
}
fn default_gamma_f() -> f64 {
    0.4
}
fn default_epsilon() -> f64 {
    1e-4
}
fn default_max_outer() -> usize {
    30
}
fn default_rho() -> f64 {
    1.0
}
fn default_max_iters() -> usize {
    2000
}
fn default_inner_max_iters() -> usize {
    600
}
fn default_tol() -> f64 {
    1e-6
}
fn default_true() -> bool {
    true
}

impl Default for MethodCfg {
    fn default() -> Self {
        toml::from_str("").expect("defaults deserialize")
    }
}

/// `[start, stop, step]`; a negative stop on the range axis means the
/// unambiguous limit `c / (2 df)`.
#[derive(Debug, Clone, Copy, Deserialize)]
pub struct GridSpec(pub [f64; 3]);

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        crate::spectral::uniform_grid(self.0[0], self.0[1], self.0[2])
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grids {
    pub theta: GridSpec,
    pub range: GridSpec,
}

/// Fine scan for small scenes, coarse for many-target scenes.
pub fn default_grids_for(k: usize, layout: &CoprimeLayout) -> Grids {
    let rmax = layout.unambiguous_range();
    if k <= 4 {
        Grids { theta: GridSpec([-70.0, 70.0, 0.1]), range: GridSpec([0.0, rmax, 5.0]) }
    } else {
        Grids { theta: GridSpec([-70.0, 70.0, 0.5]), range: GridSpec([0.0, rmax, 25.0]) }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McCfg {
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    /// SNR sweep in dB; when empty the scene noise is used as-is.
    #[serde(default)]
    pub snr_db: Vec<f64>,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_true")]
    pub with_crb: bool,
}

fn default_trials() -> usize {
    100
}
fn default_methods() -> Vec<Method> {
    vec![Method::Sst, Method::Danm, Method::Crm]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub layout: LayoutCfg,
    pub scene: SceneCfg,
    #[serde(default)]
    pub method: MethodCfg,
    pub grids: Option<Grids>,
    pub mc: Option<McCfg>,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn build_layout(&self) -> Result<CoprimeLayout> {
        let f0 = self.layout.ref_freq_f0;
        let c = self.layout.speed_of_light.unwrap_or(crate::SPEED_OF_LIGHT);
        let d = self.layout.unit_spacing_d.unwrap_or(c / (2.0 * f0));
        let mut layout = build_coprime_layout(
            self.layout.m_coprime,
            self.layout.n_coprime,
            d,
            f0,
            self.layout.unit_offset_df,
        )?;
        layout.speed_of_light = c;
        Ok(layout)
    }

    /// Scene with the configured noise level (SNR takes precedence when both
    /// are absent this is an error).
    pub fn build_scene(&self) -> Result<TargetScene> {
        let targets: Vec<Target> = self
            .scene
            .targets
            .iter()
            .map(|row| Target { theta_deg: row[0], range_m: row[1], power: row[2] })
            .collect();
        let total: f64 = targets.iter().map(|t| t.power).sum();
        let noise = match (self.scene.noise_power, self.scene.snr_db) {
            (Some(np), None) => np,
            (None, Some(snr)) => TargetScene::noise_power_for_snr(total, snr),
            (Some(_), Some(_)) => {
                return Err(Error::Config("give either noise_power or snr_db, not both".into()))
            }
            (None, None) => {
                return Err(Error::Config("scene needs noise_power or snr_db".into()))
            }
        };
        TargetScene::new(targets, noise, self.scene.snapshots, self.scene.rng_seed)
    }

    pub fn grids_or_default(&self, layout: &CoprimeLayout) -> Grids {
        self.grids
            .clone()
            .map(|mut g| {
                if g.range.0[1] < 0.0 {
                    g.range.0[1] = layout.unambiguous_range();
                }
                g
            })
            .unwrap_or_else(|| default_grids_for(self.scene.targets.len(), layout))
    }
}
