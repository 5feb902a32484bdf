//! Command-line front end: coarray inspection, snapshot simulation, single
//! estimation runs, Monte-Carlo sweeps, and Cramér-Rao bounds, all driven by
//! a sectioned TOML scenario config.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use fdca_core::array_model::{sample_covariance, simulate_snapshots};
use fdca_core::coarray::{derive_virtual_signal, difference_set};
use fdca_core::crb::coarray_fim;
use fdca_core::harness::{
    run_monte_carlo, run_pipeline, Method, PipelineOptions, ScenarioConfig,
};

#[derive(Parser)]
#[command(name = "fdca", about = "Joint DoA-range estimation on FDCA difference coarrays")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print lag set, holes, consecutive segment, and array-model counts as CSV.
    CoarrayInfo {
        #[arg(long, default_value_t = 3)]
        m: usize,
        #[arg(long, default_value_t = 5)]
        n: usize,
        /// Unit spacing in meters (defaults to half the carrier wavelength).
        #[arg(long)]
        d: Option<f64>,
        #[arg(long, default_value_t = 10.0e9)]
        f0: f64,
        #[arg(long, default_value_t = 30.0e3)]
        df: f64,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate snapshots and write the derived virtual coarray signal.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Override the scene seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one estimation trial and write the estimates.
    Estimate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Override the configured method (sst | danm | crm).
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        out: PathBuf,
        /// Also write the MUSIC surface and solver iteration traces.
        #[arg(long)]
        trace: bool,
    },
    /// Run the configured Monte-Carlo sweep and write rmse.csv.
    Montecarlo {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print per-target coarray Cramér-Rao bounds as CSV.
    Crb {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::CoarrayInfo { m, n, d, f0, df, out } => coarray_info(m, n, d, f0, df, out),
        Command::Simulate { config, seed, out } => simulate(&config, seed, &out),
        Command::Estimate { config, seed, method, out, trace } => {
            estimate(&config, seed, method, &out, trace)
        }
        Command::Montecarlo { config, out } => montecarlo(&config, &out),
        Command::Crb { config, out } => crb(&config, out),
    }
}

fn emit(text: String, out: Option<PathBuf>) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn coarray_info(
    m: usize,
    n: usize,
    d: Option<f64>,
    f0: f64,
    df: f64,
    out: Option<PathBuf>,
) -> Result<()> {
    let spacing = d.unwrap_or(fdca_core::SPEED_OF_LIGHT / (2.0 * f0));
    let layout = fdca_core::array_model::build_coprime_layout(m, n, spacing, f0, df)?;
    let ds = difference_set(&layout);
    let join = |xs: &[i64]| {
        xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
    };
    let phys = layout.num_sensors();
    let lags = ds.lags.len();
    let consec = 2 * ds.consecutive_u + 1;
    let interp = 2 * ds.aperture_l + 1;
    let nn = ds.non_negative_count();
    let u = ds.consecutive_u;
    let l = ds.aperture_l;

    let mut text = String::from("section,name,value\n");
    let mut push = |section: &str, name: &str, value: String| {
        text.push_str(&format!("{section},{name},{value}\n"));
    };
    push("layout", "m_coprime", m.to_string());
    push("layout", "n_coprime", n.to_string());
    push("layout", "integer_set", join(&layout.integer_set));
    push("coarray", "lags", join(&ds.lags));
    push("coarray", "holes", join(&ds.holes));
    push("coarray", "consecutive_u", u.to_string());
    push("coarray", "aperture_l", l.to_string());
    push("table1", "sensors_physical", phys.to_string());
    push("table1", "sensors_difference_coarray", lags.to_string());
    push("table1", "sensors_consecutive", consec.to_string());
    push("table1", "sensors_interpolated", interp.to_string());
    push("table1", "dof_physical", (phys * phys - 1).to_string());
    push("table1", "dof_difference_coarray", (nn * nn).to_string());
    push("table1", "dof_consecutive", (u * u + 2 * u).to_string());
    push("table1", "dof_interpolated", (l * l + 2 * l).to_string());
    emit(text, out)
}

fn simulate(config: &Path, seed: Option<u64>, out: &Path) -> Result<()> {
    let cfg = ScenarioConfig::from_path(config)?;
    let layout = cfg.build_layout()?;
    let mut scene = cfg.build_scene()?;
    if let Some(s) = seed {
        scene.rng_seed = s;
    }
    let snaps = simulate_snapshots(&layout, &scene)?;
    let rhat = sample_covariance(&snaps);
    let vs = derive_virtual_signal(&layout, &rhat)?;

    fs::create_dir_all(out)?;
    let l = vs.aperture_l as i64;
    let mut text = String::from("l1,l2,re,im,mask\n");
    for row in 0..vs.dim() {
        for col in 0..vs.dim() {
            let v = vs.xv[(row, col)];
            text.push_str(&format!(
                "{},{},{:.9e},{:.9e},{}\n",
                row as i64 - l,
                col as i64 - l,
                v.re,
                v.im,
                vs.mask_b[(row, col)] as u8,
            ));
        }
    }
    fs::write(out.join("virtual_signal.csv"), text)?;
    eprintln!(
        "wrote {} ({} observed lags of {})",
        out.join("virtual_signal.csv").display(),
        vs.observed_count(),
        vs.dim() * vs.dim()
    );
    Ok(())
}

fn estimate(
    config: &Path,
    seed: Option<u64>,
    method: Option<String>,
    out: &Path,
    trace: bool,
) -> Result<()> {
    let mut cfg = ScenarioConfig::from_path(config)?;
    if let Some(name) = method {
        cfg.method.name = name.parse::<Method>()?;
    }
    let seed = seed.unwrap_or(cfg.scene.rng_seed);
    let opts = PipelineOptions { capture_spectrum: trace, trace_solver: trace };
    let output = run_pipeline(&cfg, seed, &opts)?;

    fs::create_dir_all(out)?;
    let mut text = String::from("k,theta_deg,range_m\n");
    for (k, (theta, range)) in output.result.estimates.iter().enumerate() {
        text.push_str(&format!("{k},{theta:.6e},{range:.6e}\n"));
    }
    fs::write(out.join("estimates.csv"), text)?;

    if let Some(spec) = &output.spectrum {
        let mut text = String::from("theta_deg,range_m,music_value\n");
        for (i, &theta) in spec.theta_grid.iter().enumerate() {
            for (j, &range) in spec.range_grid.iter().enumerate() {
                text.push_str(&format!("{theta:.6e},{range:.6e},{:.6e}\n", spec.values[(i, j)]));
            }
        }
        fs::write(out.join("spectrum.csv"), text)?;
    }
    if trace && !output.admm_trace.is_empty() {
        let mut text = String::from("iter,objective,primal_res,dual_res\n");
        for row in &output.admm_trace {
            text.push_str(&format!(
                "{},{:.6e},{:.6e},{:.6e}\n",
                row.iter, row.objective, row.primal_res, row.dual_res
            ));
        }
        fs::write(out.join("admm_trace.csv"), text)?;
    }
    if trace {
        if let Some(ct) = &output.crm_trace {
            let mut text = String::from("iter,objective,coupling,rank_p,rank_f\n");
            for row in &ct.rows {
                text.push_str(&format!(
                    "{},{:.6e},{:.6e},{},{}\n",
                    row.iter, row.objective, row.coupling, row.rank_p, row.rank_f
                ));
            }
            fs::write(out.join("crm_trace.csv"), text)?;
        }
    }
    for (k, (theta, range)) in output.result.estimates.iter().enumerate() {
        println!("target {k}: theta = {theta:.3} deg, range = {range:.1} m");
    }
    Ok(())
}

fn montecarlo(config: &Path, out: &Path) -> Result<()> {
    let cfg = ScenarioConfig::from_path(config)?;
    let report = run_monte_carlo(&cfg)?;
    fs::create_dir_all(out)?;
    let path = out.join("rmse.csv");
    report.write_csv(&path)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn crb(config: &Path, out: Option<PathBuf>) -> Result<()> {
    let cfg = ScenarioConfig::from_path(config)?;
    let layout = cfg.build_layout()?;
    let scene = cfg.build_scene()?;
    let fim = coarray_fim(&layout, &scene)?;
    let mut text = String::from("k,theta_deg,range_m,crb_theta_deg2,crb_range_m2\n");
    for (k, target) in scene.targets.iter().enumerate() {
        text.push_str(&format!(
            "{k},{:.6e},{:.6e},{:.6e},{:.6e}\n",
            target.theta_deg, target.range_m, fim.crb_theta[k], fim.crb_range[k]
        ));
    }
    if fim.singular {
        text.push_str("# warning: FIM required a pseudo-inverse; bounds flagged singular\n");
    }
    emit(text, out)
}
