use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use nsplab::evolve::Form;
use nsplab::lab::config::{Config, Derived, CONFIG_VERSION};
use nsplab::lab::studies::elliptic_ensemble;
use nsplab::lab::{acceptance_report, emit, load_config, run_with_profile, Thresholds, Verdict};
use nsplab::poisson::{solve_phi, trf_residual};
use nsplab::profile::{shock_speed, solve_profile, verify_profile, ProfileParams, ShockProfile};
use nsplab::relent::lemma21_check;
use nsplab::shift::weight_a;
use nsplab::Grid;

#[derive(Parser)]
#[command(name = "nsplab", version, about = "Navier-Stokes-Poisson shock profile laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment configuration (TOML)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides the configured one
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    form: Option<FormArg>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormArg {
    Primitive,
    Divergence,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Lemma21,
    Trf,
    EllipticRatio,
    WeightBounds,
}

#[derive(Subcommand)]
enum Command {
    /// Build and verify the shock profile
    Profile {
        #[command(flatten)]
        common: Common,
        /// Refinement factor of the residual study
        #[arg(long, default_value_t = 2)]
        refine: usize,
    },
    /// Run a single experiment
    Run {
        #[command(flatten)]
        common: Common,
    },
    /// Run an amplitude sweep in parallel
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Amplitude multipliers, comma separated
        #[arg(long, value_delimiter = ',', default_value = "1,0.5,0.25")]
        scales: Vec<f64>,
    },
    /// Run a property suite
    Check {
        #[arg(value_enum)]
        suite: Suite,
        #[command(flatten)]
        common: Common,
    },
}

/// Reference setup used when no config is given.
const DEFAULT_CONFIG: &str = r#"
version = 1
name = "reference"
[endstates]
v_minus = 1.0
v_plus = 1.2
[grid]
half_width = 400.0
n_cells = 4000
[time]
t_final = 200.0
[perturbation]
family = "gaussian"
amplitude = 0.01
width = 5.0
"#;

fn load(common: &Common) -> anyhow::Result<Config> {
    let mut cfg = match &common.config {
        Some(p) => load_config(p).with_context(|| format!("loading {}", p.display()))?,
        None => Config::from_toml(DEFAULT_CONFIG)?,
    };
    debug_assert_eq!(cfg.version, CONFIG_VERSION);
    if let Some(f) = common.form {
        cfg.form = match f {
            FormArg::Primitive => Form::Primitive,
            FormArg::Divergence => Form::Divergence,
        };
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(o) = &common.out {
        cfg.output.dir = o.clone();
    }
    Ok(cfg)
}

fn build_profile(cfg: &Config) -> anyhow::Result<(Derived, ShockProfile)> {
    let d = cfg.derive()?;
    log::info!(
        "sigma = {:.9}, delta_S = {:.9}, C* = {:.6}, M = {:.6}",
        d.endstates.sigma,
        d.endstates.delta_s,
        d.constants.c_star,
        d.constants.m
    );
    let p = solve_profile(&d.endstates, &cfg.profile)?;
    log::info!("profile: {} nodes on [{:.2}, {:.2}] via {:?}", p.len(), p.xi_range().0, p.xi_range().1, p.meta.method);
    Ok((d, p))
}

fn write_json(path: &Path, value: &serde_json::Value) -> anyhow::Result<()> {
    std::fs::create_dir_all(path.parent().unwrap_or(Path::new(".")))?;
    std::fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn cmd_profile(common: &Common, refine: usize) -> anyhow::Result<bool> {
    let cfg = load(common)?;
    let (_, p) = build_profile(&cfg)?;
    let report = verify_profile(&p, refine);
    let dir = &cfg.output.dir;
    std::fs::create_dir_all(dir)?;
    p.write_json(dir.join("profile.json"))?;
    write_json(&dir.join("profile_report.json"), &serde_json::to_value(&report)?)?;
    let cols = [("vbar", &p.vbar), ("ubar", &p.ubar), ("phibar", &p.phibar)];
    for (name, y) in cols {
        nsplab::lab::emit::write_series(&dir.join(format!("{name}.dat")), &p.xi_nodes, y)?;
    }
    let ok = report.passes(1e-6);
    println!("{}", serde_json::to_string_pretty(&report)?);
    println!("profile verification: {}", if ok { "pass" } else { "fail" });
    Ok(ok)
}

fn cmd_run(common: &Common) -> anyhow::Result<bool> {
    let cfg = load(common)?;
    let (d, p) = build_profile(&cfg)?;
    let result = run_with_profile(&cfg, &d, &p)?;
    let report = acceptance_report(&result, &Thresholds::from_config(&cfg));
    let files = emit(&result, &report, &cfg.output.dir)?;
    println!("wrote {} files to {}", files.len(), cfg.output.dir.display());
    for c in &report.checks {
        println!("  {:<26} {}", c.name, if c.passed { "ok" } else { "FAILED" });
    }
    println!("verdict: {:?}", report.verdict);
    Ok(report.verdict == Verdict::Pass)
}

fn cmd_sweep(common: &Common, scales: &[f64]) -> anyhow::Result<bool> {
    let base = load(common)?;
    let (d, p) = build_profile(&base)?;
    let configs: Vec<Config> = scales
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let mut c = base.clone();
            c.perturbation.amplitude *= s;
            c.name = format!("{}-scale{s}", base.name);
            c.output.dir = base.output.dir.join(format!("run{k:02}"));
            c
        })
        .collect();
    let results: Vec<_> = configs.par_iter().map(|c| run_with_profile(c, &d, &p)).collect();
    let mut rows = Vec::new();
    let mut all_pass = true;
    for (c, r) in configs.iter().zip(results) {
        let r = r?;
        let report = acceptance_report(&r, &Thresholds::from_config(c));
        emit(&r, &report, &c.output.dir)?;
        all_pass &= report.verdict == Verdict::Pass;
        rows.push(json!({
            "amplitude": c.perturbation.amplitude,
            "dir": c.output.dir,
            "verdict": report.verdict,
            "constants": r.constants,
        }));
    }
    let c_emp: Vec<f64> = rows
        .iter()
        .filter_map(|r| r["constants"]["c_emp"].as_f64())
        .collect();
    let spread = match (
        c_emp.iter().copied().reduce(f64::min),
        c_emp.iter().copied().reduce(f64::max),
    ) {
        (Some(lo), Some(hi)) if lo > 0.0 => Some((hi - lo) / lo),
        _ => None,
    };
    let summary = json!({ "runs": rows, "c_emp_spread": spread });
    write_json(&base.output.dir.join("sweep.json"), &summary)?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(all_pass && spread.is_some_and(|s| s < 0.5))
}

fn cmd_check(suite: Suite, common: &Common) -> anyhow::Result<bool> {
    let cfg = load(common)?;
    let e = &cfg.endstates;
    let (name, passed, body) = match suite {
        Suite::Lemma21 => {
            let rep = lemma21_check(e.v_minus, 0.1 * e.v_minus, 200)?;
            ("lemma21", rep.relbd2_ok && rep.relbd3_ok, serde_json::to_value(&rep)?)
        }
        Suite::WeightBounds => {
            let es = shock_speed(e.v_minus, e.u_minus, e.v_plus)?;
            let p = solve_profile(&es, &cfg.profile)?;
            let (lo, hi) = p.xi_range();
            let xs: Vec<f64> = (0..=4000).map(|k| lo - 10.0 + (hi - lo + 20.0) * k as f64 / 4000.0).collect();
            let a: Vec<f64> = xs.iter().map(|&x| weight_a(&p, x)).collect();
            let top = 1.0 + es.delta_s.sqrt();
            let bounded = a.iter().all(|&w| (1.0 - 1e-12..=top + 1e-12).contains(&w));
            let monotone = a.windows(2).all(|w| w[1] >= w[0]);
            let body = json!({
                "min": a.iter().copied().fold(f64::INFINITY, f64::min),
                "max": a.iter().copied().fold(0.0, f64::max),
                "upper_bound": top,
                "bounded": bounded,
                "nondecreasing": monotone,
            });
            ("weight-bounds", bounded && monotone, body)
        }
        Suite::Trf => {
            let es = shock_speed(e.v_minus, e.u_minus, e.v_plus)?;
            let p = solve_profile(&es, &ProfileParams::default())?;
            let mut norms = Vec::new();
            for n in [1000usize, 2000] {
                let g = Grid::new(60.0, n)?;
                let v = p.sample_on_grid(&g, 0.0, 0.0).v;
                let phi = solve_phi(&v, &g, (es.phi_minus, es.phi_plus), None)?;
                norms.push(trf_residual(&v, &phi.phi, &g)?);
            }
            let ratio = norms[0] / norms[1];
            let body = json!({ "residuals": norms, "ratio": ratio });
            ("trf", (3.0..=5.0).contains(&ratio), body)
        }
        Suite::EllipticRatio => {
            let es = shock_speed(e.v_minus, e.u_minus, e.v_plus)?;
            let p = solve_profile(&es, &cfg.profile)?;
            let g = Grid::new(100.0, 1000)?;
            let a = elliptic_ensemble(&p, &g, 20, cfg.seed)?;
            let b = elliptic_ensemble(&p, &g.refined(2), 20, cfg.seed)?;
            let ma = a.iter().copied().fold(0.0, f64::max);
            let mb = b.iter().copied().fold(0.0, f64::max);
            let change = (mb - ma).abs() / ma;
            let body = json!({ "max_coarse": ma, "max_fine": mb, "relative_change": change });
            ("elliptic-ratio", ma.is_finite() && change <= 0.2, body)
        }
    };
    let doc = json!({ "suite": name, "passed": passed, "report": body });
    if let Some(out) = &common.out {
        write_json(&out.join(format!("check_{name}.json")), &doc)?;
    }
    println!("{}", serde_json::to_string_pretty(&doc)?);
    Ok(passed)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Profile { common, refine } => cmd_profile(common, *refine),
        Command::Run { common } => cmd_run(common),
        Command::Sweep { common, scales } => {
            if scales.is_empty() {
                Err(anyhow::anyhow!("no scales given"))
            } else {
                cmd_sweep(common, scales)
            }
        }
        Command::Check { suite, common } => cmd_check(*suite, common),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

