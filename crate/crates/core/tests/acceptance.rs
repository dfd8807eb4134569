//! Acceptance suite. Runs without the libtest harness so every criterion
//! prints its `PASS`/`FAIL` line; exits nonzero if any criterion fails.

use std::sync::OnceLock;

use nsplab::evolve::Form;
use nsplab::lab::acceptance::decay_measures;
use nsplab::lab::config::Derived;
use nsplab::lab::studies::{decay_config, elliptic_ensemble, sup_difference, sweep, traveling_wave_run, TravelingWaveRun};
use nsplab::lab::{run_with_profile, ExperimentResult};
use nsplab::profile::{shock_speed, solve_profile, verify_profile, ProfileParams, ShockProfile};
use nsplab::relent::{lemma_check_on, rel_bounds};
use nsplab::Grid;

const AMPLITUDE: f64 = 0.01;
const DECAY_CELLS: usize = 4000;
const DECAY_T: f64 = 200.0;
/// Horizon of the refined shift-bound run.
const SHIFT_T: f64 = 50.0;

fn report(id: u32, passed: bool, what: &str) {
    println!("{} criterion {id:>2}: {what}", if passed { "PASS" } else { "FAIL" });
}

fn profile() -> &'static ShockProfile {
    static P: OnceLock<ShockProfile> = OnceLock::new();
    P.get_or_init(|| {
        let es = shock_speed(1.0, 0.0, 1.2).unwrap();
        solve_profile(&es, &ProfileParams::default()).unwrap()
    })
}

fn derived(n_cells: usize, t_final: f64) -> Derived {
    decay_config(AMPLITUDE, n_cells, t_final).derive().unwrap()
}

/// Gaussian runs at `A`, `A/2`, `A/4` to `t = 200`.
fn decay_runs() -> &'static Vec<ExperimentResult> {
    static R: OnceLock<Vec<ExperimentResult>> = OnceLock::new();
    R.get_or_init(|| {
        let configs: Vec<_> = [1.0, 0.5, 0.25]
            .iter()
            .map(|s| decay_config(AMPLITUDE * s, DECAY_CELLS, DECAY_T))
            .collect();
        sweep(&configs, &derived(DECAY_CELLS, DECAY_T), profile())
            .into_iter()
            .map(|r| r.unwrap())
            .collect()
    })
}

/// Traveling-wave runs on `L = 60/delta`, `T = 5/sigma`: (N, form) for
/// N in {4096, 8192} and both forms.
fn wave_runs() -> &'static Vec<TravelingWaveRun> {
    static R: OnceLock<Vec<TravelingWaveRun>> = OnceLock::new();
    R.get_or_init(|| {
        let p = profile();
        let t = 5.0 / p.endstates.sigma;
        let mut out = Vec::new();
        for n in [4096, 8192] {
            for form in [Form::Divergence, Form::Primitive] {
                out.push(traveling_wave_run(p, 60.0, n, t, form).unwrap());
            }
        }
        out
    })
}

fn criterion_01_rankine_hugoniot() {
    let es = shock_speed(1.0, 0.0, 1.2).unwrap();
    let res = es.rh_residuals();
    let ok = (es.sigma - 1.290994).abs() <= 1e-6
        && (es.u_plus + 0.258199).abs() <= 1e-6
        && res.iter().all(|r| r.abs() < 1e-12);
    report(
        1,
        ok,
        &format!("sigma = {:.9}, u+ = {:.9}, RH residuals = {:.2e}, {:.2e}", es.sigma, es.u_plus, res[0], res[1]),
    );
    assert!(ok);
}

fn criterion_02_profile_fidelity() {
    let r = verify_profile(profile(), 2);
    let ok = r.farfield_residuals.iter().all(|x| *x < 1e-6)
        && r.v_increasing
        && r.ratio_sign_ok
        && (3.0..=5.0).contains(&r.pde_residual_ratio);
    report(
        2,
        ok,
        &format!(
            "far field {:.2e}/{:.2e}, v monotone {}, phi'/u' in [{:.4}, {:.4}], residual {:.3e} -> {:.3e} (ratio {:.3})",
            r.farfield_residuals[0],
            r.farfield_residuals[1],
            r.v_increasing,
            r.ratio_bounds.0,
            r.ratio_bounds.1,
            r.pde_residual_norm.0,
            r.pde_residual_norm.1,
            r.pde_residual_ratio
        ),
    );
    assert!(ok);
}

fn criterion_03_traveling_wave_exactness() {
    let runs = wave_runs();
    let (coarse, fine) = (&runs[0], &runs[2]);
    let ratio = coarse.sup_error / fine.sup_error;
    let ok = coarse.sup_error < 5e-3 && (2.8..=5.2).contains(&ratio);
    report(
        3,
        ok,
        &format!(
            "sup error N=4096 {:.3e}, N=8192 {:.3e}, ratio {:.3}",
            coarse.sup_error, fine.sup_error, ratio
        ),
    );
    assert!(ok);
}

fn criterion_04_form_equivalence() {
    let runs = wave_runs();
    let d_coarse = sup_difference(&runs[0], &runs[1]);
    let d_fine = sup_difference(&runs[2], &runs[3]);
    let ratio = d_coarse / d_fine;
    let ok = d_coarse < 1e-3 && (2.8..=5.2).contains(&ratio);
    report(
        4,
        ok,
        &format!("primitive vs divergence sup difference {d_coarse:.3e} -> {d_fine:.3e} (ratio {ratio:.3})"),
    );
    assert!(ok);
}

fn criterion_05_relative_quantity_bounds() {
    let rep = lemma_check_on(0.95, 1.05, 0.1, 200).unwrap();
    let b = rel_bounds(1.2, 1.0).unwrap();
    let hand = (b.q - 0.0353569).abs() <= 1e-6
        && (b.relbd2_rhs - 0.0339506).abs() <= 1e-6
        && (b.relbd3_rhs - 0.0346667).abs() <= 1e-6;
    let ok = rep.relbd2_ok && rep.relbd3_ok && rep.samples == 40_000 && hand;
    report(
        5,
        ok,
        &format!(
            "{} samples, min margins {:.2e}/{:.2e}, Q = {:.7}, bounds {:.7} and {:.7}",
            rep.samples, rep.relbd2_margin, rep.relbd3_margin, b.q, b.relbd2_rhs, b.relbd3_rhs
        ),
    );
    assert!(ok);
}

fn criterion_06_decay_without_zero_mass() {
    let run = &decay_runs()[0];
    let mass = run.initial_mass;
    let d = decay_measures(&run.records).unwrap();
    let ok = run.completed()
        && (mass - 0.1253).abs() < 1e-3
        && d.u_final <= 0.5 * d.u_max
        && d.xdot_last_quarter <= 0.25 * d.xdot_first_quarter
        && d.x_over_t_max_increase <= 0.0;
    report(
        6,
        ok,
        &format!(
            "mass {:.4}, |u~| final/max {:.3}, mean|Xdot| last/first quarter {:.3e}, max increase of |X/t| {:.2e}",
            mass,
            d.u_final / d.u_max,
            d.xdot_last_quarter / d.xdot_first_quarter,
            d.x_over_t_max_increase
        ),
    );
    assert!(ok);
}

fn criterion_07_apriori_ratio() {
    let c: Vec<f64> = decay_runs().iter().map(|r| r.constants.c_emp.unwrap_or(f64::NAN)).collect();
    let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spread = (hi - lo) / lo;
    let ok = c.iter().all(|x| x.is_finite()) && spread < 0.5;
    report(7, ok, &format!("C_emp for A, A/2, A/4 = {c:.4?}, spread {:.2}%", 100.0 * spread));
    assert!(ok);
}

fn criterion_08_shift_bound() {
    let runs = decay_runs();
    let all_finite = runs.iter().all(|r| r.constants.c_shift.is_some_and(f64::is_finite));
    let cfg = decay_config(AMPLITUDE, 2 * DECAY_CELLS, SHIFT_T);
    let fine = run_with_profile(&cfg, &derived(2 * DECAY_CELLS, SHIFT_T), profile()).unwrap();
    let horizon = |r: &ExperimentResult| {
        r.records
            .iter()
            .filter(|x| x.t <= SHIFT_T + 1e-9 && x.u_linf > 1e-14)
            .map(|x| x.xdot.abs() / x.u_linf)
            .fold(0.0, f64::max)
    };
    let (c1, c2) = (horizon(&runs[0]), horizon(&fine));
    let change = (c2 - c1).abs() / c1;
    let ok = all_finite && fine.completed() && c1.is_finite() && c2.is_finite() && change < 0.2;
    report(
        8,
        ok,
        &format!(
            "C_shift on t <= {SHIFT_T}: N={DECAY_CELLS} {c1:.4}, N={} {c2:.4}, change {:.2}%; full runs {:?}",
            2 * DECAY_CELLS,
            100.0 * change,
            runs.iter().map(|r| r.constants.c_shift.unwrap_or(f64::NAN)).collect::<Vec<_>>()
        ),
    );
    assert!(ok);
}

fn criterion_09_entropy_equivalence() {
    let runs = decay_runs();
    let env_ok = runs.iter().all(|r| {
        r.records
            .iter()
            .all(|x| x.entsim_min > 0.0 && x.entsim_max.is_finite() && x.entsim_min <= x.entsim_max)
    });
    let c = runs.iter().filter_map(|r| r.constants.entsim_c).fold(f64::INFINITY, f64::min);
    let cap = runs.iter().filter_map(|r| r.constants.entsim_cap).fold(0.0, f64::max);
    let at = |r: &ExperimentResult, t: f64| {
        r.records
            .iter()
            .find(|x| (x.t - t).abs() < 1e-9)
            .map(|x| x.eta_weighted)
            .unwrap()
    };
    let mut worst: f64 = 0.0;
    for t in [0.0, 10.0, 25.0, 50.0] {
        for k in 0..2 {
            let q = at(&runs[k], t) / at(&runs[k + 1], t) / 4.0;
            worst = worst.max((q - 1.0).abs());
        }
    }
    let ok = env_ok && c > 0.0 && c <= cap && worst <= 0.05;
    report(
        9,
        ok,
        &format!("envelope c = {c:.4}, C = {cap:.4}; eta scaling worst deviation from 4x {:.2}%", 100.0 * worst),
    );
    assert!(ok);
}

fn criterion_10_elliptic_ratio() {
    let p = profile();
    let coarse = Grid::new(100.0, 1000).unwrap();
    let fine = coarse.refined(2);
    let a = elliptic_ensemble(p, &coarse, 20, 11).unwrap();
    let b = elliptic_ensemble(p, &fine, 20, 11).unwrap();
    let ma = a.iter().copied().fold(0.0, f64::max);
    let mb = b.iter().copied().fold(0.0, f64::max);
    let change = (mb - ma).abs() / ma;
    let ok = ma.is_finite() && mb.is_finite() && ma > 0.0 && change <= 0.2;
    report(
        10,
        ok,
        &format!("max ||phi~||_H1/||v~||_L2: N=1000 {ma:.4}, N=2000 {mb:.4}, change {:.2}%", 100.0 * change),
    );
    assert!(ok);
}

fn criterion_11_conservation() {
    let runs = wave_runs();
    let c = &runs[0].conservation;
    let ok = c.delta_mass.abs() < 1e-6 && c.delta_momentum.abs() < 1e-6;
    report(
        11,
        ok,
        &format!("delta mass {:.2e}, delta momentum {:.2e} (divergence form, N=4096)", c.delta_mass, c.delta_momentum),
    );
    assert!(ok);
}

fn main() {
    let criteria: [(&str, fn()); 11] = [
        ("criterion_01_rankine_hugoniot", criterion_01_rankine_hugoniot),
        ("criterion_02_profile_fidelity", criterion_02_profile_fidelity),
        ("criterion_03_traveling_wave_exactness", criterion_03_traveling_wave_exactness),
        ("criterion_04_form_equivalence", criterion_04_form_equivalence),
        ("criterion_05_relative_quantity_bounds", criterion_05_relative_quantity_bounds),
        ("criterion_06_decay_without_zero_mass", criterion_06_decay_without_zero_mass),
        ("criterion_07_apriori_ratio", criterion_07_apriori_ratio),
        ("criterion_08_shift_bound", criterion_08_shift_bound),
        ("criterion_09_entropy_equivalence", criterion_09_entropy_equivalence),
        ("criterion_10_elliptic_ratio", criterion_10_elliptic_ratio),
        ("criterion_11_conservation", criterion_11_conservation),
    ];
    let mut failed = Vec::new();
    for (name, f) in criteria {
        if std::panic::catch_unwind(f).is_err() {
            failed.push(name);
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed.len(), criteria.len());
    if !failed.is_empty() {
        println!("failed: {}", failed.join(", "));
        std::process::exit(1);
    }
}
