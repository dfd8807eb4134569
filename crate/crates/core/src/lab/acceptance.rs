//! Pass/fail evaluation of a finished run against relative decay
//! thresholds and tolerances. Every verdict is computed from the record
//! series alone.

use serde::{Deserialize, Serialize};

use super::config::Config;
use super::experiment::{is_unperturbed, DiagnosticsRecord, ExperimentResult, RunStatus};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Thresholds {
    pub conservation: f64,
    /// `||u~(t_final)||_Linf <= factor * max_t ||u~||_Linf`
    pub u_decay_factor: f64,
    /// last-quarter mean `|Xdot|` over first-quarter mean
    pub xdot_decay_factor: f64,
    pub xdot_final: f64,
    pub scheme_error: f64,
}

impl Thresholds {
    pub fn from_config(config: &Config) -> Self {
        let t = &config.tolerances;
        Self {
            conservation: t.conservation,
            u_decay_factor: 0.5,
            xdot_decay_factor: 0.25,
            xdot_final: t.xdot_final,
            scheme_error: t.scheme_error,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// The run itself did not complete.
    Failed,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: Option<f64>,
    pub limit: Option<f64>,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, measured: f64, limit: f64, detail: impl Into<String>) -> Self {
        let finite = |x: f64| if x.is_finite() { Some(x) } else { None };
        Self {
            name: name.into(),
            passed,
            measured: finite(measured),
            limit: finite(limit),
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AcceptanceReport {
    pub verdict: Verdict,
    pub violations: Vec<String>,
    pub abort_reason: Option<String>,
    pub checks: Vec<Check>,
}

/// Decay measurements on a record series.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DecayMeasures {
    pub u_final: f64,
    pub u_max: f64,
    pub xdot_first_quarter: f64,
    pub xdot_last_quarter: f64,
    pub xdot_final: f64,
    /// Largest increase of `|X/t|` between consecutive records in the last half.
    pub x_over_t_max_increase: f64,
}

pub fn decay_measures(records: &[DiagnosticsRecord]) -> Option<DecayMeasures> {
    let first = records.first()?;
    let last = records.last()?;
    let (t0, t1) = (first.t, last.t);
    if !(t1 > t0) {
        return None;
    }
    let span = t1 - t0;
    let mean_abs = |lo: f64, hi: f64| {
        let sel: Vec<f64> = records
            .iter()
            .filter(|r| r.t >= lo - 1e-12 && r.t <= hi + 1e-12)
            .map(|r| r.xdot.abs())
            .collect();
        sel.iter().sum::<f64>() / sel.len().max(1) as f64
    };
    let u_max = records.iter().map(|r| r.u_linf).fold(0.0, f64::max);
    let half: Vec<&DiagnosticsRecord> = records.iter().filter(|r| r.t >= t0 + 0.5 * span && r.t > 0.0).collect();
    let mut worst = f64::NEG_INFINITY;
    for w in half.windows(2) {
        let a = (w[0].x / w[0].t).abs();
        let b = (w[1].x / w[1].t).abs();
        worst = worst.max(b - a);
    }
    Some(DecayMeasures {
        u_final: last.u_linf,
        u_max,
        xdot_first_quarter: mean_abs(t0, t0 + 0.25 * span),
        xdot_last_quarter: mean_abs(t1 - 0.25 * span, t1),
        xdot_final: last.xdot.abs(),
        x_over_t_max_increase: worst,
    })
}

/// Largest `|Xdot| - C_shift ||u~||_Linf` over the records.
fn shift_envelope_excess(records: &[DiagnosticsRecord], c_shift: f64) -> f64 {
    records
        .iter()
        .map(|r| r.xdot.abs() - c_shift * r.u_linf * (1.0 + 1e-12))
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn acceptance_report(result: &ExperimentResult, th: &Thresholds) -> AcceptanceReport {
    let recs = &result.records;
    let mut checks = Vec::new();

    let cons = recs
        .iter()
        .map(|r| r.delta_mass.abs().max(r.delta_momentum.abs()))
        .fold(0.0, f64::max);
    checks.push(Check::new(
        "conservation",
        cons < th.conservation,
        cons,
        th.conservation,
        "max |mass or momentum change net of boundary fluxes|",
    ));

    let nonneg = recs.iter().all(|r| {
        [
            r.v_linf, r.v_l2, r.v_h1, r.v_h2, r.u_linf, r.u_l2, r.u_h1, r.u_h2, r.phi_h1, r.phi_h2, r.phi_h3, r.g1,
            r.gs, r.d,
        ]
        .iter()
        .all(|x| *x >= 0.0)
    });
    checks.push(Check::new("norms-nonnegative", nonneg, f64::NAN, f64::NAN, "all norm and good-term columns >= 0"));

    let mono = recs.windows(2).all(|w| w[1].cumulative >= w[0].cumulative);
    checks.push(Check::new("cumulative-nondecreasing", mono, f64::NAN, f64::NAN, "cumulative dissipation integral"));

    let unperturbed = is_unperturbed(&result.config);
    match result.constants.c_shift {
        Some(c) => {
            let excess = shift_envelope_excess(recs, c);
            checks.push(Check::new(
                "shift-envelope",
                c.is_finite() && excess <= 0.0,
                c,
                f64::NAN,
                "|Xdot| <= C_shift ||u~||_Linf on every record",
            ));
        }
        None if unperturbed => {}
        None => checks.push(Check::new("shift-envelope", false, f64::NAN, f64::NAN, "C_shift undefined")),
    }

    if unperturbed {
        let pert = recs.iter().map(|r| r.u_linf.max(r.v_linf)).fold(0.0, f64::max);
        checks.push(Check::new(
            "traveling-wave",
            pert <= th.scheme_error,
            pert,
            th.scheme_error,
            "max perturbation of the unperturbed run",
        ));
        let xmax = recs.iter().map(|r| r.x.abs()).fold(0.0, f64::max);
        checks.push(Check::new("shift-stays-zero", xmax <= th.scheme_error, xmax, th.scheme_error, "max |X|"));
    } else {
        if let (Some(c), Some(cap)) = (result.constants.entsim_c, result.constants.entsim_cap) {
            checks.push(Check::new(
                "entsim-envelope",
                c > 0.0 && cap.is_finite() && c <= cap,
                c,
                cap,
                "measured c and C in c quad <= eta <= C quad",
            ));
        }
        let c_emp = result.constants.c_emp.unwrap_or(f64::NAN);
        checks.push(Check::new("apriori-ratio", c_emp.is_finite(), c_emp, f64::NAN, "C_emp finite"));
        if let Some(d) = decay_measures(recs) {
            checks.push(Check::new(
                "u-decay",
                d.u_final <= th.u_decay_factor * d.u_max,
                d.u_final / d.u_max,
                th.u_decay_factor,
                "||u~(t_final)||_Linf / max_t ||u~||_Linf",
            ));
            checks.push(Check::new(
                "xdot-decay",
                d.xdot_last_quarter <= th.xdot_decay_factor * d.xdot_first_quarter,
                d.xdot_last_quarter / d.xdot_first_quarter,
                th.xdot_decay_factor,
                "mean |Xdot| last quarter / first quarter",
            ));
            checks.push(Check::new(
                "xdot-final",
                d.xdot_final <= th.xdot_final,
                d.xdot_final,
                th.xdot_final,
                "|Xdot(t_final)|",
            ));
            checks.push(Check::new(
                "sublinear-shift",
                d.x_over_t_max_increase <= 0.0,
                d.x_over_t_max_increase,
                0.0,
                "largest increase of |X/t| over the last half",
            ));
        }
    }

    let abort_reason = match &result.status {
        RunStatus::Completed => None,
        RunStatus::Aborted { t, reason } => Some(format!("aborted at t = {t}: {reason}")),
    };
    let violations: Vec<String> = checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect();
    let verdict = if abort_reason.is_some() {
        Verdict::Failed
    } else if violations.is_empty() {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    AcceptanceReport {
        verdict,
        violations,
        abort_reason,
        checks,
    }
}
