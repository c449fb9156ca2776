//! Configuration-driven experiment runner.

pub mod config;
mod run;
pub mod scenario;

use std::fmt::Write;
use std::path::Path;

pub use config::{load_config, parse_config, validate_config, ExperimentConfig, ScenarioId, Setup};
pub use run::{
    configure_workers, execute, load_report, run, PhaseSummary, PlotEntry, RunLock, RunReport, Summaries, WaveSummary,
    SCHEMA_VERSION,
};

use crate::error::Result;
use crate::verify::{Bound, Outcome};

/// Bundled configurations, by file name.
pub const BUNDLED_CONFIGS: [(&str, &str); 2] = [
    (
        "wave_1d_default.json",
        include_str!("../../configs/wave_1d_default.json"),
    ),
    (
        "radial_2d_default.json",
        include_str!("../../configs/radial_2d_default.json"),
    ),
];

/// Outcome of `validate`: the derived step and Lipschitz bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Validation {
    pub scenario: ScenarioId,
    pub dt: f64,
    pub lipschitz: f64,
    pub verifiers: Vec<&'static str>,
}

/// Schema and hypothesis checks of a config file, without side effects.
pub fn validate(path: &Path) -> Result<Validation> {
    let cfg = load_config(path)?;
    let setup = validate_config(&cfg)?;
    Ok(Validation {
        scenario: cfg.scenario,
        dt: setup.integrator.dt,
        lipschitz: setup.integrator.lipschitz,
        verifiers: cfg.verifiers.names(),
    })
}

fn outcome_label(o: Outcome) -> &'static str {
    match o {
        Outcome::Pass => "pass",
        Outcome::Fail => "FAIL",
        Outcome::HypothesisUnmet => "hypothesis unmet",
        Outcome::Error => "ERROR",
    }
}

/// Markdown summary of a report.
pub fn render_summary(report: &RunReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# skewlab run: {}", report.config.scenario);
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "schema {}, version {}, seed {}, dt {:.6}, L {:.4}, wall clock {:.1} s",
        report.schema,
        report.version,
        report.config.seed,
        report.summaries.dt,
        report.summaries.lipschitz,
        report.wall_clock_s
    );
    let _ = writeln!(s);
    if report.verifiers.is_empty() {
        let _ = writeln!(s, "No verifiers selected.");
    } else {
        let _ = writeln!(s, "| verifier | outcome | measured | bound | runtime (s) |");
        let _ = writeln!(s, "|---|---|---|---|---|");
        for v in &report.verifiers {
            let m = v.measured.map(|m| format!("{m:.3e}")).unwrap_or_else(|| "-".into());
            let op = if v.bound == Bound::Lower { ">=" } else { "<=" };
            let _ = writeln!(
                s,
                "| {} | {} | {} | {} {:e} | {:.2} |",
                v.name,
                outcome_label(v.outcome),
                m,
                op,
                v.tolerance,
                v.runtime_s
            );
        }
        for v in &report.verifiers {
            for n in &v.notes {
                let _ = writeln!(s, "\n- {}: {}", v.name, n);
            }
        }
    }
    let sm = &report.summaries;
    if let Some(w) = &sm.wave {
        let _ = writeln!(s, "\nmean front speed {:.9}", w.mean_speed);
    }
    if let Some(o) = &sm.omega {
        let _ = writeln!(s, "omega-limit diagnostic {:.3e} ({:?})", o.diagnostic, o.status);
    }
    if let Some(m) = &sm.stability {
        for r in &m.rows {
            let _ = writeln!(s, "delta({}) = {}", r.eps, r.delta);
        }
    }
    if let Some(e) = &sm.stability_error {
        let _ = writeln!(s, "stability probe: {e}");
    }
    if let Some(p) = &sm.phase {
        let _ = writeln!(s, "asymptotic phase sigma* = {:.6}", p.sigma_star);
    }
    s
}
