use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{
    validate_config, EquivarianceSpec, ExperimentConfig, PerturbationSpec, PhaseSpec, ReactionSpec, ScenarioId, Setup,
};
use super::scenario::{calibrate_wave, initial_profile, CalibrationRound};
use crate::error::{LabError, Result};
use crate::group::GroupElement;
use crate::orbit::{
    omega_limit, one_cover_check, perturbation_ensemble, stability_probe, OmegaLimitEstimate, OmegaLimitSummary,
    StabilityModulus,
};
use crate::profile::{hausdorff, Grid, Profile, ProfileSet};
use crate::quasi_periodic::{QPSignal, TorusPhase};
use crate::semiflow::{front_position, integrate, write_trajectory_csv, IntegratorConfig, Problem, SkewState};
use crate::verify::{
    check_decay_bound, check_equivariance, check_monotone, check_spatial_monotonicity, check_symmetry,
    check_total_order, check_wedge_order, extract_asymptotic_phase, supersolution_pair, DecayScenario, Outcome,
    PhaseOptions, SupersolutionPair, VerifierReport,
};

/// Version of the report layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveSummary {
    pub mean_speed: f64,
    pub drift: QPSignal,
    pub rounds: Vec<CalibrationRound>,
    pub front_position: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSummary {
    pub sigma_star: f64,
    pub spread: f64,
    pub final_residual: f64,
    pub residual_decreasing: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Summaries {
    pub dt: f64,
    pub lipschitz: f64,
    pub transient_steps: usize,
    /// Sup norm of the profile the analyses start from.
    pub cover_sup_norm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wave: Option<WaveSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<OmegaLimitSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stability: Option<StabilityModulus>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stability_error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<PhaseSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub supersolution: Option<SupersolutionPair>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: u32,
    pub version: String,
    pub config: ExperimentConfig,
    pub verifiers: Vec<VerifierReport>,
    pub summaries: Summaries,
    pub wall_clock_s: f64,
}

impl RunReport {
    /// 0 all pass, 1 any failure or verifier error, 3 only unmet hypotheses.
    pub fn exit_code(&self) -> i32 {
        let any = |o| self.verifiers.iter().any(|v| v.outcome == o);
        if any(Outcome::Fail) || any(Outcome::Error) {
            1
        } else if any(Outcome::HypothesisUnmet) {
            3
        } else {
            0
        }
    }

    pub fn verifier(&self, name: &str) -> Option<&VerifierReport> {
        self.verifiers.iter().find(|v| v.name == name)
    }
}

/// Exclusive claim on an output directory, released on drop.
pub struct RunLock {
    path: PathBuf,
}

impl RunLock {
    pub const FILE: &'static str = ".skewlab.lock";

    pub fn acquire(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        let path = dir.join(Self::FILE);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                writeln!(f, "{}", std::process::id())?;
                Ok(Self { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(LabError::Io(format!(
                "{} is locked by another run (remove {} if stale)",
                dir.display(),
                path.display()
            ))),
            Err(e) => Err(e.into()),
        }
    }
}

impl Drop for RunLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

/// Sizes the global worker pool from `SKEWLAB_WORKERS`, if set.
pub fn configure_workers() -> Result<()> {
    if let Ok(v) = std::env::var("SKEWLAB_WORKERS") {
        let n: usize = v
            .parse()
            .map_err(|_| LabError::InvalidArgument(format!("SKEWLAB_WORKERS must be a positive integer, got {v:?}")))?;
        if n == 0 {
            return Err(LabError::InvalidArgument("SKEWLAB_WORKERS must be positive".into()));
        }
        // a pool that is already built keeps its size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Nearest multiple of `dt`.
fn snap(t: f64, dt: f64) -> f64 {
    (t / dt).round() * dt
}

/// Context shared by the verifiers of one run.
struct Context<'a> {
    cfg: &'a ExperimentConfig,
    setup: &'a Setup,
    /// Problem the analyses run on (the moving frame for waves).
    problem: Problem,
    config: IntegratorConfig,
    cover: SkewState,
    initial: SkewState,
    omega: Option<Result<OmegaLimitEstimate>>,
    stability: Option<Result<StabilityModulus>>,
}

fn a_mean(cfg: &ExperimentConfig, setup: &Setup) -> Option<f64> {
    match &cfg.reaction {
        ReactionSpec::Bistable { a } => a.build(&setup.basis).ok().map(|s| s.mean()),
        _ => None,
    }
}

/// Runs a validated configuration without writing files.
pub fn execute(cfg: &ExperimentConfig) -> Result<(RunReport, Vec<SkewState>)> {
    let start = Instant::now();
    let setup = validate_config(cfg)?;
    let grid = setup.problem.grid.clone();
    let m = setup.basis.dim();
    let u0 = initial_profile(&cfg.initial, &grid, cfg.seed, a_mean(cfg, &setup))?;
    let initial = SkewState::new(u0, TorusPhase::zero(m));
    let dt = setup.integrator.dt;
    let transient = snap(cfg.transient, dt);
    let mut summaries = Summaries {
        dt,
        lipschitz: setup.integrator.lipschitz,
        transient_steps: (transient / dt).round() as usize,
        ..Summaries::default()
    };
    let mut trajectory = integrate(
        &initial,
        transient,
        &setup.problem,
        &setup.integrator,
        &(1..=10)
            .map(|k| snap(transient * k as f64 / 10.0, dt))
            .collect::<Vec<_>>(),
    )?;
    let after = trajectory.last().cloned().unwrap_or_else(|| initial.clone());
    let (problem, cover) = match (&cfg.scenario, &cfg.wave) {
        (ScenarioId::Wave1d, Some(w)) => {
            let cal = calibrate_wave(&setup.problem, &setup.integrator, &after, w)?;
            summaries.wave = Some(WaveSummary {
                mean_speed: cal.drift.mean(),
                drift: cal.drift.clone(),
                rounds: cal.rounds.clone(),
                front_position: front_position(&cal.cover.profile, w.level),
            });
            let times: Vec<f64> = (1..=20).map(|k| snap(k as f64, dt)).collect();
            trajectory = integrate(
                &cal.cover,
                *times.last().expect("times"),
                &cal.problem,
                &cal.config,
                &times,
            )?;
            (cal.problem, cal.cover)
        }
        _ => (setup.problem.clone(), after),
    };
    summaries.cover_sup_norm = cover.profile.sup_norm();
    let config = setup.integrator;
    let omega = cfg
        .orbit
        .as_ref()
        .map(|o| omega_limit(&cover, &problem, &config, o.eps_return, snap(o.horizon, dt), o.tol));
    let stability = cfg.stability.as_ref().map(|s| {
        let ensemble = perturbation_ensemble(&grid, s.ensemble_size, cfg.seed);
        stability_probe(
            &cover,
            &problem,
            &config,
            &s.eps,
            &ensemble,
            snap(s.horizon, dt),
            s.ladder_depth,
        )
    });
    if let Some(Ok(e)) = &omega {
        summaries.omega = Some(e.summary());
    }
    match &stability {
        Some(Ok(s)) => summaries.stability = Some(s.clone()),
        Some(Err(e)) => summaries.stability_error = Some(e.to_string()),
        None => {}
    }
    let ctx = Context {
        cfg,
        setup: &setup,
        problem,
        config,
        cover,
        initial,
        omega,
        stability,
    };
    let (verifiers, extra) = run_verifiers(&ctx);
    summaries.phase = extra.phase;
    summaries.supersolution = extra.supersolution;
    let report = RunReport {
        schema: SCHEMA_VERSION,
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        verifiers,
        summaries,
        wall_clock_s: start.elapsed().as_secs_f64(),
    };
    let mut states = trajectory;
    states.insert(0, ctx.cover.clone());
    Ok((report, states))
}

/// Runs a configuration and writes the report, trajectory and plot data
/// into `out` (or the configured output directory).
pub fn run(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<RunReport> {
    validate_config(cfg)?;
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| cfg.output_dir.clone())
        .ok_or_else(|| LabError::InvalidArgument("no output directory given".into()))?;
    let _lock = RunLock::acquire(&dir)?;
    let (report, states) = execute(cfg)?;
    write_outputs(&dir, &report, &states)?;
    Ok(report)
}

#[derive(Default)]
struct Extra {
    phase: Option<PhaseSummary>,
    supersolution: Option<SupersolutionPair>,
}

type Job<'a> = Box<dyn Fn() -> (VerifierReport, Extra) + Send + Sync + 'a>;

fn plain(r: Result<VerifierReport>, name: &str, tol: f64) -> (VerifierReport, Extra) {
    (
        r.unwrap_or_else(|e| VerifierReport::from_error(name, tol, &e)),
        Extra::default(),
    )
}

fn run_verifiers(ctx: &Context<'_>) -> (Vec<VerifierReport>, Extra) {
    let v = &ctx.cfg.verifiers;
    let mut jobs: Vec<Job<'_>> = Vec::new();
    if let Some(s) = &v.monotone {
        jobs.push(Box::new(move || {
            plain(
                {
                    let p = &ctx.setup.problem;
                    let mut c = ctx.setup.integrator;
                    if let Some(r) = s.step_ratio {
                        c.dt = s.t_end / (s.t_end * c.lipschitz / r).ceil();
                    }
                    check_monotone(p, &c, s.pairs, snap(s.t_end, c.dt), ctx.cfg.seed, &ctx.initial.phase)
                },
                "monotone",
                0.0,
            )
        }));
    }
    if let Some(s) = &v.equivariance {
        jobs.push(Box::new(move || plain(equivariance(ctx, s), "equivariance", s.tol)));
    }
    if let Some(s) = &v.spatial_monotonicity {
        jobs.push(Box::new(move || {
            plain(
                check_spatial_monotonicity(&ctx.cover.profile, s.tol),
                "spatial_monotonicity",
                s.tol,
            )
        }));
    }
    if let Some(s) = &v.total_order {
        jobs.push(Box::new(move || {
            plain(
                check_total_order(&ctx.cover.profile, &s.shifts, s.tol),
                "total_order",
                0.0,
            )
        }));
    }
    if let Some(s) = &v.asymptotic_phase {
        jobs.push(Box::new(move || asymptotic_phase(ctx, s)));
    }
    if let Some(s) = &v.one_cover {
        jobs.push(Box::new(move || {
            let r = match &ctx.omega {
                Some(Ok(est)) => one_cover(est, &ctx.cover.profile, s.tol, s.hausdorff_tol),
                Some(Err(e)) => Err(e.clone()),
                None => Err(LabError::InvalidArgument("no omega-limit estimate".into())),
            };
            plain(r, "one_cover", s.hausdorff_tol)
        }));
    }
    if let Some(s) = &v.stability {
        jobs.push(Box::new(move || {
            let r = match &ctx.stability {
                Some(Ok(m)) => {
                    let ratio = m.rows.iter().map(|r| r.delta / r.eps).fold(f64::INFINITY, f64::min);
                    let mut rep =
                        VerifierReport::at_least("stability", ratio, s.min_ratio, "empirical modulus delta(eps)/eps");
                    for row in &m.rows {
                        rep = rep.with_metric(&format!("delta({})", row.eps), row.delta);
                    }
                    Ok(rep.with_note(format!(
                        "{} members, horizon {}, ladder depth {}",
                        m.ensemble_size, m.horizon, m.ladder_depth
                    )))
                }
                Some(Err(e)) => Err(e.clone()),
                None => Err(LabError::InvalidArgument("no stability probe".into())),
            };
            plain(r, "stability", s.min_ratio)
        }));
    }
    if let Some(s) = &v.symmetry {
        jobs.push(Box::new(move || {
            let r = match (&ctx.omega, &ctx.stability) {
                (Some(Ok(est)), Some(stab)) => check_symmetry(&ctx.problem, est, stab, &s.angles, s.tol, s.exact_tol),
                (Some(Err(e)), _) => Err(e.clone()),
                _ => Err(LabError::InvalidArgument(
                    "symmetry needs the orbit and stability analyses".into(),
                )),
            };
            plain(r, "symmetry", s.tol)
        }));
    }
    if let Some(s) = &v.decay_bound {
        jobs.push(Box::new(move || {
            plain(
                (|| {
                    let h = &ctx.problem.reaction.hypotheses;
                    let sc = DecayScenario {
                        cover: ctx.cover.clone(),
                        initial: perturbed(&ctx.cover.profile, &s.perturbation)?,
                        radius: h.r0.unwrap_or(0.0),
                        eps0: h.epsilon0.unwrap_or(0.0),
                        alpha: h.alpha.unwrap_or(0.0),
                        t_end: snap(s.t_end, ctx.config.dt),
                    };
                    check_decay_bound(&ctx.problem, &ctx.config, &sc)
                })(),
                "decay_bound",
                1e-10,
            )
        }));
    }
    if let Some(s) = &v.supersolution {
        jobs.push(Box::new(move || {
            let start = Instant::now();
            let h = &ctx.problem.reaction.hypotheses;
            let eps0 = h.epsilon0.unwrap_or(0.0);
            let r = perturbed(&ctx.cover.profile, &s.perturbation).and_then(|v0| {
                supersolution_pair(
                    &ctx.problem,
                    &ctx.config,
                    &ctx.cover,
                    &v0,
                    s.radius,
                    h.r0.unwrap_or(0.0),
                    eps0 / 4.0,
                    h.alpha.unwrap_or(0.0),
                    snap(s.t_end, ctx.config.dt),
                )
            });
            match r {
                Ok(pair) => (
                    pair.report().timed(start),
                    Extra {
                        supersolution: Some(pair),
                        ..Extra::default()
                    },
                ),
                Err(e) => plain(Err(e), "supersolution", crate::verify::TRAPPING_SLACK),
            }
        }));
    }
    if let Some(s) = &v.wedge_order {
        jobs.push(Box::new(move || {
            plain(
                check_wedge_order(
                    &ctx.cover,
                    &GroupElement::shift(s.shift),
                    &ctx.problem,
                    &ctx.config,
                    snap(s.t_end, ctx.config.dt),
                ),
                "wedge_order",
                0.0,
            )
        }));
    }
    let results: Vec<(VerifierReport, Extra)> = jobs.par_iter().map(|j| j()).collect();
    let mut extra = Extra::default();
    let mut reports = Vec::with_capacity(results.len());
    for (r, e) in results {
        reports.push(r);
        extra.phase = extra.phase.or(e.phase);
        extra.supersolution = extra.supersolution.or(e.supersolution);
    }
    (reports, extra)
}

/// `cover - amplitude (1 + g) / 2` with a Gaussian `g` around `center`.
fn perturbed(cover: &Profile, p: &PerturbationSpec) -> Result<Profile> {
    let c = |k: usize| p.center.get(k).copied().unwrap_or(0.0);
    let two_d = cover.grid().dim() == 2;
    let pert = Profile::from_fn(cover.grid().clone(), |x, y| {
        let mut r2 = (x - c(0)).powi(2);
        if two_d {
            r2 += (y - c(1)).powi(2);
        }
        -p.amplitude * 0.5 * (1.0 + (-r2 / (2.0 * p.width * p.width)).exp())
    });
    cover.zip_with(&pert, |u, d| u + d)
}

fn one_cover(est: &OmegaLimitEstimate, cover: &Profile, tol: f64, h_tol: f64) -> Result<VerifierReport> {
    let start = Instant::now();
    let single = one_cover_check(est, tol)?;
    let limit = est.limit_set()?;
    let h = hausdorff(&limit, &ProfileSet::new(vec![cover.clone()])?)?;
    let mut r = VerifierReport::measured(
        "one_cover",
        h,
        h_tol,
        "Hausdorff distance of the limit set to the start",
    )
    .with_metric("clusters", est.clusters.len() as f64)
    .with_metric("diagnostic", est.diagnostic)
    .with_note(format!(
        "{} fiber samples, {} cluster(s), one-cover check at tol {tol}: {single}",
        est.samples.len(),
        est.clusters.len()
    ));
    if !single {
        r.outcome = Outcome::Fail;
    }
    Ok(r.timed(start))
}

fn equivariance(ctx: &Context<'_>, s: &EquivarianceSpec) -> Result<VerifierReport> {
    let start = Instant::now();
    let dim = ctx.problem.grid.dim();
    let group: Vec<GroupElement> = s
        .elements
        .iter()
        .map(|&e| {
            if dim == 1 {
                GroupElement::shift(e)
            } else {
                GroupElement::rotation(e)
            }
        })
        .collect();
    let Some(study) = &s.study else {
        let t = snap(s.t_end, ctx.config.dt);
        return check_equivariance(
            &ctx.problem,
            &ctx.config,
            &group,
            std::slice::from_ref(&ctx.cover),
            t,
            s.tol,
        );
    };
    let at = |h: f64| -> Result<f64> {
        let n = (2.0 * study.half_width / h).round() as usize + 1;
        let grid = Grid::rect(
            (-study.half_width, study.half_width, n),
            (-study.half_width, study.half_width, n),
        )?;
        let problem = Problem::radial(grid.clone(), ctx.problem.reaction.clone(), ctx.problem.state_bounds)?;
        let dt = study.dt_scale * h * h;
        let config = IntegratorConfig::for_problem(&problem, dt, ctx.config.boundary);
        let u0 = initial_profile(&study.initial, &grid, ctx.cfg.seed, None)?;
        let state = SkewState::new(u0, ctx.initial.phase.clone());
        let r = check_equivariance(&problem, &config, &group, &[state], snap(s.t_end, dt), s.tol)?;
        Ok(r.measured.unwrap_or(f64::INFINITY))
    };
    let coarse = at(study.h)?;
    let mut r = VerifierReport::measured(
        "equivariance",
        coarse,
        s.tol,
        "commutation of the group action with the flow",
    )
    .with_metric("h", study.h)
    .with_note(format!(
        "{} group elements, T = {}, dt = {} h^2",
        group.len(),
        s.t_end,
        study.dt_scale
    ));
    if let Some(min_ratio) = study.min_ratio {
        let fine = at(study.h / 2.0)?;
        let ratio = coarse / fine;
        r = r.with_metric("deviation_half_h", fine).with_metric("ratio", ratio);
        r = r.with_note(format!(
            "deviation {coarse:.3e} at h, {fine:.3e} at h/2, ratio {ratio:.3} (required {min_ratio})"
        ));
        if !(ratio >= min_ratio) {
            r.outcome = Outcome::Fail;
        }
    }
    Ok(r.timed(start))
}

fn asymptotic_phase(ctx: &Context<'_>, s: &PhaseSpec) -> (VerifierReport, Extra) {
    let start = Instant::now();
    let result = (|| -> Result<(VerifierReport, PhaseSummary)> {
        let dt = ctx.config.dt;
        let level = ctx.cfg.wave.as_ref().map(|w| w.level).unwrap_or(0.5);
        let xf = front_position(&ctx.cover.profile, level).ok_or(LabError::NoCrossing { sample: 0, level })?;
        let pert = Profile::from_fn(ctx.problem.grid.clone(), |x, _| {
            s.amplitude * (-(x - xf).powi(2) / (2.0 * s.width * s.width)).exp()
        });
        let start_state = SkewState {
            profile: ctx.cover.profile.zip_with(&pert, |u, p| u + p)?,
            ..ctx.cover.clone()
        };
        let n = (s.t_end / s.sample_every).floor() as usize;
        let times: Vec<f64> = (0..=n).map(|k| snap(k as f64 * s.sample_every, dt)).collect();
        let t_end = *times.last().expect("times");
        let perturbed = integrate(&start_state, t_end, &ctx.problem, &ctx.config, &times)?;
        let reference = integrate(&ctx.cover, t_end, &ctx.problem, &ctx.config, &times)?;
        let traj: Vec<(f64, Profile)> = perturbed
            .into_iter()
            .map(|st| (st.time - ctx.cover.time, st.profile))
            .collect();
        let refs: Vec<Profile> = reference.into_iter().map(|st| st.profile).collect();
        let opts = PhaseOptions {
            bracket: s.bracket,
            cauchy_tol: s.cauchy_tol,
            window_start: Some(s.window_start),
            ..PhaseOptions::default()
        };
        let series = extract_asymptotic_phase(&traj, &refs, &opts)?;
        let last = *series.residual.last().expect("samples");
        let summary = PhaseSummary {
            sigma_star: series.sigma_star,
            spread: series.spread,
            final_residual: last,
            residual_decreasing: series.residual_decreasing,
        };
        let mut r = VerifierReport::measured("asymptotic_phase", last, s.residual_tol, "sup-norm residual to the shifted wave")
            .with_metric("sigma_star", series.sigma_star)
            .with_metric("spread", series.spread)
            .with_note(format!(
                "perturbation {} at the front, sigma* = {:.6}, spread over t >= {} is {:.3e}, residual decreasing on average: {}",
                s.amplitude, series.sigma_star, s.window_start, series.spread, series.residual_decreasing
            ));
        if !series.residual_decreasing {
            r.outcome = Outcome::Fail;
        }
        Ok((r, summary))
    })();
    match result {
        Ok((r, summary)) => (
            r.timed(start),
            Extra {
                phase: Some(summary),
                ..Extra::default()
            },
        ),
        Err(e @ LabError::NoConvergence { .. }) => {
            let mut r = VerifierReport::from_error("asymptotic_phase", s.residual_tol, &e);
            r.outcome = Outcome::Fail;
            (r.timed(start), Extra::default())
        }
        Err(e) => plain(Err(e), "asymptotic_phase", s.residual_tol),
    }
}

fn write_outputs(dir: &Path, report: &RunReport, states: &[SkewState]) -> Result<()> {
    let plot = dir.join("plot");
    fs::create_dir_all(&plot)?;
    let f = BufWriter::new(File::create(dir.join("report.json"))?);
    serde_json::to_writer_pretty(f, report)?;
    write_trajectory_csv(&states[1..], BufWriter::new(File::create(dir.join("trajectory.csv"))?))?;
    fs::write(dir.join("summary.md"), super::render_summary(report))?;

    let mut manifest = Vec::new();
    let cover = &states[0].profile;
    let grid = cover.grid();
    let mut w = csv::Writer::from_path(plot.join("cover_profile.csv"))?;
    if grid.dim() == 1 {
        w.write_record(["x", "u"])?;
    } else {
        w.write_record(["x", "y", "u"])?;
    }
    for (i, v) in cover.values().iter().enumerate() {
        let [x, y] = grid.coords(i);
        if grid.dim() == 1 {
            w.serialize((x, v))?;
        } else {
            w.serialize((x, y, v))?;
        }
    }
    w.flush()?;
    manifest.push(PlotEntry::new(
        "cover_profile.csv",
        if grid.dim() == 1 {
            &["x", "u"][..]
        } else {
            &["x", "y", "u"][..]
        },
        "x",
        "u",
        "profile the analyses start from",
    ));
    let s = &report.summaries;
    if let Some(o) = &s.omega {
        let mut w = csv::Writer::from_path(plot.join("omega_samples.csv"))?;
        w.write_record(["time", "phase_error"])?;
        for (t, e) in o.sample_times.iter().zip(&o.phase_errors) {
            w.serialize((t, e))?;
        }
        w.flush()?;
        manifest.push(PlotEntry::new(
            "omega_samples.csv",
            &["time", "phase_error"],
            "time",
            "phase_error",
            "base return samples",
        ));
    }
    if let Some(m) = &s.stability {
        let mut w = csv::Writer::from_path(plot.join("modulus.csv"))?;
        w.write_record(["eps", "delta", "max_deviation"])?;
        for r in &m.rows {
            w.serialize((r.eps, r.delta, r.max_deviation))?;
        }
        w.flush()?;
        manifest.push(PlotEntry::new(
            "modulus.csv",
            &["eps", "delta", "max_deviation"],
            "eps",
            "delta",
            "stability modulus",
        ));
    }
    if let Some(wv) = &s.wave {
        let mut w = csv::Writer::from_path(plot.join("calibration.csv"))?;
        w.write_record(["round", "mean_drift", "front_spread"])?;
        for (i, r) in wv.rounds.iter().enumerate() {
            w.serialize((i + 1, r.mean_drift, r.front_spread))?;
        }
        w.flush()?;
        manifest.push(PlotEntry::new(
            "calibration.csv",
            &["round", "mean_drift", "front_spread"],
            "round",
            "mean_drift",
            "frame drift calibration",
        ));
    }
    let mut w = csv::Writer::from_path(plot.join("sup_norm.csv"))?;
    w.write_record(["time", "sup_norm"])?;
    for st in &states[1..] {
        w.serialize((st.time, st.profile.sup_norm()))?;
    }
    w.flush()?;
    manifest.push(PlotEntry::new(
        "sup_norm.csv",
        &["time", "sup_norm"],
        "time",
        "sup_norm",
        "trajectory size",
    ));
    let f = BufWriter::new(File::create(plot.join("manifest.json"))?);
    serde_json::to_writer_pretty(f, &manifest)?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlotEntry {
    pub file: String,
    pub columns: Vec<String>,
    pub x: String,
    pub y: String,
    pub description: String,
}

impl PlotEntry {
    fn new(file: &str, columns: &[&str], x: &str, y: &str, description: &str) -> Self {
        Self {
            file: file.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            x: x.into(),
            y: y.into(),
            description: description.into(),
        }
    }
}

/// Loads `report.json` from a run directory.
pub fn load_report(dir: &Path) -> Result<RunReport> {
    let text = fs::read_to_string(dir.join("report.json"))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| LabError::Format(format!("{}: {}", e.path(), e.inner())))
}
