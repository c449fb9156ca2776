use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{ConfigIssue, LabError, Result};
use crate::profile::Grid;
use crate::quasi_periodic::{FrequencyBasis, QPSignal};
use crate::reaction::{Hypotheses, Monomial, ReactionTerm, SpatialWeight};
use crate::semiflow::{Boundary, IntegratorConfig, Problem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScenarioId {
    #[serde(rename = "wave_1d")]
    Wave1d,
    #[serde(rename = "radial_2d")]
    Radial2d,
    #[serde(rename = "custom")]
    Custom,
}

impl std::fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ScenarioId::Wave1d => "wave_1d",
            ScenarioId::Radial2d => "radial_2d",
            ScenarioId::Custom => "custom",
        })
    }
}

/// `amplitude * sin(<k, omega> t)` or `cos`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Harmonic {
    pub k: Vec<i32>,
    pub amplitude: f64,
}

/// A real trigonometric polynomial over the configured frequencies.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalSpec {
    #[serde(default)]
    pub constant: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sin: Vec<Harmonic>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cos: Vec<Harmonic>,
}

impl SignalSpec {
    pub fn build(&self, basis: &FrequencyBasis) -> Result<QPSignal> {
        let mut s = QPSignal::constant(basis.clone(), self.constant);
        for h in self.sin.iter().chain(&self.cos) {
            if h.k.len() != basis.dim() {
                return Err(LabError::InvalidArgument(format!(
                    "harmonic {:?} needs {} indices",
                    h.k,
                    basis.dim()
                )));
            }
        }
        for h in &self.sin {
            s = s.with_sin(h.k.clone(), h.amplitude);
        }
        for h in &self.cos {
            s = s.with_cos(h.k.clone(), h.amplitude);
        }
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonomialSpec {
    pub power: u8,
    pub coefficient: SignalSpec,
    #[serde(default = "constant_weight")]
    pub weight: SpatialWeight,
}

fn constant_weight() -> SpatialWeight {
    SpatialWeight::Constant
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReactionSpec {
    /// `u (1 - u) (u - a(t))`.
    Bistable { a: SignalSpec },
    /// `u (b(t) rho(|x|) - kappa u^2) - alpha chi(|x|) u`.
    Radial {
        b: SignalSpec,
        bump_radius: f64,
        kappa: f64,
        alpha: f64,
        chi: SpatialWeight,
    },
    /// Sum of `c_p(t) w_p(|x|) u^p`, `p <= 3`.
    Polynomial { terms: Vec<MonomialSpec> },
}

/// Declared structural properties; validation confirms each declared one.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Flags {
    /// Invariance of `f` under the symmetry group.
    #[serde(default)]
    pub g_symmetric: bool,
    /// `f(t, x, 0) = 0`.
    #[serde(default)]
    pub zero_at_zero: bool,
    /// `df/du <= -alpha` for `|x| >= r0`, `|u| <= epsilon0`.
    #[serde(default)]
    pub outer_dissipative: bool,
    /// Limit states that are equilibria with `df/du <= -mu` near them.
    #[serde(default)]
    pub stable_limits: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x: (f64, f64, usize),
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<(f64, f64, usize)>,
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid> {
        match self.y {
            None => Grid::line(self.x.0, self.x.1, self.x.2),
            Some(y) => Grid::rect(self.x, y),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Picks `dt` so that `dt * L` is at most this ratio and `1 / dt` is
    /// an integer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_ratio: Option<f64>,
    pub boundary: Boundary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<f64>,
}

impl IntegratorSpec {
    pub fn build(&self, problem: &Problem) -> Result<IntegratorConfig> {
        let l = problem.lipschitz_bound().max(self.lipschitz.unwrap_or(0.0));
        let dt = match (self.dt, self.step_ratio) {
            (Some(dt), None) => dt,
            (None, Some(r)) => step_for_ratio(r, l),
            _ => {
                return Err(LabError::InvalidArgument(
                    "give exactly one of dt and step_ratio".into(),
                ))
            }
        };
        let mut cfg = IntegratorConfig::for_problem(problem, dt, self.boundary);
        cfg.lipschitz = l;
        cfg.validate(problem)?;
        Ok(cfg)
    }
}

/// Largest `dt = 1/n` with `dt * lipschitz <= ratio`.
pub fn step_for_ratio(ratio: f64, lipschitz: f64) -> f64 {
    if lipschitz <= 0.0 {
        return ratio.min(1.0);
    }
    1.0 / (lipschitz / ratio).ceil()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    Constant {
        value: f64,
    },
    /// Front `high + (low - high) / (1 + exp(-(x - center) / width))` plus
    /// seeded Gaussian bumps.
    Front {
        #[serde(default)]
        center: f64,
        width: f64,
        #[serde(default = "one")]
        high: f64,
        #[serde(default)]
        low: f64,
        #[serde(default)]
        bumps: usize,
        #[serde(default)]
        bump_amplitude: f64,
    },
    Gaussian {
        amplitude: f64,
        center: Vec<f64>,
        widths: Vec<f64>,
    },
    /// Stationary pulse of the autonomous bistable equation with the mean
    /// of `a`.
    Pulse,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveSpec {
    /// States at `x -> -inf` and `x -> +inf`.
    pub limits: (f64, f64),
    #[serde(default = "half")]
    pub level: f64,
    pub initial_drift: f64,
    pub rounds: usize,
    pub samples_per_round: usize,
    pub sample_stride: usize,
    pub harmonic_order: i32,
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitSpec {
    pub eps_return: f64,
    pub horizon: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilitySpec {
    pub eps: Vec<f64>,
    pub ladder_depth: usize,
    pub horizon: f64,
    #[serde(default = "ensemble_default")]
    pub ensemble_size: usize,
}

fn ensemble_default() -> usize {
    32
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonotoneSpec {
    pub pairs: usize,
    pub t_end: f64,
    /// Overrides the integrator step by `dt * L = step_ratio`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquivarianceSpec {
    /// Shifts (1-D) or angles (2-D).
    pub elements: Vec<f64>,
    pub t_end: f64,
    pub tol: f64,
    /// Separate grid and datum for a refinement study; `dt = dt_scale h^2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub study: Option<RefinementSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefinementSpec {
    pub half_width: f64,
    pub h: f64,
    pub dt_scale: f64,
    pub initial: InitialSpec,
    /// Required reduction of the deviation when `h` is halved.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftsSpec {
    pub shifts: Vec<f64>,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolSpec {
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseSpec {
    /// Gaussian perturbation centered on the front.
    pub amplitude: f64,
    pub width: f64,
    pub t_end: f64,
    pub sample_every: f64,
    pub window_start: f64,
    pub cauchy_tol: f64,
    pub residual_tol: f64,
    pub bracket: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OneCoverSpec {
    pub tol: f64,
    /// Bound on the Hausdorff distance between the limit set and the
    /// starting profile.
    pub hausdorff_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetrySpec {
    pub angles: Vec<f64>,
    pub tol: f64,
    pub exact_tol: f64,
}

/// Perturbation `-amplitude (1 + exp(-|x - c|^2 / (2 width^2))) / 2` of
/// the cover: nonpositive, at most `amplitude` in size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSpec {
    pub amplitude: f64,
    pub width: f64,
    pub center: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecaySpec {
    pub perturbation: PerturbationSpec,
    pub t_end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupersolutionSpec {
    pub perturbation: PerturbationSpec,
    pub t_end: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
}

/// Passes when every reported `delta(eps) / eps` is at least `min_ratio`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityCheckSpec {
    pub min_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WedgeSpec {
    pub shift: f64,
    pub t_end: f64,
}

/// Selected verifiers; an absent entry is not run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifierSelection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monotone: Option<MonotoneSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equivariance: Option<EquivarianceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spatial_monotonicity: Option<TolSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_order: Option<ShiftsSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub asymptotic_phase: Option<PhaseSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub one_cover: Option<OneCoverSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stability: Option<StabilityCheckSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetry: Option<SymmetrySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay_bound: Option<DecaySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub supersolution: Option<SupersolutionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wedge_order: Option<WedgeSpec>,
}

impl VerifierSelection {
    pub fn names(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        let mut push = |on: bool, n| {
            if on {
                v.push(n)
            }
        };
        push(self.monotone.is_some(), "monotone");
        push(self.equivariance.is_some(), "equivariance");
        push(self.spatial_monotonicity.is_some(), "spatial_monotonicity");
        push(self.total_order.is_some(), "total_order");
        push(self.asymptotic_phase.is_some(), "asymptotic_phase");
        push(self.one_cover.is_some(), "one_cover");
        push(self.stability.is_some(), "stability");
        push(self.symmetry.is_some(), "symmetry");
        push(self.decay_bound.is_some(), "decay_bound");
        push(self.supersolution.is_some(), "supersolution");
        push(self.wedge_order.is_some(), "wedge_order");
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioId,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub frequencies: Vec<f64>,
    pub reaction: ReactionSpec,
    #[serde(default)]
    pub flags: Flags,
    #[serde(default)]
    pub hypotheses: Hypotheses,
    pub grid: GridSpec,
    pub state_bounds: (f64, f64),
    pub integrator: IntegratorSpec,
    pub initial: InitialSpec,
    /// Integration time before the analyses start.
    pub transient: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wave: Option<WaveSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orbit: Option<OrbitSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stability: Option<StabilitySpec>,
    #[serde(default)]
    pub verifiers: VerifierSelection,
}

/// Parses a config, locating type errors by JSON pointer.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let pointer = json_pointer(e.path());
        LabError::ConfigInvalid(vec![ConfigIssue::new(pointer, e.inner().to_string())])
    })
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| LabError::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

fn json_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => out.push_str(&format!("/{}", key.replace('~', "~0").replace('/', "~1"))),
            Segment::Enum { variant } => out.push_str(&format!("/{variant}")),
            Segment::Unknown => {}
        }
    }
    out
}

/// Everything a run needs, built from a validated config.
#[derive(Debug, Clone)]
pub struct Setup {
    pub basis: FrequencyBasis,
    pub problem: Problem,
    pub integrator: IntegratorConfig,
}

struct Issues(Vec<ConfigIssue>);

impl Issues {
    fn push(&mut self, pointer: &str, message: impl Into<String>) {
        self.0.push(ConfigIssue::new(pointer, message));
    }

    fn positive(&mut self, pointer: &str, v: f64) {
        if !(v.is_finite() && v > 0.0) {
            self.push(pointer, format!("must be positive, got {v}"));
        }
    }

    fn nonnegative(&mut self, pointer: &str, v: f64) {
        if !(v.is_finite() && v >= 0.0) {
            self.push(pointer, format!("must be nonnegative, got {v}"));
        }
    }
}

fn build_reaction(cfg: &ExperimentConfig, basis: &FrequencyBasis) -> Result<ReactionTerm> {
    let r = match &cfg.reaction {
        ReactionSpec::Bistable { a } => ReactionTerm::bistable(a.build(basis)?)?,
        ReactionSpec::Radial {
            b,
            bump_radius,
            kappa,
            alpha,
            chi,
        } => ReactionTerm::radial(b.build(basis)?, *bump_radius, *kappa, *alpha, *chi)?,
        ReactionSpec::Polynomial { terms } => {
            let terms = terms
                .iter()
                .map(|t| {
                    Ok(Monomial {
                        power: t.power,
                        coefficient: t.coefficient.build(basis)?,
                        weight: t.weight,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            ReactionTerm::new(basis.clone(), terms)?
        }
    };
    let mut r = r.with_hypotheses(cfg.hypotheses);
    r.g_symmetric = cfg.flags.g_symmetric;
    Ok(r)
}

/// Schema and hypothesis checks. Returns the run setup, or every issue
/// found.
pub fn validate_config(cfg: &ExperimentConfig) -> Result<Setup> {
    let mut is = Issues(Vec::new());
    let basis = match FrequencyBasis::new(cfg.frequencies.clone()) {
        Ok(b) => Some(b),
        Err(e) => {
            is.push("/frequencies", e.to_string());
            None
        }
    };
    let grid = match cfg.grid.build() {
        Ok(g) => Some(g),
        Err(e) => {
            is.push("/grid", e.to_string());
            None
        }
    };
    if !(cfg.state_bounds.0 < cfg.state_bounds.1) {
        is.push("/state_bounds", "lower bound must be below the upper bound");
    }
    is.nonnegative("/transient", cfg.transient);
    let h = &cfg.hypotheses;
    for (key, v) in [("epsilon0", h.epsilon0), ("r0", h.r0), ("alpha", h.alpha), ("mu", h.mu)] {
        if let Some(v) = v {
            if key == "alpha" && v == 0.0 && cfg.scenario == ScenarioId::Radial2d {
                continue;
            }
            is.positive(&format!("/hypotheses/{key}"), v);
        }
    }
    match (cfg.integrator.dt, cfg.integrator.step_ratio) {
        (Some(dt), None) => is.positive("/integrator/dt", dt),
        (None, Some(r)) => {
            is.positive("/integrator/step_ratio", r);
            if r >= 1.0 {
                is.push("/integrator/step_ratio", "must be below 1");
            }
        }
        _ => is.push("/integrator", "give exactly one of dt and step_ratio"),
    }
    let reaction = match &basis {
        Some(b) => match build_reaction(cfg, b) {
            Ok(r) => Some(r),
            Err(e) => {
                is.push("/reaction", e.to_string());
                None
            }
        },
        None => None,
    };
    if let (Some(grid), Some(f)) = (&grid, &reaction) {
        match cfg.scenario {
            ScenarioId::Radial2d => check_radial(cfg, grid, f, &mut is),
            ScenarioId::Wave1d => check_wave(cfg, grid, f, &mut is),
            ScenarioId::Custom => {
                if cfg.flags.zero_at_zero {
                    zero_witness(grid, f, &mut is);
                }
            }
        }
    }
    check_sections(cfg, grid.as_ref(), &mut is);
    if !is.0.is_empty() {
        return Err(LabError::ConfigInvalid(is.0));
    }
    let (basis, grid, reaction) = (
        basis.expect("checked"),
        grid.expect("checked"),
        reaction.expect("checked"),
    );
    let problem = match cfg.scenario {
        ScenarioId::Radial2d => Problem::radial(grid, reaction, cfg.state_bounds),
        ScenarioId::Wave1d => Problem::wave(grid, reaction, None, cfg.state_bounds),
        ScenarioId::Custom => Problem::new(grid, reaction, cfg.state_bounds),
    }
    .map_err(|e| LabError::ConfigInvalid(vec![ConfigIssue::new("/reaction", e.to_string())]))?;
    let integrator = cfg
        .integrator
        .build(&problem)
        .map_err(|e| LabError::ConfigInvalid(vec![ConfigIssue::new("/integrator", e.to_string())]))?;
    Ok(Setup {
        basis,
        problem,
        integrator,
    })
}

fn zero_witness(grid: &Grid, f: &ReactionTerm, is: &mut Issues) {
    if let Some((r, phase, v)) = f.zero_at_zero_witness(grid) {
        is.push(
            "/reaction",
            format!(
                "f(t, x, 0) = {v:.6e} is not zero at |x| = {r:.4}, hull phase {:?}",
                phase.theta()
            ),
        );
    }
}

fn check_radial(cfg: &ExperimentConfig, grid: &Grid, f: &ReactionTerm, is: &mut Issues) {
    if grid.dim() != 2 {
        is.push("/grid/y", "radial_2d needs a 2-D grid");
        return;
    }
    let (ax, ay) = (grid.axis(0), grid.axis(1));
    if ax.n != ay.n || ax.min != -ax.max || ay.min != ax.min || ay.max != ax.max {
        is.push("/grid", "radial_2d needs a square grid centered at the origin");
    }
    for (on, key, what) in [
        (cfg.flags.g_symmetric, "g_symmetric", "rotation invariance"),
        (cfg.flags.zero_at_zero, "zero_at_zero", "f(t, x, 0) = 0"),
        (cfg.flags.outer_dissipative, "outer_dissipative", "outer dissipativity"),
    ] {
        if !on {
            is.push(
                &format!("/flags/{key}"),
                format!("radial_2d requires the declared {what}"),
            );
        }
    }
    if let ReactionSpec::Radial { alpha, kappa, .. } = &cfg.reaction {
        if !(*alpha > 0.0) {
            is.push("/reaction/alpha", "outer dissipativity requires positive alpha");
        }
        is.nonnegative("/reaction/kappa", *kappa);
    }
    zero_witness(grid, f, is);
    let h = &cfg.hypotheses;
    let (Some(eps0), Some(r0), Some(alpha)) = (h.epsilon0, h.r0, h.alpha) else {
        is.push("/hypotheses", "radial_2d needs epsilon0, r0 and alpha");
        return;
    };
    if !(alpha > 0.0) {
        is.push("/hypotheses/alpha", "outer dissipativity requires positive alpha");
        return;
    }
    if eps0 > 0.0 && r0 > 0.0 {
        let (margin, at) = f.outer_dissipativity_margin(grid, eps0, r0, alpha);
        if margin > 1e-12 {
            is.push(
                "/hypotheses",
                format!("sampled df/du exceeds -alpha by {margin:.4e} at |x| = {at:.4} with |u| <= epsilon0"),
            );
        }
    }
}

fn check_wave(cfg: &ExperimentConfig, grid: &Grid, f: &ReactionTerm, is: &mut Issues) {
    if grid.dim() != 1 {
        is.push("/grid/y", "wave_1d needs a 1-D grid");
    }
    if !f.x_independent() {
        is.push("/reaction", "wave_1d needs an x-independent reaction");
    }
    if !cfg.flags.g_symmetric {
        is.push(
            "/flags/g_symmetric",
            "wave_1d requires the declared translation invariance",
        );
    }
    if !cfg.flags.stable_limits {
        is.push("/flags/stable_limits", "wave_1d requires declared stable limit states");
    }
    let Some(w) = &cfg.wave else {
        is.push("/wave", "wave_1d needs the wave section");
        return;
    };
    let limits = [w.limits.0, w.limits.1];
    for phase in f.phase_samples(8) {
        for &l in &limits {
            let v = f.value(&phase, 0.0, l);
            if v.abs() > 1e-12 {
                is.push(
                    "/wave/limits",
                    format!("{l} is not an equilibrium: f = {v:.3e} at phase {:?}", phase.theta()),
                );
                return;
            }
        }
    }
    let h = &cfg.hypotheses;
    let (Some(eps0), Some(mu)) = (h.epsilon0, h.mu) else {
        is.push("/hypotheses", "wave_1d needs epsilon0 and mu");
        return;
    };
    if eps0 > 0.0 && mu > 0.0 {
        let m = f.limit_dissipativity_margin(&limits, eps0, mu);
        if m > 1e-12 {
            is.push(
                "/hypotheses",
                format!("sampled df/du exceeds -mu by {m:.4e} near the limit states"),
            );
        }
    }
}

fn check_sections(cfg: &ExperimentConfig, grid: Option<&Grid>, is: &mut Issues) {
    let dim = grid.map(|g| g.dim()).unwrap_or(0);
    if let Some(w) = &cfg.wave {
        if w.rounds == 0 || w.samples_per_round < 8 || w.sample_stride == 0 {
            is.push(
                "/wave",
                "calibration needs rounds >= 1, samples_per_round >= 8 and sample_stride >= 1",
            );
        }
        if !(0..=4).contains(&w.harmonic_order) {
            is.push("/wave/harmonic_order", "must lie in 0..=4");
        }
    }
    if let Some(o) = &cfg.orbit {
        is.positive("/orbit/eps_return", o.eps_return);
        is.positive("/orbit/horizon", o.horizon);
        is.positive("/orbit/tol", o.tol);
    }
    if let Some(s) = &cfg.stability {
        if s.eps.is_empty() {
            is.push("/stability/eps", "needs at least one value");
        }
        for (i, e) in s.eps.iter().enumerate() {
            is.positive(&format!("/stability/eps/{i}"), *e);
        }
        if s.ladder_depth == 0 || s.ensemble_size == 0 {
            is.push("/stability", "ladder_depth and ensemble_size must be positive");
        }
        is.positive("/stability/horizon", s.horizon);
    }
    let v = &cfg.verifiers;
    let need = |is: &mut Issues, on: bool, ok: bool, key: &str, msg: &str| {
        if on && !ok {
            is.push(&format!("/verifiers/{key}"), msg.to_string());
        }
    };
    if let Some(m) = &v.monotone {
        if m.pairs == 0 {
            is.push("/verifiers/monotone/pairs", "must be positive");
        }
        is.positive("/verifiers/monotone/t_end", m.t_end);
        if let Some(r) = m.step_ratio {
            is.positive("/verifiers/monotone/step_ratio", r);
        }
    }
    if let Some(e) = &v.equivariance {
        is.positive("/verifiers/equivariance/t_end", e.t_end);
        is.nonnegative("/verifiers/equivariance/tol", e.tol);
        if let Some(s) = &e.study {
            need(
                is,
                true,
                dim == 2,
                "equivariance/study",
                "refinement studies run on 2-D problems",
            );
            is.positive("/verifiers/equivariance/study/h", s.h);
            is.positive("/verifiers/equivariance/study/half_width", s.half_width);
            is.positive("/verifiers/equivariance/study/dt_scale", s.dt_scale);
        }
    }
    need(
        is,
        v.spatial_monotonicity.is_some(),
        dim == 1,
        "spatial_monotonicity",
        "needs a 1-D problem",
    );
    need(
        is,
        v.total_order.is_some(),
        dim == 1,
        "total_order",
        "needs a 1-D problem",
    );
    need(
        is,
        v.wedge_order.is_some(),
        dim == 1,
        "wedge_order",
        "needs a 1-D problem",
    );
    need(
        is,
        v.asymptotic_phase.is_some(),
        cfg.scenario == ScenarioId::Wave1d,
        "asymptotic_phase",
        "needs the wave_1d scenario",
    );
    if let Some(p) = &v.asymptotic_phase {
        is.positive("/verifiers/asymptotic_phase/t_end", p.t_end);
        is.positive("/verifiers/asymptotic_phase/sample_every", p.sample_every);
        if !(p.bracket.0 < p.bracket.1) {
            is.push("/verifiers/asymptotic_phase/bracket", "must be a nonempty interval");
        }
    }
    need(
        is,
        v.one_cover.is_some(),
        cfg.orbit.is_some(),
        "one_cover",
        "needs the orbit section",
    );
    need(
        is,
        v.stability.is_some(),
        cfg.stability.is_some(),
        "stability",
        "needs the stability section",
    );
    need(
        is,
        v.symmetry.is_some(),
        dim == 2 && cfg.orbit.is_some() && cfg.stability.is_some(),
        "symmetry",
        "needs a 2-D problem with orbit and stability sections",
    );
    for (on, key) in [
        (v.decay_bound.is_some(), "decay_bound"),
        (v.supersolution.is_some(), "supersolution"),
    ] {
        need(
            is,
            on,
            cfg.scenario == ScenarioId::Radial2d,
            key,
            "needs the radial_2d scenario",
        );
    }
    let pert = |is: &mut Issues, key: &str, p: &PerturbationSpec| {
        is.nonnegative(&format!("/verifiers/{key}/perturbation/amplitude"), p.amplitude);
        is.positive(&format!("/verifiers/{key}/perturbation/width"), p.width);
        if p.center.len() != dim.max(1) {
            is.push(
                &format!("/verifiers/{key}/perturbation/center"),
                "needs one coordinate per grid axis",
            );
        }
    };
    if let Some(d) = &v.decay_bound {
        is.positive("/verifiers/decay_bound/t_end", d.t_end);
        pert(is, "decay_bound", &d.perturbation);
    }
    if let Some(s) = &v.supersolution {
        is.positive("/verifiers/supersolution/t_end", s.t_end);
        pert(is, "supersolution", &s.perturbation);
        if let Some(r) = s.radius {
            is.positive("/verifiers/supersolution/radius", r);
        }
    }
    if let Some(s) = &v.stability {
        is.positive("/verifiers/stability/min_ratio", s.min_ratio);
    }
    if matches!(cfg.initial, InitialSpec::Pulse) && !matches!(cfg.reaction, ReactionSpec::Bistable { .. }) {
        is.push("/initial", "the pulse datum needs a bistable reaction");
    }
    if let InitialSpec::Gaussian { center, widths, .. } = &cfg.initial {
        if center.len() != dim.max(1) || widths.len() != dim.max(1) {
            is.push("/initial", "center and widths need one entry per grid axis");
        }
    }
}
