//! Time stepping of the skew-product semiflow.
//!
//! One step is a Lie splitting of upwind advection, explicit reaction,
//! boundary data and backward-Euler diffusion (line solves in 1-D, an
//! x-sweep followed by a y-sweep in 2-D). Each stage is monotone in floating
//! point, so ordered inputs stay ordered at tolerance zero.

mod dd;
mod io;
mod tridiag;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::profile::{Grid, Profile};
use crate::quasi_periodic::{advance_phase, evaluate, QPSignal, TorusPhase};
use crate::reaction::{PowerCoefficients, ReactionTerm, SpatialWeight};

pub use io::{read_manifest, write_trajectory_binary, write_trajectory_csv, FrameEntry, TrajectoryManifest};
use tridiag::solve_pinned;

/// Boundary treatment at the outer edge of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Edge nodes follow the spatially homogeneous equation `u' = g(t, u)`,
    /// so edges started on the limit states track `u±(t)`.
    DirichletLimits,
    DirichletZero,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Advection {
    #[default]
    Upwind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub boundary: Boundary,
    /// Declared Lipschitz bound of the reaction on the problem's state range.
    /// Validation uses the larger of this and the sampled bound.
    pub lipschitz: f64,
    #[serde(default)]
    pub advection: Advection,
}

impl IntegratorConfig {
    /// Config with the sampled Lipschitz bound of `problem`.
    pub fn for_problem(problem: &Problem, dt: f64, boundary: Boundary) -> Self {
        Self {
            dt,
            boundary,
            lipschitz: problem.lipschitz_bound(),
            advection: Advection::Upwind,
        }
    }

    /// Config whose step makes `dt * L` equal to `ratio`.
    pub fn with_step_ratio(problem: &Problem, ratio: f64, boundary: Boundary) -> Self {
        let l = problem.lipschitz_bound();
        Self::for_problem(problem, ratio / l, boundary)
    }

    pub fn validate(&self, problem: &Problem) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(LabError::CflViolation(format!("dt = {} must be positive", self.dt)));
        }
        let l = self.lipschitz.max(problem.lipschitz_bound());
        if self.dt * l >= 1.0 {
            return Err(LabError::CflViolation(format!(
                "dt * L = {:.4} must be below 1 for an order-preserving reaction step",
                self.dt * l
            )));
        }
        if let Some(d) = &problem.drift {
            if problem.grid.dim() != 1 {
                return Err(LabError::InvalidArgument("advection is only supported in 1-D".into()));
            }
            let courant = self.dt * d.amplitude_bound() / problem.grid.axis(0).spacing();
            if courant > 1.0 {
                return Err(LabError::CflViolation(format!(
                    "upwind Courant number dt |d| / h = {courant:.4} exceeds 1"
                )));
            }
        }
        Ok(())
    }
}

/// `u_t = Δu + d(t) u_x + f(t, x, u)` on a truncated grid.
#[derive(Debug, Clone)]
pub struct Problem {
    pub grid: Grid,
    pub reaction: ReactionTerm,
    /// Frame drift `d(t)`; `None` means the lab frame.
    pub drift: Option<QPSignal>,
    /// Interval of states the solutions are expected to occupy; the
    /// Lipschitz bound is taken over it.
    pub state_bounds: (f64, f64),
}

impl Problem {
    pub fn new(grid: Grid, reaction: ReactionTerm, state_bounds: (f64, f64)) -> Result<Self> {
        if !(state_bounds.0 < state_bounds.1) {
            return Err(LabError::InvalidArgument("state bounds must satisfy lo < hi".into()));
        }
        Ok(Self {
            grid,
            reaction,
            drift: None,
            state_bounds,
        })
    }

    /// A 1-D traveling-wave problem in the frame moving with drift `d(t)`.
    pub fn wave(grid: Grid, reaction: ReactionTerm, drift: Option<QPSignal>, state_bounds: (f64, f64)) -> Result<Self> {
        if grid.dim() != 1 {
            return Err(LabError::InvalidArgument("wave problems live on 1-D grids".into()));
        }
        if !reaction.x_independent() {
            return Err(LabError::InvalidArgument(
                "wave problems need an x-independent reaction".into(),
            ));
        }
        if let Some(d) = &drift {
            if d.basis().omegas() != reaction.basis().omegas() {
                return Err(LabError::InvalidArgument(
                    "drift and reaction use different bases".into(),
                ));
            }
        }
        let mut p = Self::new(grid, reaction, state_bounds)?;
        p.drift = drift;
        Ok(p)
    }

    /// A 2-D problem whose reaction depends on `x` only through `|x|`.
    pub fn radial(grid: Grid, reaction: ReactionTerm, state_bounds: (f64, f64)) -> Result<Self> {
        if grid.dim() != 2 {
            return Err(LabError::InvalidArgument("radial problems live on 2-D grids".into()));
        }
        if !reaction.zero_at_zero {
            return Err(LabError::InvalidArgument("radial problems need f(t, x, 0) = 0".into()));
        }
        Self::new(grid, reaction, state_bounds)
    }

    pub fn with_drift(mut self, drift: Option<QPSignal>) -> Self {
        self.drift = drift;
        self
    }

    pub fn lipschitz_bound(&self) -> f64 {
        self.reaction
            .lipschitz_bound(&self.grid, self.state_bounds.0, self.state_bounds.1)
    }
}

/// A point `(u, ω)` of the skew product together with its elapsed time.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewState {
    pub profile: Profile,
    pub phase: TorusPhase,
    pub time: f64,
}

impl SkewState {
    pub fn new(profile: Profile, phase: TorusPhase) -> Self {
        Self {
            profile,
            phase,
            time: 0.0,
        }
    }
}

/// Reusable stepping machinery for one problem and config.
pub struct Stepper<'a> {
    problem: &'a Problem,
    config: IntegratorConfig,
    /// Per term: node weights, or `None` for a constant weight.
    weights: Vec<Option<Vec<f64>>>,
    line_x: tridiag::DirichletLine,
    line_y: Option<tridiag::DirichletLine>,
    scratch: Vec<f64>,
    edges: Vec<usize>,
}

impl<'a> Stepper<'a> {
    pub fn new(problem: &'a Problem, config: IntegratorConfig) -> Result<Self> {
        config.validate(problem)?;
        let grid = &problem.grid;
        let weights = problem
            .reaction
            .terms()
            .iter()
            .map(|t| match t.weight {
                SpatialWeight::Constant => None,
                w => Some((0..grid.len()).map(|i| w.at(grid.radius(i))).collect()),
            })
            .collect();
        let hx = grid.axis(0).spacing();
        let line_x = tridiag::DirichletLine::new(grid.nx(), config.dt / (hx * hx));
        let line_y = (grid.dim() == 2).then(|| {
            let hy = grid.axis(1).spacing();
            tridiag::DirichletLine::new(grid.ny(), config.dt / (hy * hy))
        });
        let edges = (0..grid.len()).filter(|&i| grid.is_edge(i)).collect();
        Ok(Self {
            problem,
            config,
            weights,
            line_x,
            line_y,
            scratch: vec![0.0; grid.len()],
            edges,
        })
    }

    pub fn config(&self) -> &IntegratorConfig {
        &self.config
    }

    pub fn problem(&self) -> &Problem {
        self.problem
    }

    /// Advances `state` by one step in place.
    pub fn step(&mut self, state: &mut SkewState) -> Result<()> {
        if state.profile.grid() != &self.problem.grid {
            return Err(LabError::GridMismatch);
        }
        let dt = self.config.dt;
        let grid = &self.problem.grid;
        let u = state.profile.values_mut();

        if let Some(drift) = &self.problem.drift {
            let d = evaluate(drift, &state.phase, 0.0);
            let lam = dt * d.abs() / grid.axis(0).spacing();
            if lam > 0.0 {
                let n = u.len();
                let keep = 1.0 - lam;
                let s = &mut self.scratch;
                s.copy_from_slice(u);
                if d > 0.0 {
                    for i in 1..n - 1 {
                        u[i] = keep * s[i] + lam * s[i + 1];
                    }
                } else {
                    for i in 1..n - 1 {
                        u[i] = keep * s[i] + lam * s[i - 1];
                    }
                }
            }
        }

        let factors = self.problem.reaction.time_factors(&state.phase);
        let terms = self.problem.reaction.terms();
        let mut base: PowerCoefficients = [0.0; 4];
        for (k, t) in terms.iter().enumerate() {
            if self.weights[k].is_none() {
                base[t.power as usize] += factors[k];
            }
        }
        let spatial = self.weights.iter().any(Option::is_some);
        for (i, v) in u.iter_mut().enumerate() {
            let mut c = base;
            if spatial {
                for (k, t) in terms.iter().enumerate() {
                    if let Some(w) = &self.weights[k] {
                        c[t.power as usize] += factors[k] * w[i];
                    }
                }
            }
            *v = dd::reaction_update(*v, dt, &c);
        }

        if self.config.boundary == Boundary::DirichletZero {
            for &i in &self.edges {
                u[i] = 0.0;
            }
        }

        match &self.line_y {
            None => self.line_x.solve(u),
            Some(line_y) => {
                let (nx, ny) = (grid.nx(), grid.ny());
                for j in 1..ny - 1 {
                    self.line_x.solve_strided(u, j * nx, 1);
                }
                let s = &mut self.scratch;
                for j in 0..ny {
                    s[2 * j] = u[j * nx];
                    s[2 * j + 1] = u[j * nx + nx - 1];
                }
                line_y.solve_columns(u, nx);
                for j in 0..ny {
                    u[j * nx] = s[2 * j];
                    u[j * nx + nx - 1] = s[2 * j + 1];
                }
            }
        }

        if let Some(node) = u.iter().position(|v| !v.is_finite()) {
            return Err(LabError::NonFiniteState { time: state.time, node });
        }
        state.phase = advance_phase(&state.phase, self.problem.reaction.basis(), dt);
        state.time += dt;
        Ok(())
    }

    pub fn advance(&mut self, state: &mut SkewState, steps: usize) -> Result<()> {
        for _ in 0..steps {
            self.step(state)?;
        }
        Ok(())
    }
}

/// One step of the semiflow.
pub fn step(state: &SkewState, problem: &Problem, config: &IntegratorConfig) -> Result<SkewState> {
    let mut s = state.clone();
    Stepper::new(problem, *config)?.step(&mut s)?;
    Ok(s)
}

/// Number of steps of size `dt` in `t`, if `t` is a multiple of `dt`.
pub fn steps_for(t: f64, dt: f64) -> Result<usize> {
    if !(t >= 0.0) {
        return Err(LabError::InvalidArgument(format!("time {t} must be nonnegative")));
    }
    let k = (t / dt).round();
    if (k * dt - t).abs() > 1e-9 * t.max(1.0) {
        return Err(LabError::InvalidArgument(format!(
            "time {t} is not a multiple of dt = {dt}"
        )));
    }
    Ok(k as usize)
}

/// Integrates to `t_end`, returning the states at `sample_times` (sorted),
/// or the final state alone when no samples are requested.
pub fn integrate(
    state: &SkewState,
    t_end: f64,
    problem: &Problem,
    config: &IntegratorConfig,
    sample_times: &[f64],
) -> Result<Vec<SkewState>> {
    let total = steps_for(t_end, config.dt)?;
    let mut marks = sample_times
        .iter()
        .map(|&s| {
            let k = steps_for(s, config.dt)?;
            if k > total {
                return Err(LabError::InvalidArgument(format!(
                    "sample time {s} lies beyond T = {t_end}"
                )));
            }
            Ok(k)
        })
        .collect::<Result<Vec<_>>>()?;
    marks.sort_unstable();
    if marks.is_empty() {
        marks.push(total);
    }
    let mut stepper = Stepper::new(problem, *config)?;
    let mut cur = state.clone();
    let mut done = 0;
    let mut out = Vec::with_capacity(marks.len());
    for k in marks {
        stepper.advance(&mut cur, k - done)?;
        done = k;
        out.push(cur.clone());
    }
    Ok(out)
}

/// Trajectory of `u' = g(t, u)` from `u0` with the explicit reaction step,
/// one value per step including the start.
pub fn homogeneous_solution(
    reaction: &ReactionTerm,
    phase: &TorusPhase,
    u0: f64,
    t_end: f64,
    dt: f64,
) -> Result<Vec<f64>> {
    if !reaction.x_independent() {
        return Err(LabError::InvalidArgument(
            "homogeneous solutions need an x-independent reaction".into(),
        ));
    }
    if !(dt > 0.0) {
        return Err(LabError::InvalidArgument("dt must be positive".into()));
    }
    let steps = steps_for(t_end, dt)?;
    let mut phase = phase.clone();
    let mut u = u0;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(u);
    for n in 0..steps {
        let c = reaction.power_coefficients(&reaction.time_factors(&phase), 0.0);
        u = dd::reaction_update(u, dt, &c);
        if !u.is_finite() {
            return Err(LabError::NonFiniteState {
                time: n as f64 * dt,
                node: 0,
            });
        }
        out.push(u);
        phase = advance_phase(&phase, reaction.basis(), dt);
    }
    Ok(out)
}

/// First crossing of `level` along a 1-D profile, located by linear
/// interpolation between nodes.
pub fn front_position(profile: &Profile, level: f64) -> Option<f64> {
    let axis = profile.grid().axis(0);
    let v = profile.values();
    for i in 0..v.len() - 1 {
        let (a, b) = (v[i] - level, v[i + 1] - level);
        if a == 0.0 {
            return Some(axis.coord(i));
        }
        if a * b < 0.0 {
            let s = a / (a - b);
            return Some(axis.coord(i) + s * axis.spacing());
        }
    }
    (v[v.len() - 1] == level).then(|| axis.coord(v.len() - 1))
}

/// Least-squares slope of the level-crossing position against time.
pub fn wave_speed_estimate(samples: &[(f64, Profile)], level: f64) -> Result<f64> {
    if samples.len() < 2 {
        return Err(LabError::InvalidArgument(
            "speed estimate needs at least two samples".into(),
        ));
    }
    let mut pts = Vec::with_capacity(samples.len());
    for (k, (t, p)) in samples.iter().enumerate() {
        let x = front_position(p, level).ok_or(LabError::NoCrossing { sample: k, level })?;
        pts.push((*t, x));
    }
    let n = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let xm = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - tm).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - tm) * (p.1 - xm)).sum();
    if sxx == 0.0 {
        return Err(LabError::InvalidArgument("samples share a single time".into()));
    }
    Ok(sxy / sxx)
}

/// Multi-indices `k` with `1 <= |k|_1 <= order`, one from each `±k` pair.
pub fn harmonic_indices(m: usize, order: i32) -> Vec<Vec<i32>> {
    let mut out = Vec::new();
    let mut k = vec![-order; m];
    loop {
        let l1: i32 = k.iter().map(|v| v.abs()).sum();
        let first = k.iter().find(|&&v| v != 0);
        if l1 >= 1 && l1 <= order && first.is_some_and(|&v| v > 0) {
            out.push(k.clone());
        }
        let mut j = 0;
        loop {
            if j == m {
                return out;
            }
            k[j] += 1;
            if k[j] <= order {
                break;
            }
            k[j] = -order;
            j += 1;
        }
    }
}

/// Refines a frame drift from the front positions observed in that frame.
///
/// The front position is fit by `p0 + p1 t + Σ (A_k cos θ_k + B_k sin θ_k)`
/// with `θ_k = 2π <k, phase>`; the returned drift adds `p1` and the time
/// derivative of the harmonic part, so the front becomes stationary in the
/// refined frame up to the neglected harmonics.
pub fn refine_drift(samples: &[SkewState], drift: &QPSignal, level: f64, order: i32) -> Result<QPSignal> {
    let basis = drift.basis().clone();
    let ks = harmonic_indices(basis.dim(), order);
    let cols = 2 + 2 * ks.len();
    if samples.len() < 2 * cols {
        return Err(LabError::InvalidArgument(format!(
            "drift fit needs at least {} samples, got {}",
            2 * cols,
            samples.len()
        )));
    }
    let t0 = samples[0].time;
    let mut a = nalgebra::DMatrix::<f64>::zeros(samples.len(), cols);
    let mut b = nalgebra::DVector::<f64>::zeros(samples.len());
    for (row, s) in samples.iter().enumerate() {
        b[row] = front_position(&s.profile, level).ok_or(LabError::NoCrossing { sample: row, level })?;
        a[(row, 0)] = 1.0;
        a[(row, 1)] = s.time - t0;
        for (j, k) in ks.iter().enumerate() {
            let arg: f64 =
                2.0 * std::f64::consts::PI * k.iter().zip(s.phase.theta()).map(|(&n, th)| n as f64 * th).sum::<f64>();
            a[(row, 2 + 2 * j)] = arg.cos();
            a[(row, 3 + 2 * j)] = arg.sin();
        }
    }
    let coef = a
        .svd(true, true)
        .solve(&b, 1e-12)
        .map_err(|e| LabError::InvalidArgument(format!("drift fit failed: {e}")))?;
    let mut harmonic = QPSignal::zero(basis);
    for (j, k) in ks.iter().enumerate() {
        harmonic = harmonic
            .with_cos(k.clone(), coef[2 + 2 * j])
            .with_sin(k.clone(), coef[3 + 2 * j]);
    }
    drift.add(&harmonic.derivative().with_constant(coef[1]))
}

/// Backward-Euler damped heat flow `φ_t = Δφ - αφ` on a 2-D grid with
/// pinned nodes held at their current values.
pub(crate) struct DampedHeat {
    nx: usize,
    ny: usize,
    rx: f64,
    ry: f64,
    decay: f64,
    pinned: Vec<bool>,
}

impl DampedHeat {
    pub(crate) fn new(grid: &Grid, dt: f64, alpha: f64, pinned: Vec<bool>) -> Result<Self> {
        if alpha * dt >= 1.0 {
            return Err(LabError::CflViolation(format!(
                "alpha * dt = {} must be below 1",
                alpha * dt
            )));
        }
        let hx = grid.axis(0).spacing();
        let hy = grid.axis(1).spacing();
        Ok(Self {
            nx: grid.nx(),
            ny: grid.ny(),
            rx: dt / (hx * hx),
            ry: dt / (hy * hy),
            decay: 1.0 - alpha * dt,
            pinned,
        })
    }

    pub(crate) fn step(&self, phi: &mut [f64]) {
        let (nx, ny) = (self.nx, self.ny);
        for (v, &p) in phi.iter_mut().zip(&self.pinned) {
            if !p {
                *v *= self.decay;
            }
        }
        for j in 0..ny {
            let row = j * nx..(j + 1) * nx;
            solve_pinned(&mut phi[row.clone()], &self.pinned[row], self.rx);
        }
        let mut col = vec![0.0; ny];
        let mut pin = vec![false; ny];
        for i in 0..nx {
            for j in 0..ny {
                col[j] = phi[j * nx + i];
                pin[j] = self.pinned[j * nx + i];
            }
            solve_pinned(&mut col, &pin, self.ry);
            for j in 0..ny {
                phi[j * nx + i] = col[j];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quasi_periodic::FrequencyBasis;

    fn basis1() -> FrequencyBasis {
        FrequencyBasis::new(vec![1.0]).unwrap()
    }

    #[test]
    fn constants_are_inert_under_diffusion() {
        let grid = Grid::line(-5.0, 5.0, 51).unwrap();
        let p = Problem::new(grid.clone(), ReactionTerm::zero(basis1()), (-1.0, 1.0)).unwrap();
        let cfg = IntegratorConfig::for_problem(&p, 0.1, Boundary::DirichletLimits);
        let s = SkewState::new(Profile::constant(grid, 0.7), TorusPhase::zero(1));
        let out = integrate(&s, 5.0, &p, &cfg, &[]).unwrap();
        // the line solve reproduces constants up to rounding
        assert!(out[0].profile.values().iter().all(|&v| (v - 0.7).abs() < 4e-15));
    }

    #[test]
    fn linear_decay_single_step_is_exact() {
        let grid = Grid::line(-5.0, 5.0, 51).unwrap();
        let f = ReactionTerm::linear(basis1(), 0.5).unwrap();
        let p = Problem::new(grid.clone(), f, (-2.0, 2.0)).unwrap();
        let cfg = IntegratorConfig::for_problem(&p, 0.01, Boundary::DirichletLimits);
        let s = SkewState::new(Profile::constant(grid, 1.0), TorusPhase::zero(1));
        let next = step(&s, &p, &cfg).unwrap();
        let expect = 1.0 - 0.5 * 0.01;
        assert!(next
            .profile
            .values()
            .iter()
            .all(|&v| (v - expect).abs() <= 2.0 * f64::EPSILON));
    }

    #[test]
    fn product_formula_matches_linear_decay() {
        let grid = Grid::line(-5.0, 5.0, 51).unwrap();
        let f = ReactionTerm::linear(basis1(), 1.0).unwrap();
        let p = Problem::new(grid.clone(), f, (-2.0, 2.0)).unwrap();
        let cfg = IntegratorConfig::for_problem(&p, 1e-3, Boundary::DirichletLimits);
        let s = SkewState::new(Profile::constant(grid, 1.0), TorusPhase::zero(1));
        let v = integrate(&s, 1.0, &p, &cfg, &[]).unwrap()[0].profile.values()[25];
        let product = (1.0f64 - 1e-3).powi(1000);
        assert!((v - product).abs() < 1e-12);
        assert!((v - (-1.0f64).exp()).abs() < 2e-4);
    }

    #[test]
    fn cocycle_is_bitwise() {
        let grid = Grid::line(-10.0, 10.0, 81).unwrap();
        let b = FrequencyBasis::new(vec![1.0, 2f64.sqrt()]).unwrap();
        let a = QPSignal::constant(b.clone(), 0.3).with_sin(vec![1, 0], 0.1);
        let f = ReactionTerm::bistable(a).unwrap();
        let drift = QPSignal::constant(b, 0.2).with_cos(vec![0, 1], 0.05);
        let p = Problem::wave(grid.clone(), f, Some(drift), (-0.5, 1.5)).unwrap();
        let cfg = IntegratorConfig::for_problem(&p, 0.01, Boundary::DirichletLimits);
        let u0 = Profile::from_fn(grid, |x, _| 0.5 - 0.5 * (x / 2.0).tanh());
        let s = SkewState::new(u0, TorusPhase::new(vec![0.1, 0.2]).unwrap());
        let direct = integrate(&s, 3.0, &p, &cfg, &[]).unwrap().pop().unwrap();
        let mid = integrate(&s, 1.2, &p, &cfg, &[]).unwrap().pop().unwrap();
        let two = integrate(&mid, 1.8, &p, &cfg, &[]).unwrap().pop().unwrap();
        assert_eq!(direct.profile.values(), two.profile.values());
        assert_eq!(direct.phase, two.phase);
    }

    #[test]
    fn homogeneous_solution_examples() {
        let f = ReactionTerm::linear(basis1(), 1.0).unwrap();
        let traj = homogeneous_solution(&f, &TorusPhase::zero(1), 1.0, 1.0, 1e-3).unwrap();
        assert!((traj[1000] - (-1.0f64).exp()).abs() < 2e-4);
        let a = QPSignal::constant(basis1(), 0.25);
        let g = ReactionTerm::bistable(a).unwrap();
        for u0 in [0.0, 1.0] {
            let t = homogeneous_solution(&g, &TorusPhase::zero(1), u0, 5.0, 0.01).unwrap();
            assert!(t.iter().all(|&v| v == u0));
        }
        let z = ReactionTerm::zero(basis1());
        let t = homogeneous_solution(&z, &TorusPhase::zero(1), 0.3, 1.0, 0.1).unwrap();
        assert!(t.iter().all(|&v| v == 0.3));
    }

    #[test]
    fn broken_step_ratio_is_rejected() {
        let grid = Grid::line(-5.0, 5.0, 51).unwrap();
        let a = QPSignal::constant(basis1(), 0.25);
        let p = Problem::new(grid, ReactionTerm::bistable(a).unwrap(), (-0.5, 1.5)).unwrap();
        let cfg = IntegratorConfig::with_step_ratio(&p, 1.5, Boundary::DirichletLimits);
        assert!(matches!(cfg.validate(&p), Err(LabError::CflViolation(_))));
        let ok = IntegratorConfig::with_step_ratio(&p, 0.5, Boundary::DirichletLimits);
        assert!(ok.validate(&p).is_ok());
    }

    #[test]
    fn translated_front_speed_is_recovered() {
        let grid = Grid::line(-20.0, 20.0, 401).unwrap();
        let samples: Vec<(f64, Profile)> = (0..20)
            .map(|k| {
                let t = k as f64 * 0.5;
                (
                    t,
                    Profile::from_fn(grid.clone(), |x, _| 1.0 / (1.0 + (x - 0.3 * t).exp())),
                )
            })
            .collect();
        let c = wave_speed_estimate(&samples, 0.5).unwrap();
        assert!((c - 0.3).abs() < 1e-6, "{c}");
        let flat = vec![
            (0.0, Profile::constant(grid.clone(), 0.2)),
            (1.0, Profile::constant(grid, 0.2)),
        ];
        assert!(matches!(
            wave_speed_estimate(&flat, 0.5),
            Err(LabError::NoCrossing { .. })
        ));
    }

    #[test]
    fn harmonic_indices_cover_half_lattice() {
        let ks = harmonic_indices(2, 2);
        assert_eq!(ks.len(), 6);
        for k in [[1, 0], [0, 1], [2, 0], [0, 2], [1, 1], [1, -1]] {
            assert!(ks.contains(&k.to_vec()), "{k:?}");
        }
    }

    #[test]
    fn damped_heat_is_nonincreasing_from_constant_data() {
        let grid = Grid::rect((-3.0, 3.0, 25), (-3.0, 3.0, 25)).unwrap();
        let pinned: Vec<bool> = (0..grid.len())
            .map(|i| grid.is_edge(i) || grid.radius(i) < 1.0)
            .collect();
        let heat = DampedHeat::new(&grid, 0.05, 0.5, pinned).unwrap();
        let mut phi = vec![1.0; grid.len()];
        for _ in 0..50 {
            let prev = phi.clone();
            heat.step(&mut phi);
            assert!(phi.iter().zip(&prev).all(|(a, b)| a <= b));
        }
        assert!(phi.iter().all(|&v| v > 0.0));
    }
}
