use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{InitialSpec, WaveSpec};
use crate::error::{LabError, Result};
use crate::profile::{Grid, Profile};
use crate::quasi_periodic::QPSignal;
use crate::semiflow::{front_position, integrate, refine_drift, IntegratorConfig, Problem, SkewState};

/// Builds the initial datum on `grid`. `a_mean` is needed only for pulses.
pub fn initial_profile(spec: &InitialSpec, grid: &Grid, seed: u64, a_mean: Option<f64>) -> Result<Profile> {
    Ok(match spec {
        InitialSpec::Constant { value } => Profile::constant(grid.clone(), *value),
        InitialSpec::Front {
            center,
            width,
            high,
            low,
            bumps,
            bump_amplitude,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ax = grid.axis(0);
            let quarter = 0.25 * (ax.max - ax.min);
            let bumps: Vec<(f64, f64, f64)> = (0..*bumps)
                .map(|_| {
                    let c = rng.random_range(center - quarter..center + quarter);
                    let w = rng.random_range(0.5..2.0);
                    let s = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                    (c, w, s * bump_amplitude)
                })
                .collect();
            Profile::from_fn(grid.clone(), |x, _| {
                let front = high + (low - high) / (1.0 + (-(x - center) / width).exp());
                front
                    + bumps
                        .iter()
                        .map(|&(c, w, a)| a * (-(x - c).powi(2) / (2.0 * w * w)).exp())
                        .sum::<f64>()
            })
        }
        InitialSpec::Gaussian {
            amplitude,
            center,
            widths,
        } => {
            let c = |k: usize| center.get(k).copied().unwrap_or(0.0);
            let w = |k: usize| widths.get(k).copied().unwrap_or(1.0);
            let two_d = grid.dim() == 2;
            Profile::from_fn(grid.clone(), |x, y| {
                let mut e = (x - c(0)).powi(2) / (2.0 * w(0) * w(0));
                if two_d {
                    e += (y - c(1)).powi(2) / (2.0 * w(1) * w(1));
                }
                amplitude * (-e).exp()
            })
        }
        InitialSpec::Pulse => {
            let a = a_mean.ok_or_else(|| LabError::InvalidArgument("pulse needs a bistable reaction".into()))?;
            stationary_pulse(a, grid)?
        }
    })
}

/// Height of the even stationary pulse of `u'' + u(1-u)(u-a) = 0`: the
/// smaller positive root of `3u^2 - 4(1+a)u + 6a = 0`.
pub fn pulse_height(a: f64) -> Result<f64> {
    if !(a > 0.0 && a < 0.5) {
        return Err(LabError::InvalidArgument(format!(
            "a pulse exists for 0 < a < 1/2, got a = {a}"
        )));
    }
    let disc = 16.0 * (1.0 + a).powi(2) - 72.0 * a;
    Ok((4.0 * (1.0 + a) - disc.sqrt()) / 6.0)
}

/// Stationary pulse centered at the origin, by RK4 integration of
/// `u'' = -u(1-u)(u-a)` from `(u, u') = (height, 0)`. The unstable
/// direction of the tail is cut off where the orbit stops decreasing.
pub fn stationary_pulse(a: f64, grid: &Grid) -> Result<Profile> {
    if grid.dim() != 1 {
        return Err(LabError::InvalidArgument("pulses live on 1-D grids".into()));
    }
    let um = pulse_height(a)?;
    let f = |u: f64| u * (1.0 - u) * (u - a);
    let ax = grid.axis(0);
    let reach = ax.max.abs().max(ax.min.abs());
    let sub = 20;
    let hs = ax.spacing() / sub as f64;
    let n = (reach / hs).ceil() as usize + 1;
    let mut vals = Vec::with_capacity(n + 1);
    let (mut u, mut v) = (um, 0.0f64);
    vals.push(u);
    let mut dead = false;
    for _ in 0..n {
        if !dead {
            let rhs = |u: f64, v: f64| (v, -f(u));
            let (k1u, k1v) = rhs(u, v);
            let (k2u, k2v) = rhs(u + 0.5 * hs * k1u, v + 0.5 * hs * k1v);
            let (k3u, k3v) = rhs(u + 0.5 * hs * k2u, v + 0.5 * hs * k2v);
            let (k4u, k4v) = rhs(u + hs * k3u, v + hs * k3v);
            let nu = u + hs / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
            let nv = v + hs / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
            if nu <= 0.0 || nv >= 0.0 {
                dead = true;
                u = u.max(0.0);
            } else {
                u = nu;
                v = nv;
            }
        }
        vals.push(if dead { 0.0 } else { u });
    }
    let at = |r: f64| -> f64 {
        let s = r.abs() / hs;
        let i = s.floor() as usize;
        if i + 1 >= vals.len() {
            return 0.0;
        }
        let w = s - i as f64;
        (1.0 - w) * vals[i] + w * vals[i + 1]
    };
    Ok(Profile::from_fn(grid.clone(), |x, _| at(x)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRound {
    pub mean_drift: f64,
    /// Spread of the fitted front positions after the fit window starts.
    pub front_spread: f64,
}

#[derive(Debug, Clone)]
pub struct WaveCalibration {
    pub drift: QPSignal,
    /// Problem in the frame moving with `drift`.
    pub problem: Problem,
    pub config: IntegratorConfig,
    /// Last state of the final round, time reset to zero.
    pub cover: SkewState,
    pub rounds: Vec<CalibrationRound>,
}

/// Finds the frame drift `d(t)` in which the front is stationary by
/// repeated fits of the level-set position against hull harmonics.
pub fn calibrate_wave(
    problem: &Problem,
    config: &IntegratorConfig,
    start: &SkewState,
    spec: &WaveSpec,
) -> Result<WaveCalibration> {
    let basis = problem.reaction.basis().clone();
    let mut drift = QPSignal::constant(basis, spec.initial_drift);
    let mut state = start.clone();
    let mut rounds = Vec::new();
    let mut moving = problem.clone().with_drift(Some(drift.clone()));
    for _ in 0..spec.rounds {
        moving = problem.clone().with_drift(Some(drift.clone()));
        config.validate(&moving)?;
        let times: Vec<f64> = (1..=spec.samples_per_round)
            .map(|k| (k * spec.sample_stride) as f64 * config.dt)
            .collect();
        let samples = integrate(&state, *times.last().expect("samples"), &moving, config, &times)?;
        let from = samples.len() / 4;
        let xs: Vec<f64> = samples[from..]
            .iter()
            .enumerate()
            .map(|(i, s)| {
                front_position(&s.profile, spec.level).ok_or(LabError::NoCrossing {
                    sample: from + i,
                    level: spec.level,
                })
            })
            .collect::<Result<_>>()?;
        let spread =
            xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - xs.iter().cloned().fold(f64::INFINITY, f64::min);
        drift = refine_drift(&samples[from..], &drift, spec.level, spec.harmonic_order)?;
        rounds.push(CalibrationRound {
            mean_drift: drift.mean(),
            front_spread: spread,
        });
        state = samples.last().expect("samples").clone();
        state.time = 0.0;
    }
    moving = moving.with_drift(Some(drift.clone()));
    config.validate(&moving)?;
    Ok(WaveCalibration {
        drift,
        problem: moving,
        config: *config,
        cover: state,
        rounds,
    })
}
