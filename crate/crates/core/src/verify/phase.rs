use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::group::GroupElement;
use crate::profile::{sup_distance, Profile};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section minimization of `f` on `[a, b]` down to an interval of
/// width `tol`; returns the midpoint of the final interval.
pub fn golden_section(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseOptions {
    /// Search interval for the shift.
    pub bracket: (f64, f64),
    /// Golden-section termination width.
    pub tol: f64,
    /// Coarse scan points used to localize the minimizer.
    pub scan_points: usize,
    /// Allowed spread of σ(t) over the Cauchy window.
    pub cauchy_tol: f64,
    /// Start of the Cauchy window; `None` uses the final quarter of samples.
    pub window_start: Option<f64>,
}

impl Default for PhaseOptions {
    fn default() -> Self {
        Self {
            bracket: (-5.0, 5.0),
            tol: 1e-6,
            scan_points: 81,
            cauchy_tol: 1e-3,
            window_start: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSeries {
    pub times: Vec<f64>,
    pub sigma: Vec<f64>,
    pub residual: Vec<f64>,
    /// Final value of σ(t).
    pub sigma_star: f64,
    /// max - min of σ(t) over the Cauchy window.
    pub spread: f64,
    /// Mean residual over the second half below the first half.
    pub residual_decreasing: bool,
}

/// Fits `u(t) ≈ φ(· - σ, t)` at every sample by minimizing the sup-norm
/// distance over σ. `reference[k]` is the reference profile over the same
/// fiber as `trajectory[k]`.
pub fn extract_asymptotic_phase(
    trajectory: &[(f64, Profile)],
    reference: &[Profile],
    opts: &PhaseOptions,
) -> Result<PhaseSeries> {
    if trajectory.len() != reference.len() || trajectory.is_empty() {
        return Err(LabError::InvalidArgument(
            "trajectory and reference must pair up".into(),
        ));
    }
    let (lo, hi) = opts.bracket;
    if !(hi > lo) || opts.scan_points < 3 {
        return Err(LabError::InvalidArgument(
            "phase bracket must be a nonempty interval".into(),
        ));
    }
    let mut times = Vec::new();
    let mut sigma = Vec::new();
    let mut residual = Vec::new();
    for (k, ((t, u), phi)) in trajectory.iter().zip(reference).enumerate() {
        let obj = |s: f64| -> f64 {
            GroupElement::shift(s)
                .apply(phi)
                .and_then(|p| sup_distance(u, &p))
                .unwrap_or(f64::INFINITY)
        };
        let step = (hi - lo) / (opts.scan_points - 1) as f64;
        let (best, _) = (0..opts.scan_points)
            .map(|i| lo + i as f64 * step)
            .map(|s| (s, obj(s)))
            .fold((lo, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        let a = (best - step).max(lo);
        let b = (best + step).min(hi);
        let s = golden_section(obj, a, b, opts.tol);
        if s - lo < 2.0 * opts.tol || hi - s < 2.0 * opts.tol {
            return Err(LabError::BracketFailure { sample: k, sigma: s });
        }
        times.push(*t);
        residual.push(obj(s));
        sigma.push(s);
    }
    let from = match opts.window_start {
        Some(t0) => times.iter().position(|&t| t >= t0).unwrap_or(times.len() - 1),
        None => times.len() - times.len().div_ceil(4),
    };
    let window = &sigma[from..];
    let spread =
        window.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - window.iter().cloned().fold(f64::INFINITY, f64::min);
    let half = residual.len() / 2;
    let mean = |r: &[f64]| r.iter().sum::<f64>() / r.len().max(1) as f64;
    let residual_decreasing = residual.len() < 2 || mean(&residual[half..]) <= mean(&residual[..half]);
    let series = PhaseSeries {
        sigma_star: *sigma.last().expect("nonempty"),
        times,
        sigma,
        residual,
        spread,
        residual_decreasing,
    };
    if spread > opts.cauchy_tol {
        return Err(LabError::NoConvergence {
            spread,
            tol: opts.cauchy_tol,
        });
    }
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::Grid;

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let x = golden_section(|s| (s - 0.3).powi(2), -2.0, 2.0, 1e-9);
        assert!((x - 0.3).abs() < 1e-8);
    }

    #[test]
    fn family_member_returns_its_shift() {
        let grid = Grid::line(-20.0, 20.0, 401).unwrap();
        let phi = Profile::from_fn(grid, |x, _| 1.0 / (1.0 + (x / 2f64.sqrt()).exp()));
        let u = GroupElement::shift(0.7).apply(&phi).unwrap();
        let traj: Vec<(f64, Profile)> = (0..4).map(|k| (k as f64, u.clone())).collect();
        let refs = vec![phi; 4];
        let s = extract_asymptotic_phase(&traj, &refs, &PhaseOptions::default()).unwrap();
        assert!(s.sigma.iter().all(|v| (v - 0.7).abs() < 1e-6), "{:?}", s.sigma);
        // zero up to the golden-section resolution
        assert!(s.residual.iter().all(|&r| r < 1e-6));
    }

    #[test]
    fn minimizer_on_the_boundary_is_a_bracket_failure() {
        let grid = Grid::line(-20.0, 20.0, 401).unwrap();
        let phi = Profile::from_fn(grid, |x, _| 1.0 / (1.0 + x.exp()));
        let u = GroupElement::shift(3.0).apply(&phi).unwrap();
        let opts = PhaseOptions {
            bracket: (-1.0, 1.0),
            ..PhaseOptions::default()
        };
        let r = extract_asymptotic_phase(&[(0.0, u)], &[phi], &opts);
        assert!(matches!(r, Err(LabError::BracketFailure { .. })));
    }
}
