use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::VerifierReport;
use crate::error::{LabError, Result};
use crate::profile::{Grid, Profile};
use crate::reaction::max_derivative;
use crate::semiflow::{steps_for, DampedHeat, IntegratorConfig, Problem, SkewState, Stepper};

/// Inputs of the exterior comparison estimate.
#[derive(Debug, Clone)]
pub struct DecayScenario {
    /// Point of the reference cover at the starting fiber.
    pub cover: SkewState,
    /// Initial datum of the compared solution.
    pub initial: Profile,
    /// Exterior region `|x| >= radius`.
    pub radius: f64,
    pub eps0: f64,
    pub alpha: f64,
    pub t_end: f64,
}

/// Nodes inside `radius` with a grid neighbour outside it.
fn ring_nodes(grid: &Grid, radius: f64) -> Vec<usize> {
    let nx = grid.nx();
    let ny = grid.ny();
    let ext = |i: usize| grid.radius(i) >= radius;
    (0..grid.len())
        .filter(|&k| {
            if ext(k) {
                return false;
            }
            let (i, j) = (k % nx, k / nx);
            let mut nb = Vec::with_capacity(4);
            if i > 0 {
                nb.push(k - 1);
            }
            if i + 1 < nx {
                nb.push(k + 1);
            }
            if grid.dim() == 2 {
                if j > 0 {
                    nb.push(k - nx);
                }
                if j + 1 < ny {
                    nb.push(k + nx);
                }
            }
            nb.into_iter().any(ext)
        })
        .collect()
}

/// Checks `ū(t,x) - u(t,x) >= -2 ε0 e^{-α t}` on `|x| >= R` at every step.
///
/// Hypotheses checked along the way: the initial gap is at least `-2 ε0`,
/// `u <= ū` on the ring just inside `|x| = R`, and `∂f/∂u <= -α` on the
/// whole interval between `u` and `ū` at exterior nodes. A failed
/// hypothesis is returned as [`LabError::HypothesisViolated`].
pub fn check_decay_bound(problem: &Problem, config: &IntegratorConfig, sc: &DecayScenario) -> Result<VerifierReport> {
    let start = Instant::now();
    let grid = &problem.grid;
    if sc.initial.grid() != grid || sc.cover.profile.grid() != grid {
        return Err(LabError::GridMismatch);
    }
    let exterior: Vec<usize> = (0..grid.len()).filter(|&i| grid.radius(i) >= sc.radius).collect();
    let radii: Vec<f64> = exterior.iter().map(|&i| grid.radius(i)).collect();
    let ring = ring_nodes(grid, sc.radius);
    let steps = steps_for(sc.t_end, config.dt)?;
    let mut stepper = Stepper::new(problem, *config)?;
    let mut ubar = sc.cover.clone();
    let mut u = SkewState {
        profile: sc.initial.clone(),
        ..sc.cover.clone()
    };
    let f = &problem.reaction;
    let mut worst: f64 = f64::NEG_INFINITY;
    for n in 0..=steps {
        let t = n as f64 * config.dt;
        let (a, b) = (u.profile.values(), ubar.profile.values());
        if n == 0 {
            if let Some(&i) = exterior.iter().find(|&&i| b[i] - a[i] < -2.0 * sc.eps0) {
                return Err(LabError::HypothesisViolated(format!(
                    "initial gap {:.3e} below -2 eps0 at node {i}",
                    b[i] - a[i]
                )));
            }
        }
        if let Some(&i) = ring.iter().find(|&&i| a[i] > b[i] + 1e-12) {
            return Err(LabError::HypothesisViolated(format!(
                "u exceeds the reference on the ring at node {i}, t = {t:.4}"
            )));
        }
        let factors = f.time_factors(&u.phase);
        for (&i, &r) in exterior.iter().zip(&radii) {
            let c = f.power_coefficients(&factors, r);
            let m = max_derivative(&c, a[i].min(b[i]), a[i].max(b[i]));
            if m > -sc.alpha + 1e-12 {
                return Err(LabError::HypothesisViolated(format!(
                    "df/du = {m:.4} exceeds -alpha at node {i}, t = {t:.4}"
                )));
            }
            let bound = -2.0 * sc.eps0 * (-sc.alpha * t).exp();
            worst = worst.max(bound - (b[i] - a[i]));
        }
        if n < steps {
            stepper.step(&mut ubar)?;
            stepper.step(&mut u)?;
        }
    }
    Ok(
        VerifierReport::measured("decay_bound", worst, 1e-10, "exponential bound 2 eps0 exp(-alpha t)")
            .with_note(format!(
                "R = {}, eps0 = {}, alpha = {}, {} exterior nodes, {steps} steps",
                sc.radius,
                sc.eps0,
                sc.alpha,
                exterior.len()
            ))
            .timed(start),
    )
}

/// Smallest radius `R >= r0` such that `|ū| <= eps_star` at every node with
/// `|x| >= R`.
pub fn exterior_radius(grid: &Grid, cover: &Profile, r0: f64, eps_star: f64) -> f64 {
    cover
        .values()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > eps_star)
        .fold(r0, |r, (i, _)| r.max(grid.radius(i) + 1e-9))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupersolutionPair {
    pub radius: f64,
    pub eps_star: f64,
    /// Largest increase of φ⁺ between consecutive steps at any node.
    pub phi_increase: f64,
    /// Largest `|u - ū| - φ⁺` over exterior nodes and steps.
    pub trapping_excess: f64,
    pub first_violation: Option<String>,
    /// Max exterior `|u - ū|` at the start and at the end.
    pub initial_deviation: f64,
    pub final_deviation: f64,
    /// Max of φ⁺ over exterior nodes at the end.
    pub phi_final: f64,
    pub steps: usize,
}

/// Slack allowed for rounding in the trapping and monotonicity checks.
pub const TRAPPING_SLACK: f64 = 1e-12;

impl SupersolutionPair {
    pub fn trapped(&self) -> bool {
        self.trapping_excess <= TRAPPING_SLACK
    }

    /// `Err(TrappingViolated)` when the solution leaves the trap.
    pub fn check(&self) -> Result<()> {
        match &self.first_violation {
            Some(m) if !self.trapped() => Err(LabError::TrappingViolated(m.clone())),
            _ => Ok(()),
        }
    }

    pub fn report(&self) -> VerifierReport {
        let measured = self.trapping_excess.max(self.phi_increase);
        let mut r = VerifierReport::measured("supersolution", measured, TRAPPING_SLACK, "damped heat supersolution");
        if self.final_deviation >= self.initial_deviation {
            r.outcome = super::Outcome::Fail;
        }
        r.with_note(format!(
            "R = {:.4}, eps* = {}, exterior |u - ubar| {:.3e} -> {:.3e}, phi+ max at end {:.3e}",
            self.radius, self.eps_star, self.initial_deviation, self.final_deviation, self.phi_final
        ))
    }
}

/// Integrates `φ⁺_t = Δφ⁺ - α φ⁺` on the exterior of `B_R` with `φ⁺ = 3ε*`
/// initially, on `B_R` and on the box edges, and checks the trap
/// `ū - φ⁺ <= u <= ū + φ⁺` (`φ⁻ = -φ⁺`) at exterior nodes.
///
/// `radius = None` picks the smallest admissible `R >= r0`.
#[allow(clippy::too_many_arguments)]
pub fn supersolution_pair(
    problem: &Problem,
    config: &IntegratorConfig,
    cover: &SkewState,
    initial: &Profile,
    radius: Option<f64>,
    r0: f64,
    eps_star: f64,
    alpha: f64,
    t_end: f64,
) -> Result<SupersolutionPair> {
    let grid = &problem.grid;
    if grid.dim() != 2 {
        return Err(LabError::InvalidArgument(
            "the supersolution lives on a 2-D grid".into(),
        ));
    }
    let radius = radius.unwrap_or_else(|| exterior_radius(grid, &cover.profile, r0, eps_star));
    if radius < r0 {
        return Err(LabError::HypothesisViolated(format!("R = {radius} is below R0 = {r0}")));
    }
    let pinned: Vec<bool> = (0..grid.len())
        .map(|i| grid.is_edge(i) || grid.radius(i) < radius)
        .collect();
    let exterior: Vec<usize> = (0..grid.len()).filter(|&i| !pinned[i]).collect();
    let dev = |u: &Profile, v: &Profile, i: usize| (u.values()[i] - v.values()[i]).abs();
    let initial_deviation = exterior
        .iter()
        .map(|&i| dev(initial, &cover.profile, i))
        .fold(0.0, f64::max);
    if initial_deviation > 2.0 * eps_star {
        return Err(LabError::HypothesisViolated(format!(
            "initial exterior deviation {initial_deviation:.3e} exceeds 2 eps* = {}",
            2.0 * eps_star
        )));
    }
    let heat = DampedHeat::new(grid, config.dt, alpha, pinned)?;
    let mut phi = vec![3.0 * eps_star; grid.len()];
    let steps = steps_for(t_end, config.dt)?;
    let mut stepper = Stepper::new(problem, *config)?;
    let mut ubar = cover.clone();
    let mut u = SkewState {
        profile: initial.clone(),
        ..cover.clone()
    };
    let mut phi_increase = f64::NEG_INFINITY;
    let mut excess = f64::NEG_INFINITY;
    let mut first_violation = None;
    for n in 0..=steps {
        for &i in &exterior {
            let e = dev(&u.profile, &ubar.profile, i) - phi[i];
            if e > TRAPPING_SLACK && first_violation.is_none() {
                let [x, y] = grid.coords(i);
                first_violation = Some(format!(
                    "node ({x:.3}, {y:.3}) at t = {:.4}: excess {e:.3e}",
                    n as f64 * config.dt
                ));
            }
            excess = excess.max(e);
        }
        if n == steps {
            break;
        }
        let prev = phi.clone();
        heat.step(&mut phi);
        for (a, b) in phi.iter().zip(&prev) {
            phi_increase = phi_increase.max(a - b);
        }
        stepper.step(&mut ubar)?;
        stepper.step(&mut u)?;
    }
    let final_deviation = exterior
        .iter()
        .map(|&i| dev(&u.profile, &ubar.profile, i))
        .fold(0.0, f64::max);
    let phi_final = exterior.iter().map(|&i| phi[i]).fold(0.0, f64::max);
    Ok(SupersolutionPair {
        radius,
        eps_star,
        phi_increase: phi_increase.max(0.0),
        trapping_excess: excess,
        first_violation,
        initial_deviation,
        final_deviation,
        phi_final,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quasi_periodic::{FrequencyBasis, TorusPhase};
    use crate::reaction::ReactionTerm;
    use crate::semiflow::Boundary;

    fn analytic(alpha: f64, dt: f64) -> VerifierReport {
        let b = FrequencyBasis::new(vec![1.0]).unwrap();
        let grid = Grid::line(-5.0, 5.0, 21).unwrap();
        let f = ReactionTerm::linear(b, alpha).unwrap();
        let p = Problem::new(grid.clone(), f, (-1.0, 1.0)).unwrap();
        let cfg = IntegratorConfig::for_problem(&p, dt, Boundary::DirichletLimits);
        let eps0 = 0.1;
        let sc = DecayScenario {
            cover: SkewState::new(Profile::constant(grid.clone(), 0.0), TorusPhase::zero(1)),
            initial: Profile::constant(grid, 2.0 * eps0),
            radius: 0.0,
            eps0,
            alpha,
            t_end: 200.0 * dt,
        };
        check_decay_bound(&p, &cfg, &sc).unwrap()
    }

    #[test]
    fn analytic_case_passes_with_slack() {
        for (alpha, dt) in [(1.0, 0.1), (1.0, 0.01), (0.5, 0.002)] {
            let r = analytic(alpha, dt);
            assert!(r.passed(), "{r:?}");
            assert!(r.measured.unwrap() <= 0.0);
        }
    }

    #[test]
    fn ring_surrounds_the_disk() {
        let grid = Grid::rect((-3.0, 3.0, 13), (-3.0, 3.0, 13)).unwrap();
        let ring = ring_nodes(&grid, 1.2);
        assert!(!ring.is_empty());
        assert!(ring.iter().all(|&i| grid.radius(i) < 1.2 && grid.radius(i) > 0.5));
    }
}
