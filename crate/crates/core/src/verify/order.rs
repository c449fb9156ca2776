use std::time::Instant;

use super::VerifierReport;
use crate::error::{LabError, Result};
use crate::group::GroupElement;
use crate::profile::{leq, order_violation, wedge, Profile};
use crate::semiflow::{steps_for, IntegratorConfig, Problem, SkewState, Stepper};

/// Strictness is tested only at the mid-domain node; the pinned boundary
/// nodes of a truncated grid cannot order strictly.
pub const TOTAL_ORDER_NOTE: &str = "strictness witnessed at the mid-domain node; boundary nodes exempt";

/// Comparability of the translates `u(· - σ)` for every pair of sampled
/// shifts, with a direction consistent with the shift order and strict at
/// the mid-domain node. Measures the number of failing pairs.
pub fn check_total_order(profile: &Profile, shifts: &[f64], tol: f64) -> Result<VerifierReport> {
    let start = Instant::now();
    if profile.grid().dim() != 1 {
        return Err(LabError::InvalidArgument(
            "total order is checked on 1-D profiles".into(),
        ));
    }
    let mut sorted = shifts.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let moved: Vec<Profile> = sorted
        .iter()
        .map(|&s| GroupElement::shift(s).apply(profile))
        .collect::<Result<_>>()?;
    let mid = profile.values().len() / 2;
    // +1: larger shift gives the larger profile, -1: the smaller
    let mut direction = 0i8;
    let mut failing = 0usize;
    let mut worst_defect: f64 = 0.0;
    for i in 0..moved.len() {
        for j in i + 1..moved.len() {
            let (a, b) = (&moved[i], &moved[j]);
            let up = leq(a, b, tol)?;
            let down = leq(b, a, tol)?;
            let (da, db) = (a.values()[mid], b.values()[mid]);
            let dir = if up && db > da {
                1
            } else if down && da > db {
                -1
            } else {
                0
            };
            if dir == 0 || (direction != 0 && dir != direction) {
                failing += 1;
                worst_defect = worst_defect.max(order_violation(a, b)?.min(order_violation(b, a)?));
            } else {
                direction = dir;
            }
        }
    }
    let pairs = moved.len() * moved.len().saturating_sub(1) / 2;
    Ok(VerifierReport::measured(
        "total_order",
        failing as f64,
        0.0,
        "pairwise comparability of translates",
    )
    .with_note(format!(
        "{failing} of {pairs} pairs not strictly ordered; worst incomparability {worst_defect:.3e}"
    ))
    .with_note(TOTAL_ORDER_NOTE)
    .timed(start))
}

/// Consecutive differences one-signed up to `tol`. Measures the smaller of
/// the largest rise and the largest drop.
pub fn check_spatial_monotonicity(profile: &Profile, tol: f64) -> Result<VerifierReport> {
    let start = Instant::now();
    if profile.grid().dim() != 1 {
        return Err(LabError::InvalidArgument(
            "spatial monotonicity is checked on 1-D profiles".into(),
        ));
    }
    let v = profile.values();
    let (mut rise, mut drop) = (0.0f64, 0.0f64);
    for w in v.windows(2) {
        let d = w[1] - w[0];
        rise = rise.max(d);
        drop = drop.max(-d);
    }
    let measured = rise.min(drop);
    let shape = if drop <= tol {
        "nondecreasing"
    } else if rise <= tol {
        "nonincreasing"
    } else {
        "not monotone"
    };
    Ok(
        VerifierReport::measured("spatial_monotonicity", measured, tol, "sign of consecutive differences")
            .with_note(format!("{shape}: largest rise {rise:.3e}, largest drop {drop:.3e}"))
            .timed(start),
    )
}

/// Integrates `ū`, `g ū` and their wedge together and checks that the wedge
/// trajectory stays below both at every step, tolerance zero.
pub fn check_wedge_order(
    cover: &SkewState,
    g: &GroupElement,
    problem: &Problem,
    config: &IntegratorConfig,
    t_end: f64,
) -> Result<VerifierReport> {
    let start = Instant::now();
    let mut u = cover.clone();
    let mut v = SkewState {
        profile: g.apply(&cover.profile)?,
        ..cover.clone()
    };
    let mut w = SkewState {
        profile: wedge(&u.profile, &v.profile)?,
        ..cover.clone()
    };
    let mut stepper = Stepper::new(problem, *config)?;
    let steps = steps_for(t_end, config.dt)?;
    let mut worst = order_violation(&w.profile, &u.profile)?.max(order_violation(&w.profile, &v.profile)?);
    for _ in 0..steps {
        stepper.step(&mut u)?;
        stepper.step(&mut v)?;
        stepper.step(&mut w)?;
        worst = worst
            .max(order_violation(&w.profile, &u.profile)?)
            .max(order_violation(&w.profile, &v.profile)?);
    }
    let mid = u.profile.values().len() / 2;
    let gap = (u.profile.values()[mid] - v.profile.values()[mid]).abs();
    Ok(
        VerifierReport::measured("wedge_order", worst, 0.0, "order at tolerance zero")
            .with_note(format!(
                "{g}, T = {t_end}, final mid-domain gap between covers {gap:.3e}"
            ))
            .timed(start),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::Grid;

    fn line() -> Grid {
        Grid::line(-10.0, 10.0, 201).unwrap()
    }

    #[test]
    fn increasing_profile_is_totally_ordered() {
        let u = Profile::from_fn(line(), |x, _| x.tanh());
        let r = check_total_order(&u, &[-1.0, 0.0, 1.0], 0.0).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn pulse_translates_are_incomparable() {
        let u = Profile::from_fn(line(), |x, _| (-x * x).exp());
        let r = check_total_order(&u, &[-1.0, 1.0], 1e-8).unwrap();
        assert!(!r.passed());
    }

    #[test]
    fn monotonicity_examples() {
        assert!(
            check_spatial_monotonicity(&Profile::from_fn(line(), |x, _| 2.0 * x - 1.0), 0.0)
                .unwrap()
                .passed()
        );
        let s = Profile::from_fn(line(), |x, _| (x * std::f64::consts::PI / 5.0).sin());
        assert!(!check_spatial_monotonicity(&s, 1e-8).unwrap().passed());
    }
}
