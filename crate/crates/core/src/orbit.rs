//! Omega-limit estimation at base return times, 1-cover detection and
//! empirical moduli of uniform stability.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::profile::{hausdorff, sup_distance, Grid, Profile, ProfileSet};
use crate::quasi_periodic::return_times;
use crate::semiflow::{steps_for, IntegratorConfig, Problem, SkewState, Stepper};

/// A profile sampled over (nearly) the starting fiber.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberSample {
    pub time: f64,
    /// Torus distance between the sample's phase and the starting phase.
    pub phase_error: f64,
    pub profile: Profile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaStatus {
    Converged,
    Undecided,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OmegaLimitEstimate {
    pub samples: Vec<FiberSample>,
    /// Hausdorff distances between successive blocks of samples, coarse
    /// stage first.
    pub stage_diagnostics: Vec<f64>,
    pub diagnostic: f64,
    pub status: OmegaStatus,
    /// Clusters of the late-half samples (indices into `samples`).
    pub clusters: Vec<Vec<usize>>,
    pub eps_return: f64,
    pub tol: f64,
}

/// Serializable summary of an estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaLimitSummary {
    pub sample_times: Vec<f64>,
    pub phase_errors: Vec<f64>,
    pub stage_diagnostics: Vec<f64>,
    pub diagnostic: f64,
    pub status: OmegaStatus,
    pub cluster_sizes: Vec<usize>,
    pub cluster_diameters: Vec<f64>,
}

impl OmegaLimitEstimate {
    fn late_start(&self) -> usize {
        self.samples.len() / 2
    }

    /// The late-half samples, taken as the estimate of the fiber of the
    /// omega-limit set.
    pub fn limit_set(&self) -> Result<ProfileSet> {
        ProfileSet::new(
            self.samples[self.late_start()..]
                .iter()
                .map(|s| s.profile.clone())
                .collect(),
        )
    }

    pub fn cluster_diameter(&self, c: usize) -> f64 {
        let idx = &self.clusters[c];
        let mut d: f64 = 0.0;
        for (a, &i) in idx.iter().enumerate() {
            for &j in &idx[a + 1..] {
                d = d.max(sup_distance(&self.samples[i].profile, &self.samples[j].profile).unwrap_or(f64::INFINITY));
            }
        }
        d
    }

    pub fn summary(&self) -> OmegaLimitSummary {
        OmegaLimitSummary {
            sample_times: self.samples.iter().map(|s| s.time).collect(),
            phase_errors: self.samples.iter().map(|s| s.phase_error).collect(),
            stage_diagnostics: self.stage_diagnostics.clone(),
            diagnostic: self.diagnostic,
            status: self.status,
            cluster_sizes: self.clusters.iter().map(Vec::len).collect(),
            cluster_diameters: (0..self.clusters.len()).map(|c| self.cluster_diameter(c)).collect(),
        }
    }
}

fn set_distance(a: &[FiberSample], b: &[FiberSample]) -> Result<f64> {
    let a = ProfileSet::new(a.iter().map(|s| s.profile.clone()).collect())?;
    let b = ProfileSet::new(b.iter().map(|s| s.profile.clone()).collect())?;
    hausdorff(&a, &b)
}

/// Samples the forward orbit of `state` at base return times up to
/// `horizon` and estimates its omega-limit fiber.
///
/// Each maximal run of consecutive return steps is reduced to its closest
/// return. The first half of the samples is treated as transient. The coarse
/// stage compares the second quarter with the late half, the fine stage the
/// two halves of the late half; the estimate is converged when the fine
/// diagnostic is within `tol` and the two stages agree within `tol`.
pub fn omega_limit(
    state: &SkewState,
    problem: &Problem,
    config: &IntegratorConfig,
    eps_return: f64,
    horizon: f64,
    tol: f64,
) -> Result<OmegaLimitEstimate> {
    if !(horizon > 0.0) {
        return Err(LabError::EmptyReturnSet);
    }
    let basis = problem.reaction.basis();
    let times = return_times(&state.phase, basis, eps_return, horizon, config.dt)?;
    let steps: Vec<usize> = times.iter().map(|&t| steps_for(t, config.dt)).collect::<Result<_>>()?;

    let mut stepper = Stepper::new(problem, *config)?;
    let mut cur = state.clone();
    let mut done = 0;
    let mut samples: Vec<FiberSample> = Vec::new();
    let mut last_step: Option<usize> = None;
    for k in steps {
        stepper.advance(&mut cur, k - done)?;
        done = k;
        let err = cur.phase.distance(&state.phase);
        let contiguous = last_step == Some(k - 1);
        last_step = Some(k);
        if contiguous {
            let prev = samples.last_mut().expect("run has a sample");
            if err < prev.phase_error {
                *prev = FiberSample {
                    time: cur.time,
                    phase_error: err,
                    profile: cur.profile.clone(),
                };
            }
            continue;
        }
        samples.push(FiberSample {
            time: cur.time,
            phase_error: err,
            profile: cur.profile.clone(),
        });
    }

    let mut est = OmegaLimitEstimate {
        samples,
        stage_diagnostics: Vec::new(),
        diagnostic: f64::INFINITY,
        status: OmegaStatus::Undecided,
        clusters: Vec::new(),
        eps_return,
        tol,
    };
    let n = est.samples.len();
    if n >= 4 {
        let (q2, q3) = (n / 4, n / 2);
        let q4 = q3 + (n - q3) / 2;
        let coarse = set_distance(&est.samples[q2..q3], &est.samples[q3..])?;
        let fine = set_distance(&est.samples[q3..q4], &est.samples[q4..])?;
        est.stage_diagnostics = vec![coarse, fine];
        est.diagnostic = fine;
        // at the sampling floor the two stages differ by noise, so they need
        // only agree within `tol`
        if fine <= tol && (coarse - fine).abs() <= tol {
            est.status = OmegaStatus::Converged;
        }
    }

    let radius = 10.0 * eps_return;
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for i in est.late_start()..n {
        let p = &est.samples[i].profile;
        match clusters.iter_mut().find(|c| {
            sup_distance(&est.samples[c[0]].profile, p)
                .map(|d| d <= radius)
                .unwrap_or(false)
        }) {
            Some(c) => c.push(i),
            None => clusters.push(vec![i]),
        }
    }
    est.clusters = clusters;
    Ok(est)
}

/// True iff the estimate has a single fiber cluster of diameter below `tol`.
pub fn one_cover_check(estimate: &OmegaLimitEstimate, tol: f64) -> Result<bool> {
    if estimate.status != OmegaStatus::Converged {
        return Err(LabError::Undecided);
    }
    Ok(estimate.clusters.len() == 1 && estimate.cluster_diameter(0) < tol)
}

/// `(ε, δ(ε))` with the evidence behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusRow {
    pub eps: f64,
    pub delta: f64,
    /// Largest deviation seen among members started at `delta`.
    pub max_deviation: f64,
    /// First member that escaped at the rung above `delta`, if any.
    pub first_violation: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityModulus {
    pub rows: Vec<ModulusRow>,
    pub ensemble_size: usize,
    pub horizon: f64,
    pub ladder_depth: usize,
    /// Member with the largest deviation over all accepted rungs.
    pub worst_member: usize,
}

impl StabilityModulus {
    pub fn delta(&self, eps: f64) -> Option<f64> {
        self.rows.iter().find(|r| r.eps == eps).map(|r| r.delta)
    }
}

/// Unit sup-norm perturbations that vanish at the grid edge: 24 signed
/// smooth bumps with varied centers and widths, then smoothed uniform noise
/// for the remaining members.
pub fn perturbation_ensemble(grid: &Grid, size: usize, seed: u64) -> Vec<Profile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bumps = size.min(24).max(size.saturating_sub(8));
    let axes = grid.axes();
    let span: Vec<(f64, f64)> = axes.iter().map(|a| (a.min, a.max)).collect();
    let taper = |x: f64, y: f64| -> f64 {
        let mut t = 1.0;
        for (k, &v) in [x, y].iter().take(axes.len()).enumerate() {
            let (lo, hi) = span[k];
            let s = ((v - lo).min(hi - v) / (0.1 * (hi - lo))).clamp(0.0, 1.0);
            t *= s * s * (3.0 - 2.0 * s);
        }
        t
    };
    let mut out = Vec::with_capacity(size);
    for m in 0..size {
        let raw = if m < bumps {
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let width = rng.random_range(0.5..4.0);
            let c: Vec<f64> = span
                .iter()
                .map(|&(lo, hi)| {
                    let mid = 0.5 * (lo + hi);
                    let half = 0.25 * (hi - lo);
                    rng.random_range(mid - half..mid + half)
                })
                .collect();
            Profile::from_fn(grid.clone(), |x, y| {
                let mut r2 = (x - c[0]).powi(2);
                if c.len() > 1 {
                    r2 += (y - c[1]).powi(2);
                }
                sign * (-r2 / (2.0 * width * width)).exp()
            })
        } else {
            let noise: Vec<f64> = (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
            Profile::new(grid.clone(), smooth_once(grid, &noise)).expect("finite noise")
        };
        let tapered: Vec<f64> = raw
            .values()
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let [x, y] = grid.coords(i);
                v * taper(x, y)
            })
            .collect();
        let norm = tapered.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let scale = if norm > 0.0 { 1.0 / norm } else { 0.0 };
        out.push(Profile::new(grid.clone(), tapered.iter().map(|v| v * scale).collect()).expect("finite"));
    }
    out
}

/// One pass of nearest-neighbour averaging.
fn smooth_once(grid: &Grid, v: &[f64]) -> Vec<f64> {
    let nx = grid.nx();
    let ny = grid.ny();
    let mut out = v.to_vec();
    for j in 0..ny {
        for i in 0..nx {
            let mut sum = v[j * nx + i];
            let mut cnt = 1.0;
            let mut add = |ii: usize, jj: usize| {
                sum += v[jj * nx + ii];
                cnt += 1.0;
            };
            if i > 0 {
                add(i - 1, j);
            }
            if i + 1 < nx {
                add(i + 1, j);
            }
            if grid.dim() == 2 {
                if j > 0 {
                    add(i, j - 1);
                }
                if j + 1 < ny {
                    add(i, j + 1);
                }
            }
            out[j * nx + i] = sum / cnt;
        }
    }
    out
}

/// Steps between comparisons against the base trajectory.
const PROBE_STRIDE: usize = 5;

/// Largest deviation of the perturbed run from the base samples, stopping
/// early once it reaches `eps`.
fn member_deviation(
    base: &[Profile],
    start: &SkewState,
    problem: &Problem,
    config: &IntegratorConfig,
    eps: f64,
) -> Result<f64> {
    let mut stepper = Stepper::new(problem, *config)?;
    let mut cur = start.clone();
    let mut worst = sup_distance(&cur.profile, &base[0])?;
    for b in &base[1..] {
        if worst >= eps {
            break;
        }
        stepper.advance(&mut cur, PROBE_STRIDE)?;
        worst = worst.max(sup_distance(&cur.profile, b)?);
    }
    Ok(worst)
}

/// Probes the modulus of uniform stability around `base` on `[0, T]` over
/// the ladder `ε/2, ε/4, …, ε/2^depth`.
pub fn stability_probe(
    base: &SkewState,
    problem: &Problem,
    config: &IntegratorConfig,
    eps_list: &[f64],
    ensemble: &[Profile],
    horizon: f64,
    depth: usize,
) -> Result<StabilityModulus> {
    if ensemble.is_empty() || depth == 0 {
        return Err(LabError::InvalidArgument(
            "stability probe needs members and ladder rungs".into(),
        ));
    }
    let steps = steps_for(horizon, config.dt)?;
    let mut base_traj = Vec::with_capacity(steps / PROBE_STRIDE + 1);
    let mut stepper = Stepper::new(problem, *config)?;
    let mut cur = base.clone();
    base_traj.push(cur.profile.clone());
    for _ in 0..steps / PROBE_STRIDE {
        stepper.advance(&mut cur, PROBE_STRIDE)?;
        base_traj.push(cur.profile.clone());
    }

    let mut eps_sorted: Vec<f64> = eps_list.to_vec();
    eps_sorted.sort_by(f64::total_cmp);
    let mut rows: Vec<ModulusRow> = Vec::new();
    let mut worst = (0usize, f64::NEG_INFINITY);
    for &eps in &eps_sorted {
        let mut accepted: Option<(f64, f64, usize)> = None;
        let mut first_violation = None;
        let mut last_fail = (0.0, 0usize);
        for k in 1..=depth {
            let delta = eps / 2f64.powi(k as i32);
            let devs: Vec<f64> = ensemble
                .par_iter()
                .map(|pert| {
                    let start = SkewState {
                        profile: base.profile.zip_with(pert, |u, p| u + delta * p)?,
                        phase: base.phase.clone(),
                        time: base.time,
                    };
                    member_deviation(&base_traj, &start, problem, config, eps)
                })
                .collect::<Result<_>>()?;
            let (arg, max) = devs.iter().enumerate().fold(
                (0, f64::NEG_INFINITY),
                |acc, (i, &d)| if d > acc.1 { (i, d) } else { acc },
            );
            match devs.iter().position(|&d| d >= eps) {
                Some(m) => {
                    if first_violation.is_none() {
                        first_violation = Some(m);
                    }
                    last_fail = (delta, m);
                }
                None => {
                    accepted = Some((delta, max, arg));
                    break;
                }
            }
        }
        // a rung accepted for a smaller ε is also accepted for this one
        let prev = rows.last().map(|r| r.delta).unwrap_or(0.0);
        match accepted {
            Some((delta, max, arg)) => {
                if max > worst.1 {
                    worst = (arg, max);
                }
                rows.push(ModulusRow {
                    eps,
                    delta: delta.max(prev),
                    max_deviation: max,
                    first_violation,
                });
            }
            // members at the inherited rung stayed within the smaller ε
            None if prev > 0.0 => rows.push(ModulusRow {
                eps,
                delta: prev,
                max_deviation: rows.last().map(|r| r.max_deviation).unwrap_or(0.0),
                first_violation,
            }),
            None => {
                return Err(LabError::NotStable {
                    eps,
                    delta: last_fail.0,
                    member: last_fail.1,
                })
            }
        }
    }
    Ok(StabilityModulus {
        rows,
        ensemble_size: ensemble.len(),
        horizon,
        ladder_depth: depth,
        worst_member: worst.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quasi_periodic::{FrequencyBasis, QPSignal, TorusPhase};
    use crate::reaction::ReactionTerm;
    use crate::semiflow::Boundary;

    fn basis1() -> FrequencyBasis {
        FrequencyBasis::new(vec![1.0]).unwrap()
    }

    #[test]
    fn attracting_equilibrium_gives_single_cluster() {
        let grid = Grid::line(-10.0, 10.0, 81).unwrap();
        let f = ReactionTerm::linear(basis1(), 1.0).unwrap();
        let p = Problem::new(grid.clone(), f, (-2.0, 2.0)).unwrap();
        let dt = std::f64::consts::TAU / 200.0;
        let cfg = IntegratorConfig::for_problem(&p, dt, Boundary::DirichletZero);
        let u0 = Profile::from_fn(grid, |x, _| (-x * x).exp());
        let est = omega_limit(&SkewState::new(u0, TorusPhase::zero(1)), &p, &cfg, 1e-6, 60.0, 1e-4).unwrap();
        assert_eq!(est.status, OmegaStatus::Converged);
        assert!(one_cover_check(&est, 1e-3).unwrap());
        assert!(est.limit_set().unwrap().profiles().iter().all(|q| q.sup_norm() < 1e-8));
    }

    #[test]
    fn zero_horizon_has_no_returns() {
        let grid = Grid::line(-1.0, 1.0, 5).unwrap();
        let p = Problem::new(grid.clone(), ReactionTerm::zero(basis1()), (-1.0, 1.0)).unwrap();
        let cfg = IntegratorConfig::for_problem(&p, 0.1, Boundary::DirichletZero);
        let s = SkewState::new(Profile::constant(grid, 0.0), TorusPhase::zero(1));
        assert_eq!(omega_limit(&s, &p, &cfg, 0.1, 0.0, 1e-4), Err(LabError::EmptyReturnSet));
    }

    #[test]
    fn cover_check_counts_clusters() {
        let g = Grid::line(0.0, 1.0, 3).unwrap();
        let mk = |c: f64, t: f64| FiberSample {
            time: t,
            phase_error: 0.0,
            profile: Profile::constant(g.clone(), c),
        };
        let mut est = OmegaLimitEstimate {
            samples: vec![mk(0.0, 1.0), mk(1e-6, 2.0)],
            stage_diagnostics: vec![1e-6],
            diagnostic: 1e-6,
            status: OmegaStatus::Converged,
            clusters: vec![vec![0, 1]],
            eps_return: 1e-3,
            tol: 1e-4,
        };
        assert!(one_cover_check(&est, 1e-3).unwrap());
        est.samples[1] = mk(0.5, 2.0);
        est.clusters = vec![vec![0], vec![1]];
        assert!(!one_cover_check(&est, 1e-3).unwrap());
        est.status = OmegaStatus::Undecided;
        assert_eq!(one_cover_check(&est, 1e-3), Err(LabError::Undecided));
    }

    #[test]
    fn ensemble_is_normalized_and_vanishes_at_edges() {
        let grid = Grid::line(-10.0, 10.0, 101).unwrap();
        let e = perturbation_ensemble(&grid, 32, 7);
        assert_eq!(e.len(), 32);
        for p in &e {
            assert!((p.sup_norm() - 1.0).abs() < 1e-12);
            assert_eq!(p.values()[0], 0.0);
            assert_eq!(p.values()[100], 0.0);
        }
        assert_eq!(e, perturbation_ensemble(&grid, 32, 7));
    }

    #[test]
    fn contraction_reports_ladder_top() {
        let grid = Grid::line(-10.0, 10.0, 81).unwrap();
        let f = ReactionTerm::linear(basis1(), 1.0).unwrap();
        let p = Problem::new(grid.clone(), f, (-2.0, 2.0)).unwrap();
        let cfg = IntegratorConfig::for_problem(&p, 0.05, Boundary::DirichletZero);
        let base = SkewState::new(Profile::constant(grid.clone(), 0.0), TorusPhase::zero(1));
        let ens = perturbation_ensemble(&grid, 8, 1);
        let m = stability_probe(&base, &p, &cfg, &[0.1, 0.05], &ens, 10.0, 4).unwrap();
        assert_eq!(m.delta(0.1), Some(0.05));
        assert_eq!(m.delta(0.05), Some(0.025));
    }

    #[test]
    fn unstable_state_is_not_stable() {
        let grid = Grid::line(-10.0, 10.0, 81).unwrap();
        let a = 0.25;
        let f = ReactionTerm::bistable(QPSignal::constant(basis1(), a)).unwrap();
        let p = Problem::new(grid.clone(), f, (-0.5, 1.5)).unwrap();
        let cfg = IntegratorConfig::for_problem(&p, 0.05, Boundary::DirichletLimits);
        let base = SkewState::new(Profile::constant(grid.clone(), a), TorusPhase::zero(1));
        let ens = perturbation_ensemble(&grid, 8, 1);
        // linearization f'(a) = a(1 - a) > 0: perturbations grow like e^{0.1875 t}
        let r = stability_probe(&base, &p, &cfg, &[0.1], &ens, 100.0, 4);
        assert!(matches!(r, Err(LabError::NotStable { .. })), "{r:?}");
    }
}
