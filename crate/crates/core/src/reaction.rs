//! Reaction terms `f(t, x, u)` assembled from quasi-periodic time factors,
//! radial weights and powers of `u` up to three.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::profile::Grid;
use crate::quasi_periodic::{evaluate, FrequencyBasis, QPSignal, TorusPhase};

/// Radial weight `w(|x|)`; every weight takes values in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpatialWeight {
    Constant,
    /// `(1 - (r/R)^2)^2` inside `r < R`, zero outside.
    Bump {
        radius: f64,
    },
    /// Smooth step from 0 at `r <= inner` to 1 at `r >= outer`.
    OuterStep {
        inner: f64,
        outer: f64,
    },
    /// `exp(-r^2 / (2 width^2))`.
    Gaussian {
        width: f64,
    },
}

impl SpatialWeight {
    pub fn at(&self, r: f64) -> f64 {
        match *self {
            SpatialWeight::Constant => 1.0,
            SpatialWeight::Bump { radius } => {
                if r >= radius {
                    0.0
                } else {
                    let s = 1.0 - (r / radius).powi(2);
                    s * s
                }
            }
            SpatialWeight::OuterStep { inner, outer } => {
                if r <= inner {
                    0.0
                } else if r >= outer {
                    1.0
                } else {
                    let s = (r - inner) / (outer - inner);
                    s * s * (3.0 - 2.0 * s)
                }
            }
            SpatialWeight::Gaussian { width } => (-r * r / (2.0 * width * width)).exp(),
        }
    }

    fn validate(&self) -> std::result::Result<(), String> {
        match *self {
            SpatialWeight::Constant => Ok(()),
            SpatialWeight::Bump { radius } if radius > 0.0 => Ok(()),
            SpatialWeight::OuterStep { inner, outer } if inner >= 0.0 && outer > inner => Ok(()),
            SpatialWeight::Gaussian { width } if width > 0.0 => Ok(()),
            w => Err(format!("invalid weight parameters {w:?}")),
        }
    }
}

/// `coefficient(t) * weight(|x|) * u^power`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub power: u8,
    pub coefficient: QPSignal,
    #[serde(default = "constant_weight")]
    pub weight: SpatialWeight,
}

fn constant_weight() -> SpatialWeight {
    SpatialWeight::Constant
}

/// Constants of the dissipativity hypotheses. Radial problems use
/// `epsilon0, r0, alpha`: `df/du <= -alpha` for `|x| >= r0, |u| <= epsilon0`.
/// Wave problems use `epsilon0, mu`: `df/du <= -mu` within `epsilon0` of the
/// limit states.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Hypotheses {
    #[serde(default)]
    pub epsilon0: Option<f64>,
    #[serde(default)]
    pub r0: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub mu: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReactionTerm {
    basis: FrequencyBasis,
    terms: Vec<Monomial>,
    pub hypotheses: Hypotheses,
    /// Declared invariance under the symmetry group (x-independence in 1-D,
    /// radial dependence in 2-D).
    pub g_symmetric: bool,
    /// Declared `f(t, x, 0) = 0`.
    pub zero_at_zero: bool,
}

/// Per-power coefficients `C_p(t, x)` of `f = sum_p C_p u^p`.
pub type PowerCoefficients = [f64; 4];

impl ReactionTerm {
    pub fn new(basis: FrequencyBasis, terms: Vec<Monomial>) -> Result<Self> {
        for (i, t) in terms.iter().enumerate() {
            if t.power > 3 {
                return Err(LabError::InvalidArgument(format!(
                    "term {i}: powers above 3 are not supported"
                )));
            }
            if t.coefficient.basis().omegas() != basis.omegas() {
                return Err(LabError::InvalidArgument(format!(
                    "term {i}: coefficient uses a different frequency basis"
                )));
            }
            t.weight.validate().map_err(LabError::InvalidArgument)?;
        }
        let zero_at_zero = terms.iter().all(|t| t.power > 0);
        Ok(Self {
            basis,
            terms,
            hypotheses: Hypotheses::default(),
            g_symmetric: true,
            zero_at_zero,
        })
    }

    /// `u (1 - u) (u - a(t))`.
    pub fn bistable(a: QPSignal) -> Result<Self> {
        let basis = a.basis().clone();
        let one = QPSignal::constant(basis.clone(), 1.0);
        let terms = vec![
            Monomial {
                power: 3,
                coefficient: one.scaled(-1.0),
                weight: SpatialWeight::Constant,
            },
            Monomial {
                power: 2,
                coefficient: a.add(&one)?,
                weight: SpatialWeight::Constant,
            },
            Monomial {
                power: 1,
                coefficient: a.scaled(-1.0),
                weight: SpatialWeight::Constant,
            },
        ];
        Self::new(basis, terms)
    }

    /// `-alpha u`.
    pub fn linear(basis: FrequencyBasis, alpha: f64) -> Result<Self> {
        let c = QPSignal::constant(basis.clone(), -alpha);
        let mut r = Self::new(
            basis,
            vec![Monomial {
                power: 1,
                coefficient: c,
                weight: SpatialWeight::Constant,
            }],
        )?;
        r.hypotheses.alpha = Some(alpha);
        Ok(r)
    }

    /// `f = 0`.
    pub fn zero(basis: FrequencyBasis) -> Self {
        Self {
            basis,
            terms: Vec::new(),
            hypotheses: Hypotheses::default(),
            g_symmetric: true,
            zero_at_zero: true,
        }
    }

    /// `u (b(t) rho(|x|) - kappa u^2) - alpha chi(|x|) u` with a compactly
    /// supported bump `rho` and an outer smooth step `chi`.
    pub fn radial(b: QPSignal, bump_radius: f64, kappa: f64, alpha: f64, chi: SpatialWeight) -> Result<Self> {
        let basis = b.basis().clone();
        let terms = vec![
            Monomial {
                power: 1,
                coefficient: b,
                weight: SpatialWeight::Bump { radius: bump_radius },
            },
            Monomial {
                power: 1,
                coefficient: QPSignal::constant(basis.clone(), -alpha),
                weight: chi,
            },
            Monomial {
                power: 3,
                coefficient: QPSignal::constant(basis.clone(), -kappa),
                weight: SpatialWeight::Constant,
            },
        ];
        Self::new(basis, terms)
    }

    pub fn basis(&self) -> &FrequencyBasis {
        &self.basis
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn with_hypotheses(mut self, h: Hypotheses) -> Self {
        self.hypotheses = h;
        self
    }

    /// True when no term carries a non-constant spatial weight.
    pub fn x_independent(&self) -> bool {
        self.terms.iter().all(|t| t.weight == SpatialWeight::Constant)
    }

    pub fn is_autonomous(&self) -> bool {
        self.terms.iter().all(|t| t.coefficient.is_constant())
    }

    /// Time factors of every term at the given hull element.
    pub fn time_factors(&self, phase: &TorusPhase) -> Vec<f64> {
        self.terms
            .iter()
            .map(|t| evaluate(&t.coefficient, phase, 0.0))
            .collect()
    }

    /// Per-power coefficients at a point, given precomputed time factors.
    pub fn power_coefficients(&self, factors: &[f64], r: f64) -> PowerCoefficients {
        let mut c = [0.0; 4];
        for (t, f) in self.terms.iter().zip(factors) {
            c[t.power as usize] += f * t.weight.at(r);
        }
        c
    }

    pub fn value(&self, phase: &TorusPhase, r: f64, u: f64) -> f64 {
        let c = self.power_coefficients(&self.time_factors(phase), r);
        ((c[3] * u + c[2]) * u + c[1]) * u + c[0]
    }

    pub fn du(&self, phase: &TorusPhase, r: f64, u: f64) -> f64 {
        let c = self.power_coefficients(&self.time_factors(phase), r);
        derivative(&c, u)
    }

    /// Exact maximum of `df/du` over `u in [lo, hi]` at a point.
    pub fn max_du(&self, phase: &TorusPhase, r: f64, lo: f64, hi: f64) -> f64 {
        max_derivative(&self.power_coefficients(&self.time_factors(phase), r), lo, hi)
    }

    /// Hull phases used for sampling time dependence: a regular lattice on
    /// the torus (a single phase for autonomous terms).
    pub fn phase_samples(&self, per_axis: usize) -> Vec<TorusPhase> {
        if self.is_autonomous() {
            return vec![TorusPhase::zero(self.basis.dim())];
        }
        let m = self.basis.dim();
        let per_axis = per_axis.max(2);
        let total = per_axis.pow(m as u32);
        (0..total)
            .map(|mut k| {
                let mut theta = vec![0.0; m];
                for th in theta.iter_mut() {
                    *th = (k % per_axis) as f64 / per_axis as f64;
                    k /= per_axis;
                }
                TorusPhase::new(theta).expect("finite phase")
            })
            .collect()
    }

    /// Distinct node radii of a grid, with radial weights deduplicated.
    fn sample_radii(&self, grid: &Grid) -> Vec<f64> {
        if self.x_independent() {
            return vec![0.0];
        }
        let mut radii: Vec<f64> = (0..grid.len()).map(|i| grid.radius(i)).collect();
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        radii
    }

    /// Bound on `|df/du|` for `u in [lo, hi]` over the grid and a lattice
    /// of hull phases, inflated by 5% to cover phases between samples.
    pub fn lipschitz_bound(&self, grid: &Grid, lo: f64, hi: f64) -> f64 {
        let radii = self.sample_radii(grid);
        let mut best: f64 = 0.0;
        for phase in self.phase_samples(24) {
            let factors = self.time_factors(&phase);
            for &r in &radii {
                let c = self.power_coefficients(&factors, r);
                best = best.max(max_abs_derivative(&c, lo, hi));
            }
        }
        best * 1.05
    }

    /// Finds a node and phase where `f(t, x, 0) != 0`, if any.
    pub fn zero_at_zero_witness(&self, grid: &Grid) -> Option<(f64, TorusPhase, f64)> {
        let radii = self.sample_radii(grid);
        for phase in self.phase_samples(8) {
            let factors = self.time_factors(&phase);
            for &r in &radii {
                let v = self.power_coefficients(&factors, r)[0];
                if v.abs() > 1e-14 {
                    return Some((r, phase, v));
                }
            }
        }
        None
    }

    /// Worst value of `max df/du + alpha` over `|x| >= r0`, `|u| <= epsilon0`
    /// on the grid; nonpositive when the outer dissipativity bound holds.
    pub fn outer_dissipativity_margin(&self, grid: &Grid, epsilon0: f64, r0: f64, alpha: f64) -> (f64, f64) {
        let mut worst = f64::NEG_INFINITY;
        let mut at = 0.0;
        let radii: Vec<f64> = if self.x_independent() {
            vec![r0]
        } else {
            self.sample_radii(grid).into_iter().filter(|&r| r >= r0).collect()
        };
        for phase in self.phase_samples(16) {
            let factors = self.time_factors(&phase);
            for &r in &radii {
                let m = max_derivative(&self.power_coefficients(&factors, r), -epsilon0, epsilon0) + alpha;
                if m > worst {
                    worst = m;
                    at = r;
                }
            }
        }
        (worst, at)
    }

    /// Worst value of `max df/du + mu` within `epsilon0` of the limit
    /// trajectories, for x-independent terms.
    pub fn limit_dissipativity_margin(&self, limits: &[f64], epsilon0: f64, mu: f64) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for phase in self.phase_samples(16) {
            let c = self.power_coefficients(&self.time_factors(&phase), 0.0);
            for &l in limits {
                worst = worst.max(max_derivative(&c, l - epsilon0, l + epsilon0) + mu);
            }
        }
        worst
    }
}

#[inline]
pub fn derivative(c: &PowerCoefficients, u: f64) -> f64 {
    (3.0 * c[3] * u + 2.0 * c[2]) * u + c[1]
}

/// `max_{u in [lo, hi]} df/du`; the derivative is a quadratic in `u`.
pub fn max_derivative(c: &PowerCoefficients, lo: f64, hi: f64) -> f64 {
    let mut m = derivative(c, lo).max(derivative(c, hi));
    if c[3] < 0.0 {
        let v = -c[2] / (3.0 * c[3]);
        if v > lo && v < hi {
            m = m.max(derivative(c, v));
        }
    }
    m
}

pub fn min_derivative(c: &PowerCoefficients, lo: f64, hi: f64) -> f64 {
    let mut m = derivative(c, lo).min(derivative(c, hi));
    if c[3] > 0.0 {
        let v = -c[2] / (3.0 * c[3]);
        if v > lo && v < hi {
            m = m.min(derivative(c, v));
        }
    }
    m
}

fn max_abs_derivative(c: &PowerCoefficients, lo: f64, hi: f64) -> f64 {
    max_derivative(c, lo, hi).abs().max(min_derivative(c, lo, hi).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    fn basis() -> FrequencyBasis {
        FrequencyBasis::new(vec![1.0, SQRT_2]).unwrap()
    }

    fn a_signal() -> QPSignal {
        QPSignal::constant(basis(), 0.25)
            .with_sin(vec![1, 0], 0.1)
            .with_sin(vec![0, 1], 0.05)
    }

    #[test]
    fn bistable_matches_factored_form() {
        let f = ReactionTerm::bistable(a_signal()).unwrap();
        assert!(f.x_independent() && f.zero_at_zero);
        let phase = TorusPhase::new(vec![0.1, 0.6]).unwrap();
        let a = evaluate(&a_signal(), &phase, 0.0);
        for u in [-0.3, 0.0, 0.2, 0.7, 1.0, 1.3] {
            let expect = u * (1.0 - u) * (u - a);
            assert!((f.value(&phase, 0.0, u) - expect).abs() < 1e-14);
            let h = 1e-6;
            let fd = (f.value(&phase, 0.0, u + h) - f.value(&phase, 0.0, u - h)) / (2.0 * h);
            assert!((f.du(&phase, 0.0, u) - fd).abs() < 1e-8);
        }
    }

    #[test]
    fn max_derivative_matches_dense_sampling() {
        let c = [0.0, -0.3, 1.3, -1.0];
        let (lo, hi) = (-0.2, 1.2);
        let dense = (0..=10_000)
            .map(|k| derivative(&c, lo + (hi - lo) * k as f64 / 10_000.0))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((max_derivative(&c, lo, hi) - dense).abs() < 1e-6);
    }

    #[test]
    fn radial_term_flags_and_dissipativity() {
        let b = QPSignal::constant(basis(), 0.6).with_sin(vec![1, 0], 0.1);
        let f = ReactionTerm::radial(b, 8.0, 1.0, 0.5, SpatialWeight::OuterStep { inner: 4.0, outer: 8.0 }).unwrap();
        assert!(f.zero_at_zero && !f.x_independent());
        let grid = Grid::rect((-10.0, 10.0, 41), (-10.0, 10.0, 41)).unwrap();
        assert!(f.zero_at_zero_witness(&grid).is_none());
        let (margin, _) = f.outer_dissipativity_margin(&grid, 0.2, 8.0, 0.5);
        assert!(margin <= 1e-12, "margin {margin}");
        let (bad, _) = f.outer_dissipativity_margin(&grid, 0.2, 2.0, 0.5);
        assert!(bad > 0.0);
    }

    #[test]
    fn constant_term_breaks_zero_at_zero() {
        let b = basis();
        let f = ReactionTerm::new(
            b.clone(),
            vec![Monomial {
                power: 0,
                coefficient: QPSignal::constant(b, 0.1),
                weight: SpatialWeight::Gaussian { width: 1.0 },
            }],
        )
        .unwrap();
        assert!(!f.zero_at_zero);
        let grid = Grid::line(-1.0, 1.0, 5).unwrap();
        assert!(f.zero_at_zero_witness(&grid).is_some());
    }

    #[test]
    fn lipschitz_bound_covers_sampled_slopes() {
        let f = ReactionTerm::bistable(a_signal()).unwrap();
        let grid = Grid::line(-1.0, 1.0, 5).unwrap();
        let l = f.lipschitz_bound(&grid, -0.2, 1.2);
        for k in 0..200 {
            let phase = TorusPhase::new(vec![k as f64 * 0.013, k as f64 * 0.029]).unwrap();
            for j in 0..=20 {
                let u = -0.2 + 1.4 * j as f64 / 20.0;
                assert!(f.du(&phase, 0.0, u).abs() <= l);
            }
        }
    }
}
