//! Quasi-periodic driving terms and their hulls.
//!
//! A finite Fourier sum over the lattice generated by a [`FrequencyBasis`]
//! has a hull that is literally an m-torus, so hull elements are stored as a
//! [`TorusPhase`] and the base flow is a linear rotation of that torus.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Default bound on integer coefficients used for relation searches.
pub const RELATION_SEARCH_BOUND: i64 = 1_000_000;
/// Residual below which an integer relation counts as exact.
pub const RELATION_TOL: f64 = 1e-9;
/// Residual below which a near miss is flagged as inconclusive.
pub const NEAR_MISS_TOL: f64 = 1e-6;
/// Upper limit on lattice points visited by a single relation search.
const MAX_SEARCH_POINTS: f64 = 2.0e7;

/// Positive, pairwise distinct angular frequencies generating the base flow.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyBasis {
    omegas: Vec<f64>,
    rationally_independent: bool,
}

impl FrequencyBasis {
    pub fn new(omegas: Vec<f64>) -> Result<Self> {
        if omegas.is_empty() {
            return Err(LabError::InvalidArgument("frequency basis must be nonempty".into()));
        }
        for (i, w) in omegas.iter().enumerate() {
            if !(w.is_finite() && *w > 0.0) {
                return Err(LabError::InvalidArgument(format!(
                    "frequency {i} must be finite and positive, got {w}"
                )));
            }
            if omegas[..i].iter().any(|v| v == w) {
                return Err(LabError::InvalidArgument(format!("frequency {w} repeated")));
            }
        }
        let rationally_independent = integer_relation(&omegas, RELATION_SEARCH_BOUND).is_none();
        Ok(Self {
            omegas,
            rationally_independent,
        })
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn dim(&self) -> usize {
        self.omegas.len()
    }

    /// True when no integer relation with coefficients up to
    /// [`RELATION_SEARCH_BOUND`] annihilates the basis, i.e. the torus
    /// rotation is minimal as far as the bounded search can tell.
    pub fn rationally_independent(&self) -> bool {
        self.rationally_independent
    }

    pub fn dot(&self, k: &[i32]) -> f64 {
        k.iter().zip(&self.omegas).map(|(&n, w)| f64::from(n) * w).sum()
    }
}

/// Searches for a nonzero integer vector `n` with `|n_j| <= bound` and
/// `|sum n_j omega_j| <= RELATION_TOL * max omega`.
pub fn integer_relation(omegas: &[f64], bound: i64) -> Option<Vec<i64>> {
    let m = omegas.len();
    if m < 2 {
        return None;
    }
    let scale = omegas.iter().cloned().fold(0.0_f64, f64::max);
    let bound = effective_bound(bound, m - 1);
    let mut best: Option<Vec<i64>> = None;
    let mut tail = vec![0_i64; m - 1];
    visit_lattice(&mut tail, 0, bound, &mut |tail| {
        if best.is_some() {
            return;
        }
        let partial: f64 = tail.iter().zip(&omegas[1..]).map(|(&n, w)| n as f64 * w).sum();
        let lead = (-partial / omegas[0]).round();
        if lead.abs() > bound as f64 {
            return;
        }
        let lead = lead as i64;
        if lead == 0 && tail.iter().all(|&n| n == 0) {
            return;
        }
        let resid = (lead as f64 * omegas[0] + partial).abs();
        if resid <= RELATION_TOL * scale {
            let mut n = vec![lead];
            n.extend_from_slice(tail);
            best = Some(n);
        }
    });
    best
}

fn effective_bound(bound: i64, free_dims: usize) -> i64 {
    let cap = MAX_SEARCH_POINTS.powf(1.0 / free_dims as f64) / 2.0;
    bound.min(cap.floor().max(1.0) as i64)
}

fn visit_lattice(tail: &mut Vec<i64>, idx: usize, bound: i64, f: &mut dyn FnMut(&[i64])) {
    if idx == tail.len() {
        f(tail);
        return;
    }
    for n in -bound..=bound {
        tail[idx] = n;
        visit_lattice(tail, idx + 1, bound, f);
    }
    tail[idx] = 0;
}

/// Outcome of a bounded frequency-module containment search.
#[derive(Debug, Clone, PartialEq)]
pub struct Containment {
    pub contained: bool,
    /// Set when some candidate missed the exact tolerance but came within
    /// [`NEAR_MISS_TOL`]; a larger bound may change the answer.
    pub bound_inconclusive: bool,
    /// Integer coefficients found for each candidate, when contained.
    pub coefficients: Vec<Option<Vec<i64>>>,
}

/// Decides `M(candidate) ⊆ M(container)` by searching integer combinations of
/// the container's generators with coefficients bounded by `search_bound`.
pub fn module_contains(container: &FrequencyBasis, candidate: &[f64], search_bound: i64) -> Result<Containment> {
    if search_bound < 1 {
        return Err(LabError::InvalidArgument("search_bound must be at least 1".into()));
    }
    let omegas = container.omegas();
    let bound = effective_bound(search_bound, omegas.len().saturating_sub(1).max(1));
    let mut contained = true;
    let mut inconclusive = false;
    let mut coefficients = Vec::with_capacity(candidate.len());
    for &c in candidate {
        let mut best_resid = f64::INFINITY;
        let mut best_n: Option<Vec<i64>> = None;
        let mut tail = vec![0_i64; omegas.len() - 1];
        visit_lattice(&mut tail, 0, bound, &mut |tail| {
            let partial: f64 = tail.iter().zip(&omegas[1..]).map(|(&n, w)| n as f64 * w).sum();
            let lead = ((c - partial) / omegas[0]).round();
            if lead.abs() > bound as f64 {
                return;
            }
            let resid = (c - partial - lead * omegas[0]).abs();
            if resid < best_resid {
                best_resid = resid;
                let mut n = vec![lead as i64];
                n.extend_from_slice(tail);
                best_n = Some(n);
            }
        });
        let scale = c.abs().max(1.0);
        if best_resid <= RELATION_TOL * scale {
            coefficients.push(best_n);
        } else {
            contained = false;
            if best_resid <= NEAR_MISS_TOL * scale {
                inconclusive = true;
            }
            coefficients.push(None);
        }
    }
    Ok(Containment {
        contained,
        bound_inconclusive: inconclusive && !contained,
        coefficients,
    })
}

/// A point of the m-torus `[0,1)^m`; one element of the hull.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusPhase {
    theta: Vec<f64>,
}

impl TorusPhase {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(LabError::InvalidArgument("torus phase must be finite".into()));
        }
        Ok(Self {
            theta: theta.into_iter().map(wrap_unit).collect(),
        })
    }

    pub fn zero(m: usize) -> Self {
        Self { theta: vec![0.0; m] }
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    /// Max over components of the circular distance.
    pub fn distance(&self, other: &TorusPhase) -> f64 {
        self.theta
            .iter()
            .zip(&other.theta)
            .map(|(a, b)| {
                let d = (a - b).abs();
                d.min(1.0 - d)
            })
            .fold(0.0, f64::max)
    }
}

fn wrap_unit(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Base flow: `theta + t * omega / 2pi (mod 1)`.
pub fn advance_phase(phase: &TorusPhase, basis: &FrequencyBasis, t: f64) -> TorusPhase {
    debug_assert_eq!(phase.dim(), basis.dim());
    TorusPhase {
        theta: phase
            .theta
            .iter()
            .zip(basis.omegas())
            .map(|(th, w)| wrap_unit(th + t * (w / TAU)))
            .collect(),
    }
}

/// Sampled times `n * dt` in `(0, horizon]` whose phase lies within `eps` of
/// the starting phase.
pub fn return_times(phase: &TorusPhase, basis: &FrequencyBasis, eps: f64, horizon: f64, dt: f64) -> Result<Vec<f64>> {
    if !(eps > 0.0 && dt > 0.0 && horizon > 0.0) {
        return Err(LabError::InvalidArgument("eps, dt and horizon must be positive".into()));
    }
    let n_max = (horizon / dt + 1e-9).floor() as u64;
    let times: Vec<f64> = (1..=n_max)
        .map(|n| n as f64 * dt)
        .filter(|&t| advance_phase(phase, basis, t).distance(phase) < eps)
        .collect();
    if times.is_empty() {
        return Err(LabError::EmptyReturnSet);
    }
    Ok(times)
}

/// One Fourier mode `a_k e^{i <k, omega> t}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub k: Vec<i32>,
    pub re: f64,
    pub im: f64,
}

/// A real quasi-periodic signal given by a finite Fourier sum.
#[derive(Debug, Clone, PartialEq)]
pub struct QPSignal {
    basis: FrequencyBasis,
    modes: Vec<Mode>,
}

#[derive(Serialize, Deserialize)]
struct QPSignalRepr {
    omegas: Vec<f64>,
    modes: Vec<Mode>,
}

impl Serialize for QPSignal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        QPSignalRepr {
            omegas: self.basis.omegas.clone(),
            modes: self.modes.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for QPSignal {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = QPSignalRepr::deserialize(d)?;
        let basis = FrequencyBasis::new(repr.omegas).map_err(serde::de::Error::custom)?;
        QPSignal::new(basis, repr.modes).map_err(serde::de::Error::custom)
    }
}

const REALITY_TOL: f64 = 1e-14;

impl QPSignal {
    /// Builds a signal from explicit modes; duplicate multi-indices are
    /// merged and the reality condition `a_{-k} = conj(a_k)` is enforced.
    pub fn new(basis: FrequencyBasis, modes: Vec<Mode>) -> Result<Self> {
        let m = basis.dim();
        let mut merged: Vec<Mode> = Vec::new();
        for mode in modes {
            if mode.k.len() != m {
                return Err(LabError::InvalidArgument(format!(
                    "mode index {:?} has length {}, basis has {m} frequencies",
                    mode.k,
                    mode.k.len()
                )));
            }
            if !(mode.re.is_finite() && mode.im.is_finite()) {
                return Err(LabError::InvalidArgument("mode amplitudes must be finite".into()));
            }
            match merged.iter_mut().find(|e| e.k == mode.k) {
                Some(e) => {
                    e.re += mode.re;
                    e.im += mode.im;
                }
                None => merged.push(mode),
            }
        }
        merged.retain(|e| e.re != 0.0 || e.im != 0.0);
        for mode in &merged {
            let neg: Vec<i32> = mode.k.iter().map(|n| -n).collect();
            let scale = mode.re.abs().max(mode.im.abs());
            let partner = merged.iter().find(|e| e.k == neg);
            let ok = match partner {
                Some(p) => {
                    (p.re - mode.re).abs() <= REALITY_TOL * scale && (p.im + mode.im).abs() <= REALITY_TOL * scale
                }
                None => false,
            };
            if !ok {
                return Err(LabError::InvalidArgument(format!(
                    "reality condition fails for mode {:?}: a(-k) must equal conj(a(k))",
                    mode.k
                )));
            }
        }
        Ok(Self { basis, modes: merged })
    }

    pub fn zero(basis: FrequencyBasis) -> Self {
        Self {
            basis,
            modes: Vec::new(),
        }
    }

    pub fn constant(basis: FrequencyBasis, c: f64) -> Self {
        let m = basis.dim();
        Self::zero(basis).plus_mode(vec![0; m], c, 0.0)
    }

    fn plus_mode(mut self, k: Vec<i32>, re: f64, im: f64) -> Self {
        match self.modes.iter_mut().find(|e| e.k == k) {
            Some(e) => {
                e.re += re;
                e.im += im;
            }
            None => self.modes.push(Mode { k, re, im }),
        }
        self.modes.retain(|e| e.re != 0.0 || e.im != 0.0);
        self
    }

    /// Adds `amp * cos(<k, omega> t)`.
    pub fn with_cos(self, k: Vec<i32>, amp: f64) -> Self {
        if k.iter().all(|&n| n == 0) {
            return self.plus_mode(k, amp, 0.0);
        }
        let neg = k.iter().map(|n| -n).collect();
        self.plus_mode(k, amp / 2.0, 0.0).plus_mode(neg, amp / 2.0, 0.0)
    }

    /// Adds `amp * sin(<k, omega> t)`.
    pub fn with_sin(self, k: Vec<i32>, amp: f64) -> Self {
        if k.iter().all(|&n| n == 0) {
            return self;
        }
        let neg = k.iter().map(|n| -n).collect();
        self.plus_mode(k, 0.0, -amp / 2.0).plus_mode(neg, 0.0, amp / 2.0)
    }

    /// Adds `c` to the mean.
    pub fn with_constant(self, c: f64) -> Self {
        let m = self.basis.dim();
        self.plus_mode(vec![0; m], c, 0.0)
    }

    /// Pointwise sum of two signals over the same basis.
    pub fn add(&self, other: &QPSignal) -> Result<QPSignal> {
        if self.basis.omegas != other.basis.omegas {
            return Err(LabError::InvalidArgument(
                "signals use different frequency bases".into(),
            ));
        }
        let mut out = self.clone();
        for m in &other.modes {
            out = out.plus_mode(m.k.clone(), m.re, m.im);
        }
        Ok(out)
    }

    /// Time derivative of the signal.
    pub fn derivative(&self) -> QPSignal {
        let modes = self
            .modes
            .iter()
            .filter_map(|m| {
                let w = self.basis.dot(&m.k);
                // d/dt (re + i im) e^{i w t} = i w (re + i im) e^{i w t}
                (w != 0.0).then(|| Mode {
                    k: m.k.clone(),
                    re: -w * m.im,
                    im: w * m.re,
                })
            })
            .collect();
        QPSignal {
            basis: self.basis.clone(),
            modes,
        }
    }

    pub fn scaled(&self, c: f64) -> QPSignal {
        let mut out = self.clone();
        for m in &mut out.modes {
            m.re *= c;
            m.im *= c;
        }
        out.modes.retain(|e| e.re != 0.0 || e.im != 0.0);
        out
    }

    pub fn basis(&self) -> &FrequencyBasis {
        &self.basis
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    /// Mean value (the `k = 0` coefficient).
    pub fn mean(&self) -> f64 {
        self.modes
            .iter()
            .find(|m| m.k.iter().all(|&n| n == 0))
            .map_or(0.0, |m| m.re)
    }

    /// Upper bound on `sup_t |s(t)|`.
    pub fn amplitude_bound(&self) -> f64 {
        self.modes.iter().map(|m| m.re.hypot(m.im)).sum()
    }

    /// Whether the signal is constant in time.
    pub fn is_constant(&self) -> bool {
        self.modes.iter().all(|m| m.k.iter().all(|&n| n == 0))
    }

    /// The spectrum `{<k, omega> : a_k != 0}`.
    pub fn spectrum(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.modes.iter().map(|m| self.basis.dot(&m.k)).collect();
        s.sort_by(f64::total_cmp);
        s.dedup();
        s
    }

    /// Real and imaginary parts of the Fourier sum at hull element `phase`
    /// and time `t`.
    pub fn evaluate_complex(&self, phase: &TorusPhase, t: f64) -> (f64, f64) {
        let theta = phase.theta();
        let mut re = 0.0;
        let mut im = 0.0;
        for m in &self.modes {
            let mut arg = self.basis.dot(&m.k) * t;
            for (&n, th) in m.k.iter().zip(theta) {
                arg += TAU * f64::from(n) * th;
            }
            let (s, c) = arg.sin_cos();
            re += m.re * c - m.im * s;
            im += m.re * s + m.im * c;
        }
        (re, im)
    }
}

/// Value of the hull element at `phase`, shifted by `t`.
pub fn evaluate(signal: &QPSignal, phase: &TorusPhase, t: f64) -> f64 {
    signal.evaluate_complex(phase, t).0
}
