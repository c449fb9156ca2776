//! End-to-end acceptance run: both bundled experiments plus the
//! standalone oracle checks. Prints one line per criterion and exits
//! nonzero if any fails.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};
use std::time::Instant;

use skewlab::lab::scenario::stationary_pulse;
use skewlab::lab::{execute, parse_config, RunReport, BUNDLED_CONFIGS};
use skewlab::orbit::{perturbation_ensemble, stability_probe, OmegaStatus};
use skewlab::profile::{Grid, Profile};
use skewlab::quasi_periodic::{FrequencyBasis, QPSignal, TorusPhase};
use skewlab::reaction::ReactionTerm;
use skewlab::semiflow::{integrate, wave_speed_estimate, Boundary, IntegratorConfig, Problem, SkewState};
use skewlab::verify::{check_decay_bound, check_total_order, DecayScenario, Outcome, VerifierReport};
use skewlab::LabError;

struct Line {
    id: usize,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn run_bundled(name: &str) -> (RunReport, f64) {
    let text = BUNDLED_CONFIGS
        .iter()
        .find(|(n, _)| *n == name)
        .expect("bundled config")
        .1;
    let cfg = parse_config(text).expect("bundled config parses");
    let start = Instant::now();
    let (report, _) = execute(&cfg).expect("bundled run");
    (report, start.elapsed().as_secs_f64())
}

fn verifier<'a>(r: &'a RunReport, name: &str) -> &'a VerifierReport {
    r.verifier(name).unwrap_or_else(|| panic!("verifier {name} missing"))
}

fn measured(v: &VerifierReport) -> f64 {
    v.measured.unwrap_or(f64::NAN)
}

fn golden(name: &str) -> serde_json::Value {
    let path = format!("{}/tests/golden/{name}", env!("CARGO_MANIFEST_DIR"));
    serde_json::from_str(&std::fs::read_to_string(path).expect("golden file")).expect("golden json")
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs().max(1e-300)
}

fn modulus_matches(r: &RunReport, g: &serde_json::Value) -> bool {
    let rel = g["rel_tol"].as_f64().unwrap();
    let Some(m) = &r.summaries.stability else { return false };
    let want = g["modulus"].as_array().unwrap();
    m.rows.len() == want.len()
        && m.rows.iter().zip(want).all(|(row, w)| {
            close(row.eps, w[0].as_f64().unwrap(), rel) && close(row.delta, w[1].as_f64().unwrap(), rel)
        })
}

/// Linear decay `u' = -αu` from `2ε0` against the zero cover on a line.
fn analytic_decay(alpha: f64, dt: f64) -> VerifierReport {
    let b = FrequencyBasis::new(vec![1.0]).unwrap();
    let grid = Grid::line(-5.0, 5.0, 21).unwrap();
    let p = Problem::new(grid.clone(), ReactionTerm::linear(b, alpha).unwrap(), (-1.0, 1.0)).unwrap();
    let cfg = IntegratorConfig::for_problem(&p, dt, Boundary::DirichletLimits);
    let eps0 = 0.1;
    let sc = DecayScenario {
        cover: SkewState::new(Profile::constant(grid.clone(), 0.0), TorusPhase::zero(1)),
        initial: Profile::constant(grid, 2.0 * eps0),
        radius: 0.0,
        eps0,
        alpha,
        t_end: (5.0 / alpha / dt).round() * dt,
    };
    check_decay_bound(&p, &cfg, &sc).unwrap()
}

/// Residual of `φ'' + cφ' + φ(1-φ)(φ-a)` for `φ(z) = 1/(1+e^{z/√2})`.
fn front_residual(a: f64, c: f64) -> f64 {
    (-400..=400)
        .map(|k| {
            let z = k as f64 * 0.05;
            let p = 1.0 / (1.0 + (z / SQRT_2).exp());
            let d1 = -p * (1.0 - p) / SQRT_2;
            let d2 = p * (1.0 - p) * (1.0 - 2.0 * p) / 2.0;
            (d2 + c * d1 + p * (1.0 - p) * (p - a)).abs()
        })
        .fold(0.0, f64::max)
}

fn autonomous_speed(a: f64) -> f64 {
    let b = FrequencyBasis::new(vec![1.0]).unwrap();
    let grid = Grid::line(-50.0, 50.0, 1001).unwrap();
    let f = ReactionTerm::bistable(QPSignal::constant(b, a)).unwrap();
    let p = Problem::new(grid.clone(), f, (-0.5, 1.5)).unwrap();
    let cfg = IntegratorConfig::for_problem(&p, 0.01, Boundary::DirichletLimits);
    let u0 = Profile::from_fn(grid, |x, _| 1.0 / (1.0 + ((x + 20.0) / SQRT_2).exp()));
    let times: Vec<f64> = (10..=40).map(|k| k as f64).collect();
    let traj = integrate(&SkewState::new(u0, TorusPhase::zero(1)), 40.0, &p, &cfg, &times).unwrap();
    let samples: Vec<(f64, Profile)> = traj.into_iter().map(|s| (s.time, s.profile)).collect();
    wave_speed_estimate(&samples, 0.5).unwrap()
}

/// Whether the probe rejects the stationary pulse, with a description.
fn pulse_is_unstable(a: f64) -> (bool, String) {
    let b = FrequencyBasis::new(vec![1.0]).unwrap();
    let grid = Grid::line(-30.0, 30.0, 601).unwrap();
    let f = ReactionTerm::bistable(QPSignal::constant(b, a)).unwrap();
    let p = Problem::new(grid.clone(), f, (-0.5, 1.5)).unwrap();
    let cfg = IntegratorConfig::for_problem(&p, 0.05, Boundary::DirichletLimits);
    let base = SkewState::new(stationary_pulse(a, &grid).unwrap(), TorusPhase::zero(1));
    let ens = perturbation_ensemble(&grid, 16, 11);
    match stability_probe(&base, &p, &cfg, &[0.1], &ens, 100.0, 4) {
        Err(LabError::NotStable { eps, delta, member }) => (
            true,
            format!("pulse not stable: member {member} leaves eps = {eps} from delta = {delta}"),
        ),
        Ok(m) => (false, format!("pulse reported stable: {:?}", m.rows)),
        Err(e) => (false, format!("probe error: {e}")),
    }
}

fn main() {
    let mut lines = Vec::new();
    let mut push = |id, title, pass, detail: String| {
        lines.push(Line {
            id,
            title,
            pass,
            detail,
        })
    };

    let (wave, wave_s) = run_bundled("wave_1d_default.json");
    let (radial, radial_s) = run_bundled("radial_2d_default.json");
    let wave_gold = golden("wave_1d.json");
    let radial_gold = golden("radial_2d.json");

    let mono = verifier(&wave, "monotone");
    push(
        1,
        "discrete monotonicity",
        mono.outcome == Outcome::Pass && measured(mono) == 0.0 && mono.runtime_s < 120.0,
        format!(
            "max violation {:e}, {:.1} s; {}",
            measured(mono),
            mono.runtime_s,
            mono.notes.join("; ")
        ),
    );

    let shift = verifier(&wave, "equivariance");
    let rot = verifier(&radial, "equivariance");
    let ratio = rot.metrics.get("ratio").copied().unwrap_or(f64::NAN);
    push(
        2,
        "equivariance",
        measured(shift) < 1e-12
            && measured(rot) < 1e-5
            && ratio >= 3.5
            && rot.outcome == Outcome::Pass
            && close(ratio, radial_gold["equivariance_ratio"].as_f64().unwrap(), 1e-3),
        format!(
            "shifts {:.3e}; rotation {:.3e} at h = 0.05, ratio {ratio:.3}",
            measured(shift),
            measured(rot)
        ),
    );

    let omega = wave.summaries.omega.as_ref();
    let mono_x = verifier(&wave, "spatial_monotonicity");
    let diag = omega.map(|o| o.diagnostic).unwrap_or(f64::NAN);
    push(
        3,
        "stable wave is spatially monotone",
        omega.is_some_and(|o| o.status == OmegaStatus::Converged)
            && diag < 1e-4
            && mono_x.outcome == Outcome::Pass
            && mono_x.tolerance == 1e-8
            && wave_s < 300.0,
        format!(
            "omega diagnostic {diag:.3e}, monotonicity defect {:.3e}, run {wave_s:.1} s",
            measured(mono_x)
        ),
    );

    let phase = verifier(&wave, "asymptotic_phase");
    let ps = wave.summaries.phase.as_ref();
    let wave_rel = wave_gold["rel_tol"].as_f64().unwrap();
    let sigma_gold = wave_gold["sigma_star"].as_f64().unwrap();
    push(
        4,
        "asymptotic phase",
        phase.outcome == Outcome::Pass
            && ps.is_some_and(|p| {
                p.spread <= 1e-3 && p.final_residual < 1e-3 && close(p.sigma_star, sigma_gold, wave_rel)
            }),
        match ps {
            Some(p) => format!(
                "sigma* {:.9} (golden {sigma_gold:.9}), spread {:.3e}, residual {:.3e}",
                p.sigma_star, p.spread, p.final_residual
            ),
            None => format!("no phase summary: {:?}", phase.notes),
        },
    );

    let sym = verifier(&radial, "symmetry");
    let angles_ok = radial.config.verifiers.symmetry.as_ref().is_some_and(|s| {
        let has = |t: f64| s.angles.iter().any(|&a| (a - t).abs() < 1e-12);
        has(PI / 7.0) && has(1.0) && has(FRAC_PI_2) && s.tol == 1e-3 && s.exact_tol == 1e-8
    });
    let sym_ok = sym.outcome == Outcome::Pass && angles_ok;
    push(
        5,
        "rotational symmetry",
        sym_ok && radial_s < 600.0,
        format!("{}; run {radial_s:.1} s", sym.notes.join("; ")),
    );

    let analytic: Vec<(f64, VerifierReport)> = [(1.0, 0.1), (1.0, 0.01), (0.5, 0.002)]
        .iter()
        .map(|&(a, dt)| (a * dt, analytic_decay(a, dt)))
        .collect();
    let flagship = verifier(&radial, "decay_bound");
    push(
        6,
        "comparison bound",
        analytic.iter().all(|(_, r)| r.passed() && measured(r) <= 0.0)
            && flagship.outcome == Outcome::Pass
            && measured(flagship) <= 1e-10,
        format!(
            "analytic worst slack {}; flagship {:.3e}",
            analytic
                .iter()
                .map(|(x, r)| format!("{:.3e} at alpha dt = {x}", measured(r)))
                .collect::<Vec<_>>()
                .join(", "),
            measured(flagship)
        ),
    );

    let sup = verifier(&radial, "supersolution");
    let pair = radial.summaries.supersolution.as_ref();
    push(
        7,
        "supersolution trapping",
        sup.outcome == Outcome::Pass && pair.is_some_and(|p| p.phi_increase <= 1e-12 && p.trapped()),
        match pair {
            Some(p) => format!(
                "phi+ increase {:.3e}, trapping excess {:.3e}, {} steps",
                p.phi_increase, p.trapping_excess, p.steps
            ),
            None => format!("no pair: {:?}", sup.notes),
        },
    );

    let a = 0.25;
    let c = (1.0 - 2.0 * a) / SQRT_2;
    let residual = front_residual(a, c);
    let speed = if residual < 1e-10 {
        autonomous_speed(a)
    } else {
        f64::NAN
    };
    push(
        8,
        "front speed oracle",
        residual < 1e-10 && ((speed - c) / c).abs() < 0.02,
        format!(
            "oracle residual {residual:.1e}, speed {speed:.6} vs {c:.6} ({:+.3}%)",
            100.0 * (speed - c) / c
        ),
    );

    let wedge = verifier(&wave, "wedge_order");
    push(
        9,
        "wedge ordering",
        wedge.outcome == Outcome::Pass && measured(wedge) == 0.0,
        format!("max violation {:e}; {}", measured(wedge), wedge.notes.join("; ")),
    );

    let grid = Grid::line(-20.0, 20.0, 401).unwrap();
    let bump = Profile::from_fn(grid, |x, _| (-x * x / 2.0).exp());
    let order = check_total_order(&bump, &[-1.0, -0.5, -0.2, 0.0, 0.2, 0.5, 1.0], 1e-8).unwrap();
    let (unstable, pulse) = pulse_is_unstable(a);
    push(
        10,
        "solitary waves are not stable",
        order.outcome == Outcome::Fail && unstable,
        format!("Gaussian: {}; {pulse}", order.notes[0]),
    );

    let cover = verifier(&wave, "one_cover");
    push(
        11,
        "1-cover detection",
        cover.outcome == Outcome::Pass && measured(cover) < 1e-4 && cover.tolerance == 1e-4,
        format!("Hausdorff {:.3e}; {}", measured(cover), cover.notes.join("; ")),
    );

    push(
        0,
        "golden regression values",
        close(
            wave.summaries.wave.as_ref().map_or(f64::NAN, |w| w.mean_speed),
            wave_gold["mean_speed"].as_f64().unwrap(),
            wave_rel,
        ) && modulus_matches(&wave, &wave_gold)
            && modulus_matches(&radial, &radial_gold),
        format!(
            "mean speed {:.9}",
            wave.summaries.wave.as_ref().map_or(f64::NAN, |w| w.mean_speed)
        ),
    );

    let mut failed = 0;
    for l in &lines {
        let tag = if l.pass { "PASS" } else { "FAIL" };
        let id = if l.id == 0 {
            "--".to_string()
        } else {
            format!("{:2}", l.id)
        };
        println!("criterion {id} {tag}  {}: {}", l.title, l.detail);
        failed += usize::from(!l.pass);
    }
    println!("acceptance: {} of {} passed", lines.len() - failed, lines.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
