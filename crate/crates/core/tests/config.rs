use serde_json::{json, Value};
use skewlab::lab::{parse_config, validate_config, BUNDLED_CONFIGS};
use skewlab::LabError;

fn bundled(name: &str) -> Value {
    let text = BUNDLED_CONFIGS.iter().find(|(n, _)| *n == name).unwrap().1;
    serde_json::from_str(text).unwrap()
}

fn issues(v: &Value) -> Vec<(String, String)> {
    let cfg = match parse_config(&v.to_string()) {
        Ok(c) => c,
        Err(LabError::ConfigInvalid(is)) => return is.into_iter().map(|i| (i.pointer, i.message)).collect(),
        Err(e) => panic!("{e}"),
    };
    match validate_config(&cfg) {
        Ok(_) => Vec::new(),
        Err(LabError::ConfigInvalid(is)) => is.into_iter().map(|i| (i.pointer, i.message)).collect(),
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn bundled_configs_are_valid_and_round_trip() {
    for (name, text) in BUNDLED_CONFIGS {
        let cfg = parse_config(text).unwrap_or_else(|e| panic!("{name}: {e}"));
        validate_config(&cfg).unwrap_or_else(|e| panic!("{name}: {e}"));
        let again = parse_config(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(cfg, again);
    }
}

#[test]
fn radial_step_ratio_gives_integer_steps_per_unit() {
    let cfg = parse_config(&bundled("radial_2d_default.json").to_string()).unwrap();
    let setup = validate_config(&cfg).unwrap();
    let per_unit = 1.0 / setup.integrator.dt;
    assert!((per_unit - per_unit.round()).abs() < 1e-9);
    assert!(setup.integrator.dt * setup.integrator.lipschitz <= 0.5);
}

#[test]
fn zero_dissipation_is_named() {
    for key in ["/reaction/alpha", "/hypotheses/alpha"] {
        let mut v = bundled("radial_2d_default.json");
        *v.pointer_mut(key).unwrap() = json!(0.0);
        let found = issues(&v);
        assert!(
            found
                .iter()
                .any(|(p, m)| p == key && m == "outer dissipativity requires positive alpha"),
            "{key}: {found:?}"
        );
    }
}

#[test]
fn nonzero_reaction_at_zero_has_a_witness() {
    let mut v = bundled("radial_2d_default.json");
    v["reaction"] = json!({
        "form": "polynomial",
        "terms": [
            {"power": 0, "coefficient": {"constant": 0.01}},
            {"power": 1, "coefficient": {"constant": -1.0}}
        ]
    });
    let found = issues(&v);
    let (_, msg) = found.iter().find(|(p, _)| p == "/reaction").expect("witness");
    assert!(
        msg.starts_with("f(t, x, 0) = 1.000000e-2 is not zero at |x| = "),
        "{msg}"
    );
}

#[test]
fn unknown_fields_are_located() {
    let mut v = bundled("wave_1d_default.json");
    v["orbit"]["eps"] = json!(0.1);
    let found = issues(&v);
    assert_eq!(found.len(), 1);
    assert_eq!(found[0].0, "/orbit/eps");
    assert!(found[0].1.contains("eps"));
}

#[test]
fn every_issue_is_reported() {
    let mut v = bundled("wave_1d_default.json");
    v["integrator"]["dt"] = json!(-1.0);
    v["transient"] = json!(-2.0);
    v["state_bounds"] = json!([1.0, 0.0]);
    let pointers: Vec<String> = issues(&v).into_iter().map(|(p, _)| p).collect();
    for p in ["/integrator/dt", "/transient", "/state_bounds"] {
        assert!(pointers.iter().any(|q| q == p), "{p} missing from {pointers:?}");
    }
}

#[test]
fn wave_limits_must_be_equilibria() {
    let mut v = bundled("wave_1d_default.json");
    v["wave"]["limits"] = json!([0.9, 0.0]);
    assert!(issues(&v).iter().any(|(p, _)| p == "/wave/limits"));
}

#[test]
fn verifiers_must_fit_the_dimension() {
    let mut v = bundled("radial_2d_default.json");
    v["verifiers"]["spatial_monotonicity"] = json!({"tol": 1e-8});
    assert!(issues(&v).iter().any(|(p, _)| p == "/verifiers/spatial_monotonicity"));
}
