use serde_json::Value;
use std::process::{Command, Output};

fn kgr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kgr"))
        .args(args)
        .current_dir(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures"))
        .env_remove("KGR_TOL")
        .output()
        .expect("kgr runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stderr));
    })
}

fn check<'a>(r: &'a Value, name: &str) -> &'a Value {
    r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == name)
        .unwrap_or_else(|| panic!("no check {name}"))
}

#[test]
fn ck_verify_passes_exactly() {
    let out = kgr(&["ck-verify", "g2.json", "markov13.json", "--depth", "5", "--cap", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["schema"], "kgr-report/1");
    assert_eq!(r["arithmetic"], "exact");
    assert_eq!(r["verdicts"]["system_depth"], 3);
    for name in [
        "CK1",
        "CK2",
        "CK3",
        "CK4",
        "lambda-min",
        "pvm-a",
        "pvm-b-range",
        "pvm-c",
        "pvm-d",
    ] {
        assert_eq!(check(&r, name)["max_deviation"], 0.0, "{name}");
        assert_eq!(check(&r, name)["pass"], true);
    }
    assert!(r.get("wall_time_ms").is_none());
}

#[test]
fn ck_verify_in_doubles() {
    let out = kgr(&[
        "ck-verify",
        "g2.json",
        "markov13.json",
        "--depth",
        "5",
        "--cap",
        "2,2",
        "--float",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["arithmetic"], "float");
    for c in r["checks"].as_array().unwrap() {
        assert!(c["max_deviation"].as_f64().unwrap() <= 1e-12);
    }
}

#[test]
fn interval_example_is_obstructed() {
    let out = kgr(&["monic-check", "--interval", "g1-sbfs.json", "--max-depth", "8"]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["verdicts"]["monic"], "obstructed");
    let first = &r["verdicts"]["obstructions"][0];
    assert_eq!(first["region"], "[1/2, 1]");
    assert_eq!(first["measure"], "1/2");
    assert_eq!(first["certified"], true);
    assert_eq!(r["inputs"].as_array().unwrap().len(), 2);
    let levels = r["verdicts"]["levels"].as_array().unwrap();
    assert_eq!(levels.len(), 8);
}

#[test]
fn path_space_measure_is_monic() {
    let out = kgr(&[
        "monic-check",
        "g2.json",
        "markov13.json",
        "--max-depth",
        "4",
        "--span-depth",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["verdicts"]["span"]["rank"], 8);
}

#[test]
fn lists_paths() {
    let out = kgr(&["paths", "g2.json", "--degree", "1,1", "--rainbow"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["verdicts"]["count"], 2);
    assert_eq!(r["verdicts"]["paths"], serde_json::json!(["f1.e", "f2.e"]));
    assert_eq!(r["verdicts"]["rainbow"][0], serde_json::json!(["f1", "e"]));
}

#[test]
fn validation_outcomes() {
    assert_eq!(kgr(&["validate", "g3.json"]).status.code(), Some(0));
    let out = kgr(&["validate", "g3-broken.json"]);
    assert_eq!(out.status.code(), Some(1));
    let witness = report(&out)["checks"][0]["witnesses"][0].as_str().unwrap().to_string();
    assert!(witness.contains("hexagon"), "{witness}");
}

#[test]
fn input_errors_exit_two() {
    let missing = kgr(&["validate", "missing.json"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(missing.stdout.is_empty());
    assert!(!missing.stderr.is_empty());
    assert_eq!(kgr(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(kgr(&["paths", "g2.json", "--degree", "1,1,1"]).status.code(), Some(2));
    assert_eq!(kgr(&["monic-check", "--max-depth", "3"]).status.code(), Some(2));
    assert_eq!(
        kgr(&["ck-verify", "g2.json", "markov13.json", "--depth", "2", "--cap", "2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        kgr(&["measure-check", "g2.json", "g2.json", "--depth", "2"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn tolerance_sources() {
    let out = Command::new(env!("CARGO_BIN_EXE_kgr"))
        .args(["measure-check", "g2.json", "markov13.json", "--depth", "2"])
        .current_dir(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures"))
        .env("KGR_TOL", "1e-6")
        .output()
        .unwrap();
    assert_eq!(report(&out)["tolerance"], 1e-6);
    let out = kgr(&[
        "measure-check",
        "g2.json",
        "markov13.json",
        "--depth",
        "2",
        "--tol",
        "0.5",
    ]);
    assert_eq!(report(&out)["tolerance"], 0.5);
    let out = kgr(&["measure-check", "g2.json", "markov13.json", "--depth", "2"]);
    assert_eq!(report(&out)["tolerance"], 1e-9);
    let bad = Command::new(env!("CARGO_BIN_EXE_kgr"))
        .args(["measure-check", "g2.json", "markov13.json", "--depth", "2"])
        .current_dir(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures"))
        .env("KGR_TOL", "tight")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn reports_are_deterministic() {
    let args = ["ck-verify", "g2.json", "markov13.json", "--depth", "4", "--cap", "1"];
    let first = kgr(&args).stdout;
    assert_eq!(first, kgr(&args).stdout);
    let mut parallel: Vec<&str> = args.to_vec();
    parallel.extend(["--jobs", "4"]);
    let third = kgr(&parallel).stdout;
    let strip = |bytes: &[u8]| {
        let mut r: Value = serde_json::from_slice(bytes).unwrap();
        r["command"] = Value::Null;
        r
    };
    assert_eq!(strip(&first), strip(&third));
}

#[test]
fn timing_is_opt_in() {
    let r = report(&kgr(&["validate", "g2.json", "--timing"]));
    assert!(r["wall_time_ms"].as_f64().unwrap() >= 0.0);
}

#[test]
fn equivalence_of_rescaled_system() {
    let out = kgr(&[
        "equiv",
        "g2.json",
        "sys-markov13-rescaled.json",
        "sys-markov13.json",
        "--depth",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["verdicts"]["verdict"], "equivalent");
    assert_eq!(r["verdicts"]["h"]["f1.f2.f1.e.e.e"], "1/2*sqrt(6)");
    assert_eq!(check(&r, "intertwining")["max_deviation"], 0.0);
    let flipped = kgr(&[
        "equiv",
        "g2.json",
        "sys-markov13-flipped.json",
        "sys-markov13.json",
        "--depth",
        "3",
    ]);
    assert_eq!(flipped.status.code(), Some(1));
    assert_eq!(report(&flipped)["verdicts"]["verdict"], "cocycle-obstructed");
}

#[test]
fn disjointness_and_commutant() {
    let out = kgr(&[
        "disjointness",
        "g2.json",
        "markov14.json",
        "markov34.json",
        "--max-depth",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["verdicts"]["verdict"], "singular-likely");
    let values = r["verdicts"]["affinity"]["values"].as_array().unwrap();
    for (n, h) in values.iter().enumerate() {
        let closed = 2.0 * (3f64.sqrt() / 2.0).powi(n as i32);
        assert!((h.as_f64().unwrap() - closed).abs() < 1e-9);
    }
    let out = kgr(&["commutant", "g4.json", "uniform-g4.json", "--depth", "2"]);
    assert_eq!(report(&out)["verdicts"]["dimension"], 2);
    let out = kgr(&["commutant", "g2.json", "markov13.json", "--depth", "3"]);
    assert_eq!(report(&out)["verdicts"]["dimension"], 1);
}

#[test]
fn universal_check_passes() {
    let out = kgr(&[
        "universal-check",
        "g2.json",
        "markov14.json",
        "markov34.json",
        "--depth",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let r = report(&out);
    let h = r["verdicts"]["inner_products"][0]["value"].as_f64().unwrap();
    assert!((h - 2.0 * (3f64.sqrt() / 2.0).powi(3)).abs() < 1e-12);
}
