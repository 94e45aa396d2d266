use std::fs;
use std::path::Path;

use omas::cli::{run, EXIT_INADMISSIBLE, EXIT_INVALID, EXIT_OK};
use omas::scenario_io::{paper_scenario, parse_scenario, NodeValue, PAPER_SCENARIO};
use proptest::prelude::*;
use serde_json::Value;

fn cli(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(args.iter().copied(), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap())
}

fn paper_path() -> String {
    concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/paper.scenario").to_string()
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn bundled_file_matches_embedded_copy() {
    assert_eq!(fs::read_to_string(paper_path()).unwrap(), PAPER_SCENARIO);
}

#[test]
fn analyze_reports_balance_and_counts() {
    let (code, out) = cli(&["omas", "analyze", &paper_path()]);
    assert_eq!(code, EXIT_OK);
    let modes: Vec<Value> = serde_json::from_str(&out).unwrap();
    let verdicts: Vec<&str> = modes.iter().map(|m| m["balance"].as_str().unwrap()).collect();
    assert_eq!(verdicts, ["SB", "SB", "SB", "SUB", "SB", "SB"]);
    let xi: Vec<u64> = modes.iter().map(|m| m["xi"].as_u64().unwrap()).collect();
    assert_eq!(xi, [1, 1, 1, 0, 1, 1]);
    let cycle = modes[3]["witness_cycle"].as_array().unwrap();
    assert_eq!(cycle.len(), 4);
    // the witness is the square with both v1 edges antagonistic: three negative edges
    let negatives = cycle.iter().filter(|e| e[2] == -1).count();
    assert_eq!(negatives, 3);
    for e in cycle {
        assert!(["v1", "v2", "v3", "v4"].contains(&e[0].as_str().unwrap()));
    }
    assert_eq!(modes[5]["partition"]["positive"], serde_json::json!(["v1", "v3", "v5", "v7"]));
    assert_eq!(modes[5]["partition"]["negative"], serde_json::json!(["v2", "v4", "v6"]));
}

#[test]
fn certify_paper_scenario() {
    let (code, out) = cli(&["omas", "certify", &paper_path()]);
    assert_eq!(code, EXIT_OK);
    let r: Value = serde_json::from_str(&out).unwrap();
    let certs = r["certificates"].as_array().unwrap();
    assert_eq!(certs.len(), 6);
    for c in certs {
        assert!(c["residual"].as_f64().unwrap() <= 1e-8);
        assert!(c["lambda_min_p"].as_f64().unwrap() > 0.0);
    }
    assert_eq!(r["dwell_time"]["switches"].as_array().unwrap().len(), 5);
    assert!(r["dwell_time"]["switches"][0]["theta"].as_f64().unwrap() > 0.0);
}

const FAST_SWITCHING: &str = r#"
version = 1
[gains]
k1 = 1.0
n_hat = 0.0
[integrator]
step = 0.01
t_end = 0.5
[[nodes]]
label = "a"
init = 1.0
[[nodes]]
label = "b"
init = 2.0
[[nodes]]
label = "c"
init = -1.0
"#;

fn fast_switching() -> String {
    let mut text = FAST_SWITCHING.to_string();
    for k in 0..10 {
        let sign = if k % 2 == 0 { 1 } else { -1 };
        text.push_str(&format!(
            "[[modes]]\nstart = {}\nedges = [[\"a\", \"b\", 1], [\"b\", \"c\", {sign}], [\"a\", \"c\", 1]]\n",
            k as f64 * 0.04
        ));
    }
    text
}

#[test]
fn certify_flags_fast_switching() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fast.scenario");
    fs::write(&path, fast_switching()).unwrap();
    let (code, out) = cli(&["omas", "certify", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_INADMISSIBLE);
    let r: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(r["dwell_time"]["overall"], Value::Bool(false));
}

#[test]
fn invalid_scenarios_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.scenario");
    let text = PAPER_SCENARIO.replace("start = 1.3", "start = 0.0");
    fs::write(&path, text).unwrap();
    for sub in ["analyze", "certify"] {
        assert_eq!(cli(&["omas", sub, path.to_str().unwrap()]).0, EXIT_INVALID);
    }
}

#[test]
fn simulate_writes_traces_and_outcome() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let (code, out) = cli(&["omas", "simulate", &paper_path(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let outcome: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(outcome["x"]["kind"], "bipartite");
    assert_eq!(outcome["x"]["positive_camp"], serde_json::json!(["v1", "v3", "v5", "v7"]));
    let trace = fs::read_to_string(out_dir.join("trace_x.csv")).unwrap();
    let header = trace.lines().next().unwrap();
    assert_eq!(
        header,
        "t,mode,x_v1,x_v2,x_v3,x_v4,x_v5,x_v6,x_v7,e_1,e_2,e_3,e_4,e_5,e_6,e_7"
    );
    // first sample: four robots, blanks for the rest
    assert_eq!(trace.lines().nth(1).unwrap(), "0,1,3.6,4.1,-1.9,-6.4,,,,7.7,5.5,10.5,-8.3,,,");
    let jumps: Vec<Value> = serde_json::from_str(&fs::read_to_string(out_dir.join("jumps_x.json")).unwrap()).unwrap();
    assert_eq!(jumps.len(), 5);
    assert_eq!(jumps[0]["t"], 1.3);
    assert_eq!(jumps[0]["from_mode"], 1);
}

#[test]
fn scalar_scenarios_write_single_trace() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fast.scenario");
    fs::write(&path, fast_switching()).unwrap();
    let out_dir = dir.path().join("out");
    let (code, _) = cli(&["omas", "simulate", path.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let names: Vec<String> = read_dir_sorted(&out_dir).into_iter().map(|(n, _)| n).collect();
    assert_eq!(names, ["jumps.json", "outcome.json", "trace.csv"]);
}

#[test]
fn subcommands_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let path = paper_path();
    for sub in ["analyze", "certify"] {
        assert_eq!(cli(&["omas", sub, &path]), cli(&["omas", sub, &path]));
    }
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        assert_eq!(cli(&["omas", "simulate", &path, "--out", d.to_str().unwrap()]).0, EXIT_OK);
    }
    assert_eq!(read_dir_sorted(&a), read_dir_sorted(&b));
}

#[test]
fn round_trip_of_bundled_scenario() {
    let f = paper_scenario();
    let text = f.to_toml();
    let g = parse_scenario(&text).unwrap();
    assert_eq!(f, g);
    for axis in 0..2 {
        assert_eq!(f.scenario(axis).unwrap(), g.scenario(axis).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn round_trip_of_perturbed_scenarios(
        k1 in 0.01f64..10.0,
        step in 1e-5f64..0.1,
        values in prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0, -3.0f64..3.0), 7),
        delta in 0.001f64..1.0,
        n_hat in 0.0f64..5.0,
    ) {
        let mut f = paper_scenario();
        f.gains.k1 = k1;
        f.gains.n_hat = n_hat;
        f.integrator.step = step;
        f.unicycle.as_mut().unwrap().delta = delta;
        for (node, (x, y, th)) in f.nodes.iter_mut().zip(values) {
            node.init = NodeValue::Planar([x, y]);
            node.heading = Some(th);
        }
        let g = parse_scenario(&f.to_toml()).unwrap();
        prop_assert_eq!(&f, &g);
        prop_assert_eq!(f.scenario(1).unwrap(), g.scenario(1).unwrap());
    }
}
