use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_toric-disc"))
        .args(args)
        .env_remove("TORIC_DISC_TRUNCATION")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn mirror_map_prints_inverse() {
    let o = run(&["mirror-map", "--geometry", "KP3", "--order", "5"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("Q = q - 24*q^2 - 396*q^3 - 39104*q^4 - 4356750*q^5\n"), "{out}");
    assert!(out.contains("round_trip: true"));
}

#[test]
fn mirror_map_json() {
    let o = run(&["mirror-map", "-g", "KP2-inner", "--order", "3", "--json"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let delta = v["series"].as_array().unwrap().iter().find(|s| s["name"] == "delta0").unwrap();
    let terms = delta["terms"].as_array().unwrap();
    assert_eq!(terms[0]["coefficient"], "-2/1");
    assert_eq!(terms[0]["exponents"], serde_json::json!([1]));
}

#[test]
fn table_csv_has_reference_entries() {
    let o = run(&["table", "--geometry", "KP2-inner", "--convention", "inner", "--format", "csv"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.starts_with("uv,z2,q,value\n"));
    assert!(out.contains("\n0,3,3,838/3\n"));
    assert!(out.contains("\n1,1,1,8\n"));
}

#[test]
fn output_is_reproducible_and_out_matches_stdout() {
    let args = ["table", "-g", "KP2-outer", "--format", "json"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.json");
    let mut with_out = args.to_vec();
    with_out.extend(["--out", path.to_str().unwrap()]);
    let c = run(&with_out);
    assert!(c.status.success() && c.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), a.stdout);
}

#[test]
fn verify_all_passes() {
    let o = run(&["verify", "all"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(stdout(&o).lines().filter(|l| l.contains(": ok ")).count(), 6);
}

#[test]
fn verify_report_json() {
    let o = run(&["verify", "abelian-family", "--report", "json"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["matched"], v["expected"]);
    let cross = v["cross_mismatches"].as_array().unwrap();
    assert!(cross.iter().all(|m| m["expected"].is_string() && m["computed"].is_string()));
    assert!(v.get("runtime_ms").is_none());
    let again = run(&["verify", "abelian-family", "--report", "json"]);
    assert_eq!(o.stdout, again.stdout);
}

#[test]
fn verify_mismatch_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("case.txt");
    std::fs::write(&path, "case C3\nconvention inner\nstrict solution uv=1 : 1\n").unwrap();
    let o = run(&["verify", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("expected 1, computed -1"));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["verify", "nope"]).status.code(), Some(1));
    assert_eq!(run(&["table"]).status.code(), Some(2));
    assert_eq!(run(&["table", "-g", "KP2-inner", "--convention", "sideways"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["slab", "-g", "no-such-geometry"]).status.code(), Some(1));
    let bad_frame = run(&["slab", "-g", "KP2-inner", "--chamber", "0", "--frame", "[[1,0],[-2,1]]"]);
    assert_eq!(bad_frame.status.code(), Some(1));
    assert_eq!(run(&["mirror-map", "-g", "local-surface-A0"]).status.code(), Some(1));
}

#[test]
fn truncation_env_and_flag_precedence() {
    let bin = env!("CARGO_BIN_EXE_toric-disc");
    let with_env = |args: &[&str], val: &str| {
        Command::new(bin).args(args).env("TORIC_DISC_TRUNCATION", val).output().unwrap()
    };
    let o = with_env(&["slab", "-g", "KP2-inner"], "1,0,4");
    let out = stdout(&o);
    assert!(out.contains("- 2*q") && !out.contains("q^2"), "{out}");
    let o = with_env(&["slab", "-g", "KP2-inner", "--q-total", "2"], "1,0,4");
    assert!(stdout(&o).contains("5*q^2"));
    assert_eq!(with_env(&["slab", "-g", "C3"], "1,2").status.code(), Some(1));
}

#[test]
fn json_geometry_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("outer.json");
    std::fs::write(
        &path,
        r#"{"points": [[0,0],[1,0],[0,1],[-1,-1]], "sigma": [0,1,2], "chamber": 2,
            "frame": [[1,-1],[0,-1]], "truncation": {"q_total": 3, "uv_max": 2, "z_window": 4}}"#,
    )
    .unwrap();
    let from_file = run(&["table", "-g", path.to_str().unwrap(), "--format", "csv"]);
    let builtin = run(&["table", "-g", "KP2-outer", "--format", "csv"]);
    assert!(from_file.status.success());
    assert_eq!(from_file.stdout, builtin.stdout);
}

#[test]
fn slab_reports_untwisted_constant_and_provenance() {
    let o = run(&["slab", "-g", "KP2-inner", "--json"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["untwisted_leading_constant"], "2");
    assert_eq!(v["solve_variable"], "z1");
    assert_eq!(v["provenance"].as_array().unwrap().len(), 4);
}

#[test]
fn potential_and_av_potential_for_c3() {
    let o = run(&["potential", "-g", "C3"]);
    assert!(stdout(&o).starts_with("Z = 1 + z2 - uv\n"));
    let o = run(&["av-potential", "-g", "C3", "--format", "text"]);
    let out = stdout(&o);
    assert!(out.contains("1/2  0 2\n") && out.contains("-1/6  0 3\n"), "{out}");
}
