use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn tc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tc")).args(args).output().expect("tc runs")
}

fn scratch(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("tc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn canon_is_byte_identical_for_equivalent_inputs() {
    let a = scratch("a.tc", "contr(D[e] W[a,b,c,d] * D[e] W[a,b,c,d] * R)\n");
    let b = scratch("b.tc", "contr(R * D[f] W[c,d,a,b] * D[f] W[d,c,b,a])\n");
    let (oa, ob) = (tc(&["canon", a.to_str().unwrap()]), tc(&["canon", b.to_str().unwrap()]));
    assert_eq!(oa.status.code(), Some(0));
    assert_eq!(oa.stdout, ob.stdout);
}

#[test]
fn canon_of_shipped_data() {
    let f = concat!(env!("CARGO_MANIFEST_DIR"), "/data/weyl_norms.tc");
    let o = tc(&["canon", f]);
    let lines: Vec<String> = stdout(&o).lines().map(str::to_owned).collect();
    assert_eq!(lines[0], lines[1]);
    assert_eq!(lines[3], "0");
}

#[test]
fn ambient_json_at_ten() {
    let out = std::env::temp_dir().join(format!("tc-ambient-{}.json", std::process::id()));
    let o = tc(&["ambient", "--n", "10", "--json", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["net_constant"], "1/98");
    assert_eq!(v["nonzero"], true);
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(saved, v);
}

#[test]
fn exit_codes() {
    assert_eq!(tc(&["verify", "--suite", "empty"]).status.code(), Some(0));
    assert_eq!(tc(&["verify", "--suite", "no-such-suite"]).status.code(), Some(2));
    assert_eq!(tc(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(tc(&["canon", "/nonexistent/file.tc"]).status.code(), Some(2));
    let bad = scratch("bad.tc", "contr(W[a,b,c\n");
    assert_eq!(tc(&["canon", bad.to_str().unwrap()]).status.code(), Some(2));
    // silly multiplicities differ from the stated power of two
    assert_eq!(tc(&["verify", "--suite", "silly", "--n", "10"]).status.code(), Some(1));
}

#[test]
fn verify_report_shape() {
    let o = tc(&["verify", "--suite", "sigma1", "--n", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["suite"], "sigma1");
    assert_eq!(v["verdict"], "PASS");
    assert_eq!(v["dims"][0]["n"], 10);
}

#[test]
fn numcheck_rejects_mismatched_dimension() {
    let f = concat!(env!("CARGO_MANIFEST_DIR"), "/data/crossed_square.tc");
    assert_eq!(tc(&["numcheck", "--n", "8", f]).status.code(), Some(2));
}

#[test]
fn stats_fields() {
    let f = scratch("s.tc", "contr(D[a] W[b,c,d,e] * D[a] W[b,c,d,e])\n");
    let v: Value = serde_json::from_str(&stdout(&tc(&["stats", f.to_str().unwrap()]))).unwrap();
    assert_eq!(v[0]["sigma"], 2);
    assert_eq!(v[0]["weight"], -6);
}
