use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn wrank(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wrank"))
        .args(args)
        .env_remove("WRANK_SIZE_CAP")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_str(stdout(out).trim()).unwrap_or_else(|e| panic!("{e}: {}", stdout(out)))
}

fn write(dir: &TempDir, name: &str, body: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn build_to_file(dir: &TempDir, family: &str, power: &str) -> String {
    let path = dir.path().join(format!("{family}{power}.json"));
    let out = wrank(&["state", "build", family, "--power", power, "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    path.to_string_lossy().into_owned()
}

#[test]
fn state_build_is_byte_stable() {
    let a = wrank(&["state", "build", "w", "--power", "2"]);
    let b = wrank(&["state", "build", "w", "--power", "2"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["shape"], serde_json::json!([4, 4, 4]));
    assert_eq!(v["entries"].as_array().unwrap().len(), 9);
    let idx: Vec<Value> = v["entries"].as_array().unwrap().iter().map(|e| e["idx"].clone()).collect();
    let mut sorted = idx.clone();
    sorted.sort_by_key(|i| i.to_string());
    assert_eq!(idx, sorted);

    let f = wrank(&["state", "build", "ghz", "--float"]);
    assert_eq!(json(&f)["mode"], "float");
    assert_eq!(code(&wrank(&["state", "build", "w", "--power", "0"])), 2);
    assert_eq!(code(&wrank(&["state", "build", "x"])), 2);
}

#[test]
fn size_cap_override_applies() {
    let out = Command::new(env!("CARGO_BIN_EXE_wrank"))
        .args(["state", "build", "w", "--power", "3"])
        .env("WRANK_SIZE_CAP", "100")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("size cap"), "{}", stderr(&out));
    let bad = Command::new(env!("CARGO_BIN_EXE_wrank"))
        .args(["state", "build", "w"])
        .env("WRANK_SIZE_CAP", "lots")
        .output()
        .unwrap();
    assert_eq!(code(&bad), 2);
    assert!(stderr(&bad).contains("WRANK_SIZE_CAP"));
}

#[test]
fn rank_bounds_resolve_w_squared() {
    let out = wrank(&["rank", "bounds", "w", "--power", "2"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["resolved_rank"], "7");
    let provenances: Vec<&str> = v["upper"].as_array().unwrap().iter().map(|b| b["provenance"].as_str().unwrap()).collect();
    assert!(provenances.contains(&"span-certificate:w2-seven"));

    let three = json(&wrank(&["rank", "bounds", "w", "--power", "3"]));
    assert_eq!(three["resolved_rank"], Value::Null);
    let ghz = json(&wrank(&["rank", "bounds", "ghz", "--power", "4"]));
    assert_eq!(ghz["resolved_rank"], "16");

    let text = wrank(&["--format", "text", "rank", "bounds", "w", "--power", "2"]);
    assert!(stdout(&text).contains("(resolved)"));
    assert_eq!(code(&wrank(&["rank", "bounds", "w"])), 2);
    assert_eq!(code(&wrank(&["rank", "bounds"])), 2);
}

#[test]
fn rank_bounds_accept_certificate_files() {
    let dir = TempDir::new().unwrap();
    let state = build_to_file(&dir, "w", "2");
    let cert = wrank(&["cert", "span", "--state", &state, "--spanning", "builtin:w2-seven"]);
    assert_eq!(code(&cert), 0);
    let cert_path = write(&dir, "seven.json", &stdout(&cert));

    let out = wrank(&["rank", "bounds", "--state", &state, "--cert", &cert_path]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["upper"][0]["provenance"], "span-certificate:seven");
    // Only the flattening bound is available below, so nothing resolves.
    assert_eq!(v["resolved_rank"], Value::Null);

    // A certificate for a different state is rejected with its id named.
    let ghz = build_to_file(&dir, "ghz", "2");
    let out = wrank(&["rank", "bounds", "--state", &ghz, "--cert", &cert_path]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("certificate `seven`"), "{}", stderr(&out));
}

#[test]
fn cert_span_exit_codes() {
    let ok = wrank(&["cert", "span", "--state", "builtin:w2", "--spanning", "builtin:w2-seven"]);
    assert_eq!(code(&ok), 0);
    let v = json(&ok);
    assert_eq!(v["verdict"], true);
    assert_eq!(v["support"].as_array().unwrap().len(), 4);

    let neg = wrank(&["cert", "span", "--state", "builtin:w", "--spanning", "builtin:diagonal-2"]);
    assert_eq!(code(&neg), 1);
    assert_eq!(json(&neg)["unreachable"], serde_json::json!([1]));

    let b = wrank(&["cert", "span", "--state", "builtin:w2", "--spanning", "builtin:w2-seven", "--traced", "B"]);
    assert_eq!(code(&b), 0);
    assert_eq!(code(&wrank(&["cert", "span", "--state", "builtin:w2", "--spanning", "builtin:w2-seven", "--traced", "D"])), 2);
    // Dimension mismatch between the spanning pairs and the support.
    assert_eq!(code(&wrank(&["cert", "span", "--state", "builtin:w", "--spanning", "builtin:w2-seven"])), 2);
    assert_eq!(code(&wrank(&["cert", "span", "--state", "builtin:w", "--spanning", "builtin:nothing"])), 2);
}

#[test]
fn decomp_verify_exit_codes() {
    let good = wrank(&["decomp", "verify", "--target", "builtin:w2", "--decomp", "builtin:w2-seven", "--exact"]);
    assert_eq!(code(&good), 0);
    assert_eq!(json(&good)["passed"], true);

    let printed = wrank(&["decomp", "verify", "--target", "builtin:w2", "--decomp", "builtin:w2-seven-printed", "--exact"]);
    assert_eq!(code(&printed), 1);
    let v = json(&printed);
    assert_eq!(v["passed"], false);
    assert_eq!(v["worst_difference"]["re"], "-2");

    let approx = wrank(&["decomp", "verify", "--target", "builtin:ghz^3", "--decomp", "builtin:ghz^3"]);
    assert_eq!(code(&approx), 0);
    assert_eq!(json(&approx)["mode"], "approx");

    // W and its three basis terms, written by hand.
    let dir = TempDir::new().unwrap();
    let one = r#"{"re":"1","im":"0"}"#;
    let zero = r#"{"re":"0","im":"0"}"#;
    let e = |i: usize| if i == 0 { format!("[{one},{zero}]") } else { format!("[{zero},{one}]") };
    let term = |a, b, c| format!(r#"{{"weight":{one},"factors":[{},{},{}]}}"#, e(a), e(b), e(c));
    let doc = format!(r#"{{"shape":[2,2,2],"terms":[{},{},{}]}}"#, term(1, 0, 0), term(0, 1, 0), term(0, 0, 1));
    let path = write(&dir, "w3.json", &doc);
    let w = wrank(&["decomp", "verify", "--target", "builtin:w", "--decomp", &path, "--exact"]);
    assert_eq!(code(&w), 0, "{}", stderr(&w));

    assert_eq!(code(&wrank(&["decomp", "verify", "--target", "builtin:w", "--decomp", "builtin:w2-seven", "--exact"])), 2);
    assert_eq!(code(&wrank(&["decomp", "verify", "--target", "builtin:w2", "--decomp", "builtin:w2-seven", "--tol", "0"])), 2);
}

#[test]
fn malformed_inputs_name_the_field() {
    let dir = TempDir::new().unwrap();
    let bad_idx = write(&dir, "bad.json", r#"{"shape":[2,2,2],"entries":[{"idx":[0,0,9],"re":"1","im":"0"}]}"#);
    let out = wrank(&["decomp", "verify", "--target", &bad_idx, "--decomp", "builtin:w2-seven"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("entries[0].idx"), "{}", stderr(&out));

    let bad_num = write(&dir, "num.json", r#"{"shape":[2,2,2],"entries":[{"idx":[0,0,1],"re":"1/0","im":"0"}]}"#);
    let out = wrank(&["cert", "span", "--state", &bad_num, "--spanning", "builtin:w2-seven"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("entries[0]"), "{}", stderr(&out));

    let unknown = write(&dir, "extra.json", r#"{"shape":[2,2,2],"entries":[],"colour":"red"}"#);
    let out = wrank(&["decomp", "search", "--target", &unknown, "--rank", "1"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("colour"), "{}", stderr(&out));

    let not_json = write(&dir, "junk.json", "shape = 2");
    assert_eq!(code(&wrank(&["decomp", "verify", "--target", &not_json, "--decomp", "builtin:w2-seven"])), 2);

    let missing = dir.path().join("missing.json");
    let out = wrank(&["decomp", "verify", "--target", missing.to_str().unwrap(), "--decomp", "builtin:w2-seven"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("--target"));

    assert_eq!(code(&wrank(&["decomp", "verify", "--bogus"])), 2);
}

#[test]
fn decomp_search_and_probe() {
    let out = wrank(&["decomp", "search", "--target", "builtin:ghz", "--rank", "2", "--restarts", "4", "--seed", "3"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert!(v["residual"].as_f64().unwrap() < 1e-10);
    assert_eq!(v["border_rank_suspicion"], false);
    assert_eq!(v["decomposition"]["mode"], "float");
    let again = wrank(&["decomp", "search", "--target", "builtin:ghz", "--rank", "2", "--restarts", "4", "--seed", "3"]);
    assert_eq!(out.stdout, again.stdout);

    let warm = wrank(&["decomp", "search", "--target", "builtin:w2", "--warm", "builtin:w2-seven"]);
    assert_eq!(code(&warm), 0);
    assert!(json(&warm)["residual"].as_f64().unwrap() < 1e-12);

    let probe = wrank(&["decomp", "probe", "--target", "builtin:w", "--max-rank", "2", "--restarts", "4"]);
    assert_eq!(code(&probe), 0);
    assert!(stderr(&probe).contains("not rank certificates"));
    let rows: Vec<Value> = stdout(&probe).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1]["r"], 2);
    assert_eq!(rows[1]["suspicion"], true);
    for key in ["r", "residual", "suspicion", "restart"] {
        assert!(rows[0].get(key).is_some());
    }

    assert_eq!(code(&wrank(&["decomp", "search", "--target", "builtin:w"])), 2);
    assert_eq!(code(&wrank(&["decomp", "search", "--target", "builtin:w", "--rank", "0"])), 2);
    assert_eq!(code(&wrank(&["decomp", "search", "--target", "builtin:w", "--rank", "2", "--restarts", "0"])), 2);
    assert_eq!(code(&wrank(&["decomp", "probe", "--target", "builtin:w", "--max-rank", "0"])), 2);
}

#[test]
fn from_cert_round_trip() {
    let dir = TempDir::new().unwrap();
    let state = build_to_file(&dir, "w", "2");
    let cert = wrank(&["cert", "span", "--state", &state, "--spanning", "builtin:w2-seven", "--traced", "C"]);
    let cert_path = write(&dir, "cert.json", &stdout(&cert));

    let out_path = dir.path().join("seven.json");
    let out = wrank(&["decomp", "from-cert", "--state", &state, "--cert", &cert_path, "--out", out_path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let decomp: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(decomp["terms"].as_array().unwrap().len(), 7);

    let verify = wrank(&["decomp", "verify", "--target", &state, "--decomp", out_path.to_str().unwrap(), "--exact"]);
    assert_eq!(code(&verify), 0);

    let direct = wrank(&["decomp", "from-cert", "--state", "builtin:w2", "--spanning", "builtin:w2-seven", "--traced", "C"]);
    assert_eq!(stdout(&direct).trim(), std::fs::read_to_string(&out_path).unwrap().trim());

    let negative = wrank(&["decomp", "from-cert", "--state", "builtin:w", "--spanning", "builtin:diagonal-2"]);
    assert_eq!(code(&negative), 1);

    // A certificate built for another state does not re-verify.
    let out = wrank(&["decomp", "from-cert", "--state", "builtin:ghz^2", "--cert", &cert_path]);
    assert_eq!(code(&out), 2);
    assert_eq!(code(&wrank(&["decomp", "from-cert", "--state", "builtin:w"])), 2);
}

#[test]
fn file_and_builtin_targets_agree() {
    let dir = TempDir::new().unwrap();
    let state = build_to_file(&dir, "ghz", "2");
    for args in [
        vec!["cert", "span", "--spanning", "builtin:diagonal-4", "--state"],
        vec!["decomp", "verify", "--decomp", "builtin:ghz^2", "--exact", "--target"],
    ] {
        let mut from_file = args.clone();
        from_file.push(&state);
        let mut builtin = args.clone();
        builtin.push("builtin:ghz^2");
        assert_eq!(wrank(&from_file).stdout, wrank(&builtin).stdout);
    }
}

#[test]
fn slocc_table_rows() {
    let out = wrank(&["slocc", "table", "--max-m", "3", "--max-n", "2"]);
    assert_eq!(code(&out), 0);
    let rows = json(&out);
    let row = rows
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["kind"] == "rank-comparison" && r["m"] == 3 && r["n"] == 2)
        .unwrap();
    assert_eq!(row["verdict"], true);
    assert_eq!(row["lhs"], "8");
    assert_eq!(row["rhs"], "7");
    let text = wrank(&["--format", "text", "slocc", "table", "--max-m", "2", "--max-n", "1"]);
    assert_eq!(stdout(&text).lines().count(), 1 + 3 * 2);
    assert_eq!(code(&wrank(&["slocc", "table", "--max-m", "0", "--max-n", "2"])), 2);
}

#[test]
fn lemma2_witness_exit_codes() {
    let out = wrank(&["lemma2", "witness", "--n", "3", "--trials", "25", "--seed", "1"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["verdict"], true);
    assert_eq!(v["expected_rank"], 8);
    assert_eq!(code(&wrank(&["lemma2", "witness", "--n", "0"])), 2);
    assert_eq!(code(&wrank(&["lemma2", "witness", "--n", "40"])), 2);
}

#[test]
fn out_flag_writes_file() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("table.txt");
    let out = wrank(&["--format", "text", "slocc", "table", "--max-m", "1", "--max-n", "1", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    assert!(std::fs::read_to_string(&path).unwrap().starts_with("predicate"));
    let unwritable = Path::new("/nonexistent-dir/x.json");
    assert_eq!(code(&wrank(&["state", "build", "w", "--out", unwritable.to_str().unwrap()])), 2);
}
