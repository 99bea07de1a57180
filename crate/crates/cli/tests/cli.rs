use std::path::Path;
use std::process::{Command, Output};

fn disc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_disc")).args(args).env_remove("DISCLAB_CONFIG").output().expect("spawn disc")
}

fn ok(args: &[&str]) -> String {
    let o = disc(args);
    assert!(o.status.success(), "disc {args:?} failed: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn json(args: &[&str]) -> serde_json::Value {
    let mut a = args.to_vec();
    a.push("--json");
    serde_json::from_str(&ok(&a)).expect("json output")
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn lambda_csv_has_header_and_exact_values() {
    let out = ok(&["lambda", "--k", "2..6", "--csv"]);
    let lines: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(lines[0], "k,rho,lambda,interval");
    let got: Vec<(&str, &str)> = lines[1..].iter().map(|l| {
        let c: Vec<&str> = l.split(',').collect();
        (c[1], c[2])
    }).collect();
    assert_eq!(got, vec![("1/3", "1/3"), ("1/3", "2/3"), ("5/14", "27/28"), ("9/25", "32/25"), ("4/11", "35/22")]);
}

#[test]
fn generated_files_feed_embed_and_oracle() {
    let d = tempfile::tempdir().unwrap();
    let g = p(d.path(), "c6.graph");
    let c = p(d.path(), "b6.col");
    ok(&["gen", "graph", "cycle", "--n", "6", "--out", &g]);
    ok(&["gen", "coloring", "bipartite", "--n", "6", "--rho", "1/3", "--out", &c]);
    let o = json(&["oracle", "maxdisc", "--guest", &g, "--coloring", &c]);
    assert_eq!(o["result"]["discrepancy"], 2);
    assert_eq!(o["result"]["report"]["mono_plus"], 4);
    for s in ["random", "cut", "auto"] {
        let e = json(&["embed", "--strategy", s, "--guest", &g, "--coloring", &c]);
        assert_eq!(e["result"]["recount_ok"], true, "{s}");
        assert!(e["result"]["discrepancy"].as_u64().unwrap() <= 2, "{s}");
    }
    let sampled = json(&["embed", "--strategy", "random", "--sample", "50", "--guest", &g, "--coloring", &c]);
    assert_eq!(sampled["result"]["recount_ok"], true);
}

#[test]
fn json_inputs_and_envelopes_are_accepted() {
    let d = tempfile::tempdir().unwrap();
    let g = p(d.path(), "g.json");
    let c = p(d.path(), "c.json");
    ok(&["gen", "graph", "path", "--n", "7", "--json", "--out", &g]);
    ok(&["gen", "coloring", "random", "--n", "7", "--seed", "3", "--json", "--out", &c]);
    let b = json(&["bisect", "--in", &g, "--direction", "max", "--mode", "exact"]);
    assert_eq!(b["result"]["u_side"].as_array().unwrap().len(), 3);
    assert_eq!(b["result"]["cut_size"], 6);
    let e = json(&["embed", "--guest", &g, "--coloring", &c]);
    assert_eq!(e["result"]["recount_ok"], true);
}

#[test]
fn oracle_factor_examples() {
    let d = tempfile::tempdir().unwrap();
    let c = p(d.path(), "b6.col");
    ok(&["gen", "coloring", "bipartite", "--n", "6", "--rho", "1/3", "--out", &c]);
    let r = json(&["oracle", "factor", "--k", "3", "--coloring", &c]);
    assert_eq!((r["result"]["best_red"].as_u64(), r["result"]["best_blue"].as_u64()), (Some(4), Some(3)));
    let t = p(d.path(), "c6.json");
    ok(&["gen", "twofactor", "--lengths", "6", "--out", &t]);
    let r = json(&["oracle", "factor", "--guest", &t, "--coloring", &c]);
    assert!(r["result"]["best_red"].as_u64().unwrap() <= 4);
    assert!(r["result"]["best_blue"].as_u64().unwrap() <= 4);
    let tw = json(&["twofactor", "--guest", &t, "--coloring", &c]);
    assert_eq!(tw["result"]["recount_ok"], true);
    assert!(tw["result"]["count"].as_u64().unwrap() <= 4);
}

#[test]
fn factor_driver_reaches_the_extremal_value() {
    let d = tempfile::tempdir().unwrap();
    let c = p(d.path(), "b.col");
    ok(&["gen", "coloring", "bipartite", "--n", "60", "--rho", "1/3", "--out", &c]);
    let r = json(&["factor", "--k", "2", "--coloring", &c]);
    assert_eq!(r["result"]["count"], 20);
}

#[test]
fn verifiers_report_and_set_exit_codes() {
    let b = json(&["verify", "binomial", "--n-max", "300"]);
    assert_eq!(b["result"]["holds"], true);
    let c = json(&["verify", "coupling", "--n-max", "6"]);
    assert_eq!(c["result"]["holds"], true);
    let a = json(&["verify", "anticoncentration", "--eta", "1/2", "--k", "200..400:100"]);
    assert_eq!(a["result"]["points_checked"].as_u64().map(|x| x > 0), Some(true));
    let csv = ok(&["verify", "tails", "--eta", "1/4", "--p", "eta", "--k", "100,200", "--csv"]);
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 3);
    let m = json(&["verify", "matching", "--n", "100", "--p", "50", "--k", "20", "--trials", "10000"]);
    assert_eq!(m["result"]["holds"], true);
    let bad = disc(&["verify", "matching", "--n", "100", "--p", "50", "--k", "20", "--trials", "10"]);
    assert_eq!(bad.status.code(), Some(2));
}

fn write_spec(dir: &Path, name: &str, body: &str) -> String {
    let path = p(dir, name);
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn experiments_are_byte_reproducible_across_thread_counts() {
    let d = tempfile::tempdir().unwrap();
    let s = write_spec(d.path(), "dom.spec", "[experiment]\nkind = dominance\n[grid]\nn = 7\nseeds = 12\n[assert]\ndriver_le_oracle\nrecount_equal\n");
    let one = ok(&["experiment", &s, "--threads", "1", "--seed", "9"]);
    let four = ok(&["experiment", &s, "--threads", "4", "--seed", "9"]);
    assert_eq!(one, four);
    let rows: Vec<&str> = one.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 13);
    assert!(rows[1..].iter().all(|r| r.ends_with(",true")));
    assert_ne!(one, ok(&["experiment", &s, "--seed", "10"]));
}

#[test]
fn empty_grid_gives_header_only() {
    let d = tempfile::tempdir().unwrap();
    let s = write_spec(d.path(), "e.spec", "[experiment]\nkind = disc-vs-d\n[grid]\nd =\n");
    let out = ok(&["experiment", &s]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("# disc config="));
    assert_eq!(lines[1], "cell,n,d,seed,input_digest,strategy,e_f,discrepancy,recount_ok");
}

#[test]
fn failed_assertions_exit_nonzero_with_failure_list() {
    let d = tempfile::tempdir().unwrap();
    let s = write_spec(d.path(), "l.spec", "[experiment]\nkind = lambda\n[grid]\nk = 2,3\n[assert]\nexpect k=2 rho=1/3 lambda=1/3\nexpect k=3 rho=1/2 lambda=2/3\n");
    let o = disc(&["experiment", &s]);
    assert_eq!(o.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    let f = err["failures"].as_array().unwrap();
    assert_eq!(f.len(), 1);
    assert!(f[0].as_str().unwrap().starts_with("line 7"));
}

#[test]
fn spec_errors_name_the_line() {
    let d = tempfile::tempdir().unwrap();
    let s = write_spec(d.path(), "bad.spec", "[experiment]\nkind = lambda\n[grid]\nk = 2..x\n");
    let o = disc(&["experiment", &s]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("spec line 4"));
}

#[test]
fn config_file_and_env_change_the_digest() {
    let d = tempfile::tempdir().unwrap();
    let cfg = p(d.path(), "c.cfg");
    std::fs::write(&cfg, "beta = 1/500\n").unwrap();
    let base = json(&["lambda", "--k", "2"]);
    let flag = json(&["lambda", "--k", "2", "--config", &cfg]);
    assert_ne!(base["config_digest"], flag["config_digest"]);
    let env = Command::new(env!("CARGO_BIN_EXE_disc")).args(["lambda", "--k", "2", "--json"]).env("DISCLAB_CONFIG", &cfg).output().unwrap();
    let env: serde_json::Value = serde_json::from_slice(&env.stdout).unwrap();
    assert_eq!(env["config_digest"], flag["config_digest"]);
    std::fs::write(&cfg, "beta = 2\n").unwrap();
    assert_eq!(disc(&["lambda", "--config", &cfg]).status.code(), Some(2));
}

#[test]
fn bundled_specs_pass() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../specs");
    for name in ["lambda.spec", "dominance.spec"] {
        let path = root.join(name);
        ok(&["experiment", path.to_str().unwrap()]);
    }
}
