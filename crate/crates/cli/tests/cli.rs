use std::path::Path;
use std::process::{Command, Output};

use dlab::budget::Budget;
use dlab::format::{read_dset, read_pairset};
use dlab::lab;
use dlab::setops::PairSet;

fn dlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dlab")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = dlab(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

/// Body of a header-stamped JSON output.
fn json_body(text: &str) -> serde_json::Value {
    let (head, body) = text.split_once('\n').unwrap();
    assert!(head.starts_with("#dlab-cli "));
    serde_json::from_str(body).unwrap()
}

#[test]
fn counterexample_files() {
    let dir = tempfile::tempdir().unwrap();
    let (g, x) = (p(dir.path(), "g.pairs"), p(dir.path(), "x.dset"));
    ok(&["counterexample", "--which", "1", "--m", "6", "--out", &g, &x]);
    let gd = read_pairset(Path::new(&g)).unwrap();
    let xd = read_dset(Path::new(&x)).unwrap();
    assert_eq!(gd.data.len(), 4225);
    assert_eq!(xd.data.len(), 66);
    let prov = gd.provenance.unwrap();
    assert!(prov.starts_with("dlab-cli 0.1.0 config="), "{prov}");
    assert!(prov.contains("\"which\":\"One\""));
    let text = std::fs::read_to_string(&g).unwrap();
    assert!(text.starts_with("#dlab v1 base=R p=- d=2 m=6 Rexp=0 dlab-cli"));
}

#[test]
fn cover_prints_the_count() {
    let dir = tempfile::tempdir().unwrap();
    let a = p(dir.path(), "a.dset");
    ok(&["gen", "--alg", "C", "--m", "6", "--s", "1.2", "--seed", "3", "--out", &a]);
    let set = read_dset(Path::new(&a)).unwrap().data;
    let printed = ok(&["cover", "--in", &a, "--k", "3"]);
    assert_eq!(printed.trim(), set.covering_number(3).unwrap().to_string());
    assert_eq!(set, lab::gen_random_dset(set.alg(), 1.2, 3, &Budget::default()).unwrap());
}

#[test]
fn babyproj_csv_matches_projection_profile() {
    let dir = tempfile::tempdir().unwrap();
    let (a, x, csv) = (p(dir.path(), "a.dset"), p(dir.path(), "x.dset"), p(dir.path(), "out.csv"));
    ok(&["gen", "--alg", "C", "--m", "5", "--s", "1", "--seed", "1", "--out", &a]);
    ok(&["gen", "--alg", "C", "--m", "5", "--kind", "circle", "--out", &x]);
    ok(&["babyproj", "--A", &a, "--X", &x, "--format", "csv", "--out", &csv]);
    let aset = read_dset(Path::new(&a)).unwrap().data;
    let xset = read_dset(Path::new(&x)).unwrap().data;
    let profile = lab::measure_projection_profile(&PairSet::product(&aset, &aset).unwrap(), &xset, &Budget::default()).unwrap();
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("#dlab-cli 0.1.0 config="));
    let body = lines.collect::<Vec<_>>().join("\n");
    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    let rows: Vec<lab::ExperimentRecord> = rdr.deserialize().collect::<Result<_, _>>().unwrap();
    assert_eq!(rows.len(), profile.len());
    for (r, q) in rows.iter().zip(&profile) {
        assert_eq!(r.x_coords, q.x_coords);
        assert_eq!(r.count, q.count);
    }
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a1, a2) = (p(dir.path(), "a1.dset"), p(dir.path(), "a2.dset"));
    for out in [&a1, &a2] {
        ok(&["gen", "--alg", "Qp_ext", "--p", "3", "--d", "2", "--m", "4", "--s", "1.5", "--seed", "9", "--out", out]);
    }
    let (t1, t2) = (std::fs::read(&a1).unwrap(), std::fs::read(&a2).unwrap());
    // headers echo the output path, bodies must agree byte for byte
    let body = |t: &[u8]| t.splitn(2, |&b| b == b'\n').nth(1).unwrap().to_vec();
    assert_eq!(body(&t1), body(&t2));
    let (j1, j2) = (p(dir.path(), "e1.json"), p(dir.path(), "e2.json"));
    ok(&["escape", "--in", &a1, "--out", &j1]);
    ok(&["escape", "--in", &a1, "--out", &j2]);
    assert_eq!(json_body(&std::fs::read_to_string(&j1).unwrap()), json_body(&std::fs::read_to_string(&j2).unwrap()));
    let s1 = ok(&["avoid", "--in", &a1, "--strong"]);
    let s2 = ok(&["avoid", "--in", &a1, "--strong"]);
    assert_eq!(s1, s2);
}

#[test]
fn validation_errors_exit_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = p(dir.path(), "never.dset");
    let r = dlab(&["gen", "--alg", "Z", "--m", "4", "--s", "1", "--out", &out]);
    assert_eq!(r.status.code(), Some(2));
    let err = String::from_utf8(r.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(!Path::new(&out).exists());
    let r = dlab(&["cover", "--in", &p(dir.path(), "missing.dset"), "--k", "1"]);
    assert_eq!(r.status.code(), Some(2));
    let r = dlab(&["frobnicate"]);
    assert_eq!(r.status.code(), Some(2));
    let r = dlab(&["gen", "--alg", "C", "--m", "4", "--out", &out]);
    assert_eq!(r.status.code(), Some(2));
    assert!(!Path::new(&out).exists());
}

#[test]
fn budget_exhaustion_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = p(dir.path(), "grid.dset");
    let r = Command::new(env!("CARGO_BIN_EXE_dlab"))
        .args(["gen", "--alg", "C", "--m", "6", "--kind", "grid", "--out", &out])
        .env(Budget::ENV_POINTS, "100")
        .output()
        .unwrap();
    assert_eq!(r.status.code(), Some(3));
    assert!(!Path::new(&out).exists());
    assert!(dir.path().read_dir().unwrap().next().is_none());
}

#[test]
fn op_energy_and_ledger() {
    let dir = tempfile::tempdir().unwrap();
    let (a, s, l) = (p(dir.path(), "a.dset"), p(dir.path(), "s.dset"), p(dir.path(), "l.csv"));
    ok(&["gen", "--alg", "R", "--m", "6", "--kind", "ap", "--n", "3", "--out", &a]);
    ok(&["op", "sum", "--a", &a, "--b", &a, "--out", &s]);
    assert_eq!(read_dset(Path::new(&s)).unwrap().data.len(), 5);
    assert_eq!(ok(&["energy", "--a", &a]).trim(), "19");
    ok(&["ledger", "--in", &a, &a, &a, "--y1", "64", "--y2", "-64", "--out", &l]);
    let text = std::fs::read_to_string(&l).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("#dlab-cli"));
    assert_eq!(lines[1], "instance,lhs,rhs,slack");
    assert_eq!(lines.len(), 5);
}

#[test]
fn projection_and_linear_map_ops() {
    let dir = tempfile::tempdir().unwrap();
    let (g, x, pr, lm) = (
        p(dir.path(), "g.pairs"),
        p(dir.path(), "x.dset"),
        p(dir.path(), "p.dset"),
        p(dir.path(), "l.pairs"),
    );
    ok(&["counterexample", "--which", "2", "--m", "4", "--out", &g, &x]);
    ok(&["op", "proj", "--g", &g, "--x", "0,16", "--out", &pr]);
    // a + ib over A × A, plus i(A + A) off the overlap
    assert_eq!(read_dset(Path::new(&pr)).unwrap().data.len(), 17 * 17 + 16);
    ok(&["op", "linmap", "--g", &g, "--map", "16,0;0,0;0,0;16,0", "--out", &lm]);
    assert_eq!(read_pairset(Path::new(&lm)).unwrap().data, read_pairset(Path::new(&g)).unwrap().data);
}

#[test]
fn counting_reports() {
    let dir = tempfile::tempdir().unwrap();
    let (a, x) = (p(dir.path(), "a.dset"), p(dir.path(), "x.dset"));
    ok(&["gen", "--alg", "C", "--m", "5", "--s", "1", "--seed", "2", "--out", &a]);
    ok(&["gen", "--alg", "C", "--m", "5", "--kind", "ap", "--n", "3", "--step", "5", "--out", &x]);
    let tv = json_body(&ok(&["count-tv", "--a", &a, "--x", &x, "--rho-exp", "2", "--s", "1", "--sigma", "1", "--t", "2"]));
    assert!(tv["total"].as_u64().unwrap() > 0);
    assert_eq!(tv["bound_exponent"].as_f64().unwrap(), 0.5);
    let sp = json_body(&ok(&["count-sparse", "--a", &a, "--p", "32,0", "--q", "32,0", "--rho-exp", "1", "--tol", "exact"]));
    assert_eq!(sp["total"].as_u64().unwrap().to_string(), ok(&["energy", "--a", &a]).trim());
    let r = dlab(&["count-sparse", "--a", &a, "--p", "32,0", "--q", "0,0", "--rho-exp", "1"]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn expansion_and_fibres() {
    let dir = tempfile::tempdir().unwrap();
    let (a, e, g, x) = (
        p(dir.path(), "a.dset"),
        p(dir.path(), "e.csv"),
        p(dir.path(), "g.pairs"),
        p(dir.path(), "x.dset"),
    );
    ok(&["gen", "--alg", "C", "--m", "5", "--kind", "circle", "--out", &a]);
    ok(&["expand", "--in", &a, "--s", "1", "--c", "1", "--out", &e]);
    let text = std::fs::read_to_string(&e).unwrap();
    assert_eq!(text.lines().count(), 4);
    ok(&["counterexample", "--which", "1", "--m", "4", "--out", &g, &x]);
    let rep = json_body(&ok(&["fibres", "--g", &g, "--x", &x, "--c1", "0.125", "--rho-exp", "2"]));
    assert_eq!(rep["rows"].as_array().unwrap().len(), 18);
    let r = dlab(&["expand", "--in", &a, "--s", "2", "--out", &e]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn uniformize_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    let (a, u) = (p(dir.path(), "a.dset"), p(dir.path(), "u.dset"));
    ok(&["gen", "--alg", "Qp", "--p", "3", "--m", "5", "--s", "0.5", "--seed", "4", "--out", &a]);
    ok(&["uniformize", "--in", &a, "--t", "2", "--out", &u]);
    let uset = read_dset(Path::new(&u)).unwrap().data;
    assert!(uset.uniformity_ratio(2) <= 3.0);
    let nc = json_body(&ok(&["verify-nc", "--in", &a, "--s", "0.5"]));
    assert_eq!(nc["pass"], true);
}
