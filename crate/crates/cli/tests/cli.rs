use std::path::PathBuf;
use std::process::{Command, Output};

fn repo(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn flagcert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flagcert")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_graph(dir: &tempfile::TempDir, name: &str, n: usize, edges: &[(usize, usize)]) -> String {
    let mut text = format!("# {name}\n{n}\n");
    for (u, v) in edges {
        text += &format!("{u} {v}\n");
    }
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn wheel_edges() -> Vec<(usize, usize)> {
    let mut e = vec![(1, 2), (2, 3), (3, 4), (4, 5), (1, 5)];
    e.extend((1..=5).map(|i| (i, 6)));
    e
}

fn complete_edges(n: usize) -> Vec<(usize, usize)> {
    (1..=n).flat_map(|u| (u + 1..=n).map(move |v| (u, v))).collect()
}

#[test]
fn verify_shipped_certificate() {
    let cert = repo("certificates/w5.cert");
    let o = flagcert(&["verify", cert.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("PASS: identity holds over 156 models; 7/7 matrices positive definite"));
}

#[test]
fn verify_writes_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let cert = repo("certificates/w5.cert");
    let o = flagcert(&["verify", cert.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(json["verdict"], "PASS");
    assert_eq!(json["models"], 156);
    assert_eq!(json["nonzero_rows"], 0);
    assert_eq!(json["matrices"].as_array().unwrap().len(), 7);
}

#[test]
fn verify_mutated_certificate_fails_with_a_row() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(repo("certificates/w5.cert")).unwrap();
    let mutated = text.replacen("104133330 ", "104133331 ", 1);
    assert_ne!(text, mutated);
    let path = dir.path().join("mutated.cert");
    std::fs::write(&path, mutated).unwrap();
    let o = flagcert(&["verify", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL: identity fails on"));
    assert!(stdout(&o).contains("first nonzero row:"));
}

#[test]
fn verify_input_errors_exit_2() {
    assert_eq!(flagcert(&["verify", "/nonexistent/missing.cert"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cert");
    std::fs::write(&path, "[type s]\nk = 4\nedges = 1-9\n").unwrap();
    let o = flagcert(&["verify", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    let template = repo("certificates/w5-template.cert");
    assert_eq!(flagcert(&["verify", template.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(flagcert(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(flagcert(&["enumerate", "6", "--bogus"]).status.code(), Some(2));
    assert_eq!(flagcert(&["enumerate", "0"]).status.code(), Some(2));
    assert_eq!(flagcert(&["enumerate", "9"]).status.code(), Some(2));
    assert_eq!(flagcert(&["--jobs", "0", "enumerate", "3"]).status.code(), Some(2));
}

#[test]
fn enumerate_counts_and_listing() {
    for (n, count) in [(1, "1"), (2, "2"), (3, "4"), (4, "11"), (5, "34"), (6, "156")] {
        let o = flagcert(&["enumerate", &n.to_string()]);
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(stdout(&o).trim(), count);
    }
    let o = flagcert(&["enumerate", "3", "--list"]);
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[0], "4");
    assert!(lines.contains(&"(no edges)".to_string()));
}

#[test]
fn density_examples() {
    let dir = tempfile::tempdir().unwrap();
    let w5 = write_graph(&dir, "w5", 6, &wheel_edges());
    let k6 = write_graph(&dir, "k6", 6, &complete_edges(6));
    let k2 = write_graph(&dir, "k2", 2, &[(1, 2)]);
    let p3 = write_graph(&dir, "p3", 3, &[(1, 2), (2, 3)]);
    assert_eq!(stdout(&flagcert(&["density", &w5, &k6])).trim(), "1");
    assert_eq!(stdout(&flagcert(&["density", &w5, &w5, "--mode", "injective"])).trim(), "1/72");
    assert_eq!(stdout(&flagcert(&["density", &k2, &p3, "--mode", "induced"])).trim(), "2/3");
    assert_eq!(flagcert(&["density", &k6, &k2]).status.code(), Some(2));
    let bad = dir.path().join("loop");
    std::fs::write(&bad, "3\n1 1\n").unwrap();
    assert_eq!(flagcert(&["density", bad.to_str().unwrap(), &k6]).status.code(), Some(2));
}

#[test]
fn common_estimate_on_a_forced_graph() {
    let dir = tempfile::tempdir().unwrap();
    let k6 = write_graph(&dir, "k6", 6, &complete_edges(6));
    let o = flagcert(&["common-estimate", "--graph", &k6, "--samples", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("t0(W5;G) + t0(W5;G*): 1.000000000"));
    assert!(stdout(&o).contains("not a proof"));
    assert_eq!(flagcert(&["common-estimate", "--samples", "0"]).status.code(), Some(2));
    assert_eq!(flagcert(&["common-estimate", "--n", "5"]).status.code(), Some(2));
}

#[test]
fn common_estimate_is_deterministic() {
    let args = ["common-estimate", "--n", "30", "--samples", "20000", "--seed", "9"];
    let a = flagcert(&args);
    let mut with_jobs = args.to_vec();
    with_jobs.extend(["--jobs", "3"]);
    let b = flagcert(&with_jobs);
    assert_eq!(a.stdout, b.stdout);
    let c = flagcert(&["common-estimate", "--n", "30", "--samples", "20000", "--seed", "10"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn estimator_agrees_with_exact_density() {
    let dir = tempfile::tempdir().unwrap();
    // A fixed 12-vertex graph: i ~ j when i + j is prime or |i - j| = 1.
    let prime = |x: usize| x > 1 && (2..x).all(|d| !x.is_multiple_of(d));
    let edges: Vec<(usize, usize)> =
        complete_edges(12).into_iter().filter(|&(u, v)| prime(u + v) || v - u == 1).collect();
    let co: Vec<(usize, usize)> = complete_edges(12).into_iter().filter(|e| !edges.contains(e)).collect();
    let g = write_graph(&dir, "g", 12, &edges);
    let gc = write_graph(&dir, "gc", 12, &co);
    let w5 = write_graph(&dir, "w5", 6, &wheel_edges());
    let exact = |h: &str, host: &str| -> f64 {
        let s = stdout(&flagcert(&["density", h, host]));
        let (a, b) = s.trim().split_once('/').unwrap_or((s.trim(), "1"));
        a.parse::<f64>().unwrap() / b.parse::<f64>().unwrap()
    };
    let truth = exact(&w5, &g) + exact(&w5, &gc);
    let o = flagcert(&["common-estimate", "--graph", &g, "--samples", "2000000"]);
    let text = stdout(&o);
    let field = |label: &str| -> f64 {
        let line = text.lines().find(|l| l.starts_with(label)).unwrap();
        line.rsplit(' ').next().unwrap().parse().unwrap()
    };
    let (estimate, se) = (field("estimate"), field("standard error"));
    assert!((estimate - truth).abs() <= 5.0 * se, "{estimate} vs {truth} (se {se})");
}

#[test]
fn infer_types_examples() {
    let dir = tempfile::tempdir().unwrap();
    let template = repo("certificates/w5-template.cert");
    let out = dir.path().join("resolved.cert");
    let o = flagcert(&["infer-types", template.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("1 PASS assignments"));
    assert!(stdout(&o).contains("sigma0: 2 candidates: (no edges) | 1-2, 1-3, 1-4, 2-3, 2-4, 3-4"));
    assert_eq!(flagcert(&["verify", out.to_str().unwrap()]).status.code(), Some(0));

    // Zero out M3+: the identity can no longer hold for any types.
    let text = std::fs::read_to_string(&template).unwrap();
    let start = text.find("[matrix M3+]").unwrap();
    let end = text.find("[matrix M4+]").unwrap();
    let block: Vec<&str> = text[start..end].lines().collect();
    let mut zeroed = block[..3].join("\n") + "\n";
    for row in block[3..].iter().filter(|l| !l.trim().is_empty()) {
        zeroed += &vec!["0"; row.split_whitespace().count()].join(" ");
        zeroed.push('\n');
    }
    let zero_path = dir.path().join("zero.cert");
    std::fs::write(&zero_path, format!("{}{zeroed}\n{}", &text[..start], &text[end..])).unwrap();
    let o = flagcert(&["infer-types", zero_path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("0 PASS assignments"));

    let bad = dir.path().join("bad.cert");
    std::fs::write(&bad, "[vector g0+]\nentries = f{1}\n").unwrap();
    assert_eq!(flagcert(&["infer-types", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn export_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("table.tsv");
    let cert = repo("certificates/w5.cert");
    let o = flagcert(&["export", cert.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let table = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<Vec<&str>> = table.lines().filter(|l| !l.starts_with('#')).map(|l| l.split('\t').collect()).collect();
    assert_eq!(rows.len(), 156);
    assert!(rows.iter().all(|r| r.len() == 4 && r[3] == "0" && r[1] == r[2]));

    // Identical bytes on stdout, whatever the thread count.
    let a = flagcert(&["export", cert.to_str().unwrap()]);
    let b = flagcert(&["--jobs", "1", "export", cert.to_str().unwrap()]);
    assert_eq!(a.stdout, table.as_bytes());
    assert_eq!(a.stdout, b.stdout);

    assert_eq!(
        flagcert(&["export", cert.to_str().unwrap(), "--output", "/nonexistent/dir/t.tsv"]).status.code(),
        Some(2)
    );
}

#[test]
fn export_zeroed_certificate_shows_the_bound_on_the_six_cycle() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(repo("certificates/w5.cert")).unwrap();
    let mut zeroed = String::new();
    let mut in_rows = false;
    for line in text.lines() {
        if line.starts_with("rows =") {
            in_rows = true;
            zeroed += line;
        } else if in_rows && !line.trim().is_empty() && !line.starts_with('[') {
            zeroed += &vec!["0"; line.split_whitespace().count()].join(" ");
        } else {
            in_rows = false;
            zeroed += line;
        }
        zeroed.push('\n');
    }
    let path = dir.path().join("zero.cert");
    std::fs::write(&path, zeroed).unwrap();
    let table = stdout(&flagcert(&["export", path.to_str().unwrap()]));
    let c6 = table.lines().find(|l| l.split('\t').next() == Some(six_cycle_edges().as_str())).unwrap();
    assert_eq!(c6.split('\t').nth(3), Some("-1/512"));
}

/// The six-cycle as the exporter prints it: the canonical representative.
fn six_cycle_edges() -> String {
    flagcert::graph::canonical_key(&flagcert::SmallGraph::cycle(6)).to_graph().edge_list_string()
}
