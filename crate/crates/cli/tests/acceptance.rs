//! Acceptance run: one line per criterion, non-zero exit if a gating
//! criterion fails. Criterion 7 is statistical and reported without gating.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use flagcert::algebra::{evaluate, star};
use flagcert::certificate::{infer_types, load_certificate, verify};
use flagcert::density::{hat, induced_density, t0};
use flagcert::flag::subset_orbits;
use flagcert::graph::models;
use flagcert::matrix::psd_classify;
use flagcert::rational::ratio;
use flagcert::{Certificate, FlagType, Rational, SmallGraph};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn repo(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn run(args: &[&str]) -> (Option<i32>, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_flagcert")).args(args).output().expect("binary runs");
    (o.status.code(), String::from_utf8_lossy(&o.stdout).into_owned())
}

fn load(rel: &str) -> Certificate {
    load_certificate(&std::fs::read_to_string(repo(rel)).unwrap()).unwrap()
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> SmallGraph {
    let mut g = SmallGraph::empty(n);
    for u in 0..n {
        for v in u + 1..n {
            g.set_edge(u, v, rng.gen_bool(p));
        }
    }
    g
}

/// Homomorphism hits and number of injections, by trying every injection.
fn brute_injective(h: &SmallGraph, g: &SmallGraph, image: &mut Vec<usize>) -> (u128, u128) {
    if image.len() == h.vertex_count() {
        return (u128::from(h.edges().all(|(a, b)| g.has_edge(image[a], image[b]))), 1);
    }
    let (mut hits, mut total) = (0, 0);
    for v in 0..g.vertex_count() {
        if !image.contains(&v) {
            image.push(v);
            let (a, b) = brute_injective(h, g, image);
            image.pop();
            hits += a;
            total += b;
        }
    }
    (hits, total)
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn main_theorem() -> Outcome {
    let cert = repo("certificates/w5.cert");
    let start = Instant::now();
    let (code, out) = run(&["verify", cert.to_str().unwrap()]);
    let elapsed = start.elapsed();
    let expected = "PASS: identity holds over 156 models; 7/7 matrices positive definite";
    Outcome {
        pass: code == Some(0) && out.contains(expected) && elapsed < Duration::from_secs(300),
        detail: format!("exit {code:?}, {:.2}s, {}", elapsed.as_secs_f64(), out.lines().last().unwrap_or("")),
    }
}

fn enumeration_counts() -> Outcome {
    let start = Instant::now();
    let counts: Vec<String> = (1..=6).map(|n| run(&["enumerate", &n.to_string()]).1.trim().to_string()).collect();
    let elapsed = start.elapsed();
    Outcome {
        pass: counts == ["1", "2", "4", "11", "34", "156"] && elapsed < Duration::from_secs(10),
        detail: format!("{} in {:.2}s", counts.join(","), elapsed.as_secs_f64()),
    }
}

fn chain_rule() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut good = 0;
    for _ in 0..50 {
        let g_order = rng.gen_range(1..=9);
        let level = rng.gen_range(1..=g_order.min(8));
        let h_order = rng.gen_range(1..=level);
        let h = random_graph(&mut rng, h_order, 0.6);
        let g = random_graph(&mut rng, g_order, 0.5);
        let sum: Rational = models(level)
            .unwrap()
            .models()
            .iter()
            .map(|f| t0(&h, f).unwrap() * induced_density(f, &g).unwrap())
            .sum();
        let (hits, total) = brute_injective(&h, &g, &mut Vec::new());
        good += usize::from(sum == ratio(hits, total));
    }
    Outcome { pass: good == 50, detail: format!("{good}/50 exact") }
}

fn evaluation_oracle() -> Outcome {
    let w5 = SmallGraph::wheel(5);
    let h = hat(&w5, models(6).unwrap()).unwrap();
    let lhs = h.checked_add(&star(&h).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut good = 0;
    for _ in 0..100 {
        let n = rng.gen_range(6..=9);
        let g = random_graph(&mut rng, n, 0.5);
        let (a, total) = brute_injective(&w5, &g, &mut Vec::new());
        let (b, _) = brute_injective(&w5, &g.complement(), &mut Vec::new());
        good += usize::from(evaluate(&lhs, &g).unwrap() == ratio(a + b, total));
    }
    Outcome { pass: good == 100, detail: format!("{good}/100 exact") }
}

fn mutation_sensitivity() -> Outcome {
    let cert = load("certificates/w5.cert");
    let (mut flips, mut flips_failed) = (0, 0);
    for (mi, m) in cert.matrices.iter().enumerate() {
        for d in 0..m.order() {
            let mut mutated = cert.clone();
            let entry = &mut mutated.matrices[mi].integers[d][d];
            *entry = -entry.clone();
            flips += 1;
            flips_failed += usize::from(!psd_classify(&mutated.matrices[mi].matrix()).unwrap().is_psd());
        }
    }
    // Uniform over (matrix, row, column), applied symmetrically so the
    // mutated certificate still loads.
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut rejected = 0;
    let mut accepted = Vec::new();
    for _ in 0..20 {
        let mut mutated = cert.clone();
        let mi = rng.gen_range(0..mutated.matrices.len());
        let order = mutated.matrices[mi].order();
        let (r, c) = (rng.gen_range(0..order), rng.gen_range(0..order));
        let delta = BigInt::from(rng.gen_range(1..=1000i64) * if rng.gen_bool(0.5) { 1 } else { -1 });
        mutated.matrices[mi].perturb(r, c, &delta);
        if verify(&mutated).unwrap().passed() {
            accepted.push(format!("{}({},{})", mutated.matrices[mi].name, r + 1, c + 1));
        } else {
            rejected += 1;
        }
    }
    let mut detail = format!("{flips_failed}/{flips} sign flips not PSD, {rejected}/20 perturbations FAIL");
    if !accepted.is_empty() {
        detail += &format!("; still valid after perturbing {}", accepted.join(", "));
    }
    Outcome { pass: flips_failed == flips && rejected == 20, detail }
}

fn type_reconstruction() -> Outcome {
    let template = load("certificates/w5-template.cert");
    let start = Instant::now();
    let report = infer_types(&template).unwrap();
    let elapsed = start.elapsed();
    let sigma0_ok = report.pools[0].1 == [SmallGraph::empty(4), SmallGraph::complete(4)];
    let lengths: Vec<usize> = template.vectors.iter().filter(|v| v.name.ends_with('+')).map(|v| v.entries.len()).collect();
    let orbit_match = report.assignments.iter().any(|assignment| {
        template.vectors.iter().filter(|v| v.name.ends_with('+')).all(|v| {
            let slot = template.types.iter().position(|t| t.name == v.type_name).unwrap();
            let orbits = subset_orbits(&FlagType::new(assignment[slot])).unwrap();
            orbits.nonempty_representatives().len() == v.entries.len()
        })
    });
    let (code, _) = run(&["infer-types", repo("certificates/w5-template.cert").to_str().unwrap()]);
    Outcome {
        pass: !report.assignments.is_empty()
            && sigma0_ok
            && lengths == [4, 8, 11, 7, 5]
            && orbit_match
            && code == Some(0)
            && elapsed < Duration::from_secs(7200),
        detail: format!(
            "{} assignment(s), sigma0 pool {{E4, K4}}: {sigma0_ok}, lengths {lengths:?}, {:.2}s",
            report.assignments.len(),
            elapsed.as_secs_f64()
        ),
    }
}

fn commonality_sanity() -> Outcome {
    let (code, out) = run(&["common-estimate", "--n", "40", "--samples", "1000000", "--seed", "0"]);
    let field = |label: &str| -> Option<f64> {
        out.lines().find(|l| l.starts_with(label))?.rsplit(' ').next()?.parse().ok()
    };
    match (code, field("estimate"), field("standard error")) {
        (Some(0), Some(estimate), Some(se)) => {
            let z = (estimate - 0.001953125) / se;
            Outcome { pass: z.abs() <= 5.0, detail: format!("estimate {estimate:.9}, se {se:.9}, z {z:.2}") }
        }
        _ => Outcome { pass: false, detail: format!("exit {code:?}: {out}") },
    }
}

fn main() {
    type Check = fn() -> Outcome;
    let criteria: [(&str, bool, Check); 7] = [
        ("main theorem certificate", true, main_theorem),
        ("enumeration counts", true, enumeration_counts),
        ("chain rule", true, chain_rule),
        ("evaluation oracle", true, evaluation_oracle),
        ("PSD gate and mutation sensitivity", true, mutation_sensitivity),
        ("type reconstruction", true, type_reconstruction),
        ("commonality sanity (statistical)", false, commonality_sanity),
    ];
    let mut gating_failures = 0;
    for (i, (name, gating, check)) in criteria.iter().enumerate() {
        let outcome = check();
        let verdict = match (outcome.pass, gating) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "FAIL (non-gating)",
        };
        println!("criterion {}: {verdict} {name}: {}", i + 1, outcome.detail);
        if !outcome.pass && *gating {
            gating_failures += 1;
        }
    }
    if gating_failures > 0 {
        println!("{gating_failures} gating criteria failed");
        std::process::exit(1);
    }
}
