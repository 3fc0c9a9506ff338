use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use flagcert::certificate::{export_residual, format_certificate, infer_types, load_certificate, verify};
use flagcert::density::{induced_density, t0};
use flagcert::graph::{models, parse_graph, MAX_MODEL_ORDER};
use flagcert::{PsdClass, SmallGraph, VerificationReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Console output that tolerates a closed pipe (`flagcert ... | head`).
macro_rules! say_raw {
    ($($arg:tt)*) => {{
        let _ = std::io::stdout().write_all(format!($($arg)*).as_bytes());
    }};
}

macro_rules! say {
    ($($arg:tt)*) => {{
        say_raw!("{}\n", format!($($arg)*));
    }};
}

const PRNG_NOTE: &str = "Random numbers come from ChaCha8 (rand_chacha::ChaCha8Rng) seeded with \
seed_from_u64(--seed), so runs are reproducible across platforms.";

/// Exact verifier and toolkit for flag-algebra commonality certificates.
#[derive(Parser, Debug)]
#[command(name = "flagcert", version, after_help = PRNG_NOTE)]
struct Cli {
    /// Seed for the Monte-Carlo generator.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Where to write the command's file output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a certificate exactly; --output writes a JSON report.
    Verify { certificate: PathBuf },
    /// Count graphs on N vertices up to isomorphism.
    Enumerate {
        n: usize,
        /// Also print each model's canonical edge list.
        #[arg(long)]
        list: bool,
    },
    /// Exact density of the graph H in the graph G.
    Density {
        pattern: PathBuf,
        host: PathBuf,
        #[arg(long, value_enum, default_value_t = DensityMode::Injective)]
        mode: DensityMode,
    },
    /// Monte-Carlo estimate of t0(W5;G) + t0(W5;G*) for one G(n, 1/2).
    #[command(after_help = PRNG_NOTE)]
    CommonEstimate {
        #[arg(long, default_value_t = 40)]
        n: usize,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        /// Use this graph instead of sampling G(n, 1/2).
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    /// Recover placeholder type edge sets; --output writes the first resolved certificate.
    InferTypes { template: PathBuf },
    /// Write the per-model residual table (to --output, or stdout).
    Export { certificate: PathBuf },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum DensityMode {
    Injective,
    Induced,
}

/// An input or usage problem (exit 2); verification failures are not errors.
struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, InputError> {
    fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn write_output(path: &Path, contents: &[u8]) -> Result<(), InputError> {
    fs::write(path, contents).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn read_graph(path: &Path) -> Result<SmallGraph, InputError> {
    parse_graph(&read(path)?).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn display_edges(g: &SmallGraph) -> String {
    let s = g.edge_list_string();
    if s.is_empty() {
        "(no edges)".into()
    } else {
        s
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(InputError(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

/// `Ok(success)`, where `false` means a verification failure.
fn run(cli: &Cli) -> Result<bool, InputError> {
    let output = cli.output.as_deref();
    match &cli.command {
        Command::Verify { certificate } => cmd_verify(certificate, output),
        Command::Enumerate { n, list } => cmd_enumerate(*n, *list, output),
        Command::Density { pattern, host, mode } => cmd_density(pattern, host, *mode, output),
        Command::CommonEstimate { n, samples, graph } => {
            cmd_common_estimate(*n, *samples, graph.as_deref(), cli.seed, output)
        }
        Command::InferTypes { template } => cmd_infer_types(template, output),
        Command::Export { certificate } => cmd_export(certificate, output),
    }
}

fn emit(text: &str, output: Option<&Path>) -> Result<(), InputError> {
    match output {
        Some(path) => write_output(path, text.as_bytes()),
        None => {
            say_raw!("{text}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct MatrixJson {
    name: String,
    order: usize,
    class: &'static str,
}

#[derive(Serialize)]
struct RowJson {
    model: String,
    lhs: String,
    rhs: String,
    difference: String,
}

#[derive(Serialize)]
struct VerifyJson {
    verdict: &'static str,
    level: usize,
    models: usize,
    nonzero_rows: usize,
    matrices: Vec<MatrixJson>,
    first_nonzero_row: Option<RowJson>,
}

fn class_name(c: PsdClass) -> &'static str {
    match c {
        PsdClass::PositiveDefinite => "positive definite",
        PsdClass::PositiveSemidefinite => "positive semidefinite",
        PsdClass::IndefiniteOrNegative => "not positive semidefinite",
    }
}

fn verify_summary(report: &VerificationReport, orders: &[usize]) -> (String, VerifyJson) {
    let rows = report.rows();
    let nonzero: Vec<_> = rows.iter().filter(|r| r.difference != flagcert::rational::integer(0)).collect();
    let mut text = String::new();
    for (m, order) in report.matrices.iter().zip(orders) {
        text += &format!("{:<5} order {:>2}  {}\n", m.name, order, class_name(m.class));
    }
    let total = report.matrices.len();
    let pd = report.matrices.iter().filter(|m| m.class.is_pd()).count();
    let verdict = if report.passed() { "PASS" } else { "FAIL" };
    let identity = if report.identity_holds() {
        format!("identity holds over {} models", rows.len())
    } else {
        format!("identity fails on {} of {} models", nonzero.len(), rows.len())
    };
    let matrices = if pd == total || !report.all_psd() {
        format!("{pd}/{total} matrices positive definite")
    } else {
        format!("{pd}/{total} matrices positive definite, all positive semidefinite")
    };
    text += &format!("{verdict}: {identity}; {matrices}\n");
    if let Some(first) = nonzero.first() {
        text += &format!(
            "first nonzero row: {}  lhs {}  rhs {}  difference {}\n",
            display_edges(&first.graph),
            first.lhs,
            first.rhs,
            first.difference
        );
    }
    let json = VerifyJson {
        verdict,
        level: report.level,
        models: rows.len(),
        nonzero_rows: nonzero.len(),
        matrices: report
            .matrices
            .iter()
            .zip(orders)
            .map(|(m, &order)| MatrixJson { name: m.name.clone(), order, class: class_name(m.class) })
            .collect(),
        first_nonzero_row: nonzero.first().map(|r| RowJson {
            model: r.graph.edge_list_string(),
            lhs: r.lhs.to_string(),
            rhs: r.rhs.to_string(),
            difference: r.difference.to_string(),
        }),
    };
    (text, json)
}

fn cmd_verify(path: &Path, output: Option<&Path>) -> Result<bool, InputError> {
    let cert = load_certificate(&read(path)?).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    let report = verify(&cert)?;
    let orders: Vec<usize> = cert.matrices.iter().map(|m| m.order()).collect();
    let (text, json) = verify_summary(&report, &orders);
    say_raw!("{text}");
    if let Some(out) = output {
        let mut body = serde_json::to_string_pretty(&json)?;
        body.push('\n');
        write_output(out, body.as_bytes())?;
    }
    Ok(report.passed())
}

fn cmd_enumerate(n: usize, list: bool, output: Option<&Path>) -> Result<bool, InputError> {
    if n == 0 || n > MAX_MODEL_ORDER {
        return Err(InputError(format!("n must be in 1..={MAX_MODEL_ORDER}")));
    }
    let table = models(n)?;
    let mut text = format!("{}\n", table.len());
    if list {
        for g in table.models() {
            text += &format!("{}\n", display_edges(g));
        }
    }
    emit(&text, output)?;
    Ok(true)
}

fn cmd_density(pattern: &Path, host: &Path, mode: DensityMode, output: Option<&Path>) -> Result<bool, InputError> {
    let h = read_graph(pattern)?;
    let g = read_graph(host)?;
    let value = match mode {
        DensityMode::Injective => t0(&h, &g)?,
        DensityMode::Induced => induced_density(&h, &g)?,
    };
    emit(&format!("{value}\n"), output)?;
    Ok(true)
}

const MAX_SAMPLED_ORDER: usize = 4096;

/// Dense adjacency for hosts larger than [`SmallGraph`] allows.
struct Adjacency {
    n: usize,
    bits: Vec<bool>,
}

impl Adjacency {
    /// Calls `edge(u, v)` once per pair `u < v`, in lexicographic order.
    fn from_fn(n: usize, mut edge: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = vec![false; n * n];
        for u in 0..n {
            for v in u + 1..n {
                let e = edge(u, v);
                bits[u * n + v] = e;
                bits[v * n + u] = e;
            }
        }
        Adjacency { n, bits }
    }

    fn has_edge(&self, u: usize, v: usize) -> bool {
        self.bits[u * self.n + v]
    }
}

#[derive(Serialize)]
struct EstimateJson {
    n: usize,
    samples: u64,
    seed: u64,
    estimate: f64,
    standard_error: f64,
    reference: f64,
    z_score: f64,
    trusted: bool,
}

fn cmd_common_estimate(
    n: usize,
    samples: u64,
    graph: Option<&Path>,
    seed: u64,
    output: Option<&Path>,
) -> Result<bool, InputError> {
    if samples == 0 {
        return Err(InputError("--samples must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let host = match graph {
        Some(path) => {
            let g = read_graph(path)?;
            let n = g.vertex_count();
            Adjacency::from_fn(n, |u, v| g.has_edge(u, v))
        }
        None => {
            if !(6..=MAX_SAMPLED_ORDER).contains(&n) {
                return Err(InputError(format!("--n must be in 6..={MAX_SAMPLED_ORDER}")));
            }
            // Pairs in lexicographic order, one fair coin each.
            Adjacency::from_fn(n, |_, _| rng.gen_bool(0.5))
        }
    };
    let n = host.n;
    if n < 6 {
        return Err(InputError(format!("the graph has {n} vertices; at least 6 are needed")));
    }
    let wheel = SmallGraph::wheel(5);
    let wheel_edges: Vec<(usize, usize)> = wheel.edges().collect();
    let mut vertices: Vec<usize> = (0..n).collect();
    let mut hits = 0u64;
    for _ in 0..samples {
        // Partial Fisher-Yates: the first six slots form a uniform injection.
        for i in 0..6 {
            let j = rng.gen_range(i..n);
            vertices.swap(i, j);
        }
        let present = wheel_edges.iter().filter(|&&(a, b)| host.has_edge(vertices[a], vertices[b])).count();
        if present == wheel_edges.len() || present == 0 {
            hits += 1;
        }
    }
    let mean = hits as f64 / samples as f64;
    let se = if samples > 1 { (mean * (1.0 - mean) / (samples - 1) as f64).sqrt() } else { 0.0 };
    let reference = 2f64.powi(-9);
    let z = if se > 0.0 { (mean - reference) / se } else { f64::NAN };
    let report = EstimateJson { n, samples, seed, estimate: mean, standard_error: se, reference, z_score: z, trusted: false };
    say!("estimate of t0(W5;G) + t0(W5;G*): {mean:.9}");
    say!("standard error: {se:.9}");
    say!("reference 2^-9: {reference}");
    say!("z-score: {z:.3}");
    say!("note: statistical Monte-Carlo output (ChaCha8, seed {seed}), not a proof");
    if let Some(out) = output {
        let mut body = serde_json::to_string_pretty(&report)?;
        body.push('\n');
        write_output(out, body.as_bytes())?;
    }
    Ok(true)
}

fn cmd_infer_types(path: &Path, output: Option<&Path>) -> Result<bool, InputError> {
    let template = load_certificate(&read(path)?).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    let report = infer_types(&template)?;
    for (name, pool) in &report.pools {
        let shown: Vec<String> = pool.iter().map(display_edges).collect();
        say!("{name}: {} candidates: {}", pool.len(), shown.join(" | "));
    }
    say!("{} PASS assignments", report.assignments.len());
    for (i, assignment) in report.assignments.iter().enumerate() {
        say!("assignment {}:", i + 1);
        for (slot, g) in template.types.iter().zip(assignment) {
            say!("  {}: {}", slot.name, display_edges(g));
        }
    }
    if let (Some(out), Some(first)) = (output, report.assignments.first()) {
        write_output(out, format_certificate(&template.with_types(first)).as_bytes())?;
    }
    Ok(!report.assignments.is_empty())
}

fn cmd_export(path: &Path, output: Option<&Path>) -> Result<bool, InputError> {
    let cert = load_certificate(&read(path)?).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    let report = verify(&cert)?;
    let mut table = Vec::new();
    export_residual(&report, &mut table)?;
    match output {
        Some(out) => write_output(out, &table)?,
        None => {
            let _ = std::io::stdout().write_all(&table);
        }
    }
    Ok(true)
}
