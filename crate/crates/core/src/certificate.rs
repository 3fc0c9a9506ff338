//! Commonality certificates: the text format, the exact verifier and the
//! reconstruction of unknown type edge sets.
//!
//! A certificate claims
//!
//! ```text
//! Ĥ + Ĥ* = bound + R + R*,   R = Σ_i ⟦ gᵢᵀ Mᵢ gᵢ ⟧_{σᵢ}
//! ```
//!
//! at level `|V(H)|`, with every `Mᵢ` positive semidefinite. Verification
//! compares all coefficients exactly and decides semidefiniteness by
//! rational elimination.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::algebra::{average, constant, lift, quadratic_form_value, star, AlgebraElement, AlgebraError, QuadraticFormSpec};
use crate::density::hat;
use crate::flag::{difference_element, f_element, subset_orbits, FlagType, LabelSet, MAX_FLAG_SIZE};
use crate::graph::{models, parse_edge_list, CanonicalKey, SmallGraph};
use crate::matrix::{psd_classify, PsdClass, RationalMatrix};
use crate::rational::{parse_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CertificateError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("matrix {matrix} has order {order} but vector {vector} lists {entries} entries")]
    Dimension { matrix: String, vector: String, order: usize, entries: usize },
    #[error("matrix {matrix} is not symmetric at ({row}, {col})")]
    NotSymmetric { matrix: String, row: usize, col: usize },
    #[error("{0}")]
    Structure(String),
    #[error("type {0} has no edge set")]
    UnresolvedType(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

fn structure(message: impl Into<String>) -> CertificateError {
    CertificateError::Structure(message.into())
}

/// A type slot; `graph` is `None` for a placeholder (`edges = ?`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeSlot {
    pub name: String,
    pub size: usize,
    pub graph: Option<SmallGraph>,
}

impl TypeSlot {
    pub fn flag_type(&self) -> Result<FlagType, CertificateError> {
        self.graph.map(FlagType::new).ok_or_else(|| CertificateError::UnresolvedType(self.name.clone()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryDescriptor {
    /// `f{V}`: the centered element `f^σ_V`.
    Centered(LabelSet),
    /// `F{V}-F{W}`.
    Difference(LabelSet, LabelSet),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VectorSpec {
    pub name: String,
    pub type_name: String,
    pub entries: Vec<EntryDescriptor>,
}

/// `scale × integers`, the integers exactly as printed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixSpec {
    pub name: String,
    pub scale: Rational,
    pub integers: Vec<Vec<BigInt>>,
}

impl MatrixSpec {
    pub fn order(&self) -> usize {
        self.integers.len()
    }

    pub fn matrix(&self) -> RationalMatrix {
        RationalMatrix::from_fn(self.order(), |i, j| Rational::from_integer(self.integers[i][j].clone()) * &self.scale)
    }

    /// Adds `delta` at `(row, col)` and, off the diagonal, at `(col, row)`.
    pub fn perturb(&mut self, row: usize, col: usize, delta: &BigInt) {
        self.integers[row][col] += delta;
        if row != col {
            self.integers[col][row] += delta;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub types: Vec<TypeSlot>,
    pub vectors: Vec<VectorSpec>,
    pub matrices: Vec<MatrixSpec>,
    pub target: SmallGraph,
    pub bound: Rational,
}

impl Certificate {
    /// The level all identity terms live on.
    pub fn level(&self) -> usize {
        self.target.vertex_count()
    }

    pub fn slot(&self, name: &str) -> Option<&TypeSlot> {
        self.types.iter().find(|t| t.name == name)
    }

    /// The matrix paired with vector `gX` is `MX`.
    pub fn matrix_for(&self, vector: &VectorSpec) -> Option<&MatrixSpec> {
        let suffix = &vector.name[1..];
        self.matrices.iter().find(|m| &m.name[1..] == suffix)
    }

    pub fn is_resolved(&self) -> bool {
        self.types.iter().all(|t| t.graph.is_some())
    }

    /// A copy with the slots' edge sets replaced, in slot order.
    pub fn with_types(&self, graphs: &[SmallGraph]) -> Self {
        let mut out = self.clone();
        for (slot, g) in out.types.iter_mut().zip(graphs) {
            slot.graph = Some(*g);
        }
        out
    }

    /// Structural checks shared by the parser and programmatic edits.
    pub fn validate(&self) -> Result<(), CertificateError> {
        let level = self.level();
        if level == 0 || level > MAX_FLAG_SIZE {
            return Err(structure(format!("target has {level} vertices; supported levels are 1..={MAX_FLAG_SIZE}")));
        }
        if !self.bound.is_positive() && !self.bound.is_zero() {
            return Err(structure("bound must be nonnegative"));
        }
        for (i, t) in self.types.iter().enumerate() {
            if self.types[..i].iter().any(|u| u.name == t.name) {
                return Err(structure(format!("duplicate type {}", t.name)));
            }
            if t.size + 2 > level {
                return Err(structure(format!(
                    "type {} of size {} needs level at least {}, target has {level} vertices",
                    t.name,
                    t.size,
                    t.size + 2
                )));
            }
            if let Some(g) = t.graph {
                if g.vertex_count() != t.size {
                    return Err(structure(format!("type {} edge set does not match k = {}", t.name, t.size)));
                }
            }
        }
        for (i, v) in self.vectors.iter().enumerate() {
            if self.vectors[..i].iter().any(|u| u.name == v.name) {
                return Err(structure(format!("duplicate vector {}", v.name)));
            }
            let slot = self
                .slot(&v.type_name)
                .ok_or_else(|| structure(format!("vector {} refers to unknown type {}", v.name, v.type_name)))?;
            for entry in &v.entries {
                let sets = match *entry {
                    EntryDescriptor::Centered(s) => {
                        if s.is_empty() {
                            return Err(structure(format!("vector {}: f{{}} is not allowed", v.name)));
                        }
                        vec![s]
                    }
                    EntryDescriptor::Difference(a, b) => vec![a, b],
                };
                if sets.iter().any(|s| !s.is_subset_of(slot.size)) {
                    return Err(structure(format!("vector {}: subset outside [{}]", v.name, slot.size)));
                }
            }
            let m = self
                .matrix_for(v)
                .ok_or_else(|| structure(format!("vector {} has no matrix M{}", v.name, &v.name[1..])))?;
            if m.order() != v.entries.len() {
                return Err(CertificateError::Dimension {
                    matrix: m.name.clone(),
                    vector: v.name.clone(),
                    order: m.order(),
                    entries: v.entries.len(),
                });
            }
        }
        for (i, m) in self.matrices.iter().enumerate() {
            if self.matrices[..i].iter().any(|u| u.name == m.name) {
                return Err(structure(format!("duplicate matrix {}", m.name)));
            }
            if !self.vectors.iter().any(|v| v.name[1..] == m.name[1..]) {
                return Err(structure(format!("matrix {} has no vector g{}", m.name, &m.name[1..])));
            }
            if !m.scale.is_positive() {
                return Err(structure(format!("matrix {}: scale must be positive", m.name)));
            }
            for row in 0..m.order() {
                for col in row + 1..m.order() {
                    if m.integers[row][col] != m.integers[col][row] {
                        return Err(CertificateError::NotSymmetric { matrix: m.name.clone(), row: row + 1, col: col + 1 });
                    }
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Text format

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum SectionKind {
    Type,
    Vector,
    Matrix,
    Target,
}

struct Section {
    kind: SectionKind,
    name: String,
    line: usize,
    pairs: Vec<(String, String, usize)>,
    rows: Vec<(String, usize)>,
}

impl Section {
    fn get(&self, key: &str) -> Option<(&str, usize)> {
        self.pairs.iter().find(|(k, _, _)| k == key).map(|(_, v, l)| (v.as_str(), *l))
    }

    fn require(&self, key: &str) -> Result<(&str, usize), CertificateError> {
        self.get(key).ok_or_else(|| CertificateError::Parse {
            line: self.line,
            message: format!("section [{}] is missing `{key} = ...`", self.name),
        })
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> CertificateError {
    CertificateError::Parse { line, message: message.into() }
}

fn parse_set(text: &str, line: usize) -> Result<LabelSet, CertificateError> {
    let inner = text
        .trim()
        .strip_prefix('{')
        .and_then(|s| s.strip_suffix('}'))
        .ok_or_else(|| parse_err(line, format!("expected a subset in braces, found {text:?}")))?;
    let mut bits = 0u16;
    for c in inner.chars().filter(|c| !c.is_whitespace() && *c != ',') {
        let d = c.to_digit(10).filter(|&d| d >= 1).ok_or_else(|| parse_err(line, format!("bad label {c:?} in {text:?}")))?;
        if bits >> (d - 1) & 1 == 1 {
            return Err(parse_err(line, format!("repeated label {d} in {text:?}")));
        }
        bits |= 1 << (d - 1);
    }
    Ok(LabelSet::from_bits(bits))
}

fn parse_entry(text: &str, line: usize) -> Result<EntryDescriptor, CertificateError> {
    let text = text.trim();
    if let Some(rest) = text.strip_prefix('f') {
        return Ok(EntryDescriptor::Centered(parse_set(rest, line)?));
    }
    let parts: Vec<&str> = text.split('-').map(str::trim).collect();
    match parts[..] {
        [a, b] if a.starts_with('F') && b.starts_with('F') => {
            Ok(EntryDescriptor::Difference(parse_set(&a[1..], line)?, parse_set(&b[1..], line)?))
        }
        _ => Err(parse_err(line, format!("expected f{{..}} or F{{..}}-F{{..}}, found {text:?}"))),
    }
}

fn split_sections(text: &str) -> Result<Vec<Section>, CertificateError> {
    let mut sections: Vec<Section> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(header) = content.strip_prefix('[') {
            let header = header
                .strip_suffix(']')
                .ok_or_else(|| parse_err(line, format!("unterminated section header {content:?}")))?;
            let mut words = header.split_whitespace();
            let kind = match words.next() {
                Some("type") => SectionKind::Type,
                Some("vector") => SectionKind::Vector,
                Some("matrix") => SectionKind::Matrix,
                Some("target") => SectionKind::Target,
                _ => return Err(parse_err(line, format!("unknown section [{header}]"))),
            };
            let name = words.next().unwrap_or("").to_string();
            if words.next().is_some() || (name.is_empty() != (kind == SectionKind::Target)) {
                return Err(parse_err(line, format!("malformed section header [{header}]")));
            }
            let prefix = match kind {
                SectionKind::Vector => Some('g'),
                SectionKind::Matrix => Some('M'),
                _ => None,
            };
            if let Some(p) = prefix {
                if !name.starts_with(p) || name.len() < 2 {
                    return Err(parse_err(line, format!("{kind:?} names must look like {p}<suffix>, found {name:?}")));
                }
            }
            if let Some(prev) = sections.last() {
                if prev.kind > kind || (kind == SectionKind::Target && prev.kind == SectionKind::Target) {
                    return Err(parse_err(line, format!("section [{header}] is out of order")));
                }
            }
            sections.push(Section { kind, name, line, pairs: Vec::new(), rows: Vec::new() });
            continue;
        }
        let section = sections
            .last_mut()
            .ok_or_else(|| parse_err(line, "content before the first section"))?;
        if let Some((key, value)) = content.split_once('=') {
            let key = key.trim().to_string();
            if section.get(&key).is_some() {
                return Err(parse_err(line, format!("duplicate key {key:?}")));
            }
            section.pairs.push((key, value.trim().to_string(), line));
        } else if section.kind == SectionKind::Matrix {
            section.rows.push((content.to_string(), line));
        } else {
            return Err(parse_err(line, format!("expected `key = value`, found {content:?}")));
        }
    }
    Ok(sections)
}

fn check_keys(section: &Section, allowed: &[&str]) -> Result<(), CertificateError> {
    for (key, _, line) in &section.pairs {
        if !allowed.contains(&key.as_str()) {
            return Err(parse_err(*line, format!("unknown key {key:?} in [{}]", section.name)));
        }
    }
    Ok(())
}

fn parse_usize(text: &str, line: usize) -> Result<usize, CertificateError> {
    text.trim().parse().map_err(|_| parse_err(line, format!("expected a nonnegative integer, found {text:?}")))
}

/// Parses and validates a certificate.
pub fn load_certificate(text: &str) -> Result<Certificate, CertificateError> {
    let sections = split_sections(text)?;
    let mut types = Vec::new();
    let mut vectors = Vec::new();
    let mut matrices = Vec::new();
    let mut target = None;

    for s in &sections {
        match s.kind {
            SectionKind::Type => {
                check_keys(s, &["k", "edges"])?;
                let (k, k_line) = s.require("k")?;
                let size = parse_usize(k, k_line)?;
                if size > crate::flag::MAX_TYPE_SIZE {
                    return Err(parse_err(k_line, format!("type size {size} too large")));
                }
                let (edges, e_line) = s.require("edges")?;
                let graph = if edges.trim() == "?" {
                    None
                } else {
                    Some(parse_edge_list(size, edges).map_err(|e| parse_err(e_line, e.to_string()))?)
                };
                types.push(TypeSlot { name: s.name.clone(), size, graph });
            }
            SectionKind::Vector => {
                check_keys(s, &["type", "entries"])?;
                let type_name = match s.get("type") {
                    Some((t, _)) => t.to_string(),
                    None => {
                        let digits: String = s.name.chars().filter(char::is_ascii_digit).collect();
                        format!("sigma{digits}")
                    }
                };
                let (entries, line) = s.require("entries")?;
                let entries = entries
                    .split(';')
                    .map(str::trim)
                    .filter(|e| !e.is_empty())
                    .map(|e| parse_entry(e, line))
                    .collect::<Result<Vec<_>, _>>()?;
                vectors.push(VectorSpec { name: s.name.clone(), type_name, entries });
            }
            SectionKind::Matrix => {
                check_keys(s, &["scale", "rows"])?;
                let (scale, scale_line) = s.require("scale")?;
                let scale = parse_rational(scale).map_err(|e| parse_err(scale_line, e.to_string()))?;
                let (rows, rows_line) = s.require("rows")?;
                let order = parse_usize(rows, rows_line)?;
                if s.rows.len() != order {
                    return Err(parse_err(
                        rows_line,
                        format!("matrix {} declares {order} rows but lists {}", s.name, s.rows.len()),
                    ));
                }
                let mut integers = Vec::with_capacity(order);
                for (row, line) in &s.rows {
                    let values = row
                        .split_whitespace()
                        .map(|x| BigInt::from_str(x).map_err(|_| parse_err(*line, format!("bad integer {x:?}"))))
                        .collect::<Result<Vec<_>, _>>()?;
                    if values.len() != order {
                        return Err(parse_err(*line, format!("expected {order} entries, found {}", values.len())));
                    }
                    integers.push(values);
                }
                matrices.push(MatrixSpec { name: s.name.clone(), scale, integers });
            }
            SectionKind::Target => {
                check_keys(s, &["vertices", "graph", "bound"])?;
                let (graph, g_line) = s.require("graph")?;
                let n = match s.get("vertices") {
                    Some((v, line)) => parse_usize(v, line)?,
                    None => graph
                        .split(|c: char| !c.is_ascii_digit())
                        .filter_map(|d| d.parse::<usize>().ok())
                        .max()
                        .unwrap_or(0),
                };
                if n > crate::graph::MAX_VERTICES {
                    return Err(parse_err(g_line, format!("target has {n} vertices")));
                }
                let g = parse_edge_list(n, graph).map_err(|e| parse_err(g_line, e.to_string()))?;
                let (bound, b_line) = s.require("bound")?;
                let bound = parse_rational(bound).map_err(|e| parse_err(b_line, e.to_string()))?;
                target = Some((g, bound));
            }
        }
    }
    let (target, bound) = target.ok_or_else(|| parse_err(text.lines().count(), "missing [target] section"))?;
    let cert = Certificate { types, vectors, matrices, target, bound };
    cert.validate()?;
    Ok(cert)
}

fn format_entry(e: &EntryDescriptor) -> String {
    match e {
        EntryDescriptor::Centered(s) => format!("f{s}"),
        EntryDescriptor::Difference(a, b) => format!("F{a}-F{b}"),
    }
}

/// Writes a certificate in the format read by [`load_certificate`].
pub fn format_certificate(cert: &Certificate) -> String {
    let mut out = String::new();
    for t in &cert.types {
        let edges = t.graph.map_or("?".to_string(), |g| g.edge_list_string());
        let _ = writeln!(out, "[type {}]\nk = {}\nedges = {}\n", t.name, t.size, edges);
    }
    for v in &cert.vectors {
        let entries: Vec<String> = v.entries.iter().map(format_entry).collect();
        let _ = writeln!(out, "[vector {}]\ntype = {}\nentries = {}\n", v.name, v.type_name, entries.join("; "));
    }
    for m in &cert.matrices {
        let _ = writeln!(out, "[matrix {}]\nscale = {}\nrows = {}", m.name, m.scale, m.order());
        for row in &m.integers {
            let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(out, "{}", cells.join(" "));
        }
        out.push('\n');
    }
    let _ = writeln!(
        out,
        "[target]\nvertices = {}\ngraph = {}\nbound = {}",
        cert.target.vertex_count(),
        cert.target.edge_list_string(),
        cert.bound
    );
    out
}

// ---------------------------------------------------------------------------
// Verification

/// The algebra elements of a vector, in listed order (repetitions kept).
pub fn build_vector_entries(cert: &Certificate, vector: &VectorSpec) -> Result<Vec<AlgebraElement>, CertificateError> {
    let slot = cert
        .slot(&vector.type_name)
        .ok_or_else(|| structure(format!("unknown type {}", vector.type_name)))?;
    entries_for_type(&slot.flag_type()?, vector)
}

fn entries_for_type(ty: &FlagType, vector: &VectorSpec) -> Result<Vec<AlgebraElement>, CertificateError> {
    vector
        .entries
        .iter()
        .map(|e| {
            let element = match *e {
                EntryDescriptor::Centered(s) => f_element(ty, s),
                EntryDescriptor::Difference(a, b) => difference_element(ty, a, b),
            };
            element.map_err(|err| CertificateError::Algebra(err.into()))
        })
        .collect()
}

/// `⟦gᵀ M g⟧_σ` for one vector, brought to `level`.
fn averaged_form(
    ty: &FlagType,
    vector: &VectorSpec,
    matrix: &MatrixSpec,
    level: usize,
) -> Result<AlgebraElement, CertificateError> {
    let entries = entries_for_type(ty, vector)?;
    let spec = QuadraticFormSpec::new(*ty, matrix.matrix(), entries)?;
    let value = if spec.entries().is_empty() {
        AlgebraElement::zero(*ty, ty.size() + 2)
    } else {
        quadratic_form_value(&spec)?
    };
    Ok(lift(&average(&value)?, level)?)
}

/// `R`: the sum of all averaged quadratic forms, at the certificate level.
pub fn compute_r(cert: &Certificate) -> Result<AlgebraElement, CertificateError> {
    let level = cert.level();
    let parts: Vec<AlgebraElement> = cert
        .vectors
        .par_iter()
        .map(|v| {
            let ty = cert
                .slot(&v.type_name)
                .ok_or_else(|| structure(format!("unknown type {}", v.type_name)))?
                .flag_type()?;
            let m = cert.matrix_for(v).ok_or_else(|| structure(format!("no matrix for {}", v.name)))?;
            averaged_form(&ty, v, m, level)
        })
        .collect::<Result<_, _>>()?;
    let mut total = AlgebraElement::zero(FlagType::empty(0), level);
    for p in parts {
        total = total.checked_add(&p)?;
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixResult {
    pub name: String,
    pub class: PsdClass,
}

#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub level: usize,
    pub matrices: Vec<MatrixResult>,
    /// `Ĥ + Ĥ*`.
    pub lhs: AlgebraElement,
    /// `bound + R + R*`.
    pub rhs: AlgebraElement,
    /// `lhs − rhs`.
    pub residual: AlgebraElement,
}

impl VerificationReport {
    pub fn identity_holds(&self) -> bool {
        self.residual.is_zero()
    }

    pub fn all_psd(&self) -> bool {
        self.matrices.iter().all(|m| m.class.is_psd())
    }

    pub fn all_pd(&self) -> bool {
        self.matrices.iter().all(|m| m.class.is_pd())
    }

    /// PASS: zero residual and every matrix at least semidefinite.
    pub fn passed(&self) -> bool {
        self.identity_holds() && self.all_psd()
    }

    /// One row per model of the level, in model-table order.
    pub fn rows(&self) -> Vec<ResidualRow> {
        let table = models(self.level).expect("certificate level is a valid model order");
        table
            .keys()
            .iter()
            .zip(table.models())
            .map(|(key, g)| ResidualRow {
                key: *key,
                graph: *g,
                lhs: self.lhs.coefficient(key),
                rhs: self.rhs.coefficient(key),
                difference: self.residual.coefficient(key),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidualRow {
    pub key: CanonicalKey,
    pub graph: SmallGraph,
    pub lhs: Rational,
    pub rhs: Rational,
    pub difference: Rational,
}

fn identity_lhs(cert: &Certificate) -> Result<AlgebraElement, CertificateError> {
    let table = models(cert.level()).map_err(AlgebraError::from)?;
    let h = hat(&cert.target, table).expect("target fits its own level");
    Ok(h.checked_add(&star(&h)?)?)
}

pub fn verify(cert: &Certificate) -> Result<VerificationReport, CertificateError> {
    if let Some(t) = cert.types.iter().find(|t| t.graph.is_none()) {
        return Err(CertificateError::UnresolvedType(t.name.clone()));
    }
    let level = cert.level();
    let matrices = cert
        .matrices
        .iter()
        .map(|m| MatrixResult {
            name: m.name.clone(),
            class: psd_classify(&m.matrix()).expect("validated symmetric"),
        })
        .collect();
    let lhs = identity_lhs(cert)?;
    let r = compute_r(cert)?;
    let rhs = constant(&cert.bound, level)?.checked_add(&r)?.checked_add(&star(&r)?)?;
    let residual = lhs.checked_sub(&rhs)?;
    Ok(VerificationReport { level, matrices, lhs, rhs, residual })
}

/// Writes the coefficient table: model edge list, LHS, RHS and difference,
/// tab-separated, one row per model.
pub fn export_residual(report: &VerificationReport, out: &mut impl io::Write) -> io::Result<()> {
    writeln!(out, "# model\tlhs\trhs\tdifference")?;
    for row in report.rows() {
        let edges = row.graph.edge_list_string();
        let edges = if edges.is_empty() { "-".to_string() } else { edges };
        writeln!(out, "{edges}\t{}\t{}\t{}", row.lhs, row.rhs, row.difference)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Type reconstruction

#[derive(Debug, Clone)]
pub struct InferenceReport {
    /// Candidate edge sets per slot after the orbit filter.
    pub pools: Vec<(String, Vec<SmallGraph>)>,
    /// Every assignment (in slot order) that verifies, lexicographically
    /// sorted by edge lists.
    pub assignments: Vec<Vec<SmallGraph>>,
}

fn all_labeled_graphs(k: usize) -> Vec<SmallGraph> {
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|u| (u + 1..k).map(move |v| (u, v))).collect();
    (0u32..(1 << pairs.len()))
        .map(|mask| {
            let edges: Vec<(usize, usize)> =
                pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &p)| p).collect();
            SmallGraph::from_edges(k, &edges).expect("valid pairs")
        })
        .collect()
}

/// True when the centered subsets hit every nonempty `Aut(σ)`-orbit exactly
/// once; any member of an orbit may stand for it.
pub fn matches_orbit_structure(ty: &FlagType, centered: &[LabelSet]) -> bool {
    let Ok(partition) = subset_orbits(ty) else {
        return false;
    };
    let nonempty: Vec<_> = partition.orbits.iter().filter(|o| !o.representative.is_empty()).collect();
    if centered.len() != nonempty.len() {
        return false;
    }
    let mut hit = vec![false; nonempty.len()];
    for set in centered {
        let Some(i) = nonempty.iter().position(|o| o.members.contains(set)) else {
            return false;
        };
        if hit[i] {
            return false;
        }
        hit[i] = true;
    }
    true
}

/// Candidate edge sets for one slot.
pub fn candidate_pool(cert: &Certificate, slot: &TypeSlot) -> Vec<SmallGraph> {
    if let Some(g) = slot.graph {
        return vec![g];
    }
    let centered: Vec<LabelSet> = cert
        .vectors
        .iter()
        .filter(|v| v.type_name == slot.name)
        .flat_map(|v| &v.entries)
        .filter_map(|e| match e {
            EntryDescriptor::Centered(s) => Some(*s),
            EntryDescriptor::Difference(..) => None,
        })
        .collect();
    let all = all_labeled_graphs(slot.size);
    if centered.is_empty() {
        return all;
    }
    all.into_iter().filter(|g| matches_orbit_structure(&FlagType::new(*g), &centered)).collect()
}

type Contribution = Vec<Rational>;

fn as_vector(e: &AlgebraElement, keys: &[CanonicalKey]) -> Contribution {
    keys.iter().map(|k| e.coefficient(k)).collect()
}

fn add_into(acc: &mut Contribution, other: &Contribution) {
    for (a, b) in acc.iter_mut().zip(other) {
        *a += b;
    }
}

fn combinations_of(pools: &[Vec<Contribution>], width: usize) -> Vec<(Vec<usize>, Contribution)> {
    let mut acc: Vec<(Vec<usize>, Contribution)> = vec![(Vec::new(), vec![Rational::zero(); width])];
    for pool in pools {
        let mut next = Vec::with_capacity(acc.len() * pool.len());
        for (choice, sum) in &acc {
            for (i, c) in pool.iter().enumerate() {
                let mut s = sum.clone();
                add_into(&mut s, c);
                let mut ch = choice.clone();
                ch.push(i);
                next.push((ch, s));
            }
        }
        acc = next;
    }
    acc
}

/// Finds every assignment of edge sets to placeholder slots for which the
/// certificate verifies.
///
/// `R` is a sum of per-slot terms, so each candidate's contribution
/// `Rᵢ + Rᵢ*` is computed once; the slots are then split in two halves and
/// matched against the required total by hashing (meet in the middle).
/// Every match is confirmed by a full [`verify`].
pub fn infer_types(template: &Certificate) -> Result<InferenceReport, CertificateError> {
    let level = template.level();
    let table = models(level).map_err(AlgebraError::from)?;
    let keys = table.keys();
    let pools: Vec<(String, Vec<SmallGraph>)> =
        template.types.iter().map(|slot| (slot.name.clone(), candidate_pool(template, slot))).collect();

    // Per (slot, candidate) contribution R_i + R_i*.
    let jobs: Vec<(usize, usize)> = pools
        .iter()
        .enumerate()
        .flat_map(|(s, (_, pool))| (0..pool.len()).map(move |c| (s, c)))
        .collect();
    let computed: Vec<Contribution> = jobs
        .par_iter()
        .map(|&(s, c)| {
            let ty = FlagType::new(pools[s].1[c]);
            let mut part = AlgebraElement::zero(FlagType::empty(0), level);
            for v in template.vectors.iter().filter(|v| v.type_name == pools[s].0) {
                let m = template.matrix_for(v).expect("validated pairing");
                part = part.checked_add(&averaged_form(&ty, v, m, level)?)?;
            }
            let sym = part.checked_add(&star(&part)?)?;
            Ok(as_vector(&sym, keys))
        })
        .collect::<Result<_, CertificateError>>()?;
    let mut contributions: Vec<Vec<Contribution>> = pools.iter().map(|_| Vec::new()).collect();
    for ((s, _), c) in jobs.iter().zip(computed) {
        contributions[*s].push(c);
    }

    let lhs = identity_lhs(template)?;
    let wanted = as_vector(&lhs.checked_sub(&constant(&template.bound, level)?)?, keys);

    let half = contributions.len() / 2;
    let left = combinations_of(&contributions[..half], keys.len());
    let right = combinations_of(&contributions[half..], keys.len());
    let mut index: HashMap<Contribution, Vec<usize>> = HashMap::new();
    for (i, (_, sum)) in left.iter().enumerate() {
        index.entry(sum.clone()).or_default().push(i);
    }
    let mut assignments = Vec::new();
    for (right_choice, sum) in &right {
        let needed: Contribution = wanted.iter().zip(sum).map(|(w, s)| w - s).collect();
        for &li in index.get(&needed).into_iter().flatten() {
            let choice: Vec<usize> = left[li].0.iter().chain(right_choice).copied().collect();
            let graphs: Vec<SmallGraph> = choice.iter().enumerate().map(|(s, &c)| pools[s].1[c]).collect();
            if verify(&template.with_types(&graphs))?.passed() {
                assignments.push(graphs);
            }
        }
    }
    assignments.sort_by_key(|a| a.iter().map(|g| g.edges().collect::<Vec<_>>()).collect::<Vec<_>>());
    Ok(InferenceReport { pools, assignments })
}
