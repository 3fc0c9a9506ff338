//! Types, flags and the one-extra-vertex flags `F^σ_V`.
//!
//! A flag is stored with its labeled vertices first: vertex `i < k` carries
//! label `i + 1`. Its canonical key minimizes the adjacency bitstring over
//! orders of the unlabeled vertices only, so two flags share a key exactly
//! when they are isomorphic by a map fixing every label.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use crate::algebra::AlgebraElement;
use crate::graph::{automorphisms, extend_by_one_vertex, minimize_with_prefix, CanonicalKey, SmallGraph};
use crate::rational::{integer, ratio, Rational};

/// Largest flag size handled by enumeration and the algebra tables.
pub const MAX_FLAG_SIZE: usize = 7;
/// Largest type size.
pub const MAX_TYPE_SIZE: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FlagError {
    #[error("f-elements need a nonempty vertex set")]
    EmptySubset,
    #[error("label {label} out of range for a type of size {size}")]
    LabelOutOfRange { label: usize, size: usize },
    #[error("flag size {size} below the type size {type_size}")]
    SizeBelowType { size: usize, type_size: usize },
    #[error("flag size {0} exceeds {MAX_FLAG_SIZE}")]
    SizeTooLarge(usize),
    #[error("type size {0} exceeds {MAX_TYPE_SIZE}")]
    TypeTooLarge(usize),
    #[error("invalid flag: {0}")]
    Invalid(String),
}

/// A fully labeled graph on `[k]`. Two types with different edge sets are
/// different types even when the graphs are isomorphic.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FlagType {
    graph: SmallGraph,
}

impl fmt::Debug for FlagType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FlagType(k={}; {})", self.size(), self.graph.edge_list_string())
    }
}

impl FlagType {
    pub fn new(graph: SmallGraph) -> Self {
        FlagType { graph }
    }

    /// Edgeless type of size `k`; `k = 0` is the empty type of `A⁰`.
    pub fn empty(k: usize) -> Self {
        FlagType { graph: SmallGraph::empty(k) }
    }

    pub fn size(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn graph(&self) -> &SmallGraph {
        &self.graph
    }

    pub fn is_empty_type(&self) -> bool {
        self.size() == 0
    }
}

/// `Aut(σ)`: the permutations of `[k]` preserving the type's edges.
pub fn type_automorphisms(ty: &FlagType) -> Result<Vec<Vec<usize>>, FlagError> {
    if ty.size() > MAX_TYPE_SIZE {
        return Err(FlagError::TypeTooLarge(ty.size()));
    }
    Ok(automorphisms(ty.graph()))
}

/// A subset of the labels `[k]`; bit `i` stands for label `i + 1`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct LabelSet(u16);

impl LabelSet {
    pub const EMPTY: LabelSet = LabelSet(0);

    /// From 1-based labels.
    pub fn from_labels(labels: &[usize], size: usize) -> Result<Self, FlagError> {
        let mut bits = 0u16;
        for &label in labels {
            if label == 0 || label > size {
                return Err(FlagError::LabelOutOfRange { label, size });
            }
            bits |= 1 << (label - 1);
        }
        Ok(LabelSet(bits))
    }

    pub fn from_bits(bits: u16) -> Self {
        LabelSet(bits)
    }

    pub fn bits(&self) -> u16 {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    /// 0-based membership.
    pub fn contains(&self, index: usize) -> bool {
        self.0 >> index & 1 == 1
    }

    /// Sorted 1-based labels.
    pub fn labels(&self) -> Vec<usize> {
        (0..16).filter(|&i| self.contains(i)).map(|i| i + 1).collect()
    }

    /// Image under a permutation of the (0-based) label indices.
    pub fn image(&self, perm: &[usize]) -> Self {
        let mut bits = 0u16;
        for (i, &target) in perm.iter().enumerate() {
            if self.contains(i) {
                bits |= 1 << target;
            }
        }
        LabelSet(bits)
    }

    pub fn is_subset_of(&self, size: usize) -> bool {
        size >= 16 || self.0 >> size == 0
    }
}

/// Smaller sets first, then lexicographic on the sorted label lists.
impl Ord for LabelSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.labels().cmp(&other.labels()))
    }
}

impl PartialOrd for LabelSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for LabelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for LabelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<String> = self.labels().iter().map(|l| l.to_string()).collect();
        write!(f, "{{{}}}", labels.join(","))
    }
}

/// Key of a flag whose labeled vertices are `0..k` in label order.
pub(crate) fn flag_key(graph: &SmallGraph, k: usize) -> CanonicalKey {
    let prefix: Vec<usize> = (0..k).collect();
    let (bits, _) = minimize_with_prefix(graph, &prefix);
    CanonicalKey { vertex_count: graph.vertex_count() as u8, bits }
}

/// A graph with an injective labeling of `[k]` that induces the type.
#[derive(Clone, PartialEq, Eq)]
pub struct Flag {
    ty: FlagType,
    graph: SmallGraph,
    labels: Vec<usize>,
}

impl fmt::Debug for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Flag")
            .field("graph", &self.graph)
            .field("labels", &self.labels)
            .finish()
    }
}

impl Flag {
    /// `labels[i]` is the (0-based) vertex carrying label `i + 1`.
    pub fn new(ty: FlagType, graph: SmallGraph, labels: Vec<usize>) -> Result<Self, FlagError> {
        let k = ty.size();
        if labels.len() != k {
            return Err(FlagError::Invalid(format!("expected {k} labels, got {}", labels.len())));
        }
        if graph.vertex_count() < k {
            return Err(FlagError::SizeBelowType { size: graph.vertex_count(), type_size: k });
        }
        let mut seen = 0u16;
        for &v in &labels {
            if v >= graph.vertex_count() || seen >> v & 1 == 1 {
                return Err(FlagError::Invalid(format!("labeling {labels:?} is not injective into the vertices")));
            }
            seen |= 1 << v;
        }
        if graph.induced(&labels) != *ty.graph() {
            return Err(FlagError::Invalid("labeled vertices do not induce the type".into()));
        }
        Ok(Flag { ty, graph, labels })
    }

    /// The flag encoded by `key` over `ty`, labels on vertices `0..k`.
    pub fn from_key(ty: FlagType, key: &CanonicalKey) -> Self {
        Flag { ty, graph: key.to_graph(), labels: (0..ty.size()).collect() }
    }

    pub fn flag_type(&self) -> &FlagType {
        &self.ty
    }

    pub fn graph(&self) -> &SmallGraph {
        &self.graph
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn size(&self) -> usize {
        self.graph.vertex_count()
    }

    /// Same graph with the labeled vertices moved to the front.
    pub fn normalized_graph(&self) -> SmallGraph {
        let mut order = self.labels.clone();
        order.extend((0..self.size()).filter(|v| !self.labels.contains(v)));
        self.graph.induced(&order)
    }

    pub fn key(&self) -> CanonicalKey {
        flag_key(&self.normalized_graph(), self.ty.size())
    }

    pub fn is_isomorphic(&self, other: &Flag) -> bool {
        self.ty == other.ty && self.size() == other.size() && self.key() == other.key()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orbit {
    pub representative: LabelSet,
    pub members: Vec<LabelSet>,
}

/// The orbits of `Aut(σ)` on the subsets of `[k]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitPartition {
    pub ty: FlagType,
    pub orbits: Vec<Orbit>,
}

impl OrbitPartition {
    pub fn orbit_of(&self, set: LabelSet) -> &Orbit {
        self.orbits
            .iter()
            .find(|o| o.members.contains(&set))
            .expect("every subset lies in an orbit")
    }

    pub fn nonempty_representatives(&self) -> Vec<LabelSet> {
        self.orbits.iter().map(|o| o.representative).filter(|r| !r.is_empty()).collect()
    }
}

pub fn subset_orbits(ty: &FlagType) -> Result<OrbitPartition, FlagError> {
    let group = type_automorphisms(ty)?;
    let k = ty.size();
    let mut assigned = vec![false; 1 << k];
    let mut orbits = Vec::new();
    for bits in 0..(1u16 << k) {
        if assigned[bits as usize] {
            continue;
        }
        let set = LabelSet(bits);
        let mut members: Vec<LabelSet> = group.iter().map(|perm| set.image(perm)).collect();
        members.sort();
        members.dedup();
        for m in &members {
            assigned[m.0 as usize] = true;
        }
        orbits.push(Orbit { representative: members[0], members });
    }
    orbits.sort_by_key(|o| o.representative);
    Ok(OrbitPartition { ty: *ty, orbits })
}

/// `F^σ_V`: the type plus one unlabeled vertex adjacent exactly to the
/// vertices labeled by `V`.
pub fn one_vertex_flag(ty: &FlagType, set: LabelSet) -> Result<Flag, FlagError> {
    let k = ty.size();
    if !set.is_subset_of(k) {
        let label = set.labels().into_iter().max().unwrap_or(0);
        return Err(FlagError::LabelOutOfRange { label, size: k });
    }
    if k + 1 > MAX_FLAG_SIZE {
        return Err(FlagError::SizeTooLarge(k + 1));
    }
    let mut graph = ty.graph().with_vertex();
    for i in 0..k {
        if set.contains(i) {
            graph.set_edge(i, k, true);
        }
    }
    Flag::new(*ty, graph, (0..k).collect())
}

/// Keys of all flags of size `n` over `ty`, sorted.
pub(crate) fn flag_keys(ty: &FlagType, n: usize) -> Result<Arc<Vec<CanonicalKey>>, FlagError> {
    type Cache = Mutex<HashMap<(FlagType, usize), Arc<Vec<CanonicalKey>>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let k = ty.size();
    if n < k {
        return Err(FlagError::SizeBelowType { size: n, type_size: k });
    }
    if n > MAX_FLAG_SIZE {
        return Err(FlagError::SizeTooLarge(n));
    }
    if k > MAX_TYPE_SIZE {
        return Err(FlagError::TypeTooLarge(k));
    }
    let cache = CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.lock().unwrap().get(&(*ty, n)) {
        return Ok(hit.clone());
    }
    let keys = if n == k {
        vec![flag_key(ty.graph(), k)]
    } else {
        let smaller = flag_keys(ty, n - 1)?;
        let graphs: Vec<SmallGraph> = smaller.iter().map(CanonicalKey::to_graph).collect();
        extend_by_one_vertex(&graphs, |g| flag_key(g, k))
    };
    let keys = Arc::new(keys);
    cache.lock().unwrap().insert((*ty, n), keys.clone());
    Ok(keys)
}

/// `F^σ_n` up to flag isomorphism, ordered by canonical key.
pub fn enumerate_flags(ty: &FlagType, n: usize) -> Result<Vec<Flag>, FlagError> {
    Ok(flag_keys(ty, n)?.iter().map(|key| Flag::from_key(*ty, key)).collect())
}

/// `f^σ_V = F^σ_∅ − (1/|Aut σ|) Σ_{η ∈ Aut σ} F^σ_{η(V)}`.
pub fn f_element(ty: &FlagType, set: LabelSet) -> Result<AlgebraElement, FlagError> {
    if set.is_empty() {
        return Err(FlagError::EmptySubset);
    }
    let base = one_vertex_flag(ty, LabelSet::EMPTY)?;
    let group = type_automorphisms(ty)?;
    let mut hits: HashMap<LabelSet, u128> = HashMap::new();
    for perm in &group {
        *hits.entry(set.image(perm)).or_default() += 1;
    }
    let mut terms: Vec<(CanonicalKey, Rational)> = vec![(base.key(), integer(1))];
    for (image, count) in hits {
        let flag = one_vertex_flag(ty, image)?;
        terms.push((flag.key(), -ratio(count, group.len() as u128)));
    }
    Ok(AlgebraElement::from_terms(*ty, ty.size() + 1, terms))
}

/// `F^σ_V − F^σ_W`.
pub fn difference_element(ty: &FlagType, plus: LabelSet, minus: LabelSet) -> Result<AlgebraElement, FlagError> {
    let a = one_vertex_flag(ty, plus)?;
    let b = one_vertex_flag(ty, minus)?;
    Ok(AlgebraElement::from_terms(
        *ty,
        ty.size() + 1,
        vec![(a.key(), integer(1)), (b.key(), integer(-1))],
    ))
}
