//! Small simple graphs, canonical keys and the model tables `M_n`.

use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

pub const MAX_VERTICES: usize = 16;
/// Largest `n` accepted by [`enumerate_models`].
pub const MAX_MODEL_ORDER: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("vertex count {0} exceeds the maximum of {MAX_VERTICES}")]
    TooManyVertices(usize),
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("loop at vertex {0}")]
    Loop(usize),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(usize, usize),
    #[error("model order {0} outside 1..={MAX_MODEL_ORDER}")]
    ModelOrder(usize),
}

/// Simple undirected graph on at most 16 vertices, one adjacency bitset
/// per vertex.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SmallGraph {
    n: u8,
    rows: [u16; MAX_VERTICES],
}

impl fmt::Debug for SmallGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SmallGraph({}; {})", self.n, self.edge_list_string())
    }
}

impl SmallGraph {
    /// Edgeless graph on `n` vertices.
    ///
    /// Panics if `n > 16`.
    pub fn empty(n: usize) -> Self {
        assert!(n <= MAX_VERTICES, "at most {MAX_VERTICES} vertices");
        SmallGraph { n: n as u8, rows: [0; MAX_VERTICES] }
    }

    pub fn complete(n: usize) -> Self {
        Self::empty(n).complement()
    }

    pub fn cycle(n: usize) -> Self {
        let mut g = Self::empty(n);
        for i in 0..n {
            g.set_edge(i, (i + 1) % n, true);
        }
        g
    }

    pub fn path(n: usize) -> Self {
        let mut g = Self::empty(n);
        for i in 1..n {
            g.set_edge(i - 1, i, true);
        }
        g
    }

    /// The wheel with `rim` spokes: a cycle on `0..rim` plus a hub `rim`
    /// adjacent to every rim vertex.
    pub fn wheel(rim: usize) -> Self {
        let mut g = Self::empty(rim + 1);
        for i in 0..rim {
            g.set_edge(i, (i + 1) % rim, true);
            g.set_edge(i, rim, true);
        }
        g
    }

    /// Graph from 0-based edges, rejecting loops, duplicates and
    /// out-of-range endpoints.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        if n > MAX_VERTICES {
            return Err(GraphError::TooManyVertices(n));
        }
        let mut g = Self::empty(n);
        for &(u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: w + 1, n });
                }
            }
            if u == v {
                return Err(GraphError::Loop(u + 1));
            }
            if g.has_edge(u, v) {
                let (a, b) = (u.min(v), u.max(v));
                return Err(GraphError::DuplicateEdge(a + 1, b + 1));
            }
            g.set_edge(u, v, true);
        }
        Ok(g)
    }

    pub fn vertex_count(&self) -> usize {
        self.n as usize
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.rows[u] >> v & 1 == 1
    }

    pub fn set_edge(&mut self, u: usize, v: usize, present: bool) {
        assert!(u != v, "loops are not allowed");
        assert!(u < self.vertex_count() && v < self.vertex_count());
        if present {
            self.rows[u] |= 1 << v;
            self.rows[v] |= 1 << u;
        } else {
            self.rows[u] &= !(1 << v);
            self.rows[v] &= !(1 << u);
        }
    }

    /// Neighbourhood of `v` as a bitmask.
    #[inline]
    pub fn neighbours(&self, v: usize) -> u16 {
        self.rows[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.rows[v].count_ones() as usize
    }

    pub fn edge_count(&self) -> usize {
        self.rows[..self.vertex_count()].iter().map(|r| r.count_ones() as usize).sum::<usize>() / 2
    }

    /// Edges `(u, v)` with `u < v`, 0-based, lexicographic.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.vertex_count();
        (0..n).flat_map(move |u| ((u + 1)..n).filter(move |&v| self.has_edge(u, v)).map(move |v| (u, v)))
    }

    pub fn complement(&self) -> Self {
        let n = self.vertex_count();
        let full: u16 = if n == MAX_VERTICES { u16::MAX } else { (1u16 << n) - 1 };
        let mut out = *self;
        for v in 0..n {
            out.rows[v] = !self.rows[v] & full & !(1 << v);
        }
        out
    }

    /// Subgraph induced on `vertices`, with `vertices[i]` becoming vertex `i`.
    pub fn induced(&self, vertices: &[usize]) -> Self {
        let mut out = Self::empty(vertices.len());
        for (i, &a) in vertices.iter().enumerate() {
            for (j, &b) in vertices.iter().enumerate().skip(i + 1) {
                if self.has_edge(a, b) {
                    out.rows[i] |= 1 << j;
                    out.rows[j] |= 1 << i;
                }
            }
        }
        out
    }

    /// The image `π·G`: vertex `v` moves to `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        let mut out = Self::empty(self.vertex_count());
        for (u, v) in self.edges() {
            out.set_edge(perm[u], perm[v], true);
        }
        out
    }

    /// Adds an isolated vertex.
    pub fn with_vertex(&self) -> Self {
        let mut out = *self;
        out.n += 1;
        out
    }

    /// Inline edge syntax `1-2, 2-3` (1-based); empty for edgeless graphs.
    pub fn edge_list_string(&self) -> String {
        self.edges()
            .map(|(u, v)| format!("{}-{}", u + 1, v + 1))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

/// Minimal adjacency bitstring over all vertex orders.
///
/// Pairs are ordered `(0,1), (0,2), (1,2), (0,3), (1,3), (2,3), ...`, so the
/// string of a vertex order grows by one block per placed vertex and its
/// prefixes can be minimized position by position. The first pair is the
/// most significant bit, which makes numeric order on `bits` the
/// lexicographic order on strings of equal length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalKey {
    pub vertex_count: u8,
    pub bits: u128,
}

impl CanonicalKey {
    pub fn pair_count(&self) -> usize {
        let n = self.vertex_count as usize;
        n * n.saturating_sub(1) / 2
    }

    /// The bitstring as `'0'`/`'1'` characters.
    pub fn bitstring(&self) -> String {
        let len = self.pair_count();
        (0..len).map(|i| if self.bits >> (len - 1 - i) & 1 == 1 { '1' } else { '0' }).collect()
    }

    /// The canonically ordered graph this key encodes.
    pub fn to_graph(&self) -> SmallGraph {
        let n = self.vertex_count as usize;
        let mut g = SmallGraph::empty(n);
        let mut pos = self.pair_count();
        for j in 1..n {
            for i in 0..j {
                pos -= 1;
                if self.bits >> pos & 1 == 1 {
                    g.set_edge(i, j, true);
                }
            }
        }
        g
    }
}

/// Vertices sharing a neighbourhood (apart from each other) with a
/// lower-numbered vertex that is also free to move. Swapping such twins is
/// an automorphism fixing everything else, so the search may insist that
/// each one is placed after its lower twin.
fn twin_predecessors(g: &SmallGraph, fixed: usize) -> [u16; MAX_VERTICES] {
    let n = g.vertex_count();
    let mut pred = [0u16; MAX_VERTICES];
    for v in fixed..n {
        for u in fixed..v {
            let mask = !((1u16 << u) | (1u16 << v));
            if g.neighbours(u) & mask == g.neighbours(v) & mask {
                pred[v] |= 1 << u;
            }
        }
    }
    pred
}

/// Minimizes the bitstring over vertex orders that start with `prefix`.
/// Returns the bits and one minimizing order (`order[t]` is the vertex
/// placed at position `t`).
pub(crate) fn minimize_with_prefix(g: &SmallGraph, prefix: &[usize]) -> (u128, Vec<usize>) {
    let n = g.vertex_count();
    let mut bits = 0u128;
    let mut start = [0u8; MAX_VERTICES];
    let mut used = 0u16;
    for (t, &v) in prefix.iter().enumerate() {
        for &u in &prefix[..t] {
            bits = bits << 1 | g.has_edge(u, v) as u128;
        }
        start[t] = v as u8;
        used |= 1 << v;
    }
    // Twin pruning is only sound for vertices not pinned by the prefix.
    let pred = if prefix.iter().enumerate().all(|(i, &v)| i == v) {
        twin_predecessors(g, prefix.len())
    } else {
        [0u16; MAX_VERTICES]
    };

    let mut frontier: Vec<([u8; MAX_VERTICES], u16)> = vec![(start, used)];
    for t in prefix.len()..n {
        let mut best: Option<u32> = None;
        let mut next = Vec::new();
        for (order, used) in &frontier {
            for v in 0..n {
                if used >> v & 1 == 1 || pred[v] & !used != 0 {
                    continue;
                }
                let row = g.neighbours(v);
                let mut chunk = 0u32;
                for &u in &order[..t] {
                    chunk = chunk << 1 | (row >> u & 1) as u32;
                }
                match best {
                    Some(b) if chunk > b => continue,
                    Some(b) if chunk == b => {}
                    _ => {
                        best = Some(chunk);
                        next.clear();
                    }
                }
                let mut extended = *order;
                extended[t] = v as u8;
                next.push((extended, used | 1 << v));
            }
        }
        bits = bits << t | best.expect("an unplaced vertex remains") as u128;
        frontier = next;
    }
    let order = frontier[0].0[..n].iter().map(|&v| v as usize).collect();
    (bits, order)
}

pub fn canonical_key(g: &SmallGraph) -> CanonicalKey {
    canonical_form(g).0
}

/// Canonical key together with a vertex order realizing it.
pub fn canonical_form(g: &SmallGraph) -> (CanonicalKey, Vec<usize>) {
    let (bits, order) = minimize_with_prefix(g, &[]);
    (CanonicalKey { vertex_count: g.vertex_count() as u8, bits }, order)
}

pub fn are_isomorphic(a: &SmallGraph, b: &SmallGraph) -> bool {
    a.vertex_count() == b.vertex_count()
        && a.edge_count() == b.edge_count()
        && canonical_key(a) == canonical_key(b)
}

/// Calls `f` with every permutation of `0..n` (Heap's algorithm).
pub fn for_each_permutation(n: usize, mut f: impl FnMut(&[usize])) {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    f(&perm);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            f(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Calls `f` with every `k`-subset of `0..n` in lexicographic order.
pub fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut combo: Vec<usize> = (0..k).collect();
    loop {
        f(&combo);
        let Some(i) = (0..k).rev().find(|&i| combo[i] < n - k + i) else {
            return;
        };
        combo[i] += 1;
        for j in (i + 1)..k {
            combo[j] = combo[j - 1] + 1;
        }
    }
}

/// All `π` with `uv ∈ E ⇔ π(u)π(v) ∈ E`, in lexicographic order.
pub fn automorphisms(g: &SmallGraph) -> Vec<Vec<usize>> {
    let n = g.vertex_count();
    let mut out = Vec::new();
    for_each_permutation(n, |perm| {
        let preserved = (0..n).all(|u| ((u + 1)..n).all(|v| g.has_edge(u, v) == g.has_edge(perm[u], perm[v])));
        if preserved {
            out.push(perm.to_vec());
        }
    });
    out.sort();
    out
}

/// Parses the text graph format: the first non-comment line is the vertex
/// count, every further non-comment line an edge `u v` with 1-based
/// endpoints. Lines starting with `#` and blank lines are ignored.
pub fn parse_graph(text: &str) -> Result<SmallGraph, GraphError> {
    let mut graph: Option<SmallGraph> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| GraphError::Parse { line: line_no, message };
        let fields: Vec<&str> = line.split_whitespace().collect();
        let Some(g) = graph.as_mut() else {
            let [count] = fields[..] else {
                return Err(err(format!("expected a vertex count, found {line:?}")));
            };
            let n: usize = count.parse().map_err(|_| err(format!("invalid vertex count {count:?}")))?;
            if n > MAX_VERTICES {
                return Err(err(format!("vertex count {n} exceeds {MAX_VERTICES}")));
            }
            graph = Some(SmallGraph::empty(n));
            continue;
        };
        let [a, b] = fields[..] else {
            return Err(err(format!("expected an edge \"u v\", found {line:?}")));
        };
        let n = g.vertex_count();
        let parse_vertex = |s: &str| -> Result<usize, GraphError> {
            let v: usize = s.parse().map_err(|_| err(format!("invalid vertex {s:?}")))?;
            if v == 0 || v > n {
                return Err(err(format!("vertex {v} out of range 1..={n}")));
            }
            Ok(v - 1)
        };
        let (u, v) = (parse_vertex(a)?, parse_vertex(b)?);
        if u == v {
            return Err(err(format!("loop at vertex {}", u + 1)));
        }
        if g.has_edge(u, v) {
            return Err(err(format!("duplicate edge {} {}", u.min(v) + 1, u.max(v) + 1)));
        }
        g.set_edge(u, v, true);
    }
    graph.ok_or(GraphError::Parse { line: 0, message: "missing vertex count".into() })
}

pub fn format_graph(g: &SmallGraph) -> String {
    let mut out = format!("{}\n", g.vertex_count());
    for (u, v) in g.edges() {
        out.push_str(&format!("{} {}\n", u + 1, v + 1));
    }
    out
}

/// Parses the inline syntax `1-2, 3-4` (empty string for no edges).
pub fn parse_edge_list(n: usize, text: &str) -> Result<SmallGraph, GraphError> {
    let bad = |message: String| GraphError::Parse { line: 0, message };
    let mut edges = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (a, b) = item.split_once('-').ok_or_else(|| bad(format!("expected u-v, found {item:?}")))?;
        let parse = |s: &str| -> Result<usize, GraphError> {
            let v: usize = s.trim().parse().map_err(|_| bad(format!("invalid vertex {s:?}")))?;
            if v == 0 {
                return Err(GraphError::VertexOutOfRange { vertex: 0, n });
            }
            Ok(v - 1)
        };
        edges.push((parse(a)?, parse(b)?));
    }
    SmallGraph::from_edges(n, &edges)
}

/// One representative per isomorphism class of graphs on `n` vertices,
/// ordered by canonical key.
#[derive(Debug, Clone)]
pub struct ModelTable {
    n: usize,
    keys: Vec<CanonicalKey>,
    models: Vec<SmallGraph>,
    index: HashMap<CanonicalKey, usize>,
}

impl ModelTable {
    fn from_keys(n: usize, mut keys: Vec<CanonicalKey>) -> Self {
        keys.sort();
        keys.dedup();
        let models = keys.iter().map(CanonicalKey::to_graph).collect();
        let index = keys.iter().enumerate().map(|(i, k)| (*k, i)).collect();
        ModelTable { n, keys, models, index }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self) -> &[CanonicalKey] {
        &self.keys
    }

    pub fn models(&self) -> &[SmallGraph] {
        &self.models
    }

    pub fn position(&self, key: &CanonicalKey) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn position_of(&self, g: &SmallGraph) -> Option<usize> {
        self.position(&canonical_key(g))
    }

    /// `perm[i]` is the position of the complement of model `i`.
    pub fn complement_permutation(&self) -> Vec<usize> {
        self.models
            .iter()
            .map(|g| self.position_of(&g.complement()).expect("complement is a model"))
            .collect()
    }
}

/// Builds `M_n` for `1 <= n <= 8`.
///
/// Every graph on `n` vertices arises from a graph on `n - 1` vertices by
/// adding a vertex with some neighbourhood, so the classes are generated by
/// extending each model of `M_{n-1}` in all `2^(n-1)` ways and bucketing by
/// canonical key.
pub fn enumerate_models(n: usize) -> Result<ModelTable, GraphError> {
    if !(1..=MAX_MODEL_ORDER).contains(&n) {
        return Err(GraphError::ModelOrder(n));
    }
    if n == 1 {
        return Ok(ModelTable::from_keys(1, vec![canonical_key(&SmallGraph::empty(1))]));
    }
    let smaller = models(n - 1)?;
    let keys = extend_by_one_vertex(smaller.models(), canonical_key);
    Ok(ModelTable::from_keys(n, keys))
}

pub(crate) fn extend_by_one_vertex(
    graphs: &[SmallGraph],
    key: impl Fn(&SmallGraph) -> CanonicalKey + Sync,
) -> Vec<CanonicalKey> {
    use rayon::prelude::*;
    let mut keys: Vec<CanonicalKey> = graphs
        .par_iter()
        .flat_map_iter(|base| {
            let m = base.vertex_count();
            let key = &key;
            (0u32..(1 << m)).map(move |mask| {
                let mut g = base.with_vertex();
                for u in 0..m {
                    if mask >> u & 1 == 1 {
                        g.set_edge(u, m, true);
                    }
                }
                key(&g)
            })
        })
        .collect();
    keys.sort_unstable();
    keys.dedup();
    keys
}

/// Shared, lazily built `M_n`.
pub fn models(n: usize) -> Result<&'static ModelTable, GraphError> {
    static TABLES: [OnceLock<ModelTable>; MAX_MODEL_ORDER + 1] = [const { OnceLock::new() }; MAX_MODEL_ORDER + 1];
    if !(1..=MAX_MODEL_ORDER).contains(&n) {
        return Err(GraphError::ModelOrder(n));
    }
    if let Some(table) = TABLES[n].get() {
        return Ok(table);
    }
    let table = enumerate_models(n)?;
    Ok(TABLES[n].get_or_init(|| table))
}
