//! Linear combinations of flags and the operations of the flag calculus:
//! lifting to a larger size, products, the averaging operator `⟦·⟧_σ`, the
//! complement involution and exact evaluation on concrete graphs.
//!
//! Operation tables (which small flags sit inside which large flag, with
//! what probability) depend only on the type and the sizes involved; they
//! are computed once by exhaustive enumeration and shared process-wide.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::Hash;
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::flag::{flag_key, flag_keys, Flag, FlagError, FlagType, MAX_FLAG_SIZE};
use crate::graph::{canonical_key, for_each_combination, models, CanonicalKey, GraphError, SmallGraph};
use crate::matrix::RationalMatrix;
use crate::rational::{binomial, falling_factorial, ratio, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlgebraError {
    #[error("type mismatch between operands")]
    TypeMismatch,
    #[error("level mismatch: {0} vs {1}")]
    LevelMismatch(usize, usize),
    #[error("level {0} out of range")]
    LevelOutOfRange(usize),
    #[error("operation is defined only over the empty type")]
    NonEmptyType,
    #[error("graph has {got} vertices, at least {need} required")]
    GraphTooSmall { need: usize, got: usize },
    #[error("matrix order {order} does not match {entries} entries")]
    Dimension { order: usize, entries: usize },
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error(transparent)]
    Flag(#[from] FlagError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Element of `A^σ`: rational coefficients on the flags of one size over
/// one type. Zero coefficients are never stored; iteration follows
/// canonical key order.
#[derive(Clone, PartialEq, Eq)]
pub struct AlgebraElement {
    ty: FlagType,
    level: usize,
    coeffs: BTreeMap<CanonicalKey, Rational>,
}

impl fmt::Debug for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AlgebraElement({:?}, level {}) {{", self.ty, self.level)?;
        for (key, c) in &self.coeffs {
            write!(f, " {}:{}", key.bitstring(), c)?;
        }
        write!(f, " }}")
    }
}

impl AlgebraElement {
    /// Sums the given terms; repeated keys accumulate.
    pub fn from_terms(
        ty: FlagType,
        level: usize,
        terms: impl IntoIterator<Item = (CanonicalKey, Rational)>,
    ) -> Self {
        let mut coeffs: BTreeMap<CanonicalKey, Rational> = BTreeMap::new();
        for (key, c) in terms {
            debug_assert_eq!(key.vertex_count as usize, level);
            *coeffs.entry(key).or_insert_with(Rational::zero) += c;
        }
        coeffs.retain(|_, c| !c.is_zero());
        AlgebraElement { ty, level, coeffs }
    }

    pub fn zero(ty: FlagType, level: usize) -> Self {
        AlgebraElement { ty, level, coeffs: BTreeMap::new() }
    }

    pub fn from_flag(flag: &Flag) -> Self {
        Self::from_terms(*flag.flag_type(), flag.size(), [(flag.key(), Rational::from_integer(1.into()))])
    }

    /// A graph as an element of `A⁰`.
    pub fn from_graph(g: &SmallGraph) -> Self {
        Self::from_terms(
            FlagType::empty(0),
            g.vertex_count(),
            [(canonical_key(g), Rational::from_integer(1.into()))],
        )
    }

    pub fn flag_type(&self) -> &FlagType {
        &self.ty
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn coefficient(&self, key: &CanonicalKey) -> Rational {
        self.coeffs.get(key).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn coefficients(&self) -> &BTreeMap<CanonicalKey, Rational> {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Same as [`is_zero`](Self::is_zero): no stored coefficients.
    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn check_compatible(&self, other: &Self) -> Result<(), AlgebraError> {
        if self.ty != other.ty {
            return Err(AlgebraError::TypeMismatch);
        }
        if self.level != other.level {
            return Err(AlgebraError::LevelMismatch(self.level, other.level));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_compatible(other)?;
        let terms = self.coeffs.iter().chain(&other.coeffs).map(|(k, c)| (*k, c.clone()));
        Ok(Self::from_terms(self.ty, self.level, terms))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_compatible(other)?;
        let terms = self
            .coeffs
            .iter()
            .map(|(k, c)| (*k, c.clone()))
            .chain(other.coeffs.iter().map(|(k, c)| (*k, -c)));
        Ok(Self::from_terms(self.ty, self.level, terms))
    }

    pub fn scaled(&self, factor: &Rational) -> Self {
        Self::from_terms(self.ty, self.level, self.coeffs.iter().map(|(k, c)| (*k, c * factor)))
    }

    pub fn has_nonnegative_coefficients(&self) -> bool {
        self.coeffs.values().all(|c| !c.is_negative())
    }
}

type SharedTable<K, V> = Mutex<HashMap<K, Arc<V>>>;

fn cached<K: Eq + Hash + Clone, V>(
    cache: &'static OnceLock<SharedTable<K, V>>,
    key: K,
    build: impl FnOnce() -> Result<V, AlgebraError>,
) -> Result<Arc<V>, AlgebraError> {
    let cache = cache.get_or_init(Default::default);
    if let Some(hit) = cache.lock().unwrap().get(&key) {
        return Ok(hit.clone());
    }
    let value = Arc::new(build()?);
    cache.lock().unwrap().entry(key).or_insert(value.clone());
    Ok(value)
}

/// Key of the subflag of `g` (labels on `0..k`) induced by the labels and
/// the unlabeled vertices `part`.
fn subflag_key(g: &SmallGraph, k: usize, part: &[usize]) -> CanonicalKey {
    let vertices: Vec<usize> = (0..k).chain(part.iter().copied()).collect();
    flag_key(&g.induced(&vertices), k)
}

type LiftTable = HashMap<CanonicalKey, Vec<(CanonicalKey, Rational)>>;

/// For each size-`small` flag, its density in every size-`big` flag.
fn lift_table(ty: &FlagType, small: usize, big: usize) -> Result<Arc<LiftTable>, AlgebraError> {
    static CACHE: OnceLock<SharedTable<(FlagType, usize, usize), LiftTable>> = OnceLock::new();
    cached(&CACHE, (*ty, small, big), || {
        let k = ty.size();
        let total = binomial(big - k, small - k);
        let rows: Vec<(CanonicalKey, HashMap<CanonicalKey, u128>)> = flag_keys(ty, big)?
            .par_iter()
            .map(|key| {
                let g = key.to_graph();
                let mut counts: HashMap<CanonicalKey, u128> = HashMap::new();
                for_each_combination(big - k, small - k, |combo| {
                    let part: Vec<usize> = combo.iter().map(|&i| i + k).collect();
                    *counts.entry(subflag_key(&g, k, &part)).or_default() += 1;
                });
                (*key, counts)
            })
            .collect();
        let mut table = LiftTable::new();
        for (big_key, counts) in rows {
            for (small_key, count) in counts {
                table.entry(small_key).or_default().push((big_key, ratio(count, total)));
            }
        }
        Ok(table)
    })
}

/// Re-expresses `a` over flags of size `target`; evaluation is unchanged.
pub fn lift(a: &AlgebraElement, target: usize) -> Result<AlgebraElement, AlgebraError> {
    if target < a.level || target > MAX_FLAG_SIZE {
        return Err(AlgebraError::LevelOutOfRange(target));
    }
    if target == a.level {
        return Ok(a.clone());
    }
    let table = lift_table(&a.ty, a.level, target)?;
    let mut terms = Vec::new();
    for (key, c) in &a.coeffs {
        for (big, weight) in table.get(key).into_iter().flatten() {
            terms.push((*big, c * weight));
        }
    }
    Ok(AlgebraElement::from_terms(a.ty, target, terms))
}

type ProductTable = HashMap<(CanonicalKey, CanonicalKey), Vec<(CanonicalKey, Rational)>>;

/// `split(F₁, F₂; F)` for every product-size flag `F`: the probability that
/// a uniformly random ordered partition of the unlabeled vertices of `F`
/// into parts of sizes `left − k` and `right − k` induces `F₁` and `F₂`.
fn product_table(ty: &FlagType, left: usize, right: usize) -> Result<Arc<ProductTable>, AlgebraError> {
    static CACHE: OnceLock<SharedTable<(FlagType, usize, usize), ProductTable>> = OnceLock::new();
    cached(&CACHE, (*ty, left, right), || {
        let k = ty.size();
        let n = left + right - k;
        let free = n - k;
        let total = binomial(free, left - k);
        type SplitCounts = HashMap<(CanonicalKey, CanonicalKey), u128>;
        let rows: Vec<(CanonicalKey, SplitCounts)> = flag_keys(ty, n)?
            .par_iter()
            .map(|key| {
                let g = key.to_graph();
                let mut counts: HashMap<(CanonicalKey, CanonicalKey), u128> = HashMap::new();
                for_each_combination(free, left - k, |combo| {
                    let first: Vec<usize> = combo.iter().map(|&i| i + k).collect();
                    let second: Vec<usize> = (k..n).filter(|v| !first.contains(v)).collect();
                    let pair = (subflag_key(&g, k, &first), subflag_key(&g, k, &second));
                    *counts.entry(pair).or_default() += 1;
                });
                (*key, counts)
            })
            .collect();
        let mut table = ProductTable::new();
        for (key, counts) in rows {
            for (pair, count) in counts {
                table.entry(pair).or_default().push((key, ratio(count, total)));
            }
        }
        Ok(table)
    })
}

/// The flag-algebra product of two elements over the same type; the result
/// lives on flags of size `a.level + b.level − k`.
pub fn multiply(a: &AlgebraElement, b: &AlgebraElement) -> Result<AlgebraElement, AlgebraError> {
    if a.ty != b.ty {
        return Err(AlgebraError::TypeMismatch);
    }
    let k = a.ty.size();
    let n = a.level + b.level - k;
    if n > MAX_FLAG_SIZE {
        return Err(AlgebraError::LevelOutOfRange(n));
    }
    let table = product_table(&a.ty, a.level, b.level)?;
    let mut terms = Vec::new();
    for (ka, ca) in &a.coeffs {
        for (kb, cb) in &b.coeffs {
            let Some(targets) = table.get(&(*ka, *kb)) else {
                continue;
            };
            let c = ca * cb;
            for (key, weight) in targets {
                terms.push((*key, &c * weight));
            }
        }
    }
    Ok(AlgebraElement::from_terms(a.ty, n, terms))
}

type AverageTable = HashMap<CanonicalKey, (CanonicalKey, Rational)>;

/// For each flag `F`: its underlying model and `q_σ(F)`, the probability
/// that a uniformly random injective labeling of the underlying graph
/// reproduces `F`.
fn average_table(ty: &FlagType, n: usize) -> Result<Arc<AverageTable>, AlgebraError> {
    static CACHE: OnceLock<SharedTable<(FlagType, usize), AverageTable>> = OnceLock::new();
    cached(&CACHE, (*ty, n), || {
        let k = ty.size();
        let total = falling_factorial(n, k);
        let rows: Vec<(CanonicalKey, (CanonicalKey, Rational))> = flag_keys(ty, n)?
            .par_iter()
            .map(|key| {
                let g = key.to_graph();
                let mut hits = 0u128;
                for_each_combination(n, k, |chosen| {
                    crate::graph::for_each_permutation(k, |p| {
                        let labels: Vec<usize> = p.iter().map(|&i| chosen[i]).collect();
                        if g.induced(&labels) != *ty.graph() {
                            return;
                        }
                        let mut order = labels.clone();
                        order.extend((0..n).filter(|v| !labels.contains(v)));
                        if flag_key(&g.induced(&order), k) == *key {
                            hits += 1;
                        }
                    });
                });
                (*key, (canonical_key(&g), ratio(hits, total)))
            })
            .collect();
        Ok(rows.into_iter().collect())
    })
}

/// `⟦a⟧_σ`: forgets the labels, weighting each flag by `q_σ(F)`.
pub fn average(a: &AlgebraElement) -> Result<AlgebraElement, AlgebraError> {
    let table = average_table(&a.ty, a.level)?;
    let terms = a.coeffs.iter().map(|(key, c)| {
        let (model, q) = &table[key];
        (*model, c * q)
    });
    Ok(AlgebraElement::from_terms(FlagType::empty(0), a.level, terms.collect::<Vec<_>>()))
}

/// The complement involution on `A⁰`.
pub fn star(a: &AlgebraElement) -> Result<AlgebraElement, AlgebraError> {
    if !a.ty.is_empty_type() {
        return Err(AlgebraError::NonEmptyType);
    }
    let terms = a.coeffs.iter().map(|(key, c)| (canonical_key(&key.to_graph().complement()), c.clone()));
    Ok(AlgebraElement::from_terms(a.ty, a.level, terms.collect::<Vec<_>>()))
}

/// The scalar `c` at level `n`, i.e. `c · Σ_{F ∈ M_n} F`.
pub fn constant(c: &Rational, level: usize) -> Result<AlgebraElement, AlgebraError> {
    if level == 0 || level > MAX_FLAG_SIZE {
        return Err(AlgebraError::LevelOutOfRange(level));
    }
    let table = models(level)?;
    Ok(AlgebraElement::from_terms(
        FlagType::empty(0),
        level,
        table.keys().iter().map(|k| (*k, c.clone())),
    ))
}

/// `Σ_F a_F · p(F, G)`, exactly.
pub fn evaluate(a: &AlgebraElement, g: &SmallGraph) -> Result<Rational, AlgebraError> {
    if !a.ty.is_empty_type() {
        return Err(AlgebraError::NonEmptyType);
    }
    if g.vertex_count() < a.level {
        return Err(AlgebraError::GraphTooSmall { need: a.level, got: g.vertex_count() });
    }
    let mut counts: HashMap<CanonicalKey, u128> = HashMap::new();
    for_each_combination(g.vertex_count(), a.level, |subset| {
        *counts.entry(canonical_key(&g.induced(subset))).or_default() += 1;
    });
    let total = binomial(g.vertex_count(), a.level);
    let mut value = Rational::zero();
    for (key, count) in counts {
        if let Some(c) = a.coeffs.get(&key) {
            value += c * ratio(count, total);
        }
    }
    Ok(value)
}

/// A symmetric matrix together with the vector of algebra elements it is
/// applied to: the quadratic form `Σ_{a,b} M_ab · g_a g_b`.
#[derive(Debug, Clone)]
pub struct QuadraticFormSpec {
    ty: FlagType,
    matrix: RationalMatrix,
    entries: Vec<AlgebraElement>,
}

impl QuadraticFormSpec {
    pub fn new(ty: FlagType, matrix: RationalMatrix, entries: Vec<AlgebraElement>) -> Result<Self, AlgebraError> {
        if matrix.order() != entries.len() {
            return Err(AlgebraError::Dimension { order: matrix.order(), entries: entries.len() });
        }
        if !matrix.is_symmetric() {
            return Err(AlgebraError::NotSymmetric);
        }
        if let Some(first) = entries.first() {
            for e in &entries {
                if e.ty != ty {
                    return Err(AlgebraError::TypeMismatch);
                }
                if e.level != first.level {
                    return Err(AlgebraError::LevelMismatch(first.level, e.level));
                }
            }
        }
        Ok(QuadraticFormSpec { ty, matrix, entries })
    }

    pub fn flag_type(&self) -> &FlagType {
        &self.ty
    }

    pub fn matrix(&self) -> &RationalMatrix {
        &self.matrix
    }

    pub fn entries(&self) -> &[AlgebraElement] {
        &self.entries
    }
}

pub fn quadratic_form_value(q: &QuadraticFormSpec) -> Result<AlgebraElement, AlgebraError> {
    let d = q.entries.len();
    let k = q.ty.size();
    let level = q.entries.first().map_or(k, |e| 2 * e.level - k);
    let pairs: Vec<(usize, usize)> = (0..d).flat_map(|a| (a..d).map(move |b| (a, b))).collect();
    let parts: Vec<AlgebraElement> = pairs
        .par_iter()
        .filter(|(a, b)| !q.matrix.get(*a, *b).is_zero())
        .map(|&(a, b)| {
            let weight = if a == b { q.matrix.get(a, b).clone() } else { q.matrix.get(a, b) * Rational::from_integer(2.into()) };
            multiply(&q.entries[a], &q.entries[b]).map(|p| p.scaled(&weight))
        })
        .collect::<Result<_, _>>()?;
    let terms = parts.into_iter().flat_map(|p| p.coeffs.into_iter());
    Ok(AlgebraElement::from_terms(q.ty, level, terms.collect::<Vec<_>>()))
}
