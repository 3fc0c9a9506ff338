//! Injective homomorphism densities `t₀(H; G)` and induced densities
//! `p(H, G)`, both by exhaustive enumeration.

use num_traits::Zero;
use rayon::prelude::*;

use crate::algebra::AlgebraElement;
use crate::flag::FlagType;
use crate::graph::{canonical_key, for_each_combination, ModelTable, SmallGraph};
use crate::rational::{binomial, falling_factorial, ratio, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DensityError {
    #[error("pattern has {pattern} vertices but the host only {host}")]
    PatternTooLarge { pattern: usize, host: usize },
}

fn check_sizes(h: &SmallGraph, g: &SmallGraph) -> Result<(), DensityError> {
    if h.vertex_count() > g.vertex_count() {
        return Err(DensityError::PatternTooLarge { pattern: h.vertex_count(), host: g.vertex_count() });
    }
    Ok(())
}

/// Number of injective maps `V(H) → V(G)` sending every edge of `H` to an
/// edge of `G`. Zero when `H` has more vertices than `G`.
pub fn count_injective_homs(h: &SmallGraph, g: &SmallGraph) -> u128 {
    fn extend(h: &SmallGraph, g: &SmallGraph, image: &mut Vec<usize>, used: u16) -> u128 {
        let next = image.len();
        if next == h.vertex_count() {
            return 1;
        }
        // Edges of H from `next` back to already-mapped vertices.
        let back = h.neighbours(next) & ((1u16 << next) - 1);
        let mut total = 0;
        for target in 0..g.vertex_count() {
            if used >> target & 1 == 1 {
                continue;
            }
            let row = g.neighbours(target);
            let ok = (0..next).all(|u| back >> u & 1 == 0 || row >> image[u] & 1 == 1);
            if ok {
                image.push(target);
                total += extend(h, g, image, used | 1 << target);
                image.pop();
            }
        }
        total
    }
    if h.vertex_count() > g.vertex_count() {
        return 0;
    }
    extend(h, g, &mut Vec::with_capacity(h.vertex_count()), 0)
}

/// Probability that a uniformly random injection `V(H) → V(G)` is a
/// homomorphism.
pub fn t0(h: &SmallGraph, g: &SmallGraph) -> Result<Rational, DensityError> {
    check_sizes(h, g)?;
    let total = falling_factorial(g.vertex_count(), h.vertex_count());
    Ok(ratio(count_injective_homs(h, g), total))
}

/// Number of `|V(H)|`-subsets of `V(G)` inducing a copy of `H`.
pub fn count_induced_copies(h: &SmallGraph, g: &SmallGraph) -> u128 {
    let key = canonical_key(h);
    let edges = h.edge_count();
    let mut count = 0u128;
    for_each_combination(g.vertex_count(), h.vertex_count(), |subset| {
        let sub = g.induced(subset);
        if sub.edge_count() == edges && canonical_key(&sub) == key {
            count += 1;
        }
    });
    count
}

/// Probability that a uniformly random `|V(H)|`-subset of `V(G)` induces a
/// copy of `H`.
pub fn induced_density(h: &SmallGraph, g: &SmallGraph) -> Result<Rational, DensityError> {
    check_sizes(h, g)?;
    let total = binomial(g.vertex_count(), h.vertex_count());
    Ok(ratio(count_induced_copies(h, g), total))
}

/// `Ĥ = Σ_{F ∈ M_n} t₀(H; F) F`, the level-`n` element whose evaluation on
/// any graph is the injective homomorphism density of `H`.
pub fn hat(h: &SmallGraph, models: &ModelTable) -> Result<AlgebraElement, DensityError> {
    let n = models.order();
    if h.vertex_count() > n {
        return Err(DensityError::PatternTooLarge { pattern: h.vertex_count(), host: n });
    }
    let total = falling_factorial(n, h.vertex_count());
    let coefficients: Vec<_> = models
        .keys()
        .par_iter()
        .zip(models.models().par_iter())
        .map(|(key, f)| (*key, ratio(count_injective_homs(h, f), total)))
        .filter(|(_, c)| !c.is_zero())
        .collect();
    Ok(AlgebraElement::from_terms(FlagType::empty(0), n, coefficients))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{models, SmallGraph};
    use crate::rational::{integer, rational};

    #[test]
    fn injective_counts() {
        assert_eq!(count_injective_homs(&SmallGraph::complete(2), &SmallGraph::complete(3)), 6);
        assert_eq!(count_injective_homs(&SmallGraph::complete(3), &SmallGraph::cycle(5)), 0);
        let w5 = SmallGraph::wheel(5);
        assert_eq!(count_injective_homs(&w5, &w5), 10);
        assert_eq!(count_injective_homs(&SmallGraph::complete(4), &SmallGraph::complete(3)), 0);
        assert_eq!(count_injective_homs(&SmallGraph::empty(3), &SmallGraph::empty(5)), 60);
    }

    #[test]
    fn t0_examples() {
        let w5 = SmallGraph::wheel(5);
        assert_eq!(t0(&w5, &SmallGraph::complete(6)).unwrap(), integer(1));
        assert_eq!(t0(&w5, &SmallGraph::cycle(6)).unwrap(), integer(0));
        assert_eq!(t0(&w5, &w5).unwrap(), rational(1, 72));
        assert!(t0(&w5, &SmallGraph::complete(5)).is_err());
    }

    #[test]
    fn induced_examples() {
        let k2 = SmallGraph::complete(2);
        assert_eq!(induced_density(&k2, &SmallGraph::path(3)).unwrap(), rational(2, 3));
        assert_eq!(induced_density(&k2, &k2).unwrap(), integer(1));
        let mut k4_minus = SmallGraph::complete(4);
        k4_minus.set_edge(0, 1, false);
        assert_eq!(induced_density(&SmallGraph::complete(3), &k4_minus).unwrap(), rational(1, 2));
        assert!(induced_density(&SmallGraph::complete(3), &k2).is_err());
    }

    #[test]
    fn hat_examples() {
        let m6 = models(6).unwrap();
        let w5_hat = hat(&SmallGraph::wheel(5), m6).unwrap();
        assert_eq!(w5_hat.level(), 6);
        assert_eq!(w5_hat.coefficient(&canonical_key(&SmallGraph::complete(6))), integer(1));
        assert_eq!(w5_hat.coefficient(&canonical_key(&SmallGraph::cycle(6))), integer(0));

        let m2 = models(2).unwrap();
        let rho = hat(&SmallGraph::complete(2), m2).unwrap();
        let coeffs: Vec<_> = m2.keys().iter().map(|k| rho.coefficient(k)).collect();
        assert_eq!(coeffs, vec![integer(0), integer(1)]);
        assert!(hat(&SmallGraph::wheel(5), models(5).unwrap()).is_err());
    }
}
