//! `evaluate(Ŵ5 + Ŵ5*, G)` against direct counting in `G` and its complement.

use flagcert::algebra::{evaluate, star};
use flagcert::density::hat;
use flagcert::graph::models;
use flagcert::rational::ratio;
use flagcert::SmallGraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn injective_hits(h: &SmallGraph, g: &SmallGraph, image: &mut Vec<usize>) -> (u128, u128) {
    if image.len() == h.vertex_count() {
        let hit = h.edges().all(|(a, b)| g.has_edge(image[a], image[b]));
        return (u128::from(hit), 1);
    }
    let (mut hits, mut total) = (0, 0);
    for v in 0..g.vertex_count() {
        if !image.contains(&v) {
            image.push(v);
            let (a, b) = injective_hits(h, g, image);
            image.pop();
            hits += a;
            total += b;
        }
    }
    (hits, total)
}

#[test]
fn wheel_identity_lhs_evaluates_to_brute_force_density() {
    let w5 = SmallGraph::wheel(5);
    let h = hat(&w5, models(6).unwrap()).unwrap();
    let lhs = h.checked_add(&star(&h).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0x77686565);
    for case in 0..100 {
        let n = rng.gen_range(6..=9);
        let mut g = SmallGraph::empty(n);
        for u in 0..n {
            for v in u + 1..n {
                g.set_edge(u, v, rng.gen_bool(0.5));
            }
        }
        let (a, total) = injective_hits(&w5, &g, &mut Vec::new());
        let (b, _) = injective_hits(&w5, &g.complement(), &mut Vec::new());
        assert_eq!(evaluate(&lhs, &g).unwrap(), ratio(a + b, total), "case {case}: {g:?}");
    }
}

#[test]
fn complete_and_empty_hosts() {
    let w5 = SmallGraph::wheel(5);
    let h = hat(&w5, models(6).unwrap()).unwrap();
    let lhs = h.checked_add(&star(&h).unwrap()).unwrap();
    for n in 6..=9 {
        assert_eq!(evaluate(&lhs, &SmallGraph::complete(n)).unwrap(), ratio(1, 1));
        assert_eq!(evaluate(&lhs, &SmallGraph::empty(n)).unwrap(), ratio(1, 1));
    }
}
