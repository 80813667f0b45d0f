use proptest::prelude::*;

use qclab::mip::lp::{export_lp, read_lp};
use qclab::mip::{build_mip7, build_mip8, build_mip9, check, lift, MilpModel};
use qclab::oracle::{max_quasi_clique_bnb, max_quasi_clique_exhaustive};
use qclab::{is_gamma_clique, Graph, VertexSet};

/// Densities as exact fractions `(num, den)`, all representable at the
/// library's decimal density resolution.
const GAMMAS: [(u64, u64); 7] = [(1, 2), (3, 5), (7, 10), (3, 4), (4, 5), (9, 10), (1, 1)];

fn graph_strategy(min_n: usize, max_n: usize) -> impl Strategy<Value = Graph> {
    (min_n..=max_n, 0.1f64..0.95).prop_flat_map(|(n, p)| {
        proptest::collection::vec(proptest::bool::weighted(p), n * n.saturating_sub(1) / 2)
            .prop_map(move |bits| {
                let pairs = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
                Graph::new(n, pairs.zip(bits).filter(|(_, b)| *b).map(|(e, _)| e)).unwrap()
            })
    })
}

fn gamma_strategy() -> impl Strategy<Value = (u64, u64)> {
    proptest::sample::select(&GAMMAS[..])
}

fn subset(mask: u32, n: usize) -> VertexSet {
    (0..n).filter(|&v| mask >> v & 1 == 1).collect()
}

fn edges_within(g: &Graph, mask: u32) -> u64 {
    g.edges()
        .iter()
        .filter(|&&(u, v)| mask >> u & 1 == 1 && mask >> v & 1 == 1)
        .count() as u64
}

fn admissible(g: &Graph, mask: u32, (num, den): (u64, u64)) -> bool {
    let s = u64::from(mask.count_ones());
    s <= 1 || 2 * edges_within(g, mask) * den >= num * s * (s - 1)
}

/// Largest admissible subset size by plain enumeration with integer arithmetic.
fn brute_omega(g: &Graph, gamma: (u64, u64)) -> usize {
    (0..1u32 << g.n())
        .filter(|&m| admissible(g, m, gamma))
        .map(|m| m.count_ones() as usize)
        .max()
        .unwrap_or(0)
}

fn ratio((num, den): (u64, u64)) -> f64 {
    num as f64 / den as f64
}

fn models(g: &Graph, gamma: f64) -> Vec<MilpModel> {
    let n = g.n();
    vec![
        build_mip7(g, gamma, n.max(1) as f64, true).unwrap(),
        build_mip8(g, gamma, 0, n).unwrap(),
        build_mip9(g, gamma, 0, n).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lifted_sets_feasible_iff_gamma_clique(g in graph_strategy(1, 6), gq in gamma_strategy()) {
        let gamma = ratio(gq);
        for model in models(&g, gamma) {
            let f = model.meta.as_ref().unwrap().formulation;
            let mut best = 0.0f64;
            for mask in 0..1u32 << g.n() {
                let s = subset(mask, g.n());
                let report = check(&model, &lift(&g, gamma, &s, &f).unwrap()).unwrap();
                let expected = admissible(&g, mask, gq);
                prop_assert_eq!(report.feasible, expected, "{} set {:?}: {:?}", f.tag(), s, report.violated);
                prop_assert_eq!(is_gamma_clique(&g, &s, gamma).unwrap(), expected);
                if report.feasible {
                    prop_assert_eq!(report.objective, s.len() as f64);
                    best = best.max(report.objective);
                }
            }
            prop_assert_eq!(best as usize, brute_omega(&g, gq));
        }
    }

    #[test]
    fn lp_text_round_trips(g in graph_strategy(0, 9), gq in gamma_strategy(), lo in 0usize..4) {
        let gamma = ratio(gq);
        let n = g.n();
        let mut all = models(&g, gamma);
        all.push(build_mip7(&g, gamma, n.max(1) as f64, false).unwrap());
        if lo <= n {
            all.push(build_mip9(&g, gamma, lo, n).unwrap());
        }
        for m in all {
            let text = export_lp(&m);
            let back = read_lp(&text).unwrap();
            prop_assert_eq!(&back, &m);
            prop_assert_eq!(export_lp(&back), text);
        }
    }

    #[test]
    fn oracles_agree_with_enumeration(g in graph_strategy(1, 10), gq in gamma_strategy()) {
        let gamma = ratio(gq);
        let ex = max_quasi_clique_exhaustive(&g, gamma).unwrap();
        let bb = max_quasi_clique_bnb(&g, gamma, 0, g.n(), 1 << 30).unwrap();
        prop_assert_eq!(ex.size, brute_omega(&g, gq));
        prop_assert!(ex.certified_optimal && bb.certified_optimal);
        prop_assert_eq!(&bb.vertices, &ex.vertices);
        prop_assert!(is_gamma_clique(&g, &ex.vertices, gamma).unwrap());
        prop_assert_eq!(ex.size, ex.vertices.len());
        // lexicographically smallest among the maximum sets
        let first = (0..1u32 << g.n())
            .filter(|&m| m.count_ones() as usize == ex.size && admissible(&g, m, gq))
            .map(|m| subset(m, g.n()))
            .min_by(|a, b| a.as_slice().cmp(b.as_slice()))
            .unwrap();
        prop_assert_eq!(&ex.vertices, &first);
    }

    #[test]
    fn oracle_size_is_monotone_in_gamma(g in graph_strategy(1, 12)) {
        let sizes: Vec<usize> = GAMMAS
            .iter()
            .map(|&gq| max_quasi_clique_exhaustive(&g, ratio(gq)).unwrap().size)
            .collect();
        prop_assert!(sizes.windows(2).all(|w| w[0] >= w[1]), "{:?}", sizes);
    }

    #[test]
    fn full_density_is_the_clique_number(g in graph_strategy(1, 12)) {
        let n = g.n();
        let clique_number = (0..1u32 << n)
            .filter(|&m| {
                let s = u64::from(m.count_ones());
                2 * edges_within(&g, m) == s * s.saturating_sub(1)
            })
            .map(|m| m.count_ones() as usize)
            .max()
            .unwrap();
        prop_assert_eq!(max_quasi_clique_exhaustive(&g, 1.0).unwrap().size, clique_number);
        prop_assert_eq!(max_quasi_clique_bnb(&g, 1.0, 0, n, 1 << 30).unwrap().size, clique_number);
    }

    #[test]
    fn bnb_respects_size_window(g in graph_strategy(2, 10), gq in gamma_strategy(), lo in 0usize..10, width in 0usize..10) {
        let n = g.n();
        let lo = lo.min(n);
        let hi = (lo + width).min(n);
        let gamma = ratio(gq);
        let bb = max_quasi_clique_bnb(&g, gamma, lo, hi, 1 << 30).unwrap();
        let expected = (0..1u32 << n)
            .filter(|&m| (lo..=hi).contains(&(m.count_ones() as usize)) && admissible(&g, m, gq))
            .map(|m| m.count_ones() as usize)
            .max();
        match expected {
            Some(k) if k > 0 => {
                prop_assert_eq!(bb.size, k);
                prop_assert!(is_gamma_clique(&g, &bb.vertices, gamma).unwrap());
            }
            _ => prop_assert!(bb.vertices.is_empty()),
        }
    }
}

#[test]
fn truncated_search_still_returns_a_gamma_clique() {
    let mut edges = Vec::new();
    for u in 0..60usize {
        for v in u + 1..60 {
            if (u * 7 + v * 13) % 5 < 3 {
                edges.push((u, v));
            }
        }
    }
    let g = Graph::new(60, edges).unwrap();
    let r = max_quasi_clique_bnb(&g, 0.8, 0, 60, 2_000).unwrap();
    assert!(!r.certified_optimal);
    assert!(r.nodes <= 2_000);
    assert!(is_gamma_clique(&g, &r.vertices, 0.8).unwrap());
}
