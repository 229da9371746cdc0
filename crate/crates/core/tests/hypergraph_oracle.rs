mod common;

use std::collections::{BTreeMap, BTreeSet};

use asymrado::catalogue::profile;
use asymrado::hypergraph::{projection_counts, OrderedSolutionHypergraph};
use asymrado::linalg::{ColumnSet, Rational};
use num_bigint::BigInt;
use proptest::prelude::*;

fn edges_of(h: &OrderedSolutionHypergraph) -> Vec<Vec<u32>> {
    h.edges().map(|e| e.to_vec()).collect()
}

#[test]
fn edges_projections_and_streaming_counts() {
    for name in ["schur", "ap3", "ap4"] {
        let p = profile(name).unwrap();
        let rows = p.matrix().to_i64_rows().unwrap();
        for n in [1, 5, 12, 20] {
            let h = OrderedSolutionHypergraph::enumerate(&p, n).unwrap();
            let naive = common::naive_solutions(&rows, n);
            assert_eq!(edges_of(&h), naive, "{name} n={n}");
            let streamed = projection_counts(&p, n).unwrap();
            for (set, count) in streamed {
                let oracle = common::project_oracle(&naive, set.bits());
                assert_eq!(count, oracle.len() as u64, "{name} n={n} {set}");
                if naive.is_empty() {
                    continue;
                }
                let proj = h.project(set).unwrap();
                let got: BTreeMap<Vec<u32>, u64> = proj.iter().map(|(k, c)| (k.to_vec(), c)).collect();
                assert_eq!(got, oracle);
            }
        }
    }
}

#[test]
fn window_degrees_match_brute_force() {
    let p = profile("ap3").unwrap();
    let h = OrderedSolutionHypergraph::enumerate(&p, 15).unwrap();
    let edges = edges_of(&h);
    for window in ColumnSet::nonempty_subsets(3) {
        let keys: BTreeSet<Vec<u32>> = common::project_oracle(&edges, window.bits()).into_keys().collect();
        for inner in window.subsets().filter(|s| !s.is_empty()) {
            let positions: Vec<usize> = window.iter().enumerate().filter(|(_, c)| inner.contains(*c)).map(|(i, _)| i).collect();
            let mut degree: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
            for key in &keys {
                *degree.entry(positions.iter().map(|&i| key[i]).collect()).or_insert(0) += 1;
            }
            for (u, d) in degree {
                assert_eq!(h.degree_in_window(inner, window, &u).unwrap(), d);
            }
        }
    }
}

/// Tameness constant straight from the definition over all pairs.
fn tameness_oracle(edges: &[Vec<u32>], k: usize) -> Rational {
    let mut best = Rational::from_integer(BigInt::from(0));
    for w in 1u32..1 << k {
        let hw: BTreeSet<Vec<u32>> = common::project_oracle(edges, w).into_keys().collect();
        let mut i = (w - 1) & w;
        while i != 0 {
            let hi = common::project_oracle(edges, i).len() as i64;
            let idx: Vec<usize> = (0..k).filter(|j| w >> j & 1 == 1).collect();
            let mut deg: BTreeMap<Vec<u32>, i64> = BTreeMap::new();
            for key in &hw {
                let u: Vec<u32> = idx.iter().enumerate().filter(|(_, j)| i >> **j & 1 == 1).map(|(p, _)| key[p]).collect();
                *deg.entry(u).or_insert(0) += 1;
            }
            let max = *deg.values().max().unwrap();
            let value = Rational::new(BigInt::from(max * hi), BigInt::from(hw.len() as i64));
            if value > best {
                best = value;
            }
            i = (i - 1) & w;
        }
    }
    best
}

#[test]
fn tameness_matches_definition() {
    for (name, n) in [("schur", 14), ("ap3", 16), ("ap4", 14)] {
        let p = profile(name).unwrap();
        let h = OrderedSolutionHypergraph::enumerate(&p, n).unwrap();
        let t = h.tameness().unwrap();
        assert_eq!(t.constant, tameness_oracle(&edges_of(&h), p.k()), "{name}");
        assert!(t.cherry_holds);
    }
}

/// `c_j = Σ_v max_{T ∋ v, |T| = j} #{edges ⊇ T} / (k e)` by scanning all `j`-sets.
fn codegree_oracle(edges: &[BTreeSet<u32>], n: u32, k: usize) -> Vec<Rational> {
    let e = edges.len() as i64;
    let mut out = Vec::new();
    for j in 2..=k {
        let mut best = vec![0i64; n as usize + 1];
        let mut t: Vec<u32> = Vec::new();
        fn walk(n: u32, j: usize, start: u32, t: &mut Vec<u32>, edges: &[BTreeSet<u32>], best: &mut [i64]) {
            if t.len() == j {
                let d = edges.iter().filter(|e| t.iter().all(|x| e.contains(x))).count() as i64;
                for &v in t.iter() {
                    best[v as usize] = best[v as usize].max(d);
                }
                return;
            }
            for x in start..=n {
                t.push(x);
                walk(n, j, x + 1, t, edges, best);
                t.pop();
            }
        }
        walk(n, j, 1, &mut t, edges, &mut best);
        let total: i64 = best.iter().sum();
        out.push(Rational::new(BigInt::from(total), BigInt::from(k as i64 * e)));
    }
    out
}

#[test]
fn codegree_coefficients_match_definition() {
    for (name, n) in [("schur", 15), ("ap3", 15), ("ap4", 13)] {
        let p = profile(name).unwrap();
        let h = OrderedSolutionHypergraph::enumerate(&p, n).unwrap();
        let unordered = h.unordered();
        let sets: Vec<BTreeSet<u32>> = unordered.edges().iter().map(|e| e.iter().copied().collect()).collect();
        let expected = codegree_oracle(&sets, n, p.k());
        assert_eq!(unordered.codegree_function().unwrap().coefficients(), &expected[..], "{name}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn projection_sizes_bounded_by_edges(n in 3u32..40, bits in 1u32..8) {
        let p = profile("schur").unwrap();
        let h = OrderedSolutionHypergraph::enumerate(&p, n).unwrap();
        prop_assume!(!h.is_empty());
        let set = ColumnSet::from_bits(bits);
        let proj = h.project(set).unwrap();
        prop_assert!(proj.len() <= h.edge_count());
        prop_assert_eq!(proj.total(), h.edge_count() as u64);
    }
}
