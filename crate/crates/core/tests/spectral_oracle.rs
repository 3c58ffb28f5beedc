mod common;

use common::{jacobi_singular_values, normalized_matrix, second_singular_oracle};
use fortify::spectral::{
    complete_bipartite, normalized_adjacency, perfect_matching, sample_permutation_union, second_singular_value,
    shift_union_graph, singular_values, BipartiteGraph,
};
use proptest::prelude::*;

fn lambda(g: &BipartiteGraph) -> f64 {
    second_singular_value(&normalized_adjacency(g).unwrap())
}

/// Circulant spectrum of a shift union on `Z_n`: `|Σ_s ω^{ks}| / d`.
fn circulant_spectrum(n: usize, shifts: &[usize]) -> Vec<f64> {
    let d = shifts.len() as f64;
    let mut sv: Vec<f64> = (0..n)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for &s in shifts {
                let t = 2.0 * std::f64::consts::PI * (k * s) as f64 / n as f64;
                re += t.cos();
                im += t.sin();
            }
            (re * re + im * im).sqrt() / d
        })
        .collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

#[test]
fn identity_plus_shift_on_z4() {
    let g = shift_union_graph(4, &[0, 1]).unwrap();
    assert!((lambda(&g) - 2f64.sqrt() / 2.0).abs() < 1e-12);
}

#[test]
fn shift_unions_match_circulant_spectrum() {
    for n in 2..=12 {
        for shifts in [vec![0, 1], vec![0, 1, 3], vec![0, 2, 5, 7]] {
            let shifts: Vec<usize> = shifts.into_iter().filter(|&s| s < n).collect();
            if shifts.len() < 2 {
                continue;
            }
            let g = shift_union_graph(n, &shifts).unwrap();
            let want = circulant_spectrum(n, &shifts);
            let got = singular_values(&normalized_adjacency(&g).unwrap());
            for (a, b) in got.iter().zip(&want) {
                assert!((a - b).abs() < 1e-10, "n={n} shifts={shifts:?}: {got:?} vs {want:?}");
            }
        }
    }
}

#[test]
fn complete_and_matching_extremes() {
    for n in 1..=6 {
        assert!(lambda(&complete_bipartite(n, n).unwrap()).abs() < 1e-12);
        if n >= 2 {
            assert!((lambda(&perfect_matching(n).unwrap()) - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn jacobi_oracle_agrees_on_random_unions_up_to_32() {
    let mut checked = 0;
    for n in [2, 3, 5, 8, 13, 21, 32] {
        for d in 1..=4.min(n) {
            for attempt in 0..4 {
                let g = sample_permutation_union(n, d, 91, attempt).unwrap();
                let a = lambda(&g);
                let b = second_singular_oracle(&g);
                assert!((a - b).abs() < 1e-10, "n={n} d={d}: {a} vs {b}");
                checked += 1;
            }
        }
    }
    assert!(checked > 80);
}

#[test]
fn jacobi_oracle_full_spectrum_on_unbalanced_graphs() {
    for (l, rr) in [(2, 5), (6, 3), (1, 4), (7, 7)] {
        let g = complete_bipartite(l, rr).unwrap();
        let mut got = singular_values(&normalized_adjacency(&g).unwrap());
        let mut want = jacobi_singular_values(&normalized_matrix(&g));
        got.truncate(want.len().min(got.len()));
        want.truncate(got.len());
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn top_singular_value_is_one_and_lambda_in_unit_interval(n in 2usize..16, d in 1usize..5, seed in any::<u64>()) {
        let d = d.min(n);
        let g = sample_permutation_union(n, d, seed, 0).unwrap();
        let sv = singular_values(&normalized_adjacency(&g).unwrap());
        prop_assert!((sv[0] - 1.0).abs() < 1e-9);
        let l = lambda(&g);
        prop_assert!((-1e-12..=1.0 + 1e-9).contains(&l));
        prop_assert!((l - second_singular_oracle(&g)).abs() < 1e-10);
    }

    #[test]
    fn relabeling_preserves_lambda(n in 3usize..10, seed in any::<u64>(), rot in 0usize..10) {
        let g = sample_permutation_union(n, 2, seed, 0).unwrap();
        let edges: Vec<(usize, usize)> = g.edges().iter().map(|&(l, r)| ((l + rot) % n, (r + 2 * rot) % n)).collect();
        let h = BipartiteGraph::new(n, n, edges).unwrap();
        prop_assert!((lambda(&g) - lambda(&h)).abs() < 1e-10);
    }
}
