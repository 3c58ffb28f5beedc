mod common;

use common::{brute_value, outer_value_direct, r};
use fortify::arith::rational_pow;
use fortify::bireg::biregularize_graphical;
use fortify::concat::{concatenate, fortification_violation, reevaluate_witness, SearchMode, Verdict};
use fortify::game::{classical_value, is_biregular, substrategy_value, tensor};
use fortify::io::{game_to_json, graph_to_json, parse_game, parse_graph, Provenance};
use fortify::library::{random_game, random_graphical_game, random_substrategy};
use fortify::ordered::{build_injection_family, disjoint_union, tilde_graph, FamilyKind};
use fortify::plan::gap_amplification_plan;
use fortify::spectral::{sample_permutation_union, shift_union_graph, BipartiteExpander};
use fortify::{Game, Predicate, Rational};
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn game(seed: u64, xs: usize, ys: usize, a: usize, b: usize) -> Game {
    random_game(&mut ChaCha8Rng::seed_from_u64(seed), xs, ys, a, b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn value_matches_brute_force(seed in any::<u64>(), xs in 1usize..4, ys in 1usize..4, a in 1usize..3, b in 1usize..4) {
        let g = game(seed, xs, ys, a, b);
        prop_assert_eq!(classical_value(&g).unwrap(), brute_value(&g));
    }

    #[test]
    fn adding_wins_never_lowers_value(seed in any::<u64>(), idx in any::<usize>()) {
        let g = game(seed, 3, 2, 2, 2);
        let Predicate::Boolean(mut p) = g.predicate().clone() else { unreachable!() };
        let before = classical_value(&g).unwrap();
        let i = idx % p.len();
        p[i] = true;
        let h = Game::new(3, 2, 2, 2, g.mu_entries().to_vec(), Predicate::Boolean(p)).unwrap();
        prop_assert!(classical_value(&h).unwrap() >= before);
    }

    #[test]
    fn product_value_is_sandwiched(s1 in any::<u64>(), s2 in any::<u64>()) {
        let g = game(s1, 2, 2, 2, 2);
        let h = game(s2, 2, 1, 2, 2);
        let (vg, vh) = (classical_value(&g).unwrap(), classical_value(&h).unwrap());
        let v = classical_value(&tensor(&g, &h).unwrap()).unwrap();
        prop_assert!(v >= &vg * &vh);
        prop_assert!(v <= vg.clone().min(vh.clone()));
    }

    #[test]
    fn game_json_round_trip(seed in any::<u64>(), xs in 1usize..4, ys in 1usize..4) {
        let g = game(seed, xs, ys, 2, 3);
        let text = game_to_json(&g, &Provenance::new());
        let (h, _) = parse_game(&text).unwrap();
        prop_assert_eq!(game_to_json(&h, &Provenance::new()), text);
        prop_assert_eq!(h, g);
    }

    #[test]
    fn graph_json_round_trip(n in 1usize..9, d in 1usize..4, seed in any::<u64>()) {
        let g = sample_permutation_union(n, d.min(n), seed, 0).unwrap();
        prop_assert_eq!(parse_graph(&graph_to_json(&g)).unwrap(), g);
    }

    #[test]
    fn outer_distribution_is_a_distribution(seed in any::<u64>(), n in 2usize..5, d in 1usize..3) {
        let g = game(seed, n, n, 2, 2);
        let m = BipartiteExpander::certify(sample_permutation_union(n, d, seed, 1).unwrap()).unwrap();
        let p = BipartiteExpander::certify(sample_permutation_union(n, d, seed, 2).unwrap()).unwrap();
        let cg = concatenate(&m, &g, &p).unwrap();
        let total: Rational = cg.outer_mu().iter().sum();
        prop_assert!(total.is_one());
    }

    #[test]
    fn induced_value_matches_direct_sampling(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_game(&mut rng, 3, 3, 2, 2);
        let m = BipartiteExpander::certify(shift_union_graph(3, &[0, 1]).unwrap()).unwrap();
        let p = BipartiteExpander::certify(sample_permutation_union(3, 2, seed, 0).unwrap()).unwrap();
        let cg = concatenate(&m, &g, &p).unwrap();
        let (ao, bo) = cg.outer_alphabet();
        let f = random_substrategy(&mut rng, 3, ao as usize);
        let h = random_substrategy(&mut rng, 3, bo as usize);
        let direct = outer_value_direct(&g, m.graph(), p.graph(), &f, &h);
        let outer = substrategy_value(&cg.outer_game().unwrap(), &f, &h).unwrap();
        let induced = substrategy_value(&g, &cg.induce_left(&f).unwrap(), &cg.induce_right(&h).unwrap()).unwrap();
        prop_assert_eq!(&direct, &outer);
        prop_assert_eq!(&direct, &induced);
    }

    #[test]
    fn witness_reevaluates_to_reported_violation(seed in any::<u64>(), eps in 0i64..3) {
        let g = game(seed, 2, 2, 2, 2);
        let m = BipartiteExpander::certify(sample_permutation_union(2, 1, seed, 0).unwrap()).unwrap();
        let p = BipartiteExpander::certify(shift_union_graph(2, &[0, 1]).unwrap()).unwrap();
        let cg = concatenate(&m, &g, &p).unwrap();
        let rep = fortification_violation(&cg, &r(eps, 8), &r(0, 1), SearchMode::Exact, 1 << 24).unwrap();
        prop_assert_eq!(reevaluate_witness(&cg, &rep).unwrap(), rep.max_violation.clone().unwrap());
        let asc = fortification_violation(
            &cg, &r(eps, 8), &r(0, 1), SearchMode::Ascent { restarts: 8, seed }, 1 << 24,
        ).unwrap();
        prop_assert!(asc.max_violation.unwrap() <= rep.max_violation.unwrap());
        prop_assert!(asc.verdict != Verdict::Fortified);
    }

    #[test]
    fn graphical_biregularization_is_uniform(seed in any::<u64>(), xs in 1usize..4, ys in 1usize..4, extra in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graphical_game(&mut rng, xs, ys, 2, 2, xs.max(ys) + extra);
        let b = biregularize_graphical(&g).unwrap();
        prop_assert!(is_biregular(&b.game));
        prop_assert_eq!(classical_value(&b.game).unwrap(), classical_value(&g).unwrap());
    }

    #[test]
    fn disjoint_union_keeps_value(seed in any::<u64>(), l in 1usize..4) {
        let g = game(seed, 2, 2, 2, 2);
        prop_assert_eq!(classical_value(&disjoint_union(&g, l).unwrap()).unwrap(), classical_value(&g).unwrap());
    }

    #[test]
    fn tilde_graph_is_balanced_regular(n in 2usize..7, d in 1usize..4, l in 3usize..6, seed in any::<u64>()) {
        let d = d.min(n).min(l);
        let m = sample_permutation_union(n, d, seed, 0).unwrap();
        let fam = build_injection_family(d, l, FamilyKind::Full, 1 << 20).unwrap();
        let t = tilde_graph(&m, &fam).unwrap();
        prop_assert_eq!(t.left_regular_degree(), Some(d));
        prop_assert_eq!(t.right_regular_degree(), Some(d * fam.len() / l));
    }

    #[test]
    fn plan_is_minimal_and_sound(tn in 1i64..20, bn in 1i64..20, sigma in 1u64..9) {
        let (tau, beta) = (r(tn, 20), r(bn, 20));
        let p = gap_amplification_plan(sigma, &tau, &beta).unwrap();
        prop_assert!(p.satisfies_invariants());
        let base = Rational::one() - &tau / r(2, 1);
        prop_assert!(rational_pow(&base, p.m - 1) > &beta / r(2, 1));
        prop_assert!(p.delta > Rational::zero());
    }
}
