//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails. Each criterion also has a wall-clock budget.

mod common;

use std::time::{Duration, Instant};

use common::{brute_value, brute_value_one_sided, outer_value_direct, r};
use fortify::arith::{rational_pow, to_f64};
use fortify::bireg::{biregularize, biregularize_graphical};
use fortify::concat::{
    concatenate, fortification_violation, pointwise_bound_check, strong_implies_combinatorial, SearchMode,
};
use fortify::game::{classical_value, is_biregular, substrategy_value};
use fortify::library::{chsh, parity_game, random_biregular_game, random_game, random_graphical_game, random_substrategy};
use fortify::multiplayer::{concatenate_multiplayer, multiplayer_proof_check};
use fortify::ordered::{
    build_injection_family, is_prime, ordered_fortify, ordered_sampling_distribution, verify_tilde_spectral_claim,
    FamilyKind,
};
use fortify::repetition::{repetition_bound_check, repetition_eta, step_bound_check};
use fortify::spectral::{
    check_correlated_averages, check_expander_averaging, complete_bipartite, perfect_matching,
    sample_permutation_union, shift_union_graph, BipartiteExpander, BipartiteGraph,
};
use fortify::Rational;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CAP: u128 = 1 << 32;
const SLACK: f64 = 1e-9;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn expander(g: BipartiteGraph) -> BipartiteExpander {
    BipartiteExpander::certify(g).expect("graph certifies")
}

fn rng(tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0xF0_57_1F_00 ^ tag)
}

/// Simple `d`-regular graph on `n + n` vertices: `d` distinct shifts with
/// both sides independently relabeled.
fn relabeled_shift_union(rng: &mut ChaCha8Rng, n: usize, d: usize) -> BipartiteGraph {
    let mut shifts: Vec<usize> = (0..n).collect();
    shifts.shuffle(rng);
    shifts.truncate(d);
    let mut pl: Vec<usize> = (0..n).collect();
    let mut pr: Vec<usize> = (0..n).collect();
    pl.shuffle(rng);
    pr.shuffle(rng);
    let edges = (0..n)
        .flat_map(|i| shifts.iter().map(move |&s| (i, (i + s) % n)))
        .map(|(i, j)| (pl[i], pr[j]))
        .collect();
    BipartiteGraph::new(n, n, edges).unwrap()
}

fn value_preservation() -> Outcome {
    let mut rng = rng(1);
    for i in 0..100 {
        let (xs, ys) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
        let (a, b) = (rng.gen_range(1..=2), rng.gen_range(1..=2));
        let g = random_game(&mut rng, xs, ys, a, b);
        let dm = rng.gen_range(1..=2).min(xs);
        let dp = rng.gen_range(1..=2).min(ys);
        let m = expander(sample_permutation_union(xs, dm, i, 0).unwrap());
        let p = expander(sample_permutation_union(ys, dp, i, 1).unwrap());
        let outer = concatenate(&m, &g, &p).unwrap().outer_game().unwrap();
        let inner = brute_value(&g);
        ensure(classical_value(&g).unwrap() == inner, || format!("instance {i}: solver disagrees with brute force"))?;
        let vo = classical_value(&outer).unwrap();
        ensure(vo == inner, || format!("instance {i}: outer {vo} vs inner {inner}"))?;
    }
    Ok("100 games, all equal".into())
}

fn induced_value_identity() -> Outcome {
    let mut rng = rng(2);
    let mut pairs = 0;
    for i in 0..50u64 {
        let n = rng.gen_range(2..=3);
        let g = random_game(&mut rng, n, n, 2, 2);
        let m = expander(sample_permutation_union(n, 2, i, 0).unwrap());
        let p = expander(sample_permutation_union(n, rng.gen_range(1..=2), i, 1).unwrap());
        let cg = concatenate(&m, &g, &p).unwrap();
        let outer = cg.outer_game().unwrap();
        let (ao, bo) = cg.outer_alphabet();
        for _ in 0..10 {
            let f = random_substrategy(&mut rng, n, ao as usize);
            let h = random_substrategy(&mut rng, n, bo as usize);
            let vo = substrategy_value(&outer, &f, &h).unwrap();
            let vi = substrategy_value(&g, &cg.induce_left(&f).unwrap(), &cg.induce_right(&h).unwrap()).unwrap();
            let direct = outer_value_direct(&g, m.graph(), p.graph(), &f, &h);
            ensure(vo == vi && vo == direct, || format!("game {i}: outer {vo}, induced {vi}, sampled {direct}"))?;
            pairs += 1;
        }
    }
    Ok(format!("{pairs} substrategy pairs, all equal"))
}

fn pointwise_bound() -> Outcome {
    let mut rng = rng(3);
    let mut worst = f64::INFINITY;
    for i in 0..20 {
        let n = rng.gen_range(2..=4);
        let g = random_biregular_game(&mut rng, n, 2, 2);
        let s = rng.gen_range(1..n);
        let m = expander(shift_union_graph(n, &[0, s]).unwrap());
        let p = expander(shift_union_graph(n, &[0, rng.gen_range(1..n)]).unwrap());
        let rep = pointwise_bound_check(&concatenate(&m, &g, &p).unwrap(), CAP).unwrap();
        worst = worst.min(rep.worst_margin);
        ensure(rep.passed, || format!("instance {i}: margin {:.3e}", rep.worst_margin))?;
    }
    Ok(format!("20 games, worst margin {worst:.3e}"))
}

fn complete_graph_endpoint() -> Outcome {
    let mut rng = rng(4);
    let mut worst: Option<Rational> = None;
    for i in 0..20 {
        let (xs, ys) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let g = random_game(&mut rng, xs, ys, 2, 2);
        let m = expander(complete_bipartite(rng.gen_range(1..=2), xs).unwrap());
        let p = expander(complete_bipartite(rng.gen_range(1..=2), ys).unwrap());
        let cg = concatenate(&m, &g, &p).unwrap();
        let rep = fortification_violation(&cg, &Rational::zero(), &Rational::zero(), SearchMode::Exact, CAP).unwrap();
        let v = rep.max_violation.clone().unwrap();
        ensure(v <= Rational::zero(), || format!("instance {i}: violation {v}"))?;
        if worst.as_ref().is_none_or(|w| v > *w) {
            worst = Some(v);
        }
    }
    Ok(format!("20 games, largest violation {}", worst.unwrap()))
}

fn strong_to_combinatorial() -> Outcome {
    let mut rng = rng(5);
    let mut premises = 0;
    for i in 0..20u64 {
        let n = rng.gen_range(2..=3);
        let g = random_game(&mut rng, n, n, 2, 2);
        let (m, p) = if i % 2 == 0 {
            (complete_bipartite(2, n).unwrap(), complete_bipartite(rng.gen_range(1..=2), n).unwrap())
        } else {
            (shift_union_graph(n, &[0, 1]).unwrap(), sample_permutation_union(n, 2, i, 0).unwrap())
        };
        let cg = concatenate(&expander(m), &g, &expander(p)).unwrap();
        let eps = r(1, [4, 8][i as usize % 2]);
        let delta = r(1, [2, 4, 8][i as usize % 3]);
        let chk = strong_implies_combinatorial(&cg, &eps, &delta, CAP).unwrap();
        premises += chk.premise as usize;
        ensure(chk.holds, || format!("instance {i}: premise certified, combinatorial check fails"))?;
    }
    ensure(premises > 0, || "no instance certified the premise".into())?;
    Ok(format!("20 instances, {premises} with certified premise"))
}

fn parallel_repetition() -> Outcome {
    let g = chsh();
    let zero = Rational::zero();
    let suite = [(1, 1), (1, 2), (2, 1), (2, 2)];
    let mut lines = Vec::new();
    for &(lm, lp) in &suite {
        let cg = concatenate(
            &expander(complete_bipartite(lm, 2).unwrap()),
            &g,
            &expander(complete_bipartite(lp, 2).unwrap()),
        )
        .unwrap();
        let rep = repetition_bound_check(&cg, 2, &zero, &zero, true, CAP).unwrap();
        let expected = rational_pow(&r(3, 4), 2) + repetition_eta(&zero, 2, 4);
        ensure(rep.bound == expected, || format!("K_{lm} bound {}", rep.bound))?;
        ensure(rep.passed(), || format!("K_{lm},{lp}: exact {} vs bound {}", rep.exact, rep.bound))?;
        lines.push(rep.exact.to_string());
    }
    // a second inner game with three questions per side
    let mut rng = rng(6);
    let h = random_game(&mut rng, 3, 2, 2, 2);
    let ch = concatenate(
        &expander(complete_bipartite(1, 3).unwrap()),
        &h,
        &expander(complete_bipartite(1, 2).unwrap()),
    )
    .unwrap();
    let cc = concatenate(
        &expander(complete_bipartite(1, 2).unwrap()),
        &g,
        &expander(complete_bipartite(2, 2).unwrap()),
    )
    .unwrap();
    for order in [[&cc, &ch], [&ch, &cc]] {
        let step = step_bound_check(&order, &zero, &zero, CAP).unwrap();
        ensure(step.passed(), || format!("step t=2: {} vs {}", step.full_value, step.bound))?;
    }
    // matching graphs are not (0,0)-fortified but meet the bound at δ = 1/8
    let cm = concatenate(
        &expander(perfect_matching(2).unwrap()),
        &g,
        &expander(perfect_matching(2).unwrap()),
    )
    .unwrap();
    let rep = repetition_bound_check(&cm, 2, &zero, &r(1, 8), false, CAP).unwrap();
    ensure(rep.passed(), || format!("matching: exact {} vs bound {}", rep.exact, rep.bound))?;
    Ok(format!("complete suite values {}, mixed steps hold, matching {}", lines.join("/"), rep.exact))
}

fn biregularization() -> Outcome {
    let mut rng = rng(7);
    for i in 0..25 {
        let (xs, ys) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let edges = rng.gen_range(xs.max(ys)..=xs * ys);
        let g = random_graphical_game(&mut rng, xs, ys, 2, 2, edges);
        let e = g.mu_entries().iter().filter(|m| !m.is_zero()).count();
        let out = biregularize_graphical(&g).unwrap();
        let bg = &out.game;
        ensure(brute_value(bg) == brute_value(&g), || format!("graphical {i}: value changed"))?;
        let ux = r(1, bg.x_size() as i64);
        let uy = r(1, bg.y_size() as i64);
        ensure(bg.x_marginal().iter().all(|m| *m == ux) && bg.y_marginal().iter().all(|m| *m == uy), || {
            format!("graphical {i}: marginals not uniform")
        })?;
        ensure(bg.x_size() <= e * xs && bg.y_size() <= e * ys, || format!("graphical {i}: size {}", bg.x_size()))?;
    }
    for i in 0..25 {
        let (xs, ys) = (rng.gen_range(1..=2), rng.gen_range(1..=2));
        let g = random_game(&mut rng, xs, ys, 2, 2);
        let support = g.mu_entries().iter().filter(|m| !m.is_zero()).count();
        // keep q = ⌈|E|/τ⌉ ≤ 8 so the output is small enough to enumerate
        let tau = if support <= 2 && i % 2 == 1 { r(1, 4) } else { r(1, 2) };
        let out = biregularize(&g, &tau, CAP).unwrap();
        let bg = &out.result.game;
        ensure(is_biregular(bg), || format!("general {i}: not biregular"))?;
        let (v, vi) = (brute_value(&g), brute_value_one_sided(bg));
        ensure(v <= vi && vi <= &v + &tau, || format!("general {i}: {v} vs {vi} at τ = {tau}"))?;
        let xb = r(8 * (xs * xs * ys) as i64, 1) / &tau;
        let yb = r(8 * (xs * ys * ys) as i64, 1) / &tau;
        ensure(r(bg.x_size() as i64, 1) <= xb && r(bg.y_size() as i64, 1) <= yb, || {
            format!("general {i}: {}×{} over bound", bg.x_size(), bg.y_size())
        })?;
    }
    Ok("25 graphical and 25 general instances".into())
}

fn tilde_spectral_claim() -> Outcome {
    let mut rng = rng(8);
    let mut count = 0;
    let mut worst = f64::INFINITY;
    while count < 120 {
        let d = rng.gen_range(2..=4);
        let n = rng.gen_range(d..=12);
        let (kind, l) = if rng.gen_bool(0.5) {
            (FamilyKind::Full, rng.gen_range(d..=if d == 4 { 5 } else { 7 }))
        } else {
            let primes: Vec<usize> = (d..=7).filter(|&p| is_prime(p)).collect();
            (FamilyKind::Pairwise, *primes.choose(&mut rng).unwrap())
        };
        let m = expander(relabeled_shift_union(&mut rng, n, d));
        let c = verify_tilde_spectral_claim(&m, l, kind, CAP).unwrap();
        worst = worst.min(c.bound - c.lambda_tilde);
        ensure(c.pass, || {
            format!("n={n} d={d} l={l} {kind:?}: {:.6} > {:.6}", c.lambda_tilde, c.bound)
        })?;
        count += 1;
    }
    let k22 = expander(complete_bipartite(2, 2).unwrap());
    let c = verify_tilde_spectral_claim(&k22, 2, FamilyKind::Full, CAP).unwrap();
    ensure(c.pass && (c.lambda_tilde - 1.0).abs() <= SLACK, || format!("K_2,2 l=2: {}", c.lambda_tilde))?;
    Ok(format!("{count} random instances plus K_2,2, worst margin {worst:.3e}, tight λ̃ = {:.9}", c.lambda_tilde))
}

fn ordered_structure() -> Outcome {
    let mut rng = rng(9);
    let mut n_inst = 0;
    for i in 0..12u64 {
        let n = 2;
        let g = random_game(&mut rng, n, n, 2, 2);
        let (dm, dp, l, kind) = match i % 3 {
            0 => (2, 1, 3, FamilyKind::Full),
            1 => (2, 2, 2, FamilyKind::Full),
            _ => (2, 1, 3, FamilyKind::Pairwise),
        };
        let m = expander(sample_permutation_union(n, dm, i, 0).unwrap());
        let p = expander(sample_permutation_union(n, dp, i, 1).unwrap());
        let of = ordered_fortify(&g, &m, &p, Some(l), kind, CAP).unwrap();
        let dist = ordered_sampling_distribution(&g, m.graph(), p.graph(), &of.left_family, &of.right_family).unwrap();
        let mu = of.game.outer_mu();
        let ys = of.game.outer_y_size();
        for (idx, w) in mu.iter().enumerate() {
            let sampled = dist.get(&(idx / ys, idx % ys)).cloned().unwrap_or_else(Rational::zero);
            ensure(*w == sampled, || format!("instance {i}: μ' differs at {idx}"))?;
        }
        let total: Rational = dist.values().sum();
        ensure(total.is_one(), || format!("instance {i}: sampled mass {total}"))?;
        let (vo, vi) = (classical_value(&of.game.outer_game().unwrap()).unwrap(), brute_value(&g));
        ensure(vo == vi, || format!("instance {i}: {vo} vs {vi}"))?;
        n_inst += 1;
    }
    // the family itself: 6 affine maps over Z_3, pairwise independent
    let fam = build_injection_family(2, 3, FamilyKind::Pairwise, CAP).unwrap();
    ensure(fam.len() == 6 && fam.is_pairwise_independent(), || "affine family".into())?;
    Ok(format!("{n_inst} instances, distributions and values equal"))
}

fn expander_inequalities() -> Outcome {
    let mut rng = rng(10);
    let mut worst = f64::INFINITY;
    for i in 0..1000u64 {
        let n = rng.gen_range(2..=8);
        let d = rng.gen_range(1..=n.min(4));
        let graph = match i % 3 {
            0 => sample_permutation_union(n, d, i, 0).unwrap(),
            1 => complete_bipartite(rng.gen_range(1..=4), n).unwrap(),
            _ => relabeled_shift_union(&mut rng, n, d),
        };
        let e = expander(graph);
        let f: Vec<f64> = (0..e.graph().left_size()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (lhs, rhs) = check_expander_averaging(&e, &f).unwrap();
        worst = worst.min(rhs - lhs);
        ensure(lhs <= rhs + SLACK, || format!("averaging {i}: {lhs} > {rhs}"))?;
    }
    for i in 0..1000u64 {
        let n = rng.gen_range(2..=6);
        let mu = random_biregular_game(&mut rng, n, 1, 1).mu_entries().to_vec();
        let em = expander(sample_permutation_union(n, rng.gen_range(1..=n.min(3)), i, 0).unwrap());
        let dp = rng.gen_range(1..=n.min(3));
        let ep = expander(relabeled_shift_union(&mut rng, n, dp));
        let f: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let g: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let c = check_correlated_averages(&em, &ep, &mu, &f, &g).unwrap();
        for (what, (lhs, rhs)) in [("deviation", c.deviation), ("product", c.product)] {
            worst = worst.min(rhs - lhs);
            ensure(lhs <= rhs + SLACK, || format!("{what} {i}: {lhs} > {rhs}"))?;
        }
    }
    Ok(format!("1000 + 1000 instances, worst margin {worst:.3e}"))
}

fn multiplayer_bound() -> Outcome {
    let mut details = Vec::new();
    for (n, shifts) in [(4usize, vec![0usize, 1]), (3, vec![0, 1])] {
        let g = parity_game(3, n);
        let graphs: Vec<BipartiteExpander> =
            (0..3).map(|_| expander(shift_union_graph(n, &shifts).unwrap())).collect();
        let cg = concatenate_multiplayer(&graphs, &g).unwrap();
        let chk = multiplayer_proof_check(&cg, CAP).unwrap();
        let excess = to_f64(&chk.max_excess);
        ensure(chk.holds && excess <= chk.proof_bound + SLACK, || {
            format!("n={n}: excess {excess} > {}", chk.proof_bound)
        })?;
        details.push(format!("n={n} excess {} ≤ {:.6}", chk.max_excess, chk.proof_bound));
    }
    Ok(details.join(", "))
}

fn main() {
    let criteria: [(&str, u64, fn() -> Outcome); 11] = [
        ("value preservation", 120, value_preservation),
        ("induced value identity", 60, induced_value_identity),
        ("pointwise fortification bound", 300, pointwise_bound),
        ("complete graphs are (0,0)-fortified", 120, complete_graph_endpoint),
        ("strong implies combinatorial", 300, strong_to_combinatorial),
        ("parallel repetition bound", 300, parallel_repetition),
        ("biregularization", 180, biregularization),
        ("tilde graph spectral bound", 180, tilde_spectral_claim),
        ("ordered fortification structure", 300, ordered_structure),
        ("expander inequalities", 300, expander_inequalities),
        ("multiplayer proof inequality", 300, multiplayer_bound),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        let result = match result {
            Ok(_) if took > Duration::from_secs(*budget) => Err(format!("over budget of {budget}s")),
            other => other,
        };
        match result {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} ({:.2}s)", i + 1, took.as_secs_f64()),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} ({:.2}s)", i + 1, took.as_secs_f64());
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
