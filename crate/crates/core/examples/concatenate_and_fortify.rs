//! CHSH on matchings is not fortified; on complete graphs it is, and a
//! sparse shift-union sits in between.
use fortify::arith::rat;
use fortify::concat::{concatenate, fortification_violation, pointwise_bound_check, SearchMode};
use fortify::library::chsh;
use fortify::spectral::{complete_bipartite, perfect_matching, shift_union_graph, BipartiteExpander};
use fortify::Rational;
use num_traits::Zero;

fn main() -> fortify::Result<()> {
    let g = chsh();
    let cap = 1 << 28;
    let cases = [
        ("matching", perfect_matching(2)?),
        ("K_{2,2}", complete_bipartite(2, 2)?),
    ];
    for (name, graph) in cases {
        let e = BipartiteExpander::certify(graph)?;
        let cg = concatenate(&e, &g, &e)?;
        let rep = fortification_violation(&cg, &Rational::zero(), &Rational::zero(), SearchMode::Exact, cap)?;
        println!("== {name} (lambda {:.3})\n{rep}\n", e.lambda());
    }

    let e = BipartiteExpander::certify(shift_union_graph(2, &[0, 1])?)?;
    let cg = concatenate(&e, &g, &e)?;
    let asc = fortification_violation(&cg, &rat(1, 8), &rat(1, 16), SearchMode::Ascent { restarts: 32, seed: 1 }, cap)?;
    println!("== ascent lower bound\n{asc}\n");
    println!("== pointwise bound\n{}", pointwise_bound_check(&cg, cap)?);
    Ok(())
}
