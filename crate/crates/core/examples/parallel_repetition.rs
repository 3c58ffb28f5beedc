use fortify::arith::rat;
use fortify::library::chsh;
use fortify::repetition::repetition_bound_check;
use fortify::spectral::{complete_bipartite, perfect_matching, BipartiteExpander};

fn main() -> fortify::Result<()> {
    let g = chsh();
    let k = BipartiteExpander::certify(complete_bipartite(1, 2)?)?;
    let cg = fortify::concat::concatenate(&k, &g, &k)?;
    println!("{}\n", repetition_bound_check(&cg, 2, &rat(0, 1), &rat(0, 1), true, 1 << 28)?);

    // matchings leave CHSH unfortified; the check says so instead of failing
    let m = BipartiteExpander::certify(perfect_matching(2)?)?;
    let cm = fortify::concat::concatenate(&m, &g, &m)?;
    println!("{}", repetition_bound_check(&cm, 2, &rat(0, 1), &rat(1, 16), false, 1 << 28)?);
    Ok(())
}
