//! Exact classical value of CHSH, its tensor square, and an optimal strategy.
use fortify::game::{optimal_strategy, tensor};
use fortify::library::chsh;

fn main() -> fortify::Result<()> {
    let g = chsh();
    let w = optimal_strategy(&g, 1 << 24)?;
    println!("val(CHSH) = {}", w.value);
    println!("alice = {:?}, bob = {:?}", w.alice, w.bob);
    let sq = tensor(&g, &g)?;
    println!("val(CHSH ⊗ CHSH) = {}", sq.classical_value()?);
    Ok(())
}
