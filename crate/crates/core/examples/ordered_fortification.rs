//! Ordered fortification of CHSH and the tilde-graph spectral bound.
use fortify::game::classical_value;
use fortify::library::chsh;
use fortify::ordered::{describe_family, ordered_fortify, verify_tilde_spectral_claim, FamilyKind};
use fortify::spectral::{complete_bipartite, shift_union_graph, BipartiteExpander};

fn main() -> fortify::Result<()> {
    let cap = 1 << 28;
    let k22 = BipartiteExpander::certify(complete_bipartite(2, 2)?)?;
    let of = ordered_fortify(&chsh(), &k22, &k22, Some(3), FamilyKind::Pairwise, cap)?;
    println!("family ({} members):\n{}", of.left_family.len(), describe_family(&of.left_family));
    println!(
        "outer {}x{} questions, value {}",
        of.game.outer_x_size(),
        of.game.outer_y_size(),
        classical_value(&of.game.outer_game()?)?
    );

    for (n, shifts, l, kind) in [
        (7, vec![0, 1, 3], 5, FamilyKind::Pairwise),
        (6, vec![0, 2], 4, FamilyKind::Full),
        (2, vec![0, 1], 2, FamilyKind::Full),
    ] {
        let m = BipartiteExpander::certify(shift_union_graph(n, &shifts)?)?;
        let c = verify_tilde_spectral_claim(&m, l, kind, cap)?;
        println!(
            "n={n} shifts={shifts:?} l={l} {kind:?}: lambda {:.4}, tilde {:.4}, bound {:.4}, pass {}",
            c.lambda, c.lambda_tilde, c.bound, c.pass
        );
    }
    Ok(())
}
