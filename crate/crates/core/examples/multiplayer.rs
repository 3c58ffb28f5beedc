use fortify::kplayer::kplayer_value;
use fortify::library::parity_game;
use fortify::multiplayer::{concatenate_multiplayer, multiplayer_proof_check};
use fortify::spectral::{shift_union_graph, BipartiteExpander};

fn main() -> fortify::Result<()> {
    let g = parity_game(3, 4);
    println!("val(parity_3) = {}", kplayer_value(&g)?);
    let graphs = (0..3)
        .map(|_| BipartiteExpander::certify(shift_union_graph(4, &[0, 1])?))
        .collect::<fortify::Result<Vec<_>>>()?;
    let cg = concatenate_multiplayer(&graphs, &g)?;
    println!("{}", multiplayer_proof_check(&cg, 1 << 30)?);
    Ok(())
}
