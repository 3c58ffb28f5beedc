use fortify::spectral::{complete_bipartite, perfect_matching, random_biregular_expander, shift_union_graph, BipartiteExpander};

fn main() -> fortify::Result<()> {
    for (name, g) in [
        ("K_{3,3}", complete_bipartite(3, 3)?),
        ("matching(3)", perfect_matching(3)?),
        ("Z_8 {0,1,3}", shift_union_graph(8, &[0, 1, 3])?),
    ] {
        let e = BipartiteExpander::certify(g)?;
        println!("{name:>14}: degree {} lambda {:.6}", e.degree(), e.lambda());
    }
    // seeded search for a sparse graph below a target
    let e = random_biregular_expander(16, 4, 0.9, 7, 64)?;
    println!("random 4-regular on 16+16: lambda {:.6}", e.lambda());
    Ok(())
}
