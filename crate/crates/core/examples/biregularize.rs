use fortify::arith::rat;
use fortify::bireg::{biregularize, biregularize_graphical};
use fortify::game::{classical_value, is_biregular};
use fortify::Game;

fn main() -> fortify::Result<()> {
    // three-edge graphical game: the (1, 1) pair is never asked
    let g = Game::from_fn(
        2,
        2,
        2,
        2,
        |x, y| if (x, y) == (1, 1) { rat(0, 1) } else { rat(1, 3) },
        |a, b, x, y| (a ^ b) == (x | y),
    )?;
    let out = biregularize_graphical(&g)?;
    println!(
        "graphical: {}x{} -> {}x{}, biregular {}, value {} -> {}",
        g.x_size(),
        g.y_size(),
        out.game.x_size(),
        out.game.y_size(),
        is_biregular(&out.game),
        classical_value(&g)?,
        classical_value(&out.game)?
    );

    // skewed masses need the rounding construction
    let h = Game::from_fn(
        2,
        2,
        2,
        2,
        |x, y| [rat(1, 2), rat(1, 5), rat(1, 5), rat(1, 10)][x * 2 + y].clone(),
        |a, b, x, y| (a ^ b) == (x & y),
    )?;
    let tau = rat(1, 2);
    let out = biregularize(&h, &tau, 1 << 28)?;
    println!(
        "general: q = {}, null mass {}, size {}x{} (bounds {} and {}), value {} -> {}",
        out.q,
        out.null_mass,
        out.result.game.x_size(),
        out.result.game.y_size(),
        out.x_bound,
        out.y_bound,
        classical_value(&h)?,
        classical_value(&out.result.game)?
    );
    Ok(())
}
