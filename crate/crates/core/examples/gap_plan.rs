use fortify::arith::rat;
use fortify::plan::gap_amplification_plan;

fn main() -> fortify::Result<()> {
    for (sigma, tau, beta) in [(4, rat(1, 2), rat(1, 4)), (4, rat(1, 10), rat(1, 100)), (16, rat(1, 3), rat(1, 2))] {
        println!("{}\n", gap_amplification_plan(sigma, &tau, &beta)?);
    }
    Ok(())
}
