//! Biregularization: making both question marginals exactly uniform.
//!
//! A game whose masses are integer multiples `k(x, y)/q` is read as a
//! multigraph with `k(x, y)` parallel edges. Each question `x` of degree
//! `d_x` is split into copies `S_x = {x} × [d_x]`, and the referee sends a
//! uniform copy of the sampled question. Copy `(x, i)` then has mass
//! `Σ_y μ(x, y)/d_x = 1/q`, and since every copy has a single neighbour the
//! answers are unchanged and the value is preserved exactly.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use crate::arith::{self, Rational};
use crate::error::{Error, Result};
use crate::game::{Game, Predicate, DEFAULT_SIZE_CAP};
use crate::spectral::BipartiteGraph;

/// Output of the exact construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Biregularized {
    pub game: Game,
    /// Left graph `M_int` over `X_int × X`, edges `((x, i), x)`.
    pub left: BipartiteGraph,
    /// Right graph `P_int` over `Y_int × Y`.
    pub right: BipartiteGraph,
    /// Number of mass units `q`; equals `|X_int| = |Y_int|`.
    pub units: u64,
}

/// Output of the approximate construction for general games.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneralBiregularized {
    pub quantized: Game,
    pub q: u64,
    pub null_mass: Rational,
    pub result: Biregularized,
    /// `8|X|²|Y|/τ` and `8|X||Y|²/τ` for the input sizes.
    pub x_bound: Rational,
    pub y_bound: Rational,
}

/// Degrees `k(x, y) = q·μ(x, y)` when every mass is a multiple of `1/q`.
fn unit_counts(g: &Game, q: &BigInt) -> Option<Vec<u64>> {
    let qr = Rational::from_integer(q.clone());
    g.mu_entries()
        .iter()
        .map(|m| {
            let v = m * &qr;
            if v.is_integer() {
                v.to_integer().to_u64()
            } else {
                None
            }
        })
        .collect()
}

fn split(g: &Game, counts: &[u64], cap: u128) -> Result<Biregularized> {
    let (xs, ys) = (g.x_size(), g.y_size());
    let dx: Vec<u64> = (0..xs).map(|x| (0..ys).map(|y| counts[x * ys + y]).sum()).collect();
    let dy: Vec<u64> = (0..ys).map(|y| (0..xs).map(|x| counts[x * ys + y]).sum()).collect();
    let units: u64 = dx.iter().sum();
    let (nx, ny) = (units as usize, units as usize);
    let size = (nx as u128 * ny as u128).saturating_mul(g.alphabet_size() as u128);
    arith::check_cap("biregularized game size", size, cap)?;

    let x_origin: Vec<usize> = (0..xs).flat_map(|x| std::iter::repeat_n(x, dx[x] as usize)).collect();
    let y_origin: Vec<usize> = (0..ys).flat_map(|y| std::iter::repeat_n(y, dy[y] as usize)).collect();
    let left = BipartiteGraph::new(nx, xs, x_origin.iter().copied().enumerate().collect())?;
    let right = BipartiteGraph::new(ny, ys, y_origin.iter().copied().enumerate().collect())?;

    let (a_n, b_n) = (g.a_size(), g.b_size());
    let mut mu = Vec::with_capacity(nx * ny);
    let mut weights = Vec::with_capacity(nx * ny * a_n * b_n);
    for &x in &x_origin {
        for &y in &y_origin {
            mu.push(g.mu(x, y) / Rational::from_integer(BigInt::from(dx[x] * dy[y])));
            for a in 0..a_n {
                for b in 0..b_n {
                    weights.push(g.accept(a, b, x, y).into_owned());
                }
            }
        }
    }
    let game = Game::new(nx, ny, a_n, b_n, mu, Predicate::Weighted(weights).simplify())?;
    Ok(Biregularized {
        game,
        left,
        right,
        units,
    })
}

/// Exact biregularization of a graphical game: every nonzero mass equals
/// `1/|E|` and every question has at least one edge.
pub fn biregularize_graphical(g: &Game) -> Result<Biregularized> {
    let nonzero: Vec<&Rational> = g.mu_entries().iter().filter(|m| !m.is_zero()).collect();
    let unit = nonzero[0];
    if nonzero.iter().any(|m| *m != unit) {
        return Err(Error::NotGraphical("nonzero masses differ".into()));
    }
    if !unit.numer().is_one() {
        return Err(Error::NotGraphical("mass is not 1/|E|".into()));
    }
    check_no_isolated(g)?;
    let counts = unit_counts(g, unit.denom()).expect("masses are multiples of 1/|E|");
    let out = split(g, &counts, DEFAULT_SIZE_CAP)?;
    debug_assert!(out.units as usize <= g.x_size() * g.y_size());
    Ok(out)
}

fn check_no_isolated(g: &Game) -> Result<()> {
    if let Some(x) = g.x_marginal().iter().position(Zero::is_zero) {
        return Err(Error::Parameter(format!("question x={x} has no edge")));
    }
    if let Some(y) = g.y_marginal().iter().position(Zero::is_zero) {
        return Err(Error::Parameter(format!("question y={y} has no edge")));
    }
    Ok(())
}

/// Exact biregularization of a multigraph game whose masses are multiples
/// of `1/q`, each unit of mass one edge. Zero-mass questions have no copies.
pub fn biregularize_multigraph(g: &Game, q: u64, cap: u128) -> Result<Biregularized> {
    let counts = unit_counts(g, &BigInt::from(q)).ok_or_else(|| {
        Error::Parameter(format!("masses are not multiples of 1/{q}"))
    })?;
    split(g, &counts, cap)
}

fn check_tau(tau: &Rational) -> Result<()> {
    if *tau <= Rational::zero() || *tau >= Rational::one() {
        return Err(Error::Parameter(format!("τ = {} must lie in (0, 1)", arith::show(tau))));
    }
    Ok(())
}

/// Rounds masses down to multiples of `1/q` with `q = ⌈|E|/τ⌉` (`|E|` the
/// support size) and moves the excess to a fresh pair `(x_nul, y_nul)`,
/// appended last, which is won exactly by the answers `(0, 0)`.
pub fn quantize_distribution(g: &Game, tau: &Rational) -> Result<(Game, u64, Rational)> {
    check_tau(tau)?;
    let support = g.mu_entries().iter().filter(|m| !m.is_zero()).count();
    let e = Rational::from_integer(BigInt::from(support));
    let q_big = (e / tau).ceil().to_integer();
    let q = q_big
        .to_u64()
        .ok_or_else(|| Error::Parameter("q does not fit in 64 bits".into()))?;
    let qr = Rational::from_integer(q_big);
    let (xs, ys, a_n, b_n) = (g.x_size(), g.y_size(), g.a_size(), g.b_size());
    let (nx, ny) = (xs + 1, ys + 1);
    let mut mu = vec![Rational::zero(); nx * ny];
    let mut weights = vec![Rational::zero(); nx * ny * a_n * b_n];
    let mut kept = Rational::zero();
    for x in 0..xs {
        for y in 0..ys {
            let m = (g.mu(x, y) * &qr).floor() / &qr;
            kept += &m;
            mu[x * ny + y] = m;
            for a in 0..a_n {
                for b in 0..b_n {
                    weights[((x * ny + y) * a_n + a) * b_n + b] = g.accept(a, b, x, y).into_owned();
                }
            }
        }
    }
    let null = Rational::one() - kept;
    mu[xs * ny + ys] = null.clone();
    weights[(xs * ny + ys) * a_n * b_n] = Rational::one();
    let game = Game::new(nx, ny, a_n, b_n, mu, Predicate::Weighted(weights).simplify())?;
    Ok((game, q, null))
}

/// Quantize, then split the resulting `q`-edge multigraph game. The
/// output is biregular with `val(G) ≤ val(out) ≤ val(G) + τ`.
pub fn biregularize(g: &Game, tau: &Rational, cap: u128) -> Result<GeneralBiregularized> {
    let (quantized, q, null_mass) = quantize_distribution(g, tau)?;
    let result = biregularize_multigraph(&quantized, q, cap)?;
    let (xs, ys) = (g.x_size() as i64, g.y_size() as i64);
    let x_bound = Rational::from_integer((8 * xs * xs * ys).into()) / tau;
    let y_bound = Rational::from_integer((8 * xs * ys * ys).into()) / tau;
    let nx = Rational::from_integer(result.game.x_size().into());
    let ny = Rational::from_integer(result.game.y_size().into());
    if nx > x_bound || ny > y_bound {
        return Err(Error::Parameter(format!(
            "size bound violated: {}×{} exceeds {}×{}",
            nx,
            ny,
            arith::show(&x_bound),
            arith::show(&y_bound)
        )));
    }
    Ok(GeneralBiregularized {
        quantized,
        q,
        null_mass,
        result,
        x_bound,
        y_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;
    use crate::concat::concatenate_graphs;
    use crate::game::{classical_value, is_biregular};
    use crate::library::chsh;

    fn two_pair_game(m0: Rational, m1: Rational) -> Game {
        Game::from_fn(
            2,
            2,
            2,
            2,
            |x, y| match (x, y) {
                (0, 0) => m0.clone(),
                (1, 1) => m1.clone(),
                _ => rat(0, 1),
            },
            |a, b, x, _| (a ^ b) == x,
        )
        .unwrap()
    }

    #[test]
    fn graphical_three_edge_example() {
        let g = Game::from_fn(
            2,
            2,
            2,
            2,
            |x, y| if (x, y) == (1, 1) { rat(0, 1) } else { rat(1, 3) },
            |a, b, x, y| (a ^ b) == (x | y),
        )
        .unwrap();
        let out = biregularize_graphical(&g).unwrap();
        assert_eq!((out.game.x_size(), out.game.y_size()), (3, 3));
        assert!(is_biregular(&out.game));
        assert!(out.game.x_marginal().iter().all(|m| *m == rat(1, 3)));
        assert_eq!(classical_value(&out.game).unwrap(), classical_value(&g).unwrap());
        // the construction is a concatenation with single-neighbour copies
        let outer = concatenate_graphs(&out.left, &g, &out.right).unwrap().outer_game().unwrap();
        assert_eq!(outer.mu_entries(), out.game.mu_entries());
        for x in 0..3 {
            for y in 0..3 {
                if !outer.mu(x, y).is_zero() {
                    for (a, b) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                        assert_eq!(outer.accept(a, b, x, y), out.game.accept(a, b, x, y));
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_non_graphical_and_isolated() {
        assert!(matches!(
            biregularize_graphical(&two_pair_game(rat(1, 3), rat(2, 3))),
            Err(Error::NotGraphical(_))
        ));
        let isolated = Game::from_fn(2, 2, 1, 1, |x, _| rat(1 - x as i64, 2), |_, _, _, _| true).unwrap();
        assert!(biregularize_graphical(&isolated).is_err());
    }

    #[test]
    fn quantization_examples() {
        let (q1, q, null) = quantize_distribution(&two_pair_game(rat(3, 10), rat(7, 10)), &rat(1, 10)).unwrap();
        assert_eq!(q, 20);
        assert_eq!((q1.mu(0, 0).clone(), q1.mu(1, 1).clone(), null), (rat(6, 20), rat(14, 20), rat(0, 1)));
        let (q2, _, null) = quantize_distribution(&two_pair_game(rat(1, 3), rat(2, 3)), &rat(1, 10)).unwrap();
        assert_eq!((q2.mu(0, 0).clone(), q2.mu(1, 1).clone(), null), (rat(6, 20), rat(13, 20), rat(1, 20)));
        assert_eq!(*q2.mu(2, 2), rat(1, 20));
        assert!(quantize_distribution(&chsh(), &rat(1, 1)).is_err());
        assert!(quantize_distribution(&chsh(), &rat(0, 1)).is_err());
    }

    #[test]
    fn chsh_is_exactly_preserved() {
        let out = biregularize(&chsh(), &rat(1, 4), DEFAULT_SIZE_CAP).unwrap();
        assert_eq!(out.q, 16);
        assert_eq!(out.null_mass, rat(0, 1));
        assert_eq!(out.result.units, 16);
        assert!(is_biregular(&out.result.game));
        assert_eq!(classical_value(&out.result.game).unwrap(), rat(3, 4));
    }

    #[test]
    fn general_games_are_sandwiched() {
        let g = two_pair_game(rat(1, 3), rat(2, 3));
        let tau = rat(1, 4);
        let out = biregularize(&g, &tau, DEFAULT_SIZE_CAP).unwrap();
        assert!(is_biregular(&out.result.game));
        let v = classical_value(&g).unwrap();
        let vi = classical_value(&out.result.game).unwrap();
        assert!(v <= vi && vi <= v + tau);
    }
}
