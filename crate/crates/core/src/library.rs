//! Named games and seeded random instance generators.

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::arith::{rat, Rational};
use crate::game::Game;
use crate::kplayer::KPlayerGame;

/// CHSH: binary questions and answers, uniform μ, win iff `a ⊕ b = x ∧ y`.
pub fn chsh() -> Game {
    Game::from_fn(2, 2, 2, 2, |_, _| rat(1, 4), |a, b, x, y| (a ^ b) == (x & y))
        .expect("chsh is valid")
}

/// Uniform μ and a predicate that always accepts.
pub fn always_win(x_size: usize, y_size: usize, a_size: usize, b_size: usize) -> Game {
    let u = rat(1, (x_size * y_size) as i64);
    Game::from_fn(x_size, y_size, a_size, b_size, |_, _| u.clone(), |_, _, _, _| true)
        .expect("trivial game is valid")
}

/// k-player parity game over `n` questions per player: μ uniform on `[n]^k`,
/// win iff the XOR of the answer bits equals the AND of the question bits
/// `x_i mod 2`. With `n = 2` this is the usual binary game.
pub fn parity_game(k: usize, n: usize) -> KPlayerGame {
    let total = (n as i64).pow(k as u32);
    KPlayerGame::from_fn(
        vec![n; k],
        vec![2; k],
        |_| rat(1, total),
        |a, q| {
            let xor = a.iter().fold(0, |acc, &v| acc ^ v);
            let and = q.iter().all(|&x| x % 2 == 1) as usize;
            xor == and
        },
    )
    .expect("parity game is valid")
}

fn normalize(weights: Vec<u64>) -> Vec<Rational> {
    let total: u64 = weights.iter().sum();
    weights
        .into_iter()
        .map(|w| Rational::new(BigInt::from(w), BigInt::from(total)))
        .collect()
}

/// Random game: μ from small integer weights (some zero), predicate fair coins.
pub fn random_game<R: Rng>(
    rng: &mut R,
    x_size: usize,
    y_size: usize,
    a_size: usize,
    b_size: usize,
) -> Game {
    let mut w: Vec<u64> = (0..x_size * y_size).map(|_| rng.gen_range(0..4)).collect();
    if w.iter().all(|&v| v == 0) {
        let i = rng.gen_range(0..w.len());
        w[i] = 1;
    }
    let mu = normalize(w);
    let wins: Vec<bool> = (0..x_size * y_size * a_size * b_size)
        .map(|_| rng.gen_bool(0.5))
        .collect();
    Game::from_fn(
        x_size,
        y_size,
        a_size,
        b_size,
        |x, y| mu[x * y_size + y].clone(),
        |a, b, x, y| wins[((x * y_size + y) * a_size + a) * b_size + b],
    )
    .expect("random game is valid")
}

/// Random `n × n` game with exactly uniform marginals: μ is a positive
/// integer mixture of random permutation matrices.
pub fn random_biregular_game<R: Rng>(rng: &mut R, n: usize, a_size: usize, b_size: usize) -> Game {
    let terms = rng.gen_range(1..=3);
    let mut w = vec![0u64; n * n];
    for _ in 0..terms {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(rng);
        let weight = rng.gen_range(1..=3);
        for (x, &y) in perm.iter().enumerate() {
            w[x * n + y] += weight;
        }
    }
    let mu = normalize(w);
    let wins: Vec<bool> = (0..n * n * a_size * b_size)
        .map(|_| rng.gen_bool(0.5))
        .collect();
    Game::from_fn(
        n,
        n,
        a_size,
        b_size,
        |x, y| mu[x * n + y].clone(),
        |a, b, x, y| wins[((x * n + y) * a_size + a) * b_size + b],
    )
    .expect("random biregular game is valid")
}

/// Random graphical game: μ uniform over a random edge set of the given size
/// in which every question has degree at least one.
pub fn random_graphical_game<R: Rng>(
    rng: &mut R,
    x_size: usize,
    y_size: usize,
    a_size: usize,
    b_size: usize,
    edges: usize,
) -> Game {
    let edges = edges.clamp(x_size.max(y_size), x_size * y_size);
    let mut chosen = vec![false; x_size * y_size];
    // cover every question first
    for i in 0..x_size.max(y_size) {
        chosen[(i % x_size) * y_size + (i % y_size)] = true;
    }
    let mut count = chosen.iter().filter(|&&c| c).count();
    while count < edges {
        let i = rng.gen_range(0..chosen.len());
        if !chosen[i] {
            chosen[i] = true;
            count += 1;
        }
    }
    let mass = rat(1, count as i64);
    let wins: Vec<bool> = (0..x_size * y_size * a_size * b_size)
        .map(|_| rng.gen_bool(0.5))
        .collect();
    Game::from_fn(
        x_size,
        y_size,
        a_size,
        b_size,
        |x, y| {
            if chosen[x * y_size + y] {
                mass.clone()
            } else {
                rat(0, 1)
            }
        },
        |a, b, x, y| wins[((x * y_size + y) * a_size + a) * b_size + b],
    )
    .expect("random graphical game is valid")
}

/// Random k-player game with small integer μ weights.
pub fn random_kplayer_game<R: Rng>(
    rng: &mut R,
    question_sizes: Vec<usize>,
    answer_sizes: Vec<usize>,
) -> KPlayerGame {
    let q: usize = question_sizes.iter().product();
    let a: usize = answer_sizes.iter().product();
    let mut w: Vec<u64> = (0..q).map(|_| rng.gen_range(0..4)).collect();
    if w.iter().all(|&v| v == 0) {
        w[0] = 1;
    }
    let mu = normalize(w);
    let wins: Vec<bool> = (0..q * a).map(|_| rng.gen_bool(0.5)).collect();
    KPlayerGame::new(question_sizes, answer_sizes, mu, wins).expect("random k-player game is valid")
}

/// Random substrategy with exact rational entries; each row keeps an
/// explicit abstention weight so row sums stay at most 1.
pub fn random_substrategy<R: Rng>(
    rng: &mut R,
    questions: usize,
    answers: usize,
) -> crate::strategy::Substrategy {
    let mut f = Vec::with_capacity(questions * answers);
    for _ in 0..questions {
        let w: Vec<u64> = (0..=answers).map(|_| rng.gen_range(0..5)).collect();
        let total: u64 = w.iter().sum::<u64>().max(1);
        for &v in &w[..answers] {
            f.push(Rational::new(BigInt::from(v), BigInt::from(total)));
        }
    }
    crate::strategy::Substrategy::new(questions, answers, f).expect("row sums are at most 1")
}
