//! k-player one-round games.

use num_traits::{One, Signed, Zero};

use crate::arith::{self, check_cap, pow_saturating, Rational, Scalar};
use crate::error::{Error, Result, Violation};
use crate::game::{Game, Predicate, DEFAULT_ENUMERATION_CAP};
use crate::strategy::Substrategy;

/// Questions and answers are flattened row-major with player 0 most
/// significant; the predicate is indexed `question_flat * answer_total + answer_flat`.
#[derive(Clone, Debug, PartialEq)]
pub struct KPlayerGame {
    question_sizes: Vec<usize>,
    answer_sizes: Vec<usize>,
    mu: Vec<Rational>,
    predicate: Vec<bool>,
}

impl KPlayerGame {
    pub fn new(
        question_sizes: Vec<usize>,
        answer_sizes: Vec<usize>,
        mu: Vec<Rational>,
        predicate: Vec<bool>,
    ) -> Result<KPlayerGame> {
        let g = KPlayerGame {
            question_sizes,
            answer_sizes,
            mu,
            predicate,
        };
        g.validate()?;
        Ok(g)
    }

    /// Boolean game from `mu(questions)` and `win(answers, questions)`.
    pub fn from_fn(
        question_sizes: Vec<usize>,
        answer_sizes: Vec<usize>,
        mu: impl Fn(&[usize]) -> Rational,
        win: impl Fn(&[usize], &[usize]) -> bool,
    ) -> Result<KPlayerGame> {
        let mut m = Vec::new();
        let mut p = Vec::new();
        arith::odometer(&question_sizes, |q| {
            m.push(mu(q));
            arith::odometer(&answer_sizes, |a| {
                p.push(win(a, q));
                true
            });
            true
        });
        KPlayerGame::new(question_sizes, answer_sizes, m, p)
    }

    /// The same game viewed as a 2-player instance of the k-player type.
    pub fn from_two_player(g: &Game) -> Result<KPlayerGame> {
        let Predicate::Boolean(_) = g.predicate() else {
            return Err(Error::Parameter(
                "only boolean-predicate games convert to k-player form".into(),
            ));
        };
        KPlayerGame::from_fn(
            vec![g.x_size(), g.y_size()],
            vec![g.a_size(), g.b_size()],
            |q| g.mu(q[0], q[1]).clone(),
            |a, q| g.accept(a[0], a[1], q[0], q[1]).is_one(),
        )
    }

    pub fn validate(&self) -> std::result::Result<(), Violation> {
        let k = self.question_sizes.len();
        if k < 2 || self.answer_sizes.len() != k {
            return Err(Violation::Dimension(
                "need at least 2 players with matching question/answer size lists".into(),
            ));
        }
        if self.question_sizes.contains(&0) || self.answer_sizes.contains(&0) {
            return Err(Violation::Dimension("all set sizes must be positive".into()));
        }
        if self.mu.len() != self.question_total() {
            return Err(Violation::Dimension(format!(
                "mu has {} entries, expected {}",
                self.mu.len(),
                self.question_total()
            )));
        }
        if self.predicate.len() != self.question_total() * self.answer_total() {
            return Err(Violation::Dimension("predicate size mismatch".into()));
        }
        if let Some(i) = self.mu.iter().position(|m| m.is_negative()) {
            return Err(Violation::NegativeMass {
                x: i,
                y: usize::MAX,
            });
        }
        let total: Rational = self.mu.iter().sum();
        if !total.is_one() {
            return Err(Violation::MassNotOne {
                total: arith::show(&total),
            });
        }
        Ok(())
    }

    pub fn players(&self) -> usize {
        self.question_sizes.len()
    }
    pub fn question_sizes(&self) -> &[usize] {
        &self.question_sizes
    }
    pub fn answer_sizes(&self) -> &[usize] {
        &self.answer_sizes
    }
    pub fn question_total(&self) -> usize {
        self.question_sizes.iter().product()
    }
    pub fn answer_total(&self) -> usize {
        self.answer_sizes.iter().product()
    }
    pub fn mu_entries(&self) -> &[Rational] {
        &self.mu
    }
    pub fn predicate_entries(&self) -> &[bool] {
        &self.predicate
    }

    pub fn flat_question(&self, q: &[usize]) -> usize {
        q.iter()
            .zip(&self.question_sizes)
            .fold(0, |acc, (&v, &s)| acc * s + v)
    }

    pub fn flat_answer(&self, a: &[usize]) -> usize {
        a.iter()
            .zip(&self.answer_sizes)
            .fold(0, |acc, (&v, &s)| acc * s + v)
    }

    pub fn mu_at(&self, q: &[usize]) -> &Rational {
        &self.mu[self.flat_question(q)]
    }

    pub fn wins(&self, a: &[usize], q: &[usize]) -> bool {
        self.predicate[self.flat_question(q) * self.answer_total() + self.flat_answer(a)]
    }

    /// Tensor over per-player coordinates `c_i = x_i·|A_i| + a_i` (player 0
    /// most significant) holding `μ(x)·(V(a, x) − shift)`.
    pub(crate) fn coordinate_tensor(&self, shift: &Rational) -> Vec<Rational> {
        let k = self.players();
        let dims: Vec<usize> = (0..k)
            .map(|i| self.question_sizes[i] * self.answer_sizes[i])
            .collect();
        let mut out = Vec::with_capacity(dims.iter().product());
        let mut q = vec![0; k];
        let mut a = vec![0; k];
        arith::odometer(&dims, |c| {
            for i in 0..k {
                q[i] = c[i] / self.answer_sizes[i];
                a[i] = c[i] % self.answer_sizes[i];
            }
            let m = self.mu_at(&q);
            let v = if self.wins(&a, &q) {
                Rational::one()
            } else {
                Rational::zero()
            };
            out.push(if m.is_zero() {
                Rational::zero()
            } else {
                m * (v - shift)
            });
            true
        });
        out
    }
}

/// Contracts the leading coordinate (length `head`) of a row-major tensor
/// with `w`.
pub(crate) fn contract_first<T: Scalar>(tensor: &[T], head: usize, w: &[T]) -> Vec<T> {
    let rest = tensor.len() / head;
    let mut out = vec![T::zero(); rest];
    for (c, wc) in w.iter().enumerate() {
        if wc.is_zero() {
            continue;
        }
        let block = &tensor[c * rest..(c + 1) * rest];
        for (o, t) in out.iter_mut().zip(block) {
            *o = o.clone() + wc.clone() * t.clone();
        }
    }
    out
}

pub fn kplayer_value(g: &KPlayerGame) -> Result<Rational> {
    kplayer_value_capped(g, DEFAULT_ENUMERATION_CAP)
}

/// Exact classical value: deterministic strategies of players `0..k-1` are
/// enumerated with incremental contraction, the last player best-responds.
pub fn kplayer_value_capped(g: &KPlayerGame, cap: u128) -> Result<Rational> {
    let k = g.players();
    let mut needed: u128 = 1;
    for i in 0..k - 1 {
        needed = needed.saturating_mul(pow_saturating(
            g.answer_sizes[i] as u128,
            g.question_sizes[i],
        ));
    }
    check_cap("k-player value enumeration", needed, cap)?;

    let tensor = g.coordinate_tensor(&Rational::zero());
    let scale = arith::common_denominator(&tensor);
    if arith::fits_budget(&scale) {
        if let Some(ints) = arith::scaled_i128(&tensor, &scale) {
            let one = 1i128;
            let v = value_recursive(g, 0, &ints, &one);
            return Ok(arith::from_scaled(v, &scale));
        }
    }
    Ok(value_recursive(g, 0, &tensor, &Rational::one()))
}

fn value_recursive<T: Scalar>(g: &KPlayerGame, player: usize, tensor: &[T], one: &T) -> T {
    let (xs, as_) = (g.question_sizes[player], g.answer_sizes[player]);
    let head = xs * as_;
    if player + 1 == g.players() {
        let mut total = T::zero();
        for x in 0..xs {
            let row = &tensor[x * as_..(x + 1) * as_];
            let best = row.iter().max().cloned().unwrap_or_else(T::zero);
            total = total + best;
        }
        return total;
    }
    let mut best: Option<T> = None;
    let mut w = vec![T::zero(); head];
    arith::odometer(&vec![as_; xs], |p| {
        for x in 0..xs {
            for a in 0..as_ {
                w[x * as_ + a] = if p[x] == a { one.clone() } else { T::zero() };
            }
        }
        let rest = contract_first(tensor, head, &w);
        let v = value_recursive(g, player + 1, &rest, one);
        if best.as_ref().is_none_or(|b| v > *b) {
            best = Some(v);
        }
        true
    });
    best.unwrap_or_else(T::zero)
}

/// Multilinear value `E_x Σ_a V(a, x) Π_i f_i(x_i, a_i)`, exactly.
pub fn kplayer_substrategy_value(g: &KPlayerGame, fs: &[Substrategy]) -> Result<Rational> {
    let k = g.players();
    if fs.len() != k {
        return Err(Error::Shape(format!(
            "{} substrategies for a {k}-player game",
            fs.len()
        )));
    }
    for (i, f) in fs.iter().enumerate() {
        if f.questions() != g.question_sizes[i] || f.answers() != g.answer_sizes[i] {
            return Err(Error::Shape(format!("substrategy {i} has the wrong shape")));
        }
    }
    let mut total = Rational::zero();
    arith::odometer(&g.question_sizes, |q| {
        let m = g.mu_at(q);
        if m.is_zero() {
            return true;
        }
        let mut inner = Rational::zero();
        arith::odometer(&g.answer_sizes, |a| {
            if g.wins(a, q) {
                let mut prod = Rational::one();
                for i in 0..k {
                    prod *= fs[i].get(q[i], a[i]);
                    if prod.is_zero() {
                        break;
                    }
                }
                inner += prod;
            }
            true
        });
        total += m * inner;
        true
    });
    Ok(total)
}
