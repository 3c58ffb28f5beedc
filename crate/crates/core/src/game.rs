//! Two-player one-round games, exact values, products and subgames.

use std::borrow::Cow;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::arith::{self, check_cap, pow_saturating, Rational, Scalar};
use crate::error::{Error, Result, Violation};
use crate::strategy::Substrategy;

/// Default cap on enumeration steps for exact values.
pub const DEFAULT_ENUMERATION_CAP: u128 = 100_000_000;
/// Default cap on the number of predicate entries a constructed game may hold.
pub const DEFAULT_SIZE_CAP: u128 = 1 << 26;

/// Acceptance rule of a game, indexed `((x * y_size + y) * a_size + a) * b_size + b`.
///
/// Ordinary games use a boolean predicate. Games produced by concatenation
/// keep the hidden inner questions implicit, so their referee accepts with a
/// rational probability given the visible questions and answers.
#[derive(Clone, Debug, PartialEq)]
pub enum Predicate {
    Boolean(Vec<bool>),
    Weighted(Vec<Rational>),
}

impl Predicate {
    pub fn len(&self) -> usize {
        match self {
            Predicate::Boolean(v) => v.len(),
            Predicate::Weighted(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn weight(&self, idx: usize) -> Cow<'_, Rational> {
        match self {
            Predicate::Boolean(v) => Cow::Owned(if v[idx] {
                Rational::one()
            } else {
                Rational::zero()
            }),
            Predicate::Weighted(v) => Cow::Borrowed(&v[idx]),
        }
    }

    /// Collapses a weighted predicate whose entries are all 0 or 1.
    pub fn simplify(self) -> Predicate {
        match self {
            Predicate::Weighted(v) if v.iter().all(|w| w.is_zero() || w.is_one()) => {
                Predicate::Boolean(v.iter().map(|w| w.is_one()).collect())
            }
            p => p,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Game {
    x_size: usize,
    y_size: usize,
    a_size: usize,
    b_size: usize,
    mu: Vec<Rational>,
    predicate: Predicate,
}

/// Optimal deterministic strategy pair together with its value.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueWitness {
    pub value: Rational,
    pub alice: Vec<usize>,
    pub bob: Vec<usize>,
}

impl Game {
    pub fn new(
        x_size: usize,
        y_size: usize,
        a_size: usize,
        b_size: usize,
        mu: Vec<Rational>,
        predicate: Predicate,
    ) -> Result<Game> {
        let g = Game::new_unchecked(x_size, y_size, a_size, b_size, mu, predicate);
        validate_game(&g)?;
        Ok(g)
    }

    /// Builds a game without checking its invariants; see [`validate_game`].
    pub fn new_unchecked(
        x_size: usize,
        y_size: usize,
        a_size: usize,
        b_size: usize,
        mu: Vec<Rational>,
        predicate: Predicate,
    ) -> Game {
        Game {
            x_size,
            y_size,
            a_size,
            b_size,
            mu,
            predicate,
        }
    }

    /// Boolean game from a mass function and a win predicate `win(a, b, x, y)`.
    pub fn from_fn(
        x_size: usize,
        y_size: usize,
        a_size: usize,
        b_size: usize,
        mu: impl Fn(usize, usize) -> Rational,
        win: impl Fn(usize, usize, usize, usize) -> bool,
    ) -> Result<Game> {
        let mut m = Vec::with_capacity(x_size * y_size);
        let mut p = Vec::with_capacity(x_size * y_size * a_size * b_size);
        for x in 0..x_size {
            for y in 0..y_size {
                m.push(mu(x, y));
                for a in 0..a_size {
                    for b in 0..b_size {
                        p.push(win(a, b, x, y));
                    }
                }
            }
        }
        Game::new(x_size, y_size, a_size, b_size, m, Predicate::Boolean(p))
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }
    pub fn y_size(&self) -> usize {
        self.y_size
    }
    pub fn a_size(&self) -> usize {
        self.a_size
    }
    pub fn b_size(&self) -> usize {
        self.b_size
    }

    /// Total answer alphabet size `|A|·|B|`.
    pub fn alphabet_size(&self) -> usize {
        self.a_size * self.b_size
    }

    pub fn mu(&self, x: usize, y: usize) -> &Rational {
        &self.mu[x * self.y_size + y]
    }

    pub fn mu_entries(&self) -> &[Rational] {
        &self.mu
    }

    pub fn predicate(&self) -> &Predicate {
        &self.predicate
    }

    #[inline]
    pub fn index(&self, a: usize, b: usize, x: usize, y: usize) -> usize {
        ((x * self.y_size + y) * self.a_size + a) * self.b_size + b
    }

    /// Acceptance probability of answers `(a, b)` on questions `(x, y)`.
    pub fn accept(&self, a: usize, b: usize, x: usize, y: usize) -> Cow<'_, Rational> {
        self.predicate.weight(self.index(a, b, x, y))
    }

    pub fn x_marginal(&self) -> Vec<Rational> {
        (0..self.x_size)
            .map(|x| (0..self.y_size).map(|y| self.mu(x, y)).sum())
            .collect()
    }

    pub fn y_marginal(&self) -> Vec<Rational> {
        (0..self.y_size)
            .map(|y| (0..self.x_size).map(|x| self.mu(x, y)).sum())
            .collect()
    }

    /// `μ(x, y)·V(a, b, x, y)` in predicate index order.
    pub(crate) fn payoff_values(&self) -> Vec<Rational> {
        let mut out = Vec::with_capacity(self.predicate.len());
        for x in 0..self.x_size {
            for y in 0..self.y_size {
                let m = self.mu(x, y);
                for a in 0..self.a_size {
                    for b in 0..self.b_size {
                        let idx = self.index(a, b, x, y);
                        out.push(match &self.predicate {
                            Predicate::Boolean(v) => {
                                if v[idx] {
                                    m.clone()
                                } else {
                                    Rational::zero()
                                }
                            }
                            Predicate::Weighted(v) => m * &v[idx],
                        });
                    }
                }
            }
        }
        out
    }

    pub fn classical_value(&self) -> Result<Rational> {
        classical_value(self)
    }
}

/// Returns `Ok(())` iff every game invariant holds, otherwise the first violation.
pub fn validate_game(g: &Game) -> std::result::Result<(), Violation> {
    if g.x_size == 0 || g.y_size == 0 || g.a_size == 0 || g.b_size == 0 {
        return Err(Violation::Dimension("all set sizes must be positive".into()));
    }
    if g.mu.len() != g.x_size * g.y_size {
        return Err(Violation::Dimension(format!(
            "mu has {} entries, expected {}",
            g.mu.len(),
            g.x_size * g.y_size
        )));
    }
    let expected = g.x_size * g.y_size * g.a_size * g.b_size;
    if g.predicate.len() != expected {
        return Err(Violation::Dimension(format!(
            "predicate has {} entries, expected {}",
            g.predicate.len(),
            expected
        )));
    }
    for x in 0..g.x_size {
        for y in 0..g.y_size {
            if g.mu(x, y).is_negative() {
                return Err(Violation::NegativeMass { x, y });
            }
        }
    }
    let total: Rational = g.mu.iter().sum();
    if !total.is_one() {
        return Err(Violation::MassNotOne {
            total: arith::show(&total),
        });
    }
    if let Predicate::Weighted(w) = &g.predicate {
        for x in 0..g.x_size {
            for y in 0..g.y_size {
                for a in 0..g.a_size {
                    for b in 0..g.b_size {
                        let v = &w[g.index(a, b, x, y)];
                        if v.is_negative() || v > &Rational::one() {
                            return Err(Violation::WeightOutOfRange { a, b, x, y });
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

/// Exact classical value with the default enumeration cap.
pub fn classical_value(g: &Game) -> Result<Rational> {
    Ok(optimal_strategy(g, DEFAULT_ENUMERATION_CAP)?.value)
}

pub fn classical_value_capped(g: &Game, cap: u128) -> Result<Rational> {
    Ok(optimal_strategy(g, cap)?.value)
}

/// Maximum over deterministic strategy pairs, with the lexicographically
/// first optimal pair.
///
/// Questions are split into connected components of the support of μ. In
/// each component the side with fewer deterministic assignments is
/// enumerated and the other side best-responds question by question, which
/// is exact because the objective is linear in the responder's choices. The
/// cap bounds the total number of enumerated assignments.
pub fn optimal_strategy(g: &Game, cap: u128) -> Result<ValueWitness> {
    let components = support_components(g);
    let mut needed: u128 = 0;
    for (xs, ys) in &components {
        let ca = pow_saturating(g.a_size as u128, xs.len());
        let cb = pow_saturating(g.b_size as u128, ys.len());
        needed = needed.saturating_add(ca.min(cb));
    }
    check_cap("classical value enumeration", needed, cap)?;

    let payoff = g.payoff_values();
    let scale = arith::common_denominator(&payoff);
    if arith::fits_budget(&scale) {
        if let Some(ints) = arith::scaled_i128(&payoff, &scale) {
            let (v, p, q) = solve_components(g, &components, &ints);
            return Ok(ValueWitness {
                value: arith::from_scaled(v, &scale),
                alice: p,
                bob: q,
            });
        }
    }
    let (value, alice, bob) = solve_components(g, &components, &payoff);
    Ok(ValueWitness { value, alice, bob })
}

/// Value route over arbitrary-precision rationals only; used to cross-check
/// the scaled-integer route.
pub fn optimal_strategy_exact_only(g: &Game, cap: u128) -> Result<ValueWitness> {
    let components = support_components(g);
    let needed = components.iter().fold(0u128, |acc, (xs, ys)| {
        acc.saturating_add(
            pow_saturating(g.a_size as u128, xs.len()).min(pow_saturating(g.b_size as u128, ys.len())),
        )
    });
    check_cap("classical value enumeration", needed, cap)?;
    let payoff = g.payoff_values();
    let (value, alice, bob) = solve_components(g, &components, &payoff);
    Ok(ValueWitness { value, alice, bob })
}

type Component = (Vec<usize>, Vec<usize>);

fn support_components(g: &Game) -> Vec<Component> {
    let n = g.x_size + g.y_size;
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    let mut touched = vec![false; n];
    for x in 0..g.x_size {
        for y in 0..g.y_size {
            if !g.mu(x, y).is_zero() {
                touched[x] = true;
                touched[g.x_size + y] = true;
                let (rx, ry) = (find(&mut parent, x), find(&mut parent, g.x_size + y));
                if rx != ry {
                    parent[rx.max(ry)] = rx.min(ry);
                }
            }
        }
    }
    let mut comps: Vec<(usize, Component)> = Vec::new();
    for v in 0..n {
        if !touched[v] {
            continue;
        }
        let r = find(&mut parent, v);
        let pos = match comps.iter().position(|(root, _)| *root == r) {
            Some(p) => p,
            None => {
                comps.push((r, (Vec::new(), Vec::new())));
                comps.len() - 1
            }
        };
        if v < g.x_size {
            comps[pos].1 .0.push(v);
        } else {
            comps[pos].1 .1.push(v - g.x_size);
        }
    }
    comps.into_iter().map(|(_, c)| c).collect()
}

fn solve_components<T: Scalar>(
    g: &Game,
    components: &[Component],
    payoff: &[T],
) -> (T, Vec<usize>, Vec<usize>) {
    let mut alice = vec![0usize; g.x_size];
    let mut bob = vec![0usize; g.y_size];
    let mut total = T::zero();
    for (xs, ys) in components {
        let ca = pow_saturating(g.a_size as u128, xs.len());
        let cb = pow_saturating(g.b_size as u128, ys.len());
        if ca <= cb {
            let (v, p, q) = enumerate_side(xs, g.a_size, ys, g.b_size, |ei, ea, ri, rb| {
                payoff[g.index(ea, rb, xs[ei], ys[ri])].clone()
            });
            total = total + v;
            for (i, &x) in xs.iter().enumerate() {
                alice[x] = p[i];
            }
            for (j, &y) in ys.iter().enumerate() {
                bob[y] = q[j];
            }
        } else {
            let (v, q, p) = enumerate_side(ys, g.b_size, xs, g.a_size, |ei, eb, ri, ra| {
                payoff[g.index(ra, eb, xs[ri], ys[ei])].clone()
            });
            total = total + v;
            for (i, &x) in xs.iter().enumerate() {
                alice[x] = p[i];
            }
            for (j, &y) in ys.iter().enumerate() {
                bob[y] = q[j];
            }
        }
    }
    (total, alice, bob)
}

/// Enumerates deterministic assignments of one side in lexicographic order;
/// the other side best-responds per question (first maximal answer).
/// Column sums are updated incrementally as the odometer advances.
fn enumerate_side<T: Scalar>(
    enum_q: &[usize],
    enum_alpha: usize,
    resp_q: &[usize],
    resp_alpha: usize,
    pay: impl Fn(usize, usize, usize, usize) -> T,
) -> (T, Vec<usize>, Vec<usize>) {
    let e = enum_q.len();
    let r = resp_q.len();
    let cols = r * resp_alpha;
    // table[(i * enum_alpha + a) * cols + j * resp_alpha + b]
    let mut table = Vec::with_capacity(e * enum_alpha * cols);
    for i in 0..e {
        for a in 0..enum_alpha {
            for j in 0..r {
                for b in 0..resp_alpha {
                    table.push(pay(i, a, j, b));
                }
            }
        }
    }
    let row = |i: usize, a: usize| (i * enum_alpha + a) * cols;

    let mut digits = vec![0usize; e];
    let mut sums = vec![T::zero(); cols];
    for i in 0..e {
        let base = row(i, 0);
        for c in 0..cols {
            sums[c] = sums[c].clone() + table[base + c].clone();
        }
    }

    let evaluate = |sums: &[T]| -> (T, Vec<usize>) {
        let mut v = T::zero();
        let mut choice = Vec::with_capacity(r);
        for j in 0..r {
            let mut best = 0;
            for b in 1..resp_alpha {
                if sums[j * resp_alpha + b] > sums[j * resp_alpha + best] {
                    best = b;
                }
            }
            v = v + sums[j * resp_alpha + best].clone();
            choice.push(best);
        }
        (v, choice)
    };

    let (mut best_v, mut best_resp) = evaluate(&sums);
    let mut best_digits = digits.clone();
    loop {
        // advance odometer, last coordinate fastest
        let mut i = e;
        let mut done = true;
        while i > 0 {
            i -= 1;
            let old = digits[i];
            let new = if old + 1 < enum_alpha { old + 1 } else { 0 };
            let (ro, rn) = (row(i, old), row(i, new));
            for c in 0..cols {
                sums[c] = sums[c].clone() - table[ro + c].clone() + table[rn + c].clone();
            }
            digits[i] = new;
            if new != 0 {
                done = false;
                break;
            }
        }
        if done {
            break;
        }
        let (v, resp) = evaluate(&sums);
        if v > best_v {
            best_v = v;
            best_resp = resp;
            best_digits.copy_from_slice(&digits);
        }
    }
    (best_v, best_digits, best_resp)
}

/// `E_{(x,y)∼μ} Σ_{a,b} V(a,b,x,y) f(x,a) h(y,b)`, exactly.
pub fn substrategy_value(g: &Game, f: &Substrategy, h: &Substrategy) -> Result<Rational> {
    if f.questions() != g.x_size || f.answers() != g.a_size {
        return Err(Error::Shape(format!(
            "left substrategy is {}×{}, game needs {}×{}",
            f.questions(),
            f.answers(),
            g.x_size,
            g.a_size
        )));
    }
    if h.questions() != g.y_size || h.answers() != g.b_size {
        return Err(Error::Shape(format!(
            "right substrategy is {}×{}, game needs {}×{}",
            h.questions(),
            h.answers(),
            g.y_size,
            g.b_size
        )));
    }
    let mut total = Rational::zero();
    for x in 0..g.x_size {
        for y in 0..g.y_size {
            let m = g.mu(x, y);
            if m.is_zero() {
                continue;
            }
            let mut inner = Rational::zero();
            for a in 0..g.a_size {
                let fa = f.get(x, a);
                if fa.is_zero() {
                    continue;
                }
                for b in 0..g.b_size {
                    let w = g.accept(a, b, x, y);
                    if w.is_zero() {
                        continue;
                    }
                    inner += fa * h.get(y, b) * w.as_ref();
                }
            }
            total += m * inner;
        }
    }
    Ok(total)
}

/// `E_{(x,y)∼μ} f(x) h(y)` for substrategy marginals.
pub fn question_mass(g: &Game, f: &Substrategy, h: &Substrategy) -> Rational {
    let fm: Vec<Rational> = (0..g.x_size).map(|x| f.marginal(x)).collect();
    let hm: Vec<Rational> = (0..g.y_size).map(|y| h.marginal(y)).collect();
    let mut total = Rational::zero();
    for x in 0..g.x_size {
        for y in 0..g.y_size {
            total += g.mu(x, y) * &fm[x] * &hm[y];
        }
    }
    total
}

pub fn tensor(g1: &Game, g2: &Game) -> Result<Game> {
    tensor_capped(g1, g2, DEFAULT_SIZE_CAP)
}

/// Product game: independent question pairs, conjunction of predicates.
pub fn tensor_capped(g1: &Game, g2: &Game, cap: u128) -> Result<Game> {
    let xs = g1.x_size * g2.x_size;
    let ys = g1.y_size * g2.y_size;
    let as_ = g1.a_size * g2.a_size;
    let bs = g1.b_size * g2.b_size;
    let entries = (xs as u128) * (ys as u128) * (as_ as u128) * (bs as u128);
    check_cap("tensor product entries", entries, cap)?;

    let mut mu = Vec::with_capacity(xs * ys);
    for x1 in 0..g1.x_size {
        for x2 in 0..g2.x_size {
            for y1 in 0..g1.y_size {
                for y2 in 0..g2.y_size {
                    mu.push(g1.mu(x1, y1) * g2.mu(x2, y2));
                }
            }
        }
    }
    let boolean = matches!(
        (&g1.predicate, &g2.predicate),
        (Predicate::Boolean(_), Predicate::Boolean(_))
    );
    let n = entries as usize;
    let mut pb = Vec::new();
    let mut pw = Vec::new();
    if boolean {
        pb.reserve(n);
    } else {
        pw.reserve(n);
    }
    for x1 in 0..g1.x_size {
        for x2 in 0..g2.x_size {
            for y1 in 0..g1.y_size {
                for y2 in 0..g2.y_size {
                    for a1 in 0..g1.a_size {
                        for a2 in 0..g2.a_size {
                            for b1 in 0..g1.b_size {
                                for b2 in 0..g2.b_size {
                                    let i1 = g1.index(a1, b1, x1, y1);
                                    let i2 = g2.index(a2, b2, x2, y2);
                                    match (&g1.predicate, &g2.predicate) {
                                        (Predicate::Boolean(p1), Predicate::Boolean(p2)) => {
                                            pb.push(p1[i1] && p2[i2])
                                        }
                                        _ => pw.push(
                                            g1.predicate.weight(i1).as_ref()
                                                * g2.predicate.weight(i2).as_ref(),
                                        ),
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let predicate = if boolean {
        Predicate::Boolean(pb)
    } else {
        Predicate::Weighted(pw)
    };
    Ok(Game::new_unchecked(xs, ys, as_, bs, mu, predicate))
}

pub fn tensor_power(g: &Game, m: usize) -> Result<Game> {
    tensor_power_capped(g, m, DEFAULT_SIZE_CAP)
}

pub fn tensor_power_capped(g: &Game, m: usize, cap: u128) -> Result<Game> {
    if m == 0 {
        return Err(Error::Parameter("tensor power needs m ≥ 1".into()));
    }
    let mut acc = g.clone();
    for _ in 1..m {
        acc = tensor_capped(&acc, g, cap)?;
    }
    Ok(acc)
}

fn normalize_subset(set: &[usize], size: usize, side: &str) -> Result<Vec<usize>> {
    if set.is_empty() {
        return Err(Error::Parameter(format!("{side} question subset is empty")));
    }
    let mut s = set.to_vec();
    s.sort_unstable();
    s.dedup();
    if let Some(&bad) = s.iter().find(|&&q| q >= size) {
        return Err(Error::Parameter(format!(
            "{side} question {bad} out of range (size {size})"
        )));
    }
    Ok(s)
}

/// `μ(S×T)`.
pub fn rectangle_mass(g: &Game, s: &[usize], t: &[usize]) -> Rational {
    let mut total = Rational::zero();
    for &x in s {
        for &y in t {
            if x < g.x_size && y < g.y_size {
                total += g.mu(x, y);
            }
        }
    }
    total
}

/// The game conditioned on `x ∈ S, y ∈ T`; questions are re-indexed in
/// increasing order. A zero-mass rectangle yields an automatically accepting
/// game (uniform μ, predicate ≡ 1).
pub fn subgame(g: &Game, s: &[usize], t: &[usize]) -> Result<Game> {
    let s = normalize_subset(s, g.x_size, "left")?;
    let t = normalize_subset(t, g.y_size, "right")?;
    let mass = rectangle_mass(g, &s, &t);
    let (xs, ys) = (s.len(), t.len());
    if mass.is_zero() {
        let u = Rational::new(BigInt::one(), BigInt::from(xs * ys));
        return Ok(Game::new_unchecked(
            xs,
            ys,
            g.a_size,
            g.b_size,
            vec![u; xs * ys],
            Predicate::Boolean(vec![true; xs * ys * g.a_size * g.b_size]),
        ));
    }
    let mut mu = Vec::with_capacity(xs * ys);
    for &x in &s {
        for &y in &t {
            mu.push(g.mu(x, y) / &mass);
        }
    }
    let mut pb = Vec::new();
    let mut pw = Vec::new();
    for &x in &s {
        for &y in &t {
            for a in 0..g.a_size {
                for b in 0..g.b_size {
                    let idx = g.index(a, b, x, y);
                    match &g.predicate {
                        Predicate::Boolean(p) => pb.push(p[idx]),
                        Predicate::Weighted(p) => pw.push(p[idx].clone()),
                    }
                }
            }
        }
    }
    let predicate = match g.predicate {
        Predicate::Boolean(_) => Predicate::Boolean(pb),
        Predicate::Weighted(_) => Predicate::Weighted(pw),
    };
    Ok(Game::new_unchecked(xs, ys, g.a_size, g.b_size, mu, predicate))
}

/// True iff both marginals of μ are exactly uniform.
pub fn is_biregular(g: &Game) -> bool {
    let ux = Rational::new(BigInt::one(), BigInt::from(g.x_size));
    let uy = Rational::new(BigInt::one(), BigInt::from(g.y_size));
    g.x_marginal().iter().all(|m| *m == ux) && g.y_marginal().iter().all(|m| *m == uy)
}
