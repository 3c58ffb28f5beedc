//! Concatenated games `M ∘ G ∘ P` and the fortification checks on them.
//!
//! The referee samples `(x, y) ∼ μ`, then a uniform neighbour `x'` of `x` in
//! `M` and `y'` of `y` in `P`. The players see `x'` and `y'` and answer with
//! labels for every neighbour; the referee checks `V(a'(x), b'(y), x, y)`.
//!
//! Composite answers of an outer question with distinct sorted neighbours
//! `n_0 < … < n_{k-1}` are base-`|A|` numerals with `n_0` the most
//! significant digit. All outer questions share the alphabet `|A|^{k_max}`;
//! on a question with fewer neighbours a composite is read modulo `|A|^k`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::arith::{self, check_cap, pow_saturating, Rational};
use crate::error::{Error, Result};
use crate::game::{
    self, classical_value_capped, is_biregular, rectangle_mass, subgame, Game, Predicate,
    DEFAULT_ENUMERATION_CAP, DEFAULT_SIZE_CAP,
};
use crate::spectral::{BipartiteExpander, BipartiteGraph, SPECTRAL_SLACK};
use crate::strategy::Substrategy;
use crate::vertex::{self, Scaled, Side};

#[derive(Clone, Debug, PartialEq)]
pub struct ConcatenatedGame {
    inner: Game,
    left: BipartiteGraph,
    right: BipartiteGraph,
    left_lambda: Option<f64>,
    right_lambda: Option<f64>,
}

/// `M ∘ G ∘ P` with the certified λ of both graphs attached.
pub fn concatenate(m: &BipartiteExpander, g: &Game, p: &BipartiteExpander) -> Result<ConcatenatedGame> {
    let mut cg = concatenate_graphs(m.graph(), g, p.graph())?;
    cg.left_lambda = Some(m.lambda());
    cg.right_lambda = Some(p.lambda());
    Ok(cg)
}

/// Concatenation over plain graphs; spectral checks then refuse to run.
pub fn concatenate_graphs(m: &BipartiteGraph, g: &Game, p: &BipartiteGraph) -> Result<ConcatenatedGame> {
    if m.right_size() != g.x_size() || p.right_size() != g.y_size() {
        return Err(Error::Shape(format!(
            "graph right sides are {} and {}, game has {}×{} questions",
            m.right_size(),
            p.right_size(),
            g.x_size(),
            g.y_size()
        )));
    }
    for (graph, side) in [(m, "left"), (p, "right")] {
        if let Some(x) = (0..graph.right_size()).find(|&x| graph.right_degree(x) == 0) {
            return Err(Error::Graph(format!(
                "inner question {x} has no neighbour in the {side} graph"
            )));
        }
    }
    Ok(ConcatenatedGame {
        inner: g.clone(),
        left: m.clone(),
        right: p.clone(),
        left_lambda: None,
        right_lambda: None,
    })
}

impl ConcatenatedGame {
    pub fn inner(&self) -> &Game {
        &self.inner
    }
    pub fn left_graph(&self) -> &BipartiteGraph {
        &self.left
    }
    pub fn right_graph(&self) -> &BipartiteGraph {
        &self.right
    }
    pub fn left_lambda(&self) -> Option<f64> {
        self.left_lambda
    }
    pub fn right_lambda(&self) -> Option<f64> {
        self.right_lambda
    }

    /// `max(λ_M, λ_P)`, if both graphs carry a certificate.
    pub fn lambda(&self) -> Option<f64> {
        Some(self.left_lambda?.max(self.right_lambda?))
    }

    pub fn outer_x_size(&self) -> usize {
        self.left.left_size()
    }
    pub fn outer_y_size(&self) -> usize {
        self.right.left_size()
    }

    fn max_distinct(g: &BipartiteGraph) -> usize {
        (0..g.left_size())
            .map(|l| g.distinct_left_neighbors(l).len())
            .max()
            .unwrap_or(0)
    }

    /// Outer alphabet sizes `(|A|^{k_max}, |B|^{k_max})`, saturating.
    pub fn outer_alphabet(&self) -> (u128, u128) {
        (
            pow_saturating(self.inner.a_size() as u128, Self::max_distinct(&self.left)),
            pow_saturating(self.inner.b_size() as u128, Self::max_distinct(&self.right)),
        )
    }

    pub(crate) fn left_side(&self) -> Side<Rational> {
        Side::from_graph(&self.left, self.inner.a_size())
    }

    pub(crate) fn right_side(&self) -> Side<Rational> {
        Side::from_graph(&self.right, self.inner.b_size())
    }

    /// Exact outer distribution `μ'(x', y')`, row-major over `X' × Y'`.
    pub fn outer_mu(&self) -> Vec<Rational> {
        let (ls, rs) = (self.left_side(), self.right_side());
        let yo = self.outer_y_size();
        let mut out = vec![Rational::zero(); self.outer_x_size() * yo];
        for (xp, ln) in ls.nbrs.iter().enumerate() {
            for (yp, rn) in rs.nbrs.iter().enumerate() {
                let mut m = Rational::zero();
                for (x, wx) in ln {
                    for (y, wy) in rn {
                        let mu = self.inner.mu(*x, *y);
                        if !mu.is_zero() {
                            m += mu * wx * wy;
                        }
                    }
                }
                out[xp * yo + yp] = m;
            }
        }
        out
    }

    pub fn outer_game(&self) -> Result<Game> {
        self.outer_game_capped(DEFAULT_SIZE_CAP)
    }

    /// Materializes the outer game. The acceptance probability of composite
    /// answers is the conditional win probability given `(x', y')`, so it is
    /// boolean only when every inner pair behind `(x', y')` agrees.
    pub fn outer_game_capped(&self, cap: u128) -> Result<Game> {
        let (ao, bo) = self.outer_alphabet();
        let (xo, yo) = (self.outer_x_size(), self.outer_y_size());
        let size = (xo as u128 * yo as u128).saturating_mul(ao).saturating_mul(bo);
        check_cap("outer game size", size, cap)?;
        let (ao, bo) = (ao as usize, bo as usize);
        let (ls, rs) = (self.left_side(), self.right_side());
        let (a_n, b_n) = (self.inner.a_size(), self.inner.b_size());
        let mu = self.outer_mu();
        let mut weights = vec![Rational::zero(); xo * yo * ao * bo];
        for xp in 0..xo {
            for yp in 0..yo {
                let total = &mu[xp * yo + yp];
                if total.is_zero() {
                    continue;
                }
                let (ln, rn) = (&ls.nbrs[xp], &rs.nbrs[yp]);
                for c in 0..ao {
                    for e in 0..bo {
                        let mut w = Rational::zero();
                        for (i, (x, wx)) in ln.iter().enumerate() {
                            let a = vertex::composite_digit(c, ln.len(), i, a_n);
                            for (j, (y, wy)) in rn.iter().enumerate() {
                                let m = self.inner.mu(*x, *y);
                                if m.is_zero() {
                                    continue;
                                }
                                let b = vertex::composite_digit(e, rn.len(), j, b_n);
                                let v = self.inner.accept(a, b, *x, *y);
                                if !v.is_zero() {
                                    w += m * wx * wy * v.as_ref();
                                }
                            }
                        }
                        weights[((xp * yo + yp) * ao + c) * bo + e] = w / total;
                    }
                }
            }
        }
        Game::new(xo, yo, ao, bo, mu, Predicate::Weighted(weights).simplify())
    }

    /// Induced inner substrategy `F(x, a) = E_{x'∼N(x)} Σ_{a': a'(x) = a} f(x', a')`.
    pub fn induce_left(&self, f: &Substrategy) -> Result<Substrategy> {
        induce(&self.left, self.inner.a_size(), self.outer_alphabet().0, f)
    }

    pub fn induce_right(&self, g: &Substrategy) -> Result<Substrategy> {
        induce(&self.right, self.inner.b_size(), self.outer_alphabet().1, g)
    }
}

fn induce(graph: &BipartiteGraph, answers: usize, outer_answers: u128, f: &Substrategy) -> Result<Substrategy> {
    if f.questions() != graph.left_size() || f.answers() as u128 != outer_answers {
        return Err(Error::Shape(format!(
            "outer substrategy is {}×{}, expected {}×{}",
            f.questions(),
            f.answers(),
            graph.left_size(),
            outer_answers
        )));
    }
    let side = Side::from_graph(graph, answers);
    let mut out = vec![Rational::zero(); side.questions * answers];
    for (xp, n) in side.nbrs.iter().enumerate() {
        for c in 0..f.answers() {
            let v = f.get(xp, c);
            if v.is_zero() {
                continue;
            }
            for (i, (x, w)) in n.iter().enumerate() {
                out[x * answers + vertex::composite_digit(c, n.len(), i, answers)] += w * v;
            }
        }
    }
    Ok(Substrategy::new_unchecked(side.questions, answers, out))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMode {
    /// Exhaustive enumeration of vertex pairs.
    Exact,
    /// Alternating best responses from seeded random starts; a lower bound.
    Ascent { restarts: u64, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportMode {
    WeakAnalytic,
    WeakAscent,
    Combinatorial,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Fortified,
    Violated,
    /// A lower-bound search found nothing above δ; not a certificate.
    NotRefuted,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    /// One vertex per player: per outer question, abstain or a composite answer.
    Vertices(Vec<Vec<Option<usize>>>),
    /// A rectangle `S × T` of outer questions.
    Rectangle { s: Vec<usize>, t: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct FortificationReport {
    pub mode: ReportMode,
    pub epsilon: Rational,
    pub delta: Rational,
    /// Classical value of the inner game.
    pub inner_value: Rational,
    /// Weak modes: `sup val(f, g) − (val(G) + ε)·E f(x')g(y')`.
    /// Combinatorial mode: `max val(G'|S×T) − val(G') − ε` over qualifying rectangles.
    pub max_violation: Option<Rational>,
    pub witness: Option<Witness>,
    pub verdict: Verdict,
}

impl FortificationReport {
    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Violated
    }
}

impl fmt::Display for FortificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "mode: {:?}", self.mode)?;
        writeln!(f, "epsilon: {}", arith::show(&self.epsilon))?;
        writeln!(f, "delta: {}", arith::show(&self.delta))?;
        writeln!(f, "inner_value: {}", arith::show(&self.inner_value))?;
        match &self.max_violation {
            Some(v) => writeln!(f, "max_violation: {}", arith::show(v))?,
            None => writeln!(f, "max_violation: none")?,
        }
        match &self.witness {
            Some(Witness::Vertices(vs)) => {
                for (i, v) in vs.iter().enumerate() {
                    let cells: Vec<String> = v
                        .iter()
                        .map(|c| c.map_or("-".to_string(), |a| a.to_string()))
                        .collect();
                    writeln!(f, "witness_player_{i}: [{}]", cells.join(", "))?;
                }
            }
            Some(Witness::Rectangle { s, t }) => writeln!(f, "witness_rectangle: S={s:?} T={t:?}")?,
            None => {}
        }
        write!(f, "verdict: {:?}", self.verdict)
    }
}

fn theta(inner_value: &Rational, epsilon: &Rational) -> Rational {
    inner_value + epsilon
}

/// Weak fortification: the supremum over substrategy pairs of
/// `val(G', f, g) − (val(G) + ε)·E_{μ'} f(x')g(y')`, attained at a vertex
/// pair because the objective is bilinear. Fortified iff it is at most δ.
pub fn fortification_violation(
    cg: &ConcatenatedGame,
    epsilon: &Rational,
    delta: &Rational,
    mode: SearchMode,
    cap: u128,
) -> Result<FortificationReport> {
    let inner_value = classical_value_capped(&cg.inner, cap)?;
    let t = vertex::two_player_tensor(&cg.inner, &theta(&inner_value, epsilon));
    let scaled = Scaled::new(&[cg.left_side(), cg.right_side()], &t);
    let (opt, report_mode) = match mode {
        SearchMode::Exact => (vertex::exact_max(&scaled, cap)?, ReportMode::WeakAnalytic),
        SearchMode::Ascent { restarts, seed } => {
            for s in [cg.left_side(), cg.right_side()] {
                s.radix(cap)?;
            }
            (vertex::ascent(&scaled, restarts, seed), ReportMode::WeakAscent)
        }
    };
    let verdict = if opt.value > *delta {
        Verdict::Violated
    } else if report_mode == ReportMode::WeakAnalytic {
        Verdict::Fortified
    } else {
        Verdict::NotRefuted
    };
    Ok(FortificationReport {
        mode: report_mode,
        epsilon: epsilon.clone(),
        delta: delta.clone(),
        inner_value,
        max_violation: Some(opt.value),
        witness: Some(Witness::Vertices(
            opt.vertices.iter().map(|v| vertex::to_choices(v)).collect(),
        )),
        verdict,
    })
}

/// Recomputes a vertex-pair witness on the materialized outer game:
/// `val(G', f, g) − (val(G) + ε)·E_{μ'} f(x')g(y')`.
pub fn reevaluate_witness(cg: &ConcatenatedGame, report: &FortificationReport) -> Result<Rational> {
    let Some(Witness::Vertices(vs)) = &report.witness else {
        return Err(Error::Parameter("report carries no vertex witness".into()));
    };
    let outer = cg.outer_game()?;
    let f = Substrategy::from_vertex(&vs[0], outer.a_size())?;
    let g = Substrategy::from_vertex(&vs[1], outer.b_size())?;
    let value = game::substrategy_value(&outer, &f, &g)?;
    let mass = game::question_mass(&outer, &f, &g);
    Ok(value - theta(&report.inner_value, &report.epsilon) * mass)
}

/// Every rectangle `S × T` of outer questions with `μ'(S×T) ≥ δ` must have
/// subgame value at most `val(G') + ε`.
pub fn combinatorial_fortification_check(
    cg: &ConcatenatedGame,
    epsilon: &Rational,
    delta: &Rational,
    cap: u128,
) -> Result<FortificationReport> {
    let (xo, yo) = (cg.outer_x_size(), cg.outer_y_size());
    let rects = pow_saturating(2, xo).saturating_mul(pow_saturating(2, yo));
    check_cap("rectangle enumeration", rects, cap)?;
    let outer = cg.outer_game()?;
    let outer_value = classical_value_capped(&outer, cap)?;
    let inner_value = classical_value_capped(&cg.inner, cap)?;
    let bound = &outer_value + epsilon;
    let mut worst: Option<(Rational, Vec<usize>, Vec<usize>)> = None;
    for sm in 1u64..(1 << xo) {
        let s: Vec<usize> = (0..xo).filter(|i| sm >> i & 1 == 1).collect();
        for tm in 1u64..(1 << yo) {
            let t: Vec<usize> = (0..yo).filter(|j| tm >> j & 1 == 1).collect();
            if rectangle_mass(&outer, &s, &t) < *delta {
                continue;
            }
            let v = classical_value_capped(&subgame(&outer, &s, &t)?, cap)? - &bound;
            if worst.as_ref().is_none_or(|(w, _, _)| v > *w) {
                worst = Some((v, s.clone(), t));
            }
        }
    }
    let verdict = match &worst {
        Some((v, _, _)) if v > &Rational::zero() => Verdict::Violated,
        _ => Verdict::Fortified,
    };
    Ok(FortificationReport {
        mode: ReportMode::Combinatorial,
        epsilon: epsilon.clone(),
        delta: delta.clone(),
        inner_value,
        max_violation: worst.as_ref().map(|w| w.0.clone()),
        witness: worst.map(|(_, s, t)| Witness::Rectangle { s, t }),
        verdict,
    })
}

/// Strong-to-combinatorial implication: if the weak check certifies
/// `(ε, εδ)`, the combinatorial check at `(2ε, δ)` must pass.
#[derive(Clone, Debug, PartialEq)]
pub struct ImplicationCheck {
    pub premise: bool,
    pub weak: FortificationReport,
    pub combinatorial: Option<FortificationReport>,
    pub holds: bool,
}

pub fn strong_implies_combinatorial(
    cg: &ConcatenatedGame,
    epsilon: &Rational,
    delta: &Rational,
    cap: u128,
) -> Result<ImplicationCheck> {
    let weak = fortification_violation(cg, epsilon, &(epsilon * delta), SearchMode::Exact, cap)?;
    let premise = weak.verdict == Verdict::Fortified;
    if !premise {
        return Ok(ImplicationCheck {
            premise,
            weak,
            combinatorial: None,
            holds: true,
        });
    }
    let comb = combinatorial_fortification_check(cg, &(epsilon * Rational::from_integer(2.into())), delta, cap)?;
    let holds = comb.verdict == Verdict::Fortified;
    Ok(ImplicationCheck {
        premise,
        weak,
        combinatorial: Some(comb),
        holds,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointwiseReport {
    pub lambda: f64,
    pub inner_value: Rational,
    /// Number of vertex pairs covered.
    pub vertex_pairs: u128,
    /// Distinct pairs of induced substrategies actually evaluated.
    pub distinct_pairs: u128,
    /// Minimum of `bound − value` over all pairs (slack included in bound).
    pub worst_margin: f64,
    pub worst_value: Rational,
    pub worst_gamma: Rational,
    pub worst: Vec<Vec<Option<usize>>>,
    pub passed: bool,
}

impl fmt::Display for PointwiseReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "mode: Pointwise")?;
        writeln!(f, "lambda: {:.12}", self.lambda)?;
        writeln!(f, "inner_value: {}", arith::show(&self.inner_value))?;
        writeln!(f, "vertex_pairs: {}", self.vertex_pairs)?;
        writeln!(f, "distinct_pairs: {}", self.distinct_pairs)?;
        writeln!(f, "worst_margin: {:.12e}", self.worst_margin)?;
        writeln!(f, "worst_value: {}", arith::show(&self.worst_value))?;
        writeln!(f, "worst_gamma: {}", arith::show(&self.worst_gamma))?;
        write!(f, "verdict: {}", if self.passed { "Pass" } else { "Fail" })
    }
}

/// `val(G', f, g) ≤ val(G)·γ + 2√2·λ·√γ + 4λ²` for every vertex pair, with
/// `γ = E_{μ'} f(x')g(y')` and `λ = max(λ_M, λ_P)`. Pairs with identical
/// induced substrategies share both sides of the inequality, so each
/// distinct induced pair is evaluated once.
pub fn pointwise_bound_check(cg: &ConcatenatedGame, cap: u128) -> Result<PointwiseReport> {
    let lambda = cg
        .lambda()
        .ok_or_else(|| Error::Uncertified("both graphs need a certified λ".into()))?;
    if !is_biregular(&cg.inner) {
        return Err(Error::Parameter("inner game must be biregular".into()));
    }
    let inner_value = classical_value_capped(&cg.inner, cap)?;
    let (ls, rs) = (cg.left_side(), cg.right_side());
    let pairs = ls.vertex_count().saturating_mul(rs.vertex_count());
    check_cap(
        "vertex listing",
        ls.vertex_count().saturating_add(rs.vertex_count()),
        cap,
    )?;
    let t = vertex::two_player_tensor(&cg.inner, &Rational::zero());
    let g = &cg.inner;
    let mass: Vec<Rational> = g.mu_entries().to_vec();
    // scale tensor, mass and weights to integers
    let lm = arith::common_denominator(ls.nbrs.iter().flatten().map(|(_, w)| w));
    let lp = arith::common_denominator(rs.nbrs.iter().flatten().map(|(_, w)| w));
    let st = arith::common_denominator(t.iter().chain(mass.iter()));
    let to = |s: &BigInt| Rational::from_integer(s.clone());
    let ls = ls.map(|w| w * to(&lm));
    let rs = rs.map(|w| w * to(&lp));
    let t: Vec<Rational> = t.iter().map(|v| v * to(&st)).collect();
    let mass: Vec<Rational> = mass.iter().map(|v| v * to(&st)).collect();
    let scale = Rational::from_integer(&st * &lm * &lp);
    let fl = vertex::distinct_induced(&ls, cap)?;
    let gl = vertex::distinct_induced(&rs, cap)?;
    let distinct = fl.len() as u128 * gl.len() as u128;
    check_cap("distinct induced pairs", distinct, cap)?;

    let (xs, ys, a_n, b_n) = (g.x_size(), g.y_size(), g.a_size(), g.b_size());
    let lam2 = 4.0 * lambda * lambda;
    let mut worst: Option<(f64, Rational, Rational, usize, usize)> = None;
    for (gi, (gv, _)) in gl.iter().enumerate() {
        let r = vertex::contract_axis(&t, &[xs * a_n, ys * b_n], 1, gv);
        let gm: Vec<Rational> = (0..ys)
            .map(|y| gv[y * b_n..(y + 1) * b_n].iter().sum())
            .collect();
        let mg: Vec<Rational> = (0..xs)
            .map(|x| (0..ys).map(|y| &mass[x * ys + y] * &gm[y]).sum())
            .collect();
        for (fi, (fv, _)) in fl.iter().enumerate() {
            let value: Rational = fv.iter().zip(&r).map(|(a, b)| a * b).sum::<Rational>() / &scale;
            let gamma: Rational = (0..xs)
                .map(|x| fv[x * a_n..(x + 1) * a_n].iter().sum::<Rational>() * &mg[x])
                .sum::<Rational>()
                / &scale;
            let gf = gamma.to_f64().unwrap_or(f64::NAN);
            let bound = inner_value.to_f64().unwrap_or(f64::NAN) * gf
                + 2.0 * 2f64.sqrt() * lambda * gf.max(0.0).sqrt()
                + lam2
                + SPECTRAL_SLACK;
            let margin = bound - value.to_f64().unwrap_or(f64::NAN);
            if worst.as_ref().is_none_or(|w| margin < w.0) {
                worst = Some((margin, value, gamma, fi, gi));
            }
        }
    }
    let (margin, value, gamma, fi, gi) = worst.expect("at least one pair");
    Ok(PointwiseReport {
        lambda,
        inner_value,
        vertex_pairs: pairs,
        distinct_pairs: distinct,
        worst_margin: margin,
        worst_value: value,
        worst_gamma: gamma,
        worst: vec![vertex::to_choices(&fl[fi].1), vertex::to_choices(&gl[gi].1)],
        passed: margin >= 0.0,
    })
}

/// Whether λ is small enough for the pointwise bound to imply weak
/// `(ε, δ)` fortification, and if so whether the exact check agrees.
#[derive(Clone, Debug, PartialEq)]
pub enum WeakImplication {
    NotApplicable { lambda: f64, threshold: f64 },
    Checked { threshold: f64, report: FortificationReport, holds: bool },
}

/// With `λ ≤ (ε/2)·√(δ/2)`, the pointwise bound gives violation at most δ
/// both when `γ ≤ δ` and when `γ > δ`; the exact maximum must agree.
pub fn pointwise_implies_weak(
    cg: &ConcatenatedGame,
    epsilon: &Rational,
    delta: &Rational,
    cap: u128,
) -> Result<WeakImplication> {
    let lambda = cg
        .lambda()
        .ok_or_else(|| Error::Uncertified("both graphs need a certified λ".into()))?;
    let threshold = arith::to_f64(epsilon) / 2.0 * (arith::to_f64(delta) / 2.0).sqrt();
    if lambda > threshold {
        return Ok(WeakImplication::NotApplicable { lambda, threshold });
    }
    let report = fortification_violation(cg, epsilon, delta, SearchMode::Exact, cap)?;
    let holds = report.verdict == Verdict::Fortified;
    Ok(WeakImplication::Checked {
        threshold,
        report,
        holds,
    })
}

/// Default cap for exact checks.
pub const DEFAULT_CHECK_CAP: u128 = DEFAULT_ENUMERATION_CAP;
