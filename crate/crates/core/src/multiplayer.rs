//! k-player concatenation: every player's questions pass through its own
//! graph, and the fortification objective is multilinear in the players'
//! induced substrategies.

use std::fmt;

use num_traits::{One, Zero};

use crate::arith::{self, Rational};
use crate::concat::{FortificationReport, ReportMode, Verdict, Witness};
use crate::error::{Error, Result};
use crate::kplayer::{kplayer_substrategy_value, kplayer_value_capped, KPlayerGame};
use crate::spectral::{BipartiteExpander, BipartiteGraph, SPECTRAL_SLACK};
use crate::strategy::Substrategy;
use crate::vertex::{self, Scaled, Side};

#[derive(Clone, Debug, PartialEq)]
pub struct MultiConcatenatedGame {
    inner: KPlayerGame,
    graphs: Vec<BipartiteGraph>,
    lambdas: Vec<f64>,
}

pub fn concatenate_multiplayer(graphs: &[BipartiteExpander], g: &KPlayerGame) -> Result<MultiConcatenatedGame> {
    if graphs.len() != g.players() {
        return Err(Error::Shape(format!(
            "{} graphs for a {}-player game",
            graphs.len(),
            g.players()
        )));
    }
    for (i, e) in graphs.iter().enumerate() {
        let gr = e.graph();
        if gr.right_size() != g.question_sizes()[i] {
            return Err(Error::Shape(format!(
                "graph {i} has {} right vertices, player {i} has {} questions",
                gr.right_size(),
                g.question_sizes()[i]
            )));
        }
        if let Some(x) = (0..gr.right_size()).find(|&x| gr.right_degree(x) == 0) {
            return Err(Error::Graph(format!("question {x} of player {i} has no neighbour")));
        }
    }
    Ok(MultiConcatenatedGame {
        inner: g.clone(),
        graphs: graphs.iter().map(|e| e.graph().clone()).collect(),
        lambdas: graphs.iter().map(BipartiteExpander::lambda).collect(),
    })
}

impl MultiConcatenatedGame {
    pub fn inner(&self) -> &KPlayerGame {
        &self.inner
    }
    pub fn graphs(&self) -> &[BipartiteGraph] {
        &self.graphs
    }

    /// Largest certified λ over all players' graphs.
    pub fn lambda(&self) -> f64 {
        self.lambdas.iter().copied().fold(0.0, f64::max)
    }

    fn sides(&self) -> Vec<Side<Rational>> {
        self.graphs
            .iter()
            .zip(self.inner.answer_sizes())
            .map(|(g, &a)| Side::from_graph(g, a))
            .collect()
    }

    /// Composite alphabet of player `i`: `|A_i|^{k_max}`.
    pub fn outer_alphabet(&self, i: usize) -> u128 {
        let k = (0..self.graphs[i].left_size())
            .map(|l| self.graphs[i].distinct_left_neighbors(l).len())
            .max()
            .unwrap_or(0);
        arith::pow_saturating(self.inner.answer_sizes()[i] as u128, k)
    }

    /// Exact outer distribution over outer question tuples, row-major.
    pub fn outer_mu(&self) -> Vec<Rational> {
        let sides = self.sides();
        let tensor = self.inner.mu_entries().to_vec();
        let dims: Vec<usize> = self.inner.question_sizes().to_vec();
        let outer_dims: Vec<usize> = sides.iter().map(Side::outer_questions).collect();
        let mut out = Vec::new();
        arith::odometer(&outer_dims, |q| {
            let mut t = tensor.clone();
            let mut d = dims.clone();
            for p in (0..sides.len()).rev() {
                let mut w = vec![Rational::zero(); dims[p]];
                for (x, wx) in &sides[p].nbrs[q[p]] {
                    w[*x] = wx.clone();
                }
                t = vertex::contract_axis(&t, &d, p, &w);
                d.remove(p);
            }
            out.push(t.into_iter().next().unwrap_or_else(Rational::zero));
            true
        });
        out
    }

    /// Induced inner substrategy of player `i`.
    pub fn induce(&self, i: usize, f: &Substrategy) -> Result<Substrategy> {
        let side = Side::from_graph(&self.graphs[i], self.inner.answer_sizes()[i]);
        if f.questions() != side.outer_questions() || f.answers() as u128 != self.outer_alphabet(i) {
            return Err(Error::Shape(format!("substrategy of player {i} has the wrong shape")));
        }
        let a = side.answers;
        let mut out = vec![Rational::zero(); side.questions * a];
        for (q, n) in side.nbrs.iter().enumerate() {
            for c in 0..f.answers() {
                let v = f.get(q, c);
                if v.is_zero() {
                    continue;
                }
                for (j, (x, w)) in n.iter().enumerate() {
                    out[x * a + vertex::composite_digit(c, n.len(), j, a)] += w * v;
                }
            }
        }
        Substrategy::new(side.questions, a, out)
    }
}

/// `sup val(G', {f_i}) − (val(G) + ε)·E Π f_i(x'_i)` over vertex tuples.
pub fn multiplayer_violation(
    cg: &MultiConcatenatedGame,
    epsilon: &Rational,
    delta: &Rational,
    cap: u128,
) -> Result<FortificationReport> {
    let inner_value = kplayer_value_capped(&cg.inner, cap)?;
    let theta = &inner_value + epsilon;
    let scaled = Scaled::new(&cg.sides(), &cg.inner.coordinate_tensor(&theta));
    let opt = vertex::exact_max(&scaled, cap)?;
    let verdict = if opt.value > *delta {
        Verdict::Violated
    } else {
        Verdict::Fortified
    };
    Ok(FortificationReport {
        mode: ReportMode::WeakAnalytic,
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

/// Re-evaluates a vertex-tuple witness through the induced substrategies.
pub fn reevaluate_multiplayer_witness(cg: &MultiConcatenatedGame, report: &FortificationReport) -> Result<Rational> {
    let Some(Witness::Vertices(vs)) = &report.witness else {
        return Err(Error::Parameter("report carries no vertex witness".into()));
    };
    let induced = vs
        .iter()
        .enumerate()
        .map(|(i, v)| cg.induce(i, &Substrategy::from_vertex(v, cg.outer_alphabet(i) as usize)?))
        .collect::<Result<Vec<_>>>()?;
    let value = kplayer_substrategy_value(&cg.inner, &induced)?;
    let mut mass = Rational::zero();
    let k = cg.inner.players();
    arith::odometer(cg.inner.question_sizes(), |q| {
        let m = cg.inner.mu_at(q);
        if !m.is_zero() {
            let mut p = Rational::one();
            for i in 0..k {
                p *= induced[i].marginal(q[i]);
            }
            mass += m * p;
        }
        true
    });
    Ok(value - (&report.inner_value + &report.epsilon) * mass)
}

/// Every vertex tuple must satisfy `val ≤ γ·val(G) + 2λk`; the check
/// computes the exact maximum of `val − γ·val(G)` and compares.
#[derive(Clone, Debug, PartialEq)]
pub struct ProofCheck {
    pub players: usize,
    pub lambda: f64,
    pub inner_value: Rational,
    pub max_excess: Rational,
    /// `2λk`, the bound the argument actually reaches.
    pub proof_bound: f64,
    /// `kλ/2`, the δ for which the stated hypothesis `λ ≤ 2δ/k` is tight.
    pub stated_delta: f64,
    pub witness: Vec<Vec<Option<usize>>>,
    pub holds: bool,
}

impl fmt::Display for ProofCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "players: {}", self.players)?;
        writeln!(f, "lambda: {:.12}", self.lambda)?;
        writeln!(f, "inner_value: {}", arith::show(&self.inner_value))?;
        writeln!(f, "max_excess: {}", arith::show(&self.max_excess))?;
        writeln!(f, "proof_bound_2_lambda_k: {:.12}", self.proof_bound)?;
        writeln!(f, "delta_from_stated_hypothesis: {:.12}", self.stated_delta)?;
        writeln!(
            f,
            "note: the stated hypothesis gives delta = k*lambda/2, the argument gives 2*lambda*k (a factor 4 apart)"
        )?;
        write!(f, "verdict: {}", if self.holds { "Pass" } else { "Fail" })
    }
}

pub fn multiplayer_proof_check(cg: &MultiConcatenatedGame, cap: u128) -> Result<ProofCheck> {
    let report = multiplayer_violation(cg, &Rational::zero(), &Rational::zero(), cap)?;
    let lambda = cg.lambda();
    let k = cg.inner.players();
    let proof_bound = 2.0 * lambda * k as f64;
    let max_excess = report.max_violation.expect("exact mode");
    let holds = arith::to_f64(&max_excess) <= proof_bound + SPECTRAL_SLACK;
    let Some(Witness::Vertices(witness)) = report.witness else {
        unreachable!("exact mode returns a vertex witness")
    };
    Ok(ProofCheck {
        players: k,
        lambda,
        inner_value: report.inner_value,
        max_excess,
        proof_bound,
        stated_delta: k as f64 * lambda / 2.0,
        witness,
        holds,
    })
}
