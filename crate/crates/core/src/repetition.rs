//! Parallel repetition bounds for concatenated games, checked exactly.
//!
//! For a concatenated game `G'` that is weakly `(ε, δ)`-fortified with inner
//! game `G`, `val(G'^⊗m) ≤ (val(G) + ε)^m + η` with
//! `η = δ·(m−1)·|Σ_G|^{m−1}`. The additive term uses the inner alphabet, not
//! the much larger outer one. The single-step form compares a product of
//! concatenated games with the product missing its last factor.

use std::fmt;

use num_traits::Zero;

use crate::arith::{self, rational_pow, Rational};
use crate::concat::{fortification_violation, ConcatenatedGame, SearchMode};
use crate::error::{Error, Result};
use crate::game::{classical_value_capped, tensor_capped, tensor_power_capped, Game};

/// Whether the fortification hypothesis was certified before the bound check.
#[derive(Clone, Debug, PartialEq)]
pub enum Hypothesis {
    Certified { max_violation: Rational },
    /// The exact check found a violation above δ; the bound need not hold.
    Refuted { max_violation: Rational },
    /// The exact check was over the cap.
    Unchecked { reason: String },
}

impl Hypothesis {
    pub fn is_certified(&self) -> bool {
        matches!(self, Hypothesis::Certified { .. })
    }

    fn check(cg: &ConcatenatedGame, epsilon: &Rational, delta: &Rational, cap: u128) -> Result<Hypothesis> {
        match fortification_violation(cg, epsilon, delta, SearchMode::Exact, cap) {
            Ok(r) => {
                let passed = r.passed();
                let v = r.max_violation.unwrap_or_else(Rational::zero);
                Ok(if passed {
                    Hypothesis::Certified { max_violation: v }
                } else {
                    Hypothesis::Refuted { max_violation: v }
                })
            }
            Err(e) if e.is_size_error() => Ok(Hypothesis::Unchecked { reason: e.to_string() }),
            Err(e) => Err(e),
        }
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hypothesis::Certified { max_violation } => {
                write!(f, "certified (max violation {})", arith::show(max_violation))
            }
            Hypothesis::Refuted { max_violation } => write!(
                f,
                "UNCERTIFIED: fortification check failed (max violation {})",
                arith::show(max_violation)
            ),
            Hypothesis::Unchecked { reason } => write!(f, "UNCERTIFIED: not checked ({reason})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RepetitionReport {
    pub m: usize,
    pub epsilon: Rational,
    pub delta: Rational,
    pub inner_value: Rational,
    /// `|Σ_G| = |A|·|B|` of the inner game.
    pub inner_alphabet: usize,
    pub eta: Rational,
    /// `(val(G) + ε)^m + η`.
    pub bound: Rational,
    /// Exact `val(G'^⊗m)`.
    pub exact: Rational,
    /// `bound − exact`.
    pub margin: Rational,
    pub hypothesis: Hypothesis,
    /// Two-factor decompositions `G'^⊗(t−1) ⊗ G'` for `t = 2..=m`, when requested.
    pub steps: Vec<StepReport>,
}

impl RepetitionReport {
    pub fn holds(&self) -> bool {
        self.margin >= Rational::zero()
    }

    /// A certified hypothesis must come with a holding bound.
    pub fn consistent(&self) -> bool {
        !self.hypothesis.is_certified() || (self.holds() && self.steps.iter().all(StepReport::consistent))
    }

    /// Certified hypothesis and every asserted inequality holds.
    pub fn passed(&self) -> bool {
        self.hypothesis.is_certified() && self.holds() && self.steps.iter().all(StepReport::passed)
    }
}

impl fmt::Display for RepetitionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "m: {}", self.m)?;
        writeln!(f, "epsilon: {}", arith::show(&self.epsilon))?;
        writeln!(f, "delta: {}", arith::show(&self.delta))?;
        writeln!(f, "inner_value: {}", arith::show(&self.inner_value))?;
        writeln!(f, "inner_alphabet: {}", self.inner_alphabet)?;
        writeln!(f, "hypothesis: {}", self.hypothesis)?;
        writeln!(f, "eta: {}", arith::show(&self.eta))?;
        writeln!(f, "exact_value: {}", arith::show(&self.exact))?;
        writeln!(f, "bound: {}", arith::show(&self.bound))?;
        writeln!(f, "margin: {}", arith::show(&self.margin))?;
        for s in &self.steps {
            writeln!(f, "step t={}:", s.t)?;
            for line in s.to_string().lines() {
                writeln!(f, "  {line}")?;
            }
        }
        write!(f, "verdict: {}", if self.passed() { "Pass" } else { "Fail" })
    }
}

/// `δ·(m−1)·σ^{m−1}`.
pub fn repetition_eta(delta: &Rational, m: usize, sigma: usize) -> Rational {
    if m <= 1 {
        return Rational::zero();
    }
    delta * arith::int((m - 1) as i64) * rational_pow(&arith::int(sigma as i64), m - 1)
}

/// Exact `val(G'^⊗m)` against `(val(G) + ε)^m + δ·(m−1)·|Σ_G|^{m−1}`.
///
/// The fortification hypothesis is checked first; an uncertified hypothesis
/// is recorded in the report rather than treated as an error. Products over
/// the cap are refused.
pub fn repetition_bound_check(
    cg: &ConcatenatedGame,
    m: usize,
    epsilon: &Rational,
    delta: &Rational,
    with_steps: bool,
    cap: u128,
) -> Result<RepetitionReport> {
    if m == 0 {
        return Err(Error::Parameter("repetition needs m ≥ 1".into()));
    }
    if epsilon < &Rational::zero() || delta < &Rational::zero() {
        return Err(Error::Parameter("ε and δ must be non-negative".into()));
    }
    let hypothesis = Hypothesis::check(cg, epsilon, delta, cap)?;
    let inner_value = classical_value_capped(cg.inner(), cap)?;
    let sigma = cg.inner().alphabet_size();
    let eta = repetition_eta(delta, m, sigma);
    let bound = rational_pow(&(&inner_value + epsilon), m) + &eta;
    let outer = cg.outer_game_capped(cap)?;
    let power = tensor_power_capped(&outer, m, cap)?;
    let exact = classical_value_capped(&power, cap)?;
    let mut steps = Vec::new();
    if with_steps {
        let cgs: Vec<&ConcatenatedGame> = std::iter::repeat_n(cg, m).collect();
        for t in 2..=m {
            steps.push(step_bound_check(&cgs[..t], epsilon, delta, cap)?);
        }
    }
    Ok(RepetitionReport {
        m,
        epsilon: epsilon.clone(),
        delta: delta.clone(),
        inner_value,
        inner_alphabet: sigma,
        margin: &bound - &exact,
        eta,
        bound,
        exact,
        hypothesis,
        steps,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepReport {
    pub t: usize,
    /// `val(G'_1 ⊗ … ⊗ G'_t)`.
    pub full_value: Rational,
    /// `val(G'_1 ⊗ … ⊗ G'_{t−1})`, 1 for `t = 1`.
    pub prefix_value: Rational,
    /// `val(G_t)` of the last inner game.
    pub last_inner_value: Rational,
    /// `Π_{i<t} |Σ_{G_i}|`.
    pub prefix_alphabet: Rational,
    pub bound: Rational,
    pub hypothesis: Hypothesis,
}

impl StepReport {
    pub fn holds(&self) -> bool {
        self.full_value <= self.bound
    }
    pub fn consistent(&self) -> bool {
        !self.hypothesis.is_certified() || self.holds()
    }
    pub fn passed(&self) -> bool {
        self.hypothesis.is_certified() && self.holds()
    }
}

impl fmt::Display for StepReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "full_value: {}", arith::show(&self.full_value))?;
        writeln!(f, "prefix_value: {}", arith::show(&self.prefix_value))?;
        writeln!(f, "last_inner_value: {}", arith::show(&self.last_inner_value))?;
        writeln!(f, "prefix_alphabet: {}", arith::show(&self.prefix_alphabet))?;
        writeln!(f, "hypothesis: {}", self.hypothesis)?;
        writeln!(f, "bound: {}", arith::show(&self.bound))?;
        write!(f, "holds: {}", self.holds())
    }
}

fn product(games: &[Game], cap: u128) -> Result<Option<Game>> {
    let mut it = games.iter();
    let Some(first) = it.next() else {
        return Ok(None);
    };
    let mut acc = first.clone();
    for g in it {
        acc = tensor_capped(&acc, g, cap)?;
    }
    Ok(Some(acc))
}

/// `val(G'_1⊗…⊗G'_t) ≤ (val(G_t)+ε)·val(G'_1⊗…⊗G'_{t−1}) + δ·Π_{i<t}|Σ_{G_i}|`.
pub fn step_bound_check(
    cgs: &[&ConcatenatedGame],
    epsilon: &Rational,
    delta: &Rational,
    cap: u128,
) -> Result<StepReport> {
    let Some((last, prefix)) = cgs.split_last() else {
        return Err(Error::Parameter("step bound needs at least one game".into()));
    };
    let hypothesis = Hypothesis::check(last, epsilon, delta, cap)?;
    let outers = cgs
        .iter()
        .map(|c| c.outer_game_capped(cap))
        .collect::<Result<Vec<_>>>()?;
    let full = product(&outers, cap)?.expect("non-empty");
    let full_value = classical_value_capped(&full, cap)?;
    let prefix_value = match product(&outers[..prefix.len()], cap)? {
        Some(p) => classical_value_capped(&p, cap)?,
        None => arith::int(1),
    };
    let last_inner_value = classical_value_capped(last.inner(), cap)?;
    let prefix_alphabet = prefix
        .iter()
        .fold(arith::int(1), |acc, c| acc * arith::int(c.inner().alphabet_size() as i64));
    let bound = (&last_inner_value + epsilon) * &prefix_value + delta * &prefix_alphabet;
    Ok(StepReport {
        t: cgs.len(),
        full_value,
        prefix_value,
        last_inner_value,
        prefix_alphabet,
        bound,
        hypothesis,
    })
}
