//! Parameter planning for gap amplification: fortify, then repeat `m` times.
//!
//! Given soundness `1 − τ`, target `β` and inner alphabet `σ = |Σ_G|`, pick
//! `ε = τ/2`, the least `m` with `(1 − τ/2)^m ≤ β/2`, and `δ` so that
//! `δ·(m−1)·σ^{m−1} = β/2`. The expander degree request assumes a
//! near-Ramanujan family, `λ ≈ 2/√D`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use crate::arith::{self, Rational};
use crate::error::{Error, Result};

/// Largest repetition count the planner verifies exactly.
pub const MAX_PLANNED_ROUNDS: usize = 100_000;

#[derive(Clone, Debug, PartialEq)]
pub struct AmplificationPlan {
    pub sigma: u64,
    pub tau: Rational,
    pub beta: Rational,
    pub soundness: Rational,
    pub epsilon: Rational,
    pub m: usize,
    /// 1 when `m = 1`, where the additive term vanishes.
    pub delta: Rational,
    /// `(1 − τ/2)^m`.
    pub repeated_soundness: Rational,
    /// `δ·(m−1)·σ^{m−1}`.
    pub additive: Rational,
    /// `log2` of the classical expander target `(ε/2)·√(δ/2)`.
    pub log2_lambda_classical: f64,
    /// `log2` of the quantum-target threshold `ε²δ/56`.
    pub log2_lambda_quantum: f64,
    /// `⌈4/λ²⌉` for the classical target, if it fits in 128 bits.
    pub degree_classical: Option<u128>,
    pub degree_quantum: Option<u128>,
    pub log2_degree_classical: f64,
    pub log2_degree_quantum: f64,
}

impl AmplificationPlan {
    /// Both planning inequalities, checked exactly.
    pub fn satisfies_invariants(&self) -> bool {
        let half = &self.beta / arith::int(2);
        self.repeated_soundness <= half && self.additive <= half
    }

    /// Predicted `|X|^m` for a question set of the given size, saturating.
    pub fn question_blowup(&self, questions: u64) -> u128 {
        arith::pow_saturating(questions as u128, self.m)
    }

    /// `log2 |Σ_G|^{D·m}` for the classical degree request.
    pub fn log2_alphabet_classical(&self) -> f64 {
        self.degree_exponent(self.log2_degree_classical)
    }

    pub fn log2_alphabet_quantum(&self) -> f64 {
        self.degree_exponent(self.log2_degree_quantum)
    }

    fn degree_exponent(&self, log2_d: f64) -> f64 {
        (self.sigma as f64).log2() * log2_d.exp2() * self.m as f64
    }
}

impl fmt::Display for AmplificationPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let deg = |d: Option<u128>, l: f64| d.map_or(format!("2^{l:.2}"), |d| d.to_string());
        writeln!(f, "sigma: {}", self.sigma)?;
        writeln!(f, "tau: {}", arith::show(&self.tau))?;
        writeln!(f, "beta: {}", arith::show(&self.beta))?;
        writeln!(f, "soundness: {}", arith::show(&self.soundness))?;
        writeln!(f, "epsilon: {}", arith::show(&self.epsilon))?;
        writeln!(f, "m: {}", self.m)?;
        writeln!(f, "delta: {}", arith::show(&self.delta))?;
        writeln!(f, "repeated_soundness: {}", arith::show(&self.repeated_soundness))?;
        writeln!(f, "additive_term: {}", arith::show(&self.additive))?;
        writeln!(f, "lambda_classical: 2^{:.4}", self.log2_lambda_classical)?;
        writeln!(f, "lambda_quantum: 2^{:.4}", self.log2_lambda_quantum)?;
        writeln!(
            f,
            "degree_classical: {}",
            deg(self.degree_classical, self.log2_degree_classical)
        )?;
        writeln!(f, "degree_quantum: {}", deg(self.degree_quantum, self.log2_degree_quantum))?;
        writeln!(f, "question_size: |X|^{}, |Y|^{}", self.m, self.m)?;
        writeln!(f, "log2_outer_alphabet_classical: {:.4e}", self.log2_alphabet_classical())?;
        writeln!(f, "log2_outer_alphabet_quantum: {:.4e}", self.log2_alphabet_quantum())?;
        write!(
            f,
            "invariants: {}",
            if self.satisfies_invariants() { "hold" } else { "BROKEN" }
        )
    }
}

fn log2_big(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().unwrap_or(f64::INFINITY).log2();
    }
    let shift = bits - 64;
    let top: BigInt = n >> shift;
    top.to_f64().unwrap_or(f64::INFINITY).log2() + shift as f64
}

/// `log2` of a positive rational without overflowing `f64`.
pub fn log2_rational(r: &Rational) -> f64 {
    log2_big(r.numer()) - log2_big(r.denom())
}

fn degree_from_log2_lambda(log2_lambda: f64) -> (Option<u128>, f64) {
    // D = ⌈4/λ²⌉
    let log2_d = 2.0 - 2.0 * log2_lambda;
    let d = if log2_d < 120.0 {
        Some((log2_d.exp2()).ceil() as u128)
    } else {
        None
    };
    (d, log2_d)
}

fn pow(r: &Rational, e: usize) -> Rational {
    Rational::new(
        num_traits::pow(r.numer().clone(), e),
        num_traits::pow(r.denom().clone(), e),
    )
}

/// Plans `(ε, m, δ)` and the expander degrees that amplify soundness
/// `1 − τ` down to `β`.
pub fn gap_amplification_plan(sigma: u64, tau: &Rational, beta: &Rational) -> Result<AmplificationPlan> {
    let (zero, one) = (Rational::zero(), Rational::one());
    if !(tau > &zero && tau < &one) {
        return Err(Error::Parameter(format!("τ = {} must lie in (0, 1)", arith::show(tau))));
    }
    if !(beta > &zero && beta < &one) {
        return Err(Error::Parameter(format!("β = {} must lie in (0, 1)", arith::show(beta))));
    }
    if sigma == 0 {
        return Err(Error::Parameter("alphabet size must be positive".into()));
    }
    let two = arith::int(2);
    let epsilon = tau / &two;
    let base = &one - &epsilon;
    let half = beta / &two;

    // Start from the float estimate and settle the exact minimum by search.
    let estimate = (log2_rational(&half) / log2_rational(&base)).ceil();
    if !estimate.is_finite() || estimate > MAX_PLANNED_ROUNDS as f64 {
        return Err(Error::TooLarge {
            what: "repetition rounds",
            needed: if estimate.is_finite() { estimate as u128 } else { u128::MAX },
            cap: MAX_PLANNED_ROUNDS as u128,
        });
    }
    let mut m = (estimate as usize).max(1);
    while pow(&base, m) > half {
        m += 1;
    }
    while m > 1 && pow(&base, m - 1) <= half {
        m -= 1;
    }

    let sigma_r = Rational::from_integer(BigInt::from(sigma));
    let delta = if m == 1 {
        one.clone()
    } else {
        &half / (arith::int((m - 1) as i64) * pow(&sigma_r, m - 1))
    };
    let additive = if m == 1 {
        zero.clone()
    } else {
        &delta * arith::int((m - 1) as i64) * pow(&sigma_r, m - 1)
    };

    // λ_c = (ε/2)·√(δ/2), λ_q = ε²δ/56
    let log2_eps = log2_rational(&epsilon);
    let log2_delta = log2_rational(&delta);
    let log2_lambda_classical = log2_eps - 1.0 + 0.5 * (log2_delta - 1.0);
    let log2_lambda_quantum = 2.0 * log2_eps + log2_delta - 56f64.log2();
    let (degree_classical, log2_degree_classical) = degree_from_log2_lambda(log2_lambda_classical);
    let (degree_quantum, log2_degree_quantum) = degree_from_log2_lambda(log2_lambda_quantum);

    Ok(AmplificationPlan {
        sigma,
        tau: tau.clone(),
        beta: beta.clone(),
        soundness: &one - tau,
        epsilon,
        repeated_soundness: pow(&base, m),
        m,
        delta,
        additive,
        log2_lambda_classical,
        log2_lambda_quantum,
        degree_classical,
        degree_quantum,
        log2_degree_classical,
        log2_degree_quantum,
    })
}

/// Classical expander target `(ε/2)·√(δ/2)` as a float.
pub fn classical_lambda_target(epsilon: &Rational, delta: &Rational) -> f64 {
    (log2_rational(epsilon) - 1.0 + 0.5 * (log2_rational(delta) - 1.0)).exp2()
}

/// Quantum-target threshold `ε²δ/56` as a float.
pub fn quantum_lambda_target(epsilon: &Rational, delta: &Rational) -> f64 {
    arith::to_f64(&(epsilon * epsilon * delta / arith::int(56)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    #[test]
    fn three_quarters_to_an_eighth() {
        let p = gap_amplification_plan(4, &rat(1, 2), &rat(1, 4)).unwrap();
        assert_eq!(p.m, 8);
        assert_eq!(p.epsilon, rat(1, 4));
        // (1/8) / (7·4^7)
        assert_eq!(p.delta, rat(1, 8 * 7 * 16384));
        assert!(p.satisfies_invariants());
        assert_eq!(p.additive, rat(1, 8));
    }

    #[test]
    fn one_round_never_suffices_in_range() {
        // 1 − τ/2 > 1/2 > β/2 whenever τ, β < 1
        let p = gap_amplification_plan(4, &rat(99, 100), &rat(99, 100)).unwrap();
        assert_eq!(p.m, 2);
        assert_eq!(p.delta, rat(99, 200 * 4));
        assert!(p.satisfies_invariants());
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(gap_amplification_plan(4, &rat(0, 1), &rat(1, 2)).is_err());
        assert!(gap_amplification_plan(4, &rat(1, 2), &rat(1, 1)).is_err());
        assert!(gap_amplification_plan(0, &rat(1, 2), &rat(1, 2)).is_err());
    }

    #[test]
    fn targets_agree_with_direct_formulas() {
        let (e, d) = (rat(1, 2), rat(1, 2));
        assert!((classical_lambda_target(&e, &d) - 0.125).abs() < 1e-15);
        assert!((quantum_lambda_target(&e, &d) - 1.0 / 448.0).abs() < 1e-15);
    }

    #[test]
    fn huge_plans_stay_finite() {
        let p = gap_amplification_plan(1 << 20, &rat(1, 100), &rat(1, 1000)).unwrap();
        assert!(p.satisfies_invariants());
        assert!(p.log2_degree_classical.is_finite());
        assert!(p.degree_classical.is_none());
    }
}
