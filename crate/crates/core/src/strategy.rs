use num_traits::{One, Signed, Zero};

use crate::arith::Rational;
use crate::error::{Error, Result};

/// Per-question sub-probability vectors over answers: `f(x, a) ∈ [0, 1]`
/// with `Σ_a f(x, a) ≤ 1` for every question `x`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Substrategy {
    questions: usize,
    answers: usize,
    f: Vec<Rational>,
}

impl Substrategy {
    pub fn new(questions: usize, answers: usize, f: Vec<Rational>) -> Result<Substrategy> {
        if f.len() != questions * answers {
            return Err(Error::Shape(format!(
                "substrategy has {} entries, expected {}×{}",
                f.len(),
                questions,
                answers
            )));
        }
        let s = Substrategy {
            questions,
            answers,
            f,
        };
        for x in 0..questions {
            for a in 0..answers {
                let v = s.get(x, a);
                if v.is_negative() || v > &Rational::one() {
                    return Err(Error::Parameter(format!(
                        "substrategy entry ({x}, {a}) outside [0, 1]"
                    )));
                }
            }
            if s.marginal(x) > Rational::one() {
                return Err(Error::Parameter(format!(
                    "substrategy row {x} sums to more than 1"
                )));
            }
        }
        Ok(s)
    }

    pub(crate) fn new_unchecked(questions: usize, answers: usize, f: Vec<Rational>) -> Substrategy {
        Substrategy {
            questions,
            answers,
            f,
        }
    }

    pub fn zero(questions: usize, answers: usize) -> Substrategy {
        Substrategy {
            questions,
            answers,
            f: vec![Rational::zero(); questions * answers],
        }
    }

    /// Complete 0/1 strategy answering `assignment[x]` on question `x`.
    pub fn deterministic(assignment: &[usize], answers: usize) -> Result<Substrategy> {
        let v: Vec<Option<usize>> = assignment.iter().map(|&a| Some(a)).collect();
        Substrategy::from_vertex(&v, answers)
    }

    /// Vertex of the substrategy polytope: per question, abstain (`None`) or
    /// put mass 1 on a single answer.
    pub fn from_vertex(choice: &[Option<usize>], answers: usize) -> Result<Substrategy> {
        let mut s = Substrategy::zero(choice.len(), answers);
        for (x, c) in choice.iter().enumerate() {
            if let Some(a) = *c {
                if a >= answers {
                    return Err(Error::Parameter(format!(
                        "answer {a} out of range for question {x}"
                    )));
                }
                s.f[x * answers + a] = Rational::one();
            }
        }
        Ok(s)
    }

    pub fn questions(&self) -> usize {
        self.questions
    }

    pub fn answers(&self) -> usize {
        self.answers
    }

    pub fn get(&self, x: usize, a: usize) -> &Rational {
        &self.f[x * self.answers + a]
    }

    pub fn row(&self, x: usize) -> &[Rational] {
        &self.f[x * self.answers..(x + 1) * self.answers]
    }

    pub fn entries(&self) -> &[Rational] {
        &self.f
    }

    /// `f(x) = Σ_a f(x, a)`, computed on demand.
    pub fn marginal(&self, x: usize) -> Rational {
        self.row(x).iter().sum()
    }

    pub fn is_complete(&self) -> bool {
        (0..self.questions).all(|x| self.marginal(x).is_one())
    }

    /// True iff every entry is 0 or 1 (a vertex of the polytope).
    pub fn is_vertex(&self) -> bool {
        self.f.iter().all(|v| v.is_zero() || v.is_one())
    }
}
