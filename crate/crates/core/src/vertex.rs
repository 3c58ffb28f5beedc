//! Vertex enumeration over substrategy polytopes of concatenated games.
//!
//! A vertex of the substrategy polytope answers each question with a single
//! answer or abstains. For an outer player a vertex is one digit per outer
//! question: 0 abstains and `c + 1` plays composite answer `c`.
//!
//! Every objective here is multilinear in the players' induced inner
//! substrategies, so the supremum over the product of polytopes is attained
//! at a vertex tuple. All players but one are enumerated; the remaining one
//! best-responds question by question, which is exact because its induced
//! substrategy is a sum of independent per-question contributions.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::{self, check_cap, pow_saturating, Rational, Scalar};
use crate::error::Result;
use crate::spectral::BipartiteGraph;

/// One outer player: distinct inner neighbours of each outer question with
/// weights `mult(x, x') / deg(x)`.
#[derive(Clone, Debug)]
pub(crate) struct Side<T> {
    pub questions: usize,
    pub answers: usize,
    pub nbrs: Vec<Vec<(usize, T)>>,
}

impl Side<Rational> {
    pub fn from_graph(g: &BipartiteGraph, answers: usize) -> Side<Rational> {
        let nbrs = (0..g.left_size())
            .map(|l| {
                g.distinct_left_neighbors(l)
                    .into_iter()
                    .map(|(x, m)| (x, arith::rat(m as i64, g.right_degree(x) as i64)))
                    .collect()
            })
            .collect();
        Side {
            questions: g.right_size(),
            answers,
            nbrs,
        }
    }
}

impl<T> Side<T> {
    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> Side<U> {
        Side {
            questions: self.questions,
            answers: self.answers,
            nbrs: self
                .nbrs
                .iter()
                .map(|n| n.iter().map(|(x, w)| (*x, f(w))).collect())
                .collect(),
        }
    }

    pub fn outer_questions(&self) -> usize {
        self.nbrs.len()
    }

    /// `|A|^k` for an outer question with `k` distinct neighbours.
    pub fn composites(&self, q: usize) -> u128 {
        pow_saturating(self.answers as u128, self.nbrs[q].len())
    }

    /// Per-question digit ranges, refusing composite alphabets beyond `cap`.
    pub fn radix(&self, cap: u128) -> Result<Vec<usize>> {
        (0..self.outer_questions())
            .map(|q| {
                let c = self.composites(q);
                check_cap("composite answer alphabet", c, cap.min(u32::MAX as u128))?;
                Ok(c as usize + 1)
            })
            .collect()
    }

    /// Number of vertices, `Π (|A|^k + 1)`, saturating.
    pub fn vertex_count(&self) -> u128 {
        (0..self.outer_questions()).fold(1u128, |acc, q| {
            acc.saturating_mul(self.composites(q).saturating_add(1))
        })
    }
}

/// Inner answer assigned to the `i`-th of `k` neighbours by composite `c`
/// (first neighbour is the most significant digit).
pub(crate) fn composite_digit(c: usize, k: usize, i: usize, answers: usize) -> usize {
    let mut v = c;
    for _ in 0..(k - 1 - i) {
        v /= answers;
    }
    v % answers
}

fn compose(digits: &[usize], answers: usize) -> usize {
    digits.iter().fold(0, |acc, &d| acc * answers + d)
}

/// Induced inner substrategy of a vertex, as a vector over `x·|A| + a`.
pub(crate) fn induced<T: Scalar>(side: &Side<T>, vertex: &[usize]) -> Vec<T> {
    let a = side.answers;
    let mut f = vec![T::zero(); side.questions * a];
    for (q, &d) in vertex.iter().enumerate() {
        if d == 0 {
            continue;
        }
        let n = &side.nbrs[q];
        for (i, (x, w)) in n.iter().enumerate() {
            let idx = x * a + composite_digit(d - 1, n.len(), i, a);
            f[idx] = f[idx].clone() + w.clone();
        }
    }
    f
}

pub(crate) fn to_choices(vertex: &[usize]) -> Vec<Option<usize>> {
    vertex.iter().map(|&d| d.checked_sub(1)).collect()
}

/// Contracts axis `axis` of a row-major tensor with `w`.
pub(crate) fn contract_axis<T: Scalar>(t: &[T], dims: &[usize], axis: usize, w: &[T]) -> Vec<T> {
    let outer: usize = dims[..axis].iter().product();
    let inner: usize = dims[axis + 1..].iter().product();
    let n = dims[axis];
    let mut out = vec![T::zero(); outer * inner];
    for o in 0..outer {
        for (c, wc) in w.iter().enumerate() {
            if wc.is_zero() {
                continue;
            }
            let base = (o * n + c) * inner;
            for i in 0..inner {
                let slot = &mut out[o * inner + i];
                *slot = slot.clone() + wc.clone() * t[base + i].clone();
            }
        }
    }
    out
}

/// Best vertex response of `side` to the linear functional `h` over
/// `x·|A| + a`: abstain unless the question's best total is positive, and
/// take the first maximal answer per neighbour.
pub(crate) fn respond<T: Scalar>(side: &Side<T>, h: &[T]) -> (T, Vec<usize>) {
    let a = side.answers;
    let best: Vec<(T, usize)> = (0..side.questions)
        .map(|x| {
            let row = &h[x * a..(x + 1) * a];
            let mut arg = 0;
            for b in 1..a {
                if row[b] > row[arg] {
                    arg = b;
                }
            }
            (row[arg].clone(), arg)
        })
        .collect();
    let mut total = T::zero();
    let mut vertex = Vec::with_capacity(side.outer_questions());
    for n in &side.nbrs {
        let mut s = T::zero();
        for (x, w) in n {
            s = s + w.clone() * best[*x].0.clone();
        }
        if s > T::zero() {
            total = total + s;
            let digits: Vec<usize> = n.iter().map(|(x, _)| best[*x].1).collect();
            vertex.push(compose(&digits, a) + 1);
        } else {
            vertex.push(0);
        }
    }
    (total, vertex)
}

/// A multilinear objective `Σ T[c_1, …, c_k] Π_i F_i[c_i]` over the
/// induced substrategies of `k` outer players, with every entry an integer
/// multiple of `1 / scale`.
#[derive(Clone, Debug)]
pub(crate) struct Kernel<T> {
    pub sides: Vec<Side<T>>,
    pub tensor: Vec<T>,
    pub dims: Vec<usize>,
}

impl<T: Scalar> Kernel<T> {
    fn contract_all_but(&self, keep: Option<usize>, vertices: &[Vec<usize>]) -> Vec<T> {
        let mut t = self.tensor.clone();
        let mut dims = self.dims.clone();
        for p in (0..self.sides.len()).rev() {
            if Some(p) == keep {
                continue;
            }
            let w = induced(&self.sides[p], &vertices[p]);
            t = contract_axis(&t, &dims, p, &w);
            dims.remove(p);
        }
        t
    }

    pub fn evaluate(&self, vertices: &[Vec<usize>]) -> T {
        self.contract_all_but(None, vertices)
            .into_iter()
            .next()
            .unwrap_or_else(T::zero)
    }
}

/// Exact kernel: either scaled to `i128` or kept as rationals, with the
/// common scale that converts results back.
pub(crate) enum Scaled {
    Int(Kernel<i128>, BigInt),
    Big(Kernel<Rational>, BigInt),
}

impl Scaled {
    pub fn new(sides: &[Side<Rational>], tensor: &[Rational]) -> Scaled {
        let mut total = BigInt::from(1);
        let sides: Vec<Side<Rational>> = sides
            .iter()
            .map(|s| {
                let l = arith::common_denominator(s.nbrs.iter().flatten().map(|(_, w)| w));
                total *= &l;
                let lr = Rational::from_integer(l);
                s.map(|w| w * &lr)
            })
            .collect();
        let st = arith::common_denominator(tensor);
        total *= &st;
        let sr = Rational::from_integer(st);
        let tensor: Vec<Rational> = tensor.iter().map(|v| v * &sr).collect();
        let dims: Vec<usize> = sides.iter().map(|s| s.questions * s.answers).collect();
        let big = Kernel {
            sides,
            tensor,
            dims,
        };
        // crude magnitude bound for every partial sum the kernels form
        let mass: BigInt = big
            .tensor
            .iter()
            .map(|v| BigInt::from(v.to_integer().magnitude().clone()))
            .sum();
        let edges: usize = big.sides.iter().map(|s| s.nbrs.iter().map(Vec::len).sum::<usize>()).sum();
        let bound = mass * &total * BigInt::from(edges + 2);
        if arith::fits_budget(&bound) {
            let to_int = |v: &Rational| v.to_integer().to_i128().expect("bounded");
            let small = Kernel {
                sides: big.sides.iter().map(|s| s.map(to_int)).collect(),
                tensor: big.tensor.iter().map(to_int).collect(),
                dims: big.dims.clone(),
            };
            Scaled::Int(small, total)
        } else {
            Scaled::Big(big, total)
        }
    }

    pub fn vertex_counts(&self) -> Vec<u128> {
        match self {
            Scaled::Int(k, _) => k.sides.iter().map(Side::vertex_count).collect(),
            Scaled::Big(k, _) => k.sides.iter().map(Side::vertex_count).collect(),
        }
    }
}

/// Maximizer and its value over all vertex tuples.
#[derive(Clone, Debug)]
pub(crate) struct Optimum {
    pub value: Rational,
    pub vertices: Vec<Vec<usize>>,
}

fn unscale<T: Scalar>(v: T, scale: &BigInt, back: impl Fn(T) -> Rational) -> Rational {
    back(v) / Rational::from_integer(scale.clone())
}

/// Exact maximum over all vertex tuples. The player with the most vertices
/// best-responds; the others are enumerated, counting one step per tuple.
pub(crate) fn exact_max(s: &Scaled, cap: u128) -> Result<Optimum> {
    let counts = s.vertex_counts();
    let responder = (0..counts.len())
        .rev()
        .max_by_key(|&i| counts[i])
        .expect("at least two players");
    let steps = counts
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != responder)
        .fold(1u128, |acc, (_, &c)| acc.saturating_mul(c));
    check_cap("vertex enumeration", steps, cap)?;
    match s {
        Scaled::Int(k, scale) => {
            let (v, vs) = exact_kernel(k, responder, cap)?;
            Ok(Optimum {
                value: unscale(v, scale, |v| Rational::from_integer(v.into())),
                vertices: vs,
            })
        }
        Scaled::Big(k, scale) => {
            let (v, vs) = exact_kernel(k, responder, cap)?;
            Ok(Optimum {
                value: unscale(v, scale, |v| v),
                vertices: vs,
            })
        }
    }
}

/// Distinct induced vectors of every vertex, each with its first vertex in
/// lexicographic order.
pub(crate) fn distinct_induced<T: Scalar>(side: &Side<T>, cap: u128) -> Result<Vec<(Vec<T>, Vec<usize>)>> {
    let radix = side.radix(cap)?;
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    arith::odometer(&radix, |v| {
        let f = induced(side, v);
        if seen.insert(f.clone()) {
            out.push((f, v.to_vec()));
        }
        true
    });
    Ok(out)
}

fn exact_kernel<T: Scalar>(k: &Kernel<T>, responder: usize, cap: u128) -> Result<(T, Vec<Vec<usize>>)> {
    let players = k.sides.len();
    let enumerated: Vec<usize> = (0..players).filter(|&p| p != responder).collect();
    let lists = enumerated[1..]
        .iter()
        .map(|&p| distinct_induced(&k.sides[p], cap))
        .collect::<Result<Vec<_>>>()?;
    let head = enumerated[0];
    let radix = k.sides[head].radix(cap)?;

    let mut best: Option<(T, Vec<Vec<usize>>)> = None;
    let mut current = vec![Vec::new(); players];
    arith::odometer(&radix, |v| {
        let f = induced(&k.sides[head], v);
        let t = contract_axis(&k.tensor, &k.dims, head, &f);
        let mut dims = k.dims.clone();
        dims.remove(head);
        let mut axes: Vec<usize> = (0..players).collect();
        axes.remove(head);
        current[head] = v.to_vec();
        descend(k, responder, &enumerated[1..], &lists, t, dims, axes, &mut current, &mut best);
        true
    });
    Ok(best.expect("at least one vertex"))
}

#[allow(clippy::too_many_arguments)]
fn descend<T: Scalar>(
    k: &Kernel<T>,
    responder: usize,
    rest: &[usize],
    lists: &[Vec<(Vec<T>, Vec<usize>)>],
    t: Vec<T>,
    dims: Vec<usize>,
    axes: Vec<usize>,
    current: &mut Vec<Vec<usize>>,
    best: &mut Option<(T, Vec<Vec<usize>>)>,
) {
    let Some((&p, rest_tail)) = rest.split_first() else {
        let (v, rv) = respond(&k.sides[responder], &t);
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            current[responder] = rv;
            *best = Some((v, current.clone()));
        }
        return;
    };
    let pos = axes.iter().position(|&a| a == p).expect("axis present");
    let mut sub_dims = dims.clone();
    sub_dims.remove(pos);
    let mut sub_axes = axes.clone();
    sub_axes.remove(pos);
    for (f, v) in &lists[0] {
        let next = contract_axis(&t, &dims, pos, f);
        current[p] = v.clone();
        descend(
            k,
            responder,
            rest_tail,
            &lists[1..],
            next,
            sub_dims.clone(),
            sub_axes.clone(),
            current,
            best,
        );
    }
}

/// Alternating best responses from seeded random vertex tuples; returns
/// the best tuple found, a lower bound on the exact maximum.
pub(crate) fn ascent(s: &Scaled, restarts: u64, seed: u64) -> Optimum {
    match s {
        Scaled::Int(k, scale) => {
            let (v, vs) = ascent_kernel(k, restarts, seed);
            Optimum {
                value: unscale(v, scale, |v| Rational::from_integer(v.into())),
                vertices: vs,
            }
        }
        Scaled::Big(k, scale) => {
            let (v, vs) = ascent_kernel(k, restarts, seed);
            Optimum {
                value: unscale(v, scale, |v| v),
                vertices: vs,
            }
        }
    }
}

fn ascent_kernel<T: Scalar>(k: &Kernel<T>, restarts: u64, seed: u64) -> (T, Vec<Vec<usize>>) {
    let players = k.sides.len();
    let mut best: Option<(T, Vec<Vec<usize>>)> = None;
    for r in 0..restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(r);
        let mut vs: Vec<Vec<usize>> = k
            .sides
            .iter()
            .map(|s| {
                (0..s.outer_questions())
                    .map(|q| {
                        let c = s.composites(q).min(u64::MAX as u128) as u64;
                        if rng.gen_bool(0.5) {
                            0
                        } else {
                            rng.gen_range(0..c) as usize + 1
                        }
                    })
                    .collect()
            })
            .collect();
        let mut value = k.evaluate(&vs);
        loop {
            let mut improved = false;
            for p in 0..players {
                let h = k.contract_all_but(Some(p), &vs);
                let (v, resp) = respond(&k.sides[p], &h);
                if v > value {
                    value = v;
                    vs[p] = resp;
                    improved = true;
                }
            }
            if !improved {
                break;
            }
        }
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, vs));
        }
    }
    best.expect("at least one restart")
}

/// `μ(x, y)·(V(a, b, x, y) − θ)` over coordinates `(x·|A| + a, y·|B| + b)`.
pub(crate) fn two_player_tensor(g: &crate::game::Game, theta: &Rational) -> Vec<Rational> {
    let (xs, ys, a_n, b_n) = (g.x_size(), g.y_size(), g.a_size(), g.b_size());
    let mut t = vec![Rational::zero(); xs * a_n * ys * b_n];
    for x in 0..xs {
        for y in 0..ys {
            let m = g.mu(x, y);
            if m.is_zero() {
                continue;
            }
            for a in 0..a_n {
                for b in 0..b_n {
                    let v = g.accept(a, b, x, y).into_owned() - theta;
                    t[(x * a_n + a) * ys * b_n + y * b_n + b] = m * v;
                }
            }
        }
    }
    t
}
