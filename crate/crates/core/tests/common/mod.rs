//! Independent oracles shared by the integration tests. Nothing here calls
//! the library's solvers; only plain data accessors are used.
#![allow(dead_code)]

use fortify::spectral::BipartiteGraph;
use fortify::{Game, Rational, Substrategy};
use num_bigint::BigInt;
use num_traits::Zero;

pub fn r(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Every deterministic strategy pair, no pruning.
pub fn brute_value(g: &Game) -> Rational {
    let (xs, ys, an, bn) = (g.x_size(), g.y_size(), g.a_size(), g.b_size());
    let na = (an as u64).pow(xs as u32);
    let nb = (bn as u64).pow(ys as u32);
    let mut best: Option<Rational> = None;
    for ia in 0..na {
        let alice: Vec<usize> = digits(ia, an, xs);
        for ib in 0..nb {
            let bob: Vec<usize> = digits(ib, bn, ys);
            let mut v = Rational::zero();
            for x in 0..xs {
                for y in 0..ys {
                    let m = g.mu(x, y);
                    if !m.is_zero() {
                        v += m * g.accept(alice[x], bob[y], x, y).as_ref();
                    }
                }
            }
            if best.as_ref().is_none_or(|b| v > *b) {
                best = Some(v);
            }
        }
    }
    best.unwrap_or_else(Rational::zero)
}

pub fn digits(mut n: u64, base: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for i in (0..len).rev() {
        out[i] = (n % base as u64) as usize;
        n /= base as u64;
    }
    out
}

/// Sorted distinct right neighbours of left vertex `l`.
pub fn distinct_nbrs(g: &BipartiteGraph, l: usize) -> Vec<usize> {
    let mut v: Vec<usize> = g.edges().iter().filter(|e| e.0 == l).map(|e| e.1).collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// Label a composite answer `c` of outer question `l` gives inner question `x`:
/// neighbours sorted, first one most significant, read modulo `|A|^k`.
pub fn label(g: &BipartiteGraph, l: usize, c: usize, x: usize, a: usize) -> usize {
    let n = distinct_nbrs(g, l);
    let k = n.len();
    let pos = n.iter().position(|&v| v == x).expect("x is a neighbour");
    (c / a.pow((k - 1 - pos) as u32)) % a
}

/// `val(G', f, g)` straight from the sampling process: `(x, y) ∼ μ`, a
/// uniform edge into `x` and into `y`, then the inner predicate on the labels.
pub fn outer_value_direct(
    inner: &Game,
    m: &BipartiteGraph,
    p: &BipartiteGraph,
    f: &Substrategy,
    g: &Substrategy,
) -> Rational {
    let mut total = Rational::zero();
    for x in 0..inner.x_size() {
        let ex: Vec<usize> = m.edges().iter().filter(|e| e.1 == x).map(|e| e.0).collect();
        for y in 0..inner.y_size() {
            let mass = inner.mu(x, y);
            if mass.is_zero() {
                continue;
            }
            let ey: Vec<usize> = p.edges().iter().filter(|e| e.1 == y).map(|e| e.0).collect();
            let w = mass / Rational::from_integer(BigInt::from(ex.len() * ey.len()));
            for &xp in &ex {
                for &yp in &ey {
                    for c in 0..f.answers() {
                        let fv = f.get(xp, c);
                        if fv.is_zero() {
                            continue;
                        }
                        let a = label(m, xp, c, x, inner.a_size());
                        for e in 0..g.answers() {
                            let gv = g.get(yp, e);
                            if gv.is_zero() {
                                continue;
                            }
                            let b = label(p, yp, e, y, inner.b_size());
                            total += &w * fv * gv * inner.accept(a, b, x, y).as_ref();
                        }
                    }
                }
            }
        }
    }
    total
}

/// `B[x][x'] = mult(x', x) / √(deg(x)·deg(x'))`, rows indexed by right vertices.
pub fn normalized_matrix(g: &BipartiteGraph) -> Vec<Vec<f64>> {
    let mut degl = vec![0usize; g.left_size()];
    let mut degr = vec![0usize; g.right_size()];
    for &(l, rr) in g.edges() {
        degl[l] += 1;
        degr[rr] += 1;
    }
    let mut b = vec![vec![0.0; g.left_size()]; g.right_size()];
    for &(l, rr) in g.edges() {
        b[rr][l] += 1.0 / ((degl[l] * degr[rr]) as f64).sqrt();
    }
    b
}

/// One-sided Jacobi SVD; returns singular values in descending order.
pub fn jacobi_singular_values(a: &[Vec<f64>]) -> Vec<f64> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    // work on columns of the wide-or-tall matrix with more rows than columns
    let (mut u, n) = if rows >= cols {
        let mut u = vec![vec![0.0; rows]; cols];
        for i in 0..rows {
            for j in 0..cols {
                u[j][i] = a[i][j];
            }
        }
        (u, cols)
    } else {
        (a.to_vec(), rows)
    };
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = u[p].iter().map(|v| v * v).sum();
                let beta: f64 = u[q].iter().map(|v| v * v).sum();
                let gamma: f64 = u[p].iter().zip(&u[q]).map(|(x, y)| x * y).sum();
                if gamma.abs() <= 1e-300 {
                    continue;
                }
                off = off.max(gamma.abs() / (alpha * beta).sqrt().max(1e-300));
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..u[p].len() {
                    let (x, y) = (u[p][k], u[q][k]);
                    u[p][k] = c * x - s * y;
                    u[q][k] = s * x + c * y;
                }
            }
        }
        if off < 1e-15 {
            break;
        }
    }
    let mut sv: Vec<f64> = u.iter().map(|col| col.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

pub fn second_singular_oracle(g: &BipartiteGraph) -> f64 {
    jacobi_singular_values(&normalized_matrix(g)).get(1).copied().unwrap_or(0.0)
}

/// Every deterministic Alice strategy with Bob answering each question
/// optimally; exact, and cheaper when `|B|^{|Y|}` is large.
pub fn brute_value_one_sided(g: &Game) -> Rational {
    let (xs, ys, an, bn) = (g.x_size(), g.y_size(), g.a_size(), g.b_size());
    let na = (an as u64).pow(xs as u32);
    let mut best: Option<Rational> = None;
    for ia in 0..na {
        let alice = digits(ia, an, xs);
        let mut v = Rational::zero();
        for y in 0..ys {
            let mut col = Rational::zero();
            for b in 0..bn {
                let mut s = Rational::zero();
                for x in 0..xs {
                    let m = g.mu(x, y);
                    if !m.is_zero() {
                        s += m * g.accept(alice[x], b, x, y).as_ref();
                    }
                }
                if b == 0 || s > col {
                    col = s;
                }
            }
            v += col;
        }
        if best.as_ref().is_none_or(|b| v > *b) {
            best = Some(v);
        }
    }
    best.unwrap_or_else(Rational::zero)
}
