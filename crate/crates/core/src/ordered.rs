//! Ordered fortification: disjoint copies of a game played through
//! tilde-lifted graphs whose left vertices carry injective labelings of
//! their neighbourhoods.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::arith::{check_cap, Rational};
use crate::concat::{concatenate, ConcatenatedGame};
use crate::error::{Error, Result};
use crate::game::{Game, Predicate, DEFAULT_SIZE_CAP};
use crate::spectral::{BipartiteExpander, BipartiteGraph, SPECTRAL_SLACK};

/// `G^⊕l`: question `(x, i)` is indexed `x·l + i`. The pair `((x,i),(y,j))`
/// has mass `μ(x,y)/l` when `i = j` and is accepted automatically otherwise
/// (it never occurs).
pub fn disjoint_union(g: &Game, l: usize) -> Result<Game> {
    if l == 0 {
        return Err(Error::Parameter("need at least one copy".into()));
    }
    let (xs, ys, a_n, b_n) = (g.x_size(), g.y_size(), g.a_size(), g.b_size());
    let (nx, ny) = (xs * l, ys * l);
    check_cap(
        "disjoint union size",
        (nx as u128 * ny as u128).saturating_mul((a_n * b_n) as u128),
        DEFAULT_SIZE_CAP,
    )?;
    let lr = Rational::from_integer(l.into());
    let mut mu = Vec::with_capacity(nx * ny);
    let mut w = Vec::with_capacity(nx * ny * a_n * b_n);
    for x in 0..xs {
        for i in 0..l {
            for y in 0..ys {
                for j in 0..l {
                    if i == j {
                        mu.push(g.mu(x, y) / &lr);
                        for a in 0..a_n {
                            for b in 0..b_n {
                                w.push(g.accept(a, b, x, y).into_owned());
                            }
                        }
                    } else {
                        mu.push(Rational::zero());
                        w.extend(std::iter::repeat_n(Rational::one(), a_n * b_n));
                    }
                }
            }
        }
    }
    Game::new(nx, ny, a_n, b_n, mu, Predicate::Weighted(w).simplify())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyKind {
    /// Every injection `[d] → [l]`.
    Full,
    /// Affine maps `i ↦ a·i + b` over the prime field of size `l`, `a ≠ 0`.
    Pairwise,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InjectionFamily {
    pub d: usize,
    pub l: usize,
    pub kind: FamilyKind,
    pub members: Vec<Vec<usize>>,
}

impl InjectionFamily {
    pub fn len(&self) -> usize {
        self.members.len()
    }
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// For all `i ≠ j` and `a ≠ b`, the fraction of members with
    /// `π(i) = a ∧ π(j) = b` is exactly `1/(l(l−1))`.
    pub fn is_pairwise_independent(&self) -> bool {
        if self.l < 2 {
            return true;
        }
        let target = Rational::new(1.into(), (self.l * (self.l - 1)).into());
        let n = Rational::from_integer(self.members.len().into());
        for i in 0..self.d {
            for j in 0..self.d {
                if i == j {
                    continue;
                }
                let mut counts = vec![0usize; self.l * self.l];
                for p in &self.members {
                    counts[p[i] * self.l + p[j]] += 1;
                }
                for a in 0..self.l {
                    for b in 0..self.l {
                        if a != b && Rational::from_integer(counts[a * self.l + b].into()) / &n != target {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// Every image value is hit by the same number of members, per coordinate.
    pub fn is_uniform(&self) -> bool {
        (0..self.d).all(|i| {
            let mut counts = vec![0usize; self.l];
            for p in &self.members {
                counts[p[i]] += 1;
            }
            counts.windows(2).all(|w| w[0] == w[1])
        })
    }
}

pub fn is_prime(n: usize) -> bool {
    n >= 2 && (2..).take_while(|k| k * k <= n).all(|k| !n.is_multiple_of(k))
}

pub fn build_injection_family(d: usize, l: usize, kind: FamilyKind, cap: u128) -> Result<InjectionFamily> {
    if d == 0 || d > l {
        return Err(Error::Parameter(format!("need 1 ≤ d ≤ l, got d={d}, l={l}")));
    }
    let members = match kind {
        FamilyKind::Full => {
            let count = (l - d + 1..=l).fold(1u128, |acc, v| acc.saturating_mul(v as u128));
            check_cap("injection family", count, cap)?;
            let mut out = Vec::with_capacity(count as usize);
            let mut used = vec![false; l];
            let mut cur = Vec::with_capacity(d);
            injections(d, l, &mut used, &mut cur, &mut out);
            out
        }
        FamilyKind::Pairwise => {
            if !is_prime(l) {
                return Err(Error::Parameter(format!(
                    "pairwise family needs prime l, got {l}; try {}",
                    (l..).find(|&p| is_prime(p)).expect("primes are unbounded")
                )));
            }
            (1..l)
                .flat_map(|a| (0..l).map(move |b| (0..d).map(|i| (a * i + b) % l).collect()))
                .collect()
        }
    };
    Ok(InjectionFamily { d, l, kind, members })
}

fn injections(d: usize, l: usize, used: &mut [bool], cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if cur.len() == d {
        out.push(cur.clone());
        return;
    }
    for v in 0..l {
        if !used[v] {
            used[v] = true;
            cur.push(v);
            injections(d, l, used, cur, out);
            cur.pop();
            used[v] = false;
        }
    }
}

/// `M̃` over `(X' × family) × (X × [l])`: left `(x', p)` is `x'·|fam| + p`,
/// right `(x, i)` is `x·l + i`, and slot `k` of the sorted neighbour list
/// of `x'` (neighbour `x_k`) gives the edge to `(x_k, π_p(k))`.
pub fn tilde_graph(m: &BipartiteGraph, fam: &InjectionFamily) -> Result<BipartiteGraph> {
    let d = m
        .left_regular_degree()
        .filter(|&d| Some(d) == m.right_regular_degree())
        .ok_or_else(|| Error::Graph("graph must be biregular".into()))?;
    if d != fam.d {
        return Err(Error::Parameter(format!(
            "family has domain size {}, graph degree is {d}",
            fam.d
        )));
    }
    let (n, l) = (fam.len(), fam.l);
    let mut edges = Vec::with_capacity(m.left_size() * n * d);
    for xp in 0..m.left_size() {
        for (p, pi) in fam.members.iter().enumerate() {
            for (k, &x) in m.left_neighbors(xp).iter().enumerate() {
                edges.push((xp * n + p, x * l + pi[k]));
            }
        }
    }
    BipartiteGraph::new(m.left_size() * n, m.right_size() * l, edges)
}

pub fn tilde_lift(m: &BipartiteExpander, fam: &InjectionFamily) -> Result<BipartiteExpander> {
    if !m.balanced() {
        return Err(Error::Graph("tilde lift needs a balanced graph".into()));
    }
    BipartiteExpander::certify(tilde_graph(m.graph(), fam)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrderedFortified {
    pub game: ConcatenatedGame,
    pub l: usize,
    pub left_family: InjectionFamily,
    pub right_family: InjectionFamily,
    pub left_tilde: BipartiteExpander,
    pub right_tilde: BipartiteExpander,
}

/// `G'_OF = M̃ ∘ G^⊕l ∘ P̃`; `l` defaults to `max(d_M, d_P)`.
pub fn ordered_fortify(
    g: &Game,
    m: &BipartiteExpander,
    p: &BipartiteExpander,
    l: Option<usize>,
    kind: FamilyKind,
    cap: u128,
) -> Result<OrderedFortified> {
    let (dm, dp) = (m.degree(), p.degree());
    let l = l.unwrap_or(dm.max(dp));
    if l < dm.max(dp) {
        return Err(Error::Parameter(format!(
            "l = {l} is below the largest degree {}",
            dm.max(dp)
        )));
    }
    let left_family = build_injection_family(dm, l, kind, cap)?;
    let right_family = build_injection_family(dp, l, kind, cap)?;
    let left_tilde = tilde_lift(m, &left_family)?;
    let right_tilde = tilde_lift(p, &right_family)?;
    let game = concatenate(&left_tilde, &disjoint_union(g, l)?, &right_tilde)?;
    Ok(OrderedFortified {
        game,
        l,
        left_family,
        right_family,
        left_tilde,
        right_tilde,
    })
}

/// The sampling process with explicit injective labelings: draw
/// `(x, y) ∼ μ`, an edge slot `k` of `x` in `M` and `k'` of `y` in `P`, then
/// a uniform pair `(π, σ)` of family members with `π(k) = σ(k')`. Returns
/// the exact distribution of `((x', π), (y', σ))`, keyed by the tilde-graph
/// left indices.
pub fn ordered_sampling_distribution(
    g: &Game,
    m: &BipartiteGraph,
    p: &BipartiteGraph,
    fm: &InjectionFamily,
    fp: &InjectionFamily,
) -> Result<BTreeMap<(usize, usize), Rational>> {
    if fm.l != fp.l {
        return Err(Error::Parameter("families must share l".into()));
    }
    let slots = |graph: &BipartiteGraph, x: usize| -> Vec<(usize, usize)> {
        (0..graph.left_size())
            .flat_map(|xp| {
                graph
                    .left_neighbors(xp)
                    .iter()
                    .enumerate()
                    .filter(move |&(_, &v)| v == x)
                    .map(move |(k, _)| (xp, k))
            })
            .collect()
    };
    let mut out: BTreeMap<(usize, usize), Rational> = BTreeMap::new();
    for x in 0..g.x_size() {
        let sx = slots(m, x);
        for y in 0..g.y_size() {
            let mu = g.mu(x, y);
            if mu.is_zero() {
                continue;
            }
            let sy = slots(p, y);
            let edge = mu / Rational::from_integer((sx.len() * sy.len()).into());
            for &(xp, k) in &sx {
                for &(yp, kk) in &sy {
                    let pairs: Vec<(usize, usize)> = (0..fm.len())
                        .flat_map(|i| (0..fp.len()).map(move |j| (i, j)))
                        .filter(|&(i, j)| fm.members[i][k] == fp.members[j][kk])
                        .collect();
                    let w = &edge / Rational::from_integer(pairs.len().into());
                    for (i, j) in pairs {
                        *out
                            .entry((xp * fm.len() + i, yp * fp.len() + j))
                            .or_insert_with(Rational::zero) += &w;
                    }
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TildeClaim {
    pub lambda: f64,
    pub lambda_tilde: f64,
    /// `max(λ_M, 1/√(d−1))`.
    pub bound: f64,
    pub pass: bool,
}

pub fn verify_tilde_spectral_claim(
    m: &BipartiteExpander,
    l: usize,
    kind: FamilyKind,
    cap: u128,
) -> Result<TildeClaim> {
    let d = m.degree();
    if d < 2 {
        return Err(Error::Parameter("the bound needs degree at least 2".into()));
    }
    let fam = build_injection_family(d, l, kind, cap)?;
    let t = tilde_lift(m, &fam)?;
    let bound = m.lambda().max(1.0 / ((d - 1) as f64).sqrt());
    Ok(TildeClaim {
        lambda: m.lambda(),
        lambda_tilde: t.lambda(),
        bound,
        pass: t.lambda() <= bound + SPECTRAL_SLACK,
    })
}

/// Renders a family as one injection per line.
pub fn describe_family(f: &InjectionFamily) -> String {
    let mut s = format!("family kind={:?} d={} l={} members={}\n", f.kind, f.d, f.l, f.len());
    for p in &f.members {
        s.push_str(&format!("  {p:?}\n"));
    }
    s.push_str(&format!("pairwise_independent={}", f.is_pairwise_independent()));
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;
    use crate::game::classical_value;
    use crate::library::chsh;
    use crate::spectral::{complete_bipartite, perfect_matching, shift_union_graph};

    const CAP: u128 = 1_000_000;

    fn exp(g: BipartiteGraph) -> BipartiteExpander {
        BipartiteExpander::certify(g).unwrap()
    }

    #[test]
    fn disjoint_union_examples() {
        assert_eq!(disjoint_union(&chsh(), 1).unwrap(), chsh());
        for l in [2, 3] {
            let u = disjoint_union(&chsh(), l).unwrap();
            assert_eq!(u.a_size(), 2);
            assert_eq!(classical_value(&u).unwrap(), rat(3, 4));
        }
    }

    #[test]
    fn families() {
        let f = build_injection_family(2, 2, FamilyKind::Full, CAP).unwrap();
        assert_eq!(f.members, vec![vec![0, 1], vec![1, 0]]);
        let p = build_injection_family(2, 3, FamilyKind::Pairwise, CAP).unwrap();
        assert_eq!(p.len(), 6);
        assert!(p.is_pairwise_independent());
        assert!(build_injection_family(3, 5, FamilyKind::Full, CAP).unwrap().is_pairwise_independent());
        for l in [2, 3, 5, 7] {
            assert!(build_injection_family(1, l, FamilyKind::Pairwise, CAP).unwrap().is_uniform());
        }
        assert!(build_injection_family(2, 4, FamilyKind::Pairwise, CAP).is_err());
        assert!(build_injection_family(3, 2, FamilyKind::Full, CAP).is_err());
        assert_eq!(build_injection_family(3, 5, FamilyKind::Full, CAP).unwrap().len(), 60);
    }

    #[test]
    fn tight_case_on_k22() {
        let c = verify_tilde_spectral_claim(&exp(complete_bipartite(2, 2).unwrap()), 2, FamilyKind::Full, CAP).unwrap();
        assert!((c.lambda_tilde - 1.0).abs() < 1e-9);
        assert!((c.bound - 1.0).abs() < 1e-12);
        assert!(c.pass);
    }

    #[test]
    fn tilde_structure() {
        let m = exp(shift_union_graph(8, &[0, 1, 2, 5]).unwrap());
        let fam = build_injection_family(4, 5, FamilyKind::Pairwise, CAP).unwrap();
        let t = tilde_lift(&m, &fam).unwrap();
        let g = t.graph();
        assert_eq!((g.left_size(), g.right_size()), (8 * 20, 8 * 5));
        assert_eq!(g.left_regular_degree(), Some(4));
        assert_eq!(g.right_regular_degree(), Some(4 * 20 / 5));
        let c = verify_tilde_spectral_claim(&m, 5, FamilyKind::Pairwise, CAP).unwrap();
        assert!(c.pass, "{c:?}");
    }

    #[test]
    fn ordered_value_and_sampling() {
        let s = exp(shift_union_graph(2, &[0, 1]).unwrap());
        let of = ordered_fortify(&chsh(), &s, &s, Some(2), FamilyKind::Full, CAP).unwrap();
        assert_eq!(classical_value(&of.game.outer_game().unwrap()).unwrap(), rat(3, 4));
        let dist = ordered_sampling_distribution(&chsh(), s.graph(), s.graph(), &of.left_family, &of.right_family).unwrap();
        let mu = of.game.outer_mu();
        let yo = of.game.outer_y_size();
        for (i, m) in mu.iter().enumerate() {
            let d = dist.get(&(i / yo, i % yo)).cloned().unwrap_or_else(Rational::zero);
            assert_eq!(&d, m);
        }
    }

    #[test]
    fn matchings_with_one_copy_are_isomorphic() {
        let m = exp(perfect_matching(2).unwrap());
        let of = ordered_fortify(&chsh(), &m, &m, None, FamilyKind::Full, CAP).unwrap();
        assert_eq!(of.game.outer_game().unwrap(), chsh());
    }
}
