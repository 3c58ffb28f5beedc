//! Bipartite graphs, normalized adjacency operators and spectral certificates.
//!
//! A graph over `(X', X)` is stored as a sorted edge multiset of
//! `(left, right)` pairs. The inner question set `X` is the right side and
//! the normalized adjacency has `|X|` rows and `|X'|` columns.

use nalgebra::DMatrix;
use num_traits::{One, ToPrimitive};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::arith::{self, Rational};
use crate::error::{Error, Result};

/// Additive slack applied to every spectral inequality.
pub const SPECTRAL_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartiteGraph {
    left_size: usize,
    right_size: usize,
    edges: Vec<(usize, usize)>,
    left_adj: Vec<Vec<usize>>,
    right_adj: Vec<Vec<usize>>,
}

impl BipartiteGraph {
    pub fn new(left_size: usize, right_size: usize, mut edges: Vec<(usize, usize)>) -> Result<Self> {
        if left_size == 0 || right_size == 0 {
            return Err(Error::Graph("both sides must be nonempty".into()));
        }
        if let Some(&(l, r)) = edges.iter().find(|&&(l, r)| l >= left_size || r >= right_size) {
            return Err(Error::Graph(format!(
                "edge ({l}, {r}) out of range for {left_size}×{right_size}"
            )));
        }
        edges.sort_unstable();
        let mut left_adj = vec![Vec::new(); left_size];
        let mut right_adj = vec![Vec::new(); right_size];
        for &(l, r) in &edges {
            left_adj[l].push(r);
            right_adj[r].push(l);
        }
        for adj in right_adj.iter_mut() {
            adj.sort_unstable();
        }
        Ok(BipartiteGraph {
            left_size,
            right_size,
            edges,
            left_adj,
            right_adj,
        })
    }

    pub fn left_size(&self) -> usize {
        self.left_size
    }
    pub fn right_size(&self) -> usize {
        self.right_size
    }
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Sorted right neighbours of a left vertex, repeated by multiplicity.
    pub fn left_neighbors(&self, l: usize) -> &[usize] {
        &self.left_adj[l]
    }

    /// Sorted left neighbours of a right vertex, repeated by multiplicity.
    pub fn right_neighbors(&self, r: usize) -> &[usize] {
        &self.right_adj[r]
    }

    pub fn left_degree(&self, l: usize) -> usize {
        self.left_adj[l].len()
    }
    pub fn right_degree(&self, r: usize) -> usize {
        self.right_adj[r].len()
    }

    /// Distinct right neighbours of `l` with their multiplicities, sorted.
    pub fn distinct_left_neighbors(&self, l: usize) -> Vec<(usize, usize)> {
        run_lengths(&self.left_adj[l])
    }

    pub fn distinct_right_neighbors(&self, r: usize) -> Vec<(usize, usize)> {
        run_lengths(&self.right_adj[r])
    }

    /// Common degree of all right vertices, if they share one.
    pub fn right_regular_degree(&self) -> Option<usize> {
        let d = self.right_degree(0);
        (0..self.right_size)
            .all(|r| self.right_degree(r) == d)
            .then_some(d)
    }

    pub fn left_regular_degree(&self) -> Option<usize> {
        let d = self.left_degree(0);
        (0..self.left_size)
            .all(|l| self.left_degree(l) == d)
            .then_some(d)
    }

    pub fn is_balanced(&self) -> bool {
        self.left_size == self.right_size
    }

    pub fn has_multi_edges(&self) -> bool {
        self.edges.windows(2).any(|w| w[0] == w[1])
    }
}

fn run_lengths(sorted: &[usize]) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = Vec::new();
    for &v in sorted {
        match out.last_mut() {
            Some((u, c)) if *u == v => *c += 1,
            _ => out.push((v, 1)),
        }
    }
    out
}

pub fn perfect_matching(n: usize) -> Result<BipartiteGraph> {
    BipartiteGraph::new(n, n, (0..n).map(|i| (i, i)).collect())
}

pub fn complete_bipartite(left: usize, right: usize) -> Result<BipartiteGraph> {
    let edges = (0..left)
        .flat_map(|l| (0..right).map(move |r| (l, r)))
        .collect();
    BipartiteGraph::new(left, right, edges)
}

/// Balanced graph on `Z_n` with an edge `(x + s, x)` for every shift `s`.
pub fn shift_union_graph(n: usize, shifts: &[usize]) -> Result<BipartiteGraph> {
    if n == 0 || shifts.is_empty() {
        return Err(Error::Graph("need n ≥ 1 and at least one shift".into()));
    }
    let mut seen = vec![false; n];
    for &s in shifts {
        if std::mem::replace(&mut seen[s % n], true) {
            return Err(Error::Graph(format!("duplicate shift {} mod {n}", s % n)));
        }
    }
    let edges = (0..n)
        .flat_map(|x| shifts.iter().map(move |&s| ((x + s) % n, x)))
        .collect();
    BipartiteGraph::new(n, n, edges)
}

/// Entry `(x, x') = mult(x, x') / sqrt(d · deg(x'))`, the operator
/// `ℓ2(X') → ℓ2(X)` for μ uniform on `X` and `μ'(x') = deg(x') / (d·|X|)`.
pub fn normalized_adjacency(g: &BipartiteGraph) -> Result<DMatrix<f64>> {
    let d = g
        .right_regular_degree()
        .ok_or_else(|| Error::Graph("right side is not regular".into()))?;
    if d == 0 {
        return Err(Error::Graph("right vertices have no neighbours".into()));
    }
    if let Some(l) = (0..g.left_size).find(|&l| g.left_degree(l) == 0) {
        return Err(Error::Graph(format!("left vertex {l} is isolated")));
    }
    let mut m = DMatrix::<f64>::zeros(g.right_size, g.left_size);
    for &(l, r) in &g.edges {
        m[(r, l)] += 1.0 / ((d * g.left_degree(l)) as f64).sqrt();
    }
    Ok(m)
}

/// All singular values, largest first.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    // bidiagonalize the tall orientation
    let svd = if m.nrows() >= m.ncols() {
        m.clone().svd(false, false)
    } else {
        m.transpose().svd(false, false)
    };
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Second-largest singular value; 0 when fewer than two exist.
pub fn second_singular_value(m: &DMatrix<f64>) -> f64 {
    singular_values(m).get(1).copied().unwrap_or(0.0)
}

/// A right-regular bipartite graph together with its measured λ.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteExpander {
    graph: BipartiteGraph,
    lambda: f64,
    balanced: bool,
}

impl BipartiteExpander {
    pub fn certify(graph: BipartiteGraph) -> Result<BipartiteExpander> {
        let lambda = second_singular_value(&normalized_adjacency(&graph)?);
        let balanced = graph.is_balanced();
        Ok(BipartiteExpander {
            graph,
            lambda,
            balanced,
        })
    }

    pub fn graph(&self) -> &BipartiteGraph {
        &self.graph
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn balanced(&self) -> bool {
        self.balanced
    }
    pub fn degree(&self) -> usize {
        self.graph.right_regular_degree().unwrap_or(0)
    }
}

/// Union of `d` uniformly random permutations of `[n]`, drawn from the
/// stream `attempt` of the generator seeded with `seed`.
pub fn sample_permutation_union(n: usize, d: usize, seed: u64, attempt: u64) -> Result<BipartiteGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(attempt);
    let mut edges = Vec::with_capacity(n * d);
    let mut perm: Vec<usize> = (0..n).collect();
    for _ in 0..d {
        perm.shuffle(&mut rng);
        for (x, &xp) in perm.iter().enumerate() {
            edges.push((xp, x));
        }
    }
    BipartiteGraph::new(n, n, edges)
}

/// Balanced `d`-biregular graph accepted once its measured λ is at most
/// `lambda_target`. `d = n` returns the complete graph.
pub fn random_biregular_expander(
    n: usize,
    d: usize,
    lambda_target: f64,
    seed: u64,
    max_attempts: u64,
) -> Result<BipartiteExpander> {
    if d == 0 || d > n {
        return Err(Error::Parameter(format!("degree {d} must lie in 1..={n}")));
    }
    if d == n {
        return BipartiteExpander::certify(complete_bipartite(n, n)?);
    }
    let mut best = f64::INFINITY;
    for attempt in 0..max_attempts {
        let e = BipartiteExpander::certify(sample_permutation_union(n, d, seed, attempt)?)?;
        if e.lambda <= lambda_target {
            return Ok(e);
        }
        best = best.min(e.lambda);
    }
    Err(Error::TargetUnreachable {
        best,
        target: lambda_target,
        attempts: max_attempts,
    })
}

/// Left-vertex distribution `μ'(x') = deg(x') / Σ deg`.
fn left_distribution(g: &BipartiteGraph) -> Vec<f64> {
    let total = g.edges.len() as f64;
    (0..g.left_size)
        .map(|l| g.left_degree(l) as f64 / total)
        .collect()
}

/// `f(x) = E_{x' ∼ N(x)} f(x')`, counting multiplicity.
pub fn neighbor_average(g: &BipartiteGraph, f: &[f64]) -> Vec<f64> {
    (0..g.right_size)
        .map(|r| {
            let n = g.right_neighbors(r);
            n.iter().map(|&l| f[l]).sum::<f64>() / n.len() as f64
        })
        .collect()
}

/// Both sides of the expander averaging inequality:
/// `E_{x∼μ}(f(x) − f̄)²` and `λ²·E_{x'∼μ'}(f(x') − f̄)²`.
pub fn check_expander_averaging(e: &BipartiteExpander, f: &[f64]) -> Result<(f64, f64)> {
    let g = &e.graph;
    if f.len() != g.left_size {
        return Err(Error::Shape(format!(
            "function has {} values, graph has {} left vertices",
            f.len(),
            g.left_size
        )));
    }
    let mu_left = left_distribution(g);
    let mean: f64 = f.iter().zip(&mu_left).map(|(v, p)| v * p).sum();
    let avg = neighbor_average(g, f);
    let lhs = avg.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / g.right_size as f64;
    let var_left: f64 = f
        .iter()
        .zip(&mu_left)
        .map(|(v, p)| p * (v - mean).powi(2))
        .sum();
    Ok((lhs, e.lambda.powi(2) * var_left))
}

/// The two correlated-averaging inequalities for a pair of expanders and a
/// question distribution with uniform marginals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrelatedAverages {
    /// `E_μ |f(x)g(y) − E_μ fg|` against `2√2·λ·‖f‖·‖g‖`.
    pub deviation: (f64, f64),
    /// `|E f · E g − E_μ fg|` against `2λ²·‖f‖·‖g‖`.
    pub product: (f64, f64),
}

/// `mu` is indexed `x * |Y| + y` over the right sides of `em` and `ep`;
/// `λ = max(λ_M, λ_P)` and norms are taken under the left distributions.
pub fn check_correlated_averages(
    em: &BipartiteExpander,
    ep: &BipartiteExpander,
    mu: &[Rational],
    f: &[f64],
    g: &[f64],
) -> Result<CorrelatedAverages> {
    let (xs, ys) = (em.graph.right_size, ep.graph.right_size);
    if mu.len() != xs * ys || f.len() != em.graph.left_size || g.len() != ep.graph.left_size {
        return Err(Error::Shape(
            "distribution or functions do not match the graphs".into(),
        ));
    }
    let ux = Rational::new(One::one(), xs.into());
    let uy = Rational::new(One::one(), ys.into());
    for x in 0..xs {
        let m: Rational = (0..ys).map(|y| &mu[x * ys + y]).sum();
        if m != ux {
            return Err(Error::Parameter(format!(
                "x-marginal at {x} is {}, not uniform",
                arith::show(&m)
            )));
        }
    }
    for y in 0..ys {
        let m: Rational = (0..xs).map(|x| &mu[x * ys + y]).sum();
        if m != uy {
            return Err(Error::Parameter(format!(
                "y-marginal at {y} is {}, not uniform",
                arith::show(&m)
            )));
        }
    }
    let lambda = em.lambda.max(ep.lambda);
    let fx = neighbor_average(&em.graph, f);
    let gy = neighbor_average(&ep.graph, g);
    let muf: Vec<f64> = mu.iter().map(|m| m.to_f64().unwrap_or(f64::NAN)).collect();
    let corr: f64 = (0..xs)
        .flat_map(|x| (0..ys).map(move |y| (x, y)))
        .map(|(x, y)| muf[x * ys + y] * fx[x] * gy[y])
        .sum();
    let dev: f64 = (0..xs)
        .flat_map(|x| (0..ys).map(move |y| (x, y)))
        .map(|(x, y)| muf[x * ys + y] * (fx[x] * gy[y] - corr).abs())
        .sum();
    let norm = |h: &[f64], graph: &BipartiteGraph| -> f64 {
        left_distribution(graph)
            .iter()
            .zip(h)
            .map(|(p, v)| p * v * v)
            .sum::<f64>()
            .sqrt()
    };
    let nf = norm(f, &em.graph);
    let ng = norm(g, &ep.graph);
    let ef = fx.iter().sum::<f64>() / xs as f64;
    let eg = gy.iter().sum::<f64>() / ys as f64;
    Ok(CorrelatedAverages {
        deviation: (dev, 2.0 * 2f64.sqrt() * lambda * nf * ng),
        product: ((ef * eg - corr).abs(), 2.0 * lambda * lambda * nf * ng),
    })
}
