//! Edge-probability models for sparse inhomogeneous random graphs.
//!
//! A [`GraphModel`] is a closed-form specification of the edge probabilities
//! `p_ij`, never a materialized adjacency matrix. All sampling is lazy: a
//! caller can draw the neighbors of a single vertex without realizing the
//! rest of the graph. Full-graph sampling is available for small `n` behind
//! a size cap.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};

/// Cap on `n` for [`GraphModel::sample_full_graph`]; guards accidental
/// O(n^2) blowups.
pub const DEFAULT_FULL_SAMPLE_CAP: usize = 100_000;

/// Default half-width of the near-critical band around operator norm 1.
pub const DEFAULT_CRITICALITY_TOLERANCE: f64 = 0.05;

/// Stochastic block model: vertices partitioned into blocks, edge rate
/// `K[l][m]/n` between a block-`l` and a block-`m` vertex.
#[derive(Debug, Clone)]
pub struct SbmModel {
    n: usize,
    block_sizes: Vec<usize>,
    /// S x S symmetric rate matrix, row-major.
    rates: Vec<f64>,
    assumes_eq_offdiag: bool,
    /// First vertex id of each block; blocks occupy contiguous id ranges.
    block_start: Vec<usize>,
    block_of: Vec<u32>,
}

impl SbmModel {
    pub fn new(block_sizes: Vec<usize>, rate_rows: Vec<Vec<f64>>) -> Result<Self> {
        let s = block_sizes.len();
        if s == 0 {
            return Err(Error::invalid("SBM needs at least one block"));
        }
        if block_sizes.iter().any(|&b| b == 0) {
            return Err(Error::invalid("SBM block sizes must be positive"));
        }
        if rate_rows.len() != s || rate_rows.iter().any(|r| r.len() != s) {
            return Err(Error::invalid(format!(
                "SBM rate matrix must be {s}x{s} to match {s} blocks"
            )));
        }
        let n: usize = block_sizes.iter().sum();
        let mut rates = vec![0.0; s * s];
        for l in 0..s {
            for m in 0..s {
                let v = rate_rows[l][m];
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::invalid("SBM rates must be positive and finite"));
                }
                if (v - rate_rows[m][l]).abs() > 1e-12 * v.abs().max(1.0) {
                    return Err(Error::invalid("SBM rate matrix must be symmetric"));
                }
                rates[l * s + m] = v;
            }
        }
        let mut offdiag: Option<f64> = None;
        let mut eq_offdiag = true;
        for l in 0..s {
            for m in 0..s {
                if l == m {
                    continue;
                }
                match offdiag {
                    None => offdiag = Some(rates[l * s + m]),
                    Some(k) => {
                        if (rates[l * s + m] - k).abs() > 1e-12 * k.max(1.0) {
                            eq_offdiag = false;
                        }
                    }
                }
            }
        }
        let mut block_start = Vec::with_capacity(s);
        let mut block_of = vec![0u32; n];
        let mut start = 0;
        for (b, &sz) in block_sizes.iter().enumerate() {
            block_start.push(start);
            for v in start..start + sz {
                block_of[v] = b as u32;
            }
            start += sz;
        }
        Ok(Self {
            n,
            block_sizes,
            rates,
            assumes_eq_offdiag: eq_offdiag,
            block_start,
            block_of,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_blocks(&self) -> usize {
        self.block_sizes.len()
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    pub fn block_of(&self, i: usize) -> usize {
        self.block_of[i] as usize
    }

    /// Vertex id range occupied by block `m`.
    pub fn block_range(&self, m: usize) -> std::ops::Range<usize> {
        self.block_start[m]..self.block_start[m] + self.block_sizes[m]
    }

    pub fn rate(&self, l: usize, m: usize) -> f64 {
        self.rates[l * self.num_blocks() + m]
    }

    /// Whether all off-diagonal rates coincide (the equal-off-diagonal
    /// simplification used by the block-model analysis).
    pub fn assumes_eq_offdiag(&self) -> bool {
        self.assumes_eq_offdiag
    }

    /// Whether every within-block rate strictly exceeds the (common)
    /// off-diagonal rate. Only meaningful together with
    /// [`Self::assumes_eq_offdiag`].
    pub fn diagonal_dominant(&self) -> bool {
        let s = self.num_blocks();
        if s == 1 {
            return true;
        }
        let k = self.rate(0, 1);
        (0..s).all(|l| self.rate(l, l) > k)
    }

    fn pair_prob(&self, l: usize, m: usize) -> f64 {
        (self.rate(l, m) / self.n as f64).min(1.0)
    }
}

/// Chung-Lu (rank-1) model: `p_ij = w_i w_j / n`.
#[derive(Debug, Clone)]
pub struct ChungLuModel {
    n: usize,
    weights: Vec<f64>,
    weight_sum: f64,
}

impl ChungLuModel {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        let n = weights.len();
        if n == 0 {
            return Err(Error::invalid("Chung-Lu needs at least one vertex"));
        }
        if weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(Error::invalid("Chung-Lu weights must be positive and finite"));
        }
        let wmax = weights.iter().cloned().fold(f64::MIN, f64::max);
        if wmax * wmax / n as f64 >= 1.0 {
            return Err(Error::invalid(format!(
                "Chung-Lu requires max_i,j w_i w_j / n < 1 (got {})",
                wmax * wmax / n as f64
            )));
        }
        let weight_sum = weights.iter().sum();
        Ok(Self {
            n,
            weights,
            weight_sum,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight_sum(&self) -> f64 {
        self.weight_sum
    }
}

/// Kronecker random graph on `n = 2^k` vertices. Vertex `i` is identified
/// with the `k`-bit binary string of `i`; an edge probability is the product
/// over bit positions of the seed-matrix entries `zeta` (both bits one),
/// `gamma` (both bits zero) and `beta` (mixed).
#[derive(Debug, Clone)]
pub struct KroneckerModel {
    k: u32,
    zeta: f64,
    beta: f64,
    gamma: f64,
}

impl KroneckerModel {
    pub fn new(k: u32, zeta: f64, beta: f64, gamma: f64) -> Result<Self> {
        if k == 0 || k > 30 {
            return Err(Error::invalid("Kronecker depth k must be in 1..=30"));
        }
        for (name, v) in [("zeta", zeta), ("beta", beta), ("gamma", gamma)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!(
                    "Kronecker seed entry {name} must lie in [0,1]"
                )));
            }
        }
        Ok(Self {
            k,
            zeta,
            beta,
            gamma,
        })
    }

    /// Like [`Self::new`] but additionally requires `beta <= gamma <= zeta`,
    /// the ordering under which high-weight vertices have the highest
    /// expected degree.
    pub fn new_ordered(k: u32, zeta: f64, beta: f64, gamma: f64) -> Result<Self> {
        if !(beta <= gamma && gamma <= zeta) {
            return Err(Error::invalid(
                "ordered Kronecker model requires beta <= gamma <= zeta",
            ));
        }
        Self::new(k, zeta, beta, gamma)
    }

    pub fn n(&self) -> usize {
        1usize << self.k
    }

    pub fn depth(&self) -> u32 {
        self.k
    }

    pub fn seed(&self) -> (f64, f64, f64) {
        (self.zeta, self.beta, self.gamma)
    }

    /// Number of ones in vertex `i`'s binary string.
    pub fn weight(&self, i: usize) -> u32 {
        (i as u64).count_ones()
    }

    fn pair_prob(&self, i: usize, j: usize) -> f64 {
        let ones_both = (i & j).count_ones();
        let mask = (1usize << self.k) - 1;
        let zeros_both = (!i & !j & mask).count_ones();
        let mixed = self.k - ones_both - zeros_both;
        self.zeta.powi(ones_both as i32)
            * self.gamma.powi(zeros_both as i32)
            * self.beta.powi(mixed as i32)
    }
}

/// Finite-grid discretization of a symmetric kernel on the unit square.
/// Vertex `i` (0-based) maps to cell `ceil((i+1) m / n)`; the edge
/// probability between cells `a` and `b` is `min(grid[a][b]/n, 1)`.
#[derive(Debug, Clone)]
pub struct GridKernelModel {
    n: usize,
    m: usize,
    /// m x m symmetric non-negative matrix, row-major.
    grid: Vec<f64>,
    cell_of: Vec<u32>,
    cell_counts: Vec<usize>,
}

impl GridKernelModel {
    pub fn new(n: usize, grid_rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = grid_rows.len();
        if n == 0 || m == 0 {
            return Err(Error::invalid("grid kernel needs n >= 1 and m >= 1"));
        }
        if grid_rows.iter().any(|r| r.len() != m) {
            return Err(Error::invalid("grid kernel matrix must be square"));
        }
        let mut grid = vec![0.0; m * m];
        for a in 0..m {
            for b in 0..m {
                let v = grid_rows[a][b];
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::invalid("grid kernel entries must be >= 0 and finite"));
                }
                if (v - grid_rows[b][a]).abs() > 1e-12 * v.abs().max(1.0) {
                    return Err(Error::invalid("grid kernel matrix must be symmetric"));
                }
                grid[a * m + b] = v;
            }
        }
        let mut cell_of = vec![0u32; n];
        let mut cell_counts = vec![0usize; m];
        for i in 0..n {
            // cell = ceil((i+1) * m / n), 1-based; stored 0-based.
            let c = ((i + 1) * m).div_ceil(n) - 1;
            cell_of[i] = c as u32;
            cell_counts[c] += 1;
        }
        Ok(Self {
            n,
            m,
            grid,
            cell_of,
            cell_counts,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn resolution(&self) -> usize {
        self.m
    }

    pub fn cell_of(&self, i: usize) -> usize {
        self.cell_of[i] as usize
    }

    fn pair_prob(&self, a: usize, b: usize) -> f64 {
        (self.grid[a * self.m + b] / self.n as f64).min(1.0)
    }
}

/// A closed-form edge-probability model.
#[derive(Debug, Clone)]
pub enum GraphModel {
    Sbm(SbmModel),
    ChungLu(ChungLuModel),
    Kronecker(KroneckerModel),
    Grid(GridKernelModel),
}

/// Criticality regime of a model, decided by comparing the operator-norm
/// surrogate against 1 with a tolerance band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Regime {
    Subcritical,
    Supercritical,
    NearCritical,
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct Criticality {
    pub regime: Regime,
    pub operator_norm: f64,
    pub tolerance: f64,
}

impl Criticality {
    pub(crate) fn classify(operator_norm: f64, tolerance: f64) -> Self {
        let regime = if operator_norm < 1.0 - tolerance {
            Regime::Subcritical
        } else if operator_norm > 1.0 + tolerance {
            Regime::Supercritical
        } else {
            Regime::NearCritical
        };
        Self {
            regime,
            operator_norm,
            tolerance,
        }
    }
}

impl std::fmt::Display for Criticality {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{:?} (operator norm {:.6}, tolerance {})",
            self.regime, self.operator_norm, self.tolerance
        )
    }
}

impl GraphModel {
    pub fn n(&self) -> usize {
        match self {
            GraphModel::Sbm(m) => m.n(),
            GraphModel::ChungLu(m) => m.n(),
            GraphModel::Kronecker(m) => m.n(),
            GraphModel::Grid(m) => m.n(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            GraphModel::Sbm(_) => "sbm",
            GraphModel::ChungLu(_) => "chung_lu",
            GraphModel::Kronecker(_) => "kronecker",
            GraphModel::Grid(_) => "grid",
        }
    }

    pub fn as_sbm(&self) -> Option<&SbmModel> {
        match self {
            GraphModel::Sbm(m) => Some(m),
            _ => None,
        }
    }

    fn check_vertex(&self, i: usize) -> Result<()> {
        if i >= self.n() {
            return Err(Error::invalid(format!(
                "vertex id {i} out of range for n = {}",
                self.n()
            )));
        }
        Ok(())
    }

    /// Probability of the edge `(i, j)`; zero when `i == j`.
    pub fn edge_prob(&self, i: usize, j: usize) -> Result<f64> {
        self.check_vertex(i)?;
        self.check_vertex(j)?;
        Ok(self.edge_prob_unchecked(i, j))
    }

    /// Kernel value `A_ii / n` at the diagonal. The graph itself has no
    /// self-loops (`p_ii = 0`), but the branching approximation keeps the
    /// full kernel row.
    pub(crate) fn kernel_diag(&self, i: usize) -> f64 {
        match self {
            GraphModel::Sbm(m) => m.pair_prob(m.block_of(i), m.block_of(i)),
            GraphModel::ChungLu(m) => (m.weights[i] * m.weights[i] / m.n as f64).min(1.0),
            GraphModel::Kronecker(m) => {
                let l = m.weight(i) as i32;
                m.zeta.powi(l) * m.gamma.powi(m.k as i32 - l)
            }
            GraphModel::Grid(m) => m.pair_prob(m.cell_of(i), m.cell_of(i)),
        }
    }

    pub(crate) fn edge_prob_unchecked(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        match self {
            GraphModel::Sbm(m) => m.pair_prob(m.block_of(i), m.block_of(j)),
            GraphModel::ChungLu(m) => (m.weights[i] * m.weights[j] / m.n as f64).min(1.0),
            GraphModel::Kronecker(m) => m.pair_prob(i, j),
            GraphModel::Grid(m) => m.pair_prob(m.cell_of(i), m.cell_of(j)),
        }
    }

    /// Expected degree `mu_i = sum_{j != i} p_ij`, computed in closed form.
    pub fn expected_degree(&self, i: usize) -> Result<f64> {
        self.check_vertex(i)?;
        Ok(match self {
            GraphModel::Sbm(m) => {
                let l = m.block_of(i);
                let mut mu = 0.0;
                for b in 0..m.num_blocks() {
                    mu += m.block_sizes[b] as f64 * m.pair_prob(l, b);
                }
                mu - m.pair_prob(l, l)
            }
            GraphModel::ChungLu(m) => m.weights[i] * (m.weight_sum - m.weights[i]) / m.n as f64,
            GraphModel::Kronecker(m) => {
                let l = m.weight(i) as i32;
                let k = m.k as i32;
                (m.zeta + m.beta).powi(l) * (m.beta + m.gamma).powi(k - l)
                    - m.zeta.powi(l) * m.gamma.powi(k - l)
            }
            GraphModel::Grid(m) => {
                let a = m.cell_of(i);
                let mut mu = 0.0;
                for c in 0..m.m {
                    mu += m.cell_counts[c] as f64 * m.pair_prob(a, c);
                }
                mu - m.pair_prob(a, a)
            }
        })
    }

    /// Classifies the model as sub-/supercritical via its operator-norm
    /// surrogate.
    pub fn criticality(&self, tolerance: f64) -> Result<Criticality> {
        if !(tolerance > 0.0) {
            return Err(Error::invalid("criticality tolerance must be > 0"));
        }
        let norm = match self {
            GraphModel::Sbm(m) => {
                // Largest eigenvalue of K diag(alpha), computed through the
                // symmetric similarity sqrt(alpha_l) K_lm sqrt(alpha_m).
                let s = m.num_blocks();
                let n = m.n as f64;
                let mat = DMatrix::from_fn(s, s, |l, c| {
                    let al = (m.block_sizes[l] as f64 / n).sqrt();
                    let ac = (m.block_sizes[c] as f64 / n).sqrt();
                    al * m.rate(l, c) * ac
                });
                largest_abs_eigenvalue(mat)?
            }
            GraphModel::ChungLu(m) => {
                m.weights.iter().map(|w| w * w).sum::<f64>() / m.n as f64
            }
            GraphModel::Kronecker(m) => (m.zeta + m.beta) * (m.beta + m.gamma),
            GraphModel::Grid(m) => {
                let mat = DMatrix::from_fn(m.m, m.m, |a, b| m.grid[a * m.m + b] / m.m as f64);
                largest_abs_eigenvalue(mat)?
            }
        };
        Ok(Criticality::classify(norm, tolerance))
    }

    /// Samples the neighbor set of vertex `i` in one graph realization.
    /// Each `j != i` is included independently with probability
    /// `edge_prob(i, j)`.
    pub fn sample_neighbors<R: Rng>(&self, i: usize, rng: &mut R) -> Result<Vec<usize>> {
        self.check_vertex(i)?;
        Ok(match self {
            GraphModel::Sbm(m) => {
                let l = m.block_of(i);
                let mut out = Vec::new();
                for b in 0..m.num_blocks() {
                    let p = m.pair_prob(l, b);
                    let range = m.block_range(b);
                    let own = b == l;
                    let pos_i = if own { i - range.start } else { usize::MAX };
                    sample_within_pool(
                        p,
                        range.len() - usize::from(own),
                        |idx| {
                            // Skip over i within its own block.
                            if own && idx >= pos_i {
                                range.start + idx + 1
                            } else {
                                range.start + idx
                            }
                        },
                        &mut out,
                        rng,
                    );
                }
                out
            }
            _ => {
                let mut out = Vec::new();
                for j in 0..self.n() {
                    if j != i && rng.gen::<f64>() < self.edge_prob_unchecked(i, j) {
                        out.push(j);
                    }
                }
                out
            }
        })
    }

    /// Samples a full undirected graph realization. Refused above the cap.
    pub fn sample_full_graph<R: Rng>(&self, rng: &mut R) -> Result<SampledGraph> {
        self.sample_full_graph_capped(DEFAULT_FULL_SAMPLE_CAP, rng)
    }

    pub fn sample_full_graph_capped<R: Rng>(
        &self,
        cap: usize,
        rng: &mut R,
    ) -> Result<SampledGraph> {
        let n = self.n();
        if n > cap {
            return Err(Error::Refused(format!(
                "n = {n} exceeds the full-graph sampling cap {cap}; \
                 use lazy neighbor probing instead"
            )));
        }
        let mut adj = vec![Vec::new(); n];
        for i in 0..n {
            for j in i + 1..n {
                if rng.gen::<f64>() < self.edge_prob_unchecked(i, j) {
                    adj[i].push(j);
                    adj[j].push(i);
                }
            }
        }
        Ok(SampledGraph { adj })
    }

    /// Symmetry class of each vertex: vertices in one class are
    /// exchangeable, so they share expected degrees and component means.
    pub fn symmetry_classes(&self) -> Vec<usize> {
        match self {
            GraphModel::Sbm(m) => (0..m.n).map(|i| m.block_of(i)).collect(),
            GraphModel::ChungLu(m) => {
                // Group exactly equal weights.
                let mut reps: Vec<f64> = Vec::new();
                m.weights
                    .iter()
                    .map(|&w| {
                        if let Some(pos) = reps.iter().position(|&r| r == w) {
                            pos
                        } else {
                            reps.push(w);
                            reps.len() - 1
                        }
                    })
                    .collect()
            }
            GraphModel::Kronecker(m) => (0..m.n()).map(|i| m.weight(i) as usize).collect(),
            GraphModel::Grid(m) => (0..m.n).map(|i| m.cell_of(i)).collect(),
        }
    }
}

/// Draws `Binomial(pool_size, p)` members from an index pool and maps them
/// to vertex ids. Distributionally identical to per-pair Bernoulli sampling
/// over the pool, in O(draws) expected work.
fn sample_within_pool<R: Rng>(
    p: f64,
    pool_size: usize,
    map: impl Fn(usize) -> usize,
    out: &mut Vec<usize>,
    rng: &mut R,
) {
    if pool_size == 0 || p <= 0.0 {
        return;
    }
    if p >= 1.0 {
        out.extend((0..pool_size).map(map));
        return;
    }
    let binom = Binomial::new(pool_size as u64, p).expect("valid binomial parameters");
    let count = binom.sample(rng) as usize;
    if count == 0 {
        return;
    }
    let picks = rand::seq::index::sample(rng, pool_size, count);
    out.extend(picks.iter().map(map));
}

fn largest_abs_eigenvalue(mat: DMatrix<f64>) -> Result<f64> {
    let dim = mat.nrows();
    let eig = nalgebra::SymmetricEigen::try_new(mat, 1e-13, 10_000).ok_or_else(|| {
        Error::Numerical(format!(
            "symmetric eigensolver failed to converge on a {dim}x{dim} matrix"
        ))
    })?;
    Ok(eig
        .eigenvalues
        .iter()
        .map(|l| l.abs())
        .fold(0.0, f64::max))
}

/// One realized undirected graph, adjacency-list form.
#[derive(Debug, Clone)]
pub struct SampledGraph {
    adj: Vec<Vec<usize>>,
}

impl SampledGraph {
    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    /// Sorted list of undirected edges `(i, j)` with `i < j`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, nbrs) in self.adj.iter().enumerate() {
            for &j in nbrs {
                if i < j {
                    out.push((i, j));
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn component_size(&self, start: usize) -> usize {
        let mut seen = vec![false; self.n()];
        let mut stack = vec![start];
        seen[start] = true;
        let mut count = 0;
        while let Some(v) = stack.pop() {
            count += 1;
            for &w in &self.adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        count
    }
}
