//! One round's local observation of the graph around a chosen vertex.
//!
//! A probe lazily realizes a single graph `G_t` while breadth-first
//! exploring from the selected vertex: each candidate edge is sampled at
//! most once per round, so the censored observation and the (optional) true
//! component size are coupled exactly as they would be in one realization.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::graph::GraphModel;

/// Cap on `n` for exhaustive component exploration within a probe.
pub const DEFAULT_EXHAUSTIVE_CAP: usize = 100_000;

/// Which scalar the learner gets to see in a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeedbackKind {
    /// `min(|C_i|, K)`: component size censored at `K`.
    CensoredSize(u32),
    /// Indicator of `|C_i| > K`.
    ExceedIndicator(u32),
    /// Degree of the selected vertex.
    Degree,
}

impl FeedbackKind {
    fn validate(&self) -> Result<()> {
        match self {
            FeedbackKind::CensoredSize(k) | FeedbackKind::ExceedIndicator(k) if *k == 0 => {
                Err(Error::invalid("censoring level K must be >= 1"))
            }
            _ => Ok(()),
        }
    }
}

/// One round's observation, plus the coupled true component size when
/// exhaustion was requested.
#[derive(Debug, Clone, Copy)]
pub struct RoundProbe {
    pub observation: f64,
    /// For censored probes: the component extends beyond the `K` revealed
    /// vertices (equivalently, `|C_i| > K`).
    pub truncated: bool,
    pub true_component_size: Option<usize>,
    /// Number of vertices revealed by the exploration.
    pub explored: usize,
}

/// Lazy breadth-first exploration of one graph realization.
///
/// Unvisited vertices are kept in per-group pools (blocks for the SBM,
/// cells for grid kernels) so that groups with a constant edge probability
/// can be sampled with one binomial draw instead of a per-pair loop.
struct LazyBfs<'a, R: Rng> {
    model: &'a GraphModel,
    rng: &'a mut R,
    /// Unvisited vertices, one pool per group.
    pools: Vec<Vec<usize>>,
    /// (group, index-within-pool) of each unvisited vertex.
    slot: Vec<(u32, u32)>,
    visited: Vec<bool>,
    queue: VecDeque<usize>,
    revealed: usize,
    /// Per-group sampling only applies when the edge probability from any
    /// fixed vertex is constant across a group.
    grouped: bool,
    /// When set, every candidate pair examined this round is recorded;
    /// tests replay the log to audit single-sampling.
    pair_log: Option<Vec<(usize, usize)>>,
}

impl<'a, R: Rng> LazyBfs<'a, R> {
    fn new(model: &'a GraphModel, root: usize, rng: &'a mut R, log_pairs: bool) -> Self {
        let n = model.n();
        let (group_of, num_groups, grouped): (Box<dyn Fn(usize) -> usize>, usize, bool) =
            match model {
                GraphModel::Sbm(m) => {
                    (Box::new(move |v| m.block_of(v)), m.num_blocks(), true)
                }
                GraphModel::Grid(m) => (Box::new(move |v| m.cell_of(v)), m.resolution(), true),
                _ => (Box::new(|_| 0), 1, false),
            };
        let mut pools = vec![Vec::new(); num_groups];
        let mut slot = vec![(0u32, 0u32); n];
        for v in 0..n {
            if v == root {
                continue;
            }
            let g = group_of(v);
            slot[v] = (g as u32, pools[g].len() as u32);
            pools[g].push(v);
        }
        let mut visited = vec![false; n];
        visited[root] = true;
        let mut queue = VecDeque::new();
        queue.push_back(root);
        Self {
            model,
            rng,
            pools,
            slot,
            visited,
            queue,
            revealed: 1,
            grouped,
            pair_log: log_pairs.then(Vec::new),
        }
    }

    fn remove_unvisited(&mut self, v: usize) {
        let (g, idx) = self.slot[v];
        let pool = &mut self.pools[g as usize];
        pool.swap_remove(idx as usize);
        if let Some(&moved) = pool.get(idx as usize) {
            self.slot[moved] = (g, idx);
        }
    }

    fn discover(&mut self, v: usize) {
        self.remove_unvisited(v);
        self.visited[v] = true;
        self.queue.push_back(v);
        self.revealed += 1;
    }

    /// Samples all edges from `v` to currently unvisited vertices and
    /// enqueues the hits. Returns the number of new vertices.
    fn expand(&mut self, v: usize) -> usize {
        let mut hits: Vec<usize> = Vec::new();
        if self.grouped {
            for g in 0..self.pools.len() {
                let pool = &self.pools[g];
                if pool.is_empty() {
                    continue;
                }
                let p = self.model.edge_prob_unchecked(v, pool[0]);
                if let Some(log) = self.pair_log.as_mut() {
                    log.extend(pool.iter().map(|&j| (v.min(j), v.max(j))));
                }
                if p <= 0.0 {
                    continue;
                }
                if p >= 1.0 {
                    hits.extend_from_slice(pool);
                    continue;
                }
                let count = Binomial::new(pool.len() as u64, p)
                    .expect("valid binomial parameters")
                    .sample(self.rng) as usize;
                if count > 0 {
                    let picks = rand::seq::index::sample(self.rng, pool.len(), count);
                    hits.extend(picks.iter().map(|idx| pool[idx]));
                }
            }
        } else {
            for pool in &self.pools {
                for &j in pool {
                    if let Some(log) = self.pair_log.as_mut() {
                        log.push((v.min(j), v.max(j)));
                    }
                    if self.rng.gen::<f64>() < self.model.edge_prob_unchecked(v, j) {
                        hits.push(j);
                    }
                }
            }
        }
        let found = hits.len();
        for j in hits {
            self.discover(j);
        }
        found
    }

    /// Continues the BFS until at least `limit` vertices are revealed or the
    /// component is exhausted. May overshoot `limit` by one expansion batch.
    fn run_until(&mut self, limit: usize) {
        while self.revealed < limit {
            let Some(v) = self.queue.pop_front() else {
                return;
            };
            self.expand(v);
        }
    }

    /// Whether the component extends beyond the vertices revealed so far.
    /// Samples further edges from the frontier until a new vertex is found
    /// or the frontier empties.
    fn has_more(&mut self) -> bool {
        while let Some(v) = self.queue.pop_front() {
            if self.expand(v) > 0 {
                return true;
            }
        }
        false
    }

    fn exhaust(&mut self) {
        while let Some(v) = self.queue.pop_front() {
            self.expand(v);
        }
    }
}

/// Performs one round's probe from vertex `i` under the given feedback kind.
/// With `want_true_size`, the same realization's BFS is continued to
/// exhaustion so the observation and the true size stay coupled.
pub fn probe_round<R: Rng>(
    model: &GraphModel,
    i: usize,
    feedback: FeedbackKind,
    want_true_size: bool,
    rng: &mut R,
) -> Result<RoundProbe> {
    probe_round_capped(model, i, feedback, want_true_size, DEFAULT_EXHAUSTIVE_CAP, rng)
}

pub fn probe_round_capped<R: Rng>(
    model: &GraphModel,
    i: usize,
    feedback: FeedbackKind,
    want_true_size: bool,
    exhaustive_cap: usize,
    rng: &mut R,
) -> Result<RoundProbe> {
    feedback.validate()?;
    if i >= model.n() {
        return Err(Error::invalid(format!(
            "vertex id {i} out of range for n = {}",
            model.n()
        )));
    }
    if want_true_size && model.n() > exhaustive_cap {
        return Err(Error::Refused(format!(
            "exhaustive component exploration refused for n = {} > cap {}; \
             use precomputed component-mean estimates instead",
            model.n(),
            exhaustive_cap
        )));
    }
    let mut bfs = LazyBfs::new(model, i, rng, false);
    let probe = run_probe(&mut bfs, feedback, want_true_size);
    Ok(probe)
}

fn run_probe<R: Rng>(
    bfs: &mut LazyBfs<'_, R>,
    feedback: FeedbackKind,
    want_true_size: bool,
) -> RoundProbe {
    let (observation, truncated) = match feedback {
        FeedbackKind::CensoredSize(k) => {
            let k = k as usize;
            bfs.run_until(k);
            let truncated = bfs.revealed > k || (bfs.revealed == k && bfs.has_more());
            ((bfs.revealed.min(k)) as f64, truncated)
        }
        FeedbackKind::ExceedIndicator(k) => {
            let k = k as usize;
            bfs.run_until(k);
            let exceeds = bfs.revealed > k || (bfs.revealed == k && bfs.has_more());
            (f64::from(exceeds), exceeds)
        }
        FeedbackKind::Degree => {
            let root = bfs.queue.pop_front().expect("root enqueued");
            let deg = bfs.expand(root);
            (deg as f64, false)
        }
    };
    let true_component_size = if want_true_size {
        bfs.exhaust();
        Some(bfs.revealed)
    } else {
        None
    };
    if let Some(true_size) = true_component_size {
        // Coupling: the observation must be the deterministic function of
        // the true size dictated by the feedback kind.
        match feedback {
            FeedbackKind::CensoredSize(k) => {
                debug_assert_eq!(observation, (true_size.min(k as usize)) as f64);
                debug_assert_eq!(truncated, true_size > k as usize);
            }
            FeedbackKind::ExceedIndicator(k) => {
                debug_assert_eq!(observation, f64::from(true_size > k as usize));
            }
            FeedbackKind::Degree => {}
        }
    }
    RoundProbe {
        observation,
        truncated,
        true_component_size,
        explored: bfs.revealed,
    }
}

/// Samples the degree of vertex `i` in one realization: a Poisson-binomial
/// draw over the row of edge probabilities.
pub fn sample_degree<R: Rng>(model: &GraphModel, i: usize, rng: &mut R) -> Result<usize> {
    Ok(model.sample_neighbors(i, rng)?.len())
}
