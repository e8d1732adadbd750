//! The learning algorithms: local UCB variants for the subcritical and
//! supercritical regimes, their doubling extensions, and the Poisson
//! kl-UCB index. All selectors break ties toward the lowest vertex id so
//! runs are reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::feedback::{FeedbackKind, RoundProbe};

/// Running per-arm statistics.
#[derive(Debug, Clone, Default)]
pub struct ArmStats {
    pulls: u64,
    sum: f64,
}

impl ArmStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, observation: f64) {
        self.pulls += 1;
        self.sum += observation;
    }

    pub fn pulls(&self) -> u64 {
        self.pulls
    }

    pub fn sum(&self) -> f64 {
        self.sum
    }

    /// Running mean; only meaningful after the first pull.
    pub fn mean(&self) -> f64 {
        debug_assert!(self.pulls > 0);
        self.sum / self.pulls as f64
    }
}

fn require_initialized(stats: &[ArmStats]) -> Result<()> {
    if stats.is_empty() {
        return Err(Error::invalid("selector called with no arms"));
    }
    if stats.iter().any(|s| s.pulls == 0) {
        return Err(Error::invalid(
            "selector called before every arm was pulled once",
        ));
    }
    Ok(())
}

/// Argmax with ties resolved toward the lowest index.
fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Size of the uniformly subsampled baseline set `V_0`:
/// `min(ceil(ln T / ln(1/(1-alpha))), n)`.
pub fn v0_size(n: usize, alpha: f64, t_horizon: f64) -> Result<usize> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha = {alpha} must lie in (0,1)")));
    }
    if !(t_horizon >= 2.0) {
        return Err(Error::invalid("horizon T must be at least 2"));
    }
    let size = (t_horizon.ln() / (1.0 / (1.0 - alpha)).ln()).ceil() as usize;
    Ok(size.max(1).min(n))
}

/// Uniform sample without replacement of `v0_size` vertices, returned sorted.
pub fn subsample_v0<R: Rng>(n: usize, alpha: f64, t_horizon: u64, rng: &mut R) -> Result<Vec<usize>> {
    let size = v0_size(n, alpha, t_horizon as f64)?;
    let mut nodes: Vec<usize> = rand::seq::index::sample(rng, n, size).into_iter().collect();
    nodes.sort_unstable();
    Ok(nodes)
}

/// Subcritical local UCB selection: argmax of
/// `u_hat_i + K * sqrt(ln t / N_i)`.
pub fn local_ucb_sub_select(stats: &[ArmStats], k: f64, t: u64) -> Result<usize> {
    require_initialized(stats)?;
    let log_t = (t.max(1) as f64).ln();
    let indices: Vec<f64> = stats
        .iter()
        .map(|s| s.mean() + k * (log_t / s.pulls as f64).sqrt())
        .collect();
    Ok(argmax(&indices))
}

/// Supercritical local UCB selection over exceedance indicators:
/// argmax of `v_hat_i + sqrt(ln t / N_i)`.
pub fn local_ucb_sup_select(stats: &[ArmStats], t: u64) -> Result<usize> {
    require_initialized(stats)?;
    for s in stats {
        let ones = s.sum;
        if ones < 0.0 || ones > s.pulls as f64 || ones.fract() != 0.0 {
            return Err(Error::invalid(
                "exceedance observations must all lie in {0,1}",
            ));
        }
    }
    let log_t = (t.max(1) as f64).ln();
    let indices: Vec<f64> = stats
        .iter()
        .map(|s| s.mean() + (log_t / s.pulls as f64).sqrt())
        .collect();
    Ok(argmax(&indices))
}

/// Episode bookkeeping for the doubling variant of subcritical local UCB.
#[derive(Debug, Clone)]
pub struct EpisodeState {
    /// Episode index; starts at 1.
    pub q: u32,
    /// Probes observed within the current episode (initialization included).
    pub t_q: u64,
    /// Probes whose component exceeded the current censoring level.
    pub exceed_count: u64,
    t_horizon: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpisodeDecision {
    Continue,
    NewEpisode,
}

impl EpisodeState {
    pub fn new(t_horizon: u64) -> Result<Self> {
        if t_horizon < 2 {
            return Err(Error::invalid("horizon T must be at least 2"));
        }
        Ok(Self {
            q: 1,
            t_q: 0,
            exceed_count: 0,
            t_horizon,
        })
    }

    /// Current censoring level `K_q = 2^q ln T` (real-valued).
    pub fn k_q(&self) -> f64 {
        2f64.powi(self.q as i32) * (self.t_horizon as f64).ln()
    }

    /// Integer censoring level used when probing.
    pub fn probe_level(&self) -> u32 {
        (self.k_q().ceil() as u32).max(1)
    }

    pub fn p_hat(&self) -> f64 {
        if self.t_q == 0 {
            0.0
        } else {
            self.exceed_count as f64 / self.t_q as f64
        }
    }

    pub fn t_horizon(&self) -> u64 {
        self.t_horizon
    }
}

/// Consumes one probe's truncation flag and decides whether the episode
/// ends. The threshold is `1/T + sqrt(ln T / (2 (t_q + 1)))` evaluated at
/// the in-episode clock after the probe. On `NewEpisode` the censoring
/// level doubles and the caller must reset per-arm statistics.
pub fn ucb_double_step(state: &mut EpisodeState, truncated: bool) -> EpisodeDecision {
    state.t_q += 1;
    if truncated {
        state.exceed_count += 1;
    }
    let t = state.t_horizon as f64;
    let threshold = 1.0 / t + (t.ln() / (2.0 * (state.t_q as f64 + 1.0))).sqrt();
    if state.p_hat() > threshold {
        state.q += 1;
        state.t_q = 0;
        state.exceed_count = 0;
        EpisodeDecision::NewEpisode
    } else {
        EpisodeDecision::Continue
    }
}

/// Poisson Kullback-Leibler divergence
/// `d(mu, mu') = mu' - mu + mu ln(mu / mu')`, with the limit convention
/// `d(0, mu') = mu'`.
pub fn poisson_kl(mu: f64, mu_prime: f64) -> Result<f64> {
    if mu < 0.0 {
        return Err(Error::invalid("poisson_kl: mu must be >= 0"));
    }
    if mu_prime <= 0.0 {
        return Err(Error::invalid("poisson_kl: mu' must be > 0"));
    }
    if mu == 0.0 {
        return Ok(mu_prime);
    }
    Ok(mu_prime - mu + mu * (mu / mu_prime).ln())
}

/// Upper confidence value `sup { mu >= mu_hat : d(mu_hat, mu) <= budget }`,
/// by bisection to absolute tolerance 1e-9.
pub fn kl_ucb_upper(mu_hat: f64, budget: f64) -> Result<f64> {
    if mu_hat < 0.0 || budget < 0.0 {
        return Err(Error::invalid("kl_ucb_upper: arguments must be >= 0"));
    }
    if mu_hat == 0.0 {
        // d(0, mu) = mu, so the sup is the budget itself.
        return Ok(budget);
    }
    if budget == 0.0 {
        return Ok(mu_hat);
    }
    // d(mu_hat, U) >= (U - mu_hat)^2 / (2U) gives this bracket upper end.
    let mut lo = mu_hat;
    let mut hi = mu_hat + budget + (2.0 * mu_hat * budget).sqrt() + 1.0;
    debug_assert!(poisson_kl(mu_hat, hi)? >= budget);
    let mut iterations = 0;
    while hi - lo > 1e-9 {
        iterations += 1;
        if iterations > 200 {
            return Err(Error::Numerical(format!(
                "kl_ucb_upper bisection failed to converge (mu_hat = {mu_hat}, budget = {budget})"
            )));
        }
        let mid = 0.5 * (lo + hi);
        if poisson_kl(mu_hat, mid)? <= budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// kl-UCB selection with exploration budget `3 ln t / N_i`.
pub fn d_ucb_select(stats: &[ArmStats], t: u64) -> Result<usize> {
    require_initialized(stats)?;
    let log_t = (t.max(1) as f64).ln();
    let mut indices = Vec::with_capacity(stats.len());
    for s in stats {
        indices.push(kl_ucb_upper(s.mean(), 3.0 * log_t / s.pulls as f64)?);
    }
    Ok(argmax(&indices))
}

/// Default supercritical censoring level `ceil((log2 n)^2)`.
pub fn default_k_of_n(n: usize) -> Result<u32> {
    if n < 2 {
        return Err(Error::invalid("k(n) requires n >= 2"));
    }
    let l = (n as f64).log2();
    Ok((l * l).ceil() as u32)
}

/// Growing action set for the doubling kl-UCB algorithm: each period a
/// fresh batch `U_k` is sampled and merged into `V_k`, and the per-arm
/// statistics start over.
#[derive(Debug, Clone)]
pub struct GrowingActionSet {
    n: usize,
    beta: f64,
    alpha: f64,
    period: u32,
    nodes: Vec<usize>,
    next_boundary: f64,
}

impl GrowingActionSet {
    pub fn new<R: Rng>(n: usize, beta: f64, alpha: f64, rng: &mut R) -> Result<Self> {
        if beta < 2.0 {
            return Err(Error::invalid("beta must be >= 2"));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::invalid(format!("alpha = {alpha} must lie in (0,1)")));
        }
        if n == 0 {
            return Err(Error::invalid("empty vertex set"));
        }
        let mut set = Self {
            n,
            beta,
            alpha,
            period: 1,
            nodes: Vec::new(),
            next_boundary: beta,
        };
        set.sample_batch(rng);
        Ok(set)
    }

    /// Per-period batch size `ceil(ln beta / ln(1/(1-alpha)))`.
    pub fn batch_size(&self) -> usize {
        let size = (self.beta.ln() / (1.0 / (1.0 - self.alpha)).ln()).ceil() as usize;
        size.max(1).min(self.n)
    }

    fn sample_batch<R: Rng>(&mut self, rng: &mut R) {
        let batch = rand::seq::index::sample(rng, self.n, self.batch_size());
        self.nodes.extend(batch.into_iter());
        self.nodes.sort_unstable();
        self.nodes.dedup();
    }

    /// Advances to a new period if round `t` has reached the next boundary
    /// `beta^k`. Returns true when a new period (with a fresh batch) begins.
    pub fn step<R: Rng>(&mut self, t: u64, rng: &mut R) -> bool {
        if (t as f64) < self.next_boundary {
            return false;
        }
        while (t as f64) >= self.next_boundary {
            self.period += 1;
            self.next_boundary *= self.beta;
        }
        self.sample_batch(rng);
        true
    }

    pub fn period(&self) -> u32 {
        self.period
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }
}

/// Which algorithm a [`Learner`] runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Algorithm {
    /// Subcritical local UCB at a fixed censoring level.
    LocalUcbSub { k: u32 },
    /// Subcritical local UCB with doubling censoring levels.
    UcbDouble,
    /// Supercritical local UCB on exceedance indicators at level `k`.
    LocalUcbSup { k: u32 },
    /// Degree-feedback kl-UCB.
    DUcb,
    /// Degree-feedback kl-UCB over a growing action set.
    DUcbDouble { beta: f64 },
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::LocalUcbSub { .. } => "local-ucb-sub",
            Algorithm::UcbDouble => "ucb-double",
            Algorithm::LocalUcbSup { .. } => "local-ucb-sup",
            Algorithm::DUcb => "d-ucb",
            Algorithm::DUcbDouble { .. } => "d-ucb-double",
        }
    }
}

enum LearnerKind {
    Sub { k: u32 },
    Double { episode: EpisodeState },
    Sup { k: u32 },
    DUcb,
    DUcbDouble { set: GrowingActionSet, rng: ChaCha8Rng },
}

/// One algorithm instance playing a probe-per-round protocol:
/// `next_query` names the vertex and feedback kind to probe, `observe`
/// feeds the result back.
pub struct Learner {
    kind: LearnerKind,
    nodes: Vec<usize>,
    stats: Vec<ArmStats>,
    init_cursor: usize,
    /// Rounds completed overall.
    t: u64,
    /// Rounds completed within the current d-UCB instance (resets with the
    /// action set in the doubling variant).
    instance_t: u64,
    pending: Option<usize>,
    pull_counts: BTreeMap<usize, u64>,
}

impl Learner {
    /// Builds a learner over an explicit arm set (all algorithms except the
    /// growing-action-set variant).
    pub fn with_nodes(alg: Algorithm, nodes: Vec<usize>, t_horizon: u64) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::invalid("learner needs at least one arm"));
        }
        if nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("arm set must be sorted and duplicate-free"));
        }
        let kind = match alg {
            Algorithm::LocalUcbSub { k } => {
                if k == 0 {
                    return Err(Error::invalid("censoring level K must be >= 1"));
                }
                LearnerKind::Sub { k }
            }
            Algorithm::UcbDouble => LearnerKind::Double {
                episode: EpisodeState::new(t_horizon)?,
            },
            Algorithm::LocalUcbSup { k } => {
                if k == 0 {
                    return Err(Error::invalid("censoring level k(n) must be >= 1"));
                }
                LearnerKind::Sup { k }
            }
            Algorithm::DUcb => LearnerKind::DUcb,
            Algorithm::DUcbDouble { .. } => {
                return Err(Error::invalid(
                    "the growing-action-set learner is built with Learner::growing",
                ))
            }
        };
        Ok(Self::from_parts(kind, nodes))
    }

    /// Builds the growing-action-set kl-UCB learner; arms are sampled
    /// internally from `0..n` using the given seed.
    pub fn growing(n: usize, beta: f64, alpha: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let set = GrowingActionSet::new(n, beta, alpha, &mut rng)?;
        let nodes = set.nodes().to_vec();
        Ok(Self::from_parts(LearnerKind::DUcbDouble { set, rng }, nodes))
    }

    fn from_parts(kind: LearnerKind, nodes: Vec<usize>) -> Self {
        let stats = vec![ArmStats::new(); nodes.len()];
        Self {
            kind,
            nodes,
            stats,
            init_cursor: 0,
            t: 0,
            instance_t: 0,
            pending: None,
            pull_counts: BTreeMap::new(),
        }
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    /// Cumulative pulls per vertex across all episodes/periods.
    pub fn pull_counts(&self) -> &BTreeMap<usize, u64> {
        &self.pull_counts
    }

    fn feedback(&self) -> FeedbackKind {
        match &self.kind {
            LearnerKind::Sub { k } => FeedbackKind::CensoredSize(*k),
            LearnerKind::Double { episode } => FeedbackKind::CensoredSize(episode.probe_level()),
            LearnerKind::Sup { k } => FeedbackKind::ExceedIndicator(*k),
            LearnerKind::DUcb | LearnerKind::DUcbDouble { .. } => FeedbackKind::Degree,
        }
    }

    fn reset_instance(&mut self) {
        for s in &mut self.stats {
            *s = ArmStats::new();
        }
        self.init_cursor = 0;
        self.instance_t = 0;
    }

    /// Chooses the vertex to probe this round and the feedback kind.
    pub fn next_query(&mut self) -> Result<(usize, FeedbackKind)> {
        if self.pending.is_some() {
            return Err(Error::invalid("next_query called with an observation pending"));
        }
        if let LearnerKind::DUcbDouble { set, rng } = &mut self.kind {
            if set.step(self.t + 1, rng) {
                self.nodes = set.nodes().to_vec();
                self.stats = vec![ArmStats::new(); self.nodes.len()];
                self.init_cursor = 0;
                self.instance_t = 0;
            }
        }
        let arm = if self.init_cursor < self.nodes.len() {
            self.init_cursor
        } else {
            match &self.kind {
                LearnerKind::Sub { k } => {
                    local_ucb_sub_select(&self.stats, f64::from(*k), self.instance_t)?
                }
                LearnerKind::Double { episode } => {
                    // The doubling variant's index uses ln T, not ln t.
                    local_ucb_sub_select(&self.stats, episode.k_q(), episode.t_horizon())?
                }
                LearnerKind::Sup { .. } => local_ucb_sup_select(&self.stats, self.instance_t)?,
                LearnerKind::DUcb | LearnerKind::DUcbDouble { .. } => {
                    d_ucb_select(&self.stats, self.instance_t)?
                }
            }
        };
        self.pending = Some(arm);
        Ok((self.nodes[arm], self.feedback()))
    }

    /// Records the probe result for the vertex chosen by `next_query`.
    pub fn observe(&mut self, probe: &RoundProbe) -> Result<()> {
        let arm = self
            .pending
            .take()
            .ok_or_else(|| Error::invalid("observe called without a pending query"))?;
        if matches!(self.kind, LearnerKind::Sup { .. })
            && probe.observation != 0.0
            && probe.observation != 1.0
        {
            return Err(Error::invalid(
                "exceedance observations must lie in {0,1}",
            ));
        }
        self.stats[arm].record(probe.observation);
        *self.pull_counts.entry(self.nodes[arm]).or_insert(0) += 1;
        if self.init_cursor < self.nodes.len() {
            self.init_cursor += 1;
        }
        self.t += 1;
        self.instance_t += 1;
        if let LearnerKind::Double { episode } = &mut self.kind {
            if ucb_double_step(episode, probe.truncated) == EpisodeDecision::NewEpisode {
                // Per-episode re-initialization: statistics are discarded
                // and the |V_0| initialization pulls are replayed.
                self.reset_instance();
            }
        }
        Ok(())
    }
}
