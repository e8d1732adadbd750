//! Multitype Poisson Galton-Watson branching processes, used as an
//! independent oracle for component-size tails, survival probabilities and
//! the supercritical reward structure.
//!
//! Vertices with identical edge-probability rows behave identically, so the
//! process is tracked per symmetry class: an individual of class `c`
//! produces `Poisson(M[c][d])` children of class `d`, where `M` aggregates
//! the per-vertex rates `A_ij / n` over each class.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::graph::{Criticality, GraphModel, DEFAULT_CRITICALITY_TOLERANCE};

/// Default cap on simulated total progeny.
pub const DEFAULT_PROGENY_CAP: u64 = 100_000;

#[derive(Debug, Clone)]
pub struct BranchingModel {
    /// Symmetry class of each type.
    class_of: Vec<usize>,
    /// Members per class.
    class_count: Vec<usize>,
    /// `rates[c][d]`: mean number of class-`d` children per class-`c`
    /// individual (class-aggregated offspring rate).
    rates: DMatrix<f64>,
    /// The kernel-diagonal share of `rates[c][c]` attributable to the
    /// parent's own vertex. A graph component can never revisit it, so the
    /// expected-progeny linear system leaves it out; the simulator keeps it
    /// so the progeny dominates the component size.
    own_rate: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProgenyResult {
    /// Extinct with this many individuals in total (root included).
    Finite(u64),
    /// The population reached more than `cap` individuals.
    Exceeded(u64),
}

impl BranchingModel {
    /// Offspring rates `A_ij / n` read off a graph model's full kernel
    /// (diagonal included), aggregated over symmetry classes. Keeping the
    /// diagonal is what makes the total progeny stochastically dominate the
    /// true component size.
    pub fn from_graph(model: &GraphModel) -> Self {
        let classes = model.symmetry_classes();
        let num_classes = classes.iter().copied().max().unwrap_or(0) + 1;
        let mut class_count = vec![0usize; num_classes];
        for &c in &classes {
            class_count[c] += 1;
        }
        let mut rep = vec![usize::MAX; num_classes];
        for (v, &c) in classes.iter().enumerate() {
            if rep[c] == usize::MAX {
                rep[c] = v;
            }
        }
        // Rates within a class are not constant for every model (Kronecker
        // pairs depend on bit overlap, not just weight), so sum over actual
        // members from one representative per class.
        let mut rates = DMatrix::zeros(num_classes, num_classes);
        let mut own_rate = vec![0.0; num_classes];
        for c in 0..num_classes {
            let i = rep[c];
            own_rate[c] = model.kernel_diag(i);
            for (j, &d) in classes.iter().enumerate() {
                rates[(c, d)] += if j == i {
                    own_rate[c]
                } else {
                    model.edge_prob(i, j).expect("valid vertices")
                };
            }
        }
        Self {
            class_of: classes,
            class_count,
            rates,
            own_rate,
        }
    }

    /// Arbitrary per-type offspring rate matrix (one type per row); used for
    /// single-type oracles and hand-built processes.
    pub fn from_rates(rates: Vec<Vec<f64>>) -> Result<Self> {
        let s = rates.len();
        if s == 0 {
            return Err(Error::invalid("rate matrix must be non-empty"));
        }
        if rates.iter().any(|r| r.len() != s) {
            return Err(Error::invalid("rate matrix must be square"));
        }
        if rates.iter().flatten().any(|&r| !(r >= 0.0) || !r.is_finite()) {
            return Err(Error::invalid("offspring rates must be finite and >= 0"));
        }
        Ok(Self {
            class_of: (0..s).collect(),
            class_count: vec![1; s],
            rates: DMatrix::from_fn(s, s, |c, d| rates[c][d]),
            own_rate: vec![0.0; s],
        })
    }

    /// Number of types (vertices when built from a graph).
    pub fn num_types(&self) -> usize {
        self.class_of.len()
    }

    fn num_classes(&self) -> usize {
        self.class_count.len()
    }

    fn expand(&self, per_class: &[f64]) -> Vec<f64> {
        self.class_of.iter().map(|&c| per_class[c]).collect()
    }

    /// Spectral radius of the aggregated offspring matrix, via the
    /// symmetric similarity `sqrt(n_c) r_cd sqrt(n_d)`.
    fn spectral_radius(&self, exclude_own: bool) -> Result<f64> {
        let s = self.num_classes();
        let sym = DMatrix::from_fn(s, s, |c, d| {
            let scale =
                (self.class_count[c] as f64 / self.class_count[d] as f64).sqrt();
            let own = if exclude_own && c == d { self.own_rate[c] } else { 0.0 };
            scale * (self.rates[(c, d)] - own)
        });
        debug_assert!((sym.clone() - sym.transpose()).amax() < 1e-9);
        let eig = nalgebra::SymmetricEigen::try_new(sym, 1e-13, 10_000)
            .ok_or_else(|| Error::Numerical("eigenvalue iteration failed".into()))?;
        Ok(eig.eigenvalues.amax())
    }

    /// Simulates the total progeny started from one individual of
    /// `root_type`, generation by generation with class-aggregated Poisson
    /// draws.
    pub fn total_progeny<R: Rng>(&self, root_type: usize, cap: u64, rng: &mut R) -> Result<ProgenyResult> {
        if cap == 0 {
            return Err(Error::invalid("progeny cap must be >= 1"));
        }
        if root_type >= self.num_types() {
            return Err(Error::invalid(format!(
                "root type {root_type} out of range for {} types",
                self.num_types()
            )));
        }
        let s = self.num_classes();
        let mut current = vec![0u64; s];
        current[self.class_of[root_type]] = 1;
        let mut total: u64 = 1;
        loop {
            let mut next = vec![0u64; s];
            let mut alive = false;
            for d in 0..s {
                let mean: f64 = (0..s)
                    .map(|c| current[c] as f64 * self.rates[(c, d)])
                    .sum();
                if mean > 0.0 {
                    let draw = Poisson::new(mean)
                        .map_err(|e| Error::Numerical(format!("poisson({mean}): {e}")))?
                        .sample(rng) as u64;
                    next[d] = draw;
                    alive |= draw > 0;
                }
            }
            if !alive {
                return Ok(ProgenyResult::Finite(total));
            }
            total = total.saturating_add(next.iter().sum::<u64>());
            if total > cap {
                return Ok(ProgenyResult::Exceeded(cap));
            }
            current = next;
        }
    }

    /// Survival probabilities per type: the maximal fixed point of
    /// `Phi(a) = 1 - exp(-(A/n) a)`, reached by iterating from the all-ones
    /// vector (which dominates the fixed point, so the monotone iterates
    /// decrease onto it).
    pub fn survival_fixed_point(&self, tol: f64, max_iter: usize) -> Result<Vec<f64>> {
        if !(tol > 0.0) {
            return Err(Error::invalid("fixed-point tolerance must be > 0"));
        }
        let s = self.num_classes();
        let mut a = vec![1.0f64; s];
        for _ in 0..max_iter {
            let mut next = vec![0.0f64; s];
            let mut delta = 0.0f64;
            for c in 0..s {
                let dot: f64 = (0..s).map(|d| self.rates[(c, d)] * a[d]).sum();
                next[c] = 1.0 - (-dot).exp();
                delta = delta.max((next[c] - a[c]).abs());
            }
            a = next;
            if delta < tol {
                return Ok(self.expand(&a));
            }
        }
        Err(Error::Numerical(format!(
            "survival fixed point did not converge within {max_iter} iterations; last iterate {a:?}"
        )))
    }

    /// Expected total progeny per type for subcritical models, from the
    /// linear system `x = e + (A/n) x` solved over symmetry classes.
    pub fn expected_progeny_linear(&self) -> Result<Vec<f64>> {
        let radius = self.spectral_radius(true)?;
        let crit = Criticality::classify(radius, DEFAULT_CRITICALITY_TOLERANCE);
        if !matches!(crit.regime, crate::graph::Regime::Subcritical) {
            return Err(Error::Refused(format!(
                "expected progeny is only defined for subcritical processes; \
                 offspring matrix is {crit}"
            )));
        }
        let s = self.num_classes();
        let mut exploration = self.rates.clone();
        for c in 0..s {
            exploration[(c, c)] -= self.own_rate[c];
        }
        let system = DMatrix::identity(s, s) - exploration;
        let rhs = nalgebra::DVector::from_element(s, 1.0);
        let x = system
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Numerical("singular linear system for expected progeny".into()))?;
        Ok(self.expand(x.as_slice()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feedback::{probe_round, FeedbackKind};
    use crate::graph::SbmModel;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn single(rate: f64) -> BranchingModel {
        BranchingModel::from_rates(vec![vec![rate]]).unwrap()
    }

    /// Root of rho = 1 - exp(-2 rho), solved offline by Newton's method.
    const RHO_RATE_2: f64 = 0.796812;

    #[test]
    fn zero_rates_give_root_only() {
        let m = single(0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            assert_eq!(
                m.total_progeny(0, 10, &mut rng).unwrap(),
                ProgenyResult::Finite(1)
            );
        }
    }

    #[test]
    fn subcritical_progeny_mean() {
        // Single-type GW with rate 0.5 has mean total progeny 1/(1-0.5) = 2
        // and variance 0.5/(1-0.5)^3 = 4.
        let m = single(0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let runs = 100_000;
        let mut sum = 0u64;
        for _ in 0..runs {
            match m.total_progeny(0, 100_000, &mut rng).unwrap() {
                ProgenyResult::Finite(t) => sum += t,
                ProgenyResult::Exceeded(_) => panic!("cap hit in subcritical run"),
            }
        }
        let mean = sum as f64 / runs as f64;
        let se = (4.0f64 / runs as f64).sqrt();
        assert!((mean - 2.0).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn supercritical_exceed_frequency_matches_survival() {
        let m = single(2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let runs = 100_000;
        let mut exceeded = 0;
        for _ in 0..runs {
            if matches!(
                m.total_progeny(0, 10_000, &mut rng).unwrap(),
                ProgenyResult::Exceeded(_)
            ) {
                exceeded += 1;
            }
        }
        let freq = exceeded as f64 / runs as f64;
        let se = (RHO_RATE_2 * (1.0 - RHO_RATE_2) / runs as f64).sqrt();
        // 3 sigma plus a small allowance for finite-cap bias.
        assert!((freq - RHO_RATE_2).abs() < 3.0 * se + 0.002, "freq {freq}");
    }

    #[test]
    fn survival_zero_when_subcritical() {
        let rho = single(0.5).survival_fixed_point(1e-9, 10_000).unwrap();
        assert!(rho[0].abs() < 1e-8, "rho {}", rho[0]);
    }

    #[test]
    fn survival_scalar_fixed_point() {
        let rho = single(2.0).survival_fixed_point(1e-10, 10_000).unwrap();
        assert!((rho[0] - RHO_RATE_2).abs() < 1e-5, "rho {}", rho[0]);
        // Residual check.
        let residual = (1.0 - (-2.0 * rho[0]).exp() - rho[0]).abs();
        assert!(residual < 1e-9);
    }

    #[test]
    fn survival_nonconvergence_reports_error() {
        let r = single(2.0).survival_fixed_point(1e-12, 3);
        assert!(matches!(r, Err(Error::Numerical(_))));
    }

    #[test]
    fn survival_coordinate_domination_two_block_sbm() {
        // Supercritical two-block model under the equal-off-diagonal
        // assumptions with K11 > K22: the denser block survives more, and
        // the gap is controlled by the expected-degree gap.
        let model = GraphModel::Sbm(
            SbmModel::new(vec![100, 100], vec![vec![6.0, 1.0], vec![1.0, 3.0]]).unwrap(),
        );
        let b = BranchingModel::from_graph(&model);
        let rho = b.survival_fixed_point(1e-12, 100_000).unwrap();
        let (r1, r2) = (rho[0], rho[150]);
        assert!(r1 >= r2);
        let rho_star = r1.max(r2);
        let b1 = model.expected_degree(0).unwrap();
        let b2 = model.expected_degree(150).unwrap();
        assert!(r1 - r2 <= rho_star * (b1 - b2) + 1e-12);
    }

    #[test]
    fn expected_progeny_identity_and_scalar() {
        let x = single(0.0).expected_progeny_linear().unwrap();
        assert_eq!(x, vec![1.0]);
        let x = single(0.5).expected_progeny_linear().unwrap();
        assert!((x[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn expected_progeny_refuses_near_critical() {
        // ER(3, p = 1/2): aggregated offspring rate (n-1)p = 1.
        let model =
            GraphModel::Sbm(SbmModel::new(vec![3], vec![vec![1.5]]).unwrap());
        let b = BranchingModel::from_graph(&model);
        let r = b.expected_progeny_linear();
        assert!(matches!(r, Err(Error::Refused(_))), "{r:?}");
    }

    #[test]
    fn component_size_dominated_by_progeny() {
        // |C_i| is stochastically dominated by the total progeny: the
        // component-size CDF sits above the progeny CDF (up to 3 sigma).
        let model =
            GraphModel::Sbm(SbmModel::new(vec![5], vec![vec![0.8]]).unwrap());
        let b = BranchingModel::from_graph(&model);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let runs = 20_000;
        let mut comp_counts = [0u64; 6];
        let mut prog_counts = [0u64; 6];
        for _ in 0..runs {
            let p = probe_round(&model, 0, FeedbackKind::CensoredSize(5), true, &mut rng).unwrap();
            comp_counts[p.true_component_size.unwrap().min(5)] += 1;
            let t = match b.total_progeny(0, 1_000, &mut rng).unwrap() {
                ProgenyResult::Finite(t) => t,
                ProgenyResult::Exceeded(_) => 6,
            };
            prog_counts[(t as usize).min(5)] += 1;
        }
        let mut comp_cdf = 0.0;
        let mut prog_cdf = 0.0;
        for x in 1..=5 {
            comp_cdf += comp_counts[x] as f64 / runs as f64;
            prog_cdf += prog_counts[x] as f64 / runs as f64;
            let band = 3.0 * (0.25f64 / runs as f64).sqrt() * 2.0;
            assert!(
                comp_cdf >= prog_cdf - band,
                "x = {x}: comp {comp_cdf} < prog {prog_cdf}"
            );
        }
    }

    #[test]
    fn duality_of_supercritical_conditioned_on_extinction() {
        // Finite progeny of the rate-2 process, conditioned on extinction,
        // is distributed as the progeny of the dual process with rate
        // 2(1 - rho). Two-sample chi-square over support 1..10 plus tail.
        let sup = single(2.0);
        let dual = single(2.0 * (1.0 - RHO_RATE_2));
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let want = 100_000;
        let mut sup_counts = [0u64; 11];
        let mut collected = 0;
        while collected < want {
            if let ProgenyResult::Finite(t) = sup.total_progeny(0, 10_000, &mut rng).unwrap() {
                sup_counts[(t as usize - 1).min(10)] += 1;
                collected += 1;
            }
        }
        let mut dual_counts = [0u64; 11];
        for _ in 0..want {
            match dual.total_progeny(0, 10_000, &mut rng).unwrap() {
                ProgenyResult::Finite(t) => dual_counts[(t as usize - 1).min(10)] += 1,
                ProgenyResult::Exceeded(_) => dual_counts[10] += 1,
            }
        }
        let mut chi2 = 0.0f64;
        let mut dof = 0.0f64;
        for x in 0..11 {
            let a = sup_counts[x] as f64;
            let b = dual_counts[x] as f64;
            if a + b < 10.0 {
                continue;
            }
            chi2 += (a - b) * (a - b) / (a + b);
            dof += 1.0;
        }
        let bound = dof + 4.0 * (2.0 * dof).sqrt();
        assert!(chi2 < bound, "chi2 {chi2} vs bound {bound}");
    }

    #[test]
    fn mean_gap_shrinks_with_n() {
        // Expected progeny x_i vs Monte Carlo component mean for
        // subcritical ER with kernel rate 0.5: gap below 5/n, shrinking.
        let mut gaps = Vec::new();
        for &n in &[50usize, 100, 200] {
            let model =
                GraphModel::Sbm(SbmModel::new(vec![n], vec![vec![0.5]]).unwrap());
            let b = BranchingModel::from_graph(&model);
            let x = b.expected_progeny_linear().unwrap()[0];
            let mut rng = ChaCha8Rng::seed_from_u64(31 + n as u64);
            let runs = 1_000_000;
            let mut sum = 0u64;
            for _ in 0..runs {
                let p = probe_round(
                    &model,
                    0,
                    FeedbackKind::CensoredSize(n as u32),
                    true,
                    &mut rng,
                )
                .unwrap();
                sum += p.true_component_size.unwrap() as u64;
            }
            let c_hat = sum as f64 / runs as f64;
            let gap = (x - c_hat).abs();
            assert!(gap < 5.0 / n as f64, "n = {n}: gap {gap}");
            gaps.push(gap);
        }
        assert!(gaps[2] < gaps[0], "gaps {gaps:?} should shrink with n");
    }
}
