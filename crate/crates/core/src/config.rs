//! Experiment configuration: TOML schema, model construction, and
//! dotted-path overrides for scripted parameter sweeps.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bandit::{default_k_of_n, Algorithm};
use crate::error::{Error, Result};
use crate::graph::{
    ChungLuModel, GraphModel, GridKernelModel, KroneckerModel, SbmModel,
    DEFAULT_CRITICALITY_TOLERANCE,
};

pub const DEFAULT_ESTIMATE_SAMPLES: u64 = 100_000;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub algorithm: AlgorithmConfig,
    pub experiment: ExperimentSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelConfig {
    Sbm {
        n: usize,
        /// Either explicit sizes or proportions (rounded largest-remainder).
        #[serde(skip_serializing_if = "Option::is_none")]
        block_sizes: Option<Vec<usize>>,
        #[serde(skip_serializing_if = "Option::is_none")]
        block_proportions: Option<Vec<f64>>,
        rates: Vec<Vec<f64>>,
    },
    ChungLu {
        n: usize,
        #[serde(skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
        #[serde(skip_serializing_if = "Option::is_none")]
        weight_law: Option<WeightLaw>,
    },
    Kronecker {
        k: u32,
        zeta: f64,
        beta: f64,
        gamma: f64,
        #[serde(default)]
        ordered: bool,
    },
    Grid {
        n: usize,
        grid: Vec<Vec<f64>>,
    },
}

/// Deterministic power-law weight profile `w_i ~ i^{-1/(exponent-1)}`,
/// scaled into `[w_min, w_max]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightLaw {
    pub exponent: f64,
    pub w_min: f64,
    pub w_max: f64,
}

impl WeightLaw {
    pub fn weights(&self, n: usize) -> Result<Vec<f64>> {
        if self.exponent <= 1.0 {
            return Err(Error::invalid("power-law exponent must be > 1"));
        }
        if !(self.w_min > 0.0 && self.w_max >= self.w_min) {
            return Err(Error::invalid("weight bounds must satisfy 0 < w_min <= w_max"));
        }
        let p = 1.0 / (self.exponent - 1.0);
        Ok((0..n)
            .map(|i| {
                let w = self.w_min * ((n as f64 + 1.0) / (i as f64 + 1.0)).powf(p);
                w.min(self.w_max)
            })
            .collect())
    }
}

/// Largest-remainder rounding of proportions into integer block sizes
/// summing to `n`.
pub fn proportions_to_sizes(proportions: &[f64], n: usize) -> Result<Vec<usize>> {
    if proportions.is_empty() {
        return Err(Error::invalid("block proportions must be non-empty"));
    }
    let total: f64 = proportions.iter().sum();
    if proportions.iter().any(|&p| p <= 0.0) || total <= 0.0 {
        return Err(Error::invalid("block proportions must be positive"));
    }
    let quotas: Vec<f64> = proportions.iter().map(|p| p / total * n as f64).collect();
    let mut sizes: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = sizes.iter().sum();
    let mut order: Vec<usize> = (0..quotas.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    for i in 0..(n - assigned) {
        sizes[order[i % order.len()]] += 1;
    }
    Ok(sizes)
}

impl ModelConfig {
    pub fn build(&self) -> Result<GraphModel> {
        match self {
            ModelConfig::Sbm {
                n,
                block_sizes,
                block_proportions,
                rates,
            } => {
                let sizes = match (block_sizes, block_proportions) {
                    (Some(s), None) => {
                        if s.iter().sum::<usize>() != *n {
                            return Err(Error::invalid(format!(
                                "block sizes sum to {}, expected n = {n}",
                                s.iter().sum::<usize>()
                            )));
                        }
                        s.clone()
                    }
                    (None, Some(p)) => proportions_to_sizes(p, *n)?,
                    _ => {
                        return Err(Error::invalid(
                            "exactly one of block_sizes / block_proportions is required",
                        ))
                    }
                };
                Ok(GraphModel::Sbm(SbmModel::new(sizes, rates.clone())?))
            }
            ModelConfig::ChungLu { n, weights, weight_law } => {
                let w = match (weights, weight_law) {
                    (Some(w), None) => {
                        if w.len() != *n {
                            return Err(Error::invalid(format!(
                                "{} weights given, expected n = {n}",
                                w.len()
                            )));
                        }
                        w.clone()
                    }
                    (None, Some(law)) => law.weights(*n)?,
                    _ => {
                        return Err(Error::invalid(
                            "exactly one of weights / weight_law is required",
                        ))
                    }
                };
                Ok(GraphModel::ChungLu(ChungLuModel::new(w)?))
            }
            ModelConfig::Kronecker {
                k,
                zeta,
                beta,
                gamma,
                ordered,
            } => Ok(GraphModel::Kronecker(if *ordered {
                KroneckerModel::new_ordered(*k, *zeta, *beta, *gamma)?
            } else {
                KroneckerModel::new(*k, *zeta, *beta, *gamma)?
            })),
            ModelConfig::Grid { n, grid } => {
                Ok(GraphModel::Grid(GridKernelModel::new(*n, grid.clone())?))
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmConfig {
    /// One of local_ucb_sub, ucb_double, local_ucb_sup, d_ucb, d_ucb_double.
    pub name: String,
    pub alpha: f64,
    #[serde(rename = "T")]
    pub t_horizon: u64,
    /// Censoring level K (local_ucb_sub only; defaults to ceil(ln T)).
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    /// Period growth factor (d_ucb_double only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Override of the supercritical censoring level k(n).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_of_n: Option<u32>,
    /// Skip the criticality guard (required to run inside the
    /// near-critical band or against the regime).
    #[serde(default)]
    pub override_regime: bool,
}

impl AlgorithmConfig {
    /// Resolves the algorithm selection, filling in model-dependent
    /// defaults.
    pub fn resolve(&self, n: usize) -> Result<Algorithm> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid(format!(
                "alpha = {} must lie in (0,1)",
                self.alpha
            )));
        }
        if self.t_horizon < 2 {
            return Err(Error::invalid("horizon T must be at least 2"));
        }
        match self.name.as_str() {
            "local_ucb_sub" => {
                let k = match self.k {
                    Some(k) => k,
                    None => ((self.t_horizon as f64).ln().ceil() as u32).max(1),
                };
                Ok(Algorithm::LocalUcbSub { k })
            }
            "ucb_double" => Ok(Algorithm::UcbDouble),
            "local_ucb_sup" => {
                let k = match self.k_of_n {
                    Some(k) => k,
                    None => default_k_of_n(n)?,
                };
                Ok(Algorithm::LocalUcbSup { k })
            }
            "d_ucb" => Ok(Algorithm::DUcb),
            "d_ucb_double" => Ok(Algorithm::DUcbDouble {
                beta: self.beta.unwrap_or(2.0),
            }),
            other => Err(Error::invalid(format!(
                "unknown algorithm '{other}' (expected local_ucb_sub, ucb_double, \
                 local_ucb_sup, d_ucb, or d_ucb_double)"
            ))),
        }
    }
}

fn default_replications() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(default = "default_replications")]
    pub replications: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimate_samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub criticality_tolerance: Option<f64>,
}

impl ExperimentSection {
    pub fn estimate_samples(&self) -> u64 {
        self.estimate_samples.unwrap_or(DEFAULT_ESTIMATE_SAMPLES)
    }

    pub fn criticality_tolerance(&self) -> f64 {
        self.criticality_tolerance
            .unwrap_or(DEFAULT_CRITICALITY_TOLERANCE)
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        Self::from_value(
            text.parse::<toml::Value>().map_err(|e| Error::Config {
                path: origin.to_string(),
                message: e.to_string(),
            })?,
            origin,
        )
    }

    pub fn from_value(value: toml::Value, origin: &str) -> Result<Self> {
        value.try_into().map_err(|e: toml::de::Error| Error::Config {
            path: origin.to_string(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &std::path::Path, overrides: &[String]) -> Result<Self> {
        // A missing or unreadable config is a usage error, not a runtime one.
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let mut value = text.parse::<toml::Value>().map_err(|e| Error::Config {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        for ov in overrides {
            apply_override(&mut value, ov)?;
        }
        Self::from_value(value, &path.display().to_string())
    }

    /// Hex SHA-256 of the canonical serialized configuration; recorded in
    /// run metadata and used to detect config drift between runs.
    pub fn digest(&self) -> String {
        let canonical = toml::to_string(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        format!("{:x}", hasher.finalize())
    }
}

/// Applies one `section.key=value` override in place. The dotted path must
/// reference a key that exists (or a new key in an existing table when the
/// schema allows it); the value is parsed as TOML, falling back to a bare
/// string.
pub fn apply_override(root: &mut toml::Value, spec: &str) -> Result<()> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::invalid(format!("override '{spec}' is not of the form key=value")))?;
    let segments: Vec<&str> = path.trim().split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        return Err(Error::invalid(format!("override path '{path}' is malformed")));
    }
    let parsed: toml::Value = match format!("v = {}", raw.trim()).parse::<toml::Value>() {
        Ok(toml::Value::Table(t)) => t.get("v").cloned().unwrap(),
        _ => toml::Value::String(raw.trim().to_string()),
    };
    let mut cursor = root;
    for seg in &segments[..segments.len() - 1] {
        cursor = cursor
            .get_mut(*seg)
            .ok_or_else(|| Error::invalid(format!("override path '{path}': no section '{seg}'")))?;
    }
    let table = cursor
        .as_table_mut()
        .ok_or_else(|| Error::invalid(format!("override path '{path}' does not name a table entry")))?;
    table.insert(segments[segments.len() - 1].to_string(), parsed);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[model]
kind = "sbm"
n = 10
block_sizes = [5, 5]
rates = [[1.2, 0.3], [0.3, 0.6]]

[algorithm]
name = "local_ucb_sub"
alpha = 0.5
T = 100
K = 4

[experiment]
replications = 2
seed = 7
"#;

    #[test]
    fn parses_and_builds() {
        let cfg = ExperimentConfig::from_toml_str(BASE, "test").unwrap();
        let model = cfg.model.build().unwrap();
        assert_eq!(model.n(), 10);
        let alg = cfg.algorithm.resolve(model.n()).unwrap();
        assert_eq!(alg, Algorithm::LocalUcbSub { k: 4 });
        assert_eq!(cfg.experiment.estimate_samples(), DEFAULT_ESTIMATE_SAMPLES);
    }

    #[test]
    fn override_changes_value() {
        let mut value: toml::Value = BASE.parse().unwrap();
        apply_override(&mut value, "algorithm.alpha=0.25").unwrap();
        apply_override(&mut value, "experiment.seed=99").unwrap();
        let cfg = ExperimentConfig::from_value(value, "test").unwrap();
        assert_eq!(cfg.algorithm.alpha, 0.25);
        assert_eq!(cfg.experiment.seed, 99);
    }

    #[test]
    fn override_rejects_unknown_section() {
        let mut value: toml::Value = BASE.parse().unwrap();
        assert!(apply_override(&mut value, "nonexistent.key=1").is_err());
        assert!(apply_override(&mut value, "algorithm.alpha").is_err());
    }

    #[test]
    fn digest_is_stable_and_sensitive() {
        let a = ExperimentConfig::from_toml_str(BASE, "test").unwrap();
        let b = ExperimentConfig::from_toml_str(BASE, "test").unwrap();
        assert_eq!(a.digest(), b.digest());
        let mut c = a.clone();
        c.experiment.seed = 8;
        assert_ne!(a.digest(), c.digest());
    }

    #[test]
    fn proportions_round_largest_remainder() {
        assert_eq!(proportions_to_sizes(&[0.5, 0.5], 10).unwrap(), vec![5, 5]);
        assert_eq!(proportions_to_sizes(&[1.0, 1.0, 1.0], 10).unwrap(), vec![4, 3, 3]);
        assert_eq!(
            proportions_to_sizes(&[0.2, 0.45, 0.35], 10)
                .unwrap()
                .iter()
                .sum::<usize>(),
            10
        );
    }

    #[test]
    fn weight_law_profile() {
        let law = WeightLaw {
            exponent: 2.5,
            w_min: 0.5,
            w_max: 3.0,
        };
        let w = law.weights(100).unwrap();
        assert_eq!(w.len(), 100);
        assert!(w.windows(2).all(|p| p[0] >= p[1]));
        assert!(w.iter().all(|&x| (0.5..=3.0).contains(&x)));
    }

    #[test]
    fn unknown_algorithm_rejected() {
        let mut cfg = ExperimentConfig::from_toml_str(BASE, "test").unwrap();
        cfg.algorithm.name = "thompson".into();
        assert!(cfg.algorithm.resolve(10).is_err());
    }

    #[test]
    fn kronecker_and_chung_lu_configs() {
        let cfg = ExperimentConfig::from_toml_str(
            r#"
[model]
kind = "kronecker"
k = 3
zeta = 0.9
beta = 0.5
gamma = 0.6
ordered = true

[algorithm]
name = "d_ucb"
alpha = 0.5
T = 100

[experiment]
seed = 1
"#,
            "test",
        )
        .unwrap();
        assert_eq!(cfg.model.build().unwrap().n(), 8);

        let cfg = ExperimentConfig::from_toml_str(
            r#"
[model]
kind = "chung_lu"
n = 50
weight_law = { exponent = 3.0, w_min = 0.3, w_max = 2.0 }

[algorithm]
name = "d_ucb"
alpha = 0.5
T = 100

[experiment]
seed = 1
"#,
            "test",
        )
        .unwrap();
        assert_eq!(cfg.model.build().unwrap().n(), 50);
    }
}
