//! TOML scenario files.
//!
//! ```toml
//! nodes = 20
//! dim = 10
//! seed = 2012
//! mu = 0.02                  # scalar, or one value per node
//! ru_diag = [2.0, 3.0, ...]  # shared diagonal, or one list per node
//! # ru_matrix = [[...], ...] # shared matrix, or one matrix per node
//! noise_db = -20.0           # scalar, or one value per node
//! # profile = "reference"    # draw R_u, noise and topology randomly
//! # w0 = [...]               # defaults to 1/sqrt(dim) entries
//! rule = "metropolis"        # relative_variance | uniform | metropolis
//! # combination = [[...]]    # explicit A, row l / column k = a_{l,k}
//!
//! [topology]                 # one of: file, edges, edge_probability
//! edges = [[1, 2], [2, 3]]   # 1-based
//!
//! [experiment]
//! strategies = ["atc", "cta", "consensus", "noncoop"]
//! iterations = 1000
//! trials = 100
//! window = 0.1
//! ```
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::experiment::ExperimentConfig;
use crate::network::{
    build_combination_matrix, CombinationMatrix, CombinationRule, NetworkTopology,
};
use crate::signal::{
    build_profiles, reference_setup, GroundTruth, NodeProfile, REFERENCE_EDGE_PROBABILITY,
};
use crate::strategy::StrategyKind;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PerNode<T> {
    Shared(T),
    Each(Vec<T>),
}

impl<T: Clone> PerNode<T> {
    fn expand(&self, n: usize, field: &str) -> Result<Vec<T>> {
        match self {
            PerNode::Shared(v) => Ok(vec![v.clone(); n]),
            PerNode::Each(vs) if vs.len() == n => Ok(vs.clone()),
            PerNode::Each(vs) => Err(Error::Config(format!(
                "`{field}` lists {} entries for {n} nodes",
                vs.len()
            ))),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySection {
    pub file: Option<PathBuf>,
    pub edges: Option<Vec<[usize; 2]>>,
    pub edge_probability: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(default = "default_strategies")]
    pub strategies: Vec<String>,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_window")]
    pub window: f64,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            strategies: default_strategies(),
            iterations: default_iterations(),
            trials: default_trials(),
            window: default_window(),
        }
    }
}

fn default_strategies() -> Vec<String> {
    StrategyKind::ALL
        .iter()
        .map(|s| s.name().to_string())
        .collect()
}
fn default_iterations() -> usize {
    1000
}
fn default_trials() -> usize {
    100
}
fn default_window() -> f64 {
    0.1
}

/// Raw file contents, before any randomness is drawn.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub nodes: usize,
    pub dim: usize,
    #[serde(default)]
    pub seed: u64,
    pub mu: PerNode<f64>,
    pub ru_diag: Option<PerNode<Vec<f64>>>,
    pub ru_matrix: Option<PerNode<Vec<Vec<f64>>>>,
    pub noise_db: Option<PerNode<f64>>,
    pub profile: Option<String>,
    pub w0: Option<Vec<f64>>,
    pub rule: Option<String>,
    pub combination: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub topology: TopologySection,
    #[serde(default)]
    pub experiment: ExperimentSection,
}

/// Fully resolved scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub seed: u64,
    pub profiles: Vec<NodeProfile>,
    pub topology: NetworkTopology,
    pub combination: CombinationMatrix,
    pub rule: Option<CombinationRule>,
    pub truth: GroundTruth,
    pub strategies: Vec<StrategyKind>,
    pub iterations: usize,
    pub trials: usize,
    pub window: f64,
}

impl Scenario {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text, path.parent())
    }

    /// `base` resolves a relative topology file.
    pub fn from_toml(text: &str, base: Option<&Path>) -> Result<Self> {
        let file: ScenarioFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        file.resolve(base)
    }

    pub fn experiment(&self) -> ExperimentConfig {
        ExperimentConfig {
            profiles: self.profiles.clone(),
            combination: self.combination.clone(),
            truth: self.truth.clone(),
            strategies: self.strategies.clone(),
            iterations: self.iterations,
            trials: self.trials,
            seed: self.seed,
            steady_state_window: self.window,
        }
    }
}

fn matrix_from_rows(rows: &[Vec<f64>], field: &str) -> Result<DMatrix<f64>> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || rows.iter().any(|row| row.len() != c) {
        return Err(Error::Config(format!(
            "`{field}` must be a non-empty rectangular matrix"
        )));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

impl ScenarioFile {
    pub fn resolve(&self, base: Option<&Path>) -> Result<Scenario> {
        let n = self.nodes;
        let m = self.dim;
        if n == 0 || m == 0 {
            return Err(Error::Config("`nodes` and `dim` must be positive".into()));
        }
        let mu = self.mu.expand(n, "mu")?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);

        let (profiles, drawn_topology) = match self.profile.as_deref() {
            Some("reference") => {
                if self.ru_diag.is_some() || self.ru_matrix.is_some() || self.noise_db.is_some() {
                    return Err(Error::Config(
                        "`profile = \"reference\"` draws ru and noise; remove ru_diag/ru_matrix/noise_db".into(),
                    ));
                }
                let p = self
                    .topology
                    .edge_probability
                    .unwrap_or(REFERENCE_EDGE_PROBABILITY);
                let setup = reference_setup(n, m, mu[0], p, &mut rng)?;
                let profiles = setup
                    .profiles
                    .iter()
                    .zip(&mu)
                    .map(|(p, &u)| p.with_step_size(u))
                    .collect();
                (profiles, Some(setup.topology))
            }
            Some(other) => return Err(Error::Config(format!("unknown profile `{other}`"))),
            None => (self.explicit_profiles(&mu)?, None),
        };

        let topology = match (&self.topology.file, &self.topology.edges, drawn_topology) {
            (Some(path), None, _) => {
                let path = match base {
                    Some(b) if path.is_relative() => b.join(path),
                    _ => path.clone(),
                };
                NetworkTopology::parse_edge_list(&std::fs::read_to_string(path)?)?
            }
            (None, Some(edges), _) => {
                let zero_based = edges
                    .iter()
                    .map(|&[i, j]| {
                        if i == 0 || j == 0 {
                            Err(Error::Config("edge indices are 1-based".into()))
                        } else {
                            Ok((i - 1, j - 1))
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                NetworkTopology::from_edges(n, &zero_based)?
            }
            (None, None, Some(t)) => t,
            (None, None, None) => match (self.topology.edge_probability, &self.combination) {
                (Some(p), _) => NetworkTopology::random_connected(n, p, &mut rng)?,
                (None, Some(rows)) => {
                    NetworkTopology::from_support(&matrix_from_rows(rows, "combination")?)?
                }
                (None, None) => {
                    return Err(Error::Config(
                        "no topology: give [topology] file, edges or edge_probability".into(),
                    ))
                }
            },
            (Some(_), Some(_), _) => {
                return Err(Error::Config(
                    "[topology] takes either `file` or `edges`, not both".into(),
                ))
            }
        };
        if topology.node_count() != n {
            return Err(Error::Config(format!(
                "topology has {} nodes but `nodes = {n}`",
                topology.node_count()
            )));
        }

        let (combination, rule) = match (&self.combination, &self.rule) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "give either `rule` or `combination`, not both".into(),
                ))
            }
            (Some(rows), None) => (
                CombinationMatrix::new(matrix_from_rows(rows, "combination")?, topology.clone())?,
                None,
            ),
            (None, rule) => {
                let rule: CombinationRule = rule.as_deref().unwrap_or("metropolis").parse()?;
                (
                    build_combination_matrix(&topology, rule, &profiles)?,
                    Some(rule),
                )
            }
        };

        let truth = match &self.w0 {
            Some(w) => GroundTruth::new(DVector::from_column_slice(w))?,
            None => GroundTruth::uniform(m),
        };
        if truth.dim() != m {
            return Err(Error::Config(format!(
                "`w0` has {} entries, `dim` is {m}",
                truth.dim()
            )));
        }

        let strategies = self
            .experiment
            .strategies
            .iter()
            .map(|s| {
                s.parse::<StrategyKind>()
                    .map_err(|e| Error::Config(e.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;

        let scenario = Scenario {
            seed: self.seed,
            profiles,
            topology,
            combination,
            rule,
            truth,
            strategies,
            iterations: self.experiment.iterations,
            trials: self.experiment.trials,
            window: self.experiment.window,
        };
        scenario.experiment().validate()?;
        Ok(scenario)
    }

    fn explicit_profiles(&self, mu: &[f64]) -> Result<Vec<NodeProfile>> {
        let n = self.nodes;
        let m = self.dim;
        let covs: Vec<DMatrix<f64>> = match (&self.ru_diag, &self.ru_matrix) {
            (Some(d), None) => d
                .expand(n, "ru_diag")?
                .iter()
                .map(|d| DMatrix::from_diagonal(&DVector::from_column_slice(d)))
                .collect(),
            (None, Some(r)) => r
                .expand(n, "ru_matrix")?
                .iter()
                .map(|rows| matrix_from_rows(rows, "ru_matrix"))
                .collect::<Result<_>>()?,
            (None, None) => return Err(Error::Config("missing `ru_diag` or `ru_matrix`".into())),
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "give either `ru_diag` or `ru_matrix`, not both".into(),
                ))
            }
        };
        if let Some((k, c)) = covs.iter().enumerate().find(|(_, c)| c.nrows() != m) {
            return Err(Error::Node {
                node: k + 1,
                reason: format!("covariance is {}x{}, `dim` is {m}", c.nrows(), c.ncols()),
            });
        }
        let noise = self
            .noise_db
            .as_ref()
            .ok_or_else(|| Error::Config("missing `noise_db`".into()))?
            .expand(n, "noise_db")?;
        build_profiles(
            mu.iter()
                .zip(covs)
                .zip(noise)
                .map(|((&u, r), db)| (u, r, 10f64.powf(db / 10.0))),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LINE3: &str = r#"
nodes = 3
dim = 2
seed = 5
mu = [0.1, 0.2, 0.1]
ru_diag = [1.0, 2.0]
noise_db = -20
rule = "uniform"
[topology]
edges = [[1, 2], [2, 3]]
[experiment]
strategies = ["atc", "consensus"]
iterations = 50
trials = 4
"#;

    #[test]
    fn explicit_scenario() {
        let s = Scenario::from_toml(LINE3, None).unwrap();
        assert_eq!(s.profiles.len(), 3);
        assert_eq!(s.profiles[1].step_size, 0.2);
        assert!((s.profiles[2].noise_variance - 0.01).abs() < 1e-15);
        assert_eq!(s.profiles[0].covariance[(1, 1)], 2.0);
        assert!(s.topology.is_neighbor(0, 1) && !s.topology.is_neighbor(0, 2));
        assert_eq!(s.rule, Some(CombinationRule::Uniform));
        assert!((s.combination.weight(1, 0) - 0.5).abs() < 1e-15);
        assert_eq!(
            s.strategies,
            vec![StrategyKind::AtcDiffusion, StrategyKind::Consensus]
        );
        assert_eq!((s.iterations, s.trials, s.window), (50, 4, 0.1));
        assert!((s.truth.w0[0] - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn reference_profile_is_seeded() {
        let text = "nodes = 6\ndim = 3\nseed = 9\nmu = 0.05\nprofile = \"reference\"\n[topology]\nedge_probability = 0.5\n";
        let a = Scenario::from_toml(text, None).unwrap();
        let b = Scenario::from_toml(text, None).unwrap();
        assert_eq!(a.topology.edges(), b.topology.edges());
        assert_eq!(a.profiles[3].covariance, b.profiles[3].covariance);
        assert!(a.topology.is_connected());
        assert!(a.profiles.iter().all(|p| p.step_size == 0.05));
    }

    #[test]
    fn explicit_combination_defines_support() {
        let text = r#"
nodes = 2
dim = 1
mu = 0.1
ru_matrix = [[1.0]]
noise_db = [-10, -20]
combination = [[0.85, 0.15], [0.15, 0.85]]
"#;
        let s = Scenario::from_toml(text, None).unwrap();
        assert_eq!(s.rule, None);
        assert_eq!(s.combination.weight(0, 1), 0.15);
    }

    #[test]
    fn rejects_bad_input() {
        let cases = [
            LINE3.replace("mu = [0.1, 0.2, 0.1]", "mu = [0.1, 0.2]"),
            LINE3.replace("[[1, 2], [2, 3]]", "[[0, 1]]"),
            LINE3.replace("\"uniform\"", "\"bogus\""),
            LINE3.replace("\"consensus\"", "\"gossip\""),
            LINE3.replace("ru_diag = [1.0, 2.0]", "ru_diag = [1.0, 2.0, 3.0]"),
            LINE3.replace("nodes = 3", "nodes = 3\nextra = 1"),
            LINE3.replace("trials = 4", "trials = 0"),
        ];
        for text in cases {
            let err = Scenario::from_toml(&text, None).unwrap_err();
            assert!(
                matches!(
                    err.class(),
                    "config" | "node" | "dimension" | "invalid-input"
                ),
                "{err}"
            );
        }
    }
}
