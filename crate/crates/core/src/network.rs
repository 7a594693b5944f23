//! Network topologies and left-stochastic combination matrices.
//!
//! Convention throughout the crate: entry `(l, k)` of a combination matrix is
//! the weight node `k` assigns to data arriving from node `l`, so every
//! column sums to one. Neighborhoods always contain the node itself.

use std::fmt::Write as _;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::NodeProfile;

/// Tolerance for the column-sum and sign checks on combination weights.
pub const STOCHASTIC_TOL: f64 = 1e-10;

/// Undirected connectivity graph with implicit self-loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkTopology {
    adjacency: Vec<Vec<bool>>,
    neighbors: Vec<Vec<usize>>,
}

impl NetworkTopology {
    /// Builds a topology from 0-based undirected edges. Self-loops are
    /// added for every node; duplicate edges are ignored.
    pub fn from_edges(node_count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::InvalidInput(
                "topology needs at least one node".into(),
            ));
        }
        let mut adjacency = vec![vec![false; node_count]; node_count];
        for (k, row) in adjacency.iter_mut().enumerate() {
            row[k] = true;
        }
        for &(i, j) in edges {
            if i >= node_count || j >= node_count {
                return Err(Error::InvalidInput(format!(
                    "edge ({}, {}) references a node outside 1..={node_count}",
                    i + 1,
                    j + 1
                )));
            }
            adjacency[i][j] = true;
            adjacency[j][i] = true;
        }
        Ok(Self::from_adjacency_unchecked(adjacency))
    }

    fn from_adjacency_unchecked(adjacency: Vec<Vec<bool>>) -> Self {
        let neighbors = (0..adjacency.len())
            .map(|k| (0..adjacency.len()).filter(|&l| adjacency[l][k]).collect())
            .collect();
        Self {
            adjacency,
            neighbors,
        }
    }

    pub fn complete(node_count: usize) -> Self {
        let adjacency = vec![vec![true; node_count]; node_count];
        Self::from_adjacency_unchecked(adjacency)
    }

    /// Path graph 1 – 2 – … – N.
    pub fn line(node_count: usize) -> Result<Self> {
        let edges: Vec<_> = (1..node_count).map(|k| (k - 1, k)).collect();
        Self::from_edges(node_count, &edges)
    }

    /// Erdős–Rényi draw with edge probability `p`, redrawn until connected.
    pub fn random_connected<R: Rng + ?Sized>(
        node_count: usize,
        p: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "edge probability {p} outside (0, 1]"
            )));
        }
        if node_count == 0 {
            return Err(Error::InvalidInput(
                "topology needs at least one node".into(),
            ));
        }
        loop {
            let mut edges = Vec::new();
            for i in 0..node_count {
                for j in (i + 1)..node_count {
                    if rng.random::<f64>() < p {
                        edges.push((i, j));
                    }
                }
            }
            let topo = Self::from_edges(node_count, &edges)?;
            if topo.is_connected() {
                return Ok(topo);
            }
        }
    }

    /// Symmetric closure of the support of `weights`, plus self-loops.
    pub fn from_support(weights: &DMatrix<f64>) -> Result<Self> {
        if !weights.is_square() {
            return Err(Error::Dimension(format!(
                "combination matrix is {}x{}",
                weights.nrows(),
                weights.ncols()
            )));
        }
        let n = weights.nrows();
        let mut edges = Vec::new();
        for l in 0..n {
            for k in 0..n {
                if l != k && weights[(l, k)] != 0.0 {
                    edges.push((l, k));
                }
            }
        }
        Self::from_edges(n, &edges)
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    /// `l ∈ N_k`.
    pub fn is_neighbor(&self, l: usize, k: usize) -> bool {
        self.adjacency[l][k]
    }

    /// Sorted neighborhood of `k`, including `k`.
    pub fn neighbors(&self, k: usize) -> &[usize] {
        &self.neighbors[k]
    }

    /// Neighborhood size `n_k = |N_k|` (counts the node itself).
    pub fn degree(&self, k: usize) -> usize {
        self.neighbors[k].len()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.node_count();
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if self.adjacency[i][j] {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(k) = stack.pop() {
            for &l in &self.neighbors[k] {
                if !seen[l] {
                    seen[l] = true;
                    stack.push(l);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Parses the plain-text edge-list format:
    ///
    /// ```text
    /// nodes 3
    /// 1 2
    /// 2 3
    /// ```
    ///
    /// Indices are 1-based. Blank lines and `#` comments are skipped.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .enumerate()
            .filter(|(_, l)| !l.is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::Config("empty topology file".into()))?;
        let mut parts = header.split_whitespace();
        let node_count = match (
            parts.next(),
            parts.next().map(usize::from_str),
            parts.next(),
        ) {
            (Some("nodes"), Some(Ok(n)), None) if n > 0 => n,
            _ => {
                return Err(Error::Config(format!(
                    "topology must start with `nodes N`, found `{header}`"
                )))
            }
        };
        let mut edges = Vec::new();
        for (lineno, line) in lines {
            let fields: Vec<_> = line.split_whitespace().collect();
            let parsed: Vec<std::result::Result<usize, _>> =
                fields.iter().map(|f| f.parse::<usize>()).collect();
            match parsed.as_slice() {
                [Ok(i), Ok(j)] if *i >= 1 && *j >= 1 => edges.push((i - 1, j - 1)),
                _ => {
                    return Err(Error::Config(format!(
                        "line {}: expected `i j` with 1-based node indices, found `{line}`",
                        lineno + 1
                    )))
                }
            }
        }
        Self::from_edges(node_count, &edges)
    }

    pub fn to_edge_list(&self) -> String {
        let mut s = format!("nodes {}\n", self.node_count());
        for (i, j) in self.edges() {
            let _ = writeln!(s, "{} {}", i + 1, j + 1);
        }
        s
    }
}

/// Named weighting policies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CombinationRule {
    /// `a_{l,k} ∝ 1/σ²_{v,l}` over `N_k`.
    RelativeVariance,
    /// `a_{l,k} = 1/n_k`.
    Uniform,
    /// `a_{l,k} = 1/max{n_k, n_l}` off the diagonal.
    Metropolis,
}

impl CombinationRule {
    pub const ALL: [CombinationRule; 3] = [
        CombinationRule::RelativeVariance,
        CombinationRule::Uniform,
        CombinationRule::Metropolis,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CombinationRule::RelativeVariance => "relative_variance",
            CombinationRule::Uniform => "uniform",
            CombinationRule::Metropolis => "metropolis",
        }
    }
}

impl FromStr for CombinationRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "relative_variance" => Ok(Self::RelativeVariance),
            "uniform" => Ok(Self::Uniform),
            "metropolis" => Ok(Self::Metropolis),
            other => Err(Error::Config(format!("unknown combination rule `{other}`"))),
        }
    }
}

/// Left-stochastic combination matrix tied to a topology.
#[derive(Debug, Clone)]
pub struct CombinationMatrix {
    weights: DMatrix<f64>,
    topology: NetworkTopology,
    /// Nonzero `(l, a_{l,k})` pairs per column `k`.
    incoming: Vec<Vec<(usize, f64)>>,
}

impl CombinationMatrix {
    /// Validates nonnegativity, unit column sums and the zero pattern.
    pub fn new(weights: DMatrix<f64>, topology: NetworkTopology) -> Result<Self> {
        let n = topology.node_count();
        if weights.shape() != (n, n) {
            return Err(Error::Dimension(format!(
                "combination matrix is {}x{} but the topology has {n} nodes",
                weights.nrows(),
                weights.ncols()
            )));
        }
        for k in 0..n {
            let mut sum = 0.0;
            for l in 0..n {
                let a = weights[(l, k)];
                if !a.is_finite() || a < -STOCHASTIC_TOL {
                    return Err(Error::Node {
                        node: k + 1,
                        reason: format!("weight a({},{}) = {a} is negative", l + 1, k + 1),
                    });
                }
                if a != 0.0 && !topology.is_neighbor(l, k) {
                    return Err(Error::Node {
                        node: k + 1,
                        reason: format!("weight a({},{}) = {a} on a missing link", l + 1, k + 1),
                    });
                }
                sum += a;
            }
            if (sum - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::Node {
                    node: k + 1,
                    reason: format!("column sums to {sum}, expected 1"),
                });
            }
        }
        let incoming = (0..n)
            .map(|k| {
                (0..n)
                    .filter(|&l| weights[(l, k)] != 0.0)
                    .map(|l| (l, weights[(l, k)]))
                    .collect()
            })
            .collect();
        Ok(Self {
            weights,
            topology,
            incoming,
        })
    }

    /// Takes the topology from the support of `weights`.
    pub fn from_weights(weights: DMatrix<f64>) -> Result<Self> {
        let topology = NetworkTopology::from_support(&weights)?;
        Self::new(weights, topology)
    }

    pub fn identity(node_count: usize) -> Self {
        let topology = NetworkTopology::from_edges(node_count, &[]).expect("nonempty");
        Self::new(DMatrix::identity(node_count, node_count), topology)
            .expect("identity is stochastic")
    }

    /// Two-node matrix with `Aᵀ = [[1-a, a], [b, 1-b]]`.
    pub fn two_node(a: f64, b: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
            return Err(Error::InvalidInput(format!(
                "a = {a}, b = {b} must lie in [0, 1]"
            )));
        }
        let at = DMatrix::from_row_slice(2, 2, &[1.0 - a, a, b, 1.0 - b]);
        Self::new(at.transpose(), NetworkTopology::complete(2))
    }

    pub fn node_count(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weight(&self, l: usize, k: usize) -> f64 {
        self.weights[(l, k)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn topology(&self) -> &NetworkTopology {
        &self.topology
    }

    /// Nonzero weights used by node `k`, as `(l, a_{l,k})`.
    pub fn incoming(&self, k: usize) -> &[(usize, f64)] {
        &self.incoming[k]
    }

    pub fn is_symmetric(&self) -> bool {
        crate::linalg::is_symmetric(&self.weights, 1e-12)
    }

    pub fn is_identity(&self) -> bool {
        let n = self.node_count();
        self.weights == DMatrix::identity(n, n)
    }

    /// CSV with a header row; row `l`, column `k` holds `a_{l,k}`.
    pub fn to_csv(&self) -> String {
        let n = self.node_count();
        let mut s = String::from("l");
        for k in 1..=n {
            let _ = write!(s, ",{k}");
        }
        s.push('\n');
        for l in 0..n {
            let _ = write!(s, "{}", l + 1);
            for k in 0..n {
                let _ = write!(s, ",{}", self.weights[(l, k)]);
            }
            s.push('\n');
        }
        s
    }
}

/// Builds `A` from one of the named rules.
pub fn build_combination_matrix(
    topology: &NetworkTopology,
    rule: CombinationRule,
    profiles: &[NodeProfile],
) -> Result<CombinationMatrix> {
    let n = topology.node_count();
    if profiles.len() != n {
        return Err(Error::Dimension(format!(
            "{} node profiles for a {n}-node topology",
            profiles.len()
        )));
    }
    let mut a = DMatrix::zeros(n, n);
    match rule {
        CombinationRule::RelativeVariance => {
            for (k, p) in profiles.iter().enumerate() {
                if !(p.noise_variance > 0.0) {
                    return Err(Error::Node {
                        node: k + 1,
                        reason: format!(
                            "relative-variance rule needs a positive noise variance, got {}",
                            p.noise_variance
                        ),
                    });
                }
            }
            for k in 0..n {
                let total: f64 = topology
                    .neighbors(k)
                    .iter()
                    .map(|&j| 1.0 / profiles[j].noise_variance)
                    .sum();
                for &l in topology.neighbors(k) {
                    a[(l, k)] = (1.0 / profiles[l].noise_variance) / total;
                }
            }
        }
        CombinationRule::Uniform => {
            for k in 0..n {
                let w = 1.0 / topology.degree(k) as f64;
                for &l in topology.neighbors(k) {
                    a[(l, k)] = w;
                }
            }
        }
        CombinationRule::Metropolis => {
            for k in 0..n {
                let mut off = 0.0;
                for &l in topology.neighbors(k) {
                    if l != k {
                        let w = 1.0 / topology.degree(k).max(topology.degree(l)) as f64;
                        a[(l, k)] = w;
                        off += w;
                    }
                }
                a[(k, k)] = 1.0 - off;
            }
        }
    }
    CombinationMatrix::new(a, topology.clone())
}

/// Converts raw consensus coefficients `b_{l,k}` and step-sizes into the
/// equivalent combination matrix (`a_{l,k} = μ_k b_{l,k}` off the diagonal,
/// `a_{k,k} = 1 − μ_k Σ_j b_{j,k}`). Diagonal entries of `b` are ignored.
pub fn consensus_weights_to_matrix(
    b: &DMatrix<f64>,
    step_sizes: &[f64],
) -> Result<CombinationMatrix> {
    let n = b.nrows();
    if !b.is_square() || step_sizes.len() != n {
        return Err(Error::Dimension(format!(
            "b is {}x{} with {} step-sizes",
            b.nrows(),
            b.ncols(),
            step_sizes.len()
        )));
    }
    let mut a = DMatrix::zeros(n, n);
    for k in 0..n {
        let mu = step_sizes[k];
        let mut off = 0.0;
        for l in 0..n {
            if l == k {
                continue;
            }
            if b[(l, k)] < 0.0 {
                return Err(Error::Node {
                    node: k + 1,
                    reason: format!("coefficient b({},{}) is negative", l + 1, k + 1),
                });
            }
            a[(l, k)] = mu * b[(l, k)];
            off += a[(l, k)];
        }
        if off > 1.0 + STOCHASTIC_TOL {
            return Err(Error::Node {
                node: k + 1,
                reason: format!(
                    "mu_k * sum_j b(j,k) = {off} exceeds 1, self-weight would be negative"
                ),
            });
        }
        a[(k, k)] = 1.0 - off;
    }
    let mut support = a.clone();
    for k in 0..n {
        support[(k, k)] = 1.0;
    }
    CombinationMatrix::new(a, NetworkTopology::from_support(&support)?)
}

/// Recovers `b_{l,k} = a_{l,k}/μ_k` off the diagonal (zero on it).
pub fn consensus_weights_from_matrix(a: &CombinationMatrix, step_sizes: &[f64]) -> DMatrix<f64> {
    let n = a.node_count();
    DMatrix::from_fn(n, n, |l, k| {
        if l == k || step_sizes[k] == 0.0 {
            0.0
        } else {
            a.weight(l, k) / step_sizes[k]
        }
    })
}

/// Whether some power of the nonnegative matrix is entrywise positive,
/// decided on the boolean support by repeated squaring up to the Wielandt
/// bound `(N−1)² + 1`.
pub fn support_is_primitive(m: &DMatrix<f64>) -> bool {
    let n = m.nrows();
    let mut p: Vec<Vec<bool>> = (0..n)
        .map(|i| (0..n).map(|j| m[(i, j)] > 0.0).collect())
        .collect();
    let bound = (n - 1) * (n - 1) + 1;
    let mut exponent = 1;
    while exponent < bound {
        let mut sq = vec![vec![false; n]; n];
        for i in 0..n {
            for k in 0..n {
                if p[i][k] {
                    for j in 0..n {
                        sq[i][j] |= p[k][j];
                    }
                }
            }
        }
        p = sq;
        exponent *= 2;
    }
    p.iter().all(|row| row.iter().all(|&x| x))
}

pub fn is_primitive(a: &CombinationMatrix) -> bool {
    support_is_primitive(a.matrix())
}

/// Perron eigenvectors of `Aᵀ` at eigenvalue one.
#[derive(Debug, Clone)]
pub struct PerronPair {
    /// Right eigenvector, `1/√N` in every entry.
    pub r1: DVector<f64>,
    /// Left eigenvector scaled so that `s1ᵀ r1 = 1`.
    pub s1: DVector<f64>,
}

impl PerronPair {
    /// `max |(Aᵀ)^j − r1 s1ᵀ|`.
    pub fn power_gap(&self, a: &CombinationMatrix, j: u32) -> f64 {
        let at = a.matrix().transpose();
        let n = at.nrows();
        let mut p = DMatrix::identity(n, n);
        for _ in 0..j {
            p = &at * p;
        }
        (p - &self.r1 * self.s1.transpose()).amax()
    }
}

const PERRON_TOL: f64 = 1e-12;
const PERRON_MAX_ITER: usize = 100_000;

/// Power iteration for the Perron pair of a primitive left-stochastic `A`.
pub fn perron_pair(a: &CombinationMatrix) -> Result<PerronPair> {
    if !is_primitive(a) {
        return Err(Error::Unsupported(
            "Perron vectors requested for a non-primitive combination matrix".into(),
        ));
    }
    let n = a.node_count();
    let m = a.matrix();
    // A x preserves the entry sum because A is left-stochastic.
    let mut x = DVector::from_element(n, 1.0 / n as f64);
    let mut converged = false;
    for _ in 0..PERRON_MAX_ITER {
        let next = m * &x;
        let delta = (&next - &x).amax();
        x = next;
        if delta < PERRON_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numerical(format!(
            "Perron power iteration did not converge in {PERRON_MAX_ITER} steps"
        )));
    }
    let root_n = (n as f64).sqrt();
    let s1 = &x * (root_n / x.sum());
    let r1 = DVector::from_element(n, 1.0 / root_n);
    Ok(PerronPair { r1, s1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::NodeProfile;

    fn profiles_with_noise(noise: &[f64]) -> Vec<NodeProfile> {
        noise
            .iter()
            .map(|&s| NodeProfile::new(0.1, DMatrix::identity(1, 1), s).unwrap())
            .collect()
    }

    #[test]
    fn uniform_two_node_is_half() {
        let topo = NetworkTopology::complete(2);
        let a = build_combination_matrix(
            &topo,
            CombinationRule::Uniform,
            &profiles_with_noise(&[1.0, 1.0]),
        )
        .unwrap();
        assert!(a.matrix().iter().all(|&x| x == 0.5));
    }

    #[test]
    fn relative_variance_two_node() {
        let topo = NetworkTopology::complete(2);
        let a = build_combination_matrix(
            &topo,
            CombinationRule::RelativeVariance,
            &profiles_with_noise(&[1.0, 4.0]),
        )
        .unwrap();
        for k in 0..2 {
            assert!((a.weight(0, k) - 0.8).abs() < 1e-15);
            assert!((a.weight(1, k) - 0.2).abs() < 1e-15);
        }
    }

    #[test]
    fn relative_variance_rejects_zero_noise() {
        let topo = NetworkTopology::complete(2);
        let err = build_combination_matrix(
            &topo,
            CombinationRule::RelativeVariance,
            &profiles_with_noise(&[1.0, 0.0]),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Node { node: 2, .. }));
    }

    #[test]
    fn metropolis_line_graph() {
        // n_k counts the node itself: n = (2, 3, 2).
        let topo = NetworkTopology::line(3).unwrap();
        let a = build_combination_matrix(
            &topo,
            CombinationRule::Metropolis,
            &profiles_with_noise(&[1.0; 3]),
        )
        .unwrap();
        let third = 1.0 / 3.0;
        assert!((a.weight(0, 1) - third).abs() < 1e-15);
        assert!((a.weight(2, 1) - third).abs() < 1e-15);
        assert!((a.weight(1, 1) - third).abs() < 1e-15);
        assert!((a.weight(1, 0) - third).abs() < 1e-15);
        assert!((a.weight(0, 0) - 2.0 * third).abs() < 1e-15);
        assert_eq!(a.weight(2, 0), 0.0);
        assert!(a.is_symmetric());
    }

    #[test]
    fn consensus_weights_zero_gives_identity() {
        let a = consensus_weights_to_matrix(&DMatrix::zeros(3, 3), &[0.1, 0.2, 0.3]).unwrap();
        assert!(a.is_identity());
    }

    #[test]
    fn consensus_weights_two_node() {
        let b = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let a = consensus_weights_to_matrix(&b, &[0.3, 0.3]).unwrap();
        let expected = CombinationMatrix::two_node(0.3, 0.3).unwrap();
        assert!((a.matrix() - expected.matrix()).amax() < 1e-15);
    }

    #[test]
    fn consensus_weights_reports_bad_column() {
        let b = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 1.0, 0.0, 0.0, 1.2, 0.0, 0.0, 0.0]);
        // column 3 sums b to 2.2, so mu_3 * 2.2 = 1.2
        let mu = 1.2 / 2.2;
        let err = consensus_weights_to_matrix(&b, &[0.5, 0.5, mu]).unwrap_err();
        match err {
            Error::Node { node, .. } => assert_eq!(node, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn primitivity() {
        assert!(!is_primitive(&CombinationMatrix::identity(3)));
        assert!(is_primitive(
            &CombinationMatrix::two_node(0.2, 0.4).unwrap()
        ));
        assert!(!is_primitive(
            &CombinationMatrix::two_node(1.0, 1.0).unwrap()
        ));
        // a = 1, b < 1 still mixes
        assert!(is_primitive(
            &CombinationMatrix::two_node(1.0, 0.5).unwrap()
        ));
    }

    #[test]
    fn perron_two_node_closed_form() {
        let (a, b) = (0.2, 0.4);
        let m = CombinationMatrix::two_node(a, b).unwrap();
        let p = perron_pair(&m).unwrap();
        let r2 = 2f64.sqrt();
        assert!((p.s1[0] - r2 * b / (a + b)).abs() < 1e-10);
        assert!((p.s1[1] - r2 * a / (a + b)).abs() < 1e-10);
        assert!((p.s1[0] - 0.9428090415820634).abs() < 1e-10);
        assert!((p.s1[1] - 0.4714045207910317).abs() < 1e-10);
        assert!((p.s1.dot(&p.r1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn perron_doubly_stochastic() {
        let topo = NetworkTopology::line(4).unwrap();
        let a = build_combination_matrix(
            &topo,
            CombinationRule::Metropolis,
            &profiles_with_noise(&[1.0; 4]),
        )
        .unwrap();
        let p = perron_pair(&a).unwrap();
        for i in 0..4 {
            assert!((p.s1[i] - 0.5).abs() < 1e-10);
            assert!((p.r1[i] - 0.5).abs() < 1e-15);
        }
        assert!(p.power_gap(&a, 200) < 1e-10);
    }

    #[test]
    fn perron_rejects_swap() {
        let swap = CombinationMatrix::two_node(1.0, 1.0).unwrap();
        assert!(matches!(perron_pair(&swap), Err(Error::Unsupported(_))));
    }

    #[test]
    fn edge_list_roundtrip_and_errors() {
        let topo =
            NetworkTopology::parse_edge_list("# ring\nnodes 4\n1 2\n2 3\n3 4\n4 1\n").unwrap();
        assert_eq!(topo.node_count(), 4);
        assert_eq!(topo.degree(0), 3);
        let again = NetworkTopology::parse_edge_list(&topo.to_edge_list()).unwrap();
        assert_eq!(again, topo);
        assert!(NetworkTopology::parse_edge_list("1 2\n").is_err());
        assert!(NetworkTopology::parse_edge_list("nodes 2\n1 3\n").is_err());
        assert!(NetworkTopology::parse_edge_list("nodes 2\n0 1\n").is_err());
    }

    #[test]
    fn rejects_off_topology_weight() {
        let topo = NetworkTopology::line(3).unwrap();
        let mut w = DMatrix::identity(3, 3);
        w[(0, 2)] = 0.5;
        w[(2, 2)] = 0.5;
        assert!(CombinationMatrix::new(w, topo).is_err());
    }

    #[test]
    fn csv_layout() {
        let a = CombinationMatrix::two_node(0.2, 0.4).unwrap();
        let csv = a.to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "l,1,2");
        // a_{1,2} = b (weight node 2 gives node 1)
        assert_eq!(lines[1], "1,0.8,0.4");
    }
}
