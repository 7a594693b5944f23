//! Streaming data from the linear regression model `d_k(i) = u_{k,i} w° + v_k(i)`.
//!
//! Every draw is addressed by an explicit `(trial, time, node)` position
//! under a master seed, so a snapshot is a pure function of its position and
//! trials can be generated in any order or concurrently.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::network::NetworkTopology;

/// Statistical profile of one node.
#[derive(Debug, Clone)]
pub struct NodeProfile {
    pub step_size: f64,
    pub covariance: DMatrix<f64>,
    pub noise_variance: f64,
    /// Symmetric square root of `covariance`.
    sqrt_covariance: DMatrix<f64>,
}

impl NodeProfile {
    /// `noise_variance = 0` and `step_size = 0` are accepted (degenerate
    /// cases used by tests); the covariance must be symmetric positive-definite.
    pub fn new(step_size: f64, covariance: DMatrix<f64>, noise_variance: f64) -> Result<Self> {
        if !(step_size >= 0.0) || !step_size.is_finite() {
            return Err(Error::InvalidInput(format!(
                "step-size {step_size} must be nonnegative"
            )));
        }
        if !(noise_variance >= 0.0) || !noise_variance.is_finite() {
            return Err(Error::InvalidInput(format!(
                "noise variance {noise_variance} must be nonnegative"
            )));
        }
        if !covariance.is_square() || covariance.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "covariance is {}x{}",
                covariance.nrows(),
                covariance.ncols()
            )));
        }
        if !crate::linalg::is_symmetric(&covariance, 1e-12) {
            return Err(Error::InvalidInput("covariance is not symmetric".into()));
        }
        let sqrt_covariance = crate::linalg::sym_sqrt(&covariance).map_err(|min| {
            Error::InvalidInput(format!(
                "covariance is not positive-definite (smallest eigenvalue {min:.3e})"
            ))
        })?;
        Ok(Self {
            step_size,
            covariance,
            noise_variance,
            sqrt_covariance,
        })
    }

    pub fn diagonal(step_size: f64, diag: &[f64], noise_variance: f64) -> Result<Self> {
        Self::new(
            step_size,
            DMatrix::from_diagonal(&DVector::from_column_slice(diag)),
            noise_variance,
        )
    }

    pub fn dim(&self) -> usize {
        self.covariance.nrows()
    }

    pub fn with_step_size(&self, step_size: f64) -> Self {
        Self {
            step_size,
            ..self.clone()
        }
    }

    pub fn sqrt_covariance(&self) -> &DMatrix<f64> {
        &self.sqrt_covariance
    }
}

/// Wraps per-node construction failures with the 1-based node index.
pub fn build_profiles<I>(parts: I) -> Result<Vec<NodeProfile>>
where
    I: IntoIterator<Item = (f64, DMatrix<f64>, f64)>,
{
    let profiles = parts
        .into_iter()
        .enumerate()
        .map(|(k, (mu, r, s))| {
            NodeProfile::new(mu, r, s).map_err(|e| Error::Node {
                node: k + 1,
                reason: e.to_string(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    check_dims(&profiles)?;
    Ok(profiles)
}

/// Common `(μ, R_u)` when every node shares the same step-size and
/// regressor covariance (entrywise within `1e-12` relative).
pub fn homogeneous_parts(profiles: &[NodeProfile]) -> Option<(f64, &DMatrix<f64>)> {
    let first = profiles.first()?;
    let scale = first.covariance.amax().max(1.0);
    let same = profiles.iter().all(|p| {
        p.dim() == first.dim()
            && (p.step_size - first.step_size).abs() <= 1e-12 * first.step_size.abs().max(1e-300)
            && (&p.covariance - &first.covariance).amax() <= 1e-12 * scale
    });
    same.then_some((first.step_size, &first.covariance))
}

pub(crate) fn check_dims(profiles: &[NodeProfile]) -> Result<usize> {
    let first = profiles
        .first()
        .ok_or_else(|| Error::InvalidInput("no node profiles".into()))?;
    let m = first.dim();
    for (k, p) in profiles.iter().enumerate() {
        if p.dim() != m {
            return Err(Error::Node {
                node: k + 1,
                reason: format!("regressor dimension {} differs from {m}", p.dim()),
            });
        }
    }
    Ok(m)
}

/// The unknown vector `w°`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub w0: DVector<f64>,
}

impl GroundTruth {
    pub fn new(w0: DVector<f64>) -> Result<Self> {
        if w0.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("w0 has non-finite entries".into()));
        }
        Ok(Self { w0 })
    }

    /// Every entry `1/√M`, so `‖w°‖ = 1`.
    pub fn uniform(dim: usize) -> Self {
        Self {
            w0: DVector::from_element(dim, 1.0 / (dim as f64).sqrt()),
        }
    }

    pub fn dim(&self) -> usize {
        self.w0.len()
    }
}

/// Data observed by every node at one time instant.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSnapshot {
    dim: usize,
    /// `u_{k,i}` rows, node-major.
    regressors: Vec<f64>,
    pub desired: Vec<f64>,
    pub noise: Vec<f64>,
}

impl DataSnapshot {
    pub fn zeros(node_count: usize, dim: usize) -> Self {
        Self {
            dim,
            regressors: vec![0.0; node_count * dim],
            desired: vec![0.0; node_count],
            noise: vec![0.0; node_count],
        }
    }

    /// Assembles a snapshot from explicit regressors and measurements.
    pub fn from_parts(regressors: Vec<Vec<f64>>, desired: Vec<f64>) -> Result<Self> {
        let n = regressors.len();
        if n == 0 || desired.len() != n {
            return Err(Error::Dimension(format!(
                "{n} regressors and {} measurements",
                desired.len()
            )));
        }
        let dim = regressors[0].len();
        if regressors.iter().any(|r| r.len() != dim) {
            return Err(Error::Dimension("ragged regressors".into()));
        }
        Ok(Self {
            dim,
            regressors: regressors.concat(),
            desired,
            noise: vec![0.0; n],
        })
    }

    pub fn node_count(&self) -> usize {
        self.desired.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn regressor(&self, k: usize) -> &[f64] {
        &self.regressors[k * self.dim..(k + 1) * self.dim]
    }

    /// All regressors, node-major (`N·M` entries).
    pub fn regressors_flat(&self) -> &[f64] {
        &self.regressors
    }

    pub fn regressor_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.regressors[k * self.dim..(k + 1) * self.dim]
    }
}

/// Position of a draw in the counter-based stream family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub trial: u64,
    pub time: u64,
    pub node: u64,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl StreamKey {
    /// Independent generator for this position under `seed`.
    pub fn rng(&self, seed: u64) -> ChaCha8Rng {
        let mut state = seed;
        for word in [self.trial, self.time, self.node] {
            state = splitmix64(&mut state) ^ word;
        }
        let mut bytes = [0u8; 32];
        for chunk in bytes.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        ChaCha8Rng::from_seed(bytes)
    }
}

/// Draws `{d_k(i), u_{k,i}, v_k(i)}` for every node at `(trial, time)` into `out`.
pub fn fill_snapshot(
    out: &mut DataSnapshot,
    profiles: &[NodeProfile],
    truth: &GroundTruth,
    seed: u64,
    trial: u64,
    time: u64,
) {
    let m = truth.dim();
    let mut z = vec![0.0; m];
    for (k, p) in profiles.iter().enumerate() {
        let mut rng = StreamKey {
            trial,
            time,
            node: k as u64,
        }
        .rng(seed);
        for zj in z.iter_mut() {
            *zj = StandardNormal.sample(&mut rng);
        }
        let l = p.sqrt_covariance();
        let u = out.regressor_mut(k);
        for (row, ur) in u.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (col, zj) in z.iter().enumerate() {
                acc += l[(row, col)] * zj;
            }
            *ur = acc;
        }
        let v = if p.noise_variance > 0.0 {
            let n: f64 = StandardNormal.sample(&mut rng);
            p.noise_variance.sqrt() * n
        } else {
            0.0
        };
        let clean: f64 = u.iter().zip(truth.w0.iter()).map(|(a, b)| a * b).sum();
        out.noise[k] = v;
        out.desired[k] = clean + v;
    }
}

/// Allocating form of [`fill_snapshot`].
pub fn generate_snapshot(
    profiles: &[NodeProfile],
    truth: &GroundTruth,
    seed: u64,
    trial: u64,
    time: u64,
) -> Result<DataSnapshot> {
    let m = check_dims(profiles)?;
    if m != truth.dim() {
        return Err(Error::Dimension(format!(
            "profiles have dimension {m} but w0 has {}",
            truth.dim()
        )));
    }
    let mut out = DataSnapshot::zeros(profiles.len(), m);
    fill_snapshot(&mut out, profiles, truth, seed, trial, time);
    Ok(out)
}

/// Randomized setup of the reference experiment: diagonal `R_{u,k}` with
/// entries uniform in `[2, 4]`, noise powers uniform in `[-30, -10]` dB,
/// `w°` with entries `1/√M`, and a connected random topology.
#[derive(Debug, Clone)]
pub struct ReferenceSetup {
    pub topology: NetworkTopology,
    pub profiles: Vec<NodeProfile>,
    pub truth: GroundTruth,
}

pub const REFERENCE_NODES: usize = 20;
pub const REFERENCE_DIM: usize = 10;
pub const REFERENCE_EDGE_PROBABILITY: f64 = 0.2;

pub fn reference_setup<R: Rng + ?Sized>(
    node_count: usize,
    dim: usize,
    step_size: f64,
    edge_probability: f64,
    rng: &mut R,
) -> Result<ReferenceSetup> {
    let topology = NetworkTopology::random_connected(node_count, edge_probability, rng)?;
    let mut profiles = Vec::with_capacity(node_count);
    for _ in 0..node_count {
        let diag: Vec<f64> = (0..dim).map(|_| rng.random_range(2.0..=4.0)).collect();
        let noise_db: f64 = rng.random_range(-30.0..=-10.0);
        profiles.push(NodeProfile::diagonal(
            step_size,
            &diag,
            10f64.powf(noise_db / 10.0),
        )?);
    }
    Ok(ReferenceSetup {
        topology,
        profiles,
        truth: GroundTruth::uniform(dim),
    })
}
