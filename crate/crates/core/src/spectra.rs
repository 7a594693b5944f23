//! Mean error recursions `w̃_i = B w̃_{i-1} + noise` for each strategy, their
//! spectral radii, and the closed-form step-size bounds for mean stability.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{block_diag, eigenvalues, kron, symmetric_eigenvalues_desc};
use crate::network::CombinationMatrix;
use crate::signal::{check_dims, homogeneous_parts, NodeProfile};
use crate::strategy::StrategyKind;

pub use crate::linalg::spectral_radius;

/// Coefficient matrix `B` and driving-noise covariance `Y` of the stacked
/// weight-error recursion, both `NM × NM`.
#[derive(Debug, Clone)]
pub struct ErrorRecursion {
    pub b: DMatrix<f64>,
    pub y: DMatrix<f64>,
    pub strategy: StrategyKind,
    pub node_count: usize,
    pub dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityVerdict {
    pub spectral_radius: f64,
    pub stable: bool,
    pub margin: f64,
}

impl StabilityVerdict {
    pub fn from_radius(rho: f64) -> Self {
        Self {
            spectral_radius: rho,
            stable: rho < 1.0,
            margin: 1.0 - rho,
        }
    }
}

impl ErrorRecursion {
    pub fn verdict(&self) -> Result<StabilityVerdict> {
        Ok(StabilityVerdict::from_radius(spectral_radius(&self.b)?))
    }
}

/// Builds `(B, Y)` with `𝒜 = A ⊗ I_M`, `ℳ = diag{μ_k I}`, `ℛ = diag{R_{u,k}}`
/// and `𝒮 = diag{σ²_{v,k} R_{u,k}}`.
pub fn build_error_recursion(
    strategy: StrategyKind,
    a: &CombinationMatrix,
    profiles: &[NodeProfile],
) -> Result<ErrorRecursion> {
    let m = check_dims(profiles)?;
    let n = profiles.len();
    if a.node_count() != n {
        return Err(Error::Dimension(format!(
            "combination matrix has {} nodes but {n} profiles were given",
            a.node_count()
        )));
    }
    let nm = n * m;
    let eye = DMatrix::<f64>::identity(nm, nm);
    let at = kron(&a.matrix().transpose(), &DMatrix::identity(m, m));
    let mr = block_diag(
        &profiles
            .iter()
            .map(|p| &p.covariance * p.step_size)
            .collect::<Vec<_>>(),
    );
    let msm = block_diag(
        &profiles
            .iter()
            .map(|p| &p.covariance * (p.step_size * p.step_size * p.noise_variance))
            .collect::<Vec<_>>(),
    );
    let (b, y) = match strategy {
        StrategyKind::NonCooperative => (eye - mr, msm),
        StrategyKind::Consensus => (&at - mr, msm),
        StrategyKind::CtaDiffusion => ((eye - mr) * &at, msm),
        StrategyKind::AtcDiffusion => {
            let y = &at * msm * at.transpose();
            (&at * (eye - mr), symmetrize(y))
        }
    };
    Ok(ErrorRecursion {
        b,
        y,
        strategy,
        node_count: n,
        dim: m,
    })
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// Per-node upper limits `2/λ_max(R_{u,k})`; node `k` alone is mean-stable
/// iff `0 < μ_k` is strictly below its limit.
pub fn noncoop_step_bounds(profiles: &[NodeProfile]) -> Vec<f64> {
    profiles
        .iter()
        .map(|p| 2.0 / symmetric_eigenvalues_desc(&p.covariance)[0])
        .collect()
}

/// Per-node upper limits `(1 + λ_min(A))/λ_max(R_{u,k})` for consensus with
/// a symmetric combination matrix. A limit of `0` means the interval is empty.
pub fn consensus_symmetric_bound(
    a: &CombinationMatrix,
    profiles: &[NodeProfile],
) -> Result<Vec<f64>> {
    if !a.is_symmetric() {
        return Err(Error::Unsupported(
            "the consensus step-size bound requires a symmetric combination matrix".into(),
        ));
    }
    let lmin = *symmetric_eigenvalues_desc(a.matrix())
        .last()
        .expect("nonempty");
    let num = (1.0 + lmin).max(0.0);
    let num = if num < 1e-12 { 0.0 } else { num };
    Ok(profiles
        .iter()
        .map(|p| num / symmetric_eigenvalues_desc(&p.covariance)[0])
        .collect())
}

/// Step-size at or below which consensus and diffusion share the same
/// spectral radius for homogeneous agents:
/// `min_{l≥2} (1 − |λ_l(A)|) / (λ_min(R_u) + λ_max(R_u))`.
///
/// Returns `+∞` for `A = I`, where the two radii coincide for every `μ`.
pub fn diffusion_equality_bound(a: &CombinationMatrix, ru: &DMatrix<f64>) -> Result<f64> {
    if a.is_identity() || a.node_count() == 1 {
        return Ok(f64::INFINITY);
    }
    let mut eig = eigenvalues(a.matrix())?;
    let one = eig
        .iter()
        .enumerate()
        .min_by(|x, y| (x.1 - 1.0).norm().total_cmp(&(y.1 - 1.0).norm()))
        .map(|(i, _)| i)
        .expect("nonempty");
    eig.remove(one);
    let r = symmetric_eigenvalues_desc(ru);
    let denom = r[0] + r[r.len() - 1];
    let worst = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let num = (1.0 - worst).max(0.0);
    Ok(if num < 1e-12 { 0.0 } else { num / denom })
}

/// `max_k Σ_l σ_max(X_{k,l})` over the `M × M` blocks of an `NM × NM` matrix.
pub fn block_norm(x: &DMatrix<f64>, n: usize, m: usize) -> f64 {
    assert_eq!(x.shape(), (n * m, n * m), "block_norm dimensions");
    (0..n)
        .map(|k| {
            (0..n)
                .map(|l| {
                    let block = x.view((k * m, l * m), (m, m)).clone_owned();
                    block.singular_values().max()
                })
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

/// Eigenvalues of a matrix sorted by decreasing real part.
pub fn sorted_real_parts(mat: &DMatrix<f64>) -> Result<Vec<f64>> {
    let mut v: Vec<f64> = eigenvalues(mat)?.iter().map(|z| z.re).collect();
    v.sort_by(|x, y| y.total_cmp(x));
    Ok(v)
}

/// Full mean-stability picture for one network.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub verdicts: Vec<(StrategyKind, StabilityVerdict)>,
    pub noncoop_bounds: Vec<f64>,
    /// `None` when `A` is not symmetric.
    pub consensus_bounds: Option<Vec<f64>>,
    /// `None` when the agents are not homogeneous.
    pub diffusion_equality_bound: Option<f64>,
}

pub fn analyze(a: &CombinationMatrix, profiles: &[NodeProfile]) -> Result<StabilityReport> {
    let verdicts = StrategyKind::ALL
        .iter()
        .map(|&s| Ok((s, build_error_recursion(s, a, profiles)?.verdict()?)))
        .collect::<Result<Vec<_>>>()?;
    let consensus_bounds = match consensus_symmetric_bound(a, profiles) {
        Ok(b) => Some(b),
        Err(Error::Unsupported(_)) => None,
        Err(e) => return Err(e),
    };
    let diffusion_equality_bound = match homogeneous_parts(profiles) {
        Some((_, ru)) => Some(diffusion_equality_bound(a, ru)?),
        None => None,
    };
    Ok(StabilityReport {
        verdicts,
        noncoop_bounds: noncoop_step_bounds(profiles),
        consensus_bounds,
        diffusion_equality_bound,
    })
}
