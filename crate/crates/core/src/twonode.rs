//! Closed forms for two nodes estimating a scalar, with
//! `Aᵀ = [[1−a, a], [b, 1−b]]` and per-node products `x_k = μ_k σ²_{u,k}`.

use std::fmt;
use std::ops::Range;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::msd::{certify_mu0, eigenstructure};
use crate::network::CombinationMatrix;

/// Tolerance for classifying a point as lying on a region boundary.
pub const BOUNDARY_TOL: f64 = 1e-12;
pub const DEFAULT_GRID: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoNodeConfig {
    pub a: f64,
    pub b: f64,
    pub mu_sigma1: f64,
    pub mu_sigma2: f64,
    /// Noise variance ratio `σ²_{v,1}/σ²_{v,2}`.
    pub t: f64,
}

impl TwoNodeConfig {
    pub fn new(a: f64, b: f64, mu_sigma1: f64, mu_sigma2: f64, t: f64) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidInput(format!(
                    "{name} = {v} is outside [0, 1]"
                )));
            }
        }
        for (name, v) in [("mu_sigma1", mu_sigma1), ("mu_sigma2", mu_sigma2), ("t", t)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "{name} = {v} must be positive"
                )));
            }
        }
        Ok(Self {
            a,
            b,
            mu_sigma1,
            mu_sigma2,
            t,
        })
    }

    pub fn combination(&self) -> CombinationMatrix {
        CombinationMatrix::two_node(self.a, self.b).expect("validated parameters")
    }

    /// Relabels the nodes so that `mu_sigma1 ≤ mu_sigma2`; the flag reports
    /// whether a swap happened.
    pub fn ordered(&self) -> (Self, bool) {
        if self.mu_sigma1 <= self.mu_sigma2 {
            (*self, false)
        } else {
            (
                Self {
                    a: self.b,
                    b: self.a,
                    mu_sigma1: self.mu_sigma2,
                    mu_sigma2: self.mu_sigma1,
                    t: 1.0 / self.t,
                },
                true,
            )
        }
    }

    /// The consensus mean matrix `[[1−a−x₁, a], [b, 1−b−x₂]]`.
    pub fn consensus_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(
            2,
            2,
            &[
                1.0 - self.a - self.mu_sigma1,
                self.a,
                self.b,
                1.0 - self.b - self.mu_sigma2,
            ],
        )
    }

    /// The ATC mean matrix `Aᵀ diag(1−x₁, 1−x₂)`.
    pub fn atc_matrix(&self) -> DMatrix<f64> {
        let (p, q) = (1.0 - self.mu_sigma1, 1.0 - self.mu_sigma2);
        DMatrix::from_row_slice(
            2,
            2,
            &[
                p * (1.0 - self.a),
                q * self.a,
                p * self.b,
                q * (1.0 - self.b),
            ],
        )
    }
}

/// Both algebraic forms of the discriminant of the consensus matrix, for
/// node-ordered parameters.
pub fn discriminant(cfg: &TwoNodeConfig) -> (f64, f64) {
    let (c, _) = cfg.ordered();
    let (a, b, x1, x2) = (c.a, c.b, c.mu_sigma1, c.mu_sigma2);
    let d1 = (-a + b - x1 + x2).powi(2) + 4.0 * a * b;
    let d2 = (a + b + x1 - x2).powi(2) + 4.0 * b * (x2 - x1);
    (d1, d2)
}

/// Smallest (real) eigenvalue of the consensus mean matrix.
pub fn consensus_min_eigenvalue(cfg: &TwoNodeConfig) -> f64 {
    let (c, _) = cfg.ordered();
    let (d, _) = discriminant(&c);
    debug_assert!(d >= 0.0);
    ((2.0 - c.a - c.b - c.mu_sigma1 - c.mu_sigma2) - d.max(0.0).sqrt()) / 2.0
}

/// `a + b ≥ 2 − x₁` (with `x₁ ≤ x₂`): consensus is unstable although both
/// nodes are stable on their own. Sufficient only; the exact test is
/// [`consensus_min_eigenvalue`] `≤ −1`.
pub fn consensus_instability_condition(cfg: &TwoNodeConfig) -> Result<bool> {
    let (c, _) = cfg.ordered();
    if !(c.mu_sigma2 < 2.0) {
        return Err(Error::InvalidInput(format!(
            "node stability requires mu_sigma < 2 at both nodes (got {} and {})",
            cfg.mu_sigma1, cfg.mu_sigma2
        )));
    }
    Ok(c.a + c.b >= 2.0 - c.mu_sigma1)
}

/// With `b = 1 − a`, the values of `a` for which ATC is mean-stable when
/// node 1 is stable and node 2 is not: `[0, (2 − x₁)/(x₂ − x₁))`.
pub fn diffusion_stabilization_range(mu_sigma1: f64, mu_sigma2: f64) -> Result<Range<f64>> {
    if !(mu_sigma1 > 0.0 && mu_sigma1 < 2.0 && 2.0 <= mu_sigma2) {
        return Err(Error::InvalidInput(format!(
            "expected 0 < mu_sigma1 < 2 <= mu_sigma2, got {mu_sigma1} and {mu_sigma2}"
        )));
    }
    Ok(0.0..(2.0 - mu_sigma1) / (mu_sigma2 - mu_sigma1))
}

/// Eigenvalues of the ATC mean matrix when `b = 1 − a`: `{0, 1 − x₁ − (x₂ − x₁)a}`.
pub fn atc_eigenvalues_complementary(mu_sigma1: f64, mu_sigma2: f64, a: f64) -> [f64; 2] {
    [0.0, 1.0 - mu_sigma1 - (mu_sigma2 - mu_sigma1) * a]
}

/// Thresholds on `a + b` for homogeneous `x = μσ²_u`:
/// `(2(1−x)/(2−x), 2(1−x), 2−x)`. Below the first consensus beats CTA;
/// above the second consensus is worse than non-cooperation; at or above
/// the third consensus is unstable.
pub fn msd_thresholds(x: f64) -> (f64, f64, f64) {
    (2.0 * (1.0 - x) / (2.0 - x), 2.0 * (1.0 - x), 2.0 - x)
}

/// Network-MSD regions of the `(a, b)` square for homogeneous nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MsdRegion {
    /// `cons ≥ ncop` (upper region; contains the consensus-unstable band).
    I,
    /// `cta ≤ cons ≤ ncop`.
    II,
    /// `cons ≤ cta` and `cons ≤ ncop`.
    III,
    /// Within [`BOUNDARY_TOL`] of a threshold, where both neighboring
    /// relations hold with equality.
    Boundary,
}

impl fmt::Display for MsdRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MsdRegion::I => "I",
            MsdRegion::II => "II",
            MsdRegion::III => "III",
            MsdRegion::Boundary => "boundary",
        })
    }
}

/// Regions compare the diagonal eigen-form of the network MSD (every
/// strategy expanded on the eigenvectors of `A`). It is exact for `a = b`;
/// for `a ≠ b` the exact network MSD can sit on the other side of a
/// threshold.
pub fn msd_region_classify(a: f64, b: f64, x: f64) -> Result<MsdRegion> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::InvalidInput(format!(
            "homogeneous mu_sigma = {x} must lie in (0, 1)"
        )));
    }
    let (t1, t2, stab) = msd_thresholds(x);
    let s = a + b;
    if s >= stab {
        return Err(Error::Unstable {
            rho: 1.0 - s - x,
            detail: format!("consensus is unstable since a + b = {s} >= 2 - mu_sigma = {stab}"),
        });
    }
    Ok(
        if (s - t1).abs() <= BOUNDARY_TOL || (s - t2).abs() <= BOUNDARY_TOL {
            MsdRegion::Boundary
        } else if s < t1 {
            MsdRegion::III
        } else if s < t2 {
            MsdRegion::II
        } else {
            MsdRegion::I
        },
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct IndividualConditions {
    /// `(Σ_v − AᵀΣ_vA)/σ²_{v,2}` in closed form.
    pub matrix: [[f64; 2]; 2],
    pub det: f64,
    /// `−(a − tb)²`.
    pub det_closed_form: f64,
    /// Eigenvalues of `matrix`, increasing.
    pub eigenvalues: [f64; 2],
    /// `a = tb` within [`BOUNDARY_TOL`].
    pub on_line: bool,
    /// The noise-contraction condition from the closed form: `a = tb` and
    /// `b ≤ min{1, 1/t}`.
    pub noise_contraction: bool,
    /// `(t−1)a + 2bt > 0` and `2a + (1−t)b > 0`, each by more than
    /// [`BOUNDARY_TOL`].
    pub perron_condition: bool,
}

pub fn individual_msd_conditions(cfg: &TwoNodeConfig) -> IndividualConditions {
    let (a, b, t) = (cfg.a, cfg.b, cfg.t);
    let off = -(1.0 - a) * b * t - a * (1.0 - b);
    let matrix = [
        [2.0 * a * t - a * a * (1.0 + t), off],
        [off, 2.0 * b - b * b * (1.0 + t)],
    ];
    let det = matrix[0][0] * matrix[1][1] - off * off;
    let tr = matrix[0][0] + matrix[1][1];
    let disc = ((matrix[0][0] - matrix[1][1]).powi(2) + 4.0 * off * off).sqrt();
    let on_line = (a - t * b).abs() <= BOUNDARY_TOL;
    IndividualConditions {
        matrix,
        det,
        det_closed_form: -(a - t * b).powi(2),
        eigenvalues: [(tr - disc) / 2.0, (tr + disc) / 2.0],
        on_line,
        noise_contraction: on_line && b <= 1.0f64.min(1.0 / t) + BOUNDARY_TOL,
        perron_condition: (t - 1.0) * a + 2.0 * b * t > BOUNDARY_TOL
            && 2.0 * a + (1.0 - t) * b > BOUNDARY_TOL,
    }
}

/// Grid coordinates `i/(n−1)` for `i = 0..n`.
pub fn grid_axis(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RegionPoint {
    pub a: f64,
    pub b: f64,
    /// Region name, or `unstable` where consensus diverges.
    pub label: String,
}

/// Region label at every point of a `grid × grid` lattice over `[0,1]²`,
/// row-major in `a` then `b`.
pub fn region_map(x: f64, grid: usize) -> Result<Vec<RegionPoint>> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::InvalidInput(format!(
            "homogeneous mu_sigma = {x} must lie in (0, 1)"
        )));
    }
    let axis = grid_axis(grid);
    Ok(axis
        .par_iter()
        .flat_map_iter(|&a| {
            axis.iter().map(move |&b| {
                let label = match msd_region_classify(a, b, x) {
                    Ok(r) => r.to_string(),
                    Err(_) => "unstable".to_string(),
                };
                RegionPoint { a, b, label }
            })
        })
        .collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionPoint {
    pub a: f64,
    pub b: f64,
    pub noise_contraction: bool,
    pub perron_condition: bool,
    /// Certified step-size (homogeneous `σ²_u = 1`) when requested and found.
    pub mu0: Option<f64>,
}

/// Individual-MSD conditions on a `grid × grid` lattice for noise ratio `t`.
pub fn condition_map(t: f64, grid: usize, with_mu0: bool) -> Result<Vec<ConditionPoint>> {
    if !(t > 0.0) {
        return Err(Error::InvalidInput(format!("t = {t} must be positive")));
    }
    let axis = grid_axis(grid);
    let points: Vec<(f64, f64)> = axis
        .iter()
        .flat_map(|&a| axis.iter().map(move |&b| (a, b)))
        .collect();
    points
        .par_iter()
        .map(|&(a, b)| {
            let cfg = TwoNodeConfig::new(a, b, 1.0, 1.0, t)?;
            let c = individual_msd_conditions(&cfg);
            let mu0 = if with_mu0 && c.perron_condition && a > 0.0 && b > 0.0 && a + b < 2.0 {
                let es = eigenstructure(&cfg.combination(), &DMatrix::from_element(1, 1, 1.0))?;
                certify_mu0(&es, &[t, 1.0], 2.0)?.map(|c| c.mu0)
            } else {
                None
            };
            Ok(ConditionPoint {
                a,
                b,
                noise_contraction: c.noise_contraction,
                perron_condition: c.perron_condition,
                mu0,
            })
        })
        .collect()
}
