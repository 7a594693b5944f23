//! Steady-state mean-square deviation: the series `Σ_j Tr[B^j Y B^{Tj}]`
//! for arbitrary networks, the eigen-decomposed closed forms for
//! homogeneous agents, and the strategy orderings that follow from them.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{diagonalize, symmetric_eigenvalues_desc, CMatrix};
use crate::network::{is_primitive, perron_pair, CombinationMatrix};
use crate::spectra::{spectral_radius, ErrorRecursion};
use crate::strategy::StrategyKind;

/// Relative size of the last summed block below which the series stops.
pub const SERIES_TOL: f64 = 1e-12;
/// Eigen-form denominators smaller than this are flagged as ill-conditioned.
pub const DENOMINATOR_GUARD: f64 = 1e-12;
/// Relative margin a Perron-weighted noise comparison must clear to count as
/// strict; eigenvector error alone reaches ~1e-11 on exact ties.
pub const PERRON_MARGIN_TOL: f64 = 1e-9;
/// Largest `|r_{l2}^* r_{l1}|` (l1 ≠ l2) for which the diagonal-only network
/// formula is used in [`NetworkForm::Auto`].
pub const ORTHONORMALITY_TOL: f64 = 1e-8;

pub fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MsdMethod {
    Series,
    Eigenform,
}

/// How the eigen-form path turns node values into a network value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetworkForm {
    /// Diagonal `(l, l)` terms only; exact when the right eigenvectors of
    /// `Aᵀ` are orthonormal.
    Approximate,
    /// Mean of the per-node double sums.
    Exact,
    /// `Approximate` when the eigenvectors are orthonormal to
    /// [`ORTHONORMALITY_TOL`], else `Exact`.
    Auto,
}

#[derive(Debug, Clone, Serialize)]
pub struct MsdReport {
    pub strategy: StrategyKind,
    pub method: MsdMethod,
    pub per_node: Vec<f64>,
    pub network: f64,
    /// Number of series terms summed (series method only).
    pub truncation_terms: Option<u64>,
    /// `ρ(B)`; values `≥ 1` mean the MSD entries are `+∞`.
    pub spectral_radius: f64,
    /// Eigen-form only: the diagonal-only and node-averaged network values.
    pub network_approximate: Option<f64>,
    pub network_exact: Option<f64>,
    /// Eigen-form only: `max_{l1≠l2} |r_{l2}^* r_{l1}|`.
    pub orthonormality_gap: Option<f64>,
    pub warnings: Vec<String>,
}

impl MsdReport {
    fn diverged(strategy: StrategyKind, method: MsdMethod, n: usize, rho: f64) -> Self {
        Self {
            strategy,
            method,
            per_node: vec![f64::INFINITY; n],
            network: f64::INFINITY,
            truncation_terms: None,
            spectral_radius: rho,
            network_approximate: None,
            network_exact: None,
            orthonormality_gap: None,
            warnings: Vec::new(),
        }
    }

    pub fn is_diverged(&self) -> bool {
        !(self.spectral_radius < 1.0)
    }

    /// Turns a divergence verdict into [`Error::Unstable`].
    pub fn require_stable(self) -> Result<Self> {
        if self.is_diverged() {
            return Err(Error::Unstable {
                rho: self.spectral_radius,
                detail: format!("{} has no finite steady-state MSD", self.strategy),
            });
        }
        Ok(self)
    }

    pub fn network_db(&self) -> f64 {
        db(self.network)
    }

    pub fn per_node_db(&self) -> Vec<f64> {
        self.per_node.iter().map(|&x| db(x)).collect()
    }
}

/// Sums `Σ_j B^j Y B^{Tj}` by repeated doubling (after `p` doublings the
/// partial sum holds the first `2^p` terms) and reads off the traces of the
/// diagonal blocks.
pub fn msd_series(rec: &ErrorRecursion) -> Result<MsdReport> {
    let (n, m) = (rec.node_count, rec.dim);
    let rho = spectral_radius(&rec.b)?;
    if !(rho < 1.0) {
        return Ok(MsdReport::diverged(rec.strategy, MsdMethod::Series, n, rho));
    }
    let mut sum = rec.y.clone();
    let mut power = rec.b.clone();
    let mut terms: u64 = 1;
    let mut last = DMatrix::zeros(0, 0);
    let mut converged = sum.trace() == 0.0;
    for _ in 0..64 {
        if converged {
            break;
        }
        let block = &power * &sum * power.transpose();
        let added = block.trace();
        sum += &block;
        last = block;
        power = &power * &power;
        terms *= 2;
        converged = added.abs() <= SERIES_TOL * sum.trace() || power.amax() == 0.0;
    }
    let mut warnings = Vec::new();
    if !converged {
        warnings.push(format!(
            "series did not reach relative tolerance after {terms} terms"
        ));
    }
    // Remaining terms shrink at least like ρ^{2j}; the last block held
    // `terms / 2` of them, so scale it once more for the tail.
    if last.nrows() > 0 {
        let r = rho.powf(terms as f64);
        if r < 1.0 {
            sum += &last * (r / (1.0 - r));
        }
    }
    let per_node: Vec<f64> = (0..n)
        .map(|k| sum.view((k * m, k * m), (m, m)).trace())
        .collect();
    let network = per_node.iter().sum::<f64>() / n as f64;
    Ok(MsdReport {
        strategy: rec.strategy,
        method: MsdMethod::Series,
        per_node,
        network,
        truncation_terms: Some(terms),
        spectral_radius: rho,
        network_approximate: None,
        network_exact: None,
        orthonormality_gap: None,
        warnings,
    })
}

/// Eigen-decomposition of a homogeneous network: `Aᵀ r_l = λ_l r_l`,
/// `s_l^* Aᵀ = λ_l s_l^*` with `s_{l2}^* r_{l1} = δ`, and `R_u z_m = λ_m z_m`.
#[derive(Debug, Clone)]
pub struct EigenStructure {
    /// The combination matrix itself (needed by the series forms).
    pub a: DMatrix<f64>,
    /// `λ_l(A)`, with the eigenvalue at `1` first.
    pub a_eigs: Vec<Complex64>,
    /// Columns `r_l`, unit norm.
    pub right: CMatrix,
    /// Columns `s_l`.
    pub left: CMatrix,
    /// `λ_m(R_u)`, decreasing.
    pub ru_eigs: Vec<f64>,
    pub ru_vecs: DMatrix<f64>,
    /// Two-norm condition number of `[r_1 … r_N]`.
    pub condition: f64,
}

pub fn eigenstructure(a: &CombinationMatrix, ru: &DMatrix<f64>) -> Result<EigenStructure> {
    if !crate::linalg::is_symmetric(ru, 1e-12) {
        return Err(Error::InvalidInput("R_u is not symmetric".into()));
    }
    let at = a.matrix().transpose();
    let d = diagonalize(&at)?;
    let n = at.nrows();
    let first = (0..n)
        .min_by(|&x, &y| {
            (d.values[x] - 1.0)
                .norm()
                .total_cmp(&(d.values[y] - 1.0).norm())
        })
        .expect("nonempty");
    let mut order: Vec<usize> = vec![first];
    order.extend((0..n).filter(|&l| l != first));
    let mut a_eigs: Vec<Complex64> = order.iter().map(|&l| d.values[l]).collect();
    if (a_eigs[0] - 1.0).norm() < 1e-10 {
        a_eigs[0] = Complex64::new(1.0, 0.0);
    }
    let right = CMatrix::from_fn(n, n, |i, j| d.right[(i, order[j])]);
    // rows of U⁻¹ are s_l^*, so s_l is the conjugate of row l
    let left = CMatrix::from_fn(n, n, |i, j| d.left_inv[(order[j], i)].conj());

    let eig = nalgebra::SymmetricEigen::new(ru.clone());
    let mut idx: Vec<usize> = (0..ru.nrows()).collect();
    idx.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
    let ru_eigs: Vec<f64> = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    if ru_eigs.last().is_some_and(|&x| !(x > 0.0)) {
        return Err(Error::InvalidInput("R_u is not positive-definite".into()));
    }
    let ru_vecs = DMatrix::from_fn(ru.nrows(), ru.nrows(), |i, j| eig.eigenvectors[(i, idx[j])]);
    Ok(EigenStructure {
        a: a.matrix().clone(),
        a_eigs,
        right,
        left,
        ru_eigs,
        ru_vecs,
        condition: d.condition,
    })
}

impl EigenStructure {
    pub fn node_count(&self) -> usize {
        self.a_eigs.len()
    }

    pub fn dim(&self) -> usize {
        self.ru_eigs.len()
    }

    /// `λ_{l,m}(B)` for the given strategy.
    pub fn lambda_b(&self, strategy: StrategyKind, mu: f64, l: usize, m: usize) -> Complex64 {
        let la = self.a_eigs[l];
        let lr = self.ru_eigs[m];
        match strategy {
            StrategyKind::AtcDiffusion | StrategyKind::CtaDiffusion => la * (1.0 - mu * lr),
            StrategyKind::Consensus => la - mu * lr,
            StrategyKind::NonCooperative => Complex64::new(1.0 - mu * lr, 0.0),
        }
    }

    /// `max_{l1≠l2} |r_{l2}^* r_{l1}|`.
    pub fn orthonormality_gap(&self) -> f64 {
        let g = self.right.adjoint() * &self.right;
        let n = self.node_count();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    worst = worst.max(g[(i, j)].norm());
                }
            }
        }
        worst
    }

    /// `G[l1, l2] = s_{l1}^* Σ_v s_{l2}`.
    fn noise_gram(&self, noise: &[f64]) -> CMatrix {
        let n = self.node_count();
        let mut weighted = self.left.clone();
        for i in 0..n {
            for j in 0..n {
                weighted[(i, j)] *= noise[i];
            }
        }
        self.left.adjoint() * weighted
    }

    fn check_noise(&self, noise: &[f64]) -> Result<()> {
        if noise.len() != self.node_count() {
            return Err(Error::Dimension(format!(
                "{} noise variances for {} nodes",
                noise.len(),
                self.node_count()
            )));
        }
        Ok(())
    }
}

/// Per-`(k, m)` contributions of the double sum for one strategy, stored
/// as `out[k][m]`. Returns `None` when some `|λ_{l,m}(B)| ≥ 1`.
fn eigen_components(
    es: &EigenStructure,
    strategy: StrategyKind,
    mu: f64,
    gram: &CMatrix,
    warnings: &mut Vec<String>,
) -> std::result::Result<Vec<Vec<f64>>, f64> {
    let (n, mm) = (es.node_count(), es.dim());
    let mut rho: f64 = 0.0;
    for m in 0..mm {
        for l in 0..n {
            rho = rho.max(es.lambda_b(strategy, mu, l, m).norm());
        }
    }
    if !(rho < 1.0) {
        return Err(rho);
    }
    let mut out = vec![vec![0.0; mm]; n];
    for m in 0..mm {
        let lam: Vec<Complex64> = (0..n).map(|l| es.lambda_b(strategy, mu, l, m)).collect();
        let base = mu * mu * es.ru_eigs[m];
        // weight[l1][l2] = coef · G / (1 − λ_{l1} λ*_{l2})
        let mut weight = CMatrix::zeros(n, n);
        for l1 in 0..n {
            for l2 in 0..n {
                let den = Complex64::new(1.0, 0.0) - lam[l1] * lam[l2].conj();
                if den.norm() < DENOMINATOR_GUARD {
                    warnings.push(format!(
                        "near-marginal denominator {:.2e} at l1={} l2={} m={}",
                        den.norm(),
                        l1 + 1,
                        l2 + 1,
                        m + 1
                    ));
                }
                let mut coef = Complex64::new(base, 0.0);
                if strategy == StrategyKind::AtcDiffusion {
                    coef *= es.a_eigs[l1] * es.a_eigs[l2].conj();
                }
                weight[(l1, l2)] = coef * gram[(l1, l2)] / den;
            }
        }
        for (k, row) in out.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for l1 in 0..n {
                let rk1 = es.right[(k, l1)];
                for l2 in 0..n {
                    acc += rk1 * weight[(l1, l2)] * es.right[(k, l2)].conj();
                }
            }
            row[m] = acc.re;
        }
    }
    Ok(out)
}

/// Node and network MSD from the eigen-decomposed double sum.
pub fn msd_eigenform(
    es: &EigenStructure,
    mu: f64,
    noise: &[f64],
    strategy: StrategyKind,
    form: NetworkForm,
) -> Result<MsdReport> {
    es.check_noise(noise)?;
    let n = es.node_count();
    let gram = es.noise_gram(noise);
    let mut warnings = Vec::new();
    let comps = match eigen_components(es, strategy, mu, &gram, &mut warnings) {
        Ok(c) => c,
        Err(rho) => return Ok(MsdReport::diverged(strategy, MsdMethod::Eigenform, n, rho)),
    };
    let rho = (0..es.dim())
        .flat_map(|m| (0..n).map(move |l| (l, m)))
        .map(|(l, m)| es.lambda_b(strategy, mu, l, m).norm())
        .fold(0.0, f64::max);
    let per_node: Vec<f64> = comps.iter().map(|r| r.iter().sum()).collect();
    let exact = per_node.iter().sum::<f64>() / n as f64;

    let mut approx = 0.0;
    for m in 0..es.dim() {
        for l in 0..n {
            let lam = es.lambda_b(strategy, mu, l, m);
            let mut coef = mu * mu * es.ru_eigs[m];
            if strategy == StrategyKind::AtcDiffusion {
                coef *= es.a_eigs[l].norm_sqr();
            }
            approx += coef * gram[(l, l)].re / (1.0 - lam.norm_sqr());
        }
    }
    approx /= n as f64;

    let gap = es.orthonormality_gap();
    let network = match form {
        NetworkForm::Approximate => approx,
        NetworkForm::Exact => exact,
        NetworkForm::Auto if gap <= ORTHONORMALITY_TOL => approx,
        NetworkForm::Auto => exact,
    };
    Ok(MsdReport {
        strategy,
        method: MsdMethod::Eigenform,
        per_node,
        network,
        truncation_terms: None,
        spectral_radius: rho,
        network_approximate: Some(approx),
        network_exact: Some(exact),
        orthonormality_gap: Some(gap),
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentForm {
    Series,
    Eigen,
}

/// `MSD_k(m)`: the contribution of the `m`-th eigenvalue of `R_u` to the
/// MSD of node `k` (0-based). Defined for ATC, CTA and non-cooperative.
pub fn msd_component(
    strategy: StrategyKind,
    es: &EigenStructure,
    mu: f64,
    noise: &[f64],
    k: usize,
    m: usize,
    form: ComponentForm,
) -> Result<f64> {
    es.check_noise(noise)?;
    if strategy == StrategyKind::Consensus {
        return Err(Error::Unsupported(
            "per-eigenvalue components are defined for ATC, CTA and non-cooperative only".into(),
        ));
    }
    if k >= es.node_count() || m >= es.dim() {
        return Err(Error::Dimension(format!(
            "component ({}, {}) out of range",
            k + 1,
            m + 1
        )));
    }
    match form {
        ComponentForm::Eigen => {
            let gram = es.noise_gram(noise);
            let mut w = Vec::new();
            Ok(match eigen_components(es, strategy, mu, &gram, &mut w) {
                Ok(c) => c[k][m],
                Err(_) => f64::INFINITY,
            })
        }
        ComponentForm::Series => Ok(series_component(strategy, es, mu, noise, k, m)),
    }
}

/// `μ²λ_m Σ_j q^{2j} ‖A^{j+s} e_k‖²_{Σ_v}` with `q = 1 − μλ_m` and
/// `s = 1` for ATC, `0` for CTA; the non-cooperative row has `A^j` replaced
/// by `I`.
fn series_component(
    strategy: StrategyKind,
    es: &EigenStructure,
    mu: f64,
    noise: &[f64],
    k: usize,
    m: usize,
) -> f64 {
    let lm = es.ru_eigs[m];
    let q2 = (1.0 - mu * lm).powi(2);
    let scale = mu * mu * lm;
    if !(q2 < 1.0) {
        return f64::INFINITY;
    }
    if strategy == StrategyKind::NonCooperative {
        return scale * noise[k] / (1.0 - q2);
    }
    let n = es.node_count();
    let smax = noise.iter().cloned().fold(0.0, f64::max);
    let mut x = nalgebra::DVector::<f64>::zeros(n);
    x[k] = 1.0;
    if strategy == StrategyKind::AtcDiffusion {
        x = &es.a * x;
    }
    let mut sum = 0.0;
    let mut weight = 1.0;
    // columns of powers of a left-stochastic matrix have unit sum, so each
    // term is at most max σ² times q^{2j}
    loop {
        let term: f64 = x.iter().zip(noise).map(|(xi, s)| s * xi * xi).sum();
        sum += weight * term;
        weight *= q2;
        let tail = smax * weight / (1.0 - q2);
        if tail <= 1e-15 * sum || weight == 0.0 {
            break;
        }
        x = &es.a * x;
    }
    scale * sum
}

/// `c_k(m)`, the common factor in the pairwise component differences.
pub fn c_km(es: &EigenStructure, mu: f64, noise: &[f64], k: usize, m: usize) -> f64 {
    let gram = es.noise_gram(noise);
    c_km_with(es, mu, &gram, k, m)
}

fn c_km_with(es: &EigenStructure, mu: f64, gram: &CMatrix, k: usize, m: usize) -> f64 {
    let n = es.node_count();
    let q2 = (1.0 - mu * es.ru_eigs[m]).powi(2);
    let one = Complex64::new(1.0, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for l1 in 0..n {
        for l2 in 0..n {
            let ll = es.a_eigs[l1] * es.a_eigs[l2].conj();
            let num = one - ll;
            if num.norm() == 0.0 {
                continue;
            }
            acc += num * es.right[(k, l1)] * gram[(l1, l2)] * es.right[(k, l2)].conj()
                / (one - ll * q2);
        }
    }
    acc.re
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderingReport {
    pub reports: Vec<MsdReport>,
    pub checks: Vec<Check>,
}

impl OrderingReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn network(&self, s: StrategyKind) -> f64 {
        self.reports
            .iter()
            .find(|r| r.strategy == s)
            .map_or(f64::NAN, |r| r.network)
    }
}

/// `x ≤ y` up to a relative slack.
fn le(x: f64, y: f64, slack: f64) -> bool {
    x <= y + slack * x.abs().max(y.abs())
}

/// Evaluates the network and per-component orderings between strategies.
///
/// Network-level orderings are only checked when the right eigenvectors
/// are orthonormal; otherwise they are recorded as skipped (passed).
pub fn ordering_checks(
    es: &EigenStructure,
    mu: f64,
    noise: &[f64],
    slack: f64,
) -> Result<OrderingReport> {
    let reports = StrategyKind::ALL
        .iter()
        .map(|&s| msd_eigenform(es, mu, noise, s, NetworkForm::Auto))
        .collect::<Result<Vec<_>>>()?;
    let get = |s: StrategyKind| {
        reports
            .iter()
            .find(|r| r.strategy == s)
            .expect("all strategies")
            .network
    };
    let (atc, cta, cons, ncop) = (
        get(StrategyKind::AtcDiffusion),
        get(StrategyKind::CtaDiffusion),
        get(StrategyKind::Consensus),
        get(StrategyKind::NonCooperative),
    );
    let mut checks = Vec::new();
    let mut push = |name: &str, passed: bool, detail: String| {
        checks.push(Check {
            name: name.to_string(),
            passed,
            detail,
        })
    };
    let orthonormal = es.orthonormality_gap() <= ORTHONORMALITY_TOL;
    if orthonormal {
        push(
            "atc<=cta",
            le(atc, cta, slack),
            format!("{atc:.6e} vs {cta:.6e}"),
        );
        push(
            "cta<=ncop",
            le(cta, ncop, slack),
            format!("{cta:.6e} vs {ncop:.6e}"),
        );
        push(
            "atc<=cons",
            le(atc, cons, slack),
            format!("{atc:.6e} vs {cons:.6e}"),
        );
        let lmin = *es.ru_eigs.last().expect("M >= 1");
        if (1.0..2.0).contains(&(mu * lmin)) {
            push(
                "ncop<=cons",
                le(ncop, cons, slack),
                format!("{ncop:.6e} vs {cons:.6e}"),
            );
        }
    } else {
        push(
            "network-orderings",
            true,
            "skipped: eigenvectors of A^T not orthonormal".into(),
        );
    }

    // per-component ratios and the all-or-nothing ordering
    let gram = es.noise_gram(noise);
    let comp = |s| eigen_components(es, s, mu, &gram, &mut Vec::new());
    if let (Ok(ca), Ok(cc), Ok(cn)) = (
        comp(StrategyKind::AtcDiffusion),
        comp(StrategyKind::CtaDiffusion),
        comp(StrategyKind::NonCooperative),
    ) {
        let mut ratio_bad = Vec::new();
        let mut mixed = Vec::new();
        for k in 0..es.node_count() {
            for m in 0..es.dim() {
                let q2 = (1.0 - mu * es.ru_eigs[m]).powi(2);
                let (a, c, n) = (ca[k][m], cc[k][m], cn[k][m]);
                let scale = a.abs().max(c.abs()).max(n.abs());
                let (d_na, d_nc, d_ca) = (n - a, n - c, c - a);
                // below this the differences are dominated by rounding and
                // the ratios cannot be resolved to 1e-8
                if d_nc.abs() > 1e-6 * scale && d_ca.abs() > 1e-6 * scale {
                    let r1 = d_na / d_nc;
                    let r2 = d_na / d_ca;
                    let (e1, e2) = (1.0 / q2, 1.0 / (1.0 - q2));
                    if (r1 - e1).abs() > 1e-8 * e1 || (r2 - e2).abs() > 1e-8 * e2 {
                        ratio_bad.push(format!(
                            "k={} m={}: {r1:.9} vs {e1:.9}, {r2:.9} vs {e2:.9}",
                            k + 1,
                            m + 1
                        ));
                    }
                }
                let tol = 1e-10 * scale;
                let forward = a <= c + tol && c <= n + tol;
                let reverse = a + tol >= c && c + tol >= n;
                if !(forward || reverse) {
                    mixed.push(format!(
                        "k={} m={}: atc {a:.6e} cta {c:.6e} ncop {n:.6e}",
                        k + 1,
                        m + 1
                    ));
                }
            }
        }
        push(
            "component-ratios",
            ratio_bad.is_empty(),
            ratio_bad.join("; "),
        );
        push("component-trichotomy", mixed.is_empty(), mixed.join("; "));
    }

    let mut eig_bad = Vec::new();
    for m in 0..es.dim() {
        for l in 0..es.node_count() {
            let d = (es.lambda_b(StrategyKind::CtaDiffusion, mu, l, m)
                - es.lambda_b(StrategyKind::Consensus, mu, l, m))
            .norm();
            let want = mu * es.ru_eigs[m] * (Complex64::new(1.0, 0.0) - es.a_eigs[l]).norm();
            if (d - want).abs() > 1e-12 * want.max(1.0) {
                eig_bad.push(format!("l={} m={}", l + 1, m + 1));
            }
        }
    }
    push("cta-cons-eigen-gap", eig_bad.is_empty(), eig_bad.join("; "));
    Ok(OrderingReport { reports, checks })
}

/// Conditions on `A` and the noise profile under which ATC is best at
/// every individual node.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    /// Smallest eigenvalue of `Σ_v − AᵀΣ_vA`.
    pub psd_min_eigenvalue: f64,
    /// `Σ_v − AᵀΣ_vA ⪰ 0` (smallest eigenvalue `≥ −1e−10`).
    pub noise_contraction: bool,
    pub primitive: bool,
    /// `σ²_{v,k} − s₁ᵀΣ_v s₁/N` per node (primitive `A` only).
    pub perron_margins: Option<Vec<f64>>,
    /// All margins above [`PERRON_MARGIN_TOL`] relative (primitive `A` only).
    pub perron_condition: Option<bool>,
    /// `false` only if the contraction holds, `A` is primitive and the
    /// Perron condition fails.
    pub implication_holds: bool,
}

pub fn individual_ordering_conditions(
    a: &CombinationMatrix,
    noise: &[f64],
) -> Result<ConditionReport> {
    let n = a.node_count();
    if noise.len() != n {
        return Err(Error::Dimension(format!(
            "{} noise variances for {n} nodes",
            noise.len()
        )));
    }
    let sv = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(noise));
    let am = a.matrix();
    let d = &sv - am.transpose() * &sv * am;
    let d = (&d + d.transpose()) * 0.5;
    let psd_min_eigenvalue = *symmetric_eigenvalues_desc(&d).last().expect("N >= 1");
    let noise_contraction = psd_min_eigenvalue >= -1e-10;
    let primitive = is_primitive(a);
    let (perron_margins, perron_condition) = if primitive {
        let pp = perron_pair(a)?;
        let q: f64 = pp.s1.iter().zip(noise).map(|(s, v)| s * s * v).sum::<f64>() / n as f64;
        let margins: Vec<f64> = noise.iter().map(|&s| s - q).collect();
        let ok = margins
            .iter()
            .zip(noise)
            .all(|(&mg, &s)| mg > PERRON_MARGIN_TOL * s.max(f64::MIN_POSITIVE));
        (Some(margins), Some(ok))
    } else {
        (None, None)
    };
    let implication_holds = !(noise_contraction && primitive && perron_condition == Some(false));
    Ok(ConditionReport {
        psd_min_eigenvalue,
        noise_contraction,
        primitive,
        perron_margins,
        perron_condition,
        implication_holds,
    })
}

/// Outcome of the search for a step-size below which ATC < CTA < non-coop
/// holds strictly at every node.
#[derive(Debug, Clone, Serialize)]
pub struct Mu0Certificate {
    /// Largest certified step-size found (not claimed to be tight).
    pub mu0: f64,
    /// `(μ, certified)` for every probe evaluated.
    pub probes: Vec<(f64, bool)>,
}

/// Certifies `μ` when `c_k(m) > 0` for every node and eigenvalue of `R_u`
/// (which makes non-coop minus CTA strictly positive per component) and the
/// strict per-node ordering holds on the totals.
pub fn certifies_strict_order(es: &EigenStructure, mu: f64, noise: &[f64]) -> Result<bool> {
    es.check_noise(noise)?;
    let gram = es.noise_gram(noise);
    for m in 0..es.dim() {
        let q = 1.0 - mu * es.ru_eigs[m];
        if q == 0.0 || !(q * q < 1.0) {
            return Ok(false);
        }
        for k in 0..es.node_count() {
            if !(c_km_with(es, mu, &gram, k, m) > 0.0) {
                return Ok(false);
            }
        }
    }
    let atc = msd_eigenform(
        es,
        mu,
        noise,
        StrategyKind::AtcDiffusion,
        NetworkForm::Exact,
    )?;
    let cta = msd_eigenform(
        es,
        mu,
        noise,
        StrategyKind::CtaDiffusion,
        NetworkForm::Exact,
    )?;
    let ncop = msd_eigenform(
        es,
        mu,
        noise,
        StrategyKind::NonCooperative,
        NetworkForm::Exact,
    )?;
    Ok((0..es.node_count())
        .all(|k| atc.per_node[k] < cta.per_node[k] && cta.per_node[k] < ncop.per_node[k]))
}

/// Probes `μ = μ_max·2^{−j}` for `j = 1..=40`, keeps the longest run of
/// certified probes ending at the smallest one, then refines upward by
/// geometric bisection. Returns `None` if the smallest probe fails.
pub fn certify_mu0(
    es: &EigenStructure,
    noise: &[f64],
    mu_max: f64,
) -> Result<Option<Mu0Certificate>> {
    let mut probes = Vec::new();
    for j in 1..=40 {
        let mu = mu_max * 0.5f64.powi(j);
        probes.push((mu, certifies_strict_order(es, mu, noise)?));
    }
    // probes run from largest to smallest μ
    let Some(first_ok) = (0..probes.len()).rev().take_while(|&i| probes[i].1).last() else {
        return Ok(None);
    };
    let mut lo = probes[first_ok].0;
    if first_ok > 0 {
        let mut hi = probes[first_ok - 1].0;
        for _ in 0..30 {
            let mid = (lo * hi).sqrt();
            if certifies_strict_order(es, mid, noise)? {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi / lo < 1.0 + 1e-6 {
                break;
            }
        }
    }
    Ok(Some(Mu0Certificate { mu0: lo, probes }))
}
