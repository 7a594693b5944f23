//! One-iteration update rules for the four estimation strategies.
//!
//! Each step reads the previous network state and the current data snapshot
//! and writes a fresh state (double buffering); node `k` only touches rows
//! `l` with `a_{l,k} ≠ 0` and its own data. The arithmetic is generic over
//! [`Scalar`] so tests can count multiplications.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::CombinationMatrix;
use crate::signal::{DataSnapshot, NodeProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    NonCooperative,
    Consensus,
    AtcDiffusion,
    CtaDiffusion,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 4] = [
        StrategyKind::AtcDiffusion,
        StrategyKind::CtaDiffusion,
        StrategyKind::Consensus,
        StrategyKind::NonCooperative,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::NonCooperative => "noncoop",
            StrategyKind::Consensus => "consensus",
            StrategyKind::AtcDiffusion => "atc",
            StrategyKind::CtaDiffusion => "cta",
        }
    }

    pub fn is_cooperative(self) -> bool {
        self != StrategyKind::NonCooperative
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "noncoop" | "non_cooperative" | "ncop" => Ok(Self::NonCooperative),
            "consensus" | "cons" => Ok(Self::Consensus),
            "atc" | "atc_diffusion" => Ok(Self::AtcDiffusion),
            "cta" | "cta_diffusion" => Ok(Self::CtaDiffusion),
            other => Err(Error::Config(format!("unknown strategy `{other}`"))),
        }
    }
}

/// Arithmetic needed by the update kernels.
pub trait Scalar: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> {
    fn from_f64(x: f64) -> Self;
}

impl Scalar for f64 {
    #[inline]
    fn from_f64(x: f64) -> Self {
        x
    }
}

/// `out = w + μ uᵀ (d − u w_err)`: LMS correction applied to `w`, with the
/// error signal evaluated at `w_err`.
#[inline]
fn adapt<T: Scalar>(w: &[T], w_err: &[T], u: &[T], d: T, mu: T, out: &mut [T]) {
    let mut err = d;
    for (uj, wj) in u.iter().zip(w_err) {
        err = err - *uj * *wj;
    }
    let g = mu * err;
    for ((o, wj), uj) in out.iter_mut().zip(w).zip(u) {
        *o = *wj + g * *uj;
    }
}

/// `out = Σ_l a_{l,k} x_l` over the nonzero weights of column `k`.
#[inline]
fn combine<T: Scalar>(weights: &[(usize, f64)], rows: &[T], m: usize, out: &mut [T]) {
    let (first, rest) = weights
        .split_first()
        .expect("a_{k,k} column is never empty");
    let a = T::from_f64(first.1);
    let x = &rows[first.0 * m..(first.0 + 1) * m];
    for (o, xj) in out.iter_mut().zip(x) {
        *o = a * *xj;
    }
    for &(l, w) in rest {
        let a = T::from_f64(w);
        let x = &rows[l * m..(l + 1) * m];
        for (o, xj) in out.iter_mut().zip(x) {
            *o = *o + a * *xj;
        }
    }
}

/// Flat-buffer step used by every public entry point.
///
/// `prev`, `next` and `scratch` are `N·M` row-major buffers; `regressors`
/// is `N·M` and `desired` has length `N`. `combination` may be `None` only
/// for the non-cooperative strategy.
#[allow(clippy::too_many_arguments)]
pub fn step_flat<T: Scalar>(
    kind: StrategyKind,
    combination: Option<&CombinationMatrix>,
    step_sizes: &[f64],
    m: usize,
    prev: &[T],
    regressors: &[T],
    desired: &[T],
    scratch: &mut [T],
    next: &mut [T],
) {
    let n = step_sizes.len();
    let row = |k: usize| k * m..(k + 1) * m;
    match kind {
        StrategyKind::NonCooperative => {
            for k in 0..n {
                let w = &prev[row(k)];
                adapt(
                    w,
                    w,
                    &regressors[row(k)],
                    desired[k],
                    T::from_f64(step_sizes[k]),
                    &mut next[row(k)],
                );
            }
        }
        StrategyKind::Consensus => {
            let a = combination.expect("consensus needs a combination matrix");
            for k in 0..n {
                let out = &mut scratch[row(k)];
                combine(a.incoming(k), prev, m, out);
                let w = &prev[row(k)];
                adapt(
                    out,
                    w,
                    &regressors[row(k)],
                    desired[k],
                    T::from_f64(step_sizes[k]),
                    &mut next[row(k)],
                );
            }
        }
        StrategyKind::AtcDiffusion => {
            let a = combination.expect("ATC needs a combination matrix");
            for k in 0..n {
                let w = &prev[row(k)];
                adapt(
                    w,
                    w,
                    &regressors[row(k)],
                    desired[k],
                    T::from_f64(step_sizes[k]),
                    &mut scratch[row(k)],
                );
            }
            for k in 0..n {
                combine(a.incoming(k), scratch, m, &mut next[row(k)]);
            }
        }
        StrategyKind::CtaDiffusion => {
            let a = combination.expect("CTA needs a combination matrix");
            for k in 0..n {
                combine(a.incoming(k), prev, m, &mut scratch[row(k)]);
            }
            for k in 0..n {
                let psi = &scratch[row(k)];
                adapt(
                    psi,
                    psi,
                    &regressors[row(k)],
                    desired[k],
                    T::from_f64(step_sizes[k]),
                    &mut next[row(k)],
                );
            }
        }
    }
}

/// Stacked estimates `w_{k,i}` (row `k`) at iteration `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    node_count: usize,
    dim: usize,
    estimates: Vec<f64>,
    pub iteration: u64,
}

impl NetworkState {
    /// `w_{k,-1} = 0` for every node.
    pub fn zeros(node_count: usize, dim: usize) -> Self {
        Self {
            node_count,
            dim,
            estimates: vec![0.0; node_count * dim],
            iteration: 0,
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let dim = rows.first().map_or(0, Vec::len);
        if n == 0 || dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Dimension(
                "state rows must be nonempty and equal length".into(),
            ));
        }
        Ok(Self {
            node_count: n,
            dim,
            estimates: rows.concat(),
            iteration: 0,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn estimate(&self, k: usize) -> &[f64] {
        &self.estimates[k * self.dim..(k + 1) * self.dim]
    }

    pub fn estimate_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.estimates[k * self.dim..(k + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.estimates
    }

    /// `‖w° − w_{k,i}‖²` for node `k`.
    pub fn squared_deviation(&self, k: usize, w0: &[f64]) -> f64 {
        self.estimate(k)
            .iter()
            .zip(w0)
            .map(|(w, t)| (t - w) * (t - w))
            .sum()
    }
}

/// Reusable buffers for repeated stepping without allocation.
#[derive(Debug, Clone)]
pub struct Stepper {
    kind: StrategyKind,
    step_sizes: Vec<f64>,
    scratch: Vec<f64>,
    next: Vec<f64>,
}

impl Stepper {
    pub fn new(kind: StrategyKind, profiles: &[NodeProfile]) -> Self {
        let n = profiles.len();
        let m = profiles.first().map_or(0, NodeProfile::dim);
        Self {
            kind,
            step_sizes: profiles.iter().map(|p| p.step_size).collect(),
            scratch: vec![0.0; n * m],
            next: vec![0.0; n * m],
        }
    }

    pub fn kind(&self) -> StrategyKind {
        self.kind
    }

    /// Advances `state` in place by one iteration.
    pub fn advance(
        &mut self,
        state: &mut NetworkState,
        snapshot: &DataSnapshot,
        combination: Option<&CombinationMatrix>,
    ) {
        let m = state.dim;
        step_flat(
            self.kind,
            combination,
            &self.step_sizes,
            m,
            &state.estimates,
            snapshot.regressors_flat(),
            &snapshot.desired,
            &mut self.scratch,
            &mut self.next,
        );
        std::mem::swap(&mut state.estimates, &mut self.next);
        state.iteration += 1;
    }
}

fn check(
    state: &NetworkState,
    snapshot: &DataSnapshot,
    profiles: &[NodeProfile],
    a: Option<&CombinationMatrix>,
) -> Result<()> {
    let n = state.node_count;
    if snapshot.node_count() != n || profiles.len() != n || snapshot.dim() != state.dim {
        return Err(Error::Dimension(format!(
            "state {}x{}, snapshot {}x{}, {} profiles",
            n,
            state.dim,
            snapshot.node_count(),
            snapshot.dim(),
            profiles.len()
        )));
    }
    if let Some(a) = a {
        if a.node_count() != n {
            return Err(Error::Dimension(format!(
                "combination matrix has {} nodes, state has {n}",
                a.node_count()
            )));
        }
    }
    Ok(())
}

fn step(
    kind: StrategyKind,
    state: &NetworkState,
    snapshot: &DataSnapshot,
    profiles: &[NodeProfile],
    a: Option<&CombinationMatrix>,
) -> Result<NetworkState> {
    check(state, snapshot, profiles, a)?;
    let mut out = state.clone();
    Stepper::new(kind, profiles).advance(&mut out, snapshot, a);
    Ok(out)
}

/// Local LMS at every node, no exchange.
pub fn step_non_cooperative(
    state: &NetworkState,
    snapshot: &DataSnapshot,
    profiles: &[NodeProfile],
) -> Result<NetworkState> {
    step(
        StrategyKind::NonCooperative,
        state,
        snapshot,
        profiles,
        None,
    )
}

/// Combination of neighbor estimates plus an LMS correction whose error is
/// evaluated at the node's own previous estimate.
pub fn step_consensus(
    state: &NetworkState,
    snapshot: &DataSnapshot,
    profiles: &[NodeProfile],
    a: &CombinationMatrix,
) -> Result<NetworkState> {
    step(StrategyKind::Consensus, state, snapshot, profiles, Some(a))
}

/// Adapt-then-combine diffusion.
pub fn step_atc(
    state: &NetworkState,
    snapshot: &DataSnapshot,
    profiles: &[NodeProfile],
    a: &CombinationMatrix,
) -> Result<NetworkState> {
    step(
        StrategyKind::AtcDiffusion,
        state,
        snapshot,
        profiles,
        Some(a),
    )
}

/// Combine-then-adapt diffusion.
pub fn step_cta(
    state: &NetworkState,
    snapshot: &DataSnapshot,
    profiles: &[NodeProfile],
    a: &CombinationMatrix,
) -> Result<NetworkState> {
    step(
        StrategyKind::CtaDiffusion,
        state,
        snapshot,
        profiles,
        Some(a),
    )
}

pub fn step_strategy(
    kind: StrategyKind,
    state: &NetworkState,
    snapshot: &DataSnapshot,
    profiles: &[NodeProfile],
    a: &CombinationMatrix,
) -> Result<NetworkState> {
    let a = kind.is_cooperative().then_some(a);
    step(kind, state, snapshot, profiles, a)
}
