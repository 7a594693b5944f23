//! Monte Carlo ensembles: learning curves, steady-state estimates, and the
//! comparison against the theoretical MSD.
//!
//! Every trial draws its data from counter-addressed streams, so the result
//! is a pure function of the configuration and seed. All selected
//! strategies see the same snapshots within a trial. Trials run in parallel
//! and are reduced in trial order.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::msd::{db, eigenstructure, msd_eigenform, msd_series, MsdReport, NetworkForm};
use crate::network::CombinationMatrix;
use crate::signal::{
    check_dims, fill_snapshot, homogeneous_parts, DataSnapshot, GroundTruth, NodeProfile,
};
use crate::spectra::{build_error_recursion, StabilityVerdict};
use crate::strategy::{NetworkState, Stepper, StrategyKind};

/// A trial is declared divergent once its network squared error exceeds
/// this multiple of `‖w°‖²`.
pub const DIVERGENCE_FACTOR: f64 = 1e12;
/// Largest steady-state slope (dB per 100 iterations) accepted as flat.
pub const FLAT_SLOPE_DB: f64 = 0.01;

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub profiles: Vec<NodeProfile>,
    pub combination: CombinationMatrix,
    pub truth: GroundTruth,
    pub strategies: Vec<StrategyKind>,
    pub iterations: usize,
    pub trials: usize,
    pub seed: u64,
    /// Trailing fraction of the iterations averaged for steady state.
    pub steady_state_window: f64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let m = check_dims(&self.profiles)?;
        if m != self.truth.dim() {
            return Err(Error::Dimension(format!(
                "profiles have dimension {m} but w0 has {}",
                self.truth.dim()
            )));
        }
        if self.combination.node_count() != self.profiles.len() {
            return Err(Error::Dimension(format!(
                "combination matrix has {} nodes but {} profiles were given",
                self.combination.node_count(),
                self.profiles.len()
            )));
        }
        if self.iterations == 0 || self.trials == 0 {
            return Err(Error::InvalidInput(
                "iterations and trials must be at least 1".into(),
            ));
        }
        if !(self.steady_state_window > 0.0 && self.steady_state_window <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "steady-state window {} must lie in (0, 1]",
                self.steady_state_window
            )));
        }
        if self.strategies.is_empty() {
            return Err(Error::InvalidInput("no strategies selected".into()));
        }
        Ok(())
    }

    /// First iteration index of the steady-state window.
    pub fn window_start(&self) -> usize {
        let len = ((self.steady_state_window * self.iterations as f64).ceil() as usize)
            .clamp(1, self.iterations);
        self.iterations - len
    }
}

/// Ensemble results for one strategy.
#[derive(Debug, Clone, Serialize)]
pub struct LearningCurve {
    pub strategy: StrategyKind,
    /// Network MSD after each iteration, averaged over nodes and trials.
    /// Entries become `+∞` once any trial has diverged.
    pub msd: Vec<f64>,
    pub steady_state_per_node: Vec<f64>,
    pub steady_state_network: f64,
    /// Window-averaged network MSD of each trial (for standard errors).
    pub trial_steady_state: Vec<f64>,
    /// Indices of divergent trials.
    pub diverged_trials: Vec<usize>,
    /// Earliest iteration at which a trial diverged.
    pub divergence_onset: Option<usize>,
    pub window_start: usize,
    /// Least-squares slope of the dB curve over the window, per 100 iterations.
    pub window_slope_db: f64,
}

impl LearningCurve {
    pub fn msd_db(&self) -> Vec<f64> {
        self.msd.iter().map(|&x| db(x)).collect()
    }

    pub fn diverged(&self) -> bool {
        !self.diverged_trials.is_empty()
    }

    pub fn steady_state_db(&self) -> f64 {
        db(self.steady_state_network)
    }

    pub fn steady_state_per_node_db(&self) -> Vec<f64> {
        self.steady_state_per_node.iter().map(|&x| db(x)).collect()
    }

    /// Monte Carlo standard error of `steady_state_network`.
    pub fn standard_error(&self) -> f64 {
        let n = self.trial_steady_state.len() as f64;
        if n < 2.0 {
            return f64::NAN;
        }
        let mean = self.trial_steady_state.iter().sum::<f64>() / n;
        let var = self
            .trial_steady_state
            .iter()
            .map(|x| (x - mean).powi(2))
            .sum::<f64>()
            / (n - 1.0);
        (var / n).sqrt()
    }

    pub fn is_flat(&self) -> bool {
        self.window_slope_db.abs() < FLAT_SLOPE_DB
    }

    /// First iteration from which the curve stays within `margin_db` of the
    /// steady-state level.
    pub fn iterations_to_within(&self, margin_db: f64) -> Option<usize> {
        let target = self.steady_state_db() + margin_db;
        let curve = self.msd_db();
        let mut first = None;
        for (i, &v) in curve.iter().enumerate().rev() {
            if v <= target {
                first = Some(i);
            } else {
                break;
            }
        }
        first
    }

    /// Curve in dB shifted so that its largest finite value is 0 dB.
    pub fn normalized_db(&self) -> Vec<f64> {
        let d = self.msd_db();
        let peak = d
            .iter()
            .cloned()
            .filter(|x| x.is_finite())
            .fold(f64::NEG_INFINITY, f64::max);
        d.iter().map(|x| x - peak).collect()
    }
}

struct TrialOutput {
    /// `[strategy][iteration]` network squared error averaged over nodes.
    curves: Vec<Vec<f64>>,
    /// `[strategy][node]` window-averaged squared error.
    window: Vec<Vec<f64>>,
    onset: Vec<Option<usize>>,
}

fn run_trial(cfg: &ExperimentConfig, trial: usize, start: usize) -> TrialOutput {
    let n = cfg.profiles.len();
    let m = cfg.truth.dim();
    let w0: Vec<f64> = cfg.truth.w0.iter().copied().collect();
    let limit = DIVERGENCE_FACTOR * w0.iter().map(|x| x * x).sum::<f64>().max(f64::MIN_POSITIVE);
    let s = cfg.strategies.len();
    let mut states: Vec<NetworkState> = (0..s).map(|_| NetworkState::zeros(n, m)).collect();
    let mut steppers: Vec<Stepper> = cfg
        .strategies
        .iter()
        .map(|&k| Stepper::new(k, &cfg.profiles))
        .collect();
    let mut snap = DataSnapshot::zeros(n, m);
    let mut out = TrialOutput {
        curves: vec![vec![0.0; cfg.iterations]; s],
        window: vec![vec![0.0; n]; s],
        onset: vec![None; s],
    };
    let wlen = (cfg.iterations - start) as f64;
    for i in 0..cfg.iterations {
        fill_snapshot(
            &mut snap,
            &cfg.profiles,
            &cfg.truth,
            cfg.seed,
            trial as u64,
            i as u64,
        );
        for j in 0..s {
            if out.onset[j].is_some() {
                out.curves[j][i] = f64::INFINITY;
                continue;
            }
            let kind = cfg.strategies[j];
            let comb = kind.is_cooperative().then_some(&cfg.combination);
            steppers[j].advance(&mut states[j], &snap, comb);
            let mut total = 0.0;
            for k in 0..n {
                let e = states[j].squared_deviation(k, &w0);
                total += e;
                if i >= start {
                    out.window[j][k] += e / wlen;
                }
            }
            if !(total <= limit) {
                out.onset[j] = Some(i);
                out.curves[j][i] = f64::INFINITY;
                out.window[j].iter_mut().for_each(|x| *x = f64::INFINITY);
                continue;
            }
            out.curves[j][i] = total / n as f64;
        }
    }
    out
}

/// Runs the ensemble and returns one curve per selected strategy, in the
/// order of `cfg.strategies`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<LearningCurve>> {
    cfg.validate()?;
    let start = cfg.window_start();
    let outputs: Vec<TrialOutput> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, t, start))
        .collect();
    let n = cfg.profiles.len();
    let trials = cfg.trials as f64;
    let curves = cfg
        .strategies
        .iter()
        .enumerate()
        .map(|(j, &kind)| {
            let mut msd = vec![0.0; cfg.iterations];
            let mut per_node = vec![0.0; n];
            let mut trial_ss = Vec::with_capacity(cfg.trials);
            let mut diverged = Vec::new();
            let mut onset: Option<usize> = None;
            for (t, o) in outputs.iter().enumerate() {
                for (acc, x) in msd.iter_mut().zip(&o.curves[j]) {
                    *acc += x / trials;
                }
                for (acc, x) in per_node.iter_mut().zip(&o.window[j]) {
                    *acc += x / trials;
                }
                trial_ss.push(o.window[j].iter().sum::<f64>() / n as f64);
                if let Some(i) = o.onset[j] {
                    diverged.push(t);
                    onset = Some(onset.map_or(i, |x| x.min(i)));
                }
            }
            let network = per_node.iter().sum::<f64>() / n as f64;
            LearningCurve {
                strategy: kind,
                window_slope_db: window_slope(&msd, start),
                msd,
                steady_state_per_node: per_node,
                steady_state_network: network,
                trial_steady_state: trial_ss,
                diverged_trials: diverged,
                divergence_onset: onset,
                window_start: start,
            }
        })
        .collect();
    Ok(curves)
}

fn window_slope(msd: &[f64], start: usize) -> f64 {
    let ys: Vec<f64> = msd[start..].iter().map(|&x| db(x)).collect();
    if ys.len() < 2 || ys.iter().any(|y| !y.is_finite()) {
        return f64::NAN;
    }
    let n = ys.len() as f64;
    let mx = (n - 1.0) / 2.0;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, y) in ys.iter().enumerate() {
        let dx = i as f64 - mx;
        sxy += dx * (y - my);
        sxx += dx * dx;
    }
    100.0 * sxy / sxx
}

/// Theory next to simulation for one strategy.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonRow {
    pub strategy: StrategyKind,
    pub verdict: StabilityVerdict,
    /// Series evaluation; present for stable strategies.
    pub theory: Option<MsdReport>,
    /// Eigen-form evaluation; present for stable strategies on homogeneous
    /// networks with a diagonalizable combination matrix.
    pub theory_eigen: Option<MsdReport>,
    pub simulated: Option<LearningCurve>,
    /// Simulated minus theoretical network MSD in dB.
    pub network_gap_db: Option<f64>,
    pub per_node_gap_db: Option<Vec<f64>>,
}

/// Runs the stable strategies and compares their steady state against the
/// theoretical MSD. Unstable strategies are reported with their verdict
/// only and are not simulated.
pub fn steady_state_vs_theory(
    cfg: &ExperimentConfig,
    simulate: bool,
) -> Result<Vec<ComparisonRow>> {
    cfg.validate()?;
    let homogeneous = homogeneous_parts(&cfg.profiles);
    let es = match homogeneous {
        Some((_, ru)) => eigenstructure(&cfg.combination, ru).ok(),
        None => None,
    };
    let noise: Vec<f64> = cfg.profiles.iter().map(|p| p.noise_variance).collect();
    let mut rows = Vec::new();
    for &kind in &cfg.strategies {
        let rec = build_error_recursion(kind, &cfg.combination, &cfg.profiles)?;
        let verdict = rec.verdict()?;
        let (theory, theory_eigen) = if verdict.stable {
            let eig = match (&es, homogeneous) {
                (Some(es), Some((mu, _))) => {
                    Some(msd_eigenform(es, mu, &noise, kind, NetworkForm::Auto)?)
                }
                _ => None,
            };
            (Some(msd_series(&rec)?), eig)
        } else {
            (None, None)
        };
        rows.push(ComparisonRow {
            strategy: kind,
            verdict,
            theory,
            theory_eigen,
            simulated: None,
            network_gap_db: None,
            per_node_gap_db: None,
        });
    }
    if !simulate {
        return Ok(rows);
    }
    let stable: Vec<StrategyKind> = rows
        .iter()
        .filter(|r| r.verdict.stable)
        .map(|r| r.strategy)
        .collect();
    if stable.is_empty() {
        return Ok(rows);
    }
    let sim_cfg = ExperimentConfig {
        strategies: stable,
        ..cfg.clone()
    };
    let curves = run_experiment(&sim_cfg)?;
    for curve in curves {
        let row = rows
            .iter_mut()
            .find(|r| r.strategy == curve.strategy)
            .expect("simulated a selected strategy");
        if let Some(th) = &row.theory {
            row.network_gap_db = Some(curve.steady_state_db() - th.network_db());
            row.per_node_gap_db = Some(
                curve
                    .steady_state_per_node
                    .iter()
                    .zip(&th.per_node)
                    .map(|(s, t)| db(*s) - db(*t))
                    .collect(),
            );
        }
        row.simulated = Some(curve);
    }
    Ok(rows)
}
