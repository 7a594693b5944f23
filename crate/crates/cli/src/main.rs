use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use adaptnet::config::Scenario;
use adaptnet::experiment::{run_experiment, steady_state_vs_theory, ComparisonRow};
use adaptnet::msd::{db, msd_series};
use adaptnet::signal::NodeProfile;
use adaptnet::spectra::{analyze, build_error_recursion, StabilityReport};
use adaptnet::twonode::{
    condition_map, consensus_instability_condition, diffusion_stabilization_range,
    individual_msd_conditions, msd_region_classify, region_map, TwoNodeConfig, DEFAULT_GRID,
};
use adaptnet::{Error, StrategyKind};
use clap::{Args, Parser, Subcommand};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(
    name = "adaptnet",
    version,
    about = "Adaptive network estimation laboratory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stability report: spectral radii, verdicts and step-size bounds.
    Analyze {
        config: PathBuf,
        /// Also write the report as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Exit with status 3 if any strategy is unstable.
        #[arg(long)]
        strict: bool,
    },
    /// Monte Carlo learning curves as CSV (iteration, strategy, msd_db).
    Simulate {
        config: PathBuf,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Shift each curve so its peak sits at 0 dB.
        #[arg(long)]
        normalize: bool,
    },
    /// Theory against simulation, network and per-node MSD in dB.
    Compare {
        config: PathBuf,
        /// Per-node MSD CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Skip the simulation.
        #[arg(long)]
        theory_only: bool,
    },
    /// Two-node closed forms and region maps.
    TwoNode(TwoNodeArgs),
}

#[derive(Args)]
struct TwoNodeArgs {
    #[arg(long, default_value_t = 0.4)]
    mu_sigma1: f64,
    #[arg(long, default_value_t = 0.4)]
    mu_sigma2: f64,
    #[arg(long, default_value_t = 0.5)]
    a: f64,
    #[arg(long, default_value_t = 0.5)]
    b: f64,
    /// Noise ratio σ²_v1 / σ²_v2.
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    /// Write the (a, b, region) map for homogeneous μσ² = mu_sigma1.
    #[arg(long)]
    region_map: Option<PathBuf>,
    /// Write the individual-MSD condition map for noise ratio t.
    #[arg(long)]
    condition_map: Option<PathBuf>,
    /// Add a certified step-size column to the condition map.
    #[arg(long)]
    mu0: bool,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.class());
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e.class() {
        "config" | "invalid-input" | "dimension" | "node" | "io" => 2,
        "stability" => 3,
        _ => 1,
    }
}

fn run(cmd: Command) -> adaptnet::Result<()> {
    match cmd {
        Command::Analyze {
            config,
            csv,
            strict,
        } => cmd_analyze(&config, csv.as_deref(), strict),
        Command::Simulate {
            config,
            out,
            normalize,
        } => cmd_simulate(&config, out.as_deref(), normalize),
        Command::Compare {
            config,
            csv,
            theory_only,
        } => cmd_compare(&config, csv.as_deref(), theory_only),
        Command::TwoNode(args) => cmd_two_node(&args),
    }
}

fn csv_preamble(seed: Option<u64>) -> String {
    match seed {
        Some(s) => format!("# adaptnet {VERSION} seed={s}\n"),
        None => format!("# adaptnet {VERSION} seed=none\n"),
    }
}

fn fmt_bound(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.6}")
    } else {
        "inf".into()
    }
}

fn cmd_analyze(path: &Path, csv: Option<&Path>, strict: bool) -> adaptnet::Result<()> {
    let sc = Scenario::from_path(path)?;
    let report = analyze(&sc.combination, &sc.profiles)?;
    let mut out = io::stdout().lock();
    print_stability(&mut out, &report)?;
    if let Some(p) = csv {
        let mut s = csv_preamble(Some(sc.seed));
        s.push_str("strategy,spectral_radius,stable,margin\n");
        for (k, v) in &report.verdicts {
            s.push_str(&format!(
                "{},{:.12},{},{:.12}\n",
                k.name(),
                v.spectral_radius,
                v.stable,
                v.margin
            ));
        }
        fs::write(p, s)?;
    }
    if strict {
        if let Some((k, v)) = report.verdicts.iter().find(|(_, v)| !v.stable) {
            return Err(Error::Unstable {
                rho: v.spectral_radius,
                detail: format!("{k} is mean-square unstable"),
            });
        }
    }
    Ok(())
}

fn print_stability(out: &mut impl Write, report: &StabilityReport) -> io::Result<()> {
    writeln!(
        out,
        "{:<10} {:>14} {:>9} {:>12}",
        "strategy", "rho(B)", "verdict", "margin"
    )?;
    for (k, v) in &report.verdicts {
        let verdict = if v.stable { "stable" } else { "unstable" };
        writeln!(
            out,
            "{:<10} {:>14.9} {:>9} {:>12.3e}",
            k.name(),
            v.spectral_radius,
            verdict,
            v.margin
        )?;
    }
    writeln!(out)?;
    let ncop = report
        .noncoop_bounds
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    writeln!(
        out,
        "non-coop step bound      min_k 2/lambda_max(R_k) = {}",
        fmt_bound(ncop)
    )?;
    match &report.consensus_bounds {
        Some(b) => {
            let m = b.iter().cloned().fold(f64::INFINITY, f64::min);
            writeln!(out, "consensus step bound     min_k = {}", fmt_bound(m))?
        }
        None => writeln!(out, "consensus step bound     n/a (A not symmetric)")?,
    }
    match report.diffusion_equality_bound {
        Some(b) => writeln!(out, "consensus/diffusion tie  mu = {}", fmt_bound(b))?,
        None => writeln!(out, "consensus/diffusion tie  n/a (nodes not homogeneous)")?,
    }
    Ok(())
}

fn cmd_simulate(path: &Path, out: Option<&Path>, normalize: bool) -> adaptnet::Result<()> {
    let sc = Scenario::from_path(path)?;
    let curves = run_experiment(&sc.experiment())?;
    let mut s = csv_preamble(Some(sc.seed));
    s.push_str("iteration,strategy,msd_db\n");
    for c in &curves {
        let d = if normalize {
            c.normalized_db()
        } else {
            c.msd_db()
        };
        for (i, v) in d.iter().enumerate() {
            s.push_str(&format!("{},{},{:.6}\n", i + 1, c.strategy.name(), v));
        }
    }
    match out {
        Some(p) => fs::write(p, s)?,
        None => io::stdout().lock().write_all(s.as_bytes())?,
    }
    for c in &curves {
        if c.diverged() {
            eprintln!(
                "note: {} diverged in {} of {} trials (first at iteration {})",
                c.strategy,
                c.diverged_trials.len(),
                sc.trials,
                c.divergence_onset.map_or(0, |i| i + 1)
            );
        }
    }
    Ok(())
}

fn min_median_max(v: &[f64]) -> (f64, f64, f64) {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    let med = if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    };
    (s[0], med, s[n - 1])
}

fn cmd_compare(path: &Path, csv: Option<&Path>, theory_only: bool) -> adaptnet::Result<()> {
    let sc = Scenario::from_path(path)?;
    let rows = steady_state_vs_theory(&sc.experiment(), !theory_only)?;
    let mut out = io::stdout().lock();
    writeln!(
        out,
        "{:<10} {:>9} {:>11} {:>11} {:>11} {:>11} {:>11} {:>9}",
        "strategy", "verdict", "theory dB", "node min", "node med", "node max", "sim dB", "gap dB"
    )?;
    for r in &rows {
        let verdict = if r.verdict.stable {
            "stable"
        } else {
            "unstable"
        };
        let (th, lo, med, hi) = match &r.theory {
            Some(t) => {
                let (lo, med, hi) = min_median_max(&t.per_node_db());
                (t.network_db(), lo, med, hi)
            }
            None => (f64::INFINITY, f64::INFINITY, f64::INFINITY, f64::INFINITY),
        };
        let sim = r
            .simulated
            .as_ref()
            .map_or(f64::NAN, |c| c.steady_state_db());
        let gap = r.network_gap_db.unwrap_or(f64::NAN);
        writeln!(
            out,
            "{:<10} {:>9} {:>11.3} {:>11.3} {:>11.3} {:>11.3} {:>11.3} {:>9.3}",
            r.strategy.name(),
            verdict,
            th,
            lo,
            med,
            hi,
            sim,
            gap
        )?;
    }
    writeln!(out)?;
    for line in ordering_lines(&rows) {
        writeln!(out, "{line}")?;
    }
    if let Some(p) = csv {
        let mut s = csv_preamble(Some(sc.seed));
        s.push_str("node,strategy,theory_db,simulated_db\n");
        for r in &rows {
            let Some(t) = &r.theory else { continue };
            let sim = r.simulated.as_ref().map(|c| c.steady_state_per_node_db());
            for (k, th) in t.per_node_db().iter().enumerate() {
                let sv = sim
                    .as_ref()
                    .map_or(String::new(), |v| format!("{:.6}", v[k]));
                s.push_str(&format!(
                    "{},{},{:.6},{}\n",
                    k + 1,
                    r.strategy.name(),
                    th,
                    sv
                ));
            }
        }
        fs::write(p, s)?;
    }
    Ok(())
}

fn ordering_lines(rows: &[ComparisonRow]) -> Vec<String> {
    let net = |k: StrategyKind| {
        rows.iter()
            .find(|r| r.strategy == k)
            .and_then(|r| r.theory.as_ref())
            .map(|t| t.network)
    };
    let pairs = [
        (StrategyKind::AtcDiffusion, StrategyKind::CtaDiffusion),
        (StrategyKind::CtaDiffusion, StrategyKind::NonCooperative),
        (StrategyKind::AtcDiffusion, StrategyKind::Consensus),
    ];
    pairs
        .iter()
        .filter_map(|&(x, y)| {
            let (a, b) = (net(x)?, net(y)?);
            let holds = if a <= b { "holds" } else { "violated" };
            Some(format!(
                "theory {x} <= {y}: {holds} ({:.3} dB vs {:.3} dB)",
                db(a),
                db(b)
            ))
        })
        .collect()
}

/// Reference noise level for single-point MSD values; `t` scales node 1.
const TWO_NODE_NOISE: f64 = 0.01;

fn cmd_two_node(args: &TwoNodeArgs) -> adaptnet::Result<()> {
    if let Some(p) = &args.region_map {
        let mut s = csv_preamble(None);
        s.push_str("a,b,region\n");
        for pt in region_map(args.mu_sigma1, args.grid)? {
            s.push_str(&format!("{},{},{}\n", pt.a, pt.b, pt.label));
        }
        fs::write(p, s)?;
    }
    if let Some(p) = &args.condition_map {
        let mut s = csv_preamble(None);
        s.push_str("a,b,noise_contraction,perron_condition,mu0\n");
        for pt in condition_map(args.t, args.grid, args.mu0)? {
            let mu0 = pt.mu0.map_or(String::new(), |m| format!("{m:.6e}"));
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                pt.a, pt.b, pt.noise_contraction, pt.perron_condition, mu0
            ));
        }
        fs::write(p, s)?;
    }
    if args.region_map.is_some() || args.condition_map.is_some() {
        return Ok(());
    }

    let cfg = TwoNodeConfig::new(args.a, args.b, args.mu_sigma1, args.mu_sigma2, args.t)?;
    let profiles = vec![
        NodeProfile::diagonal(args.mu_sigma1, &[1.0], TWO_NODE_NOISE * args.t)?,
        NodeProfile::diagonal(args.mu_sigma2, &[1.0], TWO_NODE_NOISE)?,
    ];
    let a = cfg.combination();
    let mut out = io::stdout().lock();
    writeln!(
        out,
        "a = {}, b = {}, mu*sigma^2 = ({}, {}), t = {}",
        args.a, args.b, args.mu_sigma1, args.mu_sigma2, args.t
    )?;
    writeln!(
        out,
        "{:<10} {:>14} {:>9} {:>12}",
        "strategy", "rho(B)", "verdict", "MSD dB"
    )?;
    for kind in StrategyKind::ALL {
        let rec = build_error_recursion(kind, &a, &profiles)?;
        let v = rec.verdict()?;
        let msd = if v.stable {
            msd_series(&rec)?.network_db()
        } else {
            f64::INFINITY
        };
        let verdict = if v.stable { "stable" } else { "unstable" };
        writeln!(
            out,
            "{:<10} {:>14.9} {:>9} {:>12.3}",
            kind.name(),
            v.spectral_radius,
            verdict,
            msd
        )?;
    }
    match consensus_instability_condition(&cfg) {
        Ok(c) => writeln!(out, "consensus instability condition: {c}")?,
        Err(e) => writeln!(out, "consensus instability condition: n/a ({e})")?,
    }
    match diffusion_stabilization_range(args.mu_sigma1, args.mu_sigma2) {
        Ok(r) => writeln!(
            out,
            "diffusion-stable range of a when a + b = 1: [{:.6}, {:.6})",
            r.start, r.end
        )?,
        Err(e) => writeln!(out, "diffusion-stable range: n/a ({e})")?,
    }
    if (args.mu_sigma1 - args.mu_sigma2).abs() < 1e-15 {
        match msd_region_classify(args.a, args.b, args.mu_sigma1) {
            Ok(r) => writeln!(out, "network MSD region: {r}")?,
            Err(e) => writeln!(out, "network MSD region: n/a ({e})")?,
        }
    }
    let c = individual_msd_conditions(&cfg);
    writeln!(
        out,
        "individual conditions: noise contraction {}, Perron condition {}, det {:.6e}",
        c.noise_contraction, c.perron_condition, c.det
    )?;
    Ok(())
}
