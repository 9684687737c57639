use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use dfrc_core::closedform::{closed_form_waveform, sector_pattern};
use dfrc_core::experiment::{emit_outputs, run_experiment, write_trace, Design, ExperimentConfig, Start};
use dfrc_core::io::{fmt_f64, read_matrix, write_csv, write_matrix};
use dfrc_core::manifold::ManifoldSpec;
use dfrc_core::metrics::{beampattern, sidelobe_profile, waveform_covariance, StackedProblem, Weights};
use dfrc_core::model::{ChannelMatrix, Constellation, SymbolMatrix, WaveformMatrix};
use dfrc_core::plot::{LinePlot, Series};
use dfrc_core::rcg::{solve, InitialPoint, RcgConfig};
use dfrc_core::Error;

const EXIT_INVALID: u8 = 2;
const EXIT_STALL: u8 = 3;

/// DFRC waveform synthesis on the complex oblique manifold.
#[derive(Parser)]
#[command(name = "dfrc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance read from matrix files; writes the waveform and trace.
    Solve(SolveArgs),
    /// Monte-Carlo experiment: rate curves, beampatterns, sidelobe profiles.
    Experiment(ExperimentArgs),
    /// Beampattern of a waveform on a 1 degree grid over [-90, 90].
    Beampattern(AnalysisArgs),
    /// Per-lag normalized sidelobe levels of a waveform.
    Sidelobes(SidelobeArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// K x N channel matrix.
    #[arg(long)]
    channel: PathBuf,
    /// K x L QPSK symbol matrix.
    #[arg(long)]
    symbols: PathBuf,
    /// Reference waveform X0; defaults to the closed-form design for --design.
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Radar target: omni, directional, or a covariance matrix file.
    #[arg(long, default_value = "omni")]
    design: String,
    /// Maximum sidelobe lag P.
    #[arg(long, default_value_t = 8)]
    max_lag: usize,
    #[arg(long, default_value_t = 1.0)]
    total_power: f64,
    #[arg(long, default_value_t = Weights::default().rho1)]
    rho1: f64,
    #[arg(long, default_value_t = Weights::default().rho2)]
    rho2: f64,
    #[arg(long, default_value_t = Weights::default().rho3)]
    rho3: f64,
    /// warm (from the reference) or random.
    #[arg(long, default_value = "warm")]
    start: String,
    /// Seed for a random start.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = RcgConfig::default().epsilon)]
    epsilon: f64,
    #[arg(long, default_value_t = RcgConfig::default().k_max)]
    k_max: usize,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    /// TOML config file; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// omni, directional, or a covariance matrix file.
    #[arg(long)]
    design: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    /// warm or random.
    #[arg(long)]
    start: Option<String>,
}

#[derive(Args)]
struct AnalysisArgs {
    /// N x L waveform matrix.
    #[arg(long)]
    waveform: PathBuf,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also render an SVG plot here.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct SidelobeArgs {
    #[command(flatten)]
    common: AnalysisArgs,
    #[arg(long, default_value_t = 8)]
    max_lag: usize,
}

/// Raised when the solver or the experiment stalls.
#[derive(Debug)]
struct Stalled(String);

impl std::fmt::Display for Stalled {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Stalled {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Beampattern(a) => cmd_beampattern(a),
        Command::Sidelobes(a) => cmd_sidelobes(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<Stalled>().is_some() {
        return EXIT_STALL;
    }
    match e.downcast_ref::<Error>() {
        Some(Error::Io { .. }) | None => 1,
        Some(_) => EXIT_INVALID,
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    Ok(())
}

fn cmd_solve(a: SolveArgs) -> Result<()> {
    let design: Design = a.design.parse()?;
    let start: Start = a.start.parse()?;
    let h = ChannelMatrix::new(read_matrix(&a.channel)?)?;
    let s = SymbolMatrix::new(read_matrix(&a.symbols)?, Constellation::Qpsk)?;
    let (n, l) = (h.n_antennas(), s.block_len());
    let cfg = ExperimentConfig {
        n_antennas: n,
        n_users: h.n_users(),
        block_len: l,
        max_lag: a.max_lag,
        total_power: a.total_power,
        rho1: a.rho1,
        rho2: a.rho2,
        rho3: a.rho3,
        design,
        start,
        seed: a.seed,
        rcg: RcgConfig {
            epsilon: a.epsilon,
            k_max: a.k_max,
            ..RcgConfig::default()
        },
        ..ExperimentConfig::default()
    };
    cfg.validate()?;
    let reference = match &a.reference {
        Some(p) => WaveformMatrix::new(read_matrix(p)?)?,
        None => closed_form_waveform(&h, &s, &cfg.target()?, l)?.waveform,
    };
    let prob = StackedProblem::new(&h, &s, &reference, cfg.weights(), cfg.max_lag)?;
    let spec = ManifoldSpec::new(n, l, cfg.total_power)?;
    let init = match start {
        Start::Warm => InitialPoint::Warm(reference.clone()),
        Start::Random => InitialPoint::Random(a.seed),
    };
    let (x, trace) = solve(&prob, &spec, &cfg.rcg, &init)?;

    create_dir(&a.out)?;
    write_matrix(&a.out.join("waveform.txt"), x.as_matrix())?;
    if a.reference.is_none() {
        write_matrix(&a.out.join("reference.txt"), reference.as_matrix())?;
    }
    write_trace(&trace, &a.out.join("trace.csv"))?;
    LinePlot::new("Convergence", "iteration", "gradient norm")
        .log_y()
        .with(Series::new(
            "RCG",
            trace
                .records
                .iter()
                .map(|r| (r.iter as f64, r.grad_norm))
                .collect(),
        ))
        .write(&a.out.join("trace.svg"))?;

    let last = trace.final_record().expect("trace is never empty");
    println!(
        "iterations {} objective {} grad_norm {} converged {}",
        trace.iterations(),
        fmt_f64(last.objective),
        fmt_f64(last.grad_norm),
        trace.converged
    );
    if trace.stalled {
        return Err(Stalled(format!(
            "line search stalled after {} iterations",
            trace.iterations()
        ))
        .into());
    }
    Ok(())
}

fn cmd_experiment(a: ExperimentArgs) -> Result<()> {
    let mut cfg = match &a.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    if let Some(d) = &a.design {
        cfg.design = d.parse()?;
    }
    if let Some(t) = a.trials {
        cfg.trials = t;
    }
    if let Some(s) = &a.start {
        cfg.start = s.parse()?;
    }
    let report = run_experiment(&cfg)?;
    create_dir(&a.out)?;
    emit_outputs(&report, &a.out)?;
    println!(
        "trials {} isl_reduction_db {:.3} stall_fraction {} wall_time_s {:.2}",
        report.trials.len(),
        report.isl_reduction_db.mean,
        report.stall_fraction,
        report.wall_time_s
    );
    if report.degraded {
        return Err(Stalled(format!(
            "{:.0}% of trials stalled; report written with the degraded flag",
            100.0 * report.stall_fraction
        ))
        .into());
    }
    Ok(())
}

fn emit_table(out: Option<&Path>, header: &str, rows: Vec<Vec<String>>) -> Result<()> {
    match out {
        Some(p) => write_csv(p, header, rows)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{header}")?;
            for r in rows {
                writeln!(stdout, "{}", r.join(","))?;
            }
        }
    }
    Ok(())
}

fn cmd_beampattern(a: AnalysisArgs) -> Result<()> {
    let x = WaveformMatrix::new(read_matrix(&a.waveform)?)?;
    let (angles, _) = sector_pattern(1.0);
    let g = beampattern(&waveform_covariance(&x), &angles)?;
    let deg: Vec<f64> = angles.iter().map(|t| t.to_degrees().round()).collect();
    let rows = deg
        .iter()
        .zip(&g)
        .map(|(t, v)| vec![fmt_f64(*t), fmt_f64(*v)])
        .collect();
    emit_table(a.out.as_deref(), "angle_deg,gain", rows)?;
    if let Some(svg) = &a.svg {
        LinePlot::new("Transmit beampattern", "angle (deg)", "gain")
            .with(Series::new("waveform", deg.into_iter().zip(g).collect()))
            .write(svg)
            .with_context(|| format!("writing {}", svg.display()))?;
    }
    Ok(())
}

fn cmd_sidelobes(a: SidelobeArgs) -> Result<()> {
    let x = WaveformMatrix::new(read_matrix(&a.common.waveform)?)?;
    let profile = sidelobe_profile(&x, a.max_lag)?;
    let rows = profile
        .iter()
        .map(|(p, db)| vec![p.to_string(), fmt_f64(*db)])
        .collect();
    emit_table(a.common.out.as_deref(), "lag,level_db", rows)?;
    if let Some(svg) = &a.common.svg {
        LinePlot::new("Range sidelobe level", "lag", "level (dB)")
            .with(Series::new(
                "waveform",
                profile.iter().map(|(p, db)| (*p as f64, *db)).collect(),
            ))
            .write(svg)?;
    }
    Ok(())
}
