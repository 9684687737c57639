//! Monte-Carlo harness: per-trial closed-form and RCG designs, aggregated
//! rate curves, beampatterns and sidelobe profiles, and their CSV/SVG
//! rendering.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closedform::{
    closed_form_waveform, directional_covariance, omni_covariance, sector_pattern, target_beampattern,
    CovarianceTarget,
};
use crate::error::{Error, Result};
use crate::io::{fmt_f64, read_matrix, write_csv};
use crate::manifold::ManifoldSpec;
use crate::metrics::{
    beampattern, isl_power, mui_power, sidelobe_profile, sum_rate_from_mui, to_db, waveform_covariance,
    StackedProblem, Weights,
};
use crate::model::{generate_channel, generate_symbols, stream_rng, Constellation, WaveformMatrix};
use crate::plot::{LinePlot, Series};
use crate::radar::{matched_filter, random_clutter_scene, simulate_echo};
use crate::rcg::{solve, InitialPoint, RcgConfig, SolveTrace};

/// Trial seeds are drawn from streams at and above this id so they never
/// collide with the per-purpose streams of the base seed.
const TRIAL_STREAM_BASE: u64 = 1 << 32;

pub const SNR_DEFINITION: &str =
    "per-user SNR = symbol power / N0 (dB); N0 is set from each grid point, MUI is treated as extra Gaussian noise";

/// Radar covariance target used for every trial.
#[derive(Debug, Clone, PartialEq)]
pub enum Design {
    Omni,
    /// Beampattern-matched covariance for a sector around broadside.
    Directional,
    /// Covariance read from a matrix text file.
    File(PathBuf),
}

impl FromStr for Design {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "omni" => Ok(Design::Omni),
            "directional" => Ok(Design::Directional),
            "" => Err(Error::Config(
                "design must be omni, directional or a file path".into(),
            )),
            path => Ok(Design::File(PathBuf::from(path))),
        }
    }
}

impl fmt::Display for Design {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Design::Omni => f.write_str("omni"),
            Design::Directional => f.write_str("directional"),
            Design::File(p) => write!(f, "{}", p.display()),
        }
    }
}

impl Serialize for Design {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Design {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Start {
    /// From the closed-form waveform of the same trial.
    #[default]
    Warm,
    Random,
}

impl FromStr for Start {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "warm" => Ok(Start::Warm),
            "random" => Ok(Start::Random),
            other => Err(Error::Config(format!(
                "start must be warm or random, got {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(rename = "N")]
    pub n_antennas: usize,
    #[serde(rename = "K")]
    pub n_users: usize,
    #[serde(rename = "L")]
    pub block_len: usize,
    #[serde(rename = "P")]
    pub max_lag: usize,
    #[serde(rename = "P_T")]
    pub total_power: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
    /// Per-user SNR points in dB.
    pub snr_grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub design: Design,
    /// Half width of the directional sector, degrees.
    pub sector_half_width_deg: f64,
    pub start: Start,
    /// Scatterers in the per-trial clutter scene.
    pub clutter_scatterers: usize,
    pub radar_noise_power: f64,
    pub rcg: RcgConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let w = Weights::default();
        Self {
            n_antennas: 16,
            n_users: 4,
            block_len: 100,
            max_lag: 8,
            total_power: 1.0,
            rho1: w.rho1,
            rho2: w.rho2,
            rho3: w.rho3,
            snr_grid: (0..=10).map(|i| 2.0 * i as f64).collect(),
            trials: 100,
            seed: 0,
            design: Design::Omni,
            sector_half_width_deg: 5.0,
            start: Start::Warm,
            clutter_scatterers: 10,
            radar_noise_power: 0.01,
            rcg: RcgConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a TOML config; a relative design path is taken relative to the
    /// config file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        if let Design::File(p) = &cfg.design {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    cfg.design = Design::File(dir.join(p));
                }
            }
        }
        Ok(cfg)
    }

    pub fn weights(&self) -> Weights {
        Weights {
            rho1: self.rho1,
            rho2: self.rho2,
            rho3: self.rho3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n_antennas == 0 || self.n_users == 0 {
            return bad("N and K must be >= 1".into());
        }
        if self.block_len < self.n_antennas {
            return bad(format!(
                "L = {} must be >= N = {}",
                self.block_len, self.n_antennas
            ));
        }
        if self.max_lag == 0 || self.max_lag >= self.block_len {
            return bad(format!("P must lie in 1..={}", self.block_len - 1));
        }
        if !(self.total_power > 0.0 && self.total_power.is_finite()) {
            return bad("P_T must be positive".into());
        }
        self.weights()
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        if self.trials == 0 {
            return bad("trials must be >= 1".into());
        }
        if self.snr_grid.is_empty() || self.snr_grid.iter().any(|s| !s.is_finite()) {
            return bad("snr_grid must be a non-empty list of finite values".into());
        }
        if !(self.sector_half_width_deg > 0.0 && self.sector_half_width_deg <= 90.0) {
            return bad("sector_half_width_deg must lie in (0, 90]".into());
        }
        if !(self.radar_noise_power >= 0.0) {
            return bad("radar_noise_power must be >= 0".into());
        }
        self.rcg.validate().map_err(|e| Error::Config(e.to_string()))
    }

    /// Seed of trial `t`, independent of the order trials are run in.
    pub fn trial_seed(&self, trial: usize) -> u64 {
        stream_rng(self.seed, TRIAL_STREAM_BASE + trial as u64).random()
    }

    /// Builds the radar covariance target for this config.
    pub fn target(&self) -> Result<CovarianceTarget> {
        match &self.design {
            Design::Omni => omni_covariance(self.n_antennas, self.total_power),
            Design::Directional => {
                let (grid, desired) = sector_pattern(self.sector_half_width_deg);
                Ok(directional_covariance(self.n_antennas, self.total_power, &grid, &desired)?.target)
            }
            Design::File(path) => {
                let r = read_matrix(path)?;
                if r.nrows() != self.n_antennas {
                    return Err(Error::Config(format!(
                        "covariance in {} is {}x{}, expected N = {}",
                        path.display(),
                        r.nrows(),
                        r.ncols(),
                        self.n_antennas
                    )));
                }
                CovarianceTarget::new(r, self.total_power)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Sample standard deviation (0 for a single trial).
    pub std: f64,
}

impl MeanStd {
    /// Summed in slice order so results do not depend on scheduling.
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self::default();
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub index: usize,
    pub seed: u64,
    pub mui_closed_form: f64,
    pub mui_rcg: f64,
    pub isl_closed_form: f64,
    pub isl_rcg: f64,
    pub iterations: usize,
    pub final_grad_norm: f64,
    pub converged: bool,
    pub stalled: bool,
    pub on_manifold: bool,
    pub beampattern_mse: f64,
    /// Matched-filter energy of a clutter-only echo.
    pub clutter_closed_form: f64,
    pub clutter_rcg: f64,
}

impl TrialResult {
    pub fn isl_reduction_db(&self) -> f64 {
        to_db(self.isl_closed_form / self.isl_rcg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub snr_db: f64,
    pub closed_form: MeanStd,
    pub rcg: MeanStd,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub rate: Vec<RatePoint>,
    pub angles_deg: Vec<f64>,
    /// Beampattern of the target covariance.
    pub reference_pattern: Vec<f64>,
    /// Trial-averaged beampatterns.
    pub closed_form_pattern: Vec<f64>,
    pub rcg_pattern: Vec<f64>,
    pub lags: Vec<isize>,
    /// Trial-averaged (in linear scale) sidelobe levels, dB.
    pub closed_form_sidelobes_db: Vec<f64>,
    pub rcg_sidelobes_db: Vec<f64>,
    pub isl_reduction_db: MeanStd,
    pub beampattern_mse: MeanStd,
    pub stall_fraction: f64,
    /// More than half of the trials stalled.
    pub degraded: bool,
    pub all_on_manifold: bool,
    /// Fraction of trials where the RCG waveform leaks less clutter.
    pub clutter_win_fraction: f64,
    pub trials: Vec<TrialResult>,
    pub traces: Vec<SolveTrace>,
    pub wall_time_s: f64,
}

struct TrialOutput {
    result: TrialResult,
    trace: SolveTrace,
    rcg_pattern: Vec<f64>,
    closed_form_pattern: Vec<f64>,
    closed_form_sidelobes: Vec<f64>,
    rcg_sidelobes: Vec<f64>,
}

fn linear_sidelobes(x: &WaveformMatrix, max_lag: usize) -> Result<Vec<f64>> {
    Ok(sidelobe_profile(x, max_lag)?
        .into_iter()
        .map(|(_, db)| 10f64.powf(db / 10.0))
        .collect())
}

fn run_trial(
    cfg: &ExperimentConfig,
    target: &CovarianceTarget,
    angles: &[f64],
    reference: &[f64],
    index: usize,
) -> Result<TrialOutput> {
    let seed = cfg.trial_seed(index);
    let (n, k, l, p) = (cfg.n_antennas, cfg.n_users, cfg.block_len, cfg.max_lag);
    let h = generate_channel(k, n, seed)?;
    let s = generate_symbols(k, l, Constellation::Qpsk, seed)?;
    let x0 = closed_form_waveform(&h, &s, target, l)?.waveform;
    let prob = StackedProblem::new(&h, &s, &x0, cfg.weights(), p)?;
    let spec = ManifoldSpec::new(n, l, cfg.total_power)?;
    let start = match cfg.start {
        Start::Warm => InitialPoint::Warm(x0.clone()),
        Start::Random => InitialPoint::Random(seed),
    };
    let (x, trace) = solve(&prob, &spec, &cfg.rcg, &start)?;

    let rcg_pattern = beampattern(&waveform_covariance(&x), angles)?;
    let closed_form_pattern = beampattern(&waveform_covariance(&x0), angles)?;
    let mse = rcg_pattern
        .iter()
        .zip(reference)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        / angles.len() as f64;

    let scene = random_clutter_scene(cfg.clutter_scatterers, p, cfg.radar_noise_power, seed);
    let clutter = |w: &WaveformMatrix| -> Result<f64> {
        Ok(matched_filter(&simulate_echo(&scene, w, seed)?, w)?.energy())
    };

    let last = trace.final_record().expect("trace holds the starting point");
    let result = TrialResult {
        index,
        seed,
        mui_closed_form: mui_power(&h, &x0, &s)?,
        mui_rcg: mui_power(&h, &x, &s)?,
        isl_closed_form: isl_power(&x0, p)?,
        isl_rcg: isl_power(&x, p)?,
        iterations: trace.iterations(),
        final_grad_norm: last.grad_norm,
        converged: trace.converged,
        stalled: trace.stalled,
        on_manifold: x.is_on_manifold(cfg.total_power),
        beampattern_mse: mse,
        clutter_closed_form: clutter(&x0)?,
        clutter_rcg: clutter(&x)?,
    };
    Ok(TrialOutput {
        result,
        trace,
        rcg_pattern,
        closed_form_pattern,
        closed_form_sidelobes: linear_sidelobes(&x0, p)?,
        rcg_sidelobes: linear_sidelobes(&x, p)?,
    })
}

fn column_mean(rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows.len() as f64;
    let mut out = vec![0.0; rows.first().map_or(0, Vec::len)];
    for r in rows {
        for (o, v) in out.iter_mut().zip(r) {
            *o += v;
        }
    }
    out.iter_mut().for_each(|o| *o /= n);
    out
}

/// Runs every trial (in parallel) and aggregates in trial order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let started = Instant::now();
    let target = cfg.target()?;
    let (angles, _) = sector_pattern(cfg.sector_half_width_deg);
    let reference = target_beampattern(&target, &angles)?;

    let outputs = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, &target, &angles, &reference, t))
        .collect::<Result<Vec<_>>>()?;

    let n_users = cfg.n_users;
    let symbol_power = Constellation::Qpsk.symbol_power();
    let mut rate = Vec::with_capacity(cfg.snr_grid.len());
    for &snr_db in &cfg.snr_grid {
        let n0 = symbol_power / 10f64.powf(snr_db / 10.0);
        let eval = |mui: f64| sum_rate_from_mui(mui, n_users, cfg.block_len, symbol_power, n0);
        let cf = outputs
            .iter()
            .map(|o| eval(o.result.mui_closed_form))
            .collect::<Result<Vec<_>>>()?;
        let rc = outputs
            .iter()
            .map(|o| eval(o.result.mui_rcg))
            .collect::<Result<Vec<_>>>()?;
        rate.push(RatePoint {
            snr_db,
            closed_form: MeanStd::of(&cf),
            rcg: MeanStd::of(&rc),
        });
    }

    let to_db_vec = |v: Vec<f64>| v.into_iter().map(to_db).collect::<Vec<_>>();
    let pick = |f: fn(&TrialOutput) -> &Vec<f64>| outputs.iter().map(|o| f(o).clone()).collect::<Vec<_>>();
    let closed_form_pattern = column_mean(&pick(|o| &o.closed_form_pattern));
    let rcg_pattern = column_mean(&pick(|o| &o.rcg_pattern));
    let closed_form_sidelobes_db = to_db_vec(column_mean(&pick(|o| &o.closed_form_sidelobes)));
    let rcg_sidelobes_db = to_db_vec(column_mean(&pick(|o| &o.rcg_sidelobes)));

    let p = cfg.max_lag as isize;
    let lags: Vec<isize> = (-p..=-1).chain(1..=p).collect();
    let trials: Vec<TrialResult> = outputs.iter().map(|o| o.result.clone()).collect();
    let n = trials.len() as f64;
    let stalls = trials.iter().filter(|t| t.stalled).count();
    let wins = trials
        .iter()
        .filter(|t| t.clutter_rcg < t.clutter_closed_form)
        .count();
    let isl: Vec<f64> = trials.iter().map(TrialResult::isl_reduction_db).collect();
    let mse: Vec<f64> = trials.iter().map(|t| t.beampattern_mse).collect();

    Ok(ExperimentReport {
        config: cfg.clone(),
        rate,
        angles_deg: angles.iter().map(|a| a.to_degrees().round()).collect(),
        reference_pattern: reference,
        closed_form_pattern,
        rcg_pattern,
        lags,
        closed_form_sidelobes_db,
        rcg_sidelobes_db,
        isl_reduction_db: MeanStd::of(&isl),
        beampattern_mse: MeanStd::of(&mse),
        stall_fraction: stalls as f64 / n,
        degraded: 2 * stalls > trials.len(),
        all_on_manifold: trials.iter().all(|t| t.on_manifold),
        clutter_win_fraction: wins as f64 / n,
        trials,
        traces: outputs.into_iter().map(|o| o.trace).collect(),
        wall_time_s: started.elapsed().as_secs_f64(),
    })
}

pub const RATE_HEADER: &str = "snr_db,closed_form_mean,closed_form_std,rcg_mean,rcg_std";
pub const BEAMPATTERN_HEADER: &str = "angle_deg,gain";
pub const SIDELOBES_HEADER: &str = "lag,level_db";
pub const SUMMARY_HEADER: &str = "metric,value";
pub const TRIALS_HEADER: &str =
    "trial,seed,mui_closed_form,mui_rcg,isl_closed_form,isl_rcg,isl_reduction_db,\
iterations,final_grad_norm,converged,stalled,on_manifold,beampattern_mse,clutter_closed_form,clutter_rcg";

#[derive(Serialize)]
struct Metadata<'a> {
    config: &'a ExperimentConfig,
    snr_definition: &'static str,
    wall_time_s: f64,
    isl_reduction_db: MeanStd,
    beampattern_mse: MeanStd,
    stall_fraction: f64,
    degraded: bool,
    all_on_manifold: bool,
    clutter_win_fraction: f64,
}

fn curve_rows(xs: impl Iterator<Item = String>, ys: &[f64]) -> Vec<Vec<String>> {
    xs.zip(ys).map(|(x, y)| vec![x, fmt_f64(*y)]).collect()
}

/// Writes every CSV, SVG and the JSON metadata into `out_dir`. Wall time
/// only appears in `report.json`, so the CSVs are reproducible byte for byte.
pub fn emit_outputs(report: &ExperimentReport, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let trace_dir = out_dir.join("trace");
    fs::create_dir_all(&trace_dir).map_err(|e| Error::io(&trace_dir, e))?;
    let mut written = Vec::new();
    let mut csv = |name: &str, header: &str, rows: Vec<Vec<String>>| -> Result<()> {
        let path = out_dir.join(name);
        write_csv(&path, header, rows)?;
        written.push(path);
        Ok(())
    };

    csv(
        "rate_curve.csv",
        RATE_HEADER,
        report
            .rate
            .iter()
            .map(|r| {
                [
                    r.snr_db,
                    r.closed_form.mean,
                    r.closed_form.std,
                    r.rcg.mean,
                    r.rcg.std,
                ]
                .iter()
                .map(|v| fmt_f64(*v))
                .collect()
            })
            .collect(),
    )?;
    let angles = || report.angles_deg.iter().map(|a| fmt_f64(*a));
    csv(
        "beampattern.csv",
        BEAMPATTERN_HEADER,
        curve_rows(angles(), &report.rcg_pattern),
    )?;
    csv(
        "beampattern_closed_form.csv",
        BEAMPATTERN_HEADER,
        curve_rows(angles(), &report.closed_form_pattern),
    )?;
    csv(
        "beampattern_reference.csv",
        BEAMPATTERN_HEADER,
        curve_rows(angles(), &report.reference_pattern),
    )?;
    let lags = || report.lags.iter().map(|p| p.to_string());
    csv(
        "sidelobes.csv",
        SIDELOBES_HEADER,
        curve_rows(lags(), &report.rcg_sidelobes_db),
    )?;
    csv(
        "sidelobes_closed_form.csv",
        SIDELOBES_HEADER,
        curve_rows(lags(), &report.closed_form_sidelobes_db),
    )?;
    csv(
        "trials.csv",
        TRIALS_HEADER,
        report
            .trials
            .iter()
            .map(|t| {
                vec![
                    t.index.to_string(),
                    t.seed.to_string(),
                    fmt_f64(t.mui_closed_form),
                    fmt_f64(t.mui_rcg),
                    fmt_f64(t.isl_closed_form),
                    fmt_f64(t.isl_rcg),
                    fmt_f64(t.isl_reduction_db()),
                    t.iterations.to_string(),
                    fmt_f64(t.final_grad_norm),
                    t.converged.to_string(),
                    t.stalled.to_string(),
                    t.on_manifold.to_string(),
                    fmt_f64(t.beampattern_mse),
                    fmt_f64(t.clutter_closed_form),
                    fmt_f64(t.clutter_rcg),
                ]
            })
            .collect(),
    )?;
    let summary = [
        ("trials", report.trials.len().to_string()),
        ("isl_reduction_db_mean", fmt_f64(report.isl_reduction_db.mean)),
        ("isl_reduction_db_std", fmt_f64(report.isl_reduction_db.std)),
        ("beampattern_mse_mean", fmt_f64(report.beampattern_mse.mean)),
        ("beampattern_mse_std", fmt_f64(report.beampattern_mse.std)),
        ("stall_fraction", fmt_f64(report.stall_fraction)),
        ("degraded", report.degraded.to_string()),
        ("all_on_manifold", report.all_on_manifold.to_string()),
        ("clutter_win_fraction", fmt_f64(report.clutter_win_fraction)),
    ];
    csv(
        "summary.csv",
        SUMMARY_HEADER,
        summary.into_iter().map(|(k, v)| vec![k.to_string(), v]).collect(),
    )?;

    for (t, trace) in report.traces.iter().enumerate() {
        let stem = trace_dir.join(format!("trial_{t:04}"));
        let path = stem.with_extension("csv");
        write_trace(trace, &path)?;
        written.push(path);
        let svg = stem.with_extension("svg");
        LinePlot::new(&format!("Trial {t} convergence"), "iteration", "gradient norm")
            .log_y()
            .with(Series::new(
                "RCG",
                trace
                    .records
                    .iter()
                    .map(|r| (r.iter as f64, r.grad_norm))
                    .collect(),
            ))
            .write(&svg)?;
        written.push(svg);
    }

    let mut svg = |name: &str, plot: LinePlot| -> Result<()> {
        let path = out_dir.join(name);
        plot.write(&path)?;
        written.push(path);
        Ok(())
    };
    let rate = |f: fn(&RatePoint) -> f64| report.rate.iter().map(|r| (r.snr_db, f(r))).collect();
    svg(
        "rate_curve.svg",
        LinePlot::new(
            "Average achievable sum-rate",
            "per-user SNR (dB)",
            "sum-rate (bit/s/Hz)",
        )
        .with(Series::new("closed form", rate(|r| r.closed_form.mean)))
        .with(Series::new("RCG", rate(|r| r.rcg.mean)).dashed()),
    )?;
    let pattern = |g: &[f64]| report.angles_deg.iter().copied().zip(g.iter().copied()).collect();
    svg(
        "beampattern.svg",
        LinePlot::new("Transmit beampattern", "angle (deg)", "gain")
            .with(Series::new("closed form", pattern(&report.closed_form_pattern)))
            .with(Series::new("RCG", pattern(&report.rcg_pattern)).dashed()),
    )?;
    let side = |v: &[f64]| {
        report
            .lags
            .iter()
            .map(|p| *p as f64)
            .zip(v.iter().copied())
            .collect()
    };
    svg(
        "sidelobes.svg",
        LinePlot::new("Normalized range sidelobe level", "lag", "level (dB)")
            .with(Series::new("closed form", side(&report.closed_form_sidelobes_db)))
            .with(Series::new("RCG", side(&report.rcg_sidelobes_db)).dashed()),
    )?;

    let meta = Metadata {
        config: &report.config,
        snr_definition: SNR_DEFINITION,
        wall_time_s: report.wall_time_s,
        isl_reduction_db: report.isl_reduction_db,
        beampattern_mse: report.beampattern_mse,
        stall_fraction: report.stall_fraction,
        degraded: report.degraded,
        all_on_manifold: report.all_on_manifold,
        clutter_win_fraction: report.clutter_win_fraction,
    };
    let path = out_dir.join("report.json");
    let json = serde_json::to_string_pretty(&meta).map_err(|e| Error::Config(e.to_string()))?;
    fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(written)
}

pub fn write_trace(trace: &SolveTrace, path: &Path) -> Result<()> {
    let rows = trace.records.iter().map(|r| {
        vec![
            r.iter.to_string(),
            fmt_f64(r.objective),
            fmt_f64(r.grad_norm),
            fmt_f64(r.step),
            fmt_f64(r.feasibility),
            fmt_f64(r.lambda),
        ]
    });
    write_csv(path, SolveTrace::CSV_HEADER, rows)
}
