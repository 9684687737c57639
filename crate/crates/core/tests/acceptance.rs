//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::fs;
use std::path::Path;
use std::time::Instant;

use dfrc_core::closedform::{
    closed_form_waveform, directional_covariance, omni_covariance, sector_pattern, CovarianceTarget,
};
use dfrc_core::experiment::{emit_outputs, run_experiment, Design, ExperimentConfig, ExperimentReport};
use dfrc_core::manifold::ManifoldSpec;
use dfrc_core::metrics::{mui_power, objective, waveform_covariance, StackedProblem, Weights};
use dfrc_core::model::{
    complex_gaussian, generate_channel, generate_symbols, steering_vector, stream_rng, CMat, Constellation,
    EchoScene, WaveformMatrix,
};
use dfrc_core::radar::{matched_filter, random_clutter_scene, simulate_echo};
use dfrc_core::rcg::{euclidean_gradient, solve, InitialPoint, RcgConfig};
use nalgebra::QR;
use num_complex::Complex64;
use rand::Rng;

const N: usize = 16;
const K: usize = 4;
const L: usize = 100;
const P: usize = 8;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn gaussian(rows: usize, cols: usize, rng: &mut impl Rng) -> CMat {
    CMat::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

fn directional_target() -> CovarianceTarget {
    let (grid, desired) = sector_pattern(5.0);
    directional_covariance(N, 1.0, &grid, &desired).unwrap().target
}

/// Full-scale (N=16, K=4, L=100, P=8) instance warm-started from the closed form.
fn instance(target: &CovarianceTarget, seed: u64) -> (StackedProblem, ManifoldSpec, WaveformMatrix) {
    let h = generate_channel(K, N, seed).unwrap();
    let s = generate_symbols(K, L, Constellation::Qpsk, seed).unwrap();
    let x0 = closed_form_waveform(&h, &s, target, L).unwrap().waveform;
    let prob = StackedProblem::new(&h, &s, &x0, Weights::default(), P).unwrap();
    (prob, ManifoldSpec::new(N, L, 1.0).unwrap(), x0)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = stream_rng(101, 0);
    let h_step = 1e-5;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let n = rng.random_range(1..=4);
        let l = rng.random_range(2..=8);
        let p = rng.random_range(1..=3.min(l - 1));
        let k = rng.random_range(1..=3);
        let w = Weights::new(
            rng.random_range(0.05..1.0),
            rng.random_range(0.05..1.0),
            rng.random_range(0.05..1.0),
        )
        .unwrap();
        let h = dfrc_core::ChannelMatrix::new(gaussian(k, n, &mut rng)).unwrap();
        let s = generate_symbols(k, l, Constellation::Qpsk, rng.random()).unwrap();
        let x0 = WaveformMatrix::new(gaussian(n, l, &mut rng)).unwrap();
        let prob = StackedProblem::new(&h, &s, &x0, w, p).unwrap();
        let x = gaussian(n, l, &mut rng);
        let mut delta = gaussian(n, l, &mut rng);
        delta /= Complex64::from(delta.norm());

        let g = euclidean_gradient(&WaveformMatrix::new(x.clone()).unwrap(), &prob).unwrap();
        let analytic: f64 = g.iter().zip(delta.iter()).map(|(a, b)| (a.conj() * b).re).sum();
        let f = |m: CMat| objective(&WaveformMatrix::new(m).unwrap(), &prob).unwrap();
        let step = &delta * Complex64::from(h_step);
        let fd = (f(&x + &step) - f(&x - &step)) / (2.0 * h_step);
        worst = worst.max((analytic - fd).abs() / g.norm());
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst < 1e-6 && secs < 5.0,
        format!("worst relative error {worst:.2e} over 20 instances (< 1e-6), {secs:.2} s (< 5 s)"),
    )
}

fn criterion_2() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut iters = Vec::new();
    for (name, target) in [
        ("omni", omni_covariance(N, 1.0).unwrap()),
        ("directional", directional_target()),
    ] {
        let (prob, spec, x0) = instance(&target, 1);
        let (x, trace) = solve(&prob, &spec, &RcgConfig::default(), &InitialPoint::Warm(x0)).unwrap();
        worst = trace.records.iter().map(|r| r.feasibility).fold(worst, f64::max);
        worst = worst.max(x.feasibility_residual(1.0));
        iters.push(format!("{name} {} iterates", trace.records.len()));
    }
    outcome(
        worst < 1e-10,
        format!(
            "max relative row-power deviation {worst:.2e} (< 1e-10) across {}",
            iters.join(", ")
        ),
    )
}

/// Random feasible covariance: Gram matrix rescaled to the required diagonal.
fn random_target(rng: &mut impl Rng) -> CovarianceTarget {
    let g = gaussian(N, N, rng);
    let r = &g * g.adjoint();
    let d = CMat::from_diagonal(
        &r.diagonal()
            .map(|v| Complex64::from((1.0 / N as f64 / v.re).sqrt())),
    );
    let mut r = &d * r * &d;
    for i in 0..N {
        r[(i, i)] = Complex64::from(1.0 / N as f64);
    }
    let r = (&r + r.adjoint()) * Complex64::from(0.5);
    CovarianceTarget::new(r, 1.0).unwrap()
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut rng = stream_rng(103, 0);
    let mut worst_residual: f64 = 0.0;
    let mut violations = 0;
    for t in 0..100u64 {
        let target = random_target(&mut rng);
        let h = generate_channel(K, N, 1000 + t).unwrap();
        let s = generate_symbols(K, L, Constellation::Qpsk, 1000 + t).unwrap();
        let sol = closed_form_waveform(&h, &s, &target, L).unwrap();
        let x0 = &sol.waveform;
        let r = target.as_matrix();
        worst_residual = worst_residual.max((waveform_covariance(x0) - r).norm() / r.norm());
        let mui0 = mui_power(&h, x0, &s).unwrap();

        // any other X with (1/L) X X^H = R_d has the form sqrt(L)·F·U with U
        // having orthonormal rows
        let f = r
            .clone()
            .cholesky()
            .expect("random Gram targets are full rank")
            .l();
        for _ in 0..100 {
            let q = QR::new(gaussian(L, N, &mut rng)).q();
            let u = q.adjoint();
            let alt = WaveformMatrix::new(&f * u * Complex64::from((L as f64).sqrt())).unwrap();
            if mui_power(&h, &alt, &s).unwrap() < mui0 * (1.0 - 1e-12) {
                violations += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst_residual < 1e-9 && violations == 0 && secs < 30.0,
        format!(
            "worst covariance residual {worst_residual:.2e} (< 1e-9), {violations} of 10000 alternatives beat the \
             closed-form MUI, {secs:.1} s (< 30 s)"
        ),
    )
}

fn criterion_4() -> Outcome {
    let cfg = RcgConfig {
        k_max: 200,
        ..RcgConfig::default()
    };
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, target) in [
        ("omni", omni_covariance(N, 1.0).unwrap()),
        ("directional", directional_target()),
    ] {
        for seed in 1..=3 {
            let (prob, spec, x0) = instance(&target, seed);
            let start = Instant::now();
            let (_, trace) = solve(&prob, &spec, &cfg, &InitialPoint::Warm(x0)).unwrap();
            let secs = start.elapsed().as_secs_f64();
            let monotone = trace.records.windows(2).all(|w| w[1].objective <= w[0].objective);
            let last = trace.final_record().unwrap();
            let ok = last.grad_norm <= 1e-6 && monotone && secs < 60.0;
            pass &= ok;
            parts.push(format!(
                "{name}/seed {seed}: {} after {} iterations, grad {:.1e}{}",
                if ok { "ok" } else { "miss" },
                trace.iterations(),
                last.grad_norm,
                if monotone { "" } else { ", objective increased" }
            ));
        }
    }
    outcome(
        pass,
        format!("grad <= 1e-6 within 200 iterations; {}", parts.join("; ")),
    )
}

fn full_scale_experiment(design: Design) -> ExperimentReport {
    let cfg = ExperimentConfig {
        trials: 20,
        seed: 2024,
        design,
        snr_grid: (0..=10).map(|i| 2.0 * i as f64).collect(),
        ..ExperimentConfig::default()
    };
    run_experiment(&cfg).unwrap()
}

fn criterion_5(omni: &ExperimentReport, directional: &ExperimentReport, secs: f64) -> Outcome {
    let (o, d) = (omni.isl_reduction_db.mean, directional.isl_reduction_db.mean);
    let all = omni.trials.iter().chain(&directional.trials);
    let finite = all.clone().all(|t| t.isl_rcg > 0.0 && t.isl_closed_form > 0.0);
    outcome(
        o >= 8.0 && d >= 13.0 && finite && secs < 1800.0,
        format!(
            "mean ISL reduction omni {o:.2} dB (>= 8), directional {d:.2} dB (>= 13) over 20 trials each, {secs:.0} s"
        ),
    )
}

fn criterion_6(reports: &[(&str, &ExperimentReport)]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, r) in reports {
        let losing: Vec<String> = r
            .rate
            .iter()
            .filter(|p| p.rcg.mean.partial_cmp(&p.closed_form.mean) != Some(std::cmp::Ordering::Greater))
            .map(|p| format!("{}", p.snr_db))
            .collect();
        let monotone = r
            .rate
            .windows(2)
            .all(|w| w[1].rcg.mean > w[0].rcg.mean && w[1].closed_form.mean > w[0].closed_form.mean);
        let lo = r.rate.first().unwrap();
        let hi = r.rate.last().unwrap();
        pass &= losing.is_empty() && monotone;
        parts.push(format!(
            "{name}: RCG {:.3}..{:.3} vs closed form {:.3}..{:.3} bit/s/Hz, {}{}",
            lo.rcg.mean,
            hi.rcg.mean,
            lo.closed_form.mean,
            hi.closed_form.mean,
            if losing.is_empty() {
                "RCG ahead at every SNR".to_string()
            } else {
                format!("RCG not ahead at SNR {} dB", losing.join("/"))
            },
            if monotone {
                ""
            } else {
                ", rate not monotone in SNR"
            }
        ));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_7() -> Outcome {
    // clean single target
    let (_, _, x) = instance(&omni_covariance(N, 1.0).unwrap(), 7);
    let alpha = Complex64::new(0.8, -0.3);
    let theta = 20f64.to_radians();
    let scene = EchoScene {
        target_angle: theta,
        target_amplitude: alpha,
        scatterers: vec![],
        noise_power: 0.0,
    };
    let d = matched_filter(&simulate_echo(&scene, &x, 7).unwrap(), &x)
        .unwrap()
        .d;
    let a = steering_vector(theta, N).unwrap().entries;
    let expected = &a * a.adjoint() * waveform_covariance(&x) * alpha;
    let clean = (&d - expected).norm() / d.norm();

    let clutter = random_clutter_scene(10, P, 0.01, 77);
    let mut parts = vec![format!("clean-scene residual {clean:.2e} (< 1e-10)")];
    let mut pass = clean < 1e-10;
    for (name, target) in [
        ("omni", omni_covariance(N, 1.0).unwrap()),
        ("directional", directional_target()),
    ] {
        let mut wins = 0;
        for t in 0..50 {
            let (prob, spec, x0) = instance(&target, 500 + t);
            let (x, _) = solve(
                &prob,
                &spec,
                &RcgConfig::default(),
                &InitialPoint::Warm(x0.clone()),
            )
            .unwrap();
            let energy = |w: &WaveformMatrix| {
                matched_filter(&simulate_echo(&clutter, w, 78).unwrap(), w)
                    .unwrap()
                    .energy()
            };
            if energy(&x) < energy(&x0) {
                wins += 1;
            }
        }
        pass &= wins >= 40;
        parts.push(format!(
            "{name} clutter residual lower with RCG in {wins}/50 trials (>= 40)"
        ));
    }
    outcome(pass, parts.join("; "))
}

fn read_tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|e| e == "csv") {
                out.push((
                    p.strip_prefix(dir).unwrap().display().to_string(),
                    fs::read(&p).unwrap(),
                ));
            }
        }
    }
    out.sort();
    out
}

fn criterion_8() -> Outcome {
    let cfg = ExperimentConfig {
        trials: 4,
        seed: 99,
        design: Design::Directional,
        ..ExperimentConfig::default()
    };
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        emit_outputs(&run_experiment(&cfg).unwrap(), d.path()).unwrap();
    }
    let (a, b) = (read_tree(dirs[0].path()), read_tree(dirs[1].path()));
    let same = !a.is_empty() && a == b;
    outcome(
        same,
        format!("{} CSV files compared byte for byte across two runs", a.len()),
    )
}

fn main() {
    let mut results = Vec::new();
    let mut report = |id: usize, o: Outcome| {
        println!(
            "criterion {id}: {} - {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        results.push(o.pass);
    };
    report(1, criterion_1());
    report(2, criterion_2());
    report(3, criterion_3());
    report(4, criterion_4());
    let start = Instant::now();
    let omni = full_scale_experiment(Design::Omni);
    let directional = full_scale_experiment(Design::Directional);
    report(5, criterion_5(&omni, &directional, start.elapsed().as_secs_f64()));
    report(6, criterion_6(&[("omni", &omni), ("directional", &directional)]));
    report(7, criterion_7());
    report(8, criterion_8());
    let failed = results.iter().filter(|p| !**p).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
