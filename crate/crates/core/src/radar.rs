//! Echo model and matched-filter range compression for a single target in
//! range bin 0 with clutter spread over neighbouring bins.

use std::path::Path;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::io::{fmt_f64, write_csv};
use crate::model::{
    complex_gaussian, gaussian_matrix, shift_columns, steering_vector, stream_rng, CMat, EchoScene,
    Scatterer, WaveformMatrix,
};

/// Matched-filter output `D = (1/L) Y_R X^H`.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeAngleMap {
    pub d: CMat,
}

impl RangeAngleMap {
    pub fn energy(&self) -> f64 {
        self.d.norm_squared()
    }

    /// Writes `|D|` in dB as `row,col,magnitude_db`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let rows = (0..self.d.nrows()).flat_map(|i| {
            (0..self.d.ncols()).map(move |j| {
                vec![
                    i.to_string(),
                    j.to_string(),
                    fmt_f64(20.0 * self.d[(i, j)].norm().log10()),
                ]
            })
        });
        write_csv(path, "row,col,magnitude_db", rows)
    }
}

/// `α a(θ) a^H(θ) M`.
fn steer_project(theta: f64, amplitude: Complex64, m: &CMat) -> Result<CMat> {
    let a = steering_vector(theta, m.nrows())?.entries;
    let ah_m = a.adjoint() * m;
    Ok(&a * ah_m * amplitude)
}

/// Received radar block: target return, clutter returns delayed by their
/// range bins, and white complex Gaussian noise drawn from `seed`.
pub fn simulate_echo(scene: &EchoScene, x: &WaveformMatrix, seed: u64) -> Result<CMat> {
    let xm = x.as_matrix();
    let l = xm.ncols();
    scene.validate(l - 1)?;
    let mut y = steer_project(scene.target_angle, scene.target_amplitude, xm)?;
    for s in &scene.scatterers {
        y += steer_project(s.angle, s.amplitude, &shift_columns(xm, s.bin))?;
    }
    if scene.noise_power > 0.0 {
        let noise = gaussian_matrix(xm.nrows(), l, &mut stream_rng(seed, 3));
        y += noise * Complex64::from(scene.noise_power.sqrt());
    }
    Ok(y)
}

pub fn matched_filter(y: &CMat, x: &WaveformMatrix) -> Result<RangeAngleMap> {
    let xm = x.as_matrix();
    if y.shape() != xm.shape() {
        return Err(Error::invalid(format!(
            "echo is {}x{}, waveform is {}x{}",
            y.nrows(),
            y.ncols(),
            xm.nrows(),
            xm.ncols()
        )));
    }
    Ok(RangeAngleMap {
        d: y * xm.adjoint() / Complex64::from(xm.ncols() as f64),
    })
}

/// Clutter-only scene: `count` scatterers at uniform angles in (−90°, 90°),
/// uniform nonzero bins within `±max_lag`, unit-variance complex Gaussian
/// amplitudes.
pub fn random_clutter_scene(count: usize, max_lag: usize, noise_power: f64, seed: u64) -> EchoScene {
    let mut rng = stream_rng(seed, 4);
    let scatterers = (0..count)
        .map(|_| {
            let mag = rng.random_range(1..=max_lag) as isize;
            let bin = if rng.random::<bool>() { mag } else { -mag };
            Scatterer {
                bin,
                angle: rng.random_range(-std::f64::consts::FRAC_PI_2..std::f64::consts::FRAC_PI_2),
                amplitude: complex_gaussian(&mut rng),
            }
        })
        .collect();
    EchoScene {
        target_angle: 0.0,
        target_amplitude: Complex64::new(0.0, 0.0),
        scatterers,
        noise_power,
    }
}
