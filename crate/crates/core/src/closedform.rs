//! Covariance targets and the closed-form MUI-optimal waveform under an
//! exact covariance constraint `(1/L) X X^H = R_d`.
//!
//! The solution is `X = √L · F · U · I_{N×L} · V^H`, where `F F^H = R_d` and
//! `U Σ V^H` is the SVD of `F^H H^H S`. Only the first `N` right singular
//! vectors survive the `I_{N×L}` selector, so a thin SVD is enough.

use nalgebra::{Cholesky, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::{normalize_rows, project_unchecked, retract_unchecked};
use crate::metrics::{beampattern, hermitian_defect};
use crate::model::{steering_vector, CMat, ChannelMatrix, SymbolMatrix, WaveformMatrix};

/// Desired waveform covariance: Hermitian PSD with diagonal `P_T/N`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceTarget {
    r: CMat,
    total_power: f64,
}

impl CovarianceTarget {
    pub fn new(r: CMat, total_power: f64) -> Result<Self> {
        if !(total_power > 0.0 && total_power.is_finite()) {
            return Err(Error::invalid("total power must be positive"));
        }
        if !r.is_square() || r.nrows() == 0 {
            return Err(Error::invalid("covariance target must be square and non-empty"));
        }
        let n = r.nrows();
        if hermitian_defect(&r) > 1e-10 * r.norm().max(1.0) {
            return Err(Error::invalid("covariance target is not Hermitian"));
        }
        let per_antenna = total_power / n as f64;
        for i in 0..n {
            if (r[(i, i)].re - per_antenna).abs() > 1e-8 * per_antenna.max(1.0) {
                return Err(Error::invalid(format!(
                    "covariance diagonal entry {i} is {}, expected P_T/N = {per_antenna}",
                    r[(i, i)].re
                )));
            }
        }
        let min_eig = SymmetricEigen::new(r.clone())
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -1e-10 {
            return Err(Error::invalid(format!(
                "covariance target is not PSD (smallest eigenvalue {min_eig})"
            )));
        }
        Ok(Self { r, total_power })
    }

    pub fn n_antennas(&self) -> usize {
        self.r.nrows()
    }

    pub fn total_power(&self) -> f64 {
        self.total_power
    }

    pub fn as_matrix(&self) -> &CMat {
        &self.r
    }
}

/// `R_d = (P_T/N) I_N`, an omni-directional beampattern.
pub fn omni_covariance(n_antennas: usize, total_power: f64) -> Result<CovarianceTarget> {
    if n_antennas == 0 {
        return Err(Error::invalid("need N >= 1"));
    }
    let r = CMat::identity(n_antennas, n_antennas) * Complex64::from(total_power / n_antennas as f64);
    CovarianceTarget::new(r, total_power)
}

/// Outcome of the beampattern-matching covariance synthesis.
#[derive(Debug, Clone)]
pub struct DirectionalSynthesis {
    pub target: CovarianceTarget,
    /// Optimal scale applied to the desired pattern.
    pub scale: f64,
    pub cost: f64,
    pub iterations: usize,
    /// `false` when the iteration cap was hit before the cost settled.
    pub converged: bool,
}

const SYNTH_MAX_ITERS: usize = 5000;
const SYNTH_REL_TOL: f64 = 1e-8;
/// Consecutive small-change iterations required to stop.
const SYNTH_FLAT_RUN: usize = 10;

/// Indicator of `[-half_width, half_width]` degrees on a 1° grid over
/// [-90°, 90°]. Returns `(angles_rad, desired)`.
pub fn sector_pattern(half_width_deg: f64) -> (Vec<f64>, Vec<f64>) {
    let degs: Vec<f64> = (-90..=90).map(f64::from).collect();
    let desired = degs
        .iter()
        .map(|d| if d.abs() <= half_width_deg { 1.0 } else { 0.0 })
        .collect();
    (degs.into_iter().map(f64::to_radians).collect(), desired)
}

struct PatternFit {
    steering: Vec<DVector<Complex64>>,
    desired: Vec<f64>,
}

impl PatternFit {
    fn gains(&self, r: &CMat) -> Vec<f64> {
        self.steering
            .iter()
            .map(|a| (a.adjoint() * r * a)[(0, 0)].re)
            .collect()
    }

    /// Best nonnegative scale for the desired pattern given gains.
    fn best_scale(&self, gains: &[f64]) -> f64 {
        let num: f64 = gains.iter().zip(&self.desired).map(|(g, d)| g * d).sum();
        let den: f64 = self.desired.iter().map(|d| d * d).sum();
        if den == 0.0 {
            0.0
        } else {
            (num / den).max(0.0)
        }
    }

    fn cost(&self, gains: &[f64], scale: f64) -> f64 {
        gains
            .iter()
            .zip(&self.desired)
            .map(|(g, d)| (g - scale * d).powi(2))
            .sum()
    }

    /// `Σ_g w_g a_g a_g^H`.
    fn adjoint_map(&self, weights: &[f64]) -> CMat {
        let n = self.steering[0].len();
        let mut out = CMat::zeros(n, n);
        for (a, w) in self.steering.iter().zip(weights) {
            out.gerc(Complex64::from(*w), a, a, Complex64::from(1.0));
        }
        out
    }
}

/// Fits a feasible covariance whose beampattern matches `desired` (up to a
/// free positive scale) in least squares.
///
/// The covariance is kept in factored form `R = V V^H` with every row of `V`
/// at squared norm `P_T/N`, which makes `R` PSD with the required diagonal
/// by construction. Each iteration takes a tangent gradient step on `V`,
/// pulls the rows back to their fixed norm, and refits the scale in closed
/// form; Armijo backtracking keeps the cost monotone.
pub fn directional_covariance(
    n_antennas: usize,
    total_power: f64,
    angles: &[f64],
    desired: &[f64],
) -> Result<DirectionalSynthesis> {
    if angles.is_empty() || angles.len() != desired.len() {
        return Err(Error::invalid(
            "angle grid and desired pattern must be non-empty and equal length",
        ));
    }
    if desired.iter().any(|d| !(*d >= 0.0)) {
        return Err(Error::invalid("desired pattern values must be >= 0"));
    }
    if n_antennas == 0 || !(total_power > 0.0) {
        return Err(Error::invalid("need N >= 1 and P_T > 0"));
    }
    let per_antenna = total_power / n_antennas as f64;
    let fit = PatternFit {
        steering: angles
            .iter()
            .map(|&t| steering_vector(t, n_antennas).map(|a| a.entries))
            .collect::<Result<_>>()?,
        desired: desired.to_vec(),
    };
    let evaluate = |v: &CMat| {
        let r = v * v.adjoint();
        let gains = fit.gains(&r);
        let scale = fit.best_scale(&gains);
        let cost = fit.cost(&gains, scale);
        (gains, scale, cost)
    };

    // Omni start nudged towards the desired pattern, so that the symmetric
    // starting point is not stationary.
    let nudge = fit.adjoint_map(&fit.desired);
    let mut v = CMat::identity(n_antennas, n_antennas)
        + &nudge * Complex64::from(1e-3 / nudge.norm().max(f64::MIN_POSITIVE));
    normalize_rows(&mut v, per_antenna.sqrt());
    let (mut gains, mut scale, mut cost) = evaluate(&v);
    let mut converged = n_antennas == 1 || cost == 0.0;
    let mut iterations = 0;
    let mut step: f64 = 1.0;
    let mut flat_run = 0;

    while !converged && iterations < SYNTH_MAX_ITERS {
        iterations += 1;
        let residual: Vec<f64> = gains
            .iter()
            .zip(&fit.desired)
            .map(|(g, d)| 4.0 * (g - scale * d))
            .collect();
        let grad = project_unchecked(&v, &(fit.adjoint_map(&residual) * &v), per_antenna);
        let slope = -grad.norm_squared();
        if slope == 0.0 {
            converged = true;
            break;
        }
        let mut trial = (2.0 * step).min(1e6);
        let accepted = loop {
            if let Ok(next) = retract_unchecked(&v, &(&grad * Complex64::from(-trial)), per_antenna.sqrt()) {
                let eval = evaluate(&next);
                if eval.2 <= cost + 1e-4 * trial * slope {
                    break Some((next, eval));
                }
            }
            trial *= 0.5;
            if trial < 1e-30 {
                break None;
            }
        };
        let Some((next, (g, sc, c))) = accepted else {
            converged = true;
            break;
        };
        step = trial;
        if (cost - c).abs() <= SYNTH_REL_TOL * cost.max(f64::MIN_POSITIVE) {
            flat_run += 1;
            converged = flat_run >= SYNTH_FLAT_RUN;
        } else {
            flat_run = 0;
        }
        v = next;
        gains = g;
        scale = sc;
        cost = c;
    }

    let mut r = &v * v.adjoint();
    r = (&r + r.adjoint()) * Complex64::from(0.5);
    for i in 0..n_antennas {
        r[(i, i)] = Complex64::from(per_antenna);
    }
    Ok(DirectionalSynthesis {
        target: CovarianceTarget::new(r, total_power)?,
        scale,
        cost,
        iterations,
        converged,
    })
}

/// How the square root `F F^H = R_d` was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorKind {
    Cholesky,
    /// `R_d` was rank-deficient; `F = Q Λ^{1/2}` from its eigendecomposition.
    EigenSqrt,
}

#[derive(Debug, Clone)]
pub struct ClosedFormSolution {
    pub waveform: WaveformMatrix,
    pub factor: FactorKind,
}

pub(crate) fn covariance_factor(r: &CMat) -> (CMat, FactorKind) {
    if let Some(ch) = Cholesky::new(r.clone()) {
        let f = ch.l();
        let pivots = f.diagonal().map(|z| z.norm_sqr());
        let (lo, hi) = pivots
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(*v), b.max(*v)));
        // near-zero pivots mean R_d is numerically singular
        if lo.is_finite() && lo > 1e-12 * hi {
            return (f, FactorKind::Cholesky);
        }
    }
    let eig = SymmetricEigen::new(r.clone());
    let roots = eig.eigenvalues.map(|v| Complex64::from(v.max(0.0).sqrt()));
    (
        &eig.eigenvectors * CMat::from_diagonal(&roots),
        FactorKind::EigenSqrt,
    )
}

/// MUI-optimal waveform satisfying `(1/L) X X^H = R_d` exactly.
pub fn closed_form_waveform(
    channel: &ChannelMatrix,
    symbols: &SymbolMatrix,
    target: &CovarianceTarget,
    block_len: usize,
) -> Result<ClosedFormSolution> {
    let n = target.n_antennas();
    if block_len < n {
        return Err(Error::invalid(format!("block length {block_len} < N = {n}")));
    }
    if channel.n_antennas() != n || symbols.n_users() != channel.n_users() || symbols.block_len() != block_len
    {
        return Err(Error::invalid("closed-form dimension mismatch"));
    }
    let (f, factor) = covariance_factor(target.as_matrix());
    let m = f.adjoint() * channel.as_matrix().adjoint() * symbols.as_matrix();
    let svd = SVD::new(m, true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^H");
    let x = f * u * v_t * Complex64::from((block_len as f64).sqrt());
    Ok(ClosedFormSolution {
        waveform: WaveformMatrix::new(x)?,
        factor,
    })
}

/// Beampattern of a covariance target on the given grid.
pub fn target_beampattern(target: &CovarianceTarget, angles: &[f64]) -> Result<Vec<f64>> {
    beampattern(target.as_matrix(), angles)
}
