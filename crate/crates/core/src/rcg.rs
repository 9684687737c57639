//! Riemannian conjugate gradient on the oblique manifold.
//!
//! Each iteration projects the Euclidean gradient onto the tangent space,
//! forms a Polak-Ribière conjugate direction against the previous direction
//! transported by projection, picks a step by Armijo backtracking along the
//! retraction curve, and retracts.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::{
    project_unchecked, random_point, real_inner, retract_unchecked, ManifoldSpec, TangentVector,
};
use crate::metrics::{lag_product, objective_unchecked, StackedProblem};
use crate::model::{shift_columns, CMat, WaveformMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ArmijoConfig {
    /// Upper bound on the trial step; each search starts at
    /// `min(initial_step, 2·previous accepted step)`.
    pub initial_step: f64,
    pub backtrack: f64,
    pub sufficient_decrease: f64,
    pub max_backtracks: usize,
    pub rule: StepRule,
}

/// How the first trial step of each search is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    /// `min(initial_step, 2·previous accepted step)`.
    Doubling,
    /// Probe the doubling step once, then start backtracking from the
    /// minimizer of the quadratic through `f(0)`, `f'(0)` and the probe
    /// (clamped to [0.1, 10]× the probe).
    #[default]
    Quadratic,
}

impl Default for ArmijoConfig {
    fn default() -> Self {
        Self {
            initial_step: 1.0,
            backtrack: 0.5,
            sufficient_decrease: 1e-4,
            max_backtracks: 50,
            rule: StepRule::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RcgConfig {
    /// Stop once `‖grad F‖_F < epsilon`.
    pub epsilon: f64,
    pub k_max: usize,
    pub armijo: ArmijoConfig,
}

impl Default for RcgConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-6,
            k_max: 500,
            armijo: ArmijoConfig::default(),
        }
    }
}

impl RcgConfig {
    pub fn validate(&self) -> Result<()> {
        let a = &self.armijo;
        if !(self.epsilon > 0.0) {
            return Err(Error::invalid("epsilon must be > 0"));
        }
        if self.k_max <= 2 {
            return Err(Error::invalid("k_max must be > 2"));
        }
        if !(a.backtrack > 0.0 && a.backtrack < 1.0) {
            return Err(Error::invalid("backtrack factor must lie in (0, 1)"));
        }
        if !(a.sufficient_decrease > 0.0 && a.sufficient_decrease < 1.0) {
            return Err(Error::invalid("sufficient-decrease constant must lie in (0, 1)"));
        }
        if !(a.initial_step > 0.0 && a.initial_step.is_finite()) {
            return Err(Error::invalid("initial step must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    pub iter: usize,
    pub objective: f64,
    pub grad_norm: f64,
    /// Step that produced this iterate (0 for the starting point).
    pub step: f64,
    pub feasibility: f64,
    /// Conjugation coefficient used for the direction leaving this iterate.
    pub lambda: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveTrace {
    pub records: Vec<IterRecord>,
    pub converged: bool,
    /// The line search found no acceptable step.
    pub stalled: bool,
}

impl SolveTrace {
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn final_record(&self) -> Option<&IterRecord> {
        self.records.last()
    }

    pub const CSV_HEADER: &'static str = "iter,objective,grad_norm,step,feasibility,lambda";
}

/// `∇F = 2A^H(AX − B) + 2ρ₃ Σ_{p≠0} (X J_p X^H X J_pᵀ + X J_pᵀ X^H X J_p)`,
/// scaled so that `Re⟨∇F, Δ⟩` is the directional derivative along `Δ`.
pub fn euclidean_gradient(x: &WaveformMatrix, prob: &StackedProblem) -> Result<CMat> {
    prob.check_waveform(x.as_matrix())?;
    Ok(gradient_unchecked(x.as_matrix(), prob))
}

pub(crate) fn gradient_unchecked(x: &CMat, prob: &StackedProblem) -> CMat {
    let residual = &prob.a * x - &prob.b;
    let mut grad = prob.a.adjoint() * residual * Complex64::from(2.0);
    if prob.rho3 == 0.0 {
        return grad;
    }
    let mut isl = CMat::zeros(x.nrows(), x.ncols());
    for p in 1..=prob.max_lag {
        let m = lag_product(x, p);
        let lag = p as isize;
        // lags +p and -p contribute the same pair of terms
        isl += &m * shift_columns(x, -lag);
        isl += m.adjoint() * shift_columns(x, lag);
    }
    grad += isl * Complex64::from(4.0 * prob.rho3);
    grad
}

/// `F(Y) − F(X)` evaluated from the difference `Y − X`, which stays
/// accurate when the two objective values agree to many digits.
pub(crate) fn objective_difference(x: &CMat, y: &CMat, prob: &StackedProblem) -> f64 {
    let d = y - x;
    let ad = &prob.a * &d;
    let both = &prob.a * (x + y) - &prob.b * Complex64::from(2.0);
    let mut diff = real_inner(&ad, &both);
    if prob.rho3 != 0.0 {
        let l = x.ncols();
        let mut isl = 0.0;
        for p in 1..=prob.max_lag {
            let (xa, xb) = (x.columns(0, l - p), x.columns(p, l - p));
            let (ya, yb) = (y.columns(0, l - p), y.columns(p, l - p));
            let (da, db) = (d.columns(0, l - p), d.columns(p, l - p));
            let delta = da * yb.adjoint() + xa * db.adjoint();
            let sum = xa * xb.adjoint() + ya * yb.adjoint();
            isl += real_inner(&delta, &sum);
        }
        diff += 2.0 * prob.rho3 * isl;
    }
    diff
}

/// Polak-Ribière coefficient `⟨g_k, g_k − P(g_{k-1})⟩ / ⟨g_{k-1}, g_{k-1}⟩`,
/// clamped at zero. A vanishing previous gradient yields 0.
pub fn pr_coefficient(g_k: &TangentVector, g_prev_proj: &TangentVector, g_prev: &TangentVector) -> f64 {
    pr_unchecked(g_k.as_matrix(), g_prev_proj.as_matrix(), g_prev.as_matrix())
}

fn pr_unchecked(g_k: &CMat, g_prev_proj: &CMat, g_prev: &CMat) -> f64 {
    let den = g_prev.norm_squared();
    if den == 0.0 {
        return 0.0;
    }
    let num = g_k.norm_squared() - real_inner(g_k, g_prev_proj);
    (num / den).max(0.0)
}

/// `−g_k + λ_k·P(Π_{k-1})`, falling back to `−g_k` if that is not a descent
/// direction.
pub fn conjugate_direction(g_k: &TangentVector, prev_dir_proj: &TangentVector, lambda: f64) -> TangentVector {
    TangentVector(direction_unchecked(
        g_k.as_matrix(),
        prev_dir_proj.as_matrix(),
        lambda,
    ))
}

fn direction_unchecked(g_k: &CMat, prev_dir_proj: &CMat, lambda: f64) -> CMat {
    let dir = if lambda == 0.0 {
        -g_k
    } else {
        prev_dir_proj * Complex64::from(lambda) - g_k
    };
    if real_inner(g_k, &dir) >= 0.0 {
        -g_k
    } else {
        dir
    }
}

/// Result of a backtracking search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Backtrack {
    /// Accepted step, 0 when none was found.
    pub step: f64,
    /// `f(step) − f(0)` at the accepted step.
    pub decrease: f64,
    pub trials: usize,
}

/// Largest `μ ∈ {μ₀ τ^i}` with `Δf(μ) ≤ c·μ·slope`. `delta(μ)` returns
/// `f(μ) − f(0)` or `None` where the curve is undefined, which counts as a
/// rejection.
pub fn backtrack<F>(slope: f64, initial_step: f64, cfg: &ArmijoConfig, mut delta: F) -> Backtrack
where
    F: FnMut(f64) -> Option<f64>,
{
    let mut mu = initial_step;
    for trial in 0..=cfg.max_backtracks {
        if let Some(d) = delta(mu) {
            if d <= cfg.sufficient_decrease * mu * slope {
                return Backtrack {
                    step: mu,
                    decrease: d,
                    trials: trial + 1,
                };
            }
        }
        mu *= cfg.backtrack;
    }
    Backtrack {
        step: 0.0,
        decrease: 0.0,
        trials: cfg.max_backtracks + 1,
    }
}

#[derive(Debug, Clone)]
pub struct LineSearchOutcome {
    pub step: f64,
    /// Accepted point, `None` on stall.
    pub point: Option<WaveformMatrix>,
    pub decrease: f64,
}

/// Armijo search along `μ ↦ R_X(μ Π)`. `grad` is the Riemannian gradient at
/// `x`; `direction` must be a descent direction.
pub fn armijo_search(
    spec: &ManifoldSpec,
    prob: &StackedProblem,
    x: &WaveformMatrix,
    grad: &TangentVector,
    direction: &TangentVector,
    initial_step: f64,
    cfg: &ArmijoConfig,
) -> Result<LineSearchOutcome> {
    prob.check_waveform(x.as_matrix())?;
    let slope = real_inner(grad.as_matrix(), direction.as_matrix());
    if !(slope < 0.0) {
        return Err(Error::invalid("line search direction is not a descent direction"));
    }
    let (step, point, decrease) = search_unchecked(
        spec.row_power().sqrt(),
        prob,
        x.as_matrix(),
        direction.as_matrix(),
        slope,
        initial_step,
        cfg,
    );
    Ok(LineSearchOutcome {
        step,
        point: point.map(|p| WaveformMatrix::new(p).expect("same shape as x")),
        decrease,
    })
}

fn search_unchecked(
    beta: f64,
    prob: &StackedProblem,
    x: &CMat,
    dir: &CMat,
    slope: f64,
    initial_step: f64,
    cfg: &ArmijoConfig,
) -> (f64, Option<CMat>, f64) {
    let mut accepted = None;
    let bt = backtrack(slope, initial_step, cfg, |mu| {
        let y = retract_unchecked(x, &(dir * Complex64::from(mu)), beta).ok()?;
        let d = objective_difference(x, &y, prob);
        accepted = Some(y);
        Some(d)
    });
    if bt.step == 0.0 {
        (0.0, None, 0.0)
    } else {
        (bt.step, accepted, bt.decrease)
    }
}

/// One line search under the configured step rule.
fn search_step(
    beta: f64,
    prob: &StackedProblem,
    x: &CMat,
    dir: &CMat,
    slope: f64,
    mu0: f64,
    cfg: &ArmijoConfig,
) -> (f64, Option<CMat>, f64) {
    let start = match cfg.rule {
        StepRule::Doubling => mu0,
        StepRule::Quadratic => match retract_unchecked(x, &(dir * Complex64::from(mu0)), beta) {
            Ok(y) => {
                let curvature = (objective_difference(x, &y, prob) - slope * mu0) / (mu0 * mu0);
                if curvature > 0.0 {
                    (-slope / (2.0 * curvature)).clamp(0.1 * mu0, 10.0 * mu0)
                } else {
                    mu0
                }
            }
            Err(_) => mu0,
        },
    };
    search_unchecked(beta, prob, x, dir, slope, start, cfg)
}

/// Starting point of a solve.
#[derive(Debug, Clone)]
pub enum InitialPoint {
    /// Start from a given on-manifold waveform (typically the closed-form
    /// reference).
    Warm(WaveformMatrix),
    /// Random Gaussian point drawn from this seed.
    Random(u64),
}

/// Minimizes the stacked objective over the oblique manifold.
pub fn solve(
    prob: &StackedProblem,
    spec: &ManifoldSpec,
    cfg: &RcgConfig,
    start: &InitialPoint,
) -> Result<(WaveformMatrix, SolveTrace)> {
    cfg.validate()?;
    if spec.n_antennas != prob.n_antennas() || spec.block_len != prob.block_len() {
        return Err(Error::invalid("manifold and problem dimensions disagree"));
    }
    let x0 = match start {
        InitialPoint::Warm(x) => {
            if !spec.contains(x, 1e-8) {
                return Err(Error::invalid("warm start is off the manifold"));
            }
            // snap to machine-precision row norms
            retract_unchecked(
                x.as_matrix(),
                &CMat::zeros(spec.n_antennas, spec.block_len),
                spec.row_power().sqrt(),
            )?
        }
        InitialPoint::Random(seed) => random_point(spec, *seed).into_matrix(),
    };
    let (x, trace) = run(prob, spec, cfg, x0);
    Ok((WaveformMatrix::new(x)?, trace))
}

fn feasibility(x: &CMat, row_power: f64) -> f64 {
    x.row_iter()
        .map(|r| (r.norm_squared() - row_power).abs() / row_power)
        .fold(0.0, f64::max)
}

fn run(prob: &StackedProblem, spec: &ManifoldSpec, cfg: &RcgConfig, mut x: CMat) -> (CMat, SolveTrace) {
    let row_power = spec.row_power();
    let beta = row_power.sqrt();
    let mut f = objective_unchecked(&x, prob);
    let mut grad = project_unchecked(&x, &gradient_unchecked(&x, prob), row_power);
    let mut grad_norm = grad.norm();
    let mut dir = -&grad;
    let mut trace = SolveTrace::default();
    trace.records.push(IterRecord {
        iter: 0,
        objective: f,
        grad_norm,
        step: 0.0,
        feasibility: feasibility(&x, row_power),
        lambda: 0.0,
    });

    let mut last_step = cfg.armijo.initial_step;
    let mut lambda_used = false;
    let mut k = 0;
    while k < cfg.k_max && grad_norm >= cfg.epsilon {
        let slope = real_inner(&grad, &dir);
        let mu0 = cfg.armijo.initial_step.min(2.0 * last_step);
        let mut attempt = search_step(beta, prob, &x, &dir, slope, mu0, &cfg.armijo);
        if attempt.1.is_none() && lambda_used {
            // conjugate direction failed: restart along steepest descent
            dir = -&grad;
            let slope = -grad_norm * grad_norm;
            attempt = search_step(beta, prob, &x, &dir, slope, mu0, &cfg.armijo);
        }
        let (step, next, _) = attempt;
        let Some(next) = next else {
            trace.stalled = true;
            break;
        };
        last_step = step;
        k += 1;

        let next_grad = project_unchecked(&next, &gradient_unchecked(&next, prob), row_power);
        let prev_grad_proj = project_unchecked(&next, &grad, row_power);
        let prev_dir_proj = project_unchecked(&next, &dir, row_power);
        let lambda = pr_unchecked(&next_grad, &prev_grad_proj, &grad);
        dir = direction_unchecked(&next_grad, &prev_dir_proj, lambda);
        lambda_used = lambda != 0.0;

        x = next;
        grad = next_grad;
        grad_norm = grad.norm();
        f = objective_unchecked(&x, prob);
        trace.records.push(IterRecord {
            iter: k,
            objective: f,
            grad_norm,
            step,
            feasibility: feasibility(&x, row_power),
            lambda,
        });
    }
    trace.converged = grad_norm < cfg.epsilon;
    (x, trace)
}
