//! Communication and radar performance metrics, and the weighted objective
//! minimized by the solver.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{steering_vector, CMat, ChannelMatrix, SymbolMatrix, WaveformMatrix};

/// Trade-off weights: `rho1` on MUI, `rho2` on similarity to the reference
/// waveform, `rho3` on the integrated sidelobe level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
}

impl Weights {
    pub fn new(rho1: f64, rho2: f64, rho3: f64) -> Result<Self> {
        let w = Self { rho1, rho2, rho3 };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("rho1", self.rho1), ("rho2", self.rho2), ("rho3", self.rho3)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

impl Default for Weights {
    fn default() -> Self {
        Self {
            rho1: 0.15,
            rho2: 0.7,
            rho3: 0.15,
        }
    }
}

/// The objective in stacked least-squares form
/// `‖A X − B‖²_F + ρ₃ Σ_{p≠0} ‖X J_p X^H‖²_F` with
/// `A = [√ρ₁ H; √ρ₂ I_N]` and `B = [√ρ₁ S; √ρ₂ X₀]`.
#[derive(Debug, Clone)]
pub struct StackedProblem {
    pub a: CMat,
    pub b: CMat,
    pub rho3: f64,
    pub max_lag: usize,
    pub weights: Weights,
}

impl StackedProblem {
    pub fn new(
        channel: &ChannelMatrix,
        symbols: &SymbolMatrix,
        reference: &WaveformMatrix,
        weights: Weights,
        max_lag: usize,
    ) -> Result<Self> {
        weights.validate()?;
        let h = channel.as_matrix();
        let s = symbols.as_matrix();
        let x0 = reference.as_matrix();
        let (k, n) = h.shape();
        let l = x0.ncols();
        if x0.nrows() != n || s.nrows() != k || s.ncols() != l {
            return Err(Error::invalid(format!(
                "dimension mismatch: H {k}x{n}, S {}x{}, X0 {}x{}",
                s.nrows(),
                s.ncols(),
                x0.nrows(),
                l
            )));
        }
        check_lag(max_lag, l)?;
        let r1 = Complex64::from(weights.rho1.sqrt());
        let r2 = Complex64::from(weights.rho2.sqrt());
        let mut a = CMat::zeros(k + n, n);
        a.rows_mut(0, k).copy_from(&(h * r1));
        a.rows_mut(k, n).fill_diagonal(r2);
        let mut b = CMat::zeros(k + n, l);
        b.rows_mut(0, k).copy_from(&(s * r1));
        b.rows_mut(k, n).copy_from(&(x0 * r2));
        Ok(Self {
            a,
            b,
            rho3: weights.rho3,
            max_lag,
            weights,
        })
    }

    pub fn n_antennas(&self) -> usize {
        self.a.ncols()
    }

    pub fn block_len(&self) -> usize {
        self.b.ncols()
    }

    pub(crate) fn check_waveform(&self, x: &CMat) -> Result<()> {
        if x.nrows() != self.n_antennas() || x.ncols() != self.block_len() {
            return Err(Error::invalid(format!(
                "waveform is {}x{}, problem expects {}x{}",
                x.nrows(),
                x.ncols(),
                self.n_antennas(),
                self.block_len()
            )));
        }
        Ok(())
    }
}

fn check_lag(max_lag: usize, block_len: usize) -> Result<()> {
    if max_lag == 0 || max_lag >= block_len {
        return Err(Error::invalid(format!(
            "max lag {max_lag} must lie in 1..={}",
            block_len.saturating_sub(1)
        )));
    }
    Ok(())
}

/// `‖H X − S‖²_F`.
pub fn mui_power(channel: &ChannelMatrix, x: &WaveformMatrix, symbols: &SymbolMatrix) -> Result<f64> {
    let h = channel.as_matrix();
    let s = symbols.as_matrix();
    let x = x.as_matrix();
    if h.ncols() != x.nrows() || h.nrows() != s.nrows() || x.ncols() != s.ncols() {
        return Err(Error::invalid("MUI dimension mismatch"));
    }
    Ok((h * x - s).norm_squared())
}

/// `X J_p X^H` for `p >= 0`; the `-p` product is its adjoint.
pub(crate) fn lag_product(x: &CMat, lag: usize) -> CMat {
    let l = x.ncols();
    x.columns(0, l - lag) * x.columns(lag, l - lag).adjoint()
}

/// `‖X J_p X^H‖²_F` for a single lag.
pub fn lag_energy(x: &CMat, lag: isize) -> f64 {
    let p = lag.unsigned_abs();
    if p >= x.ncols() {
        return 0.0;
    }
    lag_product(x, p).norm_squared()
}

/// Neumaier-compensated running sum.
#[derive(Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

fn isl_unchecked(x: &CMat, max_lag: usize) -> f64 {
    let mut acc = CompensatedSum::default();
    for p in 1..=max_lag {
        // lags +p and -p have identical energy
        let e = lag_product(x, p).norm_squared();
        acc.add(e);
        acc.add(e);
    }
    acc.value()
}

/// Integrated range sidelobe power `Σ_{p=-P, p≠0}^{P} ‖X J_p X^H‖²_F`.
pub fn isl_power(x: &WaveformMatrix, max_lag: usize) -> Result<f64> {
    check_lag(max_lag, x.block_len())?;
    Ok(isl_unchecked(x.as_matrix(), max_lag))
}

/// Integrated sidelobe power relative to the zero-lag energy `‖X X^H‖²_F`.
pub fn normalized_isl(x: &WaveformMatrix, max_lag: usize) -> Result<f64> {
    let isl = isl_power(x, max_lag)?;
    let peak = lag_energy(x.as_matrix(), 0);
    if peak == 0.0 {
        return Err(Error::DegenerateInput("all-zero waveform".into()));
    }
    Ok(isl / peak)
}

/// `‖X − X₀‖²_F`.
pub fn similarity(x: &WaveformMatrix, reference: &WaveformMatrix) -> Result<f64> {
    if x.as_matrix().shape() != reference.as_matrix().shape() {
        return Err(Error::invalid("similarity dimension mismatch"));
    }
    Ok((x.as_matrix() - reference.as_matrix()).norm_squared())
}

/// `R_X = (1/L) X X^H`.
pub fn waveform_covariance(x: &WaveformMatrix) -> CMat {
    let m = x.as_matrix();
    (m * m.adjoint()) / Complex64::from(m.ncols() as f64)
}

pub(crate) fn hermitian_defect(r: &CMat) -> f64 {
    (r - r.adjoint()).norm()
}

/// Transmit beampattern `G(θ) = a^H(θ) R a(θ)` on the given angle grid
/// (radians).
pub fn beampattern(r: &CMat, angles: &[f64]) -> Result<Vec<f64>> {
    if !r.is_square() {
        return Err(Error::invalid("covariance must be square"));
    }
    if hermitian_defect(r) > 1e-10 * r.norm().max(1.0) {
        return Err(Error::invalid("covariance is not Hermitian"));
    }
    let n = r.nrows();
    angles
        .iter()
        .map(|&theta| {
            let a: DVector<Complex64> = steering_vector(theta, n)?.entries;
            Ok((a.adjoint() * r * &a)[(0, 0)].re)
        })
        .collect()
}

/// Average per-user rate lower bound treating MUI as Gaussian noise:
/// `Σ_k log₂(1 + σ_s² / (P_MUI/(K·L) + N₀))`, in bits/s/Hz.
pub fn sum_rate(
    channel: &ChannelMatrix,
    x: &WaveformMatrix,
    symbols: &SymbolMatrix,
    noise_power: f64,
) -> Result<f64> {
    let mui = mui_power(channel, x, symbols)?;
    let k = symbols.n_users();
    sum_rate_from_mui(
        mui,
        k,
        symbols.block_len(),
        symbols.constellation().symbol_power(),
        noise_power,
    )
}

pub fn sum_rate_from_mui(
    mui: f64,
    n_users: usize,
    block_len: usize,
    symbol_power: f64,
    noise_power: f64,
) -> Result<f64> {
    if !(noise_power > 0.0) {
        return Err(Error::invalid(format!(
            "noise power must be > 0, got {noise_power}"
        )));
    }
    let interference = mui / (n_users * block_len) as f64;
    let sinr = symbol_power / (interference + noise_power);
    Ok(n_users as f64 * (1.0 + sinr).log2())
}

/// `‖A X − B‖²_F + ρ₃·ISL(X)`.
pub fn objective(x: &WaveformMatrix, prob: &StackedProblem) -> Result<f64> {
    prob.check_waveform(x.as_matrix())?;
    Ok(objective_unchecked(x.as_matrix(), prob))
}

pub(crate) fn objective_unchecked(x: &CMat, prob: &StackedProblem) -> f64 {
    let fit = (&prob.a * x - &prob.b).norm_squared();
    if prob.rho3 == 0.0 {
        return fit;
    }
    fit + prob.rho3 * isl_unchecked(x, prob.max_lag)
}

/// Per-lag sidelobe level `10·log₁₀(‖X J_p X^H‖² / ‖X X^H‖²)` for
/// `p = -P..-1, 1..P`, in that order.
pub fn sidelobe_profile(x: &WaveformMatrix, max_lag: usize) -> Result<Vec<(isize, f64)>> {
    check_lag(max_lag, x.block_len())?;
    let m = x.as_matrix();
    let peak = lag_energy(m, 0);
    if peak == 0.0 {
        return Err(Error::DegenerateInput(
            "all-zero waveform has no sidelobe profile".into(),
        ));
    }
    let levels: Vec<f64> = (1..=max_lag)
        .map(|p| 10.0 * (lag_energy(m, p as isize) / peak).log10())
        .collect();
    let neg = (1..=max_lag).rev().map(|p| (-(p as isize), levels[p - 1]));
    let pos = (1..=max_lag).map(|p| (p as isize, levels[p - 1]));
    Ok(neg.chain(pos).collect())
}

pub fn to_db(v: f64) -> f64 {
    10.0 * v.log10()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        apply_shift, gaussian_matrix, generate_channel, generate_symbols, stream_rng, Constellation,
    };

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn waveform(m: CMat) -> WaveformMatrix {
        WaveformMatrix::new(m).unwrap()
    }

    fn dense_shift(lag: isize, size: usize) -> CMat {
        CMat::from_fn(size, size, |i, j| {
            if j as isize - i as isize == lag {
                c(1.0, 0.0)
            } else {
                c(0.0, 0.0)
            }
        })
    }

    /// ISL through explicit `J_p` matrices.
    fn isl_dense(x: &CMat, max_lag: usize) -> f64 {
        let l = x.ncols();
        let mut total = 0.0;
        for p in -(max_lag as isize)..=(max_lag as isize) {
            if p != 0 {
                total += (x * dense_shift(p, l) * x.adjoint()).norm_squared();
            }
        }
        total
    }

    fn on_manifold(n: usize, l: usize, seed: u64) -> WaveformMatrix {
        let mut m = gaussian_matrix(n, l, &mut stream_rng(seed, 9));
        let target = (l as f64 / n as f64).sqrt();
        for mut row in m.row_iter_mut() {
            let s = target / row.norm();
            row *= c(s, 0.0);
        }
        waveform(m)
    }

    #[test]
    fn mui_examples() {
        let s = generate_symbols(3, 3, Constellation::Qpsk, 1).unwrap();
        let h = ChannelMatrix::new(CMat::identity(3, 3)).unwrap();
        let x = waveform(s.as_matrix().clone());
        assert_eq!(mui_power(&h, &x, &s).unwrap(), 0.0);

        let h = ChannelMatrix::new(CMat::from_element(1, 1, c(2.0, 0.0))).unwrap();
        let x = waveform(CMat::from_element(1, 1, c(1.0, 0.0)));
        let s = SymbolMatrix::new(CMat::from_element(1, 1, c(1.0, 0.0)), Constellation::Qpsk).unwrap();
        assert_eq!(mui_power(&h, &x, &s).unwrap(), 1.0);
    }

    #[test]
    fn mui_matches_entry_sum() {
        let mut rng = stream_rng(2, 0);
        let h = ChannelMatrix::new(gaussian_matrix(2, 3, &mut rng)).unwrap();
        let x = waveform(gaussian_matrix(3, 4, &mut rng));
        let s = SymbolMatrix::new(gaussian_matrix(2, 4, &mut rng), Constellation::Qpsk).unwrap();
        let (hm, xm, sm) = (h.as_matrix(), x.as_matrix(), s.as_matrix());
        let mut oracle = 0.0;
        for k in 0..2 {
            for l in 0..4 {
                let mut acc = c(0.0, 0.0);
                for n in 0..3 {
                    acc += hm[(k, n)] * xm[(n, l)];
                }
                oracle += (acc - sm[(k, l)]).norm_sqr();
            }
        }
        let got = mui_power(&h, &x, &s).unwrap();
        assert!((got - oracle).abs() < 1e-12 * oracle.max(1.0));
        let bad = waveform(gaussian_matrix(2, 4, &mut rng));
        assert!(mui_power(&h, &bad, &s).is_err());
    }

    #[test]
    fn mui_invariant_under_time_permutation() {
        let mut rng = stream_rng(4, 0);
        let h = ChannelMatrix::new(gaussian_matrix(2, 3, &mut rng)).unwrap();
        let xm = gaussian_matrix(3, 5, &mut rng);
        let sm = gaussian_matrix(2, 5, &mut rng);
        let perm = [3usize, 0, 4, 1, 2];
        let xp = CMat::from_fn(3, 5, |i, j| xm[(i, perm[j])]);
        let sp = CMat::from_fn(2, 5, |i, j| sm[(i, perm[j])]);
        let a = mui_power(
            &h,
            &waveform(xm),
            &SymbolMatrix::new(sm, Constellation::Qpsk).unwrap(),
        )
        .unwrap();
        let b = mui_power(
            &h,
            &waveform(xp),
            &SymbolMatrix::new(sp, Constellation::Qpsk).unwrap(),
        )
        .unwrap();
        assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn isl_hand_examples() {
        assert_eq!(isl_power(&WaveformMatrix::zeros(2, 4), 2).unwrap(), 0.0);
        let x = waveform(CMat::from_row_slice(1, 2, &[c(1.0, 0.0), c(1.0, 0.0)]));
        assert_eq!(isl_power(&x, 1).unwrap(), 2.0);
        let x = waveform(CMat::from_row_slice(1, 2, &[c(1.0, 0.0), c(0.0, 0.0)]));
        assert_eq!(isl_power(&x, 1).unwrap(), 0.0);
        assert!(isl_power(&x, 2).is_err());
        assert!(isl_power(&x, 0).is_err());
    }

    #[test]
    fn isl_matches_dense_shifts() {
        let mut rng = stream_rng(8, 0);
        for n in 1..=4 {
            for l in 2..=8 {
                let x = gaussian_matrix(n, l, &mut rng);
                for p in 1..l {
                    let fast = isl_power(&waveform(x.clone()), p).unwrap();
                    let slow = isl_dense(&x, p);
                    assert!((fast - slow).abs() < 1e-12 * slow.max(1.0));
                }
            }
        }
        // explicit shifted product agrees too
        let x = gaussian_matrix(3, 6, &mut rng);
        let e = (apply_shift(&x, -2).unwrap() * x.adjoint()).norm_squared();
        assert!((e - lag_energy(&x, 2)).abs() < 1e-12 * e);
    }

    #[test]
    fn similarity_examples() {
        let x = on_manifold(4, 10, 1);
        assert_eq!(similarity(&x, &x).unwrap(), 0.0);
        let zero = WaveformMatrix::zeros(4, 10);
        assert!((similarity(&x, &zero).unwrap() - 10.0).abs() < 1e-12);
        let a = waveform(CMat::from_element(1, 1, c(1.0, 1.0)));
        let b = waveform(CMat::from_element(1, 1, c(1.0, 0.0)));
        assert_eq!(similarity(&a, &b).unwrap(), 1.0);
        assert!(similarity(&x, &a).is_err());
    }

    #[test]
    fn beampattern_examples() {
        let grid: Vec<f64> = (0..=180).map(|d| (d as f64 - 90.0).to_radians()).collect();
        let n = 8;
        let r = CMat::identity(n, n) * c(1.0 / n as f64, 0.0);
        let g = beampattern(&r, &grid).unwrap();
        assert!(g.iter().all(|v| (v - 1.0).abs() < 1e-12));

        let theta0 = 0.3;
        let a = steering_vector(theta0, n).unwrap().entries;
        let r = &a * a.adjoint() / c(n as f64, 0.0);
        let g = beampattern(&r, &[theta0]).unwrap();
        assert!((g[0] - n as f64).abs() < 1e-12);
        assert!(beampattern(&r, &grid).unwrap().iter().all(|v| *v >= -1e-12));

        let mut bad = r.clone();
        bad[(0, 1)] += c(0.1, 0.0);
        assert!(beampattern(&bad, &grid).is_err());
    }

    #[test]
    fn beampattern_of_waveform_is_real_and_nonnegative() {
        let x = on_manifold(6, 40, 3);
        let r = waveform_covariance(&x);
        let grid: Vec<f64> = (0..200).map(|k| (-1.0 + 2.0 * k as f64 / 199.0).asin()).collect();
        let g = beampattern(&r, &grid).unwrap();
        assert!(g.iter().all(|v| *v >= -1e-12));
        // uniform-in-sinθ average recovers trace(R_X) up to grid error
        let mean = g.iter().sum::<f64>() / g.len() as f64;
        assert!(mean > 0.0);
        assert!(g.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn covariance_examples() {
        let x = on_manifold(4, 12, 2);
        let r = waveform_covariance(&x);
        for i in 0..4 {
            assert!((r[(i, i)].re - 0.25).abs() < 1e-12);
        }
        assert!(hermitian_defect(&r) == 0.0 || hermitian_defect(&r) < 1e-15);

        // rows: orthogonal with norm sqrt(L/N) -> R_X = I/N
        let (n, l) = (2, 4);
        let s = (l as f64 / n as f64).sqrt() / 2.0;
        let x = waveform(CMat::from_row_slice(
            n,
            l,
            &[
                c(s, 0.),
                c(s, 0.),
                c(s, 0.),
                c(s, 0.),
                c(s, 0.),
                c(-s, 0.),
                c(s, 0.),
                c(-s, 0.),
            ],
        ));
        let r = waveform_covariance(&x);
        assert!((r - CMat::identity(2, 2) * c(0.5, 0.0)).norm() < 1e-15);
        assert_eq!(
            waveform_covariance(&WaveformMatrix::zeros(3, 5)),
            CMat::zeros(3, 3)
        );
    }

    #[test]
    fn sum_rate_examples() {
        assert_eq!(sum_rate_from_mui(0.0, 4, 10, 1.0, 1.0).unwrap(), 4.0);
        assert!(sum_rate_from_mui(0.0, 4, 10, 1.0, 1e9).unwrap() < 1e-6);
        assert!(sum_rate_from_mui(0.0, 4, 10, 1.0, 0.0).is_err());
        assert!(sum_rate_from_mui(0.0, 4, 10, 1.0, -1.0).is_err());

        let mut prev = 0.0;
        for step in (0..=20).rev() {
            let mui = step as f64 * 5.0;
            let rate = sum_rate_from_mui(mui, 4, 10, 1.0, 0.1).unwrap();
            assert!(rate >= prev);
            prev = rate;
        }

        let h = generate_channel(2, 4, 1).unwrap();
        let s = generate_symbols(2, 8, Constellation::Qpsk, 1).unwrap();
        let x = on_manifold(4, 8, 1);
        let mui = mui_power(&h, &x, &s).unwrap();
        assert_eq!(
            sum_rate(&h, &x, &s, 0.5).unwrap(),
            sum_rate_from_mui(mui, 2, 8, 1.0, 0.5).unwrap()
        );
    }

    fn random_problem(
        n: usize,
        k: usize,
        l: usize,
        p: usize,
        w: Weights,
        seed: u64,
    ) -> (StackedProblem, ChannelMatrix, SymbolMatrix, WaveformMatrix) {
        let mut rng = stream_rng(seed, 0);
        let h = ChannelMatrix::new(gaussian_matrix(k, n, &mut rng)).unwrap();
        let s = SymbolMatrix::new(gaussian_matrix(k, l, &mut rng), Constellation::Qpsk).unwrap();
        let x0 = waveform(gaussian_matrix(n, l, &mut rng));
        (StackedProblem::new(&h, &s, &x0, w, p).unwrap(), h, s, x0)
    }

    #[test]
    fn objective_examples() {
        let (prob, _, _, x0) = random_problem(3, 2, 6, 2, Weights::new(0.0, 0.0, 0.0).unwrap(), 1);
        assert_eq!(objective(&x0, &prob).unwrap(), 0.0);

        let (prob, ..) = random_problem(3, 2, 6, 2, Weights::default(), 2);
        let zero = WaveformMatrix::zeros(3, 6);
        assert!((objective(&zero, &prob).unwrap() - prob.b.norm_squared()).abs() < 1e-12);
        assert!(objective(&WaveformMatrix::zeros(2, 6), &prob).is_err());
    }

    #[test]
    fn objective_is_weighted_sum_of_metrics() {
        let mut rng = stream_rng(77, 0);
        for trial in 0..100 {
            let w = Weights::new(
                rand::Rng::random::<f64>(&mut rng),
                rand::Rng::random::<f64>(&mut rng),
                rand::Rng::random::<f64>(&mut rng),
            )
            .unwrap();
            let (prob, h, s, x0) = random_problem(4, 2, 8, 3, w, 1000 + trial);
            let x = waveform(gaussian_matrix(4, 8, &mut rng));
            let f = objective(&x, &prob).unwrap();
            let direct = w.rho1 * mui_power(&h, &x, &s).unwrap()
                + w.rho2 * similarity(&x, &x0).unwrap()
                + w.rho3 * isl_power(&x, 3).unwrap();
            assert!(f >= 0.0);
            assert!((f - direct).abs() <= 1e-9 * direct, "{f} vs {direct}");
        }
    }

    #[test]
    fn stacked_blocks() {
        let w = Weights::new(0.25, 0.64, 0.1).unwrap();
        let (prob, h, s, x0) = random_problem(3, 2, 5, 1, w, 3);
        assert_eq!(prob.a.rows(0, 2), h.as_matrix() * c(0.5, 0.0));
        assert_eq!(prob.a.rows(2, 3), CMat::identity(3, 3) * c(0.8, 0.0));
        assert_eq!(prob.b.rows(0, 2), s.as_matrix() * c(0.5, 0.0));
        assert_eq!(prob.b.rows(2, 3), x0.as_matrix() * c(0.8, 0.0));
        assert!(Weights::new(-0.1, 0.0, 0.0).is_err());
    }

    #[test]
    fn sidelobe_profile_examples() {
        let x = waveform(CMat::from_row_slice(1, 2, &[c(1.0, 0.0), c(1.0, 0.0)]));
        let prof = sidelobe_profile(&x, 1).unwrap();
        assert_eq!(prof.len(), 2);
        for (_, db) in &prof {
            assert!((db - 10.0 * 0.25f64.log10()).abs() < 1e-12);
        }
        assert!((prof[0].1 + 6.0206).abs() < 1e-4);
        assert!(matches!(
            sidelobe_profile(&WaveformMatrix::zeros(2, 4), 2),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn sidelobe_profile_symmetric_and_below_peak() {
        for seed in 0..20 {
            let x = on_manifold(4, 32, seed);
            let prof = sidelobe_profile(&x, 8).unwrap();
            let lags: Vec<isize> = prof.iter().map(|(p, _)| *p).collect();
            assert_eq!(lags, (-8..=8).filter(|p| *p != 0).collect::<Vec<_>>());
            for i in 0..8 {
                assert_eq!(prof[i].1, prof[15 - i].1);
            }
            assert!(prof.iter().all(|(_, db)| *db <= 0.0));
        }
    }
}
