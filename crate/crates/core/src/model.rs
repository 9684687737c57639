//! Core domain types, the ULA steering vector, lag shifts and seeded
//! generators for channels and symbols.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense complex matrix used throughout the crate.
pub type CMat = DMatrix<Complex64>;

/// Independent ChaCha8 stream `stream` derived from `seed`.
///
/// Streams with different ids never overlap, so Monte-Carlo trials can be
/// drawn in any order (or in parallel) and still reproduce bit-for-bit.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One draw of a circularly-symmetric complex Gaussian with unit variance
/// (real and imaginary parts each with variance 1/2).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * FRAC_1_SQRT_2
}

pub(crate) fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    // Row-major fill so the draw order reads naturally in the text format.
    let mut m = CMat::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = complex_gaussian(rng);
        }
    }
    m
}

/// `N × L` transmit block.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveformMatrix(CMat);

impl WaveformMatrix {
    pub fn new(entries: CMat) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(Error::invalid("waveform must have N >= 1 and L >= 1"));
        }
        Ok(Self(entries))
    }

    pub fn zeros(n_antennas: usize, block_len: usize) -> Self {
        Self(CMat::zeros(n_antennas, block_len))
    }

    pub fn n_antennas(&self) -> usize {
        self.0.nrows()
    }

    pub fn block_len(&self) -> usize {
        self.0.ncols()
    }

    pub fn as_matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_matrix(self) -> CMat {
        self.0
    }

    /// Squared norm of every row.
    pub fn row_powers(&self) -> Vec<f64> {
        self.0.row_iter().map(|r| r.norm_squared()).collect()
    }

    /// Largest relative deviation of a row power from `L·P_T/N`.
    pub fn feasibility_residual(&self, total_power: f64) -> f64 {
        let target = self.block_len() as f64 * total_power / self.n_antennas() as f64;
        self.row_powers()
            .into_iter()
            .map(|p| (p - target).abs() / target)
            .fold(0.0, f64::max)
    }

    /// Every row carries squared norm `L·P_T/N` to within 1e-10 relative.
    pub fn is_on_manifold(&self, total_power: f64) -> bool {
        self.feasibility_residual(total_power) <= 1e-10
    }
}

/// `K × N` downlink channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix(CMat);

impl ChannelMatrix {
    pub fn new(entries: CMat) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(Error::invalid("channel must have K >= 1 and N >= 1"));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("channel entries must be finite"));
        }
        Ok(Self(entries))
    }

    pub fn n_users(&self) -> usize {
        self.0.nrows()
    }

    pub fn n_antennas(&self) -> usize {
        self.0.ncols()
    }

    pub fn as_matrix(&self) -> &CMat {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Constellation {
    Qpsk,
}

impl Constellation {
    pub fn points(self) -> &'static [Complex64] {
        const H: f64 = FRAC_1_SQRT_2;
        const QPSK: [Complex64; 4] = [
            Complex64::new(H, H),
            Complex64::new(-H, H),
            Complex64::new(-H, -H),
            Complex64::new(H, -H),
        ];
        match self {
            Constellation::Qpsk => &QPSK,
        }
    }

    /// Average symbol energy.
    pub fn symbol_power(self) -> f64 {
        1.0
    }
}

impl FromStr for Constellation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qpsk" => Ok(Constellation::Qpsk),
            other => Err(Error::invalid(format!("unsupported constellation '{other}'"))),
        }
    }
}

impl fmt::Display for Constellation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constellation::Qpsk => f.write_str("qpsk"),
        }
    }
}

/// `K × L` block of constellation symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolMatrix {
    entries: CMat,
    constellation: Constellation,
}

impl SymbolMatrix {
    pub fn new(entries: CMat, constellation: Constellation) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(Error::invalid("symbol block must have K >= 1 and L >= 1"));
        }
        Ok(Self {
            entries,
            constellation,
        })
    }

    pub fn n_users(&self) -> usize {
        self.entries.nrows()
    }

    pub fn block_len(&self) -> usize {
        self.entries.ncols()
    }

    pub fn constellation(&self) -> Constellation {
        self.constellation
    }

    pub fn as_matrix(&self) -> &CMat {
        &self.entries
    }
}

/// ULA response `a(θ)` with half-wavelength spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector {
    pub angle: f64,
    pub entries: DVector<Complex64>,
}

/// `a_n(θ) = exp(jπ n sin θ)`, `n = 0..N-1`.
pub fn steering_vector(theta: f64, n_antennas: usize) -> Result<SteeringVector> {
    if !theta.is_finite() {
        return Err(Error::invalid("steering angle must be finite"));
    }
    if n_antennas == 0 {
        return Err(Error::invalid("steering vector needs N >= 1"));
    }
    let phase = PI * theta.sin();
    let entries = DVector::from_fn(n_antennas, |n, _| Complex64::from_polar(1.0, phase * n as f64));
    Ok(SteeringVector {
        angle: theta,
        entries,
    })
}

/// Lag-`p` temporal shift `J_p`: ones on the `p`-th superdiagonal for
/// `p >= 0`, on the `|p|`-th subdiagonal for `p < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShiftOperator {
    pub lag: isize,
    pub size: usize,
}

impl ShiftOperator {
    pub fn new(lag: isize, size: usize) -> Result<Self> {
        if lag.unsigned_abs() >= size {
            return Err(Error::invalid(format!(
                "lag {lag} out of range for block length {size}"
            )));
        }
        Ok(Self { lag, size })
    }

    pub fn transpose(self) -> Self {
        Self {
            lag: -self.lag,
            size: self.size,
        }
    }

    /// `X · J_p`.
    pub fn apply(self, x: &CMat) -> Result<CMat> {
        if x.ncols() != self.size {
            return Err(Error::invalid("shift size does not match block length"));
        }
        Ok(shift_columns(x, self.lag))
    }
}

/// `X · J_p` computed by sliding columns: column `j` of the result is column
/// `j - p` of `X` (zero when out of range). Positive lags move columns right.
pub fn apply_shift(x: &CMat, lag: isize) -> Result<CMat> {
    if lag.unsigned_abs() >= x.ncols() {
        return Err(Error::invalid(format!(
            "lag {lag} out of range for block length {}",
            x.ncols()
        )));
    }
    Ok(shift_columns(x, lag))
}

pub(crate) fn shift_columns(x: &CMat, lag: isize) -> CMat {
    let (n, l) = x.shape();
    let s = lag.unsigned_abs();
    let mut out = CMat::zeros(n, l);
    if lag >= 0 {
        out.columns_mut(s, l - s).copy_from(&x.columns(0, l - s));
    } else {
        out.columns_mut(0, l - s).copy_from(&x.columns(s, l - s));
    }
    out
}

/// Rayleigh-fading channel drawn from `rng`.
pub fn generate_channel_with<R: Rng + ?Sized>(
    n_users: usize,
    n_antennas: usize,
    rng: &mut R,
) -> Result<ChannelMatrix> {
    if n_users == 0 || n_antennas == 0 {
        return Err(Error::invalid("channel needs K >= 1 and N >= 1"));
    }
    ChannelMatrix::new(gaussian_matrix(n_users, n_antennas, rng))
}

/// `K × N` channel with i.i.d. standard complex Gaussian entries.
pub fn generate_channel(n_users: usize, n_antennas: usize, seed: u64) -> Result<ChannelMatrix> {
    generate_channel_with(n_users, n_antennas, &mut stream_rng(seed, 0))
}

pub fn generate_symbols_with<R: Rng + ?Sized>(
    n_users: usize,
    block_len: usize,
    constellation: Constellation,
    rng: &mut R,
) -> Result<SymbolMatrix> {
    if n_users == 0 || block_len == 0 {
        return Err(Error::invalid("symbol block needs K >= 1 and L >= 1"));
    }
    let points = constellation.points();
    let mut m = CMat::zeros(n_users, block_len);
    for i in 0..n_users {
        for j in 0..block_len {
            m[(i, j)] = points[rng.random_range(0..points.len())];
        }
    }
    SymbolMatrix::new(m, constellation)
}

/// `K × L` i.i.d. uniform constellation symbols.
pub fn generate_symbols(
    n_users: usize,
    block_len: usize,
    constellation: Constellation,
    seed: u64,
) -> Result<SymbolMatrix> {
    generate_symbols_with(n_users, block_len, constellation, &mut stream_rng(seed, 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scatterer {
    /// Range bin, nonzero.
    pub bin: isize,
    /// Angle in radians.
    pub angle: f64,
    pub amplitude: Complex64,
}

/// Single target at range bin 0 surrounded by clutter in neighbouring bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EchoScene {
    pub target_angle: f64,
    pub target_amplitude: Complex64,
    pub scatterers: Vec<Scatterer>,
    pub noise_power: f64,
}

impl EchoScene {
    pub fn validate(&self, max_lag: usize) -> Result<()> {
        if !(self.noise_power >= 0.0) {
            return Err(Error::invalid("noise power must be >= 0"));
        }
        for s in &self.scatterers {
            if s.bin == 0 || s.bin.unsigned_abs() > max_lag {
                return Err(Error::invalid(format!(
                    "scatterer bin {} outside {{-{max_lag}..-1, 1..{max_lag}}}",
                    s.bin
                )));
            }
        }
        Ok(())
    }
}
