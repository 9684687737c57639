//! The complex oblique manifold `{X ∈ C^{N×L} : ‖x_i‖² = L·P_T/N ∀ rows i}`.
//!
//! The power constraint fixes row norms, so tangency, projection and
//! retraction all act row by row. The tangent space at `X` is
//! `{Z : Re(z_i · x_i^H) = 0 ∀ i}` and the orthogonal projector removes the
//! radial component of each row, `z_i − Re(z_i x_i^H)/‖x_i‖² · x_i`.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{complex_gaussian, stream_rng, CMat, WaveformMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManifoldSpec {
    pub n_antennas: usize,
    pub block_len: usize,
    pub total_power: f64,
}

impl ManifoldSpec {
    pub fn new(n_antennas: usize, block_len: usize, total_power: f64) -> Result<Self> {
        if n_antennas == 0 || block_len == 0 {
            return Err(Error::invalid("manifold needs N >= 1 and L >= 1"));
        }
        if !(total_power > 0.0 && total_power.is_finite()) {
            return Err(Error::invalid("total power must be positive"));
        }
        Ok(Self {
            n_antennas,
            block_len,
            total_power,
        })
    }

    /// Squared norm every row must carry: `L·P_T/N`.
    pub fn row_power(&self) -> f64 {
        self.block_len as f64 * self.total_power / self.n_antennas as f64
    }

    pub fn contains(&self, x: &WaveformMatrix, rel_tol: f64) -> bool {
        x.n_antennas() == self.n_antennas
            && x.block_len() == self.block_len
            && x.feasibility_residual(self.total_power) <= rel_tol
    }
}

/// Element of the tangent space at some base point.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector(pub CMat);

impl TangentVector {
    pub fn as_matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_matrix(self) -> CMat {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }
}

pub fn random_point_with<R: Rng + ?Sized>(spec: &ManifoldSpec, rng: &mut R) -> WaveformMatrix {
    let mut m = CMat::zeros(spec.n_antennas, spec.block_len);
    for i in 0..spec.n_antennas {
        for j in 0..spec.block_len {
            m[(i, j)] = complex_gaussian(rng);
        }
    }
    normalize_rows(&mut m, spec.row_power().sqrt());
    WaveformMatrix::new(m).expect("spec dimensions are nonzero")
}

/// Gaussian rows rescaled onto the manifold.
pub fn random_point(spec: &ManifoldSpec, seed: u64) -> WaveformMatrix {
    random_point_with(spec, &mut stream_rng(seed, 2))
}

/// Real inner product `Re tr(Z₁^H Z₂)`.
pub fn inner(z1: &TangentVector, z2: &TangentVector) -> Result<f64> {
    if z1.0.shape() != z2.0.shape() {
        return Err(Error::invalid("inner product dimension mismatch"));
    }
    Ok(real_inner(&z1.0, &z2.0))
}

pub(crate) fn real_inner(a: &CMat, b: &CMat) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| x.re * y.re + x.im * y.im)
        .sum()
}

/// Orthogonal projection of an ambient direction onto `T_X M`.
pub fn project_tangent(spec: &ManifoldSpec, x: &WaveformMatrix, g: &CMat) -> Result<TangentVector> {
    if g.shape() != x.as_matrix().shape() {
        return Err(Error::invalid("projection dimension mismatch"));
    }
    if !spec.contains(x, 1e-8) {
        return Err(Error::invalid("projection base point is off the manifold"));
    }
    Ok(TangentVector(project_unchecked(
        x.as_matrix(),
        g,
        spec.row_power(),
    )))
}

pub(crate) fn project_unchecked(x: &CMat, g: &CMat, row_power: f64) -> CMat {
    let mut out = g.clone();
    for i in 0..x.nrows() {
        let xr = x.row(i);
        let radial: f64 = g
            .row(i)
            .iter()
            .zip(xr.iter())
            .map(|(gv, xv)| gv.re * xv.re + gv.im * xv.im)
            .sum::<f64>()
            / row_power;
        for (o, xv) in out.row_mut(i).iter_mut().zip(xr.iter()) {
            *o -= xv * radial;
        }
    }
    out
}

/// Rescales every row of `X + Z` back to squared norm `L·P_T/N`.
pub fn retract(spec: &ManifoldSpec, x: &WaveformMatrix, z: &CMat) -> Result<WaveformMatrix> {
    if z.shape() != x.as_matrix().shape() {
        return Err(Error::invalid("retraction dimension mismatch"));
    }
    retract_unchecked(x.as_matrix(), z, spec.row_power().sqrt()).and_then(WaveformMatrix::new)
}

pub(crate) fn retract_unchecked(x: &CMat, z: &CMat, beta: f64) -> Result<CMat> {
    let mut y = x + z;
    normalize_rows_checked(&mut y, beta)?;
    Ok(y)
}

fn normalize_rows_checked(m: &mut CMat, beta: f64) -> Result<()> {
    for (i, mut row) in m.row_iter_mut().enumerate() {
        let norm = row.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::DegenerateInput(format!(
                "row {i} has norm {norm}, retraction undefined"
            )));
        }
        row *= Complex64::from(beta / norm);
    }
    Ok(())
}

pub(crate) fn normalize_rows(m: &mut CMat, beta: f64) {
    // Gaussian rows are nonzero with probability one.
    normalize_rows_checked(m, beta).expect("nonzero rows");
}
