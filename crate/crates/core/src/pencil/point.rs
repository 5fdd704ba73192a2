use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numkit::{c64, identity, is_finite, min_eig_herm, op_norm, CMatrix, C64};

const OMEGA_GRID: usize = 720;
const OMEGA_MARGIN: f64 = 1e-9;

/// A tuple `(Z_1, ..., Z_N)` of square complex matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPoint {
    z: Vec<CMatrix>,
}

impl MatrixPoint {
    pub fn new(z: Vec<CMatrix>) -> Result<Self> {
        if z.is_empty() {
            return Err(Error::ShapeMismatch("a point needs at least one variable".into()));
        }
        for (k, zk) in z.iter().enumerate() {
            if !zk.is_square() || zk.nrows() == 0 {
                return Err(Error::ShapeMismatch(format!(
                    "variable {k} is {}x{}, expected a non-empty square matrix",
                    zk.nrows(),
                    zk.ncols()
                )));
            }
            if !is_finite(zk) {
                return Err(Error::NonFinite);
            }
        }
        Ok(Self { z })
    }

    /// Point with scalar variables (`n_k = 1` for every k).
    pub fn scalars(values: &[C64]) -> Self {
        Self::new(values.iter().map(|&v| CMatrix::from_element(1, 1, v)).collect())
            .expect("scalar points are well formed")
    }

    pub fn real_scalars(values: &[f64]) -> Self {
        let v: Vec<C64> = values.iter().map(|&x| c64(x, 0.0)).collect();
        Self::scalars(&v)
    }

    /// `E = (I_{n_1}, ..., I_{n_N})`.
    pub fn identity(dims: &[usize]) -> Self {
        Self { z: dims.iter().map(|&n| identity(n)).collect() }
    }

    pub fn zeros(dims: &[usize]) -> Self {
        Self { z: dims.iter().map(|&n| CMatrix::zeros(n, n)).collect() }
    }

    pub fn components(&self) -> &[CMatrix] {
        &self.z
    }

    pub fn component(&self, k: usize) -> &CMatrix {
        &self.z[k]
    }

    pub fn into_components(self) -> Vec<CMatrix> {
        self.z
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.z.iter().map(|z| z.nrows()).collect()
    }

    pub fn check_dims(&self, dims: &[usize]) -> Result<()> {
        if self.dims() != dims {
            return Err(Error::ShapeMismatch(format!(
                "point has dimensions {:?}, expected {:?}",
                self.dims(),
                dims
            )));
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(&CMatrix) -> CMatrix) -> Self {
        Self { z: self.z.iter().map(f).collect() }
    }

    pub fn try_map(&self, f: impl Fn(&CMatrix) -> Result<CMatrix>) -> Result<Self> {
        Ok(Self { z: self.z.iter().map(f).collect::<Result<_>>()? })
    }

    pub fn scale(&self, lambda: C64) -> Self {
        self.map(|z| z * lambda)
    }

    /// `Z* = (Z_1*, ..., Z_N*)`.
    pub fn adjoint(&self) -> Self {
        self.map(|z| z.adjoint())
    }

    /// Entrywise conjugate `Z̄`.
    pub fn conj(&self) -> Self {
        self.map(|z| z.map(|v| v.conj()))
    }

    /// `diag(Z_1, ..., Z_N)`.
    pub fn diag(&self) -> CMatrix {
        crate::numkit::block_diag(&self.z)
    }

    /// `min_k min_eig_herm(Z_k)`; positive iff the point is in the halfplane product.
    pub fn halfplane_margin(&self) -> f64 {
        self.z.iter().map(min_eig_herm).fold(f64::INFINITY, f64::min)
    }

    pub fn in_halfplane(&self) -> bool {
        self.halfplane_margin() > 0.0
    }

    pub fn max_norm(&self) -> f64 {
        self.z.iter().map(op_norm).fold(0.0, f64::max)
    }

    pub fn in_disk(&self) -> bool {
        self.max_norm() < 1.0
    }

    pub fn in_omega(&self) -> bool {
        locate_omega_lambda(self).is_some()
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.z
            .iter()
            .zip(&other.z)
            .map(|(a, b)| op_norm(&(a - b)))
            .fold(0.0, f64::max)
    }
}

fn rotated_margin(z: &MatrixPoint, theta: f64) -> f64 {
    let lambda = C64::from_polar(1.0, theta);
    z.components()
        .iter()
        .map(|zk| min_eig_herm(&(zk * lambda)))
        .fold(f64::INFINITY, f64::min)
}

/// Unimodular `λ` with `λZ` inside the halfplane product, if one exists.
///
/// The margin `θ ↦ min_k λ_min(Re(e^{iθ} Z_k))` is scanned on a 720-point
/// grid and the best cell refined by golden-section search.
pub fn locate_omega_lambda(z: &MatrixPoint) -> Option<C64> {
    let step = 2.0 * PI / OMEGA_GRID as f64;
    let (best_j, _) = (0..OMEGA_GRID)
        .map(|j| (j, rotated_margin(z, j as f64 * step)))
        .fold((0, f64::NEG_INFINITY), |acc, cur| if cur.1 > acc.1 { cur } else { acc });

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = ((best_j as f64 - 1.0) * step, (best_j as f64 + 1.0) * step);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (rotated_margin(z, c), rotated_margin(z, d));
    for _ in 0..80 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = rotated_margin(z, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = rotated_margin(z, d);
        }
    }
    let (theta, best) = [0.5 * (a + b), best_j as f64 * step]
        .into_iter()
        .map(|t| (t, rotated_margin(z, t)))
        .max_by(|x, y| x.1.total_cmp(&y.1))
        .expect("two candidates");
    (best > OMEGA_MARGIN).then(|| C64::from_polar(1.0, theta))
}
