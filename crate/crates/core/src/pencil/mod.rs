//! Positive pencils `A(Z) = Σ_k G_k* (Z_k ⊗ I_{m_k}) G_k` and the functions
//! `f(Z) = a(Z) - b(Z) d(Z)^{-1} c(Z)` they define through a Schur complement.

mod point;
mod reconstruct;
mod tuple;

use serde::{Deserialize, Serialize};

pub use point::{locate_omega_lambda, MatrixPoint};
pub use reconstruct::{decomposition_sum, reconstruct_from_phi, PhiSample};
pub use tuple::{OperatorTuple, COMMUTE_TOL};

use crate::error::{Error, Result};
use crate::function::MatrixFunction;
use crate::numkit::{
    identity, is_finite, kron, min_eig_herm, op_norm, schur_complement, solve, vstack, CMatrix,
};

/// Dimensions of a pencil: variable sizes `n`, multiplicities `m`, the value
/// space `u` and the hidden space `h`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shape {
    pub n: Vec<usize>,
    pub m: Vec<usize>,
    pub u: usize,
    pub h: usize,
}

impl Shape {
    pub fn new(n: Vec<usize>, m: Vec<usize>, u: usize, h: usize) -> Result<Self> {
        let shape = Self { n, m, u, h };
        shape.validate()?;
        Ok(shape)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n.is_empty() || self.n.len() != self.m.len() {
            return Err(Error::ShapeMismatch(format!(
                "need N >= 1 variables with one multiplicity each, got n={:?} m={:?}",
                self.n, self.m
            )));
        }
        if self.n.contains(&0) || self.u == 0 {
            return Err(Error::ShapeMismatch("variable sizes and u must be positive".into()));
        }
        Ok(())
    }

    pub fn vars(&self) -> usize {
        self.n.len()
    }

    /// `u + h`, the width of every `G_k`.
    pub fn width(&self) -> usize {
        self.u + self.h
    }

    /// Row count `n_k m_k` of `G_k`.
    pub fn rows(&self, k: usize) -> usize {
        self.n[k] * self.m[k]
    }

    /// `Σ_k n_k m_k`.
    pub fn total_rows(&self) -> usize {
        (0..self.vars()).map(|k| self.rows(k)).sum()
    }
}

/// The factors `G_k` of a pencil whose coefficients are positive semidefinite
/// by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdPencil {
    shape: Shape,
    g: Vec<CMatrix>,
}

impl PsdPencil {
    pub fn new(shape: Shape, g: Vec<CMatrix>) -> Result<Self> {
        shape.validate()?;
        if g.len() != shape.vars() {
            return Err(Error::ShapeMismatch(format!(
                "{} factors for {} variables",
                g.len(),
                shape.vars()
            )));
        }
        for (k, gk) in g.iter().enumerate() {
            if gk.nrows() != shape.rows(k) || gk.ncols() != shape.width() {
                return Err(Error::ShapeMismatch(format!(
                    "G_{k} is {}x{}, expected {}x{}",
                    gk.nrows(),
                    gk.ncols(),
                    shape.rows(k),
                    shape.width()
                )));
            }
            if !is_finite(gk) {
                return Err(Error::NonFinite);
            }
        }
        Ok(Self { shape, g })
    }

    /// Factors scalar-variable coefficients `A_j ≥ 0` as `A_j = G_j* G_j`;
    /// the first `u` coordinates form the value space.
    pub fn from_scalar_coefficients(a: &[CMatrix], u: usize) -> Result<Self> {
        let width = a.first().map(|x| x.nrows()).unwrap_or(0);
        if a.is_empty() || u == 0 || u > width {
            return Err(Error::ShapeMismatch(format!(
                "need at least one coefficient and 0 < u <= {width}"
            )));
        }
        let mut g = Vec::with_capacity(a.len());
        for (j, aj) in a.iter().enumerate() {
            if aj.nrows() != width || aj.ncols() != width {
                return Err(Error::ShapeMismatch(format!(
                    "A_{j} is {}x{}, expected {width}x{width}",
                    aj.nrows(),
                    aj.ncols()
                )));
            }
            let scale = op_norm(aj);
            let eig = crate::numkit::hermitian_part(aj).symmetric_eigen();
            let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
            if min < -1e-9 * scale {
                return Err(Error::NotPsd { index: j, min_eig: min });
            }
            let kept: Vec<usize> = (0..width)
                .filter(|&i| eig.eigenvalues[i] > 1e-9 * scale)
                .collect();
            let gj = CMatrix::from_fn(kept.len(), width, |r, c| {
                let i = kept[r];
                eig.eigenvectors[(c, i)].conj() * eig.eigenvalues[i].sqrt()
            });
            g.push(gj);
        }
        let shape = Shape {
            n: vec![1; a.len()],
            m: g.iter().map(|gj| gj.nrows()).collect(),
            u,
            h: width - u,
        };
        Self::new(shape, g)
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn factors(&self) -> &[CMatrix] {
        &self.g
    }

    /// `A(Z) = Σ_k G_k* (Z_k ⊗ I_{m_k}) G_k`.
    pub fn eval(&self, z: &MatrixPoint) -> Result<CMatrix> {
        z.check_dims(&self.shape.n)?;
        let w = self.shape.width();
        let mut acc = CMatrix::zeros(w, w);
        for (k, gk) in self.g.iter().enumerate() {
            let zk = kron(z.component(k), &identity(self.shape.m[k]));
            acc += gk.adjoint() * zk * gk;
        }
        Ok(acc)
    }

    /// `Σ_k G_k* G_k`, the pencil at `E`.
    pub fn gram(&self) -> CMatrix {
        let w = self.shape.width();
        self.g
            .iter()
            .fold(CMatrix::zeros(w, w), |acc, gk| acc + gk.adjoint() * gk)
    }

    /// The amplified pencil `Σ_k Σ_{i,j} A_k^{(ij)} ⊗ (R_k)_{ij}` with
    /// `A_k^{(ij)} = G_k* (e_i e_j* ⊗ I) G_k`.
    pub fn eval_operator(&self, r: &OperatorTuple) -> Result<CMatrix> {
        if r.dims() != self.shape.n.as_slice() {
            return Err(Error::ShapeMismatch(format!(
                "tuple has dimensions {:?}, expected {:?}",
                r.dims(),
                self.shape.n
            )));
        }
        let d = r.carrier_dim();
        let w = self.shape.width();
        let mut acc = CMatrix::zeros(w * d, w * d);
        for (k, gk) in self.g.iter().enumerate() {
            let m = self.shape.m[k];
            let row_block = |i: usize| gk.view((i * m, 0), (m, w));
            for i in 0..self.shape.n[k] {
                for j in 0..self.shape.n[k] {
                    let coeff = row_block(i).adjoint() * row_block(j);
                    acc += kron(&coeff, &r.entry(k, i, j));
                }
            }
        }
        Ok(acc)
    }
}

/// A function `f = a - b d^{-1} c` defined by a [`PsdPencil`].
#[derive(Debug, Clone, PartialEq)]
pub struct BessFunction {
    pencil: PsdPencil,
}

impl BessFunction {
    pub fn new(pencil: PsdPencil) -> Self {
        Self { pencil }
    }

    pub fn pencil(&self) -> &PsdPencil {
        &self.pencil
    }

    pub fn shape(&self) -> &Shape {
        self.pencil.shape()
    }

    fn eval_direct(&self, z: &MatrixPoint) -> Result<CMatrix> {
        let a = self.pencil.eval(z)?;
        schur_complement(&a, self.shape().u)
    }

    /// `f(Z)`. Points of Ω outside the halfplane product are rotated into it
    /// and the value rotated back using `f(λZ) = λ f(Z)`.
    pub fn eval(&self, z: &MatrixPoint) -> Result<CMatrix> {
        z.check_dims(&self.shape().n)?;
        if z.in_halfplane() {
            return self.eval_direct(z);
        }
        let lambda = locate_omega_lambda(z).ok_or(Error::OutOfDomain)?;
        Ok(self.eval_direct(&z.scale(lambda))? / lambda)
    }

    /// `ψ(Z) = [I; -d(Z)^{-1} c(Z)]`.
    pub fn psi(&self, z: &MatrixPoint) -> Result<CMatrix> {
        let a = self.pencil.eval(z)?;
        let (u, h) = (self.shape().u, self.shape().h);
        if h == 0 {
            return Ok(identity(u));
        }
        let c = a.view((u, 0), (h, u)).into_owned();
        let d = a.view((u, u), (h, h)).into_owned();
        let x = solve(&d, &c)?;
        Ok(vstack(&[identity(u), -x]))
    }

    /// `φ_k(Z) = G_k ψ(Z)` for every k.
    pub fn phi(&self, z: &MatrixPoint) -> Result<Vec<CMatrix>> {
        let psi = self.psi(z)?;
        Ok(self.pencil.factors().iter().map(|g| g * &psi).collect())
    }

    /// `f(R)` for a commuting accretive tuple, by substituting the entry
    /// blocks into the pencil and taking the Schur complement over `H ⊗ C^d`.
    pub fn eval_operator(&self, r: &OperatorTuple) -> Result<CMatrix> {
        let residual = r.commutator_residual();
        if residual > COMMUTE_TOL {
            return Err(Error::NotCommuting { residual });
        }
        let a = self.pencil.eval_operator(r)?;
        schur_complement(&a, self.shape().u * r.carrier_dim())
    }

    /// Spot check that `f(Z) + f(Z)*` is positive semidefinite.
    pub fn positivity_margin(&self, z: &MatrixPoint) -> Result<f64> {
        Ok(min_eig_herm(&self.eval(z)?))
    }
}

impl MatrixFunction for BessFunction {
    fn var_dims(&self) -> Vec<usize> {
        self.shape().n.clone()
    }

    fn value_dim(&self) -> usize {
        self.shape().u
    }

    fn eval(&self, z: &MatrixPoint) -> Result<CMatrix> {
        BessFunction::eval(self, z)
    }

    fn eval_operator(&self, r: &OperatorTuple) -> Option<Result<CMatrix>> {
        Some(BessFunction::eval_operator(self, r))
    }

    fn phi(&self, z: &MatrixPoint) -> Option<Result<Vec<CMatrix>>> {
        Some(BessFunction::phi(self, z))
    }
}
