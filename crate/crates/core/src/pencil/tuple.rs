use crate::error::{Error, Result};
use crate::numkit::{identity, is_finite, kron, min_eig_herm, op_norm, sub_block, CMatrix};
use crate::pencil::MatrixPoint;

/// Relative commutator tolerance for entry blocks.
pub const COMMUTE_TOL: f64 = 1e-9;

/// A tuple `(R_1, ..., R_N)` where `R_k` is an `n_k x n_k` matrix whose
/// entries are `d x d` blocks drawn from a common commutative algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorTuple {
    n: Vec<usize>,
    d: usize,
    r: Vec<CMatrix>,
}

impl OperatorTuple {
    /// Validates sizes and pairwise commutation of all entry blocks.
    pub fn new(n: Vec<usize>, d: usize, r: Vec<CMatrix>) -> Result<Self> {
        if d == 0 || n.is_empty() || n.len() != r.len() {
            return Err(Error::ShapeMismatch(format!(
                "tuple with {} variables, {} matrices, carrier dimension {d}",
                n.len(),
                r.len()
            )));
        }
        for (k, (&nk, rk)) in n.iter().zip(&r).enumerate() {
            if rk.nrows() != nk * d || rk.ncols() != nk * d {
                return Err(Error::ShapeMismatch(format!(
                    "R_{k} is {}x{}, expected {}x{}",
                    rk.nrows(),
                    rk.ncols(),
                    nk * d,
                    nk * d
                )));
            }
            if !is_finite(rk) {
                return Err(Error::NonFinite);
            }
        }
        let tuple = Self { n, d, r };
        let residual = tuple.commutator_residual();
        if residual > COMMUTE_TOL {
            return Err(Error::NotCommuting { residual });
        }
        Ok(tuple)
    }

    /// `R_k = Z_k ⊗ I_d`, the scalar-entry tuple attached to a point.
    pub fn from_point(z: &MatrixPoint, d: usize) -> Self {
        Self {
            n: z.dims(),
            d,
            r: z.components().iter().map(|zk| kron(zk, &identity(d))).collect(),
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.n
    }

    pub fn carrier_dim(&self) -> usize {
        self.d
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.r
    }

    pub fn matrix(&self, k: usize) -> &CMatrix {
        &self.r[k]
    }

    /// The `(i, j)` entry of `R_k` as a `d x d` block.
    pub fn entry(&self, k: usize, i: usize, j: usize) -> CMatrix {
        sub_block(&self.r[k], i, j, self.d)
    }

    fn entries(&self) -> Vec<CMatrix> {
        let mut out = Vec::new();
        for (k, &nk) in self.n.iter().enumerate() {
            for i in 0..nk {
                for j in 0..nk {
                    out.push(self.entry(k, i, j));
                }
            }
        }
        out
    }

    /// `max ‖XY - YX‖ / (‖X‖‖Y‖)` over all pairs of entry blocks.
    pub fn commutator_residual(&self) -> f64 {
        if self.d == 1 {
            return 0.0;
        }
        let entries = self.entries();
        let norms: Vec<f64> = entries.iter().map(op_norm).collect();
        let mut worst: f64 = 0.0;
        for a in 0..entries.len() {
            for b in (a + 1)..entries.len() {
                let scale = norms[a] * norms[b];
                if scale == 0.0 {
                    continue;
                }
                let c = &entries[a] * &entries[b] - &entries[b] * &entries[a];
                worst = worst.max(op_norm(&c) / scale);
            }
        }
        worst
    }

    /// `min_k min_eig_herm(R_k)`: the largest `s` with `Re R_k ≥ s I` for all k.
    pub fn accretive_margin(&self) -> f64 {
        self.r.iter().map(min_eig_herm).fold(f64::INFINITY, f64::min)
    }

    pub fn max_norm(&self) -> f64 {
        self.r.iter().map(op_norm).fold(0.0, f64::max)
    }

    pub fn is_accretive(&self) -> bool {
        self.accretive_margin() > 0.0
    }

    pub fn is_contractive(&self) -> bool {
        self.max_norm() < 1.0
    }

    pub fn map(&self, f: impl Fn(&CMatrix) -> Result<CMatrix>) -> Result<Self> {
        Ok(Self {
            n: self.n.clone(),
            d: self.d,
            r: self.r.iter().map(f).collect::<Result<_>>()?,
        })
    }

    /// `diag(R_1, ..., R_N)` with entries laid out so that the result acts on
    /// `C^{n_1 + ... + n_N} ⊗ C^d`.
    pub fn diag(&self) -> CMatrix {
        crate::numkit::block_diag(&self.r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::{c64, real_matrix};

    #[test]
    fn rejects_noncommuting_entries() {
        let a = real_matrix(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let b = real_matrix(2, 2, &[0.0, 0.0, 1.0, 0.0]);
        let r = crate::numkit::block_diag(&[a.clone(), b.clone()]);
        // R_1 = diag(a, b) as a 2x2 matrix of 2x2 entries: a and b do not commute.
        let err = OperatorTuple::new(vec![2], 2, vec![r]).unwrap_err();
        assert!(matches!(err, Error::NotCommuting { .. }));
    }

    #[test]
    fn from_point_has_scalar_entries() {
        let z = MatrixPoint::scalars(&[c64(1.0, 2.0)]);
        let t = OperatorTuple::from_point(&z, 3);
        assert_eq!(t.entry(0, 0, 0), identity(3) * c64(1.0, 2.0));
        assert_eq!(t.commutator_residual(), 0.0);
        assert!((t.accretive_margin() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn shape_checks() {
        assert!(OperatorTuple::new(vec![2], 2, vec![identity(3)]).is_err());
        assert!(OperatorTuple::new(vec![1], 0, vec![identity(1)]).is_err());
    }
}
