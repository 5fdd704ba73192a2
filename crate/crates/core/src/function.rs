//! A common evaluation interface for operator-valued functions of a matrix
//! point, so that checks can run against pencils, transfer functions and
//! plain closures alike.

use std::sync::Arc;

use crate::error::Result;
use crate::numkit::CMatrix;
use crate::pencil::{MatrixPoint, OperatorTuple};

pub trait MatrixFunction: Send + Sync {
    /// Sizes `(n_1, ..., n_N)` of the matrix variables.
    fn var_dims(&self) -> Vec<usize>;

    /// Dimension of the value space.
    fn value_dim(&self) -> usize;

    fn eval(&self, z: &MatrixPoint) -> Result<CMatrix>;

    /// Value at a commuting tuple, when the function supports substitution.
    fn eval_operator(&self, _r: &OperatorTuple) -> Option<Result<CMatrix>> {
        None
    }

    /// The decomposition factors `φ_k(Z)`, when known.
    fn phi(&self, _z: &MatrixPoint) -> Option<Result<Vec<CMatrix>>> {
        None
    }
}

type EvalFn = dyn Fn(&MatrixPoint) -> Result<CMatrix> + Send + Sync;

/// Wraps a closure as a [`MatrixFunction`].
#[derive(Clone)]
pub struct FnFunction {
    dims: Vec<usize>,
    value_dim: usize,
    f: Arc<EvalFn>,
}

impl FnFunction {
    pub fn new(
        dims: Vec<usize>,
        value_dim: usize,
        f: impl Fn(&MatrixPoint) -> Result<CMatrix> + Send + Sync + 'static,
    ) -> Self {
        Self { dims, value_dim, f: Arc::new(f) }
    }
}

impl std::fmt::Debug for FnFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FnFunction")
            .field("dims", &self.dims)
            .field("value_dim", &self.value_dim)
            .finish_non_exhaustive()
    }
}

impl MatrixFunction for FnFunction {
    fn var_dims(&self) -> Vec<usize> {
        self.dims.clone()
    }

    fn value_dim(&self) -> usize {
        self.value_dim
    }

    fn eval(&self, z: &MatrixPoint) -> Result<CMatrix> {
        z.check_dims(&self.dims)?;
        (self.f)(z)
    }
}

impl<T: MatrixFunction + ?Sized> MatrixFunction for &T {
    fn var_dims(&self) -> Vec<usize> {
        (**self).var_dims()
    }
    fn value_dim(&self) -> usize {
        (**self).value_dim()
    }
    fn eval(&self, z: &MatrixPoint) -> Result<CMatrix> {
        (**self).eval(z)
    }
    fn eval_operator(&self, r: &OperatorTuple) -> Option<Result<CMatrix>> {
        (**self).eval_operator(r)
    }
    fn phi(&self, z: &MatrixPoint) -> Option<Result<Vec<CMatrix>>> {
        (**self).phi(z)
    }
}
