//! Cayley transforms between matrix halfplanes and matrix disks, in the
//! variables, in the values, and both at once.

use crate::colligation::Colligation;
use crate::error::{Error, Result};
use crate::function::MatrixFunction;
use crate::numkit::{identity, right_divide, CMatrix};
use crate::pencil::{locate_omega_lambda, BessFunction, MatrixPoint, OperatorTuple};

/// `(Z - I)(Z + I)^{-1}`.
pub fn matrix_to_disk(z: &CMatrix) -> Result<CMatrix> {
    let i = identity(z.nrows());
    right_divide(&(z - &i), &(z + &i))
}

/// `(I + W)(I - W)^{-1}`.
pub fn matrix_to_halfplane(w: &CMatrix) -> Result<CMatrix> {
    let i = identity(w.nrows());
    right_divide(&(&i + w), &(&i - w))
}

pub fn point_to_disk(z: &MatrixPoint) -> Result<MatrixPoint> {
    z.try_map(matrix_to_disk)
}

pub fn point_to_halfplane(w: &MatrixPoint) -> Result<MatrixPoint> {
    w.try_map(matrix_to_halfplane)
}

/// Maps a strictly contractive commuting tuple to a strictly accretive one.
pub fn tuple_cayley(t: &OperatorTuple) -> Result<OperatorTuple> {
    let norm = t.max_norm();
    if norm >= 1.0 {
        return Err(Error::NotContractive { norm });
    }
    let r = t.map(matrix_to_halfplane)?;
    OperatorTuple::new(r.dims().to_vec(), r.carrier_dim(), r.matrices().to_vec())
}

/// Maps a strictly accretive commuting tuple to a strictly contractive one.
pub fn inverse_tuple_cayley(r: &OperatorTuple) -> Result<OperatorTuple> {
    let min_eig = r.accretive_margin();
    if min_eig <= 0.0 {
        return Err(Error::NotAccretive { min_eig });
    }
    let t = r.map(matrix_to_disk)?;
    OperatorTuple::new(t.dims().to_vec(), t.carrier_dim(), t.matrices().to_vec())
}

/// `(F - I)(F + I)^{-1}` for a value `F` with `Re F ≥ 0`.
pub fn value_to_disk(f: &CMatrix) -> Result<CMatrix> {
    matrix_to_disk(f)
}

/// `(I + S)(I - S)^{-1}`; fails with `SpectrumAtOne` when `I - S` is singular.
pub fn value_to_halfplane(s: &CMatrix) -> Result<CMatrix> {
    matrix_to_halfplane(s).map_err(|e| match e {
        Error::SingularBlock { .. } => Error::SpectrumAtOne,
        other => other,
    })
}

/// A contractive function on the disk product, backed either by a pencil
/// through the double Cayley transform or by a colligation.
#[derive(Debug, Clone)]
pub enum SchurAglerEvaluator {
    Bess(BessFunction),
    Colligation(Colligation),
}

impl SchurAglerEvaluator {
    pub fn eval(&self, w: &MatrixPoint) -> Result<CMatrix> {
        match self {
            Self::Bess(f) => value_to_disk(&f.eval(&point_to_halfplane(w)?)?),
            Self::Colligation(c) => c.transfer_eval(w),
        }
    }

    /// Value at a strictly contractive commuting tuple.
    pub fn eval_operator(&self, t: &OperatorTuple) -> Result<CMatrix> {
        match self {
            Self::Bess(f) => value_to_disk(&f.eval_operator(&tuple_cayley(t)?)?),
            Self::Colligation(c) => c.transfer_eval_operator(t),
        }
    }
}

impl MatrixFunction for SchurAglerEvaluator {
    fn var_dims(&self) -> Vec<usize> {
        match self {
            Self::Bess(f) => f.shape().n.clone(),
            Self::Colligation(c) => c.n().to_vec(),
        }
    }

    fn value_dim(&self) -> usize {
        match self {
            Self::Bess(f) => f.shape().u,
            Self::Colligation(c) => c.u(),
        }
    }

    fn eval(&self, w: &MatrixPoint) -> Result<CMatrix> {
        SchurAglerEvaluator::eval(self, w)
    }

    fn eval_operator(&self, t: &OperatorTuple) -> Option<Result<CMatrix>> {
        Some(SchurAglerEvaluator::eval_operator(self, t))
    }
}

/// `𝓒(f)(W) = (f(Z(W)) - I)(f(Z(W)) + I)^{-1}` with `Z_k(W) = (I + W_k)(I - W_k)^{-1}`.
pub fn double_cayley(f: &BessFunction) -> SchurAglerEvaluator {
    SchurAglerEvaluator::Bess(f.clone())
}

/// `f(Z) = (I + 𝓕(W(Z)))(I - 𝓕(W(Z)))^{-1}` for a function `𝓕` on the disk
/// product. Points of Ω outside the halfplane product are handled by
/// homogeneity.
#[derive(Debug, Clone)]
pub struct InverseDoubleCayley<F> {
    inner: F,
}

pub fn inverse_double_cayley<F: MatrixFunction>(inner: F) -> InverseDoubleCayley<F> {
    InverseDoubleCayley { inner }
}

impl<F: MatrixFunction> InverseDoubleCayley<F> {
    pub fn inner(&self) -> &F {
        &self.inner
    }

    fn eval_halfplane(&self, z: &MatrixPoint) -> Result<CMatrix> {
        value_to_halfplane(&self.inner.eval(&point_to_disk(z)?)?)
    }
}

impl<F: MatrixFunction> MatrixFunction for InverseDoubleCayley<F> {
    fn var_dims(&self) -> Vec<usize> {
        self.inner.var_dims()
    }

    fn value_dim(&self) -> usize {
        self.inner.value_dim()
    }

    fn eval(&self, z: &MatrixPoint) -> Result<CMatrix> {
        z.check_dims(&self.inner.var_dims())?;
        if z.in_halfplane() {
            return self.eval_halfplane(z);
        }
        let lambda = locate_omega_lambda(z).ok_or(Error::OutOfDomain)?;
        Ok(self.eval_halfplane(&z.scale(lambda))? / lambda)
    }

    fn eval_operator(&self, r: &OperatorTuple) -> Option<Result<CMatrix>> {
        let t = match inverse_tuple_cayley(r) {
            Ok(t) => t,
            Err(e) => return Some(Err(e)),
        };
        self.inner
            .eval_operator(&t)
            .map(|s| s.and_then(|s| value_to_halfplane(&s)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::FnFunction;
    use crate::numkit::{c64, op_norm, real_matrix};
    use crate::pencil::{PsdPencil, Shape};

    fn parallel_resistor() -> BessFunction {
        let shape = Shape::new(vec![1, 1], vec![1, 1], 1, 1).unwrap();
        let g = vec![real_matrix(1, 2, &[1.0, 1.0]), real_matrix(1, 2, &[0.0, 1.0])];
        BessFunction::new(PsdPencil::new(shape, g).unwrap())
    }

    fn identity_function() -> BessFunction {
        let shape = Shape::new(vec![1], vec![1], 1, 0).unwrap();
        BessFunction::new(PsdPencil::new(shape, vec![identity(1)]).unwrap())
    }

    #[test]
    fn point_examples() {
        let w = point_to_disk(&MatrixPoint::identity(&[2, 1])).unwrap();
        assert!(w.max_norm() < 1e-15);
        let w = point_to_disk(&MatrixPoint::real_scalars(&[3.0])).unwrap();
        assert!((w.component(0)[(0, 0)] - c64(0.5, 0.0)).norm() < 1e-15);
        let z = point_to_halfplane(&MatrixPoint::real_scalars(&[0.5])).unwrap();
        assert!((z.component(0)[(0, 0)] - c64(3.0, 0.0)).norm() < 1e-14);
        let z = point_to_halfplane(&MatrixPoint::zeros(&[3])).unwrap();
        assert_eq!(z, MatrixPoint::identity(&[3]));

        let w = MatrixPoint::new(vec![real_matrix(2, 2, &[0.0, 0.9, 0.0, 0.0])]).unwrap();
        let z = point_to_halfplane(&w).unwrap();
        assert!(z.in_halfplane());
        let back = point_to_disk(&z).unwrap();
        assert!(back.distance(&w) < 1e-11);
    }

    #[test]
    fn tuple_examples() {
        let t = OperatorTuple::from_point(&MatrixPoint::zeros(&[2, 1]), 3);
        let r = tuple_cayley(&t).unwrap();
        assert_eq!(r, OperatorTuple::from_point(&MatrixPoint::identity(&[2, 1]), 3));
        let back = inverse_tuple_cayley(&r).unwrap();
        assert!(back.max_norm() < 1e-15);
        let big = OperatorTuple::from_point(&MatrixPoint::real_scalars(&[1.0]), 2);
        assert!(matches!(tuple_cayley(&big), Err(Error::NotContractive { .. })));
    }

    #[test]
    fn double_cayley_examples() {
        let f = double_cayley(&parallel_resistor());
        let v = f.eval(&MatrixPoint::zeros(&[1, 1])).unwrap();
        assert!((v[(0, 0)] - c64(-1.0 / 3.0, 0.0)).norm() < 1e-12);

        let id = double_cayley(&identity_function());
        let w = MatrixPoint::scalars(&[c64(0.3, -0.4)]);
        assert!((id.eval(&w).unwrap()[(0, 0)] - c64(0.3, -0.4)).norm() < 1e-12);
    }

    #[test]
    fn inverse_double_cayley_examples() {
        let id = FnFunction::new(vec![1], 1, |w| Ok(w.component(0).clone()));
        let f = inverse_double_cayley(id);
        let v = f.eval(&MatrixPoint::scalars(&[c64(2.0, 1.0)])).unwrap();
        assert!((v[(0, 0)] - c64(2.0, 1.0)).norm() < 1e-12);

        let constant = FnFunction::new(vec![1], 1, |_| Ok(real_matrix(1, 1, &[-1.0 / 3.0])));
        let v = inverse_double_cayley(constant)
            .eval(&MatrixPoint::real_scalars(&[4.0]))
            .unwrap();
        assert!((v[(0, 0)] - c64(0.5, 0.0)).norm() < 1e-14);

        let one = FnFunction::new(vec![1], 1, |_| Ok(identity(1)));
        assert_eq!(
            inverse_double_cayley(one)
                .eval(&MatrixPoint::real_scalars(&[4.0]))
                .unwrap_err(),
            Error::SpectrumAtOne
        );
    }

    #[test]
    fn round_trip_through_evaluator() {
        let f = parallel_resistor();
        let g = inverse_double_cayley(double_cayley(&f));
        let z = MatrixPoint::scalars(&[c64(0.7, 1.2), c64(2.5, -0.3)]);
        let a = f.eval(&z).unwrap();
        let b = g.eval(&z).unwrap();
        assert!(op_norm(&(a - b)) < 1e-12);
    }
}
