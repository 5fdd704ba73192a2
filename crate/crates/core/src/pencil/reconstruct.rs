use crate::error::{Error, Result};
use crate::numkit::{
    hstack, identity, kron, op_norm, orthonormal_span, vstack, CMatrix, DEFAULT_RANK_TOL,
};
use crate::pencil::{BessFunction, MatrixPoint, PsdPencil, Shape};

/// A point together with the factors `φ_k` sampled there.
pub type PhiSample = (MatrixPoint, Vec<CMatrix>);

const SAMPLE_TOL: f64 = 1e-8;
const RESULT_TOL: f64 = 1e-7;
const BASE_POINT_TOL: f64 = 1e-12;

/// `Σ_k φ_k(Λ)* (X_k ⊗ I_{m_k}) φ_k(Z)`.
pub fn decomposition_sum(
    left: &[CMatrix],
    x: &MatrixPoint,
    right: &[CMatrix],
    m: &[usize],
) -> CMatrix {
    let u = right[0].ncols();
    let mut acc = CMatrix::zeros(left[0].ncols(), u);
    for (k, (l, r)) in left.iter().zip(right).enumerate() {
        acc += l.adjoint() * kron(x.component(k), &identity(m[k])) * r;
    }
    acc
}

fn check_sample_shapes(samples: &[PhiSample], shape: &Shape) -> Result<()> {
    for (i, (z, phi)) in samples.iter().enumerate() {
        z.check_dims(&shape.n)?;
        if phi.len() != shape.vars() {
            return Err(Error::ShapeMismatch(format!(
                "sample {i} has {} factors for {} variables",
                phi.len(),
                shape.vars()
            )));
        }
        for (k, p) in phi.iter().enumerate() {
            if p.nrows() != shape.rows(k) || p.ncols() != shape.u {
                return Err(Error::ShapeMismatch(format!(
                    "sample {i}: phi_{k} is {}x{}, expected {}x{}",
                    p.nrows(),
                    p.ncols(),
                    shape.rows(k),
                    shape.u
                )));
            }
        }
    }
    Ok(())
}

/// Rebuilds a pencil from samples of `φ_k`.
///
/// With `φ(E)` taken at the identity point and `ℋ` the span of the
/// differences `φ(Λ) - φ(E)`, the factors are the row blocks of
/// `[φ(E)  Q_ℋ]` where `Q_ℋ` is an orthonormal basis of `ℋ`. The `h` of the
/// returned shape is `dim ℋ`; the `h` of the argument is ignored.
pub fn reconstruct_from_phi(samples: &[PhiSample], shape: &Shape) -> Result<BessFunction> {
    shape.validate()?;
    check_sample_shapes(samples, shape)?;
    let e = MatrixPoint::identity(&shape.n);
    let base = samples
        .iter()
        .position(|(z, _)| z.distance(&e) <= BASE_POINT_TOL)
        .ok_or(Error::MissingBasePoint)?;

    // The identity holds iff Σ φ(Λ)*(Z⊗I)φ(Z) does not depend on Λ.
    let mut residual: f64 = 0.0;
    for (z, phi_z) in samples {
        let reference = decomposition_sum(&samples[base].1, z, phi_z, &shape.m);
        let scale = 1.0 + op_norm(&reference);
        for (_, phi_l) in samples {
            let value = decomposition_sum(phi_l, z, phi_z, &shape.m);
            residual = residual.max(op_norm(&(value - &reference)) / scale);
        }
    }
    if residual > SAMPLE_TOL {
        return Err(Error::InconsistentSamples { residual });
    }

    let stacked: Vec<CMatrix> = samples.iter().map(|(_, phi)| vstack(phi)).collect();
    let phi_e = &stacked[base];
    let diffs: Vec<CMatrix> = stacked.iter().map(|s| s - phi_e).collect();
    let scale = stacked.iter().map(op_norm).fold(1.0, f64::max);
    // Cutoff is absolute in units of the sample scale, so rounding noise in
    // a constant φ does not create hidden directions.
    let diffs = hstack(&diffs);
    let spread = op_norm(&diffs);
    let q = if spread <= DEFAULT_RANK_TOL * scale {
        CMatrix::zeros(shape.total_rows(), 0)
    } else {
        orthonormal_span(&diffs, DEFAULT_RANK_TOL * scale / spread)
    };
    let g_all = hstack(&[phi_e.clone(), q.clone()]);

    let mut g = Vec::with_capacity(shape.vars());
    let mut offset = 0;
    for k in 0..shape.vars() {
        let rows = shape.rows(k);
        g.push(g_all.rows(offset, rows).into_owned());
        offset += rows;
    }
    let new_shape = Shape::new(shape.n.clone(), shape.m.clone(), shape.u, q.ncols())?;
    let f = BessFunction::new(PsdPencil::new(new_shape, g)?);

    let mut worst: f64 = 0.0;
    for (z, phi_z) in samples.iter().filter(|(z, _)| z.in_halfplane()) {
        let expect = decomposition_sum(&samples[base].1, z, phi_z, &shape.m);
        let got = f.eval(z)?;
        worst = worst.max(op_norm(&(got - &expect)) / (1.0 + op_norm(&expect)));
    }
    if worst > RESULT_TOL {
        return Err(Error::InconsistentSamples { residual: worst });
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::{c64, real_matrix};

    fn parallel_resistor() -> BessFunction {
        let shape = Shape::new(vec![1, 1], vec![1, 1], 1, 1).unwrap();
        let g = vec![real_matrix(1, 2, &[1.0, 1.0]), real_matrix(1, 2, &[0.0, 1.0])];
        BessFunction::new(PsdPencil::new(shape, g).unwrap())
    }

    fn grid() -> Vec<MatrixPoint> {
        vec![
            MatrixPoint::identity(&[1, 1]),
            MatrixPoint::scalars(&[c64(0.5, 0.3), c64(2.0, -1.0)]),
            MatrixPoint::scalars(&[c64(1.5, -0.2), c64(0.4, 0.9)]),
            MatrixPoint::scalars(&[c64(3.0, 1.0), c64(1.0, 0.0)]),
        ]
    }

    #[test]
    fn round_trip_parallel_resistor() {
        let f = parallel_resistor();
        let samples: Vec<PhiSample> =
            grid().into_iter().map(|z| {
                let phi = f.phi(&z).unwrap();
                (z, phi)
            }).collect();
        let g = reconstruct_from_phi(&samples, f.shape()).unwrap();
        assert_eq!(g.shape().h, 1);
        for z in [
            MatrixPoint::scalars(&[c64(0.2, 0.7), c64(1.1, 0.3)]),
            MatrixPoint::scalars(&[c64(5.0, -2.0), c64(0.3, 0.1)]),
        ] {
            let a = f.eval(&z).unwrap();
            let b = g.eval(&z).unwrap();
            assert!(op_norm(&(a - b)) < 1e-10);
        }
    }

    #[test]
    fn constant_phi_gives_empty_hidden_space() {
        let shape = Shape::new(vec![1, 1], vec![1, 1], 1, 0).unwrap();
        let g = vec![real_matrix(1, 1, &[2.0]), real_matrix(1, 1, &[3.0])];
        let samples: Vec<PhiSample> = grid().into_iter().map(|z| (z, g.clone())).collect();
        let f = reconstruct_from_phi(&samples, &shape).unwrap();
        assert_eq!(f.shape().h, 0);
    }

    #[test]
    fn missing_base_point() {
        let f = parallel_resistor();
        let samples: Vec<PhiSample> = grid()
            .into_iter()
            .skip(1)
            .map(|z| {
                let phi = f.phi(&z).unwrap();
                (z, phi)
            })
            .collect();
        assert_eq!(
            reconstruct_from_phi(&samples, f.shape()).unwrap_err(),
            Error::MissingBasePoint
        );
    }

    #[test]
    fn inconsistent_samples() {
        let f = parallel_resistor();
        let mut samples: Vec<PhiSample> = grid()
            .into_iter()
            .map(|z| {
                let phi = f.phi(&z).unwrap();
                (z, phi)
            })
            .collect();
        samples[2].1[0][(0, 0)] += c64(1e-2, 0.0);
        assert!(matches!(
            reconstruct_from_phi(&samples, f.shape()),
            Err(Error::InconsistentSamples { .. })
        ));
    }
}
