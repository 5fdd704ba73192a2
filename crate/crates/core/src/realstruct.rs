//! Anti-unitary involutions `ι(x) = J conj(x)`, realness tests for operators,
//! functions and colligations, and the doubling that turns a decomposition
//! of a real function into a real one.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::colligation::Colligation;
use crate::error::{Error, Result};
use crate::function::MatrixFunction;
use crate::membership::halfplane_grid;
use crate::numkit::{
    block_diag, c64, conj, identity, is_finite, kron, op_norm, unitarity_residual, vstack,
    CMatrix,
};
use crate::pencil::MatrixPoint;

const INVOLUTION_TOL: f64 = 1e-10;
const INVARIANCE_TOL: f64 = 1e-9;
const REAL_TOL: f64 = 1e-9;
const VALIDATION_SEED: u64 = 0x7ea1;

/// An anti-unitary involution on `C^n`, stored as the unitary `J` with
/// `ι(x) = J conj(x)` and `J conj(J) = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct Involution {
    j: CMatrix,
}

impl Involution {
    pub fn new(j: CMatrix) -> Result<Self> {
        if !j.is_square() {
            return Err(Error::ShapeMismatch(format!(
                "involution matrix is {}x{}",
                j.nrows(),
                j.ncols()
            )));
        }
        if !is_finite(&j) {
            return Err(Error::NonFinite);
        }
        let residual = unitarity_residual(&j)
            .max(op_norm(&(&j * conj(&j) - identity(j.nrows()))));
        if residual > INVOLUTION_TOL {
            return Err(Error::NotInvolution { residual });
        }
        Ok(Self { j })
    }

    /// Entrywise conjugation on `C^n`.
    pub fn standard(n: usize) -> Self {
        Self { j: identity(n) }
    }

    /// `ι_a ⊗ ι_b`, acting on `C^a ⊗ C^b` with the Kronecker ordering.
    pub fn tensor(a: &Self, b: &Self) -> Self {
        Self { j: kron(&a.j, &b.j) }
    }

    pub fn direct_sum(a: &Self, b: &Self) -> Self {
        Self { j: block_diag(&[a.j.clone(), b.j.clone()]) }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.j
    }

    pub fn dim(&self) -> usize {
        self.j.nrows()
    }

    /// `ι` applied to every column of `x`.
    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        &self.j * conj(x)
    }
}

/// `‖J_ran conj(A) - A J_dom‖ / (1 + ‖A‖)`.
pub fn real_operator_residual(a: &CMatrix, dom: &Involution, ran: &Involution) -> Result<f64> {
    if a.nrows() != ran.dim() || a.ncols() != dom.dim() {
        return Err(Error::ShapeMismatch(format!(
            "operator is {}x{}, involutions act on C^{} and C^{}",
            a.nrows(),
            a.ncols(),
            dom.dim(),
            ran.dim()
        )));
    }
    Ok(op_norm(&(ran.apply(a) - a * &dom.j)) / (1.0 + op_norm(a)))
}

/// Whether `ι_ran A = A ι_dom` within `tol`.
pub fn is_real_operator(a: &CMatrix, dom: &Involution, ran: &Involution, tol: f64) -> Result<bool> {
    Ok(real_operator_residual(a, dom, ran)? <= tol)
}

/// `max_Z ‖J conj(f(Z̄)) conj(J) - f(Z)‖ / (1 + ‖f(Z)‖)` over `points`.
pub fn real_function_residual(
    f: &dyn MatrixFunction,
    inv: &Involution,
    points: &[MatrixPoint],
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for z in points {
        let fz = f.eval(z)?;
        let sharp = inv.apply(&f.eval(&z.conj())?) * conj(&inv.j);
        worst = worst.max(op_norm(&(sharp - &fz)) / (1.0 + op_norm(&fz)));
    }
    Ok(worst)
}

/// Whether `ι f(Z̄) ι = f(Z)` at every point; evaluation failures count as
/// not real.
pub fn is_real_function(
    f: &dyn MatrixFunction,
    inv: &Involution,
    points: &[MatrixPoint],
    tol: f64,
) -> bool {
    real_function_residual(f, inv, points).is_ok_and(|r| r <= tol)
}

/// Doubled factors `φ̃_k(Z) = V_k^{-1} [φ_k(Z); (I⊗J_k) conj(φ_k(Z̄)) conj(J_U)] / √2`
/// on `M̃_k = M_k ⊕ M_k`, real for `ι_{n_k} ⊗ ι_{M̃_k}` with the swap involution
/// `ι_{M̃_k} = [[0, ι_{M_k}], [ι_{M_k}, 0]]`.
#[derive(Debug, Clone)]
pub struct RealDecomposition<F> {
    inner: F,
    inv_u: Involution,
    inv_m: Vec<Involution>,
}

/// Builds the doubled decomposition after checking that `f` is real on a
/// seeded halfplane grid.
pub fn realify_decomposition<F: MatrixFunction>(
    f: F,
    inv_u: &Involution,
    inv_m: &[Involution],
) -> Result<RealDecomposition<F>> {
    let dims = f.var_dims();
    if inv_u.dim() != f.value_dim() || inv_m.len() != dims.len() {
        return Err(Error::ShapeMismatch(format!(
            "need an involution on C^{} and one per variable ({} given)",
            f.value_dim(),
            inv_m.len()
        )));
    }
    let grid = halfplane_grid(&dims, 8, VALIDATION_SEED);
    let residual = real_function_residual(&f, inv_u, &grid)?;
    if residual > REAL_TOL {
        return Err(Error::NotRealFunction { residual });
    }
    let phi = f
        .phi(&grid[0])
        .ok_or_else(|| Error::ShapeMismatch("function has no known decomposition".into()))??;
    for (k, p) in phi.iter().enumerate() {
        if p.nrows() != dims[k] * inv_m[k].dim() {
            return Err(Error::ShapeMismatch(format!(
                "phi_{k} has {} rows, expected {} x {}",
                p.nrows(),
                dims[k],
                inv_m[k].dim()
            )));
        }
    }
    Ok(RealDecomposition { inner: f, inv_u: inv_u.clone(), inv_m: inv_m.to_vec() })
}

impl<F: MatrixFunction> RealDecomposition<F> {
    pub fn inner(&self) -> &F {
        &self.inner
    }

    /// Dimensions `2 m_k` of the doubled spaces.
    pub fn m_tilde(&self) -> Vec<usize> {
        self.inv_m.iter().map(|i| 2 * i.dim()).collect()
    }

    /// The swap involution on `M̃_k`.
    pub fn involution_m_tilde(&self, k: usize) -> Involution {
        let j = &self.inv_m[k].j;
        let m = j.nrows();
        let mut out = CMatrix::zeros(2 * m, 2 * m);
        out.view_mut((0, m), (m, m)).copy_from(j);
        out.view_mut((m, 0), (m, m)).copy_from(j);
        Involution { j: out }
    }

    /// The involution `ι_{n_k} ⊗ ι_{M̃_k}` on the range of `φ̃_k`.
    pub fn range_involution(&self, k: usize) -> Involution {
        let n = self.inner.var_dims()[k];
        Involution::tensor(&Involution::standard(n), &self.involution_m_tilde(k))
    }

    pub fn phi_tilde(&self, z: &MatrixPoint) -> Result<Vec<CMatrix>> {
        let no_phi = || Error::ShapeMismatch("function has no known decomposition".into());
        let phi = self.inner.phi(z).ok_or_else(no_phi)??;
        let phi_bar = self.inner.phi(&z.conj()).ok_or_else(no_phi)??;
        let dims = self.inner.var_dims();
        let j_u_bar = conj(&self.inv_u.j);
        let mut out = Vec::with_capacity(phi.len());
        for k in 0..phi.len() {
            let (n, m) = (dims[k], self.inv_m[k].dim());
            let twist = kron(&identity(n), &self.inv_m[k].j);
            let stacked = vstack(&[phi[k].clone(), twist * conj(&phi_bar[k]) * &j_u_bar]);
            // V_k^{-1}: index s·nm + i·m + a goes to i·2m + s·m + a.
            let mut rearranged = CMatrix::zeros(2 * n * m, stacked.ncols());
            for s in 0..2 {
                for i in 0..n {
                    for a in 0..m {
                        rearranged
                            .row_mut(i * 2 * m + s * m + a)
                            .copy_from(&stacked.row(s * n * m + i * m + a));
                    }
                }
            }
            out.push(rearranged * c64(FRAC_1_SQRT_2, 0.0));
        }
        Ok(out)
    }

    /// `max_k ‖(ι_{n_k}⊗ι_{M̃_k}) φ̃_k(Z̄) ι_U - φ̃_k(Z)‖ / (1 + ‖φ̃_k(Z)‖)`.
    pub fn realness_residual(&self, z: &MatrixPoint) -> Result<f64> {
        let phi = self.phi_tilde(z)?;
        let phi_bar = self.phi_tilde(&z.conj())?;
        let j_u_bar = conj(&self.inv_u.j);
        let mut worst: f64 = 0.0;
        for k in 0..phi.len() {
            let sharp = self.range_involution(k).apply(&phi_bar[k]) * &j_u_bar;
            worst = worst.max(op_norm(&(sharp - &phi[k])) / (1.0 + op_norm(&phi[k])));
        }
        Ok(worst)
    }

    /// `‖f(Z) - Σ_k φ̃_k(Λ)*(Z_k ⊗ I) φ̃_k(Z)‖ / (1 + ‖f(Z)‖)`.
    pub fn decomposition_residual(&self, z: &MatrixPoint, lambda: &MatrixPoint) -> Result<f64> {
        let fz = self.inner.eval(z)?;
        let sum = crate::pencil::decomposition_sum(
            &self.phi_tilde(lambda)?,
            z,
            &self.phi_tilde(z)?,
            &self.m_tilde(),
        );
        Ok(op_norm(&(sum - &fz)) / (1.0 + op_norm(&fz)))
    }
}

/// `((ι_{n_1+...+n_N} ⊗ inv_x) ⊕ inv_u)`.
pub fn colligation_involution(c: &Colligation, inv_x: &Involution, inv_u: &Involution) -> Result<Involution> {
    if inv_x.dim() != c.x() || inv_u.dim() != c.u() {
        return Err(Error::ShapeMismatch(format!(
            "involutions act on C^{} and C^{}, colligation has x={} u={}",
            inv_x.dim(),
            inv_u.dim(),
            c.x(),
            c.u()
        )));
    }
    let p: usize = c.n().iter().sum();
    Ok(Involution::direct_sum(&Involution::tensor(&Involution::standard(p), inv_x), inv_u))
}

/// Realness of `U` for `((ι_{n_1+...+n_N} ⊗ inv_x) ⊕ inv_u)`.
pub fn check_real_colligation(c: &Colligation, inv_x: &Involution, inv_u: &Involution) -> Result<bool> {
    let big = colligation_involution(c, inv_x, inv_u)?;
    is_real_operator(c.matrix(), &big, &big, REAL_TOL)
}

/// `‖(I - P) ι(Q)‖` for an orthonormal basis `Q` with projector `P`.
fn invariance_loss(q: &CMatrix, inv: &Involution) -> f64 {
    if q.ncols() == 0 {
        return 0.0;
    }
    let image = inv.apply(q);
    op_norm(&(&image - q * (q.adjoint() * &image)))
}

/// Orthonormal `ι`-fixed basis of the orthogonal complement of the
/// `ι`-invariant span of `q`. Candidates `(v + ιv)/2` and `(iv + ι(iv))/2`
/// for the projected standard basis vectors are taken in order and kept when
/// they survive Gram–Schmidt.
fn fixed_complement_basis(q: &CMatrix, inv: &Involution) -> CMatrix {
    let n = q.nrows();
    let target = n - q.ncols();
    let project = |v: CMatrix| -> CMatrix {
        let mut v = v;
        for _ in 0..2 {
            let p = q * (q.adjoint() * &v);
            v -= p;
        }
        v
    };
    let symmetrize = |v: &CMatrix| (v + inv.apply(v)) * c64(0.5, 0.0);
    let mut chosen: Vec<CMatrix> = Vec::with_capacity(target);
    'outer: for i in 0..n {
        let mut e = CMatrix::zeros(n, 1);
        e[(i, 0)] = c64(1.0, 0.0);
        let v = project(e);
        for candidate in [symmetrize(&v), symmetrize(&(&v * c64(0.0, 1.0)))] {
            if chosen.len() == target {
                break 'outer;
            }
            let mut w = candidate;
            for _ in 0..2 {
                for prev in &chosen {
                    let c = (prev.adjoint() * &w)[(0, 0)];
                    w -= prev * c64(c.re, 0.0);
                }
                w = project(w);
            }
            w = symmetrize(&w);
            let norm = w.norm();
            if norm > 1e-6 {
                chosen.push(w / c64(norm, 0.0));
            }
        }
    }
    crate::numkit::hstack(&chosen).resize_horizontally(target.min(chosen.len()), c64(0.0, 0.0))
}

/// Unitary `U` with `U dom_basis = ran_basis · action` whose complement map
/// sends an `ι`-fixed basis of `span(dom)^⊥` to one of the image complement,
/// so that `U` is `ι`-real whenever the prescribed part is.
pub fn real_unitary_completion(
    dom_basis: &CMatrix,
    ran_basis: &CMatrix,
    action: &CMatrix,
    inv: &Involution,
) -> Result<CMatrix> {
    let n = inv.dim();
    if dom_basis.nrows() != n
        || ran_basis.nrows() != n
        || action.nrows() != ran_basis.ncols()
        || action.ncols() != dom_basis.ncols()
    {
        return Err(Error::ShapeMismatch(format!(
            "bases of C^{} and C^{} with a {}x{} action for an involution on C^{n}",
            dom_basis.nrows(),
            ran_basis.nrows(),
            action.nrows(),
            action.ncols()
        )));
    }
    let residual = unitarity_residual(action);
    if action.ncols() > 0 && residual > 1e-8 {
        return Err(Error::NotIsometric { residual });
    }
    let image = ran_basis * action;
    let loss = invariance_loss(dom_basis, inv).max(invariance_loss(&image, inv));
    if loss > INVARIANCE_TOL {
        return Err(Error::NotInvariant { loss });
    }
    let dom_c = fixed_complement_basis(dom_basis, inv);
    let img_c = fixed_complement_basis(&image, inv);
    let expected = n - dom_basis.ncols();
    if dom_c.ncols() != expected || img_c.ncols() != expected {
        return Err(Error::DefectMismatch { domain: dom_c.ncols(), range: img_c.ncols() });
    }
    Ok(&image * dom_basis.adjoint() + img_c * dom_c.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::FnFunction;
    use crate::numkit::real_matrix;
    use crate::pencil::{BessFunction, PsdPencil, Shape};

    fn parallel_resistor() -> BessFunction {
        let shape = Shape::new(vec![1, 1], vec![1, 1], 1, 1).unwrap();
        let g = vec![real_matrix(1, 2, &[1.0, 1.0]), real_matrix(1, 2, &[0.0, 1.0])];
        BessFunction::new(PsdPencil::new(shape, g).unwrap())
    }

    #[test]
    fn involution_examples() {
        assert_eq!(Involution::standard(3).matrix(), &identity(3));
        assert_eq!(
            Involution::tensor(&Involution::standard(2), &Involution::standard(3)),
            Involution::standard(6)
        );
        assert!(Involution::new(real_matrix(2, 2, &[0.0, 1.0, 1.0, 0.0])).is_ok());
        let bad = real_matrix(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert!(matches!(Involution::new(bad), Err(Error::NotInvolution { .. })));
    }

    #[test]
    fn tensor_law_on_elementary_tensors() {
        let a = Involution::new(real_matrix(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
        let b = Involution::new(CMatrix::from_element(1, 1, c64(0.0, 1.0))).unwrap();
        let u = CMatrix::from_column_slice(2, 1, &[c64(1.0, 2.0), c64(-0.5, 0.3)]);
        let h = CMatrix::from_column_slice(1, 1, &[c64(0.2, -1.0)]);
        let lhs = Involution::tensor(&a, &b).apply(&kron(&u, &h));
        let rhs = kron(&a.apply(&u), &b.apply(&h));
        assert!((lhs - rhs).norm() < 1e-15);
    }

    #[test]
    fn operator_examples() {
        let std1 = Involution::standard(1);
        assert!(is_real_operator(&real_matrix(1, 1, &[2.0]), &std1, &std1, 1e-12).unwrap());
        let ii = CMatrix::from_element(1, 1, c64(0.0, 1.0));
        assert!(!is_real_operator(&ii, &std1, &std1, 1e-12).unwrap());
        let minus = Involution::new(real_matrix(1, 1, &[-1.0])).unwrap();
        assert!(is_real_operator(&ii, &std1, &minus, 1e-12).unwrap());
    }

    #[test]
    fn function_examples() {
        let points = halfplane_grid(&[1, 1], 5, 1);
        let std1 = Involution::standard(1);
        assert!(is_real_function(&parallel_resistor(), &std1, &points, 1e-12));
        let rotate = FnFunction::new(vec![1], 1, |z| Ok(z.component(0) * c64(0.0, 1.0)));
        let pts = halfplane_grid(&[1], 5, 1);
        assert!(!is_real_function(&rotate, &std1, &pts, 1e-9));
        let constant = FnFunction::new(vec![1], 2, |_| Ok(real_matrix(2, 2, &[1.0, 0.0, 0.0, 3.0])));
        assert!(is_real_function(&constant, &Involution::standard(2), &pts, 1e-12));
        assert!(matches!(
            realify_decomposition(rotate, &std1, std::slice::from_ref(&std1)),
            Err(Error::NotRealFunction { .. })
        ));
    }

    #[test]
    fn doubled_decomposition() {
        let std1 = Involution::standard(1);
        let r = realify_decomposition(parallel_resistor(), &std1, &[std1.clone(), std1.clone()]).unwrap();
        let pts = halfplane_grid(&[1, 1], 5, 9);
        for w in pts.windows(2) {
            assert!(r.realness_residual(&w[0]).unwrap() < 1e-12);
            assert!(r.decomposition_residual(&w[0], &w[1]).unwrap() < 1e-12);
        }
    }

    #[test]
    fn completion_examples() {
        let std2 = Involution::standard(2);
        let empty = CMatrix::zeros(2, 0);
        let u = real_unitary_completion(&empty, &empty, &CMatrix::zeros(0, 0), &std2).unwrap();
        assert!((u - identity(2)).norm() < 1e-12);

        let e1 = real_matrix(2, 1, &[1.0, 0.0]);
        let e2 = real_matrix(2, 1, &[0.0, 1.0]);
        let u = real_unitary_completion(&e1, &e2, &identity(1), &std2).unwrap();
        assert!(unitarity_residual(&u) < 1e-12);
        assert!((&u * &e1 - &e2).norm() < 1e-12);
        assert!(is_real_operator(&u, &std2, &std2, 1e-12).unwrap());

        let s = c64(FRAC_1_SQRT_2, 0.0);
        let skew = CMatrix::from_column_slice(2, 1, &[s, c64(0.0, FRAC_1_SQRT_2)]);
        assert!(matches!(
            real_unitary_completion(&skew, &skew, &identity(1), &std2),
            Err(Error::NotInvariant { .. })
        ));
    }

    #[test]
    fn colligation_examples() {
        let swap = real_matrix(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let c = Colligation::new(vec![1], 1, 1, swap.clone()).unwrap();
        let std1 = Involution::standard(1);
        assert!(check_real_colligation(&c, &std1, &std1).unwrap());
        let phase = swap * C64_PHASE;
        let c = Colligation::new(vec![1], 1, 1, phase).unwrap();
        assert!(!check_real_colligation(&c, &std1, &std1).unwrap());
    }

    const C64_PHASE: crate::numkit::C64 =
        crate::numkit::C64::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2);
}
