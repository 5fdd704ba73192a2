//! Dense complex linear algebra shared by the rest of the crate.
//!
//! Everything works on [`CMatrix`], a heap-allocated matrix of `Complex<f64>`.
//! Solves go through LU after a condition-number check so that points near
//! the boundary of a domain fail loudly instead of returning garbage.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Condition number above which a block is reported as singular.
pub const SINGULAR_COND: f64 = 1e12;

/// Default relative rank cutoff for [`orthonormal_span`].
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// Builds a matrix from real row-major data.
pub fn real_matrix(rows: usize, cols: usize, data: &[f64]) -> CMatrix {
    assert_eq!(data.len(), rows * cols, "real_matrix: wrong data length");
    CMatrix::from_fn(rows, cols, |i, j| c64(data[i * cols + j], 0.0))
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn scalar(z: C64) -> CMatrix {
    CMatrix::from_element(1, 1, z)
}

pub fn is_finite(a: &CMatrix) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Kronecker product: `kron(A, B)[(i*p + k), (j*q + l)] = A[i,j] * B[k,l]`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// Smallest eigenvalue of `(A + A*)/2`. Returns `+inf` for an empty matrix.
pub fn min_eig_herm(a: &CMatrix) -> f64 {
    assert!(a.is_square(), "min_eig_herm: matrix must be square");
    if a.nrows() == 0 {
        return f64::INFINITY;
    }
    hermitian_part(a)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    a.singular_values().iter().copied().collect()
}

/// Spectral (operator) norm.
pub fn op_norm(a: &CMatrix) -> f64 {
    singular_values(a).into_iter().fold(0.0, f64::max)
}

/// Ratio of extreme singular values; `inf` for rank-deficient input.
pub fn cond(a: &CMatrix) -> f64 {
    let sv = singular_values(a);
    if sv.is_empty() {
        return 1.0;
    }
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min <= 0.0 || !min.is_finite() {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Solves `A X = B` after checking that `A` is well conditioned.
pub fn solve(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if !a.is_square() || a.nrows() != b.nrows() {
        return Err(Error::ShapeMismatch(format!(
            "solve: {}x{} system with {}x{} right-hand side",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    if a.nrows() == 0 {
        return Ok(CMatrix::zeros(0, b.ncols()));
    }
    let k = cond(a);
    if !(k <= SINGULAR_COND) {
        return Err(Error::SingularBlock { cond: k });
    }
    a.clone()
        .lu()
        .solve(b)
        .ok_or(Error::SingularBlock { cond: f64::INFINITY })
}

/// Computes `N D^{-1}` by solving the transposed system.
pub fn right_divide(num: &CMatrix, den: &CMatrix) -> Result<CMatrix> {
    Ok(solve(&den.transpose(), &num.transpose())?.transpose())
}

/// `M11 - M12 M22^{-1} M21` for the split of `M` at index `top`.
///
/// `top == dim(M)` is accepted and returns `M` itself (empty lower block).
pub fn schur_complement(m: &CMatrix, top: usize) -> Result<CMatrix> {
    let n = m.nrows();
    if !m.is_square() {
        return Err(Error::ShapeMismatch(format!(
            "schur_complement: {}x{} matrix is not square",
            m.nrows(),
            m.ncols()
        )));
    }
    if top == 0 || top > n {
        return Err(Error::InvalidSplit { top, dim: n });
    }
    if top == n {
        return Ok(m.clone());
    }
    let rest = n - top;
    let m11 = m.view((0, 0), (top, top));
    let m12 = m.view((0, top), (top, rest));
    let m21 = m.view((top, 0), (rest, top)).into_owned();
    let m22 = m.view((top, top), (rest, rest)).into_owned();
    let x = solve(&m22, &m21)?;
    Ok(m11 - m12 * x)
}

/// Orthonormal basis (as columns) of the span of the columns of `vectors`.
///
/// Singular values below `tol * sigma_max` are treated as zero.
pub fn orthonormal_span(vectors: &CMatrix, tol: f64) -> CMatrix {
    let n = vectors.nrows();
    if vectors.ncols() == 0 || n == 0 {
        return CMatrix::zeros(n, 0);
    }
    let svd = vectors.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let sigma = &svd.singular_values;
    let smax = sigma.iter().copied().fold(0.0, f64::max);
    if smax <= f64::MIN_POSITIVE {
        return CMatrix::zeros(n, 0);
    }
    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]));
    let keep: Vec<usize> = order
        .into_iter()
        .filter(|&i| sigma[i] > tol * smax)
        .collect();
    CMatrix::from_fn(n, keep.len(), |i, j| u[(i, keep[j])])
}

/// Orthonormal basis of the orthogonal complement of the column span of
/// `basis` (assumed orthonormal), built by pivoted Gram–Schmidt over the
/// standard basis vectors. Near-ties go to the smallest index so the result
/// depends only on the subspace, not on rounding noise.
pub fn complement_basis(basis: &CMatrix) -> CMatrix {
    let n = basis.nrows();
    let target = n.saturating_sub(basis.ncols());
    let mut residuals: Vec<DVector<C64>> = (0..n)
        .map(|i| {
            let mut e = DVector::<C64>::zeros(n);
            e[i] = c64(1.0, 0.0);
            for _ in 0..2 {
                let proj = basis * (basis.adjoint() * &e);
                e -= proj;
            }
            e
        })
        .collect();
    let mut used = vec![false; n];
    let mut chosen: Vec<DVector<C64>> = Vec::with_capacity(target);
    while chosen.len() < target {
        let best = (0..n)
            .filter(|&i| !used[i])
            .map(|i| residuals[i].norm())
            .fold(0.0, f64::max);
        if best <= 1e-12 {
            break;
        }
        let pick = (0..n)
            .find(|&i| !used[i] && residuals[i].norm() >= best * (1.0 - 1e-6))
            .expect("a candidate attains the maximum");
        used[pick] = true;
        let mut q = residuals[pick].clone();
        for prev in &chosen {
            let c = prev.dotc(&q);
            q -= prev * c;
        }
        let q = q.unscale(q.norm());
        for (i, r) in residuals.iter_mut().enumerate() {
            if !used[i] {
                let c = q.dotc(r);
                *r -= &q * c;
            }
        }
        chosen.push(q);
    }
    CMatrix::from_fn(n, chosen.len(), |i, j| chosen[j][i])
}

/// Embeds the rows of `a` into a taller zero matrix (appending `pad` rows).
fn pad_rows(a: &CMatrix, pad: usize) -> CMatrix {
    let mut out = CMatrix::zeros(a.nrows() + pad, a.ncols());
    out.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(a);
    out
}

/// `‖A*A - I‖` in the spectral norm.
pub fn unitarity_residual(a: &CMatrix) -> f64 {
    op_norm(&(a.adjoint() * a - identity(a.ncols())))
}

/// Unitary `U` on `C^(n+pad)` with `U * dom_basis = ran_basis * action`.
///
/// The orthogonal complement of the domain is sent onto the orthogonal
/// complement of the image, i-th pivoted Gram–Schmidt vector to i-th.
pub fn unitary_completion(
    dom_basis: &CMatrix,
    ran_basis: &CMatrix,
    action: &CMatrix,
    pad: usize,
) -> Result<CMatrix> {
    if action.nrows() != ran_basis.ncols() || action.ncols() != dom_basis.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "unitary_completion: action is {}x{}, bases have {} and {} columns",
            action.nrows(),
            action.ncols(),
            ran_basis.ncols(),
            dom_basis.ncols()
        )));
    }
    if dom_basis.nrows() != ran_basis.nrows() {
        return Err(Error::DefectMismatch {
            domain: dom_basis.nrows() + pad - dom_basis.ncols(),
            range: ran_basis.nrows() + pad - dom_basis.ncols(),
        });
    }
    let residual = unitarity_residual(action);
    if action.ncols() > 0 && residual > 1e-8 {
        return Err(Error::NotIsometric { residual });
    }
    let dom = pad_rows(dom_basis, pad);
    let image = pad_rows(&(ran_basis * action), pad);
    let dom_c = complement_basis(&dom);
    let img_c = complement_basis(&image);
    if dom_c.ncols() != img_c.ncols() || dom.ncols() + dom_c.ncols() != dom.nrows() {
        return Err(Error::DefectMismatch {
            domain: dom_c.ncols(),
            range: img_c.ncols(),
        });
    }
    Ok(&image * dom.adjoint() + &img_c * dom_c.adjoint())
}

/// Closest unitary in the polar sense: `U V*` from the SVD `U Σ V*`.
pub fn polar_unitary(a: &CMatrix) -> CMatrix {
    if a.nrows() == 0 || a.ncols() == 0 {
        return a.clone();
    }
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    u * v_t
}

/// Hermitian unitary closest to `a`: the matrix sign of its Hermitian part.
pub fn nearest_hermitian_unitary(a: &CMatrix) -> CMatrix {
    let eig = hermitian_part(a).symmetric_eigen();
    let v = &eig.eigenvectors;
    let signs = CMatrix::from_diagonal(&DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues
            .iter()
            .map(|&l| c64(if l >= 0.0 { 1.0 } else { -1.0 }, 0.0)),
    ));
    v * signs * v.adjoint()
}

/// Block-diagonal matrix from square or rectangular blocks.
pub fn block_diag(blocks: &[CMatrix]) -> CMatrix {
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMatrix::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

/// Stacks matrices with equal column counts on top of each other.
pub fn vstack(blocks: &[CMatrix]) -> CMatrix {
    let cols = blocks.first().map_or(0, |b| b.ncols());
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMatrix::zeros(rows, cols);
    let mut r = 0;
    for b in blocks {
        assert_eq!(b.ncols(), cols, "vstack: column mismatch");
        out.view_mut((r, 0), (b.nrows(), cols)).copy_from(b);
        r += b.nrows();
    }
    out
}

/// Places matrices with equal row counts side by side.
pub fn hstack(blocks: &[CMatrix]) -> CMatrix {
    let rows = blocks.first().map_or(0, |b| b.nrows());
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMatrix::zeros(rows, cols);
    let mut c = 0;
    for b in blocks {
        assert_eq!(b.nrows(), rows, "hstack: row mismatch");
        out.view_mut((0, c), (rows, b.ncols())).copy_from(b);
        c += b.ncols();
    }
    out
}

/// Entrywise complex conjugate.
pub fn conj(a: &CMatrix) -> CMatrix {
    a.map(|z| z.conj())
}

/// Copy of the `(i, j)` block of a matrix partitioned into `size x size` blocks.
pub fn sub_block(a: &CMatrix, i: usize, j: usize, size: usize) -> CMatrix {
    a.view((i * size, j * size), (size, size)).into_owned()
}

/// Row-major nested `[re, im]` pairs, the on-disk form of a matrix.
pub fn to_nested(a: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| [a[(i, j)].re, a[(i, j)].im]).collect())
        .collect()
}

/// Inverse of [`to_nested`]; `cols` is used when there are no rows.
pub fn from_nested(rows: &[Vec<[f64; 2]>], cols: usize) -> Result<CMatrix> {
    let ncols = rows.first().map_or(cols, |r| r.len());
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::ShapeMismatch("ragged matrix rows".into()));
    }
    let m = CMatrix::from_fn(rows.len(), ncols, |i, j| c64(rows[i][j][0], rows[i][j][1]));
    if !is_finite(&m) {
        return Err(Error::NonFinite);
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> CMatrix {
        CMatrix::from_fn(r, c, |_, _| {
            c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    fn e(n: usize, i: usize) -> CMatrix {
        let mut v = CMatrix::zeros(n, 1);
        v[i] = c64(1.0, 0.0);
        v
    }

    #[test]
    fn kron_examples() {
        assert_eq!(kron(&identity(2), &identity(3)), identity(6));
        let nil = real_matrix(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(kron(&nil, &identity(1)), nil);
        let k = kron(&real_matrix(1, 1, &[2.0]), &real_matrix(2, 2, &[1.0; 4]));
        assert_eq!(k, real_matrix(2, 2, &[2.0; 4]));
    }

    #[test]
    fn kron_index_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = rand_matrix(&mut rng, 2, 3);
        let b = rand_matrix(&mut rng, 3, 2);
        let k = kron(&a, &b);
        for i in 0..2 {
            for j in 0..3 {
                for p in 0..3 {
                    for q in 0..2 {
                        assert_eq!(k[(i * 3 + p, j * 2 + q)], a[(i, j)] * b[(p, q)]);
                    }
                }
            }
        }
    }

    #[test]
    fn schur_complement_examples() {
        let m = real_matrix(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let s = schur_complement(&m, 1).unwrap();
        assert!((s[(0, 0)] - c64(1.5, 0.0)).norm() < 1e-15);

        let bd = block_diag(&[real_matrix(2, 2, &[1.0, 2.0, 3.0, 4.0]), identity(2)]);
        assert_eq!(schur_complement(&bd, 2).unwrap(), bd.view((0, 0), (2, 2)));

        let sing = real_matrix(2, 2, &[2.0, 1.0, 1.0, 0.0]);
        assert!(matches!(
            schur_complement(&sing, 1),
            Err(Error::SingularBlock { .. })
        ));
        assert!(matches!(
            schur_complement(&m, 0),
            Err(Error::InvalidSplit { .. })
        ));
    }

    #[test]
    fn min_eig_examples() {
        assert!((min_eig_herm(&identity(3)) - 1.0).abs() < 1e-15);
        let a = real_matrix(2, 2, &[0.0, 2.0, 0.0, 0.0]);
        assert!((min_eig_herm(&a) + 1.0).abs() < 1e-14);
        let d = real_matrix(2, 2, &[1.0, 0.0, 0.0, 5.0]);
        assert!((min_eig_herm(&d) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn orthonormal_span_examples() {
        let dup = hstack(&[e(3, 0), e(3, 0), e(3, 1)]);
        let b = orthonormal_span(&dup, DEFAULT_RANK_TOL);
        assert_eq!(b.ncols(), 2);
        assert!(unitarity_residual(&b) < 1e-12);
        // e3 is orthogonal to the span
        assert!((b.adjoint() * e(3, 2)).norm() < 1e-12);

        assert_eq!(orthonormal_span(&CMatrix::zeros(3, 1), DEFAULT_RANK_TOL).ncols(), 0);

        let v = real_matrix(2, 2, &[1.0, 1.0, 1.0, -1.0]);
        // Gram matrix [[2,0],[0,2]] has full rank, so the span is C^2.
        let gram = v.adjoint() * &v;
        assert!(min_eig_herm(&gram) > 1.0);
        let b = orthonormal_span(&v, DEFAULT_RANK_TOL);
        assert_eq!(b.ncols(), 2);
        assert!(unitarity_residual(&b) < 1e-12);
    }

    #[test]
    fn unitary_completion_examples() {
        let u = unitary_completion(&identity(3), &identity(3), &identity(3), 0).unwrap();
        assert!((u - identity(3)).norm() < 1e-14);

        let u = unitary_completion(&e(2, 0), &e(2, 1), &identity(1), 0).unwrap();
        assert!(unitarity_residual(&u) < 1e-12);
        assert!((&u * e(2, 0) - e(2, 1)).norm() < 1e-12);

        let empty = CMatrix::zeros(2, 0);
        let u = unitary_completion(&empty, &empty, &CMatrix::zeros(0, 0), 0).unwrap();
        assert!((u - identity(2)).norm() < 1e-14);
    }

    #[test]
    fn unitary_completion_rejects_mismatched_ambients() {
        let r = unitary_completion(&e(2, 0), &e(3, 0), &identity(1), 0);
        assert!(matches!(r, Err(Error::DefectMismatch { .. })));
    }

    #[test]
    fn unitary_completion_with_padding() {
        let u = unitary_completion(&e(2, 0), &e(2, 1), &identity(1), 2).unwrap();
        assert_eq!(u.nrows(), 4);
        assert!(unitarity_residual(&u) < 1e-12);
        assert!((u.column(0) - e(4, 1).column(0)).norm() < 1e-12);
    }

    #[test]
    fn nearest_hermitian_unitary_is_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = rand_matrix(&mut rng, 4, 4);
        let s = nearest_hermitian_unitary(&a);
        assert!((&s - s.adjoint()).norm() < 1e-12);
        assert!(unitarity_residual(&s) < 1e-12);
    }

    #[test]
    fn right_divide_inverts() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = rand_matrix(&mut rng, 3, 3) + identity(3).scale(3.0);
        let n = rand_matrix(&mut rng, 2, 3);
        let x = right_divide(&n, &d).unwrap();
        assert!((x * d - n).norm() < 1e-12);
    }
}
