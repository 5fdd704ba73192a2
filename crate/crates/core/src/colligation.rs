//! Unitary colligations `U = [A B; C D]` on `(C^{n_1+...+n_N} ⊗ X) ⊕ U`,
//! their transfer functions, kernel identities for contractive functions,
//! and the lurking-isometry construction of `U` from kernel samples.

use std::f64::consts::SQRT_2;

use crate::cayley::{point_to_halfplane, value_to_disk, value_to_halfplane};
use crate::error::{Error, Result};
use crate::membership::disk_grid;
use crate::numkit::{
    c64, hermitian_part, hstack, is_finite, scalar, C64, identity, kron, nearest_hermitian_unitary, op_norm, polar_unitary,
    singular_values, solve, unitarity_residual, unitary_completion, vstack, CMatrix,
    DEFAULT_RANK_TOL,
};
use crate::pencil::{reconstruct_from_phi, BessFunction, MatrixPoint, OperatorTuple, PhiSample, Shape, COMMUTE_TOL};
use crate::realstruct::{real_unitary_completion, Involution};
use crate::report::{Report, Worst};

/// Unitarity tolerance accepted by [`Colligation::new`].
pub const UNITARY_TOL: f64 = 1e-9;
/// Tolerance for `U = U*` in the self-adjoint case.
pub const SELFADJOINT_TOL: f64 = 1e-8;
const GRAM_TOL: f64 = 1e-7;
const IDENTITY_TOL: f64 = 1e-8;
const SYMMETRY_PRECHECK: f64 = 1e-6;

/// Seed used by [`bess_from_colligation`] for its sample grid.
pub const DEFAULT_GRID_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, PartialEq)]
pub struct Colligation {
    n: Vec<usize>,
    x: usize,
    u: usize,
    matrix: CMatrix,
}

impl Colligation {
    pub fn new(n: Vec<usize>, x: usize, u: usize, matrix: CMatrix) -> Result<Self> {
        if n.is_empty() || n.contains(&0) || u == 0 {
            return Err(Error::ShapeMismatch(format!(
                "colligation needs N >= 1 positive variable sizes and u > 0, got n={n:?} u={u}"
            )));
        }
        let size = n.iter().sum::<usize>() * x + u;
        if matrix.nrows() != size || matrix.ncols() != size {
            return Err(Error::ShapeMismatch(format!(
                "colligation matrix is {}x{}, expected {size}x{size}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if !is_finite(&matrix) {
            return Err(Error::NonFinite);
        }
        let residual = unitarity_residual(&matrix);
        if residual > UNITARY_TOL {
            return Err(Error::NotUnitary { residual });
        }
        Ok(Self { n, x, u, matrix })
    }

    pub fn n(&self) -> &[usize] {
        &self.n
    }

    /// Dimension of the state space `X`.
    pub fn x(&self) -> usize {
        self.x
    }

    pub fn u(&self) -> usize {
        self.u
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// `(n_1 + ... + n_N) · x`.
    pub fn state_dim(&self) -> usize {
        self.n.iter().sum::<usize>() * self.x
    }

    pub fn a(&self) -> CMatrix {
        let s = self.state_dim();
        self.matrix.view((0, 0), (s, s)).into_owned()
    }

    pub fn b(&self) -> CMatrix {
        let s = self.state_dim();
        self.matrix.view((0, s), (s, self.u)).into_owned()
    }

    pub fn c(&self) -> CMatrix {
        let s = self.state_dim();
        self.matrix.view((s, 0), (self.u, s)).into_owned()
    }

    pub fn d(&self) -> CMatrix {
        let s = self.state_dim();
        self.matrix.view((s, s), (self.u, self.u)).into_owned()
    }

    pub fn unitarity_residual(&self) -> f64 {
        unitarity_residual(&self.matrix)
    }

    /// `‖U - U*‖`.
    pub fn selfadjoint_residual(&self) -> f64 {
        op_norm(&(&self.matrix - self.matrix.adjoint()))
    }

    pub fn is_selfadjoint(&self) -> bool {
        self.selfadjoint_residual() <= SELFADJOINT_TOL
    }

    /// `P(W) ⊗ I_x` with `P(W) = diag(W_1, ..., W_N)`.
    fn state_multiplier(&self, w: &MatrixPoint) -> CMatrix {
        kron(&w.diag(), &identity(self.x))
    }

    /// `D + C (P(W)⊗I)(I - A (P(W)⊗I))^{-1} B`.
    pub fn transfer_eval(&self, w: &MatrixPoint) -> Result<CMatrix> {
        w.check_dims(&self.n)?;
        Ok(self.d() + self.c() * self.state_multiplier(w) * self.resolvent_b(w)?)
    }

    /// `(I - A (P(W)⊗I))^{-1} B`.
    fn resolvent_b(&self, w: &MatrixPoint) -> Result<CMatrix> {
        let px = self.state_multiplier(w);
        let s = self.state_dim();
        solve(&(identity(s) - self.a() * px), &self.b())
    }

    /// The transfer function at a commuting tuple; each entry of `W_k` is
    /// replaced by its `d x d` block and `A, B, C, D` are amplified by `I_d`.
    pub fn transfer_eval_operator(&self, t: &OperatorTuple) -> Result<CMatrix> {
        if t.dims() != self.n.as_slice() {
            return Err(Error::ShapeMismatch(format!(
                "tuple has dimensions {:?}, expected {:?}",
                t.dims(),
                self.n
            )));
        }
        let residual = t.commutator_residual();
        if residual > COMMUTE_TOL {
            return Err(Error::NotCommuting { residual });
        }
        let d = t.carrier_dim();
        let (x, s) = (self.x, self.state_dim());
        let mut p = CMatrix::zeros(s * d, s * d);
        let mut offset = 0;
        for (k, &nk) in self.n.iter().enumerate() {
            for i in 0..nk {
                for j in 0..nk {
                    let block = t.entry(k, i, j);
                    for a in 0..x {
                        let r = ((offset + i) * x + a) * d;
                        let c = ((offset + j) * x + a) * d;
                        p.view_mut((r, c), (d, d)).copy_from(&block);
                    }
                }
            }
            offset += nk;
        }
        let id = identity(d);
        let (a, b, c, dd) = (
            kron(&self.a(), &id),
            kron(&self.b(), &id),
            kron(&self.c(), &id),
            kron(&self.d(), &id),
        );
        let x_b = solve(&(identity(s * d) - a * &p), &b)?;
        Ok(dd + c * p * x_b)
    }
}

/// `θ_k(W) = ((I - W_k)^{-1} ⊗ I) φ_k(Z(W)) (I - 𝓕(W))` for every k.
pub fn theta_from_pencil(f: &BessFunction, w: &MatrixPoint) -> Result<Vec<CMatrix>> {
    let z = point_to_halfplane(w)?;
    let phi = f.phi(&z)?;
    let cal_f = value_to_disk(&f.eval(&z)?)?;
    let right = identity(f.shape().u) - cal_f;
    phi.iter()
        .enumerate()
        .map(|(k, phi_k)| {
            let wk = w.component(k);
            let inv = solve(&(identity(wk.nrows()) - wk), &identity(wk.nrows()))?;
            Ok(kron(&inv, &identity(f.shape().m[k])) * phi_k * &right)
        })
        .collect()
}

/// Sampled kernel data: points `W^{(i)}`, values `𝓕(W^{(i)})`, and the
/// factors `H^R(W^{(i)})` (and optionally `H^L(W^{(i)})`) of the Agler
/// identity, with state space of dimension `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSamples {
    pub n: Vec<usize>,
    pub x: usize,
    pub points: Vec<MatrixPoint>,
    pub f_values: Vec<CMatrix>,
    pub hr: Vec<CMatrix>,
    pub hl: Option<Vec<CMatrix>>,
}

impl KernelSamples {
    pub fn u(&self) -> usize {
        self.f_values.first().map_or(0, |f| f.nrows())
    }

    pub fn validate(&self) -> Result<()> {
        let s = self.n.iter().sum::<usize>() * self.x;
        let count = self.points.len();
        if count == 0 || self.f_values.len() != count || self.hr.len() != count {
            return Err(Error::ShapeMismatch(format!(
                "{} points, {} values, {} factors",
                count,
                self.f_values.len(),
                self.hr.len()
            )));
        }
        let u = self.u();
        for i in 0..count {
            self.points[i].check_dims(&self.n)?;
            if self.f_values[i].shape() != (u, u) || self.hr[i].shape() != (s, u) {
                return Err(Error::ShapeMismatch(format!("sample {i} has inconsistent sizes")));
            }
            if let Some(hl) = &self.hl {
                if hl.len() != count || hl[i].shape() != (u, s) {
                    return Err(Error::ShapeMismatch(format!("left factor {i} has wrong size")));
                }
            }
        }
        Ok(())
    }

    /// Samples from a pencil: `H^R = col(θ_k)` with each `θ_k` placed in
    /// `C^{n_k} ⊗ M`, `M = M_1 ⊕ ... ⊕ M_N`, and `H^L(W) = H^R(W*)*`.
    pub fn from_pencil(f: &BessFunction, points: &[MatrixPoint], with_left: bool) -> Result<Self> {
        let shape = f.shape().clone();
        let x: usize = shape.m.iter().sum();
        let mut f_values = Vec::with_capacity(points.len());
        let mut hr = Vec::with_capacity(points.len());
        let mut hl = Vec::new();
        for w in points {
            let z = point_to_halfplane(w)?;
            f_values.push(value_to_disk(&f.eval(&z)?)?);
            hr.push(embed_theta(&shape, &theta_from_pencil(f, w)?));
            if with_left {
                hl.push(embed_theta(&shape, &theta_from_pencil(f, &w.adjoint())?).adjoint());
            }
        }
        let samples = Self {
            n: shape.n.clone(),
            x,
            points: points.to_vec(),
            f_values,
            hr,
            hl: with_left.then_some(hl),
        };
        samples.validate()?;
        Ok(samples)
    }

    /// Scalar single-variable samples from the Pick matrix
    /// `[(1 - conj(F_i) F_j) / (1 - conj(w_i) w_j)]`, factored as `H* H`.
    pub fn from_pick(points: &[C64], values: &[C64]) -> Result<Self> {
        if points.len() != values.len() || points.is_empty() {
            return Err(Error::ShapeMismatch("need one value per point".into()));
        }
        let count = points.len();
        let pick = CMatrix::from_fn(count, count, |i, j| {
            (c64(1.0, 0.0) - values[i].conj() * values[j])
                / (c64(1.0, 0.0) - points[i].conj() * points[j])
        });
        let eig = hermitian_part(&pick).symmetric_eigen();
        let scale = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
        if let Some(&min) = eig.eigenvalues.iter().find(|&&l| l < -1e-9 * scale.max(1.0)) {
            return Err(Error::NotPsd { index: 0, min_eig: min });
        }
        let kept: Vec<usize> =
            (0..count).filter(|&i| eig.eigenvalues[i] > 1e-12 * scale).collect();
        let h = CMatrix::from_fn(kept.len(), count, |r, c| {
            let i = kept[r];
            eig.eigenvectors[(c, i)].conj() * eig.eigenvalues[i].sqrt()
        });
        Ok(Self {
            n: vec![1],
            x: kept.len(),
            points: points.iter().map(|&w| MatrixPoint::scalars(&[w])).collect(),
            f_values: values.iter().map(|&v| scalar(v)).collect(),
            hr: (0..count).map(|j| h.columns(j, 1).into_owned()).collect(),
            hl: None,
        })
    }
}

/// Places `θ_k ∈ C^{n_k} ⊗ M_k` into `C^{n_1+...+n_N} ⊗ (M_1 ⊕ ... ⊕ M_N)`.
fn embed_theta(shape: &Shape, theta: &[CMatrix]) -> CMatrix {
    let x: usize = shape.m.iter().sum();
    let p: usize = shape.n.iter().sum();
    let mut out = CMatrix::zeros(p * x, shape.u);
    let (mut row_offset, mut m_offset) = (0, 0);
    for (k, t) in theta.iter().enumerate() {
        let mk = shape.m[k];
        for i in 0..shape.n[k] {
            for a in 0..mk {
                out.row_mut((row_offset + i) * x + m_offset + a)
                    .copy_from(&t.row(i * mk + a));
            }
        }
        row_offset += shape.n[k];
        m_offset += mk;
    }
    out
}

fn multiplier(w: &MatrixPoint, x: usize) -> CMatrix {
    kron(&w.diag(), &identity(x))
}

/// Residuals of the Agler identity on every pair of sample points and, when
/// `H^L` is present, of the four blocks of the two-sided identity.
pub fn verify_agler_identity(s: &KernelSamples, tol: f64) -> Report {
    let mut report = Report::new();
    if let Err(e) = s.validate() {
        report.record("samples", f64::INFINITY, tol, Some(e.to_string()));
        return report;
    }
    let u = s.u();
    let state = s.n.iter().sum::<usize>();
    let px: Vec<CMatrix> = s.points.iter().map(|w| multiplier(w, s.x)).collect();
    let id_u = identity(u);
    let id_s = identity(state * s.x);
    let rel = |lhs: CMatrix, rhs: CMatrix| op_norm(&(&lhs - &rhs)) / (1.0 + op_norm(&rhs));
    let label = |i: usize, j: usize| format!("sample pair ({i}, {j})");

    let mut right = Worst::default();
    let mut blocks = [Worst::default(), Worst::default(), Worst::default()];
    for i in 0..s.points.len() {
        for j in 0..s.points.len() {
            let lhs = &id_u - s.f_values[i].adjoint() * &s.f_values[j];
            let kernel = &id_s - px[i].adjoint() * &px[j];
            let rhs = s.hr[i].adjoint() * kernel * &s.hr[j];
            right.update(rel(lhs, rhs), || label(i, j));

            if let Some(hl) = &s.hl {
                // I - F(w') F(ω)* = H^L(w') (I - P(w') P(ω)*) H^L(ω)*
                let lhs = &id_u - &s.f_values[i] * s.f_values[j].adjoint();
                let kernel = &id_s - &px[i] * px[j].adjoint();
                let rhs = &hl[i] * kernel * hl[j].adjoint();
                blocks[0].update(rel(lhs, rhs), || label(i, j));
                // F(ω')* - F(ω)* = H^R(ω')* (P(ω')* - P(ω)*) H^L(ω)*
                let lhs = s.f_values[i].adjoint() - s.f_values[j].adjoint();
                let kernel = px[i].adjoint() - px[j].adjoint();
                let rhs = s.hr[i].adjoint() * kernel * hl[j].adjoint();
                blocks[1].update(rel(lhs, rhs), || label(i, j));
                // F(w') - F(w) = H^L(w') (P(w') - P(w)) H^R(w)
                let lhs = &s.f_values[i] - &s.f_values[j];
                let kernel = &px[i] - &px[j];
                let rhs = &hl[i] * kernel * &s.hr[j];
                blocks[2].update(rel(lhs, rhs), || label(i, j));
            }
        }
    }
    right.record(&mut report, "agler_right", tol);
    if s.hl.is_some() {
        let [left, upper, lower] = blocks;
        left.record(&mut report, "agler_left", tol);
        upper.record(&mut report, "agler_off_diagonal_upper", tol);
        lower.record(&mut report, "agler_off_diagonal_lower", tol);
    }
    report
}

/// Orthonormal bases of `D_0`, `R_0` such that `U_0 Q_d = Q_r`.
fn isometry_bases(s: &KernelSamples, symmetric: bool) -> Result<(CMatrix, CMatrix)> {
    let report = verify_agler_identity(s, IDENTITY_TOL);
    if !report.passed() {
        return Err(Error::IdentityViolated { residual: report.max_residual() });
    }
    let u = s.u();
    let mut dom = Vec::new();
    let mut ran = Vec::new();
    for (i, w) in s.points.iter().enumerate() {
        let px = multiplier(w, s.x);
        dom.push(vstack(&[&px * &s.hr[i], identity(u)]));
        ran.push(vstack(&[s.hr[i].clone(), s.f_values[i].clone()]));
    }
    if symmetric {
        let (a, b) = (dom.clone(), ran.clone());
        dom.extend(b.iter().cloned());
        ran.extend(a);
    } else if let Some(hl) = &s.hl {
        for (i, w) in s.points.iter().enumerate() {
            let px = multiplier(w, s.x);
            dom.push(vstack(&[hl[i].adjoint(), s.f_values[i].adjoint()]));
            ran.push(vstack(&[px.adjoint() * hl[i].adjoint(), identity(u)]));
        }
    }
    let gd = hstack(&dom);
    let gr = hstack(&ran);
    let gram_d = gd.adjoint() * &gd;
    let gram_r = gr.adjoint() * &gr;
    let residual = op_norm(&(&gram_d - &gram_r)) / op_norm(&gram_d).max(1.0);
    if residual > GRAM_TOL {
        return Err(Error::IsometryDefect { residual });
    }

    let svd = gd.svd(true, true);
    let left = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let sigma = &svd.singular_values;
    let smax = sigma.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..sigma.len()).filter(|&i| sigma[i] > DEFAULT_RANK_TOL * smax).collect();
    let qd = CMatrix::from_fn(left.nrows(), keep.len(), |r, c| left[(r, keep[c])]);
    let v_scaled = CMatrix::from_fn(v_t.ncols(), keep.len(), |r, c| {
        v_t[(keep[c], r)].conj() / sigma[keep[c]]
    });
    let qr = polar_unitary(&(gr * v_scaled));
    Ok((qd, qr))
}

fn symmetric_projection(u: CMatrix) -> Result<CMatrix> {
    let residual = op_norm(&(&u - u.adjoint()));
    if residual > SYMMETRY_PRECHECK {
        return Err(Error::NotSelfAdjoint { residual });
    }
    Ok(nearest_hermitian_unitary(&u))
}

/// Builds a unitary colligation whose transfer function interpolates the
/// samples. With `symmetric` set, `U_0` swaps `[(P⊗I)H^R; I]` and
/// `[H^R; 𝓕]` and is extended by the identity, so `U = U* = U^{-1}`.
pub fn lurking_isometry(s: &KernelSamples, symmetric: bool) -> Result<Colligation> {
    let (qd, qr) = isometry_bases(s, symmetric)?;
    let size = qd.nrows();
    let u = if symmetric {
        let proj = &qd * qd.adjoint();
        symmetric_projection(&qr * qd.adjoint() + identity(size) - proj)?
    } else {
        unitary_completion(&qd, &qr, &identity(qd.ncols()), 0)?
    };
    Colligation::new(s.n.clone(), s.x, s.u(), u)
}

/// As [`lurking_isometry`], but the complement is completed by a map that is
/// real for `((ι_p ⊗ inv_x) ⊕ inv_u)`, `ι_p` the standard involution.
pub fn lurking_isometry_real(
    s: &KernelSamples,
    symmetric: bool,
    inv_x: &Involution,
    inv_u: &Involution,
) -> Result<Colligation> {
    let p: usize = s.n.iter().sum();
    let big = Involution::direct_sum(&Involution::tensor(&Involution::standard(p), inv_x), inv_u);
    let (qd, qr) = isometry_bases(s, symmetric)?;
    let mut u = real_unitary_completion(&qd, &qr, &identity(qd.ncols()), &big)?;
    if symmetric {
        u = symmetric_projection(u)?;
    }
    Colligation::new(s.n.clone(), s.x, s.u(), u)
}

/// `1 ∉ σ(D)`, tested as `σ_min(I - D) > 1e-9 (1 + ‖D‖)`.
pub fn check_spectrum_condition(c: &Colligation) -> bool {
    let d = c.d();
    let smin = singular_values(&(identity(c.u()) - &d))
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    smin > 1e-9 * (1.0 + op_norm(&d))
}

/// `φ_k(Z)` for the function `f = (I + 𝓕)(I - 𝓕)^{-1} ∘ W(Z)` realized by a
/// self-adjoint colligation.
pub fn colligation_phi(c: &Colligation, w: &MatrixPoint) -> Result<(MatrixPoint, Vec<CMatrix>)> {
    let cal_f = c.transfer_eval(w)?;
    let inv = solve(&(identity(c.u()) - cal_f), &identity(c.u())).map_err(|e| match e {
        Error::SingularBlock { .. } => Error::SpectrumAtOne,
        other => other,
    })?;
    let xi_all = c.resolvent_b(w)? * inv * c64(SQRT_2, 0.0);
    let z = point_to_halfplane(w)?;
    let mut phi = Vec::with_capacity(c.n.len());
    let mut offset = 0;
    for (k, &nk) in c.n.iter().enumerate() {
        let xi_k = xi_all.rows(offset * c.x, nk * c.x).into_owned();
        let zk = z.component(k);
        let inv_zk = solve(&(zk + identity(nk)), &identity(nk))?;
        phi.push(kron(&inv_zk, &identity(c.x)) * xi_k * c64(SQRT_2, 0.0));
        offset += nk;
    }
    Ok((z, phi))
}

/// Recovers a pencil from a self-adjoint unitary colligation with
/// `1 ∉ σ(D)`, using a seeded sample grid of `4·(u + state_dim)` disk points
/// plus the origin.
pub fn bess_from_colligation(c: &Colligation) -> Result<BessFunction> {
    bess_from_colligation_with(c, DEFAULT_GRID_SEED, None)
}

pub fn bess_from_colligation_with(
    c: &Colligation,
    seed: u64,
    samples: Option<usize>,
) -> Result<BessFunction> {
    let residual = c.selfadjoint_residual();
    if residual > SELFADJOINT_TOL {
        return Err(Error::NotSelfAdjoint { residual });
    }
    if !check_spectrum_condition(c) {
        return Err(Error::SpectrumAtOne);
    }
    let count = samples.unwrap_or(4 * (c.u() + c.state_dim()));
    let grid = disk_grid(&c.n, count, seed, false);
    let phi_samples: Vec<PhiSample> =
        grid.iter().map(|w| colligation_phi(c, w)).collect::<Result<_>>()?;
    let shape = Shape::new(c.n.clone(), vec![c.x; c.n.len()], c.u(), 0)?;
    reconstruct_from_phi(&phi_samples, &shape)
}

/// `f(Z) = (I + F(W(Z)))(I - F(W(Z)))^{-1}` directly from the transfer function.
pub fn colligation_value_on_halfplane(c: &Colligation, z: &MatrixPoint) -> Result<CMatrix> {
    value_to_halfplane(&c.transfer_eval(&crate::cayley::point_to_disk(z)?)?)
}

/// Number of training points used by [`realize_pencil`] for a pencil whose
/// colligation acts on a space of dimension `ambient`.
pub fn training_size(ambient: usize) -> usize {
    2 * ambient + 4
}

/// Kernel samples of `𝓒(f)` on a seeded disk grid followed by the lurking
/// isometry. With `real` set the grid is closed under conjugation and the
/// completion is real for the standard involutions.
pub fn realize_pencil(
    f: &BessFunction,
    symmetric: bool,
    real: bool,
    seed: u64,
) -> Result<(Colligation, KernelSamples)> {
    let shape = f.shape();
    let x: usize = shape.m.iter().sum();
    let ambient = shape.n.iter().sum::<usize>() * x + shape.u;
    let grid = disk_grid(&shape.n, training_size(ambient), seed, real);
    let samples = KernelSamples::from_pencil(f, &grid, !symmetric)?;
    let c = if real {
        let (inv_x, inv_u) = (Involution::standard(x), Involution::standard(shape.u));
        lurking_isometry_real(&samples, symmetric, &inv_x, &inv_u)?
    } else {
        lurking_isometry(&samples, symmetric)?
    };
    Ok((c, samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cayley::double_cayley;
    use crate::numkit::real_matrix;
    use crate::pencil::PsdPencil;

    fn parallel_resistor() -> BessFunction {
        let shape = Shape::new(vec![1, 1], vec![1, 1], 1, 1).unwrap();
        let g = vec![real_matrix(1, 2, &[1.0, 1.0]), real_matrix(1, 2, &[0.0, 1.0])];
        BessFunction::new(PsdPencil::new(shape, g).unwrap())
    }

    fn identity_function() -> BessFunction {
        let shape = Shape::new(vec![1], vec![1], 1, 0).unwrap();
        BessFunction::new(PsdPencil::new(shape, vec![identity(1)]).unwrap())
    }

    fn swap() -> Colligation {
        Colligation::new(vec![1], 1, 1, real_matrix(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap()
    }

    #[test]
    fn transfer_examples() {
        let c = swap();
        let w = MatrixPoint::scalars(&[c64(0.3, -0.2)]);
        assert!((c.transfer_eval(&w).unwrap()[(0, 0)] - c64(0.3, -0.2)).norm() < 1e-15);
        assert_eq!(c.transfer_eval(&MatrixPoint::zeros(&[1])).unwrap(), c.d());
        let t = OperatorTuple::from_point(&w, 3);
        let expect = kron(&c.transfer_eval(&w).unwrap(), &identity(3));
        assert!(op_norm(&(c.transfer_eval_operator(&t).unwrap() - expect)) < 1e-14);
    }

    #[test]
    fn rejects_non_unitary() {
        assert!(matches!(
            Colligation::new(vec![1], 1, 1, identity(2) * c64(2.0, 0.0)),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn theta_at_origin() {
        let f = parallel_resistor();
        let theta = theta_from_pencil(&f, &MatrixPoint::zeros(&[1, 1])).unwrap();
        assert!((theta[0][(0, 0)] - c64(0.5 * 4.0 / 3.0, 0.0)).norm() < 1e-14);
        assert!((theta[1][(0, 0)] - c64(-0.5 * 4.0 / 3.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn agler_identity_from_pencil() {
        let f = parallel_resistor();
        let points = disk_grid(&[1, 1], 6, 3, false);
        let mut s = KernelSamples::from_pencil(&f, &points, true).unwrap();
        assert!(verify_agler_identity(&s, 1e-9).passed());
        s.f_values[2][(0, 0)] += c64(0.1, 0.0);
        assert!(!verify_agler_identity(&s, 1e-9).passed());
    }

    #[test]
    fn one_point_identity() {
        let s = KernelSamples {
            n: vec![1],
            x: 1,
            points: vec![MatrixPoint::zeros(&[1])],
            f_values: vec![CMatrix::zeros(1, 1)],
            hr: vec![identity(1)],
            hl: None,
        };
        assert!(verify_agler_identity(&s, 1e-12).passed());
    }

    #[test]
    fn spectrum_condition_examples() {
        let mk = |d: f64| {
            Colligation::new(vec![1], 0, 1, real_matrix(1, 1, &[d])).unwrap()
        };
        assert!(check_spectrum_condition(&swap()));
        assert!(!check_spectrum_condition(&mk(1.0)));
        let third = CMatrix::from_element(1, 1, c64(-1.0 / 3.0, 0.0));
        let c = Colligation {
            n: vec![1],
            x: 0,
            u: 1,
            matrix: third,
        };
        assert!(check_spectrum_condition(&c));
    }

    #[test]
    fn identity_pipeline() {
        let f = identity_function();
        let points = disk_grid(&[1], 5, 11, false);
        let s = KernelSamples::from_pencil(&f, &points, false).unwrap();
        let c = lurking_isometry(&s, false).unwrap();
        assert!(c.unitarity_residual() < 1e-9);
        for w in disk_grid(&[1], 4, 12, false) {
            let v = c.transfer_eval(&w).unwrap();
            assert!((v - w.component(0)).norm() < 1e-8);
        }
        let back = bess_from_colligation(&lurking_isometry(&s, true).unwrap()).unwrap();
        let v = back.eval(&MatrixPoint::real_scalars(&[3.0])).unwrap();
        assert!((v[(0, 0)] - c64(3.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn swap_reconstructs_identity_function() {
        let f = bess_from_colligation(&swap()).unwrap();
        let v = f.eval(&MatrixPoint::real_scalars(&[3.0])).unwrap();
        assert!((v[(0, 0)] - c64(3.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn pick_path_with_zero_function() {
        let points = [c64(0.0, 0.0), c64(0.5, 0.1), c64(-0.3, 0.4), c64(0.1, -0.6)];
        let s = KernelSamples::from_pick(&points, &[c64(0.0, 0.0); 4]).unwrap();
        let c = lurking_isometry(&s, false).unwrap();
        assert!(c.d().norm() < 1e-9);
    }

    #[test]
    fn parallel_resistor_symmetric() {
        let f = parallel_resistor();
        let points = disk_grid(&[1, 1], 12, 5, false);
        let s = KernelSamples::from_pencil(&f, &points, false).unwrap();
        let c = lurking_isometry(&s, true).unwrap();
        assert!(c.selfadjoint_residual() < 1e-8);
        assert!(check_spectrum_condition(&c));
        let v = c.transfer_eval(&MatrixPoint::zeros(&[1, 1])).unwrap();
        assert!((v[(0, 0)] - c64(-1.0 / 3.0, 0.0)).norm() < 1e-9);
        let cal = double_cayley(&f);
        for w in disk_grid(&[1, 1], 6, 99, false) {
            assert!(op_norm(&(c.transfer_eval(&w).unwrap() - cal.eval(&w).unwrap())) < 1e-7);
        }
        let g = bess_from_colligation(&c).unwrap();
        let v = g.eval(&MatrixPoint::real_scalars(&[1.0, 1.0])).unwrap();
        assert!((v[(0, 0)] - c64(0.5, 0.0)).norm() < 1e-7);
        assert!(matches!(
            bess_from_colligation(&Colligation::new(vec![1], 0, 1, identity(1)).unwrap()),
            Err(Error::SpectrumAtOne)
        ));
    }
}
