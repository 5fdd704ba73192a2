//! Randomized class-membership checks and generators for test points and
//! commuting accretive or contractive tuples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cayley::inverse_tuple_cayley;
use crate::error::{Error, Result};
use crate::function::MatrixFunction;
use crate::numkit::{c64, identity, min_eig_herm, op_norm, CMatrix, C64};
use crate::pencil::{decomposition_sum, MatrixPoint, OperatorTuple};
use crate::report::{Report, Worst};

pub use crate::pencil::locate_omega_lambda;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SampleConfig {
    pub seed: u64,
    pub num_points: usize,
    pub num_tuples: usize,
    pub carrier_dim: usize,
    pub margin: f64,
    pub identity_tol: f64,
    pub positivity_tol: f64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            num_points: 20,
            num_tuples: 100,
            carrier_dim: 4,
            margin: 0.1,
            identity_tol: 1e-9,
            positivity_tol: 1e-8,
        }
    }
}

impl SampleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.carrier_dim == 0 || !(self.margin > 0.0) {
            return Err(Error::ShapeMismatch(format!(
                "carrier dimension must be >= 1 and margin > 0, got d={} s={}",
                self.carrier_dim, self.margin
            )));
        }
        Ok(())
    }

    /// Carrier dimensions used for tuples: powers of two up to `carrier_dim`.
    pub fn carrier_dims(&self) -> Vec<usize> {
        std::iter::successors(Some(1usize), |&d| Some(d * 2))
            .take_while(|&d| d <= self.carrier_dim)
            .collect()
    }
}

fn fnv1a(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

/// Generator for sample `index` of stream `label`, independent of the order
/// in which samples are drawn.
pub fn derive_rng(seed: u64, label: &str, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&fnv1a(label).to_le_bytes());
    key[16..24].copy_from_slice(&index.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

fn normal_c64(rng: &mut impl Rng) -> C64 {
    c64(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Matrix with independent standard complex normal entries.
pub fn random_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| normal_c64(rng))
}

/// Random point with `min_eig_herm(Z_k) ∈ [0.1, 2]` for every k.
pub fn random_halfplane_point(dims: &[usize], rng: &mut impl Rng) -> MatrixPoint {
    let z = dims
        .iter()
        .map(|&n| {
            let x = random_matrix(n, n, rng);
            let target: f64 = rng.random_range(0.1..2.0);
            let shift = target - min_eig_herm(&x);
            x + identity(n) * c64(shift, 0.0)
        })
        .collect();
    MatrixPoint::new(z).expect("generated points are well formed")
}

/// Random point with `‖W_k‖ ≤ 0.9` for every k.
pub fn random_disk_point(dims: &[usize], rng: &mut impl Rng) -> MatrixPoint {
    let w = dims
        .iter()
        .map(|&n| {
            let x = random_matrix(n, n, rng);
            let radius: f64 = rng.random_range(0.0..0.9);
            let norm = op_norm(&x);
            if norm == 0.0 { x } else { x * c64(radius / norm, 0.0) }
        })
        .collect();
    MatrixPoint::new(w).expect("generated points are well formed")
}

/// The origin followed by `count` seeded disk points; with
/// `conjugate_closed` each point is followed by its entrywise conjugate.
pub fn disk_grid(dims: &[usize], count: usize, seed: u64, conjugate_closed: bool) -> Vec<MatrixPoint> {
    let mut grid = vec![MatrixPoint::zeros(dims)];
    for i in 0..count {
        let w = random_disk_point(dims, &mut derive_rng(seed, "disk", i as u64));
        if conjugate_closed {
            grid.push(w.conj());
        }
        grid.push(w);
    }
    grid
}

/// `E` followed by `count` seeded halfplane points.
pub fn halfplane_grid(dims: &[usize], count: usize, seed: u64) -> Vec<MatrixPoint> {
    let mut grid = vec![MatrixPoint::identity(dims)];
    grid.extend(
        (0..count).map(|i| random_halfplane_point(dims, &mut derive_rng(seed, "halfplane", i as u64))),
    );
    grid
}

/// Tuple whose `d x d` entry blocks are cubic polynomials in one shared
/// random matrix `T_0`, each `R_k` shifted so that `Re R_k ≥ s`.
pub fn random_commuting_accretive_tuple(
    dims: &[usize],
    d: usize,
    s: f64,
    rng: &mut impl Rng,
) -> OperatorTuple {
    let t0 = random_matrix(d, d, rng);
    let norm = op_norm(&t0);
    let t0 = if norm > 0.0 { t0 * c64(1.0 / norm, 0.0) } else { t0 };
    let powers = [identity(d), t0.clone(), &t0 * &t0, &t0 * &t0 * &t0];
    let r = dims
        .iter()
        .map(|&n| {
            let mut rk = CMatrix::zeros(n * d, n * d);
            for i in 0..n {
                for j in 0..n {
                    let entry = powers
                        .iter()
                        .fold(CMatrix::zeros(d, d), |acc, p| acc + p * normal_c64(rng));
                    rk.view_mut((i * d, j * d), (d, d)).copy_from(&entry);
                }
            }
            let margin = min_eig_herm(&rk);
            if margin < s {
                rk += identity(n * d) * c64(s * (1.0 + 1e-6) - margin, 0.0);
            }
            rk
        })
        .collect();
    OperatorTuple::new(dims.to_vec(), d, r).expect("polynomials in one matrix commute")
}

/// Inverse Cayley transform of a random accretive tuple.
pub fn random_commuting_contraction_tuple(
    dims: &[usize],
    d: usize,
    rng: &mut impl Rng,
) -> OperatorTuple {
    let r = random_commuting_accretive_tuple(dims, d, 0.1, rng);
    inverse_tuple_cayley(&r).expect("accretive tuples map to contractions")
}

pub(crate) fn describe_point(z: &MatrixPoint) -> String {
    serde_json::to_string(&z.components().iter().map(crate::numkit::to_nested).collect::<Vec<_>>())
        .unwrap_or_default()
}

type Sample = (f64, String);

/// Evaluates `sample` for every index in parallel and keeps the worst.
fn worst_over(count: usize, sample: impl Fn(usize) -> Sample + Sync + Send) -> Worst {
    let results: Vec<Sample> = (0..count).into_par_iter().map(sample).collect();
    let mut worst = Worst::default();
    for (value, witness) in results {
        worst.update(value, || witness);
    }
    worst
}

fn rel(a: &CMatrix, b: &CMatrix) -> f64 {
    op_norm(&(a - b)) / (1.0 + op_norm(b))
}

fn failure(e: Error, at: &MatrixPoint) -> Sample {
    (f64::INFINITY, format!("{e} at {}", describe_point(at)))
}

/// Randomized test of the class conditions: homogeneity for `t > 0` and for
/// unimodular `λ`, the symmetry `f(Z*) = f(Z)*`, positivity of `Re f(R)` at
/// commuting accretive tuples, and, when `φ` is available, the split
/// identities `f(Z) ± f(Λ)* = Σ φ_k(Λ)*((Z_k ± Λ_k*) ⊗ I) φ_k(Z)`.
pub fn check_membership(f: &dyn MatrixFunction, cfg: &SampleConfig) -> Report {
    let mut report = Report::new();
    if let Err(e) = cfg.validate() {
        report.record("config", f64::INFINITY, 0.0, Some(e.to_string()));
        return report;
    }
    let dims = f.var_dims();
    let seed = cfg.seed;
    let point = |label: &str, i: usize| random_halfplane_point(&dims, &mut derive_rng(seed, label, i as u64));

    let positive = worst_over(cfg.num_points, |i| {
        let z = point("homogeneity_positive", i);
        let t = derive_rng(seed, "scale", i as u64).random_range(-2.0f64..2.0).exp();
        match (f.eval(&z), f.eval(&z.scale(c64(t, 0.0)))) {
            (Ok(a), Ok(b)) => (rel(&b, &(a * c64(t, 0.0))), format!("t = {t}, Z = {}", describe_point(&z))),
            (Err(e), _) | (_, Err(e)) => failure(e, &z),
        }
    });
    positive.record(&mut report, "homogeneity_positive", cfg.identity_tol);

    let unimodular = worst_over(cfg.num_points, |i| {
        let z = point("homogeneity_unimodular", i);
        let theta = derive_rng(seed, "angle", i as u64).random_range(0.0..std::f64::consts::TAU);
        let lambda = C64::from_polar(1.0, theta);
        match (f.eval(&z), f.eval(&z.scale(lambda))) {
            (Ok(a), Ok(b)) => (rel(&b, &(a * lambda)), format!("lambda = {lambda}, Z = {}", describe_point(&z))),
            (Err(e), _) | (_, Err(e)) => failure(e, &z),
        }
    });
    unimodular.record(&mut report, "homogeneity_unimodular", cfg.identity_tol);

    let symmetry = worst_over(cfg.num_points, |i| {
        let z = point("symmetry", i);
        match (f.eval(&z), f.eval(&z.adjoint())) {
            (Ok(a), Ok(b)) => (rel(&b, &a.adjoint()), describe_point(&z)),
            (Err(e), _) | (_, Err(e)) => failure(e, &z),
        }
    });
    symmetry.record(&mut report, "symmetry", cfg.identity_tol);

    let probe = MatrixPoint::identity(&dims);
    let operator_capable = f
        .eval_operator(&OperatorTuple::from_point(&probe, 1))
        .is_some();
    if operator_capable {
        let ds = cfg.carrier_dims();
        let positivity = worst_over(cfg.num_tuples, |i| {
            let d = ds[i % ds.len()];
            let mut rng = derive_rng(seed, "tuple", i as u64);
            let r = random_commuting_accretive_tuple(&dims, d, cfg.margin, &mut rng);
            match f.eval_operator(&r).expect("operator evaluation supported") {
                Ok(v) => {
                    let slack = (-min_eig_herm(&v)).max(0.0) / op_norm(&v).max(1.0);
                    (slack, format!("tuple {i} with carrier dimension {d}"))
                }
                Err(e) => (f64::INFINITY, format!("{e} at tuple {i} with carrier dimension {d}")),
            }
        });
        positivity.record(&mut report, "operator_positivity", cfg.positivity_tol);
    } else {
        let positivity = worst_over(cfg.num_points, |i| {
            let z = point("positivity", i);
            match f.eval(&z) {
                Ok(v) => ((-min_eig_herm(&v)).max(0.0) / op_norm(&v).max(1.0), describe_point(&z)),
                Err(e) => failure(e, &z),
            }
        });
        positivity.record(&mut report, "pointwise_positivity", cfg.positivity_tol);
    }

    if f.phi(&probe).is_some() {
        for (name, sign) in [("split_identity_plus", 1.0), ("split_identity_minus", -1.0)] {
            let worst = worst_over(cfg.num_points, |i| {
                let z = point("split_z", i);
                let l = point("split_lambda", i);
                split_residual(f, &z, &l, sign).unwrap_or_else(|e| failure(e, &z))
            });
            worst.record(&mut report, name, cfg.identity_tol);
        }
    }
    report
}

fn split_residual(f: &dyn MatrixFunction, z: &MatrixPoint, l: &MatrixPoint, sign: f64) -> Result<Sample> {
    let (fz, fl) = (f.eval(z)?, f.eval(l)?);
    let phi_z = f.phi(z).expect("phi supported")?;
    let phi_l = f.phi(l).expect("phi supported")?;
    let m: Vec<usize> = phi_z
        .iter()
        .zip(z.dims())
        .map(|(p, n)| p.nrows() / n)
        .collect();
    let s = c64(sign, 0.0);
    let x = MatrixPoint::new(
        z.components()
            .iter()
            .zip(l.components())
            .map(|(zk, lk)| zk + lk.adjoint() * s)
            .collect(),
    )?;
    let lhs = &fz + fl.adjoint() * s;
    let rhs = decomposition_sum(&phi_l, &x, &phi_z, &m);
    let scale = 1.0 + op_norm(&fz) + op_norm(&fl);
    Ok((
        op_norm(&(lhs - rhs)) / scale,
        format!("Z = {}, Lambda = {}", describe_point(z), describe_point(l)),
    ))
}
