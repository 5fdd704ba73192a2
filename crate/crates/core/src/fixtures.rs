//! Small named pencils used by the test suites and the `demo` command.

use rand::Rng;

use crate::membership::{derive_rng, random_matrix};
use crate::numkit::{identity, real_matrix};
use crate::pencil::{BessFunction, PsdPencil, Shape};

/// `f(z_1, z_2) = z_1 z_2 / (z_1 + z_2)`, from `G_1 = [1, 1]`, `G_2 = [0, 1]`.
pub fn parallel_resistor() -> BessFunction {
    let shape = Shape::new(vec![1, 1], vec![1, 1], 1, 1).expect("valid shape");
    let g = vec![real_matrix(1, 2, &[1.0, 1.0]), real_matrix(1, 2, &[0.0, 1.0])];
    BessFunction::new(PsdPencil::new(shape, g).expect("valid pencil"))
}

/// `f(z) = z` in one scalar variable.
pub fn scalar_identity() -> BessFunction {
    matrix_identity(1)
}

/// `f(Z) = Z` for one `n x n` variable.
pub fn matrix_identity(n: usize) -> BessFunction {
    let shape = Shape::new(vec![n], vec![1], n, 0).expect("valid shape");
    BessFunction::new(PsdPencil::new(shape, vec![identity(n)]).expect("valid pencil"))
}

/// Pencil with Gaussian factors for a given shape.
pub fn random_pencil_with_shape(shape: Shape, seed: u64) -> BessFunction {
    let mut rng = derive_rng(seed, "pencil", 0);
    let g = (0..shape.vars())
        .map(|k| random_matrix(shape.rows(k), shape.width(), &mut rng))
        .collect();
    BessFunction::new(PsdPencil::new(shape, g).expect("valid pencil"))
}

/// Random shape with `N ∈ {1,2,3}`, `n_k ∈ {1,2,3}`, `m_k ∈ {1,2}`,
/// `u ∈ {1,2}` and `h ≤ min(3, Σ n_k m_k)`, then Gaussian factors.
pub fn random_pencil(seed: u64) -> BessFunction {
    let mut rng = derive_rng(seed, "shape", 0);
    let vars = rng.random_range(1..=3);
    let n: Vec<usize> = (0..vars).map(|_| rng.random_range(1..=3)).collect();
    let m: Vec<usize> = (0..vars).map(|_| rng.random_range(1..=2)).collect();
    let rows: usize = n.iter().zip(&m).map(|(a, b)| a * b).sum();
    let u = rng.random_range(1..=2);
    let h = rng.random_range(0..=rows.min(3));
    random_pencil_with_shape(Shape::new(n, m, u, h).expect("valid shape"), seed)
}

/// The named pencils exercised end to end.
pub fn catalog() -> Vec<(&'static str, BessFunction)> {
    let shape = |n: Vec<usize>, m: Vec<usize>, u, h| Shape::new(n, m, u, h).expect("valid shape");
    vec![
        ("parallel_resistor", parallel_resistor()),
        ("scalar_identity", scalar_identity()),
        ("matrix_identity_2", matrix_identity(2)),
        ("random_two_variable", random_pencil_with_shape(shape(vec![2, 1], vec![1, 2], 2, 2), 11)),
        ("random_three_scalar", random_pencil_with_shape(shape(vec![1, 1, 1], vec![1, 1, 1], 1, 1), 12)),
        ("random_matrix_variable", random_pencil_with_shape(shape(vec![3], vec![2], 1, 3), 13)),
    ]
}
