//! Dense complex linear algebra on small matrices.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`; the serialized form is row-major
//! (see [`crate::io`]). Only the handful of operations the rest of the crate needs
//! live here: Kronecker products, Hermitian eigendecomposition, Haar sampling.

use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{arg, Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

pub const TAU_HERM: f64 = 1e-9;
pub const TAU_TRACE: f64 = 1e-9;
pub const TAU_ORTH: f64 = 1e-9;
pub const TAU_EIG: f64 = 1e-8;
/// Eigenvalues with magnitude below this are treated as exact zeros in entropy sums.
pub const EPS_EIG: f64 = 1e-12;
/// Eigenvalues below `-EPS_NEG` make a matrix non-positive.
pub const EPS_NEG: f64 = 1e-9;

pub const DEFAULT_MAX_DIM: usize = 4096;

static MAX_TOTAL_DIM: AtomicUsize = AtomicUsize::new(DEFAULT_MAX_DIM);

/// Largest total Hilbert-space dimension any state or operator may have.
pub fn max_total_dim() -> usize {
    MAX_TOTAL_DIM.load(Ordering::Relaxed)
}

pub fn set_max_total_dim(max: usize) {
    MAX_TOTAL_DIM.store(max.max(1), Ordering::Relaxed);
}

pub fn check_capacity(total: usize) -> Result<()> {
    let max = max_total_dim();
    if total > max {
        Err(Error::Capacity { requested: total, max })
    } else {
        Ok(())
    }
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed for the `index`-th independent sub-task of a seeded job.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finalizer over the pair
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn frobenius(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn trace(m: &ComplexMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermiticity_error(m: &ComplexMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn is_hermitian(m: &ComplexMatrix, tol: f64) -> bool {
    hermiticity_error(m) <= tol
}

/// ‖U†U − I‖ (max entry).
pub fn unitarity_error(u: &ComplexMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    let g = u.adjoint() * u;
    let n = u.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - c(target, 0.0)).norm());
        }
    }
    worst
}

pub fn is_unitary(u: &ComplexMatrix, tol: f64) -> bool {
    unitarity_error(u) <= tol
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues in descending order.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: ComplexMatrix,
}

impl Spectrum {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            for i in 0..n {
                scaled[(i, j)] *= self.values[j];
            }
        }
        scaled * self.vectors.adjoint()
    }
}

fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn eig_hermitian(m: &ComplexMatrix) -> Result<Spectrum> {
    if !m.is_square() {
        return arg(format!("eig_hermitian: {}x{} matrix is not square", m.nrows(), m.ncols()));
    }
    let err = hermiticity_error(m);
    if err > TAU_HERM {
        return arg(format!("eig_hermitian: matrix is not Hermitian (deviation {err:e})"));
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(Spectrum { values, vectors })
}

/// Eigenvalues only (unsorted); the caller guarantees Hermiticity.
pub(crate) fn hermitian_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    match m.nrows() {
        0 => Vec::new(),
        1 => vec![m[(0, 0)].re],
        2 => {
            let a = m[(0, 0)].re;
            let d = m[(1, 1)].re;
            let b = m[(0, 1)].norm_sqr();
            let mid = 0.5 * (a + d);
            let rad = (0.25 * (a - d) * (a - d) + b).sqrt();
            vec![mid + rad, mid - rad]
        }
        _ => hermitian_part(m).symmetric_eigenvalues().iter().copied().collect(),
    }
}

/// Shannon/von Neumann entropy in bits of a spectrum, with 0·log0 := 0 below `EPS_EIG`.
pub fn entropy_bits(values: &[f64]) -> f64 {
    values
        .iter()
        .filter(|&&v| v > EPS_EIG)
        .map(|&v| -v * v.log2())
        .sum::<f64>()
        .max(0.0)
}

pub(crate) fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Haar-distributed unitary from the QR decomposition of a complex Ginibre matrix,
/// with the phases of R's diagonal folded back into Q.
pub fn haar_unitary_with<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let z = gaussian_matrix(dim, dim, rng);
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn haar_unitary(dim: usize, seed: u64) -> Result<ComplexMatrix> {
    if dim == 0 {
        return arg("haar_unitary: dimension must be positive");
    }
    check_capacity(dim)?;
    Ok(haar_unitary_with(dim, &mut rng_from_seed(seed)))
}

/// Projector |v⟩⟨v|.
pub fn outer(v: &ComplexVector) -> ComplexMatrix {
    v * v.adjoint()
}

pub fn basis_vector(dim: usize, index: usize) -> ComplexVector {
    let mut v = ComplexVector::zeros(dim);
    v[index] = c(1.0, 0.0);
    v
}

/// Single-qubit Pauli matrices.
pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
}

pub fn hadamard() -> ComplexMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_row_slice(2, 2, &[c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn identity_spectrum() {
        let s = eig_hermitian(&identity(2)).unwrap();
        assert_eq!(s.values.len(), 2);
        assert!(s.values.iter().all(|&v| close(v, 1.0, 1e-14)));
    }

    #[test]
    fn pauli_x_spectrum_is_descending() {
        let s = eig_hermitian(&pauli_x()).unwrap();
        assert!(close(s.values[0], 1.0, 1e-14));
        assert!(close(s.values[1], -1.0, 1e-14));
        assert!(frobenius(&(s.reconstruct() - pauli_x())) < TAU_EIG);
    }

    #[test]
    fn two_by_two_closed_form() {
        let m = ComplexMatrix::from_row_slice(2, 2, &[c(0.75, 0.0), c(0.25, 0.0), c(0.25, 0.0), c(0.25, 0.0)]);
        let s = eig_hermitian(&m).unwrap();
        let root = 0.5_f64.sqrt();
        assert!(close(s.values[0], (1.0 + root) / 2.0, 1e-14));
        assert!(close(s.values[1], (1.0 - root) / 2.0, 1e-14));
        let mut fast = hermitian_eigenvalues(&m);
        fast.sort_by(|a, b| b.total_cmp(a));
        assert!(close(fast[0], s.values[0], 1e-14) && close(fast[1], s.values[1], 1e-14));
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = ComplexMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(eig_hermitian(&m), Err(Error::Argument(_))));
    }

    #[test]
    fn haar_is_unitary_and_deterministic() {
        for dim in [1, 2, 5, 8] {
            let u = haar_unitary(dim, 11).unwrap();
            assert!(is_unitary(&u, TAU_ORTH));
            assert_eq!(u, haar_unitary(dim, 11).unwrap());
        }
        assert_ne!(haar_unitary(3, 1).unwrap(), haar_unitary(3, 2).unwrap());
    }

    #[test]
    fn haar_first_moment() {
        // E|U00|² = 1/d for Haar measure
        let mut rng = rng_from_seed(2024);
        let n = 10_000;
        let mean = (0..n).map(|_| haar_unitary_with(2, &mut rng)[(0, 0)].norm_sqr()).sum::<f64>() / n as f64;
        assert!(close(mean, 0.5, 0.02), "mean {mean}");
    }

    #[test]
    fn random_hermitian_reconstruction() {
        let mut rng = rng_from_seed(5);
        for n in 1..7 {
            let g = gaussian_matrix(n, n, &mut rng);
            let h = &g + g.adjoint();
            let s = eig_hermitian(&h).unwrap();
            assert!(frobenius(&(s.reconstruct() - &h)) <= TAU_EIG);
            assert!(s.values.windows(2).all(|w| w[0] >= w[1]));
            assert!(is_unitary(&s.vectors, 1e-9));
        }
    }
}
