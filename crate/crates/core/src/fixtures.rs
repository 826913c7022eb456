//! The named states used throughout the tests and shipped as JSON fixtures.

use crate::linalg::{c, kron, outer, ComplexMatrix, ComplexVector};
use crate::state::DensityMatrix;

fn ket(amps: &[f64]) -> ComplexVector {
    ComplexVector::from_iterator(amps.len(), amps.iter().map(|&a| c(a, 0.0)))
}

fn proj(amps: &[f64]) -> ComplexMatrix {
    outer(&ket(amps))
}

const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// ½|φ⟩⟨φ|⊗|0⟩⟨0| + ½|ϕ⟩⟨ϕ|⊗|+⟩⟨+| on a qutrit ⊗ qubit, with
/// |φ⟩ = (|0⟩+|1⟩)/√2 and |ϕ⟩ = (|1⟩+|2⟩)/√2.
pub fn qutrit_qubit_example() -> DensityMatrix {
    let m = kron(&proj(&[H, H, 0.0]), &proj(&[1.0, 0.0])).scale(0.5)
        + kron(&proj(&[0.0, H, H]), &proj(&[H, H])).scale(0.5);
    DensityMatrix::from_trusted(vec![3, 2], m)
}

/// ε|↑↑⟩⟨↑↑| + (1−ε)/2 (|←⟩⟨←|⊗|↑⟩⟨↑| + |→⟩⟨→|⊗|↓⟩⟨↓|) with |↑⟩ = |0⟩, |↓⟩ = |1⟩,
/// |←⟩ = (|0⟩−|1⟩)/√2 and |→⟩ = (|0⟩+|1⟩)/√2.
pub fn eps_example(eps: f64) -> DensityMatrix {
    let up = [1.0, 0.0];
    let down = [0.0, 1.0];
    let left = [H, -H];
    let right = [H, H];
    let m = kron(&proj(&up), &proj(&up)).scale(eps)
        + (kron(&proj(&left), &proj(&up)) + kron(&proj(&right), &proj(&down))).scale(0.5 * (1.0 - eps));
    DensityMatrix::from_trusted(vec![2, 2], m)
}

/// √λ|00⟩ + √(1−λ)|11⟩.
pub fn max_correlated(lambda: f64) -> DensityMatrix {
    DensityMatrix::from_trusted(vec![2, 2], proj(&[lambda.sqrt(), 0.0, 0.0, (1.0 - lambda).sqrt()]))
}

pub fn bell_phi_plus() -> DensityMatrix {
    DensityMatrix::from_trusted(vec![2, 2], proj(&[H, 0.0, 0.0, H]))
}

/// (|01⟩ − |10⟩)/√2.
pub fn singlet() -> DensityMatrix {
    DensityMatrix::from_trusted(vec![2, 2], proj(&[0.0, H, -H, 0.0]))
}

/// |+⟩⟨+| ⊗ |0⟩⟨0|.
pub fn plus_zero() -> DensityMatrix {
    DensityMatrix::from_trusted(vec![2, 2], kron(&proj(&[H, H]), &proj(&[1.0, 0.0])))
}

/// diag(0.7, 0.3) ⊗ ρ_B with a coherent ρ_B; ρ_A is mixed and diagonal.
pub fn product_mixed() -> DensityMatrix {
    let a = ComplexMatrix::from_row_slice(2, 2, &[c(0.7, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.3, 0.0)]);
    let b = ComplexMatrix::from_row_slice(2, 2, &[c(0.6, 0.0), c(0.2, 0.1), c(0.2, -0.1), c(0.4, 0.0)]);
    DensityMatrix::from_trusted(vec![2, 2], kron(&a, &b))
}

/// ⅓|0⟩⟨0|⊗|+⟩⟨+| + ⅔|1⟩⟨1|⊗ρ_1: classical on A in the computational basis.
pub fn cq_example() -> DensityMatrix {
    let rho1 = ComplexMatrix::from_row_slice(2, 2, &[c(0.8, 0.0), c(0.1, -0.3), c(0.1, 0.3), c(0.2, 0.0)]);
    let m = kron(&proj(&[1.0, 0.0]), &proj(&[H, H])).scale(1.0 / 3.0)
        + kron(&proj(&[0.0, 1.0]), &rho1).scale(2.0 / 3.0);
    DensityMatrix::from_trusted(vec![2, 2], m)
}

/// ½|+⟩⟨+|⊗|0⟩⟨0| + ¼|0⟩⟨0|⊗|1⟩⟨1| + ¼ρ_y⊗|2⟩⟨2|: quantum on A, classical on a qutrit B.
pub fn qc_example() -> DensityMatrix {
    let rho_y = ComplexMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.0, -0.4), c(0.0, 0.4), c(0.5, 0.0)]);
    let m = kron(&proj(&[H, H]), &proj(&[1.0, 0.0, 0.0])).scale(0.5)
        + kron(&proj(&[1.0, 0.0]), &proj(&[0.0, 1.0, 0.0])).scale(0.25)
        + kron(&rho_y, &proj(&[0.0, 0.0, 1.0])).scale(0.25);
    DensityMatrix::from_trusted(vec![2, 3], m)
}

/// Every named fixture, keyed by its file stem.
pub fn all() -> Vec<(&'static str, DensityMatrix)> {
    vec![
        ("qutrit_qubit_example", qutrit_qubit_example()),
        ("eps_example_0.01", eps_example(0.01)),
        ("max_correlated_0.9", max_correlated(0.9)),
        ("bell_phi_plus", bell_phi_plus()),
        ("singlet", singlet()),
        ("plus_zero", plus_zero()),
        ("product_mixed", product_mixed()),
        ("cq_example", cq_example()),
        ("qc_example", qc_example()),
    ]
}
