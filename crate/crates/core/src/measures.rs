//! The relative-entropy monotone Δ_𝒵 and the checks built around it.
//!
//! Δ_𝒵(ρ) = min_{σ ∈ CQ_𝒵} S(ρ‖σ) is always evaluated in closed form as
//! S(dephase(ρ)) − S(ρ); the dephased state is the minimizer.

use rand::Rng;
use serde::Serialize;

use crate::error::{arg, Result};
use crate::goia::{random_cq_state, GoiaProgram};
use crate::linalg::{self, entropy_bits, hermitian_eigenvalues, ComplexMatrix};
use crate::state::{
    dephase, dephased_entropy_raw, permute_subsystems, relative_entropy, tensor, von_neumann_entropy, DensityMatrix,
    OrthonormalBasis,
};

/// Property-suite tolerance on additivity residuals and monotone slacks.
pub const SUITE_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct MeasureResult {
    pub value: f64,
    pub basis: OrthonormalBasis,
    /// The closest free state, dephase(ρ).
    pub witness: DensityMatrix,
}

fn check_a_basis(rho: &DensityMatrix, basis: &OrthonormalBasis) -> Result<()> {
    if basis.dim() != rho.dim_a() {
        return arg(format!("basis dimension {} does not match d_A = {}", basis.dim(), rho.dim_a()));
    }
    Ok(())
}

/// Populations ⟨c|m|c⟩ of an operator on A.
fn populations(m: &ComplexMatrix, basis: &ComplexMatrix) -> Vec<f64> {
    (0..basis.ncols())
        .map(|col| {
            let v = basis.column(col);
            (v.adjoint() * m * v)[(0, 0)].re
        })
        .collect()
}

/// C_𝒵 of an unnormalized positive operator on A, scaled by its trace:
/// returns p·C_𝒵(m/p) with p = Tr m.
pub(crate) fn weighted_coherence(m: &ComplexMatrix, basis: &ComplexMatrix, computational: bool) -> f64 {
    let p = linalg::trace(m).re;
    if p <= 0.0 {
        return 0.0;
    }
    let diag: Vec<f64> = if computational {
        (0..m.nrows()).map(|i| m[(i, i)].re / p).collect()
    } else {
        populations(m, basis).into_iter().map(|x| x / p).collect()
    };
    let eigs: Vec<f64> = hermitian_eigenvalues(m).into_iter().map(|x| x / p).collect();
    (p * (entropy_bits(&diag) - entropy_bits(&eigs))).max(0.0)
}

/// Relative entropy of coherence S(diag_𝒵 ρ_A) − S(ρ_A) of a single-system state.
pub fn coherence_rel_ent(rho_a: &DensityMatrix, basis: &OrthonormalBasis) -> Result<f64> {
    if rho_a.dims().len() != 1 {
        return arg(format!("coherence_rel_ent expects a single subsystem, got dims {:?}", rho_a.dims()));
    }
    check_a_basis(rho_a, basis)?;
    Ok(weighted_coherence(rho_a.matrix(), basis.matrix(), basis.is_computational()))
}

/// Δ_𝒵 value only; A is subsystem 0, all later factors are B.
pub fn delta_value(rho: &DensityMatrix, basis: &OrthonormalBasis) -> Result<f64> {
    check_a_basis(rho, basis)?;
    let dephased = dephased_entropy_raw(rho.matrix(), basis.matrix(), rho.dim_a(), rho.dim_b());
    Ok((dephased - von_neumann_entropy(rho)).max(0.0))
}

pub fn delta_z(rho: &DensityMatrix, basis: &OrthonormalBasis) -> Result<MeasureResult> {
    let value = delta_value(rho, basis)?;
    Ok(MeasureResult { value, basis: basis.clone(), witness: dephase(rho, basis)? })
}

#[derive(Debug, Clone)]
pub struct MinOracleOutcome {
    pub holds: bool,
    /// S(ρ‖σ*).
    pub at_witness: f64,
    /// Smallest S(ρ‖σ) over the sampled free states.
    pub best_sampled: f64,
    pub violating: Option<DensityMatrix>,
}

/// Samples random σ ∈ CQ_𝒵 and checks that none has S(ρ‖σ) below S(ρ‖dephase ρ).
pub fn delta_is_min_oracle(rho: &DensityMatrix, basis: &OrthonormalBasis, n_samples: usize, seed: u64) -> Result<MinOracleOutcome> {
    check_a_basis(rho, basis)?;
    if rho.total_dim() > 12 {
        return arg(format!("oracle limited to total dimension 12, got {}", rho.total_dim()));
    }
    let merged = rho.regroup(vec![rho.dim_a(), rho.dim_b()])?;
    let witness = dephase(&merged, basis)?;
    let at_witness = relative_entropy(&merged, &witness)?;
    let mut rng = linalg::rng_from_seed(seed);
    let mut best_sampled = f64::INFINITY;
    for _ in 0..n_samples {
        let sigma = random_cq_state(basis, merged.dim_b(), &mut rng)?;
        let value = relative_entropy(&merged, &sigma)?;
        best_sampled = best_sampled.min(value);
        if value < at_witness - SUITE_TOL {
            return Ok(MinOracleOutcome { holds: false, at_witness, best_sampled, violating: Some(sigma) });
        }
    }
    Ok(MinOracleOutcome { holds: true, at_witness, best_sampled, violating: None })
}

/// ρ^⊗n regrouped as (A₁…A_n) ⊗ (B₁…B_n) with the product basis on the A side.
pub fn copies(rho: &DensityMatrix, basis: &OrthonormalBasis, n: usize) -> Result<(DensityMatrix, OrthonormalBasis)> {
    if n == 0 {
        return arg("need at least one copy");
    }
    let merged = rho.regroup(vec![rho.dim_a(), rho.dim_b()])?;
    let mut state = merged.clone();
    let mut prod = basis.clone();
    for _ in 1..n {
        state = tensor(&state, &merged)?;
        prod = prod.product(basis);
    }
    let order: Vec<usize> = (0..n).map(|i| 2 * i).chain((0..n).map(|i| 2 * i + 1)).collect();
    let state = permute_subsystems(&state, &order)?;
    let (d_a, d_b) = (rho.dim_a().pow(n as u32), rho.dim_b().pow(n as u32));
    Ok((state.regroup(vec![d_a, d_b])?, prod))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct AdditivityReport {
    pub single: f64,
    pub copies: f64,
    pub residual: f64,
}

/// |Δ(ρ^⊗n) − nΔ(ρ)| with the n-fold product basis.
pub fn additivity_check(rho: &DensityMatrix, basis: &OrthonormalBasis, n_copies: usize) -> Result<AdditivityReport> {
    if n_copies < 2 {
        return arg("additivity check needs at least two copies");
    }
    let single = delta_value(rho, basis)?;
    let (many, prod) = copies(rho, basis, n_copies)?;
    let copies = delta_value(&many, &prod)?;
    Ok(AdditivityReport { single, copies, residual: (copies - n_copies as f64 * single).abs() })
}

/// Σ p_i Δ(ρ_i) − Δ(Σ p_i ρ_i); nonnegative by convexity.
pub fn convexity_check(states: &[DensityMatrix], weights: &[f64], basis: &OrthonormalBasis) -> Result<f64> {
    let mix = DensityMatrix::mixture(states, weights)?;
    let mut avg = 0.0;
    for (s, &w) in states.iter().zip(weights) {
        avg += w * delta_value(s, basis)?;
    }
    Ok(avg - delta_value(&mix, basis)?)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MonotonicityReport {
    pub before: f64,
    /// Σ_b p_b Δ(ρ_b) over the program's branches.
    pub after_average: f64,
    pub decrease: f64,
    pub branches: usize,
    pub degenerate_skipped: usize,
}

/// Δ(ρ) − Σ_b p_b Δ(ρ_b) for the branches produced by `program`.
pub fn monotonicity_check(rho: &DensityMatrix, basis: &OrthonormalBasis, program: &GoiaProgram) -> Result<MonotonicityReport> {
    let before = delta_value(rho, basis)?;
    let out = program.run(basis, rho)?;
    let mut after_average = 0.0;
    for br in &out.branches {
        after_average += br.probability * delta_value(&br.state, basis)?;
    }
    Ok(MonotonicityReport {
        before,
        after_average,
        decrease: before - after_average,
        branches: out.branches.len(),
        degenerate_skipped: out.degenerate_skipped,
    })
}

/// Random state of random rank with the given dims.
pub(crate) fn random_instance<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Result<DensityMatrix> {
    let total: usize = dims.iter().product();
    let rank = rng.random_range(1..=total);
    crate::state::random_state_with(dims, rank, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::goia::{dephasing_program, random_goia_program_in};
    use crate::state::{random_state, reduce_to_a};

    #[test]
    fn coherence_examples() {
        let z2 = OrthonormalBasis::computational(2);
        let plus = reduce_to_a(&fixtures::plus_zero());
        assert!((coherence_rel_ent(&plus, &z2).unwrap() - 1.0).abs() < 1e-12);
        let diag = DensityMatrix::maximally_mixed(vec![2]).unwrap();
        assert!(coherence_rel_ent(&diag, &z2).unwrap().abs() < 1e-12);
        let a = reduce_to_a(&fixtures::qutrit_qubit_example());
        let value = coherence_rel_ent(&a, &OrthonormalBasis::computational(3)).unwrap();
        assert!((value - 0.6887).abs() < 1e-3, "{value}");
        assert!(coherence_rel_ent(&a, &z2).is_err());
        assert!(coherence_rel_ent(&fixtures::plus_zero(), &z2).is_err());
    }

    #[test]
    fn delta_examples() {
        let z2 = OrthonormalBasis::computational(2);
        assert!(delta_value(&fixtures::cq_example(), &z2).unwrap().abs() < 1e-12);
        assert!((delta_value(&fixtures::plus_zero(), &z2).unwrap() - 1.0).abs() < 1e-12);
        let r = delta_z(&fixtures::qutrit_qubit_example(), &OrthonormalBasis::computational(3)).unwrap();
        assert!((r.value - 0.8925).abs() < 1e-3, "{}", r.value);
        assert!(crate::channel::is_cq_state(&r.witness, &r.basis, 1e-12).unwrap());
    }

    #[test]
    fn delta_equals_relative_entropy_to_dephased() {
        let mut rng = linalg::rng_from_seed(17);
        for _ in 0..50 {
            let rho = random_instance(&[3, 2], &mut rng).unwrap();
            let basis = OrthonormalBasis::from_unitary(linalg::haar_unitary_with(3, &mut rng)).unwrap();
            let r = delta_z(&rho, &basis).unwrap();
            let direct = relative_entropy(&rho, &r.witness).unwrap();
            assert!((r.value - direct).abs() < 1e-9);
        }
    }

    #[test]
    fn min_oracle_examples() {
        let z3 = OrthonormalBasis::computational(3);
        assert!(delta_is_min_oracle(&fixtures::qutrit_qubit_example(), &z3, 300, 1).unwrap().holds);
        let z2 = OrthonormalBasis::computational(2);
        let cq = delta_is_min_oracle(&fixtures::cq_example(), &z2, 50, 2).unwrap();
        assert!(cq.holds && cq.at_witness.abs() < 1e-9);
        assert!(delta_is_min_oracle(&fixtures::plus_zero(), &z2, 300, 3).unwrap().holds);
        assert!(delta_is_min_oracle(&random_state(&[4, 4], 2, 0).unwrap(), &OrthonormalBasis::computational(4), 1, 0).is_err());
    }

    #[test]
    fn additivity_examples() {
        let z2 = OrthonormalBasis::computational(2);
        let diag = DensityMatrix::basis_state(vec![2, 2], 1).unwrap();
        assert!(additivity_check(&diag, &z2, 2).unwrap().residual < 1e-12);
        let r = additivity_check(&fixtures::plus_zero(), &z2, 2).unwrap();
        assert!(r.residual < 1e-12 && (r.copies - 2.0).abs() < 1e-12);
        let rho = random_state(&[2, 2], 3, 5).unwrap();
        assert!(additivity_check(&rho, &z2, 2).unwrap().residual < 1e-9);
        assert!(additivity_check(&rho, &z2, 3).unwrap().residual < 1e-9);
        assert!(additivity_check(&rho, &z2, 1).is_err());
    }

    #[test]
    fn convexity_examples() {
        let z2 = OrthonormalBasis::computational(2);
        let rho = random_state(&[2, 2], 2, 4).unwrap();
        assert!(convexity_check(std::slice::from_ref(&rho), &[1.0], &z2).unwrap().abs() < 1e-12);
        // |±⟩⟨±| ⊗ |0⟩⟨0| mixed equally is diagonal: slack = 1 − 0
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let zero = DensityMatrix::basis_state(vec![2], 0).unwrap();
        let minus = DensityMatrix::pure(vec![2], &crate::linalg::ComplexVector::from_vec(vec![linalg::c(h, 0.0), linalg::c(-h, 0.0)])).unwrap();
        let minus_zero = tensor(&minus, &zero).unwrap();
        let slack = convexity_check(&[fixtures::plus_zero(), minus_zero], &[0.5, 0.5], &z2).unwrap();
        assert!((slack - 1.0).abs() < 1e-12);
        assert!(convexity_check(&[rho.clone(), rho], &[0.7, 0.7], &z2).is_err());
    }

    #[test]
    fn monotonicity_examples() {
        let z3 = OrthonormalBasis::computational(3);
        let rho = fixtures::qutrit_qubit_example();
        let id = monotonicity_check(&rho, &z3, &GoiaProgram::default()).unwrap();
        assert!(id.decrease.abs() < 1e-15);
        let full = monotonicity_check(&rho, &z3, &dephasing_program(&z3)).unwrap();
        assert!((full.decrease - full.before).abs() < 1e-12 && full.after_average.abs() < 1e-12);
        let mut rng = linalg::rng_from_seed(21);
        for seed in 0..30 {
            let basis = OrthonormalBasis::from_unitary(linalg::haar_unitary_with(2, &mut rng)).unwrap();
            let rho = random_instance(&[2, 2], &mut rng).unwrap();
            let program = random_goia_program_in(&basis, &[2, 2], 6, seed).unwrap();
            let r = monotonicity_check(&rho, &basis, &program).unwrap();
            assert!(r.decrease >= -SUITE_TOL, "seed {seed}: {r:?}");
        }
    }

    #[test]
    fn product_state_reduces_to_local_coherence() {
        let mut rng = linalg::rng_from_seed(4);
        for _ in 0..20 {
            let a = random_instance(&[3], &mut rng).unwrap();
            let b = random_instance(&[2], &mut rng).unwrap();
            let z = OrthonormalBasis::computational(3);
            let d = delta_value(&tensor(&a, &b).unwrap(), &z).unwrap();
            assert!((d - coherence_rel_ent(&a, &z).unwrap()).abs() < 1e-9);
        }
    }
}
