//! Variational bounds on recoverable coherence.
//!
//! Both optimizers search the unitary group with derivative-free Givens sweeps: for every
//! column pair (i, j) a real and an imaginary plane rotation are line-searched in turn
//! (coarse grid over the π/2 period, then golden section). The columns of the unitary are
//! either rank-one measurement vectors on B or basis vectors on A.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{controlled_translation_with, Povm};
use crate::error::{arg, Error, Result};
use crate::linalg::{self, c, derive_seed, haar_unitary_with, ComplexMatrix, ComplexVector};
use crate::measures::{delta_value, weighted_coherence};
use crate::state::{b_block, dephased_entropy_raw, reduce_to_a, von_neumann_entropy, DensityMatrix, OrthonormalBasis};

/// Slack allowed on the lower ≤ upper ordering before it is reported as a violation.
pub const BOUND_SLACK: f64 = 1e-6;
const GRID_POINTS: usize = 12;
const GOLDEN: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Parameterization {
    /// Rank-one projective measurements on B (d_B outcomes).
    Projective,
    /// Rank-one POVMs with up to r² outcomes via a Naimark ancilla; `None` takes r = rank(Tr_B ρ).
    Povm { rank: Option<usize> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimizerConfig {
    pub restarts: usize,
    /// Maximum number of full sweeps per restart.
    pub max_iters: usize,
    /// Angular resolution of the golden-section stage (radians).
    pub step_tol: f64,
    /// A sweep improving the objective by less than this ends a restart.
    pub value_tol: f64,
    pub seed: u64,
    pub parameterization: Parameterization,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 32,
            max_iters: 500,
            step_tol: 1e-9,
            value_tol: 1e-8,
            seed: 0,
            parameterization: Parameterization::Projective,
        }
    }
}

impl OptimizerConfig {
    pub fn with_restarts(self, restarts: usize) -> Self {
        Self { restarts, ..self }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    fn check(&self) -> Result<()> {
        if self.restarts == 0 {
            return arg("optimizer needs at least one restart");
        }
        if self.max_iters == 0 {
            return arg("optimizer needs max_iters ≥ 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RestartTrace {
    pub index: usize,
    pub value: f64,
    pub sweeps: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundPayload {
    /// Effect vectors w_k of the optimal rank-one measurement on B (effects |w_k⟩⟨w_k|).
    Measurement(Vec<ComplexVector>),
    Basis(OrthonormalBasis),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundResult {
    pub value: f64,
    pub payload: BoundPayload,
    pub restarts: Vec<RestartTrace>,
    /// Whether the restart that produced `value` met the sweep tolerance.
    pub converged: bool,
    pub best_restart: usize,
}

impl BoundResult {
    /// The optimal measurement as a POVM, when the payload is a measurement.
    pub fn povm(&self) -> Option<Result<Povm>> {
        match &self.payload {
            BoundPayload::Measurement(ws) => Some(Povm::from_vectors(ws)),
            BoundPayload::Basis(_) => None,
        }
    }

    pub fn basis(&self) -> Option<&OrthonormalBasis> {
        match &self.payload {
            BoundPayload::Basis(b) => Some(b),
            BoundPayload::Measurement(_) => None,
        }
    }
}

#[derive(Clone, Copy)]
enum Plane {
    Real,
    Imag,
}

/// U · G(θ) where G rotates columns i and j.
fn rotate(u: &ComplexMatrix, i: usize, j: usize, plane: Plane, theta: f64) -> ComplexMatrix {
    let (s, co) = theta.sin_cos();
    let mut out = u.clone();
    for r in 0..u.nrows() {
        let (ui, uj) = (u[(r, i)], u[(r, j)]);
        match plane {
            Plane::Real => {
                out[(r, i)] = ui * co + uj * s;
                out[(r, j)] = -ui * s + uj * co;
            }
            Plane::Imag => {
                out[(r, i)] = ui * co + uj * c(0.0, s);
                out[(r, j)] = ui * c(0.0, s) + uj * co;
            }
        }
    }
    out
}

struct Search<'a> {
    objective: &'a (dyn Fn(&ComplexMatrix) -> f64 + Sync),
    config: &'a OptimizerConfig,
}

impl Search<'_> {
    /// Best rotation angle in [−π/4, π/4) for one plane; `current` is the value at θ = 0.
    fn line_search(&self, u: &ComplexMatrix, i: usize, j: usize, plane: Plane, current: f64) -> (f64, f64) {
        let f = |theta: f64| (self.objective)(&rotate(u, i, j, plane, theta));
        let h = PI / 2.0 / GRID_POINTS as f64;
        let mut best = (0.0, current);
        for m in 0..GRID_POINTS {
            let theta = -PI / 4.0 + m as f64 * h;
            if theta == 0.0 {
                continue;
            }
            let v = f(theta);
            if v > best.1 {
                best = (theta, v);
            }
        }
        let (mut lo, mut hi) = (best.0 - h, best.0 + h);
        let mut x1 = hi - GOLDEN * (hi - lo);
        let mut x2 = lo + GOLDEN * (hi - lo);
        let (mut f1, mut f2) = (f(x1), f(x2));
        while hi - lo > self.config.step_tol {
            if f1 < f2 {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + GOLDEN * (hi - lo);
                f2 = f(x2);
            } else {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - GOLDEN * (hi - lo);
                f1 = f(x1);
            }
        }
        for (x, v) in [(x1, f1), (x2, f2)] {
            if v > best.1 {
                best = (x, v);
            }
        }
        best
    }

    fn restart(&self, dim: usize, index: usize) -> (ComplexMatrix, RestartTrace) {
        let mut rng = linalg::rng_from_seed(derive_seed(self.config.seed, index as u64));
        let mut u = haar_unitary_with(dim, &mut rng);
        let mut value = (self.objective)(&u);
        let mut sweeps = 0;
        let mut converged = dim < 2;
        while !converged && sweeps < self.config.max_iters {
            let start = value;
            for i in 0..dim {
                for j in i + 1..dim {
                    for plane in [Plane::Real, Plane::Imag] {
                        let (theta, v) = self.line_search(&u, i, j, plane, value);
                        if v > value {
                            u = rotate(&u, i, j, plane, theta);
                            value = v;
                        }
                    }
                }
            }
            sweeps += 1;
            converged = value - start < self.config.value_tol;
        }
        (u, RestartTrace { index, value, sweeps, converged })
    }
}

/// Maximizes `objective` over U(dim); ties go to the lowest restart index.
fn maximize_unitary(
    dim: usize,
    objective: &(dyn Fn(&ComplexMatrix) -> f64 + Sync),
    config: &OptimizerConfig,
) -> (ComplexMatrix, Vec<RestartTrace>, usize) {
    let search = Search { objective, config };
    let runs: Vec<(ComplexMatrix, RestartTrace)> = (0..config.restarts).into_par_iter().map(|k| search.restart(dim, k)).collect();
    let mut best = 0;
    for (k, (_, t)) in runs.iter().enumerate() {
        if t.value > runs[best].1.value {
            best = k;
        }
    }
    let traces = runs.iter().map(|(_, t)| *t).collect();
    (runs[best].0.clone(), traces, best)
}

fn numerical_rank(m: &ComplexMatrix) -> usize {
    linalg::hermitian_eigenvalues(m).into_iter().filter(|&v| v > 1e-10).count().max(1)
}

/// Single-shot LQICC lower bound: max over rank-one measurements {M_k} on B of
/// Σ_k p_k C_𝒵(ρ_k^A), where ρ_k^A ∝ Tr_B[(I⊗M_k†M_k) ρ].
pub fn lqicc_lower_bound(rho: &DensityMatrix, basis: &OrthonormalBasis, config: &OptimizerConfig) -> Result<BoundResult> {
    config.check()?;
    if rho.dims().len() < 2 {
        return arg("lower bound needs a bipartite state");
    }
    if basis.dim() != rho.dim_a() {
        return arg(format!("basis dimension {} does not match d_A = {}", basis.dim(), rho.dim_a()));
    }
    let (d_a, d_b) = (rho.dim_a(), rho.dim_b());
    let ancilla = match config.parameterization {
        Parameterization::Projective => 1,
        Parameterization::Povm { rank } => {
            let r = rank.unwrap_or_else(|| numerical_rank(reduce_to_a(rho).matrix()));
            (r * r).div_ceil(d_b).max(1)
        }
    };
    let d_meas = d_b * ancilla;
    linalg::check_capacity(d_a * d_meas)?;
    let mat = rho.matrix().clone();
    let bmat = basis.matrix().clone();
    let computational = basis.is_computational();
    // Effect vector on B: the ancilla-|0⟩ components of a column of U on B ⊗ ancilla.
    let effect = move |u: &ComplexMatrix, k: usize| -> Vec<num_complex::Complex64> { (0..d_b).map(|b| u[(b * ancilla, k)]).collect() };
    let objective = |u: &ComplexMatrix| -> f64 {
        (0..d_meas)
            .map(|k| weighted_coherence(&b_block(&mat, &effect(u, k), d_a, d_b), &bmat, computational))
            .sum()
    };
    let (u, restarts, best) = maximize_unitary(d_meas, &objective, config);
    let vectors = (0..d_meas).map(|k| ComplexVector::from_vec(effect(&u, k))).collect();
    let value = restarts[best].value;
    let upper = delta_value(rho, basis)?;
    if value > upper + BOUND_SLACK {
        return Err(Error::BoundViolation { lower: value, upper });
    }
    Ok(BoundResult { value, payload: BoundPayload::Measurement(vectors), converged: restarts[best].converged, restarts, best_restart: best })
}

/// min over orthonormal bases 𝒵 of A of Δ_𝒵(ρ) (the thermal discord, an upper bound on the
/// basis-minimized recoverable coherence).
pub fn min_basis_delta(rho: &DensityMatrix, config: &OptimizerConfig) -> Result<BoundResult> {
    config.check()?;
    let (d_a, d_b) = (rho.dim_a(), rho.dim_b());
    let s_rho = von_neumann_entropy(rho);
    let mat = rho.matrix().clone();
    let objective = |u: &ComplexMatrix| -> f64 { -(dephased_entropy_raw(&mat, u, d_a, d_b) - s_rho) };
    let (u, mut restarts, best) = maximize_unitary(d_a, &objective, config);
    for t in &mut restarts {
        t.value = (-t.value).max(0.0);
    }
    Ok(BoundResult {
        value: restarts[best].value,
        payload: BoundPayload::Basis(OrthonormalBasis::from_unitary_unchecked(u)),
        converged: restarts[best].converged,
        restarts,
        best_restart: best,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct UpperBoundReport {
    pub delta: f64,
    pub lqicc_lower: f64,
    pub gap: f64,
    pub lower_converged: bool,
}

/// Δ_𝒵 (upper bound) next to the optimized single-shot LQICC lower bound.
pub fn upper_bound_report(rho: &DensityMatrix, basis: &OrthonormalBasis, config: &OptimizerConfig) -> Result<UpperBoundReport> {
    let delta = delta_value(rho, basis)?;
    let lower = lqicc_lower_bound(rho, basis, config)?;
    Ok(UpperBoundReport { delta, lqicc_lower: lower.value, gap: delta - lower.value, lower_converged: lower.converged })
}

#[derive(Debug, Clone)]
pub struct PureStateReport {
    pub delta: f64,
    /// Schmidt coefficients λ_α (descending), Σ λ_α² = 1.
    pub schmidt_coeffs: Vec<f64>,
    /// T_c(|ψ⟩⊗|0⟩_{B'}) on A ⊗ B ⊗ B' with d_{B'} = d_A; maximally correlated between A and B'.
    pub maximally_correlated_form: ComplexVector,
    pub translated_dims: Vec<usize>,
    pub delta_after_translation: f64,
    /// |Δ before − Δ after| ≤ 1e−9.
    pub certificate: bool,
}

pub const PURE_CERT_TOL: f64 = 1e-9;

/// Exact recoverable coherence of a pure state: Δ_𝒵(|ψ⟩⟨ψ|), certified through the
/// controlled-translation route to a maximally correlated form.
pub fn pure_state_recoverable(psi: &ComplexVector, dims: &[usize], basis: &OrthonormalBasis) -> Result<PureStateReport> {
    if dims.len() != 2 {
        return arg(format!("pure-state protocol expects bipartite dims, got {dims:?}"));
    }
    let (d_a, d_b) = (dims[0], dims[1]);
    let rho = DensityMatrix::pure(dims.to_vec(), psi)?;
    if basis.dim() != d_a {
        return arg(format!("basis dimension {} does not match d_A = {d_a}", basis.dim()));
    }
    let coeffs = ComplexMatrix::from_fn(d_a, d_b, |a, b| psi[a * d_b + b]);
    let mut schmidt_coeffs: Vec<f64> = coeffs.svd(false, false).singular_values.iter().copied().collect();
    schmidt_coeffs.sort_by(|x, y| y.total_cmp(x));
    let delta = delta_value(&rho, basis)?;

    let tc = controlled_translation_with(basis, d_b, d_a)?;
    let mut extended = ComplexVector::zeros(d_a * d_b * d_a);
    for i in 0..d_a * d_b {
        extended[i * d_a] = psi[i];
    }
    let translated = &tc.kraus()[0] * extended;
    let translated_dims = vec![d_a, d_b, d_a];
    let after = DensityMatrix::pure(translated_dims.clone(), &translated)?;
    let delta_after_translation = delta_value(&after, basis)?;
    Ok(PureStateReport {
        delta,
        schmidt_coeffs,
        maximally_correlated_form: translated,
        translated_dims,
        delta_after_translation,
        certificate: (delta - delta_after_translation).abs() <= PURE_CERT_TOL,
    })
}
