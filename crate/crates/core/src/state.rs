//! Density matrices over explicitly dimensioned multipartite spaces.
//!
//! Subsystem 0 is always the controlling side `A`; every later factor belongs to `B`.
//! Kronecker ordering is big-endian: subsystem 0 is the most significant index.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{arg, Error, Result};
use crate::linalg::{
    self, c, check_capacity, eig_hermitian, entropy_bits, frobenius, gaussian_matrix, hermitian_eigenvalues,
    hermiticity_error, identity, kron, ComplexMatrix, ComplexVector, EPS_NEG, TAU_HERM, TAU_ORTH, TAU_TRACE,
};

/// Support-containment threshold for relative entropy.
pub const EPS_SUPPORT: f64 = 1e-10;
const SUPPORT_LEAK: f64 = 1e-8;

/// Tolerances used when validating externally supplied density matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateTolerance {
    pub hermitian: f64,
    pub trace: f64,
    pub psd: f64,
}

impl Default for StateTolerance {
    fn default() -> Self {
        Self { hermitian: TAU_HERM, trace: TAU_TRACE, psd: EPS_NEG }
    }
}

impl StateTolerance {
    /// Named profiles exposed on the command line.
    pub fn profile(name: &str) -> Option<Self> {
        match name {
            "strict" => Some(Self { hermitian: 1e-12, trace: 1e-12, psd: 1e-12 }),
            "default" => Some(Self::default()),
            "loose" => Some(Self { hermitian: 1e-6, trace: 1e-6, psd: 1e-6 }),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    mat: ComplexMatrix,
}

fn check_dims(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() || dims.contains(&0) {
        return arg(format!("subsystem dimensions {dims:?} must be a nonempty list of positive integers"));
    }
    let mut total: usize = 1;
    for &d in dims {
        total = total.checked_mul(d).ok_or(Error::Capacity { requested: usize::MAX, max: linalg::max_total_dim() })?;
    }
    check_capacity(total)?;
    Ok(total)
}

impl DensityMatrix {
    pub fn new(dims: Vec<usize>, mat: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(dims, mat, StateTolerance::default())
    }

    pub fn with_tolerance(dims: Vec<usize>, mat: ComplexMatrix, tol: StateTolerance) -> Result<Self> {
        let total = check_dims(&dims)?;
        if mat.nrows() != mat.ncols() {
            return Err(Error::Validation(format!("matrix is {}x{}, not square", mat.nrows(), mat.ncols())));
        }
        if mat.nrows() != total {
            return Err(Error::Validation(format!(
                "matrix side {} does not match product of dims {dims:?} = {total}",
                mat.nrows()
            )));
        }
        let herm = hermiticity_error(&mat);
        if herm > tol.hermitian {
            return Err(Error::Validation(format!("Hermiticity violated (max deviation {herm:e})")));
        }
        let tr = linalg::trace(&mat);
        if (tr - c(1.0, 0.0)).norm() > tol.trace {
            return Err(Error::Validation(format!("unit trace violated (trace = {} + {}i)", tr.re, tr.im)));
        }
        let mat = (&mat + mat.adjoint()).scale(0.5);
        let min = hermitian_eigenvalues(&mat).into_iter().fold(f64::INFINITY, f64::min);
        if min < -tol.psd {
            return Err(Error::Validation(format!("positivity violated (smallest eigenvalue {min:e})")));
        }
        Ok(Self { dims, mat })
    }

    /// For outputs of trace-preserving algebra on valid inputs; only re-Hermitizes.
    pub(crate) fn from_trusted(dims: Vec<usize>, mat: ComplexMatrix) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), mat.nrows());
        let mat = (&mat + mat.adjoint()).scale(0.5);
        Self { dims, mat }
    }

    /// |ψ⟩⟨ψ| for a normalized vector ψ.
    pub fn pure(dims: Vec<usize>, psi: &ComplexVector) -> Result<Self> {
        let total = check_dims(&dims)?;
        if psi.len() != total {
            return arg(format!("state vector has length {} but dims {dims:?} need {total}", psi.len()));
        }
        let norm = psi.norm();
        if (norm - 1.0).abs() > TAU_TRACE {
            return arg(format!("state vector is not normalized (norm {norm})"));
        }
        Ok(Self::from_trusted(dims, linalg::outer(psi)))
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Result<Self> {
        let total = check_dims(&dims)?;
        Ok(Self { dims, mat: identity(total).scale(1.0 / total as f64) })
    }

    /// Computational basis projector |index⟩⟨index|.
    pub fn basis_state(dims: Vec<usize>, index: usize) -> Result<Self> {
        let total = check_dims(&dims)?;
        if index >= total {
            return arg(format!("basis index {index} out of range for dimension {total}"));
        }
        Ok(Self::from_trusted(dims, linalg::outer(&linalg::basis_vector(total, index))))
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn total_dim(&self) -> usize {
        self.mat.nrows()
    }

    /// Dimension of the controlling subsystem A.
    pub fn dim_a(&self) -> usize {
        self.dims[0]
    }

    /// Dimension of everything after A, merged.
    pub fn dim_b(&self) -> usize {
        self.dims[1..].iter().product()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.mat)
    }

    /// Same matrix regarded with a different factorization (e.g. merging B factors).
    pub fn regroup(&self, dims: Vec<usize>) -> Result<Self> {
        let total = check_dims(&dims)?;
        if total != self.total_dim() {
            return arg(format!("cannot regroup dimension {} as {dims:?}", self.total_dim()));
        }
        Ok(Self { dims, mat: self.mat.clone() })
    }

    /// Convex combination Σ w_i ρ_i of states with identical dims.
    pub fn mixture(states: &[DensityMatrix], weights: &[f64]) -> Result<Self> {
        if states.is_empty() || states.len() != weights.len() {
            return arg("mixture needs equally many (nonzero count) states and weights");
        }
        if weights.iter().any(|&w| w < 0.0) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return arg(format!("mixture weights {weights:?} are not a probability vector"));
        }
        let dims = states[0].dims.clone();
        if states.iter().any(|s| s.dims != dims) {
            return arg("mixture components have different dims");
        }
        let n = states[0].total_dim();
        let mut mat = ComplexMatrix::zeros(n, n);
        for (s, &w) in states.iter().zip(weights) {
            mat += s.mat.scale(w);
        }
        Ok(Self::from_trusted(dims, mat))
    }
}

/// Ordered orthonormal basis of a single subsystem, stored as the columns of a unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis {
    mat: ComplexMatrix,
}

impl OrthonormalBasis {
    pub fn computational(dim: usize) -> Self {
        Self { mat: identity(dim) }
    }

    pub fn from_vectors(vectors: &[ComplexVector]) -> Result<Self> {
        let dim = vectors.len();
        if dim == 0 || vectors.iter().any(|v| v.len() != dim) {
            return arg("basis must contain exactly `dim` vectors of length `dim`");
        }
        let mat = ComplexMatrix::from_fn(dim, dim, |i, j| vectors[j][i]);
        Self::from_unitary(mat)
    }

    /// Columns of `u` become the basis vectors.
    pub fn from_unitary(u: ComplexMatrix) -> Result<Self> {
        let err = linalg::unitarity_error(&u);
        if err > TAU_ORTH {
            return arg(format!("basis vectors are not orthonormal (deviation {err:e})"));
        }
        Ok(Self { mat: u })
    }

    pub(crate) fn from_unitary_unchecked(u: ComplexMatrix) -> Self {
        Self { mat: u }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn vector(&self, index: usize) -> ComplexVector {
        self.mat.column(index).into_owned()
    }

    pub fn vectors(&self) -> Vec<ComplexVector> {
        (0..self.dim()).map(|i| self.vector(i)).collect()
    }

    /// Product basis {|a⟩⊗|b⟩} in lexicographic order.
    pub fn product(&self, other: &OrthonormalBasis) -> Self {
        Self { mat: kron(&self.mat, &other.mat) }
    }

    pub fn is_computational(&self) -> bool {
        frobenius(&(&self.mat - identity(self.dim()))) == 0.0
    }
}

pub fn tensor(a: &DensityMatrix, b: &DensityMatrix) -> Result<DensityMatrix> {
    let mut dims = a.dims.clone();
    dims.extend_from_slice(&b.dims);
    check_dims(&dims)?;
    Ok(DensityMatrix { dims, mat: kron(&a.mat, &b.mat) })
}

/// Offsets into the full index for every multi-index over `subsystems`.
fn offsets(dims: &[usize], subsystems: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let mut out = vec![0usize];
    for &s in subsystems {
        let mut next = Vec::with_capacity(out.len() * dims[s]);
        for &base in &out {
            for i in 0..dims[s] {
                next.push(base + i * strides[s]);
            }
        }
        out = next;
    }
    out
}

pub(crate) fn partial_trace_matrix(mat: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> ComplexMatrix {
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let kept_off = offsets(dims, keep);
    let traced_off = offsets(dims, &traced);
    let n = kept_off.len();
    ComplexMatrix::from_fn(n, n, |i, j| {
        traced_off
            .iter()
            .map(|&t| mat[(kept_off[i] + t, kept_off[j] + t)])
            .sum::<Complex64>()
    })
}

/// Reduced state on the subsystems in `keep` (kept in ascending order).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return arg("partial_trace: keep set is empty");
    }
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if let Some(&bad) = keep.iter().find(|&&k| k >= rho.dims.len()) {
        return arg(format!("partial_trace: subsystem {bad} out of range for dims {:?}", rho.dims));
    }
    let dims = keep.iter().map(|&k| rho.dims[k]).collect();
    Ok(DensityMatrix::from_trusted(dims, partial_trace_matrix(&rho.mat, &rho.dims, &keep)))
}

/// Reorders subsystems: factor `k` of the result is factor `order[k]` of `rho`.
pub fn permute_subsystems(rho: &DensityMatrix, order: &[usize]) -> Result<DensityMatrix> {
    let n = rho.dims.len();
    let mut seen = order.to_vec();
    seen.sort_unstable();
    if seen != (0..n).collect::<Vec<_>>() {
        return arg(format!("{order:?} is not a permutation of the {n} subsystems"));
    }
    let old_off = offsets(&rho.dims, order);
    let dims: Vec<usize> = order.iter().map(|&k| rho.dims[k]).collect();
    let total = rho.total_dim();
    let mat = ComplexMatrix::from_fn(total, total, |i, j| rho.mat[(old_off[i], old_off[j])]);
    Ok(DensityMatrix { dims, mat })
}

/// Reduced state of A.
pub fn reduce_to_a(rho: &DensityMatrix) -> DensityMatrix {
    DensityMatrix::from_trusted(vec![rho.dims[0]], partial_trace_matrix(&rho.mat, &rho.dims, &[0]))
}

/// S(ρ) in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    entropy_bits(&rho.eigenvalues())
}

fn same_dims(rho: &DensityMatrix, sigma: &DensityMatrix, what: &str) -> Result<()> {
    if rho.dims != sigma.dims {
        return arg(format!("{what}: dims {:?} and {:?} differ", rho.dims, sigma.dims));
    }
    Ok(())
}

/// S(ρ‖σ) in bits; `f64::INFINITY` when supp ρ ⊄ supp σ.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dims(rho, sigma, "relative_entropy")?;
    let spec = eig_hermitian(&sigma.mat)?;
    let n = sigma.total_dim();
    let mut kernel = ComplexMatrix::zeros(n, n);
    let mut cross = 0.0;
    for (j, &lambda) in spec.values.iter().enumerate() {
        let v = spec.vectors.column(j).into_owned();
        if lambda <= EPS_SUPPORT {
            kernel += linalg::outer(&v);
        } else {
            let weight = (v.adjoint() * &rho.mat * &v)[(0, 0)].re;
            cross -= weight * lambda.log2();
        }
    }
    if frobenius(&(&kernel * &rho.mat * &kernel)) > SUPPORT_LEAK {
        return Ok(f64::INFINITY);
    }
    Ok((cross - von_neumann_entropy(rho)).max(0.0))
}

fn sqrt_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let spec = eig_hermitian(m)?;
    let roots: Vec<f64> = spec.values.iter().map(|&v| if v > linalg::EPS_EIG { v.sqrt() } else { 0.0 }).collect();
    Ok(linalg::Spectrum { values: roots, vectors: spec.vectors }.reconstruct())
}

/// Uhlmann fidelity ‖√ρ √σ‖₁².
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dims(rho, sigma, "fidelity")?;
    let product = sqrt_psd(&rho.mat)? * sqrt_psd(&sigma.mat)?;
    let s: f64 = product.svd(false, false).singular_values.iter().sum();
    Ok((s * s).clamp(0.0, 1.0))
}

fn check_basis(rho: &DensityMatrix, basis: &OrthonormalBasis) -> Result<()> {
    if basis.dim() != rho.dim_a() {
        return arg(format!("basis dimension {} does not match d_A = {}", basis.dim(), rho.dim_a()));
    }
    Ok(())
}

/// Blocks ⟨c|ρ|c⟩ (operators on B) for each basis vector |c⟩ of A, unnormalized.
pub(crate) fn a_blocks(mat: &ComplexMatrix, basis: &ComplexMatrix, d_a: usize, d_b: usize) -> Vec<ComplexMatrix> {
    (0..d_a)
        .map(|col| {
            let mut block = ComplexMatrix::zeros(d_b, d_b);
            for a in 0..d_a {
                let va = basis[(a, col)].conj();
                if va == c(0.0, 0.0) {
                    continue;
                }
                for a2 in 0..d_a {
                    let coef = va * basis[(a2, col)];
                    if coef == c(0.0, 0.0) {
                        continue;
                    }
                    for b in 0..d_b {
                        for b2 in 0..d_b {
                            block[(b, b2)] += coef * mat[(a * d_b + b, a2 * d_b + b2)];
                        }
                    }
                }
            }
            block
        })
        .collect()
}

/// Blocks (I⊗⟨v|)ρ(I⊗|v⟩) (operators on A) for a vector |v⟩ on B, unnormalized.
pub(crate) fn b_block(mat: &ComplexMatrix, v: &[Complex64], d_a: usize, d_b: usize) -> ComplexMatrix {
    let mut block = ComplexMatrix::zeros(d_a, d_a);
    for b in 0..d_b {
        let vb = v[b].conj();
        for b2 in 0..d_b {
            let coef = vb * v[b2];
            if coef == c(0.0, 0.0) {
                continue;
            }
            for a in 0..d_a {
                for a2 in 0..d_a {
                    block[(a, a2)] += coef * mat[(a * d_b + b, a2 * d_b + b2)];
                }
            }
        }
    }
    block
}

/// S(Σ_c Π_c ρ Π_c) in bits, computed block by block.
pub(crate) fn dephased_entropy_raw(mat: &ComplexMatrix, basis: &ComplexMatrix, d_a: usize, d_b: usize) -> f64 {
    a_blocks(mat, basis, d_a, d_b)
        .iter()
        .map(|block| entropy_bits(&hermitian_eigenvalues(block)))
        .sum()
}

/// Σ_c Π_c ρ Π_c with Π_c = |c⟩⟨c| ⊗ I_B.
pub fn dephase(rho: &DensityMatrix, basis: &OrthonormalBasis) -> Result<DensityMatrix> {
    check_basis(rho, basis)?;
    let (d_a, d_b) = (rho.dim_a(), rho.dim_b());
    let blocks = a_blocks(&rho.mat, basis.matrix(), d_a, d_b);
    let mut out = ComplexMatrix::zeros(d_a * d_b, d_a * d_b);
    for (col, block) in blocks.iter().enumerate() {
        let proj = linalg::outer(&basis.vector(col));
        out += kron(&proj, block);
    }
    Ok(DensityMatrix::from_trusted(rho.dims.clone(), out))
}

pub fn random_state_with<R: Rng + ?Sized>(dims: &[usize], rank: usize, rng: &mut R) -> Result<DensityMatrix> {
    let total = check_dims(dims)?;
    if rank == 0 || rank > total {
        return arg(format!("rank {rank} out of range 1..={total}"));
    }
    let g = gaussian_matrix(total, rank, rng);
    let mut m = &g * g.adjoint();
    let tr = linalg::trace(&m).re;
    m.scale_mut(1.0 / tr);
    Ok(DensityMatrix::from_trusted(dims.to_vec(), m))
}

/// Random state of the given rank (Ginibre ensemble); rank 1 gives a pure state.
pub fn random_state(dims: &[usize], rank: usize, seed: u64) -> Result<DensityMatrix> {
    random_state_with(dims, rank, &mut linalg::rng_from_seed(seed))
}

pub fn random_pure_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexVector {
    let g = gaussian_matrix(dim, 1, rng);
    let n = g.norm();
    ComplexVector::from_iterator(dim, g.iter().map(|z| z / n))
}
