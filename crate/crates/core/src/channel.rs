//! Kraus-form channels and the building blocks of incoherent control:
//! incoherent operations on A, A-controlled unitaries on B, measurements on B.

use serde::Serialize;

use crate::error::{arg, Error, Result};
use crate::linalg::{self, c, hermitian_eigenvalues, identity, kron, ComplexMatrix, ComplexVector, TAU_ORTH};
use crate::state::{dephase, DensityMatrix, OrthonormalBasis};

/// Completeness tolerance for Σ K†K = I.
pub const TAU_CPTP: f64 = 1e-9;
/// Kraus entries at or below this magnitude count as zero in the incoherence test.
pub const TAU_INC: f64 = 1e-10;
/// Branches with smaller probability cannot be renormalized.
pub const MIN_BRANCH_PROB: f64 = 1e-14;
pub const DEFAULT_CQ_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    in_dims: Vec<usize>,
    out_dims: Vec<usize>,
    kraus: Vec<ComplexMatrix>,
    trace_preserving: bool,
}

fn completeness_defect(kraus: &[ComplexMatrix], n: usize) -> ComplexMatrix {
    let mut sum = ComplexMatrix::zeros(n, n);
    for k in kraus {
        sum += k.adjoint() * k;
    }
    identity(n) - sum
}

fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

impl KrausChannel {
    /// Builds a channel and classifies it as trace-preserving or trace-non-increasing.
    pub fn new(kraus: Vec<ComplexMatrix>, in_dims: Vec<usize>, out_dims: Vec<usize>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::InvalidChannel("no Kraus operators".into()));
        }
        let n_in: usize = in_dims.iter().product();
        let n_out: usize = out_dims.iter().product();
        if in_dims.is_empty() || out_dims.is_empty() || n_in == 0 || n_out == 0 {
            return arg("channel dims must be nonempty lists of positive integers");
        }
        linalg::check_capacity(n_in.max(n_out))?;
        for (i, k) in kraus.iter().enumerate() {
            if k.nrows() != n_out || k.ncols() != n_in {
                return arg(format!(
                    "Kraus operator {i} is {}x{}, expected {n_out}x{n_in}",
                    k.nrows(),
                    k.ncols()
                ));
            }
        }
        let defect = completeness_defect(&kraus, n_in);
        let trace_preserving = max_abs(&defect) <= TAU_CPTP;
        if !trace_preserving {
            let min = hermitian_eigenvalues(&defect).into_iter().fold(f64::INFINITY, f64::min);
            if min < -TAU_CPTP {
                return Err(Error::InvalidChannel(format!(
                    "sum of K†K exceeds the identity (smallest eigenvalue of I - ΣK†K is {min:e})"
                )));
            }
        }
        Ok(Self { in_dims, out_dims, kraus, trace_preserving })
    }

    pub fn unitary(u: ComplexMatrix, dims: Vec<usize>) -> Result<Self> {
        if !linalg::is_unitary(&u, TAU_ORTH) {
            return arg("operator is not unitary");
        }
        Self::new(vec![u], dims.clone(), dims)
    }

    pub fn identity(dims: Vec<usize>) -> Self {
        let n = dims.iter().product();
        Self { in_dims: dims.clone(), out_dims: dims, kraus: vec![identity(n)], trace_preserving: true }
    }

    pub fn in_dims(&self) -> &[usize] {
        &self.in_dims
    }

    pub fn out_dims(&self) -> &[usize] {
        &self.out_dims
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preserving
    }

    /// Σ_α K_α ρ K_α†, renormalized; the second value is the branch probability
    /// (1 for trace-preserving channels).
    pub fn apply(&self, rho: &DensityMatrix) -> Result<(DensityMatrix, f64)> {
        if rho.dims() != self.in_dims.as_slice() {
            return arg(format!("channel expects dims {:?}, state has {:?}", self.in_dims, rho.dims()));
        }
        let n = self.out_dims.iter().product();
        let mut out = ComplexMatrix::zeros(n, n);
        for k in &self.kraus {
            out += k * rho.matrix() * k.adjoint();
        }
        let p = linalg::trace(&out).re;
        if self.trace_preserving {
            return Ok((DensityMatrix::from_trusted(self.out_dims.clone(), out), 1.0));
        }
        if p < MIN_BRANCH_PROB {
            return Err(Error::DegenerateBranch(p));
        }
        out.scale_mut(1.0 / p);
        Ok((DensityMatrix::from_trusted(self.out_dims.clone(), out), p))
    }

    /// The same channel acting on the contiguous subsystems starting at `at` of a larger system.
    pub fn embed(&self, dims: &[usize], at: usize) -> Result<Self> {
        let len = self.in_dims.len();
        if at + len > dims.len() || dims[at..at + len] != self.in_dims[..] {
            return arg(format!("cannot embed channel on {:?} at position {at} of {dims:?}", self.in_dims));
        }
        let pre: usize = dims[..at].iter().product();
        let post: usize = dims[at + len..].iter().product();
        let (id_pre, id_post) = (identity(pre), identity(post));
        let kraus = self.kraus.iter().map(|k| kron(&kron(&id_pre, k), &id_post)).collect();
        let mut out_dims = dims[..at].to_vec();
        out_dims.extend_from_slice(&self.out_dims);
        out_dims.extend_from_slice(&dims[at + len..]);
        linalg::check_capacity(out_dims.iter().product())?;
        Ok(Self { in_dims: dims.to_vec(), out_dims, kraus, trace_preserving: self.trace_preserving })
    }

    /// Why a channel is not incoherent with respect to `basis`, if it is not.
    pub fn incoherence_violation(&self, basis: &OrthonormalBasis) -> Option<IncoherenceViolation> {
        let d = basis.dim();
        if self.in_dims.iter().product::<usize>() != d || self.out_dims.iter().product::<usize>() != d {
            return Some(IncoherenceViolation::ShapeMismatch { basis_dim: d, in_dims: self.in_dims.clone() });
        }
        let v = basis.matrix();
        for (alpha, k) in self.kraus.iter().enumerate() {
            let in_basis = v.adjoint() * k * v;
            for col in 0..d {
                let rows: Vec<usize> = (0..d).filter(|&r| in_basis[(r, col)].norm() > TAU_INC).collect();
                if rows.len() > 1 {
                    return Some(IncoherenceViolation::CoherentColumn { kraus: alpha, column: col, rows });
                }
            }
        }
        None
    }

    /// True when every Kraus operator has at most one nonzero entry per column in `basis`.
    pub fn is_incoherent(&self, basis: &OrthonormalBasis) -> bool {
        self.incoherence_violation(basis).is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum IncoherenceViolation {
    ShapeMismatch { basis_dim: usize, in_dims: Vec<usize> },
    /// Kraus operator `kraus` sends basis vector `column` to a superposition over `rows`.
    CoherentColumn { kraus: usize, column: usize, rows: Vec<usize> },
}

/// U = Σ_c |c⟩⟨c| ⊗ U_c on A ⊗ B.
pub fn controlled_unitary(basis: &OrthonormalBasis, units: &[ComplexMatrix]) -> Result<KrausChannel> {
    let d_a = basis.dim();
    if units.len() != d_a {
        return arg(format!("need one unitary per basis vector ({d_a}), got {}", units.len()));
    }
    let d_b = units[0].nrows();
    for (i, u) in units.iter().enumerate() {
        if u.nrows() != d_b || !linalg::is_unitary(u, TAU_ORTH) {
            return arg(format!("block {i} is not a unitary of dimension {d_b}"));
        }
    }
    linalg::check_capacity(d_a * d_b)?;
    let mut total = ComplexMatrix::zeros(d_a * d_b, d_a * d_b);
    for (col, u) in units.iter().enumerate() {
        total += kron(&linalg::outer(&basis.vector(col)), u);
    }
    Ok(KrausChannel { in_dims: vec![d_a, d_b], out_dims: vec![d_a, d_b], kraus: vec![total], trace_preserving: true })
}

/// Cyclic shift |k⟩ ↦ |k ⊕ steps⟩ on dimension `dim`.
pub fn shift(dim: usize, steps: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, dim, |row, col| if row == (col + steps) % dim { c(1.0, 0.0) } else { c(0.0, 0.0) })
}

/// T_c = Σ_i |i⟩⟨i|_A ⊗ 1_B ⊗ Σ_k |i⊕k⟩⟨k|_{B'} with |i⟩ running over `basis`.
pub fn controlled_translation_with(basis: &OrthonormalBasis, d_b: usize, d_b_prime: usize) -> Result<KrausChannel> {
    if d_b_prime < basis.dim() {
        return arg(format!("translation register dimension {d_b_prime} is smaller than d_A = {}", basis.dim()));
    }
    let id_b = identity(d_b);
    let units: Vec<ComplexMatrix> = (0..basis.dim()).map(|i| kron(&id_b, &shift(d_b_prime, i))).collect();
    let ch = controlled_unitary(basis, &units)?;
    let dims = if d_b == 1 { vec![basis.dim(), d_b_prime] } else { vec![basis.dim(), d_b, d_b_prime] };
    Ok(KrausChannel { in_dims: dims.clone(), out_dims: dims, ..ch })
}

/// Computational-basis controlled translation on A ⊗ B'.
pub fn controlled_translation(d_a: usize, d_b_prime: usize) -> Result<KrausChannel> {
    controlled_translation_with(&OrthonormalBasis::computational(d_a), 1, d_b_prime)
}

/// Measurement operators {M_k} on B with Σ M_k†M_k = I, each positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    operators: Vec<ComplexMatrix>,
    rank_one: bool,
}

impl Povm {
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self> {
        if operators.is_empty() {
            return Err(Error::InvalidChannel("empty POVM".into()));
        }
        let d = operators[0].nrows();
        for (i, m) in operators.iter().enumerate() {
            if m.nrows() != d || m.ncols() != d {
                return arg(format!("POVM element {i} has the wrong shape"));
            }
            if linalg::hermiticity_error(m) > linalg::TAU_HERM
                || hermitian_eigenvalues(m).into_iter().any(|v| v < -linalg::EPS_NEG)
            {
                return Err(Error::InvalidChannel(format!("POVM element {i} is not positive semidefinite")));
            }
        }
        let defect = max_abs(&completeness_defect(&operators, d));
        if defect > TAU_CPTP {
            return Err(Error::InvalidChannel(format!("POVM is incomplete (|I - ΣM†M| = {defect:e})")));
        }
        let rank_one = operators.iter().all(|m| hermitian_eigenvalues(m).iter().filter(|&&v| v > 1e-9).count() <= 1);
        Ok(Self { operators, rank_one })
    }

    /// Rank-one measurement with effects |w_k⟩⟨w_k|; operators are |w_k⟩⟨w_k|/‖w_k‖.
    pub fn from_vectors(vectors: &[ComplexVector]) -> Result<Self> {
        let ops = vectors
            .iter()
            .filter(|w| w.norm() > 1e-15)
            .map(|w| linalg::outer(w).scale(1.0 / w.norm()))
            .collect();
        Self::new(ops)
    }

    pub fn projective(basis: &OrthonormalBasis) -> Self {
        let operators = basis.vectors().iter().map(linalg::outer).collect();
        Self { operators, rank_one: true }
    }

    pub fn trivial(dim: usize) -> Self {
        Self { operators: vec![identity(dim)], rank_one: dim == 1 }
    }

    pub fn dim(&self) -> usize {
        self.operators[0].nrows()
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn is_rank_one(&self) -> bool {
        self.rank_one
    }

    pub fn effects(&self) -> Vec<ComplexMatrix> {
        self.operators.iter().map(|m| m.adjoint() * m).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    pub outcome: usize,
    pub probability: f64,
    pub state: DensityMatrix,
}

/// Measures subsystem `subsystem` (≥ 1) with `povm`; zero-probability outcomes are dropped.
pub fn measure_subsystem(rho: &DensityMatrix, povm: &Povm, subsystem: usize) -> Result<Vec<MeasurementRecord>> {
    let dims = rho.dims();
    if subsystem == 0 || subsystem >= dims.len() {
        return arg(format!("measurement target {subsystem} is not a B subsystem of {dims:?}"));
    }
    if dims[subsystem] != povm.dim() {
        return arg(format!("POVM dimension {} does not match subsystem dimension {}", povm.dim(), dims[subsystem]));
    }
    let pre: usize = dims[..subsystem].iter().product();
    let post: usize = dims[subsystem + 1..].iter().product();
    let mut records = Vec::new();
    for (k, m) in povm.operators().iter().enumerate() {
        let full = kron(&kron(&identity(pre), m), &identity(post));
        let mut out = &full * rho.matrix() * full.adjoint();
        let p = linalg::trace(&out).re;
        if p < MIN_BRANCH_PROB {
            continue;
        }
        out.scale_mut(1.0 / p);
        records.push(MeasurementRecord { outcome: k, probability: p, state: DensityMatrix::from_trusted(dims.to_vec(), out) });
    }
    Ok(records)
}

/// Measures all of B (the factors after A, jointly) with `povm`.
pub fn measure_on_b(rho: &DensityMatrix, povm: &Povm) -> Result<Vec<MeasurementRecord>> {
    if rho.dims().len() < 2 {
        return arg("measure_on_b needs a bipartite state");
    }
    let merged = rho.regroup(vec![rho.dim_a(), rho.dim_b()])?;
    let records = measure_subsystem(&merged, povm, 1)?;
    records
        .into_iter()
        .map(|r| Ok(MeasurementRecord { state: r.state.regroup(rho.dims().to_vec())?, ..r }))
        .collect()
}

/// Σ_k p_k |k⟩⟨k|_R ⊗ ρ_k with the classical register R merged into A as its leading factor:
/// the result has dims [K·d_A, B...]; pair it with [`register_basis`].
pub fn register_extend(records: &[MeasurementRecord], outcomes: usize) -> Result<DensityMatrix> {
    let first = records.first().ok_or_else(|| Error::Argument("no measurement records".into()))?;
    let mut dims = first.state.dims().to_vec();
    dims[0] *= outcomes;
    linalg::check_capacity(dims.iter().product())?;
    let n = first.state.total_dim() * outcomes;
    let mut out = ComplexMatrix::zeros(n, n);
    for r in records {
        if r.outcome >= outcomes || r.state.dims() != first.state.dims() {
            return arg("inconsistent measurement records");
        }
        let label = linalg::outer(&linalg::basis_vector(outcomes, r.outcome));
        out += kron(&label, r.state.matrix()).scale(r.probability);
    }
    Ok(DensityMatrix::from_trusted(dims, out))
}

/// Register labels ⊗ 𝒵, the basis of the A side after [`register_extend`].
pub fn register_basis(basis: &OrthonormalBasis, outcomes: usize) -> OrthonormalBasis {
    OrthonormalBasis::computational(outcomes).product(basis)
}

/// ‖ρ − dephase(ρ)‖_F ≤ tol.
pub fn is_cq_state(rho: &DensityMatrix, basis: &OrthonormalBasis, tol: f64) -> Result<bool> {
    Ok(cq_distance(rho, basis)? <= tol)
}

pub fn cq_distance(rho: &DensityMatrix, basis: &OrthonormalBasis) -> Result<f64> {
    let d = dephase(rho, basis)?;
    Ok(linalg::frobenius(&(rho.matrix() - d.matrix())))
}
