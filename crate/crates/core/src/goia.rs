//! Programs built from the free operations of incoherent control: incoherent channels on A,
//! A-controlled unitaries on B, ancilla attach/trace on B and measurements on B.
//!
//! Measurement steps fork the evaluation: a run yields a list of weighted branches, which
//! is equivalent to writing the outcome into a classical register on the A side.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{self, controlled_unitary, measure_subsystem, KrausChannel, Povm};
use crate::error::{arg, Error, Result};
use crate::linalg::{self, haar_unitary_with, ComplexMatrix};
use crate::state::{partial_trace, tensor, DensityMatrix, OrthonormalBasis};

/// Ancilla steps in random programs never grow the total dimension past this.
const RANDOM_PROGRAM_MAX_DIM: usize = 36;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "step")]
pub enum GoiaStep {
    /// Channel on A whose Kraus operators are incoherent in 𝒵 (given in the computational representation).
    IncoherentOnA {
        #[serde(with = "crate::io::matrix_list")]
        kraus: Vec<ComplexMatrix>,
    },
    /// Σ_c |c⟩⟨c| ⊗ U_c with one unitary per basis vector, acting on all of B.
    ControlledFromA {
        #[serde(with = "crate::io::matrix_list")]
        units: Vec<ComplexMatrix>,
    },
    /// Appends a B factor of dimension `dim` prepared in |0⟩.
    AddAncillaB { dim: usize },
    /// Traces out B factor `factor` (0-based among the B factors).
    TraceB { factor: usize },
    /// Measures B factor `factor`; each outcome starts a branch.
    MeasureB {
        factor: usize,
        #[serde(with = "crate::io::matrix_list")]
        operators: Vec<ComplexMatrix>,
    },
}

impl GoiaStep {
    pub fn tag(&self) -> &'static str {
        match self {
            GoiaStep::IncoherentOnA { .. } => "IncoherentOnA",
            GoiaStep::ControlledFromA { .. } => "ControlledFromA",
            GoiaStep::AddAncillaB { .. } => "AddAncillaB",
            GoiaStep::TraceB { .. } => "TraceB",
            GoiaStep::MeasureB { .. } => "MeasureB",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GoiaProgram {
    pub steps: Vec<GoiaStep>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub probability: f64,
    pub outcomes: Vec<usize>,
    pub state: DensityMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProgramOutput {
    pub branches: Vec<Branch>,
    /// Outcomes dropped because their path probability fell below the degenerate threshold.
    pub degenerate_skipped: usize,
}

impl ProgramOutput {
    pub fn total_probability(&self) -> f64 {
        self.branches.iter().map(|b| b.probability).sum()
    }
}

fn b_factor(dims: &[usize], factor: usize) -> Result<usize> {
    if factor + 1 >= dims.len() {
        return arg(format!("B factor {factor} does not exist in dims {dims:?}"));
    }
    Ok(factor + 1)
}

impl GoiaProgram {
    pub fn new(steps: Vec<GoiaStep>) -> Self {
        Self { steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Structural validation against `basis` for inputs with `dims`; returns the output dims.
    pub fn validate(&self, basis: &OrthonormalBasis, dims: &[usize]) -> Result<Vec<usize>> {
        if dims.is_empty() || dims[0] != basis.dim() {
            return arg(format!("input dims {dims:?} do not start with d_A = {}", basis.dim()));
        }
        let mut dims = dims.to_vec();
        for (i, step) in self.steps.iter().enumerate() {
            let fail = |msg: String| Error::Validation(format!("step {i} ({}): {msg}", step.tag()));
            match step {
                GoiaStep::IncoherentOnA { kraus } => {
                    let ch = KrausChannel::new(kraus.clone(), vec![dims[0]], vec![dims[0]]).map_err(|e| fail(e.to_string()))?;
                    if !ch.is_trace_preserving() {
                        return Err(fail("channel is not trace preserving".into()));
                    }
                    if let Some(w) = ch.incoherence_violation(basis) {
                        return Err(fail(format!("not incoherent: {w:?}")));
                    }
                }
                GoiaStep::ControlledFromA { units } => {
                    let d_b: usize = dims[1..].iter().product();
                    if units.iter().any(|u| u.nrows() != d_b) {
                        return Err(fail(format!("blocks must act on the whole of B (dimension {d_b})")));
                    }
                    controlled_unitary(basis, units).map_err(|e| fail(e.to_string()))?;
                }
                GoiaStep::AddAncillaB { dim } => {
                    if *dim == 0 {
                        return Err(fail("ancilla dimension must be positive".into()));
                    }
                    dims.push(*dim);
                    linalg::check_capacity(dims.iter().product())?;
                }
                GoiaStep::TraceB { factor } => {
                    let k = b_factor(&dims, *factor).map_err(|e| fail(e.to_string()))?;
                    dims.remove(k);
                }
                GoiaStep::MeasureB { factor, operators } => {
                    let k = b_factor(&dims, *factor).map_err(|e| fail(e.to_string()))?;
                    let povm = Povm::new(operators.clone()).map_err(|e| fail(e.to_string()))?;
                    if povm.dim() != dims[k] {
                        return Err(fail(format!("POVM dimension {} does not match factor dimension {}", povm.dim(), dims[k])));
                    }
                }
            }
        }
        Ok(dims)
    }

    /// Runs the program on `rho`, forking at every measurement.
    pub fn run(&self, basis: &OrthonormalBasis, rho: &DensityMatrix) -> Result<ProgramOutput> {
        self.validate(basis, rho.dims())?;
        let mut branches = vec![Branch { probability: 1.0, outcomes: Vec::new(), state: rho.clone() }];
        let mut degenerate_skipped = 0;
        for step in &self.steps {
            let mut next = Vec::with_capacity(branches.len());
            for br in branches {
                let dims = br.state.dims().to_vec();
                match step {
                    GoiaStep::IncoherentOnA { kraus } => {
                        let ch = KrausChannel::new(kraus.clone(), vec![dims[0]], vec![dims[0]])?.embed(&dims, 0)?;
                        let (state, _) = ch.apply(&br.state)?;
                        next.push(Branch { state, ..br });
                    }
                    GoiaStep::ControlledFromA { units } => {
                        let merged = vec![dims[0], dims[1..].iter().product()];
                        let ch = controlled_unitary(basis, units)?;
                        let (state, _) = ch.apply(&br.state.regroup(merged)?)?;
                        next.push(Branch { state: state.regroup(dims)?, ..br });
                    }
                    GoiaStep::AddAncillaB { dim } => {
                        let anc = DensityMatrix::basis_state(vec![*dim], 0)?;
                        next.push(Branch { state: tensor(&br.state, &anc)?, ..br });
                    }
                    GoiaStep::TraceB { factor } => {
                        let k = b_factor(&dims, *factor)?;
                        let keep: Vec<usize> = (0..dims.len()).filter(|&i| i != k).collect();
                        next.push(Branch { state: partial_trace(&br.state, &keep)?, ..br });
                    }
                    GoiaStep::MeasureB { factor, operators } => {
                        let k = b_factor(&dims, *factor)?;
                        let povm = Povm::new(operators.clone())?;
                        let records = measure_subsystem(&br.state, &povm, k)?;
                        let mut kept = 0;
                        for rec in records {
                            let probability = br.probability * rec.probability;
                            if probability < channel::MIN_BRANCH_PROB {
                                continue;
                            }
                            let mut outcomes = br.outcomes.clone();
                            outcomes.push(rec.outcome);
                            next.push(Branch { probability, outcomes, state: rec.state });
                            kept += 1;
                        }
                        degenerate_skipped += povm.operators().len() - kept;
                    }
                }
            }
            branches = next;
        }
        Ok(ProgramOutput { branches, degenerate_skipped })
    }
}

/// Random incoherent Kraus operators on dimension `d`, given in the computational basis.
///
/// Each of a few weighted layers partitions the columns into groups; a group G with a
/// Haar unitary V contributes operators √w |r_j⟩ Σ_{c∈G} V_{j,c} ⟨c| with random target
/// rows r_j. Operators from different groups with distinct rows are merged. Every
/// operator has one nonzero entry per column and Σ K†K = Σ_layers w·I = I exactly.
pub fn random_incoherent_kraus<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<ComplexMatrix> {
    let layers = rng.random_range(1..=3);
    let raw: Vec<f64> = (0..layers).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    let total: f64 = raw.iter().sum();
    let mut kraus = Vec::new();
    for w in raw.iter().map(|x| x / total) {
        let mut cols: Vec<usize> = (0..d).collect();
        cols.shuffle(rng);
        // (operator, rows used, columns used)
        let mut merged: Vec<(ComplexMatrix, Vec<usize>, Vec<usize>)> = Vec::new();
        let mut rest = &cols[..];
        while !rest.is_empty() {
            let g = rng.random_range(1..=rest.len().min(3));
            let (group, tail) = rest.split_at(g);
            rest = tail;
            let v = haar_unitary_with(g, rng);
            for j in 0..g {
                let row = rng.random_range(0..d);
                let mut op = ComplexMatrix::zeros(d, d);
                for (idx, &col) in group.iter().enumerate() {
                    op[(row, col)] = v[(j, idx)] * w.sqrt();
                }
                let slot = merged.iter_mut().find(|(_, rows, used)| !rows.contains(&row) && !used.iter().any(|u| group.contains(u)));
                match slot {
                    Some((m, rows, used)) => {
                        *m += op;
                        rows.push(row);
                        used.extend_from_slice(group);
                    }
                    None => merged.push((op, vec![row], group.to_vec())),
                }
            }
        }
        kraus.extend(merged.into_iter().map(|(m, _, _)| m));
    }
    kraus
}

fn random_step<R: Rng + ?Sized>(basis: &OrthonormalBasis, dims: &mut Vec<usize>, rng: &mut R) -> GoiaStep {
    let total: usize = dims.iter().product();
    let mut kinds = vec![0u8, 1, 4];
    if total * 2 <= RANDOM_PROGRAM_MAX_DIM {
        kinds.push(2);
    }
    if dims.len() >= 3 {
        kinds.push(3);
    }
    let d_a = dims[0];
    match *kinds.choose(rng).expect("nonempty") {
        0 => {
            let v = basis.matrix();
            let kraus = random_incoherent_kraus(d_a, rng).into_iter().map(|k| v * k * v.adjoint()).collect();
            GoiaStep::IncoherentOnA { kraus }
        }
        1 => {
            let d_b: usize = dims[1..].iter().product();
            GoiaStep::ControlledFromA { units: (0..d_a).map(|_| haar_unitary_with(d_b, rng)).collect() }
        }
        2 => {
            let dim = if total * 3 <= RANDOM_PROGRAM_MAX_DIM && rng.random_bool(0.3) { 3 } else { 2 };
            dims.push(dim);
            GoiaStep::AddAncillaB { dim }
        }
        3 => {
            let factor = rng.random_range(0..dims.len() - 1);
            dims.remove(factor + 1);
            GoiaStep::TraceB { factor }
        }
        _ => {
            let factor = rng.random_range(0..dims.len() - 1);
            let u = haar_unitary_with(dims[factor + 1], rng);
            let operators = (0..u.ncols()).map(|j| linalg::outer(&u.column(j).into_owned())).collect();
            GoiaStep::MeasureB { factor, operators }
        }
    }
}

/// Random program of `depth` steps that is free with respect to `basis`.
pub fn random_goia_program_in(basis: &OrthonormalBasis, dims: &[usize], depth: usize, seed: u64) -> Result<GoiaProgram> {
    if depth == 0 {
        return arg("random program depth must be at least 1");
    }
    if dims.len() < 2 || dims[0] != basis.dim() {
        return arg(format!("random programs need bipartite dims starting with d_A = {}", basis.dim()));
    }
    let mut rng = linalg::rng_from_seed(seed);
    let mut cur = dims.to_vec();
    let steps = (0..depth).map(|_| random_step(basis, &mut cur, &mut rng)).collect();
    let program = GoiaProgram { steps };
    program.validate(basis, dims)?;
    Ok(program)
}

/// Random program that is free with respect to the computational basis of A.
pub fn random_goia_program(dims: &[usize], depth: usize, seed: u64) -> Result<GoiaProgram> {
    random_goia_program_in(&OrthonormalBasis::computational(dims.first().copied().unwrap_or(1)), dims, depth, seed)
}

/// A program that fully dephases A in `basis` via the incoherent Kraus set {|c⟩⟨c|}.
pub fn dephasing_program(basis: &OrthonormalBasis) -> GoiaProgram {
    let kraus = basis.vectors().iter().map(linalg::outer).collect();
    GoiaProgram { steps: vec![GoiaStep::IncoherentOnA { kraus }] }
}

/// Random state Σ_c p_c |c⟩⟨c| ⊗ ρ_c, free with respect to `basis`.
pub fn random_cq_state<R: Rng + ?Sized>(basis: &OrthonormalBasis, d_b: usize, rng: &mut R) -> Result<DensityMatrix> {
    let d_a = basis.dim();
    let raw: Vec<f64> = (0..d_a).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    let total: f64 = raw.iter().sum();
    let mut m = ComplexMatrix::zeros(d_a * d_b, d_a * d_b);
    for (col, p) in raw.iter().map(|x| x / total).enumerate() {
        let rank = rng.random_range(1..=d_b);
        let block = crate::state::random_state_with(&[d_b], rank, rng)?;
        m += linalg::kron(&linalg::outer(&basis.vector(col)), block.matrix()).scale(p);
    }
    Ok(DensityMatrix::from_trusted(vec![d_a, d_b], m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::is_cq_state;
    use crate::fixtures;
    use crate::linalg::identity;

    #[test]
    fn random_incoherent_kraus_is_complete_and_incoherent() {
        let mut rng = linalg::rng_from_seed(3);
        for d in 1..=4 {
            for _ in 0..50 {
                let kraus = random_incoherent_kraus(d, &mut rng);
                let ch = KrausChannel::new(kraus, vec![d], vec![d]).unwrap();
                assert!(ch.is_trace_preserving());
                assert!(ch.is_incoherent(&OrthonormalBasis::computational(d)));
                // direct cross-check: each Kraus sends |c⟩ to a multiple of a basis vector
                for k in ch.kraus() {
                    for col in 0..d {
                        let image = k * linalg::basis_vector(d, col);
                        assert!(image.iter().filter(|z| z.norm() > 1e-10).count() <= 1);
                    }
                }
            }
        }
    }

    #[test]
    fn depth_zero_rejected() {
        assert!(matches!(random_goia_program(&[2, 2], 0, 1), Err(Error::Argument(_))));
    }

    #[test]
    fn random_programs_validate_and_are_deterministic() {
        for seed in 0..40 {
            let p = random_goia_program(&[3, 2], 6, seed).unwrap();
            assert_eq!(p.len(), 6);
            assert_eq!(p, random_goia_program(&[3, 2], 6, seed).unwrap());
        }
    }

    #[test]
    fn random_program_preserves_free_states() {
        let z = OrthonormalBasis::computational(2);
        let mut rng = linalg::rng_from_seed(8);
        for seed in 0..10 {
            let p = random_goia_program(&[2, 2], 5, seed).unwrap();
            for _ in 0..20 {
                let rho = random_cq_state(&z, 2, &mut rng).unwrap();
                let out = p.run(&z, &rho).unwrap();
                assert!((out.total_probability() - 1.0).abs() < 1e-9);
                for br in &out.branches {
                    assert!(is_cq_state(&br.state, &z, 1e-8).unwrap());
                }
            }
        }
    }

    #[test]
    fn measurement_forks_branches() {
        let z = OrthonormalBasis::computational(3);
        let program = GoiaProgram::new(vec![
            GoiaStep::AddAncillaB { dim: 2 },
            GoiaStep::MeasureB { factor: 0, operators: Povm::projective(&OrthonormalBasis::computational(2)).operators().to_vec() },
        ]);
        assert_eq!(program.validate(&z, &[3, 2]).unwrap(), vec![3, 2, 2]);
        let out = program.run(&z, &fixtures::qutrit_qubit_example()).unwrap();
        assert_eq!(out.branches.len(), 2);
        assert!((out.branches[0].probability - 0.75).abs() < 1e-12);
        assert_eq!(out.branches[1].outcomes, vec![1]);
    }

    #[test]
    fn validation_rejects_coherent_steps() {
        let z = OrthonormalBasis::computational(2);
        let bad = GoiaProgram::new(vec![GoiaStep::IncoherentOnA { kraus: vec![linalg::hadamard()] }]);
        assert!(matches!(bad.validate(&z, &[2, 2]), Err(Error::Validation(_))));
        let bad = GoiaProgram::new(vec![GoiaStep::ControlledFromA { units: vec![identity(3), identity(3)] }]);
        assert!(matches!(bad.validate(&z, &[2, 2]), Err(Error::Validation(_))));
        let bad = GoiaProgram::new(vec![GoiaStep::TraceB { factor: 1 }]);
        assert!(matches!(bad.validate(&z, &[2, 2]), Err(Error::Validation(_))));
    }

    #[test]
    fn program_json_round_trip() {
        let p = random_goia_program(&[2, 3], 6, 99).unwrap();
        let text = crate::io::program_to_json(&p);
        assert!(text.contains("\"step\""));
        assert_eq!(crate::io::parse_program(&text).unwrap(), p);
    }
}
