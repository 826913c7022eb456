//! End-to-end checks across modules on small seeded instances.

use gocoh::channel::{cq_distance, measure_on_b, Povm};
use gocoh::fixtures;
use gocoh::goia::random_goia_program;
use gocoh::measures::{coherence_rel_ent, delta_value};
use gocoh::optimize::{lqicc_lower_bound, min_basis_delta, OptimizerConfig};
use gocoh::state::{random_state, reduce_to_a, OrthonormalBasis};

fn config() -> OptimizerConfig {
    OptimizerConfig::default().with_restarts(8).with_seed(3)
}

#[test]
fn bound_chain_on_random_states() {
    for i in 0..12u64 {
        let dims = [2 + (i % 2) as usize, 2 + (i / 2 % 2) as usize];
        let rho = random_state(&dims, 1 + (i as usize % 4), 100 + i).unwrap();
        let z = OrthonormalBasis::computational(dims[0]);
        let local = coherence_rel_ent(&reduce_to_a(&rho), &z).unwrap();
        let lower = lqicc_lower_bound(&rho, &z, &config()).unwrap().value;
        let upper = delta_value(&rho, &z).unwrap();
        assert!(local - 1e-6 <= lower && lower <= upper + 1e-6, "{i}: {local} {lower} {upper}");
    }
}

#[test]
fn lower_bound_witness_reproduces_value() {
    let rho = fixtures::qutrit_qubit_example();
    let z = OrthonormalBasis::computational(3);
    let r = lqicc_lower_bound(&rho, &z, &config()).unwrap();
    let povm: Povm = r.povm().unwrap().unwrap();
    let value: f64 = measure_on_b(&rho, &povm)
        .unwrap()
        .iter()
        .map(|rec| rec.probability * coherence_rel_ent(&reduce_to_a(&rec.state), &z).unwrap())
        .sum();
    assert!((value - r.value).abs() < 1e-9);
}

#[test]
fn min_basis_never_exceeds_computational() {
    for (name, rho) in fixtures::all() {
        let z = OrthonormalBasis::computational(rho.dim_a());
        let min = min_basis_delta(&rho, &config()).unwrap();
        assert!(min.value <= delta_value(&rho, &z).unwrap() + 1e-9, "{name}");
    }
}

#[test]
fn programs_keep_cq_fixture_free() {
    let cq = fixtures::cq_example();
    let z = OrthonormalBasis::computational(2);
    for seed in 0..20 {
        let out = random_goia_program(&[2, 2], 4, seed).unwrap().run(&z, &cq).unwrap();
        assert!((out.total_probability() - 1.0).abs() < 1e-9);
        for br in out.branches {
            assert!(cq_distance(&br.state, &z).unwrap() <= 1e-8);
        }
    }
}
