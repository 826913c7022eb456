use gocoh::linalg::{self, frobenius};
use gocoh::measures::delta_value;
use gocoh::state::{dephase, partial_trace, random_state, relative_entropy, tensor, von_neumann_entropy, OrthonormalBasis};
use proptest::prelude::*;

fn dims_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop_oneof![Just(vec![2, 2]), Just(vec![2, 3]), Just(vec![3, 2]), Just(vec![3, 3]), Just(vec![2, 2, 2])]
}

fn basis_for(d: usize, seed: u64, computational: bool) -> OrthonormalBasis {
    if computational {
        OrthonormalBasis::computational(d)
    } else {
        OrthonormalBasis::from_unitary(linalg::haar_unitary(d, seed).unwrap()).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn dephasing_is_idempotent(dims in dims_strategy(), seed in any::<u64>(), comp in any::<bool>()) {
        let total: usize = dims.iter().product();
        let rho = random_state(&dims, 1 + (seed as usize % total), seed).unwrap();
        let basis = basis_for(dims[0], seed ^ 1, comp);
        let once = dephase(&rho, &basis).unwrap();
        let twice = dephase(&once, &basis).unwrap();
        prop_assert!(frobenius(&(once.matrix() - twice.matrix())) < 1e-12);
    }

    #[test]
    fn dephasing_does_not_lower_entropy(dims in dims_strategy(), seed in any::<u64>(), comp in any::<bool>()) {
        let total: usize = dims.iter().product();
        let rho = random_state(&dims, 1 + (seed as usize % total), seed).unwrap();
        let basis = basis_for(dims[0], seed ^ 2, comp);
        let d = dephase(&rho, &basis).unwrap();
        prop_assert!(von_neumann_entropy(&d) >= von_neumann_entropy(&rho) - 1e-9);
    }

    #[test]
    fn relative_entropy_to_dephasing_is_entropy_gap(dims in dims_strategy(), seed in any::<u64>(), comp in any::<bool>()) {
        let total: usize = dims.iter().product();
        let rho = random_state(&dims, 1 + (seed as usize % total), seed).unwrap();
        let basis = basis_for(dims[0], seed ^ 3, comp);
        let d = dephase(&rho, &basis).unwrap();
        let gap = von_neumann_entropy(&d) - von_neumann_entropy(&rho);
        prop_assert!((relative_entropy(&rho, &d).unwrap() - gap).abs() < 1e-8);
        prop_assert!((delta_value(&rho, &basis).unwrap() - gap).abs() < 1e-8);
    }

    #[test]
    fn partial_trace_undoes_tensor(da in 1usize..4, db in 1usize..4, seed in any::<u64>()) {
        let a = random_state(&[da], 1 + (seed as usize % da), seed).unwrap();
        let b = random_state(&[db], 1 + (seed as usize % db), seed.wrapping_add(1)).unwrap();
        let ab = tensor(&a, &b).unwrap();
        prop_assert!(frobenius(&(partial_trace(&ab, &[0]).unwrap().matrix() - a.matrix())) < 1e-12);
        prop_assert!(frobenius(&(partial_trace(&ab, &[1]).unwrap().matrix() - b.matrix())) < 1e-12);
    }
}
