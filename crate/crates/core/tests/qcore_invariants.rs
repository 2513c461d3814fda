use distill_lab::qcore::{
    kron_vec, partial_transpose, quadratic_form, regroup_vector, schmidt_decompose,
    tensor_bipartite, tensor_power_bipartite,
};
use distill_lab::rng::StreamRng;
use distill_lab::{BipartiteDims, CMatrix, PureState, ToleranceConfig};
use proptest::prelude::*;

fn dims_strategy() -> impl Strategy<Value = BipartiteDims> {
    (1usize..=4, 1usize..=4).prop_map(|(m, n)| BipartiteDims::new(m, n).unwrap())
}

fn random_state(rng: &mut StreamRng, d: usize) -> CMatrix {
    let g = rng.ginibre(d, d);
    &g * g.adjoint()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partial_transpose_is_a_bit_exact_involution(dims in dims_strategy(), seed in any::<u64>()) {
        let d = dims.total();
        let m = StreamRng::new(seed).ginibre(d, d);
        let back = partial_transpose(&partial_transpose(&m, dims).unwrap(), dims).unwrap();
        prop_assert!(m.iter().zip(back.iter()).all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits()));
    }

    #[test]
    fn partial_transpose_keeps_trace_and_hermiticity(dims in dims_strategy(), seed in any::<u64>()) {
        let mut rng = StreamRng::new(seed);
        let rho = random_state(&mut rng, dims.total());
        let pt = partial_transpose(&rho, dims).unwrap();
        prop_assert!((pt.trace() - rho.trace()).norm() <= 1e-12 * rho.trace().norm());
        prop_assert_eq!(&pt, &pt.adjoint());
    }

    #[test]
    fn partial_transpose_factorizes_over_tensor_products(seed in any::<u64>(), m1 in 1usize..=3, n1 in 1usize..=3, m2 in 1usize..=3, n2 in 1usize..=3) {
        let mut rng = StreamRng::new(seed);
        let (d1, d2) = (BipartiteDims::new(m1, n1).unwrap(), BipartiteDims::new(m2, n2).unwrap());
        let r1 = random_state(&mut rng, d1.total());
        let r2 = random_state(&mut rng, d2.total());
        let (prod, dp) = tensor_bipartite(&r1, d1, &r2, d2).unwrap();
        let lhs = partial_transpose(&prod, dp).unwrap();
        let (rhs, _) = tensor_bipartite(&partial_transpose(&r1, d1).unwrap(), d1, &partial_transpose(&r2, d2).unwrap(), d2).unwrap();
        prop_assert!((lhs - rhs).iter().all(|z| z.norm() <= 1e-14));
    }

    #[test]
    fn product_vectors_see_nonnegative_partial_transpose(dims in dims_strategy(), seed in any::<u64>()) {
        let mut rng = StreamRng::new(seed);
        let rho = random_state(&mut rng, dims.total());
        let pt = partial_transpose(&rho, dims).unwrap();
        let (a, b) = (rng.unit_vector(dims.dim_a), rng.unit_vector(dims.dim_b));
        let value = quadratic_form(&pt, &kron_vec(&a, &b));
        let conj = quadratic_form(&rho, &kron_vec(&a.map(|z| z.conj()), &b));
        prop_assert!((value - conj).abs() <= 1e-12 * (1.0 + conj.abs()));
        prop_assert!(value >= -1e-9);
    }

    #[test]
    fn schmidt_coefficients_survive_local_unitaries(dims in dims_strategy(), seed in any::<u64>()) {
        let mut rng = StreamRng::new(seed);
        let psi = PureState::new(rng.complex_vector(dims.total()), dims).unwrap();
        let u = rng.unitary(dims.dim_a).kronecker(&rng.unitary(dims.dim_b));
        let moved = PureState::new(u * psi.vector(), dims).unwrap();
        let a = schmidt_decompose(&psi, 1e-8).unwrap().coefficients;
        let b = schmidt_decompose(&moved, 1e-8).unwrap().coefficients;
        prop_assert_eq!(a.len(), b.len());
        prop_assert!(a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() <= 1e-10));
    }
}

#[test]
fn tensor_power_commutes_with_partial_transpose() {
    let cfg = ToleranceConfig::default();
    let dims = BipartiteDims::qutrits();
    let mut rng = StreamRng::new(3);
    let rho = random_state(&mut rng, 9);
    let (pow, dp) = tensor_power_bipartite(&rho, dims, 2, &cfg).unwrap();
    let lhs = partial_transpose(&pow, dp).unwrap();
    let (rhs, _) =
        tensor_power_bipartite(&partial_transpose(&rho, dims).unwrap(), dims, 2, &cfg).unwrap();
    assert!((lhs - rhs).iter().all(|z| z.norm() <= 1e-14));
}

#[test]
fn regrouped_products_factorize_expectations() {
    let dims = BipartiteDims::new(2, 3).unwrap();
    let mut rng = StreamRng::new(8);
    let (x, y) = (random_state(&mut rng, 6), random_state(&mut rng, 6));
    let (xy, _) = tensor_bipartite(&x, dims, &y, dims).unwrap();
    let (u, v) = (rng.unit_vector(6), rng.unit_vector(6));
    let w = regroup_vector(&u, dims, &v, dims).unwrap();
    let lhs = quadratic_form(&xy, &w);
    assert!((lhs - quadratic_form(&x, &u) * quadratic_form(&y, &v)).abs() < 1e-12);
}

#[test]
fn tensor_power_respects_the_dimension_cap() {
    let cfg = ToleranceConfig::default();
    let m = CMatrix::identity(9, 9);
    assert!(tensor_power_bipartite(&m, BipartiteDims::qutrits(), 3, &cfg).is_err());
    let loose = ToleranceConfig {
        max_copies: 3,
        ..cfg
    };
    assert!(tensor_power_bipartite(&m, BipartiteDims::qutrits(), 3, &loose).is_ok());
    let tight = ToleranceConfig { max_dim: 80, ..cfg };
    assert!(tensor_power_bipartite(&m, BipartiteDims::qutrits(), 2, &tight).is_err());
}
