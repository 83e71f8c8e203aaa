mod common;

use classlim::catalog;
use classlim::compose::{check_distributivity, decomposable, direct_sum, min_tensor, separability_certificate};
use classlim::convex::simplex_recognize;
use classlim::linalg;
use classlim::Field;
use common::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn simplices_compose_to_simplices(n in 1usize..=5, m in 1usize..=5) {
        let p = min_tensor(&catalog::simplex::<Q>(n).unwrap(), &catalog::simplex(m).unwrap()).unwrap();
        prop_assert_eq!(simplex_recognize(&p.result).map(|s| s.n), Some(n * m));
    }

    /// Mixtures of product states are separable, and their marginals are the mixtures of the factors.
    #[test]
    fn separable_marginals(a in body(2, 5), b in body(1, 3), w in weights(4), pa in proptest::collection::vec(weights(5), 4), pb in proptest::collection::vec(weights(3), 4)) {
        let p = min_tensor(&a, &b).unwrap();
        prop_assert_eq!(p.result.num_vertices(), a.num_vertices() * b.num_vertices());
        let lefts: Vec<Vec<Q>> = pa.iter().map(|x| a.lift_point(&point_in(&a, x)).unwrap()).collect();
        let rights: Vec<Vec<Q>> = pb.iter().map(|x| b.lift_point(&point_in(&b, x)).unwrap()).collect();
        let terms: Vec<Vec<Q>> = lefts.iter().zip(&rights).map(|(l, r)| linalg::tensor(l, r)).collect();
        let state = linalg::combination(&w, &terms, p.result.cone_dim());
        prop_assert_eq!(p.left_marginal(&state).unwrap(), linalg::combination(&w, &lefts, a.cone_dim()));
        prop_assert_eq!(p.right_marginal(&state).unwrap(), linalg::combination(&w, &rights, b.cone_dim()));
        let cert = separability_certificate(&a, &b, &state).unwrap();
        prop_assert!(cert.is_separable());
        prop_assert!(cert.verify(&a, &b, &state));
    }

    #[test]
    fn distributivity_on_random_bodies(a in body(1, 3), b in body(2, 4), c in body(1, 3)) {
        let d = check_distributivity(&a, &b, &c).unwrap();
        prop_assert!(d.report.passed, "{:?}", d.report);
    }

    #[test]
    fn direct_sums_decompose(a in body(2, 4), b in body(1, 3)) {
        let s = direct_sum(&a, &b).unwrap();
        prop_assert_eq!(s.result.num_vertices(), a.num_vertices() + b.num_vertices());
        prop_assert_eq!(s.result.affine_dim(), a.affine_dim() + b.affine_dim() + 1);
        let (f, g) = decomposable(&s.result, 10_000).unwrap().expect("a direct sum decomposes");
        prop_assert_eq!(f.vertices.len() + g.vertices.len(), s.result.num_vertices());
    }
}

#[test]
fn product_vertex_count_and_dimension() {
    let sq = catalog::gbit::<Q>();
    let p = min_tensor(&sq, &sq).unwrap();
    assert_eq!(p.result.num_vertices(), 16);
    assert_eq!(p.result.affine_dim(), 8);
    assert_eq!(p.result.ambient_dim(), 8);
    let state = p.result.ray(5);
    assert!(separability_certificate(&sq, &sq, &state).unwrap().is_separable());
    assert_eq!(Q::int(1), state[8]);
}
