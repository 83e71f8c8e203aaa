mod common;

use classlim::convex::{interior_point, make_body, member_of};
use classlim::linalg::{self, dot};
use classlim::Field;
use common::*;
use num_traits::Signed;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Facets recover exactly the vertices: each vertex is the only generator
    /// solving its tight facets, and the facets contain every vertex.
    #[test]
    fn v_to_h_to_v(b in body(3, 8)) {
        let h = b.hrep();
        let rays = b.rays();
        for f in &h.facets {
            prop_assert!(rays.iter().all(|r| !dot(f, r).is_negative()));
        }
        for (i, r) in rays.iter().enumerate() {
            prop_assert!(h.contains(r));
            let tight = h.tight_at(r);
            let mut system: Vec<Vec<Q>> = tight.iter().map(|&j| h.facets[j].clone()).collect();
            system.extend(h.equalities.iter().cloned());
            prop_assert_eq!(linalg::rank_of(&system, b.cone_dim()), b.cone_dim() - 1, "vertex {} not pinned", i);
            prop_assert_eq!(h.generators_on(&tight), vec![i]);
        }
    }

    #[test]
    fn membership_agrees_with_facets(b in body(2, 7), p in vector(2)) {
        let inside = b.contains_point(&p).unwrap();
        let x = b.lift_point(&p).unwrap();
        prop_assert_eq!(inside, b.hrep().contains(&x));
        let cert = member_of(&b.rays(), &x, b.cone_dim()).unwrap();
        prop_assert!(cert.verify(&b.rays(), &x));
        prop_assert_eq!(cert.is_inside(), inside);
    }

    #[test]
    fn barycenter_has_positive_slack(b in body(3, 8)) {
        let c = b.lift_point(&interior_point(&b)).unwrap();
        for f in &b.hrep().facets {
            prop_assert!(dot(f, &c).is_positive());
        }
    }

    #[test]
    fn extremality_filter_is_idempotent(b in body(2, 7), w in weights(7)) {
        let again = make_body("again", b.vertices().to_vec()).unwrap();
        prop_assert_eq!(again.vertices(), b.vertices());
        let mut padded = b.vertices().to_vec();
        padded.push(point_in(&b, &w));
        padded.push(b.vertices()[0].clone());
        let padded = make_body("padded", padded).unwrap();
        prop_assert_eq!(padded.vertices(), b.vertices());
    }

    #[test]
    fn convex_combinations_are_members(b in body(3, 6), w in weights(6)) {
        prop_assert!(b.contains_point(&point_in(&b, &w)).unwrap());
    }
}

#[test]
fn catalog_bodies_are_stable() {
    for name in classlim::catalog::BODIES {
        let b: classlim::convex::ConvexBody<Q> = classlim::catalog::body(name).unwrap();
        let again = make_body(*name, b.vertices().to_vec()).unwrap();
        assert_eq!(again.vertices(), b.vertices(), "{name}");
        assert!(b.contains_point(&interior_point(&b)).unwrap());
        assert!(!b.contains_point(&vec![Q::int(7); b.ambient_dim()]).unwrap() || b.ambient_dim() == 0);
    }
}
