//! Polytopal state spaces, their cones and exact membership.

mod body;
mod hrep;

pub use body::{
    cone_of, interior_point, make_body, member_of, simplex_recognize, unit_effect, Cone, ConvexBody,
    MembershipCertificate, SimplexLabeling,
};
pub use hrep::{double_description, HRep};

/// Facet description of the cone over `body`.
pub fn h_representation<F: crate::scalar::Field>(body: &ConvexBody<F>) -> std::sync::Arc<HRep<F>> {
    body.hrep()
}
