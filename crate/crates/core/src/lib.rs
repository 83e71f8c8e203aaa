//! Exact convex-geometry toolkit for general probabilistic theories with
//! polytope state spaces: faces and refinement, composites, linear maps,
//! and a checker for classical decoherence limits.

pub mod catalog;
pub mod compose;
pub mod convex;
pub mod decoherence;
pub mod error;
pub mod face;
pub mod io;
pub mod linalg;
pub mod lp;
pub mod maps;
pub mod report;
pub mod scalar;
pub mod theorem;

pub use error::{Error, Result};
pub use scalar::{BigRational, Field};

/// Default exact scalar.
pub type Rational = BigRational;
pub type Body = convex::ConvexBody<Rational>;
pub type Face = face::Face;
