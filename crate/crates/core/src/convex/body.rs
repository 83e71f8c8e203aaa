use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, combination, dot, Matrix};
use crate::lp::{minimize_standard, StandardOutcome};
use crate::scalar::Field;

use super::hrep::{double_description, HRep};

struct BodyInner<F> {
    name: String,
    ambient_dim: usize,
    vertices: Vec<Vec<F>>,
    fingerprint: u64,
    hrep: OnceLock<Arc<HRep<F>>>,
}

/// A polytope given by its vertices (the pure states of a system).
///
/// Vertices are deduplicated, filtered for extremality and sorted
/// lexicographically at construction. Cloning is cheap and shares the
/// lazily computed H-representation.
#[derive(Clone)]
pub struct ConvexBody<F>(Arc<BodyInner<F>>);

impl<F: Field> fmt::Debug for ConvexBody<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConvexBody")
            .field("name", &self.0.name)
            .field("ambient_dim", &self.0.ambient_dim)
            .field("vertices", &self.0.vertices.len())
            .finish()
    }
}

impl<F: Field> PartialEq for ConvexBody<F> {
    fn eq(&self, other: &Self) -> bool {
        self.0.ambient_dim == other.0.ambient_dim && self.0.vertices == other.0.vertices
    }
}

impl<F: Field> Eq for ConvexBody<F> {}

/// Builds a body from a vertex list, dropping duplicates and non-extremal points.
pub fn make_body<F: Field>(name: impl Into<String>, vertices: Vec<Vec<F>>) -> Result<ConvexBody<F>> {
    let Some(dim) = vertices.first().map(Vec::len) else {
        return Err(Error::invalid("a body needs at least one vertex"));
    };
    if let Some(i) = vertices.iter().position(|v| v.len() != dim) {
        return Err(Error::dimension(format!("vertex {i} has {} coordinates, expected {dim}", vertices[i].len())));
    }
    let mut points = vertices;
    points.sort();
    points.dedup();

    let rays: Vec<Vec<F>> = points.iter().map(|p| lift(p)).collect();
    let keep: Vec<bool> = (0..points.len())
        .into_par_iter()
        .map(|i| {
            let others: Vec<Vec<F>> =
                rays.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, r)| r.clone()).collect();
            Ok(others.is_empty() || !cone_contains(&others, &rays[i], dim + 1)?)
        })
        .collect::<Result<_>>()?;
    let vertices: Vec<Vec<F>> = points.into_iter().zip(keep).filter_map(|(p, k)| k.then_some(p)).collect();
    Ok(ConvexBody::from_canonical(name.into(), dim, vertices))
}

fn lift<F: Field>(p: &[F]) -> Vec<F> {
    let mut r = p.to_vec();
    r.push(F::one());
    r
}

fn cone_contains<F: Field>(generators: &[Vec<F>], x: &[F], dim: usize) -> Result<bool> {
    let a = Matrix::from_columns(generators, dim)?;
    let zeros = vec![F::zero(); generators.len()];
    Ok(matches!(minimize_standard(&a, x, &zeros)?, StandardOutcome::Optimal { .. }))
}

impl<F: Field> ConvexBody<F> {
    /// Wraps vertices that are already sorted, distinct and extremal.
    pub(crate) fn from_canonical(name: String, ambient_dim: usize, vertices: Vec<Vec<F>>) -> Self {
        let mut h = DefaultHasher::new();
        ambient_dim.hash(&mut h);
        vertices.hash(&mut h);
        Self(Arc::new(BodyInner { name, ambient_dim, vertices, fingerprint: h.finish(), hrep: OnceLock::new() }))
    }

    pub fn name(&self) -> &str {
        &self.0.name
    }

    /// Same geometry under a different label.
    pub fn renamed(&self, name: impl Into<String>) -> Self {
        let inner = &self.0;
        let hrep = OnceLock::new();
        if let Some(h) = inner.hrep.get() {
            let _ = hrep.set(h.clone());
        }
        Self(Arc::new(BodyInner {
            name: name.into(),
            ambient_dim: inner.ambient_dim,
            vertices: inner.vertices.clone(),
            fingerprint: inner.fingerprint,
            hrep,
        }))
    }

    pub fn ambient_dim(&self) -> usize {
        self.0.ambient_dim
    }

    pub fn vertices(&self) -> &[Vec<F>] {
        &self.0.vertices
    }

    pub fn num_vertices(&self) -> usize {
        self.0.vertices.len()
    }

    /// Identity of the vertex set, used to tie faces to their parent body.
    pub fn fingerprint(&self) -> u64 {
        self.0.fingerprint
    }

    /// Dimension of the cone coordinates, `ambient_dim + 1`.
    pub fn cone_dim(&self) -> usize {
        self.0.ambient_dim + 1
    }

    /// Cone generator `(v, 1)` of vertex `i`.
    pub fn ray(&self, i: usize) -> Vec<F> {
        lift(&self.0.vertices[i])
    }

    pub fn rays(&self) -> Vec<Vec<F>> {
        self.0.vertices.iter().map(|v| lift(v)).collect()
    }

    /// Homogenizes a body point to cone coordinates.
    pub fn lift_point(&self, p: &[F]) -> Result<Vec<F>> {
        self.check_point(p)?;
        Ok(lift(p))
    }

    pub(crate) fn check_point(&self, p: &[F]) -> Result<()> {
        if p.len() != self.0.ambient_dim {
            return Err(Error::dimension(format!(
                "point has {} coordinates, body {} lives in dimension {}",
                p.len(),
                self.0.name,
                self.0.ambient_dim
            )));
        }
        Ok(())
    }

    pub(crate) fn check_cone_vector(&self, x: &[F]) -> Result<()> {
        if x.len() != self.cone_dim() {
            return Err(Error::dimension(format!(
                "cone vector has {} coordinates, body {} has cone dimension {}",
                x.len(),
                self.0.name,
                self.cone_dim()
            )));
        }
        Ok(())
    }

    /// Affine dimension of the hull.
    pub fn affine_dim(&self) -> usize {
        linalg::rank_of(&self.rays(), self.cone_dim()) - 1
    }

    /// Cached facet description of the generated cone.
    pub fn hrep(&self) -> Arc<HRep<F>> {
        self.0.hrep.get_or_init(|| Arc::new(double_description(&self.rays(), self.cone_dim()))).clone()
    }

    /// Exact cone membership test on the H-representation.
    pub fn hrep_contains(&self, x: &[F]) -> Result<bool> {
        self.check_cone_vector(x)?;
        Ok(self.hrep().contains(x))
    }

    /// Index of the vertex whose ray equals `x`, if any.
    pub fn ray_index(&self, x: &[F]) -> Option<usize> {
        let (last, head) = x.split_last()?;
        if !last.is_one() {
            return None;
        }
        self.0.vertices.binary_search_by(|v| v.as_slice().cmp(head)).ok()
    }

    /// Exact membership in the cone with a certificate, skipping the LP when `x` is a generator.
    pub fn cone_member(&self, x: &[F]) -> Result<MembershipCertificate<F>> {
        self.check_cone_vector(x)?;
        if let Some(i) = self.ray_index(x) {
            let mut weights = vec![F::zero(); self.num_vertices()];
            weights[i] = F::one();
            return Ok(MembershipCertificate::Inside { weights });
        }
        member_of(&self.rays(), x, self.cone_dim())
    }

    /// Whether a body point lies in the polytope.
    pub fn contains_point(&self, p: &[F]) -> Result<bool> {
        let x = self.lift_point(p)?;
        Ok(self.hrep().contains(&x))
    }
}

/// The cone `K = {λ(s, 1)}` over a body, with its unit effect.
#[derive(Clone, Debug)]
pub struct Cone<F: Field> {
    pub body: ConvexBody<F>,
    pub generators: Vec<Vec<F>>,
    pub unit_effect: Vec<F>,
}

pub fn cone_of<F: Field>(body: &ConvexBody<F>) -> Cone<F> {
    let mut unit = vec![F::zero(); body.cone_dim()];
    unit[body.ambient_dim()] = F::one();
    Cone { body: body.clone(), generators: body.rays(), unit_effect: unit }
}

/// Unit effect `u` on the cone of `body`: the last-coordinate covector.
pub fn unit_effect<F: Field>(body: &ConvexBody<F>) -> Vec<F> {
    let mut unit = vec![F::zero(); body.cone_dim()];
    unit[body.ambient_dim()] = F::one();
    unit
}

/// Exact answer to "is `x` in the cone", with a proof either way.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MembershipCertificate<F> {
    /// `x = Σ weights[i] · generators[i]` with nonnegative weights.
    Inside { weights: Vec<F> },
    /// `witness ≥ 0` on every generator and `witness(x) < 0`.
    Outside { witness: Vec<F> },
}

impl<F: Field> MembershipCertificate<F> {
    pub fn is_inside(&self) -> bool {
        matches!(self, MembershipCertificate::Inside { .. })
    }

    /// Re-checks the certificate by direct arithmetic.
    pub fn verify(&self, generators: &[Vec<F>], x: &[F]) -> bool {
        match self {
            MembershipCertificate::Inside { weights } => {
                weights.len() == generators.len()
                    && weights.iter().all(|w| !w.is_negative())
                    && combination(weights, generators, x.len()) == x
            }
            MembershipCertificate::Outside { witness } => {
                witness.len() == x.len()
                    && generators.iter().all(|g| !dot(witness, g).is_negative())
                    && dot(witness, x).is_negative()
            }
        }
    }
}

impl<F: Field> Cone<F> {
    pub fn dim(&self) -> usize {
        self.body.cone_dim()
    }

    /// Decides membership by an exact feasibility LP and verifies the answer.
    pub fn member(&self, x: &[F]) -> Result<MembershipCertificate<F>> {
        member_of(&self.generators, x, self.dim())
    }
}

/// Membership of `x` in the cone spanned by `generators` (all of dimension `dim`).
pub fn member_of<F: Field>(generators: &[Vec<F>], x: &[F], dim: usize) -> Result<MembershipCertificate<F>> {
    if x.len() != dim {
        return Err(Error::dimension(format!("vector has {} entries, cone lives in dimension {dim}", x.len())));
    }
    let cert = if generators.is_empty() {
        if linalg::is_zero_vec(x) {
            MembershipCertificate::Inside { weights: Vec::new() }
        } else {
            // Any covector negative on x works; take -x itself.
            MembershipCertificate::Outside { witness: x.iter().map(|v| -v.clone()).collect() }
        }
    } else {
        let a = Matrix::from_columns(generators, dim)?;
        let zeros = vec![F::zero(); generators.len()];
        match minimize_standard(&a, x, &zeros)? {
            StandardOutcome::Optimal { x: weights, .. } => MembershipCertificate::Inside { weights },
            StandardOutcome::Infeasible { farkas } => MembershipCertificate::Outside { witness: farkas },
            StandardOutcome::Unbounded => {
                return Err(Error::Internal("feasibility LP reported unbounded".into()));
            }
        }
    };
    if !cert.verify(generators, x) {
        return Err(Error::Internal("membership certificate failed to verify".into()));
    }
    Ok(cert)
}

/// Vertex barycenter, a point in the relative interior.
pub fn interior_point<F: Field>(body: &ConvexBody<F>) -> Vec<F> {
    linalg::barycenter(body.vertices())
}

/// Result of recognizing a simplex: `n` affinely independent vertices in canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplexLabeling {
    pub n: usize,
    pub order: Vec<usize>,
}

/// `Some` iff the vertices are affinely independent.
pub fn simplex_recognize<F: Field>(body: &ConvexBody<F>) -> Option<SimplexLabeling> {
    let n = body.num_vertices();
    (linalg::rank_of(&body.rays(), body.cone_dim()) == n).then(|| SimplexLabeling { n, order: (0..n).collect() })
}
