//! Faces of a polytope, the refinement preorder on states, and the face lattice.
//!
//! A face is keyed by its set of tight facets and carries the vertices lying
//! on all of them. The minimal face of a state is the face carved out by the
//! facets tight at that state; it is also the set of states refining it.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use serde::Serialize;

use crate::convex::{ConvexBody, HRep};
use crate::error::{Error, Result};
use crate::linalg::{self, dot};
use crate::lp::{Outcome, Problem, Sense, VarKind};
use crate::scalar::Field;

/// Default bound on the number of faces enumerated for one body.
pub const DEFAULT_MAX_FACES: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Face {
    #[serde(skip)]
    pub parent: u64,
    pub tight: Vec<usize>,
    pub vertices: Vec<usize>,
    pub dim: isize,
}

impl Face {
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn contains_vertex(&self, v: usize) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }

    pub fn is_subface_of(&self, other: &Face) -> bool {
        is_subset(&self.vertices, &other.vertices)
    }
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|x| b.binary_search(x).is_ok())
}

fn face_from_hrep<F: Field>(body: &ConvexBody<F>, hrep: &HRep<F>, vertices: &[usize]) -> Face {
    let tight = hrep.facets_on(vertices);
    let vertices = hrep.generators_on(&tight);
    let dim = if vertices.is_empty() {
        -1
    } else {
        let rays: Vec<Vec<F>> = vertices.iter().map(|&i| body.ray(i)).collect();
        linalg::rank_of(&rays, body.cone_dim()) as isize - 1
    };
    Face { parent: body.fingerprint(), tight, vertices, dim }
}

/// Smallest face containing the given vertices.
pub fn face_of_vertices<F: Field>(body: &ConvexBody<F>, vertices: &[usize]) -> Result<Face> {
    if let Some(&v) = vertices.iter().find(|&&v| v >= body.num_vertices()) {
        return Err(Error::invalid(format!("vertex index {v} out of range")));
    }
    Ok(face_from_hrep(body, &body.hrep(), vertices))
}

/// The face where all listed facets are tight.
pub fn face_of_tight<F: Field>(body: &ConvexBody<F>, tight: &[usize]) -> Result<Face> {
    let hrep = body.hrep();
    if let Some(&j) = tight.iter().find(|&&j| j >= hrep.facets.len()) {
        return Err(Error::invalid(format!("facet index {j} out of range")));
    }
    let vertices = hrep.generators_on(tight);
    Ok(face_from_hrep(body, &hrep, &vertices))
}

pub fn full_face<F: Field>(body: &ConvexBody<F>) -> Face {
    let all: Vec<usize> = (0..body.num_vertices()).collect();
    face_from_hrep(body, &body.hrep(), &all)
}

pub fn empty_face<F: Field>(body: &ConvexBody<F>) -> Face {
    face_from_hrep(body, &body.hrep(), &[])
}

/// The minimal face containing `point`, i.e. its refining set.
pub fn minimal_face<F: Field>(body: &ConvexBody<F>, point: &[F]) -> Result<Face> {
    let x = body.lift_point(point)?;
    minimal_face_of_cone_vector(body, &x)
}

pub(crate) fn minimal_face_of_cone_vector<F: Field>(body: &ConvexBody<F>, x: &[F]) -> Result<Face> {
    let hrep = body.hrep();
    if !hrep.contains(x) {
        return Err(Error::NotMember { body: body.name().to_string() });
    }
    let tight = hrep.tight_at(x);
    let vertices = hrep.generators_on(&tight);
    Ok(face_from_hrep(body, &hrep, &vertices))
}

/// Whether a cone vector lies in the cone over `face`.
pub fn face_contains<F: Field>(body: &ConvexBody<F>, face: &Face, x: &[F]) -> Result<bool> {
    body.check_cone_vector(x)?;
    let hrep = body.hrep();
    Ok(hrep.contains(x) && face.tight.iter().all(|&j| dot(&hrep.facets[j], x).is_zero()))
}

/// `s ≻ t`: `s` appears in some convex decomposition of `t`.
pub fn refines<F: Field>(body: &ConvexBody<F>, s: &[F], t: &[F]) -> Result<bool> {
    let xs = body.lift_point(s)?;
    if !body.hrep().contains(&xs) {
        return Err(Error::NotMember { body: body.name().to_string() });
    }
    let face = minimal_face(body, t)?;
    face_contains(body, &face, &xs)
}

/// Decomposition form of refinement: is there `p ∈ (0, 1]` and a state `r` with
/// `t = p·s + (1 − p)·r`? Solved as an LP maximizing `p`; independent of the
/// facet machinery.
pub fn refines_by_mixture<F: Field>(body: &ConvexBody<F>, s: &[F], t: &[F]) -> Result<bool> {
    let xs = body.lift_point(s)?;
    let xt = body.lift_point(t)?;
    let rays = body.rays();
    let d = body.cone_dim();
    // (t,1) - p (s,1) = Σ μ_v (v,1), μ ≥ 0, 0 ≤ p ≤ 1.
    let mut lp = Problem::new();
    let p = lp.add_var(VarKind::NonNeg);
    let mu = lp.add_vars(rays.len(), VarKind::NonNeg);
    for row in 0..d {
        let mut terms = vec![(p, xs[row].clone())];
        terms.extend(mu.clone().map(|m| (m, rays[m - 1][row].clone())));
        lp.constrain_sparse(&terms, Sense::Eq, xt[row].clone());
    }
    lp.constrain_sparse(&[(p, F::one())], Sense::Le, F::one());
    let mut obj = vec![F::zero(); lp.num_vars()];
    obj[p] = F::one();
    lp.maximize(obj);
    match lp.solve()? {
        Outcome::Optimal { value, .. } => Ok(value.is_positive()),
        Outcome::Infeasible => Err(Error::NotMember { body: body.name().to_string() }),
        Outcome::Unbounded => Err(Error::Internal("bounded refinement LP reported unbounded".into())),
    }
}

fn check_parent<F: Field>(body: &ConvexBody<F>, faces: &[&Face]) -> Result<()> {
    if faces.iter().any(|f| f.parent != body.fingerprint()) {
        return Err(Error::ParentMismatch);
    }
    Ok(())
}

/// Smallest face containing all inputs.
pub fn join<F: Field>(body: &ConvexBody<F>, faces: &[&Face]) -> Result<Face> {
    check_parent(body, faces)?;
    let mut verts: Vec<usize> = faces.iter().flat_map(|f| f.vertices.iter().copied()).collect();
    verts.sort_unstable();
    verts.dedup();
    face_of_vertices(body, &verts)
}

/// Intersection of the inputs (the full face for no inputs).
pub fn meet<F: Field>(body: &ConvexBody<F>, faces: &[&Face]) -> Result<Face> {
    check_parent(body, faces)?;
    let mut tight: Vec<usize> = faces.iter().flat_map(|f| f.tight.iter().copied()).collect();
    tight.sort_unstable();
    tight.dedup();
    face_of_tight(body, &tight)
}

/// A covector vanishing exactly on a face and nonnegative on the cone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExposingEffect<F> {
    pub effect: Vec<F>,
    pub face: Face,
}

impl<F: Field> ExposingEffect<F> {
    pub fn verify(&self, body: &ConvexBody<F>) -> bool {
        (0..body.num_vertices()).all(|i| {
            let value = dot(&self.effect, &body.ray(i));
            if self.face.contains_vertex(i) {
                value.is_zero()
            } else {
                value.is_positive()
            }
        })
    }
}

/// Finds an exposing covector by LP: zero on the face's vertices, at least 1 on the rest.
/// The full face is exposed by the zero covector.
pub fn exposing_effect<F: Field>(body: &ConvexBody<F>, face: &Face) -> Result<Option<ExposingEffect<F>>> {
    check_parent(body, &[face])?;
    let d = body.cone_dim();
    if face.vertices.len() == body.num_vertices() {
        return Ok(Some(ExposingEffect { effect: vec![F::zero(); d], face: face.clone() }));
    }
    let mut lp = Problem::new();
    lp.add_vars(d, VarKind::Free);
    let mut objective = vec![F::zero(); d];
    for i in 0..body.num_vertices() {
        let ray = body.ray(i);
        if face.contains_vertex(i) {
            lp.constrain(ray, Sense::Eq, F::zero());
        } else {
            objective = linalg::add(&objective, &ray);
            lp.constrain(ray, Sense::Ge, F::one());
        }
    }
    lp.minimize(objective);
    match lp.solve()? {
        Outcome::Optimal { x, .. } => {
            let e = ExposingEffect { effect: x, face: face.clone() };
            if !e.verify(body) {
                return Err(Error::Internal("exposing effect failed to verify".into()));
            }
            Ok(Some(e))
        }
        Outcome::Infeasible => Ok(None),
        Outcome::Unbounded => Err(Error::Internal("exposing-effect LP reported unbounded".into())),
    }
}

/// Barycenter of the face's vertices, a point in its relative interior.
pub fn relint_witness<F: Field>(body: &ConvexBody<F>, face: &Face) -> Result<Vec<F>> {
    check_parent(body, &[face])?;
    if face.is_empty() {
        return Err(Error::invalid("the empty face has no relative interior"));
    }
    let pts: Vec<Vec<F>> = face.vertices.iter().map(|&i| body.vertices()[i].clone()).collect();
    Ok(linalg::barycenter(&pts))
}

/// All faces of a body ordered by `(dim, vertices)`, from the empty face to the full face.
#[derive(Clone)]
pub struct FaceLattice<F: Field> {
    pub faces: Vec<Face>,
    /// `covers[i]`: faces of dimension one less contained in face `i`.
    pub covers: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
    body: ConvexBody<F>,
    hrep: Arc<HRep<F>>,
}

impl<F: Field> std::fmt::Debug for FaceLattice<F> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FaceLattice").field("faces", &self.faces).field("covers", &self.covers).finish()
    }
}

/// Enumerates every face, failing once more than `max_faces` are found.
pub fn face_lattice<F: Field>(body: &ConvexBody<F>, max_faces: usize) -> Result<FaceLattice<F>> {
    let hrep = body.hrep();
    let full = face_from_hrep(body, &hrep, &(0..body.num_vertices()).collect::<Vec<_>>());
    let mut found: Vec<Face> = vec![full.clone()];
    let mut children: Vec<Vec<usize>> = vec![Vec::new()];
    let mut seen: HashMap<Vec<usize>, usize> = HashMap::from([(full.vertices.clone(), 0)]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let face = found[i].clone();
        for j in (0..hrep.facets.len()).filter(|j| face.tight.binary_search(j).is_err()) {
            let verts: Vec<usize> =
                face.vertices.iter().copied().filter(|v| hrep.incidence[j].binary_search(v).is_ok()).collect();
            let child = match seen.get(&verts) {
                Some(&c) => c,
                None => {
                    let f = face_from_hrep(body, &hrep, &verts);
                    let key = f.vertices.clone();
                    if let Some(&c) = seen.get(&key) {
                        c
                    } else {
                        if found.len() >= max_faces {
                            return Err(Error::FaceCapExceeded { cap: max_faces });
                        }
                        found.push(f);
                        children.push(Vec::new());
                        let c = found.len() - 1;
                        seen.insert(key, c);
                        queue.push_back(c);
                        c
                    }
                }
            };
            seen.entry(verts).or_insert(child);
            if found[child].dim == face.dim - 1 && !children[i].contains(&child) {
                children[i].push(child);
            }
        }
    }
    if body.num_vertices() > 0 && !found.iter().any(Face::is_empty) {
        // A body with a single facet-free description (e.g. a point in R^0 with one facet) still
        // has the empty face; add it if enumeration did not reach it.
        let e = face_from_hrep(body, &hrep, &[]);
        if e.is_empty() {
            found.push(e);
            children.push(Vec::new());
        }
    }

    let mut order: Vec<usize> = (0..found.len()).collect();
    order.sort_by(|&a, &b| (found[a].dim, &found[a].vertices).cmp(&(found[b].dim, &found[b].vertices)));
    let mut rank = vec![0; found.len()];
    for (new, &old) in order.iter().enumerate() {
        rank[old] = new;
    }
    let faces: Vec<Face> = order.iter().map(|&o| found[o].clone()).collect();
    let mut covers: Vec<Vec<usize>> = order
        .iter()
        .map(|&o| {
            let mut c: Vec<usize> = children[o].iter().map(|&ch| rank[ch]).collect();
            c.sort_unstable();
            c
        })
        .collect();
    // Vertices cover the empty face even when no facet step produced it directly.
    let empty = faces.iter().position(Face::is_empty);
    if let Some(e) = empty {
        for (i, f) in faces.iter().enumerate() {
            if f.dim == 0 && !covers[i].contains(&e) {
                covers[i].push(e);
                covers[i].sort_unstable();
            }
        }
    }
    let index = faces.iter().enumerate().map(|(i, f)| (f.vertices.clone(), i)).collect();
    Ok(FaceLattice { faces, covers, index, body: body.clone(), hrep })
}

impl<F: Field> FaceLattice<F> {
    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn body(&self) -> &ConvexBody<F> {
        &self.body
    }

    pub fn full(&self) -> usize {
        self.faces.len() - 1
    }

    pub fn index_of(&self, face: &Face) -> Option<usize> {
        self.index.get(&face.vertices).copied()
    }

    pub fn index_of_vertices(&self, vertices: &[usize]) -> Option<usize> {
        self.index.get(vertices).copied()
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        is_subset(&self.faces[a].vertices, &self.faces[b].vertices)
    }

    pub fn join(&self, a: usize, b: usize) -> usize {
        let mut verts: Vec<usize> = self.faces[a].vertices.iter().chain(&self.faces[b].vertices).copied().collect();
        verts.sort_unstable();
        verts.dedup();
        let f = face_from_hrep(&self.body, &self.hrep, &verts);
        self.index[&f.vertices]
    }

    pub fn meet(&self, a: usize, b: usize) -> usize {
        let verts: Vec<usize> =
            self.faces[a].vertices.iter().copied().filter(|v| self.faces[b].contains_vertex(*v)).collect();
        let f = face_from_hrep(&self.body, &self.hrep, &verts);
        self.index[&f.vertices]
    }

    pub fn join_table(&self) -> Vec<Vec<usize>> {
        (0..self.len()).map(|a| (0..self.len()).map(|b| self.join(a, b)).collect()).collect()
    }

    pub fn meet_table(&self) -> Vec<Vec<usize>> {
        (0..self.len()).map(|a| (0..self.len()).map(|b| self.meet(a, b)).collect()).collect()
    }

    /// Face counts indexed by `dim + 1`.
    pub fn counts_by_dim(&self) -> Vec<usize> {
        let top = self.faces.iter().map(|f| f.dim).max().unwrap_or(-1);
        let mut counts = vec![0; (top + 2) as usize];
        for f in &self.faces {
            counts[(f.dim + 1) as usize] += 1;
        }
        counts
    }

    /// Checks idempotence, commutativity, absorption and the bound properties on the tables.
    pub fn check_lattice_axioms(&self) -> std::result::Result<(), String> {
        let join = self.join_table();
        let meet = self.meet_table();
        let n = self.len();
        for a in 0..n {
            if join[a][a] != a || meet[a][a] != a {
                return Err(format!("idempotence fails at face {a}"));
            }
            for b in 0..n {
                if join[a][b] != join[b][a] || meet[a][b] != meet[b][a] {
                    return Err(format!("commutativity fails at ({a}, {b})"));
                }
                if join[a][meet[a][b]] != a || meet[a][join[a][b]] != a {
                    return Err(format!("absorption fails at ({a}, {b})"));
                }
                let j = join[a][b];
                let m = meet[a][b];
                if !self.leq(a, j) || !self.leq(b, j) || !self.leq(m, a) || !self.leq(m, b) {
                    return Err(format!("bound property fails at ({a}, {b})"));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::make_body;
    use crate::scalar::BigRational as Q;

    fn pts(xs: &[&[i64]]) -> Vec<Vec<Q>> {
        xs.iter().map(|p| p.iter().map(|&x| Q::int(x)).collect()).collect()
    }

    fn square() -> ConvexBody<Q> {
        make_body("gbit", pts(&[&[0, 0], &[0, 1], &[1, 0], &[1, 1]])).unwrap()
    }

    fn q(p: i64, d: i64) -> Q {
        Q::ratio(p, d)
    }

    #[test]
    fn minimal_faces_on_square() {
        let b = square();
        let vf = minimal_face(&b, &[Q::int(0), Q::int(0)]).unwrap();
        assert_eq!(vf.vertices, vec![0]);
        assert_eq!(vf.dim, 0);
        let edge = minimal_face(&b, &[q(1, 2), Q::int(0)]).unwrap();
        assert_eq!(edge.vertices, vec![0, 2]);
        assert_eq!(edge.tight.len(), 1);
        let full = minimal_face(&b, &[q(1, 2), q(1, 2)]).unwrap();
        assert_eq!(full.vertices, vec![0, 1, 2, 3]);
        assert!(minimal_face(&b, &[Q::int(2), Q::int(0)]).is_err());
    }

    #[test]
    fn refinement_examples() {
        let b = square();
        let centre = [q(1, 2), q(1, 2)];
        let bottom_mid = [q(1, 2), Q::int(0)];
        assert!(refines(&b, &[Q::int(1), Q::int(1)], &centre).unwrap());
        assert!(!refines(&b, &centre, &[Q::int(1), Q::int(1)]).unwrap());
        assert!(refines(&b, &[Q::int(0), Q::int(0)], &bottom_mid).unwrap());
        assert!(!refines(&b, &[Q::int(0), Q::int(1)], &bottom_mid).unwrap());
        assert!(refines_by_mixture(&b, &[Q::int(0), Q::int(0)], &bottom_mid).unwrap());
        assert!(!refines_by_mixture(&b, &[Q::int(0), Q::int(1)], &bottom_mid).unwrap());
    }

    #[test]
    fn joins_and_meets() {
        let b = square();
        let v = |i: usize| face_of_vertices(&b, &[i]).unwrap();
        let (v00, v01, v10, v11) = (v(0), v(1), v(2), v(3));
        assert_eq!(join(&b, &[&v00, &v10]).unwrap().vertices, vec![0, 2]);
        assert_eq!(join(&b, &[&v00, &v11]).unwrap().vertices, vec![0, 1, 2, 3]);
        let bottom = join(&b, &[&v00, &v10]).unwrap();
        let left = join(&b, &[&v00, &v01]).unwrap();
        assert_eq!(meet(&b, &[&bottom, &left]).unwrap().vertices, vec![0]);
        let other = make_body("other", pts(&[&[0], &[1]])).unwrap();
        let foreign = full_face(&other);
        assert_eq!(join(&b, &[&foreign]), Err(Error::ParentMismatch));
    }

    #[test]
    fn exposing_effects() {
        let b = square();
        let bottom = face_of_vertices(&b, &[0, 2]).unwrap();
        let e = exposing_effect(&b, &bottom).unwrap().unwrap();
        assert_eq!(e.effect, vec![Q::int(0), Q::int(1), Q::int(0)]);
        let full = full_face(&b);
        let z = exposing_effect(&b, &full).unwrap().unwrap();
        assert!(z.effect.iter().all(|x| x == &Q::int(0)));
    }

    #[test]
    fn relint_witnesses() {
        let b = square();
        assert_eq!(relint_witness(&b, &face_of_vertices(&b, &[3]).unwrap()).unwrap(), vec![Q::int(1), Q::int(1)]);
        assert_eq!(relint_witness(&b, &face_of_vertices(&b, &[0, 2]).unwrap()).unwrap(), vec![q(1, 2), Q::int(0)]);
        assert_eq!(relint_witness(&b, &full_face(&b)).unwrap(), vec![q(1, 2), q(1, 2)]);
        assert!(relint_witness(&b, &empty_face(&b)).is_err());
    }

    #[test]
    fn square_lattice() {
        let lattice = face_lattice(&square(), DEFAULT_MAX_FACES).unwrap();
        assert_eq!(lattice.len(), 10);
        assert_eq!(lattice.counts_by_dim(), vec![1, 4, 4, 1]);
        lattice.check_lattice_axioms().unwrap();
        assert_eq!(lattice.covers[lattice.full()].len(), 4);
        assert!(matches!(face_lattice(&square(), 5), Err(Error::FaceCapExceeded { cap: 5 })));
    }
}
