//! Linear maps and effects acting on cone coordinates.
//!
//! Validity is decided on generators only: a linear map sends the cone into a
//! convex cone iff it sends every generator there, and a covector is
//! nonnegative on the cone iff it is nonnegative on every generator.

use std::collections::HashMap;

use serde_json::json;

use crate::convex::{unit_effect, ConvexBody, MembershipCertificate};
use crate::error::{Error, Result};
use crate::face::FaceLattice;
use crate::linalg::{self, dot, Matrix};
use crate::report::{index_json, vector_json, Check, Report};
use crate::scalar::Field;

/// How a transformation may act on the unit effect.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Normalization {
    /// `u ∘ T = u` on the cone.
    Preserving,
    /// `u ∘ T ≤ u` on the cone.
    #[default]
    NonIncreasing,
}

#[derive(Clone, Debug)]
pub struct LinearMap<F: Field> {
    pub source: ConvexBody<F>,
    pub target: ConvexBody<F>,
    /// `(target.cone_dim()) × (source.cone_dim())`, acting on cone coordinates.
    pub matrix: Matrix<F>,
}

impl<F: Field> LinearMap<F> {
    pub fn new(source: ConvexBody<F>, target: ConvexBody<F>, matrix: Matrix<F>) -> Result<Self> {
        if matrix.nrows() != target.cone_dim() || matrix.ncols() != source.cone_dim() {
            return Err(Error::dimension(format!(
                "map matrix is {}×{}, expected {}×{}",
                matrix.nrows(),
                matrix.ncols(),
                target.cone_dim(),
                source.cone_dim()
            )));
        }
        Ok(LinearMap { source, target, matrix })
    }

    pub fn identity(body: &ConvexBody<F>) -> Self {
        LinearMap { source: body.clone(), target: body.clone(), matrix: Matrix::identity(body.cone_dim()) }
    }

    /// The normalization-preserving map `p ↦ linear·p + offset` in body coordinates.
    pub fn affine(source: ConvexBody<F>, target: ConvexBody<F>, linear: &Matrix<F>, offset: &[F]) -> Result<Self> {
        let (m, n) = (target.ambient_dim(), source.ambient_dim());
        if linear.nrows() != m || linear.ncols() != n || offset.len() != m {
            return Err(Error::dimension("affine map does not match the body dimensions"));
        }
        let mut matrix = Matrix::zeros(m + 1, n + 1);
        for i in 0..m {
            for j in 0..n {
                matrix[(i, j)] = linear[(i, j)].clone();
            }
            matrix[(i, n)] = offset[i].clone();
        }
        matrix[(m, n)] = F::one();
        Ok(LinearMap { source, target, matrix })
    }

    pub fn apply_cone(&self, x: &[F]) -> Result<Vec<F>> {
        self.source.check_cone_vector(x)?;
        self.matrix.mul_vec(x)
    }

    /// Image of a body point, in target body coordinates.
    pub fn apply(&self, point: &[F]) -> Result<Vec<F>> {
        let mut y = self.apply_cone(&self.source.lift_point(point)?)?;
        if !y.last().is_some_and(|u| u.is_one()) {
            return Err(Error::Precondition("image is not normalized; use apply_cone".into()));
        }
        y.pop();
        Ok(y)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &LinearMap<F>) -> Result<LinearMap<F>> {
        if inner.target != self.source {
            return Err(Error::dimension(format!(
                "cannot compose: {} does not feed {}",
                inner.target.name(),
                self.source.name()
            )));
        }
        Ok(LinearMap {
            source: inner.source.clone(),
            target: self.target.clone(),
            matrix: self.matrix.mul(&inner.matrix)?,
        })
    }

    pub fn inverse(&self) -> Option<LinearMap<F>> {
        let inv = self.matrix.inverse()?;
        Some(LinearMap { source: self.target.clone(), target: self.source.clone(), matrix: inv })
    }

    pub fn kron(&self, other: &LinearMap<F>, source: ConvexBody<F>, target: ConvexBody<F>) -> Result<LinearMap<F>> {
        LinearMap::new(source, target, self.matrix.kron(&other.matrix))
    }
}

/// Checks that every source generator lands in the target cone and the unit effect condition.
pub fn is_valid_transformation<F: Field>(map: &LinearMap<F>, mode: Normalization) -> Result<Report> {
    let mut report = Report::new("transformation");
    let images: Vec<(usize, Vec<F>, MembershipCertificate<F>)> = {
        use rayon::prelude::*;
        (0..map.source.num_vertices())
            .into_par_iter()
            .map(|i| {
                let y = map.matrix.mul_vec(&map.source.ray(i))?;
                let cert = map.target.cone_member(&y)?;
                Ok((i, y, cert))
            })
            .collect::<Result<_>>()?
    };
    let escaping = images.iter().find(|(_, _, c)| !c.is_inside());
    report.push(match escaping {
        None => Check::pass("maps-into-cone", format!("{} generator images inside", images.len())),
        Some((i, y, MembershipCertificate::Outside { witness })) => {
            Check::fail("maps-into-cone", format!("image of vertex {i} leaves the target cone"))
                .with_witness(json!({ "vertex": i, "image": vector_json(y), "separator": vector_json(witness) }))
        }
        Some(_) => unreachable!(),
    });

    let pulled = map.matrix.covector_mul(&unit_effect(&map.target))?;
    let u = unit_effect(&map.source);
    let bad = (0..map.source.num_vertices()).find(|&i| {
        let g = map.source.ray(i);
        let gap = dot(&u, &g) - dot(&pulled, &g);
        match mode {
            Normalization::Preserving => !gap.is_zero(),
            Normalization::NonIncreasing => gap.is_negative(),
        }
    });
    let name = match mode {
        Normalization::Preserving => "preserves-normalization",
        Normalization::NonIncreasing => "normalization-non-increasing",
    };
    report.push(match bad {
        None => Check::pass(name, ""),
        Some(i) => Check::fail(name, format!("unit effect condition fails on vertex {i}"))
            .with_witness(json!({ "vertex": i, "pulled_back_unit": vector_json(&pulled) })),
    });
    Ok(report)
}

/// Invertibility plus validity and normalization preservation of both the map and its inverse.
pub fn is_reversible<F: Field>(map: &LinearMap<F>) -> Result<Report> {
    let mut report = Report::new("reversible");
    if map.matrix.nrows() != map.matrix.ncols() {
        report.push(Check::fail("square", "matrix is not square"));
        return Ok(report);
    }
    let Some(inverse) = map.inverse() else {
        report.push(Check::fail("invertible", format!("matrix has rank {}", map.matrix.rank())));
        return Ok(report);
    };
    report.push(Check::pass("invertible", ""));
    for (prefix, m) in [("forward", map), ("inverse", &inverse)] {
        for c in is_valid_transformation(m, Normalization::Preserving)?.checks {
            report.push(Check { name: format!("{prefix}.{}", c.name), ..c });
        }
    }
    Ok(report)
}

/// A reversible map's action on faces: `permutation[i]` is the image of lattice face `i`.
#[derive(Clone, Debug)]
pub struct FaceAutomorphism {
    pub report: Report,
    pub vertex_permutation: Vec<usize>,
    pub permutation: Vec<usize>,
}

pub fn induced_face_automorphism<F: Field>(lattice: &FaceLattice<F>, map: &LinearMap<F>) -> Result<FaceAutomorphism> {
    let body = lattice.body();
    if map.source != *body || map.target != *body {
        return Err(Error::Precondition("map is not an endomorphism of the lattice's body".into()));
    }
    if !is_reversible(map)?.passed {
        return Err(Error::Precondition("map is not reversible".into()));
    }
    let mut report = Report::new("face-automorphism");
    let mut vertex_permutation = Vec::with_capacity(body.num_vertices());
    for i in 0..body.num_vertices() {
        let y = map.matrix.mul_vec(&body.ray(i))?;
        match body.ray_index(&y) {
            Some(j) => vertex_permutation.push(j),
            None => {
                // A reversible normalization-preserving map permutes the extremal rays.
                return Err(Error::Internal(format!("vertex {i} is not sent to a vertex")));
            }
        }
    }
    let mut permutation = Vec::with_capacity(lattice.len());
    let mut faces_ok = true;
    for f in &lattice.faces {
        let mut image: Vec<usize> = f.vertices.iter().map(|&v| vertex_permutation[v]).collect();
        image.sort_unstable();
        match lattice.index_of_vertices(&image) {
            Some(k) => permutation.push(k),
            None => {
                faces_ok = false;
                report.push(
                    Check::fail("faces-to-faces", "a face's image is not a face")
                        .with_witness(json!({ "vertices": f.vertices, "image": image })),
                );
                break;
            }
        }
    }
    if !faces_ok {
        return Ok(FaceAutomorphism { report, vertex_permutation, permutation });
    }
    report.push(Check::pass("faces-to-faces", ""));
    let mut sorted = permutation.clone();
    sorted.sort_unstable();
    sorted.dedup();
    report.push(Check::new("bijective", sorted.len() == lattice.len(), ""));
    let dims = (0..lattice.len()).all(|i| lattice.faces[i].dim == lattice.faces[permutation[i]].dim);
    report.push(Check::new("preserves-dimension", dims, ""));
    let n = lattice.len();
    let mut order = None;
    let mut joins = None;
    for a in 0..n {
        for b in 0..n {
            let (pa, pb) = (permutation[a], permutation[b]);
            if order.is_none() && lattice.leq(a, b) != lattice.leq(pa, pb) {
                order = Some((a, b));
            }
            if joins.is_none() && permutation[lattice.join(a, b)] != lattice.join(pa, pb) {
                joins = Some((a, b));
            }
        }
    }
    let pair_check = |name: &str, bad: Option<(usize, usize)>| match bad {
        None => Check::pass(name, ""),
        Some((a, b)) => Check::fail(name, "").with_witness(index_json(&[a, b])),
    };
    report.push(pair_check("preserves-order", order));
    report.push(pair_check("preserves-joins", joins));
    Ok(FaceAutomorphism { report, vertex_permutation, permutation })
}

#[derive(Clone, Debug)]
pub struct Effect<F: Field> {
    pub body: ConvexBody<F>,
    pub covector: Vec<F>,
}

impl<F: Field> Effect<F> {
    pub fn new(body: ConvexBody<F>, covector: Vec<F>) -> Result<Self> {
        body.check_cone_vector(&covector)?;
        Ok(Effect { body, covector })
    }

    pub fn unit(body: &ConvexBody<F>) -> Self {
        Effect { body: body.clone(), covector: unit_effect(body) }
    }

    pub fn evaluate(&self, point: &[F]) -> Result<F> {
        Ok(dot(&self.covector, &self.body.lift_point(point)?))
    }

    /// `self ∘ map`, an effect on the map's source.
    pub fn pull_back(&self, map: &LinearMap<F>) -> Result<Effect<F>> {
        if map.target != self.body {
            return Err(Error::dimension("effect does not act on the map's target"));
        }
        Ok(Effect { body: map.source.clone(), covector: map.matrix.covector_mul(&self.covector)? })
    }
}

/// `0 ≤ e ≤ u` on every generator, hence on the whole cone.
pub fn is_valid_effect<F: Field>(effect: &Effect<F>) -> Result<Report> {
    let mut report = Report::new("effect");
    let u = unit_effect(&effect.body);
    let complement = linalg::sub(&u, &effect.covector);
    for (name, covector) in [("nonnegative", &effect.covector), ("bounded-by-unit", &complement)] {
        let bad = (0..effect.body.num_vertices()).find(|&i| dot(covector, &effect.body.ray(i)).is_negative());
        report.push(match bad {
            None => Check::pass(name, ""),
            Some(i) => Check::fail(name, format!("fails on vertex {i}")).with_witness(json!({ "vertex": i })),
        });
    }
    Ok(report)
}

/// Permutation map of a simplex-like body given an ordered basis of vertex rays:
/// sends `rays[i]` to `rays[perm[i]]`.
pub fn basis_permutation<F: Field>(body: &ConvexBody<F>, rays: &[Vec<F>], perm: &[usize]) -> Result<LinearMap<F>> {
    let n = rays.len();
    if perm.len() != n || !is_permutation(perm) {
        return Err(Error::invalid(format!("{perm:?} is not a permutation of {n} labels")));
    }
    let d = body.cone_dim();
    let from = Matrix::from_columns(rays, d)?;
    let to = Matrix::from_columns(&perm.iter().map(|&p| rays[p].clone()).collect::<Vec<_>>(), d)?;
    let inv = from.inverse().ok_or_else(|| Error::invalid("rays do not form a basis"))?;
    LinearMap::new(body.clone(), body.clone(), to.mul(&inv)?)
}

pub fn is_permutation(perm: &[usize]) -> bool {
    let mut seen = vec![false; perm.len()];
    perm.iter().all(|&p| p < perm.len() && !std::mem::replace(&mut seen[p], true))
}

/// Searches for a linear bijection of cones carrying `a`'s vertices onto `b`'s.
/// Returns the cone matrix and the vertex correspondence. Exhaustive over
/// assignments of an independent subset of `a`'s vertices, so only for small bodies.
pub fn find_linear_isomorphism<F: Field>(
    a: &ConvexBody<F>,
    b: &ConvexBody<F>,
) -> Result<Option<(Matrix<F>, Vec<usize>)>> {
    if a.num_vertices() != b.num_vertices() || a.affine_dim() != b.affine_dim() {
        return Ok(None);
    }
    let ra = a.rays();
    let rb = b.rays();
    let basis = linalg::independent_subset(&ra, a.cone_dim());
    let k = basis.len();
    let basis_rays: Vec<Vec<F>> = basis.iter().map(|&i| ra[i].clone()).collect();
    // Coordinates of every `a` vertex in the chosen basis.
    let cols = Matrix::from_columns(&basis_rays, a.cone_dim())?;
    let coords: Vec<Vec<F>> = ra
        .iter()
        .map(|r| {
            linalg::solve_linear(&cols, r)?
                .map(|s| s.x)
                .ok_or_else(|| Error::Internal("vertex outside its own span".into()))
        })
        .collect::<Result<_>>()?;
    let index: HashMap<&Vec<F>, usize> = rb.iter().enumerate().map(|(i, r)| (r, i)).collect();
    let n = rb.len();
    let mut choice = vec![0usize; k];
    loop {
        if is_injective(&choice) {
            let images: Vec<Vec<F>> = choice.iter().map(|&j| rb[j].clone()).collect();
            let mapping: Option<Vec<usize>> =
                coords.iter().map(|c| index.get(&linalg::combination(c, &images, b.cone_dim())).copied()).collect();
            if let Some(mapping) = mapping.filter(|m| is_permutation(m)) {
                // Matrix on the span of `a`: solve M·basis = images via a left inverse.
                let left = cols.transpose().mul(&cols)?.inverse().expect("independent columns");
                let pinv = left.mul(&cols.transpose())?;
                let target = Matrix::from_columns(&images, b.cone_dim())?;
                return Ok(Some((target.mul(&pinv)?, mapping)));
            }
        }
        let mut pos = 0;
        loop {
            if pos == k {
                return Ok(None);
            }
            choice[pos] += 1;
            if choice[pos] < n {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

fn is_injective(xs: &[usize]) -> bool {
    (0..xs.len()).all(|i| !xs[..i].contains(&xs[i]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::make_body;
    use crate::face::{face_lattice, DEFAULT_MAX_FACES};
    use crate::scalar::BigRational as Q;

    fn square() -> ConvexBody<Q> {
        let pts = [[0, 0], [0, 1], [1, 0], [1, 1]];
        make_body("gbit", pts.iter().map(|p| p.iter().map(|&x| Q::int(x)).collect()).collect()).unwrap()
    }

    fn m(rows: &[&[i64]]) -> Matrix<Q> {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| Q::int(x)).collect()).collect(), rows[0].len()).unwrap()
    }

    fn reflection(b: &ConvexBody<Q>) -> LinearMap<Q> {
        LinearMap::new(b.clone(), b.clone(), m(&[&[-1, 0, 1], &[0, 1, 0], &[0, 0, 1]])).unwrap()
    }

    #[test]
    fn apply_and_compose() {
        let b = square();
        let r = reflection(&b);
        assert_eq!(r.apply(&[Q::int(0), Q::int(0)]).unwrap(), vec![Q::int(1), Q::int(0)]);
        let rr = r.compose(&r).unwrap();
        assert_eq!(rr.matrix, Matrix::identity(3));
    }

    #[test]
    fn validity() {
        let b = square();
        let half = Q::ratio(1, 2);
        let midline = LinearMap::affine(b.clone(), b.clone(), &m(&[&[1, 0], &[0, 0]]), &[Q::int(0), half]).unwrap();
        assert!(is_valid_transformation(&midline, Normalization::Preserving).unwrap().passed);
        let stretch =
            LinearMap::affine(b.clone(), b.clone(), &m(&[&[2, 0], &[0, 1]]), &[Q::int(0), Q::int(0)]).unwrap();
        let rep = is_valid_transformation(&stretch, Normalization::NonIncreasing).unwrap();
        assert!(!rep.passed);
        assert!(rep.checks[0].witness.is_some());
        assert!(is_reversible(&reflection(&b)).unwrap().passed);
        assert!(!is_reversible(&midline).unwrap().passed);
    }

    #[test]
    fn reflection_automorphism() {
        let b = square();
        let lattice = face_lattice(&b, DEFAULT_MAX_FACES).unwrap();
        let auto = induced_face_automorphism(&lattice, &reflection(&b)).unwrap();
        assert!(auto.report.passed);
        let edge = |v: &[usize]| lattice.index_of_vertices(v).unwrap();
        // left {00,01} <-> right {10,11}; bottom {00,10} and top {01,11} fixed.
        assert_eq!(auto.permutation[edge(&[0, 1])], edge(&[2, 3]));
        assert_eq!(auto.permutation[edge(&[0, 2])], edge(&[0, 2]));
        assert_eq!(auto.permutation[edge(&[1, 3])], edge(&[1, 3]));
    }

    #[test]
    fn effects() {
        let b = square();
        assert!(is_valid_effect(&Effect::unit(&b)).unwrap().passed);
        assert!(is_valid_effect(&Effect::new(b.clone(), vec![Q::int(0); 3]).unwrap()).unwrap().passed);
        assert!(
            !is_valid_effect(&Effect::new(b.clone(), vec![Q::int(0), Q::int(0), Q::int(2)]).unwrap()).unwrap().passed
        );
    }

    #[test]
    fn isomorphism_search() {
        let b = square();
        let shifted = make_body(
            "shifted",
            [[1, 1], [1, 3], [3, 1], [3, 3]].iter().map(|p| p.iter().map(|&x| Q::int(x)).collect()).collect(),
        )
        .unwrap();
        let (matrix, mapping) = find_linear_isomorphism(&b, &shifted).unwrap().unwrap();
        for (i, &j) in mapping.iter().enumerate() {
            assert_eq!(matrix.mul_vec(&b.ray(i)).unwrap(), shifted.ray(j));
        }
    }
}
