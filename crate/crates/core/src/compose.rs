//! Composite bodies: the min-tensor product and the direct sum.
//!
//! Joint cone coordinates are the row-major tensor of the factors' cone
//! coordinates, so the last slot (`u_A ⊗ u_B`) is the normalization slot.
//! Direct sums use body coordinates `(a, b, t)`: a left vertex `v` becomes
//! `(v, 0, 1)` and a right vertex `w` becomes `(0, w, 0)`.

use rayon::prelude::*;

use crate::convex::{make_body, ConvexBody, MembershipCertificate};
use crate::error::{Error, Result};
use crate::face::{face_lattice, Face};
use crate::linalg::{self, dot, Matrix, Side};
use crate::lp::{Outcome, Problem, Sense, VarKind};
use crate::report::{matrix_json, vector_json, Check, Report};
use crate::scalar::Field;

#[derive(Clone, Debug)]
pub struct ProductBody<F: Field> {
    pub result: ConvexBody<F>,
    pub left: ConvexBody<F>,
    pub right: ConvexBody<F>,
    /// `provenance[k] = (i, j)`: result vertex `k` is left vertex `i` times right vertex `j`.
    pub provenance: Vec<(usize, usize)>,
}

fn product_ray<F: Field>(a: &ConvexBody<F>, i: usize, b: &ConvexBody<F>, j: usize) -> Vec<F> {
    linalg::tensor(&a.ray(i), &b.ray(j))
}

/// Covector vanishing on vertex `i`'s ray and at least 1 on every other vertex ray.
fn vertex_exposer<F: Field>(body: &ConvexBody<F>, i: usize) -> Result<Vec<F>> {
    let d = body.cone_dim();
    let mut lp = Problem::new();
    lp.add_vars(d, VarKind::Free);
    let mut objective = vec![F::zero(); d];
    for j in 0..body.num_vertices() {
        let ray = body.ray(j);
        if j == i {
            lp.constrain(ray, Sense::Eq, F::zero());
        } else {
            objective = linalg::add(&objective, &ray);
            lp.constrain(ray, Sense::Ge, F::one());
        }
    }
    lp.minimize(objective);
    match lp.solve()? {
        Outcome::Optimal { x, .. } => Ok(x),
        _ => Err(Error::Internal(format!("vertex {i} of {} is not exposed", body.name()))),
    }
}

/// Product vertices are certified extremal by `E_v ⊗ u + u ⊗ E_w`, which vanishes
/// on `v ⊗ w` and is positive on every other product ray. By bilinearity its value
/// on `g ⊗ h` is `E_v(g) u(h) + u(g) E_w(h) = E_v(g) + E_w(h)`, so checking the
/// factor exposers on factor rays certifies every product vertex.
pub fn min_tensor<F: Field>(a: &ConvexBody<F>, b: &ConvexBody<F>) -> Result<ProductBody<F>> {
    let check_exposers = |body: &ConvexBody<F>| -> Result<()> {
        let rays = body.rays();
        (0..body.num_vertices()).into_par_iter().try_for_each(|i| {
            let e = vertex_exposer(body, i)?;
            let exact = rays.iter().enumerate().all(|(k, r)| {
                let value = dot(&e, r);
                if k == i {
                    value.is_zero()
                } else {
                    value >= F::one()
                }
            });
            if exact {
                Ok(())
            } else {
                Err(Error::Internal(format!("exposer of vertex {i} of {} failed to verify", body.name())))
            }
        })
    };
    check_exposers(a)?;
    check_exposers(b)?;
    let mut entries: Vec<(Vec<F>, (usize, usize))> = Vec::with_capacity(a.num_vertices() * b.num_vertices());
    for i in 0..a.num_vertices() {
        for j in 0..b.num_vertices() {
            let mut ray = product_ray(a, i, b, j);
            ray.pop();
            entries.push((ray, (i, j)));
        }
    }
    entries.sort();
    let (points, provenance): (Vec<Vec<F>>, Vec<(usize, usize)>) = entries.into_iter().unzip();
    let result = ConvexBody::from_canonical(format!("{}⊠{}", a.name(), b.name()), points[0].len(), points);
    Ok(ProductBody { result, left: a.clone(), right: b.clone(), provenance })
}

impl<F: Field> ProductBody<F> {
    /// Contracts the right factor with its unit effect.
    pub fn left_marginal(&self, joint: &[F]) -> Result<Vec<F>> {
        self.result.check_cone_vector(joint)?;
        let nb = self.right.cone_dim();
        Ok((0..self.left.cone_dim()).map(|i| joint[i * nb + nb - 1].clone()).collect())
    }

    /// Contracts the left factor with its unit effect.
    pub fn right_marginal(&self, joint: &[F]) -> Result<Vec<F>> {
        self.result.check_cone_vector(joint)?;
        let na = self.left.cone_dim();
        let nb = self.right.cone_dim();
        Ok((0..nb).map(|j| joint[(na - 1) * nb + j].clone()).collect())
    }
}

#[derive(Clone, Debug)]
pub struct SumBody<F: Field> {
    pub result: ConvexBody<F>,
    pub left: ConvexBody<F>,
    pub right: ConvexBody<F>,
    /// Sends `direct_sum_embed` cone vectors `(x_A, x_B)` to cone coordinates of `result`.
    pub embedding: Matrix<F>,
}

pub fn direct_sum<F: Field>(a: &ConvexBody<F>, b: &ConvexBody<F>) -> Result<SumBody<F>> {
    let (da, db) = (a.ambient_dim(), b.ambient_dim());
    let mut points = Vec::with_capacity(a.num_vertices() + b.num_vertices());
    for v in a.vertices() {
        let mut p = v.clone();
        p.extend(std::iter::repeat_n(F::zero(), db));
        p.push(F::one());
        points.push(p);
    }
    for w in b.vertices() {
        let mut p = vec![F::zero(); da];
        p.extend(w.iter().cloned());
        p.push(F::zero());
        points.push(p);
    }
    let result = make_body(format!("{}⊕{}", a.name(), b.name()), points)?;
    // (a, a_u, b, b_u) -> (a, b, a_u, a_u + b_u)
    let n = da + db + 2;
    let mut embedding = Matrix::zeros(n, n);
    for i in 0..da {
        embedding[(i, i)] = F::one();
    }
    for j in 0..db {
        embedding[(da + j, da + 1 + j)] = F::one();
    }
    embedding[(da + db, da)] = F::one();
    embedding[(da + db + 1, da)] = F::one();
    embedding[(da + db + 1, da + db + 1)] = F::one();
    Ok(SumBody { result, left: a.clone(), right: b.clone(), embedding })
}

impl<F: Field> SumBody<F> {
    /// Cone vector of `result` for a left or right cone vector.
    pub fn embed(&self, x: &[F], side: Side) -> Result<Vec<F>> {
        let dims = (self.left.cone_dim(), self.right.cone_dim());
        self.embedding.mul_vec(&linalg::direct_sum_embed(x, side, dims)?)
    }
}

#[derive(Clone, Debug)]
pub struct Distributivity<F: Field> {
    pub lhs: ConvexBody<F>,
    pub rhs: ConvexBody<F>,
    /// Cone coordinates of `A ⊠ (B ⊕ C)` to those of `(A ⊠ B) ⊕ (A ⊠ C)`.
    pub iso: Matrix<F>,
    pub report: Report,
}

/// Builds `A ⊠ (B ⊕ C)` and `(A ⊠ B) ⊕ (A ⊠ C)` and the canonical coordinate
/// bijection between them, then checks that it is invertible and carries
/// generators onto generators.
pub fn check_distributivity<F: Field>(
    a: &ConvexBody<F>,
    b: &ConvexBody<F>,
    c: &ConvexBody<F>,
) -> Result<Distributivity<F>> {
    let bc = direct_sum(b, c)?;
    let lhs = min_tensor(a, &bc.result)?.result;
    let ab = min_tensor(a, b)?.result;
    let ac = min_tensor(a, c)?.result;
    let rhs_sum = direct_sum(&ab, &ac)?;
    let rhs = rhs_sum.result.clone();

    let (na, nb, nc) = (a.cone_dim(), b.cone_dim(), c.cone_dim());
    let n = na * (nb + nc);
    let bc_inv = bc.embedding.inverse().ok_or_else(|| Error::Internal("direct-sum embedding is singular".into()))?;
    let lift = Matrix::identity(na).kron(&bc_inv);
    // a ⊗ (b ⊕ c) -> (a ⊗ b) ⊕ (a ⊗ c)
    let mut perm = Matrix::zeros(n, n);
    for i in 0..na {
        for k in 0..nb + nc {
            let target = if k < nb { i * nb + k } else { na * nb + i * nc + (k - nb) };
            perm[(target, i * (nb + nc) + k)] = F::one();
        }
    }
    let iso = rhs_sum.embedding.mul(&perm)?.mul(&lift)?;

    let mut report = Report::new("distributivity");
    report.push(Check::new(
        "dimensions",
        lhs.cone_dim() == rhs.cone_dim() && lhs.cone_dim() == n,
        format!("cone dimensions {} and {}", lhs.cone_dim(), rhs.cone_dim()),
    ));
    report.push(Check::new("iso-invertible", iso.inverse().is_some(), "").with_witness(matrix_json(&iso)));
    let mut images: Vec<Vec<F>> = lhs.rays().iter().map(|g| iso.mul_vec(g)).collect::<Result<_>>()?;
    images.sort();
    let mut targets = rhs.rays();
    targets.sort();
    let matched = images == targets;
    let mut check = Check::new(
        "generators-match",
        matched,
        format!("{} generators on the left, {} on the right", images.len(), targets.len()),
    );
    if !matched {
        if let Some(bad) = images.iter().find(|x| targets.binary_search(x).is_err()) {
            check = check.with_witness(vector_json(bad));
        }
    }
    report.push(check);
    Ok(Distributivity { lhs, rhs, iso, report })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeparableTerm<F> {
    pub weight: F,
    pub left: Vec<F>,
    pub right: Vec<F>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SeparabilityCertificate<F> {
    Separable {
        terms: Vec<SeparableTerm<F>>,
    },
    /// Nonnegative on every product state and negative on the input.
    Entangled {
        witness: Vec<F>,
    },
}

impl<F: Field> SeparabilityCertificate<F> {
    pub fn is_separable(&self) -> bool {
        matches!(self, SeparabilityCertificate::Separable { .. })
    }

    /// Re-checks the certificate against every pair of factor vertices.
    pub fn verify(&self, a: &ConvexBody<F>, b: &ConvexBody<F>, state: &[F]) -> bool {
        match self {
            SeparabilityCertificate::Separable { terms } => {
                let mut total = vec![F::zero(); state.len()];
                let mut weight = F::zero();
                for t in terms {
                    if t.weight.is_negative()
                        || !a.contains_point(&t.left).unwrap_or(false)
                        || !b.contains_point(&t.right).unwrap_or(false)
                    {
                        return false;
                    }
                    let mut l = t.left.clone();
                    l.push(F::one());
                    let mut r = t.right.clone();
                    r.push(F::one());
                    total = linalg::add(&total, &linalg::scale(&t.weight, &linalg::tensor(&l, &r)));
                    weight = weight + t.weight.clone();
                }
                weight.is_one() && total == state
            }
            SeparabilityCertificate::Entangled { witness } => {
                witness.len() == state.len()
                    && dot(witness, state).is_negative()
                    && (0..a.num_vertices())
                        .all(|i| (0..b.num_vertices()).all(|j| !dot(witness, &product_ray(a, i, b, j)).is_negative()))
            }
        }
    }
}

/// Decides whether a normalized joint cone vector is a mixture of product states.
pub fn separability_certificate<F: Field>(
    a: &ConvexBody<F>,
    b: &ConvexBody<F>,
    state: &[F],
) -> Result<SeparabilityCertificate<F>> {
    let product = min_tensor(a, b)?;
    product.result.check_cone_vector(state)?;
    if !state.last().is_some_and(|x| x.is_one()) {
        return Err(Error::invalid("joint state is not normalized: u_A ⊗ u_B must evaluate to 1"));
    }
    let cert = match product.result.cone_member(state)? {
        MembershipCertificate::Inside { weights } => {
            let terms = weights
                .iter()
                .enumerate()
                .filter(|(_, w)| !w.is_zero())
                .map(|(k, w)| {
                    let (i, j) = product.provenance[k];
                    SeparableTerm { weight: w.clone(), left: a.vertices()[i].clone(), right: b.vertices()[j].clone() }
                })
                .collect();
            SeparabilityCertificate::Separable { terms }
        }
        MembershipCertificate::Outside { witness } => SeparabilityCertificate::Entangled { witness },
    };
    if !cert.verify(a, b, state) {
        return Err(Error::Internal("separability certificate failed to verify".into()));
    }
    Ok(cert)
}

/// The sub-body spanned by a face's vertices.
pub fn face_body<F: Field>(body: &ConvexBody<F>, face: &Face, name: impl Into<String>) -> Result<ConvexBody<F>> {
    if face.parent != body.fingerprint() {
        return Err(Error::ParentMismatch);
    }
    if face.is_empty() {
        return Err(Error::invalid("the empty face is not a body"));
    }
    make_body(name, face.vertices.iter().map(|&i| body.vertices()[i].clone()).collect())
}

/// Searches for two faces whose vertex sets partition the body's vertices and
/// whose cone spans meet only at zero.
pub fn decomposable<F: Field>(body: &ConvexBody<F>, max_faces: usize) -> Result<Option<(Face, Face)>> {
    let lattice = face_lattice(body, max_faces)?;
    let n = body.num_vertices();
    for f in &lattice.faces {
        if f.is_empty() || f.vertices.len() == n || f.vertices[0] != 0 {
            continue;
        }
        let rest: Vec<usize> = (0..n).filter(|v| !f.contains_vertex(*v)).collect();
        let Some(g) = lattice.index_of_vertices(&rest) else {
            continue;
        };
        let span_f: Vec<Vec<F>> = f.vertices.iter().map(|&i| body.ray(i)).collect();
        let span_g: Vec<Vec<F>> = rest.iter().map(|&i| body.ray(i)).collect();
        if linalg::span_intersection(&span_f, &span_g)?.is_empty() {
            return Ok(Some((f.clone(), lattice.faces[g].clone())));
        }
    }
    Ok(None)
}
