//! Built-in bodies and decoherence scenarios in frozen coordinates.
//!
//! - `simplex-N`: `{0, e_1, …, e_{N-1}}` in `R^{N-1}`; `point` is `simplex-1` in `R^0`.
//! - `gbit` (alias `square`): the unit square.
//! - `cube-d`: `{0,1}^d`; `cube` is `cube-3`.
//! - `octahedron`: `±e_i` in `R^3`.
//! - `prism`: `gbit ⊠ simplex-2`.

use crate::compose::{min_tensor, ProductBody};
use crate::convex::{make_body, ConvexBody};
use crate::decoherence::{classical_image, copy_permutations, required_permutations, DecoherenceSpec};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::maps::{basis_permutation, LinearMap};
use crate::scalar::Field;

pub const BODIES: &[&str] =
    &["point", "simplex-2", "simplex-3", "simplex-4", "simplex-5", "gbit", "cube", "octahedron", "prism"];

pub const SCENARIOS: &[&str] =
    &["classical-2", "classical-3", "gbit-midline", "gbit-edge-projection", "prism-discard", "qubit-dephasing-note"];

const QUBIT_NOTE: &str = "The qubit state space is the Bloch ball, which is not a polytope, so it has \
no exact vertex description here. Its standard decoherence is dephasing in the computational basis: \
the Bloch vector (x, y, z) goes to (0, 0, z), whose image is the segment between |0><0| and |1><1|, \
a two-vertex simplex. Quantum theory has entangled states, which is consistent with decoherence to \
a classical bit being possible only with entanglement.";

fn int_point<F: Field>(xs: &[i64]) -> Vec<F> {
    xs.iter().map(|&x| F::int(x)).collect()
}

pub fn point<F: Field>() -> ConvexBody<F> {
    make_body("point", vec![Vec::new()]).expect("a single point is a body")
}

pub fn simplex<F: Field>(n: usize) -> Result<ConvexBody<F>> {
    if n == 0 {
        return Err(Error::invalid("a simplex needs at least one vertex"));
    }
    let mut pts = vec![vec![F::zero(); n - 1]];
    for i in 0..n - 1 {
        let mut e = vec![F::zero(); n - 1];
        e[i] = F::one();
        pts.push(e);
    }
    make_body(format!("simplex-{n}"), pts)
}

pub fn gbit<F: Field>() -> ConvexBody<F> {
    make_body("gbit", [[0, 0], [0, 1], [1, 0], [1, 1]].iter().map(|p| int_point(p)).collect()).expect("square")
}

pub fn cube<F: Field>(d: usize) -> Result<ConvexBody<F>> {
    if d == 0 {
        return Err(Error::invalid("cube dimension must be at least 1"));
    }
    let pts = (0..1u64 << d)
        .map(|mask| (0..d).map(|i| if mask >> (d - 1 - i) & 1 == 1 { F::one() } else { F::zero() }).collect())
        .collect();
    make_body(if d == 3 { "cube".to_string() } else { format!("cube-{d}") }, pts)
}

pub fn octahedron<F: Field>() -> ConvexBody<F> {
    let mut pts = Vec::new();
    for i in 0..3 {
        for s in [1, -1] {
            let mut p = vec![0; 3];
            p[i] = s;
            pts.push(int_point(&p));
        }
    }
    make_body("octahedron", pts).expect("octahedron")
}

/// `a ⊠ simplex(n)`.
pub fn prism<F: Field>(a: &ConvexBody<F>, n: usize) -> Result<ProductBody<F>> {
    min_tensor(a, &simplex(n)?)
}

/// Looks up a body by catalog name.
pub fn body<F: Field>(name: &str) -> Result<ConvexBody<F>> {
    let suffix = |prefix: &str| name.strip_prefix(prefix).and_then(|s| s.parse::<usize>().ok());
    match name {
        "point" => Ok(point()),
        "gbit" | "square" => Ok(gbit()),
        "cube" => cube(3),
        "octahedron" => Ok(octahedron()),
        "prism" => Ok(prism(&gbit(), 2)?.result.renamed("prism")),
        _ => {
            if let Some(n) = suffix("simplex-").filter(|&n| n > 0) {
                simplex(n)
            } else if let Some(d) = suffix("cube-").filter(|&d| d > 0) {
                cube(d)
            } else {
                Err(Error::UnknownCatalogEntry(name.to_string()))
            }
        }
    }
}

/// Permutation of a simplex's vertices in canonical order: vertex `i` goes to vertex `perm[i]`.
pub fn simplex_permutation<F: Field>(body: &ConvexBody<F>, perm: &[usize]) -> Result<LinearMap<F>> {
    basis_permutation(body, &body.rays(), perm)
}

#[derive(Clone, Debug)]
pub enum Scenario<F: Field> {
    Theory(Box<DecoherenceSpec<F>>),
    /// Documentation only; the system has no exact polytope description.
    Note(String),
}

pub fn scenario<F: Field>(name: &str) -> Result<Scenario<F>> {
    let spec = match name {
        "gbit-midline" => square_scenario(F::ratio(1, 2))?,
        "gbit-edge-projection" => square_scenario(F::zero())?,
        "prism-discard" => {
            let centre = vec![F::ratio(1, 2), F::ratio(1, 2)];
            let spec = prism_discard(&gbit(), 2, &centre)?;
            let body = spec.system.renamed("prism");
            rename_system(spec, body)?
        }
        "qubit-dephasing-note" => return Ok(Scenario::Note(QUBIT_NOTE.to_string())),
        _ => match name.strip_prefix("classical-").and_then(|s| s.parse::<usize>().ok()).filter(|&n| n > 0) {
            Some(n) => classical(n)?,
            None => return Err(Error::UnknownCatalogEntry(name.to_string())),
        },
    };
    Ok(Scenario::Theory(Box::new(spec)))
}

/// Square with `D(x, y) = (x, height)` and the left-right reflection as the flip lift.
fn square_scenario<F: Field>(height: F) -> Result<DecoherenceSpec<F>> {
    let sq = gbit();
    let keep_x = Matrix::from_rows(vec![int_point(&[1, 0]), int_point(&[0, 0])], 2)?;
    let d = LinearMap::affine(sq.clone(), sq.clone(), &keep_x, &[F::zero(), height])?;
    let flip = Matrix::from_rows(vec![int_point(&[-1, 0]), int_point(&[0, 1])], 2)?;
    let reflection = LinearMap::affine(sq.clone(), sq.clone(), &flip, &[F::one(), F::zero()])?;
    Ok(DecoherenceSpec::new(sq, d)?.with_lift(vec![1, 0], reflection))
}

/// `simplex(n)` with identity decoherence, permutation lifts and copy-style bipartite lifts.
pub fn classical<F: Field>(n: usize) -> Result<DecoherenceSpec<F>> {
    let body = simplex(n)?;
    let mut spec = DecoherenceSpec::new(body.clone(), LinearMap::identity(&body))?;
    for perm in required_permutations(n) {
        let lift = simplex_permutation(&body, &perm)?;
        spec.lifts.insert(perm, lift);
    }
    let product = min_tensor(&body, &body)?.result;
    let mut labels = Vec::with_capacity(n * n);
    for k in 0..n {
        for i in 0..n {
            labels.push(linalg::tensor(&body.ray(k), &body.ray(i)));
        }
    }
    for perm in copy_permutations(n) {
        let lift = basis_permutation(&product, &labels, &perm)?;
        spec.bipartite_lifts.insert(perm, lift);
    }
    Ok(spec)
}

fn rename_system<F: Field>(spec: DecoherenceSpec<F>, body: ConvexBody<F>) -> Result<DecoherenceSpec<F>> {
    let rebind = |m: &LinearMap<F>| LinearMap::new(body.clone(), body.clone(), m.matrix.clone());
    let mut out = DecoherenceSpec::new(body.clone(), rebind(&spec.decoherence)?)?;
    for (perm, lift) in &spec.lifts {
        out.lifts.insert(perm.clone(), rebind(lift)?);
    }
    let composite = min_tensor(&body, &body)?.result;
    for (perm, lift) in &spec.bipartite_lifts {
        out.bipartite_lifts
            .insert(perm.clone(), LinearMap::new(composite.clone(), composite.clone(), lift.matrix.clone())?);
    }
    Ok(out)
}

/// Permutation matrix on `R^n` sending basis vector `i` to `perm[i]`.
fn permutation_matrix<F: Field>(perm: &[usize]) -> Matrix<F> {
    let mut m = Matrix::zeros(perm.len(), perm.len());
    for (i, &p) in perm.iter().enumerate() {
        m[(p, i)] = F::one();
    }
    m
}

/// `a ⊠ simplex(n)` decohering by discarding `a` and preparing `x`: `D = (x ∘ u) ⊗ id`.
/// Lifts permute the simplex factor; bipartite lifts do so on both simplex factors
/// of the composite after regrouping `A ⊗ Δ ⊗ A ⊗ Δ` as `A ⊗ A ⊗ Δ ⊗ Δ`.
pub fn prism_discard<F: Field>(a: &ConvexBody<F>, n: usize, x: &[F]) -> Result<DecoherenceSpec<F>> {
    if !a.contains_point(x)? {
        return Err(Error::NotMember { body: a.name().to_string() });
    }
    let delta = simplex::<F>(n)?;
    let body = min_tensor(a, &delta)?.result;
    let (ka, kd) = (a.cone_dim(), delta.cone_dim());
    let xr = a.lift_point(x)?;
    let mut discard = Matrix::zeros(ka, ka);
    for i in 0..ka {
        discard[(i, ka - 1)] = xr[i].clone();
    }
    let d = LinearMap::new(body.clone(), body.clone(), discard.kron(&Matrix::identity(kd)))?;
    let mut spec = DecoherenceSpec::new(body.clone(), d)?;

    // sigma[k]: simplex vertex carried by classical state s_k = x ⊗ δ_sigma[k].
    let image = classical_image(&spec)?
        .1
        .ok_or_else(|| Error::Internal("discard decoherence image is not a simplex".into()))?;
    let sigma: Vec<usize> = (0..image.n())
        .map(|k| {
            (0..n)
                .find(|&j| linalg::tensor(&xr, &delta.ray(j)) == image.ray(k))
                .ok_or_else(|| Error::Internal("classical state is not x ⊗ δ".into()))
        })
        .collect::<Result<_>>()?;
    let mut sigma_inv = vec![0; n];
    for (k, &j) in sigma.iter().enumerate() {
        sigma_inv[j] = k;
    }
    let delta_rays = delta.rays();
    let simplex_map = |rho: &[usize]| -> Result<Matrix<F>> { Ok(basis_permutation(&delta, &delta_rays, rho)?.matrix) };

    for perm in required_permutations(n) {
        let rho: Vec<usize> = (0..n).map(|j| sigma[perm[sigma_inv[j]]]).collect();
        let lift = LinearMap::new(body.clone(), body.clone(), Matrix::identity(ka).kron(&simplex_map(&rho)?))?;
        spec.lifts.insert(perm, lift);
    }

    let composite = min_tensor(&body, &body)?.result;
    // Regroup (a1, c1, a2, c2) -> (a1, a2, c1, c2).
    let dim = ka * kd * ka * kd;
    let mut regroup = vec![0; dim];
    for a1 in 0..ka {
        for c1 in 0..kd {
            for a2 in 0..ka {
                for c2 in 0..kd {
                    let from = ((a1 * kd + c1) * ka + a2) * kd + c2;
                    regroup[from] = ((a1 * ka + a2) * kd + c1) * kd + c2;
                }
            }
        }
    }
    let q = permutation_matrix::<F>(&regroup);
    let q_inv = q.transpose();
    let pair_rays: Vec<Vec<F>> = (0..n * n).map(|p| linalg::tensor(&delta.ray(p / n), &delta.ray(p % n))).collect();
    let pair_space = min_tensor(&delta, &delta)?.result;
    for perm in copy_permutations(n) {
        // Label k·n + i is s_k ⊗ s_i = x ⊗ δ_sigma[k] ⊗ x ⊗ δ_sigma[i].
        let mut rho = vec![0; n * n];
        for k in 0..n {
            for i in 0..n {
                let target = perm[k * n + i];
                rho[sigma[k] * n + sigma[i]] = sigma[target / n] * n + sigma[target % n];
            }
        }
        let p_cs = basis_permutation(&pair_space, &pair_rays, &rho)?.matrix;
        let matrix = q_inv.mul(&Matrix::identity(ka * ka).kron(&p_cs))?.mul(&q)?;
        spec.bipartite_lifts.insert(perm, LinearMap::new(composite.clone(), composite.clone(), matrix)?);
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::simplex_recognize;
    use crate::scalar::BigRational as Q;

    #[test]
    fn shapes() {
        assert_eq!(simplex::<Q>(3).unwrap().num_vertices(), 3);
        assert_eq!(simplex::<Q>(1).unwrap().ambient_dim(), 0);
        assert!(simplex::<Q>(0).is_err());
        assert_eq!(gbit::<Q>().num_vertices(), 4);
        assert_eq!(cube::<Q>(3).unwrap().num_vertices(), 8);
        assert_eq!(octahedron::<Q>().num_vertices(), 6);
        assert_eq!(prism(&gbit::<Q>(), 2).unwrap().result.num_vertices(), 8);
        assert!(simplex_recognize(&simplex::<Q>(4).unwrap()).is_some());
    }

    #[test]
    fn lookup() {
        for name in BODIES {
            assert!(body::<Q>(name).is_ok(), "{name}");
        }
        assert_eq!(body::<Q>("cube-2").unwrap().num_vertices(), 4);
        assert!(matches!(body::<Q>("dodecahedron"), Err(Error::UnknownCatalogEntry(_))));
        for name in SCENARIOS {
            assert!(scenario::<Q>(name).is_ok(), "{name}");
        }
        assert!(scenario::<Q>("classical-0").is_err());
    }

    #[test]
    fn octahedron_facets() {
        assert_eq!(octahedron::<Q>().hrep().facets.len(), 8);
    }
}
