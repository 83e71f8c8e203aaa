//! Axioms for a decoherence map and the conditions for decohering to a
//! classical simplex.
//!
//! Permutations are label arrays: `perm[i] = j` sends the classical state
//! `s_i` to `s_j`. Lifts are checked against the reading `T ∘ D = π̂ ∘ D`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde_json::json;

use crate::compose::{min_tensor, ProductBody};
use crate::convex::{make_body, simplex_recognize, ConvexBody};
use crate::error::{Error, Result};
use crate::face::{face_lattice, refines, refines_by_mixture, Face, FaceLattice};
use crate::linalg::{self, dot, Matrix};
use crate::lp::{Outcome, Problem, Sense, VarKind};
use crate::maps::{is_permutation, is_reversible, is_valid_transformation, LinearMap, Normalization};
use crate::report::{vector_json, vectors_json, Check, Report};
use crate::scalar::Field;

/// Effects a theory allows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EffectCone<F> {
    /// Every covector between 0 and u on the cone.
    Unrestricted,
    /// Nonnegative combinations of these covectors (still required to be valid effects).
    Declared(Vec<Vec<F>>),
}

pub type Lifts<F> = BTreeMap<Vec<usize>, LinearMap<F>>;

#[derive(Clone, Debug)]
pub struct DecoherenceSpec<F: Field> {
    pub system: ConvexBody<F>,
    pub decoherence: LinearMap<F>,
    /// Optional order of the classical states (body points); lexicographic otherwise.
    pub labels: Option<Vec<Vec<F>>>,
    pub effect_cone: EffectCone<F>,
    pub lifts: Lifts<F>,
    pub bipartite_lifts: Lifts<F>,
}

impl<F: Field> DecoherenceSpec<F> {
    pub fn new(system: ConvexBody<F>, decoherence: LinearMap<F>) -> Result<Self> {
        if decoherence.source != system || decoherence.target != system {
            return Err(Error::invalid("decoherence must be an endomorphism of the system"));
        }
        Ok(DecoherenceSpec {
            system,
            decoherence,
            labels: None,
            effect_cone: EffectCone::Unrestricted,
            lifts: Lifts::new(),
            bipartite_lifts: Lifts::new(),
        })
    }

    pub fn with_lift(mut self, perm: Vec<usize>, map: LinearMap<F>) -> Self {
        self.lifts.insert(perm, map);
        self
    }

    fn decohered_rays(&self) -> Result<Vec<Vec<F>>> {
        self.system.rays().iter().map(|g| self.decoherence.matrix.mul_vec(g)).collect()
    }
}

/// How to decide the purity-decreasing axiom.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PurityMethod {
    /// Exhaustive relative-interior LPs over every face and each of its covers.
    #[default]
    FacePairs,
    /// `refines(v, D v)` on every vertex; exact for valid idempotent maps.
    Vertices,
}

/// A state `ρ` whose image refines it without being refined by it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PurityWitness<F> {
    pub rho: Vec<F>,
    pub image: Vec<F>,
    /// Minimal face of `ρ` and the cover of it containing the image, when known.
    pub faces: Option<(Face, Face)>,
}

impl<F: Field> PurityWitness<F> {
    /// `D ρ ≻ ρ` and not `ρ ≻ D ρ`, decided by the mixture LP.
    pub fn verify(&self, body: &ConvexBody<F>) -> Result<bool> {
        Ok(refines_by_mixture(body, &self.image, &self.rho)? && !refines_by_mixture(body, &self.rho, &self.image)?)
    }

    fn json(&self) -> serde_json::Value {
        let mut w = json!({ "rho": vector_json(&self.rho), "image": vector_json(&self.image) });
        if let Some((g, h)) = &self.faces {
            w["g"] = json!(g);
            w["h"] = json!(h);
        }
        w
    }
}

#[derive(Clone, Debug)]
pub struct AxiomReport<F> {
    pub report: Report,
    pub purity_witness: Option<PurityWitness<F>>,
}

fn summarize(name: &str, report: Report) -> Check {
    match report.failures().next() {
        None => Check::pass(name, ""),
        Some(c) => {
            let mut out = Check::fail(name, format!("{}: {}", c.name, c.detail));
            out.witness = c.witness.clone();
            out
        }
    }
}

/// `D` maps states to states and preserves normalization.
pub fn check_physicality<F: Field>(spec: &DecoherenceSpec<F>) -> Result<Check> {
    Ok(summarize("physicality", is_valid_transformation(&spec.decoherence, Normalization::Preserving)?))
}

/// `D ∘ D = D` on every generator.
pub fn check_idempotence<F: Field>(spec: &DecoherenceSpec<F>) -> Result<Check> {
    idempotence_of(&spec.system, &spec.decoherence.matrix)
}

fn idempotence_of<F: Field>(body: &ConvexBody<F>, d: &Matrix<F>) -> Result<Check> {
    for (i, g) in body.rays().iter().enumerate() {
        let once = d.mul_vec(g)?;
        let twice = d.mul_vec(&once)?;
        if once != twice {
            return Ok(Check::fail("idempotence", format!("D(D(v)) ≠ D(v) at vertex {i}"))
                .with_witness(json!({ "vertex": i, "once": vector_json(&once), "twice": vector_json(&twice) })));
        }
    }
    Ok(Check::pass("idempotence", ""))
}

fn point_of<F: Field>(cone: &[F]) -> Vec<F> {
    cone[..cone.len() - 1].to_vec()
}

/// Relative-interior LP for one face pair: maximize the slack `t` of `ρ` on
/// every facet not tight on `g`, subject to `D ρ` lying on every facet of `h`.
fn face_pair_violation<F: Field>(
    spec: &DecoherenceSpec<F>,
    decohered: &[Vec<F>],
    g: &Face,
    h: &Face,
) -> Result<Option<PurityWitness<F>>> {
    let body = &spec.system;
    let hrep = body.hrep();
    let mut lp = Problem::new();
    let mu = lp.add_vars(g.vertices.len(), VarKind::NonNeg);
    let t = lp.add_var(VarKind::NonNeg);
    lp.constrain_sparse(&mu.clone().map(|k| (k, F::one())).collect::<Vec<_>>(), Sense::Eq, F::one());
    lp.constrain_sparse(&[(t, F::one())], Sense::Le, F::one());
    for j in (0..hrep.facets.len()).filter(|j| g.tight.binary_search(j).is_err()) {
        let mut terms: Vec<(usize, F)> =
            g.vertices.iter().enumerate().map(|(k, &v)| (k, dot(&hrep.facets[j], &body.ray(v)))).collect();
        terms.push((t, -F::one()));
        lp.constrain_sparse(&terms, Sense::Ge, F::zero());
    }
    for &j in &h.tight {
        let terms: Vec<(usize, F)> =
            g.vertices.iter().enumerate().map(|(k, &v)| (k, dot(&hrep.facets[j], &decohered[v]))).collect();
        lp.constrain_sparse(&terms, Sense::Eq, F::zero());
    }
    let mut objective = vec![F::zero(); lp.num_vars()];
    objective[t] = F::one();
    lp.maximize(objective);
    match lp.solve()? {
        Outcome::Optimal { x, value } if value.is_positive() => {
            let weights = &x[..g.vertices.len()];
            let rays: Vec<Vec<F>> = g.vertices.iter().map(|&v| body.ray(v)).collect();
            let images: Vec<Vec<F>> = g.vertices.iter().map(|&v| decohered[v].clone()).collect();
            let rho = linalg::combination(weights, &rays, body.cone_dim());
            let image = linalg::combination(weights, &images, body.cone_dim());
            Ok(Some(PurityWitness {
                rho: point_of(&rho),
                image: point_of(&image),
                faces: Some((g.clone(), h.clone())),
            }))
        }
        Outcome::Optimal { .. } | Outcome::Infeasible => Ok(None),
        Outcome::Unbounded => Err(Error::Internal("bounded purity LP reported unbounded".into())),
    }
}

/// Face-pair decision: faces in descending dimension, each against its
/// nonempty covers. The first violating pair in that order is returned.
pub fn purity_by_face_pairs<F: Field>(
    spec: &DecoherenceSpec<F>,
    lattice: &FaceLattice<F>,
) -> Result<Option<PurityWitness<F>>> {
    if *lattice.body() != spec.system {
        return Err(Error::ParentMismatch);
    }
    let decohered = spec.decohered_rays()?;
    let pairs: Vec<(usize, usize)> = (0..lattice.len())
        .rev()
        .flat_map(|g| lattice.covers[g].iter().map(move |&h| (g, h)))
        .filter(|&(_, h)| !lattice.faces[h].is_empty())
        .collect();
    pairs
        .par_iter()
        .map(|&(g, h)| face_pair_violation(spec, &decohered, &lattice.faces[g], &lattice.faces[h]))
        .find_map_first(|r| r.transpose())
        .transpose()
}

/// Vertex criterion: for valid idempotent `D` a violation exists iff some vertex
/// `v` fails `v ≻ D v`, and then `ρ = (v + D v)/2` violates the axiom.
pub fn purity_by_vertices<F: Field>(body: &ConvexBody<F>, d: &Matrix<F>) -> Result<Option<PurityWitness<F>>> {
    let half = F::ratio(1, 2);
    (0..body.num_vertices())
        .into_par_iter()
        .map(|i| {
            let v = body.vertices()[i].clone();
            let dv = point_of(&d.mul_vec(&body.ray(i))?);
            if refines_by_mixture(body, &v, &dv)? {
                return Ok(None);
            }
            let rho: Vec<F> = v.iter().zip(&dv).map(|(a, b)| (a.clone() + b.clone()) * half.clone()).collect();
            let image = point_of(&d.mul_vec(&body.lift_point(&rho)?)?);
            Ok(Some(PurityWitness { rho, image, faces: None }))
        })
        .find_map_first(|r: Result<Option<PurityWitness<F>>>| r.transpose())
        .transpose()
}

fn purity_check<F: Field>(witness: &Option<PurityWitness<F>>) -> Check {
    match witness {
        None => Check::pass("purity-decreasing", ""),
        Some(w) => {
            Check::fail("purity-decreasing", "a state is strictly purified by decoherence").with_witness(w.json())
        }
    }
}

/// Physicality, idempotence and purity-decreasing. Purity runs only once physicality holds.
pub fn check_axioms<F: Field>(
    spec: &DecoherenceSpec<F>,
    method: PurityMethod,
    max_faces: usize,
) -> Result<AxiomReport<F>> {
    let mut report = Report::new("decoherence");
    let physical = check_physicality(spec)?;
    let physical_ok = physical.passed;
    report.push(physical);
    let idempotent = check_idempotence(spec)?;
    let idempotent_ok = idempotent.passed;
    report.push(idempotent);
    if !physical_ok {
        report.push(Check::fail("purity-decreasing", "not run: physicality failed"));
        return Ok(AxiomReport { report, purity_witness: None });
    }
    let witness = match method {
        PurityMethod::FacePairs => purity_by_face_pairs(spec, &face_lattice(&spec.system, max_faces)?)?,
        PurityMethod::Vertices if idempotent_ok => purity_by_vertices(&spec.system, &spec.decoherence.matrix)?,
        PurityMethod::Vertices => {
            report.push(Check::fail("purity-decreasing", "not run: vertex criterion needs idempotence"));
            return Ok(AxiomReport { report, purity_witness: None });
        }
    };
    report.push(purity_check(&witness));
    Ok(AxiomReport { report, purity_witness: witness })
}

/// The decohered state space, recognized as a simplex with labeled vertices.
#[derive(Clone, Debug)]
pub struct ClassicalImage<F: Field> {
    pub body: ConvexBody<F>,
    /// Classical pure states `s_i` in system body coordinates, in label order.
    pub states: Vec<Vec<F>>,
    basis: Matrix<F>,
}

impl<F: Field> ClassicalImage<F> {
    pub fn n(&self) -> usize {
        self.states.len()
    }

    pub fn ray(&self, i: usize) -> Vec<F> {
        let mut r = self.states[i].clone();
        r.push(F::one());
        r
    }

    pub fn rays(&self) -> Vec<Vec<F>> {
        (0..self.n()).map(|i| self.ray(i)).collect()
    }

    /// Coefficients of a cone vector in the basis `s_i`, or an error if it is outside their span.
    pub fn coordinates(&self, x: &[F]) -> Result<Vec<F>> {
        linalg::solve_linear(&self.basis, x)?
            .map(|s| s.x)
            .ok_or_else(|| Error::Precondition("vector is outside the span of the classical states".into()))
    }

    /// `π̂(x)`: relabels the coordinates of `x` along `perm`.
    pub fn permute(&self, perm: &[usize], x: &[F]) -> Result<Vec<F>> {
        let c = self.coordinates(x)?;
        let mut out = vec![F::zero(); x.len()];
        for (i, ci) in c.iter().enumerate() {
            out = linalg::add(&out, &linalg::scale(ci, &self.ray(perm[i])));
        }
        Ok(out)
    }
}

fn image_from_states<F: Field>(name: &str, states: Vec<Vec<F>>) -> Result<ClassicalImage<F>> {
    let body = make_body(name, states.clone())?;
    let dim = body.cone_dim();
    let rays: Vec<Vec<F>> = states
        .iter()
        .map(|s| {
            let mut r = s.clone();
            r.push(F::one());
            r
        })
        .collect();
    Ok(ClassicalImage { body, states, basis: Matrix::from_columns(&rays, dim)? })
}

/// Image of the state space under `D`; fails with an affine dependence when not a simplex.
pub fn classical_image<F: Field>(spec: &DecoherenceSpec<F>) -> Result<(Check, Option<ClassicalImage<F>>)> {
    let points: Vec<Vec<F>> = spec.decohered_rays()?.iter().map(|r| point_of(r)).collect();
    let body = make_body(format!("D({})", spec.system.name()), points)?;
    if simplex_recognize(&body).is_none() {
        let rays = Matrix::from_columns(&body.rays(), body.cone_dim())?;
        let dependence = rays.kernel().into_iter().next().unwrap_or_default();
        return Ok((
            Check::fail("classical-image", format!("image has {} affinely dependent vertices", body.num_vertices()))
                .with_witness(
                    json!({ "vertices": vectors_json(body.vertices()), "dependence": vector_json(&dependence) }),
                ),
            None,
        ));
    }
    let states = match &spec.labels {
        None => body.vertices().to_vec(),
        Some(labels) => {
            let mut sorted = labels.clone();
            sorted.sort();
            if sorted != body.vertices() {
                return Ok((
                    Check::fail("classical-image", "declared labels are not the image vertices")
                        .with_witness(json!({ "vertices": vectors_json(body.vertices()) })),
                    None,
                ));
            }
            labels.clone()
        }
    };
    let image = image_from_states(body.name(), states)?;
    let check = Check::pass("classical-image", format!("simplex with {} vertices", image.n()))
        .with_witness(json!({ "states": vectors_json(&image.states) }));
    Ok((check, Some(image)))
}

/// A lifted classical effect `e` and its pullback `e ∘ D`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftedEffect<F> {
    pub target: String,
    pub effect: Vec<F>,
    pub pullback: Vec<F>,
}

/// For every classical indicator and for `u`, finds an allowed effect `e` with
/// `e ∘ D = β ∘ D`. Indicators generate the classical effect cone, so this covers
/// every classical effect.
pub fn check_effect_lifting<F: Field>(
    spec: &DecoherenceSpec<F>,
    image: &ClassicalImage<F>,
) -> Result<(Report, Vec<LiftedEffect<F>>)> {
    let body = &spec.system;
    let d = body.cone_dim();
    let gens = body.rays();
    let decohered = spec.decohered_rays()?;
    let coords: Vec<Vec<F>> = decohered.iter().map(|x| image.coordinates(x)).collect::<Result<_>>()?;
    let mut targets: Vec<(String, Vec<F>)> =
        (0..image.n()).map(|i| (format!("indicator-{i}"), coords.iter().map(|c| c[i].clone()).collect())).collect();
    targets.push(("unit".to_string(), decohered.iter().map(|x| x[d - 1].clone()).collect()));

    // Covectors the search ranges over, as columns of `e = basis · μ`.
    let (basis, kind): (Vec<Vec<F>>, VarKind) = match &spec.effect_cone {
        EffectCone::Unrestricted => (
            (0..d).map(|i| (0..d).map(|j| if i == j { F::one() } else { F::zero() }).collect()).collect(),
            VarKind::Free,
        ),
        EffectCone::Declared(cs) => (cs.clone(), VarKind::NonNeg),
    };
    let mut report = Report::new("effect-lifting");
    let mut lifted = Vec::new();
    for (name, values) in targets {
        let mut lp = Problem::new();
        lp.add_vars(basis.len(), kind);
        for ((g, dg), value) in gens.iter().zip(&decohered).zip(&values) {
            lp.constrain(basis.iter().map(|c| dot(c, dg)).collect(), Sense::Eq, value.clone());
            let on_g: Vec<F> = basis.iter().map(|c| dot(c, g)).collect();
            lp.constrain(on_g.clone(), Sense::Ge, F::zero());
            lp.constrain(on_g, Sense::Le, g[d - 1].clone());
        }
        match lp.solve()? {
            Outcome::Optimal { x, .. } => {
                let effect = linalg::combination(&x, &basis, d);
                let pullback = spec.decoherence.matrix.covector_mul(&effect)?;
                report.push(Check::pass(format!("lift.{name}"), "").with_witness(json!({
                    "effect": vector_json(&effect),
                    "pullback": vector_json(&pullback),
                })));
                lifted.push(LiftedEffect { target: name, effect, pullback });
            }
            _ => report.push(Check::fail(format!("lift.{name}"), "no allowed effect reproduces it")),
        }
    }
    Ok((report, lifted))
}

/// Generators of the symmetric group on `n` labels: a transposition and an `n`-cycle.
pub fn required_permutations(n: usize) -> Vec<Vec<usize>> {
    if n < 2 {
        return Vec::new();
    }
    let mut swap: Vec<usize> = (0..n).collect();
    swap.swap(0, 1);
    let cycle: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
    let mut out = vec![swap, cycle];
    out.dedup();
    out
}

fn check_lift<F: Field>(
    body: &ConvexBody<F>,
    image: &ClassicalImage<F>,
    perm: &[usize],
    lift: &LinearMap<F>,
) -> Result<Check> {
    let name = format!("lift.{perm:?}");
    if perm.len() != image.n() || !is_permutation(perm) {
        return Ok(Check::fail(name, format!("not a permutation of {} labels", image.n())));
    }
    if lift.source != *body || lift.target != *body {
        return Ok(Check::fail(name, "lift does not act on the system"));
    }
    let rev = is_reversible(lift)?;
    if !rev.passed {
        let mut c = summarize(&name, rev);
        c.detail = format!("not reversible: {}", c.detail);
        return Ok(c);
    }
    // The classical states are among the `D g` and span them, so comparing there decides T∘D = π̂∘D.
    for (k, &pk) in perm.iter().enumerate() {
        let lhs = lift.matrix.mul_vec(&image.ray(k))?;
        let rhs = image.ray(pk);
        if lhs != rhs {
            return Ok(Check::fail(name, format!("T∘D and π∘D differ on classical state {k}"))
                .with_witness(json!({ "state": k, "lifted": vector_json(&lhs), "classical": vector_json(&rhs) })));
        }
    }
    Ok(Check::pass(name, ""))
}

/// Checks required generator lifts (missing ones fail) and any extra supplied lifts.
pub fn check_transformation_lifting<F: Field>(spec: &DecoherenceSpec<F>, image: &ClassicalImage<F>) -> Result<Report> {
    lift_report("transformation-lifting", &spec.system, image, &required_permutations(image.n()), &spec.lifts)
}

fn lift_report<F: Field>(
    title: &str,
    body: &ConvexBody<F>,
    image: &ClassicalImage<F>,
    required: &[Vec<usize>],
    lifts: &Lifts<F>,
) -> Result<Report> {
    let mut report = Report::new(title);
    for perm in required {
        if !lifts.contains_key(perm) {
            report.push(Check::fail(format!("lift.{perm:?}"), "required lift missing"));
        }
    }
    let checks: Vec<Check> =
        lifts.par_iter().map(|(perm, lift)| check_lift(body, image, perm, lift)).collect::<Result<_>>()?;
    for c in checks {
        report.push(c);
    }
    Ok(report)
}

/// Copy-style permutations of `Δ_N ⊠ Δ_N` with label `k·N + i` for `s_k ⊗ s_i`:
/// for each `j ≥ 1`, swap `s_0 ⊗ s_j` with `s_j ⊗ s_j`.
pub fn copy_permutations(n: usize) -> Vec<Vec<usize>> {
    (1..n)
        .map(|j| {
            let mut p: Vec<usize> = (0..n * n).collect();
            p.swap(j, j * n + j);
            p
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct CompositeReport<F: Field> {
    pub report: Report,
    pub product: ProductBody<F>,
    pub decoherence: LinearMap<F>,
    /// Classical states of the composite, label `k·M + i` for `s_k ⊗ s_i`.
    pub image: Option<ClassicalImage<F>>,
}

/// The axioms for `D_A ⊗ D_B` on `A ⊠ B` read off the factors. On product rays
/// `(D_A ⊗ D_B)(g ⊗ h) = D_A g ⊗ D_B h`, so factor membership certificates multiply
/// and idempotence holds iff it holds on both sides. The minimal face of `a ⊗ b` is
/// `F(a) × F(b)`, so `v ⊗ w ≻ D(v ⊗ w)` iff `v ≻ D_A v` and `w ≻ D_B w`.
/// `None` when a factor is not physical or not idempotent; the direct checks then
/// supply composite witnesses.
fn product_axioms<F: Field>(
    a: &DecoherenceSpec<F>,
    b: &DecoherenceSpec<F>,
    product: &ProductBody<F>,
    images: &[Vec<F>],
) -> Result<Option<[Check; 3]>> {
    let factor_ok = |spec: &DecoherenceSpec<F>| -> Result<bool> {
        let body = &spec.system;
        let gens = body.rays();
        let decohered = spec.decohered_rays()?;
        for dg in &decohered {
            if dg[dg.len() - 1] != F::one() {
                return Ok(false);
            }
            let cert = body.cone_member(dg)?;
            if !cert.is_inside() || !cert.verify(&gens, dg) {
                return Ok(false);
            }
            if spec.decoherence.matrix.mul_vec(dg)? != *dg {
                return Ok(false);
            }
        }
        Ok(true)
    };
    if !factor_ok(a)? || !factor_ok(b)? {
        return Ok(None);
    }
    let purified = |spec: &DecoherenceSpec<F>| -> Result<Vec<bool>> {
        let body = &spec.system;
        let decohered = spec.decohered_rays()?;
        (0..body.num_vertices())
            .into_par_iter()
            .map(|i| refines_by_mixture(body, &body.vertices()[i], &point_of(&decohered[i])).map(|ok| !ok))
            .collect()
    };
    let (pa, pb) = (purified(a)?, purified(b)?);
    let body = &product.result;
    let purity = match product.provenance.iter().position(|&(i, j)| pa[i] || pb[j]) {
        None => purity_check::<F>(&None),
        Some(k) => {
            let half = F::ratio(1, 2);
            let v = &body.vertices()[k];
            let dv = point_of(&images[k]);
            let rho: Vec<F> = v.iter().zip(&dv).map(|(x, y)| (x.clone() + y.clone()) * half.clone()).collect();
            // D is idempotent, so D ρ = D v.
            purity_check(&Some(PurityWitness { rho, image: dv, faces: None }))
        }
    };
    Ok(Some([Check::pass("physicality", ""), Check::pass("idempotence", ""), purity]))
}

/// Re-runs the axioms and the image check on `A ⊠ B` under `D_A ⊗ D_B` and checks the
/// bipartite lifts. When both sides share a classical dimension the copy-style
/// permutations are required.
pub fn check_composite<F: Field>(
    a: &DecoherenceSpec<F>,
    b: &DecoherenceSpec<F>,
    bipartite_lifts: &Lifts<F>,
) -> Result<CompositeReport<F>> {
    let product = min_tensor(&a.system, &b.system)?;
    let body = product.result.clone();
    let d = a.decoherence.matrix.kron(&b.decoherence.matrix);
    let decoherence = LinearMap::new(body.clone(), body.clone(), d.clone())?;
    let mut report = Report::new("composite");
    let (Some(ia), Some(ib)) = (classical_image(a)?.1, classical_image(b)?.1) else {
        report.push(Check::fail("factors", "a factor has no classical image"));
        return Ok(CompositeReport { report, product, decoherence, image: None });
    };

    let images: Vec<Vec<F>> = {
        let (da, db) = (a.decohered_rays()?, b.decohered_rays()?);
        product.provenance.iter().map(|&(i, j)| linalg::tensor(&da[i], &db[j])).collect()
    };
    let axioms = match product_axioms(a, b, &product, &images)? {
        Some(checks) => checks,
        None => {
            let physical = summarize("physicality", is_valid_transformation(&decoherence, Normalization::Preserving)?);
            let idem = idempotence_of(&body, &d)?;
            let purity = if physical.passed && idem.passed {
                purity_check(&purity_by_vertices(&body, &d)?)
            } else {
                Check::fail("purity-decreasing", "not run: physicality or idempotence failed")
            };
            [physical, idem, purity]
        }
    };
    for c in axioms {
        report.push(c);
    }

    let (n, m) = (ia.n(), ib.n());
    let mut states = Vec::with_capacity(n * m);
    for k in 0..n {
        for i in 0..m {
            states.push(point_of(&linalg::tensor(&ia.ray(k), &ib.ray(i))));
        }
    }
    let decohered: Vec<Vec<F>> = images.iter().map(|x| point_of(x)).collect();
    let image_body = make_body("image", decohered)?;
    let mut sorted = states.clone();
    sorted.sort();
    let simplex =
        simplex_recognize(&image_body).is_some_and(|s| s.n == n * m) && sorted.as_slice() == image_body.vertices();
    report.push(Check::new("classical-image", simplex, format!("expected a simplex with {} vertices", n * m)));
    if !simplex {
        return Ok(CompositeReport { report, product, decoherence, image: None });
    }
    let image = image_from_states(image_body.name(), states)?;
    let required = if n == m { copy_permutations(n) } else { Vec::new() };
    report.extend(lift_report("bipartite-lifting", &body, &image, &required, bipartite_lifts)?);
    Ok(CompositeReport { report, product, decoherence, image: Some(image) })
}

/// `refines`-based spot test of one state, used as an oracle for the purity procedures.
pub fn violates_purity_at<F: Field>(spec: &DecoherenceSpec<F>, rho: &[F]) -> Result<bool> {
    let image = spec.decoherence.apply(rho)?;
    Ok(refines(&spec.system, &image, rho)? && !refines(&spec.system, rho, &image)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{self, Scenario};
    use crate::Rational;

    type Q = Rational;

    fn theory(name: &str) -> DecoherenceSpec<Q> {
        match catalog::scenario(name).unwrap() {
            Scenario::Theory(spec) => *spec,
            Scenario::Note(_) => panic!("{name} is a note"),
        }
    }

    /// Square discarded to its corner `(0, 0)`: physical and idempotent but purifying.
    fn corner_discard() -> DecoherenceSpec<Q> {
        let sq: ConvexBody<Q> = catalog::gbit();
        let zero = Matrix::zeros(2, 2);
        let d = LinearMap::affine(sq.clone(), sq.clone(), &zero, &[Q::int(0), Q::int(0)]).unwrap();
        DecoherenceSpec::new(sq, d).unwrap()
    }

    #[test]
    fn factorized_axioms_match_direct_checks() {
        let specs = [
            theory("gbit-midline"),
            theory("gbit-edge-projection"),
            theory("classical-2"),
            theory("classical-3"),
            catalog::prism_discard(&catalog::simplex(2).unwrap(), 2, &[Q::ratio(1, 2)]).unwrap(),
            corner_discard(),
        ];
        for a in &specs {
            for b in &specs[..4] {
                let product = min_tensor(&a.system, &b.system).unwrap();
                let body = &product.result;
                let d = a.decoherence.matrix.kron(&b.decoherence.matrix);
                let map = LinearMap::new(body.clone(), body.clone(), d.clone()).unwrap();
                let images: Vec<Vec<Q>> = body.rays().iter().map(|g| d.mul_vec(g).unwrap()).collect();
                let Some([physical, idem, purity]) = product_axioms(a, b, &product, &images).unwrap() else {
                    panic!("factors of {} ⊠ {} are physical and idempotent", a.system.name(), b.system.name());
                };
                assert_eq!(physical.passed, is_valid_transformation(&map, Normalization::Preserving).unwrap().passed);
                assert_eq!(idem.passed, idempotence_of(body, &d).unwrap().passed);
                let direct = purity_by_vertices(body, &d).unwrap();
                assert_eq!(purity.passed, direct.is_none(), "{} ⊠ {}", a.system.name(), b.system.name());
                if let Some(w) = purity.witness {
                    let rho = vector_from(&w["rho"]);
                    let image = vector_from(&w["image"]);
                    assert_eq!(map.apply(&rho).unwrap(), image);
                    let witness = PurityWitness { rho, image, faces: None };
                    assert!(witness.verify(body).unwrap());
                }
            }
        }
    }

    fn vector_from(v: &serde_json::Value) -> Vec<Q> {
        crate::io::vector_from_json(v).unwrap()
    }

    #[test]
    fn lift_check_matches_generator_check() {
        for name in ["gbit-midline", "classical-3", "prism-discard"] {
            let spec = theory(name);
            let image = classical_image(&spec).unwrap().1.unwrap();
            for (perm, lift) in &spec.lifts {
                let fast = check_lift(&spec.system, &image, perm, lift).unwrap();
                let slow = spec
                    .decohered_rays()
                    .unwrap()
                    .iter()
                    .all(|dg| lift.matrix.mul_vec(dg).unwrap() == image.permute(perm, dg).unwrap());
                assert!(fast.passed && slow, "{name} {perm:?}");
                let mut wrong = perm.clone();
                wrong.rotate_left(1);
                if wrong != *perm {
                    assert!(!check_lift(&spec.system, &image, &wrong, lift).unwrap().passed);
                }
            }
        }
    }
}
