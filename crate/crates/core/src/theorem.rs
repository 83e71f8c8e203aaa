//! Structure forced by an entanglement-free classical limit, checked on a
//! concrete theory, and the reconstruction `Ω ≅ A ⊠ Δ_N` with `D = (x ∘ u) ⊗ id`.

use serde::Serialize;
use serde_json::{json, Value};

use crate::catalog::simplex;
use crate::compose::{min_tensor, ProductBody};
use crate::convex::{make_body, unit_effect, ConvexBody};
use crate::decoherence::{
    check_axioms, check_composite, check_effect_lifting, check_transformation_lifting, classical_image, ClassicalImage,
    DecoherenceSpec, EffectCone, LiftedEffect, PurityMethod,
};
use crate::error::{Error, Result};
use crate::face::{exposing_effect, join, meet, minimal_face, relint_witness, Face, DEFAULT_MAX_FACES};
use crate::linalg::{self, dot, Matrix};
use crate::report::{index_json, matrix_json, vector_json, vectors_json, Check, Report};
use crate::scalar::Field;

/// The faces `f_i = minimal_face(s_i)` in label order.
#[derive(Clone, Debug)]
pub struct ClassicalFaces<F> {
    pub faces: Vec<Face>,
    pub states: Vec<Vec<F>>,
}

fn decohered_points<F: Field>(spec: &DecoherenceSpec<F>) -> Result<Vec<Vec<F>>> {
    (0..spec.system.num_vertices()).map(|i| spec.decoherence.apply(&spec.system.vertices()[i])).collect()
}

/// Finds each `f_i` and checks that the vertices decohering to `s_i` are exactly those of `f_i`.
pub fn extract_classical_faces<F: Field>(
    spec: &DecoherenceSpec<F>,
    image: &ClassicalImage<F>,
) -> Result<(Check, ClassicalFaces<F>)> {
    let faces: Vec<Face> = image.states.iter().map(|s| minimal_face(&spec.system, s)).collect::<Result<_>>()?;
    let decohered = decohered_points(spec)?;
    let mut check = Check::pass("preimage", "");
    'outer: for (i, f) in faces.iter().enumerate() {
        for (v, dv) in decohered.iter().enumerate() {
            if (dv == &image.states[i]) != f.contains_vertex(v) {
                check = Check::fail("preimage", format!("vertex {v} breaks the preimage characterization of face {i}"))
                    .with_witness(json!({ "face": i, "vertex": v, "image": vector_json(dv) }));
                break 'outer;
            }
        }
    }
    Ok((check, ClassicalFaces { faces, states: image.states.clone() }))
}

fn cycle(n: usize) -> Vec<usize> {
    (0..n).map(|i| (i + 1) % n).collect()
}

/// Powers `T^0 .. T^{N-1}` of the cycle lift.
fn cycle_powers<F: Field>(spec: &DecoherenceSpec<F>, n: usize) -> Result<Vec<Matrix<F>>> {
    let d = spec.system.cone_dim();
    let mut powers = vec![Matrix::identity(d)];
    if n >= 2 {
        let t = spec
            .lifts
            .get(&cycle(n))
            .ok_or_else(|| Error::Precondition(format!("no lift supplied for the cycle {:?}", cycle(n))))?;
        for i in 1..n {
            let next = t.matrix.mul(&powers[i - 1])?;
            powers.push(next);
        }
    }
    Ok(powers)
}

#[derive(Clone, Debug)]
pub struct FaceStructure<F> {
    pub report: Report,
    pub exposing: Vec<Vec<F>>,
    /// Set when the barycenter of the classical states is on the boundary of the body,
    /// where the interior-point argument for the join does not apply.
    pub interior_route_degenerate: bool,
}

/// Six properties of the classical faces: refining sets, exact decoherence on faces,
/// disjointness, isomorphism via lifts, exposedness, and joining to the whole body.
pub fn verify_result1<F: Field>(
    spec: &DecoherenceSpec<F>,
    faces: &ClassicalFaces<F>,
    lifted: &[LiftedEffect<F>],
) -> Result<FaceStructure<F>> {
    let body = &spec.system;
    let n = faces.faces.len();
    let mut report = Report::new("classical-faces");

    let mut refining = Check::pass("refining-set-faces", "");
    for (i, f) in faces.faces.iter().enumerate() {
        let centre = relint_witness(body, f)?;
        let round_trip = minimal_face(body, &centre)? == *f;
        let refine_all = f
            .vertices
            .iter()
            .all(|&v| crate::face::refines(body, &body.vertices()[v], &faces.states[i]).unwrap_or(false));
        if !round_trip || !refine_all {
            refining = Check::fail("refining-set-faces", format!("face {i} is not the refining set of its state"));
            break;
        }
    }
    report.push(refining);

    let decohered = decohered_points(spec)?;
    let mut exact = Check::pass("decoheres-exactly-on-face", "");
    'outer: for (i, f) in faces.faces.iter().enumerate() {
        for (v, dv) in decohered.iter().enumerate() {
            if (dv == &faces.states[i]) != f.contains_vertex(v) {
                exact = Check::fail("decoheres-exactly-on-face", format!("vertex {v}, face {i}"))
                    .with_witness(json!({ "face": i, "vertex": v }));
                break 'outer;
            }
        }
    }
    report.push(exact);

    let mut disjoint = Check::pass("disjoint", "");
    'pairs: for i in 0..n {
        for j in i + 1..n {
            let m = meet(body, &[&faces.faces[i], &faces.faces[j]])?;
            if !m.is_empty() {
                disjoint = Check::fail("disjoint", format!("faces {i} and {j} intersect"))
                    .with_witness(json!({ "faces": [i, j], "common_vertices": m.vertices }));
                break 'pairs;
            }
        }
    }
    report.push(disjoint);

    let mut iso = Check::pass("isomorphic", "");
    match cycle_powers(spec, n) {
        Err(Error::Precondition(msg)) => iso = Check::fail("isomorphic", msg),
        Err(e) => return Err(e),
        Ok(powers) => {
            for (j, t) in powers.iter().enumerate() {
                let mut image: Vec<usize> = Vec::new();
                for &v in &faces.faces[0].vertices {
                    match body.ray_index(&t.mul_vec(&body.ray(v))?) {
                        Some(w) => image.push(w),
                        None => {
                            image.clear();
                            break;
                        }
                    }
                }
                image.sort_unstable();
                if image != faces.faces[j].vertices {
                    iso = Check::fail(
                        "isomorphic",
                        format!("the cycle lift to power {j} does not carry face 0 onto face {j}"),
                    )
                    .with_witness(json!({ "power": j, "image": image }));
                    break;
                }
            }
        }
    }
    report.push(iso);

    // Exposedness: an LP exposer for each f_i, and E_I = Σ_{j∉I} e_j ∘ D for the joins f_I.
    let mut exposing = Vec::with_capacity(n);
    let mut exposed = Check::pass("exposed", "");
    for (i, f) in faces.faces.iter().enumerate() {
        match exposing_effect(body, f)? {
            Some(e) => exposing.push(e.effect),
            None => {
                exposed = Check::fail("exposed", format!("face {i} has no exposing effect"));
                break;
            }
        }
    }
    let pullbacks: Vec<&Vec<F>> = (0..n)
        .filter_map(|i| lifted.iter().find(|l| l.target == format!("indicator-{i}")).map(|l| &l.pullback))
        .collect();
    if exposed.passed && pullbacks.len() == n {
        let subsets: Vec<Vec<usize>> = if n <= 10 {
            (1..1u32 << n).map(|mask| (0..n).filter(|i| mask >> i & 1 == 1).collect()).collect()
        } else {
            (0..n).flat_map(|i| [vec![i], (0..n).filter(|&j| j != i).collect()]).collect()
        };
        for subset in subsets {
            let refs: Vec<&Face> = subset.iter().map(|&i| &faces.faces[i]).collect();
            let joined = join(body, &refs)?;
            let mut e = vec![F::zero(); body.cone_dim()];
            for j in (0..n).filter(|j| !subset.contains(j)) {
                e = linalg::add(&e, pullbacks[j]);
            }
            let ok = (0..body.num_vertices()).all(|v| {
                let value = dot(&e, &body.ray(v));
                if joined.contains_vertex(v) {
                    value.is_zero()
                } else {
                    value.is_positive()
                }
            });
            if !ok {
                exposed = Check::fail("exposed", format!("E_I does not expose the join of faces {subset:?}"))
                    .with_witness(json!({ "subset": subset, "effect": vector_json(&e) }));
                break;
            }
        }
    } else if exposed.passed {
        exposed = Check::fail("exposed", "lifted indicator effects are missing");
    }
    if exposed.passed {
        exposed = exposed.with_witness(vectors_json(&exposing));
    }
    report.push(exposed);

    let all: Vec<&Face> = faces.faces.iter().collect();
    let joined = join(body, &all)?;
    report.push(Check::new(
        "join-is-everything",
        joined.vertices.len() == body.num_vertices(),
        format!("join has {} of {} vertices", joined.vertices.len(), body.num_vertices()),
    ));
    let centre = linalg::barycenter(&faces.states);
    let interior_route_degenerate = minimal_face(body, &centre)?.vertices.len() != body.num_vertices();
    Ok(FaceStructure { report, exposing, interior_route_degenerate })
}

/// Linear independence of the face spans and coverage of every vertex.
pub fn verify_result2<F: Field>(spec: &DecoherenceSpec<F>, faces: &ClassicalFaces<F>) -> Result<Report> {
    let body = &spec.system;
    let mut report = Report::new("independence");
    let rays_of = |vs: &[usize]| -> Vec<Vec<F>> { vs.iter().map(|&v| body.ray(v)).collect() };
    let mut spans = Check::pass("span-independence", "");
    for (i, f) in faces.faces.iter().enumerate() {
        let mut others: Vec<usize> =
            faces.faces.iter().enumerate().filter(|&(k, _)| k != i).flat_map(|(_, g)| g.vertices.clone()).collect();
        others.sort_unstable();
        others.dedup();
        let common = linalg::span_intersection(&rays_of(&f.vertices), &rays_of(&others))?;
        if let Some(v) = common.first() {
            spans = Check::fail("span-independence", format!("span of face {i} meets the span of the others"))
                .with_witness(json!({ "face": i, "vector": vector_json(v) }));
            break;
        }
    }
    report.push(spans);
    let uncovered: Vec<usize> =
        (0..body.num_vertices()).filter(|&v| !faces.faces.iter().any(|f| f.contains_vertex(v))).collect();
    report.push(match uncovered.first() {
        None => Check::pass("hull", ""),
        Some(_) => Check::fail("hull", "some vertices lie in no classical face").with_witness(index_json(&uncovered)),
    });
    Ok(report)
}

/// `Ω ≅ A ⊠ Δ_N` with the decoherence conjugated to `(x ∘ u) ⊗ id`.
#[derive(Clone, Debug)]
pub struct Decomposition<F: Field> {
    pub residue: ConvexBody<F>,
    pub n: usize,
    /// The fixed residue state `x`, in `A`'s body coordinates.
    pub x: Vec<F>,
    pub product: ProductBody<F>,
    /// Cone coordinates of `A ⊠ Δ_N` to those of the system.
    pub psi: Matrix<F>,
    /// Left inverse of `psi` on the system's cone span.
    pub phi: Matrix<F>,
    /// `vertex_map[k]`: system vertex hit by product vertex `k`.
    pub vertex_map: Vec<usize>,
    pub report: Report,
}

impl<F: Field> Decomposition<F> {
    pub fn to_json(&self) -> Value {
        json!({
            "residue": crate::io::body_json(&self.residue),
            "n": self.n,
            "x": vector_json(&self.x),
            "psi": matrix_json(&self.psi),
            "phi": matrix_json(&self.phi),
            "vertex_map": self.vertex_map,
        })
    }
}

fn first_difference<F: Field>(a: &Matrix<F>, b: &Matrix<F>) -> Option<(usize, usize)> {
    (0..a.nrows()).flat_map(|i| (0..a.ncols()).map(move |j| (i, j))).find(|&(i, j)| a[(i, j)] != b[(i, j)])
}

/// Builds the residue `A = f_0` in coordinates of its first independent vertex rays,
/// transports it to every `f_i` by powers of the cycle lift, and certifies the result.
pub fn reconstruct<F: Field>(spec: &DecoherenceSpec<F>, faces: &ClassicalFaces<F>) -> Result<Decomposition<F>> {
    let body = &spec.system;
    let n = faces.faces.len();
    let powers = cycle_powers(spec, n)?;
    let f0 = &faces.faces[0];
    let f0_rays: Vec<Vec<F>> = f0.vertices.iter().map(|&v| body.ray(v)).collect();
    let basis_idx = linalg::independent_subset(&f0_rays, body.cone_dim());
    let k = basis_idx.len();
    let basis: Vec<Vec<F>> = basis_idx.iter().map(|&i| f0_rays[i].clone()).collect();
    let basis_matrix = Matrix::from_columns(&basis, body.cone_dim())?;
    let alpha = |x: &[F]| -> Result<Vec<F>> {
        let c = linalg::solve_linear(&basis_matrix, x)?
            .ok_or_else(|| Error::Precondition("state outside the span of the first classical face".into()))?
            .x;
        let total = c.iter().fold(F::zero(), |acc, v| acc + v.clone());
        let mut out = c[..k - 1].to_vec();
        out.push(total);
        Ok(out)
    };
    let residue_points: Vec<Vec<F>> = f0_rays
        .iter()
        .map(|r| {
            alpha(r).map(|mut a| {
                a.pop();
                a
            })
        })
        .collect::<Result<_>>()?;
    let residue = make_body(format!("residue({})", body.name()), residue_points)?;
    let delta = simplex::<F>(n)?;
    let product = min_tensor(&residue, &delta)?;

    // Columns T^i b_j and their targets α(b_j) ⊗ δ_i.
    let mut xs = Vec::with_capacity(k * n);
    let mut ys = Vec::with_capacity(k * n);
    for (i, t) in powers.iter().enumerate() {
        for b in &basis {
            xs.push(t.mul_vec(b)?);
            ys.push(linalg::tensor(&alpha(b)?, &delta.ray(i)));
        }
    }
    let x_mat = Matrix::from_columns(&xs, body.cone_dim())?;
    let y_mat = Matrix::from_columns(&ys, k * n)?;
    let y_inv = y_mat.inverse().ok_or_else(|| Error::Internal("residue basis is not a basis".into()))?;
    let psi = x_mat.mul(&y_inv)?;
    let gram = psi.transpose().mul(&psi)?;
    let phi = gram
        .inverse()
        .ok_or_else(|| Error::Precondition("transported face bases are linearly dependent".into()))?
        .mul(&psi.transpose())?;

    let mut report = Report::new("reconstruction");
    if first_difference(&phi.mul(&psi)?, &Matrix::identity(k * n)).is_some() {
        return Err(Error::Internal("phi is not a left inverse of psi".into()));
    }
    for (v, g) in body.rays().iter().enumerate() {
        if psi.mul_vec(&phi.mul_vec(g)?)? != *g {
            return Err(Error::Internal(format!("psi ∘ phi moves vertex {v}")));
        }
    }
    report.push(Check::pass("mutual-inverses", ""));

    let mut vertex_map = Vec::with_capacity(product.result.num_vertices());
    for (p, r) in product.result.rays().iter().enumerate() {
        match body.ray_index(&psi.mul_vec(r)?) {
            Some(v) => vertex_map.push(v),
            None => return Err(Error::Internal(format!("product vertex {p} is not sent to a system vertex"))),
        }
    }
    let mut hit = vertex_map.clone();
    hit.sort_unstable();
    hit.dedup();
    if hit.len() != body.num_vertices() || vertex_map.len() != body.num_vertices() {
        return Err(Error::Internal("product vertices do not biject onto the system's vertices".into()));
    }
    report.push(Check::pass("vertex-bijection", "").with_witness(index_json(&vertex_map)));

    let x_cone = alpha(&body.lift_point(&faces.states[0])?)?;
    let mut x = x_cone.clone();
    x.pop();
    let mut discard = Matrix::zeros(k, k);
    let ua = unit_effect(&residue);
    for i in 0..k {
        for j in 0..k {
            discard[(i, j)] = x_cone[i].clone() * ua[j].clone();
        }
    }
    let expected = discard.kron(&Matrix::identity(n));
    let conjugated = phi.mul(&spec.decoherence.matrix)?.mul(&psi)?;
    if let Some((i, j)) = first_difference(&conjugated, &expected) {
        return Err(Error::Internal(format!(
            "conjugated decoherence differs from (x∘u)⊗id at entry ({i}, {j}): {} vs {}",
            conjugated[(i, j)],
            expected[(i, j)]
        )));
    }
    report.push(Check::pass("discard-form", "").with_witness(json!({ "x": vector_json(&x) })));
    Ok(Decomposition { residue, n, x, product, psi, phi, vertex_map, report })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "CLASSICAL-PRODUCT")]
    ClassicalProduct,
    #[serde(rename = "NO-ENTANGLEMENT-FREE-LIMIT")]
    NoEntanglementFreeLimit,
    #[serde(rename = "MALFORMED-INPUT")]
    MalformedInput,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::ClassicalProduct => "CLASSICAL-PRODUCT",
            Verdict::NoEntanglementFreeLimit => "NO-ENTANGLEMENT-FREE-LIMIT",
            Verdict::MalformedInput => "MALFORMED-INPUT",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::ClassicalProduct => 0,
            Verdict::NoEntanglementFreeLimit => 1,
            Verdict::MalformedInput => 2,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub max_faces: usize,
    pub purity: PurityMethod,
    /// Reject theories that leave the effect cone unrestricted.
    pub strict_effects: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { max_faces: DEFAULT_MAX_FACES, purity: PurityMethod::FacePairs, strict_effects: false }
    }
}

#[derive(Clone, Debug)]
pub struct TheoremReport<F: Field> {
    pub verdict: Verdict,
    pub reason: String,
    /// Stages in pipeline order; a failing stage is the last one run.
    pub stages: Vec<Report>,
    pub classical_faces: Option<ClassicalFaces<F>>,
    pub decomposition: Option<Decomposition<F>>,
}

impl<F: Field> TheoremReport<F> {
    pub fn stage(&self, name: &str) -> Option<&Report> {
        self.stages.iter().find(|s| s.name == name)
    }

    pub fn to_json(&self) -> Value {
        let mut out = json!({
            "verdict": self.verdict,
            "reason": self.reason,
            "stages": self.stages,
        });
        if let Some(f) = &self.classical_faces {
            out["classical_faces"] = json!(f.faces);
        }
        if let Some(d) = &self.decomposition {
            out["decomposition"] = d.to_json();
        }
        out
    }
}

fn is_input_error(e: &Error) -> bool {
    !matches!(e, Error::Internal(_) | Error::FaceCapExceeded { .. })
}

/// Runs the full pipeline: decoherence axioms, classical image, effect and
/// transformation lifting, classical faces, independence, composite, reconstruction.
/// Each stage runs only if every earlier stage passed.
pub fn verdict<F: Field>(spec: &DecoherenceSpec<F>, options: &VerifyOptions) -> Result<TheoremReport<F>> {
    match run_pipeline(spec, options) {
        Err(e) if is_input_error(&e) => Ok(TheoremReport {
            verdict: Verdict::MalformedInput,
            reason: e.to_string(),
            stages: Vec::new(),
            classical_faces: None,
            decomposition: None,
        }),
        other => other,
    }
}

/// Axioms, classical image, effect lifting and transformation lifting, stopping at the
/// first failing stage. Returns the image and lifted effects when all of them pass.
type FrontStages<F> = (ClassicalImage<F>, Vec<LiftedEffect<F>>);

fn front_stages<F: Field>(
    spec: &DecoherenceSpec<F>,
    options: &VerifyOptions,
    stages: &mut Vec<Report>,
) -> Result<Option<FrontStages<F>>> {
    let axioms = check_axioms(spec, options.purity, options.max_faces)?;
    stages.push(Report { name: "decoherence-axioms".into(), ..axioms.report });
    if !stages.last().expect("pushed").passed {
        return Ok(None);
    }
    let (image_check, image) = classical_image(spec)?;
    let mut stage = Report::new("classical-image");
    stage.push(image_check);
    stages.push(stage);
    let Some(image) = image else { return Ok(None) };
    let (effects, lifted) = check_effect_lifting(spec, &image)?;
    stages.push(effects);
    if !stages.last().expect("pushed").passed {
        return Ok(None);
    }
    stages.push(check_transformation_lifting(spec, &image)?);
    if !stages.last().expect("pushed").passed {
        return Ok(None);
    }
    Ok(Some((image, lifted)))
}

/// Whether `spec` is a classical limit: decoherence axioms, a simplex image, lifted
/// effects and permutations, and the same for the composite with itself.
pub fn check_classical_limit<F: Field>(spec: &DecoherenceSpec<F>, options: &VerifyOptions) -> Result<Vec<Report>> {
    let mut stages = Vec::new();
    if front_stages(spec, options, &mut stages)?.is_some() {
        stages.push(check_composite(spec, spec, &spec.bipartite_lifts)?.report);
    }
    Ok(stages)
}

fn run_pipeline<F: Field>(spec: &DecoherenceSpec<F>, options: &VerifyOptions) -> Result<TheoremReport<F>> {
    let mut out = TheoremReport {
        verdict: Verdict::NoEntanglementFreeLimit,
        reason: String::new(),
        stages: Vec::new(),
        classical_faces: None,
        decomposition: None,
    };
    if options.strict_effects && spec.effect_cone == EffectCone::Unrestricted {
        out.verdict = Verdict::MalformedInput;
        out.reason = "strict effects: the theory must declare an effect cone".into();
        return Ok(out);
    }
    let fail = |mut out: TheoremReport<F>| {
        let last = out.stages.last().expect("a stage ran");
        let first = last.failures().next().map(|c| c.name.clone()).unwrap_or_default();
        out.reason = format!("{} failed: {}", last.name, first);
        Ok(out)
    };

    let Some((image, lifted)) = front_stages(spec, options, &mut out.stages)? else {
        return fail(out);
    };

    let (preimage, faces) = extract_classical_faces(spec, &image)?;
    let mut r1 = verify_result1(spec, &faces, &lifted)?;
    r1.report.checks.insert(0, preimage.clone());
    r1.report.passed &= preimage.passed;
    if r1.interior_route_degenerate {
        r1.report.push(Check::pass("interior-route", "flagged: the classical barycenter lies on the boundary"));
    }
    out.stages.push(r1.report);
    out.classical_faces = Some(faces.clone());
    if !out.stages.last().unwrap().passed {
        return fail(out);
    }

    out.stages.push(verify_result2(spec, &faces)?);
    if !out.stages.last().unwrap().passed {
        return fail(out);
    }

    let composite = check_composite(spec, spec, &spec.bipartite_lifts)?;
    out.stages.push(composite.report);
    if !out.stages.last().unwrap().passed {
        return fail(out);
    }

    let decomposition = reconstruct(spec, &faces)?;
    out.stages.push(decomposition.report.clone());
    out.verdict = Verdict::ClassicalProduct;
    out.reason =
        format!("system is {} ⊠ simplex-{} with discard decoherence", decomposition.residue.name(), decomposition.n);
    out.decomposition = Some(decomposition);
    Ok(out)
}
