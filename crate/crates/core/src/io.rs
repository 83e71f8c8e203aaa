//! JSON formats for bodies, maps, theories, joint states and face lattices.
//! Scalars are strings `"p/q"` (or `"p"`), so every format round-trips exactly.

use serde_json::{json, Map, Value};

use crate::compose::{min_tensor, SeparabilityCertificate};
use crate::convex::{make_body, ConvexBody};
use crate::decoherence::{DecoherenceSpec, EffectCone, Lifts};
use crate::error::{Error, Result};
use crate::face::FaceLattice;
use crate::linalg::Matrix;
use crate::maps::LinearMap;
use crate::report::{matrix_json, vector_json, vectors_json};
use crate::scalar::{format_scalar, parse_scalar, Field};

fn field<'a>(v: &'a Value, key: &str, what: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| Error::invalid(format!("{what}: missing field {key:?}")))
}

fn scalar<F: Field>(v: &Value) -> Result<F> {
    match v {
        Value::String(s) => parse_scalar(s).map_err(Error::InvalidInput),
        Value::Number(n) if n.is_i64() => Ok(F::int(n.as_i64().expect("checked"))),
        other => Err(Error::invalid(format!("expected a rational string, found {other}"))),
    }
}

pub fn vector_from_json<F: Field>(v: &Value) -> Result<Vec<F>> {
    v.as_array().ok_or_else(|| Error::invalid("expected an array of rationals"))?.iter().map(scalar).collect()
}

pub fn vectors_from_json<F: Field>(v: &Value) -> Result<Vec<Vec<F>>> {
    v.as_array().ok_or_else(|| Error::invalid("expected an array of vectors"))?.iter().map(vector_from_json).collect()
}

pub fn body_json<F: Field>(body: &ConvexBody<F>) -> Value {
    json!({
        "name": body.name(),
        "ambient_dim": body.ambient_dim(),
        "vertices": vectors_json(body.vertices()),
    })
}

/// Reads a body; the vertex list may contain duplicates and non-extremal points.
pub fn body_from_json<F: Field>(v: &Value) -> Result<ConvexBody<F>> {
    let name = field(v, "name", "body")?.as_str().ok_or_else(|| Error::invalid("body: name must be a string"))?;
    let dim = field(v, "ambient_dim", "body")?
        .as_u64()
        .ok_or_else(|| Error::invalid("body: ambient_dim must be a nonnegative integer"))? as usize;
    let vertices = vectors_from_json(field(v, "vertices", "body")?)?;
    if let Some(bad) = vertices.iter().find(|p| p.len() != dim) {
        return Err(Error::dimension(format!(
            "body {name}: vertex has {} coordinates, ambient_dim is {dim}",
            bad.len()
        )));
    }
    make_body(name, vertices)
}

pub fn map_json<F: Field>(map: &LinearMap<F>) -> Value {
    json!({
        "source": map.source.name(),
        "target": map.target.name(),
        "matrix": matrix_json(&map.matrix),
    })
}

/// Reads a map between known bodies; its `source` and `target` names must match them.
pub fn map_from_json<F: Field>(v: &Value, source: &ConvexBody<F>, target: &ConvexBody<F>) -> Result<LinearMap<F>> {
    for (key, body) in [("source", source), ("target", target)] {
        let name =
            field(v, key, "map")?.as_str().ok_or_else(|| Error::invalid(format!("map: {key} must be a string")))?;
        if name != body.name() {
            return Err(Error::invalid(format!("map {key} is {name:?}, expected {:?}", body.name())));
        }
    }
    let rows = vectors_from_json(field(v, "matrix", "map")?)?;
    let matrix = Matrix::from_rows(rows, source.cone_dim())?;
    LinearMap::new(source.clone(), target.clone(), matrix)
}

pub fn perm_key(perm: &[usize]) -> String {
    format!("{perm:?}")
}

pub fn parse_perm_key(key: &str) -> Result<Vec<usize>> {
    let perm: Vec<usize> = serde_json::from_str(key)
        .map_err(|e| Error::invalid(format!("lift key {key:?} is not an integer array: {e}")))?;
    let mut sorted = perm.clone();
    sorted.sort_unstable();
    if sorted.iter().enumerate().any(|(i, &p)| i != p) {
        return Err(Error::invalid(format!("lift key {key:?} is not a permutation")));
    }
    Ok(perm)
}

fn lifts_json<F: Field>(lifts: &Lifts<F>) -> Value {
    Value::Object(lifts.iter().map(|(k, m)| (perm_key(k), map_json(m))).collect::<Map<_, _>>())
}

fn lifts_from_json<F: Field>(v: Option<&Value>, body: &ConvexBody<F>) -> Result<Lifts<F>> {
    let mut out = Lifts::new();
    let Some(v) = v else { return Ok(out) };
    let obj = v.as_object().ok_or_else(|| Error::invalid("lifts must be an object keyed by permutations"))?;
    for (key, map) in obj {
        out.insert(parse_perm_key(key)?, map_from_json(map, body, body)?);
    }
    Ok(out)
}

pub fn theory_json<F: Field>(spec: &DecoherenceSpec<F>) -> Value {
    let mut out = json!({
        "system": body_json(&spec.system),
        "decoherence": map_json(&spec.decoherence),
        "effect_cone": match &spec.effect_cone {
            EffectCone::Unrestricted => json!("unrestricted"),
            EffectCone::Declared(cs) => vectors_json(cs),
        },
        "lifts": lifts_json(&spec.lifts),
        "bipartite_lifts": lifts_json(&spec.bipartite_lifts),
    });
    if let Some(labels) = &spec.labels {
        out["labels"] = vectors_json(labels);
    }
    out
}

pub fn theory_from_json<F: Field>(v: &Value) -> Result<DecoherenceSpec<F>> {
    let system = body_from_json(field(v, "system", "theory")?)?;
    let decoherence = map_from_json(field(v, "decoherence", "theory")?, &system, &system)?;
    let mut spec = DecoherenceSpec::new(system.clone(), decoherence)?;
    spec.effect_cone = match v.get("effect_cone") {
        None => EffectCone::Unrestricted,
        Some(Value::String(s)) if s == "unrestricted" => EffectCone::Unrestricted,
        Some(cs @ Value::Array(_)) => {
            let cs = vectors_from_json(cs)?;
            if let Some(bad) = cs.iter().find(|c| c.len() != system.cone_dim()) {
                return Err(Error::dimension(format!(
                    "effect covector has {} entries, cone dimension is {}",
                    bad.len(),
                    system.cone_dim()
                )));
            }
            EffectCone::Declared(cs)
        }
        Some(other) => {
            return Err(Error::invalid(format!("effect_cone must be \"unrestricted\" or a list, found {other}")))
        }
    };
    spec.lifts = lifts_from_json(v.get("lifts"), &system)?;
    if v.get("bipartite_lifts").and_then(Value::as_object).is_some_and(|o| !o.is_empty()) {
        let composite = min_tensor(&system, &system)?.result;
        spec.bipartite_lifts = lifts_from_json(v.get("bipartite_lifts"), &composite)?;
    }
    if let Some(labels) = v.get("labels") {
        spec.labels = Some(vectors_from_json(labels)?);
    }
    Ok(spec)
}

/// A normalized state of `left ⊠ right` in row-major cone coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JointState<F> {
    pub left: String,
    pub right: String,
    pub coords: Vec<F>,
}

pub fn joint_state_json<F: Field>(state: &JointState<F>) -> Value {
    json!({ "left": state.left, "right": state.right, "coords": vector_json(&state.coords) })
}

pub fn joint_state_from_json<F: Field>(v: &Value) -> Result<JointState<F>> {
    let text = |key| {
        field(v, key, "joint state")?
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| Error::invalid(format!("joint state: {key} must be a string")))
    };
    Ok(JointState {
        left: text("left")?,
        right: text("right")?,
        coords: vector_from_json(field(v, "coords", "joint state")?)?,
    })
}

pub fn separability_json<F: Field>(cert: &SeparabilityCertificate<F>) -> Value {
    match cert {
        SeparabilityCertificate::Separable { terms } => json!({
            "separable": true,
            "terms": terms.iter().map(|t| json!({
                "weight": format_scalar(&t.weight),
                "left": vector_json(&t.left),
                "right": vector_json(&t.right),
            })).collect::<Vec<_>>(),
        }),
        SeparabilityCertificate::Entangled { witness } => {
            json!({ "separable": false, "witness": vector_json(witness) })
        }
    }
}

pub fn lattice_json<F: Field>(lattice: &FaceLattice<F>) -> Value {
    json!({ "faces": lattice.faces, "covers": lattice.covers })
}

/// Parses JSON text, reporting the line and column of a syntax error.
pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text)
        .map_err(|e| Error::invalid(format!("malformed JSON at line {}, column {}: {e}", e.line(), e.column())))
}
