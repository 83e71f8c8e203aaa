//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use classlim::catalog::{self, Scenario};
use classlim::compose::{check_distributivity, min_tensor, separability_certificate};
use classlim::convex::{simplex_recognize, unit_effect, ConvexBody};
use classlim::decoherence::{purity_by_face_pairs, violates_purity_at, DecoherenceSpec};
use classlim::face::{face_lattice, full_face, refines, DEFAULT_MAX_FACES};
use classlim::linalg::{self, dot, Matrix};
use classlim::maps::{find_linear_isomorphism, LinearMap};
use classlim::theorem::{verdict, Verdict, VerifyOptions};
use classlim::{Field, Rational};
use num_traits::{One, Signed, Zero};

type Q = Rational;
type Outcome = Result<(), String>;

fn q(n: i64, d: i64) -> Q {
    Q::ratio(n, d)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn theory(name: &str) -> DecoherenceSpec<Q> {
    match catalog::scenario(name).expect("known scenario") {
        Scenario::Theory(s) => *s,
        Scenario::Note(_) => panic!("{name} is documentation only"),
    }
}

fn classical_composition() -> Outcome {
    for n in 1..=4 {
        for m in 1..=4 {
            let p = min_tensor(&catalog::simplex::<Q>(n).unwrap(), &catalog::simplex(m).unwrap()).unwrap();
            let rec = simplex_recognize(&p.result);
            ensure(rec.is_some_and(|s| s.n == n * m) && p.result.num_vertices() == n * m, || {
                format!("simplex-{n} ⊠ simplex-{m} is not a simplex with {} vertices", n * m)
            })?;
        }
    }
    Ok(())
}

fn distributivity() -> Outcome {
    let bodies: Vec<ConvexBody<Q>> =
        vec![catalog::simplex(2).unwrap(), catalog::simplex(3).unwrap(), catalog::gbit(), catalog::point()];
    for a in &bodies {
        for b in &bodies {
            for c in &bodies {
                let d = check_distributivity(a, b, c).unwrap();
                ensure(d.report.passed, || format!("{} ⊠ ({} ⊕ {}): {:?}", a.name(), b.name(), c.name(), d.report))?;
                // Independent re-check: the iso is square, invertible and sends lhs rays to rhs rays.
                let inv = d.iso.inverse().ok_or("iso not invertible")?;
                ensure(d.iso.mul(&inv).unwrap() == Matrix::identity(d.iso.nrows()), || "iso inverse".into())?;
                let mut images: Vec<Vec<Q>> = d.lhs.rays().iter().map(|r| d.iso.mul_vec(r).unwrap()).collect();
                images.sort();
                let mut targets = d.rhs.rays();
                targets.sort();
                ensure(images == targets, || {
                    format!("iso misses generators for {} {} {}", a.name(), b.name(), c.name())
                })?;
            }
        }
    }
    Ok(())
}

fn star_counterexample() -> Outcome {
    let spec = theory("gbit-midline");
    let r = verdict(&spec, &VerifyOptions::default()).unwrap();
    ensure(r.verdict == Verdict::NoEntanglementFreeLimit, || format!("verdict {:?}", r.verdict))?;
    let axioms = r.stage("decoherence-axioms").ok_or("no axiom stage")?;
    for name in ["physicality", "idempotence", "purity-decreasing"] {
        ensure(axioms.get(name).is_some_and(|c| c.passed), || format!("axiom {name} did not pass"))?;
    }
    let faces_stage = r.stage("classical-faces").ok_or("no classical-face stage")?;
    for name in
        ["refining-set-faces", "decoheres-exactly-on-face", "disjoint", "isomorphic", "exposed", "join-is-everything"]
    {
        ensure(faces_stage.get(name).is_some_and(|c| c.passed), || format!("sub-check {name} did not pass"))?;
    }
    let span = r.stage("independence").and_then(|s| s.get("span-independence")).ok_or("no span check")?;
    ensure(!span.passed, || "span independence unexpectedly passed".into())?;
    let witness = span.witness.as_ref().ok_or("no witness")?;
    let vector: Vec<Q> = classlim::io::vector_from_json(&witness["vector"]).unwrap();
    ensure(!linalg::is_zero_vec(&vector), || "zero witness".into())?;
    // The witness lies in the span of the left edge rays and of the right edge rays.
    let square = &spec.system;
    let rays_at = |x: Q| -> Vec<Vec<Q>> {
        square.vertices().iter().filter(|v| v[0] == x).map(|v| vec![v[0].clone(), v[1].clone(), Q::one()]).collect()
    };
    for side in [rays_at(Q::zero()), rays_at(Q::one())] {
        let m = Matrix::from_columns(&side, 3).unwrap();
        ensure(linalg::solve_linear(&m, &vector).unwrap().is_some(), || "witness outside an edge span".into())?;
    }
    Ok(())
}

fn purity_violator() -> Outcome {
    let spec = theory("gbit-edge-projection");
    let lattice = face_lattice(&spec.system, DEFAULT_MAX_FACES).unwrap();
    let w = purity_by_face_pairs(&spec, &lattice).unwrap().ok_or("no violation found")?;
    let (g, h) = w.faces.clone().ok_or("no face pair")?;
    ensure(g == full_face(&spec.system), || format!("g = {g:?}"))?;
    let bottom: Vec<usize> = (0..4).filter(|&i| spec.system.vertices()[i][1] == Q::zero()).collect();
    ensure(h.vertices == bottom, || format!("h = {:?}", h.vertices))?;
    let image = spec.decoherence.apply(&w.rho).unwrap();
    ensure(image == w.image, || "image mismatch".into())?;
    let purer = refines(&spec.system, &image, &w.rho).unwrap();
    let back = refines(&spec.system, &w.rho, &image).unwrap();
    ensure(purer && !back, || format!("witness ρ = {:?} does not re-verify", w.rho))
}

fn prism_instance() -> Outcome {
    let spec = theory("prism-discard");
    let r = verdict(&spec, &VerifyOptions::default()).unwrap();
    ensure(r.verdict == Verdict::ClassicalProduct, || r.reason.clone())?;
    let d = r.decomposition.as_ref().ok_or("no decomposition")?;
    ensure(d.n == 2, || format!("N = {}", d.n))?;
    let (_, vertex_map) =
        find_linear_isomorphism(&d.residue, &catalog::gbit()).unwrap().ok_or("residue is not a square")?;
    ensure(vertex_map.len() == 4, || "square bijection".into())?;
    // Recompute every certificate from the returned matrices.
    let k = d.residue.cone_dim();
    ensure(d.phi.mul(&d.psi).unwrap() == Matrix::identity(k * 2), || "phi psi ≠ I".into())?;
    let mut images: Vec<Vec<Q>> = d.product.result.rays().iter().map(|r| d.psi.mul_vec(r).unwrap()).collect();
    images.sort();
    let mut body_rays = spec.system.rays();
    body_rays.sort();
    ensure(images == body_rays, || "product vertices do not map onto body vertices".into())?;
    let mut x = d.x.clone();
    x.push(Q::one());
    let u = unit_effect(&d.residue);
    let discard =
        Matrix::from_rows(x.iter().map(|xi| u.iter().map(|uj| xi.clone() * uj.clone()).collect()).collect(), k)
            .unwrap();
    let expected = discard.kron(&Matrix::identity(2));
    let conjugated = d.phi.mul(&spec.decoherence.matrix).unwrap().mul(&d.psi).unwrap();
    ensure(conjugated == expected, || "conjugated decoherence differs from (x∘u)⊗id".into())
}

fn degenerate_classical() -> Outcome {
    for n in 1..=5 {
        let r = verdict(&catalog::classical::<Q>(n).unwrap(), &VerifyOptions::default()).unwrap();
        ensure(r.verdict == Verdict::ClassicalProduct, || format!("simplex-{n}: {}", r.reason))?;
        let d = r.decomposition.as_ref().ok_or("no decomposition")?;
        ensure(d.residue.num_vertices() == 1 && d.n == n, || format!("simplex-{n}: residue is not a point"))?;
    }
    Ok(())
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Carathéodory: a point is in the hull iff it is in some simplex on affinely
/// independent vertices.
fn triangulation_member(body: &ConvexBody<Q>, p: &[Q]) -> bool {
    let dim = body.affine_dim();
    let mut target = p.to_vec();
    target.push(Q::one());
    subsets(body.num_vertices(), dim + 1).into_iter().any(|s| {
        let rays: Vec<Vec<Q>> = s.iter().map(|&i| body.ray(i)).collect();
        if linalg::rank_of(&rays, body.cone_dim()) != dim + 1 {
            return false;
        }
        let m = Matrix::from_columns(&rays, body.cone_dim()).unwrap();
        linalg::solve_linear(&m, &target).unwrap().is_some_and(|sol| sol.x.iter().all(|l| !l.is_negative()))
    })
}

/// Grid over the bounding box widened by half its width on each side, so that it
/// includes every box corner, plus all vertices and midpoints of vertex pairs.
fn probe_points(body: &ConvexBody<Q>) -> Vec<Vec<Q>> {
    let d = body.ambient_dim();
    let mut points: Vec<Vec<Q>> = body.vertices().to_vec();
    for i in 0..body.num_vertices() {
        for j in i + 1..body.num_vertices() {
            points.push(linalg::barycenter(&[body.vertices()[i].clone(), body.vertices()[j].clone()]));
        }
    }
    if d > 0 {
        let k = (1..).find(|&k: &usize| (4 * k + 1).pow(d as u32) >= 200).unwrap();
        let axes: Vec<Vec<Q>> = (0..d)
            .map(|a| {
                let lo = body.vertices().iter().map(|v| v[a].clone()).min().unwrap();
                let hi = body.vertices().iter().map(|v| v[a].clone()).max().unwrap();
                let width = if hi == lo { Q::one() } else { hi - lo.clone() };
                let step = width.clone() / Q::int(2 * k as i64);
                let start = lo - width / Q::int(2);
                (0..=4 * k).map(|i| start.clone() + step.clone() * Q::int(i as i64)).collect()
            })
            .collect();
        let mut grid: Vec<Vec<Q>> = vec![Vec::new()];
        for axis in &axes {
            grid = grid
                .into_iter()
                .flat_map(|g| axis.iter().map(move |x| [g.clone(), vec![x.clone()]].concat()))
                .collect();
        }
        points.extend(grid);
    }
    points
}

fn membership_oracle() -> Outcome {
    let mut report = Vec::new();
    for name in catalog::BODIES {
        let body: ConvexBody<Q> = catalog::body(name).unwrap();
        if body.num_vertices() > 8 {
            continue;
        }
        let probes = probe_points(&body);
        if body.ambient_dim() > 0 {
            ensure(probes.len() >= 200, || format!("{name}: only {} probes", probes.len()))?;
        }
        let mut inside = 0;
        for p in &probes {
            let lp = body.contains_point(p).unwrap();
            ensure(lp == triangulation_member(&body, p), || format!("{name}: disagreement at {p:?}"))?;
            inside += lp as usize;
        }
        report.push(format!("{name} {inside}/{}", probes.len()));
    }
    println!("      probes inside/total: {}", report.join(", "));
    Ok(())
}

fn affine_spec(body: &ConvexBody<Q>, linear: [[i64; 2]; 2], den: i64, offset: [Q; 2]) -> DecoherenceSpec<Q> {
    let m = Matrix::from_rows(linear.iter().map(|r| r.iter().map(|&x| q(x, den)).collect()).collect(), 2).unwrap();
    let map = LinearMap::affine(body.clone(), body.clone(), &m, &offset).unwrap();
    DecoherenceSpec::new(body.clone(), map).unwrap()
}

fn purity_oracle() -> Outcome {
    let square: ConvexBody<Q> = catalog::gbit();
    let triangle: ConvexBody<Q> = catalog::simplex(3).unwrap();
    let zero = || Q::zero();
    let cases: Vec<(&str, DecoherenceSpec<Q>)> = vec![
        ("square identity", affine_spec(&square, [[1, 0], [0, 1]], 1, [zero(), zero()])),
        ("square midline", affine_spec(&square, [[1, 0], [0, 0]], 1, [zero(), q(1, 2)])),
        ("square edge-projection", affine_spec(&square, [[1, 0], [0, 0]], 1, [zero(), zero()])),
        ("square barycenter", affine_spec(&square, [[0, 0], [0, 0]], 1, [q(1, 2), q(1, 2)])),
        ("square reflection", affine_spec(&square, [[-1, 0], [0, 1]], 1, [Q::one(), zero()])),
        ("simplex-3 identity", affine_spec(&triangle, [[1, 0], [0, 1]], 1, [zero(), zero()])),
        ("simplex-3 midline", affine_spec(&triangle, [[2, 0], [-1, 0]], 2, [zero(), q(1, 2)])),
        ("simplex-3 edge-projection", affine_spec(&triangle, [[1, 1], [0, 0]], 1, [zero(), zero()])),
        ("simplex-3 barycenter", affine_spec(&triangle, [[0, 0], [0, 0]], 1, [q(1, 3), q(1, 3)])),
        ("simplex-3 reflection", affine_spec(&triangle, [[0, 1], [1, 0]], 1, [zero(), zero()])),
    ];
    let mut summary = Vec::new();
    for (name, spec) in &cases {
        let lattice = face_lattice(&spec.system, DEFAULT_MAX_FACES).unwrap();
        let decided = purity_by_face_pairs(spec, &lattice).unwrap();
        let grid: Vec<Vec<Q>> = (0..=8)
            .flat_map(|i| (0..=8).map(move |j| vec![q(i, 8), q(j, 8)]))
            .filter(|p| spec.system.contains_point(p).unwrap())
            .collect();
        let hits = grid.iter().filter(|p| violates_purity_at(spec, p).unwrap()).count();
        ensure(decided.is_some() == (hits > 0), || {
            format!("{name}: face pairs say {}, grid found {hits} violations", decided.is_some())
        })?;
        if let Some(w) = &decided {
            ensure(violates_purity_at(spec, &w.rho).unwrap(), || format!("{name}: witness does not violate"))?;
        }
        summary.push(format!("{name} {}", if decided.is_some() { "violates" } else { "ok" }));
    }
    println!("      {}", summary.join(", "));
    Ok(())
}

fn separability() -> Outcome {
    let g: ConvexBody<Q> = catalog::gbit();
    let state: Vec<Q> = [(1, 2), (1, 2), (1, 2), (1, 2), (0, 1), (1, 2), (1, 2), (1, 2), (1, 1)]
        .iter()
        .map(|&(n, d)| q(n, d))
        .collect();
    let cert = separability_certificate(&g, &g, &state).unwrap();
    let classlim::compose::SeparabilityCertificate::Entangled { witness } = &cert else {
        return Err("PR-box state reported separable".into());
    };
    ensure(dot(witness, &state).is_negative(), || "witness is not negative on the state".into())?;
    for i in 0..4 {
        for j in 0..4 {
            let product = linalg::tensor(&g.ray(i), &g.ray(j));
            ensure(!dot(witness, &product).is_negative(), || format!("witness negative on product vertex ({i}, {j})"))?;
            let c = separability_certificate(&g, &g, &product).unwrap();
            ensure(c.is_separable() && c.verify(&g, &g, &product), || format!("product ({i}, {j}) not separable"))?;
        }
    }
    Ok(())
}

fn lattice_counts() -> Outcome {
    for n in 1..=5 {
        let l = face_lattice(&catalog::simplex::<Q>(n).unwrap(), DEFAULT_MAX_FACES).unwrap();
        ensure(l.len() == 1 << n, || format!("simplex-{n}: {} faces", l.len()))?;
    }
    let square = face_lattice(&catalog::gbit::<Q>(), DEFAULT_MAX_FACES).unwrap();
    ensure(square.len() == 10, || format!("square: {} faces", square.len()))?;
    let cube = face_lattice(&catalog::cube::<Q>(3).unwrap(), DEFAULT_MAX_FACES).unwrap();
    ensure(cube.len() == 28, || format!("cube: {} faces", cube.len()))
}

type Criterion = (&'static str, u64, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("classical composition identity", 1, classical_composition),
        ("distributivity", 10, distributivity),
        ("star counterexample", 5, star_counterexample),
        ("purity-decreasing violator", 5, purity_violator),
        ("positive theorem instance", 10, prism_instance),
        ("degenerate classical instance", 1, degenerate_classical),
        ("membership oracle equivalence", 60, membership_oracle),
        ("purity oracle equivalence", 60, purity_oracle),
        ("separability certification", 5, separability),
        ("lattice combinatorics", 5, lattice_counts),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or(e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|_| {
            ensure(elapsed <= Duration::from_secs(*budget), || format!("exceeded the {budget} s budget"))
        });
        match outcome {
            Ok(()) => println!("PASS  {:>2} {name} ({:.2} s, budget {budget} s)", i + 1, elapsed.as_secs_f64()),
            Err(msg) => {
                failed += 1;
                println!("FAIL  {:>2} {name} ({:.2} s): {msg}", i + 1, elapsed.as_secs_f64());
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
