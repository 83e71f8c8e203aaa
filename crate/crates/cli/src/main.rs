use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use classlim::catalog::{self, Scenario};
use classlim::compose::{direct_sum, min_tensor, separability_certificate};
use classlim::convex::simplex_recognize;
use classlim::decoherence::{check_axioms, DecoherenceSpec, PurityMethod};
use classlim::face::{face_lattice, DEFAULT_MAX_FACES};
use classlim::io;
use classlim::report::Report;
use classlim::theorem::{check_classical_limit, verdict, VerifyOptions};
use classlim::{Body, Error, Rational};

#[derive(Parser)]
#[command(name = "classlim", version, about = "Exact checks for classical limits of polytope theories")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Write the JSON report here.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    /// Print the JSON report to standard output instead of the summary.
    #[arg(long, global = true)]
    json: bool,
    /// Abort when a face lattice would exceed this many faces.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_FACES)]
    max_faces: usize,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Require theories to declare their effect cone.
    #[arg(long, global = true)]
    strict_effects: bool,
    /// Decision procedure for the purity-decreasing axiom.
    #[arg(long, global = true, value_enum, default_value_t = Purity::FacePairs)]
    purity: Purity,
}

#[derive(Clone, Copy, ValueEnum)]
enum Purity {
    FacePairs,
    Vertices,
}

#[derive(Subcommand)]
enum Command {
    /// Vertices, dimensions and facets of a body.
    Inspect { body: String },
    /// Face lattice of a body.
    Faces { body: String },
    /// Min-tensor product or direct sum of two bodies.
    Compose {
        #[arg(long, conflicts_with = "direct_sum", required_unless_present = "direct_sum")]
        min_tensor: bool,
        #[arg(long)]
        direct_sum: bool,
        left: String,
        right: String,
        /// Fail unless the result is a simplex with this many vertices.
        #[arg(long)]
        expect_simplex: Option<usize>,
    },
    /// Separable decomposition or entanglement witness for a joint state.
    CertifySeparability {
        /// Theory or body file whose system names resolve the state's factors.
        #[arg(long)]
        theory: Option<String>,
        #[arg(long)]
        state: PathBuf,
    },
    /// Decoherence axioms: physicality, idempotence, purity-decreasing.
    CheckDecoherence { theory: String },
    /// Axioms plus simplex image, effect, transformation and composite lifting.
    CheckClassicalLimit { theory: String },
    /// Full verdict, with the product decomposition when one exists.
    VerifyTheorem { theory: String },
    /// Raises an internal error; exercises the exit path for invariant breaches.
    #[command(hide = true)]
    InternalErrorProbe,
    /// Built-in bodies and scenarios.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Subcommand)]
enum CatalogAction {
    List,
    Dump {
        name: String,
        /// TikZ coordinates and edges instead of JSON.
        #[arg(long)]
        tikz: bool,
    },
}

/// What a command produced: a summary for people, JSON for programs, and an exit code.
struct Outcome {
    summary: String,
    report: Value,
    code: u8,
}

impl Outcome {
    fn new(summary: impl Into<String>, report: Value, ok: bool) -> Self {
        Outcome { summary: summary.into(), report, code: if ok { 0 } else { 1 } }
    }
}

fn read_json(path: &Path) -> Result<Value, Error> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    io::parse_json(&text).map_err(|e| match e {
        Error::InvalidInput(msg) => Error::InvalidInput(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// `catalog:NAME` or a body file; a theory file resolves to its system.
fn load_body(reference: &str) -> Result<Body, Error> {
    if let Some(name) = reference.strip_prefix("catalog:") {
        return match catalog::body(name) {
            Ok(b) => Ok(b),
            Err(e) => match catalog::scenario::<Rational>(name) {
                Ok(Scenario::Theory(spec)) => Ok(spec.system.clone()),
                _ => Err(e),
            },
        };
    }
    let v = read_json(Path::new(reference))?;
    match v.get("system") {
        Some(system) => io::body_from_json(system),
        None => io::body_from_json(&v),
    }
}

fn load_theory(reference: &str) -> Result<DecoherenceSpec<Rational>, Error> {
    if let Some(name) = reference.strip_prefix("catalog:") {
        return match catalog::scenario(name)? {
            Scenario::Theory(spec) => Ok(*spec),
            Scenario::Note(text) => Err(Error::InvalidInput(format!("{name} has no exact theory: {text}"))),
        };
    }
    io::theory_from_json(&read_json(Path::new(reference))?)
}

fn stage_summary(stages: &[Report]) -> String {
    let mut out = String::new();
    for s in stages {
        out += &format!("  [{}] {}\n", if s.passed { "pass" } else { "FAIL" }, s.name);
        for c in s.checks.iter().filter(|c| !c.passed) {
            out += &format!("         {}: {}\n", c.name, c.detail);
        }
    }
    out
}

fn options(g: &Global) -> VerifyOptions {
    VerifyOptions {
        max_faces: g.max_faces,
        purity: match g.purity {
            Purity::FacePairs => PurityMethod::FacePairs,
            Purity::Vertices => PurityMethod::Vertices,
        },
        strict_effects: g.strict_effects,
    }
}

fn inspect(body: &Body) -> Outcome {
    let hrep = body.hrep();
    let report = json!({
        "body": io::body_json(body),
        "affine_dim": body.affine_dim(),
        "cone_dim": body.cone_dim(),
        "facets": hrep.facets.iter().map(|f| classlim::report::vector_json(f)).collect::<Vec<_>>(),
        "equalities": hrep.equalities.iter().map(|f| classlim::report::vector_json(f)).collect::<Vec<_>>(),
        "simplex": simplex_recognize(body).is_some(),
    });
    let summary = format!(
        "{}: {} vertices, ambient dimension {}, affine dimension {}, {} facets{}",
        body.name(),
        body.num_vertices(),
        body.ambient_dim(),
        body.affine_dim(),
        hrep.facets.len(),
        if simplex_recognize(body).is_some() { ", simplex" } else { "" }
    );
    Outcome::new(summary, report, true)
}

fn faces(body: &Body, g: &Global) -> Result<Outcome, Error> {
    let lattice = face_lattice(body, g.max_faces)?;
    let counts = lattice.counts_by_dim();
    let mut report = io::lattice_json(&lattice);
    report["counts_by_dim"] = json!(counts);
    let per_dim: Vec<String> = counts.iter().enumerate().map(|(i, c)| format!("dim {}: {c}", i as isize - 1)).collect();
    Ok(Outcome::new(format!("{}: {} faces ({})", body.name(), lattice.len(), per_dim.join(", ")), report, true))
}

fn compose(min: bool, left: &Body, right: &Body, expect: Option<usize>) -> Result<Outcome, Error> {
    let result = if min { min_tensor(left, right)?.result } else { direct_sum(left, right)?.result };
    let simplex = simplex_recognize(&result).map(|s| s.n);
    let ok = expect.is_none_or(|k| simplex == Some(k));
    let mut report = json!({ "result": io::body_json(&result), "simplex_vertices": simplex });
    if let Some(k) = expect {
        report["expect_simplex"] = json!({ "vertices": k, "passed": ok });
    }
    let summary = format!(
        "{}: {} vertices, affine dimension {}{}",
        result.name(),
        result.num_vertices(),
        result.affine_dim(),
        match (expect, ok) {
            (None, _) => String::new(),
            (Some(k), true) => format!(", simplex with {k} vertices as expected"),
            (Some(k), false) => format!(", expected a simplex with {k} vertices"),
        }
    );
    Ok(Outcome::new(summary, report, ok))
}

fn certify(theory: Option<&str>, state_path: &Path) -> Result<Outcome, Error> {
    let state = io::joint_state_from_json::<Rational>(&read_json(state_path)?)?;
    let known = theory.map(load_body).transpose()?;
    let resolve = |name: &str| match &known {
        Some(b) if b.name() == name => Ok(b.clone()),
        _ => catalog::body(name),
    };
    let (a, b) = (resolve(&state.left)?, resolve(&state.right)?);
    let cert = separability_certificate(&a, &b, &state.coords)?;
    let separable = cert.is_separable();
    let summary = if separable {
        format!("{}⊠{} state is separable", a.name(), b.name())
    } else {
        format!("{}⊠{} state is entangled; witness attached", a.name(), b.name())
    };
    Ok(Outcome::new(summary, io::separability_json(&cert), separable))
}

fn check_decoherence(spec: &DecoherenceSpec<Rational>, g: &Global) -> Result<Outcome, Error> {
    let opts = options(g);
    let axioms = check_axioms(spec, opts.purity, opts.max_faces)?;
    let mut report = serde_json::to_value(&axioms.report).expect("reports serialize");
    if let Some(w) = &axioms.purity_witness {
        report["purity_witness"] = json!({
            "rho": classlim::report::vector_json(&w.rho),
            "image": classlim::report::vector_json(&w.image),
            "faces": w.faces,
        });
    }
    let summary = format!(
        "decoherence axioms: {}\n{}",
        verdict_word(axioms.report.passed),
        stage_summary(std::slice::from_ref(&axioms.report))
    );
    Ok(Outcome::new(summary, report, axioms.report.passed))
}

fn verdict_word(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

fn classical_limit(spec: &DecoherenceSpec<Rational>, g: &Global) -> Result<Outcome, Error> {
    let stages = check_classical_limit(spec, &options(g))?;
    let ok = stages.len() == 5 && stages.iter().all(|s| s.passed);
    let summary = format!("classical limit: {}\n{}", verdict_word(ok), stage_summary(&stages));
    Ok(Outcome::new(summary, json!({ "passed": ok, "stages": stages }), ok))
}

fn verify(spec: &DecoherenceSpec<Rational>, g: &Global) -> Result<Outcome, Error> {
    let r = verdict(spec, &options(g))?;
    let summary = format!("{}\n  {}\n{}", r.verdict.as_str(), r.reason, stage_summary(&r.stages));
    Ok(Outcome { summary, report: r.to_json(), code: r.verdict.exit_code() as u8 })
}

fn tikz(body: &Body, g: &Global) -> Result<String, Error> {
    let mut out = format!("% {}\n", body.name());
    for (i, v) in body.vertices().iter().enumerate() {
        let coords: Vec<String> = v.iter().map(|x| format!("{:.4}", to_f64(x))).collect();
        out += &format!("\\coordinate (v{i}) at ({});\n", coords.join(", "));
    }
    let lattice = face_lattice(body, g.max_faces)?;
    for f in lattice.faces.iter().filter(|f| f.dim == 1) {
        out += &format!("\\draw (v{}) -- (v{});\n", f.vertices[0], f.vertices[1]);
    }
    Ok(out)
}

fn to_f64(x: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

fn catalog_cmd(action: &CatalogAction, g: &Global) -> Result<Outcome, Error> {
    match action {
        CatalogAction::List => {
            let report = json!({ "bodies": catalog::BODIES, "scenarios": catalog::SCENARIOS });
            let summary =
                format!("bodies: {}\nscenarios: {}", catalog::BODIES.join(", "), catalog::SCENARIOS.join(", "));
            Ok(Outcome::new(summary, report, true))
        }
        CatalogAction::Dump { name, tikz: as_tikz } => {
            let (report, body) = match catalog::body::<Rational>(name) {
                Ok(b) => (io::body_json(&b), b),
                Err(_) => match catalog::scenario::<Rational>(name)? {
                    Scenario::Theory(spec) => (io::theory_json(&spec), spec.system.clone()),
                    Scenario::Note(text) => {
                        return Ok(Outcome::new(text.clone(), json!({ "name": name, "note": text }), true))
                    }
                },
            };
            if *as_tikz {
                return Ok(Outcome::new(tikz(&body, g)?, report, true));
            }
            let text = serde_json::to_string_pretty(&report).expect("json");
            Ok(Outcome::new(text, report, true))
        }
    }
}

fn run(cli: &Cli) -> Result<Outcome, Error> {
    let g = &cli.global;
    match &cli.command {
        Command::Inspect { body } => Ok(inspect(&load_body(body)?)),
        Command::Faces { body } => faces(&load_body(body)?, g),
        Command::Compose { min_tensor, direct_sum: _, left, right, expect_simplex } => {
            compose(*min_tensor, &load_body(left)?, &load_body(right)?, *expect_simplex)
        }
        Command::CertifySeparability { theory, state } => certify(theory.as_deref(), state),
        Command::CheckDecoherence { theory } => check_decoherence(&load_theory(theory)?, g),
        Command::CheckClassicalLimit { theory } => classical_limit(&load_theory(theory)?, g),
        Command::VerifyTheorem { theory } => verify(&load_theory(theory)?, g),
        Command::Catalog { action } => catalog_cmd(action, g),
        Command::InternalErrorProbe => Err(Error::Internal("probe".into())),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.global.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global() {
            eprintln!("error: cannot configure {jobs} worker threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(outcome) => {
            if let Some(path) = &cli.global.report {
                let text = serde_json::to_string_pretty(&outcome.report).expect("json") + "\n";
                if let Err(e) = fs::write(path, text) {
                    eprintln!("error: cannot write report to {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            if cli.global.json {
                println!("{}", serde_json::to_string_pretty(&outcome.report).expect("json"));
            } else {
                println!("{}", outcome.summary.trim_end());
            }
            ExitCode::from(outcome.code)
        }
        Err(Error::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            eprintln!("This is a bug. Please file a report with the exact command line and input files attached.");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
