//! Command dispatch, result documents and exit codes for the `dcohom` tool.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use dcohom_core::catalog;
use dcohom_core::center::{center_truncated, commutators_span};
use dcohom_core::de_rham::{dr_cohomology_dims, dr_dims_of_chart, exactness, Exactness, NonExactness};
use dcohom_core::deform::{c1_derivation, trivialize_deformation, verify_singular_extension, Trivialization};
use dcohom_core::diffop::Filtration;
use dcohom_core::forms::{de_rham_d, DifferentialForm};
use dcohom_core::hochschild::{is_inner, solve_derivations, Derivation};
use dcohom_core::koszul::{hh_homology_via_koszul, hh_via_koszul, CohomologyReport};
use dcohom_core::parse::{parse_form, parse_space};
use dcohom_core::resolution::{resolution_report, ResolutionReport};
use dcohom_core::koszul::KoszulGenerator;
use dcohom_core::space::{Space, SpaceSpec};
use dcohom_core::Error;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_WINDOW: u32 = 6;
/// Filtration bound for the multiplicativity checks behind `deform`.
pub const DEFORM_BOUND: u32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Dr,
    Hh,
    Hhom,
    Vdb,
    Kunneth,
    Center,
    Outer,
    Deform,
    ResolutionCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Dr => "dr",
            Command::Hh => "hh",
            Command::Hhom => "hhom",
            Command::Vdb => "vdb",
            Command::Kunneth => "kunneth",
            Command::Center => "center",
            Command::Outer => "outer",
            Command::Deform => "deform",
            Command::ResolutionCheck => "resolution-check",
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Options {
    pub window: Option<u32>,
    pub omega: Option<String>,
    pub lambda: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// Distinct nonzero exit code per failure kind; 1 is reserved for a
    /// completed run whose checks failed and 2 for argument errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) => match e {
                Error::Parse { .. } => 3,
                Error::NotSquarefree(_) => 4,
                Error::UnsupportedSpace(_) => 5,
                Error::NotClosed => 6,
                Error::InvalidDegree(_) => 7,
                Error::InvalidWindow(_) => 8,
                Error::NotStabilized(_) => 9,
                Error::BoundExceeded => 10,
                Error::UndefinedClass(_) => 11,
                Error::TwistMismatch => 12,
                Error::ExtensionAxiomFailure(_) => 13,
                Error::NotADerivation(_) => 14,
                Error::CenterMismatch(_) => 15,
                Error::ReductionFailure(_) => 16,
                Error::SpaceMismatch => 17,
                Error::Containment => 18,
                Error::DegreeOverflow { .. } => 19,
                Error::NegativeExponent { .. } => 20,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessEntry {
    pub kind: String,
    pub expr: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub schema_version: u32,
    pub command: String,
    pub space: String,
    /// Per-degree dimensions keyed by route.
    pub dims: BTreeMap<String, Vec<usize>>,
    /// Window each route was computed at.
    pub windows: BTreeMap<String, u32>,
    pub stabilized: Vec<bool>,
    pub witnesses: Vec<WitnessEntry>,
    pub status: Status,
}

impl ResultDocument {
    pub fn new(command: &str, space: &SpaceSpec) -> Self {
        ResultDocument {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            space: space.to_string(),
            dims: BTreeMap::new(),
            windows: BTreeMap::new(),
            stabilized: Vec::new(),
            witnesses: Vec::new(),
            status: Status::Pass,
        }
    }

    fn route(&mut self, name: &str, window: u32, dims: Vec<usize>) {
        self.dims.insert(name.to_string(), dims);
        self.windows.insert(name.to_string(), window);
    }

    fn witness(&mut self, kind: &str, expr: impl Into<String>) {
        self.witnesses.push(WitnessEntry {
            kind: kind.to_string(),
            expr: expr.into(),
        });
    }

    fn require(&mut self, ok: bool) {
        if !ok {
            self.status = Status::Fail;
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Pass => 0,
            Status::Fail => 1,
        }
    }
}

/// Serializes `doc`; JSON output has a fixed field order.
pub fn emit(doc: &ResultDocument, json: bool) -> String {
    if json {
        let mut s = serde_json::to_string_pretty(doc).expect("document serializes");
        s.push('\n');
        return s;
    }
    let mut out = String::new();
    let _ = writeln!(out, "command: {}", doc.command);
    let _ = writeln!(out, "space:   {}", doc.space);
    if !doc.dims.is_empty() {
        let _ = writeln!(out, "{:<14} {:>6}  dims", "route", "window");
        for (route, dims) in &doc.dims {
            let w = doc.windows.get(route).map_or("-".to_string(), |w| w.to_string());
            let _ = writeln!(out, "{route:<14} {w:>6}  {dims:?}");
        }
    }
    let _ = writeln!(out, "stabilized: {:?}", doc.stabilized);
    for w in &doc.witnesses {
        let _ = writeln!(out, "{}: {}", w.kind, w.expr);
    }
    let _ = writeln!(out, "status: {}", if doc.status == Status::Pass { "PASS" } else { "FAIL" });
    out
}

pub fn parse_document(json: &str) -> serde_json::Result<ResultDocument> {
    serde_json::from_str(json)
}

/// Runs `f` at `window`, retrying at `window + 2` if it does not stabilize.
/// A second failure yields the unstable report.
fn escalate<T>(
    window: u32,
    f: impl Fn(u32) -> Result<T, Error>,
    unstable: impl Fn(CohomologyReport) -> T,
) -> Result<(T, u32), Error> {
    match f(window) {
        Err(Error::NotStabilized(_)) => match f(window + 2) {
            Err(Error::NotStabilized(report)) => Ok((unstable(*report), window + 2)),
            other => other.map(|t| (t, window + 2)),
        },
        other => other.map(|t| (t, window)),
    }
}

fn koszul(spec: &SpaceSpec, window: u32, homology: bool) -> Result<(CohomologyReport, u32), Error> {
    escalate(
        window,
        |w| {
            let f = Filtration::square(w);
            if homology {
                hh_homology_via_koszul(spec, f)
            } else {
                hh_via_koszul(spec, f)
            }
        },
        |r| r,
    )
}

/// De Rham dimensions with a per-degree stabilization flag.
fn de_rham(spec: &SpaceSpec, window: u32) -> Result<((Vec<usize>, Vec<bool>), u32), Error> {
    escalate(
        window,
        |w| dr_cohomology_dims(spec, w).map(|d| {
            let n = d.len();
            (d, vec![true; n])
        }),
        |r| (r.dims, r.stabilized),
    )
}

fn padded(dims: &[usize], len: usize) -> Vec<usize> {
    let mut out = dims.to_vec();
    out.resize(len.max(dims.len()), 0);
    out
}

fn describe_certificate(cert: &NonExactness) -> String {
    match cert {
        NonExactness::Multidegree {
            obstruction,
            potential_space_dim,
            image_rank,
        } => format!(
            "multidegree-0 part {obstruction} survives; multidegree-0 potentials span {potential_space_dim} dimensions and d has rank {image_rank} on them"
        ),
        NonExactness::HermiteResidue { residue } => {
            format!("Hermite reduction leaves the nonzero residue {residue}")
        }
    }
}

fn describe_derivation(space: &Space, d: &Derivation) -> String {
    let r = space.num_vars();
    let mut parts = Vec::new();
    for i in 0..r {
        parts.push(format!("x{} -> {}", i + 1, d.coordinate_image(i)));
    }
    for i in 0..r {
        parts.push(format!("d{} -> {}", i + 1, d.partial_image(i)));
    }
    parts.join(", ")
}

fn required_form(space: &Arc<Space>, expr: &Option<String>, flag: &str) -> Result<DifferentialForm, CliError> {
    let src = expr
        .as_deref()
        .ok_or_else(|| CliError::Usage(format!("--{flag} is required for this command")))?;
    Ok(parse_form(space, src)?)
}

pub fn run(command: Command, space_expr: &str, options: &Options) -> Result<ResultDocument, CliError> {
    let spec = parse_space(space_expr)?;
    run_command(command, &spec, options)
}

pub fn run_command(command: Command, spec: &SpaceSpec, options: &Options) -> Result<ResultDocument, CliError> {
    let mut doc = ResultDocument::new(command.name(), spec);
    let r = spec.dimension();
    let window = options.window.unwrap_or(match command {
        // the bimodule complex grows like the square of the PBW window
        Command::ResolutionCheck if r >= 2 => 2,
        Command::ResolutionCheck => 3,
        _ => DEFAULT_WINDOW,
    });
    match command {
        Command::Dr => {
            let ((dims, stable), w) = de_rham(spec, window)?;
            if let Some(expected) = catalog::lookup(&doc.space).and_then(|e| e.expected) {
                doc.witness("golden", format!("{expected:?}"));
                doc.require(expected == dims);
            }
            doc.route("de-rham", w, dims);
            doc.require(stable.iter().all(|s| *s));
            doc.stabilized = stable;
        }
        Command::Hh => {
            let (report, kw) = koszul(spec, window, false)?;
            let ((dr, dr_stable), dw) = de_rham(spec, window)?;
            let agree = padded(&dr, 2 * r + 1) == report.dims;
            doc.witness("comparison", if agree { "koszul = de-rham" } else { "koszul != de-rham" });
            doc.require(agree);
            doc.route("koszul", kw, report.dims.clone());
            doc.route("de-rham", dw, dr);
            doc.stabilized = report.stabilized.clone();
            doc.stabilized.extend(dr_stable);
            doc.require(doc.stabilized.iter().all(|s| *s));
        }
        Command::Hhom => {
            let (report, kw) = koszul(spec, window, true)?;
            let hh0_vanishes = report.dims.first() == Some(&0);
            doc.require(hh0_vanishes && report.is_stabilized());
            if hh0_vanishes {
                doc.witness("highlight", "HH_0 = 0");
            }
            let reduced = commutators_span(spec, Filtration::square(window))?;
            doc.witness(
                "commutator-reduction",
                format!("every PBW monomial within ({window}, {window}) is a sum of commutators"),
            );
            doc.require(reduced);
            doc.route("koszul", kw, report.dims.clone());
            doc.stabilized = report.stabilized;
        }
        Command::Vdb => {
            let (co, cw) = koszul(spec, window, false)?;
            let (ho, hw) = koszul(spec, window, true)?;
            let dual = co.dims.len() == ho.dims.len() && co.dims.iter().eq(ho.dims.iter().rev());
            let concentrated = ho.dims.iter().enumerate().all(|(n, d)| *d == 0 || (r..=2 * r).contains(&n));
            doc.witness("duality", if dual { "HH^n = HH_{2r-n}" } else { "duality fails" });
            doc.witness(
                "concentration",
                if concentrated { format!("HH_n = 0 outside {r}..{}", 2 * r) } else { "homology outside r..2r".into() },
            );
            doc.require(dual && concentrated);
            doc.route("cohomology", cw, co.dims.clone());
            doc.route("homology", hw, ho.dims.clone());
            doc.stabilized = co.stabilized.iter().chain(&ho.stabilized).copied().collect();
            doc.require(doc.stabilized.iter().all(|s| *s));
        }
        Command::Kunneth => {
            let ((product, stable), w) = de_rham(spec, window)?;
            let chart = dr_dims_of_chart(&spec.flatten()?, w)?;
            doc.require(product == chart && stable.iter().all(|s| *s));
            doc.route("kunneth", w, product);
            doc.route("chart", w, chart);
            doc.stabilized = stable;
        }
        Command::Center => {
            let basis = center_truncated(spec, Filtration::square(window))?;
            let exprs: Vec<String> = basis.iter().map(ToString::to_string).collect();
            doc.witness("center-basis", exprs.join(", "));
            doc.route("center", window, vec![basis.len()]);
            doc.stabilized = vec![true];
        }
        Command::Outer => {
            let space = spec.flatten()?;
            let (solve, w) = escalate(
                window,
                |w| solve_derivations(spec, Filtration::square(w)).map(Some),
                |_| None,
            )?;
            let ((dr, dr_stable), dw) = de_rham(spec, window)?;
            let h1 = dr.get(1).copied().unwrap_or(0);
            doc.route("de-rham-h1", dw, vec![h1]);
            match solve {
                Some(s) => {
                    doc.route("outer", w, vec![s.outer_dim]);
                    doc.require(s.outer_dim == h1);
                    doc.stabilized.push(true);
                }
                None => {
                    doc.stabilized.push(false);
                    doc.require(false);
                }
            }
            doc.stabilized.extend(dr_stable);
            doc.require(doc.stabilized.iter().all(|s| *s));
            if options.lambda.is_some() {
                let lambda = required_form(&space, &options.lambda, "lambda")?;
                let d = c1_derivation(&lambda)?;
                // re-check Leibniz before emitting the derivation
                if let Some(rel) = d.violated_relation() {
                    return Err(Error::NotADerivation(rel).into());
                }
                doc.witness("c1", describe_derivation(&space, &d));
                let inner = is_inner(&d, Filtration::square(w));
                let exact = matches!(exactness(&lambda)?, Exactness::Exact(_));
                doc.witness(
                    "class",
                    if inner { format!("inner within ({w}, {w})") } else { format!("not inner within ({w}, {w})") },
                );
                doc.require(inner == exact);
            }
        }
        Command::Deform => {
            let space = spec.flatten()?;
            let omega = required_form(&space, &options.omega, "omega")?;
            let bound = Filtration::square(DEFORM_BOUND);
            verify_singular_extension(spec, &omega, Filtration::square(1))?;
            doc.witness("extension", "singular extension axioms verified within (1, 1)");
            match trivialize_deformation(spec, &omega, bound)? {
                Trivialization::Trivial { potential, .. } => {
                    // re-check dβ = ω before emitting β
                    doc.require(de_rham_d(&potential)? == omega);
                    doc.witness("verdict", "trivial");
                    doc.witness("potential", potential.to_string());
                    doc.witness(
                        "trivialization",
                        format!(
                            "u + t v -> u + t (eta(u) + v) with eta(d_i) = beta(d_i), multiplicative within ({DEFORM_BOUND}, {DEFORM_BOUND})"
                        ),
                    );
                }
                Trivialization::NonTrivial(cert) => {
                    doc.witness("verdict", "non-trivial");
                    doc.witness("certificate", describe_certificate(&cert));
                }
            }
            doc.stabilized = vec![true];
        }
        Command::ResolutionCheck => {
            let report: ResolutionReport =
                resolution_report(spec, Filtration::square(window), &KoszulGenerator::all(r))?;
            doc.route("cycles", window, report.cycles.clone());
            doc.route("boundaries", window, report.boundaries.clone());
            doc.witness(
                "squares-to-zero",
                if report.squares_to_zero { "true" } else { "false" },
            );
            doc.require(report.is_exact());
            doc.stabilized = vec![true];
        }
    }
    Ok(doc)
}
