use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use epb_core::bounds::{fractional_packing, independence_number, lovasz_theta, BoundReport};
use epb_core::events::{Event, Registry};
use epb_core::graph::{chsh_graph, ExclusivityGraph};
use epb_core::proof::{
    build_table1, enumerate_nine_sets, general_bound, sum_identity_residual, symmetric_bound,
    verify_set, NineEventSet, ProofError, ProofReport, SetVerification,
};
use epb_core::scenario::{chsh_functional, random_chsh_behavior};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::{usage, Command, Format, GraphFormat, Method, Mode, NamedGraph, VerificationFailed};

pub const DEFAULT_SEED: u64 = 1;
const IDENTITY_TOLERANCE: f64 = 1e-9;
const SEED_VAR: &str = "EPB_SEED";

pub fn run(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Bounds {
            graph,
            graph_file,
            method,
            format,
        } => bounds(graph, graph_file.as_deref(), method, format, out),
        Command::Table1 { verify, p, format } => table1(verify, p, format, out),
        Command::Enumerate { ninth, format } => enumerate(&ninth, format, out),
        Command::Prove { mode, format } => prove(mode, format, out),
        Command::Graph {
            scenario,
            format,
            out: path,
        } => graph(scenario, format, path.as_deref(), out),
        Command::IdentityCheck {
            samples,
            seed,
            format,
        } => identity_check(samples, seed, format, out),
    }
}

fn decimal(x: f64) -> String {
    format!("{x:.10}")
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

#[derive(Serialize)]
struct GraphSummary {
    source: String,
    vertices: usize,
    edges: usize,
    fingerprint: String,
}

#[derive(Serialize)]
struct BoundsOutput {
    graph: GraphSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    lr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fractional_packing: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta: Option<f64>,
    reports: Vec<BoundReport>,
    certificates_verified: bool,
}

fn load_graph(
    named: Option<NamedGraph>,
    file: Option<&Path>,
) -> Result<(String, ExclusivityGraph)> {
    match (named, file) {
        (Some(NamedGraph::Chsh), _) => Ok(("chsh".into(), chsh_graph())),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
            let g = ExclusivityGraph::from_json(&text)
                .map_err(|e| usage(format!("{}: {e}", path.display())))?;
            Ok((path.display().to_string(), g))
        }
        (None, None) => Err(usage("one of --graph or --graph-file is required")),
    }
}

fn bounds(
    named: Option<NamedGraph>,
    file: Option<&Path>,
    method: Method,
    format: Format,
    out: &mut dyn Write,
) -> Result<()> {
    let (source, g) = load_graph(named, file)?;
    let wants = |m: Method| method == m || method == Method::All;
    let mut reports = Vec::new();
    let mut output = BoundsOutput {
        graph: GraphSummary {
            source,
            vertices: g.len(),
            edges: g.edge_count(),
            fingerprint: g.fingerprint(),
        },
        lr: None,
        fractional_packing: None,
        theta: None,
        reports: Vec::new(),
        certificates_verified: true,
    };
    if wants(Method::Lr) {
        let r = independence_number(&g).context("independence number")?;
        output.lr = Some(r.value);
        reports.push(r);
    }
    if wants(Method::Fp) {
        let r = fractional_packing(&g).context("fractional packing")?;
        output.fractional_packing = Some(r.value);
        reports.push(r);
    }
    if wants(Method::Theta) {
        let r = lovasz_theta(&g).context("Lovász theta")?;
        output.theta = Some(r.value);
        reports.push(r);
    }
    let failures: Vec<String> = reports
        .iter()
        .filter_map(|r| {
            r.verify(&g)
                .err()
                .map(|e| format!("{}: {e}", r.method.as_str()))
        })
        .collect();
    output.certificates_verified = failures.is_empty();
    output.reports = reports;
    match format {
        Format::Json => write_json(out, &output)?,
        Format::Text => {
            let s = &output.graph;
            writeln!(
                out,
                "graph: {} ({} vertices, {} edges)",
                s.source, s.vertices, s.edges
            )?;
            for (name, value) in [
                ("lr", output.lr),
                ("fractional_packing", output.fractional_packing),
                ("theta", output.theta),
            ] {
                if let Some(v) = value {
                    writeln!(out, "{name} = {}", decimal(v))?;
                }
            }
            writeln!(
                out,
                "certificates: {}",
                if failures.is_empty() {
                    "verified"
                } else {
                    "FAILED"
                }
            )?;
        }
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(VerificationFailed(failures.join("; ")).into())
    }
}

#[derive(Serialize)]
struct Row {
    name: String,
    event: String,
    probability: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<f64>,
}

#[derive(Serialize)]
struct SetOutput {
    label: String,
    ninth: String,
    rows: Vec<Row>,
    #[serde(skip_serializing_if = "Option::is_none")]
    table1: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verification: Option<SetVerification>,
}

fn set_output(set: &NineEventSet, p: Option<f64>, verify: bool) -> SetOutput {
    SetOutput {
        label: set.label.clone(),
        ninth: set.ninth().map(Event::to_string).unwrap_or_default(),
        rows: set
            .names
            .iter()
            .zip(&set.events)
            .zip(&set.probabilities)
            .map(|((name, event), prob)| Row {
                name: name.clone(),
                event: event.to_string(),
                probability: prob.render(),
                value: p.and_then(|p| prob.eval_f64(p)),
            })
            .collect(),
        table1: None,
        verification: verify.then(|| verify_set(set)),
    }
}

fn write_sets_text(out: &mut dyn Write, sets: &[SetOutput]) -> Result<()> {
    for set in sets {
        let status = match &set.verification {
            Some(v) if v.verified => {
                format!(": verified, {} pairs exclusive", v.exclusivity.pairs.len())
            }
            Some(v) => format!(": FAILED, non-exclusive pairs {:?}", v.exclusivity.failures),
            None => String::new(),
        };
        let matched = set
            .table1
            .as_ref()
            .map(|t| format!(" (table set {t})"))
            .unwrap_or_default();
        writeln!(out, "set {}{matched}{status}", set.label)?;
        for row in &set.rows {
            let value = row
                .value
                .map(|v| format!(" = {}", decimal(v)))
                .unwrap_or_default();
            writeln!(
                out,
                "  {:<8} {:<28} {}{value}",
                row.name, row.event, row.probability
            )?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct Table1Output {
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    sets: Vec<SetOutput>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exclusivity_checks: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verified: Option<bool>,
}

fn table1(verify: bool, p: Option<f64>, format: Format, out: &mut dyn Write) -> Result<()> {
    if let Some(p) = p {
        if !(0.0..=0.5).contains(&p) {
            return Err(usage(format!("--p {p} is outside [0, 1/2]")));
        }
    }
    let sets: Vec<SetOutput> = build_table1()
        .iter()
        .map(|s| set_output(s, p, verify))
        .collect();
    let verified = verify.then(|| {
        sets.iter()
            .all(|s| s.verification.as_ref().is_some_and(|v| v.verified))
    });
    let output = Table1Output {
        p,
        exclusivity_checks: verify.then(|| {
            sets.iter()
                .filter_map(|s| s.verification.as_ref())
                .map(|v| v.exclusivity.pairs.len())
                .sum()
        }),
        verified,
        sets,
    };
    match format {
        Format::Json => write_json(out, &output)?,
        Format::Text => {
            write_sets_text(out, &output.sets)?;
            if let (Some(ok), Some(n)) = (output.verified, output.exclusivity_checks) {
                writeln!(
                    out,
                    "{n} exclusivity checks: {}",
                    if ok { "all passed" } else { "FAILED" }
                )?;
            }
        }
    }
    match verified {
        Some(false) => Err(VerificationFailed("a set failed verification".into()).into()),
        _ => Ok(()),
    }
}

#[derive(Serialize)]
struct EnumerateOutput {
    ninth: String,
    count: usize,
    sets: Vec<SetOutput>,
    verified: bool,
}

fn enumerate(ninth: &str, format: Format, out: &mut dyn Write) -> Result<()> {
    let registry = Registry::two_copy_chsh();
    let event = Event::parse(&registry, ninth).map_err(|e| usage(format!("--ninth: {e}")))?;
    let sets = enumerate_nine_sets(&event).map_err(|e| match e {
        ProofError::InvalidNinthEvent(_) => usage(e.to_string()),
        other => other.into(),
    })?;
    let table = build_table1();
    let sets: Vec<SetOutput> = sets
        .iter()
        .map(|s| {
            let mut o = set_output(s, None, true);
            o.table1 = table
                .iter()
                .find(|t| t.same_events(s))
                .map(|t| t.label.clone());
            o
        })
        .collect();
    let verified = sets
        .iter()
        .all(|s| s.verification.as_ref().is_some_and(|v| v.verified));
    let output = EnumerateOutput {
        ninth: event.to_string(),
        count: sets.len(),
        sets,
        verified,
    };
    match format {
        Format::Json => write_json(out, &output)?,
        Format::Text => {
            writeln!(out, "{} sets around {}", output.count, output.ninth)?;
            write_sets_text(out, &output.sets)?;
        }
    }
    if verified {
        Ok(())
    } else {
        Err(VerificationFailed("an enumerated set failed verification".into()).into())
    }
}

fn prove(mode: Mode, format: Format, out: &mut dyn Write) -> Result<()> {
    let report: ProofReport = match mode {
        Mode::Symmetric => symmetric_bound(),
        Mode::General => general_bound(),
    }
    .map_err(|e| VerificationFailed(e.to_string()))?;
    match format {
        Format::Json => write_json(out, &report)?,
        Format::Text => {
            for (k, step) in report.steps.iter().enumerate() {
                writeln!(out, "{}. {step}", k + 1)?;
            }
            writeln!(out, "assumptions:")?;
            for a in &report.assumptions {
                writeln!(out, "  {}: {}", a.name, a.statement)?;
            }
            writeln!(
                out,
                "{} <= {} = {}",
                report.variable, report.bound.exact, report.bound.decimal
            )?;
            if report.variable != "S" {
                writeln!(
                    out,
                    "S <= {} = {}",
                    report.chsh_bound.exact, report.chsh_bound.decimal
                )?;
            }
        }
    }
    Ok(())
}

fn graph(
    scenario: NamedGraph,
    format: GraphFormat,
    path: Option<&Path>,
    out: &mut dyn Write,
) -> Result<()> {
    let g = match scenario {
        NamedGraph::Chsh => chsh_graph(),
    };
    let mut text = match format {
        GraphFormat::Dot => g.export_dot(),
        GraphFormat::Json => g.to_json(),
    };
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| usage(format!("cannot write {}: {e}", p.display())))?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

#[derive(Serialize)]
struct Sample {
    s: f64,
    residual: f64,
}

#[derive(Serialize)]
struct IdentityOutput {
    seed: u64,
    samples: usize,
    tolerance: f64,
    max_residual: f64,
    passed: bool,
    results: Vec<Sample>,
}

fn identity_check(samples: usize, seed: u64, format: Format, out: &mut dyn Write) -> Result<()> {
    let seed = match std::env::var(SEED_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| usage(format!("{SEED_VAR}={v} is not an unsigned integer")))?,
        Err(_) => seed,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut results = Vec::with_capacity(samples);
    for _ in 0..samples {
        let b = random_chsh_behavior(&mut rng);
        results.push(Sample {
            s: chsh_functional(&b)?,
            residual: sum_identity_residual(&b)?,
        });
    }
    let max_residual = results.iter().map(|r| r.residual).fold(0.0, f64::max);
    let output = IdentityOutput {
        seed,
        samples,
        tolerance: IDENTITY_TOLERANCE,
        max_residual,
        passed: max_residual <= IDENTITY_TOLERANCE,
        results,
    };
    match format {
        Format::Json => write_json(out, &output)?,
        Format::Text => {
            writeln!(out, "seed {seed}, {samples} samples")?;
            writeln!(
                out,
                "max residual {max_residual:.3e} (tolerance {IDENTITY_TOLERANCE:e}): {}",
                if output.passed { "passed" } else { "FAILED" }
            )?;
        }
    }
    if output.passed {
        Ok(())
    } else {
        Err(VerificationFailed(format!(
            "max residual {max_residual:e} exceeds {IDENTITY_TOLERANCE:e}"
        ))
        .into())
    }
}
