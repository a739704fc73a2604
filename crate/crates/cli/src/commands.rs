use std::collections::BTreeSet;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, ValueEnum};
use rotforge::circuits::{build_circuit, Faults, ProtocolKind};
use rotforge::cost::{build_cost_table, CostTable, NodeId, Resource};
use rotforge::dilution::{critical_level, dilute as dilute_once, dilution_chain, dilution_reduces_error};
use rotforge::noise::{appe_formulas, leading_order, simulate_round, NoiseSpec};
use rotforge::sweep::{regime, sweep_report, write_csv, RowStatus};
use rotforge::synthesis::{approximate_angle, convert_precision, gs_rotation_cost, Metric, PrecisionValue, TCount};
use rotforge::verify::{run_suite, VerifyOptions};
use rotforge::{cost::Supply, synthesis::SynthesisModel};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Format, RunConfig};
use crate::Fault;

const VERSION: &str = env!("CARGO_PKG_VERSION");

fn envelope(command: &str, cfg: &RunConfig, result: impl Serialize) -> anyhow::Result<Value> {
    Ok(json!({ "command": command, "version": VERSION, "config": cfg, "result": result }))
}

fn write_json(out: &mut impl Write, value: &Value) -> anyhow::Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) => map.iter().for_each(|(k, v)| flatten(&key(k), v, rows)),
        Value::Array(items) => items.iter().enumerate().for_each(|(i, v)| flatten(&key(&i.to_string()), v, rows)),
        Value::Null => rows.push((prefix.to_string(), String::new())),
        Value::String(s) => rows.push((prefix.to_string(), s.clone())),
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}

fn csv_writer(out: impl Write) -> csv::Writer<impl Write> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

/// JSON envelope, or `key,value` rows of the same envelope flattened.
fn emit(out: &mut impl Write, command: &str, cfg: &RunConfig, result: impl Serialize) -> anyhow::Result<()> {
    let value = envelope(command, cfg, result)?;
    match cfg.format_or(Format::Json) {
        Format::Json => write_json(out, &value),
        Format::Csv => {
            let mut rows = Vec::new();
            flatten("", &value, &mut rows);
            let mut w = csv_writer(out);
            w.write_record(["key", "value"])?;
            for (k, v) in rows {
                w.write_record([k, v])?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

/// Config echo for outputs whose stdout is a fixed-column table.
fn echo_to_stderr(command: &str, cfg: &RunConfig) -> anyhow::Result<()> {
    eprintln!("# rotforge {VERSION} {command} config {}", serde_json::to_string(cfg)?);
    Ok(())
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Monte Carlo trials for the generic-noise bound.
    #[arg(long, default_value_t = 200)]
    trials: usize,
    /// Plant a fault in the circuits (negative control).
    #[arg(long, value_enum, hide = true)]
    inject_fault: Option<Fault>,
}

pub fn verify(cfg: &RunConfig, a: &VerifyArgs, out: &mut impl Write) -> anyhow::Result<bool> {
    let faults = Faults { flip_pivot_sign: a.inject_fault == Some(Fault::FlipPivotSign) };
    let opts = VerifyOptions { seed: cfg.seed, trials: a.trials, faults, ..Default::default() };
    let report = run_suite(&opts)?;
    for c in &report.checks {
        let level = c.level.map(|l| format!(" ℓ={l}")).unwrap_or_default();
        let mark = if c.passed { "ok  " } else { "FAIL" };
        eprintln!("{mark} {}{level}: {:.3e} (tolerance {:.1e})", c.name, c.deviation, c.tolerance);
    }
    for e in &report.errata {
        eprintln!("{} {}: {}", if e.flagged { "ERRATUM" } else { "clear  " }, e.id, e.message);
    }
    match cfg.format_or(Format::Json) {
        Format::Json => {
            let options = json!({ "trials": a.trials, "levels": opts.levels, "fault": a.inject_fault.is_some() });
            let mut value = envelope("verify", cfg, &report)?;
            value["options"] = options;
            write_json(out, &value)?;
        }
        Format::Csv => {
            echo_to_stderr("verify", cfg)?;
            let mut w = csv_writer(out);
            w.write_record(["kind", "name", "level", "value", "reference", "status"])?;
            for c in &report.checks {
                let level = c.level.map(|l| l.to_string()).unwrap_or_default();
                let status = if c.passed { "pass" } else { "fail" };
                w.write_record(["check", &c.name, &level, &format!("{:e}", c.deviation), &format!("{:e}", c.tolerance), status])?;
            }
            for e in &report.errata {
                let status = if e.flagged { "flagged" } else { "clear" };
                w.write_record(["erratum", e.id, "", &format!("{:e}", e.measured), &format!("{:e}", e.printed), status])?;
            }
            w.flush()?;
        }
    }
    Ok(report.passed)
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Level of the round.
    #[arg(long = "l", value_name = "L")]
    level: u32,
    /// Y-flip probability at each level-3 site.
    #[arg(long, default_value_t = 0.0)]
    eps3: f64,
    /// Error of each level-ℓ input.
    #[arg(long, default_value_t = 0.0)]
    epsl: f64,
    /// Y-flip probability of the pivotal rotation.
    #[arg(long, default_value_t = 0.0)]
    eta: f64,
    /// Round to simulate.
    #[arg(long, default_value = "mek", value_parser = parse_protocol)]
    protocol: ProtocolKind,
}

fn parse_protocol(s: &str) -> Result<ProtocolKind, String> {
    s.parse::<ProtocolKind>().map_err(|e| e.to_string())
}

/// Twelve significant digits: far above simulator roundoff, far below anything physical.
fn sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float")
}

fn rel(got: f64, reference: f64) -> Option<f64> {
    (reference != 0.0).then(|| sig((got - reference) / reference))
}

pub fn simulate(cfg: &RunConfig, a: &SimulateArgs, out: &mut impl Write) -> anyhow::Result<()> {
    let noise = NoiseSpec::new(a.eps3, a.epsl, a.eta)?;
    let r = simulate_round(&build_circuit(a.protocol, a.level)?, &noise)?;
    let lo = leading_order(&noise);
    let protocol = match a.protocol {
        ProtocolKind::Mek => "mek",
        ProtocolKind::Dp => "dp",
    };
    let mut result = json!({
        "protocol": protocol,
        "level": a.level,
        "noise": noise,
        "delta": sig(r.delta),
        "delta_partner": sig(r.delta_partner),
        "p_suc": sig(r.p_suc),
        "p_fail": sig(r.p_fail),
        // exactly zero under diagonal noise; anything this small is roundoff
        "coherence": if r.coherence < 1e-14 { 0.0 } else { sig(r.coherence) },
        "leading_order": { "delta": lo.delta, "p_suc": lo.p_suc },
        "relative_to_leading_order": { "delta": rel(r.delta, lo.delta), "p_suc": rel(r.p_suc, lo.p_suc) },
    });
    if a.protocol == ProtocolKind::Mek {
        let f = appe_formulas(&noise);
        result["closed_form"] = json!({
            "printed_acceptance_expression": f.p_expr,
            "printed_delta": f.delta_verbatim,
            "corrected_p_suc": f.p_suc_corrected,
            "corrected_delta": f.delta_corrected,
        });
    }
    emit(out, "simulate", cfg, result)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ResourceArg {
    Magic,
    Rotation,
}

#[derive(Args, Debug)]
pub struct CostArgs {
    /// Level of the state or rotation.
    #[arg(long = "l", value_name = "L")]
    level: u32,
    #[arg(long, value_enum, default_value = "rotation")]
    resource: ResourceArg,
    /// Read an exported table instead of building one.
    #[arg(long, value_name = "PATH")]
    table: Option<PathBuf>,
    /// Write the table as JSON.
    #[arg(long, value_name = "PATH")]
    export: Option<PathBuf>,
}

fn recipe_nodes(table: &CostTable, root: NodeId) -> Vec<Value> {
    let mut seen = BTreeSet::new();
    let mut stack = vec![root];
    while let Some(id) = stack.pop() {
        if seen.insert(id) {
            stack.extend(table.nodes[id].recipe.children());
        }
    }
    seen.into_iter()
        .map(|id| {
            let mut v = serde_json::to_value(&table.nodes[id]).expect("node serializes");
            v["id"] = json!(id);
            v
        })
        .collect()
}

fn read_table(path: &std::path::Path) -> anyhow::Result<CostTable> {
    let text = std::fs::read_to_string(path).with_context(|| path.display().to_string())?;
    Ok(CostTable::from_json(&text).with_context(|| path.display().to_string())?)
}

pub fn cost(cfg: &RunConfig, a: &CostArgs, out: &mut impl Write) -> anyhow::Result<()> {
    let table = match &a.table {
        Some(p) => read_table(p)?,
        None => {
            let mut tc = cfg.table_config()?;
            tc.l_max = tc.l_max.max(a.level);
            build_cost_table(&tc)?
        }
    };
    if let Some(p) = &a.export {
        std::fs::write(p, table.to_json()?).with_context(|| p.display().to_string())?;
    }
    if a.level < 2 || a.level > table.config.l_max {
        bail!("level {} outside the table (2..={})", a.level, table.config.l_max);
    }
    let resource = match a.resource {
        ResourceArg::Magic => Resource::Magic,
        ResourceArg::Rotation => Resource::Rotation,
    };
    let mut entries = Vec::new();
    for &target in &cfg.targets {
        match table.cheapest(a.level, resource, target) {
            Ok(e) => entries.push(json!({
                "target": target,
                "status": "ok",
                "error": e.error,
                "cost": e.cost,
                "regime": (a.level >= 3).then(|| regime(&table, e.node).as_str()),
                "raw_consumption": table.raw_consumption(e.node),
                "node": e.node,
                "recipe": recipe_nodes(&table, e.node),
            })),
            Err(rotforge::Error::Unreachable { .. }) => {
                eprintln!("warning: target {target:e} unreachable at level {}", a.level);
                entries.push(json!({ "target": target, "status": "unreachable" }));
            }
            Err(e) => return Err(e.into()),
        }
    }
    let result = json!({
        "level": a.level,
        "resource": resource,
        "table": { "eps_raw": table.config.eps_raw, "l_max": table.config.l_max, "grid": table.config.grid,
                   "protocols": table.config.protocols.iter().map(|p| p.id.as_str()).collect::<Vec<_>>() },
        "entries": entries,
    });
    emit(out, "cost", cfg, result)
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Levels to report, `MIN..MAX` or `MAX`; MAX also sets `--l-max`.
    #[arg(long, value_name = "RANGE")]
    l_range: Option<String>,
    /// Write the data here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Read an exported table instead of building one; its settings replace
    /// `--raw`, `--l-max`, `--grid` and `--protocols`.
    #[arg(long, value_name = "PATH")]
    table: Option<PathBuf>,
}

impl SweepArgs {
    fn range(&self) -> anyhow::Result<Option<(u32, u32)>> {
        let Some(s) = &self.l_range else { return Ok(None) };
        let (lo, hi) = match s.split_once("..") {
            Some((lo, hi)) => (lo.trim().parse()?, hi.trim().trim_start_matches('=').parse()?),
            None => (3, s.trim().parse()?),
        };
        anyhow::ensure!(3 <= lo && lo <= hi, "bad level range {s:?}");
        Ok(Some((lo, hi)))
    }

    pub fn apply(&self, cfg: &mut RunConfig) -> anyhow::Result<()> {
        if let Some((_, hi)) = self.range()? {
            cfg.l_max = hi;
        }
        Ok(())
    }
}

pub fn sweep(cfg: &RunConfig, a: &SweepArgs, out: &mut impl Write) -> anyhow::Result<()> {
    let table = match &a.table {
        Some(p) => read_table(p)?,
        None => build_cost_table(&cfg.table_config()?)?,
    };
    let mut report = sweep_report(&table, &cfg.targets, &cfg.sr_model()?)?;
    let lo = a.range()?.map_or(3, |r| r.0);
    report.rows.retain(|r| r.level >= lo);
    for r in report.rows.iter().filter(|r| r.status == RowStatus::Unreachable) {
        eprintln!("warning: target {:e} unreachable at level {}", r.target, r.level);
    }
    let mut sink: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(std::fs::File::create(p).with_context(|| p.display().to_string())?),
        None => Box::new(&mut *out),
    };
    match cfg.format_or(Format::Csv) {
        Format::Csv => {
            echo_to_stderr("sweep", cfg)?;
            write_csv(&report.rows, &mut sink)?;
        }
        Format::Json => write_json(&mut sink, &envelope("sweep", cfg, &report)?)?,
    }
    sink.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Pqf,
    Sr,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long, value_enum, default_value = "pqf")]
    method: Method,
    /// Synthesis precision (half the diamond distance).
    #[arg(long)]
    eps: f64,
    /// Also price a rotation at this error using level-3 states made from raw ones.
    #[arg(long)]
    rotation: bool,
}

pub fn synth(cfg: &RunConfig, a: &SynthArgs, out: &mut impl Write) -> anyhow::Result<()> {
    let model = match a.method {
        Method::Pqf => SynthesisModel::Pqf,
        Method::Sr => cfg.sr_model()?,
    };
    let tcount = model.tcount(a.eps)?;
    let precision = [Metric::Angle, Metric::Spectral, Metric::Pqf]
        .into_iter()
        .filter_map(|m| convert_precision(PrecisionValue { value: a.eps, metric: Metric::Diamond }, m).ok())
        .collect::<Vec<_>>();
    let mut result = json!({ "method": a.method.to_possible_value().map(|v| v.get_name().to_string()),
                             "model": model.name(), "eps": a.eps, "tcount": tcount, "precision": precision });
    if a.rotation {
        let mut tc = cfg.table_config()?;
        tc.l_max = 3;
        let table = build_cost_table(&tc)?;
        let m3: Vec<Supply> =
            table.frontier(3, Resource::Magic)?.iter().map(|e| Supply::new(e.error, e.cost)).collect();
        result["rotation"] = serde_json::to_value(gs_rotation_cost(&model, &m3, a.eps)?)?;
    }
    emit(out, "synth", cfg, result)
}

#[derive(Args, Debug)]
pub struct AngleArgs {
    /// Angle in [0, 2π).
    #[arg(long)]
    phi: f64,
    /// Largest acceptable step θ_ℓ = π/2^ℓ.
    #[arg(long)]
    tol: f64,
}

pub fn angle(cfg: &RunConfig, a: &AngleArgs, out: &mut impl Write) -> anyhow::Result<()> {
    let r = approximate_angle(a.phi, a.tol)?;
    let result = json!({
        "phi": a.phi,
        "tol": a.tol,
        // n·θ_ℓ with n odd: the level of the rotation actually needed
        "l": r.approx.reduced_level,
        "n": r.approx.reduced_n,
        "err": r.achieved_error,
        "search_level": r.approx.level,
        "search_n": r.approx.n,
    });
    emit(out, "angle", cfg, result)
}

#[derive(Args, Debug)]
pub struct DiluteArgs {
    /// Level of the input state.
    #[arg(long = "l", value_name = "L")]
    level: u32,
    /// Error of the input state.
    #[arg(long)]
    eps: f64,
    /// Dilute repeatedly, one level per step.
    #[arg(long, default_value_t = 1)]
    steps: usize,
}

pub fn dilute(cfg: &RunConfig, a: &DiluteArgs, out: &mut impl Write) -> anyhow::Result<()> {
    anyhow::ensure!(a.steps >= 1, "--steps must be at least 1");
    let r = dilute_once(a.level, a.eps)?;
    let mut result = serde_json::to_value(r)?;
    result["reduces_error"] = json!(dilution_reduces_error(a.level, a.eps));
    result["critical_level"] = json!(if a.eps > 0.0 { Some(critical_level(a.eps)?) } else { None });
    if a.steps > 1 {
        result["chain"] = serde_json::to_value(dilution_chain(a.level, a.eps, a.steps)?)?;
    }
    emit(out, "dilute", cfg, result)
}
