//! Command-line front end: spec-file parsing, dispatch, canonical reports and
//! the exit-code contract.
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success, or a `Verified`/`Inconclusive` check |
//! | 1 | a `Violated` check or a failed internal law |
//! | 2 | parse, validation or precondition error |
//! | 3 | a `LowerBound` result under `--strict` |
//! | 4 | the two engines disagree |

pub mod spec;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::engine::{
    chain_horizon, h_alg_value, shift_closed_form, total_entropy, total_entropy_with, EngineError, EngineRegistry,
    EntropyConfig, EntropyResult, EntropyTarget, Status,
};
use crate::operator::{BandedOperator, OperatorError};
use crate::space::CompactOpenSubspace;
use crate::theorems::{
    addition_campaign, automorphism_campaign, CampaignSummary, PropertyInput, PropertyRegistry, PropertyReport,
    TheoremError, Verdict,
};
use spec::{parse_spec, subspace_json, SpecError, SpecFile};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_LOWER_BOUND: i32 = 3;
pub const EXIT_DISAGREEMENT: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(
    name = "llc-entropy",
    version,
    about = "Exact algebraic entropy of banded endomorphisms"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Relative entropy engine: a registry name (trajectory, limitfree, discrete) or `both`.
    #[arg(long, global = true)]
    pub engine: Option<String>,
    /// Cap on trajectory steps.
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,
    /// Number of equal increments that count as a plateau.
    #[arg(long, global = true)]
    pub streak: Option<usize>,
    /// Largest cofinal chain index evaluated.
    #[arg(long, global = true)]
    pub chain_max: Option<usize>,
    /// Exit with code 3 when a result is only a lower bound.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Seed for campaigns; echoed in every report.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Total entropy along the cofinal chain.
    Entropy { spec: PathBuf },
    /// Relative entropy H(phi, U) for the `subspace` of the spec file.
    RelativeEntropy { spec: PathBuf },
    /// Check a structural property (addition, log_law, conjugation, ...).
    Check { kind: String, spec: PathBuf },
    /// Closed-form entropy of a shift power, next to the computed value.
    ShiftClosedForm { spec: PathBuf },
    /// Run both engines on every chain member (or on `subspace`).
    CompareEngines { spec: PathBuf },
    /// Seeded randomized campaign: `automorphisms` or `addition`.
    Campaign {
        kind: String,
        #[arg(long, default_value_t = 200)]
        count: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Entropy { .. } => "entropy",
            Command::RelativeEntropy { .. } => "relative-entropy",
            Command::Check { .. } => "check",
            Command::ShiftClosedForm { .. } => "shift-closed-form",
            Command::CompareEngines { .. } => "compare-engines",
            Command::Campaign { .. } => "campaign",
        }
    }
}

/// What the process prints and returns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Violated(String),
    Disagreement(String),
}

impl From<SpecError> for Failure {
    fn from(e: SpecError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::EngineDisagreement { .. } => Failure::Disagreement(e.to_string()),
            EngineError::InvariantViolated(_) => Failure::Violated(e.to_string()),
            e => Failure::Input(e.to_string()),
        }
    }
}

impl From<TheoremError> for Failure {
    fn from(e: TheoremError) -> Self {
        match e {
            TheoremError::Engine(e) => e.into(),
            e => Failure::Input(e.to_string()),
        }
    }
}

impl From<OperatorError> for Failure {
    fn from(e: OperatorError) -> Self {
        Failure::Input(e.to_string())
    }
}

struct Produced {
    result: Value,
    code: i32,
    diagnostics: Vec<String>,
}

impl Produced {
    fn ok(result: Value) -> Self {
        Produced {
            result,
            code: EXIT_OK,
            diagnostics: Vec::new(),
        }
    }
}

pub fn run_from<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                Outcome {
                    stdout: text,
                    stderr: String::new(),
                    code,
                }
            } else {
                Outcome {
                    stdout: String::new(),
                    stderr: text,
                    code: EXIT_INPUT,
                }
            }
        }
    }
}

pub fn run(cli: &Cli) -> Outcome {
    run_with(cli, &EngineRegistry::default())
}

/// [`run`] with a custom engine registry; `both` compares its `trajectory`
/// and `limitfree` entries.
pub fn run_with(cli: &Cli, engines: &EngineRegistry) -> Outcome {
    match dispatch(cli, engines) {
        Ok((input, produced)) => {
            let code = produced.code;
            let report = json!({
                "schema_version": SCHEMA_VERSION,
                "tool_version": TOOL_VERSION,
                "command": cli.command.name(),
                "input": input,
                "seed": cli.seed,
                "exit_code": code,
                "result": produced.result,
            });
            let mut stderr: String = produced.diagnostics.iter().map(|d| format!("{d}\n")).collect();
            let stdout = match cli.format {
                Format::Json => format!(
                    "{}\n",
                    serde_json::to_string_pretty(&report).expect("json values serialize")
                ),
                Format::Text => render_text(&report),
            };
            if code == EXIT_LOWER_BOUND {
                stderr.push_str("error: result is only a lower bound (--strict)\n");
            }
            Outcome { stdout, stderr, code }
        }
        Err(f) => {
            let (code, msg) = match f {
                Failure::Input(m) => (EXIT_INPUT, m),
                Failure::Violated(m) => (EXIT_VIOLATED, m),
                Failure::Disagreement(m) => (EXIT_DISAGREEMENT, m),
            };
            Outcome {
                stdout: String::new(),
                stderr: format!("error: {msg}\n"),
                code,
            }
        }
    }
}

fn load(path: &PathBuf) -> Result<SpecFile, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok(parse_spec(&text)?)
}

fn config(cli: &Cli, spec: Option<&SpecFile>) -> Result<EntropyConfig, Failure> {
    let mut cfg = EntropyConfig::default();
    if let Some(s) = spec {
        s.config.apply(&mut cfg);
    }
    if let Some(v) = cli.max_iter {
        cfg.max_trajectory_steps = v;
    }
    if let Some(v) = cli.streak {
        cfg.plateau_streak = v;
    }
    if let Some(v) = cli.chain_max {
        cfg.max_chain_index = v;
    }
    cfg.strict |= cli.strict;
    cfg.validate()?;
    Ok(cfg)
}

fn target(op: &BandedOperator, inverse: Option<&BandedOperator>) -> Result<EntropyTarget, Failure> {
    Ok(match inverse {
        Some(inv) => EntropyTarget::with_inverse(op.clone(), inv.clone())?,
        None => EntropyTarget::new(op.clone())?,
    })
}

fn config_json(cfg: &EntropyConfig) -> Value {
    serde_json::to_value(cfg).expect("config serializes")
}

fn result_json(r: &EntropyResult, spec: &SpecFile) -> Value {
    let mut v = json!({
        "value": r.value,
        "status": r.status,
        "certificate": r.certificate,
        "iterations": r.iterations,
        "stop_reason": r.reason,
        "witness_subspace": subspace_json(&r.witness_subspace),
    });
    if let Ok(h) = h_alg_value(r, spec.field) {
        v["h_alg"] = json!({
            "ent": h.ent,
            "log_base": h.prime,
            "symbolic": h.symbolic(),
            "decimal": h.decimal(),
            "status": h.status,
        });
    }
    v
}

fn strict_code(cfg: &EntropyConfig, statuses: impl IntoIterator<Item = Status>) -> i32 {
    if cfg.strict && statuses.into_iter().any(|s| s == Status::LowerBound) {
        EXIT_LOWER_BOUND
    } else {
        EXIT_OK
    }
}

fn resolve_engine(cli: &Cli, spec: &SpecFile) -> String {
    match &cli.engine {
        Some(e) => e.clone(),
        None if spec.inverse.is_some() => "both".into(),
        None => "trajectory".into(),
    }
}

fn dispatch(cli: &Cli, engines: &EngineRegistry) -> Result<(Value, Produced), Failure> {
    match &cli.command {
        Command::Entropy { spec } => {
            let s = load(spec)?;
            let cfg = config(cli, Some(&s))?;
            let t = target(&s.operator, s.inverse.as_ref())?;
            let engine = resolve_engine(cli, &s);
            let p = if engine == "both" {
                if t.inverse().is_none() {
                    return Err(EngineError::MissingInverse.into());
                }
                let tr = total_entropy_with(engines.get("trajectory")?.as_ref(), &t, &cfg)?;
                let lf = total_entropy_with(engines.get("limitfree")?.as_ref(), &t, &cfg)?;
                compared(&s, &cfg, tr, lf)
            } else {
                let e = engines.get(&engine)?;
                single(&s, &cfg, &engine, total_entropy_with(e.as_ref(), &t, &cfg)?)
            };
            Ok((json!(spec.display().to_string()), p))
        }
        Command::RelativeEntropy { spec } => {
            let s = load(spec)?;
            let cfg = config(cli, Some(&s))?;
            let u = s
                .subspace
                .clone()
                .ok_or_else(|| Failure::Input("relative-entropy needs a `subspace` in the spec file".into()))?;
            let t = target(&s.operator, s.inverse.as_ref())?;
            let engine = resolve_engine(cli, &s);
            let p = if engine == "both" {
                let (tr, lf) = both_engines(engines, &t, &u, &cfg)?;
                compared(&s, &cfg, tr, lf)
            } else {
                let e = engines.get(&engine)?;
                single(&s, &cfg, &engine, e.relative_entropy(&t, &u, &cfg)?)
            };
            Ok((json!(spec.display().to_string()), p))
        }
        Command::Check { kind, spec } => {
            let s = load(spec)?;
            let cfg = config(cli, Some(&s))?;
            let check = PropertyRegistry::default().get(kind)?;
            let input = property_input(&s)?;
            let report = check.check(&input, &cfg)?;
            let mut p = Produced::ok(report_json(&report, &cfg));
            p.code = match report.verdict {
                Verdict::Violated => EXIT_VIOLATED,
                _ => strict_code(&cfg, report.sides.iter().map(|x| x.status)),
            };
            Ok((json!(spec.display().to_string()), p))
        }
        Command::ShiftClosedForm { spec } => {
            let s = load(spec)?;
            let cfg = config(cli, Some(&s))?;
            let (dir, k) = s
                .shift
                .ok_or_else(|| Failure::Input("shift-closed-form needs a `shift` in the spec file".into()))?;
            let closed = shift_closed_form(&s.profile, dir, k)?;
            let sk = BandedOperator::shift(&s.profile, dir)?.power(k as usize);
            let computed = total_entropy(&EntropyTarget::new(sk)?, &cfg)?;
            let agree = computed.status == Status::LowerBound || computed.value == closed;
            let mut p = Produced::ok(json!({
                "closed_form": closed,
                "computed": result_json(&computed, &s),
                "agree": agree,
                "config": config_json(&cfg),
            }));
            p.code = if agree {
                strict_code(&cfg, [computed.status])
            } else {
                EXIT_VIOLATED
            };
            Ok((json!(spec.display().to_string()), p))
        }
        Command::CompareEngines { spec } => {
            let s = load(spec)?;
            let cfg = config(cli, Some(&s))?;
            let t = target(&s.operator, s.inverse.as_ref())?;
            if t.inverse().is_none() {
                return Err(EngineError::MissingInverse.into());
            }
            let members: Vec<(String, CompactOpenSubspace)> = match &s.subspace {
                Some(u) => vec![("subspace".into(), u.clone())],
                None => {
                    let last = (chain_horizon(t.op()) + 1).min(cfg.max_chain_index);
                    (0..=last)
                        .map(|m| (format!("C_{m}"), CompactOpenSubspace::cofinal_chain(&s.profile, m)))
                        .collect()
                }
            };
            let mut rows = Vec::new();
            let mut statuses = Vec::new();
            let mut disagreements = Vec::new();
            for (label, u) in members {
                let (tr, lf) = both_engines(engines, &t, &u, &cfg)?;
                let agree = tr.value == lf.value || tr.status == Status::LowerBound || lf.status == Status::LowerBound;
                if !agree {
                    disagreements.push(format!(
                        "error: engines disagree on {label}: trajectory {} vs limit-free {}",
                        tr.value, lf.value
                    ));
                }
                statuses.extend([tr.status, lf.status]);
                rows.push(json!({
                    "subspace": label,
                    "trajectory": {"value": tr.value, "status": tr.status, "certificate": tr.certificate},
                    "limitfree": {"value": lf.value, "status": lf.status, "certificate": lf.certificate},
                    "agree": agree,
                }));
            }
            let mut p = Produced::ok(json!({
                "comparisons": rows,
                "agree": disagreements.is_empty(),
                "config": config_json(&cfg),
            }));
            p.code = if disagreements.is_empty() {
                strict_code(&cfg, statuses)
            } else {
                EXIT_DISAGREEMENT
            };
            p.diagnostics = disagreements;
            Ok((json!(spec.display().to_string()), p))
        }
        Command::Campaign { kind, count } => {
            let cfg = config(cli, None)?;
            let seed = cli.seed.unwrap_or(0);
            let summary: CampaignSummary = match kind.as_str() {
                "automorphisms" => automorphism_campaign(seed, *count, &cfg),
                "addition" => addition_campaign(seed, *count, &cfg),
                other => {
                    return Err(Failure::Input(format!(
                        "unknown campaign {other:?} (expected automorphisms or addition)"
                    )))
                }
            };
            let mut res = serde_json::to_value(&summary).expect("summary serializes");
            res["config"] = config_json(&cfg);
            let mut p = Produced::ok(res);
            p.code = if summary.clean() {
                if cfg.strict && summary.inconclusive > 0 {
                    EXIT_LOWER_BOUND
                } else {
                    EXIT_OK
                }
            } else {
                EXIT_VIOLATED
            };
            Ok((Value::Null, p))
        }
    }
}

fn both_engines(
    engines: &EngineRegistry,
    t: &EntropyTarget,
    u: &CompactOpenSubspace,
    cfg: &EntropyConfig,
) -> Result<(EntropyResult, EntropyResult), Failure> {
    let tr = engines.get("trajectory")?.relative_entropy(t, u, cfg)?;
    let lf = engines.get("limitfree")?.relative_entropy(t, u, cfg)?;
    Ok((tr, lf))
}

fn single(s: &SpecFile, cfg: &EntropyConfig, engine: &str, r: EntropyResult) -> Produced {
    let mut res = result_json(&r, s);
    res["engine"] = json!(engine);
    res["config"] = config_json(cfg);
    let mut p = Produced::ok(res);
    p.code = strict_code(cfg, [r.status]);
    p
}

fn compared(s: &SpecFile, cfg: &EntropyConfig, tr: EntropyResult, lf: EntropyResult) -> Produced {
    let agree = tr.value == lf.value || tr.status == Status::LowerBound || lf.status == Status::LowerBound;
    let mut p = Produced::ok(json!({
        "engine": "both",
        "config": config_json(cfg),
        "trajectory": result_json(&tr, s),
        "limitfree": result_json(&lf, s),
        "agree": agree,
    }));
    p.code = if agree {
        strict_code(cfg, [tr.status, lf.status])
    } else {
        p.diagnostics.push(format!(
            "error: engines disagree: trajectory {} vs limit-free {}",
            tr.value, lf.value
        ));
        EXIT_DISAGREEMENT
    };
    p
}

fn property_input(s: &SpecFile) -> Result<PropertyInput, Failure> {
    let mut input = PropertyInput::new(target(&s.operator, s.inverse.as_ref())?).with_chain(s.chain.clone());
    if let Some(k) = s.power {
        input = input.with_power(k);
    }
    if let Some((a, ai)) = &s.conjugator {
        input = input.with_conjugator(target(a, ai.as_ref())?);
    }
    if let Some((b, bi)) = &s.other {
        input = input.with_other(target(b, bi.as_ref())?);
    }
    if let Some(w) = &s.pattern {
        input = input.with_pattern(w.clone());
    }
    Ok(input)
}

fn report_json(r: &PropertyReport, cfg: &EntropyConfig) -> Value {
    let mut v = serde_json::to_value(r).expect("reports serialize");
    v["config"] = config_json(cfg);
    v
}

/// `path: value` lines in key order, one per scalar.
fn render_text(v: &Value) -> String {
    fn walk(prefix: &str, v: &Value, out: &mut String) {
        match v {
            Value::Object(m) => {
                for (k, x) in m {
                    let p = if prefix.is_empty() {
                        k.clone()
                    } else {
                        format!("{prefix}.{k}")
                    };
                    walk(&p, x, out);
                }
            }
            Value::Array(a) if a.iter().all(|x| !x.is_object() && !x.is_array()) => {
                let items: Vec<String> = a.iter().map(scalar_text).collect();
                out.push_str(&format!("{prefix}: [{}]\n", items.join(", ")));
            }
            Value::Array(a) => {
                for (i, x) in a.iter().enumerate() {
                    walk(&format!("{prefix}[{i}]"), x, out);
                }
            }
            x => out.push_str(&format!("{prefix}: {}\n", scalar_text(x))),
        }
    }
    fn scalar_text(v: &Value) -> String {
        match v {
            Value::String(s) => s.clone(),
            x => x.to_string(),
        }
    }
    let mut out = String::new();
    walk("", v, &mut out);
    out
}
