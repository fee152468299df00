use std::path::PathBuf;
use std::process::Command;
use std::sync::Arc;

use clap::Parser;
use proptest::prelude::*;
use serde_json::Value;

use llc_entropy::cli::spec::{parse_spec, serialize_spec, ConfigDoc, SpecError, SpecFile};
use llc_entropy::cli::{run_with, Cli, EXIT_DISAGREEMENT, EXIT_INPUT, EXIT_LOWER_BOUND, EXIT_OK, EXIT_VIOLATED};
use llc_entropy::engine::{
    EngineError, EngineRegistry, EntropyConfig, EntropyResult, EntropyTarget, LimitFreeEngine, RelativeEntropyEngine,
};
use llc_entropy::field::FieldSpec;
use llc_entropy::operator::ShiftDirection;
use llc_entropy::random::{
    random_automorphism, random_banded, random_open_subspace, random_profile, rng, AutomorphismParams,
};
use llc_entropy::space::{BlockwisePattern, CompactOpenSubspace};

const RIGHT_SHIFT: &str = r#"{"field":"GF(2)","profile":{"constant":1},"operator":"right_shift"}"#;
const RIGHT_SHIFT_PAIR: &str = r#"{"field":"GF(2)","profile":{"constant":2},"operator":"right_shift","inverse":"left_shift","pattern":{"slots":[0]}}"#;
const WIDE_BOUNDARY: &str = r#"{"field":"GF(2)","profile":{"constant":1},
    "operator":{"width":1,"left_blocks":[[[0]],[[0]],[[1]]],"right_blocks":[[[0]],[[0]],[[1]]],"boundary":[0,10]}}"#;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn write_spec(dir: &tempfile::TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn binary(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_llc-entropy"))
        .args(args)
        .output()
        .unwrap();
    Run {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn with_spec(text: &str, args: &[&str]) -> Run {
    let dir = tempfile::tempdir().unwrap();
    let path = write_spec(&dir, "spec.json", text);
    let mut all: Vec<&str> = args.to_vec();
    all.push(path.to_str().unwrap());
    binary(&all)
}

fn report(run: &Run) -> Value {
    serde_json::from_str(&run.stdout).unwrap_or_else(|e| panic!("{e}: {}", run.stdout))
}

#[test]
fn entropy_of_right_shift_exits_zero() {
    let run = with_spec(RIGHT_SHIFT, &["entropy"]);
    assert_eq!(run.code, EXIT_OK, "{}", run.stderr);
    let r = report(&run);
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["exit_code"], 0);
    assert_eq!(r["result"]["value"], 1);
    assert_eq!(r["result"]["status"], "Exact");
    assert_eq!(r["result"]["h_alg"]["symbolic"], "1*log(2)");
    assert_eq!(r["result"]["h_alg"]["decimal"], "0.693147");
}

#[test]
fn text_format_lists_paths() {
    let run = with_spec(RIGHT_SHIFT, &["--format", "text", "entropy"]);
    assert_eq!(run.code, EXIT_OK);
    assert!(run.stdout.lines().any(|l| l == "result.value: 1"), "{}", run.stdout);
}

#[test]
fn addition_check_on_slot_split_is_verified() {
    let run = with_spec(RIGHT_SHIFT_PAIR, &["check", "addition"]);
    assert_eq!(run.code, EXIT_OK, "{}", run.stderr);
    let r = report(&run);
    assert_eq!(r["result"]["verdict"], "Verified");
}

#[test]
fn misspelled_key_exits_two_with_position() {
    let text = "{\n  \"field\": \"GF(2)\",\n  \"profile\": {\"constant\": 1},\n  \"operater\": \"right_shift\"\n}";
    let run = with_spec(text, &["entropy"]);
    assert_eq!(run.code, EXIT_INPUT);
    assert!(
        run.stderr.contains("operater") && run.stderr.contains("line 4"),
        "{}",
        run.stderr
    );
}

#[test]
fn block_dimension_mismatch_exits_two() {
    let text = r#"{"field":"GF(2)","profile":{"constant":1},
        "operator":{"width":0,"left_blocks":[[[1,0],[0,1]]],"right_blocks":[[[1]]]}}"#;
    let run = with_spec(text, &["entropy"]);
    assert_eq!(run.code, EXIT_INPUT);
    assert!(run.stderr.contains("block dimension mismatch"), "{}", run.stderr);
}

#[test]
fn limit_free_without_inverse_exits_two() {
    let run = with_spec(RIGHT_SHIFT, &["compare-engines"]);
    assert_eq!(run.code, EXIT_INPUT);
    assert!(
        run.stderr.contains("limit-free engine requires a verified inverse"),
        "{}",
        run.stderr
    );
    let run = with_spec(RIGHT_SHIFT, &["--engine", "limitfree", "entropy"]);
    assert_eq!(run.code, EXIT_INPUT);
    assert!(
        run.stderr.contains("limit-free engine requires a verified inverse"),
        "{}",
        run.stderr
    );
}

#[test]
fn unknown_engine_and_property_exit_two() {
    assert_eq!(
        with_spec(RIGHT_SHIFT, &["--engine", "magic", "entropy"]).code,
        EXIT_INPUT
    );
    assert_eq!(with_spec(RIGHT_SHIFT, &["check", "commutativity"]).code, EXIT_INPUT);
    assert_eq!(binary(&["entropy", "/nonexistent/spec.json"]).code, EXIT_INPUT);
    assert_eq!(binary(&["frobnicate"]).code, EXIT_INPUT);
}

#[test]
fn strict_lower_bound_exits_three() {
    let run = with_spec(WIDE_BOUNDARY, &["--strict", "--chain-max", "2", "entropy"]);
    assert_eq!(run.code, EXIT_LOWER_BOUND, "{}", run.stderr);
    assert_eq!(report(&run)["result"]["status"], "LowerBound");
    let lenient = with_spec(WIDE_BOUNDARY, &["--chain-max", "2", "entropy"]);
    assert_eq!(lenient.code, EXIT_OK);
    let full = with_spec(WIDE_BOUNDARY, &["--strict", "entropy"]);
    assert_eq!(full.code, EXIT_OK);
    assert_eq!(report(&full)["result"]["status"], "Exact");
}

#[test]
fn reports_are_byte_identical_across_runs() {
    for args in [vec!["entropy"], vec!["check", "addition"], vec!["compare-engines"]] {
        let a = with_spec(RIGHT_SHIFT_PAIR, &args);
        let b = with_spec(RIGHT_SHIFT_PAIR, &args);
        assert_eq!(a.code, EXIT_OK);
        // The temp path differs between runs; everything else must not.
        let strip = |r: &Run| {
            let mut v = report(r);
            v["input"] = Value::Null;
            serde_json::to_string(&v).unwrap()
        };
        assert_eq!(strip(&a), strip(&b));
    }
    let dir = tempfile::tempdir().unwrap();
    let path = write_spec(&dir, "spec.json", RIGHT_SHIFT_PAIR);
    let p = path.to_str().unwrap();
    assert_eq!(binary(&["entropy", p]).stdout, binary(&["entropy", p]).stdout);
    let c = ["--seed", "7", "campaign", "automorphisms", "--count", "12"];
    assert_eq!(binary(&c).stdout, binary(&c).stdout);
}

/// Reports the limit-free value plus one.
struct OffByOne;

impl RelativeEntropyEngine for OffByOne {
    fn name(&self) -> &'static str {
        "limitfree"
    }

    fn relative_entropy(
        &self,
        target: &EntropyTarget,
        u: &CompactOpenSubspace,
        cfg: &EntropyConfig,
    ) -> Result<EntropyResult, EngineError> {
        let mut r = LimitFreeEngine.relative_entropy(target, u, cfg)?;
        r.value += 1;
        Ok(r)
    }
}

/// Trips its own invariant check.
struct Broken;

impl RelativeEntropyEngine for Broken {
    fn name(&self) -> &'static str {
        "broken"
    }

    fn relative_entropy(
        &self,
        _: &EntropyTarget,
        _: &CompactOpenSubspace,
        _: &EntropyConfig,
    ) -> Result<EntropyResult, EngineError> {
        Err(EngineError::InvariantViolated("alpha increased".into()))
    }
}

fn injected(args: &[&str], spec: &str) -> llc_entropy::cli::Outcome {
    let dir = tempfile::tempdir().unwrap();
    let path = write_spec(&dir, "spec.json", spec);
    let mut all = vec!["llc-entropy"];
    all.extend_from_slice(args);
    all.push(path.to_str().unwrap());
    let mut engines = EngineRegistry::default();
    engines.register(Arc::new(OffByOne));
    engines.register(Arc::new(Broken));
    run_with(&Cli::try_parse_from(all).unwrap(), &engines)
}

#[test]
fn engine_disagreement_exits_four() {
    let out = injected(&["--engine", "both", "entropy"], RIGHT_SHIFT_PAIR);
    assert_eq!(out.code, EXIT_DISAGREEMENT, "{}", out.stderr);
    assert!(out.stderr.contains("disagree"), "{}", out.stderr);
    let out = injected(&["compare-engines"], RIGHT_SHIFT_PAIR);
    assert_eq!(out.code, EXIT_DISAGREEMENT);
    let r: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(r["result"]["agree"], false);
    assert_eq!(r["exit_code"], EXIT_DISAGREEMENT);
}

#[test]
fn invariant_violation_exits_one() {
    let out = injected(&["--engine", "broken", "entropy"], RIGHT_SHIFT);
    assert_eq!(out.code, EXIT_VIOLATED, "{}", out.stderr);
    assert!(out.stderr.contains("alpha increased"), "{}", out.stderr);
}

#[test]
fn correct_registry_via_run_with_matches_binary() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_spec(&dir, "spec.json", RIGHT_SHIFT_PAIR);
    let p = path.to_str().unwrap();
    let cli = Cli::try_parse_from(["llc-entropy", "entropy", p]).unwrap();
    let out = run_with(&cli, &EngineRegistry::default());
    let bin = binary(&["entropy", p]);
    assert_eq!(out.code, bin.code);
    assert_eq!(out.stdout, bin.stdout);
}

fn random_spec(seed: u64) -> SpecFile {
    let mut r = rng(seed);
    let field = match seed % 3 {
        0 => FieldSpec::gf2(),
        1 => FieldSpec::prime(3).unwrap(),
        _ => FieldSpec::Rationals,
    };
    let (profile, operator, inverse) = if seed % 2 == 0 {
        let p = random_profile(&mut r, field, 2);
        let (f, g) = random_automorphism(&mut r, &p, AutomorphismParams::default(), None);
        (p, f, Some(g))
    } else {
        let p = random_profile(&mut r, field, 3);
        let w = (seed % 3) as usize;
        let op = random_banded(&mut r, &p, w, 0.5);
        (p, op, None)
    };
    let subspace = Some(random_open_subspace(&mut r, &profile, 0.5));
    let chain = vec![BlockwisePattern::zero(&profile), BlockwisePattern::full(&profile)];
    SpecFile {
        field,
        profile: profile.clone(),
        operator,
        inverse,
        subspace,
        pattern: Some(BlockwisePattern::full(&profile)),
        chain,
        power: Some((seed % 4) as usize),
        conjugator: None,
        other: None,
        shift: Some((
            if seed % 2 == 0 {
                ShiftDirection::Left
            } else {
                ShiftDirection::Right
            },
            seed % 5,
        )),
        config: ConfigDoc {
            plateau_streak: Some(2 + (seed % 3) as usize),
            max_trajectory_steps: None,
            max_chain_index: Some(10),
            strict: Some(seed % 2 == 0),
        },
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spec_round_trip(seed in any::<u64>()) {
        let spec = random_spec(seed);
        let text = serialize_spec(&spec);
        let back = parse_spec(&text).map_err(|e: SpecError| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(&back, &spec);
        prop_assert_eq!(serialize_spec(&back), text);
    }
}
