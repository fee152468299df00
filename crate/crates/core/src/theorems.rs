//! Instance checks of the structural entropy identities: addition over an
//! invariant subspace, the logarithmic law, conjugation invariance, weak
//! addition, monotonicity, reduction to the discrete corner and continuity
//! along finite exhausting chains.
//!
//! A check evaluates every entropy it needs with [`total_entropy`], states one
//! or more claims between the values and returns a [`PropertyReport`]. A claim
//! that fails while every value is `Exact` or `PlateauDetected` gives
//! `Violated`; any `LowerBound` makes the report `Inconclusive`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::engine::{
    chain_horizon, total_entropy, total_entropy_with, DiscreteEngine, EngineError, EntropyConfig, EntropyResult,
    EntropyTarget, LimitFreeEngine, Status, TrajectoryEngine,
};
use crate::field::FieldSpec;
use crate::operator::{verify_inverse, BandedOperator, OperatorError};
use crate::random::{instance_seed, random_automorphism, random_levelwise, random_profile, rng, AutomorphismParams};
use crate::space::{BlockwisePattern, CompactOpenSubspace, DimensionProfile, SpaceError};

#[derive(Debug, Error)]
pub enum TheoremError {
    #[error("unknown property {0:?}")]
    UnknownProperty(String),
    #[error("{property}: {reason}")]
    Precondition { property: &'static str, reason: String },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Verdict {
    Verified,
    Violated,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Verified => "Verified",
            Verdict::Violated => "Violated",
            Verdict::Inconclusive => "Inconclusive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Equal,
    AtLeast,
}

/// One computed entropy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SideValue {
    pub label: String,
    pub value: u64,
    pub status: Status,
    pub certificate: Vec<u64>,
}

impl SideValue {
    fn new(label: impl Into<String>, r: &EntropyResult) -> Self {
        SideValue {
            label: label.into(),
            value: r.value,
            status: r.status,
            certificate: r.certificate.clone(),
        }
    }
}

/// `lhs relation rhs` between combinations of side values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Claim {
    pub statement: String,
    pub lhs: u64,
    pub rhs: u64,
    pub relation: Relation,
    pub holds: bool,
}

impl Claim {
    fn new(statement: impl Into<String>, lhs: u64, relation: Relation, rhs: u64) -> Self {
        let holds = match relation {
            Relation::Equal => lhs == rhs,
            Relation::AtLeast => lhs >= rhs,
        };
        Claim {
            statement: statement.into(),
            lhs,
            rhs,
            relation,
            holds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PropertyReport {
    pub property: String,
    pub inputs: String,
    pub sides: Vec<SideValue>,
    pub claims: Vec<Claim>,
    pub verdict: Verdict,
    pub witness: Option<String>,
}

impl PropertyReport {
    fn new(property: &str, inputs: String, sides: Vec<SideValue>, claims: Vec<Claim>, witness: Option<String>) -> Self {
        let failed: Vec<&Claim> = claims.iter().filter(|c| !c.holds).collect();
        let verdict = if sides.iter().any(|s| s.status == Status::LowerBound) {
            Verdict::Inconclusive
        } else if failed.is_empty() && witness.is_none() {
            Verdict::Verified
        } else {
            Verdict::Violated
        };
        let witness = match verdict {
            Verdict::Violated => witness.or_else(|| {
                Some(
                    failed
                        .iter()
                        .map(|c| format!("{} fails: {} vs {}", c.statement, c.lhs, c.rhs))
                        .collect::<Vec<_>>()
                        .join("; "),
                )
            }),
            _ => None,
        };
        PropertyReport {
            property: property.to_string(),
            inputs,
            sides,
            claims,
            verdict,
            witness,
        }
    }
}

/// Everything a check may need; each check reads the fields it uses.
#[derive(Debug, Clone)]
pub struct PropertyInput {
    pub target: EntropyTarget,
    /// Exponent for `log_law`.
    pub power: Option<usize>,
    /// Conjugating automorphism with inverse for `conjugation`.
    pub conjugator: Option<EntropyTarget>,
    /// Second factor for `weak_addition`.
    pub other: Option<EntropyTarget>,
    /// Invariant subspace for `addition` and `monotonicity`.
    pub pattern: Option<BlockwisePattern>,
    /// Increasing invariant subspaces ending in `V` for `direct_limit`.
    pub chain: Vec<BlockwisePattern>,
}

impl PropertyInput {
    pub fn new(target: EntropyTarget) -> Self {
        PropertyInput {
            target,
            power: None,
            conjugator: None,
            other: None,
            pattern: None,
            chain: Vec::new(),
        }
    }

    pub fn with_power(mut self, k: usize) -> Self {
        self.power = Some(k);
        self
    }

    pub fn with_conjugator(mut self, alpha: EntropyTarget) -> Self {
        self.conjugator = Some(alpha);
        self
    }

    pub fn with_other(mut self, other: EntropyTarget) -> Self {
        self.other = Some(other);
        self
    }

    pub fn with_pattern(mut self, w: BlockwisePattern) -> Self {
        self.pattern = Some(w);
        self
    }

    pub fn with_chain(mut self, chain: Vec<BlockwisePattern>) -> Self {
        self.chain = chain;
        self
    }
}

/// A structural identity checked on one instance, selectable by name.
pub trait PropertyCheck: Send + Sync {
    fn name(&self) -> &'static str;
    fn check(&self, input: &PropertyInput, cfg: &EntropyConfig) -> Result<PropertyReport, TheoremError>;
}

#[derive(Clone)]
pub struct PropertyRegistry {
    checks: BTreeMap<&'static str, Arc<dyn PropertyCheck>>,
}

impl Default for PropertyRegistry {
    fn default() -> Self {
        let mut r = PropertyRegistry {
            checks: BTreeMap::new(),
        };
        r.register(Arc::new(Addition));
        r.register(Arc::new(LogLaw));
        r.register(Arc::new(Conjugation));
        r.register(Arc::new(WeakAddition));
        r.register(Arc::new(Monotonicity));
        r.register(Arc::new(DdReduction));
        r.register(Arc::new(DirectLimit));
        r.register(Arc::new(EngineAgreement));
        r
    }
}

impl PropertyRegistry {
    pub fn register(&mut self, check: Arc<dyn PropertyCheck>) {
        self.checks.insert(check.name(), check);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn PropertyCheck>, TheoremError> {
        self.checks
            .get(name)
            .cloned()
            .ok_or_else(|| TheoremError::UnknownProperty(name.to_string()))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.checks.keys().copied().collect()
    }
}

/// Runs the named check from the default registry.
pub fn check_property(kind: &str, input: &PropertyInput, cfg: &EntropyConfig) -> Result<PropertyReport, TheoremError> {
    PropertyRegistry::default().get(kind)?.check(input, cfg)
}

pub fn check_addition(
    target: &EntropyTarget,
    w: &BlockwisePattern,
    cfg: &EntropyConfig,
) -> Result<PropertyReport, TheoremError> {
    Addition.check(&PropertyInput::new(target.clone()).with_pattern(w.clone()), cfg)
}

pub fn describe(op: &BandedOperator) -> String {
    let p = op.profile();
    let (lo, hi) = op.boundary_range();
    format!(
        "{} d_left={} boundary={}..{}:{:?} d_right={} width={} columns={}..{}",
        p.field(),
        p.d_left(),
        p.n_left(),
        p.n_right(),
        p.boundary(),
        p.d_right(),
        op.width(),
        lo,
        hi
    )
}

fn describe_pattern(w: &BlockwisePattern) -> String {
    let dims: Vec<usize> = (w.start()..=w.end()).map(|n| w.at(n).dim()).collect();
    format!(
        "pattern left={} levels {}..{}:{:?} right={}",
        w.left().dim(),
        w.start(),
        w.end(),
        dims,
        w.right().dim()
    )
}

fn require<'a, T>(x: &'a Option<T>, property: &'static str, what: &str) -> Result<&'a T, TheoremError> {
    x.as_ref().ok_or_else(|| TheoremError::Precondition {
        property,
        reason: format!("missing {what}"),
    })
}

/// Restriction to `W` and the induced quotient map, each with an inverse when
/// the inverse of `φ` also leaves `W` invariant.
pub fn induce_target(
    target: &EntropyTarget,
    w: &BlockwisePattern,
) -> Result<(EntropyTarget, EntropyTarget), TheoremError> {
    let (sub, quo) = target.op().induce_on_subspace_and_quotient(w)?;
    let inverses = target
        .inverse()
        .and_then(|psi| psi.induce_on_subspace_and_quotient(w).ok())
        .filter(|(si, qi)| verify_inverse(&sub, si).unwrap_or(false) && verify_inverse(&quo, qi).unwrap_or(false));
    Ok(match inverses {
        Some((si, qi)) => (
            EntropyTarget::with_inverse(sub, si)?,
            EntropyTarget::with_inverse(quo, qi)?,
        ),
        None => (EntropyTarget::new(sub)?, EntropyTarget::new(quo)?),
    })
}

fn ent(target: &EntropyTarget, cfg: &EntropyConfig) -> Result<EntropyResult, TheoremError> {
    Ok(total_entropy(target, cfg)?)
}

/// `ent(φ) = ent(φ↾W) + ent(φ̄)`, plus `C_m ∩ W` and `(C_m + W)/W` matching the
/// chain members of `W` and `V/W`.
pub struct Addition;

impl PropertyCheck for Addition {
    fn name(&self) -> &'static str {
        "addition"
    }

    fn check(&self, input: &PropertyInput, cfg: &EntropyConfig) -> Result<PropertyReport, TheoremError> {
        let w = require(&input.pattern, "addition", "pattern")?;
        let (sub, quo) = induce_target(&input.target, w)?;
        let profile = input.target.op().profile();
        let mut witness = None;
        let last = (chain_horizon(input.target.op()) + 1).min(cfg.max_chain_index);
        for m in 0..=last {
            let c = CompactOpenSubspace::cofinal_chain(profile, m);
            let (cs, cq) = w.restrict_quotient(&c)?;
            if cs != CompactOpenSubspace::cofinal_chain(sub.op().profile(), m)
                || cq != CompactOpenSubspace::cofinal_chain(quo.op().profile(), m)
            {
                witness = Some(format!("C_{m} does not split into the chain members of W and V/W"));
                break;
            }
        }
        let e = ent(&input.target, cfg)?;
        let es = ent(&sub, cfg)?;
        let eq = ent(&quo, cfg)?;
        let claims = vec![Claim::new(
            "ent(phi) = ent(phi|W) + ent(phi_bar)",
            e.value,
            Relation::Equal,
            es.value + eq.value,
        )];
        let sides = vec![
            SideValue::new("ent(phi)", &e),
            SideValue::new("ent(phi|W)", &es),
            SideValue::new("ent(phi_bar)", &eq),
        ];
        let inputs = format!("{}; {}", describe(input.target.op()), describe_pattern(w));
        Ok(PropertyReport::new(self.name(), inputs, sides, claims, witness))
    }
}

/// `ent(φ^k) = k·ent(φ)`.
pub struct LogLaw;

impl PropertyCheck for LogLaw {
    fn name(&self) -> &'static str {
        "log_law"
    }

    fn check(&self, input: &PropertyInput, cfg: &EntropyConfig) -> Result<PropertyReport, TheoremError> {
        let k = *require(&input.power, "log_law", "power k")?;
        let op = input.target.op();
        let pk = op.power(k);
        let target_k = match input.target.inverse() {
            Some(psi) => EntropyTarget::with_inverse(pk, psi.power(k))?,
            None => EntropyTarget::new(pk)?,
        };
        let e = ent(&input.target, cfg)?;
        let ek = ent(&target_k, cfg)?;
        let claims = vec![Claim::new(
            format!("ent(phi^{k}) = {k}*ent(phi)"),
            ek.value,
            Relation::Equal,
            k as u64 * e.value,
        )];
        let sides = vec![
            SideValue::new(format!("ent(phi^{k})"), &ek),
            SideValue::new("ent(phi)", &e),
        ];
        let inputs = format!("{}; k={k}", describe(op));
        Ok(PropertyReport::new(self.name(), inputs, sides, claims, None))
    }
}

/// `ent(αφα⁻¹) = ent(φ)` for an automorphism `α`.
pub struct Conjugation;

impl PropertyCheck for Conjugation {
    fn name(&self) -> &'static str {
        "conjugation"
    }

    fn check(&self, input: &PropertyInput, cfg: &EntropyConfig) -> Result<PropertyReport, TheoremError> {
        let alpha = require(&input.conjugator, "conjugation", "conjugator")?;
        let alpha_inv = alpha.inverse().ok_or_else(|| TheoremError::Precondition {
            property: "conjugation",
            reason: "conjugator needs a verified inverse".into(),
        })?;
        let conj = |f: &BandedOperator| -> Result<BandedOperator, OperatorError> {
            alpha.op().compose(&f.compose(alpha_inv)?)
        };
        let c = conj(input.target.op())?;
        let target_c = match input.target.inverse() {
            Some(psi) => EntropyTarget::with_inverse(c, conj(psi)?)?,
            None => EntropyTarget::new(c)?,
        };
        let e = ent(&input.target, cfg)?;
        let ec = ent(&target_c, cfg)?;
        let claims = vec![Claim::new(
            "ent(alpha phi alpha^-1) = ent(phi)",
            ec.value,
            Relation::Equal,
            e.value,
        )];
        let sides = vec![
            SideValue::new("ent(alpha phi alpha^-1)", &ec),
            SideValue::new("ent(phi)", &e),
        ];
        let inputs = format!("{}; alpha: {}", describe(input.target.op()), describe(alpha.op()));
        Ok(PropertyReport::new(self.name(), inputs, sides, claims, None))
    }
}

/// `ent(φ₁ × φ₂) = ent(φ₁) + ent(φ₂)`.
pub struct WeakAddition;

impl PropertyCheck for WeakAddition {
    fn name(&self) -> &'static str {
        "weak_addition"
    }

    fn check(&self, input: &PropertyInput, cfg: &EntropyConfig) -> Result<PropertyReport, TheoremError> {
        let other = require(&input.other, "weak_addition", "second operator")?;
        let prod = input.target.op().direct_product(other.op())?;
        let target_p = match (input.target.inverse(), other.inverse()) {
            (Some(a), Some(b)) => EntropyTarget::with_inverse(prod, a.direct_product(b)?)?,
            _ => EntropyTarget::new(prod)?,
        };
        let e1 = ent(&input.target, cfg)?;
        let e2 = ent(other, cfg)?;
        let ep = ent(&target_p, cfg)?;
        let claims = vec![Claim::new(
            "ent(phi1 x phi2) = ent(phi1) + ent(phi2)",
            ep.value,
            Relation::Equal,
            e1.value + e2.value,
        )];
        let sides = vec![
            SideValue::new("ent(phi1 x phi2)", &ep),
            SideValue::new("ent(phi1)", &e1),
            SideValue::new("ent(phi2)", &e2),
        ];
        let inputs = format!("{}; {}", describe(input.target.op()), describe(other.op()));
        Ok(PropertyReport::new(self.name(), inputs, sides, claims, None))
    }
}

/// `ent(φ) ≥ ent(φ↾W)` and `ent(φ) ≥ ent(φ̄)`, with equality in the second
/// when `W` is linearly compact.
pub struct Monotonicity;

impl PropertyCheck for Monotonicity {
    fn name(&self) -> &'static str {
        "monotonicity"
    }

    fn check(&self, input: &PropertyInput, cfg: &EntropyConfig) -> Result<PropertyReport, TheoremError> {
        let w = require(&input.pattern, "monotonicity", "pattern")?;
        let (sub, quo) = induce_target(&input.target, w)?;
        let e = ent(&input.target, cfg)?;
        let es = ent(&sub, cfg)?;
        let eq = ent(&quo, cfg)?;
        let mut claims = vec![
            Claim::new("ent(phi) >= ent(phi|W)", e.value, Relation::AtLeast, es.value),
            Claim::new("ent(phi) >= ent(phi_bar)", e.value, Relation::AtLeast, eq.value),
        ];
        if w.is_linearly_compact() {
            claims.push(Claim::new(
                "ent(phi) = ent(phi_bar) for compact W",
                e.value,
                Relation::Equal,
                eq.value,
            ));
        }
        let sides = vec![
            SideValue::new("ent(phi)", &e),
            SideValue::new("ent(phi|W)", &es),
            SideValue::new("ent(phi_bar)", &eq),
        ];
        let inputs = format!("{}; {}", describe(input.target.op()), describe_pattern(w));
        Ok(PropertyReport::new(self.name(), inputs, sides, claims, None))
    }
}

/// `ent(φ) = ent(φ_dd)`, the right side computed on the discrete part with
/// plain finite-dimensional spans.
pub struct DdReduction;

impl PropertyCheck for DdReduction {
    fn name(&self) -> &'static str {
        "dd_reduction"
    }

    fn check(&self, input: &PropertyInput, cfg: &EntropyConfig) -> Result<PropertyReport, TheoremError> {
        let dec = input.target.op().decompose_vc_vd();
        let dd = EntropyTarget::new(dec.dd_on_vd)?;
        let e = ent(&input.target, cfg)?;
        let edd = total_entropy_with(&DiscreteEngine, &dd, cfg)?;
        let claims = vec![Claim::new(
            "ent(phi) = ent(phi_dd)",
            e.value,
            Relation::Equal,
            edd.value,
        )];
        let sides = vec![SideValue::new("ent(phi)", &e), SideValue::new("ent(phi_dd)", &edd)];
        Ok(PropertyReport::new(
            self.name(),
            describe(input.target.op()),
            sides,
            claims,
            None,
        ))
    }
}

fn pattern_contains(big: &BlockwisePattern, small: &BlockwisePattern) -> bool {
    let lo = big.start().min(small.start()) - 1;
    let hi = big.end().max(small.end()) + 1;
    (lo..=hi).all(|n| big.at(n).contains(small.at(n)))
}

fn pattern_is_full(w: &BlockwisePattern) -> bool {
    (w.start() - 1..=w.end() + 1).all(|n| w.at(n).is_full())
}

/// `ent(φ) = max_i ent(φ↾W_i)` along `W_1 ⊆ … ⊆ W_k = V`, with
/// `ent(φ) ≥ ent(φ↾W_i)` for each member.
pub struct DirectLimit;

impl PropertyCheck for DirectLimit {
    fn name(&self) -> &'static str {
        "direct_limit"
    }

    fn check(&self, input: &PropertyInput, cfg: &EntropyConfig) -> Result<PropertyReport, TheoremError> {
        let pre = |reason: &str| TheoremError::Precondition {
            property: "direct_limit",
            reason: reason.to_string(),
        };
        let chain = &input.chain;
        let top = chain.last().ok_or_else(|| pre("empty chain"))?;
        if !pattern_is_full(top) {
            return Err(pre("the last chain member must be the whole space"));
        }
        if chain.windows(2).any(|p| !pattern_contains(&p[1], &p[0])) {
            return Err(pre("chain members must increase"));
        }
        let e = ent(&input.target, cfg)?;
        let mut sides = vec![SideValue::new("ent(phi)", &e)];
        let mut claims = Vec::new();
        let mut best = 0;
        for (i, w) in chain.iter().enumerate() {
            let (sub, _) = induce_target(&input.target, w)?;
            let r = ent(&sub, cfg)?;
            best = best.max(r.value);
            claims.push(Claim::new(
                format!("ent(phi) >= ent(phi|W_{i})"),
                e.value,
                Relation::AtLeast,
                r.value,
            ));
            sides.push(SideValue::new(format!("ent(phi|W_{i})"), &r));
        }
        claims.push(Claim::new(
            "ent(phi) = max_i ent(phi|W_i)",
            e.value,
            Relation::Equal,
            best,
        ));
        let inputs = format!("{}; chain of {}", describe(input.target.op()), chain.len());
        Ok(PropertyReport::new(self.name(), inputs, sides, claims, None))
    }
}

/// Trajectory and limit-free totals agree for an automorphism.
pub struct EngineAgreement;

impl PropertyCheck for EngineAgreement {
    fn name(&self) -> &'static str {
        "engine_agreement"
    }

    fn check(&self, input: &PropertyInput, cfg: &EntropyConfig) -> Result<PropertyReport, TheoremError> {
        if input.target.inverse().is_none() {
            return Err(EngineError::MissingInverse.into());
        }
        let t = total_entropy_with(&TrajectoryEngine, &input.target, cfg)?;
        let l = total_entropy_with(&LimitFreeEngine, &input.target, cfg)?;
        let claims = vec![Claim::new("trajectory = limitfree", t.value, Relation::Equal, l.value)];
        let sides = vec![SideValue::new("trajectory", &t), SideValue::new("limitfree", &l)];
        Ok(PropertyReport::new(
            self.name(),
            describe(input.target.op()),
            sides,
            claims,
            None,
        ))
    }
}

/// Verdict counts over a seeded family of instances.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CampaignSummary {
    pub name: String,
    pub seed: u64,
    pub instances: usize,
    pub checks: usize,
    pub verified: usize,
    pub violated: usize,
    pub inconclusive: usize,
    pub errors: usize,
    /// Violations and errors, by instance.
    pub failures: Vec<String>,
}

impl CampaignSummary {
    fn tally(
        name: &str,
        seed: u64,
        instances: usize,
        results: Vec<(usize, Result<PropertyReport, TheoremError>)>,
    ) -> Self {
        let mut s = CampaignSummary {
            name: name.to_string(),
            seed,
            instances,
            ..Default::default()
        };
        for (i, r) in results {
            s.checks += 1;
            match r {
                Ok(rep) => match rep.verdict {
                    Verdict::Verified => s.verified += 1,
                    Verdict::Inconclusive => s.inconclusive += 1,
                    Verdict::Violated => {
                        s.violated += 1;
                        s.failures.push(format!(
                            "instance {i} {}: {}",
                            rep.property,
                            rep.witness.unwrap_or_default()
                        ));
                    }
                },
                Err(e) => {
                    s.errors += 1;
                    s.failures.push(format!("instance {i}: {e}"));
                }
            }
        }
        s
    }

    pub fn clean(&self) -> bool {
        self.violated == 0 && self.errors == 0
    }
}

fn campaign_field(i: u64) -> FieldSpec {
    if i % 2 == 0 {
        FieldSpec::gf2()
    } else {
        FieldSpec::prime(3).expect("3 is prime")
    }
}

/// Random shift-like automorphism of width ≤ 2 with its inverse, on a constant
/// or random profile over GF(2)/GF(3).
pub fn campaign_automorphism(base: u64, i: u64) -> EntropyTarget {
    let mut r = rng(instance_seed(base, i));
    let field = campaign_field(i);
    let profile = if r.gen_bool(0.3) {
        random_profile(&mut r, field, 2)
    } else {
        DimensionProfile::constant(field, r.gen_range(1..=2))
    };
    let (f, g) = random_automorphism(&mut r, &profile, AutomorphismParams::default(), None);
    EntropyTarget::with_inverse(f, g).expect("generated inverse")
}

/// For each random automorphism: `log_law` with `k = i mod 4`, `conjugation`
/// by a random level-wise automorphism and `engine_agreement`.
pub fn automorphism_campaign(seed: u64, instances: usize, cfg: &EntropyConfig) -> CampaignSummary {
    let results: Vec<Vec<(usize, Result<PropertyReport, TheoremError>)>> = (0..instances)
        .into_par_iter()
        .map(|i| {
            let target = campaign_automorphism(seed, i as u64);
            let mut r = rng(instance_seed(seed ^ 0x5eed, i as u64));
            let (a, a_inv) = random_levelwise(&mut r, target.op().profile(), None);
            let alpha = EntropyTarget::with_inverse(a, a_inv).expect("level-wise inverse");
            let input = PropertyInput::new(target).with_power(i % 4).with_conjugator(alpha);
            ["log_law", "conjugation", "engine_agreement"]
                .into_iter()
                .map(|kind| (i, check_property(kind, &input, cfg)))
                .collect()
        })
        .collect();
    CampaignSummary::tally(
        "automorphisms",
        seed,
        instances,
        results.into_iter().flatten().collect(),
    )
}

/// Shift-like automorphism on `d ≡ 2, 3` leaving a random slot pattern
/// invariant, together with that pattern.
pub fn campaign_addition_instance(base: u64, i: u64) -> (EntropyTarget, BlockwisePattern) {
    let mut r = rng(instance_seed(base, i));
    let field = campaign_field(i);
    let d = r.gen_range(2..=3usize);
    let profile = DimensionProfile::constant(field, d);
    let mut all: Vec<usize> = (0..d).collect();
    all.shuffle(&mut r);
    let k = r.gen_range(0..=d);
    let mut slots = all[..k].to_vec();
    slots.sort_unstable();
    let (f, g) = random_automorphism(&mut r, &profile, AutomorphismParams::default(), Some(&slots));
    let target = EntropyTarget::with_inverse(f, g).expect("generated inverse");
    (target, BlockwisePattern::slots(&profile, &slots))
}

pub fn addition_campaign(seed: u64, instances: usize, cfg: &EntropyConfig) -> CampaignSummary {
    let results: Vec<(usize, Result<PropertyReport, TheoremError>)> = (0..instances)
        .into_par_iter()
        .map(|i| {
            let (target, w) = campaign_addition_instance(seed, i as u64);
            (i, check_addition(&target, &w, cfg))
        })
        .collect();
    CampaignSummary::tally("addition", seed, instances, results)
}
