//! Relative and total algebraic entropy.
//!
//! Two engines compute `H(φ, U)` for a compact open `U`:
//!
//! * the trajectory engine iterates `T_1 = U`, `T_{n+1} = U + φ(T_n)` and reads
//!   off the non-increasing increments `α_n = dim T_{n+1}/T_n`;
//! * the limit-free engine (automorphisms only) iterates
//!   `U^(m+1) = U + φ⁻¹(U^(m))` and reads off `d_m = dim U^(m+1)/φ⁻¹(U^(m))`,
//!   whose limit is `dim U⁻/φ⁻¹U⁻`.
//!
//! Neither sequence comes with a bound on when it becomes stationary, so every
//! result carries a [`Status`]: `Exact` for a genuine fixed point, `PlateauDetected`
//! when the last `plateau_streak` increments agree, `LowerBound` when a cap was hit.

mod discrete;
mod limit_free;
mod total;
mod trajectory;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::operator::{verify_inverse, BandedOperator, OperatorError, Violation};
use crate::space::{CompactOpenSubspace, SpaceError};

pub use discrete::{ent_dim_discrete, DiscreteEngine};
pub use limit_free::{limit_free_chain, limit_free_relative_entropy, t_u_identity_holds};
pub use total::{chain_horizon, h_alg_value, shift_closed_form, total_entropy, total_entropy_with, HAlg};
pub use trajectory::{trajectory, trajectory_relative_entropy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntropyConfig {
    pub plateau_streak: usize,
    pub max_trajectory_steps: usize,
    pub max_chain_index: usize,
    pub strict: bool,
}

impl Default for EntropyConfig {
    fn default() -> Self {
        EntropyConfig {
            plateau_streak: 3,
            max_trajectory_steps: 64,
            max_chain_index: 24,
            strict: false,
        }
    }
}

impl EntropyConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        if self.plateau_streak == 0 || self.max_trajectory_steps == 0 || self.max_chain_index == 0 {
            return Err(EngineError::BadConfig(
                "plateau_streak, max_trajectory_steps and max_chain_index must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Status {
    Exact,
    PlateauDetected,
    LowerBound,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Exact => "Exact",
            Status::PlateauDetected => "PlateauDetected",
            Status::LowerBound => "LowerBound",
        })
    }
}

/// Which rule ended an iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// An increment hit 0; a non-increasing sequence of naturals stays there.
    ZeroIncrement,
    /// The chain itself became stationary.
    FixedPoint,
    /// The chain became a translate of an earlier member beyond the
    /// stationary band, so the increments are periodic, hence constant.
    Translation { period: usize, shift: i64 },
    /// The chain member `C_m` past which `H(φ, C_m)` is constant was reached.
    ChainHorizon { index: usize },
    /// Streak of equal increments past the plateau horizon.
    Plateau,
    /// Iteration cap.
    Cap,
}

#[derive(Debug, Clone)]
pub struct EntropyResult {
    pub value: u64,
    pub status: Status,
    /// `α_n`, `d_m` or `H(φ, C_m)` depending on the producer.
    pub certificate: Vec<u64>,
    pub witness_subspace: CompactOpenSubspace,
    pub iterations: usize,
    pub reason: StopReason,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("profile mismatch")]
    ProfileMismatch,
    #[error("invalid operator: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidOperator(Vec<Violation>),
    #[error("supplied inverse is not a two-sided inverse")]
    NotAnInverse,
    #[error("limit-free engine requires a verified inverse")]
    MissingInverse,
    #[error("engines disagree on C_{index}: trajectory {trajectory}, limit-free {limit_free}")]
    EngineDisagreement {
        index: usize,
        trajectory: u64,
        limit_free: u64,
    },
    #[error("engine invariant violated: {0}")]
    InvariantViolated(String),
    #[error("profile is not discrete")]
    NotDiscreteProfile,
    #[error("profile is not constant")]
    NonConstantProfile,
    #[error("h_alg needs a finite field")]
    InfiniteField,
    #[error("unknown engine {0:?}")]
    UnknownEngine(String),
    #[error("bad config: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// An operator, validated, optionally paired with a verified two-sided inverse.
#[derive(Debug, Clone)]
pub struct EntropyTarget {
    op: BandedOperator,
    inverse: Option<BandedOperator>,
}

impl EntropyTarget {
    pub fn new(op: BandedOperator) -> Result<Self, EngineError> {
        let v = op.validate();
        if !v.is_empty() {
            return Err(EngineError::InvalidOperator(v));
        }
        Ok(EntropyTarget { op, inverse: None })
    }

    pub fn with_inverse(op: BandedOperator, inverse: BandedOperator) -> Result<Self, EngineError> {
        let mut t = Self::new(op)?;
        let v = inverse.validate();
        if !v.is_empty() {
            return Err(EngineError::InvalidOperator(v));
        }
        if t.op.profile() != inverse.profile() {
            return Err(EngineError::ProfileMismatch);
        }
        if !verify_inverse(&t.op, &inverse)? {
            return Err(EngineError::NotAnInverse);
        }
        t.inverse = Some(inverse);
        Ok(t)
    }

    pub fn op(&self) -> &BandedOperator {
        &self.op
    }

    pub fn inverse(&self) -> Option<&BandedOperator> {
        self.inverse.as_ref()
    }

    /// `φ⁻¹` as a target with inverse `φ`.
    pub fn inverted(&self) -> Option<EntropyTarget> {
        self.inverse.as_ref().map(|inv| EntropyTarget {
            op: inv.clone(),
            inverse: Some(self.op.clone()),
        })
    }
}

/// A relative entropy algorithm, selectable by name.
pub trait RelativeEntropyEngine: Send + Sync {
    fn name(&self) -> &'static str;
    fn relative_entropy(
        &self,
        target: &EntropyTarget,
        u: &CompactOpenSubspace,
        cfg: &EntropyConfig,
    ) -> Result<EntropyResult, EngineError>;
}

pub struct TrajectoryEngine;

impl RelativeEntropyEngine for TrajectoryEngine {
    fn name(&self) -> &'static str {
        "trajectory"
    }

    fn relative_entropy(
        &self,
        target: &EntropyTarget,
        u: &CompactOpenSubspace,
        cfg: &EntropyConfig,
    ) -> Result<EntropyResult, EngineError> {
        trajectory_relative_entropy(target.op(), u, cfg)
    }
}

pub struct LimitFreeEngine;

impl RelativeEntropyEngine for LimitFreeEngine {
    fn name(&self) -> &'static str {
        "limitfree"
    }

    fn relative_entropy(
        &self,
        target: &EntropyTarget,
        u: &CompactOpenSubspace,
        cfg: &EntropyConfig,
    ) -> Result<EntropyResult, EngineError> {
        limit_free_relative_entropy(target, u, cfg)
    }
}

#[derive(Clone)]
pub struct EngineRegistry {
    engines: BTreeMap<&'static str, Arc<dyn RelativeEntropyEngine>>,
}

impl Default for EngineRegistry {
    fn default() -> Self {
        let mut r = EngineRegistry {
            engines: BTreeMap::new(),
        };
        r.register(Arc::new(TrajectoryEngine));
        r.register(Arc::new(LimitFreeEngine));
        r.register(Arc::new(DiscreteEngine));
        r
    }
}

impl EngineRegistry {
    pub fn register(&mut self, engine: Arc<dyn RelativeEntropyEngine>) {
        self.engines.insert(engine.name(), engine);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn RelativeEntropyEngine>, EngineError> {
        self.engines
            .get(name)
            .cloned()
            .ok_or_else(|| EngineError::UnknownEngine(name.to_string()))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.engines.keys().copied().collect()
    }
}

/// Value of the last `streak` entries if they all agree and the first of them
/// sits at (1-based) position `≥ horizon`.
pub(crate) fn plateau(seq: &[u64], streak: usize, horizon: usize) -> Option<u64> {
    let last = *seq.last()?;
    (seq.len() >= streak && seq.len() + 1 - streak >= horizon && seq[seq.len() - streak..].iter().all(|&x| x == last))
        .then_some(last)
}

/// Heuristic number of steps before a plateau is trusted: the dimension of the
/// levels from `a - w` up to the stationary band, plus room for transients of
/// the stationary blocks.
pub(crate) fn plateau_horizon(op: &BandedOperator, width: usize, u: &CompactOpenSubspace) -> usize {
    let p = op.profile();
    let w = width as i64;
    let top = u.window_top().max(op.boundary_range().1 + w);
    let region: usize = (u.tail_cut() - w + 1..=top).map(|n| p.dim(n)).sum();
    region + p.d_right() * (2 * width + 1)
}

struct Member {
    space: CompactOpenSubspace,
    prefix: i64,
    upper: Vec<crate::space::LlcVector>,
}

impl Member {
    fn new(space: CompactOpenSubspace) -> Self {
        let prefix = space.full_prefix();
        let upper = space.rows_above(prefix);
        Member { space, prefix, upper }
    }
}

/// Drives an increasing chain `X_0 = U`, `X_{k+1} = step(X_k)` whose
/// increments are non-increasing, and which commutes with translation for
/// members containing `U_L`, `L ≥ threshold`.
pub(crate) fn run_increments(
    u: &CompactOpenSubspace,
    cfg: &EntropyConfig,
    threshold: i64,
    horizon: usize,
    what: &str,
    mut step: impl FnMut(&CompactOpenSubspace) -> Result<(CompactOpenSubspace, u64), EngineError>,
) -> Result<EntropyResult, EngineError> {
    cfg.validate()?;
    let mut history = vec![Member::new(u.clone())];
    let mut cert: Vec<u64> = Vec::new();
    for k in 0..cfg.max_trajectory_steps {
        let cur = &history[k].space;
        let (next, inc) = step(cur)?;
        if !next.contains(cur)? {
            return Err(EngineError::InvariantViolated(format!(
                "{what}: chain is not increasing at step {}",
                k + 1
            )));
        }
        cert.push(inc);
        check_non_increasing(&cert, what)?;
        let done =
            |value: u64, status: Status, reason: StopReason, cert: Vec<u64>, w: CompactOpenSubspace| EntropyResult {
                value,
                status,
                certificate: cert,
                witness_subspace: w,
                iterations: k + 1,
                reason,
            };
        if inc == 0 {
            return Ok(done(0, Status::Exact, StopReason::ZeroIncrement, cert, next));
        }
        if &next == cur {
            return Ok(done(inc, Status::Exact, StopReason::FixedPoint, cert, next));
        }
        let member = Member::new(next);
        for (i, old) in history.iter().enumerate() {
            let shift = member.prefix - old.prefix;
            if old.prefix < threshold || shift < 1 || old.upper.len() != member.upper.len() {
                continue;
            }
            let moved: Result<Vec<_>, _> = old.upper.iter().map(|v| v.translate(shift)).collect();
            if moved? == member.upper {
                if cert[i..].iter().any(|&x| x != inc) {
                    return Err(EngineError::InvariantViolated(format!(
                        "{what}: periodic chain with non-constant increments {cert:?}"
                    )));
                }
                let reason = StopReason::Translation {
                    period: k + 1 - i,
                    shift,
                };
                return Ok(done(inc, Status::Exact, reason, cert, member.space));
            }
        }
        if plateau(&cert, cfg.plateau_streak, horizon).is_some() {
            return Ok(done(
                inc,
                Status::PlateauDetected,
                StopReason::Plateau,
                cert,
                member.space,
            ));
        }
        history.push(member);
    }
    let last = history.pop().expect("non-empty").space;
    Ok(EntropyResult {
        value: *cert.last().expect("at least one step"),
        status: Status::LowerBound,
        certificate: cert,
        witness_subspace: last,
        iterations: cfg.max_trajectory_steps,
        reason: StopReason::Cap,
    })
}

pub(crate) fn check_non_increasing(seq: &[u64], what: &str) -> Result<(), EngineError> {
    if let Some(i) = seq.windows(2).position(|w| w[1] > w[0]) {
        return Err(EngineError::InvariantViolated(format!(
            "{what} increased at step {}: {:?}",
            i + 1,
            seq
        )));
    }
    Ok(())
}

pub(crate) fn check_same_profile(target: &EntropyTarget, u: &CompactOpenSubspace) -> Result<(), EngineError> {
    if target.op().profile() != u.profile() {
        return Err(EngineError::ProfileMismatch);
    }
    Ok(())
}

#[cfg(test)]
mod tests;
