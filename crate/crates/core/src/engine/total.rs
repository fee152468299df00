use super::{
    limit_free_relative_entropy, trajectory_relative_entropy, EngineError, EntropyConfig, EntropyResult, EntropyTarget,
    RelativeEntropyEngine, Status, StopReason,
};
use crate::field::FieldSpec;
use crate::operator::ShiftDirection;
use crate::space::{CompactOpenSubspace, DimensionProfile};

/// `ent(φ)` along `C_0 ⊆ C_1 ⊆ …` using one engine.
pub fn total_entropy_with(
    engine: &dyn RelativeEntropyEngine,
    target: &EntropyTarget,
    cfg: &EntropyConfig,
) -> Result<EntropyResult, EngineError> {
    run_chain(target, cfg, |_, c| engine.relative_entropy(target, c, cfg))
}

/// `ent(φ)` along the cofinal chain with the trajectory engine; with an
/// inverse every chain member is also run through the limit-free engine and
/// the two values must agree.
pub fn total_entropy(target: &EntropyTarget, cfg: &EntropyConfig) -> Result<EntropyResult, EngineError> {
    run_chain(target, cfg, |m, c| {
        let t = trajectory_relative_entropy(target.op(), c, cfg)?;
        if target.inverse().is_some() {
            let l = limit_free_relative_entropy(target, c, cfg)?;
            if t.status != Status::LowerBound && l.status != Status::LowerBound && t.value != l.value {
                return Err(EngineError::EngineDisagreement {
                    index: m,
                    trajectory: t.value,
                    limit_free: l.value,
                });
            }
        }
        Ok(t)
    })
}

/// Index `m*` past which `H(φ, C_m)` is constant.
///
/// `C_m = U_m`, and for `m ≥ b_hi + w` the map `T ↦ T + φ(T)` carries
/// `σ^s`-translates to translates, so `T_n(φ, C_{m+s}) = σ^s T_n(φ, C_m)` and
/// the increments agree. With monotonicity in `U` and cofinality of the chain,
/// `ent(φ) = H(φ, C_{m*})`.
pub fn chain_horizon(op: &crate::operator::BandedOperator) -> usize {
    (op.boundary_range().1 + op.width() as i64).max(0) as usize
}

fn run_chain(
    target: &EntropyTarget,
    cfg: &EntropyConfig,
    mut relative: impl FnMut(usize, &CompactOpenSubspace) -> Result<EntropyResult, EngineError>,
) -> Result<EntropyResult, EngineError> {
    cfg.validate()?;
    let op = target.op();
    let profile = op.profile();
    if profile.is_linearly_compact() {
        // V itself is the largest member of B(V).
        let v = CompactOpenSubspace::cofinal_chain(profile, 0);
        let r = relative(0, &v)?;
        return Ok(EntropyResult {
            value: r.value,
            status: r.status,
            certificate: vec![r.value],
            witness_subspace: v,
            iterations: 1,
            reason: StopReason::ChainHorizon { index: 0 },
        });
    }
    let horizon = chain_horizon(op);
    let mut values: Vec<u64> = Vec::new();
    let mut statuses: Vec<Status> = Vec::new();
    for m in 0..=cfg.max_chain_index.min(horizon + 1) {
        let c = CompactOpenSubspace::cofinal_chain(profile, m);
        let r = relative(m, &c)?;
        values.push(r.value);
        statuses.push(r.status);
        let trusted: Vec<u64> = values
            .iter()
            .zip(&statuses)
            .filter(|(_, s)| **s != Status::LowerBound)
            .map(|(v, _)| *v)
            .collect();
        if let Some(i) = trusted.windows(2).position(|w| w[1] < w[0]) {
            return Err(EngineError::InvariantViolated(format!(
                "H(phi, C_m) decreased at position {}: {:?}",
                i + 1,
                values
            )));
        }
    }
    if values.len() < horizon + 2 {
        let value = values.iter().copied().max().unwrap_or(0);
        return Ok(finish(profile, values, value, Status::LowerBound, StopReason::Cap));
    }
    let (v0, s0) = (values[horizon], statuses[horizon]);
    let (v1, s1) = (values[horizon + 1], statuses[horizon + 1]);
    if s0 != Status::LowerBound && s1 != Status::LowerBound && v0 != v1 {
        return Err(EngineError::InvariantViolated(format!(
            "H(phi, C_m) not constant past m = {horizon}: {values:?}"
        )));
    }
    let status = s0.max(s1);
    Ok(finish(
        profile,
        values,
        v0,
        status,
        StopReason::ChainHorizon { index: horizon },
    ))
}

fn finish(
    profile: &DimensionProfile,
    values: Vec<u64>,
    value: u64,
    status: Status,
    reason: StopReason,
) -> EntropyResult {
    let first = values.iter().position(|&v| v == value).unwrap_or(0);
    EntropyResult {
        value,
        status,
        iterations: values.len(),
        certificate: values,
        witness_subspace: CompactOpenSubspace::cofinal_chain(profile, first),
        reason,
    }
}

/// `ent(β^k) = k·d` and `ent(λ^k) = 0` on a constant profile of dimension `d`.
pub fn shift_closed_form(profile: &DimensionProfile, dir: ShiftDirection, k: u64) -> Result<u64, EngineError> {
    let d = profile.constant_dim().ok_or(EngineError::NonConstantProfile)? as u64;
    Ok(match dir {
        ShiftDirection::Right => k * d,
        ShiftDirection::Left => 0,
    })
}

/// `h_alg = ent · log p`, kept as the exact pair plus a float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HAlg {
    pub ent: u64,
    pub prime: u32,
    pub value: f64,
    pub status: Status,
}

impl HAlg {
    pub fn symbolic(&self) -> String {
        format!("{}*log({})", self.ent, self.prime)
    }

    pub fn decimal(&self) -> String {
        format!("{:.6}", self.value)
    }
}

pub fn h_alg_value(r: &EntropyResult, field: FieldSpec) -> Result<HAlg, EngineError> {
    match field {
        FieldSpec::Prime(p) => Ok(HAlg {
            ent: r.value,
            prime: p,
            value: r.value as f64 * (p as f64).ln(),
            status: r.status,
        }),
        FieldSpec::Rationals => Err(EngineError::InfiniteField),
    }
}
