use super::{plateau_horizon, run_increments, EngineError, EntropyConfig, EntropyResult};
use crate::operator::BandedOperator;
use crate::space::CompactOpenSubspace;

fn step(
    op: &BandedOperator,
    u: &CompactOpenSubspace,
    t: &CompactOpenSubspace,
) -> Result<CompactOpenSubspace, EngineError> {
    // U ⊇ U_a, so U + φ(T) = U + (φ(T) + U_a).
    Ok(u.sum(&op.image_plus_tail(t, u.tail_cut())?)?)
}

/// `[T_1, …, T_n]` for `T_1 = U`, `T_{k+1} = U + φ(T_k)`.
pub fn trajectory(
    op: &BandedOperator,
    u: &CompactOpenSubspace,
    n: usize,
) -> Result<Vec<CompactOpenSubspace>, EngineError> {
    if op.profile() != u.profile() {
        return Err(EngineError::ProfileMismatch);
    }
    let mut out = vec![u.clone()];
    while out.len() < n {
        let next = step(op, u, out.last().unwrap())?;
        out.push(next);
    }
    Ok(out)
}

/// `H(φ, U)` as the eventual value of `α_n = dim T_{n+1}/T_n`.
///
/// Beyond level `b_hi + w` the map `T ↦ T + φ(T)` commutes with the level
/// translation `σ`, so once `T_{n+1} = σ^s T_k` with `T_k ⊇ U_{b_hi + w}` the
/// increments are periodic from `k` on and, being non-increasing, constant.
pub fn trajectory_relative_entropy(
    op: &BandedOperator,
    u: &CompactOpenSubspace,
    cfg: &EntropyConfig,
) -> Result<EntropyResult, EngineError> {
    if op.profile() != u.profile() {
        return Err(EngineError::ProfileMismatch);
    }
    let threshold = op.boundary_range().1 + op.width() as i64;
    let horizon = plateau_horizon(op, op.width(), u);
    run_increments(u, cfg, threshold, horizon, "alpha", |t| {
        let next = step(op, u, t)?;
        let alpha = next.quotient_dim(t)? as u64;
        Ok((next, alpha))
    })
}
