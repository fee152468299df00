use super::{
    check_same_profile, plateau_horizon, run_increments, EngineError, EntropyConfig, EntropyResult, EntropyTarget,
    StopReason,
};
use crate::space::CompactOpenSubspace;

/// `ψ(W)` for the verified inverse `ψ`.
fn inverse_image(target: &EntropyTarget, w: &CompactOpenSubspace) -> Result<CompactOpenSubspace, EngineError> {
    let psi = target.inverse().ok_or(EngineError::MissingInverse)?;
    Ok(psi.image_of_automorphism(w, target.op().width())?)
}

/// `[U^(0), …, U^(m)]` with `U^(0) = U`, `U^(k+1) = U + φ⁻¹(U^(k))`.
pub fn limit_free_chain(
    target: &EntropyTarget,
    u: &CompactOpenSubspace,
    m: usize,
) -> Result<Vec<CompactOpenSubspace>, EngineError> {
    check_same_profile(target, u)?;
    let mut out = vec![u.clone()];
    for _ in 0..m {
        let next = u.sum(&inverse_image(target, out.last().unwrap())?)?;
        out.push(next);
    }
    Ok(out)
}

/// `H(φ, U) = dim U⁻/φ⁻¹U⁻`, read off `d_m = dim U^(m+1)/φ⁻¹U^(m)`.
pub fn limit_free_relative_entropy(
    target: &EntropyTarget,
    u: &CompactOpenSubspace,
    cfg: &EntropyConfig,
) -> Result<EntropyResult, EngineError> {
    check_same_profile(target, u)?;
    let psi = target.inverse().ok_or(EngineError::MissingInverse)?;
    let width = psi.width() + target.op().width();
    let threshold = psi.boundary_range().1 + width as i64;
    let horizon = plateau_horizon(psi, width, u);
    let r = run_increments(u, cfg, threshold, horizon, "d_m", |um| {
        let psi_um = inverse_image(target, um)?;
        let next = u.sum(&psi_um)?;
        let d = next.quotient_dim(&psi_um)? as u64;
        Ok((next, d))
    })?;
    if r.reason == StopReason::FixedPoint {
        // U⁻ = U^(m): check φ⁻¹U⁻ ⊆ U⁻ and U⁻ = U + φ⁻¹U⁻ directly.
        let um = &r.witness_subspace;
        let psi_um = inverse_image(target, um)?;
        if !um.contains(&psi_um)? || &u.sum(&psi_um)? != um || um.quotient_dim(&psi_um)? as u64 != r.value {
            return Err(EngineError::InvariantViolated("fixed point laws fail for U-".into()));
        }
    }
    Ok(r)
}

/// `φ⁻ⁿ T_n(φ, U) = φ⁻¹ U^(n-1)` for `n = 1..=n_max`.
pub fn t_u_identity_holds(target: &EntropyTarget, u: &CompactOpenSubspace, n_max: usize) -> Result<bool, EngineError> {
    let ts = super::trajectory(target.op(), u, n_max)?;
    let chain = limit_free_chain(target, u, n_max)?;
    for n in 1..=n_max {
        let mut lhs = ts[n - 1].clone();
        for _ in 0..n {
            lhs = inverse_image(target, &lhs)?;
        }
        let rhs = inverse_image(target, &chain[n - 1])?;
        if lhs != rhs {
            return Ok(false);
        }
    }
    Ok(true)
}
