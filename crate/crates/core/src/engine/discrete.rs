use super::{
    check_non_increasing, plateau, plateau_horizon, EngineError, EntropyConfig, EntropyResult, EntropyTarget,
    RelativeEntropyEngine, Status, StopReason,
};
use crate::linalg::SubspaceBasis;
use crate::operator::BandedOperator;
use crate::space::{CompactOpenSubspace, LlcVector, Window};

fn dense_span(op: &BandedOperator, vecs: &[LlcVector]) -> Result<(Window, SubspaceBasis), EngineError> {
    let profile = op.profile();
    let top = vecs.iter().filter_map(LlcVector::max_level).fold(0, i64::max);
    let frame = Window::new(profile, 0, top);
    let rows = vecs
        .iter()
        .map(|v| frame.to_dense(v).expect("discrete support"))
        .collect();
    let basis = SubspaceBasis::span(profile.field(), frame.dim(), rows).map_err(crate::space::SpaceError::from)?;
    Ok((frame, basis))
}

/// `H_dim(φ, F) = lim dim(F + φF + … + φ^{n-1}F)/n` on a discrete space, by
/// plain finite-dimensional spans.
pub fn ent_dim_discrete(
    op: &BandedOperator,
    f: &CompactOpenSubspace,
    cfg: &EntropyConfig,
) -> Result<EntropyResult, EngineError> {
    cfg.validate()?;
    let profile = op.profile();
    if !profile.is_discrete() {
        return Err(EngineError::NotDiscreteProfile);
    }
    if profile != f.profile() {
        return Err(EngineError::ProfileMismatch);
    }
    let horizon = plateau_horizon(op, op.width(), f);
    let f_gens = f.window_generators();
    let (mut frame, mut span) = dense_span(op, &f_gens)?;
    let mut cert = Vec::new();
    for n in 1..=cfg.max_trajectory_steps {
        let mut gens = f_gens.clone();
        for row in span.rows() {
            gens.push(op.apply(&frame.from_dense(profile, row))?);
        }
        let (next_frame, next) = dense_span(op, &gens)?;
        let alpha = (next.dim() - span.dim()) as u64;
        cert.push(alpha);
        check_non_increasing(&cert, "alpha")?;
        frame = next_frame;
        span = next;
        let stop = if alpha == 0 {
            Some((Status::Exact, StopReason::ZeroIncrement))
        } else if plateau(&cert, cfg.plateau_streak, horizon).is_some() {
            Some((Status::PlateauDetected, StopReason::Plateau))
        } else {
            None
        };
        if let Some((status, reason)) = stop {
            return Ok(EntropyResult {
                value: alpha,
                status,
                certificate: cert,
                witness_subspace: witness(op, &frame, &span)?,
                iterations: n,
                reason,
            });
        }
    }
    Ok(EntropyResult {
        value: *cert.last().expect("at least one step"),
        status: Status::LowerBound,
        certificate: cert,
        witness_subspace: witness(op, &frame, &span)?,
        iterations: cfg.max_trajectory_steps,
        reason: StopReason::Cap,
    })
}

fn witness(op: &BandedOperator, frame: &Window, span: &SubspaceBasis) -> Result<CompactOpenSubspace, EngineError> {
    let gens: Vec<LlcVector> = span.rows().map(|r| frame.from_dense(op.profile(), r)).collect();
    Ok(CompactOpenSubspace::from_generators(op.profile(), 0, &gens)?)
}

/// [`ent_dim_discrete`] as a registry engine; refuses non-discrete profiles.
pub struct DiscreteEngine;

impl RelativeEntropyEngine for DiscreteEngine {
    fn name(&self) -> &'static str {
        "discrete"
    }

    fn relative_entropy(
        &self,
        target: &EntropyTarget,
        u: &CompactOpenSubspace,
        cfg: &EntropyConfig,
    ) -> Result<EntropyResult, EngineError> {
        ent_dim_discrete(target.op(), u, cfg)
    }
}
