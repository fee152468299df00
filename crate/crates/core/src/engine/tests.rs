use super::*;
use crate::field::FieldSpec;
use crate::linalg::Matrix;
use crate::operator::ShiftDirection;
use crate::space::{Coordinate, DimensionProfile, LlcVector};

fn p1() -> DimensionProfile {
    DimensionProfile::constant(FieldSpec::gf2(), 1)
}

fn shift(p: &DimensionProfile, dir: ShiftDirection) -> BandedOperator {
    BandedOperator::shift(p, dir).unwrap()
}

fn c(p: &DimensionProfile, m: usize) -> CompactOpenSubspace {
    CompactOpenSubspace::cofinal_chain(p, m)
}

fn cfg() -> EntropyConfig {
    EntropyConfig::default()
}

#[test]
fn trajectory_examples() {
    let p = p1();
    let r = trajectory_relative_entropy(&shift(&p, ShiftDirection::Right), &c(&p, 2), &cfg()).unwrap();
    assert_eq!((r.value, r.status), (1, Status::Exact));
    assert_eq!(r.reason, StopReason::Translation { period: 1, shift: 1 });
    assert_eq!(r.certificate, vec![1]);
    // below the stationary band no certificate applies yet
    let r = trajectory_relative_entropy(&shift(&p, ShiftDirection::Right), &c(&p, 0), &cfg()).unwrap();
    assert_eq!((r.value, r.status), (1, Status::Exact));
    assert_eq!(r.certificate, vec![1, 1, 1]);
    let r = trajectory_relative_entropy(&shift(&p, ShiftDirection::Left), &c(&p, 2), &cfg()).unwrap();
    assert_eq!((r.value, r.status, r.iterations), (0, Status::Exact, 1));
    let r = trajectory_relative_entropy(&BandedOperator::identity(&p), &c(&p, 4), &cfg()).unwrap();
    assert_eq!((r.value, r.status), (0, Status::Exact));
}

#[test]
fn trajectory_of_right_shift_walks_the_chain() {
    let p = p1();
    let ts = trajectory(&shift(&p, ShiftDirection::Right), &c(&p, 2), 5).unwrap();
    for (n, t) in ts.iter().enumerate() {
        assert_eq!(t, &c(&p, 2 + n));
    }
}

#[test]
fn cap_reports_lower_bound() {
    let p = p1();
    let tight = EntropyConfig {
        plateau_streak: 5,
        max_trajectory_steps: 2,
        ..cfg()
    };
    let r = trajectory_relative_entropy(&shift(&p, ShiftDirection::Right), &c(&p, 0), &tight).unwrap();
    assert_eq!((r.value, r.status, r.iterations), (1, Status::LowerBound, 2));
}

#[test]
fn limit_free_examples() {
    let p = p1();
    let b = shift(&p, ShiftDirection::Right);
    let l = shift(&p, ShiftDirection::Left);
    let t = EntropyTarget::with_inverse(b.clone(), l.clone()).unwrap();
    let r = limit_free_relative_entropy(&t, &c(&p, 2), &cfg()).unwrap();
    assert_eq!((r.value, r.status, r.iterations), (1, Status::Exact, 1));
    assert_eq!(r.witness_subspace, c(&p, 2));

    let t = EntropyTarget::with_inverse(l, b).unwrap();
    let r = limit_free_relative_entropy(&t, &c(&p, 2), &cfg()).unwrap();
    assert_eq!(r.value, 0);
    assert!(r.certificate.iter().all(|&d| d == 0));

    let id = BandedOperator::identity(&p);
    let t = EntropyTarget::with_inverse(id.clone(), id).unwrap();
    let r = limit_free_relative_entropy(&t, &c(&p, 3), &cfg()).unwrap();
    assert_eq!((r.value, r.status, r.iterations), (0, Status::Exact, 1));
}

#[test]
fn limit_free_refuses_without_inverse() {
    let p = p1();
    let b = shift(&p, ShiftDirection::Right);
    let t = EntropyTarget::new(b.clone()).unwrap();
    assert_eq!(
        limit_free_relative_entropy(&t, &c(&p, 1), &cfg()).unwrap_err(),
        EngineError::MissingInverse
    );
    assert_eq!(
        EntropyTarget::with_inverse(b.clone(), b).unwrap_err(),
        EngineError::NotAnInverse
    );
}

#[test]
fn total_entropy_examples() {
    for d in [1, 2, 3] {
        let p = DimensionProfile::constant(FieldSpec::gf2(), d);
        let b = shift(&p, ShiftDirection::Right);
        let l = shift(&p, ShiftDirection::Left);
        let tb = EntropyTarget::with_inverse(b.clone(), l.clone()).unwrap();
        let r = total_entropy(&tb, &cfg()).unwrap();
        assert_eq!((r.value, r.status), (d as u64, Status::Exact));
        assert_eq!(r.reason, StopReason::ChainHorizon { index: 2 });
        let r = total_entropy(&tb.inverted().unwrap(), &cfg()).unwrap();
        assert_eq!(r.value, 0);
    }
    let p = DimensionProfile::new(FieldSpec::gf2(), 2, -1, vec![1, 3, 0], 2).unwrap();
    let r = total_entropy(&EntropyTarget::new(BandedOperator::identity(&p)).unwrap(), &cfg()).unwrap();
    assert_eq!(r.value, 0);
    let lc = DimensionProfile::new(FieldSpec::gf2(), 2, 0, vec![1], 0).unwrap();
    assert!(lc.is_linearly_compact());
    let r = total_entropy(&EntropyTarget::new(BandedOperator::identity(&lc)).unwrap(), &cfg()).unwrap();
    assert_eq!((r.value, r.status), (0, Status::Exact));
}

#[test]
fn registry_lookup() {
    let reg = EngineRegistry::default();
    assert_eq!(reg.names(), vec!["discrete", "limitfree", "trajectory"]);
    assert!(matches!(reg.get("nope"), Err(EngineError::UnknownEngine(_))));
    let p = p1();
    let t = EntropyTarget::with_inverse(shift(&p, ShiftDirection::Right), shift(&p, ShiftDirection::Left)).unwrap();
    for name in ["limitfree", "trajectory"] {
        let r = total_entropy_with(reg.get(name).unwrap().as_ref(), &t, &cfg()).unwrap();
        assert_eq!(r.value, 1, "{name}");
    }
}

#[test]
fn closed_forms() {
    let f = FieldSpec::gf2();
    let c1 = DimensionProfile::constant(f, 1);
    let c3 = DimensionProfile::constant(f, 3);
    let c5 = DimensionProfile::constant(f, 5);
    assert_eq!(shift_closed_form(&c1, ShiftDirection::Right, 1).unwrap(), 1);
    assert_eq!(shift_closed_form(&c3, ShiftDirection::Right, 2).unwrap(), 6);
    assert_eq!(shift_closed_form(&c5, ShiftDirection::Left, 7).unwrap(), 0);
    assert_eq!(shift_closed_form(&c5, ShiftDirection::Right, 0).unwrap(), 0);
    let np = DimensionProfile::new(f, 1, 0, vec![2], 1).unwrap();
    assert_eq!(
        shift_closed_form(&np, ShiftDirection::Right, 1).unwrap_err(),
        EngineError::NonConstantProfile
    );
}

fn discrete_line(f: FieldSpec) -> DimensionProfile {
    DimensionProfile::new(f, 0, 0, vec![0], 1).unwrap()
}

fn finite(p: &DimensionProfile, levels: &[i64]) -> CompactOpenSubspace {
    let gens: Vec<LlcVector> = levels
        .iter()
        .map(|&n| LlcVector::basis(p, Coordinate::new(n, 0)).unwrap())
        .collect();
    CompactOpenSubspace::from_generators(p, 0, &gens).unwrap()
}

#[test]
fn ent_dim_examples() {
    let f = FieldSpec::gf2();
    let full = DimensionProfile::constant(f, 1);
    let one_sided = shift(&full, ShiftDirection::Right).decompose_vc_vd().dd_on_vd;
    let p = discrete_line(f);
    assert_eq!(one_sided.profile(), &p);
    let fsub = finite(&p, &[1]);
    let r = ent_dim_discrete(&one_sided, &fsub, &cfg()).unwrap();
    assert_eq!(r.value, 1);
    let t = trajectory_relative_entropy(&one_sided, &fsub, &cfg()).unwrap();
    assert_eq!(t.value, r.value);

    let r = ent_dim_discrete(&BandedOperator::identity(&p), &finite(&p, &[1, 3]), &cfg()).unwrap();
    assert_eq!((r.value, r.status), (0, Status::Exact));

    // Jordan block on levels 1..3: e_1 -> e_2 -> e_3 -> 0
    let jordan = BandedOperator::stationary_with(
        &p,
        1,
        vec![Matrix::zeros(f, 0, 0); 3],
        vec![Matrix::zeros(f, 1, 1); 3],
        Some((0, 5)),
        |c| {
            Some(if c.level == 1 || c.level == 2 {
                LlcVector::basis(&p, Coordinate::new(c.level + 1, 0)).unwrap()
            } else {
                LlcVector::zero(&p)
            })
        },
    )
    .unwrap();
    let r = ent_dim_discrete(&jordan, &finite(&p, &[1]), &cfg()).unwrap();
    assert_eq!(r.value, 0);
    assert_eq!(r.certificate, vec![1, 1, 0]);

    assert_eq!(
        ent_dim_discrete(&BandedOperator::identity(&full), &c(&full, 1), &cfg()).unwrap_err(),
        EngineError::NotDiscreteProfile
    );
}

#[test]
fn h_alg_examples() {
    let p = p1();
    let r = total_entropy(&EntropyTarget::new(shift(&p, ShiftDirection::Right)).unwrap(), &cfg()).unwrap();
    let h = h_alg_value(&r, FieldSpec::gf2()).unwrap();
    assert!((h.value - 2f64.ln()).abs() < 1e-12);
    assert_eq!(h.symbolic(), "1*log(2)");
    assert_eq!(h.decimal(), "0.693147");
    let mut three = r.clone();
    three.value = 3;
    let gf3 = FieldSpec::prime(3).unwrap();
    assert!((h_alg_value(&three, gf3).unwrap().value - 3.0 * 3f64.ln()).abs() < 1e-12);
    three.value = 0;
    assert_eq!(h_alg_value(&three, gf3).unwrap().value, 0.0);
    assert_eq!(
        h_alg_value(&r, FieldSpec::Rationals).unwrap_err(),
        EngineError::InfiniteField
    );
}

#[test]
fn t_u_identity_on_shifts() {
    let p = DimensionProfile::constant(FieldSpec::gf2(), 2);
    let t = EntropyTarget::with_inverse(shift(&p, ShiftDirection::Right), shift(&p, ShiftDirection::Left)).unwrap();
    for m in 0..3 {
        assert!(t_u_identity_holds(&t, &c(&p, m), 6).unwrap());
        assert!(t_u_identity_holds(&t.inverted().unwrap(), &c(&p, m), 6).unwrap());
    }
}
