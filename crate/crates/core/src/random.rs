//! Seeded generators for random operators, automorphisms and subspaces.
//!
//! All randomness flows from a `u64` seed through ChaCha8, so campaigns are
//! reproducible instance by instance.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::{FieldSpec, Scalar};
use crate::linalg::{inverse, Matrix};
use crate::operator::{BandedOperator, ShiftDirection};
use crate::space::{CompactOpenSubspace, Coordinate, DimensionProfile, LlcVector};

pub type InstanceRng = ChaCha8Rng;

pub fn rng(seed: u64) -> InstanceRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed of the `i`-th instance of a campaign.
pub fn instance_seed(base: u64, i: u64) -> u64 {
    base ^ i.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

pub fn random_scalar<R: Rng + ?Sized>(rng: &mut R, field: FieldSpec) -> Scalar {
    match field {
        FieldSpec::Prime(p) => field.from_i64(rng.gen_range(0..p as i64)),
        FieldSpec::Rationals => field.from_i64(rng.gen_range(-3..=3)),
    }
}

fn sparse_scalar<R: Rng + ?Sized>(rng: &mut R, field: FieldSpec, density: f64) -> Scalar {
    if rng.gen_bool(density) {
        random_scalar(rng, field)
    } else {
        field.zero()
    }
}

pub fn random_matrix(rng: &mut impl Rng, field: FieldSpec, rows: usize, cols: usize) -> Matrix {
    let mut m = Matrix::zeros(field, rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            m.set(r, c, random_scalar(rng, field));
        }
    }
    m
}

/// Random invertible `d×d` matrix together with its inverse. With
/// `preserve = Some(S)` the span of the slots in `S` is mapped into itself.
pub fn random_invertible(
    rng: &mut impl Rng,
    field: FieldSpec,
    d: usize,
    preserve: Option<&[usize]>,
) -> (Matrix, Matrix) {
    loop {
        let mut m = random_matrix(rng, field, d, d);
        if let Some(s) = preserve {
            for c in s {
                for r in (0..d).filter(|r| !s.contains(r)) {
                    m.set(r, *c, field.zero());
                }
            }
        }
        if let Some(inv) = inverse(&m) {
            return (m, inv);
        }
    }
}

/// Random profile with boundary levels inside `[-3, 3]`.
pub fn random_profile(rng: &mut impl Rng, field: FieldSpec, max_dim: usize) -> DimensionProfile {
    let n_left = rng.gen_range(-3..=0);
    let n_right = rng.gen_range(0..=3);
    let boundary = (n_left..=n_right).map(|_| rng.gen_range(0..=max_dim)).collect();
    DimensionProfile::new(
        field,
        rng.gen_range(1..=max_dim),
        n_left,
        boundary,
        rng.gen_range(1..=max_dim),
    )
    .expect("non-empty boundary")
}

/// Random banded operator of width `w`: random stationary blocks and random
/// columns on the levels around the profile boundary.
pub fn random_banded(rng: &mut impl Rng, profile: &DimensionProfile, w: usize, density: f64) -> BandedOperator {
    let field = profile.field();
    let wi = w as i64;
    let blocks = |rng: &mut dyn rand::RngCore, d: usize| -> Vec<Matrix> {
        (0..2 * w + 1)
            .map(|_| {
                let mut m = Matrix::zeros(field, d, d);
                for r in 0..d {
                    for c in 0..d {
                        m.set(r, c, sparse_scalar(rng, field, density));
                    }
                }
                m
            })
            .collect()
    };
    let left = blocks(rng, profile.d_left());
    let right = blocks(rng, profile.d_right());
    let lo = profile.n_left() - wi - 1;
    let hi = profile.n_right() + wi + 1;
    let mut cols = std::collections::BTreeMap::new();
    for n in lo..=hi {
        for i in 0..profile.dim(n) {
            let mut v = LlcVector::zero(profile);
            for m in n - wi..=n + wi {
                for j in 0..profile.dim(m) {
                    let s = sparse_scalar(rng, field, density);
                    if !s.is_zero() {
                        v.add_at(Coordinate::new(m, j), &s);
                    }
                }
            }
            cols.insert(Coordinate::new(n, i), v);
        }
    }
    BandedOperator::stationary_with(profile, w, left, right, Some((lo, hi)), |c| cols.get(&c).cloned())
        .expect("random operator is well formed")
}

/// Level-wise invertible block map (width 0) with its inverse: stationary
/// blocks outside `[-3, 3]`, independent random blocks inside.
pub fn random_levelwise(
    rng: &mut impl Rng,
    profile: &DimensionProfile,
    preserve: Option<&[usize]>,
) -> (BandedOperator, BandedOperator) {
    let field = profile.field();
    let (al, al_inv) = random_invertible(rng, field, profile.d_left(), preserve);
    let (ar, ar_inv) = random_invertible(rng, field, profile.d_right(), preserve);
    let (lo, hi) = (profile.n_left().min(-3), profile.n_right().max(3));
    let mut fwd = std::collections::BTreeMap::new();
    let mut bwd = std::collections::BTreeMap::new();
    for n in lo..=hi {
        let (m, inv) = random_invertible(rng, field, profile.dim(n), preserve);
        fwd.insert(n, m);
        bwd.insert(n, inv);
    }
    let build = |blocks: &std::collections::BTreeMap<i64, Matrix>, l: Matrix, r: Matrix| {
        BandedOperator::stationary_with(profile, 0, vec![l], vec![r], Some((lo, hi)), |c| {
            let b = blocks.get(&c.level)?;
            let entries = (0..b.rows()).map(|row| (Coordinate::new(c.level, row), b.get(row, c.slot).clone()));
            Some(LlcVector::from_entries(profile, entries).expect("level block"))
        })
        .expect("level-wise operator")
    };
    (build(&fwd, al, ar), build(&bwd, al_inv, ar_inv))
}

/// Unipotent `I + N` with `N` strictly triangular in `(level, slot)` order,
/// supported on levels `[-3, 3]` with band 1, together with its inverse.
pub fn random_unipotent(
    rng: &mut impl Rng,
    profile: &DimensionProfile,
    density: f64,
    preserve: Option<&[usize]>,
) -> (BandedOperator, BandedOperator) {
    let field = profile.field();
    let upward = rng.gen_bool(0.5);
    let allowed = |src: usize, tgt: usize| match preserve {
        Some(s) => !(s.contains(&src) && !s.contains(&tgt)),
        None => true,
    };
    let mut cols = std::collections::BTreeMap::new();
    for n in -3..=3i64 {
        for i in 0..profile.dim(n) {
            let src = Coordinate::new(n, i);
            let mut v = LlcVector::zero(profile);
            let targets = if upward { [n, n + 1] } else { [n - 1, n] };
            for m in targets.into_iter().filter(|m| (-3..=3).contains(m)) {
                for j in 0..profile.dim(m) {
                    let tgt = Coordinate::new(m, j);
                    let ordered = if upward { tgt > src } else { tgt < src };
                    if ordered && allowed(i, j) {
                        let s = sparse_scalar(rng, field, density);
                        if !s.is_zero() {
                            v.add_at(tgt, &s);
                        }
                    }
                }
            }
            cols.insert(src, v);
        }
    }
    let zl = vec![Matrix::zeros(field, profile.d_left(), profile.d_left()); 3];
    let zr = vec![Matrix::zeros(field, profile.d_right(), profile.d_right()); 3];
    let n = BandedOperator::stationary_with(profile, 1, zl, zr, Some((-4, 4)), |c| {
        Some(cols.get(&c).cloned().unwrap_or_else(|| LlcVector::zero(profile)))
    })
    .expect("nilpotent part");
    let id = BandedOperator::identity(profile);
    let fwd = id.add(&n).expect("same profile");
    // (I + N)^{-1} = Σ (-N)^k, a finite sum since N is nilpotent.
    let minus_one = field.from_i64(-1);
    let zero = BandedOperator::zero(profile);
    let neg_n = zero.linear_combination(&n, &minus_one).expect("same profile");
    let mut inv = id.clone();
    let mut term = id;
    loop {
        term = neg_n.compose(&term).expect("same profile");
        if term.same_map(&zero) {
            break;
        }
        inv = inv.add(&term).expect("same profile");
    }
    (fwd, inv)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AutomorphismParams {
    pub allow_shift: bool,
    pub density: f64,
}

impl Default for AutomorphismParams {
    fn default() -> Self {
        AutomorphismParams {
            allow_shift: true,
            density: 0.4,
        }
    }
}

/// Random shift-like automorphism `S ∘ G ∘ (I + N)` (factors in random order)
/// with its inverse. `S` is a power of a Bernoulli shift in `{λ, 1, β}`
/// (constant profiles only), `G` level-wise, `I + N` unipotent. Band width ≤ 2.
/// With `preserve` the slot pattern spanned by those slots is invariant.
pub fn random_automorphism(
    rng: &mut impl Rng,
    profile: &DimensionProfile,
    params: AutomorphismParams,
    preserve: Option<&[usize]>,
) -> (BandedOperator, BandedOperator) {
    let mut factors = Vec::new();
    if params.allow_shift && profile.constant_dim().is_some() {
        match rng.gen_range(0..3) {
            0 => factors.push((
                BandedOperator::shift(profile, ShiftDirection::Right).unwrap(),
                BandedOperator::shift(profile, ShiftDirection::Left).unwrap(),
            )),
            1 => factors.push((
                BandedOperator::shift(profile, ShiftDirection::Left).unwrap(),
                BandedOperator::shift(profile, ShiftDirection::Right).unwrap(),
            )),
            _ => {}
        }
    }
    factors.push(random_levelwise(rng, profile, preserve));
    factors.push(random_unipotent(rng, profile, params.density, preserve));
    factors.shuffle(rng);
    let mut fwd = BandedOperator::identity(profile);
    let mut bwd = BandedOperator::identity(profile);
    for (f, g) in factors {
        fwd = f.compose(&fwd).expect("same profile");
        bwd = bwd.compose(&g).expect("same profile");
    }
    (fwd, bwd)
}

/// Random compact open subspace with tail cut in `[-3, 0]` and window top in
/// `[tail, 3]`.
pub fn random_open_subspace(rng: &mut impl Rng, profile: &DimensionProfile, density: f64) -> CompactOpenSubspace {
    let field = profile.field();
    let a = rng.gen_range(-3..=0);
    let b = rng.gen_range(a..=3);
    let count = rng.gen_range(0..=4);
    let gens: Vec<LlcVector> = (0..count)
        .map(|_| {
            let mut v = LlcVector::zero(profile);
            for n in a + 1..=b {
                for i in 0..profile.dim(n) {
                    let s = sparse_scalar(rng, field, density);
                    if !s.is_zero() {
                        v.add_at(Coordinate::new(n, i), &s);
                    }
                }
            }
            v
        })
        .collect();
    CompactOpenSubspace::from_generators(profile, a, &gens).expect("generators inside the window")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::verify_inverse;
    use crate::space::BlockwisePattern;

    #[test]
    fn automorphisms_come_with_inverses() {
        for seed in 0..20 {
            let mut r = rng(seed);
            let field = if seed % 2 == 0 {
                FieldSpec::gf2()
            } else {
                FieldSpec::prime(3).unwrap()
            };
            let p = if seed % 3 == 0 {
                random_profile(&mut r, field, 2)
            } else {
                DimensionProfile::constant(field, 1 + (seed as usize % 2))
            };
            let (f, g) = random_automorphism(&mut r, &p, AutomorphismParams::default(), None);
            assert!(f.width() <= 2, "{f:?}");
            assert!(verify_inverse(&f, &g).unwrap(), "seed {seed}");
        }
    }

    #[test]
    fn preserved_slots_stay_invariant() {
        for seed in 0..10 {
            let mut r = rng(seed);
            let p = DimensionProfile::constant(FieldSpec::gf2(), 3);
            let slots = [0usize, 2];
            let (f, g) = random_automorphism(&mut r, &p, AutomorphismParams::default(), Some(&slots));
            assert!(verify_inverse(&f, &g).unwrap());
            let w = BlockwisePattern::slots(&p, &slots);
            assert!(f.induce_on_subspace_and_quotient(&w).is_ok(), "seed {seed}");
        }
    }

    #[test]
    fn reproducible() {
        let p = DimensionProfile::constant(FieldSpec::gf2(), 2);
        let a = random_banded(&mut rng(7), &p, 2, 0.5);
        let b = random_banded(&mut rng(7), &p, 2, 0.5);
        assert!(a.same_map(&b));
        assert_ne!(instance_seed(1, 0), instance_seed(1, 1));
    }
}
