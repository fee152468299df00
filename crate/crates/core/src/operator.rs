//! Banded, eventually shift-stationary continuous endomorphisms.
//!
//! The image of `e_{n,i}` is supported on levels `[n - w, n + w]`. Far to the
//! left (`n < b_lo`) its component at level `m` is column `i` of
//! `left_blocks[m - n]`, far to the right (`n > b_hi`) column `i` of
//! `right_blocks[m - n]`; in between the columns are stored explicitly.
//! Bandedness makes the map well defined on the product part and continuous:
//! `φ(U_{a-w}) ⊆ U_a`.

use std::fmt;

use thiserror::Error;

use crate::field::Scalar;
use crate::linalg::{kernel_basis, Matrix, SubspaceBasis};
use crate::space::{
    BlockwisePattern, CompactOpenSubspace, Coordinate, DimensionProfile, LlcVector, SpaceError, Window,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

/// A structural defect found by [`BandedOperator::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    BlockCount {
        side: Side,
        expected: usize,
        found: usize,
    },
    BlockDimension {
        side: Side,
        offset: i64,
        rows: usize,
        cols: usize,
        expected: usize,
    },
    BoundaryCoverage {
        b_lo: i64,
        b_hi: i64,
        required_lo: i64,
        required_hi: i64,
    },
    ColumnCount {
        level: i64,
        expected: usize,
        found: usize,
    },
    BandExceeded {
        level: i64,
        slot: usize,
        target_level: i64,
    },
    ForeignColumn {
        level: i64,
        slot: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::BlockCount { side, expected, found } => {
                write!(f, "block count mismatch: {side} side has {found} blocks, expected {expected}")
            }
            Violation::BlockDimension { side, offset, rows, cols, expected } => write!(
                f,
                "block dimension mismatch: {side} block at offset {offset} is {rows}x{cols}, expected {expected}x{expected}"
            ),
            Violation::BoundaryCoverage { b_lo, b_hi, required_lo, required_hi } => write!(
                f,
                "boundary coverage: explicit columns [{b_lo}, {b_hi}] must contain [{required_lo}, {required_hi}]"
            ),
            Violation::ColumnCount { level, expected, found } => {
                write!(f, "column count mismatch at level {level}: {found} columns, expected {expected}")
            }
            Violation::BandExceeded { level, slot, target_level } => write!(
                f,
                "band exceeded: image of e({level},{slot}) reaches level {target_level}"
            ),
            Violation::ForeignColumn { level, slot } => {
                write!(f, "column e({level},{slot}) lives on another profile or field")
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OperatorError {
    #[error("profile mismatch")]
    ProfileMismatch,
    #[error("invalid operator: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("profile is not constant")]
    NonConstantProfile,
    #[error("subspace is not invariant: image of {witness:?} is {image:?}")]
    InvarianceFailure { witness: LlcVector, image: LlcVector },
    #[error(transparent)]
    Space(#[from] SpaceError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftDirection {
    /// `e_{n,i} ↦ e_{n+1,i}`
    Right,
    /// `e_{n,i} ↦ e_{n-1,i}`
    Left,
}

#[derive(Clone, PartialEq, Eq)]
pub struct BandedOperator {
    profile: DimensionProfile,
    width: usize,
    left_blocks: Vec<Matrix>,
    right_blocks: Vec<Matrix>,
    b_lo: i64,
    b_hi: i64,
    columns: Vec<Vec<LlcVector>>,
}

impl fmt::Debug for BandedOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "BandedOperator(w={}, boundary [{}, {}], {:?})",
            self.width, self.b_lo, self.b_hi, self.profile
        )
    }
}

fn zero_blocks(field: crate::field::FieldSpec, d: usize, w: usize) -> Vec<Matrix> {
    (0..2 * w + 1).map(|_| Matrix::zeros(field, d, d)).collect()
}

impl BandedOperator {
    /// Validating constructor from raw parts.
    pub fn from_parts(
        profile: DimensionProfile,
        width: usize,
        left_blocks: Vec<Matrix>,
        right_blocks: Vec<Matrix>,
        b_lo: i64,
        b_hi: i64,
        columns: Vec<Vec<LlcVector>>,
    ) -> Result<Self, OperatorError> {
        let op = BandedOperator {
            profile,
            width,
            left_blocks,
            right_blocks,
            b_lo,
            b_hi,
            columns,
        };
        let v = op.validate();
        if v.is_empty() {
            Ok(op)
        } else {
            Err(OperatorError::Invalid(v))
        }
    }

    /// Operator defined by stationary blocks, with explicit columns from
    /// `overrides` wherever it returns `Some`. Remaining boundary columns
    /// follow the left (for `n ≤ 0`) or right stationary rule when every
    /// level involved has the stationary dimension, and are zero otherwise.
    pub fn stationary_with(
        profile: &DimensionProfile,
        width: usize,
        left_blocks: Vec<Matrix>,
        right_blocks: Vec<Matrix>,
        override_range: Option<(i64, i64)>,
        overrides: impl Fn(Coordinate) -> Option<LlcVector>,
    ) -> Result<Self, OperatorError> {
        let w = width as i64;
        let mut b_lo = profile.n_left() - w;
        let mut b_hi = profile.n_right() + w;
        if let Some((lo, hi)) = override_range {
            b_lo = b_lo.min(lo);
            b_hi = b_hi.max(hi);
        }
        let mut proto = BandedOperator {
            profile: profile.clone(),
            width,
            left_blocks,
            right_blocks,
            b_lo,
            b_hi,
            columns: Vec::new(),
        };
        let shape = proto.validate_blocks();
        if !shape.is_empty() {
            return Err(OperatorError::Invalid(shape));
        }
        let mut columns = Vec::with_capacity((b_hi - b_lo + 1) as usize);
        for n in b_lo..=b_hi {
            let mut level = Vec::with_capacity(profile.dim(n));
            for i in 0..profile.dim(n) {
                let c = Coordinate::new(n, i);
                let col = match overrides(c) {
                    Some(v) => v,
                    None => proto.default_column(n, i),
                };
                level.push(col);
            }
            columns.push(level);
        }
        proto.columns = columns;
        let v = proto.validate();
        if v.is_empty() {
            Ok(proto)
        } else {
            Err(OperatorError::Invalid(v))
        }
    }

    fn default_column(&self, n: i64, i: usize) -> LlcVector {
        let w = self.width as i64;
        let p = &self.profile;
        let fits = |d: usize| (n - w..=n + w).all(|m| p.dim(m) == d);
        if n <= 0 && fits(p.d_left()) {
            self.stationary_column(Side::Left, n, i)
        } else if n > 0 && fits(p.d_right()) {
            self.stationary_column(Side::Right, n, i)
        } else if fits(p.d_left()) {
            self.stationary_column(Side::Left, n, i)
        } else if fits(p.d_right()) {
            self.stationary_column(Side::Right, n, i)
        } else {
            LlcVector::zero(p)
        }
    }

    /// Stationary operator with the same blocks on both ends (constant profiles).
    pub fn uniform(profile: &DimensionProfile, width: usize, blocks: Vec<Matrix>) -> Result<Self, OperatorError> {
        Self::stationary_with(profile, width, blocks.clone(), blocks, None, |_| None)
    }

    pub fn identity(profile: &DimensionProfile) -> Self {
        let f = profile.field();
        let left = vec![Matrix::identity(f, profile.d_left())];
        let right = vec![Matrix::identity(f, profile.d_right())];
        Self::stationary_with(profile, 0, left, right, None, |c| {
            Some(LlcVector::basis(profile, c).expect("valid coordinate"))
        })
        .expect("identity")
    }

    pub fn zero(profile: &DimensionProfile) -> Self {
        let f = profile.field();
        Self::stationary_with(
            profile,
            0,
            zero_blocks(f, profile.d_left(), 0),
            zero_blocks(f, profile.d_right(), 0),
            None,
            |_| Some(LlcVector::zero(profile)),
        )
        .expect("zero")
    }

    /// `φ₁ × φ₂` on the product profile, acting on the first and last slots
    /// of each level respectively.
    pub fn direct_product(&self, other: &BandedOperator) -> Result<Self, OperatorError> {
        let profile = self.profile.product(&other.profile)?;
        let field = profile.field();
        let width = self.width.max(other.width);
        let w = width as i64;
        let diag = |side: Side, j: i64| {
            let (d1, d2) = match side {
                Side::Left => (self.profile.d_left(), other.profile.d_left()),
                Side::Right => (self.profile.d_right(), other.profile.d_right()),
            };
            let mut m = Matrix::zeros(field, d1 + d2, d1 + d2);
            for (op, off, d) in [(self, 0, d1), (other, d1, d2)] {
                if j.unsigned_abs() as usize <= op.width {
                    let b = op.block(side, j);
                    for r in 0..d {
                        for c in 0..d {
                            m.set(off + r, off + c, b.get(r, c).clone());
                        }
                    }
                }
            }
            m
        };
        let left = (-w..=w).map(|j| diag(Side::Left, j)).collect();
        let right = (-w..=w).map(|j| diag(Side::Right, j)).collect();
        let lo = self.b_lo.min(other.b_lo);
        let hi = self.b_hi.max(other.b_hi);
        Self::stationary_with(&profile, width, left, right, Some((lo, hi)), |c| {
            let d1 = self.profile.dim(c.level);
            let (col, first) = if c.slot < d1 {
                (self.column(c.level, c.slot), true)
            } else {
                (other.column(c.level, c.slot - d1), false)
            };
            let mut v = LlcVector::zero(&profile);
            for (t, s) in col.entries() {
                let off = if first { 0 } else { self.profile.dim(t.level) };
                v.add_at(Coordinate::new(t.level, off + t.slot), s);
            }
            Some(v)
        })
    }

    /// Bernoulli shifts on a constant profile.
    pub fn shift(profile: &DimensionProfile, dir: ShiftDirection) -> Result<Self, OperatorError> {
        let d = profile.constant_dim().ok_or(OperatorError::NonConstantProfile)?;
        let f = profile.field();
        let mut blocks = zero_blocks(f, d, 1);
        let idx = match dir {
            ShiftDirection::Right => 2,
            ShiftDirection::Left => 0,
        };
        blocks[idx] = Matrix::identity(f, d);
        Self::uniform(profile, 1, blocks)
    }

    pub fn profile(&self) -> &DimensionProfile {
        &self.profile
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn boundary_range(&self) -> (i64, i64) {
        (self.b_lo, self.b_hi)
    }

    pub fn blocks(&self, side: Side) -> &[Matrix] {
        match side {
            Side::Left => &self.left_blocks,
            Side::Right => &self.right_blocks,
        }
    }

    /// Stationary block at offset `j ∈ [-w, w]`.
    pub fn block(&self, side: Side, j: i64) -> &Matrix {
        &self.blocks(side)[(j + self.width as i64) as usize]
    }

    fn stationary_column(&self, side: Side, n: i64, i: usize) -> LlcVector {
        let w = self.width as i64;
        let mut v = LlcVector::zero(&self.profile);
        for j in -w..=w {
            let b = self.block(side, j);
            for r in 0..b.rows() {
                let s = b.get(r, i);
                if !s.is_zero() {
                    v.add_at(Coordinate::new(n + j, r), s);
                }
            }
        }
        v
    }

    /// `φ(e_{n,i})`.
    pub fn column(&self, n: i64, i: usize) -> LlcVector {
        if n < self.b_lo {
            self.stationary_column(Side::Left, n, i)
        } else if n > self.b_hi {
            self.stationary_column(Side::Right, n, i)
        } else {
            self.columns[(n - self.b_lo) as usize][i].clone()
        }
    }

    fn validate_blocks(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let w = self.width as i64;
        for (side, blocks, d) in [
            (Side::Left, &self.left_blocks, self.profile.d_left()),
            (Side::Right, &self.right_blocks, self.profile.d_right()),
        ] {
            if blocks.len() != 2 * self.width + 1 {
                out.push(Violation::BlockCount {
                    side,
                    expected: 2 * self.width + 1,
                    found: blocks.len(),
                });
                continue;
            }
            for (k, b) in blocks.iter().enumerate() {
                if b.rows() != d || b.cols() != d || b.field() != self.profile.field() {
                    out.push(Violation::BlockDimension {
                        side,
                        offset: k as i64 - w,
                        rows: b.rows(),
                        cols: b.cols(),
                        expected: d,
                    });
                }
            }
        }
        out
    }

    /// Structural violations; empty iff the operator is well formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = self.validate_blocks();
        let w = self.width as i64;
        let (req_lo, req_hi) = (self.profile.n_left() - w, self.profile.n_right() + w);
        if self.b_lo > req_lo || self.b_hi < req_hi {
            out.push(Violation::BoundaryCoverage {
                b_lo: self.b_lo,
                b_hi: self.b_hi,
                required_lo: req_lo,
                required_hi: req_hi,
            });
        }
        let span = (self.b_hi - self.b_lo + 1).max(0) as usize;
        if self.columns.len() != span {
            out.push(Violation::ColumnCount {
                level: self.b_lo,
                expected: span,
                found: self.columns.len(),
            });
            return out;
        }
        for (k, level) in self.columns.iter().enumerate() {
            let n = self.b_lo + k as i64;
            let d = self.profile.dim(n);
            if level.len() != d {
                out.push(Violation::ColumnCount {
                    level: n,
                    expected: d,
                    found: level.len(),
                });
            }
            for (i, col) in level.iter().enumerate() {
                if col.profile() != &self.profile {
                    out.push(Violation::ForeignColumn { level: n, slot: i });
                    continue;
                }
                for c in col.entries().keys() {
                    if (c.level - n).abs() > w {
                        out.push(Violation::BandExceeded {
                            level: n,
                            slot: i,
                            target_level: c.level,
                        });
                        break;
                    }
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &LlcVector) -> Result<LlcVector, OperatorError> {
        self.profile.ensure_same(v.profile())?;
        let mut out = LlcVector::zero(&self.profile);
        for (c, s) in v.entries() {
            out.axpy(s, &self.column(c.level, c.slot));
        }
        Ok(out)
    }

    /// `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &BandedOperator) -> Result<BandedOperator, OperatorError> {
        if self.profile != other.profile {
            return Err(OperatorError::ProfileMismatch);
        }
        let (wf, wg) = (self.width as i64, other.width as i64);
        let w = wf + wg;
        let field = self.profile.field();
        let conv = |side: Side| -> Vec<Matrix> {
            let d = match side {
                Side::Left => self.profile.d_left(),
                Side::Right => self.profile.d_right(),
            };
            (-w..=w)
                .map(|j| {
                    let mut acc = Matrix::zeros(field, d, d);
                    for j2 in -wg..=wg {
                        let j1 = j - j2;
                        if j1.abs() > wf {
                            continue;
                        }
                        let prod = self.block(side, j1).mul(other.block(side, j2)).expect("square blocks");
                        acc = acc.add(&prod).expect("same shape");
                    }
                    acc
                })
                .collect()
        };
        let b_lo = other.b_lo.min(self.b_lo - wg).min(self.profile.n_left() - w);
        let b_hi = other.b_hi.max(self.b_hi + wg).max(self.profile.n_right() + w);
        let mut columns = Vec::with_capacity((b_hi - b_lo + 1) as usize);
        for n in b_lo..=b_hi {
            let level = (0..self.profile.dim(n))
                .map(|i| self.apply(&other.column(n, i)).expect("same profile"))
                .collect();
            columns.push(level);
        }
        let op = BandedOperator {
            profile: self.profile.clone(),
            width: w as usize,
            left_blocks: conv(Side::Left),
            right_blocks: conv(Side::Right),
            b_lo,
            b_hi,
            columns,
        };
        Ok(op.trimmed())
    }

    /// `k`-fold composition; `power(0)` is the identity.
    pub fn power(&self, k: usize) -> BandedOperator {
        let mut acc = BandedOperator::identity(&self.profile);
        for _ in 0..k {
            acc = self.compose(&acc).expect("same profile");
        }
        acc
    }

    /// Pointwise sum.
    pub fn add(&self, other: &BandedOperator) -> Result<BandedOperator, OperatorError> {
        self.linear_combination(other, &self.profile.field().one())
    }

    /// `self + s·other`.
    pub fn linear_combination(&self, other: &BandedOperator, s: &Scalar) -> Result<BandedOperator, OperatorError> {
        if self.profile != other.profile {
            return Err(OperatorError::ProfileMismatch);
        }
        let w = self.width.max(other.width) as i64;
        let field = self.profile.field();
        let blocks = |side: Side| -> Vec<Matrix> {
            (-w..=w)
                .map(|j| {
                    let d = match side {
                        Side::Left => self.profile.d_left(),
                        Side::Right => self.profile.d_right(),
                    };
                    let mut acc = Matrix::zeros(field, d, d);
                    if j.abs() <= self.width as i64 {
                        acc = acc.add(self.block(side, j)).unwrap();
                    }
                    if j.abs() <= other.width as i64 {
                        let b = other.block(side, j);
                        for r in 0..d {
                            for c in 0..d {
                                let v = acc.get(r, c).add(&b.get(r, c).mul(s));
                                acc.set(r, c, v);
                            }
                        }
                    }
                    acc
                })
                .collect()
        };
        let b_lo = self.b_lo.min(other.b_lo);
        let b_hi = self.b_hi.max(other.b_hi);
        let columns = (b_lo..=b_hi)
            .map(|n| {
                (0..self.profile.dim(n))
                    .map(|i| {
                        let mut c = self.column(n, i);
                        c.axpy(s, &other.column(n, i));
                        c
                    })
                    .collect()
            })
            .collect();
        let op = BandedOperator {
            profile: self.profile.clone(),
            width: w as usize,
            left_blocks: blocks(Side::Left),
            right_blocks: blocks(Side::Right),
            b_lo,
            b_hi,
            columns,
        };
        Ok(op.trimmed())
    }

    /// Shrinks the band width to the actual support and the explicit boundary
    /// to the columns that differ from the stationary rule.
    pub fn trimmed(mut self) -> BandedOperator {
        let w = self.width as i64;
        let mut actual = 0i64;
        for side in [Side::Left, Side::Right] {
            for j in -w..=w {
                if !self.block(side, j).is_zero() {
                    actual = actual.max(j.abs());
                }
            }
        }
        for (k, level) in self.columns.iter().enumerate() {
            let n = self.b_lo + k as i64;
            for col in level {
                for c in col.entries().keys() {
                    actual = actual.max((c.level - n).abs());
                }
            }
        }
        if actual < w {
            let keep = ((w - actual) as usize)..((w + actual + 1) as usize);
            self.left_blocks = self.left_blocks[keep.clone()].to_vec();
            self.right_blocks = self.right_blocks[keep].to_vec();
            self.width = actual as usize;
        }
        let w = self.width as i64;
        while self.b_lo < self.profile.n_left() - w {
            let n = self.b_lo;
            let same = (0..self.profile.dim(n)).all(|i| self.columns[0][i] == self.stationary_column(Side::Left, n, i));
            if !same {
                break;
            }
            self.columns.remove(0);
            self.b_lo += 1;
        }
        while self.b_hi > self.profile.n_right() + w {
            let n = self.b_hi;
            let last = self.columns.len() - 1;
            let same =
                (0..self.profile.dim(n)).all(|i| self.columns[last][i] == self.stationary_column(Side::Right, n, i));
            if !same {
                break;
            }
            self.columns.pop();
            self.b_hi -= 1;
        }
        self
    }

    /// Equality as maps: stationary blocks plus all columns over the widened
    /// union boundary.
    pub fn same_map(&self, other: &BandedOperator) -> bool {
        if self.profile != other.profile {
            return false;
        }
        let wmax = self.width.max(other.width) as i64;
        for side in [Side::Left, Side::Right] {
            for j in -wmax..=wmax {
                let get = |op: &BandedOperator| {
                    if j.abs() <= op.width as i64 {
                        Some(op.block(side, j).clone())
                    } else {
                        None
                    }
                };
                let (a, b) = (get(self), get(other));
                let same = match (a, b) {
                    (Some(a), Some(b)) => a == b,
                    (Some(a), None) | (None, Some(a)) => a.is_zero(),
                    (None, None) => true,
                };
                if !same {
                    return false;
                }
            }
        }
        let lo = self.b_lo.min(other.b_lo) - wmax;
        let hi = self.b_hi.max(other.b_hi) + wmax;
        (lo..=hi).all(|n| (0..self.profile.dim(n)).all(|i| self.column(n, i) == other.column(n, i)))
    }

    pub fn is_identity(&self) -> bool {
        self.same_map(&BandedOperator::identity(&self.profile))
    }

    /// Finite generators `S` with `φ(W) + U_a = S + U_a`.
    ///
    /// Images of the window generators, plus images of the basis vectors at
    /// tail levels `(a - w, tail_cut(W)]`: anything deeper lands in `U_a`.
    pub fn image_mod_tail(&self, w: &CompactOpenSubspace, a: i64) -> Result<Vec<LlcVector>, OperatorError> {
        self.profile.ensure_same(w.profile())?;
        let mut gens = Vec::new();
        for g in w.window_generators() {
            gens.push(self.apply(&g)?.mod_tail(a));
        }
        let t = w.tail_cut();
        for n in (a - self.width as i64 + 1)..=t {
            for i in 0..self.profile.dim(n) {
                gens.push(self.column(n, i).mod_tail(a));
            }
        }
        Ok(gens)
    }

    /// `φ(W) + U_a` as a canonical compact open subspace.
    pub fn image_plus_tail(&self, w: &CompactOpenSubspace, a: i64) -> Result<CompactOpenSubspace, OperatorError> {
        let gens = self.image_mod_tail(w, a)?;
        Ok(CompactOpenSubspace::from_generators(&self.profile, a, &gens)?)
    }

    /// `φ(W)` exactly, for an automorphism whose inverse has band width
    /// `inverse_width`: then `φ(U_t) ⊇ U_{t - inverse_width}`.
    pub fn image_of_automorphism(
        &self,
        w: &CompactOpenSubspace,
        inverse_width: usize,
    ) -> Result<CompactOpenSubspace, OperatorError> {
        self.image_plus_tail(w, w.tail_cut() - inverse_width as i64)
    }

    /// Restriction to `W` and the induced map on `V/W`, after checking `φ(W) ⊆ W`.
    pub fn induce_on_subspace_and_quotient(
        &self,
        pattern: &BlockwisePattern,
    ) -> Result<(BandedOperator, BandedOperator), OperatorError> {
        self.profile.ensure_same(pattern.profile())?;
        let w = self.width as i64;
        let field = self.profile.field();
        // stationary compatibility
        for (side, stat, probe) in [
            (Side::Left, pattern.left(), pattern.start() - 10 * (w + 1) - 1),
            (Side::Right, pattern.right(), pattern.end() + 10 * (w + 1) + 1),
        ] {
            let probe = if side == Side::Left {
                probe.min(self.b_lo - w - 1)
            } else {
                probe.max(self.b_hi + w + 1)
            };
            for j in -w..=w {
                let b = self.block(side, j);
                for row in stat.rows() {
                    let img = b.mul_vec(row);
                    if !stat.contains_vector(&img) {
                        let witness = level_vector(&self.profile, probe, row);
                        let image = self.apply(&witness)?;
                        return Err(OperatorError::InvarianceFailure { witness, image });
                    }
                }
            }
        }
        let lo = pattern.start().min(self.b_lo) - w - 1;
        let hi = pattern.end().max(self.b_hi) + w + 1;
        for n in lo..=hi {
            for row in pattern.at(n).rows() {
                let x = level_vector(&self.profile, n, row);
                let y = self.apply(&x)?;
                if !pattern.member(&y)? {
                    return Err(OperatorError::InvarianceFailure { witness: x, image: y });
                }
            }
        }

        let sub_p = pattern.sub_profile();
        let quo_p = pattern.quotient_profile();
        let b_lo = self.b_lo.min(pattern.start()).min(sub_p.n_left()).min(quo_p.n_left()) - w;
        let b_hi = self.b_hi.max(pattern.end()).max(sub_p.n_right()).max(quo_p.n_right()) + w;

        let sub_block = |side: Side, stat: &SubspaceBasis, j: i64| -> Matrix {
            let k = stat.dim();
            let mut m = Matrix::zeros(field, k, k);
            for (c, row) in stat.rows().enumerate() {
                let img = self.block(side, j).mul_vec(row);
                let coords = stat.coefficients(&img).expect("invariant stationary pattern");
                for (r, s) in coords.into_iter().enumerate() {
                    m.set(r, c, s);
                }
            }
            m
        };
        let quo_block = |side: Side, stat: &SubspaceBasis, j: i64, n: i64| -> Matrix {
            let k = stat.ambient_dim() - stat.dim();
            let mut m = Matrix::zeros(field, k, k);
            for c in 0..k {
                let mut e = vec![field.zero(); k];
                e[c] = field.one();
                let x = pattern.lift_quotient(n, &e);
                let img = self.block(side, j).mul_vec(&x);
                for (r, s) in pattern.quotient_coords(n + j, &img).into_iter().enumerate() {
                    m.set(r, c, s);
                }
            }
            m
        };
        let far_left = b_lo - w - 1;
        let far_right = b_hi + w + 1;
        let sub_left = (-w..=w).map(|j| sub_block(Side::Left, pattern.left(), j)).collect();
        let sub_right = (-w..=w).map(|j| sub_block(Side::Right, pattern.right(), j)).collect();
        let quo_left = (-w..=w)
            .map(|j| quo_block(Side::Left, pattern.left(), j, far_left))
            .collect();
        let quo_right = (-w..=w)
            .map(|j| quo_block(Side::Right, pattern.right(), j, far_right))
            .collect();

        let mut sub_cols = Vec::new();
        let mut quo_cols = Vec::new();
        for n in b_lo..=b_hi {
            let wn = pattern.at(n);
            let mut level = Vec::new();
            for k in 0..wn.dim() {
                let mut e = vec![field.zero(); wn.dim()];
                e[k] = field.one();
                let x = level_vector(&self.profile, n, &pattern.embed_sub(n, &e));
                let y = self.apply(&x)?;
                let mut out = LlcVector::zero(&sub_p);
                for m in levels_of(&y) {
                    let coords = pattern.sub_coords(m, &y.level_block(m)).expect("checked invariant");
                    for (r, s) in coords.iter().enumerate() {
                        out.add_at(Coordinate::new(m, r), s);
                    }
                }
                level.push(out);
            }
            sub_cols.push(level);

            let qd = quo_p.dim(n);
            let mut level = Vec::new();
            for k in 0..qd {
                let mut e = vec![field.zero(); qd];
                e[k] = field.one();
                let x = level_vector(&self.profile, n, &pattern.lift_quotient(n, &e));
                let y = self.apply(&x)?;
                let mut out = LlcVector::zero(&quo_p);
                for m in levels_of(&y) {
                    for (r, s) in pattern.quotient_coords(m, &y.level_block(m)).iter().enumerate() {
                        out.add_at(Coordinate::new(m, r), s);
                    }
                }
                level.push(out);
            }
            quo_cols.push(level);
        }
        let restricted =
            BandedOperator::from_parts(sub_p, self.width, sub_left, sub_right, b_lo, b_hi, sub_cols)?.trimmed();
        let induced =
            BandedOperator::from_parts(quo_p, self.width, quo_left, quo_right, b_lo, b_hi, quo_cols)?.trimmed();
        Ok((restricted, induced))
    }

    /// Keeps only the entries from source levels with `src(n)` to target levels
    /// with `tgt(m)`, as an operator on `profile` (whose dimensions must agree
    /// with this operator's wherever entries survive).
    fn masked(
        &self,
        profile: &DimensionProfile,
        src: impl Fn(i64) -> bool,
        tgt: impl Fn(i64) -> bool,
        keep_left: bool,
        keep_right: bool,
    ) -> BandedOperator {
        let field = profile.field();
        let side_blocks = |side: Side, keep: bool| -> Vec<Matrix> {
            let d = match side {
                Side::Left => profile.d_left(),
                Side::Right => profile.d_right(),
            };
            let w = self.width as i64;
            (-w..=w)
                .map(|j| {
                    if keep {
                        self.block(side, j).clone()
                    } else {
                        Matrix::zeros(field, d, d)
                    }
                })
                .collect()
        };
        let columns = (self.b_lo..=self.b_hi)
            .map(|n| {
                (0..profile.dim(n))
                    .map(|i| {
                        if !src(n) {
                            return LlcVector::zero(profile);
                        }
                        let col = self.column(n, i);
                        LlcVector::from_entries(
                            profile,
                            col.entries()
                                .iter()
                                .filter(|(c, _)| tgt(c.level))
                                .map(|(c, s)| (*c, s.clone())),
                        )
                        .expect("masked coordinates exist")
                    })
                    .collect()
            })
            .collect();
        BandedOperator::from_parts(
            profile.clone(),
            self.width,
            side_blocks(Side::Left, keep_left),
            side_blocks(Side::Right, keep_right),
            self.b_lo,
            self.b_hi,
            columns,
        )
        .expect("masked operator is well formed")
        .trimmed()
    }

    /// The four corners `φ_{•*} = p_* ∘ φ ∘ ι_•` for the split `V = V_c ⊕ V_d`
    /// at level 0.
    pub fn decompose_vc_vd(&self) -> ComponentDecomposition {
        let p = &self.profile;
        let c = |n: i64| n <= 0;
        let d = |n: i64| n > 0;
        // Far-left sources only reach V_c and far-right sources only V_d.
        let cc = self.masked(p, c, c, true, false);
        let cd = self.masked(p, c, d, false, false);
        let dc = self.masked(p, d, c, false, false);
        let dd = self.masked(p, d, d, false, true);
        let vc = p.compact_part();
        let vd = p.discrete_part();
        let cc_on_vc = self.masked(&vc, c, c, true, false);
        let dd_on_vd = self.masked(&vd, d, d, false, true);

        // Only sources in (-w, 0] reach V_d.
        let w = self.width as i64;
        let src = Window::new(p, -w, 0);
        let tgt_top = w.max(0);
        let tgt = Window::new(p, 0, tgt_top);
        let rows: Vec<Vec<Scalar>> = (0..src.dim())
            .map(|k| {
                let sc = src.coordinate(k);
                tgt.to_dense(&cd.column(sc.level, sc.slot)).expect("banded")
            })
            .collect();
        let m = Matrix::from_rows(p.field(), tgt.dim(), rows).expect("shape");
        let cd_image_dim = m.rank();
        debug_assert!((p.n_left() - w - 5..=-w).all(|n| (0..p.dim(n)).all(|i| cd.column(n, i).is_zero())));
        // ker(φ_cd) = U_{-w} ⊕ {x on levels (-w, 0] : M^T x = 0}
        let ker = kernel_basis(&m.transpose());
        let ker_gens: Vec<LlcVector> = ker
            .rows()
            .map(|r| {
                let v = src.from_dense(p, r);
                v.with_profile(&vc).expect("compact coordinates")
            })
            .collect();
        let cd_kernel = CompactOpenSubspace::from_generators(&vc, -w, &ker_gens).expect("kernel subspace");
        ComponentDecomposition {
            cc,
            cd,
            dc,
            dd,
            cc_on_vc,
            dd_on_vd,
            cd_image_dim,
            cd_kernel,
        }
    }
}

fn level_vector(profile: &DimensionProfile, n: i64, block: &[Scalar]) -> LlcVector {
    LlcVector::from_entries(
        profile,
        block
            .iter()
            .enumerate()
            .map(|(i, s)| (Coordinate::new(n, i), s.clone())),
    )
    .expect("level block")
}

fn levels_of(v: &LlcVector) -> Vec<i64> {
    let mut ls: Vec<i64> = v.entries().keys().map(|c| c.level).collect();
    ls.dedup();
    ls
}

/// `φ = [[φ_cc, φ_dc], [φ_cd, φ_dd]]`, each corner stored as an endomorphism of
/// `V` supported on its block, plus `φ_cc` and `φ_dd` on their own spaces.
#[derive(Debug, Clone)]
pub struct ComponentDecomposition {
    pub cc: BandedOperator,
    pub cd: BandedOperator,
    pub dc: BandedOperator,
    pub dd: BandedOperator,
    pub cc_on_vc: BandedOperator,
    pub dd_on_vd: BandedOperator,
    /// `dim Im(φ_cd)`, finite.
    pub cd_image_dim: usize,
    /// `ker(φ_cd)`, an open subspace of `V_c`.
    pub cd_kernel: CompactOpenSubspace,
}

impl ComponentDecomposition {
    pub fn reassemble(&self) -> BandedOperator {
        self.cc
            .add(&self.cd)
            .and_then(|x| x.add(&self.dc))
            .and_then(|x| x.add(&self.dd))
            .expect("same profile")
    }
}

/// True iff `f ∘ g` and `g ∘ f` are both the identity.
pub fn verify_inverse(f: &BandedOperator, g: &BandedOperator) -> Result<bool, OperatorError> {
    if f.profile() != g.profile() {
        return Err(OperatorError::ProfileMismatch);
    }
    Ok(f.compose(g)?.is_identity() && g.compose(f)?.is_identity())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;

    fn gf2() -> FieldSpec {
        FieldSpec::gf2()
    }

    fn e(p: &DimensionProfile, n: i64, i: usize) -> LlcVector {
        LlcVector::basis(p, Coordinate::new(n, i)).unwrap()
    }

    fn right(p: &DimensionProfile) -> BandedOperator {
        BandedOperator::shift(p, ShiftDirection::Right).unwrap()
    }

    fn left(p: &DimensionProfile) -> BandedOperator {
        BandedOperator::shift(p, ShiftDirection::Left).unwrap()
    }

    #[test]
    fn validate_examples() {
        let p = DimensionProfile::constant(gf2(), 1);
        assert!(right(&p).validate().is_empty());

        let mut bad = right(&p);
        let far = e(&p, 4, 0);
        bad.columns[1][0] = far;
        let v = bad.validate();
        assert!(v.iter().any(|x| x.to_string().starts_with("band exceeded")), "{v:?}");

        let p2 = DimensionProfile::constant(gf2(), 2);
        let err = BandedOperator::uniform(&p2, 0, vec![Matrix::identity(gf2(), 1)]).unwrap_err();
        assert!(err.to_string().contains("block dimension mismatch"), "{err}");
    }

    #[test]
    fn shift_examples() {
        let p = DimensionProfile::constant(gf2(), 1);
        assert_eq!(right(&p).apply(&e(&p, 0, 0)).unwrap(), e(&p, 1, 0));
        assert!(right(&p).compose(&left(&p)).unwrap().is_identity());
        let p3 = DimensionProfile::constant(gf2(), 3);
        for n in -4..4 {
            for i in 0..3 {
                assert_eq!(right(&p3).apply(&e(&p3, n, i)).unwrap(), e(&p3, n + 1, i));
                assert_eq!(left(&p3).apply(&e(&p3, n, i)).unwrap(), e(&p3, n - 1, i));
            }
        }
        let np = DimensionProfile::new(gf2(), 1, 0, vec![2], 1).unwrap();
        assert_eq!(
            BandedOperator::shift(&np, ShiftDirection::Right).unwrap_err(),
            OperatorError::NonConstantProfile
        );
    }

    #[test]
    fn apply_examples() {
        let p = DimensionProfile::constant(gf2(), 1);
        let v = e(&p, 0, 0).add(&e(&p, 3, 0)).unwrap();
        let w = e(&p, 1, 0).add(&e(&p, 4, 0)).unwrap();
        assert_eq!(right(&p).apply(&v).unwrap(), w);
        assert_eq!(BandedOperator::identity(&p).apply(&v).unwrap(), v);
        assert!(BandedOperator::zero(&p).apply(&v).unwrap().is_zero());
    }

    #[test]
    fn compose_and_power() {
        let p = DimensionProfile::constant(gf2(), 1);
        let r = right(&p);
        let id = BandedOperator::identity(&p);
        assert!(r.compose(&id).unwrap().same_map(&r));
        let r2 = r.compose(&r).unwrap();
        assert_eq!(r2.width(), 2);
        assert_eq!(r2.apply(&e(&p, -7, 0)).unwrap(), e(&p, -5, 0));
        assert!(r.power(0).is_identity());
        let r3 = r.power(3);
        assert_eq!(r3.width(), 3);
        for n in -6..6 {
            assert_eq!(r3.apply(&e(&p, n, 0)).unwrap(), e(&p, n + 3, 0));
        }
    }

    /// `N` on levels 1..=3 of `d ≡ 1`: e_1 -> e_2 -> e_3 -> 0.
    fn window_nilpotent(p: &DimensionProfile) -> BandedOperator {
        let f = p.field();
        BandedOperator::stationary_with(p, 1, zero_blocks(f, 1, 1), zero_blocks(f, 1, 1), Some((0, 4)), |c| {
            Some(if c.level == 1 || c.level == 2 {
                e(p, c.level + 1, 0)
            } else {
                LlcVector::zero(p)
            })
        })
        .unwrap()
    }

    #[test]
    fn nilpotent_power_vanishes() {
        let p = DimensionProfile::constant(gf2(), 1);
        let n = window_nilpotent(&p);
        // repeated apply: e_1 survives exactly two steps
        let mut v = e(&p, 1, 0);
        let mut steps = 0;
        while !v.is_zero() {
            v = n.apply(&v).unwrap();
            steps += 1;
        }
        assert_eq!(steps, 3);
        assert!(!n.power(2).same_map(&BandedOperator::zero(&p)));
        assert!(n.power(3).same_map(&BandedOperator::zero(&p)));
        assert!(n.power(10).same_map(&BandedOperator::zero(&p)));
    }

    #[test]
    fn inverse_examples() {
        let p = DimensionProfile::constant(gf2(), 1);
        assert!(verify_inverse(&right(&p), &left(&p)).unwrap());
        assert!(!verify_inverse(&right(&p), &right(&p)).unwrap());
        let f = FieldSpec::prime(5).unwrap();
        let p5 = DimensionProfile::constant(f, 1);
        let n = window_nilpotent(&p5);
        let id = BandedOperator::identity(&p5);
        let u = id.add(&n).unwrap();
        // (I + N)^{-1} = I - N + N^2
        let minus = f.from_i64(-1);
        let inv = id.linear_combination(&n, &minus).unwrap().add(&n.power(2)).unwrap();
        assert!(verify_inverse(&u, &inv).unwrap());
        assert!(!verify_inverse(&u, &id).unwrap());
    }

    #[test]
    fn image_mod_tail_examples() {
        let p = DimensionProfile::constant(gf2(), 1);
        let vc = CompactOpenSubspace::tail(&p, 0).unwrap();
        let gens = right(&p).image_mod_tail(&vc, 0).unwrap();
        let nonzero: Vec<_> = gens.into_iter().filter(|g| !g.is_zero()).collect();
        assert_eq!(nonzero, vec![e(&p, 1, 0)]);
        let gens = left(&p).image_mod_tail(&vc, 0).unwrap();
        assert!(gens.iter().all(LlcVector::is_zero));
        let c3 = CompactOpenSubspace::cofinal_chain(&p, 3);
        for a in [-3, -1, 0] {
            assert!(BandedOperator::zero(&p)
                .image_mod_tail(&c3, a)
                .unwrap()
                .iter()
                .all(LlcVector::is_zero));
        }
        // exact images of automorphisms
        let r = right(&p);
        assert_eq!(
            r.image_of_automorphism(&c3, 1).unwrap(),
            CompactOpenSubspace::cofinal_chain(&p, 4)
        );
        let l = left(&p);
        let img = l.image_of_automorphism(&c3, 1).unwrap();
        assert_eq!(c3.quotient_dim(&img).unwrap(), 1);
    }

    #[test]
    fn induce_examples() {
        let p2 = DimensionProfile::constant(gf2(), 2);
        let r = right(&p2);
        let w = BlockwisePattern::slots(&p2, &[0]);
        let (res, ind) = r.induce_on_subspace_and_quotient(&w).unwrap();
        let p1 = DimensionProfile::constant(gf2(), 1);
        assert!(res.same_map(&right(&p1)));
        assert!(ind.same_map(&right(&p1)));

        let (res, ind) = r.induce_on_subspace_and_quotient(&BlockwisePattern::full(&p2)).unwrap();
        assert!(res.same_map(&r));
        assert_eq!(ind.profile().constant_dim(), Some(0));

        let p = DimensionProfile::constant(gf2(), 1);
        let only0 = BlockwisePattern::from_fn(&p, |n| {
            if n == 0 {
                SubspaceBasis::full(gf2(), 1)
            } else {
                SubspaceBasis::zero(gf2(), 1)
            }
        });
        match right(&p).induce_on_subspace_and_quotient(&only0) {
            Err(OperatorError::InvarianceFailure { witness, image }) => {
                assert_eq!(witness, e(&p, 0, 0));
                assert_eq!(image, e(&p, 1, 0));
            }
            other => panic!("expected invariance failure, got {other:?}"),
        }
    }

    #[test]
    fn decomposition_examples() {
        let p = DimensionProfile::constant(gf2(), 1);
        let vd = p.discrete_part();
        let dec = right(&p).decompose_vc_vd();
        for n in 1..=5 {
            assert_eq!(dec.dd_on_vd.apply(&e(&vd, n, 0)).unwrap(), e(&vd, n + 1, 0));
        }
        assert_eq!(dec.cd_image_dim, 1);
        assert!(dec.reassemble().same_map(&right(&p)));
        assert_eq!(dec.cd_kernel.tail_cut(), -1);

        let dec = left(&p).decompose_vc_vd();
        assert!(dec.dd_on_vd.apply(&e(&vd, 1, 0)).unwrap().is_zero());
        for n in 2..=5 {
            assert_eq!(dec.dd_on_vd.apply(&e(&vd, n, 0)).unwrap(), e(&vd, n - 1, 0));
        }
        assert_eq!(dec.cd_image_dim, 0);
        assert!(dec.reassemble().same_map(&left(&p)));

        let dec = BandedOperator::identity(&p).decompose_vc_vd();
        assert!(dec.cd.same_map(&BandedOperator::zero(&p)));
        assert!(dec.dc.same_map(&BandedOperator::zero(&p)));
        assert!(dec.dd_on_vd.is_identity());
        assert!(dec.cc_on_vc.is_identity());
    }

    #[test]
    fn direct_product_acts_slotwise() {
        let p1 = DimensionProfile::constant(gf2(), 1);
        let p2 = DimensionProfile::constant(gf2(), 2);
        let prod = right(&p1).direct_product(&left(&p2)).unwrap();
        let p = prod.profile().clone();
        assert_eq!(p.constant_dim(), Some(3));
        assert_eq!(prod.width(), 1);
        for n in -4..=4 {
            assert_eq!(prod.apply(&e(&p, n, 0)).unwrap(), e(&p, n + 1, 0));
            assert_eq!(prod.apply(&e(&p, n, 2)).unwrap(), e(&p, n - 1, 2));
        }
        let q = DimensionProfile::new(gf2(), 1, -1, vec![2, 0], 1).unwrap();
        let id = BandedOperator::identity(&q).direct_product(&right(&p1)).unwrap();
        assert_eq!(id.profile().dim(0), 1);
        assert_eq!(id.profile().dim(-1), 3);
        assert_eq!(id.apply(&e(id.profile(), -1, 2)).unwrap(), e(id.profile(), 0, 0));
        assert_eq!(id.apply(&e(id.profile(), -1, 1)).unwrap(), e(id.profile(), -1, 1));
    }
}
