//! Finite presentations of l.l.c. spaces and their compact open subspaces.
//!
//! A space is `V = ∏_{n≤0} K^{d(n)} ⊕ ⊕_{n>0} K^{d(n)}` for an eventually
//! constant profile `d`. Write `U_a` for the subspace of all vectors supported
//! at levels `≤ a`. A linearly compact open subspace `W` is stored as a tail cut
//! `a ≤ 0` with `U_a ⊆ W` together with a finite window subspace on levels
//! `(a, b]`, so that `W = U_a ⊕ S`.
//!
//! Every linearly compact open `W` has this form. Openness gives some `U_a ⊆ W`
//! (the `U_a` form a neighbourhood basis of 0). Then `W / U_a` is a discrete
//! (since `U_a` is open) and linearly compact (a quotient of `W`) space, hence
//! finite dimensional. A finite set of representatives of a basis of `W / U_a`
//! has each element congruent mod `U_a` to a finitely supported vector, and
//! those vectors span `S`. Conversely `U_a ⊕ S` is open (contains `U_a`) and
//! linearly compact (a product of finite-dimensional pieces plus a finite
//! dimensional extension). The canonical form maximizes `a`, minimizes `b` and
//! puts `S` in RREF over coordinates sorted by `(level, slot)`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::field::{FieldSpec, Scalar};
use crate::linalg::{LinalgError, SubspaceBasis};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpaceError {
    #[error("profile mismatch")]
    ProfileMismatch,
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("coordinate ({level}, {slot}) is outside the profile")]
    InvalidCoordinate { level: i64, slot: usize },
    #[error("tail cut {0} must be <= 0")]
    TailCutPositive(i64),
    #[error("subspace is not contained in the larger one")]
    NotContained,
    #[error("invalid pattern: {0}")]
    InvalidPattern(String),
    #[error("field mismatch: {0} vs {1}")]
    FieldMismatch(FieldSpec, FieldSpec),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Eventually constant level dimensions: `d_left` below `n_left`, an explicit
/// boundary on `[n_left, n_right]`, `d_right` above `n_right`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DimensionProfile {
    field: FieldSpec,
    d_left: usize,
    n_left: i64,
    boundary: Arc<[usize]>,
    d_right: usize,
}

impl fmt::Debug for DimensionProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Profile[{}]({} | {}:{:?} | {})",
            self.field, self.d_left, self.n_left, &*self.boundary, self.d_right
        )
    }
}

impl DimensionProfile {
    pub fn new(
        field: FieldSpec,
        d_left: usize,
        n_left: i64,
        boundary: Vec<usize>,
        d_right: usize,
    ) -> Result<Self, SpaceError> {
        if boundary.is_empty() {
            return Err(SpaceError::InvalidProfile("empty boundary".into()));
        }
        let n_right = n_left + boundary.len() as i64 - 1;
        if n_left > 0 || n_right < 0 {
            return Err(SpaceError::InvalidProfile(format!(
                "boundary [{n_left}, {n_right}] must contain level 0"
            )));
        }
        let mut b = boundary;
        let mut nl = n_left;
        // Trim stationary ends, keeping n_left <= 0 <= n_right.
        while nl < 0 && b.len() > 1 && b[0] == d_left {
            b.remove(0);
            nl += 1;
        }
        while nl + (b.len() as i64) - 1 > 0 && b.len() > 1 && *b.last().unwrap() == d_right {
            b.pop();
        }
        Ok(DimensionProfile {
            field,
            d_left,
            n_left: nl,
            boundary: b.into(),
            d_right,
        })
    }

    /// `d ≡ dim`: the space `∏_{n≤0} F ⊕ ⊕_{n>0} F` with `dim F = dim`.
    pub fn constant(field: FieldSpec, dim: usize) -> Self {
        Self::new(field, dim, 0, vec![dim], dim).expect("constant profile")
    }

    /// Profile from a level function that is stationary outside `[lo, hi]`.
    pub fn from_fn(field: FieldSpec, lo: i64, hi: i64, f: impl Fn(i64) -> usize) -> Self {
        let lo = lo.min(0);
        let hi = hi.max(0);
        let boundary = (lo..=hi).map(&f).collect();
        Self::new(field, f(lo - 1), lo, boundary, f(hi + 1)).expect("profile from fn")
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn d_left(&self) -> usize {
        self.d_left
    }

    pub fn d_right(&self) -> usize {
        self.d_right
    }

    pub fn n_left(&self) -> i64 {
        self.n_left
    }

    pub fn n_right(&self) -> i64 {
        self.n_left + self.boundary.len() as i64 - 1
    }

    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    pub fn dim(&self, level: i64) -> usize {
        if level < self.n_left {
            self.d_left
        } else if level > self.n_right() {
            self.d_right
        } else {
            self.boundary[(level - self.n_left) as usize]
        }
    }

    /// Block dimension when `d` is constant.
    pub fn constant_dim(&self) -> Option<usize> {
        (self.d_left == self.d_right && self.boundary.iter().all(|&d| d == self.d_left)).then_some(self.d_left)
    }

    /// `d(n) = 0` for all `n ≤ 0`.
    pub fn is_discrete(&self) -> bool {
        self.d_left == 0 && (self.n_left..=0).all(|n| self.dim(n) == 0)
    }

    /// `d(n) = 0` for all `n > 0`.
    pub fn is_linearly_compact(&self) -> bool {
        self.d_right == 0 && (1..=self.n_right()).all(|n| self.dim(n) == 0)
    }

    pub fn check_coordinate(&self, c: Coordinate) -> Result<(), SpaceError> {
        if c.slot < self.dim(c.level) {
            Ok(())
        } else {
            Err(SpaceError::InvalidCoordinate {
                level: c.level,
                slot: c.slot,
            })
        }
    }

    pub fn ensure_same(&self, other: &DimensionProfile) -> Result<(), SpaceError> {
        if self == other {
            Ok(())
        } else {
            Err(SpaceError::ProfileMismatch)
        }
    }

    /// Profile restricted to the levels `n ≤ 0` (zero above).
    pub fn compact_part(&self) -> Self {
        Self::from_fn(self.field, self.n_left, self.n_right(), |n| {
            if n <= 0 {
                self.dim(n)
            } else {
                0
            }
        })
    }

    /// Profile restricted to the levels `n > 0` (zero at and below 0).
    pub fn discrete_part(&self) -> Self {
        Self::from_fn(self.field, self.n_left, self.n_right(), |n| {
            if n > 0 {
                self.dim(n)
            } else {
                0
            }
        })
    }

    /// `d(n) = d_1(n) + d_2(n)`: slots of `self` first, then those of `other`.
    pub fn product(&self, other: &Self) -> Result<Self, SpaceError> {
        if self.field != other.field {
            return Err(SpaceError::ProfileMismatch);
        }
        let lo = self.n_left.min(other.n_left);
        let hi = self.n_right().max(other.n_right());
        Ok(Self::from_fn(self.field, lo, hi, |n| self.dim(n) + other.dim(n)))
    }
}

/// Basis vector `e_{level, slot}`. Ordered by `(level, slot)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coordinate {
    pub level: i64,
    pub slot: usize,
}

impl Coordinate {
    pub fn new(level: i64, slot: usize) -> Self {
        Coordinate { level, slot }
    }
}

/// Flattening of the coordinates of levels `(lo, hi]`.
#[derive(Debug, Clone)]
pub struct Window {
    lo: i64,
    hi: i64,
    offsets: Vec<usize>,
}

impl Window {
    pub fn new(profile: &DimensionProfile, lo: i64, hi: i64) -> Self {
        let hi = hi.max(lo);
        let mut offsets = Vec::with_capacity((hi - lo + 1) as usize);
        let mut acc = 0;
        offsets.push(0);
        for n in lo + 1..=hi {
            acc += profile.dim(n);
            offsets.push(acc);
        }
        Window { lo, hi, offsets }
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn level_range(&self, level: i64) -> std::ops::Range<usize> {
        assert!(level > self.lo && level <= self.hi, "level {level} outside window");
        let k = (level - self.lo - 1) as usize;
        self.offsets[k]..self.offsets[k + 1]
    }

    pub fn index(&self, c: Coordinate) -> Option<usize> {
        if c.level <= self.lo || c.level > self.hi {
            return None;
        }
        let r = self.level_range(c.level);
        (c.slot < r.len()).then(|| r.start + c.slot)
    }

    pub fn coordinate(&self, idx: usize) -> Coordinate {
        assert!(idx < self.dim());
        // offsets[k] <= idx < offsets[k+1]
        let k = self.offsets.partition_point(|&o| o <= idx) - 1;
        Coordinate::new(self.lo + 1 + k as i64, idx - self.offsets[k])
    }

    /// Dense form of `v`; entries at levels `≤ lo` are dropped, entries above
    /// `hi` make the result `None`.
    pub fn to_dense(&self, v: &LlcVector) -> Option<Vec<Scalar>> {
        let field = v.profile.field;
        let mut out = vec![field.zero(); self.dim()];
        for (c, s) in &v.entries {
            if c.level <= self.lo {
                continue;
            }
            out[self.index(*c)?] = s.clone();
        }
        Some(out)
    }

    pub fn from_dense(&self, profile: &DimensionProfile, x: &[Scalar]) -> LlcVector {
        assert_eq!(x.len(), self.dim());
        let entries = x
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.is_zero())
            .map(|(i, s)| (self.coordinate(i), s.clone()))
            .collect();
        LlcVector {
            profile: profile.clone(),
            entries,
        }
    }

    /// Unit vector in dense form.
    pub fn unit(&self, field: FieldSpec, c: Coordinate) -> Vec<Scalar> {
        let mut v = vec![field.zero(); self.dim()];
        v[self.index(c).expect("coordinate in window")] = field.one();
        v
    }
}

/// A finitely supported vector of `V`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LlcVector {
    profile: DimensionProfile,
    entries: BTreeMap<Coordinate, Scalar>,
}

impl fmt::Debug for LlcVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|(c, s)| format!("{}·e({},{})", s, c.level, c.slot))
            .collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

impl LlcVector {
    pub fn zero(profile: &DimensionProfile) -> Self {
        LlcVector {
            profile: profile.clone(),
            entries: BTreeMap::new(),
        }
    }

    pub fn basis(profile: &DimensionProfile, c: Coordinate) -> Result<Self, SpaceError> {
        Self::from_entries(profile, [(c, profile.field.one())])
    }

    /// Sums repeated coordinates and drops zeros.
    pub fn from_entries(
        profile: &DimensionProfile,
        entries: impl IntoIterator<Item = (Coordinate, Scalar)>,
    ) -> Result<Self, SpaceError> {
        let mut v = Self::zero(profile);
        for (c, s) in entries {
            profile.check_coordinate(c)?;
            if s.field() != profile.field {
                return Err(SpaceError::FieldMismatch(profile.field, s.field()));
            }
            v.add_at(c, &s);
        }
        Ok(v)
    }

    pub(crate) fn add_at(&mut self, c: Coordinate, s: &Scalar) {
        if s.is_zero() {
            return;
        }
        let new = match self.entries.get(&c) {
            Some(old) => old.add(s),
            None => s.clone(),
        };
        if new.is_zero() {
            self.entries.remove(&c);
        } else {
            self.entries.insert(c, new);
        }
    }

    pub fn profile(&self) -> &DimensionProfile {
        &self.profile
    }

    pub fn entries(&self) -> &BTreeMap<Coordinate, Scalar> {
        &self.entries
    }

    pub fn get(&self, c: Coordinate) -> Scalar {
        self.entries
            .get(&c)
            .cloned()
            .unwrap_or_else(|| self.profile.field.zero())
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn min_level(&self) -> Option<i64> {
        self.entries.keys().next().map(|c| c.level)
    }

    pub fn max_level(&self) -> Option<i64> {
        self.entries.keys().next_back().map(|c| c.level)
    }

    pub fn add(&self, other: &LlcVector) -> Result<LlcVector, SpaceError> {
        self.profile.ensure_same(&other.profile)?;
        let mut out = self.clone();
        for (c, s) in &other.entries {
            out.add_at(*c, s);
        }
        Ok(out)
    }

    pub fn scale(&self, s: &Scalar) -> LlcVector {
        if s.is_zero() {
            return Self::zero(&self.profile);
        }
        LlcVector {
            profile: self.profile.clone(),
            entries: self.entries.iter().map(|(c, x)| (*c, x.mul(s))).collect(),
        }
    }

    /// `self + s·other`, assuming equal profiles.
    pub(crate) fn axpy(&mut self, s: &Scalar, other: &LlcVector) {
        for (c, x) in &other.entries {
            self.add_at(*c, &x.mul(s));
        }
    }

    /// Drops the entries at levels `≤ a` (reduction modulo `U_a`).
    /// `σ^s v`: every entry moved up by `s` levels.
    pub fn translate(&self, s: i64) -> Result<LlcVector, SpaceError> {
        let entries: Vec<_> = self
            .entries
            .iter()
            .map(|(c, x)| (Coordinate::new(c.level + s, c.slot), x.clone()))
            .collect();
        LlcVector::from_entries(&self.profile, entries)
    }

    pub fn mod_tail(&self, a: i64) -> LlcVector {
        LlcVector {
            profile: self.profile.clone(),
            entries: self
                .entries
                .range(Coordinate::new(a + 1, 0)..)
                .map(|(c, s)| (*c, s.clone()))
                .collect(),
        }
    }

    /// Entries at levels in `[lo, hi]`.
    pub fn level_slice(&self, lo: i64, hi: i64) -> LlcVector {
        LlcVector {
            profile: self.profile.clone(),
            entries: self
                .entries
                .iter()
                .filter(|(c, _)| c.level >= lo && c.level <= hi)
                .map(|(c, s)| (*c, s.clone()))
                .collect(),
        }
    }

    /// The part at level `n` as a dense vector of length `d(n)`.
    pub fn level_block(&self, n: i64) -> Vec<Scalar> {
        let mut out = vec![self.profile.field.zero(); self.profile.dim(n)];
        for (c, s) in self.entries.range(Coordinate::new(n, 0)..Coordinate::new(n + 1, 0)) {
            out[c.slot] = s.clone();
        }
        out
    }

    /// Re-labels the vector onto another profile with the same coordinates.
    pub(crate) fn with_profile(&self, profile: &DimensionProfile) -> Result<LlcVector, SpaceError> {
        Self::from_entries(profile, self.entries.iter().map(|(c, s)| (*c, s.clone())))
    }
}

/// `W = U_a ⊕ S` with `S` a subspace of the coordinates of levels `(a, b]`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CompactOpenSubspace {
    profile: DimensionProfile,
    tail_cut: i64,
    window_top: i64,
    window: SubspaceBasis,
}

impl fmt::Debug for CompactOpenSubspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self.window_frame();
        let gens: Vec<LlcVector> = self.window.rows().map(|r| w.from_dense(&self.profile, r)).collect();
        write!(f, "U_{} ⊕ {:?}", self.tail_cut, gens)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpenCombine {
    Sum,
    Intersect,
}

impl CompactOpenSubspace {
    /// `U_a`, all vectors supported at levels `≤ a`.
    pub fn tail(profile: &DimensionProfile, a: i64) -> Result<Self, SpaceError> {
        Self::from_window(profile, a, a, SubspaceBasis::zero(profile.field, 0))
    }

    /// Canonicalizes `U_a ⊕ span(basis)` with `basis` over the coordinates of `(a, b]`.
    pub fn from_window(profile: &DimensionProfile, a: i64, b: i64, basis: SubspaceBasis) -> Result<Self, SpaceError> {
        if a > 0 {
            return Err(SpaceError::TailCutPositive(a));
        }
        let b = b.max(a);
        let frame = Window::new(profile, a, b);
        if basis.ambient_dim() != frame.dim() {
            return Err(LinalgError::AmbientMismatch(frame.dim(), basis.ambient_dim()).into());
        }
        Ok(Self::raw(profile.clone(), a, b, basis).canonicalize())
    }

    /// `U_a + span(generators)`.
    pub fn from_generators(profile: &DimensionProfile, a: i64, generators: &[LlcVector]) -> Result<Self, SpaceError> {
        if a > 0 {
            return Err(SpaceError::TailCutPositive(a));
        }
        for g in generators {
            profile.ensure_same(g.profile())?;
        }
        let top = generators.iter().filter_map(|g| g.max_level()).fold(a, i64::max);
        let frame = Window::new(profile, a, top);
        let rows = generators
            .iter()
            .map(|g| frame.to_dense(g).expect("generator within window"))
            .collect();
        let basis = SubspaceBasis::span(profile.field, frame.dim(), rows)?;
        Ok(Self::raw(profile.clone(), a, top, basis).canonicalize())
    }

    /// `C_m = V_c ⊕ (all coordinates at levels 1..=m)`; a cofinal chain in `B(V)`.
    pub fn cofinal_chain(profile: &DimensionProfile, m: usize) -> Self {
        let m = m as i64;
        let frame = Window::new(profile, 0, m);
        Self::raw(profile.clone(), 0, m, SubspaceBasis::full(profile.field, frame.dim())).canonicalize()
    }

    /// Unchecked constructor; call [`canonicalize`](Self::canonicalize) afterwards.
    pub fn raw(profile: DimensionProfile, tail_cut: i64, window_top: i64, window: SubspaceBasis) -> Self {
        CompactOpenSubspace {
            profile,
            tail_cut,
            window_top,
            window,
        }
    }

    pub fn canonicalize(self) -> Self {
        let CompactOpenSubspace {
            profile,
            mut tail_cut,
            window_top,
            mut window,
        } = self;
        let field = profile.field;
        let mut top = window_top.max(tail_cut);
        while tail_cut < 0 {
            let level = tail_cut + 1;
            let d = profile.dim(level);
            if d > 0 {
                if level > top {
                    break;
                }
                let absorbed = (0..d).all(|i| {
                    let mut e = vec![field.zero(); window.ambient_dim()];
                    e[i] = field.one();
                    window.contains_vector(&e)
                });
                if !absorbed {
                    break;
                }
                window = window.project(d..window.ambient_dim());
            }
            tail_cut = level;
            top = top.max(tail_cut);
        }
        // Shrink the top to the highest level actually used.
        let frame = Window::new(&profile, tail_cut, top);
        let used = (0..window.ambient_dim())
            .rev()
            .find(|&j| window.rows().any(|r| !r[j].is_zero()))
            .map(|j| frame.coordinate(j).level)
            .unwrap_or(tail_cut);
        if used < top {
            let keep = Window::new(&profile, tail_cut, used).dim();
            window = window.project(0..keep);
            top = used;
        }
        CompactOpenSubspace {
            profile,
            tail_cut,
            window_top: top,
            window,
        }
    }

    pub fn profile(&self) -> &DimensionProfile {
        &self.profile
    }

    pub fn tail_cut(&self) -> i64 {
        self.tail_cut
    }

    pub fn window_top(&self) -> i64 {
        self.window_top
    }

    pub fn window(&self) -> &SubspaceBasis {
        &self.window
    }

    pub fn window_frame(&self) -> Window {
        Window::new(&self.profile, self.tail_cut, self.window_top)
    }

    /// RREF window rows as vectors of `V`.
    pub fn window_generators(&self) -> Vec<LlcVector> {
        let frame = self.window_frame();
        self.window.rows().map(|r| frame.from_dense(&self.profile, r)).collect()
    }

    /// Largest level `L` with `U_L ⊆ W`. Levels of dimension zero count as
    /// contained; past the window the scan stops at the first nonzero level.
    pub fn full_prefix(&self) -> i64 {
        let frame = self.window_frame();
        let pivots = self.window.pivots();
        let mut level = self.tail_cut;
        loop {
            let next = level + 1;
            if next > self.window_top {
                if self.profile.dim(next) == 0 && next <= self.profile.n_right() {
                    level = next;
                    continue;
                }
                return level;
            }
            let full = frame.level_range(next).all(|j| match pivots.binary_search(&j) {
                Ok(k) => {
                    let row = self.window.basis().row(k);
                    row.iter().enumerate().all(|(c, x)| c == j || x.is_zero())
                }
                Err(_) => false,
            });
            if !full {
                return level;
            }
            level = next;
        }
    }

    /// RREF rows of `W ∩ span{levels > L}` for `L ≤ full_prefix()`; together
    /// with `U_L` they span `W`.
    pub fn rows_above(&self, level: i64) -> Vec<LlcVector> {
        debug_assert!(level <= self.full_prefix());
        let frame = self.window_frame();
        self.window
            .rows()
            .zip(self.window.pivots())
            .filter(|(_, &p)| frame.coordinate(p).level > level)
            .map(|(r, _)| frame.from_dense(&self.profile, r))
            .collect()
    }

    /// Generators of `(W + U_a) / U_a` in the frame `(a, top]`; `top ≥ window_top`.
    pub fn generators_mod(&self, a: i64, top: i64) -> Vec<Vec<Scalar>> {
        assert!(top >= self.window_top && top >= a);
        let field = self.profile.field;
        let target = Window::new(&self.profile, a, top);
        let own = self.window_frame();
        let mut rows = Vec::new();
        if a < self.tail_cut {
            for n in a + 1..=self.tail_cut {
                for i in 0..self.profile.dim(n) {
                    rows.push(target.unit(field, Coordinate::new(n, i)));
                }
            }
        }
        for r in self.window.rows() {
            let mut v = vec![field.zero(); target.dim()];
            for (j, s) in r.iter().enumerate() {
                if s.is_zero() {
                    continue;
                }
                if let Some(k) = target.index(own.coordinate(j)) {
                    v[k] = s.clone();
                }
            }
            rows.push(v);
        }
        rows
    }

    /// `(W + U_a) / U_a` as a subspace of the frame `(a, top]`.
    pub fn relative_basis(&self, a: i64, top: i64) -> SubspaceBasis {
        let dim = Window::new(&self.profile, a, top).dim();
        SubspaceBasis::span(self.profile.field, dim, self.generators_mod(a, top)).expect("frame rows")
    }

    pub fn member(&self, v: &LlcVector) -> Result<bool, SpaceError> {
        self.profile.ensure_same(v.profile())?;
        let rest = v.mod_tail(self.tail_cut);
        match self.window_frame().to_dense(&rest) {
            Some(x) => Ok(self.window.contains_vector(&x)),
            None => Ok(false),
        }
    }

    pub fn combine(&self, other: &Self, mode: OpenCombine) -> Result<Self, SpaceError> {
        self.profile.ensure_same(&other.profile)?;
        let a = match mode {
            OpenCombine::Sum => self.tail_cut.max(other.tail_cut),
            OpenCombine::Intersect => self.tail_cut.min(other.tail_cut),
        };
        let top = self.window_top.max(other.window_top).max(a);
        let x = self.relative_basis(a, top);
        let y = other.relative_basis(a, top);
        let s = match mode {
            OpenCombine::Sum => x.sum(&y)?,
            OpenCombine::Intersect => x.intersect(&y)?,
        };
        Self::from_window(&self.profile, a, top, s)
    }

    pub fn sum(&self, other: &Self) -> Result<Self, SpaceError> {
        self.combine(other, OpenCombine::Sum)
    }

    pub fn intersect(&self, other: &Self) -> Result<Self, SpaceError> {
        self.combine(other, OpenCombine::Intersect)
    }

    fn common_frame(&self, other: &Self) -> (SubspaceBasis, SubspaceBasis) {
        let a = self.tail_cut.min(other.tail_cut);
        let top = self.window_top.max(other.window_top).max(a);
        (self.relative_basis(a, top), other.relative_basis(a, top))
    }

    pub fn contains(&self, other: &Self) -> Result<bool, SpaceError> {
        self.profile.ensure_same(&other.profile)?;
        let (big, small) = self.common_frame(other);
        Ok(big.contains(&small))
    }

    /// Codimension of `small` in `self`.
    pub fn quotient_dim(&self, small: &Self) -> Result<usize, SpaceError> {
        self.profile.ensure_same(&small.profile)?;
        let (big, sm) = self.common_frame(small);
        if !big.contains(&sm) {
            return Err(SpaceError::NotContained);
        }
        Ok(big.dim() - sm.dim())
    }
}

/// Codimension of `small` in `big`.
pub fn open_quotient_dim(big: &CompactOpenSubspace, small: &CompactOpenSubspace) -> Result<usize, SpaceError> {
    big.quotient_dim(small)
}

/// A closed subspace `∏_{n≤0} W_n ⊕ ⊕_{n>0} W_n`, with `W_n` given explicitly on
/// `[start, end]`, equal to `left` below and `right` above.
#[derive(Clone, PartialEq, Eq)]
pub struct BlockwisePattern {
    profile: DimensionProfile,
    start: i64,
    levels: Vec<SubspaceBasis>,
    left: SubspaceBasis,
    right: SubspaceBasis,
}

impl fmt::Debug for BlockwisePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dims: Vec<usize> = self.levels.iter().map(SubspaceBasis::dim).collect();
        write!(
            f,
            "Pattern(left dim {}, {}:{:?}, right dim {})",
            self.left.dim(),
            self.start,
            dims,
            self.right.dim()
        )
    }
}

impl BlockwisePattern {
    pub fn new(
        profile: &DimensionProfile,
        start: i64,
        levels: Vec<SubspaceBasis>,
        left: SubspaceBasis,
        right: SubspaceBasis,
    ) -> Result<Self, SpaceError> {
        if left.ambient_dim() != profile.d_left() || right.ambient_dim() != profile.d_right() {
            return Err(SpaceError::InvalidPattern("stationary pattern dimension".into()));
        }
        if left.field() != profile.field() || right.field() != profile.field() {
            return Err(SpaceError::InvalidPattern("field".into()));
        }
        let end = start + levels.len() as i64 - 1;
        // Cover the whole profile boundary explicitly.
        let lo = start.min(profile.n_left());
        let hi = end.max(profile.n_right());
        let mut all = Vec::with_capacity((hi - lo + 1) as usize);
        for n in lo..=hi {
            let w = if n < start {
                left.clone()
            } else if n > end {
                right.clone()
            } else {
                levels[(n - start) as usize].clone()
            };
            if w.ambient_dim() != profile.dim(n) || w.field() != profile.field() {
                return Err(SpaceError::InvalidPattern(format!(
                    "level {n} has the wrong ambient dimension"
                )));
            }
            all.push(w);
        }
        Ok(BlockwisePattern {
            profile: profile.clone(),
            start: lo,
            levels: all,
            left,
            right,
        })
    }

    pub fn full(profile: &DimensionProfile) -> Self {
        Self::from_fn(profile, |n| SubspaceBasis::full(profile.field(), profile.dim(n)))
    }

    pub fn zero(profile: &DimensionProfile) -> Self {
        Self::from_fn(profile, |n| SubspaceBasis::zero(profile.field(), profile.dim(n)))
    }

    /// The span of the given slots at every level (slots beyond `d(n)` ignored).
    pub fn slots(profile: &DimensionProfile, slots: &[usize]) -> Self {
        Self::from_fn(profile, |n| {
            let d = profile.dim(n);
            let s: Vec<usize> = slots.iter().copied().filter(|&i| i < d).collect();
            SubspaceBasis::coordinate(profile.field(), d, &s)
        })
    }

    /// Pattern given per level, stationary outside the profile boundary.
    pub fn from_fn(profile: &DimensionProfile, f: impl Fn(i64) -> SubspaceBasis) -> Self {
        let (lo, hi) = (profile.n_left(), profile.n_right());
        let levels = (lo..=hi).map(&f).collect();
        Self::new(profile, lo, levels, f(lo - 1), f(hi + 1)).expect("pattern from fn")
    }

    pub fn profile(&self) -> &DimensionProfile {
        &self.profile
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn end(&self) -> i64 {
        self.start + self.levels.len() as i64 - 1
    }

    pub fn left(&self) -> &SubspaceBasis {
        &self.left
    }

    pub fn right(&self) -> &SubspaceBasis {
        &self.right
    }

    pub fn at(&self, n: i64) -> &SubspaceBasis {
        if n < self.start {
            &self.left
        } else if n > self.end() {
            &self.right
        } else {
            &self.levels[(n - self.start) as usize]
        }
    }

    /// `W_n = 0` for every `n > 0`, i.e. `W` is linearly compact.
    pub fn is_linearly_compact(&self) -> bool {
        self.right.dim() == 0 && (1..=self.end()).all(|n| self.at(n).dim() == 0)
    }

    pub fn sub_profile(&self) -> DimensionProfile {
        DimensionProfile::from_fn(self.profile.field(), self.start, self.end(), |n| self.at(n).dim())
    }

    pub fn quotient_profile(&self) -> DimensionProfile {
        DimensionProfile::from_fn(self.profile.field(), self.start, self.end(), |n| {
            self.profile.dim(n) - self.at(n).dim()
        })
    }

    /// Coordinates of `x ∈ W_n` in the RREF basis of `W_n`.
    pub fn sub_coords(&self, n: i64, x: &[Scalar]) -> Option<Vec<Scalar>> {
        self.at(n).coefficients(x)
    }

    /// Coordinates of `x + W_n` in `K^{d(n)} / W_n`, using the non-pivot unit
    /// vectors of `W_n`'s RREF as the quotient basis.
    pub fn quotient_coords(&self, n: i64, x: &[Scalar]) -> Vec<Scalar> {
        let w = self.at(n);
        let r = w.reduce(x);
        non_pivots(w).into_iter().map(|j| r[j].clone()).collect()
    }

    pub fn embed_sub(&self, n: i64, coeffs: &[Scalar]) -> Vec<Scalar> {
        let w = self.at(n);
        let field = self.profile.field();
        let mut out = vec![field.zero(); w.ambient_dim()];
        for (c, row) in coeffs.iter().zip(w.rows()) {
            if c.is_zero() {
                continue;
            }
            for (o, b) in out.iter_mut().zip(row) {
                *o = o.add(&c.mul(b));
            }
        }
        out
    }

    pub fn lift_quotient(&self, n: i64, q: &[Scalar]) -> Vec<Scalar> {
        let w = self.at(n);
        let field = self.profile.field();
        let mut out = vec![field.zero(); w.ambient_dim()];
        for (j, s) in non_pivots(w).into_iter().zip(q) {
            out[j] = s.clone();
        }
        out
    }

    pub fn member(&self, v: &LlcVector) -> Result<bool, SpaceError> {
        self.profile.ensure_same(v.profile())?;
        let levels: std::collections::BTreeSet<i64> = v.entries().keys().map(|c| c.level).collect();
        Ok(levels
            .into_iter()
            .all(|n| self.at(n).contains_vector(&v.level_block(n))))
    }

    /// `(U ∩ W, (U + W)/W)` in the intrinsic coordinates of `W` and `V/W`.
    pub fn restrict_quotient(
        &self,
        u: &CompactOpenSubspace,
    ) -> Result<(CompactOpenSubspace, CompactOpenSubspace), SpaceError> {
        self.profile.ensure_same(u.profile())?;
        let field = self.profile.field();
        let (a, b) = (u.tail_cut(), u.window_top());
        let frame = u.window_frame();
        let sub_p = self.sub_profile();
        let quo_p = self.quotient_profile();
        let sub_frame = Window::new(&sub_p, a, b);
        let quo_frame = Window::new(&quo_p, a, b);

        let mut w_rows = Vec::new();
        for n in a + 1..=b {
            let r = frame.level_range(n);
            for row in self.at(n).rows() {
                let mut v = vec![field.zero(); frame.dim()];
                v[r.clone()].clone_from_slice(row);
                w_rows.push(v);
            }
        }
        let w_window = SubspaceBasis::span(field, frame.dim(), w_rows)?;
        let inter = u.window().intersect(&w_window)?;
        let sub_rows = inter
            .rows()
            .map(|x| {
                let mut out = Vec::with_capacity(sub_frame.dim());
                for n in a + 1..=b {
                    out.extend(self.sub_coords(n, &x[frame.level_range(n)]).expect("member of W"));
                }
                out
            })
            .collect();
        let quo_rows = u
            .window()
            .rows()
            .map(|x| {
                let mut out = Vec::with_capacity(quo_frame.dim());
                for n in a + 1..=b {
                    out.extend(self.quotient_coords(n, &x[frame.level_range(n)]));
                }
                out
            })
            .collect();
        let sub =
            CompactOpenSubspace::from_window(&sub_p, a, b, SubspaceBasis::span(field, sub_frame.dim(), sub_rows)?)?;
        let quo =
            CompactOpenSubspace::from_window(&quo_p, a, b, SubspaceBasis::span(field, quo_frame.dim(), quo_rows)?)?;
        Ok((sub, quo))
    }
}

fn non_pivots(w: &SubspaceBasis) -> Vec<usize> {
    let p = w.pivots();
    (0..w.ambient_dim()).filter(|j| !p.contains(j)).collect()
}

/// Free-function form of [`BlockwisePattern::restrict_quotient`].
pub fn blockwise_restrict_quotient(
    w: &BlockwisePattern,
    u: &CompactOpenSubspace,
) -> Result<(CompactOpenSubspace, CompactOpenSubspace), SpaceError> {
    w.restrict_quotient(u)
}
