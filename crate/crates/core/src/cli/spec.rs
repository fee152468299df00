//! The JSON spec-file format and its conversion to model objects.
//!
//! ```json
//! {
//!   "field": "GF(2)",
//!   "profile": {"constant": 2},
//!   "operator": "right_shift",
//!   "inverse": "left_shift",
//!   "pattern": {"slots": [0]}
//! }
//! ```
//!
//! Scalars are JSON integers, or strings such as `"3/4"` over `Q`. A sparse
//! vector is a list of `[level, slot, scalar]` triples.

use std::fmt;
use std::marker::PhantomData;

use serde::de::{self, MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::engine::EntropyConfig;
use crate::field::{FieldSpec, Scalar};
use crate::linalg::{Matrix, SubspaceBasis};
use crate::operator::{BandedOperator, OperatorError, ShiftDirection};
use crate::space::{BlockwisePattern, CompactOpenSubspace, Coordinate, DimensionProfile, LlcVector};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpecError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("validation error: {0}")]
    Validation(String),
}

fn invalid(what: &str, e: impl fmt::Display) -> SpecError {
    SpecError::Validation(format!("{what}: {e}"))
}

/// Either a constructor name or an explicit object.
#[derive(Debug, Clone, PartialEq)]
pub enum Named<T> {
    Name(String),
    Explicit(T),
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for Named<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct NamedVisitor<T>(PhantomData<T>);

        impl<'de, T: Deserialize<'de>> Visitor<'de> for NamedVisitor<T> {
            type Value = Named<T>;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a constructor name or an object")
            }

            fn visit_str<E: de::Error>(self, s: &str) -> Result<Self::Value, E> {
                Ok(Named::Name(s.to_string()))
            }

            fn visit_map<A: MapAccess<'de>>(self, map: A) -> Result<Self::Value, A::Error> {
                T::deserialize(de::value::MapAccessDeserializer::new(map)).map(Named::Explicit)
            }
        }

        d.deserialize_any(NamedVisitor(PhantomData))
    }
}

impl<T: Serialize> Serialize for Named<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Named::Name(n) => s.serialize_str(n),
            Named::Explicit(t) => t.serialize(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarDoc {
    Int(i64),
    Text(String),
}

pub type RowsDoc = Vec<Vec<ScalarDoc>>;
pub type VectorDoc = Vec<(i64, usize, ScalarDoc)>;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_left: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_left: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_right: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnDoc {
    pub level: i64,
    pub slot: usize,
    pub image: VectorDoc,
}

/// Explicit operator: stationary blocks at offsets `-w..=w`, and columns on
/// `boundary` (default `[n_left - w, n_right + w]`) that differ from the
/// stationary rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorDoc {
    pub width: usize,
    pub left_blocks: Vec<RowsDoc>,
    pub right_blocks: Vec<RowsDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<(i64, i64)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub boundary_columns: Vec<ColumnDoc>,
}

/// `{"chain": m}` or `{"tail": a, "generators": [...]}`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubspaceDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<VectorDoc>>,
}

/// `{"slots": [...]}` or `{"start": s, "levels": [...], "left": rows, "right": rows}`
/// with each level given by spanning rows.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slots: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<RowsDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left: Option<RowsDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right: Option<RowsDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorDoc {
    pub operator: Named<OperatorDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inverse: Option<Named<OperatorDoc>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OtherDoc {
    pub profile: ProfileDoc,
    pub operator: Named<OperatorDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inverse: Option<Named<OperatorDoc>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftDoc {
    pub direction: String,
    pub k: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plateau_streak: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_trajectory_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_chain_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strict: Option<bool>,
}

impl ConfigDoc {
    pub fn apply(&self, cfg: &mut EntropyConfig) {
        if let Some(v) = self.plateau_streak {
            cfg.plateau_streak = v;
        }
        if let Some(v) = self.max_trajectory_steps {
            cfg.max_trajectory_steps = v;
        }
        if let Some(v) = self.max_chain_index {
            cfg.max_chain_index = v;
        }
        if let Some(v) = self.strict {
            cfg.strict = v;
        }
    }

    fn is_empty(&self) -> bool {
        *self == ConfigDoc::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDocument {
    pub field: String,
    pub profile: ProfileDoc,
    pub operator: Named<OperatorDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inverse: Option<Named<OperatorDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subspace: Option<SubspaceDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<Named<PatternDoc>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub chain: Vec<Named<PatternDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conjugator: Option<FactorDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub other: Option<OtherDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<ShiftDoc>,
    #[serde(default, skip_serializing_if = "ConfigDoc::is_empty")]
    pub config: ConfigDoc,
}

/// A parsed and validated spec file.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecFile {
    pub field: FieldSpec,
    pub profile: DimensionProfile,
    pub operator: BandedOperator,
    pub inverse: Option<BandedOperator>,
    pub subspace: Option<CompactOpenSubspace>,
    pub pattern: Option<BlockwisePattern>,
    pub chain: Vec<BlockwisePattern>,
    pub power: Option<usize>,
    pub conjugator: Option<(BandedOperator, Option<BandedOperator>)>,
    pub other: Option<(BandedOperator, Option<BandedOperator>)>,
    pub shift: Option<(ShiftDirection, u64)>,
    pub config: ConfigDoc,
}

pub fn parse_spec(text: &str) -> Result<SpecFile, SpecError> {
    let doc: SpecDocument = serde_json::from_str(text).map_err(|e| SpecError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    SpecFile::from_document(&doc)
}

pub fn serialize_spec(spec: &SpecFile) -> String {
    serde_json::to_string_pretty(&spec.to_document()).expect("spec documents serialize")
}

fn scalar(field: FieldSpec, s: &ScalarDoc) -> Result<Scalar, SpecError> {
    match s {
        ScalarDoc::Int(v) => Ok(field.from_i64(*v)),
        ScalarDoc::Text(t) => field.parse_scalar(t).map_err(|e| invalid("scalar", e)),
    }
}

fn scalar_doc(s: &Scalar) -> ScalarDoc {
    match s.to_i64() {
        Some(v) => ScalarDoc::Int(v),
        None => ScalarDoc::Text(s.to_text()),
    }
}

fn rows(field: FieldSpec, cols: usize, r: &RowsDoc) -> Result<Vec<Vec<Scalar>>, SpecError> {
    r.iter()
        .map(|row| {
            if row.len() != cols {
                return Err(SpecError::Validation(format!(
                    "row of length {} where {cols} entries are needed",
                    row.len()
                )));
            }
            row.iter().map(|s| scalar(field, s)).collect()
        })
        .collect()
}

fn matrix(field: FieldSpec, r: &RowsDoc) -> Result<Matrix, SpecError> {
    let cols = r.first().map_or(0, Vec::len);
    let data = rows(field, cols, r)?;
    Matrix::from_rows(field, cols, data).map_err(|e| invalid("block", e))
}

fn rows_doc(rows: impl Iterator<Item = Vec<Scalar>>) -> RowsDoc {
    rows.map(|r| r.iter().map(scalar_doc).collect()).collect()
}

fn vector(profile: &DimensionProfile, v: &VectorDoc) -> Result<LlcVector, SpecError> {
    let entries = v
        .iter()
        .map(|(n, i, s)| Ok((Coordinate::new(*n, *i), scalar(profile.field(), s)?)))
        .collect::<Result<Vec<_>, SpecError>>()?;
    LlcVector::from_entries(profile, entries).map_err(|e| invalid("vector", e))
}

fn vector_doc(v: &LlcVector) -> VectorDoc {
    v.entries()
        .iter()
        .map(|(c, s)| (c.level, c.slot, scalar_doc(s)))
        .collect()
}

fn profile(field: FieldSpec, d: &ProfileDoc) -> Result<DimensionProfile, SpecError> {
    match d {
        ProfileDoc {
            constant: Some(c),
            d_left: None,
            n_left: None,
            boundary: None,
            d_right: None,
        } => Ok(DimensionProfile::constant(field, *c)),
        ProfileDoc {
            constant: None,
            d_left: Some(l),
            n_left: Some(n),
            boundary: Some(b),
            d_right: Some(r),
        } => DimensionProfile::new(field, *l, *n, b.clone(), *r).map_err(|e| invalid("profile", e)),
        _ => Err(SpecError::Validation(
            "profile: give either `constant` or all of `d_left`, `n_left`, `boundary`, `d_right`".into(),
        )),
    }
}

fn profile_doc(p: &DimensionProfile) -> ProfileDoc {
    ProfileDoc {
        constant: None,
        d_left: Some(p.d_left()),
        n_left: Some(p.n_left()),
        boundary: Some(p.boundary().to_vec()),
        d_right: Some(p.d_right()),
    }
}

fn operator_error(what: &str, e: OperatorError) -> SpecError {
    match e {
        OperatorError::Invalid(v) => SpecError::Validation(format!(
            "{what}: {}",
            v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
        )),
        e => invalid(what, e),
    }
}

fn operator(p: &DimensionProfile, d: &Named<OperatorDoc>, what: &str) -> Result<BandedOperator, SpecError> {
    let field = p.field();
    match d {
        Named::Name(n) => match n.as_str() {
            "right_shift" => BandedOperator::shift(p, ShiftDirection::Right).map_err(|e| operator_error(what, e)),
            "left_shift" => BandedOperator::shift(p, ShiftDirection::Left).map_err(|e| operator_error(what, e)),
            "identity" => Ok(BandedOperator::identity(p)),
            "zero" => Ok(BandedOperator::zero(p)),
            other => Err(SpecError::Validation(format!(
                "{what}: unknown constructor {other:?} (expected right_shift, left_shift, identity or zero)"
            ))),
        },
        Named::Explicit(o) => {
            let left = o
                .left_blocks
                .iter()
                .map(|b| matrix(field, b))
                .collect::<Result<Vec<_>, _>>()?;
            let right = o
                .right_blocks
                .iter()
                .map(|b| matrix(field, b))
                .collect::<Result<Vec<_>, _>>()?;
            let mut cols = std::collections::BTreeMap::new();
            for c in &o.boundary_columns {
                let key = Coordinate::new(c.level, c.slot);
                p.check_coordinate(key).map_err(|e| invalid(what, e))?;
                if cols.insert(key, vector(p, &c.image)?).is_some() {
                    return Err(SpecError::Validation(format!(
                        "{what}: column ({}, {}) given twice",
                        c.level, c.slot
                    )));
                }
            }
            let w = o.width as i64;
            let (lo, hi) = o.boundary.unwrap_or((p.n_left() - w, p.n_right() + w));
            if let Some(c) = cols.keys().find(|c| c.level < lo || c.level > hi) {
                return Err(SpecError::Validation(format!(
                    "{what}: column ({}, {}) lies outside the boundary [{lo}, {hi}]",
                    c.level, c.slot
                )));
            }
            BandedOperator::stationary_with(p, o.width, left, right, Some((lo, hi)), |c| cols.get(&c).cloned())
                .map_err(|e| operator_error(what, e))
        }
    }
}

fn operator_doc(op: &BandedOperator) -> OperatorDoc {
    use crate::operator::Side;
    let w = op.width() as i64;
    let blocks = |side: Side| {
        (-w..=w)
            .map(|j| {
                let b = op.block(side, j);
                rows_doc((0..b.rows()).map(|r| b.row(r).to_vec()))
            })
            .collect()
    };
    let (lo, hi) = op.boundary_range();
    let p = op.profile();
    let mut columns = Vec::new();
    for n in lo..=hi {
        for i in 0..p.dim(n) {
            columns.push(ColumnDoc {
                level: n,
                slot: i,
                image: vector_doc(&op.column(n, i)),
            });
        }
    }
    OperatorDoc {
        width: op.width(),
        left_blocks: blocks(Side::Left),
        right_blocks: blocks(Side::Right),
        boundary: Some((lo, hi)),
        boundary_columns: columns,
    }
}

fn subspace(p: &DimensionProfile, d: &SubspaceDoc) -> Result<CompactOpenSubspace, SpecError> {
    match d {
        SubspaceDoc {
            chain: Some(m),
            tail: None,
            generators: None,
        } => Ok(CompactOpenSubspace::cofinal_chain(p, *m)),
        SubspaceDoc {
            chain: None,
            tail: Some(a),
            generators,
        } => {
            let gens = generators
                .iter()
                .flatten()
                .map(|g| vector(p, g))
                .collect::<Result<Vec<_>, _>>()?;
            CompactOpenSubspace::from_generators(p, *a, &gens).map_err(|e| invalid("subspace", e))
        }
        _ => Err(SpecError::Validation(
            "subspace: give either `chain` or `tail` with optional `generators`".into(),
        )),
    }
}

fn subspace_doc(u: &CompactOpenSubspace) -> SubspaceDoc {
    SubspaceDoc {
        chain: None,
        tail: Some(u.tail_cut()),
        generators: Some(u.window_generators().iter().map(vector_doc).collect()),
    }
}

fn level_basis(field: FieldSpec, dim: usize, r: &RowsDoc) -> Result<SubspaceBasis, SpecError> {
    let data = rows(field, dim, r)?;
    SubspaceBasis::span(field, dim, data).map_err(|e| invalid("pattern", e))
}

fn pattern(p: &DimensionProfile, d: &Named<PatternDoc>) -> Result<BlockwisePattern, SpecError> {
    let field = p.field();
    match d {
        Named::Name(n) => match n.as_str() {
            "full" => Ok(BlockwisePattern::full(p)),
            "zero" => Ok(BlockwisePattern::zero(p)),
            other => Err(SpecError::Validation(format!(
                "pattern: unknown constructor {other:?} (expected full or zero)"
            ))),
        },
        Named::Explicit(PatternDoc {
            slots: Some(s),
            start: None,
            levels: None,
            left: None,
            right: None,
        }) => Ok(BlockwisePattern::slots(p, s)),
        Named::Explicit(PatternDoc {
            slots: None,
            start: Some(start),
            levels: Some(levels),
            left: Some(left),
            right: Some(right),
        }) => {
            let lv = levels
                .iter()
                .enumerate()
                .map(|(k, r)| level_basis(field, p.dim(start + k as i64), r))
                .collect::<Result<Vec<_>, _>>()?;
            let l = level_basis(field, p.d_left(), left)?;
            let r = level_basis(field, p.d_right(), right)?;
            BlockwisePattern::new(p, *start, lv, l, r).map_err(|e| invalid("pattern", e))
        }
        _ => Err(SpecError::Validation(
            "pattern: give `slots`, or all of `start`, `levels`, `left`, `right`".into(),
        )),
    }
}

fn pattern_doc(w: &BlockwisePattern) -> PatternDoc {
    let basis_rows = |b: &SubspaceBasis| rows_doc(b.rows().map(<[Scalar]>::to_vec));
    PatternDoc {
        slots: None,
        start: Some(w.start()),
        levels: Some((w.start()..=w.end()).map(|n| basis_rows(w.at(n))).collect()),
        left: Some(basis_rows(w.left())),
        right: Some(basis_rows(w.right())),
    }
}

fn direction(s: &str) -> Result<ShiftDirection, SpecError> {
    match s {
        "right" => Ok(ShiftDirection::Right),
        "left" => Ok(ShiftDirection::Left),
        other => Err(SpecError::Validation(format!(
            "shift: direction {other:?} (expected right or left)"
        ))),
    }
}

impl SpecFile {
    pub fn from_document(doc: &SpecDocument) -> Result<SpecFile, SpecError> {
        let field: FieldSpec = doc.field.parse().map_err(|e| invalid("field", e))?;
        let p = profile(field, &doc.profile)?;
        let op = operator(&p, &doc.operator, "operator")?;
        let inverse = doc.inverse.as_ref().map(|d| operator(&p, d, "inverse")).transpose()?;
        let subspace = doc.subspace.as_ref().map(|d| subspace(&p, d)).transpose()?;
        let pat = doc.pattern.as_ref().map(|d| pattern(&p, d)).transpose()?;
        let chain = doc
            .chain
            .iter()
            .map(|d| pattern(&p, d))
            .collect::<Result<Vec<_>, _>>()?;
        let conjugator = doc
            .conjugator
            .as_ref()
            .map(|c| -> Result<_, SpecError> {
                let a = operator(&p, &c.operator, "conjugator")?;
                let ai = c
                    .inverse
                    .as_ref()
                    .map(|d| operator(&p, d, "conjugator inverse"))
                    .transpose()?;
                Ok((a, ai))
            })
            .transpose()?;
        let other = doc
            .other
            .as_ref()
            .map(|o| -> Result<_, SpecError> {
                let q = profile(field, &o.profile)?;
                let b = operator(&q, &o.operator, "other operator")?;
                let bi = o
                    .inverse
                    .as_ref()
                    .map(|d| operator(&q, d, "other inverse"))
                    .transpose()?;
                Ok((b, bi))
            })
            .transpose()?;
        let shift = doc
            .shift
            .as_ref()
            .map(|s| Ok::<_, SpecError>((direction(&s.direction)?, s.k)))
            .transpose()?;
        Ok(SpecFile {
            field,
            profile: p,
            operator: op,
            inverse,
            subspace,
            pattern: pat,
            chain,
            power: doc.power,
            conjugator,
            other,
            shift,
            config: doc.config,
        })
    }

    /// Fully explicit document; parsing it gives back an equal spec.
    pub fn to_document(&self) -> SpecDocument {
        let explicit = |op: &BandedOperator| Named::Explicit(operator_doc(op));
        SpecDocument {
            field: self.field.to_string(),
            profile: profile_doc(&self.profile),
            operator: explicit(&self.operator),
            inverse: self.inverse.as_ref().map(explicit),
            subspace: self.subspace.as_ref().map(subspace_doc),
            pattern: self.pattern.as_ref().map(|w| Named::Explicit(pattern_doc(w))),
            chain: self.chain.iter().map(|w| Named::Explicit(pattern_doc(w))).collect(),
            power: self.power,
            conjugator: self.conjugator.as_ref().map(|(a, ai)| FactorDoc {
                operator: explicit(a),
                inverse: ai.as_ref().map(explicit),
            }),
            other: self.other.as_ref().map(|(b, bi)| OtherDoc {
                profile: profile_doc(b.profile()),
                operator: explicit(b),
                inverse: bi.as_ref().map(explicit),
            }),
            shift: self.shift.map(|(d, k)| ShiftDoc {
                direction: match d {
                    ShiftDirection::Right => "right".into(),
                    ShiftDirection::Left => "left".into(),
                },
                k,
            }),
            config: self.config,
        }
    }
}

/// Canonical JSON for a subspace, as used in reports.
pub fn subspace_json(u: &CompactOpenSubspace) -> serde_json::Value {
    serde_json::to_value(subspace_doc(u)).expect("subspace documents serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_spec_parses() {
        let s = parse_spec(r#"{"field":"GF(2)","profile":{"constant":1},"operator":"right_shift"}"#).unwrap();
        assert_eq!(s.profile.constant_dim(), Some(1));
        assert!(s
            .operator
            .same_map(&BandedOperator::shift(&s.profile, ShiftDirection::Right).unwrap()));
        assert!(s.inverse.is_none());
    }

    #[test]
    fn unknown_key_is_reported_with_position() {
        let text = "{\n  \"field\": \"GF(2)\",\n  \"profile\": {\"constant\": 1},\n  \"operater\": \"right_shift\"\n}";
        match parse_spec(text) {
            Err(SpecError::Parse { line, message, .. }) => {
                assert_eq!(line, 4);
                assert!(message.contains("operater"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        let nested = r#"{"field":"GF(2)","profile":{"constant":1},"operator":{"width":0,"left_blocks":[[[1]]],"right_blocks":[[[1]]],"colums":[]}}"#;
        match parse_spec(nested) {
            Err(SpecError::Parse { message, .. }) => assert!(message.contains("colums"), "{message}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn block_dimension_mismatch() {
        let text = r#"{"field":"GF(2)","profile":{"constant":1},
            "operator":{"width":0,"left_blocks":[[[1,0],[0,1]]],"right_blocks":[[[1]]]}}"#;
        match parse_spec(text) {
            Err(SpecError::Validation(m)) => assert!(m.contains("block dimension mismatch"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn explicit_round_trip() {
        let text = r#"{"field":"GF(3)","profile":{"d_left":1,"n_left":-1,"boundary":[2,1,0],"d_right":2},
            "operator":"identity",
            "subspace":{"tail":-1,"generators":[[[0,0,1],[2,1,2]]]},
            "pattern":"full",
            "chain":["zero","full"],
            "power":2,
            "shift":{"direction":"left","k":3},
            "config":{"plateau_streak":4}}"#;
        let s = parse_spec(text).unwrap();
        let again = parse_spec(&serialize_spec(&s)).unwrap();
        assert_eq!(s, again);
    }
}
