//! Exact scalars: prime fields GF(p) and the rationals.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Largest admissible prime modulus.
pub const MAX_PRIME: u64 = 1 << 31;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("field mismatch: {0} vs {1}")]
    FieldMismatch(FieldSpec, FieldSpec),
    #[error("{0} is not a prime below 2^31")]
    NotPrime(u64),
    #[error("cannot parse field spec `{0}` (expected \"GF(p)\" or \"Q\")")]
    BadFieldSpec(String),
    #[error("cannot parse scalar `{0}`")]
    BadScalar(String),
}

/// The ground field. Always discrete.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldSpec {
    Prime(u32),
    Rationals,
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl FieldSpec {
    /// GF(p), checking primality by trial division.
    pub fn prime(p: u64) -> Result<Self, FieldError> {
        if p >= MAX_PRIME || !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        Ok(FieldSpec::Prime(p as u32))
    }

    pub fn gf2() -> Self {
        FieldSpec::Prime(2)
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, FieldSpec::Prime(_))
    }

    pub fn characteristic(&self) -> u32 {
        match self {
            FieldSpec::Prime(p) => *p,
            FieldSpec::Rationals => 0,
        }
    }

    pub fn zero(&self) -> Scalar {
        self.from_i64(0)
    }

    pub fn one(&self) -> Scalar {
        self.from_i64(1)
    }

    pub fn from_i64(&self, v: i64) -> Scalar {
        match *self {
            FieldSpec::Prime(p) => Scalar::Prime {
                p,
                r: v.rem_euclid(p as i64) as u32,
            },
            FieldSpec::Rationals => Scalar::Rational(BigRational::from_integer(BigInt::from(v))),
        }
    }

    /// Parses `"3"`, `"-2"` or (over Q) `"3/4"`.
    pub fn parse_scalar(&self, s: &str) -> Result<Scalar, FieldError> {
        let bad = || FieldError::BadScalar(s.to_string());
        let t = s.trim();
        match *self {
            FieldSpec::Prime(_) => {
                let v: i64 = t.parse().map_err(|_| bad())?;
                Ok(self.from_i64(v))
            }
            FieldSpec::Rationals => {
                let (n, d) = match t.split_once('/') {
                    Some((n, d)) => (n.trim(), d.trim()),
                    None => (t, "1"),
                };
                let n: BigInt = n.parse().map_err(|_| bad())?;
                let d: BigInt = d.parse().map_err(|_| bad())?;
                if d.is_zero() {
                    return Err(FieldError::DivisionByZero);
                }
                Ok(Scalar::Rational(BigRational::new(n, d)))
            }
        }
    }

    /// All field elements, for finite fields only.
    pub fn elements(&self) -> Option<Vec<Scalar>> {
        match *self {
            FieldSpec::Prime(p) => Some((0..p).map(|r| Scalar::Prime { p, r }).collect()),
            FieldSpec::Rationals => None,
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Prime(p) => write!(f, "GF({p})"),
            FieldSpec::Rationals => write!(f, "Q"),
        }
    }
}

impl FromStr for FieldSpec {
    type Err = FieldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t == "Q" {
            return Ok(FieldSpec::Rationals);
        }
        let inner = t
            .strip_prefix("GF(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| FieldError::BadFieldSpec(s.to_string()))?;
        let p: u64 = inner
            .trim()
            .parse()
            .map_err(|_| FieldError::BadFieldSpec(s.to_string()))?;
        FieldSpec::prime(p)
    }
}

/// An element of a [`FieldSpec`]. Residues are reduced; rationals are in lowest terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Scalar {
    Prime { p: u32, r: u32 },
    Rational(BigRational),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Div,
}

pub(crate) fn inv_mod(r: u64, p: u64) -> u64 {
    // Fermat; p is prime and r != 0.
    let mut base = r % p;
    let mut e = p - 2;
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    acc
}

impl Scalar {
    pub fn field(&self) -> FieldSpec {
        match self {
            Scalar::Prime { p, .. } => FieldSpec::Prime(*p),
            Scalar::Rational(_) => FieldSpec::Rationals,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Prime { r, .. } => *r == 0,
            Scalar::Rational(q) => q.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Prime { r, .. } => *r == 1,
            Scalar::Rational(q) => q.is_one(),
        }
    }

    /// Checked arithmetic; the entry point for mixed-field inputs.
    pub fn arith(&self, other: &Scalar, op: FieldOp) -> Result<Scalar, FieldError> {
        if self.field() != other.field() {
            return Err(FieldError::FieldMismatch(self.field(), other.field()));
        }
        match (self, other) {
            (Scalar::Prime { p, r: a }, Scalar::Prime { r: b, .. }) => {
                let (p64, a, b) = (*p as u64, *a as u64, *b as u64);
                let r = match op {
                    FieldOp::Add => (a + b) % p64,
                    FieldOp::Sub => (a + p64 - b) % p64,
                    FieldOp::Mul => a * b % p64,
                    FieldOp::Div => {
                        if b == 0 {
                            return Err(FieldError::DivisionByZero);
                        }
                        a * inv_mod(b, p64) % p64
                    }
                };
                Ok(Scalar::Prime { p: *p, r: r as u32 })
            }
            (Scalar::Rational(a), Scalar::Rational(b)) => Ok(Scalar::Rational(match op {
                FieldOp::Add => a + b,
                FieldOp::Sub => a - b,
                FieldOp::Mul => a * b,
                FieldOp::Div => {
                    if b.is_zero() {
                        return Err(FieldError::DivisionByZero);
                    }
                    a / b
                }
            })),
            _ => unreachable!("fields already compared"),
        }
    }

    pub fn add(&self, o: &Scalar) -> Scalar {
        self.arith(o, FieldOp::Add).expect("scalar add")
    }

    pub fn sub(&self, o: &Scalar) -> Scalar {
        self.arith(o, FieldOp::Sub).expect("scalar sub")
    }

    pub fn mul(&self, o: &Scalar) -> Scalar {
        self.arith(o, FieldOp::Mul).expect("scalar mul")
    }

    pub fn neg(&self) -> Scalar {
        self.field().zero().sub(self)
    }

    pub fn inv(&self) -> Result<Scalar, FieldError> {
        self.field().one().arith(self, FieldOp::Div)
    }

    /// Residue for prime fields.
    pub fn residue(&self) -> Option<u32> {
        match self {
            Scalar::Prime { r, .. } => Some(*r),
            Scalar::Rational(_) => None,
        }
    }

    /// Canonical text form: residue, integer, or `n/d`.
    pub fn to_text(&self) -> String {
        match self {
            Scalar::Prime { r, .. } => r.to_string(),
            Scalar::Rational(q) => {
                if q.is_integer() {
                    q.numer().to_string()
                } else {
                    format!("{}/{}", q.numer(), q.denom())
                }
            }
        }
    }

    /// Integer view when representable in an i64 (prime residues always are).
    pub fn to_i64(&self) -> Option<i64> {
        match self {
            Scalar::Prime { r, .. } => Some(*r as i64),
            Scalar::Rational(q) if q.is_integer() => q.numer().to_i64(),
            Scalar::Rational(_) => None,
        }
    }

    pub(crate) fn rational(&self) -> &BigRational {
        match self {
            Scalar::Rational(q) => q,
            Scalar::Prime { .. } => panic!("not a rational scalar"),
        }
    }

    pub fn is_negative_rational(&self) -> bool {
        matches!(self, Scalar::Rational(q) if q.is_negative())
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(p: u64) -> FieldSpec {
        FieldSpec::prime(p).unwrap()
    }

    #[test]
    fn char_two_addition() {
        let f = gf(2);
        assert!(f.one().add(&f.one()).is_zero());
    }

    #[test]
    fn gf5_division_matches_multiplication_table() {
        let f = gf(5);
        let q = f.from_i64(2).arith(&f.from_i64(3), FieldOp::Div).unwrap();
        // exhaustive: the unique x with 3x = 2
        let xs: Vec<_> = f
            .elements()
            .unwrap()
            .into_iter()
            .filter(|x| x.mul(&f.from_i64(3)) == f.from_i64(2))
            .collect();
        assert_eq!(xs, vec![q.clone()]);
        assert_eq!(q, f.from_i64(4));
    }

    #[test]
    fn rational_sum() {
        let q = FieldSpec::Rationals;
        let a = q.parse_scalar("1/2").unwrap();
        let b = q.parse_scalar("1/3").unwrap();
        assert_eq!(a.add(&b), q.parse_scalar("5/6").unwrap());
        assert_eq!(a.add(&b).to_text(), "5/6");
        assert_eq!(q.parse_scalar("2/4").unwrap().to_text(), "1/2");
        assert_eq!(q.parse_scalar("0/7").unwrap(), q.zero());
    }

    #[test]
    fn errors() {
        let f = gf(5);
        assert_eq!(f.one().arith(&f.zero(), FieldOp::Div), Err(FieldError::DivisionByZero));
        let g = gf(3);
        assert!(matches!(
            f.one().arith(&g.one(), FieldOp::Add),
            Err(FieldError::FieldMismatch(_, _))
        ));
        assert!(FieldSpec::prime(4).is_err());
        assert!(FieldSpec::prime(1).is_err());
        assert!(FieldSpec::prime(2147483659).is_err());
        assert!(FieldSpec::Rationals.parse_scalar("1/0").is_err());
    }

    #[test]
    fn spec_strings() {
        assert_eq!("GF(7)".parse::<FieldSpec>().unwrap(), FieldSpec::Prime(7));
        assert_eq!("Q".parse::<FieldSpec>().unwrap(), FieldSpec::Rationals);
        assert!("GF(9)".parse::<FieldSpec>().is_err());
        assert!("F7".parse::<FieldSpec>().is_err());
        assert_eq!(FieldSpec::Prime(7).to_string(), "GF(7)");
        // near the cap: wide intermediates keep products exact
        let f = gf(2147483647);
        let a = f.from_i64(-1);
        assert!(a.mul(&a).is_one());
    }

    #[test]
    fn axioms_exhaustive_small_fields() {
        for p in [2u64, 3, 5] {
            let f = gf(p);
            let els = f.elements().unwrap();
            for a in &els {
                for b in &els {
                    assert_eq!(a.add(b), b.add(a));
                    assert_eq!(a.mul(b), b.mul(a));
                    for c in &els {
                        assert_eq!(a.add(b).add(c), a.add(&b.add(c)));
                        assert_eq!(a.mul(b).mul(c), a.mul(&b.mul(c)));
                        assert_eq!(a.mul(&b.add(c)), a.mul(b).add(&a.mul(c)));
                    }
                }
                assert!(a.add(&a.neg()).is_zero());
            }
        }
    }

    #[test]
    fn inverses_exhaustive_up_to_17() {
        for p in [2u64, 3, 5, 7, 11, 13, 17] {
            let f = gf(p);
            for a in f.elements().unwrap().into_iter().filter(|a| !a.is_zero()) {
                assert!(a.mul(&a.inv().unwrap()).is_one(), "p={p} a={a}");
            }
        }
    }
}
