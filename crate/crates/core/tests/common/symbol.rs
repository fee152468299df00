//! Entropy from the right-hand symbol `P(z) = Σ_j F_j z^j`.
//!
//! Independent of the engines: the discrete part of `V` is, up to finitely many
//! levels, `z·K[z]^d` with `φ` acting as multiplication by `P(z)` followed by
//! truncation, and `ent(φ)` is the `K[t]`-rank of that module. For a
//! Laurent-polynomial matrix that rank is the sum of the positive `z`-degrees
//! of the eigenvalues of `P(z)`, i.e. the largest `z`-degree among the
//! coefficients of `det(T - P(z))`, the sums of principal minors.

use std::collections::BTreeMap;

use llc_entropy::field::{FieldSpec, Scalar};
use llc_entropy::operator::{BandedOperator, Side};

#[derive(Clone, Debug)]
pub struct Laurent {
    field: FieldSpec,
    terms: BTreeMap<i64, Scalar>,
}

impl Laurent {
    pub fn zero(field: FieldSpec) -> Self {
        Laurent {
            field,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(field: FieldSpec) -> Self {
        let mut p = Self::zero(field);
        p.terms.insert(0, field.one());
        p
    }

    fn add_term(&mut self, e: i64, s: &Scalar) {
        let v = self.terms.get(&e).cloned().unwrap_or_else(|| self.field.zero()).add(s);
        if v.is_zero() {
            self.terms.remove(&e);
        } else {
            self.terms.insert(e, v);
        }
    }

    pub fn add(&self, o: &Laurent) -> Laurent {
        let mut r = self.clone();
        for (e, s) in &o.terms {
            r.add_term(*e, s);
        }
        r
    }

    pub fn neg(&self) -> Laurent {
        let mut r = Laurent::zero(self.field);
        for (e, s) in &self.terms {
            r.add_term(*e, &s.neg());
        }
        r
    }

    pub fn mul(&self, o: &Laurent) -> Laurent {
        let mut r = Laurent::zero(self.field);
        for (e1, s1) in &self.terms {
            for (e2, s2) in &o.terms {
                r.add_term(e1 + e2, &s1.mul(s2));
            }
        }
        r
    }

    pub fn degree(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }
}

fn det(m: &[Vec<Laurent>], field: FieldSpec) -> Laurent {
    let n = m.len();
    if n == 0 {
        return Laurent::one(field);
    }
    // Laplace expansion along the first row.
    let mut acc = Laurent::zero(field);
    for c in 0..n {
        let minor: Vec<Vec<Laurent>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(j, _)| *j != c)
                    .map(|(_, x)| x.clone())
                    .collect()
            })
            .collect();
        let term = m[0][c].mul(&det(&minor, field));
        acc = if c % 2 == 0 {
            acc.add(&term)
        } else {
            acc.add(&term.neg())
        };
    }
    acc
}

pub fn symbol(op: &BandedOperator) -> Vec<Vec<Laurent>> {
    let field = op.profile().field();
    let d = op.profile().d_right();
    let w = op.width() as i64;
    let mut p = vec![vec![Laurent::zero(field); d]; d];
    for j in -w..=w {
        let b = op.block(Side::Right, j);
        for r in 0..d {
            for c in 0..d {
                p[r][c].add_term(j, b.get(r, c));
            }
        }
    }
    p
}

pub fn symbol_entropy(op: &BandedOperator) -> u64 {
    let field = op.profile().field();
    let p = symbol(op);
    let d = p.len();
    let mut best = 0i64;
    for k in 1..=d {
        let mut e_k = Laurent::zero(field);
        for mask in 1u32..(1 << d) {
            if mask.count_ones() as usize != k {
                continue;
            }
            let idx: Vec<usize> = (0..d).filter(|i| mask & (1 << i) != 0).collect();
            let sub: Vec<Vec<Laurent>> = idx
                .iter()
                .map(|&r| idx.iter().map(|&c| p[r][c].clone()).collect())
                .collect();
            e_k = e_k.add(&det(&sub, field));
        }
        if let Some(deg) = e_k.degree() {
            best = best.max(deg);
        }
    }
    best as u64
}
