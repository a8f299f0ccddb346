//! Exact sparse multivariate polynomials over the rationals.
//!
//! Terms are kept in a `BTreeMap` keyed by dense exponent vectors, so two
//! polynomials are equal exactly when their term maps are equal and iteration
//! order (and therefore serialization) is deterministic.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{check_arity, Error, Result};

pub type Rational = BigRational;

/// Parses `"p/q"` or `"p"` with decimal integers. No floating point forms.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not an exact rational: {s:?}"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(Rational::new(num, den))
}

/// Canonical text form: lowest terms, positive denominator, always `p/q`.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Comma separated list of exact rationals, e.g. `"1,3/2,-4"`.
pub fn parse_rational_list(s: &str) -> Result<Vec<Rational>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(parse_rational).collect()
}

/// Serde adapter for rationals as `"p/q"` strings.
pub mod rational_str {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Polynomial {
    arity: usize,
    terms: BTreeMap<Vec<u32>, Rational>,
}

/// One term in the file format: `{"coef": "p/q", "exps": [e1, ..., en]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermRecord {
    #[serde(with = "rational_str")]
    pub coef: Rational,
    pub exps: Vec<u32>,
}

impl Polynomial {
    pub fn zero(arity: usize) -> Self {
        Self {
            arity,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(arity: usize, c: Rational) -> Self {
        let mut p = Self::zero(arity);
        if !c.is_zero() {
            p.terms.insert(vec![0; arity], c);
        }
        p
    }

    /// The variable with 0-based index `i`.
    pub fn var(arity: usize, i: usize) -> Self {
        assert!(i < arity, "variable index {i} out of range for arity {arity}");
        let mut exps = vec![0; arity];
        exps[i] = 1;
        let mut p = Self::zero(arity);
        p.terms.insert(exps, Rational::one());
        p
    }

    /// Builds from `(coefficient, exponents)` pairs, merging duplicates and
    /// dropping zero coefficients.
    pub fn from_terms<I>(arity: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Rational, Vec<u32>)>,
    {
        let mut p = Self::zero(arity);
        for (c, e) in terms {
            check_arity(arity, e.len())?;
            p.add_term(e, c);
        }
        Ok(p)
    }

    /// Sum of squares `x_1^2 + ... + x_n^2`.
    pub fn norm_squared(arity: usize) -> Self {
        let mut p = Self::zero(arity);
        for i in 0..arity {
            let mut exps = vec![0; arity];
            exps[i] = 2;
            p.terms.insert(exps, Rational::one());
        }
        p
    }

    fn add_term(&mut self, exps: Vec<u32>, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &Rational)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), c))
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    /// Exact ring operation; fails on arity mismatch.
    pub fn arith(op: ArithOp, p: &Polynomial, q: &Polynomial) -> Result<Polynomial> {
        check_arity(p.arity, q.arity)?;
        Ok(match op {
            ArithOp::Add => p.add_impl(q, false),
            ArithOp::Sub => p.add_impl(q, true),
            ArithOp::Mul => p.mul_impl(q),
        })
    }

    fn add_impl(&self, other: &Polynomial, negate: bool) -> Polynomial {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            let c = if negate { -c.clone() } else { c.clone() };
            out.add_term(e.clone(), c);
        }
        out
    }

    fn mul_impl(&self, other: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero(self.arity);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.arity);
        }
        Polynomial {
            arity: self.arity,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    pub fn square(&self) -> Polynomial {
        self.mul_impl(self)
    }

    /// `self + c` for a rational constant.
    pub fn add_constant(&self, c: &Rational) -> Polynomial {
        let mut out = self.clone();
        out.add_term(vec![0; self.arity], c.clone());
        out
    }

    /// Exact value at `x`.
    pub fn eval(&self, x: &[Rational]) -> Result<Rational> {
        check_arity(self.arity, x.len())?;
        let mut acc = Rational::zero();
        // powers[i][k] = x_i^k, grown lazily
        let mut powers: Vec<Vec<Rational>> = x.iter().map(|v| vec![Rational::one(), v.clone()]).collect();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let pw = &mut powers[i];
                while pw.len() <= k as usize {
                    let next = pw.last().unwrap() * &x[i];
                    pw.push(next);
                }
                term *= &pw[k as usize];
            }
            acc += term;
        }
        Ok(acc)
    }

    /// Substitutes variable `i` by variable `map[i]` of a polynomial ring
    /// with `new_arity` variables.
    pub fn remap(&self, new_arity: usize, map: &[usize]) -> Result<Polynomial> {
        check_arity(self.arity, map.len())?;
        if let Some(&bad) = map.iter().find(|&&j| j >= new_arity) {
            return Err(Error::Domain(format!(
                "variable target {bad} out of range for arity {new_arity}"
            )));
        }
        let mut out = Polynomial::zero(new_arity);
        for (e, c) in &self.terms {
            let mut ne = vec![0; new_arity];
            for (i, &k) in e.iter().enumerate() {
                ne[map[i]] += k;
            }
            out.add_term(ne, c.clone());
        }
        Ok(out)
    }

    pub fn to_records(&self) -> Vec<TermRecord> {
        self.terms
            .iter()
            .map(|(e, c)| TermRecord {
                coef: c.clone(),
                exps: e.clone(),
            })
            .collect()
    }

    pub fn from_records(arity: usize, records: &[TermRecord]) -> Result<Polynomial> {
        Self::from_terms(arity, records.iter().map(|r| (r.coef.clone(), r.exps.clone())))
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;

    /// Panics on arity mismatch; use [`Polynomial::arith`] for checked use.
    fn add(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.arity, rhs.arity, "polynomial arity mismatch");
        self.add_impl(rhs, false)
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.arity, rhs.arity, "polynomial arity mismatch");
        self.add_impl(rhs, true)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.arity, rhs.arity, "polynomial arity mismatch");
        self.mul_impl(rhs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;

    fn neg(self) -> Polynomial {
        Polynomial {
            arity: self.arity,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c.clone())).collect(),
        }
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // highest degree first reads more naturally
        for (k, (e, c)) in self.terms.iter().rev().enumerate() {
            let (neg, mag) = if c.is_negative() { (true, -c.clone()) } else { (false, c.clone()) };
            match (k, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let monomial: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0)
                .map(|(i, &p)| if p == 1 { format!("x{}", i + 1) } else { format!("x{}^{}", i + 1, p) })
                .collect();
            if monomial.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{}", monomial.join("*"))?;
            } else {
                write!(f, "{}*{}", mag, monomial.join("*"))?;
            }
        }
        Ok(())
    }
}

/// Sign evaluator for points whose coordinates are integers over a common
/// denominator `D`, i.e. `x = y / D`.
///
/// The polynomial is cleared of denominators and homogenized against `D`, so
/// the sign is read off an integer expression. Evaluation tries `i128` first
/// and falls back to big integers on overflow; the answer is always exact.
#[derive(Clone, Debug)]
pub struct ScaledSign {
    terms: Vec<(Vec<u32>, BigInt)>,
    small: Option<Vec<i128>>,
}

impl ScaledSign {
    pub fn new(p: &Polynomial, denom: &BigInt) -> Self {
        let lcd = p
            .terms
            .values()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let deg = p.total_degree();
        let terms: Vec<(Vec<u32>, BigInt)> = p
            .terms
            .iter()
            .map(|(e, c)| {
                let scaled = c.numer() * (&lcd / c.denom());
                let shift = deg - e.iter().sum::<u32>();
                (e.clone(), scaled * num_traits::pow(denom.clone(), shift as usize))
            })
            .collect();
        let small = terms.iter().map(|(_, c)| c.to_i128()).collect::<Option<Vec<_>>>();
        Self { terms, small }
    }

    pub fn sign(&self, y: &[i64]) -> Ordering {
        if let Some(small) = &self.small {
            if let Some(v) = self.eval_small(small, y) {
                return v.cmp(&0);
            }
        }
        self.eval_big(y).sign_cmp()
    }

    fn eval_small(&self, coefs: &[i128], y: &[i64]) -> Option<i128> {
        let mut acc: i128 = 0;
        for ((e, _), &c) in self.terms.iter().zip(coefs) {
            let mut term = c;
            for (i, &k) in e.iter().enumerate() {
                let base = y[i] as i128;
                for _ in 0..k {
                    term = term.checked_mul(base)?;
                }
            }
            acc = acc.checked_add(term)?;
        }
        Some(acc)
    }

    fn eval_big(&self, y: &[i64]) -> BigInt {
        let mut acc = BigInt::zero();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    term *= num_traits::pow(BigInt::from(y[i]), k as usize);
                }
            }
            acc += term;
        }
        acc
    }
}

trait SignCmp {
    fn sign_cmp(&self) -> Ordering;
}

impl SignCmp for BigInt {
    fn sign_cmp(&self) -> Ordering {
        self.cmp(&BigInt::zero())
    }
}
