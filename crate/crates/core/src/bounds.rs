//! Height lower bounds and Betti upper bounds with explicit constants.
//!
//! Logarithms are base 2 and never rounded silently: [`log2`] returns a
//! dyadic bracket `[lo, hi]` around the true value, and every bound that
//! involves a logarithm is returned as the image of that bracket.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Pow, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::{format_rational, Rational};

/// Fractional bits of [`log2`] brackets by default; `2^-20 < 10^-6`.
pub const DEFAULT_LOG_BITS: u32 = 20;

/// A closed interval of rationals known to contain a real value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bracket {
    pub lo: Rational,
    pub hi: Rational,
}

impl Bracket {
    pub fn exact(v: Rational) -> Self {
        Self { lo: v.clone(), hi: v }
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / Rational::from_integer(BigInt::from(2))
    }

    /// `a·self + b` for `a ≥ 0`.
    pub fn affine(&self, a: &Rational, b: &Rational) -> Bracket {
        debug_assert!(!a.is_negative());
        Bracket {
            lo: a * &self.lo + b,
            hi: a * &self.hi + b,
        }
    }

    /// Rough decimal rendering, for reports only.
    pub fn approx(&self) -> f64 {
        let m = self.midpoint();
        let (n, d) = (m.numer().to_string(), m.denom().to_string());
        n.parse::<f64>().unwrap_or(f64::NAN) / d.parse::<f64>().unwrap_or(f64::NAN)
    }
}

impl Serialize for Bracket {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Bracket", 4)?;
        st.serialize_field("lo", &format_rational(&self.lo))?;
        st.serialize_field("hi", &format_rational(&self.hi))?;
        st.serialize_field("exact", &self.is_exact())?;
        st.serialize_field("approx", &self.approx())?;
        st.end()
    }
}

/// `log₂ x` bracketed to `bits` fractional bits; exact when `x` is a power
/// of two.
pub fn log2(x: &Rational, bits: u32) -> Result<Bracket> {
    if !x.is_positive() {
        return Err(Error::Domain("log2 needs a positive argument".into()));
    }
    let (num, den) = (x.numer().magnitude().clone(), x.denom().magnitude().clone());
    // k = floor(log2 x): start from the bit-length difference and correct by one.
    let mut k = num.bits() as i64 - den.bits() as i64;
    let two_k = |k: i64| -> Rational {
        let p = Rational::from_integer(BigInt::one() << k.unsigned_abs());
        if k >= 0 {
            p
        } else {
            Rational::one() / p
        }
    };
    if two_k(k) > *x {
        k -= 1;
    }
    let y = x / two_k(k);
    let int_part = Rational::from_integer(BigInt::from(k));
    if y.is_one() {
        return Ok(Bracket::exact(int_part));
    }
    // y in (1, 2) as fixed point with `frac` bits, once rounded down and once up
    let frac = bits as usize + 64;
    let scale = BigUint::one() << frac;
    let scaled = Rational::from_integer(BigInt::from(scale.clone())) * &y;
    let y_lo = scaled.floor().to_integer().magnitude().clone();
    let y_hi = scaled.ceil().to_integer().magnitude().clone();
    let lower = fraction_bits(y_lo, frac, bits, false);
    let upper = fraction_bits(y_hi, frac, bits, true) + BigUint::one();
    let denom = BigInt::one() << bits;
    let as_rat = |v: BigUint| Rational::new(BigInt::from(v), denom.clone());
    Ok(Bracket {
        lo: &int_part + as_rat(lower),
        hi: &int_part + as_rat(upper),
    })
}

/// Binary digits of `log₂(y / 2^frac)` by repeated squaring, rounding every
/// square in one direction so the digits bound the true ones from that side.
fn fraction_bits(mut y: BigUint, frac: usize, bits: u32, round_up: bool) -> BigUint {
    let two = BigUint::from(2u32) << frac;
    let mask = (BigUint::one() << frac) - BigUint::one();
    let mut out = BigUint::zero();
    for _ in 0..bits {
        let sq = &y * &y;
        let mut next = &sq >> frac;
        if round_up && !(&sq & &mask).is_zero() {
            next += BigUint::one();
        }
        out <<= 1;
        if next >= two {
            out += BigUint::one();
            let odd = !(&next % 2u32).is_zero();
            next >>= 1;
            if round_up && odd {
                next += BigUint::one();
            }
        }
        y = next;
    }
    out
}

/// The absolute constants `c_1, c_2` of the lower bounds, supplied by the caller.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundParams {
    pub c1: Rational,
    pub c2: Rational,
}

impl BoundParams {
    pub fn new(c1: Rational, c2: Rational) -> Result<Self> {
        if !c1.is_positive() || !c2.is_positive() {
            return Err(Error::Domain("bound constants must be positive".into()));
        }
        Ok(Self { c1, c2 })
    }
}

fn log_of_count(b: &BigUint) -> Result<Bracket> {
    if b.is_zero() {
        return Err(Error::Domain("Betti argument must be at least 1".into()));
    }
    log2(&Rational::from_integer(BigInt::from(b.clone())), DEFAULT_LOG_BITS)
}

fn r(n: usize) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `c_1·log₂(b) − c_2·n`.
pub fn yao_lower(b_bm: &BigUint, n: usize, p: &BoundParams) -> Result<Bracket> {
    Ok(log_of_count(b_bm)?.affine(&p.c1, &-(&p.c2 * r(n))))
}

/// `c_1·log₂(b_m)/(m+1) − c_2·n`.
pub fn main_lower(b_m: &BigUint, m: usize, n: usize, p: &BoundParams) -> Result<Bracket> {
    Ok(log_of_count(b_m)?.affine(&(&p.c1 / r(m + 1)), &-(&p.c2 * r(n))))
}

/// `c_1·log₂(b_m)/(m+1)² − c_2·n/(m+1)`.
pub fn proj_lower(b_m: &BigUint, m: usize, n: usize, p: &BoundParams) -> Result<Bracket> {
    let m1 = r(m + 1);
    Ok(log_of_count(b_m)?.affine(&(&p.c1 / (&m1 * &m1)), &-(&p.c2 * r(n) / &m1)))
}

/// `((C·s²d)^n, (C·(m+1)sd)^n)`.
pub fn total_betti_upper(s: usize, d: usize, n: usize, m: usize, c: &Rational) -> Result<(Rational, Rational)> {
    if s == 0 || d == 0 {
        return Err(Error::Domain("s and d must be at least 1".into()));
    }
    let first = c * r(s * s) * r(d);
    let second = c * r(m + 1) * r(s) * r(d);
    Ok((Pow::pow(first, n), Pow::pow(second, n)))
}

/// `C·n·((k·3^k)²·2^k)^n`, the counting bound for a height-`k` tree.
pub fn counting_bound(k: u32, n: usize, c: &Rational) -> Rational {
    let k3 = BigInt::from(k) * Pow::pow(BigInt::from(3u32), k);
    let base = &k3 * &k3 * (BigInt::one() << k as usize);
    c * r(n) * Rational::from_integer(Pow::pow(base, n))
}

/// Least `k ≥ 1` with `C·n·((k·3^k)²·2^k)^n ≥ b`.
pub fn invert_height_bound(b: &BigUint, n: usize, c: &Rational) -> Result<u32> {
    if b.is_zero() {
        return Err(Error::Domain("b must be at least 1".into()));
    }
    if n == 0 || !c.is_positive() {
        return Err(Error::Domain("n and C must be positive".into()));
    }
    let target = Rational::from_integer(BigInt::from(b.clone()));
    let mut k = 1;
    while counting_bound(k, n, c) < target {
        k += 1;
    }
    Ok(k)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProjectionCheck {
    pub m: usize,
    pub holds: bool,
    pub target: usize,
    /// `Σ_{p+q=m} b_q(W_p)`.
    pub sum: usize,
    pub slack: i64,
    /// `max(m,1)·max_{p≤m} b(W_p)`, when total Betti numbers are known.
    pub aggregate_bound: Option<usize>,
    pub aggregate_holds: Option<bool>,
    /// The aggregate factor `m` is replaced by 1 at `m = 0`.
    pub m_zero_adjusted: bool,
}

/// Checks `b_m(Y) ≤ Σ_{p+q=m} b_q(W_p)`. Row `p` of `betti_w` holds
/// `b_0(W_p), b_1(W_p), …`; rows must cover every `p ≤ m` to index `m − p`.
/// If `complete` is set, rows are full Betti vectors and the aggregate bound is
/// reported too.
pub fn projection_inequality_check(
    betti_w: &[Vec<usize>],
    target: usize,
    m: usize,
    complete: bool,
) -> Result<ProjectionCheck> {
    let mut sum = 0;
    for p in 0..=m {
        let q = m - p;
        let v = betti_w
            .get(p)
            .and_then(|row| row.get(q))
            .ok_or_else(|| Error::Domain(format!("Betti table lacks b_{q}(W_{p})")))?;
        sum += v;
    }
    let aggregate_bound = complete.then(|| {
        let best = betti_w.iter().take(m + 1).map(|row| row.iter().sum::<usize>()).max().unwrap_or(0);
        m.max(1) * best
    });
    Ok(ProjectionCheck {
        m,
        holds: target <= sum,
        target,
        sum,
        slack: sum as i64 - target as i64,
        aggregate_bound,
        aggregate_holds: aggregate_bound.map(|a| sum <= a),
        m_zero_adjusted: m == 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{int, rat};
    use proptest::prelude::*;

    fn ones() -> BoundParams {
        BoundParams::new(int(1), int(1)).unwrap()
    }

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn log2_brackets() {
        assert_eq!(log2(&int(4096), 20).unwrap(), Bracket::exact(int(12)));
        assert_eq!(log2(&rat(1, 8), 20).unwrap(), Bracket::exact(int(-3)));
        let b = log2(&int(3), 20).unwrap();
        assert!(b.width() <= rat(1, 1 << 19));
        // 2^lo ≤ 3 ≤ 2^hi checked via 1.5849625007...
        assert!(b.lo < rat(15_849_626, 10_000_000) && b.hi > rat(15_849_625, 10_000_000));
        assert!(log2(&int(0), 20).is_err());
    }

    #[test]
    fn yao_examples() {
        let p = BoundParams::new(int(1), int(2)).unwrap();
        assert_eq!(yao_lower(&big(1 << 12), 4, &p).unwrap(), Bracket::exact(int(4)));
        assert_eq!(yao_lower(&big(1), 4, &p).unwrap(), Bracket::exact(int(-8)));
        assert_eq!(yao_lower(&big(1 << 20), 10, &ones()).unwrap(), Bracket::exact(int(10)));
        assert!(yao_lower(&big(0), 1, &p).is_err());
    }

    #[test]
    fn main_and_projection_examples() {
        assert_eq!(main_lower(&big(16), 1, 1, &ones()).unwrap(), Bracket::exact(int(1)));
        assert_eq!(main_lower(&big(4), 1, 2, &ones()).unwrap(), Bracket::exact(int(-1)));
        assert_eq!(main_lower(&big(77), 0, 3, &ones()).unwrap(), yao_lower(&big(77), 3, &ones()).unwrap());
        assert_eq!(proj_lower(&big(256), 1, 2, &ones()).unwrap(), Bracket::exact(int(1)));
        assert_eq!(proj_lower(&big(1), 2, 3, &ones()).unwrap(), Bracket::exact(int(-1)));
        assert_eq!(proj_lower(&big(99), 0, 3, &ones()).unwrap(), main_lower(&big(99), 0, 3, &ones()).unwrap());
    }

    #[test]
    fn upper_bound_examples() {
        assert_eq!(total_betti_upper(2, 3, 2, 1, &int(1)).unwrap(), (int(144), int(144)));
        let (a, _) = total_betti_upper(2, 3, 2, 1, &int(2)).unwrap();
        assert_eq!(a, int(576));
    }

    #[test]
    fn inversion_examples() {
        assert_eq!(counting_bound(1, 2, &int(1)), int(648));
        assert_eq!(counting_bound(2, 2, &int(1)), int(3_359_232));
        assert_eq!(invert_height_bound(&big(1_000_000), 2, &int(1)).unwrap(), 2);
        assert_eq!(invert_height_bound(&big(1), 2, &int(1)).unwrap(), 1);
        assert_eq!(invert_height_bound(&big(6), 3, &int(1)).unwrap(), 1);
    }

    #[test]
    fn projection_checks() {
        let c = projection_inequality_check(&[vec![1]], 1, 0, false).unwrap();
        assert!(c.holds && c.slack == 0 && c.m_zero_adjusted);
        let c = projection_inequality_check(&[vec![1, 1], vec![1, 3]], 0, 1, true).unwrap();
        assert!(c.holds);
        assert_eq!((c.sum, c.slack, c.aggregate_bound), (2, 2, Some(4)));
        assert!(!projection_inequality_check(&[vec![1, 0], vec![0]], 5, 1, false).unwrap().holds);
        assert!(projection_inequality_check(&[vec![1, 1]], 0, 1, false).is_err());
    }

    proptest! {
        #[test]
        fn log2_bracket_contains_the_value(n in 1u64..1_000_000, d in 1u64..1000) {
            let x = Rational::new(BigInt::from(n), BigInt::from(d));
            let b = log2(&x, 16).unwrap();
            prop_assert!(b.width() <= rat(1, 1 << 15));
            let truth = (n as f64).log2() - (d as f64).log2();
            prop_assert!(Bracket::exact(b.lo.clone()).approx() <= truth + 1e-9);
            prop_assert!(Bracket::exact(b.hi.clone()).approx() >= truth - 1e-9);
        }

        #[test]
        fn inversion_is_tight_and_monotone(a in 1u64..10_000_000_000, extra in 0u64..1000, n in 1usize..4) {
            let c = int(1);
            let k = invert_height_bound(&big(a), n, &c).unwrap();
            prop_assert!(counting_bound(k, n, &c) >= Rational::from_integer(BigInt::from(a)));
            if k > 1 {
                prop_assert!(counting_bound(k - 1, n, &c) < Rational::from_integer(BigInt::from(a)));
            }
            prop_assert!(invert_height_bound(&big(a + extra), n, &c).unwrap() >= k);
        }

        #[test]
        fn lower_bounds_are_monotone(a in 1u64..1_000_000, extra in 1u64..1000, m in 0usize..4, n in 1usize..6) {
            let p = ones();
            let (x, y) = (big(a), big(a + extra));
            prop_assert!(main_lower(&y, m, n, &p).unwrap().hi >= main_lower(&x, m, n, &p).unwrap().lo);
            prop_assert!(proj_lower(&y, m, n, &p).unwrap().hi >= proj_lower(&x, m, n, &p).unwrap().lo);
            prop_assert!(yao_lower(&x, n + 1, &p).unwrap().hi < yao_lower(&x, n, &p).unwrap().hi);
        }
    }
}
