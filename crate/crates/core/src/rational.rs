//! Exact rational parameters (`K`, `ε`) and the integer helpers used to compare
//! them without rounding.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Parses `"7/4"`, `"3"` or a finite decimal such as `"2.8"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let err = |reason: &str| Error::Parse {
        input: s.to_string(),
        reason: reason.to_string(),
    };
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| err("bad numerator"))?;
        let d: BigInt = d.trim().parse().map_err(|_| err("bad denominator"))?;
        if d.is_zero() {
            return Err(err("zero denominator"));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((ip, fp)) = t.split_once('.') {
        if fp.is_empty() || !fp.chars().all(|c| c.is_ascii_digit()) {
            return Err(err("bad decimal"));
        }
        let neg = ip.starts_with('-');
        let ip_abs = ip.trim_start_matches(['-', '+']);
        let whole: BigInt = if ip_abs.is_empty() {
            BigInt::zero()
        } else {
            ip_abs.parse().map_err(|_| err("bad integer part"))?
        };
        let frac: BigInt = fp.parse().map_err(|_| err("bad fraction"))?;
        let scale = num_traits::pow(BigInt::from(10), fp.len());
        let v = Rational::new(whole * &scale + frac, scale);
        return Ok(if neg { -v } else { v });
    }
    let n: BigInt = t.parse().map_err(|_| err("not a number"))?;
    Ok(Rational::from_integer(n))
}

pub fn int(n: impl Into<BigInt>) -> Rational {
    Rational::from_integer(n.into())
}

pub fn ratio(n: impl Into<BigInt>, d: impl Into<BigInt>) -> Rational {
    Rational::new(n.into(), d.into())
}

pub fn pow(k: &Rational, e: u32) -> Rational {
    num_traits::pow(k.clone(), e as usize)
}

/// `⌊r⌋` for nonnegative rationals, as `u128` (saturating).
pub fn floor_u128(r: &Rational) -> u128 {
    if r.is_negative() {
        return 0;
    }
    r.floor().to_integer().to_u128().unwrap_or(u128::MAX)
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Renders `p/q`, or just `p` for integers.
pub fn display(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Smallest rational `p/q` with `q ≤ max_den` and `p/q ≥ sqrt(num/den)`.
///
/// Walks the Stern-Brocot tree with batched steps; every comparison is the
/// integer test `p²·den ≥ q²·num`.
pub fn smallest_rational_at_least_sqrt(num: &BigUint, den: &BigUint, max_den: &BigUint) -> Rational {
    assert!(!den.is_zero(), "zero denominator");
    let max_den = if max_den.is_zero() { BigUint::one() } else { max_den.clone() };
    let ge = |p: &BigUint, q: &BigUint| p * p * den >= q * q * num;

    // The largest f with f²·den ≤ num is ⌊isqrt(num·den)/den⌋.
    let f = (num * den).sqrt() / den;
    if ge(&f, &BigUint::one()) {
        return Rational::from_integer(BigInt::from(f));
    }

    // Invariant: lo < x ≤ hi, both with denominator ≤ max_den.
    let (mut lp, mut lq) = (f.clone(), BigUint::one());
    let (mut hp, mut hq) = (f + 1u32, BigUint::one());
    loop {
        let mq = &lq + &hq;
        if mq > max_den {
            break;
        }
        let mp = &lp + &hp;
        if ge(&mp, &mq) {
            // Move hi toward lo: hi + k·lo stays ≥ x for k up to some bound.
            let kmax = (&max_den - &hq) / &lq;
            let k = largest_k(&kmax, |k| ge(&(&hp + k * &lp), &(&hq + k * &lq)));
            hp = &hp + &k * &lp;
            hq = &hq + &k * &lq;
        } else {
            let kmax = (&max_den - &lq) / &hq;
            let k = largest_k(&kmax, |k| !ge(&(&lp + k * &hp), &(&lq + k * &hq)));
            lp = &lp + &k * &hp;
            lq = &lq + &k * &hq;
        }
    }
    Rational::new(BigInt::from(hp), BigInt::from(hq))
}

/// Largest `k ∈ [1, kmax]` with `ok(k)`, given `ok` is monotone and `ok(1)` holds.
fn largest_k(kmax: &BigUint, ok: impl Fn(&BigUint) -> bool) -> BigUint {
    let (mut lo, mut hi) = (BigUint::one(), kmax.clone());
    while lo < hi {
        let mid: BigUint = (&lo + &hi + 1u32) >> 1;
        if ok(&mid) {
            lo = mid;
        } else {
            hi = mid - 1u32;
        }
    }
    lo
}

/// Smallest rational `≥ sqrt(num/den)` with denominator `≤ max_den`, never below one.
pub fn infer_k(num: &BigUint, den: &BigUint, max_den: &BigUint) -> Rational {
    let k = smallest_rational_at_least_sqrt(num, den, max_den);
    if k < Rational::one() {
        Rational::one()
    } else {
        k
    }
}

/// Integer ceiling of `a/b`.
pub fn ceil_div(a: u128, b: u128) -> u128 {
    a.div_ceil(b)
}

/// `gcd` reexported for callers that reduce fractions by hand.
pub fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}
