//! Exact rational scalars and the few numeric helpers the rest of the crate
//! needs. Floating point is deliberately absent from this crate.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rat = BigRational;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum NumError {
    #[error("malformed rational literal `{0}`")]
    BadLiteral(String),
    #[error("denominator is zero in `{0}`")]
    ZeroDenominator(String),
    #[error("negative value not allowed here: {0}")]
    Negative(String),
    #[error("evaluation exceeds the configured size budget")]
    Overflow,
}

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"p"`, `"p/q"`, or `"2^k"` (power-of-two shorthand) into a rational.
pub fn parse_rat(s: &str) -> Result<Rat, NumError> {
    let t = s.trim();
    if let Some((base, exp)) = t.split_once('^') {
        let b: BigInt = base
            .trim()
            .parse()
            .map_err(|_| NumError::BadLiteral(s.to_string()))?;
        let e: u32 = exp
            .trim()
            .parse()
            .map_err(|_| NumError::BadLiteral(s.to_string()))?;
        return Ok(Rat::from_integer(b.pow(e)));
    }
    if let Some((num, den)) = t.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| NumError::BadLiteral(s.to_string()))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| NumError::BadLiteral(s.to_string()))?;
        if d.is_zero() {
            return Err(NumError::ZeroDenominator(s.to_string()));
        }
        Ok(Rat::new(n, d))
    } else {
        let n: BigInt = t
            .parse()
            .map_err(|_| NumError::BadLiteral(s.to_string()))?;
        Ok(Rat::from_integer(n))
    }
}

/// Renders a rational as `"p"` or `"p/q"`, the wire format used everywhere.
pub fn rat_string(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Smallest integer `>= r`.
pub fn ceil_int(r: &Rat) -> BigInt {
    r.ceil().to_integer()
}

/// Raises a rational to a non-negative integer power, refusing results whose
/// representation would blow past `bit_budget` bits.
pub fn pow_checked(base: &Rat, exp: &BigInt, bit_budget: u64) -> Result<Rat, NumError> {
    if exp.is_negative() {
        return Err(NumError::Negative(format!("exponent {exp}")));
    }
    let e = exp.to_u64().ok_or(NumError::Overflow)?;
    let base_bits = base.numer().bits().max(base.denom().bits()).max(1);
    if base_bits.saturating_mul(e) > bit_budget {
        return Err(NumError::Overflow);
    }
    let e32 = u32::try_from(e).map_err(|_| NumError::Overflow)?;
    Ok(Rat::new(base.numer().pow(e32), base.denom().pow(e32)))
}

/// Number of bits of `n`, with `bits(0) = 0`.
pub fn bit_length(n: &BigUint) -> u64 {
    n.bits()
}

/// Smallest integer `m` with `m^2 >= n`; `n` must be non-negative.
pub fn sqrt_ceil(n: &Rat) -> Result<BigInt, NumError> {
    if n.is_negative() {
        return Err(NumError::Negative(rat_string(n)));
    }
    let int = ceil_int(n);
    let (_, mag) = int.into_parts();
    let root = mag.sqrt();
    let root_int = BigInt::from_biguint(Sign::Plus, root.clone());
    if BigInt::from_biguint(Sign::Plus, root.clone() * root) >= ceil_int(n) {
        Ok(root_int)
    } else {
        Ok(root_int + 1)
    }
}

/// Deterministic sample grid inside `[lo, hi]`: `count` points mixing an
/// arithmetic ramp with a geometric ramp so both ends get coverage.
pub fn sample_grid(lo: &Rat, hi: &Rat, count: usize) -> Vec<Rat> {
    assert!(lo <= hi, "empty grid interval");
    let mut pts = Vec::with_capacity(count + 8);
    pts.push(lo.clone());
    pts.push(hi.clone());
    let span = hi - lo;
    let half = count / 2;
    for i in 1..=half {
        let t = Rat::new(BigInt::from(i as i64), BigInt::from(half as i64 + 1));
        pts.push(lo + &span * &t);
    }
    // geometric part: lo + span / 2^k
    let mut step = span.clone();
    let two = rat(2);
    for _ in 0..(count - half) {
        step /= &two;
        if step.is_zero() {
            break;
        }
        pts.push(lo + &step);
    }
    pts.sort();
    pts.dedup();
    pts
}

pub fn gcd_int(a: &BigInt, b: &BigInt) -> BigInt {
    a.gcd(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_render_round_trip() {
        for s in ["5", "-3", "7/2", "0", "2^10"] {
            let r = parse_rat(s).unwrap();
            let back = parse_rat(&rat_string(&r)).unwrap();
            assert_eq!(r, back);
        }
        assert_eq!(parse_rat("2^10").unwrap(), rat(1024));
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("abc").is_err());
    }

    #[test]
    fn pow_respects_budget() {
        let two = rat(2);
        assert_eq!(
            pow_checked(&two, &BigInt::from(10), 1 << 20).unwrap(),
            rat(1024)
        );
        assert_eq!(
            pow_checked(&two, &BigInt::from(1u64 << 40), 1 << 20),
            Err(NumError::Overflow)
        );
    }

    #[test]
    fn sqrt_ceil_is_tight() {
        assert_eq!(sqrt_ceil(&rat(16)).unwrap(), BigInt::from(4));
        assert_eq!(sqrt_ceil(&rat(17)).unwrap(), BigInt::from(5));
        assert_eq!(sqrt_ceil(&ratio(9, 2)).unwrap(), BigInt::from(3));
    }

    #[test]
    fn grid_spans_both_ends() {
        let g = sample_grid(&rat(0), &rat(1 << 20), 64);
        assert_eq!(g.first().unwrap(), &rat(0));
        assert_eq!(g.last().unwrap(), &rat(1 << 20));
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }
}
