//! Exact rational helpers. Every probability in the crate is a [`Rational`].

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `2^{-k}`.
pub fn pow2_neg(k: u64) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << (k as usize))
}

pub fn pow(base: &Rational, exp: i64) -> Rational {
    if exp >= 0 {
        num_traits::pow(base.clone(), exp as usize)
    } else {
        num_traits::pow(base.recip(), (-exp) as usize)
    }
}

pub fn is_probability(p: &Rational) -> bool {
    !p.is_negative() && *p <= Rational::one()
}

/// Strictly between 0 and 1.
pub fn is_open_probability(p: &Rational) -> bool {
    p.is_positive() && *p < Rational::one()
}

/// Parses `a/b`, `a` or a decimal such as `0.25`.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    if let Some((whole, frac)) = text.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let digits: BigInt = format!("{whole}{frac}").parse().ok()?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        return Some(Rational::new(digits, scale));
    }
    text.parse::<BigInt>().ok().map(Rational::from_integer)
}

/// Always `a/b`, the wire format used in JSON output.
pub fn to_wire(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// `a` for integers, `a/b` otherwise; the DSL form.
pub fn to_dsl(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Largest `2^{-j}` with `j <= max_exp` that is `<= x`, if any.
pub fn dyadic_floor(x: &Rational, max_exp: u32) -> Option<(u32, Rational)> {
    (0..=max_exp).map(|j| (j, pow2_neg(j as u64))).find(|(_, d)| d <= x)
}

pub fn min(a: &Rational, b: &Rational) -> Rational {
    if a <= b {
        a.clone()
    } else {
        b.clone()
    }
}

pub fn max(a: &Rational, b: &Rational) -> Rational {
    if a >= b {
        a.clone()
    } else {
        b.clone()
    }
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("2/4"), Some(rat(1, 2)));
        assert_eq!(parse_rational("3"), Some(int(3)));
        assert_eq!(parse_rational("0.25"), Some(rat(1, 4)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
    }

    #[test]
    fn wire_format_is_always_a_over_b() {
        assert_eq!(to_wire(&int(1)), "1/1");
        assert_eq!(to_wire(&rat(2, 12)), "1/6");
        assert_eq!(to_dsl(&int(1)), "1");
    }

    #[test]
    fn dyadic_floor_picks_largest() {
        assert_eq!(dyadic_floor(&rat(3, 8), 24).unwrap().0, 2);
        assert!(dyadic_floor(&zero(), 24).is_none());
    }
}
