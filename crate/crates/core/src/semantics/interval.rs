use std::fmt;
use std::ops::Add;

use num_traits::{One, Zero};

use crate::rational::{max, min, to_wire, Rational};

/// A closed interval `[lo, hi]` of rationals. Exact values have `lo == hi`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        debug_assert!(lo <= hi, "empty interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn exact(v: Rational) -> Self {
        Interval { lo: v.clone(), hi: v }
    }

    pub fn zero() -> Self {
        Interval::exact(Rational::zero())
    }

    pub fn one() -> Self {
        Interval::exact(Rational::one())
    }

    /// `[0, hi]`.
    pub fn upto(hi: Rational) -> Self {
        Interval { lo: Rational::zero(), hi }
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn value(&self) -> Option<&Rational> {
        self.is_exact().then_some(&self.lo)
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn scale(&self, p: &Rational) -> Self {
        Interval { lo: &self.lo * p, hi: &self.hi * p }
    }

    pub fn sub(&self, other: &Interval) -> Self {
        Interval { lo: &self.lo - &other.hi, hi: &self.hi - &other.lo }
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.lo <= *x && *x <= self.hi
    }

    pub fn disjoint(&self, other: &Interval) -> bool {
        self.hi < other.lo || other.hi < self.lo
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = max(&self.lo, &other.lo);
        let hi = min(&self.hi, &other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn clamp_lo(mut self) -> Self {
        if self.lo < Rational::zero() {
            self.lo = Rational::zero();
        }
        self
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, o: Interval) -> Interval {
        Interval { lo: self.lo + o.lo, hi: self.hi + o.hi }
    }
}

impl<'a> Add<&'a Interval> for Interval {
    type Output = Interval;
    fn add(self, o: &'a Interval) -> Interval {
        Interval { lo: self.lo + &o.lo, hi: self.hi + &o.hi }
    }
}

impl std::iter::Sum for Interval {
    fn sum<I: Iterator<Item = Interval>>(iter: I) -> Interval {
        iter.fold(Interval::zero(), |a, b| a + b)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_exact() {
            write!(f, "{}", to_wire(&self.lo))
        } else {
            write!(f, "[{}, {}]", to_wire(&self.lo), to_wire(&self.hi))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn arithmetic() {
        let a = Interval::new(rat(1, 4), rat(1, 2));
        let b = Interval::exact(rat(1, 4));
        assert_eq!(a.clone() + b.clone(), Interval::new(rat(1, 2), rat(3, 4)));
        assert_eq!(a.sub(&b), Interval::new(rat(0, 1), rat(1, 4)));
        assert!(!a.disjoint(&b));
        assert!(Interval::exact(rat(1, 8)).disjoint(&b));
        assert_eq!(a.scale(&rat(1, 2)).width(), rat(1, 8));
    }
}
