//! Coefficient families: an explicit prefix followed by an optional
//! polynomial-times-geometric tail whose partial sums have closed forms.

use num_integer::binomial;
use num_traits::{One, Signed, Zero};

use crate::error::CoreError;
use crate::rational::{int, pow, Rational};

/// `poly(n) · ratio^n`, with `poly` given by coefficients of `n^0, n^1, ...`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolyGeo {
    pub poly: Vec<Rational>,
    pub ratio: Rational,
}

impl PolyGeo {
    pub fn new(poly: Vec<Rational>, ratio: Rational) -> Self {
        let mut pg = PolyGeo { poly, ratio };
        while pg.poly.len() > 1 && pg.poly.last().is_some_and(Zero::is_zero) {
            pg.poly.pop();
        }
        pg
    }

    /// `scale · ratio^n`.
    pub fn geometric(scale: Rational, ratio: Rational) -> Self {
        PolyGeo::new(vec![scale], ratio)
    }

    pub fn poly_at(&self, n: u64) -> Rational {
        let x = int(n as i64);
        let mut acc = Rational::zero();
        for c in self.poly.iter().rev() {
            acc = acc * &x + c;
        }
        acc
    }

    pub fn eval(&self, n: u64) -> Rational {
        self.poly_at(n) * pow(&self.ratio, n as i64)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        PolyGeo::new(self.poly.iter().map(|x| x * c).collect(), self.ratio.clone())
    }

    /// `n ↦ self(n + s)`, again of the form `poly'(n) · ratio^n`.
    pub fn shift(&self, s: u64) -> Self {
        let deg = self.poly.len();
        let mut out = vec![Rational::zero(); deg];
        let sr = int(s as i64);
        for (k, ck) in self.poly.iter().enumerate() {
            // (n + s)^k = Σ_j C(k, j) s^{k-j} n^j
            for (j, slot) in out.iter_mut().enumerate().take(k + 1) {
                *slot += ck * int(binomial(k as i64, j as i64)) * pow(&sr, (k - j) as i64);
            }
        }
        let rs = pow(&self.ratio, s as i64);
        PolyGeo::new(out.into_iter().map(|c| c * &rs).collect(), self.ratio.clone())
    }

    /// `Σ_{n ≥ 0} n^j r^n` for `j = 0..=deg`.
    fn moment_sums(&self) -> Vec<Rational> {
        let r = &self.ratio;
        let one_minus = Rational::one() - r;
        let mut a: Vec<Rational> = vec![one_minus.recip()];
        for j in 1..self.poly.len() {
            let mut acc = Rational::zero();
            for (i, ai) in a.iter().enumerate() {
                acc += int(binomial(j as i64, i as i64)) * ai;
            }
            a.push(r * acc / &one_minus);
        }
        a
    }

    /// Closed form of `Σ_{n ≥ m} poly(n) · ratio^n`.
    pub fn tail_from(&self, m: u64) -> Rational {
        let a = self.moment_sums();
        let mm = int(m as i64);
        let mut total = Rational::zero();
        for (k, ck) in self.poly.iter().enumerate() {
            if ck.is_zero() {
                continue;
            }
            // Σ_{n≥0} (n+m)^k r^n = Σ_j C(k,j) m^{k-j} A_j
            let mut s = Rational::zero();
            for (j, aj) in a.iter().enumerate().take(k + 1) {
                s += int(binomial(k as i64, j as i64)) * pow(&mm, (k - j) as i64) * aj;
            }
            total += ck * s;
        }
        total * pow(&self.ratio, m as i64)
    }

    /// Checks `poly(n) > 0` for every `n ≥ from`, using a Cauchy root bound.
    fn check_positive_from(&self, from: u64) -> Result<(), CoreError> {
        let lead = self.poly.last().cloned().unwrap_or_else(Rational::zero);
        if !lead.is_positive() {
            return Err(CoreError::BadFamily("tail polynomial must have positive leading coefficient".into()));
        }
        let bound = self
            .poly
            .iter()
            .map(|c| (c / &lead).abs())
            .fold(Rational::zero(), |a, b| if b > a { b } else { a })
            + Rational::one();
        let bound = bound.ceil().to_integer();
        let bound: u64 = bound.try_into().unwrap_or(u64::MAX);
        let upto = bound.max(from);
        if upto - from > 100_000 {
            return Err(CoreError::BadFamily("tail polynomial positivity bound too large".into()));
        }
        for n in from..=upto {
            if !self.poly_at(n).is_positive() {
                return Err(CoreError::BadFamily(format!("tail coefficient at index {n} is not positive")));
            }
        }
        Ok(())
    }
}

/// The tail of a family: `pg(n)` for every `n ≥ offset`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FamilyTail {
    pub pg: PolyGeo,
    pub offset: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CoeffFamily {
    pub explicit: Vec<Rational>,
    pub tail: Option<FamilyTail>,
}

impl CoeffFamily {
    pub fn finite(explicit: Vec<Rational>) -> Self {
        CoeffFamily { explicit, tail: None }
    }

    /// Explicit prefix followed by `pg(n)` from index `explicit.len()` on.
    pub fn with_tail(explicit: Vec<Rational>, pg: PolyGeo) -> Self {
        let offset = explicit.len() as u64;
        CoeffFamily { explicit, tail: Some(FamilyTail { pg, offset }) }
    }

    /// `Σ 2^{-n-1}` over all n.
    pub fn dyadic() -> Self {
        let half = Rational::new(1.into(), 2.into());
        CoeffFamily::with_tail(Vec::new(), PolyGeo::geometric(half.clone(), half))
    }

    pub fn is_infinite(&self) -> bool {
        self.tail.is_some()
    }

    pub fn explicit_len(&self) -> u64 {
        self.explicit.len() as u64
    }

    pub fn coeff(&self, n: u64) -> Rational {
        if let Some(c) = self.explicit.get(n as usize) {
            return c.clone();
        }
        match &self.tail {
            Some(t) if n >= t.offset => t.pg.eval(n),
            _ => Rational::zero(),
        }
    }

    /// `Σ_{n ≥ m}` of all coefficients of the family.
    pub fn tail(&self, m: u64) -> Rational {
        let mut s: Rational = self.explicit.iter().skip(m as usize).sum();
        if let Some(t) = &self.tail {
            s += t.pg.tail_from(m.max(t.offset));
        }
        s
    }

    pub fn total(&self) -> Rational {
        self.tail(0)
    }

    /// Smallest index `m ≥ from` with `tail(m) ≤ bound`.
    pub fn cut_index(&self, from: u64, bound: &Rational) -> u64 {
        let mut m = from;
        loop {
            if self.tail(m) <= *bound {
                return m;
            }
            m += 1;
        }
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        if let Some(c) = self.explicit.iter().find(|c| c.is_negative()) {
            return Err(CoreError::ProbabilityOutOfRange(format!("negative coefficient {c}")));
        }
        if let Some(t) = &self.tail {
            if t.offset != self.explicit_len() {
                return Err(CoreError::BadFamily("tail offset must equal the explicit prefix length".into()));
            }
            if !(t.pg.ratio.is_positive() && t.pg.ratio < Rational::one()) {
                return Err(CoreError::BadFamily("tail ratio must lie in (0,1)".into()));
            }
            t.pg.check_positive_from(t.offset)?;
        }
        let total = self.total();
        if !total.is_one() {
            return Err(CoreError::WeightNotOne(total.to_string()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{pow2_neg, rat};

    fn halves() -> CoeffFamily {
        CoeffFamily::with_tail(vec![], PolyGeo::geometric(rat(1, 2), rat(1, 2)))
    }

    /// Partial-sum oracle: the exact tail must dominate every long partial sum
    /// and the gap must equal the remaining closed-form tail.
    fn partial(f: &CoeffFamily, m: u64, upto: u64) -> Rational {
        (m..upto).map(|n| f.coeff(n)).sum()
    }

    #[test]
    fn geometric_tail_values() {
        let f = halves();
        assert_eq!(f.tail(0), rat(1, 1));
        assert_eq!(f.tail(3), rat(1, 8));
        assert_eq!(partial(&f, 3, 40) + f.tail(40), f.tail(3));
        assert_eq!(f.tail(40), pow2_neg(40));
        f.validate().unwrap();
    }

    #[test]
    fn explicit_only_family() {
        let f = CoeffFamily::finite(vec![rat(1, 2), rat(1, 2)]);
        assert_eq!(f.tail(2), rat(0, 1));
        assert_eq!(f.tail(0), rat(1, 1));
        f.validate().unwrap();
        let bad = CoeffFamily::finite(vec![rat(1, 2), rat(1, 4)]);
        assert!(matches!(bad.validate(), Err(CoreError::WeightNotOne(_))));
    }

    #[test]
    fn polynomial_tail_matches_partial_sums() {
        // (n+1) / 4 · (1/2)^n sums to 1 over n ≥ 0.
        let f = CoeffFamily::with_tail(vec![], PolyGeo::new(vec![rat(1, 4), rat(1, 4)], rat(1, 2)));
        f.validate().unwrap();
        for m in 0..10 {
            let gap = f.tail(m) - partial(&f, m, 200) - f.tail(200);
            assert!(gap.is_zero(), "m = {m}");
        }
    }

    #[test]
    fn shift_and_scale() {
        let pg = PolyGeo::new(vec![rat(1, 4), rat(1, 4)], rat(1, 2));
        let sh = pg.shift(3);
        for n in 0..8 {
            assert_eq!(sh.eval(n), pg.eval(n + 3));
        }
        assert_eq!(pg.scale(&rat(2, 1)).tail_from(0), rat(2, 1));
    }

    #[test]
    fn rejects_ratio_one_and_negative_tail() {
        let f = CoeffFamily::with_tail(vec![], PolyGeo::geometric(rat(1, 2), rat(1, 1)));
        assert!(f.validate().is_err());
        let g = CoeffFamily::with_tail(vec![], PolyGeo::new(vec![rat(1, 1), rat(-1, 1)], rat(1, 2)));
        assert!(g.validate().is_err());
    }
}
