//! Play-measures assembled from terms by scaling, addition and subtraction.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use num_traits::{One, Zero};

use crate::error::CoreError;
use crate::play::Play;
use crate::rational::Rational;
use crate::semantics::eval::{eval, next_outputs};
use crate::semantics::interval::Interval;
use crate::signature::Symbol;
use crate::term::{Children, Term};

#[derive(Debug)]
pub enum Source {
    Term { term: Arc<Term>, scale: Rational },
    Zero,
    SumOf(Vec<MeasureView>),
    Scaled(Rational, MeasureView),
    Diff(MeasureView, MeasureView),
}

/// A queryable play-measure. Clones share the value cache.
#[derive(Clone, Debug)]
pub struct MeasureView {
    src: Arc<Source>,
    cache: Arc<Mutex<HashMap<(Play, Rational), Interval>>>,
}

/// Inputs available after a passive-ending play.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Inputs {
    Finite(u64),
    Omega,
}

impl MeasureView {
    fn from_source(src: Source) -> Self {
        MeasureView { src: Arc::new(src), cache: Arc::new(Mutex::new(HashMap::new())) }
    }

    pub fn of_term(t: &Term) -> Self {
        Self::scaled_term(Arc::new(t.clone()), Rational::one())
    }

    pub fn scaled_term(term: Arc<Term>, scale: Rational) -> Self {
        Self::from_source(Source::Term { term, scale })
    }

    pub fn zero() -> Self {
        Self::from_source(Source::Zero)
    }

    pub fn source(&self) -> &Source {
        &self.src
    }

    /// The underlying term and scale for term-backed measures.
    pub fn as_term(&self) -> Option<(&Arc<Term>, &Rational)> {
        match &*self.src {
            Source::Term { term, scale } => Some((term, scale)),
            _ => None,
        }
    }

    pub fn weight(&self) -> Rational {
        match &*self.src {
            Source::Term { term, scale } => {
                if term.is_empty_sum() {
                    Rational::zero()
                } else {
                    scale.clone()
                }
            }
            Source::Zero => Rational::zero(),
            Source::SumOf(ms) => ms.iter().map(MeasureView::weight).sum(),
            Source::Scaled(b, m) => b * m.weight(),
            Source::Diff(a, b) => a.weight() - b.weight(),
        }
    }

    /// Value on `s`, with width at most `eps`.
    pub fn value(&self, s: &Play, eps: &Rational) -> Result<Interval, CoreError> {
        let key = (s.clone(), eps.clone());
        if let Some(v) = self.cache.lock().unwrap().get(&key) {
            return Ok(v.clone());
        }
        let v = self.compute(s, eps)?;
        self.cache.lock().unwrap().insert(key, v.clone());
        Ok(v)
    }

    fn compute(&self, s: &Play, eps: &Rational) -> Result<Interval, CoreError> {
        Ok(match &*self.src {
            Source::Term { term, scale } => eval(term, s.as_ref(), &(eps / crate::rational::max(scale, &Rational::one()))).scale(scale),
            Source::Zero => Interval::zero(),
            Source::SumOf(ms) => {
                let n = Rational::from_integer((ms.len().max(1) as i64).into());
                let e = eps / n;
                let mut acc = Interval::zero();
                for m in ms {
                    acc = acc + m.value(s, &e)?;
                }
                acc
            }
            Source::Scaled(b, m) => m.value(s, eps)?.scale(b),
            Source::Diff(a, b) => {
                let half = eps / Rational::from_integer(2.into());
                let d = a.value(s, &half)?.sub(&b.value(s, &half)?);
                if d.hi < Rational::zero() {
                    return Err(CoreError::SubtractionUnderflow(s.to_string()));
                }
                d.clamp_lo()
            }
        })
    }

    /// Candidate outputs after the active-ending play `s`.
    pub fn next_outputs(&self, s: &Play, eps: &Rational) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_outputs(s, eps, &mut out);
        out
    }

    fn collect_outputs(&self, s: &Play, eps: &Rational, out: &mut BTreeSet<Symbol>) {
        match &*self.src {
            Source::Term { term, .. } => next_outputs(term, s.as_ref(), eps, out),
            Source::Zero => {}
            Source::SumOf(ms) => ms.iter().for_each(|m| m.collect_outputs(s, eps, out)),
            Source::Scaled(_, m) => m.collect_outputs(s, eps, out),
            Source::Diff(a, _) => a.collect_outputs(s, eps, out),
        }
    }

    /// Inputs after the passive-ending play `s`, read off the first request
    /// node reached.
    pub fn inputs(&self, s: &Play, eps: &Rational) -> Option<Inputs> {
        match &*self.src {
            Source::Term { term, .. } => inputs_in(term, s, eps),
            Source::Zero => None,
            Source::SumOf(ms) => ms.iter().find_map(|m| m.inputs(s, eps)),
            Source::Scaled(_, m) => m.inputs(s, eps),
            Source::Diff(a, _) => a.inputs(s, eps),
        }
    }
}

fn inputs_in(t: &Term, s: &Play, eps: &Rational) -> Option<Inputs> {
    let last = s.last.as_ref()?;
    // Walk down the term along the completed rounds, then look for `last`.
    fn find(t: &Term, moves: &[(Symbol, u64)], last: &Symbol, eps: &Rational) -> Option<Inputs> {
        match t {
            Term::Req { op, children } => match moves.split_first() {
                None => (op == last).then_some(match children {
                    Children::Finite(v) => Inputs::Finite(v.len() as u64),
                    Children::Omega { .. } => Inputs::Omega,
                }),
                Some(((k, i), rest)) => {
                    if op != k {
                        return None;
                    }
                    let c = children.get(*i)?;
                    find(&c, rest, last, eps)
                }
            },
            Term::Choice { left, right, .. } => find(left, moves, last, eps).or_else(|| find(right, moves, last, eps)),
            Term::Sum { coeffs, branches, generator } => {
                for b in branches {
                    if let Some(x) = find(b, moves, last, eps) {
                        return Some(x);
                    }
                }
                let gen = generator.as_ref()?;
                let from = coeffs.explicit_len();
                let m = coeffs.cut_index(from, eps).max(from + 1);
                (from..m).find_map(|n| find(&gen.get(n), moves, last, eps))
            }
        }
    }
    find(t, &s.moves, last, eps)
}

pub fn measure_add(ms: Vec<MeasureView>) -> MeasureView {
    MeasureView::from_source(Source::SumOf(ms))
}

pub fn measure_scale(m: &MeasureView, b: &Rational) -> MeasureView {
    match m.as_term() {
        Some((t, s)) => MeasureView::scaled_term(t.clone(), s * b),
        None => MeasureView::from_source(Source::Scaled(b.clone(), m.clone())),
    }
}

/// `m1 − m2`; queries fail with `SubtractionUnderflow` where `m2 > m1` is
/// certified.
pub fn measure_sub(m1: &MeasureView, m2: &MeasureView) -> MeasureView {
    MeasureView::from_source(Source::Diff(m1.clone(), m2.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{pow2_neg, rat};
    use crate::syntax::parse_term;

    #[test]
    fn weight_algebra() {
        let t = parse_term("a(c) +[1/3] b").unwrap();
        let m = MeasureView::of_term(&t);
        let half = measure_scale(&m, &rat(1, 2));
        assert_eq!(half.weight(), rat(1, 2));
        let sum = measure_add(vec![m.clone(), half.clone()]);
        assert_eq!(sum.weight(), rat(3, 2));
        let d = measure_sub(&m, &m);
        let p = Play::parse_loose("a?0.c").unwrap();
        assert_eq!(d.value(&p, &pow2_neg(20)).unwrap(), Interval::zero());
        assert_eq!(d.weight(), rat(0, 1));
    }

    #[test]
    fn underflow_is_reported() {
        let a = MeasureView::of_term(&parse_term("a").unwrap());
        let b = MeasureView::of_term(&parse_term("b").unwrap());
        let d = measure_sub(&a, &b);
        assert!(matches!(
            d.value(&Play::parse_loose("b").unwrap(), &pow2_neg(10)),
            Err(CoreError::SubtractionUnderflow(_))
        ));
    }

    #[test]
    fn inputs_are_read_from_requests() {
        let t = parse_term("Happy(Bye, Age(Bye; n => Bye))").unwrap();
        let m = MeasureView::of_term(&t);
        let e = pow2_neg(10);
        assert_eq!(m.inputs(&Play::parse_loose("Happy").unwrap(), &e), Some(Inputs::Finite(2)));
        assert_eq!(m.inputs(&Play::parse_loose("Happy?1.Age").unwrap(), &e), Some(Inputs::Omega));
    }
}
