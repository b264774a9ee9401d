//! Trace equivalence: compare the values of two play-measures on every
//! candidate play up to a depth.

use std::collections::BTreeSet;

use num_traits::Zero;

use crate::error::CoreError;
use crate::play::Play;
use crate::rational::Rational;
use crate::semantics::interval::Interval;
use crate::semantics::measure::{Inputs, MeasureView};
use crate::term::Term;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceVerdict {
    /// Certified disagreement on `play`.
    Distinguished { play: Play, left: Interval, right: Interval },
    /// No play with at most `depth` outputs separates the two by more than
    /// `eps`.
    EquivalentUpTo { depth: usize, eps: Rational, plays: usize },
}

impl TraceVerdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, TraceVerdict::EquivalentUpTo { .. })
    }
}

pub fn trace_equiv(t1: &Term, t2: &Term, depth: usize, eps: &Rational, omega_inputs: u64) -> Result<TraceVerdict, CoreError> {
    trace_equiv_measures(&MeasureView::of_term(t1), &MeasureView::of_term(t2), depth, eps, omega_inputs)
}

pub fn trace_equiv_measures(
    m1: &MeasureView,
    m2: &MeasureView,
    depth: usize,
    eps: &Rational,
    omega_inputs: u64,
) -> Result<TraceVerdict, CoreError> {
    let mut checked = 0;
    let mut frontier = vec![Play::empty()];
    let root = compare(m1, m2, &Play::empty(), eps)?;
    checked += 1;
    if let Some(v) = root {
        return Ok(v);
    }
    for _ in 0..depth {
        let mut next = Vec::new();
        for t in &frontier {
            let mut cands: BTreeSet<_> = m1.next_outputs(t, eps);
            cands.extend(m2.next_outputs(t, eps));
            for k in cands {
                let s = t.with_output(k);
                checked += 1;
                if let Some(v) = compare(m1, m2, &s, eps)? {
                    return Ok(v);
                }
                let a = m1.value(&s, eps)?;
                let b = m2.value(&s, eps)?;
                if a.hi.is_zero() && b.hi.is_zero() {
                    continue;
                }
                let n = match m1.inputs(&s, eps).or_else(|| m2.inputs(&s, eps)) {
                    Some(Inputs::Finite(n)) => n,
                    Some(Inputs::Omega) => omega_inputs,
                    None => 0,
                };
                next.extend((0..n).map(|i| s.with_input(i)));
            }
        }
        frontier = next;
    }
    Ok(TraceVerdict::EquivalentUpTo { depth, eps: eps.clone(), plays: checked })
}

fn compare(m1: &MeasureView, m2: &MeasureView, s: &Play, eps: &Rational) -> Result<Option<TraceVerdict>, CoreError> {
    let a = m1.value(s, eps)?;
    let b = m2.value(s, eps)?;
    Ok(a.disjoint(&b).then(|| TraceVerdict::Distinguished { play: s.clone(), left: a, right: b }))
}

/// Exact comparison for generator-free terms: the first play with differing
/// values, or `None`.
pub fn exact_counterplay(t1: &Term, t2: &Term, depth: usize) -> Result<Option<Play>, CoreError> {
    let eps = Rational::zero();
    match trace_equiv(t1, t2, depth, &eps, 0)? {
        TraceVerdict::Distinguished { play, .. } => Ok(Some(play)),
        TraceVerdict::EquivalentUpTo { .. } => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{pow2_neg, rat};
    use crate::syntax::parse_term;

    fn te(a: &str, b: &str) -> TraceVerdict {
        trace_equiv(&parse_term(a).unwrap(), &parse_term(b).unwrap(), 6, &pow2_neg(20), 4).unwrap()
    }

    #[test]
    fn late_choice_is_trace_equivalent() {
        assert!(te("f(a, b) +[1/2] f(b, a)", "f(a +[1/2] b, b +[1/2] a)").is_equivalent());
    }

    #[test]
    fn swapped_children_are_distinguished() {
        match te("Happy(A, B)", "Happy(B, A)") {
            TraceVerdict::Distinguished { play, left, right } => {
                assert_eq!(play.to_string(), "Happy?0.A");
                assert_eq!(left, Interval::one());
                assert_eq!(right, Interval::zero());
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn exact_route_for_finite_terms() {
        let a = parse_term("f(a +[1/3] b)").unwrap();
        let b = parse_term("f(a +[1/2] b)").unwrap();
        let p = exact_counterplay(&a, &b, 3).unwrap().unwrap();
        assert_eq!(p.to_string(), "f?0.a");
        assert_eq!(exact_counterplay(&a, &a, 3).unwrap(), None);
        let _ = rat(1, 2);
    }

    #[test]
    fn trace_examples_agree() {
        let m = "sum { tail(n >= 0) : 1/2^(n+1) : iterate k < n : star(b, _) on star(a, c) }";
        let n = "sum { tail(n >= 0) : 1/2^(n+1) : iterate k < n : star(a, _) on star(b, c) }";
        assert!(te(m, n).is_equivalent());
        assert!(!te(m, "star(a, c)").is_equivalent());
    }
}
