//! Shallow normal form: one sum over distinct heads, each a request whose
//! children are the conditioned residual programs.

use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::CoreError;
use crate::play::Play;
use crate::rational::Rational;
use crate::semantics::eval::eval;
use crate::semantics::head::{condition, head_distribution};
use crate::semantics::measure::{Inputs, MeasureView};
use crate::signature::Symbol;
use crate::term::{Children, Generator, Term};

/// Exact head probabilities. Where a head's value does not stabilize, its
/// certified lower bound is used and the list is renormalized.
pub fn head_weights(t: &Term, eps: &Rational) -> Result<Vec<(Symbol, Rational)>, CoreError> {
    let hs = head_distribution(t, eps);
    let mut out: Vec<(Symbol, Rational)> = Vec::new();
    for (k, v) in hs {
        let w = if v.is_exact() { v.lo } else { eval(t, Play::empty().with_output(k.clone()).as_ref(), &(eps / Rational::from_integer(1024.into()))).lo };
        if !w.is_zero() {
            out.push((k, w));
        }
    }
    let total: Rational = out.iter().map(|(_, w)| w.clone()).sum();
    if total.is_zero() {
        return Err(CoreError::Unsupported("no head with positive probability".into()));
    }
    if !total.is_one() {
        if crate::rational::rat(1, 1) - &total > *eps {
            return Err(CoreError::Unsupported("infinitely many heads".into()));
        }
        for (_, w) in &mut out {
            *w = &*w / &total;
        }
    }
    Ok(out)
}

/// Number of inputs of head `k` in `t`, read from the first matching request.
pub fn head_inputs(t: &Term, k: &Symbol, eps: &Rational) -> Inputs {
    MeasureView::of_term(t).inputs(&Play::empty().with_output(k.clone()), eps).unwrap_or(Inputs::Finite(0))
}

/// `Req k` with the conditioned children of `t` after head `k`.
pub fn residual_request(t: &Arc<Term>, k: &Symbol, eps: &Rational) -> Result<Term, CoreError> {
    let children = match head_inputs(t, k, eps) {
        Inputs::Finite(n) => Children::Finite(
            (0..n).map(|i| condition(t, k, i, eps).map(Arc::new)).collect::<Result<_, _>>()?,
        ),
        Inputs::Omega => {
            let (t, k, e) = (t.clone(), k.clone(), eps.clone());
            Children::Omega {
                explicit: Vec::new(),
                rest: Generator::native("conditioned", None, move |i| {
                    Arc::new(condition(&t, &k, i, &e).expect("head has positive probability"))
                }),
            }
        }
    };
    Ok(Term::Req { op: k.clone(), children })
}

pub fn shallow_nf(t: &Term, eps: &Rational) -> Result<Term, CoreError> {
    let t = Arc::new(t.clone());
    let mut entries = Vec::new();
    for (k, w) in head_weights(&t, eps)? {
        entries.push((w, Arc::new(residual_request(&t, &k, eps)?)));
    }
    Ok(Term::sum(entries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equivalence::trace_equiv::trace_equiv;
    use crate::rational::{pow2_neg, rat};
    use crate::syntax::parse_term;

    #[test]
    fn constant_becomes_singleton_sum() {
        let t = parse_term("Bye").unwrap();
        assert_eq!(shallow_nf(&t, &pow2_neg(20)).unwrap().to_dsl(), "sum { 1 : Bye; }");
    }

    #[test]
    fn heads_are_gathered() {
        let t = parse_term("a(c) +[1/2] (a(d) +[1/2] b(c))").unwrap();
        let s = shallow_nf(&t, &pow2_neg(20)).unwrap();
        let Term::Sum { coeffs, branches, .. } = &s else { panic!() };
        assert_eq!(coeffs.explicit, vec![rat(3, 4), rat(1, 4)]);
        assert_eq!(branches[1].to_dsl(), "b(c)");
        assert!(trace_equiv(&t, &s, 4, &pow2_neg(20), 2).unwrap().is_equivalent());
    }

    #[test]
    fn generated_family_keeps_its_trace() {
        let t = parse_term("sum { tail(n >= 0) : 1/2^(n+1) : iterate k < n : star(b, _) on star(a, c) }").unwrap();
        let s = shallow_nf(&t, &pow2_neg(20)).unwrap();
        let Term::Sum { coeffs, .. } = &s else { panic!() };
        assert_eq!(coeffs.explicit, vec![rat(1, 1)]);
        assert!(trace_equiv(&t, &s, 5, &pow2_neg(20), 2).unwrap().is_equivalent());
    }
}
