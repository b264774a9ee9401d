//! Splitting a well-founded part off a program: `M ≡ L +_p N`.

use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::CoreError;
use crate::normalforms::shallow::{head_weights, residual_request};
use crate::play::Play;
use crate::rational::Rational;
use crate::signature::Symbol;
use crate::term::{Children, Generator, Term};

fn children_of(t: &Term) -> Children {
    match t {
        Term::Req { children, .. } => children.clone(),
        _ => unreachable!("residual request"),
    }
}

fn rec(m: &Arc<Term>, l: &Arc<Term>, p: &Rational, at: &Play, eps: &Rational) -> Result<Term, CoreError> {
    let a = head_weights(m, eps)?;
    let b = head_weights(l, eps)?;
    let find = |k: &Symbol| a.iter().find(|(x, _)| x == k).map(|(_, w)| w.clone());
    for (k, bk) in &b {
        let ak = find(k).unwrap_or_else(Rational::zero);
        if p * bk > ak {
            return Err(CoreError::DominationFails(at.with_output(k.clone()).to_string()));
        }
    }
    let q = Rational::one() - p;
    let mut heads = Vec::new();
    for (k, ak) in &a {
        let mreq = residual_request(m, k, eps)?;
        let Some(bk) = b.iter().find(|(x, _)| x == k).map(|(_, w)| w.clone()) else {
            heads.push((ak / &q, mreq));
            continue;
        };
        let c = (ak - p * &bk) / &q;
        if c.is_zero() {
            continue;
        }
        let p2 = p * bk / ak;
        let lreq = residual_request(l, k, eps)?;
        let sk = at.with_output(k.clone());
        let children = match (children_of(&mreq), children_of(&lreq)) {
            (Children::Finite(mc), Children::Finite(lc)) => Children::Finite(
                mc.iter()
                    .zip(&lc)
                    .enumerate()
                    .map(|(i, (x, y))| rec(x, y, &p2, &sk.with_input(i as u64), eps).map(Arc::new))
                    .collect::<Result<_, _>>()?,
            ),
            (mc, lc) => {
                let e = eps.clone();
                Children::Omega {
                    explicit: Vec::new(),
                    rest: Generator::native("subsplit-child", None, move |i| {
                        let (x, y) = (mc.get(i).expect("child"), lc.get(i).expect("child"));
                        Arc::new(rec(&x, &y, &p2, &sk.with_input(i), &e).expect("domination on ω-ary children"))
                    }),
                }
            }
        };
        heads.push((c, Term::Req { op: k.clone(), children }));
    }
    Ok(match heads.as_slice() {
        [(w, t)] if w.is_one() => t.clone(),
        _ => Term::sum(heads.into_iter().map(|(w, t)| (w, Arc::new(t))).collect()),
    })
}

/// `N` with `M ≡ L +_p N`, for `p ∈ (0,1)` and `p·⟦L⟧ ≤ ⟦M⟧`.
pub fn subsplit(m: &Term, l: &Term, p: &Rational, eps: &Rational) -> Result<Term, CoreError> {
    if !crate::rational::is_open_probability(p) {
        return Err(CoreError::ProbabilityOutOfRange(p.to_string()));
    }
    rec(&Arc::new(m.clone()), &Arc::new(l.clone()), p, &Play::empty(), eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equivalence::trace_equiv::{exact_counterplay, trace_equiv};
    use crate::rational::{pow2_neg, rat};
    use crate::syntax::parse_term;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn identity_split() {
        let m = t("f(a +[1/3] b, c)");
        let n = subsplit(&m, &m, &rat(1, 3), &pow2_neg(20)).unwrap();
        assert_eq!(exact_counterplay(&m, &n, 6).unwrap(), None);
    }

    #[test]
    fn split_is_exact_on_finite_terms() {
        let m = t("f(a +[1/2] b) +[1/2] g");
        let l = t("f(a)");
        let p = rat(1, 4);
        let n = subsplit(&m, &l, &p, &pow2_neg(20)).unwrap();
        let recomposed = Term::choice(p, l, n);
        assert_eq!(exact_counterplay(&m, &recomposed, 6).unwrap(), None);
    }

    #[test]
    fn domination_failure() {
        let r = subsplit(&t("a(c)"), &t("b(c)"), &rat(1, 2), &pow2_neg(20));
        assert_eq!(r, Err(CoreError::DominationFails("b".into())));
        let r = subsplit(&t("a(c +[1/4] d)"), &t("a(c)"), &rat(1, 2), &pow2_neg(20));
        assert_eq!(r, Err(CoreError::DominationFails("a?0.c".into())));
    }

    #[test]
    fn generated_split() {
        let m = t("sum { tail(n >= 0) : 1/2^(n+1) : iterate k < n : star(a, _) on star(b, c) }");
        let l = t("star(a, c)");
        let e = pow2_neg(20);
        let n = subsplit(&m, &l, &rat(1, 4), &e).unwrap();
        let v = trace_equiv(&m, &Term::choice(rat(1, 4), l, n), 6, &e, 2).unwrap();
        assert!(v.is_equivalent(), "{v:?}");
    }
}
