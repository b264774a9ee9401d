//! Finitely founded and well-founded normal forms, and the reconstruction
//! of a term from a well-founded play-measure.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::CoreError;
use crate::normalforms::shallow::{head_weights, residual_request};
use crate::play::Play;
use crate::rational::Rational;
use crate::semantics::measure::{Inputs, MeasureView};
use crate::signature::Symbol;
use crate::term::{Children, Generator, Term};

const MAX_WF_DEPTH: usize = 256;

/// Heads in symbol order; a single head of weight 1 is not wrapped in a sum.
fn gather(heads: Vec<(Rational, Term)>) -> Term {
    match heads.as_slice() {
        [(w, t)] if w.is_one() => t.clone(),
        _ => Term::sum(heads.into_iter().map(|(w, t)| (w, Arc::new(t))).collect()),
    }
}

fn leaves(t: &Term, w: &Rational, out: &mut BTreeMap<Symbol, Vec<(Rational, Arc<Term>)>>) {
    if w.is_zero() {
        return;
    }
    match t {
        Term::Req { op, children: Children::Finite(cs) } => out.entry(op.clone()).or_default().push((w.clone(), Arc::new(Term::req(op.clone(), cs.clone())))),
        Term::Req { .. } => unreachable!("generator-free"),
        Term::Choice { p, left, right } => {
            leaves(left, &(w * p), out);
            leaves(right, &(w * (Rational::one() - p)), out);
        }
        Term::Sum { coeffs, branches, .. } => {
            for (p, b) in coeffs.explicit.iter().zip(branches) {
                leaves(b, &(w * p), out);
            }
        }
    }
}

fn ff_rec(t: &Term) -> Term {
    let mut groups = BTreeMap::new();
    leaves(t, &Rational::one(), &mut groups);
    let heads = groups
        .into_iter()
        .map(|(k, g)| {
            let total: Rational = g.iter().map(|(w, _)| w.clone()).sum();
            let arity = match &*g[0].1 {
                Term::Req { children, .. } => children.explicit().len(),
                _ => 0,
            };
            let children = (0..arity)
                .map(|i| {
                    let mix = Term::sum(
                        g.iter()
                            .map(|(w, r)| (w / &total, r.subterms()[i].clone()))
                            .collect(),
                    );
                    Arc::new(ff_rec(&mix))
                })
                .collect();
            (total, Term::req(k, children))
        })
        .collect();
    gather(heads)
}

/// The finitely founded normal form of a generator-free term.
pub fn ff_nf(t: &Term) -> Result<Term, CoreError> {
    if !t.is_generator_free() {
        return Err(CoreError::NotFinitelyFounded("the term contains generated sums or ω-ary requests".into()));
    }
    Ok(ff_rec(t))
}

fn undeclared_tail(t: &Term) -> bool {
    match t {
        Term::Req { children, .. } => children.explicit().iter().any(|c| undeclared_tail(c)),
        Term::Choice { left, right, .. } => undeclared_tail(left) || undeclared_tail(right),
        Term::Sum { branches, generator, .. } => {
            generator.as_ref().is_some_and(|g| g.depth_bound().is_none()) || branches.iter().any(|b| undeclared_tail(b))
        }
    }
}

fn wf_rec(t: &Arc<Term>, eps: &Rational, depth: usize) -> Result<Term, CoreError> {
    if t.is_generator_free() {
        return Ok(ff_rec(t));
    }
    if depth > MAX_WF_DEPTH {
        return Err(CoreError::NotWellFounded("recursion exceeded the depth guard".into()));
    }
    let mut heads = Vec::new();
    for (k, w) in head_weights(t, eps)? {
        let Term::Req { children, .. } = residual_request(t, &k, eps)? else { unreachable!() };
        let children = match children {
            Children::Finite(cs) => Children::Finite(
                cs.iter().map(|c| wf_rec(c, eps, depth + 1).map(Arc::new)).collect::<Result<_, _>>()?,
            ),
            Children::Omega { rest, .. } => {
                let e = eps.clone();
                Children::Omega {
                    explicit: Vec::new(),
                    rest: Generator::native("wf-child", None, move |i| {
                        Arc::new(wf_rec(&rest.get(i), &e, depth + 1).expect("well-founded child"))
                    }),
                }
            }
        };
        heads.push((w, Term::Req { op: k, children }));
    }
    Ok(gather(heads))
}

/// The well-founded normal form. Generated sums must declare a depth bound.
pub fn wf_nf(t: &Term, eps: &Rational) -> Result<Term, CoreError> {
    if undeclared_tail(t) {
        return Err(CoreError::NotWellFounded("a generated sum has no declared depth bound".into()));
    }
    wf_rec(&Arc::new(t.clone()), eps, 0)
}

fn exact(m: &MeasureView, s: &Play, eps: &Rational) -> Result<Rational, CoreError> {
    let v = m.value(s, eps)?;
    if !v.is_exact() {
        return Err(CoreError::InexactValues(format!("value at `{s}` is only known to lie in {v}")));
    }
    Ok(v.lo)
}

fn rebuild(m: &MeasureView, s: &Play, v: &Rational, depth: usize, max_depth: usize, eps: &Rational) -> Result<Term, CoreError> {
    if depth > max_depth {
        return Err(CoreError::NotWellFounded(format!("support continues past depth {max_depth} at `{s}`")));
    }
    let mut heads = Vec::new();
    let mut mass = Rational::zero();
    for k in m.next_outputs(s, eps) {
        let sk = s.with_output(k.clone());
        let w = exact(m, &sk, eps)?;
        if w.is_zero() {
            continue;
        }
        mass += &w;
        let children = match m.inputs(&sk, eps) {
            Some(Inputs::Finite(n)) => (0..n)
                .map(|i| rebuild(m, &sk.with_input(i), &w, depth + 1, max_depth, eps).map(Arc::new))
                .collect::<Result<_, _>>()?,
            Some(Inputs::Omega) => {
                return Err(CoreError::Unsupported(format!("ω-ary output {k} in reconstruction")))
            }
            None => Vec::new(),
        };
        heads.push((w / v, Term::req(k, children)));
    }
    if mass != *v {
        return Err(CoreError::NotWellFounded(format!("mass {} of {} escapes at `{s}`", v - &mass, v)));
    }
    Ok(gather(heads))
}

/// `(λ, t)` with `λ·⟦t⟧ = m`; the zero measure gives the empty sum.
pub fn measure_to_wfnf(m: &MeasureView, max_depth: usize, eps: &Rational) -> Result<(Rational, Term), CoreError> {
    let root = Play::empty();
    let w = exact(m, &root, eps)?;
    if w.is_zero() {
        return Ok((w, Term::empty()));
    }
    let t = rebuild(m, &root, &w, 0, max_depth, eps)?;
    Ok((w, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equivalence::proof::ff_normalize;
    use crate::equivalence::trace_equiv::exact_counterplay;
    use crate::rational::{pow2_neg, rat};
    use crate::semantics::measure::{measure_scale, measure_sub};
    use crate::syntax::parse_term;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn ff_agrees_with_the_rewriting_route() {
        for src in [
            "Happy(Bye, Bye +[1/2] Happy(Bye +[1/3] Happy(Bye, Bye), Bye))",
            "f(a, b) +[1/2] f(b, a)",
            "sum { 1/4 : f(a +[1/2] b); 1/2 : g; 1/4 : f(sum { 1/3 : a; 2/3 : c }) }",
        ] {
            let x = t(src);
            let nf = ff_nf(&x).unwrap();
            assert_eq!(nf, *ff_normalize(&x).unwrap().rhs, "{src}");
            assert_eq!(ff_nf(&nf).unwrap(), nf);
            assert_eq!(exact_counterplay(&x, &nf, 8).unwrap(), None);
        }
    }

    #[test]
    fn undeclared_depth_is_rejected() {
        let x = t("sum { tail(n >= 0): 1/2^(n+1) : iterate a n on c }");
        assert!(matches!(wf_nf(&x, &pow2_neg(20)), Err(CoreError::NotWellFounded(_))));
        assert!(matches!(ff_nf(&x), Err(CoreError::NotFinitelyFounded(_))));
    }

    #[test]
    fn wf_with_declared_depth() {
        let x = t("sum { tail(n >= 0, depth <= 2) : 1/2^(n+1) : a(c[n]) }");
        let e = pow2_neg(20);
        let nf = wf_nf(&x, &e);
        // infinitely many heads c[n] under a
        assert!(nf.is_ok(), "{nf:?}");
    }

    #[test]
    fn reconstruction() {
        let bye = MeasureView::of_term(&t("Bye"));
        let e = pow2_neg(20);
        assert_eq!(measure_to_wfnf(&bye, 8, &e).unwrap(), (rat(1, 1), t("Bye")));
        let (w, z) = measure_to_wfnf(&MeasureView::zero(), 8, &e).unwrap();
        assert!(w.is_zero() && z.is_empty_sum());
        let big = MeasureView::of_term(&t("f(a +[1/2] b) +[1/2] g"));
        let small = measure_scale(&MeasureView::of_term(&t("f(a)")), &rat(1, 4));
        let d = measure_sub(&big, &small);
        let (w, r) = measure_to_wfnf(&d, 8, &e).unwrap();
        assert_eq!(w, rat(3, 4));
        for p in ["f?0.a", "f?0.b", "g", "f"] {
            let p = Play::parse_loose(p).unwrap();
            let lhs = crate::semantics::eval::trace_value(&r, &p, &e).scale(&w);
            assert_eq!(lhs, d.value(&p, &e).unwrap(), "{p}");
        }
    }
}
