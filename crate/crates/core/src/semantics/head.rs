//! The first step of a program: its distribution over outputs, and the
//! residual program after one output/input round.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::coeff::{CoeffFamily, FamilyTail};
use crate::error::CoreError;
use crate::play::{Play, PlayRef};
use crate::rational::Rational;
use crate::semantics::eval::{eval, next_outputs, stabilize};
use crate::semantics::interval::Interval;
use crate::signature::Symbol;
use crate::term::{Children, Generator, NativeGen, Term};

/// Probability of each candidate first output.
pub fn head_distribution(t: &Term, eps: &Rational) -> Vec<(Symbol, Interval)> {
    let mut cands = BTreeSet::new();
    next_outputs(t, Play::empty().as_ref(), eps, &mut cands);
    cands
        .into_iter()
        .map(|k| {
            let v = eval(t, Play::empty().with_output(k.clone()).as_ref(), eps);
            (k, v)
        })
        .filter(|(_, v)| !v.hi.is_zero())
        .collect()
}

/// The program that continues `t` after output `k` and input `i`:
/// `⟦t⟧(k.i.s) = P(k) · ⟦condition(t, k, i)⟧(s)`.
///
/// Exact whenever the head probabilities of all generated branches
/// stabilize; otherwise generator families are cut where their remaining
/// weight drops below `eps`.
pub fn condition(t: &Term, k: &Symbol, i: u64, eps: &Rational) -> Result<Term, CoreError> {
    match weighted(t, k, i, eps)? {
        Some((_, c)) => Ok(c),
        None => Err(CoreError::ZeroProbabilityHead(k.to_string())),
    }
}

/// `(P(k), conditioned term)`, or `None` when `k` has probability zero.
pub fn weighted(t: &Term, k: &Symbol, i: u64, eps: &Rational) -> Result<Option<(Rational, Term)>, CoreError> {
    match t {
        Term::Req { op, children } => {
            if op != k {
                return Ok(None);
            }
            let c = match children {
                Children::Finite(v) => v.get(i as usize).cloned(),
                Children::Omega { .. } => children.get(i),
            };
            match c {
                Some(c) => Ok(Some((Rational::one(), (*c).clone()))),
                None => Err(CoreError::InvalidInput(format!("{i} is not an input of {k}"))),
            }
        }
        Term::Choice { p, left, right } => {
            let l = weighted(left, k, i, eps)?;
            let r = weighted(right, k, i, eps)?;
            Ok(match (l, r) {
                (None, None) => None,
                (Some(x), None) => Some((p * x.0, x.1)),
                (None, Some(y)) => Some(((Rational::one() - p) * y.0, y.1)),
                (Some((wl, cl)), Some((wr, cr))) => {
                    let a = p * wl;
                    let b = (Rational::one() - p) * wr;
                    let w = &a + &b;
                    Some((w.clone(), Term::choice(a / w, cl, cr)))
                }
            })
        }
        Term::Sum { coeffs, branches, generator } => weighted_sum(coeffs, branches, generator.as_ref(), k, i, eps),
    }
}

fn weighted_sum(
    coeffs: &CoeffFamily,
    branches: &[Arc<Term>],
    generator: Option<&Generator>,
    k: &Symbol,
    i: u64,
    eps: &Rational,
) -> Result<Option<(Rational, Term)>, CoreError> {
    let mut kept: Vec<(Rational, Term)> = Vec::new();
    let push = |p: Rational, b: &Term, kept: &mut Vec<(Rational, Term)>| -> Result<(), CoreError> {
        if p.is_zero() {
            return Ok(());
        }
        if let Some((w, c)) = weighted(b, k, i, eps)? {
            if !w.is_zero() {
                kept.push((p * w, c));
            }
        }
        Ok(())
    };
    for (p, b) in coeffs.explicit.iter().zip(branches) {
        push(p.clone(), b, &mut kept)?;
    }
    let mut tail = None;
    if let Some(gen) = generator {
        let from = coeffs.explicit_len();
        let head = Play::empty().with_output(k.clone());
        match stabilize(gen, from, head.as_ref(), eps).filter(|(_, v)| v.is_exact()) {
            Some((n0, v)) => {
                for n in from..n0 {
                    push(coeffs.coeff(n), &gen.get(n), &mut kept)?;
                }
                if !v.lo.is_zero() {
                    tail = Some((n0, v.lo));
                }
            }
            None => {
                let m = coeffs.cut_index(from, eps);
                for n in from..m {
                    push(coeffs.coeff(n), &gen.get(n), &mut kept)?;
                }
            }
        }
    }
    let mut total: Rational = kept.iter().map(|(w, _)| w.clone()).sum();
    if let Some((n0, v)) = &tail {
        total += v * coeffs.tail(*n0);
    }
    if total.is_zero() {
        return Ok(None);
    }
    if tail.is_none() && kept.len() == 1 {
        let (_, c) = kept.pop().unwrap();
        return Ok(Some((total, c)));
    }
    let explicit: Vec<Rational> = kept.iter().map(|(w, _)| w / &total).collect();
    let branches: Vec<Arc<Term>> = kept.into_iter().map(|(_, c)| Arc::new(c)).collect();
    let (family, generator) = match (tail, &coeffs.tail, generator) {
        (Some((n0, v)), Some(ft), Some(gen)) => {
            let len = explicit.len() as u64;
            let pg = ft.pg.shift(n0 - len).scale(&(&v / &total));
            let depth = gen.depth_bound().map(|d| d.saturating_sub(1));
            let (g1, k1, e1) = (gen.clone(), k.clone(), eps.clone());
            let native = NativeGen::new("conditioned", depth, move |j| {
                let b = g1.get(j - len + n0);
                let (_, c) = weighted(&b, &k1, i, &e1)
                    .ok()
                    .flatten()
                    .expect("stabilized branch lost its head");
                Arc::new(c)
            });
            // Branch j is branch j - len + n0 of the source, conditioned on
            // a head of probability v: its values are the source's over v.
            let (g2, k2) = (gen.clone(), k.clone());
            let native = native.with_stabilizer(move |from, s: PlayRef<'_>, eps: &Rational| {
                let mut moves = vec![(k2.clone(), i)];
                moves.extend_from_slice(s.moves);
                let play = Play { moves, last: s.last.cloned() };
                let start = from.max(len) - len + n0;
                let (m, w) = stabilize(&g2, start, play.as_ref(), eps)?;
                Some((m - n0 + len, Interval { lo: &w.lo / &v, hi: &w.hi / &v }))
            });
            (CoeffFamily { explicit, tail: Some(FamilyTail { pg, offset: len }) }, Some(Generator::Native(native)))
        }
        _ => (CoeffFamily::finite(explicit), None),
    };
    Ok(Some((total, Term::Sum { coeffs: family, branches, generator })))
}

/// `⟦t⟧(k.i.s) / P(k)` style check used in tests: the value of `t` on the
/// play `k.i.s`.
pub fn value_after(t: &Term, k: &Symbol, i: u64, s: PlayRef<'_>, eps: &Rational) -> Interval {
    let mut moves = vec![(k.clone(), i)];
    moves.extend_from_slice(s.moves);
    let play = Play { moves, last: s.last.cloned() };
    eval(t, play.as_ref(), eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{pow2_neg, rat};
    use crate::syntax::parse_term;

    fn eps() -> Rational {
        pow2_neg(20)
    }

    #[test]
    fn heads_of_simple_terms() {
        let t = parse_term("Bye").unwrap();
        assert_eq!(head_distribution(&t, &eps()), vec![(Symbol::new("Bye"), Interval::one())]);
        let t = parse_term("a(c) +[1/2] b(c)").unwrap();
        let h = head_distribution(&t, &eps());
        assert_eq!(h.len(), 2);
        assert!(h.iter().all(|(_, v)| *v == Interval::exact(rat(1, 2))));
    }

    #[test]
    fn heads_of_not_well_founded_family() {
        let t = parse_term("sum { tail(n >= 0): 1/2^(n+1) : iterate a n on c }").unwrap();
        let h = head_distribution(&t, &eps());
        assert_eq!(
            h,
            vec![(Symbol::new("a"), Interval::exact(rat(1, 2))), (Symbol::new("c"), Interval::exact(rat(1, 2)))]
        );
    }

    #[test]
    fn condition_single_branch_and_zero() {
        let t = parse_term("Happy(M, N)").unwrap();
        assert_eq!(condition(&t, &Symbol::new("Happy"), 1, &eps()).unwrap().to_dsl(), "N");
        let bye = parse_term("Bye").unwrap();
        assert!(matches!(
            condition(&bye, &Symbol::new("Happy"), 0, &eps()),
            Err(CoreError::ZeroProbabilityHead(_))
        ));
    }

    #[test]
    fn condition_generated_family_matches_products() {
        let src = "sum { tail(n >= 0) : 1/2^(n+1) : iterate k < n : star(b, _) on star(a, c) }";
        let t = parse_term(src).unwrap();
        let star = Symbol::new("star");
        let c = condition(&t, &star, 1, &eps()).unwrap();
        // 1/2 · c + 1/4 · star(a, c) + 1/8 · star(b, star(a, c)) + …
        assert_eq!(c.branch(0).unwrap().to_dsl(), "c");
        assert_eq!(c.branch(1).unwrap().to_dsl(), "star(a, c)");
        for play in ["c", "star?0.a", "star?1.c", "star?1.star?0.b", "star?1.star?1.c"] {
            let p = Play::parse_loose(play).unwrap();
            let lhs = value_after(&t, &star, 1, p.as_ref(), &eps());
            let rhs = eval(&c, p.as_ref(), &eps());
            assert_eq!(lhs, rhs, "{play}");
            assert!(rhs.is_exact());
        }
    }
}
