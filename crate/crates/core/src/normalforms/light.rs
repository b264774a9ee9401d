//! Light normal form `Σ_n 2^{-n-1} · M_n` with sum-free components.

use std::sync::Arc;

use num_traits::Zero;

use crate::normalforms::family::{comb, dyadic_sum, Components, Lazy, Regather};
use crate::rational::{pow2_neg, Rational};
use crate::term::{Children, Generator, Term};

fn branches_sum_free(t: &Term) -> bool {
    match t {
        Term::Sum { branches, generator, .. } => {
            branches.iter().all(|b| b.is_sum_free())
                && match generator {
                    None => true,
                    Some(Generator::Template { body, .. }) => body.is_sum_free(),
                    Some(Generator::Native(_)) => false,
                }
        }
        _ => false,
    }
}

/// Entry `j` of a sum: its coefficient and branch (zero past a finite end).
pub fn entry(t: &Term, j: u64) -> (Rational, Arc<Term>) {
    match t {
        Term::Sum { coeffs, .. } => {
            let p = coeffs.coeff(j);
            if p.is_zero() {
                return (p, Arc::new(Term::empty()));
            }
            (p, t.branch(j).expect("positive coefficient has a branch"))
        }
        _ => unreachable!("entry of a non-sum"),
    }
}

/// `β_r = Σ_{j≤r} p_j 2^{j-r-1}` and the pieces of `N_r`.
pub fn diagonal(t: &Term, r: u64, comps: &dyn Fn(u64) -> Components) -> (Rational, Vec<(Rational, Arc<Term>)>) {
    let mut pieces = Vec::new();
    for j in 0..=r {
        let (p, _) = entry(t, j);
        if p.is_zero() {
            continue;
        }
        let w = p * pow2_neg(r - j + 1);
        pieces.push((w, comps(j).get(r - j)));
    }
    let beta = pieces.iter().map(|(w, _)| w.clone()).sum();
    (beta, pieces)
}

/// Components of the light normal form of `t`.
pub fn light_components(t: &Arc<Term>) -> Components {
    if t.is_sum_free() {
        let t = t.clone();
        return Lazy::new(move |_| t.clone());
    }
    match &**t {
        Term::Req { op, children: Children::Finite(cs) } => {
            let kids: Vec<Components> = cs.iter().map(light_components).collect();
            let op = op.clone();
            Lazy::new(move |n| Arc::new(Term::req(op.clone(), kids.iter().map(|c| c.get(n)).collect())))
        }
        Term::Req { op, children } => {
            let (op, children) = (op.clone(), children.clone());
            let kids: Arc<Lazy<Components>> =
                Lazy::new(move |i| light_components(&children.get(i).expect("ω-ary child")));
            Lazy::new(move |n| {
                let kids = kids.clone();
                let rest = Generator::native("light-child", None, move |i| kids.get(i).get(n));
                Arc::new(Term::Req { op: op.clone(), children: Children::Omega { explicit: Vec::new(), rest } })
            })
        }
        Term::Choice { p, left, right } => {
            let (l, r, p) = (light_components(left), light_components(right), p.clone());
            Lazy::new(move |n| Arc::new(Term::Choice { p: p.clone(), left: l.get(n), right: r.get(n) }))
        }
        Term::Sum { .. } if branches_sum_free(t) => {
            let t = t.clone();
            Regather::new(move |j| entry(&t, j)).components()
        }
        Term::Sum { .. } => {
            let src = t.clone();
            let kids: Arc<Lazy<Components>> = Lazy::new(move |j| light_components(&entry(&src, j).1));
            let t = t.clone();
            Regather::new(move |r| {
                let (beta, pieces) = diagonal(&t, r, &|j| kids.get(j));
                (beta, Arc::new(comb(&pieces)))
            })
            .components()
        }
    }
}

pub fn light_nf(t: &Term) -> Term {
    dyadic_sum("light", light_components(&Arc::new(t.clone())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equivalence::trace_equiv::trace_equiv;
    use crate::rational::rat;
    use crate::syntax::parse_term;

    fn comps(src: &str, n: u64) -> Vec<String> {
        let c = light_components(&Arc::new(parse_term(src).unwrap()));
        (0..n).map(|i| c.get(i).to_dsl()).collect()
    }

    #[test]
    fn sum_free_is_constant() {
        assert_eq!(comps("f(a +[1/3] b)", 3), vec!["f((a +[1/3] b))"; 3]);
    }

    #[test]
    fn thirds_regather_greedily() {
        assert_eq!(comps("sum { 1/3 : A; 2/3 : B }", 3), vec!["(A +[2/3] B)", "B", "B"]);
    }

    #[test]
    fn beta_weights_sum_to_one() {
        // Oracle: exchanging sums, Σ_r β_r = Σ_j p_j Σ_{r≥j} 2^{j-r-1} = Σ_j p_j.
        let t = parse_term("sum { 1/3 : f(sum { 1/2 : a; 1/2 : b }); 2/3 : c }").unwrap();
        let total: Rational = (0..60).map(|r| diagonal(&t, r, &|_| Lazy::new(|_| Arc::new(Term::empty()))).0).sum();
        assert!(rat(1, 1) - total < pow2_neg(50));
    }

    #[test]
    fn light_form_is_trace_equal() {
        for src in [
            "sum { 1/3 : f(sum { 1/2 : a; 1/2 : b }); 2/3 : c }",
            "f(sum { 1/4 : a; 3/4 : b }, c +[1/2] sum { 1/3 : a; 2/3 : c })",
            "sum { tail(n >= 0) : 1/2^(n+1) : iterate k < n : star(b, _) on star(a, c) }",
        ] {
            let t = parse_term(src).unwrap();
            let l = light_nf(&t);
            let c = light_components(&Arc::new(t.clone()));
            assert!((0..8).all(|n| c.get(n).is_sum_free()));
            let v = trace_equiv(&t, &l, 4, &pow2_neg(16), 2).unwrap();
            assert!(v.is_equivalent(), "{src}: {v:?}");
        }
    }
}
