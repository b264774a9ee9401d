//! Finitely founded parts of programs and the decomposition of a program
//! into a series of them.

use std::sync::Arc;

use num_traits::{One, Zero};

use crate::coeff::CoeffFamily;
use crate::error::CoreError;
use crate::normalforms::uniform::{omega_probes, support_with_probes};
use crate::play::Play;
use crate::rational::{min, pow2_neg, Rational};
use crate::semantics::measure::{measure_add, measure_scale, measure_sub, Inputs, MeasureView};
use crate::term::{Children, Term};

fn mix(parts: Vec<(Rational, Term)>) -> (Rational, Term) {
    let parts: Vec<(Rational, Term)> = parts.into_iter().filter(|(w, _)| !w.is_zero()).collect();
    let total: Rational = parts.iter().map(|(w, _)| w.clone()).sum();
    match parts.len() {
        0 => (Rational::zero(), Term::empty()),
        1 => (total, parts.into_iter().next().unwrap().1),
        _ => {
            let entries = parts.into_iter().map(|(w, t)| (w / &total, Arc::new(t))).collect();
            (total, Term::sum(entries))
        }
    }
}

/// Smallest `m ≥ from` with `tail(m) < bound`.
fn strict_cut(f: &CoeffFamily, from: u64, bound: &Rational) -> u64 {
    let mut m = from;
    while f.tail(m) >= *bound {
        m += 1;
    }
    m
}

/// `(λ, τ)` with `λ·⟦τ⟧ ≤ ⟦t⟧` and `λ > 1 − loss` (or `λ = 1`).
fn extract(t: &Term, loss: &Rational) -> Result<(Rational, Term), CoreError> {
    if t.is_generator_free() {
        return Ok((Rational::one(), t.clone()));
    }
    match t {
        Term::Req { op, children: Children::Finite(cs) } => {
            let mut lam = Rational::one();
            let mut kids = Vec::new();
            for c in cs {
                let (l, k) = extract(c, loss)?;
                lam = min(&lam, &l);
                kids.push(Arc::new(k));
            }
            if lam.is_zero() {
                return Ok((lam, Term::empty()));
            }
            Ok((lam, Term::req(op.clone(), kids)))
        }
        Term::Req { .. } => Err(CoreError::Unsupported("ω-ary request over a generated family".into())),
        Term::Choice { p, left, right } => {
            let (a, l) = extract(left, loss)?;
            let (b, r) = extract(right, loss)?;
            Ok(mix(vec![(p * a, l), ((Rational::one() - p) * b, r)]))
        }
        Term::Sum { coeffs, branches, generator } => {
            let branch = |n: u64| -> Arc<Term> {
                match branches.get(n as usize) {
                    Some(b) => b.clone(),
                    None => generator.as_ref().expect("branch index").get(n),
                }
            };
            let full = branches.len() as u64;
            let mut m = if generator.is_some() { strict_cut(coeffs, full, loss).max(full) } else { full };
            // Keep the whole budget for the cut when no kept branch loses
            // mass itself; otherwise split it between cut and branches.
            let mut inner = Rational::zero();
            if !(0..m).all(|n| branch(n).is_generator_free()) {
                let half = loss / Rational::from_integer(2.into());
                if generator.is_some() {
                    m = strict_cut(coeffs, full, &half).max(full);
                }
                inner = half;
            }
            let mut parts = Vec::new();
            for n in 0..m {
                let p = coeffs.coeff(n);
                if p.is_zero() {
                    continue;
                }
                let (l, b) = if inner.is_zero() { (Rational::one(), (*branch(n)).clone()) } else { extract(&branch(n), &inner)? };
                parts.push((p * l, b));
            }
            Ok(mix(parts))
        }
    }
}

/// A generator-free `τ` and `λ ≥ x` with `λ·⟦τ⟧ ≤ ⟦t⟧`: generated families
/// are cut where less than `1 − x` of their weight remains.
pub fn extract_ff(t: &Term, x: &Rational) -> Result<(Rational, Term), CoreError> {
    if *x >= Rational::one() {
        return Err(CoreError::InvalidInput(format!("extraction target {x} must be below 1")));
    }
    extract(t, &(Rational::one() - x))
}

/// The finitely founded part of `m` below the active play `s` whose plays
/// end within `depth` further rounds, as an absolute weight and a term.
/// Requests keep the smallest weight over their inputs.
fn harvest(m: &MeasureView, s: &Play, depth: usize, eps: &Rational) -> Result<(Rational, Term), CoreError> {
    let mut parts = Vec::new();
    for k in m.next_outputs(s, eps) {
        let sk = s.with_output(k.clone());
        let v = m.value(&sk, eps)?.lo;
        if v <= Rational::zero() {
            continue;
        }
        match m.inputs(&sk, eps) {
            Some(Inputs::Finite(0)) => parts.push((v, Term::req(k, Vec::new()))),
            Some(Inputs::Finite(n)) if depth > 0 => {
                let mut w = v;
                let mut kids = Vec::new();
                for i in 0..n {
                    let (wi, ti) = harvest(m, &sk.with_input(i), depth - 1, eps)?;
                    w = min(&w, &wi);
                    kids.push(Arc::new(ti));
                }
                if !w.is_zero() {
                    parts.push((w, Term::req(k, kids)));
                }
            }
            _ => {}
        }
    }
    Ok(mix(parts))
}

/// Finitely founded part of `m` of weight at least `target`, found by
/// deepening the harvest up to `max_depth` rounds.
pub fn extract_ff_measure(m: &MeasureView, target: &Rational, max_depth: usize, eps: &Rational) -> Result<(Rational, Term, usize), CoreError> {
    for d in 0..=max_depth {
        let (w, t) = harvest(m, &Play::empty(), d, eps)?;
        if w >= *target && !w.is_zero() {
            return Ok((w, t, d));
        }
    }
    Err(CoreError::NotWellFounded(format!("less than {target} of the weight ends within {max_depth} rounds")))
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    /// `τ_k`, each of weight one, entering with weight `2^{-k-1}`.
    pub parts: Vec<Term>,
    /// Depth of the harvest that produced each part.
    pub depths: Vec<usize>,
    /// What is left after the parts are taken out.
    pub residual: MeasureView,
    /// Its weight, `2^{-K}`.
    pub residual_weight: Rational,
}

impl Decomposition {
    /// `Σ_k 2^{-k-1}·⟦τ_k⟧`.
    pub fn partial_sum(&self) -> MeasureView {
        measure_add(self.parts.iter().enumerate().map(|(k, t)| measure_scale(&MeasureView::of_term(t), &pow2_neg(k as u64 + 1))).collect())
    }
}

/// Peels `k` finitely founded parts of weights `1/2, 1/4, …` off `⟦t⟧`, each
/// taken from what the previous ones left, and checks on the support of
/// their sum that nothing was taken twice.
pub fn definability_decomp(t: &Term, k: usize, max_depth: usize, eps: &Rational) -> Result<Decomposition, CoreError> {
    if k == 0 {
        return Err(CoreError::InvalidInput("at least one round is needed".into()));
    }
    let mut sigma = MeasureView::of_term(t);
    let mut parts = Vec::new();
    let mut depths = Vec::new();
    for j in 0..k {
        let target = pow2_neg(j as u64 + 1);
        let (_, tau, d) = extract_ff_measure(&sigma, &target, max_depth, eps)?;
        sigma = measure_sub(&sigma, &measure_scale(&MeasureView::of_term(&tau), &target));
        parts.push(tau);
        depths.push(d);
    }
    let dec = Decomposition { parts, depths, residual_weight: sigma.weight(), residual: sigma };
    let probes = omega_probes(4, 6);
    let deepest = dec.depths.iter().max().copied().unwrap_or(0) + 1;
    for s in support_with_probes(&dec.partial_sum(), deepest, eps, &probes)? {
        dec.residual.value(&s, eps)?;
    }
    Ok(dec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use crate::semantics::eval::eval;
    use crate::semantics::support::support_enum;
    use crate::syntax::parse_term;

    const NOTWNF: &str = "sum { tail(n >= 0): 1/2^(n+1) : iterate a n on c }";

    fn eps() -> Rational {
        pow2_neg(40)
    }

    #[test]
    fn generator_free_terms_are_kept() {
        let t = parse_term("Happy(Bye, Bye +[1/3] Happy(Bye, Bye))").unwrap();
        assert_eq!(extract_ff(&t, &rat(1, 2)).unwrap(), (rat(1, 1), t));
    }

    #[test]
    fn truncation_keeps_four_summands() {
        let t = parse_term(NOTWNF).unwrap();
        let (lam, tau) = extract_ff(&t, &rat(7, 8)).unwrap();
        assert_eq!(lam, rat(15, 16));
        assert!(tau.is_generator_free());
        assert_eq!(tau.branch(3).unwrap().to_dsl(), "a(a(a(c)))");
        assert!(tau.branch(4).is_none());
        let (lam0, _) = extract_ff(&t, &rat(0, 1)).unwrap();
        assert!(lam0 >= rat(0, 1));
    }

    #[test]
    fn nested_families_stay_above_target() {
        let t = parse_term("f(sum { tail(n >= 0): 1/2^(n+1) : iterate a n on c }, b) +[1/2] sum { tail(n >= 0): 1/2^(n+1) : iterate a n on c }").unwrap();
        for x in [rat(1, 2), rat(3, 4), rat(31, 32)] {
            let (lam, tau) = extract_ff(&t, &x).unwrap();
            assert!(lam > x, "{x}");
            let scaled = measure_scale(&MeasureView::of_term(&tau), &lam);
            for (s, _) in support_enum(&MeasureView::of_term(&tau), 6, &eps(), 4).unwrap() {
                let below = scaled.value(&s, &eps()).unwrap();
                assert!(below.hi <= eval(&t, s.as_ref(), &eps()).lo, "{s}");
            }
        }
    }

    #[test]
    fn measure_route_agrees_on_the_truncation_example() {
        let t = parse_term(NOTWNF).unwrap();
        let (w, tau, d) = extract_ff_measure(&MeasureView::of_term(&t), &rat(15, 16), 20, &eps()).unwrap();
        let (lam, tau2) = extract_ff(&t, &rat(7, 8)).unwrap();
        assert_eq!((w, d), (lam, 3));
        for (s, _) in support_enum(&MeasureView::of_term(&tau), 6, &eps(), 4).unwrap() {
            assert_eq!(eval(&tau, s.as_ref(), &eps()), eval(&tau2, s.as_ref(), &eps()), "{s}");
        }
    }

    #[test]
    fn decomposition_of_a_constant() {
        let t = parse_term("Bye").unwrap();
        let d = definability_decomp(&t, 3, 8, &eps()).unwrap();
        assert!(d.parts.iter().all(|p| p.to_dsl() == "Bye"));
        assert_eq!(d.residual_weight, rat(1, 8));
        let one = definability_decomp(&t, 1, 8, &eps()).unwrap();
        assert_eq!(one.parts.len(), 1);
        assert_eq!(one.residual_weight, rat(1, 2));
    }

    #[test]
    fn decomposition_of_the_iterated_family() {
        let t = parse_term(NOTWNF).unwrap();
        let d = definability_decomp(&t, 4, 16, &eps()).unwrap();
        let dsl: Vec<String> = d.parts.iter().map(Term::to_dsl).collect();
        assert_eq!(dsl, vec!["c", "a(c)", "a(a(c))", "a(a(a(c)))"]);
        assert_eq!(d.residual_weight, pow2_neg(4));
        let sum = d.partial_sum();
        for (s, _) in support_enum(&MeasureView::of_term(&t), 4, &eps(), 4).unwrap() {
            let full = eval(&t, s.as_ref(), &eps());
            let part = sum.value(&s, &eps()).unwrap();
            assert!(part.hi <= full.hi && full.lo <= &part.hi + pow2_neg(4) + eps(), "{s}");
        }
    }
}
