//! Impersonation of `M` by `N`: peel the light components of `M` off `N`
//! one half at a time, and collect the residuals into a program `U` with
//! `M +_{1/2} U ≡ N +_{1/2} U`.

use std::sync::{Arc, OnceLock, Weak};

use crate::error::CoreError;
use crate::equivalence::trace_equiv::{trace_equiv, TraceVerdict};
use crate::normalforms::family::{dyadic_sum, Components, Lazy};
use crate::normalforms::light::light_components;
use crate::normalforms::subsplit::subsplit;
use crate::rational::{rat, Rational};
use crate::term::Term;

#[derive(Clone, Debug)]
pub struct ImpersonationCertificate {
    /// Light components `P_0..P_R` of `M`.
    pub components: Vec<Arc<Term>>,
    /// `Q_0 = N, …, Q_R`.
    pub solutions: Vec<Arc<Term>>,
    /// `Σ_j 2^{-j-1} Q_{j+1}`, generated lazily past `R`.
    pub residual: Term,
    pub rounds: usize,
}

/// `Q_{n+1} = subsplit(Q_n, P_n, 1/2)` with `Q_0 = N`.
fn solutions(n_term: &Term, comps: Components, eps: &Rational) -> Arc<Lazy<Result<Arc<Term>, CoreError>>> {
    let n_term = Arc::new(n_term.clone());
    let eps = eps.clone();
    type Chain = Lazy<Result<Arc<Term>, CoreError>>;
    let cell: Arc<OnceLock<Weak<Chain>>> = Arc::new(OnceLock::new());
    let weak = cell.clone();
    let lazy = Lazy::new(move |n| {
        if n == 0 {
            return Ok(n_term.clone());
        }
        let me = weak.get().and_then(Weak::upgrade).expect("chain is alive while queried");
        let prev = me.get(n - 1)?;
        subsplit(&prev, &comps.get(n - 1), &rat(1, 2), &eps).map(Arc::new)
    });
    let _ = cell.set(Arc::downgrade(&lazy));
    lazy
}

pub fn impersonate(m: &Term, n: &Term, rounds: usize, eps: &Rational) -> Result<ImpersonationCertificate, CoreError> {
    let comps = light_components(&Arc::new(m.clone()));
    let qs = solutions(n, comps.clone(), eps);
    let mut solutions = Vec::new();
    for j in 0..=rounds as u64 {
        solutions.push(qs.get(j)?);
    }
    let q2 = qs.clone();
    let residual = dyadic_sum(
        "residual",
        Lazy::new(move |j| q2.get(j + 1).expect("later rounds keep the domination of earlier ones")),
    );
    Ok(ImpersonationCertificate {
        components: (0..=rounds as u64).map(|j| comps.get(j)).collect(),
        solutions,
        residual,
        rounds,
    })
}

impl ImpersonationCertificate {
    /// Trace checks of `Q_n ≡ P_n +_{1/2} Q_{n+1}` for `n < R`.
    pub fn check_rounds(&self, depth: usize, eps: &Rational, omega_inputs: u64) -> Result<Vec<TraceVerdict>, CoreError> {
        (0..self.rounds)
            .map(|j| {
                let rhs = Term::Choice {
                    p: rat(1, 2),
                    left: self.components[j].clone(),
                    right: self.solutions[j + 1].clone(),
                };
                trace_equiv(&self.solutions[j], &rhs, depth, eps, omega_inputs)
            })
            .collect()
    }

    /// Trace check of `M +_{1/2} U ≡ N +_{1/2} U`.
    pub fn check_cancellation(&self, m: &Term, n: &Term, depth: usize, eps: &Rational, omega_inputs: u64) -> Result<TraceVerdict, CoreError> {
        let u = Arc::new(self.residual.clone());
        let a = Term::Choice { p: rat(1, 2), left: Arc::new(m.clone()), right: u.clone() };
        let b = Term::Choice { p: rat(1, 2), left: Arc::new(n.clone()), right: u };
        trace_equiv(&a, &b, depth, eps, omega_inputs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::pow2_neg;
    use crate::syntax::parse_term;

    #[test]
    fn self_impersonation() {
        let m = parse_term("f(a +[1/3] b) +[1/2] g").unwrap();
        let c = impersonate(&m, &m, 4, &pow2_neg(20)).unwrap();
        assert!(c.check_rounds(4, &pow2_neg(20), 2).unwrap().iter().all(TraceVerdict::is_equivalent));
        assert!(c.check_cancellation(&m, &m, 4, &pow2_neg(20), 2).unwrap().is_equivalent());
    }

    #[test]
    fn distinct_heads_fail() {
        let r = impersonate(&parse_term("a(c)").unwrap(), &parse_term("b(c)").unwrap(), 1, &pow2_neg(20));
        assert!(matches!(r, Err(CoreError::DominationFails(_))));
    }

    #[test]
    fn trace_example_pair() {
        let m = parse_term("sum { tail(n >= 0) : 1/2^(n+1) : iterate k < n : star(b, _) on star(a, c) }").unwrap();
        let n = parse_term("sum { tail(n >= 0) : 1/2^(n+1) : iterate k < n : star(a, _) on star(b, c) }").unwrap();
        let e = pow2_neg(20);
        let c = impersonate(&m, &n, 6, &e).unwrap();
        assert!(c.check_rounds(4, &e, 2).unwrap().iter().all(TraceVerdict::is_equivalent));
        let v = c.check_cancellation(&m, &n, 6, &e, 2).unwrap();
        assert!(v.is_equivalent(), "{v:?}");
    }
}
