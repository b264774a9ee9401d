//! A counterstrategy that tries to keep a program running as long as
//! possible.

use std::collections::{BTreeMap, HashMap};

use num_traits::Zero;

use crate::error::CoreError;
use crate::games::contprob::cont_prob;
use crate::games::counter::{Counterstrategy, Policy};
use crate::normalforms::uniform::omega_probes;
use crate::play::Play;
use crate::rational::{pow2_neg, Rational};
use crate::semantics::measure::{Inputs, MeasureView};
use crate::term::Term;

struct Search<'a> {
    m: &'a MeasureView,
    horizon: usize,
    eps: Rational,
    probes: Vec<u64>,
    memo: HashMap<Play, Rational>,
    table: BTreeMap<Play, u64>,
}

impl Search<'_> {
    fn inputs(&self, s: &Play) -> Vec<u64> {
        match self.m.inputs(s, &self.eps) {
            Some(Inputs::Finite(n)) => (0..n).collect(),
            Some(Inputs::Omega) => self.probes.clone(),
            None => Vec::new(),
        }
    }

    /// Mass still running, summed over the rounds from the active play `s`
    /// (reached after `depth` rounds) to the horizon, under the best inputs.
    /// Beyond the horizon only the mass of outputs that take input counts.
    fn residual(&mut self, s: &Play, depth: usize) -> Result<Rational, CoreError> {
        if let Some(v) = self.memo.get(s) {
            return Ok(v.clone());
        }
        let mut total = Rational::zero();
        for k in self.m.next_outputs(s, &self.eps) {
            let sk = s.with_output(k);
            let v = self.m.value(&sk, &self.eps)?.lo;
            if v.is_zero() {
                continue;
            }
            let ins = self.inputs(&sk);
            if ins.is_empty() {
                continue;
            }
            total += &v;
            if depth == self.horizon {
                continue;
            }
            let mut best: Option<(Rational, u64)> = None;
            for i in ins {
                let r = self.residual(&sk.with_input(i), depth + 1)?;
                if best.as_ref().is_none_or(|(b, _)| r > *b) {
                    best = Some((r, i));
                }
            }
            let (r, i) = best.unwrap();
            self.table.insert(sk, i);
            total += r;
        }
        self.memo.insert(s.clone(), total.clone());
        Ok(total)
    }
}

/// The best of the table built by look-ahead to `depth` rounds and a few
/// simple policies, judged by `Σ_{m ≤ depth} P^m`. Ties go to the table.
pub fn adversarial_rho(t: &Term, depth: usize) -> Result<Counterstrategy, CoreError> {
    let m = MeasureView::of_term(t);
    let eps = pow2_neg(40);
    let mut search = Search { m: &m, horizon: depth, eps: eps.clone(), probes: omega_probes(4, 6), memo: HashMap::new(), table: BTreeMap::new() };
    search.residual(&Play::empty(), 0)?;
    let own = Counterstrategy::new(Policy::Adversarial(search.table));
    let mut cands = vec![own];
    cands.extend((0..4).map(Counterstrategy::constant));
    cands.push(Counterstrategy::round_robin());
    let mut best: Option<(Rational, Counterstrategy)> = None;
    for c in cands {
        let score: Rational = cont_prob(&m, &c, depth, &eps)?.into_iter().skip(1).map(|v| v.lo).sum();
        if best.as_ref().is_none_or(|(b, _)| score > *b) {
            best = Some((score, c));
        }
    }
    Ok(best.unwrap().1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;

    #[test]
    fn prefers_the_deeper_branch() {
        let t = parse_term("Happy(Bye, Happy(Bye, Bye))").unwrap();
        let rho = adversarial_rho(&t, 2).unwrap();
        assert_eq!(rho.prescribe(&Play::parse_loose("Happy").unwrap(), Inputs::Finite(2)), Some(1));
    }

    #[test]
    fn unary_requests_get_input_zero() {
        let t = parse_term("sum { tail(n >= 0): 1/2^(n+1) : iterate a n on c }").unwrap();
        let rho = adversarial_rho(&t, 5).unwrap();
        for s in ["a", "a?0.a", "a?0.a?0.a?0.a"] {
            assert_eq!(rho.prescribe(&Play::parse_loose(s).unwrap(), Inputs::Finite(1)), Some(0), "{s}");
        }
    }

    #[test]
    fn beats_constant_policies_on_a_skewed_tree() {
        let t = parse_term("f(g(Bye, f(Bye, Bye)), Bye) +[1/2] g(Bye, f(g(Bye, Bye), Bye))").unwrap();
        let m = MeasureView::of_term(&t);
        let e = pow2_neg(20);
        let rho = adversarial_rho(&t, 4).unwrap();
        let p = cont_prob(&m, &rho, 3, &e).unwrap();
        for c in 0..2 {
            let q = cont_prob(&m, &Counterstrategy::constant(c), 3, &e).unwrap();
            assert!(p[3].lo >= q[3].hi);
        }
        assert_eq!(p[3].lo, Rational::from_integer(1.into()));
    }
}
