//! Evidence that a program cannot be kept running forever.

use crate::error::CoreError;
use crate::games::adversary::adversarial_rho;
use crate::games::contprob::{cont_prob, fail_mass};
use crate::games::counter::Counterstrategy;
use crate::rational::Rational;
use crate::semantics::interval::Interval;
use crate::semantics::measure::MeasureView;
use crate::term::{Children, Generator, Term};

#[derive(Clone, Debug)]
pub struct VictoryReport {
    /// Every generator met (explicitly or among the first `G` instances) is
    /// a template, so each branch is a finite term.
    pub syntactic: bool,
    /// `P^0 … P^steps` under the given counterstrategy, if any.
    pub given: Option<Vec<Interval>>,
    /// The same under the adversarial counterstrategy.
    pub adversarial: Vec<Interval>,
    pub adversary: Counterstrategy,
    /// Failure mass under the adversary, to `steps` rounds.
    pub fail_mass: Interval,
}

fn templates_only(t: &Term, g: u64, budget: &mut usize) -> bool {
    if *budget == 0 {
        return true;
    }
    *budget -= 1;
    let gen_ok = |gen: &Generator, from: u64, budget: &mut usize| match gen {
        Generator::Native(_) => false,
        Generator::Template { .. } => (from..from + g).all(|n| gen.try_get(n).is_ok_and(|b| templates_only(&b, g, budget))),
    };
    match t {
        Term::Req { children: Children::Finite(cs), .. } => cs.iter().all(|c| templates_only(c, g, budget)),
        Term::Req { children: Children::Omega { explicit, rest }, .. } => {
            explicit.iter().all(|c| templates_only(c, g, budget)) && gen_ok(rest, explicit.len() as u64, budget)
        }
        Term::Choice { left, right, .. } => templates_only(left, g, budget) && templates_only(right, g, budget),
        Term::Sum { branches, generator, .. } => {
            branches.iter().all(|b| templates_only(b, g, budget)) && generator.as_ref().is_none_or(|gen| gen_ok(gen, branches.len() as u64, budget))
        }
    }
}

/// Runs `steps` rounds against `rho` (when given) and against an adversary
/// built by look-ahead to the same horizon.
pub fn victorious(t: &Term, rho: Option<&Counterstrategy>, steps: usize, g: u64, eps: &Rational) -> Result<VictoryReport, CoreError> {
    let m = MeasureView::of_term(t);
    let given = rho.map(|r| cont_prob(&m, r, steps, eps)).transpose()?;
    let adversary = adversarial_rho(t, steps)?;
    let adversarial = cont_prob(&m, &adversary, steps, eps)?;
    let fail_mass = fail_mass(&m, &adversary, steps, eps)?;
    Ok(VictoryReport { syntactic: templates_only(t, g, &mut 10_000), given, adversarial, adversary, fail_mass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalforms::light_nf;
    use crate::rational::{pow2_neg, rat};
    use crate::syntax::parse_term;

    #[test]
    fn iterated_family_is_victorious() {
        let t = parse_term("sum { tail(n >= 0): 1/2^(n+1) : iterate a n on c }").unwrap();
        let r = victorious(&t, Some(&Counterstrategy::constant(0)), 10, 16, &pow2_neg(30)).unwrap();
        assert!(r.syntactic);
        assert_eq!(r.given.unwrap()[10], Interval::exact(pow2_neg(10)));
        assert_eq!(r.adversarial[10], Interval::exact(pow2_neg(10)));
        assert_eq!(r.fail_mass, Interval::new(rat(1, 1) - pow2_neg(10), rat(1, 1)));
    }

    #[test]
    fn finite_terms_stop_at_their_depth() {
        let t = parse_term("Happy(Bye, Happy(Bye, Bye) +[1/2] Bye)").unwrap();
        let r = victorious(&t, None, 4, 16, &pow2_neg(30)).unwrap();
        assert_eq!(r.adversarial[1], Interval::exact(rat(1, 1)));
        assert_eq!(r.adversarial[2], Interval::exact(rat(1, 2)));
        assert_eq!(r.adversarial[3], Interval::zero());
        assert_eq!(r.fail_mass, Interval::one());
    }

    #[test]
    fn native_generators_carry_no_certificate() {
        let t = parse_term("sum { tail(n >= 0): 1/2^(n+1) : iterate a n on c }").unwrap();
        let light = light_nf(&t);
        assert!(!victorious(&light, None, 2, 4, &pow2_neg(20)).unwrap().syntactic);
    }
}
