//! Continuation probabilities `P^m` of a play-measure against a
//! counterstrategy, computed level by level along the prescribed plays.

use num_traits::Zero;

use crate::error::CoreError;
use crate::games::counter::Counterstrategy;
use crate::play::Play;
use crate::rational::{min, Rational};
use crate::semantics::interval::Interval;
use crate::semantics::measure::{Inputs, MeasureView};

/// Guard against counterstrategies whose prescribed tree blows up.
const MAX_ACTIVE: usize = 200_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContProb {
    /// `P^0 … P^steps`.
    pub levels: Vec<Interval>,
    /// Mass of the failures after `m` completed rounds, for `m < steps`.
    pub fails: Vec<Interval>,
}

/// Runs `steps` rounds. `P^{m+1}` is bracketed below by the prescribed
/// continuations found and above by `P^m` minus the certain failures.
pub fn cont_prob_detailed(m: &MeasureView, rho: &Counterstrategy, steps: usize, eps: &Rational) -> Result<ContProb, CoreError> {
    let w = m.weight();
    let mut levels = vec![Interval::exact(w.clone())];
    let mut fails = Vec::new();
    let mut active: Vec<Play> = if w.is_zero() { Vec::new() } else { vec![Play::empty()] };
    for _ in 0..steps {
        let mut fail = Interval::zero();
        let mut cont = Interval::zero();
        let mut next = Vec::new();
        for s in &active {
            for k in m.next_outputs(s, eps) {
                let sk = s.with_output(k);
                let v = m.value(&sk, eps)?;
                if v.hi.is_zero() {
                    continue;
                }
                let arity = m.inputs(&sk, eps).unwrap_or(Inputs::Finite(0));
                match rho.prescribe(&sk, arity) {
                    Some(i) => {
                        next.push(sk.with_input(i));
                        cont = cont + v;
                    }
                    None => fail = fail + v,
                }
            }
        }
        if next.len() > MAX_ACTIVE {
            return Err(CoreError::Inconclusive(format!("more than {MAX_ACTIVE} prescribed plays")));
        }
        // Outputs below `eps` may be missing from `cont`, so only the
        // previous level bounds it above.
        let prev = levels.last().unwrap();
        let hi = &prev.hi - &fail.lo;
        let hi = if hi < cont.lo { cont.lo.clone() } else { hi };
        levels.push(Interval::new(cont.lo, hi));
        fails.push(fail);
        active = next;
    }
    Ok(ContProb { levels, fails })
}

pub fn cont_prob(m: &MeasureView, rho: &Counterstrategy, steps: usize, eps: &Rational) -> Result<Vec<Interval>, CoreError> {
    Ok(cont_prob_detailed(m, rho, steps, eps)?.levels)
}

/// Bounds on the total failure mass: failures seen within `depth` rounds,
/// up to everything still running after them.
pub fn fail_mass(m: &MeasureView, rho: &Counterstrategy, depth: usize, eps: &Rational) -> Result<Interval, CoreError> {
    let cp = cont_prob_detailed(m, rho, depth, eps)?;
    let seen: Interval = cp.fails.into_iter().sum();
    let rest = cp.levels.last().unwrap().hi.clone();
    let hi = min(&(&seen.hi + &rest), &m.weight());
    Ok(Interval::new(seen.lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{pow2_neg, rat};
    use crate::semantics::measure::measure_scale;
    use crate::syntax::parse_term;

    fn mv(s: &str) -> MeasureView {
        MeasureView::of_term(&parse_term(s).unwrap())
    }

    fn eps() -> Rational {
        pow2_neg(30)
    }

    #[test]
    fn bye_fails_at_once() {
        for rho in [Counterstrategy::fail(), Counterstrategy::constant(0), Counterstrategy::round_robin()] {
            let p = cont_prob(&mv("Bye"), &rho, 3, &eps()).unwrap();
            assert_eq!(p[0], Interval::one());
            assert_eq!(p[1], Interval::zero());
            assert_eq!(fail_mass(&mv("Bye"), &rho, 4, &eps()).unwrap(), Interval::one());
        }
        assert_eq!(cont_prob(&mv("Bye"), &Counterstrategy::fail(), 0, &eps()).unwrap(), vec![Interval::one()]);
    }

    #[test]
    fn geometric_tail_of_iterated_requests() {
        let m = mv("sum { tail(n >= 0): 1/2^(n+1) : iterate a n on c }");
        let p = cont_prob(&m, &Counterstrategy::constant(0), 12, &eps()).unwrap();
        for (k, v) in p.iter().enumerate() {
            // Σ_{n ≥ k} 2^{-n-1}
            assert_eq!(*v, Interval::exact(pow2_neg(k as u64)), "P^{k}");
        }
        let f = fail_mass(&m, &Counterstrategy::constant(0), 10, &eps()).unwrap();
        assert_eq!(f, Interval::new(rat(1, 1) - pow2_neg(10), rat(1, 1)));
    }

    #[test]
    fn scaled_measures_stay_below_their_weight() {
        let m = measure_scale(&mv("Happy(Bye, Happy(Bye, Bye))"), &rat(1, 2));
        let f = fail_mass(&m, &Counterstrategy::constant(1), 5, &eps()).unwrap();
        assert_eq!(f, Interval::exact(rat(1, 2)));
        assert_eq!(cont_prob(&m, &Counterstrategy::constant(1), 2, &eps()).unwrap()[1], Interval::exact(rat(1, 2)));
    }

    #[test]
    fn recurrence_holds_level_by_level() {
        let m = mv("Happy(Bye, Happy(Bye, Bye) +[1/3] Bye) +[1/4] Happy(Happy(Bye, Bye), Bye)");
        let cp = cont_prob_detailed(&m, &Counterstrategy::round_robin(), 4, &eps()).unwrap();
        for k in 0..4 {
            assert_eq!(cp.levels[k], cp.fails[k].clone() + cp.levels[k + 1].clone());
        }
        assert!(cp.levels.windows(2).all(|w| w[1].hi <= w[0].lo));
    }
}
