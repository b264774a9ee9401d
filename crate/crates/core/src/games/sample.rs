//! Monte Carlo play between a program and a counterstrategy.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::CoreError;
use crate::games::counter::Counterstrategy;
use crate::play::Play;
use crate::rational::Rational;
use crate::semantics::head::{condition, head_distribution};
use crate::semantics::measure::{Inputs, MeasureView};
use crate::signature::Symbol;
use crate::term::Term;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// The counterstrategy had no input for the last output of the play.
    Failed,
    /// `max_steps` rounds were played.
    Exhausted,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sampled {
    pub play: Play,
    pub outcome: Outcome,
}

/// A uniform rational in `[0, 1)` with 64 random bits.
fn uniform(rng: &mut impl Rng) -> Rational {
    let bits: u64 = rng.gen();
    Rational::new(num_bigint::BigInt::from(bits), num_bigint::BigInt::from(1) << 64)
}

/// Draws one output from the first-step distribution of `t`.
pub fn sample_head(t: &Term, rng: &mut impl Rng, eps: &Rational) -> Result<Symbol, CoreError> {
    let heads = head_distribution(t, eps);
    let total: Rational = heads.iter().map(|(_, v)| v.lo.clone()).sum();
    if total.is_zero() {
        return Err(CoreError::ZeroProbabilityHead("no output has positive probability".into()));
    }
    let u = uniform(rng) * &total;
    let mut acc = Rational::zero();
    for (k, v) in &heads {
        acc += &v.lo;
        if u < acc {
            return Ok(k.clone());
        }
    }
    Ok(heads.last().unwrap().0.clone())
}

pub fn sample_play_with(t: &Term, rho: &Counterstrategy, max_steps: usize, rng: &mut impl Rng, eps: &Rational) -> Result<Sampled, CoreError> {
    let m = MeasureView::of_term(t);
    let mut cur = t.clone();
    let mut play = Play::empty();
    for _ in 0..max_steps {
        let k = sample_head(&cur, rng, eps)?;
        let sk = play.with_output(k.clone());
        let arity = m.inputs(&sk, eps).unwrap_or(Inputs::Finite(0));
        match rho.prescribe(&sk, arity) {
            None => return Ok(Sampled { play: sk, outcome: Outcome::Failed }),
            Some(i) => {
                cur = condition(&cur, &k, i, eps)?;
                play = sk.with_input(i);
            }
        }
    }
    Ok(Sampled { play, outcome: Outcome::Exhausted })
}

/// Deterministic in `seed`.
pub fn sample_play(t: &Term, rho: &Counterstrategy, max_steps: usize, seed: u64, eps: &Rational) -> Result<Sampled, CoreError> {
    sample_play_with(t, rho, max_steps, &mut ChaCha8Rng::seed_from_u64(seed), eps)
}

/// `n` plays from seeds `seed, seed + 1, …`.
pub fn sample_many(t: &Term, rho: &Counterstrategy, max_steps: usize, seed: u64, n: usize, eps: &Rational) -> Result<Vec<Sampled>, CoreError> {
    (0..n as u64).map(|j| sample_play(t, rho, max_steps, seed.wrapping_add(j), eps)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::contprob::cont_prob;
    use crate::rational::pow2_neg;
    use crate::syntax::parse_term;

    fn eps() -> Rational {
        pow2_neg(30)
    }

    #[test]
    fn bye_fails_immediately() {
        let t = parse_term("Bye").unwrap();
        let s = sample_play(&t, &Counterstrategy::constant(0), 5, 1, &eps()).unwrap();
        assert_eq!(s.play.to_string(), "Bye");
        assert_eq!(s.outcome, Outcome::Failed);
    }

    #[test]
    fn seeds_reproduce() {
        let t = parse_term("Happy(Bye +[1/2] Happy(Bye, Bye), Bye) +[1/3] Happy(Bye, Happy(Bye, Bye))").unwrap();
        let rho = Counterstrategy::round_robin();
        for seed in 0..20 {
            assert_eq!(sample_play(&t, &rho, 8, seed, &eps()).unwrap(), sample_play(&t, &rho, 8, seed, &eps()).unwrap());
        }
    }

    #[test]
    fn failure_frequency_matches_exact_mass() {
        let t = parse_term("sum { tail(n >= 0): 1/2^(n+1) : iterate a n on c }").unwrap();
        let rho = Counterstrategy::constant(0);
        let n = 2000;
        let runs = sample_many(&t, &rho, 3, 7, n, &eps()).unwrap();
        let exhausted = runs.iter().filter(|r| r.outcome == Outcome::Exhausted).count() as f64 / n as f64;
        // P^3 = 1/8
        let p3 = cont_prob(&MeasureView::of_term(&t), &rho, 3, &eps()).unwrap()[3].clone();
        assert_eq!(p3.lo, pow2_neg(3));
        let sd = (0.125f64 * 0.875 / n as f64).sqrt();
        assert!((exhausted - 0.125).abs() <= 4.0 * sd, "{exhausted}");
    }
}
