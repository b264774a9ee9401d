//! Enumeration of the support of a play-measure.

use num_traits::Zero;

use crate::error::CoreError;
use crate::play::Play;
use crate::rational::Rational;
use crate::semantics::interval::Interval;
use crate::semantics::measure::{Inputs, MeasureView};

/// The empty play followed by every passive-ending play with at most
/// `depth` outputs whose certified lower bound is positive. Inputs of
/// ω-ary outputs are probed at `0..omega_inputs`; plays of value `≤ eps`
/// may be missed.
pub fn support_enum(
    m: &MeasureView,
    depth: usize,
    eps: &Rational,
    omega_inputs: u64,
) -> Result<Vec<(Play, Interval)>, CoreError> {
    let mut out = Vec::new();
    let root = Play::empty();
    let w = m.value(&root, eps)?;
    if w.hi.is_zero() {
        return Ok(out);
    }
    out.push((root.clone(), w));
    let mut frontier = vec![root];
    for _ in 0..depth {
        let mut next = Vec::new();
        for t in &frontier {
            for k in m.next_outputs(t, eps) {
                let s = t.with_output(k);
                let v = m.value(&s, eps)?;
                if v.lo <= Rational::zero() {
                    continue;
                }
                let n = match m.inputs(&s, eps) {
                    Some(Inputs::Finite(n)) => n,
                    Some(Inputs::Omega) => omega_inputs,
                    None => 0,
                };
                for i in 0..n {
                    next.push(s.with_input(i));
                }
                out.push((s, v));
            }
        }
        frontier = next;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{pow2_neg, rat};
    use crate::syntax::parse_term;

    fn support(src: &str, depth: usize) -> Vec<(String, Interval)> {
        let m = MeasureView::of_term(&parse_term(src).unwrap());
        support_enum(&m, depth, &pow2_neg(20), 4)
            .unwrap()
            .into_iter()
            .map(|(p, v)| (p.to_string(), v))
            .collect()
    }

    #[test]
    fn constant_support() {
        assert_eq!(support("Bye", 2), vec![("".into(), Interval::one()), ("Bye".into(), Interval::one())]);
    }

    #[test]
    fn happy_support_to_depth_two() {
        let s = support("Happy(Bye, Bye +[1/2] Happy(Bye +[1/3] Happy(Bye, Bye), Bye))", 2);
        let vals: Vec<Rational> = s.iter().map(|(_, v)| v.lo.clone()).collect();
        assert_eq!(vals, vec![rat(1, 1), rat(1, 1), rat(1, 1), rat(1, 2), rat(1, 2)]);
    }

    #[test]
    fn not_well_founded_prefixes_are_positive() {
        let s = support("sum { tail(n >= 0): 1/2^(n+1) : iterate a n on c }", 4);
        for d in 1..=4 {
            let play = vec!["a"; d].join("?0.");
            assert!(s.iter().any(|(p, v)| *p == play && v.lo > Rational::zero()), "{play}");
        }
        assert!(s.iter().any(|(p, _)| p == "a?0.a?0.c"));
    }
}
