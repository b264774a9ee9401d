//! Deciding `σ ≺ τ` over dyadic candidate margins.

use num_traits::Zero;

use crate::error::CoreError;
use crate::play::Play;
use crate::rational::{pow2_neg, Rational};
use crate::semantics::interval::Interval;
use crate::semantics::measure::{Inputs, MeasureView};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub d: Rational,
    pub play: Play,
    pub below: Interval,
    pub above: Interval,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UniformVerdict {
    /// `σ(s) + d ≤ τ(s)` on every enumerated support play of `σ`.
    Witness(Rational),
    /// For each candidate `d`, a support play where the margin certainly
    /// fails, the deepest one found.
    Refuted(Vec<Violation>),
}

/// Inputs probed after an ω-ary output: a few small ones, then `2^j - 1`.
pub fn omega_probes(small: u64, max_exp: u32) -> Vec<u64> {
    let mut v: Vec<u64> = (0..small).collect();
    for j in 1..=(max_exp + 1).min(40) {
        let n = (1u64 << j) - 1;
        if !v.contains(&n) {
            v.push(n);
        }
    }
    v
}

/// Passive-ending support plays of `m` with at most `depth` outputs (plus
/// the empty play), probing ω-ary inputs at `probes`.
pub fn support_with_probes(m: &MeasureView, depth: usize, eps: &Rational, probes: &[u64]) -> Result<Vec<Play>, CoreError> {
    let mut out = Vec::new();
    if m.value(&Play::empty(), eps)?.lo.is_zero() {
        return Ok(out);
    }
    out.push(Play::empty());
    let mut frontier = vec![Play::empty()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for t in &frontier {
            for k in m.next_outputs(t, eps) {
                let s = t.with_output(k);
                if m.value(&s, eps)?.lo <= Rational::zero() {
                    continue;
                }
                match m.inputs(&s, eps) {
                    Some(Inputs::Finite(n)) => next.extend((0..n).map(|i| s.with_input(i))),
                    Some(Inputs::Omega) => next.extend(probes.iter().map(|&i| s.with_input(i))),
                    None => {}
                }
                out.push(s);
            }
        }
        frontier = next;
    }
    Ok(out)
}

/// Scans `d = 2^{-j}` for `j ≤ max_exp`.
pub fn is_uniformly_below(
    sigma: &MeasureView,
    tau: &MeasureView,
    search_depth: usize,
    max_exp: u32,
    eps: &Rational,
) -> Result<UniformVerdict, CoreError> {
    let probes = omega_probes(4, max_exp);
    let plays = support_with_probes(sigma, search_depth, eps, &probes)?;
    if plays.is_empty() {
        return Ok(UniformVerdict::Witness(Rational::from_integer(1.into())));
    }
    let mut vals = Vec::new();
    for s in plays {
        let a = sigma.value(&s, eps)?;
        let b = tau.value(&s, eps)?;
        vals.push((s, a, b));
    }
    for j in 0..=max_exp {
        let d = pow2_neg(j as u64);
        if vals.iter().all(|(_, a, b)| &a.hi + &d <= b.lo) {
            return Ok(UniformVerdict::Witness(d));
        }
    }
    let mut refutation = Vec::new();
    for j in 0..=max_exp {
        let d = pow2_neg(j as u64);
        match vals.iter().filter(|(_, a, b)| &a.lo + &d > b.hi).min_by_key(|(s, _, _)| std::cmp::Reverse(s.outputs())) {
            Some((s, a, b)) => refutation.push(Violation { d, play: s.clone(), below: a.clone(), above: b.clone() }),
            None => {
                return Err(CoreError::Inconclusive(format!(
                    "no margin 2^-{j} certified and none refuted within depth {search_depth}"
                )))
            }
        }
    }
    Ok(UniformVerdict::Refuted(refutation))
}
