//! Tensor equivalence over finitary signatures by interleaving the prefix
//! sums of two steady normal forms.

use std::sync::{Arc, Mutex};

use num_traits::Zero;

use crate::equivalence::proof::{ff_proof, RewriteProof};
use crate::equivalence::trace_equiv::{trace_equiv, TraceVerdict};
use crate::error::CoreError;
use crate::normalforms::founded::{ff_nf, measure_to_wfnf};
use crate::normalforms::steady::{certify_steady, steady_nf, SteadyForm};
use crate::normalforms::uniform::{is_uniformly_below, omega_probes, support_with_probes, UniformVerdict};
use crate::play::Play;
use crate::rational::{one, pow2_neg, Rational};
use crate::semantics::interval::Interval;
use crate::semantics::measure::{measure_add, measure_sub, MeasureView};
use crate::term::Term;

#[derive(Clone, Debug)]
pub enum EquivVerdict {
    Distinguished { play: Play, left: Interval, right: Interval },
    EquivalentUpTo { depth: usize, eps: Rational },
    ProvedEquivalent(RewriteProof),
}

impl From<TraceVerdict> for EquivVerdict {
    fn from(v: TraceVerdict) -> Self {
        match v {
            TraceVerdict::Distinguished { play, left, right } => EquivVerdict::Distinguished { play, left, right },
            TraceVerdict::EquivalentUpTo { depth, eps, .. } => EquivVerdict::EquivalentUpTo { depth, eps },
        }
    }
}

#[derive(Clone, Debug)]
pub struct TensorOptions {
    pub rounds: usize,
    pub depth: usize,
    pub eps: Rational,
    pub omega_inputs: u64,
    /// Largest `j` with candidate margin `2^{-j}`.
    pub max_exp: u32,
    /// How far past the previous cut a new cut is searched for.
    pub search: u64,
    /// Depth bound for enumerating the support of a prefix sum.
    pub support_depth: usize,
}

impl Default for TensorOptions {
    fn default() -> Self {
        TensorOptions {
            rounds: 6,
            depth: 12,
            eps: pow2_neg(20),
            omega_inputs: 4,
            max_exp: 24,
            search: 48,
            support_depth: 96,
        }
    }
}

/// Cut sequences with `PM(m_r) ≺ PN(n_r) ≺ PM(m_{r+1})`, the differences
/// `a_r·U_r = PN(n_r) − PM(m_r)` and `b_r·V_r = PM(m_{r+1}) − PN(n_r)`, and a
/// proof of each block identity.
#[derive(Clone, Debug, Default)]
pub struct Interleaving {
    pub m: Vec<u64>,
    pub n: Vec<u64>,
    pub a: Vec<Rational>,
    pub b: Vec<Rational>,
    pub u: Vec<Term>,
    pub v: Vec<Term>,
    /// Margins certified for the two halves of each round.
    pub margins: Vec<(Rational, Rational)>,
    pub block_proofs: Vec<RewriteProof>,
    /// Weight `2^{-m_R}` of the part of the left form not yet covered.
    pub residual: Rational,
}

#[derive(Clone, Debug)]
pub struct TensorReport {
    pub verdict: EquivVerdict,
    pub interleaving: Option<Interleaving>,
}

fn prefix_sum(f: &SteadyForm, lo: u64, hi: u64, scale: &Rational) -> Term {
    Term::sum((lo..hi).map(|i| (pow2_neg(i + 1) / scale, f.components.get(i))).collect())
}

/// Scaled component measures `2^{-i-1}·⟦P_i⟧`, kept for the whole run so
/// that their value caches are shared between prefixes.
struct Views<'a> {
    form: &'a SteadyForm,
    comps: Mutex<Vec<MeasureView>>,
}

impl<'a> Views<'a> {
    fn new(form: &'a SteadyForm) -> Self {
        Views { form, comps: Mutex::new(Vec::new()) }
    }

    fn component(&self, i: u64) -> MeasureView {
        let mut cs = self.comps.lock().unwrap();
        while cs.len() as u64 <= i {
            let j = cs.len() as u64;
            // Only values are read here, so the merged trace-equal form is
            // used when there is one; it is much cheaper to evaluate.
            let c = self.form.components.get(j);
            let c = ff_nf(&c).map(Arc::new).unwrap_or(c);
            cs.push(MeasureView::scaled_term(c, pow2_neg(j + 1)));
        }
        cs[i as usize].clone()
    }

    fn prefix(&self, m: u64) -> MeasureView {
        measure_add((0..m).map(|i| self.component(i)).collect())
    }
}

fn margin(f: &Views, m: u64, g: &Views, n: u64, max_exp: u32, opts: &TensorOptions) -> Result<Option<Rational>, CoreError> {
    match is_uniformly_below(&f.prefix(m), &g.prefix(n), opts.support_depth, max_exp, &Rational::zero()) {
        Ok(UniformVerdict::Witness(d)) => Ok(Some(d)),
        Ok(UniformVerdict::Refuted(_)) | Err(CoreError::Inconclusive(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Smallest `k ∈ (after, after + search]` with `prefix_f(m) ≺ prefix_g(k)`.
///
/// The support of `prefix_f(m)` is enumerated once and the values of
/// `prefix_g(k)` on it are accumulated one component at a time; the cut
/// found is then re-checked from scratch.
fn next_cut(f: &Views, m: u64, g: &Views, after: Option<u64>, opts: &TensorOptions) -> Result<(u64, Rational), CoreError> {
    let start = after.map_or(1, |x| x + 1);
    let zero = Rational::zero();
    let sigma = f.prefix(m);
    let plays = support_with_probes(&sigma, opts.support_depth, &zero, &omega_probes(4, opts.max_exp))?;
    let below: Vec<Rational> = plays.iter().map(|s| sigma.value(s, &zero).map(|v| v.hi)).collect::<Result<_, _>>()?;
    let mut above = vec![Rational::zero(); plays.len()];
    let add = |above: &mut Vec<Rational>, i: u64| -> Result<(), CoreError> {
        let c = g.component(i);
        for (acc, s) in above.iter_mut().zip(&plays) {
            *acc += c.value(s, &zero)?.lo;
        }
        Ok(())
    };
    for i in 0..start - 1 {
        add(&mut above, i)?;
    }
    for k in start..start + opts.search {
        add(&mut above, k - 1)?;
        let gap = below.iter().zip(&above).map(|(a, b)| b - a).min().unwrap_or_else(one);
        if gap > zero {
            // Supports shrink geometrically along the cuts, so the candidate
            // margins may go past `max_exp`.
            let mut j = 0;
            while pow2_neg(j as u64) > gap {
                j += 1;
            }
            if let Some(d) = margin(f, m, g, k, j.max(opts.max_exp), opts)? {
                return Ok((k, d));
            }
        }
    }
    Err(CoreError::WitnessSearchExhausted(format!("no cut in [{start}, {}) is uniformly above prefix {m}", start + opts.search)))
}

fn block_proof(lhs: Term, rhs: Term) -> Result<RewriteProof, CoreError> {
    let p = ff_proof(&lhs, &rhs)?.ok_or_else(|| CoreError::Inconclusive("block identity has distinct normal forms".into()))?;
    p.replay()?;
    Ok(p)
}

fn choice_or(p: Rational, l: &Term, r: &Term) -> Term {
    Term::Choice { p, left: Arc::new(l.clone()), right: Arc::new(r.clone()) }
}

pub fn tensor_equiv_finitary(t1: &Term, t2: &Term, opts: &TensorOptions) -> Result<TensorReport, CoreError> {
    let left = steady_nf(t1)?;
    let right = steady_nf(t2)?;
    let pre = trace_equiv(t1, t2, opts.depth, &opts.eps, opts.omega_inputs)?;
    if !pre.is_equivalent() {
        return Ok(TensorReport { verdict: pre.into(), interleaving: None });
    }
    if t1 == t2 {
        let il = Interleaving {
            m: (0..opts.rounds as u64).collect(),
            n: (0..opts.rounds as u64).collect(),
            a: vec![Rational::zero(); opts.rounds],
            b: vec![Rational::zero(); opts.rounds],
            residual: pow2_neg(opts.rounds as u64),
            ..Interleaving::default()
        };
        return Ok(TensorReport { verdict: EquivVerdict::ProvedEquivalent(RewriteProof::refl(t1)), interleaving: Some(il) });
    }
    let certify = |f: &SteadyForm, t: &Term| certify_steady(f, t, 3, opts.depth.min(8), &opts.eps);
    certify(&left, t1)?;
    certify(&right, t2)?;

    let (lv, rv) = (Views::new(&left), Views::new(&right));
    let mut il = Interleaving { m: vec![0], ..Interleaving::default() };
    for r in 0..opts.rounds {
        let mr = il.m[r];
        let (nr, d1) = next_cut(&lv, mr, &rv, il.n.last().copied(), opts)?;
        let (m_next, d2) = next_cut(&rv, nr, &lv, Some(mr), opts)?;
        let (pm, pn, pm2) = (lv.prefix(mr), rv.prefix(nr), lv.prefix(m_next));
        let (a, u) = measure_to_wfnf(&measure_sub(&pn, &pm), opts.support_depth, &Rational::zero())?;
        let (b, v) = measure_to_wfnf(&measure_sub(&pm2, &pn), opts.support_depth, &Rational::zero())?;
        il.n.push(nr);
        il.m.push(m_next);
        il.a.push(a);
        il.b.push(b);
        il.u.push(u);
        il.v.push(v);
        il.margins.push((d1, d2));
    }
    for r in 0..opts.rounds {
        let (a, b) = (&il.a[r], &il.b[r]);
        let w = a + b;
        il.block_proofs.push(block_proof(prefix_sum(&left, il.m[r], il.m[r + 1], &w), choice_or(a / &w, &il.u[r], &il.v[r]))?);
        if r == 0 {
            il.block_proofs.push(block_proof(prefix_sum(&right, 0, il.n[0], a), il.u[0].clone())?);
        }
        if r + 1 < opts.rounds {
            let a2 = &il.a[r + 1];
            let w = b + a2;
            il.block_proofs.push(block_proof(
                prefix_sum(&right, il.n[r], il.n[r + 1], &w),
                choice_or(b / &w, &il.v[r], &il.u[r + 1]),
            )?);
        }
    }
    // PM(m_R) = PN(n_{R-1}) + b_{R-1}·V_{R-1}, normalized to weight 1.
    let last = opts.rounds - 1;
    let mr = il.m[opts.rounds];
    let w = one() - pow2_neg(mr);
    let lhs = prefix_sum(&left, 0, mr, &w);
    let Term::Sum { coeffs, mut branches, .. } = prefix_sum(&right, 0, il.n[last], &w) else { unreachable!() };
    let mut cs = coeffs.explicit;
    cs.push(&il.b[last] / &w);
    branches.push(Arc::new(il.v[last].clone()));
    let rhs = Term::sum(cs.into_iter().zip(branches).collect());
    let proof = block_proof(lhs, rhs)?;
    il.residual = pow2_neg(mr);
    Ok(TensorReport { verdict: EquivVerdict::ProvedEquivalent(proof), interleaving: Some(il) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equivalence::laws::check_law_soundness;
    use crate::syntax::parse_term;

    fn opts(rounds: usize) -> TensorOptions {
        TensorOptions { rounds, ..TensorOptions::default() }
    }

    #[test]
    fn identical_terms() {
        let t = parse_term("f(a +[1/2] b)").unwrap();
        let r = tensor_equiv_finitary(&t, &t, &opts(3)).unwrap();
        let il = r.interleaving.unwrap();
        assert_eq!(il.m, il.n);
        assert!(matches!(r.verdict, EquivVerdict::ProvedEquivalent(_)));
    }

    #[test]
    fn distinguished_terms() {
        let a = parse_term("a(c)").unwrap();
        let b = parse_term("b(c)").unwrap();
        let r = tensor_equiv_finitary(&a, &b, &opts(2)).unwrap();
        assert!(matches!(r.verdict, EquivVerdict::Distinguished { .. }));
    }

    #[test]
    fn late_and_early_choice() {
        let a = parse_term("f(a, b) +[1/2] f(b, a)").unwrap();
        let b = parse_term("f(a +[1/2] b, b +[1/2] a)").unwrap();
        let r = tensor_equiv_finitary(&a, &b, &opts(3)).unwrap();
        let EquivVerdict::ProvedEquivalent(p) = r.verdict else { panic!("{:?}", r.verdict) };
        p.replay().unwrap();
        let il = r.interleaving.unwrap();
        assert!(il.m.windows(2).all(|w| w[0] < w[1]) && il.n.windows(2).all(|w| w[0] < w[1]));
        for bp in &il.block_proofs {
            bp.replay().unwrap();
            for s in &bp.steps {
                let a = s.before.at(&s.path).unwrap();
                let b = s.after.at(&s.path).unwrap();
                assert_eq!(check_law_soundness(s.law, a, b, 6).unwrap(), None);
            }
        }
    }

    #[test]
    fn trace_example_pair_is_proved() {
        let m = parse_term("sum { tail(n >= 0) : 1/2^(n+1) : iterate k < n : star(b, _) on star(a, c) }").unwrap();
        let n = parse_term("sum { tail(n >= 0) : 1/2^(n+1) : iterate k < n : star(a, _) on star(b, c) }").unwrap();
        let r = tensor_equiv_finitary(&m, &n, &opts(3)).unwrap();
        let EquivVerdict::ProvedEquivalent(p) = r.verdict else { panic!("{:?}", r.verdict) };
        p.replay().unwrap();
        let il = r.interleaving.unwrap();
        assert_eq!(il.block_proofs.len(), 6);
        assert_eq!(il.residual, pow2_neg(il.m[3]));
        assert!(il.m.windows(2).all(|w| w[0] < w[1]) && il.n.windows(2).all(|w| w[0] < w[1]));
        for (r, (d1, d2)) in il.margins.iter().enumerate() {
            assert!(d1 > &Rational::zero() && d2 > &Rational::zero(), "round {r}");
        }
    }
}
