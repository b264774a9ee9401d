//! The acceptance suite run by `probstrat selftest` and the `acceptance`
//! test target. Each criterion returns a one-line summary or the reason
//! it failed.

use std::time::Instant;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus;
use crate::error::CoreError;
use crate::play::Play;
use crate::rational::{pow2_neg, rat, Rational};
use crate::semantics::eval::trace_value;
use crate::semantics::interval::Interval;
use crate::semantics::measure::MeasureView;
use crate::semantics::support::support_enum;
use crate::signature::{Arity, Signature, Symbol};
use crate::syntax::parse_term;
use crate::term::Term;

#[derive(Clone, Debug)]
pub struct Criterion {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub millis: u128,
}

type Outcome = Result<String, String>;

pub const NAMES: [&str; 10] = [
    "introductory trace table",
    "trace equivalence of the interleaved pair",
    "trace equivalence of the indexed pair",
    "law soundness",
    "canonical forms match bisimilarity",
    "ff normal forms decide trace equality",
    "subsplit reassembles",
    "impersonation and cancellation",
    "steady pipeline",
    "games",
];

pub fn run(id: usize) -> Criterion {
    assert!((1..=10).contains(&id), "criteria are numbered 1 to 10");
    let start = Instant::now();
    let out: Outcome = match id {
        1 => trace_table(),
        2 => interleaved_pair(),
        3 => indexed_pair(),
        4 => law_soundness(),
        5 => bisimilarity(),
        6 => ff_decision(),
        7 => subsplit_reassembly(),
        8 => impersonation(),
        9 => steady_pipeline(),
        _ => games(),
    };
    let (passed, detail) = match out {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    Criterion { id, name: NAMES[id - 1], passed, detail, millis: start.elapsed().as_millis() }
}

pub fn run_all() -> Vec<Criterion> {
    (1..=10).map(run).collect()
}

impl std::fmt::Display for Criterion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mark = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{mark}] {:>2} {} ({} ms): {}", self.id, self.name, self.millis, self.detail)
    }
}

fn err(e: CoreError) -> String {
    e.to_string()
}

fn eps() -> Rational {
    pow2_neg(20)
}

fn rng(salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed_0000 + salt)
}

fn load(sig: &str, prog: &str) -> Result<(Signature, Term), String> {
    corpus::load(sig, prog).map_err(err)
}

/// Every play with at most `depth` outputs over `sig`, with ω-ary inputs
/// drawn from `0..omega`.
fn all_plays(sig: &Signature, depth: usize, omega: u64) -> Vec<Play> {
    let mut out = vec![];
    let mut frontier = vec![Play::empty()];
    for _ in 0..depth {
        let mut next = vec![];
        for s in &frontier {
            for d in sig.ops() {
                if d.params > 0 {
                    continue;
                }
                let k = Symbol::new(&d.name);
                let sk = s.with_output(k);
                let inputs = match &d.arity {
                    Arity::Finite(ls) => ls.len() as u64,
                    Arity::Omega => omega,
                };
                for i in 0..inputs {
                    next.push(sk.with_input(i));
                }
                out.push(sk);
            }
        }
        frontier = next;
    }
    out
}

fn exact(v: &Interval, s: &Play) -> Result<Rational, String> {
    v.value().cloned().ok_or_else(|| format!("value on `{s}` is not exact: {v}"))
}

fn trace_table() -> Outcome {
    let (sig, t) = load(corpus::HAPPY_SIG, corpus::HAPPY)?;
    let listed: Vec<(&str, Rational)> = vec![
        ("Happy", rat(1, 1)),
        ("Happy?0.Bye", rat(1, 1)),
        ("Happy?1.Bye", rat(1, 2)),
        ("Happy?1.Happy", rat(1, 2)),
        ("Happy?1.Happy?0.Bye", rat(1, 6)),
        ("Happy?1.Happy?1.Happy", rat(1, 6)),
        ("Happy?1.Happy?1.Happy?0.Bye", rat(1, 6)),
        ("Happy?1.Happy?1.Happy?1.Bye", rat(1, 6)),
    ];
    let mut wrong = vec![];
    let mut table = std::collections::BTreeMap::new();
    for (s, v) in &listed {
        let p = Play::parse_loose(s).map_err(err)?;
        table.insert(p, v.clone());
    }
    let plays = all_plays(&sig, 4, 3);
    for s in &plays {
        let got = exact(&trace_value(&t, s, &eps()), s)?;
        let want = table.get(s).cloned().unwrap_or_else(Rational::zero);
        if got != want {
            wrong.push(format!("{s} = {got}, table says {want}"));
        }
    }
    if wrong.is_empty() {
        Ok(format!("{} plays to depth 4 match exactly", plays.len()))
    } else {
        Err(format!("{} of {} plays differ: {}", wrong.len(), plays.len(), wrong.join("; ")))
    }
}

/// `Σ_{n<K} 2^{-n-1}·⟦M_n⟧(s)` for explicitly written branches `M_n`,
/// and the weight `2^{-K}` left out.
fn truncation_oracle(branch: impl Fn(u64) -> String, k: u64, s: &Play) -> Result<(Rational, Rational), String> {
    let mut lo = Rational::zero();
    for n in 0..k {
        let t = parse_term(&branch(n)).map_err(err)?;
        let v = trace_value(&t, s, &Rational::zero());
        lo += pow2_neg(n + 1) * exact(&v, s)?;
    }
    Ok((lo, pow2_neg(k)))
}

fn nested(outer: &str, inner: &str, n: u64) -> String {
    format!("{}{}{}", format!("star({outer}, ").repeat(n as usize), inner, ")".repeat(n as usize))
}

fn interleaved_pair() -> Outcome {
    use crate::equivalence::trace_equiv::{trace_equiv, TraceVerdict};
    let (_, m) = load(corpus::TRACE1_SIG, corpus::TRACE1_M)?;
    let (_, n) = load(corpus::TRACE1_SIG, corpus::TRACE1_N)?;
    let v = trace_equiv(&m, &n, 8, &eps(), 0).map_err(err)?;
    let TraceVerdict::EquivalentUpTo { plays, .. } = v else {
        return Err(format!("expected equivalence, got {v:?}"));
    };
    let mut support: Vec<Play> = vec![];
    for t in [&m, &n] {
        for (s, _) in support_enum(&MeasureView::of_term(t), 8, &eps(), 0).map_err(err)? {
            support.push(s);
        }
    }
    support.sort();
    support.dedup();
    let k = 30;
    for s in &support {
        let a = exact(&trace_value(&m, s, &eps()), s)?;
        let b = exact(&trace_value(&n, s, &eps()), s)?;
        if a != b {
            return Err(format!("`{s}`: {a} vs {b}"));
        }
        let (lo_m, tail) = truncation_oracle(|j| nested("b", "star(a, c)", j), k, s)?;
        let (lo_n, _) = truncation_oracle(|j| nested("a", "star(b, c)", j), k, s)?;
        if a < lo_m || a > &lo_m + &tail || b < lo_n || b > &lo_n + &tail {
            return Err(format!("`{s}`: {a} outside the truncation bounds [{lo_m}, +{tail}]"));
        }
    }
    for s in ["star?0.a", "star?0.b"] {
        let p = Play::parse_loose(s).map_err(err)?;
        let (a, b) = (trace_value(&m, &p, &eps()), trace_value(&n, &p, &eps()));
        if a != Interval::exact(rat(1, 2)) || b != a {
            return Err(format!("`{s}`: {a} and {b}, expected 1/2"));
        }
    }
    Ok(format!("equivalent to depth 8 ({plays} plays compared); {} support plays agree exactly with the truncation oracle", support.len()))
}

fn indexed_pair() -> Outcome {
    use crate::equivalence::trace_equiv::trace_equiv;
    let (_, m) = load(corpus::TRACE2_SIG, corpus::TRACE2_M)?;
    let (_, n) = load(corpus::TRACE2_SIG, corpus::TRACE2_N)?;
    for (s, want) in [("c[0,0]", rat(1, 2)), ("star?1.c[1,0]", rat(1, 4))] {
        let p = Play::parse_loose(s).map_err(err)?;
        for (name, t) in [("M", &m), ("N", &n)] {
            let v = trace_value(t, &p, &eps());
            if v != Interval::exact(want.clone()) {
                return Err(format!("{name} on `{s}` is {v}, expected {want}"));
            }
        }
    }
    let v = trace_equiv(&m, &n, 6, &eps(), 0).map_err(err)?;
    if !v.is_equivalent() {
        return Err(format!("expected equivalence, got {v:?}"));
    }
    Ok("exact values 1/2 and 1/4 on both sides; equivalent to depth 6".into())
}

fn full_depth(a: &Term, b: &Term) -> usize {
    a.depth().unwrap_or(0).max(b.depth().unwrap_or(0)) as usize + 1
}

fn law_soundness() -> Outcome {
    use crate::equivalence::laws::{check_law_soundness, Law};
    use crate::random::{random_instance, Ops};
    let ops = Ops::default();
    let mut rng = rng(4);
    for i in 0..500 {
        let law = Law::ALL[i % Law::ALL.len()];
        let depth = rng.gen_range(1..=2);
        let (l, r) = random_instance(&mut rng, &ops, law, depth);
        if let Some(s) = check_law_soundness(law, &l, &r, full_depth(&l, &r)).map_err(err)? {
            return Err(format!("{law}: `{}` and `{}` differ on `{s}`", l.to_dsl(), r.to_dsl()));
        }
    }
    Ok("500 instances over 7 laws, no counterplay".into())
}

/// `t` with one explicit subterm swapped for a fresh random term.
fn mutate(rng: &mut ChaCha8Rng, ops: &crate::random::Ops, t: &Term) -> Term {
    let mut path = vec![];
    let mut cur = t;
    loop {
        let subs = cur.subterms();
        if subs.is_empty() || rng.gen_range(0..3) == 0 {
            break;
        }
        let i = rng.gen_range(0..subs.len());
        path.push(i);
        cur = cur.at(&path[path.len() - 1..]).expect("position exists");
    }
    let fresh = crate::random::random_term(rng, ops, 1);
    t.replace_at(&path, fresh).expect("position exists")
}

fn rewritten(rng: &mut ChaCha8Rng, ops: &crate::random::Ops, t: &Term, steps: usize, tensor: bool) -> Term {
    let mut u = t.clone();
    for _ in 0..steps {
        u = crate::random::random_rewrite(rng, ops, &u, tensor).1;
    }
    u
}

fn bisimilarity() -> Outcome {
    use crate::equivalence::{bisimilar, canon_bisim};
    use crate::random::{random_rewrite, random_term, Ops};
    let ops = Ops::default();
    let mut rng = rng(5);
    let mut same = 0;
    for i in 0..1000 {
        let t = random_term(&mut rng, &ops, 3);
        let k = rng.gen_range(1..=4);
        let u = match i % 3 {
            0 => rewritten(&mut rng, &ops, &t, k, false),
            1 => random_term(&mut rng, &ops, k.min(3)),
            _ => mutate(&mut rng, &ops, &t),
        };
        let canon_eq = canon_bisim(&t).map_err(err)? == canon_bisim(&u).map_err(err)?;
        let bisim = bisimilar(&t, &u).map_err(err)?.bisimilar;
        if canon_eq != bisim {
            return Err(format!("canonical forms say {canon_eq}, refinement says {bisim}: `{}` / `{}`", t.to_dsl(), u.to_dsl()));
        }
        same += bisim as usize;
        let c = canon_bisim(&t).map_err(err)?;
        let mut v = t.clone();
        for _ in 0..10 {
            let (law, w) = random_rewrite(&mut rng, &ops, &v, false);
            if canon_bisim(&w).map_err(err)? != c {
                return Err(format!("{law} rewrite `{}` -> `{}` changed the canonical form", v.to_dsl(), w.to_dsl()));
            }
            v = w;
        }
    }
    Ok(format!("1000 pairs agree ({same} bisimilar); canonical forms stable under 10000 rewrites"))
}

fn ff_decision() -> Outcome {
    use crate::equivalence::trace_equiv::exact_counterplay;
    use crate::normalforms::ff_nf;
    use crate::random::{random_term, Ops};
    let ops = Ops::default();
    let mut rng = rng(6);
    let mut equal = 0;
    for i in 0..200 {
        let t = random_term(&mut rng, &ops, 3);
        let u = match i % 3 {
            0 => rewritten(&mut rng, &ops, &t, 6, true),
            1 => random_term(&mut rng, &ops, 2),
            _ => mutate(&mut rng, &ops, &t),
        };
        let nf_eq = ff_nf(&t).map_err(err)? == ff_nf(&u).map_err(err)?;
        let trace_eq = exact_counterplay(&t, &u, full_depth(&t, &u)).map_err(err)?.is_none();
        if nf_eq != trace_eq {
            return Err(format!("normal forms say {nf_eq}, traces say {trace_eq}: `{}` / `{}`", t.to_dsl(), u.to_dsl()));
        }
        equal += trace_eq as usize;
    }
    Ok(format!("200 pairs agree ({equal} trace equal)"))
}

fn gap(a: &Interval, b: &Interval) -> Rational {
    let d1 = &a.lo - &b.hi;
    let d2 = &b.lo - &a.hi;
    let d = if d1 > d2 { d1 } else { d2 };
    if d < Rational::zero() {
        Rational::zero()
    } else {
        d
    }
}

fn subsplit_reassembly() -> Outcome {
    use crate::equivalence::trace_equiv::exact_counterplay;
    use crate::normalforms::subsplit;
    use crate::random::{random_prob, random_term, Ops};
    let ops = Ops::default();
    let mut rng = rng(7);
    for _ in 0..90 {
        let (l, r) = (random_term(&mut rng, &ops, 2), random_term(&mut rng, &ops, 2));
        let p = random_prob(&mut rng);
        let m = rewritten(&mut rng, &ops, &Term::choice(p.clone(), l.clone(), r), 4, true);
        let rest = subsplit(&m, &l, &p, &eps()).map_err(err)?;
        let back = Term::choice(p.clone(), l.clone(), rest);
        if let Some(s) = exact_counterplay(&back, &m, full_depth(&back, &m)).map_err(err)? {
            return Err(format!("`{}` split off `{}` at {p} differs on `{s}`", m.to_dsl(), l.to_dsl()));
        }
    }
    let (_, notwnf) = load(corpus::NOTWNF_SIG, corpus::NOTWNF)?;
    let (_, trace1) = load(corpus::TRACE1_SIG, corpus::TRACE1_M)?;
    let tol = eps() * rat(2, 1);
    for k in 0..10u64 {
        let (m, l) = if k < 5 {
            (&notwnf, format!("{}c{}", "a(".repeat(k as usize), ")".repeat(k as usize)))
        } else {
            (&trace1, nested("b", "star(a, c)", k - 5))
        };
        let l = parse_term(&l).map_err(err)?;
        let p = pow2_neg(k % 5 + 1);
        let rest = subsplit(m, &l, &p, &eps()).map_err(err)?;
        let back = Term::choice(p.clone(), l.clone(), rest);
        for (s, _) in support_enum(&MeasureView::of_term(m), 8, &eps(), 0).map_err(err)? {
            let (a, b) = (trace_value(&back, &s, &eps()), trace_value(m, &s, &eps()));
            if gap(&a, &b) > tol {
                return Err(format!("`{}` split off `{}` differs on `{s}`: {a} vs {b}", m.to_dsl(), l.to_dsl()));
            }
        }
    }
    Ok("90 finite splits reassemble exactly; 10 generated splits within 2ε to depth 8".into())
}

fn impersonation() -> Outcome {
    use crate::normalforms::impersonate;
    let (_, m) = load(corpus::TRACE1_SIG, corpus::TRACE1_M)?;
    let (_, n) = load(corpus::TRACE1_SIG, corpus::TRACE1_N)?;
    let cert = impersonate(&m, &n, 6, &eps()).map_err(err)?;
    for (j, v) in cert.check_rounds(6, &eps(), 0).map_err(err)?.into_iter().enumerate() {
        if !v.is_equivalent() {
            return Err(format!("round {j} fails: {v:?}"));
        }
    }
    let u = std::sync::Arc::new(cert.residual.clone());
    let half = rat(1, 2);
    let left = Term::Choice { p: half.clone(), left: std::sync::Arc::new(m.clone()), right: u.clone() };
    let right = Term::Choice { p: half, left: std::sync::Arc::new(n.clone()), right: u };
    let mut plays = vec![];
    for t in [&left, &right] {
        plays.extend(support_enum(&MeasureView::of_term(t), 6, &eps(), 0).map_err(err)?.into_iter().map(|(s, _)| s));
    }
    plays.sort();
    plays.dedup();
    for s in &plays {
        let (a, b) = (trace_value(&left, s, &eps()), trace_value(&right, s, &eps()));
        if a.disjoint(&b) {
            return Err(format!("`{s}`: {a} vs {b}"));
        }
    }
    Ok(format!("6 rounds certified; both mixtures agree on {} plays to depth 6", plays.len()))
}

fn steady_pipeline() -> Outcome {
    use crate::equivalence::{tensor_equiv_finitary, EquivVerdict, TensorOptions};
    use crate::normalforms::uniform::Violation;
    use crate::normalforms::{certify_steady, is_uniformly_below, steady_nf, UniformVerdict};
    use crate::random::{random_prob, random_term, Ops};
    use crate::semantics::measure::measure_scale;
    let ops = Ops::default();
    let mut rng = rng(9);
    let families: Vec<Term> = [(corpus::NOTWNF_SIG, corpus::NOTWNF), (corpus::TRACE1_SIG, corpus::TRACE1_M), (corpus::TRACE1_SIG, corpus::TRACE1_N)]
        .iter()
        .map(|(s, p)| load(s, p).map(|x| x.1))
        .collect::<Result<_, _>>()?;
    for i in 0..100 {
        let base = random_term(&mut rng, &ops, 3);
        let t = if i % 4 == 0 {
            let p = random_prob(&mut rng);
            Term::choice(p, base, families[(i / 4) % families.len()].clone())
        } else {
            base
        };
        let form = steady_nf(&t).map_err(err)?;
        certify_steady(&form, &t, 3, 6, &eps()).map_err(|e| format!("`{}`: {e}", t.to_dsl()))?;
    }

    let (_, m) = load(corpus::TRACE1_SIG, corpus::TRACE1_M)?;
    let (_, n) = load(corpus::TRACE1_SIG, corpus::TRACE1_N)?;
    let opts = TensorOptions::default();
    let report = tensor_equiv_finitary(&m, &n, &opts).map_err(err)?;
    let EquivVerdict::ProvedEquivalent(proof) = &report.verdict else {
        return Err(format!("tensor check did not prove the pair: {:?}", report.verdict));
    };
    proof.replay().map_err(err)?;
    let il = report.interleaving.as_ref().ok_or("no interleaving reported")?;
    for p in &il.block_proofs {
        p.replay().map_err(err)?;
    }

    let (_, inf) = load(corpus::INF_SIG, corpus::INF)?;
    match tensor_equiv_finitary(&inf, &inf, &opts) {
        Err(CoreError::SignatureNotFinitary(_)) => {}
        other => return Err(format!("ω-ary program: expected SignatureNotFinitary, got {other:?}")),
    }
    let total = MeasureView::of_term(&inf);
    let half = measure_scale(&total, &rat(1, 2));
    let UniformVerdict::Refuted(vs) = is_uniformly_below(&half, &total, 2, 10, &eps()).map_err(err)? else {
        return Err("half of the ω-ary program came out uniformly below it".into());
    };
    if vs.len() != 11 {
        return Err(format!("{} refuted margins, expected 2^0 … 2^-10", vs.len()));
    }
    for Violation { d, play, below, above } in &vs {
        let shape = match (&play.moves[..], &play.last) {
            ([(b, n)], Some(c)) if &*b.name == "b" && &*c.name == "c" && c.idx.len() == 1 && c.idx[0] <= *n => Some(*n),
            _ => None,
        };
        let Some(n) = shape else {
            return Err(format!("refuting play `{play}` is not of the form b?n.c[i]"));
        };
        let v = rat(1, n as i64 + 1);
        if *above != Interval::exact(v.clone()) || *below != Interval::exact(&v / rat(2, 1)) || &below.lo + d <= above.hi {
            return Err(format!("`{play}` does not refute margin {d}: {below} vs {above}"));
        }
    }
    let worst = vs.last().map(|v| v.play.to_string()).unwrap_or_default();
    Ok(format!(
        "100 steady forms certified; pair proved in {} blocks with a replayed proof; ω-ary program rejected and 11 margins refuted (last by `{worst}`)",
        il.block_proofs.len()
    ))
}

fn games() -> Outcome {
    use crate::games::{cont_prob, cont_prob_detailed, definability_decomp, Counterstrategy};
    use crate::random::{random_prob, random_term, Ops};
    let (_, notwnf) = load(corpus::NOTWNF_SIG, corpus::NOTWNF)?;
    let mv = MeasureView::of_term(&notwnf);
    let levels = cont_prob(&mv, &Counterstrategy::constant(0), 20, &pow2_neg(40)).map_err(err)?;
    for (m, v) in levels.iter().enumerate() {
        if *v != Interval::exact(pow2_neg(m as u64)) {
            return Err(format!("P^{m} = {v}, expected 2^-{m}"));
        }
    }

    let ops = Ops::default();
    let mut rng = rng(10);
    for i in 0..100 {
        let base = random_term(&mut rng, &ops, 3);
        let t = if i % 5 == 0 { Term::choice(random_prob(&mut rng), base, notwnf.clone()) } else { base };
        let rho = match rng.gen_range(0..5) {
            0 => Counterstrategy::fail(),
            1 => Counterstrategy::constant(0),
            2 => Counterstrategy::constant(1),
            3 => Counterstrategy::round_robin(),
            _ => {
                let k = ops.0[rng.gen_range(0..ops.0.len())].0.clone();
                Counterstrategy::constant(1).with(Play::empty().with_output(k), Some(0)).map_err(err)?
            }
        };
        let cp = cont_prob_detailed(&MeasureView::of_term(&t), &rho, 6, &eps()).map_err(err)?;
        for k in 0..6 {
            let (p, f, q) = (&cp.levels[k], &cp.fails[k], &cp.levels[k + 1]);
            if !p.is_exact() || !f.is_exact() || *p != f.clone() + q.clone() {
                return Err(format!("`{}` under {rho}: P^{k} = {p} but F^{k} + P^{} = {f} + {q}", t.to_dsl(), k + 1));
            }
        }
    }

    let dec = definability_decomp(&notwnf, 4, 16, &eps()).map_err(err)?;
    let sum = dec.partial_sum();
    let tol = pow2_neg(4) + pow2_neg(20);
    let mut plays: Vec<Play> = vec![];
    for m in [&mv, &sum] {
        plays.extend(support_enum(m, 4, &eps(), 0).map_err(err)?.into_iter().map(|(s, _)| s));
    }
    plays.sort();
    plays.dedup();
    for s in &plays {
        let (a, b) = (mv.value(s, &eps()).map_err(err)?, sum.value(s, &eps()).map_err(err)?);
        let far = if &a.hi - &b.lo > &b.hi - &a.lo { &a.hi - &b.lo } else { &b.hi - &a.lo };
        if far > tol {
            return Err(format!("decomposition misses `{s}` by {far}"));
        }
    }
    Ok(format!("P^m = 2^-m for m ≤ 20; 100 recurrences exact; 4-part decomposition within 2^-4 + 2^-20 on {} plays", plays.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_play_to_depth_two() {
        let sig = Signature::parse("op Bye : []\nop Happy : [yes, no]\nop Age : omega").unwrap();
        // Bye, Happy, Age; then 2 + 3 continuations of each of the 5 passive ones
        assert_eq!(all_plays(&sig, 2, 3).len(), 3 + 5 * 3);
    }

    #[test]
    fn truncation_oracle_brackets_a_single_branch() {
        let s = Play::parse_loose("star?0.a").unwrap();
        let (lo, tail) = truncation_oracle(|j| nested("b", "star(a, c)", j), 10, &s).unwrap();
        assert_eq!((lo, tail), (rat(1, 2), pow2_neg(10)));
    }
}
