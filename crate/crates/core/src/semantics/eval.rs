//! Trace values of terms.
//!
//! Generated sum branches are first evaluated symbolically: the generator
//! index `n` is kept as an affine form and every comparison involving it is
//! resolved for all sufficiently large `n`. When that succeeds the branch
//! value is constant from some index `N` on, and the tail contributes
//! `v · tail(N)` exactly. Otherwise the family is truncated and the
//! remaining weight is added as an uncertainty interval.

use std::collections::{BTreeMap, BTreeSet};
use std::rc::Rc;

use num_traits::{One, Zero};

use crate::coeff::CoeffFamily;
use crate::play::{Play, PlayRef};
use crate::rational::Rational;
use crate::semantics::interval::Interval;
use crate::signature::Symbol;
use crate::template::{Affine, Env, RatExpr, SumEntry, Template};
use crate::term::{Children, Generator, Term};

/// Indices beyond which symbolic stabilization gives up.
const MAX_NEED: i64 = 4096;
const MAX_STEPS: usize = 50_000;

pub fn trace_value(t: &Term, s: &Play, eps: &Rational) -> Interval {
    eval(t, s.as_ref(), eps)
}

pub fn eval(t: &Term, s: PlayRef<'_>, eps: &Rational) -> Interval {
    if s.is_empty() {
        return if t.is_empty_sum() { Interval::zero() } else { Interval::one() };
    }
    match t {
        Term::Req { op, children } => {
            if s.head() != Some(op) {
                return Interval::zero();
            }
            match s.split() {
                None => Interval::one(),
                Some((i, rest)) => match child(children, i) {
                    Some(c) => eval(&c, rest, eps),
                    None => Interval::zero(),
                },
            }
        }
        Term::Choice { p, left, right } => {
            let l = eval(left, s, eps);
            let r = eval(right, s, eps);
            l.scale(p) + r.scale(&(Rational::one() - p))
        }
        Term::Sum { coeffs, branches, generator } => eval_sum(coeffs, branches, generator.as_ref(), s, eps),
    }
}

pub(crate) fn child(children: &Children, i: u64) -> Option<std::sync::Arc<Term>> {
    children.get(i)
}

fn eval_sum(
    coeffs: &CoeffFamily,
    branches: &[std::sync::Arc<Term>],
    generator: Option<&Generator>,
    s: PlayRef<'_>,
    eps: &Rational,
) -> Interval {
    let half = eps / Rational::from_integer(2.into());
    let mut acc = Interval::zero();
    for (p, b) in coeffs.explicit.iter().zip(branches) {
        if p.is_zero() {
            continue;
        }
        let v = eval(b, s, &half);
        if !v.hi.is_zero() {
            acc = acc + v.scale(p);
        }
    }
    let Some(gen) = generator else {
        return acc;
    };
    let from = coeffs.explicit_len();
    if let Some((n0, v)) = stabilize(gen, from, s, &half) {
        for n in from..n0 {
            acc = acc + eval(&gen.get(n), s, &half).scale(&coeffs.coeff(n));
        }
        return acc + v.scale(&coeffs.tail(n0));
    }
    let m = coeffs.cut_index(from, &half);
    for n in from..m {
        acc = acc + eval(&gen.get(n), s, &half).scale(&coeffs.coeff(n));
    }
    acc + Interval::upto(coeffs.tail(m))
}

/// Finds `N ≥ from` and `v` such that every branch `n ≥ N` of the generator
/// has value `v` on `s`.
pub fn stabilize(gen: &Generator, from: u64, s: PlayRef<'_>, eps: &Rational) -> Option<(u64, Interval)> {
    let (var, body, env) = match gen {
        Generator::Template { var, body, env, .. } => (var, body, env),
        Generator::Native(g) => return g.stabilizer().and_then(|f| f(from, s, eps)),
    };
    let mut senv: SymEnv = env.iter().map(|(k, v)| (k.clone(), Affine::konst(*v))).collect();
    senv.insert(var.clone(), Affine { a: 1, b: 0 });
    let mut st = Stab { need: from as i64, steps: 0, eps: eps.clone() };
    let v = sym(body, &senv, &None, s, &mut st)?;
    Some((st.need as u64, v))
}

type SymEnv = BTreeMap<String, Affine>;

struct Frame<'a> {
    ctx: &'a Template,
    base: &'a Template,
    var: Option<&'a String>,
    count: Affine,
    env: SymEnv,
    j: i64,
    parent: Option<Rc<Frame<'a>>>,
}

struct Stab {
    need: i64,
    steps: usize,
    eps: Rational,
}

impl Stab {
    fn bump(&mut self, n: i64) -> Option<()> {
        if n > self.need {
            self.need = n;
        }
        (self.need <= MAX_NEED).then_some(())
    }

    /// Eventual truth of `af(n) == v`.
    fn eq_const(&mut self, af: Affine, v: i64) -> Option<bool> {
        if af.a == 0 {
            return Some(af.b == v);
        }
        let diff = v - af.b;
        if diff % af.a == 0 && diff / af.a >= 0 {
            self.bump(diff / af.a + 1)?;
        }
        Some(false)
    }

    /// Eventual truth of `af(n) >= c`.
    fn ge(&mut self, af: Affine, c: i64) -> Option<bool> {
        match af.a.signum() {
            0 => Some(af.b >= c),
            1 => {
                // n >= ceil((c - b) / a)
                let x = c - af.b;
                self.bump(-((-x).div_euclid(af.a)))?;
                Some(true)
            }
            _ => {
                // a n + b >= c  iff  n <= floor((b - c) / -a)
                self.bump((af.b - c).div_euclid(-af.a) + 1)?;
                Some(false)
            }
        }
    }
}

fn concrete_env(vars: &BTreeSet<String>, env: &SymEnv) -> Option<Env> {
    let mut out = Env::new();
    for v in vars {
        let af = env.get(v)?;
        if !af.is_const() {
            return None;
        }
        out.insert(v.clone(), af.b);
    }
    Some(out)
}

fn closed_rat(e: &RatExpr, env: &SymEnv) -> Option<Rational> {
    e.eval(&concrete_env(&e.vars(), env)?).ok()
}

fn sym<'a>(t: &'a Template, env: &SymEnv, holes: &Option<Rc<Frame<'a>>>, s: PlayRef<'_>, st: &mut Stab) -> Option<Interval> {
    st.steps += 1;
    if st.steps > MAX_STEPS {
        return None;
    }
    if s.is_empty() {
        return Some(Interval::one());
    }
    if !matches!(t, Template::Hole) && !t.contains_hole() {
        if let Some(cenv) = concrete_env(&t.free_vars(), env) {
            let term = t.instantiate(&cenv).ok()?;
            return Some(eval(&term, s, &st.eps));
        }
    }
    match t {
        Template::Hole => {
            let f = holes.as_ref()?.clone();
            iterate_from(f.ctx, f.base, f.var, f.count, &f.env, f.j + 1, &f.parent, s, st)
        }
        Template::Req { name, idx, args, rest } => {
            let head: &Symbol = s.head()?;
            if &*head.name != name || head.idx.len() != idx.len() {
                return Some(Interval::zero());
            }
            for (e, v) in idx.iter().zip(&head.idx) {
                let af = e.affine(env)?;
                if !st.eq_const(af, *v as i64)? {
                    return Some(Interval::zero());
                }
            }
            match s.split() {
                None => Some(Interval::one()),
                Some((i, tail)) => {
                    if (i as usize) < args.len() {
                        sym(&args[i as usize], env, holes, tail, st)
                    } else if let Some((var, body)) = rest {
                        let mut e = env.clone();
                        e.insert(var.clone(), Affine::konst(i as i64));
                        sym(body, &e, &None, tail, st)
                    } else {
                        Some(Interval::zero())
                    }
                }
            }
        }
        Template::Choice { p, left, right } => {
            let p = closed_rat(p, env)?;
            let l = sym(left, env, holes, s, st)?;
            let r = sym(right, env, holes, s, st)?;
            Some(l.scale(&p) + r.scale(&(Rational::one() - &p)))
        }
        Template::Sum { entries, tail } => {
            if tail.is_some() {
                return None;
            }
            let mut acc = Interval::zero();
            for e in entries {
                match e {
                    SumEntry::Single(c, b) => {
                        let c = closed_rat(c, env)?;
                        if !c.is_zero() {
                            acc = acc + sym(b, env, holes, s, st)?.scale(&c);
                        }
                    }
                    SumEntry::Comprehension { var, lo, hi, coeff, body } => {
                        let (lo, hi) = (lo.affine(env)?, hi.affine(env)?);
                        if !lo.is_const() || !hi.is_const() || hi.b - lo.b > 10_000 {
                            return None;
                        }
                        let mut e = env.clone();
                        for i in lo.b..=hi.b {
                            e.insert(var.clone(), Affine::konst(i));
                            let c = closed_rat(coeff, &e)?;
                            if !c.is_zero() {
                                acc = acc + sym(body, &e, holes, s, st)?.scale(&c);
                            }
                        }
                    }
                }
            }
            Some(acc)
        }
        Template::Iterate { var, count, ctx, base } => {
            let count = count.affine(env)?;
            iterate_from(ctx, base, var.as_ref(), count, env, 0, holes, s, st)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn iterate_from<'a>(
    ctx: &'a Template,
    base: &'a Template,
    var: Option<&'a String>,
    count: Affine,
    env: &SymEnv,
    j: i64,
    outer: &Option<Rc<Frame<'a>>>,
    s: PlayRef<'_>,
    st: &mut Stab,
) -> Option<Interval> {
    st.steps += 1;
    if st.steps > MAX_STEPS {
        return None;
    }
    if st.ge(Affine { a: count.a, b: count.b - j }, 1)? {
        let frame = Rc::new(Frame { ctx, base, var, count, env: env.clone(), j, parent: outer.clone() });
        let mut e = env.clone();
        if let Some(v) = var {
            e.insert(v.clone(), Affine::konst(j));
        }
        sym(ctx, &e, &Some(frame), s, st)
    } else {
        sym(base, env, outer, s, st)
    }
}

/// Outputs that may follow the play `s` in `t`, found by walking the term
/// and cutting generator families once their remaining weight is `≤ eps`.
/// `s` must be active-ending.
pub fn next_outputs(t: &Term, s: PlayRef<'_>, eps: &Rational, out: &mut BTreeSet<Symbol>) {
    match t {
        Term::Req { op, children } => {
            if s.is_empty() {
                out.insert(op.clone());
                return;
            }
            if s.head() != Some(op) {
                return;
            }
            if let Some((i, rest)) = s.split() {
                if let Some(c) = child(children, i) {
                    next_outputs(&c, rest, eps, out);
                }
            }
        }
        Term::Choice { left, right, .. } => {
            next_outputs(left, s, eps, out);
            next_outputs(right, s, eps, out);
        }
        Term::Sum { coeffs, branches, generator } => {
            for (p, b) in coeffs.explicit.iter().zip(branches) {
                if !p.is_zero() {
                    next_outputs(b, s, eps, out);
                }
            }
            if let Some(gen) = generator {
                let from = coeffs.explicit_len();
                let m = coeffs.cut_index(from, eps).max(from + 1);
                for n in from..m {
                    next_outputs(&gen.get(n), s, eps, out);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{pow2_neg, rat};
    use crate::syntax::parse_term;

    fn val(src: &str, play: &str) -> Interval {
        let t = parse_term(src).unwrap();
        trace_value(&t, &Play::parse_loose(play).unwrap(), &pow2_neg(20))
    }

    const HAPPY: &str = "Happy(Bye, Bye +[1/2] Happy(Bye +[1/3] Happy(Bye, Bye), Bye))";
    const M1: &str = "sum { tail(n >= 0) : 1/2^(n+1) : iterate k < n : star(b, _) on star(a, c) }";

    #[test]
    fn happy_one_sixth() {
        assert_eq!(val(HAPPY, "Happy?1.Happy?0.Bye"), Interval::exact(rat(1, 6)));
        assert_eq!(val(HAPPY, "Happy?1.Happy"), Interval::exact(rat(1, 2)));
        assert_eq!(val(HAPPY, ""), Interval::one());
    }

    #[test]
    fn generated_family_is_exact() {
        assert_eq!(val(M1, "star?0.b"), Interval::exact(rat(1, 2)));
        assert_eq!(val(M1, "star?1.star?0.a"), Interval::exact(rat(1, 4)));
        assert_eq!(val(M1, "star?1.star?1.c"), Interval::exact(rat(1, 4)));
    }

    #[test]
    fn not_well_founded_heads() {
        let t = "sum { tail(n >= 0): 1/2^(n+1) : iterate a n on c }";
        assert_eq!(val(t, "c"), Interval::exact(rat(1, 2)));
        assert_eq!(val(t, "a"), Interval::exact(rat(1, 2)));
        assert_eq!(val(t, "a?0.a?0.a"), Interval::exact(rat(1, 8)));
    }

    #[test]
    fn falls_back_to_intervals() {
        // Branch values depend on n through the choice probability.
        let t = "sum { tail(n >= 0): 1/2^(n+1) : c +[1/(n+2)] d }";
        let v = val(t, "c");
        assert!(!v.is_exact());
        assert!(v.width() <= pow2_neg(20));
        // Oracle: Σ 2^{-n-1} / (n+2), partial sums bracket the value.
        let partial: Rational = (0..60).map(|n| pow2_neg(n + 1) / Rational::from_integer((n + 2).into())).sum();
        assert!(v.lo <= partial.clone() + pow2_neg(60) && partial <= v.hi);
    }
}
