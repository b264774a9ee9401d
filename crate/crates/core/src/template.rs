//! The template grammar used by branch generators: index arithmetic,
//! rational coefficient expressions, `iterate`, bounded comprehensions and
//! nested sums. Templates are instantiated into [`Term`]s on demand.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::coeff::{CoeffFamily, PolyGeo};
use crate::error::CoreError;
use crate::rational::{int, pow, to_dsl, Rational};
use crate::signature::Symbol;
use crate::term::{Children, Generator, Term};

pub type Env = BTreeMap<String, i64>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum IdxExpr {
    Lit(i64),
    Var(String),
    Add(Box<IdxExpr>, Box<IdxExpr>),
    Sub(Box<IdxExpr>, Box<IdxExpr>),
    Mul(Box<IdxExpr>, Box<IdxExpr>),
}

/// `a·n + b` for the single symbolic index `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Affine {
    pub a: i64,
    pub b: i64,
}

impl Affine {
    pub fn konst(b: i64) -> Self {
        Affine { a: 0, b }
    }

    pub fn is_const(&self) -> bool {
        self.a == 0
    }
}

impl IdxExpr {
    pub fn eval(&self, env: &Env) -> Result<i64, CoreError> {
        Ok(match self {
            IdxExpr::Lit(v) => *v,
            IdxExpr::Var(x) => *env.get(x).ok_or_else(|| CoreError::UnboundVariable(x.clone()))?,
            IdxExpr::Add(a, b) => a.eval(env)? + b.eval(env)?,
            IdxExpr::Sub(a, b) => a.eval(env)? - b.eval(env)?,
            IdxExpr::Mul(a, b) => a.eval(env)? * b.eval(env)?,
        })
    }

    /// Evaluates with variables bound to affine forms; `None` when the
    /// result is not affine (a product of two non-constant forms).
    pub fn affine(&self, env: &BTreeMap<String, Affine>) -> Option<Affine> {
        Some(match self {
            IdxExpr::Lit(v) => Affine::konst(*v),
            IdxExpr::Var(x) => *env.get(x)?,
            IdxExpr::Add(a, b) => {
                let (a, b) = (a.affine(env)?, b.affine(env)?);
                Affine { a: a.a + b.a, b: a.b + b.b }
            }
            IdxExpr::Sub(a, b) => {
                let (a, b) = (a.affine(env)?, b.affine(env)?);
                Affine { a: a.a - b.a, b: a.b - b.b }
            }
            IdxExpr::Mul(a, b) => {
                let (a, b) = (a.affine(env)?, b.affine(env)?);
                match (a.is_const(), b.is_const()) {
                    (true, _) => Affine { a: a.b * b.a, b: a.b * b.b },
                    (_, true) => Affine { a: a.a * b.b, b: a.b * b.b },
                    _ => return None,
                }
            }
        })
    }

    fn vars(&self, out: &mut BTreeSet<String>) {
        match self {
            IdxExpr::Lit(_) => {}
            IdxExpr::Var(x) => {
                out.insert(x.clone());
            }
            IdxExpr::Add(a, b) | IdxExpr::Sub(a, b) | IdxExpr::Mul(a, b) => {
                a.vars(out);
                b.vars(out);
            }
        }
    }

    fn write(&self, env: &Env, out: &mut String, top: bool) {
        match self {
            IdxExpr::Lit(v) => write!(out, "{v}").unwrap(),
            IdxExpr::Var(x) => match env.get(x) {
                Some(v) => write!(out, "{v}").unwrap(),
                None => out.push_str(x),
            },
            IdxExpr::Add(a, b) | IdxExpr::Sub(a, b) | IdxExpr::Mul(a, b) => {
                let op = match self {
                    IdxExpr::Add(..) => "+",
                    IdxExpr::Sub(..) => "-",
                    _ => "*",
                };
                if !top {
                    out.push('(');
                }
                a.write(env, out, false);
                out.push_str(op);
                b.write(env, out, false);
                if !top {
                    out.push(')');
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RatExpr {
    Lit(Rational),
    Idx(IdxExpr),
    Add(Box<RatExpr>, Box<RatExpr>),
    Sub(Box<RatExpr>, Box<RatExpr>),
    Mul(Box<RatExpr>, Box<RatExpr>),
    Div(Box<RatExpr>, Box<RatExpr>),
    Pow(Box<RatExpr>, IdxExpr),
}

/// A finite sum of `poly(n)·r^n` terms, used to normalise tail coefficients.
#[derive(Clone, Debug)]
struct ExpPoly(Vec<(Rational, Vec<Rational>)>);

impl ExpPoly {
    fn konst(c: Rational) -> Self {
        ExpPoly(vec![(Rational::one(), vec![c])])
    }

    fn as_const(&self) -> Option<Rational> {
        let mut c = Rational::zero();
        for (r, p) in &self.0 {
            let nonzero = p.iter().skip(1).any(|x| !x.is_zero());
            if nonzero || (!r.is_one() && !p[0].is_zero()) {
                return None;
            }
            c += &p[0];
        }
        Some(c)
    }

    fn add(mut self, other: ExpPoly, sign: i64) -> Self {
        for (r, p) in other.0 {
            let p: Vec<Rational> = p.into_iter().map(|c| c * int(sign)).collect();
            match self.0.iter_mut().find(|(r2, _)| *r2 == r) {
                Some((_, q)) => {
                    if q.len() < p.len() {
                        q.resize(p.len(), Rational::zero());
                    }
                    for (i, c) in p.into_iter().enumerate() {
                        q[i] += c;
                    }
                }
                None => self.0.push((r, p)),
            }
        }
        self
    }

    fn mul(&self, other: &ExpPoly) -> Self {
        let mut out = ExpPoly(Vec::new());
        for (r1, p1) in &self.0 {
            for (r2, p2) in &other.0 {
                let mut p = vec![Rational::zero(); p1.len() + p2.len() - 1];
                for (i, a) in p1.iter().enumerate() {
                    for (j, b) in p2.iter().enumerate() {
                        p[i + j] += a * b;
                    }
                }
                out = out.add(ExpPoly(vec![(r1 * r2, p)]), 1);
            }
        }
        out
    }
}

impl RatExpr {
    pub fn lit(r: Rational) -> Self {
        RatExpr::Lit(r)
    }

    pub fn eval(&self, env: &Env) -> Result<Rational, CoreError> {
        Ok(match self {
            RatExpr::Lit(r) => r.clone(),
            RatExpr::Idx(i) => int(i.eval(env)?),
            RatExpr::Add(a, b) => a.eval(env)? + b.eval(env)?,
            RatExpr::Sub(a, b) => a.eval(env)? - b.eval(env)?,
            RatExpr::Mul(a, b) => a.eval(env)? * b.eval(env)?,
            RatExpr::Div(a, b) => {
                let d = b.eval(env)?;
                if d.is_zero() {
                    return Err(CoreError::ProbabilityOutOfRange("division by zero".into()));
                }
                a.eval(env)? / d
            }
            RatExpr::Pow(a, e) => {
                let base = a.eval(env)?;
                let e = e.eval(env)?;
                if base.is_zero() && e < 0 {
                    return Err(CoreError::ProbabilityOutOfRange("division by zero".into()));
                }
                pow(&base, e)
            }
        })
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            RatExpr::Lit(_) => {}
            RatExpr::Idx(i) => i.vars(out),
            RatExpr::Add(a, b) | RatExpr::Sub(a, b) | RatExpr::Mul(a, b) | RatExpr::Div(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            RatExpr::Pow(a, e) => {
                a.collect_vars(out);
                e.vars(out);
            }
        }
    }

    fn exp_poly(&self, var: &str, env: &Env) -> Result<ExpPoly, CoreError> {
        let unsupported = || CoreError::BadFamily("tail coefficient is not polynomial times geometric".into());
        Ok(match self {
            RatExpr::Lit(r) => ExpPoly::konst(r.clone()),
            RatExpr::Idx(i) => {
                let mut aenv: BTreeMap<String, Affine> =
                    env.iter().map(|(k, v)| (k.clone(), Affine::konst(*v))).collect();
                aenv.insert(var.to_string(), Affine { a: 1, b: 0 });
                let af = i.affine(&aenv).ok_or_else(unsupported)?;
                ExpPoly(vec![(Rational::one(), vec![int(af.b), int(af.a)])])
            }
            RatExpr::Add(a, b) => a.exp_poly(var, env)?.add(b.exp_poly(var, env)?, 1),
            RatExpr::Sub(a, b) => a.exp_poly(var, env)?.add(b.exp_poly(var, env)?, -1),
            RatExpr::Mul(a, b) => a.exp_poly(var, env)?.mul(&b.exp_poly(var, env)?),
            RatExpr::Div(a, b) => {
                let den = b.exp_poly(var, env)?;
                // Only single-term exponentials with a constant polynomial divide.
                if den.0.len() != 1 || den.0[0].1.iter().skip(1).any(|c| !c.is_zero()) {
                    return Err(unsupported());
                }
                let (r, p) = &den.0[0];
                if p[0].is_zero() {
                    return Err(CoreError::BadFamily("division by zero".into()));
                }
                let inv = ExpPoly(vec![(r.recip(), vec![p[0].recip()])]);
                a.exp_poly(var, env)?.mul(&inv)
            }
            RatExpr::Pow(a, e) => {
                let base = a.exp_poly(var, env)?;
                let mut aenv: BTreeMap<String, Affine> =
                    env.iter().map(|(k, v)| (k.clone(), Affine::konst(*v))).collect();
                aenv.insert(var.to_string(), Affine { a: 1, b: 0 });
                let af = e.affine(&aenv).ok_or_else(unsupported)?;
                if af.is_const() {
                    let mut acc = ExpPoly::konst(Rational::one());
                    let inv;
                    let b = if af.b < 0 {
                        let c = base.as_const().ok_or_else(unsupported)?;
                        inv = ExpPoly::konst(c.recip());
                        &inv
                    } else {
                        &base
                    };
                    for _ in 0..af.b.unsigned_abs() {
                        acc = acc.mul(b);
                    }
                    acc
                } else {
                    let c = base.as_const().ok_or_else(unsupported)?;
                    if c.is_zero() {
                        return Err(unsupported());
                    }
                    ExpPoly(vec![(pow(&c, af.a), vec![pow(&c, af.b)])])
                }
            }
        })
    }

    /// Rewrites an expression in `var` as `poly(var) · ratio^var`.
    pub fn to_poly_geo(&self, var: &str, env: &Env) -> Result<PolyGeo, CoreError> {
        let ep = self.exp_poly(var, env)?;
        let terms: Vec<_> = ep
            .0
            .into_iter()
            .filter(|(_, p)| p.iter().any(|c| !c.is_zero()))
            .collect();
        match terms.as_slice() {
            [(r, p)] => Ok(PolyGeo::new(p.clone(), r.clone())),
            [] => Err(CoreError::BadFamily("tail coefficients are all zero".into())),
            _ => Err(CoreError::BadFamily("tail mixes several geometric ratios".into())),
        }
    }

    fn write(&self, env: &Env, out: &mut String) {
        match self {
            RatExpr::Lit(r) => {
                if r.is_integer() {
                    out.push_str(&to_dsl(r))
                } else {
                    write!(out, "({})", to_dsl(r)).unwrap()
                }
            }
            RatExpr::Idx(i) => i.write(env, out, false),
            RatExpr::Add(a, b) | RatExpr::Sub(a, b) | RatExpr::Mul(a, b) | RatExpr::Div(a, b) => {
                let op = match self {
                    RatExpr::Add(..) => "+",
                    RatExpr::Sub(..) => "-",
                    RatExpr::Mul(..) => "*",
                    _ => "/",
                };
                out.push('(');
                a.write(env, out);
                out.push_str(op);
                b.write(env, out);
                out.push(')');
            }
            RatExpr::Pow(a, e) => {
                a.write(env, out);
                out.push_str("^(");
                e.write(env, out, true);
                out.push(')');
            }
        }
    }
}

/// A countable tail inside a template sum.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TailSpec {
    pub var: String,
    pub offset: u64,
    pub coeff: RatExpr,
    pub body: Arc<Template>,
    pub depth: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SumEntry {
    Single(RatExpr, Template),
    /// `for var in lo..=hi : coeff : body`.
    Comprehension { var: String, lo: IdxExpr, hi: IdxExpr, coeff: RatExpr, body: Template },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Template {
    Req {
        name: String,
        idx: Vec<IdxExpr>,
        args: Vec<Template>,
        /// Generator for the remaining inputs of an ω-ary request.
        rest: Option<(String, Arc<Template>)>,
    },
    Choice { p: RatExpr, left: Box<Template>, right: Box<Template> },
    Sum { entries: Vec<SumEntry>, tail: Option<TailSpec> },
    /// `ctx[var=0](ctx[var=1](… ctx[var=count-1](base)))`; `_` marks the hole.
    Iterate { var: Option<String>, count: IdxExpr, ctx: Box<Template>, base: Box<Template> },
    Hole,
}

impl Template {
    pub fn constant(name: &str) -> Self {
        Template::Req { name: name.to_string(), idx: Vec::new(), args: Vec::new(), rest: None }
    }

    /// Free index variables.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out, &mut Vec::new());
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<String>, bound: &mut Vec<String>) {
        fn add_to(out: &mut BTreeSet<String>, vs: BTreeSet<String>, bound: &[String]) {
            for v in vs {
                if !bound.contains(&v) {
                    out.insert(v);
                }
            }
        }
        macro_rules! add {
            ($vs:expr, $bound:expr) => {
                add_to(out, $vs, $bound)
            };
        }
        match self {
            Template::Req { idx, args, rest, .. } => {
                let mut vs = BTreeSet::new();
                idx.iter().for_each(|i| i.vars(&mut vs));
                add!(vs, bound);
                for a in args {
                    a.collect_free(out, bound);
                }
                if let Some((v, body)) = rest {
                    bound.push(v.clone());
                    body.collect_free(out, bound);
                    bound.pop();
                }
            }
            Template::Choice { p, left, right } => {
                add!(p.vars(), bound);
                left.collect_free(out, bound);
                right.collect_free(out, bound);
            }
            Template::Sum { entries, tail } => {
                for e in entries {
                    match e {
                        SumEntry::Single(c, t) => {
                            add!(c.vars(), bound);
                            t.collect_free(out, bound);
                        }
                        SumEntry::Comprehension { var, lo, hi, coeff, body } => {
                            let mut vs = BTreeSet::new();
                            lo.vars(&mut vs);
                            hi.vars(&mut vs);
                            add!(vs, bound);
                            bound.push(var.clone());
                            add!(coeff.vars(), bound);
                            body.collect_free(out, bound);
                            bound.pop();
                        }
                    }
                }
                if let Some(t) = tail {
                    bound.push(t.var.clone());
                    add!(t.coeff.vars(), bound);
                    t.body.collect_free(out, bound);
                    bound.pop();
                }
            }
            Template::Iterate { var, count, ctx, base } => {
                let mut vs = BTreeSet::new();
                count.vars(&mut vs);
                add!(vs, bound);
                base.collect_free(out, bound);
                if let Some(v) = var {
                    bound.push(v.clone());
                }
                ctx.collect_free(out, bound);
                if var.is_some() {
                    bound.pop();
                }
            }
            Template::Hole => {}
        }
    }

    pub fn contains_hole(&self) -> bool {
        match self {
            Template::Hole => true,
            Template::Req { args, .. } => args.iter().any(Template::contains_hole),
            Template::Choice { left, right, .. } => left.contains_hole() || right.contains_hole(),
            Template::Sum { entries, .. } => entries.iter().any(|e| match e {
                SumEntry::Single(_, t) => t.contains_hole(),
                SumEntry::Comprehension { body, .. } => body.contains_hole(),
            }),
            Template::Iterate { base, .. } => base.contains_hole(),
        }
    }

    /// True when no sum or comprehension occurs, i.e. instances use only
    /// binary choice.
    pub fn is_sum_free(&self) -> bool {
        match self {
            Template::Hole => true,
            Template::Req { args, rest, .. } => {
                args.iter().all(Template::is_sum_free) && rest.as_ref().is_none_or(|(_, b)| b.is_sum_free())
            }
            Template::Choice { left, right, .. } => left.is_sum_free() && right.is_sum_free(),
            Template::Sum { .. } => false,
            Template::Iterate { ctx, base, .. } => ctx.is_sum_free() && base.is_sum_free(),
        }
    }

    /// True when some instance may contain an ω-ary request.
    pub fn has_omega(&self) -> bool {
        match self {
            Template::Hole => false,
            Template::Req { args, rest, .. } => rest.is_some() || args.iter().any(Template::has_omega),
            Template::Choice { left, right, .. } => left.has_omega() || right.has_omega(),
            Template::Sum { entries, tail } => {
                tail.as_ref().is_some_and(|t| t.body.has_omega())
                    || entries.iter().any(|e| match e {
                        SumEntry::Single(_, t) => t.has_omega(),
                        SumEntry::Comprehension { body, .. } => body.has_omega(),
                    })
            }
            Template::Iterate { ctx, base, .. } => ctx.has_omega() || base.has_omega(),
        }
    }

    /// True when instances contain no countable tail and no ω-ary request.
    pub fn is_generator_free(&self) -> bool {
        match self {
            Template::Hole => true,
            Template::Req { args, rest, .. } => rest.is_none() && args.iter().all(Template::is_generator_free),
            Template::Choice { left, right, .. } => left.is_generator_free() && right.is_generator_free(),
            Template::Sum { entries, tail } => {
                tail.is_none()
                    && entries.iter().all(|e| match e {
                        SumEntry::Single(_, t) => t.is_generator_free(),
                        SumEntry::Comprehension { body, .. } => body.is_generator_free(),
                    })
            }
            Template::Iterate { ctx, base, .. } => ctx.is_generator_free() && base.is_generator_free(),
        }
    }

    pub fn instantiate(&self, env: &Env) -> Result<Term, CoreError> {
        self.inst(env, None)
    }

    fn inst(&self, env: &Env, hole: Option<&Arc<Term>>) -> Result<Term, CoreError> {
        match self {
            Template::Hole => hole
                .map(|h| (**h).clone())
                .ok_or_else(|| CoreError::InvalidInput("`_` outside of an iterate context".into())),
            Template::Req { name, idx, args, rest } => {
                let mut ix = Vec::with_capacity(idx.len());
                for e in idx {
                    let v = e.eval(env)?;
                    if v < 0 {
                        return Err(CoreError::InvalidInput(format!("negative symbol index {v} for {name}")));
                    }
                    ix.push(v as u64);
                }
                let explicit: Vec<Arc<Term>> =
                    args.iter().map(|a| a.inst(env, hole).map(Arc::new)).collect::<Result<_, _>>()?;
                let children = match rest {
                    None => Children::Finite(explicit),
                    Some((var, body)) => Children::Omega {
                        explicit,
                        rest: Generator::template(var, body.clone(), env.clone(), None),
                    },
                };
                Ok(Term::Req { op: Symbol::indexed(name, ix), children })
            }
            Template::Choice { p, left, right } => Ok(Term::Choice {
                p: p.eval(env)?,
                left: Arc::new(left.inst(env, hole)?),
                right: Arc::new(right.inst(env, hole)?),
            }),
            Template::Sum { entries, tail } => {
                let mut coeffs = Vec::new();
                let mut branches = Vec::new();
                for e in entries {
                    match e {
                        SumEntry::Single(c, t) => {
                            coeffs.push(c.eval(env)?);
                            branches.push(Arc::new(t.inst(env, hole)?));
                        }
                        SumEntry::Comprehension { var, lo, hi, coeff, body } => {
                            let (lo, hi) = (lo.eval(env)?, hi.eval(env)?);
                            let mut inner = env.clone();
                            for i in lo..=hi {
                                inner.insert(var.clone(), i);
                                coeffs.push(coeff.eval(&inner)?);
                                branches.push(Arc::new(body.inst(&inner, hole)?));
                            }
                        }
                    }
                }
                let (coeffs, generator) = match tail {
                    None => (CoeffFamily::finite(coeffs), None),
                    Some(t) => {
                        if t.offset != coeffs.len() as u64 {
                            return Err(CoreError::BadFamily(format!(
                                "tail starts at {} but {} explicit entries precede it",
                                t.offset,
                                coeffs.len()
                            )));
                        }
                        let pg = t.coeff.to_poly_geo(&t.var, env)?;
                        (
                            CoeffFamily::with_tail(coeffs, pg),
                            Some(Generator::template(&t.var, t.body.clone(), env.clone(), t.depth)),
                        )
                    }
                };
                Ok(Term::Sum { coeffs, branches, generator })
            }
            Template::Iterate { var, count, ctx, base } => {
                let count = count.eval(env)?.max(0);
                let mut acc = Arc::new(base.inst(env, hole)?);
                let mut inner = env.clone();
                for j in (0..count).rev() {
                    if let Some(v) = var {
                        inner.insert(v.clone(), j);
                    }
                    acc = Arc::new(ctx.inst(&inner, Some(&acc))?);
                }
                Ok((*acc).clone())
            }
        }
    }

    /// DSL text with the variables bound in `env` replaced by their values.
    pub fn write_dsl(&self, env: &Env, out: &mut String) {
        let shadow = |v: &str| {
            let mut e = env.clone();
            e.remove(v);
            e
        };
        match self {
            Template::Hole => out.push('_'),
            Template::Req { name, idx, args, rest } => {
                out.push_str(name);
                if !idx.is_empty() {
                    out.push('[');
                    for (i, e) in idx.iter().enumerate() {
                        if i > 0 {
                            out.push(',');
                        }
                        e.write(env, out, true);
                    }
                    out.push(']');
                }
                if !args.is_empty() || rest.is_some() {
                    out.push('(');
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            out.push_str(", ");
                        }
                        a.write_dsl(env, out);
                    }
                    if let Some((v, body)) = rest {
                        write!(out, "; {v} => ").unwrap();
                        body.write_dsl(&shadow(v), out);
                    }
                    out.push(')');
                }
            }
            Template::Choice { p, left, right } => {
                out.push('(');
                left.write_dsl(env, out);
                out.push_str(" +[");
                p.write(env, out);
                out.push_str("] ");
                right.write_dsl(env, out);
                out.push(')');
            }
            Template::Sum { entries, tail } => {
                out.push_str("sum { ");
                for e in entries {
                    match e {
                        SumEntry::Single(c, t) => {
                            c.write(env, out);
                            out.push_str(" : ");
                            t.write_dsl(env, out);
                        }
                        SumEntry::Comprehension { var, lo, hi, coeff, body } => {
                            write!(out, "for {var} in ").unwrap();
                            lo.write(env, out, true);
                            out.push_str("..=");
                            hi.write(env, out, true);
                            out.push_str(" : ");
                            let inner = shadow(var);
                            coeff.write(&inner, out);
                            out.push_str(" : ");
                            body.write_dsl(&inner, out);
                        }
                    }
                    out.push_str("; ");
                }
                if let Some(t) = tail {
                    write!(out, "tail({} >= {}", t.var, t.offset).unwrap();
                    if let Some(d) = t.depth {
                        write!(out, ", depth <= {d}").unwrap();
                    }
                    out.push_str(") : ");
                    let inner = shadow(&t.var);
                    t.coeff.write(&inner, out);
                    out.push_str(" : ");
                    t.body.write_dsl(&inner, out);
                    out.push(' ');
                }
                out.push('}');
            }
            Template::Iterate { var, count, ctx, base } => {
                out.push_str("iterate ");
                let v = var.clone().unwrap_or_else(|| "_i".to_string());
                write!(out, "{v} < ").unwrap();
                count.write(env, out, false);
                out.push_str(" : (");
                ctx.write_dsl(&shadow(&v), out);
                out.push_str(") on (");
                base.write_dsl(env, out);
                out.push(')');
            }
        }
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write_dsl(&Env::new(), &mut s);
        f.write_str(&s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn var(x: &str) -> IdxExpr {
        IdxExpr::Var(x.into())
    }

    #[test]
    fn poly_geo_from_power_expression() {
        // 1 / 2^(n+1)
        let e = RatExpr::Div(
            Box::new(RatExpr::Lit(rat(1, 1))),
            Box::new(RatExpr::Pow(
                Box::new(RatExpr::Lit(rat(2, 1))),
                IdxExpr::Add(Box::new(var("n")), Box::new(IdxExpr::Lit(1))),
            )),
        );
        let pg = e.to_poly_geo("n", &Env::new()).unwrap();
        assert_eq!(pg, PolyGeo::new(vec![rat(1, 2)], rat(1, 2)));
        for n in 0..6 {
            let mut env = Env::new();
            env.insert("n".into(), n);
            assert_eq!(pg.eval(n as u64), e.eval(&env).unwrap());
        }
    }

    #[test]
    fn poly_geo_with_polynomial_factor() {
        // (n+1) * (1/2)^(n+2)
        let e = RatExpr::Mul(
            Box::new(RatExpr::Idx(IdxExpr::Add(Box::new(var("n")), Box::new(IdxExpr::Lit(1))))),
            Box::new(RatExpr::Pow(
                Box::new(RatExpr::Lit(rat(1, 2))),
                IdxExpr::Add(Box::new(var("n")), Box::new(IdxExpr::Lit(2))),
            )),
        );
        let pg = e.to_poly_geo("n", &Env::new()).unwrap();
        assert_eq!(pg.tail_from(0), rat(1, 1));
    }

    #[test]
    fn iterate_nests_outermost_first() {
        // iterate k < 2 : f[k](_) on c  ==  f[0](f[1](c))
        let t = Template::Iterate {
            var: Some("k".into()),
            count: IdxExpr::Lit(2),
            ctx: Box::new(Template::Req {
                name: "f".into(),
                idx: vec![var("k")],
                args: vec![Template::Hole],
                rest: None,
            }),
            base: Box::new(Template::constant("c")),
        };
        let term = t.instantiate(&Env::new()).unwrap();
        assert_eq!(term.to_string(), "f[0](f[1](c))");
    }

    #[test]
    fn free_vars_respect_binders() {
        let t = Template::Iterate {
            var: Some("k".into()),
            count: var("n"),
            ctx: Box::new(Template::Req {
                name: "f".into(),
                idx: vec![var("k"), var("m")],
                args: vec![Template::Hole],
                rest: None,
            }),
            base: Box::new(Template::constant("c")),
        };
        let fv: Vec<_> = t.free_vars().into_iter().collect();
        assert_eq!(fv, vec!["m".to_string(), "n".to_string()]);
    }
}
