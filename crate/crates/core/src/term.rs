//! Well-founded program terms: requests, binary choice and countable sums
//! whose infinite part is produced by a branch generator.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::hash::{Hash, Hasher};
use std::sync::{Arc, Mutex};

use num_traits::{One, Zero};

use crate::coeff::{CoeffFamily, PolyGeo};
use crate::error::CoreError;
use crate::play::PlayRef;
use crate::rational::{is_open_probability, to_dsl, Rational};
use crate::semantics::interval::Interval;
use crate::signature::{Arity, Signature, Symbol};
use crate::template::{Env, Template};

pub type NativeFn = dyn Fn(u64) -> Arc<Term> + Send + Sync;

/// Given a starting index and a play, returns `N` and the common value of
/// every branch `n ≥ N` on that play, when known.
pub type StabFn = dyn for<'a> Fn(u64, PlayRef<'a>, &Rational) -> Option<(u64, Interval)> + Send + Sync;

/// A generator implemented in Rust, used by the normal-form constructions
/// whose components are defined lazily.
#[derive(Clone)]
pub struct NativeGen {
    pub name: Arc<str>,
    f: Arc<NativeFn>,
    cache: Arc<Mutex<HashMap<u64, Arc<Term>>>>,
    pub depth: Option<u64>,
    stab: Option<Arc<StabFn>>,
}

impl NativeGen {
    pub fn new(name: &str, depth: Option<u64>, f: impl Fn(u64) -> Arc<Term> + Send + Sync + 'static) -> Self {
        NativeGen {
            name: Arc::from(name),
            f: Arc::new(f),
            cache: Arc::new(Mutex::new(HashMap::new())),
            depth,
            stab: None,
        }
    }

    pub fn with_stabilizer(
        mut self,
        f: impl for<'a> Fn(u64, PlayRef<'a>, &Rational) -> Option<(u64, Interval)> + Send + Sync + 'static,
    ) -> Self {
        self.stab = Some(Arc::new(f));
        self
    }

    pub fn stabilizer(&self) -> Option<&StabFn> {
        self.stab.as_deref()
    }

    pub fn get(&self, n: u64) -> Arc<Term> {
        if let Some(t) = self.cache.lock().unwrap().get(&n) {
            return t.clone();
        }
        let t = (self.f)(n);
        self.cache.lock().unwrap().insert(n, t.clone());
        t
    }
}

impl fmt::Debug for NativeGen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NativeGen({})", self.name)
    }
}

const TEMPLATE_CACHE: usize = 4096;

/// Produces the branch (or child) at every index `n` past the explicit ones.
#[derive(Clone, Debug)]
pub enum Generator {
    Template {
        var: String,
        body: Arc<Template>,
        env: Env,
        /// Declared bound on the number of outputs along any play of a branch.
        depth: Option<u64>,
        /// Instances already built, shared by clones.
        cache: Arc<Mutex<HashMap<u64, Arc<Term>>>>,
    },
    Native(NativeGen),
}

impl Generator {
    pub fn template(var: &str, body: Arc<Template>, mut env: Env, depth: Option<u64>) -> Self {
        env.remove(var);
        Generator::Template { var: var.to_string(), body, env, depth, cache: Arc::default() }
    }

    pub fn native(name: &str, depth: Option<u64>, f: impl Fn(u64) -> Arc<Term> + Send + Sync + 'static) -> Self {
        Generator::Native(NativeGen::new(name, depth, f))
    }

    pub fn try_get(&self, n: u64) -> Result<Arc<Term>, CoreError> {
        match self {
            Generator::Template { var, body, env, cache, .. } => {
                if let Some(t) = cache.lock().unwrap().get(&n) {
                    return Ok(t.clone());
                }
                let mut env = env.clone();
                env.insert(var.clone(), n as i64);
                let t = Arc::new(body.instantiate(&env)?);
                let mut cache = cache.lock().unwrap();
                if cache.len() < TEMPLATE_CACHE {
                    cache.insert(n, t.clone());
                }
                Ok(t)
            }
            Generator::Native(g) => Ok(g.get(n)),
        }
    }

    /// Instance at `n`. Generators are spot-checked by validation; a failure
    /// past the checked range is a malformed program.
    pub fn get(&self, n: u64) -> Arc<Term> {
        self.try_get(n)
            .unwrap_or_else(|e| panic!("generator failed at index {n}: {e}"))
    }

    pub fn depth_bound(&self) -> Option<u64> {
        match self {
            Generator::Template { depth, .. } => *depth,
            Generator::Native(g) => g.depth,
        }
    }

    pub fn is_native(&self) -> bool {
        matches!(self, Generator::Native(_))
    }

    fn write_dsl(&self, out: &mut String) {
        match self {
            Generator::Template { body, env, .. } => body.write_dsl(env, out),
            Generator::Native(g) => write!(out, "<{}>", g.name).unwrap(),
        }
    }

    fn var(&self) -> &str {
        match self {
            Generator::Template { var, .. } => var,
            Generator::Native(_) => "n",
        }
    }
}

impl PartialEq for Generator {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (
                Generator::Template { var: v1, body: b1, env: e1, depth: d1, .. },
                Generator::Template { var: v2, body: b2, env: e2, depth: d2, .. },
            ) => v1 == v2 && d1 == d2 && e1 == e2 && (Arc::ptr_eq(b1, b2) || b1 == b2),
            (Generator::Native(a), Generator::Native(b)) => Arc::ptr_eq(&a.f, &b.f),
            _ => false,
        }
    }
}

impl Eq for Generator {}

impl Hash for Generator {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Generator::Template { var, body, env, depth, .. } => {
                0u8.hash(state);
                var.hash(state);
                body.hash(state);
                env.hash(state);
                depth.hash(state);
            }
            Generator::Native(g) => {
                1u8.hash(state);
                g.name.hash(state);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Children {
    Finite(Vec<Arc<Term>>),
    /// Children of an ω-ary request: explicit ones for inputs `0..k`, then
    /// the generator for every input `n ≥ k`.
    Omega { explicit: Vec<Arc<Term>>, rest: Generator },
}

impl Children {
    pub fn get(&self, i: u64) -> Option<Arc<Term>> {
        match self {
            Children::Finite(v) => v.get(i as usize).cloned(),
            Children::Omega { explicit, rest } => {
                Some(explicit.get(i as usize).cloned().unwrap_or_else(|| rest.get(i)))
            }
        }
    }

    pub fn explicit(&self) -> &[Arc<Term>] {
        match self {
            Children::Finite(v) => v,
            Children::Omega { explicit, .. } => explicit,
        }
    }

    pub fn is_omega(&self) -> bool {
        matches!(self, Children::Omega { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Req { op: Symbol, children: Children },
    Choice { p: Rational, left: Arc<Term>, right: Arc<Term> },
    /// `Σ_n coeffs(n) · branch_n`; branches past the explicit ones come
    /// from the generator, which is present exactly when the family has a tail.
    Sum { coeffs: CoeffFamily, branches: Vec<Arc<Term>>, generator: Option<Generator> },
}

impl Term {
    pub fn req(op: Symbol, children: Vec<Arc<Term>>) -> Term {
        Term::Req { op, children: Children::Finite(children) }
    }

    pub fn constant(name: &str) -> Term {
        Term::req(Symbol::new(name), Vec::new())
    }

    pub fn choice(p: Rational, left: Term, right: Term) -> Term {
        Term::Choice { p, left: Arc::new(left), right: Arc::new(right) }
    }

    /// A finite sum. Coefficients are taken as given.
    pub fn sum(entries: Vec<(Rational, Arc<Term>)>) -> Term {
        let (coeffs, branches) = entries.into_iter().unzip();
        Term::Sum { coeffs: CoeffFamily::finite(coeffs), branches, generator: None }
    }

    /// The nullary sum, denoting the zero play-measure. Not a valid program.
    pub fn empty() -> Term {
        Term::sum(Vec::new())
    }

    pub fn is_empty_sum(&self) -> bool {
        matches!(self, Term::Sum { branches, generator: None, .. } if branches.is_empty())
    }

    /// Branch `n` of a sum, or `None` for other nodes and out-of-range indices.
    pub fn branch(&self, n: u64) -> Option<Arc<Term>> {
        match self {
            Term::Sum { branches, generator, .. } => match branches.get(n as usize) {
                Some(b) => Some(b.clone()),
                None => generator.as_ref().map(|g| g.get(n)),
            },
            _ => None,
        }
    }

    pub fn is_generator_free(&self) -> bool {
        match self {
            Term::Req { children: Children::Finite(c), .. } => c.iter().all(|t| t.is_generator_free()),
            Term::Req { .. } => false,
            Term::Choice { left, right, .. } => left.is_generator_free() && right.is_generator_free(),
            Term::Sum { branches, generator, .. } => {
                generator.is_none() && branches.iter().all(|t| t.is_generator_free())
            }
        }
    }

    /// True when an ω-ary request occurs in the term or may occur in a
    /// generated branch. Native generators are opaque and count as ω-free.
    pub fn has_omega(&self) -> bool {
        match self {
            Term::Req { children: Children::Finite(c), .. } => c.iter().any(|t| t.has_omega()),
            Term::Req { .. } => true,
            Term::Choice { left, right, .. } => left.has_omega() || right.has_omega(),
            Term::Sum { branches, generator, .. } => {
                branches.iter().any(|t| t.has_omega())
                    || matches!(generator, Some(Generator::Template { body, .. }) if body.has_omega())
            }
        }
    }

    /// True when the term uses no sum nodes.
    pub fn is_sum_free(&self) -> bool {
        match self {
            Term::Req { children: Children::Finite(c), .. } => c.iter().all(|t| t.is_sum_free()),
            Term::Req { children: Children::Omega { explicit, rest }, .. } => {
                explicit.iter().all(|t| t.is_sum_free())
                    && match rest {
                        Generator::Template { body, .. } => body.is_sum_free(),
                        Generator::Native(_) => false,
                    }
            }
            Term::Choice { left, right, .. } => left.is_sum_free() && right.is_sum_free(),
            Term::Sum { .. } => false,
        }
    }

    /// Maximum number of outputs along a play, for generator-free terms.
    pub fn depth(&self) -> Option<u64> {
        match self {
            Term::Req { children: Children::Finite(c), .. } => {
                let mut d = 0;
                for t in c {
                    d = d.max(t.depth()?);
                }
                Some(d + 1)
            }
            Term::Req { .. } => None,
            Term::Choice { left, right, .. } => Some(left.depth()?.max(right.depth()?)),
            Term::Sum { branches, generator: None, .. } => {
                let mut d = 0;
                for t in branches {
                    d = d.max(t.depth()?);
                }
                Some(d)
            }
            Term::Sum { .. } => None,
        }
    }

    /// Number of nodes in the explicit part of the term.
    pub fn size(&self) -> usize {
        1 + match self {
            Term::Req { children, .. } => children.explicit().iter().map(|t| t.size()).sum(),
            Term::Choice { left, right, .. } => left.size() + right.size(),
            Term::Sum { branches, .. } => branches.iter().map(|t| t.size()).sum(),
        }
    }

    /// Explicit immediate subterms, in position order.
    pub fn subterms(&self) -> Vec<Arc<Term>> {
        match self {
            Term::Req { children, .. } => children.explicit().to_vec(),
            Term::Choice { left, right, .. } => vec![left.clone(), right.clone()],
            Term::Sum { branches, .. } => branches.clone(),
        }
    }

    /// Subterm at `path` (positions among explicit subterms).
    pub fn at(&self, path: &[usize]) -> Option<&Term> {
        match path.split_first() {
            None => Some(self),
            Some((&i, rest)) => {
                let child: &Arc<Term> = match self {
                    Term::Req { children, .. } => children.explicit().get(i)?,
                    Term::Choice { left, right, .. } => match i {
                        0 => left,
                        1 => right,
                        _ => return None,
                    },
                    Term::Sum { branches, .. } => branches.get(i)?,
                };
                child.at(rest)
            }
        }
    }

    /// Copy of the term with the subterm at `path` replaced.
    pub fn replace_at(&self, path: &[usize], new: Term) -> Option<Term> {
        let Some((&i, rest)) = path.split_first() else {
            return Some(new);
        };
        let mut out = self.clone();
        let slot: &mut Arc<Term> = match &mut out {
            Term::Req { children: Children::Finite(c), .. } => c.get_mut(i)?,
            Term::Req { children: Children::Omega { explicit, .. }, .. } => explicit.get_mut(i)?,
            Term::Choice { left, right, .. } => match i {
                0 => left,
                1 => right,
                _ => return None,
            },
            Term::Sum { branches, .. } => branches.get_mut(i)?,
        };
        *slot = Arc::new(slot.replace_at(rest, new)?);
        Some(out)
    }

    pub fn to_dsl(&self) -> String {
        let mut s = String::new();
        self.write_dsl(&mut s);
        s
    }

    fn write_dsl(&self, out: &mut String) {
        match self {
            Term::Req { op, children } => {
                write!(out, "{op}").unwrap();
                let explicit = children.explicit();
                if explicit.is_empty() && !children.is_omega() {
                    return;
                }
                out.push('(');
                for (i, c) in explicit.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    c.write_dsl(out);
                }
                if let Children::Omega { rest, .. } = children {
                    write!(out, "; {} => ", rest.var()).unwrap();
                    rest.write_dsl(out);
                }
                out.push(')');
            }
            Term::Choice { p, left, right } => {
                out.push('(');
                left.write_dsl(out);
                write!(out, " +[{}] ", to_dsl(p)).unwrap();
                right.write_dsl(out);
                out.push(')');
            }
            Term::Sum { coeffs, branches, generator } => {
                out.push_str("sum {");
                for (c, b) in coeffs.explicit.iter().zip(branches) {
                    write!(out, " {} : ", to_dsl(c)).unwrap();
                    b.write_dsl(out);
                    out.push(';');
                }
                if let (Some(t), Some(g)) = (&coeffs.tail, generator) {
                    let var = g.var();
                    write!(out, " tail({var} >= {}", t.offset).unwrap();
                    if let Some(d) = g.depth_bound() {
                        write!(out, ", depth <= {d}").unwrap();
                    }
                    out.push_str(") : ");
                    write_poly_geo(&t.pg, var, out);
                    out.push_str(" : ");
                    g.write_dsl(out);
                }
                out.push_str(" }");
            }
        }
    }

    /// Deterministic 64-bit FNV-1a digest of the DSL form.
    pub fn digest(&self) -> u64 {
        fnv1a(self.to_dsl().as_bytes())
    }
}

pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn write_poly_geo(pg: &PolyGeo, var: &str, out: &mut String) {
    out.push('(');
    let mut first = true;
    for (k, c) in pg.poly.iter().enumerate() {
        if c.is_zero() && pg.poly.len() > 1 {
            continue;
        }
        if !first {
            out.push_str(" + ");
        }
        first = false;
        write!(out, "({})", to_dsl(c)).unwrap();
        for _ in 0..k {
            write!(out, "*{var}").unwrap();
        }
    }
    out.push(')');
    if !pg.ratio.is_one() {
        write!(out, " * ({})^{var}", to_dsl(&pg.ratio)).unwrap();
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_dsl())
    }
}

/// Checks symbols, arities, probability ranges and coefficient totals.
/// Generated branches and ω-children are spot-checked at `g` indices past
/// the explicit ones.
pub fn validate_term(t: &Term, sig: &Signature, g: u64) -> Result<(), CoreError> {
    let mut budget = 200_000usize;
    validate_rec(t, sig, g, &mut budget)
}

fn validate_rec(t: &Term, sig: &Signature, g: u64, budget: &mut usize) -> Result<(), CoreError> {
    if *budget == 0 {
        return Ok(());
    }
    *budget -= 1;
    match t {
        Term::Req { op, children } => {
            let decl = sig
                .decl_by_name(&op.name)
                .map(|(_, d)| d)
                .ok_or_else(|| CoreError::UnknownSymbol(op.to_string()))?;
            if decl.params != op.idx.len() {
                return Err(CoreError::ArityMismatch(format!(
                    "{op} carries {} indices, declared with {}",
                    op.idx.len(),
                    decl.params
                )));
            }
            match (&decl.arity, children) {
                (Arity::Finite(labels), Children::Finite(c)) => {
                    if labels.len() != c.len() {
                        return Err(CoreError::ArityMismatch(format!(
                            "{op} expects {} children, got {}",
                            labels.len(),
                            c.len()
                        )));
                    }
                    for c in c {
                        validate_rec(c, sig, g, budget)?;
                    }
                }
                (Arity::Omega, Children::Omega { explicit, rest }) => {
                    for c in explicit {
                        validate_rec(c, sig, g, budget)?;
                    }
                    let k = explicit.len() as u64;
                    for n in k..k + g {
                        validate_rec(&*rest.try_get(n)?, sig, g, budget)?;
                    }
                }
                (Arity::Omega, Children::Finite(_)) => {
                    return Err(CoreError::ArityMismatch(format!("{op} is ω-ary and needs a child generator")))
                }
                (Arity::Finite(_), Children::Omega { .. }) => {
                    return Err(CoreError::ArityMismatch(format!("{op} has finite arity")))
                }
            }
        }
        Term::Choice { p, left, right } => {
            if !is_open_probability(p) {
                return Err(CoreError::ProbabilityOutOfRange(format!("choice probability {p} not in (0,1)")));
            }
            validate_rec(left, sig, g, budget)?;
            validate_rec(right, sig, g, budget)?;
        }
        Term::Sum { coeffs, branches, generator } => {
            coeffs.validate()?;
            if branches.len() != coeffs.explicit.len() {
                return Err(CoreError::BadFamily(format!(
                    "{} coefficients for {} branches",
                    coeffs.explicit.len(),
                    branches.len()
                )));
            }
            if coeffs.is_infinite() != generator.is_some() {
                return Err(CoreError::BadFamily("a tail needs exactly one generator".into()));
            }
            for b in branches {
                validate_rec(b, sig, g, budget)?;
            }
            if let Some(gen) = generator {
                let k = coeffs.explicit_len();
                for n in k..k + g {
                    validate_rec(&*gen.try_get(n)?, sig, g, budget)?;
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn happy_sig() -> Signature {
        Signature::parse("op Bye : []\nop Happy : [yes, no]\nop Age : omega").unwrap()
    }

    #[test]
    fn minimal_choice_is_valid() {
        let t = Term::choice(rat(1, 2), Term::constant("Bye"), Term::constant("Bye"));
        validate_term(&t, &happy_sig(), 16).unwrap();
    }

    #[test]
    fn short_weight_is_rejected() {
        let t = Term::sum(vec![(rat(1, 2), Arc::new(Term::constant("Bye"))), (rat(1, 4), Arc::new(Term::constant("Bye")))]);
        assert!(matches!(validate_term(&t, &happy_sig(), 16), Err(CoreError::WeightNotOne(_))));
    }

    #[test]
    fn arity_and_symbol_errors() {
        let sig = happy_sig();
        let t = Term::req(Symbol::new("Happy"), vec![Arc::new(Term::constant("Bye"))]);
        assert!(matches!(validate_term(&t, &sig, 16), Err(CoreError::ArityMismatch(_))));
        assert!(matches!(
            validate_term(&Term::constant("Nope"), &sig, 16),
            Err(CoreError::UnknownSymbol(_))
        ));
        let bad = Term::choice(rat(1, 1), Term::constant("Bye"), Term::constant("Bye"));
        assert!(matches!(validate_term(&bad, &sig, 16), Err(CoreError::ProbabilityOutOfRange(_))));
    }

    #[test]
    fn paths_address_explicit_subterms() {
        let t = Term::choice(
            rat(1, 3),
            Term::constant("a"),
            Term::req(Symbol::new("f"), vec![Arc::new(Term::constant("b"))]),
        );
        assert_eq!(t.at(&[1, 0]).unwrap().to_dsl(), "b");
        let u = t.replace_at(&[1, 0], Term::constant("c")).unwrap();
        assert_eq!(u.to_dsl(), "(a +[1/3] f(c))");
        assert_eq!(t.depth(), Some(2));
    }
}
