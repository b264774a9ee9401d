//! Rewrite proofs: chains of law instances applied at positions, with
//! replay, and the normalizers that emit them.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::equivalence::canon::{canon_bisim, Rooted};
use crate::equivalence::laws::Law;
use crate::error::CoreError;
use crate::rational::{to_wire, Rational};
use crate::signature::Symbol;
use crate::term::{Children, Term};

/// One law instance applied at `path`; steps below the root are congruence
/// applications of the law.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub law: Law,
    pub path: Vec<usize>,
    pub before: Arc<Term>,
    pub after: Arc<Term>,
}

impl Step {
    pub fn reversed(&self) -> Step {
        Step { law: self.law, path: self.path.clone(), before: self.after.clone(), after: self.before.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteProof {
    pub lhs: Arc<Term>,
    pub rhs: Arc<Term>,
    pub steps: Vec<Step>,
}

#[derive(Serialize)]
pub struct StepJson {
    pub law: &'static str,
    pub congruence: bool,
    pub path: Vec<usize>,
    pub before_hash: String,
    pub after_hash: String,
}

fn bad(msg: String) -> CoreError {
    CoreError::Inconclusive(format!("proof does not replay: {msg}"))
}

impl RewriteProof {
    pub fn refl(t: &Term) -> Self {
        let t = Arc::new(t.clone());
        RewriteProof { lhs: t.clone(), rhs: t, steps: Vec::new() }
    }

    pub fn reversed(&self) -> Self {
        RewriteProof {
            lhs: self.rhs.clone(),
            rhs: self.lhs.clone(),
            steps: self.steps.iter().rev().map(Step::reversed).collect(),
        }
    }

    /// `self` followed by `other`; the endpoints must agree.
    pub fn then(mut self, other: RewriteProof) -> Result<Self, CoreError> {
        if self.rhs != other.lhs {
            return Err(bad("composed proofs do not meet".into()));
        }
        self.steps.extend(other.steps);
        self.rhs = other.rhs;
        Ok(self)
    }

    /// Re-checks every step: the instance at the path satisfies its law, the
    /// rest of the term is untouched, and the terms chain from lhs to rhs.
    pub fn replay(&self) -> Result<(), CoreError> {
        let mut cur = self.lhs.clone();
        for (n, st) in self.steps.iter().enumerate() {
            if st.before.digest() != cur.digest() || st.before != cur {
                return Err(bad(format!("step {n} starts from the wrong term")));
            }
            let a = cur.at(&st.path).ok_or_else(|| bad(format!("step {n} has an invalid path")))?;
            let b = st.after.at(&st.path).ok_or_else(|| bad(format!("step {n} has an invalid path")))?;
            if !st.law.holds(a, b) {
                return Err(bad(format!("step {n} is not an instance of {}", st.law)));
            }
            let next = cur.replace_at(&st.path, b.clone()).ok_or_else(|| bad(format!("step {n} path")))?;
            if next != *st.after {
                return Err(bad(format!("step {n} changes the term outside its position")));
            }
            cur = st.after.clone();
        }
        if *cur != *self.rhs {
            return Err(bad("the last step does not reach the right-hand side".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Vec<StepJson> {
        self.steps
            .iter()
            .map(|s| StepJson {
                law: s.law.id(),
                congruence: !s.path.is_empty(),
                path: s.path.clone(),
                before_hash: format!("{:016x}", s.before.digest()),
                after_hash: format!("{:016x}", s.after.digest()),
            })
            .collect()
    }
}

/// Records steps against a term that is rewritten in place.
struct Rewriter {
    cur: Arc<Term>,
    steps: Vec<Step>,
}

impl Rewriter {
    fn new(t: &Term) -> Self {
        Rewriter { cur: Arc::new(t.clone()), steps: Vec::new() }
    }

    fn at(&self, path: &[usize]) -> Term {
        self.cur.at(path).expect("rewriter path").clone()
    }

    fn rewrite(&mut self, path: &[usize], new: Term) {
        let old = self.at(path);
        if old == new {
            return;
        }
        let law = Law::ALL
            .into_iter()
            .find(|l| l.holds(&old, &new))
            .expect("normalizer emitted a step outside the laws");
        let after = Arc::new(self.cur.replace_at(path, new).expect("rewriter path"));
        self.steps.push(Step { law, path: path.to_vec(), before: self.cur.clone(), after: after.clone() });
        self.cur = after;
    }

    fn finish(self, start: &Term) -> RewriteProof {
        RewriteProof { lhs: Arc::new(start.clone()), rhs: self.cur, steps: self.steps }
    }
}

/// Positions of the maximal non-sum subterms of a sum/choice block.
fn block_leaves(t: &Term, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    match t {
        Term::Choice { left, right, .. } => {
            for (i, c) in [left, right].into_iter().enumerate() {
                prefix.push(i);
                block_leaves(c, prefix, out);
                prefix.pop();
            }
        }
        Term::Sum { branches, .. } => {
            for (i, c) in branches.iter().enumerate() {
                prefix.push(i);
                block_leaves(c, prefix, out);
                prefix.pop();
            }
        }
        Term::Req { .. } => out.push(prefix.clone()),
    }
}

fn is_block(t: &Term) -> bool {
    matches!(t, Term::Choice { .. } | Term::Sum { .. })
}

fn bisim_at(rw: &mut Rewriter, path: &mut Vec<usize>) -> Result<(), CoreError> {
    let node = rw.at(path);
    if let Term::Req { children, .. } = &node {
        if children.is_omega() {
            return Err(CoreError::GeneratorUnsupported("ω-ary request".into()));
        }
        for i in 0..children.explicit().len() {
            path.push(i);
            bisim_at(rw, path)?;
            path.pop();
        }
        return Ok(());
    }
    let mut leaves = Vec::new();
    block_leaves(&node, &mut Vec::new(), &mut leaves);
    for l in &leaves {
        let len = path.len();
        path.extend_from_slice(l);
        bisim_at(rw, path)?;
        path.truncate(len);
    }
    let canon = canon_bisim(&rw.at(path))?;
    rw.rewrite(path, canon.to_term());
    Ok(())
}

/// A proof from `t` to the term of its bisimulation canonical form, using
/// only the convex and ω-convex laws.
pub fn bisim_normalize(t: &Term) -> Result<RewriteProof, CoreError> {
    let mut rw = Rewriter::new(t);
    bisim_at(&mut rw, &mut Vec::new())?;
    Ok(rw.finish(t))
}

/// A proof of `t1 = t2` through their common canonical form, when bisimilar.
pub fn bisim_proof(t1: &Term, t2: &Term) -> Result<Option<RewriteProof>, CoreError> {
    let a = bisim_normalize(t1)?;
    let b = bisim_normalize(t2)?;
    if a.rhs != b.rhs {
        return Ok(None);
    }
    a.then(b.reversed()).map(Some)
}

/// Flattened leaf distribution of a block, aggregated by term.
fn flat_leaves(t: &Term, w: &Rational, acc: &mut Vec<(Rational, Arc<Term>)>) {
    let es: Vec<(Rational, Arc<Term>)> = match t {
        Term::Choice { p, left, right } => vec![(p.clone(), left.clone()), (Rational::one() - p, right.clone())],
        Term::Sum { coeffs, branches, .. } => coeffs.explicit.iter().cloned().zip(branches.iter().cloned()).collect(),
        Term::Req { .. } => unreachable!("flat_leaves on a request"),
    };
    for (p, b) in es {
        let v = w * p;
        if v.is_zero() {
            continue;
        }
        if is_block(&b) {
            flat_leaves(&b, &v, acc);
        } else if let Some(slot) = acc.iter_mut().find(|(_, x)| *x == b) {
            slot.0 += v;
        } else {
            acc.push((v, b));
        }
    }
}

fn op_of(t: &Term) -> &Symbol {
    match t {
        Term::Req { op, .. } => op,
        _ => unreachable!("leaf is a request"),
    }
}

fn ff_at(rw: &mut Rewriter, path: &mut Vec<usize>) -> Result<(), CoreError> {
    let node = rw.at(path);
    if let Term::Sum { generator: Some(_), .. } = node {
        return Err(CoreError::NotFinitelyFounded("sum with a generated tail".into()));
    }
    if is_block(&node) {
        // Group the flattened leaves by head, in head order.
        let mut leaves = Vec::new();
        flat_leaves(&node, &Rational::one(), &mut leaves);
        let mut groups: BTreeMap<Symbol, Vec<(Rational, Arc<Term>)>> = BTreeMap::new();
        for (p, l) in leaves {
            groups.entry(op_of(&l).clone()).or_default().push((p, l));
        }
        let grouped: Vec<(Rational, Term)> = groups
            .into_values()
            .map(|g| {
                let total: Rational = g.iter().map(|(p, _)| p.clone()).sum();
                let inner = match g.as_slice() {
                    [(_, l)] => (**l).clone(),
                    _ => Term::sum(g.iter().map(|(p, l)| (p / &total, l.clone())).collect()),
                };
                (total, inner)
            })
            .collect();
        let single = grouped.len() == 1;
        let new = if single {
            grouped[0].1.clone()
        } else {
            Term::sum(grouped.iter().map(|(p, g)| (p.clone(), Arc::new(g.clone()))).collect())
        };
        rw.rewrite(path, new);
        // Merge each group into one request.
        let n = grouped.len();
        for j in 0..n {
            if !single {
                path.push(j);
            }
            let g = rw.at(path);
            if let Term::Sum { coeffs, branches, .. } = &g {
                let rows: Vec<&Vec<Arc<Term>>> = branches
                    .iter()
                    .map(|b| match &**b {
                        Term::Req { children: Children::Finite(cs), .. } => Ok(cs),
                        _ => Err(CoreError::GeneratorUnsupported("ω-ary request".into())),
                    })
                    .collect::<Result<_, _>>()?;
                let arity = rows[0].len();
                let merged = (0..arity)
                    .map(|i| {
                        Arc::new(Term::sum(coeffs.explicit.iter().cloned().zip(rows.iter().map(|r| r[i].clone())).collect()))
                    })
                    .collect();
                rw.rewrite(path, Term::req(op_of(&branches[0]).clone(), merged));
            }
            ff_children(rw, path)?;
            if !single {
                path.pop();
            }
        }
        return Ok(());
    }
    ff_children(rw, path)
}

fn ff_children(rw: &mut Rewriter, path: &mut Vec<usize>) -> Result<(), CoreError> {
    let Term::Req { children, .. } = rw.at(path) else { unreachable!("merged group is a request") };
    if children.is_omega() {
        return Err(CoreError::GeneratorUnsupported("ω-ary request".into()));
    }
    for i in 0..children.explicit().len() {
        path.push(i);
        ff_at(rw, path)?;
        path.pop();
    }
    Ok(())
}

/// A proof from `t` to its finitely founded normal form.
pub fn ff_normalize(t: &Term) -> Result<RewriteProof, CoreError> {
    let mut rw = Rewriter::new(t);
    ff_at(&mut rw, &mut Vec::new())?;
    Ok(rw.finish(t))
}

/// A proof of `t1 = t2` through their common finitely founded normal form.
pub fn ff_proof(t1: &Term, t2: &Term) -> Result<Option<RewriteProof>, CoreError> {
    let a = ff_normalize(t1)?;
    let b = ff_normalize(t2)?;
    if a.rhs != b.rhs {
        return Ok(None);
    }
    a.then(b.reversed()).map(Some)
}

/// Wire form of a rooted canonical layer, for diagnostics.
pub fn rooted_wire(r: &Rooted) -> String {
    let cs: Vec<String> = r
        .children
        .iter()
        .map(|c| c.0.iter().map(|(p, x)| format!("{}:{}", to_wire(p), rooted_wire(x))).collect::<Vec<_>>().join("|"))
        .collect();
    format!("{}({})", r.op, cs.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equivalence::trace_equiv::exact_counterplay;
    use crate::syntax::parse_term;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn bisim_proofs_replay() {
        let p = bisim_proof(&t("A +[1/3] B"), &t("B +[2/3] A")).unwrap().unwrap();
        p.replay().unwrap();
        let p = bisim_proof(&t("f(a +[1/2] a, b) +[1/4] f(a, b)"), &t("f(a, sum { 1/2 : b; 1/2 : b })")).unwrap().unwrap();
        p.replay().unwrap();
        assert!(p.steps.iter().all(|s| !matches!(s.law, Law::TensorBinary | Law::TensorCountable)));
        assert!(bisim_proof(&t("Happy(A, B)"), &t("Happy(B, A)")).unwrap().is_none());
    }

    #[test]
    fn ff_proofs_relate_trace_equivalent_terms() {
        let a = t("f(a, b) +[1/2] f(b, a)");
        let b = t("f(a +[1/2] b, b +[1/2] a)");
        assert!(bisim_proof(&a, &b).unwrap().is_none());
        let p = ff_proof(&a, &b).unwrap().unwrap();
        p.replay().unwrap();
        assert!(p.steps.iter().any(|s| s.law == Law::TensorCountable));
        for s in &p.steps {
            assert_eq!(exact_counterplay(&s.before, &s.after, 6).unwrap(), None);
        }
    }

    #[test]
    fn ff_normal_form_is_idempotent() {
        let src = t("Happy(Bye, Bye +[1/2] Happy(Bye +[1/3] Happy(Bye, Bye), Bye))");
        let nf = ff_normalize(&src).unwrap().rhs;
        let again = ff_normalize(&nf).unwrap();
        assert!(again.steps.is_empty());
    }

    #[test]
    fn tampered_proofs_fail() {
        let mut p = ff_proof(&t("f(a, b) +[1/2] f(b, a)"), &t("f(a +[1/2] b, b +[1/2] a)")).unwrap().unwrap();
        p.steps[0].law = Law::Convex1;
        assert!(p.replay().is_err());
        let mut p = bisim_proof(&t("A +[1/3] B"), &t("B +[2/3] A")).unwrap().unwrap();
        p.rhs = Arc::new(t("A"));
        assert!(p.replay().is_err());
    }
}
