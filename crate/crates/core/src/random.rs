//! Random generator-free terms and law instances, for property checks and
//! the self-test.

use std::sync::Arc;

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::equivalence::laws::Law;
use crate::rational::{rat, Rational};
use crate::signature::{Arity, Signature, Symbol};
use crate::term::{Children, Term};

/// Output symbols with their (finite) arities.
#[derive(Clone, Debug)]
pub struct Ops(pub Vec<(Symbol, usize)>);

impl Default for Ops {
    fn default() -> Self {
        Ops(vec![
            (Symbol::new("Bye"), 0),
            (Symbol::new("c"), 0),
            (Symbol::new("a"), 1),
            (Symbol::new("Happy"), 2),
            (Symbol::new("f"), 2),
        ])
    }
}

impl Ops {
    pub fn signature(&self) -> Signature {
        let mut sig = Signature::new();
        for (k, n) in &self.0 {
            sig = sig
                .with_op(&k.name, 0, Arity::Finite((0..*n).map(|i| i.to_string()).collect()))
                .expect("distinct symbols");
        }
        sig
    }

    fn constants(&self) -> Vec<&Symbol> {
        self.0.iter().filter(|(_, n)| *n == 0).map(|(k, _)| k).collect()
    }
}

/// A probability strictly between 0 and 1 with a small denominator.
pub fn random_prob(rng: &mut impl Rng) -> Rational {
    let d: i64 = rng.gen_range(2..=8);
    let n: i64 = rng.gen_range(1..d);
    rat(n, d)
}

/// A finite distribution with `len` positive entries.
pub fn random_weights(rng: &mut impl Rng, len: usize) -> Vec<Rational> {
    let raw: Vec<i64> = (0..len).map(|_| rng.gen_range(1..=6)).collect();
    let total: i64 = raw.iter().sum();
    raw.into_iter().map(|x| rat(x, total)).collect()
}

/// A random term of nesting depth at most `depth`.
pub fn random_term(rng: &mut impl Rng, ops: &Ops, depth: usize) -> Term {
    if depth == 0 {
        let k = ops.constants().choose(rng).copied().cloned().unwrap_or_else(|| Symbol::new("Bye"));
        return Term::req(k, Vec::new());
    }
    match rng.gen_range(0..10) {
        0..=5 => {
            let (k, n) = ops.0.choose(rng).unwrap().clone();
            Term::req(k, (0..n).map(|_| Arc::new(random_term(rng, ops, depth - 1))).collect())
        }
        6..=8 => Term::choice(random_prob(rng), random_term(rng, ops, depth - 1), random_term(rng, ops, depth - 1)),
        _ => {
            let len = rng.gen_range(1..=3);
            let ws = random_weights(rng, len);
            Term::sum(ws.into_iter().map(|w| (w, Arc::new(random_term(rng, ops, depth - 1)))).collect())
        }
    }
}

/// A random request with `op` at the root.
fn random_req(rng: &mut impl Rng, ops: &Ops, op: &(Symbol, usize), depth: usize) -> Term {
    Term::req(op.0.clone(), (0..op.1).map(|_| Arc::new(random_term(rng, ops, depth))).collect())
}

/// Both sides of a random instance of `law`, built from random subterms
/// of depth at most `depth`.
pub fn random_instance(rng: &mut impl Rng, ops: &Ops, law: Law, depth: usize) -> (Term, Term) {
    let mut t = || random_term(rng, ops, depth);
    match law {
        Law::Convex1 => {
            let m = t();
            let p = random_prob(rng);
            (Term::choice(p, m.clone(), m.clone()), m)
        }
        Law::Convex2 => {
            let (m, n) = (t(), t());
            let p = random_prob(rng);
            (Term::choice(p.clone(), m.clone(), n.clone()), Term::choice(Rational::one() - p, n, m))
        }
        Law::Convex3 => {
            let (m, n, o) = (t(), t(), t());
            let (p, q) = (random_prob(rng), random_prob(rng));
            let pq = &p * &q;
            let inner = &q * (Rational::one() - &p) / (Rational::one() - &pq);
            (
                Term::choice(q, Term::choice(p, m.clone(), n.clone()), o.clone()),
                Term::choice(pq, m, Term::choice(inner, n, o)),
            )
        }
        Law::OmegaConvex1 => {
            let len = rng.gen_range(1..=4);
            let hit = rng.gen_range(0..len);
            let bs: Vec<Term> = (0..len).map(|_| random_term(rng, ops, depth)).collect();
            let target = bs[hit].clone();
            let entries = bs.into_iter().enumerate().map(|(i, b)| (if i == hit { rat(1, 1) } else { rat(0, 1) }, Arc::new(b))).collect();
            (Term::sum(entries), target)
        }
        Law::OmegaConvex2 => {
            // Σ_n p_n Σ_m q_{n,m} M_m against the collapsed sum.
            let leaves: Vec<Term> = (0..rng.gen_range(1..=3)).map(|_| random_term(rng, ops, depth)).collect();
            let n = rng.gen_range(1..=3);
            let outer = random_weights(rng, n);
            let mut total = vec![Rational::from_integer(0.into()); leaves.len()];
            let mut rows = Vec::new();
            for p in &outer {
                let q = random_weights(rng, leaves.len());
                for (m, qm) in q.iter().enumerate() {
                    total[m] += p * qm;
                }
                let row = Term::sum(q.into_iter().zip(&leaves).map(|(w, l)| (w, Arc::new(l.clone()))).collect());
                rows.push((p.clone(), Arc::new(row)));
            }
            let rhs = Term::sum(total.into_iter().zip(leaves).map(|(w, l)| (w, Arc::new(l))).collect());
            (Term::sum(rows), rhs)
        }
        Law::TensorBinary => {
            let op = ops.0.iter().filter(|(_, n)| *n > 0).collect::<Vec<_>>().choose(rng).copied().cloned().unwrap();
            let (l, r) = (random_req(rng, ops, &op, depth), random_req(rng, ops, &op, depth));
            let p = random_prob(rng);
            let (Term::Req { children: a, .. }, Term::Req { children: b, .. }) = (&l, &r) else { unreachable!() };
            let kids = a.explicit().iter().zip(b.explicit()).map(|(x, y)| Arc::new(Term::choice(p.clone(), (**x).clone(), (**y).clone()))).collect();
            let rhs = Term::req(op.0.clone(), kids);
            (Term::choice(p, l, r), rhs)
        }
        Law::TensorCountable => {
            let op = ops.0.iter().filter(|(_, n)| *n > 0).collect::<Vec<_>>().choose(rng).copied().cloned().unwrap();
            let n = rng.gen_range(1..=4);
            let ws = random_weights(rng, n);
            let rows: Vec<Term> = ws.iter().map(|_| random_req(rng, ops, &op, depth)).collect();
            let kids = (0..op.1)
                .map(|i| {
                    Arc::new(Term::sum(
                        ws.iter().zip(&rows).map(|(w, r)| (w.clone(), r_child(r, i))).collect(),
                    ))
                })
                .collect();
            let lhs = Term::sum(ws.into_iter().zip(rows).map(|(w, r)| (w, Arc::new(r))).collect());
            (lhs, Term::req(op.0.clone(), kids))
        }
    }
}

fn r_child(t: &Term, i: usize) -> Arc<Term> {
    match t {
        Term::Req { children, .. } => children.explicit()[i].clone(),
        _ => unreachable!("row is a request"),
    }
}

fn same_op(ts: &[&Term]) -> Option<(Symbol, Vec<Vec<Arc<Term>>>)> {
    let mut op = None;
    let mut rows = Vec::new();
    for t in ts {
        match t {
            Term::Req { op: k, children: Children::Finite(cs) } if op.as_ref().is_none_or(|o| o == k) => {
                op = Some(k.clone());
                rows.push(cs.clone());
            }
            _ => return None,
        }
    }
    op.map(|k| (k, rows))
}

/// Candidate rewrites of `t` at the root by one law, left to right or
/// right to left.
fn root_rewrites(rng: &mut impl Rng, ops: &Ops, t: &Term, tensor: bool) -> Vec<(Law, Term)> {
    let one = Rational::one();
    let p = random_prob(rng);
    let mut out = vec![(Law::Convex1, Term::choice(p, t.clone(), t.clone()))];
    let filler = random_term(rng, ops, 1);
    let hit = rng.gen_range(0..2);
    let entries = (0..2).map(|i| if i == hit { (one.clone(), Arc::new(t.clone())) } else { (Rational::zero(), Arc::new(filler.clone())) }).collect();
    out.push((Law::OmegaConvex1, Term::sum(entries)));
    match t {
        Term::Choice { p, left, right } => {
            if left == right {
                out.push((Law::Convex1, (**left).clone()));
            }
            out.push((Law::Convex2, Term::Choice { p: &one - p, left: right.clone(), right: left.clone() }));
            if let Term::Choice { p: p2, left: a, right: b } = &**left {
                let pq = p2 * p;
                if pq < one {
                    let inner = p * (&one - p2) / (&one - &pq);
                    out.push((Law::Convex3, Term::Choice { p: pq, left: a.clone(), right: Arc::new(Term::Choice { p: inner, left: b.clone(), right: right.clone() }) }));
                }
            }
            if let Term::Choice { p: s, left: b, right: c } = &**right {
                let q = p + (&one - p) * s;
                let inner = p / &q;
                if inner < one {
                    out.push((Law::Convex3, Term::Choice { p: q, left: Arc::new(Term::Choice { p: inner, left: left.clone(), right: b.clone() }), right: c.clone() }));
                }
            }
            if tensor {
                if let Some((k, rows)) = same_op(&[left, right]) {
                    let kids = rows[0].iter().zip(&rows[1]).map(|(x, y)| Arc::new(Term::Choice { p: p.clone(), left: x.clone(), right: y.clone() })).collect();
                    out.push((Law::TensorBinary, Term::req(k, kids)));
                }
            }
        }
        Term::Sum { coeffs, branches, generator: None } => {
            out.push((Law::OmegaConvex2, Term::sum(vec![(one.clone(), Arc::new(t.clone()))])));
            if tensor {
                let refs: Vec<&Term> = branches.iter().map(|b| &**b).collect();
                if let Some((k, rows)) = same_op(&refs) {
                    let arity = rows[0].len();
                    let kids = (0..arity)
                        .map(|i| Arc::new(Term::sum(coeffs.explicit.iter().zip(&rows).map(|(w, r)| (w.clone(), r[i].clone())).collect())))
                        .collect();
                    out.push((Law::TensorCountable, Term::req(k, kids)));
                }
            }
        }
        Term::Req { op, children: Children::Finite(cs) } if tensor && !cs.is_empty() => {
            if let Some(Term::Choice { p, .. }) = cs.first().map(|c| &**c) {
                let split: Option<Vec<(Arc<Term>, Arc<Term>)>> = cs
                    .iter()
                    .map(|c| match &**c {
                        Term::Choice { p: q, left, right } if q == p => Some((left.clone(), right.clone())),
                        _ => None,
                    })
                    .collect();
                if let Some(pairs) = split {
                    let (ls, rs): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
                    out.push((Law::TensorBinary, Term::choice(p.clone(), Term::req(op.clone(), ls), Term::req(op.clone(), rs))));
                }
            }
        }
        _ => {}
    }
    out
}

/// One random law application somewhere in the explicit part of `t`.
/// Without `tensor` only the (ω-)convex laws are used.
pub fn random_rewrite(rng: &mut impl Rng, ops: &Ops, t: &Term, tensor: bool) -> (Law, Term) {
    let subs = t.subterms();
    if subs.is_empty() || rng.gen_range(0..3) == 0 {
        let mut cands = root_rewrites(rng, ops, t, tensor);
        // expansions would otherwise dominate
        if cands.len() > 2 && rng.gen_bool(0.8) {
            cands.drain(..2);
        }
        return cands.swap_remove(rng.gen_range(0..cands.len()));
    }
    let i = rng.gen_range(0..subs.len());
    let (law, new) = random_rewrite(rng, ops, &subs[i], tensor);
    (law, t.replace_at(&[i], new).expect("explicit position"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::validate_term;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_terms_validate() {
        let ops = Ops::default();
        let sig = ops.signature();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let t = random_term(&mut rng, &ops, 4);
            validate_term(&t, &sig, 16).unwrap();
            assert!(t.is_generator_free());
        }
    }

    #[test]
    fn random_instances_are_recognized() {
        let ops = Ops::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for law in Law::ALL {
            for _ in 0..10 {
                let (a, b) = random_instance(&mut rng, &ops, law, 2);
                assert!(law.holds(&a, &b), "{law}: {} = {}", a.to_dsl(), b.to_dsl());
            }
        }
    }

    #[test]
    fn rewrites_preserve_traces() {
        use crate::equivalence::trace_equiv::exact_counterplay;
        let ops = Ops::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..60 {
            let t = random_term(&mut rng, &ops, 3);
            let mut u = t.clone();
            for _ in 0..5 {
                let (law, v) = random_rewrite(&mut rng, &ops, &u, true);
                seen.insert(law);
                u = v;
            }
            let d = t.depth().unwrap().max(u.depth().unwrap()) as usize + 1;
            assert_eq!(exact_counterplay(&t, &u, d).unwrap(), None, "{} vs {}", t.to_dsl(), u.to_dsl());
        }
        assert!(seen.len() >= 5, "{seen:?}");
    }
}
