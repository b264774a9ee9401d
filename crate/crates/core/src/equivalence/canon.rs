//! Canonical forms for sum-equivalence: alternating crude layers (sorted
//! distributions over distinct rooted forms) and rooted layers (a request
//! with crude children).

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::CoreError;
use crate::rational::Rational;
use crate::signature::Symbol;
use crate::term::{Children, Term};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rooted {
    pub op: Symbol,
    pub children: Vec<Crude>,
}

/// Probabilities are positive, sum to 1, and the rooted forms are distinct
/// and sorted.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Crude(pub Vec<(Rational, Rooted)>);

pub fn canon_bisim(t: &Term) -> Result<Crude, CoreError> {
    let mut acc = BTreeMap::new();
    gather(t, &Rational::one(), &mut acc)?;
    Ok(Crude(acc.into_iter().map(|(r, p)| (p, r)).collect()))
}

fn gather(t: &Term, w: &Rational, acc: &mut BTreeMap<Rooted, Rational>) -> Result<(), CoreError> {
    if w.is_zero() {
        return Ok(());
    }
    match t {
        Term::Req { op, children: Children::Finite(cs) } => {
            let children = cs.iter().map(|c| canon_bisim(c)).collect::<Result<_, _>>()?;
            *acc.entry(Rooted { op: op.clone(), children }).or_insert_with(Rational::zero) += w;
        }
        Term::Req { op, .. } => {
            return Err(CoreError::GeneratorUnsupported(format!("ω-ary request {op} has generated children")))
        }
        Term::Choice { p, left, right } => {
            gather(left, &(w * p), acc)?;
            gather(right, &(w * (Rational::one() - p)), acc)?;
        }
        Term::Sum { coeffs, branches, generator } => {
            if generator.is_some() {
                return Err(CoreError::GeneratorUnsupported("sum with a generated tail".into()));
            }
            for (p, b) in coeffs.explicit.iter().zip(branches) {
                gather(b, &(w * p), acc)?;
            }
        }
    }
    Ok(())
}

impl Rooted {
    pub fn to_term(&self) -> Term {
        Term::req(self.op.clone(), self.children.iter().map(|c| Arc::new(c.to_term())).collect())
    }
}

impl Crude {
    /// A single rooted form of probability 1 is rendered without a sum.
    pub fn to_term(&self) -> Term {
        match self.0.as_slice() {
            [(p, r)] if p.is_one() => r.to_term(),
            entries => Term::sum(entries.iter().map(|(p, r)| (p.clone(), Arc::new(r.to_term()))).collect()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use crate::syntax::parse_term;

    fn canon(s: &str) -> Crude {
        canon_bisim(&parse_term(s).unwrap()).unwrap()
    }

    #[test]
    fn idempotence_and_commutativity() {
        let c = canon("Bye +[1/2] Bye");
        assert_eq!(c.0.len(), 1);
        assert_eq!(c.0[0].0, rat(1, 1));
        assert_eq!(canon("A +[1/3] B"), canon("B +[2/3] A"));
        assert_ne!(canon("A +[1/3] B"), canon("A +[2/3] B"));
    }

    #[test]
    fn nested_sums_flatten() {
        assert_eq!(canon("sum { 1/2 : A; 1/2 : (A +[1/2] B) }"), canon("A +[3/4] B"));
        assert_eq!(canon("f(A +[1/2] A)"), canon("f(A)"));
    }

    #[test]
    fn canonical_term_is_a_fixed_point() {
        let c = canon("f(A +[1/3] B, C) +[1/2] (g +[1/2] f(B +[2/3] A, C))");
        assert_eq!(canon_bisim(&c.to_term()).unwrap(), c);
    }

    #[test]
    fn generators_are_rejected() {
        let t = parse_term("sum { tail(n >= 0) : 1/2^(n+1) : c }").unwrap();
        assert!(matches!(canon_bisim(&t), Err(CoreError::GeneratorUnsupported(_))));
    }
}
