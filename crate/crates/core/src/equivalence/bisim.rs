//! Probabilistic bisimilarity by partition refinement over the request
//! children of two generator-free terms.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::CoreError;
use crate::rational::Rational;
use crate::signature::Symbol;
use crate::term::{Children, Term};

#[derive(Clone, Debug)]
pub struct Bisimulation {
    pub bisimilar: bool,
    /// Related pairs of states, one drawn from each side.
    pub relation: Vec<(Arc<Term>, Arc<Term>)>,
}

type Step = BTreeMap<(Symbol, Vec<usize>), Rational>;

struct States {
    terms: Vec<Arc<Term>>,
    index: HashMap<Arc<Term>, usize>,
    /// For each state, the flattened request distribution with child states.
    moves: Vec<Vec<(Rational, Symbol, Vec<usize>)>>,
}

impl States {
    fn add(&mut self, t: &Arc<Term>) -> Result<usize, CoreError> {
        if let Some(&i) = self.index.get(t) {
            return Ok(i);
        }
        let id = self.terms.len();
        self.terms.push(t.clone());
        self.index.insert(t.clone(), id);
        self.moves.push(Vec::new());
        let mut mv = Vec::new();
        self.flatten(t, Rational::one(), &mut mv)?;
        self.moves[id] = mv;
        Ok(id)
    }

    fn flatten(&mut self, t: &Term, w: Rational, out: &mut Vec<(Rational, Symbol, Vec<usize>)>) -> Result<(), CoreError> {
        if w.is_zero() {
            return Ok(());
        }
        match t {
            Term::Req { op, children: Children::Finite(cs) } => {
                let ids = cs.iter().map(|c| self.add(c)).collect::<Result<_, _>>()?;
                out.push((w, op.clone(), ids));
            }
            Term::Req { op, .. } => {
                return Err(CoreError::GeneratorUnsupported(format!("ω-ary request {op} has generated children")))
            }
            Term::Choice { p, left, right } => {
                self.flatten(left, &w * p, out)?;
                self.flatten(right, &w * (Rational::one() - p), out)?;
            }
            Term::Sum { coeffs, branches, generator } => {
                if generator.is_some() {
                    return Err(CoreError::GeneratorUnsupported("sum with a generated tail".into()));
                }
                for (p, b) in coeffs.explicit.iter().zip(branches) {
                    self.flatten(b, &w * p, out)?;
                }
            }
        }
        Ok(())
    }
}

pub fn bisimilar(t1: &Term, t2: &Term) -> Result<Bisimulation, CoreError> {
    let mut st = States { terms: Vec::new(), index: HashMap::new(), moves: Vec::new() };
    let a = st.add(&Arc::new(t1.clone()))?;
    let b = st.add(&Arc::new(t2.clone()))?;
    let n = st.terms.len();

    let mut class = vec![0usize; n];
    loop {
        let mut keys: BTreeMap<(usize, Vec<((Symbol, Vec<usize>), Rational)>), usize> = BTreeMap::new();
        let mut next = vec![0usize; n];
        for s in 0..n {
            let mut step: Step = BTreeMap::new();
            for (w, op, cs) in &st.moves[s] {
                let key = (op.clone(), cs.iter().map(|&c| class[c]).collect());
                *step.entry(key).or_insert_with(Rational::zero) += w;
            }
            let key = (class[s], step.into_iter().collect());
            let fresh = keys.len();
            next[s] = *keys.entry(key).or_insert(fresh);
        }
        let stable = keys.len() == class.iter().collect::<std::collections::BTreeSet<_>>().len();
        class = next;
        if stable {
            break;
        }
    }

    // States first reached from t2 may coincide with states of t1; the
    // left side is every state reachable from t1.
    let mut from_left = vec![false; n];
    mark(&st, a, &mut from_left);
    let mut from_right = vec![false; n];
    mark(&st, b, &mut from_right);
    let mut relation = Vec::new();
    for i in (0..n).filter(|&i| from_left[i]) {
        for j in (0..n).filter(|&j| from_right[j]) {
            if class[i] == class[j] {
                relation.push((st.terms[i].clone(), st.terms[j].clone()));
            }
        }
    }
    Ok(Bisimulation { bisimilar: class[a] == class[b], relation })
}

fn mark(st: &States, s: usize, seen: &mut [bool]) {
    if seen[s] {
        return;
    }
    seen[s] = true;
    for (_, _, cs) in &st.moves[s] {
        for &c in cs {
            mark(st, c, seen);
        }
    }
}
