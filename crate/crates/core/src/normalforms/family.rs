//! Lazily computed sequences and the dyadic regathering of a weighted
//! sequence of components into slots of weight `2^{-n-1}`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_traits::{One, Zero};

use crate::coeff::CoeffFamily;
use crate::rational::{pow2_neg, Rational};
use crate::term::{Generator, NativeGen, Term};

/// A memoized function of the naturals.
pub struct Lazy<T> {
    f: Box<dyn Fn(u64) -> T + Send + Sync>,
    memo: Mutex<HashMap<u64, T>>,
}

impl<T: Clone> Lazy<T> {
    pub fn new(f: impl Fn(u64) -> T + Send + Sync + 'static) -> Arc<Self> {
        Arc::new(Lazy { f: Box::new(f), memo: Mutex::new(HashMap::new()) })
    }

    pub fn get(&self, n: u64) -> T {
        if let Some(v) = self.memo.lock().unwrap().get(&n) {
            return v.clone();
        }
        let v = (self.f)(n);
        self.memo.lock().unwrap().insert(n, v.clone());
        v
    }
}

pub type Components = Arc<Lazy<Arc<Term>>>;

/// `Σ_n 2^{-n-1} · comps(n)`.
pub fn dyadic_sum(name: &str, comps: Components) -> Term {
    let gen = NativeGen::new(name, None, move |n| comps.get(n));
    Term::Sum { coeffs: CoeffFamily::dyadic(), branches: Vec::new(), generator: Some(Generator::Native(gen)) }
}

/// Pieces `(w_i, X_i)` of total weight `cap` as the right comb
/// `X_0 +_{w_0/cap} (X_1 +_{w_1/(cap-w_0)} (…))`.
pub fn comb(pieces: &[(Rational, Arc<Term>)]) -> Term {
    let cap: Rational = pieces.iter().map(|(w, _)| w.clone()).sum();
    comb_from(pieces, cap)
}

fn comb_from(pieces: &[(Rational, Arc<Term>)], cap: Rational) -> Term {
    match pieces {
        [] => Term::empty(),
        [(_, x)] => (**x).clone(),
        [(w, x), rest @ ..] => {
            let p = w / &cap;
            if p.is_one() {
                return (**x).clone();
            }
            Term::Choice { p, left: x.clone(), right: Arc::new(comb_from(rest, cap - w)) }
        }
    }
}

struct RegatherState {
    /// For each computed slot: its pieces as (weight, component index).
    slots: Vec<Vec<(Rational, u64)>>,
    next: u64,
    left: Rational,
}

/// Greedy dyadic regathering of a sequence of weighted components whose
/// weights sum to 1: slot `n` takes weight `2^{-n-1}` from the components in
/// index order, splitting a component across slots when it overflows.
pub struct Regather {
    source: Arc<dyn Fn(u64) -> (Rational, Arc<Term>) + Send + Sync>,
    state: Mutex<RegatherState>,
}

impl Regather {
    pub fn new(source: impl Fn(u64) -> (Rational, Arc<Term>) + Send + Sync + 'static) -> Arc<Self> {
        Arc::new(Regather {
            source: Arc::new(source),
            state: Mutex::new(RegatherState { slots: Vec::new(), next: 0, left: Rational::zero() }),
        })
    }

    /// Pieces of slot `n`.
    pub fn slot(&self, n: u64) -> Vec<(Rational, u64)> {
        let mut st = self.state.lock().unwrap();
        while st.slots.len() as u64 <= n {
            let mut cap = pow2_neg(st.slots.len() as u64 + 1);
            let mut pieces = Vec::new();
            let mut guard = 0u32;
            while !cap.is_zero() {
                if st.left.is_zero() {
                    let (w, _) = (self.source)(st.next);
                    st.left = w;
                    st.next += 1;
                    guard += 1;
                    assert!(guard < 1_000_000, "regathering: component weights do not fill a slot");
                    continue;
                }
                let take = if st.left < cap { st.left.clone() } else { cap.clone() };
                pieces.push((take.clone(), st.next - 1));
                cap -= &take;
                st.left -= &take;
            }
            st.slots.push(pieces);
        }
        st.slots[n as usize].clone()
    }

    /// Highest component index used by slots `0..m`.
    pub fn max_index_before(&self, m: u64) -> Option<u64> {
        (0..m).flat_map(|n| self.slot(n)).map(|(_, i)| i).max()
    }

    pub fn slot_term(&self, n: u64) -> Arc<Term> {
        let pieces: Vec<(Rational, Arc<Term>)> =
            self.slot(n).into_iter().map(|(w, i)| (w, (self.source)(i).1)).collect();
        Arc::new(comb(&pieces))
    }

    pub fn components(self: &Arc<Self>) -> Components {
        let me = self.clone();
        Lazy::new(move |n| me.slot_term(n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use crate::syntax::parse_term;

    #[test]
    fn regather_thirds() {
        let a = Arc::new(parse_term("A").unwrap());
        let b = Arc::new(parse_term("B").unwrap());
        let r = Regather::new(move |i| match i {
            0 => (rat(1, 3), a.clone()),
            1 => (rat(2, 3), b.clone()),
            _ => (rat(0, 1), a.clone()),
        });
        assert_eq!(r.slot(0), vec![(rat(1, 3), 0), (rat(1, 6), 1)]);
        assert_eq!(r.slot_term(0).to_dsl(), "(A +[2/3] B)");
        assert_eq!(r.slot_term(1).to_dsl(), "B");
        assert_eq!(r.slot_term(5).to_dsl(), "B");
        assert_eq!(r.max_index_before(3), Some(1));
    }

    #[test]
    fn comb_weights() {
        let x = |s: &str| Arc::new(parse_term(s).unwrap());
        let t = comb(&[(rat(1, 8), x("a")), (rat(1, 8), x("b")), (rat(1, 4), x("c"))]);
        assert_eq!(t.to_dsl(), "(a +[1/4] (b +[1/3] c))");
    }
}
