//! Steady normal forms: dyadic sums of well-founded components whose
//! prefix sums stay uniformly below the whole, with explicit margins.

use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::CoreError;
use crate::normalforms::family::{comb, dyadic_sum, Components, Lazy, Regather};
use crate::normalforms::light::{diagonal, entry};
use crate::rational::{min, pow2_neg, Rational};
use crate::semantics::measure::{measure_add, MeasureView};
use crate::semantics::support::support_enum;
use crate::term::{Children, Term};

/// `Σ_n 2^{-n-1} · components(n)` with `witness(m)` a margin for the
/// prefix of length `m`.
#[derive(Clone)]
pub struct SteadyForm {
    pub components: Components,
    pub witness: Arc<Lazy<Rational>>,
}

impl SteadyForm {
    pub fn term(&self) -> Term {
        dyadic_sum("steady", self.components.clone())
    }

    /// `Σ_{n<m} 2^{-n-1} ⟦M_n⟧`.
    pub fn prefix(&self, m: u64) -> MeasureView {
        measure_add((0..m).map(|n| MeasureView::scaled_term(self.components.get(n), pow2_neg(n + 1))).collect())
    }
}

fn steady(t: &Arc<Term>) -> SteadyForm {
    match &**t {
        Term::Req { op, children: Children::Finite(cs) } => {
            let kids: Arc<Vec<SteadyForm>> = Arc::new(cs.iter().map(steady).collect());
            let (op, k2) = (op.clone(), kids.clone());
            SteadyForm {
                components: Lazy::new(move |n| {
                    Arc::new(Term::req(op.clone(), kids.iter().map(|k| k.components.get(n)).collect()))
                }),
                witness: Lazy::new(move |m| k2.iter().fold(pow2_neg(m), |d, k| min(&d, &k.witness.get(m)))),
            }
        }
        Term::Req { .. } => unreachable!("ω-ary requests are rejected up front"),
        Term::Choice { p, left, right } => {
            let (l, r) = (steady(left), steady(right));
            let (l2, r2, p2) = (l.clone(), r.clone(), p.clone());
            let q = Rational::one() - p;
            let p = p.clone();
            SteadyForm {
                components: Lazy::new(move |n| {
                    Arc::new(Term::Choice { p: p2.clone(), left: l2.components.get(n), right: r2.components.get(n) })
                }),
                witness: Lazy::new(move |m| min(&(&p * l.witness.get(m)), &(&q * r.witness.get(m)))),
            }
        }
        Term::Sum { .. } => {
            let src = t.clone();
            let kids: Arc<Lazy<Arc<SteadyForm>>> = Lazy::new(move |j| Arc::new(steady(&entry(&src, j).1)));
            let (t1, k1) = (t.clone(), kids.clone());
            let regather = Regather::new(move |r| {
                let (beta, pieces) = diagonal(&t1, r, &|j| k1.get(j).components.clone());
                (beta, Arc::new(comb(&pieces)))
            });
            let (t2, k2) = (t.clone(), kids.clone());
            // Margin for the diagonal prefix Σ_{r<n} β_r N_r.
            let pre = move |n: u64| {
                let mut d = Rational::one();
                for j in 0..n {
                    let (p, _) = entry(&t2, j);
                    if !p.is_zero() {
                        d = min(&d, &(p * k2.get(j).witness.get(n - j)));
                    }
                }
                d
            };
            let rg = regather.clone();
            SteadyForm {
                components: regather.components(),
                witness: Lazy::new(move |m| match rg.max_index_before(m) {
                    None => Rational::one(),
                    Some(r) => pre(r + 1),
                }),
            }
        }
    }
}

pub fn steady_nf(t: &Term) -> Result<SteadyForm, CoreError> {
    if t.has_omega() {
        return Err(CoreError::SignatureNotFinitary("the program uses an ω-ary output".into()));
    }
    Ok(steady(&Arc::new(t.clone())))
}

/// Checks `prefix_m(s) + d_m ≤ ⟦t⟧(s)` on the support of each prefix with
/// `1 ≤ m ≤ upto`, for plays with at most `depth` outputs.
pub fn certify_steady(form: &SteadyForm, t: &Term, upto: u64, depth: usize, eps: &Rational) -> Result<(), CoreError> {
    let total = MeasureView::of_term(t);
    for m in 1..=upto {
        let prefix = form.prefix(m);
        let d = form.witness.get(m);
        if d <= Rational::zero() {
            return Err(CoreError::NotSteady(format!("non-positive margin for prefix {m}")));
        }
        for (s, v) in support_enum(&prefix, depth, eps, 0)? {
            let tv = total.value(&s, eps)?;
            if v.hi.clone() + &d > tv.lo {
                return Err(CoreError::NotSteady(format!("margin {d} fails for prefix {m} at `{s}`")));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equivalence::trace_equiv::trace_equiv;
    use crate::rational::rat;
    use crate::syntax::parse_term;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn constant_witnesses() {
        let f = steady_nf(&t("Bye")).unwrap();
        for m in 0..6 {
            assert_eq!(f.witness.get(m), pow2_neg(m));
            assert_eq!(f.components.get(m).to_dsl(), "Bye");
        }
        certify_steady(&f, &t("Bye"), 6, 4, &pow2_neg(20)).unwrap();
    }

    #[test]
    fn sums_choices_and_requests_certify() {
        let e = pow2_neg(20);
        for src in [
            "sum { 1/2 : A; 1/2 : B }",
            "f(sum { 1/3 : a; 2/3 : b }, c) +[1/4] g",
            "sum { tail(n >= 0) : 1/2^(n+1) : iterate k < n : star(b, _) on star(a, c) }",
        ] {
            let x = t(src);
            let f = steady_nf(&x).unwrap();
            certify_steady(&f, &x, 6, 6, &e).unwrap_or_else(|err| panic!("{src}: {err}"));
            assert!(trace_equiv(&x, &f.term(), 4, &pow2_neg(14), 2).unwrap().is_equivalent(), "{src}");
        }
    }

    #[test]
    fn regathered_slots_are_not_steady_without_the_diagonal() {
        // Light form slots A, B, B, … put all of A in the first slot.
        let x = t("sum { 1/2 : A; 1/2 : B }");
        let f = steady_nf(&x).unwrap();
        assert_ne!(f.components.get(0).to_dsl(), "A");
        assert!(f.witness.get(1) > rat(0, 1));
    }

    #[test]
    fn omega_is_rejected() {
        let x = t("b(c[0]; n => c[n])");
        assert!(matches!(steady_nf(&x), Err(CoreError::SignatureNotFinitary(_))));
    }
}
