//! The equational laws relating sums, choices and requests, as instance
//! checkers. Every checker is symmetric in its two sides.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::CoreError;
use crate::play::Play;
use crate::rational::Rational;
use crate::term::{Children, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Law {
    Convex1,
    Convex2,
    Convex3,
    OmegaConvex1,
    OmegaConvex2,
    TensorBinary,
    TensorCountable,
}

impl Law {
    pub const ALL: [Law; 7] = [
        Law::Convex1,
        Law::Convex2,
        Law::Convex3,
        Law::OmegaConvex1,
        Law::OmegaConvex2,
        Law::TensorBinary,
        Law::TensorCountable,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            Law::Convex1 => "convex-1",
            Law::Convex2 => "convex-2",
            Law::Convex3 => "convex-3",
            Law::OmegaConvex1 => "omega-convex-1",
            Law::OmegaConvex2 => "omega-convex-2",
            Law::TensorBinary => "tensor-binary",
            Law::TensorCountable => "tensor-countable",
        }
    }

    /// Does `(a, b)` or `(b, a)` instantiate the law at the root?
    pub fn holds(&self, a: &Term, b: &Term) -> bool {
        self.directed(a, b) || self.directed(b, a)
    }

    fn directed(&self, l: &Term, r: &Term) -> bool {
        match self {
            Law::Convex1 => convex1(l, r),
            Law::Convex2 => convex2(l, r),
            Law::Convex3 => convex3(l, r),
            Law::OmegaConvex1 => omega_convex1(l, r),
            Law::OmegaConvex2 => omega_convex2(l, r),
            Law::TensorBinary => tensor_binary(l, r),
            Law::TensorCountable => tensor_countable(l, r),
        }
    }
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Law {
    type Err = CoreError;
    fn from_str(s: &str) -> Result<Self, CoreError> {
        Law::ALL
            .into_iter()
            .find(|l| l.id() == s)
            .ok_or_else(|| CoreError::Unsupported(format!("unknown law {s}")))
    }
}

fn one_minus(p: &Rational) -> Rational {
    Rational::one() - p
}

/// `M +_p M = M`
fn convex1(l: &Term, r: &Term) -> bool {
    matches!(l, Term::Choice { left, right, .. } if left == right && **left == *r)
}

/// `M +_p N = N +_{1-p} M`
fn convex2(l: &Term, r: &Term) -> bool {
    match (l, r) {
        (Term::Choice { p, left: m, right: n }, Term::Choice { p: q, left: n2, right: m2 }) => {
            *q == one_minus(p) && m == m2 && n == n2
        }
        _ => false,
    }
}

/// `(M +_p N) +_q P = M +_{pq} (N +_{q(1-p)/(1-pq)} P)`
fn convex3(l: &Term, r: &Term) -> bool {
    let Term::Choice { p: q, left: inner, right: p3 } = l else { return false };
    let Term::Choice { p, left: m, right: n } = &**inner else { return false };
    let Term::Choice { p: r1, left: m2, right: rest } = r else { return false };
    let Term::Choice { p: r2, left: n2, right: p32 } = &**rest else { return false };
    let pq = p * q;
    if pq.is_one() {
        return false;
    }
    *r1 == pq && *r2 == q * one_minus(p) / one_minus(&pq) && m == m2 && n == n2 && p3 == p32
}

/// Finite entries of a sum or choice node.
fn entries(t: &Term) -> Option<Vec<(Rational, Arc<Term>)>> {
    match t {
        Term::Choice { p, left, right } => Some(vec![(p.clone(), left.clone()), (one_minus(p), right.clone())]),
        Term::Sum { coeffs, branches, generator: None } => {
            Some(coeffs.explicit.iter().cloned().zip(branches.iter().cloned()).collect())
        }
        _ => None,
    }
}

/// `Σ_n δ_{n,m} M_n = M_m`
fn omega_convex1(l: &Term, r: &Term) -> bool {
    let Some(es) = entries(l) else { return false };
    let mut hit = None;
    for (p, b) in &es {
        if p.is_one() && hit.is_none() {
            hit = Some(b);
        } else if !p.is_zero() {
            return false;
        }
    }
    hit.is_some_and(|b| **b == *r)
}

/// Flattened distribution of a sum/choice block over its non-sum leaves.
fn leaves(t: &Term, w: &Rational, acc: &mut HashMap<Term, Rational>) -> bool {
    match entries(t) {
        Some(es) => es.iter().all(|(p, b)| leaves(b, &(w * p), acc)),
        None => {
            if matches!(t, Term::Sum { .. }) {
                return false;
            }
            if !w.is_zero() {
                *acc.entry(t.clone()).or_insert_with(Rational::zero) += w;
            }
            true
        }
    }
}

fn flat(t: &Term) -> Option<HashMap<Term, Rational>> {
    let mut acc = HashMap::new();
    leaves(t, &Rational::one(), &mut acc).then_some(acc)
}

/// `Σ_n p_n Σ_m q_{n,m} M_m = Σ_m (Σ_n p_n q_{n,m}) M_m`, checked as equality
/// of the flattened leaf distributions. This admits any finite nesting at
/// one position, i.e. any composite of ω-convex steps there.
fn omega_convex2(l: &Term, r: &Term) -> bool {
    if entries(l).is_none() {
        return false;
    }
    match (flat(l), flat(r)) {
        (Some(a), Some(b)) => a == b,
        _ => false,
    }
}

/// `k(M_i) +_p k(M'_i) = k(M_i +_p M'_i)`
fn tensor_binary(l: &Term, r: &Term) -> bool {
    let Term::Choice { p, left, right } = l else { return false };
    let (Term::Req { op: k1, children: Children::Finite(a) }, Term::Req { op: k2, children: Children::Finite(b) }) =
        (&**left, &**right)
    else {
        return false;
    };
    let Term::Req { op: k3, children: Children::Finite(c) } = r else { return false };
    if k1 != k2 || k1 != k3 || a.len() != b.len() || a.len() != c.len() {
        return false;
    }
    a.iter().zip(b).zip(c).all(|((x, y), z)| match &**z {
        Term::Choice { p: q, left: x2, right: y2 } => q == p && x == x2 && y == y2,
        _ => false,
    })
}

/// `Σ_n p_n k(M_{n,i}) = k(Σ_n p_n M_{n,i})`
fn tensor_countable(l: &Term, r: &Term) -> bool {
    let Term::Sum { coeffs, branches, generator: None } = l else { return false };
    let Term::Req { op, children: Children::Finite(c) } = r else { return false };
    let mut rows = Vec::new();
    for b in branches {
        match &**b {
            Term::Req { op: k, children: Children::Finite(cs) } if k == op && cs.len() == c.len() => rows.push(cs),
            _ => return false,
        }
    }
    c.iter().enumerate().all(|(i, z)| match &**z {
        Term::Sum { coeffs: q, branches: zs, generator: None } => {
            q.explicit == coeffs.explicit && zs.len() == rows.len() && zs.iter().zip(&rows).all(|(z, row)| *z == row[i])
        }
        _ => false,
    })
}

/// Checks the instance syntactically, then compares both sides exactly on
/// every play with at most `depth` outputs.
pub fn check_law_soundness(law: Law, lhs: &Term, rhs: &Term, depth: usize) -> Result<Option<Play>, CoreError> {
    if !law.holds(lhs, rhs) {
        return Err(CoreError::Unsupported(format!("not an instance of {law}")));
    }
    crate::equivalence::trace_equiv::exact_counterplay(lhs, rhs, depth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;

    fn holds(law: Law, a: &str, b: &str) -> bool {
        law.holds(&parse_term(a).unwrap(), &parse_term(b).unwrap())
    }

    #[test]
    fn convex_instances() {
        assert!(holds(Law::Convex1, "f(a) +[1/3] f(a)", "f(a)"));
        assert!(holds(Law::Convex1, "f(a)", "f(a) +[1/3] f(a)"));
        assert!(!holds(Law::Convex1, "f(a) +[1/3] f(b)", "f(a)"));
        assert!(holds(Law::Convex2, "a +[1/3] b", "b +[2/3] a"));
        assert!(!holds(Law::Convex2, "a +[1/3] b", "b +[1/3] a"));
        // weights 1/4, 1/4, 1/2 on both sides
        assert!(holds(Law::Convex3, "(a +[1/2] b) +[1/2] c", "a +[1/4] (b +[1/3] c)"));
        assert!(!holds(Law::Convex3, "(a +[1/2] b) +[1/2] c", "a +[2/3] (b +[3/4] c)"));
    }

    #[test]
    fn omega_convex_instances() {
        assert!(holds(Law::OmegaConvex1, "sum { 0 : a; 1 : b; 0 : c }", "b"));
        assert!(!holds(Law::OmegaConvex1, "sum { 1/2 : a; 1/2 : b }", "b"));
        assert!(holds(
            Law::OmegaConvex2,
            "sum { 1/2 : sum { 1/2 : a; 1/2 : b }; 1/2 : sum { 1 : a; 0 : b } }",
            "sum { 3/4 : a; 1/4 : b }"
        ));
        assert!(!holds(Law::OmegaConvex2, "sum { 1/2 : a; 1/2 : b }", "sum { 1/3 : a; 2/3 : b }"));
    }

    #[test]
    fn tensor_instances() {
        assert!(holds(Law::TensorBinary, "f(a, b) +[1/3] f(c, d)", "f(a +[1/3] c, b +[1/3] d)"));
        assert!(!holds(Law::TensorBinary, "f(a, b) +[1/3] g(c, d)", "f(a +[1/3] c, b +[1/3] d)"));
        assert!(holds(
            Law::TensorCountable,
            "sum { 1/2 : f(a); 1/4 : f(b); 1/4 : f(c) }",
            "f(sum { 1/2 : a; 1/4 : b; 1/4 : c })"
        ));
    }

    #[test]
    fn instances_are_sound_on_plays() {
        let cases = [
            (Law::Convex3, "(f(a) +[1/2] b) +[1/3] c", "f(a) +[1/6] (b +[1/5] c)"),
            (Law::TensorBinary, "f(a, b) +[1/3] f(c, d)", "f(a +[1/3] c, b +[1/3] d)"),
        ];
        for (law, a, b) in cases {
            let r = check_law_soundness(law, &parse_term(a).unwrap(), &parse_term(b).unwrap(), 6).unwrap();
            assert_eq!(r, None, "{law}");
        }
    }
}
