//! Splitting a known part off a program, and impersonating the light form
//! of one program by another.

use probstrat::corpus;
use probstrat::equivalence::trace_equiv;
use probstrat::normalforms::{impersonate, light_nf, subsplit};
use probstrat::rational::{pow2_neg, rat};
use probstrat::{parse_term, Term};

fn main() -> Result<(), probstrat::CoreError> {
    let eps = pow2_neg(30);
    let (_, m) = corpus::load(corpus::NOTWNF_SIG, corpus::NOTWNF)?;
    let l = parse_term("a(c)")?;
    let p = rat(1, 4);
    let n = subsplit(&m, &l, &p, &eps)?;
    println!("M = {}", m.to_dsl());
    println!("L = {l}, p = {p}");
    println!("N = {}", n.to_dsl());
    let back = Term::choice(p, l, n);
    println!("L +[1/4] N agrees with M: {}", trace_equiv(&back, &m, 6, &eps, 0)?.is_equivalent());

    match subsplit(&m, &parse_term("c")?, &rat(3, 4), &eps) {
        Ok(_) => println!("c at 3/4 split off"),
        Err(e) => println!("c at 3/4: {e}"),
    }

    let (_, m1) = corpus::load(corpus::TRACE1_SIG, corpus::TRACE1_M)?;
    let (_, n1) = corpus::load(corpus::TRACE1_SIG, corpus::TRACE1_N)?;
    let cert = impersonate(&m1, &n1, 3, &eps)?;
    println!("\nimpersonation over {} rounds", cert.rounds);
    for (j, (c, q)) in cert.components.iter().zip(&cert.solutions).enumerate() {
        println!("  P_{j} = {c}\n  Q_{j} = {}", q.to_dsl());
    }
    println!("light form of M vs N: {}", trace_equiv(&light_nf(&m1), &n1, 6, &eps, 0)?.is_equivalent());
    Ok(())
}
