//! Two interleaved countable families that are trace equivalent without
//! being bisimilar, and a near miss that a play separates.

use probstrat::corpus;
use probstrat::equivalence::{trace_equiv, TraceVerdict};
use probstrat::rational::pow2_neg;

fn main() -> Result<(), probstrat::CoreError> {
    let (_, m) = corpus::load(corpus::TRACE1_SIG, corpus::TRACE1_M)?;
    let (_, n) = corpus::load(corpus::TRACE1_SIG, corpus::TRACE1_N)?;
    let eps = pow2_neg(30);
    println!("M = {}", m.to_dsl());
    println!("N = {}\n", n.to_dsl());
    for depth in [2, 4, 8] {
        match trace_equiv(&m, &n, depth, &eps, 0)? {
            TraceVerdict::EquivalentUpTo { plays, .. } => println!("depth {depth}: agree on {plays} plays"),
            TraceVerdict::Distinguished { play, left, right } => println!("depth {depth}: {play} gives {left} vs {right}"),
        }
    }

    let (_, m2) = corpus::load(corpus::TRACE2_SIG, corpus::TRACE2_M)?;
    let (_, n2) = corpus::load(corpus::TRACE2_SIG, corpus::TRACE2_N)?;
    println!("\nindexed pair: {:?}", trace_equiv(&m2, &n2, 4, &eps, 0)?.is_equivalent());

    let skewed = probstrat::parse_term("star(a, c) +[1/3] star(b, star(a, c))")?;
    let fair = probstrat::parse_term("star(a, c) +[1/2] star(b, star(a, c))")?;
    if let TraceVerdict::Distinguished { play, left, right } = trace_equiv(&skewed, &fair, 3, &eps, 0)? {
        println!("near miss separated at {play}: {left} vs {right}");
    }
    Ok(())
}
