//! Proving two countable families equal by interleaving their steady
//! forms, and why an ω-ary program is out of reach.

use probstrat::corpus;
use probstrat::equivalence::{tensor_equiv_finitary, EquivVerdict, TensorOptions};
use probstrat::normalforms::{is_uniformly_below, UniformVerdict};
use probstrat::rational::{pow2_neg, rat};
use probstrat::semantics::{measure_scale, MeasureView};

fn main() -> Result<(), probstrat::CoreError> {
    let (_, m) = corpus::load(corpus::TRACE1_SIG, corpus::TRACE1_M)?;
    let (_, n) = corpus::load(corpus::TRACE1_SIG, corpus::TRACE1_N)?;
    let opts = TensorOptions { rounds: 4, ..TensorOptions::default() };
    let report = tensor_equiv_finitary(&m, &n, &opts)?;
    match &report.verdict {
        EquivVerdict::ProvedEquivalent(p) => {
            p.replay()?;
            println!("proved equivalent, {} rewrite steps replayed", p.steps.len());
        }
        other => println!("not proved: {other:?}"),
    }
    if let Some(il) = &report.interleaving {
        println!("cuts in M: {:?}", il.m);
        println!("cuts in N: {:?}", il.n);
        for (r, (a, b)) in il.margins.iter().enumerate() {
            println!("  round {r}: margins {a} and {b}");
        }
        println!("uncovered weight: {}", il.residual);
    }

    let (_, inf) = corpus::load(corpus::INF_SIG, corpus::INF)?;
    println!("\nω-ary program: {}", tensor_equiv_finitary(&inf, &inf, &opts).unwrap_err());
    let total = MeasureView::of_term(&inf);
    let half = measure_scale(&total, &rat(1, 2));
    if let UniformVerdict::Refuted(vs) = is_uniformly_below(&half, &total, 2, 6, &pow2_neg(30))? {
        println!("half of it is not uniformly below it:");
        for v in vs {
            println!("  at {}: {} + {} exceeds {}", v.play, v.below, v.d, v.above);
        }
    }
    Ok(())
}
