//! Exact trace values of the questionnaire program and its support.

use probstrat::corpus;
use probstrat::semantics::{support_enum, trace_value, MeasureView};
use probstrat::Play;

fn main() -> Result<(), probstrat::CoreError> {
    let (sig, t) = corpus::load(corpus::HAPPY_SIG, corpus::HAPPY)?;
    let eps = probstrat::rational::pow2_neg(30);
    println!("program: {t}\n");
    for s in ["Happy", "Happy?1.Happy", "Happy?1.Happy?0.Bye", "Happy?1.Happy?1.Happy?0.Bye"] {
        let s = Play::parse(s, &sig)?;
        println!("{:<32} {}", s.to_string(), trace_value(&t, &s, &eps));
    }
    println!("\nsupport to three outputs:");
    for (s, v) in support_enum(&MeasureView::of_term(&t), 3, &eps, 0)? {
        println!("  {:<32} {v}", if s.is_empty() { "ε".to_string() } else { s.to_string() });
    }
    Ok(())
}
