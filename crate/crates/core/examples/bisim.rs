//! Bisimilarity of two presentations of the same program, with a rewrite
//! proof that replays law by law.

use probstrat::equivalence::proof::bisim_proof;
use probstrat::equivalence::{bisimilar, canon_bisim};
use probstrat::parse_term;

fn main() -> Result<(), probstrat::CoreError> {
    let m = parse_term("Happy(Bye, Bye +[1/3] Happy(Bye, Bye)) +[1/2] Happy(Bye, Happy(Bye, Bye) +[2/3] Bye)")?;
    let n = parse_term("Happy(Bye, Happy(Bye, Bye) +[2/3] Bye)")?;
    let b = bisimilar(&m, &n)?;
    println!("bisimilar: {} ({} related pairs)", b.bisimilar, b.relation.len());
    println!("same canonical form: {}", canon_bisim(&m)? == canon_bisim(&n)?);
    if let Some(p) = bisim_proof(&m, &n)? {
        p.replay()?;
        println!("proof of {} steps, replayed:", p.steps.len());
        for s in &p.steps {
            println!("  {:<16} at {:?}: {}  ~>  {}", s.law.to_string(), s.path, s.before, s.after);
        }
    }
    let other = parse_term("Happy(Bye, Happy(Bye, Bye) +[1/2] Bye)")?;
    println!("\nagainst {other}: bisimilar = {}", bisimilar(&m, &other)?.bisimilar);
    Ok(())
}
