//! Playing programs against counterstrategies: exact continuation
//! probabilities, an adversary, sampling and the finitely founded series.

use probstrat::corpus;
use probstrat::games::{adversarial_rho, cont_prob, definability_decomp, extract_ff, sample_many, victorious, Counterstrategy, Outcome};
use probstrat::rational::{pow2_neg, rat};
use probstrat::semantics::MeasureView;

fn main() -> Result<(), probstrat::CoreError> {
    let eps = pow2_neg(40);
    let (_, happy) = corpus::load(corpus::HAPPY_SIG, corpus::HAPPY)?;
    let rho = Counterstrategy::parse(corpus::HAPPY_CS)?;
    println!("counterstrategy:\n{rho}");
    let levels = cont_prob(&MeasureView::of_term(&happy), &rho, 4, &eps)?;
    println!("P^m under it: {}", levels.iter().map(ToString::to_string).collect::<Vec<_>>().join(", "));
    let adv = adversarial_rho(&happy, 4)?;
    let levels = cont_prob(&MeasureView::of_term(&happy), &adv, 4, &eps)?;
    println!("P^m under the adversary: {}", levels.iter().map(ToString::to_string).collect::<Vec<_>>().join(", "));
    let report = victorious(&happy, Some(&rho), 4, corpus::G, &eps)?;
    println!("syntactic certificate: {}, failure mass {}", report.syntactic, report.fail_mass);

    let (_, fam) = corpus::load(corpus::NOTWNF_SIG, corpus::NOTWNF)?;
    let zero = Counterstrategy::constant(0);
    let runs = sample_many(&fam, &zero, 3, 1, 4000, &eps)?;
    let exhausted = runs.iter().filter(|r| r.outcome == Outcome::Exhausted).count();
    let p3 = &cont_prob(&MeasureView::of_term(&fam), &zero, 3, &eps)?[3];
    println!("\nfamily still running after 3 rounds: {exhausted}/4000 sampled, exactly {p3}");

    let (lam, tau) = extract_ff(&fam, &rat(7, 8))?;
    println!("finitely founded part of weight {lam}: {tau}");
    let dec = definability_decomp(&fam, 4, 16, &eps)?;
    for (k, t) in dec.parts.iter().enumerate() {
        println!("  τ_{k} (weight 2^-{}) = {t}", k + 1);
    }
    println!("residual weight {}", dec.residual_weight);
    Ok(())
}
