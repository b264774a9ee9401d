//! The normal forms of a small program and of a countable family.

use probstrat::corpus;
use probstrat::normalforms::{certify_steady, ff_nf, light_nf, shallow_nf, steady_nf, wf_nf};
use probstrat::rational::pow2_neg;
use probstrat::semantics::trace_value;
use probstrat::{parse_term, Play};

fn main() -> Result<(), probstrat::CoreError> {
    let eps = pow2_neg(30);
    let t = parse_term("Happy(Bye, Bye +[1/3] Happy(Bye, Bye)) +[1/2] (Bye +[1/4] Happy(Happy(Bye, Bye), Bye))")?;
    println!("term     {t}");
    println!("shallow  {}", shallow_nf(&t, &eps)?);
    println!("ff       {}", ff_nf(&t)?);
    println!("wf       {}", wf_nf(&t, &eps)?);
    let light = light_nf(&t);
    let s = Play::parse_loose("Happy?1.Happy?0.Bye")?;
    println!("light    agrees on {s}: {} = {}", trace_value(&light, &s, &eps), trace_value(&t, &s, &eps));

    let (_, fam) = corpus::load(corpus::NOTWNF_SIG, corpus::NOTWNF)?;
    println!("\nfamily   {}", fam.to_dsl());
    println!("shallow  {}", shallow_nf(&fam, &eps)?.to_dsl());
    match ff_nf(&fam) {
        Ok(f) => println!("ff       {f}"),
        Err(e) => println!("ff       {e}"),
    }
    let form = steady_nf(&fam)?;
    certify_steady(&form, &fam, 4, 6, &eps)?;
    println!("steady   first components certified:");
    for i in 0..4 {
        let c = form.components.get(i);
        println!("  P_{i} = {}
      margin below the first {} = {}", c.to_dsl(), i + 1, form.witness.get(i + 1));
    }
    let p = form.prefix(4);
    println!("weight of the first four: {}", p.value(&Play::empty(), &eps)?);
    Ok(())
}
