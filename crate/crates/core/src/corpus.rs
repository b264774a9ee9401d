//! The bundled example programs.

use crate::error::CoreError;
use crate::play::Play;
use crate::rational::Rational;
use crate::signature::Signature;
use crate::syntax::parse_program;
use crate::term::Term;

pub const HAPPY_SIG: &str = include_str!("../corpus/happy.sig");
pub const HAPPY: &str = include_str!("../corpus/happy.prog");
pub const HAPPY_EXPECT: &str = include_str!("../corpus/happy.expect");
pub const HAPPY_CS: &str = include_str!("../corpus/happy.cs");
pub const TRACE1_SIG: &str = include_str!("../corpus/trace1.sig");
pub const TRACE1_M: &str = include_str!("../corpus/trace1_m.prog");
pub const TRACE1_N: &str = include_str!("../corpus/trace1_n.prog");
pub const TRACE2_SIG: &str = include_str!("../corpus/trace2.sig");
pub const TRACE2_M: &str = include_str!("../corpus/trace2_m.prog");
pub const TRACE2_N: &str = include_str!("../corpus/trace2_n.prog");
pub const TRACE2_EXPECT: &str = include_str!("../corpus/trace2.expect");
pub const NOTWNF_SIG: &str = include_str!("../corpus/notwnf.sig");
pub const NOTWNF: &str = include_str!("../corpus/notwnf.prog");
pub const NOTWNF_CS: &str = include_str!("../corpus/notwnf.cs");
pub const INF_SIG: &str = include_str!("../corpus/infexample.sig");
pub const INF: &str = include_str!("../corpus/infexample.prog");

pub const G: u64 = 16;

pub fn load(sig: &str, prog: &str) -> Result<(Signature, Term), CoreError> {
    let sig = Signature::parse(sig)?;
    let t = parse_program(prog, &sig, G)?;
    Ok((sig, t))
}

/// Lines `play = value`; blank lines and `#` comments are skipped.
pub fn parse_expect(text: &str) -> Result<Vec<(Play, Rational)>, CoreError> {
    let mut out = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let (s, v) = line.split_once('=').ok_or_else(|| CoreError::InvalidInput(format!("expected `play = value`, got `{line}`")))?;
        let v: Rational = v.trim().parse().map_err(|_| CoreError::InvalidInput(format!("bad value in `{line}`")))?;
        out.push((Play::parse_loose(s.trim())?, v));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::pow2_neg;
    use crate::semantics::eval::trace_value;

    #[test]
    fn every_program_loads() {
        for (s, p) in [(HAPPY_SIG, HAPPY), (TRACE1_SIG, TRACE1_M), (TRACE1_SIG, TRACE1_N), (TRACE2_SIG, TRACE2_M), (TRACE2_SIG, TRACE2_N), (NOTWNF_SIG, NOTWNF), (INF_SIG, INF)] {
            load(s, p).unwrap_or_else(|e| panic!("{p}: {e}"));
        }
    }

    #[test]
    fn expected_values_hold() {
        for (sig, prog, exp) in [(HAPPY_SIG, HAPPY, HAPPY_EXPECT), (TRACE2_SIG, TRACE2_M, TRACE2_EXPECT), (TRACE2_SIG, TRACE2_N, TRACE2_EXPECT)] {
            let (sig, t) = load(sig, prog).unwrap();
            for (s, v) in parse_expect(exp).unwrap() {
                s.check(&sig).unwrap();
                let got = trace_value(&t, &s, &pow2_neg(30));
                assert!(got.contains(&v), "{s}: {got:?} vs {v}");
            }
        }
    }
}
