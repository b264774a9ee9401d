//! Terminal play: the program's outputs are sampled, a person types the
//! inputs.

use std::io::{BufRead, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::cli::config::Config;
use crate::error::CoreError;
use crate::games::sample::sample_head;
use crate::games::Counterstrategy;
use crate::play::Play;
use crate::semantics::head::condition;
use crate::semantics::measure::{Inputs, MeasureView};
use crate::term::Term;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Tallies {
    pub games: usize,
    pub failures: usize,
    pub continuations: usize,
    /// Plays of finished games.
    pub finished: Vec<String>,
}

impl Tallies {
    pub fn to_json(&self) -> Value {
        json!({
            "games": self.games,
            "failures": self.failures,
            "continuations": self.continuations,
            "finished": self.finished,
        })
    }
}

fn io(e: std::io::Error) -> CoreError {
    CoreError::InvalidInput(format!("terminal: {e}"))
}

/// Reads commands from `input` until `q` or end of input. A number is an
/// input, `f` refuses (a failure), an empty line takes the counterstrategy's
/// prescription when one is given.
pub fn repl(t: &Term, rho: Option<&Counterstrategy>, cfg: &Config, input: &mut impl BufRead, out: &mut impl Write) -> Result<Tallies, CoreError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let m = MeasureView::of_term(t);
    let mut tallies = Tallies::default();
    let mut cur = t.clone();
    let mut play = Play::empty();
    let mut line = String::new();
    loop {
        let k = sample_head(&cur, &mut rng, &cfg.eps)?;
        let sk = play.with_output(k.clone());
        let arity = m.inputs(&sk, &cfg.eps).unwrap_or(Inputs::Finite(0));
        writeln!(out, "program: {k}").map_err(io)?;
        let finish = |tallies: &mut Tallies, s: &Play, out: &mut dyn Write| -> Result<(), CoreError> {
            tallies.games += 1;
            tallies.failures += 1;
            tallies.finished.push(s.to_string());
            writeln!(out, "failure at {s}\ngames {}, failures {}, continuations {}", tallies.games, tallies.failures, tallies.continuations).map_err(io)
        };
        let range = match arity {
            Inputs::Finite(0) => {
                finish(&mut tallies, &sk, out)?;
                cur = t.clone();
                play = Play::empty();
                continue;
            }
            Inputs::Finite(n) => format!("0..{}", n - 1),
            Inputs::Omega => "any natural".to_string(),
        };
        let hint = rho.map(|r| match r.prescribe(&sk, arity) {
            Some(i) => format!(", enter = {i}"),
            None => ", enter = refuse".into(),
        });
        write!(out, "input ({range}{}, f = refuse, q = quit)> ", hint.unwrap_or_default()).map_err(io)?;
        out.flush().map_err(io)?;
        line.clear();
        if input.read_line(&mut line).map_err(io)? == 0 {
            break;
        }
        let choice = match line.trim() {
            "q" => break,
            "f" => None,
            "" => match rho {
                Some(r) => r.prescribe(&sk, arity),
                None => {
                    writeln!(out, "no counterstrategy loaded; type an input").map_err(io)?;
                    continue;
                }
            },
            s => match s.parse::<u64>() {
                Ok(i) if matches!(arity, Inputs::Omega) || matches!(arity, Inputs::Finite(n) if i < n) => Some(i),
                _ => {
                    writeln!(out, "expected an input in {range}").map_err(io)?;
                    continue;
                }
            },
        };
        match choice {
            None => {
                finish(&mut tallies, &sk, out)?;
                cur = t.clone();
                play = Play::empty();
            }
            Some(i) => {
                cur = condition(&cur, &k, i, &cfg.eps)?;
                play = sk.with_input(i);
                tallies.continuations += 1;
            }
        }
    }
    Ok(tallies)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;

    fn run(prog: &str, rho: Option<&Counterstrategy>, typed: &str) -> (Tallies, String) {
        let t = parse_term(prog).unwrap();
        let mut out = Vec::new();
        let tallies = repl(&t, rho, &Config::default(), &mut typed.as_bytes(), &mut out).unwrap();
        (tallies, String::from_utf8(out).unwrap())
    }

    #[test]
    fn typed_inputs_drive_the_game() {
        let (t, out) = run("Happy(Bye, Happy(Bye, Bye))", None, "1\n0\nq\n");
        assert_eq!(t.continuations, 2);
        assert_eq!(t.finished, vec!["Happy?1.Happy?0.Bye"]);
        assert!(out.contains("program: Happy"));
    }

    #[test]
    fn refusals_and_prescriptions() {
        let rho = Counterstrategy::constant(1);
        let (t, _) = run("Happy(Bye, Happy(Bye, Bye))", Some(&rho), "f\n\n\n");
        assert_eq!((t.games, t.failures, t.continuations), (2, 2, 2));
        assert_eq!(t.finished, vec!["Happy", "Happy?1.Happy?1.Bye"]);
    }

    #[test]
    fn out_of_range_inputs_are_rejected() {
        let (t, out) = run("Happy(Bye, Bye)", None, "7\nx\n0\n");
        assert!(out.contains("expected an input in 0..1"));
        assert_eq!(t.finished, vec!["Happy?0.Bye"]);
    }
}
