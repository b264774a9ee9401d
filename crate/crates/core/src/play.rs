//! Plays: alternating output/input sequences.

use std::fmt;

use crate::error::CoreError;
use crate::signature::{Signature, Symbol};

/// `k_0 i_0 … k_{n-1} i_{n-1}` followed by an optional dangling output.
/// Without the dangling output the play is active-ending.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Play {
    pub moves: Vec<(Symbol, u64)>,
    pub last: Option<Symbol>,
}

/// A borrowed suffix of a play, used while descending through a term.
#[derive(Clone, Copy, Debug)]
pub struct PlayRef<'a> {
    pub moves: &'a [(Symbol, u64)],
    pub last: Option<&'a Symbol>,
}

impl<'a> PlayRef<'a> {
    pub fn is_empty(&self) -> bool {
        self.moves.is_empty() && self.last.is_none()
    }

    /// The first output of the play, if any.
    pub fn head(&self) -> Option<&'a Symbol> {
        self.moves.first().map(|(k, _)| k).or(self.last)
    }

    /// The input after the first output and the remaining suffix, or `None`
    /// when the play stops at its first output.
    pub fn split(&self) -> Option<(u64, PlayRef<'a>)> {
        self.moves.first().map(|(_, i)| (*i, PlayRef { moves: &self.moves[1..], last: self.last }))
    }

    pub fn to_play(&self) -> Play {
        Play { moves: self.moves.to_vec(), last: self.last.cloned() }
    }

    pub fn outputs(&self) -> usize {
        self.moves.len() + usize::from(self.last.is_some())
    }
}

impl Play {
    pub fn empty() -> Self {
        Play::default()
    }

    pub fn as_ref(&self) -> PlayRef<'_> {
        PlayRef { moves: &self.moves, last: self.last.as_ref() }
    }

    pub fn is_active(&self) -> bool {
        self.last.is_none()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty() && self.last.is_none()
    }

    /// Number of completed output/input rounds.
    pub fn len(&self) -> usize {
        self.moves.len()
    }

    /// Number of outputs, including a dangling one.
    pub fn outputs(&self) -> usize {
        self.as_ref().outputs()
    }

    /// Number of individual outputs and inputs.
    pub fn elements(&self) -> usize {
        2 * self.moves.len() + usize::from(self.last.is_some())
    }

    /// Extends an active-ending play with an output.
    pub fn with_output(&self, k: Symbol) -> Play {
        assert!(self.last.is_none(), "play already ends with an output");
        Play { moves: self.moves.clone(), last: Some(k) }
    }

    /// Extends a passive-ending play with an input.
    pub fn with_input(&self, i: u64) -> Play {
        let k = self.last.clone().expect("play does not end with an output");
        let mut moves = self.moves.clone();
        moves.push((k, i));
        Play { moves, last: None }
    }

    /// Proper and improper prefixes, shortest first.
    pub fn prefixes(&self) -> Vec<Play> {
        let mut out = vec![Play::empty()];
        for r in 0..self.moves.len() {
            out.push(Play { moves: self.moves[..r].to_vec(), last: Some(self.moves[r].0.clone()) });
            out.push(Play { moves: self.moves[..=r].to_vec(), last: None });
        }
        if let Some(k) = &self.last {
            out.push(Play { moves: self.moves.clone(), last: Some(k.clone()) });
        }
        out
    }

    /// Parses without a signature: `Happy?1.Happy?0.Bye`, `a.0.b` and
    /// `c[1,0]` are accepted; the empty string is ε.
    pub fn parse_loose(text: &str) -> Result<Play, CoreError> {
        let text = text.trim();
        let mut play = Play::empty();
        if text.is_empty() || text == "ε" {
            return Ok(play);
        }
        let bad = |msg: String| CoreError::InvalidInput(msg);
        for token in text.split('.') {
            let token = token.trim();
            if token.is_empty() {
                return Err(bad("empty play element".into()));
            }
            if token.chars().all(|c| c.is_ascii_digit()) {
                if play.last.is_none() {
                    return Err(bad(format!("input `{token}` does not follow an output")));
                }
                let i: u64 = token.parse().map_err(|_| bad(format!("input `{token}` out of range")))?;
                play = play.with_input(i);
                continue;
            }
            if play.last.is_some() {
                return Err(bad(format!("output `{token}` follows an output without an input")));
            }
            let (sym, input) = match token.rsplit_once('?') {
                Some((s, "")) => (s, None),
                Some((s, i)) => {
                    let i: u64 = i.parse().map_err(|_| bad(format!("bad input in `{token}`")))?;
                    (s, Some(i))
                }
                None => (token, None),
            };
            play = play.with_output(parse_symbol(sym)?);
            if let Some(i) = input {
                play = play.with_input(i);
            }
        }
        Ok(play)
    }

    /// Parses and checks every output and input against the signature.
    pub fn parse(text: &str, sig: &Signature) -> Result<Play, CoreError> {
        let play = Play::parse_loose(text)?;
        play.check(sig)?;
        Ok(play)
    }

    pub fn check(&self, sig: &Signature) -> Result<(), CoreError> {
        let known = |k: &Symbol| sig.decl(k).ok_or_else(|| CoreError::UnknownSymbol(k.to_string()));
        for (k, i) in &self.moves {
            if !known(k)?.arity.accepts(*i) {
                return Err(CoreError::InvalidInput(format!("{i} is not an input of {k}")));
            }
        }
        if let Some(k) = &self.last {
            known(k)?;
        }
        Ok(())
    }
}

pub fn parse_symbol(text: &str) -> Result<Symbol, CoreError> {
    let text = text.trim();
    let bad = || CoreError::InvalidInput(format!("bad symbol `{text}`"));
    let (name, idx) = match text.split_once('[') {
        Some((n, rest)) => {
            let inner = rest.strip_suffix(']').ok_or_else(bad)?;
            let idx = inner
                .split(',')
                .map(|s| s.trim().parse::<u64>().map_err(|_| bad()))
                .collect::<Result<Vec<_>, _>>()?;
            (n, idx)
        }
        None => (text, Vec::new()),
    };
    if name.is_empty() || name.chars().any(|c| c.is_whitespace() || "?.,()[];:".contains(c)) {
        return Err(bad());
    }
    Ok(Symbol::indexed(name, idx))
}

impl fmt::Display for Play {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, i) in &self.moves {
            if !first {
                f.write_str(".")?;
            }
            first = false;
            write!(f, "{k}?{i}")?;
        }
        if let Some(k) = &self.last {
            if !first {
                f.write_str(".")?;
            }
            write!(f, "{k}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig() -> Signature {
        Signature::parse("op Bye : []\nop Happy : [yes, no]\nop Age : omega\nop c[_,_] : []").unwrap()
    }

    #[test]
    fn happy_play_round_trips() {
        let p = Play::parse("Happy?1.Happy?0.Bye", &sig()).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.elements(), 5);
        assert!(!p.is_active());
        assert_eq!(p.to_string(), "Happy?1.Happy?0.Bye");
    }

    #[test]
    fn dotted_inputs_and_indices() {
        let p = Play::parse("Age.5.c[1,0]", &sig()).unwrap();
        assert_eq!(p.to_string(), "Age?5.c[1,0]");
    }

    #[test]
    fn empty_and_invalid() {
        assert_eq!(Play::parse("", &sig()).unwrap(), Play::empty());
        assert!(matches!(Play::parse("Bye.0", &sig()), Err(CoreError::InvalidInput(_))));
        assert!(matches!(Play::parse("Nope", &sig()), Err(CoreError::UnknownSymbol(_))));
        assert!(matches!(Play::parse("Happy.Happy", &sig()), Err(CoreError::InvalidInput(_))));
        assert!(matches!(Play::parse("Happy?2", &sig()), Err(CoreError::InvalidInput(_))));
    }

    #[test]
    fn prefixes_alternate() {
        let p = Play::parse_loose("a?0.b").unwrap();
        let ps: Vec<String> = p.prefixes().iter().map(|q| q.to_string()).collect();
        assert_eq!(ps, vec!["", "a", "a?0", "a?0.b"]);
    }
}
