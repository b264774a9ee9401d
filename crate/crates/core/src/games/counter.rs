//! Partial counterstrategies: which input, if any, to feed after each output.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::CoreError;
use crate::play::Play;
use crate::semantics::measure::Inputs;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Policy {
    Fail,
    ConstIndex(u64),
    /// Input `r mod arity` after `r` completed rounds.
    RoundRobin,
    /// Looked up per play; plays missing from the table get input 0.
    Adversarial(BTreeMap<Play, u64>),
}

/// Explicit prescriptions (`None` is an explicit failure) over a default
/// policy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterstrategy {
    pub explicit: BTreeMap<Play, Option<u64>>,
    pub default: Policy,
}

fn within(i: u64, arity: Inputs) -> Option<u64> {
    match arity {
        Inputs::Finite(n) => (i < n).then_some(i),
        Inputs::Omega => Some(i),
    }
}

impl Counterstrategy {
    pub fn new(default: Policy) -> Self {
        Counterstrategy { explicit: BTreeMap::new(), default }
    }

    pub fn fail() -> Self {
        Self::new(Policy::Fail)
    }

    pub fn constant(i: u64) -> Self {
        Self::new(Policy::ConstIndex(i))
    }

    pub fn round_robin() -> Self {
        Self::new(Policy::RoundRobin)
    }

    /// Adds an explicit entry at the passive-ending play `s`.
    pub fn with(mut self, s: Play, input: Option<u64>) -> Result<Self, CoreError> {
        if s.is_active() {
            return Err(CoreError::InvalidInput(format!("`{s}` does not end with an output")));
        }
        self.explicit.insert(s, input);
        self.check_prefixes()?;
        Ok(self)
    }

    /// The input prescribed after the passive-ending play `s`, whose last
    /// output accepts `arity`; `None` makes `s` a failure.
    pub fn prescribe(&self, s: &Play, arity: Inputs) -> Option<u64> {
        if arity == Inputs::Finite(0) {
            return None;
        }
        if let Some(e) = self.explicit.get(s) {
            return e.and_then(|i| within(i, arity));
        }
        match &self.default {
            Policy::Fail => None,
            Policy::ConstIndex(i) => within(*i, arity),
            Policy::RoundRobin => {
                let r = s.len() as u64;
                match arity {
                    Inputs::Finite(n) => Some(r % n),
                    Inputs::Omega => Some(r),
                }
            }
            Policy::Adversarial(table) => within(table.get(s).copied().unwrap_or(0), arity),
        }
    }

    /// What the default policy would prescribe where the arity is unknown,
    /// or `None` when that depends on the arity.
    fn default_hint(&self, s: &Play) -> Option<Option<u64>> {
        match &self.default {
            Policy::Fail => Some(None),
            Policy::ConstIndex(i) => Some(Some(*i)),
            Policy::RoundRobin => None,
            Policy::Adversarial(t) => Some(Some(t.get(s).copied().unwrap_or(0))),
        }
    }

    /// Every explicit entry must be reachable: each earlier output of its
    /// play must be followed by the input prescribed there.
    pub fn check_prefixes(&self) -> Result<(), CoreError> {
        for s in self.explicit.keys() {
            for r in 0..s.moves.len() {
                let p = Play { moves: s.moves[..r].to_vec(), last: Some(s.moves[r].0.clone()) };
                let want = s.moves[r].1;
                let got = match self.explicit.get(&p) {
                    Some(e) => Some(*e),
                    None => self.default_hint(&p),
                };
                if let Some(got) = got {
                    if got != Some(want) {
                        return Err(CoreError::InvalidInput(format!(
                            "entry at `{s}` is unreachable: `{p}` does not prescribe {want}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Parses lines `play -> input` (or `play -> fail`) and one
    /// `default: fail|const i|roundrobin`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, CoreError> {
        let mut cs = Counterstrategy::fail();
        let mut seen_default = false;
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: String| CoreError::Syntax { line: n + 1, col: 1, msg };
            if let Some(d) = line.strip_prefix("default:") {
                if seen_default {
                    return Err(bad("more than one default".into()));
                }
                seen_default = true;
                let d = d.trim();
                cs.default = match d.split_whitespace().collect::<Vec<_>>().as_slice() {
                    ["fail"] => Policy::Fail,
                    ["roundrobin"] => Policy::RoundRobin,
                    ["const", i] => Policy::ConstIndex(i.parse().map_err(|_| bad(format!("bad index `{i}`")))?),
                    _ => return Err(bad(format!("unknown default `{d}`"))),
                };
                continue;
            }
            let (p, i) = line.split_once("->").ok_or_else(|| bad("expected `play -> input`".into()))?;
            let play = Play::parse_loose(p).map_err(|e| bad(e.to_string()))?;
            if play.is_active() {
                return Err(bad(format!("`{}` does not end with an output", p.trim())));
            }
            let i = match i.trim() {
                "fail" => None,
                x => Some(x.parse().map_err(|_| bad(format!("bad input `{x}`")))?),
            };
            if cs.explicit.insert(play, i).is_some() {
                return Err(bad("two prescriptions for one play".into()));
            }
        }
        cs.check_prefixes()?;
        Ok(cs)
    }
}

impl fmt::Display for Counterstrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (s, i) in &self.explicit {
            match i {
                Some(i) => writeln!(f, "{s} -> {i}")?,
                None => writeln!(f, "{s} -> fail")?,
            }
        }
        match &self.default {
            Policy::Fail => writeln!(f, "default: fail"),
            Policy::ConstIndex(i) => writeln!(f, "default: const {i}"),
            Policy::RoundRobin => writeln!(f, "default: roundrobin"),
            // The table is written out as explicit lines over input 0.
            Policy::Adversarial(t) => {
                for (s, i) in t {
                    if !self.explicit.contains_key(s) {
                        writeln!(f, "{s} -> {i}")?;
                    }
                }
                writeln!(f, "default: const 0")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Play {
        Play::parse_loose(s).unwrap()
    }

    #[test]
    fn policies() {
        let two = Inputs::Finite(2);
        assert_eq!(Counterstrategy::fail().prescribe(&p("Happy"), two), None);
        assert_eq!(Counterstrategy::constant(1).prescribe(&p("Happy"), two), Some(1));
        assert_eq!(Counterstrategy::constant(2).prescribe(&p("Happy"), two), None);
        assert_eq!(Counterstrategy::constant(2).prescribe(&p("Age"), Inputs::Omega), Some(2));
        let rr = Counterstrategy::round_robin();
        assert_eq!(rr.prescribe(&p("Happy?0.Happy?1.Happy"), two), Some(0));
        assert_eq!(rr.prescribe(&p("Happy?0.Happy"), two), Some(1));
        assert_eq!(rr.prescribe(&p("Bye"), Inputs::Finite(0)), None);
    }

    #[test]
    fn file_round_trip() {
        let text = "Happy -> 1\nHappy?1.Happy -> fail\ndefault: const 0\n";
        let cs = Counterstrategy::parse(text).unwrap();
        assert_eq!(cs.to_string(), text);
        assert_eq!(cs.prescribe(&p("Happy?1.Happy"), Inputs::Finite(2)), None);
        assert_eq!(cs.prescribe(&p("Happy?0.Happy"), Inputs::Finite(2)), Some(0));
    }

    #[test]
    fn rejects_unreachable_entries() {
        assert!(Counterstrategy::parse("Happy -> 0\nHappy?1.Happy -> 1\n").is_err());
        assert!(Counterstrategy::parse("Happy?1.Happy -> 1\n").is_err());
        assert!(Counterstrategy::parse("Happy?1.Happy -> 1\ndefault: roundrobin\n").is_ok());
        assert!(Counterstrategy::parse("Happy?0 -> 1\n").is_err());
        assert!(Counterstrategy::parse("default: const 0\ndefault: fail\n").is_err());
    }
}
