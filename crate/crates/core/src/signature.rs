//! Output symbols, arities and signature files.

use std::fmt;
use std::sync::Arc;

use crate::error::CoreError;

/// An output symbol, possibly drawn from an indexed family such as `c[2,0]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol {
    pub name: Arc<str>,
    pub idx: Vec<u64>,
}

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol { name: Arc::from(name), idx: Vec::new() }
    }

    pub fn indexed(name: &str, idx: Vec<u64>) -> Self {
        Symbol { name: Arc::from(name), idx }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if !self.idx.is_empty() {
            let parts: Vec<String> = self.idx.iter().map(u64::to_string).collect();
            write!(f, "[{}]", parts.join(","))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Arity {
    /// Inputs are indices into the label list.
    Finite(Vec<String>),
    /// Inputs are the naturals.
    Omega,
}

impl Arity {
    pub fn accepts(&self, input: u64) -> bool {
        match self {
            Arity::Finite(labels) => (input as usize) < labels.len(),
            Arity::Omega => true,
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Arity::Finite(l) if l.is_empty())
    }

    pub fn finite_len(&self) -> Option<usize> {
        match self {
            Arity::Finite(l) => Some(l.len()),
            Arity::Omega => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpDecl {
    pub name: String,
    /// Number of natural-number indices carried by the symbol family.
    pub params: usize,
    pub arity: Arity,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    ops: Vec<OpDecl>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_op(mut self, name: &str, params: usize, arity: Arity) -> Result<Self, CoreError> {
        self.add(OpDecl { name: name.to_string(), params, arity })?;
        Ok(self)
    }

    pub fn add(&mut self, decl: OpDecl) -> Result<(), CoreError> {
        if self.ops.iter().any(|d| d.name == decl.name) {
            return Err(CoreError::DuplicateSymbol(decl.name));
        }
        self.ops.push(decl);
        Ok(())
    }

    pub fn ops(&self) -> &[OpDecl] {
        &self.ops
    }

    pub fn decl_by_name(&self, name: &str) -> Option<(usize, &OpDecl)> {
        self.ops.iter().enumerate().find(|(_, d)| d.name == name)
    }

    pub fn decl(&self, sym: &Symbol) -> Option<&OpDecl> {
        self.decl_by_name(&sym.name)
            .map(|(_, d)| d)
            .filter(|d| d.params == sym.idx.len())
    }

    pub fn arity(&self, sym: &Symbol) -> Option<&Arity> {
        self.decl(sym).map(|d| &d.arity)
    }

    /// Declaration position; the canonical ordering key for symbols.
    pub fn rank(&self, sym: &Symbol) -> usize {
        self.decl_by_name(&sym.name).map(|(i, _)| i).unwrap_or(usize::MAX)
    }

    pub fn cmp_symbols(&self, a: &Symbol, b: &Symbol) -> std::cmp::Ordering {
        (self.rank(a), &a.idx, &a.name).cmp(&(self.rank(b), &b.idx, &b.name))
    }

    pub fn is_finitary(&self) -> bool {
        self.ops.iter().all(|d| matches!(d.arity, Arity::Finite(_)))
    }

    /// Parses lines of the form `op Sym : [l0, l1]`, `op Sym : omega`,
    /// `op Sym : 2` or `op c[_,_] : []`. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, CoreError> {
        let mut sig = Signature::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: &str| CoreError::Syntax {
                line: lineno + 1,
                col: 1,
                msg: msg.to_string(),
            };
            let rest = line.strip_prefix("op").ok_or_else(|| bad("expected `op`"))?.trim();
            let (head, arity) = rest.split_once(':').ok_or_else(|| bad("expected `:`"))?;
            let head = head.trim();
            let (name, params) = match head.split_once('[') {
                Some((n, p)) => {
                    let p = p.strip_suffix(']').ok_or_else(|| bad("unclosed `[`"))?;
                    (n.trim(), p.split(',').count())
                }
                None => (head, 0),
            };
            if name.is_empty() {
                return Err(bad("missing symbol name"));
            }
            let arity = arity.trim();
            let arity = if arity == "omega" {
                Arity::Omega
            } else if let Some(inner) = arity.strip_prefix('[').and_then(|a| a.strip_suffix(']')) {
                let labels: Vec<String> = inner
                    .split(',')
                    .map(|l| l.trim().to_string())
                    .filter(|l| !l.is_empty())
                    .collect();
                Arity::Finite(labels)
            } else if let Ok(n) = arity.parse::<usize>() {
                Arity::Finite((0..n).map(|i| i.to_string()).collect())
            } else {
                return Err(bad("arity must be `omega`, a label list or a number"));
            };
            sig.add(OpDecl { name: name.to_string(), params, arity })
                .map_err(|e| bad(&e.to_string()))?;
        }
        Ok(sig)
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.ops {
            let params = if d.params == 0 {
                String::new()
            } else {
                format!("[{}]", vec!["_"; d.params].join(","))
            };
            match &d.arity {
                Arity::Omega => writeln!(f, "op {}{} : omega", d.name, params)?,
                Arity::Finite(l) => writeln!(f, "op {}{} : [{}]", d.name, params, l.join(", "))?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_happy_signature() {
        let sig = Signature::parse(
            "# intro example\nop Bye : []\nop Happy : [yes, no]\nop Age : omega\nop c[_,_] : []\n",
        )
        .unwrap();
        assert_eq!(sig.ops().len(), 4);
        assert!(!sig.is_finitary());
        assert!(sig.arity(&Symbol::new("Happy")).unwrap().accepts(1));
        assert!(!sig.arity(&Symbol::new("Happy")).unwrap().accepts(2));
        assert!(sig.decl(&Symbol::indexed("c", vec![1, 0])).is_some());
        assert!(sig.decl(&Symbol::indexed("c", vec![1])).is_none());
    }

    #[test]
    fn rejects_duplicates() {
        assert!(Signature::parse("op a : 1\nop a : 2").is_err());
    }

    #[test]
    fn display_reparses() {
        let sig = Signature::parse("op star : 2\nop c[_] : []\nop b : omega").unwrap();
        assert_eq!(Signature::parse(&sig.to_string()).unwrap(), sig);
    }
}
