//! Reading `.sig`, `.prog` and `.cs` files.

use std::path::{Path, PathBuf};

use crate::error::CoreError;
use crate::games::Counterstrategy;
use crate::signature::Signature;
use crate::syntax::{parse_program, parse_term};
use crate::term::Term;

fn read(path: &Path) -> Result<String, CoreError> {
    std::fs::read_to_string(path).map_err(|e| CoreError::InvalidInput(format!("{}: {e}", path.display())))
}

/// `dir/name.sig`, then `dir/prefix.sig` for each `_`-separated prefix of
/// the program's stem, longest first.
pub fn sibling_signature(prog: &Path) -> Option<PathBuf> {
    let dir = prog.parent().unwrap_or(Path::new(""));
    let stem = prog.file_stem()?.to_str()?;
    let mut name = stem;
    loop {
        let cand = dir.join(format!("{name}.sig"));
        if cand.is_file() {
            return Some(cand);
        }
        name = &name[..name.rfind('_')?];
    }
}

#[derive(Clone, Debug)]
pub struct Loaded {
    pub sig: Option<Signature>,
    pub term: Term,
}

/// Parses the program against `sig` (or the sibling signature file). With
/// no signature at all, arities are taken from the program itself.
pub fn load_program(prog: &Path, sig: Option<&Path>, g: u64) -> Result<Loaded, CoreError> {
    let text = read(prog)?;
    let sig_path = sig.map(Path::to_path_buf).or_else(|| sibling_signature(prog));
    match sig_path {
        Some(p) => {
            let sig = Signature::parse(&read(&p)?)?;
            let term = parse_program(&text, &sig, g)?;
            Ok(Loaded { sig: Some(sig), term })
        }
        None => Ok(Loaded { sig: None, term: parse_term(&text)? }),
    }
}

pub fn load_counterstrategy(path: &Path) -> Result<Counterstrategy, CoreError> {
    let c = Counterstrategy::parse(&read(path)?)?;
    c.check_prefixes()?;
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus(name: &str) -> PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus").join(name)
    }

    #[test]
    fn finds_signatures_by_prefix() {
        assert_eq!(sibling_signature(&corpus("trace1_m.prog")), Some(corpus("trace1.sig")));
        assert_eq!(sibling_signature(&corpus("happy.prog")), Some(corpus("happy.sig")));
        assert_eq!(sibling_signature(&corpus("nothing_here.prog")), None);
    }

    #[test]
    fn loads_corpus_files() {
        let l = load_program(&corpus("notwnf.prog"), None, 16).unwrap();
        assert!(l.sig.is_some());
        load_counterstrategy(&corpus("happy.cs")).unwrap();
        assert!(load_program(&corpus("missing.prog"), None, 16).is_err());
    }
}
