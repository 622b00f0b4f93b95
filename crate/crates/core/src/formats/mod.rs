//! Lingware file formats.
//!
//! All lingware kinds share one line-oriented s-expression syntax with `;`
//! comments. Feature structures inside entries are written as groups
//! (`(cat n) (sem (index ?x))`) and variables `?name` scope over one entry,
//! rule or macro.

mod bilingual;
mod grammar;
mod lexicon;
mod policy;

use std::fmt;

pub use bilingual::{
    load_bilingual, serialize_bilingual, source_slot, target_slot, BilingualEntry, BilingualLexicon, TransferMacro,
};
pub use grammar::{
    load_grammar, serialize_grammar, Application, Direction, GoalArg, GoalCall, GoalKind, Grammar, GrammarRule,
    MAX_DAUGHTERS,
};
pub use lexicon::{load_lexicon, serialize_lexicon, Flags, LexicalEntry, Lexicon};
pub use policy::{load_policy, Policy};

use crate::sexpr::Sexp;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub message: String,
}

impl Diagnostic {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        Diagnostic { line, message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

/// Every problem found in one file, in file order.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct Diagnostics(pub Vec<Diagnostic>);

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{}", d)?;
        }
        Ok(())
    }
}

impl Diagnostics {
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Diagnostic> {
        self.0.iter()
    }
}

/// Split `(head name :kw v... :kw v...)` items after `skip` leading items
/// into keyword segments.
pub(crate) fn segments(items: &[Sexp], skip: usize) -> Result<Vec<(&str, usize, &[Sexp])>, Diagnostic> {
    let mut out: Vec<(&str, usize, &[Sexp])> = Vec::new();
    let rest = &items[skip.min(items.len())..];
    let mut i = 0;
    while i < rest.len() {
        let Some(kw) = rest[i].as_sym().filter(|s| s.starts_with(':')) else {
            return Err(Diagnostic::new(rest[i].line(), format!("expected keyword, found {}", rest[i])));
        };
        let start = i + 1;
        let mut end = start;
        while end < rest.len() && !rest[end].is_keyword() {
            end += 1;
        }
        if out.iter().any(|(k, _, _)| *k == kw) {
            return Err(Diagnostic::new(rest[i].line(), format!("duplicate keyword {}", kw)));
        }
        out.push((kw, rest[i].line(), &rest[start..end]));
        i = end;
    }
    Ok(out)
}

pub(crate) fn segment<'a>(segs: &[(&'a str, usize, &'a [Sexp])], kw: &str) -> Option<&'a [Sexp]> {
    segs.iter().find(|(k, _, _)| *k == kw).map(|(_, _, v)| *v)
}
