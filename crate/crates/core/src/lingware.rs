//! Lingware directories: loading, cross-checks and the coverage declaration.

use std::fs;
use std::path::{Path, PathBuf};

use crate::formats::{
    load_bilingual, load_grammar, load_lexicon, load_policy, BilingualLexicon, Diagnostics, Direction, Grammar,
    Lexicon, Policy,
};
use crate::parser::{tokenize, TokenKind};

pub const SOURCE_LEX: &str = "source.lex";
pub const SOURCE_GRAM: &str = "source.gram";
pub const BILINGUAL: &str = "bilingual.bl";
pub const TARGET_LEX: &str = "target.lex";
pub const TARGET_GRAM: &str = "target.gram";
pub const POLICY: &str = "policy.cfg";
pub const COVERAGE: &str = "coverage.txt";

pub const FILES: [&str; 6] = [SOURCE_LEX, SOURCE_GRAM, BILINGUAL, TARGET_LEX, TARGET_GRAM, POLICY];

#[derive(Debug, thiserror::Error)]
pub enum LingwareError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}", render(.0))]
    Invalid(Vec<String>),
}

fn render(lines: &[String]) -> String {
    lines.join("\n")
}

/// Everything the engine needs for one language pair. Immutable once
/// loaded and safe to share between threads.
#[derive(Clone, Debug)]
pub struct Lingware {
    pub source_lex: Lexicon,
    pub source_gram: Grammar,
    pub bilingual: BilingualLexicon,
    pub target_lex: Lexicon,
    pub target_gram: Grammar,
    pub policy: Policy,
    pub manifest: Manifest,
}

/// The sentences a lingware claims to translate, and the words it expects
/// to pass through untouched.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Manifest {
    pub files: Vec<String>,
    pub sentences: Vec<String>,
    pub passthrough: Vec<String>,
}

pub fn parse_manifest(text: &str) -> Result<Manifest, Vec<String>> {
    let mut m = Manifest { files: FILES.iter().map(|f| f.to_string()).collect(), ..Manifest::default() };
    let mut errors = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line.split_once(':') {
            Some(("sentence", s)) => m.sentences.push(s.trim().to_string()),
            Some(("passthrough", ws)) => m.passthrough.extend(ws.split_whitespace().map(str::to_string)),
            _ => errors.push(format!("{}: line {}: expected `sentence:` or `passthrough:`", COVERAGE, i + 1)),
        }
    }
    if errors.is_empty() {
        Ok(m)
    } else {
        Err(errors)
    }
}

fn read(dir: &Path, name: &str) -> Result<String, LingwareError> {
    let path = dir.join(name);
    fs::read_to_string(&path).map_err(|source| LingwareError::Io { path, source })
}

fn prefixed<T>(name: &str, r: Result<T, Diagnostics>, errors: &mut Vec<String>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(d) => {
            errors.extend(d.iter().map(|d| format!("{}: {}", name, d)));
            None
        }
    }
}

impl Lingware {
    /// Load and cross-check every file in `dir`. The coverage declaration
    /// is optional.
    pub fn load(dir: &Path) -> Result<Lingware, LingwareError> {
        let mut errors = Vec::new();
        let source_lex = prefixed(SOURCE_LEX, load_lexicon(&read(dir, SOURCE_LEX)?), &mut errors);
        let source_gram = prefixed(SOURCE_GRAM, load_grammar(&read(dir, SOURCE_GRAM)?), &mut errors);
        let bilingual = prefixed(BILINGUAL, load_bilingual(&read(dir, BILINGUAL)?), &mut errors);
        let target_lex = prefixed(TARGET_LEX, load_lexicon(&read(dir, TARGET_LEX)?), &mut errors);
        let target_gram = prefixed(TARGET_GRAM, load_grammar(&read(dir, TARGET_GRAM)?), &mut errors);
        let policy = prefixed(POLICY, load_policy(&read(dir, POLICY)?), &mut errors);
        let manifest = match fs::read_to_string(dir.join(COVERAGE)) {
            Ok(text) => parse_manifest(&text).unwrap_or_else(|e| {
                errors.extend(e);
                Manifest::default()
            }),
            Err(_) => Manifest { files: FILES.iter().map(|f| f.to_string()).collect(), ..Manifest::default() },
        };
        match (source_lex, source_gram, bilingual, target_lex, target_gram, policy) {
            (Some(source_lex), Some(source_gram), Some(bilingual), Some(target_lex), Some(target_gram), Some(policy))
                if errors.is_empty() =>
            {
                let lw = Lingware { source_lex, source_gram, bilingual, target_lex, target_gram, policy, manifest };
                let cross = lw.cross_check();
                if cross.is_empty() {
                    Ok(lw)
                } else {
                    Err(LingwareError::Invalid(cross))
                }
            }
            _ => Err(LingwareError::Invalid(errors)),
        }
    }

    /// References between files that the individual loaders cannot see.
    pub fn cross_check(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.source_gram.direction != Direction::Source {
            out.push(format!("{}: grammar is not declared `(direction source)`", SOURCE_GRAM));
        }
        if self.target_gram.direction != Direction::Target {
            out.push(format!("{}: grammar is not declared `(direction target)`", TARGET_GRAM));
        }
        for e in &self.bilingual.entries {
            if !self.source_lex.contains_lemma(&e.key) {
                out.push(format!("{}: entry {}: key {:?} is not a source lemma", BILINGUAL, e.name, e.key));
            }
        }
        out
    }

    /// Check the coverage declaration: every word is known or declared as
    /// passthrough, and every declared sentence translates.
    pub fn coverage_check(&self) -> Vec<String> {
        let mut out = Vec::new();
        for s in &self.manifest.sentences {
            for t in tokenize(s) {
                if t.kind == TokenKind::Word
                    && !self.source_lex.contains_form(&t.text)
                    && !self.manifest.passthrough.contains(&t.text)
                {
                    out.push(format!("coverage: {:?}: unknown word {:?} not declared as passthrough", s, t.text));
                }
            }
            let r = crate::pipeline::translate_line(s, self, &crate::pipeline::Options::default());
            if let crate::pipeline::Status::Untranslated { stage } = &r.status {
                out.push(format!("coverage: {:?}: untranslated ({})", s, stage));
            }
        }
        out
    }
}

/// All diagnostics for a lingware directory; empty means valid.
pub fn validate(dir: &Path) -> Vec<String> {
    match Lingware::load(dir) {
        Ok(lw) => lw.coverage_check(),
        Err(LingwareError::Invalid(lines)) => lines,
        Err(e) => vec![e.to_string()],
    }
}
