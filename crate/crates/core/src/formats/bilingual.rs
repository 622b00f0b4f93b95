use std::collections::HashMap;

use super::{segment, segments, Diagnostic, Diagnostics};
use crate::fs::{FeatureStructure, FsBuilder, Path, Printer};
use crate::sexpr::{self, quote, Sexp};

/// A lexical transfer rule. Source patterns and target templates live in one
/// frame (`s0`.., `t0`..) so that shared variables carry lemmas' indices and
/// agreement values across.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BilingualEntry {
    pub name: String,
    pub key: String,
    pub frame: FeatureStructure,
    pub n_source: usize,
    pub n_target: usize,
    /// Source pattern whose lemma is the key-word.
    pub key_slot: usize,
    pub macros: Vec<String>,
}

/// A conditional sub-rule: when `trigger` unifies with the calling entry's
/// key sign, its extra patterns and templates join the entry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransferMacro {
    pub name: String,
    pub frame: FeatureStructure,
    pub n_source_extra: usize,
    pub n_target_extra: usize,
}

pub fn source_slot(i: usize) -> String {
    format!("s{}", i)
}

pub fn target_slot(i: usize) -> String {
    format!("t{}", i)
}

impl BilingualEntry {
    pub fn source(&self, i: usize) -> FeatureStructure {
        self.frame.resolve(&Path(vec![source_slot(i)])).expect("source slot")
    }

    pub fn target(&self, i: usize) -> FeatureStructure {
        self.frame.resolve(&Path(vec![target_slot(i)])).expect("target slot")
    }

    pub fn source_lemmas(&self) -> Vec<String> {
        (0..self.n_source)
            .map(|i| self.frame.atom_at(&format!("s{}.lemma", i)).unwrap_or("?").to_string())
            .collect()
    }

    pub fn target_lemmas(&self) -> Vec<String> {
        (0..self.n_target)
            .map(|i| self.frame.atom_at(&format!("t{}.lemma", i)).unwrap_or("?").to_string())
            .collect()
    }
}

impl TransferMacro {
    pub fn trigger(&self) -> FeatureStructure {
        self.frame.resolve(&"trigger".into()).expect("trigger slot")
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BilingualLexicon {
    pub entries: Vec<BilingualEntry>,
    pub macros: Vec<TransferMacro>,
}

impl BilingualLexicon {
    pub fn macro_named(&self, name: &str) -> Option<&TransferMacro> {
        self.macros.iter().find(|m| m.name == name)
    }

    pub fn entry_named(&self, name: &str) -> Option<&BilingualEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    /// Entry numbers indexed by key-word, in file order.
    pub fn key_index(&self) -> HashMap<&str, Vec<usize>> {
        let mut out: HashMap<&str, Vec<usize>> = HashMap::new();
        for (i, e) in self.entries.iter().enumerate() {
            out.entry(e.key.as_str()).or_default().push(i);
        }
        out
    }

    /// Copy with one macro definition replaced (or added).
    pub fn with_macro(&self, m: TransferMacro) -> BilingualLexicon {
        let mut out = self.clone();
        match out.macros.iter_mut().find(|x| x.name == m.name) {
            Some(slot) => *slot = m,
            None => out.macros.push(m),
        }
        out
    }
}

pub fn load_bilingual(text: &str) -> Result<BilingualLexicon, Diagnostics> {
    let (items, read_errors) = sexpr::read_recovering(text);
    let mut diags: Vec<Diagnostic> = read_errors.into_iter().map(|e| Diagnostic::new(e.line, e.message)).collect();
    let mut lex = BilingualLexicon::default();
    let mut macro_lines = Vec::new();
    for item in &items {
        match item.as_list().and_then(|l| l.first()).and_then(Sexp::as_sym) {
            Some("bi") => match parse_entry(item) {
                Ok(e) => {
                    if lex.entries.iter().any(|x| x.name == e.name) {
                        diags.push(Diagnostic::new(item.line(), format!("duplicate entry name {}", e.name)));
                    }
                    lex.entries.push(e);
                    macro_lines.push(item.line());
                }
                Err(d) => diags.push(d),
            },
            Some("tmacro") => match parse_macro(item) {
                Ok(m) => {
                    if lex.macros.iter().any(|x| x.name == m.name) {
                        diags.push(Diagnostic::new(item.line(), format!("duplicate macro name {}", m.name)));
                    }
                    lex.macros.push(m)
                }
                Err(d) => diags.push(d),
            },
            _ => diags.push(Diagnostic::new(item.line(), format!("expected (bi ...) or (tmacro ...), found {}", item))),
        }
    }
    for (e, line) in lex.entries.iter().zip(macro_lines) {
        for m in &e.macros {
            if lex.macro_named(m).is_none() {
                diags.push(Diagnostic::new(line, format!("entry {}: dangling macro reference {}", e.name, m)));
            }
        }
    }
    diags.sort_by_key(|d| d.line);
    if diags.is_empty() {
        Ok(lex)
    } else {
        Err(Diagnostics(diags))
    }
}

fn name_of(list: &[Sexp], line: usize, what: &str) -> Result<String, Diagnostic> {
    list.get(1)
        .and_then(Sexp::as_sym)
        .filter(|s| !s.starts_with(':'))
        .map(str::to_string)
        .ok_or_else(|| Diagnostic::new(line, format!("{} without a name", what)))
}

/// Attach each parenthesised pattern in `items` to the frame as `prefix{i}`.
fn attach_patterns(
    b: &mut FsBuilder,
    frame: usize,
    prefix: &str,
    start: usize,
    items: &[Sexp],
    ctx: &str,
) -> Result<usize, Diagnostic> {
    for (i, p) in items.iter().enumerate() {
        let Some(groups) = p.as_list() else {
            return Err(Diagnostic::new(p.line(), format!("{}: pattern must be a parenthesised list of groups", ctx)));
        };
        let node = b.top(groups, p.line()).map_err(|e| Diagnostic::new(e.line, format!("{}: {}", ctx, e.message)))?;
        b.attach(frame, &format!("{}{}", prefix, start + i), node);
    }
    Ok(items.len())
}

fn parse_entry(item: &Sexp) -> Result<BilingualEntry, Diagnostic> {
    let line = item.line();
    let list = item.as_list().unwrap();
    let name = name_of(list, line, "bilingual entry")?;
    let ctx = format!("entry {}", name);
    let segs = segments(list, 2)?;
    let key = match segment(&segs, ":key") {
        Some([k]) => k.as_text().map(str::to_string),
        _ => None,
    }
    .ok_or_else(|| Diagnostic::new(line, format!("{}: missing :key", ctx)))?;
    let mut b = FsBuilder::new();
    let frame = b.frame();
    let sources = segment(&segs, ":source").unwrap_or(&[]);
    if sources.is_empty() {
        return Err(Diagnostic::new(line, format!("{}: source side is empty", ctx)));
    }
    let n_source = attach_patterns(&mut b, frame, "s", 0, sources, &ctx)?;
    let n_target = attach_patterns(&mut b, frame, "t", 0, segment(&segs, ":target").unwrap_or(&[]), &ctx)?;
    let mut macros = Vec::new();
    if let Some(ms) = segment(&segs, ":macros") {
        let names: Vec<&Sexp> = match ms {
            [Sexp::List { items, .. }] => items.iter().collect(),
            other => other.iter().collect(),
        };
        for m in names {
            match m.as_sym() {
                Some(s) => macros.push(s.to_string()),
                None => return Err(Diagnostic::new(m.line(), format!("{}: macro names must be symbols", ctx))),
            }
        }
    }
    let fs = b.finish(frame).map_err(|e| Diagnostic::new(line, format!("{}: {}", ctx, e.message)))?;
    let keyed: Vec<usize> = (0..n_source).filter(|i| fs.atom_at(&format!("s{}.lemma", i)) == Some(key.as_str())).collect();
    let key_slot = match keyed.as_slice() {
        [one] => *one,
        [] => return Err(Diagnostic::new(line, format!("{}: key-word \"{}\" matches no source lemma", ctx, key))),
        _ => return Err(Diagnostic::new(line, format!("{}: key-word \"{}\" matches several source lemmas", ctx, key))),
    };
    Ok(BilingualEntry { name, key, frame: fs, n_source, n_target, key_slot, macros })
}

fn parse_macro(item: &Sexp) -> Result<TransferMacro, Diagnostic> {
    let line = item.line();
    let list = item.as_list().unwrap();
    let name = name_of(list, line, "transfer macro")?;
    let ctx = format!("macro {}", name);
    let segs = segments(list, 2)?;
    let mut b = FsBuilder::new();
    let frame = b.frame();
    let trigger = segment(&segs, ":trigger").ok_or_else(|| Diagnostic::new(line, format!("{}: missing :trigger", ctx)))?;
    let t = b.top(trigger, line).map_err(|e| Diagnostic::new(e.line, format!("{}: {}", ctx, e.message)))?;
    b.attach(frame, "trigger", t);
    let n_source_extra = attach_patterns(&mut b, frame, "s", 0, segment(&segs, ":source-extra").unwrap_or(&[]), &ctx)?;
    let n_target_extra = attach_patterns(&mut b, frame, "t", 0, segment(&segs, ":target-extra").unwrap_or(&[]), &ctx)?;
    let fs = b.finish(frame).map_err(|e| Diagnostic::new(line, format!("{}: {}", ctx, e.message)))?;
    let m = TransferMacro { name, frame: fs, n_source_extra, n_target_extra };
    if m.trigger().features().is_empty() {
        return Err(Diagnostic::new(line, format!("{}: trigger must contain at least one feature", ctx)));
    }
    Ok(m)
}

fn print_slots(p: &mut Printer, fs: &FeatureStructure, prefix: &str, n: usize) -> String {
    (0..n)
        .map(|i| format!(" ({})", p.top(fs.node_at(&Path(vec![format!("{}{}", prefix, i)])).unwrap())))
        .collect()
}

pub fn serialize_bilingual(lex: &BilingualLexicon) -> String {
    let mut out = String::new();
    for m in &lex.macros {
        let mut p = Printer::new(&m.frame);
        let trigger = p.top(m.frame.node_at(&"trigger".into()).unwrap());
        out.push_str(&format!("(tmacro {} :trigger {}", m.name, trigger));
        out.push_str(" :source-extra");
        out.push_str(&print_slots(&mut p, &m.frame, "s", m.n_source_extra));
        out.push_str(" :target-extra");
        out.push_str(&print_slots(&mut p, &m.frame, "t", m.n_target_extra));
        out.push_str(")\n");
    }
    for e in &lex.entries {
        let mut p = Printer::new(&e.frame);
        out.push_str(&format!("(bi {} :key {} :source", e.name, quote(&e.key)));
        out.push_str(&print_slots(&mut p, &e.frame, "s", e.n_source));
        out.push_str(" :target");
        out.push_str(&print_slots(&mut p, &e.frame, "t", e.n_target));
        out.push_str(&format!(" :macros ({}))\n", e.macros.join(" ")));
    }
    out
}
