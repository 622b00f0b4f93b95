use std::collections::HashMap;

use super::{segment, segments, Diagnostic, Diagnostics};
use crate::fs::{FeatureStructure, FsBuilder, Printer};
use crate::sexpr::{self, quote, Sexp};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Flags {
    pub proper_name: bool,
    pub punctuation: bool,
}

/// One full inflected form. There is no morphology: `dog` and `dogs` are
/// separate entries sharing a lemma.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LexicalEntry {
    pub form: String,
    pub lemma: String,
    pub sign: FeatureStructure,
    pub flags: Flags,
}

impl LexicalEntry {
    pub fn cat(&self) -> Option<&str> {
        self.sign.atom_at("cat")
    }
}

#[derive(Clone, Debug, Default)]
pub struct Lexicon {
    entries: Vec<LexicalEntry>,
    by_form: HashMap<String, Vec<usize>>,
    by_lemma: HashMap<String, Vec<usize>>,
}

impl PartialEq for Lexicon {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl Lexicon {
    pub fn new(entries: Vec<LexicalEntry>) -> Self {
        let mut lex = Lexicon { entries: Vec::new(), by_form: HashMap::new(), by_lemma: HashMap::new() };
        for e in entries {
            lex.push(e);
        }
        lex
    }

    pub fn push(&mut self, entry: LexicalEntry) {
        let id = self.entries.len();
        self.by_form.entry(entry.form.clone()).or_default().push(id);
        self.by_lemma.entry(entry.lemma.clone()).or_default().push(id);
        self.entries.push(entry);
    }

    pub fn entries(&self) -> &[LexicalEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Homonyms for a surface form, in file order, with their entry numbers.
    pub fn by_form(&self, form: &str) -> impl Iterator<Item = (usize, &LexicalEntry)> {
        self.by_form.get(form).into_iter().flatten().map(move |&i| (i, &self.entries[i]))
    }

    pub fn by_lemma(&self, lemma: &str) -> impl Iterator<Item = (usize, &LexicalEntry)> {
        self.by_lemma.get(lemma).into_iter().flatten().map(move |&i| (i, &self.entries[i]))
    }

    pub fn contains_form(&self, form: &str) -> bool {
        self.by_form.contains_key(form)
    }

    pub fn contains_lemma(&self, lemma: &str) -> bool {
        self.by_lemma.contains_key(lemma)
    }

    /// Drop every entry with the given lemma.
    pub fn without_lemma(&self, lemma: &str) -> Lexicon {
        Lexicon::new(self.entries.iter().filter(|e| e.lemma != lemma).cloned().collect())
    }
}

pub fn load_lexicon(text: &str) -> Result<Lexicon, Diagnostics> {
    let (items, read_errors) = sexpr::read_recovering(text);
    let mut diags: Vec<Diagnostic> = read_errors.into_iter().map(|e| Diagnostic::new(e.line, e.message)).collect();
    let mut entries = Vec::new();
    for item in &items {
        match parse_entry(item) {
            Ok(e) => entries.push(e),
            Err(d) => diags.push(d),
        }
    }
    diags.sort_by_key(|d| d.line);
    if diags.is_empty() {
        Ok(Lexicon::new(entries))
    } else {
        Err(Diagnostics(diags))
    }
}

fn parse_entry(item: &Sexp) -> Result<LexicalEntry, Diagnostic> {
    let line = item.line();
    let Some(list) = item.as_list() else {
        return Err(Diagnostic::new(line, format!("expected (entry ...), found {}", item)));
    };
    if list.first().and_then(Sexp::as_sym) != Some("entry") {
        return Err(Diagnostic::new(line, "expected (entry ...)"));
    }
    let segs = segments(list, 1)?;
    let text_of = |kw: &str| -> Result<String, Diagnostic> {
        match segment(&segs, kw) {
            Some([v]) => v.as_text().map(str::to_string).ok_or_else(|| Diagnostic::new(line, format!("{} must be a string", kw))),
            _ => Err(Diagnostic::new(line, format!("entry missing {}", kw))),
        }
    };
    let form = text_of(":form")?;
    if form.is_empty() {
        return Err(Diagnostic::new(line, "entry with empty :form"));
    }
    let lemma = text_of(":lemma")?;
    let mut flags = Flags::default();
    if let Some(vals) = segment(&segs, ":flags") {
        let names: Vec<&Sexp> = match vals {
            [Sexp::List { items, .. }] => items.iter().collect(),
            other => other.iter().collect(),
        };
        for n in names {
            match n.as_sym() {
                Some("proper-name") => flags.proper_name = true,
                Some("punctuation") => flags.punctuation = true,
                _ => return Err(Diagnostic::new(n.line(), format!("entry \"{}\": unknown flag {}", form, n))),
            }
        }
    }
    let Some(sign_items) = segment(&segs, ":sign") else {
        return Err(Diagnostic::new(line, format!("entry \"{}\" has no :sign", form)));
    };
    let mut b = FsBuilder::new();
    let root = b
        .top(sign_items, line)
        .map_err(|e| Diagnostic::new(e.line, format!("entry \"{}\": {}", form, e.message)))?;
    let sign = b.finish(root).map_err(|e| Diagnostic::new(line, format!("entry \"{}\": {}", form, e.message)))?;
    if sign.atom_at("cat").is_none() {
        return Err(Diagnostic::new(line, format!("entry \"{}\" has no cat", form)));
    }
    if let Some(l) = sign.node_at(&"lemma".into()) {
        if sign.atom_at("lemma") != Some(lemma.as_str()) {
            let _ = l;
            return Err(Diagnostic::new(line, format!("entry \"{}\": sign lemma differs from :lemma", form)));
        }
    }
    Ok(LexicalEntry { form, lemma, sign, flags })
}

pub fn serialize_lexicon(lex: &Lexicon) -> String {
    let mut out = String::new();
    for e in lex.entries() {
        let mut flags = Vec::new();
        if e.flags.proper_name {
            flags.push("proper-name");
        }
        if e.flags.punctuation {
            flags.push("punctuation");
        }
        let mut p = Printer::new(&e.sign);
        out.push_str(&format!(
            "(entry :form {} :lemma {} :flags ({}) :sign {})\n",
            quote(&e.form),
            quote(&e.lemma),
            flags.join(" "),
            p.top(e.sign.root())
        ));
    }
    out
}
