//! Shallow source analysis: tokenize, look words up, chart-parse, and strip
//! the result down to a bag of enriched lexical signs.

pub mod chart;

use crate::formats::{Grammar, Lexicon};
use crate::fs::FeatureStructure;

pub use chart::{parse_readings, Chart, Edge, EdgeId, Origin, Reading};

const PUNCTUATION: &[char] = &['.', ',', '?', '!', ';', ':', '"'];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TokenKind {
    Word,
    Punctuation,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    /// Lowercased text.
    pub text: String,
    pub original: String,
    pub position: usize,
    pub kind: TokenKind,
}

/// Split on whitespace, then peel leading and trailing punctuation off each
/// chunk. Internal punctuation (`uh-huh`, `that's`) stays in the word.
pub fn tokenize(line: &str) -> Vec<Token> {
    let mut raw: Vec<(String, TokenKind)> = Vec::new();
    for chunk in line.split_whitespace() {
        let chars: Vec<char> = chunk.chars().collect();
        let lead = chars.iter().take_while(|c| PUNCTUATION.contains(c)).count();
        if lead == chars.len() {
            raw.extend(chars.iter().map(|c| (c.to_string(), TokenKind::Punctuation)));
            continue;
        }
        let trail = chars.iter().rev().take_while(|c| PUNCTUATION.contains(c)).count();
        raw.extend(chars[..lead].iter().map(|c| (c.to_string(), TokenKind::Punctuation)));
        raw.push((chars[lead..chars.len() - trail].iter().collect(), TokenKind::Word));
        raw.extend(chars[chars.len() - trail..].iter().map(|c| (c.to_string(), TokenKind::Punctuation)));
    }
    raw.into_iter()
        .enumerate()
        .map(|(position, (original, kind))| Token { text: original.to_lowercase(), original, position, kind })
        .collect()
}

/// Hands out semantic index atoms `i1`, `i2`, ...
#[derive(Clone, Debug)]
pub struct IndexMinter {
    prefix: String,
    next: usize,
}

impl IndexMinter {
    pub fn new(prefix: &str) -> Self {
        IndexMinter { prefix: prefix.to_string(), next: 1 }
    }

    pub fn mint(&mut self) -> String {
        let out = format!("{}{}", self.prefix, self.next);
        self.next += 1;
        out
    }
}

fn enrich(base: &FeatureStructure, extra: &str) -> FeatureStructure {
    let extra: FeatureStructure = extra.parse().expect("well-formed enrichment");
    base.unify(&extra).unwrap_or_else(|_| base.clone())
}

/// Passthrough sign for a form the lexicon does not know.
pub fn passthrough_sign(form: &str, index: &str, proper: bool) -> FeatureStructure {
    let mut text = format!(
        "(cat unk) (lemma {}) (form {}) (passthrough yes) (sem (index {}))",
        crate::sexpr::quote(form),
        crate::sexpr::quote(form),
        crate::sexpr::quote(index)
    );
    if proper {
        text.push_str(" (proper yes)");
    }
    text.parse().expect("well-formed passthrough sign")
}

/// Every homonym for the token, each with a fresh semantic index. Unknown
/// forms yield a single passthrough sign; `[form]` is read back as the
/// passthrough of `form`.
pub fn lookup(token: &Token, lex: &Lexicon, minter: &mut IndexMinter) -> Vec<Reading> {
    let mut out = Vec::new();
    for (id, entry) in lex.by_form(&token.text) {
        let extra = format!(
            "(lemma {}) (form {}) (sem (index {}))",
            crate::sexpr::quote(&entry.lemma),
            crate::sexpr::quote(&entry.form),
            crate::sexpr::quote(&minter.mint())
        );
        let mut sign = enrich(&entry.sign, &extra);
        if entry.flags.proper_name {
            sign = enrich(&sign, "(proper yes)");
        }
        out.push(Reading { sign, entry: Some(id), passthrough: false, proper: entry.flags.proper_name });
    }
    if out.is_empty() {
        let form = token
            .text
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .filter(|t| !t.is_empty())
            .unwrap_or(&token.text);
        out.push(Reading { sign: passthrough_sign(form, &minter.mint(), false), entry: None, passthrough: true, proper: false });
    }
    out
}

#[derive(Clone, Debug)]
pub struct ParseResult {
    pub chart: Chart,
    /// Word tokens, in order; chart positions index this.
    pub words: Vec<Token>,
    /// Root-category edges spanning every word.
    pub spanning: Vec<EdgeId>,
    /// Partition of the words into fragments, left to right.
    pub cover: Vec<EdgeId>,
    /// The analysis used downstream: the best spanning edge, or the cover.
    pub chosen: Vec<EdgeId>,
    pub interrogative: bool,
    pub final_punct: Option<String>,
}

impl ParseResult {
    pub fn is_spanning(&self) -> bool {
        !self.spanning.is_empty()
    }
}

/// Chart-parse `tokens`. Punctuation does not enter the chart; internal
/// punctuation acts as a barrier edges cannot cross.
pub fn parse(tokens: &[Token], g: &Grammar, lex: &Lexicon) -> ParseResult {
    let mut minter = IndexMinter::new("i");
    let mut words = Vec::new();
    let mut barriers = Vec::new();
    for t in tokens {
        match t.kind {
            TokenKind::Word => words.push(t.clone()),
            TokenKind::Punctuation => {
                if !words.is_empty() && !barriers.contains(&words.len()) {
                    barriers.push(words.len());
                }
            }
        }
    }
    let readings: Vec<Vec<Reading>> = words.iter().map(|w| lookup(w, lex, &mut minter)).collect();
    let chart = parse_readings(readings, &barriers, g);
    let final_punct = match tokens.last() {
        Some(t) if t.kind == TokenKind::Punctuation => Some(t.text.clone()),
        _ => None,
    };
    let interrogative = final_punct.as_deref() == Some("?");
    analyse(chart, words, g, interrogative, final_punct)
}

fn edge_order(chart: &Chart, g: &Grammar, a: EdgeId, b: EdgeId) -> std::cmp::Ordering {
    let ea = &chart.edges[a];
    let eb = &chart.edges[b];
    let root = |e: &Edge| !e.cat.as_deref().map(|c| g.is_root(c)).unwrap_or(false);
    root(ea)
        .cmp(&root(eb))
        .then(ea.size.cmp(&eb.size))
        .then_with(|| ea.trace.cmp(&eb.trace))
}

/// Pick the analysis: best spanning root edge (fewest edges, then
/// derivation trace), otherwise the fewest-fragment, leftmost-longest cover.
pub fn analyse(chart: Chart, words: Vec<Token>, g: &Grammar, interrogative: bool, final_punct: Option<String>) -> ParseResult {
    let n = chart.len();
    let is_root = |id: &EdgeId| chart.edges[*id].cat.as_deref().map(|c| g.is_root(c)).unwrap_or(false);
    let spanning: Vec<EdgeId> = if n == 0 { Vec::new() } else { chart.span(0, n).iter().copied().filter(is_root).collect() };
    let cover = fragment_cover(&chart, g);
    let chosen = match spanning.iter().copied().min_by(|&a, &b| edge_order(&chart, g, a, b)) {
        Some(best) => vec![best],
        None => cover.clone(),
    };
    ParseResult { chart, words, spanning, cover, chosen, interrogative, final_punct }
}

/// Fewest fragments, ties broken leftmost-longest. Fragments are root
/// edges or single lexical edges, so a cover always exists.
pub fn fragment_cover(chart: &Chart, g: &Grammar) -> Vec<EdgeId> {
    let n = chart.len();
    let candidate = |s: usize, e: usize| -> Option<EdgeId> {
        chart
            .span(s, e)
            .iter()
            .copied()
            .filter(|&id| {
                let edge = &chart.edges[id];
                edge.is_lexical() || edge.cat.as_deref().map(|c| g.is_root(c)).unwrap_or(false)
            })
            .min_by(|&a, &b| edge_order(chart, g, a, b))
    };
    // best[i]: fewest fragments covering [i, n)
    let mut best = vec![usize::MAX; n + 1];
    best[n] = 0;
    for i in (0..n).rev() {
        for j in i + 1..=n {
            if best[j] != usize::MAX && candidate(i, j).is_some() {
                best[i] = best[i].min(best[j] + 1);
            }
        }
    }
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        let j = (i + 1..=n)
            .rev()
            .find(|&j| best[j] != usize::MAX && best[j] + 1 == best[i] && candidate(i, j).is_some())
            .expect("single-word fragments always exist");
        out.push(candidate(i, j).unwrap());
        i = j;
    }
    out
}

/// One enriched lexical sign in a bag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BagSign {
    pub sign: FeatureStructure,
    /// Word position in the source sentence.
    pub position: usize,
    pub fragment: usize,
    pub passthrough: bool,
    pub proper: bool,
    /// Surface form as typed.
    pub original: String,
}

impl BagSign {
    pub fn lemma(&self) -> &str {
        self.sign.atom_at("lemma").unwrap_or("")
    }

    pub fn cat(&self) -> Option<&str> {
        self.sign.atom_at("cat")
    }

    pub fn index(&self) -> Option<&str> {
        self.sign.atom_at("sem.index")
    }

    /// Bound argument slots under `sem`, as (role, index) pairs.
    pub fn arguments(&self) -> Vec<(String, String)> {
        sign_arguments(&self.sign)
    }
}

pub fn sign_arguments(sign: &FeatureStructure) -> Vec<(String, String)> {
    let Some(sem) = sign.resolve(&"sem".into()) else { return Vec::new() };
    sem.features()
        .into_iter()
        .filter(|f| *f != "index")
        .filter_map(|f| sem.atom_at(f).map(|v| (f.to_string(), v.to_string())))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceBag {
    pub signs: Vec<BagSign>,
    pub fragments: usize,
    pub interrogative: bool,
    pub final_punct: Option<String>,
}

impl SourceBag {
    pub fn lemmas(&self) -> Vec<&str> {
        self.signs.iter().map(BagSign::lemma).collect()
    }
}

/// Lexical signs as instantiated by the chosen analysis; phrasal structure
/// is discarded.
pub fn extract_bag(r: &ParseResult, g: &Grammar) -> SourceBag {
    let mut signs = Vec::new();
    for (fragment, &edge) in r.chosen.iter().enumerate() {
        let leaves = r.chart.instantiate_leaves(g, edge);
        let leaf_edges = r.chart.leaf_edges(edge);
        for ((position, sign), leaf) in leaves.into_iter().zip(leaf_edges) {
            let Origin::Lexical { reading } = r.chart.edges[leaf].origin else { unreachable!() };
            let reading = &r.chart.readings[position][reading];
            signs.push(BagSign {
                sign,
                position,
                fragment,
                passthrough: reading.passthrough,
                proper: reading.proper,
                original: r.words[position].original.clone(),
            });
        }
    }
    signs.sort_by_key(|s| s.position);
    SourceBag { signs, fragments: r.chosen.len(), interrogative: r.interrogative, final_punct: r.final_punct.clone() }
}
