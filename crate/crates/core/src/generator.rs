//! Bag generation over coverage sets: every target-grammar derivation that
//! uses each bag sign exactly once, in any order.

use std::collections::{HashMap, HashSet};
use std::time::{Duration, Instant};

use crate::formats::{Grammar, Lexicon};
use crate::fs::FeatureStructure;
use crate::transfer::TargetSign;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_bag: usize,
    pub max_edges: usize,
    pub timeout: Duration,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_bag: 12, max_edges: 50_000, timeout: Duration::from_secs(5) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum GenError {
    #[error("no target lexicon entry for lemma {lemma:?}")]
    Gap { lemma: String },
    #[error("bag of {size} signs exceeds the limit of {max}")]
    BagTooLarge { size: usize, max: usize },
    #[error("more than {max} edges")]
    EdgeCap { max: usize },
    #[error("timed out after {ms} ms")]
    Timeout { ms: u128 },
    #[error("no complete realization")]
    NoRealization,
}

impl GenError {
    /// Short stage tag used in untranslated markers.
    pub fn tag(&self) -> &'static str {
        match self {
            GenError::Gap { .. } => "generation-gap",
            GenError::BagTooLarge { .. } => "bag-too-large",
            GenError::EdgeCap { .. } => "edge-cap-exceeded",
            GenError::Timeout { .. } => "gen-timeout",
            GenError::NoRealization => "gen-failure",
        }
    }
}

/// A word choice for one bag position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub sign: FeatureStructure,
    pub words: Vec<String>,
}

/// Render a passthrough lemma as `[form]`, capitalised for proper names.
pub fn bracketed(lemma: &str, proper: bool) -> String {
    let mut chars = lemma.chars();
    let body = match chars.next() {
        Some(c) if proper => c.to_uppercase().chain(chars).collect(),
        _ => lemma.to_string(),
    };
    format!("[{}]", body)
}

/// Candidates per position: lexicon entries with the sign's lemma whose
/// sign unifies with the transferred constraints.
pub fn instantiate_targets(signs: &[TargetSign], lex: &Lexicon) -> Result<Vec<Vec<Candidate>>, GenError> {
    let mut out = Vec::with_capacity(signs.len());
    for s in signs {
        if s.passthrough {
            out.push(vec![Candidate { sign: s.sign.clone(), words: vec![bracketed(s.lemma(), s.proper)] }]);
            continue;
        }
        let mut cands: Vec<Candidate> = Vec::new();
        let mut seen = HashSet::new();
        for (_, entry) in lex.by_lemma(s.lemma()) {
            let form = FeatureStructure::atom(entry.form.clone());
            let Ok(sign) = entry.sign.unify_at(&"form".into(), &form).and_then(|e| e.unify(&s.sign)) else {
                continue;
            };
            let words: Vec<String> = entry.form.split_whitespace().map(str::to_string).collect();
            if seen.insert((sign.canonical(), words.clone())) {
                cands.push(Candidate { sign, words });
            }
        }
        if cands.is_empty() {
            return Err(GenError::Gap { lemma: s.lemma().to_string() });
        }
        out.push(cands);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Realization {
    pub words: Vec<String>,
    pub root: String,
    pub goal_checks: usize,
    pub sign: FeatureStructure,
}

impl Realization {
    pub fn text(&self) -> String {
        self.words.join(" ")
    }
}

#[derive(Clone, Debug)]
struct GenEdge {
    coverage: u64,
    sign: FeatureStructure,
    words: Vec<String>,
    cat: Option<String>,
    goal_checks: usize,
}

#[derive(Clone, Debug, Default)]
pub struct Generation {
    /// Distinct realizations, fewest words first, then lexicographic.
    pub realizations: Vec<Realization>,
    pub trace: Vec<String>,
    pub edges: usize,
}

fn bits(coverage: u64, n: usize) -> String {
    (0..n).map(|i| if coverage & (1 << i) != 0 { '1' } else { '0' }).collect()
}

/// All realizations of one fragment's candidates.
pub fn generate(cands: &[Vec<Candidate>], g: &Grammar, limits: &Limits) -> Result<Generation, GenError> {
    let n = cands.len();
    if n > limits.max_bag || n > 63 {
        return Err(GenError::BagTooLarge { size: n, max: limits.max_bag.min(63) });
    }
    let full: u64 = (1u64 << n) - 1;
    let started = Instant::now();
    let mut chart: Vec<GenEdge> = Vec::new();
    let mut by_cat: HashMap<Option<String>, Vec<usize>> = HashMap::new();
    let mut seen: HashSet<(u64, String, Vec<String>)> = HashSet::new();
    let mut agenda: std::collections::VecDeque<GenEdge> = std::collections::VecDeque::new();
    let mut total = 0usize;
    for (i, cs) in cands.iter().enumerate() {
        for c in cs {
            let e = GenEdge {
                coverage: 1 << i,
                cat: c.sign.atom_at("cat").map(str::to_string),
                sign: c.sign.clone(),
                words: c.words.clone(),
                goal_checks: 0,
            };
            if seen.insert((e.coverage, e.sign.canonical(), e.words.clone())) {
                total += 1;
                agenda.push_back(e);
            }
        }
    }
    let mut out = Generation::default();
    let mut done: HashMap<Vec<String>, usize> = HashMap::new();
    while let Some(edge) = agenda.pop_front() {
        if started.elapsed() > limits.timeout {
            return Err(GenError::Timeout { ms: limits.timeout.as_millis() });
        }
        let id = chart.len();
        if edge.coverage == full {
            if let Some(cat) = edge.cat.as_deref().filter(|c| g.is_root(c)) {
                out.trace.push(format!("GEN {} {} \"{}\"", bits(edge.coverage, n), cat, edge.words.join(" ")));
                if !done.contains_key(&edge.words) {
                    done.insert(edge.words.clone(), out.realizations.len());
                    out.realizations.push(Realization {
                        words: edge.words.clone(),
                        root: cat.to_string(),
                        goal_checks: edge.goal_checks,
                        sign: edge.sign.clone(),
                    });
                }
            }
        }
        by_cat.entry(edge.cat.clone()).or_default().push(id);
        chart.push(edge);
        for rule in &g.rules {
            let k = rule.arity();
            for slot in 0..k {
                let want = rule.daughter_cat(slot);
                if want.is_some() && want != chart[id].cat.as_deref() {
                    continue;
                }
                let mut picked = vec![usize::MAX; k];
                picked[slot] = id;
                let mut found = Vec::new();
                combos(&chart, &by_cat, rule, &mut picked, 0, chart[id].coverage, &mut found);
                for kids in found {
                    let signs: Vec<&FeatureStructure> = kids.iter().map(|&c| &chart[c].sign).collect();
                    let Some(app) = rule.apply(&signs) else { continue };
                    let coverage = kids.iter().fold(0, |acc, &c| acc | chart[c].coverage);
                    let words: Vec<String> = kids.iter().flat_map(|&c| chart[c].words.iter().cloned()).collect();
                    if !seen.insert((coverage, app.mother.canonical(), words.clone())) {
                        continue;
                    }
                    total += 1;
                    if total > limits.max_edges {
                        return Err(GenError::EdgeCap { max: limits.max_edges });
                    }
                    let goal_checks = app.goal_checks + kids.iter().map(|&c| chart[c].goal_checks).sum::<usize>();
                    agenda.push_back(GenEdge {
                        coverage,
                        cat: app.mother.atom_at("cat").map(str::to_string),
                        sign: app.mother,
                        words,
                        goal_checks,
                    });
                }
            }
        }
    }
    out.edges = total;
    if out.realizations.is_empty() {
        return Err(GenError::NoRealization);
    }
    out.realizations.sort_by(|a, b| rank_cmp(a, b));
    Ok(out)
}

/// Fill every open daughter slot with a processed edge of the right
/// category whose coverage is disjoint from the rest.
fn combos(
    chart: &[GenEdge],
    by_cat: &HashMap<Option<String>, Vec<usize>>,
    rule: &crate::formats::GrammarRule,
    picked: &mut Vec<usize>,
    slot: usize,
    used: u64,
    out: &mut Vec<Vec<usize>>,
) {
    if slot == picked.len() {
        out.push(picked.clone());
        return;
    }
    if picked[slot] != usize::MAX {
        combos(chart, by_cat, rule, picked, slot + 1, used, out);
        return;
    }
    let pool: Box<dyn Iterator<Item = usize>> = match rule.daughter_cat(slot) {
        Some(c) => Box::new(by_cat.get(&Some(c.to_string())).into_iter().flatten().copied()),
        None => Box::new(0..chart.len()),
    };
    for e in pool {
        if chart[e].coverage & used != 0 {
            continue;
        }
        picked[slot] = e;
        combos(chart, by_cat, rule, picked, slot + 1, used | chart[e].coverage, out);
        picked[slot] = usize::MAX;
    }
}

fn rank_cmp(a: &Realization, b: &Realization) -> std::cmp::Ordering {
    a.words.len().cmp(&b.words.len()).then_with(|| a.words.cmp(&b.words))
}

/// Fewest words, then lexicographic word order.
pub fn rank_realizations(rs: &[Realization]) -> Option<&Realization> {
    rs.iter().min_by(|a, b| rank_cmp(a, b))
}
