//! Lexical transfer: cover a source bag with bilingual entries and build the
//! target bag from their templates.

use std::cmp::{Ordering, Reverse};
use std::collections::BTreeSet;

use crate::formats::{source_slot, target_slot, BilingualEntry, BilingualLexicon};
use crate::fs::{FeatureStructure, Path, Workspace};
use crate::parser::{passthrough_sign, sign_arguments, IndexMinter, SourceBag};

/// Argument value for a dependent that transfer deleted (a dropped subject
/// pronoun, say). It keeps the slot filled so the target grammar cannot
/// attach some other phrase there.
pub const DROPPED: &str = "pro";

/// An entry with its triggered macros folded in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EffectiveEntry {
    pub name: String,
    /// Position of the entry in the bilingual lexicon.
    pub entry: usize,
    pub frame: FeatureStructure,
    pub n_source: usize,
    pub n_target: usize,
    pub key_slot: usize,
    pub macros: Vec<String>,
}

impl EffectiveEntry {
    pub fn from_entry(e: &BilingualEntry, entry: usize) -> Self {
        EffectiveEntry {
            name: e.name.clone(),
            entry,
            frame: e.frame.clone(),
            n_source: e.n_source,
            n_target: e.n_target,
            key_slot: e.key_slot,
            macros: Vec::new(),
        }
    }

    pub fn source(&self, i: usize) -> FeatureStructure {
        self.frame.resolve(&Path(vec![source_slot(i)])).unwrap_or_else(FeatureStructure::empty)
    }

    pub fn target(&self, i: usize) -> FeatureStructure {
        self.frame.resolve(&Path(vec![target_slot(i)])).unwrap_or_else(FeatureStructure::empty)
    }

    /// The source patterns alone (`s0`, `s1`, ...).
    pub fn source_side(&self) -> FeatureStructure {
        let slots: Vec<String> = (0..self.n_source).map(source_slot).collect();
        self.frame.project(&slots.iter().map(String::as_str).collect::<Vec<_>>())
    }

    /// The target templates alone (`t0`, `t1`, ...).
    pub fn target_side(&self) -> FeatureStructure {
        let slots: Vec<String> = (0..self.n_target).map(target_slot).collect();
        self.frame.project(&slots.iter().map(String::as_str).collect::<Vec<_>>())
    }

    pub fn source_lemmas(&self) -> Vec<String> {
        (0..self.n_source).map(|i| lemma_of(&self.source(i))).collect()
    }

    pub fn target_lemmas(&self) -> Vec<String> {
        (0..self.n_target).map(|i| lemma_of(&self.target(i))).collect()
    }
}

fn lemma_of(sign: &FeatureStructure) -> String {
    sign.atom_at("lemma").unwrap_or("?").to_string()
}

/// One application of an entry to a bag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Match {
    /// Bag sign consumed by each source slot of `effective`.
    pub signs: Vec<usize>,
    /// The effective entry with all source slots unified with their signs.
    pub effective: EffectiveEntry,
}

impl Match {
    pub fn name(&self) -> &str {
        &self.effective.name
    }

    /// Consumed bag signs, ascending.
    pub fn consumed(&self) -> Vec<usize> {
        let mut out = self.signs.clone();
        out.sort_unstable();
        out
    }

    fn first(&self) -> usize {
        self.signs.iter().copied().min().unwrap_or(usize::MAX)
    }
}

/// Every injective assignment of the entry's source patterns to bag signs.
/// The key pattern only tries signs carrying the key lemma; the remaining
/// patterns may land anywhere in the bag.
pub fn match_entry(e: &BilingualEntry, entry: usize, bag: &SourceBag) -> Vec<Match> {
    let base = EffectiveEntry::from_entry(e, entry);
    let mut order = vec![e.key_slot];
    order.extend((0..e.n_source).filter(|&i| i != e.key_slot));
    let mut out = Vec::new();
    assign(&base.frame, &order, bag, &mut vec![usize::MAX; e.n_source], 0, e, &mut |frame, signs| {
        let mut effective = base.clone();
        effective.frame = frame;
        out.push(Match { signs: signs.to_vec(), effective });
    });
    out
}

fn assign(
    frame: &FeatureStructure,
    order: &[usize],
    bag: &SourceBag,
    signs: &mut Vec<usize>,
    depth: usize,
    e: &BilingualEntry,
    found: &mut dyn FnMut(FeatureStructure, &[usize]),
) {
    if depth == order.len() {
        found(frame.clone(), signs);
        return;
    }
    let slot = order[depth];
    for (j, s) in bag.signs.iter().enumerate() {
        if signs.contains(&j) {
            continue;
        }
        if depth == 0 && slot == e.key_slot && s.lemma() != e.key {
            continue;
        }
        if let Ok(next) = frame.unify_at(&Path(vec![source_slot(slot)]), &s.sign) {
            signs[slot] = j;
            assign(&next, order, bag, signs, depth + 1, e, found);
            signs[slot] = usize::MAX;
        }
    }
}

/// Fold in every macro of `e` whose trigger unifies with the key sign of
/// `m`. Extra source patterns and target templates are appended after the
/// entry's own slots; macros whose trigger fails are skipped.
pub fn expand_macros(e: &BilingualEntry, m: &Match, bl: &BilingualLexicon) -> EffectiveEntry {
    let mut out = m.effective.clone();
    for name in &e.macros {
        let Some(mac) = bl.macro_named(name) else { continue };
        let mut ws = Workspace::new();
        let f = ws.import(&out.frame);
        let mroot = ws.import(&mac.frame);
        let key = ws.child(f, &source_slot(out.key_slot)).expect("key slot");
        let Some(trigger) = ws.child(mroot, "trigger") else { continue };
        if ws.unify(key, trigger).is_err() {
            continue;
        }
        for k in 0..mac.n_source_extra {
            let child = ws.child(mroot, &source_slot(k)).expect("source-extra slot");
            ws.add_feature(f, &source_slot(out.n_source + k), child);
        }
        for k in 0..mac.n_target_extra {
            let child = ws.child(mroot, &target_slot(k)).expect("target-extra slot");
            ws.add_feature(f, &target_slot(out.n_target + k), child);
        }
        let Ok(frame) = ws.export(f) else { continue };
        out.frame = frame;
        out.n_source += mac.n_source_extra;
        out.n_target += mac.n_target_extra;
        out.macros.push(name.clone());
    }
    out
}

/// All matches of all entries, with macros expanded. Macro source-extra
/// patterns consume bag signs too; a match whose extras find no free signs
/// is dropped.
pub fn all_matches(bag: &SourceBag, bl: &BilingualLexicon) -> Vec<Match> {
    let lemmas: BTreeSet<&str> = bag.signs.iter().map(|s| s.lemma()).collect();
    let mut out = Vec::new();
    for (i, e) in bl.entries.iter().enumerate() {
        if !lemmas.contains(e.key.as_str()) {
            continue;
        }
        for m in match_entry(e, i, bag) {
            let effective = expand_macros(e, &m, bl);
            if effective.n_source == m.signs.len() {
                out.push(Match { signs: m.signs, effective });
                continue;
            }
            let base = m.signs.len();
            let order: Vec<usize> = (base..effective.n_source).collect();
            let mut signs = m.signs.clone();
            signs.resize(effective.n_source, usize::MAX);
            extend(&effective.frame, &order, bag, &mut signs, 0, &mut |frame, signs| {
                let mut eff = effective.clone();
                eff.frame = frame;
                out.push(Match { signs: signs.to_vec(), effective: eff });
            });
        }
    }
    out
}

fn extend(
    frame: &FeatureStructure,
    order: &[usize],
    bag: &SourceBag,
    signs: &mut Vec<usize>,
    depth: usize,
    found: &mut dyn FnMut(FeatureStructure, &[usize]),
) {
    if depth == order.len() {
        found(frame.clone(), signs);
        return;
    }
    let slot = order[depth];
    for (j, s) in bag.signs.iter().enumerate() {
        if signs.contains(&j) {
            continue;
        }
        if let Ok(next) = frame.unify_at(&Path(vec![source_slot(slot)]), &s.sign) {
            signs[slot] = j;
            extend(&next, order, bag, signs, depth + 1, found);
            signs[slot] = usize::MAX;
        }
    }
}

/// Every bag sign consumed exactly once, by a match or as a passthrough.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Covering {
    /// Matches ordered by their first consumed sign.
    pub matches: Vec<Match>,
    pub passthrough: Vec<usize>,
}

impl Covering {
    fn sizes(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.matches.iter().map(|m| m.signs.len()).collect();
        s.sort_unstable_by(|a, b| b.cmp(a));
        s
    }

    fn entries(&self) -> Vec<usize> {
        self.matches.iter().map(|m| m.effective.entry).collect()
    }

    fn assignment(&self) -> Vec<Vec<usize>> {
        self.matches.iter().map(|m| m.signs.clone()).collect()
    }

    /// Fewer passthroughs, then bigger matches, then bilingual file order.
    pub fn rank_cmp(&self, other: &Covering) -> Ordering {
        self.passthrough
            .len()
            .cmp(&other.passthrough.len())
            .then_with(|| Reverse(self.sizes()).cmp(&Reverse(other.sizes())))
            .then_with(|| self.entries().cmp(&other.entries()))
            .then_with(|| self.assignment().cmp(&other.assignment()))
    }
}

/// Up to `k` best coverings. Coverings are enumerated one passthrough
/// count at a time, so a bag with many translatable signs never enumerates
/// the coverings that discard most of them.
pub fn cover(bag: &SourceBag, bl: &BilingualLexicon, k: usize) -> Vec<Covering> {
    let matches = all_matches(bag, bl);
    cover_with(bag.signs.len(), &matches, k)
}

pub fn cover_with(n: usize, matches: &[Match], k: usize) -> Vec<Covering> {
    let mut by_first: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, m) in matches.iter().enumerate() {
        by_first[m.first()].push(i);
    }
    let mut out = Vec::new();
    for p in 0..=n {
        let mut level = Vec::new();
        let mut used = vec![false; n];
        search(matches, &by_first, &mut used, &mut Vec::new(), &mut Vec::new(), p, &mut level);
        level.sort_by(|a, b| a.rank_cmp(b));
        out.extend(level);
        if out.len() >= k {
            break;
        }
    }
    out.truncate(k);
    out
}

fn search(
    matches: &[Match],
    by_first: &[Vec<usize>],
    used: &mut Vec<bool>,
    chosen: &mut Vec<usize>,
    pass: &mut Vec<usize>,
    budget: usize,
    out: &mut Vec<Covering>,
) {
    let Some(i) = used.iter().position(|u| !u) else {
        if pass.len() == budget {
            out.push(Covering { matches: chosen.iter().map(|&c| matches[c].clone()).collect(), passthrough: pass.clone() });
        }
        return;
    };
    for &mi in &by_first[i] {
        let m = &matches[mi];
        if m.signs.iter().any(|&s| used[s]) {
            continue;
        }
        for &s in &m.signs {
            used[s] = true;
        }
        chosen.push(mi);
        search(matches, by_first, used, chosen, pass, budget, out);
        chosen.pop();
        for &s in &m.signs {
            used[s] = false;
        }
    }
    if pass.len() < budget {
        used[i] = true;
        pass.push(i);
        search(matches, by_first, used, chosen, pass, budget, out);
        pass.pop();
        used[i] = false;
    }
}

/// One target sign awaiting generation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TargetSign {
    pub sign: FeatureStructure,
    pub fragment: usize,
    pub passthrough: bool,
    pub proper: bool,
}

impl TargetSign {
    pub fn lemma(&self) -> &str {
        self.sign.atom_at("lemma").unwrap_or("")
    }

    pub fn index(&self) -> Option<&str> {
        self.sign.atom_at("sem.index")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TargetBag {
    pub signs: Vec<TargetSign>,
    pub fragments: usize,
    pub interrogative: bool,
    pub final_punct: Option<String>,
    pub trace: Vec<String>,
}

impl TargetBag {
    /// Signs of one fragment, in bag order.
    pub fn fragment(&self, f: usize) -> Vec<TargetSign> {
        self.signs.iter().filter(|s| s.fragment == f).cloned().collect()
    }

    pub fn lemmas(&self) -> Vec<&str> {
        self.signs.iter().map(TargetSign::lemma).collect()
    }
}

/// Instantiate the target templates of one covering.
pub fn apply_covering(bag: &SourceBag, c: &Covering) -> TargetBag {
    let mut minter = IndexMinter::new("t");
    let mut items: Vec<(usize, Vec<TargetSign>)> = Vec::new();
    let mut trace = Vec::new();
    for m in &c.matches {
        let eff = &m.effective;
        let fragment = bag.signs[m.signs[eff.key_slot]].fragment;
        let mut ws = Workspace::new();
        let f = ws.import(&eff.frame);
        let mut roots = Vec::new();
        for t in 0..eff.n_target {
            let node = ws.child(f, &target_slot(t)).expect("target slot");
            let index = ws.ensure_path(node, &Path::parse("sem.index")).expect("target sign is complex");
            if ws.atom_value(index).is_none() {
                let fresh = minter.mint();
                ws.unify_atom_at(node, &Path::parse("sem.index"), &fresh).expect("unbound index");
            }
            roots.push(node);
        }
        let signs: Vec<TargetSign> = roots
            .iter()
            .map(|&n| TargetSign { sign: ws.export(n).expect("acyclic template"), fragment, passthrough: false, proper: false })
            .collect();
        trace.push(format!(
            "XFER {} consumes [{}] emits [{}]",
            eff.name,
            m.signs.iter().map(|&s| bag.signs[s].lemma()).collect::<Vec<_>>().join(" "),
            signs.iter().map(TargetSign::lemma).collect::<Vec<_>>().join(" ")
        ));
        items.push((m.first(), signs));
    }
    for &p in &c.passthrough {
        let s = &bag.signs[p];
        let index = s.index().map(str::to_string).unwrap_or_else(|| minter.mint());
        let sign = passthrough_sign(s.lemma(), &index, s.proper);
        trace.push(format!("XFER @pass {}", s.lemma()));
        items.push((p, vec![TargetSign { sign, fragment: s.fragment, passthrough: true, proper: s.proper }]));
    }
    items.sort_by_key(|(first, _)| *first);
    let mut signs: Vec<TargetSign> = items.into_iter().flat_map(|(_, s)| s).collect();
    let owned: BTreeSet<String> = signs.iter().filter_map(|s| s.index().map(str::to_string)).collect();
    for s in &mut signs {
        for (role, atom) in sign_arguments(&s.sign) {
            if !owned.contains(&atom) {
                let path = Path(vec!["sem".to_string(), role]);
                let dropped = s.sign.generalize_at(&path).unify_at(&path, &FeatureStructure::atom(DROPPED));
                s.sign = dropped.expect("fresh variable takes any atom");
            }
        }
    }
    TargetBag { signs, fragments: bag.fragments, interrogative: bag.interrogative, final_punct: bag.final_punct.clone(), trace }
}

/// Target bags for the `k` best coverings, best first.
pub fn transfer(bag: &SourceBag, bl: &BilingualLexicon, k: usize) -> Vec<TargetBag> {
    cover(bag, bl, k).iter().map(|c| apply_covering(bag, c)).collect()
}
