#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::sync::OnceLock;

use rand::seq::SliceRandom;
use rand::Rng;

use shakebake::formats::Grammar;
use shakebake::fs::{FeatureStructure, Node, NodeId, Path, Workspace};
use shakebake::generator::Candidate;
use shakebake::lingware::Lingware;
use shakebake::parser::chart::{compositions, parse_readings, Chart, Reading};
use shakebake::transfer::{Covering, Match, TargetSign};

pub fn lingware_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../lingware/en-es-toy")
}

pub fn golden_file() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../golden/table3.tsv")
}

pub fn lingware() -> &'static Lingware {
    static LW: OnceLock<Lingware> = OnceLock::new();
    LW.get_or_init(|| Lingware::load(&lingware_dir()).expect("bundled lingware loads"))
}

pub fn fs(text: &str) -> FeatureStructure {
    text.parse().unwrap_or_else(|e| panic!("{}: {}", text, e))
}

// ---- random feature structures ----

const FEATURES: [&str; 4] = ["a", "b", "c", "d"];
const ATOMS: [&str; 3] = ["x", "y", "z"];

/// A random acyclic structure with at most `max_nodes` nodes and some
/// reentrancy. Shared nodes come from unifying fresh nodes into earlier ones.
pub fn random_fs<R: Rng>(rng: &mut R, max_nodes: usize) -> FeatureStructure {
    loop {
        let mut ws = Workspace::new();
        let root = ws.complex();
        let mut nodes = vec![root];
        let mut budget = rng.gen_range(1..max_nodes.max(2));
        grow(rng, &mut ws, root, 0, &mut budget, &mut nodes);
        let shares = rng.gen_range(0..3);
        for _ in 0..shares {
            let a = *nodes.choose(rng).unwrap();
            let b = *nodes.choose(rng).unwrap();
            let mut trial = ws.clone();
            if trial.unify(a, b).is_ok() && trial.check_acyclic(root).is_ok() {
                ws = trial;
            }
        }
        if let Ok(fs) = ws.export(root) {
            if fs.node_count() <= max_nodes {
                return fs;
            }
        }
    }
}

fn grow<R: Rng>(rng: &mut R, ws: &mut Workspace, node: NodeId, depth: usize, budget: &mut usize, nodes: &mut Vec<NodeId>) {
    let width = rng.gen_range(0..=3);
    for f in FEATURES.choose_multiple(rng, width) {
        if *budget == 0 {
            return;
        }
        *budget -= 1;
        let child = match rng.gen_range(0..10) {
            0..=3 => ws.atom(*ATOMS.choose(rng).unwrap()),
            4..=5 => ws.var(),
            _ if depth >= 3 => ws.var(),
            _ => {
                let c = ws.complex();
                grow(rng, ws, c, depth + 1, budget, nodes);
                c
            }
        };
        nodes.push(child);
        ws.add_feature(node, f, child);
    }
}

// ---- path-constraint oracle for unification ----

/// What a structure says about each of its paths: the class of paths it
/// shares a node with, and what kind of value sits there.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathFacts {
    /// Each path mapped to the smallest path sharing its node.
    pub class: BTreeMap<Vec<String>, Vec<String>>,
    pub kind: BTreeMap<Vec<String>, Kind>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Kind {
    Var,
    Complex,
    Atom(String),
}

fn path_order(a: &Vec<String>, b: &Vec<String>) -> std::cmp::Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

pub fn facts(fs: &FeatureStructure) -> PathFacts {
    let mut by_node: BTreeMap<NodeId, Vec<Vec<String>>> = BTreeMap::new();
    let mut stack = vec![(fs.root(), Vec::<String>::new())];
    while let Some((n, p)) = stack.pop() {
        if let Node::Complex(m) = fs.node(n) {
            for (f, &c) in m {
                let mut q = p.clone();
                q.push(f.clone());
                stack.push((c, q));
            }
        }
        by_node.entry(n).or_default().push(p);
    }
    let mut class = BTreeMap::new();
    let mut kind = BTreeMap::new();
    for (n, paths) in by_node {
        let rep = paths.iter().min_by(|a, b| path_order(a, b)).unwrap().clone();
        let k = match fs.node(n) {
            Node::Var => Kind::Var,
            Node::Atom(a) => Kind::Atom(a.clone()),
            Node::Complex(_) => Kind::Complex,
        };
        for p in paths {
            class.insert(p.clone(), rep.clone());
            kind.insert(p, k.clone());
        }
    }
    PathFacts { class, kind }
}

/// Congruence closure over the union of both constraint sets. `None` when
/// the constraints are unsatisfiable by a finite acyclic structure.
pub fn oracle_unify(a: &FeatureStructure, b: &FeatureStructure) -> Option<PathFacts> {
    let fa = facts(a);
    let fb = facts(b);
    let mut paths: BTreeSet<Vec<String>> = fa.kind.keys().chain(fb.kind.keys()).cloned().collect();
    let mut kinds: BTreeMap<Vec<String>, Kind> = BTreeMap::new();
    let mut parent: BTreeMap<Vec<String>, Vec<String>> = BTreeMap::new();
    for p in &paths {
        parent.insert(p.clone(), p.clone());
    }
    fn find(parent: &BTreeMap<Vec<String>, Vec<String>>, p: &Vec<String>) -> Vec<String> {
        let mut p = p.clone();
        while parent[&p] != p {
            p = parent[&p].clone();
        }
        p
    }
    for f in [&fa, &fb] {
        for (p, k) in &f.kind {
            let merged = merge_kind(kinds.get(p), k)?;
            kinds.insert(p.clone(), merged);
        }
    }
    let mut pending: Vec<(Vec<String>, Vec<String>)> = Vec::new();
    for f in [&fa, &fb] {
        for (p, rep) in &f.class {
            pending.push((p.clone(), rep.clone()));
        }
    }
    loop {
        while let Some((p, q)) = pending.pop() {
            let (rp, rq) = (find(&parent, &p), find(&parent, &q));
            if rp == rq {
                continue;
            }
            parent.insert(rp.clone(), rq.clone());
        }
        // A path equal to one of its own extensions means a cycle.
        let members: Vec<Vec<String>> = paths.iter().cloned().collect();
        for p in &members {
            for q in &members {
                if q.len() > p.len() && q.starts_with(p) && find(&parent, p) == find(&parent, q) {
                    return None;
                }
            }
        }
        // Kinds per class.
        let mut class_kind: BTreeMap<Vec<String>, Kind> = BTreeMap::new();
        for p in &members {
            let r = find(&parent, p);
            let k = kinds.get(p).cloned().unwrap_or(Kind::Var);
            let merged = merge_kind(class_kind.get(&r), &k)?;
            class_kind.insert(r, merged);
        }
        // Extensions: if p ~ q and p.f exists, q.f exists and p.f ~ q.f.
        let mut added = false;
        for p in &members {
            if p.len() > 40 {
                return None;
            }
            let Some((f, prefix)) = p.split_last() else { continue };
            let r = find(&parent, &prefix.to_vec());
            for q in &members {
                if find(&parent, q) != r || q.as_slice() == prefix {
                    continue;
                }
                let mut ext = q.clone();
                ext.push(f.clone());
                if !paths.contains(&ext) {
                    paths.insert(ext.clone());
                    parent.insert(ext.clone(), ext.clone());
                    added = true;
                }
                if find(&parent, &ext) != find(&parent, p) {
                    pending.push((ext, p.clone()));
                    added = true;
                }
            }
        }
        for (r, k) in &class_kind {
            if matches!(k, Kind::Atom(_)) && members.iter().any(|p| p.len() > 0 && find(&parent, &p[..p.len() - 1].to_vec()) == *r) {
                return None;
            }
        }
        if !added {
            let mut out = PathFacts { class: BTreeMap::new(), kind: BTreeMap::new() };
            let mut reps: BTreeMap<Vec<String>, Vec<String>> = BTreeMap::new();
            for p in &paths {
                let r = find(&parent, p);
                let cur = reps.entry(r).or_insert_with(|| p.clone());
                if path_order(p, cur).is_lt() {
                    *cur = p.clone();
                }
            }
            for p in &paths {
                let r = find(&parent, p);
                out.class.insert(p.clone(), reps[&r].clone());
                let has_children = paths.iter().any(|q| q.len() == p.len() + 1 && find(&parent, &q[..p.len()].to_vec()) == r);
                let k = match class_kind.get(&r).cloned().unwrap_or(Kind::Var) {
                    Kind::Var if has_children => Kind::Complex,
                    k => k,
                };
                out.kind.insert(p.clone(), k);
            }
            return Some(out);
        }
    }
}

fn merge_kind(old: Option<&Kind>, new: &Kind) -> Option<Kind> {
    match (old, new) {
        (None, k) | (Some(Kind::Var), k) => Some(k.clone()),
        (Some(k), Kind::Var) => Some(k.clone()),
        (Some(Kind::Complex), Kind::Complex) => Some(Kind::Complex),
        (Some(Kind::Atom(x)), Kind::Atom(y)) if x == y => Some(Kind::Atom(x.clone())),
        _ => None,
    }
}

/// Two structures whose unification must fail the occurs check: `a` says
/// `l` and `r` are the same node, `b` puts `r` strictly inside `l`.
pub fn cyclic_pair<R: Rng>(rng: &mut R) -> (FeatureStructure, FeatureStructure) {
    let inner = random_fs(rng, 8);
    let mut ws = Workspace::new();
    let root = ws.complex();
    let l = ws.import(&inner);
    ws.add_feature(root, "l", l);
    let open: Vec<&str> = inner
        .features()
        .into_iter()
        .filter(|f| inner.resolve(&Path::parse(f)).is_some_and(|v| v.is_var()))
        .collect();
    let tail = match open.choose(rng) {
        Some(f) => Path(vec![f.to_string()]),
        None => Path(vec!["e".to_string()]),
    };
    let at = ws.ensure_path(l, &tail).expect("complex root");
    ws.add_feature(root, "r", at);
    let b = ws.export(root).expect("acyclic");
    let a = fs("(l ?x) (r ?x)");
    (a, b)
}

// ---- chart oracle ----

/// Every sign derivable over each span, found by plain recursion over
/// splits. Keys are canonical texts.
pub fn brute_force_spans(readings: &[Vec<Reading>], g: &Grammar) -> BTreeMap<(usize, usize), BTreeSet<String>> {
    let n = readings.len();
    let mut table: BTreeMap<(usize, usize), BTreeMap<String, FeatureStructure>> = BTreeMap::new();
    for len in 1..=n {
        for start in 0..=n - len {
            let end = start + len;
            let mut here: BTreeMap<String, FeatureStructure> = BTreeMap::new();
            if len == 1 {
                for r in &readings[start] {
                    here.insert(r.sign.canonical(), r.sign.clone());
                }
            } else {
                for rule in &g.rules {
                    let k = rule.arity();
                    if k < 2 || k > len {
                        continue;
                    }
                    for parts in compositions(start, end, k) {
                        let pools: Vec<Vec<&FeatureStructure>> =
                            parts.iter().map(|p| table.get(p).map(|m| m.values().collect()).unwrap_or_default()).collect();
                        each_combo(&pools, &mut Vec::new(), &mut |signs| {
                            if let Some(app) = rule.apply(signs) {
                                here.insert(app.mother.canonical(), app.mother);
                            }
                        });
                    }
                }
            }
            let mut frontier: Vec<FeatureStructure> = here.values().cloned().collect();
            while let Some(s) = frontier.pop() {
                for rule in g.rules.iter().filter(|r| r.arity() == 1) {
                    if let Some(app) = rule.apply(&[&s]) {
                        let key = app.mother.canonical();
                        if !here.contains_key(&key) {
                            here.insert(key, app.mother.clone());
                            frontier.push(app.mother);
                        }
                    }
                }
            }
            table.insert((start, end), here);
        }
    }
    table.into_iter().map(|(k, v)| (k, v.into_keys().collect())).filter(|(_, v): &(_, BTreeSet<String>)| !v.is_empty()).collect()
}

fn each_combo<'a>(pools: &[Vec<&'a FeatureStructure>], cur: &mut Vec<&'a FeatureStructure>, f: &mut dyn FnMut(&[&FeatureStructure])) {
    if cur.len() == pools.len() {
        f(cur);
        return;
    }
    for &s in &pools[cur.len()] {
        cur.push(s);
        each_combo(pools, cur, f);
        cur.pop();
    }
}

pub fn chart_spans(chart: &Chart) -> BTreeMap<(usize, usize), BTreeSet<String>> {
    let mut out: BTreeMap<(usize, usize), BTreeSet<String>> = BTreeMap::new();
    for e in &chart.edges {
        out.entry((e.start, e.end)).or_default().insert(e.canonical().to_string());
    }
    out
}

// ---- covering oracle ----

/// All exact covers of `n` signs by pairwise-disjoint matches, the rest
/// passed through, in rank order.
pub fn brute_force_covers(n: usize, matches: &[Match]) -> Vec<Covering> {
    let mut out = Vec::new();
    let m = matches.len();
    assert!(m <= 20, "too many matches for brute force");
    for mask in 0u32..(1 << m) {
        let chosen: Vec<&Match> = (0..m).filter(|i| mask & (1 << i) != 0).map(|i| &matches[i]).collect();
        let mut used = vec![false; n];
        let mut ok = true;
        for c in &chosen {
            for &s in &c.signs {
                if used[s] {
                    ok = false;
                }
                used[s] = true;
            }
        }
        if !ok {
            continue;
        }
        let mut ms: Vec<Match> = chosen.into_iter().cloned().collect();
        ms.sort_by_key(|m| m.signs.iter().copied().min());
        let passthrough = (0..n).filter(|&i| !used[i]).collect();
        out.push(Covering { matches: ms, passthrough });
    }
    out.sort_by(|a, b| a.rank_cmp(b));
    out
}

// ---- generation oracle ----

/// Word strings of every spanning root derivation over every ordering of
/// the bag, via the chart parser.
pub fn brute_force_generate(cands: &[Vec<Candidate>], g: &Grammar) -> BTreeSet<Vec<String>> {
    let n = cands.len();
    let mut out = BTreeSet::new();
    let mut perm: Vec<usize> = (0..n).collect();
    permutations(&mut perm, 0, &mut |order| {
        let readings: Vec<Vec<Reading>> = order
            .iter()
            .map(|&i| {
                cands[i].iter().map(|c| Reading { sign: c.sign.clone(), entry: None, passthrough: false, proper: false }).collect()
            })
            .collect();
        let chart = parse_readings(readings, &[], g);
        for &id in chart.span(0, n) {
            let e = &chart.edges[id];
            if !e.cat.as_deref().map(|c| g.is_root(c)).unwrap_or(false) {
                continue;
            }
            let mut words = Vec::new();
            for leaf in chart.leaf_edges(id) {
                let le = &chart.edges[leaf];
                let shakebake::parser::chart::Origin::Lexical { reading } = le.origin else { unreachable!() };
                words.extend(cands[order[le.start]][reading].words.iter().cloned());
            }
            out.insert(words);
        }
    });
    out
}

fn permutations(v: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permutations(v, k + 1, f);
        v.swap(k, i);
    }
}

// ---- random target bags ----

trait Tensed {
    fn tensed(self, tense: &str) -> Self;
}

impl Tensed for TargetSign {
    fn tensed(mut self, tense: &str) -> Self {
        self.sign = self.sign.unify(&fs(&format!("(tense {})", tense))).expect("no tense yet");
        self
    }
}

fn target(lemma: &str, sem: &str) -> TargetSign {
    TargetSign { sign: fs(&format!("(lemma {}) (sem {})", lemma, sem)), fragment: 0, passthrough: false, proper: false }
}

/// A random bag of at most `max` target signs built from small templates,
/// sometimes with an argument rewired so that no realization exists.
pub fn random_target_bag<R: Rng>(rng: &mut R, max: usize) -> Vec<TargetSign> {
    let nouns = ["mujer", "hombre", "libro", "balón", "cubo", "marca", "ligadura"];
    let adjs = ["alocado", "bueno"];
    let verbs = ["ver", "patear", "necesitar", "aguantar"];
    let mut bag: Vec<TargetSign> = Vec::new();
    let mut next = 1;
    let mut fresh = || {
        let i = next;
        next += 1;
        format!("t{}", i)
    };
    let np = |rng: &mut R, bag: &mut Vec<TargetSign>, fresh: &mut dyn FnMut() -> String| -> String {
        let x = fresh();
        bag.push(target(nouns.choose(rng).unwrap(), &format!("(index {})", x)));
        if rng.gen_bool(0.8) {
            let det = if rng.gen_bool(0.8) { "el" } else { "todo" };
            bag.push(target(det, &format!("(index {}) (mod {})", fresh(), x)));
        }
        if rng.gen_bool(0.3) {
            bag.push(target(adjs.choose(rng).unwrap(), &format!("(index {}) (mod {})", fresh(), x)));
        }
        x
    };
    match rng.gen_range(0..6) {
        0 => {
            np(rng, &mut bag, &mut fresh);
        }
        1 => {
            let e = fresh();
            let o = np(rng, &mut bag, &mut fresh);
            bag.push(target(verbs.choose(rng).unwrap(), &format!("(index {}) (arg1 pro) (arg2 {})", e, o)).tensed("pres"));
        }
        2 => {
            let x = np(rng, &mut bag, &mut fresh);
            let y = np(rng, &mut bag, &mut fresh);
            bag.push(target("de", &format!("(index {}) (mod {}) (arg1 {})", fresh(), x, y)));
        }
        3 => {
            let e = fresh();
            let o = fresh();
            bag.push(target("lo", &format!("(index {})", o)));
            bag.push(target(verbs.choose(rng).unwrap(), &format!("(index {}) (arg1 pro) (arg2 {})", e, o)).tensed("pres"));
        }
        4 => {
            let i = fresh();
            bag.push(target(["hola", "sí", "gracias", "fantástico"].choose(rng).unwrap(), &format!("(index {})", i)));
        }
        _ => {
            let e = fresh();
            let s = np(rng, &mut bag, &mut fresh);
            let past = ["patear", "aguantar"];
            bag.push(target(past.choose(rng).unwrap(), &format!("(index {}) (arg1 {}) (arg2 pro)", e, s)).tensed("past"));
        }
    }
    bag.truncate(max);
    let modifiers: Vec<usize> = (0..bag.len()).filter(|&i| bag[i].sign.atom_at("sem.mod").is_some()).collect();
    if rng.gen_bool(0.2) && bag.len() > 1 && !modifiers.is_empty() {
        let i = *modifiers.choose(rng).unwrap();
        let other = bag[rng.gen_range(0..bag.len())].index().unwrap_or("t1").to_string();
        if let Ok(s) = bag[i].sign.generalize_at(&Path::parse("sem.mod")).unify_at(&Path::parse("sem.mod"), &FeatureStructure::atom(other)) {
            bag[i].sign = s;
        }
    }
    bag.shuffle(rng);
    bag
}

// ---- random source sentences ----

/// Up to `max` words drawn from the source lexicon, plus an unknown word.
pub fn random_sentence<R: Rng>(rng: &mut R, lw: &Lingware, max: usize) -> String {
    let mut forms: Vec<&str> = lw.source_lex.entries().iter().map(|e| e.form.as_str()).filter(|f| !f.contains(' ')).collect();
    forms.sort_unstable();
    forms.dedup();
    let len = rng.gen_range(1..=max);
    let words: Vec<&str> = (0..len).map(|_| if rng.gen_bool(0.1) { "zorp" } else { forms.choose(rng).unwrap() }).collect();
    words.join(" ")
}

// ---- dependency structure, for round trips ----

/// Multiset of (head lemma, role, dependent lemma) over argument slots that
/// point at another sign's index. Index names themselves do not matter.
pub type Dependencies = BTreeMap<(String, String, String), usize>;

pub fn dependencies(signs: &[FeatureStructure]) -> Dependencies {
    let mut owner: BTreeMap<String, String> = BTreeMap::new();
    for s in signs {
        if let (Some(i), Some(l)) = (s.atom_at("sem.index"), s.atom_at("lemma")) {
            owner.insert(i.to_string(), l.to_string());
        }
    }
    let mut out = Dependencies::new();
    for s in signs {
        let head = s.atom_at("lemma").unwrap_or("").to_string();
        for (role, value) in shakebake::parser::sign_arguments(s) {
            if let Some(dep) = owner.get(&value) {
                *out.entry((head.clone(), role, dep.clone())).or_default() += 1;
            }
        }
    }
    out
}

/// Dependencies of every spanning analysis of `words` under the target
/// grammar and lexicon.
pub fn reparse(words: &[String], lw: &Lingware) -> Vec<Dependencies> {
    let tokens = shakebake::parser::tokenize(&words.join(" "));
    let r = shakebake::parser::parse(&tokens, &lw.target_gram, &lw.target_lex);
    r.spanning
        .iter()
        .map(|&id| {
            let leaves: Vec<FeatureStructure> = r.chart.instantiate_leaves(&lw.target_gram, id).into_iter().map(|(_, s)| s).collect();
            dependencies(&leaves)
        })
        .collect()
}

/// The bag's dependencies with the roles of signs `a` and `b` exchanged:
/// every slot that pointed at one now points at the other.
pub fn swapped(signs: &[FeatureStructure], a: usize, b: usize) -> Dependencies {
    let ia = signs[a].atom_at("sem.index").map(str::to_string);
    let ib = signs[b].atom_at("sem.index").map(str::to_string);
    let mut out = Vec::new();
    for s in signs {
        let mut s = s.clone();
        for (role, value) in shakebake::parser::sign_arguments(&s) {
            let to = if Some(&value) == ia.as_ref() {
                ib.clone()
            } else if Some(&value) == ib.as_ref() {
                ia.clone()
            } else {
                None
            };
            if let Some(to) = to {
                let p = Path(vec!["sem".into(), role]);
                s = s.generalize_at(&p).unify_at(&p, &FeatureStructure::atom(to)).expect("fresh slot");
            }
        }
        out.push(s);
    }
    dependencies(&out)
}
