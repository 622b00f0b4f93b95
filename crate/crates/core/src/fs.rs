//! Untyped attribute-value feature structures with coreference.
//!
//! A [`FeatureStructure`] is an immutable rooted DAG stored in a node vector.
//! Coreference is two paths reaching the same node; unbound variables are
//! [`Node::Var`] nodes. Variable identity is local to a structure, so any two
//! structures are always renamed apart.
//!
//! Destructive work (unification, rule application, pattern matching) happens
//! in a [`Workspace`], a union-find arena that structures are imported into and
//! exported back out of. Export enforces acyclicity.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::sexpr::{self, Sexp};

pub type NodeId = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Node {
    Var,
    Atom(String),
    Complex(BTreeMap<String, NodeId>),
}

/// Sequence of feature names. The empty path addresses the root.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path(pub Vec<String>);

impl Path {
    pub fn root() -> Self {
        Path(Vec::new())
    }

    /// Parse a dotted path such as `sem.index`.
    pub fn parse(dotted: &str) -> Self {
        if dotted.is_empty() {
            return Path::root();
        }
        Path(dotted.split('.').map(str::to_string).collect())
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn features(&self) -> &[String] {
        &self.0
    }

    pub fn child(&self, feature: &str) -> Path {
        let mut p = self.0.clone();
        p.push(feature.to_string());
        Path(p)
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join(" "))
    }
}

impl From<&str> for Path {
    fn from(dotted: &str) -> Self {
        Path::parse(dotted)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum UnifyError {
    #[error("atomic clash at ({path}): {left} vs {right}")]
    AtomClash { path: Path, left: String, right: String },
    #[error("atom/complex clash at ({path})")]
    KindClash { path: Path },
    #[error("occurs check failed at ({path})")]
    Cycle { path: Path },
}

impl UnifyError {
    /// Path at which unification first failed.
    pub fn path(&self) -> &Path {
        match self {
            UnifyError::AtomClash { path, .. } | UnifyError::KindClash { path } | UnifyError::Cycle { path } => path,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FeatureStructure {
    nodes: Vec<Node>,
    root: NodeId,
}

impl FeatureStructure {
    /// The empty structure `{}`, which subsumes every complex structure.
    pub fn empty() -> Self {
        FeatureStructure { nodes: vec![Node::Complex(BTreeMap::new())], root: 0 }
    }

    pub fn var() -> Self {
        FeatureStructure { nodes: vec![Node::Var], root: 0 }
    }

    pub fn atom(value: impl Into<String>) -> Self {
        FeatureStructure { nodes: vec![Node::Atom(value.into())], root: 0 }
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_var(&self) -> bool {
        matches!(self.nodes[self.root], Node::Var)
    }

    pub fn as_atom(&self) -> Option<&str> {
        match &self.nodes[self.root] {
            Node::Atom(a) => Some(a),
            _ => None,
        }
    }

    /// Top-level feature names in sorted order.
    pub fn features(&self) -> Vec<&str> {
        match &self.nodes[self.root] {
            Node::Complex(map) => map.keys().map(String::as_str).collect(),
            _ => Vec::new(),
        }
    }

    pub fn node_at(&self, path: &Path) -> Option<NodeId> {
        let mut cur = self.root;
        for feat in path.features() {
            match &self.nodes[cur] {
                Node::Complex(map) => cur = *map.get(feat)?,
                _ => return None,
            }
        }
        Some(cur)
    }

    /// The sub-structure at `path`, or `None` when the path is absent.
    pub fn resolve(&self, path: &Path) -> Option<FeatureStructure> {
        let node = self.node_at(path)?;
        let mut ws = Workspace::new();
        let base = ws.import(self);
        Some(ws.export(base + node).expect("sub-structure of an acyclic structure"))
    }

    /// Atom value at a dotted path.
    pub fn atom_at(&self, dotted: &str) -> Option<&str> {
        match &self.nodes[self.node_at(&Path::parse(dotted))?] {
            Node::Atom(a) => Some(a),
            _ => None,
        }
    }

    /// Most general unifier of `self` and `other`.
    pub fn unify(&self, other: &FeatureStructure) -> Result<FeatureStructure, UnifyError> {
        let mut ws = Workspace::new();
        let a = ws.import(self);
        let b = ws.import(other);
        ws.unify(a, b)?;
        ws.export(a)
    }

    /// Unify `other` into the node at `path`, creating the path if needed.
    pub fn unify_at(&self, path: &Path, other: &FeatureStructure) -> Result<FeatureStructure, UnifyError> {
        let mut ws = Workspace::new();
        let a = ws.import(self);
        let at = ws.ensure_path(a, path)?;
        let b = ws.import(other);
        ws.unify(at, b)?;
        ws.export(a)
    }

    /// Copy with every variable renamed apart; coreference is preserved.
    pub fn fresh_variant(&self) -> FeatureStructure {
        let mut ws = Workspace::new();
        let a = ws.import(self);
        ws.export(a).expect("copy of an acyclic structure")
    }

    /// Copy with the value at `path` replaced by a fresh variable. Other
    /// occurrences of a shared value keep it.
    pub fn generalize_at(&self, path: &Path) -> FeatureStructure {
        let Some((last, parent)) = path.features().split_last() else { return FeatureStructure::var() };
        let Some(parent) = self.node_at(&Path(parent.to_vec())) else { return self.clone() };
        let mut nodes = self.nodes.clone();
        nodes.push(Node::Var);
        let fresh = nodes.len() - 1;
        match &mut nodes[parent] {
            Node::Complex(map) if map.contains_key(last) => {
                map.insert(last.clone(), fresh);
            }
            _ => return self.clone(),
        }
        let copy = FeatureStructure { nodes, root: self.root };
        copy.fresh_variant()
    }

    /// The complex structure holding only the listed top-level features.
    pub fn project(&self, features: &[&str]) -> FeatureStructure {
        let mut ws = Workspace::new();
        let base = ws.import(self);
        let out = ws.complex();
        for f in features {
            if let Some(child) = ws.child(base, f) {
                ws.add_feature(out, f, child);
            }
        }
        ws.export(out).expect("projection of an acyclic structure")
    }

    /// True iff `self` is at least as general as `specific`: every path and
    /// atom of `self` is present in `specific` and every coreference holds.
    pub fn subsumes(&self, specific: &FeatureStructure) -> bool {
        let mut map: HashMap<NodeId, NodeId> = HashMap::new();
        subsumes_node(self, self.root, specific, specific.root, &mut map)
    }

    /// Canonical text: features sorted, variables and shared nodes tagged
    /// `?N` in order of first occurrence. Equal strings mean equal
    /// structures up to variable renaming.
    pub fn canonical(&self) -> String {
        let mut printer = Printer::new(self);
        printer.top(self.root)
    }

    /// Parse the canonical text form, e.g. `(cat n) (agr ?a) (subj (agr ?a))`.
    pub fn parse(text: &str) -> Result<FeatureStructure, BuildError> {
        let items = sexpr::read_all(text).map_err(|e| BuildError { line: e.line, message: e.message })?;
        let mut b = FsBuilder::new();
        let root = b.top(&items, 1)?;
        b.finish(root)
    }
}

impl PartialEq for FeatureStructure {
    fn eq(&self, other: &Self) -> bool {
        self.canonical() == other.canonical()
    }
}

impl Eq for FeatureStructure {}

impl fmt::Display for FeatureStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

impl FromStr for FeatureStructure {
    type Err = BuildError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FeatureStructure::parse(s)
    }
}

fn subsumes_node(
    g: &FeatureStructure,
    gn: NodeId,
    s: &FeatureStructure,
    sn: NodeId,
    map: &mut HashMap<NodeId, NodeId>,
) -> bool {
    if let Some(&prev) = map.get(&gn) {
        return prev == sn;
    }
    map.insert(gn, sn);
    match (&g.nodes[gn], &s.nodes[sn]) {
        (Node::Var, _) => true,
        (Node::Atom(a), Node::Atom(b)) => a == b,
        (Node::Complex(gm), Node::Complex(sm)) => gm.iter().all(|(feat, &gc)| match sm.get(feat) {
            Some(&sc) => subsumes_node(g, gc, s, sc, map),
            None => false,
        }),
        _ => false,
    }
}

#[derive(Clone, Debug)]
struct Cell {
    forward: Option<NodeId>,
    node: Node,
}

/// Union-find arena for destructive unification.
#[derive(Clone, Debug, Default)]
pub struct Workspace {
    cells: Vec<Cell>,
}

impl Workspace {
    pub fn new() -> Self {
        Workspace { cells: Vec::new() }
    }

    fn push(&mut self, node: Node) -> NodeId {
        self.cells.push(Cell { forward: None, node });
        self.cells.len() - 1
    }

    pub fn var(&mut self) -> NodeId {
        self.push(Node::Var)
    }

    pub fn atom(&mut self, value: impl Into<String>) -> NodeId {
        self.push(Node::Atom(value.into()))
    }

    pub fn complex(&mut self) -> NodeId {
        self.push(Node::Complex(BTreeMap::new()))
    }

    /// Copy `fs` into the arena; returns the id of its root. Node `k` of
    /// `fs` lands at `returned - fs.root() + k`.
    pub fn import(&mut self, fs: &FeatureStructure) -> NodeId {
        let base = self.cells.len();
        for node in &fs.nodes {
            let node = match node {
                Node::Complex(map) => Node::Complex(map.iter().map(|(k, &v)| (k.clone(), v + base)).collect()),
                other => other.clone(),
            };
            self.push(node);
        }
        base + fs.root
    }

    pub fn find(&self, mut n: NodeId) -> NodeId {
        while let Some(next) = self.cells[n].forward {
            n = next;
        }
        n
    }

    pub fn node(&self, n: NodeId) -> &Node {
        &self.cells[self.find(n)].node
    }

    pub fn atom_value(&self, n: NodeId) -> Option<&str> {
        match self.node(n) {
            Node::Atom(a) => Some(a),
            _ => None,
        }
    }

    pub fn child(&self, n: NodeId, feature: &str) -> Option<NodeId> {
        match self.node(n) {
            Node::Complex(map) => map.get(feature).copied(),
            _ => None,
        }
    }

    pub fn resolve(&self, n: NodeId, path: &Path) -> Option<NodeId> {
        let mut cur = n;
        for feat in path.features() {
            cur = self.child(cur, feat)?;
        }
        Some(self.find(cur))
    }

    /// Walk `path` from `n`, turning unbound variables into complex nodes and
    /// adding missing features as fresh variables.
    pub fn ensure_path(&mut self, n: NodeId, path: &Path) -> Result<NodeId, UnifyError> {
        let mut cur = self.find(n);
        for (depth, feat) in path.features().iter().enumerate() {
            if matches!(self.cells[cur].node, Node::Var) {
                self.cells[cur].node = Node::Complex(BTreeMap::new());
            }
            let existing = match &self.cells[cur].node {
                Node::Complex(map) => map.get(feat).copied(),
                _ => return Err(UnifyError::KindClash { path: Path(path.0[..depth].to_vec()) }),
            };
            cur = match existing {
                Some(c) => self.find(c),
                None => {
                    let v = self.var();
                    if let Node::Complex(map) = &mut self.cells[cur].node {
                        map.insert(feat.clone(), v);
                    }
                    v
                }
            };
        }
        Ok(cur)
    }

    /// Add a feature edge to a complex (or unbound) node. Returns `false` when
    /// the feature is already present.
    pub fn add_feature(&mut self, n: NodeId, feature: &str, child: NodeId) -> bool {
        let n = self.find(n);
        if matches!(self.cells[n].node, Node::Var) {
            self.cells[n].node = Node::Complex(BTreeMap::new());
        }
        match &mut self.cells[n].node {
            Node::Complex(map) if !map.contains_key(feature) => {
                map.insert(feature.to_string(), child);
                true
            }
            _ => false,
        }
    }

    pub fn unify(&mut self, a: NodeId, b: NodeId) -> Result<(), UnifyError> {
        let mut path = Vec::new();
        self.unify_inner(a, b, &mut path)
    }

    /// Unify the node at `path` below `n` with the atom `value`.
    pub fn unify_atom_at(&mut self, n: NodeId, path: &Path, value: &str) -> Result<(), UnifyError> {
        let at = self.ensure_path(n, path)?;
        let atom = self.atom(value);
        self.unify(at, atom).map_err(|e| prefix_error(path, e))
    }

    fn unify_inner(&mut self, a: NodeId, b: NodeId, path: &mut Vec<String>) -> Result<(), UnifyError> {
        let a = self.find(a);
        let b = self.find(b);
        if a == b {
            return Ok(());
        }
        match (&self.cells[a].node, &self.cells[b].node) {
            (Node::Var, _) => {
                self.cells[a].forward = Some(b);
                Ok(())
            }
            (_, Node::Var) => {
                self.cells[b].forward = Some(a);
                Ok(())
            }
            (Node::Atom(x), Node::Atom(y)) => {
                if x == y {
                    self.cells[a].forward = Some(b);
                    Ok(())
                } else {
                    Err(UnifyError::AtomClash { path: Path(path.clone()), left: x.clone(), right: y.clone() })
                }
            }
            (Node::Complex(_), Node::Complex(_)) => {
                let Node::Complex(left) = std::mem::replace(&mut self.cells[a].node, Node::Var) else {
                    unreachable!()
                };
                self.cells[a].forward = Some(b);
                for (feat, child) in left {
                    let rep = self.find(b);
                    let existing = match &self.cells[rep].node {
                        Node::Complex(map) => map.get(&feat).copied(),
                        _ => return Err(UnifyError::Cycle { path: Path(path.clone()) }),
                    };
                    match existing {
                        Some(other) => {
                            path.push(feat);
                            self.unify_inner(child, other, path)?;
                            path.pop();
                        }
                        None => {
                            if let Node::Complex(map) = &mut self.cells[rep].node {
                                map.insert(feat, child);
                            }
                        }
                    }
                }
                Ok(())
            }
            _ => Err(UnifyError::KindClash { path: Path(path.clone()) }),
        }
    }

    /// Fails if a cycle is reachable from `root`.
    pub fn check_acyclic(&self, root: NodeId) -> Result<(), UnifyError> {
        let mut state: HashMap<NodeId, bool> = HashMap::new();
        let mut path = Vec::new();
        self.acyclic_inner(self.find(root), &mut state, &mut path)
    }

    fn acyclic_inner(
        &self,
        n: NodeId,
        state: &mut HashMap<NodeId, bool>,
        path: &mut Vec<String>,
    ) -> Result<(), UnifyError> {
        match state.get(&n) {
            Some(true) => return Ok(()),
            Some(false) => return Err(UnifyError::Cycle { path: Path(path.clone()) }),
            None => {}
        }
        state.insert(n, false);
        if let Node::Complex(map) = &self.cells[n].node {
            for (feat, &child) in map {
                path.push(feat.clone());
                self.acyclic_inner(self.find(child), state, path)?;
                path.pop();
            }
        }
        state.insert(n, true);
        Ok(())
    }

    /// Compact the structure reachable from `root` into a [`FeatureStructure`].
    pub fn export(&self, root: NodeId) -> Result<FeatureStructure, UnifyError> {
        self.check_acyclic(root)?;
        let mut ids: HashMap<NodeId, NodeId> = HashMap::new();
        let mut nodes = Vec::new();
        self.export_inner(self.find(root), &mut ids, &mut nodes);
        Ok(FeatureStructure { nodes, root: 0 })
    }

    fn export_inner(&self, n: NodeId, ids: &mut HashMap<NodeId, NodeId>, nodes: &mut Vec<Node>) -> NodeId {
        if let Some(&id) = ids.get(&n) {
            return id;
        }
        let id = nodes.len();
        ids.insert(n, id);
        nodes.push(Node::Var);
        let node = match &self.cells[n].node {
            Node::Complex(map) => {
                let mut out = BTreeMap::new();
                for (feat, &child) in map {
                    out.insert(feat.clone(), self.export_inner(self.find(child), ids, nodes));
                }
                Node::Complex(out)
            }
            other => other.clone(),
        };
        nodes[id] = node;
        id
    }
}

fn prefix_error(prefix: &Path, e: UnifyError) -> UnifyError {
    let join = |p: &Path| Path(prefix.0.iter().chain(p.0.iter()).cloned().collect());
    match e {
        UnifyError::AtomClash { path, left, right } => UnifyError::AtomClash { path: join(&path), left, right },
        UnifyError::KindClash { path } => UnifyError::KindClash { path: join(&path) },
        UnifyError::Cycle { path } => UnifyError::Cycle { path: join(&path) },
    }
}

/// Canonical printer; tags are shared across every call on one printer so
/// several slots of a frame can be printed with consistent coreference.
pub struct Printer<'a> {
    fs: &'a FeatureStructure,
    shared: HashSet<NodeId>,
    tags: HashMap<NodeId, usize>,
}

impl<'a> Printer<'a> {
    pub fn new(fs: &'a FeatureStructure) -> Self {
        let mut indegree: HashMap<NodeId, usize> = HashMap::new();
        let mut seen = HashSet::new();
        let mut stack = vec![fs.root];
        while let Some(n) = stack.pop() {
            if !seen.insert(n) {
                continue;
            }
            if let Node::Complex(map) = &fs.nodes[n] {
                for &c in map.values() {
                    *indegree.entry(c).or_default() += 1;
                    stack.push(c);
                }
            }
        }
        let shared = indegree.into_iter().filter(|&(_, d)| d > 1).map(|(n, _)| n).collect();
        Printer { fs, shared, tags: HashMap::new() }
    }

    /// Print node `n` in top-level position (a sequence of groups).
    pub fn top(&mut self, n: NodeId) -> String {
        let first = !self.tags.contains_key(&n);
        let mut out = String::new();
        if let Some(tag) = self.tag(n) {
            out.push_str(&tag);
            if !first || matches!(self.fs.nodes[n], Node::Var) {
                return out;
            }
            out.push(' ');
        }
        match &self.fs.nodes[n] {
            Node::Var => unreachable!("variables are always tagged"),
            Node::Atom(a) => out.push_str(&atom_text(a)),
            Node::Complex(map) if map.is_empty() => out.push_str("()"),
            Node::Complex(map) => {
                let groups: Vec<String> = map.iter().map(|(f, &c)| format!("({}{})", f, self.value(c))).collect();
                out.push_str(&groups.join(" "));
            }
        }
        out
    }

    /// Tag text for a variable or shared node; marks first occurrences.
    fn tag(&mut self, n: NodeId) -> Option<String> {
        if !(matches!(self.fs.nodes[n], Node::Var) || self.shared.contains(&n)) {
            return None;
        }
        let next = self.tags.len() + 1;
        let id = *self.tags.entry(n).or_insert(next);
        Some(format!("?{}", id))
    }

    /// Print a feature value, including the leading space.
    fn value(&mut self, n: NodeId) -> String {
        let first = !self.tags.contains_key(&n);
        let mut out = String::new();
        if let Some(tag) = self.tag(n) {
            out.push(' ');
            out.push_str(&tag);
            if !first || matches!(self.fs.nodes[n], Node::Var) {
                return out;
            }
        }
        match &self.fs.nodes[n] {
            Node::Var => unreachable!(),
            Node::Atom(a) => {
                out.push(' ');
                out.push_str(&atom_text(a));
            }
            Node::Complex(map) if map.is_empty() => out.push_str(" ()"),
            Node::Complex(map) => {
                for (f, &c) in map {
                    let v = self.value(c);
                    out.push_str(&format!(" ({}{})", f, v));
                }
            }
        }
        out
    }
}

fn atom_text(a: &str) -> String {
    if sexpr::is_bare_symbol(a) {
        a.to_string()
    } else {
        sexpr::quote(a)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct BuildError {
    pub line: usize,
    pub message: String,
}

/// Builds feature structures from s-expression groups. Variables are scoped
/// to one builder, so everything built by one builder may share them.
#[derive(Default)]
pub struct FsBuilder {
    ws: Workspace,
    vars: HashMap<String, NodeId>,
}

impl FsBuilder {
    pub fn new() -> Self {
        FsBuilder::default()
    }

    pub fn workspace(&mut self) -> &mut Workspace {
        &mut self.ws
    }

    /// New complex node to hang slots from.
    pub fn frame(&mut self) -> NodeId {
        self.ws.complex()
    }

    pub fn attach(&mut self, frame: NodeId, slot: &str, node: NodeId) {
        self.ws.add_feature(frame, slot, node);
    }

    fn variable(&mut self, name: &str) -> NodeId {
        if let Some(&n) = self.vars.get(name) {
            return n;
        }
        let n = self.ws.var();
        self.vars.insert(name.to_string(), n);
        n
    }

    /// Top-level groups with an optional leading `?tag`. `()` alone is `{}`.
    pub fn top(&mut self, items: &[Sexp], line: usize) -> Result<NodeId, BuildError> {
        let (tag, rest) = match items.first().and_then(Sexp::as_sym) {
            Some(s) if s.starts_with('?') => (Some(self.variable(s)), &items[1..]),
            _ => (None, items),
        };
        let node = if rest.is_empty() && tag.is_some() {
            tag.unwrap()
        } else if let [single @ (Sexp::Sym { .. } | Sexp::Str { .. })] = rest {
            let atom = self.value(std::slice::from_ref(single), line)?;
            match tag {
                Some(t) => {
                    self.ws.unify(t, atom).map_err(|e| BuildError { line, message: e.to_string() })?;
                    t
                }
                None => atom,
            }
        } else {
            let value = self.groups(rest, line)?;
            match tag {
                Some(t) => {
                    self.ws.unify(t, value).map_err(|e| BuildError { line, message: e.to_string() })?;
                    t
                }
                None => value,
            }
        };
        Ok(node)
    }

    /// A complex node from a run of `(feature value...)` groups.
    pub fn groups(&mut self, items: &[Sexp], line: usize) -> Result<NodeId, BuildError> {
        let node = self.ws.complex();
        if let [Sexp::List { items: inner, .. }] = items {
            if inner.is_empty() {
                return Ok(node);
            }
        }
        for item in items {
            let Sexp::List { items: group, line: gline } = item else {
                return Err(BuildError { line: item.line(), message: format!("expected (feature value), found {}", item) });
            };
            let Some(feat) = group.first().and_then(Sexp::as_sym) else {
                return Err(BuildError { line: *gline, message: format!("group without feature name: {}", item) });
            };
            if feat.starts_with('?') || feat.starts_with(':') || feat.chars().any(|c| c.is_uppercase()) {
                return Err(BuildError { line: *gline, message: format!("bad feature name '{}'", feat) });
            }
            let value = self.value(&group[1..], *gline)?;
            if !self.ws.add_feature(node, feat, value) {
                return Err(BuildError { line: *gline, message: format!("duplicate feature '{}'", feat) });
            }
        }
        let _ = line;
        Ok(node)
    }

    fn value(&mut self, rest: &[Sexp], line: usize) -> Result<NodeId, BuildError> {
        match rest {
            [] => Ok(self.ws.complex()),
            [Sexp::Sym { text, .. }] if text.starts_with('?') => Ok(self.variable(text)),
            [Sexp::Sym { text, .. }, more @ ..] if text.starts_with('?') => {
                let tag = self.variable(text);
                let value = self.value(more, line)?;
                self.ws.unify(tag, value).map_err(|e| BuildError { line, message: e.to_string() })?;
                Ok(tag)
            }
            [Sexp::Sym { text, .. }] | [Sexp::Str { text, .. }] => {
                if text.starts_with(':') {
                    return Err(BuildError { line, message: format!("unexpected keyword {}", text) });
                }
                Ok(self.ws.atom(text.clone()))
            }
            items if items.iter().all(|i| matches!(i, Sexp::List { .. })) => self.groups(items, line),
            other => Err(BuildError {
                line,
                message: format!(
                    "malformed value: {}",
                    other.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ")
                ),
            }),
        }
    }

    pub fn finish(&self, root: NodeId) -> Result<FeatureStructure, BuildError> {
        self.ws.export(root).map_err(|e| BuildError { line: 0, message: e.to_string() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fs(text: &str) -> FeatureStructure {
        text.parse().unwrap()
    }

    #[test]
    fn disjoint_features_merge() {
        assert_eq!(fs("(cat n)").unify(&fs("(num pl)")).unwrap(), fs("(cat n) (num pl)"));
    }

    #[test]
    fn atomic_clash_reports_path() {
        let err = fs("(cat n)").unify(&fs("(cat v)")).unwrap_err();
        assert_eq!(err.path(), &Path::parse("cat"));
        let err = fs("(sem (index i1))").unify(&fs("(sem (index (a b)))")).unwrap_err();
        assert_eq!(err, UnifyError::KindClash { path: Path::parse("sem.index") });
    }

    #[test]
    fn coreference_propagates() {
        let u = fs("(agr ?x) (subj (agr ?x))").unify(&fs("(subj (agr (num sg)))")).unwrap();
        assert_eq!(u.canonical(), "(agr ?1 (num sg)) (subj (agr ?1))");
        assert_eq!(u.node_at(&"agr".into()), u.node_at(&"subj.agr".into()));
    }

    #[test]
    fn clash_path_is_first_in_sorted_order() {
        let err = fs("(a x) (b x)").unify(&fs("(b y) (a y)")).unwrap_err();
        assert_eq!(err.path(), &Path::parse("a"));
    }

    #[test]
    fn subsumption_examples() {
        assert!(FeatureStructure::empty().subsumes(&fs("(cat n)")));
        assert!(!fs("(cat n)").subsumes(&FeatureStructure::empty()));
        let a = fs("(cat n)");
        let b = fs("(num pl)");
        let u = a.unify(&b).unwrap();
        assert!(a.subsumes(&u));
        assert!(!u.subsumes(&a));
        // coreference in the general structure must hold in the specific one
        assert!(!fs("(a ?x) (b ?x)").subsumes(&fs("(a z) (b z)")));
        assert!(fs("(a z) (b z)").subsumes(&fs("(a ?x z) (b ?x)")));
    }

    #[test]
    fn resolve_examples() {
        assert_eq!(fs("(sem (index i1))").resolve(&"sem.index".into()).unwrap().as_atom(), Some("i1"));
        assert!(fs("(cat n)").resolve(&"sem".into()).is_none());
        let u = fs("(subj ?x)").unify(&fs("(subj (agr (per 3)))")).unwrap();
        assert_eq!(u.atom_at("subj.agr.per"), Some("3"));
    }

    #[test]
    fn fresh_variant_keeps_sharing() {
        let e = fs("(x ?a) (y ?a)");
        let v = e.fresh_variant();
        assert_eq!(v.canonical(), "(x ?1) (y ?1)");
        assert_eq!(fs("(cat n)").fresh_variant(), fs("(cat n)"));
        assert!(e.unify(&v).is_ok());
    }

    #[test]
    fn occurs_check_rejects_cycles() {
        let err = fs("(u ?a) (v (h ?a))").unify(&fs("(u ?b) (v ?b)")).unwrap_err();
        assert!(matches!(err, UnifyError::Cycle { .. }));
        assert!(FeatureStructure::parse("(a ?x (b ?x))").is_err());
    }

    #[test]
    fn canonical_text_round_trips() {
        for text in [
            "(cat n) (lemma dog) (sem (index ?1))",
            "(a ?1 (b c)) (d ?1)",
            "(x ())",
            "()",
            "?1",
            "sg",
            "(form \"two words\")",
        ] {
            let parsed = fs(text);
            assert_eq!(parsed.canonical(), text);
        }
        assert_eq!(fs("(x)").canonical(), "(x ())");
    }

    #[test]
    fn builder_rejects_duplicates_and_bad_names() {
        assert!(FeatureStructure::parse("(cat n) (cat v)").is_err());
        assert!(FeatureStructure::parse("(Cat n)").is_err());
        assert!(FeatureStructure::parse("(cat n v)").is_err());
    }

    #[test]
    fn unify_at_creates_path() {
        let out = fs("(cat v)").unify_at(&"sem.index".into(), &FeatureStructure::atom("i3")).unwrap();
        assert_eq!(out.canonical(), "(cat v) (sem (index i3))");
        assert!(fs("(sem x)").unify_at(&"sem.index".into(), &FeatureStructure::atom("i3")).is_err());
    }
}
