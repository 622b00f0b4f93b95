use std::collections::BTreeSet;
use std::fmt;

use super::{segment, segments, Diagnostic, Diagnostics};
use crate::fs::{FeatureStructure, FsBuilder, NodeId, Path, Printer, Workspace};
use crate::sexpr::{self, Sexp};

pub const MAX_DAUGHTERS: usize = 4;

/// Built-in goal registry. Goals hold language-specific constraints that are
/// kept out of the rule bodies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GoalKind {
    /// `agree(p1, p2)`: unify two daughter paths.
    Agree,
    /// `require(p, atom)`: the path must unify with the atom.
    Require,
    /// `prohibit(p, atom)`: the path must not hold the atom.
    Prohibit,
}

impl GoalKind {
    pub fn from_name(name: &str) -> Option<GoalKind> {
        match name {
            "agree" => Some(GoalKind::Agree),
            "require" => Some(GoalKind::Require),
            "prohibit" => Some(GoalKind::Prohibit),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GoalKind::Agree => "agree",
            GoalKind::Require => "require",
            GoalKind::Prohibit => "prohibit",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GoalArg {
    /// `2.agr.num`: a path below daughter 2.
    Path { daughter: usize, path: Path },
    Const(String),
}

impl fmt::Display for GoalArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GoalArg::Path { daughter, path } if path.is_root() => write!(f, "{}", daughter),
            GoalArg::Path { daughter, path } => write!(f, "{}.{}", daughter, path.0.join(".")),
            GoalArg::Const(c) if sexpr::is_bare_symbol(c) && parse_path_arg(c).is_none() => f.write_str(c),
            GoalArg::Const(c) => f.write_str(&sexpr::quote(c)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoalCall {
    pub kind: GoalKind,
    pub args: [GoalArg; 2],
}

impl fmt::Display for GoalCall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {} {})", self.kind.name(), self.args[0], self.args[1])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Source,
    Target,
}

/// A phrase-structure rule. Mother and daughters live in one frame
/// (`mother`, `d0`..`d3`) so variables are shared across them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrammarRule {
    pub name: String,
    frame: FeatureStructure,
    arity: usize,
    pub goals: Vec<GoalCall>,
    cats: Vec<Option<String>>,
    mother_cat: Option<String>,
}

/// Result of a successful rule application.
#[derive(Clone, Debug)]
pub struct Application {
    pub mother: FeatureStructure,
    pub goal_checks: usize,
}

fn slot(i: usize) -> String {
    format!("d{}", i)
}

impl GrammarRule {
    pub fn new(name: impl Into<String>, frame: FeatureStructure, arity: usize, goals: Vec<GoalCall>) -> Self {
        let cats = (0..arity).map(|i| frame.atom_at(&format!("d{}.cat", i)).map(str::to_string)).collect();
        let mother_cat = frame.atom_at("mother.cat").map(str::to_string);
        GrammarRule { name: name.into(), frame, arity, goals, cats, mother_cat }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn frame(&self) -> &FeatureStructure {
        &self.frame
    }

    pub fn mother(&self) -> FeatureStructure {
        self.frame.resolve(&"mother".into()).expect("rule has a mother")
    }

    pub fn daughter(&self, i: usize) -> FeatureStructure {
        self.frame.resolve(&Path(vec![slot(i)])).expect("daughter in range")
    }

    /// Category atom required of daughter `i`, if fixed by the rule.
    pub fn daughter_cat(&self, i: usize) -> Option<&str> {
        self.cats[i].as_deref()
    }

    pub fn mother_cat(&self) -> Option<&str> {
        self.mother_cat.as_deref()
    }

    /// Apply the rule to daughter signs already imported into `ws`. Returns
    /// the frame and mother node ids.
    pub fn apply_in(&self, ws: &mut Workspace, daughters: &[NodeId]) -> Option<(NodeId, NodeId, usize)> {
        debug_assert_eq!(daughters.len(), self.arity);
        let frame = ws.import(&self.frame);
        for (i, &d) in daughters.iter().enumerate() {
            let slot_node = ws.child(frame, &slot(i))?;
            ws.unify(slot_node, d).ok()?;
        }
        let mut checks = 0;
        for goal in &self.goals {
            checks += 1;
            if !eval_goal(ws, frame, goal) {
                return None;
            }
        }
        ws.check_acyclic(frame).ok()?;
        let mother = ws.child(frame, "mother")?;
        Some((frame, mother, checks))
    }

    /// Combine daughter signs into a mother sign.
    pub fn apply(&self, daughters: &[&FeatureStructure]) -> Option<Application> {
        if daughters.len() != self.arity {
            return None;
        }
        let mut ws = Workspace::new();
        let ids: Vec<NodeId> = daughters.iter().map(|d| ws.import(d)).collect();
        let (_, mother, goal_checks) = self.apply_in(&mut ws, &ids)?;
        Some(Application { mother: ws.export(mother).ok()?, goal_checks })
    }
}

fn goal_node(ws: &mut Workspace, frame: NodeId, arg: &GoalArg) -> Option<NodeId> {
    match arg {
        GoalArg::Path { daughter, path } => {
            let d = ws.child(frame, &slot(*daughter))?;
            ws.ensure_path(d, path).ok()
        }
        GoalArg::Const(c) => Some(ws.atom(c.clone())),
    }
}

fn eval_goal(ws: &mut Workspace, frame: NodeId, goal: &GoalCall) -> bool {
    match goal.kind {
        GoalKind::Agree => {
            let (Some(a), Some(b)) = (goal_node(ws, frame, &goal.args[0]), goal_node(ws, frame, &goal.args[1])) else {
                return false;
            };
            ws.unify(a, b).is_ok()
        }
        GoalKind::Require => {
            let GoalArg::Path { daughter, path } = &goal.args[0] else { return false };
            let GoalArg::Const(c) = &goal.args[1] else { return false };
            let Some(d) = ws.child(frame, &slot(*daughter)) else { return false };
            ws.resolve(d, path).and_then(|n| ws.atom_value(n)) == Some(c.as_str())
        }
        GoalKind::Prohibit => {
            let GoalArg::Path { daughter, path } = &goal.args[0] else { return false };
            let GoalArg::Const(c) = &goal.args[1] else { return false };
            let Some(d) = ws.child(frame, &slot(*daughter)) else { return false };
            match ws.resolve(d, path) {
                Some(n) => ws.atom_value(n) != Some(c.as_str()),
                None => true,
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grammar {
    pub rules: Vec<GrammarRule>,
    pub roots: BTreeSet<String>,
    pub direction: Direction,
}

impl Grammar {
    pub fn is_root(&self, cat: &str) -> bool {
        self.roots.contains(cat)
    }

    pub fn rule(&self, name: &str) -> Option<&GrammarRule> {
        self.rules.iter().find(|r| r.name == name)
    }
}

fn parse_path_arg(text: &str) -> Option<(usize, Path)> {
    let (head, rest) = match text.split_once('.') {
        Some((h, r)) => (h, Path::parse(r)),
        None => (text, Path::root()),
    };
    if head.is_empty() || !head.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    Some((head.parse().ok()?, rest))
}

pub fn load_grammar(text: &str) -> Result<Grammar, Diagnostics> {
    let (items, read_errors) = sexpr::read_recovering(text);
    let mut diags: Vec<Diagnostic> = read_errors.into_iter().map(|e| Diagnostic::new(e.line, e.message)).collect();
    let mut rules = Vec::new();
    let mut roots = BTreeSet::new();
    let mut saw_roots = false;
    let mut direction = Direction::Source;
    for item in &items {
        let head = item.as_list().and_then(|l| l.first()).and_then(Sexp::as_sym);
        match head {
            Some("roots") => {
                saw_roots = true;
                for r in &item.as_list().unwrap()[1..] {
                    match r.as_text() {
                        Some(t) => {
                            roots.insert(t.to_string());
                        }
                        None => diags.push(Diagnostic::new(r.line(), "root category must be a symbol")),
                    }
                }
            }
            Some("direction") => match item.as_list().unwrap().get(1).and_then(Sexp::as_sym) {
                Some("source") => direction = Direction::Source,
                Some("target") => direction = Direction::Target,
                _ => diags.push(Diagnostic::new(item.line(), "direction must be source or target")),
            },
            Some("rule") => match parse_rule(item) {
                Ok(r) => {
                    if rules.iter().any(|x: &GrammarRule| x.name == r.name) {
                        diags.push(Diagnostic::new(item.line(), format!("duplicate rule name {}", r.name)));
                    }
                    rules.push(r)
                }
                Err(d) => diags.push(d),
            },
            _ => diags.push(Diagnostic::new(item.line(), format!("expected (roots ...), (direction ...) or (rule ...), found {}", item))),
        }
    }
    diags.sort_by_key(|d| d.line);
    if !saw_roots || roots.is_empty() {
        diags.push(Diagnostic::new(1, "grammar declares no root categories"));
    }
    if diags.is_empty() {
        Ok(Grammar { rules, roots, direction })
    } else {
        Err(Diagnostics(diags))
    }
}

fn parse_rule(item: &Sexp) -> Result<GrammarRule, Diagnostic> {
    let line = item.line();
    let list = item.as_list().unwrap();
    let Some(name) = list.get(1).and_then(Sexp::as_sym).filter(|s| !s.starts_with(':')) else {
        return Err(Diagnostic::new(line, "rule without a name"));
    };
    let err = |l: usize, m: String| Diagnostic::new(l, format!("rule {}: {}", name, m));
    let segs = segments(list, 2)?;
    let mut b = FsBuilder::new();
    let frame = b.frame();
    let Some(mother_items) = segment(&segs, ":mother") else {
        return Err(err(line, "missing :mother".into()));
    };
    let mother = b.top(mother_items, line).map_err(|e| err(e.line, e.message))?;
    b.attach(frame, "mother", mother);
    let daughters = segment(&segs, ":daughters").unwrap_or(&[]);
    if daughters.is_empty() || daughters.len() > MAX_DAUGHTERS {
        return Err(err(line, format!("needs 1..{} daughters, found {}", MAX_DAUGHTERS, daughters.len())));
    }
    for (i, d) in daughters.iter().enumerate() {
        let Some(groups) = d.as_list() else {
            return Err(err(d.line(), format!("daughter {} must be a parenthesised list of groups", i)));
        };
        let node = b.top(groups, d.line()).map_err(|e| err(e.line, e.message))?;
        b.attach(frame, &slot(i), node);
    }
    let mut goals = Vec::new();
    for g in segment(&segs, ":goals").unwrap_or(&[]) {
        goals.push(parse_goal(g, daughters.len()).map_err(|m| err(g.line(), m))?);
    }
    let fs = b.finish(frame).map_err(|e| err(line, e.message))?;
    for i in 0..daughters.len() {
        if fs.node_at(&Path(vec![slot(i), "cat".into()])).is_none() {
            return Err(err(line, format!("daughter {} has no cat", i)));
        }
    }
    if fs.node_at(&"mother.cat".into()).is_none() {
        return Err(err(line, "mother has no cat".into()));
    }
    Ok(GrammarRule::new(name, fs, daughters.len(), goals))
}

fn parse_goal(g: &Sexp, arity: usize) -> Result<GoalCall, String> {
    let Some(items) = g.as_list() else {
        return Err(format!("goal must be a list, found {}", g));
    };
    let Some(name) = items.first().and_then(Sexp::as_sym) else {
        return Err("goal without a name".into());
    };
    let Some(kind) = GoalKind::from_name(name) else {
        return Err(format!("unknown goal '{}'", name));
    };
    if items.len() != 3 {
        return Err(format!("goal {} takes 2 arguments, found {}", name, items.len() - 1));
    }
    let mut args = Vec::new();
    for a in &items[1..] {
        let arg = match a {
            Sexp::Sym { text, .. } => match parse_path_arg(text) {
                Some((daughter, path)) => {
                    if daughter >= arity {
                        return Err(format!("goal {} names daughter {} but the rule has {}", name, daughter, arity));
                    }
                    GoalArg::Path { daughter, path }
                }
                None => GoalArg::Const(text.clone()),
            },
            Sexp::Str { text, .. } => GoalArg::Const(text.clone()),
            Sexp::List { .. } => return Err(format!("bad goal argument {}", a)),
        };
        args.push(arg);
    }
    let [a0, a1]: [GoalArg; 2] = args.try_into().unwrap();
    let ok = match kind {
        GoalKind::Agree => matches!((&a0, &a1), (GoalArg::Path { .. }, GoalArg::Path { .. })),
        GoalKind::Require | GoalKind::Prohibit => matches!((&a0, &a1), (GoalArg::Path { .. }, GoalArg::Const(_))),
    };
    if !ok {
        return Err(format!("wrong argument kinds for goal {}", name));
    }
    Ok(GoalCall { kind, args: [a0, a1] })
}

pub fn serialize_grammar(g: &Grammar) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "(direction {})\n",
        match g.direction {
            Direction::Source => "source",
            Direction::Target => "target",
        }
    ));
    out.push_str(&format!("(roots {})\n", g.roots.iter().cloned().collect::<Vec<_>>().join(" ")));
    for r in &g.rules {
        let fs = &r.frame;
        let mut p = Printer::new(fs);
        let mother = p.top(fs.node_at(&"mother".into()).unwrap());
        let daughters: Vec<String> = (0..r.arity)
            .map(|i| format!("({})", p.top(fs.node_at(&Path(vec![slot(i)])).unwrap())))
            .collect();
        out.push_str(&format!("(rule {} :mother {} :daughters {}", r.name, mother, daughters.join(" ")));
        if !r.goals.is_empty() {
            let goals: Vec<String> = r.goals.iter().map(|g| g.to_string()).collect();
            out.push_str(&format!(" :goals {}", goals.join(" ")));
        }
        out.push_str(")\n");
    }
    out
}
