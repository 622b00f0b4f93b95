//! Bottom-up chart over word positions, generalised to rules of up to four
//! daughters. Every distinct derivation is kept as its own edge.

use std::collections::HashMap;

use crate::formats::Grammar;
use crate::fs::{FeatureStructure, NodeId, Workspace};

pub type EdgeId = usize;

/// One lexical reading of a word position.
#[derive(Clone, Debug)]
pub struct Reading {
    pub sign: FeatureStructure,
    /// Lexicon entry number, `None` for passthrough signs.
    pub entry: Option<usize>,
    pub passthrough: bool,
    pub proper: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Origin {
    Lexical { reading: usize },
    Rule(usize),
}

#[derive(Clone, Debug)]
pub struct Edge {
    pub start: usize,
    pub end: usize,
    pub sign: FeatureStructure,
    pub origin: Origin,
    pub children: Vec<EdgeId>,
    /// Number of edges in the derivation, this one included.
    pub size: usize,
    /// Derivation written out, e.g. `np-det-n(0:1 1:0)`.
    pub trace: String,
    pub cat: Option<String>,
    key: String,
}

impl Edge {
    pub fn is_lexical(&self) -> bool {
        matches!(self.origin, Origin::Lexical { .. })
    }

    pub fn canonical(&self) -> &str {
        &self.key
    }
}

#[derive(Clone, Debug, Default)]
pub struct Chart {
    pub edges: Vec<Edge>,
    pub readings: Vec<Vec<Reading>>,
    spans: HashMap<(usize, usize), Vec<EdgeId>>,
}

impl Chart {
    pub fn len(&self) -> usize {
        self.readings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.readings.is_empty()
    }

    pub fn span(&self, start: usize, end: usize) -> &[EdgeId] {
        self.spans.get(&(start, end)).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn rule_name<'g>(&self, g: &'g Grammar, id: EdgeId) -> &'g str {
        match self.edges[id].origin {
            Origin::Lexical { .. } => "lexical",
            Origin::Rule(r) => &g.rules[r].name,
        }
    }

    /// `EDGE <start>-<end> <rulename> <canonical-fs>` for every edge.
    pub fn trace_lines(&self, g: &Grammar) -> Vec<String> {
        (0..self.edges.len())
            .map(|id| {
                let e = &self.edges[id];
                format!("EDGE {}-{} {} {}", e.start, e.end, self.rule_name(g, id), e.key)
            })
            .collect()
    }

    fn push(&mut self, edge: Edge) -> EdgeId {
        let id = self.edges.len();
        self.spans.entry((edge.start, edge.end)).or_default().push(id);
        self.edges.push(edge);
        id
    }

    /// Rebuild a derivation in one workspace so that information flowing
    /// down from higher rules reaches the lexical signs. Returns the
    /// instantiated lexical sign for each word position the edge covers.
    pub fn instantiate_leaves(&self, g: &Grammar, id: EdgeId) -> Vec<(usize, FeatureStructure)> {
        let mut ws = Workspace::new();
        let mut leaves = Vec::new();
        if self.build(g, id, &mut ws, &mut leaves).is_some() {
            let out: Option<Vec<_>> = leaves.iter().map(|&(p, n)| ws.export(n).ok().map(|fs| (p, fs))).collect();
            if let Some(out) = out {
                return out;
            }
        }
        self.leaf_edges(id).into_iter().map(|e| (self.edges[e].start, self.edges[e].sign.clone())).collect()
    }

    pub fn leaf_edges(&self, id: EdgeId) -> Vec<EdgeId> {
        let e = &self.edges[id];
        if e.is_lexical() {
            return vec![id];
        }
        e.children.iter().flat_map(|&c| self.leaf_edges(c)).collect()
    }

    fn build(&self, g: &Grammar, id: EdgeId, ws: &mut Workspace, leaves: &mut Vec<(usize, NodeId)>) -> Option<NodeId> {
        let e = &self.edges[id];
        match e.origin {
            Origin::Lexical { .. } => {
                let n = ws.import(&e.sign);
                leaves.push((e.start, n));
                Some(n)
            }
            Origin::Rule(r) => {
                let mut kids = Vec::with_capacity(e.children.len());
                for &c in &e.children {
                    kids.push(self.build(g, c, ws, leaves)?);
                }
                let (_, mother, _) = g.rules[r].apply_in(ws, &kids)?;
                Some(mother)
            }
        }
    }
}

/// Run the chart over per-position readings. `barriers` lists positions `b`
/// such that no edge may contain both `b - 1` and `b`.
pub fn parse_readings(readings: Vec<Vec<Reading>>, barriers: &[usize], g: &Grammar) -> Chart {
    let n = readings.len();
    let mut chart = Chart { edges: Vec::new(), readings, spans: HashMap::new() };
    for len in 1..=n {
        for start in 0..=n - len {
            let end = start + len;
            if barriers.iter().any(|&b| b > start && b < end) {
                continue;
            }
            if len == 1 {
                for r in 0..chart.readings[start].len() {
                    let reading = &chart.readings[start][r];
                    let cat = reading.sign.atom_at("cat").map(str::to_string);
                    let key = reading.sign.canonical();
                    let trace = format!("{}:{}", start, r);
                    let sign = reading.sign.clone();
                    let edge = Edge {
                        start,
                        end,
                        sign,
                        origin: Origin::Lexical { reading: r },
                        children: Vec::new(),
                        size: 1,
                        trace,
                        cat,
                        key,
                    };
                    chart.push(edge);
                }
            } else {
                for (ri, rule) in g.rules.iter().enumerate() {
                    let k = rule.arity();
                    if k < 2 || k > len {
                        continue;
                    }
                    for parts in compositions(start, end, k) {
                        let options: Vec<Vec<EdgeId>> = parts
                            .iter()
                            .enumerate()
                            .map(|(i, &(s, e))| {
                                chart
                                    .span(s, e)
                                    .iter()
                                    .copied()
                                    .filter(|&id| cat_ok(rule.daughter_cat(i), &chart.edges[id]))
                                    .collect()
                            })
                            .collect();
                        for combo in product(&options) {
                            try_rule(&mut chart, g, ri, &combo, start, end);
                        }
                    }
                }
            }
            unary_closure(&mut chart, g, start, end);
        }
    }
    chart
}

fn cat_ok(want: Option<&str>, e: &Edge) -> bool {
    match want {
        Some(c) => e.cat.as_deref() == Some(c),
        None => true,
    }
}

fn try_rule(chart: &mut Chart, g: &Grammar, ri: usize, kids: &[EdgeId], start: usize, end: usize) -> Option<EdgeId> {
    let rule = &g.rules[ri];
    let signs: Vec<&FeatureStructure> = kids.iter().map(|&k| &chart.edges[k].sign).collect();
    let app = rule.apply(&signs)?;
    let key = app.mother.canonical();
    if kids.len() == 1 && unary_cycle(chart, kids[0], &key) {
        return None;
    }
    let size = 1 + kids.iter().map(|&k| chart.edges[k].size).sum::<usize>();
    let trace = format!(
        "{}({})",
        rule.name,
        kids.iter().map(|&k| chart.edges[k].trace.as_str()).collect::<Vec<_>>().join(" ")
    );
    let cat = app.mother.atom_at("cat").map(str::to_string);
    Some(chart.push(Edge { start, end, sign: app.mother, origin: Origin::Rule(ri), children: kids.to_vec(), size, trace, cat, key }))
}

/// True if the unary chain below `id` already produced a sign equal to `key`.
fn unary_cycle(chart: &Chart, mut id: EdgeId, key: &str) -> bool {
    loop {
        let e = &chart.edges[id];
        if e.key == key {
            return true;
        }
        if e.children.len() != 1 {
            return false;
        }
        id = e.children[0];
    }
}

fn unary_closure(chart: &mut Chart, g: &Grammar, start: usize, end: usize) {
    let mut queue: Vec<EdgeId> = chart.span(start, end).to_vec();
    let mut i = 0;
    while i < queue.len() {
        let id = queue[i];
        i += 1;
        for (ri, rule) in g.rules.iter().enumerate() {
            if rule.arity() != 1 || !cat_ok(rule.daughter_cat(0), &chart.edges[id]) {
                continue;
            }
            if let Some(new) = try_rule(chart, g, ri, &[id], start, end) {
                queue.push(new);
            }
        }
    }
}

/// Every way to cut `[start, end)` into `k` non-empty contiguous spans.
pub fn compositions(start: usize, end: usize, k: usize) -> Vec<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(s: usize, end: usize, k: usize, cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        if k == 1 {
            if s < end {
                cur.push((s, end));
                out.push(cur.clone());
                cur.pop();
            }
            return;
        }
        for mid in s + 1..end {
            if end - mid < k - 1 {
                break;
            }
            cur.push((s, mid));
            rec(mid, end, k - 1, cur, out);
            cur.pop();
        }
    }
    rec(start, end, k, &mut cur, &mut out);
    out
}

pub fn product(options: &[Vec<EdgeId>]) -> Vec<Vec<EdgeId>> {
    let mut out = vec![Vec::new()];
    for opts in options {
        let mut next = Vec::with_capacity(out.len() * opts.len());
        for prefix in &out {
            for &o in opts {
                let mut p = prefix.clone();
                p.push(o);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compositions_enumerate_cuts() {
        assert_eq!(compositions(0, 3, 2), vec![vec![(0, 1), (1, 3)], vec![(0, 2), (2, 3)]]);
        assert_eq!(compositions(0, 4, 4).len(), 1);
        assert!(compositions(0, 2, 3).is_empty());
        assert_eq!(compositions(1, 6, 3).len(), 6);
    }

    #[test]
    fn product_is_cartesian() {
        assert_eq!(product(&[vec![1, 2], vec![3]]), vec![vec![1, 3], vec![2, 3]]);
        assert!(product(&[vec![1], vec![]]).is_empty());
    }
}
