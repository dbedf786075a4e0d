//! Multigraphs with labeled edges and the text format they are read from.
//!
//! ```text
//! directed
//! s 0
//! t 2
//! edge 0 1 1:0
//! edge 1 2 F
//! ```

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::label::Label;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub label: Label,
}

impl Edge {
    pub fn other(&self, x: usize) -> usize {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    directed: bool,
    num_vertices: usize,
    edges: Vec<Edge>,
    by_label: BTreeMap<Label, usize>,
    source: Option<usize>,
    sink: Option<usize>,
}

impl Graph {
    pub fn new(directed: bool, num_vertices: usize) -> Graph {
        Graph {
            directed,
            num_vertices,
            edges: Vec::new(),
            by_label: BTreeMap::new(),
            source: None,
            sink: None,
        }
    }

    pub fn with_terminals(mut self, source: usize, sink: usize) -> Result<Graph> {
        self.set_terminals(source, sink)?;
        Ok(self)
    }

    pub fn set_terminals(&mut self, source: usize, sink: usize) -> Result<()> {
        if source == sink {
            return Err(Error::InvalidInput("source and sink must differ".into()));
        }
        if source >= self.num_vertices || sink >= self.num_vertices {
            return Err(Error::InvalidInput("terminal out of range".into()));
        }
        self.source = Some(source);
        self.sink = Some(sink);
        Ok(())
    }

    pub fn add_vertex(&mut self) -> usize {
        self.num_vertices += 1;
        self.num_vertices - 1
    }

    pub fn add_edge(&mut self, u: usize, v: usize, label: Label) -> Result<()> {
        if u >= self.num_vertices || v >= self.num_vertices {
            return Err(Error::InvalidInput(format!("edge {label} endpoint out of range")));
        }
        if self.by_label.contains_key(&label) {
            return Err(Error::InvalidInput(format!("duplicate edge label {label}")));
        }
        self.by_label.insert(label, self.edges.len());
        self.edges.push(Edge { u, v, label });
        Ok(())
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, label: &Label) -> Option<&Edge> {
        self.by_label.get(label).map(|&i| &self.edges[i])
    }

    pub fn edge_index(&self, label: &Label) -> Option<usize> {
        self.by_label.get(label).copied()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.edges.iter().map(|e| e.label).collect()
    }

    pub fn source(&self) -> Option<usize> {
        self.source
    }

    pub fn sink(&self) -> Option<usize> {
        self.sink
    }

    pub(crate) fn terminals(&self) -> Result<(usize, usize)> {
        match (self.source, self.sink) {
            (Some(s), Some(t)) => Ok((s, t)),
            _ => Err(Error::InvalidInput("graph needs designated s and t".into())),
        }
    }

    /// Adjacency over the edges selected by `usable`: `(edge index, neighbour)`
    /// pairs, following direction for directed graphs.
    pub(crate) fn adjacency(&self, usable: impl Fn(usize, &Edge) -> bool) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.num_vertices];
        for (i, e) in self.edges.iter().enumerate() {
            if !usable(i, e) {
                continue;
            }
            adj[e.u].push((i, e.v));
            if !self.directed && e.u != e.v {
                adj[e.v].push((i, e.u));
            }
        }
        adj
    }

    /// Vertices reachable from `from` along edges selected by `usable`.
    pub fn reachable(&self, from: usize, usable: impl Fn(usize, &Edge) -> bool) -> Vec<bool> {
        let adj = self.adjacency(usable);
        let mut seen = vec![false; self.num_vertices];
        let mut queue = VecDeque::from([from]);
        seen[from] = true;
        while let Some(x) = queue.pop_front() {
            for &(_, y) in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        seen
    }

    pub fn is_connected(&self) -> bool {
        self.num_vertices == 0 || self.reachable(0, |_, _| true).iter().all(|&r| r)
    }

    /// Two-colouring of an undirected graph, if one exists.
    pub fn bipartition(&self) -> Option<Vec<bool>> {
        let adj = self.adjacency(|_, _| true);
        let mut colour: Vec<Option<bool>> = vec![None; self.num_vertices];
        for start in 0..self.num_vertices {
            if colour[start].is_some() {
                continue;
            }
            colour[start] = Some(false);
            let mut queue = VecDeque::from([start]);
            while let Some(x) = queue.pop_front() {
                let cx = colour[x].unwrap();
                for &(i, y) in &adj[x] {
                    if self.edges[i].u == self.edges[i].v {
                        return None;
                    }
                    match colour[y] {
                        None => {
                            colour[y] = Some(!cx);
                            queue.push_back(y);
                        }
                        Some(cy) if cy == cx => return None,
                        Some(_) => {}
                    }
                }
            }
        }
        Some(colour.into_iter().map(|c| c.unwrap_or(false)).collect())
    }

    pub fn parse(text: &str) -> Result<Graph> {
        let mut directed = None;
        let mut source = None;
        let mut sink = None;
        let mut raw_edges = Vec::new();
        let mut max_vertex = None::<usize>;
        let bump = |m: &mut Option<usize>, x: usize| *m = Some(m.map_or(x, |y| y.max(x)));
        for (lineno, line) in text.lines().enumerate() {
            let line_no = lineno + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: &str| Error::Parse { line: line_no, message: message.to_string() };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if directed.is_none() {
                directed = match fields.as_slice() {
                    ["directed"] => Some(true),
                    ["undirected"] => Some(false),
                    _ => return Err(err("expected header \"directed\" or \"undirected\"")),
                };
                continue;
            }
            let vertex = |s: &str| s.parse::<usize>().map_err(|_| err("bad vertex id"));
            match fields.as_slice() {
                ["s", id] => {
                    let v = vertex(id)?;
                    bump(&mut max_vertex, v);
                    source = Some(v);
                }
                ["t", id] => {
                    let v = vertex(id)?;
                    bump(&mut max_vertex, v);
                    sink = Some(v);
                }
                ["edge", u, v, label] => {
                    let (u, v) = (vertex(u)?, vertex(v)?);
                    let label: Label = label.parse().map_err(|_| err("bad label"))?;
                    bump(&mut max_vertex, u.max(v));
                    raw_edges.push((u, v, label, line_no));
                }
                _ => return Err(err("unrecognised record")),
            }
        }
        let directed = directed.ok_or(Error::Parse { line: 0, message: "empty graph file".into() })?;
        let mut g = Graph::new(directed, max_vertex.map_or(0, |m| m + 1));
        for (u, v, label, line) in raw_edges {
            g.add_edge(u, v, label)
                .map_err(|e| Error::Parse { line, message: e.to_string() })?;
        }
        match (source, sink) {
            (Some(s), Some(t)) => g.set_terminals(s, t)?,
            (None, None) => {}
            _ => return Err(Error::Parse { line: 0, message: "s and t must be given together".into() }),
        }
        Ok(g)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(if self.directed { "directed\n" } else { "undirected\n" });
        if let (Some(s), Some(t)) = (self.source, self.sink) {
            let _ = writeln!(out, "s {s}");
            let _ = writeln!(out, "t {t}");
        }
        for e in &self.edges {
            let _ = writeln!(out, "edge {} {} {}", e.u, e.v, e.label);
        }
        out
    }
}

/// Union-find with path halving and union by size.
#[derive(Clone, Debug)]
pub(crate) struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSets {
    pub(crate) fn new(n: usize) -> Self {
        DisjointSets { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if `a` and `b` were already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        let text = "directed\ns 0\nt 2\nedge 0 1 1:0\nedge 0 1 1:*\nedge 1 2 F\n";
        let g = Graph::parse(text).unwrap();
        assert!(g.directed());
        assert_eq!(g.num_vertices(), 3);
        assert_eq!(g.edges().len(), 3);
        assert_eq!(g.terminals().unwrap(), (0, 2));
        assert_eq!(g.to_text(), text);
        assert_eq!(Graph::parse(&g.to_text()).unwrap(), g);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = Graph::parse("undirected\nedge 0 1 F\nedge 1 2 F\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
        assert!(Graph::parse("sideways\n").is_err());
        assert!(Graph::parse("undirected\ns 0\nedge 0 1 a0\n").is_err());
        assert!(Graph::parse("undirected\nedge 0 1 q\n").is_err());
    }

    #[test]
    fn bipartition_detects_odd_cycles() {
        let mut g = Graph::new(false, 3);
        g.add_edge(0, 1, Label::Anon(0)).unwrap();
        g.add_edge(1, 2, Label::Anon(1)).unwrap();
        assert!(g.bipartition().is_some());
        g.add_edge(2, 0, Label::Anon(2)).unwrap();
        assert!(g.bipartition().is_none());
    }

    #[test]
    fn disjoint_sets() {
        let mut d = DisjointSets::new(4);
        assert!(d.union(0, 1));
        assert!(d.union(2, 3));
        assert!(!d.union(1, 0));
        assert!(d.union(1, 3));
        assert_eq!(d.find(0), d.find(2));
    }
}
