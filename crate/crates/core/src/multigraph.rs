//! Dart-based multigraphs with colors, edge types, loops and free half-edges.
//!
//! Every edge owns two darts; a free half-edge owns one dart that is a fixed
//! point of `theta`. Ids are opaque strings kept for round-tripping the text
//! format.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Color = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EdgeType {
    Halvable,
    Undirected,
    Directed,
}

impl EdgeType {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeType::Halvable => "halvable",
            EdgeType::Undirected => "undirected",
            EdgeType::Directed => "directed",
        }
    }

    pub fn parse(s: &str) -> Option<EdgeType> {
        match s {
            "halvable" => Some(EdgeType::Halvable),
            "undirected" => Some(EdgeType::Undirected),
            "directed" => Some(EdgeType::Directed),
            _ => None,
        }
    }

    pub fn code(self) -> u64 {
        match self {
            EdgeType::Halvable => 0,
            EdgeType::Undirected => 1,
            EdgeType::Directed => 2,
        }
    }
}

/// An edge or a free half-edge. For a half-edge both entries of `darts` are
/// the same dart. For a directed edge `darts[0]` is the tail.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeInfo {
    pub id: String,
    pub color: Color,
    pub etype: EdgeType,
    pub darts: [usize; 2],
}

impl EdgeInfo {
    pub fn is_half(&self) -> bool {
        self.darts[0] == self.darts[1]
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: malformed record: {msg}")]
    MalformedLine { line: usize, msg: String },
    #[error("line {line}: duplicate id {id}")]
    DuplicateId { line: usize, id: String },
    #[error("line {line}: unknown endpoint {id}")]
    DanglingEndpoint { line: usize, id: String },
    #[error("line {line}: bad edge type {value}")]
    BadEdgeType { line: usize, value: String },
}

#[derive(Clone, Debug)]
pub struct Multigraph {
    vertex_ids: Vec<String>,
    vertex_colors: Vec<Color>,
    dart_ids: Vec<String>,
    dart_vertex: Vec<usize>,
    theta: Vec<usize>,
    dart_edge: Vec<usize>,
    edges: Vec<EdgeInfo>,
    incident: Vec<Vec<usize>>,
    rotation: Option<Vec<Vec<usize>>>,
    vindex: HashMap<String, usize>,
    dindex: HashMap<String, usize>,
    eindex: HashMap<String, usize>,
}

impl PartialEq for Multigraph {
    fn eq(&self, other: &Self) -> bool {
        self.vertex_ids == other.vertex_ids
            && self.vertex_colors == other.vertex_colors
            && self.dart_ids == other.dart_ids
            && self.dart_vertex == other.dart_vertex
            && self.theta == other.theta
            && self.edges == other.edges
            && self.rotation == other.rotation
    }
}

impl Eq for Multigraph {}

impl Multigraph {
    /// Assemble a graph from raw parts without any checking. Used to build
    /// deliberately broken graphs for `validate_graph`.
    pub fn from_raw_parts(
        vertex_ids: Vec<String>,
        vertex_colors: Vec<Color>,
        dart_ids: Vec<String>,
        dart_vertex: Vec<usize>,
        theta: Vec<usize>,
        edges: Vec<EdgeInfo>,
    ) -> Multigraph {
        let mut dart_edge = vec![usize::MAX; dart_ids.len()];
        for (i, e) in edges.iter().enumerate() {
            for &d in &e.darts {
                if d < dart_edge.len() {
                    dart_edge[d] = i;
                }
            }
        }
        let mut incident = vec![Vec::new(); vertex_ids.len()];
        for (d, &v) in dart_vertex.iter().enumerate() {
            if v < incident.len() {
                incident[v].push(d);
            }
        }
        let vindex = vertex_ids.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        let dindex = dart_ids.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        let eindex = edges.iter().enumerate().map(|(i, e)| (e.id.clone(), i)).collect();
        Multigraph {
            vertex_ids,
            vertex_colors,
            dart_ids,
            dart_vertex,
            theta,
            dart_edge,
            edges,
            incident,
            rotation: None,
            vindex,
            dindex,
            eindex,
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.vertex_ids.len()
    }

    pub fn num_darts(&self) -> usize {
        self.dart_ids.len()
    }

    /// Number of edge records, counting free half-edges.
    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_halves(&self) -> usize {
        self.edges.iter().filter(|e| e.is_half()).count()
    }

    pub fn num_full_edges(&self) -> usize {
        self.edges.len() - self.num_halves()
    }

    pub fn vertex_id(&self, v: usize) -> &str {
        &self.vertex_ids[v]
    }

    pub fn vertex_ids(&self) -> &[String] {
        &self.vertex_ids
    }

    pub fn vertex_color(&self, v: usize) -> Color {
        self.vertex_colors[v]
    }

    pub fn vertex_colors(&self) -> &[Color] {
        &self.vertex_colors
    }

    pub fn dart_id(&self, d: usize) -> &str {
        &self.dart_ids[d]
    }

    pub fn dart_ids(&self) -> &[String] {
        &self.dart_ids
    }

    pub fn vertex_of(&self, d: usize) -> usize {
        self.dart_vertex[d]
    }

    pub fn theta(&self, d: usize) -> usize {
        self.theta[d]
    }

    pub fn theta_raw(&self) -> &[usize] {
        &self.theta
    }

    pub fn dart_vertex_raw(&self) -> &[usize] {
        &self.dart_vertex
    }

    pub fn edge_of(&self, d: usize) -> usize {
        self.dart_edge[d]
    }

    pub fn edge(&self, e: usize) -> &EdgeInfo {
        &self.edges[e]
    }

    pub fn edges(&self) -> &[EdgeInfo] {
        &self.edges
    }

    /// Darts at `v` in a fixed order (loops contribute both darts).
    pub fn darts_at(&self, v: usize) -> &[usize] {
        &self.incident[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.incident[v].len()
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vindex.get(id).copied()
    }

    pub fn dart_index(&self, id: &str) -> Option<usize> {
        self.dindex.get(id).copied()
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.eindex.get(id).copied()
    }

    pub fn rotation(&self) -> Option<&Vec<Vec<usize>>> {
        self.rotation.as_ref()
    }

    pub fn with_rotation(mut self, rot: Option<Vec<Vec<usize>>>) -> Multigraph {
        self.rotation = rot;
        self
    }

    pub fn is_loop(&self, e: usize) -> bool {
        let ed = &self.edges[e];
        !ed.is_half() && self.dart_vertex[ed.darts[0]] == self.dart_vertex[ed.darts[1]]
    }

    /// Endpoints of an edge (equal for loops and half-edges).
    pub fn endpoints(&self, e: usize) -> (usize, usize) {
        let ed = &self.edges[e];
        (self.dart_vertex[ed.darts[0]], self.dart_vertex[ed.darts[1]])
    }

    /// The vertex at the other end of dart `d` (itself for loops and halves).
    pub fn other_end(&self, d: usize) -> usize {
        self.dart_vertex[self.theta[d]]
    }

    pub fn max_edge_color(&self) -> Color {
        self.edges.iter().map(|e| e.color).max().unwrap_or(0)
    }

    pub fn has_loops_or_halves(&self) -> bool {
        (0..self.edges.len()).any(|e| self.edges[e].is_half() || self.is_loop(e))
    }

    /// Simple neighbor lists ignoring multiplicity, loops and halves.
    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.incident[v]
            .iter()
            .map(|&d| self.other_end(d))
            .filter(|&u| u != v)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn is_connected(&self) -> bool {
        let n = self.num_vertices();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &d in &self.incident[v] {
                let u = self.other_end(d);
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    queue.push_back(u);
                }
            }
        }
        count == n
    }

    /// Map each edge to a builder-ready copy of itself. Handy for tests and
    /// for graph surgery that keeps ids.
    pub fn to_builder(&self) -> GraphBuilder {
        let mut b = GraphBuilder::new();
        for v in 0..self.num_vertices() {
            b.add_vertex(&self.vertex_ids[v], self.vertex_colors[v]);
        }
        for e in &self.edges {
            let u = self.dart_vertex[e.darts[0]];
            if e.is_half() {
                b.add_half(&e.id, u, e.color);
            } else {
                let v = self.dart_vertex[e.darts[1]];
                b.add_edge(&e.id, u, v, e.color, e.etype);
            }
        }
        b
    }

    /// Subgraph on the given vertices and edges, keeping ids. Returns the
    /// graph with local -> global vertex and dart maps.
    pub fn subgraph(&self, vertices: &[usize], edges: &[usize]) -> (Multigraph, Vec<usize>, Vec<usize>) {
        let mut b = GraphBuilder::new();
        let mut local = HashMap::new();
        for &v in vertices {
            local.insert(v, b.add_vertex(&self.vertex_ids[v], self.vertex_colors[v]));
        }
        let mut dmap = Vec::new();
        for &e in edges {
            let ed = &self.edges[e];
            let u = local[&self.dart_vertex[ed.darts[0]]];
            if ed.is_half() {
                b.add_half(&ed.id, u, ed.color);
                dmap.push(ed.darts[0]);
            } else {
                let v = local[&self.dart_vertex[ed.darts[1]]];
                let (a, c) = (&self.dart_ids[ed.darts[0]], &self.dart_ids[ed.darts[1]]);
                b.add_edge_with_darts(&ed.id, a, c, u, v, ed.color, ed.etype);
                dmap.push(ed.darts[0]);
                dmap.push(ed.darts[1]);
            }
        }
        (b.build(), vertices.to_vec(), dmap)
    }

    /// Darts of an edge in (tail, head) order for directed edges.
    pub fn edge_darts(&self, e: usize) -> [usize; 2] {
        self.edges[e].darts
    }
}

/// Incremental constructor. Dart ids are derived from edge ids.
#[derive(Clone, Debug, Default)]
pub struct GraphBuilder {
    vertex_ids: Vec<String>,
    vertex_colors: Vec<Color>,
    dart_ids: Vec<String>,
    dart_vertex: Vec<usize>,
    theta: Vec<usize>,
    edges: Vec<EdgeInfo>,
}

impl GraphBuilder {
    pub fn new() -> GraphBuilder {
        GraphBuilder::default()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertex_ids.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn add_vertex(&mut self, id: &str, color: Color) -> usize {
        self.vertex_ids.push(id.to_string());
        self.vertex_colors.push(color);
        self.vertex_ids.len() - 1
    }

    pub fn add_edge(&mut self, id: &str, u: usize, v: usize, color: Color, etype: EdgeType) -> usize {
        let d0 = self.dart_ids.len();
        self.dart_ids.push(format!("{id}.0"));
        self.dart_ids.push(format!("{id}.1"));
        self.dart_vertex.push(u);
        self.dart_vertex.push(v);
        self.theta.push(d0 + 1);
        self.theta.push(d0);
        self.edges.push(EdgeInfo { id: id.to_string(), color, etype, darts: [d0, d0 + 1] });
        self.edges.len() - 1
    }

    pub fn add_half(&mut self, id: &str, u: usize, color: Color) -> usize {
        let d = self.dart_ids.len();
        self.dart_ids.push(id.to_string());
        self.dart_vertex.push(u);
        self.theta.push(d);
        self.edges.push(EdgeInfo { id: id.to_string(), color, etype: EdgeType::Halvable, darts: [d, d] });
        self.edges.len() - 1
    }

    /// Add an edge with explicit dart ids (used by quotient construction).
    pub fn add_edge_with_darts(
        &mut self,
        id: &str,
        d0_id: &str,
        d1_id: &str,
        u: usize,
        v: usize,
        color: Color,
        etype: EdgeType,
    ) -> usize {
        let d0 = self.dart_ids.len();
        self.dart_ids.push(d0_id.to_string());
        self.dart_ids.push(d1_id.to_string());
        self.dart_vertex.push(u);
        self.dart_vertex.push(v);
        self.theta.push(d0 + 1);
        self.theta.push(d0);
        self.edges.push(EdgeInfo { id: id.to_string(), color, etype, darts: [d0, d0 + 1] });
        self.edges.len() - 1
    }

    /// Darts are numbered in insertion order: an edge added as the i-th
    /// record receives consecutive dart numbers.
    pub fn last_darts(&self) -> [usize; 2] {
        self.edges.last().map(|e| e.darts).unwrap_or([0, 0])
    }

    pub fn build(self) -> Multigraph {
        Multigraph::from_raw_parts(
            self.vertex_ids,
            self.vertex_colors,
            self.dart_ids,
            self.dart_vertex,
            self.theta,
            self.edges,
        )
    }

    /// Build and reject duplicate ids.
    pub fn build_checked(self) -> Result<Multigraph, GraphError> {
        let mut seen = HashMap::new();
        for id in &self.vertex_ids {
            if seen.insert(("v", id.clone()), ()).is_some() {
                return Err(GraphError::DuplicateId { line: 0, id: id.clone() });
            }
        }
        for e in &self.edges {
            if seen.insert(("e", e.id.clone()), ()).is_some() {
                return Err(GraphError::DuplicateId { line: 0, id: e.id.clone() });
            }
        }
        for d in &self.dart_ids {
            if seen.insert(("d", d.clone()), ()).is_some() {
                return Err(GraphError::DuplicateId { line: 0, id: d.clone() });
            }
        }
        Ok(self.build())
    }
}

fn parse_kv<'a>(tok: &'a str, line: usize) -> Result<(&'a str, &'a str), GraphError> {
    tok.split_once('=').ok_or_else(|| GraphError::MalformedLine {
        line,
        msg: format!("expected key=value, got {tok}"),
    })
}

fn parse_color(v: &str, line: usize) -> Result<Color, GraphError> {
    v.parse::<Color>().map_err(|_| GraphError::MalformedLine { line, msg: format!("bad color {v}") })
}

/// Parse the line-based graph format.
pub fn parse_graph(text: &str) -> Result<Multigraph, GraphError> {
    let mut b = GraphBuilder::new();
    let mut vmap: HashMap<String, usize> = HashMap::new();
    let mut ids: HashMap<String, ()> = HashMap::new();
    let mut dart_names: HashMap<String, ()> = HashMap::new();
    let mut rotations: Vec<(usize, String, Vec<String>)> = Vec::new();

    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let content = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = content.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        match toks[0] {
            "vertex" => {
                if toks.len() < 2 {
                    return Err(GraphError::MalformedLine { line, msg: "vertex needs an id".into() });
                }
                let id = toks[1];
                let mut color = 0;
                for t in &toks[2..] {
                    let (k, v) = parse_kv(t, line)?;
                    match k {
                        "color" => color = parse_color(v, line)?,
                        _ => return Err(GraphError::MalformedLine { line, msg: format!("unknown key {k}") }),
                    }
                }
                if vmap.contains_key(id) {
                    return Err(GraphError::DuplicateId { line, id: id.into() });
                }
                let v = b.add_vertex(id, color);
                vmap.insert(id.to_string(), v);
            }
            "edge" | "half" => {
                let is_edge = toks[0] == "edge";
                let need = if is_edge { 4 } else { 3 };
                if toks.len() < need {
                    return Err(GraphError::MalformedLine { line, msg: format!("{} needs {} fields", toks[0], need - 1) });
                }
                let id = toks[1];
                let mut color = 0;
                let mut etype = EdgeType::Halvable;
                for t in &toks[need..] {
                    let (k, v) = parse_kv(t, line)?;
                    match k {
                        "color" => color = parse_color(v, line)?,
                        "type" if is_edge => {
                            etype = EdgeType::parse(v)
                                .ok_or_else(|| GraphError::BadEdgeType { line, value: v.into() })?
                        }
                        _ => return Err(GraphError::MalformedLine { line, msg: format!("unknown key {k}") }),
                    }
                }
                if ids.contains_key(id) {
                    return Err(GraphError::DuplicateId { line, id: id.into() });
                }
                let lookup = |name: &str| {
                    vmap.get(name).copied().ok_or_else(|| GraphError::DanglingEndpoint { line, id: name.into() })
                };
                let u = lookup(toks[2])?;
                let new_darts: Vec<String> = if is_edge {
                    vec![format!("{id}.0"), format!("{id}.1")]
                } else {
                    vec![id.to_string()]
                };
                for dn in &new_darts {
                    if dart_names.contains_key(dn) {
                        return Err(GraphError::DuplicateId { line, id: dn.clone() });
                    }
                }
                if is_edge {
                    let v = lookup(toks[3])?;
                    b.add_edge(id, u, v, color, etype);
                } else {
                    b.add_half(id, u, color);
                }
                for dn in new_darts {
                    dart_names.insert(dn, ());
                }
                ids.insert(id.to_string(), ());
            }
            "rotation" => {
                if toks.len() < 2 {
                    return Err(GraphError::MalformedLine { line, msg: "rotation needs a vertex".into() });
                }
                rotations.push((line, toks[1].to_string(), toks[2..].iter().map(|s| s.to_string()).collect()));
            }
            other => {
                return Err(GraphError::MalformedLine { line, msg: format!("unknown record {other}") });
            }
        }
    }
    let g = b.build();
    if rotations.is_empty() {
        return Ok(g);
    }
    let mut rot: Vec<Vec<usize>> = vec![Vec::new(); g.num_vertices()];
    let mut given = vec![false; g.num_vertices()];
    for (line, vid, darts) in rotations {
        let v = g.vertex_index(&vid).ok_or(GraphError::DanglingEndpoint { line, id: vid.clone() })?;
        if given[v] {
            return Err(GraphError::DuplicateId { line, id: vid });
        }
        given[v] = true;
        for dn in darts {
            let d = g.dart_index(&dn).ok_or(GraphError::DanglingEndpoint { line, id: dn.clone() })?;
            if g.vertex_of(d) != v {
                return Err(GraphError::MalformedLine { line, msg: format!("dart {dn} is not at {vid}") });
            }
            rot[v].push(d);
        }
        let mut sorted = rot[v].clone();
        sorted.sort_unstable();
        let mut expect = g.darts_at(v).to_vec();
        expect.sort_unstable();
        if sorted != expect {
            return Err(GraphError::MalformedLine { line, msg: format!("rotation at {vid} must list each dart once") });
        }
    }
    if given.iter().any(|&x| !x) {
        return Err(GraphError::MalformedLine { line: 0, msg: "rotation records must cover every vertex".into() });
    }
    Ok(g.with_rotation(Some(rot)))
}

pub fn serialize_graph(g: &Multigraph) -> String {
    let mut out = String::new();
    for v in 0..g.num_vertices() {
        let _ = write!(out, "vertex {}", g.vertex_id(v));
        if g.vertex_color(v) != 0 {
            let _ = write!(out, " color={}", g.vertex_color(v));
        }
        out.push('\n');
    }
    for e in g.edges() {
        if e.is_half() {
            let _ = write!(out, "half {} {}", e.id, g.vertex_id(g.vertex_of(e.darts[0])));
            if e.color != 0 {
                let _ = write!(out, " color={}", e.color);
            }
        } else {
            let _ = write!(
                out,
                "edge {} {} {}",
                e.id,
                g.vertex_id(g.vertex_of(e.darts[0])),
                g.vertex_id(g.vertex_of(e.darts[1]))
            );
            if e.color != 0 {
                let _ = write!(out, " color={}", e.color);
            }
            if e.etype != EdgeType::Halvable {
                let _ = write!(out, " type={}", e.etype.as_str());
            }
        }
        out.push('\n');
    }
    if let Some(rot) = g.rotation() {
        for (v, cyc) in rot.iter().enumerate() {
            let _ = write!(out, "rotation {}", g.vertex_id(v));
            for &d in cyc {
                let _ = write!(out, " {}", g.dart_id(d));
            }
            out.push('\n');
        }
    }
    out
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    pub connected: bool,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_graph(g: &Multigraph) -> ValidationReport {
    let mut violations = Vec::new();
    let nd = g.num_darts();
    let nv = g.num_vertices();
    if g.vertex_colors.len() != nv {
        violations.push("vertex color table has wrong length".to_string());
    }
    if g.dart_vertex.len() != nd || g.theta.len() != nd {
        violations.push("dart tables have inconsistent lengths".to_string());
        return ValidationReport { violations, connected: false };
    }
    for d in 0..nd {
        if g.dart_vertex[d] >= nv {
            violations.push(format!("dart {} has no vertex", g.dart_ids[d]));
        }
        let t = g.theta[d];
        if t >= nd {
            violations.push(format!("theta of dart {} is out of range", g.dart_ids[d]));
        } else if g.theta[t] != d {
            violations.push(format!("theta is not an involution at dart {}", g.dart_ids[d]));
        }
        if g.dart_edge[d] == usize::MAX {
            violations.push(format!("dart {} belongs to no edge", g.dart_ids[d]));
        }
    }
    for e in &g.edges {
        let [a, b] = e.darts;
        if a >= nd || b >= nd {
            violations.push(format!("edge {} references a missing dart", e.id));
            continue;
        }
        if g.theta[a] != b || g.theta[b] != a {
            violations.push(format!("edge {} disagrees with theta", e.id));
        }
        if a == b && e.etype == EdgeType::Directed {
            violations.push(format!("half-edge {} cannot be directed", e.id));
        }
    }
    let mut names: HashMap<&str, usize> = HashMap::new();
    for id in &g.vertex_ids {
        *names.entry(id.as_str()).or_default() += 1;
    }
    for (id, c) in names {
        if c > 1 {
            violations.push(format!("duplicate vertex id {id}"));
        }
    }
    let mut dnames: HashMap<&str, usize> = HashMap::new();
    for id in &g.dart_ids {
        *dnames.entry(id.as_str()).or_default() += 1;
    }
    for (id, c) in dnames {
        if c > 1 {
            violations.push(format!("duplicate dart id {id}"));
        }
    }
    if let Some(rot) = &g.rotation {
        for (v, cyc) in rot.iter().enumerate() {
            let mut a = cyc.clone();
            a.sort_unstable();
            let mut b = g.incident.get(v).cloned().unwrap_or_default();
            b.sort_unstable();
            if a != b {
                violations.push(format!("rotation at {} does not list its darts", g.vertex_ids[v]));
            }
        }
    }
    violations.sort();
    let connected = if violations.is_empty() { g.is_connected() } else { false };
    ValidationReport { violations, connected }
}
