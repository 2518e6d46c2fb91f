//! Block trees, the central block and atoms.
//!
//! Loops and free half-edges are kept out of the biconnected components and
//! become one-edge pseudo-blocks at their vertex, so they behave like pendant
//! edges everywhere below.

use std::collections::{BTreeSet, HashSet, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::multigraph::{Color, EdgeType, GraphBuilder, Multigraph};
use crate::perm::{automorphisms_with_marks, DEFAULT_BUDGET};
use crate::planar::aut_essentially_3connected;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecompError {
    #[error("the block tree has a central articulation, not a central block")]
    NoCentralBlock,
    #[error("graph is disconnected")]
    Disconnected,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
    /// A loop or half-edge on its own.
    pub pseudo: bool,
}

impl Block {
    /// A single edge: K2, a lone loop or a lone half-edge.
    pub fn is_trivial(&self) -> bool {
        self.edges.len() == 1
    }
}

#[derive(Clone, Debug)]
pub struct BlockTree {
    pub blocks: Vec<Block>,
    /// Vertices lying in at least two blocks.
    pub articulations: Vec<usize>,
    pub vertex_blocks: Vec<Vec<usize>>,
    pub edge_block: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Center {
    Block(usize),
    Vertex(usize),
}

/// Node of the block tree: blocks first, then articulations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Node {
    B(usize),
    A(usize),
}

impl BlockTree {
    pub fn is_articulation(&self, v: usize) -> bool {
        self.vertex_blocks[v].len() >= 2
    }

    fn neighbors(&self, n: Node) -> Vec<Node> {
        match n {
            Node::B(b) => self.blocks[b]
                .vertices
                .iter()
                .filter(|&&v| self.is_articulation(v))
                .map(|&v| Node::A(v))
                .collect(),
            Node::A(v) => self.vertex_blocks[v].iter().map(|&b| Node::B(b)).collect(),
        }
    }

    /// Center of the block tree by repeated leaf removal.
    pub fn center(&self) -> Center {
        if self.blocks.is_empty() {
            return Center::Vertex(0);
        }
        let nodes: Vec<Node> = (0..self.blocks.len())
            .map(Node::B)
            .chain(self.articulations.iter().map(|&v| Node::A(v)))
            .collect();
        let idx = |n: Node| -> usize {
            match n {
                Node::B(b) => b,
                Node::A(v) => self.blocks.len() + self.articulations.binary_search(&v).unwrap(),
            }
        };
        let mut deg: Vec<usize> = nodes.iter().map(|&n| self.neighbors(n).len()).collect();
        let mut removed = vec![false; nodes.len()];
        let mut left = nodes.len();
        let mut layer: Vec<usize> = (0..nodes.len()).filter(|&i| deg[i] <= 1).collect();
        while left > 2 {
            let mut next = Vec::new();
            for &i in &layer {
                removed[i] = true;
                left -= 1;
            }
            for &i in &layer {
                for m in self.neighbors(nodes[i]) {
                    let j = idx(m);
                    if !removed[j] {
                        deg[j] -= 1;
                        if deg[j] == 1 {
                            next.push(j);
                        }
                    }
                }
            }
            layer = next;
        }
        let rest: Vec<Node> = (0..nodes.len()).filter(|&i| !removed[i]).map(|i| nodes[i]).collect();
        // leaves are blocks, so every diameter path has an odd number of
        // nodes and the center is a single node; keep a fallback anyway
        let pick = if rest.len() == 1 {
            rest[0]
        } else if self.eccentricity(rest[0]) <= self.eccentricity(rest[1]) {
            rest[0]
        } else {
            rest[1]
        };
        match pick {
            Node::B(b) => Center::Block(b),
            Node::A(v) => Center::Vertex(v),
        }
    }

    fn eccentricity(&self, start: Node) -> usize {
        let mut seen: HashSet<Node> = HashSet::from([start]);
        let mut queue = VecDeque::from([(start, 0usize)]);
        let mut best = 0;
        while let Some((n, d)) = queue.pop_front() {
            best = best.max(d);
            for m in self.neighbors(n) {
                if seen.insert(m) {
                    queue.push_back((m, d + 1));
                }
            }
        }
        best
    }

    /// Parent of every block (articulation vertex) and every articulation
    /// (block) when the tree is rooted at `center`.
    pub fn rooted(&self, center: Center) -> Rooted {
        let mut block_parent = vec![None; self.blocks.len()];
        let mut art_parent = vec![None; self.vertex_blocks.len()];
        let mut order = Vec::new();
        let start = match center {
            Center::Block(b) => Node::B(b),
            Center::Vertex(v) => Node::A(v),
        };
        let mut seen: HashSet<Node> = HashSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(n) = queue.pop_front() {
            order.push(n);
            for m in self.neighbors(n) {
                if seen.insert(m) {
                    match (m, n) {
                        (Node::B(b), Node::A(v)) => block_parent[b] = Some(v),
                        (Node::A(v), Node::B(b)) => art_parent[v] = Some(b),
                        _ => unreachable!("block tree is bipartite"),
                    }
                    queue.push_back(m);
                }
            }
        }
        Rooted { center, block_parent, art_parent, bfs: order.into_iter().map(to_pub).collect() }
    }
}

fn to_pub(n: Node) -> TreeNode {
    match n {
        Node::B(b) => TreeNode::Block(b),
        Node::A(v) => TreeNode::Articulation(v),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TreeNode {
    Block(usize),
    Articulation(usize),
}

#[derive(Clone, Debug)]
pub struct Rooted {
    pub center: Center,
    pub block_parent: Vec<Option<usize>>,
    pub art_parent: Vec<Option<usize>>,
    /// Nodes in breadth-first order from the center.
    pub bfs: Vec<TreeNode>,
}

/// Biconnected components. Parallel edges share a block; loops and
/// half-edges are pseudo-blocks.
pub fn build_block_tree(g: &Multigraph) -> BlockTree {
    let n = g.num_vertices();
    let m = g.num_edges();
    let mut edge_block = vec![usize::MAX; m];
    let mut blocks: Vec<Block> = Vec::new();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut time = 0;
    let mut estack: Vec<usize> = Vec::new();
    let real = |e: usize| !g.edge(e).is_half() && !g.is_loop(e);
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        disc[root] = time;
        low[root] = time;
        time += 1;
        // (vertex, edge used to enter, next incident dart index)
        let mut dfs: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
        while let Some(&mut (v, pe, ref mut i)) = dfs.last_mut() {
            let darts = g.darts_at(v);
            if *i < darts.len() {
                let d = darts[*i];
                *i += 1;
                let e = g.edge_of(d);
                if e == pe || !real(e) {
                    continue;
                }
                let u = g.other_end(d);
                if disc[u] == usize::MAX {
                    estack.push(e);
                    disc[u] = time;
                    low[u] = time;
                    time += 1;
                    dfs.push((u, e, 0));
                } else if disc[u] < disc[v] {
                    estack.push(e);
                    low[v] = low[v].min(disc[u]);
                }
            } else {
                dfs.pop();
                if let Some(&(p, _, _)) = dfs.last() {
                    low[p] = low[p].min(low[v]);
                    if low[v] >= disc[p] {
                        let mut edges = Vec::new();
                        while let Some(e) = estack.pop() {
                            edges.push(e);
                            if e == pe {
                                break;
                            }
                        }
                        blocks.push(make_block(g, edges, false));
                    }
                }
            }
        }
    }
    for e in 0..m {
        if !real(e) {
            blocks.push(make_block(g, vec![e], true));
        }
    }
    // deterministic order: by smallest edge
    blocks.sort_by_key(|b| b.edges[0]);
    let mut vertex_blocks = vec![Vec::new(); n];
    for (i, b) in blocks.iter().enumerate() {
        for &e in &b.edges {
            edge_block[e] = i;
        }
        for &v in &b.vertices {
            vertex_blocks[v].push(i);
        }
    }
    let articulations = (0..n).filter(|&v| vertex_blocks[v].len() >= 2).collect();
    BlockTree { blocks, articulations, vertex_blocks, edge_block }
}

fn make_block(g: &Multigraph, mut edges: Vec<usize>, pseudo: bool) -> Block {
    edges.sort_unstable();
    let mut vertices: Vec<usize> = edges
        .iter()
        .flat_map(|&e| {
            let (a, b) = g.endpoints(e);
            [a, b]
        })
        .collect();
    vertices.sort_unstable();
    vertices.dedup();
    Block { vertices, edges, pseudo }
}

/// The central block, or `NoCentralBlock` when the center is an
/// articulation.
pub fn find_central_block(t: &BlockTree) -> Result<usize, DecompError> {
    match t.center() {
        Center::Block(b) => Ok(b),
        Center::Vertex(_) => Err(DecompError::NoCentralBlock),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum AtomKind {
    Block,
    Proper,
    Dipole,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Symmetry {
    Halvable,
    Symmetric,
    Asymmetric,
}

impl Symmetry {
    /// Type of the edge replacing an atom of this symmetry.
    pub fn edge_type(self) -> EdgeType {
        match self {
            Symmetry::Halvable => EdgeType::Halvable,
            Symmetry::Symmetric => EdgeType::Undirected,
            Symmetry::Asymmetric => EdgeType::Directed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Atom {
    pub kind: AtomKind,
    /// Boundary first (in the order u, v), then the interior, ascending.
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
    pub boundary: Vec<usize>,
    pub interior: Vec<usize>,
}

impl Atom {
    fn new(kind: AtomKind, mut boundary: Vec<usize>, mut vertices: Vec<usize>, mut edges: Vec<usize>) -> Atom {
        boundary.sort_unstable();
        vertices.sort_unstable();
        vertices.dedup();
        edges.sort_unstable();
        edges.dedup();
        let interior: Vec<usize> = vertices.iter().copied().filter(|v| !boundary.contains(v)).collect();
        let mut ordered = boundary.clone();
        ordered.extend(&interior);
        Atom { kind, vertices: ordered, edges, boundary, interior }
    }

    /// The atom as a standalone graph with ids kept. Vertex `i` of the
    /// result is `self.vertices[i]`, so the boundary comes first.
    pub fn graph(&self, g: &Multigraph) -> (Multigraph, Vec<usize>, Vec<usize>) {
        g.subgraph(&self.vertices, &self.edges)
    }
}

/// Candidate part stored as bitsets for inclusion tests.
struct Part {
    atom: Atom,
    ebits: Vec<u64>,
    vbits: Vec<u64>,
}

fn bits(items: &[usize], n: usize) -> Vec<u64> {
    let mut b = vec![0u64; n.div_ceil(64).max(1)];
    for &x in items {
        b[x / 64] |= 1 << (x % 64);
    }
    b
}

fn subset(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x & !y == 0)
}

/// All atoms of `g` with respect to `center`. With `block_only` proper
/// parts and dipoles are skipped (used on quotients, where only block atoms
/// are reduced).
pub fn find_atoms_with(g: &Multigraph, t: &BlockTree, center: Center, block_only: bool) -> Vec<Atom> {
    let n = g.num_vertices();
    let m = g.num_edges();
    let rooted = t.rooted(center);
    let mut parts: Vec<Atom> = Vec::new();

    // block parts: every subtree hanging off the center
    let mut sub_edges: Vec<Vec<usize>> = vec![Vec::new(); t.blocks.len()];
    for node in rooted.bfs.iter().rev() {
        if let TreeNode::Block(b) = *node {
            let mut edges = t.blocks[b].edges.clone();
            for &v in &t.blocks[b].vertices {
                if rooted.art_parent[v] == Some(b) {
                    for &c in &t.vertex_blocks[v] {
                        if c != b {
                            edges.extend(sub_edges[c].iter().copied());
                        }
                    }
                }
            }
            sub_edges[b] = edges;
        }
    }
    let vertices_of = |edges: &[usize]| -> Vec<usize> {
        let mut vs: Vec<usize> = edges
            .iter()
            .flat_map(|&e| {
                let (a, b) = g.endpoints(e);
                [a, b]
            })
            .collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    };
    for node in &rooted.bfs {
        match *node {
            TreeNode::Block(b) => {
                if let Some(a) = rooted.block_parent[b] {
                    if sub_edges[b].len() > 1 {
                        parts.push(Atom::new(AtomKind::Block, vec![a], vertices_of(&sub_edges[b]), sub_edges[b].clone()));
                    }
                }
            }
            TreeNode::Articulation(v) => {
                if Center::Vertex(v) == center {
                    continue;
                }
                let mut edges = Vec::new();
                for &c in &t.vertex_blocks[v] {
                    if rooted.block_parent[c] == Some(v) {
                        edges.extend(sub_edges[c].iter().copied());
                    }
                }
                if edges.len() > 1 {
                    parts.push(Atom::new(AtomKind::Block, vec![v], vertices_of(&edges), edges));
                }
            }
        }
    }

    if !block_only {
        let central_vertices: HashSet<usize> = match center {
            Center::Block(b) => t.blocks[b].vertices.iter().copied().collect(),
            Center::Vertex(v) => HashSet::from([v]),
        };
        for (bi, blk) in t.blocks.iter().enumerate() {
            if blk.pseudo || blk.vertices.len() < 3 {
                continue;
            }
            let is_central = center == Center::Block(bi);
            let in_block: HashSet<usize> = blk.vertices.iter().copied().collect();
            let bv = &blk.vertices;
            let bdeg = block_degrees(g, blk);
            for i in 0..bv.len() {
                for j in i + 1..bv.len() {
                    let (u, v) = (bv[i], bv[j]);
                    if bdeg[&u] < 3 || bdeg[&v] < 3 {
                        continue;
                    }
                    let comps = components_without(g, u, v);
                    let meets: Vec<&Vec<usize>> =
                        comps.iter().filter(|c| c.iter().any(|x| in_block.contains(x))).collect();
                    if meets.len() < 2 {
                        continue;
                    }
                    for comp in meets {
                        if !is_central && comp.iter().any(|x| central_vertices.contains(x)) {
                            continue;
                        }
                        let cset: HashSet<usize> = comp.iter().copied().collect();
                        let mut edges = Vec::new();
                        let (mut to_u, mut to_v) = (false, false);
                        for e in 0..m {
                            let (a, b) = g.endpoints(e);
                            if cset.contains(&a) || cset.contains(&b) {
                                edges.push(e);
                                to_u |= (a == u && cset.contains(&b)) || (b == u && cset.contains(&a));
                                to_v |= (a == v && cset.contains(&b)) || (b == v && cset.contains(&a));
                            }
                        }
                        if !(to_u && to_v) {
                            continue;
                        }
                        let mut vs = comp.clone();
                        vs.push(u);
                        vs.push(v);
                        parts.push(Atom::new(AtomKind::Proper, vec![u, v], vs, edges));
                    }
                }
            }
        }
        // dipoles
        for blk in t.blocks.iter().filter(|b| !b.pseudo) {
            let bdeg = block_degrees(g, blk);
            let mut bundles: std::collections::BTreeMap<(usize, usize), Vec<usize>> = Default::default();
            for &e in &blk.edges {
                let (a, b) = g.endpoints(e);
                bundles.entry((a.min(b), a.max(b))).or_default().push(e);
            }
            for ((u, v), edges) in bundles {
                if edges.len() >= 2 && bdeg[&u] >= 3 && bdeg[&v] >= 3 {
                    parts.push(Atom::new(AtomKind::Dipole, vec![u, v], vec![u, v], edges));
                }
            }
        }
    }

    // dedupe and keep inclusion-minimal parts
    let mut seen: HashSet<(Vec<usize>, Vec<usize>)> = HashSet::new();
    let cands: Vec<Part> = parts
        .into_iter()
        .filter(|a| seen.insert((a.edges.clone(), a.vertices.clone())))
        .map(|a| Part { ebits: bits(&a.edges, m), vbits: bits(&a.vertices, n), atom: a })
        .collect();
    let mut atoms: Vec<Atom> = Vec::new();
    for (i, p) in cands.iter().enumerate() {
        let minimal = cands.iter().enumerate().all(|(j, q)| {
            j == i || !(subset(&q.ebits, &p.ebits) && subset(&q.vbits, &p.vbits)) || (q.ebits == p.ebits && q.vbits == p.vbits)
        });
        if minimal {
            atoms.push(p.atom.clone());
        }
    }
    atoms.sort_by(|a, b| (a.edges[0], a.kind).cmp(&(b.edges[0], b.kind)));
    debug_assert!(interiors_disjoint(&atoms));
    atoms
}

pub fn find_atoms(g: &Multigraph, center: Center) -> Vec<Atom> {
    find_atoms_with(g, &build_block_tree(g), center, false)
}

/// Degrees inside one block. Two-cuts and dipoles are judged by these, so
/// pendant edges hanging off a cycle do not make it reducible.
fn block_degrees(g: &Multigraph, blk: &Block) -> std::collections::HashMap<usize, usize> {
    let mut deg: std::collections::HashMap<usize, usize> = blk.vertices.iter().map(|&v| (v, 0)).collect();
    for &e in &blk.edges {
        let (a, b) = g.endpoints(e);
        *deg.get_mut(&a).unwrap() += 1;
        *deg.get_mut(&b).unwrap() += 1;
    }
    deg
}

/// Components of g with u and v removed (loops and halves ignored).
fn components_without(g: &Multigraph, u: usize, v: usize) -> Vec<Vec<usize>> {
    let n = g.num_vertices();
    let mut comp = vec![usize::MAX; n];
    let mut out = Vec::new();
    for s in 0..n {
        if s == u || s == v || comp[s] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut members = vec![s];
        comp[s] = id;
        let mut i = 0;
        while i < members.len() {
            let x = members[i];
            i += 1;
            for &d in g.darts_at(x) {
                let y = g.other_end(d);
                if y != u && y != v && comp[y] == usize::MAX {
                    comp[y] = id;
                    members.push(y);
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

pub fn interiors_disjoint(atoms: &[Atom]) -> bool {
    let mut seen_v: HashSet<usize> = HashSet::new();
    let mut seen_e: HashSet<usize> = HashSet::new();
    for a in atoms {
        if a.interior.iter().any(|v| !seen_v.insert(*v)) || a.edges.iter().any(|e| !seen_e.insert(*e)) {
            return false;
        }
    }
    true
}

/// Whether an edge may be flipped by a semiregular involution. User edges
/// (colour below `base`) flip unless directed; replacement edges flip only
/// when halvable.
pub fn can_flip(etype: EdgeType, color: Color, base: Color) -> bool {
    match etype {
        EdgeType::Directed => false,
        EdgeType::Halvable => true,
        EdgeType::Undirected => color < base,
    }
}

pub const MARKER_COLOR: Color = u32::MAX - 7;

/// `A⁺`: the atom graph plus a marker edge between the two boundary
/// vertices, added last so the atom's darts form a prefix.
pub fn atom_plus(a: &Multigraph) -> Multigraph {
    let mut out = GraphBuilder::new();
    for v in 0..a.num_vertices() {
        out.add_vertex(a.vertex_id(v), a.vertex_color(v));
    }
    for e in a.edges() {
        let u = a.vertex_of(e.darts[0]);
        if e.is_half() {
            out.add_half(&e.id, u, e.color);
        } else {
            let v = a.vertex_of(e.darts[1]);
            out.add_edge_with_darts(&e.id, a.dart_id(e.darts[0]), a.dart_id(e.darts[1]), u, v, e.color, e.etype);
        }
    }
    out.add_edge("~marker", 0, 1, MARKER_COLOR, EdgeType::Undirected);
    out.build()
}

/// Symmetry type of an atom; `base` is the first colour not used by the
/// input, so colours below it are user colours.
pub fn classify_symmetry(g: &Multigraph, atom: &Atom, base: Color) -> Symmetry {
    match atom.kind {
        AtomKind::Block => Symmetry::Symmetric,
        AtomKind::Dipole => classify_dipole(g, atom, base),
        AtomKind::Proper => {
            let (a, _, _) = atom.graph(g);
            classify_proper(&a, base)
        }
    }
}

fn classify_dipole(g: &Multigraph, atom: &Atom, base: Color) -> Symmetry {
    let (u, v) = (atom.boundary[0], atom.boundary[1]);
    if g.vertex_color(u) != g.vertex_color(v) {
        return Symmetry::Asymmetric;
    }
    let mut directed: std::collections::BTreeMap<Color, (i64, i64)> = Default::default();
    let mut fixed: std::collections::BTreeMap<Color, usize> = Default::default();
    for &e in &atom.edges {
        let ed = g.edge(e);
        match ed.etype {
            EdgeType::Directed => {
                let c = directed.entry(ed.color).or_default();
                if g.vertex_of(ed.darts[0]) == u {
                    c.0 += 1;
                } else {
                    c.1 += 1;
                }
            }
            t if !can_flip(t, ed.color, base) => *fixed.entry(ed.color).or_default() += 1,
            _ => {}
        }
    }
    if directed.values().any(|(a, b)| a != b) {
        return Symmetry::Asymmetric;
    }
    if fixed.values().all(|c| c % 2 == 0) {
        Symmetry::Halvable
    } else {
        Symmetry::Symmetric
    }
}

/// Proper atom given as a standalone graph with boundary vertices 0 and 1.
pub fn classify_proper(a: &Multigraph, base: Color) -> Symmetry {
    let nd = a.num_darts();
    let auts: Vec<Vec<usize>> = match aut_essentially_3connected(&atom_plus(a)) {
        Ok(grp) => grp.elements().iter().map(|p| p.image[..nd].to_vec()).collect(),
        Err(_) => {
            let mut marks = vec![0u64; a.num_vertices()];
            marks[0] = 1;
            marks[1] = 1;
            automorphisms_with_marks(a, Some(&marks), false, DEFAULT_BUDGET)
                .expect("atom automorphisms within budget")
                .into_iter()
                .map(|p| p.image)
                .collect()
        }
    };
    let vertex_of = |d: usize| a.vertex_of(d);
    let mut symmetric = false;
    for img in &auts {
        // vertex images from darts; isolated-free since atoms are connected
        let mut vm = vec![usize::MAX; a.num_vertices()];
        for d in 0..nd {
            vm[vertex_of(d)] = vertex_of(img[d]);
        }
        if vm[0] != 1 {
            continue;
        }
        symmetric = true;
        let involution = (0..nd).all(|d| img[img[d]] == d);
        let no_fixed_vertex = vm.iter().enumerate().all(|(x, &y)| x != y);
        let no_fixed_dart = (0..nd).all(|d| img[d] != d);
        let flips_ok = (0..a.num_edges()).all(|e| {
            let ed = a.edge(e);
            if ed.is_half() {
                return true;
            }
            let [d0, d1] = ed.darts;
            if img[d0] == d1 {
                can_flip(ed.etype, ed.color, base)
            } else {
                true
            }
        });
        if involution && no_fixed_vertex && no_fixed_dart && flips_ok {
            return Symmetry::Halvable;
        }
    }
    if symmetric {
        Symmetry::Symmetric
    } else {
        Symmetry::Asymmetric
    }
}

/// Vertices of a block tree node set, for diagnostics.
pub fn block_vertex_set(t: &BlockTree, b: usize) -> BTreeSet<usize> {
    t.blocks[b].vertices.iter().copied().collect()
}
