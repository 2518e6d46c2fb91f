//! Reduction series G₀ … G_r: atoms are replaced level by level by coloured
//! edges, recorded in a catalog together with their expanded sizes.

use std::collections::HashMap;

use num_rational::Ratio;
use serde::Serialize;
use thiserror::Error;

use crate::canon::{canonical_form, find_isomorphism};
use crate::decomp::{
    build_block_tree, classify_symmetry, find_atoms, find_atoms_with, Atom, AtomKind, Center, DecompError, Symmetry,
};
use crate::multigraph::{Color, EdgeInfo, EdgeType, GraphBuilder, Multigraph};
use crate::perm::DartPermutation;
use crate::planar::{is_3_connected, is_cycle};
use crate::quotexp::{self, HalfQuotient};

pub type Q = Ratio<i64>;

/// Vertex colour of the leaf that closes a pendant replacement edge.
pub const PLACEHOLDER: Color = u32::MAX - 3;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReductionError {
    #[error("graph has no central block")]
    NoCentralBlock,
    #[error("graph is disconnected")]
    Disconnected,
    #[error("graph is primitive, nothing to reduce")]
    Primitive,
    #[error("edge colour {0} is not in the catalog")]
    UnknownColor(Color),
    #[error("permutation is not an automorphism of the reduced graph")]
    NotAutomorphism,
}

impl From<DecompError> for ReductionError {
    fn from(e: DecompError) -> Self {
        match e {
            DecompError::NoCentralBlock => ReductionError::NoCentralBlock,
            DecompError::Disconnected => ReductionError::Disconnected,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ColorCode {
    pub color: Color,
    pub kind: AtomKind,
    pub symmetry: Symmetry,
    pub level: usize,
    #[serde(serialize_with = "ser_ratio")]
    pub vhat: Q,
    #[serde(serialize_with = "ser_ratio")]
    pub ehat: Q,
}

fn ser_ratio<S: serde::Serializer>(r: &Q, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

impl ColorCode {
    pub fn edge_type(&self) -> EdgeType {
        self.symmetry.edge_type()
    }
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub code: ColorCode,
    pub key: Vec<u64>,
    /// Representative atom. Vertex 0 is the attachment (block atoms) or the
    /// tail of the replacement edge; vertex 1 is the head.
    pub rep: Multigraph,
    /// `rep` with every catalog element expanded except half-edges.
    pub expanded: Multigraph,
    /// Boundary identified into vertex 0 (proper atoms and dipoles).
    pub loop_quotient: Option<Multigraph>,
    /// Half-quotients of halvable proper atoms, pairwise non-isomorphic.
    pub half_quotients: Vec<HalfQuotient>,
}

#[derive(Clone, Debug, Default)]
pub struct Catalog {
    /// First catalog colour; colours below it belong to the input.
    pub base: Color,
    pub entries: Vec<CatalogEntry>,
    index: HashMap<(usize, AtomKind, Vec<u64>), usize>,
}

impl Catalog {
    pub fn new(base: Color) -> Catalog {
        Catalog { base, entries: Vec::new(), index: HashMap::new() }
    }

    pub fn is_catalog_color(&self, c: Color) -> bool {
        c >= self.base && ((c - self.base) as usize) < self.entries.len()
    }

    pub fn entry(&self, c: Color) -> Option<&CatalogEntry> {
        if c < self.base {
            return None;
        }
        self.entries.get((c - self.base) as usize)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lookup(&self, level: usize, kind: AtomKind, key: &[u64]) -> Option<Color> {
        self.index.get(&(level, kind, key.to_vec())).map(|&i| self.base + i as Color)
    }

    /// (v̂, ê) of a single edge or half-edge.
    pub fn element_sizes(&self, e: &EdgeInfo) -> Result<(Q, Q), ReductionError> {
        let (v, ed) = if e.color < self.base {
            (Q::from_integer(0), Q::from_integer(1))
        } else {
            let ent = self.entry(e.color).ok_or(ReductionError::UnknownColor(e.color))?;
            (ent.code.vhat, ent.code.ehat)
        };
        if e.is_half() {
            Ok((v / 2, ed / 2))
        } else {
            Ok((v, ed))
        }
    }
}

/// First colour above every edge colour of the inputs.
pub fn catalog_base(graphs: &[&Multigraph]) -> Color {
    graphs.iter().map(|g| g.max_edge_color()).max().unwrap_or(0) + 1
}

/// v̂(X) = v(X) + Σ v̂(e) and ê(X) = Σ ê(e) over the elements of X.
pub fn hatted_sizes(x: &Multigraph, catalog: &Catalog) -> Result<(Q, Q), ReductionError> {
    let mut v = Q::from_integer(x.num_vertices() as i64);
    let mut e = Q::from_integer(0);
    for ed in x.edges() {
        let (a, b) = catalog.element_sizes(ed)?;
        v += a;
        e += b;
    }
    Ok((v, e))
}

/// Data of one reduction step G_i -> G_{i+1}.
#[derive(Clone, Debug)]
pub struct ReductionStep {
    pub level: usize,
    pub center: Center,
    pub atoms: Vec<Atom>,
    pub colors: Vec<Color>,
    /// Boundary of each atom in replacement order: `ends[j][s]` carries
    /// dart `s` of the replacement edge. Block atoms have one end.
    pub ends: Vec<Vec<usize>>,
    /// Replacement edge of each atom in G_{i+1}.
    pub repl_edge: Vec<usize>,
    pub vmap: Vec<Option<usize>>,
    pub dmap: Vec<Option<usize>>,
    /// G_{i+1} vertex -> G_i vertex (`None` for placeholder leaves).
    pub vinv: Vec<Option<usize>>,
    /// G_{i+1} dart -> G_i dart (`None` for replacement darts).
    pub dinv: Vec<Option<usize>>,
    pub atom_of_edge: Vec<Option<usize>>,
    /// Atom j of G_{i+1}'s edge index, if it replaces one.
    pub atom_of_repl: HashMap<usize, usize>,
    /// Atom graphs with local -> G_i vertex and dart maps.
    pub atom_graphs: Vec<(Multigraph, Vec<usize>, Vec<usize>)>,
}

#[derive(Clone, Debug)]
pub struct ReductionSeries {
    pub graphs: Vec<Multigraph>,
    pub steps: Vec<ReductionStep>,
    pub catalog: Catalog,
}

impl ReductionSeries {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn top(&self) -> &Multigraph {
        self.graphs.last().expect("series holds G0")
    }
}

fn center_block(g: &Multigraph) -> Result<Center, ReductionError> {
    if !g.is_connected() {
        return Err(ReductionError::Disconnected);
    }
    let t = build_block_tree(g);
    match t.center() {
        c @ Center::Block(_) => Ok(c),
        Center::Vertex(_) => Err(ReductionError::NoCentralBlock),
    }
}

/// Classification of primitive graphs: after removing single pendant items
/// the central block is K₂, a cycle or a simple 3-connected graph.
fn primitive_by_shape(g: &Multigraph, center: Center) -> bool {
    let t = build_block_tree(g);
    let Center::Block(c) = center else { return false };
    let core = &t.blocks[c];
    let in_core: Vec<bool> = {
        let mut f = vec![false; g.num_vertices()];
        for &v in &core.vertices {
            f[v] = true;
        }
        f
    };
    let mut pendant_at = vec![0usize; g.num_vertices()];
    for (b, blk) in t.blocks.iter().enumerate() {
        if b == c {
            continue;
        }
        if blk.edges.len() != 1 {
            return false;
        }
        let e = blk.edges[0];
        let (x, y) = g.endpoints(e);
        let attach = if in_core[x] { x } else { y };
        if !in_core[attach] {
            return false;
        }
        if !blk.pseudo {
            let leaf = if attach == x { y } else { x };
            if in_core[leaf] || g.degree(leaf) != 1 {
                return false;
            }
        }
        pendant_at[attach] += 1;
        if pendant_at[attach] > 1 {
            return false;
        }
    }
    if core.pseudo || core.edges.len() == 1 {
        return true;
    }
    let (cg, _, _) = g.subgraph(&core.vertices, &core.edges);
    if is_cycle(&cg) {
        return true;
    }
    let simple = cg.num_edges() == (0..cg.num_vertices()).map(|v| cg.neighbors(v).len()).sum::<usize>() / 2;
    simple && is_3_connected(&cg)
}

pub fn is_primitive(g: &Multigraph) -> Result<bool, ReductionError> {
    let center = center_block(g)?;
    let by_atoms = find_atoms(g, center).is_empty();
    debug_assert_eq!(by_atoms, primitive_by_shape(g, center), "primitive classification disagrees");
    Ok(by_atoms)
}

/// Marks for canonical forms of an atom: both boundary vertices get mark 1.
fn boundary_marks(a: &Multigraph, nb: usize) -> Vec<u64> {
    (0..a.num_vertices()).map(|v| u64::from(v < nb)).collect()
}

/// Replace all atoms of `g` (level `level`) and register their classes.
pub fn reduce_step(
    g: &Multigraph,
    level: usize,
    catalog: &mut Catalog,
) -> Result<(Multigraph, ReductionStep), ReductionError> {
    let center = center_block(g)?;
    let t = build_block_tree(g);
    let atoms = find_atoms_with(g, &t, center, false);
    if atoms.is_empty() {
        return Err(ReductionError::Primitive);
    }
    let mut atom_of_edge = vec![None; g.num_edges()];
    let mut removed_v = vec![false; g.num_vertices()];
    for (j, a) in atoms.iter().enumerate() {
        for &e in &a.edges {
            atom_of_edge[e] = Some(j);
        }
        for &v in &a.interior {
            removed_v[v] = true;
        }
    }

    let mut colors = Vec::new();
    let mut ends = Vec::new();
    let mut atom_graphs = Vec::new();
    for a in &atoms {
        let ag = a.graph(g);
        let nb = a.boundary.len();
        let form = canonical_form(&ag.0, Some(&boundary_marks(&ag.0, nb)));
        let end: Vec<usize> = if nb == 2 && form.lab[1] < form.lab[0] {
            vec![a.vertices[1], a.vertices[0]]
        } else {
            a.vertices[..nb].to_vec()
        };
        let color = match catalog.lookup(level, a.kind, &form.cert) {
            Some(c) => c,
            None => register(g, a, &end, level, form.cert, catalog)?,
        };
        colors.push(color);
        ends.push(end);
        atom_graphs.push(ag);
    }

    // G_{i+1}: untouched items in order, then one replacement per atom
    let mut b = GraphBuilder::new();
    let mut vmap = vec![None; g.num_vertices()];
    let mut vinv = Vec::new();
    for v in 0..g.num_vertices() {
        if !removed_v[v] {
            vmap[v] = Some(b.add_vertex(g.vertex_id(v), g.vertex_color(v)));
            vinv.push(Some(v));
        }
    }
    let mut dmap = vec![None; g.num_darts()];
    let mut dinv = Vec::new();
    let mut next = 0usize;
    for e in 0..g.num_edges() {
        if atom_of_edge[e].is_some() {
            continue;
        }
        let ed = g.edge(e);
        let u = vmap[g.vertex_of(ed.darts[0])].expect("kept");
        if ed.is_half() {
            b.add_half(&ed.id, u, ed.color);
            dmap[ed.darts[0]] = Some(next);
            dinv.push(Some(ed.darts[0]));
            next += 1;
        } else {
            let v = vmap[g.vertex_of(ed.darts[1])].expect("kept");
            b.add_edge_with_darts(&ed.id, g.dart_id(ed.darts[0]), g.dart_id(ed.darts[1]), u, v, ed.color, ed.etype);
            dmap[ed.darts[0]] = Some(next);
            dmap[ed.darts[1]] = Some(next + 1);
            dinv.push(Some(ed.darts[0]));
            dinv.push(Some(ed.darts[1]));
            next += 2;
        }
    }
    let mut repl_edge = Vec::new();
    let mut atom_of_repl = HashMap::new();
    let kept_edges = b.num_edges();
    for (j, a) in atoms.iter().enumerate() {
        let code = &catalog.entry(colors[j]).expect("registered").code;
        let id = fresh_id(g, &format!("~r{level}_{j}"));
        let x = vmap[ends[j][0]].expect("boundary kept");
        let eidx = kept_edges + j;
        if a.kind == AtomKind::Block {
            let leaf_id = fresh_id(g, &format!("~p{level}_{j}"));
            let leaf = b.add_vertex(&leaf_id, PLACEHOLDER);
            vinv.push(None);
            b.add_edge(&id, x, leaf, colors[j], EdgeType::Undirected);
        } else {
            let y = vmap[ends[j][1]].expect("boundary kept");
            b.add_edge(&id, x, y, colors[j], code.edge_type());
        }
        dinv.push(None);
        dinv.push(None);
        repl_edge.push(eidx);
        atom_of_repl.insert(eidx, j);
    }
    let next_g = b.build();
    Ok((
        next_g,
        ReductionStep {
            level,
            center,
            atoms,
            colors,
            ends,
            repl_edge,
            vmap,
            dmap,
            vinv,
            dinv,
            atom_of_edge,
            atom_of_repl,
            atom_graphs,
        },
    ))
}

fn fresh_id(g: &Multigraph, want: &str) -> String {
    let mut id = want.to_string();
    while g.vertex_index(&id).is_some() || g.edge_index(&id).is_some() {
        id.push('\'');
    }
    id
}

fn register(
    g: &Multigraph,
    a: &Atom,
    end: &[usize],
    level: usize,
    key: Vec<u64>,
    catalog: &mut Catalog,
) -> Result<Color, ReductionError> {
    let symmetry = classify_symmetry(g, a, catalog.base);
    // representative with vertices [ends..., interior...]
    let mut order: Vec<usize> = end.to_vec();
    order.extend(&a.interior);
    let (rep, _, _) = g.subgraph(&order, &a.edges);
    let mut vhat = Q::from_integer(a.interior.len() as i64);
    let mut ehat = Q::from_integer(0);
    for &e in &a.edges {
        let (x, y) = catalog.element_sizes(g.edge(e))?;
        vhat += x;
        ehat += y;
    }
    if a.kind == AtomKind::Block {
        // the leaf of the pendant replacement edge is itself a vertex
        vhat -= 1;
    }
    let color = catalog.base + catalog.entries.len() as Color;
    let code = ColorCode { color, kind: a.kind, symmetry, level, vhat, ehat };
    let expanded = quotexp::expand_fixed(&rep, catalog).map_err(|_| ReductionError::UnknownColor(color))?;
    let loop_quotient = (a.kind != AtomKind::Block).then(|| quotexp::identify_boundary(&rep));
    let half_quotients = if a.kind == AtomKind::Proper && symmetry == Symmetry::Halvable {
        quotexp::proper_half_quotients(&rep, catalog.base)
    } else {
        Vec::new()
    };
    catalog.index.insert((level, a.kind, key.clone()), catalog.entries.len());
    catalog.entries.push(CatalogEntry { code, key, rep, expanded, loop_quotient, half_quotients });
    Ok(color)
}

pub fn reduction_series(g: &Multigraph, base: Color) -> Result<ReductionSeries, ReductionError> {
    center_block(g)?;
    let mut catalog = Catalog::new(base);
    let mut graphs = vec![g.clone()];
    let mut steps = Vec::new();
    loop {
        let cur = graphs.last().expect("nonempty");
        let center = center_block(cur)?;
        if find_atoms(cur, center).is_empty() {
            break;
        }
        let (next, step) = reduce_step(cur, steps.len(), &mut catalog)?;
        debug_assert!(
            next.num_vertices() + next.num_edges() < cur.num_vertices() + cur.num_edges(),
            "reduction must shrink the graph"
        );
        graphs.push(next);
        steps.push(step);
    }
    Ok(ReductionSeries { graphs, steps, catalog })
}

/// Φ: an automorphism of G_i induces one of G_{i+1}.
pub fn reduce_automorphism(
    pi: &DartPermutation,
    g: &Multigraph,
    next: &Multigraph,
    step: &ReductionStep,
) -> Result<DartPermutation, ReductionError> {
    if !pi.is_automorphism(g) {
        return Err(ReductionError::NotAutomorphism);
    }
    let vm = pi.vertex_map(g).ok_or(ReductionError::NotAutomorphism)?;
    let mut image = vec![usize::MAX; next.num_darts()];
    for (d, slot) in image.iter_mut().enumerate() {
        if let Some(src) = step.dinv[d] {
            *slot = step.dmap[pi.apply(src)].ok_or(ReductionError::NotAutomorphism)?;
        }
    }
    for (j, a) in step.atoms.iter().enumerate() {
        let j2 = step.atom_of_edge[g.edge_of(pi.apply(g.edge(a.edges[0]).darts[0]))]
            .ok_or(ReductionError::NotAutomorphism)?;
        let src = next.edge(step.repl_edge[j]).darts;
        let dst = next.edge(step.repl_edge[j2]).darts;
        if a.kind == AtomKind::Block {
            image[src[0]] = dst[0];
            image[src[1]] = dst[1];
        } else {
            let to0 = vm[step.ends[j][0]];
            if to0 == step.ends[j2][0] {
                image[src[0]] = dst[0];
                image[src[1]] = dst[1];
            } else if to0 == step.ends[j2][1] {
                image[src[0]] = dst[1];
                image[src[1]] = dst[0];
            } else {
                return Err(ReductionError::NotAutomorphism);
            }
        }
    }
    let out = DartPermutation { image };
    if !out.is_bijection() || !out.is_automorphism(next) {
        return Err(ReductionError::NotAutomorphism);
    }
    Ok(out)
}

/// Dart pairs of an isomorphism from atom `j` onto atom `j2` sending
/// `ends[j][s]` to `targets[s]` (G_i vertices).
pub fn atom_isomorphism(step: &ReductionStep, j: usize, j2: usize, targets: &[usize]) -> Option<Vec<(usize, usize)>> {
    let (a1, v1, d1) = &step.atom_graphs[j];
    let (a2, v2, d2) = &step.atom_graphs[j2];
    let mut m1 = vec![0u64; a1.num_vertices()];
    let mut m2 = vec![0u64; a2.num_vertices()];
    for (s, &x) in step.ends[j].iter().enumerate() {
        m1[v1.iter().position(|&y| y == x)?] = s as u64 + 1;
        m2[v2.iter().position(|&y| y == targets[s])?] = s as u64 + 1;
    }
    let (_, dm) = find_isomorphism(a1, Some(&m1), a2, Some(&m2))?;
    Some(dm.iter().enumerate().map(|(l, &t)| (d1[l], d2[t])).collect())
}

/// Lift an automorphism of G_{i+1} to G_i by mapping atoms onto atoms.
pub fn extend_automorphism(
    sigma: &DartPermutation,
    g: &Multigraph,
    next: &Multigraph,
    step: &ReductionStep,
) -> Result<DartPermutation, ReductionError> {
    if !sigma.is_automorphism(next) {
        return Err(ReductionError::NotAutomorphism);
    }
    let vm = sigma.vertex_map(next).ok_or(ReductionError::NotAutomorphism)?;
    let mut image = vec![usize::MAX; g.num_darts()];
    for d in 0..g.num_darts() {
        if let Some(x) = step.dmap[d] {
            image[d] = step.dinv[sigma.apply(x)].ok_or(ReductionError::NotAutomorphism)?;
        }
    }
    for j in 0..step.atoms.len() {
        let e2 = next.edge_of(sigma.apply(next.edge(step.repl_edge[j]).darts[0]));
        let j2 = *step.atom_of_repl.get(&e2).ok_or(ReductionError::NotAutomorphism)?;
        let targets: Vec<usize> = step.ends[j]
            .iter()
            .map(|&x| step.vinv[vm[step.vmap[x].expect("boundary kept")]].expect("boundary maps to boundary"))
            .collect();
        let pairs = atom_isomorphism(step, j, j2, &targets).ok_or(ReductionError::NotAutomorphism)?;
        for (x, y) in pairs {
            image[x] = y;
        }
    }
    let out = DartPermutation { image };
    if !out.is_bijection() || !out.is_automorphism(g) {
        return Err(ReductionError::NotAutomorphism);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators as gen;
    use crate::multigraph::parse_graph;
    use crate::perm::{automorphism_group, semiregular_subgroups_of_order, PermGroup, DEFAULT_BUDGET};

    fn theta(len: usize, paths: usize) -> Multigraph {
        // two poles joined by `paths` paths of `len` inner vertices
        let mut edges = Vec::new();
        let mut n = 2;
        for _ in 0..paths {
            let mut prev = 0;
            for _ in 0..len {
                edges.push((prev, n));
                prev = n;
                n += 1;
            }
            edges.push((prev, 1));
        }
        gen::from_edges(n, &edges)
    }

    fn check_series(g: &Multigraph) -> ReductionSeries {
        let s = reduction_series(g, catalog_base(&[g])).unwrap();
        let total = (Q::from_integer(g.num_vertices() as i64), Q::from_integer(g.num_edges() as i64));
        for gi in &s.graphs {
            assert_eq!(hatted_sizes(gi, &s.catalog).unwrap(), total);
        }
        for w in s.graphs.windows(2) {
            assert!(w[1].num_vertices() + w[1].num_edges() < w[0].num_vertices() + w[0].num_edges());
        }
        assert!(is_primitive(s.top()).unwrap());
        s
    }

    #[test]
    fn primitive_examples() {
        assert!(is_primitive(&gen::complete(4)).unwrap());
        let mut edges: Vec<(usize, usize)> = (0..8).map(|i| (i, (i + 1) % 8)).collect();
        for i in 0..4 {
            edges.push((2 * i, 8 + i));
        }
        assert!(is_primitive(&gen::from_edges(12, &edges)).unwrap());
        let dip = gen::from_edges(4, &[(0, 1), (0, 1), (0, 1), (0, 2), (2, 3), (3, 1)]);
        assert!(!is_primitive(&dip).unwrap());
        assert_eq!(is_primitive(&gen::path(3)), Err(ReductionError::NoCentralBlock));
    }

    #[test]
    fn k4_series_is_empty() {
        let s = check_series(&gen::complete(4));
        assert!(s.is_empty());
        let mut cat = Catalog::new(1);
        assert!(matches!(reduce_step(&gen::complete(4), 0, &mut cat), Err(ReductionError::Primitive)));
    }

    #[test]
    fn isomorphic_dipoles_share_a_color() {
        // square with two opposite sides doubled
        let g = gen::from_edges(4, &[(0, 1), (0, 1), (1, 2), (2, 3), (2, 3), (3, 0)]);
        let s = check_series(&g);
        let step = &s.steps[0];
        assert_eq!(step.atoms.len(), 2);
        assert!(step.atoms.iter().all(|a| a.kind == AtomKind::Dipole));
        assert_eq!(step.colors[0], step.colors[1]);
        let code = &s.catalog.entry(step.colors[0]).unwrap().code;
        assert_eq!(code.symmetry, Symmetry::Halvable);
        assert_eq!((code.vhat, code.ehat), (Q::from_integer(0), Q::from_integer(2)));
    }

    #[test]
    fn sizes_of_replaced_path() {
        // theta graph with three paths u-a-b-v: each path is a halvable atom
        let g = theta(2, 3);
        let s = check_series(&g);
        let step = &s.steps[0];
        assert_eq!(step.atoms.len(), 3);
        let code = &s.catalog.entry(step.colors[0]).unwrap().code;
        assert_eq!((code.vhat, code.ehat), (Q::from_integer(2), Q::from_integer(3)));
        let half = EdgeInfo { id: "h".into(), color: code.color, etype: EdgeType::Halvable, darts: [0, 0] };
        assert_eq!(s.catalog.element_sizes(&half).unwrap(), (Q::from_integer(1), Q::new(3, 2)));
    }

    #[test]
    fn pendant_trees_reduce_in_levels() {
        // cycle with a pendant path of length 2 at each vertex
        let mut edges: Vec<(usize, usize)> = (0..4).map(|i| (i, (i + 1) % 4)).collect();
        for i in 0..4 {
            edges.push((i, 4 + 2 * i));
            edges.push((4 + 2 * i, 5 + 2 * i));
        }
        let g = gen::from_edges(12, &edges);
        let s = check_series(&g);
        assert_eq!(s.len(), 1);
        assert_eq!(s.top().num_vertices(), 8);
        let code = &s.catalog.entry(s.steps[0].colors[0]).unwrap().code;
        assert_eq!((code.vhat, code.ehat), (Q::from_integer(1), Q::from_integer(2)));
    }

    #[test]
    fn directed_atoms_are_oriented_consistently() {
        let text = "\
vertex a
vertex b
vertex c
vertex d
vertex x
vertex y
edge e1 a b
edge e2 b c
edge e3 c d
edge e4 d a
edge f1 a x color=1
edge f2 x b color=2
edge g1 c y color=1
edge g2 y d color=2
";
        let g = parse_graph(text).unwrap();
        let s = check_series(&g);
        let step = &s.steps[0];
        let cls: Vec<_> = step.colors.iter().map(|&c| s.catalog.entry(c).unwrap().code.symmetry).collect();
        assert!(cls.contains(&Symmetry::Asymmetric));
        let grp = automorphism_group(&s.graphs[0], DEFAULT_BUDGET).unwrap();
        for p in grp.elements() {
            reduce_automorphism(p, &s.graphs[0], &s.graphs[1], step).unwrap();
        }
    }

    fn check_phi(g: &Multigraph) {
        let s = check_series(g);
        for (i, step) in s.steps.iter().enumerate() {
            let (gi, gn) = (&s.graphs[i], &s.graphs[i + 1]);
            let grp = automorphism_group(gi, DEFAULT_BUDGET).unwrap();
            let imgs: Vec<DartPermutation> =
                grp.elements().iter().map(|p| reduce_automorphism(p, gi, gn, step).unwrap()).collect();
            for a in 0..grp.order().min(12) {
                for b in 0..grp.order().min(12) {
                    let ab = grp.element(a).compose(grp.element(b));
                    let lhs = reduce_automorphism(&ab, gi, gn, step).unwrap();
                    assert_eq!(lhs, imgs[a].compose(&imgs[b]));
                }
            }
            // every automorphism of the next level extends
            let up = automorphism_group(gn, DEFAULT_BUDGET).unwrap();
            if up.order() <= 200 {
                for sgm in up.elements() {
                    let ext = extend_automorphism(sgm, gi, gn, step).unwrap();
                    assert_eq!(&reduce_automorphism(&ext, gi, gn, step).unwrap(), sgm);
                }
            }
            for k in [2, 3, 4] {
                for sub in semiregular_subgroups_of_order(gi, k, DEFAULT_BUDGET).unwrap() {
                    let img: Vec<DartPermutation> =
                        sub.elements().iter().map(|p| reduce_automorphism(p, gi, gn, step).unwrap()).collect();
                    let grp2 = PermGroup::from_elements(img).unwrap();
                    assert_eq!(grp2.order(), k);
                }
            }
        }
    }

    #[test]
    fn phi_is_a_homomorphism() {
        check_phi(&theta(2, 3));
        check_phi(&gen::from_edges(4, &[(0, 1), (0, 1), (1, 2), (2, 3), (2, 3), (3, 0)]));
        let mut edges: Vec<(usize, usize)> = (0..6).map(|i| (i, (i + 1) % 6)).collect();
        for i in 0..6 {
            edges.push((i, 6 + i));
            edges.push((6 + i, 12 + i));
        }
        check_phi(&gen::from_edges(18, &edges));
        // cube with every edge subdivided
        let cube = gen::cube();
        let mut es = Vec::new();
        let mut n = cube.num_vertices();
        for e in 0..cube.num_edges() {
            let (a, b) = cube.endpoints(e);
            es.push((a, n));
            es.push((n, b));
            n += 1;
        }
        check_phi(&gen::from_edges(n, &es));
    }
}
