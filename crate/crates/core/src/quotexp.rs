//! Quotients of atoms, expansion of quotients H_{i+1} -> H_i and of groups
//! Γ_{i+1} -> Γ_i.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canon::{canonical_form, find_isomorphism};
use crate::covering::quotient_unchecked;
use crate::decomp::{atom_plus, can_flip, Atom, AtomKind};
use crate::multigraph::{Color, EdgeType, GraphBuilder, Multigraph};
use crate::perm::{automorphisms_with_marks, orbits, DartPermutation, PermError, PermGroup, DEFAULT_BUDGET};
use crate::planar::aut_essentially_3connected;
use crate::reduction::{Catalog, CatalogEntry, ReductionSeries, ReductionStep, PLACEHOLDER};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExpandError {
    #[error("no choice given for half-edge {0}")]
    MissingChoice(String),
    #[error("edge colour {0} is not in the catalog")]
    UnknownColor(Color),
    #[error("choice for {0} names no half-quotient")]
    BadChoice(String),
    #[error("inconsistent choices: {0}")]
    InconsistentChoices(String),
    #[error(transparent)]
    Perm(#[from] PermError),
}

/// Chosen half-quotient for one half-edge, with choices for the half-edges
/// inside that half-quotient keyed by their ids there.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Choice {
    pub alt: usize,
    pub nested: Choices,
}

pub type Choices = BTreeMap<String, Choice>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum QuotientVariant {
    Edge,
    Loop,
    Half,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Projection {
    C1,
    C2,
    C3,
}

/// A half-quotient: the involution on the representative and the quotient
/// graph, whose vertex 0 is the image of both boundary vertices.
#[derive(Clone, Debug)]
pub struct HalfQuotient {
    pub tau: DartPermutation,
    pub graph: Multigraph,
}

#[derive(Clone, Debug)]
pub struct AtomQuotient {
    pub variant: QuotientVariant,
    pub graph: Multigraph,
    /// Attachment vertices in the fragment: u, v for edges, w otherwise.
    pub attach: Vec<usize>,
    pub tau: Option<DartPermutation>,
    pub ell: Option<Vec<usize>>,
}

pub fn edge_quotient(rep: &Multigraph, kind: AtomKind) -> AtomQuotient {
    let attach = if kind == AtomKind::Block { vec![0] } else { vec![0, 1] };
    AtomQuotient { variant: QuotientVariant::Edge, graph: rep.clone(), attach, tau: None, ell: None }
}

pub fn loop_quotient(rep: &Multigraph) -> AtomQuotient {
    AtomQuotient { variant: QuotientVariant::Loop, graph: identify_boundary(rep), attach: vec![0], tau: None, ell: None }
}

/// Vertex 1 merged into vertex 0; ids are kept.
pub fn identify_boundary(rep: &Multigraph) -> Multigraph {
    let mut b = GraphBuilder::new();
    let mut map = vec![0usize; rep.num_vertices()];
    for v in 0..rep.num_vertices() {
        if v == 1 {
            continue;
        }
        map[v] = b.add_vertex(rep.vertex_id(v), rep.vertex_color(v));
    }
    map[1] = 0;
    for ed in rep.edges() {
        let u = map[rep.vertex_of(ed.darts[0])];
        if ed.is_half() {
            b.add_half(&ed.id, u, ed.color);
        } else {
            let v = map[rep.vertex_of(ed.darts[1])];
            b.add_edge_with_darts(&ed.id, rep.dart_id(ed.darts[0]), rep.dart_id(ed.darts[1]), u, v, ed.color, ed.etype);
        }
    }
    b.build()
}

fn flips_allowed(a: &Multigraph, img: &[usize], base: Color) -> bool {
    a.edges().iter().all(|ed| ed.is_half() || img[ed.darts[0]] != ed.darts[1] || can_flip(ed.etype, ed.color, base))
}

/// Semiregular involutions of a proper atom swapping its boundary, one per
/// isomorphism class of the resulting quotient.
pub fn proper_half_quotients(rep: &Multigraph, base: Color) -> Vec<HalfQuotient> {
    let nd = rep.num_darts();
    let mut cands: Vec<DartPermutation> = match aut_essentially_3connected(&atom_plus(rep)) {
        Ok(grp) => grp.elements().iter().map(|p| DartPermutation { image: p.image[..nd].to_vec() }).collect(),
        Err(_) => {
            let mut marks = vec![0u64; rep.num_vertices()];
            marks[0] = 1;
            marks[1] = 1;
            automorphisms_with_marks(rep, Some(&marks), true, DEFAULT_BUDGET).expect("atom automorphisms within budget")
        }
    };
    cands.sort_by(|a, b| a.image.cmp(&b.image));
    let mut out: Vec<HalfQuotient> = Vec::new();
    let mut seen = HashSet::new();
    for tau in cands {
        let Some(vm) = tau.vertex_map(rep) else { continue };
        if vm[0] != 1 || vm.iter().enumerate().any(|(x, &y)| x == y) {
            continue;
        }
        if (0..nd).any(|d| tau.image[d] == d || tau.image[tau.image[d]] != d) || !flips_allowed(rep, &tau.image, base) {
            continue;
        }
        let grp = PermGroup::from_elements(vec![DartPermutation::identity(nd), tau.clone()]).expect("involution");
        let (q, _) = quotient_unchecked(rep, &grp).expect("automorphism");
        if seen.insert(canonical_form(&q, Some(&pin0(&q))).cert) {
            out.push(HalfQuotient { tau, graph: q });
        }
    }
    out
}

fn pin0(g: &Multigraph) -> Vec<u64> {
    (0..g.num_vertices()).map(|v| u64::from(v == 0)).collect()
}

/// Edge classes of a halvable dipole. Flippable edges are grouped by
/// (colour, type); the rest pair up into loops in every half-quotient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DipoleClasses {
    pub classes: Vec<Vec<usize>>,
    pub forced: Vec<(usize, usize)>,
}

pub fn dipole_classes(rep: &Multigraph, base: Color) -> Option<DipoleClasses> {
    let mut flip: BTreeMap<(Color, u64), Vec<usize>> = BTreeMap::new();
    let mut fixed: BTreeMap<(Color, u64), Vec<usize>> = BTreeMap::new();
    let mut dir: BTreeMap<Color, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for (e, ed) in rep.edges().iter().enumerate() {
        if ed.is_half() || rep.is_loop(e) {
            return None;
        }
        match ed.etype {
            EdgeType::Directed => {
                let d = dir.entry(ed.color).or_default();
                if rep.vertex_of(ed.darts[0]) == 0 {
                    d.0.push(e);
                } else {
                    d.1.push(e);
                }
            }
            t if can_flip(t, ed.color, base) => flip.entry((ed.color, t.code())).or_default().push(e),
            t => fixed.entry((ed.color, t.code())).or_default().push(e),
        }
    }
    if rep.vertex_color(0) != rep.vertex_color(1) {
        return None;
    }
    let mut forced = Vec::new();
    for (a, b) in dir.values() {
        if a.len() != b.len() {
            return None;
        }
        forced.extend(a.iter().copied().zip(b.iter().copied()));
    }
    for es in fixed.values() {
        if es.len() % 2 == 1 {
            return None;
        }
        forced.extend(es.chunks(2).map(|c| (c[0], c[1])));
    }
    Some(DipoleClasses { classes: flip.into_values().collect(), forced })
}

impl DipoleClasses {
    /// Number of half-quotients: Π (⌊m_i/2⌋ + 1).
    pub fn count(&self) -> usize {
        self.classes.iter().fold(1usize, |acc, c| acc.saturating_mul(c.len() / 2 + 1))
    }

    /// Loop counts ℓ_i encoded by `alt` in mixed radix.
    pub fn ell(&self, mut alt: usize) -> Option<Vec<usize>> {
        if alt >= self.count() {
            return None;
        }
        let mut out = Vec::new();
        for c in &self.classes {
            let r = c.len() / 2 + 1;
            out.push(alt % r);
            alt /= r;
        }
        Some(out)
    }

    pub fn alt_of(&self, ell: &[usize]) -> usize {
        let mut alt = 0;
        let mut mult = 1;
        for (c, &l) in self.classes.iter().zip(ell) {
            alt += l * mult;
            mult *= c.len() / 2 + 1;
        }
        alt
    }

    /// The involution with ℓ_i loops per class: the first 2ℓ_i edges of a
    /// class pair up consecutively, the others are flipped.
    pub fn involution(&self, rep: &Multigraph, ell: &[usize]) -> DartPermutation {
        let mut image: Vec<usize> = (0..rep.num_darts()).collect();
        let at = |e: usize, v: usize| {
            let [d0, d1] = rep.edge(e).darts;
            if rep.vertex_of(d0) == v {
                d0
            } else {
                d1
            }
        };
        let pair = |a: usize, b: usize, image: &mut Vec<usize>| {
            image[at(a, 0)] = at(b, 1);
            image[at(b, 1)] = at(a, 0);
            image[at(a, 1)] = at(b, 0);
            image[at(b, 0)] = at(a, 1);
        };
        for &(a, b) in &self.forced {
            pair(a, b, &mut image);
        }
        for (c, &l) in self.classes.iter().zip(ell) {
            for i in 0..l {
                pair(c[2 * i], c[2 * i + 1], &mut image);
            }
            for &e in &c[2 * l..] {
                let [d0, d1] = rep.edge(e).darts;
                image[d0] = d1;
                image[d1] = d0;
            }
        }
        DartPermutation { image }
    }

    /// ℓ-vector of an involution of the dipole (edges paired vs flipped).
    pub fn ell_of(&self, rep: &Multigraph, tau: &DartPermutation) -> Vec<usize> {
        self.classes
            .iter()
            .map(|c| {
                let flipped = c.iter().filter(|&&e| tau.apply(rep.edge(e).darts[0]) == rep.edge(e).darts[1]).count();
                (c.len() - flipped) / 2
            })
            .collect()
    }
}

fn half_from_tau(rep: &Multigraph, tau: DartPermutation) -> HalfQuotient {
    let grp = PermGroup::from_elements(vec![DartPermutation::identity(rep.num_darts()), tau.clone()]).expect("involution");
    let (graph, _) = quotient_unchecked(rep, &grp).expect("automorphism");
    HalfQuotient { tau, graph }
}

/// Number of half-quotient alternatives of a catalog entry.
pub fn half_alt_count(entry: &CatalogEntry, base: Color) -> usize {
    match entry.code.kind {
        AtomKind::Proper => entry.half_quotients.len(),
        AtomKind::Dipole => dipole_classes(&entry.rep, base).map(|c| c.count()).unwrap_or(0),
        AtomKind::Block => 0,
    }
}

pub fn half_quotient(entry: &CatalogEntry, alt: usize, base: Color) -> Option<HalfQuotient> {
    match entry.code.kind {
        AtomKind::Proper => entry.half_quotients.get(alt).cloned(),
        AtomKind::Dipole => {
            let cls = dipole_classes(&entry.rep, base)?;
            let ell = cls.ell(alt)?;
            Some(half_from_tau(&entry.rep, cls.involution(&entry.rep, &ell)))
        }
        AtomKind::Block => None,
    }
}

/// All half-quotients of an atom representative, as an iterator (dipoles
/// may have exponentially many).
pub fn half_quotients<'a>(
    rep: &'a Multigraph,
    kind: AtomKind,
    base: Color,
) -> Box<dyn Iterator<Item = AtomQuotient> + 'a> {
    let wrap = |h: HalfQuotient, ell: Option<Vec<usize>>| AtomQuotient {
        variant: QuotientVariant::Half,
        graph: h.graph,
        attach: vec![0],
        tau: Some(h.tau),
        ell,
    };
    match kind {
        AtomKind::Proper => Box::new(proper_half_quotients(rep, base).into_iter().map(move |h| wrap(h, None))),
        AtomKind::Dipole => match dipole_classes(rep, base) {
            Some(cls) => Box::new((0..cls.count()).map(move |alt| {
                let ell = cls.ell(alt).expect("in range");
                wrap(half_from_tau(rep, cls.involution(rep, &ell)), Some(ell))
            })),
            None => Box::new(std::iter::empty()),
        },
        AtomKind::Block => Box::new(std::iter::empty()),
    }
}

/// C3 if a non-identity element keeps the interior, else C2 if the two
/// boundary vertices share an orbit, else C1.
pub fn classify_projection(g: &Multigraph, atom: &Atom, grp: &PermGroup) -> Result<Projection, ExpandError> {
    let edges: HashSet<usize> = atom.edges.iter().copied().collect();
    let mut swap = false;
    for p in grp.elements() {
        if p.is_identity() {
            continue;
        }
        if !p.is_automorphism(g) {
            return Err(PermError::NotASubgroup(0).into());
        }
        if atom.edges.iter().all(|&e| edges.contains(&g.edge_of(p.apply(g.edge(e).darts[0])))) {
            return Ok(Projection::C3);
        }
        if atom.boundary.len() == 2 {
            let vm = p.vertex_map(g).expect("automorphism");
            swap |= vm[atom.boundary[0]] == atom.boundary[1];
        }
    }
    Ok(if swap { Projection::C2 } else { Projection::C1 })
}

/// Fragment glued in place of one element.
struct Fragment {
    graph: Multigraph,
    /// Fragment vertex -> host vertex for the attachment vertices.
    attach: Vec<(usize, usize)>,
    nested: Option<Choices>,
}

/// Expand catalog elements of `h`. With `level` only that level's colours
/// are expanded; half-edges are expanded only when `choices` is given.
/// Returns the new graph and the choices for its half-edges.
pub fn expand_elements(
    h: &Multigraph,
    catalog: &Catalog,
    level: Option<usize>,
    choices: Option<&Choices>,
) -> Result<(Multigraph, Choices), ExpandError> {
    let selected = |c: Color| -> Result<Option<&CatalogEntry>, ExpandError> {
        if c < catalog.base {
            return Ok(None);
        }
        let ent = catalog.entry(c).ok_or(ExpandError::UnknownColor(c))?;
        Ok(if level.is_none_or(|l| ent.code.level == l) { Some(ent) } else { None })
    };
    // leaves of pendant edges that get expanded disappear
    let mut drop_v = vec![false; h.num_vertices()];
    let mut frags: Vec<Option<Fragment>> = Vec::with_capacity(h.num_edges());
    for (e, ed) in h.edges().iter().enumerate() {
        let Some(ent) = selected(ed.color)? else {
            frags.push(None);
            continue;
        };
        let x = h.vertex_of(ed.darts[0]);
        let frag = if ed.is_half() {
            let Some(ch) = choices else {
                frags.push(None);
                continue;
            };
            let c = ch.get(&ed.id).ok_or_else(|| ExpandError::MissingChoice(ed.id.clone()))?;
            let hq = half_quotient(ent, c.alt, catalog.base).ok_or_else(|| ExpandError::BadChoice(ed.id.clone()))?;
            Fragment { graph: hq.graph, attach: vec![(0, x)], nested: Some(c.nested.clone()) }
        } else if h.is_loop(e) {
            let lq = ent.loop_quotient.clone().ok_or(ExpandError::UnknownColor(ed.color))?;
            Fragment { graph: lq, attach: vec![(0, x)], nested: None }
        } else if ent.code.kind == AtomKind::Block {
            let y = h.vertex_of(ed.darts[1]);
            let (attach, leaf) = if h.vertex_color(y) == PLACEHOLDER { (x, y) } else { (y, x) };
            drop_v[leaf] = true;
            Fragment { graph: ent.rep.clone(), attach: vec![(0, attach)], nested: None }
        } else {
            let y = h.vertex_of(ed.darts[1]);
            Fragment { graph: ent.rep.clone(), attach: vec![(0, x), (1, y)], nested: None }
        };
        frags.push(Some(frag));
    }
    let mut b = GraphBuilder::new();
    let mut vmap = vec![usize::MAX; h.num_vertices()];
    for v in 0..h.num_vertices() {
        if !drop_v[v] {
            vmap[v] = b.add_vertex(h.vertex_id(v), h.vertex_color(v));
        }
    }
    let mut out_choices = Choices::new();
    for (e, ed) in h.edges().iter().enumerate() {
        match &frags[e] {
            None => {
                let u = vmap[h.vertex_of(ed.darts[0])];
                if ed.is_half() {
                    b.add_half(&ed.id, u, ed.color);
                    if let Some(c) = choices.and_then(|m| m.get(&ed.id)) {
                        out_choices.insert(ed.id.clone(), c.clone());
                    }
                } else {
                    let v = vmap[h.vertex_of(ed.darts[1])];
                    b.add_edge_with_darts(&ed.id, h.dart_id(ed.darts[0]), h.dart_id(ed.darts[1]), u, v, ed.color, ed.etype);
                }
            }
            Some(fr) => {
                let f = &fr.graph;
                let mut fmap = vec![usize::MAX; f.num_vertices()];
                for &(fv, hv) in &fr.attach {
                    fmap[fv] = vmap[hv];
                }
                for fv in 0..f.num_vertices() {
                    if fmap[fv] == usize::MAX {
                        fmap[fv] = b.add_vertex(&format!("{}/{}", ed.id, f.vertex_id(fv)), f.vertex_color(fv));
                    }
                }
                for fe in f.edges() {
                    let u = fmap[f.vertex_of(fe.darts[0])];
                    let id = format!("{}/{}", ed.id, fe.id);
                    if fe.is_half() {
                        b.add_half(&id, u, fe.color);
                        if let Some(c) = fr.nested.as_ref().and_then(|m| m.get(&fe.id)) {
                            out_choices.insert(id, c.clone());
                        }
                    } else {
                        let v = fmap[f.vertex_of(fe.darts[1])];
                        let d0 = format!("{}/{}", ed.id, f.dart_id(fe.darts[0]));
                        let d1 = format!("{}/{}", ed.id, f.dart_id(fe.darts[1]));
                        b.add_edge_with_darts(&id, &d0, &d1, u, v, fe.color, fe.etype);
                    }
                }
            }
        }
    }
    Ok((b.build(), out_choices))
}

/// H_{i+1} -> H_i: expand the level-`level` elements, half-edges by the
/// given choices.
pub fn expand_quotient(
    h: &Multigraph,
    catalog: &Catalog,
    level: usize,
    choices: &Choices,
) -> Result<(Multigraph, Choices), ExpandError> {
    expand_elements(h, catalog, Some(level), Some(choices))
}

/// Expand every catalog element except half-edges, recursively.
pub fn expand_fixed(h: &Multigraph, catalog: &Catalog) -> Result<Multigraph, ExpandError> {
    let mut cur = h.clone();
    loop {
        let pending = cur.edges().iter().any(|e| !e.is_half() && e.color >= catalog.base);
        if !pending {
            return Ok(cur);
        }
        cur = expand_elements(&cur, catalog, None, None)?.0;
    }
}

/// Choices keyed by edge index of the graph at one level. A flipped edge
/// orbit carries one entry, on any of its edges.
pub type EdgeChoices = HashMap<usize, Choice>;

fn choice_in_orbit<'a>(orbit: &[usize], choices: &'a EdgeChoices) -> Option<&'a Choice> {
    orbit.iter().find_map(|e| choices.get(e))
}

/// Dart map of an isomorphism rep -> atom j of the step, boundary in order.
fn rep_to_atom(rep: &Multigraph, step: &ReductionStep, j: usize) -> Option<Vec<usize>> {
    let (a, vl, dl) = &step.atom_graphs[j];
    let mut m1 = vec![0u64; rep.num_vertices()];
    let mut m2 = vec![0u64; a.num_vertices()];
    for (s, &x) in step.ends[j].iter().enumerate() {
        m1[s] = s as u64 + 1;
        m2[vl.iter().position(|&y| y == x)?] = s as u64 + 1;
    }
    let (_, dm) = find_isomorphism(rep, Some(&m1), a, Some(&m2))?;
    Some(dm.iter().map(|&l| dl[l]).collect())
}

/// Γ_{i+1} on G_{i+1} -> Γ_i on G_i, using the half-quotient choices for
/// flipped replacement edges. Returns Γ_i and the choices left for lower
/// levels, re-keyed to G_i edges.
pub fn expand_group(
    grp: &PermGroup,
    series: &ReductionSeries,
    level: usize,
    choices: &EdgeChoices,
) -> Result<(PermGroup, EdgeChoices), ExpandError> {
    let step = &series.steps[level];
    let gi = &series.graphs[level];
    let gn = &series.graphs[level + 1];
    let cat = &series.catalog;
    let nd = gi.num_darts();
    let elems = grp.elements();
    let mut images: Vec<Vec<usize>> = vec![vec![usize::MAX; nd]; elems.len()];
    for (p, pi) in elems.iter().enumerate() {
        for d in 0..nd {
            if let Some(x) = step.dmap[d] {
                images[p][d] = step.dinv[pi.apply(x)]
                    .ok_or_else(|| ExpandError::InconsistentChoices("element moves a kept dart onto a replacement".into()))?;
            }
        }
    }
    let (_, dorb) = orbits(grp, gn)?;
    let mut edge_orbit: HashMap<usize, Vec<usize>> = HashMap::new();
    for o in &dorb {
        let mut es: Vec<usize> = o.iter().map(|&d| gn.edge_of(d)).collect();
        es.sort_unstable();
        es.dedup();
        for &e in &es {
            edge_orbit.insert(e, es.clone());
        }
    }
    let mut out_choices = EdgeChoices::new();
    for (&e, c) in choices {
        if let Some(src) = step.dinv[gn.edge(e).darts[0]] {
            out_choices.insert(gi.edge_of(src), c.clone());
        }
    }
    let target_atom = |pi: &DartPermutation, j: usize| -> usize {
        let e2 = gn.edge_of(pi.apply(gn.edge(step.repl_edge[j]).darts[0]));
        step.atom_of_repl[&e2]
    };
    let mut done = vec![false; step.atoms.len()];
    for j0 in 0..step.atoms.len() {
        if done[j0] {
            continue;
        }
        // π_m: first element sending atom j0 to atom m
        let mut rep_elem: BTreeMap<usize, usize> = BTreeMap::new();
        let mut stab = None;
        for (p, pi) in elems.iter().enumerate() {
            let m = target_atom(pi, j0);
            rep_elem.entry(m).or_insert(p);
            if m == j0 && !pi.is_identity() {
                stab = Some(p);
            }
        }
        let vm_of = |p: usize| elems[p].vertex_map(gn).expect("automorphism");
        let mut sigma: BTreeMap<usize, HashMap<usize, usize>> = BTreeMap::new();
        for (&m, &p) in &rep_elem {
            done[m] = true;
            let vm = vm_of(p);
            let targets: Vec<usize> = step.ends[j0]
                .iter()
                .map(|&x| step.vinv[vm[step.vmap[x].expect("kept")]].expect("boundary"))
                .collect();
            let pairs = crate::reduction::atom_isomorphism(step, j0, m, &targets)
                .ok_or_else(|| ExpandError::InconsistentChoices(format!("atoms {j0} and {m} differ")))?;
            sigma.insert(m, pairs.into_iter().collect());
        }
        // τ on A_{j0} for a flipped replacement edge
        let tau: Option<HashMap<usize, usize>> = match stab {
            None => None,
            Some(_) => {
                let re = step.repl_edge[j0];
                let c = choice_in_orbit(&edge_orbit[&re], choices)
                    .ok_or_else(|| ExpandError::MissingChoice(gn.edge(re).id.clone()))?;
                let ent = cat.entry(step.colors[j0]).ok_or(ExpandError::UnknownColor(step.colors[j0]))?;
                let hq = half_quotient(ent, c.alt, cat.base).ok_or_else(|| ExpandError::BadChoice(gn.edge(re).id.clone()))?;
                let rho = rep_to_atom(&ent.rep, step, j0)
                    .ok_or_else(|| ExpandError::InconsistentChoices("atom differs from its class".into()))?;
                let mut t = HashMap::new();
                for d in 0..ent.rep.num_darts() {
                    t.insert(rho[d], rho[hq.tau.apply(d)]);
                }
                // nested choices move onto the atom's edges in G_i
                for (hid, nc) in &c.nested {
                    let re_idx = ent.rep.edge_index(hid).ok_or_else(|| ExpandError::BadChoice(hid.clone()))?;
                    let gd = rho[ent.rep.edge(re_idx).darts[0]];
                    out_choices.insert(gi.edge_of(gd), nc.clone());
                }
                Some(t)
            }
        };
        let sigma_inv: BTreeMap<usize, HashMap<usize, usize>> =
            sigma.iter().map(|(&m, s)| (m, s.iter().map(|(&a, &b)| (b, a)).collect())).collect();
        for (p, pi) in elems.iter().enumerate() {
            for (&m, &pm) in &rep_elem {
                let m2 = target_atom(pi, m);
                let pm2 = rep_elem[&m2];
                let prod = pi.compose(&elems[pm]);
                let eps = if prod == elems[pm2] {
                    false
                } else {
                    let s = stab.ok_or_else(|| ExpandError::InconsistentChoices("coset mismatch".into()))?;
                    if prod != elems[pm2].compose(&elems[s]) {
                        return Err(ExpandError::InconsistentChoices("coset mismatch".into()));
                    }
                    true
                };
                for (&d, &d0) in &sigma_inv[&m] {
                    let mut x = d0;
                    if eps {
                        x = tau.as_ref().expect("stabiliser gives τ")[&x];
                    }
                    images[p][d] = sigma[&m2][&x];
                }
            }
        }
    }
    let new_elems: Vec<DartPermutation> = images.into_iter().map(|image| DartPermutation { image }).collect();
    for p in &new_elems {
        if !p.is_bijection() || !p.is_automorphism(gi) {
            return Err(ExpandError::InconsistentChoices("extension is not an automorphism".into()));
        }
    }
    Ok((PermGroup::from_elements(new_elems)?, out_choices))
}

/// Half-quotient choices realised by a concrete group: the inverse of
/// `expand_group`, used to replay Γ₀ through the series. `groups[i]` acts
/// on G_i. Returns choices keyed by the half-edge ids of G_r/Γ_r.
pub fn choices_from_groups(series: &ReductionSeries, groups: &[PermGroup]) -> Result<Choices, ExpandError> {
    let r = series.len();
    let top = series.top();
    let (_, dorb) = orbits(&groups[r], top)?;
    let mut out = Choices::new();
    for o in &dorb {
        let e = top.edge_of(o[0]);
        let ed = top.edge(e);
        if ed.is_half() || ed.color < series.catalog.base {
            continue;
        }
        if groups[r].elements().iter().any(|p| p.apply(ed.darts[0]) == ed.darts[1]) {
            let rep_e = o.iter().map(|&d| top.edge_of(d)).min().expect("nonempty");
            out.insert(top.edge(rep_e).id.clone(), choice_for_edge(series, groups, r, rep_e)?);
        }
    }
    Ok(out)
}

/// Choice for an edge of G_i flipped by Γ_i carrying a catalog colour.
fn choice_for_edge(series: &ReductionSeries, groups: &[PermGroup], i: usize, e: usize) -> Result<Choice, ExpandError> {
    let cat = &series.catalog;
    let color = series.graphs[i].edge(e).color;
    let ent = cat.entry(color).ok_or(ExpandError::UnknownColor(color))?;
    let j = ent.code.level;
    let id = series.graphs[i].edge(e).id.clone();
    // the edge is untouched from G_{j+1} up to G_i
    let gn = &series.graphs[j + 1];
    let en = gn.edge_index(&id).ok_or_else(|| ExpandError::InconsistentChoices(id.clone()))?;
    let step = &series.steps[j];
    let m = *step.atom_of_repl.get(&en).ok_or_else(|| ExpandError::InconsistentChoices(id.clone()))?;
    let gj = &series.graphs[j];
    let a_edges: HashSet<usize> = step.atoms[m].edges.iter().copied().collect();
    let tau_g = groups[j]
        .elements()
        .iter()
        .find(|p| !p.is_identity() && a_edges.contains(&gj.edge_of(p.apply(gj.edge(step.atoms[m].edges[0]).darts[0]))))
        .ok_or_else(|| ExpandError::InconsistentChoices(format!("{id} is not flipped")))?;
    let rho = rep_to_atom(&ent.rep, step, m).ok_or_else(|| ExpandError::InconsistentChoices(id.clone()))?;
    let rho_inv: HashMap<usize, usize> = rho.iter().enumerate().map(|(a, &b)| (b, a)).collect();
    let tau = DartPermutation { image: (0..ent.rep.num_darts()).map(|d| rho_inv[&tau_g.apply(rho[d])]).collect() };
    let actual = half_from_tau(&ent.rep, tau.clone());
    let (alt, template) = match ent.code.kind {
        AtomKind::Dipole => {
            let cls = dipole_classes(&ent.rep, cat.base).ok_or_else(|| ExpandError::BadChoice(id.clone()))?;
            let alt = cls.alt_of(&cls.ell_of(&ent.rep, &tau));
            (alt, half_quotient(ent, alt, cat.base).expect("alt in range"))
        }
        _ => {
            let key = canonical_form(&actual.graph, Some(&pin0(&actual.graph))).cert;
            let alt = ent
                .half_quotients
                .iter()
                .position(|h| canonical_form(&h.graph, Some(&pin0(&h.graph))).cert == key)
                .ok_or_else(|| ExpandError::BadChoice(id.clone()))?;
            (alt, ent.half_quotients[alt].clone())
        }
    };
    // template halves -> actual halves -> rep edges -> G_j edges
    let mut nested = Choices::new();
    let m1 = pin0(&template.graph);
    let m2 = pin0(&actual.graph);
    let (_, dm) = find_isomorphism(&template.graph, Some(&m1), &actual.graph, Some(&m2))
        .ok_or_else(|| ExpandError::InconsistentChoices(id.clone()))?;
    for te in template.graph.edges() {
        if !te.is_half() || te.color < cat.base {
            continue;
        }
        let ae = actual.graph.edge(actual.graph.edge_of(dm[te.darts[0]]));
        let rep_e = ent.rep.edge_index(&ae.id).expect("quotient keeps edge ids");
        let ge = gj.edge_of(rho[ent.rep.edge(rep_e).darts[0]]);
        nested.insert(te.id.clone(), choice_for_edge(series, groups, j, ge)?);
    }
    Ok(Choice { alt, nested })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators as gen;
    use crate::reduction::{catalog_base, reduce_automorphism, reduction_series};
    use crate::perm::semiregular_subgroups_of_order;

    #[test]
    fn path_atom_quotients() {
        let rep = gen::from_edges(4, &[(0, 2), (2, 3), (3, 1)]);
        assert_eq!(edge_quotient(&rep, AtomKind::Proper).graph, rep);
        let lq = loop_quotient(&rep).graph;
        assert_eq!((lq.num_vertices(), lq.num_edges()), (3, 3));
        assert!(crate::planar::is_cycle(&lq));
        let hs = proper_half_quotients(&rep, 1);
        assert_eq!(hs.len(), 1);
        let q = &hs[0].graph;
        assert_eq!((q.num_vertices(), q.num_edges(), q.num_halves()), (2, 2, 1));
    }

    #[test]
    fn dipole_loop_quotient_and_halves() {
        let rep = gen::from_edges(2, &[(0, 1), (0, 1), (0, 1)]);
        let lq = identify_boundary(&rep);
        assert_eq!((lq.num_vertices(), lq.num_edges()), (1, 3));
        assert!((0..3).all(|e| lq.is_loop(e)));
        let hs: Vec<_> = half_quotients(&rep, AtomKind::Dipole, 1).collect();
        assert_eq!(hs.len(), 2);
        for h in &hs {
            assert_eq!(h.graph.num_vertices(), 1);
        }
    }

    #[test]
    fn dipole_with_colour_pairs() {
        for c in 1..=4u32 {
            let spec: Vec<(u32, EdgeType, bool)> =
                (0..c).flat_map(|i| [(i + 1, EdgeType::Halvable, false), (i + 1, EdgeType::Halvable, false)]).collect();
            let rep = gen::dipole(&spec);
            let hs: Vec<_> = half_quotients(&rep, AtomKind::Dipole, 100).collect();
            assert_eq!(hs.len(), 1 << c);
            let certs: HashSet<_> = hs.iter().map(|h| canonical_form(&h.graph, None).cert).collect();
            assert_eq!(certs.len(), 1 << c);
        }
    }

    #[test]
    fn projection_cases() {
        let g = gen::from_edges(6, &[(0, 2), (2, 3), (3, 1), (0, 4), (4, 1), (0, 5), (5, 1)]);
        let t = crate::decomp::build_block_tree(&g);
        let atoms = crate::decomp::find_atoms_with(&g, &t, t.center(), false);
        let trivial = PermGroup::trivial(g.num_darts());
        for a in &atoms {
            assert_eq!(classify_projection(&g, a, &trivial).unwrap(), Projection::C1);
        }
        let subs = semiregular_subgroups_of_order(&g, 2, DEFAULT_BUDGET).unwrap();
        assert!(!subs.is_empty());
        let long = atoms.iter().find(|a| a.interior.len() == 2).unwrap();
        let cases: HashSet<Projection> = subs.iter().map(|s| classify_projection(&g, long, s).unwrap()).collect();
        assert!(cases.contains(&Projection::C3));
    }

    fn commute(g: &Multigraph) {
        let s = reduction_series(g, catalog_base(&[g])).unwrap();
        let r = s.len();
        for k in [2, 3, 4, 6] {
            for sub in semiregular_subgroups_of_order(g, k, DEFAULT_BUDGET).unwrap() {
                let mut groups = vec![sub.clone()];
                for i in 0..r {
                    let imgs: Vec<DartPermutation> = groups[i]
                        .elements()
                        .iter()
                        .map(|p| reduce_automorphism(p, &s.graphs[i], &s.graphs[i + 1], &s.steps[i]).unwrap())
                        .collect();
                    groups.push(PermGroup::from_elements(imgs).unwrap());
                }
                let (hr, _) = quotient_unchecked(s.top(), &groups[r]).unwrap();
                let mut ch = choices_from_groups(&s, &groups).unwrap();
                let mut h = hr;
                for i in (0..r).rev() {
                    let (nh, nc) = expand_quotient(&h, &s.catalog, i, &ch).unwrap();
                    h = nh;
                    ch = nc;
                }
                let (direct, _) = quotient_unchecked(g, &sub).unwrap();
                assert_eq!(canonical_form(&h, None).cert, canonical_form(&direct, None).cert);

                // group expansion with the same choices
                let mut ec: EdgeChoices = choices_from_groups(&s, &groups)
                    .unwrap()
                    .into_iter()
                    .map(|(id, c)| (s.top().edge_index(&id).unwrap(), c))
                    .collect();
                let mut grp = groups[r].clone();
                for i in (0..r).rev() {
                    let (ng, nc) = expand_group(&grp, &s, i, &ec).unwrap();
                    grp = ng;
                    ec = nc;
                }
                assert_eq!(grp.order(), k);
                let (q2, _) = quotient_unchecked(g, &grp).unwrap();
                assert_eq!(canonical_form(&q2, None).cert, canonical_form(&direct, None).cert);
            }
        }
    }

    #[test]
    fn reduction_and_expansion_commute() {
        commute(&gen::from_edges(6, &[(0, 2), (2, 3), (3, 1), (0, 4), (4, 1), (0, 5), (5, 1)]));
        commute(&gen::from_edges(4, &[(0, 1), (0, 1), (1, 2), (2, 3), (2, 3), (3, 0)]));
        let mut edges: Vec<(usize, usize)> = (0..6).map(|i| (i, (i + 1) % 6)).collect();
        for i in 0..6 {
            edges.push((i, 6 + i));
            edges.push((6 + i, 12 + i));
        }
        commute(&gen::from_edges(18, &edges));
        let cube = gen::cube();
        let mut es = Vec::new();
        let mut n = cube.num_vertices();
        for e in 0..cube.num_edges() {
            let (a, b) = cube.endpoints(e);
            es.push((a, n));
            es.push((n, b));
            n += 1;
        }
        commute(&gen::from_edges(n, &es));
        // C4 with doubled edges, two levels
        commute(&gen::from_edges(4, &[(0, 1), (0, 1), (1, 2), (1, 2), (2, 3), (2, 3), (3, 0), (3, 0)]));
    }
}
