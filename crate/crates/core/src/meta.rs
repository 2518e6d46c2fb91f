//! The structural decision procedure for planar G: reduce G, enumerate
//! semiregular groups of the primitive top graph, expand each quotient and
//! match it against H, then rebuild Γ₀ and a certificate.
//!
//! Half-edges of catalog colours in a quotient of G_r are wildcards: each
//! stands for one of several half-quotients. Matching runs over the block
//! trees of the expanded quotient and of H, rooted at a guessed image of a
//! core vertex. Branches are matched bottom-up with memoisation, and the
//! items hanging at a vertex are assigned by bipartite matching, with
//! wildcards that realise several items enumerated explicitly.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::canon::{canonical_form, find_isomorphism};
use crate::covering::{build_quotient, quotient_unchecked, verify_certificate, Certificate};
use crate::decomp::{build_block_tree, can_flip, find_atoms_with, AtomKind, BlockTree, Center};
use crate::multigraph::{Color, EdgeType, GraphBuilder, Multigraph};
use crate::oracle::quotient_order;
use crate::perm::{
    automorphisms_with_marks, enumerate_subgroups_of_order, fixes_nothing, DartPermutation, PermError, PermGroup,
};
use crate::planar::{aut_essentially_3connected, constrained_isomorphism, is_planar};
use crate::quotexp::{
    expand_fixed, expand_group, half_alt_count, half_quotient, Choice, Choices, EdgeChoices, ExpandError,
};
use crate::reduction::{catalog_base, hatted_sizes, reduction_series, Catalog, ReductionError, ReductionSeries, Q};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetaError {
    #[error("G is not planar")]
    NonPlanarInput,
    #[error("G is disconnected")]
    Disconnected,
    #[error("search exceeds the budget of {0}")]
    Budget(usize),
    #[error("internal error: {0}")]
    Internal(String),
}

impl From<PermError> for MetaError {
    fn from(e: PermError) -> Self {
        match e {
            PermError::TooLarge(b) => MetaError::Budget(b),
            other => MetaError::Internal(other.to_string()),
        }
    }
}

impl From<ExpandError> for MetaError {
    fn from(e: ExpandError) -> Self {
        MetaError::Internal(e.to_string())
    }
}

impl From<ReductionError> for MetaError {
    fn from(e: ReductionError) -> Self {
        match e {
            ReductionError::Disconnected => MetaError::Disconnected,
            other => MetaError::Internal(other.to_string()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct MetaOptions {
    pub budget: usize,
    /// Restrict core guesses to the vertices of this block of H.
    pub core: Option<usize>,
    /// Decide wildcard-free quotients by one isomorphism test.
    pub odd_shortcut: bool,
    pub parallel: bool,
}

impl Default for MetaOptions {
    fn default() -> Self {
        MetaOptions { budget: crate::perm::DEFAULT_BUDGET, core: None, odd_shortcut: true, parallel: true }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct MetaStats {
    /// Which step settled the answer: "size", "isomorphism",
    /// "no-central-block" or "search".
    pub decided_by: String,
    pub k: usize,
    pub series_length: usize,
    pub catalog_size: usize,
    pub subgroups: usize,
    pub quotient_classes: usize,
    pub core_guesses: usize,
    /// Quotients of G_r tested by a single isomorphism test.
    pub unique_expansions: usize,
    pub work: u64,
}

#[derive(Clone, Debug)]
pub struct MetaOutcome {
    pub certificate: Option<Certificate>,
    pub stats: MetaStats,
}

/// Decide whether planar G regularly covers H.
pub fn regular_cover_check(g: &Multigraph, h: &Multigraph, opts: &MetaOptions) -> Result<MetaOutcome, MetaError> {
    let mut stats = MetaStats::default();
    let no = |mut stats: MetaStats, by: &str| {
        stats.decided_by = by.to_string();
        Ok(MetaOutcome { certificate: None, stats })
    };
    if !g.is_connected() {
        return Err(MetaError::Disconnected);
    }
    let (n, m) = (g.num_vertices(), h.num_vertices());
    if m == 0 || n % m != 0 || !h.is_connected() {
        return no(stats, "size");
    }
    let k = n / m;
    stats.k = k;
    if k == 1 {
        stats.decided_by = "isomorphism".into();
        let Some((vm, dm)) = find_isomorphism(g, None, h, None) else { return no(stats, "isomorphism") };
        let grp = PermGroup::trivial(g.num_darts());
        let cert = Certificate::assemble(g, &grp, g, h, &vm, &dm);
        return Ok(MetaOutcome { certificate: Some(cert), stats });
    }
    if !is_planar(g) {
        return Err(MetaError::NonPlanarInput);
    }
    if let Center::Vertex(_) = build_block_tree(g).center() {
        // a central articulation is fixed by every automorphism
        return no(stats, "no-central-block");
    }
    if quotient_order(g, h).is_none() {
        return no(stats, "size");
    }
    stats.decided_by = "search".into();
    let series = reduction_series(g, catalog_base(&[g, h]))?;
    stats.series_length = series.len();
    stats.catalog_size = series.catalog.len();
    let subs = top_subgroups(&series, k, opts.budget)?;
    stats.subgroups = subs.len();

    // one representative per isomorphism class of H_r
    let mut seen = std::collections::HashSet::new();
    let mut classes: Vec<(PermGroup, Multigraph)> = Vec::new();
    for s in subs {
        let (hr, _) = quotient_unchecked(series.top(), &s).map_err(|e| MetaError::Internal(e.to_string()))?;
        if seen.insert(canonical_form(&hr, None).cert) {
            classes.push((s, hr));
        }
    }
    stats.quotient_classes = classes.len();
    let target = (Q::from_integer(h.num_vertices() as i64), Q::from_integer(h.num_full_edges() as i64) + Q::new(h.num_halves() as i64, 2));
    let work = AtomicU64::new(0);
    let guesses = AtomicU64::new(0);
    let unique = AtomicU64::new(0);
    let attempt = |(grp, hr): &(PermGroup, Multigraph)| -> Result<Option<(PermGroup, Choices)>, MetaError> {
        if hatted_sizes(hr, &series.catalog)? != target {
            return Ok(None);
        }
        let x = expand_fixed(hr, &series.catalog)?;
        let wild = x.edges().iter().any(|e| e.is_half() && e.color >= series.catalog.base);
        if !wild && opts.odd_shortcut {
            // no wildcard: the expansion is unique
            unique.fetch_add(1, Ordering::Relaxed);
            return Ok(find_isomorphism(&x, None, h, None).map(|_| (grp.clone(), Choices::new())));
        }
        let m = Matcher::new(&series.catalog, x, h, &work, opts.budget as u64);
        let core_ids = core_vertex_ids(hr);
        match m.find(&core_ids, opts.core, &guesses)? {
            Some(ch) => Ok(Some((grp.clone(), ch))),
            None => Ok(None),
        }
    };
    let found: Option<Result<Option<(PermGroup, Choices)>, MetaError>> = if opts.parallel {
        classes.par_iter().map(attempt).find_first(|r| !matches!(r, Ok(None)))
    } else {
        classes.iter().map(attempt).find(|r| !matches!(r, Ok(None)))
    };
    stats.work = work.load(Ordering::Relaxed);
    stats.core_guesses = guesses.load(Ordering::Relaxed) as usize;
    stats.unique_expansions = unique.load(Ordering::Relaxed) as usize;
    let Some(res) = found else { return no(stats, "search") };
    let Some((grp_r, choices)) = res? else { return no(stats, "search") };
    let cert = reconstruct(&series, &grp_r, &choices, g, h)?;
    Ok(MetaOutcome { certificate: Some(cert), stats })
}

/// Semiregular subgroups of order k of Aut(G_r) that flip no catalog edge
/// whose atom is not halvable.
pub fn top_subgroups(series: &ReductionSeries, k: usize, budget: usize) -> Result<Vec<PermGroup>, MetaError> {
    let top = series.top();
    let elems: Vec<DartPermutation> = match aut_essentially_3connected(top) {
        Ok(grp) => grp.elements().to_vec(),
        Err(_) => automorphisms_with_marks(top, None, true, budget)?,
    };
    let base = series.catalog.base;
    let allowed = |p: &DartPermutation| {
        top.edges().iter().all(|ed| {
            ed.is_half() || p.apply(ed.darts[0]) != ed.darts[1] || can_flip(ed.etype, ed.color, base)
        })
    };
    let pool: Vec<DartPermutation> =
        elems.into_iter().filter(|p| p.is_identity() || (fixes_nothing(p, top) && allowed(p))).collect();
    let pool = PermGroup::pool(pool);
    let subs = enumerate_subgroups_of_order(&pool, k, false, budget)?;
    Ok(subs.into_iter().filter(|s| s.elements().iter().all(|p| p.is_identity() || fixes_nothing(p, top))).collect())
}

/// Vertex ids of the block-tree centre of a quotient.
fn core_vertex_ids(hr: &Multigraph) -> Vec<String> {
    let t = build_block_tree(hr);
    match t.center() {
        Center::Block(b) => t.blocks[b].vertices.iter().map(|&v| hr.vertex_id(v).to_string()).collect(),
        Center::Vertex(v) => vec![hr.vertex_id(v).to_string()],
    }
}

/// Γ₀ from Γ_r and the wildcard choices, then the certificate.
fn reconstruct(
    series: &ReductionSeries,
    grp_r: &PermGroup,
    choices: &Choices,
    g: &Multigraph,
    h: &Multigraph,
) -> Result<Certificate, MetaError> {
    let top = series.top();
    let mut ec: EdgeChoices = EdgeChoices::new();
    for (id, c) in choices {
        let e = top.edge_index(id).ok_or_else(|| MetaError::Internal(format!("unknown half-edge {id}")))?;
        ec.insert(e, c.clone());
    }
    let mut grp = grp_r.clone();
    for i in (0..series.len()).rev() {
        let (ng, nc) = expand_group(&grp, series, i, &ec)?;
        grp = ng;
        ec = nc;
    }
    let (q, _) = build_quotient(g, &grp).map_err(|e| MetaError::Internal(e.to_string()))?;
    let (vm, dm) = find_isomorphism(&q, None, h, None)
        .ok_or_else(|| MetaError::Internal("expanded group does not give H".into()))?;
    let cert = Certificate::assemble(g, &grp, &q, h, &vm, &dm);
    verify_certificate(g, h, &cert).map_err(|e| MetaError::Internal(e.to_string()))?;
    Ok(cert)
}

const NONE: usize = usize::MAX;
/// Wildcards with more alternatives than this are always enumerated.
const UNIT_ALT_LIMIT: usize = 64;

struct Pattern {
    g: Multigraph,
    tree: BlockTree,
}

#[derive(Clone, Debug)]
enum PItem {
    Block { pat: usize, x: usize, b: usize },
    Loop(Color, EdgeType),
    Half(Color),
    Wild { pat: usize, e: usize },
}

#[derive(Clone, Copy, Debug)]
enum HItem {
    Block { y: usize, b: usize },
    Loop(Color, EdgeType),
    Half(Color),
}

#[derive(Clone, Debug)]
enum SlotKind {
    Unit(PItem),
    /// Wildcard whose every alternative is a single block at the root.
    WildUnit { key: String, alts: Vec<(usize, usize, usize)> },
    Multi { color: Color, key: String, nalts: usize },
}

#[derive(Clone, Debug)]
struct Slot {
    kind: SlotKind,
    parent: Option<usize>,
}

type Memo = HashMap<(usize, usize, usize, usize, usize), Option<Rc<Choices>>>;

/// Matches an expanded quotient (pattern 0) against H.
pub struct Matcher<'a> {
    catalog: &'a Catalog,
    h: &'a Multigraph,
    htree: BlockTree,
    pats: RefCell<Vec<Rc<Pattern>>>,
    alt_pats: RefCell<HashMap<(Color, usize), usize>>,
    branch_memo: RefCell<Memo>,
    block_memo: RefCell<Memo>,
    block_graphs: RefCell<HashMap<(usize, usize), Rc<(Multigraph, Vec<usize>)>>>,
    size_memo: RefCell<HashMap<(usize, usize, usize), (Q, Q)>>,
    work: &'a AtomicU64,
    budget: u64,
}

impl<'a> Matcher<'a> {
    pub fn new(catalog: &'a Catalog, x: Multigraph, h: &'a Multigraph, work: &'a AtomicU64, budget: u64) -> Self {
        let tree = build_block_tree(&x);
        Matcher {
            catalog,
            h,
            htree: build_block_tree(h),
            pats: RefCell::new(vec![Rc::new(Pattern { g: x, tree })]),
            alt_pats: RefCell::new(HashMap::new()),
            branch_memo: RefCell::new(HashMap::new()),
            block_memo: RefCell::new(HashMap::new()),
            block_graphs: RefCell::new(HashMap::new()),
            size_memo: RefCell::new(HashMap::new()),
            work,
            budget,
        }
    }

    fn tick(&self) -> Result<(), MetaError> {
        if self.work.fetch_add(1, Ordering::Relaxed) + 1 > self.budget {
            return Err(MetaError::Budget(self.budget as usize));
        }
        Ok(())
    }

    fn pat(&self, p: usize) -> Rc<Pattern> {
        self.pats.borrow()[p].clone()
    }

    /// Candidate images of the root, in guessing order: central block of H
    /// first, then vertices by decreasing size of their largest block.
    fn root_candidates(&self, core: Option<usize>) -> Vec<usize> {
        let t = &self.htree;
        let n = self.h.num_vertices();
        if let Some(b) = core {
            return t.blocks.get(b).map(|blk| blk.vertices.clone()).unwrap_or_default();
        }
        let central: Vec<usize> = match t.center() {
            Center::Block(b) => t.blocks[b].vertices.clone(),
            Center::Vertex(v) => vec![v],
        };
        let mut rest: Vec<usize> = (0..n).filter(|v| !central.contains(v)).collect();
        let size = |v: usize| t.vertex_blocks[v].iter().map(|&b| t.blocks[b].vertices.len()).max().unwrap_or(0);
        rest.sort_by_key(|&v| (std::cmp::Reverse(size(v)), v));
        central.into_iter().chain(rest).collect()
    }

    /// Find wildcard choices realising H, rooting at a core vertex.
    fn find(&self, core_ids: &[String], core: Option<usize>, guesses: &AtomicU64) -> Result<Option<Choices>, MetaError> {
        let x = self.pat(0);
        let wild_at = |v: usize| {
            x.g.darts_at(v).iter().any(|&d| {
                let ed = x.g.edge(x.g.edge_of(d));
                ed.is_half() && ed.color >= self.catalog.base
            })
        };
        let cands = self.root_candidates(core);
        let fits = |rx: usize, y: usize| {
            x.g.vertex_color(rx) == self.h.vertex_color(y) && (wild_at(rx) || x.g.degree(rx) == self.h.degree(y))
        };
        let pool: Vec<usize> = if core.is_some() {
            core_ids.iter().filter_map(|id| x.g.vertex_index(id)).collect()
        } else {
            (0..x.g.num_vertices()).collect()
        };
        let rx = pool
            .iter()
            .copied()
            .min_by_key(|&v| (wild_at(v), cands.iter().filter(|&&y| fits(v, y)).count(), v))
            .unwrap_or(0);
        for y in cands {
            if !fits(rx, y) {
                continue;
            }
            guesses.fetch_add(1, Ordering::Relaxed);
            if let Some(ch) = self.match_branch(0, rx, NONE, y, NONE)? {
                return Ok(Some((*ch).clone()));
            }
        }
        Ok(None)
    }

    fn graph_of(&self, pat: usize) -> Rc<Pattern> {
        self.pat(pat)
    }

    fn pitems(&self, pat: usize, x: usize, pb: usize) -> Vec<PItem> {
        let p = self.graph_of(pat);
        let mut out = Vec::new();
        for &b in &p.tree.vertex_blocks[x] {
            if b == pb {
                continue;
            }
            let blk = &p.tree.blocks[b];
            if blk.pseudo {
                let e = blk.edges[0];
                let ed = p.g.edge(e);
                out.push(if ed.is_half() {
                    if ed.color >= self.catalog.base {
                        PItem::Wild { pat, e }
                    } else {
                        PItem::Half(ed.color)
                    }
                } else {
                    PItem::Loop(ed.color, ed.etype)
                });
            } else {
                out.push(PItem::Block { pat, x, b });
            }
        }
        out
    }

    fn hitems(&self, y: usize, hb: usize) -> Vec<HItem> {
        let mut out = Vec::new();
        for &b in &self.htree.vertex_blocks[y] {
            if b == hb {
                continue;
            }
            let blk = &self.htree.blocks[b];
            if blk.pseudo {
                let ed = self.h.edge(blk.edges[0]);
                out.push(if ed.is_half() { HItem::Half(ed.color) } else { HItem::Loop(ed.color, ed.etype) });
            } else {
                out.push(HItem::Block { y, b });
            }
        }
        out
    }

    /// (v̂, ê) of block `b` and everything beyond it as seen from `x`.
    fn beyond(&self, pat: usize, x: usize, b: usize) -> (Q, Q) {
        if let Some(s) = self.size_memo.borrow().get(&(pat, x, b)) {
            return *s;
        }
        let (g, tree): (Multigraph, BlockTree);
        let (gr, tr) = if pat == NONE {
            (self.h, &self.htree)
        } else {
            let p = self.pat(pat);
            g = p.g.clone();
            tree = p.tree.clone();
            (&g, &tree)
        };
        let blk = &tr.blocks[b];
        let mut v = Q::from_integer(0);
        let mut e = Q::from_integer(0);
        for &ed in &blk.edges {
            let (a, c) = self.catalog.element_sizes(gr.edge(ed)).unwrap_or((Q::from_integer(0), Q::from_integer(1)));
            v += a;
            e += c;
        }
        for &z in &blk.vertices {
            if z == x {
                continue;
            }
            v += 1;
            for &b2 in &tr.vertex_blocks[z] {
                if b2 != b {
                    let (a, c) = self.beyond(pat, z, b2);
                    v += a;
                    e += c;
                }
            }
        }
        self.size_memo.borrow_mut().insert((pat, x, b), (v, e));
        (v, e)
    }

    fn block_graph(&self, pat: usize, b: usize) -> Rc<(Multigraph, Vec<usize>)> {
        if let Some(x) = self.block_graphs.borrow().get(&(pat, b)) {
            return x.clone();
        }
        let built = if pat == NONE {
            let blk = &self.htree.blocks[b];
            let (sg, vm, _) = self.h.subgraph(&blk.vertices, &blk.edges);
            Rc::new((sg, vm))
        } else {
            let p = self.pat(pat);
            let blk = &p.tree.blocks[b];
            let (sg, vm, _) = p.g.subgraph(&blk.vertices, &blk.edges);
            Rc::new((sg, vm))
        };
        self.block_graphs.borrow_mut().insert((pat, b), built.clone());
        built
    }

    fn match_branch(&self, pat: usize, x: usize, pb: usize, y: usize, hb: usize) -> Result<Option<Rc<Choices>>, MetaError> {
        let key = (pat, x, pb, y, hb);
        if let Some(r) = self.branch_memo.borrow().get(&key) {
            return Ok(r.clone());
        }
        self.tick()?;
        let p = self.pat(pat);
        let res = if p.g.vertex_color(x) != self.h.vertex_color(y) {
            None
        } else {
            let pi = self.pitems(pat, x, pb);
            let hi = self.hitems(y, hb);
            if pi.len() > hi.len() {
                None
            } else {
                self.solve(pi, &hi)?.map(Rc::new)
            }
        };
        self.branch_memo.borrow_mut().insert(key, res.clone());
        Ok(res)
    }

    fn match_block(&self, pat: usize, x: usize, b: usize, y: usize, hb: usize) -> Result<Option<Rc<Choices>>, MetaError> {
        let key = (pat, x, b, y, hb);
        if let Some(r) = self.block_memo.borrow().get(&key) {
            return Ok(r.clone());
        }
        self.tick()?;
        let res = self.match_block_uncached(pat, x, b, y, hb)?;
        self.block_memo.borrow_mut().insert(key, res.clone());
        Ok(res)
    }

    fn match_block_uncached(&self, pat: usize, x: usize, b: usize, y: usize, hb: usize) -> Result<Option<Rc<Choices>>, MetaError> {
        let p = self.pat(pat);
        let (pb, hbk) = (&p.tree.blocks[b], &self.htree.blocks[hb]);
        if pb.vertices.len() != hbk.vertices.len() || pb.edges.len() != hbk.edges.len() {
            return Ok(None);
        }
        if self.beyond(pat, x, b) != self.beyond(NONE, y, hb) {
            return Ok(None);
        }
        let cg = self.block_graph(pat, b);
        let dg = self.block_graph(NONE, hb);
        let err: RefCell<Option<MetaError>> = RefCell::new(None);
        let compat = |lx: usize, ly: usize| -> bool {
            if err.borrow().is_some() {
                return false;
            }
            let (gx, gy) = (cg.1[lx], dg.1[ly]);
            if p.g.vertex_color(gx) != self.h.vertex_color(gy) || (gx == x) != (gy == y) {
                return false;
            }
            if gx == x {
                return true;
            }
            match self.match_branch(pat, gx, b, gy, hb) {
                Ok(r) => r.is_some(),
                Err(e) => {
                    *err.borrow_mut() = Some(e);
                    false
                }
            }
        };
        let vm = constrained_isomorphism(&cg.0, &dg.0, &compat);
        if let Some(e) = err.into_inner() {
            return Err(e);
        }
        let Some(vm) = vm else { return Ok(None) };
        let mut out = Choices::new();
        for (lx, &ly) in vm.iter().enumerate() {
            let (gx, gy) = (cg.1[lx], dg.1[ly]);
            if gx == x {
                continue;
            }
            let ch = self.match_branch(pat, gx, b, gy, hb)?.expect("compatible pair matched");
            out.extend(ch.iter().map(|(k, v)| (k.clone(), v.clone())));
        }
        Ok(Some(Rc::new(out)))
    }

    /// Pattern of alternative `alt` for wildcard colour `c`, rooted at 0.
    fn alt_pattern(&self, c: Color, alt: usize) -> Result<Option<usize>, MetaError> {
        if let Some(&p) = self.alt_pats.borrow().get(&(c, alt)) {
            return Ok(Some(p));
        }
        let Some(ent) = self.catalog.entry(c) else { return Ok(None) };
        let Some(hq) = half_quotient(ent, alt, self.catalog.base) else { return Ok(None) };
        let g = expand_fixed(&hq.graph, self.catalog)?;
        let tree = build_block_tree(&g);
        let mut pats = self.pats.borrow_mut();
        pats.push(Rc::new(Pattern { g, tree }));
        let id = pats.len() - 1;
        self.alt_pats.borrow_mut().insert((c, alt), id);
        Ok(Some(id))
    }

    fn wild_slot(&self, pat: usize, e: usize, parent: Option<usize>) -> Result<Slot, MetaError> {
        let p = self.pat(pat);
        let ed = p.g.edge(e);
        let ent = self.catalog.entry(ed.color).ok_or_else(|| MetaError::Internal(format!("colour {}", ed.color)))?;
        let nalts = half_alt_count(ent, self.catalog.base);
        if nalts <= UNIT_ALT_LIMIT {
            let mut alts = Vec::new();
            let mut unit = true;
            for a in 0..nalts {
                let Some(ap) = self.alt_pattern(ed.color, a)? else { continue };
                let items = self.pitems(ap, 0, NONE);
                match items.as_slice() {
                    [PItem::Block { b, .. }] => alts.push((a, ap, *b)),
                    _ => {
                        unit = false;
                        break;
                    }
                }
            }
            if unit {
                return Ok(Slot { kind: SlotKind::WildUnit { key: ed.id.clone(), alts }, parent });
            }
        }
        Ok(Slot { kind: SlotKind::Multi { color: ed.color, key: ed.id.clone(), nalts }, parent })
    }

    /// Whether a unit slot fits an H item; returns the choices it yields.
    fn compat(&self, slot: &Slot, hi: &HItem) -> Result<Option<Rc<Choices>>, MetaError> {
        let empty = || Some(Rc::new(Choices::new()));
        Ok(match (&slot.kind, hi) {
            (SlotKind::Unit(PItem::Loop(c, t)), HItem::Loop(c2, t2)) => (c == c2 && t == t2).then(empty).flatten(),
            (SlotKind::Unit(PItem::Half(c)), HItem::Half(c2)) => (c == c2).then(empty).flatten(),
            (SlotKind::Unit(PItem::Block { pat, x, b }), HItem::Block { y, b: hb }) => self.match_block(*pat, *x, *b, *y, *hb)?,
            (SlotKind::WildUnit { key, alts }, HItem::Block { y, b: hb }) => {
                for &(a, ap, pb) in alts {
                    if let Some(ch) = self.match_block(ap, 0, pb, *y, *hb)? {
                        let mut m = Choices::new();
                        m.insert(key.clone(), Choice { alt: a, nested: (*ch).clone() });
                        return Ok(Some(Rc::new(m)));
                    }
                }
                None
            }
            _ => None,
        })
    }

    fn slots_for(&self, items: Vec<PItem>, parent: Option<usize>) -> Result<Vec<Slot>, MetaError> {
        items
            .into_iter()
            .map(|it| match it {
                PItem::Wild { pat, e } => self.wild_slot(pat, e, parent),
                other => Ok(Slot { kind: SlotKind::Unit(other), parent }),
            })
            .collect()
    }

    fn solve(&self, items: Vec<PItem>, hi: &[HItem]) -> Result<Option<Choices>, MetaError> {
        let mut slots = self.slots_for(items, None)?;
        let mut chosen: HashMap<usize, usize> = HashMap::new();
        self.dfs(&mut slots, &mut chosen, hi)
    }

    fn dfs(
        &self,
        slots: &mut Vec<Slot>,
        chosen: &mut HashMap<usize, usize>,
        hi: &[HItem],
    ) -> Result<Option<Choices>, MetaError> {
        self.tick()?;
        let units: Vec<usize> = (0..slots.len()).filter(|&s| !matches!(slots[s].kind, SlotKind::Multi { .. })).collect();
        let pending: Vec<usize> = (0..slots.len())
            .filter(|&s| matches!(slots[s].kind, SlotKind::Multi { .. }) && !chosen.contains_key(&s))
            .collect();
        if units.len() + pending.len() > hi.len() {
            return Ok(None);
        }
        let Some(assign) = self.matching(slots, &units, hi, pending.is_empty())? else { return Ok(None) };
        let Some(&m) = pending.first() else {
            return self.assemble(slots, chosen, &units, &assign, hi).map(Some);
        };
        let SlotKind::Multi { color, nalts, .. } = slots[m].kind.clone() else { unreachable!() };
        for a in 0..nalts {
            let Some(ap) = self.alt_pattern(color, a)? else { continue };
            let items = self.pitems(ap, 0, NONE);
            let new = self.slots_for(items, Some(m))?;
            let mark = slots.len();
            slots.extend(new);
            chosen.insert(m, a);
            if let Some(r) = self.dfs(slots, chosen, hi)? {
                return Ok(Some(r));
            }
            chosen.remove(&m);
            slots.truncate(mark);
        }
        Ok(None)
    }

    /// Maximum matching of unit slots into H items (Kuhn). Returns the
    /// assignment if every unit is matched (and, with `perfect`, every H
    /// item too).
    fn matching(&self, slots: &[Slot], units: &[usize], hi: &[HItem], perfect: bool) -> Result<Option<Vec<usize>>, MetaError> {
        if perfect && units.len() != hi.len() {
            return Ok(None);
        }
        let mut adj: Vec<Vec<usize>> = Vec::with_capacity(units.len());
        for &u in units {
            let mut row = Vec::new();
            for (j, h) in hi.iter().enumerate() {
                if self.compat(&slots[u], h)?.is_some() {
                    row.push(j);
                }
            }
            if row.is_empty() {
                return Ok(None);
            }
            adj.push(row);
        }
        let mut owner = vec![NONE; hi.len()];
        fn augment(u: usize, adj: &[Vec<usize>], owner: &mut [usize], seen: &mut [bool]) -> bool {
            for &j in &adj[u] {
                if seen[j] {
                    continue;
                }
                seen[j] = true;
                if owner[j] == NONE || augment(owner[j], adj, owner, seen) {
                    owner[j] = u;
                    return true;
                }
            }
            false
        }
        for u in 0..units.len() {
            let mut seen = vec![false; hi.len()];
            if !augment(u, &adj, &mut owner, &mut seen) {
                return Ok(None);
            }
        }
        let mut assign = vec![NONE; units.len()];
        for (j, &u) in owner.iter().enumerate() {
            if u != NONE {
                assign[u] = j;
            }
        }
        Ok(Some(assign))
    }

    fn assemble(
        &self,
        slots: &[Slot],
        chosen: &HashMap<usize, usize>,
        units: &[usize],
        assign: &[usize],
        hi: &[HItem],
    ) -> Result<Choices, MetaError> {
        let mut maps: BTreeMap<Option<usize>, Choices> = BTreeMap::new();
        for (i, &u) in units.iter().enumerate() {
            let ch = self.compat(&slots[u], &hi[assign[i]])?.expect("matched pair is compatible");
            maps.entry(slots[u].parent).or_default().extend(ch.iter().map(|(k, v)| (k.clone(), v.clone())));
        }
        for s in (0..slots.len()).rev() {
            if let SlotKind::Multi { key, .. } = &slots[s].kind {
                let nested = maps.remove(&Some(s)).unwrap_or_default();
                let c = Choice { alt: chosen[&s], nested };
                maps.entry(slots[s].parent).or_default().insert(key.clone(), c);
            }
        }
        Ok(maps.remove(&None).unwrap_or_default())
    }
}

/// Realisation token of a pendant element.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Token {
    pub color: Color,
    pub variant: crate::quotexp::QuotientVariant,
    pub alt: usize,
}

/// Catalog fragments (expanded edge, loop or half-quotients) that realise
/// the given blocks of H hanging at `y`.
pub fn compute_list(h: &Multigraph, y: usize, blocks: &[usize], catalog: &Catalog, budget: u64) -> Result<Vec<Token>, MetaError> {
    use crate::quotexp::QuotientVariant as V;
    let work = AtomicU64::new(0);
    let tree = build_block_tree(h);
    let mut hi: Vec<HItem> = Vec::new();
    for &b in blocks {
        let blk = &tree.blocks[b];
        if blk.pseudo {
            let ed = h.edge(blk.edges[0]);
            hi.push(if ed.is_half() { HItem::Half(ed.color) } else { HItem::Loop(ed.color, ed.etype) });
        } else {
            hi.push(HItem::Block { y, b });
        }
    }
    let mut out = Vec::new();
    for ent in &catalog.entries {
        let c = ent.code.color;
        let mut frags: Vec<(V, usize, Multigraph)> = Vec::new();
        match ent.code.kind {
            AtomKind::Block => frags.push((V::Edge, 0, ent.expanded.clone())),
            _ => {
                if let Some(lq) = &ent.loop_quotient {
                    frags.push((V::Loop, 0, expand_fixed(lq, catalog)?));
                }
                for a in 0..half_alt_count(ent, catalog.base).min(UNIT_ALT_LIMIT) {
                    if let Some(hq) = half_quotient(ent, a, catalog.base) {
                        frags.push((V::Half, a, expand_fixed(&hq.graph, catalog)?));
                    }
                }
            }
        }
        for (variant, alt, f) in frags {
            if f.vertex_color(0) != h.vertex_color(y) {
                continue;
            }
            let m = Matcher::new(catalog, f, h, &work, budget);
            let items = m.pitems(0, 0, NONE);
            if items.len() <= hi.len() && m.solve(items, &hi)?.is_some() {
                out.push(Token { color: c, variant, alt });
            }
        }
    }
    Ok(out)
}

/// Pendant element of H at a core vertex, with its realisation list.
#[derive(Clone, Debug, Serialize)]
pub struct PendantElement {
    pub attach: usize,
    pub block: usize,
    pub list: Vec<Token>,
}

/// Pendant elements around a core position of H with their lists.
pub fn reduce_with_lists(h: &Multigraph, core: Center, catalog: &Catalog, budget: u64) -> Result<Vec<PendantElement>, MetaError> {
    let tree = build_block_tree(h);
    let (verts, skip) = match core {
        Center::Block(b) => (tree.blocks[b].vertices.clone(), b),
        Center::Vertex(v) => (vec![v], NONE),
    };
    let mut out = Vec::new();
    for &y in &verts {
        for &b in &tree.vertex_blocks[y] {
            if b != skip {
                out.push(PendantElement { attach: y, block: b, list: compute_list(h, y, &[b], catalog, budget)? });
            }
        }
    }
    Ok(out)
}

/// Embedding of an expanded quotient into H: the wildcard choices, if any
/// assignment realises H.
pub fn embed_final(x: &Multigraph, h: &Multigraph, catalog: &Catalog, budget: u64) -> Result<Option<Choices>, MetaError> {
    let work = AtomicU64::new(0);
    let guesses = AtomicU64::new(0);
    let ids = core_vertex_ids(x);
    Matcher::new(catalog, x.clone(), h, &work, budget).find(&ids, None, &guesses)
}

/// Block-atom reduction of a quotient around its core. Loops and half-edges
/// count as pendant edges and are never reduced on their own.
#[derive(Clone, Debug)]
pub struct QuotientReduction {
    pub graphs: Vec<Multigraph>,
    pub core: Center,
    pub classes: usize,
}

pub fn quotient_reduce(hr: &Multigraph, base: Color) -> QuotientReduction {
    let mut graphs = vec![hr.clone()];
    let mut keys: HashMap<Vec<u64>, Color> = HashMap::new();
    let core = build_block_tree(hr).center();
    loop {
        let cur = graphs.last().expect("nonempty");
        let t = build_block_tree(cur);
        let center = t.center();
        let atoms = find_atoms_with(cur, &t, center, true);
        if atoms.is_empty() {
            break;
        }
        let mut drop_v = vec![false; cur.num_vertices()];
        let mut drop_e = vec![false; cur.num_edges()];
        for a in &atoms {
            a.interior.iter().for_each(|&v| drop_v[v] = true);
            a.edges.iter().for_each(|&e| drop_e[e] = true);
        }
        let mut b = GraphBuilder::new();
        let mut vm = vec![NONE; cur.num_vertices()];
        for v in 0..cur.num_vertices() {
            if !drop_v[v] {
                vm[v] = b.add_vertex(cur.vertex_id(v), cur.vertex_color(v));
            }
        }
        for (e, ed) in cur.edges().iter().enumerate() {
            if drop_e[e] {
                continue;
            }
            let u = vm[cur.vertex_of(ed.darts[0])];
            if ed.is_half() {
                b.add_half(&ed.id, u, ed.color);
            } else {
                let v = vm[cur.vertex_of(ed.darts[1])];
                b.add_edge_with_darts(&ed.id, cur.dart_id(ed.darts[0]), cur.dart_id(ed.darts[1]), u, v, ed.color, ed.etype);
            }
        }
        let level = graphs.len();
        for (j, a) in atoms.iter().enumerate() {
            let (ag, _, _) = a.graph(cur);
            let marks: Vec<u64> = (0..ag.num_vertices()).map(|v| u64::from(v == 0)).collect();
            let key = canonical_form(&ag, Some(&marks)).cert;
            let n = keys.len() as Color;
            let color = *keys.entry(key).or_insert(base + n);
            let leaf = b.add_vertex(&format!("~q{level}_{j}"), crate::reduction::PLACEHOLDER);
            b.add_edge(&format!("~s{level}_{j}"), vm[a.boundary[0]], leaf, color, EdgeType::Undirected);
        }
        graphs.push(b.build());
    }
    QuotientReduction { graphs, core, classes: keys.len() }
}

/// Edge of a dipole inside a star atom; `nested` is set when the edge
/// itself stands for a dipole.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DipoleEdge {
    pub color: Color,
    pub halvable: bool,
    pub nested: Option<Box<DipoleSpec>>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DipoleSpec {
    pub edges: Vec<DipoleEdge>,
}

/// A star atom of the catalog: one vertex with attached elements.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StarAtom {
    /// Half-edges of proper atoms, by colour.
    pub halves: Vec<Color>,
    /// Half-edges that are half-quotients of dipoles.
    pub dipole_halves: Vec<DipoleSpec>,
    pub loops: Vec<Color>,
    pub pendant_edges: Vec<Color>,
}

/// Star with proper half-edges and loops only, plus one unified dipole
/// whose colour classes all have even size.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PreprocessedStar {
    pub halves: BTreeMap<Color, usize>,
    pub loops: BTreeMap<Color, usize>,
    pub pendant_edges: Vec<Color>,
    pub dipole: BTreeMap<Color, usize>,
}

/// Unify the dipoles of a star. Odd halvable classes give one edge to the
/// star as a half-edge, nested dipoles are expanded, and non-halvable
/// classes become loops. `None` if some dipole has no half-quotient.
pub fn preprocess_star(s: &StarAtom) -> Option<PreprocessedStar> {
    let mut out = PreprocessedStar { pendant_edges: s.pendant_edges.clone(), ..Default::default() };
    for &c in &s.halves {
        *out.halves.entry(c).or_default() += 1;
    }
    for &c in &s.loops {
        *out.loops.entry(c).or_default() += 1;
    }
    let mut queue: std::collections::VecDeque<DipoleSpec> = s.dipole_halves.iter().cloned().collect();
    while let Some(d) = queue.pop_front() {
        let mut classes: BTreeMap<Color, Vec<DipoleEdge>> = BTreeMap::new();
        for e in d.edges {
            classes.entry(e.color).or_default().push(e);
        }
        let mut rest = DipoleSpec::default();
        let mut expanded = false;
        for (c, mut es) in classes {
            let halvable = es.iter().all(|e| e.halvable);
            if !halvable {
                if es.len() % 2 == 1 {
                    return None;
                }
                *out.loops.entry(c).or_default() += es.len() / 2;
                continue;
            }
            if es.len() % 2 == 1 {
                let e = es.pop().expect("odd class is nonempty");
                match e.nested {
                    Some(n) => queue.push_back(*n),
                    None => *out.halves.entry(c).or_default() += 1,
                }
            }
            for e in es {
                match e.nested {
                    Some(n) => {
                        rest.edges.extend(n.edges);
                        expanded = true;
                    }
                    None => rest.edges.push(e),
                }
            }
        }
        if expanded {
            queue.push_front(rest);
        } else {
            for e in rest.edges {
                *out.dipole.entry(e.color).or_default() += 1;
            }
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators as gen;
    use crate::oracle::{enumerate_quotients, oracle_regular_cover};
    use crate::perm::DEFAULT_BUDGET;

    fn agree(g: &Multigraph, h: &Multigraph) -> bool {
        let opts = MetaOptions { parallel: false, ..Default::default() };
        let m = regular_cover_check(g, h, &opts).unwrap();
        let o = oracle_regular_cover(g, h, DEFAULT_BUDGET).unwrap();
        if let Some(c) = &m.certificate {
            verify_certificate(g, h, c).unwrap();
        }
        assert_eq!(m.certificate.is_some(), o.is_some(), "meta and oracle disagree");
        m.certificate.is_some()
    }

    #[test]
    fn named_instances() {
        assert!(agree(&gen::cube(), &gen::complete(4)));
        assert!(agree(&gen::cycle(6), &gen::cycle(3)));
        assert!(!agree(&gen::complete(4), &gen::cycle(3)));
        assert!(!agree(&gen::cycle(5), &gen::cycle(3)));
        let r = regular_cover_check(&gen::path(3), &gen::path(1), &MetaOptions::default()).unwrap();
        assert!(r.certificate.is_none());
        assert_eq!(r.stats.decided_by, "no-central-block");
        assert_eq!(regular_cover_check(&gen::petersen(), &gen::petersen_base(), &MetaOptions::default()).unwrap_err(), MetaError::NonPlanarInput);
    }

    fn all_quotients_agree(g: &Multigraph) {
        for (_, qs) in enumerate_quotients(g, DEFAULT_BUDGET).unwrap() {
            for q in qs {
                assert!(agree(g, &q));
            }
        }
    }

    #[test]
    fn quotients_of_reducible_graphs() {
        // theta graph
        all_quotients_agree(&gen::from_edges(6, &[(0, 2), (2, 3), (3, 1), (0, 4), (4, 1), (0, 5), (5, 1)]));
        // doubled square, cycle with pendant paths, subdivided cube
        all_quotients_agree(&gen::from_edges(4, &[(0, 1), (0, 1), (1, 2), (2, 3), (2, 3), (3, 0)]));
        all_quotients_agree(&gen::from_edges(4, &[(0, 1), (0, 1), (1, 2), (1, 2), (2, 3), (2, 3), (3, 0), (3, 0)]));
        let mut edges: Vec<(usize, usize)> = (0..6).map(|i| (i, (i + 1) % 6)).collect();
        for i in 0..6 {
            edges.push((i, 6 + i));
            edges.push((6 + i, 12 + i));
        }
        all_quotients_agree(&gen::from_edges(18, &edges));
        let cube = gen::cube();
        let mut es = Vec::new();
        let mut n = cube.num_vertices();
        for e in 0..cube.num_edges() {
            let (a, b) = cube.endpoints(e);
            es.push((a, n));
            es.push((n, b));
            n += 1;
        }
        all_quotients_agree(&gen::from_edges(n, &es));
    }

    #[test]
    fn dipole_with_many_quotients() {
        // square whose sides are 2-edge dipoles, and a lone 4-edge dipole
        let mut es = Vec::new();
        for i in 0..4 {
            for _ in 0..2 {
                es.push((i, (i + 1) % 4));
            }
        }
        all_quotients_agree(&gen::from_edges(4, &es));
        all_quotients_agree(&gen::from_edges(2, &[(0, 1); 4]));
    }

    #[test]
    fn quotient_reduction_examples() {
        // a single vertex with loops and half-edges is left alone
        let mut b = GraphBuilder::new();
        b.add_vertex("w", 0);
        b.add_edge("l", 0, 0, 0, EdgeType::Undirected);
        b.add_half("h", 0, 0);
        let q = quotient_reduce(&b.build(), 10);
        assert_eq!(q.graphs.len(), 1);
        // triangle with pendant paths of length two: one block-atom level
        let g = gen::from_edges(9, &[(0, 1), (1, 2), (2, 0), (0, 3), (3, 4), (1, 5), (5, 6), (2, 7), (7, 8)]);
        let q = quotient_reduce(&g, 10);
        assert_eq!(q.graphs.len(), 2);
        assert_eq!(q.classes, 1);
    }

    #[test]
    fn lists_for_pendant_blocks() {
        let g = gen::from_edges(6, &[(0, 2), (2, 3), (3, 1), (0, 4), (4, 1), (0, 5), (5, 1)]);
        let s = reduction_series(&g, 1).unwrap();
        // H: a vertex with a pendant edge ending in a half-edge, i.e. the
        // half-quotient of a two-vertex path atom
        let mut b = GraphBuilder::new();
        b.add_vertex("w", 0);
        b.add_vertex("a", 0);
        b.add_edge("x", 0, 1, 0, EdgeType::Halvable);
        b.add_half("y", 1, 0);
        let h = b.build();
        let t = build_block_tree(&h);
        let blk = t.vertex_blocks[0][0];
        let list = compute_list(&h, 0, &[blk], &s.catalog, 10_000).unwrap();
        assert!(list.iter().any(|t| t.variant == crate::quotexp::QuotientVariant::Half));
    }

    #[test]
    fn star_preprocessing() {
        let plain = |c: Color, n: usize| (0..n).map(move |_| DipoleEdge { color: c, halvable: true, nested: None });
        let d2 = DipoleSpec { edges: plain(20, 2).chain(plain(21, 3)).chain(plain(22, 1)).collect() };
        let mut d1 = DipoleSpec { edges: plain(10, 2).chain(plain(11, 2)).chain(plain(12, 2)).collect() };
        d1.edges.push(DipoleEdge { color: 30, halvable: true, nested: Some(Box::new(d2)) });
        let s = StarAtom { halves: vec![5], dipole_halves: vec![d1.clone(), d1], ..Default::default() };
        let p = preprocess_star(&s).unwrap();
        let m = |v: &[(Color, usize)]| v.iter().copied().collect::<BTreeMap<_, _>>();
        assert_eq!(p.dipole, m(&[(10, 4), (11, 4), (12, 4), (20, 4), (21, 4)]));
        assert_eq!(p.halves, m(&[(5, 1), (21, 2), (22, 2)]));
        assert!(p.dipole.values().all(|n| n % 2 == 0));
        // no dipole: unchanged
        let s = StarAtom { halves: vec![1, 1], loops: vec![2], ..Default::default() };
        let p = preprocess_star(&s).unwrap();
        assert_eq!((p.halves, p.loops), (m(&[(1, 2)]), m(&[(2, 1)])));
        // even classes pass through; non-halvable pairs become loops
        let mut d = DipoleSpec { edges: plain(3, 4).collect() };
        d.edges.extend((0..2).map(|_| DipoleEdge { color: 4, halvable: false, nested: None }));
        let p = preprocess_star(&StarAtom { dipole_halves: vec![d], ..Default::default() }).unwrap();
        assert_eq!((p.dipole, p.loops), (m(&[(3, 4)]), m(&[(4, 1)])));
    }
}
