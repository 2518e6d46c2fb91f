//! Dart permutations, automorphism groups and subgroup search.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canon;
use crate::multigraph::{EdgeType, Multigraph};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PermError {
    #[error("enumeration exceeded the budget of {0}")]
    TooLarge(usize),
    #[error("permutation {0} is not an automorphism")]
    NotASubgroup(usize),
    #[error("element set is not closed under composition")]
    NotAGroup,
    #[error("unknown dart {0}")]
    UnknownDart(String),
    #[error("permutation is not a bijection")]
    NotABijection,
}

pub const DEFAULT_BUDGET: usize = 2_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DartPermutation {
    pub image: Vec<usize>,
}

impl DartPermutation {
    pub fn identity(n: usize) -> DartPermutation {
        DartPermutation { image: (0..n).collect() }
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn apply(&self, d: usize) -> usize {
        self.image[d]
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &DartPermutation) -> DartPermutation {
        DartPermutation { image: other.image.iter().map(|&d| self.image[d]).collect() }
    }

    pub fn inverse(&self) -> DartPermutation {
        let mut inv = vec![0; self.image.len()];
        for (d, &x) in self.image.iter().enumerate() {
            inv[x] = d;
        }
        DartPermutation { image: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &x)| i == x)
    }

    pub fn is_bijection(&self) -> bool {
        let mut seen = vec![false; self.image.len()];
        for &x in &self.image {
            if x >= seen.len() || seen[x] {
                return false;
            }
            seen[x] = true;
        }
        true
    }

    pub fn order(&self) -> usize {
        let mut p = self.clone();
        let mut k = 1;
        while !p.is_identity() {
            p = p.compose(self);
            k += 1;
        }
        k
    }

    /// Induced vertex map, if well defined.
    pub fn vertex_map(&self, g: &Multigraph) -> Option<Vec<usize>> {
        let mut vm = vec![usize::MAX; g.num_vertices()];
        for d in 0..g.num_darts() {
            let v = g.vertex_of(d);
            let w = g.vertex_of(self.image[d]);
            if vm[v] == usize::MAX {
                vm[v] = w;
            } else if vm[v] != w {
                return None;
            }
        }
        // isolated vertices are only possible in the one-vertex graph
        for (v, x) in vm.iter_mut().enumerate() {
            if *x == usize::MAX {
                *x = v;
            }
        }
        Some(vm)
    }

    /// Full automorphism check: bijection, commutes with theta, well-defined
    /// and injective on vertices, preserves colours, types and directions.
    pub fn is_automorphism(&self, g: &Multigraph) -> bool {
        is_morphism_iso(g, g, &self.image)
    }

    pub fn to_pairs(&self, g: &Multigraph) -> Vec<[String; 2]> {
        (0..self.image.len()).map(|d| [g.dart_id(d).to_string(), g.dart_id(self.image[d]).to_string()]).collect()
    }

    pub fn from_pairs(g: &Multigraph, pairs: &[[String; 2]]) -> Result<DartPermutation, PermError> {
        let mut image = vec![usize::MAX; g.num_darts()];
        for [a, b] in pairs {
            let x = g.dart_index(a).ok_or_else(|| PermError::UnknownDart(a.clone()))?;
            let y = g.dart_index(b).ok_or_else(|| PermError::UnknownDart(b.clone()))?;
            image[x] = y;
        }
        let p = DartPermutation { image };
        if !p.is_bijection() {
            return Err(PermError::NotABijection);
        }
        Ok(p)
    }
}

/// Check that a dart map is an isomorphism g1 -> g2 (colours, types, directions
/// and vertex colours preserved).
pub fn is_morphism_iso(g1: &Multigraph, g2: &Multigraph, dmap: &[usize]) -> bool {
    if g1.num_darts() != g2.num_darts() || g1.num_vertices() != g2.num_vertices() || dmap.len() != g1.num_darts() {
        return false;
    }
    let mut seen = vec![false; g2.num_darts()];
    for &x in dmap {
        if x >= seen.len() || seen[x] {
            return false;
        }
        seen[x] = true;
    }
    let mut vm = vec![usize::MAX; g1.num_vertices()];
    for d in 0..g1.num_darts() {
        if dmap[g1.theta(d)] != g2.theta(dmap[d]) {
            return false;
        }
        let v = g1.vertex_of(d);
        let w = g2.vertex_of(dmap[d]);
        if vm[v] == usize::MAX {
            vm[v] = w;
        } else if vm[v] != w {
            return false;
        }
    }
    let mut vseen = vec![false; g2.num_vertices()];
    for v in 0..g1.num_vertices() {
        if vm[v] == usize::MAX {
            // isolated vertex: only allowed in the trivial one-vertex case
            if g1.num_vertices() != 1 {
                return false;
            }
            vm[v] = 0;
        }
        if vseen[vm[v]] {
            return false;
        }
        vseen[vm[v]] = true;
        if g1.vertex_color(v) != g2.vertex_color(vm[v]) {
            return false;
        }
    }
    for e in 0..g1.num_edges() {
        let a = g1.edge(e);
        let f = g2.edge_of(dmap[a.darts[0]]);
        let b = g2.edge(f);
        if a.color != b.color || a.is_half() != b.is_half() {
            return false;
        }
        if !a.is_half() {
            if a.etype != b.etype {
                return false;
            }
            if a.etype == EdgeType::Directed && dmap[a.darts[0]] != b.darts[0] {
                return false;
            }
        }
    }
    true
}

/// A finite set of dart permutations with fast lookup; a group when closed.
#[derive(Clone, Debug)]
pub struct PermGroup {
    elements: Vec<DartPermutation>,
    index: HashMap<Vec<usize>, usize>,
    table: Option<Vec<Vec<u32>>>,
    closed: bool,
}

const TABLE_LIMIT: usize = 400;

impl PermGroup {
    /// Build from an element list; fails if it is not closed under products.
    pub fn from_elements(elements: Vec<DartPermutation>) -> Result<PermGroup, PermError> {
        let pool = PermGroup::pool(elements);
        if !pool.check_closed() {
            return Err(PermError::NotAGroup);
        }
        Ok(PermGroup { closed: true, ..pool })
    }

    /// A pool of permutations that need not be closed. Products that leave
    /// the pool are reported as missing by `mul`.
    pub fn pool(mut elements: Vec<DartPermutation>) -> PermGroup {
        let n = elements.first().map(|p| p.len()).unwrap_or(0);
        let id = DartPermutation::identity(n);
        let mut seen = HashSet::new();
        elements.retain(|p| seen.insert(p.image.clone()));
        if let Some(pos) = elements.iter().position(|p| *p == id) {
            elements.swap(0, pos);
        } else {
            elements.insert(0, id);
        }
        let index: HashMap<Vec<usize>, usize> =
            elements.iter().enumerate().map(|(i, p)| (p.image.clone(), i)).collect();
        let mut g = PermGroup { elements, index, table: None, closed: false };
        if g.elements.len() <= TABLE_LIMIT {
            let m = g.elements.len();
            let mut table = vec![vec![u32::MAX; m]; m];
            for i in 0..m {
                for j in 0..m {
                    let p = g.elements[i].compose(&g.elements[j]);
                    if let Some(&k) = g.index.get(&p.image) {
                        table[i][j] = k as u32;
                    }
                }
            }
            g.table = Some(table);
        }
        g
    }

    pub fn trivial(num_darts: usize) -> PermGroup {
        PermGroup::from_elements(vec![DartPermutation::identity(num_darts)]).expect("identity is a group")
    }

    /// Closure of a generator set.
    pub fn generate(gens: &[DartPermutation], num_darts: usize, budget: usize) -> Result<PermGroup, PermError> {
        let mut elements = vec![DartPermutation::identity(num_darts)];
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        seen.insert(elements[0].image.clone());
        let mut i = 0;
        while i < elements.len() {
            for g in gens {
                let p = elements[i].compose(g);
                if seen.insert(p.image.clone()) {
                    elements.push(p);
                    if elements.len() > budget {
                        return Err(PermError::TooLarge(budget));
                    }
                }
            }
            i += 1;
        }
        PermGroup::from_elements(elements)
    }

    fn check_closed(&self) -> bool {
        let m = self.elements.len();
        for i in 0..m {
            for j in 0..m {
                if self.mul(i, j).is_none() {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[DartPermutation] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &DartPermutation {
        &self.elements[i]
    }

    pub fn num_darts(&self) -> usize {
        self.elements[0].len()
    }

    pub fn index_of(&self, p: &DartPermutation) -> Option<usize> {
        self.index.get(&p.image).copied()
    }

    /// Index of `elements[i] ∘ elements[j]`, or None if outside the pool.
    pub fn mul(&self, i: usize, j: usize) -> Option<usize> {
        match &self.table {
            Some(t) => {
                let k = t[i][j];
                (k != u32::MAX).then_some(k as usize)
            }
            None => {
                let p = self.elements[i].compose(&self.elements[j]);
                self.index.get(&p.image).copied()
            }
        }
    }

    pub fn inv(&self, i: usize) -> Option<usize> {
        self.index_of(&self.elements[i].inverse())
    }

    /// Subgroup given by a set of indices (assumed closed).
    pub fn subgroup(&self, members: &[usize]) -> PermGroup {
        let elems: Vec<DartPermutation> = members.iter().map(|&i| self.elements[i].clone()).collect();
        let mut g = PermGroup::pool(elems);
        g.closed = true;
        g
    }

    /// Minimal generating list found greedily (for display).
    pub fn generators(&self) -> Vec<DartPermutation> {
        let mut gens: Vec<DartPermutation> = Vec::new();
        let mut span: HashSet<Vec<usize>> = HashSet::new();
        span.insert(self.elements[0].image.clone());
        for p in &self.elements {
            if span.contains(&p.image) {
                continue;
            }
            gens.push(p.clone());
            let g = PermGroup::generate(&gens, self.num_darts(), usize::MAX).expect("finite");
            span = g.elements.iter().map(|x| x.image.clone()).collect();
        }
        gens
    }

    pub fn contains(&self, p: &DartPermutation) -> bool {
        self.index.contains_key(&p.image)
    }
}

/// Full automorphism group of `g` (colours, types and directions respected).
pub fn automorphism_group(g: &Multigraph, budget: usize) -> Result<PermGroup, PermError> {
    let elems = automorphisms_with_marks(g, None, false, budget)?;
    let mut grp = PermGroup::pool(elems);
    grp.closed = true;
    Ok(grp)
}

/// All automorphisms, optionally restricted to those moving every vertex
/// (the identity is always included).
pub fn automorphisms_with_marks(
    g: &Multigraph,
    marks: Option<&[u64]>,
    fixed_point_free: bool,
    budget: usize,
) -> Result<Vec<DartPermutation>, PermError> {
    let vauts =
        canon::vertex_automorphisms(g, marks, fixed_point_free, budget).map_err(|_| PermError::TooLarge(budget))?;
    let mut out = Vec::new();
    for vm in vauts {
        let exts = canon::dart_extensions(g, g, &vm, budget).map_err(|_| PermError::TooLarge(budget))?;
        for image in exts {
            out.push(DartPermutation { image });
            if out.len() > budget {
                return Err(PermError::TooLarge(budget));
            }
        }
    }
    if g.num_vertices() == 1 && fixed_point_free {
        // a single vertex is always fixed
        out.retain(|p| p.is_identity());
    }
    Ok(out)
}

/// The identity together with every automorphism that fixes no vertex.
pub fn semiregular_candidates(g: &Multigraph, budget: usize) -> Result<PermGroup, PermError> {
    Ok(PermGroup::pool(automorphisms_with_marks(g, None, true, budget)?))
}

pub fn fixes_nothing(p: &DartPermutation, g: &Multigraph) -> bool {
    if (0..p.len()).any(|d| p.image[d] == d) {
        return false;
    }
    match p.vertex_map(g) {
        Some(vm) => vm.iter().enumerate().all(|(v, &w)| v != w),
        None => false,
    }
}

pub fn is_semiregular(grp: &PermGroup, g: &Multigraph) -> Result<bool, PermError> {
    for (i, p) in grp.elements().iter().enumerate() {
        if !p.is_automorphism(g) {
            return Err(PermError::NotASubgroup(i));
        }
    }
    Ok(grp.elements().iter().all(|p| p.is_identity() || fixes_nothing(p, g)))
}

/// Vertex and dart orbits, each orbit sorted, orbits ordered by minimum.
pub fn orbits(grp: &PermGroup, g: &Multigraph) -> Result<(Vec<Vec<usize>>, Vec<Vec<usize>>), PermError> {
    let mut vmaps = Vec::new();
    for (i, p) in grp.elements().iter().enumerate() {
        if !p.is_automorphism(g) {
            return Err(PermError::NotASubgroup(i));
        }
        vmaps.push(p.vertex_map(g).ok_or(PermError::NotASubgroup(i))?);
    }
    let orbit_sets = |n: usize, f: &dyn Fn(usize, usize) -> usize| {
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for x in 0..n {
            if seen[x] {
                continue;
            }
            let mut o: Vec<usize> = (0..grp.order()).map(|i| f(i, x)).collect();
            o.sort_unstable();
            o.dedup();
            for &y in &o {
                seen[y] = true;
            }
            out.push(o);
        }
        out
    };
    let vo = orbit_sets(g.num_vertices(), &|i, x| vmaps[i][x]);
    let dorb = orbit_sets(g.num_darts(), &|i, x| grp.element(i).image[x]);
    Ok((vo, dorb))
}

type Bits = Vec<u64>;

fn bits_new(n: usize) -> Bits {
    vec![0; n.div_ceil(64)]
}

fn bit_set(b: &mut Bits, i: usize) {
    b[i / 64] |= 1 << (i % 64);
}

fn bit_get(b: &Bits, i: usize) -> bool {
    b[i / 64] >> (i % 64) & 1 == 1
}

fn bits_members(b: &Bits, n: usize) -> Vec<usize> {
    (0..n).filter(|&i| bit_get(b, i)).collect()
}

/// Closure of `base ∪ {g}` inside the pool; None if a product leaves the pool
/// or the size exceeds `limit`.
fn closure(pool: &PermGroup, base: &[usize], gens: &[usize], limit: usize) -> Option<Bits> {
    let m = pool.order();
    let mut bits = bits_new(m);
    let mut elems: Vec<usize> = Vec::new();
    for &x in base.iter().chain(std::iter::once(&0)) {
        if !bit_get(&bits, x) {
            bit_set(&mut bits, x);
            elems.push(x);
        }
    }
    let mut i = 0;
    while i < elems.len() {
        for &g in gens {
            let y = pool.mul(elems[i], g)?;
            if !bit_get(&bits, y) {
                bit_set(&mut bits, y);
                elems.push(y);
                if elems.len() > limit {
                    return None;
                }
            }
        }
        i += 1;
    }
    Some(bits)
}

/// All subgroups of the pool whose order divides `k` (or all subgroups when
/// `k` is None), as bitsets over pool indices.
fn subgroups_dividing(pool: &PermGroup, k: Option<usize>, budget: usize) -> Result<Vec<Bits>, PermError> {
    let m = pool.order();
    let ok_size = |s: usize| k.map(|k| k % s == 0).unwrap_or(true);
    let limit = k.unwrap_or(m);
    let cand: Vec<usize> = (1..m).filter(|&i| ok_size(pool.element(i).order())).collect();
    let mut found: HashSet<Bits> = HashSet::new();
    let mut queue: Vec<(Bits, Vec<usize>)> = Vec::new();
    let mut trivial = bits_new(m);
    bit_set(&mut trivial, 0);
    found.insert(trivial.clone());
    queue.push((trivial, Vec::new()));
    let mut work = 0usize;
    let mut qi = 0;
    while qi < queue.len() {
        let (bits, gens) = queue[qi].clone();
        qi += 1;
        let members = bits_members(&bits, m);
        for &g in &cand {
            if bit_get(&bits, g) {
                continue;
            }
            work += members.len() + 1;
            if work > budget.saturating_mul(64) {
                return Err(PermError::TooLarge(budget));
            }
            let mut ng = gens.clone();
            ng.push(g);
            if let Some(nb) = closure(pool, &members, &ng, limit) {
                let size = nb.iter().map(|w| w.count_ones() as usize).sum();
                if ok_size(size) && found.insert(nb.clone()) {
                    queue.push((nb, ng));
                }
            }
        }
    }
    Ok(found.into_iter().collect())
}

fn conjugacy_key(pool: &PermGroup, bits: &Bits) -> Bits {
    let m = pool.order();
    let members = bits_members(bits, m);
    let mut best: Option<Bits> = None;
    for x in 0..m {
        let Some(xi) = pool.inv(x) else { continue };
        let mut b = bits_new(m);
        for &s in &members {
            let y = pool.mul(x, s).and_then(|t| pool.mul(t, xi));
            match y {
                Some(y) => bit_set(&mut b, y),
                None => return bits.clone(),
            }
        }
        if best.as_ref().map(|c| b < *c).unwrap_or(true) {
            best = Some(b);
        }
    }
    best.unwrap_or_else(|| bits.clone())
}

/// All subgroups of order `k` inside the pool. With `collapse` one
/// representative per conjugacy class is kept (requires a full group).
pub fn enumerate_subgroups_of_order(
    pool: &PermGroup,
    k: usize,
    collapse: bool,
    budget: usize,
) -> Result<Vec<PermGroup>, PermError> {
    if k == 0 || (pool.is_closed() && pool.order() % k != 0) {
        return Ok(Vec::new());
    }
    let m = pool.order();
    let mut subs: Vec<Bits> = subgroups_dividing(pool, Some(k), budget)?
        .into_iter()
        .filter(|b| b.iter().map(|w| w.count_ones() as usize).sum::<usize>() == k)
        .collect();
    subs.sort();
    if collapse {
        let mut seen = HashSet::new();
        subs.retain(|b| seen.insert(conjugacy_key(pool, b)));
    }
    Ok(subs.iter().map(|b| pool.subgroup(&bits_members(b, m))).collect())
}

/// Semiregular subgroups of order k of Aut(g) (elements drawn from the
/// fixed-point-free pool; products leaving the pool are rejected).
pub fn semiregular_subgroups_of_order(
    g: &Multigraph,
    k: usize,
    budget: usize,
) -> Result<Vec<PermGroup>, PermError> {
    let pool = semiregular_candidates(g, budget)?;
    let subs = enumerate_subgroups_of_order(&pool, k, false, budget)?;
    Ok(subs.into_iter().filter(|s| s.elements().iter().all(|p| p.is_identity() || fixes_nothing(p, g))).collect())
}

/// Number of conjugacy classes of subgroups per order.
pub fn subgroup_class_counts(grp: &PermGroup, budget: usize) -> Result<Vec<(usize, usize)>, PermError> {
    let subs = subgroups_dividing(grp, None, budget)?;
    let mut keys: HashSet<Bits> = HashSet::new();
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for b in subs {
        let key = conjugacy_key(grp, &b);
        if keys.insert(key) {
            let size: usize = b.iter().map(|w| w.count_ones() as usize).sum();
            *counts.entry(size).or_default() += 1;
        }
    }
    let mut out: Vec<(usize, usize)> = counts.into_iter().collect();
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multigraph::parse_graph;

    fn cycle(n: usize) -> Multigraph {
        let mut s = String::new();
        for i in 0..n {
            s += &format!("vertex v{i}\n");
        }
        for i in 0..n {
            s += &format!("edge e{i} v{i} v{}\n", (i + 1) % n);
        }
        parse_graph(&s).unwrap()
    }

    fn by_vertex_map(g: &Multigraph, grp: &PermGroup, want: &[usize]) -> DartPermutation {
        grp.elements().iter().find(|p| p.vertex_map(g).unwrap() == want).unwrap().clone()
    }

    #[test]
    fn small_groups() {
        let k2 = parse_graph("vertex a\nvertex b\nedge e a b").unwrap();
        assert_eq!(automorphism_group(&k2, DEFAULT_BUDGET).unwrap().order(), 2);
        let c4 = cycle(4);
        let aut = automorphism_group(&c4, DEFAULT_BUDGET).unwrap();
        assert_eq!(aut.order(), 8);
        assert!(aut.elements().iter().all(|p| p.is_automorphism(&c4)));
        assert!(PermGroup::from_elements(aut.elements().to_vec()).is_ok());
    }

    #[test]
    fn semiregularity_on_c4() {
        let c4 = cycle(4);
        let aut = automorphism_group(&c4, DEFAULT_BUDGET).unwrap();
        let rot = by_vertex_map(&c4, &aut, &[1, 2, 3, 0]);
        let g = PermGroup::generate(&[rot], c4.num_darts(), 100).unwrap();
        assert!(is_semiregular(&g, &c4).unwrap());
        let refl_v = by_vertex_map(&c4, &aut, &[0, 3, 2, 1]);
        let g = PermGroup::generate(&[refl_v], c4.num_darts(), 100).unwrap();
        assert!(!is_semiregular(&g, &c4).unwrap());
        let refl_e = by_vertex_map(&c4, &aut, &[1, 0, 3, 2]);
        let g = PermGroup::generate(&[refl_e], c4.num_darts(), 100).unwrap();
        assert!(is_semiregular(&g, &c4).unwrap());
    }

    #[test]
    fn orbit_examples() {
        let c4 = cycle(4);
        let t = PermGroup::trivial(c4.num_darts());
        let (vo, _) = orbits(&t, &c4).unwrap();
        assert_eq!(vo.len(), 4);
        let aut = automorphism_group(&c4, DEFAULT_BUDGET).unwrap();
        let rot = by_vertex_map(&c4, &aut, &[1, 2, 3, 0]);
        let g = PermGroup::generate(&[rot], c4.num_darts(), 100).unwrap();
        let (vo, dorb) = orbits(&g, &c4).unwrap();
        assert_eq!(vo, vec![vec![0, 1, 2, 3]]);
        assert_eq!(dorb.len(), 2);
    }

    #[test]
    fn cyclic_subgroups() {
        let c6 = cycle(6);
        let aut = automorphism_group(&c6, DEFAULT_BUDGET).unwrap();
        let rot = by_vertex_map(&c6, &aut, &[1, 2, 3, 4, 5, 0]);
        let g = PermGroup::generate(&[rot], c6.num_darts(), 100).unwrap();
        assert_eq!(enumerate_subgroups_of_order(&g, 2, false, DEFAULT_BUDGET).unwrap().len(), 1);
        assert_eq!(enumerate_subgroups_of_order(&g, 3, false, DEFAULT_BUDGET).unwrap().len(), 1);
        assert!(enumerate_subgroups_of_order(&g, 4, false, DEFAULT_BUDGET).unwrap().is_empty());
    }

    // naive: closure of every subset of size <= 2 generators covers all
    // subgroups of a dihedral group
    #[test]
    fn subgroup_counts_match_naive_closure() {
        for n in [4usize, 6] {
            let c = cycle(n);
            let aut = automorphism_group(&c, DEFAULT_BUDGET).unwrap();
            let m = aut.order();
            let mut naive: HashSet<Vec<usize>> = HashSet::new();
            for a in 0..m {
                for b in a..m {
                    let g = PermGroup::generate(&[aut.element(a).clone(), aut.element(b).clone()], c.num_darts(), 1000)
                        .unwrap();
                    let mut idx: Vec<usize> = g.elements().iter().map(|p| aut.index_of(p).unwrap()).collect();
                    idx.sort_unstable();
                    naive.insert(idx);
                }
            }
            let mut total = 0;
            for k in 1..=m {
                if m % k == 0 {
                    let subs = enumerate_subgroups_of_order(&aut, k, false, DEFAULT_BUDGET).unwrap();
                    for s in &subs {
                        assert!(PermGroup::from_elements(s.elements().to_vec()).is_ok());
                    }
                    total += subs.len();
                }
            }
            assert_eq!(total, naive.len());
        }
    }

    #[test]
    fn semiregular_c4() {
        let c4 = cycle(4);
        let subs = semiregular_subgroups_of_order(&c4, 2, DEFAULT_BUDGET).unwrap();
        // rotation by two and the two edge-midpoint reflections
        assert_eq!(subs.len(), 3);
        let subs = semiregular_subgroups_of_order(&c4, 4, DEFAULT_BUDGET).unwrap();
        // the rotation group and the Klein group of both edge reflections
        assert_eq!(subs.len(), 2);
    }

    #[test]
    fn pairs_round_trip() {
        let c4 = cycle(4);
        let aut = automorphism_group(&c4, DEFAULT_BUDGET).unwrap();
        for p in aut.elements() {
            let q = DartPermutation::from_pairs(&c4, &p.to_pairs(&c4)).unwrap();
            assert_eq!(&q, p);
        }
    }

    #[test]
    fn platonic_subgroup_classes() {
        use crate::generators as gen;
        let t = automorphism_group(&gen::tetrahedron(), DEFAULT_BUDGET).unwrap();
        let counts = subgroup_class_counts(&t, DEFAULT_BUDGET).unwrap();
        assert_eq!(counts, vec![(1, 1), (2, 2), (3, 1), (4, 3), (6, 1), (8, 1), (12, 1), (24, 1)]);
        let c = automorphism_group(&gen::cube(), DEFAULT_BUDGET).unwrap();
        let counts = subgroup_class_counts(&c, DEFAULT_BUDGET).unwrap();
        let want = [(1, 1), (2, 5), (3, 1), (4, 9), (6, 3), (8, 7), (12, 2), (16, 1), (24, 3), (48, 1)];
        assert_eq!(counts, want.to_vec());
        let d = automorphism_group(&gen::dodecahedron(), DEFAULT_BUDGET).unwrap();
        let counts = subgroup_class_counts(&d, DEFAULT_BUDGET).unwrap();
        assert_eq!(counts.len(), 13);
        assert_eq!(counts[1], (2, 3));
    }
}
