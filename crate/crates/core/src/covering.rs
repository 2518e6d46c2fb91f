//! Covering projections, regularity via permutation voltages, quotients by
//! semiregular groups and covering certificates.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::multigraph::{EdgeType, GraphBuilder, Multigraph};
use crate::perm::{is_morphism_iso, is_semiregular, orbits, DartPermutation, PermError, PermGroup};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoverError {
    #[error("map is not a covering projection")]
    NotACovering,
    #[error("group does not act semiregularly")]
    NotSemiregular,
    #[error(transparent)]
    Perm(#[from] PermError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CertError {
    #[error("certificate elements do not form a group: {0}")]
    NotAGroup(String),
    #[error("certificate elements are not automorphisms: {0}")]
    NotAutomorphisms(String),
    #[error("certificate group is not semiregular")]
    NotSemiregular,
    #[error("quotient does not match H: {0}")]
    QuotientMismatch(String),
}

/// Dart map G -> H; vertex and edge maps are induced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoveringMap {
    pub dart_map: Vec<usize>,
}

impl CoveringMap {
    pub fn vertex_map(&self, g: &Multigraph, h: &Multigraph) -> Option<Vec<usize>> {
        let mut vm = vec![usize::MAX; g.num_vertices()];
        for d in 0..g.num_darts() {
            let x = *self.dart_map.get(d)?;
            if x >= h.num_darts() {
                return None;
            }
            let w = h.vertex_of(x);
            let v = g.vertex_of(d);
            if vm[v] == usize::MAX {
                vm[v] = w;
            } else if vm[v] != w {
                return None;
            }
        }
        if vm.iter().any(|&x| x == usize::MAX) {
            // only a dartless single vertex may remain unmapped
            if g.num_vertices() == 1 && h.num_vertices() == 1 {
                return Some(vec![0]);
            }
            return None;
        }
        Some(vm)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CoveringReport {
    pub is_covering: bool,
    pub k: Option<usize>,
    pub diagnostics: Vec<String>,
}

pub fn check_covering(p: &CoveringMap, g: &Multigraph, h: &Multigraph) -> CoveringReport {
    let mut diag = Vec::new();
    if p.dart_map.len() != g.num_darts() {
        diag.push("dart map is not total".to_string());
        return CoveringReport { is_covering: false, k: None, diagnostics: diag };
    }
    let Some(vm) = p.vertex_map(g, h) else {
        diag.push("dart map does not respect incidence".to_string());
        return CoveringReport { is_covering: false, k: None, diagnostics: diag };
    };
    for d in 0..g.num_darts() {
        let x = p.dart_map[d];
        if p.dart_map[g.theta(d)] != h.theta(x) {
            diag.push(format!("theta not respected at dart {}", g.dart_id(d)));
        }
        let a = g.edge(g.edge_of(d));
        let b = h.edge(h.edge_of(x));
        if a.color != b.color {
            diag.push(format!("edge colour changes at dart {}", g.dart_id(d)));
        }
        if !b.is_half() {
            if a.etype != b.etype {
                diag.push(format!("edge type changes at dart {}", g.dart_id(d)));
            }
            if a.etype == EdgeType::Directed && ((a.darts[0] == d) != (b.darts[0] == x)) {
                diag.push(format!("direction not respected at dart {}", g.dart_id(d)));
            }
        } else if a.etype == EdgeType::Directed {
            diag.push(format!("directed edge folded onto a half-edge at {}", g.dart_id(d)));
        }
    }
    for u in 0..g.num_vertices() {
        if g.vertex_color(u) != h.vertex_color(vm[u]) {
            diag.push(format!("vertex colour changes at {}", g.vertex_id(u)));
        }
        let mut imgs: Vec<usize> = g.darts_at(u).iter().map(|&d| p.dart_map[d]).collect();
        imgs.sort_unstable();
        let mut want = h.darts_at(vm[u]).to_vec();
        want.sort_unstable();
        if imgs != want {
            diag.push(format!("not locally bijective at {}", g.vertex_id(u)));
        }
    }
    let mut vfib = vec![0usize; h.num_vertices()];
    for &w in &vm {
        vfib[w] += 1;
    }
    let mut dfib = vec![0usize; h.num_darts()];
    for &x in &p.dart_map {
        dfib[x] += 1;
    }
    let k = vfib.first().copied().unwrap_or(0);
    if vfib.iter().any(|&c| c != k) || dfib.iter().any(|&c| c != k) {
        diag.push("fibres differ in size".to_string());
    }
    diag.sort();
    diag.dedup();
    let ok = diag.is_empty();
    CoveringReport { is_covering: ok, k: ok.then_some(k), diagnostics: diag }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct VoltageReport {
    pub root: String,
    pub tree_darts: Vec<String>,
    /// co-tree dart of H -> permutation of fibre numbers
    pub voltages: BTreeMap<String, Vec<usize>>,
    pub group_order: usize,
    pub k: usize,
}

/// Regularity test: the voltage group generated by co-tree permutations has
/// order exactly k.
pub fn check_regular(p: &CoveringMap, g: &Multigraph, h: &Multigraph) -> Result<(bool, VoltageReport), CoverError> {
    let rep = check_covering(p, g, h);
    if !rep.is_covering {
        return Err(CoverError::NotACovering);
    }
    let k = rep.k.unwrap_or(1);
    let vm = p.vertex_map(g, h).ok_or(CoverError::NotACovering)?;
    let nh = h.num_vertices();
    let root = (0..nh).min_by(|&a, &b| h.vertex_id(a).cmp(h.vertex_id(b))).unwrap_or(0);
    // BFS tree in H
    let mut parent_dart = vec![usize::MAX; nh];
    let mut order = vec![root];
    let mut seen = vec![false; nh];
    seen[root] = true;
    let mut q = VecDeque::from([root]);
    let mut tree = vec![false; h.num_darts()];
    while let Some(x) = q.pop_front() {
        for &d in h.darts_at(x) {
            let y = h.other_end(d);
            if !seen[y] {
                seen[y] = true;
                parent_dart[y] = d;
                tree[d] = true;
                tree[h.theta(d)] = true;
                order.push(y);
                q.push_back(y);
            }
        }
    }
    // darts of G at u indexed by their image
    let lift = |u: usize, t: usize| -> usize {
        *g.darts_at(u).iter().find(|&&d| p.dart_map[d] == t).expect("locally bijective")
    };
    let mut fiber: Vec<Vec<usize>> = vec![Vec::new(); nh];
    for u in 0..g.num_vertices() {
        fiber[vm[u]].push(u);
    }
    let mut number = vec![usize::MAX; g.num_vertices()];
    for (i, &u) in fiber[root].iter().enumerate() {
        number[u] = i;
    }
    for &y in order.iter().skip(1) {
        let t = parent_dart[y];
        let x = h.vertex_of(t);
        for &u in &fiber[x] {
            let d = lift(u, t);
            number[g.other_end(d)] = number[u];
        }
    }
    let mut voltages = BTreeMap::new();
    let mut gens: Vec<Vec<usize>> = Vec::new();
    for t in 0..h.num_darts() {
        if tree[t] {
            continue;
        }
        let x = h.vertex_of(t);
        let mut sigma = vec![usize::MAX; k];
        for &u in &fiber[x] {
            let d = lift(u, t);
            sigma[number[u]] = number[g.other_end(d)];
        }
        voltages.insert(h.dart_id(t).to_string(), sigma.clone());
        gens.push(sigma);
    }
    let order_found = small_group_order(&gens, k, k + 1);
    let tree_darts = (0..nh).filter(|&y| y != root).map(|y| h.dart_id(parent_dart[y]).to_string()).collect();
    let report =
        VoltageReport { root: h.vertex_id(root).to_string(), tree_darts, voltages, group_order: order_found, k };
    Ok((order_found == k, report))
}

/// Order of the group generated by permutations of 0..k, stopping at `cap`.
fn small_group_order(gens: &[Vec<usize>], k: usize, cap: usize) -> usize {
    let id: Vec<usize> = (0..k).collect();
    let mut seen: std::collections::HashSet<Vec<usize>> = std::collections::HashSet::new();
    seen.insert(id.clone());
    let mut elems = vec![id];
    let mut i = 0;
    while i < elems.len() {
        for g in gens {
            let p: Vec<usize> = elems[i].iter().map(|&x| g[x]).collect();
            if seen.insert(p.clone()) {
                elems.push(p);
                if elems.len() >= cap {
                    return elems.len();
                }
            }
        }
        i += 1;
    }
    elems.len()
}

/// Covering transformations: automorphisms of G commuting with p, found by
/// extending every choice of image for one base vertex.
pub fn covering_transformations(p: &CoveringMap, g: &Multigraph, h: &Multigraph) -> Vec<DartPermutation> {
    let Some(vm) = p.vertex_map(g, h) else { return Vec::new() };
    if g.num_vertices() == 0 {
        return vec![DartPermutation::identity(0)];
    }
    let base = 0usize;
    let mut out = Vec::new();
    for cand in 0..g.num_vertices() {
        if vm[cand] != vm[base] {
            continue;
        }
        let mut vimg = vec![usize::MAX; g.num_vertices()];
        let mut dimg = vec![usize::MAX; g.num_darts()];
        vimg[base] = cand;
        let mut q = VecDeque::from([base]);
        let mut ok = true;
        'bfs: while let Some(x) = q.pop_front() {
            let y = vimg[x];
            for &d in g.darts_at(x) {
                let t = p.dart_map[d];
                let Some(&e) = g.darts_at(y).iter().find(|&&e| p.dart_map[e] == t) else {
                    ok = false;
                    break 'bfs;
                };
                if dimg[d] != usize::MAX && dimg[d] != e {
                    ok = false;
                    break 'bfs;
                }
                dimg[d] = e;
                let (a, b) = (g.theta(d), g.theta(e));
                if dimg[a] != usize::MAX && dimg[a] != b {
                    ok = false;
                    break 'bfs;
                }
                dimg[a] = b;
                let (u, w) = (g.vertex_of(a), g.vertex_of(b));
                if vimg[u] == usize::MAX {
                    vimg[u] = w;
                    q.push_back(u);
                } else if vimg[u] != w {
                    ok = false;
                    break 'bfs;
                }
            }
        }
        if !ok || dimg.iter().any(|&x| x == usize::MAX) {
            continue;
        }
        let perm = DartPermutation { image: dimg };
        if perm.is_automorphism(g) {
            out.push(perm);
        }
    }
    out
}

/// Quotient G/Γ. Quotient vertices, edges and darts take the ids of their
/// orbit representatives (smallest index); an edge whose darts share an
/// orbit becomes a free half-edge named after the edge.
pub fn build_quotient(g: &Multigraph, grp: &PermGroup) -> Result<(Multigraph, CoveringMap), CoverError> {
    if !is_semiregular(grp, g)? {
        return Err(CoverError::NotSemiregular);
    }
    quotient_unchecked(g, grp)
}

/// Quotient construction without the semiregularity check.
pub fn quotient_unchecked(g: &Multigraph, grp: &PermGroup) -> Result<(Multigraph, CoveringMap), CoverError> {
    let (vorb, dorb) = orbits(grp, g)?;
    let mut vclass = vec![0usize; g.num_vertices()];
    for (i, o) in vorb.iter().enumerate() {
        for &v in o {
            vclass[v] = i;
        }
    }
    let mut dclass = vec![0usize; g.num_darts()];
    for (i, o) in dorb.iter().enumerate() {
        for &d in o {
            dclass[d] = i;
        }
    }
    let mut b = GraphBuilder::new();
    for o in &vorb {
        b.add_vertex(g.vertex_id(o[0]), g.vertex_color(o[0]));
    }
    let mut qdart_of_class = vec![usize::MAX; dorb.len()];
    let mut next_dart = 0usize;
    for e in 0..g.num_edges() {
        let ed = g.edge(e);
        let [d0, d1] = ed.darts;
        if qdart_of_class[dclass[d0]] != usize::MAX {
            continue;
        }
        let u = vclass[g.vertex_of(d0)];
        if ed.is_half() || dclass[d0] == dclass[d1] {
            b.add_half(&ed.id, u, ed.color);
            qdart_of_class[dclass[d0]] = next_dart;
            next_dart += 1;
        } else {
            let v = vclass[g.vertex_of(d1)];
            b.add_edge(&ed.id, u, v, ed.color, ed.etype);
            qdart_of_class[dclass[d0]] = next_dart;
            qdart_of_class[dclass[d1]] = next_dart + 1;
            next_dart += 2;
        }
    }
    let q = b.build();
    let dart_map = (0..g.num_darts()).map(|d| qdart_of_class[dclass[d]]).collect();
    Ok((q, CoveringMap { dart_map }))
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsoJson {
    pub vertices: BTreeMap<String, String>,
    pub darts: BTreeMap<String, String>,
}

/// Certificate in file form: k dart permutations of G and an isomorphism
/// from G/Γ (named as by `build_quotient`) to H.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub k: usize,
    pub elements: Vec<Vec<[String; 2]>>,
    pub iso: IsoJson,
}

impl Certificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serialises")
    }

    pub fn from_json(text: &str) -> Result<Certificate, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Assemble a certificate from a group on G, the quotient it produces and
    /// an isomorphism quotient -> H given as (vertex map, dart map).
    pub fn assemble(
        g: &Multigraph,
        grp: &PermGroup,
        quotient: &Multigraph,
        h: &Multigraph,
        vmap: &[usize],
        dmap: &[usize],
    ) -> Certificate {
        let elements = grp.elements().iter().map(|p| p.to_pairs(g)).collect();
        let vertices = (0..quotient.num_vertices())
            .map(|v| (quotient.vertex_id(v).to_string(), h.vertex_id(vmap[v]).to_string()))
            .collect();
        let darts = (0..quotient.num_darts())
            .map(|d| (quotient.dart_id(d).to_string(), h.dart_id(dmap[d]).to_string()))
            .collect();
        Certificate { k: grp.order(), elements, iso: IsoJson { vertices, darts } }
    }
}

pub fn verify_certificate(g: &Multigraph, h: &Multigraph, c: &Certificate) -> Result<(), CertError> {
    let mut perms = Vec::new();
    for (i, pairs) in c.elements.iter().enumerate() {
        let p = DartPermutation::from_pairs(g, pairs)
            .map_err(|e| CertError::NotAutomorphisms(format!("element {i}: {e}")))?;
        if !p.is_automorphism(g) {
            return Err(CertError::NotAutomorphisms(format!("element {i}")));
        }
        perms.push(p);
    }
    if perms.len() != c.k {
        return Err(CertError::NotAGroup(format!("{} elements listed for k = {}", perms.len(), c.k)));
    }
    let mut set: HashMap<Vec<usize>, ()> = HashMap::new();
    for p in &perms {
        if set.insert(p.image.clone(), ()).is_some() {
            return Err(CertError::NotAGroup("repeated element".into()));
        }
    }
    if !set.contains_key(&DartPermutation::identity(g.num_darts()).image) {
        return Err(CertError::NotAGroup("identity missing".into()));
    }
    for a in &perms {
        for b in &perms {
            if !set.contains_key(&a.compose(b).image) {
                return Err(CertError::NotAGroup("not closed under composition".into()));
            }
        }
    }
    if h.num_vertices() == 0 || g.num_vertices() != c.k * h.num_vertices() {
        return Err(CertError::QuotientMismatch(format!(
            "k = {} does not match |V(G)| = {} and |V(H)| = {}",
            c.k,
            g.num_vertices(),
            h.num_vertices()
        )));
    }
    let grp = PermGroup::from_elements(perms).map_err(|e| CertError::NotAGroup(e.to_string()))?;
    match is_semiregular(&grp, g) {
        Ok(true) => {}
        Ok(false) => return Err(CertError::NotSemiregular),
        Err(e) => return Err(CertError::NotAutomorphisms(e.to_string())),
    }
    let (q, _) = build_quotient(g, &grp).map_err(|_| CertError::NotSemiregular)?;
    let mut dmap = vec![usize::MAX; q.num_darts()];
    for (a, b) in &c.iso.darts {
        let x = q.dart_index(a).ok_or_else(|| CertError::QuotientMismatch(format!("unknown quotient dart {a}")))?;
        let y = h.dart_index(b).ok_or_else(|| CertError::QuotientMismatch(format!("unknown dart {b} of H")))?;
        dmap[x] = y;
    }
    if dmap.iter().any(|&x| x == usize::MAX) {
        return Err(CertError::QuotientMismatch("dart map is not total".into()));
    }
    for (a, b) in &c.iso.vertices {
        let x = q.vertex_index(a).ok_or_else(|| CertError::QuotientMismatch(format!("unknown quotient vertex {a}")))?;
        let y = h.vertex_index(b).ok_or_else(|| CertError::QuotientMismatch(format!("unknown vertex {b} of H")))?;
        let consistent = q.darts_at(x).iter().all(|&d| h.vertex_of(dmap[d]) == y);
        if !consistent {
            return Err(CertError::QuotientMismatch(format!("vertex map disagrees with dart map at {a}")));
        }
    }
    if c.iso.vertices.len() != q.num_vertices() {
        return Err(CertError::QuotientMismatch("vertex map is not total".into()));
    }
    if !is_morphism_iso(&q, h, &dmap) {
        return Err(CertError::QuotientMismatch("dart map is not an isomorphism".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon::find_isomorphism;
    use crate::generators as gen;
    use crate::multigraph::parse_graph;
    use crate::perm::{automorphism_group, semiregular_subgroups_of_order, DEFAULT_BUDGET};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn group_by_vertex_map(g: &Multigraph, vm: &[usize]) -> PermGroup {
        let aut = automorphism_group(g, DEFAULT_BUDGET).unwrap();
        let p = aut.elements().iter().find(|p| p.vertex_map(g).unwrap() == vm).unwrap().clone();
        PermGroup::generate(&[p], g.num_darts(), 1000).unwrap()
    }

    fn antipodal_cube() -> (Multigraph, PermGroup) {
        let cube = gen::cube();
        let vm: Vec<usize> = (0..8).map(|v| v ^ 7).collect();
        let grp = group_by_vertex_map(&cube, &vm);
        (cube, grp)
    }

    #[test]
    fn cube_antipodal_quotient_is_k4() {
        let (cube, grp) = antipodal_cube();
        let (q, p) = build_quotient(&cube, &grp).unwrap();
        assert!(find_isomorphism(&q, None, &gen::complete(4), None).is_some());
        let (reg, rep) = check_regular(&p, &cube, &q).unwrap();
        assert!(reg);
        assert_eq!(rep.group_order, 2);
        let ct = covering_transformations(&p, &cube, &q);
        assert_eq!(ct.len(), 2);
        assert!(ct.iter().all(|x| grp.contains(x)));
    }

    #[test]
    fn c6_rotation_by_two() {
        let c6 = gen::cycle(6);
        let grp = group_by_vertex_map(&c6, &[2, 3, 4, 5, 0, 1]);
        let (q, _) = build_quotient(&c6, &grp).unwrap();
        let want = parse_graph("vertex a\nvertex b\nedge x a b\nedge y a b").unwrap();
        assert!(find_isomorphism(&q, None, &want, None).is_some());
    }

    #[test]
    fn c4_edge_reflection() {
        let c4 = gen::cycle(4);
        let grp = group_by_vertex_map(&c4, &[1, 0, 3, 2]);
        let (q, _) = build_quotient(&c4, &grp).unwrap();
        let want = parse_graph("vertex a\nvertex b\nedge x a b\nhalf h a\nhalf k b").unwrap();
        assert!(find_isomorphism(&q, None, &want, None).is_some());
        let bad = group_by_vertex_map(&c4, &[0, 3, 2, 1]);
        assert_eq!(build_quotient(&c4, &bad).unwrap_err(), CoverError::NotSemiregular);
    }

    #[test]
    fn identity_cover() {
        let g = gen::cube();
        let p = CoveringMap { dart_map: (0..g.num_darts()).collect() };
        let r = check_covering(&p, &g, &g);
        assert!(r.is_covering);
        assert_eq!(r.k, Some(1));
        assert!(check_regular(&p, &g, &g).unwrap().0);
    }

    #[test]
    fn c4_to_c3_fails() {
        let c4 = gen::cycle(4);
        let c3 = gen::cycle(3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let dm: Vec<usize> = (0..c4.num_darts()).map(|_| rng.gen_range(0..c3.num_darts())).collect();
            assert!(!check_covering(&CoveringMap { dart_map: dm }, &c4, &c3).is_covering);
        }
    }

    // Three-fold covers of a two-vertex base with a loop at each vertex and
    // one joining edge: a regular one from a 3-cycle-of-prisms and an
    // irregular one with mixed voltages.
    #[test]
    fn regular_and_irregular_threefold_covers() {
        let h = parse_graph("vertex a\nvertex b\nedge la a a\nedge ab a b\nhalf hb b").unwrap();
        // a half-edge lifts to an involution, trivial in Z3: three halves
        let g = parse_graph(
            "vertex a0\nvertex a1\nvertex a2\nvertex b0\nvertex b1\nvertex b2\n\
             edge l0 a0 a1\nedge l1 a1 a2\nedge l2 a2 a0\n\
             edge m0 a0 b0\nedge m1 a1 b1\nedge m2 a2 b2\n\
             half h0 b0\nhalf h1 b1\nhalf h2 b2\n",
        )
        .unwrap();
        let p = projection_by_names(&g, &h);
        assert!(check_covering(&p, &g, &h).is_covering);
        let (reg, rep) = check_regular(&p, &g, &h).unwrap();
        assert!(reg);
        assert_eq!(covering_transformations(&p, &g, &h).len(), 3);
        assert_eq!(rep.k, 3);

        // irregular: the half-edge lifts to a transposition plus a fixed half
        let g2 = parse_graph(
            "vertex a0\nvertex a1\nvertex a2\nvertex b0\nvertex b1\nvertex b2\n\
             edge l0 a0 a1\nedge l1 a1 a2\nedge l2 a2 a0\n\
             edge m0 a0 b0\nedge m1 a1 b1\nedge m2 a2 b2\n\
             edge h0 b0 b1\nhalf h2 b2\n",
        )
        .unwrap();
        let p2 = projection_by_names(&g2, &h);
        assert!(check_covering(&p2, &g2, &h).is_covering);
        let (reg, rep) = check_regular(&p2, &g2, &h).unwrap();
        assert!(!reg);
        assert!(rep.group_order > 3);
        assert_eq!(covering_transformations(&p2, &g2, &h).len(), 1);
    }

    // map darts by the leading letter of their edge id
    fn projection_by_names(g: &Multigraph, h: &Multigraph) -> CoveringMap {
        let mut dm = Vec::new();
        for d in 0..g.num_darts() {
            let e = g.edge(g.edge_of(d));
            let hid = match e.id.chars().next().unwrap() {
                'l' if d == e.darts[0] => "la.0",
                'l' => "la.1",
                'm' if d == e.darts[0] => "ab.0",
                'm' => "ab.1",
                _ => "hb",
            };
            dm.push(h.dart_index(hid).unwrap());
        }
        CoveringMap { dart_map: dm }
    }

    #[test]
    fn certificates() {
        let (cube, grp) = antipodal_cube();
        let k4 = gen::complete(4);
        let (q, _) = build_quotient(&cube, &grp).unwrap();
        let (vm, dm) = find_isomorphism(&q, None, &k4, None).unwrap();
        let cert = Certificate::assemble(&cube, &grp, &q, &k4, &vm, &dm);
        assert_eq!(verify_certificate(&cube, &k4, &cert), Ok(()));
        let back = Certificate::from_json(&cert.to_json()).unwrap();
        assert_eq!(back, cert);

        let mut broken = cert.clone();
        broken.elements.truncate(1);
        broken.k = 1;
        assert!(verify_certificate(&cube, &k4, &broken).is_err());

        // a non-closed set: identity plus a rotation of order four
        let aut = automorphism_group(&cube, DEFAULT_BUDGET).unwrap();
        let r4 = aut.elements().iter().find(|p| p.order() == 4).unwrap();
        let bad = Certificate {
            k: 2,
            elements: vec![DartPermutation::identity(cube.num_darts()).to_pairs(&cube), r4.to_pairs(&cube)],
            iso: cert.iso.clone(),
        };
        assert!(matches!(verify_certificate(&cube, &k4, &bad), Err(CertError::NotAGroup(_))));
    }

    #[test]
    fn petersen_certificate() {
        let pet = gen::petersen();
        let base = gen::petersen_base();
        let subs = semiregular_subgroups_of_order(&pet, 5, DEFAULT_BUDGET).unwrap();
        let mut found = false;
        for s in subs {
            let (q, _) = build_quotient(&pet, &s).unwrap();
            if let Some((vm, dm)) = find_isomorphism(&q, None, &base, None) {
                let cert = Certificate::assemble(&pet, &s, &q, &base, &vm, &dm);
                assert_eq!(verify_certificate(&pet, &base, &cert), Ok(()));
                found = true;
            }
        }
        assert!(found);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn quotient_projection_is_regular(seed in 0u64..1000, n in 3usize..9) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = gen::random_connected_planar(n, 2 * n, &mut rng);
            for k in 2..=n {
                if n % k != 0 { continue; }
                for s in semiregular_subgroups_of_order(&g, k, DEFAULT_BUDGET).unwrap() {
                    let (q, p) = build_quotient(&g, &s).unwrap();
                    prop_assert_eq!(q.num_vertices() * k, n);
                    let rep = check_covering(&p, &g, &q);
                    prop_assert!(rep.is_covering);
                    prop_assert_eq!(rep.k, Some(k));
                    let (reg, _) = check_regular(&p, &g, &q).unwrap();
                    prop_assert!(reg);
                    let ct = covering_transformations(&p, &g, &q);
                    prop_assert_eq!(ct.len(), k);
                    for x in &ct { prop_assert!(s.contains(x)); }
                    // unique walk lifting: random walks lift uniquely from each fibre point
                    let vm = p.vertex_map(&g, &q).unwrap();
                    for _ in 0..5 {
                        let mut x = rng.gen_range(0..q.num_vertices());
                        let mut walk = Vec::new();
                        for _ in 0..8 {
                            let ds = q.darts_at(x);
                            if ds.is_empty() { break; }
                            let d = ds[rng.gen_range(0..ds.len())];
                            walk.push(d);
                            x = q.other_end(d);
                        }
                        if walk.is_empty() { continue; }
                        let start = q.vertex_of(walk[0]);
                        for u0 in (0..n).filter(|&u| vm[u] == start) {
                            let mut u = u0;
                            for &t in &walk {
                                let lifts: Vec<usize> = g.darts_at(u).iter().cloned().filter(|&d| p.dart_map[d] == t).collect();
                                prop_assert_eq!(lifts.len(), 1);
                                u = g.other_end(lifts[0]);
                            }
                        }
                    }
                }
            }
        }
    }
}
