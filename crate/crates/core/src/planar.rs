//! Planar embeddings as rotation systems, map automorphisms, and the
//! class services used by the structural algorithm.

use std::collections::{HashMap, HashSet, VecDeque};

use thiserror::Error;

use crate::canon::{self, View};
use crate::multigraph::Multigraph;
use crate::perm::{DartPermutation, PermGroup};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlanarError {
    #[error("graph is not planar: {0}")]
    NonPlanar(String),
    #[error("graph is not 3-connected after removing pendant edges")]
    Not3Connected,
    #[error("graph is not connected")]
    Disconnected,
}

/// Cyclic order of darts around every vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RotationSystem {
    /// rotation[v] lists the darts at v in cyclic order
    pub rotation: Vec<Vec<usize>>,
    /// next dart in the rotation at its vertex
    pub next: Vec<usize>,
    pub prev: Vec<usize>,
}

/// An angle (v, d, d') with d' the successor of d around v.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Angle {
    pub v: usize,
    pub d: usize,
    pub d_next: usize,
}

impl RotationSystem {
    pub fn from_cycles(g: &Multigraph, rotation: Vec<Vec<usize>>) -> RotationSystem {
        let mut next = vec![usize::MAX; g.num_darts()];
        let mut prev = vec![usize::MAX; g.num_darts()];
        for cyc in &rotation {
            for i in 0..cyc.len() {
                let a = cyc[i];
                let b = cyc[(i + 1) % cyc.len()];
                next[a] = b;
                prev[b] = a;
            }
        }
        RotationSystem { rotation, next, prev }
    }

    pub fn angles(&self) -> Vec<Angle> {
        let mut out = Vec::new();
        for (v, cyc) in self.rotation.iter().enumerate() {
            for &d in cyc {
                out.push(Angle { v, d, d_next: self.next[d] });
            }
        }
        out
    }

    /// Faces as dart cycles of `next ∘ theta`.
    pub fn faces(&self, g: &Multigraph) -> Vec<Vec<usize>> {
        let mut seen = vec![false; g.num_darts()];
        let mut out = Vec::new();
        for d0 in 0..g.num_darts() {
            if seen[d0] {
                continue;
            }
            let mut face = Vec::new();
            let mut d = d0;
            while !seen[d] {
                seen[d] = true;
                face.push(d);
                d = self.next[g.theta(d)];
            }
            out.push(face);
        }
        out
    }

    /// Euler characteristic check for a connected graph on the sphere.
    pub fn is_spherical(&self, g: &Multigraph) -> bool {
        if g.num_darts() == 0 {
            return g.num_vertices() <= 1;
        }
        if self.next.iter().any(|&x| x == usize::MAX) {
            return false;
        }
        let v = g.num_vertices() as i64;
        let e = g.num_full_edges() as i64;
        let f = self.faces(g).len() as i64;
        v - e + f == 2
    }
}

/// Biconnected components of a simple undirected graph given as adjacency
/// lists; returns edge lists per block.
pub(crate) fn simple_blocks(n: usize, adj: &[Vec<usize>]) -> Vec<Vec<(usize, usize)>> {
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut time = 0;
    let mut stack: Vec<(usize, usize)> = Vec::new();
    let mut blocks = Vec::new();
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        disc[root] = time;
        low[root] = time;
        time += 1;
        // iterative DFS: (vertex, parent, next neighbour index)
        let mut dfs: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
        while let Some(&mut (v, parent, ref mut i)) = dfs.last_mut() {
            if *i < adj[v].len() {
                let u = adj[v][*i];
                *i += 1;
                if u == parent {
                    continue;
                }
                if disc[u] == usize::MAX {
                    stack.push((v, u));
                    disc[u] = time;
                    low[u] = time;
                    time += 1;
                    dfs.push((u, v, 0));
                } else if disc[u] < disc[v] {
                    stack.push((v, u));
                    low[v] = low[v].min(disc[u]);
                }
            } else {
                dfs.pop();
                if let Some(&(p, _, _)) = dfs.last() {
                    low[p] = low[p].min(low[v]);
                    if low[v] >= disc[p] {
                        let mut block = Vec::new();
                        while let Some(e) = stack.pop() {
                            block.push(e);
                            if e == (p, v) {
                                break;
                            }
                        }
                        blocks.push(block);
                    }
                }
            }
        }
    }
    blocks
}

/// Embed one 2-connected simple block with path addition. Vertices are
/// local indices; returns the cyclic neighbour order at every vertex.
fn embed_block(n: usize, edges: &[(usize, usize)]) -> Result<Vec<Vec<usize>>, String> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    for a in adj.iter_mut() {
        a.sort_unstable();
    }
    let key = |a: usize, b: usize| (a.min(b), a.max(b));
    // initial cycle: DFS until a back edge closes a cycle
    let cycle = find_cycle(n, &adj).ok_or("block without a cycle")?;
    let mut in_h = vec![false; n];
    let mut h_edges: HashSet<(usize, usize)> = HashSet::new();
    for i in 0..cycle.len() {
        in_h[cycle[i]] = true;
        h_edges.insert(key(cycle[i], cycle[(i + 1) % cycle.len()]));
    }
    let mut faces: Vec<Vec<usize>> = vec![cycle.clone(), cycle.iter().rev().cloned().collect()];
    let total = edges.len();
    while h_edges.len() < total {
        // fragments
        let mut frags: Vec<(Vec<usize>, Vec<usize>)> = Vec::new(); // (attachments, interior vertices)
        let mut chords: Vec<(usize, usize)> = Vec::new();
        for &(a, b) in edges {
            if in_h[a] && in_h[b] && !h_edges.contains(&key(a, b)) {
                chords.push((a.min(b), a.max(b)));
            }
        }
        chords.sort_unstable();
        chords.dedup();
        for &(a, b) in &chords {
            frags.push((vec![a, b], Vec::new()));
        }
        let mut comp = vec![usize::MAX; n];
        for s in 0..n {
            if in_h[s] || comp[s] != usize::MAX {
                continue;
            }
            let cid = frags.len();
            let mut interior = vec![s];
            let mut att = Vec::new();
            comp[s] = cid;
            let mut q = VecDeque::from([s]);
            while let Some(x) = q.pop_front() {
                for &y in &adj[x] {
                    if in_h[y] {
                        att.push(y);
                    } else if comp[y] == usize::MAX {
                        comp[y] = cid;
                        interior.push(y);
                        q.push_back(y);
                    }
                }
            }
            att.sort_unstable();
            att.dedup();
            frags.push((att, interior));
        }
        // admissible faces
        let mut choice: Option<(usize, usize)> = None;
        let mut fallback: Option<(usize, usize)> = None;
        for (fi, (att, _)) in frags.iter().enumerate() {
            let adm: Vec<usize> = (0..faces.len())
                .filter(|&f| att.iter().all(|a| faces[f].contains(a)))
                .collect();
            if adm.is_empty() {
                return Err("a fragment fits in no face".into());
            }
            if adm.len() == 1 && choice.is_none() {
                choice = Some((fi, adm[0]));
            }
            if fallback.is_none() {
                fallback = Some((fi, adm[0]));
            }
        }
        let (fi, face_idx) = choice.or(fallback).expect("fragments exist while edges remain");
        let (att, interior) = &frags[fi];
        let path: Vec<usize> = if interior.is_empty() {
            vec![att[0], att[1]]
        } else {
            // path from an attachment through the interior to another attachment
            let inside: HashSet<usize> = interior.iter().cloned().collect();
            let a = att[0];
            let mut par: HashMap<usize, usize> = HashMap::new();
            let mut q = VecDeque::new();
            for &y in &adj[a] {
                if inside.contains(&y) && !par.contains_key(&y) {
                    par.insert(y, a);
                    q.push_back(y);
                }
            }
            let mut end = None;
            'bfs: while let Some(x) = q.pop_front() {
                for &y in &adj[x] {
                    if in_h[y] && y != a {
                        end = Some((x, y));
                        break 'bfs;
                    }
                    if inside.contains(&y) && !par.contains_key(&y) {
                        par.insert(y, x);
                        q.push_back(y);
                    }
                }
            }
            let (last, b) = end.ok_or("fragment with a single attachment")?;
            let mut p = vec![b, last];
            let mut x = last;
            while let Some(&px) = par.get(&x) {
                p.push(px);
                if px == a {
                    break;
                }
                x = px;
            }
            p.reverse();
            p
        };
        let face = faces.swap_remove(face_idx);
        let a = path[0];
        let b = *path.last().unwrap();
        let i = face.iter().position(|&x| x == a).unwrap();
        let j = face.iter().position(|&x| x == b).unwrap();
        let m = face.len();
        let inner: Vec<usize> = path[1..path.len() - 1].to_vec();
        let mut f1 = Vec::new();
        let mut k = i;
        loop {
            f1.push(face[k]);
            if k == j {
                break;
            }
            k = (k + 1) % m;
        }
        f1.extend(inner.iter().rev());
        let mut f2 = Vec::new();
        let mut k = j;
        loop {
            f2.push(face[k]);
            if k == i {
                break;
            }
            k = (k + 1) % m;
        }
        f2.extend(inner.iter());
        faces.push(f1);
        faces.push(f2);
        for w in path.windows(2) {
            h_edges.insert(key(w[0], w[1]));
        }
        for &x in &path {
            in_h[x] = true;
        }
    }
    // rotation from oriented faces: for x -> y -> z, succ_y(x) = z
    let mut succ: Vec<HashMap<usize, usize>> = vec![HashMap::new(); n];
    for f in &faces {
        let m = f.len();
        for t in 0..m {
            let x = f[t];
            let y = f[(t + 1) % m];
            let z = f[(t + 2) % m];
            succ[y].insert(x, z);
        }
    }
    let mut rot = vec![Vec::new(); n];
    for v in 0..n {
        if adj[v].is_empty() {
            continue;
        }
        let start = adj[v][0];
        let mut x = start;
        loop {
            rot[v].push(x);
            x = *succ[v].get(&x).ok_or("inconsistent faces")?;
            if x == start {
                break;
            }
            if rot[v].len() > adj[v].len() {
                return Err("inconsistent faces".into());
            }
        }
        if rot[v].len() != adj[v].len() {
            return Err("rotation misses a neighbour".into());
        }
    }
    Ok(rot)
}

fn find_cycle(n: usize, adj: &[Vec<usize>]) -> Option<Vec<usize>> {
    let mut parent = vec![usize::MAX; n];
    let mut depth = vec![usize::MAX; n];
    let start = (0..n).find(|&v| !adj[v].is_empty())?;
    depth[start] = 0;
    let mut stack = vec![(start, 0usize)];
    while let Some(&mut (v, ref mut i)) = stack.last_mut() {
        if *i < adj[v].len() {
            let u = adj[v][*i];
            *i += 1;
            if u == parent[v] {
                continue;
            }
            if depth[u] == usize::MAX {
                depth[u] = depth[v] + 1;
                parent[u] = v;
                stack.push((u, 0));
            } else if depth[u] < depth[v] {
                let mut cyc = vec![v];
                let mut x = v;
                while x != u {
                    x = parent[x];
                    cyc.push(x);
                }
                cyc.reverse();
                return Some(cyc);
            }
        } else {
            stack.pop();
        }
    }
    None
}

/// A planar rotation system for `g`, or NonPlanar. A rotation stored in the
/// graph is used when it is spherical.
pub fn planar_embed(g: &Multigraph) -> Result<RotationSystem, PlanarError> {
    if !g.is_connected() {
        return Err(PlanarError::Disconnected);
    }
    if let Some(rot) = g.rotation() {
        let rs = RotationSystem::from_cycles(g, rot.clone());
        if rs.is_spherical(g) {
            return Ok(rs);
        }
    }
    let n = g.num_vertices();
    let mut adj: Vec<Vec<usize>> = (0..n).map(|v| g.neighbors(v)).collect();
    for a in adj.iter_mut() {
        a.sort_unstable();
    }
    let blocks = simple_blocks(n, &adj);
    // neighbour cycles per vertex, one per block
    let mut cycles: Vec<Vec<Vec<usize>>> = vec![Vec::new(); n];
    for block in &blocks {
        let mut verts: Vec<usize> = block.iter().flat_map(|&(a, b)| [a, b]).collect();
        verts.sort_unstable();
        verts.dedup();
        if verts.len() == 2 {
            cycles[verts[0]].push(vec![verts[1]]);
            cycles[verts[1]].push(vec![verts[0]]);
            continue;
        }
        let local: HashMap<usize, usize> = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut ledges: Vec<(usize, usize)> = block.iter().map(|&(a, b)| (local[&a], local[&b])).collect();
        ledges.sort_unstable();
        let rot = embed_block(verts.len(), &ledges).map_err(PlanarError::NonPlanar)?;
        for (i, r) in rot.into_iter().enumerate() {
            cycles[verts[i]].push(r.into_iter().map(|x| verts[x]).collect());
        }
    }
    // expand neighbours into darts: parallel edges in reverse order at the far end
    let mut bundles: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    let mut loops: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut halves: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in 0..g.num_edges() {
        let ed = g.edge(e);
        let (u, v) = g.endpoints(e);
        if ed.is_half() {
            halves[u].push(ed.darts[0]);
        } else if u == v {
            loops[u].push(e);
        } else {
            bundles.entry((u.min(v), u.max(v))).or_default().push(e);
        }
    }
    let mut rotation = vec![Vec::new(); n];
    for v in 0..n {
        for cyc in &cycles[v] {
            for &u in cyc {
                let list = &bundles[&(u.min(v), u.max(v))];
                let ordered: Vec<usize> = if v < u { list.clone() } else { list.iter().rev().cloned().collect() };
                for e in ordered {
                    let [d0, d1] = g.edge(e).darts;
                    rotation[v].push(if g.vertex_of(d0) == v { d0 } else { d1 });
                }
            }
        }
        for &e in &loops[v] {
            let [d0, d1] = g.edge(e).darts;
            rotation[v].push(d0);
            rotation[v].push(d1);
        }
        rotation[v].extend(&halves[v]);
    }
    let rs = RotationSystem::from_cycles(g, rotation);
    if !rs.is_spherical(g) {
        return Err(PlanarError::NonPlanar("embedding failed the Euler check".into()));
    }
    Ok(rs)
}

pub fn is_planar(g: &Multigraph) -> bool {
    planar_embed(g).is_ok()
}

/// Map automorphisms of a rotation system, each tagged as orientation
/// reversing or not. Colours, types and directions are respected.
pub fn map_automorphisms_flagged(g: &Multigraph, rs: &RotationSystem) -> Vec<(DartPermutation, bool)> {
    let nd = g.num_darts();
    if nd == 0 {
        return vec![(DartPermutation::identity(0), false)];
    }
    let d0 = 0usize;
    let mut out: Vec<(DartPermutation, bool)> = Vec::new();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    for reverse in [false, true] {
        for x in 0..nd {
            if let Some(p) = extend_map(g, rs, d0, x, reverse) {
                let dp = DartPermutation { image: p };
                if dp.is_automorphism(g) && seen.insert(dp.image.clone()) {
                    out.push((dp, reverse));
                }
            }
        }
    }
    out
}

fn extend_map(g: &Multigraph, rs: &RotationSystem, d0: usize, x0: usize, reverse: bool) -> Option<Vec<usize>> {
    let nd = g.num_darts();
    let mut img = vec![usize::MAX; nd];
    let mut used = vec![false; nd];
    img[d0] = x0;
    used[x0] = true;
    let mut stack = vec![d0];
    while let Some(d) = stack.pop() {
        let x = img[d];
        let step = |a: usize, b: usize, img: &mut Vec<usize>, used: &mut Vec<bool>, stack: &mut Vec<usize>| -> bool {
            if img[a] == usize::MAX {
                if used[b] {
                    return false;
                }
                img[a] = b;
                used[b] = true;
                stack.push(a);
                true
            } else {
                img[a] == b
            }
        };
        let (nx, px) = if reverse { (rs.prev[x], rs.next[x]) } else { (rs.next[x], rs.prev[x]) };
        if !step(rs.next[d], nx, &mut img, &mut used, &mut stack) {
            return None;
        }
        if !step(rs.prev[d], px, &mut img, &mut used, &mut stack) {
            return None;
        }
        if !step(g.theta(d), g.theta(x), &mut img, &mut used, &mut stack) {
            return None;
        }
    }
    if img.iter().any(|&y| y == usize::MAX) {
        return None;
    }
    Some(img)
}

pub fn map_automorphisms(g: &Multigraph, rs: &RotationSystem) -> PermGroup {
    let elems: Vec<DartPermutation> = map_automorphisms_flagged(g, rs).into_iter().map(|(p, _)| p).collect();
    PermGroup::from_elements(elems).expect("map automorphisms form a group")
}

/// True iff the simple underlying graph is 3-connected (n >= 4).
pub fn is_3_connected(g: &Multigraph) -> bool {
    let n = g.num_vertices();
    if n < 4 {
        return false;
    }
    let adj: Vec<Vec<usize>> = (0..n).map(|v| g.neighbors(v)).collect();
    let connected_without = |x: usize, y: usize| -> bool {
        let start = (0..n).find(|&v| v != x && v != y).unwrap();
        let mut seen = vec![false; n];
        seen[x] = true;
        seen[y] = true;
        seen[start] = true;
        let mut stack = vec![start];
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    stack.push(u);
                }
            }
        }
        count == if x == y { n - 1 } else { n - 2 }
    };
    for x in 0..n {
        for y in x + 1..n {
            if !connected_without(x, y) {
                return false;
            }
        }
    }
    // also rules out cut vertices
    (0..n).all(|x| connected_without(x, x))
}

/// Pendant structure of a graph: for each vertex the darts of single pendant
/// edges hanging from it. A pendant edge joins a degree-1 leaf to a vertex
/// of degree at least 2.
pub fn pendant_edges(g: &Multigraph) -> Vec<usize> {
    let mut out = Vec::new();
    for e in 0..g.num_edges() {
        let ed = g.edge(e);
        if ed.is_half() {
            continue;
        }
        let (u, v) = g.endpoints(e);
        if u == v {
            continue;
        }
        if (g.degree(u) == 1) != (g.degree(v) == 1) {
            out.push(e);
        }
    }
    out
}

/// Aut(A) for A that is 3-connected after removing single pendant edges,
/// via map automorphisms of the core filtered by pendant codes.
pub fn aut_essentially_3connected(a: &Multigraph) -> Result<PermGroup, PlanarError> {
    let pend = pendant_edges(a);
    let mut is_leaf = vec![false; a.num_vertices()];
    let mut code: Vec<Vec<u64>> = (0..a.num_vertices()).map(|v| vec![a.vertex_color(v) as u64]).collect();
    for &e in &pend {
        let ed = a.edge(e);
        let (u, v) = a.endpoints(e);
        let (core, leaf, core_dart) = if a.degree(u) == 1 { (v, u, ed.darts[1]) } else { (u, v, ed.darts[0]) };
        is_leaf[leaf] = true;
        code[core].extend([
            1 + ed.color as u64,
            canon::dart_label(a, core_dart),
            a.vertex_color(leaf) as u64,
        ]);
    }
    if a.has_loops_or_halves() {
        return Err(PlanarError::Not3Connected);
    }
    // core graph
    let mut b = crate::multigraph::GraphBuilder::new();
    let mut map = vec![usize::MAX; a.num_vertices()];
    for v in 0..a.num_vertices() {
        if !is_leaf[v] {
            map[v] = b.add_vertex(a.vertex_id(v), 0);
        }
    }
    let mut core_edge_of = Vec::new();
    let pend_set: HashSet<usize> = pend.iter().cloned().collect();
    for e in 0..a.num_edges() {
        if pend_set.contains(&e) {
            continue;
        }
        let ed = a.edge(e);
        let (u, v) = a.endpoints(e);
        b.add_edge(&ed.id, map[u], map[v], ed.color, ed.etype);
        core_edge_of.push(e);
    }
    let core = b.build();
    if !is_3_connected(&core) || core.num_edges() != (0..core.num_vertices()).map(|v| core.neighbors(v).len()).sum::<usize>() / 2 {
        return Err(PlanarError::Not3Connected);
    }
    let rs = planar_embed(&core)?;
    let core_code: Vec<&Vec<u64>> = (0..a.num_vertices()).filter(|&v| !is_leaf[v]).map(|v| &code[v]).collect();
    let mut elems = Vec::new();
    for (p, _) in map_automorphisms_flagged(&core, &rs) {
        let vm = p.vertex_map(&core).expect("automorphism");
        if (0..core.num_vertices()).any(|v| core_code[v] != core_code[vm[v]]) {
            continue;
        }
        // lift to A: core darts follow p, pendant darts follow the vertex map
        let mut image = vec![usize::MAX; a.num_darts()];
        for (ce, &ae) in core_edge_of.iter().enumerate() {
            let cd = core.edge(ce).darts;
            let ad = a.edge(ae).darts;
            for s in 0..2 {
                let t = p.image[cd[s]];
                let te = core.edge_of(t);
                let side = if core.edge(te).darts[0] == t { 0 } else { 1 };
                image[ad[s]] = a.edge(core_edge_of[te]).darts[side];
            }
        }
        let mut pend_at: HashMap<usize, usize> = HashMap::new();
        for &e in &pend {
            let (u, v) = a.endpoints(e);
            let core_v = if a.degree(u) == 1 { v } else { u };
            pend_at.insert(map[core_v], e);
        }
        for &e in &pend {
            let (u, v) = a.endpoints(e);
            let core_v = if a.degree(u) == 1 { v } else { u };
            let target = pend_at[&vm[map[core_v]]];
            let src = a.edge(e).darts;
            let dst = a.edge(target).darts;
            let src_core_side = if a.vertex_of(src[0]) == core_v { 0 } else { 1 };
            let (tu, _) = a.endpoints(target);
            let dst_core_side = if a.degree(tu) == 1 { 1 } else { 0 };
            image[src[src_core_side]] = dst[dst_core_side];
            image[src[1 - src_core_side]] = dst[1 - dst_core_side];
        }
        let dp = DartPermutation { image };
        if dp.is_automorphism(a) {
            elems.push(dp);
        }
    }
    Ok(PermGroup::from_elements(elems).expect("filtered map group is a group"))
}

/// Isomorphism g -> h with vertex colours `c` of g constrained by lists of
/// h: c(u) must belong to lists[π(u)]. Edge colours, types and directions
/// are preserved. Returns (vertex map, dart map).
pub fn color_compatible_iso(
    g: &Multigraph,
    h: &Multigraph,
    c: &[u64],
    lists: &[Vec<u64>],
) -> Option<(Vec<usize>, Vec<usize>)> {
    let compat = |u: usize, x: usize| lists[x].contains(&c[u]);
    let vm = constrained_isomorphism(g, h, &compat)?;
    let dm = canon::first_dart_extension(g, h, &vm)?;
    Some((vm, dm))
}

/// Backtracking vertex isomorphism with an extra compatibility predicate.
/// Vertex colours of g and h are ignored in favour of the predicate; loops,
/// half-edges and edge labels must match.
pub fn constrained_isomorphism(
    g: &Multigraph,
    h: &Multigraph,
    compat: &dyn Fn(usize, usize) -> bool,
) -> Option<Vec<usize>> {
    let n = g.num_vertices();
    if n != h.num_vertices() || g.num_darts() != h.num_darts() {
        return None;
    }
    if n == 0 {
        return Some(Vec::new());
    }
    let vg = View::new(g, None);
    let vh = View::new(h, None);
    // local invariant without the vertex colour
    let inv = |view: &View, v: usize| -> Vec<u64> { view.init[v][2..].to_vec() };
    // edge label multiset between two vertices
    let between = |view: &View, a: usize, b: usize| -> Vec<u64> {
        let mut x: Vec<u64> = view.adj[a].iter().filter(|&&(u, _)| u == b).map(|&(_, l)| l).collect();
        x.sort_unstable();
        x
    };
    // BFS order of g
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            order.push(v);
            for &(u, _) in &vg.adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    q.push_back(u);
                }
            }
        }
    }
    let hinv: Vec<Vec<u64>> = (0..n).map(|x| inv(&vh, x)).collect();
    let ginv: Vec<Vec<u64>> = (0..n).map(|v| inv(&vg, v)).collect();
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn rec(
        i: usize,
        order: &[usize],
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
        ctx: &dyn Fn(usize, usize, &[usize]) -> bool,
        cands: &dyn Fn(usize, &[usize]) -> Vec<usize>,
    ) -> bool {
        if i == order.len() {
            return true;
        }
        let v = order[i];
        for x in cands(v, map) {
            if used[x] || !ctx(v, x, map) {
                continue;
            }
            map[v] = x;
            used[x] = true;
            if rec(i + 1, order, map, used, ctx, cands) {
                return true;
            }
            map[v] = usize::MAX;
            used[x] = false;
        }
        false
    }
    let ok = |v: usize, x: usize, map: &[usize]| -> bool {
        if ginv[v] != hinv[x] || !compat(v, x) {
            return false;
        }
        // edges to already mapped neighbours
        let mut nbrs: Vec<usize> = vg.adj[v].iter().map(|&(u, _)| u).filter(|&u| map[u] != usize::MAX).collect();
        nbrs.sort_unstable();
        nbrs.dedup();
        for u in nbrs {
            if between(&vg, v, u) != between(&vh, x, map[u]) {
                return false;
            }
        }
        // mapped vertices adjacent to x in h must be neighbours of v
        let mut mapped_adj = 0usize;
        for &(y, _) in &vh.adj[x] {
            if map.contains(&y) {
                mapped_adj += 1;
            }
        }
        let expect = vg.adj[v].iter().filter(|&&(u, _)| map[u] != usize::MAX).count();
        mapped_adj == expect
    };
    let cands = |v: usize, map: &[usize]| -> Vec<usize> {
        if let Some(&(u, _)) = vg.adj[v].iter().find(|&&(u, _)| map[u] != usize::MAX) {
            let mut c: Vec<usize> = vh.adj[map[u]].iter().map(|&(y, _)| y).collect();
            c.sort_unstable();
            c.dedup();
            c
        } else {
            (0..n).collect()
        }
    };
    if rec(0, &order, &mut map, &mut used, &ok, &cands) {
        Some(map)
    } else {
        None
    }
}

/// True iff every vertex of `g` has a loop-free, half-free simple structure
/// and the graph is a cycle (all degrees 2, connected).
pub fn is_cycle(g: &Multigraph) -> bool {
    g.num_vertices() >= 2
        && g.is_connected()
        && !g.has_loops_or_halves()
        && (0..g.num_vertices()).all(|v| g.degree(v) == 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators as gen;
    use crate::multigraph::{parse_graph, EdgeType};
    use crate::perm::{automorphism_group, DEFAULT_BUDGET};

    #[test]
    fn kuratowski() {
        assert!(planar_embed(&gen::complete(4)).is_ok());
        assert!(matches!(planar_embed(&gen::complete(5)), Err(PlanarError::NonPlanar(_))));
        assert!(matches!(planar_embed(&gen::complete_bipartite(3, 3)), Err(PlanarError::NonPlanar(_))));
        assert!(planar_embed(&gen::petersen()).is_err());
    }

    #[test]
    fn platonic_map_groups() {
        for (g, want) in [
            (gen::tetrahedron(), 24),
            (gen::cube(), 48),
            (gen::octahedron(), 48),
            (gen::dodecahedron(), 120),
            (gen::icosahedron(), 120),
        ] {
            let rs = planar_embed(&g).unwrap();
            let m = map_automorphisms(&g, &rs);
            assert_eq!(m.order(), want);
            assert!(m.order() <= 4 * g.num_edges());
            assert_eq!(automorphism_group(&g, DEFAULT_BUDGET).unwrap().order(), want);
        }
        for n in 3..=8 {
            let g = gen::cycle(n);
            let rs = planar_embed(&g).unwrap();
            assert_eq!(map_automorphisms(&g, &rs).order(), 2 * n);
        }
    }

    #[test]
    fn multigraph_embeddings() {
        let g = parse_graph("vertex a\nvertex b\nedge x a b\nedge y a b\nedge z a b\nedge l a a\nhalf h b").unwrap();
        let rs = planar_embed(&g).unwrap();
        assert!(rs.is_spherical(&g));
    }

    #[test]
    fn pendant_filtering() {
        let cube = gen::cube();
        let mut b = cube.to_builder();
        let leaf = b.add_vertex("leaf", 0);
        b.add_edge("p", 0, leaf, 0, EdgeType::Halvable);
        let a = b.build();
        assert_eq!(aut_essentially_3connected(&a).unwrap().order(), 6);

        let k4 = gen::complete(4);
        let mut b = k4.to_builder();
        for v in 0..4 {
            let l = b.add_vertex(&format!("l{v}"), 0);
            b.add_edge(&format!("p{v}"), v, l, 0, EdgeType::Halvable);
        }
        assert_eq!(aut_essentially_3connected(&b.build()).unwrap().order(), 24);

        let mut b = k4.to_builder();
        for v in 0..2 {
            let l = b.add_vertex(&format!("l{v}"), 0);
            b.add_edge(&format!("p{v}"), v, l, 0, EdgeType::Halvable);
        }
        let a = b.build();
        let grp = aut_essentially_3connected(&a).unwrap();
        assert_eq!(grp.order(), 4);
        assert_eq!(grp.order(), automorphism_group(&a, DEFAULT_BUDGET).unwrap().order());
        assert!(aut_essentially_3connected(&gen::cycle(5)).is_err());
    }

    #[test]
    fn list_isomorphisms() {
        let c3 = gen::cycle(3);
        let all = vec![vec![1, 2, 3]; 3];
        let (vm, _) = color_compatible_iso(&c3, &c3, &[1, 1, 1], &all).unwrap();
        assert_eq!(vm.len(), 3);
        let lists = vec![vec![1], vec![2], vec![3]];
        let (vm, dm) = color_compatible_iso(&c3, &c3, &[1, 2, 3], &lists).unwrap();
        assert_eq!(vm, vec![0, 1, 2]);
        assert!(DartPermutation { image: dm }.is_automorphism(&c3));
        let lists = vec![vec![1], vec![1], vec![3]];
        assert!(color_compatible_iso(&c3, &c3, &[1, 1, 2], &lists).is_none());
    }
}
