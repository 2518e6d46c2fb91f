//! Colour refinement, canonical labelling and isomorphism search for
//! coloured multigraphs.
//!
//! Everything here works on vertices; dart maps are recovered afterwards by
//! matching parallel edges, loops and half-edges (`dart_extensions`).

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};

use crate::multigraph::{EdgeType, Multigraph};

/// Label of a non-loop dart as seen from its own vertex.
pub fn dart_label(g: &Multigraph, d: usize) -> u64 {
    let e = g.edge(g.edge_of(d));
    let dir = if e.etype == EdgeType::Directed {
        if e.darts[0] == d {
            1
        } else {
            2
        }
    } else {
        0
    };
    ((e.color as u64) << 4) | (e.etype.code() << 2) | dir
}

fn loop_label(g: &Multigraph, e: usize) -> u64 {
    let ed = g.edge(e);
    ((ed.color as u64) << 4) | (ed.etype.code() << 2)
}

/// Vertex-level view of a multigraph with per-vertex invariant keys.
#[derive(Clone, Debug)]
pub struct View {
    pub n: usize,
    pub init: Vec<Vec<u64>>,
    pub adj: Vec<Vec<(usize, u64)>>,
}

impl View {
    pub fn new(g: &Multigraph, marks: Option<&[u64]>) -> View {
        let n = g.num_vertices();
        let mut init = Vec::with_capacity(n);
        let mut adj = vec![Vec::new(); n];
        let mut loops = vec![Vec::new(); n];
        let mut halves = vec![Vec::new(); n];
        for e in 0..g.num_edges() {
            let ed = g.edge(e);
            let (u, v) = g.endpoints(e);
            if ed.is_half() {
                halves[u].push(ed.color as u64);
            } else if u == v {
                loops[u].push(loop_label(g, e));
            } else {
                adj[u].push((v, dart_label(g, ed.darts[0])));
                adj[v].push((u, dart_label(g, ed.darts[1])));
            }
        }
        for v in 0..n {
            let mut key = vec![g.vertex_color(v) as u64, marks.map(|m| m[v]).unwrap_or(0)];
            loops[v].sort_unstable();
            halves[v].sort_unstable();
            key.push(loops[v].len() as u64);
            key.extend(&loops[v]);
            key.push(halves[v].len() as u64);
            key.extend(&halves[v]);
            key.push(adj[v].len() as u64);
            adj[v].sort_unstable();
            init.push(key);
        }
        View { n, init, adj }
    }

    /// Initial ordered partition as ranks of the invariant keys.
    pub fn initial_colors(&self) -> Vec<u32> {
        let mut keys: Vec<&Vec<u64>> = self.init.iter().collect();
        keys.sort();
        keys.dedup();
        let rank: HashMap<&Vec<u64>, u32> = keys.iter().enumerate().map(|(i, k)| (*k, i as u32)).collect();
        self.init.iter().map(|k| rank[k]).collect()
    }

    /// Refine to an equitable ordered partition. Returns a hash trace of the
    /// signature tables so two runs can be compared cheaply.
    pub fn refine(&self, colors: &mut [u32]) -> u64 {
        let mut h = DefaultHasher::new();
        let mut ncells = count_cells(colors);
        loop {
            let mut sigs: Vec<(u32, Vec<(u64, u32)>, usize)> = (0..self.n)
                .map(|v| {
                    let mut s: Vec<(u64, u32)> = self.adj[v].iter().map(|&(u, l)| (l, colors[u])).collect();
                    s.sort_unstable();
                    (colors[v], s, v)
                })
                .collect();
            sigs.sort_unstable_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
            let mut rank = 0u32;
            for i in 0..sigs.len() {
                if i > 0 && (sigs[i].0, &sigs[i].1) != (sigs[i - 1].0, &sigs[i - 1].1) {
                    rank += 1;
                    (sigs[i].0, &sigs[i].1).hash(&mut h);
                }
                colors[sigs[i].2] = rank;
            }
            let new_cells = if self.n == 0 { 0 } else { rank as usize + 1 };
            new_cells.hash(&mut h);
            if new_cells == ncells {
                break;
            }
            ncells = new_cells;
        }
        h.finish()
    }

    /// Certificate of a discrete labelling `lab` (vertex -> position).
    pub fn certificate(&self, lab: &[u32]) -> Vec<u64> {
        let mut inv = vec![0usize; self.n];
        for v in 0..self.n {
            inv[lab[v] as usize] = v;
        }
        let mut cert = vec![self.n as u64];
        for &v in &inv {
            cert.push(self.init[v].len() as u64);
            cert.extend(&self.init[v]);
            let mut nb: Vec<(u64, u64)> = self.adj[v].iter().map(|&(u, l)| (lab[u] as u64, l)).collect();
            nb.sort_unstable();
            for (a, b) in nb {
                cert.push(a);
                cert.push(b);
            }
        }
        cert
    }
}

fn count_cells(colors: &[u32]) -> usize {
    let mut c: Vec<u32> = colors.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}

fn individualize(colors: &[u32], v: usize) -> Vec<u32> {
    colors.iter().enumerate().map(|(x, &c)| c * 2 + u32::from(x != v)).collect()
}

/// First non-singleton cell (lowest rank), members in vertex order.
fn target_cell(colors: &[u32]) -> Option<Vec<usize>> {
    let mut count: HashMap<u32, usize> = HashMap::new();
    for &c in colors {
        *count.entry(c).or_default() += 1;
    }
    let best = count.iter().filter(|(_, &n)| n > 1).map(|(&c, _)| c).min()?;
    Some((0..colors.len()).filter(|&v| colors[v] == best).collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonForm {
    pub cert: Vec<u64>,
    /// vertex -> canonical position
    pub lab: Vec<u32>,
}

struct CanonSearch<'a> {
    view: &'a View,
    best: Option<(Vec<u64>, Vec<u32>)>,
    first: Option<(Vec<u64>, Vec<u32>)>,
    gens: Vec<Vec<usize>>,
}

impl CanonSearch<'_> {
    fn leaf(&mut self, colors: &[u32]) {
        let cert = self.view.certificate(colors);
        let lab = colors.to_vec();
        for other in [&self.first, &self.best].into_iter().flatten() {
            if other.0 == cert {
                let n = self.view.n;
                let mut inv = vec![0usize; n];
                for v in 0..n {
                    inv[other.1[v] as usize] = v;
                }
                let gamma: Vec<usize> = (0..n).map(|v| inv[lab[v] as usize]).collect();
                if gamma.iter().enumerate().any(|(i, &x)| i != x) {
                    self.gens.push(gamma);
                }
                break;
            }
        }
        if self.first.is_none() {
            self.first = Some((cert.clone(), lab.clone()));
        }
        match &self.best {
            Some((b, _)) if *b <= cert => {}
            _ => self.best = Some((cert, lab)),
        }
    }

    fn dfs(&mut self, mut colors: Vec<u32>, prefix: &mut Vec<usize>) {
        self.view.refine(&mut colors);
        let Some(cell) = target_cell(&colors) else {
            self.leaf(&colors);
            return;
        };
        let mut explored: Vec<usize> = Vec::new();
        for &v in &cell {
            if !explored.is_empty() {
                let orbit = orbit_of_fixing(&self.gens, prefix, v, self.view.n);
                if explored.iter().any(|&w| orbit[w]) {
                    continue;
                }
            }
            prefix.push(v);
            self.dfs(individualize(&colors, v), prefix);
            prefix.pop();
            explored.push(v);
        }
    }
}

/// Orbit of `v` under the generators that fix every vertex of `prefix`.
fn orbit_of_fixing(gens: &[Vec<usize>], prefix: &[usize], v: usize, n: usize) -> Vec<bool> {
    let useful: Vec<&Vec<usize>> = gens.iter().filter(|g| prefix.iter().all(|&p| g[p] == p)).collect();
    let mut seen = vec![false; n];
    seen[v] = true;
    let mut stack = vec![v];
    while let Some(x) = stack.pop() {
        for g in &useful {
            let y = g[x];
            if !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    seen
}

pub fn canonical_form_view(view: &View) -> CanonForm {
    let mut s = CanonSearch { view, best: None, first: None, gens: Vec::new() };
    let colors = view.initial_colors();
    s.dfs(colors, &mut Vec::new());
    let (cert, lab) = s.best.unwrap_or((vec![0], Vec::new()));
    CanonForm { cert, lab }
}

/// Canonical form of `g`, optionally with extra per-vertex marks.
pub fn canonical_form(g: &Multigraph, marks: Option<&[u64]>) -> CanonForm {
    canonical_form_view(&View::new(g, marks))
}

/// A vertex isomorphism g1 -> g2 respecting marks, if one exists.
pub fn find_vertex_isomorphism(
    g1: &Multigraph,
    m1: Option<&[u64]>,
    g2: &Multigraph,
    m2: Option<&[u64]>,
) -> Option<Vec<usize>> {
    if g1.num_vertices() != g2.num_vertices() || g1.num_darts() != g2.num_darts() {
        return None;
    }
    let c1 = canonical_form(g1, m1);
    let c2 = canonical_form(g2, m2);
    if c1.cert != c2.cert {
        return None;
    }
    let n = g1.num_vertices();
    let mut inv2 = vec![0usize; n];
    for v in 0..n {
        inv2[c2.lab[v] as usize] = v;
    }
    Some((0..n).map(|v| inv2[c1.lab[v] as usize]).collect())
}

/// Full isomorphism (vertex map, dart map) g1 -> g2.
pub fn find_isomorphism(
    g1: &Multigraph,
    m1: Option<&[u64]>,
    g2: &Multigraph,
    m2: Option<&[u64]>,
) -> Option<(Vec<usize>, Vec<usize>)> {
    let vmap = find_vertex_isomorphism(g1, m1, g2, m2)?;
    let dmap = first_dart_extension(g1, g2, &vmap)?;
    Some((vmap, dmap))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchBudgetExceeded;

/// Enumerate vertex automorphisms by paired individualisation. With
/// `fixed_point_free` only permutations moving every vertex are returned
/// (plus the identity).
pub fn vertex_automorphisms(
    g: &Multigraph,
    marks: Option<&[u64]>,
    fixed_point_free: bool,
    budget: usize,
) -> Result<Vec<Vec<usize>>, SearchBudgetExceeded> {
    let view = View::new(g, marks);
    let n = view.n;
    let mut path: Vec<(Vec<u32>, u64, usize)> = Vec::new();
    let mut colors = view.initial_colors();
    let mut trace = view.refine(&mut colors);
    loop {
        match target_cell(&colors) {
            None => {
                path.push((colors.clone(), trace, usize::MAX));
                break;
            }
            Some(cell) => {
                let v = cell[0];
                path.push((colors.clone(), trace, v));
                colors = individualize(&colors, v);
                trace = view.refine(&mut colors);
            }
        }
    }
    let mut out = Vec::new();
    if fixed_point_free {
        out.push((0..n).collect());
    }
    let mut work = 0usize;
    let root = path[0].0.clone();
    pair_search(&view, &path, 0, root, fixed_point_free, &mut out, &mut work, budget)?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn pair_search(
    view: &View,
    path: &[(Vec<u32>, u64, usize)],
    depth: usize,
    rcolors: Vec<u32>,
    fpf: bool,
    out: &mut Vec<Vec<usize>>,
    work: &mut usize,
    budget: usize,
) -> Result<(), SearchBudgetExceeded> {
    *work += 1;
    if *work > budget {
        return Err(SearchBudgetExceeded);
    }
    let (lcolors, _, v) = &path[depth];
    let n = view.n;
    if fpf {
        // singleton cells pin a vertex; pinning x to x is a fixed point
        let mut lpos = vec![usize::MAX; n + 1];
        let mut cnt = vec![0usize; n + 1];
        for x in 0..n {
            let c = lcolors[x] as usize;
            if c <= n {
                cnt[c] += 1;
                lpos[c] = x;
            }
        }
        for y in 0..n {
            let c = rcolors[y] as usize;
            if c <= n && cnt[c] == 1 && lpos[c] == y {
                return Ok(());
            }
        }
    }
    if *v == usize::MAX {
        let mut inv = vec![0usize; n];
        for y in 0..n {
            inv[rcolors[y] as usize] = y;
        }
        let gamma: Vec<usize> = (0..n).map(|x| inv[lcolors[x] as usize]).collect();
        if is_vertex_automorphism(view, &gamma) {
            if !(fpf && gamma.iter().enumerate().all(|(i, &x)| i == x)) {
                out.push(gamma);
            }
        }
        return Ok(());
    }
    let c = lcolors[*v];
    let next_trace = path[depth + 1].1;
    for w in 0..n {
        if rcolors[w] != c {
            continue;
        }
        if fpf && w == *v {
            continue;
        }
        let mut r = individualize(&rcolors, w);
        let t = view.refine(&mut r);
        if t != next_trace {
            continue;
        }
        pair_search(view, path, depth + 1, r, fpf, out, work, budget)?;
    }
    Ok(())
}

fn is_vertex_automorphism(view: &View, gamma: &[usize]) -> bool {
    for v in 0..view.n {
        let w = gamma[v];
        if view.init[v] != view.init[w] {
            return false;
        }
        let mut a: Vec<(usize, u64)> = view.adj[v].iter().map(|&(u, l)| (gamma[u], l)).collect();
        a.sort_unstable();
        if a != view.adj[w] {
            return false;
        }
    }
    true
}

/// Check that a vertex map is an isomorphism of the vertex-level structure.
pub fn is_vertex_isomorphism(g1: &Multigraph, g2: &Multigraph, vmap: &[usize]) -> bool {
    let a = View::new(g1, None);
    let b = View::new(g2, None);
    if a.n != b.n || vmap.len() != a.n {
        return false;
    }
    let mut seen = vec![false; b.n];
    for &w in vmap {
        if w >= b.n || seen[w] {
            return false;
        }
        seen[w] = true;
    }
    for v in 0..a.n {
        let w = vmap[v];
        if a.init[v] != b.init[w] {
            return false;
        }
        let mut x: Vec<(usize, u64)> = a.adj[v].iter().map(|&(u, l)| (vmap[u], l)).collect();
        x.sort_unstable();
        if x != b.adj[w] {
            return false;
        }
    }
    true
}

/// One group of interchangeable darts: source edges and target edges that
/// may be matched in any bijection, with optional flip of loops.
struct ExtGroup {
    src: Vec<usize>,
    dst: Vec<usize>,
    flippable: bool,
}

fn ext_key(g: &Multigraph, e: usize, f: &dyn Fn(usize) -> usize) -> (usize, usize, u64, u8) {
    let ed = g.edge(e);
    let (u, v) = g.endpoints(e);
    if ed.is_half() {
        (f(u), f(u), ed.color as u64, 0)
    } else if u == v {
        (f(u), f(u), loop_label(g, e), 1)
    } else {
        let (a, b) = (f(u), f(v));
        let l = dart_label(g, ed.darts[0]);
        if ed.etype == EdgeType::Directed {
            (a, b, l, 2)
        } else {
            (a.min(b), a.max(b), l, 2)
        }
    }
}

fn extension_groups(g1: &Multigraph, g2: &Multigraph, vmap: &[usize]) -> Option<Vec<ExtGroup>> {
    let mut groups: HashMap<(usize, usize, u64, u8), (Vec<usize>, Vec<usize>)> = HashMap::new();
    for e in 0..g1.num_edges() {
        groups.entry(ext_key(g1, e, &|x| vmap[x])).or_default().0.push(e);
    }
    for e in 0..g2.num_edges() {
        groups.entry(ext_key(g2, e, &|x| x)).or_default().1.push(e);
    }
    let mut keys: Vec<_> = groups.keys().cloned().collect();
    keys.sort();
    let mut out = Vec::new();
    for k in keys {
        let (src, dst) = &groups[&k];
        if src.len() != dst.len() {
            return None;
        }
        let flippable = k.3 == 1 && g1.edge(src[0]).etype != EdgeType::Directed;
        out.push(ExtGroup { src: src.clone(), dst: dst.clone(), flippable });
    }
    Some(out)
}

fn map_edge(g1: &Multigraph, g2: &Multigraph, vmap: &[usize], e: usize, f: usize, flip: bool, dmap: &mut [usize]) {
    let a = g1.edge(e);
    let b = g2.edge(f);
    if a.is_half() {
        dmap[a.darts[0]] = b.darts[0];
        return;
    }
    let (u, _) = g1.endpoints(e);
    let (x, y) = g2.endpoints(f);
    if x == y {
        if flip {
            dmap[a.darts[0]] = b.darts[1];
            dmap[a.darts[1]] = b.darts[0];
        } else {
            dmap[a.darts[0]] = b.darts[0];
            dmap[a.darts[1]] = b.darts[1];
        }
    } else if vmap[u] == x {
        dmap[a.darts[0]] = b.darts[0];
        dmap[a.darts[1]] = b.darts[1];
    } else {
        let _ = y;
        dmap[a.darts[0]] = b.darts[1];
        dmap[a.darts[1]] = b.darts[0];
    }
}

/// The first dart map extending a vertex isomorphism, if any.
pub fn first_dart_extension(g1: &Multigraph, g2: &Multigraph, vmap: &[usize]) -> Option<Vec<usize>> {
    let groups = extension_groups(g1, g2, vmap)?;
    let mut dmap = vec![usize::MAX; g1.num_darts()];
    for gr in &groups {
        for (i, &e) in gr.src.iter().enumerate() {
            map_edge(g1, g2, vmap, e, gr.dst[i], false, &mut dmap);
        }
    }
    Some(dmap)
}

/// All dart maps extending a vertex isomorphism, up to `limit` maps.
pub fn dart_extensions(
    g1: &Multigraph,
    g2: &Multigraph,
    vmap: &[usize],
    limit: usize,
) -> Result<Vec<Vec<usize>>, SearchBudgetExceeded> {
    let Some(groups) = extension_groups(g1, g2, vmap) else {
        return Ok(Vec::new());
    };
    // per group: list of (permutation of dst, flip mask)
    let mut options: Vec<Vec<(Vec<usize>, Vec<bool>)>> = Vec::new();
    for gr in &groups {
        let mut opts = Vec::new();
        let mut perms = Vec::new();
        permutations(&gr.dst, &mut Vec::new(), &mut vec![false; gr.dst.len()], &mut perms, limit)?;
        for p in perms {
            if gr.flippable {
                let m = gr.src.len();
                for mask in 0..(1u64 << m) {
                    opts.push((p.clone(), (0..m).map(|i| mask >> i & 1 == 1).collect()));
                    if opts.len() > limit {
                        return Err(SearchBudgetExceeded);
                    }
                }
            } else {
                opts.push((p, vec![false; gr.src.len()]));
            }
        }
        options.push(opts);
    }
    let total: f64 = options.iter().map(|o| o.len() as f64).product();
    if total > limit as f64 {
        return Err(SearchBudgetExceeded);
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; options.len()];
    loop {
        let mut dmap = vec![usize::MAX; g1.num_darts()];
        for (gi, gr) in groups.iter().enumerate() {
            let (p, flips) = &options[gi][idx[gi]];
            for (i, &e) in gr.src.iter().enumerate() {
                map_edge(g1, g2, vmap, e, p[i], flips[i], &mut dmap);
            }
        }
        out.push(dmap);
        let mut k = 0;
        loop {
            if k == idx.len() {
                return Ok(out);
            }
            idx[k] += 1;
            if idx[k] < options[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

fn permutations(
    items: &[usize],
    cur: &mut Vec<usize>,
    used: &mut Vec<bool>,
    out: &mut Vec<Vec<usize>>,
    limit: usize,
) -> Result<(), SearchBudgetExceeded> {
    if cur.len() == items.len() {
        out.push(cur.clone());
        if out.len() > limit {
            return Err(SearchBudgetExceeded);
        }
        return Ok(());
    }
    for i in 0..items.len() {
        if !used[i] {
            used[i] = true;
            cur.push(items[i]);
            permutations(items, cur, used, out, limit)?;
            cur.pop();
            used[i] = false;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multigraph::parse_graph;
    use proptest::prelude::*;

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

    // Naive isomorphism test over all vertex bijections.
    fn brute_iso(g1: &Multigraph, g2: &Multigraph) -> bool {
        let n = g1.num_vertices();
        if n != g2.num_vertices() {
            return false;
        }
        let mut perm: Vec<usize> = (0..n).collect();
        let mut found = false;
        heap_permute(&mut perm, n, &mut |p| {
            if !found && is_vertex_isomorphism(g1, g2, p) {
                found = true;
            }
        });
        found
    }

    fn heap_permute(a: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
        if k <= 1 {
            f(a);
            return;
        }
        for i in 0..k {
            heap_permute(a, k - 1, f);
            if k % 2 == 0 {
                a.swap(i, k - 1);
            } else {
                a.swap(0, k - 1);
            }
        }
    }

    fn random_graph(n: usize, edges: &[(usize, usize, u32)]) -> Multigraph {
        let mut s = String::new();
        for i in 0..n {
            s += &format!("vertex v{i}\n");
        }
        for (k, &(a, b, c)) in edges.iter().enumerate() {
            let t = if c == 2 { " type=directed" } else { "" };
            s += &format!("edge e{k} v{} v{} color={}{}\n", a % n, b % n, c % 2, t);
        }
        parse_graph(&s).unwrap()
    }

    #[test]
    fn cycle_automorphisms() {
        for n in 3..9 {
            let g = cycle(n);
            let auts = vertex_automorphisms(&g, None, false, 1 << 20).unwrap();
            assert_eq!(auts.len(), 2 * n);
            let fpf = vertex_automorphisms(&g, None, true, 1 << 20).unwrap();
            // identity + rotations + reflections without fixed vertices
            let refl = if n % 2 == 0 { n / 2 } else { 0 };
            assert_eq!(fpf.len(), 1 + (n - 1) + refl);
        }
    }

    #[test]
    fn multi_edge_extensions() {
        let g = parse_graph("vertex a\nvertex b\nedge x a b\nedge y a b\nedge z a b\nedge l a a").unwrap();
        let id: Vec<usize> = (0..2).collect();
        let ext = dart_extensions(&g, &g, &id, 1000).unwrap();
        assert_eq!(ext.len(), 6 * 2);
        let sw = vec![1, 0];
        // loop at a cannot go to b
        assert!(dart_extensions(&g, &g, &sw, 1000).unwrap().is_empty());
    }

    #[test]
    fn directed_edges_respected() {
        let g = parse_graph("vertex a\nvertex b\nedge x a b type=directed").unwrap();
        let auts = vertex_automorphisms(&g, None, false, 1000).unwrap();
        assert_eq!(auts.len(), 1);
        let h = parse_graph("vertex a\nvertex b\nedge x a b type=directed\nedge y b a type=directed").unwrap();
        let auts = vertex_automorphisms(&h, None, false, 1000).unwrap();
        assert_eq!(auts.len(), 2);
        let ext = dart_extensions(&h, &h, &[1, 0], 100).unwrap();
        assert_eq!(ext.len(), 1);
        assert_eq!(ext[0][0], 2);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn canonical_agrees_with_brute_force(
            n in 1usize..7,
            e1 in proptest::collection::vec((0usize..7, 0usize..7, 0u32..3), 0..10),
            e2 in proptest::collection::vec((0usize..7, 0usize..7, 0u32..3), 0..10),
            shuffle in proptest::collection::vec(0usize..100, 7),
        ) {
            let g1 = random_graph(n, &e1);
            let g2 = random_graph(n, &e2);
            let same = canonical_form(&g1, None).cert == canonical_form(&g2, None).cert;
            prop_assert_eq!(same, brute_iso(&g1, &g2));
            // relabelled copy must share the form
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by_key(|&i| shuffle[i]);
            let edges: Vec<(usize, usize, u32)> = e1.iter().map(|&(a, b, c)| (order[a % n], order[b % n], c)).collect();
            let g3 = random_graph(n, &edges);
            prop_assert_eq!(canonical_form(&g1, None).cert, canonical_form(&g3, None).cert);
            let iso = find_isomorphism(&g1, None, &g3, None);
            prop_assert!(iso.is_some());
        }

        #[test]
        fn automorphism_count_matches_brute_force(
            n in 1usize..7,
            e1 in proptest::collection::vec((0usize..7, 0usize..7, 0u32..3), 0..10),
        ) {
            let g = random_graph(n, &e1);
            let auts = vertex_automorphisms(&g, None, false, 1 << 20).unwrap();
            let mut perm: Vec<usize> = (0..n).collect();
            let mut count = 0usize;
            heap_permute(&mut perm, n, &mut |p| if is_vertex_isomorphism(&g, &g, p) { count += 1 });
            prop_assert_eq!(auts.len(), count);
        }
    }
}
