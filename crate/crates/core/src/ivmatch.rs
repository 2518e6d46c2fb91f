//! IV-Matching: a leveled, clustered bipartite spanning-subgraph problem.
//!
//! Levels are numbered from 1. A vertex of an odd level either takes one
//! edge to the next (even) level, an I, or two edges into a single cluster
//! of the previous (even) level, a V. Every even-level vertex is covered
//! exactly once. Edges between an odd level and the following even level
//! are half-incidences; edges between an even level and the following odd
//! level are loop-incidences.
//!
//! The solver branches on how many V's each loop-adjacent cluster pair
//! realises, level by level, and checks every gap between an odd level and
//! the next even level by a transportation max-flow. Results are memoised
//! on (gap, loop counts entering the gap).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use num_rational::Ratio;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::multigraph::Color;

type Q = Ratio<i64>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IvError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("sizes of {0} fit no chain level")]
    SizeMismatch(String),
    #[error("search exceeds the budget of {0}")]
    BudgetExceeded(u64),
    #[error("instance too large for exhaustive search ({0} vertices)")]
    TooLarge(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Incidence {
    Half,
    Loop,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Cluster {
    pub id: String,
    pub level: usize,
    pub size: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct IvInstance {
    pub levels: usize,
    pub clusters: Vec<Cluster>,
    /// (lower-level cluster, higher-level cluster, kind), indices into `clusters`.
    pub adj: Vec<(usize, usize, Incidence)>,
}

/// A vertex: (cluster index, position within the cluster).
pub type IvVertex = (usize, usize);

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IvSolution {
    /// (odd-level vertex, even-level vertex, kind)
    pub edges: Vec<(IvVertex, IvVertex, Incidence)>,
}

impl IvInstance {
    pub fn num_vertices(&self) -> usize {
        self.clusters.iter().map(|c| c.size).sum()
    }

    pub fn cluster_index(&self, id: &str) -> Option<usize> {
        self.clusters.iter().position(|c| c.id == id)
    }

    pub fn add_cluster(&mut self, id: &str, level: usize, size: usize) -> usize {
        self.levels = self.levels.max(level);
        self.clusters.push(Cluster { id: id.to_string(), level, size });
        self.clusters.len() - 1
    }

    /// Add an adjacency; the pair is stored lower level first.
    pub fn add_adj(&mut self, a: usize, b: usize, kind: Incidence) {
        let (a, b) = if self.clusters[a].level <= self.clusters[b].level { (a, b) } else { (b, a) };
        self.adj.push((a, b, kind));
    }

    pub fn validate(&self) -> Result<(), IvError> {
        let bad = |m: String| Err(IvError::Invalid(m));
        for c in &self.clusters {
            if c.level == 0 || c.level > self.levels {
                return bad(format!("cluster {} has level {} outside 1..={}", c.id, c.level, self.levels));
            }
        }
        let mut loop_partner: HashMap<usize, usize> = HashMap::new();
        let mut seen = BTreeSet::new();
        for &(a, b, kind) in &self.adj {
            let (la, lb) = (self.clusters[a].level, self.clusters[b].level);
            let (ia, ib) = (&self.clusters[a].id, &self.clusters[b].id);
            if lb != la + 1 {
                return bad(format!("{ia} and {ib} are not on consecutive levels"));
            }
            let want = if la % 2 == 1 { Incidence::Half } else { Incidence::Loop };
            if kind != want {
                return bad(format!("{ia}-{ib} must be a {want:?} incidence"));
            }
            if !seen.insert((a, b)) {
                return bad(format!("duplicate adjacency {ia}-{ib}"));
            }
            if kind == Incidence::Loop {
                for (x, y) in [(a, b), (b, a)] {
                    if let Some(&p) = loop_partner.get(&x) {
                        if p != y {
                            return bad(format!("{} is loop-adjacent to two clusters", self.clusters[x].id));
                        }
                    }
                    loop_partner.insert(x, y);
                }
            }
        }
        Ok(())
    }

    fn clusters_at(&self, level: usize) -> Vec<usize> {
        (0..self.clusters.len()).filter(|&c| self.clusters[c].level == level).collect()
    }

    pub fn has_adj(&self, a: usize, b: usize, kind: Incidence) -> bool {
        self.adj.iter().any(|&(x, y, k)| k == kind && ((x, y) == (a, b) || (x, y) == (b, a)))
    }
}

/// Parse the line format: `level <i>`, `cluster <id> level=<i> size=<n>`,
/// `adj <c1> <c2> kind=half|loop`. `#` starts a comment.
pub fn parse_instance(text: &str) -> Result<IvInstance, IvError> {
    let mut inst = IvInstance::default();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: &str| IvError::Parse { line: no + 1, msg: msg.to_string() };
        let toks: Vec<&str> = line.split_whitespace().collect();
        let kv = |key: &str| -> Option<&str> { toks.iter().find_map(|t| t.strip_prefix(key)?.strip_prefix('=')) };
        match toks[0] {
            "level" => {
                let i: usize = toks.get(1).and_then(|s| s.parse().ok()).ok_or_else(|| err("expected a level number"))?;
                inst.levels = inst.levels.max(i);
            }
            "cluster" => {
                let id = toks.get(1).ok_or_else(|| err("missing cluster id"))?;
                if inst.cluster_index(id).is_some() {
                    return Err(err("duplicate cluster id"));
                }
                let level = kv("level").and_then(|s| s.parse().ok()).ok_or_else(|| err("missing level="))?;
                let size = kv("size").and_then(|s| s.parse().ok()).ok_or_else(|| err("missing size="))?;
                inst.add_cluster(id, level, size);
            }
            "adj" => {
                let (Some(a), Some(b)) = (toks.get(1), toks.get(2)) else { return Err(err("adj needs two clusters")) };
                let a = inst.cluster_index(a).ok_or_else(|| err("unknown cluster"))?;
                let b = inst.cluster_index(b).ok_or_else(|| err("unknown cluster"))?;
                let kind = match kv("kind") {
                    Some("half") => Incidence::Half,
                    Some("loop") => Incidence::Loop,
                    _ => return Err(err("kind must be half or loop")),
                };
                inst.add_adj(a, b, kind);
            }
            other => return Err(err(&format!("unknown directive {other}"))),
        }
    }
    inst.validate()?;
    Ok(inst)
}

pub fn serialize_instance(inst: &IvInstance) -> String {
    let mut s = String::new();
    for i in 1..=inst.levels {
        let _ = writeln!(s, "level {i}");
    }
    for c in &inst.clusters {
        let _ = writeln!(s, "cluster {} level={} size={}", c.id, c.level, c.size);
    }
    for &(a, b, k) in &inst.adj {
        let kind = if k == Incidence::Half { "half" } else { "loop" };
        let _ = writeln!(s, "adj {} {} kind={kind}", inst.clusters[a].id, inst.clusters[b].id);
    }
    s
}

/// Check a solution vertex by vertex.
pub fn verify_solution(inst: &IvInstance, sol: &IvSolution) -> Result<(), String> {
    let mut odd: HashMap<IvVertex, Vec<(IvVertex, Incidence)>> = HashMap::new();
    let mut even: HashMap<IvVertex, usize> = HashMap::new();
    for &(x, y, k) in &sol.edges {
        let (cx, cy) = (&inst.clusters[x.0], &inst.clusters[y.0]);
        if x.1 >= cx.size || y.1 >= cy.size {
            return Err(format!("vertex out of range in {} or {}", cx.id, cy.id));
        }
        if cx.level % 2 != 1 || cy.level % 2 != 0 {
            return Err(format!("edge {}-{} does not join an odd and an even level", cx.id, cy.id));
        }
        let ok = match k {
            Incidence::Half => cy.level == cx.level + 1,
            Incidence::Loop => cx.level == cy.level + 1,
        };
        if !ok || !inst.has_adj(x.0, y.0, k) {
            return Err(format!("{}-{} is not a {k:?} incidence of the instance", cx.id, cy.id));
        }
        odd.entry(x).or_default().push((y, k));
        *even.entry(y).or_default() += 1;
    }
    for (c, cl) in inst.clusters.iter().enumerate() {
        for i in 0..cl.size {
            if cl.level % 2 == 0 {
                if even.get(&(c, i)).copied().unwrap_or(0) != 1 {
                    return Err(format!("even vertex {}[{i}] is not covered exactly once", cl.id));
                }
                continue;
            }
            let es = odd.get(&(c, i)).map(Vec::as_slice).unwrap_or(&[]);
            let shape_ok = match es {
                [(_, Incidence::Half)] => true,
                [(a, Incidence::Loop), (b, Incidence::Loop)] => a.0 == b.0 && a != b,
                _ => false,
            };
            if !shape_ok {
                return Err(format!("odd vertex {}[{i}] is neither an I nor a V centre", cl.id));
            }
        }
    }
    Ok(())
}

/// Feasibility of a transportation problem with uncapacitated arcs.
fn transport(supply: &[usize], demand: &[usize], arcs: &[(usize, usize)]) -> Option<Vec<((usize, usize), usize)>> {
    let (ns, nd) = (supply.len(), demand.len());
    let total: usize = supply.iter().sum();
    if total != demand.iter().sum::<usize>() {
        return None;
    }
    // nodes: source, supplies, demands, sink
    let n = ns + nd + 2;
    let (src, snk) = (0, n - 1);
    let mut cap = vec![vec![0usize; n]; n];
    for (i, &s) in supply.iter().enumerate() {
        cap[src][1 + i] = s;
    }
    for (j, &d) in demand.iter().enumerate() {
        cap[1 + ns + j][snk] = d;
    }
    for &(i, j) in arcs {
        cap[1 + i][1 + ns + j] = total;
    }
    let orig = cap.clone();
    let mut flow = 0;
    loop {
        let mut prev = vec![usize::MAX; n];
        prev[src] = src;
        let mut queue = std::collections::VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if prev[v] == usize::MAX && cap[u][v] > 0 {
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if prev[snk] == usize::MAX {
            break;
        }
        let mut push = usize::MAX;
        let mut v = snk;
        while v != src {
            push = push.min(cap[prev[v]][v]);
            v = prev[v];
        }
        let mut v = snk;
        while v != src {
            cap[prev[v]][v] -= push;
            cap[v][prev[v]] += push;
            v = prev[v];
        }
        flow += push;
    }
    if flow != total {
        return None;
    }
    let mut out = Vec::new();
    for &(i, j) in arcs {
        let used = orig[1 + i][1 + ns + j] - cap[1 + i][1 + ns + j];
        if used > 0 {
            out.push(((i, j), used));
        }
    }
    Some(out)
}

struct Solver<'a> {
    inst: &'a IvInstance,
    /// loop pairs (even cluster, odd cluster) whose odd cluster is on level 2t+1, per t
    loops: Vec<Vec<(usize, usize)>>,
    memo: HashMap<(usize, Vec<usize>), Option<(Vec<usize>, Vec<((usize, usize), usize)>)>>,
    work: u64,
    budget: u64,
}

impl Solver<'_> {
    fn gaps(&self) -> usize {
        self.inst.levels.div_ceil(2)
    }

    /// Loop pairs between level 2t and 2t+1.
    fn loop_pairs(&self, t: usize) -> &[(usize, usize)] {
        self.loops.get(t).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Gap t joins odd level 2t-1 and even level 2t. `before` are the V
    /// counts on pairs (2t-2, 2t-1), `after` those on (2t, 2t+1).
    fn gap_flow(&self, t: usize, before: &[usize], after: &[usize]) -> Option<Vec<((usize, usize), usize)>> {
        let odd = self.inst.clusters_at(2 * t - 1);
        let even = self.inst.clusters_at(2 * t);
        let mut supply: Vec<usize> = odd.iter().map(|&c| self.inst.clusters[c].size).collect();
        for (&(_, o), &a) in self.loop_pairs(t - 1).iter().zip(before) {
            let i = odd.iter().position(|&c| c == o).expect("odd cluster on level");
            supply[i] = supply[i].checked_sub(a)?;
        }
        let mut demand: Vec<usize> = even.iter().map(|&c| self.inst.clusters[c].size).collect();
        for (&(e, _), &a) in self.loop_pairs(t).iter().zip(after) {
            let j = even.iter().position(|&c| c == e).expect("even cluster on level");
            demand[j] = demand[j].checked_sub(2 * a)?;
        }
        let mut arcs = Vec::new();
        for (i, &o) in odd.iter().enumerate() {
            for (j, &e) in even.iter().enumerate() {
                if self.inst.has_adj(o, e, Incidence::Half) {
                    arcs.push((i, j));
                }
            }
        }
        transport(&supply, &demand, &arcs)
    }

    fn solve(&mut self, t: usize, before: Vec<usize>) -> Result<bool, IvError> {
        if t > self.gaps() {
            return Ok(true);
        }
        let key = (t, before.clone());
        if let Some(r) = self.memo.get(&key) {
            return Ok(r.is_some());
        }
        self.work += 1;
        if self.work > self.budget {
            return Err(IvError::BudgetExceeded(self.budget));
        }
        let pairs = self.loop_pairs(t).to_vec();
        let bound: Vec<usize> = pairs
            .iter()
            .map(|&(e, o)| (self.inst.clusters[e].size / 2).min(self.inst.clusters[o].size))
            .collect();
        let mut after = vec![0usize; pairs.len()];
        let mut found = None;
        loop {
            if let Some(flow) = self.gap_flow(t, &before, &after) {
                if self.solve(t + 1, after.clone())? {
                    found = Some((after.clone(), flow));
                    break;
                }
            }
            // next vector in mixed radix
            let mut i = 0;
            while i < after.len() && after[i] == bound[i] {
                after[i] = 0;
                i += 1;
            }
            if i == after.len() {
                break;
            }
            after[i] += 1;
        }
        let ok = found.is_some();
        self.memo.insert(key, found);
        Ok(ok)
    }
}

/// Decide an instance and produce a solution.
pub fn solve_iv_matching(inst: &IvInstance, budget: u64) -> Result<Option<IvSolution>, IvError> {
    inst.validate()?;
    let gaps = inst.levels.div_ceil(2);
    let mut loops: Vec<Vec<(usize, usize)>> = vec![Vec::new(); gaps + 1];
    for &(a, b, k) in &inst.adj {
        if k == Incidence::Loop {
            loops[inst.clusters[a].level / 2].push((a, b));
        }
    }
    let mut s = Solver { inst, loops, memo: HashMap::new(), work: 0, budget };
    if !s.solve(1, Vec::new())? {
        return Ok(None);
    }
    // replay the memoised choices into vertex-level edges
    let mut next_free: Vec<usize> = vec![0; inst.clusters.len()];
    let mut odd_used: Vec<usize> = vec![0; inst.clusters.len()];
    let mut edges = Vec::new();
    let mut before = Vec::new();
    for t in 1..=gaps {
        let (after, flow) = s.memo[&(t, before.clone())].clone().expect("feasible path");
        let odd = inst.clusters_at(2 * t - 1);
        let even = inst.clusters_at(2 * t);
        for (&(e, o), &a) in s.loop_pairs(t).iter().zip(&after) {
            // V's are placed first in each even cluster; I's take the rest
            for _ in 0..a {
                let centre = (o, odd_used[o]);
                odd_used[o] += 1;
                for _ in 0..2 {
                    edges.push((centre, (e, next_free[e]), Incidence::Loop));
                    next_free[e] += 1;
                }
            }
        }
        for ((i, j), amount) in flow {
            let (o, e) = (odd[i], even[j]);
            for _ in 0..amount {
                edges.push(((o, odd_used[o]), (e, next_free[e]), Incidence::Half));
                odd_used[o] += 1;
                next_free[e] += 1;
            }
        }
        before = after;
    }
    edges.sort();
    let sol = IvSolution { edges };
    debug_assert_eq!(verify_solution(inst, &sol), Ok(()));
    Ok(Some(sol))
}

/// Exhaustive vertex-level search, independent of the cluster structure.
pub fn solve_bruteforce(inst: &IvInstance, budget: u64) -> Result<Option<IvSolution>, IvError> {
    let n = inst.num_vertices();
    if n > 24 {
        return Err(IvError::TooLarge(n));
    }
    let verts: Vec<IvVertex> = inst.clusters.iter().enumerate().flat_map(|(c, cl)| (0..cl.size).map(move |i| (c, i))).collect();
    let level = |v: IvVertex| inst.clusters[v.0].level;
    let odd: Vec<IvVertex> = verts.iter().copied().filter(|&v| level(v) % 2 == 1).collect();
    let even: Vec<IvVertex> = verts.iter().copied().filter(|&v| level(v) % 2 == 0).collect();
    let adjacent = |x: IvVertex, y: IvVertex, k: Incidence| {
        let want = if k == Incidence::Half { level(x) + 1 } else { level(x) - 1 };
        level(y) == want && inst.has_adj(x.0, y.0, k)
    };

    struct Ctx<'a> {
        odd: &'a [IvVertex],
        even: &'a [IvVertex],
        used: Vec<bool>,
        edges: Vec<(IvVertex, IvVertex, Incidence)>,
        work: u64,
        budget: u64,
    }
    fn go(cx: &mut Ctx, i: usize, adj: &dyn Fn(IvVertex, IvVertex, Incidence) -> bool) -> Result<bool, IvError> {
        cx.work += 1;
        if cx.work > cx.budget {
            return Err(IvError::BudgetExceeded(cx.budget));
        }
        let free = cx.used.iter().filter(|u| !**u).count();
        let rest = cx.odd.len() - i;
        if free < rest || free > 2 * rest {
            return Ok(false);
        }
        if i == cx.odd.len() {
            return Ok(free == 0);
        }
        let x = cx.odd[i];
        for j in 0..cx.even.len() {
            if cx.used[j] || !adj(x, cx.even[j], Incidence::Half) {
                continue;
            }
            cx.used[j] = true;
            cx.edges.push((x, cx.even[j], Incidence::Half));
            if go(cx, i + 1, adj)? {
                return Ok(true);
            }
            cx.edges.pop();
            cx.used[j] = false;
        }
        for j in 0..cx.even.len() {
            if cx.used[j] || !adj(x, cx.even[j], Incidence::Loop) {
                continue;
            }
            for j2 in j + 1..cx.even.len() {
                if cx.used[j2] || cx.even[j2].0 != cx.even[j].0 || !adj(x, cx.even[j2], Incidence::Loop) {
                    continue;
                }
                cx.used[j] = true;
                cx.used[j2] = true;
                cx.edges.push((x, cx.even[j], Incidence::Loop));
                cx.edges.push((x, cx.even[j2], Incidence::Loop));
                if go(cx, i + 1, adj)? {
                    return Ok(true);
                }
                cx.edges.truncate(cx.edges.len() - 2);
                cx.used[j] = false;
                cx.used[j2] = false;
            }
        }
        Ok(false)
    }
    let mut cx = Ctx { odd: &odd, even: &even, used: vec![false; even.len()], edges: Vec::new(), work: 0, budget };
    if go(&mut cx, 0, &adjacent)? {
        let mut edges = cx.edges;
        edges.sort();
        Ok(Some(IvSolution { edges }))
    } else {
        Ok(None)
    }
}

/// Random valid instance with at most `max_vertices` vertices and
/// `max_levels` levels.
pub fn random_instance<R: Rng>(rng: &mut R, max_vertices: usize, max_levels: usize) -> IvInstance {
    let levels = rng.gen_range(1..=max_levels.max(1));
    let mut inst = IvInstance { levels, ..Default::default() };
    let mut budget = max_vertices;
    for l in 1..=levels {
        let count = rng.gen_range(1..=2);
        for j in 0..count {
            if budget == 0 {
                break;
            }
            let size = rng.gen_range(1..=3.min(budget));
            budget -= size;
            inst.add_cluster(&format!("c{l}_{j}"), l, size);
        }
    }
    for l in 1..levels {
        let lo = inst.clusters_at(l);
        let hi = inst.clusters_at(l + 1);
        if l % 2 == 1 {
            for &a in &lo {
                for &b in &hi {
                    if rng.gen_bool(0.6) {
                        inst.add_adj(a, b, Incidence::Half);
                    }
                }
            }
        } else {
            // a random partial matching of clusters
            let mut free: Vec<usize> = hi.clone();
            for &a in &lo {
                if free.is_empty() || !rng.gen_bool(0.7) {
                    continue;
                }
                let b = free.swap_remove(rng.gen_range(0..free.len()));
                inst.add_adj(a, b, Incidence::Loop);
            }
        }
    }
    inst
}

/// A pendant element of a star atom with the half-edge and loop colours of
/// its list.
#[derive(Clone, Debug)]
pub struct StarPendant {
    pub id: String,
    pub count: usize,
    pub vhat: Q,
    pub ehat: Q,
    pub halves: BTreeSet<Color>,
    pub loops: BTreeSet<Color>,
}

/// A colour class of the unified dipole (`dipole = true`, sizes of one
/// edge) or of the proper half-edges of the star (sizes of one half-edge).
#[derive(Clone, Debug)]
pub struct StarItem {
    pub color: Color,
    pub count: usize,
    pub vhat: Q,
    pub ehat: Q,
    pub dipole: bool,
}

#[derive(Clone, Debug, Default)]
pub struct StarModel {
    pub pendants: Vec<StarPendant>,
    pub items: Vec<StarItem>,
}

fn odd_part(q: Q) -> (Q, i32) {
    let (mut n, mut d) = (*q.numer(), *q.denom());
    let mut e = 0;
    while n % 2 == 0 {
        n /= 2;
        e += 1;
    }
    while d % 2 == 0 {
        d /= 2;
        e -= 1;
    }
    (Q::new(n, d), e)
}

/// Chain key and exponent of a pendant level with sizes (v̂, ê).
fn chain_of(vhat: Q, ehat: Q) -> Option<((Q, Q), i32)> {
    if ehat <= Q::from_integer(0) || vhat < Q::from_integer(1) {
        return None;
    }
    let (odd, e) = odd_part(ehat);
    Some((((vhat - 1) / ehat, odd), e))
}

/// One instance per chain. Pendant elements of a chain go to odd levels by
/// doubling ê; dipole edges and proper half-edges go to the even level right
/// after the pendant level they can be half-quotients of.
pub fn build_instance_from_star(model: &StarModel) -> Result<Vec<IvInstance>, IvError> {
    let two = Q::from_integer(2);
    // (chain key, exponent) of the pendant level each object attaches to
    let mut placed_p = Vec::new();
    for p in &model.pendants {
        let c = chain_of(p.vhat, p.ehat).ok_or_else(|| IvError::SizeMismatch(p.id.clone()))?;
        placed_p.push(c);
    }
    let mut placed_i = Vec::new();
    for it in &model.items {
        let (v, e) = if it.dipole { (it.vhat / two, it.ehat / two) } else { (it.vhat, it.ehat) };
        let c = chain_of(v, e).ok_or_else(|| IvError::SizeMismatch(format!("colour {}", it.color)))?;
        placed_i.push(c);
    }
    let mut chains: BTreeMap<(Q, Q), i32> = BTreeMap::new();
    for (k, e) in placed_p.iter().chain(&placed_i) {
        let m = chains.entry(*k).or_insert(*e);
        *m = (*m).min(*e);
    }
    let mut out = Vec::new();
    for (key, base) in chains {
        let mut inst = IvInstance::default();
        let mut pc = HashMap::new();
        for (i, p) in model.pendants.iter().enumerate() {
            let (k, e) = placed_p[i];
            if k == key {
                let level = 2 * (e - base) as usize + 1;
                pc.insert(i, inst.add_cluster(&p.id, level, p.count));
            }
        }
        let mut ic = HashMap::new();
        for (i, it) in model.items.iter().enumerate() {
            let (k, e) = placed_i[i];
            if k == key {
                let level = 2 * (e - base) as usize + 2;
                let tag = if it.dipole { "d" } else { "h" };
                ic.insert(i, inst.add_cluster(&format!("{tag}{}_{i}", it.color), level, it.count));
            }
        }
        if inst.levels % 2 == 1 {
            inst.levels += 1;
        }
        for (&i, &ci) in &ic {
            let it = &model.items[i];
            let lvl = inst.clusters[ci].level;
            for (&p, &cp) in &pc {
                let pl = inst.clusters[cp].level;
                let pend = &model.pendants[p];
                if pl + 1 == lvl && pend.halves.contains(&it.color) {
                    inst.add_adj(cp, ci, Incidence::Half);
                }
                if it.dipole && pl == lvl + 1 && pend.loops.contains(&it.color) {
                    inst.add_adj(ci, cp, Incidence::Loop);
                }
            }
        }
        inst.adj.sort();
        inst.validate()?;
        out.push(inst);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const B: u64 = 1_000_000;

    fn check(inst: &IvInstance) -> bool {
        let a = solve_iv_matching(inst, B).unwrap();
        let b = solve_bruteforce(inst, B).unwrap();
        if let Some(s) = &a {
            verify_solution(inst, s).unwrap();
        }
        if let Some(s) = &b {
            verify_solution(inst, s).unwrap();
        }
        assert_eq!(a.is_some(), b.is_some(), "{}", serialize_instance(inst));
        a.is_some()
    }

    #[test]
    fn two_level_cases() {
        let k33 = parse_instance("level 1\nlevel 2\ncluster a level=1 size=3\ncluster b level=2 size=3\nadj a b kind=half\n").unwrap();
        assert!(check(&k33));
        let uneven = parse_instance("cluster a level=1 size=2\ncluster b level=2 size=3\nadj a b kind=half\n").unwrap();
        assert!(!check(&uneven));
        let lonely = parse_instance("level 2\ncluster a level=1 size=1\n").unwrap();
        assert!(!check(&lonely));
        assert!(check(&IvInstance::default()));
    }

    #[test]
    fn v_shapes_are_needed() {
        // the level-3 vertex can only be a V over b
        let t = "cluster a level=1 size=1\ncluster b level=2 size=3\ncluster c level=3 size=1\n\
                 adj a b kind=half\nadj b c kind=loop\n";
        assert!(check(&parse_instance(t).unwrap()));
        // b has size 4: one I and one V leave a vertex of b uncovered
        let t = t.replace("size=3", "size=4");
        assert!(!check(&parse_instance(&t).unwrap()));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_instance("cluster a level=1\n"), Err(IvError::Parse { .. })));
        assert!(matches!(
            parse_instance("cluster a level=1 size=1\ncluster b level=3 size=1\nadj a b kind=half\n"),
            Err(IvError::Invalid(_))
        ));
        assert!(matches!(
            parse_instance("cluster a level=1 size=1\ncluster b level=2 size=1\nadj a b kind=loop\n"),
            Err(IvError::Invalid(_))
        ));
        let two_partners = "cluster b level=2 size=2\ncluster c level=3 size=1\ncluster d level=3 size=1\n\
                            adj b c kind=loop\nadj b d kind=loop\n";
        assert!(matches!(parse_instance(two_partners), Err(IvError::Invalid(_))));
    }

    #[test]
    fn round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let inst = random_instance(&mut rng, 16, 6);
            assert_eq!(parse_instance(&serialize_instance(&inst)).unwrap(), inst);
        }
    }

    #[test]
    fn solver_matches_bruteforce() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut yes = 0;
        for _ in 0..100 {
            if check(&random_instance(&mut rng, 16, 6)) {
                yes += 1;
            }
        }
        assert!(yes > 0);
    }

    #[test]
    fn star_chains() {
        let q = |n: i64| Q::from_integer(n);
        let p = |id: &str, v: i64, e: i64, h: &[Color], l: &[Color]| StarPendant {
            id: id.into(),
            count: 2,
            vhat: q(v),
            ehat: q(e),
            halves: h.iter().copied().collect(),
            loops: l.iter().copied().collect(),
        };
        // level 0 (3, 2), level 1 (5, 4); dipole edges of colour 7 have sizes (6, 4)
        let model = StarModel {
            pendants: vec![p("x", 3, 2, &[7, 8], &[]), p("y", 5, 4, &[], &[7])],
            items: vec![
                StarItem { color: 7, count: 4, vhat: q(6), ehat: q(4), dipole: true },
            ],
        };
        let insts = build_instance_from_star(&model).unwrap();
        assert_eq!(insts.len(), 1);
        let inst = &insts[0];
        assert_eq!(inst.levels, 4);
        let lv = |id: &str| inst.clusters[inst.cluster_index(id).unwrap()].level;
        assert_eq!((lv("x"), lv("d7_0"), lv("y")), (1, 2, 3));
        // two I's from x and two V's from y need six dipole edges
        assert!(!check(inst));
        let mut m2 = model.clone();
        m2.pendants[1].count = 1;
        assert!(check(&build_instance_from_star(&m2).unwrap()[0]));
        // only proper half-edges: two levels
        let m3 = StarModel { pendants: vec![p("x", 3, 2, &[8], &[])], items: vec![StarItem { color: 8, count: 2, vhat: q(3), ehat: q(2), dipole: false }] };
        let i3 = build_instance_from_star(&m3).unwrap();
        assert_eq!(i3[0].levels, 2);
        assert!(check(&i3[0]));
        assert!(build_instance_from_star(&StarModel::default()).unwrap().is_empty());
    }
}
