//! Named graphs and small graph families used by tests, the corpus and the
//! command line tool.

use std::collections::HashSet;

use rand::Rng;

use crate::canon::canonical_form;
use crate::multigraph::{EdgeType, GraphBuilder, Multigraph};
use crate::planar::is_planar;

pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Multigraph {
    let mut b = GraphBuilder::new();
    for i in 0..n {
        b.add_vertex(&format!("v{i}"), 0);
    }
    for (k, &(u, v)) in edges.iter().enumerate() {
        b.add_edge(&format!("e{k}"), u, v, 0, EdgeType::Halvable);
    }
    b.build()
}

pub fn cycle(n: usize) -> Multigraph {
    let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    from_edges(n, &edges)
}

pub fn path(n: usize) -> Multigraph {
    let edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
    from_edges(n, &edges)
}

pub fn complete(n: usize) -> Multigraph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            edges.push((i, j));
        }
    }
    from_edges(n, &edges)
}

pub fn complete_bipartite(a: usize, b: usize) -> Multigraph {
    let mut edges = Vec::new();
    for i in 0..a {
        for j in 0..b {
            edges.push((i, a + j));
        }
    }
    from_edges(a + b, &edges)
}

pub fn tetrahedron() -> Multigraph {
    complete(4)
}

pub fn cube() -> Multigraph {
    let mut edges = Vec::new();
    for v in 0..8usize {
        for bit in 0..3 {
            let u = v ^ (1 << bit);
            if v < u {
                edges.push((v, u));
            }
        }
    }
    from_edges(8, &edges)
}

pub fn octahedron() -> Multigraph {
    let mut edges = Vec::new();
    for i in 0..6usize {
        for j in i + 1..6 {
            if i / 2 != j / 2 {
                edges.push((i, j));
            }
        }
    }
    from_edges(6, &edges)
}

pub fn dodecahedron() -> Multigraph {
    let mut edges = Vec::new();
    for i in 0..5 {
        edges.push((i, (i + 1) % 5));
        edges.push((i, 5 + 2 * i));
        edges.push((15 + i, 15 + (i + 1) % 5));
        edges.push((6 + 2 * i, 15 + i));
    }
    for i in 0..10 {
        edges.push((5 + i, 5 + (i + 1) % 10));
    }
    from_edges(20, &edges)
}

pub fn icosahedron() -> Multigraph {
    let mut edges = Vec::new();
    for i in 0..5 {
        let up = 1 + i;
        let lo = 6 + i;
        edges.push((0, up));
        edges.push((up, 1 + (i + 1) % 5));
        edges.push((lo, 6 + (i + 1) % 5));
        edges.push((up, lo));
        edges.push((up, 6 + (i + 1) % 5));
        edges.push((11, lo));
    }
    from_edges(12, &edges)
}

pub fn petersen() -> Multigraph {
    let mut edges = Vec::new();
    for i in 0..5 {
        edges.push((i, (i + 1) % 5));
        edges.push((i, i + 5));
        edges.push((5 + i, 5 + (i + 2) % 5));
    }
    from_edges(10, &edges)
}

/// Two vertices with a loop each, joined by one edge: the quotient of the
/// Petersen graph by a rotation of order five.
pub fn petersen_base() -> Multigraph {
    let mut b = GraphBuilder::new();
    let u = b.add_vertex("u", 0);
    let v = b.add_vertex("v", 0);
    b.add_edge("outer", u, u, 0, EdgeType::Halvable);
    b.add_edge("inner", v, v, 0, EdgeType::Halvable);
    b.add_edge("spoke", u, v, 0, EdgeType::Halvable);
    b.build()
}

/// Dipole: two vertices joined by parallel edges; one entry per edge
/// giving (colour, type, reversed).
pub fn dipole(spec: &[(u32, EdgeType, bool)]) -> Multigraph {
    let mut b = GraphBuilder::new();
    let u = b.add_vertex("u", 0);
    let v = b.add_vertex("v", 0);
    for (i, &(c, t, rev)) in spec.iter().enumerate() {
        if rev {
            b.add_edge(&format!("d{i}"), v, u, c, t);
        } else {
            b.add_edge(&format!("d{i}"), u, v, c, t);
        }
    }
    b.build()
}

/// Random connected simple planar graph on n vertices: random tree plus
/// up to `extra` edges kept when planarity survives.
pub fn random_connected_planar<R: Rng>(n: usize, extra: usize, rng: &mut R) -> Multigraph {
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut present: HashSet<(usize, usize)> = HashSet::new();
    for i in 1..n {
        let j = rng.gen_range(0..i);
        edges.push((j, i));
        present.insert((j, i));
    }
    for _ in 0..extra {
        if n < 2 {
            break;
        }
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a == b {
            continue;
        }
        let key = (a.min(b), a.max(b));
        if present.contains(&key) {
            continue;
        }
        edges.push(key);
        if is_planar(&from_edges(n, &edges)) {
            present.insert(key);
        } else {
            edges.pop();
        }
    }
    // shuffle vertex names so generators do not leak structure
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        perm.swap(i, j);
    }
    let edges: Vec<(usize, usize)> = edges.iter().map(|&(a, b)| (perm[a], perm[b])).collect();
    from_edges(n, &edges)
}

fn simple_edges(g: &Multigraph) -> Vec<(usize, usize)> {
    (0..g.num_edges()).map(|e| g.endpoints(e)).collect()
}

/// All connected simple planar graphs with 1..=nmax vertices up to
/// isomorphism; result[n] lists the graphs with n vertices.
pub fn all_connected_planar(nmax: usize) -> Vec<Vec<Multigraph>> {
    let mut out: Vec<Vec<Multigraph>> = vec![Vec::new(); nmax + 1];
    if nmax == 0 {
        return out;
    }
    out[1].push(from_edges(1, &[]));
    for n in 2..=nmax {
        let mut seen: HashSet<Vec<u64>> = HashSet::new();
        let mut level = Vec::new();
        for g in &out[n - 1] {
            let base = simple_edges(g);
            let m = n - 1;
            for mask in 1u32..(1 << m) {
                let mut edges = base.clone();
                for v in 0..m {
                    if mask >> v & 1 == 1 {
                        edges.push((v, m));
                    }
                }
                if edges.len() > 3 * n - 6 && n >= 3 {
                    continue;
                }
                let h = from_edges(n, &edges);
                let cf = canonical_form(&h, None).cert;
                if seen.contains(&cf) {
                    continue;
                }
                if is_planar(&h) {
                    seen.insert(cf);
                    level.push(h);
                }
            }
        }
        out[n] = level;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_sizes() {
        for (g, v, e) in [
            (cube(), 8, 12),
            (octahedron(), 6, 12),
            (dodecahedron(), 20, 30),
            (icosahedron(), 12, 30),
            (petersen(), 10, 15),
        ] {
            assert_eq!(g.num_vertices(), v);
            assert_eq!(g.num_edges(), e);
            assert!(g.is_connected());
        }
        for v in 0..20 {
            assert_eq!(dodecahedron().degree(v), 3);
        }
        for v in 0..12 {
            assert_eq!(icosahedron().degree(v), 5);
        }
    }

    #[test]
    fn planar_graph_counts() {
        // connected planar graphs on 1..=7 vertices
        let all = all_connected_planar(7);
        let counts: Vec<usize> = all.iter().skip(1).map(|l| l.len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 6, 20, 99, 646]);
    }
}
