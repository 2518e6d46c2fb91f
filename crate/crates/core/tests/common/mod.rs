//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashSet;

use rand::Rng;
use regcover::canon::canonical_form;
use regcover::covering::quotient_unchecked;
use regcover::multigraph::{Color, EdgeType, GraphBuilder, Multigraph};
use regcover::perm::{DartPermutation, PermGroup};
use regcover::quotexp::{choices_from_groups, expand_quotient};
use regcover::reduction::{catalog_base, reduce_automorphism, reduction_series};

/// Same vertex and dart counts as `h`, with one edge end moved (or two
/// half-edges joined into an edge). Retries until the result is connected.
pub fn mutate<R: Rng>(h: &Multigraph, rng: &mut R) -> Option<Multigraph> {
    let n = h.num_vertices();
    for _ in 0..20 {
        let full: Vec<usize> = (0..h.num_edges()).filter(|&e| !h.edge(e).is_half()).collect();
        let halves: Vec<usize> = (0..h.num_edges()).filter(|&e| h.edge(e).is_half()).collect();
        let mut b = GraphBuilder::new();
        for v in 0..n {
            b.add_vertex(h.vertex_id(v), h.vertex_color(v));
        }
        let (moved, joined) = if !full.is_empty() && (halves.len() < 2 || rng.gen_bool(0.8)) {
            (Some((full[rng.gen_range(0..full.len())], rng.gen_range(0..2usize), rng.gen_range(0..n))), None)
        } else if halves.len() >= 2 {
            let a = rng.gen_range(0..halves.len());
            let mut c = rng.gen_range(0..halves.len() - 1);
            if c >= a {
                c += 1;
            }
            (None, Some((halves[a], halves[c])))
        } else {
            return None;
        };
        for (e, ed) in h.edges().iter().enumerate() {
            let (u, v) = h.endpoints(e);
            if ed.is_half() {
                match joined {
                    Some((a, c)) if a == e => {
                        let w = h.endpoints(c).0;
                        b.add_edge(&ed.id, u, w, ed.color, EdgeType::Halvable);
                    }
                    Some((_, c)) if c == e => {}
                    _ => {
                        b.add_half(&ed.id, u, ed.color);
                    }
                }
                continue;
            }
            let (mut u, mut v) = (u, v);
            if let Some((m, side, w)) = moved {
                if m == e {
                    if side == 0 {
                        u = w;
                    } else {
                        v = w;
                    }
                }
            }
            b.add_edge(&ed.id, u, v, ed.color, ed.etype);
        }
        let g = b.build();
        if g.is_connected() && canonical_form(&g, None).cert != canonical_form(h, None).cert {
            return Some(g);
        }
    }
    None
}

/// Reduce G, quotient the top graph by the image of `sub`, expand back,
/// and return the result (to be compared with G/sub).
pub fn reduce_quotient_expand(g: &Multigraph, sub: &PermGroup) -> Multigraph {
    let s = reduction_series(g, catalog_base(&[g])).expect("G has a central block");
    let r = s.len();
    let mut groups = vec![sub.clone()];
    for i in 0..r {
        let imgs: Vec<DartPermutation> = groups[i]
            .elements()
            .iter()
            .map(|p| reduce_automorphism(p, &s.graphs[i], &s.graphs[i + 1], &s.steps[i]).expect("automorphism reduces"))
            .collect();
        groups.push(PermGroup::from_elements(imgs).expect("image is a group"));
    }
    let (mut h, _) = quotient_unchecked(s.top(), &groups[r]).expect("quotient of G_r");
    let mut ch = choices_from_groups(&s, &groups).expect("choices");
    for i in (0..r).rev() {
        let (nh, nc) = expand_quotient(&h, &s.catalog, i, &ch).expect("expansion");
        h = nh;
        ch = nc;
    }
    h
}

/// Cycle x-y-...-z-w-...-x whose sides xy and zw are dipoles with `c`
/// colour classes of two halvable edges each, and whose other two sides
/// are paths of length `l`.
pub fn dipole_family(c: usize, l: usize) -> Multigraph {
    let mut b = GraphBuilder::new();
    let x = b.add_vertex("x", 0);
    let y = b.add_vertex("y", 0);
    let z = b.add_vertex("z", 0);
    let w = b.add_vertex("w", 0);
    let mut eid = 0;
    let mut edge = |b: &mut GraphBuilder, u: usize, v: usize, col: Color| {
        b.add_edge(&format!("e{eid}"), u, v, col, EdgeType::Halvable);
        eid += 1;
    };
    for (u, v) in [(x, y), (z, w)] {
        for col in 1..=c as Color {
            edge(&mut b, u, v, col);
            edge(&mut b, u, v, col);
        }
    }
    for (tag, u, v) in [("p", y, z), ("q", w, x)] {
        let mut prev = u;
        for i in 1..l {
            let m = b.add_vertex(&format!("{tag}{i}"), 0);
            edge(&mut b, prev, m, 0);
            prev = m;
        }
        edge(&mut b, prev, v, 0);
    }
    b.build()
}

/// The quotient of `dipole_family(c, l)` by the reflection through the
/// dipoles, with every colour class folded into a loop.
pub fn dipole_family_quotient(c: usize, l: usize) -> Multigraph {
    let mut b = GraphBuilder::new();
    let mut prev = b.add_vertex("a0", 0);
    let first = prev;
    for i in 1..=l {
        let m = b.add_vertex(&format!("a{i}"), 0);
        b.add_edge(&format!("p{i}"), prev, m, 0, EdgeType::Halvable);
        prev = m;
    }
    for (tag, v) in [("s", first), ("t", prev)] {
        for col in 1..=c as Color {
            b.add_edge(&format!("{tag}{col}"), v, v, col, EdgeType::Halvable);
        }
    }
    b.build()
}

/// An IV instance built around a hidden solution, so it is always feasible.
/// Extra half-incidences are sprinkled on top.
pub fn planted_iv_instance<R: Rng>(rng: &mut R, max_levels: usize) -> regcover::ivmatch::IvInstance {
    use regcover::ivmatch::{Incidence, IvInstance};
    let levels = rng.gen_range(2..=max_levels.max(2));
    // per level, per cluster: size
    let mut sizes: Vec<Vec<usize>> = (0..=levels).map(|_| vec![0; rng.gen_range(1..=2)]).collect();
    let mut used: HashSet<(usize, usize, usize, usize, Incidence)> = HashSet::new();
    for l in (1..=levels).step_by(2) {
        // loop partners between level l-1 and l form a matching
        let partner: Vec<Option<usize>> = (0..sizes[l].len())
            .map(|j| if l > 1 && j < sizes[l - 1].len() && rng.gen_bool(0.7) { Some(j) } else { None })
            .collect();
        for j in 0..sizes[l].len() {
            let n = rng.gen_range(1..=3);
            for _ in 0..n {
                let v_ok = partner[j].is_some();
                let i_ok = l < levels;
                if v_ok && (!i_ok || rng.gen_bool(0.5)) {
                    let p = partner[j].unwrap();
                    sizes[l - 1][p] += 2;
                    used.insert((l - 1, p, l, j, Incidence::Loop));
                } else if i_ok {
                    let t = rng.gen_range(0..sizes[l + 1].len());
                    sizes[l + 1][t] += 1;
                    used.insert((l, j, l + 1, t, Incidence::Half));
                } else {
                    continue;
                }
                sizes[l][j] += 1;
            }
        }
    }
    let mut inst = IvInstance { levels, ..Default::default() };
    let mut index = std::collections::HashMap::new();
    for l in 1..=levels {
        for (j, &s) in sizes[l].iter().enumerate() {
            if s > 0 {
                index.insert((l, j), inst.add_cluster(&format!("c{l}_{j}"), l, s));
            }
        }
    }
    let mut adj: Vec<_> = used.into_iter().collect();
    adj.sort();
    for (la, a, lb, b, kind) in adj {
        inst.add_adj(index[&(la, a)], index[&(lb, b)], kind);
    }
    for l in (1..levels).step_by(2) {
        for a in 0..sizes[l].len() {
            for b in 0..sizes[l + 1].len() {
                if let (Some(&x), Some(&y)) = (index.get(&(l, a)), index.get(&(l + 1, b))) {
                    if !inst.has_adj(x, y, Incidence::Half) && rng.gen_bool(0.3) {
                        inst.add_adj(x, y, Incidence::Half);
                    }
                }
            }
        }
    }
    inst
}
