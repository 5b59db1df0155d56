//! Independent oracles for tests. Everything here works from first
//! principles on small graphs and shares no code with the crate beyond the
//! graph container.

#![allow(dead_code)]

use fads_core::{Arc, Digraph, FadlInstance, Label, Labeling, VertexId};

/// All ordered pairs of distinct vertices in `0..n`, row-major.
pub fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v))).collect()
}

/// The digraph on `n` vertices whose arcs are the pairs selected by `mask`.
pub fn digraph_from_mask(n: usize, mask: u64) -> Digraph {
    let arcs: Vec<(usize, usize)> = pairs(n)
        .into_iter()
        .enumerate()
        .filter(|&(i, _)| mask >> i & 1 == 1)
        .map(|(_, p)| p)
        .collect();
    Digraph::from_arcs_strict(n, arcs).unwrap()
}

fn arc_list(d: &Digraph) -> Vec<(usize, usize)> {
    d.arcs().map(|a| (a.tail.0, a.head.0)).collect()
}

/// Kahn's algorithm on an explicit arc list.
pub fn acyclic(n: usize, arcs: &[(usize, usize)]) -> bool {
    let mut indeg = vec![0usize; n];
    for &(_, v) in arcs {
        indeg[v] += 1;
    }
    let mut stack: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut seen = 0;
    while let Some(u) = stack.pop() {
        seen += 1;
        for &(a, b) in arcs {
            if a == u {
                indeg[b] -= 1;
                if indeg[b] == 0 {
                    stack.push(b);
                }
            }
        }
    }
    seen == n
}

/// The literal definition: a DAG in which every source-to-sink path of
/// length at least one owns an arc that lies on no other such path.
pub fn funnel_by_definition(d: &Digraph) -> bool {
    let n = d.id_bound();
    let arcs = arc_list(d);
    if !acyclic(n, &arcs) {
        return false;
    }
    let outs = |u: usize| arcs.iter().filter(move |a| a.0 == u).map(|a| a.1);
    let is_source = |v: usize| arcs.iter().all(|a| a.1 != v);
    let mut paths: Vec<Vec<(usize, usize)>> = Vec::new();
    fn walk(
        v: usize,
        path: &mut Vec<(usize, usize)>,
        outs: &dyn Fn(usize) -> Vec<usize>,
        paths: &mut Vec<Vec<(usize, usize)>>,
    ) {
        let next = outs(v);
        if next.is_empty() {
            if !path.is_empty() {
                paths.push(path.clone());
            }
            return;
        }
        for w in next {
            path.push((v, w));
            walk(w, path, outs, paths);
            path.pop();
        }
    }
    let outs_vec = |u: usize| outs(u).collect::<Vec<_>>();
    for s in (0..n).filter(|&v| is_source(v)) {
        walk(s, &mut Vec::new(), &outs_vec, &mut paths);
    }
    paths.iter().enumerate().all(|(i, p)| {
        p.iter()
            .any(|a| paths.iter().enumerate().all(|(j, q)| j == i || !q.contains(a)))
    })
}

/// Labeling `bits` (bit v set = Fork) checked against the partition
/// definition: Fork side an out-forest, Merge side an in-forest, no
/// Merge→Fork arc.
pub fn partition_ok(n: usize, arcs: &[(usize, usize)], fork: impl Fn(usize) -> bool) -> bool {
    if arcs.iter().any(|&(u, v)| !fork(u) && fork(v)) {
        return false;
    }
    let side = |want: bool| -> Vec<(usize, usize)> {
        arcs.iter().copied().filter(|&(u, v)| fork(u) == want && fork(v) == want).collect()
    };
    let (f, m) = (side(true), side(false));
    let max_in = (0..n).map(|v| f.iter().filter(|a| a.1 == v).count()).max().unwrap_or(0);
    let max_out = (0..n).map(|v| m.iter().filter(|a| a.0 == v).count()).max().unwrap_or(0);
    max_in <= 1 && max_out <= 1 && acyclic(n, &f) && acyclic(n, &m)
}

/// Whether some complete labeling of `d` extending `fixed` is a funnel
/// labeling, by trying all of them.
pub fn labeling_exists(d: &Digraph, fixed: &Labeling) -> bool {
    let n = d.id_bound();
    let arcs = arc_list(d);
    (0u32..1 << n).any(|bits| {
        let fork = |v: usize| bits >> v & 1 == 1;
        fixed.iter().all(|(v, l)| fork(v.0) == (l == Label::Fork)) && partition_ok(n, &arcs, fork)
    })
}

/// Largest arc subset with in-degree at most one everywhere and no cycle.
pub fn max_branching_exhaustive(d: &Digraph) -> usize {
    let n = d.id_bound();
    let arcs = arc_list(d);
    let mut best = 0;
    for mask in 0u32..1 << arcs.len() {
        let chosen: Vec<(usize, usize)> =
            arcs.iter().enumerate().filter(|&(i, _)| mask >> i & 1 == 1).map(|(_, &a)| a).collect();
        if chosen.len() <= best {
            continue;
        }
        let ok = (0..n).all(|v| chosen.iter().filter(|a| a.1 == v).count() <= 1) && acyclic(n, &chosen);
        if ok {
            best = chosen.len();
        }
    }
    best
}

/// Smallest number of deletions admitting a funnel labeling extending the
/// instance's labels, searching arc subsets by size up to `cap`.
pub fn optimum_exhaustive(inst: &FadlInstance, cap: usize) -> Option<usize> {
    let d = &inst.digraph;
    let n = d.id_bound();
    let live: Vec<usize> = d.vertices().map(|v| v.0).collect();
    let arcs = arc_list(d);
    let feasible = |kept: &[(usize, usize)]| {
        (0u32..1 << live.len()).any(|bits| {
            let mut fork = vec![false; n];
            for (i, &v) in live.iter().enumerate() {
                fork[v] = bits >> i & 1 == 1;
            }
            inst.labeling.iter().all(|(v, l)| fork[v.0] == (l == Label::Fork))
                && partition_ok(n, kept, |v| fork[v])
        })
    };
    // Tries every way of removing `left` more arcs with index >= `from`.
    fn search(
        arcs: &[(usize, usize)],
        removed: &mut Vec<usize>,
        from: usize,
        left: usize,
        feasible: &dyn Fn(&[(usize, usize)]) -> bool,
    ) -> bool {
        if left == 0 {
            let kept: Vec<(usize, usize)> =
                arcs.iter().enumerate().filter(|(i, _)| !removed.contains(i)).map(|(_, &a)| a).collect();
            return feasible(&kept);
        }
        (from..arcs.len()).any(|i| {
            removed.push(i);
            let hit = search(arcs, removed, i + 1, left - 1, feasible);
            removed.pop();
            hit
        })
    }
    (0..=cap.min(arcs.len())).find(|&size| search(&arcs, &mut Vec::new(), 0, size, &feasible))
}

pub fn arc(u: usize, v: usize) -> Arc {
    Arc::new(u, v)
}

pub fn vid(v: usize) -> VertexId {
    VertexId(v)
}
