//! Loop-free, parallel-arc-free directed graphs with tombstoned vertex deletion.
//!
//! Adjacency lists are kept sorted by vertex index so that every traversal in
//! this crate is deterministic. Deleted vertices keep their id slot; ids are
//! never reused within one [`Digraph`] value.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

/// Dense vertex index within one digraph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub usize);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl From<usize> for VertexId {
    fn from(i: usize) -> Self {
        VertexId(i)
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An ordered vertex pair `(tail, head)`. Ordering is lexicographic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Arc {
    pub tail: VertexId,
    pub head: VertexId,
}

impl Arc {
    #[inline]
    pub fn new(tail: impl Into<VertexId>, head: impl Into<VertexId>) -> Self {
        Arc {
            tail: tail.into(),
            head: head.into(),
        }
    }
}

impl From<(usize, usize)> for Arc {
    fn from((t, h): (usize, usize)) -> Self {
        Arc::new(t, h)
    }
}

impl fmt::Display for Arc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.tail, self.head)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("self-loop on vertex {0}")]
    SelfLoop(VertexId),
    #[error("vertex {vertex} out of range (vertex count {bound})")]
    OutOfRange { vertex: VertexId, bound: usize },
    #[error("vertex {0} has been deleted")]
    DeadVertex(VertexId),
    #[error("arc {0} is not present")]
    MissingArc(Arc),
    #[error("arc {0} is already present")]
    DuplicateArc(Arc),
    #[error("adjacency inconsistency at arc {0}")]
    Inconsistent(Arc),
}

#[derive(Clone, Debug, Default)]
pub struct Digraph {
    out_adj: Vec<Vec<VertexId>>,
    in_adj: Vec<Vec<VertexId>>,
    alive: Vec<bool>,
    live: usize,
    arcs: usize,
}

impl PartialEq for Digraph {
    /// Two digraphs are equal when they have the same id space, the same
    /// live vertices, and the same arcs.
    fn eq(&self, other: &Self) -> bool {
        self.alive == other.alive && self.out_adj == other.out_adj
    }
}

impl Eq for Digraph {}

impl Digraph {
    /// `n` isolated vertices.
    pub fn new(n: usize) -> Self {
        Digraph {
            out_adj: vec![Vec::new(); n],
            in_adj: vec![Vec::new(); n],
            alive: vec![true; n],
            live: n,
            arcs: 0,
        }
    }

    /// Builds a digraph from an arc list. Duplicate pairs are collapsed and
    /// counted; self-loops and out-of-range endpoints are rejected.
    pub fn from_arcs<I, A>(n: usize, arcs: I) -> Result<(Digraph, usize), GraphError>
    where
        I: IntoIterator<Item = A>,
        A: Into<Arc>,
    {
        let mut out_adj: Vec<Vec<VertexId>> = vec![Vec::new(); n];
        for a in arcs {
            let a: Arc = a.into();
            for v in [a.tail, a.head] {
                if v.0 >= n {
                    return Err(GraphError::OutOfRange { vertex: v, bound: n });
                }
            }
            if a.tail == a.head {
                return Err(GraphError::SelfLoop(a.tail));
            }
            out_adj[a.tail.0].push(a.head);
        }
        let mut duplicates = 0;
        let mut in_adj: Vec<Vec<VertexId>> = vec![Vec::new(); n];
        let mut arcs = 0;
        for (t, outs) in out_adj.iter_mut().enumerate() {
            let before = outs.len();
            outs.sort_unstable();
            outs.dedup();
            duplicates += before - outs.len();
            arcs += outs.len();
            for &h in outs.iter() {
                in_adj[h.0].push(VertexId(t));
            }
        }
        // in_adj is filled in increasing tail order, hence already sorted.
        let g = Digraph {
            out_adj,
            in_adj,
            alive: vec![true; n],
            live: n,
            arcs,
        };
        Ok((g, duplicates))
    }

    /// Like [`Digraph::from_arcs`] but treats a duplicate as an error.
    pub fn from_arcs_strict<I, A>(n: usize, arcs: I) -> Result<Digraph, GraphError>
    where
        I: IntoIterator<Item = A>,
        A: Into<Arc>,
    {
        let arcs: Vec<Arc> = arcs.into_iter().map(Into::into).collect();
        let (g, dup) = Digraph::from_arcs(n, arcs.iter().copied())?;
        if dup > 0 {
            let mut sorted = arcs;
            sorted.sort_unstable();
            let a = sorted.windows(2).find(|w| w[0] == w[1]).map(|w| w[0]);
            return Err(GraphError::DuplicateArc(a.expect("duplicate counted")));
        }
        Ok(g)
    }

    /// Size of the id space, including deleted vertices.
    #[inline]
    pub fn id_bound(&self) -> usize {
        self.alive.len()
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.live
    }

    #[inline]
    pub fn arc_count(&self) -> usize {
        self.arcs
    }

    #[inline]
    pub fn is_live(&self, v: VertexId) -> bool {
        self.alive.get(v.0).copied().unwrap_or(false)
    }

    /// Live vertices in increasing index order.
    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.alive
            .iter()
            .enumerate()
            .filter(|(_, &a)| a)
            .map(|(i, _)| VertexId(i))
    }

    #[inline]
    pub fn out_neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.out_adj[v.0]
    }

    #[inline]
    pub fn in_neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.in_adj[v.0]
    }

    #[inline]
    pub fn neighbors(&self, v: VertexId, dir: Direction) -> &[VertexId] {
        match dir {
            Direction::Forward => &self.out_adj[v.0],
            Direction::Backward => &self.in_adj[v.0],
        }
    }

    #[inline]
    pub fn out_degree(&self, v: VertexId) -> usize {
        self.out_adj[v.0].len()
    }

    #[inline]
    pub fn in_degree(&self, v: VertexId) -> usize {
        self.in_adj[v.0].len()
    }

    #[inline]
    pub fn has_arc(&self, tail: VertexId, head: VertexId) -> bool {
        self.out_adj
            .get(tail.0)
            .is_some_and(|o| o.binary_search(&head).is_ok())
    }

    /// All arcs sorted by `(tail, head)`.
    pub fn arcs(&self) -> impl Iterator<Item = Arc> + '_ {
        self.out_adj
            .iter()
            .enumerate()
            .flat_map(|(t, outs)| outs.iter().map(move |&h| Arc::new(VertexId(t), h)))
    }

    fn check_live(&self, v: VertexId) -> Result<(), GraphError> {
        if v.0 >= self.id_bound() {
            Err(GraphError::OutOfRange {
                vertex: v,
                bound: self.id_bound(),
            })
        } else if !self.alive[v.0] {
            Err(GraphError::DeadVertex(v))
        } else {
            Ok(())
        }
    }

    pub fn add_vertex(&mut self) -> VertexId {
        self.out_adj.push(Vec::new());
        self.in_adj.push(Vec::new());
        self.alive.push(true);
        self.live += 1;
        VertexId(self.alive.len() - 1)
    }

    pub fn add_arc(&mut self, tail: VertexId, head: VertexId) -> Result<(), GraphError> {
        self.check_live(tail)?;
        self.check_live(head)?;
        if tail == head {
            return Err(GraphError::SelfLoop(tail));
        }
        let outs = &mut self.out_adj[tail.0];
        match outs.binary_search(&head) {
            Ok(_) => return Err(GraphError::DuplicateArc(Arc::new(tail, head))),
            Err(pos) => outs.insert(pos, head),
        }
        let ins = &mut self.in_adj[head.0];
        let pos = ins.binary_search(&tail).unwrap_err();
        ins.insert(pos, tail);
        self.arcs += 1;
        Ok(())
    }

    pub fn remove_arc(&mut self, tail: VertexId, head: VertexId) -> Result<(), GraphError> {
        let missing = || GraphError::MissingArc(Arc::new(tail, head));
        let outs = self.out_adj.get_mut(tail.0).ok_or_else(missing)?;
        let pos = outs.binary_search(&head).map_err(|_| missing())?;
        outs.remove(pos);
        let ins = &mut self.in_adj[head.0];
        let pos = ins.binary_search(&tail).map_err(|_| missing())?;
        ins.remove(pos);
        self.arcs -= 1;
        Ok(())
    }

    /// Tombstones `v` and purges all incident arcs.
    pub fn remove_vertex(&mut self, v: VertexId) -> Result<(), GraphError> {
        self.check_live(v)?;
        let outs = core::mem::take(&mut self.out_adj[v.0]);
        for h in &outs {
            let ins = &mut self.in_adj[h.0];
            let pos = ins.binary_search(&v).expect("adjacency symmetry");
            ins.remove(pos);
        }
        let ins = core::mem::take(&mut self.in_adj[v.0]);
        for t in &ins {
            let o = &mut self.out_adj[t.0];
            let pos = o.binary_search(&v).expect("adjacency symmetry");
            o.remove(pos);
        }
        self.arcs -= outs.len() + ins.len();
        self.alive[v.0] = false;
        self.live -= 1;
        Ok(())
    }

    /// `D - S`. Fails on the first arc of `S` that is not present.
    pub fn delete_arcs(&self, arcs: &[Arc]) -> Result<Digraph, GraphError> {
        let mut g = self.clone();
        for a in arcs {
            g.remove_arc(a.tail, a.head)?;
        }
        Ok(g)
    }

    /// Kahn's algorithm; `None` when a cycle exists.
    pub fn topological_order(&self) -> Option<Vec<VertexId>> {
        let mut indeg: Vec<usize> = self.in_adj.iter().map(Vec::len).collect();
        let mut queue: VecDeque<VertexId> = self
            .vertices()
            .filter(|v| indeg[v.0] == 0)
            .collect();
        let mut order = Vec::with_capacity(self.live);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &h in &self.out_adj[v.0] {
                indeg[h.0] -= 1;
                if indeg[h.0] == 0 {
                    queue.push_back(h);
                }
            }
        }
        (order.len() == self.live).then_some(order)
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_some()
    }

    /// Some directed cycle as a vertex sequence `v0, v1, .., vr` with arcs
    /// `(vi, vi+1)` and `(vr, v0)`.
    pub fn find_cycle(&self) -> Option<Vec<VertexId>> {
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state = vec![0u8; self.id_bound()];
        let mut parent = vec![usize::MAX; self.id_bound()];
        for root in self.vertices() {
            if state[root.0] != 0 {
                continue;
            }
            let mut stack: Vec<(VertexId, usize)> = vec![(root, 0)];
            state[root.0] = 1;
            while let Some(top) = stack.last_mut() {
                let (v, ref mut i) = *top;
                if let Some(&h) = self.out_adj[v.0].get(*i) {
                    *i += 1;
                    match state[h.0] {
                        0 => {
                            state[h.0] = 1;
                            parent[h.0] = v.0;
                            stack.push((h, 0));
                        }
                        1 => {
                            let mut cycle = vec![v];
                            let mut x = v;
                            while x != h {
                                x = VertexId(parent[x.0]);
                                cycle.push(x);
                            }
                            cycle.reverse();
                            return Some(cycle);
                        }
                        _ => {}
                    }
                } else {
                    state[v.0] = 2;
                    stack.pop();
                }
            }
        }
        None
    }

    /// Membership mask of everything reachable from (forward) or reaching
    /// (backward) `sources`, sources included.
    pub fn reach_mask(&self, sources: &[VertexId], dir: Direction) -> Vec<bool> {
        let mut seen = vec![false; self.id_bound()];
        let mut stack = Vec::new();
        for &s in sources {
            if self.is_live(s) && !seen[s.0] {
                seen[s.0] = true;
                stack.push(s);
            }
        }
        while let Some(v) = stack.pop() {
            for &x in self.neighbors(v, dir) {
                if !seen[x.0] {
                    seen[x.0] = true;
                    stack.push(x);
                }
            }
        }
        seen
    }

    pub fn reachable_set(&self, sources: &[VertexId], dir: Direction) -> Vec<VertexId> {
        self.reach_mask(sources, dir)
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| VertexId(i))
            .collect()
    }

    /// `D[U]`. The id space is preserved; vertices outside `U` are tombstoned.
    pub fn induced_subgraph(&self, keep: &[VertexId]) -> Digraph {
        let mut mask = vec![false; self.id_bound()];
        for &v in keep {
            if self.is_live(v) {
                mask[v.0] = true;
            }
        }
        let mut g = Digraph {
            out_adj: vec![Vec::new(); self.id_bound()],
            in_adj: vec![Vec::new(); self.id_bound()],
            alive: mask.clone(),
            live: mask.iter().filter(|&&b| b).count(),
            arcs: 0,
        };
        for (t, outs) in self.out_adj.iter().enumerate() {
            if !mask[t] {
                continue;
            }
            g.out_adj[t] = outs.iter().copied().filter(|h| mask[h.0]).collect();
            g.arcs += g.out_adj[t].len();
        }
        for (h, ins) in self.in_adj.iter().enumerate() {
            if mask[h] {
                g.in_adj[h] = ins.iter().copied().filter(|t| mask[t.0]).collect();
            }
        }
        g
    }

    /// Same vertices, every arc reversed.
    pub fn reversed(&self) -> Digraph {
        Digraph {
            out_adj: self.in_adj.clone(),
            in_adj: self.out_adj.clone(),
            alive: self.alive.clone(),
            live: self.live,
            arcs: self.arcs,
        }
    }

    /// Renumbers live vertices densely in increasing order. Returns the new
    /// digraph and the old-to-new id map.
    pub fn compact(&self) -> (Digraph, Vec<Option<VertexId>>) {
        let mut map = vec![None; self.id_bound()];
        let mut next = 0;
        for v in self.vertices() {
            map[v.0] = Some(VertexId(next));
            next += 1;
        }
        let arcs = self
            .arcs()
            .map(|a| Arc::new(map[a.tail.0].unwrap(), map[a.head.0].unwrap()));
        let (g, _) = Digraph::from_arcs(next, arcs).expect("compaction preserves validity");
        (g, map)
    }

    /// Strongly connected components (iterative Tarjan). Components are
    /// emitted in reverse topological order of the condensation.
    pub fn strongly_connected_components(&self) -> Vec<Vec<VertexId>> {
        const UNSET: usize = usize::MAX;
        let n = self.id_bound();
        let mut index = vec![UNSET; n];
        let mut low = vec![0usize; n];
        let mut on_stack = vec![false; n];
        let mut stack: Vec<VertexId> = Vec::new();
        let mut comps = Vec::new();
        let mut counter = 0;
        for root in self.vertices() {
            if index[root.0] != UNSET {
                continue;
            }
            let mut call: Vec<(VertexId, usize)> = vec![(root, 0)];
            index[root.0] = counter;
            low[root.0] = counter;
            counter += 1;
            stack.push(root);
            on_stack[root.0] = true;
            while let Some(&mut (v, ref mut i)) = call.last_mut() {
                if let Some(&w) = self.out_adj[v.0].get(*i) {
                    *i += 1;
                    if index[w.0] == UNSET {
                        index[w.0] = counter;
                        low[w.0] = counter;
                        counter += 1;
                        stack.push(w);
                        on_stack[w.0] = true;
                        call.push((w, 0));
                    } else if on_stack[w.0] {
                        low[v.0] = low[v.0].min(index[w.0]);
                    }
                } else {
                    call.pop();
                    if let Some(&(p, _)) = call.last() {
                        low[p.0] = low[p.0].min(low[v.0]);
                    }
                    if low[v.0] == index[v.0] {
                        let mut comp = Vec::new();
                        loop {
                            let w = stack.pop().unwrap();
                            on_stack[w.0] = false;
                            comp.push(w);
                            if w == v {
                                break;
                            }
                        }
                        comp.sort_unstable();
                        comps.push(comp);
                    }
                }
            }
        }
        comps
    }

    /// Full-scan consistency check of the adjacency structure.
    pub fn validate(&self) -> Result<(), GraphError> {
        let mut count = 0;
        for (t, outs) in self.out_adj.iter().enumerate() {
            let tail = VertexId(t);
            if !self.alive[t] && !outs.is_empty() {
                return Err(GraphError::DeadVertex(tail));
            }
            for w in outs.windows(2) {
                if w[0] >= w[1] {
                    return Err(GraphError::DuplicateArc(Arc::new(tail, w[1])));
                }
            }
            for &h in outs {
                if h == tail {
                    return Err(GraphError::SelfLoop(tail));
                }
                if !self.is_live(h) || self.in_adj[h.0].binary_search(&tail).is_err() {
                    return Err(GraphError::Inconsistent(Arc::new(tail, h)));
                }
            }
            count += outs.len();
        }
        let in_total: usize = self.in_adj.iter().map(Vec::len).sum();
        for (h, ins) in self.in_adj.iter().enumerate() {
            for &t in ins {
                if !self.has_arc(t, VertexId(h)) {
                    return Err(GraphError::Inconsistent(Arc::new(t, VertexId(h))));
                }
            }
        }
        if count != self.arcs || in_total != self.arcs {
            return Err(GraphError::Inconsistent(Arc::new(0, 0)));
        }
        if self.alive.iter().filter(|&&a| a).count() != self.live {
            return Err(GraphError::Inconsistent(Arc::new(0, 0)));
        }
        Ok(())
    }
}
