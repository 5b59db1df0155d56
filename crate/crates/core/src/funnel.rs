//! Funnel recognition, funnel labelings and forbidden-subgraph witnesses.
//!
//! A funnel is a DAG whose vertices split into a Fork set inducing an
//! out-forest and a Merge set inducing an in-forest, with no arc from Merge
//! to Fork. Equivalently, no vertex of out-degree at least two is reachable
//! from a vertex of in-degree at least two.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::digraph::{Arc, Digraph, Direction, VertexId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Fork,
    Merge,
}

impl Label {
    pub fn flip(self) -> Label {
        match self {
            Label::Fork => Label::Merge,
            Label::Merge => Label::Fork,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Label::Fork => 'F',
            Label::Merge => 'M',
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Fork => f.write_str("Fork"),
            Label::Merge => f.write_str("Merge"),
        }
    }
}

/// Partial map from vertices to [`Label`].
#[derive(Clone, Debug, Default)]
pub struct Labeling {
    slots: Vec<Option<Label>>,
    assigned: usize,
}

impl PartialEq for Labeling {
    fn eq(&self, other: &Self) -> bool {
        self.assigned == other.assigned && self.iter().eq(other.iter())
    }
}

impl Eq for Labeling {}

impl FromIterator<(VertexId, Label)> for Labeling {
    fn from_iter<T: IntoIterator<Item = (VertexId, Label)>>(iter: T) -> Self {
        let mut l = Labeling::new();
        for (v, lab) in iter {
            l.set(v, lab);
        }
        l
    }
}

impl Labeling {
    pub fn new() -> Self {
        Labeling::default()
    }

    /// Every vertex in `vertices` gets `label`.
    pub fn uniform(vertices: impl IntoIterator<Item = VertexId>, label: Label) -> Self {
        vertices.into_iter().map(|v| (v, label)).collect()
    }

    #[inline]
    pub fn get(&self, v: VertexId) -> Option<Label> {
        self.slots.get(v.0).copied().flatten()
    }

    #[inline]
    pub fn is(&self, v: VertexId, label: Label) -> bool {
        self.get(v) == Some(label)
    }

    #[inline]
    pub fn contains(&self, v: VertexId) -> bool {
        self.get(v).is_some()
    }

    /// Assigns `label` to `v`, returning the previous label.
    pub fn set(&mut self, v: VertexId, label: Label) -> Option<Label> {
        if v.0 >= self.slots.len() {
            self.slots.resize(v.0 + 1, None);
        }
        let prev = self.slots[v.0].replace(label);
        if prev.is_none() {
            self.assigned += 1;
        }
        prev
    }

    pub fn unset(&mut self, v: VertexId) -> Option<Label> {
        let prev = self.slots.get_mut(v.0).and_then(Option::take);
        if prev.is_some() {
            self.assigned -= 1;
        }
        prev
    }

    /// Number of labeled vertices.
    #[inline]
    pub fn len(&self) -> usize {
        self.assigned
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.assigned == 0
    }

    /// Assignments in increasing vertex order.
    pub fn iter(&self) -> impl Iterator<Item = (VertexId, Label)> + '_ {
        self.slots
            .iter()
            .enumerate()
            .filter_map(|(i, l)| l.map(|l| (VertexId(i), l)))
    }

    pub fn with_label(&self, label: Label) -> impl Iterator<Item = VertexId> + '_ {
        self.iter().filter(move |&(_, l)| l == label).map(|(v, _)| v)
    }

    /// `self ⊇ other`: every assignment of `other` is present in `self`.
    pub fn extends(&self, other: &Labeling) -> bool {
        other.iter().all(|(v, l)| self.get(v) == Some(l))
    }

    /// Every live vertex of `d` is labeled and nothing else is.
    pub fn is_complete_for(&self, d: &Digraph) -> bool {
        self.assigned == d.vertex_count() && d.vertices().all(|v| self.contains(v))
    }

    /// Labels on vertices that are not live in `d`, if any.
    pub fn first_outside(&self, d: &Digraph) -> Option<VertexId> {
        self.iter().map(|(v, _)| v).find(|&v| !d.is_live(v))
    }
}

/// An occurrence of the forbidden pattern: two arcs into `merge_vertex`, a
/// path from `merge_vertex` to `fork_vertex`, two arcs out of `fork_vertex`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForbiddenWitness {
    pub merge_vertex: VertexId,
    pub fork_vertex: VertexId,
    /// Vertex sequence from `merge_vertex` to `fork_vertex`.
    pub path: Vec<VertexId>,
    pub in_pair: [VertexId; 2],
    pub out_pair: [VertexId; 2],
}

impl ForbiddenWitness {
    /// Number of path arcs, i.e. the `k` of the pattern.
    pub fn order(&self) -> usize {
        self.path.len() - 1
    }

    pub fn arcs(&self) -> Vec<Arc> {
        let mut arcs = vec![
            Arc::new(self.in_pair[0], self.merge_vertex),
            Arc::new(self.in_pair[1], self.merge_vertex),
        ];
        arcs.extend(self.path.windows(2).map(|w| Arc::new(w[0], w[1])));
        arcs.push(Arc::new(self.fork_vertex, self.out_pair[0]));
        arcs.push(Arc::new(self.fork_vertex, self.out_pair[1]));
        arcs
    }

    /// The witness names existing arcs and its vertices are pairwise distinct.
    pub fn is_valid_in(&self, d: &Digraph) -> bool {
        let (Some(&first), Some(&last)) = (self.path.first(), self.path.last()) else {
            return false;
        };
        if first != self.merge_vertex || last != self.fork_vertex {
            return false;
        }
        let mut vs: Vec<VertexId> = self.path.clone();
        vs.extend(self.in_pair);
        vs.extend(self.out_pair);
        let total = vs.len();
        vs.sort_unstable();
        vs.dedup();
        vs.len() == total && self.arcs().iter().all(|a| d.has_arc(a.tail, a.head))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FunnelError {
    #[error("digraph contains a cycle through vertex {0}")]
    Cyclic(VertexId),
}

/// Funnel test by the reachability characterization.
pub fn is_funnel(d: &Digraph) -> bool {
    if !d.is_acyclic() {
        return false;
    }
    let merges: Vec<VertexId> = d.vertices().filter(|&v| d.in_degree(v) >= 2).collect();
    let reach = d.reach_mask(&merges, Direction::Forward);
    d.vertices().all(|v| !reach[v.0] || d.out_degree(v) < 2)
}

/// Extends `partial` to a funnel labeling of `d`, or `None` if impossible.
///
/// Merge is forced on everything reachable from an in-degree ≥ 2 vertex or
/// a Merge-labeled vertex; Fork is forced on everything reaching an
/// out-degree ≥ 2 vertex or a Fork-labeled vertex. A conflict between the two
/// closures means no extension exists; otherwise unforced vertices are Fork.
pub fn has_labeling_extension(d: &Digraph, partial: &Labeling) -> Option<Labeling> {
    if !d.is_acyclic() {
        return None;
    }
    let mut merge_seeds = Vec::new();
    let mut fork_seeds = Vec::new();
    for v in d.vertices() {
        if d.in_degree(v) >= 2 || partial.is(v, Label::Merge) {
            merge_seeds.push(v);
        }
        if d.out_degree(v) >= 2 || partial.is(v, Label::Fork) {
            fork_seeds.push(v);
        }
    }
    let merge_forced = d.reach_mask(&merge_seeds, Direction::Forward);
    let fork_forced = d.reach_mask(&fork_seeds, Direction::Backward);
    let mut out = Labeling::new();
    for v in d.vertices() {
        if merge_forced[v.0] && fork_forced[v.0] {
            return None;
        }
        out.set(v, if merge_forced[v.0] { Label::Merge } else { Label::Fork });
    }
    Some(out)
}

/// Checks the funnel-labeling conditions directly.
pub fn is_funnel_labeling(d: &Digraph, labeling: &Labeling) -> bool {
    if !labeling.is_complete_for(d) {
        return false;
    }
    for v in d.vertices() {
        let lv = labeling.get(v).unwrap();
        match lv {
            Label::Fork => {
                let fork_in = d
                    .in_neighbors(v)
                    .iter()
                    .filter(|&&u| labeling.is(u, Label::Fork))
                    .count();
                if fork_in > 1 {
                    return false;
                }
            }
            Label::Merge => {
                if d.out_neighbors(v).iter().any(|&w| labeling.is(w, Label::Fork)) {
                    return false;
                }
                let merge_out = d
                    .out_neighbors(v)
                    .iter()
                    .filter(|&&w| labeling.is(w, Label::Merge))
                    .count();
                if merge_out > 1 {
                    return false;
                }
            }
        }
    }
    // Without Merge→Fork arcs every cycle stays inside one class.
    for label in [Label::Fork, Label::Merge] {
        let part: Vec<VertexId> = labeling.with_label(label).collect();
        if !d.induced_subgraph(&part).is_acyclic() {
            return false;
        }
    }
    true
}

/// A forbidden-pattern occurrence in the DAG `d`, or `None` if `d` is a
/// funnel. The path is a shortest one, found by breadth-first search from all
/// in-degree ≥ 2 vertices in increasing index order.
pub fn find_forbidden_witness(d: &Digraph) -> Result<Option<ForbiddenWitness>, FunnelError> {
    if let Some(cycle) = d.find_cycle() {
        return Err(FunnelError::Cyclic(cycle[0]));
    }
    let mut parent: Vec<Option<VertexId>> = vec![None; d.id_bound()];
    let mut seen = vec![false; d.id_bound()];
    let mut queue = VecDeque::new();
    for v in d.vertices().filter(|&v| d.in_degree(v) >= 2) {
        seen[v.0] = true;
        queue.push_back(v);
    }
    while let Some(v) = queue.pop_front() {
        if d.out_degree(v) >= 2 {
            let mut path = vec![v];
            let mut x = v;
            while let Some(p) = parent[x.0] {
                path.push(p);
                x = p;
            }
            path.reverse();
            let merge = path[0];
            let ins = d.in_neighbors(merge);
            let outs = d.out_neighbors(v);
            return Ok(Some(ForbiddenWitness {
                merge_vertex: merge,
                fork_vertex: v,
                path,
                in_pair: [ins[0], ins[1]],
                out_pair: [outs[0], outs[1]],
            }));
        }
        for &w in d.out_neighbors(v) {
            if !seen[w.0] {
                seen[w.0] = true;
                parent[w.0] = Some(v);
                queue.push_back(w);
            }
        }
    }
    Ok(None)
}

/// Local-funnel test for the vertex set `h` inside `d`: `d[h]` has exactly one
/// source and admits a Fork/Merge split where Fork vertices have global
/// in-degree ≤ 1, Merge vertices global out-degree ≤ 1, and no arc of `d[h]`
/// runs from Merge to Fork.
pub fn is_local_funnel(d: &Digraph, h: &[VertexId]) -> bool {
    let sub = d.induced_subgraph(h);
    if sub.vertices().filter(|&v| sub.in_degree(v) == 0).count() != 1 {
        return false;
    }
    let mut forced = Labeling::new();
    for v in sub.vertices() {
        let must_merge = d.in_degree(v) >= 2;
        let must_fork = d.out_degree(v) >= 2;
        match (must_merge, must_fork) {
            (true, true) => return false,
            (true, false) => {
                forced.set(v, Label::Merge);
            }
            (false, true) => {
                forced.set(v, Label::Fork);
            }
            (false, false) => {}
        }
    }
    has_labeling_extension(&sub, &forced).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(n: usize, arcs: &[(usize, usize)]) -> Digraph {
        Digraph::from_arcs(n, arcs.iter().copied()).unwrap().0
    }

    fn v(i: usize) -> VertexId {
        VertexId(i)
    }

    pub(crate) fn small() -> Digraph {
        g(6, &[(0, 2), (1, 2), (2, 3), (3, 4), (3, 5)])
    }

    // The worked example with a=0, b=1 (into v), v=2, c=3 (out of v), u=4, w=5,
    // d=6 (into w), e=7 and f=8 (out of w).
    pub(crate) fn sample() -> Digraph {
        g(9, &[(0, 2), (1, 2), (2, 3), (2, 4), (4, 5), (6, 5), (5, 7), (5, 8)])
    }

    #[test]
    fn recognition_examples() {
        assert!(!is_funnel(&small()));
        let bip = g(4, &[(0, 2), (0, 3), (1, 2), (1, 3)]);
        assert!(is_funnel(&bip));
        let f2 = sample();
        assert!(f2.is_acyclic());
        assert!(!is_funnel(&f2));
        let fixed = f2.delete_arcs(&[Arc::new(2, 4), Arc::new(4, 5)]).unwrap();
        assert!(is_funnel(&fixed));
        assert!(!is_funnel(&g(3, &[(0, 1), (1, 2), (2, 0)])));
    }

    #[test]
    fn extension_examples() {
        let arc = g(2, &[(0, 1)]);
        let l = has_labeling_extension(&arc, &Labeling::new()).unwrap();
        assert!(is_funnel_labeling(&arc, &l));
        let bad: Labeling = [(v(0), Label::Merge), (v(1), Label::Fork)].into_iter().collect();
        assert!(has_labeling_extension(&arc, &bad).is_none());
        assert!(has_labeling_extension(&small(), &Labeling::new()).is_none());
    }

    #[test]
    fn labeling_check_examples() {
        let path = g(3, &[(0, 1), (1, 2)]);
        assert!(is_funnel_labeling(&path, &Labeling::uniform(path.vertices(), Label::Fork)));
        let join = g(3, &[(0, 2), (1, 2)]);
        assert!(!is_funnel_labeling(&join, &Labeling::uniform(join.vertices(), Label::Fork)));
        let fixed = sample()
            .delete_arcs(&[Arc::new(2, 4), Arc::new(4, 5)])
            .unwrap();
        let l = has_labeling_extension(&fixed, &Labeling::new()).unwrap();
        assert!(is_funnel_labeling(&fixed, &l));
        assert_eq!(l.get(v(2)), Some(Label::Merge));
        // a partial labeling is not a funnel labeling
        assert!(!is_funnel_labeling(&path, &Labeling::new()));
        // Fork cycle
        let cyc = g(2, &[(0, 1), (1, 0)]);
        assert!(!is_funnel_labeling(&cyc, &Labeling::uniform(cyc.vertices(), Label::Fork)));
    }

    #[test]
    fn witness_examples() {
        let d0 = g(5, &[(0, 2), (1, 2), (2, 3), (2, 4)]);
        let w = find_forbidden_witness(&d0).unwrap().unwrap();
        assert_eq!(w.order(), 0);
        assert!(w.is_valid_in(&d0));
        let w1 = find_forbidden_witness(&small()).unwrap().unwrap();
        assert_eq!(w1.path, vec![v(2), v(3)]);
        assert_eq!(w1.in_pair, [v(0), v(1)]);
        assert_eq!(w1.out_pair, [v(4), v(5)]);
        assert!(w1.is_valid_in(&small()));
        let tree = g(4, &[(0, 1), (0, 2), (2, 3)]);
        assert_eq!(find_forbidden_witness(&tree).unwrap(), None);
        assert!(find_forbidden_witness(&g(2, &[(0, 1), (1, 0)])).is_err());
    }

    #[test]
    fn local_funnel_examples() {
        let single = g(1, &[]);
        assert!(is_local_funnel(&single, &[v(0)]));
        let arc = g(2, &[(0, 1)]);
        assert!(is_local_funnel(&arc, &[v(0), v(1)]));
        let two = g(3, &[(0, 2), (1, 2)]);
        assert!(!is_local_funnel(&two, &[v(0), v(1), v(2)]));
        // a vertex with global in- and out-degree 2 cannot be placed
        let d0 = g(5, &[(0, 2), (1, 2), (2, 3), (2, 4)]);
        assert!(!is_local_funnel(&d0, &[v(2)]));
        assert!(!is_local_funnel(&single, &[]));
    }

    #[test]
    fn labeling_bookkeeping() {
        let mut l = Labeling::new();
        assert_eq!(l.set(v(3), Label::Fork), None);
        assert_eq!(l.set(v(3), Label::Merge), Some(Label::Fork));
        assert_eq!(l.len(), 1);
        l.set(v(0), Label::Fork);
        let other: Labeling = [(v(3), Label::Merge)].into_iter().collect();
        assert!(l.extends(&other));
        assert!(!other.extends(&l));
        assert_eq!(l.unset(v(3)), Some(Label::Merge));
        assert_eq!(l.len(), 1);
        let mut padded = other.clone();
        padded.set(v(9), Label::Fork);
        padded.unset(v(9));
        assert_eq!(padded, other);
    }
}
