//! Exact solvers for labeled funnel arc deletion.
//!
//! Three engines with different search spaces:
//! * [`solve_bruteforce`] enumerates arc subsets by size;
//! * [`solve_labelings`] enumerates complete labelings and prices each one
//!   with [`cost_for_labeling`];
//! * [`solve_branch_and_bound`] branches on labels with propagation and
//!   bounds, and gives up with [`SolveStatus::Unknown`] past a node budget.

use alloc::vec;
use alloc::vec::Vec;
use alloc::collections::VecDeque;

use thiserror::Error;

use crate::digraph::{Arc, Digraph, VertexId};
use crate::funnel::{has_labeling_extension, Label, Labeling};
use crate::instance::{FadlInstance, Solution};
use crate::rules::{lower_bound_sum, set_label_choice};

/// An arc set in which every vertex has in-degree at most one and which has
/// no cycle.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Branching {
    /// Sorted.
    pub arcs: Vec<Arc>,
}

impl Branching {
    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn contains(&self, a: Arc) -> bool {
        self.arcs.binary_search(&a).is_ok()
    }

    /// Live vertices of `d` without an incoming branching arc.
    pub fn roots(&self, d: &Digraph) -> Vec<VertexId> {
        let mut has_parent = vec![false; d.id_bound()];
        for a in &self.arcs {
            has_parent[a.head.0] = true;
        }
        d.vertices().filter(|v| !has_parent[v.0]).collect()
    }

    /// Arcs belong to `d`, in-degrees are at most one, no cycle.
    pub fn is_valid_in(&self, d: &Digraph) -> bool {
        let mut parent: Vec<Option<VertexId>> = vec![None; d.id_bound()];
        for a in &self.arcs {
            if !d.has_arc(a.tail, a.head) || parent[a.head.0].is_some() {
                return false;
            }
            parent[a.head.0] = Some(a.tail);
        }
        // With in-degree at most one a cycle shows up as a parent walk that
        // runs longer than the vertex count.
        let mut state = vec![0u8; d.id_bound()];
        for start in d.vertices() {
            let mut path = Vec::new();
            let mut cur = Some(start);
            while let Some(v) = cur {
                match state[v.0] {
                    1 => return false,
                    2 => break,
                    _ => {}
                }
                state[v.0] = 1;
                path.push(v);
                cur = parent[v.0];
            }
            for v in path {
                state[v.0] = 2;
            }
        }
        true
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("vertex {0} has no label")]
    IncompleteLabeling(VertexId),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Yes(Solution),
    No,
    /// The node budget ran out before a decision.
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Smallest deletion set size found, when the engine establishes it.
    pub optimum: Option<usize>,
    /// Search nodes or candidate sets examined.
    pub nodes: u64,
}

impl SolveResult {
    pub fn is_yes(&self) -> bool {
        matches!(self.status, SolveStatus::Yes(_))
    }

    pub fn is_no(&self) -> bool {
        matches!(self.status, SolveStatus::No)
    }

    pub fn solution(&self) -> Option<&Solution> {
        match &self.status {
            SolveStatus::Yes(s) => Some(s),
            _ => None,
        }
    }
}

/// A maximum branching of `d`.
///
/// Every source strongly connected component of the condensation needs a
/// root of its own, and a search forest grown from one vertex per source
/// component reaches everything, so the optimum is `n` minus the number of
/// source components.
pub fn max_branching_size(d: &Digraph) -> (usize, Branching) {
    let sccs = d.strongly_connected_components();
    let mut comp = vec![usize::MAX; d.id_bound()];
    for (i, c) in sccs.iter().enumerate() {
        for &v in c {
            comp[v.0] = i;
        }
    }
    let mut entered = vec![false; sccs.len()];
    for a in d.arcs() {
        if comp[a.tail.0] != comp[a.head.0] {
            entered[comp[a.head.0]] = true;
        }
    }
    let mut seen = vec![false; d.id_bound()];
    let mut queue = VecDeque::new();
    for (i, c) in sccs.iter().enumerate() {
        if !entered[i] {
            seen[c[0].0] = true;
            queue.push_back(c[0]);
        }
    }
    let mut arcs = Vec::new();
    while let Some(v) = queue.pop_front() {
        for &w in d.out_neighbors(v) {
            if !seen[w.0] {
                seen[w.0] = true;
                arcs.push(Arc::new(v, w));
                queue.push_back(w);
            }
        }
    }
    arcs.sort_unstable();
    (arcs.len(), Branching { arcs })
}

/// The cheapest deletion set making the complete labeling `labeling` a
/// funnel labeling of `d`, and its size.
pub fn cost_for_labeling(d: &Digraph, labeling: &Labeling) -> Result<(usize, Vec<Arc>), SolverError> {
    if let Some(v) = d.vertices().find(|&v| !labeling.contains(v)) {
        return Err(SolverError::IncompleteLabeling(v));
    }
    let mut deleted: Vec<Arc> = d
        .arcs()
        .filter(|a| labeling.is(a.tail, Label::Merge) && labeling.is(a.head, Label::Fork))
        .collect();
    let side = |label: Label| -> Vec<VertexId> { d.vertices().filter(|&v| labeling.is(v, label)).collect() };

    let forks = d.induced_subgraph(&side(Label::Fork));
    let (_, keep) = max_branching_size(&forks);
    deleted.extend(forks.arcs().filter(|&a| !keep.contains(a)));

    let merges = d.induced_subgraph(&side(Label::Merge)).reversed();
    let (_, keep) = max_branching_size(&merges);
    deleted.extend(
        merges
            .arcs()
            .filter(|&a| !keep.contains(a))
            .map(|a| Arc::new(a.head, a.tail)),
    );
    deleted.sort_unstable();
    Ok((deleted.len(), deleted))
}

fn yes(deleted_arcs: Vec<Arc>, labeling: Labeling, optimum: Option<usize>, nodes: u64) -> SolveResult {
    SolveResult {
        status: SolveStatus::Yes(Solution {
            deleted_arcs,
            labeling,
        }),
        optimum,
        nodes,
    }
}

fn no(optimum: Option<usize>, nodes: u64) -> SolveResult {
    SolveResult {
        status: SolveStatus::No,
        optimum,
        nodes,
    }
}

/// Advances `idx` to the next `idx.len()`-subset of `0..n` in
/// lexicographic order.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let s = idx.len();
    for i in (0..s).rev() {
        if idx[i] < n - s + i {
            idx[i] += 1;
            for j in i + 1..s {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Tries every arc subset of size `0, 1, ..., k` and accepts the first one
/// whose removal leaves a digraph on which the fixed labels extend to a
/// funnel labeling. The reported optimum is the size of that subset.
pub fn solve_bruteforce(instance: &FadlInstance) -> SolveResult {
    if instance.budget < 0 {
        return no(None, 0);
    }
    let d = &instance.digraph;
    let arcs: Vec<Arc> = d.arcs().collect();
    let m = arcs.len();
    let top = (instance.budget as usize).min(m);
    let mut nodes = 0u64;
    let mut work = d.clone();
    for s in 0..=top {
        let mut idx: Vec<usize> = (0..s).collect();
        loop {
            nodes += 1;
            for &i in &idx {
                work.remove_arc(arcs[i].tail, arcs[i].head).unwrap();
            }
            let found = has_labeling_extension(&work, &instance.labeling);
            for &i in &idx {
                work.add_arc(arcs[i].tail, arcs[i].head).unwrap();
            }
            if let Some(labeling) = found {
                let chosen = idx.iter().map(|&i| arcs[i]).collect();
                return yes(chosen, labeling, Some(s), nodes);
            }
            if !next_combination(&mut idx, m) {
                break;
            }
        }
    }
    no(None, nodes)
}

/// Lower bound on the cost of any completion of a partial labeling: every
/// Merge→Fork arc, plus the in-degree excess inside the Fork side and the
/// out-degree excess inside the Merge side.
struct PartialCost {
    labels: Vec<Option<Label>>,
    fork_in: Vec<usize>,
    merge_out: Vec<usize>,
    total: usize,
}

impl PartialCost {
    fn new(d: &Digraph) -> Self {
        PartialCost {
            labels: vec![None; d.id_bound()],
            fork_in: vec![0; d.id_bound()],
            merge_out: vec![0; d.id_bound()],
            total: 0,
        }
    }

    fn excess(c: usize) -> usize {
        c.saturating_sub(1)
    }

    /// Assigns `v` and returns the increase of the bound.
    fn assign(&mut self, d: &Digraph, v: VertexId, label: Label) -> usize {
        let before = self.total;
        self.labels[v.0] = Some(label);
        match label {
            Label::Fork => {
                for &u in d.in_neighbors(v) {
                    match self.labels[u.0] {
                        Some(Label::Merge) => self.total += 1,
                        Some(Label::Fork) => self.bump_fork_in(v, 1),
                        None => {}
                    }
                }
                for &w in d.out_neighbors(v) {
                    if self.labels[w.0] == Some(Label::Fork) {
                        self.bump_fork_in(w, 1);
                    }
                }
            }
            Label::Merge => {
                for &w in d.out_neighbors(v) {
                    match self.labels[w.0] {
                        Some(Label::Fork) => self.total += 1,
                        Some(Label::Merge) => self.bump_merge_out(v, 1),
                        None => {}
                    }
                }
                for &u in d.in_neighbors(v) {
                    if self.labels[u.0] == Some(Label::Merge) {
                        self.bump_merge_out(u, 1);
                    }
                }
            }
        }
        self.total - before
    }

    fn unassign(&mut self, d: &Digraph, v: VertexId) {
        let label = self.labels[v.0].take().expect("assigned");
        match label {
            Label::Fork => {
                for &u in d.in_neighbors(v) {
                    match self.labels[u.0] {
                        Some(Label::Merge) => self.total -= 1,
                        Some(Label::Fork) => self.drop_fork_in(v),
                        None => {}
                    }
                }
                for &w in d.out_neighbors(v) {
                    if self.labels[w.0] == Some(Label::Fork) {
                        self.drop_fork_in(w);
                    }
                }
            }
            Label::Merge => {
                for &w in d.out_neighbors(v) {
                    match self.labels[w.0] {
                        Some(Label::Fork) => self.total -= 1,
                        Some(Label::Merge) => self.drop_merge_out(v),
                        None => {}
                    }
                }
                for &u in d.in_neighbors(v) {
                    if self.labels[u.0] == Some(Label::Merge) {
                        self.drop_merge_out(u);
                    }
                }
            }
        }
    }

    fn bump_fork_in(&mut self, v: VertexId, by: usize) {
        let old = Self::excess(self.fork_in[v.0]);
        self.fork_in[v.0] += by;
        self.total += Self::excess(self.fork_in[v.0]) - old;
    }

    fn drop_fork_in(&mut self, v: VertexId) {
        let old = Self::excess(self.fork_in[v.0]);
        self.fork_in[v.0] -= 1;
        self.total -= old - Self::excess(self.fork_in[v.0]);
    }

    fn bump_merge_out(&mut self, v: VertexId, by: usize) {
        let old = Self::excess(self.merge_out[v.0]);
        self.merge_out[v.0] += by;
        self.total += Self::excess(self.merge_out[v.0]) - old;
    }

    fn drop_merge_out(&mut self, v: VertexId) {
        let old = Self::excess(self.merge_out[v.0]);
        self.merge_out[v.0] -= 1;
        self.total -= old - Self::excess(self.merge_out[v.0]);
    }
}

struct LabelingSearch<'a> {
    d: &'a Digraph,
    order: Vec<VertexId>,
    cost: PartialCost,
    best: Option<(usize, Labeling)>,
    nodes: u64,
}

impl LabelingSearch<'_> {
    fn bound(&self) -> usize {
        self.best.as_ref().map_or(usize::MAX, |b| b.0)
    }

    fn run(&mut self, depth: usize) {
        self.nodes += 1;
        if self.cost.total >= self.bound() {
            return;
        }
        if depth == self.order.len() {
            let labeling: Labeling = self
                .order
                .iter()
                .map(|&v| (v, self.cost.labels[v.0].unwrap()))
                .collect();
            let (c, _) = cost_for_labeling(self.d, &labeling).expect("complete");
            if c < self.bound() {
                self.best = Some((c, labeling));
            }
            return;
        }
        let v = self.order[depth];
        let fixed = self.cost.labels[v.0];
        if fixed.is_some() {
            self.run(depth + 1);
            return;
        }
        for label in [Label::Fork, Label::Merge] {
            self.cost.assign(self.d, v, label);
            self.run(depth + 1);
            self.cost.unassign(self.d, v);
        }
    }
}

/// Minimises [`cost_for_labeling`] over all complete labelings extending the
/// fixed labels. The optimum is always reported, also when it exceeds the
/// budget.
pub fn solve_labelings(instance: &FadlInstance) -> SolveResult {
    let d = &instance.digraph;
    let mut cost = PartialCost::new(d);
    // Breadth-first order keeps neighbours close so the bound bites early.
    let mut order = Vec::with_capacity(d.vertex_count());
    let mut seen = vec![false; d.id_bound()];
    for s in d.vertices() {
        if seen[s.0] {
            continue;
        }
        seen[s.0] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in d.out_neighbors(v).iter().chain(d.in_neighbors(v)) {
                if !seen[w.0] {
                    seen[w.0] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    for (v, label) in instance.labeling.iter() {
        cost.assign(d, v, label);
    }
    let mut search = LabelingSearch {
        d,
        order,
        cost,
        best: None,
        nodes: 0,
    };
    search.run(0);
    let (opt, labeling) = search.best.expect("some labeling exists");
    let nodes = search.nodes;
    if instance.budget >= 0 && opt as i64 <= instance.budget {
        let (_, arcs) = cost_for_labeling(d, &labeling).unwrap();
        yes(arcs, labeling, Some(opt), nodes)
    } else {
        no(Some(opt), nodes)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BnbOptions {
    /// Search nodes allowed across the whole run.
    pub node_budget: u64,
    /// Deepen the budget from zero to find the optimum instead of only
    /// deciding at the instance budget.
    pub optimize: bool,
}

impl Default for BnbOptions {
    fn default() -> Self {
        BnbOptions {
            node_budget: 1_000_000,
            optimize: false,
        }
    }
}

struct Bnb<'a> {
    original: &'a FadlInstance,
    nodes: u64,
    limit: u64,
}

enum Search {
    Found(Solution),
    Exhausted,
    OutOfNodes,
}

impl Bnb<'_> {
    /// Fixes forced labels and deletes arcs between labeled vertices.
    /// Returns `false` when the node is refuted.
    fn propagate(&self, work: &mut FadlInstance, paid: &mut Vec<Arc>) -> bool {
        loop {
            if work.budget < 0 {
                return false;
            }
            let mut changed = false;
            let vs: Vec<VertexId> = work.digraph.vertices().collect();
            for &v in &vs {
                if work.labeling.contains(v) {
                    continue;
                }
                if let Some(l) = set_label_choice(&work.digraph, &work.labeling, work.budget, v) {
                    work.labeling.set(v, l);
                    changed = true;
                }
            }
            let between: Vec<Arc> = work
                .digraph
                .arcs()
                .filter(|a| work.labeling.contains(a.tail) && work.labeling.contains(a.head))
                .collect();
            for a in between {
                let (lt, lh) = (work.labeling.get(a.tail), work.labeling.get(a.head));
                match (lt, lh) {
                    (Some(Label::Fork), Some(Label::Merge)) => {}
                    (Some(Label::Merge), Some(Label::Fork)) => {
                        work.budget -= 1;
                        paid.push(a);
                    }
                    _ => continue,
                }
                work.digraph.remove_arc(a.tail, a.head).unwrap();
                changed = true;
            }
            if work.budget < 0 || lower_bound_sum(work) > 2 * work.budget {
                return false;
            }
            if !changed {
                return true;
            }
        }
    }

    /// Completes `work` into a solution of the original instance if the
    /// deletion set `paid ∪ extra` fits.
    fn finish(&self, work: &FadlInstance, paid: &[Arc], labeling: Labeling, extra: Vec<Arc>) -> Solution {
        let mut full = labeling;
        // Vertices never reached by the work copy keep their original labels.
        for (v, l) in self.original.labeling.iter() {
            full.set(v, l);
        }
        debug_assert!(work.digraph.vertices().all(|v| full.contains(v)));
        let mut deleted_arcs: Vec<Arc> = paid.iter().copied().chain(extra).collect();
        deleted_arcs.sort_unstable();
        Solution {
            deleted_arcs,
            labeling: full,
        }
    }

    fn heuristic(work: &FadlInstance) -> Labeling {
        let d = &work.digraph;
        let mut l = work.labeling.clone();
        for v in d.vertices() {
            if !l.contains(v) {
                let label = if d.in_degree(v) <= d.out_degree(v) {
                    Label::Fork
                } else {
                    Label::Merge
                };
                l.set(v, label);
            }
        }
        l
    }

    fn search(&mut self, mut work: FadlInstance, mut paid: Vec<Arc>) -> Search {
        self.nodes += 1;
        if self.nodes > self.limit {
            return Search::OutOfNodes;
        }
        if !self.propagate(&mut work, &mut paid) {
            return Search::Exhausted;
        }
        if let Some(l) = has_labeling_extension(&work.digraph, &work.labeling) {
            return Search::Found(self.finish(&work, &paid, l, Vec::new()));
        }
        let guess = Self::heuristic(&work);
        let (c, arcs) = cost_for_labeling(&work.digraph, &guess).expect("complete");
        if c as i64 <= work.budget {
            return Search::Found(self.finish(&work, &paid, guess, arcs));
        }
        let d = &work.digraph;
        let pick = d
            .vertices()
            .filter(|&v| !work.labeling.contains(v))
            .max_by_key(|&v| (d.in_degree(v).min(d.out_degree(v)), core::cmp::Reverse(v)));
        let Some(v) = pick else {
            // Fully labeled: the heuristic evaluated the only completion.
            return Search::Exhausted;
        };
        let mut out_of_nodes = false;
        for label in [Label::Fork, Label::Merge] {
            let mut child = work.clone();
            child.labeling.set(v, label);
            match self.search(child, paid.clone()) {
                Search::Found(s) => return Search::Found(s),
                Search::OutOfNodes => out_of_nodes = true,
                Search::Exhausted => {}
            }
            if out_of_nodes {
                break;
            }
        }
        if out_of_nodes {
            Search::OutOfNodes
        } else {
            Search::Exhausted
        }
    }
}

/// Branch and bound over labels. Never answers wrongly: running out of nodes
/// yields [`SolveStatus::Unknown`].
pub fn solve_branch_and_bound(instance: &FadlInstance, options: &BnbOptions) -> SolveResult {
    let mut bnb = Bnb {
        original: instance,
        nodes: 0,
        limit: options.node_budget,
    };
    if instance.budget < 0 {
        return no(None, 0);
    }
    let budgets: Vec<i64> = if options.optimize {
        (0..=instance.budget).collect()
    } else {
        vec![instance.budget]
    };
    for kb in budgets {
        let mut work = instance.clone();
        work.budget = kb;
        match bnb.search(work, Vec::new()) {
            Search::Found(s) => {
                let opt = options.optimize.then_some(s.deleted_arcs.len());
                debug_assert!(s.deleted_arcs.len() as i64 <= kb);
                return yes(s.deleted_arcs, s.labeling, opt, bnb.nodes);
            }
            Search::OutOfNodes => {
                return SolveResult {
                    status: SolveStatus::Unknown,
                    optimum: None,
                    nodes: bnb.nodes,
                }
            }
            Search::Exhausted => {}
        }
    }
    no(None, bnb.nodes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::verify_solution;

    fn g(n: usize, arcs: &[(usize, usize)]) -> Digraph {
        Digraph::from_arcs(n, arcs.iter().copied()).unwrap().0
    }

    fn plain(d: Digraph, k: i64) -> FadlInstance {
        FadlInstance::new(d, Labeling::new(), k).unwrap()
    }

    fn sample() -> Digraph {
        g(9, &[(0, 2), (1, 2), (2, 3), (2, 4), (4, 5), (6, 5), (5, 7), (5, 8)])
    }

    fn cycle(n: usize) -> Digraph {
        g(n, &(0..n).map(|i| (i, (i + 1) % n)).collect::<Vec<_>>())
    }

    #[test]
    fn branching_examples() {
        let (s, b) = max_branching_size(&cycle(5));
        assert_eq!(s, 4);
        assert!(b.is_valid_in(&cycle(5)));
        let tree = g(4, &[(0, 1), (0, 2), (2, 3)]);
        assert_eq!(max_branching_size(&tree).0, 3);
        let (s, b) = max_branching_size(&g(3, &[(0, 2), (1, 2)]));
        assert_eq!(s, 1);
        assert_eq!(b.roots(&g(3, &[(0, 2), (1, 2)])).len(), 2);
    }

    #[test]
    fn cost_examples() {
        let d = g(2, &[(0, 1)]);
        let l: Labeling = [(VertexId(0), Label::Merge), (VertexId(1), Label::Fork)]
            .into_iter()
            .collect();
        assert_eq!(cost_for_labeling(&d, &l).unwrap().0, 1);
        let d = g(3, &[(0, 2), (1, 2)]);
        let all = Labeling::uniform(d.vertices(), Label::Fork);
        assert_eq!(cost_for_labeling(&d, &all).unwrap().0, 1);
        assert_eq!(
            cost_for_labeling(&d, &Labeling::new()),
            Err(SolverError::IncompleteLabeling(VertexId(0)))
        );
    }

    #[test]
    fn solver_examples() {
        for solve in [solve_bruteforce, solve_labelings] {
            let r = solve(&plain(g(3, &[(0, 1), (0, 2)]), 0));
            assert!(r.is_yes());
            assert!(r.solution().unwrap().deleted_arcs.is_empty());
            assert!(solve(&plain(cycle(4), 0)).is_no());
            let r = solve(&plain(cycle(4), 1));
            assert_eq!(r.solution().unwrap().deleted_arcs.len(), 1);
            assert!(solve(&plain(sample(), 1)).is_no());
            let i = plain(sample(), 2);
            let r = solve(&i);
            assert!(verify_solution(&i, r.solution().unwrap()));
            assert_eq!(r.optimum, Some(2));
        }
    }

    #[test]
    fn merge_fork_arc_costs_one() {
        let l: Labeling = [(VertexId(0), Label::Merge), (VertexId(1), Label::Fork)]
            .into_iter()
            .collect();
        let i = FadlInstance::new(g(2, &[(0, 1)]), l, 0).unwrap();
        assert!(solve_labelings(&i).is_no());
        assert!(solve_bruteforce(&i).is_no());
        assert!(solve_branch_and_bound(&i, &BnbOptions::default()).is_no());
    }

    #[test]
    fn bnb_examples() {
        let opts = BnbOptions {
            optimize: true,
            ..BnbOptions::default()
        };
        let i = plain(sample(), 3);
        let r = solve_branch_and_bound(&i, &opts);
        assert_eq!(r.optimum, Some(2));
        assert!(verify_solution(&i, r.solution().unwrap()));
        assert!(solve_branch_and_bound(&plain(sample(), 1), &opts).is_no());
        let tiny = BnbOptions {
            node_budget: 0,
            optimize: false,
        };
        assert_eq!(
            solve_branch_and_bound(&plain(cycle(4), 1), &tiny).status,
            SolveStatus::Unknown
        );
    }

    #[test]
    fn combinations_are_lexicographic() {
        let mut idx = vec![0, 1];
        let mut all = vec![idx.clone()];
        while next_combination(&mut idx, 4) {
            all.push(idx.clone());
        }
        assert_eq!(all.len(), 6);
        assert_eq!(all.last().unwrap(), &vec![2, 3]);
    }
}
