//! Exhaustive application of the reduction rules in priority order.
//!
//! The driver keeps one worklist of dirty sites per rule and always serves
//! the lowest non-empty one, so a rule only fires once every rule before it
//! is exhausted. A mutation marks the changed vertices dirty, and their
//! neighbours too when the label or a capped degree changed; the Rule 1 sum
//! is kept up to date incrementally.
//!
//! [`find_applicable`] is a separate full scan used to validate fixed points.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
use core::time::Duration;

use thiserror::Error;

use crate::digraph::{Arc, Digraph, VertexId};
use crate::funnel::{Label, Labeling};
use crate::instance::{from_fads, to_fads, FadlInstance, FadsInstance};
use crate::rules::{
    break_cycle_applies, dissolve_site, labeled_neighbor_choice, lower_bound_contribution, lower_bound_sum,
    remove_sink_applies, rule_break_cycle, rule_dissolve, rule_labeled_neighbor, rule_remove_arcs,
    rule_remove_sinks, rule_set_label, rule_shift_neighbor_arc, rule_shift_neighbors, set_label_choice, shift_site, RuleError, RuleId,
    RuleOutcome, Trace,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KernelOutcome {
    Kernel(FadlInstance),
    TrivialNo,
}

/// Applications per rule, indexed by priority.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RuleCounts(pub [u64; 8]);

impl RuleCounts {
    pub fn get(&self, rule: RuleId) -> u64 {
        self.0[rule.number() - 1]
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (RuleId, u64)> + '_ {
        RuleId::ALL.iter().map(|&r| (r, self.get(r)))
    }

    fn bump(&mut self, rule: RuleId) {
        self.0[rule.number() - 1] += 1;
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundCheck {
    pub name: &'static str,
    pub limit: u128,
    pub observed: u128,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SizeAudit {
    pub n: usize,
    pub m: usize,
    pub k: i64,
    pub both_degree_big: usize,
    pub unlabeled_count: usize,
    pub labeled_count: usize,
    pub checks: Vec<BoundCheck>,
}

impl SizeAudit {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelReport {
    pub outcome: KernelOutcome,
    pub rule_counts: RuleCounts,
    /// Absent for a trivial no.
    pub audit: Option<SizeAudit>,
    /// Filled in by callers that own a clock.
    pub elapsed: Option<Duration>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AuditError {
    #[error("rule {0} is still applicable")]
    NotFixedPoint(RuleId),
}

/// Where a rule is applied.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Site {
    Instance,
    Vertex(VertexId),
    Arc(Arc),
    Path(VertexId, VertexId, VertexId),
    Cycle(Vec<Arc>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Application {
    pub rule: RuleId,
    pub site: Site,
}

/// One driver step as seen by an observer. `after` is `None` when the step
/// refuted the instance.
pub struct Step<'a> {
    pub rule: RuleId,
    pub before: &'a FadlInstance,
    pub after: Option<&'a FadlInstance>,
    pub trace: Option<&'a Trace>,
}

/// Applies one rule at one site.
pub fn apply(instance: &mut FadlInstance, app: &Application) -> Result<RuleOutcome, RuleError> {
    use crate::rules::rule_lower_bound;
    match (&app.rule, &app.site) {
        (RuleId::LowerBound, _) => Ok(rule_lower_bound(instance)),
        (RuleId::SetLabel, Site::Vertex(v)) => rule_set_label(instance, *v),
        (RuleId::Dissolve, Site::Vertex(v)) => rule_dissolve(instance, *v),
        (RuleId::BreakCycle, Site::Cycle(c)) => rule_break_cycle(instance, c),
        (RuleId::ShiftNeighbors, Site::Path(u, v, w)) => rule_shift_neighbors(instance, (*u, *v, *w)),
        (RuleId::LabeledNeighbor, Site::Arc(a)) => rule_labeled_neighbor(instance, *a),
        (RuleId::RemoveArcs, Site::Arc(a)) => rule_remove_arcs(instance, *a),
        (RuleId::RemoveSinks, Site::Vertex(v)) => rule_remove_sinks(instance, *v),
        _ => Ok(RuleOutcome::Unchanged),
    }
}

/// Cycles made of vertices with exactly one arc in direction `incoming`,
/// found by colouring the functional graph of unique neighbours.
fn thin_cycles(d: &Digraph, incoming: bool) -> Vec<Vec<Arc>> {
    let next = |v: VertexId| -> Option<VertexId> {
        let ns = if incoming {
            d.in_neighbors(v)
        } else {
            d.out_neighbors(v)
        };
        (ns.len() == 1).then(|| ns[0])
    };
    let mut colour = vec![0u8; d.id_bound()];
    let mut cycles = Vec::new();
    for s in d.vertices() {
        let mut walk = Vec::new();
        let mut cur = Some(s);
        while let Some(v) = cur {
            if colour[v.0] != 0 {
                if colour[v.0] == 1 {
                    let start = walk.iter().position(|&x| x == v).unwrap();
                    let mut cyc: Vec<VertexId> = walk[start..].to_vec();
                    if incoming {
                        cyc.reverse();
                    }
                    let k = cyc.len();
                    cycles.push((0..k).map(|i| Arc::new(cyc[i], cyc[(i + 1) % k])).collect());
                }
                break;
            }
            colour[v.0] = 1;
            walk.push(v);
            cur = next(v);
        }
        for v in walk {
            colour[v.0] = 2;
        }
    }
    cycles
}

/// The first applicable rule and site by full scan, lowest rule first.
pub fn find_applicable(instance: &FadlInstance) -> Option<Application> {
    let d = &instance.digraph;
    let l = &instance.labeling;
    let k = instance.budget;
    let at = |rule, site| Some(Application { rule, site });
    if k < 0 || lower_bound_sum(instance) > 2 * k {
        return at(RuleId::LowerBound, Site::Instance);
    }
    for v in d.vertices() {
        if !l.contains(v) && set_label_choice(d, l, k, v).is_some() {
            return at(RuleId::SetLabel, Site::Vertex(v));
        }
    }
    for v in d.vertices() {
        if dissolve_site(d, l, v).is_some() {
            return at(RuleId::Dissolve, Site::Vertex(v));
        }
    }
    for incoming in [true, false] {
        for c in thin_cycles(d, incoming) {
            if break_cycle_applies(d, l, &c) {
                return at(RuleId::BreakCycle, Site::Cycle(c));
            }
        }
    }
    for v in d.vertices() {
        for &u in d.in_neighbors(v) {
            for &w in d.out_neighbors(v) {
                if shift_site(d, l, u, v, w).is_some() {
                    return at(RuleId::ShiftNeighbors, Site::Path(u, v, w));
                }
            }
        }
    }
    let arcs: Vec<Arc> = d.arcs().collect();
    for &a in &arcs {
        if !l.contains(a.tail) && !l.contains(a.head) && labeled_neighbor_choice(d, l, a.tail, a.head).is_some() {
            return at(RuleId::LabeledNeighbor, Site::Arc(a));
        }
    }
    for &a in &arcs {
        let pair = (l.get(a.tail), l.get(a.head));
        if matches!(
            pair,
            (Some(Label::Fork), Some(Label::Merge)) | (Some(Label::Merge), Some(Label::Fork))
        ) {
            return at(RuleId::RemoveArcs, Site::Arc(a));
        }
    }
    for v in d.vertices() {
        if remove_sink_applies(d, l, v) {
            return at(RuleId::RemoveSinks, Site::Vertex(v));
        }
    }
    None
}

pub fn is_fixed_point(instance: &FadlInstance) -> bool {
    find_applicable(instance).is_none()
}

/// Applies [`find_applicable`] until nothing fires. Quadratic per step; for
/// tests and cross-checks only.
pub fn kernelize_reference(instance: &FadlInstance) -> (KernelOutcome, RuleCounts) {
    let mut inst = instance.clone();
    let mut counts = RuleCounts::default();
    while let Some(app) = find_applicable(&inst) {
        counts.bump(app.rule);
        match apply(&mut inst, &app).expect("site from scan is valid") {
            RuleOutcome::TrivialNo => return (KernelOutcome::TrivialNo, counts),
            RuleOutcome::Changed(_) => {}
            RuleOutcome::Unchanged => unreachable!("scan reported an inapplicable site"),
        }
    }
    (KernelOutcome::Kernel(inst), counts)
}

/// Vertex worklists, by rule: SetLabel, Dissolve, BreakCycle,
/// ShiftNeighbors, LabeledNeighbor, RemoveSinks. RemoveArcs works on arcs.
const QUEUES: usize = 6;
const Q_SET: usize = 0;
const Q_SHIFT: usize = 3;
const DEAD: u8 = u8::MAX;

/// Serving order: vertex queue index, or `None` for the arc queue.
const ORDER: [(RuleId, Option<usize>); 7] = [
    (RuleId::SetLabel, Some(0)),
    (RuleId::Dissolve, Some(1)),
    (RuleId::BreakCycle, Some(2)),
    (RuleId::ShiftNeighbors, Some(3)),
    (RuleId::LabeledNeighbor, Some(4)),
    (RuleId::RemoveArcs, None),
    (RuleId::RemoveSinks, Some(5)),
];

struct Driver<'o> {
    inst: FadlInstance,
    queues: [VecDeque<VertexId>; QUEUES],
    queued: [Vec<bool>; QUEUES],
    arc_queue: VecDeque<Arc>,
    /// What neighbours can see of a vertex: label and degrees capped at 2.
    sig: Vec<u8>,
    contrib: Vec<i64>,
    lb: i64,
    stamp: Vec<u32>,
    epoch: u32,
    counts: RuleCounts,
    observer: Option<&'o mut dyn FnMut(&Step<'_>)>,
}

fn signature(d: &Digraph, l: &Labeling, v: VertexId) -> u8 {
    if !d.is_live(v) {
        return DEAD;
    }
    let label = match l.get(v) {
        None => 0,
        Some(Label::Fork) => 1,
        Some(Label::Merge) => 2,
    };
    label * 9 + d.in_degree(v).min(2) as u8 * 3 + d.out_degree(v).min(2) as u8
}

impl<'o> Driver<'o> {
    fn new(inst: FadlInstance, observer: Option<&'o mut dyn FnMut(&Step<'_>)>) -> Self {
        let n = inst.digraph.id_bound();
        let d = &inst.digraph;
        let l = &inst.labeling;
        let contrib: Vec<i64> = (0..n)
            .map(|i| {
                let v = VertexId(i);
                if d.is_live(v) {
                    lower_bound_contribution(d, l, v)
                } else {
                    0
                }
            })
            .collect();
        let lb = contrib.iter().sum();
        let sig = (0..n).map(|i| signature(d, l, VertexId(i))).collect();
        let arc_queue = d.arcs().filter(|a| l.contains(a.tail) && l.contains(a.head)).collect();
        let mut driver = Driver {
            queues: Default::default(),
            queued: core::array::from_fn(|_| vec![false; n]),
            arc_queue,
            sig,
            contrib,
            lb,
            stamp: vec![0; n],
            epoch: 0,
            counts: RuleCounts::default(),
            observer,
            inst,
        };
        let all: Vec<VertexId> = driver.inst.digraph.vertices().collect();
        for q in 0..QUEUES {
            for &v in &all {
                driver.push(q, v);
            }
        }
        driver
    }

    fn push(&mut self, q: usize, v: VertexId) {
        if !self.queued[q][v.0] {
            self.queued[q][v.0] = true;
            self.queues[q].push_back(v);
        }
    }

    fn push_all(&mut self, v: VertexId) {
        for q in 0..QUEUES {
            self.push(q, v);
        }
    }

    fn push_arc_if_labeled(&mut self, a: Arc) {
        let l = &self.inst.labeling;
        if l.contains(a.tail) && l.contains(a.head) {
            self.arc_queue.push_back(a);
        }
    }

    /// Requeues every site a mutation may have made applicable. A vertex is
    /// rechecked when its own arcs or label changed; its neighbours only when
    /// its signature changed, since no rule reads more of a neighbour. Rule 5
    /// also reads whether `u → x` exists for the middle vertex `v` of a path
    /// `u → v → x`, so a removed arc requeues the common neighbours.
    fn absorb(&mut self, t: &Trace) {
        let touched = t.touched();
        for &v in &touched {
            let d = &self.inst.digraph;
            let l = &self.inst.labeling;
            let c = if d.is_live(v) {
                lower_bound_contribution(d, l, v)
            } else {
                0
            };
            self.lb += c - self.contrib[v.0];
            self.contrib[v.0] = c;
            let s = signature(d, l, v);
            if s == DEAD {
                self.sig[v.0] = s;
                continue;
            }
            let spread = s != self.sig[v.0];
            self.sig[v.0] = s;
            self.push_all(v);
            if spread {
                let d = &self.inst.digraph;
                let ns: Vec<VertexId> = d.out_neighbors(v).iter().chain(d.in_neighbors(v)).copied().collect();
                for x in ns {
                    self.push_all(x);
                }
            }
        }
        for a in &t.removed_arcs {
            let d = &self.inst.digraph;
            if !d.is_live(a.tail) || !d.is_live(a.head) {
                continue;
            }
            let (outs, ins) = (d.out_neighbors(a.tail), d.in_neighbors(a.head));
            let common: Vec<VertexId> = if outs.len() <= ins.len() {
                outs.iter().copied().filter(|x| ins.binary_search(x).is_ok()).collect()
            } else {
                ins.iter().copied().filter(|x| outs.binary_search(x).is_ok()).collect()
            };
            for x in common {
                self.push(Q_SHIFT, x);
            }
        }
        for &a in &t.added_arcs {
            self.push_arc_if_labeled(a);
        }
        for &(v, _) in &t.labeled {
            let d = &self.inst.digraph;
            let arcs: Vec<Arc> = d
                .out_neighbors(v)
                .iter()
                .map(|&x| Arc::new(v, x))
                .chain(d.in_neighbors(v).iter().map(|&x| Arc::new(x, v)))
                .collect();
            for a in arcs {
                self.push_arc_if_labeled(a);
            }
        }
        if t.budget_delta != 0 {
            let unlabeled: Vec<VertexId> = self
                .inst
                .digraph
                .vertices()
                .filter(|&v| !self.inst.labeling.contains(v))
                .collect();
            for v in unlabeled {
                self.push(Q_SET, v);
            }
        }
    }

    /// Walks unique predecessors (or successors) from `y`; the cycle through
    /// `y` if the walk returns to it.
    fn thin_cycle_through(&mut self, y: VertexId, incoming: bool) -> Option<Vec<Arc>> {
        self.epoch += 1;
        let d = &self.inst.digraph;
        let step = |v: VertexId| {
            let ns = if incoming {
                d.in_neighbors(v)
            } else {
                d.out_neighbors(v)
            };
            (ns.len() == 1).then(|| ns[0])
        };
        let mut seq = vec![y];
        self.stamp[y.0] = self.epoch;
        let mut cur = y;
        loop {
            let nxt = step(cur)?;
            if nxt == y {
                break;
            }
            if self.stamp[nxt.0] == self.epoch {
                return None;
            }
            self.stamp[nxt.0] = self.epoch;
            seq.push(nxt);
            cur = nxt;
        }
        if incoming {
            seq.reverse();
        }
        let k = seq.len();
        Some((0..k).map(|i| Arc::new(seq[i], seq[(i + 1) % k])).collect())
    }

    /// A Rule 5 path with middle vertex `v` and the arcs it can move, in
    /// the order the single-step rule would pick them.
    fn shift_batch_at(&self, v: VertexId) -> Option<((VertexId, VertexId, VertexId), Vec<VertexId>)> {
        let d = &self.inst.digraph;
        let l = &self.inst.labeling;
        if d.in_degree(v) == 1 {
            let u = d.in_neighbors(v)[0];
            if d.in_degree(u) == 1 && !l.is(u, Label::Merge) && !l.is(v, Label::Merge) {
                for &w in d.out_neighbors(v) {
                    if w == u || d.in_degree(w) != 1 {
                        continue;
                    }
                    let xs: Vec<VertexId> = d
                        .out_neighbors(v)
                        .iter()
                        .copied()
                        .filter(|&x| x != u && x != w && !d.has_arc(u, x))
                        .collect();
                    if !xs.is_empty() {
                        return Some(((u, v, w), xs));
                    }
                }
            }
        }
        if d.out_degree(v) == 1 {
            let w = d.out_neighbors(v)[0];
            if d.out_degree(w) == 1 && !l.is(v, Label::Fork) && !l.is(w, Label::Fork) {
                for &u in d.in_neighbors(v) {
                    if u == w || d.out_degree(u) != 1 {
                        continue;
                    }
                    let xs: Vec<VertexId> = d
                        .in_neighbors(v)
                        .iter()
                        .copied()
                        .filter(|&x| x != u && x != w && !d.has_arc(x, w))
                        .collect();
                    if !xs.is_empty() {
                        return Some(((u, v, w), xs));
                    }
                }
            }
        }
        None
    }

    /// An arc at `y` where Rule 6 fires. Only arcs between unlabeled vertices
    /// with matching unit degrees qualify, so most vertices are rejected
    /// without scanning.
    fn labeled_neighbor_arc(&self, y: VertexId) -> Option<Arc> {
        let d = &self.inst.digraph;
        let l = &self.inst.labeling;
        if l.contains(y) {
            return None;
        }
        let free = |x: VertexId| !l.contains(x);
        let any_merge_out = |x: VertexId| d.out_neighbors(x).iter().any(|&z| l.is(z, Label::Merge));
        let any_fork_in = |x: VertexId| d.in_neighbors(x).iter().any(|&z| l.is(z, Label::Fork));
        // y as the tail v of (v, u).
        if d.in_degree(y) == 1 && any_merge_out(y) {
            if let Some(&u) = d.out_neighbors(y).iter().find(|&&u| free(u) && d.in_degree(u) == 1) {
                return Some(Arc::new(y, u));
            }
        }
        if d.out_degree(y) == 1 {
            let u = d.out_neighbors(y)[0];
            if free(u) && d.out_degree(u) == 1 && any_fork_in(u) {
                return Some(Arc::new(y, u));
            }
        }
        // y as the head u of (v, u).
        if d.in_degree(y) == 1 {
            let v = d.in_neighbors(y)[0];
            if free(v) && d.in_degree(v) == 1 && any_merge_out(v) {
                return Some(Arc::new(v, y));
            }
        }
        if d.out_degree(y) == 1 && any_fork_in(y) {
            if let Some(&v) = d.in_neighbors(y).iter().find(|&&v| free(v) && d.out_degree(v) == 1) {
                return Some(Arc::new(v, y));
            }
        }
        None
    }

    /// Looks for a site of `rule` anchored at `y` and applies it.
    fn try_at(&mut self, rule: RuleId, y: VertexId) -> Result<RuleOutcome, RuleError> {
        let inst = &mut self.inst;
        match rule {
            RuleId::SetLabel if !inst.labeling.contains(y) => rule_set_label(inst, y),
            RuleId::Dissolve => rule_dissolve(inst, y),
            RuleId::BreakCycle => {
                for incoming in [true, false] {
                    if let Some(c) = self.thin_cycle_through(y, incoming) {
                        let out = rule_break_cycle(&mut self.inst, &c)?;
                        if !out.is_unchanged() {
                            return Ok(out);
                        }
                    }
                }
                Ok(RuleOutcome::Unchanged)
            }
            RuleId::LabeledNeighbor => match self.labeled_neighbor_arc(y) {
                Some(a) => rule_labeled_neighbor(&mut self.inst, a),
                None => Ok(RuleOutcome::Unchanged),
            },
            RuleId::RemoveSinks => rule_remove_sinks(inst, y),
            _ => Ok(RuleOutcome::Unchanged),
        }
    }

    fn notify(&mut self, rule: RuleId, before: Option<&FadlInstance>, trace: Option<&Trace>, refuted: bool) {
        if let (Some(obs), Some(before)) = (self.observer.as_mut(), before) {
            obs(&Step {
                rule,
                before,
                after: (!refuted).then_some(&self.inst),
                trace,
            });
        }
    }

    fn snapshot(&self) -> Option<FadlInstance> {
        self.observer.is_some().then(|| self.inst.clone())
    }

    /// Records one rule application.
    fn commit(&mut self, rule: RuleId, before: Option<FadlInstance>, outcome: RuleOutcome) -> bool {
        match outcome {
            RuleOutcome::Unchanged => false,
            RuleOutcome::TrivialNo => unreachable!("budget checked before every step"),
            RuleOutcome::Changed(t) => {
                self.counts.bump(rule);
                self.absorb(&t);
                self.notify(rule, before.as_ref(), Some(&t), false);
                true
            }
        }
    }

    /// Rule 5 at `v`: every arc the path allows is moved, one single-step
    /// application at a time. The moves neither change the Rule 1 sum nor
    /// spoil the path, so no other rule is served in between.
    fn shift_at(&mut self, v: VertexId) {
        let Some((path, xs)) = self.shift_batch_at(v) else {
            return;
        };
        let lb = self.lb;
        for x in xs {
            let before = self.snapshot();
            let out = rule_shift_neighbor_arc(&mut self.inst, path, x).expect("batch vertices are live");
            debug_assert!(!out.is_unchanged());
            self.commit(RuleId::ShiftNeighbors, before, out);
        }
        debug_assert_eq!(self.lb, lb);
    }

    fn run(mut self) -> (KernelOutcome, RuleCounts) {
        loop {
            if self.inst.budget < 0 || self.lb > 2 * self.inst.budget {
                debug_assert_eq!(self.lb, lower_bound_sum(&self.inst));
                self.counts.bump(RuleId::LowerBound);
                let before = self.snapshot();
                self.notify(RuleId::LowerBound, before.as_ref(), None, true);
                return (KernelOutcome::TrivialNo, self.counts);
            }
            let Some(&(rule, slot)) = ORDER.iter().find(|(_, slot)| match slot {
                Some(q) => !self.queues[*q].is_empty(),
                None => !self.arc_queue.is_empty(),
            }) else {
                break;
            };
            let Some(q) = slot else {
                let a = self.arc_queue.pop_front().unwrap();
                if self.inst.digraph.has_arc(a.tail, a.head) {
                    let before = self.snapshot();
                    let out = rule_remove_arcs(&mut self.inst, a).expect("queued arcs join labeled vertices");
                    self.commit(rule, before, out);
                }
                continue;
            };
            let y = self.queues[q].pop_front().unwrap();
            self.queued[q][y.0] = false;
            if !self.inst.digraph.is_live(y) {
                continue;
            }
            if rule == RuleId::ShiftNeighbors {
                self.shift_at(y);
                continue;
            }
            let before = self.snapshot();
            let out = self.try_at(rule, y).expect("driver sites satisfy rule preconditions");
            if self.commit(rule, before, out) && self.inst.digraph.is_live(y) {
                self.push(q, y);
            }
        }
        (KernelOutcome::Kernel(self.inst), self.counts)
    }
}

fn report(outcome: KernelOutcome, rule_counts: RuleCounts) -> KernelReport {
    let audit = match &outcome {
        KernelOutcome::Kernel(k) => Some(size_audit(k).expect("driver reached a fixed point")),
        KernelOutcome::TrivialNo => None,
    };
    KernelReport {
        outcome,
        rule_counts,
        audit,
        elapsed: None,
    }
}

/// Applies the rules to a fixed point.
pub fn kernelize(instance: &FadlInstance) -> KernelReport {
    let (outcome, counts) = Driver::new(instance.clone(), None).run();
    report(outcome, counts)
}

/// [`kernelize`], calling `observer` after every rule application.
pub fn kernelize_with_observer(instance: &FadlInstance, observer: &mut dyn FnMut(&Step<'_>)) -> KernelReport {
    let (outcome, counts) = Driver::new(instance.clone(), Some(observer)).run();
    report(outcome, counts)
}

/// `p fads 5 4 0` with one centre of in- and out-degree two.
pub fn canonical_no_instance() -> FadsInstance {
    let d = Digraph::from_arcs_strict(5, [(1, 0), (2, 0), (0, 3), (0, 4)]).unwrap();
    FadsInstance::new(d, 0)
}

/// Unlabeled pipeline: label-free view, kernelize, re-encode the labels.
pub fn kernelize_fads(instance: &FadsInstance) -> (FadsInstance, KernelReport) {
    let rep = kernelize(&from_fads(instance));
    let out = match &rep.outcome {
        KernelOutcome::Kernel(k) => to_fads(&k.compacted()).expect("kernel budget is non-negative"),
        KernelOutcome::TrivialNo => canonical_no_instance(),
    };
    (out, rep)
}

fn check(name: &'static str, limit: u128, observed: u128) -> BoundCheck {
    BoundCheck {
        name,
        limit,
        observed,
        pass: observed <= limit,
    }
}

/// Evaluates the explicit size bounds on a fixed point.
pub fn size_audit(instance: &FadlInstance) -> Result<SizeAudit, AuditError> {
    if let Some(app) = find_applicable(instance) {
        return Err(AuditError::NotFixedPoint(app.rule));
    }
    let d = &instance.digraph;
    let l: &Labeling = &instance.labeling;
    let k = instance.budget.max(0) as u128;
    let mut both = 0usize;
    let mut heavy_labeled = 0u128;
    let (mut max_in, mut max_out, mut thin) = (0u128, 0u128, 0u128);
    for v in d.vertices() {
        let (i, o) = (d.in_degree(v), d.out_degree(v));
        if i > 1 && o > 1 {
            both += 1;
        }
        match l.get(v) {
            Some(Label::Fork) if i > 1 => heavy_labeled += 1,
            Some(Label::Merge) if o > 1 => heavy_labeled += 1,
            Some(_) => {}
            None => {
                max_in = max_in.max(i as u128);
                max_out = max_out.max(o as u128);
                if i.min(o) <= 1 {
                    thin += 1;
                }
            }
        }
    }
    let checks = vec![
        check("both_degree_big <= 2k", 2 * k, both as u128),
        check("heavy labeled <= 2k", 2 * k, heavy_labeled),
        check("unlabeled in-degree <= k+1", k + 1, max_in),
        check("unlabeled out-degree <= k+1", k + 1, max_out),
        check(
            "unlabeled thin <= (5k^2+5k)(k^3+3k^2+2k)",
            (5 * k * k + 5 * k) * (k * k * k + 3 * k * k + 2 * k),
            thin,
        ),
    ];
    Ok(SizeAudit {
        n: d.vertex_count(),
        m: d.arc_count(),
        k: instance.budget,
        both_degree_big: both,
        unlabeled_count: instance.unlabeled_count(),
        labeled_count: l.len(),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::gen_forbidden;

    fn g(n: usize, arcs: &[(usize, usize)]) -> Digraph {
        Digraph::from_arcs(n, arcs.iter().copied()).unwrap().0
    }

    fn plain(d: Digraph, k: i64) -> FadlInstance {
        FadlInstance::new(d, Labeling::new(), k).unwrap()
    }

    #[test]
    fn funnel_reduces_to_nothing() {
        let d = g(5, &[(0, 1), (0, 2), (1, 3), (2, 3), (3, 4)]);
        let rep = kernelize(&plain(d, 0));
        let KernelOutcome::Kernel(k) = rep.outcome else { panic!() };
        assert_eq!(k.digraph.vertex_count(), 0);
        assert!(rep.audit.unwrap().all_pass());
    }

    #[test]
    fn rule_one_refutes_centre() {
        let (out, rep) = kernelize_fads(&FadsInstance::new(g(5, &[(1, 0), (2, 0), (0, 3), (0, 4)]), 0));
        assert_eq!(rep.outcome, KernelOutcome::TrivialNo);
        assert_eq!(rep.rule_counts.get(RuleId::LowerBound), 1);
        assert_eq!(out, canonical_no_instance());
    }

    #[test]
    fn kernel_is_fixed_point_and_idempotent() {
        let sample = g(9, &[(0, 2), (1, 2), (2, 3), (2, 4), (4, 5), (6, 5), (5, 7), (5, 8)]);
        for k in 0..4 {
            let rep = kernelize(&plain(sample.clone(), k));
            if let KernelOutcome::Kernel(inst) = &rep.outcome {
                assert!(is_fixed_point(inst));
                let again = kernelize(inst);
                assert_eq!(again.outcome, rep.outcome);
                assert_eq!(again.rule_counts.total(), 0);
            }
        }
    }

    #[test]
    fn reference_stepper_agrees_on_forbidden_graphs() {
        for k in 0..6 {
            let i = plain(gen_forbidden(k), 1);
            let (outcome, _) = kernelize_reference(&i);
            let rep = kernelize(&i);
            assert_eq!(
                matches!(outcome, KernelOutcome::TrivialNo),
                matches!(rep.outcome, KernelOutcome::TrivialNo)
            );
        }
    }

    #[test]
    fn audit_rejects_non_fixed_points() {
        let i = plain(g(3, &[(0, 1), (1, 2)]), 0);
        assert_eq!(size_audit(&i), Err(AuditError::NotFixedPoint(RuleId::SetLabel)));
    }

    #[test]
    fn thin_cycles_found_both_ways() {
        let d = g(4, &[(0, 1), (1, 2), (2, 0), (3, 0)]);
        assert_eq!(thin_cycles(&d, true).len(), 0);
        assert_eq!(thin_cycles(&d, false).len(), 1);
        assert_eq!(thin_cycles(&d, false)[0][0], Arc::new(0, 1));
    }
}
