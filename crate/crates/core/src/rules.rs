//! The eight reduction rules for labeled funnel arc deletion.
//!
//! Each rule takes a candidate site, checks its condition and, when it holds,
//! mutates the instance in place and reports what changed. A rule never
//! relabels a labeled vertex and never creates a loop or a parallel arc.
//! Every rule short-circuits to [`RuleOutcome::TrivialNo`] on a negative
//! budget.
//!
//! The rules are only claimed safe when applied in priority order, i.e. rule
//! `r` fires only on instances where rules `1..r` are not applicable.

use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::digraph::{Arc, Digraph, VertexId};
use crate::funnel::{Label, Labeling};
use crate::instance::FadlInstance;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleId {
    LowerBound,
    SetLabel,
    Dissolve,
    BreakCycle,
    ShiftNeighbors,
    LabeledNeighbor,
    RemoveArcs,
    RemoveSinks,
}

impl RuleId {
    pub const ALL: [RuleId; 8] = [
        RuleId::LowerBound,
        RuleId::SetLabel,
        RuleId::Dissolve,
        RuleId::BreakCycle,
        RuleId::ShiftNeighbors,
        RuleId::LabeledNeighbor,
        RuleId::RemoveArcs,
        RuleId::RemoveSinks,
    ];

    /// 1-based position in the priority order.
    pub fn number(self) -> usize {
        self as usize + 1
    }

    pub fn name(self) -> &'static str {
        match self {
            RuleId::LowerBound => "LowerBound",
            RuleId::SetLabel => "SetLabel",
            RuleId::Dissolve => "Dissolve",
            RuleId::BreakCycle => "BreakCycle",
            RuleId::ShiftNeighbors => "ShiftNeighbors",
            RuleId::LabeledNeighbor => "LabeledNeighbor",
            RuleId::RemoveArcs => "RemoveArcs",
            RuleId::RemoveSinks => "RemoveSinks",
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// What a rule application changed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub rule: RuleId,
    pub removed_arcs: Vec<Arc>,
    pub added_arcs: Vec<Arc>,
    pub removed_vertices: Vec<VertexId>,
    pub labeled: Vec<(VertexId, Label)>,
    pub budget_delta: i64,
}

impl Trace {
    fn new(rule: RuleId) -> Self {
        Trace {
            rule,
            removed_arcs: Vec::new(),
            added_arcs: Vec::new(),
            removed_vertices: Vec::new(),
            labeled: Vec::new(),
            budget_delta: 0,
        }
    }

    /// Every vertex whose degree, label or existence changed.
    pub fn touched(&self) -> Vec<VertexId> {
        let mut vs: Vec<VertexId> = Vec::new();
        for a in self.removed_arcs.iter().chain(&self.added_arcs) {
            vs.push(a.tail);
            vs.push(a.head);
        }
        vs.extend(&self.removed_vertices);
        vs.extend(self.labeled.iter().map(|&(v, _)| v));
        vs.sort_unstable();
        vs.dedup();
        vs
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RuleOutcome {
    Unchanged,
    Changed(Trace),
    TrivialNo,
}

impl RuleOutcome {
    pub fn is_unchanged(&self) -> bool {
        matches!(self, RuleOutcome::Unchanged)
    }
}

/// Precondition violations; these indicate a bug in the caller.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("vertex {0} is already labeled")]
    AlreadyLabeled(VertexId),
    #[error("vertex {0} is not labeled")]
    Unlabeled(VertexId),
    #[error("vertex {0} is not in the digraph")]
    DeadVertex(VertexId),
    #[error("arc {0} is not in the digraph")]
    MissingArc(Arc),
    #[error("arc sequence is not a directed cycle")]
    NotACycle,
}

/// Vertex classes by degree.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DegreeCensus {
    /// In-degree greater than one.
    pub in_heavy: Vec<VertexId>,
    /// Out-degree greater than one.
    pub out_heavy: Vec<VertexId>,
    /// Both.
    pub both_heavy: Vec<VertexId>,
}

impl DegreeCensus {
    pub fn of(d: &Digraph) -> Self {
        let mut c = DegreeCensus::default();
        for v in d.vertices() {
            let (i, o) = (d.in_degree(v) > 1, d.out_degree(v) > 1);
            if i {
                c.in_heavy.push(v);
            }
            if o {
                c.out_heavy.push(v);
            }
            if i && o {
                c.both_heavy.push(v);
            }
        }
        c
    }
}

/// Contribution of `v` to the LowerBound sum.
pub fn lower_bound_contribution(d: &Digraph, labeling: &Labeling, v: VertexId) -> i64 {
    let (i, o) = (d.in_degree(v) as i64, d.out_degree(v) as i64);
    match labeling.get(v) {
        Some(Label::Merge) if o > 1 => o - 1,
        Some(Label::Fork) if i > 1 => i - 1,
        None if i > 1 && o > 1 => i.min(o) - 1,
        _ => 0,
    }
}

pub fn lower_bound_sum(instance: &FadlInstance) -> i64 {
    instance
        .digraph
        .vertices()
        .map(|v| lower_bound_contribution(&instance.digraph, &instance.labeling, v))
        .sum()
}

/// Rule 1: refute when the degree excess exceeds `2k`.
pub fn rule_lower_bound(instance: &FadlInstance) -> RuleOutcome {
    if instance.budget < 0 || lower_bound_sum(instance) > 2 * instance.budget {
        RuleOutcome::TrivialNo
    } else {
        RuleOutcome::Unchanged
    }
}

/// The label Rule 2 would assign to the unlabeled vertex `v`, Fork checked
/// first.
pub fn set_label_choice(d: &Digraph, labeling: &Labeling, budget: i64, v: VertexId) -> Option<Label> {
    let (ins, outs) = (d.in_neighbors(v), d.out_neighbors(v));
    let fork = ins.is_empty()
        || (ins.len() == 1 && labeling.is(ins[0], Label::Fork))
        || outs
            .iter()
            .filter(|&&u| match labeling.get(u) {
                Some(Label::Merge) => true,
                Some(Label::Fork) => d.in_degree(u) == 1,
                None => false,
            })
            .count()
            > ins.len()
        || outs.len() as i64 > budget + 1;
    if fork {
        return Some(Label::Fork);
    }
    let merge = outs.is_empty()
        || (outs.len() == 1 && labeling.is(outs[0], Label::Merge))
        || ins
            .iter()
            .filter(|&&u| match labeling.get(u) {
                Some(Label::Fork) => true,
                Some(Label::Merge) => d.out_degree(u) == 1,
                None => false,
            })
            .count()
            > outs.len()
        || ins.len() as i64 > budget + 1;
    merge.then_some(Label::Merge)
}

fn require_live(d: &Digraph, v: VertexId) -> Result<(), RuleError> {
    if d.is_live(v) {
        Ok(())
    } else {
        Err(RuleError::DeadVertex(v))
    }
}

/// Rule 2 on the unlabeled vertex `v`.
pub fn rule_set_label(instance: &mut FadlInstance, v: VertexId) -> Result<RuleOutcome, RuleError> {
    require_live(&instance.digraph, v)?;
    if instance.labeling.contains(v) {
        return Err(RuleError::AlreadyLabeled(v));
    }
    if instance.budget < 0 {
        return Ok(RuleOutcome::TrivialNo);
    }
    Ok(
        match set_label_choice(&instance.digraph, &instance.labeling, instance.budget, v) {
            Some(label) => {
                instance.labeling.set(v, label);
                let mut t = Trace::new(RuleId::SetLabel);
                t.labeled.push((v, label));
                RuleOutcome::Changed(t)
            }
            None => RuleOutcome::Unchanged,
        },
    )
}

/// The `(u, w)` pair Rule 3 would join when dissolving `v`.
pub fn dissolve_site(d: &Digraph, labeling: &Labeling, v: VertexId) -> Option<(VertexId, VertexId)> {
    if !d.is_live(v) || d.in_degree(v) != 1 || d.out_degree(v) != 1 {
        return None;
    }
    let (u, w) = (d.in_neighbors(v)[0], d.out_neighbors(v)[0]);
    if u == w || !(d.in_degree(w) == 1 || d.out_degree(u) == 1) {
        return None;
    }
    let compatible = |a: VertexId| match (labeling.get(v), labeling.get(a)) {
        (Some(x), Some(y)) => x == y,
        _ => true,
    };
    // Dropping a labeled v must not drop its constraint: a Fork v needs its
    // tail labeled (hence Fork), a Merge v its head labeled (hence Merge).
    let anchored = match labeling.get(v) {
        None => true,
        Some(Label::Fork) => labeling.contains(u),
        Some(Label::Merge) => labeling.contains(w),
    };
    (anchored && compatible(u) && compatible(w)).then_some((u, w))
}

/// Rule 3: replace `u → v → w` by `u → w`.
pub fn rule_dissolve(instance: &mut FadlInstance, v: VertexId) -> Result<RuleOutcome, RuleError> {
    require_live(&instance.digraph, v)?;
    if instance.budget < 0 {
        return Ok(RuleOutcome::TrivialNo);
    }
    let Some((u, w)) = dissolve_site(&instance.digraph, &instance.labeling, v) else {
        return Ok(RuleOutcome::Unchanged);
    };
    // (u,w) present would give w in-degree 2 and u out-degree 2.
    debug_assert!(!instance.digraph.has_arc(u, w));
    let d = &mut instance.digraph;
    d.remove_vertex(v).expect("live vertex");
    d.add_arc(u, w).expect("dissolve arc is fresh");
    instance.labeling.unset(v);
    let mut t = Trace::new(RuleId::Dissolve);
    t.removed_arcs.push(Arc::new(u, v));
    t.removed_arcs.push(Arc::new(v, w));
    t.removed_vertices.push(v);
    t.added_arcs.push(Arc::new(u, w));
    Ok(RuleOutcome::Changed(t))
}

fn validate_cycle(d: &Digraph, cycle: &[Arc]) -> Result<(), RuleError> {
    if cycle.is_empty() {
        return Err(RuleError::NotACycle);
    }
    for (i, a) in cycle.iter().enumerate() {
        if !d.has_arc(a.tail, a.head) {
            return Err(RuleError::MissingArc(*a));
        }
        if cycle[(i + 1) % cycle.len()].tail != a.head {
            return Err(RuleError::NotACycle);
        }
    }
    let mut vs: Vec<VertexId> = cycle.iter().map(|a| a.tail).collect();
    vs.sort_unstable();
    vs.dedup();
    if vs.len() != cycle.len() {
        return Err(RuleError::NotACycle);
    }
    Ok(())
}

/// Whether Rule 4's condition holds on a validated cycle.
pub fn break_cycle_applies(d: &Digraph, labeling: &Labeling, cycle: &[Arc]) -> bool {
    let uniform = |label: Label| {
        cycle.iter().all(|a| labeling.get(a.tail).is_none())
            || cycle.iter().all(|a| labeling.is(a.tail, label))
    };
    let in_one = cycle.iter().all(|a| d.in_degree(a.tail) == 1);
    let out_one = cycle.iter().all(|a| d.out_degree(a.tail) == 1);
    (in_one && uniform(Label::Fork)) || (out_one && uniform(Label::Merge))
}

/// Rule 4: delete the smallest arc of an isolated cycle and pay for it.
pub fn rule_break_cycle(instance: &mut FadlInstance, cycle: &[Arc]) -> Result<RuleOutcome, RuleError> {
    validate_cycle(&instance.digraph, cycle)?;
    if instance.budget < 0 {
        return Ok(RuleOutcome::TrivialNo);
    }
    if !break_cycle_applies(&instance.digraph, &instance.labeling, cycle) {
        return Ok(RuleOutcome::Unchanged);
    }
    let victim = *cycle.iter().min().unwrap();
    instance.digraph.remove_arc(victim.tail, victim.head).unwrap();
    instance.budget -= 1;
    let mut t = Trace::new(RuleId::BreakCycle);
    t.removed_arcs.push(victim);
    t.budget_delta = -1;
    Ok(RuleOutcome::Changed(t))
}

/// Which arcs of `v` Rule 5 moves on the path `u, v, w`: out-arcs up to `u`
/// (case 1) or in-arcs down to `w` (case 2).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShiftSide {
    Out,
    In,
}

/// Whether the degree and label conditions of Rule 5 hold for `side` on the
/// path `u, v, w`, ignoring the choice of the moved arc.
pub fn shift_path_ok(d: &Digraph, labeling: &Labeling, (u, v, w): (VertexId, VertexId, VertexId), side: ShiftSide) -> bool {
    if u == v || v == w || u == w || !d.has_arc(u, v) || !d.has_arc(v, w) {
        return false;
    }
    match side {
        ShiftSide::Out => {
            [u, v, w].iter().all(|&x| d.in_degree(x) == 1)
                && !labeling.is(u, Label::Merge)
                && !labeling.is(v, Label::Merge)
        }
        ShiftSide::In => {
            [u, v, w].iter().all(|&x| d.out_degree(x) == 1)
                && !labeling.is(v, Label::Fork)
                && !labeling.is(w, Label::Fork)
        }
    }
}

/// The move `(old, new)` of the arc between `v` and `x`, if Rule 5 allows it.
pub fn shift_move(
    d: &Digraph,
    labeling: &Labeling,
    (u, v, w): (VertexId, VertexId, VertexId),
    x: VertexId,
) -> Option<(Arc, Arc)> {
    if x == u || x == w {
        return None;
    }
    if d.has_arc(v, x) && !d.has_arc(u, x) && shift_path_ok(d, labeling, (u, v, w), ShiftSide::Out) {
        return Some((Arc::new(v, x), Arc::new(u, x)));
    }
    if d.has_arc(x, v) && !d.has_arc(x, w) && shift_path_ok(d, labeling, (u, v, w), ShiftSide::In) {
        return Some((Arc::new(x, v), Arc::new(x, w)));
    }
    None
}

/// The concrete arc move Rule 5 would perform on the path `u, v, w`:
/// `(old, new)` for the smallest eligible `x`, case 1 first.
pub fn shift_site(
    d: &Digraph,
    labeling: &Labeling,
    u: VertexId,
    v: VertexId,
    w: VertexId,
) -> Option<(Arc, Arc)> {
    if shift_path_ok(d, labeling, (u, v, w), ShiftSide::Out) {
        let x = d
            .out_neighbors(v)
            .iter()
            .copied()
            .find(|&x| x != w && x != u && !d.has_arc(u, x));
        if let Some(x) = x {
            return Some((Arc::new(v, x), Arc::new(u, x)));
        }
    }
    if shift_path_ok(d, labeling, (u, v, w), ShiftSide::In) {
        let x = d
            .in_neighbors(v)
            .iter()
            .copied()
            .find(|&x| x != u && x != w && !d.has_arc(x, w));
        if let Some(x) = x {
            return Some((Arc::new(x, v), Arc::new(x, w)));
        }
    }
    None
}

fn apply_shift(instance: &mut FadlInstance, (old, new): (Arc, Arc)) -> RuleOutcome {
    let d = &mut instance.digraph;
    d.remove_arc(old.tail, old.head).unwrap();
    d.add_arc(new.tail, new.head).expect("shifted arc is fresh");
    let mut t = Trace::new(RuleId::ShiftNeighbors);
    t.removed_arcs.push(old);
    t.added_arcs.push(new);
    RuleOutcome::Changed(t)
}

/// Rule 5 on the path `u, v, w`.
pub fn rule_shift_neighbors(
    instance: &mut FadlInstance,
    (u, v, w): (VertexId, VertexId, VertexId),
) -> Result<RuleOutcome, RuleError> {
    for x in [u, v, w] {
        require_live(&instance.digraph, x)?;
    }
    if instance.budget < 0 {
        return Ok(RuleOutcome::TrivialNo);
    }
    Ok(match shift_site(&instance.digraph, &instance.labeling, u, v, w) {
        Some(mv) => apply_shift(instance, mv),
        None => RuleOutcome::Unchanged,
    })
}

/// Rule 5 on the path `u, v, w` moving the arc between `v` and a chosen `x`.
pub fn rule_shift_neighbor_arc(
    instance: &mut FadlInstance,
    path: (VertexId, VertexId, VertexId),
    x: VertexId,
) -> Result<RuleOutcome, RuleError> {
    for y in [path.0, path.1, path.2, x] {
        require_live(&instance.digraph, y)?;
    }
    if instance.budget < 0 {
        return Ok(RuleOutcome::TrivialNo);
    }
    Ok(match shift_move(&instance.digraph, &instance.labeling, path, x) {
        Some(mv) => apply_shift(instance, mv),
        None => RuleOutcome::Unchanged,
    })
}

/// The label Rule 6 would set on the arc `(v, u)` between unlabeled vertices.
pub fn labeled_neighbor_choice(
    d: &Digraph,
    labeling: &Labeling,
    v: VertexId,
    u: VertexId,
) -> Option<(VertexId, Label)> {
    let first = d.in_degree(u) == 1
        && d.in_degree(v) == 1
        && d.out_neighbors(v).iter().any(|&w| labeling.is(w, Label::Merge));
    let second = d.out_degree(u) == 1
        && d.out_degree(v) == 1
        && d.in_neighbors(u).iter().any(|&w| labeling.is(w, Label::Fork));
    debug_assert!(!(first && second), "both LabeledNeighbor cases fired");
    if first {
        Some((u, Label::Fork))
    } else if second {
        Some((v, Label::Merge))
    } else {
        None
    }
}

/// Rule 6 on the arc `(v, u)`.
pub fn rule_labeled_neighbor(instance: &mut FadlInstance, arc: Arc) -> Result<RuleOutcome, RuleError> {
    let (v, u) = (arc.tail, arc.head);
    if !instance.digraph.has_arc(v, u) {
        return Err(RuleError::MissingArc(arc));
    }
    for x in [v, u] {
        if instance.labeling.contains(x) {
            return Err(RuleError::AlreadyLabeled(x));
        }
    }
    if instance.budget < 0 {
        return Ok(RuleOutcome::TrivialNo);
    }
    Ok(
        match labeled_neighbor_choice(&instance.digraph, &instance.labeling, v, u) {
            Some((x, label)) => {
                instance.labeling.set(x, label);
                let mut t = Trace::new(RuleId::LabeledNeighbor);
                t.labeled.push((x, label));
                RuleOutcome::Changed(t)
            }
            None => RuleOutcome::Unchanged,
        },
    )
}

/// Rule 7 on the arc `(v, u)` between labeled vertices.
pub fn rule_remove_arcs(instance: &mut FadlInstance, arc: Arc) -> Result<RuleOutcome, RuleError> {
    let (v, u) = (arc.tail, arc.head);
    if !instance.digraph.has_arc(v, u) {
        return Err(RuleError::MissingArc(arc));
    }
    let lv = instance.labeling.get(v).ok_or(RuleError::Unlabeled(v))?;
    let lu = instance.labeling.get(u).ok_or(RuleError::Unlabeled(u))?;
    if instance.budget < 0 {
        return Ok(RuleOutcome::TrivialNo);
    }
    let delta = match (lv, lu) {
        (Label::Fork, Label::Merge) => 0,
        (Label::Merge, Label::Fork) => -1,
        _ => return Ok(RuleOutcome::Unchanged),
    };
    instance.digraph.remove_arc(v, u).unwrap();
    instance.budget += delta;
    let mut t = Trace::new(RuleId::RemoveArcs);
    t.removed_arcs.push(arc);
    t.budget_delta = delta;
    Ok(RuleOutcome::Changed(t))
}

/// Whether Rule 8 removes `v`.
pub fn remove_sink_applies(d: &Digraph, labeling: &Labeling, v: VertexId) -> bool {
    if !d.is_live(v) || !labeling.contains(v) {
        return false;
    }
    let (ins, outs) = (d.in_neighbors(v), d.out_neighbors(v));
    if !ins.is_empty() && !outs.is_empty() {
        return false;
    }
    if !ins.iter().chain(outs).all(|&x| labeling.contains(x)) {
        return false;
    }
    // v must not carry a violation of its own: a Merge source with several
    // out-arcs or a Fork sink with several in-arcs still needs deletions.
    let heavy = match labeling.get(v) {
        Some(Label::Merge) => outs.len() > 1,
        Some(Label::Fork) => ins.len() > 1,
        None => false,
    };
    if heavy {
        return false;
    }
    let source_ok = ins.is_empty()
        && !outs
            .iter()
            .any(|&u| labeling.is(u, Label::Fork) && d.in_degree(u) > 1);
    let sink_ok = outs.is_empty()
        && !ins
            .iter()
            .any(|&u| labeling.is(u, Label::Merge) && d.out_degree(u) > 1);
    source_ok || sink_ok
}

/// Rule 8: drop a labeled source or sink whose neighbourhood is harmless.
pub fn rule_remove_sinks(instance: &mut FadlInstance, v: VertexId) -> Result<RuleOutcome, RuleError> {
    require_live(&instance.digraph, v)?;
    if instance.budget < 0 {
        return Ok(RuleOutcome::TrivialNo);
    }
    if !remove_sink_applies(&instance.digraph, &instance.labeling, v) {
        return Ok(RuleOutcome::Unchanged);
    }
    let d = &mut instance.digraph;
    let mut t = Trace::new(RuleId::RemoveSinks);
    t.removed_arcs.extend(d.in_neighbors(v).iter().map(|&x| Arc::new(x, v)));
    t.removed_arcs.extend(d.out_neighbors(v).iter().map(|&x| Arc::new(v, x)));
    t.removed_vertices.push(v);
    d.remove_vertex(v).unwrap();
    instance.labeling.unset(v);
    Ok(RuleOutcome::Changed(t))
}
