//! Problem instances, solutions, the labeled/unlabeled conversions and
//! certificate checking.

use alloc::vec::Vec;

use thiserror::Error;

use crate::digraph::{Arc, Digraph, VertexId};
use crate::funnel::{is_funnel_labeling, Label, Labeling};

/// Funnel arc deletion with a partial labeling. A negative budget marks an
/// instance that has already been refuted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FadlInstance {
    pub digraph: Digraph,
    pub labeling: Labeling,
    pub budget: i64,
}

/// Unlabeled funnel arc deletion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FadsInstance {
    pub digraph: Digraph,
    pub budget: usize,
}

/// Arc-deletion set together with the complete labeling it certifies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    pub deleted_arcs: Vec<Arc>,
    pub labeling: Labeling,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("negative budget {0} cannot be expressed as an unlabeled instance")]
    NegativeBudget(i64),
    #[error("label on vertex {0} which is not in the digraph")]
    LabelOutsideGraph(VertexId),
}

/// Why a candidate solution was rejected.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Rejection {
    #[error("deletion set has {size} arcs but the budget is {budget}")]
    OverBudget { size: usize, budget: i64 },
    #[error("arc {0} is not in the digraph")]
    MissingArc(Arc),
    #[error("arc {0} is listed twice")]
    RepeatedArc(Arc),
    #[error("labeling changes the fixed label of vertex {0}")]
    LabelMismatch(VertexId),
    #[error("labeling does not cover every vertex")]
    Incomplete,
    #[error("labeling is not a funnel labeling of the remaining digraph")]
    NotFunnelLabeling,
}

impl FadlInstance {
    pub fn new(digraph: Digraph, labeling: Labeling, budget: i64) -> Result<Self, InstanceError> {
        if let Some(v) = labeling.first_outside(&digraph) {
            return Err(InstanceError::LabelOutsideGraph(v));
        }
        Ok(FadlInstance {
            digraph,
            labeling,
            budget,
        })
    }

    pub fn unlabeled_count(&self) -> usize {
        self.digraph.vertex_count() - self.labeling.len()
    }

    /// Renumbers live vertices densely, carrying the labels along.
    pub fn compacted(&self) -> FadlInstance {
        let (digraph, map) = self.digraph.compact();
        let labeling = self
            .labeling
            .iter()
            .filter_map(|(v, l)| map[v.0].map(|nv| (nv, l)))
            .collect();
        FadlInstance {
            digraph,
            labeling,
            budget: self.budget,
        }
    }
}

impl FadsInstance {
    pub fn new(digraph: Digraph, budget: usize) -> Self {
        FadsInstance { digraph, budget }
    }
}

/// The same digraph and budget with an empty labeling.
pub fn from_fads(instance: &FadsInstance) -> FadlInstance {
    FadlInstance {
        digraph: instance.digraph.clone(),
        labeling: Labeling::new(),
        budget: instance.budget as i64,
    }
}

/// Encodes labels structurally: adds `k+2` vertices `f_i` and `k+2` vertices
/// `m_i`, an arc `(v, f_i)` for every Fork-labeled `v` and an arc `(m_i, v)`
/// for every Merge-labeled `v`. The gadget vertices get fresh ids after the
/// current id space, `f_1..f_{k+2}` first.
pub fn to_fads(instance: &FadlInstance) -> Result<FadsInstance, InstanceError> {
    if instance.budget < 0 {
        return Err(InstanceError::NegativeBudget(instance.budget));
    }
    let copies = instance.budget as usize + 2;
    let mut d = instance.digraph.clone();
    let forks: Vec<VertexId> = (0..copies).map(|_| d.add_vertex()).collect();
    let merges: Vec<VertexId> = (0..copies).map(|_| d.add_vertex()).collect();
    for (v, label) in instance.labeling.iter() {
        match label {
            Label::Fork => {
                for &f in &forks {
                    d.add_arc(v, f).expect("fresh gadget arc");
                }
            }
            Label::Merge => {
                for &m in &merges {
                    d.add_arc(m, v).expect("fresh gadget arc");
                }
            }
        }
    }
    Ok(FadsInstance {
        digraph: d,
        budget: instance.budget as usize,
    })
}

/// Certificate check with a reason on rejection.
pub fn check_solution(instance: &FadlInstance, solution: &Solution) -> Result<(), Rejection> {
    let size = solution.deleted_arcs.len();
    if instance.budget < 0 || size as i64 > instance.budget {
        return Err(Rejection::OverBudget {
            size,
            budget: instance.budget,
        });
    }
    let mut reduced = instance.digraph.clone();
    for a in &solution.deleted_arcs {
        if reduced.remove_arc(a.tail, a.head).is_err() {
            return Err(if instance.digraph.has_arc(a.tail, a.head) {
                Rejection::RepeatedArc(*a)
            } else {
                Rejection::MissingArc(*a)
            });
        }
    }
    if let Some((v, _)) = instance
        .labeling
        .iter()
        .find(|&(v, l)| solution.labeling.get(v) != Some(l))
    {
        return Err(Rejection::LabelMismatch(v));
    }
    if !solution.labeling.is_complete_for(&reduced) {
        return Err(Rejection::Incomplete);
    }
    if !is_funnel_labeling(&reduced, &solution.labeling) {
        return Err(Rejection::NotFunnelLabeling);
    }
    Ok(())
}

pub fn verify_solution(instance: &FadlInstance, solution: &Solution) -> bool {
    check_solution(instance, solution).is_ok()
}
