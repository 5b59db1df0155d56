//! Deterministic seeded instance generators.
//!
//! All randomness comes from [`SplitMix64`], so equal specs produce equal
//! instances on every platform:
//!
//! ```text
//! state  = state + 0x9E3779B97F4A7C15        (wrapping)
//! z      = state
//! z      = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z      = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! output = z ^ (z >> 31)
//! ```
//!
//! A value below `b` is the high word of the 128-bit product `output * b`,
//! and a unit float is `(output >> 11) * 2^-53`.

use alloc::vec::Vec;

use thiserror::Error;

use crate::digraph::{Arc, Digraph, VertexId};
use crate::funnel::{is_funnel_labeling, Label, Labeling};
use crate::instance::{FadlInstance, FadsInstance};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform-ish value in `0..bound`; `bound` must be positive.
    pub fn below(&mut self, bound: usize) -> usize {
        debug_assert!(bound > 0);
        ((self.next_u64() as u128 * bound as u128) >> 64) as usize
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenSpec {
    pub n: usize,
    /// Target arc count of the funnel part.
    pub m: usize,
    pub k_plant: usize,
    /// Fraction of vertices put on the Fork side.
    pub fork_fraction: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("{m} arcs do not fit on {n} vertices")]
    TooManyArcs { n: usize, m: usize },
    #[error("fork fraction {0} is outside [0, 1]")]
    BadForkFraction(f64),
}

impl GenSpec {
    pub fn validate(&self) -> Result<(), GenError> {
        if self.m > self.n.saturating_mul(self.n.saturating_sub(1)) {
            return Err(GenError::TooManyArcs {
                n: self.n,
                m: self.m,
            });
        }
        if !(0.0..=1.0).contains(&self.fork_fraction) {
            return Err(GenError::BadForkFraction(self.fork_fraction));
        }
        Ok(())
    }

    fn fork_count(&self) -> usize {
        let x = self.fork_fraction * self.n as f64;
        let f = x as usize;
        let f = if (f as f64) < x { f + 1 } else { f };
        f.min(self.n)
    }
}

/// A planted instance and the noise arcs whose deletion restores a funnel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Planted {
    pub instance: FadsInstance,
    /// Fewer than `k_plant` only when the digraph ran out of absent pairs.
    pub noise: Vec<Arc>,
}

/// `D_k`: `u1 = 0`, `u2 = 1`, `v_0..v_k = 2..k+2`, `w1 = k+3`, `w2 = k+4`.
pub fn gen_forbidden(k: usize) -> Digraph {
    let v = |i: usize| i + 2;
    let mut arcs = alloc::vec![(0, v(0)), (1, v(0)), (v(k), k + 3), (v(k), k + 4)];
    arcs.extend((0..k).map(|i| (v(i), v(i + 1))));
    Digraph::from_arcs_strict(k + 5, arcs).expect("D_k is simple")
}

/// Adds up to `want` distinct absent arcs drawn from `candidates` order or
/// by rejection, whichever is cheaper.
fn add_random_arcs(
    rng: &mut SplitMix64,
    d: &mut Digraph,
    tails: &[VertexId],
    heads: &[VertexId],
    want: usize,
) -> Vec<Arc> {
    let mut added = Vec::new();
    if want == 0 || tails.is_empty() || heads.is_empty() {
        return added;
    }
    let pairs = tails.len() as u128 * heads.len() as u128;
    if (want as u128) * 4 <= pairs && pairs > 64 {
        // Sparse target: rejection sampling terminates quickly.
        let mut misses = 0usize;
        while added.len() < want && misses < 64 * want + 1024 {
            let t = tails[rng.below(tails.len())];
            let h = heads[rng.below(heads.len())];
            if t == h || d.has_arc(t, h) {
                misses += 1;
                continue;
            }
            d.add_arc(t, h).unwrap();
            added.push(Arc::new(t, h));
        }
        if added.len() == want {
            return added;
        }
    }
    let mut all: Vec<Arc> = Vec::new();
    for &t in tails {
        for &h in heads {
            if t != h && !d.has_arc(t, h) {
                all.push(Arc::new(t, h));
            }
        }
    }
    rng.shuffle(&mut all);
    for a in all.into_iter().take(want - added.len()) {
        d.add_arc(a.tail, a.head).unwrap();
        added.push(a);
    }
    added
}

/// A random funnel with its funnel labeling: a random out-tree on the Fork
/// side, a random in-tree on the Merge side, tree arcs kept with probability
/// `min(1, m / 2T)`, then random Fork→Merge arcs, then the dropped tree arcs
/// if the target is still not met.
pub fn gen_random_funnel(spec: &GenSpec) -> Result<(Digraph, Labeling), GenError> {
    spec.validate()?;
    let mut rng = SplitMix64::new(spec.seed);
    let n = spec.n;
    let mut perm: Vec<VertexId> = (0..n).map(VertexId).collect();
    rng.shuffle(&mut perm);
    let (forks, merges) = perm.split_at(spec.fork_count());

    let mut tree: Vec<Arc> = Vec::new();
    for i in 1..forks.len() {
        tree.push(Arc::new(forks[rng.below(i)], forks[i]));
    }
    for i in 1..merges.len() {
        tree.push(Arc::new(merges[i], merges[rng.below(i)]));
    }
    let keep = if tree.is_empty() {
        1.0
    } else {
        (spec.m as f64 / (2 * tree.len()) as f64).min(1.0)
    };

    let mut d = Digraph::new(n);
    let mut dropped = Vec::new();
    for &a in &tree {
        if d.arc_count() < spec.m && rng.chance(keep) {
            d.add_arc(a.tail, a.head).unwrap();
        } else {
            dropped.push(a);
        }
    }
    let want = spec.m - d.arc_count();
    add_random_arcs(&mut rng, &mut d, forks, merges, want);
    for a in dropped {
        if d.arc_count() >= spec.m {
            break;
        }
        d.add_arc(a.tail, a.head).unwrap();
    }

    let labeling = forks
        .iter()
        .map(|&v| (v, Label::Fork))
        .chain(merges.iter().map(|&v| (v, Label::Merge)))
        .collect();
    debug_assert!(is_funnel_labeling(&d, &labeling));
    Ok((d, labeling))
}

/// A random funnel plus `k_plant` noise arcs among absent non-loop pairs,
/// with budget `k_plant`.
pub fn gen_planted(spec: &GenSpec) -> Result<Planted, GenError> {
    let (mut d, _) = gen_random_funnel(spec)?;
    // A separate stream keeps the funnel part identical for every k_plant.
    let mut rng = SplitMix64::new(spec.seed ^ 0x5EED_0F_F00D);
    let all: Vec<VertexId> = d.vertices().collect();
    let mut noise = add_random_arcs(&mut rng, &mut d, &all, &all, spec.k_plant);
    noise.sort_unstable();
    Ok(Planted {
        instance: FadsInstance::new(d, spec.k_plant),
        noise,
    })
}

/// A uniformly random simple digraph with `min(m, n(n-1))` arcs.
pub fn random_digraph(rng: &mut SplitMix64, n: usize, m: usize) -> Digraph {
    let mut d = Digraph::new(n);
    let all: Vec<VertexId> = (0..n).map(VertexId).collect();
    add_random_arcs(rng, &mut d, &all, &all, m.min(n * n.saturating_sub(1)));
    d
}

/// A random digraph where each vertex is labeled with probability
/// `label_probability`, Fork or Merge with equal odds.
pub fn random_fadl(rng: &mut SplitMix64, n: usize, m: usize, budget: i64, label_probability: f64) -> FadlInstance {
    let d = random_digraph(rng, n, m);
    let mut labeling = Labeling::new();
    for v in d.vertices() {
        if rng.chance(label_probability) {
            let l = if rng.chance(0.5) { Label::Fork } else { Label::Merge };
            labeling.set(v, l);
        }
    }
    FadlInstance::new(d, labeling, budget).expect("labels on live vertices")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funnel::{find_forbidden_witness, is_funnel};

    fn spec(n: usize, m: usize, k: usize, seed: u64) -> GenSpec {
        GenSpec {
            n,
            m,
            k_plant: k,
            fork_fraction: 0.5,
            seed,
        }
    }

    #[test]
    fn splitmix_reference_values() {
        // Reference outputs of the published SplitMix64 for seed 0.
        let mut r = SplitMix64::new(0);
        assert_eq!(r.next_u64(), 0xE220_A839_7B1D_CDAF);
        assert_eq!(r.next_u64(), 0x6E78_9E6A_A1B9_65F4);
        assert_eq!(r.next_u64(), 0x06C4_5D18_8009_454F);
    }

    #[test]
    fn forbidden_family_shape() {
        let d0 = gen_forbidden(0);
        assert_eq!((d0.vertex_count(), d0.arc_count()), (5, 4));
        let d1 = gen_forbidden(1);
        assert_eq!((d1.vertex_count(), d1.arc_count()), (6, 5));
        for k in 0..=20 {
            let d = gen_forbidden(k);
            assert!(!is_funnel(&d));
            let w = find_forbidden_witness(&d).unwrap().unwrap();
            let path: Vec<usize> = w.path.iter().map(|v| v.0).collect();
            assert_eq!(path, (2..k + 3).collect::<Vec<_>>());
        }
    }

    #[test]
    fn random_funnels_are_funnels() {
        for seed in 0..200 {
            let (d, l) = gen_random_funnel(&spec(12, 15, 0, seed)).unwrap();
            assert!(is_funnel_labeling(&d, &l));
            assert!(is_funnel(&d));
            assert_eq!(d.arc_count(), 15);
        }
        let (d, _) = gen_random_funnel(&spec(1, 0, 0, 3)).unwrap();
        assert_eq!((d.vertex_count(), d.arc_count()), (1, 0));
        let forest = GenSpec {
            fork_fraction: 1.0,
            ..spec(9, 8, 0, 4)
        };
        let (d, _) = gen_random_funnel(&forest).unwrap();
        assert_eq!(d.arc_count(), 8);
        assert!(d.vertices().all(|v| d.in_degree(v) <= 1));
    }

    #[test]
    fn exhausted_targets_stop() {
        // 2 forks and 2 merges: 2 tree arcs plus 4 cross arcs at most.
        let (d, _) = gen_random_funnel(&spec(4, 12, 0, 1)).unwrap();
        assert_eq!(d.arc_count(), 6);
        assert!(is_funnel(&d));
    }

    #[test]
    fn planted_is_deterministic() {
        let a = gen_planted(&spec(30, 40, 3, 7)).unwrap();
        let b = gen_planted(&spec(30, 40, 3, 7)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.noise.len(), 3);
        assert_eq!(a.instance.digraph.arc_count(), 43);
        assert!(is_funnel(&a.instance.digraph.delete_arcs(&a.noise).unwrap()));
    }

    #[test]
    fn invalid_specs() {
        assert!(matches!(
            gen_random_funnel(&spec(3, 7, 0, 0)),
            Err(GenError::TooManyArcs { .. })
        ));
        let bad = GenSpec {
            fork_fraction: 1.5,
            ..spec(3, 1, 0, 0)
        };
        assert!(matches!(gen_planted(&bad), Err(GenError::BadForkFraction(_))));
    }
}
