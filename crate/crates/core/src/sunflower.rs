//! Sunflower search and the plucking procedure.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::family::Family;
use crate::graphs::{complete_graph, DoubleGraph, Side, VertexSet};

/// `v(X^side)`: the distinct vertex sets of one side, in canonical order.
pub fn distinct_vertex_sets(x: &Family, side: Side) -> BTreeSet<VertexSet> {
    x.iter().map(|d| d.side(side).vertices()).collect()
}

/// `||v(X)||`: the larger of the two distinct-vertex-set counts.
pub fn vertex_norm(x: &Family) -> usize {
    distinct_vertex_sets(x, Side::Pos)
        .len()
        .max(distinct_vertex_sets(x, Side::Neg).len())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sunflower {
    pub petals: Vec<VertexSet>,
    pub core: VertexSet,
}

impl Sunflower {
    /// Checks distinct petals whose pairwise intersections all equal the core.
    pub fn is_valid(&self) -> bool {
        let distinct: BTreeSet<_> = self.petals.iter().collect();
        if distinct.len() != self.petals.len() {
            return false;
        }
        for (i, a) in self.petals.iter().enumerate() {
            for b in &self.petals[i + 1..] {
                if a.intersection(*b) != self.core {
                    return false;
                }
            }
        }
        self.petals.len() >= 2 || self.petals.iter().all(|p| self.core.is_subset(*p))
    }
}

impl fmt::Display for Sunflower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "core={} petals=", self.core)?;
        for (i, p) in self.petals.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

/// Looks for `p` distinct sets forming a sunflower.
///
/// Greedy maximal disjoint subfamily in canonical order; failing that,
/// recurse on the link of the most frequent element (smallest on ties).
/// Always succeeds when there are more than `(p-1)^s s!` sets of size at
/// most `s`.
pub fn find_sunflower(sets: &[VertexSet], p: usize) -> Option<Sunflower> {
    if p == 0 {
        return Some(Sunflower {
            petals: Vec::new(),
            core: VertexSet::EMPTY,
        });
    }
    let family: BTreeSet<VertexSet> = sets.iter().copied().collect();
    let found = search(&family, p)?;
    debug_assert!(found.is_valid());
    Some(found)
}

fn search(family: &BTreeSet<VertexSet>, p: usize) -> Option<Sunflower> {
    if family.len() < p {
        return None;
    }
    let mut taken: Vec<VertexSet> = Vec::new();
    let mut used = VertexSet::EMPTY;
    for &s in family {
        if s.is_disjoint(used) {
            taken.push(s);
            used = used.union(s);
            if taken.len() == p {
                return Some(Sunflower {
                    petals: taken,
                    core: VertexSet::EMPTY,
                });
            }
        }
    }
    let mut freq: BTreeMap<u32, usize> = BTreeMap::new();
    for s in family {
        for v in s.iter() {
            *freq.entry(v).or_default() += 1;
        }
    }
    // max_by_key keeps the last maximum, so scan in reverse to prefer small vertices
    let (&x, &count) = freq.iter().rev().max_by_key(|(_, &c)| c)?;
    if count < p {
        return None;
    }
    let link: BTreeSet<VertexSet> = family
        .iter()
        .filter(|s| s.contains(x))
        .map(|s| {
            let mut t = *s;
            t.remove(x);
            t
        })
        .collect();
    let inner = search(&link, p)?;
    let mut core = inner.core;
    core.insert(x);
    let petals = inner
        .petals
        .into_iter()
        .map(|mut s| {
            s.insert(x);
            s
        })
        .collect();
    Some(Sunflower { petals, core })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PluckConfig {
    pub p: usize,
    pub ell: usize,
    /// Plucking continues while `||v(X)|| > threshold`.
    pub threshold: BigUint,
    /// Largest allowed vertex count per side of an input member.
    pub set_size: usize,
}

impl PluckConfig {
    pub fn new(p: usize, ell: usize, threshold: BigUint) -> PluckConfig {
        PluckConfig {
            p,
            ell,
            threshold,
            set_size: ell,
        }
    }

    pub fn from_params(params: &crate::params::Params) -> PluckConfig {
        PluckConfig::new(params.p, params.ell, params.threshold.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Replacement {
    pub before: DoubleGraph,
    /// `None` when the plucked member clashed and was dropped.
    pub after: Option<DoubleGraph>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PluckStep {
    pub side: Side,
    pub sunflower: Sunflower,
    pub replaced: Vec<Replacement>,
    /// Distinct vertex sets on the plucked side before and after the step.
    pub count_before: usize,
    pub count_after: usize,
}

impl PluckStep {
    pub fn dropped(&self) -> usize {
        self.replaced.iter().filter(|r| r.after.is_none()).count()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PluckTrace {
    /// `||v(X)||` of the input.
    pub initial_norm: usize,
    pub steps: Vec<PluckStep>,
    pub result: Family,
}

impl PluckTrace {
    pub fn dropped(&self) -> usize {
        self.steps.iter().map(PluckStep::dropped).sum()
    }
}

impl fmt::Display for PluckTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "initial_norm = {}", self.initial_norm)?;
        writeln!(f, "steps = {}", self.steps.len())?;
        for (i, s) in self.steps.iter().enumerate() {
            writeln!(
                f,
                "step {} side={} {} count={}->{}",
                i + 1,
                s.side,
                s.sunflower,
                s.count_before,
                s.count_after
            )?;
            for r in &s.replaced {
                match &r.after {
                    Some(a) => writeln!(f, "  {} => {}", r.before, a)?,
                    None => writeln!(f, "  {} => dropped (clash)", r.before)?,
                }
            }
        }
        writeln!(f, "result = {}", self.result.len())?;
        for d in &self.result {
            writeln!(f, "{d}")?;
        }
        Ok(())
    }
}

/// `PL(X)`: elementary pluckings until `||v(X)|| <= threshold`.
pub fn pluck(x: &Family, config: &PluckConfig) -> Result<(Family, PluckTrace)> {
    if let Some(bad) = x.iter().find(|d| d.vertex_norm() > config.set_size) {
        return Err(Error::Precondition(format!(
            "member {bad} has more than {} vertices on one side",
            config.set_size
        )));
    }
    if config.p < 2 {
        return Err(Error::InvalidParams(format!(
            "plucking needs p >= 2, got {}",
            config.p
        )));
    }
    let over = |n: usize| BigUint::from(n) > config.threshold;
    let mut cur = x.clone();
    let initial_norm = vertex_norm(x);
    let mut steps = Vec::new();
    loop {
        let pos = distinct_vertex_sets(&cur, Side::Pos);
        let neg = distinct_vertex_sets(&cur, Side::Neg);
        let (side, sets) = if over(pos.len()) {
            (Side::Pos, pos)
        } else if over(neg.len()) {
            (Side::Neg, neg)
        } else {
            break;
        };
        let list: Vec<VertexSet> = sets.iter().copied().collect();
        let sunflower =
            find_sunflower(&list, config.p).ok_or_else(|| Error::SunflowerNotFound {
                side: side.to_string(),
                sets: list.len(),
                p: config.p,
                threshold: config.threshold.to_string(),
            })?;
        debug_assert!(sunflower.is_valid());
        let petals: BTreeSet<VertexSet> = sunflower.petals.iter().copied().collect();
        let core_graph = complete_graph(sunflower.core);
        let mut next = Family::new();
        let mut replaced = Vec::new();
        for d in &cur {
            if petals.contains(&d.side(side).vertices()) {
                let after = d.with_side(side, core_graph).ok();
                if let Some(a) = after {
                    next.insert(a);
                }
                replaced.push(Replacement { before: *d, after });
            } else {
                next.insert(*d);
            }
        }
        let count_after = distinct_vertex_sets(&next, side).len();
        steps.push(PluckStep {
            side,
            sunflower,
            replaced,
            count_before: sets.len(),
            count_after,
        });
        cur = next;
    }
    let trace = PluckTrace {
        initial_norm,
        steps,
        result: cur.clone(),
    };
    Ok((cur, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::erdos_rado_threshold;
    use crate::graphs::PlainGraph;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn vs(v: &[u32]) -> VertexSet {
        v.iter().copied().collect()
    }

    fn pos(pairs: &[(u32, u32)]) -> DoubleGraph {
        DoubleGraph::positive(PlainGraph::from_pairs(pairs))
    }

    #[test]
    fn vertex_sets_per_side() {
        let x: Family = [pos(&[(1, 2)]), pos(&[(1, 2), (1, 3)])]
            .into_iter()
            .collect();
        let p = distinct_vertex_sets(&x, Side::Pos);
        assert_eq!(
            p.into_iter().collect::<Vec<_>>(),
            vec![vs(&[1, 2]), vs(&[1, 2, 3])]
        );
        let n = distinct_vertex_sets(&x, Side::Neg);
        assert_eq!(n.into_iter().collect::<Vec<_>>(), vec![VertexSet::EMPTY]);
        assert_eq!(vertex_norm(&x), 2);
        let y: Family = [pos(&[(1, 2)]), pos(&[(1, 2), (2, 1)])]
            .into_iter()
            .collect();
        assert_eq!(distinct_vertex_sets(&y, Side::Pos).len(), 1);
    }

    #[test]
    fn disjoint_petals() {
        let s = find_sunflower(&[vs(&[1, 2]), vs(&[3, 4]), vs(&[5, 6])], 3).unwrap();
        assert_eq!(s.core, VertexSet::EMPTY);
        assert_eq!(s.petals.len(), 3);
        assert!(s.is_valid());
    }

    #[test]
    fn common_core() {
        let s = find_sunflower(&[vs(&[1, 2]), vs(&[1, 3]), vs(&[1, 4])], 3).unwrap();
        assert_eq!(s.core, vs(&[1]));
        assert!(s.is_valid());
    }

    #[test]
    fn none_below_threshold() {
        assert!(find_sunflower(&[vs(&[1, 2]), vs(&[2, 3]), vs(&[1, 3])], 3).is_none());
        assert!(find_sunflower(&[vs(&[1])], 2).is_none());
    }

    #[test]
    fn empty_set_can_be_a_petal() {
        let s = find_sunflower(&[VertexSet::EMPTY, vs(&[1]), vs(&[2])], 3).unwrap();
        assert!(s.is_valid());
        assert_eq!(s.core, VertexSet::EMPTY);
    }

    #[test]
    fn invalid_sunflowers_are_detected() {
        let bad = Sunflower {
            petals: vec![vs(&[1, 2]), vs(&[1, 3]), vs(&[2, 3])],
            core: VertexSet::EMPTY,
        };
        assert!(!bad.is_valid());
        let dup = Sunflower {
            petals: vec![vs(&[1]), vs(&[1])],
            core: vs(&[1]),
        };
        assert!(!dup.is_valid());
    }

    fn random_sets(
        rng: &mut ChaCha8Rng,
        count: usize,
        size: usize,
        universe: u32,
    ) -> Vec<VertexSet> {
        let mut out = BTreeSet::new();
        let verts: Vec<u32> = (1..=universe).collect();
        while out.len() < count {
            let s = rng.gen_range(0..=size);
            out.insert(
                verts
                    .choose_multiple(rng, s)
                    .copied()
                    .collect::<VertexSet>(),
            );
        }
        out.into_iter().collect()
    }

    #[test]
    fn complete_above_threshold() {
        for (ell, p) in [(2usize, 3usize), (3, 3)] {
            let n = erdos_rado_threshold(p as u64, ell as u64);
            let n: usize = n.try_into().unwrap();
            for seed in 0..30u64 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let sets = random_sets(&mut rng, n + 1, ell, 12);
                let s = find_sunflower(&sets, p).expect("sunflower above threshold");
                assert!(s.is_valid());
                assert!(s.petals.iter().all(|p| sets.contains(p)));
            }
        }
    }

    #[test]
    fn pluck_hand_trace() {
        let x: Family = [pos(&[(1, 2)]), pos(&[(1, 3)]), pos(&[(1, 4)])]
            .into_iter()
            .collect();
        let cfg = PluckConfig::new(3, 2, BigUint::from(2u32));
        let (res, trace) = pluck(&x, &cfg).unwrap();
        assert_eq!(res, Family::singleton(DoubleGraph::EMPTY));
        assert_eq!(trace.steps.len(), 1);
        assert_eq!(trace.steps[0].sunflower.core, vs(&[1]));
        assert_eq!(trace.steps[0].count_before, 3);
        assert_eq!(trace.steps[0].count_after, 1);
    }

    #[test]
    fn pluck_identity_below_threshold() {
        let x: Family = [pos(&[(1, 2)]), pos(&[(1, 3)])].into_iter().collect();
        let (res, trace) = pluck(&x, &PluckConfig::new(3, 2, BigUint::from(2u32))).unwrap();
        assert_eq!(res, x);
        assert!(trace.steps.is_empty());
    }

    #[test]
    fn pluck_drops_clashing_members() {
        // negative side holds (1,2); the positive core {1,2} would reinstate it
        let mk = |extra: u32| {
            DoubleGraph::new(
                PlainGraph::from_pairs(&[(1, 2), (1, extra)]),
                PlainGraph::EMPTY,
            )
            .unwrap()
        };
        let clash = DoubleGraph::new(
            PlainGraph::from_pairs(&[(1, 5), (2, 5)]),
            PlainGraph::from_pairs(&[(1, 2)]),
        )
        .unwrap();
        let x: Family = [mk(3), mk(4), clash].into_iter().collect();
        let (res, trace) = pluck(&x, &PluckConfig::new(3, 3, BigUint::from(2u32))).unwrap();
        assert_eq!(trace.steps.len(), 1);
        assert_eq!(trace.dropped(), 1);
        assert_eq!(
            res,
            Family::singleton(DoubleGraph::positive(PlainGraph::from_pairs(&[(1, 2)])))
        );
        assert!(trace.to_string().contains("dropped (clash)"));
    }

    #[test]
    fn pluck_rejects_oversized_members() {
        let x = Family::singleton(pos(&[(1, 2), (3, 4)]));
        assert!(matches!(
            pluck(&x, &PluckConfig::new(3, 3, BigUint::from(1u32))),
            Err(Error::Precondition(_))
        ));
    }
}
