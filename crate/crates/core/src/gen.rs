//! Seeded random instances for the property suites.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{Circuit, Gate};
use crate::family::Family;
use crate::formula::DmnFormula;
use crate::graphs::{complete_graph, DoubleGraph, Edge, EdgeIndex, PlainGraph, VertexSet};
use crate::params::Params;

pub type Rng64 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream number `trial` under `seed`, so trials can run in any order.
pub fn trial_rng(seed: u64, trial: u64) -> Rng64 {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(trial);
    r
}

/// A double graph with at most `max_edges` edges, each side chosen at random.
pub fn double_graph<R: Rng>(rng: &mut R, index: &EdgeIndex, max_edges: usize) -> DoubleGraph {
    let count = rng.gen_range(0..=max_edges);
    let (mut pos, mut neg) = (PlainGraph::EMPTY, PlainGraph::EMPTY);
    for _ in 0..count {
        let e = *index.edges().choose(rng).expect("m >= 2");
        if pos.contains(e) || neg.contains(e) {
            continue;
        }
        if rng.gen_bool(0.5) {
            pos.insert(e);
        } else {
            neg.insert(e);
        }
    }
    DoubleGraph::new(pos, neg).expect("sides kept disjoint")
}

/// Up to `max_members` random double graphs.
pub fn family<R: Rng>(
    rng: &mut R,
    index: &EdgeIndex,
    max_members: usize,
    max_edges: usize,
) -> Family {
    let count = rng.gen_range(0..=max_members);
    (0..count)
        .map(|_| double_graph(rng, index, max_edges))
        .collect()
}

fn vertex_subset<R: Rng>(rng: &mut R, m: u32, size: usize) -> VertexSet {
    let all: Vec<u32> = (1..=m).collect();
    all.choose_multiple(rng, size.min(m as usize))
        .copied()
        .collect()
}

/// A random graph whose vertex set is exactly `v` when `|v| >= 2`: a spanning
/// tree-ish edge set plus random extra edges.
fn graph_on<R: Rng>(rng: &mut R, v: VertexSet) -> PlainGraph {
    let verts: Vec<u32> = v.iter().collect();
    if verts.len() < 2 {
        return PlainGraph::EMPTY;
    }
    let mut g = PlainGraph::EMPTY;
    for (i, &x) in verts.iter().enumerate().skip(1) {
        let y = verts[rng.gen_range(0..i)];
        g.insert(Edge::new(x.min(y), x.max(y)).expect("distinct"));
    }
    for e in complete_graph(v).edges() {
        if rng.gen_bool(0.3) {
            g.insert(e);
        }
    }
    g
}

/// A member of `D^ell`: each side has at most `ell` vertices.
pub fn bounded_graph<R: Rng>(rng: &mut R, m: u32, ell: usize) -> DoubleGraph {
    loop {
        let sp = rng.gen_range(0..=ell);
        let sn = rng.gen_range(0..=ell);
        let (vp, vn) = (vertex_subset(rng, m, sp), vertex_subset(rng, m, sn));
        let pos = graph_on(rng, vp);
        let neg = graph_on(rng, vn);
        if let Ok(d) = DoubleGraph::new(pos, neg) {
            return d;
        }
    }
}

/// A family in `℘_L D^ell` with at most `max_members` members.
pub fn bounded_family<R: Rng>(rng: &mut R, params: &Params, max_members: usize) -> Family {
    let count = rng.gen_range(1..=max_members.max(1));
    let mut f = Family::new();
    for _ in 0..count {
        let d = bounded_graph(rng, params.m, params.ell);
        let mut next = f.clone();
        next.insert(d);
        if num_bigint::BigUint::from(crate::sunflower::vertex_norm(&next)) <= params.threshold {
            f = next;
        }
    }
    f
}

/// A family in `D^ell` whose positive side has exactly `distinct` distinct
/// vertex sets of size `2..=ell`, negatives drawn from a small pool.
pub fn wide_family<R: Rng>(rng: &mut R, m: u32, ell: usize, distinct: usize) -> Family {
    let mut seen = std::collections::BTreeSet::new();
    let mut f = Family::new();
    let mut guard = 0;
    while seen.len() < distinct && guard < distinct * 200 {
        guard += 1;
        let size = rng.gen_range(2..=ell.max(2));
        let v = vertex_subset(rng, m, size);
        if !seen.insert(v) {
            continue;
        }
        let pos = graph_on(rng, v);
        let neg = if rng.gen_bool(0.3) {
            let vn = vertex_subset(rng, m, 2);
            graph_on(rng, vn)
        } else {
            PlainGraph::EMPTY
        };
        let d = DoubleGraph::new(pos, neg).unwrap_or_else(|_| DoubleGraph::positive(pos));
        f.insert(d);
    }
    f
}

/// A random DMN formula with at most `max_nodes` tree nodes over `n` variables.
pub fn formula<R: Rng>(rng: &mut R, n: usize, max_nodes: usize) -> DmnFormula {
    let budget = rng.gen_range(1..=max_nodes.max(1));
    formula_with(rng, n, budget)
}

fn formula_with<R: Rng>(rng: &mut R, n: usize, budget: usize) -> DmnFormula {
    if budget < 3 {
        return match rng.gen_range(0..40) {
            0 => DmnFormula::top(),
            1 => DmnFormula::bot(),
            _ => DmnFormula::lit(rng.gen_range(1..=n as u32), rng.gen_bool(0.5)),
        };
    }
    let left = rng.gen_range(1..=budget - 2);
    let a = formula_with(rng, n, left);
    let b = formula_with(rng, n, budget - 1 - left);
    if rng.gen_bool(0.5) {
        DmnFormula::or(a, b)
    } else {
        DmnFormula::and(a, b)
    }
}

/// A random circuit with at most `max_gates` gates over at most `max_vars`
/// variables `v1..`; no negation gate feeds another.
pub fn circuit<R: Rng>(rng: &mut R, max_gates: usize, max_vars: usize) -> Circuit {
    let vars = rng.gen_range(1..=max_vars.max(1));
    let total = rng.gen_range(1..=max_gates.max(1));
    let leaves = rng.gen_range(1..=vars.min(total));
    let mut gates: Vec<Gate> = Vec::with_capacity(total);
    for _ in 0..leaves {
        gates.push(match rng.gen_range(0..20) {
            0 => Gate::True,
            1 => Gate::False,
            _ => Gate::Var(format!("v{}", rng.gen_range(1..=vars))),
        });
    }
    while gates.len() < total {
        let i = gates.len();
        let pick = |rng: &mut R| {
            // bias toward recent gates so the root reaches most of the dag
            let lo = i.saturating_sub(6);
            if rng.gen_bool(0.7) {
                rng.gen_range(lo..i)
            } else {
                rng.gen_range(0..i)
            }
        };
        let g = match rng.gen_range(0..5) {
            0 | 1 => {
                let a = pick(rng);
                if matches!(gates[a], Gate::Not(_)) {
                    Gate::And(a, pick(rng))
                } else {
                    Gate::Not(a)
                }
            }
            2 | 3 => Gate::And(pick(rng), pick(rng)),
            _ => Gate::Or(pick(rng), pick(rng)),
        };
        gates.push(g);
    }
    let root = gates.len() - 1;
    Circuit::from_gates(gates, root)
        .expect("generated gates are well formed")
        .0
}
