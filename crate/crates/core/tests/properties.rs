use std::collections::BTreeSet;

use proptest::prelude::*;

use cliq2_core::approx::{approx_join, approx_meet, TestSets};
use cliq2_core::circuit::{graph_of_rail, graph_of_tri, rail_of_tri};
use cliq2_core::double_tests::{enum_neg2, in_cliq2};
use cliq2_core::formula::{analyze, approx_set, sem_set, total_deviations, DmnFormula, Node};
use cliq2_core::gen;
use cliq2_core::graphs::{complete_graph, non_edges, DoubleGraph, EdgeIndex, PlainGraph, Side};
use cliq2_core::semantics::{
    base, equiv_formulas, eval, formula_of_graph, Equivalence, Sampling, Semantics, Tri,
    TriAssignment,
};
use cliq2_core::sunflower::{distinct_vertex_sets, pluck, vertex_norm, PluckConfig};
use cliq2_core::{Family, Params};

fn plain(index: &EdgeIndex, mask: u64) -> PlainGraph {
    PlainGraph::from_edges(
        index
            .edges()
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, e)| *e),
    )
}

fn double(index: &EdgeIndex, pos: u64, neg: u64) -> DoubleGraph {
    DoubleGraph::new(plain(index, pos), plain(index, neg & !pos)).unwrap()
}

fn dg(m: u32) -> impl Strategy<Value = DoubleGraph> {
    let index = EdgeIndex::new(m).unwrap();
    (any::<u64>(), any::<u64>()).prop_map(move |(p, n)| double(&index, p, n))
}

fn sparse_dg(m: u32) -> impl Strategy<Value = DoubleGraph> {
    let index = EdgeIndex::new(m).unwrap();
    (any::<u64>(), any::<u64>(), any::<u64>(), any::<u64>())
        .prop_map(move |(p, q, n, r)| double(&index, p & q, n & r))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn complete_graph_edge_count(d in dg(7)) {
        let v = d.pos().vertices();
        let s = v.len();
        prop_assert_eq!(complete_graph(v).len(), s * s.saturating_sub(1) / 2);
    }

    #[test]
    fn merge_laws(a in sparse_dg(6), b in sparse_dg(6), c in sparse_dg(6)) {
        let empty = DoubleGraph::default();
        prop_assert_eq!(a.merge(&empty), Some(a));
        prop_assert_eq!(a.merge(&b), b.merge(&a));
        if let (Some(ab), Some(bc)) = (a.merge(&b), b.merge(&c)) {
            prop_assert_eq!(ab.merge(&c), a.merge(&bc));
        }
    }

    #[test]
    fn inclusion_orders(a in sparse_dg(5), b in sparse_dg(5), c in sparse_dg(5)) {
        prop_assert!(a.subset_pm(&a) && a.subset_mp(&a));
        if a.subset_pm(&b) {
            prop_assert!(a.subset_mp(&b));
            if b.subset_pm(&a) {
                prop_assert_eq!(a, b);
            }
            if b.subset_pm(&c) {
                prop_assert!(a.subset_pm(&c));
            }
        }
    }

    #[test]
    fn non_edge_identities(d in dg(7)) {
        let g = d.pos();
        let full = complete_graph(g.vertices());
        prop_assert!(non_edges(non_edges(g)).is_subset(full));
        prop_assert_eq!(g.union(non_edges(g)), full);
    }

    #[test]
    fn cliq2_is_monotone(a in dg(5), extra in dg(5)) {
        if let Some(b) = a.merge(&extra) {
            if in_cliq2(&a, 3) {
                prop_assert!(in_cliq2(&b, 3));
            }
        }
    }

    #[test]
    fn base_laws(members in prop::collection::vec(sparse_dg(4), 0..8)) {
        let x: Family = members.into_iter().collect();
        let b = base(&x);
        prop_assert!(b.is_subset(&x));
        prop_assert_eq!(base(&b), b.clone());
        for d in &x {
            prop_assert!(b.iter().any(|e| e.subset_pm(d)));
        }
    }

    #[test]
    fn characteristic_assignment_satisfies_its_formula(d in dg(5)) {
        let index = EdgeIndex::new(5).unwrap();
        let t = TriAssignment::of_graph(&d, &index).unwrap();
        let phi = formula_of_graph(&d, &index).unwrap();
        prop_assert_eq!(eval(&phi, &t, Semantics::Absorbing).unwrap(), Tri::One);
        prop_assert_eq!(eval(&phi, &t, Semantics::Kleene).unwrap(), Tri::One);
    }
}

#[test]
fn neg2_strictly_below_rough_bound() {
    for m in 2..=6u32 {
        for k in 3..=4usize.min(m as usize) {
            let p = Params::desk(m, k).unwrap();
            let bound = ((k - 1) as u64).pow(2 * m);
            assert!((enum_neg2(&p).unwrap().len() as u64) < bound, "m={m} k={k}");
        }
    }
}

/// Replays a plucking trace and checks that every step removes exactly
/// `p - 1` vertex sets, up to a core that was already present or that no
/// surviving member carries.
#[test]
fn plucking_progress_is_p_minus_one() {
    let params = Params::new(12, 5, 3, 4).unwrap();
    let config = PluckConfig::from_params(&params);
    let mut exact = 0;
    for t in 0..40 {
        let mut rng = gen::trial_rng(17, t);
        let x = gen::wide_family(&mut rng, 12, 3, 170 + t as usize);
        let (_, trace) = pluck(&x, &config).unwrap();
        let mut cur = x.clone();
        for step in &trace.steps {
            let before: BTreeSet<_> = distinct_vertex_sets(&cur, step.side);
            assert_eq!(before.len(), step.count_before);
            for r in &step.replaced {
                cur.remove(&r.before);
            }
            for r in &step.replaced {
                if let Some(a) = r.after {
                    cur.insert(a);
                }
            }
            let after = distinct_vertex_sets(&cur, step.side).len();
            assert_eq!(after, step.count_after);
            let core = step.sunflower.core;
            let core_new = !before.contains(&core) || step.sunflower.petals.contains(&core);
            let core_carried = step.replaced.iter().any(|r| r.after.is_some());
            let expected =
                step.count_before - (config.p - 1) - usize::from(!core_new || !core_carried);
            assert_eq!(after, expected, "step {step:?}");
            exact += usize::from(core_new && core_carried);
        }
        assert_eq!(cur, trace.result);
    }
    assert!(exact > 0);
}

/// Every positive test accepted before plucking is accepted after, over all
/// of `POS2` at m=5, k=3.
#[test]
fn plucking_preserves_positive_acceptance() {
    let params = Params::new(5, 3, 2, 3).unwrap();
    let tests = TestSets::positive_only(&params).unwrap();
    let config = PluckConfig::from_params(&params);
    let mut plucked = 0;
    for t in 0..300 {
        let mut rng = gen::trial_rng(23, t);
        let x: Family = (0..rng_len(&mut rng))
            .map(|_| gen::bounded_graph(&mut rng, 5, 2))
            .collect();
        let (out, trace) = pluck(&x, &config).unwrap();
        plucked += usize::from(!trace.steps.is_empty());
        assert!(tests.ac_pos(&x).is_subset(&tests.ac_pos(&out)), "X = {x}");
    }
    assert!(plucked > 0);
}

fn rng_len(rng: &mut gen::Rng64) -> usize {
    use rand::Rng;
    rng.gen_range(4..24)
}

#[test]
fn approximators_stay_in_regime() {
    let params = Params::new(6, 3, 2, 3).unwrap();
    for t in 0..200 {
        let mut rng = gen::trial_rng(29, t);
        let x = gen::bounded_family(&mut rng, &params, 8);
        let y = gen::bounded_family(&mut rng, &params, 8);
        for z in [
            approx_join(&x, &y, &params).unwrap(),
            approx_meet(&x, &y, &params).unwrap(),
        ] {
            assert!(num_bigint::BigUint::from(vertex_norm(&z)) <= params.threshold);
            assert!(z.within_ell(params.ell));
        }
    }
}

#[test]
fn cs_grows_along_subterms() {
    for t in 0..300 {
        let phi = gen::formula(&mut gen::trial_rng(31, t), 10, 14);
        for f in phi.postorder() {
            if let Some((a, b)) = f.children() {
                assert!(a.cs() < f.cs() && b.cs() < f.cs(), "{f}");
            }
        }
    }
}

#[test]
fn structurally_equal_formulas_share_results() {
    let params = Params::new(5, 3, 3, 4).unwrap();
    let index = EdgeIndex::new(5).unwrap();
    for t in 0..100 {
        let phi = gen::formula(&mut gen::trial_rng(37, t), 10, 12);
        let again = DmnFormula::parse(&phi.to_string(), Some(10)).unwrap();
        assert_eq!(phi.id(), again.id());
        assert_eq!(
            sem_set(&phi, &index).unwrap(),
            sem_set(&again, &index).unwrap()
        );
        assert_eq!(
            approx_set(&phi, &params).unwrap(),
            approx_set(&again, &params).unwrap()
        );
    }
}

fn or_only(phi: &DmnFormula) -> bool {
    phi.postorder()
        .iter()
        .all(|f| !matches!(f.node(), Node::And(..)))
}

/// `AC^p(AP φ) ⊇ AC^p(φ) ∖ ∂^p(φ)` on every formula, and `AC^n(AP φ) ⊇ AC^n(φ)`
/// on formulas built from literals by disjunction only.
#[test]
fn approximation_acceptance_inclusions() {
    let params = Params::new(5, 3, 2, 3).unwrap();
    let tests = TestSets::new(&params).unwrap();
    let mut joins = 0;
    for t in 0..300 {
        let mut rng = gen::trial_rng(41, t);
        let phi = if t % 2 == 0 {
            gen::formula(&mut rng, 10, 12)
        } else {
            use rand::Rng;
            DmnFormula::or_all(
                (0..rng.gen_range(1..12))
                    .map(|_| DmnFormula::lit(rng.gen_range(1..=10), rng.gen_bool(0.5))),
            )
        };
        let a = analyze(&phi, &params).unwrap();
        let d = total_deviations(a.s_of(&phi), a.ap_of(&phi), &tests);
        let mut kept = d.ac_pos_s.clone();
        kept.difference_with(&d.pos);
        assert!(kept.is_subset(&d.ac_pos_ap), "{phi}");
        if or_only(&phi) {
            joins += 1;
            assert!(d.ac_neg_s.is_subset(&d.ac_neg_ap), "{phi}");
        }
    }
    assert!(joins > 100);
}

/// With meets the negative inclusion can fail: the bounded product drops a
/// member whose exact counterpart rejects nothing new.
#[test]
fn negative_inclusion_fails_through_meets() {
    let params = Params::new(5, 3, 2, 3).unwrap();
    let tests = TestSets::new(&params).unwrap();
    let phi = DmnFormula::parse("(v1 & v10)", Some(10)).unwrap();
    let a = analyze(&phi, &params).unwrap();
    let d = total_deviations(a.s_of(&phi), a.ap_of(&phi), &tests);
    assert!(!d.ac_neg_s.is_subset(&d.ac_neg_ap));
}

#[test]
fn sim_implies_approx() {
    for t in 0..60 {
        let mut rng = gen::trial_rng(43, t);
        let a = gen::formula(&mut rng, 6, 8);
        let b = if t % 3 == 0 {
            a.clone()
        } else {
            gen::formula(&mut rng, 6, 8)
        };
        for sem in [Semantics::Absorbing, Semantics::Kleene] {
            let sim =
                equiv_formulas(&a, &b, 4, Equivalence::Sim, sem, Sampling::default()).unwrap();
            let approx =
                equiv_formulas(&a, &b, 4, Equivalence::Approx, sem, Sampling::default()).unwrap();
            assert!(!sim.equivalent || approx.equivalent, "{a} vs {b}");
            let back =
                equiv_formulas(&b, &a, 4, Equivalence::Sim, sem, Sampling::default()).unwrap();
            assert_eq!(sim.equivalent, back.equivalent);
        }
    }
}

#[test]
fn rails_round_trip_at_m4() {
    let index = EdgeIndex::new(4).unwrap();
    for code in 0..3u64.pow(6) {
        let t = TriAssignment::from_code(code, 6);
        assert_eq!(
            graph_of_tri(&t, &index).unwrap(),
            graph_of_rail(&rail_of_tri(&t), &index).unwrap()
        );
    }
}

#[test]
fn pos2_members_pluck_nothing_below_threshold() {
    let params = Params::new(5, 3, 3, 4).unwrap();
    let tests = TestSets::new(&params).unwrap();
    let x = tests.pos_family();
    assert!(distinct_vertex_sets(&x, Side::Pos).len() <= 162);
    let (out, trace) = pluck(&x, &PluckConfig::from_params(&params)).unwrap();
    assert!(trace.steps.is_empty());
    assert_eq!(out, x);
}
