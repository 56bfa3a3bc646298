//! Exhaustive and seeded property suites. Each check returns a [`Report`]
//! whose verdict is the conjunction of everything it verified.

use std::collections::BTreeMap;

use fixedbitset::FixedBitSet;
use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::approx::{approx_join_traced, minus, product, TestSets};
use crate::bounds::{self, binomial};
use crate::circuit::{
    cliq2_rail_circuit, demorgan_convert, dmn_of_rail_circuit, rail_of_tri, Circuit,
};
use crate::double_tests::{all_colorings, enum_neg2, enum_pos2, in_cliq2, in_nocliq2};
use crate::error::Result;
use crate::family::Family;
use crate::formula::{deviation_chains, sem_set, theorem13_dichotomy, ChainCheck, DmnFormula};
use crate::gen;
use crate::graphs::{DoubleGraph, EdgeIndex, VertexSet};
use crate::params::Params;
use crate::report::Report;
use crate::semantics::{
    self, all_double_graphs, base, cliq2_family, compare, eval_setrep, formula_of_family,
    lemma15_compare, Compiled, Equivalence, Sampling, Semantics, Tri, TriAssignment,
};
use crate::sunflower::{find_sunflower, pluck, PluckConfig};

/// Failing trials with the first witness.
#[derive(Default)]
struct Tally {
    trials: usize,
    failures: usize,
    first: Option<String>,
}

impl Tally {
    fn record(&mut self, witness: Option<String>) {
        self.trials += 1;
        if let Some(w) = witness {
            self.failures += 1;
            self.first.get_or_insert(w);
        }
    }

    fn write(&self, r: &mut Report, prefix: &str) {
        r.field(format!("{prefix}trials"), self.trials)
            .field(format!("{prefix}violations"), self.failures);
        if let Some(w) = &self.first {
            r.field(format!("{prefix}first_violation"), w.clone());
        }
        r.require(self.failures == 0);
    }
}

fn trials<T: Send>(count: usize, f: impl Fn(u64) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    (0..count as u64).into_par_iter().map(f).collect()
}

/// One-line rendering of a family.
fn fam(x: &Family) -> String {
    let parts: Vec<String> = x.iter().map(ToString::to_string).collect();
    format!("{{{}}}", parts.join("; "))
}

fn one_line(c: &Circuit) -> String {
    c.to_string().trim_end().replace('\n', "; ")
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Counts ordered pairs of `k`-subsets meeting in at most one vertex, which is
/// exactly when their cliques share no edge.
fn pos2_brute_force(m: u32, k: usize) -> u64 {
    let subsets: Vec<u32> = (0u32..1 << m)
        .filter(|s| s.count_ones() as usize == k)
        .collect();
    let mut count = 0;
    for &a in &subsets {
        for &b in &subsets {
            if (a & b).count_ones() <= 1 {
                count += 1;
            }
        }
    }
    count
}

/// `|POS2|` three ways, plus the size of `NEG2` against `(k-1)^(2m)`.
pub fn lemma1(params: &Params) -> Result<Report> {
    let (m, k) = (params.m, params.k);
    let enumerated = enum_pos2(params)?.len();
    let formula = bounds::pos2_count_formula(m as u64, k as u64);
    let oracle = pos2_brute_force(m, k);
    let ok = BigUint::from(enumerated) == formula && enumerated as u64 == oracle;
    let mut r = Report::new("lemma1");
    r.field("m", m)
        .field("k", k)
        .field("enumerated", enumerated)
        .big("formula", &formula)
        .field("brute_force", oracle);
    let bound = num_traits::pow(BigUint::from(k as u64 - 1), 2 * m as usize);
    r.big("neg2_bound", &bound);
    if bound <= BigUint::from(params.cap) {
        let neg = enum_neg2(params)?.len();
        r.field("neg2", neg);
        r.require(BigUint::from(neg) <= bound);
    } else {
        r.field("neg2", "skipped (over cap)");
    }
    r.require(ok);
    r.field(
        "result",
        format!(
            "enumerated={enumerated} formula={formula} {}",
            pass(r.passed())
        ),
    );
    Ok(r)
}

/// No double graph over `[m]` is in both `CLIQ2` and `NOCLIQ2`.
pub fn lemma1_disjointness(params: &Params) -> Result<Report> {
    let universe = all_double_graphs(params.m, params.cap)?;
    let neg = enum_neg2(params)?;
    let k = params.k;
    let flags: Vec<(bool, bool)> = universe
        .par_iter()
        .map(|d| (in_cliq2(d, k), in_nocliq2(d, &neg)))
        .collect();
    let cliq = flags.iter().filter(|f| f.0).count();
    let nocliq = flags.iter().filter(|f| f.1).count();
    let both = flags.iter().position(|f| f.0 && f.1);
    let mut r = Report::new("lemma1-disjointness");
    r.field("double_graphs", universe.len())
        .field("cliq2", cliq)
        .field("nocliq2", nocliq)
        .field("both", flags.iter().filter(|f| f.0 && f.1).count());
    if let Some(i) = both {
        r.field("first_violation", universe[i].to_string());
    }
    r.require(both.is_none());
    Ok(r)
}

/// No coloring graph `C_f` contains a `k`-clique.
pub fn pigeonhole(params: &Params) -> Result<Report> {
    let colorings = all_colorings(params.m, params.k)?;
    let bad = colorings
        .par_iter()
        .position_first(|f| f.graph().contains_clique(params.k));
    let mut r = Report::new("pigeonhole");
    r.field("m", params.m)
        .field("k", params.k)
        .field("colorings", colorings.len());
    if let Some(i) = bad {
        r.field("first_violation", format!("{:?}", colorings[i].values()));
    }
    r.require(bad.is_none());
    Ok(r)
}

/// Algebra of the product: commutativity, associativity, distribution,
/// the union inclusion and monotonicity.
pub fn conditions23(params: &Params, seed: u64, count: usize) -> Result<Report> {
    let index = EdgeIndex::new(params.m)?;
    let results = trials(count, |t| {
        let mut rng = gen::trial_rng(seed, t);
        let x = gen::family(&mut rng, &index, 4, 4);
        let y = gen::family(&mut rng, &index, 4, 4);
        let z = gen::family(&mut rng, &index, 4, 4);
        let x2 = x.union(&gen::family(&mut rng, &index, 3, 4));
        let y2 = y.union(&gen::family(&mut rng, &index, 3, 4));
        let xy = product(&x, &y);
        let mut bad: Vec<(&'static str, String)> = Vec::new();
        let ctx = || format!("X={} Y={} Z={}", fam(&x), fam(&y), fam(&z));
        if !product(&Family::new(), &y).is_empty() || !product(&x, &Family::new()).is_empty() {
            bad.push(("empty", ctx()));
        }
        if xy != product(&y, &x) {
            bad.push(("1-commutative", ctx()));
        }
        if product(&x, &product(&y, &z)) != product(&xy, &z) {
            bad.push(("1-associative", ctx()));
        }
        if product(&x, &y.union(&z)) != xy.union(&product(&x, &z)) {
            bad.push(("2-distributive", ctx()));
        }
        if !x
            .union(&product(&y, &z))
            .is_subset(&product(&x.union(&y), &x.union(&z)))
        {
            bad.push(("2-inclusion", ctx()));
        }
        if !xy.is_subset(&product(&x2, &y2)) {
            bad.push((
                "3-monotone",
                format!("{} X'={} Y'={}", ctx(), fam(&x2), fam(&y2)),
            ));
        }
        Ok(bad)
    })?;
    let mut r = Report::new("conditions23");
    r.field("m", params.m);
    itemized(
        &mut r,
        &[
            "empty",
            "1-commutative",
            "1-associative",
            "2-distributive",
            "2-inclusion",
            "3-monotone",
        ],
        results,
        Vec::new(),
    );
    Ok(r)
}

/// Per-item violation counts from trials that each return their failures.
fn itemized(
    r: &mut Report,
    items: &[&'static str],
    results: Vec<Vec<(&'static str, String)>>,
    fixed: Vec<(&'static str, String)>,
) {
    let mut first: BTreeMap<&str, String> = BTreeMap::new();
    let mut counts: BTreeMap<&str, usize> = items.iter().map(|i| (*i, 0)).collect();
    for v in std::iter::once(&fixed).chain(&results) {
        for (item, w) in v {
            *counts.entry(item).or_default() += 1;
            first.entry(item).or_insert_with(|| w.clone());
        }
    }
    r.field("trials", results.len());
    let mut total = 0;
    for item in items {
        r.field(format!("violations_{item}"), counts[item]);
        total += counts[item];
    }
    for item in items {
        if let Some(w) = first.get(item) {
            r.field(format!("first_violation_{item}"), w.clone());
        }
    }
    r.field("violations", total).require(total == 0);
}

fn accepts(x: &[DoubleGraph], d: &DoubleGraph) -> bool {
    x.iter().any(|e| e.subset_pm(d))
}

fn is_subset(a: &FixedBitSet, b: &FixedBitSet) -> bool {
    a.is_subset(b)
}

fn intersect(a: &FixedBitSet, b: &FixedBitSet) -> FixedBitSet {
    let mut out = a.clone();
    out.intersect_with(b);
    out
}

fn union(a: &FixedBitSet, b: &FixedBitSet) -> FixedBitSet {
    let mut out = a.clone();
    out.union_with(b);
    out
}

/// Acceptance under union, product and intersection. `AC` itself is checked
/// pointwise over every double graph on `[m]`.
pub fn lemma3(params: &Params, seed: u64, count: usize) -> Result<Report> {
    let index = EdgeIndex::new(params.m)?;
    let tests = TestSets::new(params)?;
    let universe = all_double_graphs(params.m, params.cap)?;
    let mut fixed: Vec<(&'static str, String)> = Vec::new();
    let empty = Family::new();
    if tests.ac_pos(&empty).count_ones(..) != 0 || tests.ac_neg(&empty).count_ones(..) != 0 {
        fixed.push(("1", "the empty family accepts a test".into()));
    }
    if let Some(d) = universe.iter().find(|d| !d.subset_pm(d)) {
        fixed.push(("2", format!("{d} does not accept itself")));
    }
    if tests.ac_pos(&tests.pos_family()) != tests.all_pos() {
        fixed.push(("2", "AC^p(POS2) differs from POS2".into()));
    }
    let neg_family: Family = tests.neg().graphs().iter().copied().collect();
    if tests.ac_neg(&neg_family) != tests.all_neg() {
        fixed.push(("2", "AC^n(NEG2) differs from NEG2".into()));
    }
    let results = trials(count, |t| {
        let mut rng = gen::trial_rng(seed, t);
        let x = gen::family(&mut rng, &index, 4, 4);
        let y = if rng.gen_bool(0.3) {
            x.union(&gen::family(&mut rng, &index, 2, 4))
        } else {
            gen::family(&mut rng, &index, 4, 4)
        };
        let (u, p, i) = (x.union(&y), product(&x, &y), x.intersection(&y));
        let (xv, yv, uv, pv, iv) = (x.to_vec(), y.to_vec(), u.to_vec(), p.to_vec(), i.to_vec());
        let ctx = || format!("X={} Y={}", fam(&x), fam(&y));
        let mut bad: Vec<(&'static str, String)> = Vec::new();
        let pointwise = universe.par_iter().find_first(|d| {
            let (ax, ay) = (accepts(&xv, d), accepts(&yv, d));
            accepts(&uv, d) != (ax || ay)
                || accepts(&pv, d) != (ax && ay)
                || (accepts(&iv, d) && !accepts(&pv, d))
        });
        if let Some(d) = pointwise {
            let (ax, ay) = (accepts(&xv, d), accepts(&yv, d));
            let item = if accepts(&uv, d) != (ax || ay) {
                "3a"
            } else {
                "4a"
            };
            bad.push((item, format!("{} D={d}", ctx())));
        }
        let (px, py, pu, pp, pi) = (
            tests.ac_pos(&x),
            tests.ac_pos(&y),
            tests.ac_pos(&u),
            tests.ac_pos(&p),
            tests.ac_pos(&i),
        );
        if pu != union(&px, &py) {
            bad.push(("3b", ctx()));
        }
        if pp != intersect(&px, &py) || !is_subset(&pi, &pp) {
            bad.push(("4b", ctx()));
        }
        let (nx, ny, nu, np, ni) = (
            tests.ac_neg(&x),
            tests.ac_neg(&y),
            tests.ac_neg(&u),
            tests.ac_neg(&p),
            tests.ac_neg(&i),
        );
        if nu != union(&nx, &ny) {
            bad.push(("3c", ctx()));
        }
        if !is_subset(&ni, &np) || !is_subset(&np, &intersect(&nx, &ny)) {
            bad.push(("4c", ctx()));
        }
        Ok(bad)
    })?;
    let mut r = Report::new("lemma3");
    r.field("m", params.m)
        .field("double_graphs", universe.len())
        .field("pos2", tests.pos().len())
        .field("neg2", tests.neg().len());
    itemized(
        &mut r,
        &["1", "2", "3a", "3b", "3c", "4a", "4b", "4c"],
        results,
        fixed,
    );
    Ok(r)
}

/// Families of `(p-1)^ell ell! + 1` distinct sets of size at most `ell` always
/// contain a sunflower with `p` petals.
pub fn lemma5(ell: usize, p: usize, seed: u64, count: usize) -> Result<Report> {
    let size = bounds::erdos_rado_threshold(p as u64, ell as u64);
    let size: usize = usize::try_from(&size)
        .map_err(|_| crate::Error::InvalidParams("threshold too large".into()))?
        + 1;
    // smallest universe with enough candidate sets
    let mut u = ell as u32;
    let pool = |u: u32| -> Vec<VertexSet> {
        (1u32..1 << u)
            .map(VertexSet::from_bits)
            .filter(|s| s.len() <= ell)
            .collect()
    };
    while pool(u).len() < 2 * size && u < crate::graphs::MAX_VERTICES {
        u += 1;
    }
    let candidates = pool(u);
    let results = trials(count, |t| {
        let mut rng = gen::trial_rng(seed, t);
        let sets: Vec<VertexSet> = candidates
            .choose_multiple(&mut rng, size)
            .copied()
            .collect();
        let ok = match find_sunflower(&sets, p) {
            Some(s) => {
                s.is_valid() && s.petals.len() == p && s.petals.iter().all(|x| sets.contains(x))
            }
            None => false,
        };
        let render: Vec<String> = sets.iter().map(ToString::to_string).collect();
        Ok((!ok).then(|| render.join(" ")))
    })?;
    let mut tally = Tally::default();
    results.into_iter().for_each(|w| tally.record(w));
    let mut r = Report::new("lemma5");
    r.field("ell", ell)
        .field("p", p)
        .field("sets", size)
        .field("universe", u);
    tally.write(&mut r, "");
    Ok(r)
}

/// Number of subsets of `[m]` with between 2 and `ell` elements.
fn sets_up_to(m: u32, ell: usize) -> usize {
    (2..=ell as i64)
        .map(|s| binomial(m as i64, s))
        .sum::<BigUint>()
        .try_into()
        .unwrap_or(usize::MAX)
}

/// Each plucking run takes at most `2 ||v(X)|| / (p-1)` steps, and each step
/// removes at least `p-1` vertex sets from the plucked side.
pub fn lemma7(params: &Params, seed: u64, count: usize) -> Result<Report> {
    let l: usize = usize::try_from(&params.threshold).unwrap_or(usize::MAX);
    let most = sets_up_to(params.m, params.ell);
    let config = PluckConfig::from_params(params);
    let results = trials(count, |t| {
        let mut rng = gen::trial_rng(seed, t);
        let lo = (l + 1).min(most);
        let hi = (2 * l).min(most).max(lo);
        let distinct = rng.gen_range(lo..=hi);
        let mut x = gen::wide_family(&mut rng, params.m, params.ell, distinct);
        if t % 2 == 1 {
            x = x
                .iter()
                .map(|d| DoubleGraph::new(d.neg(), d.pos()).expect("swapping keeps sides disjoint"))
                .collect();
        }
        let (out, trace) = pluck(&x, &config)?;
        let steps = trace.steps.len();
        let within = steps * (params.p - 1) <= 2 * trace.initial_norm;
        let shrinks = trace
            .steps
            .iter()
            .all(|s| s.count_before >= s.count_after + params.p - 1);
        let small = BigUint::from(crate::sunflower::vertex_norm(&out)) <= params.threshold;
        let witness = (!(within && shrinks && small)).then(|| {
            format!(
                "trial {t}: norm {} steps {steps} shrinks {shrinks} final_within_L {small}",
                trace.initial_norm
            )
        });
        Ok((steps, trace.initial_norm, witness))
    })?;
    let mut tally = Tally::default();
    let (mut total, mut max_steps, mut plucked) = (0, 0, 0);
    for (steps, _, w) in &results {
        total += steps;
        max_steps = max_steps.max(*steps);
        plucked += usize::from(*steps > 0);
        tally.record(w.clone());
    }
    let max_norm = results.iter().map(|r| r.1).max().unwrap_or(0);
    let mut r = Report::new("lemma7");
    r.field("m", params.m)
        .field("ell", params.ell)
        .field("p", params.p)
        .big("L", &params.threshold);
    r.field("runs_with_plucking", plucked)
        .field("total_steps", total)
        .field("max_steps", max_steps)
        .field("max_initial_norm", max_norm);
    tally.write(&mut r, "");
    Ok(r)
}

/// `X ⊔ Y` loses no positive test accepted by `X ∪ Y`. Small universes use
/// bounded random families; larger ones use wide families whose union
/// forces plucking.
pub fn lemma9(params: &Params, seed: u64, count: usize, positive_only: bool) -> Result<Report> {
    let tests = if positive_only {
        TestSets::positive_only(params)?
    } else {
        TestSets::new(params)?
    };
    let l: usize = usize::try_from(&params.threshold).unwrap_or(usize::MAX);
    let most = sets_up_to(params.m, params.ell);
    let wide = most > l;
    let bound = bounds::bound_expressions(params).join_neg;
    let results = trials(count, |t| {
        let mut rng = gen::trial_rng(seed, t);
        let (x, y) = if wide {
            let lo = (l / 2 + 1).min(l);
            let hi = l.min(most);
            let a = rng.gen_range(lo..=hi);
            let b = rng.gen_range(lo..=hi);
            (
                gen::wide_family(&mut rng, params.m, params.ell, a),
                gen::wide_family(&mut rng, params.m, params.ell, b),
            )
        } else {
            (
                gen::bounded_family(&mut rng, params, 8),
                gen::bounded_family(&mut rng, params, 8),
            )
        };
        let (approx, trace) = approx_join_traced(&x, &y, params)?;
        let u = x.union(&y);
        let lost = minus(&tests.ac_pos(&u), &tests.ac_pos(&approx));
        let fake = minus(&tests.ac_neg(&approx), &tests.ac_neg(&u)).count_ones(..);
        let witness = lost.ones().next().map(|i| {
            format!(
                "trial {t}: {} lost; X={} Y={}",
                tests.pos()[i],
                fam(&x),
                fam(&y)
            )
        });
        Ok((!trace.steps.is_empty(), fake, witness))
    })?;
    let mut tally = Tally::default();
    let triggered = results.iter().filter(|r| r.0).count();
    let fake_max = results.iter().map(|r| r.1).max().unwrap_or(0);
    let bound_holds = results
        .iter()
        .all(|r| num_rational::BigRational::from_integer(r.1.into()) < bound);
    for (_, _, w) in results {
        tally.record(w);
    }
    let mut r = Report::new("lemma9");
    r.field("m", params.m)
        .field("k", params.k)
        .field("ell", params.ell)
        .field("p", params.p)
        .big("L", &params.threshold);
    r.field("tests", if positive_only { "pos2" } else { "pos2+neg2" });
    r.field("pos2", tests.pos().len())
        .field("neg2", tests.neg().len());
    r.field("pluck_triggered", triggered);
    if !positive_only {
        r.field("join_neg_max", fake_max)
            .big("join_neg_bound", crate::bounds::fmt_rational(&bound))
            .field("join_neg_bound_holds", bound_holds)
            .field("bound_applicable", params.bound_applicable());
    }
    tally.write(&mut r, "join_pos_");
    Ok(r)
}

/// The four deviation inclusions at every binary subterm of random formulas.
pub fn lemma11(params: &Params, seed: u64, count: usize, max_nodes: usize) -> Result<Report> {
    let tests = TestSets::new(params)?;
    let n = params.n();
    let results = trials(count, |t| {
        let phi = gen::formula(&mut gen::trial_rng(seed, t), n, max_nodes);
        Ok((phi.to_string(), deviation_chains(&phi, &tests)?))
    })?;
    let mut all = ChainCheck::default();
    let mut first = None;
    for (phi, c) in results {
        if first.is_none() {
            if let Some(v) = c.violations.first() {
                first = Some(format!(
                    "item {} in {} of {phi}: {}",
                    v.item, v.subterm, v.witness
                ));
            }
        }
        all.absorb(c);
    }
    let mut r = Report::new("lemma11");
    r.field("m", params.m)
        .field("k", params.k)
        .field("formulas", count)
        .field("max_nodes", max_nodes);
    for (i, c) in all.checked.iter().enumerate() {
        r.field(format!("checked_item{}", i + 1), *c);
    }
    r.field("violations", all.violations.len());
    if let Some(w) = first {
        r.field("first_violation", w);
    }
    r.require(all.holds());
    Ok(r)
}

/// `‖φ‖ϑ = ‖S(φ)‖ϑ`. With at most ten variables every assignment of each of
/// `count` formulas is visited; otherwise `count` random formula and
/// assignment pairs are drawn.
pub fn lemma15(
    m: u32,
    seed: u64,
    count: usize,
    max_nodes: usize,
    sem: Semantics,
) -> Result<Report> {
    let index = EdgeIndex::new(m)?;
    let n = index.n();
    let mut r = Report::new("lemma15");
    r.field("m", m)
        .field("semantics", sem.to_string())
        .field("max_nodes", max_nodes);
    let mut tally = Tally::default();
    if n <= 10 {
        let results = trials(count, |t| {
            let phi = gen::formula(&mut gen::trial_rng(seed, t), n, max_nodes);
            let v = lemma15_compare(&phi, m, sem, Sampling::default())?;
            Ok(v.counterexample.map(|c| {
                format!(
                    "{phi} at {}: formula {} set {}",
                    c.assignment, c.left, c.right
                )
            }))
        })?;
        results.into_iter().for_each(|w| tally.record(w));
        r.field("mode", "exhaustive")
            .field("formulas", count)
            .field("assignments", 3u64.pow(n as u32) * count as u64);
    } else {
        let results = trials(count, |t| {
            let mut rng = gen::trial_rng(seed, t);
            let phi = gen::formula(&mut rng, n, max_nodes);
            let a = TriAssignment::random(&mut rng, n);
            let s = sem_set(&phi, &index)?;
            let (left, right) = (
                Compiled::new(&phi).eval(&a, sem),
                eval_setrep(&s, &a, &index, sem),
            );
            Ok((left != right).then(|| format!("{phi} at {a}: formula {left} set {right}")))
        })?;
        results.into_iter().for_each(|w| tally.record(w));
        r.field("mode", "sampled").field("pairs", count);
    }
    tally.write(&mut r, "");
    Ok(r)
}

/// The `⊆±`-minimal members of `CLIQ2` are exactly `POS2`.
pub fn lemma18(params: &Params) -> Result<Report> {
    let cliq = cliq2_family(params.m, params.k, params.cap)?;
    let b = base(&cliq);
    let pos = enum_pos2(params)?;
    let mut r = Report::new("lemma18");
    r.field("m", params.m)
        .field("k", params.k)
        .field("cliq2", cliq.len())
        .field("base", b.len())
        .field("pos2", pos.len());
    if let Some(d) = b.difference(&pos).iter().next() {
        r.field("extra_in_base", d.to_string());
    }
    if let Some(d) = pos.difference(&b).iter().next() {
        r.field("missing_from_base", d.to_string());
    }
    r.require(b == pos);
    Ok(r)
}

/// `X ∼ B(X)` and `X ≈ Y ⇒ B(X) = B(Y)` on random families. Half of the
/// pairs pad `X` with members above existing ones so `≈` holds.
pub fn lemma19(m: u32, seed: u64, count: usize, sem: Semantics) -> Result<Report> {
    let index = EdgeIndex::new(m)?;
    let results = trials(count, |t| {
        let mut rng = gen::trial_rng(seed, t);
        let x = gen::family(&mut rng, &index, 4, 3);
        let y = if t % 2 == 0 && !x.is_empty() {
            let mut y = x.clone();
            for _ in 0..rng.gen_range(1..=2) {
                let e = *x.to_vec().choose(&mut rng).expect("nonempty");
                if let Some(bigger) = e.merge(&gen::double_graph(&mut rng, &index, 2)) {
                    y.insert(bigger);
                }
            }
            y
        } else {
            gen::family(&mut rng, &index, 4, 3)
        };
        let rep = semantics::lemma19_check(&x, &y, m, sem)?;
        let flag = |k: &str| rep.get(k).and_then(|v| v.as_bool()).unwrap_or(false);
        let item1 = flag("x_sim_base_x") && flag("y_sim_base_y");
        let item2 = flag("implication_holds");
        let witness = rep
            .get("x_vs_base_witness")
            .or_else(|| rep.get("y_vs_base_witness"))
            .map(|w| w.as_str().unwrap_or_default().to_string());
        let ctx = format!("X={} Y={}", fam(&x), fam(&y));
        Ok((
            (!item1).then(|| format!("{ctx} at {}", witness.unwrap_or_default())),
            (!item2).then(|| ctx.clone()),
            flag("x_approx_y"),
        ))
    })?;
    let (mut t1, mut t2) = (Tally::default(), Tally::default());
    let approx = results.iter().filter(|r| r.2).count();
    for (a, b, _) in results {
        t1.record(a);
        t2.record(b);
    }
    let mut r = Report::new("lemma19");
    r.field("m", m)
        .field("semantics", sem.to_string())
        .field("approx_pairs", approx);
    t1.write(&mut r, "item1_");
    t2.write(&mut r, "item2_");
    Ok(r)
}

/// `F(POS2)`: the disjunction over `POS2` of each member's literal conjunction.
pub fn pos2_formula(tests: &TestSets) -> Result<DmnFormula> {
    formula_of_family(&tests.pos_family(), &EdgeIndex::new(tests.params().m)?)
}

pub fn lemma20(params: &Params, sem: Semantics) -> Result<Report> {
    let tests = TestSets::new(params)?;
    let phi = pos2_formula(&tests)?;
    let mut r = semantics::lemma20_check(&phi, &tests, sem)?;
    r.fields
        .insert(0, ("semantics".into(), sem.to_string().into()));
    Ok(r)
}

/// `B*` is negation-free except at variables, at most twice as large, and
/// computes the same function.
pub fn lemma22(seed: u64, count: usize, max_gates: usize, max_vars: usize) -> Result<Report> {
    let results = trials(count, |t| {
        let b = gen::circuit(&mut gen::trial_rng(seed, t), max_gates, max_vars);
        let star = demorgan_convert(&b);
        let vars = b.variables();
        let size_ok = star.size() <= 2 * b.size();
        let no_not = !star.has_negation();
        let n = vars.len();
        let mut differ = None;
        for bits in 0u32..1 << n {
            let value = |x: &str| {
                vars.iter()
                    .position(|v| v == x)
                    .map(|i| bits >> (n - 1 - i) & 1 == 1)
            };
            if b.eval_with(value)? != star.eval_with(value)? {
                differ = Some(bits);
                break;
            }
        }
        let witness = (!(size_ok && no_not && differ.is_none())).then(|| {
            format!(
                "B: {} | B*: {} | size {} -> {} | differs at {:?}",
                one_line(&b),
                one_line(&star),
                b.size(),
                star.size(),
                differ
            )
        });
        Ok((b.size(), star.size(), witness))
    })?;
    let mut tally = Tally::default();
    let worst = results
        .iter()
        .map(|r| r.1 as f64 / r.0 as f64)
        .fold(0.0, f64::max);
    let max_size = results.iter().map(|r| r.0).max().unwrap_or(0);
    for (_, _, w) in results {
        tally.record(w);
    }
    let mut r = Report::new("lemma22");
    r.field("circuits", count)
        .field("max_gates", max_gates)
        .field("max_vars", max_vars)
        .field("largest_circuit", max_size);
    r.field("worst_ratio", format!("{worst:.4}"));
    tally.write(&mut r, "");
    Ok(r)
}

/// The brute-force rail circuit for `CLIQ2`, its DMN translation `ψ`, and
/// agreement of both with the `in_cliq2` oracle.
pub fn theorem24(params: &Params, sem: Semantics) -> Result<Report> {
    let index = EdgeIndex::new(params.m)?;
    let n = index.n();
    let c = cliq2_rail_circuit(params)?;
    let psi = dmn_of_rail_circuit(&c, params.m)?;
    let compiled = Compiled::new(&psi);
    let k = params.k;
    let oracle = |t: &TriAssignment| {
        if in_cliq2(&t.graph(&index).expect("assignment graph"), k) {
            Tri::One
        } else {
            Tri::Zero
        }
    };
    let v = compare(
        n,
        Equivalence::Approx,
        Sampling::default(),
        |t| compiled.eval(t, sem),
        oracle,
    );
    let rail = compare(
        n,
        Equivalence::Sim,
        Sampling::default(),
        |t| {
            let beta = rail_of_tri(t);
            let out = c
                .eval_with(|x| beta.get(x))
                .expect("rail variables are in range");
            if out {
                Tri::One
            } else {
                Tri::Zero
            }
        },
        oracle,
    );
    let mut r = Report::new("theorem24");
    r.field("m", params.m)
        .field("k", params.k)
        .field("semantics", sem.to_string())
        .field("circuit_size", c.size())
        .field("psi_cs", psi.cs())
        .field("psi_approx_cliq2", v.equivalent)
        .field("rail_agrees", rail.equivalent)
        .field("coverage", v.describe());
    if let Some(cx) = &v.counterexample {
        r.field("psi_witness", cx.assignment.to_string());
    }
    if let Some(cx) = &rail.counterexample {
        r.field("rail_witness", cx.assignment.to_string());
    }
    r.require(v.equivalent && rail.equivalent);
    Ok(r)
}

/// Runs the two-case argument on `F(POS2)`.
pub fn theorem13(params: &Params) -> Result<Report> {
    let tests = TestSets::new(params)?;
    let phi = pos2_formula(&tests)?;
    theorem13_dichotomy(&phi, &tests)
}

/// The gate count of a rail circuit, exposed for size comparisons.
pub fn rail_circuit_size(params: &Params) -> Result<usize> {
    Ok(cliq2_rail_circuit(params)?.size())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(m: u32, k: usize, ell: usize, p: usize) -> Params {
        Params::new(m, k, ell, p).unwrap()
    }

    #[test]
    fn lemma1_small() {
        for (m, want) in [(4, 0), (5, 30), (6, 200)] {
            let r = lemma1(&Params::desk(m, 3).unwrap()).unwrap();
            assert!(r.passed(), "{}", r.to_text());
            assert_eq!(r.get("enumerated").unwrap(), want);
        }
        let r = lemma1(&Params::desk(6, 3).unwrap()).unwrap();
        assert_eq!(r.get("result").unwrap(), "enumerated=200 formula=200 PASS");
    }

    #[test]
    fn brute_force_matches_formula() {
        for m in 4..=9 {
            assert_eq!(
                BigUint::from(pos2_brute_force(m, 3)),
                bounds::pos2_count_formula(m as u64, 3)
            );
        }
    }

    #[test]
    fn small_suites_pass() {
        let p = params(5, 3, 2, 3);
        assert!(conditions23(&p, 1, 20).unwrap().passed());
        assert!(lemma5(2, 3, 1, 20).unwrap().passed());
        assert!(lemma22(1, 50, 15, 5).unwrap().passed());
        assert!(pigeonhole(&Params::desk(5, 3).unwrap()).unwrap().passed());
    }

    #[test]
    fn lemma7_counts_steps() {
        let r = lemma7(&params(12, 5, 3, 4), 3, 4).unwrap();
        assert!(r.passed(), "{}", r.to_text());
        assert!(r.get("runs_with_plucking").unwrap().as_u64().unwrap() > 0);
    }

    #[test]
    fn deterministic_reports() {
        let p = params(5, 3, 2, 3);
        assert_eq!(
            lemma9(&p, 5, 6, false).unwrap(),
            lemma9(&p, 5, 6, false).unwrap()
        );
    }
}
