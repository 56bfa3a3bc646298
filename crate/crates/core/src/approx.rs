//! Products, accepted tests, the approximators ⊔/⊓ and their deviations.

use std::fmt;

use fixedbitset::FixedBitSet;
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{self, fmt_rational};
use crate::double_tests::{enum_neg2, enum_pos2, ColoringPair, NegTests};
use crate::error::{Error, Result};
use crate::family::Family;
use crate::graphs::DoubleGraph;
use crate::params::Params;
use crate::sunflower::{pluck, vertex_norm, PluckConfig, PluckTrace};

/// `X ⊙ Y`, clashing merges dropped.
pub fn product(x: &Family, y: &Family) -> Family {
    let ys = y.to_vec();
    x.to_vec()
        .par_iter()
        .flat_map_iter(|d| ys.iter().filter_map(move |e| d.merge(e)))
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

/// `X ⊙^ℓ Y`: like [`product`] but results outside `D^ℓ` are dropped too.
pub fn product_bounded(x: &Family, y: &Family, ell: usize) -> Family {
    let ys = y.to_vec();
    x.to_vec()
        .par_iter()
        .flat_map_iter(|d| ys.iter().filter_map(move |e| d.merge_bounded(e, ell)))
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

/// `X ⊩± D`.
pub fn accepts_pm(x: &Family, d: &DoubleGraph) -> bool {
    x.iter().any(|e| e.subset_pm(d))
}

/// `X ⊩∓ C`.
pub fn accepts_mp(x: &Family, c: &DoubleGraph) -> bool {
    x.iter().any(|e| e.subset_mp(c))
}

/// POS2 and NEG2 enumerated once for a parameter set. Acceptance sets are
/// bitsets over the enumeration order.
#[derive(Clone, Debug)]
pub struct TestSets {
    params: Params,
    pos: Vec<DoubleGraph>,
    neg: NegTests,
}

impl TestSets {
    pub fn new(params: &Params) -> Result<TestSets> {
        let pos = enum_pos2(params)?.to_vec();
        let neg = enum_neg2(params)?;
        Ok(TestSets {
            params: params.clone(),
            pos,
            neg,
        })
    }

    /// `POS2` only; the negative side is left empty.
    pub fn positive_only(params: &Params) -> Result<TestSets> {
        let pos = enum_pos2(params)?.to_vec();
        Ok(TestSets {
            params: params.clone(),
            pos,
            neg: NegTests::default(),
        })
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn pos(&self) -> &[DoubleGraph] {
        &self.pos
    }

    pub fn neg(&self) -> &NegTests {
        &self.neg
    }

    pub fn pos_family(&self) -> Family {
        self.pos.iter().copied().collect()
    }

    pub fn all_pos(&self) -> FixedBitSet {
        full(self.pos.len())
    }

    pub fn all_neg(&self) -> FixedBitSet {
        full(self.neg.len())
    }

    pub fn ac_pos(&self, x: &Family) -> FixedBitSet {
        let members = x.to_vec();
        let hits: Vec<usize> = (0..self.pos.len())
            .into_par_iter()
            .filter(|&i| members.iter().any(|e| e.subset_pm(&self.pos[i])))
            .collect();
        bits(self.pos.len(), hits)
    }

    pub fn ac_neg(&self, x: &Family) -> FixedBitSet {
        let members = x.to_vec();
        let graphs = self.neg.graphs();
        let hits: Vec<usize> = (0..graphs.len())
            .into_par_iter()
            .filter(|&i| members.iter().any(|e| e.subset_mp(&graphs[i])))
            .collect();
        bits(graphs.len(), hits)
    }

    pub fn pos_members(&self, set: &FixedBitSet) -> Family {
        set.ones().map(|i| self.pos[i]).collect()
    }

    pub fn neg_members(&self, set: &FixedBitSet) -> Vec<ColoringPair> {
        set.ones().map(|i| self.neg.pair(i).clone()).collect()
    }
}

fn full(n: usize) -> FixedBitSet {
    let mut b = FixedBitSet::with_capacity(n);
    b.insert_range(..);
    b
}

fn bits(n: usize, ones: Vec<usize>) -> FixedBitSet {
    let mut b = FixedBitSet::with_capacity(n);
    for i in ones {
        b.insert(i);
    }
    b
}

/// `A ∖ B` on acceptance bitsets.
pub fn minus(a: &FixedBitSet, b: &FixedBitSet) -> FixedBitSet {
    let mut out = a.clone();
    out.difference_with(b);
    out
}

/// Whether `X ∈ ℘_L D^ℓ`.
pub fn check_bounded(x: &Family, params: &Params, what: &str) -> Result<()> {
    if let Some(bad) = x.iter().find(|d| d.vertex_norm() > params.ell) {
        return Err(Error::Precondition(format!(
            "{what}: member {bad} has more than ell = {} vertices on one side",
            params.ell
        )));
    }
    let norm = vertex_norm(x);
    if BigUint::from(norm) > params.threshold {
        return Err(Error::Precondition(format!(
            "{what}: ||v(X)|| = {norm} exceeds L = {}",
            params.threshold
        )));
    }
    Ok(())
}

/// `X ⊔ Y = PL(X ∪ Y)` with its plucking trace.
pub fn approx_join_traced(x: &Family, y: &Family, params: &Params) -> Result<(Family, PluckTrace)> {
    check_bounded(x, params, "left operand")?;
    check_bounded(y, params, "right operand")?;
    pluck(&x.union(y), &PluckConfig::from_params(params))
}

/// `X ⊓ Y = PL(X ⊙^ℓ Y)` with its plucking trace.
pub fn approx_meet_traced(x: &Family, y: &Family, params: &Params) -> Result<(Family, PluckTrace)> {
    check_bounded(x, params, "left operand")?;
    check_bounded(y, params, "right operand")?;
    pluck(
        &product_bounded(x, y, params.ell),
        &PluckConfig::from_params(params),
    )
}

pub fn approx_join(x: &Family, y: &Family, params: &Params) -> Result<Family> {
    approx_join_traced(x, y, params).map(|(f, _)| f)
}

pub fn approx_meet(x: &Family, y: &Family, params: &Params) -> Result<Family> {
    approx_meet_traced(x, y, params).map(|(f, _)| f)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeviationKind {
    JoinPos,
    JoinNeg,
    MeetPos,
    MeetNeg,
}

impl DeviationKind {
    pub const ALL: [DeviationKind; 4] = [
        DeviationKind::JoinPos,
        DeviationKind::JoinNeg,
        DeviationKind::MeetPos,
        DeviationKind::MeetNeg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DeviationKind::JoinPos => "join-pos",
            DeviationKind::JoinNeg => "join-neg",
            DeviationKind::MeetPos => "meet-pos",
            DeviationKind::MeetNeg => "meet-neg",
        }
    }

    pub fn is_positive(self) -> bool {
        matches!(self, DeviationKind::JoinPos | DeviationKind::MeetPos)
    }
}

impl fmt::Display for DeviationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for DeviationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<DeviationKind> {
        DeviationKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown deviation kind `{s}`")))
    }
}

/// How a measured count is compared with its bound.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundRelation {
    /// `count < bound`
    Below,
    /// `count <= bound`
    AtMost,
}

impl BoundRelation {
    pub fn holds(self, count: &BigUint, bound: &BigRational) -> bool {
        let c = BigRational::from_integer(count.clone().into());
        match self {
            BoundRelation::Below => &c < bound,
            BoundRelation::AtMost => &c <= bound,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BoundRelation::Below => "<",
            BoundRelation::AtMost => "<=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DeviationMembers {
    Pos(Family),
    Neg(Vec<ColoringPair>),
}

impl DeviationMembers {
    pub fn len(&self) -> usize {
        match self {
            DeviationMembers::Pos(f) => f.len(),
            DeviationMembers::Neg(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn lines(&self) -> Vec<String> {
        match self {
            DeviationMembers::Pos(f) => f.iter().map(ToString::to_string).collect(),
            DeviationMembers::Neg(v) => v.iter().map(ToString::to_string).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeviationReport {
    pub kind: DeviationKind,
    pub members: DeviationMembers,
    pub count: BigUint,
    pub bound: BigRational,
    pub relation: BoundRelation,
    pub bound_applicable: bool,
    /// Some binomial in the bound was out of range and evaluated to 0.
    pub degenerate: bool,
}

impl DeviationReport {
    pub fn bound_holds(&self) -> bool {
        self.relation.holds(&self.count, &self.bound)
    }
}

impl fmt::Display for DeviationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "kind = {}", self.kind)?;
        writeln!(f, "count = {}", self.count)?;
        writeln!(
            f,
            "bound = {} {}",
            self.relation.symbol(),
            fmt_rational(&self.bound)
        )?;
        writeln!(f, "bound_applicable = {}", self.bound_applicable)?;
        writeln!(f, "bound_degenerate = {}", self.degenerate)?;
        writeln!(f, "bound_holds = {}", self.bound_holds())?;
        for line in self.members.lines() {
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

/// Acceptance bitset of one deviation kind, before it is wrapped in a report.
pub fn deviation_set(
    kind: DeviationKind,
    x: &Family,
    y: &Family,
    tests: &TestSets,
) -> Result<FixedBitSet> {
    let params = tests.params();
    Ok(match kind {
        DeviationKind::JoinPos => {
            let approx = approx_join(x, y, params)?;
            minus(&tests.ac_pos(&x.union(y)), &tests.ac_pos(&approx))
        }
        DeviationKind::JoinNeg => {
            let approx = approx_join(x, y, params)?;
            minus(&tests.ac_neg(&approx), &tests.ac_neg(&x.union(y)))
        }
        DeviationKind::MeetPos => {
            let approx = approx_meet(x, y, params)?;
            minus(&tests.ac_pos(&product(x, y)), &tests.ac_pos(&approx))
        }
        DeviationKind::MeetNeg => {
            let approx = approx_meet(x, y, params)?;
            minus(&tests.ac_neg(&approx), &tests.ac_neg(&product(x, y)))
        }
    })
}

/// The deviation of one approximator step together with its bound.
pub fn deviation(
    kind: DeviationKind,
    x: &Family,
    y: &Family,
    tests: &TestSets,
) -> Result<DeviationReport> {
    let set = deviation_set(kind, x, y, tests)?;
    Ok(wrap_deviation(kind, &set, tests))
}

pub(crate) fn wrap_deviation(
    kind: DeviationKind,
    set: &FixedBitSet,
    tests: &TestSets,
) -> DeviationReport {
    let params = tests.params();
    let b = bounds::bound_expressions(params);
    let (bound, relation, degenerate) = match kind {
        DeviationKind::JoinPos => (BigRational::zero(), BoundRelation::AtMost, false),
        DeviationKind::JoinNeg => (b.join_neg, BoundRelation::Below, false),
        DeviationKind::MeetPos => (
            BigRational::from_integer(b.meet_pos.into()),
            BoundRelation::AtMost,
            b.meet_pos_degenerate,
        ),
        DeviationKind::MeetNeg => (b.meet_neg, BoundRelation::Below, false),
    };
    let members = if kind.is_positive() {
        DeviationMembers::Pos(tests.pos_members(set))
    } else {
        DeviationMembers::Neg(tests.neg_members(set))
    };
    DeviationReport {
        kind,
        count: BigUint::from(members.len()),
        members,
        bound,
        relation,
        // the join-pos claim is unconditional
        bound_applicable: kind == DeviationKind::JoinPos || params.bound_applicable(),
        degenerate,
    }
}
