//! Three-valued semantics over partial edge assignments, the `∼`/`≈`
//! equivalences and the base operator.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::approx::TestSets;
use crate::double_tests::in_cliq2;
use crate::error::{Error, Result};
use crate::family::Family;
use crate::formula::{sem_set, DmnFormula, Node, SetRep};
use crate::graphs::{DoubleGraph, EdgeIndex, PlainGraph};
use crate::params::Params;
use crate::report::Report;

/// Largest exhaustive assignment space, `3^15`.
pub const EXHAUSTIVE_LIMIT: u64 = 14_348_907;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tri {
    Zero,
    One,
    Unknown,
}

impl Tri {
    pub fn symbol(self) -> char {
        match self {
            Tri::Zero => '0',
            Tri::One => '1',
            Tri::Unknown => '?',
        }
    }

    fn not(self) -> Tri {
        match self {
            Tri::Zero => Tri::One,
            Tri::One => Tri::Zero,
            Tri::Unknown => Tri::Unknown,
        }
    }

    fn from_digit(d: u64) -> Tri {
        match d {
            0 => Tri::Zero,
            1 => Tri::One,
            _ => Tri::Unknown,
        }
    }
}

impl fmt::Display for Tri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Which table to use for `□ ∨ 0`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Semantics {
    /// `□ ∨ 0 = 0`, as tabulated.
    #[default]
    Absorbing,
    /// `□ ∨ 0 = □`.
    Kleene,
}

impl FromStr for Semantics {
    type Err = Error;

    fn from_str(s: &str) -> Result<Semantics> {
        match s {
            "absorbing" => Ok(Semantics::Absorbing),
            "kleene" => Ok(Semantics::Kleene),
            other => Err(Error::InvalidParams(format!(
                "unknown semantics '{other}' (absorbing|kleene)"
            ))),
        }
    }
}

impl fmt::Display for Semantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Semantics::Absorbing => "absorbing",
            Semantics::Kleene => "kleene",
        })
    }
}

fn or_values<I: IntoIterator<Item = Tri>>(values: I, sem: Semantics) -> Tri {
    let (mut zero, mut unknown) = (false, false);
    for v in values {
        match v {
            Tri::One => return Tri::One,
            Tri::Zero => zero = true,
            Tri::Unknown => unknown = true,
        }
    }
    match sem {
        Semantics::Absorbing if zero => Tri::Zero,
        Semantics::Absorbing if unknown => Tri::Unknown,
        Semantics::Kleene if unknown => Tri::Unknown,
        _ => Tri::Zero,
    }
}

fn and_values<I: IntoIterator<Item = Tri>>(values: I) -> Tri {
    let mut unknown = false;
    for v in values {
        match v {
            Tri::Zero => return Tri::Zero,
            Tri::Unknown => unknown = true,
            Tri::One => {}
        }
    }
    if unknown {
        Tri::Unknown
    } else {
        Tri::One
    }
}

/// `ϑ : [n] → {0, 1, □}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TriAssignment(Vec<Tri>);

impl TriAssignment {
    pub fn new(values: Vec<Tri>) -> TriAssignment {
        TriAssignment(values)
    }

    pub fn undefined(n: usize) -> TriAssignment {
        TriAssignment(vec![Tri::Unknown; n])
    }

    pub fn values(&self) -> &[Tri] {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    /// Value of variable `i`, 1-based.
    pub fn get(&self, i: u32) -> Tri {
        self.0[i as usize - 1]
    }

    pub fn set(&mut self, i: u32, v: Tri) {
        self.0[i as usize - 1] = v;
    }

    /// The `code`-th assignment of `3^n`, variable 1 most significant, digits
    /// `0, 1, □` in that order.
    pub fn from_code(mut code: u64, n: usize) -> TriAssignment {
        let mut v = vec![Tri::Zero; n];
        for slot in v.iter_mut().rev() {
            *slot = Tri::from_digit(code % 3);
            code /= 3;
        }
        TriAssignment(v)
    }

    pub fn random<R: Rng>(rng: &mut R, n: usize) -> TriAssignment {
        TriAssignment(
            (0..n)
                .map(|_| Tri::from_digit(rng.gen_range(0..3)))
                .collect(),
        )
    }

    /// The characteristic assignment of `d`: 1 on `D+`, 0 on `D-`, □ elsewhere.
    pub fn of_graph(d: &DoubleGraph, index: &EdgeIndex) -> Result<TriAssignment> {
        let mut t = TriAssignment::undefined(index.n());
        for i in index.indices(d.pos())? {
            t.0[i - 1] = Tri::One;
        }
        for j in index.indices(d.neg())? {
            t.0[j - 1] = Tri::Zero;
        }
        Ok(t)
    }

    /// `D[ϑ]`.
    pub fn graph(&self, index: &EdgeIndex) -> Result<DoubleGraph> {
        let pick = |want: Tri| -> Result<PlainGraph> {
            let mut g = PlainGraph::EMPTY;
            for (i, v) in self.0.iter().enumerate() {
                if *v == want {
                    g.insert(index.edge_of_index(i + 1)?);
                }
            }
            Ok(g)
        };
        DoubleGraph::new(pick(Tri::One)?, pick(Tri::Zero)?)
    }

    /// Parses `i=0|1|?` items separated by commas; missing indices are □.
    pub fn parse(text: &str, n: usize) -> Result<TriAssignment> {
        let mut t = TriAssignment::undefined(n);
        let mut column = 1;
        for item in text.split(',') {
            let trimmed = item.trim();
            if !trimmed.is_empty() {
                let err = |msg: String| Error::parse(1, column, msg);
                let (k, v) = trimmed
                    .split_once('=')
                    .ok_or_else(|| err(format!("expected i=0|1|?, got '{trimmed}'")))?;
                let i: usize = k
                    .trim()
                    .parse()
                    .map_err(|_| err(format!("bad index '{}'", k.trim())))?;
                if i == 0 || i > n {
                    return Err(err(format!("index {i} outside 1..={n}")));
                }
                t.0[i - 1] = match v.trim() {
                    "0" => Tri::Zero,
                    "1" => Tri::One,
                    "?" => Tri::Unknown,
                    other => return Err(err(format!("bad value '{other}'"))),
                };
            }
            column += item.len() + 1;
        }
        Ok(t)
    }
}

impl fmt::Display for TriAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}={}", i + 1, v)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
enum Op {
    Const(Tri),
    Lit(usize, bool),
    Or(Vec<usize>),
    And(Vec<usize>),
}

/// A formula flattened into maximal same-connective spines, ready for
/// repeated evaluation.
#[derive(Clone, Debug)]
pub struct Compiled {
    ops: Vec<Op>,
    n_vars: u32,
}

fn spine(f: &DmnFormula, or: bool) -> Vec<DmnFormula> {
    let mut out = Vec::new();
    let mut stack = vec![f.clone()];
    while let Some(g) = stack.pop() {
        match (g.node(), or) {
            (Node::Or(a, b), true) | (Node::And(a, b), false) => {
                stack.push(b.clone());
                stack.push(a.clone());
            }
            _ => out.push(g),
        }
    }
    out
}

impl Compiled {
    pub fn new(phi: &DmnFormula) -> Compiled {
        let mut ops: Vec<Op> = Vec::new();
        let mut slot: HashMap<u64, usize> = HashMap::new();
        let mut lists: HashMap<u64, Vec<DmnFormula>> = HashMap::new();
        let mut stack = vec![(phi.clone(), false)];
        while let Some((f, ready)) = stack.pop() {
            if slot.contains_key(&f.id()) {
                continue;
            }
            let op = match f.node() {
                Node::Top => Op::Const(Tri::One),
                Node::Bot => Op::Const(Tri::Zero),
                Node::Pos(i) => Op::Lit(*i as usize - 1, true),
                Node::Neg(i) => Op::Lit(*i as usize - 1, false),
                Node::Or(..) | Node::And(..) => {
                    let or = matches!(f.node(), Node::Or(..));
                    if !ready {
                        let items = spine(&f, or);
                        stack.push((f.clone(), true));
                        for c in items.iter().rev() {
                            stack.push((c.clone(), false));
                        }
                        lists.insert(f.id(), items);
                        continue;
                    }
                    let items = lists.remove(&f.id()).expect("spine recorded");
                    if !or && contradictory(&items) {
                        Op::Const(Tri::Zero)
                    } else {
                        let idx = items.iter().map(|c| slot[&c.id()]).collect();
                        if or {
                            Op::Or(idx)
                        } else {
                            Op::And(idx)
                        }
                    }
                }
            };
            slot.insert(f.id(), ops.len());
            ops.push(op);
        }
        Compiled {
            ops,
            n_vars: phi.max_var(),
        }
    }

    pub fn eval(&self, t: &TriAssignment, sem: Semantics) -> Tri {
        let mut vals = Vec::with_capacity(self.ops.len());
        for op in &self.ops {
            let v = match op {
                Op::Const(v) => *v,
                Op::Lit(i, pos) => {
                    let v = t.0[*i];
                    if *pos {
                        v
                    } else {
                        v.not()
                    }
                }
                Op::Or(c) => or_values(c.iter().map(|&i| vals[i]), sem),
                Op::And(c) => and_values(c.iter().map(|&i| vals[i])),
            };
            vals.push(v);
        }
        *vals.last().expect("nonempty")
    }

    pub fn check_vars(&self, n: usize) -> Result<()> {
        if self.n_vars as usize > n {
            return Err(Error::UnknownVariable(format!(
                "v{} (only {n} variables)",
                self.n_vars
            )));
        }
        Ok(())
    }
}

/// A conjunction list holding both `v_i` and `¬v_i`.
fn contradictory(items: &[DmnFormula]) -> bool {
    let pos: Vec<u32> = items
        .iter()
        .filter_map(|f| {
            if let Node::Pos(i) = f.node() {
                Some(*i)
            } else {
                None
            }
        })
        .collect();
    items
        .iter()
        .any(|f| matches!(f.node(), Node::Neg(i) if pos.contains(i)))
}

/// `‖φ‖ϑ`.
pub fn eval(phi: &DmnFormula, t: &TriAssignment, sem: Semantics) -> Result<Tri> {
    let c = Compiled::new(phi);
    c.check_vars(t.n())?;
    Ok(c.eval(t, sem))
}

/// `‖D‖ϑ` for a double graph.
pub fn eval_graph(d: &DoubleGraph, t: &TriAssignment, index: &EdgeIndex) -> Tri {
    let lits = d
        .pos()
        .edges()
        .map(|e| t.get(index.index_of_edge(e).expect("edge within m") as u32))
        .chain(d.neg().edges().map(|e| {
            t.get(index.index_of_edge(e).expect("edge within m") as u32)
                .not()
        }));
    and_values(lits)
}

/// `‖X‖ϑ`, evaluated member by member; `⊤` is 1.
pub fn eval_setrep(x: &SetRep, t: &TriAssignment, index: &EdgeIndex, sem: Semantics) -> Tri {
    match x {
        SetRep::Top => Tri::One,
        SetRep::Fam(f) => or_values(f.iter().map(|d| eval_graph(d, t, index)), sem),
    }
}

/// `F(G)`.
pub fn formula_of_plain(g: PlainGraph, index: &EdgeIndex) -> Result<DmnFormula> {
    let idx = index.indices(g)?;
    Ok(DmnFormula::and_all(
        idx.into_iter().map(|i| DmnFormula::var(i as u32)),
    ))
}

/// `F(D)`.
pub fn formula_of_graph(d: &DoubleGraph, index: &EdgeIndex) -> Result<DmnFormula> {
    let pos = index
        .indices(d.pos())?
        .into_iter()
        .map(|i| DmnFormula::var(i as u32));
    let neg = index
        .indices(d.neg())?
        .into_iter()
        .map(|j| DmnFormula::neg_var(j as u32));
    Ok(DmnFormula::and_all(pos.chain(neg)))
}

/// `F(X)`.
pub fn formula_of_family(x: &Family, index: &EdgeIndex) -> Result<DmnFormula> {
    let parts = x
        .iter()
        .map(|d| formula_of_graph(d, index))
        .collect::<Result<Vec<_>>>()?;
    Ok(DmnFormula::or_all(parts))
}

pub fn formula_of_setrep(x: &SetRep, index: &EdgeIndex) -> Result<DmnFormula> {
    match x {
        SetRep::Top => Ok(DmnFormula::top()),
        SetRep::Fam(f) => formula_of_family(f, index),
    }
}

/// `∼` compares every value, `≈` only the value-1 fibers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Equivalence {
    Sim,
    Approx,
}

impl Equivalence {
    fn agree(self, a: Tri, b: Tri) -> bool {
        match self {
            Equivalence::Sim => a == b,
            Equivalence::Approx => (a == Tri::One) == (b == Tri::One),
        }
    }
}

/// How many assignments to draw when the space is too large.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Sampling {
    pub seed: u64,
    pub samples: u64,
}

impl Default for Sampling {
    fn default() -> Sampling {
        Sampling {
            seed: 0,
            samples: 100_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub assignment: TriAssignment,
    pub left: Tri,
    pub right: Tri,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivVerdict {
    pub equivalent: bool,
    pub checked: u64,
    /// `None` when every assignment was visited.
    pub sampled: Option<Sampling>,
    pub counterexample: Option<Counterexample>,
}

impl EquivVerdict {
    pub fn describe(&self) -> String {
        match self.sampled {
            None => format!("exhaustive, {} assignments", self.checked),
            Some(s) => format!("sampled, seed {}, {} samples", s.seed, s.samples),
        }
    }
}

/// Compares two evaluators on every assignment of `[n]` when `3^n` is within
/// the exhaustive limit, otherwise on seeded samples. The reported
/// counterexample is the least one found.
pub fn compare<A, B>(
    n: usize,
    relation: Equivalence,
    sampling: Sampling,
    left: A,
    right: B,
) -> EquivVerdict
where
    A: Fn(&TriAssignment) -> Tri + Sync,
    B: Fn(&TriAssignment) -> Tri + Sync,
{
    let total = 3u64
        .checked_pow(n as u32)
        .filter(|t| *t <= EXHAUSTIVE_LIMIT);
    let check = |t: TriAssignment| {
        let (l, r) = (left(&t), right(&t));
        (!relation.agree(l, r)).then_some(Counterexample {
            assignment: t,
            left: l,
            right: r,
        })
    };
    match total {
        Some(total) => {
            let cx = (0..total)
                .into_par_iter()
                .find_map_first(|c| check(TriAssignment::from_code(c, n)));
            EquivVerdict {
                equivalent: cx.is_none(),
                checked: total,
                sampled: None,
                counterexample: cx,
            }
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed);
            let draws: Vec<TriAssignment> = (0..sampling.samples)
                .map(|_| TriAssignment::random(&mut rng, n))
                .collect();
            let cx = draws
                .into_par_iter()
                .filter_map(check)
                .min_by(|a, b| a.assignment.cmp(&b.assignment));
            EquivVerdict {
                equivalent: cx.is_none(),
                checked: sampling.samples,
                sampled: Some(sampling),
                counterexample: cx,
            }
        }
    }
}

/// `φ ∼ ψ` or `φ ≈ ψ` over the `n = m(m-1)/2` edge variables.
pub fn equiv_formulas(
    a: &DmnFormula,
    b: &DmnFormula,
    m: u32,
    relation: Equivalence,
    sem: Semantics,
    sampling: Sampling,
) -> Result<EquivVerdict> {
    let n = EdgeIndex::new(m)?.n();
    let (ca, cb) = (Compiled::new(a), Compiled::new(b));
    ca.check_vars(n)?;
    cb.check_vars(n)?;
    Ok(compare(
        n,
        relation,
        sampling,
        |t| ca.eval(t, sem),
        |t| cb.eval(t, sem),
    ))
}

pub fn equiv_sim(a: &DmnFormula, b: &DmnFormula, m: u32, sem: Semantics) -> Result<EquivVerdict> {
    equiv_formulas(a, b, m, Equivalence::Sim, sem, Sampling::default())
}

pub fn equiv_approx(
    a: &DmnFormula,
    b: &DmnFormula,
    m: u32,
    sem: Semantics,
) -> Result<EquivVerdict> {
    equiv_formulas(a, b, m, Equivalence::Approx, sem, Sampling::default())
}

/// `∼` or `≈` between two families.
pub fn equiv_families(
    x: &Family,
    y: &Family,
    m: u32,
    relation: Equivalence,
    sem: Semantics,
) -> Result<EquivVerdict> {
    let index = EdgeIndex::new(m)?;
    for d in x.iter().chain(y.iter()) {
        index.check(d)?;
    }
    let (sx, sy) = (SetRep::Fam(x.clone()), SetRep::Fam(y.clone()));
    Ok(compare(
        index.n(),
        relation,
        Sampling::default(),
        |t| eval_setrep(&sx, t, &index, sem),
        |t| eval_setrep(&sy, t, &index, sem),
    ))
}

/// `B(X)`: the `⊆±`-minimal members of `X`.
pub fn base(x: &Family) -> Family {
    let mut members: Vec<DoubleGraph> = x.iter().copied().collect();
    members.sort_by_key(DoubleGraph::edge_count);
    let mut mins: Vec<DoubleGraph> = Vec::new();
    for d in members {
        // anything strictly below d has fewer edges, so it is already in mins
        if !mins.iter().any(|e| e.subset_pm(&d)) {
            mins.push(d);
        }
    }
    mins.into_iter().collect()
}

/// Every double graph over `[m]`, in assignment-code order.
pub fn all_double_graphs(m: u32, cap: u64) -> Result<Vec<DoubleGraph>> {
    let index = EdgeIndex::new(m)?;
    let n = index.n();
    let total = 3u64
        .checked_pow(n as u32)
        .filter(|t| *t <= cap)
        .ok_or_else(|| Error::CapExceeded {
            what: "double graphs".into(),
            needed: format!("3^{n}"),
            cap,
        })?;
    (0..total)
        .into_par_iter()
        .map(|c| TriAssignment::from_code(c, n).graph(&index))
        .collect()
}

/// `CLIQ2` materialized over all double graphs at `m`.
pub fn cliq2_family(m: u32, k: usize, cap: u64) -> Result<Family> {
    Ok(all_double_graphs(m, cap)?
        .into_iter()
        .filter(|d| in_cliq2(d, k))
        .collect())
}

/// `X ∼ B(X)`, and `X ≈ Y ⇒ B(X) = B(Y)`.
pub fn lemma19_check(x: &Family, y: &Family, m: u32, sem: Semantics) -> Result<Report> {
    let (bx, by) = (base(x), base(y));
    let sim_x = equiv_families(x, &bx, m, Equivalence::Sim, sem)?;
    let sim_y = equiv_families(y, &by, m, Equivalence::Sim, sem)?;
    let approx = equiv_families(x, y, m, Equivalence::Approx, sem)?;
    let bases_equal = bx == by;
    let implication = !approx.equivalent || bases_equal;
    let mut r = Report::new("lemma19");
    r.field("x_sim_base_x", sim_x.equivalent)
        .field("y_sim_base_y", sim_y.equivalent)
        .field("x_approx_y", approx.equivalent)
        .field("bases_equal", bases_equal)
        .field("implication_holds", implication)
        .field("coverage", approx.describe());
    for (name, v) in [("x_vs_base", &sim_x), ("y_vs_base", &sim_y)] {
        if let Some(c) = &v.counterexample {
            r.field(
                format!("{name}_witness"),
                format!("{} ({} vs {})", c.assignment, c.left, c.right),
            );
        }
    }
    r.require(sim_x.equivalent && sim_y.equivalent && implication);
    Ok(r)
}

/// Checks `φ ≈ CLIQ2` against the `in_cliq2` oracle, then
/// `AC^p(φ) = POS2` and `AC^n(φ) = ∅`.
pub fn lemma20_check(phi: &DmnFormula, tests: &TestSets, sem: Semantics) -> Result<Report> {
    let params: &Params = tests.params();
    let index = EdgeIndex::new(params.m)?;
    let n = index.n();
    let c = Compiled::new(phi);
    c.check_vars(n)?;
    let k = params.k;
    let v = compare(
        n,
        Equivalence::Approx,
        Sampling::default(),
        |t| c.eval(t, sem),
        |t| {
            if in_cliq2(&t.graph(&index).expect("assignment graph"), k) {
                Tri::One
            } else {
                Tri::Zero
            }
        },
    );
    let s = sem_set(phi, &index)?;
    let ac_pos = s.ac_pos(tests);
    let ac_neg = s.ac_neg(tests);
    let pos_all = ac_pos.count_ones(..) == tests.pos().len();
    let neg_none = ac_neg.count_ones(..) == 0;
    let mut r = Report::new("lemma20");
    r.field("formula_cs", phi.cs())
        .field("approx_cliq2", v.equivalent)
        .field("coverage", v.describe());
    if let Some(cx) = &v.counterexample {
        r.field("premise_witness", cx.assignment.to_string())
            .field(
                "premise_witness_graph",
                cx.assignment.graph(&index)?.to_string(),
            )
            .field("premise_witness_value", cx.left.to_string());
    }
    r.field("pos2", tests.pos().len())
        .field("ac_pos", ac_pos.count_ones(..))
        .field("ac_pos_equals_pos2", pos_all)
        .field("ac_neg", ac_neg.count_ones(..))
        .field("ac_neg_empty", neg_none);
    if let Some(i) = ac_neg.ones().next() {
        r.field("ac_neg_witness", tests.neg().pair(i).to_string());
    }
    r.require(v.equivalent && pos_all && neg_none);
    Ok(r)
}

/// `‖φ‖ϑ = ‖S(φ)‖ϑ` on every assignment (or seeded samples).
pub fn lemma15_compare(
    phi: &DmnFormula,
    m: u32,
    sem: Semantics,
    sampling: Sampling,
) -> Result<EquivVerdict> {
    let index = EdgeIndex::new(m)?;
    let c = Compiled::new(phi);
    c.check_vars(index.n())?;
    let s = sem_set(phi, &index)?;
    Ok(compare(
        index.n(),
        Equivalence::Sim,
        sampling,
        |t| c.eval(t, sem),
        |t| eval_setrep(&s, t, &index, sem),
    ))
}
