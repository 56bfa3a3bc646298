//! DMN formulas: hash-consed dags over `⊤, ⊥, v_i, ¬v_i, ∨, ∧`, their set
//! representations `S` and `AP`, and total deviations.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, Mutex, OnceLock};

use fixedbitset::FixedBitSet;
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;

use crate::approx::{approx_join_traced, approx_meet_traced, minus, product, TestSets};
use crate::bounds::{self, fmt_rational, Theorem13Threshold};
use crate::error::{Error, Result};
use crate::family::Family;
use crate::graphs::{DoubleGraph, EdgeIndex, PlainGraph};
use crate::params::Params;
use crate::report::Report;

#[derive(Clone, Debug)]
pub enum Node {
    Top,
    Bot,
    Pos(u32),
    Neg(u32),
    Or(DmnFormula, DmnFormula),
    And(DmnFormula, DmnFormula),
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Key {
    Top,
    Bot,
    Pos(u32),
    Neg(u32),
    Or(u64, u64),
    And(u64, u64),
}

struct Inner {
    id: u64,
    node: Node,
}

/// A formula node. Structurally equal formulas are the same allocation, so
/// equality and hashing are by identity.
#[derive(Clone)]
pub struct DmnFormula(Arc<Inner>);

fn table() -> &'static Mutex<HashMap<Key, DmnFormula>> {
    static TABLE: OnceLock<Mutex<HashMap<Key, DmnFormula>>> = OnceLock::new();
    TABLE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn intern(node: Node) -> DmnFormula {
    let key = match &node {
        Node::Top => Key::Top,
        Node::Bot => Key::Bot,
        Node::Pos(i) => Key::Pos(*i),
        Node::Neg(i) => Key::Neg(*i),
        Node::Or(a, b) => Key::Or(a.id(), b.id()),
        Node::And(a, b) => Key::And(a.id(), b.id()),
    };
    let mut t = table().lock().unwrap_or_else(|e| e.into_inner());
    let id = t.len() as u64;
    t.entry(key)
        .or_insert_with(|| DmnFormula(Arc::new(Inner { id, node })))
        .clone()
}

impl DmnFormula {
    pub fn top() -> DmnFormula {
        intern(Node::Top)
    }

    pub fn bot() -> DmnFormula {
        intern(Node::Bot)
    }

    /// `v_i`, 1-based.
    pub fn var(i: u32) -> DmnFormula {
        intern(Node::Pos(i))
    }

    /// `¬v_i`, 1-based.
    pub fn neg_var(i: u32) -> DmnFormula {
        intern(Node::Neg(i))
    }

    pub fn lit(i: u32, positive: bool) -> DmnFormula {
        if positive {
            DmnFormula::var(i)
        } else {
            DmnFormula::neg_var(i)
        }
    }

    /// `a ∨ b` with `⊤ ∨ φ = ⊤` and `⊥ ∨ φ = φ` applied.
    pub fn or(a: DmnFormula, b: DmnFormula) -> DmnFormula {
        match (a.node(), b.node()) {
            (Node::Top, _) | (_, Node::Top) => DmnFormula::top(),
            (Node::Bot, _) => b,
            (_, Node::Bot) => a,
            _ => intern(Node::Or(a, b)),
        }
    }

    /// `a ∧ b` with `⊥ ∧ φ = ⊥` and `⊤ ∧ φ = φ` applied.
    pub fn and(a: DmnFormula, b: DmnFormula) -> DmnFormula {
        match (a.node(), b.node()) {
            (Node::Bot, _) | (_, Node::Bot) => DmnFormula::bot(),
            (Node::Top, _) => b,
            (_, Node::Top) => a,
            _ => intern(Node::And(a, b)),
        }
    }

    /// Right-nested disjunction; `⊥` when empty.
    pub fn or_all<I: IntoIterator<Item = DmnFormula>>(items: I) -> DmnFormula {
        let v: Vec<DmnFormula> = items.into_iter().collect();
        v.into_iter()
            .rev()
            .reduce(|acc, x| DmnFormula::or(x, acc))
            .unwrap_or_else(DmnFormula::bot)
    }

    /// Right-nested conjunction; `⊤` when empty.
    pub fn and_all<I: IntoIterator<Item = DmnFormula>>(items: I) -> DmnFormula {
        let v: Vec<DmnFormula> = items.into_iter().collect();
        v.into_iter()
            .rev()
            .reduce(|acc, x| DmnFormula::and(x, acc))
            .unwrap_or_else(DmnFormula::top)
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    pub fn id(&self) -> u64 {
        self.0.id
    }

    pub fn is_top(&self) -> bool {
        matches!(self.node(), Node::Top)
    }

    pub fn is_bot(&self) -> bool {
        matches!(self.node(), Node::Bot)
    }

    pub fn children(&self) -> Option<(&DmnFormula, &DmnFormula)> {
        match self.node() {
            Node::Or(a, b) | Node::And(a, b) => Some((a, b)),
            _ => None,
        }
    }

    /// Distinct subterms, children before parents, deterministic order.
    pub fn postorder(&self) -> Vec<DmnFormula> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        let mut stack = vec![(self.clone(), false)];
        while let Some((f, expanded)) = stack.pop() {
            if expanded {
                out.push(f);
                continue;
            }
            if !seen.insert(f.id()) {
                continue;
            }
            stack.push((f.clone(), true));
            if let Some((a, b)) = f.children() {
                stack.push((b.clone(), false));
                stack.push((a.clone(), false));
            }
        }
        out
    }

    /// `cs(φ)`: the number of pairwise distinct subterms.
    pub fn cs(&self) -> usize {
        self.postorder().len()
    }

    /// Largest variable index mentioned, 0 if none.
    pub fn max_var(&self) -> u32 {
        self.postorder()
            .iter()
            .filter_map(|f| match f.node() {
                Node::Pos(i) | Node::Neg(i) => Some(*i),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn check_vars(&self, n: usize) -> Result<()> {
        let top = self.max_var();
        if top as usize > n {
            return Err(Error::UnknownVariable(format!(
                "v{top} (only {n} variables)"
            )));
        }
        Ok(())
    }

    /// Parses the text format; `n` bounds variable indices when given.
    pub fn parse(text: &str, n: Option<usize>) -> Result<DmnFormula> {
        let mut p = Parser::new(text);
        p.skip();
        let f = p.formula()?;
        p.skip();
        if !p.at_end() {
            return Err(p.error("trailing input after formula"));
        }
        if let Some(n) = n {
            f.check_vars(n)?;
        }
        Ok(f)
    }
}

impl PartialEq for DmnFormula {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl Eq for DmnFormula {}

impl Hash for DmnFormula {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.id().hash(state)
    }
}

impl fmt::Debug for DmnFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Canonical text: right spines of one connective are printed flat, so
/// printing and parsing round-trip.
impl fmt::Display for DmnFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        enum Item<'a> {
            Node(&'a DmnFormula),
            Text(&'static str),
        }
        let mut stack = vec![Item::Node(self)];
        while let Some(item) = stack.pop() {
            match item {
                Item::Text(s) => f.write_str(s)?,
                Item::Node(g) => match g.node() {
                    Node::Top => f.write_str("T")?,
                    Node::Bot => f.write_str("F")?,
                    Node::Pos(i) => write!(f, "v{i}")?,
                    Node::Neg(i) => write!(f, "~v{i}")?,
                    Node::Or(..) | Node::And(..) => {
                        let is_or = matches!(g.node(), Node::Or(..));
                        let sep = if is_or { " | " } else { " & " };
                        let mut parts = Vec::new();
                        let mut cur = g;
                        loop {
                            match (cur.node(), is_or) {
                                (Node::Or(a, b), true) | (Node::And(a, b), false) => {
                                    parts.push(a);
                                    cur = b;
                                }
                                _ => {
                                    parts.push(cur);
                                    break;
                                }
                            }
                        }
                        f.write_str("(")?;
                        stack.push(Item::Text(")"));
                        for (i, p) in parts.iter().enumerate().rev() {
                            stack.push(Item::Node(p));
                            if i > 0 {
                                stack.push(Item::Text(sep));
                            }
                        }
                    }
                },
            }
        }
        Ok(())
    }
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Parser<'a> {
        Parser {
            bytes: text.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn error(&self, msg: &str) -> Error {
        Error::parse(self.line, self.col, msg)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.bytes.len()
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn bump(&mut self) {
        if self.peek() == Some(b'\n') {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        self.pos += 1;
    }

    /// Whitespace and `#` comments.
    fn skip(&mut self) {
        while let Some(c) = self.peek() {
            if c == b'#' {
                while self.peek().is_some_and(|c| c != b'\n') {
                    self.bump();
                }
            } else if c.is_ascii_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn index(&mut self) -> Result<u32> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
        }
        let s = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap_or("");
        match s.parse::<u32>() {
            Ok(0) => Err(self.error("variable indices start at 1")),
            Ok(i) => Ok(i),
            Err(_) => Err(self.error("expected a variable index")),
        }
    }

    // Iterative so deep right-nested groups cannot blow the stack.
    fn formula(&mut self) -> Result<DmnFormula> {
        struct Group {
            op: Option<u8>,
            items: Vec<DmnFormula>,
        }
        let mut groups: Vec<Group> = Vec::new();
        loop {
            self.skip();
            let atom = match self.peek() {
                Some(b'(') => {
                    self.bump();
                    groups.push(Group {
                        op: None,
                        items: Vec::new(),
                    });
                    continue;
                }
                Some(b'T') => {
                    self.bump();
                    DmnFormula::top()
                }
                Some(b'F') => {
                    self.bump();
                    DmnFormula::bot()
                }
                Some(b'v') => {
                    self.bump();
                    DmnFormula::var(self.index()?)
                }
                Some(b'~') => {
                    self.bump();
                    if self.peek() != Some(b'v') {
                        return Err(self.error("negation applies only to variables"));
                    }
                    self.bump();
                    DmnFormula::neg_var(self.index()?)
                }
                Some(_) => return Err(self.error("expected T, F, vN, ~vN or '('")),
                None => return Err(self.error("unexpected end of input")),
            };
            let mut value = atom;
            loop {
                let Some(g) = groups.last_mut() else {
                    return Ok(value);
                };
                g.items.push(value);
                self.skip();
                match self.peek() {
                    Some(c @ (b'|' | b'&')) => {
                        if g.op.is_some_and(|o| o != c) {
                            return Err(
                                self.error("mixed connectives in one group; add parentheses")
                            );
                        }
                        g.op = Some(c);
                        self.bump();
                        break;
                    }
                    Some(b')') => {
                        let Some(op) = g.op else {
                            return Err(self.error("a group needs a connective"));
                        };
                        self.bump();
                        let g = groups.pop().expect("open group");
                        value = if op == b'|' {
                            DmnFormula::or_all(g.items)
                        } else {
                            DmnFormula::and_all(g.items)
                        };
                    }
                    _ => return Err(self.error("expected '|', '&' or ')'")),
                }
            }
        }
    }
}

/// `{⊤} ∪ ℘D`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SetRep {
    Top,
    Fam(Family),
}

impl SetRep {
    pub fn union(&self, other: &SetRep) -> SetRep {
        match (self, other) {
            (SetRep::Fam(a), SetRep::Fam(b)) => SetRep::Fam(a.union(b)),
            _ => SetRep::Top,
        }
    }

    /// `⊙` with `⊤` as the unit.
    pub fn product(&self, other: &SetRep) -> SetRep {
        match (self, other) {
            (SetRep::Top, x) | (x, SetRep::Top) => x.clone(),
            (SetRep::Fam(a), SetRep::Fam(b)) => SetRep::Fam(product(a, b)),
        }
    }

    pub fn family(&self) -> Option<&Family> {
        match self {
            SetRep::Top => None,
            SetRep::Fam(f) => Some(f),
        }
    }

    pub fn ac_pos(&self, tests: &TestSets) -> FixedBitSet {
        match self {
            SetRep::Top => tests.all_pos(),
            SetRep::Fam(f) => tests.ac_pos(f),
        }
    }

    pub fn ac_neg(&self, tests: &TestSets) -> FixedBitSet {
        match self {
            SetRep::Top => tests.all_neg(),
            SetRep::Fam(f) => tests.ac_neg(f),
        }
    }

    pub fn lines(&self) -> Vec<String> {
        match self {
            SetRep::Top => vec!["T".into()],
            SetRep::Fam(f) => f.iter().map(ToString::to_string).collect(),
        }
    }
}

impl fmt::Display for SetRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetRep::Top => f.write_str("T"),
            SetRep::Fam(x) => write!(f, "{x}"),
        }
    }
}

fn literal(index: &EdgeIndex, i: u32, positive: bool) -> Result<DoubleGraph> {
    let g = PlainGraph::single(index.edge_of_index(i as usize)?);
    Ok(if positive {
        DoubleGraph::positive(g)
    } else {
        DoubleGraph::negative(g)
    })
}

/// `S(φ)`.
pub fn sem_set(phi: &DmnFormula, index: &EdgeIndex) -> Result<SetRep> {
    let mut memo: HashMap<u64, SetRep> = HashMap::new();
    for f in phi.postorder() {
        let v = match f.node() {
            Node::Top => SetRep::Top,
            Node::Bot => SetRep::Fam(Family::new()),
            Node::Pos(i) => SetRep::Fam(Family::singleton(literal(index, *i, true)?)),
            Node::Neg(i) => SetRep::Fam(Family::singleton(literal(index, *i, false)?)),
            Node::Or(a, b) => memo[&a.id()].union(&memo[&b.id()]),
            Node::And(a, b) => memo[&a.id()].product(&memo[&b.id()]),
        };
        memo.insert(f.id(), v);
    }
    Ok(memo.remove(&phi.id()).expect("root evaluated"))
}

/// Per-subterm `S` and `AP`, with plucking statistics for `AP`.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub order: Vec<DmnFormula>,
    pub s: HashMap<u64, SetRep>,
    pub ap: HashMap<u64, SetRep>,
    pub pluck_steps: usize,
    pub pluck_drops: usize,
}

impl Analysis {
    pub fn root(&self) -> &DmnFormula {
        self.order.last().expect("nonempty")
    }

    pub fn s_of(&self, f: &DmnFormula) -> &SetRep {
        &self.s[&f.id()]
    }

    pub fn ap_of(&self, f: &DmnFormula) -> &SetRep {
        &self.ap[&f.id()]
    }
}

fn ap_join(a: &SetRep, b: &SetRep, params: &Params, stats: &mut (usize, usize)) -> Result<SetRep> {
    match (a, b) {
        (SetRep::Fam(x), SetRep::Fam(y)) => {
            let (out, trace) = approx_join_traced(x, y, params)?;
            stats.0 += trace.steps.len();
            stats.1 += trace.dropped();
            Ok(SetRep::Fam(out))
        }
        _ => Ok(SetRep::Top),
    }
}

fn ap_meet(a: &SetRep, b: &SetRep, params: &Params, stats: &mut (usize, usize)) -> Result<SetRep> {
    match (a, b) {
        (SetRep::Top, x) | (x, SetRep::Top) => Ok(x.clone()),
        (SetRep::Fam(x), SetRep::Fam(y)) => {
            let (out, trace) = approx_meet_traced(x, y, params)?;
            stats.0 += trace.steps.len();
            stats.1 += trace.dropped();
            Ok(SetRep::Fam(out))
        }
    }
}

/// Computes `S` and `AP` for every subterm of `φ`.
pub fn analyze(phi: &DmnFormula, params: &Params) -> Result<Analysis> {
    let index = EdgeIndex::new(params.m)?;
    phi.check_vars(index.n())?;
    let order = phi.postorder();
    let mut s: HashMap<u64, SetRep> = HashMap::new();
    let mut ap: HashMap<u64, SetRep> = HashMap::new();
    let mut stats = (0usize, 0usize);
    for f in &order {
        let (sv, av) = match f.node() {
            Node::Top => (SetRep::Top, SetRep::Top),
            Node::Bot => (SetRep::Fam(Family::new()), SetRep::Fam(Family::new())),
            Node::Pos(i) | Node::Neg(i) => {
                let d = literal(&index, *i, matches!(f.node(), Node::Pos(_)))?;
                if d.vertex_norm() > params.ell {
                    return Err(Error::Precondition(format!(
                        "literal {f} does not fit ell = {}",
                        params.ell
                    )));
                }
                let rep = SetRep::Fam(Family::singleton(d));
                (rep.clone(), rep)
            }
            Node::Or(a, b) => (
                s[&a.id()].union(&s[&b.id()]),
                ap_join(&ap[&a.id()], &ap[&b.id()], params, &mut stats)?,
            ),
            Node::And(a, b) => (
                s[&a.id()].product(&s[&b.id()]),
                ap_meet(&ap[&a.id()], &ap[&b.id()], params, &mut stats)?,
            ),
        };
        s.insert(f.id(), sv);
        ap.insert(f.id(), av);
    }
    Ok(Analysis {
        order,
        s,
        ap,
        pluck_steps: stats.0,
        pluck_drops: stats.1,
    })
}

/// `AP(φ)`.
pub fn approx_set(phi: &DmnFormula, params: &Params) -> Result<SetRep> {
    let a = analyze(phi, params)?;
    Ok(a.ap[&phi.id()].clone())
}

/// Total deviations `∂^p(φ)` and `∂^n(φ)` as bitsets over the test enumeration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TotalDeviations {
    pub ac_pos_s: FixedBitSet,
    pub ac_neg_s: FixedBitSet,
    pub ac_pos_ap: FixedBitSet,
    pub ac_neg_ap: FixedBitSet,
    pub pos: FixedBitSet,
    pub neg: FixedBitSet,
}

pub fn total_deviations(s: &SetRep, ap: &SetRep, tests: &TestSets) -> TotalDeviations {
    let (ac_pos_s, ac_neg_s) = (s.ac_pos(tests), s.ac_neg(tests));
    let (ac_pos_ap, ac_neg_ap) = (ap.ac_pos(tests), ap.ac_neg(tests));
    let pos = minus(&ac_pos_s, &ac_pos_ap);
    let neg = minus(&ac_neg_ap, &ac_neg_s);
    TotalDeviations {
        ac_pos_s,
        ac_neg_s,
        ac_pos_ap,
        ac_neg_ap,
        pos,
        neg,
    }
}

/// `∂^p(φ)` as a report with its members.
pub fn total_deviation_pos(phi: &DmnFormula, tests: &TestSets) -> Result<Report> {
    let a = analyze(phi, tests.params())?;
    let d = total_deviations(a.s_of(phi), a.ap_of(phi), tests);
    let b = bounds::bound_expressions(tests.params());
    let cs = phi.cs();
    let mut r = Report::new("total-deviation-pos");
    r.field("formula", phi.to_string())
        .field("cs", cs)
        .field("count", d.pos.count_ones(..));
    r.big(
        "bound_as_printed",
        fmt_rational(&(BigRational::from_integer(cs.into()) * &b.meet_neg)),
    );
    r.big(
        "bound_swapped",
        BigRational::from_integer((b.meet_pos.clone() * cs).into()).to_integer(),
    );
    r.field("bound_applicable", tests.params().bound_applicable());
    r.section(
        "members",
        tests
            .pos_members(&d.pos)
            .iter()
            .map(ToString::to_string)
            .collect(),
    );
    Ok(r)
}

/// `∂^n(φ)` as a report with its members.
pub fn total_deviation_neg(phi: &DmnFormula, tests: &TestSets) -> Result<Report> {
    let a = analyze(phi, tests.params())?;
    let d = total_deviations(a.s_of(phi), a.ap_of(phi), tests);
    let b = bounds::bound_expressions(tests.params());
    let cs = phi.cs();
    let mut r = Report::new("total-deviation-neg");
    r.field("formula", phi.to_string())
        .field("cs", cs)
        .field("count", d.neg.count_ones(..));
    r.big("bound_as_printed", b.meet_pos.clone() * cs);
    r.big(
        "bound_swapped",
        fmt_rational(&(BigRational::from_integer(cs.into()) * &b.meet_neg)),
    );
    r.field("bound_applicable", tests.params().bound_applicable());
    r.section(
        "members",
        tests
            .neg_members(&d.neg)
            .iter()
            .map(ToString::to_string)
            .collect(),
    );
    Ok(r)
}

/// One instance of a deviation inclusion for a binary subterm.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainViolation {
    /// 1 to 4, in the order p-∨, p-∧, n-∨, n-∧.
    pub item: usize,
    pub subterm: String,
    pub witness: String,
}

/// Counts of checked and violated inclusions per item.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ChainCheck {
    pub checked: [usize; 4],
    pub violations: Vec<ChainViolation>,
}

impl ChainCheck {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn absorb(&mut self, other: ChainCheck) {
        for i in 0..4 {
            self.checked[i] += other.checked[i];
        }
        self.violations.extend(other.violations);
    }
}

/// Checks `∂(σ∘τ) ⊆ ∂(σ) ∪ ∂(τ) ∪ ∂_∘(AP σ, AP τ)` at every binary subterm.
pub fn deviation_chains(phi: &DmnFormula, tests: &TestSets) -> Result<ChainCheck> {
    let a = analyze(phi, tests.params())?;
    let mut devs: HashMap<u64, TotalDeviations> = HashMap::new();
    for f in &a.order {
        devs.insert(f.id(), total_deviations(a.s_of(f), a.ap_of(f), tests));
    }
    let mut out = ChainCheck::default();
    for f in &a.order {
        let Some((l, r)) = f.children() else { continue };
        let is_or = matches!(f.node(), Node::Or(..));
        let (apl, apr, apf) = (a.ap_of(l), a.ap_of(r), a.ap_of(f));
        let exact = if is_or {
            apl.union(apr)
        } else {
            apl.product(apr)
        };
        let step_pos = minus(&exact.ac_pos(tests), &apf.ac_pos(tests));
        let step_neg = minus(&apf.ac_neg(tests), &exact.ac_neg(tests));
        let (dl, dr, df) = (&devs[&l.id()], &devs[&r.id()], &devs[&f.id()]);
        let mut allowed_pos = dl.pos.clone();
        allowed_pos.union_with(&dr.pos);
        allowed_pos.union_with(&step_pos);
        let mut allowed_neg = dl.neg.clone();
        allowed_neg.union_with(&dr.neg);
        allowed_neg.union_with(&step_neg);
        let (item_p, item_n) = if is_or { (1, 3) } else { (2, 4) };
        out.checked[item_p - 1] += 1;
        out.checked[item_n - 1] += 1;
        if let Some(i) = minus(&df.pos, &allowed_pos).ones().next() {
            out.violations.push(ChainViolation {
                item: item_p,
                subterm: f.to_string(),
                witness: tests.pos()[i].to_string(),
            });
        }
        if let Some(i) = minus(&df.neg, &allowed_neg).ones().next() {
            out.violations.push(ChainViolation {
                item: item_n,
                subterm: f.to_string(),
                witness: tests.neg().pair(i).to_string(),
            });
        }
    }
    Ok(out)
}

/// Measured deviation sizes against both pairings of the printed bounds,
/// plus the quarter-of-all-pairs comparison.
pub fn lemma12_report(phi: &DmnFormula, tests: &TestSets) -> Result<Report> {
    let params = tests.params();
    let a = analyze(phi, params)?;
    let d = total_deviations(a.s_of(phi), a.ap_of(phi), tests);
    let b = bounds::bound_expressions(params);
    let cs = phi.cs();
    let csr = BigRational::from_integer(cs.into());
    let meet_pos = BigRational::from_integer(b.meet_pos.clone().into());
    let dp = BigRational::from_integer(d.pos.count_ones(..).into());
    let dn = BigRational::from_integer(d.neg.count_ones(..).into());
    let mut r = Report::new("lemma12");
    r.field("formula", phi.to_string())
        .field("cs", cs)
        .field("bound_applicable", params.bound_applicable())
        .field("dev_pos", d.pos.count_ones(..))
        .field("dev_neg", d.neg.count_ones(..));
    let item1 = &csr * &meet_pos;
    let item2 = &csr * &b.meet_neg;
    r.big("item1_rhs", fmt_rational(&item1))
        .big("item2_rhs", fmt_rational(&item2));
    r.field("as_printed_item1_dev_neg_lt", dn < item1);
    r.field("as_printed_item2_dev_pos_le", dp <= item2);
    r.field("swapped_item1_dev_pos_le", dp <= item1);
    r.field("swapped_item2_dev_neg_lt", dn < item2);
    r.field("degenerate_binomial", b.meet_pos_degenerate);
    let acp_ap = d.ac_pos_ap.count_ones(..);
    r.field("ac_pos_ap", acp_ap)
        .field("ac_neg_ap", d.ac_neg_ap.count_ones(..));
    r.big("quarter_pairs", fmt_rational(&b.quarter_pairs));
    if acp_ap == 0 {
        r.field("item3", "skipped (no accepted positive test)");
    } else {
        let got = BigRational::from_integer(d.ac_neg_ap.count_ones(..).into());
        r.field("item3", got >= b.quarter_pairs);
    }
    Ok(r)
}

/// The `T+ × T-` witness for one member `E` of `AP(φ)`: colorings injective on
/// `v(E+)` and on `v(E-)`. Reports how many such pairs are `NEG2` members and
/// whether all of those are accepted.
pub fn quarter_witness(
    e: &DoubleGraph,
    accepted: &FixedBitSet,
    tests: &TestSets,
) -> Result<Report> {
    let params = tests.params();
    let colorings = crate::double_tests::all_colorings(params.m, params.k)?;
    let injective = |g: PlainGraph, f: &crate::graphs::Coloring| {
        g.vertices().iter().all(|x| {
            g.vertices()
                .iter()
                .all(|y| x == y || f.values()[x as usize - 1] != f.values()[y as usize - 1])
        })
    };
    let tp: Vec<&crate::graphs::Coloring> =
        colorings.iter().filter(|f| injective(e.pos(), f)).collect();
    let tn: Vec<&crate::graphs::Coloring> =
        colorings.iter().filter(|f| injective(e.neg(), f)).collect();
    let index: HashMap<(&[u8], &[u8]), usize> = tests
        .neg()
        .pairs()
        .iter()
        .enumerate()
        .map(|(i, p)| ((p.f.values(), p.g.values()), i))
        .collect();
    let (mut in_neg, mut accepted_count) = (0usize, 0usize);
    for f in &tp {
        for g in &tn {
            if let Some(&i) = index.get(&(f.values(), g.values())) {
                in_neg += 1;
                if accepted.contains(i) {
                    accepted_count += 1;
                }
            }
        }
    }
    let total = BigUint::from(tp.len()) * BigUint::from(tn.len());
    let mut r = Report::new("quarter-witness");
    r.field("member", e.to_string())
        .field("t_pos", tp.len())
        .field("t_neg", tn.len())
        .big("product", &total)
        .field("product_in_neg2", in_neg)
        .field("accepted", accepted_count)
        .field("product_within_neg2", BigUint::from(in_neg) == total)
        .require(accepted_count == in_neg);
    Ok(r)
}

/// Which branch of the two-case argument applies, with the measured
/// quantities on both sides of that branch's inequality chain.
pub fn theorem13_dichotomy(phi: &DmnFormula, tests: &TestSets) -> Result<Report> {
    let params = tests.params();
    let a = analyze(phi, params)?;
    let d = total_deviations(a.s_of(phi), a.ap_of(phi), tests);
    if let Some(i) = minus(&tests.all_pos(), &d.ac_pos_s).ones().next() {
        return Err(Error::Premise {
            premise: "POS2 = AC^p(phi)".into(),
            witness: format!("positive test {} is not accepted", tests.pos()[i]),
        });
    }
    if tests.pos().is_empty() && !phi.is_top() && a.s_of(phi).family().is_some_and(Family::is_empty)
    {
        return Err(Error::Premise {
            premise: "POS2 = AC^p(phi)".into(),
            witness: "no accepted positive test".into(),
        });
    }
    if let Some(i) = d.ac_neg_s.ones().next() {
        return Err(Error::Premise {
            premise: "AC^n(phi) = empty".into(),
            witness: format!("negative test {} is accepted", tests.neg().pair(i)),
        });
    }
    let b = bounds::bound_expressions(params);
    let cs = phi.cs();
    let csr = BigRational::from_integer(cs.into());
    let l2 = BigRational::from_integer((&params.threshold * &params.threshold).into());
    let mut r = Report::new("theorem13");
    r.field("params", params.to_string())
        .field("formula_cs", cs)
        .field("pos2", tests.pos().len())
        .field("neg2", tests.neg().len())
        .field("ap_members", a.ap_of(phi).family().map_or(0, Family::len))
        .field("pluck_steps", a.pluck_steps)
        .field("pluck_drops", a.pluck_drops)
        .field("ac_pos_ap", d.ac_pos_ap.count_ones(..))
        .field("ac_neg_ap", d.ac_neg_ap.count_ones(..))
        .field("dev_pos", d.pos.count_ones(..))
        .field("dev_neg", d.neg.count_ones(..));
    if d.ac_pos_ap.count_ones(..) == 0 {
        r.field("case", 1);
        let rhs = &csr * BigRational::from_integer(b.meet_pos.clone().into());
        let lhs = BigRational::from_integer(d.pos.count_ones(..).into());
        r.big("case1_cs_times_bound", fmt_rational(&rhs))
            .field(
                "case1_dev_pos_equals_pos2",
                d.pos.count_ones(..) == tests.pos().len(),
            )
            .field("case1_bound_covers_dev_pos", rhs >= lhs);
        let c = bounds::binomial(params.m as i64, params.k as i64);
        let (cden, _) = bounds::binomial_flagged(
            params.m as i64 - params.ell as i64 - 1,
            params.k as i64 - params.ell as i64 - 1,
        );
        if cden.is_zero() {
            r.field("case1_implied_cs_lower_bound", "undefined (zero binomial)");
        } else {
            let implied = BigRational::from_integer(c.into())
                / (&l2 * BigRational::from_integer(cden.into()));
            r.big("case1_implied_cs_lower_bound", fmt_rational(&implied));
        }
    } else {
        r.field("case", 2);
        let rhs = &csr * &b.meet_neg;
        let dn = BigRational::from_integer(d.neg.count_ones(..).into());
        let acn = BigRational::from_integer(d.ac_neg_ap.count_ones(..).into());
        r.big("case2_cs_times_bound", fmt_rational(&rhs))
            .big("case2_quarter_pairs", fmt_rational(&b.quarter_pairs))
            .field("case2_bound_covers_dev_neg", rhs >= dn)
            .field("case2_dev_neg_reaches_quarter", dn >= b.quarter_pairs)
            .field("case2_ac_neg_ap_reaches_quarter", acn >= b.quarter_pairs);
        let two_p =
            BigRational::from_integer(num_traits::pow(num_bigint::BigInt::from(2), params.p));
        let implied = two_p / (BigRational::from_integer(8.into()) * &l2);
        r.big("case2_implied_cs_lower_bound", fmt_rational(&implied));
    }
    match threshold_for(params.m) {
        Some(t) => r.field("strict_threshold_met", t.is_met(&BigUint::from(cs))?),
        None => r.field(
            "strict_threshold_met",
            "not applicable (m is not a perfect 8th power)",
        ),
    };
    Ok(r)
}

fn threshold_for(m: u32) -> Option<Theorem13Threshold> {
    (1u32..=2)
        .find(|e| e.pow(8) == m)
        .and_then(|e| Theorem13Threshold::new(BigUint::from(m), BigUint::from(e)).ok())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> DmnFormula {
        DmnFormula::parse(s, None).unwrap()
    }

    #[test]
    fn parse_examples() {
        let f = p("(v1 | (v2 & ~v3))");
        let expected = DmnFormula::or(
            DmnFormula::var(1),
            DmnFormula::and(DmnFormula::var(2), DmnFormula::neg_var(3)),
        );
        assert_eq!(f, expected);
        assert!(p("(T | v1)").is_top());
        assert!(p("(v1 & F)").is_bot());
        assert_eq!(p("(v1 & T)"), DmnFormula::var(1));
        assert_eq!(p("(F | ~v2)"), DmnFormula::neg_var(2));
    }

    #[test]
    fn nary_groups_are_right_nested() {
        let f = p("(v1 | v2 | v3)");
        assert_eq!(f, p("(v1 | (v2 | v3))"));
        assert_eq!(f.to_string(), "(v1 | v2 | v3)");
        let g = p("((v1 | v2) | v3)");
        assert_ne!(f, g);
        assert_eq!(g.to_string(), "((v1 | v2) | v3)");
        assert_eq!(p(&g.to_string()), g);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            DmnFormula::parse("(v1 | v2", None),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            DmnFormula::parse("(v1 | v2 & v3)", None),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            DmnFormula::parse("~(v1)", None),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            DmnFormula::parse("v0", None),
            Err(Error::Parse { .. })
        ));
        let e = DmnFormula::parse("(v1 |\n  x)", None).unwrap_err();
        assert!(
            matches!(
                e,
                Error::Parse {
                    line: 2,
                    column: 3,
                    ..
                }
            ),
            "{e}"
        );
        assert!(matches!(
            DmnFormula::parse("v7", Some(6)),
            Err(Error::UnknownVariable(_))
        ));
    }

    #[test]
    fn cs_counts_distinct_subterms() {
        assert_eq!(p("v1").cs(), 1);
        assert_eq!(p("(v1 | v1)").cs(), 2);
        assert_eq!(p("(v1 | (v2 & ~v3))").cs(), 5);
        assert_eq!(p("((v1 & v2) | ((v1 & v2) & v3))").cs(), 6);
    }

    #[test]
    fn sem_set_examples() {
        let idx = EdgeIndex::new(4).unwrap();
        let s = sem_set(&p("(v1 | (v2 & ~v3))"), &idx).unwrap();
        let expected: Family = "+[(1,2)] -[]\n+[(1,3)] -[(1,4)]".parse().unwrap();
        assert_eq!(s, SetRep::Fam(expected));
        assert_eq!(
            sem_set(&p("(v1 & ~v1)"), &idx).unwrap(),
            SetRep::Fam(Family::new())
        );
        assert_eq!(
            sem_set(&p("~v1"), &idx).unwrap(),
            SetRep::Fam("+[] -[(1,2)]".parse().unwrap())
        );
        assert_eq!(sem_set(&DmnFormula::top(), &idx).unwrap(), SetRep::Top);
    }

    #[test]
    fn ap_equals_s_without_plucking() {
        let params = Params::new(5, 3, 3, 4).unwrap();
        let idx = EdgeIndex::new(5).unwrap();
        for s in ["v1", "~v4", "(v1 | (v2 & ~v3))", "((v1 & v5) | (v8 & ~v2))"] {
            let f = p(s);
            assert_eq!(
                approx_set(&f, &params).unwrap(),
                sem_set(&f, &idx).unwrap(),
                "{s}"
            );
        }
    }

    #[test]
    fn literal_deviations_are_empty() {
        let tests = TestSets::new(&Params::new(5, 3, 3, 4).unwrap()).unwrap();
        for f in [p("v3"), p("~v7"), DmnFormula::top()] {
            let a = analyze(&f, tests.params()).unwrap();
            let d = total_deviations(a.s_of(&f), a.ap_of(&f), &tests);
            assert_eq!(d.pos.count_ones(..), 0);
            assert_eq!(d.neg.count_ones(..), 0);
        }
    }

    #[test]
    fn chains_hold_on_small_formulas() {
        let tests = TestSets::new(&Params::new(5, 3, 3, 4).unwrap()).unwrap();
        let c = deviation_chains(&p("((v1 & v2) | (v5 & ~v8))"), &tests).unwrap();
        assert!(c.holds());
        assert_eq!(c.checked, [1, 2, 1, 2]);
    }

    #[test]
    fn theorem13_premise_failures() {
        let tests = TestSets::new(&Params::new(5, 3, 3, 4).unwrap()).unwrap();
        let e = theorem13_dichotomy(&DmnFormula::bot(), &tests).unwrap_err();
        assert!(matches!(e, Error::Premise { .. }));
        let e = theorem13_dichotomy(&DmnFormula::top(), &tests).unwrap_err();
        assert!(e.to_string().contains("AC^n"), "{e}");
    }

    #[test]
    fn literal_witness_product() {
        let tests = TestSets::new(&Params::new(5, 3, 3, 4).unwrap()).unwrap();
        let f = p("v1");
        let a = analyze(&f, tests.params()).unwrap();
        let ap = a.ap_of(&f).clone();
        let accepted = ap.ac_neg(&tests);
        assert!(ap.ac_pos(&tests).count_ones(..) > 0);
        let e = *ap.family().unwrap().iter().next().unwrap();
        let r = quarter_witness(&e, &accepted, &tests).unwrap();
        assert!(r.passed());
        // two colors, v1 = (1,2): f(1) != f(2) in 2^4 colorings, g free in 2^5
        assert_eq!(r.get("t_pos").unwrap(), 16);
        assert_eq!(r.get("t_neg").unwrap(), 32);
    }
}
