//! Boolean circuits with negation, the negation-pushing conversion, and
//! the double-rail encoding of partial assignments.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::double_tests::enum_pos2;
use crate::error::{Error, Result};
use crate::formula::DmnFormula;
use crate::graphs::{DoubleGraph, EdgeIndex, PlainGraph};
use crate::params::Params;
use crate::semantics::{Tri, TriAssignment};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    Var(String),
    /// A negated variable leaf; only produced by conversion or written as `NVAR`.
    NVar(String),
    True,
    False,
    Not(usize),
    And(usize, usize),
    Or(usize, usize),
}

impl Gate {
    fn children(&self) -> Vec<usize> {
        match self {
            Gate::Not(a) => vec![*a],
            Gate::And(a, b) | Gate::Or(a, b) => vec![*a, *b],
            _ => Vec::new(),
        }
    }

    fn map_children(&self, f: impl Fn(usize) -> usize) -> Gate {
        match self {
            Gate::Not(a) => Gate::Not(f(*a)),
            Gate::And(a, b) => Gate::And(f(*a), f(*b)),
            Gate::Or(a, b) => Gate::Or(f(*a), f(*b)),
            other => other.clone(),
        }
    }

    /// The dual label: `v ↦ ¬v`, `⊤ ↔ ⊥`, `∨ ↔ ∧`.
    fn dual(&self) -> Gate {
        match self {
            Gate::Var(v) => Gate::NVar(v.clone()),
            Gate::NVar(v) => Gate::Var(v.clone()),
            Gate::True => Gate::False,
            Gate::False => Gate::True,
            Gate::And(a, b) => Gate::Or(*a, *b),
            Gate::Or(a, b) => Gate::And(*a, *b),
            Gate::Not(a) => Gate::Not(*a),
        }
    }
}

/// A rooted dag; every gate's children precede it and every gate is
/// reachable from the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    gates: Vec<Gate>,
    root: usize,
}

impl Circuit {
    /// Builds a circuit from gates in any order, checking references,
    /// acyclicity and the no-`¬¬` shape. `¬¬` pairs are collapsed and
    /// unreachable gates dropped; both are reported as warnings.
    pub fn from_gates(gates: Vec<Gate>, root: usize) -> Result<(Circuit, Vec<String>)> {
        let mut warnings = Vec::new();
        if root >= gates.len() {
            return Err(Error::Circuit(format!("root {root} is not a gate")));
        }
        for (i, g) in gates.iter().enumerate() {
            if let Some(c) = g.children().into_iter().find(|&c| c >= gates.len()) {
                return Err(Error::Circuit(format!(
                    "gate {i} refers to missing gate {c}"
                )));
            }
        }
        // iterative dfs postorder with cycle detection
        let mut state = vec![0u8; gates.len()];
        let mut order = Vec::new();
        let mut stack = vec![(root, false)];
        while let Some((g, done)) = stack.pop() {
            if done {
                state[g] = 2;
                order.push(g);
                continue;
            }
            match state[g] {
                2 => continue,
                1 => return Err(Error::Circuit(format!("cycle through gate {g}"))),
                _ => {}
            }
            state[g] = 1;
            stack.push((g, true));
            for c in gates[g].children().into_iter().rev() {
                if state[c] == 1 {
                    return Err(Error::Circuit(format!("cycle through gate {c}")));
                }
                if state[c] == 0 {
                    stack.push((c, false));
                }
            }
        }
        let dropped = gates.len() - order.len();
        if dropped > 0 {
            warnings.push(format!(
                "dropped {dropped} gate(s) unreachable from the root"
            ));
        }
        // resolve ¬¬z to z, in postorder so children are final
        let mut resolve: Vec<usize> = (0..gates.len()).collect();
        for &g in &order {
            if let Gate::Not(c) = gates[g] {
                let c = resolve[c];
                if let Gate::Not(z) = gates[c] {
                    resolve[g] = resolve[z];
                    warnings.push(format!("collapsed double negation at gate {g}"));
                }
            }
        }
        let rebuilt: Vec<Gate> = gates
            .iter()
            .map(|g| g.map_children(|c| resolve[c]))
            .collect();
        Ok((compact(&rebuilt, resolve[root]), warnings))
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn root(&self) -> usize {
        self.root
    }

    /// `|V|`.
    pub fn size(&self) -> usize {
        self.gates.len()
    }

    pub fn has_negation(&self) -> bool {
        self.gates.iter().any(|g| matches!(g, Gate::Not(_)))
    }

    /// Variable names, sorted and deduplicated.
    pub fn variables(&self) -> Vec<String> {
        let set: BTreeSet<&String> = self
            .gates
            .iter()
            .filter_map(|g| match g {
                Gate::Var(v) | Gate::NVar(v) => Some(v),
                _ => None,
            })
            .collect();
        set.into_iter().cloned().collect()
    }

    /// Evaluates with `value(name)` for every variable.
    pub fn eval_with(&self, value: impl Fn(&str) -> Option<bool>) -> Result<bool> {
        let mut vals: Vec<bool> = Vec::with_capacity(self.gates.len());
        for g in &self.gates {
            let v = match g {
                Gate::Var(x) => value(x).ok_or_else(|| Error::UnknownVariable(x.clone()))?,
                Gate::NVar(x) => !value(x).ok_or_else(|| Error::UnknownVariable(x.clone()))?,
                Gate::True => true,
                Gate::False => false,
                Gate::Not(a) => !vals[*a],
                Gate::And(a, b) => vals[*a] && vals[*b],
                Gate::Or(a, b) => vals[*a] || vals[*b],
            };
            vals.push(v);
        }
        Ok(vals[self.root])
    }

    pub fn eval(&self, beta: &HashMap<String, bool>) -> Result<bool> {
        self.eval_with(|x| beta.get(x).copied())
    }

    /// Truth table over `variables()`, the first variable most significant.
    pub fn truth_table(&self) -> Result<Vec<bool>> {
        let vars = self.variables();
        if vars.len() > 24 {
            return Err(Error::CapExceeded {
                what: "truth table".into(),
                needed: format!("2^{}", vars.len()),
                cap: 1 << 24,
            });
        }
        let pos: HashMap<&str, usize> = vars
            .iter()
            .enumerate()
            .map(|(i, v)| (v.as_str(), i))
            .collect();
        let n = vars.len();
        (0u32..1 << n)
            .map(|bits| self.eval_with(|x| pos.get(x).map(|&i| bits >> (n - 1 - i) & 1 == 1)))
            .collect()
    }

    /// Parses the gate-per-line text format. Statements may also be
    /// separated by `;`, and `#` starts a comment.
    pub fn parse(text: &str) -> Result<(Circuit, Vec<String>)> {
        let mut ids: HashMap<String, usize> = HashMap::new();
        let mut raw: Vec<(String, Vec<String>, usize, usize)> = Vec::new();
        let mut root: Option<(String, usize, usize)> = None;
        for (ln, line) in text.lines().enumerate() {
            let line_no = ln + 1;
            let code = line.split('#').next().unwrap_or("");
            let mut offset = 0;
            for stmt in code.split(';') {
                let col = offset + 1 + (stmt.len() - stmt.trim_start().len());
                offset += stmt.len() + 1;
                let stmt = stmt.trim();
                if stmt.is_empty() {
                    continue;
                }
                if let Some(rest) = stmt
                    .strip_prefix("root")
                    .filter(|r| r.starts_with(char::is_whitespace))
                {
                    if root.is_some() {
                        return Err(Error::parse(line_no, col, "root declared twice"));
                    }
                    let r = rest.trim();
                    if r.is_empty() || r.contains(char::is_whitespace) {
                        return Err(Error::parse(line_no, col, "expected `root <gate>`"));
                    }
                    root = Some((r.to_string(), line_no, col));
                    continue;
                }
                let (lhs, rhs) = stmt.split_once('=').ok_or_else(|| {
                    Error::parse(
                        line_no,
                        col,
                        "expected `<gate> = <op> ...` or `root <gate>`",
                    )
                })?;
                let id = lhs.trim();
                if id.is_empty() || id.contains(char::is_whitespace) {
                    return Err(Error::parse(line_no, col, format!("bad gate id '{id}'")));
                }
                let toks: Vec<String> = rhs.split_whitespace().map(str::to_string).collect();
                if ids.insert(id.to_string(), raw.len()).is_some() {
                    return Err(Error::parse(
                        line_no,
                        col,
                        format!("gate '{id}' defined twice"),
                    ));
                }
                raw.push((id.to_string(), toks, line_no, col));
            }
        }
        let lookup = |name: &str, line: usize, col: usize| {
            ids.get(name)
                .copied()
                .ok_or_else(|| Error::parse(line, col, format!("unknown gate '{name}'")))
        };
        let mut gates = Vec::with_capacity(raw.len());
        for (id, toks, line, col) in &raw {
            let (line, col) = (*line, *col);
            let arity = |want: usize| -> Result<()> {
                if toks.len() != want + 1 {
                    return Err(Error::parse(
                        line,
                        col,
                        format!(
                            "gate '{id}': {} takes {want} argument(s), got {}",
                            toks[0],
                            toks.len() - 1
                        ),
                    ));
                }
                Ok(())
            };
            let op = toks
                .first()
                .ok_or_else(|| Error::parse(line, col, format!("gate '{id}' has no operator")))?;
            let g = match op.as_str() {
                "VAR" => {
                    arity(1)?;
                    Gate::Var(toks[1].clone())
                }
                "NVAR" => {
                    arity(1)?;
                    Gate::NVar(toks[1].clone())
                }
                "TRUE" => {
                    arity(0)?;
                    Gate::True
                }
                "FALSE" => {
                    arity(0)?;
                    Gate::False
                }
                "NOT" => {
                    arity(1)?;
                    Gate::Not(lookup(&toks[1], line, col)?)
                }
                "AND" | "OR" => {
                    arity(2)?;
                    let (a, b) = (lookup(&toks[1], line, col)?, lookup(&toks[2], line, col)?);
                    if op == "AND" {
                        Gate::And(a, b)
                    } else {
                        Gate::Or(a, b)
                    }
                }
                other => {
                    return Err(Error::parse(
                        line,
                        col,
                        format!("unknown operator '{other}'"),
                    ))
                }
            };
            gates.push(g);
        }
        let (name, line, col) = root
            .ok_or_else(|| Error::parse(text.lines().count().max(1), 1, "missing `root` line"))?;
        let r = lookup(&name, line, col)?;
        Circuit::from_gates(gates, r).map_err(|e| match e {
            Error::Circuit(msg) => {
                let named = raw.iter().enumerate().rev().fold(msg, |m, (i, (id, ..))| {
                    m.replace(&format!("gate {i}"), &format!("gate '{id}'"))
                });
                Error::Circuit(named)
            }
            other => other,
        })
    }
}

/// Keeps the gates reachable from `root`, children first, renumbered.
fn compact(gates: &[Gate], root: usize) -> Circuit {
    let mut index: HashMap<usize, usize> = HashMap::new();
    let mut out = Vec::new();
    let mut stack = vec![(root, false)];
    while let Some((g, done)) = stack.pop() {
        if index.contains_key(&g) {
            continue;
        }
        if done {
            index.insert(g, out.len());
            out.push(gates[g].map_children(|c| index[&c]));
            continue;
        }
        stack.push((g, true));
        for c in gates[g].children().into_iter().rev() {
            if !index.contains_key(&c) {
                stack.push((c, false));
            }
        }
    }
    let root = index[&root];
    Circuit { gates: out, root }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, g) in self.gates.iter().enumerate() {
            write!(f, "g{} = ", i + 1)?;
            match g {
                Gate::Var(v) => writeln!(f, "VAR {v}")?,
                Gate::NVar(v) => writeln!(f, "NVAR {v}")?,
                Gate::True => writeln!(f, "TRUE")?,
                Gate::False => writeln!(f, "FALSE")?,
                Gate::Not(a) => writeln!(f, "NOT g{}", a + 1)?,
                Gate::And(a, b) => writeln!(f, "AND g{} g{}", a + 1, b + 1)?,
                Gate::Or(a, b) => writeln!(f, "OR g{} g{}", a + 1, b + 1)?,
            }
        }
        writeln!(f, "root g{}", self.root + 1)
    }
}

/// Pushes negations to the leaves: every non-`¬` gate keeps an original
/// copy and gets a dual copy; an edge through a `¬` gate switches copies.
/// Only copies reachable from the new root are kept.
pub fn demorgan_convert(b: &Circuit) -> Circuit {
    let n = b.gates.len();
    // slots 0..n originals, n..2n duals; ¬ gates get no slot of their own
    let through = |c: usize, dual: bool| -> usize {
        match b.gates[c] {
            Gate::Not(z) => {
                if dual {
                    z
                } else {
                    n + z
                }
            }
            _ => {
                if dual {
                    n + c
                } else {
                    c
                }
            }
        }
    };
    let mut all: Vec<Gate> = Vec::with_capacity(2 * n);
    for g in &b.gates {
        all.push(g.map_children(|c| through(c, false)));
    }
    for g in &b.gates {
        all.push(g.dual().map_children(|c| through(c, true)));
    }
    let root = match b.gates[b.root] {
        Gate::Not(x) => n + x,
        _ => b.root,
    };
    compact(&all, root)
}

/// Rail variables `x1..xn` (present positively) and `y1..yn` (present negatively).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RailAssignment {
    pub x: Vec<bool>,
    pub y: Vec<bool>,
}

impl RailAssignment {
    /// Value of a rail variable by name.
    pub fn get(&self, name: &str) -> Option<bool> {
        let (rail, i) = parse_rail(name)?;
        let v = if rail { &self.x } else { &self.y };
        v.get(i.checked_sub(1)?).copied()
    }
}

/// `("x", i)` as `(true, i)` and `("y", j)` as `(false, j)`.
pub fn parse_rail(name: &str) -> Option<(bool, usize)> {
    let rail = match name.as_bytes().first()? {
        b'x' => true,
        b'y' => false,
        _ => return None,
    };
    let i: usize = name[1..].parse().ok()?;
    (i > 0 && !name[1..].starts_with('0')).then_some((rail, i))
}

/// `β[ϑ]`: `x_i` is 1 iff `ϑ(i) = 1`, `y_j` is 1 iff `ϑ(j) = 0`.
pub fn rail_of_tri(t: &TriAssignment) -> RailAssignment {
    RailAssignment {
        x: t.values().iter().map(|v| *v == Tri::One).collect(),
        y: t.values().iter().map(|v| *v == Tri::Zero).collect(),
    }
}

/// `D[β]`; fails when some index has both rails set.
pub fn graph_of_rail(beta: &RailAssignment, index: &EdgeIndex) -> Result<DoubleGraph> {
    if let Some(i) = (0..beta.x.len().min(beta.y.len())).find(|&i| beta.x[i] && beta.y[i]) {
        return Err(Error::RailConflict(i + 1));
    }
    let pick = |rail: &[bool]| -> Result<PlainGraph> {
        let mut g = PlainGraph::EMPTY;
        for (i, _) in rail.iter().enumerate().filter(|(_, b)| **b) {
            g.insert(index.edge_of_index(i + 1)?);
        }
        Ok(g)
    };
    DoubleGraph::new(pick(&beta.x)?, pick(&beta.y)?)
}

/// `D[ϑ]`.
pub fn graph_of_tri(t: &TriAssignment, index: &EdgeIndex) -> Result<DoubleGraph> {
    t.graph(index)
}

/// Reads a negation-free circuit as a DMN formula over `v_i`.
fn read_dmn(c: &Circuit, n: usize) -> Result<DmnFormula> {
    let var = |name: &str| -> Result<u32> {
        let i: u32 = name
            .strip_prefix('v')
            .and_then(|s| s.parse().ok())
            .filter(|&i| i >= 1 && i as usize <= n)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))?;
        Ok(i)
    };
    let mut vals: Vec<DmnFormula> = Vec::with_capacity(c.gates.len());
    for g in &c.gates {
        let f = match g {
            Gate::Var(v) => DmnFormula::var(var(v)?),
            Gate::NVar(v) => DmnFormula::neg_var(var(v)?),
            Gate::True => DmnFormula::top(),
            Gate::False => DmnFormula::bot(),
            Gate::And(a, b) => DmnFormula::and(vals[*a].clone(), vals[*b].clone()),
            Gate::Or(a, b) => DmnFormula::or(vals[*a].clone(), vals[*b].clone()),
            Gate::Not(_) => return Err(Error::Circuit("negation left after conversion".into())),
        };
        vals.push(f);
    }
    Ok(vals[c.root].clone())
}

/// Substitutes `x_i ↦ v_i`, `y_j ↦ ¬v_j`, pushes negations down and reads
/// the result back as a DMN formula.
pub fn dmn_of_rail_circuit(c: &Circuit, m: u32) -> Result<DmnFormula> {
    let n = EdgeIndex::new(m)?.n();
    let mut gates = Vec::with_capacity(c.gates.len());
    for g in &c.gates {
        let sub = match g {
            Gate::Var(name) | Gate::NVar(name) => {
                let (rail, i) = parse_rail(name).filter(|(_, i)| *i <= n).ok_or_else(|| {
                    Error::UnknownVariable(format!("{name} is not a rail variable over n = {n}"))
                })?;
                let positive = rail == matches!(g, Gate::Var(_));
                if positive {
                    Gate::Var(format!("v{i}"))
                } else {
                    Gate::NVar(format!("v{i}"))
                }
            }
            other => other.clone(),
        };
        gates.push(sub);
    }
    let substituted = Circuit {
        gates,
        root: c.root,
    };
    read_dmn(&demorgan_convert(&substituted), n)
}

/// Appends gates with structural sharing.
#[derive(Default)]
pub struct CircuitBuilder {
    gates: Vec<Gate>,
    memo: HashMap<Gate, usize>,
}

impl CircuitBuilder {
    pub fn gate(&mut self, g: Gate) -> usize {
        if let Some(&i) = self.memo.get(&g) {
            return i;
        }
        self.gates.push(g.clone());
        self.memo.insert(g, self.gates.len() - 1);
        self.gates.len() - 1
    }

    fn fold(&mut self, items: Vec<usize>, and: bool) -> usize {
        let mut it = items.into_iter();
        let Some(first) = it.next() else {
            return self.gate(if and { Gate::True } else { Gate::False });
        };
        it.fold(first, |acc, x| {
            self.gate(if and {
                Gate::And(acc, x)
            } else {
                Gate::Or(acc, x)
            })
        })
    }

    pub fn and_all(&mut self, items: Vec<usize>) -> usize {
        self.fold(items, true)
    }

    pub fn or_all(&mut self, items: Vec<usize>) -> usize {
        self.fold(items, false)
    }

    pub fn finish(self, root: usize) -> Result<Circuit> {
        Ok(Circuit::from_gates(self.gates, root)?.0)
    }
}

/// Brute-force rail circuit for `CLIQ2`: a disjunction over `POS2` of the
/// conjunction of `x_i` on `D+` and `y_j` on `D-`.
pub fn cliq2_rail_circuit(params: &Params) -> Result<Circuit> {
    let index = EdgeIndex::new(params.m)?;
    let pos2 = enum_pos2(params)?;
    let mut b = CircuitBuilder::default();
    let mut terms = Vec::with_capacity(pos2.len());
    for d in &pos2 {
        let mut lits = Vec::new();
        for i in index.indices(d.pos())? {
            lits.push(b.gate(Gate::Var(format!("x{i}"))));
        }
        for j in index.indices(d.neg())? {
            lits.push(b.gate(Gate::Var(format!("y{j}"))));
        }
        terms.push(b.and_all(lits));
    }
    let root = b.or_all(terms);
    b.finish(root)
}
