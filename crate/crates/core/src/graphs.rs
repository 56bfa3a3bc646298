//! Vertices, edges, plain graphs and double graphs.
//!
//! Graphs are pure edge sets over the vertex universe `[m]`, `m <= 16`.
//! Edge sets are stored as 120-bit masks whose bit order is the
//! lexicographic order of `(lo, hi)`, so comparing masks bitwise gives the
//! same order as comparing sorted edge lists.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported vertex universe.
pub const MAX_VERTICES: u32 = 16;
/// Number of edges of the complete graph on `MAX_VERTICES` vertices.
pub const MAX_EDGES: u32 = MAX_VERTICES * (MAX_VERTICES - 1) / 2;

const fn bit_of(lo: u32, hi: u32) -> u32 {
    (lo - 1) * (2 * MAX_VERTICES - lo) / 2 + (hi - lo - 1)
}

const EDGE_TABLE: [(u8, u8); MAX_EDGES as usize] = {
    let mut table = [(0u8, 0u8); MAX_EDGES as usize];
    let mut lo = 1;
    let mut i = 0;
    while lo < MAX_VERTICES {
        let mut hi = lo + 1;
        while hi <= MAX_VERTICES {
            table[i] = (lo as u8, hi as u8);
            i += 1;
            hi += 1;
        }
        lo += 1;
    }
    table
};

/// Compares two bitmasks as if they were the sorted lists of their set bits.
fn cmp_as_sorted_lists(a: u128, b: u128) -> Ordering {
    if a == b {
        return Ordering::Equal;
    }
    let d = (a ^ b).trailing_zeros();
    let above = if d >= 127 { 0 } else { !0u128 << (d + 1) };
    if (a >> d) & 1 == 1 {
        // a's next element is smaller; a is larger only if b ran out
        if b & above != 0 {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    } else if a & above != 0 {
        Ordering::Greater
    } else {
        Ordering::Less
    }
}

/// An undirected edge `{lo, hi}` with `1 <= lo < hi <= MAX_VERTICES`.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    lo: u8,
    hi: u8,
}

impl Edge {
    /// Builds the canonical edge `{a, b}` in either argument order.
    pub fn new(a: u32, b: u32) -> Result<Edge> {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        if lo == 0 || lo == hi || hi > MAX_VERTICES {
            return Err(Error::InvalidEdge(a, b));
        }
        Ok(Edge {
            lo: lo as u8,
            hi: hi as u8,
        })
    }

    pub fn lo(self) -> u32 {
        self.lo as u32
    }

    pub fn hi(self) -> u32 {
        self.hi as u32
    }

    fn bit(self) -> u32 {
        bit_of(self.lo as u32, self.hi as u32)
    }

    fn from_bit(bit: u32) -> Edge {
        let (lo, hi) = EDGE_TABLE[bit as usize];
        Edge { lo, hi }
    }
}

impl fmt::Debug for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.lo, self.hi)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.lo, self.hi)
    }
}

/// A set of vertices drawn from `[MAX_VERTICES]`, ordered as sorted lists.
#[derive(Copy, Clone, Default, PartialEq, Eq, Hash)]
pub struct VertexSet(u32);

impl VertexSet {
    pub const EMPTY: VertexSet = VertexSet(0);

    pub fn from_bits(bits: u32) -> VertexSet {
        VertexSet(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    /// The full universe `[m]`.
    pub fn range(m: u32) -> VertexSet {
        assert!(m <= MAX_VERTICES);
        if m == 0 {
            VertexSet(0)
        } else {
            VertexSet(u32::MAX >> (32 - m))
        }
    }

    pub fn singleton(v: u32) -> VertexSet {
        assert!((1..=MAX_VERTICES).contains(&v), "vertex {v} out of range");
        VertexSet(1 << (v - 1))
    }

    pub fn contains(self, v: u32) -> bool {
        (1..=MAX_VERTICES).contains(&v) && self.0 & (1 << (v - 1)) != 0
    }

    pub fn insert(&mut self, v: u32) {
        *self = self.union(VertexSet::singleton(v));
    }

    pub fn remove(&mut self, v: u32) {
        self.0 &= !VertexSet::singleton(v).0;
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: VertexSet) -> VertexSet {
        VertexSet(self.0 | other.0)
    }

    pub fn intersection(self, other: VertexSet) -> VertexSet {
        VertexSet(self.0 & other.0)
    }

    pub fn difference(self, other: VertexSet) -> VertexSet {
        VertexSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: VertexSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: VertexSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = u32> {
        let bits = self.0;
        (0..32u32)
            .filter(move |i| bits & (1 << i) != 0)
            .map(|i| i + 1)
    }

    pub fn max(self) -> Option<u32> {
        if self.0 == 0 {
            None
        } else {
            Some(32 - self.0.leading_zeros())
        }
    }
}

impl FromIterator<u32> for VertexSet {
    fn from_iter<I: IntoIterator<Item = u32>>(iter: I) -> Self {
        let mut s = VertexSet::EMPTY;
        for v in iter {
            s.insert(v);
        }
        s
    }
}

impl Ord for VertexSet {
    fn cmp(&self, other: &Self) -> Ordering {
        cmp_as_sorted_lists(self.0 as u128, other.0 as u128)
    }
}

impl PartialOrd for VertexSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// A plain graph: a set of edges. Vertices are the edge endpoints.
#[derive(Copy, Clone, Default, PartialEq, Eq, Hash)]
pub struct PlainGraph(u128);

impl PlainGraph {
    pub const EMPTY: PlainGraph = PlainGraph(0);

    pub fn from_edges<I: IntoIterator<Item = Edge>>(edges: I) -> PlainGraph {
        edges.into_iter().collect()
    }

    /// Convenience constructor from endpoint pairs; panics on invalid pairs.
    pub fn from_pairs(pairs: &[(u32, u32)]) -> PlainGraph {
        pairs
            .iter()
            .map(|&(a, b)| Edge::new(a, b).expect("valid edge"))
            .collect()
    }

    pub fn bits(self) -> u128 {
        self.0
    }

    pub fn single(e: Edge) -> PlainGraph {
        PlainGraph(1 << e.bit())
    }

    pub fn contains(self, e: Edge) -> bool {
        self.0 & (1 << e.bit()) != 0
    }

    pub fn insert(&mut self, e: Edge) {
        self.0 |= 1 << e.bit();
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: PlainGraph) -> PlainGraph {
        PlainGraph(self.0 | other.0)
    }

    pub fn intersection(self, other: PlainGraph) -> PlainGraph {
        PlainGraph(self.0 & other.0)
    }

    pub fn difference(self, other: PlainGraph) -> PlainGraph {
        PlainGraph(self.0 & !other.0)
    }

    pub fn is_subset(self, other: PlainGraph) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: PlainGraph) -> bool {
        self.0 & other.0 == 0
    }

    /// Edges in lexicographic `(lo, hi)` order.
    pub fn edges(self) -> impl Iterator<Item = Edge> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let b = bits.trailing_zeros();
                bits &= bits - 1;
                Some(Edge::from_bit(b))
            }
        })
    }

    /// `v(G)`: the set of edge endpoints.
    pub fn vertices(self) -> VertexSet {
        let mut s = 0u32;
        for e in self.edges() {
            s |= 1 << (e.lo - 1);
            s |= 1 << (e.hi - 1);
        }
        VertexSet(s)
    }

    /// Neighbourhood of `v` inside this graph.
    pub fn neighbours(self, v: u32) -> VertexSet {
        self.edges()
            .filter_map(|e| {
                if e.lo() == v {
                    Some(e.hi())
                } else if e.hi() == v {
                    Some(e.lo())
                } else {
                    None
                }
            })
            .collect()
    }

    /// Whether some `k`-clique is a subgraph of this graph.
    pub fn contains_clique(self, k: usize) -> bool {
        if k <= 1 {
            return true;
        }
        let verts: Vec<u32> = self.vertices().iter().collect();
        let adj: Vec<VertexSet> = (0..=MAX_VERTICES)
            .map(|v| {
                if v == 0 {
                    VertexSet::EMPTY
                } else {
                    self.neighbours(v)
                }
            })
            .collect();
        fn extend(candidates: VertexSet, need: usize, adj: &[VertexSet]) -> bool {
            if need == 0 {
                return true;
            }
            if candidates.len() < need {
                return false;
            }
            for v in candidates.iter() {
                let rest = candidates.intersection(adj[v as usize]);
                // only extend with larger vertices to avoid repeats
                let rest = VertexSet(rest.0 & !((1u32 << v) - 1));
                if extend(rest, need - 1, adj) {
                    return true;
                }
            }
            false
        }
        let all: VertexSet = verts.iter().copied().collect();
        extend(all, k, &adj)
    }
}

impl FromIterator<Edge> for PlainGraph {
    fn from_iter<I: IntoIterator<Item = Edge>>(iter: I) -> Self {
        let mut g = PlainGraph::EMPTY;
        for e in iter {
            g.insert(e);
        }
        g
    }
}

impl Ord for PlainGraph {
    fn cmp(&self, other: &Self) -> Ordering {
        cmp_as_sorted_lists(self.0, other.0)
    }
}

impl PartialOrd for PlainGraph {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for PlainGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for PlainGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for e in self.edges() {
            write!(f, "{e}")?;
        }
        write!(f, "]")
    }
}

/// `X * Y`: all pairs `{x, y}` with `x in X`, `y in Y`, `x != y`.
pub fn star(x: VertexSet, y: VertexSet) -> PlainGraph {
    let mut g = PlainGraph::EMPTY;
    for a in x.iter() {
        for b in y.iter() {
            if a != b {
                g.insert(Edge::new(a, b).expect("vertices within universe"));
            }
        }
    }
    g
}

/// The complete graph on `v`; empty when `|v| <= 1`.
pub fn complete_graph(v: VertexSet) -> PlainGraph {
    star(v, v)
}

/// Missing pairs of `g` inside the complete graph on `v(g)`.
pub fn non_edges(g: PlainGraph) -> PlainGraph {
    complete_graph(g.vertices()).difference(g)
}

/// Whether `g` is exactly the complete graph on `k` vertices.
pub fn is_k_clique(g: PlainGraph, k: usize) -> bool {
    let v = g.vertices();
    v.len() == k && complete_graph(v) == g
}

/// The `+` or `-` part of a double graph.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Side {
    Pos,
    Neg,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Pos => Side::Neg,
            Side::Neg => Side::Pos,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Side::Pos => '+',
            Side::Neg => '-',
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// A pair of edge-disjoint plain graphs `<D+, D->`.
#[derive(Copy, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DoubleGraph {
    pos: PlainGraph,
    neg: PlainGraph,
}

impl DoubleGraph {
    pub const EMPTY: DoubleGraph = DoubleGraph {
        pos: PlainGraph::EMPTY,
        neg: PlainGraph::EMPTY,
    };

    pub fn new(pos: PlainGraph, neg: PlainGraph) -> Result<DoubleGraph> {
        let common = pos.intersection(neg);
        if !common.is_empty() {
            return Err(Error::PartsNotDisjoint(common.to_string()));
        }
        Ok(DoubleGraph { pos, neg })
    }

    pub fn positive(g: PlainGraph) -> DoubleGraph {
        DoubleGraph {
            pos: g,
            neg: PlainGraph::EMPTY,
        }
    }

    pub fn negative(g: PlainGraph) -> DoubleGraph {
        DoubleGraph {
            pos: PlainGraph::EMPTY,
            neg: g,
        }
    }

    pub fn pos(&self) -> PlainGraph {
        self.pos
    }

    pub fn neg(&self) -> PlainGraph {
        self.neg
    }

    pub fn side(&self, side: Side) -> PlainGraph {
        match side {
            Side::Pos => self.pos,
            Side::Neg => self.neg,
        }
    }

    /// Replaces one side, failing if the result would not be edge-disjoint.
    pub fn with_side(&self, side: Side, g: PlainGraph) -> Result<DoubleGraph> {
        match side {
            Side::Pos => DoubleGraph::new(g, self.neg),
            Side::Neg => DoubleGraph::new(self.pos, g),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.pos.is_empty() && self.neg.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.pos.len() + self.neg.len()
    }

    /// `||v(D)||`: the larger of the two vertex counts.
    pub fn vertex_norm(&self) -> usize {
        self.pos.vertices().len().max(self.neg.vertices().len())
    }

    /// The partial merge `D ⋓ E`; `None` when the unions clash.
    pub fn merge(&self, other: &DoubleGraph) -> Option<DoubleGraph> {
        DoubleGraph::new(self.pos.union(other.pos), self.neg.union(other.neg)).ok()
    }

    /// `D ⋓^ℓ E`: the merge, kept only when both parts have at most `ell` vertices.
    pub fn merge_bounded(&self, other: &DoubleGraph, ell: usize) -> Option<DoubleGraph> {
        self.merge(other).filter(|d| d.vertex_norm() <= ell)
    }

    /// `D ⊆± E`: componentwise inclusion.
    pub fn subset_pm(&self, other: &DoubleGraph) -> bool {
        self.pos.is_subset(other.pos) && self.neg.is_subset(other.neg)
    }

    /// `D ⊆∓ E`: inclusion on at least one side.
    pub fn subset_mp(&self, other: &DoubleGraph) -> bool {
        self.pos.is_subset(other.pos) || self.neg.is_subset(other.neg)
    }

    /// Largest vertex mentioned on either side.
    pub fn max_vertex(&self) -> u32 {
        self.pos.union(self.neg).vertices().max().unwrap_or(0)
    }
}

impl fmt::Debug for DoubleGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for DoubleGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "+{} -{}", self.pos, self.neg)
    }
}

/// Parser state shared by the double-graph and family readers.
pub(crate) struct Cursor<'a> {
    text: &'a [u8],
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(text: &'a str, line: usize) -> Self {
        Cursor {
            text: text.as_bytes(),
            pos: 0,
            line,
        }
    }

    pub(crate) fn error(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.line, self.pos + 1, msg)
    }

    pub(crate) fn skip_ws(&mut self) {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    pub(crate) fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.text.get(self.pos).copied()
    }

    pub(crate) fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected `{}`", c as char)))
        }
    }

    pub(crate) fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub(crate) fn number(&mut self) -> Result<u64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected a number"));
        }
        std::str::from_utf8(&self.text[start..self.pos])
            .expect("ascii digits")
            .parse()
            .map_err(|_| self.error("number too large"))
    }

    pub(crate) fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }

    fn plain_graph(&mut self) -> Result<PlainGraph> {
        self.expect(b'[')?;
        let mut g = PlainGraph::EMPTY;
        while !self.eat(b']') {
            self.expect(b'(')?;
            let col = self.pos;
            let a = self.number()?;
            self.expect(b',')?;
            let b = self.number()?;
            self.expect(b')')?;
            let e = Edge::new(a.min(u32::MAX as u64) as u32, b.min(u32::MAX as u64) as u32)
                .map_err(|e| Error::parse(self.line, col + 1, e.to_string()))?;
            g.insert(e);
        }
        Ok(g)
    }

    pub(crate) fn double_graph(&mut self) -> Result<DoubleGraph> {
        let start = self.pos;
        self.expect(b'+')?;
        let pos = self.plain_graph()?;
        self.expect(b'-')?;
        let neg = self.plain_graph()?;
        DoubleGraph::new(pos, neg).map_err(|e| Error::parse(self.line, start + 1, e.to_string()))
    }
}

impl FromStr for DoubleGraph {
    type Err = Error;

    /// Parses `+[(1,2)(2,3)] -[(4,5)]`.
    fn from_str(s: &str) -> Result<Self> {
        let mut c = Cursor::new(s, 1);
        let d = c.double_graph()?;
        if !c.at_end() {
            return Err(c.error("trailing input"));
        }
        Ok(d)
    }
}

/// A coloring `f: [m] -> [k-1]`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Coloring {
    values: Vec<u8>,
}

impl Coloring {
    pub fn new(values: Vec<u8>, k: usize) -> Result<Coloring> {
        if values.len() > MAX_VERTICES as usize {
            return Err(Error::InvalidParams(format!(
                "coloring over {} vertices exceeds {MAX_VERTICES}",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|&&c| c == 0 || c as usize >= k) {
            return Err(Error::InvalidParams(format!(
                "color {bad} outside 1..={}",
                k - 1
            )));
        }
        Ok(Coloring { values })
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    pub fn m(&self) -> usize {
        self.values.len()
    }

    /// `C_f`: the bichromatic edges.
    pub fn graph(&self) -> PlainGraph {
        let mut g = PlainGraph::EMPTY;
        for x in 0..self.values.len() {
            for y in x + 1..self.values.len() {
                if self.values[x] != self.values[y] {
                    g.insert(Edge::new(x as u32 + 1, y as u32 + 1).expect("in range"));
                }
            }
        }
        g
    }
}

impl fmt::Display for Coloring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// `C_f` for a coloring.
pub fn coloring_graph(f: &Coloring) -> PlainGraph {
    f.graph()
}

/// The bijection `[n] <-> [m]^(2)` in lexicographic edge order, `n = m(m-1)/2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeIndex {
    m: u32,
    edges: Vec<Edge>,
}

impl EdgeIndex {
    pub fn new(m: u32) -> Result<EdgeIndex> {
        if m > MAX_VERTICES {
            return Err(Error::InvalidParams(format!(
                "m = {m} exceeds the supported universe of {MAX_VERTICES} vertices"
            )));
        }
        let mut edges = Vec::new();
        for lo in 1..=m {
            for hi in lo + 1..=m {
                edges.push(Edge::new(lo, hi)?);
            }
        }
        Ok(EdgeIndex { m, edges })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> usize {
        self.edges.len()
    }

    /// `π(i)` for `1 <= i <= n`.
    pub fn edge_of_index(&self, i: usize) -> Result<Edge> {
        if i == 0 || i > self.edges.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                n: self.edges.len(),
            });
        }
        Ok(self.edges[i - 1])
    }

    /// `π⁻¹(e)`.
    pub fn index_of_edge(&self, e: Edge) -> Result<usize> {
        if e.hi() > self.m {
            return Err(Error::VertexOutOfRange {
                vertex: e.hi(),
                m: self.m,
            });
        }
        let (lo, hi) = (e.lo() as usize, e.hi() as usize);
        let m = self.m as usize;
        Ok((lo - 1) * (2 * m - lo) / 2 + (hi - lo))
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// The complete graph on `[m]`.
    pub fn universe(&self) -> PlainGraph {
        self.edges.iter().copied().collect()
    }

    /// Indices of the edges of `g`, ascending.
    pub fn indices(&self, g: PlainGraph) -> Result<Vec<usize>> {
        g.edges().map(|e| self.index_of_edge(e)).collect()
    }

    /// Checks that every edge of `d` lies in `[m]`.
    pub fn check(&self, d: &DoubleGraph) -> Result<()> {
        let v = d.max_vertex();
        if v > self.m {
            return Err(Error::VertexOutOfRange {
                vertex: v,
                m: self.m,
            });
        }
        Ok(())
    }
}
