//! Graph carrier shared by every program variant.

mod builder;
mod qbpf;

pub use builder::ProgramBuilder;
pub use qbpf::{parse_program, serialize_program};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// Dense node index in `[0, |V|)`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Output label of a sink.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Outcome {
    Zero,
    One,
    Unknown,
}

impl Outcome {
    pub const ALL: [Outcome; 3] = [Outcome::Zero, Outcome::One, Outcome::Unknown];

    pub fn from_bool(b: bool) -> Self {
        if b {
            Outcome::One
        } else {
            Outcome::Zero
        }
    }

    /// Position in `[p_0, p_1, p_?]` arrays.
    pub fn index(self) -> usize {
        match self {
            Outcome::Zero => 0,
            Outcome::One => 1,
            Outcome::Unknown => 2,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Outcome::Zero => "0",
            Outcome::One => "1",
            Outcome::Unknown => "?",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        match s {
            "0" => Some(Outcome::Zero),
            "1" => Some(Outcome::One),
            "?" => Some(Outcome::Unknown),
            _ => None,
        }
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            Outcome::Zero => Some(false),
            Outcome::One => Some(true),
            Outcome::Unknown => None,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    Internal { var: usize },
    Sink(Outcome),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Node {
    pub kind: NodeKind,
    /// Measurement class, only used by generalized-measurement programs.
    pub class: Option<usize>,
}

impl Node {
    pub fn internal(var: usize) -> Self {
        Node {
            kind: NodeKind::Internal { var },
            class: None,
        }
    }

    pub fn sink(label: Outcome) -> Self {
        Node {
            kind: NodeKind::Sink(label),
            class: None,
        }
    }

    pub fn is_sink(&self) -> bool {
        matches!(self.kind, NodeKind::Sink(_))
    }

    pub fn var(&self) -> Option<usize> {
        match self.kind {
            NodeKind::Internal { var } => Some(var),
            NodeKind::Sink(_) => None,
        }
    }

    pub fn label(&self) -> Option<Outcome> {
        match self.kind {
            NodeKind::Sink(l) => Some(l),
            NodeKind::Internal { .. } => None,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
    pub bit: bool,
    pub amp: C64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    Deterministic,
    Randomized,
    Quantum,
    /// Generalized measurement with `k` outcome classes.
    QuantumGm(usize),
}

impl Mode {
    pub fn name(self) -> String {
        match self {
            Mode::Deterministic => "det".into(),
            Mode::Randomized => "rand".into(),
            Mode::Quantum => "quantum".into(),
            Mode::QuantumGm(k) => format!("gm({k})"),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// A branching program of any mode. Immutable once built.
///
/// Edges are kept sorted by `(from, bit, to)` so that the out-edges of a
/// node under one bit form a contiguous slice.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchingProgram {
    n_vars: usize,
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    start: NodeId,
    mode: Mode,
    offsets: Vec<usize>,
}

impl BranchingProgram {
    /// Assemble from parts; performs the structural checks shared by the
    /// builder and the parser.
    pub fn from_parts(
        n_vars: usize,
        nodes: Vec<Node>,
        mut edges: Vec<Edge>,
        start: NodeId,
        mode: Mode,
    ) -> Result<Self> {
        let n = nodes.len();
        if n == 0 {
            return Err(Error::Structure("program has no nodes".into()));
        }
        if start.0 >= n {
            return Err(Error::DanglingId(start.0));
        }
        if let Mode::QuantumGm(k) = mode {
            if k < 3 {
                return Err(Error::Structure(format!("gm mode needs k >= 3, got {k}")));
            }
        }
        for (i, node) in nodes.iter().enumerate() {
            match node.kind {
                NodeKind::Internal { var } => {
                    if var >= n_vars {
                        return Err(Error::Structure(format!(
                            "node {i} tests variable {var} but n_vars = {n_vars}"
                        )));
                    }
                }
                NodeKind::Sink(label) => {
                    if node.class.is_some() {
                        return Err(Error::Structure(format!("sink {i} carries a class")));
                    }
                    if label == Outcome::Unknown
                        && matches!(mode, Mode::QuantumGm(_) | Mode::Deterministic)
                    {
                        return Err(Error::Structure(format!(
                            "sink {i} labeled ? is not allowed in {mode} mode"
                        )));
                    }
                }
            }
            match (mode, node.class) {
                (Mode::QuantumGm(k), Some(c)) if c < 2 || c >= k => {
                    return Err(Error::Structure(format!(
                        "node {i} has class {c} outside 2..{k}"
                    )))
                }
                (Mode::QuantumGm(_), _) | (_, None) => {}
                (_, Some(_)) => {
                    return Err(Error::Structure(format!(
                        "node {i} has a class outside gm mode"
                    )))
                }
            }
        }
        edges.retain(|e| e.amp != C64::new(0.0, 0.0));
        for e in &edges {
            for id in [e.from, e.to] {
                if id.0 >= n {
                    return Err(Error::DanglingId(id.0));
                }
            }
            if nodes[e.from.0].is_sink() {
                return Err(Error::Structure(format!("edge leaves sink {}", e.from)));
            }
            if !(e.amp.re.is_finite() && e.amp.im.is_finite()) {
                return Err(Error::Structure(format!(
                    "edge {} -> {} has a non-finite amplitude",
                    e.from, e.to
                )));
            }
            if mode == Mode::Randomized && (e.amp.im != 0.0 || e.amp.re <= 0.0 || e.amp.re > 1.0)
            {
                return Err(Error::Structure(format!(
                    "randomized edge {} -> {} must carry a probability in (0,1]",
                    e.from, e.to
                )));
            }
        }
        edges.sort_by(|a, b| (a.from, a.bit, a.to).cmp(&(b.from, b.bit, b.to)));
        for w in edges.windows(2) {
            if (w[0].from, w[0].bit, w[0].to) == (w[1].from, w[1].bit, w[1].to) {
                return Err(Error::DuplicateEdge {
                    from: w[0].from.0,
                    to: w[0].to.0,
                    bit: w[0].bit as u8,
                });
            }
        }
        let mut offsets = vec![0usize; 2 * n + 1];
        for e in &edges {
            offsets[2 * e.from.0 + e.bit as usize + 1] += 1;
        }
        for i in 1..offsets.len() {
            offsets[i] += offsets[i - 1];
        }
        Ok(BranchingProgram {
            n_vars,
            nodes,
            edges,
            start,
            mode,
            offsets,
        })
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, v: NodeId) -> &Node {
        &self.nodes[v.0]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn start(&self) -> NodeId {
        self.start
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Number of nodes, sinks included.
    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len()).map(NodeId)
    }

    /// Out-edges of `v` followed when its variable carries `bit`.
    pub fn successors(&self, v: NodeId, bit: bool) -> &[Edge] {
        let k = 2 * v.0 + bit as usize;
        &self.edges[self.offsets[k]..self.offsets[k + 1]]
    }

    /// All out-edges of `v` (both bits).
    pub fn out_edges(&self, v: NodeId) -> &[Edge] {
        &self.edges[self.offsets[2 * v.0]..self.offsets[2 * v.0 + 2]]
    }

    pub fn is_sink(&self, v: NodeId) -> bool {
        self.nodes[v.0].is_sink()
    }

    pub fn var(&self, v: NodeId) -> Option<usize> {
        self.nodes[v.0].var()
    }

    pub fn label(&self, v: NodeId) -> Option<Outcome> {
        self.nodes[v.0].label()
    }

    pub fn class(&self, v: NodeId) -> Option<usize> {
        self.nodes[v.0].class
    }

    pub fn internal_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.node_ids().filter(move |&v| !self.is_sink(v))
    }

    pub fn sinks(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.node_ids().filter(move |&v| self.is_sink(v))
    }

    /// Predecessor lists (deduplicated, sorted) of every node.
    pub fn predecessors(&self) -> Vec<Vec<NodeId>> {
        let mut pred = vec![Vec::new(); self.size()];
        for e in &self.edges {
            pred[e.to.0].push(e.from);
        }
        for p in &mut pred {
            p.sort();
            p.dedup();
        }
        pred
    }

    /// Nodes reachable from the start along edges of either bit.
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.size()];
        let mut stack = vec![self.start];
        seen[self.start.0] = true;
        while let Some(v) = stack.pop() {
            for e in self.out_edges(v) {
                if !seen[e.to.0] {
                    seen[e.to.0] = true;
                    stack.push(e.to);
                }
            }
        }
        seen
    }

    /// Topological order of all nodes, or `None` if a cycle exists.
    pub fn topological_order(&self) -> Option<Vec<NodeId>> {
        let n = self.size();
        let mut indeg = vec![0usize; n];
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for v in 0..n {
            let mut targets: Vec<usize> = self.out_edges(NodeId(v)).iter().map(|e| e.to.0).collect();
            targets.sort_unstable();
            targets.dedup();
            for &t in &targets {
                indeg[t] += 1;
            }
            adj[v] = targets;
        }
        let mut queue: std::collections::VecDeque<usize> =
            (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = queue.pop_front() {
            order.push(NodeId(v));
            for &t in &adj[v] {
                indeg[t] -= 1;
                if indeg[t] == 0 {
                    queue.push_back(t);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_some()
    }

    /// Length of the longest path from the start, if acyclic.
    pub fn depth(&self) -> Option<usize> {
        let order = self.topological_order()?;
        let reach = self.reachable();
        let mut dist = vec![0usize; self.size()];
        let mut best = 0;
        for v in order {
            if !reach[v.0] {
                continue;
            }
            best = best.max(dist[v.0]);
            for e in self.out_edges(v) {
                dist[e.to.0] = dist[e.to.0].max(dist[v.0] + 1);
            }
        }
        Some(best)
    }

    /// Same graph under another mode, re-running the structural checks.
    pub fn with_mode(&self, mode: Mode) -> Result<Self> {
        Self::from_parts(
            self.n_vars,
            self.nodes.clone(),
            self.edges.clone(),
            self.start,
            mode,
        )
    }

    /// Copy with the given nodes kept (renumbered densely in id order).
    /// Edges touching dropped nodes are removed.
    pub fn restrict(&self, keep: &[bool]) -> Result<Self> {
        if !keep[self.start.0] {
            return Err(Error::InvalidArgument("cannot drop the start node".into()));
        }
        let mut map = vec![usize::MAX; self.size()];
        let mut nodes = Vec::new();
        for (i, node) in self.nodes.iter().enumerate() {
            if keep[i] {
                map[i] = nodes.len();
                nodes.push(*node);
            }
        }
        let edges = self
            .edges
            .iter()
            .filter(|e| keep[e.from.0] && keep[e.to.0])
            .map(|e| Edge {
                from: NodeId(map[e.from.0]),
                to: NodeId(map[e.to.0]),
                ..*e
            })
            .collect();
        Self::from_parts(self.n_vars, nodes, edges, NodeId(map[self.start.0]), self.mode)
    }

    /// Copy containing only nodes reachable from the start.
    pub fn prune_unreachable(&self) -> Result<Self> {
        self.restrict(&self.reachable())
    }

    /// Copy with nodes renumbered by `perm` (old id `i` becomes `perm[i]`).
    pub fn renumber(&self, perm: &[usize]) -> Result<Self> {
        let n = self.size();
        if perm.len() != n {
            return Err(Error::InvalidArgument("permutation length mismatch".into()));
        }
        let mut nodes = vec![Node::sink(Outcome::Zero); n];
        let mut seen = vec![false; n];
        for (i, &p) in perm.iter().enumerate() {
            if p >= n || seen[p] {
                return Err(Error::InvalidArgument("not a permutation".into()));
            }
            seen[p] = true;
            nodes[p] = self.nodes[i];
        }
        let edges = self
            .edges
            .iter()
            .map(|e| Edge {
                from: NodeId(perm[e.from.0]),
                to: NodeId(perm[e.to.0]),
                ..*e
            })
            .collect();
        Self::from_parts(self.n_vars, nodes, edges, NodeId(perm[self.start.0]), self.mode)
    }
}

/// A total boolean input vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment(Vec<bool>);

impl Assignment {
    pub fn new(bits: Vec<bool>) -> Self {
        Assignment(bits)
    }

    pub fn zeros(n: usize) -> Self {
        Assignment(vec![false; n])
    }

    /// Bit `i` of `index` becomes variable `i`.
    pub fn from_index(n: usize, index: u64) -> Self {
        Assignment((0..n).map(|i| (index >> i) & 1 == 1).collect())
    }

    /// All `2^n` assignments in index order.
    pub fn all(n: usize) -> impl Iterator<Item = Assignment> {
        assert!(n < 64, "too many variables to enumerate");
        (0..1u64 << n).map(move |i| Assignment::from_index(n, i))
    }

    /// Parse a string of `0`/`1` characters; character `i` is variable `i`.
    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::InvalidArgument(format!("invalid bit character {c:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Assignment)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, b: bool) {
        self.0[i] = b;
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn to_index(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &b)| acc | ((b as u64) << i))
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}
