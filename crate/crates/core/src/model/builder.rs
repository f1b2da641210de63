use num_complex::Complex64 as C64;
use std::collections::BTreeMap;

use super::{BranchingProgram, Edge, Mode, Node, NodeId, Outcome};
use crate::error::{Error, Result};

/// Incremental constructor for [`BranchingProgram`].
///
/// Edge errors (duplicates) are remembered and reported by [`build`](Self::build)
/// so construction code can stay linear.
#[derive(Clone, Debug)]
pub struct ProgramBuilder {
    n_vars: usize,
    mode: Mode,
    nodes: Vec<Node>,
    edges: BTreeMap<(usize, bool, usize), C64>,
    start: Option<NodeId>,
    error: Option<Error>,
}

impl ProgramBuilder {
    pub fn new(n_vars: usize, mode: Mode) -> Self {
        ProgramBuilder {
            n_vars,
            mode,
            nodes: Vec::new(),
            edges: BTreeMap::new(),
            start: None,
            error: None,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn add_node(&mut self, node: Node) -> NodeId {
        self.nodes.push(node);
        NodeId(self.nodes.len() - 1)
    }

    pub fn internal(&mut self, var: usize) -> NodeId {
        self.add_node(Node::internal(var))
    }

    pub fn internal_in_class(&mut self, var: usize, class: usize) -> NodeId {
        self.add_node(Node {
            class: Some(class),
            ..Node::internal(var)
        })
    }

    pub fn sink(&mut self, label: Outcome) -> NodeId {
        self.add_node(Node::sink(label))
    }

    pub fn set_class(&mut self, v: NodeId, class: usize) {
        self.nodes[v.0].class = Some(class);
    }

    pub fn set_start(&mut self, v: NodeId) {
        self.start = Some(v);
    }

    /// Add an edge; a second edge with the same `(from, bit, to)` is an error.
    pub fn edge(&mut self, from: NodeId, to: NodeId, bit: bool, amp: C64) {
        if self.edges.insert((from.0, bit, to.0), amp).is_some() && self.error.is_none() {
            self.error = Some(Error::DuplicateEdge {
                from: from.0,
                to: to.0,
                bit: bit as u8,
            });
        }
    }

    pub fn edge_both(&mut self, from: NodeId, to: NodeId, amp: C64) {
        self.edge(from, to, false, amp);
        self.edge(from, to, true, amp);
    }

    /// Add `amp` to the amplitude of `(from, bit, to)`, creating the edge if needed.
    pub fn accumulate(&mut self, from: NodeId, to: NodeId, bit: bool, amp: C64) {
        *self
            .edges
            .entry((from.0, bit, to.0))
            .or_insert(C64::new(0.0, 0.0)) += amp;
    }

    pub fn build(self) -> Result<BranchingProgram> {
        if let Some(e) = self.error {
            return Err(e);
        }
        let start = self
            .start
            .or(if self.nodes.is_empty() { None } else { Some(NodeId(0)) })
            .ok_or_else(|| Error::Structure("program has no nodes".into()))?;
        let edges = self
            .edges
            .into_iter()
            .map(|((f, bit, t), amp)| Edge {
                from: NodeId(f),
                to: NodeId(t),
                bit,
                amp,
            })
            .collect();
        BranchingProgram::from_parts(self.n_vars, self.nodes, edges, start, self.mode)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_edge_is_reported() {
        let mut b = ProgramBuilder::new(1, Mode::Quantum);
        let s = b.internal(0);
        let t = b.sink(Outcome::One);
        b.edge(s, t, false, C64::new(1.0, 0.0));
        b.edge(s, t, false, C64::new(1.0, 0.0));
        assert!(matches!(b.build(), Err(Error::DuplicateEdge { .. })));
    }

    #[test]
    fn accumulated_zero_edges_vanish() {
        let mut b = ProgramBuilder::new(1, Mode::Quantum);
        let s = b.internal(0);
        let t = b.sink(Outcome::One);
        b.accumulate(s, t, false, C64::new(0.5, 0.0));
        b.accumulate(s, t, false, C64::new(-0.5, 0.0));
        assert!(b.build().unwrap().edges().is_empty());
    }

    #[test]
    fn dangling_start_is_rejected() {
        let mut b = ProgramBuilder::new(0, Mode::Quantum);
        b.sink(Outcome::One);
        b.set_start(NodeId(5));
        assert!(matches!(b.build(), Err(Error::DanglingId(5))));
    }
}
