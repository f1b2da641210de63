use num_complex::Complex64 as C64;
use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::model::{BranchingProgram, Mode, Node, NodeId, Outcome, ProgramBuilder};
use crate::validate::{Rule, ValidationReport};

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
enum DraftKind {
    Labeled(usize),
    Unlabeled,
    Sink(Outcome),
}

/// Program under construction that may contain unlabeled nodes, whose
/// edges carry only an amplitude and are followed for either bit.
#[derive(Clone, Debug)]
pub struct DraftProgram {
    n_vars: usize,
    mode: Mode,
    nodes: Vec<(DraftKind, Option<usize>)>,
    edges: Vec<(usize, usize, Option<bool>, C64)>,
    start: usize,
}

impl DraftProgram {
    pub fn new(n_vars: usize, mode: Mode) -> Self {
        DraftProgram {
            n_vars,
            mode,
            nodes: Vec::new(),
            edges: Vec::new(),
            start: 0,
        }
    }

    fn push(&mut self, k: DraftKind) -> NodeId {
        self.nodes.push((k, None));
        NodeId(self.nodes.len() - 1)
    }

    pub fn labeled(&mut self, var: usize) -> NodeId {
        self.push(DraftKind::Labeled(var))
    }

    pub fn unlabeled(&mut self) -> NodeId {
        self.push(DraftKind::Unlabeled)
    }

    pub fn sink(&mut self, label: Outcome) -> NodeId {
        self.push(DraftKind::Sink(label))
    }

    pub fn set_class(&mut self, v: NodeId, class: usize) {
        self.nodes[v.0].1 = Some(class);
    }

    pub fn set_start(&mut self, v: NodeId) {
        self.start = v.0;
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Bit-labeled edge out of a labeled node.
    pub fn edge(&mut self, from: NodeId, to: NodeId, bit: bool, amp: C64) {
        self.edges.push((from.0, to.0, Some(bit), amp));
    }

    pub fn edge_both(&mut self, from: NodeId, to: NodeId, amp: C64) {
        self.edge(from, to, false, amp);
        self.edge(from, to, true, amp);
    }

    /// Amplitude-only edge out of an unlabeled node.
    pub fn plain(&mut self, from: NodeId, to: NodeId, amp: C64) {
        self.edges.push((from.0, to.0, None, amp));
    }
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    let mut y = x;
    while parent[y] != r {
        let next = parent[y];
        parent[y] = r;
        y = next;
    }
    r
}

/// Replace unlabeled nodes by labeled ones with identical 0- and 1-edges.
///
/// Unlabeled nodes that share a successor are labeled together; their
/// variable is the one tested by the labeled predecessors of their
/// successors (variable 0 if unconstrained). A conflict is reported as a
/// unidirectionality violation.
pub fn expand_unlabeled(draft: &DraftProgram) -> Result<BranchingProgram> {
    let n = draft.nodes.len();
    for &(from, _, bit, _) in &draft.edges {
        let unlabeled = draft.nodes[from].0 == DraftKind::Unlabeled;
        if unlabeled != bit.is_none() {
            return Err(Error::Structure(format!(
                "node {from}: unlabeled nodes take plain edges, labeled nodes take bit edges"
            )));
        }
    }
    let mut parent: Vec<usize> = (0..n).collect();
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(from, to, _, _) in &draft.edges {
        preds[to].push(from);
    }
    for list in &preds {
        let unl: Vec<usize> = list
            .iter()
            .cloned()
            .filter(|&u| draft.nodes[u].0 == DraftKind::Unlabeled)
            .collect();
        for w in unl.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            parent[a] = b;
        }
    }
    let mut required: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for list in &preds {
        let labeled: BTreeSet<usize> = list
            .iter()
            .filter_map(|&u| match draft.nodes[u].0 {
                DraftKind::Labeled(v) => Some(v),
                _ => None,
            })
            .collect();
        for &u in list {
            if draft.nodes[u].0 == DraftKind::Unlabeled {
                let r = find(&mut parent, u);
                required[r].extend(labeled.iter().cloned());
            }
        }
    }
    let mut b = ProgramBuilder::new(draft.n_vars, draft.mode);
    let mut report = ValidationReport::new();
    for (i, &(kind, class)) in draft.nodes.iter().enumerate() {
        let node = match kind {
            DraftKind::Labeled(v) => Node::internal(v),
            DraftKind::Sink(l) => Node::sink(l),
            DraftKind::Unlabeled => {
                let r = find(&mut parent, i);
                if required[r].len() > 1 {
                    report.push(
                        Rule::Unidirectional,
                        vec![i],
                        None,
                        format!(
                            "unlabeled node {i} shares successors with nodes testing {:?}",
                            required[r]
                        ),
                    );
                }
                Node::internal(required[r].iter().next().cloned().unwrap_or(0))
            }
        };
        b.add_node(Node { class, ..node });
    }
    if !report.ok {
        return Err(Error::Validation(report));
    }
    for &(from, to, bit, amp) in &draft.edges {
        match bit {
            Some(bit) => b.edge(NodeId(from), NodeId(to), bit, amp),
            None => b.edge_both(NodeId(from), NodeId(to), amp),
        }
    }
    b.set_start(NodeId(draft.start));
    b.build()
}
