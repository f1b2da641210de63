//! Structural constraints of every program mode.

use num_complex::Complex64 as C64;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{BranchingProgram, Mode, NodeId, Outcome};

/// Identifier of the rule a violation refers to.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    WellFormed,
    GmWellFormed,
    GmMissingClass,
    Unidirectional,
    Deterministic,
    Randomized,
    Reversible,
    Leveled,
    Ordered,
    Acyclic,
    Scheme,
}

impl Rule {
    pub fn id(self) -> &'static str {
        match self {
            Rule::WellFormed => "well-formed",
            Rule::GmWellFormed => "gm-well-formed",
            Rule::GmMissingClass => "gm-missing-class",
            Rule::Unidirectional => "unidirectional",
            Rule::Deterministic => "deterministic",
            Rule::Randomized => "randomized",
            Rule::Reversible => "reversible",
            Rule::Leveled => "leveled",
            Rule::Ordered => "ordered",
            Rule::Acyclic => "acyclic",
            Rule::Scheme => "scheme",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub rule: Rule,
    pub nodes: Vec<usize>,
    pub residual: Option<f64>,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
    /// Largest residual seen by numerical checks, violating or not.
    pub max_residual: f64,
}

impl ValidationReport {
    pub fn new() -> Self {
        ValidationReport {
            ok: true,
            violations: Vec::new(),
            max_residual: 0.0,
        }
    }

    pub fn push(&mut self, rule: Rule, nodes: Vec<usize>, residual: Option<f64>, detail: impl Into<String>) {
        self.ok = false;
        self.violations.push(Violation {
            rule,
            nodes,
            residual,
            detail: detail.into(),
        });
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.ok &= other.ok;
        self.max_residual = self.max_residual.max(other.max_residual);
        self.violations.extend(other.violations);
    }

    pub fn is_ok(&self) -> bool {
        self.ok
    }

    pub fn into_result(self) -> Result<()> {
        if self.ok {
            Ok(())
        } else {
            Err(Error::Validation(self))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok {
            return writeln!(f, "ok (max residual {:.3e})", self.max_residual);
        }
        for v in &self.violations {
            write!(f, "violation {} nodes={:?}", v.rule.id(), v.nodes)?;
            if let Some(r) = v.residual {
                write!(f, " residual={r:.3e}")?;
            }
            writeln!(f, ": {}", v.detail)?;
        }
        Ok(())
    }
}

fn wrong_mode(expected: &str, bp: &BranchingProgram) -> Error {
    Error::WrongMode {
        expected: expected.into(),
        found: bp.mode().name(),
    }
}

/// Inner products of all column pairs sharing a target, keyed by
/// `(u, b_u, v, b_v)` with `(u, b_u) <= (v, b_v)`.
fn column_products(bp: &BranchingProgram) -> BTreeMap<(usize, bool, usize, bool), C64> {
    let mut incoming: Vec<Vec<(usize, bool, C64)>> = vec![Vec::new(); bp.size()];
    for e in bp.edges() {
        incoming[e.to.0].push((e.from.0, e.bit, e.amp));
    }
    let mut acc: BTreeMap<(usize, bool, usize, bool), C64> = BTreeMap::new();
    for list in &incoming {
        for (i, &(u, bu, au)) in list.iter().enumerate() {
            for &(v, bv, av) in &list[i..] {
                let (key, val) = if (u, bu) <= (v, bv) {
                    ((u, bu, v, bv), au.conj() * av)
                } else {
                    ((v, bv, u, bu), av.conj() * au)
                };
                *acc.entry(key).or_insert(C64::new(0.0, 0.0)) += val;
            }
        }
    }
    acc
}

/// Realizable-pair orthonormality check shared by (W) and its gm variant.
fn orthonormality(bp: &BranchingProgram, tol: f64, rule: Rule, same_class_only: bool) -> ValidationReport {
    let mut rep = ValidationReport::new();
    let acc = column_products(bp);
    let var = |u: usize| bp.var(NodeId(u)).expect("edges leave internal nodes");
    let related = |u: usize, v: usize| !same_class_only || bp.class(NodeId(u)) == bp.class(NodeId(v));
    for u in bp.internal_nodes() {
        for b in [false, true] {
            let norm = acc.get(&(u.0, b, u.0, b)).map_or(0.0, |c| c.re);
            let r = (norm - 1.0).abs();
            rep.max_residual = rep.max_residual.max(r);
            if r > tol {
                rep.push(
                    rule,
                    vec![u.0],
                    Some(r),
                    format!("column of node {u} under bit {} has squared norm {norm:.12}", b as u8),
                );
            }
        }
    }
    for (&(u, bu, v, bv), &ip) in &acc {
        if u == v {
            continue;
        }
        if var(u) == var(v) && bu != bv {
            continue;
        }
        if !related(u, v) {
            continue;
        }
        let r = ip.norm();
        rep.max_residual = rep.max_residual.max(r);
        if r > tol {
            rep.push(
                rule,
                vec![u, v],
                Some(r),
                format!(
                    "columns of nodes {u} (bit {}) and {v} (bit {}) have inner product {:.6}{:+.6}i",
                    bu as u8, bv as u8, ip.re, ip.im
                ),
            );
        }
    }
    rep
}

/// Condition (W): the one-step images of internal nodes are orthonormal for
/// every realizable combination of their variables' bits.
pub fn check_well_formed(bp: &BranchingProgram, tol: f64) -> Result<ValidationReport> {
    if bp.mode() != Mode::Quantum {
        return Err(wrong_mode("quantum", bp));
    }
    Ok(orthonormality(bp, tol, Rule::WellFormed, false))
}

/// Condition (W*): orthonormality only within each measurement class.
pub fn check_gm_well_formed(bp: &BranchingProgram, tol: f64) -> Result<ValidationReport> {
    if !matches!(bp.mode(), Mode::QuantumGm(_)) {
        return Err(wrong_mode("gm", bp));
    }
    let mut rep = ValidationReport::new();
    for v in bp.internal_nodes() {
        if bp.class(v).is_none() {
            rep.push(Rule::GmMissingClass, vec![v.0], None, format!("internal node {v} has no class"));
        }
    }
    rep.merge(orthonormality(bp, tol, Rule::GmWellFormed, true));
    Ok(rep)
}

/// Every node's predecessors test one common variable.
pub fn check_unidirectional(bp: &BranchingProgram) -> ValidationReport {
    let mut rep = ValidationReport::new();
    for (w, preds) in bp.predecessors().iter().enumerate() {
        let vars: BTreeSet<usize> = preds.iter().filter_map(|&p| bp.var(p)).collect();
        if vars.len() > 1 {
            let mut nodes = vec![w];
            nodes.extend(preds.iter().map(|p| p.0));
            rep.push(
                Rule::Unidirectional,
                nodes,
                None,
                format!("node {w} has predecessors labeled by variables {vars:?}"),
            );
        }
    }
    rep
}

/// Deterministic-mode shape: one 0-edge and one 1-edge of amplitude 1 per
/// internal node, and no cycles.
pub fn check_deterministic_structure(bp: &BranchingProgram) -> Result<ValidationReport> {
    if bp.mode() != Mode::Deterministic {
        return Err(wrong_mode("det", bp));
    }
    let mut rep = ValidationReport::new();
    for v in bp.internal_nodes() {
        for b in [false, true] {
            let s = bp.successors(v, b);
            if s.len() != 1 || s[0].amp != C64::new(1.0, 0.0) {
                rep.push(
                    Rule::Deterministic,
                    vec![v.0],
                    None,
                    format!("node {v} needs exactly one {}-edge of weight 1", b as u8),
                );
            }
        }
    }
    if !bp.is_acyclic() {
        rep.push(Rule::Acyclic, vec![], None, "deterministic program contains a cycle");
    }
    Ok(rep)
}

/// Randomized-mode shape: outgoing probabilities sum to 1 per node and bit.
pub fn check_randomized_structure(bp: &BranchingProgram, tol: f64) -> Result<ValidationReport> {
    if bp.mode() != Mode::Randomized {
        return Err(wrong_mode("rand", bp));
    }
    let mut rep = ValidationReport::new();
    for v in bp.internal_nodes() {
        for b in [false, true] {
            let total: f64 = bp.successors(v, b).iter().map(|e| e.amp.re).sum();
            let r = (total - 1.0).abs();
            rep.max_residual = rep.max_residual.max(r);
            if r > tol {
                rep.push(
                    Rule::Randomized,
                    vec![v.0],
                    Some(r),
                    format!("probabilities of node {v} under bit {} sum to {total}", b as u8),
                );
            }
        }
    }
    Ok(rep)
}

/// Reversibility: at most one incoming edge per bit, and when both bits
/// enter a node their sources test the same variable.
pub fn check_reversible_bp(bp: &BranchingProgram) -> Result<ValidationReport> {
    if bp.mode() != Mode::Deterministic {
        return Err(wrong_mode("det", bp));
    }
    let mut rep = ValidationReport::new();
    let mut into: Vec<[Vec<usize>; 2]> = vec![[Vec::new(), Vec::new()]; bp.size()];
    for e in bp.edges() {
        into[e.to.0][e.bit as usize].push(e.from.0);
    }
    for (w, [zero, one]) in into.iter().enumerate() {
        for (b, list) in [zero, one].into_iter().enumerate() {
            if list.len() > 1 {
                let mut nodes = vec![w];
                nodes.extend(list);
                rep.push(
                    Rule::Reversible,
                    nodes,
                    None,
                    format!("node {w} has {} incoming {b}-edges", list.len()),
                );
            }
        }
        if let (Some(&u), Some(&v)) = (zero.first(), one.first()) {
            if bp.var(NodeId(u)) != bp.var(NodeId(v)) {
                rep.push(
                    Rule::Reversible,
                    vec![w, u, v],
                    None,
                    format!("node {w} is entered from nodes {u} and {v} testing different variables"),
                );
            }
        }
    }
    Ok(rep)
}

/// Outcome of the level check.
#[derive(Clone, Debug, PartialEq)]
pub enum LevelCheck {
    Leveled(Vec<Vec<NodeId>>),
    NotLeveled(ValidationReport),
}

impl LevelCheck {
    pub fn levels(&self) -> Option<&[Vec<NodeId>]> {
        match self {
            LevelCheck::Leveled(l) => Some(l),
            LevelCheck::NotLeveled(_) => None,
        }
    }
}

/// BFS depths from the start; `None` for unreachable nodes.
pub fn bfs_depths(bp: &BranchingProgram) -> Vec<Option<usize>> {
    let mut depth = vec![None; bp.size()];
    depth[bp.start().0] = Some(0);
    let mut q = VecDeque::from([bp.start()]);
    while let Some(v) = q.pop_front() {
        let d = depth[v.0].unwrap();
        for e in bp.out_edges(v) {
            if depth[e.to.0].is_none() {
                depth[e.to.0] = Some(d + 1);
                q.push_back(e.to);
            }
        }
    }
    depth
}

/// Partition into levels by BFS depth and check every edge advances one level.
pub fn check_leveled(bp: &BranchingProgram) -> Result<LevelCheck> {
    if !bp.is_acyclic() {
        return Err(Error::Cyclic);
    }
    let depth = bfs_depths(bp);
    let mut rep = ValidationReport::new();
    for (v, d) in depth.iter().enumerate() {
        if d.is_none() {
            rep.push(Rule::Leveled, vec![v], None, format!("node {v} is unreachable"));
        }
    }
    for e in bp.edges() {
        if let (Some(a), Some(b)) = (depth[e.from.0], depth[e.to.0]) {
            if b != a + 1 {
                rep.push(
                    Rule::Leveled,
                    vec![e.from.0, e.to.0],
                    None,
                    format!("edge {} -> {} goes from level {} to level {}", e.from, e.to, a + 1, b + 1),
                );
            }
        }
    }
    if !rep.ok {
        return Ok(LevelCheck::NotLeveled(rep));
    }
    let count = depth.iter().flatten().max().map_or(0, |m| m + 1);
    let mut levels = vec![Vec::new(); count];
    for (v, d) in depth.iter().enumerate() {
        levels[d.unwrap()].push(NodeId(v));
    }
    Ok(LevelCheck::Leveled(levels))
}

/// Witness that no variable order fits every path.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrderViolation {
    /// Cycle of variables forced by the program (first repeated at the end).
    pub variables: Vec<usize>,
    /// One program edge `(u, w)` per consecutive variable pair of the cycle.
    pub witness_edges: Vec<(usize, usize)>,
}

impl fmt::Display for OrderViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "no consistent variable order: variables {:?} must precede each other (edges {:?})",
            self.variables, self.witness_edges
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrderCheck {
    Ordered(Vec<usize>),
    NotOrdered(OrderViolation),
}

impl OrderCheck {
    pub fn order(&self) -> Option<&[usize]> {
        match self {
            OrderCheck::Ordered(o) => Some(o),
            OrderCheck::NotOrdered(_) => None,
        }
    }
}

/// Infer a variable order consistent with every path from the start.
///
/// An order exists iff the precedence relation "`var(u)` before `var(w)`
/// for every edge `u -> w` between reachable internal nodes" is acyclic.
/// The returned order lists tested variables first (smallest index among
/// the available ones first), then the untested ones.
pub fn infer_variable_order(bp: &BranchingProgram) -> Result<OrderCheck> {
    if !bp.is_acyclic() {
        return Err(Error::Cyclic);
    }
    let n = bp.n_vars();
    let reach = bp.reachable();
    let mut succ: Vec<BTreeMap<usize, (usize, usize)>> = vec![BTreeMap::new(); n];
    let mut tested = vec![false; n];
    for v in bp.internal_nodes().filter(|v| reach[v.0]) {
        let a = bp.var(v).unwrap();
        tested[a] = true;
        for e in bp.out_edges(v) {
            if let Some(b) = bp.var(e.to) {
                if a == b {
                    return Ok(OrderCheck::NotOrdered(OrderViolation {
                        variables: vec![a, a],
                        witness_edges: vec![(v.0, e.to.0)],
                    }));
                }
                succ[a].entry(b).or_insert((v.0, e.to.0));
            }
        }
    }
    let mut indeg = vec![0usize; n];
    for s in &succ {
        for &b in s.keys() {
            indeg[b] += 1;
        }
    }
    let mut ready: BTreeSet<usize> = (0..n).filter(|&i| tested[i] && indeg[i] == 0).collect();
    let mut order = Vec::new();
    while let Some(&a) = ready.iter().next() {
        ready.remove(&a);
        order.push(a);
        for &b in succ[a].keys() {
            indeg[b] -= 1;
            if indeg[b] == 0 {
                ready.insert(b);
            }
        }
    }
    let count_tested = tested.iter().filter(|&&t| t).count();
    if order.len() < count_tested {
        // Walk backwards along remaining edges to find a cycle.
        let left: Vec<bool> = (0..n).map(|i| tested[i] && indeg[i] > 0).collect();
        let mut cur = (0..n).find(|&i| left[i]).unwrap();
        let mut seen = vec![usize::MAX; n];
        let mut path = Vec::new();
        while seen[cur] == usize::MAX {
            seen[cur] = path.len();
            path.push(cur);
            cur = *succ[cur].keys().find(|&&b| left[b]).unwrap();
        }
        let mut cycle: Vec<usize> = path[seen[cur]..].to_vec();
        cycle.push(cur);
        let witness_edges = cycle.windows(2).map(|w| succ[w[0]][&w[1]]).collect();
        return Ok(OrderCheck::NotOrdered(OrderViolation {
            variables: cycle,
            witness_edges,
        }));
    }
    order.extend((0..n).filter(|&i| !tested[i]));
    Ok(OrderCheck::Ordered(order))
}

/// Every check appropriate to the program's mode.
pub fn validate_profile(bp: &BranchingProgram, tol: f64) -> ValidationReport {
    let mut rep = ValidationReport::new();
    match bp.mode() {
        Mode::Deterministic => rep.merge(check_deterministic_structure(bp).expect("mode checked")),
        Mode::Randomized => rep.merge(check_randomized_structure(bp, tol).expect("mode checked")),
        Mode::Quantum => {
            rep.merge(check_well_formed(bp, tol).expect("mode checked"));
            rep.merge(check_unidirectional(bp));
        }
        Mode::QuantumGm(_) => {
            rep.merge(check_gm_well_formed(bp, tol).expect("mode checked"));
            rep.merge(check_unidirectional(bp));
            for v in bp.sinks() {
                if bp.label(v) == Some(Outcome::Unknown) {
                    rep.push(Rule::GmWellFormed, vec![v.0], None, "gm programs have only 0/1 sinks");
                }
            }
        }
    }
    rep
}
