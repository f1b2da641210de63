//! The QBPF v1 JSON program format.

use num_complex::Complex64 as C64;
use serde::Deserialize;
use std::fmt::Write;

use super::{BranchingProgram, Edge, Mode, Node, NodeId, NodeKind, Outcome};
use crate::error::{Error, Result};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProgram {
    n_vars: usize,
    mode: serde_json::Value,
    start: usize,
    nodes: Vec<RawNode>,
    edges: Vec<RawEdge>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    id: usize,
    var: Option<usize>,
    class: Option<usize>,
    sink: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEdge {
    from: usize,
    to: usize,
    bit: u8,
    amp: [f64; 2],
}

fn field(field: impl Into<String>, msg: impl Into<String>) -> Error {
    Error::Field {
        field: field.into(),
        msg: msg.into(),
    }
}

fn parse_mode(v: &serde_json::Value) -> Result<Mode> {
    match v {
        serde_json::Value::String(s) => match s.as_str() {
            "det" => Ok(Mode::Deterministic),
            "rand" => Ok(Mode::Randomized),
            "quantum" => Ok(Mode::Quantum),
            other => Err(field("mode", format!("unknown mode {other:?}"))),
        },
        serde_json::Value::Object(m) if m.len() == 1 => match m.get("gm").and_then(|k| k.as_u64())
        {
            Some(k) => Ok(Mode::QuantumGm(k as usize)),
            None => Err(field("mode", "expected {\"gm\": k}")),
        },
        _ => Err(field("mode", "expected \"det\", \"rand\", \"quantum\" or {\"gm\": k}")),
    }
}

/// Parse a QBPF v1 document.
pub fn parse_program(text: &str) -> Result<BranchingProgram> {
    let raw: RawProgram = serde_json::from_str(text).map_err(|e| Error::Syntax {
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    })?;
    let mode = parse_mode(&raw.mode)?;
    let n = raw.nodes.len();
    let mut slots: Vec<Option<Node>> = vec![None; n];
    for (i, rn) in raw.nodes.iter().enumerate() {
        let at = format!("nodes[{i}]");
        if rn.id >= n {
            return Err(field(format!("{at}.id"), format!("id {} is not dense in [0,{n})", rn.id)));
        }
        if slots[rn.id].is_some() {
            return Err(field(format!("{at}.id"), format!("id {} defined twice", rn.id)));
        }
        let kind = match (&rn.var, &rn.sink) {
            (Some(v), None) => NodeKind::Internal { var: *v },
            (None, Some(s)) => NodeKind::Sink(
                Outcome::from_symbol(s)
                    .ok_or_else(|| field(format!("{at}.sink"), format!("invalid label {s:?}")))?,
            ),
            _ => return Err(field(at, "exactly one of `var` and `sink` must be present")),
        };
        slots[rn.id] = Some(Node {
            kind,
            class: rn.class,
        });
    }
    let nodes: Vec<Node> = slots.into_iter().map(|s| s.expect("ids are dense")).collect();
    let mut edges = Vec::with_capacity(raw.edges.len());
    for (i, re) in raw.edges.iter().enumerate() {
        if re.bit > 1 {
            return Err(field(format!("edges[{i}].bit"), "bit must be 0 or 1"));
        }
        edges.push(Edge {
            from: NodeId(re.from),
            to: NodeId(re.to),
            bit: re.bit == 1,
            amp: C64::new(re.amp[0], re.amp[1]),
        });
    }
    BranchingProgram::from_parts(raw.n_vars, nodes, edges, NodeId(raw.start), mode)
}

fn fmt_f64(x: f64) -> String {
    // 17 significant digits round-trip every finite double exactly.
    format!("{x:.16e}")
}

/// Canonical QBPF v1 text: nodes by id, edges by `(from, bit, to)`.
pub fn serialize_program(bp: &BranchingProgram) -> String {
    let mut s = String::new();
    let mode = match bp.mode() {
        Mode::Deterministic => "\"det\"".to_string(),
        Mode::Randomized => "\"rand\"".to_string(),
        Mode::Quantum => "\"quantum\"".to_string(),
        Mode::QuantumGm(k) => format!("{{\"gm\": {k}}}"),
    };
    let _ = writeln!(s, "{{");
    let _ = writeln!(s, "  \"n_vars\": {},", bp.n_vars());
    let _ = writeln!(s, "  \"mode\": {mode},");
    let _ = writeln!(s, "  \"start\": {},", bp.start());
    let _ = writeln!(s, "  \"nodes\": [");
    for (i, node) in bp.nodes().iter().enumerate() {
        let body = match (node.kind, node.class) {
            (NodeKind::Internal { var }, Some(c)) => format!("\"var\": {var}, \"class\": {c}"),
            (NodeKind::Internal { var }, None) => format!("\"var\": {var}"),
            (NodeKind::Sink(l), _) => format!("\"sink\": \"{l}\""),
        };
        let sep = if i + 1 < bp.size() { "," } else { "" };
        let _ = writeln!(s, "    {{\"id\": {i}, {body}}}{sep}");
    }
    let _ = writeln!(s, "  ],");
    let _ = writeln!(s, "  \"edges\": [");
    let m = bp.edges().len();
    for (i, e) in bp.edges().iter().enumerate() {
        let sep = if i + 1 < m { "," } else { "" };
        let _ = writeln!(
            s,
            "    {{\"from\": {}, \"to\": {}, \"bit\": {}, \"amp\": [{}, {}]}}{sep}",
            e.from,
            e.to,
            e.bit as u8,
            fmt_f64(e.amp.re),
            fmt_f64(e.amp.im)
        );
    }
    let _ = writeln!(s, "  ]");
    let _ = writeln!(s, "}}");
    s
}
