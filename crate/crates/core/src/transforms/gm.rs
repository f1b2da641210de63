use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{BranchingProgram, Edge, Mode, Node, Outcome};

fn reject_unknown_sinks(bp: &BranchingProgram) -> Result<()> {
    if bp.sinks().any(|v| bp.label(v) == Some(Outcome::Unknown)) {
        return Err(Error::Structure("gm programs cannot have ?-sinks".into()));
    }
    Ok(())
}

/// Randomized program as a gm program: amplitudes `√p`, one class per
/// internal node.
pub fn randomized_to_gm(bp: &BranchingProgram) -> Result<BranchingProgram> {
    if bp.mode() != Mode::Randomized {
        return Err(Error::WrongMode {
            expected: "rand".into(),
            found: bp.mode().name(),
        });
    }
    reject_unknown_sinks(bp)?;
    let mut next = 2;
    let nodes: Vec<Node> = bp
        .nodes()
        .iter()
        .map(|n| {
            if n.is_sink() {
                *n
            } else {
                next += 1;
                Node {
                    class: Some(next - 1),
                    ..*n
                }
            }
        })
        .collect();
    let edges: Vec<Edge> = bp
        .edges()
        .iter()
        .map(|e| Edge {
            amp: C64::new(e.amp.re.sqrt(), 0.0),
            ..*e
        })
        .collect();
    BranchingProgram::from_parts(bp.n_vars(), nodes, edges, bp.start(), Mode::QuantumGm(next.max(3)))
}

/// Quantum program as a gm program with a single continuing class (k = 3).
pub fn quantum_to_gm(bp: &BranchingProgram) -> Result<BranchingProgram> {
    if bp.mode() != Mode::Quantum {
        return Err(Error::WrongMode {
            expected: "quantum".into(),
            found: bp.mode().name(),
        });
    }
    reject_unknown_sinks(bp)?;
    let nodes = bp
        .nodes()
        .iter()
        .map(|n| Node {
            class: (!n.is_sink()).then_some(2),
            ..*n
        })
        .collect();
    BranchingProgram::from_parts(bp.n_vars(), nodes, bp.edges().to_vec(), bp.start(), Mode::QuantumGm(3))
}
