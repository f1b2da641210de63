use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, VecDeque};

use super::align::align_levels;
use crate::error::{Error, Result};
use crate::model::{BranchingProgram, NodeId, Outcome, ProgramBuilder};

/// Rule turning the outcomes of the copies into one output.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Combiner {
    /// 0 if any copy rejects, else `?` if any copy is undecided, else 1.
    AllAccept,
    /// Strict majority of the copies; otherwise `?`.
    Majority,
}

impl Combiner {
    pub fn combine(self, labels: &[Outcome]) -> Outcome {
        let zeros = labels.iter().filter(|&&l| l == Outcome::Zero).count();
        let ones = labels.iter().filter(|&&l| l == Outcome::One).count();
        match self {
            Combiner::AllAccept if zeros > 0 => Outcome::Zero,
            Combiner::AllAccept if ones == labels.len() => Outcome::One,
            Combiner::AllAccept => Outcome::Unknown,
            Combiner::Majority if 2 * ones > labels.len() => Outcome::One,
            Combiner::Majority if 2 * zeros > labels.len() => Outcome::Zero,
            Combiner::Majority => Outcome::Unknown,
        }
    }
}

impl std::str::FromStr for Combiner {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all-accept" | "all" => Ok(Combiner::AllAccept),
            "majority" | "maj" => Ok(Combiner::Majority),
            _ => Err(Error::InvalidArgument(format!("unknown combiner '{s}'"))),
        }
    }
}

/// Run `copies` copies of an ordered program in lockstep.
///
/// The program is first aligned so that all copies test the same variable
/// on every level; the product node `(u_1, .., u_k)` then moves with the
/// product of the copies' amplitudes. Every tuple of sinks becomes its own
/// sink labeled by `combiner`. Only reachable tuples are built.
pub fn amplify(bp: &BranchingProgram, copies: usize, combiner: Combiner) -> Result<BranchingProgram> {
    if copies == 0 {
        return Err(Error::InvalidArgument("amplify needs at least one copy".into()));
    }
    let al = align_levels(bp)?;
    let g = &al.program;
    let mut b = ProgramBuilder::new(g.n_vars(), g.mode());
    let mut ids: HashMap<Vec<usize>, NodeId> = HashMap::new();
    let mut queue: VecDeque<Vec<usize>> = VecDeque::new();

    let mut get = |t: Vec<usize>, b: &mut ProgramBuilder, queue: &mut VecDeque<Vec<usize>>| -> NodeId {
        if let Some(&id) = ids.get(&t) {
            return id;
        }
        let first = NodeId(t[0]);
        let id = match g.var(first) {
            Some(x) => b.internal(x),
            None => {
                let labels: Vec<Outcome> = t.iter().map(|&v| g.label(NodeId(v)).unwrap()).collect();
                b.sink(combiner.combine(&labels))
            }
        };
        ids.insert(t.clone(), id);
        queue.push_back(t);
        id
    };
    let start = get(vec![g.start().0; copies], &mut b, &mut queue);
    b.set_start(start);
    while let Some(t) = queue.pop_front() {
        let from = get(t.clone(), &mut b, &mut queue);
        if g.is_sink(NodeId(t[0])) {
            continue;
        }
        for bit in [false, true] {
            let lists: Vec<_> = t.iter().map(|&v| g.successors(NodeId(v), bit)).collect();
            let mut idx = vec![0usize; copies];
            if lists.iter().any(|l| l.is_empty()) {
                continue;
            }
            loop {
                let mut amp = C64::new(1.0, 0.0);
                let mut target = Vec::with_capacity(copies);
                for (l, &i) in lists.iter().zip(&idx) {
                    amp *= l[i].amp;
                    target.push(l[i].to.0);
                }
                let to = get(target, &mut b, &mut queue);
                b.edge(from, to, bit, amp);
                // Odometer over the successor lists.
                let mut c = 0;
                while c < copies {
                    idx[c] += 1;
                    if idx[c] < lists[c].len() {
                        break;
                    }
                    idx[c] = 0;
                    c += 1;
                }
                if c == copies {
                    break;
                }
            }
        }
    }
    b.build()
}
