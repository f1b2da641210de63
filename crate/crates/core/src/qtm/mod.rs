//! Bounded-tape nonuniform quantum Turing machines: simulation over the
//! finite configuration space and compilation of the configuration graph
//! into a branching program.

mod machines;

pub use machines::{bidirectional, immediate_halt, interference, leaky_loop, or_machine, parity_machine};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::model::{Assignment, BranchingProgram, Mode, NodeId, Outcome, ProgramBuilder};
use crate::semantics::EvolutionTrace;
use crate::validate::{check_unidirectional, check_well_formed};

fn default_blank() -> String {
    "_".into()
}

/// One nonzero entry of the transition function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Transition {
    pub state: String,
    /// Symbols under the input, advice and work heads.
    pub read: [String; 3],
    pub to: String,
    pub write: String,
    /// Head moves on the input, advice and work tapes, each in `{-1, 0, 1}`.
    #[serde(rename = "move")]
    pub moves: [i8; 3],
    /// `[re, im]`.
    pub amp: [f64; 2],
}

/// Machine description as stored in JSON.
///
/// Tapes are finite: the input head stays on `0..input_len`, the advice
/// head on the advice string (a single blank cell when there is none) and
/// the work head on `0..work_cells`. The output cell is work cell 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QtmSpec {
    pub states: Vec<String>,
    pub start: String,
    #[serde(rename = "final")]
    pub final_state: String,
    pub alphabet: Vec<String>,
    #[serde(default = "default_blank")]
    pub blank: String,
    pub input_len: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub advice: Option<String>,
    pub work_cells: usize,
    /// Initial work tape prefix (one symbol per character); blanks follow.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_work: Option<String>,
    /// Declared entry directions per state (input, advice, work).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub directions: BTreeMap<String, [i8; 3]>,
    pub transitions: Vec<Transition>,
}

/// `(state, work tape, input head, advice head, work head)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Configuration {
    pub state: usize,
    pub work: Vec<usize>,
    pub input_pos: usize,
    pub advice_pos: usize,
    pub work_pos: usize,
}

type Key = (usize, usize, usize, usize);
type Target = (usize, usize, [i8; 3], C64);

/// Validated machine with states and symbols replaced by indices.
#[derive(Clone, Debug)]
pub struct Qtm {
    spec: QtmSpec,
    final_state: usize,
    start_state: usize,
    symbols: Vec<String>,
    bits: [usize; 2],
    advice: Vec<usize>,
    initial_work: Vec<usize>,
    table: HashMap<Key, Vec<Target>>,
}

fn qtm_err(msg: impl Into<String>) -> Error {
    Error::Qtm(msg.into())
}

impl QtmSpec {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Syntax {
            line: e.line(),
            column: e.column(),
            msg: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn build(&self) -> Result<Qtm> {
        Qtm::new(self.clone())
    }

    /// Transitions that enter a state from a direction other than the
    /// declared (or, if undeclared, the first observed) one.
    pub fn direction_conflicts(&self) -> Vec<String> {
        let mut seen: BTreeMap<&str, [i8; 3]> = BTreeMap::new();
        let mut out = Vec::new();
        for t in &self.transitions {
            if t.amp == [0.0, 0.0] {
                continue;
            }
            let want = self
                .directions
                .get(&t.to)
                .cloned()
                .unwrap_or_else(|| *seen.entry(&t.to).or_insert(t.moves));
            if want != t.moves {
                out.push(format!(
                    "state {} entered with moves {:?} from {}, expected {:?}",
                    t.to, t.moves, t.state, want
                ));
            }
        }
        out
    }
}

impl Qtm {
    fn new(spec: QtmSpec) -> Result<Self> {
        let state_ix: HashMap<&str, usize> = spec.states.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        if state_ix.len() != spec.states.len() {
            return Err(qtm_err("duplicate state names"));
        }
        let sym_ix: HashMap<&str, usize> = spec.alphabet.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        if sym_ix.len() != spec.alphabet.len() {
            return Err(qtm_err("duplicate alphabet symbols"));
        }
        let state = |s: &str| state_ix.get(s).cloned().ok_or_else(|| qtm_err(format!("unknown state '{s}'")));
        let sym = |s: &str| sym_ix.get(s).cloned().ok_or_else(|| qtm_err(format!("unknown symbol '{s}'")));
        for required in ["0", "1", "?", spec.blank.as_str()] {
            sym(required)?;
        }
        if spec.input_len == 0 {
            return Err(qtm_err("input length must be positive"));
        }
        if spec.work_cells == 0 {
            return Err(qtm_err("need at least one work cell (the output cell)"));
        }
        for s in spec.directions.keys() {
            state(s)?;
        }
        let chars = |s: &str| -> Result<Vec<usize>> { s.chars().map(|c| sym(&c.to_string())).collect() };
        let blank = sym(&spec.blank)?;
        let advice = match &spec.advice {
            Some(a) if !a.is_empty() => chars(a)?,
            _ => vec![blank],
        };
        let mut initial_work = chars(spec.initial_work.as_deref().unwrap_or(""))?;
        if initial_work.len() > spec.work_cells {
            return Err(qtm_err("initial work content longer than the work tape"));
        }
        initial_work.resize(spec.work_cells, blank);
        let bits = [sym("0")?, sym("1")?];
        let mut table: HashMap<Key, Vec<Target>> = HashMap::new();
        for t in &spec.transitions {
            if t.moves.iter().any(|m| !(-1..=1).contains(m)) {
                return Err(qtm_err(format!("moves {:?} outside {{-1, 0, 1}}", t.moves)));
            }
            let amp = C64::new(t.amp[0], t.amp[1]);
            if !amp.re.is_finite() || !amp.im.is_finite() {
                return Err(qtm_err("non-finite amplitude"));
            }
            if amp == C64::new(0.0, 0.0) {
                continue;
            }
            let read_in = sym(&t.read[0])?;
            if !bits.contains(&read_in) {
                return Err(qtm_err(format!("input head can only read 0 or 1, not '{}'", t.read[0])));
            }
            let key = (state(&t.state)?, read_in, sym(&t.read[1])?, sym(&t.read[2])?);
            let target = (state(&t.to)?, sym(&t.write)?, t.moves, amp);
            let list = table.entry(key).or_default();
            if list.iter().any(|x| (x.0, x.1, x.2) == (target.0, target.1, target.2)) {
                return Err(qtm_err(format!(
                    "duplicate transition from {} to {} writing {} with moves {:?}",
                    t.state, t.to, t.write, t.moves
                )));
            }
            list.push(target);
        }
        Ok(Qtm {
            final_state: state(&spec.final_state)?,
            start_state: state(&spec.start)?,
            symbols: spec.alphabet.clone(),
            bits,
            advice,
            initial_work,
            table,
            spec,
        })
    }

    pub fn spec(&self) -> &QtmSpec {
        &self.spec
    }

    pub fn input_len(&self) -> usize {
        self.spec.input_len
    }

    pub fn initial(&self) -> Configuration {
        Configuration {
            state: self.start_state,
            work: self.initial_work.clone(),
            input_pos: 0,
            advice_pos: 0,
            work_pos: 0,
        }
    }

    pub fn is_final(&self, c: &Configuration) -> bool {
        c.state == self.final_state
    }

    /// Symbol in the output cell, read as an outcome.
    pub fn output(&self, c: &Configuration) -> Outcome {
        Outcome::from_symbol(&self.symbols[c.work[0]]).unwrap_or(Outcome::Unknown)
    }

    pub fn describe(&self, c: &Configuration) -> String {
        let work: Vec<&str> = c.work.iter().map(|&s| self.symbols[s].as_str()).collect();
        format!(
            "({}, {}, {}, {}, {})",
            self.spec.states[c.state],
            work.join(""),
            c.input_pos,
            c.advice_pos,
            c.work_pos
        )
    }

    /// `δ` applied to `c` when the input bit under the head is `bit`.
    pub fn successors(&self, c: &Configuration, bit: bool) -> Result<Vec<(Configuration, C64)>> {
        let key = (c.state, self.bits[bit as usize], self.advice[c.advice_pos], c.work[c.work_pos]);
        let Some(list) = self.table.get(&key) else {
            return Ok(Vec::new());
        };
        let limits = [self.spec.input_len, self.advice.len(), self.spec.work_cells];
        let mut out = Vec::with_capacity(list.len());
        for &(q, w, moves, amp) in list {
            let pos = [c.input_pos, c.advice_pos, c.work_pos];
            let mut next = [0usize; 3];
            for tape in 0..3 {
                let p = pos[tape] as i64 + moves[tape] as i64;
                if p < 0 || p >= limits[tape] as i64 {
                    return Err(qtm_err(format!(
                        "transition from {} moves the {} head to {p}",
                        self.describe(c),
                        ["input", "advice", "work"][tape]
                    )));
                }
                next[tape] = p as usize;
            }
            let mut work = c.work.clone();
            work[c.work_pos] = w;
            out.push((
                Configuration {
                    state: q,
                    work,
                    input_pos: next[0],
                    advice_pos: next[1],
                    work_pos: next[2],
                },
                amp,
            ));
        }
        Ok(out)
    }

    /// Configurations reachable from the start; `bit(c)` lists the input
    /// bits to follow at `c`.
    fn explore(&self, bits_at: impl Fn(&Configuration) -> Vec<bool>) -> Result<Explored> {
        let mut index: HashMap<Configuration, usize> = HashMap::new();
        let mut configs = Vec::new();
        let mut edges: Vec<(usize, usize, bool, C64)> = Vec::new();
        let mut queue = VecDeque::new();
        let start = self.initial();
        index.insert(start.clone(), 0);
        configs.push(start.clone());
        queue.push_back(start);
        while let Some(c) = queue.pop_front() {
            let from = index[&c];
            if self.is_final(&c) {
                continue;
            }
            for bit in bits_at(&c) {
                for (d, amp) in self.successors(&c, bit)? {
                    let to = match index.get(&d) {
                        Some(&i) => i,
                        None => {
                            let i = configs.len();
                            index.insert(d.clone(), i);
                            configs.push(d.clone());
                            queue.push_back(d);
                            i
                        }
                    };
                    edges.push((from, to, bit, amp));
                }
            }
        }
        Ok(Explored { configs, edges })
    }

    /// `|Q| · |Σ|^S · n · S · |advice|`.
    pub fn configuration_bound(&self) -> f64 {
        self.spec.states.len() as f64
            * (self.symbols.len() as f64).powi(self.spec.work_cells as i32)
            * self.spec.input_len as f64
            * self.spec.work_cells as f64
            * self.advice.len() as f64
    }
}

struct Explored {
    configs: Vec<Configuration>,
    edges: Vec<(usize, usize, bool, C64)>,
}

/// Check that the columns of `U(a)` for the reachable non-final
/// configurations are orthonormal.
fn check_isometry(m: &Qtm, ex: &Explored, tol: f64) -> Result<()> {
    let n = ex.configs.len();
    let mut by_target: Vec<Vec<(usize, C64)>> = vec![Vec::new(); n];
    for &(from, to, _, amp) in &ex.edges {
        by_target[to].push((from, amp));
    }
    let mut gram: HashMap<(usize, usize), C64> = HashMap::new();
    for list in &by_target {
        for &(u, a) in list {
            for &(v, b) in list {
                *gram.entry((u, v)).or_default() += a.conj() * b;
            }
        }
    }
    for (u, c) in ex.configs.iter().enumerate() {
        if m.is_final(c) {
            continue;
        }
        let norm = gram.get(&(u, u)).cloned().unwrap_or_default();
        if (norm - C64::new(1.0, 0.0)).norm() > tol {
            return Err(qtm_err(format!(
                "time evolution is not unitary: configuration {} maps to norm {:.6}",
                m.describe(c),
                norm.re
            )));
        }
    }
    for (&(u, v), z) in &gram {
        if u != v && z.norm() > tol {
            return Err(qtm_err(format!(
                "time evolution is not unitary: images of {} and {} overlap ({:.3e})",
                m.describe(&ex.configs[u]),
                m.describe(&ex.configs[v]),
                z.norm()
            )));
        }
    }
    Ok(())
}

/// Amplitudes over reachable configurations before each measurement.
pub fn simulate_amplitudes(m: &Qtm, input: &Assignment, t_max: usize) -> Result<(Vec<Configuration>, Vec<Vec<C64>>)> {
    if input.len() != m.input_len() {
        return Err(Error::InvalidArgument(format!(
            "input has {} bits, machine expects {}",
            input.len(),
            m.input_len()
        )));
    }
    let ex = m.explore(|c| vec![input.get(c.input_pos)])?;
    check_isometry(m, &ex, 1e-9)?;
    let n = ex.configs.len();
    let mut psi = vec![C64::new(0.0, 0.0); n];
    psi[0] = C64::new(1.0, 0.0);
    let mut out = Vec::with_capacity(t_max + 1);
    for t in 0..=t_max {
        out.push(psi.clone());
        if t == t_max {
            break;
        }
        let mut next = vec![C64::new(0.0, 0.0); n];
        for &(from, to, _, amp) in &ex.edges {
            if !m.is_final(&ex.configs[from]) {
                next[to] += amp * psi[from];
            }
        }
        psi = next;
    }
    Ok((ex.configs, out))
}

/// Measure `q_f` (then the output cell) before each step, `t = 0..=t_max`.
pub fn simulate_qtm(m: &Qtm, input: &Assignment, t_max: usize) -> Result<EvolutionTrace> {
    let (configs, states) = simulate_amplitudes(m, input, t_max)?;
    let mut halting = Vec::with_capacity(states.len());
    let mut residual = Vec::with_capacity(states.len());
    for psi in &states {
        let mut h = [0.0; 3];
        let mut cont = 0.0;
        for (c, a) in configs.iter().zip(psi) {
            if m.is_final(c) {
                h[m.output(c).index()] += a.norm_sqr();
            } else {
                cont += a.norm_sqr();
            }
        }
        halting.push(h);
        residual.push(cont);
    }
    Ok(EvolutionTrace { halting, residual })
}

/// Configuration-graph program together with its node labels.
#[derive(Clone, Debug)]
pub struct CompiledQtm {
    pub program: BranchingProgram,
    /// `configurations[v]` is the configuration of node `v`.
    pub configurations: Vec<Configuration>,
    pub bound: f64,
}

/// Build the configuration graph without checking the result.
pub fn compile_unchecked(m: &Qtm) -> Result<CompiledQtm> {
    let ex = m.explore(|_| vec![false, true])?;
    let mut b = ProgramBuilder::new(m.input_len(), Mode::Quantum);
    for c in &ex.configs {
        if m.is_final(c) {
            b.sink(m.output(c));
        } else {
            b.internal(c.input_pos);
        }
    }
    for &(from, to, bit, amp) in &ex.edges {
        b.accumulate(NodeId(from), NodeId(to), bit, amp);
    }
    b.set_start(NodeId(0));
    Ok(CompiledQtm {
        program: b.build()?,
        configurations: ex.configs,
        bound: m.configuration_bound(),
    })
}

/// Configuration graph as a quantum program; fails with the validation
/// report if it is not well-formed or not unidirectional.
pub fn compile_to_qbp(m: &Qtm) -> Result<CompiledQtm> {
    let c = compile_unchecked(m)?;
    let mut rep = check_well_formed(&c.program, 1e-9)?;
    rep.merge(check_unidirectional(&c.program));
    if !rep.ok {
        return Err(Error::Validation(rep));
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::evolve;

    fn agree(m: &Qtm, t: usize) {
        let c = compile_to_qbp(m).unwrap();
        assert!(c.configurations.len() as f64 <= c.bound);
        for a in Assignment::all(m.input_len()) {
            let p = simulate_qtm(m, &a, t).unwrap();
            let q = evolve(&c.program, &a, t);
            for s in 0..=t {
                for r in 0..3 {
                    assert!((p.halting[s][r] - q.halting[s][r]).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn immediate_halt() {
        let m = super::immediate_halt().build().unwrap();
        let p = simulate_qtm(&m, &Assignment::zeros(1), 0).unwrap();
        assert_eq!(p.halting[0], [0.0, 1.0, 0.0]);
        assert_eq!(compile_to_qbp(&m).unwrap().program.size(), 1);
    }

    #[test]
    fn or_of_three() {
        let m = or_machine(3).build().unwrap();
        for a in Assignment::all(3) {
            let want = a.bits().iter().any(|&b| b);
            let p = simulate_qtm(&m, &a, 10).unwrap().probabilities();
            assert!((p[want as usize] - 1.0).abs() < 1e-12, "{a}");
        }
        agree(&m, 10);
    }

    #[test]
    fn interference_cancels() {
        let m = interference().build().unwrap();
        let (configs, states) = simulate_amplitudes(&m, &Assignment::zeros(1), 2).unwrap();
        let last = &states[2];
        let one = configs.iter().position(|c| m.is_final(c) && m.output(c) == Outcome::One).unwrap();
        assert!(last[one].norm() < 1e-12);
        assert!((simulate_qtm(&m, &Assignment::zeros(1), 2).unwrap().probabilities()[0] - 1.0).abs() < 1e-12);
        agree(&m, 4);
    }

    #[test]
    fn parity_and_leaky_loop_cross_simulate() {
        for n in 1..=4 {
            agree(&parity_machine(n).build().unwrap(), n + 3);
        }
        agree(&leaky_loop().build().unwrap(), 12);
    }

    #[test]
    fn bidirectional_machine_is_rejected() {
        let spec = bidirectional();
        assert!(!spec.direction_conflicts().is_empty());
        let m = spec.build().unwrap();
        let c = compile_unchecked(&m).unwrap();
        assert!(!check_unidirectional(&c.program).ok);
        assert!(matches!(compile_to_qbp(&m), Err(Error::Validation(_))));
    }

    #[test]
    fn out_of_range_moves_are_errors() {
        let mut spec = parity_machine(2);
        for t in &mut spec.transitions {
            t.moves[0] = -1;
        }
        let m = spec.build().unwrap();
        assert!(matches!(simulate_qtm(&m, &Assignment::zeros(2), 3), Err(Error::Qtm(_))));
    }

    #[test]
    fn json_round_trip() {
        let spec = or_machine(3);
        let back = QtmSpec::from_json(&spec.to_json()).unwrap();
        assert_eq!(spec, back);
        assert!(QtmSpec::from_json("{\"states\": []").is_err());
    }
}
