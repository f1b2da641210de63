//! Small machines used by tests, examples and the command line.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use super::{QtmSpec, Transition};

fn alphabet(extra: &[&str]) -> Vec<String> {
    let mut a: Vec<String> = ["_", "0", "1", "?"].iter().map(|s| s.to_string()).collect();
    a.extend(extra.iter().map(|s| s.to_string()));
    a
}

fn t(state: &str, read: [&str; 3], to: &str, write: &str, moves: [i8; 3], amp: f64) -> Transition {
    Transition {
        state: state.into(),
        read: read.map(String::from),
        to: to.into(),
        write: write.into(),
        moves,
        amp: [amp, 0.0],
    }
}

fn directions(pairs: &[(&str, [i8; 3])]) -> BTreeMap<String, [i8; 3]> {
    pairs.iter().map(|(s, d)| (s.to_string(), *d)).collect()
}

/// Starts in its final state with `1` in the output cell.
pub fn immediate_halt() -> QtmSpec {
    QtmSpec {
        states: vec!["q".into()],
        start: "q".into(),
        final_state: "q".into(),
        alphabet: alphabet(&[]),
        blank: "_".into(),
        input_len: 1,
        advice: None,
        work_cells: 1,
        initial_work: Some("1".into()),
        directions: BTreeMap::new(),
        transitions: Vec::new(),
    }
}

/// Reversible left-to-right scan computing OR of `n` bits.
///
/// The state counts the ones read so far (counting is injective for a
/// fixed input, saturating would not be); the advice string `0…01` marks
/// the last input cell. At the end the output goes to cell 0 and the count
/// to cell 1.
pub fn or_machine(n: usize) -> QtmSpec {
    assert!((1..=9).contains(&n), "or_machine supports 1..=9 bits");
    let counts: Vec<String> = (0..=n).map(|k| k.to_string()).collect();
    let extra: Vec<&str> = counts.iter().skip(2).map(|s| s.as_str()).collect();
    let mut states: Vec<String> = (0..n).map(|k| format!("c{k}")).collect();
    states.extend((0..=n).map(|k| format!("f{k}")));
    states.push("qf".into());
    let mut tr = Vec::new();
    let mut dirs = vec![];
    for k in 0..n {
        let c = format!("c{k}");
        for b in 0..2usize {
            let bit = b.to_string();
            if k + b < n {
                tr.push(t(&c, [&bit, "0", "_"], &format!("c{}", k + b), "_", [1, 1, 0], 1.0));
            }
            let out = if k + b > 0 { "1" } else { "0" };
            tr.push(t(&c, [&bit, "1", "_"], &format!("f{}", k + b), out, [0, 0, 1], 1.0));
        }
        dirs.push((c, [1i8, 1, 0]));
    }
    for m in 0..=n {
        let f = format!("f{m}");
        tr.push(t(&f, ["0", "1", "_"], "qf", &counts[m], [0, 0, 0], 1.0));
        tr.push(t(&f, ["1", "1", "_"], "qf", &counts[m], [0, 0, 0], 1.0));
        dirs.push((f, [0, 0, 1]));
    }
    dirs.push(("qf".into(), [0, 0, 0]));
    let dirs: Vec<(&str, [i8; 3])> = dirs.iter().map(|(s, d)| (s.as_str(), *d)).collect();
    QtmSpec {
        states,
        start: "c0".into(),
        final_state: "qf".into(),
        alphabet: alphabet(&extra),
        blank: "_".into(),
        input_len: n,
        advice: Some(format!("{}1", "0".repeat(n - 1))),
        work_cells: 2,
        initial_work: None,
        directions: directions(&dirs),
        transitions: tr,
    }
}

/// Reversible parity of `n` bits; the previous parity is kept in cell 1
/// so that the final step stays injective.
pub fn parity_machine(n: usize) -> QtmSpec {
    assert!(n >= 1, "parity_machine needs at least one bit");
    let mut tr = Vec::new();
    for (p, s) in [(0usize, "e"), (1, "o")] {
        for b in 0..2usize {
            let bit = b.to_string();
            let next = if p ^ b == 0 { "e" } else { "o" };
            tr.push(t(s, [&bit, "0", "_"], next, "_", [1, 1, 0], 1.0));
            tr.push(t(s, [&bit, "1", "_"], &format!("h{p}"), &(p ^ b).to_string(), [0, 0, 1], 1.0));
        }
    }
    for p in 0..2usize {
        for b in ["0", "1"] {
            tr.push(t(&format!("h{p}"), [b, "1", "_"], "qf", &p.to_string(), [0, 0, 0], 1.0));
        }
    }
    QtmSpec {
        states: ["e", "o", "h0", "h1", "qf"].map(String::from).to_vec(),
        start: "e".into(),
        final_state: "qf".into(),
        alphabet: alphabet(&[]),
        blank: "_".into(),
        input_len: n,
        advice: Some(format!("{}1", "0".repeat(n - 1))),
        work_cells: 2,
        initial_work: None,
        directions: directions(&[
            ("e", [1, 1, 0]),
            ("o", [1, 1, 0]),
            ("h0", [0, 0, 1]),
            ("h1", [0, 0, 1]),
            ("qf", [0, 0, 0]),
        ]),
        transitions: tr,
    }
}

/// Two Hadamard-like steps on the output cell; the branches leading to
/// output `1` cancel exactly.
pub fn interference() -> QtmSpec {
    let h = FRAC_1_SQRT_2;
    let mut tr = Vec::new();
    for b in ["0", "1"] {
        tr.push(t("s", [b, "_", "_"], "a", "0", [0, 0, 0], h));
        tr.push(t("s", [b, "_", "_"], "a", "1", [0, 0, 0], h));
        tr.push(t("a", [b, "_", "0"], "qf", "0", [0, 0, 0], h));
        tr.push(t("a", [b, "_", "0"], "qf", "1", [0, 0, 0], h));
        tr.push(t("a", [b, "_", "1"], "qf", "0", [0, 0, 0], h));
        tr.push(t("a", [b, "_", "1"], "qf", "1", [0, 0, 0], -h));
    }
    QtmSpec {
        states: ["s", "a", "qf"].map(String::from).to_vec(),
        start: "s".into(),
        final_state: "qf".into(),
        alphabet: alphabet(&[]),
        blank: "_".into(),
        input_len: 1,
        advice: None,
        work_cells: 1,
        initial_work: None,
        directions: directions(&[("a", [0, 0, 0]), ("qf", [0, 0, 0])]),
        transitions: tr,
    }
}

/// Halts with output 1 with amplitude 0.6 per round, otherwise loops back.
pub fn leaky_loop() -> QtmSpec {
    let mut tr = Vec::new();
    for b in ["0", "1"] {
        tr.push(t("s", [b, "_", "_"], "qf", "1", [0, 0, 0], 0.6));
        tr.push(t("s", [b, "_", "_"], "l", "_", [0, 0, 0], 0.8));
        tr.push(t("l", [b, "_", "_"], "s", "_", [0, 0, 0], 1.0));
    }
    QtmSpec {
        states: ["s", "l", "qf"].map(String::from).to_vec(),
        start: "s".into(),
        final_state: "qf".into(),
        alphabet: alphabet(&[]),
        blank: "_".into(),
        input_len: 1,
        advice: None,
        work_cells: 1,
        initial_work: None,
        directions: directions(&[("s", [0, 0, 0]), ("l", [0, 0, 0]), ("qf", [0, 0, 0])]),
        transitions: tr,
    }
}

/// State `q1` is entered moving right from `q0` and moving left from `qc`.
pub fn bidirectional() -> QtmSpec {
    let mut tr = vec![
        t("q0", ["0", "_", "_"], "q1", "_", [1, 0, 0], 1.0),
        t("q0", ["1", "_", "_"], "qb", "_", [1, 0, 0], 1.0),
    ];
    for b in ["0", "1"] {
        tr.push(t("qb", [b, "_", "_"], "qc", "_", [1, 0, 0], 1.0));
        tr.push(t("qc", [b, "_", "_"], "q1", "_", [-1, 0, 0], 1.0));
        tr.push(t("q1", [b, "_", "_"], "qf", "1", [0, 0, 0], 1.0));
    }
    QtmSpec {
        states: ["q0", "q1", "qb", "qc", "qf"].map(String::from).to_vec(),
        start: "q0".into(),
        final_state: "qf".into(),
        alphabet: alphabet(&[]),
        blank: "_".into(),
        input_len: 3,
        advice: None,
        work_cells: 1,
        initial_work: None,
        directions: directions(&[("q1", [1, 0, 0]), ("qb", [1, 0, 0]), ("qc", [1, 0, 0]), ("qf", [0, 0, 0])]),
        transitions: tr,
    }
}
