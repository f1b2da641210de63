use serde::Serialize;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::linalg::{is_unitary, numerical_rank, CMatrix, CVector, ONE};
use crate::model::{Assignment, BranchingProgram, Mode, NodeId, Outcome};
use crate::semantics::{complete_unitary, evolve};
use crate::transforms::align_levels;
use crate::validate::{check_leveled, check_reversible_bp, LevelCheck, Rule, ValidationReport};

/// Singular values above this count towards the dimension of a span.
pub const RANK_THRESHOLD: f64 = 1e-8;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum SchemeEntry {
    Zero,
    One,
    Star,
}

impl SchemeEntry {
    pub fn from_bool(b: bool) -> Self {
        if b {
            SchemeEntry::One
        } else {
            SchemeEntry::Zero
        }
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            SchemeEntry::Zero => Some(false),
            SchemeEntry::One => Some(true),
            SchemeEntry::Star => None,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            SchemeEntry::Zero => '0',
            SchemeEntry::One => '1',
            SchemeEntry::Star => '*',
        }
    }
}

/// Measurement `M_r = E_r · frame`, where `E_r` projects onto the basis
/// vectors labeled `r`.
#[derive(Clone, Debug)]
pub struct ProjectiveMeasurement {
    pub frame: CMatrix,
    pub labels: Vec<Outcome>,
}

impl ProjectiveMeasurement {
    /// Measurement in the standard basis.
    pub fn standard(labels: Vec<Outcome>) -> Self {
        let d = labels.len();
        ProjectiveMeasurement {
            frame: CMatrix::identity(d, d),
            labels,
        }
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    /// `[Pr(0), Pr(1), Pr(?)]` on the pure state `v`.
    pub fn probabilities(&self, v: &CVector) -> [f64; 3] {
        let w = &self.frame * v;
        let mut p = [0.0; 3];
        for (z, l) in w.iter().zip(&self.labels) {
            p[l.index()] += z.norm_sqr();
        }
        p
    }

    pub fn operator(&self, r: Outcome) -> CMatrix {
        let mut m = self.frame.clone();
        for (i, l) in self.labels.iter().enumerate() {
            if *l != r {
                m.row_mut(i).fill(crate::linalg::ZERO);
            }
        }
        m
    }
}

/// Matrix over `{0, 1, *}`, one measurement per column and one pure state
/// per row.
#[derive(Clone, Debug)]
pub struct MeasurementScheme {
    pub matrix: Vec<Vec<SchemeEntry>>,
    pub measurements: Vec<ProjectiveMeasurement>,
    pub states: Vec<CVector>,
    pub epsilon: f64,
}

impl MeasurementScheme {
    pub fn rows(&self) -> usize {
        self.states.len()
    }

    pub fn cols(&self) -> usize {
        self.measurements.len()
    }

    pub fn matrix_string(&self) -> String {
        self.matrix
            .iter()
            .map(|r| r.iter().map(|e| e.symbol()).collect::<String>())
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// Check the three scheme conditions: rows pairwise separated by a boolean
/// column, `*` closed to the right, and zero-error measurements that fail
/// with probability at most `ε`.
pub fn verify_scheme(s: &MeasurementScheme, tol: f64) -> ValidationReport {
    let mut rep = ValidationReport::new();
    let m = s.rows();
    let n = s.cols();
    let d = s.states.first().map_or(0, |v| v.len());
    let mut shape_ok = s.matrix.len() == m && s.matrix.iter().all(|r| r.len() == n);
    shape_ok &= s.states.iter().all(|v| v.len() == d);
    shape_ok &= s
        .measurements
        .iter()
        .all(|x| x.labels.len() == d && x.frame.nrows() == d && x.frame.ncols() == d);
    if !shape_ok {
        rep.push(Rule::Scheme, vec![], None, "inconsistent dimensions");
        return rep;
    }
    for (k, x) in s.measurements.iter().enumerate() {
        if !is_unitary(&x.frame, 1e-8) {
            rep.push(Rule::Scheme, vec![], None, format!("measurement {k} is not projective"));
        }
    }
    for i in 0..m {
        for j in i + 1..m {
            let separated = (0..n).any(|k| {
                matches!(
                    (s.matrix[i][k].as_bool(), s.matrix[j][k].as_bool()),
                    (Some(a), Some(b)) if a != b
                )
            });
            if !separated {
                rep.push(Rule::Scheme, vec![i, j], None, format!("rows {i} and {j} are not distinguished"));
            }
        }
    }
    for (i, row) in s.matrix.iter().enumerate() {
        if let Some(k) = row.iter().position(|e| *e == SchemeEntry::Star) {
            if let Some(l) = row[k..].iter().position(|e| *e != SchemeEntry::Star) {
                rep.push(
                    Rule::Scheme,
                    vec![i],
                    None,
                    format!("row {i}: '*' in column {k} followed by a value in column {}", k + l),
                );
            }
        }
    }
    for (i, row) in s.matrix.iter().enumerate() {
        for (k, e) in row.iter().enumerate() {
            let Some(a) = e.as_bool() else { continue };
            let p = s.measurements[k].probabilities(&s.states[i]);
            let right = p[a as usize];
            let wrong = p[!a as usize];
            if right < 1.0 - s.epsilon - tol {
                rep.push(
                    Rule::Scheme,
                    vec![i],
                    Some(1.0 - s.epsilon - right),
                    format!("row {i}, column {k}: Pr[{}] = {right:.6} below 1 - eps", a as u8),
                );
            }
            if wrong > tol {
                rep.push(
                    Rule::Scheme,
                    vec![i],
                    Some(wrong),
                    format!("row {i}, column {k}: Pr[{}] = {wrong:.3e} should be 0", !a as u8),
                );
            }
        }
    }
    rep
}

#[derive(Clone, Debug, Serialize)]
pub struct DimensionBound {
    pub states: usize,
    pub epsilon: f64,
    /// `m^{1−ε}`.
    pub required: f64,
    /// Numerical dimension of the span of the states.
    pub dimension: usize,
    pub holds: bool,
}

/// `dim span{v_i} ≥ m^{1−ε}` for a valid scheme.
pub fn scheme_dimension_bound(s: &MeasurementScheme) -> Result<DimensionBound> {
    let rep = verify_scheme(s, 1e-8);
    if !rep.ok {
        return Err(Error::Validation(rep));
    }
    let m = s.rows();
    let d = s.states.first().map_or(0, |v| v.len());
    let mut a = CMatrix::zeros(d, m);
    for (j, v) in s.states.iter().enumerate() {
        a.set_column(j, v);
    }
    let dimension = numerical_rank(&a, RANK_THRESHOLD);
    let required = (m as f64).powf(1.0 - s.epsilon);
    Ok(DimensionBound {
        states: m,
        epsilon: s.epsilon,
        required,
        dimension,
        holds: dimension as f64 >= required - 1e-9,
    })
}

/// Scheme for one level together with the level-size comparison.
#[derive(Clone, Debug)]
pub struct SchemeConstruction {
    /// 1-based level: level `i` is reached after `i − 1` variables.
    pub level: usize,
    pub scheme: MeasurementScheme,
    pub rev_level_size: usize,
    pub qobdd_level_size: usize,
    /// `|L_i'| ≥ |L_i|^{1−ε}`.
    pub size_bound_holds: bool,
}

fn premise(msg: impl Into<String>) -> Error {
    Error::Premise(msg.into())
}

/// Measurement schemes for every level of a leveled reversible OBDD `g`,
/// built from the states of a zero-error quantum OBDD `gq` for the same
/// function and order.
///
/// Level `i` uses one column per suffix input `y` (run `gq` on `y`, then
/// read the sink label) and, for nodes sharing a subfunction, the scheme of
/// level `i − 1` pulled back through the step unitary `U_b` of the edge bit
/// `b` that enters them. That bit must be common to all such nodes of a
/// level; otherwise construction stops with a premise error. `ε` is the
/// largest failure probability of `gq`.
pub fn build_schemes(g: &BranchingProgram, gq: &BranchingProgram) -> Result<Vec<SchemeConstruction>> {
    let n = g.n_vars();
    if gq.n_vars() != n {
        return Err(Error::InvalidArgument("programs have different numbers of variables".into()));
    }
    let rev = check_reversible_bp(g)?;
    if !rev.ok {
        return Err(premise(format!("first program is not reversible: {rev}")));
    }
    let gq = match gq.mode() {
        Mode::Quantum => gq.clone(),
        Mode::QuantumGm(_) => {
            return Err(Error::WrongMode {
                expected: "quantum".into(),
                found: gq.mode().name(),
            })
        }
        _ => gq.with_mode(Mode::Quantum)?,
    };
    let al = align_levels(&gq)?;
    if al.order.len() != n {
        return Err(premise(format!("quantum program tests only {} of {n} variables", al.order.len())));
    }
    let order = al.order.clone();
    let q = &al.program;
    let levels = match check_leveled(g)? {
        LevelCheck::Leveled(l) => l,
        LevelCheck::NotLeveled(r) => return Err(premise(format!("first program is not leveled: {r}"))),
    };
    if levels.len() != n + 1 {
        return Err(premise(format!("first program has {} levels, expected {}", levels.len(), n + 1)));
    }
    for (t, l) in levels.iter().enumerate() {
        for &v in l {
            let ok = if t == n { g.is_sink(v) } else { g.var(v) == Some(order[t]) };
            if !ok {
                return Err(premise(format!("node {} does not fit level {t} of order {order:?}", v.0)));
            }
        }
    }

    // Subfunction of each node of g as a table over the remaining inputs.
    let walk = |mut v: NodeId, t: usize, y: usize| -> Result<bool> {
        for s in 0..n - t {
            let bit = y >> s & 1 == 1;
            v = g.successors(v, bit).first().ok_or_else(|| premise("missing edge in first program"))?.to;
        }
        g.label(v).and_then(|l| l.as_bool()).ok_or_else(|| premise("first program must end in 0/1 sinks"))
    };
    let mut sub: Vec<HashMap<usize, Vec<bool>>> = Vec::with_capacity(n + 1);
    for (t, l) in levels.iter().enumerate() {
        let mut m = HashMap::new();
        for &v in l {
            let table: Result<Vec<bool>> = (0..1usize << (n - t)).map(|y| walk(v, t, y)).collect();
            m.insert(v.0, table?);
        }
        sub.push(m);
    }

    // Zero error of gq against g, and its failure probability.
    let mut epsilon: f64 = 0.0;
    for a in Assignment::all(n) {
        let mut y = 0usize;
        for (t, &x) in order.iter().enumerate() {
            y |= (a.get(x) as usize) << t;
        }
        let want = walk(g.start(), 0, y)?;
        let p = evolve(q, &a, n).cumulative(n);
        if p[!want as usize] > 1e-9 {
            return Err(premise(format!("quantum program errs on input {a} (probability {:.3e})", p[!want as usize])));
        }
        epsilon = epsilon.max(p[2]);
    }

    let u: [CMatrix; 2] = [
        complete_unitary(q, &Assignment::new(vec![false; n]))?,
        complete_unitary(q, &Assignment::new(vec![true; n]))?,
    ];
    let labels: Vec<Outcome> = q.node_ids().map(|v| q.label(v).unwrap_or(Outcome::Unknown)).collect();
    let dim = q.size();

    // frames[t][y]: run the remaining variables on y, level t onwards.
    let mut frames: Vec<Vec<CMatrix>> = vec![Vec::new(); n + 1];
    frames[n] = vec![CMatrix::identity(dim, dim)];
    for t in (0..n).rev() {
        frames[t] = (0..1usize << (n - t))
            .map(|y| &frames[t + 1][y >> 1] * &u[y & 1])
            .collect();
    }

    let mut pred: Vec<[Option<usize>; 2]> = vec![[None, None]; g.size()];
    for e in g.edges() {
        pred[e.to.0][e.bit as usize] = Some(e.from.0);
    }

    let mut start = CVector::zeros(dim);
    start[q.start().0] = ONE;
    let mut out: Vec<SchemeConstruction> = Vec::with_capacity(n + 1);
    let mut states: HashMap<usize, CVector> = HashMap::new();
    states.insert(g.start().0, start.clone());
    let mut row_of: HashMap<usize, usize> = HashMap::new();
    row_of.insert(g.start().0, 0);
    out.push(SchemeConstruction {
        level: 1,
        scheme: MeasurementScheme {
            matrix: vec![Vec::new()],
            measurements: Vec::new(),
            states: vec![start],
            epsilon,
        },
        rev_level_size: 1,
        qobdd_level_size: al.levels[0].len(),
        size_bound_holds: !al.levels[0].is_empty(),
    });

    for t in 1..=n {
        let l = &levels[t];
        let mut classes: HashMap<&Vec<bool>, Vec<usize>> = HashMap::new();
        for &v in l {
            classes.entry(&sub[t][&v.0]).or_default().push(v.0);
        }
        let shared: Vec<usize> = classes.values().filter(|c| c.len() > 1).flatten().cloned().collect();
        let common = [false, true]
            .into_iter()
            .find(|&b| shared.iter().all(|&v| pred[v][b as usize].is_some()));
        let common = match (shared.is_empty(), common) {
            (true, _) => None,
            (false, Some(b)) => Some(b),
            (false, None) => {
                return Err(premise(format!(
                    "level {}: nodes sharing a subfunction have no common entering bit",
                    t + 1
                )))
            }
        };
        let prev = &out[t - 1].scheme;
        let mut matrix = Vec::with_capacity(l.len());
        let mut new_states = HashMap::new();
        let mut new_rows = HashMap::new();
        let mut st = Vec::with_capacity(l.len());
        for (r, &v) in l.iter().enumerate() {
            let b = common
                .filter(|&b| pred[v.0][b as usize].is_some())
                .or_else(|| [false, true].into_iter().find(|&b| pred[v.0][b as usize].is_some()))
                .ok_or_else(|| premise(format!("node {} has no predecessor", v.0)))?;
            let u_node = pred[v.0][b as usize].unwrap();
            let phi = &u[b as usize] * &states[&u_node];
            let mut row: Vec<SchemeEntry> = sub[t][&v.0].iter().map(|&x| SchemeEntry::from_bool(x)).collect();
            if common.is_some() {
                if shared.contains(&v.0) {
                    row.extend(prev.matrix[row_of[&u_node]].iter().cloned());
                } else {
                    row.extend(std::iter::repeat(SchemeEntry::Star).take(prev.cols()));
                }
            }
            matrix.push(row);
            new_rows.insert(v.0, r);
            new_states.insert(v.0, phi.clone());
            st.push(phi);
        }
        let mut measurements: Vec<ProjectiveMeasurement> = frames[t]
            .iter()
            .map(|f| ProjectiveMeasurement {
                frame: f.clone(),
                labels: labels.clone(),
            })
            .collect();
        if let Some(b) = common {
            let back = u[b as usize].adjoint();
            measurements.extend(prev.measurements.iter().map(|m| ProjectiveMeasurement {
                frame: &m.frame * &back,
                labels: m.labels.clone(),
            }));
        }
        states = new_states;
        row_of = new_rows;
        let rev_size = l.len();
        let q_size = al.levels[t].len();
        out.push(SchemeConstruction {
            level: t + 1,
            scheme: MeasurementScheme {
                matrix,
                measurements,
                states: st,
                epsilon,
            },
            rev_level_size: rev_size,
            qobdd_level_size: q_size,
            size_bound_holds: q_size as f64 >= (rev_size as f64).powf(1.0 - epsilon) - 1e-9,
        });
    }
    Ok(out)
}

/// Scheme for level `level` (1-based, up to `n + 1`).
pub fn build_scheme(g: &BranchingProgram, gq: &BranchingProgram, level: usize) -> Result<SchemeConstruction> {
    if level == 0 || level > g.n_vars() + 1 {
        return Err(Error::InvalidArgument(format!("level {level} outside 1..={}", g.n_vars() + 1)));
    }
    Ok(build_schemes(g, gq)?.swap_remove(level - 1))
}
