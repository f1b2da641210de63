use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gateset::{r_function_eval, UniversalCode};
use crate::model::Assignment;

/// The two pair-structured functions with linear-size OBDDs.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum LinearFamily {
    /// `DISJ_n = ∧_i ¬(x_{2i} ∧ x_{2i+1})`.
    Disj,
    /// `IP_n = ⊕_i x_{2i} x_{2i+1}`.
    Ip,
}

impl LinearFamily {
    pub fn name(self) -> &'static str {
        match self {
            LinearFamily::Disj => "DISJ",
            LinearFamily::Ip => "IP",
        }
    }
}

type EvalFn = dyn Fn(&[bool]) -> Option<bool> + Send + Sync;

/// A boolean function given by an evaluation rule, possibly partial.
#[derive(Clone)]
pub struct FunctionOracle {
    name: String,
    n_vars: usize,
    total: bool,
    eval: Arc<EvalFn>,
}

impl fmt::Debug for FunctionOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FunctionOracle({}, n_vars={})", self.name, self.n_vars)
    }
}

fn log2_exact(n: usize) -> Result<usize> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::InvalidArgument(format!("{n} is not a power of two")));
    }
    Ok(n.trailing_zeros() as usize)
}

fn value(bits: &[bool]) -> usize {
    bits.iter().enumerate().map(|(i, &b)| (b as usize) << i).sum()
}

/// Determinant over Z_2 of a row-major `n×n` bit matrix.
pub(crate) fn det_z2(bits: &[bool], n: usize) -> bool {
    let mut rows: Vec<u64> = (0..n)
        .map(|r| (0..n).fold(0u64, |acc, c| acc | ((bits[r * n + c] as u64) << c)))
        .collect();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| rows[r] >> col & 1 == 1) else {
            return false;
        };
        rows.swap(col, p);
        for r in 0..n {
            if r != col && rows[r] >> col & 1 == 1 {
                rows[r] ^= rows[col];
            }
        }
    }
    true
}

impl FunctionOracle {
    /// Wrap a total function.
    pub fn custom(name: impl Into<String>, n_vars: usize, f: impl Fn(&[bool]) -> bool + Send + Sync + 'static) -> Self {
        FunctionOracle {
            name: name.into(),
            n_vars,
            total: true,
            eval: Arc::new(move |x| Some(f(x))),
        }
    }

    /// Wrap a partial function.
    pub fn partial(name: impl Into<String>, n_vars: usize, f: impl Fn(&[bool]) -> Option<bool> + Send + Sync + 'static) -> Self {
        FunctionOracle {
            name: name.into(),
            n_vars,
            total: false,
            eval: Arc::new(f),
        }
    }

    /// `PERM_n`: the `n×n` row-major matrix is a permutation matrix.
    pub fn perm(n: usize) -> Self {
        Self::custom(format!("PERM_{n}"), n * n, move |x| {
            let rows_ok = (0..n).all(|j| (0..n).filter(|&k| x[j * n + k]).count() == 1);
            let cols_ok = (0..n).all(|k| (0..n).filter(|&j| x[j * n + k]).count() == 1);
            rows_ok && cols_ok
        })
    }

    pub fn linear(f: LinearFamily, n: usize) -> Result<Self> {
        if n % 2 != 0 {
            return Err(Error::InvalidArgument(format!("{} needs even n, got {n}", f.name())));
        }
        Ok(match f {
            LinearFamily::Disj => Self::custom(format!("DISJ_{n}"), n, move |x| {
                (0..n / 2).all(|i| !(x[2 * i] && x[2 * i + 1]))
            }),
            LinearFamily::Ip => Self::custom(format!("IP_{n}"), n, move |x| {
                (0..n / 2).fold(false, |acc, i| acc ^ (x[2 * i] && x[2 * i + 1]))
            }),
        })
    }

    pub fn disj(n: usize) -> Result<Self> {
        Self::linear(LinearFamily::Disj, n)
    }

    pub fn ip(n: usize) -> Result<Self> {
        Self::linear(LinearFamily::Ip, n)
    }

    /// `IND_n(x, y) = x_{|y|}` with `x` at indices `0..n` and `y` after it.
    pub fn ind(n: usize) -> Result<Self> {
        let l = log2_exact(n)?;
        Ok(Self::custom(format!("IND_{n}"), n + l, move |v| v[value(&v[n..n + l])]))
    }

    /// `ISA_n` with `y` (log n bits) first, then `x`.
    pub fn isa(n: usize) -> Result<Self> {
        let k = log2_exact(n)?;
        if k == 0 {
            return Err(Error::InvalidArgument("ISA needs n >= 2".into()));
        }
        let b = n / k;
        Ok(Self::custom(format!("ISA_{n}"), k + n, move |v| {
            let s = value(&v[..k]);
            if s >= b {
                return false;
            }
            let x = &v[k..];
            x[value(&x[s * k..s * k + k])]
        }))
    }

    /// Determinant over Z_2 of an `n×n` row-major matrix.
    pub fn det_z2(n: usize) -> Self {
        Self::custom(format!("DET_Z2_{n}"), n * n, move |x| det_z2(x, n))
    }

    pub fn xor(n: usize) -> Self {
        Self::custom(format!("XOR_{n}"), n, |x| x.iter().fold(false, |a, &b| a ^ b))
    }

    /// The single variable `x_i` among `n`.
    pub fn variable(n: usize, i: usize) -> Self {
        Self::custom(format!("VAR_{i}"), n, move |x| x[i])
    }

    /// Partial function of three universal codes of `d×d` unitaries.
    pub fn r_partial(code: UniversalCode, theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < std::f64::consts::FRAC_1_SQRT_2) {
            return Err(Error::InvalidArgument(format!("theta must lie in (0, 1/sqrt 2), got {theta}")));
        }
        let len = code.len();
        Ok(Self::partial(format!("R_{}_{}_{}", code.ell, code.m, code.d), 3 * len, move |x| {
            r_function_eval(&code, &x[..len], &x[len..2 * len], &x[2 * len..], theta).ok().flatten()
        }))
    }

    /// Build by family name (`perm`, `disj`, `ip`, `ind`, `isa`, `det`, `xor`).
    pub fn by_name(name: &str, n: usize) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "perm" => Ok(Self::perm(n)),
            "disj" => Self::disj(n),
            "ip" => Self::ip(n),
            "ind" => Self::ind(n),
            "isa" => Self::isa(n),
            "det" | "det_z2" | "det-z2" => Ok(Self::det_z2(n)),
            "xor" | "parity" => Ok(Self::xor(n)),
            other => Err(Error::InvalidArgument(format!("unknown function family {other:?}"))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn is_total(&self) -> bool {
        self.total
    }

    pub fn eval_bits(&self, x: &[bool]) -> Option<bool> {
        assert_eq!(x.len(), self.n_vars, "input length mismatch");
        (self.eval)(x)
    }

    pub fn eval(&self, a: &Assignment) -> Option<bool> {
        self.eval_bits(a.bits())
    }

    /// Values on all inputs in index order; fails on undefined points.
    pub fn truth_table(&self) -> Result<Vec<bool>> {
        if self.n_vars > 26 {
            return Err(Error::InvalidArgument("too many variables for a truth table".into()));
        }
        Assignment::all(self.n_vars)
            .map(|a| {
                self.eval(&a)
                    .ok_or_else(|| Error::InvalidArgument(format!("{} undefined on {a}", self.name)))
            })
            .collect()
    }
}
