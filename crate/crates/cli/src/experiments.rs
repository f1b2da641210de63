//! Batch experiments. Every run is a pure function of its arguments and
//! seed; parallel work is collected in input order so CSV files are
//! byte-identical across runs and thread counts.

use std::process::ExitCode;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use qbplab::analysis::{
    build_schemes, entropy_accumulation, is_k_stable, min_obdd_size, min_reversible_obdd, scheme_dimension_bound,
    subfunction_counts, verify_scheme,
};
use qbplab::families::{ind_zero_error_qobdd, perm_qobdd, reversible_tree, FunctionOracle};
use qbplab::semantics::{absolute_probabilities, evolve, running_times, Method};
use qbplab::transforms::{clock_wrap, ClockParams};
use qbplab::{Assignment, Mode};

use crate::error::{usage, CliError, CliResult};
use crate::output::{fmt_sig, Csv};
use crate::{ExperimentArgs, ExperimentKind};

/// Largest input space enumerated exhaustively.
const MAX_ENUM_VARS: usize = 20;

pub fn jobs(flag: Option<usize>) -> usize {
    flag.or_else(|| std::env::var("QBPLAB_JOBS").ok().and_then(|v| v.parse().ok()))
        .filter(|&j| j > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn oracle(name: &str, n: usize) -> CliResult<FunctionOracle> {
    FunctionOracle::by_name(name, n).map_err(|e| usage(e.to_string()))
}

/// Input indices: all of them, or a seeded sample without repetition.
fn input_indices(n_vars: usize, samples: Option<usize>, seed: u64) -> CliResult<Vec<u64>> {
    match samples {
        None if n_vars > MAX_ENUM_VARS => Err(usage(format!(
            "{n_vars} variables are too many to enumerate; use --samples"
        ))),
        None => Ok((0..1u64 << n_vars).collect()),
        Some(k) => {
            let space = if n_vars >= 63 { u64::MAX } else { 1u64 << n_vars };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            if space <= usize::MAX as u64 && (k as u64) <= space {
                let mut v: Vec<u64> = sample(&mut rng, space as usize, k).into_iter().map(|i| i as u64).collect();
                v.sort_unstable();
                Ok(v)
            } else {
                Err(usage(format!("cannot draw {k} distinct inputs from 2^{n_vars}")))
            }
        }
    }
}

pub fn run(args: &ExperimentArgs, json: bool) -> CliResult<ExitCode> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs(args.jobs))
        .build()
        .map_err(|e| usage(e.to_string()))?;
    let (csv, summary, ok) = pool.install(|| match args.kind {
        ExperimentKind::PermError => perm_error(args),
        ExperimentKind::Entropy => entropy(args),
        ExperimentKind::Scheme => scheme(args),
        ExperimentKind::Kstable => kstable(args),
        ExperimentKind::Clock => clock(args),
        ExperimentKind::MinObdd => min_obdd(args),
    })?;
    csv.write(&args.csv)?;
    if json {
        let mut s = summary;
        s["csv"] = json!(args.csv.display().to_string());
        s["ok"] = json!(ok);
        println!("{}", serde_json::to_string_pretty(&s).expect("json values serialize"));
    } else {
        for (k, v) in summary.as_object().into_iter().flatten() {
            println!("{k} = {v}");
        }
        println!("wrote {}", args.csv.display());
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

type Outcome = CliResult<(Csv, serde_json::Value, bool)>;

fn perm_error(args: &ExperimentArgs) -> Outcome {
    let n = args.n;
    let bp = perm_qobdd(n, args.primes)?;
    let f = FunctionOracle::perm(n);
    let t = bp.depth().ok_or_else(|| CliError::Failed("PERM program is cyclic".into()))?;
    let nv = n * n;
    let idx = input_indices(nv, args.samples, args.seed)?;
    let rows: Vec<(u64, bool, [f64; 3])> = idx
        .par_iter()
        .map(|&i| {
            let a = Assignment::from_index(nv, i);
            (i, f.eval(&a).unwrap_or(false), evolve(&bp, &a, t).probabilities())
        })
        .collect();
    let mut csv = Csv::new(&["index", "input", "is_perm", "p_0", "p_1", "p_?"]);
    let mut min_accept = f64::INFINITY;
    let mut max_false = 0.0f64;
    for &(i, is_perm, p) in &rows {
        if is_perm {
            min_accept = min_accept.min(p[1]);
        } else {
            max_false = max_false.max(p[1]);
        }
        let a = Assignment::from_index(nv, i);
        csv.row(&[i.to_string(), a.to_string(), (is_perm as u8).to_string(), fmt_sig(p[0]), fmt_sig(p[1]), fmt_sig(p[2])]);
    }
    let bound = 1.0 / n as f64;
    let ok = max_false <= bound + 1e-6 && (min_accept.is_infinite() || min_accept >= 1.0 - 1e-6);
    let summary = json!({
        "size": bp.size(),
        "inputs": rows.len(),
        "min_accept_permutation": if min_accept.is_finite() { json!(min_accept) } else { json!(null) },
        "max_accept_non_permutation": max_false,
        "error_bound": bound,
    });
    Ok((csv, summary, ok))
}

fn entropy(args: &ExperimentArgs) -> Outcome {
    let f = oracle(&args.function, args.n)?;
    let order: Vec<usize> = (0..f.n_vars()).collect();
    let bp = reversible_tree(&f, &order)?.with_mode(Mode::Quantum)?;
    let acc = entropy_accumulation(&bp, &f, args.p)?;
    let mut csv = Csv::new(&["k", "entropy", "bound", "holds"]);
    for pt in &acc.points {
        csv.row(&[pt.k.to_string(), fmt_sig(pt.entropy), fmt_sig(pt.bound), (pt.holds as u8).to_string()]);
    }
    let ok = acc.points.iter().all(|p| p.holds) && acc.size_ok;
    let summary = json!({"size": acc.size, "size_bound": acc.size_bound, "size_ok": acc.size_ok});
    Ok((csv, summary, ok))
}

fn scheme(args: &ExperimentArgs) -> Outcome {
    let f = oracle(&args.function, args.n)?;
    let order: Vec<usize> = (0..f.n_vars()).collect();
    let g = min_reversible_obdd(&f, &order)?;
    let gq = if args.function.eq_ignore_ascii_case("ind") {
        ind_zero_error_qobdd(args.n, args.eps)?
    } else {
        g.with_mode(Mode::Quantum)?
    };
    let all = build_schemes(&g, &gq)?;
    let mut csv = Csv::new(&[
        "level",
        "rev_level_size",
        "qobdd_level_size",
        "rows",
        "cols",
        "epsilon",
        "verified",
        "dimension_bound",
        "size_bound",
    ]);
    let mut ok = true;
    for c in &all {
        let verified = verify_scheme(&c.scheme, qbplab::DEFAULT_TOL).ok;
        let dim = scheme_dimension_bound(&c.scheme)?.holds;
        ok &= verified && dim && c.size_bound_holds;
        csv.row(&[
            c.level.to_string(),
            c.rev_level_size.to_string(),
            c.qobdd_level_size.to_string(),
            c.scheme.rows().to_string(),
            c.scheme.cols().to_string(),
            fmt_sig(c.scheme.epsilon),
            (verified as u8).to_string(),
            (dim as u8).to_string(),
            (c.size_bound_holds as u8).to_string(),
        ]);
    }
    let summary = json!({"levels": all.len(), "reversible_size": g.size(), "qobdd_size": gq.size()});
    Ok((csv, summary, ok))
}

fn kstable(args: &ExperimentArgs) -> Outcome {
    let f = oracle(&args.function, args.n)?;
    let ks: Vec<usize> = (1..=args.k).collect();
    let results: Vec<CliResult<bool>> = ks.par_iter().map(|&k| Ok(is_k_stable(&f, k)?)).collect();
    let mut csv = Csv::new(&["function", "n_vars", "k", "stable"]);
    let mut stable = Vec::new();
    for (k, r) in ks.iter().zip(results) {
        let s = r?;
        stable.push(s);
        csv.row(&[f.name().to_string(), f.n_vars().to_string(), k.to_string(), (s as u8).to_string()]);
    }
    Ok((csv, json!({"function": f.name(), "stable": stable}), true))
}

fn clock(args: &ExperimentArgs) -> Outcome {
    let bp = perm_qobdd(args.n, args.primes)?;
    let nv = bp.n_vars();
    let idx = input_indices(nv, args.samples, args.seed)?;
    let m = Method::Iterate { t_max: 1_000_000, tail_tol: 1e-13 };
    let base: Vec<CliResult<f64>> = idx
        .par_iter()
        .map(|&i| Ok(absolute_probabilities(&bp, &Assignment::from_index(nv, i), m)?.p[1]))
        .collect();
    let base: Vec<f64> = base.into_iter().collect::<CliResult<_>>()?;
    let mut csv = Csv::new(&["t", "beta", "gamma", "input", "p_1", "p_1_clock", "expected_time", "tail_bound"]);
    let mut ok = true;
    let mut worst_gap = 0.0f64;
    for t in 1..=args.t.min(ClockParams::MAX_T) {
        let params = ClockParams::new(t)?;
        let g = clock_wrap(&bp, t)?;
        let rows: Vec<CliResult<(f64, f64, f64)>> = idx
            .par_iter()
            .map(|&i| {
                let a = Assignment::from_index(nv, i);
                let q = absolute_probabilities(&g, &a, m)?.p[1];
                let rt = running_times(&g, &a, 1_000_000, 1e-6);
                Ok((q, rt.expected, rt.tail_bound))
            })
            .collect();
        for ((&i, &p1), r) in idx.iter().zip(&base).zip(rows) {
            let (q, expected, tail) = r?;
            ok &= q <= p1 + 1e-9 && expected.is_finite();
            worst_gap = worst_gap.max(p1 - q);
            csv.row(&[
                t.to_string(),
                fmt_sig(params.beta),
                fmt_sig(params.gamma),
                Assignment::from_index(nv, i).to_string(),
                fmt_sig(p1),
                fmt_sig(q),
                fmt_sig(expected),
                fmt_sig(tail),
            ]);
        }
    }
    Ok((csv, json!({"inputs": idx.len(), "max_p1_loss": worst_gap}), ok))
}

fn min_obdd(args: &ExperimentArgs) -> Outcome {
    let f = oracle(&args.function, args.n)?;
    let order: Vec<usize> = (0..f.n_vars()).collect();
    let widths = subfunction_counts(&f, &order)?;
    let size = min_obdd_size(&f, &order)?;
    let mut csv = Csv::new(&["level", "variable", "width"]);
    for (l, w) in widths.iter().enumerate() {
        let var = order.get(l).map_or("sinks".to_string(), |v| v.to_string());
        csv.row(&[l.to_string(), var, w.to_string()]);
    }
    Ok((csv, json!({"function": f.name(), "size": size}), true))
}
