use std::fs;
use std::path::Path;
use std::process::ExitCode;

use num_complex::Complex64 as C64;
use serde_json::json;

use qbplab::analysis::{min_obdd_size, subfunction_counts};
use qbplab::families::{
    fig1_example, gm_exact_obdd, ind_zero_error_qobdd, isa_tree, linear_obdd, perm_qobdd, reversible_tree,
    FunctionOracle, LinearFamily,
};
use qbplab::gateset::{approx_search, SearchOptions, SearchResult};
use qbplab::linalg::CMatrix;
use qbplab::model::{parse_program, serialize_program};
use qbplab::qtm::{compile_to_qbp, simulate_qtm, QtmSpec};
use qbplab::semantics::{absolute_probabilities, classical_eval, evolve, evolve_gm, running_times, Method};
use qbplab::transforms::{amplify, clock_wrap, levelize, randomized_to_gm, realify, Combiner};
use qbplab::validate::validate_profile;
use qbplab::{Assignment, BranchingProgram, Mode};

use crate::error::{usage, CliResult};
use crate::output::fmt_sig;
use crate::{AbsMethod, BuildArgs, Cli, Command, Family, OracleQuery, QtmAction, TransformKind};

pub fn run(cli: &Cli) -> CliResult<ExitCode> {
    let json = cli.json;
    match &cli.command {
        Command::Validate { file, tol } => validate(file, *tol, json),
        Command::Eval { file, input, steps, csv } => eval(file, input, *steps, csv.as_deref(), json),
        Command::Abs {
            file,
            input,
            method,
            delta,
            tmax,
            tail,
        } => abs(file, input, *method, *delta, *tmax, *tail, json),
        Command::Build(args) => build(args, json),
        Command::Transform {
            kind,
            input,
            output,
            t,
            copies,
            combiner,
        } => transform(*kind, input, output, *t, *copies, combiner, json),
        Command::Gatesearch {
            dim,
            target,
            eps,
            max_depth,
            strict,
        } => gatesearch(*dim, target, *eps, *max_depth, *strict, json),
        Command::Qtm {
            action,
            spec,
            input,
            steps,
            out,
        } => qtm(*action, spec, input.as_deref(), *steps, out.as_deref(), json),
        Command::Experiment(args) => crate::experiments::run(args, json),
        Command::Oracle { query } => oracle(query, json),
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

pub fn load_program(path: &Path) -> CliResult<BranchingProgram> {
    Ok(parse_program(&read(path)?)?)
}

fn write_program(path: &Path, bp: &BranchingProgram) -> CliResult<()> {
    fs::write(path, serialize_program(bp))?;
    Ok(())
}

pub fn parse_input(bits: &str, n_vars: usize) -> CliResult<Assignment> {
    let a = Assignment::parse(bits).map_err(|e| usage(e.to_string()))?;
    if a.len() != n_vars {
        return Err(usage(format!("input has {} bits but the program has {n_vars} variables", a.len())));
    }
    Ok(a)
}

fn print_json(v: serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(&v).expect("json values serialize"));
}

fn print_probs(p: &[f64; 3]) {
    println!("p_0 = {}", fmt_sig(p[0]));
    println!("p_1 = {}", fmt_sig(p[1]));
    println!("p_? = {}", fmt_sig(p[2]));
}

fn validate(file: &Path, tol: f64, json: bool) -> CliResult<ExitCode> {
    let bp = load_program(file)?;
    let rep = validate_profile(&bp, tol);
    if json {
        print_json(serde_json::to_value(&rep).expect("report serializes"));
    } else {
        print!("{rep}");
    }
    Ok(if rep.ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn eval(file: &Path, input: &str, steps: Option<usize>, csv: Option<&Path>, json: bool) -> CliResult<ExitCode> {
    let bp = load_program(file)?;
    let a = parse_input(input, bp.n_vars())?;
    let steps = steps.unwrap_or_else(|| bp.depth().unwrap_or(100));
    let (p, residual, trace) = match bp.mode() {
        Mode::Quantum => {
            let tr = evolve(&bp, &a, steps);
            (tr.probabilities(), tr.final_residual(), Some(tr))
        }
        Mode::QuantumGm(_) => {
            let tr = evolve_gm(&bp, &a, steps)?;
            (tr.probabilities(), tr.final_residual(), Some(tr))
        }
        Mode::Deterministic | Mode::Randomized => (classical_eval(&bp, &a)?, 0.0, None),
    };
    if let (Some(path), Some(tr)) = (csv, &trace) {
        fs::write(path, tr.to_csv())?;
    }
    if json {
        print_json(json!({"input": input, "steps": steps, "p": p, "residual": residual}));
    } else {
        print_probs(&p);
        println!("residual = {}", fmt_sig(residual));
    }
    Ok(ExitCode::SUCCESS)
}

fn abs(
    file: &Path,
    input: &str,
    method: AbsMethod,
    delta: f64,
    tmax: usize,
    tail: f64,
    json: bool,
) -> CliResult<ExitCode> {
    let bp = load_program(file)?;
    let a = parse_input(input, bp.n_vars())?;
    if bp.mode() != Mode::Quantum {
        return Err(usage("abs needs a quantum program"));
    }
    let m = match method {
        AbsMethod::Iterate => Method::Iterate { t_max: tmax, tail_tol: tail },
        AbsMethod::Damped => Method::Damped { delta },
    };
    let res = absolute_probabilities(&bp, &a, m)?;
    let rt = running_times(&bp, &a, tmax, tail);
    if json {
        print_json(json!({"result": res, "running_times": rt}));
    } else {
        print_probs(&res.p);
        println!("uncertainty = {}", fmt_sig(res.uncertainty));
        println!("method = {}", res.method);
        println!("worst-case time = {:?}", rt.worst_case);
        println!("expected time = {} (tail bound {})", fmt_sig(rt.expected), fmt_sig(rt.tail_bound));
    }
    Ok(ExitCode::SUCCESS)
}

fn oracle_by_name(name: &str, n: usize) -> CliResult<FunctionOracle> {
    FunctionOracle::by_name(name, n).map_err(|e| usage(e.to_string()))
}

fn build(args: &BuildArgs, json: bool) -> CliResult<ExitCode> {
    let n = args.n;
    let need_n = || -> CliResult<()> {
        if n == 0 {
            return Err(usage("--n is required for this family"));
        }
        Ok(())
    };
    let bp = match args.family {
        Family::Fig1 => fig1_example(),
        Family::Disj => {
            need_n()?;
            linear_obdd(LinearFamily::Disj, n)?
        }
        Family::Ip => {
            need_n()?;
            linear_obdd(LinearFamily::Ip, n)?
        }
        Family::Perm => {
            need_n()?;
            perm_qobdd(n, args.primes)?
        }
        Family::Ind => {
            need_n()?;
            ind_zero_error_qobdd(n, args.eps)?
        }
        Family::Isa => {
            need_n()?;
            isa_tree(n)?
        }
        Family::GmDisj => {
            need_n()?;
            gm_exact_obdd(LinearFamily::Disj, n)?
        }
        Family::GmIp => {
            need_n()?;
            gm_exact_obdd(LinearFamily::Ip, n)?
        }
        Family::Tree => {
            need_n()?;
            let f = oracle_by_name(&args.function, n)?;
            let order: Vec<usize> = (0..f.n_vars()).collect();
            reversible_tree(&f, &order)?
        }
    };
    write_program(&args.out, &bp)?;
    report_written(&args.out, &bp, json);
    Ok(ExitCode::SUCCESS)
}

fn report_written(path: &Path, bp: &BranchingProgram, json: bool) {
    if json {
        print_json(json!({
            "out": path.display().to_string(),
            "size": bp.size(),
            "n_vars": bp.n_vars(),
            "mode": bp.mode().name(),
        }));
    } else {
        println!("wrote {} ({} nodes, {} variables, mode {})", path.display(), bp.size(), bp.n_vars(), bp.mode().name());
    }
}

fn transform(
    kind: TransformKind,
    input: &Path,
    output: &Path,
    t: Option<usize>,
    copies: usize,
    combiner: &str,
    json: bool,
) -> CliResult<ExitCode> {
    let bp = load_program(input)?;
    let need_t = || t.ok_or_else(|| usage("--t is required for this transform"));
    let out = match kind {
        TransformKind::Levelize => levelize(&bp, need_t()?)?,
        TransformKind::Realify => realify(&bp)?,
        TransformKind::Clock => {
            let t = u32::try_from(need_t()?).map_err(|_| usage("--t out of range"))?;
            clock_wrap(&bp, t)?
        }
        TransformKind::Amplify => {
            let c: Combiner = combiner.parse().map_err(|e: qbplab::Error| usage(e.to_string()))?;
            amplify(&bp, copies, c)?
        }
        TransformKind::Rand2gm => randomized_to_gm(&bp)?,
    };
    write_program(output, &out)?;
    report_written(output, &out, json);
    Ok(ExitCode::SUCCESS)
}

fn read_matrix(path: &Path, dim: usize) -> CliResult<CMatrix> {
    let rows: Vec<Vec<[f64; 2]>> =
        serde_json::from_str(&read(path)?).map_err(|e| usage(format!("bad matrix file {}: {e}", path.display())))?;
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(usage(format!("matrix in {} is not {dim}x{dim}", path.display())));
    }
    Ok(CMatrix::from_fn(dim, dim, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
}

fn gatesearch(dim: usize, target: &Path, eps: f64, max_depth: usize, strict: bool, json: bool) -> CliResult<ExitCode> {
    let m = read_matrix(target, dim)?;
    let opts = SearchOptions {
        max_depth,
        strict,
        frontier_limit: None,
    };
    let res = approx_search(&m, eps, opts)?;
    let found = res.is_found();
    if json {
        let mut v = json!({
            "found": found,
            "word": res.word().to_string(),
            "length": res.word().len(),
            "error": res.error(),
        });
        if let SearchResult::NotFound { explored, .. } = &res {
            v["explored"] = json!(explored);
        }
        print_json(v);
    } else {
        let status = if found { "found" } else { "not found; best" };
        println!("{status}: {} (length {}, error {})", res.word(), res.word().len(), fmt_sig(res.error()));
    }
    Ok(if found { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn qtm(
    action: QtmAction,
    spec_path: &Path,
    input: Option<&str>,
    steps: usize,
    out: Option<&Path>,
    json: bool,
) -> CliResult<ExitCode> {
    let spec = QtmSpec::from_json(&read(spec_path)?)?;
    let m = spec.build()?;
    match action {
        QtmAction::Simulate => {
            let inputs: Vec<Assignment> = match input {
                Some(bits) => vec![parse_input(bits, m.input_len())?],
                None => Assignment::all(m.input_len()).collect(),
            };
            let mut rows = Vec::new();
            for a in inputs {
                let tr = simulate_qtm(&m, &a, steps)?;
                rows.push((a.to_string(), tr.probabilities(), tr.final_residual()));
            }
            if json {
                let v: Vec<_> = rows
                    .iter()
                    .map(|(a, p, r)| json!({"input": a, "p": p, "residual": r}))
                    .collect();
                print_json(json!({"steps": steps, "results": v}));
            } else {
                println!("input,p_0,p_1,p_?,residual");
                for (a, p, r) in rows {
                    println!("{a},{},{},{},{}", fmt_sig(p[0]), fmt_sig(p[1]), fmt_sig(p[2]), fmt_sig(r));
                }
            }
        }
        QtmAction::Compile => {
            let c = compile_to_qbp(&m)?;
            if let Some(path) = out {
                write_program(path, &c.program)?;
            }
            if json {
                print_json(json!({
                    "configurations": c.configurations.len(),
                    "bound": c.bound,
                    "size": c.program.size(),
                    "out": out.map(|p| p.display().to_string()),
                }));
            } else {
                println!(
                    "{} reachable configurations (bound {}), program size {}",
                    c.configurations.len(),
                    fmt_sig(c.bound),
                    c.program.size()
                );
                if let Some(path) = out {
                    println!("wrote {}", path.display());
                }
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

pub fn parse_order(s: Option<&str>, n_vars: usize) -> CliResult<Vec<usize>> {
    let Some(s) = s else {
        return Ok((0..n_vars).collect());
    };
    let order: Vec<usize> = s
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| usage(format!("bad order entry {t:?}"))))
        .collect::<CliResult<_>>()?;
    let mut seen = vec![false; n_vars];
    for &i in &order {
        if i >= n_vars || std::mem::replace(&mut seen[i], true) {
            return Err(usage(format!("order must be a permutation of 0..{n_vars}")));
        }
    }
    if order.len() != n_vars {
        return Err(usage(format!("order must list all {n_vars} variables")));
    }
    Ok(order)
}

fn oracle(query: &OracleQuery, json: bool) -> CliResult<ExitCode> {
    match query {
        OracleQuery::MinObdd { family, n, order } => {
            let f = oracle_by_name(family, *n)?;
            let order = parse_order(order.as_deref(), f.n_vars())?;
            let size = min_obdd_size(&f, &order)?;
            let widths = subfunction_counts(&f, &order)?;
            if json {
                print_json(json!({"function": f.name(), "order": order, "size": size, "widths": widths}));
            } else {
                println!("{}: minimal OBDD size {size} (level widths {widths:?})", f.name());
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

