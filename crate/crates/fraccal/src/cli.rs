//! Command-line front end: convergence-table experiments over a grid of
//! derivative orders and halving step sizes.
//!
//! An experiment fixes a problem (built-in benchmark or a key=value file
//! with manufactured forcing), a solver, and a scheme, then runs the solver
//! at h, h/2, h/4, … for each requested α. Each table row reports the
//! maximum grid error and the observed order log₂(E_prev/E_cur) against
//! the previous (twice coarser) run; a warm-up run at 2·h-start supplies
//! the first row's reference, so every row carries an order.
//!
//! Cells are independent (α, h) runs. With the `parallel` feature they are
//! computed on a rayon thread pool — capped by the `FRACCAL_THREADS`
//! environment variable when set — and assembled in a fixed order, so the
//! emitted table is byte-identical regardless of thread count.

use std::path::PathBuf;

use clap::Parser;

use crate::error::{Error, Result};
use crate::solver::{max_error, solve, Problem, SolutionId, SolverTag};
use crate::weights::{L1TailVariant, SchemeKind, TailPolicy};

/// Errors at or below this floor are considered exhausted by round-off;
/// orders computed from them are suppressed.
const ERROR_FLOOR: f64 = 1e-12;

/// Command-line arguments (raw, validated by [`parse_spec`]).
#[derive(Parser, Debug, Clone)]
#[command(
    name = "fraccal",
    version,
    about = "Convergence tables for fractional-derivative time steppers"
)]
pub struct CliArgs {
    /// Problem: example1 | example2 | example3 | path to a key=value file
    #[arg(long)]
    pub problem: String,

    /// Solver: ns1 | ns2 (scalar) | ns3 | ns4 (2x2 system)
    #[arg(long)]
    pub solver: String,

    /// Scheme tag: gl, gl_trunc, l1, l1_mod, l1_trunc, l1_mod_trunc,
    /// shift_2ma, shift_2, gl_last2, gl_last2_trunc
    #[arg(long)]
    pub scheme: String,

    /// Comma-separated derivative orders in (0,1); defaults to the
    /// problem file's alpha or 0.2,0.5,0.9
    #[arg(long, value_delimiter = ',')]
    pub alpha: Option<Vec<f64>>,

    /// Coarsest tabulated step size; must be 1/N for an even integer N
    /// (the warm-up run uses 2·h-start)
    #[arg(long, default_value_t = 0.0125)]
    pub h_start: f64,

    /// Number of table rows, each halving the step size
    #[arg(long, default_value_t = 5)]
    pub h_steps: usize,

    /// Truncation divisor: truncated schemes keep exact weights up to ⌈N/p⌉
    #[arg(long, default_value_t = 5.0)]
    pub p: f64,

    /// Third tail coefficient of the truncated three-point family:
    /// derived | printed
    #[arg(long, default_value = "derived")]
    pub tail_variant: String,

    /// Output format: csv | md
    #[arg(long, default_value = "csv")]
    pub format: String,

    /// Write the table to this file instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Table output formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Md,
}

impl OutputFormat {
    pub fn parse(tag: &str) -> Result<Self> {
        match tag.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "md" => Ok(OutputFormat::Md),
            other => Err(Error::Parse(format!(
                "unknown format '{other}' (expected csv or md)"
            ))),
        }
    }
}

fn parse_variant(tag: &str) -> Result<L1TailVariant> {
    match tag.to_ascii_lowercase().as_str() {
        "derived" => Ok(L1TailVariant::Derived),
        "printed" => Ok(L1TailVariant::Printed),
        other => Err(Error::Parse(format!(
            "unknown tail variant '{other}' (expected derived or printed)"
        ))),
    }
}

/// Where the problem comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSource {
    Example1,
    Example2,
    Example3,
    Custom(CustomProblem),
}

impl ProblemSource {
    pub fn is_system(&self) -> bool {
        match self {
            ProblemSource::Example3 => true,
            ProblemSource::Custom(c) => matches!(c.shape, CustomShape::System { .. }),
            _ => false,
        }
    }

    /// Instantiate the problem at a given derivative order.
    pub fn build(&self, alpha: f64) -> Result<Problem> {
        match self {
            ProblemSource::Example1 => Ok(Problem::Scalar(crate::solver::example1(alpha)?)),
            ProblemSource::Example2 => Ok(Problem::Scalar(crate::solver::example2(alpha)?)),
            ProblemSource::Example3 => Ok(Problem::System(crate::solver::example3(alpha)?)),
            ProblemSource::Custom(c) => c.build(alpha),
        }
    }
}

/// A problem read from a key=value file, with manufactured forcing so a
/// catalog solution is exact.
#[derive(Debug, Clone, PartialEq)]
pub struct CustomProblem {
    /// Derivative order pinned by the file (used when --alpha is absent).
    pub alpha: Option<f64>,
    pub shape: CustomShape,
}

/// Scalar or 2×2 shape of a custom problem.
#[derive(Debug, Clone, PartialEq)]
pub enum CustomShape {
    Scalar {
        l: f64,
        solution: SolutionId,
        level: f64,
    },
    System {
        coeffs: [f64; 4],
        solution_y: SolutionId,
        solution_z: SolutionId,
        level_y: f64,
        level_z: f64,
    },
}

impl CustomProblem {
    pub fn build(&self, alpha: f64) -> Result<Problem> {
        match &self.shape {
            CustomShape::Scalar { l, solution, level } => Ok(Problem::Scalar(
                crate::solver::synthesize_scalar(alpha, *l, *solution, *level)?,
            )),
            CustomShape::System {
                coeffs,
                solution_y,
                solution_z,
                level_y,
                level_z,
            } => Ok(Problem::System(crate::solver::synthesize_system(
                alpha,
                *coeffs,
                *solution_y,
                *solution_z,
                *level_y,
                *level_z,
            )?)),
        }
    }
}

/// Parse a custom-problem description: one `key = value` pair per line,
/// `#` starts a comment. Scalar problems take `l` and `solution`; systems
/// take `a`,`b`,`c`,`d`, `solution_y`, and `solution_z`. Optional keys:
/// `alpha` (pins the derivative order), `y0`/`z0` (must agree with the
/// chosen solution's initial value; for `constant` they set the level).
pub fn parse_problem_file(text: &str) -> Result<CustomProblem> {
    use std::collections::BTreeMap;
    let mut kv: BTreeMap<String, String> = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Parse(format!(
                "problem file line {}: expected key = value, got '{line}'",
                lineno + 1
            ))
        })?;
        let key = key.trim().to_ascii_lowercase();
        let value = value.trim().to_string();
        if kv.insert(key.clone(), value).is_some() {
            return Err(Error::Parse(format!("problem file: duplicate key '{key}'")));
        }
    }
    const KNOWN: [&str; 11] = [
        "alpha",
        "l",
        "a",
        "b",
        "c",
        "d",
        "y0",
        "z0",
        "solution",
        "solution_y",
        "solution_z",
    ];
    for key in kv.keys() {
        if !KNOWN.contains(&key.as_str()) {
            return Err(Error::Parse(format!(
                "problem file: unknown key '{key}' (expected one of: {})",
                KNOWN.join(", ")
            )));
        }
    }
    let num = |key: &str| -> Result<Option<f64>> {
        kv.get(key)
            .map(|v| {
                v.parse::<f64>().map_err(|_| {
                    Error::Parse(format!(
                        "problem file: key '{key}' has non-numeric value '{v}'"
                    ))
                })
            })
            .transpose()
    };
    let alpha = num("alpha")?;
    if let Some(a) = alpha {
        check_alpha(a)?;
    }
    let scalar_keys = kv.contains_key("l") || kv.contains_key("solution");
    let system_keys = ["a", "b", "c", "d", "solution_y", "solution_z", "z0"]
        .iter()
        .any(|k| kv.contains_key(*k));
    if scalar_keys && system_keys {
        return Err(Error::Parse(
            "problem file mixes scalar keys (l, solution) with system keys (a..d, solution_y/z)"
                .into(),
        ));
    }
    if scalar_keys {
        let l = num("l")?
            .ok_or_else(|| Error::Parse("problem file: scalar problem needs key 'l'".into()))?;
        let solution = SolutionId::parse(kv.get("solution").ok_or_else(|| {
            Error::Parse("problem file: scalar problem needs key 'solution'".into())
        })?)?;
        let level = resolve_level("y0", num("y0")?, solution)?;
        Ok(CustomProblem {
            alpha,
            shape: CustomShape::Scalar { l, solution, level },
        })
    } else if system_keys {
        let mut coeffs = [0.0; 4];
        for (slot, key) in coeffs.iter_mut().zip(["a", "b", "c", "d"]) {
            *slot = num(key)?.ok_or_else(|| {
                Error::Parse(format!("problem file: system problem needs key '{key}'"))
            })?;
        }
        let sol = |key: &str| -> Result<SolutionId> {
            SolutionId::parse(kv.get(key).ok_or_else(|| {
                Error::Parse(format!("problem file: system problem needs key '{key}'"))
            })?)
        };
        let solution_y = sol("solution_y")?;
        let solution_z = sol("solution_z")?;
        let level_y = resolve_level("y0", num("y0")?, solution_y)?;
        let level_z = resolve_level("z0", num("z0")?, solution_z)?;
        Ok(CustomProblem {
            alpha,
            shape: CustomShape::System {
                coeffs,
                solution_y,
                solution_z,
                level_y,
                level_z,
            },
        })
    } else {
        Err(Error::Parse(
            "problem file defines neither a scalar problem (l, solution) nor a system \
             (a..d, solution_y, solution_z)"
                .into(),
        ))
    }
}

/// The `constant` solution takes its level from the initial-value key; for
/// every other solution the key is redundant and must agree with the
/// solution's own initial value.
fn resolve_level(key: &str, given: Option<f64>, sol: SolutionId) -> Result<f64> {
    match (sol, given) {
        (SolutionId::Constant, Some(level)) => Ok(level),
        (SolutionId::Constant, None) => Ok(1.0),
        (_, None) => Ok(1.0),
        (_, Some(v)) => {
            let expected = sol.at_zero(1.0);
            if (v - expected).abs() > 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "problem file: {key} = {v} contradicts solution '{}' (its initial value \
                     is {expected})",
                    sol.tag()
                )));
            }
            Ok(1.0)
        }
    }
}

/// A fully validated experiment.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub source: ProblemSource,
    pub solver: SolverTag,
    pub scheme: SchemeKind,
    /// Derivative orders, ascending, deduplicated.
    pub alphas: Vec<f64>,
    /// Coarsest tabulated step count (h-start = 1/n_start).
    pub n_start: usize,
    pub h_steps: usize,
    pub policy: TailPolicy,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "derivative order alpha must lie in (0,1), got {alpha}"
        )));
    }
    Ok(())
}

/// Validate raw arguments into an [`ExperimentSpec`]: resolves the problem
/// source, checks solver/scheme and solver/problem compatibility, the
/// α range, and that the step-size grid is made of exact reciprocals.
pub fn parse_spec(args: &CliArgs) -> Result<ExperimentSpec> {
    let source = match args.problem.as_str() {
        "example1" => ProblemSource::Example1,
        "example2" => ProblemSource::Example2,
        "example3" => ProblemSource::Example3,
        path => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Error::Parse(format!(
                    "problem '{path}' is neither a built-in name (example1/2/3) nor a \
                     readable file: {e}"
                ))
            })?;
            ProblemSource::Custom(parse_problem_file(&text)?)
        }
    };
    let solver = SolverTag::parse(&args.solver)?;
    let scheme = SchemeKind::parse(&args.scheme)?;
    solver.check_scheme(scheme)?;
    if solver.is_system() != source.is_system() {
        return Err(Error::InvalidParameter(format!(
            "solver {} expects a {} problem, but '{}' is {}",
            solver,
            if solver.is_system() {
                "2\u{d7}2 system"
            } else {
                "scalar"
            },
            args.problem,
            if source.is_system() {
                "a system"
            } else {
                "scalar"
            },
        )));
    }

    let mut alphas = match (&args.alpha, &source) {
        (Some(list), _) => list.clone(),
        (None, ProblemSource::Custom(c)) if c.alpha.is_some() => vec![c.alpha.unwrap()],
        _ => vec![0.2, 0.5, 0.9],
    };
    if alphas.is_empty() {
        return Err(Error::InvalidParameter(
            "at least one derivative order is required".into(),
        ));
    }
    for &a in &alphas {
        check_alpha(a)?;
    }
    alphas.sort_by(|a, b| a.partial_cmp(b).expect("alphas are finite"));
    alphas.dedup();

    if !(args.h_start > 0.0) || !args.h_start.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "--h-start must be positive, got {}",
            args.h_start
        )));
    }
    let n_real = 1.0 / args.h_start;
    if (n_real - n_real.round()).abs() > 1e-9 * n_real {
        return Err(Error::InvalidParameter(format!(
            "--h-start must be the reciprocal of an integer step count, got {} (1/h = {n_real})",
            args.h_start
        )));
    }
    let n_start = n_real.round() as usize;
    if !n_start.is_multiple_of(2) || n_start < 4 {
        return Err(Error::InvalidParameter(format!(
            "--h-start = 1/{n_start}: the warm-up run at 2\u{b7}h-start needs 1/(2h) to be an \
             integer \u{2265} 2"
        )));
    }
    if args.h_steps < 1 {
        return Err(Error::InvalidParameter(
            "--h-steps must be at least 1".into(),
        ));
    }

    let policy = TailPolicy::new(args.p)?.with_variant(parse_variant(&args.tail_variant)?);
    let format = OutputFormat::parse(&args.format)?;

    Ok(ExperimentSpec {
        source,
        solver,
        scheme,
        alphas,
        n_start,
        h_steps: args.h_steps,
        policy,
        format,
        out: args.out.clone(),
    })
}

/// One table cell: the run at (α, h) and its observed order against the
/// twice-coarser run (absent when either error sits at the round-off floor).
#[derive(Debug, Clone, PartialEq)]
pub struct TableCell {
    pub alpha: f64,
    pub h: f64,
    pub max_error: f64,
    pub order: Option<f64>,
}

/// A completed experiment: cells sorted by α ascending, then h descending.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub alphas: Vec<f64>,
    /// Tabulated step sizes, descending (h-start first).
    pub h_values: Vec<f64>,
    pub cells: Vec<TableCell>,
}

/// One error run: instantiate the problem at α, solve, report the largest
/// grid error of the first component.
fn cell_error(spec: &ExperimentSpec, alpha: f64, n_steps: usize) -> Result<f64> {
    let problem = spec.source.build(alpha)?;
    let traj = solve(spec.solver, &problem, spec.scheme, n_steps, spec.policy)?;
    let exact = problem.exact_y().ok_or_else(|| {
        Error::InvalidParameter(
            "problem provides no exact solution to measure errors against".into(),
        )
    })?;
    Ok(max_error(&traj, exact))
}

#[cfg(feature = "parallel")]
fn compute_errors(spec: &ExperimentSpec, jobs: &[(f64, usize)]) -> Result<Vec<f64>> {
    use rayon::prelude::*;
    let run = || {
        jobs.par_iter()
            .map(|&(alpha, n)| cell_error(spec, alpha, n))
            .collect::<Result<Vec<f64>>>()
    };
    match std::env::var("FRACCAL_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
    {
        Some(threads) if threads >= 1 => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
            .install(run),
        _ => run(),
    }
}

#[cfg(not(feature = "parallel"))]
fn compute_errors(spec: &ExperimentSpec, jobs: &[(f64, usize)]) -> Result<Vec<f64>> {
    jobs.iter()
        .map(|&(alpha, n)| cell_error(spec, alpha, n))
        .collect()
}

/// Run the whole experiment. Per α the runs are N/2 (warm-up), N, 2N, …;
/// the warm-up error only feeds the first row's order. Cell runs are
/// independent and may execute in parallel; assembly order is fixed.
pub fn run_table(spec: &ExperimentSpec) -> Result<ConvergenceTable> {
    let runs_per_alpha = spec.h_steps + 1;
    let mut jobs = Vec::with_capacity(spec.alphas.len() * runs_per_alpha);
    for &alpha in &spec.alphas {
        jobs.push((alpha, spec.n_start / 2));
        for i in 0..spec.h_steps {
            jobs.push((alpha, spec.n_start << i));
        }
    }
    let errors = compute_errors(spec, &jobs)?;

    let h_values: Vec<f64> = (0..spec.h_steps)
        .map(|i| 1.0 / (spec.n_start << i) as f64)
        .collect();
    let mut cells = Vec::with_capacity(spec.alphas.len() * spec.h_steps);
    for (ai, &alpha) in spec.alphas.iter().enumerate() {
        let base = ai * runs_per_alpha;
        for (i, &h) in h_values.iter().enumerate() {
            let err = errors[base + 1 + i];
            let prev = errors[base + i];
            let order = if err > ERROR_FLOOR && prev > ERROR_FLOOR {
                Some((prev / err).log2())
            } else {
                None
            };
            cells.push(TableCell {
                alpha,
                h,
                max_error: err,
                order,
            });
        }
    }
    Ok(ConvergenceTable {
        alphas: spec.alphas.clone(),
        h_values,
        cells,
    })
}

/// Render a table. CSV: `alpha,h,max_error,order` with errors in
/// scientific notation (5 significant digits), orders to 4 decimals, and
/// an empty order field when undefined. Markdown: one error/order column
/// pair per α, em-dash for undefined orders.
pub fn emit_table(table: &ConvergenceTable, format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => {
            let mut out = String::from("alpha,h,max_error,order\n");
            for c in &table.cells {
                match c.order {
                    Some(o) => {
                        out.push_str(&format!("{},{},{:.4e},{o:.4}\n", c.alpha, c.h, c.max_error))
                    }
                    None => out.push_str(&format!("{},{},{:.4e},\n", c.alpha, c.h, c.max_error)),
                }
            }
            out
        }
        OutputFormat::Md => {
            let mut out = String::from("| h |");
            for &a in &table.alphas {
                out.push_str(&format!(" max error (\u{3b1}={a}) | order |"));
            }
            out.push_str("\n| --- |");
            for _ in &table.alphas {
                out.push_str(" --- | --- |");
            }
            out.push('\n');
            for (hi, &h) in table.h_values.iter().enumerate() {
                out.push_str(&format!("| {h} |"));
                for ai in 0..table.alphas.len() {
                    let c = &table.cells[ai * table.h_values.len() + hi];
                    match c.order {
                        Some(o) => {
                            out.push_str(&format!(" {:.4e} | {o:.4} |", c.max_error));
                        }
                        None => {
                            out.push_str(&format!(" {:.4e} | \u{2014} |", c.max_error));
                        }
                    }
                }
                out.push('\n');
            }
            out
        }
    }
}

/// Parse, run, and emit: the whole command. Usage problems surface as
/// usage errors (exit 2 in the binary); runtime failures as exit 3.
pub fn run(args: CliArgs) -> Result<()> {
    let spec = parse_spec(&args)?;
    let table = run_table(&spec)?;
    let text = emit_table(&table, spec.format);
    match &spec.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}
