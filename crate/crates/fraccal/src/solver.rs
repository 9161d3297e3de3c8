//! Time steppers for linear fractional initial-value problems on `[0,1]`:
//!
//! * scalar — D^α y(x) + L·y(x) = f(x), y(0) = y₀,
//! * 2×2 system — D^α y + A·y + B·z = f, D^α z + C·y + D·z = g.
//!
//! Four marching methods share one skeleton and differ only in where the
//! equation is collocated and which weight family they accept:
//!
//! * `ns1`/`ns3` — collocate at the grid points x_n; pair with the
//!   unshifted (three-point) weight family.
//! * `ns2`/`ns4` — collocate at the shifted points x_n − αh/2 using the
//!   averaged value (1−α/2)·u_n + (α/2)·u_{n−1}; pair with the
//!   binomial weight family.
//!
//! All methods take the same special first step, exact up to O(h²), then
//! run the scheme-driven recursion from n = 2. Grids are uniform with
//! h = 1/N, so every run covers exactly `[0,1]`.

use crate::approx::{caputo_reference, ReferenceFunction};
use crate::error::{Error, Result};
use crate::specfun;
use crate::weights::{SchemeKind, SchemeTable, TailPolicy};

/// Relative threshold below which an update denominator counts as singular.
const SINGULAR_REL: f64 = 1e-14;

/// Scalar problem D^α y + L·y = f on `[0,1]` with y(0) = y₀.
pub struct CaputoProblem {
    /// Derivative order α ∈ (0,1).
    pub alpha: f64,
    /// Reaction coefficient L.
    pub l: f64,
    /// Forcing term f(x).
    pub f: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    /// Initial value y(0).
    pub y0: f64,
    /// Exact solution, when known, for error reporting.
    pub exact: Option<Box<dyn Fn(f64) -> f64 + Send + Sync>>,
}

/// 2×2 system D^α y + A·y + B·z = f, D^α z + C·y + D·z = g on `[0,1]`.
pub struct SystemProblem {
    /// Derivative order α ∈ (0,1), shared by both components.
    pub alpha: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    /// Forcing term of the first component.
    pub f: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    /// Forcing term of the second component.
    pub g: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub y0: f64,
    pub z0: f64,
    /// Exact first component, when known.
    pub exact_y: Option<Box<dyn Fn(f64) -> f64 + Send + Sync>>,
    /// Exact second component, when known.
    pub exact_z: Option<Box<dyn Fn(f64) -> f64 + Send + Sync>>,
}

/// A problem of either shape, as the command line handles them uniformly.
pub enum Problem {
    Scalar(CaputoProblem),
    System(SystemProblem),
}

impl Problem {
    pub fn alpha(&self) -> f64 {
        match self {
            Problem::Scalar(p) => p.alpha,
            Problem::System(p) => p.alpha,
        }
    }

    pub fn is_system(&self) -> bool {
        matches!(self, Problem::System(_))
    }

    /// Exact first component, when the problem carries one.
    pub fn exact_y(&self) -> Option<&(dyn Fn(f64) -> f64 + Send + Sync)> {
        match self {
            Problem::Scalar(p) => p.exact.as_deref(),
            Problem::System(p) => p.exact_y.as_deref(),
        }
    }
}

/// The four marching methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverTag {
    /// Scalar, collocated at grid points.
    Ns1,
    /// Scalar, collocated at shifted points.
    Ns2,
    /// System, collocated at grid points.
    Ns3,
    /// System, collocated at shifted points.
    Ns4,
}

impl SolverTag {
    pub const ALL: [SolverTag; 4] = [
        SolverTag::Ns1,
        SolverTag::Ns2,
        SolverTag::Ns3,
        SolverTag::Ns4,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            SolverTag::Ns1 => "ns1",
            SolverTag::Ns2 => "ns2",
            SolverTag::Ns3 => "ns3",
            SolverTag::Ns4 => "ns4",
        }
    }

    pub fn parse(tag: &str) -> Result<Self> {
        let norm = tag.to_ascii_lowercase();
        SolverTag::ALL
            .into_iter()
            .find(|t| t.tag() == norm)
            .ok_or_else(|| {
                Error::Parse(format!(
                    "unknown solver '{tag}' (expected one of: ns1, ns2, ns3, ns4)"
                ))
            })
    }

    /// True for the solvers collocating at x_n − αh/2.
    pub fn is_shifted(self) -> bool {
        matches!(self, SolverTag::Ns2 | SolverTag::Ns4)
    }

    /// True for the 2×2 system solvers.
    pub fn is_system(self) -> bool {
        matches!(self, SolverTag::Ns3 | SolverTag::Ns4)
    }

    /// Check that `kind`'s evaluation point matches this solver's
    /// collocation point.
    pub fn check_scheme(self, kind: SchemeKind) -> Result<()> {
        match (self.is_shifted(), kind.is_shifted()) {
            (true, false) => Err(Error::SchemeMismatch(format!(
                "solver {} collocates at the shifted points x_n \u{2212} \u{3b1}h/2, \
                 but scheme {} approximates the derivative at the grid points",
                self.tag(),
                kind.tag()
            ))),
            (false, true) => Err(Error::SchemeMismatch(format!(
                "solver {} collocates at the grid points x_n, but scheme {} \
                 approximates the derivative at the shifted points x_n \u{2212} \u{3b1}h/2",
                self.tag(),
                kind.tag()
            ))),
            _ => Ok(()),
        }
    }
}

impl std::fmt::Display for SolverTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// A computed discrete solution on the grid x_n = n·h, n = 0..=N.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Grid spacing (1/N).
    pub h: f64,
    /// First (or only) component u_0..u_N.
    pub u: Vec<f64>,
    /// Second component for system runs.
    pub v: Option<Vec<f64>>,
    /// Scheme that produced the run.
    pub scheme: SchemeKind,
    /// Solver that produced the run.
    pub solver: SolverTag,
}

impl Trajectory {
    /// Grid point x_n.
    pub fn x(&self, n: usize) -> f64 {
        n as f64 * self.h
    }

    /// Largest |u_n − exact(x_n)| over the whole grid, endpoints included.
    pub fn max_error_u(&self, exact: impl Fn(f64) -> f64) -> f64 {
        self.u
            .iter()
            .enumerate()
            .map(|(n, &un)| (un - exact(self.x(n))).abs())
            .fold(0.0, f64::max)
    }

    /// Largest second-component error, for system runs.
    pub fn max_error_v(&self, exact: impl Fn(f64) -> f64) -> Option<f64> {
        self.v.as_ref().map(|v| {
            v.iter()
                .enumerate()
                .map(|(n, &vn)| (vn - exact(self.x(n))).abs())
                .fold(0.0, f64::max)
        })
    }

    /// CSV rendering with 17 significant digits: columns `x,u`, plus `v`
    /// for system runs, plus `exact,err` (first component) when an exact
    /// solution is supplied.
    pub fn to_csv(&self, exact: Option<&dyn Fn(f64) -> f64>) -> String {
        let mut out = String::from("x,u");
        if self.v.is_some() {
            out.push_str(",v");
        }
        if exact.is_some() {
            out.push_str(",exact,err");
        }
        out.push('\n');
        for (n, &un) in self.u.iter().enumerate() {
            let x = self.x(n);
            out.push_str(&format!("{x:.16e},{un:.16e}"));
            if let Some(v) = &self.v {
                out.push_str(&format!(",{:.16e}", v[n]));
            }
            if let Some(e) = exact {
                let ex = e(x);
                out.push_str(&format!(",{ex:.16e},{:.16e}", (un - ex).abs()));
            }
            out.push('\n');
        }
        out
    }
}

/// Largest first-component error of a run (what convergence tables report).
pub fn max_error(traj: &Trajectory, exact: impl Fn(f64) -> f64) -> f64 {
    traj.max_error_u(exact)
}

/// The common O(h²) first step of the scalar solvers:
/// ỹ₁ = (y₀ + Γ(2−α)·h^α·f(h)) / (1 + Γ(2−α)·L·h^α).
pub fn first_step_scalar(problem: &CaputoProblem, h: f64) -> Result<f64> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "first step: step size must be positive, got {h}"
        )));
    }
    let g = specfun::gamma_real(2.0 - problem.alpha)?;
    let ha = h.powf(problem.alpha);
    let denom = 1.0 + g * problem.l * ha;
    if !denom.is_finite() || denom.abs() <= SINGULAR_REL * (1.0 + (g * problem.l * ha).abs()) {
        return Err(Error::SingularStep {
            step: 1,
            detail: format!(
                "1 + \u{393}(2\u{2212}\u{3b1})\u{b7}L\u{b7}h^\u{3b1} vanished (L = {}, h = {h})",
                problem.l
            ),
        });
    }
    Ok((problem.y0 + g * ha * (problem.f)(h)) / denom)
}

/// The common O(h²) first step of the system solvers (2×2 solve with the
/// same three-point n = 1 weights).
pub fn first_step_system(p: &SystemProblem, h: f64) -> Result<(f64, f64)> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "first step: step size must be positive, got {h}"
        )));
    }
    let s0 = 1.0 / specfun::gamma_real(2.0 - p.alpha)?;
    let ha = h.powf(p.alpha);
    let det = (s0 + p.a * ha) * (s0 + p.d * ha) - p.b * p.c * ha * ha;
    let scale = ((s0 + p.a * ha) * (s0 + p.d * ha)).abs() + (p.b * p.c * ha * ha).abs();
    if !det.is_finite() || det.abs() <= SINGULAR_REL * scale {
        return Err(Error::SingularStep {
            step: 1,
            detail: format!("first-step 2\u{d7}2 determinant vanished (det = {det})"),
        });
    }
    let rf = ha * (p.f)(h) + s0 * p.y0;
    let rg = ha * (p.g)(h) + s0 * p.z0;
    let u1 = ((s0 + p.d * ha) * rf - p.b * ha * rg) / det;
    let v1 = ((s0 + p.a * ha) * rg - p.c * ha * rf) / det;
    Ok((u1, v1))
}

fn check_steps(n_steps: usize) -> Result<()> {
    if n_steps < 2 {
        return Err(Error::InvalidParameter(format!(
            "solver: need at least two steps, got {n_steps}"
        )));
    }
    Ok(())
}

fn scalar_march(
    p: &CaputoProblem,
    tag: SolverTag,
    kind: SchemeKind,
    n_steps: usize,
    policy: TailPolicy,
) -> Result<Trajectory> {
    tag.check_scheme(kind)?;
    check_steps(n_steps)?;
    let alpha = p.alpha;
    let h = 1.0 / n_steps as f64;
    let ha = h.powf(alpha);
    let table = SchemeTable::new(kind, alpha, n_steps, policy)?;
    let shifted = tag.is_shifted();

    let mut u = Vec::with_capacity(n_steps + 1);
    u.push(p.y0);
    u.push(first_step_scalar(p, h)?);
    for n in 2..=n_steps {
        let lam = table.row(n)?;
        let mut hist = 0.0;
        for k in 1..=n {
            hist += lam[k] * u[n - k];
        }
        let x = n as f64 * h;
        let (rhs, denom) = if shifted {
            (
                ha * (p.f)(x - alpha * h / 2.0) - (alpha * p.l * ha / 2.0) * u[n - 1] - hist,
                lam[0] + p.l * (1.0 - alpha / 2.0) * ha,
            )
        } else {
            (ha * (p.f)(x) - hist, lam[0] + p.l * ha)
        };
        let scale = lam[0].abs() + (p.l * ha).abs();
        if !denom.is_finite() || denom.abs() <= SINGULAR_REL * scale {
            return Err(Error::SingularStep {
                step: n,
                detail: format!(
                    "update denominator vanished (\u{3bb}\u{2080} = {}, L = {})",
                    lam[0], p.l
                ),
            });
        }
        u.push(rhs / denom);
    }
    Ok(Trajectory {
        h,
        u,
        v: None,
        scheme: kind,
        solver: tag,
    })
}

fn system_march(
    p: &SystemProblem,
    tag: SolverTag,
    kind: SchemeKind,
    n_steps: usize,
    policy: TailPolicy,
) -> Result<Trajectory> {
    tag.check_scheme(kind)?;
    check_steps(n_steps)?;
    let alpha = p.alpha;
    let h = 1.0 / n_steps as f64;
    let ha = h.powf(alpha);
    let table = SchemeTable::new(kind, alpha, n_steps, policy)?;
    let shifted = tag.is_shifted();
    let fac = if shifted { 1.0 - alpha / 2.0 } else { 1.0 };

    let mut u = Vec::with_capacity(n_steps + 1);
    let mut v = Vec::with_capacity(n_steps + 1);
    u.push(p.y0);
    v.push(p.z0);
    let (u1, v1) = first_step_system(p, h)?;
    u.push(u1);
    v.push(v1);
    for n in 2..=n_steps {
        let lam = table.row(n)?;
        let (mut hist_u, mut hist_v) = (0.0, 0.0);
        for k in 1..=n {
            hist_u += lam[k] * u[n - k];
            hist_v += lam[k] * v[n - k];
        }
        let x = n as f64 * h;
        let (s, q) = if shifted {
            let xs = x - alpha * h / 2.0;
            (
                ha * ((p.f)(xs) - (alpha / 2.0) * (p.a * u[n - 1] + p.b * v[n - 1])) - hist_u,
                ha * ((p.g)(xs) - (alpha / 2.0) * (p.c * u[n - 1] + p.d * v[n - 1])) - hist_v,
            )
        } else {
            (ha * (p.f)(x) - hist_u, ha * (p.g)(x) - hist_v)
        };
        let a00 = lam[0] + p.a * ha * fac;
        let a01 = p.b * ha * fac;
        let a10 = p.c * ha * fac;
        let a11 = lam[0] + p.d * ha * fac;
        let det = a00 * a11 - a01 * a10;
        let scale = (a00 * a11).abs() + (a01 * a10).abs();
        if !det.is_finite() || det.abs() <= SINGULAR_REL * scale {
            return Err(Error::SingularStep {
                step: n,
                detail: format!("2\u{d7}2 update determinant vanished (det = {det})"),
            });
        }
        u.push((a11 * s - a01 * q) / det);
        v.push((a00 * q - a10 * s) / det);
    }
    Ok(Trajectory {
        h,
        u,
        v: Some(v),
        scheme: kind,
        solver: tag,
    })
}

/// Scalar solver collocating at grid points; pair with the unshifted
/// three-point weight family.
pub fn solve_ns1(
    p: &CaputoProblem,
    kind: SchemeKind,
    n_steps: usize,
    policy: TailPolicy,
) -> Result<Trajectory> {
    scalar_march(p, SolverTag::Ns1, kind, n_steps, policy)
}

/// Scalar solver collocating at the shifted points x_n − αh/2; pair with
/// the binomial weight family.
pub fn solve_ns2(
    p: &CaputoProblem,
    kind: SchemeKind,
    n_steps: usize,
    policy: TailPolicy,
) -> Result<Trajectory> {
    scalar_march(p, SolverTag::Ns2, kind, n_steps, policy)
}

/// System solver collocating at grid points.
pub fn solve_ns3(
    p: &SystemProblem,
    kind: SchemeKind,
    n_steps: usize,
    policy: TailPolicy,
) -> Result<Trajectory> {
    system_march(p, SolverTag::Ns3, kind, n_steps, policy)
}

/// System solver collocating at the shifted points.
pub fn solve_ns4(
    p: &SystemProblem,
    kind: SchemeKind,
    n_steps: usize,
    policy: TailPolicy,
) -> Result<Trajectory> {
    system_march(p, SolverTag::Ns4, kind, n_steps, policy)
}

/// Dispatch a run by solver tag, rejecting scalar/system mismatches.
pub fn solve(
    tag: SolverTag,
    problem: &Problem,
    kind: SchemeKind,
    n_steps: usize,
    policy: TailPolicy,
) -> Result<Trajectory> {
    match (tag, problem) {
        (SolverTag::Ns1, Problem::Scalar(p)) => solve_ns1(p, kind, n_steps, policy),
        (SolverTag::Ns2, Problem::Scalar(p)) => solve_ns2(p, kind, n_steps, policy),
        (SolverTag::Ns3, Problem::System(p)) => solve_ns3(p, kind, n_steps, policy),
        (SolverTag::Ns4, Problem::System(p)) => solve_ns4(p, kind, n_steps, policy),
        (tag, Problem::Scalar(_)) => Err(Error::InvalidParameter(format!(
            "solver {tag} integrates 2\u{d7}2 systems, but the problem is scalar"
        ))),
        (tag, Problem::System(_)) => Err(Error::InvalidParameter(format!(
            "solver {tag} integrates scalar equations, but the problem is a system"
        ))),
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "derivative order alpha must lie in (0,1), got {alpha}"
        )));
    }
    Ok(())
}

/// Caputo derivative of a catalog function, continuously extended by 0 at
/// the origin (every catalog derivative vanishes there for α ∈ (0,1)).
fn caputo_of(f: ReferenceFunction, alpha: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        caputo_reference(f, alpha, x)
            .expect("closed-form Caputo derivative is defined for x > 0 and validated alpha")
    }
}

/// D^α e^(ax) = a·x^(1−α)·E_{1,2−α}(a·x), extended by 0 at the origin.
fn caputo_exp_scaled(a: f64, alpha: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        a * x.powf(1.0 - alpha)
            * specfun::mittag_leffler(1.0, 2.0 - alpha, a * x)
                .expect("Mittag-Leffler evaluation within its domain")
    }
}

/// Benchmark problem: D^α y + y = Γ(3+α)·x² + 2x^(2+α) with y(0) = 0 and
/// exact solution y = 2x^(2+α) (which has y(0) = y′(0) = 0).
pub fn example1(alpha: f64) -> Result<CaputoProblem> {
    check_alpha(alpha)?;
    let c = specfun::gamma_real(3.0 + alpha)?;
    Ok(CaputoProblem {
        alpha,
        l: 1.0,
        f: Box::new(move |x: f64| c * x * x + 2.0 * x.powf(2.0 + alpha)),
        y0: 0.0,
        exact: Some(Box::new(move |x: f64| 2.0 * x.powf(2.0 + alpha))),
    })
}

/// Benchmark problem with non-zero initial data: D^α y + y = f with exact
/// solution y = sin x + cos x + x³·ln x, y(0) = 1 (so y′(0) = 1 ≠ 0).
pub fn example2(alpha: f64) -> Result<CaputoProblem> {
    check_alpha(alpha)?;
    let exact = |x: f64| x.sin() + x.cos() + ReferenceFunction::X3LnX.value(x);
    Ok(CaputoProblem {
        alpha,
        l: 1.0,
        f: Box::new(move |x: f64| {
            exact(x)
                + caputo_of(ReferenceFunction::Sin, alpha, x)
                + caputo_of(ReferenceFunction::Cos, alpha, x)
                + caputo_of(ReferenceFunction::X3LnX, alpha, x)
        }),
        y0: 1.0,
        exact: Some(Box::new(exact)),
    })
}

/// Benchmark 2×2 system with A,B,C,D = 1,2,3,4, y(0) = z(0) = 1, and exact
/// solution y = e^(2x), z = e^x.
pub fn example3(alpha: f64) -> Result<SystemProblem> {
    check_alpha(alpha)?;
    Ok(SystemProblem {
        alpha,
        a: 1.0,
        b: 2.0,
        c: 3.0,
        d: 4.0,
        f: Box::new(move |x: f64| {
            caputo_exp_scaled(2.0, alpha, x) + (2.0 * x).exp() + 2.0 * x.exp()
        }),
        g: Box::new(move |x: f64| {
            caputo_exp_scaled(1.0, alpha, x) + 3.0 * (2.0 * x).exp() + 4.0 * x.exp()
        }),
        y0: 1.0,
        z0: 1.0,
        exact_y: Some(Box::new(|x: f64| (2.0 * x).exp())),
        exact_z: Some(Box::new(|x: f64| x.exp())),
    })
}

/// Exact solutions available for synthesized (manufactured-forcing)
/// problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolutionId {
    /// y = 2x^(2+α), y(0) = 0.
    Power,
    /// y = sin x + cos x + x³·ln x, y(0) = 1.
    TrigLog,
    /// y = e^x, y(0) = 1.
    Exp,
    /// y = e^(2x), y(0) = 1.
    Exp2,
    /// y ≡ level (the smoke-test fixed point of zero-sum schemes).
    Constant,
}

impl SolutionId {
    pub const ALL: [SolutionId; 5] = [
        SolutionId::Power,
        SolutionId::TrigLog,
        SolutionId::Exp,
        SolutionId::Exp2,
        SolutionId::Constant,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            SolutionId::Power => "power",
            SolutionId::TrigLog => "trig_log",
            SolutionId::Exp => "exp",
            SolutionId::Exp2 => "exp2",
            SolutionId::Constant => "constant",
        }
    }

    pub fn parse(tag: &str) -> Result<Self> {
        let norm = tag.to_ascii_lowercase().replace('-', "_");
        SolutionId::ALL
            .into_iter()
            .find(|s| s.tag() == norm)
            .ok_or_else(|| {
                Error::Parse(format!(
                    "unknown solution '{tag}' (expected one of: {})",
                    SolutionId::ALL.map(|s| s.tag()).join(", ")
                ))
            })
    }

    /// Solution value y(x). `level` only matters for `Constant`.
    pub fn value(self, alpha: f64, level: f64, x: f64) -> f64 {
        match self {
            SolutionId::Power => 2.0 * x.powf(2.0 + alpha),
            SolutionId::TrigLog => x.sin() + x.cos() + ReferenceFunction::X3LnX.value(x),
            SolutionId::Exp => x.exp(),
            SolutionId::Exp2 => (2.0 * x).exp(),
            SolutionId::Constant => level,
        }
    }

    /// Closed-form Caputo derivative D^α y(x).
    pub fn caputo(self, alpha: f64, x: f64) -> f64 {
        match self {
            SolutionId::Power => {
                2.0 * caputo_of(ReferenceFunction::Power { p: 2.0 + alpha }, alpha, x)
            }
            SolutionId::TrigLog => {
                caputo_of(ReferenceFunction::Sin, alpha, x)
                    + caputo_of(ReferenceFunction::Cos, alpha, x)
                    + caputo_of(ReferenceFunction::X3LnX, alpha, x)
            }
            SolutionId::Exp => caputo_exp_scaled(1.0, alpha, x),
            SolutionId::Exp2 => caputo_exp_scaled(2.0, alpha, x),
            SolutionId::Constant => 0.0,
        }
    }

    /// Initial value y(0).
    pub fn at_zero(self, level: f64) -> f64 {
        match self {
            SolutionId::Power => 0.0,
            SolutionId::Constant => level,
            _ => 1.0,
        }
    }
}

/// Scalar problem with manufactured forcing f = D^α y_ex + L·y_ex, so the
/// chosen catalog solution is exact.
pub fn synthesize_scalar(alpha: f64, l: f64, sol: SolutionId, level: f64) -> Result<CaputoProblem> {
    check_alpha(alpha)?;
    Ok(CaputoProblem {
        alpha,
        l,
        f: Box::new(move |x: f64| sol.caputo(alpha, x) + l * sol.value(alpha, level, x)),
        y0: sol.at_zero(level),
        exact: Some(Box::new(move |x: f64| sol.value(alpha, level, x))),
    })
}

/// System with manufactured forcing so the chosen catalog solutions are
/// exact: f = D^α y_ex + A·y_ex + B·z_ex, g = D^α z_ex + C·y_ex + D·z_ex.
#[allow(clippy::too_many_arguments)]
pub fn synthesize_system(
    alpha: f64,
    coeffs: [f64; 4],
    sol_y: SolutionId,
    sol_z: SolutionId,
    level_y: f64,
    level_z: f64,
) -> Result<SystemProblem> {
    check_alpha(alpha)?;
    let [a, b, c, d] = coeffs;
    Ok(SystemProblem {
        alpha,
        a,
        b,
        c,
        d,
        f: Box::new(move |x: f64| {
            sol_y.caputo(alpha, x)
                + a * sol_y.value(alpha, level_y, x)
                + b * sol_z.value(alpha, level_z, x)
        }),
        g: Box::new(move |x: f64| {
            sol_z.caputo(alpha, x)
                + c * sol_y.value(alpha, level_y, x)
                + d * sol_z.value(alpha, level_z, x)
        }),
        y0: sol_y.at_zero(level_y),
        z0: sol_z.at_zero(level_z),
        exact_y: Some(Box::new(move |x: f64| sol_y.value(alpha, level_y, x))),
        exact_z: Some(Box::new(move |x: f64| sol_z.value(alpha, level_z, x))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const POLICY: TailPolicy = TailPolicy {
        p: 5.0,
        l1_variant: crate::weights::L1TailVariant::Derived,
    };

    fn printed_policy() -> TailPolicy {
        POLICY.with_variant(crate::weights::L1TailVariant::Printed)
    }

    #[test]
    fn forcing_terms_match_frozen_oracles() {
        let p1 = example1(0.5).unwrap();
        assert_relative_eq!((p1.f)(1.0), 5.323_350_970_447_842_6, max_relative = 1e-13);
        assert_eq!((p1.f)(0.0), 0.0);

        let p2 = example2(0.5).unwrap();
        assert_relative_eq!((p2.f)(1.0), 1.834_302_677_233_516_1, max_relative = 1e-12);
        assert_eq!((p2.f)(0.0), 1.0, "forcing is continuous at the origin");
        assert_eq!(p2.exact.as_ref().unwrap()(0.0), 1.0);

        let p3 = example3(0.5).unwrap();
        assert_relative_eq!((p3.f)(1.0), 22.799_858_844_108_367, max_relative = 1e-12);
        assert_relative_eq!((p3.g)(1.0), 35.330_993_862_931_37, max_relative = 1e-12);

        assert!(example1(1.0).is_err());
        assert!(example3(0.0).is_err());
    }

    #[test]
    fn first_step_matches_frozen_oracle() {
        let p = example1(0.5).unwrap();
        let u1 = first_step_scalar(&p, 0.0125).unwrap();
        assert_relative_eq!(u1, 4.996_264_575_170_567_8e-5, max_relative = 1e-13);
    }

    #[test]
    fn first_step_detects_singular_denominator() {
        let alpha = 0.5;
        let h: f64 = 0.01;
        let g = specfun::gamma_real(2.0 - alpha).unwrap();
        let p = CaputoProblem {
            alpha,
            l: -1.0 / (g * h.powf(alpha)),
            f: Box::new(|_| 1.0),
            y0: 0.0,
            exact: None,
        };
        match first_step_scalar(&p, h) {
            Err(Error::SingularStep { step: 1, .. }) => {}
            other => panic!("expected a singular first step, got {other:?}"),
        }
    }

    #[test]
    fn first_step_error_decays_like_h_to_2_plus_alpha() {
        // for y = 2x^(2+α) the first-step defect is ≈ |Γ(2−α)Γ(3+α) − 2|·h^(2+α)
        let alpha = 0.5;
        let p = example1(alpha).unwrap();
        let exact = p.exact.as_ref().unwrap();
        let mut pts = Vec::new();
        for j in 0..4 {
            let h = 0.0125 / f64::powi(2.0, j);
            let err = (first_step_scalar(&p, h).unwrap() - exact(h)).abs();
            pts.push((h.ln(), err.ln()));
        }
        let n = pts.len() as f64;
        let (sx, sy): (f64, f64) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
        let (sxx, sxy): (f64, f64) = pts
            .iter()
            .fold((0.0, 0.0), |a, p| (a.0 + p.0 * p.0, a.1 + p.0 * p.1));
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        assert!(
            (slope - (2.0 + alpha)).abs() < 0.3,
            "first-step decay rate: {slope}"
        );
    }

    #[test]
    fn grid_collocated_run_matches_published_row() {
        // scalar shifted solver + truncated binomial scheme on the
        // zero-IC benchmark: error 2.911e-5 and order 1.9742 at h = 1/160
        let p = example1(0.5).unwrap();
        let exact = p.exact.as_ref().unwrap();
        let coarse = solve_ns2(&p, SchemeKind::GlTrunc, 80, POLICY).unwrap();
        let fine = solve_ns2(&p, SchemeKind::GlTrunc, 160, POLICY).unwrap();
        let e80 = coarse.max_error_u(exact);
        let e160 = fine.max_error_u(exact);
        assert_relative_eq!(e160, 2.911e-5, max_relative = 0.015);
        let order = (e80 / e160).log2();
        assert!((order - 1.9742).abs() < 0.02, "order {order}");
    }

    #[test]
    fn nonzero_ic_runs_match_published_rows() {
        // three-point truncated scheme (circulated tail variant) on the
        // non-zero-IC benchmark, α = 0.9: error 1.15363e-3 at h = 1/160
        let p = example2(0.9).unwrap();
        let exact = p.exact.as_ref().unwrap();
        let coarse = solve_ns1(&p, SchemeKind::L1Trunc, 80, printed_policy()).unwrap();
        let fine = solve_ns1(&p, SchemeKind::L1Trunc, 160, printed_policy()).unwrap();
        let e160 = fine.max_error_u(exact);
        assert_relative_eq!(e160, 1.15363e-3, max_relative = 0.01);
        let order = (coarse.max_error_u(exact) / e160).log2();
        assert!((order - 1.0966).abs() < 0.02, "order {order}");

        // head-corrected variant recovers second order: 2.919e-5 at α = 0.5
        let p = example2(0.5).unwrap();
        let exact = p.exact.as_ref().unwrap();
        let fine = solve_ns1(&p, SchemeKind::L1ModTrunc, 160, printed_policy()).unwrap();
        assert_relative_eq!(fine.max_error_u(exact), 2.919e-5, max_relative = 0.03);

        // last-two-weights corrected binomial scheme: 3.3e-6 at α = 0.2
        let p = example2(0.2).unwrap();
        let exact = p.exact.as_ref().unwrap();
        let fine = solve_ns2(&p, SchemeKind::GlLast2, 160, POLICY).unwrap();
        assert_relative_eq!(fine.max_error_u(exact), 3.3e-6, max_relative = 0.03);
    }

    #[test]
    fn system_run_matches_published_row() {
        // system solver + truncated three-point scheme (circulated tail),
        // α = 0.5: first-component error 2.13254e-3 at h = 1/160
        let p = example3(0.5).unwrap();
        let exact = p.exact_y.as_ref().unwrap();
        let fine = solve_ns3(&p, SchemeKind::L1Trunc, 160, printed_policy()).unwrap();
        assert_relative_eq!(fine.max_error_u(exact), 2.13254e-3, max_relative = 0.01);
    }

    #[test]
    fn decoupled_system_reduces_to_scalar_runs() {
        // with B = C = 0 each component is an independent scalar problem
        let alpha = 0.4;
        let scalar = example1(alpha).unwrap();
        let forcing = move |x: f64| {
            let c = specfun::gamma_real(3.0 + alpha).unwrap();
            c * x * x + 2.0 * x.powf(2.0 + alpha)
        };
        let sys = SystemProblem {
            alpha,
            a: 1.0,
            b: 0.0,
            c: 0.0,
            d: 1.0,
            f: Box::new(forcing),
            g: Box::new(forcing),
            y0: 0.0,
            z0: 0.0,
            exact_y: None,
            exact_z: None,
        };
        for (sys_tag, kind) in [
            (SolverTag::Ns3, SchemeKind::L1),
            (SolverTag::Ns4, SchemeKind::Gl),
        ] {
            let traj_sys = match sys_tag {
                SolverTag::Ns3 => solve_ns3(&sys, kind, 40, POLICY).unwrap(),
                _ => solve_ns4(&sys, kind, 40, POLICY).unwrap(),
            };
            let traj_scalar = match sys_tag {
                SolverTag::Ns3 => solve_ns1(&scalar, kind, 40, POLICY).unwrap(),
                _ => solve_ns2(&scalar, kind, 40, POLICY).unwrap(),
            };
            for n in 0..=40 {
                assert!(
                    (traj_sys.u[n] - traj_scalar.u[n]).abs() <= 1e-13,
                    "{sys_tag} decoupling at n={n}"
                );
            }
            // identical components take bitwise-identical update paths
            let v = traj_sys.v.as_ref().unwrap();
            for n in 0..=40 {
                assert_eq!(traj_sys.u[n], v[n], "component symmetry at n={n}");
            }
        }
    }

    #[test]
    fn zero_sum_schemes_hold_constants_fixed() {
        let p = synthesize_scalar(0.5, 1.0, SolutionId::Constant, 3.0).unwrap();
        for (kind, solver) in [
            (SchemeKind::L1, SolverTag::Ns1),
            (SchemeKind::L1Mod, SolverTag::Ns1),
            (SchemeKind::GlLast2, SolverTag::Ns2),
        ] {
            let traj = match solver {
                SolverTag::Ns1 => solve_ns1(&p, kind, 100, POLICY).unwrap(),
                _ => solve_ns2(&p, kind, 100, POLICY).unwrap(),
            };
            let err = traj.max_error_u(|_| 3.0);
            assert!(err <= 1e-12, "{kind} constant fixed point drifted by {err}");
        }
    }

    #[test]
    fn synthesized_problems_are_solved_to_claimed_accuracy() {
        let p = synthesize_scalar(0.5, 2.0, SolutionId::Exp, 1.0).unwrap();
        assert_relative_eq!(
            (p.f)(1.0),
            2.290_698_252_303_238_2 + 2.0 * 1.0_f64.exp(),
            max_relative = 1e-12
        );
        let exact = p.exact.as_ref().unwrap();
        let traj = solve_ns1(&p, SchemeKind::L1Mod, 160, POLICY).unwrap();
        assert!(traj.max_error_u(exact) < 1e-4);

        let sys = synthesize_system(
            0.5,
            [1.0, 2.0, 3.0, 4.0],
            SolutionId::Exp2,
            SolutionId::Exp,
            1.0,
            1.0,
        )
        .unwrap();
        // same structure as the built-in system benchmark
        let builtin = example3(0.5).unwrap();
        assert_relative_eq!((sys.f)(1.0), (builtin.f)(1.0), max_relative = 1e-12);
        assert_relative_eq!((sys.g)(1.0), (builtin.g)(1.0), max_relative = 1e-12);
    }

    #[test]
    fn dispatch_rejects_mismatches() {
        let scalar = Problem::Scalar(example1(0.5).unwrap());
        let system = Problem::System(example3(0.5).unwrap());
        // shift mismatch names both sides
        let err = solve(SolverTag::Ns1, &scalar, SchemeKind::Gl, 10, POLICY).unwrap_err();
        match &err {
            Error::SchemeMismatch(msg) => {
                assert!(msg.contains("ns1") && msg.contains("gl"), "message: {msg}");
            }
            other => panic!("expected a scheme mismatch, got {other:?}"),
        }
        assert!(err.is_usage());
        assert!(solve(SolverTag::Ns2, &scalar, SchemeKind::L1, 10, POLICY).is_err());
        // shape mismatch
        assert!(solve(SolverTag::Ns3, &scalar, SchemeKind::L1, 10, POLICY).is_err());
        assert!(solve(SolverTag::Ns1, &system, SchemeKind::L1, 10, POLICY).is_err());
        // too few steps
        assert!(solve(SolverTag::Ns1, &scalar, SchemeKind::L1, 1, POLICY).is_err());
    }

    #[test]
    fn runs_are_deterministic() {
        let p = example3(0.3).unwrap();
        let a = solve_ns4(&p, SchemeKind::GlLast2Trunc, 80, POLICY).unwrap();
        let b = solve_ns4(&p, SchemeKind::GlLast2Trunc, 80, POLICY).unwrap();
        assert_eq!(a.u, b.u);
        assert_eq!(a.v, b.v);
    }

    #[test]
    fn trajectory_csv_layout() {
        let p = example1(0.5).unwrap();
        let traj = solve_ns2(&p, SchemeKind::Gl, 4, POLICY).unwrap();
        let plain = traj.to_csv(None);
        assert!(plain.starts_with("x,u\n"));
        assert_eq!(plain.lines().count(), 6);
        let exact = p.exact.as_ref().unwrap();
        let with_exact = traj.to_csv(Some(exact));
        assert!(with_exact.starts_with("x,u,exact,err\n"));
        // numeric fields round-trip at 17 significant digits
        let row = with_exact.lines().nth(5).unwrap();
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 4);
        assert_eq!(fields[1].parse::<f64>().unwrap(), traj.u[4]);

        let sys = example3(0.5).unwrap();
        let traj = solve_ns3(&sys, SchemeKind::L1, 4, POLICY).unwrap();
        let csv = traj.to_csv(Some(sys.exact_y.as_ref().unwrap()));
        assert!(csv.starts_with("x,u,v,exact,err\n"));
    }

    #[test]
    fn solver_tags_parse_round_trip() {
        for tag in SolverTag::ALL {
            assert_eq!(SolverTag::parse(tag.tag()).unwrap(), tag);
        }
        assert_eq!(SolverTag::parse("NS4").unwrap(), SolverTag::Ns4);
        assert!(SolverTag::parse("ns5").is_err());
    }
}
