//! Applying weight vectors to sampled functions, closed-form Caputo
//! derivatives of the reference catalog, an adaptive-quadrature oracle, and
//! convergence-order estimation.
//!
//! These pieces connect the coefficient vectors of [`crate::weights`] to
//! actual derivative values: sample a function on a uniform grid, contract
//! it with a scheme's coefficients, and compare against an independently
//! computed reference — either a closed form or singularity-removed
//! numerical quadrature.

use crate::error::{Error, Result};
use crate::specfun;
use crate::weights::WeightVector;

/// A function sampled on the uniform grid x_k = k·h, k = 0..=n.
#[derive(Debug, Clone)]
pub struct SampledFunction {
    /// Grid spacing.
    pub h: f64,
    /// Samples y(x_k), k = 0..=n.
    pub values: Vec<f64>,
    /// Free-form tag for diagnostics and output.
    pub label: String,
}

impl SampledFunction {
    /// Sample `f` at x_k = k·h for k = 0..=n.
    pub fn from_fn(f: impl Fn(f64) -> f64, h: f64, n: usize) -> Self {
        SampledFunction {
            h,
            values: (0..=n).map(|k| f(k as f64 * h)).collect(),
            label: String::from("sampled"),
        }
    }
}

/// Contract a weight vector with grid samples:
/// returns `(x_eval, value)` with value = h^(−α) Σ_k λ_k·y_{n−k} and
/// x_eval = (n − shift)·h, the point where the scheme approximates D^α y.
///
/// `n` must match the step the vector was built for, and the samples must
/// cover indices 0..=n.
pub fn apply_scheme(weights: &WeightVector, y: &SampledFunction, n: usize) -> Result<(f64, f64)> {
    if n != weights.n {
        return Err(Error::InvalidParameter(format!(
            "apply_scheme: step index {n} does not match the vector's index {}",
            weights.n
        )));
    }
    if y.values.len() < n + 1 {
        return Err(Error::InvalidParameter(format!(
            "apply_scheme: need {} samples to reach step {n}, got {}",
            n + 1,
            y.values.len()
        )));
    }
    let mut acc = 0.0;
    for (k, lam) in weights.coeffs.iter().enumerate() {
        acc += lam * y.values[n - k];
    }
    let x_eval = (n as f64 - weights.shift) * y.h;
    Ok((x_eval, acc * y.h.powf(-weights.alpha)))
}

/// Catalog of reference functions with known Caputo derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReferenceFunction {
    /// x^p, p > 0.
    Power { p: f64 },
    /// e^x.
    Exp,
    /// sin x.
    Sin,
    /// cos x.
    Cos,
    /// x³·ln x (continuously extended by 0 at the origin).
    X3LnX,
    /// x.
    Linear,
    /// 1.
    Const,
}

impl ReferenceFunction {
    /// The function value y(x).
    pub fn value(self, x: f64) -> f64 {
        match self {
            ReferenceFunction::Power { p } => x.powf(p),
            ReferenceFunction::Exp => x.exp(),
            ReferenceFunction::Sin => x.sin(),
            ReferenceFunction::Cos => x.cos(),
            ReferenceFunction::X3LnX => {
                if x == 0.0 {
                    0.0
                } else {
                    x.powi(3) * x.ln()
                }
            }
            ReferenceFunction::Linear => x,
            ReferenceFunction::Const => 1.0,
        }
    }

    /// The classical derivative y′(x).
    pub fn derivative(self, x: f64) -> f64 {
        match self {
            ReferenceFunction::Power { p } => p * x.powf(p - 1.0),
            ReferenceFunction::Exp => x.exp(),
            ReferenceFunction::Sin => x.cos(),
            ReferenceFunction::Cos => -x.sin(),
            ReferenceFunction::X3LnX => {
                if x == 0.0 {
                    0.0
                } else {
                    x * x * (3.0 * x.ln() + 1.0)
                }
            }
            ReferenceFunction::Linear => 1.0,
            ReferenceFunction::Const => 0.0,
        }
    }
}

/// Closed-form Caputo derivative D^α y(x) of a catalog function, x > 0:
///
/// * x^p → Γ(p+1)/Γ(p+1−α)·x^(p−α)
/// * e^x → x^(1−α)·E_{1,2−α}(x)
/// * sin x → x^(1−α)·E_{2,2−α}(−x²)
/// * cos x → −x^(2−α)·E_{2,3−α}(−x²)
/// * x³ln x → x^(3−α)/Γ(4−α)·(6·ln x + 11 − 6γ − 6ψ(4−α))
/// * x → x^(1−α)/Γ(2−α)
/// * 1 → 0
///
/// # Examples
///
/// ```
/// use fraccal::approx::{caputo_reference, ReferenceFunction};
/// let d = caputo_reference(ReferenceFunction::Exp, 0.5, 1.0).unwrap();
/// assert!((d - 2.2906982523032382).abs() < 1e-12);
/// ```
pub fn caputo_reference(f: ReferenceFunction, alpha: f64, x: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "caputo_reference: derivative order must lie in (0,1), got {alpha}"
        )));
    }
    if !(x > 0.0) {
        return Err(Error::Domain(format!(
            "caputo_reference: evaluation point must be positive, got {x}"
        )));
    }
    match f {
        ReferenceFunction::Power { p } => {
            if !(p > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "caputo_reference: power exponent must be positive, got {p}"
                )));
            }
            let ratio = specfun::gamma_real(p + 1.0)? / specfun::gamma_real(p + 1.0 - alpha)?;
            Ok(ratio * x.powf(p - alpha))
        }
        ReferenceFunction::Exp => {
            Ok(x.powf(1.0 - alpha) * specfun::mittag_leffler(1.0, 2.0 - alpha, x)?)
        }
        ReferenceFunction::Sin => {
            Ok(x.powf(1.0 - alpha) * specfun::mittag_leffler(2.0, 2.0 - alpha, -x * x)?)
        }
        ReferenceFunction::Cos => {
            Ok(-x.powf(2.0 - alpha) * specfun::mittag_leffler(2.0, 3.0 - alpha, -x * x)?)
        }
        ReferenceFunction::X3LnX => {
            let g = specfun::gamma_real(4.0 - alpha)?;
            let psi = specfun::digamma(4.0 - alpha)?;
            Ok(x.powf(3.0 - alpha) / g
                * (6.0 * x.ln() + 11.0 - 6.0 * specfun::EULER_GAMMA - 6.0 * psi))
        }
        ReferenceFunction::Linear => Ok(x.powf(1.0 - alpha) / specfun::gamma_real(2.0 - alpha)?),
        ReferenceFunction::Const => Ok(0.0),
    }
}

/// Caputo derivative by singularity-removed adaptive quadrature.
///
/// The substitution u = (x−t)^(1−α) turns
/// D^α y(x) = 1/Γ(1−α)·∫₀ˣ y′(t)·(x−t)^(−α) dt into the regular integral
/// 1/((1−α)Γ(1−α))·∫₀^(x^(1−α)) y′(x − u^(1/(1−α))) du, which adaptive
/// Simpson integration handles to the requested tolerance. `tol` must be
/// at least 1e-10; failure to converge reports the accuracy reached.
pub fn caputo_quadrature_oracle(
    yprime: impl Fn(f64) -> f64,
    alpha: f64,
    x: f64,
    tol: f64,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "caputo_quadrature_oracle: derivative order must lie in (0,1), got {alpha}"
        )));
    }
    if !(x > 0.0) {
        return Err(Error::Domain(format!(
            "caputo_quadrature_oracle: evaluation point must be positive, got {x}"
        )));
    }
    if !(tol >= 1e-10) {
        return Err(Error::InvalidParameter(format!(
            "caputo_quadrature_oracle: tolerance must be ≥ 1e-10, got {tol}"
        )));
    }
    let expo = 1.0 / (1.0 - alpha);
    let g = |u: f64| yprime(x - u.powf(expo));
    let upper = x.powf(1.0 - alpha);
    let integral = adaptive_simpson(&g, 0.0, upper, tol)?;
    Ok(integral / ((1.0 - alpha) * specfun::gamma_unchecked(1.0 - alpha)))
}

/// Adaptive Simpson quadrature of `g` over [a,b] to absolute tolerance
/// `tol`, with Richardson acceptance (error estimate |S₂−S₁|/15).
fn adaptive_simpson(g: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    const MAX_DEPTH: u32 = 48;
    fn simpson(g: &impl Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = g(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        g: &impl Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
        worst: &mut f64,
    ) -> f64 {
        let (lm, flm, left) = simpson(g, a, fa, m, fm);
        let (rm, frm, right) = simpson(g, m, fm, b, fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol || depth == 0 {
            if depth == 0 {
                *worst = worst.max(delta.abs() / 15.0);
            }
            return left + right + delta / 15.0;
        }
        recurse(g, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1, worst)
            + recurse(g, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1, worst)
    }
    if a == b {
        return Ok(0.0);
    }
    let fa = g(a);
    let fb = g(b);
    let (m, fm, whole) = simpson(g, a, fa, b, fb);
    let mut worst = 0.0;
    let value = recurse(g, a, fa, b, fb, m, fm, whole, tol, MAX_DEPTH, &mut worst);
    if worst > tol {
        return Err(Error::Accuracy {
            detail: "adaptive quadrature hit its subdivision limit".into(),
            achieved: worst,
        });
    }
    Ok(value)
}

/// Left-rectangle Riemann–Liouville fractional integral of order α at
/// step n ≥ 2: h^α·Σ_{k=1}^{n−1} y_{n−k}/(Γ(α)·k^(1−α)).
///
/// Requires y(0) = 0. The quadrature error has the expansion
/// I^α y + ζ(1−α)/Γ(α)·y_n·h^α + O(h^(1+α)), so subtracting the h^α
/// correction term exposes the 1+α rate.
pub fn frac_integral_riemann(y: &SampledFunction, alpha: f64, n: usize) -> f64 {
    assert!(n >= 2, "frac_integral_riemann: need n ≥ 2");
    assert!(
        y.values[0] == 0.0,
        "frac_integral_riemann: requires y(0) = 0"
    );
    assert!(
        y.values.len() > n - 1,
        "frac_integral_riemann: too few samples"
    );
    let g = specfun::gamma_unchecked(alpha);
    let mut acc = 0.0;
    for k in 1..n {
        acc += y.values[n - k] / (g * (k as f64).powf(1.0 - alpha));
    }
    acc * y.h.powf(alpha)
}

/// Observed convergence orders log₂(E_i/E_{i+1}) from (h, error) pairs
/// with strictly halving step sizes.
///
/// Rejects fewer than two pairs, non-halving grids (relative deviation
/// above 1e-9), and non-positive errors.
pub fn estimate_order(runs: &[(f64, f64)]) -> Result<Vec<f64>> {
    if runs.len() < 2 {
        return Err(Error::InvalidParameter(
            "estimate_order: need at least two (h, error) pairs".into(),
        ));
    }
    for (i, &(h, e)) in runs.iter().enumerate() {
        if !(h > 0.0) || !(e > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "estimate_order: entry {i} must have positive h and error, got ({h}, {e})"
            )));
        }
        if i > 0 {
            let prev = runs[i - 1].0;
            if ((prev / h) - 2.0).abs() > 1e-9 * 2.0 {
                return Err(Error::InvalidParameter(format!(
                    "estimate_order: step sizes must halve, got {prev} then {h}"
                )));
            }
        }
    }
    Ok(runs.windows(2).map(|w| (w[0].1 / w[1].1).log2()).collect())
}
