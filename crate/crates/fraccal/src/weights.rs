//! Weight vectors for finite-difference approximations of the Caputo
//! derivative D^α y, 0 < α < 1, on a uniform grid x_k = k·h.
//!
//! Every scheme here is an explicit coefficient vector λ₀..λ_n applied as
//! h^(−α) Σ_k λ_k y(x_{n−k}). Two construction families exist:
//!
//! * **Binomial (GL) family** — weights w_k^(α) = (−1)^k (α choose k),
//!   accurate to second order *at the shifted point x_n − αh/2* provided
//!   y(0) = y′(0) = 0. Variants: asymptotic tail truncation (`GlTrunc`),
//!   two- and three-term zeta-head replacements (`Shift2ma`, `Shift2`), and
//!   a last-two-weight correction (`GlLast2`) that removes the zero initial
//!   condition requirement.
//! * **L1 family** — weights from piecewise-linear interpolation,
//!   order 2−α (`L1`), upgraded to second order by a three-point head
//!   correction with ζ(α−1) (`L1Mod`); both with truncated tails
//!   (`L1Trunc`, `L1ModTrunc`).
//!
//! Truncated variants keep exact weights for indices up to ⌈N/p⌉ and switch
//! to closed-form asymptotic expansions above, trading O(N) special-function
//! work for three-term formulas without losing the scheme's order.

use crate::error::{Error, Result};
use crate::specfun;

/// Gamma for arguments guaranteed off the poles by construction
/// (all call sites keep arguments in pole-free ranges for α ∈ (0,1)).
fn gam(x: f64) -> f64 {
    specfun::gamma_unchecked(x)
}

/// The ten supported approximation schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    /// Plain binomial weights; order 2 at the shifted point, zero ICs required.
    Gl,
    /// Binomial weights with asymptotic two-term tail above ⌈N/p⌉.
    GlTrunc,
    /// Piecewise-linear (three-point) weights; order 2−α, no shift.
    L1,
    /// L1 with ζ(α−1) head correction; order 2, no shift.
    L1Mod,
    /// L1 with asymptotic tail above ⌈N/p⌉; order 2−α.
    L1Trunc,
    /// Head-corrected L1 with asymptotic tail; order 2.
    L1ModTrunc,
    /// Two zeta-head weights + asymptotic tail; order 2−α at the shifted point.
    Shift2ma,
    /// Three zeta-head weights + asymptotic tail; order 2 at the shifted point.
    Shift2,
    /// Binomial weights with the last two entries corrected; order 2 at the
    /// shifted point for arbitrary initial data.
    GlLast2,
    /// `GlLast2` with asymptotic tail and asymptotic last-pair far from the
    /// origin; order 2 at the shifted point.
    GlLast2Trunc,
}

impl SchemeKind {
    /// All kinds, in declaration order.
    pub const ALL: [SchemeKind; 10] = [
        SchemeKind::Gl,
        SchemeKind::GlTrunc,
        SchemeKind::L1,
        SchemeKind::L1Mod,
        SchemeKind::L1Trunc,
        SchemeKind::L1ModTrunc,
        SchemeKind::Shift2ma,
        SchemeKind::Shift2,
        SchemeKind::GlLast2,
        SchemeKind::GlLast2Trunc,
    ];

    /// Canonical command-line tag.
    pub fn tag(self) -> &'static str {
        match self {
            SchemeKind::Gl => "gl",
            SchemeKind::GlTrunc => "gl_trunc",
            SchemeKind::L1 => "l1",
            SchemeKind::L1Mod => "l1_mod",
            SchemeKind::L1Trunc => "l1_trunc",
            SchemeKind::L1ModTrunc => "l1_mod_trunc",
            SchemeKind::Shift2ma => "shift_2ma",
            SchemeKind::Shift2 => "shift_2",
            SchemeKind::GlLast2 => "gl_last2",
            SchemeKind::GlLast2Trunc => "gl_last2_trunc",
        }
    }

    /// Parse a tag (case-insensitive; `-` accepted for `_`).
    pub fn parse(tag: &str) -> Result<Self> {
        let norm = tag.to_ascii_lowercase().replace('-', "_");
        SchemeKind::ALL
            .into_iter()
            .find(|k| k.tag() == norm)
            .ok_or_else(|| {
                Error::Parse(format!(
                    "unknown scheme '{tag}' (expected one of: {})",
                    SchemeKind::ALL.map(|k| k.tag()).join(", ")
                ))
            })
    }

    /// True for schemes that approximate D^α y at the shifted point
    /// x_n − αh/2 rather than at x_n.
    pub fn is_shifted(self) -> bool {
        !matches!(
            self,
            SchemeKind::L1 | SchemeKind::L1Mod | SchemeKind::L1Trunc | SchemeKind::L1ModTrunc
        )
    }

    /// Grid-units shift of the evaluation point: α/2 for the binomial
    /// family, 0 for the L1 family.
    pub fn shift_units(self, alpha: f64) -> f64 {
        if self.is_shifted() {
            alpha / 2.0
        } else {
            0.0
        }
    }

    /// The scheme's claimed accuracy exponent β in O(h^β).
    pub fn claimed_order(self, alpha: f64) -> f64 {
        match self {
            SchemeKind::L1 | SchemeKind::L1Trunc | SchemeKind::Shift2ma => 2.0 - alpha,
            _ => 2.0,
        }
    }

    /// True for schemes whose accuracy claim needs y(0) = y′(0) = 0.
    pub fn requires_zero_ic(self) -> bool {
        matches!(
            self,
            SchemeKind::Gl | SchemeKind::GlTrunc | SchemeKind::Shift2ma | SchemeKind::Shift2
        )
    }

    /// True for schemes that annihilate constants (Σ coeffs = 0).
    pub fn is_zero_sum(self) -> bool {
        matches!(
            self,
            SchemeKind::L1 | SchemeKind::L1Mod | SchemeKind::GlLast2
        )
    }

    /// Smallest step index the public constructor accepts: the corrected
    /// schemes need room for their head corrections.
    pub fn min_step(self) -> usize {
        match self {
            SchemeKind::L1Mod | SchemeKind::L1ModTrunc => 3,
            SchemeKind::GlLast2 | SchemeKind::GlLast2Trunc => 2,
            _ => 1,
        }
    }

    /// Smallest step index the internal per-step table supports (the time
    /// steppers start their generic recursion at n = 2, where the
    /// L1Mod-family head correction stacks onto the closing weight).
    fn min_step_internal(self) -> usize {
        match self {
            SchemeKind::L1Mod
            | SchemeKind::L1ModTrunc
            | SchemeKind::GlLast2
            | SchemeKind::GlLast2Trunc => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// Third-term coefficient used in the truncated-L1 tail expansion.
///
/// The series derivation yields 1/12; a circulated variant uses α/12
/// instead. The derived value is the default; the variant is kept because
/// several published convergence tables can only be reproduced with it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum L1TailVariant {
    /// 1/(12·Γ(−2−α)·k^(3+α)) — the series-derived coefficient.
    #[default]
    Derived,
    /// α/(12·Γ(−2−α)·k^(3+α)) — the circulated variant.
    Printed,
}

/// Truncation policy: exact weights up to index ⌈N/p⌉, asymptotic above.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailPolicy {
    /// Divisor p > 0 defining the exact/asymptotic boundary (default 5).
    pub p: f64,
    /// Which truncated-L1 tail coefficient to use (default `Derived`).
    pub l1_variant: L1TailVariant,
}

impl Default for TailPolicy {
    fn default() -> Self {
        TailPolicy {
            p: 5.0,
            l1_variant: L1TailVariant::Derived,
        }
    }
}

impl TailPolicy {
    /// Policy with divisor `p` and the derived tail coefficient.
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "tail policy: divisor p must be a positive real, got {p}"
            )));
        }
        Ok(TailPolicy {
            p,
            ..TailPolicy::default()
        })
    }

    /// Same policy with the given truncated-L1 tail variant.
    pub fn with_variant(self, v: L1TailVariant) -> Self {
        TailPolicy {
            l1_variant: v,
            ..self
        }
    }

    /// Exact/asymptotic boundary index ⌈N/p⌉ for a run of N steps.
    pub fn threshold(&self, n_total: usize) -> usize {
        ((n_total as f64) / self.p).ceil() as usize
    }
}

/// One scheme instantiated at step index `n`: coefficients λ₀..λ_n plus the
/// metadata downstream solvers need (shift, claimed order, IC requirement).
#[derive(Debug, Clone)]
pub struct WeightVector {
    /// Scheme this vector realizes.
    pub kind: SchemeKind,
    /// Derivative order α ∈ (0,1).
    pub alpha: f64,
    /// Step index; `coeffs` has n+1 entries.
    pub n: usize,
    /// Coefficients λ₀..λ_n. Binomial-family entries beyond the scheme's
    /// defined range are explicit zeros.
    pub coeffs: Vec<f64>,
    /// Evaluation-point shift in grid units (0 or α/2).
    pub shift: f64,
    /// Claimed accuracy exponent β in O(h^β).
    pub order: f64,
    /// Whether the accuracy claim requires y(0) = y′(0) = 0.
    pub requires_zero_ic: bool,
}

impl WeightVector {
    /// Sum of all coefficients (0 for the zero-sum schemes).
    pub fn sum(&self) -> f64 {
        self.coeffs.iter().sum()
    }

    /// CSV rendering, columns `k,coeff`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,coeff\n");
        for (k, c) in self.coeffs.iter().enumerate() {
            out.push_str(&format!("{k},{c:.16e}\n"));
        }
        out
    }
}

/// Generalized binomial weights w_k^(a) = (−1)^k (a choose k) for k = 0..n,
/// by the stable recurrence w_k = w_{k−1}·(k−1−a)/k (no gamma quotients, so
/// no overflow at large k).
pub fn binomial_weights(a: f64, n: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(n + 1);
    w.push(1.0);
    for k in 1..=n {
        let kf = k as f64;
        let prev = w[k - 1];
        w.push(prev * (kf - 1.0 - a) / kf);
    }
    w
}

/// Grünwald-Letnikov weights w_k^(α) for k = 0..n, α ∈ (0,1):
/// w₀ = 1, w_k = w_{k−1}·(k−1−α)/k.
///
/// # Examples
///
/// ```
/// let w = fraccal::weights::gl_weights(0.5, 3);
/// assert_eq!(w, vec![1.0, -0.5, -0.125, -0.0625]);
/// ```
pub fn gl_weights(alpha: f64, n: usize) -> Vec<f64> {
    binomial_weights(alpha, n)
}

/// Families of closed-form asymptotic tail expansions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailFamily {
    /// Two-term binomial-weight tail (error O(k^(−3−α))).
    Gl2,
    /// M+1-term binomial-weight tail via generalized Bernoulli diagonals.
    Glm,
    /// Two-term L1-weight tail with the derived 1/12 third coefficient
    /// (error O(k^(−5−α))).
    L1Tail,
}

/// Asymptotic tail value of the weight with index `k` ≥ 1.
///
/// * `Gl2`: 1/(Γ(−α)k^(1+α)) − α/(2Γ(−1−α)k^(2+α)); `m` is ignored.
/// * `Glm`: Σ_{j=0..m} B_j^(−α)(−α)/(j!·Γ(−j−α)·k^(j+α+1)), m ≤ 3.
/// * `L1Tail`: 1/(Γ(−α)k^(1+α)) + 1/(12Γ(−2−α)k^(3+α)); `m` is ignored.
///
/// # Examples
///
/// ```
/// use fraccal::weights::{tail_expansion, TailFamily};
/// // the M = 1 truncation is exactly the two-term form
/// let a = tail_expansion(TailFamily::Glm, 0.4, 25, 1).unwrap();
/// let b = tail_expansion(TailFamily::Gl2, 0.4, 25, 0).unwrap();
/// assert!((a - b).abs() < 1e-18);
/// ```
pub fn tail_expansion(family: TailFamily, alpha: f64, k: usize, m: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidParameter(
            "tail_expansion: index k must be ≥ 1".into(),
        ));
    }
    let kf = k as f64;
    match family {
        TailFamily::Gl2 => Ok(gl2_tail(alpha, kf)),
        TailFamily::Glm => {
            if m > 3 {
                return Err(Error::InvalidParameter(format!(
                    "tail_expansion: GLM supports M ≤ 3, got {m}"
                )));
            }
            let mut sum = 0.0;
            let mut fact = 1.0;
            for j in 0..=m {
                if j > 0 {
                    fact *= j as f64;
                }
                let b = specfun::gen_bernoulli_diag(j, alpha)?;
                sum += b / (fact * gam(-(j as f64) - alpha) * kf.powf(j as f64 + alpha + 1.0));
            }
            Ok(sum)
        }
        TailFamily::L1Tail => Ok(l1_tail(alpha, kf, L1TailVariant::Derived)),
    }
}

fn gl2_tail(alpha: f64, k: f64) -> f64 {
    1.0 / (gam(-alpha) * k.powf(1.0 + alpha))
        - alpha / (2.0 * gam(-1.0 - alpha) * k.powf(2.0 + alpha))
}

fn l1_tail(alpha: f64, k: f64, variant: L1TailVariant) -> f64 {
    let c = match variant {
        L1TailVariant::Derived => 1.0 / 12.0,
        L1TailVariant::Printed => alpha / 12.0,
    };
    1.0 / (gam(-alpha) * k.powf(1.0 + alpha)) + c / (gam(-2.0 - alpha) * k.powf(3.0 + alpha))
}

/// L1 weights σ₀..σ_n (n ≥ 1): σ₀ = 1/Γ(2−α), interior
/// σ_k = ((k−1)^(1−α) − 2k^(1−α) + (k+1)^(1−α))/Γ(2−α), and the closing
/// weight σ_n = ((n−1)^(1−α) − n^(1−α))/Γ(2−α). The vector sums to zero.
///
/// # Examples
///
/// ```
/// let s = fraccal::weights::l1_weights(0.3, 10);
/// let total: f64 = s.iter().sum();
/// assert!(total.abs() < 1e-13);
/// ```
pub fn l1_weights(alpha: f64, n: usize) -> Vec<f64> {
    assert!(n >= 1, "l1_weights: need n ≥ 1");
    let g = gam(2.0 - alpha);
    let e = 1.0 - alpha;
    let mut s = Vec::with_capacity(n + 1);
    s.push(1.0 / g);
    for k in 1..n {
        s.push(l1_interior(e, g, k as f64));
    }
    s.push(l1_closing(alpha, n as f64));
    s
}

fn l1_interior(e: f64, g: f64, k: f64) -> f64 {
    ((k - 1.0).powf(e) - 2.0 * k.powf(e) + (k + 1.0).powf(e)) / g
}

fn l1_closing(alpha: f64, n: f64) -> f64 {
    ((n - 1.0).powf(1.0 - alpha) - n.powf(1.0 - alpha)) / gam(2.0 - alpha)
}

/// Three-term asymptotic expansion of the closing L1 weight σ_n,
/// used by the truncated variants once n passes the policy threshold.
fn l1_closing_expansion(alpha: f64, n: f64) -> f64 {
    -1.0 / (gam(1.0 - alpha) * n.powf(alpha)) + 1.0 / (2.0 * gam(-alpha) * n.powf(1.0 + alpha))
        - 1.0 / (6.0 * gam(-1.0 - alpha) * n.powf(2.0 + alpha))
}

/// Head-corrected L1 weights δ₀..δ_n (n ≥ 3): δ_k = σ_k for k ≥ 3 and
/// δ₀ = σ₀ − c, δ₁ = σ₁ + 2c, δ₂ = σ₂ − c with c = ζ(α−1)/Γ(2−α).
/// The corrections cancel, so the vector still sums to zero.
pub fn l1_mod_weights(alpha: f64, n: usize) -> Result<Vec<f64>> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "l1_mod_weights: head correction spans indices 0..2, need n ≥ 3, got {n}"
        )));
    }
    let mut s = l1_weights(alpha, n);
    let c = head_correction(alpha)?;
    s[0] -= c;
    s[1] += 2.0 * c;
    s[2] -= c;
    Ok(s)
}

/// ζ(α−1)/Γ(2−α), the L1 head-correction constant.
fn head_correction(alpha: f64) -> Result<f64> {
    Ok(specfun::zeta_real(alpha - 1.0)? / gam(2.0 - alpha))
}

/// Shifted-scheme head kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftedHeadKind {
    /// Two-weight head (w̃₀, w̃₁); scheme order 2−α.
    WTilde,
    /// Three-weight head (ŵ₀, ŵ₁, ŵ₂); scheme order 2.
    WHat,
}

/// Closed-form head weights of the shifted asymptotic schemes; the
/// remaining weights are `TailFamily::Gl2` values.
///
/// `WTilde` returns (w̃₀, w̃₁) built from ζ(α), ζ(α+1), ζ(α+2);
/// `WHat` returns (ŵ₀, ŵ₁, ŵ₂) built from ζ(α−1)..ζ(α+2).
pub fn shifted_head_weights(kind: ShiftedHeadKind, alpha: f64) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    let a = alpha;
    let g = gam(-a);
    match kind {
        ShiftedHeadKind::WTilde => {
            let z0 = specfun::zeta_real(a)?;
            let z1 = specfun::zeta_real(a + 1.0)?;
            let z2 = specfun::zeta_real(a + 2.0)?;
            let w0 = (z0 + 0.5 * (a - 1.0) * (a + 2.0) * z1 - 0.5 * a * (a + 1.0) * z2) / g;
            let w1 = (0.5 * (a * a + a + 2.0) - z0 - 0.5 * a * (a + 1.0) * z1) / g;
            Ok(vec![w0, w1])
        }
        ShiftedHeadKind::WHat => {
            let zm = specfun::zeta_real(a - 1.0)?;
            let z0 = specfun::zeta_real(a)?;
            let z1 = specfun::zeta_real(a + 1.0)?;
            let z2 = specfun::zeta_real(a + 2.0)?;
            let w0 = -(2.0 * zm + (a + 3.0) * (a - 2.0) * z0 - (3.0 * a * a + 3.0 * a - 4.0) * z1
                + 2.0 * a * (a + 1.0) * z2)
                / (4.0 * g);
            let w1 = (2.0 + a + a * a + 2.0 * zm + (a + a * a - 4.0) * z0
                - 2.0 * a * (a + 1.0) * z1)
                / (2.0 * g);
            let w2 =
                ((4.0 + a + a * a) / 2.0_f64.powf(1.0 + a) - 2.0 * zm - (a * a + a - 2.0) * z0
                    + a * (1.0 + a) * z1)
                    / (4.0 * g);
            Ok(vec![w0, w1, w2])
        }
    }
}

/// Exact last-pair correction (γ_{n−1}, γ_n) of the last-two-weights scheme,
/// n ≥ 2: with w = w_{n−2}^(α−2) (stable recurrence, never gamma quotients)
/// and s = (n−α/2)^(1−α)/Γ(2−α),
/// γ_{n−1} = ((n−2α)/(1+α−n))·w + s and γ_n = w − s.
pub fn gamma_last_two(alpha: f64, n: usize) -> (f64, f64) {
    assert!(n >= 2, "gamma_last_two: need n ≥ 2");
    let w = binomial_weights(alpha - 2.0, n - 2)[n - 2];
    gamma_pair_from(alpha, n as f64, w)
}

fn gamma_pair_from(alpha: f64, n: f64, w_nm2: f64) -> (f64, f64) {
    let s = (n - alpha / 2.0).powf(1.0 - alpha) / gam(2.0 - alpha);
    let g_nm1 = (n - 2.0 * alpha) / (1.0 + alpha - n) * w_nm2 + s;
    let g_n = w_nm2 - s;
    (g_nm1, g_n)
}

/// Asymptotic last-pair values (γ̄_{n−1}, γ̄_n), accurate to O(n^(−2−α)):
/// γ̄_{n−1} = (26−α)/(24Γ(−α)n^(1+α)),
/// γ̄_n = −1/(Γ(1−α)n^α) + (13α+10)/(24Γ(−α)n^(1+α)).
pub fn gamma_last_two_asym(alpha: f64, n: usize) -> (f64, f64) {
    assert!(n >= 2, "gamma_last_two_asym: need n ≥ 2");
    let nf = n as f64;
    let g_nm1 = (26.0 - alpha) / (24.0 * gam(-alpha) * nf.powf(1.0 + alpha));
    let g_n = -1.0 / (gam(1.0 - alpha) * nf.powf(alpha))
        + (13.0 * alpha + 10.0) / (24.0 * gam(-alpha) * nf.powf(1.0 + alpha));
    (g_nm1, g_n)
}

/// Partial sums of the binomial weights, computed directly:
/// W_N⁰ = Σ_{k<N} w_k and W_N¹ = N·W_N⁰ − Σ_{k<N} k·w_k − (N−α/2)^(1−α)/Γ(2−α).
///
/// W_N¹ is the residual the last-two-weights correction cancels; it decays
/// like N^(−1−α) with limit constant (α−2)/(24Γ(−α)) for W_N¹·N^(1+α).
pub fn gl_partial_sums(alpha: f64, n_total: usize) -> (f64, f64) {
    assert!(n_total >= 2, "gl_partial_sums: need N ≥ 2");
    let w = binomial_weights(alpha, n_total - 1);
    let mut w0 = 0.0;
    let mut kw = 0.0;
    for (k, wk) in w.iter().enumerate() {
        w0 += wk;
        kw += k as f64 * wk;
    }
    let nf = n_total as f64;
    let s = (nf - alpha / 2.0).powf(1.0 - alpha) / gam(2.0 - alpha);
    (w0, nf * w0 - kw - s)
}

/// The same partial sums through their closed forms:
/// W_N⁰ = w_{N−1}^(α−1) and W_N¹ = w_{N−1}^(α−2) − (N−α/2)^(1−α)/Γ(2−α).
pub fn gl_partial_sums_closed(alpha: f64, n_total: usize) -> (f64, f64) {
    assert!(n_total >= 2, "gl_partial_sums_closed: need N ≥ 2");
    let w0 = binomial_weights(alpha - 1.0, n_total - 1)[n_total - 1];
    let wm2 = binomial_weights(alpha - 2.0, n_total - 1)[n_total - 1];
    let nf = n_total as f64;
    let s = (nf - alpha / 2.0).powf(1.0 - alpha) / gam(2.0 - alpha);
    (w0, wm2 - s)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "derivative order alpha must lie in (0,1), got {alpha}"
        )));
    }
    Ok(())
}

/// Per-run scheme factory: precomputes everything shared across step
/// indices of one (kind, α, N, policy) combination and hands out the λ
/// vector for each step in O(n) time. The time steppers drive this directly;
/// [`build_scheme`] wraps a single step in a [`WeightVector`].
#[derive(Debug, Clone)]
pub struct SchemeTable {
    kind: SchemeKind,
    alpha: f64,
    n_total: usize,
    threshold: usize,
    policy: TailPolicy,
    /// λ_k before the per-step tail patch, k = 0..N.
    base: Vec<f64>,
    /// w_k^(α−2) for the last-pair corrections (binomial family only).
    wm2: Vec<f64>,
    /// ζ(α−1)/Γ(2−α) for the L1Mod-family head (0 otherwise).
    head_c: f64,
}

impl SchemeTable {
    /// Build the shared state for steps 1..=N of one scheme.
    pub fn new(kind: SchemeKind, alpha: f64, n_total: usize, policy: TailPolicy) -> Result<Self> {
        check_alpha(alpha)?;
        if !(policy.p > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tail policy divisor must be positive, got {}",
                policy.p
            )));
        }
        let min_total = kind.min_step_internal().max(1);
        if n_total < min_total {
            return Err(Error::InvalidParameter(format!(
                "scheme {kind}: total steps N = {n_total} below the minimum {min_total}"
            )));
        }
        let thr = policy.threshold(n_total);
        let n = n_total;
        let mut base = match kind {
            SchemeKind::Gl | SchemeKind::GlLast2 => binomial_weights(alpha, n),
            SchemeKind::GlTrunc | SchemeKind::GlLast2Trunc => {
                let mut b = binomial_weights(alpha, n);
                for (k, bk) in b.iter_mut().enumerate().skip(thr + 1) {
                    *bk = gl2_tail(alpha, k as f64);
                }
                b
            }
            SchemeKind::Shift2ma => {
                let head = shifted_head_weights(ShiftedHeadKind::WTilde, alpha)?;
                let mut b = vec![0.0; n + 1];
                b[0] = head[0];
                if n >= 1 {
                    b[1] = head[1];
                }
                for (k, bk) in b.iter_mut().enumerate().skip(2) {
                    *bk = gl2_tail(alpha, k as f64);
                }
                b
            }
            SchemeKind::Shift2 => {
                let head = shifted_head_weights(ShiftedHeadKind::WHat, alpha)?;
                let mut b = vec![0.0; n + 1];
                for (k, h) in head.iter().enumerate() {
                    if k <= n {
                        b[k] = *h;
                    }
                }
                for (k, bk) in b.iter_mut().enumerate().skip(3) {
                    *bk = gl2_tail(alpha, k as f64);
                }
                b
            }
            SchemeKind::L1 | SchemeKind::L1Mod => l1_interior_vec(alpha, n),
            SchemeKind::L1Trunc | SchemeKind::L1ModTrunc => {
                let mut b = l1_interior_vec(alpha, n);
                for (k, bk) in b.iter_mut().enumerate().skip(thr + 1) {
                    *bk = l1_tail(alpha, k as f64, policy.l1_variant);
                }
                b
            }
        };
        let head_c = match kind {
            SchemeKind::L1Mod | SchemeKind::L1ModTrunc => {
                let c = head_correction(alpha)?;
                base[0] -= c;
                base[1] += 2.0 * c;
                base[2] -= c;
                c
            }
            _ => 0.0,
        };
        let wm2 = match kind {
            SchemeKind::GlLast2 | SchemeKind::GlLast2Trunc => binomial_weights(alpha - 2.0, n),
            _ => Vec::new(),
        };
        Ok(SchemeTable {
            kind,
            alpha,
            n_total,
            threshold: thr,
            policy,
            base,
            wm2,
            head_c,
        })
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn n_total(&self) -> usize {
        self.n_total
    }

    /// Exact/asymptotic boundary index of this run.
    pub fn threshold(&self) -> usize {
        self.threshold
    }

    pub fn policy(&self) -> TailPolicy {
        self.policy
    }

    /// Coefficients λ₀..λ_n for step `n` (1 ≤ n ≤ N; the head-corrected
    /// schemes need n ≥ 2).
    pub fn row(&self, n: usize) -> Result<Vec<f64>> {
        if n < self.kind.min_step_internal() || n > self.n_total {
            return Err(Error::InvalidParameter(format!(
                "scheme {}: step index {n} outside supported range {}..={}",
                self.kind,
                self.kind.min_step_internal(),
                self.n_total
            )));
        }
        let alpha = self.alpha;
        let mut v = self.base[..=n].to_vec();
        match self.kind {
            // The binomial family is defined up to index n−1; the closing
            // entry multiplies y₀ and is an explicit zero (these schemes
            // require zero initial data anyway).
            SchemeKind::Gl | SchemeKind::GlTrunc | SchemeKind::Shift2ma | SchemeKind::Shift2 => {
                v[n] = 0.0;
            }
            SchemeKind::L1 | SchemeKind::L1Mod => {
                v[n] = l1_closing(alpha, n as f64);
                if n == 2 && self.kind == SchemeKind::L1Mod {
                    // at n = 2 the third head correction lands on the
                    // closing weight itself
                    v[2] -= self.head_c;
                }
            }
            SchemeKind::L1Trunc | SchemeKind::L1ModTrunc => {
                if n <= self.threshold {
                    v[n] = l1_closing(alpha, n as f64);
                    if n == 2 && self.kind == SchemeKind::L1ModTrunc {
                        v[2] -= self.head_c;
                    }
                } else {
                    v[n] = l1_closing_expansion(alpha, n as f64);
                }
            }
            SchemeKind::GlLast2 => {
                let (a, b) = gamma_pair_from(alpha, n as f64, self.wm2[n - 2]);
                v[n - 1] = a;
                v[n] = b;
            }
            SchemeKind::GlLast2Trunc => {
                // The exact pair is kept while the *previous* index still
                // lies in the exact region (n − 1 ≤ ⌈N/p⌉); above that the
                // asymptotic pair takes over. This pairing is what the
                // reference convergence tables follow.
                let (a, b) = if n <= self.threshold + 1 {
                    gamma_pair_from(alpha, n as f64, self.wm2[n - 2])
                } else {
                    gamma_last_two_asym(alpha, n)
                };
                v[n - 1] = a;
                v[n] = b;
            }
        }
        Ok(v)
    }

    /// The full [`WeightVector`] for step `n`, metadata included.
    pub fn weight_vector(&self, n: usize) -> Result<WeightVector> {
        Ok(WeightVector {
            kind: self.kind,
            alpha: self.alpha,
            n,
            coeffs: self.row(n)?,
            shift: self.kind.shift_units(self.alpha),
            order: self.kind.claimed_order(self.alpha),
            requires_zero_ic: self.kind.requires_zero_ic(),
        })
    }
}

/// σ-interior vector used as the L1-family base (closing weights are
/// patched per step).
fn l1_interior_vec(alpha: f64, n: usize) -> Vec<f64> {
    let g = gam(2.0 - alpha);
    let e = 1.0 - alpha;
    let mut s = Vec::with_capacity(n + 1);
    s.push(1.0 / g);
    for k in 1..=n {
        s.push(l1_interior(e, g, k as f64));
    }
    s
}

/// Build the weight vector of scheme `kind` at step `n` of an N-step run.
///
/// Truncated kinds keep exact weights for indices ≤ ⌈N/p⌉ and substitute
/// their asymptotic expansions above; the truncated-L1 closing weight uses
/// its three-term expansion once n passes the threshold; the truncated
/// last-two-weights scheme switches to the asymptotic pair once n−1 does.
/// Head-corrected kinds reject step indices below their head width
/// (n ≥ 3 for the L1Mod family, n ≥ 2 for the last-two-weights family).
///
/// # Examples
///
/// ```
/// use fraccal::weights::{build_scheme, SchemeKind, TailPolicy};
/// let wv = build_scheme(SchemeKind::L1, 0.5, 8, 80, TailPolicy::default()).unwrap();
/// assert_eq!(wv.coeffs.len(), 9);
/// assert!(wv.sum().abs() < 1e-13);
/// ```
pub fn build_scheme(
    kind: SchemeKind,
    alpha: f64,
    n: usize,
    n_total: usize,
    policy: TailPolicy,
) -> Result<WeightVector> {
    if n > n_total {
        return Err(Error::InvalidParameter(format!(
            "build_scheme: step index {n} exceeds total steps {n_total}"
        )));
    }
    if n < kind.min_step() {
        return Err(Error::InvalidParameter(format!(
            "build_scheme: scheme {kind} needs step index ≥ {}, got {n}",
            kind.min_step()
        )));
    }
    SchemeTable::new(kind, alpha, n_total, policy)?.weight_vector(n)
}
