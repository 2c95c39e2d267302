//! Massless scalar field in front of the collapsing mirror.
//!
//! Conventions: the right `out` mode on the right future null infinity is
//! `(4πω)^{-1/2} e^{−iωu}`, and
//! `β = 2i ∫ φ^out ∂_u φ du = −√(ω/π) ∫ e^{−iωu} φ(u) du`
//! after integrating by parts. Tails that are pure phases at `u → ±∞` are
//! integrated with an Abel regulator, `∫_{−∞}^0 e^{−iΩu} du = i/Ω`.
//!
//! The semi-transparent mirror has `r(ω) = −iα/(ω+iα)`, `s(ω) = ω/(ω+iα)`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{
    integrate, integrate_segments, integrate_tail, scale_result, IntegralResult, QuadratureConfig, TailEnvelope,
};
use crate::specfun::{gamma_abs_sq_half_plus, gamma_abs_sq_one_plus, log_gamma};
use crate::trajectory::CollapseTrajectory;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `e^{−x}` below this is treated as zero when truncating damped integrals.
pub(crate) const DAMPING_CUTOFF: f64 = 40.0;

/// Default ratio that stands for "≪" in regime classification.
pub const DEFAULT_REGIME_THRESHOLD: f64 = 1e3;

/// `α/ω′` at or below this counts as a transparent mirror.
pub const TRANSPARENT_RATIO: f64 = 1e-6;

/// Lower edge of the thermal window, as a multiple of `k` and of `ω`.
pub const WINDOW_LOWER: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterCoefficients {
    alpha: f64,
}

impl ScatterCoefficients {
    pub fn new(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `r(ω) = −iα/(ω+iα)`.
    pub fn reflection(&self, omega: f64) -> Complex64 {
        reflection(self.alpha, omega)
    }

    /// `s(ω) = ω/(ω+iα)`.
    pub fn transmission(&self, omega: f64) -> Complex64 {
        transmission(self.alpha, omega)
    }
}

fn reflection(alpha: f64, omega: f64) -> Complex64 {
    -I * alpha / Complex64::new(omega, alpha)
}

fn transmission(alpha: f64, omega: f64) -> Complex64 {
    Complex64::new(omega, 0.0) / Complex64::new(omega, alpha)
}

/// `(r(ω), s(ω))` for coupling `α`.
pub fn scatter(alpha: f64, omega: f64) -> Result<(Complex64, Complex64)> {
    check_alpha(alpha)?;
    check_positive("omega", omega)?;
    Ok((reflection(alpha, omega), transmission(alpha, omega)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    RR,
    RL,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Numeric,
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ErrorEstimate {
    /// Quadrature error estimate on the complex value.
    Bound(f64),
    /// For closed forms: whether the parameters sit inside the regime the
    /// formula was derived for.
    RegimeValid(bool),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaParams {
    pub k: f64,
    pub u0: Option<f64>,
    pub alpha: Option<f64>,
    pub omega: f64,
    pub omega_prime: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RegimeWarning {
    /// `ratio` = `name` lies below the thermal window.
    BelowWindow { quantity: &'static str, ratio: f64 },
    /// `ratio` lies above `e^{k·u0}/10`.
    AboveWindow { quantity: &'static str, ratio: f64, limit: f64 },
    /// Semi-transparent closed form used with `α/ω′` not small.
    CouplingNotSmall { ratio: f64 },
}

impl fmt::Display for RegimeWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegimeWarning::BelowWindow { quantity, ratio } => {
                write!(f, "{quantity}={ratio:.4e} below window lower edge {WINDOW_LOWER}")
            }
            RegimeWarning::AboveWindow { quantity, ratio, limit } => {
                write!(f, "{quantity}={ratio:.4e} above window upper edge {limit:.4e}")
            }
            RegimeWarning::CouplingNotSmall { ratio } => {
                write!(f, "alpha/omega_prime={ratio:.4e} not small")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetaCoefficient {
    pub value: Complex64,
    pub channel: Channel,
    pub method: Method,
    pub err_estimate: ErrorEstimate,
    pub params: BetaParams,
    pub warnings: Vec<RegimeWarning>,
}

impl BetaCoefficient {
    pub fn modulus_sq(&self) -> f64 {
        self.value.norm_sqr()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `ω′ ≪ α`
    PerfectLimit,
    /// `α ≈ 0`
    Transparent,
    /// `α ≪ ω′`
    SemiTransparent,
    Intermediate,
}

impl Regime {
    /// Classifies a coupling against an incoming frequency; `threshold` is
    /// the ratio standing for "≪".
    pub fn classify(alpha: f64, omega_prime: f64, threshold: f64) -> Regime {
        if alpha == 0.0 || alpha / omega_prime <= TRANSPARENT_RATIO {
            Regime::Transparent
        } else if alpha / omega_prime >= threshold {
            Regime::PerfectLimit
        } else if omega_prime / alpha >= threshold {
            Regime::SemiTransparent
        } else {
            Regime::Intermediate
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Regime::PerfectLimit => "perfect_limit",
            Regime::Transparent => "transparent",
            Regime::SemiTransparent => "semi_transparent",
            Regime::Intermediate => "intermediate",
        }
    }
}

/// Warnings for `ω′/k` and `ω′/ω` outside `[10, e^{k·u0}/10]`; without `u0`
/// only the lower edge is checked.
pub fn validity_warnings(k: f64, u0: Option<f64>, omega: f64, omega_prime: f64) -> Vec<RegimeWarning> {
    let mut out = Vec::new();
    let upper = u0.filter(|u| u.is_finite()).map(|u| (k * u).exp() / WINDOW_LOWER);
    for (quantity, ratio) in [("omega_prime/k", omega_prime / k), ("omega_prime/omega", omega_prime / omega)] {
        if ratio < WINDOW_LOWER {
            out.push(RegimeWarning::BelowWindow { quantity, ratio });
        }
        if let Some(limit) = upper {
            if ratio > limit {
                out.push(RegimeWarning::AboveWindow { quantity, ratio, limit });
            }
        }
    }
    out
}

pub(crate) fn coupling_warning(alpha: f64, omega_prime: f64) -> Option<RegimeWarning> {
    let ratio = alpha / omega_prime;
    (ratio > 1.0 / WINDOW_LOWER).then_some(RegimeWarning::CouplingNotSmall { ratio })
}

/// Exponent of the inner Gaussian phase in the third branch of `φ^refl`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReflExponent {
    /// `e^{i(ω/k)(s+q)²}`, continuous with the middle branch.
    #[default]
    Consistent,
    /// `e^{i(ω/4)(s+q)²}`, the literal form; discontinuous at `u0`.
    AsPrinted,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ModeOptions {
    pub quadrature: QuadratureConfig,
    pub refl_exponent: ReflExponent,
}

// ---------------------------------------------------------------------------
// inner integrals shared with the Dirac field

/// `∫₀^{1−q} (s+q)^{amp} e^{iκ(s+q)²} e^{−cs} ds`, the damped range cut at
/// `e^{−40}`.
pub(crate) fn gaussian_phase_inner(q: f64, kappa: f64, amp: f64, c: f64, cfg: &QuadratureConfig) -> Result<Complex64> {
    let mut smax = 1.0 - q;
    if c > 0.0 {
        smax = smax.min(DAMPING_CUTOFF / c);
    }
    if smax <= 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let f = |s: f64| {
        let z = s + q;
        Complex64::new(-c * s, kappa * z * z).exp() * if amp == 0.0 { 1.0 } else { z.powf(amp) }
    };
    let rate = 2.0 * kappa.abs() * (q + smax);
    Ok(integrate(f, 0.0, smax, &cfg.with_oscillation_rate(rate))?.value)
}

/// `∫_lo^hi x^{i·p + m} e^{d·(x − anchor)} dx` evaluated in `w = ln x`.
pub(crate) fn log_power_integral(
    lo: f64,
    hi: f64,
    p: f64,
    m: f64,
    d: f64,
    anchor: f64,
    cfg: &QuadratureConfig,
) -> Result<Complex64> {
    if !(hi > lo) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (wl, wh) = (lo.max(f64::MIN_POSITIVE).ln(), hi.ln());
    let expo = Complex64::new(m + 1.0, p);
    let f = |w: f64| (expo * w + d * (w.exp() - anchor)).exp();
    Ok(integrate(f, wl, wh, &cfg.with_oscillation_rate(p.abs()))?.value)
}

/// `∫₀^{1−q} (s+q)^{2iν+m} e^{−cs} ds`.
pub(crate) fn power_inner(q: f64, nu: f64, m: f64, c: f64, cfg: &QuadratureConfig) -> Result<Complex64> {
    let mut hi: f64 = 1.0;
    if c > 0.0 {
        hi = hi.min(q + DAMPING_CUTOFF / c);
    }
    log_power_integral(q, hi, 2.0 * nu, m, -c, q, cfg)
}

/// `∫_{t0}^{z} 2 t^{2iν+m} e^{−c(z−t)} dt`.
pub(crate) fn upper_anchored(z: f64, t0: f64, nu: f64, m: f64, c: f64, cfg: &QuadratureConfig) -> Result<Complex64> {
    let mut lo = t0;
    if c > 0.0 {
        lo = lo.max(z - DAMPING_CUTOFF / c);
    }
    Ok(2.0 * log_power_integral(lo, z, 2.0 * nu, m, c, z, cfg)?)
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha >= 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("alpha must be finite and non-negative, got {alpha}")))
    }
}

pub(crate) fn check_positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be positive and finite, got {x}")))
    }
}

pub(crate) fn require_finite(traj: &CollapseTrajectory, what: &str) -> Result<()> {
    if traj.is_finite() {
        Ok(())
    } else {
        Err(Error::Unsupported(format!("{what} needs a finite-collapse trajectory")))
    }
}

// ---------------------------------------------------------------------------
// mode functions

/// Reflected part `φ^refl_{ω,R}(u)` of the right `in` mode on the right
/// future null infinity.
pub fn mode_refl_scalar(traj: &CollapseTrajectory, alpha: f64, omega: f64, u: f64) -> Result<Complex64> {
    mode_refl_scalar_with(traj, alpha, omega, u, &ModeOptions::default())
}

pub fn mode_refl_scalar_with(
    traj: &CollapseTrajectory,
    alpha: f64,
    omega: f64,
    u: f64,
    opts: &ModeOptions,
) -> Result<Complex64> {
    check_alpha(alpha)?;
    check_positive("omega", omega)?;
    let norm = 1.0 / (4.0 * PI * omega).sqrt();
    let r = reflection(alpha, omega);
    if u <= 0.0 {
        return Ok(norm * r * (-I * omega * u).exp());
    }
    if alpha == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let k = traj.k();
    let nu = omega / k;
    let c = 2.0 * alpha / k;
    let cfg = &opts.quadrature;
    let ubar = traj.comoving_u(u);
    let head = r * (-alpha * ubar).exp();
    if u <= traj.u0() {
        let q = (-0.5 * k * u).exp();
        let j = gaussian_phase_inner(q, nu, 0.0, c, cfg)?;
        return Ok(norm * (head - c * (-I * nu).exp() * j));
    }
    let a = traj.final_slope();
    let q0 = a.sqrt();
    let decay = (-alpha * (ubar - traj.ubar0())).exp();
    let kappa = match opts.refl_exponent {
        ReflExponent::Consistent => nu,
        ReflExponent::AsPrinted => omega / 4.0,
    };
    let j0 = gaussian_phase_inner(q0, kappa, 0.0, c, cfg)?;
    let middle = I * alpha / Complex64::new(q0 * omega, alpha)
        * ((-I * omega * traj.ray_advance(u)).exp() - (-I * omega * traj.v0()).exp() * decay);
    Ok(norm * (head - middle - c * (-I * nu).exp() * decay * j0))
}

/// Transmitted mode `φ^trans_{ω,L}(u)` (left `in` mode seen on the right).
pub fn mode_trans_scalar(traj: &CollapseTrajectory, alpha: f64, omega: f64, u: f64) -> Result<Complex64> {
    mode_trans_scalar_with(traj, alpha, omega, u, &ModeOptions::default())
}

pub fn mode_trans_scalar_with(
    traj: &CollapseTrajectory,
    alpha: f64,
    omega: f64,
    u: f64,
    opts: &ModeOptions,
) -> Result<Complex64> {
    check_alpha(alpha)?;
    check_positive("omega", omega)?;
    let norm = 1.0 / (4.0 * PI * omega).sqrt();
    let plane = (-I * omega * u).exp();
    if u <= 0.0 {
        return Ok(norm * transmission(alpha, omega) * plane);
    }
    if alpha == 0.0 {
        return Ok(norm * plane);
    }
    let k = traj.k();
    let nu = omega / k;
    let c = 2.0 * alpha / k;
    let cfg = &opts.quadrature;
    let r = reflection(alpha, omega);
    let ubar = traj.comoving_u(u);
    let head = r * (-alpha * ubar).exp();
    if u <= traj.u0() {
        let q = (-0.5 * k * u).exp().max(f64::MIN_POSITIVE);
        let j = power_inner(q, nu, 0.0, c, cfg)?;
        return Ok(norm * (plane + head - c * j));
    }
    let q0 = traj.final_slope().sqrt();
    let decay = (-alpha * (ubar - traj.ubar0())).exp();
    let j0 = power_inner(q0, nu, 0.0, c, cfg)?;
    let mid = (-I * omega * traj.u0()).exp() / Complex64::new(omega, alpha * q0)
        * (omega * (-I * omega * (u - traj.u0())).exp() + I * alpha * q0 * decay);
    Ok(norm * (head + mid - c * decay * j0))
}

// ---------------------------------------------------------------------------
// β^{RR}, perfect mirror

fn beta(value: Complex64, channel: Channel, method: Method, err: ErrorEstimate, params: BetaParams, warnings: Vec<RegimeWarning>) -> BetaCoefficient {
    BetaCoefficient { value, channel, method, err_estimate: err, params, warnings }
}

/// `∫₀^{1−A} (1−s)^{iν+m} e^{−iλs} ds` along the real axis, in the variable
/// `t = −ln(1−s)`.
pub(crate) fn collapse_integral_real(nu: f64, lambda: f64, m: f64, ku0: f64, cfg: &QuadratureConfig) -> Result<IntegralResult> {
    let expo = Complex64::new(-(1.0 + m), -nu);
    let f = |t: f64| (expo * t + Complex64::new(0.0, lambda * (-t).exp_m1())).exp();
    integrate_segments(f, 0.0, ku0, 1.0, |lo, _| nu + lambda * (-lo).exp(), cfg)
}

/// Same integral with the contour pushed into the lower half plane,
/// `s = −iy` and `s = 1−A−iy`; the integrand becomes `e^{−λy}` damped and
/// non-oscillatory, so the cost does not grow with `λ`.
pub(crate) fn collapse_integral_contour(nu: f64, lambda: f64, m: f64, a: f64, cfg: &QuadratureConfig) -> Result<IntegralResult> {
    let expo = Complex64::new(m, nu);
    let end_phase = Complex64::new(0.0, -lambda * (1.0 - a)).exp();
    // y = τ/λ
    let f = |tau: f64| {
        let y = tau / lambda;
        let near = (expo * Complex64::new(1.0, y).ln()).exp();
        let far = (expo * Complex64::new(a, y).ln()).exp();
        (near - end_phase * far) * (-tau).exp()
    };
    let scale = -I / lambda;
    let mut inner = *cfg;
    inner.abs_tol = cfg.abs_tol / scale.norm();
    let r = integrate_tail(f, 0.0, TailEnvelope::Exponential(1.0), &inner);
    scale_result(r, scale)
}

/// How the oscillatory core of the perfect-mirror coefficients is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IntegrationPath {
    #[default]
    RealAxis,
    /// Deformed into the lower half plane; cost independent of `ω′`.
    SteepestDescent,
}

pub(crate) fn collapse_integral(
    traj: &CollapseTrajectory,
    nu: f64,
    lambda: f64,
    m: f64,
    path: IntegrationPath,
    cfg: &QuadratureConfig,
) -> Result<IntegralResult> {
    let ku0 = traj.k() * traj.u0();
    match path {
        IntegrationPath::RealAxis => collapse_integral_real(nu, lambda, m, ku0, cfg),
        IntegrationPath::SteepestDescent => collapse_integral_contour(nu, lambda, m, traj.final_slope(), cfg),
    }
}

/// `β^{RR}` of a perfect mirror: the two boundary terms plus
/// `−(1/2πk)√(ω′/ω) ∫₀^{1−A} (1−s)^{iω/k} e^{−iω′s/k} ds`.
pub fn beta_rr_perfect_numeric(traj: &CollapseTrajectory, omega: f64, omega_prime: f64, cfg: &QuadratureConfig) -> Result<BetaCoefficient> {
    beta_rr_perfect_numeric_via(traj, omega, omega_prime, IntegrationPath::RealAxis, cfg)
}

pub fn beta_rr_perfect_numeric_via(
    traj: &CollapseTrajectory,
    omega: f64,
    omega_prime: f64,
    path: IntegrationPath,
    cfg: &QuadratureConfig,
) -> Result<BetaCoefficient> {
    require_finite(traj, "beta_rr_perfect_numeric")?;
    check_positive("omega", omega)?;
    check_positive("omega_prime", omega_prime)?;
    let k = traj.k();
    let (u0, a) = (traj.u0(), traj.final_slope());
    let (nu, lambda) = (omega / k, omega_prime / k);
    let pre = 1.0 / (2.0 * PI * I * (omega * omega_prime).sqrt());
    let t1 = pre * omega_prime / (omega + omega_prime);
    let t2 = -pre * Complex64::new(0.0, -omega * u0 - omega_prime * traj.v0()).exp() * (omega_prime * a) / (omega + omega_prime * a);
    let coef = (omega_prime / omega).sqrt() / (2.0 * PI * k);
    let mut icfg = *cfg;
    icfg.abs_tol = cfg.abs_tol / coef;
    let integral = collapse_integral(traj, nu, lambda, 0.0, path, &icfg)?;
    let value = t1 + t2 - coef * integral.value;
    Ok(beta(
        value,
        Channel::RR,
        Method::Numeric,
        ErrorEstimate::Bound(coef * integral.err_estimate),
        BetaParams { k, u0: Some(u0), alpha: None, omega, omega_prime },
        validity_warnings(k, Some(u0), omega, omega_prime),
    ))
}

/// Perfect-mirror `β^{RR}` split as `near + e^{−iω′v0} far`, the pieces
/// radiated from `u = 0` and from `u = u0`. Both vary slowly with `ω′`; the
/// phase between them turns once per `2π/v0` in `ω′`.
pub(crate) fn perfect_endpoint_split(
    traj: &CollapseTrajectory,
    omega: f64,
    omega_prime: f64,
    cfg: &QuadratureConfig,
) -> Result<(Complex64, Complex64)> {
    require_finite(traj, "perfect_endpoint_split")?;
    check_positive("omega", omega)?;
    check_positive("omega_prime", omega_prime)?;
    let k = traj.k();
    let (u0, a) = (traj.u0(), traj.final_slope());
    let (nu, lambda) = (omega / k, omega_prime / k);
    let pre = 1.0 / (2.0 * PI * I * (omega * omega_prime).sqrt());
    let coef = (omega_prime / omega).sqrt() / (2.0 * PI * k);
    let scale = coef * I / lambda;
    let mut icfg = *cfg;
    icfg.abs_tol = cfg.abs_tol / scale.norm();
    let expo = Complex64::new(0.0, nu);
    let leg = |base: f64| {
        let f = |tau: f64| (expo * Complex64::new(base, tau / lambda).ln()).exp() * (-tau).exp();
        integrate_tail(f, 0.0, TailEnvelope::Exponential(1.0), &icfg)
    };
    let near = pre * omega_prime / (omega + omega_prime) + scale * leg(1.0)?.value;
    let far = -pre * Complex64::new(0.0, -omega * u0).exp() * (omega_prime * a) / (omega + omega_prime * a) - scale * leg(a)?.value;
    Ok((near, far))
}

/// `log` of `c · (ik/ω′)^{iν+p} · Γ(g+iν)`, kept in log space so that
/// large `ν` underflows gracefully instead of producing `0·∞`.
pub(crate) fn thermal_closed_form(k: f64, omega: f64, omega_prime: f64, p: f64, g: f64) -> Result<Complex64> {
    let nu = omega / k;
    let log_pow = Complex64::new(p, nu) * Complex64::new((k / omega_prime).ln(), PI / 2.0);
    Ok((log_pow + log_gamma(Complex64::new(g, nu))?).exp())
}

fn asymptotic_params(k: f64, alpha: Option<f64>, omega: f64, omega_prime: f64) -> Result<BetaParams> {
    check_positive("k", k)?;
    check_positive("omega", omega)?;
    check_positive("omega_prime", omega_prime)?;
    if let Some(a) = alpha {
        check_alpha(a)?;
    }
    Ok(BetaParams { k, u0: None, alpha, omega, omega_prime })
}

pub(crate) fn asymptotic(value: Complex64, params: BetaParams, warnings: Vec<RegimeWarning>) -> BetaCoefficient {
    let ok = warnings.is_empty();
    beta(value, Channel::RR, Method::Asymptotic, ErrorEstimate::RegimeValid(ok), params, warnings)
}

/// `(1/(2πi√(ωω′))) e^{−iω′/k} (ik/ω′)^{iω/k} Γ(1+iω/k)`, whose modulus
/// squared is `(1/2πω′k)(e^{2πω/k}−1)^{-1}`.
pub fn beta_rr_perfect_asymptotic(k: f64, omega: f64, omega_prime: f64) -> Result<BetaCoefficient> {
    let params = asymptotic_params(k, None, omega, omega_prime)?;
    let core = thermal_closed_form(k, omega, omega_prime, 0.0, 1.0)?;
    let value = core * Complex64::new(0.0, -omega_prime / k).exp() / (2.0 * PI * I * (omega * omega_prime).sqrt());
    Ok(asymptotic(value, params, validity_warnings(k, None, omega, omega_prime)))
}

/// Closed-form `|β|²` of [`beta_rr_perfect_asymptotic`], from
/// `|Γ(1+ix)|² = πx/sinh(πx)`.
pub fn perfect_scalar_modulus_sq(k: f64, omega: f64, omega_prime: f64) -> f64 {
    let nu = omega / k;
    gamma_abs_sq_one_plus(nu) * (-PI * nu).exp() / (4.0 * PI * PI * omega * omega_prime)
}

// ---------------------------------------------------------------------------
// β^{RR}, semi-transparent mirror

/// `β^{RR}` from the semi-transparent nested-integral expression
///
/// ```text
/// β ≅ (1/2π√(ωω′)) (α/(ω′+iα)) [1 − (α/k) ∫_A^1 x^{iν−1/2} e^{−2α(1−√x)/k} dx]
///   + (α/(2πki√(ωω′))) e^{−iλ} ∫_A^1 x^{iν−1/2} e^{iλx} [1 − (2α/k) ∫₀^{1−√x} e^{iλ(s²+2s√x)} e^{−2αs/k} ds] dx
/// ```
///
/// with `ν = ω/k`, `λ = ω′/k`. With `x = t²` and `z = s + t` the double
/// integral is exchanged into `∫ dz e^{iλz²} ∫_{√A}^z dt (…)`, leaving a
/// single oscillatory outer integral over a smooth amplitude.
pub fn beta_rr_semi_numeric(
    traj: &CollapseTrajectory,
    alpha: f64,
    omega: f64,
    omega_prime: f64,
    cfg: &QuadratureConfig,
) -> Result<BetaCoefficient> {
    semi_numeric_impl(traj, alpha, omega, omega_prime, cfg, SemiRoute::Exchanged)
}

/// [`beta_rr_semi_numeric`] with a choice of path for the outer integral.
/// [`IntegrationPath::SteepestDescent`] rotates `z²` into the upper half
/// plane at both end points, so the cost stops growing with `ω′`.
pub fn beta_rr_semi_numeric_via(
    traj: &CollapseTrajectory,
    alpha: f64,
    omega: f64,
    omega_prime: f64,
    path: IntegrationPath,
    cfg: &QuadratureConfig,
) -> Result<BetaCoefficient> {
    let route = match path {
        IntegrationPath::RealAxis => SemiRoute::Exchanged,
        IntegrationPath::SteepestDescent => SemiRoute::Contour,
    };
    semi_numeric_impl(traj, alpha, omega, omega_prime, cfg, route)
}

/// [`beta_rr_semi_numeric`] evaluated in the original nesting (inner
/// `s`-integral at every outer node). Slower; kept as a cross-check of the
/// exchanged form.
pub fn beta_rr_semi_numeric_nested(
    traj: &CollapseTrajectory,
    alpha: f64,
    omega: f64,
    omega_prime: f64,
    cfg: &QuadratureConfig,
) -> Result<BetaCoefficient> {
    semi_numeric_impl(traj, alpha, omega, omega_prime, cfg, SemiRoute::Nested)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SemiRoute {
    Exchanged,
    Nested,
    Contour,
}

/// Largest `ω′/k` accepted by the nested semi-transparent integrals.
pub const SEMI_LAMBDA_CEILING: f64 = 1e6;

fn semi_numeric_impl(
    traj: &CollapseTrajectory,
    alpha: f64,
    omega: f64,
    omega_prime: f64,
    cfg: &QuadratureConfig,
    route: SemiRoute,
) -> Result<BetaCoefficient> {
    require_finite(traj, "beta_rr_semi_numeric")?;
    check_alpha(alpha)?;
    check_positive("omega", omega)?;
    check_positive("omega_prime", omega_prime)?;
    let k = traj.k();
    let u0 = traj.u0();
    let params = BetaParams { k, u0: Some(u0), alpha: Some(alpha), omega, omega_prime };
    let warnings = validity_warnings(k, Some(u0), omega, omega_prime);
    if alpha == 0.0 {
        return Ok(beta(Complex64::new(0.0, 0.0), Channel::RR, Method::Numeric, ErrorEstimate::Bound(0.0), params, warnings));
    }
    let (nu, lambda, c) = (omega / k, omega_prime / k, 2.0 * alpha / k);
    if lambda > SEMI_LAMBDA_CEILING {
        return Err(Error::SubdivisionLimit { value: Complex64::new(f64::NAN, f64::NAN), err_estimate: f64::INFINITY, limit: 0 });
    }
    let t0 = traj.final_slope().sqrt();
    let root = (omega * omega_prime).sqrt();
    let pre1 = 1.0 / (2.0 * PI * root) * alpha / Complex64::new(omega_prime, alpha);
    let pre2 = alpha / (2.0 * PI * k * I * root) * Complex64::new(0.0, -lambda).exp();

    let mut ocfg = *cfg;
    ocfg.abs_tol = cfg.abs_tol / pre2.norm();
    // pre2 grows like α, so at strong coupling the inner pass tightens too
    let inner = ocfg.with_tolerances(cfg.rel_tol, cfg.abs_tol.min(ocfg.abs_tol)).inner();
    let w0 = t0.ln();
    let rate = |_: f64, hi: f64| 2.0 * nu + 2.0 * lambda * (2.0 * hi).exp();
    let mut failure = None;
    let (t1, outer) = if route == SemiRoute::Nested {
        let q1 = upper_anchored(1.0, t0, nu, 0.0, c, &inner)?;
        let t1 = pre1 * (1.0 - alpha / k * q1);
        // x = t², t = e^w: 2 t^{2iν} e^{iλt²} [1 − c K(t)] t dw
        let f = |w: f64| {
            let t = w.exp();
            let kk = gaussian_phase_offset(t, lambda, 0.0, c, &inner).unwrap_or_else(|e| {
                failure.get_or_insert(e);
                Complex64::new(0.0, 0.0)
            });
            2.0 * t * Complex64::new(0.0, 2.0 * nu * w + lambda * t * t).exp() * (1.0 - c * kk)
        };
        (t1, integrate_segments(f, w0, 0.0, 0.5, rate, &ocfg)?)
    } else {
        // By parts, 2z^{2iν} − cQ(z) = 2 t0^{2iν} e^{−c(z−t0)} + 4iν R(z) with
        // R(z) = ∫_{t0}^z t^{2iν−1} e^{−c(z−t)} dt; no cancellation at large c.
        let edge = |z: f64| Complex64::new(-c * (z - t0), 2.0 * nu * w0).exp();
        let r1 = damped_reciprocal(1.0, t0, nu, c, &inner)?;
        let t1 = pre1 * (edge(1.0) + 2.0 * I * nu * r1);
        if route == SemiRoute::Contour {
            let a = t0 * t0;
            let start = semi_contour_leg(a, t0, Complex64::new(0.0, 0.0), t0, nu, lambda, c, &ocfg, &inner)?;
            let end = semi_contour_leg(1.0, 1.0, r1, t0, nu, lambda, c, &ocfg, &inner)?;
            let scale = I / lambda;
            let value = scale * (Complex64::new(0.0, lambda * a).exp() * start.value - Complex64::new(0.0, lambda).exp() * end.value);
            let err = scale.norm() * (start.err_estimate + end.err_estimate);
            let value = t1 + pre2 * value;
            return Ok(beta(value, Channel::RR, Method::Numeric, ErrorEstimate::Bound(pre2.norm() * err), params, warnings));
        }
        // z = e^w: e^{iλz²} [2z^{2iν} − cQ(z)] z dw
        let f = |w: f64| {
            let z = w.exp();
            let r = damped_reciprocal(z, t0, nu, c, &inner).unwrap_or_else(|e| {
                failure.get_or_insert(e);
                Complex64::new(0.0, 0.0)
            });
            z * Complex64::new(0.0, lambda * z * z).exp() * (2.0 * edge(z) + 4.0 * I * nu * r)
        };
        (t1, integrate_segments(f, w0, 0.0, 0.5, rate, &ocfg)?)
    };
    if let Some(e) = failure {
        return Err(e);
    }
    let value = t1 + pre2 * outer.value;
    Ok(beta(value, Channel::RR, Method::Numeric, ErrorEstimate::Bound(pre2.norm() * outer.err_estimate), params, warnings))
}

/// `∫_{t0}^{z} t^{2iν−1} e^{−c(z−t)} dt`.
fn damped_reciprocal(z: f64, t0: f64, nu: f64, c: f64, cfg: &QuadratureConfig) -> Result<Complex64> {
    let lo = t0.max(z - DAMPING_CUTOFF / c);
    log_power_integral(lo, z, 2.0 * nu, -1.0, c, z, cfg)
}

/// `∫₀^∞ e^{−τ} G(z)/(2z) dτ`, `z = √(a+iτ/λ)`, with `G(z) = 2 t0^{2iν} e^{−c(z−t0)} + 4iν R(z)`.
/// `R` is continued off the real axis from `za = √a`, where it equals
/// `r_a`, along the path on which `ln t` is linear.
#[allow(clippy::too_many_arguments)]
fn semi_contour_leg(
    a: f64,
    za: f64,
    r_a: Complex64,
    t0: f64,
    nu: f64,
    lambda: f64,
    c: f64,
    cfg: &QuadratureConfig,
    inner: &QuadratureConfig,
) -> Result<IntegralResult> {
    let expo = Complex64::new(0.0, 2.0 * nu);
    let t0_phase = Complex64::new(0.0, 2.0 * nu * t0.ln()).exp();
    let lza = za.ln();
    let mut failure = None;
    let f = |tau: f64| {
        let z = Complex64::new(a, tau / lambda).sqrt();
        // ln t runs linearly from ln za to ln z, which absorbs the 1/t
        let span = z.ln() - lza;
        let icfg = inner.with_oscillation_rate(2.0 * nu * span.norm() + c * (z - za).norm());
        let seg = integrate(
            |s: f64| {
                let lt = lza + s * span;
                (expo * lt - c * (z - lt.exp())).exp()
            },
            0.0,
            1.0,
            &icfg,
        );
        let r = match seg {
            Ok(v) => (-c * (z - za)).exp() * r_a + span * v.value,
            Err(e) => {
                failure.get_or_insert(e);
                Complex64::new(0.0, 0.0)
            }
        };
        (2.0 * t0_phase * (-c * (z - t0)).exp() + 4.0 * I * nu * r) * (-tau).exp() / (2.0 * z)
    };
    let r = integrate_tail(f, 0.0, TailEnvelope::Exponential(1.0), cfg);
    match failure {
        Some(e) => Err(e),
        None => r,
    }
}

/// `∫₀^{1−t} (s+t)^{amp} e^{iλ((s+t)²−t²)} e^{−cs} ds`, the inner integral of
/// the nested form.
pub(crate) fn gaussian_phase_offset(t: f64, lambda: f64, amp: f64, c: f64, cfg: &QuadratureConfig) -> Result<Complex64> {
    Ok(gaussian_phase_inner(t, lambda, amp, c, cfg)? * Complex64::new(0.0, -lambda * t * t).exp())
}

/// `(α/(2πki√(ωω′))) e^{−iω′/k} (ik/ω′)^{iω/k+1/2} Γ(1/2+iω/k)`, modulus
/// squared `(1/2πkω)(α/ω′)²(e^{2πω/k}+1)^{-1}`.
pub fn beta_rr_semi_asymptotic(k: f64, alpha: f64, omega: f64, omega_prime: f64) -> Result<BetaCoefficient> {
    let params = asymptotic_params(k, Some(alpha), omega, omega_prime)?;
    let core = thermal_closed_form(k, omega, omega_prime, 0.5, 0.5)?;
    let value = alpha * core * Complex64::new(0.0, -omega_prime / k).exp() / (2.0 * PI * k * I * (omega * omega_prime).sqrt());
    let mut warnings = validity_warnings(k, None, omega, omega_prime);
    warnings.extend(coupling_warning(alpha, omega_prime));
    Ok(asymptotic(value, params, warnings))
}

/// Closed-form `|β|²` of [`beta_rr_semi_asymptotic`], from
/// `|Γ(1/2+ix)|² = π/cosh(πx)`.
pub fn semi_scalar_modulus_sq(k: f64, alpha: f64, omega: f64, omega_prime: f64) -> f64 {
    let nu = omega / k;
    let ratio = alpha / omega_prime;
    ratio * ratio * gamma_abs_sq_half_plus(nu) * (-PI * nu).exp() / (4.0 * PI * PI * k * omega)
}

// ---------------------------------------------------------------------------
// β^{RL}

/// `β^{RL} = −√(ω/π) ∫ e^{−iωu} φ^trans_{ω′,L}(u) du`.
///
/// The integral is split along the branches of `φ^trans`:
/// * `u ≤ 0` and every `u ≥ u0` term are exponentials, integrated exactly;
/// * `∫₀^{u0} e^{−iωu} e^{−αū} du` by quadrature;
/// * the nested term `∫₀^{u0} e^{−iωu} J(q(u)) du`, `q = e^{−ku/2}`, with the
///   order exchanged so that the outer variable is `x ∈ [√A, 1]`.
pub fn beta_rl_semi_numeric(
    traj: &CollapseTrajectory,
    alpha: f64,
    omega: f64,
    omega_prime: f64,
    cfg: &QuadratureConfig,
) -> Result<BetaCoefficient> {
    require_finite(traj, "beta_rl_semi_numeric")?;
    check_alpha(alpha)?;
    check_positive("omega", omega)?;
    check_positive("omega_prime", omega_prime)?;
    let k = traj.k();
    let u0 = traj.u0();
    let params = BetaParams { k, u0: Some(u0), alpha: Some(alpha), omega, omega_prime };
    let warnings = validity_warnings(k, Some(u0), omega, omega_prime);
    if alpha == 0.0 {
        return Ok(beta(Complex64::new(0.0, 0.0), Channel::RL, Method::Numeric, ErrorEstimate::Bound(0.0), params, warnings));
    }
    let pre = -(omega / PI).sqrt() / (4.0 * PI * omega_prime).sqrt();
    let mut icfg = *cfg;
    icfg.abs_tol = cfg.abs_tol / pre.abs();
    let sum = trans_overlap(traj, alpha, omega, omega_prime, TransKind::Scalar, &icfg)?;
    Ok(beta(pre * sum.value, Channel::RL, Method::Numeric, ErrorEstimate::Bound(pre.abs() * sum.err_estimate), params, warnings))
}

/// Which transmitted mode enters [`trans_overlap`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum TransKind {
    Scalar,
    /// Dirac upper component; `printed_decay` selects `e^{−α√A(ū−ū0)}` in
    /// the third branch, otherwise `e^{−α(ū−ū0)}`. `sign` is the sign of
    /// the out-mode frequency.
    Dirac { printed_decay: bool, sign: f64 },
}

/// `∫ e^{−iσωu} τ(u) du` where `τ` is the transmitted mode without its
/// normalisation, `σ = ±1`.
pub(crate) fn trans_overlap(
    traj: &CollapseTrajectory,
    alpha: f64,
    omega: f64,
    omega_prime: f64,
    kind: TransKind,
    cfg: &QuadratureConfig,
) -> Result<IntegralResult> {
    let k = traj.k();
    let (u0, a) = (traj.u0(), traj.final_slope());
    let sqa = a.sqrt();
    let (sigma, fermion) = match kind {
        TransKind::Scalar => (1.0, false),
        TransKind::Dirac { sign, .. } => (sign, true),
    };
    let w = sigma * omega;
    let big = w + omega_prime;
    if big == 0.0 {
        return Err(Error::domain("out and in frequencies cancel; overlap is singular"));
    }
    let lambda = omega_prime / k;
    let c = 2.0 * alpha / k;
    let s = transmission(alpha, omega_prime);
    let r = reflection(alpha, omega_prime);
    // √ū′ on the final branch
    let amp3 = if fermion { a.powf(0.25) } else { 1.0 };
    let eu0 = (-I * w * u0).exp();

    // u ≤ 0 and the plane wave on [0, u0]
    let mut total = s * I / big + (1.0 - (-I * big * u0).exp()) / (I * big);
    let mut err = 0.0;

    if alpha > 0.0 {
        // r′ ∫₀^{u0} e^{−iωu} √ū′ e^{−αū} du
        let damped = |u: f64| {
            let amp = if fermion { (-0.25 * k * u).exp() } else { 1.0 };
            amp * Complex64::new(-alpha * traj.comoving_u(u), -w * u).exp()
        };
        let m1 = integrate(damped, 0.0, u0, &cfg.with_oscillation_rate(omega.max(k)))?;
        total += r * m1.value;
        err += r.norm() * m1.err_estimate;

        // −c ∫₀^{u0} du e^{−iωu} √ū′ J(q(u))
        let m2 = nested_trans_term(k, u0, sqa, w, lambda, c, fermion, cfg)?;
        total -= c * m2.value;
        err += c * m2.err_estimate;

        // final branch, u ≥ u0
        let jq0 = power_inner(sqa, lambda, if fermion { -0.5 } else { 0.0 }, c, &cfg.inner())?;
        let damp_rate = alpha * sqa;
        let tail_damped = eu0 / Complex64::new(damp_rate, w);
        total += r * amp3 * (-alpha * traj.ubar0()).exp() * tail_damped;
        let mix = 1.0 / Complex64::new(omega_prime, alpha * sqa);
        total += mix * omega_prime * (-I * big * u0).exp() / (I * big);
        let decay_tail = match kind {
            TransKind::Dirac { printed_decay: true, .. } => eu0 / Complex64::new(alpha * a, w),
            _ => tail_damped,
        };
        total += mix * I * alpha * sqa * (-I * omega_prime * u0).exp() * decay_tail;
        total -= c * amp3 * jq0 * tail_damped;
    } else {
        // free propagation past u0
        total += (-I * big * u0).exp() / (I * big);
    }
    Ok(IntegralResult { value: total, err_estimate: err, evaluations: 0 })
}

/// `∫₀^{u0} du e^{−iωu} √ū′(u) ∫_{q(u)}^1 x^{2iλ+m} e^{−c(x−q(u))} dx`
/// exchanged to `∫_{√A}^1 dx x^{2iλ+m} ∫_{u_x}^{u0} du (…)` with
/// `q(u_x) = x`, outer variable `ln x`.
#[allow(clippy::too_many_arguments)]
fn nested_trans_term(
    k: f64,
    u0: f64,
    q0: f64,
    w: f64,
    lambda: f64,
    c: f64,
    fermion: bool,
    cfg: &QuadratureConfig,
) -> Result<IntegralResult> {
    let inner_cfg = cfg.inner();
    let m = if fermion { -0.5 } else { 0.0 };
    let mut failure = None;
    let f = |lx: f64| {
        let x = lx.exp();
        let ux = -2.0 * lx / k;
        let mut umax = u0;
        if x > DAMPING_CUTOFF / c {
            umax = umax.min(-2.0 / k * (x - DAMPING_CUTOFF / c).ln());
        }
        let inner = if umax > ux {
            let g = |u: f64| {
                let amp = if fermion { (-0.25 * k * u).exp() } else { 1.0 };
                amp * Complex64::new(-c * (x - (-0.5 * k * u).exp()), -w * u).exp()
            };
            match integrate(g, ux, umax, &inner_cfg.with_oscillation_rate(w.abs())) {
                Ok(r) => r.value,
                Err(e) => {
                    failure.get_or_insert(e);
                    Complex64::new(0.0, 0.0)
                }
            }
        } else {
            Complex64::new(0.0, 0.0)
        };
        (Complex64::new(m + 1.0, 2.0 * lambda) * lx).exp() * inner
    };
    let r = integrate_segments(f, q0.ln(), 0.0, 1.0, |_, _| 2.0 * lambda, cfg)?;
    match failure {
        Some(e) => Err(e),
        None => Ok(r),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs()
    }

    #[test]
    fn semi_contour_matches_real_axis() {
        let cfg = QuadratureConfig::default();
        for &(k, u0, a, w, lam) in &[(0.05, 200.0, 0.05, 0.05, 0.5), (1.0, 10.0, 0.5, 1.0, 60.0), (1.0, 30.0, 1.0, 0.5, 2e3)] {
            let traj = CollapseTrajectory::finite(k, u0).unwrap();
            let real = beta_rr_semi_numeric(&traj, a, w, lam * k, &cfg).unwrap().value;
            let rotated = beta_rr_semi_numeric_via(&traj, a, w, lam * k, IntegrationPath::SteepestDescent, &cfg).unwrap().value;
            assert!((real - rotated).norm() < 1e-9 * real.norm(), "λ={lam}: {real} vs {rotated}");
        }
    }

    #[test]
    fn endpoint_split_recombines() {
        let cfg = QuadratureConfig::default();
        for &(k, u0, w, wp) in &[(1.0, 10.0, 1.0, 80.0), (0.05, 200.0, 0.05, 7.0), (1.0, 40.0, 0.5, 3e5)] {
            let traj = CollapseTrajectory::finite(k, u0).unwrap();
            let (near, far) = perfect_endpoint_split(&traj, w, wp, &cfg).unwrap();
            let whole = near + Complex64::new(0.0, -wp * traj.v0()).exp() * far;
            let b = beta_rr_perfect_numeric_via(&traj, w, wp, IntegrationPath::SteepestDescent, &cfg).unwrap().value;
            assert!((whole - b).norm() < 1e-9 * b.norm(), "{k} {u0} {wp}: {whole} vs {b}");
        }
    }

    #[test]
    fn scatter_examples() {
        let (r, s) = scatter(0.0, 5.0).unwrap();
        assert_eq!(r, Complex64::new(0.0, 0.0));
        assert_eq!(s, Complex64::new(1.0, 0.0));
        let (r, s) = scatter(3.0, 3.0).unwrap();
        assert!((r.norm_sqr() - 0.5).abs() < 1e-15 && (s.norm_sqr() - 0.5).abs() < 1e-15);
        let (r, s) = scatter(1e6, 1.0).unwrap();
        assert!((r + 1.0).norm() < 2e-6);
        assert!(close(s.norm(), 1e-6, 1e-6));
        assert!(scatter(-1.0, 1.0).is_err());
        assert!(scatter(1.0, 0.0).is_err());
    }

    #[test]
    fn unitarity_over_decades() {
        for &alpha in &[1e-3, 1.0, 7.5, 1e4] {
            for i in 0..=120 {
                let w = 10f64.powf(-6.0 + 12.0 * i as f64 / 120.0);
                let (r, s) = scatter(alpha, w).unwrap();
                assert!((r.norm_sqr() + s.norm_sqr() - 1.0).abs() <= 1e-15, "α={alpha} ω={w}");
            }
        }
    }

    #[test]
    fn scatter_limits() {
        let sc = ScatterCoefficients::new(2.0).unwrap();
        assert!((sc.reflection(1e-9).norm() - 1.0).abs() < 1e-9);
        assert!((sc.transmission(1e9).norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn regime_classification() {
        assert_eq!(Regime::classify(0.0, 1.0, 1e3), Regime::Transparent);
        assert_eq!(Regime::classify(1e-7, 1.0, 1e3), Regime::Transparent);
        assert_eq!(Regime::classify(1e3, 1.0, 1e3), Regime::PerfectLimit);
        assert_eq!(Regime::classify(1.0, 1e3, 1e3), Regime::SemiTransparent);
        assert_eq!(Regime::classify(1.0, 100.0, 1e3), Regime::Intermediate);
    }

    #[test]
    fn perfect_asymptotic_examples() {
        let b = beta_rr_perfect_asymptotic(1.0, 1.0, 100.0).unwrap();
        let expect = 1.0 / (200.0 * PI) / ((2.0 * PI).exp() - 1.0);
        assert!(close(b.modulus_sq(), expect, 1e-12));
        assert!(close(expect, 2.977e-6, 1e-3));
        assert_eq!(b.err_estimate, ErrorEstimate::RegimeValid(true));
        let r = b.modulus_sq() / beta_rr_perfect_asymptotic(1.0, 2.0, 100.0).unwrap().modulus_sq();
        assert!(close(r, ((4.0 * PI).exp() - 1.0) / ((2.0 * PI).exp() - 1.0), 1e-11));
        assert!(close(r, 536.49, 1e-4));
        let far = beta_rr_perfect_asymptotic(1.0, 400.0, 1e5).unwrap().modulus_sq();
        assert!(far < 1e-300);
    }

    #[test]
    fn asymptotic_warns_outside_window() {
        let b = beta_rr_perfect_asymptotic(1.0, 1.0, 5.0).unwrap();
        assert_eq!(b.err_estimate, ErrorEstimate::RegimeValid(false));
        assert!(!b.warnings.is_empty());
        let b = beta_rr_semi_asymptotic(1.0, 50.0, 1.0, 100.0).unwrap();
        assert!(b.warnings.iter().any(|w| matches!(w, RegimeWarning::CouplingNotSmall { .. })));
    }

    #[test]
    fn semi_asymptotic_examples() {
        let b = beta_rr_semi_asymptotic(1.0, 1.0, 1.0, 200.0).unwrap();
        let expect = 1.0 / (2.0 * PI) * (1.0 / 200.0f64).powi(2) / ((2.0 * PI).exp() + 1.0);
        assert!(close(b.modulus_sq(), expect, 1e-12));
        assert!(close(expect, 7.40e-9, 5e-3));
        // ω → 0: Fermi factor → 1/2, so |β|² ω → (1/2πk)(α/ω′)²/2
        let w = 1e-9;
        let small = beta_rr_semi_asymptotic(1.0, 1.0, w, 200.0).unwrap().modulus_sq() * w;
        assert!(close(small, 0.5 / (2.0 * PI) / 200.0f64.powi(2), 1e-8));
    }

    #[test]
    fn closed_form_modulus_identities() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let k = rng.gen_range(0.05..5.0);
            let w = rng.gen_range(0.01..10.0) * k;
            let wp = rng.gen_range(10.0..1e4) * k;
            let a = rng.gen_range(1e-3..1.0) * wp;
            let p = beta_rr_perfect_asymptotic(k, w, wp).unwrap().modulus_sq();
            assert!(close(p, perfect_scalar_modulus_sq(k, w, wp), 1e-12));
            assert!(close(p, 1.0 / (2.0 * PI * wp * k) / (2.0 * PI * w / k).exp_m1(), 1e-12));
            let s = beta_rr_semi_asymptotic(k, a, w, wp).unwrap().modulus_sq();
            assert!(close(s, semi_scalar_modulus_sq(k, a, w, wp), 1e-12));
            let fermi = 1.0 / ((2.0 * PI * w / k).exp() + 1.0);
            assert!(close(s, (a / wp).powi(2) / (2.0 * PI * k * w) * fermi, 1e-12));
        }
    }

    #[test]
    fn collapse_integral_paths_agree() {
        let cfg = QuadratureConfig::default();
        for &(nu, lambda, m, ku0) in &[(1.0, 50.0, 0.0, 30.0), (0.3, 700.0, -0.5, 12.0), (2.0, 5.0, 0.0, 3.0)] {
            let a = (-ku0 as f64).exp();
            let re = collapse_integral_real(nu, lambda, m, ku0, &cfg).unwrap().value;
            let co = collapse_integral_contour(nu, lambda, m, a, &cfg).unwrap().value;
            assert!((re - co).norm() < 1e-9 * re.norm().max(1e-3), "{nu} {lambda} {m}: {re} vs {co}");
        }
    }

    #[test]
    fn perfect_numeric_planck_point() {
        let traj = CollapseTrajectory::finite(1.0, 30.0).unwrap();
        let b = beta_rr_perfect_numeric(&traj, 1.0, 100.0, &QuadratureConfig::default()).unwrap();
        let expect = 1.0 / (200.0 * PI) / ((2.0 * PI).exp() - 1.0);
        assert!(close(b.modulus_sq(), expect, 0.05), "{} vs {expect}", b.modulus_sq());
        assert!(b.warnings.is_empty());
        let c = beta_rr_perfect_numeric_via(&traj, 1.0, 100.0, IntegrationPath::SteepestDescent, &QuadratureConfig::default()).unwrap();
        assert!((b.value - c.value).norm() < 1e-8 * b.value.norm(), "{} vs {}", b.value, c.value);
    }

    #[test]
    fn static_mirror_creates_nothing() {
        let traj = CollapseTrajectory::finite(1.0, 0.0).unwrap();
        for &(w, wp) in &[(1.0, 0.01), (0.3, 5.0), (2.0, 100.0)] {
            let b = beta_rr_perfect_numeric(&traj, w, wp, &QuadratureConfig::default()).unwrap();
            assert!(b.modulus_sq() < 1e-20, "{w} {wp}: {}", b.modulus_sq());
        }
    }

    #[test]
    fn eternal_trajectory_rejected() {
        let traj = CollapseTrajectory::eternal(1.0).unwrap();
        let cfg = QuadratureConfig::default();
        assert!(matches!(beta_rr_perfect_numeric(&traj, 1.0, 10.0, &cfg), Err(Error::Unsupported(_))));
        assert!(matches!(beta_rl_semi_numeric(&traj, 1.0, 1.0, 10.0, &cfg), Err(Error::Unsupported(_))));
    }

    #[test]
    fn semi_numeric_zero_coupling() {
        let traj = CollapseTrajectory::finite(1.0, 30.0).unwrap();
        let b = beta_rr_semi_numeric(&traj, 0.0, 1.0, 200.0, &QuadratureConfig::default()).unwrap();
        assert_eq!(b.value, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn semi_numeric_exchanged_matches_nested() {
        let traj = CollapseTrajectory::finite(1.0, 12.0).unwrap();
        let cfg = QuadratureConfig::default();
        for &(alpha, w, wp) in &[(1.0, 1.0, 30.0), (0.3, 0.5, 12.0), (40.0, 1.0, 20.0)] {
            let a = beta_rr_semi_numeric(&traj, alpha, w, wp, &cfg).unwrap().value;
            let b = beta_rr_semi_numeric_nested(&traj, alpha, w, wp, &cfg).unwrap().value;
            assert!((a - b).norm() < 1e-7 * a.norm(), "{alpha} {w} {wp}: {a} vs {b}");
        }
    }

    #[test]
    fn semi_numeric_ceiling() {
        let traj = CollapseTrajectory::finite(1.0, 30.0).unwrap();
        let r = beta_rr_semi_numeric(&traj, 1.0, 1.0, 2e6, &QuadratureConfig::default());
        assert!(matches!(r, Err(Error::SubdivisionLimit { .. })));
    }

    #[test]
    fn transparent_mode_limits() {
        let traj = CollapseTrajectory::finite(1.0, 10.0).unwrap();
        let w = 2.0;
        let norm = 1.0 / (4.0 * PI * w).sqrt();
        for &u in &[-3.0, 0.5, 4.0, 12.0] {
            let refl = mode_refl_scalar(&traj, 1e-8, w, u).unwrap();
            let trans = mode_trans_scalar(&traj, 1e-8, w, u).unwrap();
            assert!(refl.norm() < 1e-6, "u = {u}");
            assert!((trans - norm * (-I * w * u).exp()).norm() < 1e-6, "u = {u}");
        }
    }

    #[test]
    fn perfect_reflection_mode_limit() {
        let traj = CollapseTrajectory::finite(1.0, 10.0).unwrap();
        let w = 2.0;
        let norm = 1.0 / (4.0 * PI * w).sqrt();
        let refl = mode_refl_scalar(&traj, 1e6, w, -1.0).unwrap();
        let expect = -norm * (-I * w * traj.ray_advance(-1.0)).exp();
        assert!((refl - expect).norm() < 1e-5);
        // inside the acceleration phase the limit holds up to O(ω/α)
        for &u in &[0.5, 3.0, 12.0] {
            let refl = mode_refl_scalar(&traj, 1e6, w, u).unwrap();
            let expect = -norm * (-I * w * traj.ray_advance(u)).exp();
            assert!((refl - expect).norm() < 1e-4, "u = {u}: {refl} vs {expect}");
            let trans = mode_trans_scalar(&traj, 1e6, w, u).unwrap();
            assert!(trans.norm() < 1e-4, "u = {u}");
        }
    }

    #[test]
    fn mode_branch_continuity() {
        let traj = CollapseTrajectory::finite(1.0, 5.0).unwrap();
        for &(alpha, w) in &[(1.0, 2.0), (0.2, 0.7), (30.0, 3.0)] {
            for &u in &[0.0, 5.0] {
                let eps = 1e-12;
                for f in [mode_refl_scalar, mode_trans_scalar] {
                    let l = f(&traj, alpha, w, u - eps).unwrap();
                    let r = f(&traj, alpha, w, u + eps).unwrap();
                    assert!((l - r).norm() < 1e-7, "α={alpha} ω={w} u={u}: {l} vs {r}");
                }
            }
        }
    }

    #[test]
    fn printed_exponent_breaks_continuity() {
        let traj = CollapseTrajectory::finite(1.0, 5.0).unwrap();
        let opts = ModeOptions { refl_exponent: ReflExponent::AsPrinted, ..Default::default() };
        let l = mode_refl_scalar_with(&traj, 1.0, 2.0, 5.0, &opts).unwrap();
        let r = mode_refl_scalar_with(&traj, 1.0, 2.0, 5.0 + 1e-12, &opts).unwrap();
        assert!((l - r).norm() > 1e-4);
    }

    #[test]
    fn rl_vanishes_without_coupling() {
        let traj = CollapseTrajectory::finite(1.0, 30.0).unwrap();
        let cfg = QuadratureConfig::default();
        assert_eq!(beta_rl_semi_numeric(&traj, 0.0, 1.0, 200.0, &cfg).unwrap().value.norm(), 0.0);
        let b = beta_rl_semi_numeric(&traj, 1e-6, 1.0, 200.0, &cfg).unwrap();
        assert!(b.modulus_sq() < 1e-12, "{}", b.modulus_sq());
    }
}
