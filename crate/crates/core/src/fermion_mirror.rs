//! Massless Dirac field in 1+1 dimensions in front of the collapsing mirror.
//!
//! With `γ⁰ = σ_x`, `γ¹ = −iσ_y` the field splits as `ψ = (F(u), G(v))`.
//! A perfect mirror imposes `V′(u)|G|² − |F|² = 0` on the trajectory.
//! Products on the right future null infinity use the plain transpose
//! `∫ (ψ^out)ᵗ ψ du`; only the upper components survive there.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::Result;
use crate::quadrature::{integrate_segments, QuadratureConfig};
use crate::scalar_mirror::{
    asymptotic, check_alpha, check_positive, collapse_integral, coupling_warning, gaussian_phase_inner,
    power_inner, require_finite, thermal_closed_form, trans_overlap, upper_anchored, validity_warnings,
    BetaCoefficient, BetaParams, Channel, ErrorEstimate, IntegrationPath, Method, TransKind,
};
use crate::specfun::{gamma_abs_sq_half_plus, gamma_abs_sq_one_plus};
use crate::trajectory::CollapseTrajectory;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn inv_sqrt_2pi() -> f64 {
    1.0 / (2.0 * PI).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinorValue {
    /// `F(u)`
    pub upper: Complex64,
    /// `G(v)`
    pub lower: Complex64,
}

impl SpinorValue {
    pub fn new(upper: Complex64, lower: Complex64) -> Self {
        Self { upper, lower }
    }

    pub fn zero() -> Self {
        Self::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
    }

    pub fn up(upper: Complex64) -> Self {
        Self::new(upper, Complex64::new(0.0, 0.0))
    }

    pub fn norm(&self) -> f64 {
        (self.upper.norm_sqr() + self.lower.norm_sqr()).sqrt()
    }
}

/// `V′(u)|G|² − |F|²`, proportional to the normal current through the
/// mirror at retarded time `u`.
pub fn dirac_current_normal(traj: &CollapseTrajectory, psi: &SpinorValue, u: f64) -> f64 {
    traj.ray_velocity(u) * psi.lower.norm_sqr() - psi.upper.norm_sqr()
}

/// Right `in` mode of the perfect mirror,
/// `(2π)^{-1/2}[(0,1)e^{−iωv} − √V′(u) (1,0) e^{−iωV(u)}]` for `v ≥ V(u)`.
pub fn perfect_in_mode(traj: &CollapseTrajectory, omega: f64, u: f64, v: f64) -> Result<SpinorValue> {
    check_positive("omega", omega)?;
    if v < traj.ray_advance(u) {
        return Ok(SpinorValue::zero());
    }
    let n = inv_sqrt_2pi();
    Ok(SpinorValue::new(
        -n * traj.ray_velocity(u).sqrt() * (-I * omega * traj.ray_advance(u)).exp(),
        n * (-I * omega * v).exp(),
    ))
}

/// Which component carries the reflected wave of the perfect-mirror out
/// mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutModeVariant {
    /// Reflected wave in the lower component; satisfies the boundary
    /// condition.
    #[default]
    Corrected,
    /// Both terms in the upper component (literal form).
    AsPrinted,
}

/// Right `out` mode of the perfect mirror,
/// `(2π)^{-1/2}[(1,0)e^{−iωu} − √U′(v) (0,1) e^{−iωU(v)}]` for `v ≥ V(u)`.
pub fn perfect_out_mode(
    traj: &CollapseTrajectory,
    omega: f64,
    u: f64,
    v: f64,
    variant: OutModeVariant,
) -> Result<SpinorValue> {
    check_positive("omega", omega)?;
    if v < traj.ray_advance(u) {
        return Ok(SpinorValue::zero());
    }
    let n = inv_sqrt_2pi();
    let direct = n * (-I * omega * u).exp();
    let uv = traj.ray_retard(v)?;
    let reflected = -n * (1.0 / traj.ray_velocity(uv)).sqrt() * (-I * omega * uv).exp();
    Ok(match variant {
        OutModeVariant::Corrected => SpinorValue::new(direct, reflected),
        OutModeVariant::AsPrinted => SpinorValue::up(direct + reflected),
    })
}

/// Decay used in the final branch of the transmitted Dirac mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TransBranchVariant {
    /// `e^{−α√A(ū−ū0)}` on the mixing term (literal form).
    #[default]
    AsPrinted,
    /// `e^{−α(ū−ū0)}` as in the scalar mode.
    ScalarAnalogue,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FermionOptions {
    pub quadrature: QuadratureConfig,
    pub trans_variant: TransBranchVariant,
    /// Pair `conj(ψ^out)` with `ψ^in` instead of the plain transpose.
    pub conjugate_product: bool,
}

/// Reflected upper component `ψ^refl_{ω,R}(u)`.
pub fn mode_refl_fermion(traj: &CollapseTrajectory, alpha: f64, omega: f64, u: f64) -> Result<SpinorValue> {
    mode_refl_fermion_with(traj, alpha, omega, u, &FermionOptions::default())
}

pub fn mode_refl_fermion_with(
    traj: &CollapseTrajectory,
    alpha: f64,
    omega: f64,
    u: f64,
    opts: &FermionOptions,
) -> Result<SpinorValue> {
    check_alpha(alpha)?;
    check_positive("omega", omega)?;
    let n = inv_sqrt_2pi();
    let r = -I * alpha / Complex64::new(omega, alpha);
    if u <= 0.0 {
        return Ok(SpinorValue::up(n * r * traj.ray_velocity(u).sqrt() * (-I * omega * u).exp()));
    }
    if alpha == 0.0 {
        return Ok(SpinorValue::zero());
    }
    let k = traj.k();
    let nu = omega / k;
    let c = 2.0 * alpha / k;
    let cfg = &opts.quadrature;
    let ubar = traj.comoving_u(u);
    let amp = traj.comoving_u_rate(u).sqrt();
    let head = r * amp * (-alpha * ubar).exp();
    if u <= traj.u0() {
        let q = (-0.5 * k * u).exp();
        let j = gaussian_phase_inner(q, nu, 0.5, c, cfg)?;
        return Ok(SpinorValue::up(n * (head - c * (-I * nu).exp() * amp * j)));
    }
    let q0 = traj.final_slope().sqrt();
    let decay = (-alpha * (ubar - traj.ubar0())).exp();
    let j0 = gaussian_phase_inner(q0, nu, 0.5, c, cfg)?;
    let bracket = I * alpha * traj.ray_velocity(u).sqrt() / Complex64::new(q0 * omega, alpha)
        * ((-I * omega * traj.ray_advance(u)).exp() - (-I * omega * traj.v0()).exp() * decay);
    Ok(SpinorValue::up(n * (head - bracket - c * (-I * nu).exp() * amp * decay * j0)))
}

/// Transmitted upper component `ψ^trans_{ω,L}(u)`.
pub fn mode_trans_fermion(traj: &CollapseTrajectory, alpha: f64, omega: f64, u: f64) -> Result<SpinorValue> {
    mode_trans_fermion_with(traj, alpha, omega, u, &FermionOptions::default())
}

pub fn mode_trans_fermion_with(
    traj: &CollapseTrajectory,
    alpha: f64,
    omega: f64,
    u: f64,
    opts: &FermionOptions,
) -> Result<SpinorValue> {
    check_alpha(alpha)?;
    check_positive("omega", omega)?;
    let n = inv_sqrt_2pi();
    let plane = (-I * omega * u).exp();
    if u <= 0.0 {
        let s = Complex64::new(omega, 0.0) / Complex64::new(omega, alpha);
        return Ok(SpinorValue::up(n * s * plane));
    }
    if alpha == 0.0 {
        return Ok(SpinorValue::up(n * plane));
    }
    let k = traj.k();
    let nu = omega / k;
    let c = 2.0 * alpha / k;
    let cfg = &opts.quadrature;
    let r = -I * alpha / Complex64::new(omega, alpha);
    let ubar = traj.comoving_u(u);
    let amp = traj.comoving_u_rate(u).sqrt();
    let head = r * amp * (-alpha * ubar).exp();
    if u <= traj.u0() {
        let q = (-0.5 * k * u).exp().max(f64::MIN_POSITIVE);
        let j = power_inner(q, nu, -0.5, c, cfg)?;
        return Ok(SpinorValue::up(n * (plane + head - c * amp * j)));
    }
    let q0 = traj.final_slope().sqrt();
    let shift = ubar - traj.ubar0();
    let decay = (-alpha * shift).exp();
    let mix_decay = match opts.trans_variant {
        TransBranchVariant::AsPrinted => (-alpha * q0 * shift).exp(),
        TransBranchVariant::ScalarAnalogue => decay,
    };
    let j0 = power_inner(q0, nu, -0.5, c, cfg)?;
    let mid = (-I * omega * traj.u0()).exp() / Complex64::new(omega, alpha * q0)
        * (omega * (-I * omega * (u - traj.u0())).exp() + I * alpha * q0 * mix_decay);
    Ok(SpinorValue::up(n * (head + mid - c * amp * decay * j0)))
}

fn coefficient(value: Complex64, channel: Channel, err: f64, params: BetaParams) -> BetaCoefficient {
    BetaCoefficient {
        value,
        channel,
        method: Method::Numeric,
        err_estimate: ErrorEstimate::Bound(err),
        params,
        warnings: validity_warnings(params.k, params.u0, params.omega, params.omega_prime),
    }
}

/// `β^{RR} ≅ 1/(2πiω′) − (1/2πk) ∫₀^{1−A} (1−s)^{iω/k−1/2} e^{−iω′s/k} ds`.
///
/// The `(1−s)^{−1/2}` endpoint is removed by `t = −ln(1−s)`.
pub fn beta_rr_perfect_fermion_numeric(
    traj: &CollapseTrajectory,
    omega: f64,
    omega_prime: f64,
    cfg: &QuadratureConfig,
) -> Result<BetaCoefficient> {
    beta_rr_perfect_fermion_numeric_via(traj, omega, omega_prime, IntegrationPath::RealAxis, cfg)
}

pub fn beta_rr_perfect_fermion_numeric_via(
    traj: &CollapseTrajectory,
    omega: f64,
    omega_prime: f64,
    path: IntegrationPath,
    cfg: &QuadratureConfig,
) -> Result<BetaCoefficient> {
    require_finite(traj, "beta_rr_perfect_fermion_numeric")?;
    check_positive("omega", omega)?;
    check_positive("omega_prime", omega_prime)?;
    let k = traj.k();
    let coef = 1.0 / (2.0 * PI * k);
    let mut icfg = *cfg;
    icfg.abs_tol = cfg.abs_tol / coef;
    let integral = if traj.u0() == 0.0 {
        Default::default()
    } else {
        collapse_integral(traj, omega / k, omega_prime / k, -0.5, path, &icfg)?.value
    };
    let value = 1.0 / (2.0 * PI * I * omega_prime) - coef * integral;
    let params = BetaParams { k, u0: Some(traj.u0()), alpha: None, omega, omega_prime };
    Ok(coefficient(value, Channel::RR, 0.0, params))
}

/// `(1/2πk) e^{−iω′/k} (ik/ω′)^{iω/k+1/2} Γ(1/2+iω/k)`, modulus squared
/// `(1/2πω′k)(e^{2πω/k}+1)^{-1}`.
pub fn beta_rr_perfect_fermion_asymptotic(k: f64, omega: f64, omega_prime: f64) -> Result<BetaCoefficient> {
    check_positive("k", k)?;
    check_positive("omega", omega)?;
    check_positive("omega_prime", omega_prime)?;
    let core = thermal_closed_form(k, omega, omega_prime, 0.5, 0.5)?;
    let value = core * Complex64::new(0.0, -omega_prime / k).exp() / (2.0 * PI * k);
    let params = BetaParams { k, u0: None, alpha: None, omega, omega_prime };
    Ok(asymptotic(value, params, validity_warnings(k, None, omega, omega_prime)))
}

pub fn perfect_fermion_modulus_sq(k: f64, omega: f64, omega_prime: f64) -> f64 {
    let nu = omega / k;
    gamma_abs_sq_half_plus(nu) * (-PI * nu).exp() / (4.0 * PI * PI * k * omega_prime)
}

/// Semi-transparent `β^{RR}`,
///
/// ```text
/// β ≅ (1/2π)(α/(ω′+iα))(1/(ω+ω′))
///   − (α e^{−iω′/k}/(k²π)) ∫_A^1 dx x^{iω/k−3/4} ∫₀^{1−√x} ds √(s+√x) e^{iω′(s+√x)²/k} e^{−2αs/k}
/// ```
///
/// With `x = t²`, `z = s + t` and the order exchanged, the double integral
/// is `∫_{√A}^1 dz √z e^{iλz²} ∫_{√A}^z 2t^{2iν−1/2} e^{−c(z−t)} dt`.
pub fn beta_rr_semi_fermion_numeric(
    traj: &CollapseTrajectory,
    alpha: f64,
    omega: f64,
    omega_prime: f64,
    cfg: &QuadratureConfig,
) -> Result<BetaCoefficient> {
    semi_fermion_impl(traj, alpha, omega, omega_prime, cfg, false)
}

/// [`beta_rr_semi_fermion_numeric`] in the original nesting.
pub fn beta_rr_semi_fermion_numeric_nested(
    traj: &CollapseTrajectory,
    alpha: f64,
    omega: f64,
    omega_prime: f64,
    cfg: &QuadratureConfig,
) -> Result<BetaCoefficient> {
    semi_fermion_impl(traj, alpha, omega, omega_prime, cfg, true)
}

fn semi_fermion_impl(
    traj: &CollapseTrajectory,
    alpha: f64,
    omega: f64,
    omega_prime: f64,
    cfg: &QuadratureConfig,
    nested: bool,
) -> Result<BetaCoefficient> {
    require_finite(traj, "beta_rr_semi_fermion_numeric")?;
    check_alpha(alpha)?;
    check_positive("omega", omega)?;
    check_positive("omega_prime", omega_prime)?;
    let k = traj.k();
    let params = BetaParams { k, u0: Some(traj.u0()), alpha: Some(alpha), omega, omega_prime };
    if alpha == 0.0 {
        return Ok(coefficient(Complex64::new(0.0, 0.0), Channel::RR, 0.0, params));
    }
    let (nu, lambda, c) = (omega / k, omega_prime / k, 2.0 * alpha / k);
    if lambda > crate::scalar_mirror::SEMI_LAMBDA_CEILING {
        return Err(crate::Error::SubdivisionLimit {
            value: Complex64::new(f64::NAN, f64::NAN),
            err_estimate: f64::INFINITY,
            limit: 0,
        });
    }
    let t0 = traj.final_slope().sqrt();
    let head = alpha / Complex64::new(omega_prime, alpha) / (2.0 * PI * (omega + omega_prime));
    let pre = -alpha * Complex64::new(0.0, -lambda).exp() / (k * k * PI);
    let inner = cfg.inner();
    let mut ocfg = *cfg;
    ocfg.abs_tol = cfg.abs_tol / pre.norm();
    let rate = |_: f64, hi: f64| 2.0 * nu + 2.0 * lambda * (2.0 * hi).exp();
    let mut failure = None;
    let outer = if nested {
        // x = t², t = e^w: 2 t^{2iν+1/2} K(t) dw
        let f = |w: f64| {
            let t = w.exp();
            let kk = gaussian_phase_inner(t, lambda, 0.5, c, &inner).unwrap_or_else(|e| {
                failure.get_or_insert(e);
                Complex64::new(0.0, 0.0)
            });
            2.0 * (Complex64::new(0.5, 2.0 * nu) * w).exp() * kk
        };
        integrate_segments(f, t0.ln(), 0.0, 0.5, rate, &ocfg)?
    } else {
        // z = e^w: z^{3/2} e^{iλz²} Q(z) dw
        let f = |w: f64| {
            let z = w.exp();
            let q = upper_anchored(z, t0, nu, -0.5, c, &inner).unwrap_or_else(|e| {
                failure.get_or_insert(e);
                Complex64::new(0.0, 0.0)
            });
            Complex64::new(1.5 * w, lambda * z * z).exp() * q
        };
        integrate_segments(f, t0.ln(), 0.0, 0.5, rate, &ocfg)?
    };
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(coefficient(head + pre * outer.value, Channel::RR, pre.norm() * outer.err_estimate, params))
}

/// `−(α/(2πiωk)) (ik/ω′)^{iω/k+1} Γ(1+iω/k)`, modulus squared
/// `(1/2πωk)(α/ω′)²(e^{2πω/k}−1)^{-1}`.
pub fn beta_rr_semi_fermion_asymptotic(k: f64, alpha: f64, omega: f64, omega_prime: f64) -> Result<BetaCoefficient> {
    check_positive("k", k)?;
    check_positive("omega", omega)?;
    check_positive("omega_prime", omega_prime)?;
    check_alpha(alpha)?;
    let core = thermal_closed_form(k, omega, omega_prime, 1.0, 1.0)?;
    let value = -alpha * core / (2.0 * PI * I * omega * k);
    let params = BetaParams { k, u0: None, alpha: Some(alpha), omega, omega_prime };
    let mut warnings = validity_warnings(k, None, omega, omega_prime);
    warnings.extend(coupling_warning(alpha, omega_prime));
    Ok(asymptotic(value, params, warnings))
}

pub fn semi_fermion_modulus_sq(k: f64, alpha: f64, omega: f64, omega_prime: f64) -> f64 {
    let nu = omega / k;
    let ratio = alpha / omega_prime;
    ratio * ratio * gamma_abs_sq_one_plus(nu) * (-PI * nu).exp() / (4.0 * PI * PI * omega * omega)
}

/// `β^{RL} = ∫ (ψ^out)ᵗ ψ^trans_{ω′,L} du` on the right future null
/// infinity, split along the branches of the transmitted mode.
pub fn beta_rl_semi_fermion_numeric(
    traj: &CollapseTrajectory,
    alpha: f64,
    omega: f64,
    omega_prime: f64,
    opts: &FermionOptions,
) -> Result<BetaCoefficient> {
    require_finite(traj, "beta_rl_semi_fermion_numeric")?;
    check_alpha(alpha)?;
    check_positive("omega", omega)?;
    check_positive("omega_prime", omega_prime)?;
    let k = traj.k();
    let params = BetaParams { k, u0: Some(traj.u0()), alpha: Some(alpha), omega, omega_prime };
    if alpha == 0.0 {
        return Ok(coefficient(Complex64::new(0.0, 0.0), Channel::RL, 0.0, params));
    }
    let pre = 1.0 / (2.0 * PI);
    let mut icfg = opts.quadrature;
    icfg.abs_tol /= pre;
    let kind = TransKind::Dirac {
        printed_decay: opts.trans_variant == TransBranchVariant::AsPrinted,
        sign: if opts.conjugate_product { -1.0 } else { 1.0 },
    };
    let sum = trans_overlap(traj, alpha, omega, omega_prime, kind, &icfg)?;
    Ok(coefficient(pre * sum.value, Channel::RL, pre * sum.err_estimate, params))
}
