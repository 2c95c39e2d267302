//! Frequency-integrated observables: particle number per mode, radiated
//! energy, emission rate and the response of an inertial detector.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_tail, QuadratureConfig, TailEnvelope};
use crate::scalar_mirror::{
    beta_rl_semi_numeric, beta_rr_perfect_numeric_via, perfect_endpoint_split, beta_rr_semi_numeric_via, check_alpha, check_positive,
    IntegrationPath, Method,
};
use crate::specfun::{bose_factor, fermi_factor};
use crate::trajectory::CollapseTrajectory;

/// Relative tolerance of the outer `ω′` integrals.
pub const SPECTRUM_REL_TOL: f64 = 1e-4;

/// `|β^{RL}|²/|β^{RR}|²` at `ω′ = 2k` below which the `RL` channel is
/// dropped from `N_ω`.
pub const RL_SHORTCUT_RATIO: f64 = 1e-3;

/// Once `|β^{RL}|²/|β^{RR}|²` falls below this, the `RL` channel is left
/// out of the remaining `ω′` range.
pub const RL_NEGLIGIBLE_RATIO: f64 = 1e-7;

/// Beyond this `ω′/k` the perfect-mirror `N_ω` integrand is phase-averaged
/// over the interference between the two kinks of the trajectory.
pub const PHASE_AVERAGE_SWITCH: f64 = 1e3;

/// Asymptotic `N_ω` assumes `k ≪ 1`; at or above this value it is flagged.
pub const SMALL_K_LIMIT: f64 = 0.1;

/// Above this `ω′/k` the oscillatory integrals are taken along the
/// deformed contour.
pub const CONTOUR_SWITCH: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Field {
    Scalar,
    Dirac,
}

impl Field {
    pub fn tag(&self) -> &'static str {
        match self {
            Field::Scalar => "scalar",
            Field::Dirac => "dirac",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Observable {
    BetaSq,
    NOmega,
    ResponseF,
    ResponseP,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumParams {
    pub k: f64,
    pub u0: Option<f64>,
    pub alpha: Option<f64>,
    pub field: Field,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTable {
    omega_grid: Vec<f64>,
    values: Vec<f64>,
    observable: Observable,
    params: SpectrumParams,
    method: Method,
}

impl SpectrumTable {
    /// Checks that the grid is strictly increasing and that the values are
    /// finite and non-negative.
    pub fn new(
        omega_grid: Vec<f64>,
        values: Vec<f64>,
        observable: Observable,
        params: SpectrumParams,
        method: Method,
    ) -> Result<Self> {
        if omega_grid.len() != values.len() {
            return Err(Error::domain(format!(
                "grid has {} points but {} values were given",
                omega_grid.len(),
                values.len()
            )));
        }
        if omega_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("frequency grid must be strictly increasing"));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::domain(format!("spectrum values must be finite and non-negative, got {v}")));
        }
        Ok(Self { omega_grid, values, observable, params, method })
    }

    pub fn omega_grid(&self) -> &[f64] {
        &self.omega_grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn observable(&self) -> Observable {
        self.observable
    }

    pub fn params(&self) -> SpectrumParams {
        self.params
    }

    pub fn method(&self) -> Method {
        self.method
    }
}

/// Occupation factor appearing in the asymptotic observables.
///
/// | field  | perfect mirror | semi-transparent |
/// |--------|----------------|------------------|
/// | scalar | Bose           | Fermi            |
/// | Dirac  | Fermi          | Bose             |
pub fn occupation(field: Field, perfect: bool, x: f64) -> f64 {
    match (field, perfect) {
        (Field::Scalar, true) | (Field::Dirac, false) => bose_factor(x),
        (Field::Scalar, false) | (Field::Dirac, true) => fermi_factor(x),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleNumber {
    pub value: f64,
    pub method: Method,
    pub err_estimate: f64,
    /// Perfect mirror: the number grows without bound with `u0`; the value is
    /// for the given trajectory only.
    pub divergent: bool,
    /// Numeric only: the `ω′ ∈ [0, k)` contribution.
    pub infrared: Option<f64>,
    /// Numeric only: whether `|β^{RL}|²` was integrated.
    pub rl_included: Option<bool>,
    pub warnings: Vec<String>,
}

/// `(1/2πω)(α/k)²` times the occupation factor.
pub fn particle_number_asymptotic(omega: f64, k: f64, alpha: f64, field: Field) -> f64 {
    (alpha / k).powi(2) / (2.0 * PI * omega) * occupation(field, false, omega / k)
}

/// `N_ω = ∫₀^∞ dω′ (|β^{RR}|² + |β^{RL}|²)`.
///
/// `alpha = None` is the perfect mirror. The numeric path splits the
/// integral at `ω′ = k`: below it the mirror acts as a perfect reflector
/// and the perfect-mirror coefficient is integrated; above it the
/// semi-transparent coefficient is integrated to infinity under an `ω′⁻²`
/// envelope.
pub fn particle_number(
    omega: f64,
    field: Field,
    traj: &CollapseTrajectory,
    alpha: Option<f64>,
    cfg: &QuadratureConfig,
    method: Method,
) -> Result<ParticleNumber> {
    check_positive("omega", omega)?;
    if let Some(a) = alpha {
        check_alpha(a)?;
    }
    let k = traj.k();
    let mut warnings = Vec::new();
    match method {
        Method::Asymptotic => match alpha {
            Some(a) => {
                if k >= SMALL_K_LIMIT {
                    warnings.push(format!("k={k} not small; infrared split assumes k << 1"));
                }
                Ok(ParticleNumber {
                    value: particle_number_asymptotic(omega, k, a, field),
                    method,
                    err_estimate: 0.0,
                    divergent: false,
                    infrared: None,
                    rl_included: None,
                    warnings,
                })
            }
            None => {
                if !traj.is_finite() {
                    return Err(Error::Unsupported("perfect-mirror particle number grows without bound".into()));
                }
                // t0 ≈ u0/2 times the asymptotic rate
                let t0 = traj.u0() / 2.0;
                warnings.push("perfect mirror: value grows with u0".into());
                Ok(ParticleNumber {
                    value: t0 / PI * occupation(field, true, omega / k),
                    method,
                    err_estimate: 0.0,
                    divergent: true,
                    infrared: None,
                    rl_included: None,
                    warnings,
                })
            }
        },
        Method::Numeric => {
            if field == Field::Dirac {
                return Err(Error::Unsupported(
                    "numeric Dirac particle number: |β|² ~ 1/ω′² at small ω′ makes the infrared part diverge".into(),
                ));
            }
            if !traj.is_finite() {
                return Err(Error::Unsupported("numeric particle number needs a finite-collapse trajectory".into()));
            }
            if alpha == Some(0.0) {
                return Ok(ParticleNumber {
                    value: 0.0,
                    method,
                    err_estimate: 0.0,
                    divergent: false,
                    infrared: Some(0.0),
                    rl_included: Some(false),
                    warnings,
                });
            }
            scalar_numeric(omega, traj, alpha, cfg, warnings)
        }
    }
}

fn outer_cfg(cfg: &QuadratureConfig) -> QuadratureConfig {
    QuadratureConfig {
        rel_tol: cfg.rel_tol.max(SPECTRUM_REL_TOL),
        abs_tol: 1e-30,
        oscillation_rate: None,
        ..*cfg
    }
}

fn perfect_sq(traj: &CollapseTrajectory, omega: f64, wp: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let path = if wp / traj.k() > CONTOUR_SWITCH { IntegrationPath::SteepestDescent } else { IntegrationPath::RealAxis };
    Ok(beta_rr_perfect_numeric_via(traj, omega, wp, path, &scaled_cfg(cfg, wp / traj.k()))?.modulus_sq())
}

/// `|β|` falls at least like `k/ω′` far out; keep the absolute tolerance
/// below it.
fn scaled_cfg(cfg: &QuadratureConfig, lambda: f64) -> QuadratureConfig {
    QuadratureConfig { abs_tol: cfg.abs_tol / lambda.max(1.0), ..*cfg }
}

/// `|near|² + |far|²` from [`perfect_endpoint_split`]: `|β|²` with the
/// cross term, which turns over once per `2π/v0` in `ω′`, averaged out.
fn averaged_perfect_sq(traj: &CollapseTrajectory, omega: f64, wp: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let (near, far) = perfect_endpoint_split(traj, omega, wp, &scaled_cfg(cfg, wp / traj.k()))?;
    Ok(near.norm_sqr() + far.norm_sqr())
}

fn semi_rr_sq(traj: &CollapseTrajectory, alpha: f64, omega: f64, wp: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let lambda = wp / traj.k();
    // the rotated path pays for 2α/k oscillations of the inner integral
    let path = if lambda > CONTOUR_SWITCH && 2.0 * alpha <= wp {
        IntegrationPath::SteepestDescent
    } else {
        IntegrationPath::RealAxis
    };
    Ok(beta_rr_semi_numeric_via(traj, alpha, omega, wp, path, &scaled_cfg(cfg, lambda))?.modulus_sq())
}

/// First `ω′ = 2^n·2k` where `RL` has dropped below [`RL_NEGLIGIBLE_RATIO`]
/// of `RR`.
fn rl_cutoff(traj: &CollapseTrajectory, alpha: f64, omega: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let mut wp = 2.0 * traj.k();
    for _ in 0..60 {
        let rr = semi_rr_sq(traj, alpha, omega, wp, cfg)?;
        let rl = beta_rl_semi_numeric(traj, alpha, omega, wp, cfg)?.modulus_sq();
        if rl < RL_NEGLIGIBLE_RATIO * rr {
            return Ok(wp);
        }
        wp *= 2.0;
    }
    Ok(f64::INFINITY)
}

fn scalar_numeric(
    omega: f64,
    traj: &CollapseTrajectory,
    alpha: Option<f64>,
    cfg: &QuadratureConfig,
    mut warnings: Vec<String>,
) -> Result<ParticleNumber> {
    let k = traj.k();
    let ocfg = outer_cfg(cfg);
    let mut failure: Option<Error> = None;

    let ir = integrate(
        |wp| {
            Complex64::new(
                perfect_sq(traj, omega, wp, cfg).unwrap_or_else(|e| {
                    failure.get_or_insert(e);
                    0.0
                }),
                0.0,
            )
        },
        0.0,
        k,
        &ocfg,
    )?;
    if let Some(e) = failure.take() {
        return Err(e);
    }

    let (uv, rl_included, divergent) = match alpha {
        None => {
            warnings.push("perfect mirror: value grows with u0".into());
            let switch = PHASE_AVERAGE_SWITCH * k;
            let mut r = integrate(
                |wp| {
                    Complex64::new(
                        perfect_sq(traj, omega, wp, cfg).unwrap_or_else(|e| {
                            failure.get_or_insert(e);
                            0.0
                        }),
                        0.0,
                    )
                },
                k,
                switch,
                &ocfg.with_oscillation_rate(traj.v0()),
            )?;
            let far_out = integrate_tail(
                |wp| {
                    Complex64::new(
                        averaged_perfect_sq(traj, omega, wp, cfg).unwrap_or_else(|e| {
                            failure.get_or_insert(e);
                            0.0
                        }),
                        0.0,
                    )
                },
                switch,
                TailEnvelope::InversePower(2.0),
                &QuadratureConfig { abs_tol: ocfg.abs_tol.max(ocfg.rel_tol * r.value.norm()), ..ocfg },
            )?;
            r.add(&far_out);
            (r, false, true)
        }
        Some(a) => {
            let rr = semi_rr_sq(traj, a, omega, 2.0 * k, cfg)?;
            let rl = beta_rl_semi_numeric(traj, a, omega, 2.0 * k, cfg)?.modulus_sq();
            let with_rl = !(rl < RL_SHORTCUT_RATIO * rr);
            let cutoff = if with_rl { rl_cutoff(traj, a, omega, cfg)? } else { 0.0 };
            let r = integrate_tail(
                |wp| {
                    let mut v = semi_rr_sq(traj, a, omega, wp, cfg).unwrap_or_else(|e| {
                        failure.get_or_insert(e);
                        0.0
                    });
                    if wp < cutoff {
                        match beta_rl_semi_numeric(traj, a, omega, wp, cfg) {
                            Ok(b) => v += b.modulus_sq(),
                            Err(e) => {
                                failure.get_or_insert(e);
                            }
                        }
                    }
                    Complex64::new(v, 0.0)
                },
                k,
                TailEnvelope::InversePower(2.0),
                &ocfg,
            )?;
            (r, with_rl, false)
        }
    };
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(ParticleNumber {
        value: ir.value.re + uv.value.re,
        method: Method::Numeric,
        err_estimate: ir.err_estimate + uv.err_estimate,
        divergent,
        infrared: Some(ir.value.re),
        rl_included: Some(rl_included),
        warnings,
    })
}

/// Order-of-magnitude size of the `[0, k)` contribution,
/// `k²/(ω(ω²+k²))`.
pub fn infrared_scale(omega: f64, k: f64) -> f64 {
    k * k / (omega * (omega * omega + k * k))
}

/// `∫₀^∞ (e^x + 1)^{-1} dx` by quadrature; equals `ln 2`.
pub fn fermi_integral(cfg: &QuadratureConfig) -> Result<f64> {
    let r = integrate_tail(|x| Complex64::new(1.0 / (x.exp() + 1.0), 0.0), 0.0, TailEnvelope::Exponential(1.0), cfg)?;
    Ok(r.value.re)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadiatedEnergy {
    pub value: f64,
    pub method: Method,
    pub err_estimate: f64,
}

/// `ℰ = ∫₀^∞ ω N_ω dω` for the semi-transparent scalar mirror.
///
/// `Asymptotic` is `α² ln2/(4π²k)`; `Numeric` integrates `ω` times the
/// asymptotic `N_ω`.
pub fn radiated_energy(
    traj: &CollapseTrajectory,
    alpha: f64,
    field: Field,
    cfg: &QuadratureConfig,
    method: Method,
) -> Result<RadiatedEnergy> {
    check_alpha(alpha)?;
    if field != Field::Scalar {
        return Err(Error::Unsupported(
            "radiated energy: the Dirac spectrum behaves as 1/ω² at small ω".into(),
        ));
    }
    let k = traj.k();
    match method {
        Method::Asymptotic => Ok(RadiatedEnergy { value: energy_closed_form(k, alpha), method, err_estimate: 0.0 }),
        Method::Numeric => {
            if alpha == 0.0 {
                return Ok(RadiatedEnergy { value: 0.0, method, err_estimate: 0.0 });
            }
            let mut ecfg = *cfg;
            ecfg.abs_tol = cfg.abs_tol.min(1e-6 * energy_closed_form(k, alpha));
            let r = integrate_tail(
                |w| Complex64::new(w * particle_number_asymptotic(w, k, alpha, field), 0.0),
                0.0,
                TailEnvelope::Exponential(2.0 * PI / k),
                &ecfg,
            )?;
            Ok(RadiatedEnergy { value: r.value.re, method, err_estimate: r.err_estimate })
        }
    }
}

/// `α² ln2/(4π²k)`.
pub fn energy_closed_form(k: f64, alpha: f64) -> f64 {
    alpha * alpha * LN_2 / (4.0 * PI * PI * k)
}

/// Long-time emission rate of the perfect mirror, `(1/π)(e^{2πω/k}−1)^{-1}`.
pub fn rate_per_unit_time(omega: f64, k: f64) -> f64 {
    bose_factor(omega / k) / PI
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorResponse {
    pub value: f64,
    pub method: Method,
    /// Perfect mirror: the response grows without bound with `u0`.
    pub divergent: bool,
}

/// `F(ω) = π N_ω/ω` for an inertial detector at rest.
pub fn detector_response(
    omega: f64,
    field: Field,
    traj: &CollapseTrajectory,
    alpha: Option<f64>,
    cfg: &QuadratureConfig,
    method: Method,
) -> Result<DetectorResponse> {
    let n = particle_number(omega, field, traj, alpha, cfg, method)?;
    Ok(DetectorResponse { value: PI * n.value / omega, method, divergent: n.divergent })
}

/// `(1/2ω²)(α/k)²` times the semi-transparent occupation factor.
pub fn detector_response_closed_form(omega: f64, k: f64, alpha: f64, field: Field) -> f64 {
    (alpha / k).powi(2) / (2.0 * omega * omega) * occupation(field, false, omega / k)
}

/// `P(ω) = (1/ω)(e^{2πω/k}−1)^{-1}`.
pub fn detector_response_rate(omega: f64, k: f64) -> f64 {
    bose_factor(omega / k) / omega
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthReport {
    pub u0_values: Vec<f64>,
    pub n_values: Vec<f64>,
    /// `dN/dt0` with `t0 = u0/2`, least squares.
    pub linear_slope: f64,
    pub linear_residual: f64,
    /// `dN/d ln u0`, least squares.
    pub log_slope: f64,
    pub log_residual: f64,
    /// `(1/π)(e^{2πω/k}−1)^{-1}`.
    pub expected_rate: f64,
}

/// Measures how the perfect-mirror `N_ω` grows with `u0`: fits `N` against
/// `t0 = u0/2` and against `ln u0`, reporting both.
pub fn growth_probe(k: f64, omega: f64, u0_values: &[f64], cfg: &QuadratureConfig) -> Result<GrowthReport> {
    if u0_values.len() < 2 {
        return Err(Error::domain("growth probe needs at least two u0 values"));
    }
    let mut n_values = Vec::with_capacity(u0_values.len());
    for &u0 in u0_values {
        let traj = CollapseTrajectory::finite(k, u0)?;
        n_values.push(particle_number(omega, Field::Scalar, &traj, None, cfg, Method::Numeric)?.value);
    }
    let t0: Vec<f64> = u0_values.iter().map(|u| u / 2.0).collect();
    let lnu: Vec<f64> = u0_values.iter().map(|u| u.ln()).collect();
    let (linear_slope, linear_residual) = least_squares(&t0, &n_values);
    let (log_slope, log_residual) = least_squares(&lnu, &n_values);
    Ok(GrowthReport {
        u0_values: u0_values.to_vec(),
        n_values,
        linear_slope,
        linear_residual,
        log_slope,
        log_residual,
        expected_rate: rate_per_unit_time(omega, k),
    })
}

/// Slope and RMS residual of a straight-line fit.
pub(crate) fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    let res = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let d = b - (my + slope * (a - mx));
            d * d
        })
        .sum::<f64>()
        / n;
    (slope, res.sqrt())
}
