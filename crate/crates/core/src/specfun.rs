//! Complex log-gamma and the modulus identities
//! `|Γ(1+ix)|² = πx/sinh(πx)` and `|Γ(1/2+ix)|² = π/cosh(πx)`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexValue = Complex64;

/// Builds a complex number, rejecting NaN and infinite components.
pub fn checked_complex(re: f64, im: f64) -> Result<ComplexValue> {
    if re.is_finite() && im.is_finite() {
        Ok(Complex64::new(re, im))
    } else {
        Err(Error::domain(format!("non-finite complex value ({re}, {im})")))
    }
}

// Lanczos approximation, g = 671/128, 14 terms.
const LANCZOS_G: f64 = 5.2421875;
const LANCZOS_C0: f64 = 0.999999999999997092;
const LANCZOS_COF: [f64; 14] = [
    57.1562356658629235,
    -59.5979603554754912,
    14.1360979747417471,
    -0.491913816097620199,
    0.339946499848118887e-4,
    0.465236289270485756e-4,
    -0.983744753048795646e-4,
    0.158088703224912494e-3,
    -0.210264441724104883e-3,
    0.217439618115212643e-3,
    -0.164318106536763890e-3,
    0.844182239838527433e-4,
    -0.261908384015814087e-4,
    0.368991826595316234e-5,
];
const SQRT_2PI: f64 = 2.5066282746310005024;

/// `ln Γ(z)` for `Re z > 0`.
///
/// The result is the analytic continuation of the real log-gamma from the
/// positive axis (imaginary part is not reduced modulo 2π), so
/// `exp(log_gamma(z)) = Γ(z)` and `Re log_gamma(z) = ln|Γ(z)|`.
pub fn log_gamma(z: ComplexValue) -> Result<ComplexValue> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::domain(format!("log_gamma: non-finite argument {z}")));
    }
    if z.re <= 0.0 {
        return Err(Error::domain(format!("log_gamma: Re z must be positive, got {z}")));
    }
    let zg = z + LANCZOS_G;
    let head = (z + 0.5) * zg.ln() - zg;
    let mut ser = Complex64::new(LANCZOS_C0, 0.0);
    for (j, c) in LANCZOS_COF.iter().enumerate() {
        ser += *c / (z + (j + 1) as f64);
    }
    Ok(head + (ser * SQRT_2PI).ln() - z.ln())
}

pub fn gamma(z: ComplexValue) -> Result<ComplexValue> {
    Ok(log_gamma(z)?.exp())
}

/// `|Γ(1+ix)|² = πx / sinh(πx)`; even in `x`, equal to 1 at `x = 0`.
pub fn gamma_abs_sq_one_plus(x: f64) -> f64 {
    let y = PI * x.abs();
    if y == 0.0 {
        1.0
    } else if y > 700.0 {
        2.0 * y * (-y).exp()
    } else if y < 1e-4 {
        // series keeps full precision where sinh(y)/y rounds
        1.0 / (1.0 + y * y / 6.0 + y.powi(4) / 120.0)
    } else {
        y / y.sinh()
    }
}

/// `|Γ(1/2+ix)|² = π / cosh(πx)`; even in `x`, equal to π at `x = 0`.
pub fn gamma_abs_sq_half_plus(x: f64) -> f64 {
    let y = PI * x.abs();
    if y > 700.0 {
        2.0 * PI * (-y).exp()
    } else {
        PI / y.cosh()
    }
}

/// `(i·ratio)^{exponent_re + i·exponent_im}` on the principal branch
/// `arg(i) = π/2`.
///
/// The modulus is `ratio^{exponent_re} · e^{−(π/2)·exponent_im}`.
pub fn imaginary_power(ratio: f64, exponent_im: f64, exponent_re: f64) -> Result<ComplexValue> {
    if !(ratio > 0.0) || !ratio.is_finite() {
        return Err(Error::domain(format!("imaginary_power: ratio must be positive, got {ratio}")));
    }
    let log_base = Complex64::new(ratio.ln(), FRAC_PI_2);
    Ok((Complex64::new(exponent_re, exponent_im) * log_base).exp())
}

/// Bose–Einstein occupation `(e^{2πx} − 1)^{-1}`, `x > 0`.
pub fn bose_factor(x: f64) -> f64 {
    1.0 / (2.0 * PI * x).exp_m1()
}

/// Fermi–Dirac occupation `(e^{2πx} + 1)^{-1}`.
pub fn fermi_factor(x: f64) -> f64 {
    let y = 2.0 * PI * x;
    if y > 0.0 {
        let e = (-y).exp();
        e / (1.0 + e)
    } else {
        1.0 / (y.exp() + 1.0)
    }
}
