//! Adaptive Gauss–Kronrod (10/21-point) quadrature for complex integrands.
//!
//! Panels live in a max-heap ordered by their error estimate; the worst
//! panel is bisected until the summed estimate falls below
//! `max(abs_tol, rel_tol·|value|)`. The estimate is the plain difference
//! between the Kronrod and Gauss sums, a heuristic rather than a bound.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077958109831074,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

// Gauss weights for the nodes XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

pub const RULE_POINTS: usize = 21;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Largest phase derivative of the integrand; initial panels are no
    /// wider than `2π / oscillation_rate`.
    pub oscillation_rate: Option<f64>,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_subdivisions: 200_000,
            oscillation_rate: None,
        }
    }
}

impl QuadratureConfig {
    pub fn with_oscillation_rate(mut self, rate: f64) -> Self {
        self.oscillation_rate = Some(rate.abs());
        self
    }

    pub fn without_oscillation_rate(mut self) -> Self {
        self.oscillation_rate = None;
        self
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    /// Configuration for the inner pass of a nested integral: absolute
    /// tolerance ten times tighter, no oscillation hint.
    pub fn inner(&self) -> Self {
        Self {
            abs_tol: self.abs_tol / 10.0,
            oscillation_rate: None,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(Error::domain(format!(
                "tolerances must be positive (rel_tol = {}, abs_tol = {})",
                self.rel_tol, self.abs_tol
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::domain("max_subdivisions must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralResult {
    pub value: Complex64,
    pub err_estimate: f64,
    pub evaluations: usize,
}

impl IntegralResult {
    pub fn zero() -> Self {
        Self {
            value: Complex64::new(0.0, 0.0),
            err_estimate: 0.0,
            evaluations: 0,
        }
    }

    /// Sums values, error estimates and evaluation counts.
    pub fn add(&mut self, other: &IntegralResult) {
        self.value += other.value;
        self.err_estimate += other.err_estimate;
        self.evaluations += other.evaluations;
    }

    fn scale(mut self, c: Complex64) -> Self {
        self.value *= c;
        self.err_estimate *= c.norm();
        self
    }
}

/// Reads the best available value out of a quadrature outcome: the
/// converged value, or the estimate carried by a non-convergence error.
pub fn best_value(r: &Result<IntegralResult>) -> Option<Complex64> {
    match r {
        Ok(v) => Some(v.value),
        Err(Error::ToleranceNotReached { value, .. }) | Err(Error::SubdivisionLimit { value, .. }) => {
            Some(*value)
        }
        Err(_) => None,
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn gauss_kronrod<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = Complex64::new(0.0, 0.0);
    for j in 0..10 {
        let dx = half * XGK[j];
        let sum = f(center - dx) + f(center + dx);
        kronrod += sum * WGK[j];
        if j % 2 == 1 {
            gauss += sum * WG[j / 2];
        }
    }
    let value = kronrod * half;
    let err = ((kronrod - gauss) * half).norm();
    Panel { a, b, value, err: if err.is_nan() { f64::INFINITY } else { err } }
}

/// Integrates `f` over `[a, b]`.
///
/// Returns [`Error::ToleranceNotReached`] when panels can no longer be
/// bisected in floating point, and [`Error::SubdivisionLimit`] when the panel
/// budget is spent; both carry the best value found.
pub fn integrate<F: FnMut(f64) -> Complex64>(
    mut f: F,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<IntegralResult> {
    cfg.validate()?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain(format!("integration limits must be finite, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(IntegralResult::zero());
    }
    if a > b {
        return Err(Error::domain(format!("integration limits out of order: [{a}, {b}]")));
    }

    let mut panels = initial_panel_count(a, b, cfg);
    let mut heap = BinaryHeap::with_capacity(2 * panels);
    let mut evaluations = 0;
    let width = (b - a) / panels as f64;
    for i in 0..panels {
        let lo = a + width * i as f64;
        let hi = if i + 1 == panels { b } else { a + width * (i + 1) as f64 };
        heap.push(gauss_kronrod(&mut f, lo, hi));
        evaluations += RULE_POINTS;
    }
    // panels too narrow to split further
    let mut frozen: Vec<Panel> = Vec::new();
    let mut frozen_err = 0.0;
    let (mut value, mut err) = totals(&heap, &frozen);

    loop {
        let tol = cfg.abs_tol.max(cfg.rel_tol * value.norm());
        if err <= tol {
            // running sums drift; confirm with a fresh summation
            let (v, e) = totals(&heap, &frozen);
            value = v;
            err = e;
            if err <= cfg.abs_tol.max(cfg.rel_tol * value.norm()) {
                return Ok(IntegralResult { value, err_estimate: err, evaluations });
            }
            continue;
        }
        if frozen_err > tol {
            return Err(Error::ToleranceNotReached { value, err_estimate: err, evaluations });
        }
        let Some(worst) = heap.pop() else {
            return Err(Error::ToleranceNotReached { value, err_estimate: err, evaluations });
        };
        if panels >= cfg.max_subdivisions {
            heap.push(worst);
            return Err(Error::SubdivisionLimit { value, err_estimate: err, limit: cfg.max_subdivisions });
        }
        let mid = 0.5 * (worst.a + worst.b);
        let too_narrow = (worst.b - worst.a) < 64.0 * f64::EPSILON * mid.abs().max(f64::MIN_POSITIVE);
        if !(mid > worst.a && mid < worst.b) || too_narrow {
            frozen_err += worst.err;
            frozen.push(worst);
            continue;
        }
        let l = gauss_kronrod(&mut f, worst.a, mid);
        let r = gauss_kronrod(&mut f, mid, worst.b);
        value += l.value + r.value - worst.value;
        err += l.err + r.err - worst.err;
        heap.push(l);
        heap.push(r);
        evaluations += 2 * RULE_POINTS;
        panels += 1;
    }
}

fn initial_panel_count(a: f64, b: f64, cfg: &QuadratureConfig) -> usize {
    match cfg.oscillation_rate {
        Some(rate) if rate > 0.0 => {
            let n = ((b - a) * rate / (2.0 * PI)).ceil();
            (n.max(1.0) as usize).min((cfg.max_subdivisions / 2).max(1))
        }
        _ => 1,
    }
}

fn totals(heap: &BinaryHeap<Panel>, frozen: &[Panel]) -> (Complex64, f64) {
    let mut value = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    for p in heap.iter().chain(frozen.iter()) {
        value += p.value;
        err += p.err;
    }
    (value, err)
}

/// Decay law the caller guarantees for `|f(x)|` beyond the start point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailEnvelope {
    /// `|f(x)| ≤ C·x^{−p}`, `p > 1`.
    InversePower(f64),
    /// `|f(x)| ≤ C·e^{−rate·x}`, `rate > 0`.
    Exponential(f64),
}

const MAX_TAIL_SEGMENTS: usize = 400;

/// Integrates `f` over `[a, ∞)`.
///
/// The range is covered by successive finite segments (geometric for a
/// power envelope, of width `4/rate` for an exponential one). After each
/// segment the remainder is extrapolated from the envelope through the
/// current end point; the extrapolation is added to the value and its
/// magnitude to the error estimate. Segments stop once that remainder is
/// below half the tolerance.
pub fn integrate_tail<F: FnMut(f64) -> Complex64>(
    mut f: F,
    a: f64,
    envelope: TailEnvelope,
    cfg: &QuadratureConfig,
) -> Result<IntegralResult> {
    cfg.validate()?;
    if !a.is_finite() {
        return Err(Error::domain(format!("tail start must be finite, got {a}")));
    }
    match envelope {
        TailEnvelope::InversePower(p) if !(p > 1.0) => {
            return Err(Error::domain(format!("power envelope needs p > 1, got {p}")))
        }
        TailEnvelope::InversePower(_) if !(a > 0.0) => {
            return Err(Error::domain("power envelope needs a positive start point"))
        }
        TailEnvelope::Exponential(r) if !(r > 0.0) => {
            return Err(Error::domain(format!("exponential envelope needs rate > 0, got {r}")))
        }
        _ => {}
    }
    let seg_cfg = QuadratureConfig { abs_tol: cfg.abs_tol / 4.0, ..*cfg };
    let mut total = IntegralResult::zero();
    let mut lo = a;
    let mut prev_edge = f(a).norm();
    for _ in 0..MAX_TAIL_SEGMENTS {
        let hi = match envelope {
            TailEnvelope::InversePower(_) => 2.0 * lo,
            TailEnvelope::Exponential(r) => lo + 4.0 / r,
        };
        // later segments only need to be accurate relative to the running total
        let seg_cfg = QuadratureConfig {
            abs_tol: seg_cfg.abs_tol.max(0.25 * cfg.rel_tol * total.value.norm()),
            ..seg_cfg
        };
        let seg = integrate(&mut f, lo, hi, &seg_cfg)?;
        total.add(&seg);
        let edge = f(hi).norm();
        // guard against an end point that happens to sit on a zero of f
        let (remainder, envelope_edge) = match envelope {
            TailEnvelope::InversePower(p) => {
                let env = edge.max(prev_edge * 0.5f64.powf(p));
                (env * hi / (p - 1.0), env)
            }
            TailEnvelope::Exponential(r) => {
                let env = edge.max(prev_edge * (-4.0f64).exp());
                (env / r, env)
            }
        };
        prev_edge = envelope_edge;
        lo = hi;
        let tol = cfg.abs_tol.max(cfg.rel_tol * total.value.norm());
        if remainder < 0.5 * tol {
            let tail_value = f_tail_estimate(&mut f, hi, envelope, remainder);
            total.value += tail_value;
            total.err_estimate += remainder;
            return Ok(total);
        }
    }
    Err(Error::SubdivisionLimit {
        value: total.value,
        err_estimate: total.err_estimate,
        limit: MAX_TAIL_SEGMENTS,
    })
}

// Signed extrapolation of the remainder: the envelope magnitude carried with
// the phase of f at the cut point.
fn f_tail_estimate<F: FnMut(f64) -> Complex64>(f: &mut F, x: f64, envelope: TailEnvelope, magnitude: f64) -> Complex64 {
    let fx = f(x);
    let n = fx.norm();
    if n == 0.0 || !n.is_finite() {
        return Complex64::new(0.0, 0.0);
    }
    let scale = match envelope {
        TailEnvelope::InversePower(p) => x / (p - 1.0),
        TailEnvelope::Exponential(r) => 1.0 / r,
    };
    (fx * scale).unscale(1.0) * (magnitude / (n * scale)).min(1.0)
}

/// Integrates `f` over `[a, b]` after the substitution `x = a + (b−a)·t^power`,
/// which removes an `(x−a)^{1/power − 1}` endpoint singularity at `a`.
pub fn integrate_graded_left<F: FnMut(f64) -> Complex64>(
    mut f: F,
    a: f64,
    b: f64,
    power: i32,
    cfg: &QuadratureConfig,
) -> Result<IntegralResult> {
    let len = b - a;
    let pw = power as f64;
    let inner = QuadratureConfig { oscillation_rate: None, ..*cfg };
    integrate(
        |t| {
            let tp = t.powi(power - 1);
            f(a + len * tp * t) * (len * pw * tp)
        },
        0.0,
        1.0,
        &inner,
    )
}

/// Integrates over `[a, b]` split into pieces of length at most `piece`,
/// seeding each piece with its own oscillation rate `rate(lo, hi)`.
///
/// Useful when the phase derivative varies by orders of magnitude across the
/// range. The absolute tolerance is shared evenly between pieces, with a
/// floor of `rel_tol` times the running total, also shared. A piece
/// that fails to converge does not stop the others; the first such failure
/// is returned with the accumulated total.
pub fn integrate_segments<F, R>(
    mut f: F,
    a: f64,
    b: f64,
    piece: f64,
    rate: R,
    cfg: &QuadratureConfig,
) -> Result<IntegralResult>
where
    F: FnMut(f64) -> Complex64,
    R: Fn(f64, f64) -> f64,
{
    if !(piece > 0.0) {
        return Err(Error::domain(format!("piece length must be positive, got {piece}")));
    }
    if a == b {
        return Ok(IntegralResult::zero());
    }
    let n = (((b - a) / piece).ceil() as usize).max(1);
    let seg_cfg = QuadratureConfig { abs_tol: cfg.abs_tol / n as f64, ..*cfg };
    let mut total = IntegralResult::zero();
    let mut failure: Option<Error> = None;
    for i in 0..n {
        let lo = a + (b - a) * i as f64 / n as f64;
        let hi = if i + 1 == n { b } else { a + (b - a) * (i + 1) as f64 / n as f64 };
        let mut c = seg_cfg.with_oscillation_rate(rate(lo, hi));
        c.abs_tol = c.abs_tol.max(cfg.rel_tol * total.value.norm() / n as f64);
        match integrate(&mut f, lo, hi, &c) {
            Ok(r) => total.add(&r),
            Err(Error::ToleranceNotReached { value, err_estimate, evaluations }) => {
                total.add(&IntegralResult { value, err_estimate, evaluations });
                failure.get_or_insert(Error::ToleranceNotReached { value, err_estimate, evaluations });
            }
            Err(Error::SubdivisionLimit { value, err_estimate, limit }) => {
                total.add(&IntegralResult { value, err_estimate, evaluations: 0 });
                failure.get_or_insert(Error::SubdivisionLimit { value, err_estimate, limit });
            }
            Err(e) => return Err(e),
        }
    }
    match failure {
        None => Ok(total),
        Some(Error::SubdivisionLimit { limit, .. }) => Err(Error::SubdivisionLimit {
            value: total.value,
            err_estimate: total.err_estimate,
            limit,
        }),
        Some(_) => Err(Error::ToleranceNotReached {
            value: total.value,
            err_estimate: total.err_estimate,
            evaluations: total.evaluations,
        }),
    }
}

/// Scales a quadrature outcome by a constant, preserving error variants.
pub fn scale_result(r: Result<IntegralResult>, c: Complex64) -> Result<IntegralResult> {
    match r {
        Ok(v) => Ok(v.scale(c)),
        Err(Error::ToleranceNotReached { value, err_estimate, evaluations }) => Err(Error::ToleranceNotReached {
            value: value * c,
            err_estimate: err_estimate * c.norm(),
            evaluations,
        }),
        Err(Error::SubdivisionLimit { value, err_estimate, limit }) => Err(Error::SubdivisionLimit {
            value: value * c,
            err_estimate: err_estimate * c.norm(),
            limit,
        }),
        Err(e) => Err(e),
    }
}
