//! One function per subcommand; each returns a table plus extra metadata.

use std::collections::BTreeSet;

use mirrorrad::convergence::{classify, uv_decay_probe};
use mirrorrad::fermion_mirror::{
    beta_rl_semi_fermion_numeric, beta_rr_perfect_fermion_asymptotic, beta_rr_perfect_fermion_numeric_via,
    beta_rr_semi_fermion_asymptotic, beta_rr_semi_fermion_numeric, mode_refl_fermion_with, mode_trans_fermion_with,
    FermionOptions, SpinorValue,
};
use mirrorrad::scalar_mirror::{
    beta_rl_semi_numeric, beta_rr_perfect_asymptotic, beta_rr_perfect_numeric_via, beta_rr_semi_asymptotic,
    beta_rr_semi_numeric_via, mode_refl_scalar_with, mode_trans_scalar_with, BetaCoefficient, IntegrationPath,
    Method, ModeOptions, ReflExponent, Regime, DEFAULT_REGIME_THRESHOLD,
};
use mirrorrad::spectrum::{
    detector_response, detector_response_closed_form, detector_response_rate, particle_number, radiated_energy,
    energy_closed_form, Field, Observable, SpectrumParams, SpectrumTable, CONTOUR_SWITCH,
};
use mirrorrad::{CollapseTrajectory, Complex64};
use rayon::prelude::*;
use serde_json::{Map, Value};

use crate::grid::GridSpec;
use crate::table::{Cell, Table};
use crate::{ChannelArg, CliError, MirrorArg, ObservableArg, RunConfig};

pub struct Output {
    pub table: Table,
    pub metadata: Map<String, Value>,
}

type Row = Vec<Cell>;

/// Evaluates rows in parallel; the first failing row in grid order wins so
/// that error messages are reproducible too.
fn rows<T: Sync>(items: &[T], f: impl Fn(&T) -> Result<Row, CliError> + Sync + Send) -> Result<Vec<Row>, CliError> {
    let done: Vec<Result<Row, CliError>> = items.par_iter().map(f).collect();
    done.into_iter().collect()
}

fn finite_traj(rc: &RunConfig) -> Result<CollapseTrajectory, CliError> {
    match rc.u0 {
        Some(u0) => Ok(CollapseTrajectory::finite(rc.k, u0)?),
        None => Err(CliError::Validation(format!("{}: numeric evaluation needs --u0", rc.command))),
    }
}

fn any_traj(rc: &RunConfig) -> Result<CollapseTrajectory, CliError> {
    match rc.u0 {
        Some(u0) => Ok(CollapseTrajectory::finite(rc.k, u0)?),
        None => Ok(CollapseTrajectory::eternal(rc.k)?),
    }
}

fn semi(rc: &RunConfig) -> Option<f64> {
    match rc.mirror {
        MirrorArg::Semitransparent => rc.alpha,
        MirrorArg::Perfect => None,
    }
}

fn rel_gap(numeric: Option<f64>, asymptotic: Option<f64>) -> Option<f64> {
    match (numeric, asymptotic) {
        (Some(n), Some(a)) => Some((n - a).abs() / a.abs()),
        _ => None,
    }
}

fn join_warnings<'a>(lists: impl IntoIterator<Item = &'a [String]>) -> String {
    let mut seen = Vec::<&String>::new();
    for w in lists.into_iter().flatten() {
        if !seen.contains(&w) {
            seen.push(w);
        }
    }
    seen.iter().map(|s| s.as_str()).collect::<Vec<_>>().join("; ")
}

fn warning_strings(b: &BetaCoefficient) -> Vec<String> {
    b.warnings.iter().map(|w| w.to_string()).collect()
}

fn path_for(k: f64, omega_prime: f64) -> IntegrationPath {
    if omega_prime / k > CONTOUR_SWITCH {
        IntegrationPath::SteepestDescent
    } else {
        IntegrationPath::RealAxis
    }
}

fn fermion_options(rc: &RunConfig) -> FermionOptions {
    FermionOptions { quadrature: rc.quadrature, conjugate_product: rc.conjugate_product, ..Default::default() }
}

fn beta_numeric(
    rc: &RunConfig,
    traj: &CollapseTrajectory,
    channel: ChannelArg,
    w: f64,
    wp: f64,
) -> mirrorrad::Result<BetaCoefficient> {
    let cfg = &rc.quadrature;
    match (rc.field, semi(rc), channel) {
        (Field::Scalar, None, _) => beta_rr_perfect_numeric_via(traj, w, wp, path_for(rc.k, wp), cfg),
        (Field::Scalar, Some(a), ChannelArg::Rr) => {
            // the rotated path pays for 2α/k oscillations of its inner integral
            let path = if 2.0 * a <= wp { path_for(rc.k, wp) } else { IntegrationPath::RealAxis };
            beta_rr_semi_numeric_via(traj, a, w, wp, path, cfg)
        }
        (Field::Scalar, Some(a), ChannelArg::Rl) => beta_rl_semi_numeric(traj, a, w, wp, cfg),
        (Field::Dirac, None, _) => beta_rr_perfect_fermion_numeric_via(traj, w, wp, path_for(rc.k, wp), cfg),
        (Field::Dirac, Some(a), ChannelArg::Rr) => beta_rr_semi_fermion_numeric(traj, a, w, wp, cfg),
        (Field::Dirac, Some(a), ChannelArg::Rl) => beta_rl_semi_fermion_numeric(traj, a, w, wp, &fermion_options(rc)),
    }
}

fn beta_asymptotic(rc: &RunConfig, w: f64, wp: f64) -> mirrorrad::Result<BetaCoefficient> {
    match (rc.field, semi(rc)) {
        (Field::Scalar, None) => beta_rr_perfect_asymptotic(rc.k, w, wp),
        (Field::Scalar, Some(a)) => beta_rr_semi_asymptotic(rc.k, a, w, wp),
        (Field::Dirac, None) => beta_rr_perfect_fermion_asymptotic(rc.k, w, wp),
        (Field::Dirac, Some(a)) => beta_rr_semi_fermion_asymptotic(rc.k, a, w, wp),
    }
}

fn regime_tag(rc: &RunConfig, wp: f64) -> &'static str {
    match semi(rc) {
        None => "perfect",
        Some(a) => Regime::classify(a, wp, DEFAULT_REGIME_THRESHOLD).tag(),
    }
}

struct BetaPair {
    numeric: Option<BetaCoefficient>,
    asymptotic: Option<BetaCoefficient>,
}

fn beta_pair(
    rc: &RunConfig,
    traj: Option<&CollapseTrajectory>,
    channel: ChannelArg,
    w: f64,
    wp: f64,
) -> Result<BetaPair, CliError> {
    let numeric = match traj {
        Some(t) => Some(beta_numeric(rc, t, channel, w, wp).map_err(|e| row_error(e, w, wp))?),
        None => None,
    };
    let asymptotic = if rc.wants_asymptotic() && channel == ChannelArg::Rr {
        Some(beta_asymptotic(rc, w, wp)?)
    } else {
        None
    };
    Ok(BetaPair { numeric, asymptotic })
}

fn row_error(e: mirrorrad::Error, w: f64, wp: f64) -> CliError {
    match CliError::from(e) {
        CliError::Validation(m) => CliError::Validation(m),
        CliError::Numeric(m) => CliError::Numeric(format!("omega={w}, omega_prime={wp}: {m}")),
    }
}

pub fn beta(rc: &RunConfig, omega: &GridSpec, omega_prime: &GridSpec, channel: ChannelArg) -> Result<Output, CliError> {
    if channel == ChannelArg::Rl && semi(rc).is_none() {
        return Err(CliError::Validation("--channel rl needs --mirror semitransparent".into()));
    }
    if channel == ChannelArg::Rl && !rc.wants_numeric() {
        return Err(CliError::Validation("--channel rl has no closed form; use --method numeric or both".into()));
    }
    let traj = if rc.wants_numeric() { Some(finite_traj(rc)?) } else { None };
    let pairs: Vec<(f64, f64)> =
        omega.points().into_iter().flat_map(|w| omega_prime.points().into_iter().map(move |wp| (w, wp))).collect();
    let table_rows = rows(&pairs, |&(w, wp)| {
        let p = beta_pair(rc, traj.as_ref(), channel, w, wp)?;
        let shown = p.numeric.as_ref().or(p.asymptotic.as_ref()).expect("at least one method runs");
        let num = p.numeric.as_ref().map(|b| b.modulus_sq());
        let asym = p.asymptotic.as_ref().map(|b| b.modulus_sq());
        let warn: Vec<Vec<String>> = [&p.numeric, &p.asymptotic].iter().filter_map(|b| b.as_ref()).map(warning_strings).collect();
        Ok(vec![
            w.into(),
            wp.into(),
            shown.value.re.into(),
            shown.value.im.into(),
            num.into(),
            asym.into(),
            rel_gap(num, asym).into(),
            join_warnings(warn.iter().map(|v| v.as_slice())).into(),
        ])
    })?;
    let regimes: BTreeSet<&str> = pairs.iter().map(|&(_, wp)| regime_tag(rc, wp)).collect();
    let mut metadata = Map::new();
    metadata.insert("channel".into(), if channel == ChannelArg::Rr { "RR" } else { "RL" }.into());
    metadata.insert("regimes".into(), regimes.into_iter().collect::<Vec<_>>().into());
    Ok(Output {
        table: Table {
            columns: vec![
                "omega",
                "omega_prime",
                "re_beta",
                "im_beta",
                "beta_sq_numeric",
                "beta_sq_asymptotic",
                "rel_gap",
                "warnings",
            ],
            rows: table_rows,
        },
        metadata,
    })
}

pub fn spectrum(
    rc: &RunConfig,
    observable: ObservableArg,
    omega: &GridSpec,
    omega_prime: Option<f64>,
) -> Result<Output, CliError> {
    let grid = omega.points();
    let traj = any_traj(rc)?;
    let numeric_traj = if rc.wants_numeric() { Some(finite_traj(rc)?) } else { None };
    let alpha = semi(rc);
    let cfg = &rc.quadrature;
    let wp = match (observable, omega_prime) {
        (ObservableArg::BetaSq, Some(wp)) => wp,
        (ObservableArg::BetaSq, None) => return Err(CliError::Validation("--observable beta-sq needs --omega-prime".into())),
        _ => 0.0,
    };
    if observable == ObservableArg::ResponseP && rc.method == crate::MethodArg::Numeric {
        return Err(CliError::Validation("response-p has only a closed form; use --method asymptotic or both".into()));
    }
    let evaluated = rows(&grid, |&w| {
        let (num, asym, warn): (Option<f64>, Option<f64>, Vec<String>) = match observable {
            ObservableArg::BetaSq => {
                let p = beta_pair(rc, numeric_traj.as_ref(), ChannelArg::Rr, w, wp)?;
                let mut warn = Vec::new();
                for b in [&p.numeric, &p.asymptotic].into_iter().flatten() {
                    warn.extend(warning_strings(b));
                }
                (p.numeric.map(|b| b.modulus_sq()), p.asymptotic.map(|b| b.modulus_sq()), warn)
            }
            ObservableArg::NOmega => {
                let mut warn = Vec::new();
                let num = match &numeric_traj {
                    Some(t) => {
                        let n = particle_number(w, rc.field, t, alpha, cfg, Method::Numeric)?;
                        warn.extend(n.warnings);
                        Some(n.value)
                    }
                    None => None,
                };
                let asym = if rc.wants_asymptotic() {
                    let n = particle_number(w, rc.field, &traj, alpha, cfg, Method::Asymptotic)?;
                    warn.extend(n.warnings);
                    Some(n.value)
                } else {
                    None
                };
                (num, asym, warn)
            }
            ObservableArg::ResponseF => {
                let num = match &numeric_traj {
                    Some(t) => Some(detector_response(w, rc.field, t, alpha, cfg, Method::Numeric)?.value),
                    None => None,
                };
                let asym = if rc.wants_asymptotic() { Some(response_closed_form(rc, &traj, w)?) } else { None };
                (num, asym, Vec::new())
            }
            ObservableArg::ResponseP => (None, Some(detector_response_rate(w, rc.k)), Vec::new()),
        };
        Ok(vec![w.into(), num.into(), asym.into(), rel_gap(num, asym).into(), join_warnings([warn.as_slice()]).into()])
    })?;

    let (tag, obs) = match observable {
        ObservableArg::BetaSq => ("beta_sq", Observable::BetaSq),
        ObservableArg::NOmega => ("n_omega", Observable::NOmega),
        ObservableArg::ResponseF => ("response_f", Observable::ResponseF),
        ObservableArg::ResponseP => ("response_p", Observable::ResponseP),
    };
    let params = SpectrumParams { k: rc.k, u0: rc.u0, alpha, field: rc.field };
    for (col, method) in [(1, Method::Numeric), (2, Method::Asymptotic)] {
        let values: Vec<f64> = evaluated
            .iter()
            .filter_map(|r| match r[col] {
                Cell::Num(v) => Some(v),
                _ => None,
            })
            .collect();
        if values.len() == grid.len() {
            SpectrumTable::new(grid.clone(), values, obs, params, method)?;
        }
    }
    let mut metadata = Map::new();
    metadata.insert("observable".into(), tag.into());
    if observable == ObservableArg::BetaSq {
        metadata.insert("omega_prime".into(), serde_json::Number::from_f64(wp).map_or(Value::Null, Value::Number));
    }
    Ok(Output {
        table: Table {
            columns: vec!["omega", "value_numeric", "value_asymptotic", "rel_gap", "warnings"],
            rows: evaluated,
        },
        metadata,
    })
}

fn response_closed_form(rc: &RunConfig, traj: &CollapseTrajectory, w: f64) -> Result<f64, CliError> {
    Ok(match semi(rc) {
        Some(a) => detector_response_closed_form(w, rc.k, a, rc.field),
        None => detector_response(w, rc.field, traj, None, &rc.quadrature, Method::Asymptotic)?.value,
    })
}

pub fn nomega(rc: &RunConfig, omega: &GridSpec) -> Result<Output, CliError> {
    let grid = omega.points();
    let traj = any_traj(rc)?;
    let numeric_traj = if rc.wants_numeric() { Some(finite_traj(rc)?) } else { None };
    let alpha = semi(rc);
    let table_rows = rows(&grid, |&w| {
        let numeric = match &numeric_traj {
            Some(t) => Some(particle_number(w, rc.field, t, alpha, &rc.quadrature, Method::Numeric).map_err(|e| {
                match CliError::from(e) {
                    CliError::Numeric(m) => CliError::Numeric(format!("omega={w}: {m}")),
                    v => v,
                }
            })?),
            None => None,
        };
        let asymptotic = if rc.wants_asymptotic() {
            Some(particle_number(w, rc.field, &traj, alpha, &rc.quadrature, Method::Asymptotic)?)
        } else {
            None
        };
        let num = numeric.as_ref().map(|n| n.value);
        let asym = asymptotic.as_ref().map(|n| n.value);
        let divergent = numeric.as_ref().or(asymptotic.as_ref()).is_some_and(|n| n.divergent);
        let warn = join_warnings([&numeric, &asymptotic].into_iter().flatten().map(|n| n.warnings.as_slice()));
        Ok(vec![
            w.into(),
            num.into(),
            asym.into(),
            rel_gap(num, asym).into(),
            numeric.as_ref().and_then(|n| n.infrared).into(),
            numeric.as_ref().and_then(|n| n.rl_included).map_or(Cell::Missing, Cell::Bool),
            divergent.into(),
            warn.into(),
        ])
    })?;
    Ok(Output {
        table: Table {
            columns: vec![
                "omega",
                "n_numeric",
                "n_asymptotic",
                "rel_gap",
                "infrared",
                "rl_included",
                "divergent",
                "warnings",
            ],
            rows: table_rows,
        },
        metadata: Map::new(),
    })
}

pub fn energy(rc: &RunConfig) -> Result<Output, CliError> {
    let alpha = semi(rc).ok_or_else(|| CliError::Validation("energy needs --alpha (semi-transparent mirror)".into()))?;
    let traj = any_traj(rc)?;
    let num = if rc.wants_numeric() {
        Some(radiated_energy(&traj, alpha, rc.field, &rc.quadrature, Method::Numeric)?.value)
    } else {
        None
    };
    let asym = if rc.wants_asymptotic() {
        Some(radiated_energy(&traj, alpha, rc.field, &rc.quadrature, Method::Asymptotic)?.value)
    } else {
        None
    };
    debug_assert!(asym.is_none_or(|a| a == energy_closed_form(rc.k, alpha)));
    Ok(Output {
        table: Table {
            columns: vec!["alpha", "k", "energy_numeric", "energy_asymptotic", "rel_gap"],
            rows: vec![vec![alpha.into(), rc.k.into(), num.into(), asym.into(), rel_gap(num, asym).into()]],
        },
        metadata: Map::new(),
    })
}

pub fn detector(rc: &RunConfig, omega: &GridSpec) -> Result<Output, CliError> {
    let grid = omega.points();
    let traj = any_traj(rc)?;
    let numeric_traj = if rc.wants_numeric() { Some(finite_traj(rc)?) } else { None };
    let alpha = semi(rc);
    let table_rows = rows(&grid, |&w| {
        let numeric = match &numeric_traj {
            Some(t) => Some(detector_response(w, rc.field, t, alpha, &rc.quadrature, Method::Numeric)?),
            None => None,
        };
        let asym = if rc.wants_asymptotic() { Some(response_closed_form(rc, &traj, w)?) } else { None };
        let num = numeric.as_ref().map(|d| d.value);
        Ok(vec![
            w.into(),
            num.into(),
            asym.into(),
            rel_gap(num, asym).into(),
            detector_response_rate(w, rc.k).into(),
            (alpha.is_none()).into(),
        ])
    })?;
    Ok(Output {
        table: Table {
            columns: vec!["omega", "f_numeric", "f_asymptotic", "rel_gap", "p_rate", "divergent"],
            rows: table_rows,
        },
        metadata: Map::new(),
    })
}

fn spinor_cells(s: &SpinorValue) -> [Cell; 4] {
    [s.upper.re.into(), s.upper.im.into(), s.lower.re.into(), s.lower.im.into()]
}

fn complex_cells(z: Complex64) -> [Cell; 2] {
    [z.re.into(), z.im.into()]
}

pub fn modes(rc: &RunConfig, omega: f64, u: &GridSpec) -> Result<Output, CliError> {
    let alpha = semi(rc).ok_or_else(|| CliError::Validation("modes needs --alpha (semi-transparent mirror)".into()))?;
    let traj = finite_traj(rc)?;
    let grid = u.points();
    let refl_exponent = if rc.literal_modes { ReflExponent::AsPrinted } else { ReflExponent::Consistent };
    let scalar_opts = ModeOptions { quadrature: rc.quadrature, refl_exponent };
    let fermion_opts = fermion_options(rc);
    let table_rows = rows(&grid, |&u| {
        let mut row: Row = vec![u.into()];
        match rc.field {
            Field::Scalar => {
                row.extend(complex_cells(mode_refl_scalar_with(&traj, alpha, omega, u, &scalar_opts)?));
                row.extend(complex_cells(mode_trans_scalar_with(&traj, alpha, omega, u, &scalar_opts)?));
            }
            Field::Dirac => {
                row.extend(spinor_cells(&mode_refl_fermion_with(&traj, alpha, omega, u, &fermion_opts)?));
                row.extend(spinor_cells(&mode_trans_fermion_with(&traj, alpha, omega, u, &fermion_opts)?));
            }
        }
        Ok(row)
    })?;
    let columns = match rc.field {
        Field::Scalar => vec!["u", "re_refl", "im_refl", "re_trans", "im_trans"],
        Field::Dirac => vec![
            "u",
            "re_refl_upper",
            "im_refl_upper",
            "re_refl_lower",
            "im_refl_lower",
            "re_trans_upper",
            "im_trans_upper",
            "re_trans_lower",
            "im_trans_lower",
        ],
    };
    let mut metadata = Map::new();
    metadata.insert("omega".into(), serde_json::Number::from_f64(omega).map_or(Value::Null, Value::Number));
    Ok(Output { table: Table { columns, rows: table_rows }, metadata })
}

pub fn check_trajectory(rc: &RunConfig, decay: Option<(f64, &GridSpec)>) -> Result<Output, CliError> {
    let traj = any_traj(rc)?;
    let r = classify(&traj);
    let (slope, residual, note) = match decay {
        None => (None, None, String::new()),
        Some((w, grid)) => match uv_decay_probe(&traj, w, &grid.points()) {
            Ok(fit) => (Some(fit.slope), Some(fit.residual), String::new()),
            Err(e @ mirrorrad::Error::FitUnstable { .. }) => (None, None, e.to_string()),
            Err(e) => return Err(e.into()),
        },
    };
    let jumps = r.acceleration_jumps.iter().map(|u| crate::table::format_number(*u)).collect::<Vec<_>>().join(";");
    let variant = if traj.is_finite() { "finite_collapse" } else { "eternal_collapse" };
    Ok(Output {
        table: Table {
            columns: vec![
                "variant",
                "b1",
                "b2",
                "integral_neg",
                "integral_pos",
                "asymptotically_inertial",
                "condition_c",
                "infrared_safe",
                "acceleration_jumps",
                "decay_slope",
                "decay_residual",
                "warnings",
            ],
            rows: vec![vec![
                variant.to_string().into(),
                r.b1.into(),
                r.b2.into(),
                r.integral_neg.into(),
                r.integral_pos.into(),
                r.asymptotically_inertial.into(),
                r.condition_c.into(),
                r.infrared_safe.into(),
                jumps.into(),
                slope.into(),
                residual.into(),
                note.into(),
            ]],
        },
        metadata: Map::new(),
    })
}
