//! Browser bindings for the rotomode demo page.
//!
//! Each export has a plain Rust twin (`*_values`) so the numerics can be
//! tested natively; the wasm wrappers only translate errors.

use rotomode::field::{snapshot, FieldKind, Grid};
use rotomode::fock::closed_form_moments;
use rotomode::interference::{hom_delays, hom_sweep};
use rotomode::{build_pair, create, moments, Family, FockState, ModeBasis, PairSpec, Sign, TransverseIndex};
use wasm_bindgen::prelude::*;

/// Transverse profile used by every demo view.
pub const DEMO_KT: f64 = 0.05;

pub fn parse_family(name: &str) -> Result<Family, String> {
    Ok(match name {
        "b" => Family::B,
        "c" => Family::C,
        "d" => Family::D,
        "e" => Family::E,
        "f" => Family::F,
        "g" => Family::G,
        "h" => Family::H,
        other => return Err(format!("unknown family {other:?}")),
    })
}

pub fn parse_sign(name: &str) -> Result<Sign, String> {
    match name {
        "+" => Ok(Sign::Plus),
        "-" => Ok(Sign::Minus),
        other => Err(format!("sign must be + or -, got {other:?}")),
    }
}

fn spec(omega: f64, rotation: f64, m: i32, s: i32) -> PairSpec {
    PairSpec::new(omega, rotation, m, s, TransverseIndex::Bessel { kt: DEMO_KT })
}

/// Intensity, orientation ψ and ellipticity χ on a square grid at time t,
/// concatenated in that order (each `points²` long, rows along y).
#[allow(clippy::too_many_arguments)]
pub fn frame_values(
    family: &str,
    sign: &str,
    omega: f64,
    rotation: f64,
    m: i32,
    s: i32,
    points: usize,
    t: f64,
) -> Result<Vec<f64>, String> {
    let (family, sign) = (parse_family(family)?, parse_sign(sign)?);
    let spec = spec(omega, rotation, m, s);
    let mut basis = ModeBasis::new(0.0);
    let (plus, minus) = build_pair(&mut basis, family, &spec).map_err(|e| e.to_string())?;
    let mode = if sign == Sign::Plus { plus } else { minus };
    let extent = Grid::default_for(spec.transverse).extent;
    let grid = Grid::new(points, extent).map_err(|e| e.to_string())?;
    let snap = snapshot(&basis, &mode.coefficients, &grid, t, FieldKind::Electric).map_err(|e| e.to_string())?;
    let mut out = snap.intensity;
    out.extend(snap.psi);
    out.extend(snap.chi);
    Ok(out)
}

/// HOM coincidence curve as flat (τ, analytic, brute force) triples.
pub fn hom_values(
    family: &str,
    omega: f64,
    rotation: f64,
    m: i32,
    s: i32,
    points: usize,
    periods: f64,
) -> Result<Vec<f64>, String> {
    let family = parse_family(family)?;
    let spec = spec(omega, rotation, m, s);
    let taus = hom_delays(family, &spec, points, periods).map_err(|e| e.to_string())?;
    let rows = hom_sweep(family, &spec, &taus).map_err(|e| e.to_string())?;
    Ok(rows.iter().flat_map(|r| [r.tau, r.analytic, r.bruteforce]).collect())
}

/// One-photon expectations as a JSON object with brute-force and closed-form values.
pub fn expectation_json(family: &str, sign: &str, omega: f64, rotation: f64, m: i32, s: i32) -> Result<String, String> {
    let (family, sign) = (parse_family(family)?, parse_sign(sign)?);
    let spec = spec(omega, rotation, m, s);
    let mut basis = ModeBasis::new(0.0);
    let (plus, minus) = build_pair(&mut basis, family, &spec).map_err(|e| e.to_string())?;
    let mode = if sign == Sign::Plus { plus } else { minus };
    let vacuum = FockState::vacuum(&basis, 1).map_err(|e| e.to_string())?;
    let (state, _) = create(&vacuum, &mode.coefficients).map_err(|e| e.to_string())?;
    let brute = moments(&basis, &state).map_err(|e| e.to_string())?;
    let closed = closed_form_moments(family, sign, &spec).map_err(|e| e.to_string())?;
    let obj = |x: &rotomode::Moments| {
        format!(
            "{{\"energy\":{:e},\"sz\":{:e},\"lz\":{:e},\"jz\":{:e}}}",
            x.energy + 0.0,
            x.sz + 0.0,
            x.lz + 0.0,
            x.jz + 0.0
        )
    };
    Ok(format!(
        "{{\"family\":\"{family}\",\"sign\":\"{sign}\",\"brute_force\":{},\"closed_form\":{},\"max_residual\":{:e}}}",
        obj(&brute),
        obj(&closed),
        brute.max_abs_diff(&closed)
    ))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn frame(
    family: &str,
    sign: &str,
    omega: f64,
    rotation: f64,
    m: i32,
    s: i32,
    points: usize,
    t: f64,
) -> Result<Vec<f64>, JsError> {
    frame_values(family, sign, omega, rotation, m, s, points, t).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn hom_curve(
    family: &str,
    omega: f64,
    rotation: f64,
    m: i32,
    s: i32,
    points: usize,
    periods: f64,
) -> Result<Vec<f64>, JsError> {
    hom_values(family, omega, rotation, m, s, points, periods).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn expectations(family: &str, sign: &str, omega: f64, rotation: f64, m: i32, s: i32) -> Result<String, JsError> {
    expectation_json(family, sign, omega, rotation, m, s).map_err(|e| JsError::new(&e))
}
