//! Three interactive operations for the static demo page. Each returns a JSON
//! string; the plain functions are also usable natively.

use faer::Mat;
use serde::Serialize;
use wasm_bindgen::prelude::*;

use gaugeflow::boundary::{build_circle_operator, conjugation_path, BoundaryEndomorphism, Orientation, TrigPolyGauge};
use gaugeflow::cylinder::{build_cylinder_operator, exact_spectrum_for_config, CylinderConfig};
use gaugeflow::flow::{spectral_flow, toeplitz_report, Crossing, CurvePoint};
use gaugeflow::lattice::{eig_spectrum, C64, DEFAULT_ZERO_TOL};

/// Largest mode truncation accepted from the page; keeps solves interactive.
const MAX_MODES: usize = 24;
const MAX_RADIAL: usize = 192;

fn parse_windings(text: &str) -> Result<Vec<i32>, String> {
    let w: Vec<i32> = text
        .split(',')
        .map(|s| s.trim().parse::<i32>().map_err(|_| format!("bad winding {s:?}")))
        .collect::<Result<_, _>>()?;
    if w.is_empty() || w.len() > 4 || w.iter().any(|x| x.abs() > 4) {
        return Err("give one to four windings between -4 and 4".into());
    }
    Ok(w)
}

fn scalar(k: usize, a: f64) -> Mat<C64> {
    Mat::from_fn(k, k, |i, j| C64::new(if i == j { a } else { 0.0 }, 0.0))
}

#[derive(Serialize)]
struct CircleFlow {
    flow: i64,
    census_flow: i64,
    crossings: Vec<Crossing>,
    curves: Vec<CurvePoint>,
}

/// Eigenvalue curves and flow of `u ↦ (1 − u)B + u·gBg⁻¹` on the circle.
pub fn circle_flow_json(windings: &str, shift: f64, m_max: usize, orientation: i64) -> Result<String, String> {
    let w = parse_windings(windings)?;
    if m_max > MAX_MODES {
        return Err(format!("mode truncation above {MAX_MODES} is not offered here"));
    }
    let o = Orientation::from_sign(orientation).map_err(|e| e.to_string())?;
    let g = TrigPolyGauge::diagonal_windings(&w);
    let b = build_circle_operator(1, g.rank(), m_max, scalar(1, shift).as_ref(), o).map_err(|e| e.to_string())?;
    let path = conjugation_path(&b, &g).map_err(|e| e.to_string())?;
    let r = spectral_flow(&path, DEFAULT_ZERO_TOL).map_err(|e| e.to_string())?;
    let out = CircleFlow { flow: r.flow, census_flow: r.census_flow, crossings: r.crossings, curves: r.curves };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct CylinderComparison {
    discrete: Vec<f64>,
    exact: Vec<f64>,
    dim: usize,
}

/// Smallest-modulus eigenvalues of the discrete cylinder operator next to the closed form.
pub fn cylinder_spectrum_json(f0: f64, fl: f64, length: f64, radial_elements: usize, m_max: usize, shift: f64, count: usize) -> Result<String, String> {
    if m_max > MAX_MODES || radial_elements > MAX_RADIAL {
        return Err(format!("keep M <= {MAX_MODES} and n_r <= {MAX_RADIAL}"));
    }
    let f = |v: f64, id| BoundaryEndomorphism::diagonal(&[v.signum()], id).map_err(|e| e.to_string());
    let cfg = CylinderConfig {
        length,
        radial_elements,
        m_max,
        k: 1,
        n: 1,
        connection: scalar(1, shift),
        f0: f(f0, 0)?,
        fl: f(fl, 1)?,
        gauge: TrigPolyGauge::identity(1),
    };
    let op = build_cylinder_operator(&cfg, 0.0).map_err(|e| e.to_string())?;
    let discrete = eig_spectrum(op.operator()).map_err(|e| e.to_string())?;
    let mut window = 10.0;
    let exact = loop {
        let e = exact_spectrum_for_config(&cfg, 0.0, window).map_err(|e| e.to_string())?;
        if e.len() >= count || window > 1e4 {
            break e;
        }
        window *= 2.0;
    };
    let mut d = discrete.smallest_abs(count);
    let mut x = exact.smallest_abs(count);
    d.sort_by(f64::total_cmp);
    x.sort_by(f64::total_cmp);
    serde_json::to_string(&CylinderComparison { discrete: d, exact: x, dim: op.operator().dim() }).map_err(|e| e.to_string())
}

/// Toeplitz index by winding and by relative index of spectral projections.
pub fn toeplitz_json(windings: &str) -> Result<String, String> {
    let g = TrigPolyGauge::diagonal_windings(&parse_windings(windings)?);
    let r = toeplitz_report(&g).map_err(|e| e.to_string())?;
    serde_json::to_string(&r).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn circle_flow(windings: &str, shift: f64, m_max: usize, orientation: i32) -> Result<String, JsError> {
    circle_flow_json(windings, shift, m_max, orientation as i64).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn cylinder_spectrum(f0: f64, fl: f64, length: f64, radial_elements: usize, m_max: usize, shift: f64, count: usize) -> Result<String, JsError> {
    cylinder_spectrum_json(f0, fl, length, radial_elements, m_max, shift, count).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn toeplitz(windings: &str) -> Result<String, JsError> {
    toeplitz_json(windings).map_err(|e| JsError::new(&e))
}
