//! Browser bindings for the demo page in `www/`.
//!
//! Each export returns a flat `Float64Array`; the page knows the grid it asked
//! for and reshapes. Undefined values (failed points, critical cells) are NaN.

use std::f64::consts::PI;

use rydcomp::composite::{coupling_profile, design_ring, CellPattern, DesignMode, RingGeometry};
use rydcomp::spectra::sweep;
use rydcomp::topology::{phase_diagram, GapSelector, KMesh};
use rydcomp::units::DEFAULT_SCATTERING_LENGTH;
use wasm_bindgen::prelude::*;

fn err(e: rydcomp::Error) -> String {
    e.to_string()
}

fn linspace(from: f64, to: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![from];
    }
    (0..n).map(|i| from + (to - from) * i as f64 / (n - 1) as f64).collect()
}

/// Designed triangle radius in units of nu^2 for an angular step of
/// 2 pi / `denominator`.
pub fn designed_radius(nu: u32, denominator: f64) -> Result<f64, String> {
    let nu2 = f64::from(nu) * f64::from(nu);
    let d = design_ring(nu, 2.0 * PI / denominator, 2, (1.5 * nu2, 2.0 * nu2), DesignMode::ExactRoot).map_err(err)?;
    Ok(d.radius / nu2)
}

/// Kernel coupling at `points` arclengths from 1/200 to 1/2 of the
/// circumference.
pub fn profile(nu: u32, radius_factor: f64, points: usize) -> Result<Vec<f64>, String> {
    if points < 2 {
        return Err("need at least two points".into());
    }
    let radius = radius_factor * f64::from(nu) * f64::from(nu);
    let arcs: Vec<f64> = linspace(0.005, 0.5, points).iter().map(|f| 2.0 * PI * radius * f).collect();
    coupling_profile(nu, radius, &arcs).map_err(err)
}

/// Composite spectra over `steps` values of t1/t2 in `[t1_from, t1_to]`.
///
/// Row-major, one row per step: `m` energies (kernel units, relative to the
/// on-site energy) followed by `m` edge weights. `model` is `dimer`,
/// `trimer` or `triangle`; t2 is 2 pi R / `denominator`.
#[allow(clippy::too_many_arguments)]
pub fn spectra(
    model: &str,
    nu: u32,
    radius_factor: f64,
    m: usize,
    denominator: f64,
    t1_from: f64,
    t1_to: f64,
    steps: usize,
) -> Result<Vec<f64>, String> {
    if steps == 0 {
        return Err("need at least one step".into());
    }
    let radius = radius_factor * f64::from(nu) * f64::from(nu);
    let t2 = 2.0 * PI * radius / denominator;
    let pattern = match model {
        "dimer" => CellPattern::Dimer { t1: t2, t2 },
        "trimer" => CellPattern::Trimer { t1: t2, t2, t3: t2 },
        "triangle" => CellPattern::Triangle { t1: t2, t2 },
        other => return Err(format!("unknown model `{other}`")),
    };
    let base = RingGeometry::new(nu, radius, m, pattern).map_err(err)?;
    let grid: Vec<f64> = linspace(t1_from, t1_to, steps).iter().map(|x| x * t2).collect();
    let table = sweep(&base, &grid, DEFAULT_SCATTERING_LENGTH, None).map_err(err)?;
    let mut out = Vec::with_capacity(steps * 2 * m);
    for point in &table.points {
        match point {
            Ok(s) => {
                out.extend(&s.energies);
                out.extend(s.metrics.iter().map(|w| w.edge_weight));
            }
            Err(_) => out.extend(std::iter::repeat(f64::NAN).take(2 * m)),
        }
    }
    Ok(out)
}

/// Triangle-chain Zak phase on a `grid` x `grid` mesh of (a, b) in
/// `[-extent, extent]` times |u|, row-major in b. NaN marks critical cells.
pub fn phases(u: f64, c: f64, extent: f64, grid: usize, upper: bool, nk: usize) -> Result<Vec<f64>, String> {
    if grid == 0 {
        return Err("grid must be positive".into());
    }
    let axis = linspace(-extent * u.abs(), extent * u.abs(), grid);
    let mesh = KMesh::new(nk).map_err(err)?;
    let gap = if upper { GapSelector::Upper } else { GapSelector::Lower };
    let pd = phase_diagram(u, c, &axis, &axis, gap, &mesh).map_err(err)?;
    Ok(pd.cells.iter().map(|cell| cell.phase.unwrap_or(f64::NAN)).collect())
}

#[wasm_bindgen(js_name = designedRadius)]
pub fn designed_radius_js(nu: u32, denominator: f64) -> Result<f64, JsError> {
    designed_radius(nu, denominator).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = couplingProfile)]
pub fn profile_js(nu: u32, radius_factor: f64, points: usize) -> Result<Vec<f64>, JsError> {
    profile(nu, radius_factor, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = spectrumSweep)]
#[allow(clippy::too_many_arguments)]
pub fn spectra_js(
    model: &str,
    nu: u32,
    radius_factor: f64,
    m: usize,
    denominator: f64,
    t1_from: f64,
    t1_to: f64,
    steps: usize,
) -> Result<Vec<f64>, JsError> {
    spectra(model, nu, radius_factor, m, denominator, t1_from, t1_to, steps).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = phaseDiagram)]
pub fn phases_js(u: f64, c: f64, extent: f64, grid: usize, upper: bool, nk: usize) -> Result<Vec<f64>, JsError> {
    phases(u, c, extent, grid, upper, nk).map_err(|e| JsError::new(&e))
}
