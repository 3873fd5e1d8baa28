//! Band structures and Zak phases of Bloch models.
//!
//! Zak phases are evaluated as discrete Wilson loops,
//! `Z = −arg Π_j det O_j` with `O_j[m, n] = ⟨ψ_m(k_j) | ψ_n(k_{j+1})⟩`, the
//! product closing on the first mesh point. The Bloch matrices are periodic in
//! `k`, so no gauge fixing is needed and the result does not depend on the
//! phases the eigensolver assigns to individual eigenvectors.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::lattices::{BlochModel, ChainSpec};
use crate::linalg::{eigh_complex, eigvals_complex};
use crate::{par, Error, Result};

pub const DEFAULT_NK: usize = 1001;

/// Relative gap (in units of the spectral width) below which bands count as
/// touching.
pub const ISOLATION_TOLERANCE: f64 = 1e-12;

/// Uniform Brillouin-zone mesh `k_j = −π + 2πj/n_k`, `j = 0..n_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KMesh {
    n_k: usize,
}

impl KMesh {
    pub fn new(n_k: usize) -> Result<Self> {
        if n_k < 8 {
            return Err(Error::Domain(format!("k mesh needs at least 8 points, got {n_k}")));
        }
        Ok(Self { n_k })
    }

    pub fn len(&self) -> usize {
        self.n_k
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, j: usize) -> f64 {
        -PI + 2.0 * PI * j as f64 / self.n_k as f64
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_k).map(|j| self.point(j))
    }
}

impl Default for KMesh {
    fn default() -> Self {
        Self { n_k: DEFAULT_NK }
    }
}

/// Eigenvalues on a mesh, ascending at each `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandTable {
    pub k: Vec<f64>,
    /// `energies[j][b]`: band `b` at `k[j]`.
    pub energies: Vec<Vec<f64>>,
}

impl BandTable {
    pub fn n_bands(&self) -> usize {
        self.energies.first().map_or(0, Vec::len)
    }

    pub fn band(&self, b: usize) -> impl Iterator<Item = f64> + '_ {
        self.energies.iter().map(move |e| e[b])
    }

    pub fn band_min(&self, b: usize) -> f64 {
        self.band(b).fold(f64::INFINITY, f64::min)
    }

    pub fn band_max(&self, b: usize) -> f64 {
        self.band(b).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Energy window of the 1-based gap `g`: `(max E_g, min E_{g+1})`, or
    /// `None` if the two bands overlap in energy.
    pub fn gap_window(&self, g: usize) -> Option<(f64, f64)> {
        let (lo, hi) = (self.band_max(g - 1), self.band_min(g));
        (hi > lo).then_some((lo, hi))
    }

    /// Energy range where bands `g` and `g + 1` overlap, if they do.
    pub fn overlap_window(&self, g: usize) -> Option<(f64, f64)> {
        let (lo, hi) = (self.band_min(g), self.band_max(g - 1));
        (hi >= lo).then_some((lo, hi))
    }
}

pub fn band_structure(model: &BlochModel, mesh: &KMesh) -> BandTable {
    let k: Vec<f64> = mesh.points().collect();
    let energies = k.iter().map(|&k| eigvals_complex(&model.matrix_at(k))).collect();
    BandTable { k, energies }
}

/// Eigenpairs of a Bloch model on a mesh, reused for several Wilson loops.
#[derive(Debug, Clone)]
pub struct BlochSolution {
    pub k: Vec<f64>,
    pub energies: Vec<Vec<f64>>,
    pub vectors: Vec<DMatrix<Complex64>>,
}

impl BlochSolution {
    pub fn new(model: &BlochModel, mesh: &KMesh) -> Self {
        let k: Vec<f64> = mesh.points().collect();
        let (energies, vectors) = k.iter().map(|&k| eigh_complex(&model.matrix_at(k))).unzip();
        Self { k, energies, vectors }
    }

    fn spectral_width(&self) -> f64 {
        let (lo, hi) = self.energies.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), e| {
            (a.min(e[0]), b.max(*e.last().unwrap()))
        });
        hi - lo
    }

    /// Smallest distance between a band of `bands` and one outside it, with
    /// the `k` where it occurs.
    fn isolation(&self, bands: &[usize]) -> (f64, f64) {
        let n = self.energies[0].len();
        let mut worst = (f64::INFINITY, 0.0);
        for (e, &k) in self.energies.iter().zip(&self.k) {
            for &i in bands {
                for j in (0..n).filter(|j| !bands.contains(j)) {
                    let d = (e[i] - e[j]).abs();
                    if d < worst.0 {
                        worst = (d, k);
                    }
                }
            }
        }
        worst
    }

    pub fn is_isolated(&self, bands: &[usize]) -> bool {
        self.isolation(bands).0 > ISOLATION_TOLERANCE * self.spectral_width()
    }

    /// Wilson-loop phase of the band set, reduced to `(−π, π]`.
    pub fn zak_phase(&self, bands: &[usize], allow_touch: bool) -> Result<f64> {
        let n = self.energies[0].len();
        if bands.is_empty() || bands.iter().any(|&b| b >= n) {
            return Err(Error::Domain(format!("band set {bands:?} invalid for {n} bands")));
        }
        if !allow_touch {
            let (gap, k) = self.isolation(bands);
            if gap <= ISOLATION_TOLERANCE * self.spectral_width() {
                return Err(Error::GapCollapse { bands: bands.to_vec(), gap, k });
            }
        }
        let nk = self.vectors.len();
        let mut prod = Complex64::new(1.0, 0.0);
        for j in 0..nk {
            let a = &self.vectors[j];
            let b = &self.vectors[(j + 1) % nk];
            let overlap = DMatrix::from_fn(bands.len(), bands.len(), |m, p| {
                a.column(bands[m]).dotc(&b.column(bands[p]))
            });
            prod *= overlap.determinant();
            let norm = prod.norm();
            if norm > 0.0 {
                prod /= norm;
            }
        }
        Ok(reduce_phase(-prod.arg()))
    }
}

/// Maps an angle into `(−π, π]`.
pub fn reduce_phase(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Distance of a phase from the nearest of {0, π} (mod 2π).
pub fn quantization_defect(phase: f64) -> f64 {
    let p = reduce_phase(phase).abs();
    p.min(PI - p)
}

/// Zak phase of a set of bands.
pub fn zak_phase(model: &BlochModel, bands: &[usize], mesh: &KMesh, allow_touch: bool) -> Result<f64> {
    BlochSolution::new(model, mesh).zak_phase(bands, allow_touch)
}

/// Per-band phases and the phase below one gap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZakResult {
    /// `None` where a band touches a neighbour somewhere on the mesh.
    pub per_band: Vec<Option<f64>>,
    /// 1-based gap index: gap `g` lies between bands `g` and `g + 1`.
    pub gap: usize,
    /// Wilson phase of all bands below the gap; `None` if the gap is closed.
    pub below_gap_sum: Option<f64>,
    /// Largest distance from {0, π} among the reported phases.
    pub quantization_defect: f64,
}

pub fn zak_result(model: &BlochModel, gap: usize, mesh: &KMesh) -> Result<ZakResult> {
    let sol = BlochSolution::new(model, mesh);
    zak_result_from(&sol, gap)
}

pub fn zak_result_from(sol: &BlochSolution, gap: usize) -> Result<ZakResult> {
    let n = sol.energies[0].len();
    if gap == 0 || gap >= n {
        return Err(Error::Domain(format!("gap index {gap} outside 1..{}", n - 1)));
    }
    let per_band: Vec<Option<f64>> = (0..n).map(|b| sol.zak_phase(&[b], false).ok()).collect();
    let below: Vec<usize> = (0..gap).collect();
    let below_gap_sum = sol.zak_phase(&below, false).ok();
    let quantization_defect = per_band
        .iter()
        .chain(std::iter::once(&below_gap_sum))
        .flatten()
        .map(|&p| quantization_defect(p))
        .fold(0.0, f64::max);
    Ok(ZakResult { per_band, gap, below_gap_sum, quantization_defect })
}

/// Smallest direct gap `min_k [E_{g+1}(k) − E_g(k)]` for the 1-based gap `g`.
///
/// Besides the mesh, the two inversion-invariant momenta `k = 0` and `k = π`
/// are always sampled, since that is where gaps of the chains here close.
pub fn min_gap(model: &BlochModel, gap: usize, mesh: &KMesh) -> Result<f64> {
    let n = model.cell_size();
    if gap == 0 || gap >= n {
        return Err(Error::Domain(format!("gap index {gap} outside 1..{}", n - 1)));
    }
    Ok(mesh
        .points()
        .chain([0.0, PI])
        .map(|k| {
            let e = eigvals_complex(&model.matrix_at(k));
            e[gap] - e[gap - 1]
        })
        .fold(f64::INFINITY, f64::min))
}

/// `min_k E_{g+1} − max_k E_g`; negative when the two bands overlap in energy.
pub fn indirect_gap(table: &BandTable, gap: usize) -> f64 {
    table.band_min(gap) - table.band_max(gap - 1)
}

/// Which triangle-chain gap a phase diagram refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GapSelector {
    Lower,
    Upper,
}

impl GapSelector {
    pub fn index(self) -> usize {
        match self {
            GapSelector::Lower => 1,
            GapSelector::Upper => 2,
        }
    }
}

/// Cells with `min_gap < CRITICAL_GAP · |u|` are reported as critical.
pub const CRITICAL_GAP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseCell {
    pub a: f64,
    pub b: f64,
    pub min_gap: f64,
    /// `None` for critical cells.
    pub phase: Option<f64>,
    pub quantization_defect: f64,
}

impl PhaseCell {
    pub fn is_critical(&self) -> bool {
        self.phase.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagram {
    pub u: f64,
    pub c: f64,
    pub gap: GapSelector,
    pub a_grid: Vec<f64>,
    pub b_grid: Vec<f64>,
    /// Row-major: `cells[ib * a_grid.len() + ia]`.
    pub cells: Vec<PhaseCell>,
}

impl PhaseDiagram {
    pub fn cell(&self, ia: usize, ib: usize) -> &PhaseCell {
        &self.cells[ib * self.a_grid.len() + ia]
    }
}

/// Zak phase below the selected gap of the triangle chain over an `(a, b)`
/// grid at fixed `u` and `c`. The diagonal `c` term does not alter
/// eigenvectors or direct gaps, so `c` only enters through the band energies.
pub fn phase_diagram(
    u: f64,
    c: f64,
    a_grid: &[f64],
    b_grid: &[f64],
    gap: GapSelector,
    mesh: &KMesh,
) -> Result<PhaseDiagram> {
    if !(u != 0.0 && u.is_finite()) {
        return Err(Error::Domain("u must be finite and non-zero".into()));
    }
    if a_grid.iter().chain(b_grid).chain([&c]).any(|x| !x.is_finite()) {
        return Err(Error::Domain("phase-diagram grids must be finite".into()));
    }
    let points: Vec<(f64, f64)> = b_grid
        .iter()
        .flat_map(|&b| a_grid.iter().map(move |&a| (a, b)))
        .collect();
    let g = gap.index();
    let cells = par::map(&points, |&(a, b)| {
        let model = ChainSpec::Triangle { u, a, b, c }.bloch();
        let sol = BlochSolution::new(&model, mesh);
        let mesh_gap = sol
            .energies
            .iter()
            .map(|e| e[g] - e[g - 1])
            .fold(f64::INFINITY, f64::min);
        let trim_gap = [0.0, PI]
            .iter()
            .map(|&k| {
                let e = eigvals_complex(&model.matrix_at(k));
                e[g] - e[g - 1]
            })
            .fold(f64::INFINITY, f64::min);
        let min_gap = mesh_gap.min(trim_gap);
        let below: Vec<usize> = (0..g).collect();
        let phase = if min_gap < CRITICAL_GAP * u.abs() {
            None
        } else {
            sol.zak_phase(&below, false).ok()
        };
        PhaseCell {
            a,
            b,
            min_gap,
            phase,
            quantization_defect: phase.map_or(0.0, quantization_defect),
        }
    });
    Ok(PhaseDiagram {
        u,
        c,
        gap,
        a_grid: a_grid.to_vec(),
        b_grid: b_grid.to_vec(),
        cells,
    })
}
