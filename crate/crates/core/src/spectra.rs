//! Spectra of finite systems: t1 sweeps, edge-state detection and disorder
//! ensembles.

use std::ops::Range;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::composite::{build_hamiltonian, onsite_energy, CellPattern, RingGeometry};
use crate::linalg::eigh_real;
use crate::{par, Error, Result};

/// Localization measures of one eigenstate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeMetrics {
    /// Probability on the first and last unit cell.
    pub edge_weight: f64,
    /// `Σ |c_q|⁴`.
    pub ipr: f64,
}

/// Eigen-decomposition of a finite system with per-state metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Ascending, relative to the reference energy the spectrum was built with.
    pub energies: Vec<f64>,
    /// Columns are eigenvectors, in the order of `energies`.
    pub vectors: DMatrix<f64>,
    pub metrics: Vec<EdgeMetrics>,
    pub cell_size: usize,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn n_cells(&self) -> usize {
        self.len().div_ceil(self.cell_size)
    }

    pub fn bandwidth(&self) -> f64 {
        match (self.energies.first(), self.energies.last()) {
            (Some(lo), Some(hi)) => hi - lo,
            _ => 0.0,
        }
    }

    /// `max_i |E_i + E_{n−1−i}|`: zero for a spectrum symmetric about 0.
    pub fn asymmetry(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| (self.energies[i] + self.energies[n - 1 - i]).abs())
            .fold(0.0, f64::max)
    }
}

/// Edge weight and IPR of a normalized state. The edge region is the first
/// and the last `cell_size` sites (or the whole state when they overlap).
pub fn edge_metrics(state: &[f64], cell_size: usize) -> EdgeMetrics {
    let n = state.len();
    let p: Vec<f64> = state.iter().map(|c| c * c).collect();
    let edge_weight = (0..n)
        .filter(|&q| q < cell_size || q + cell_size >= n)
        .map(|q| p[q])
        .sum::<f64>()
        .min(1.0);
    let ipr = p.iter().map(|x| x * x).sum();
    EdgeMetrics { edge_weight, ipr }
}

/// Diagonalizes `matrix − reference · 1`.
pub fn analyze_spectrum(matrix: &DMatrix<f64>, cell_size: usize, reference: f64) -> Spectrum {
    let (mut energies, vectors) = eigh_real(matrix);
    for e in &mut energies {
        *e -= reference;
    }
    let metrics = vectors
        .column_iter()
        .map(|c| edge_metrics(c.as_slice(), cell_size))
        .collect();
    Spectrum { energies, vectors, metrics, cell_size }
}

/// Spectra of a composite over a range of `t1` values.
#[derive(Debug, Clone)]
pub struct SweepTable {
    /// Swept arclength (bohr).
    pub t1: Vec<f64>,
    /// One entry per `t1`; geometry errors are kept and the sweep continues.
    pub points: Vec<Result<Spectrum>>,
    /// Common on-site energy subtracted from all spectra (kernel units).
    pub reference: f64,
    /// Kernel-to-hartree factor.
    pub scale: f64,
}

impl SweepTable {
    pub fn successes(&self) -> impl Iterator<Item = (f64, &Spectrum)> {
        self.t1
            .iter()
            .zip(&self.points)
            .filter_map(|(&t, p)| p.as_ref().ok().map(|s| (t, s)))
    }
}

/// Diagonalizes the composite at every `t1` in the grid, with energies
/// relative to the on-site energy of the nominal ring.
pub fn sweep(
    base: &RingGeometry,
    t1_grid: &[f64],
    scattering_length: f64,
    neighbor_cutoff: Option<usize>,
) -> Result<SweepTable> {
    let reference = onsite_energy(base.nu, base.radius)?;
    let cs = base.pattern.cell_size();
    let points = par::map(t1_grid, |&t1| -> Result<Spectrum> {
        let g = base.with_t1(t1)?;
        let h = build_hamiltonian(&g, scattering_length, neighbor_cutoff)?;
        Ok(analyze_spectrum(&h.matrix, cs, reference))
    });
    let scale = crate::units::kernel_to_hartree(scattering_length);
    Ok(SweepTable { t1: t1_grid.to_vec(), points, reference, scale })
}

/// Thresholds of the edge-state classifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    /// A level spacing wider than this many median spacings is a gap.
    pub gap_factor: f64,
    pub edge_threshold: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self { gap_factor: 3.0, edge_threshold: 0.6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateLabel {
    Bulk,
    Edge,
    Ambiguous,
}

/// Bulk bands and in-gap levels of a sorted spectrum.
///
/// Levels are first grouped into clusters split at spacings wider than
/// `gap_factor` times the median spacing; each such spacing is a gap.
/// Clusters with at most `max(2, n_cells / 4)` levels that sit between two
/// larger clusters are in-gap levels. In addition, on each side of a bulk
/// cluster that faces a gap, an outermost group of at most that many levels is
/// split off as in-gap when it is tight and more isolated from the cluster than the
/// cluster's own edge spacings. Spacings of a
/// finite-chain band shrink towards its edges, so this only catches levels
/// that sit in the gap but too close to a band for the global threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapStructure {
    /// Index ranges of the bulk bands, ascending.
    pub bands: Vec<Range<usize>>,
    /// For each level, `Some(g)` if it lies in the gap above bulk band `g`.
    pub in_gap: Vec<Option<usize>>,
}

impl GapStructure {
    pub fn in_gap_count(&self) -> usize {
        self.in_gap.iter().flatten().count()
    }

    pub fn in_gap_levels(&self, gap: usize) -> Vec<usize> {
        (0..self.in_gap.len()).filter(|&i| self.in_gap[i] == Some(gap)).collect()
    }

    /// Energy window `(top of band g, bottom of band g + 1)`.
    pub fn gap_edges(&self, energies: &[f64], gap: usize) -> Option<(f64, f64)> {
        let lo = self.bands.get(gap)?;
        let hi = self.bands.get(gap + 1)?;
        Some((energies[lo.end - 1], energies[hi.start]))
    }
}

pub fn gap_structure(energies: &[f64], n_cells: usize, gap_factor: f64) -> GapStructure {
    let n = energies.len();
    let mut in_gap = vec![None; n];
    if n < 2 {
        return GapStructure { bands: vec![0..n], in_gap };
    }
    let spacings: Vec<f64> = energies.windows(2).map(|w| w[1] - w[0]).collect();
    let mut sorted = spacings.clone();
    sorted.sort_by(f64::total_cmp);
    let median = if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        0.5 * (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2])
    };
    let threshold = gap_factor * median;

    let mut clusters = Vec::new();
    let mut start = 0;
    for (i, &s) in spacings.iter().enumerate() {
        if s > threshold {
            clusters.push(start..i + 1);
            start = i + 1;
        }
    }
    clusters.push(start..n);

    let small = 2.max(n_cells / 4);
    let last = clusters.len() - 1;
    // (range, bulk) pieces in ascending order.
    let mut pieces: Vec<(Range<usize>, bool)> = Vec::new();
    for (ci, c) in clusters.iter().enumerate() {
        let bulk = c.len() > small || ci == 0 || ci == last;
        if !bulk {
            pieces.push((c.clone(), false));
            continue;
        }
        let (lo_k, hi_k) = edge_groups(&spacings, c, small, gap_factor, ci > 0, ci < last);
        if lo_k > 0 {
            pieces.push((c.start..c.start + lo_k, false));
        }
        pieces.push((c.start + lo_k..c.end - hi_k, true));
        if hi_k > 0 {
            pieces.push((c.end - hi_k..c.end, false));
        }
    }

    let mut bands: Vec<Range<usize>> = Vec::new();
    for (r, bulk) in pieces {
        if bulk {
            bands.push(r);
        } else {
            // Never below the first bulk band: the first cluster is bulk and
            // only its upper side can be split.
            let g = bands.len() - 1;
            for i in r {
                in_gap[i] = Some(g);
            }
        }
    }
    GapStructure { bands, in_gap }
}

/// Sizes of the in-gap groups at the lower and upper end of a bulk cluster.
///
/// A group of `2 ≤ k ≤ small` outermost levels qualifies when the spacing `s`
/// separating it from the cluster exceeds each of the next `small` spacings
/// inside the cluster, and the spacings within the group are below
/// `s / gap_factor`. Single levels are left to the global threshold: under
/// disorder an isolated band-edge level is common.
fn edge_groups(
    spacings: &[f64],
    c: &Range<usize>,
    small: usize,
    gap_factor: f64,
    lower: bool,
    upper: bool,
) -> (usize, usize) {
    if c.len() < 2 * small + 3 {
        return (0, 0);
    }
    // Spacing j joins levels j and j + 1. `at(i)` is the i-th spacing counted
    // inward from the chosen end of the cluster.
    let qualifies = |at: &dyn Fn(usize) -> f64, k: usize| {
        let s = at(k - 1);
        let inner = (k..k + small).all(|i| at(i) < s);
        let tight = (0..k - 1).all(|i| at(i) < s / gap_factor);
        inner && tight
    };
    let from_lo = |i: usize| spacings[c.start + i];
    let from_hi = |i: usize| spacings[c.end - 2 - i];
    let lo = if lower { (2..=small).find(|&k| qualifies(&from_lo, k)).unwrap_or(0) } else { 0 };
    let hi = if upper { (2..=small).find(|&k| qualifies(&from_hi, k)).unwrap_or(0) } else { 0 };
    (lo, hi)
}

/// Labels each state of a spectrum.
pub fn classify_spectrum(s: &Spectrum, opts: &ClassifyOptions) -> Vec<StateLabel> {
    let gs = gap_structure(&s.energies, s.n_cells(), opts.gap_factor);
    gs.in_gap
        .iter()
        .zip(&s.metrics)
        .map(|(g, m)| match (g.is_some(), m.edge_weight > opts.edge_threshold) {
            (true, true) => StateLabel::Edge,
            (false, false) => StateLabel::Bulk,
            _ => StateLabel::Ambiguous,
        })
        .collect()
}

/// Labels every state of every successful sweep point; failed points give
/// `None`.
pub fn classify_states(table: &SweepTable, opts: &ClassifyOptions) -> Result<Vec<Option<Vec<StateLabel>>>> {
    if table.points.is_empty() {
        return Err(Error::Domain("cannot classify an empty sweep".into()));
    }
    Ok(table
        .points
        .iter()
        .map(|p| p.as_ref().ok().map(|s| classify_spectrum(s, opts)))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DisorderKind {
    /// Angular offsets: hopping disorder, chiral-preserving.
    Angular,
    /// Radial offsets: on-site disorder, chiral-breaking.
    Radial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisorderSpec {
    pub kind: DisorderKind,
    /// Radians for angular disorder, bohr for radial disorder.
    pub sigma: f64,
    pub realizations: usize,
    pub master_seed: u64,
}

impl DisorderSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::Domain(format!("disorder sigma must be >= 0, got {}", self.sigma)));
        }
        if self.realizations == 0 {
            return Err(Error::Domain("at least one realization is required".into()));
        }
        Ok(())
    }
}

/// Offsets are Gaussian, truncated at this many standard deviations.
pub const TRUNCATION: f64 = 4.0;

/// Offsets for realization `r`, drawn from its own ChaCha8 stream so that the
/// result does not depend on which realizations run, or where.
pub fn draw_offsets(master_seed: u64, realization: u64, sigma: f64, n: usize) -> Vec<f64> {
    if sigma == 0.0 {
        return vec![0.0; n];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(realization);
    let normal = Normal::new(0.0, sigma).expect("sigma is finite and positive");
    (0..n)
        .map(|_| loop {
            let x: f64 = normal.sample(&mut rng);
            if x.abs() <= TRUNCATION * sigma {
                break x;
            }
        })
        .collect()
}

/// Statistics of one disordered realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationStats {
    /// In-gap levels anywhere in the spectrum.
    pub in_gap_count: usize,
    /// Energies of the in-gap levels in the gap that holds the tracked pair;
    /// empty if no detected gap contains it.
    pub mid_gap_energies: Vec<f64>,
    /// The two levels closest to the clean pair's mean energy.
    pub pair: (f64, f64),
    /// Both pair levels are in-gap levels of the gap that contains the target.
    pub pair_in_gap: bool,
    pub pair_splitting: f64,
    pub bulk_ipr: Vec<f64>,
    pub asymmetry: f64,
    pub bandwidth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub spec: DisorderSpec,
    pub clean: RealizationStats,
    /// Width of the clean gap that holds the pair, `None` if there is none.
    pub clean_gap: Option<f64>,
    pub realizations: Vec<RealizationStats>,
}

impl EnsembleStats {
    /// Fraction of realizations whose pair gap holds exactly `count` levels.
    pub fn fraction_with(&self, count: usize) -> f64 {
        let hits = self.realizations.iter().filter(|r| r.mid_gap_energies.len() == count).count();
        hits as f64 / self.realizations.len() as f64
    }

    /// Fraction of realizations in which the tracked pair sits in the gap.
    pub fn pair_persistence(&self) -> f64 {
        let hits = self.realizations.iter().filter(|r| r.pair_in_gap).count();
        hits as f64 / self.realizations.len() as f64
    }

    /// Variation of the tracked pair across realizations: `max − min` of the
    /// lower level or of the upper level, whichever is larger.
    pub fn pair_spread(&self) -> f64 {
        let range = |f: fn(&RealizationStats) -> f64| {
            let (lo, hi) = self
                .realizations
                .iter()
                .map(f)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), e| (a.min(e), b.max(e)));
            hi - lo
        };
        range(|r| r.pair.0).max(range(|r| r.pair.1))
    }

    pub fn mean_pair_splitting(&self) -> f64 {
        let n = self.realizations.len() as f64;
        self.realizations.iter().map(|r| r.pair_splitting).sum::<f64>() / n
    }

    pub fn max_asymmetry(&self) -> f64 {
        self.realizations.iter().map(|r| r.asymmetry).fold(0.0, f64::max)
    }
}

fn realization_stats(s: &Spectrum, target: f64, gap_factor: f64) -> RealizationStats {
    let gs = gap_structure(&s.energies, s.n_cells(), gap_factor);
    let levels = (0..gs.bands.len().saturating_sub(1))
        .find(|&g| gs.gap_edges(&s.energies, g).is_some_and(|(lo, hi)| lo < target && target < hi))
        .map(|g| gs.in_gap_levels(g))
        .unwrap_or_default();
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| (s.energies[a] - target).abs().total_cmp(&(s.energies[b] - target).abs()));
    let (i, j) = (order[0].min(order[1]), order[0].max(order[1]));
    let pair = (s.energies[i], s.energies[j]);
    let pair_in_gap = levels.contains(&i) && levels.contains(&j);
    let mid_gap_energies = levels.into_iter().map(|k| s.energies[k]).collect();
    let bulk_ipr = (0..s.len()).filter(|&i| gs.in_gap[i].is_none()).map(|i| s.metrics[i].ipr).collect();
    RealizationStats {
        in_gap_count: gs.in_gap_count(),
        mid_gap_energies,
        pair,
        pair_in_gap,
        pair_splitting: pair.1 - pair.0,
        bulk_ipr,
        asymmetry: s.asymmetry(),
        bandwidth: s.bandwidth(),
    }
}

/// Diagonalizes `spec.realizations` perturbed copies of `g`.
///
/// Energies are relative to the on-site energy of the clean ring. The pair
/// tracked in each realization is the two levels nearest to the mean of the
/// clean system's central pair.
pub fn disorder_ensemble(
    g: &RingGeometry,
    spec: &DisorderSpec,
    scattering_length: f64,
    neighbor_cutoff: Option<usize>,
    opts: &ClassifyOptions,
) -> Result<EnsembleStats> {
    spec.validate()?;
    if g.sites < 2 {
        return Err(Error::Domain("disorder ensembles need at least two sites".into()));
    }
    let reference = onsite_energy(g.nu, g.radius)?;
    let cs = g.pattern.cell_size();
    let clean_h = build_hamiltonian(g, scattering_length, neighbor_cutoff)?;
    let clean_s = analyze_spectrum(&clean_h.matrix, cs, reference);
    let n = clean_s.len();
    let mid = 0.5 * (clean_s.energies[(n - 1) / 2] + clean_s.energies[n / 2]);
    let clean = realization_stats(&clean_s, mid, opts.gap_factor);
    let target = 0.5 * (clean.pair.0 + clean.pair.1);
    let clean_gs = gap_structure(&clean_s.energies, clean_s.n_cells(), opts.gap_factor);
    let clean_gap = (0..clean_gs.bands.len().saturating_sub(1))
        .filter_map(|k| clean_gs.gap_edges(&clean_s.energies, k))
        .find(|&(lo, hi)| lo < target && target < hi)
        .map(|(lo, hi)| hi - lo);

    let indices: Vec<u64> = (0..spec.realizations as u64).collect();
    let realizations = par::map(&indices, |&r| -> Result<RealizationStats> {
        let offsets = draw_offsets(spec.master_seed, r, spec.sigma, g.sites);
        let perturbed = match spec.kind {
            DisorderKind::Angular => g.clone().with_offsets(offsets, g.radial_offsets.clone())?,
            DisorderKind::Radial => g.clone().with_offsets(g.angular_offsets.clone(), offsets)?,
        };
        let h = build_hamiltonian(&perturbed, scattering_length, neighbor_cutoff)?;
        let s = analyze_spectrum(&h.matrix, cs, reference);
        Ok(realization_stats(&s, target, opts.gap_factor))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(EnsembleStats { spec: *spec, clean, clean_gap, realizations })
}

/// Radial σ that shifts a site's on-site energy by as much as an angular σ
/// shifts its bond to the neighbour at arclength `t2`, both to first order.
pub fn matched_radial_sigma(g: &RingGeometry, sigma_angular: f64) -> Result<f64> {
    let t = match g.pattern {
        CellPattern::Dimer { t2, .. } | CellPattern::Trimer { t2, .. } | CellPattern::Triangle { t2, .. } => t2,
    };
    let r = g.radius;
    let h = 1e-4 * t;
    let dv = (g.coupling_at(t + h)? - g.coupling_at(t - h)?) / (2.0 * h);
    let hr = 1e-4 * r;
    let de = (onsite_energy(g.nu, r + hr)? - onsite_energy(g.nu, r - hr)?) / (2.0 * hr);
    if de == 0.0 {
        return Err(Error::Domain("on-site energy is stationary at this radius".into()));
    }
    Ok((dv * r * sigma_angular / de).abs())
}
