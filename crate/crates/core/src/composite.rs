//! Scatterer rings and the effective Hamiltonian of a Rydberg composite.
//!
//! Within the degenerate ν manifold, scatterers at `R_q` couple through
//!
//! ```text
//! V(q, q') = [u'(x₋) u(x₊) − u(x₋) u'(x₊)] / (2 (x₊ − x₋)),
//! x± = ½ (R_q + R_q' ± |R_q − R_q'|)
//! ```
//!
//! with `u = u_{ν0}` the s-wave reduced radial function. (The published form
//! of this kernel writes `u(t₋)` in the second product; it is `u(x₋)`.) The
//! diagonal is the `|R_q − R_q'| → 0` limit of the same expression.
//!
//! All matrices here are in *kernel units*; multiply by
//! [`CompositeHamiltonian::scale`] for hartree.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::hydrogenic::s_wave;
use crate::units::kernel_to_hartree;
use crate::{par, Error, Result};

/// Sites closer than this (bohr) are rejected; the zero-range model does not
/// apply there.
pub const MIN_SITE_SEPARATION: f64 = 1e-6;

/// Arclength pattern of one unit cell.
///
/// `t1` is always the parameter that is swept. In the dimer it is the first
/// (intracell) gap of the chain; in the trimer and triangle chains it is the
/// gap between cells, and each chain starts with the intracell gaps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum CellPattern {
    Dimer { t1: f64, t2: f64 },
    Trimer { t1: f64, t2: f64, t3: f64 },
    /// Three sites spaced by `t2`, cells separated by `t1`.
    Triangle { t1: f64, t2: f64 },
}

impl CellPattern {
    pub fn cell_size(&self) -> usize {
        match self {
            CellPattern::Dimer { .. } => 2,
            CellPattern::Trimer { .. } | CellPattern::Triangle { .. } => 3,
        }
    }

    /// Gaps between consecutive sites, in chain order, for one period.
    pub fn gap_sequence(&self) -> Vec<f64> {
        match *self {
            CellPattern::Dimer { t1, t2 } => vec![t1, t2],
            CellPattern::Trimer { t1, t2, t3 } => vec![t2, t3, t1],
            CellPattern::Triangle { t1, t2 } => vec![t2, t2, t1],
        }
    }

    pub fn t1(&self) -> f64 {
        match *self {
            CellPattern::Dimer { t1, .. }
            | CellPattern::Trimer { t1, .. }
            | CellPattern::Triangle { t1, .. } => t1,
        }
    }

    pub fn t2(&self) -> f64 {
        match *self {
            CellPattern::Dimer { t2, .. }
            | CellPattern::Trimer { t2, .. }
            | CellPattern::Triangle { t2, .. } => t2,
        }
    }

    pub fn with_t1(&self, t1: f64) -> Self {
        let mut p = *self;
        match &mut p {
            CellPattern::Dimer { t1: x, .. }
            | CellPattern::Trimer { t1: x, .. }
            | CellPattern::Triangle { t1: x, .. } => *x = t1,
        }
        p
    }

    pub fn name(&self) -> &'static str {
        match self {
            CellPattern::Dimer { .. } => "dimer",
            CellPattern::Trimer { .. } => "trimer",
            CellPattern::Triangle { .. } => "triangle",
        }
    }
}

/// Polar coordinates of a scatterer in the ring plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SitePosition {
    pub radius: f64,
    pub angle: f64,
}

/// Scatterers on a (broken) ring around the Rydberg core.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RingGeometry {
    pub nu: u32,
    /// Nominal ring radius (bohr).
    pub radius: f64,
    pub sites: usize,
    pub pattern: CellPattern,
    /// Per-site angle perturbations (rad). Empty means all zero.
    #[serde(default)]
    pub angular_offsets: Vec<f64>,
    /// Per-site radius perturbations (bohr). Empty means all zero.
    #[serde(default)]
    pub radial_offsets: Vec<f64>,
}

impl RingGeometry {
    pub fn new(nu: u32, radius: f64, sites: usize, pattern: CellPattern) -> Result<Self> {
        let g = Self {
            nu,
            radius,
            sites,
            pattern,
            angular_offsets: Vec::new(),
            radial_offsets: Vec::new(),
        };
        g.validate()?;
        Ok(g)
    }

    pub fn with_offsets(mut self, angular: Vec<f64>, radial: Vec<f64>) -> Result<Self> {
        self.angular_offsets = angular;
        self.radial_offsets = radial;
        self.validate()?;
        Ok(self)
    }

    /// Same geometry with the swept arclength replaced.
    pub fn with_t1(&self, t1: f64) -> Result<Self> {
        let mut g = self.clone();
        g.pattern = self.pattern.with_t1(t1);
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nu == 0 {
            return Err(Error::Geometry("nu must be >= 1".into()));
        }
        if self.sites == 0 {
            return Err(Error::Geometry("at least one scatterer is required".into()));
        }
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return Err(Error::Geometry(format!("ring radius must be positive, got {}", self.radius)));
        }
        for (name, offs) in [("angular", &self.angular_offsets), ("radial", &self.radial_offsets)] {
            if !offs.is_empty() && offs.len() != self.sites {
                return Err(Error::Geometry(format!(
                    "{name} offsets have length {} but there are {} sites",
                    offs.len(),
                    self.sites
                )));
            }
            if offs.iter().any(|x| !x.is_finite()) {
                return Err(Error::Geometry(format!("{name} offsets must be finite")));
            }
        }
        let gaps = self.pattern.gap_sequence();
        if gaps.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
            return Err(Error::Geometry(format!("arclengths must be positive, got {gaps:?}")));
        }
        let pos = self.positions();
        if let Some(bad) = pos.iter().position(|p| !(p.radius > 0.0)) {
            return Err(Error::Geometry(format!("site {bad} has non-positive radius")));
        }
        let span = pos.last().unwrap().angle - pos[0].angle;
        if span >= 2.0 * std::f64::consts::PI {
            return Err(Error::Geometry(format!(
                "sites subtend {span:.4} rad; the ring must stay open (< 2π)"
            )));
        }
        if self.sites as u32 >= self.nu {
            log::warn!(
                "M = {} is not below nu = {}; couplings beyond nearest neighbours will not be negligible",
                self.sites,
                self.nu
            );
        }
        Ok(())
    }

    /// Site coordinates; see [`ring_positions`].
    pub fn positions(&self) -> Vec<SitePosition> {
        ring_positions(self)
    }

    /// Coupling at arclength `d` on the nominal ring.
    pub fn coupling_at(&self, arclength: f64) -> Result<f64> {
        arc_coupling(self.nu, self.radius, arclength)
    }
}

/// Site coordinates: the first site sits at angle 0, consecutive angular gaps
/// repeat the cell pattern divided by the nominal radius, and the offsets are
/// added on top.
pub fn ring_positions(g: &RingGeometry) -> Vec<SitePosition> {
    let gaps = g.pattern.gap_sequence();
    let mut angle = 0.0;
    (0..g.sites)
        .map(|q| {
            if q > 0 {
                angle += gaps[(q - 1) % gaps.len()] / g.radius;
            }
            SitePosition {
                radius: g.radius + g.radial_offsets.get(q).copied().unwrap_or(0.0),
                angle: angle + g.angular_offsets.get(q).copied().unwrap_or(0.0),
            }
        })
        .collect()
}

/// Euclidean distance between two coplanar sites.
pub fn chord(a: SitePosition, b: SitePosition) -> f64 {
    let half = 0.5 * (b.angle - a.angle);
    if a.radius == b.radius {
        2.0 * a.radius * half.sin().abs()
    } else {
        let dr = a.radius - b.radius;
        let s = 2.0 * (a.radius * b.radius).sqrt() * half.sin();
        (dr * dr + s * s).sqrt()
    }
}

/// Closed-form coupling between two scatterers at radii `r1`, `r2` separated
/// by `chord`, in kernel units.
pub fn pair_coupling(nu: u32, r1: f64, r2: f64, chord: f64) -> Result<f64> {
    if !(chord > 0.0) {
        return Err(Error::Domain(format!(
            "pair coupling needs a positive separation (got {chord}); use onsite_energy"
        )));
    }
    if chord < MIN_SITE_SEPARATION {
        return Err(Error::Geometry(format!("scatterers coincide (separation {chord:e} bohr)")));
    }
    if !(r1 > 0.0 && r2 > 0.0) {
        return Err(Error::Domain("scatterer radii must be positive".into()));
    }
    let sum = r1 + r2;
    if chord > sum * (1.0 + 1e-12) {
        return Err(Error::Domain(format!("separation {chord} exceeds r1 + r2 = {sum}")));
    }
    let x_minus = (0.5 * (sum - chord)).max(0.0);
    let x_plus = 0.5 * (sum + chord);
    let lo = s_wave(nu, x_minus)?;
    let hi = s_wave(nu, x_plus)?;
    Ok((lo.du * hi.u - lo.u * hi.du) / (2.0 * (x_plus - x_minus)))
}

/// Zero-separation limit of [`pair_coupling`]:
/// `E = [u'(R)² − (1/ν² − 2/R) u(R)²] / 2`, using `u'' = (1/ν² − 2/r) u`.
pub fn onsite_energy(nu: u32, radius: f64) -> Result<f64> {
    let v = s_wave(nu, radius)?;
    let k = 1.0 / f64::from(nu).powi(2) - 2.0 / radius;
    Ok(0.5 * (v.du * v.du - k * v.u * v.u))
}

/// Coupling between two sites on a ring of radius `radius` separated by the
/// arclength `arclength`.
pub fn arc_coupling(nu: u32, radius: f64, arclength: f64) -> Result<f64> {
    let c = 2.0 * radius * (arclength / (2.0 * radius)).sin().abs();
    pair_coupling(nu, radius, radius, c)
}

/// Interaction curve `V(D)` around a ring of radius `radius`.
pub fn coupling_profile(nu: u32, radius: f64, arclengths: &[f64]) -> Result<Vec<f64>> {
    let circumference = 2.0 * std::f64::consts::PI * radius;
    if let Some(&d) = arclengths.iter().find(|&&d| !(d > 0.0 && d < circumference)) {
        return Err(Error::Domain(format!("arclength {d} outside (0, 2πR)")));
    }
    arclengths.iter().map(|&d| arc_coupling(nu, radius, d)).collect()
}

/// Effective M×M Hamiltonian of a composite.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeHamiltonian {
    /// Kernel-unit matrix: on-site energies on the diagonal, couplings off it.
    pub matrix: DMatrix<f64>,
    /// Factor converting kernel units to hartree.
    pub scale: f64,
    pub positions: Vec<SitePosition>,
}

impl CompositeHamiltonian {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn in_hartree(&self) -> DMatrix<f64> {
        &self.matrix * self.scale
    }
}

/// Assembles the composite Hamiltonian.
///
/// With `neighbor_cutoff = Some(c)`, entries with `|q − q'| > c` are left at
/// zero; by default the matrix is dense.
pub fn build_hamiltonian(
    g: &RingGeometry,
    scattering_length: f64,
    neighbor_cutoff: Option<usize>,
) -> Result<CompositeHamiltonian> {
    if scattering_length == 0.0 || !scattering_length.is_finite() {
        return Err(Error::Domain("scattering length must be finite and non-zero".into()));
    }
    g.validate()?;
    let pos = g.positions();
    let m = pos.len();
    let rows: Vec<usize> = (0..m).collect();
    let computed = par::map(&rows, |&q| -> Result<Vec<f64>> {
        let mut row = Vec::with_capacity(m - q);
        row.push(onsite_energy(g.nu, pos[q].radius)?);
        for qp in q + 1..m {
            if neighbor_cutoff.is_some_and(|c| qp - q > c) {
                row.push(0.0);
                continue;
            }
            let d = chord(pos[q], pos[qp]);
            if d < MIN_SITE_SEPARATION {
                return Err(Error::Geometry(format!("sites {q} and {qp} coincide")));
            }
            row.push(pair_coupling(g.nu, pos[q].radius, pos[qp].radius, d)?);
        }
        Ok(row)
    });
    let mut matrix = DMatrix::zeros(m, m);
    for (q, row) in computed.into_iter().enumerate() {
        for (i, v) in row?.into_iter().enumerate() {
            let qp = q + i;
            matrix[(q, qp)] = v;
            matrix[(qp, q)] = v;
        }
    }
    Ok(CompositeHamiltonian {
        matrix,
        scale: kernel_to_hartree(scattering_length),
        positions: pos,
    })
}

/// How [`design_ring`] solves for the ring radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DesignMode {
    /// Root of `V(θR) − V(2θR)` in `R` at fixed angle `θ` (only `n = 2`).
    ExactRoot,
    /// Minimise the relative spread of `V(jθR)`, `j = 1..n`, over `R` and `θ`.
    LeastSquares,
}

/// Result of [`design_ring`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RingDesign {
    pub radius: f64,
    /// Angular step between atoms of a cell (rad).
    pub angle_step: f64,
    /// `(max − min) / |mean|` of the `n` designed couplings.
    pub residual: f64,
    pub couplings: Vec<f64>,
    /// Every root found in the interval (exact-root mode only).
    #[serde(default)]
    pub roots: Vec<f64>,
}

fn designed_couplings(nu: u32, radius: f64, angle: f64, n: usize) -> Result<Vec<f64>> {
    (1..=n)
        .map(|j| arc_coupling(nu, radius, j as f64 * angle * radius))
        .collect()
}

fn relative_spread(v: &[f64]) -> f64 {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let (lo, hi) = v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    (hi - lo) / mean.abs()
}

fn normalized_variance(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    var / (mean * mean)
}

/// Finds ring parameters for which `n` atoms spaced by a common angle have
/// identical pairwise couplings, `V(θR) = V(2θR) = … = V(nθR)`.
///
/// `r_interval` is in bohr. In [`DesignMode::ExactRoot`] the angle is fixed at
/// `angle_step`; when the interval holds several roots, the one with the
/// weakest couplings at `3θR` and `4θR` relative to the designed coupling is
/// returned and all of them are listed in [`RingDesign::roots`]. In
/// [`DesignMode::LeastSquares`] the angle is only the centre of the angular
/// search window `[angle_step/4, 4 angle_step]`.
pub fn design_ring(
    nu: u32,
    angle_step: f64,
    n: usize,
    r_interval: (f64, f64),
    mode: DesignMode,
) -> Result<RingDesign> {
    let (lo, hi) = r_interval;
    if n < 2 {
        return Err(Error::Domain("cell size must be at least 2".into()));
    }
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Domain(format!("invalid radius interval [{lo}, {hi}]")));
    }
    if !(angle_step > 0.0) {
        return Err(Error::Domain("angle step must be positive".into()));
    }
    match mode {
        DesignMode::ExactRoot => {
            if n != 2 {
                return Err(Error::Domain("exact-root design is defined for n = 2 only".into()));
            }
            design_exact(nu, angle_step, lo, hi)
        }
        DesignMode::LeastSquares => design_least_squares(nu, angle_step, n, lo, hi),
    }
}

fn design_exact(nu: u32, angle: f64, lo: f64, hi: f64) -> Result<RingDesign> {
    let f = |r: f64| -> Result<f64> {
        Ok(arc_coupling(nu, r, angle * r)? - arc_coupling(nu, r, 2.0 * angle * r)?)
    };
    const SCAN: usize = 400;
    let mut brackets = Vec::new();
    let mut a = lo;
    let mut fa = f(a)?;
    for i in 1..=SCAN {
        let b = lo + (hi - lo) * i as f64 / SCAN as f64;
        let fb = f(b)?;
        if fa == 0.0 || fa.signum() != fb.signum() {
            brackets.push((a, fa, b, fb));
        }
        a = b;
        fa = fb;
    }
    if brackets.is_empty() {
        return Err(Error::NoRoot { lo, hi });
    }
    let roots = brackets
        .into_iter()
        .map(|(a, fa, b, fb)| refine_root(&f, a, fa, b, fb))
        .collect::<Result<Vec<f64>>>()?;

    // The coupling profile oscillates, so an interval usually holds several
    // roots. Keep the one whose couplings beyond the cell, V(3θR) and V(4θR),
    // are weakest relative to the designed coupling.
    let tail = |r: f64| -> Result<f64> {
        let u = arc_coupling(nu, r, angle * r)?.abs();
        let far = (3..=4)
            .map(|j| arc_coupling(nu, r, j as f64 * angle * r).map(f64::abs))
            .collect::<Result<Vec<f64>>>()?;
        Ok(far.into_iter().fold(0.0, f64::max) / u)
    };
    let mut best = (f64::INFINITY, roots[0]);
    for &r in &roots {
        let t = tail(r)?;
        log::debug!("design root R = {r} (tail ratio {t:.4})");
        if t < best.0 {
            best = (t, r);
        }
    }
    let radius = best.1;
    let couplings = designed_couplings(nu, radius, angle, 2)?;
    Ok(RingDesign {
        radius,
        angle_step: angle,
        residual: relative_spread(&couplings),
        couplings,
        roots,
    })
}

/// Illinois-modified regula falsi on a sign-changing bracket.
fn refine_root<F: Fn(f64) -> Result<f64>>(f: &F, mut a: f64, mut fa: f64, mut b: f64, mut fb: f64) -> Result<f64> {
    let mut side = 0i8;
    for _ in 0..200 {
        if fa == 0.0 {
            return Ok(a);
        }
        if fb == 0.0 || (b - a).abs() <= 1e-10 * b.abs() {
            break;
        }
        let c = (a * fb - b * fa) / (fb - fa);
        let c = if c > a.min(b) && c < a.max(b) { c } else { 0.5 * (a + b) };
        let fc = f(c)?;
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    Ok(if fb == 0.0 { b } else { 0.5 * (a + b) })
}

fn golden_min<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

fn design_least_squares(nu: u32, angle0: f64, n: usize, lo: f64, hi: f64) -> Result<RingDesign> {
    let theta_lo = 0.25 * angle0;
    let theta_hi = (4.0 * angle0).min(0.9 * 2.0 * std::f64::consts::PI / n as f64);
    if theta_hi <= theta_lo {
        return Err(Error::Domain("angle step too large for the requested cell size".into()));
    }
    let objective = |r: f64, th: f64| -> f64 {
        designed_couplings(nu, r, th, n)
            .map(|v| normalized_variance(&v))
            .ok()
            .filter(|x| x.is_finite())
            .unwrap_or(f64::INFINITY)
    };

    const NR: usize = 80;
    const NT: usize = 160;
    let radii: Vec<f64> = (0..NR).map(|i| lo + (hi - lo) * i as f64 / (NR - 1) as f64).collect();
    let dth = (theta_hi - theta_lo) / (NT - 1) as f64;
    let coarse = par::map(&radii, |&r| {
        (0..NT)
            .map(|j| {
                let th = theta_lo + dth * j as f64;
                (objective(r, th), th)
            })
            .fold((f64::INFINITY, theta_lo), |best, x| if x.0 < best.0 { x } else { best })
    });
    let (i_best, &(_, th_best)) = coarse
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
        .expect("non-empty scan");
    if !coarse[i_best].0.is_finite() {
        return Err(Error::Domain("coupling spread could not be evaluated on the search grid".into()));
    }

    let dr = (hi - lo) / (NR - 1) as f64;
    let r_a = (radii[i_best] - dr).max(lo);
    let r_b = (radii[i_best] + dr).min(hi);
    let inner = |r: f64| {
        golden_min(
            |th| objective(r, th),
            (th_best - 2.0 * dth).max(theta_lo),
            (th_best + 2.0 * dth).min(theta_hi),
            40,
        )
    };
    let (radius, _) = golden_min(|r| inner(r).1, r_a, r_b, 40);
    let (angle_step, _) = inner(radius);
    let couplings = designed_couplings(nu, radius, angle_step, n)?;
    Ok(RingDesign {
        radius,
        angle_step,
        residual: relative_spread(&couplings),
        couplings,
        roots: Vec::new(),
    })
}
