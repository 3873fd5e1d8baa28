//! One function per subcommand. Each merges its options, fills in defaults,
//! computes a table and reports the resolved options for the metadata file.

use std::f64::consts::PI;

use rydcomp::composite::{build_hamiltonian, coupling_profile, design_ring, CellPattern, DesignMode, RingGeometry};
use rydcomp::hydrogenic::radial_batch;
use rydcomp::lattices::{extract_chain_spec, ChainSpec};
use rydcomp::oracle::{compare_with_kernel, manifold_matrix, spectral_compare};
use rydcomp::spectra::{disorder_ensemble, sweep, ClassifyOptions, DisorderKind, DisorderSpec};
use rydcomp::topology::{min_gap, phase_diagram, zak_result_from, BlochSolution, GapSelector, KMesh, CRITICAL_GAP};
use serde::Serialize;

use crate::config::*;
use crate::output::{Cell, Plot, Table};
use crate::CliError;

/// What a command hands back for writing.
pub struct Report {
    pub table: Table,
    pub plot: Plot,
    /// Resolved options, written as the subcommand's table of the metadata.
    pub options: toml::Table,
    pub seed: Option<u64>,
    /// Short summary for stdout.
    pub summary: Vec<String>,
}

pub fn execute(command: &Command, file: Option<&ConfigFile>, common: &Common) -> Result<Report, CliError> {
    let name = command.name();
    match command {
        Command::Radial(o) => radial(merge(o, file, name)?),
        Command::Profile(o) => profile(merge(o, file, name)?, common),
        Command::Sweep(o) => sweep_cmd(merge(o, file, name)?, common),
        Command::Zak(o) => zak(merge(o, file, name)?, common),
        Command::PhaseDiagram(o) => phase(merge(o, file, name)?),
        Command::DesignRing(o) => design(merge(o, file, name)?, common),
        Command::Disorder(o) => disorder(merge(o, file, name)?, common),
        Command::OracleCompare(o) => oracle(merge(o, file, name)?),
    }
}

fn table_of<T: Serialize>(opts: &T) -> Result<toml::Table, CliError> {
    toml::Table::try_from(opts).map_err(|e| CliError::Io(format!("serializing options: {e}")))
}

fn linspace(from: f64, to: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![from];
    }
    (0..n).map(|i| from + (to - from) * i as f64 / (n - 1) as f64).collect()
}

fn unit_label(common: &Common) -> &'static str {
    common.energy_unit().label()
}

/// Energy conversion factor for the chosen unit.
fn factor(common: &Common) -> f64 {
    common.energy_unit().factor(common.a_s.unwrap())
}

/// The ring options shared by `sweep`, `zak` and `disorder`.
pub struct RingFields<'a> {
    pub model: &'a mut Option<Model>,
    pub nu: &'a mut Option<u32>,
    pub radius_factor: &'a mut Option<f64>,
    pub m: &'a mut Option<usize>,
    pub t2_frac: &'a mut Option<Fraction>,
    pub t3_frac: &'a mut Option<Fraction>,
    pub cutoff: &'a Option<usize>,
}

macro_rules! ring_fields {
    ($o:expr) => {
        RingFields {
            model: &mut $o.model,
            nu: &mut $o.nu,
            radius_factor: &mut $o.radius_factor,
            m: &mut $o.m,
            t2_frac: &mut $o.t2_frac,
            t3_frac: &mut $o.t3_frac,
            cutoff: &$o.cutoff,
        }
    };
}

/// Radius of the designed triangle ring, in units of nu^2.
fn designed_radius_factor(nu: u32, t2_frac: f64) -> Result<f64, CliError> {
    let nu2 = f64::from(nu) * f64::from(nu);
    let d = design_ring(nu, 2.0 * PI * t2_frac, 2, (1.5 * nu2, 2.0 * nu2), DesignMode::ExactRoot)?;
    Ok(d.radius / nu2)
}

/// Fills in ring defaults and builds the nominal geometry with t1 = t2.
fn resolve_ring(f: RingFields<'_>) -> Result<RingGeometry, CliError> {
    let model = required("model", f.model)?;
    let nu = required("nu", f.nu)?;
    let m = required("m", f.m)?;
    ensure(nu >= 1, "nu", "must be at least 1")?;
    ensure(m >= 2, "m", "must be at least 2")?;
    let t2_frac = f.t2_frac.get_or_insert_with(|| "1/45".parse().unwrap()).value();
    ensure(t2_frac > 0.0 && t2_frac < 0.5, "t2-frac", "must lie in (0, 1/2)")?;
    if model == Model::Trimer {
        f.t3_frac.get_or_insert_with(|| f.t2_frac.clone().unwrap());
    } else {
        ensure(f.t3_frac.is_none(), "t3-frac", "applies to the trimer model only")?;
    }
    if let Some(c) = f.cutoff {
        ensure(*c >= 1, "cutoff", "must be at least 1")?;
    }
    let rf = match *f.radius_factor {
        Some(rf) => rf,
        None if model == Model::Triangle => designed_radius_factor(nu, t2_frac)?,
        None => 2.0,
    };
    ensure(rf > 0.0 && rf.is_finite(), "radius-factor", "must be positive")?;
    *f.radius_factor = Some(rf);
    *f.model = Some(model);
    let radius = rf * f64::from(nu) * f64::from(nu);
    let t2 = 2.0 * PI * radius * t2_frac;
    let pattern = match model {
        Model::Dimer => CellPattern::Dimer { t1: t2, t2 },
        Model::Trimer => {
            let t3 = 2.0 * PI * radius * f.t3_frac.as_ref().unwrap().value();
            CellPattern::Trimer { t1: t2, t2, t3 }
        }
        Model::Triangle => CellPattern::Triangle { t1: t2, t2 },
    };
    Ok(RingGeometry::new(nu, radius, m, pattern)?)
}

/// Resolves the t1 range shared by `sweep` and `zak`.
fn resolve_t1_range(from: &mut Option<f64>, to: &mut Option<f64>, steps: &mut Option<usize>) -> Result<Vec<f64>, CliError> {
    let from = *from.get_or_insert(0.5);
    let to = *to.get_or_insert(1.5);
    let steps = *steps.get_or_insert(101);
    ensure(steps >= 1, "steps", "must be at least 1")?;
    ensure(from > 0.0 && to >= from, "t1-from", "need 0 < t1-from <= t1-to")?;
    Ok(linspace(from, to, steps))
}

fn radial(mut o: RadialOpts) -> Result<Report, CliError> {
    let nu = required("nu", &o.nu)?;
    ensure(nu >= 1, "nu", "must be at least 1")?;
    let l = *o.l.get_or_insert(0);
    ensure(l < nu, "l", "must be below nu")?;
    let from = o.r_from.get_or_insert_with(|| "1/1000".parse().unwrap()).value();
    let to = o.r_to.get_or_insert_with(|| "3".parse().unwrap()).value();
    let points = *o.points.get_or_insert(2001);
    ensure(from > 0.0, "r-from", "must be positive")?;
    ensure(to > from, "r-to", "must exceed r-from")?;
    ensure(points >= 2, "points", "must be at least 2")?;
    let nu2 = f64::from(nu) * f64::from(nu);
    let grid = linspace(from * nu2, to * nu2, points);
    let values = radial_batch(nu, l, &grid)?;
    let mut table = Table::new(vec!["r_bohr".into(), "u".into(), "du_dr".into()]);
    for (r, v) in grid.iter().zip(&values) {
        table.push(vec![(*r).into(), v.u.into(), v.du.into()]);
    }
    Ok(Report {
        table,
        plot: Plot::Lines { first: 2, last: 2, xlabel: "r (bohr)".into(), ylabel: "u(r)".into() },
        options: table_of(&o)?,
        seed: None,
        summary: vec![],
    })
}

fn profile(mut o: ProfileOpts, common: &Common) -> Result<Report, CliError> {
    let nu = required("nu", &o.nu)?;
    ensure(nu >= 1, "nu", "must be at least 1")?;
    let rf = *o.radius_factor.get_or_insert(2.0);
    ensure(rf > 0.0 && rf.is_finite(), "radius-factor", "must be positive")?;
    let from = o.d_from.get_or_insert_with(|| "1/200".parse().unwrap()).value();
    let to = o.d_to.get_or_insert_with(|| "1/2".parse().unwrap()).value();
    let points = *o.points.get_or_insert(1001);
    ensure(from > 0.0, "d-from", "must be positive")?;
    ensure(to > from && to <= 0.5, "d-to", "must lie in (d-from, 1/2]")?;
    ensure(points >= 2, "points", "must be at least 2")?;
    let radius = rf * f64::from(nu) * f64::from(nu);
    let fracs = linspace(from, to, points);
    let arcs: Vec<f64> = fracs.iter().map(|f| 2.0 * PI * radius * f).collect();
    let v = coupling_profile(nu, radius, &arcs)?;
    let k = factor(common);
    let unit = unit_label(common);
    let mut table = Table::new(vec!["D_over_2piR".into(), "D_bohr".into(), format!("V_{unit}")]);
    for ((f, d), v) in fracs.iter().zip(&arcs).zip(&v) {
        table.push(vec![(*f).into(), (*d).into(), (v * k).into()]);
    }
    Ok(Report {
        table,
        plot: Plot::Lines { first: 3, last: 3, xlabel: "D / 2 pi R".into(), ylabel: format!("V ({unit})") },
        options: table_of(&o)?,
        seed: None,
        summary: vec![],
    })
}

fn sweep_cmd(mut o: SweepOpts, common: &Common) -> Result<Report, CliError> {
    let base = resolve_ring(ring_fields!(o))?;
    let grid = resolve_t1_range(&mut o.t1_from, &mut o.t1_to, &mut o.steps)?;
    let t2 = base.pattern.t2();
    let arcs: Vec<f64> = grid.iter().map(|x| x * t2).collect();
    let result = sweep(&base, &arcs, common.a_s.unwrap(), o.cutoff)?;
    let m = base.sites;
    let k = factor(common);
    let unit = unit_label(common);
    let mut header = vec!["t1_over_t2".to_string()];
    header.extend((0..m).map(|i| format!("E{i}_{unit}")));
    header.extend((0..m).map(|i| format!("edge_weight{i}")));
    let mut table = Table::new(header);
    let mut failures = 0;
    for (x, point) in grid.iter().zip(&result.points) {
        let mut row: Vec<Cell> = vec![(*x).into()];
        match point {
            Ok(s) => {
                row.extend(s.energies.iter().map(|e| Cell::from(e * k)));
                row.extend(s.metrics.iter().map(|w| Cell::from(w.edge_weight)));
            }
            Err(e) => {
                log::warn!("t1/t2 = {x}: {e}");
                failures += 1;
                row.extend(std::iter::repeat(Cell::Float(f64::NAN)).take(2 * m));
            }
        }
        table.push(row);
    }
    if failures == grid.len() {
        return Err(result.points.into_iter().find_map(Result::err).unwrap().into());
    }
    Ok(Report {
        table,
        plot: Plot::Lines { first: 2, last: m + 1, xlabel: "t1 / t2".into(), ylabel: format!("E ({unit})") },
        options: table_of(&o)?,
        seed: None,
        summary: vec![format!("{} of {} points diagonalized", grid.len() - failures, grid.len())],
    })
}

fn zak(mut o: ZakOpts, common: &Common) -> Result<Report, CliError> {
    let base = resolve_ring(ring_fields!(o))?;
    let grid = resolve_t1_range(&mut o.t1_from, &mut o.t1_to, &mut o.steps)?;
    let nk = *o.nk.get_or_insert(rydcomp::topology::DEFAULT_NK);
    let mesh = KMesh::new(nk).map_err(|e| CliError::Config(format!("nk: {e}")))?;
    let convention = *o.convention.get_or_insert(Convention::Termination);
    ensure(
        convention == Convention::Termination || o.model == Some(Model::Dimer),
        "convention",
        "complementary cells apply to the dimer model only",
    )?;
    let cs = base.pattern.cell_size();
    let k = factor(common);
    let unit = unit_label(common);
    let mut header = vec!["t1_over_t2".to_string()];
    for g in 1..cs {
        header.push(format!("min_gap{g}_{unit}"));
        header.push(format!("zak_below_gap{g}"));
    }
    header.extend((0..cs).map(|b| format!("zak_band{b}")));
    header.push("quantization_defect".into());
    let mut table = Table::new(header.clone());
    let t2 = base.pattern.t2();
    let mut first_error = None;
    for &x in &grid {
        let row = base
            .with_t1(x * t2)
            .and_then(|g| extract_chain_spec(&g))
            .and_then(|spec| {
                let spec = if convention == Convention::Complementary { spec.complementary() } else { spec };
                zak_row(&spec, &mesh, k)
            });
        match row {
            Ok(cells) => {
                let mut r = vec![Cell::from(x)];
                r.extend(cells);
                table.push(r);
            }
            Err(e) => {
                log::warn!("t1/t2 = {x}: {e}");
                let mut r = vec![Cell::from(x)];
                r.extend(std::iter::repeat(Cell::Float(f64::NAN)).take(header.len() - 1));
                table.push(r);
                first_error.get_or_insert(e);
            }
        }
    }
    if let (Some(e), true) = (first_error, table.rows.iter().all(|r| matches!(r[1], Cell::Float(v) if v.is_nan()))) {
        return Err(e.into());
    }
    Ok(Report {
        table,
        plot: Plot::Lines { first: 3, last: 3, xlabel: "t1 / t2".into(), ylabel: "Zak phase below gap 1".into() },
        options: table_of(&o)?,
        seed: None,
        summary: vec![],
    })
}

/// Gaps, phases and the quantization defect of one chain; NaN where a phase
/// is undefined.
fn zak_row(spec: &ChainSpec, mesh: &KMesh, k: f64) -> rydcomp::Result<Vec<Cell>> {
    let model = spec.bloch();
    let sol = BlochSolution::new(&model, mesh);
    let cs = model.cell_size();
    let mut cells = Vec::new();
    let mut defect: f64 = 0.0;
    let mut per_band = Vec::new();
    for g in 1..cs {
        let r = zak_result_from(&sol, g)?;
        cells.push(Cell::from(min_gap(&model, g, mesh)? * k));
        cells.push(Cell::from(r.below_gap_sum.unwrap_or(f64::NAN)));
        defect = defect.max(r.quantization_defect);
        per_band = r.per_band;
    }
    cells.extend(per_band.iter().map(|p| Cell::from(p.unwrap_or(f64::NAN))));
    cells.push(defect.into());
    Ok(cells)
}

fn phase(mut o: PhaseDiagramOpts) -> Result<Report, CliError> {
    let u = *o.u.get_or_insert(-1.0);
    let c = *o.c.get_or_insert(0.0);
    ensure(u != 0.0 && u.is_finite(), "u", "must be finite and non-zero")?;
    let a0 = *o.a_from.get_or_insert(-3.0 * u.abs());
    let a1 = *o.a_to.get_or_insert(3.0 * u.abs());
    let b0 = *o.b_from.get_or_insert(-3.0 * u.abs());
    let b1 = *o.b_to.get_or_insert(3.0 * u.abs());
    ensure(a1 >= a0, "a-to", "must not be below a-from")?;
    ensure(b1 >= b0, "b-to", "must not be below b-from")?;
    let n = *o.grid.get_or_insert(101);
    ensure(n >= 1, "grid", "must be at least 1")?;
    let gap = match *o.gap.get_or_insert(Gap::Lower) {
        Gap::Lower => GapSelector::Lower,
        Gap::Upper => GapSelector::Upper,
    };
    let nk = *o.nk.get_or_insert(rydcomp::topology::DEFAULT_NK);
    let mesh = KMesh::new(nk).map_err(|e| CliError::Config(format!("nk: {e}")))?;
    let pd = phase_diagram(u, c, &linspace(a0, a1, n), &linspace(b0, b1, n), gap, &mesh)?;
    let mut table = Table::new(
        ["a", "b", "min_gap", "zak", "critical", "quantization_defect"].map(String::from).to_vec(),
    );
    for cell in &pd.cells {
        table.push(vec![
            cell.a.into(),
            cell.b.into(),
            cell.min_gap.into(),
            cell.phase.unwrap_or(f64::NAN).into(),
            cell.is_critical().into(),
            cell.quantization_defect.into(),
        ]);
    }
    let critical = pd.cells.iter().filter(|c| c.is_critical()).count();
    Ok(Report {
        table,
        plot: Plot::Map { z: 4, xlabel: "a".into(), ylabel: "b".into(), title: "Zak phase".into() },
        options: table_of(&o)?,
        seed: None,
        summary: vec![format!(
            "{critical} of {} cells critical (min gap < {CRITICAL_GAP} |u|)",
            pd.cells.len()
        )],
    })
}

fn design(mut o: DesignRingOpts, common: &Common) -> Result<Report, CliError> {
    let nu = required("nu", &o.nu)?;
    ensure(nu >= 1, "nu", "must be at least 1")?;
    let n = *o.n.get_or_insert(2);
    ensure(n >= 2, "n", "must be at least 2")?;
    let angle = 2.0 * PI * o.angle_frac.get_or_insert_with(|| "1/45".parse().unwrap()).value();
    ensure(angle > 0.0 && angle < PI, "angle-frac", "must lie in (0, 1/2)")?;
    let lo = *o.r_from.get_or_insert(1.5);
    let hi = *o.r_to.get_or_insert(2.0);
    ensure(lo > 0.0 && hi > lo, "r-to", "need 0 < r-from < r-to")?;
    let mode = *o.mode.get_or_insert(if n == 2 { Mode::ExactRoot } else { Mode::LeastSquares });
    ensure(mode == Mode::LeastSquares || n == 2, "mode", "exact-root needs n = 2")?;
    let core_mode = match mode {
        Mode::ExactRoot => DesignMode::ExactRoot,
        Mode::LeastSquares => DesignMode::LeastSquares,
    };
    let nu2 = f64::from(nu) * f64::from(nu);
    let d = design_ring(nu, angle, n, (lo * nu2, hi * nu2), core_mode)?;
    let k = factor(common);
    let unit = unit_label(common);
    let mut header: Vec<String> = ["R_over_nu2", "R_bohr", "angle_rad", "selected"].map(String::from).to_vec();
    header.extend((1..=n).map(|j| format!("V{j}_{unit}")));
    header.push("relative_spread".into());
    let mut table = Table::new(header);
    let candidates = if d.roots.is_empty() { vec![d.radius] } else { d.roots.clone() };
    for &r in &candidates {
        let v: Vec<f64> = (1..=n)
            .map(|j| rydcomp::composite::arc_coupling(nu, r, j as f64 * d.angle_step * r))
            .collect::<rydcomp::Result<_>>()?;
        let mean = v.iter().sum::<f64>() / n as f64;
        let spread = (v.iter().copied().fold(f64::NEG_INFINITY, f64::max) - v.iter().copied().fold(f64::INFINITY, f64::min))
            / mean.abs();
        let mut row: Vec<Cell> = vec![(r / nu2).into(), r.into(), d.angle_step.into(), (r == d.radius).into()];
        row.extend(v.iter().map(|x| Cell::from(x * k)));
        row.push(spread.into());
        table.push(row);
    }
    Ok(Report {
        table,
        plot: Plot::Lines { first: 5, last: 4 + n, xlabel: "R / nu^2".into(), ylabel: format!("V ({unit})") },
        options: table_of(&o)?,
        seed: None,
        summary: vec![
            format!("R/nu^2 = {:.5}", d.radius / nu2),
            format!("angle = {:.6} rad, relative spread = {:.3e}", d.angle_step, d.residual),
        ],
    })
}

fn disorder(mut o: DisorderOpts, common: &Common) -> Result<Report, CliError> {
    let base = resolve_ring(ring_fields!(o))?;
    let t1 = *o.t1.get_or_insert(1.25);
    ensure(t1 > 0.0 && t1.is_finite(), "t1", "must be positive")?;
    let sigma = required("sigma", &o.sigma)?;
    ensure(sigma >= 0.0 && sigma.is_finite(), "sigma", "must be finite and non-negative")?;
    let kind = match *o.kind.get_or_insert(Kind::Angular) {
        Kind::Angular => DisorderKind::Angular,
        Kind::Radial => DisorderKind::Radial,
    };
    let realizations = *o.realizations.get_or_insert(100);
    ensure(realizations >= 1, "realizations", "must be at least 1")?;
    let seed = *o.seed.get_or_insert(0);
    // TOML integers are signed 64-bit.
    ensure(i64::try_from(seed).is_ok(), "seed", "must fit a signed 64-bit integer")?;
    let g = base.with_t1(t1 * base.pattern.t2())?;
    let spec = DisorderSpec { kind, sigma, realizations, master_seed: seed };
    let stats = disorder_ensemble(&g, &spec, common.a_s.unwrap(), o.cutoff, &ClassifyOptions::default())?;
    let k = factor(common);
    let unit = unit_label(common);
    let header = [
        "realization".to_string(),
        "in_gap_count".into(),
        "mid_gap_count".into(),
        "pair_in_gap".into(),
        format!("pair_lower_{unit}"),
        format!("pair_upper_{unit}"),
        format!("pair_splitting_{unit}"),
        "asymmetry".into(),
        format!("bandwidth_{unit}"),
        "mean_bulk_ipr".into(),
    ];
    let mut table = Table::new(header.to_vec());
    // Realization -1 is the clean ring.
    let rows = std::iter::once((-1i64, &stats.clean)).chain(stats.realizations.iter().enumerate().map(|(i, r)| (i as i64, r)));
    for (i, r) in rows {
        let ipr = if r.bulk_ipr.is_empty() { f64::NAN } else { r.bulk_ipr.iter().sum::<f64>() / r.bulk_ipr.len() as f64 };
        table.push(vec![
            Cell::Int(i),
            r.in_gap_count.into(),
            r.mid_gap_energies.len().into(),
            r.pair_in_gap.into(),
            (r.pair.0 * k).into(),
            (r.pair.1 * k).into(),
            (r.pair_splitting * k).into(),
            r.asymmetry.into(),
            (r.bandwidth * k).into(),
            ipr.into(),
        ]);
    }
    let mut summary = vec![format!("pair persistence = {:.4}", stats.pair_persistence())];
    if let Some(gap) = stats.clean_gap {
        summary.push(format!("pair spread / gap = {:.4e}", stats.pair_spread() / gap));
    }
    Ok(Report {
        table,
        plot: Plot::Lines { first: 5, last: 6, xlabel: "realization".into(), ylabel: format!("pair energy ({unit})") },
        options: table_of(&o)?,
        seed: Some(seed),
        summary,
    })
}

fn oracle(mut o: OracleCompareOpts) -> Result<Report, CliError> {
    let nus = o.nu_list.get_or_insert_with(|| vec![10, 20, 30]).clone();
    ensure(!nus.is_empty() && nus.iter().all(|&n| n >= 1), "nu-list", "needs principal quantum numbers >= 1")?;
    let m = *o.m.get_or_insert(6);
    ensure(m >= 2, "m", "must be at least 2")?;
    let rf = *o.radius_factor.get_or_insert(2.0);
    ensure(rf > 0.0 && rf.is_finite(), "radius-factor", "must be positive")?;
    let t1 = *o.t1.get_or_insert(1.0);
    ensure(t1 > 0.0, "t1", "must be positive")?;
    let t2_frac = o.t2_frac.get_or_insert_with(|| "1/45".parse().unwrap()).value();
    ensure(t2_frac > 0.0 && t2_frac < 0.5, "t2-frac", "must lie in (0, 1/2)")?;
    let l_min = *o.l_min.get_or_insert(0);
    let mut table = Table::new(["nu", "deviation", "scale_ratio"].map(String::from).to_vec());
    for &nu in &nus {
        ensure(l_min < nu, "l-min", "must be below every nu")?;
        let radius = rf * f64::from(nu) * f64::from(nu);
        let t2 = 2.0 * PI * radius * t2_frac;
        let g = RingGeometry::new(nu, radius, m, CellPattern::Dimer { t1: t1 * t2, t2 })?;
        let (deviation, ratio) = if l_min == 0 {
            let c = compare_with_kernel(&g)?;
            (c.deviation, c.scale_ratio)
        } else {
            // The truncated sum is not expected to match the kernel's scale.
            let kernel = build_hamiltonian(&g, 1.0, None)?.matrix;
            let s = manifold_matrix(&g, l_min)?.s;
            (spectral_compare(&kernel, &s)?, f64::NAN)
        };
        table.push(vec![Cell::Int(i64::from(nu)), deviation.into(), ratio.into()]);
    }
    Ok(Report {
        table,
        plot: Plot::Lines { first: 2, last: 2, xlabel: "nu".into(), ylabel: "deviation".into() },
        options: table_of(&o)?,
        seed: None,
        summary: vec![],
    })
}
