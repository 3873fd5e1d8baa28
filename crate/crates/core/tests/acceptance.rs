//! Acceptance suite. Every test prints one `A<n> PASS|FAIL` line followed by
//! the individual checks, then asserts. Run with
//! `cargo test -p rydcomp --test acceptance -- --nocapture --test-threads=1`.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rydcomp::composite::{
    arc_coupling, build_hamiltonian, design_ring, CellPattern, DesignMode, RingGeometry,
};
use rydcomp::hydrogenic::{radial_u, RadialQuery};
use rydcomp::lattices::{extract_chain_spec, finite_chain, ChainSpec};
use rydcomp::oracle::compare_with_kernel;
use rydcomp::spectra::{
    analyze_spectrum, disorder_ensemble, gap_structure, matched_radial_sigma, sweep,
    ClassifyOptions, DisorderKind, DisorderSpec,
};
use rydcomp::topology::{
    band_structure, indirect_gap, min_gap, phase_diagram, quantization_defect, BlochSolution, GapSelector,
    KMesh, CRITICAL_GAP,
};
use rydcomp::units::{kernel_to_hartree, DEFAULT_SCATTERING_LENGTH, HARTREE_IN_MHZ};

const NU: u32 = 60;
const NU2: f64 = 3600.0;

struct Report {
    id: &'static str,
    checks: Vec<(String, bool, String)>,
}

impl Report {
    fn new(id: &'static str) -> Self {
        Self { id, checks: Vec::new() }
    }

    fn check(&mut self, name: &str, ok: bool, detail: impl Into<String>) {
        self.checks.push((name.to_string(), ok, detail.into()));
    }

    fn timed(&mut self, name: &str, elapsed: Duration, limit: Duration) {
        self.check(name, elapsed < limit, format!("{:.2} s (limit {} s)", elapsed.as_secs_f64(), limit.as_secs()));
    }

    fn finish(self) {
        let pass = self.checks.iter().all(|c| c.1);
        println!("{} {}", self.id, if pass { "PASS" } else { "FAIL" });
        for (name, ok, detail) in &self.checks {
            println!("    [{}] {name}: {detail}", if *ok { "ok" } else { "FAILED" });
        }
        let failed: Vec<&str> = self.checks.iter().filter(|c| !c.1).map(|c| c.0.as_str()).collect();
        assert!(pass, "{} failed: {failed:?}", self.id);
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn is_pi(z: f64) -> bool {
    (z.abs() - PI).abs() < 1e-6
}

/// ν = 60 ring at R = 2ν² with t2 = 2πR/45.
fn reference_ring(sites: usize, pattern: impl Fn(f64) -> CellPattern) -> RingGeometry {
    let r = 2.0 * NU2;
    RingGeometry::new(NU, r, sites, pattern(2.0 * PI * r / 45.0)).unwrap()
}

/// Triangle ring at the designed radius, `t1` in units of the radius.
fn triangle_ring(t1_over_r: f64) -> RingGeometry {
    let d = design_ring(NU, 2.0 * PI / 45.0, 2, (1.5 * NU2, 2.0 * NU2), DesignMode::ExactRoot).unwrap();
    let r = d.radius;
    RingGeometry::new(NU, r, 24, CellPattern::Triangle { t1: t1_over_r * r, t2: d.angle_step * r }).unwrap()
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + h * i as f64);
    }
    s * h / 3.0
}

#[test]
fn a01_hydrogenic_suite() {
    let start = Instant::now();
    let mut rep = Report::new("A1");
    let u = |nu: u32, l: u32, r: f64| radial_u(RadialQuery::new(nu, l, r)).unwrap();

    let mut worst_norm = 0.0f64;
    let mut node_errors = Vec::new();
    let mut worst_ode = 0.0f64;
    for nu in [1u32, 2, 10, 30, 60] {
        let nuf = f64::from(nu);
        let r_max = 4.0 * nuf * nuf + 60.0 * nuf;
        for l in [0, nu / 2, nu - 1] {
            // r = x² resolves the short-wavelength region near the core.
            let x_max = r_max.sqrt();
            let norm = simpson(|x| if x == 0.0 { 0.0 } else { 2.0 * x * u(nu, l, x * x).u.powi(2) }, 0.0, x_max, 40_000);
            worst_norm = worst_norm.max((norm - 1.0).abs());

            let xs = linspace(0.0, x_max, 20_001);
            let values: Vec<f64> = xs[1..].iter().map(|x| u(nu, l, x * x).u).collect();
            // Underflowed samples near the core are skipped, not counted.
            let nonzero: Vec<f64> = values.into_iter().filter(|v| *v != 0.0).collect();
            let nodes = nonzero.windows(2).filter(|w| w[0].signum() != w[1].signum()).count();
            if nodes != (nu - l - 1) as usize {
                node_errors.push(format!("nu={nu} l={l}: {nodes}"));
            }

            // u'' from a central difference of the analytic u', compared with
            // the radial equation, relative to max |u''| on the grid.
            let ll = f64::from(l * (l + 1));
            let mut res = 0.0f64;
            let mut scale = 0.0f64;
            for x in linspace(0.05 * x_max, 0.95 * x_max, 400) {
                let r = x * x;
                let h = 1e-4 * r.min(nuf);
                let d2 = (u(nu, l, r + h).du - u(nu, l, r - h).du) / (2.0 * h);
                let rhs = (1.0 / (nuf * nuf) - 2.0 / r + ll / (r * r)) * u(nu, l, r).u;
                res = res.max((d2 - rhs).abs());
                scale = scale.max(rhs.abs());
            }
            worst_ode = worst_ode.max(res / scale);
        }
    }
    rep.check("normalization", worst_norm < 1e-8, format!("max |∫u² − 1| = {worst_norm:.2e}"));
    rep.check("node counts", node_errors.is_empty(), format!("mismatches: {node_errors:?}"));
    rep.check("ODE residual", worst_ode < 1e-6, format!("max relative residual = {worst_ode:.2e}"));

    let mut worst_closed = 0.0f64;
    for r in linspace(0.05, 25.0, 200) {
        let cases = [
            (1, 0, 2.0 * r * (-r).exp()),
            (2, 0, r * (1.0 - r / 2.0) * (-r / 2.0).exp() / 2f64.sqrt()),
            (2, 1, r * r * (-r / 2.0).exp() / (2.0 * 6f64.sqrt())),
        ];
        for (nu, l, exact) in cases {
            let v = u(nu, l, r).u;
            let err = (v - exact).abs() / exact.abs().max(1e-300);
            if (r - 2.0).abs() > 1e-9 || nu != 2 || l != 0 {
                worst_closed = worst_closed.max(err);
            }
        }
    }
    rep.check("closed forms nu <= 2", worst_closed < 1e-12, format!("max relative error {worst_closed:.2e}"));
    rep.timed("runtime", start.elapsed(), Duration::from_secs(60));
    rep.finish();
}

#[test]
fn a02_ssh_composite_spectrum() {
    let mut rep = Report::new("A2");
    let base = reference_ring(36, |t| CellPattern::Dimer { t1: t, t2: t });
    let t2 = base.pattern.t2();
    let grid: Vec<f64> = linspace(0.75, 1.25, 101).into_iter().map(|f| f * t2).collect();
    let start = Instant::now();
    let table = sweep(&base, &grid, DEFAULT_SCATTERING_LENGTH, None).unwrap();
    let elapsed = start.elapsed();

    let uniform = table.points[50].as_ref().unwrap();
    let centre = uniform.energies[18] - uniform.energies[17];
    let rel = centre / uniform.bandwidth();
    rep.check("band-centre gap at t1 = t2 < 2% of bandwidth", rel < 0.02, format!("{:.3}%", 100.0 * rel));

    let s = table.points[100].as_ref().unwrap();
    let gs = gap_structure(&s.energies, s.n_cells(), 3.0);
    let in_gap: Vec<usize> = (0..s.len()).filter(|&i| gs.in_gap[i].is_some()).collect();
    rep.check("exactly two in-gap states at t1 = 1.25 t2", in_gap.len() == 2, format!("{} in-gap states", in_gap.len()));
    if in_gap.len() == 2 {
        let split = (s.energies[in_gap[1]] - s.energies[in_gap[0]]) / s.bandwidth();
        rep.check("splitting < 1e-3 bandwidth", split < 1e-3, format!("{split:.2e}"));
        let w: Vec<f64> = in_gap.iter().map(|&i| s.metrics[i].edge_weight).collect();
        rep.check("edge_weight > 0.9 each", w.iter().all(|&x| x > 0.9), format!("{w:.4?}"));
    }
    rep.timed("101-point sweep", elapsed, Duration::from_secs(30));
    rep.finish();
}

#[test]
fn a03_dimer_zak_convention() {
    let mut rep = Report::new("A3");
    let base = reference_ring(36, |t| CellPattern::Dimer { t1: t, t2: t });
    let t2 = base.pattern.t2();
    let fractions = linspace(0.75, 1.25, 101);
    let grid: Vec<f64> = fractions.iter().map(|f| f * t2).collect();
    let table = sweep(&base, &grid, DEFAULT_SCATTERING_LENGTH, None).unwrap();
    let mesh = KMesh::default();
    let opts = ClassifyOptions::default();

    let mut mismatch = Vec::new();
    let mut complementary_mismatch = Vec::new();
    let mut defect = 0.0f64;
    for ((&f, &t1), p) in fractions.iter().zip(&grid).zip(&table.points) {
        if (f - 1.0).abs() < 1e-12 {
            continue; // gap closes
        }
        let spec = extract_chain_spec(&base.with_t1(t1).unwrap()).unwrap();
        let z = BlochSolution::new(&spec.bloch(), &mesh).zak_phase(&[0], false).unwrap();
        let zc = BlochSolution::new(&spec.complementary().bloch(), &mesh).zak_phase(&[0], false).unwrap();
        defect = defect.max(quantization_defect(z)).max(quantization_defect(zc));

        let s = p.as_ref().unwrap();
        let pair = gap_structure(&s.energies, s.n_cells(), opts.gap_factor).in_gap_count() == 2;
        if is_pi(z) != pair || is_pi(z) != (f > 1.0) {
            mismatch.push(format!("{f:.3}: Z={z:.3} pair={pair}"));
        }
        if is_pi(zc) != (f < 1.0) {
            complementary_mismatch.push(format!("{f:.3}"));
        }
    }
    rep.check(
        "termination-consistent: Z = pi <=> edge pair <=> t1 > t2",
        mismatch.is_empty(),
        format!("{} of 100 points disagree {mismatch:?}", mismatch.len()),
    );
    rep.check(
        "complementary cell: Z = pi <=> t2 > t1",
        complementary_mismatch.is_empty(),
        format!("{} disagreements", complementary_mismatch.len()),
    );
    rep.check("quantization defect < 1e-6", defect < 1e-6, format!("{defect:.2e}"));
    rep.finish();
}

#[test]
fn a04_trimer() {
    let mut rep = Report::new("A4");
    let base = reference_ring(36, |t| CellPattern::Trimer { t1: t, t2: t, t3: t });
    let t2 = base.pattern.t2();
    // 100 points: t1 = t2 exactly, where the lower and middle bands touch, is
    // not on the grid.
    let fractions = linspace(0.75, 1.25, 100);
    let grid: Vec<f64> = fractions.iter().map(|f| f * t2).collect();
    let table = sweep(&base, &grid, DEFAULT_SCATTERING_LENGTH, None).unwrap();
    let mesh = KMesh::default();

    let mut both_gaps_missing = Vec::new();
    let mut lower_mismatch = Vec::new();
    let mut middle_nonzero = Vec::new();
    let mut defect = 0.0f64;
    for ((&f, &t1), p) in fractions.iter().zip(&grid).zip(&table.points) {
        let spec = extract_chain_spec(&base.with_t1(t1).unwrap()).unwrap();
        let ChainSpec::Trimer { v1, v2, .. } = spec else { unreachable!() };
        let sol = BlochSolution::new(&spec.bloch(), &mesh);
        let z_low = sol.zak_phase(&[0], false).unwrap();
        let z_mid = sol.zak_phase(&[1], false).unwrap();
        defect = defect.max(quantization_defect(z_low)).max(quantization_defect(z_mid));
        if is_pi(z_low) != (v1.abs() > v2.abs()) {
            lower_mismatch.push(format!("{f:.3}"));
        }
        if z_mid.abs() > 1e-6 {
            middle_nonzero.push(format!("{f:.3}: {z_mid:.3}"));
        }
        if f < 1.0 {
            let s = p.as_ref().unwrap();
            let gs = gap_structure(&s.energies, s.n_cells(), 3.0);
            let ok = gs.bands.len() == 3 && !gs.in_gap_levels(0).is_empty() && !gs.in_gap_levels(1).is_empty();
            if !ok {
                both_gaps_missing.push(format!("{f:.3}"));
            }
        }
    }
    let n_below = fractions.iter().filter(|&&f| f < 1.0).count();
    rep.check(
        "t1 < t2: in-gap states in both gaps",
        both_gaps_missing.is_empty(),
        format!("{} of {n_below} points lack them {both_gaps_missing:?}", both_gaps_missing.len()),
    );
    rep.check("lower band Z = pi <=> |v1| > |v2|", lower_mismatch.is_empty(), format!("{lower_mismatch:?}"));
    rep.check("middle band Z = 0 for all t1", middle_nonzero.is_empty(), format!("{middle_nonzero:?}"));
    rep.check("quantization defect < 1e-6", defect < 1e-6, format!("{defect:.2e}"));
    rep.finish();
}

#[test]
fn a05_ring_design() {
    let mut rep = Report::new("A5");
    let start = Instant::now();
    let d = design_ring(NU, 2.0 * PI / 45.0, 2, (1.5 * NU2, 2.0 * NU2), DesignMode::ExactRoot).unwrap();
    let ratio = d.radius / NU2;
    rep.check("n = 2 root R/nu^2 in [1.73, 1.75]", (1.73..=1.75).contains(&ratio), format!("{ratio:.5}"));
    let d4 = design_ring(NU, 2.0 * PI / 45.0, 4, (0.3 * NU2, 1.74 * NU2), DesignMode::LeastSquares).unwrap();
    rep.check(
        "n = 4 least squares: spread < 5% at R < 1.74 nu^2",
        d4.residual < 0.05 && d4.radius < 1.74 * NU2,
        format!("spread {:.2}% at R = {:.4} nu^2, angle {:.5} rad", 100.0 * d4.residual, d4.radius / NU2, d4.angle_step),
    );
    rep.timed("runtime", start.elapsed(), Duration::from_secs(10));
    rep.finish();
}

#[test]
fn a06_triangle_topology() {
    let mut rep = Report::new("A6");

    // Gap-closing lines, u = −1.
    let fine = KMesh::new(2001).unwrap();
    let u = -1.0;
    let mut worst = 0.0f64;
    for a in linspace(-2.9, 2.9, 13) {
        for b in [a, 2.0 * u - a, -2.0 * u - a] {
            let m = ChainSpec::Triangle { u, a, b, c: 0.17 }.bloch();
            let g = min_gap(&m, 1, &fine).unwrap().min(min_gap(&m, 2, &fine).unwrap());
            worst = worst.max(g);
        }
    }
    rep.check("min_gap on a = b, b = ±2u − a", worst < 1e-10, format!("max {worst:.2e}"));

    // Phase diagrams.
    let grid = linspace(-3.0, 3.0, 200);
    let start = Instant::now();
    let upper = phase_diagram(u, 0.0, &grid, &grid, GapSelector::Upper, &KMesh::default()).unwrap();
    let elapsed = start.elapsed();
    let lower = phase_diagram(u, 0.0, &linspace(-3.0, 3.0, 60), &linspace(-3.0, 3.0, 60), GapSelector::Lower, &KMesh::default()).unwrap();
    let cells = upper.cells.iter().chain(&lower.cells).filter(|c| !c.is_critical());
    let (n_off, defect) = cells.fold((0, 0.0f64), |(n, d), c| (n + 1, d.max(c.quantization_defect)));
    let missing = upper.cells.iter().chain(&lower.cells).filter(|c| !c.is_critical() && c.phase.is_none()).count();
    rep.check(
        "off-critical cells quantized",
        defect < 1e-6 && missing == 0,
        format!("{n_off} cells, max defect {defect:.2e}, unassigned {missing}"),
    );
    rep.timed("200x200 upper-gap grid", elapsed, Duration::from_secs(300));

    // Composite path.
    let mesh = KMesh::default();
    let opts = ClassifyOptions::default();
    let mut open_not_pi = Vec::new();
    let mut overlap_points = 0;
    let mut overlap_bad = Vec::new();
    for f in linspace(0.09, 0.33, 121) {
        let g = triangle_ring(f);
        let spec = extract_chain_spec(&g).unwrap();
        let ChainSpec::Triangle { u, .. } = spec else { unreachable!() };
        let model = spec.bloch();
        let sol = BlochSolution::new(&model, &mesh);
        let direct = min_gap(&model, 2, &mesh).unwrap();
        let indirect = indirect_gap(&band_structure(&model, &mesh), 2);
        if direct > CRITICAL_GAP * u.abs() {
            let z = sol.zak_phase(&[0, 1], false).unwrap();
            if !is_pi(z) {
                open_not_pi.push(format!("{f:.3}: {z:.3}"));
            }
        }
        if indirect <= 0.0 {
            overlap_points += 1;
            // Phase of the two bands below the upper gap; bands 2 and 3 may
            // touch here, hence the override.
            let z01 = sol.zak_phase(&[0, 1], true).unwrap();
            let z12 = sol.zak_phase(&[1, 2], true).unwrap();
            let (lo, hi) = band_structure(&model, &mesh).overlap_window(2).unwrap();
            let h = build_hamiltonian(&g, DEFAULT_SCATTERING_LENGTH, None).unwrap();
            let reference = rydcomp::composite::onsite_energy(g.nu, g.radius).unwrap();
            let s = analyze_spectrum(&h.matrix, 3, reference);
            let edge: Vec<String> = (0..s.len())
                .filter(|&i| (lo..=hi).contains(&s.energies[i]) && s.metrics[i].edge_weight > opts.edge_threshold)
                .map(|i| format!("{:.2}", s.metrics[i].edge_weight))
                .collect();
            if !is_pi(z01) || !edge.is_empty() {
                overlap_bad.push(format!("{f:.3}: Z(1,2 below gap)={z01:.3} Z(upper pair)={z12:.3} edge weights {edge:?}"));
            }
        }
    }
    rep.check("path: upper-gap Z = pi wherever the gap is open", open_not_pi.is_empty(), format!("{open_not_pi:?}"));
    rep.check(
        "path: where bands 2 and 3 overlap, no edge state between them and two-band phase pi",
        overlap_points > 0 && overlap_bad.is_empty(),
        format!("{overlap_points} overlap points, violations {overlap_bad:?}"),
    );
    rep.finish();
}

#[test]
fn a07_energy_scale() {
    let mut rep = Report::new("A7");
    let g = triangle_ring(0.2);
    let spec = extract_chain_spec(&g).unwrap();
    let ChainSpec::Triangle { u, .. } = spec else { unreachable!() };
    let a_s = DEFAULT_SCATTERING_LENGTH;
    let mhz = u * kernel_to_hartree(a_s) * HARTREE_IN_MHZ;
    let bare = u * HARTREE_IN_MHZ;
    println!("    assumption: a_s = {a_s} bohr (external input); physical energy = a_s x kernel");
    println!("    u = {u:.6e} kernel units = {mhz:.3} MHz; bare kernel in MHz = {bare:.3}");
    let ratio = mhz / -5.5;
    rep.check("u within a factor 2 of -5.5 MHz", (0.5..=2.0).contains(&ratio), format!("u = {mhz:.3} MHz"));
    rep.finish();
}

#[test]
fn a08_oracle_equivalence() {
    let mut rep = Report::new("A8");
    let start = Instant::now();
    let mut devs = Vec::new();
    for nu in [10u32, 20, 30] {
        let r = 2.0 * f64::from(nu * nu);
        let t = 2.0 * PI * r / 45.0;
        let g = RingGeometry::new(nu, r, 6, CellPattern::Dimer { t1: t, t2: t }).unwrap();
        let c = compare_with_kernel(&g).unwrap();
        println!("    nu = {nu}: deviation {:.3e}, kernel/oracle scale {:.12}", c.deviation, c.scale_ratio);
        devs.push(c.deviation);
    }
    let decreasing = devs.windows(2).all(|w| w[1] < w[0]);
    rep.check("strictly decreasing over nu = 10, 20, 30", decreasing, format!("{:?}", devs.iter().map(|d| format!("{d:.3e}")).collect::<Vec<_>>()));
    rep.check("nu = 30 deviation < 15%", devs[2] < 0.15, format!("{:.3e}", devs[2]));
    rep.timed("runtime", start.elapsed(), Duration::from_secs(120));
    rep.finish();
}

#[test]
fn a09_disorder_protection() {
    let mut rep = Report::new("A9");
    let start = Instant::now();
    let g = reference_ring(36, |t| CellPattern::Dimer { t1: 1.25 * t, t2: t });
    let t2 = g.pattern.t2();
    // Angular σ: rms bond change of 5% of V(t2).
    let h = 1e-4 * t2;
    let dv = (arc_coupling(NU, g.radius, t2 + h).unwrap() - arc_coupling(NU, g.radius, t2 - h).unwrap()) / (2.0 * h);
    let v = arc_coupling(NU, g.radius, t2).unwrap();
    let sigma_ang = 0.05 * v.abs() / (dv.abs() * g.radius * 2f64.sqrt());
    let sigma_rad = matched_radial_sigma(&g, sigma_ang).unwrap();
    println!("    sigma_angular = {sigma_ang:.4e} rad, sigma_radial = {sigma_rad:.4e} bohr");

    let opts = ClassifyOptions::default();
    let run = |kind, sigma| {
        let spec = DisorderSpec { kind, sigma, realizations: 100, master_seed: 20_240_611 };
        disorder_ensemble(&g, &spec, DEFAULT_SCATTERING_LENGTH, Some(1), &opts).unwrap()
    };
    let ang = run(DisorderKind::Angular, sigma_ang);
    let rad = run(DisorderKind::Radial, sigma_rad);
    let gap = ang.clean_gap.unwrap_or(f64::NAN);
    let bw = ang.clean.bandwidth;

    let persist = ang.pair_persistence();
    rep.check("angular: pair in 100% of realizations", persist == 1.0, format!("{:.0}%", 100.0 * persist));
    let spread = ang.pair_spread() / gap;
    rep.check("angular: spread < 5% of gap", spread < 0.05, format!("{:.3e} of gap", spread));
    let ratio = rad.mean_pair_splitting() / ang.mean_pair_splitting();
    rep.check(
        "radial splitting > 10x angular",
        ratio > 10.0,
        format!("mean splittings {:.3e} vs {:.3e}, ratio {ratio:.3e}", rad.mean_pair_splitting(), ang.mean_pair_splitting()),
    );
    let clean_asym = ang.clean.asymmetry / bw;
    rep.check("clean spectrum chiral", clean_asym < 1e-10, format!("{clean_asym:.2e}"));
    let ang_asym = ang.max_asymmetry() / bw;
    rep.check("angular disorder keeps chiral symmetry", ang_asym < 1e-10, format!("{ang_asym:.2e}"));
    let rad_asym = rad.realizations.iter().map(|r| r.asymmetry).fold(f64::INFINITY, f64::min) / bw;
    rep.check("radial disorder breaks chiral symmetry", rad_asym > 1e-6, format!("min {rad_asym:.2e}"));
    rep.timed("runtime", start.elapsed(), Duration::from_secs(120));
    rep.finish();
}

#[test]
fn a10_extended_chain() {
    let mut rep = Report::new("A10");
    let start = Instant::now();
    let mesh = KMesh::default();
    let mut mismatches = Vec::new();
    let (mut pi_points, mut zero_points) = (0, 0);
    for f in linspace(0.09, 0.33, 121) {
        let spec = extract_chain_spec(&triangle_ring(f)).unwrap();
        let ChainSpec::Triangle { u, .. } = spec else { unreachable!() };
        let model = spec.bloch();
        if min_gap(&model, 1, &mesh).unwrap() < CRITICAL_GAP * u.abs() {
            continue;
        }
        let z = BlochSolution::new(&model, &mesh).zak_phase(&[0], false).unwrap();
        let ch = finite_chain(spec, 100).unwrap();
        let s = analyze_spectrum(&ch.matrix(), 3, 0.0);
        // In-gap means strictly inside the bulk lower gap of the same chain.
        let bulk = band_structure(&model, &mesh);
        let margin = 1e-9 * s.bandwidth();
        let lower_gap = bulk.gap_window(1).map_or(0, |(lo, hi)| {
            s.energies.iter().filter(|&&e| e > lo + margin && e < hi - margin).count()
        });
        if is_pi(z) {
            pi_points += 1;
        } else {
            zero_points += 1;
        }
        if is_pi(z) != (lower_gap > 0) {
            mismatches.push(format!("{f:.3}: Z={z:.2} in-gap={lower_gap}"));
        }
    }
    let forward = mismatches.iter().filter(|m| m.contains("Z=3.14") || m.contains("Z=-3.14")).count();
    rep.check("Z = pi implies lower-gap in-gap states", forward == 0, format!("{forward} of {pi_points} pi points without them"));
    rep.check(
        "lower-gap in-gap states exactly where Z = pi",
        mismatches.is_empty(),
        format!("{pi_points} pi points, {zero_points} zero points, mismatches {mismatches:?}"),
    );
    rep.timed("runtime", start.elapsed(), Duration::from_secs(60));
    rep.finish();
}
