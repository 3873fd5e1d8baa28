use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use rydcomp::lattices::ChainSpec;
use rydcomp::topology::{
    band_structure, min_gap, quantization_defect, reduce_phase, zak_phase, zak_result, BlochSolution, KMesh,
};

/// Every gap stays above a quarter of the largest hopping: away from
/// critical lines.
fn gaps_open(spec: &ChainSpec) -> bool {
    let hops = match *spec {
        ChainSpec::Dimer { v1, v2 } => vec![v1, v2],
        ChainSpec::Trimer { v1, v2, v3 } => vec![v1, v2, v3],
        ChainSpec::Triangle { u, a, b, c } => vec![u, a, b, c],
    };
    let scale = hops.iter().fold(0.0f64, |m, h| m.max(h.abs()));
    let model = spec.bloch();
    let mesh = KMesh::new(200).unwrap();
    (1..model.cell_size()).all(|g| min_gap(&model, g, &mesh).unwrap() > 0.25 * scale)
}

fn spec_strategy() -> impl Strategy<Value = ChainSpec> {
    let h = || prop_oneof![-2.0f64..-0.1, 0.1f64..2.0];
    prop_oneof![
        (h(), h()).prop_map(|(v1, v2)| ChainSpec::Dimer { v1, v2 }),
        (h(), h(), h()).prop_map(|(v1, v2, v3)| ChainSpec::Trimer { v1, v2, v3 }),
        (h(), -3.0f64..3.0, -3.0f64..3.0, -1.0f64..1.0).prop_map(|(u, a, b, c)| ChainSpec::Triangle { u, a, b, c }),
    ]
}

/// Same spec with inversion symmetry imposed.
fn symmetric(spec: ChainSpec) -> ChainSpec {
    match spec {
        ChainSpec::Trimer { v1, v2, .. } => ChainSpec::Trimer { v1, v2, v3: v2 },
        other => other,
    }
}

fn all_band_sets(n: usize) -> Vec<Vec<usize>> {
    let mut sets: Vec<Vec<usize>> = (0..n).map(|b| vec![b]).collect();
    sets.extend((1..n).map(|g| (0..g).collect()));
    sets
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gauge_invariance(spec in spec_strategy(), phases in prop::collection::vec(0.0f64..2.0 * PI, 600)) {
        let model = spec.bloch();
        let mesh = KMesh::new(200).unwrap();
        let sol = BlochSolution::new(&model, &mesh);
        let mut regauged = sol.clone();
        let n = model.cell_size();
        for (j, v) in regauged.vectors.iter_mut().enumerate() {
            for b in 0..n {
                let f = Complex64::from_polar(1.0, phases[(j * n + b) % phases.len()]);
                v.column_mut(b).iter_mut().for_each(|x| *x *= f);
            }
        }
        for set in all_band_sets(n) {
            let (Ok(a), Ok(b)) = (sol.zak_phase(&set, false), regauged.zak_phase(&set, false)) else { continue };
            prop_assert!(reduce_phase(a - b).abs() < 1e-12, "{:?}: {} vs {}", set, a, b);
        }
    }

    #[test]
    fn mesh_convergence_when_quantized(spec in spec_strategy()) {
        let spec = symmetric(spec);
        prop_assume!(gaps_open(&spec));
        let model = spec.bloch();
        let coarse = BlochSolution::new(&model, &KMesh::new(500).unwrap());
        let fine = BlochSolution::new(&model, &KMesh::new(1000).unwrap());
        for set in all_band_sets(model.cell_size()) {
            let a = coarse.zak_phase(&set, false).unwrap();
            let b = fine.zak_phase(&set, false).unwrap();
            prop_assert!(reduce_phase(a - b).abs() < 1e-6, "{:?}: {} vs {}", set, a, b);
        }
    }

    #[test]
    fn mesh_convergence_is_second_order(spec in spec_strategy()) {
        prop_assume!(gaps_open(&spec));
        let model = spec.bloch();
        let z: Vec<Vec<f64>> = [500, 1000, 2000]
            .iter()
            .map(|&n| {
                let sol = BlochSolution::new(&model, &KMesh::new(n).unwrap());
                all_band_sets(model.cell_size()).iter().map(|set| sol.zak_phase(set, false).unwrap()).collect()
            })
            .collect();
        for i in 0..z[0].len() {
            let d1 = reduce_phase(z[0][i] - z[1][i]).abs();
            let d2 = reduce_phase(z[1][i] - z[2][i]).abs();
            // Below 1e-10 the differences are round-off.
            prop_assert!(d1 < 1e-10 || (3.0..5.0).contains(&(d1 / d2)), "{} then {}", d1, d2);
        }
    }

    #[test]
    fn quantized_under_inversion(spec in spec_strategy()) {
        let spec = symmetric(spec);
        prop_assume!(gaps_open(&spec));
        let model = spec.bloch();
        for gap in 1..model.cell_size() {
            let r = zak_result(&model, gap, &KMesh::default()).unwrap();
            prop_assert!(r.quantization_defect < 1e-6, "{:?}", r);
        }
    }

    #[test]
    fn triangle_phases_ignore_c(u in 0.2f64..2.0, a in -3.0f64..3.0, b in -3.0f64..3.0, c in -1.0f64..1.0, c2 in -1.0f64..1.0) {
        let u = -u;
        let m1 = ChainSpec::Triangle { u, a, b, c }.bloch();
        let m2 = ChainSpec::Triangle { u, a, b, c: c2 }.bloch();
        let mesh = KMesh::new(400).unwrap();
        let (s1, s2) = (BlochSolution::new(&m1, &mesh), BlochSolution::new(&m2, &mesh));
        for set in all_band_sets(3) {
            // The override keeps both evaluations defined where c moves bands into contact.
            let z1 = s1.zak_phase(&set, true).unwrap();
            let z2 = s2.zak_phase(&set, true).unwrap();
            let gapped = s1.is_isolated(&set) && s2.is_isolated(&set);
            prop_assert!(!gapped || reduce_phase(z1 - z2).abs() < 1e-10, "{:?}: {} vs {}", set, z1, z2);
        }
    }

    #[test]
    fn sum_rule(spec in spec_strategy()) {
        prop_assume!(gaps_open(&spec));
        let model = spec.bloch();
        let n = model.cell_size();
        let all: Vec<usize> = (0..n).collect();
        let defect = |n_k: usize| {
            let sol = BlochSolution::new(&model, &KMesh::new(n_k).unwrap());
            let total: f64 = (0..n).map(|b| sol.zak_phase(&[b], false).unwrap()).sum();
            // The loop over all bands is trivial since H(k) is 2π-periodic.
            let loop_all = sol.zak_phase(&all, false).unwrap();
            (reduce_phase(total).abs(), loop_all.abs())
        };
        let (d1, l1) = defect(1001);
        let (d2, _) = defect(2002);
        prop_assert!(l1 < 1e-12);
        prop_assert!(d1 < 1e-4);
        prop_assert!(d1 < 1e-10 || (3.0..5.0).contains(&(d1 / d2)), "{} then {}", d1, d2);
        if spec == symmetric(spec) {
            prop_assert!(d1 < 1e-6);
        }
    }

    #[test]
    fn triangle_c_shifts_bands(u in 0.2f64..2.0, a in -3.0f64..3.0, b in -3.0f64..3.0, c in -1.0f64..1.0, d in -1.0f64..1.0) {
        let mesh = KMesh::new(64).unwrap();
        let t1 = band_structure(&ChainSpec::Triangle { u: -u, a, b, c }.bloch(), &mesh);
        let t2 = band_structure(&ChainSpec::Triangle { u: -u, a, b, c: c + d }.bloch(), &mesh);
        for (k, (e1, e2)) in t1.k.iter().zip(t1.energies.iter().zip(&t2.energies)) {
            for (x, y) in e1.iter().zip(e2) {
                prop_assert!((y - x - 2.0 * d * k.cos()).abs() < 1e-12 * (1.0 + x.abs()));
            }
        }
    }
}

#[test]
fn trimer_middle_band_is_trivial() {
    let mesh = KMesh::default();
    for i in 0..=40 {
        let v1 = -2.0 + 4.0 * f64::from(i) / 40.0;
        let model = ChainSpec::Trimer { v1, v2: 1.0, v3: 1.0 }.bloch();
        // v1 = 0 decouples the trimers into flat, still isolated bands.
        match zak_phase(&model, &[1], &mesh, false) {
            Ok(z) => assert!(z.abs() < 1e-6, "v1 = {v1}: {z}"),
            Err(e) => assert!(min_gap(&model, 1, &mesh).unwrap() < 1e-9, "v1 = {v1}: {e}"),
        }
    }
}

#[test]
fn triangle_lower_gap_far_from_critical_lines() {
    let u = -1.0;
    let model = ChainSpec::Triangle { u, a: 3.0 * u.abs(), b: 0.0, c: 0.0 }.bloch();
    let r = zak_result(&model, 1, &KMesh::default()).unwrap();
    let z = r.below_gap_sum.unwrap();
    assert!(quantization_defect(z) < 1e-6, "{z}");
}

#[test]
fn dimer_limits_at_thousand_points() {
    let mesh = KMesh::new(1000).unwrap();
    let z = zak_phase(&ChainSpec::Dimer { v1: 0.0, v2: 1.0 }.bloch(), &[0], &mesh, false).unwrap();
    assert!((z - PI).abs() < 1e-6);
    let z = zak_phase(&ChainSpec::Dimer { v1: 1.0, v2: 0.0 }.bloch(), &[0], &mesh, false).unwrap();
    assert!(z.abs() < 1e-6);
}
