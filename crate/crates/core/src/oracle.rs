//! Brute-force overlap matrix of the degenerate ν manifold.
//!
//! For scatterers at `r_q`, first-order degenerate perturbation theory within
//! the ν manifold involves the Gram matrix of the manifold states evaluated at
//! the scatterers,
//!
//! ```text
//! S[q, q'] = Σ_{l} (2l+1)/(4π) P_l(cos γ_qq') u_νl(R_q) u_νl(R_q') / (R_q R_q')
//! ```
//!
//! after the azimuthal sum has been done with the addition theorem. This is an
//! independent check on the closed-form kernel of [`crate::composite`].

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::composite::RingGeometry;
use crate::hydrogenic::{radial_u, RadialQuery};
use crate::linalg::eigvals_real;
use crate::{par, Error, Result};

/// Legendre polynomial `P_l(x)` by the Bonnet recurrence.
pub fn legendre_p(l: u32, x: f64) -> Result<f64> {
    if !(x.abs() <= 1.0) {
        return Err(Error::Domain(format!("Legendre argument {x} outside [-1, 1]")));
    }
    Ok(*legendre_all(l, x).last().unwrap())
}

/// `P_0(x) ..= P_l(x)`.
fn legendre_all(l: u32, x: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(l as usize + 1);
    p.push(1.0);
    if l >= 1 {
        p.push(x);
    }
    for n in 1..l as usize {
        let nf = n as f64;
        p.push(((2.0 * nf + 1.0) * x * p[n] - nf * p[n - 1]) / (nf + 1.0));
    }
    p
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldMatrix {
    pub s: DMatrix<f64>,
    pub nu: u32,
    pub l_min: u32,
}

/// Builds `S` for the scatterers of `g`, summing `l = l_min ..= ν − 1`.
pub fn manifold_matrix(g: &RingGeometry, l_min: u32) -> Result<ManifoldMatrix> {
    g.validate()?;
    if l_min >= g.nu {
        return Err(Error::Domain(format!("l_min = {l_min} must be below nu = {}", g.nu)));
    }
    let pos = g.positions();
    let m = pos.len();
    let ls: Vec<u32> = (l_min..g.nu).collect();
    // radial[l - l_min][q] = u_νl(R_q) / R_q
    let radial = par::map(&ls, |&l| -> Result<Vec<f64>> {
        pos.iter()
            .map(|p| Ok(radial_u(RadialQuery::new(g.nu, l, p.radius))?.u / p.radius))
            .collect()
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut s = DMatrix::zeros(m, m);
    for q in 0..m {
        for qp in q..m {
            let cos_g = (pos[qp].angle - pos[q].angle).cos().clamp(-1.0, 1.0);
            let p = legendre_all(g.nu - 1, cos_g);
            let v: f64 = ls
                .iter()
                .zip(&radial)
                .map(|(&l, f)| f64::from(2 * l + 1) * p[l as usize] * f[q] * f[qp])
                .sum::<f64>()
                / (4.0 * std::f64::consts::PI);
            s[(q, qp)] = v;
            s[(qp, q)] = v;
        }
    }
    Ok(ManifoldMatrix { s, nu: g.nu, l_min })
}

/// Compares the spectra of two symmetric matrices up to overall scale.
///
/// Each spectrum is sorted by decreasing magnitude and divided by its
/// largest-magnitude eigenvalue; the result is the largest
/// `|a_i − b_i| / max(|a_i|, |b_i|)`. Pairs that are both below `1e-12`
/// after normalization count as equal.
pub fn spectral_compare(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    if a.nrows() != b.nrows() || a.ncols() != b.ncols() {
        return Err(Error::DimensionMismatch(a.nrows(), b.nrows()));
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    let norm = |m: &DMatrix<f64>| -> Vec<f64> {
        let mut e = eigvals_real(m);
        e.sort_by(|x, y| y.abs().total_cmp(&x.abs()));
        let top = e[0];
        if top == 0.0 {
            e
        } else {
            e.into_iter().map(|x| x / top).collect()
        }
    };
    let (ea, eb) = (norm(a), norm(b));
    Ok(ea
        .iter()
        .zip(&eb)
        .map(|(x, y)| {
            let d = x.abs().max(y.abs());
            if d < 1e-12 {
                0.0
            } else {
                (x - y).abs() / d
            }
        })
        .fold(0.0, f64::max))
}

/// Numerical rank with threshold `1e-12 · ‖S‖₂`.
pub fn numerical_rank(s: &DMatrix<f64>) -> usize {
    let e = eigvals_real(s);
    let top = e.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    e.iter().filter(|x| x.abs() > 1e-12 * top).count()
}

/// Summary used by convergence studies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub nu: u32,
    pub deviation: f64,
    /// Ratio of the largest kernel eigenvalue to the largest oracle eigenvalue.
    pub scale_ratio: f64,
}

/// Kernel-vs-oracle comparison for one geometry.
pub fn compare_with_kernel(g: &RingGeometry) -> Result<OracleComparison> {
    let kernel = crate::composite::build_hamiltonian(g, 1.0, None)?.matrix;
    let oracle = manifold_matrix(g, 0)?.s;
    let top = |m: &DMatrix<f64>| eigvals_real(m).into_iter().fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
    Ok(OracleComparison {
        nu: g.nu,
        deviation: spectral_compare(&kernel, &oracle)?,
        scale_ratio: top(&kernel) / top(&oracle),
    })
}
