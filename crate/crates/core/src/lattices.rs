//! Abstract tight-binding chains: open finite chains and their Bloch
//! Hamiltonians.
//!
//! Unit cells are chosen consistently with how finite chains terminate: a
//! chain always starts with a complete cell, so the first bond of the chain is
//! an intracell bond. Zak phases computed from these Bloch matrices therefore
//! predict edge states of the finite chains built here.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::composite::{CellPattern, RingGeometry};
use crate::{Error, Result};

/// Largest relative mismatch tolerated between `V(t2)` and `V(2 t2)` in a
/// triangle geometry.
pub const TRIANGLE_DESIGN_TOLERANCE: f64 = 0.02;

/// Hopping amplitudes of the three chain families (kernel units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ChainSpec {
    /// `v1` intracell, `v2` intercell.
    Dimer { v1: f64, v2: f64 },
    /// `v2`, `v3` intracell, `v1` intercell.
    Trimer { v1: f64, v2: f64, v3: f64 },
    /// `u` inside each triangle; `a`, `b`, `c` between neighbouring cells.
    Triangle { u: f64, a: f64, b: f64, c: f64 },
}

impl ChainSpec {
    pub fn cell_size(&self) -> usize {
        match self {
            ChainSpec::Dimer { .. } => 2,
            _ => 3,
        }
    }

    fn amplitudes(&self) -> Vec<f64> {
        match *self {
            ChainSpec::Dimer { v1, v2 } => vec![v1, v2],
            ChainSpec::Trimer { v1, v2, v3 } => vec![v1, v2, v3],
            ChainSpec::Triangle { u, a, b, c } => vec![u, a, b, c],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let amps = self.amplitudes();
        if amps.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain(format!("non-finite hopping in {self:?}")));
        }
        if amps.iter().all(|&x| x == 0.0) {
            return Err(Error::Domain("all hopping amplitudes are zero".into()));
        }
        Ok(())
    }

    pub fn bloch(&self) -> BlochModel {
        BlochModel { spec: *self }
    }

    /// The dimer described with the other bond inside the unit cell. This is
    /// the cell *not* matched to the chain termination; other families are
    /// returned unchanged.
    pub fn complementary(&self) -> ChainSpec {
        match *self {
            ChainSpec::Dimer { v1, v2 } => ChainSpec::Dimer { v1: v2, v2: v1 },
            other => other,
        }
    }
}

/// `k ↦ H(k)` for a [`ChainSpec`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochModel {
    pub spec: ChainSpec,
}

impl BlochModel {
    pub fn cell_size(&self) -> usize {
        self.spec.cell_size()
    }

    pub fn matrix_at(&self, k: f64) -> DMatrix<Complex64> {
        match self.spec {
            ChainSpec::Dimer { v1, v2 } => bloch_dimer(v1, v2, k),
            ChainSpec::Trimer { v1, v2, v3 } => bloch_trimer(v1, v2, v3, k),
            ChainSpec::Triangle { u, a, b, c } => bloch_triangle(u, a, b, c, k),
        }
    }
}

fn hermitian(n: usize, diag: &[f64], upper: &[(usize, usize, Complex64)]) -> DMatrix<Complex64> {
    let mut m = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for (i, &d) in diag.iter().enumerate() {
        m[(i, i)] = Complex64::new(d, 0.0);
    }
    for &(i, j, z) in upper {
        m[(i, j)] = z;
        m[(j, i)] = z.conj();
    }
    m
}

/// Dimer SSH Bloch matrix, off-diagonal `v1 + v2 e^{-ik}`.
pub fn bloch_dimer(v1: f64, v2: f64, k: f64) -> DMatrix<Complex64> {
    let e = Complex64::from_polar(1.0, -k);
    hermitian(2, &[0.0, 0.0], &[(0, 1, v1 + v2 * e)])
}

/// Trimer SSH Bloch matrix: `(1,2) = v2`, `(2,3) = v3`, `(1,3) = v1 e^{-ik}`.
pub fn bloch_trimer(v1: f64, v2: f64, v3: f64, k: f64) -> DMatrix<Complex64> {
    let e = Complex64::from_polar(1.0, -k);
    hermitian(
        3,
        &[0.0; 3],
        &[(0, 1, Complex64::new(v2, 0.0)), (1, 2, Complex64::new(v3, 0.0)), (0, 2, v1 * e)],
    )
}

/// Triangle-chain Bloch matrix with `2c cos k` on the diagonal.
pub fn bloch_triangle(u: f64, a: f64, b: f64, c: f64, k: f64) -> DMatrix<Complex64> {
    let e = Complex64::from_polar(1.0, -k);
    let d = 2.0 * c * k.cos();
    hermitian(3, &[d; 3], &[(0, 1, u + b * e), (1, 2, u + b * e), (0, 2, u + a * e)])
}

/// A single hopping `i ↔ j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bond {
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

/// How the open chain ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    /// Starts and ends with complete unit cells.
    CompleteCells,
}

/// Open chain of `n_cells` unit cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteChain {
    pub onsite: Vec<f64>,
    pub bonds: Vec<Bond>,
    pub cell_size: usize,
    pub termination: Termination,
}

impl FiniteChain {
    pub fn len(&self) -> usize {
        self.onsite.len()
    }

    pub fn is_empty(&self) -> bool {
        self.onsite.is_empty()
    }

    pub fn n_cells(&self) -> usize {
        self.len() / self.cell_size
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.onsite));
        for b in &self.bonds {
            m[(b.i, b.j)] += b.value;
            m[(b.j, b.i)] = m[(b.i, b.j)];
        }
        debug_assert_eq!(m.nrows(), n);
        m
    }
}

/// Builds the open chain with `n_cells` complete cells.
pub fn finite_chain(spec: ChainSpec, n_cells: usize) -> Result<FiniteChain> {
    spec.validate()?;
    if n_cells < 2 {
        return Err(Error::Domain("a finite chain needs at least two cells".into()));
    }
    let cs = spec.cell_size();
    let n = cs * n_cells;
    let mut bonds = Vec::new();
    let mut push = |i: usize, j: usize, value: f64| {
        if value != 0.0 {
            bonds.push(Bond { i, j, value });
        }
    };
    for cell in 0..n_cells {
        let s = cs * cell;
        let next = (cell + 1 < n_cells).then_some(s + cs);
        match spec {
            ChainSpec::Dimer { v1, v2 } => {
                push(s, s + 1, v1);
                if let Some(t) = next {
                    push(s + 1, t, v2);
                }
            }
            ChainSpec::Trimer { v1, v2, v3 } => {
                push(s, s + 1, v2);
                push(s + 1, s + 2, v3);
                if let Some(t) = next {
                    push(s + 2, t, v1);
                }
            }
            ChainSpec::Triangle { u, a, b, c } => {
                push(s, s + 1, u);
                push(s + 1, s + 2, u);
                push(s, s + 2, u);
                if let Some(t) = next {
                    push(s + 2, t, a);
                    push(s + 1, t, b);
                    push(s + 2, t + 1, b);
                    for o in 0..3 {
                        push(s + o, t + o, c);
                    }
                }
            }
        }
    }
    Ok(FiniteChain {
        onsite: vec![0.0; n],
        bonds,
        cell_size: cs,
        termination: Termination::CompleteCells,
    })
}

/// Reads the lattice amplitudes realized by a ring geometry off its
/// interaction curve. Couplings reaching further than one structural period
/// are dropped.
pub fn extract_chain_spec(g: &RingGeometry) -> Result<ChainSpec> {
    let v = |d: f64| g.coupling_at(d);
    match g.pattern {
        CellPattern::Dimer { t1, t2 } => Ok(ChainSpec::Dimer { v1: v(t1)?, v2: v(t2)? }),
        CellPattern::Trimer { t1, t2, t3 } => Ok(ChainSpec::Trimer {
            v1: v(t1)?,
            v2: v(t2)?,
            v3: v(t3)?,
        }),
        CellPattern::Triangle { t1, t2 } => {
            let u = v(t2)?;
            let u2 = v(2.0 * t2)?;
            let relative = (u - u2).abs() / u.abs();
            if !(relative <= TRIANGLE_DESIGN_TOLERANCE) {
                return Err(Error::TriangleDesign {
                    relative,
                    limit: TRIANGLE_DESIGN_TOLERANCE,
                });
            }
            Ok(ChainSpec::Triangle {
                u,
                a: v(t1)?,
                b: v(t1 + t2)?,
                c: v(t1 + 2.0 * t2)?,
            })
        }
    }
}
