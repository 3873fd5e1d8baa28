//! Reduced hydrogen radial functions.
//!
//! `u_νl(r) = N ρ^{l+1} e^{-ρ/2} L^{(2l+1)}_{ν-l-1}(ρ)` with `ρ = 2r/ν` and
//! `N² = (ν-l-1)! / (ν² (ν+l)!)`, normalized to `∫ u² dr = 1` and positive
//! near the origin. Everything is in atomic units.
//!
//! The Laguerre polynomial comes from the forward three-term recurrence. The
//! recurrence carries a running logarithmic scale so that neither the
//! polynomial (which reaches ~1e170 at ν = 100, r = 10ν²) nor the
//! prefactor `ρ^{l+1} e^{-ρ/2} N` ever has to be formed on its own; the
//! pieces are combined in log space and exponentiated once.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Point at which a radial function is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialQuery {
    pub nu: u32,
    pub l: u32,
    pub r: f64,
}

impl RadialQuery {
    pub fn new(nu: u32, l: u32, r: f64) -> Self {
        Self { nu, l, r }
    }

    fn validate(&self) -> Result<()> {
        if self.nu == 0 {
            return Err(Error::Domain("principal quantum number must be >= 1".into()));
        }
        if self.l >= self.nu {
            return Err(Error::Domain(format!(
                "l = {} must be below nu = {}",
                self.l, self.nu
            )));
        }
        if !(self.r > 0.0) || !self.r.is_finite() {
            return Err(Error::Domain(format!("radius must be positive and finite, got {}", self.r)));
        }
        Ok(())
    }
}

/// `u(r)` and `du/dr`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialValue {
    pub u: f64,
    pub du: f64,
}

/// Rescaling threshold for the Laguerre recurrence.
const RESCALE_AT: f64 = 1e150;

/// Evaluates `u_νl(r)` and its radial derivative.
pub fn radial_u(q: RadialQuery) -> Result<RadialValue> {
    q.validate()?;
    eval(q.nu, q.l, q.r)
}

/// Evaluates the radial function on an ascending grid.
pub fn radial_batch(nu: u32, l: u32, r_grid: &[f64]) -> Result<Vec<RadialValue>> {
    if r_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("radius grid must be strictly ascending".into()));
    }
    r_grid
        .iter()
        .map(|&r| radial_u(RadialQuery::new(nu, l, r)))
        .collect()
}

/// s-wave radial function, also defined at `r = 0` where `u = 0` and
/// `u'(0) = 2 N L_{ν-1}^{(1)}(0) / ν = 2/ν^{3/2}`.
pub(crate) fn s_wave(nu: u32, r: f64) -> Result<RadialValue> {
    if r == 0.0 {
        let nu = f64::from(nu);
        return Ok(RadialValue { u: 0.0, du: 2.0 / (nu * nu.sqrt()) });
    }
    radial_u(RadialQuery::new(nu, 0, r))
}

/// `ln` of the normalization constant, `½ [ln (ν-l-1)! - 2 ln ν - ln (ν+l)!]`.
fn ln_norm(nu: u32, l: u32) -> f64 {
    // ln((ν-l-1)! / (ν+l)!) = -Σ_{k=ν-l}^{ν+l} ln k
    let ln_ratio: f64 = -((nu - l)..=(nu + l)).map(|k| f64::from(k).ln()).sum::<f64>();
    0.5 * (ln_ratio - 2.0 * f64::from(nu).ln())
}

/// Scaled generalized Laguerre polynomials `L_n^α(x)` and `L_{n-1}^α(x)`,
/// returned together with the natural-log scale they were divided by.
fn laguerre_pair(n: u32, alpha: f64, x: f64) -> (f64, f64, f64) {
    let mut prev = 0.0; // L_{-1}
    let mut cur = 1.0; // L_0
    let mut ln_scale = 0.0;
    for k in 0..n {
        let kf = f64::from(k);
        let next = ((2.0 * kf + 1.0 + alpha - x) * cur - (kf + alpha) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_AT {
            cur /= RESCALE_AT;
            prev /= RESCALE_AT;
            ln_scale += RESCALE_AT.ln();
        }
    }
    (cur, prev, ln_scale)
}

fn signed_exp(sign_source: f64, ln_magnitude: f64) -> f64 {
    if sign_source == 0.0 {
        0.0
    } else {
        sign_source.signum() * ln_magnitude.exp()
    }
}

fn eval(nu: u32, l: u32, r: f64) -> Result<RadialValue> {
    let n = nu - l - 1;
    let alpha = f64::from(2 * l + 1);
    let nuf = f64::from(nu);
    let rho = 2.0 * r / nuf;
    let (lag, lag_prev, ln_scale) = laguerre_pair(n, alpha, rho);

    let ln_common = ln_norm(nu, l) + f64::from(l) * rho.ln() - 0.5 * rho + ln_scale;

    let u = if lag == 0.0 {
        0.0
    } else {
        signed_exp(lag, ln_common + rho.ln() + lag.abs().ln())
    };

    // x L_n^α'(x) = n L_n^α(x) - (n+α) L_{n-1}^α(x), hence
    // du/dρ = N ρ^l e^{-ρ/2} [(l+1+n-ρ/2) L_n - (ν+l) L_{n-1}].
    let bracket = (f64::from(l + 1 + n) - 0.5 * rho) * lag - f64::from(nu + l) * lag_prev;
    let du = if bracket == 0.0 {
        0.0
    } else {
        (2.0 / nuf) * signed_exp(bracket, ln_common + bracket.abs().ln())
    };

    if !u.is_finite() || !du.is_finite() {
        return Err(Error::Overflow(format!("u_{{{nu},{l}}}({r})")));
    }
    Ok(RadialValue { u, du })
}

/// Inner and outer classical turning points for the (ν, l) state.
pub fn turning_points(nu: u32, l: u32) -> (f64, f64) {
    let n2 = f64::from(nu).powi(2);
    let ll = f64::from(l) * f64::from(l + 1);
    let disc = (1.0 - ll / n2).max(0.0).sqrt();
    (n2 * (1.0 - disc), n2 * (1.0 + disc))
}

/// `u''/u` from the radial Schrödinger equation at energy `-1/(2ν²)`.
pub fn effective_potential(nu: u32, l: u32, r: f64) -> f64 {
    let ll = f64::from(l) * f64::from(l + 1);
    1.0 / f64::from(nu).powi(2) - 2.0 / r + ll / (r * r)
}
