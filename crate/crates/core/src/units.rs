//! Physical constants and energy-unit conversion.

/// 1 hartree expressed as a frequency, E/h, in MHz.
pub const HARTREE_IN_MHZ: f64 = 6.579_683_920_5e9;

/// Rubidium triplet s-wave scattering length in bohr. Used only to quote
/// energies in MHz; none of the topology depends on it.
pub const DEFAULT_SCATTERING_LENGTH: f64 = -16.05;

/// Prefactor that turns kernel units into hartree for a given scattering
/// length.
///
/// The Fermi pseudopotential `2π a_s δ³(r − R)` restricted to the degenerate
/// manifold gives matrix elements `2π a_s Σ ψ(R_q) ψ*(R_q')`. The closed-form
/// kernel already equals `2π` times that manifold sum (checked against the
/// brute-force l-sum in [`crate::oracle`]), so only `a_s` remains.
pub fn kernel_to_hartree(scattering_length: f64) -> f64 {
    scattering_length
}

/// Energy unit for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnergyUnit {
    /// Bare kernel values (no scattering-length prefactor).
    Kernel,
    #[serde(rename = "MHz")]
    MHz,
}

impl EnergyUnit {
    /// Factor converting kernel units into this unit.
    pub fn factor(self, scattering_length: f64) -> f64 {
        match self {
            EnergyUnit::Kernel => 1.0,
            EnergyUnit::MHz => kernel_to_hartree(scattering_length) * HARTREE_IN_MHZ,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            EnergyUnit::Kernel => "kernel",
            EnergyUnit::MHz => "MHz",
        }
    }
}
