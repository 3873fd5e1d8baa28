//! Command-line and config-file options.
//!
//! Every option is an `Option` so that flags can be layered over a TOML file:
//! the file provides a `[common]` table and one table per subcommand, and any
//! flag given on the command line replaces the file value. After merging,
//! `resolve` fills in defaults, so the serialized options are the complete
//! configuration of the run.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::CliError;

/// A positive number written as a decimal or as a ratio such as `1/45`.
#[derive(Debug, Clone, PartialEq)]
pub struct Fraction {
    text: String,
    value: f64,
}

impl Fraction {
    pub fn value(&self) -> f64 {
        self.value
    }
}

impl FromStr for Fraction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let parse = |x: &str| x.trim().parse::<f64>().map_err(|_| format!("`{s}` is not a number or ratio"));
        let value = match s.split_once('/') {
            Some((n, d)) => {
                let d = parse(d)?;
                if d == 0.0 {
                    return Err(format!("`{s}` divides by zero"));
                }
                parse(n)? / d
            }
            None => parse(s)?,
        };
        if !value.is_finite() {
            return Err(format!("`{s}` is not finite"));
        }
        Ok(Fraction { text: s.to_string(), value })
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl Serialize for Fraction {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.text)
    }
}

impl<'de> Deserialize<'de> for Fraction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Float(f64),
            Text(String),
        }
        let text = match Raw::deserialize(d)? {
            Raw::Int(i) => i.to_string(),
            // `{:?}` keeps enough digits to round-trip.
            Raw::Float(x) => format!("{x:?}"),
            Raw::Text(t) => t,
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Dimer,
    Trimer,
    Triangle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum Units {
    #[value(name = "kernel")]
    #[serde(rename = "kernel")]
    Kernel,
    #[value(name = "MHz", alias = "mhz")]
    #[serde(rename = "MHz")]
    MHz,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gap {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Angular,
    Radial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    ExactRoot,
    LeastSquares,
}

/// Which bond of a dimer sits inside the unit cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// The chain's first bond, matched to its termination.
    Termination,
    /// The other bond.
    Complementary,
}

#[derive(Debug, Parser)]
#[command(name = "rydcomp", version, about = "Tight-binding spectra and topology of Rydberg composites")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Common {
    /// TOML file with a [common] table and a table named after the subcommand.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Output path prefix; writes <out>.csv and <out>.meta.toml.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Energy unit of the outputs.
    #[arg(long, global = true, value_enum)]
    pub units: Option<Units>,
    /// s-wave scattering length (bohr), used for MHz output.
    #[arg(long = "a-s", global = true, allow_negative_numbers = true)]
    #[serde(rename = "a-s")]
    pub a_s: Option<f64>,
    /// Also write a gnuplot script <out>.gp.
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    pub plot: Option<bool>,
}

/// Declares a subcommand's options. `geometry;` adds the ring options shared
/// by the commands that build a composite.
macro_rules! options {
    (@struct $(#[$m:meta])* $name:ident { $($body:tt)* }) => {
        $(#[$m])*
        #[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
        #[command(allow_negative_numbers = true)]
        #[serde(deny_unknown_fields, rename_all = "kebab-case")]
        pub struct $name { $($body)* }
    };
    ($(#[$m:meta])* $name:ident { geometry; $($(#[$fm:meta])* $f:ident : $t:ty,)* }) => {
        options!(@struct $(#[$m])* $name {
            /// Chain family realized on the ring.
            #[arg(long, value_enum)]
            pub model: Option<Model>,
            /// Principal quantum number.
            #[arg(long)]
            pub nu: Option<u32>,
            /// Ring radius in units of nu^2 (triangle default: designed radius).
            #[arg(long)]
            pub radius_factor: Option<f64>,
            /// Number of scatterers.
            #[arg(long = "m")]
            pub m: Option<usize>,
            /// Intracell arclength t2 as a fraction of 2 pi R.
            #[arg(long)]
            pub t2_frac: Option<Fraction>,
            /// Trimer only: second intracell arclength (default: t2-frac).
            #[arg(long)]
            pub t3_frac: Option<Fraction>,
            /// Keep couplings up to this many neighbours only (default: all).
            #[arg(long)]
            pub cutoff: Option<usize>,
            $($(#[$fm])* pub $f: $t,)*
        });
    };
    ($(#[$m:meta])* $name:ident { $($(#[$fm:meta])* $f:ident : $t:ty,)* }) => {
        options!(@struct $(#[$m])* $name { $($(#[$fm])* pub $f: $t,)* });
    };
}

options!(
    /// Radial function u(r) and u'(r).
    RadialOpts {
        #[arg(long)]
        nu: Option<u32>,
        /// Angular momentum.
        #[arg(long)]
        l: Option<u32>,
        /// First radius in units of nu^2.
        #[arg(long)]
        r_from: Option<Fraction>,
        /// Last radius in units of nu^2.
        #[arg(long)]
        r_to: Option<Fraction>,
        #[arg(long)]
        points: Option<usize>,
    }
);

options!(
    /// Coupling V(D) against arclength around the ring.
    ProfileOpts {
        #[arg(long)]
        nu: Option<u32>,
        /// Ring radius in units of nu^2.
        #[arg(long)]
        radius_factor: Option<f64>,
        /// First arclength as a fraction of 2 pi R.
        #[arg(long)]
        d_from: Option<Fraction>,
        /// Last arclength as a fraction of 2 pi R.
        #[arg(long)]
        d_to: Option<Fraction>,
        #[arg(long)]
        points: Option<usize>,
    }
);

options!(
    /// Composite spectra against t1 (t1 in units of t2).
    SweepOpts {
        geometry;
        #[arg(long)]
        t1_from: Option<f64>,
        #[arg(long)]
        t1_to: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
    }
);

options!(
    /// Zak phases and gaps along a composite t1 path (t1 in units of t2).
    ZakOpts {
        geometry;
        #[arg(long)]
        t1_from: Option<f64>,
        #[arg(long)]
        t1_to: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        /// Number of k points.
        #[arg(long)]
        nk: Option<usize>,
        /// Dimer unit cell.
        #[arg(long, value_enum)]
        convention: Option<Convention>,
    }
);

options!(
    /// Triangle-chain Zak phase over the (a, b) plane.
    PhaseDiagramOpts {
        /// Intracell hopping.
        #[arg(long)]
        u: Option<f64>,
        /// Hopping between same-index sites of neighbouring cells.
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        a_from: Option<f64>,
        #[arg(long)]
        a_to: Option<f64>,
        #[arg(long)]
        b_from: Option<f64>,
        #[arg(long)]
        b_to: Option<f64>,
        /// Grid points per axis.
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, value_enum)]
        gap: Option<Gap>,
        #[arg(long)]
        nk: Option<usize>,
    }
);

options!(
    /// Ring radius with equal couplings V(t2) = V(2 t2) = ... = V(n t2).
    DesignRingOpts {
        #[arg(long)]
        nu: Option<u32>,
        /// Cell size.
        #[arg(long)]
        n: Option<usize>,
        /// Angular step as a fraction of 2 pi.
        #[arg(long)]
        angle_frac: Option<Fraction>,
        /// Radius interval start in units of nu^2.
        #[arg(long)]
        r_from: Option<f64>,
        /// Radius interval end in units of nu^2.
        #[arg(long)]
        r_to: Option<f64>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
    }
);

options!(
    /// Ensemble of positionally disordered composites.
    DisorderOpts {
        geometry;
        /// Fixed t1 in units of t2.
        #[arg(long)]
        t1: Option<f64>,
        #[arg(long, value_enum)]
        kind: Option<Kind>,
        /// Standard deviation (rad for angular, bohr for radial).
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        realizations: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    }
);

options!(
    /// Closed-form kernel against the brute-force manifold sum.
    OracleCompareOpts {
        /// Comma-separated principal quantum numbers.
        #[arg(long, value_delimiter = ',')]
        nu_list: Option<Vec<u32>>,
        #[arg(long = "m")]
        m: Option<usize>,
        #[arg(long)]
        radius_factor: Option<f64>,
        /// t1 in units of t2.
        #[arg(long)]
        t1: Option<f64>,
        #[arg(long)]
        t2_frac: Option<Fraction>,
        /// Lowest angular momentum in the sum.
        #[arg(long)]
        l_min: Option<u32>,
    }
);

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    Radial(RadialOpts),
    Profile(ProfileOpts),
    Sweep(SweepOpts),
    Zak(ZakOpts),
    PhaseDiagram(PhaseDiagramOpts),
    DesignRing(DesignRingOpts),
    Disorder(DisorderOpts),
    OracleCompare(OracleCompareOpts),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Radial(_) => "radial",
            Command::Profile(_) => "profile",
            Command::Sweep(_) => "sweep",
            Command::Zak(_) => "zak",
            Command::PhaseDiagram(_) => "phase-diagram",
            Command::DesignRing(_) => "design-ring",
            Command::Disorder(_) => "disorder",
            Command::OracleCompare(_) => "oracle-compare",
        }
    }
}

/// Tables of a config file, keyed by name.
pub struct ConfigFile {
    tables: toml::Table,
}

impl ConfigFile {
    pub fn load(path: &Path, command: &str) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("config: cannot read {}: {e}", path.display())))?;
        let tables: toml::Table =
            text.parse().map_err(|e| CliError::Config(format!("config: {}: {e}", path.display())))?;
        for (key, value) in &tables {
            let known = key == "run" || key == "common" || key == command;
            if !value.is_table() || !known {
                return Err(CliError::Config(format!("config: `{key}` does not apply to `{command}`")));
            }
        }
        Ok(Self { tables })
    }

    fn table(&self, name: &str) -> toml::Table {
        self.tables.get(name).and_then(|v| v.as_table()).cloned().unwrap_or_default()
    }
}

/// Overlays the flags in `flags` on the file table `name`.
pub fn merge<T: Serialize + DeserializeOwned>(flags: &T, file: Option<&ConfigFile>, name: &str) -> Result<T, CliError> {
    let mut base = file.map(|f| f.table(name)).unwrap_or_default();
    let over = toml::Table::try_from(flags).map_err(|e| CliError::Config(format!("{name}: {e}")))?;
    base.extend(over);
    toml::Value::Table(base)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Config(format!("config [{name}]: {}", e.message())))
}

/// Value of a required option.
pub fn required<T: Clone>(field: &str, v: &Option<T>) -> Result<T, CliError> {
    v.clone().ok_or_else(|| CliError::Config(format!("missing required option `{field}` (--{field})")))
}

/// Fails with a message naming `field` unless `ok`.
pub fn ensure(ok: bool, field: &str, why: &str) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Config(format!("{field}: {why}")))
    }
}

impl Common {
    pub fn resolve(&mut self, command: &str) {
        self.out.get_or_insert_with(|| PathBuf::from(command));
        self.units.get_or_insert(Units::Kernel);
        self.a_s.get_or_insert(rydcomp::units::DEFAULT_SCATTERING_LENGTH);
        self.plot.get_or_insert(false);
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let a_s = self.a_s.unwrap();
        ensure(a_s != 0.0 && a_s.is_finite(), "a-s", "must be finite and non-zero")?;
        let out = self.out.as_ref().unwrap();
        ensure(out.file_name().is_some(), "out", "must name a file prefix")?;
        if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
            ensure(dir.is_dir(), "out", &format!("directory {} does not exist", dir.display()))?;
        }
        Ok(())
    }

    pub fn energy_unit(&self) -> rydcomp::units::EnergyUnit {
        match self.units.unwrap() {
            Units::Kernel => rydcomp::units::EnergyUnit::Kernel,
            Units::MHz => rydcomp::units::EnergyUnit::MHz,
        }
    }
}
