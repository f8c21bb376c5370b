//! Run configuration: TOML file, built-in presets, and flag overrides.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use floquet_core::observables::{DEFAULT_DELTA_OMEGA, DEFAULT_PROMINENCE};
use floquet_core::steer::DEFAULT_SEQUENCE;
use floquet_core::{
    DriveAssignment, DrivePreset, LatticeConfig, Method, PropagatorOptions, SpinConfiguration,
    StateVector,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LatticeSection {
    #[serde(rename = "L")]
    pub num_sites: usize,
    pub g: f64,
    #[serde(rename = "J0")]
    pub coupling: f64,
}

impl Default for LatticeSection {
    fn default() -> Self {
        Self {
            num_sites: 3,
            g: 1.0,
            coupling: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DriveSection {
    /// Base frequency, units of `g`.
    pub omega_base: f64,
    /// `uniform`, `odd-omega1-even-omega0` or `odd-omega0-even-omega1`.
    pub preset: Option<String>,
    /// Explicit per-bond multipliers; overrides `preset`.
    pub multipliers: Option<Vec<u32>>,
}

impl Default for DriveSection {
    fn default() -> Self {
        Self {
            omega_base: 2.0,
            preset: Some("odd-omega1-even-omega0".into()),
            multipliers: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropagatorSection {
    pub dt: f64,
    pub method: String,
    pub series_order: usize,
    /// Directory for cached one-period operators; caching is off when unset.
    pub cache_dir: Option<PathBuf>,
}

impl Default for PropagatorSection {
    fn default() -> Self {
        let d = PropagatorOptions::default();
        Self {
            dt: d.dt,
            method: d.method.to_string(),
            series_order: d.series_order,
            cache_dir: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanSection {
    pub omega_min: f64,
    pub omega_max: f64,
    pub omega_step: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub t_step: f64,
    pub delta_omega: f64,
    pub prominence: f64,
    /// Couplings for the Magnus residual ladder.
    pub couplings: Vec<f64>,
}

impl Default for ScanSection {
    fn default() -> Self {
        Self {
            omega_min: 0.01,
            omega_max: 6.0,
            omega_step: 0.01,
            t_min: 0.0,
            t_max: 50.0,
            t_step: 0.5,
            delta_omega: DEFAULT_DELTA_OMEGA,
            prominence: DEFAULT_PROMINENCE,
            couplings: vec![0.1, 0.05, 0.025],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProtocolSection {
    /// Blocks in temporal order over `{1, 2}`.
    pub sequence: String,
    /// Periods per block; derived from `Ω₀/(2J0)` when unset.
    pub m: Option<u32>,
    /// Reject a non-integer `Ω₀/(2J0)`.
    pub strict: bool,
    /// Periods for `evolve`.
    pub periods: usize,
    /// Initial spins, one `u`/`d` per site from site 1; all down when unset.
    pub initial: Option<String>,
}

impl Default for ProtocolSection {
    fn default() -> Self {
        Self {
            sequence: DEFAULT_SEQUENCE.into(),
            m: None,
            strict: true,
            periods: 40,
            initial: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub svg: bool,
    /// Leave wall-clock timings out of written files so reruns are
    /// byte-identical.
    pub deterministic: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            svg: true,
            deterministic: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub lattice: LatticeSection,
    pub drive: DriveSection,
    pub propagator: PropagatorSection,
    pub scan: ScanSection,
    pub protocol: ProtocolSection,
    pub output: OutputSection,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn cfg_err(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

/// Built-in configurations reproducing the reference experiments.
pub const PRESETS: &[(&str, &str)] = &[
    ("fs-uniform", include_str!("../presets/fs-uniform.toml")),
    ("fs-interleaved", include_str!("../presets/fs-interleaved.toml")),
    ("three-spin", include_str!("../presets/three-spin.toml")),
    ("chain-odd-omega1", include_str!("../presets/chain-odd-omega1.toml")),
    ("chain-odd-omega0", include_str!("../presets/chain-odd-omega0.toml")),
    ("steer", include_str!("../presets/steer.toml")),
    ("magnus", include_str!("../presets/magnus.toml")),
];

/// Flags shared by every subcommand. Each overrides the matching
/// configuration key.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// TOML configuration file.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Built-in configuration (applied before --config).
    #[arg(long, value_name = "NAME")]
    pub preset: Option<String>,
    /// Any configuration key, e.g. `--set scan.t_step=0.25`; repeatable.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    pub set: Vec<String>,
    /// Chain length.
    #[arg(long = "L", value_name = "SITES")]
    pub num_sites: Option<usize>,
    /// Field strength.
    #[arg(long)]
    pub g: Option<f64>,
    /// Exchange amplitude, units of g.
    #[arg(long = "J0", value_name = "J0")]
    pub coupling: Option<f64>,
    /// Base drive frequency, units of g.
    #[arg(long)]
    pub omega_base: Option<f64>,
    /// Named bond-frequency pattern.
    #[arg(long)]
    pub drive_preset: Option<String>,
    /// Comma-separated per-bond multipliers.
    #[arg(long, value_delimiter = ',')]
    pub multipliers: Option<Vec<u32>>,
    /// Protocol blocks in temporal order, e.g. "1,2,1".
    #[arg(long)]
    pub sequence: Option<String>,
    /// Periods per protocol block.
    #[arg(long)]
    pub m: Option<u32>,
    /// Round a non-integer Ω₀/(2J0) instead of failing.
    #[arg(long)]
    pub non_strict: bool,
    /// Number of periods for `evolve`.
    #[arg(long)]
    pub periods: Option<usize>,
    /// Initial spins, one `u`/`d` per site from site 1.
    #[arg(long)]
    pub initial: Option<String>,
    /// Maximum integration step, units of 1/g.
    #[arg(long)]
    pub dt: Option<f64>,
    /// `midpoint-exponential` or `rk4`.
    #[arg(long)]
    pub method: Option<String>,
    /// Directory for cached one-period operators.
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    /// Upper end of the scan time window.
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Skip SVG plots.
    #[arg(long)]
    pub no_svg: bool,
}

fn parse_toml(text: &str, origin: &str) -> Result<toml::Table, ConfigError> {
    text.parse::<toml::Table>()
        .map_err(|e| cfg_err(format!("{origin}: {e}")))
}

/// Recursively overlays `top` onto `base`.
fn merge(base: &mut toml::Table, top: toml::Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Applies one `section.key=value` assignment; the value is read as a TOML
/// value, falling back to a plain string.
fn set_key(table: &mut toml::Table, item: &str) -> Result<(), ConfigError> {
    let (path, value) = item
        .split_once('=')
        .ok_or_else(|| cfg_err(format!("--set {item:?}: expected SECTION.KEY=VALUE")))?;
    let (section, key) = path
        .trim()
        .split_once('.')
        .ok_or_else(|| cfg_err(format!("--set {item:?}: expected SECTION.KEY=VALUE")))?;
    let value = value.trim();
    let parsed = format!("v = {value}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()));
    let entry = table
        .entry(section.to_string())
        .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    match entry {
        toml::Value::Table(t) => {
            t.insert(key.to_string(), parsed);
            Ok(())
        }
        _ => Err(cfg_err(format!("--set {item:?}: {section} is not a section"))),
    }
}

impl RunConfig {
    #[cfg(test)]
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| cfg_err(e.to_string()))
    }

    /// Defaults, then the preset, then the file, then flags.
    pub fn resolve(o: &Overrides) -> Result<Self, ConfigError> {
        let mut table = toml::Table::new();
        if let Some(name) = &o.preset {
            let text = PRESETS
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, t)| *t)
                .ok_or_else(|| {
                    let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
                    cfg_err(format!("unknown preset {name:?}; available: {}", names.join(", ")))
                })?;
            merge(&mut table, parse_toml(text, name)?);
        }
        if let Some(path) = &o.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| cfg_err(format!("{}: {e}", path.display())))?;
            merge(&mut table, parse_toml(&text, &path.display().to_string())?);
        }
        for item in &o.set {
            set_key(&mut table, item)?;
        }
        let mut cfg: RunConfig = table
            .try_into()
            .map_err(|e: toml::de::Error| cfg_err(e.to_string()))?;
        cfg.apply(o);
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, o: &Overrides) {
        if let Some(v) = o.num_sites {
            self.lattice.num_sites = v;
        }
        if let Some(v) = o.g {
            self.lattice.g = v;
        }
        if let Some(v) = o.coupling {
            self.lattice.coupling = v;
        }
        if let Some(v) = o.omega_base {
            self.drive.omega_base = v;
        }
        if let Some(v) = &o.drive_preset {
            self.drive.preset = Some(v.clone());
            self.drive.multipliers = None;
        }
        if let Some(v) = &o.multipliers {
            self.drive.multipliers = Some(v.clone());
        }
        if let Some(v) = &o.sequence {
            self.protocol.sequence = v.clone();
        }
        if let Some(v) = o.m {
            self.protocol.m = Some(v);
        }
        if o.non_strict {
            self.protocol.strict = false;
        }
        if let Some(v) = o.periods {
            self.protocol.periods = v;
        }
        if let Some(v) = &o.initial {
            self.protocol.initial = Some(v.clone());
        }
        if let Some(v) = o.dt {
            self.propagator.dt = v;
        }
        if let Some(v) = &o.method {
            self.propagator.method = v.clone();
        }
        if let Some(v) = &o.cache_dir {
            self.propagator.cache_dir = Some(v.clone());
        }
        if let Some(v) = o.t_max {
            self.scan.t_max = v;
        }
        if let Some(v) = &o.out_dir {
            self.output.dir = v.clone();
        }
        if o.no_svg {
            self.output.svg = false;
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.lattice().map_err(|e| cfg_err(e.to_string()))?;
        self.drive().map_err(|e| cfg_err(e.to_string()))?;
        self.propagator_options().map_err(|e| cfg_err(e.to_string()))?;
        self.initial_state().map_err(|e| cfg_err(e.to_string()))?;
        Ok(())
    }

    pub fn initial_state(&self) -> floquet_core::Result<StateVector> {
        let l = self.lattice.num_sites;
        let Some(text) = &self.protocol.initial else {
            return StateVector::all_down(l);
        };
        let spins = text
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                'u' | 'U' | '1' => Ok(1),
                'd' | 'D' | '0' => Ok(-1),
                other => Err(floquet_core::Error::InvalidParameter(format!(
                    "initial spin {other:?} is not u or d"
                ))),
            })
            .collect::<floquet_core::Result<Vec<i8>>>()?;
        StateVector::from_config(&SpinConfiguration::new(spins)?)
            .and_then(|s| if s.num_sites() == l { Ok(s) } else {
                Err(floquet_core::Error::LengthMismatch { expected: l, found: s.num_sites() })
            })
    }

    pub fn lattice(&self) -> floquet_core::Result<LatticeConfig> {
        LatticeConfig::new(self.lattice.num_sites, self.lattice.g, self.lattice.coupling)
    }

    pub fn drive_with_preset(&self, preset: DrivePreset) -> floquet_core::Result<DriveAssignment> {
        DriveAssignment::preset(preset, self.lattice.num_sites, self.drive.omega_base)
    }

    pub fn drive(&self) -> floquet_core::Result<DriveAssignment> {
        match (&self.drive.multipliers, &self.drive.preset) {
            (Some(m), _) => DriveAssignment::new(self.drive.omega_base, m.clone()),
            (None, Some(p)) => self.drive_with_preset(p.parse()?),
            (None, None) => self.drive_with_preset(DrivePreset::Uniform),
        }
    }

    pub fn propagator_options(&self) -> floquet_core::Result<PropagatorOptions> {
        let opts = PropagatorOptions {
            dt: self.propagator.dt,
            series_order: self.propagator.series_order,
            method: self.propagator.method.parse::<Method>()?,
        };
        opts.validate()?;
        Ok(opts)
    }

    pub fn out_path(&self, name: &str) -> PathBuf {
        self.output.dir.join(name)
    }

    pub fn out_dir(&self) -> &Path {
        &self.output.dir
    }
}
