//! Run configuration as a JSON document.
//!
//! Units: lengths in the same unit as the box `L`, times in units of the
//! damping time, frequencies `|ξ|` in radians per length (`ξ = 2πκ`).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use dampflow::diagnostics::FitWindow;
use dampflow::dynamics::{IntegratorConfig, Scheme};
use dampflow::spectral::{CutoffProfile, Grid};
use serde::{de::DeserializeOwned, Deserialize, Serialize};

pub const PRESETS: [&str; 2] = ["preset-1d-fast", "preset-3d-decay"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Points per axis, a power of two.
    #[serde(rename = "N")]
    pub n: usize,
    /// Box side length.
    #[serde(rename = "L")]
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    /// `ρ0 = ρ* + ε^{5/11} e^{−ε^{8/11}|x − c|²}`, the same profile in every
    /// velocity component, centred in the box.
    Remark1 { epsilon: f64 },
    /// `a = amp_a·e^{−|x−c|²/width²}`, `u_j = amp_u·e^{−|x−c|²/width²}`.
    Gaussian { amp_a: f64, amp_u: f64, width: f64 },
    /// `a = amp_a cos θ`, `u_j = amp_u sin θ`, `θ = 2π κ·x / L`.
    SingleMode { kappa: Vec<i64>, amp_a: f64, amp_u: f64 },
    /// Snapshot file.
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub csv_path: Option<PathBuf>,
    #[serde(default)]
    pub json_report_path: Option<PathBuf>,
}

fn default_boundedness() -> Option<f64> {
    Some(1.1)
}

fn default_threshold() -> Option<f64> {
    Some(0.1)
}

fn default_true() -> bool {
    true
}

/// Pass/fail checks applied after a run; `null` disables a check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChecksSpec {
    /// `sup ‖(a,u)‖_{H³} ≤ factor · N0`.
    #[serde(default = "default_boundedness")]
    pub boundedness_factor: Option<f64>,
    /// Largest admissible final `∫(‖∇a‖∞ + ‖∇u‖∞)dt`.
    #[serde(default = "default_threshold")]
    pub criterion_threshold: Option<f64>,
    #[serde(default = "default_true")]
    pub density_envelope: bool,
    /// Allowed `|slope − expected|` for every configured fit window.
    #[serde(default)]
    pub fit_tolerance: Option<f64>,
    /// Allowed `|M(T) − e^{−T}M(0)| / |M(0)|`.
    #[serde(default)]
    pub momentum_tolerance: Option<f64>,
    /// Allowed `|mass(T) − mass(0)| / |mass(0)|`.
    #[serde(default)]
    pub mass_tolerance: Option<f64>,
}

impl Default for ChecksSpec {
    fn default() -> Self {
        Self {
            boundedness_factor: default_boundedness(),
            criterion_threshold: default_threshold(),
            density_envelope: true,
            fit_tolerance: None,
            momentum_tolerance: None,
            mass_tolerance: None,
        }
    }
}

fn default_rho_star() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dimension: usize,
    pub grid: GridSpec,
    #[serde(default = "default_rho_star")]
    pub rho_star: f64,
    #[serde(default)]
    pub cutoff: CutoffProfile,
    pub integrator: IntegratorConfig,
    pub ic: InitialCondition,
    #[serde(default)]
    pub output: OutputSpec,
    /// Decay fit window per CSV column.
    #[serde(default)]
    pub fit_windows: BTreeMap<String, FitWindow>,
    #[serde(default)]
    pub checks: ChecksSpec,
    /// Recorded for reproducibility; no built-in initial condition is random.
    #[serde(default)]
    pub seed: Option<u64>,
}

/// Deserializes with the failing field path in the message.
pub(crate) fn parse_json<T: DeserializeOwned>(text: &str, what: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        anyhow::anyhow!("invalid {what} at field `{path}`: {inner}")
    })
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg: RunConfig = parse_json(text, "config")?;
        cfg.validate()?;
        cfg.cutoff = cfg.cutoff.validated()?;
        Ok(cfg)
    }

    /// Reads `path`, or a built-in preset when `path` names one and no such
    /// file exists.
    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            if let Some(cfg) = path.to_str().and_then(Self::preset) {
                return Ok(cfg);
            }
        }
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn grid(&self) -> Result<Grid> {
        Ok(Grid::new(self.dimension, self.grid.n, self.grid.length)?)
    }

    pub fn validate(&self) -> Result<()> {
        let grid = self.grid().context("field `grid`")?;
        if !(self.rho_star.is_finite() && self.rho_star > 0.0) {
            bail!("field `rho_star`: {} must be positive", self.rho_star);
        }
        let cutoff = self.cutoff.validated().context("field `cutoff`")?;
        cutoff.check_resolved(&grid).context("field `cutoff`")?;
        self.integrator.validate().context("field `integrator`")?;
        match &self.ic {
            InitialCondition::Remark1 { epsilon } => {
                if !(*epsilon > 0.0 && *epsilon <= 1.0) {
                    bail!("field `ic.epsilon`: {epsilon} must lie in (0, 1]");
                }
            }
            InitialCondition::Gaussian { amp_a, amp_u, width } => {
                if !(*width > 0.0 && width.is_finite()) {
                    bail!("field `ic.width`: {width} must be positive");
                }
                if !(amp_a.is_finite() && amp_u.is_finite()) {
                    bail!("field `ic`: amplitudes must be finite");
                }
            }
            InitialCondition::SingleMode { kappa, amp_a, amp_u } => {
                if kappa.len() != self.dimension {
                    bail!("field `ic.kappa`: expected {} entries, found {}", self.dimension, kappa.len());
                }
                let half = (self.grid.n / 2) as i64;
                if kappa.iter().any(|k| k.abs() >= half) {
                    bail!("field `ic.kappa`: entries must satisfy |κ| < N/2 = {half}");
                }
                if !(amp_a.is_finite() && amp_u.is_finite()) {
                    bail!("field `ic`: amplitudes must be finite");
                }
            }
            InitialCondition::File { .. } => {}
        }
        for (name, w) in &self.fit_windows {
            if dampflow::diagnostics::expected_slope(name).is_none() && !dampflow::diagnostics::CSV_HEADER.split(',').any(|c| c == name) {
                bail!("field `fit_windows.{name}`: unknown column");
            }
            w.validate(Some(self.grid.length)).with_context(|| format!("field `fit_windows.{name}`"))?;
        }
        if let Some(f) = self.checks.boundedness_factor {
            if !(f > 0.0) {
                bail!("field `checks.boundedness_factor`: {f} must be positive");
            }
        }
        for (name, v) in [
            ("criterion_threshold", self.checks.criterion_threshold),
            ("fit_tolerance", self.checks.fit_tolerance),
            ("momentum_tolerance", self.checks.momentum_tolerance),
            ("mass_tolerance", self.checks.mass_tolerance),
        ] {
            if let Some(v) = v {
                if !(v >= 0.0) {
                    bail!("field `checks.{name}`: {v} must be non-negative");
                }
            }
        }
        Ok(())
    }

    pub fn preset(name: &str) -> Option<Self> {
        let windows = |names: &[&str], t_hi: f64| -> BTreeMap<String, FitWindow> {
            names.iter().map(|n| (n.to_string(), FitWindow { t_lo: 5.0, t_hi })).collect()
        };
        match name {
            "preset-1d-fast" => Some(Self {
                dimension: 1,
                grid: GridSpec { n: 1024, length: 400.0 },
                rho_star: 1.0,
                cutoff: CutoffProfile::default(),
                integrator: IntegratorConfig {
                    scheme: Scheme::StrangExponential,
                    dt: Some(0.05),
                    dealias: true,
                    t_end: 200.0,
                    output_every: 10,
                    linear_only: false,
                },
                ic: InitialCondition::Remark1 { epsilon: 1e-2 },
                output: OutputSpec {
                    csv_path: Some("preset-1d-fast.csv".into()),
                    json_report_path: Some("preset-1d-fast.json".into()),
                },
                fit_windows: windows(&["d0_u", "d1_u", "d1_a", "d2_a"], 200.0),
                checks: ChecksSpec::default(),
                seed: None,
            }),
            "preset-3d-decay" => Some(Self {
                dimension: 3,
                grid: GridSpec { n: 64, length: 200.0 },
                rho_star: 1.0,
                cutoff: CutoffProfile::default(),
                integrator: IntegratorConfig {
                    scheme: Scheme::StrangExponential,
                    dt: Some(0.02),
                    dealias: true,
                    t_end: 50.0,
                    output_every: 25,
                    linear_only: false,
                },
                ic: InitialCondition::Remark1 { epsilon: 1e-2 },
                output: OutputSpec {
                    csv_path: Some("preset-3d-decay.csv".into()),
                    json_report_path: Some("preset-3d-decay.json".into()),
                },
                fit_windows: windows(&["d0_u", "d1_u", "d1_a", "d2_a"], 50.0),
                checks: ChecksSpec::default(),
                seed: None,
            }),
            _ => None,
        }
    }
}

fn default_times() -> (f64, f64, usize) {
    (10.0, 1000.0, 100)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolCheckSpec {
    #[serde(default = "SymbolCheckSpec::default_t_lo")]
    pub t_lo: f64,
    #[serde(default = "SymbolCheckSpec::default_t_hi")]
    pub t_hi: f64,
    #[serde(default = "SymbolCheckSpec::default_count")]
    pub count: usize,
    #[serde(default = "SymbolCheckSpec::default_tolerance")]
    pub tolerance: f64,
    /// Times `t_hi` may be multiplied by ten when a fit misses.
    #[serde(default = "SymbolCheckSpec::default_extensions")]
    pub max_extensions: usize,
}

impl SymbolCheckSpec {
    fn default_t_lo() -> f64 {
        default_times().0
    }
    fn default_t_hi() -> f64 {
        default_times().1
    }
    fn default_count() -> usize {
        default_times().2
    }
    fn default_tolerance() -> f64 {
        0.05
    }
    fn default_extensions() -> usize {
        2
    }
}

impl Default for SymbolCheckSpec {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

/// The part of a run configuration read by `symbol-check`; other fields are
/// ignored so a full run configuration is accepted too.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolCheckConfig {
    #[serde(default)]
    pub dimension: Option<usize>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub cutoff: CutoffProfile,
    #[serde(default)]
    pub symbol_check: SymbolCheckSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

impl SymbolCheckConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: SymbolCheckConfig = parse_json(text, "symbol-check config")?;
        let cutoff = cfg.cutoff.validated().context("field `cutoff`")?;
        if let Some(g) = cfg.grid {
            let grid = Grid::new(cfg.dimension.unwrap_or(1), g.n, g.length).context("field `grid`")?;
            cutoff.check_resolved(&grid).context("field `cutoff`")?;
        }
        let s = &cfg.symbol_check;
        if !(s.t_lo >= 1.0 && s.t_hi > s.t_lo && s.count >= 8) {
            bail!("field `symbol_check`: need 1 <= t_lo < t_hi and count >= 8");
        }
        Ok(cfg)
    }
}

/// Windows and verdict settings for `decay-fit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub windows: BTreeMap<String, FitWindow>,
    /// Box length for the validity check; omitted skips it.
    #[serde(default, rename = "L")]
    pub length: Option<f64>,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl FitConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: FitConfig = parse_json(text, "fit config")?;
        if cfg.windows.is_empty() {
            bail!("field `windows`: at least one column is required");
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "dimension": 1,
        "grid": {"N": 64, "L": 40.0},
        "integrator": {"scheme": "rk4", "t_end": 1.0},
        "ic": {"kind": "remark1", "epsilon": 0.5}
    }"#;

    #[test]
    fn minimal_config_defaults() {
        let cfg = RunConfig::parse(MINIMAL).unwrap();
        assert_eq!(cfg.rho_star, 1.0);
        assert_eq!(cfg.cutoff, CutoffProfile::default());
        assert_eq!(cfg.checks, ChecksSpec::default());
        assert!(cfg.integrator.dealias);
    }

    #[test]
    fn round_trip_is_field_identical() {
        for name in PRESETS {
            let cfg = RunConfig::preset(name).unwrap();
            cfg.validate().unwrap();
            assert_eq!(RunConfig::parse(&cfg.to_json()).unwrap(), cfg);
        }
        let cfg = RunConfig::parse(MINIMAL).unwrap();
        assert_eq!(RunConfig::parse(&cfg.to_json()).unwrap(), cfg);
    }

    #[test]
    fn missing_field_is_named() {
        let text = MINIMAL.replace(r#""N": 64, "#, "");
        let err = format!("{:#}", RunConfig::parse(&text).unwrap_err());
        assert!(err.contains("grid") && err.contains("`N`"), "{err}");
        let text = MINIMAL.replace(r#""rk4""#, r#""leapfrog""#);
        let err = format!("{:#}", RunConfig::parse(&text).unwrap_err());
        assert!(err.contains("integrator.scheme"), "{err}");
    }

    #[test]
    fn invalid_values_rejected() {
        let eps = MINIMAL.replace("0.5", "1.5");
        assert!(format!("{:#}", RunConfig::parse(&eps).unwrap_err()).contains("epsilon"));
        let n = MINIMAL.replace("64", "60");
        assert!(format!("{:#}", RunConfig::parse(&n).unwrap_err()).contains("grid"));
        let unresolved = MINIMAL.replace(r#""dimension": 1,"#, r#""dimension": 1, "cutoff": {"r0": 0.25, "R0": 6.0, "kind": "smooth"},"#);
        assert!(format!("{:#}", RunConfig::parse(&unresolved).unwrap_err()).contains("cutoff"));
        let window = MINIMAL.replace(r#""dimension": 1,"#, r#""dimension": 1, "fit_windows": {"d1_a": {"t_lo": 5, "t_hi": 500}},"#);
        let err = format!("{:#}", RunConfig::parse(&window).unwrap_err());
        assert!(err.contains("d1_a") && err.contains("t_hi"), "{err}");
        let kappa = MINIMAL.replace(r#"{"kind": "remark1", "epsilon": 0.5}"#, r#"{"kind": "single_mode", "kappa": [1, 2], "amp_a": 1, "amp_u": 0}"#);
        assert!(format!("{:#}", RunConfig::parse(&kappa).unwrap_err()).contains("kappa"));
    }

    #[test]
    fn symbol_check_subset() {
        let cfg = SymbolCheckConfig::parse("{}").unwrap();
        assert_eq!(cfg.symbol_check.count, 100);
        assert_eq!((cfg.symbol_check.t_lo, cfg.symbol_check.t_hi), (10.0, 1000.0));
        assert!(SymbolCheckConfig::parse(MINIMAL).is_ok());
        let err = SymbolCheckConfig::parse(r#"{"grid": {"N": 16, "L": 100}, "cutoff": {"r0": 0.25, "R0": 0.6, "kind": "smooth"}}"#);
        assert!(err.is_err());
    }

    #[test]
    fn presets_by_name() {
        assert!(RunConfig::load(Path::new("preset-3d-decay")).is_ok());
        assert!(RunConfig::load(Path::new("no-such-preset")).is_err());
        let p = RunConfig::preset("preset-1d-fast").unwrap();
        assert_eq!((p.grid.n, p.grid.length), (1024, 400.0));
    }
}
