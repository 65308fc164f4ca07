//! Run configuration: a TOML file with one table per section.
//!
//! ```toml
//! [grid]
//! n = 32
//! L = 6.283185307179586
//!
//! [frank]
//! k1 = 1.0
//! k2 = 1.5
//! k3 = 2.0
//!
//! [time]
//! dt = 1e-4            # or cfl_safety = 0.5 (adaptive), optionally max_dt
//! t_end = 0.2
//! output_every = 1
//!
//! [init]
//! kind = "mixed"       # equilibrium | taylor-green | director-perturb | mixed
//! amplitude = 0.2
//! director_amplitude = 0.1
//! modes = 2
//! seed = 7
//! d_star = [0.0, 0.0, 1.0]
//!
//! [output]
//! dir = "out"
//! csv_name = "ledger.csv"
//! snapshot_every = 0   # 0 disables intermediate snapshots
//!
//! [tolerances]
//! unit_tol = 1e-12
//! div_tol = 1e-10
//! residual_tol = 1e-3
//! ```
//!
//! Any key can be overridden with `--set section.key=value`, where `value`
//! is a TOML literal (bare words are taken as strings).

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use nemflow_core::init::{InitKind, InitSpec};
use nemflow_core::{DtPolicy, FrankConstants, Grid, SolverConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSection,
    pub frank: FrankSection,
    pub time: TimeSection,
    pub init: InitSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub tolerances: ToleranceSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
    #[serde(rename = "L", default = "two_pi")]
    pub box_length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrankSection {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cfl_safety: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_dt: Option<f64>,
    pub t_end: f64,
    #[serde(default = "one")]
    pub output_every: usize,
    #[serde(default = "default_halvings")]
    pub max_halvings: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSection {
    pub kind: InitKind,
    #[serde(default)]
    pub amplitude: f64,
    /// Defaults to `amplitude`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub director_amplitude: Option<f64>,
    #[serde(default = "default_modes")]
    pub modes: usize,
    #[serde(default)]
    pub seed: u64,
    pub d_star: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub csv_name: String,
    pub snapshot_every: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), csv_name: "ledger.csv".into(), snapshot_every: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSection {
    pub unit_tol: f64,
    pub div_tol: f64,
    /// Relative energy-balance residual budget; also the per-unit-time slack
    /// of the Lyapunov checks.
    pub residual_tol: f64,
    /// Growth of `‖u‖²_{H¹} + ‖∇d‖²_{H¹}` flagged as a blow-up suspect.
    #[serde(default = "default_blowup")]
    pub blowup_factor: f64,
}

impl Default for ToleranceSection {
    fn default() -> Self {
        Self { unit_tol: 1e-12, div_tol: 1e-10, residual_tol: 1e-3, blowup_factor: default_blowup() }
    }
}

fn two_pi() -> f64 {
    std::f64::consts::TAU
}

fn one() -> usize {
    1
}

fn default_halvings() -> u32 {
    8
}

fn default_modes() -> usize {
    2
}

fn default_blowup() -> f64 {
    1e3
}

/// Built-in configurations.
pub const PRESETS: [&str; 3] = ["small-data", "energy-balance", "equilibrium"];

impl RunConfig {
    pub fn preset(name: &str) -> Result<Self> {
        let (grid, frank, time, init) = match name {
            // m(0) ≈ 1e-2, monotone Lyapunov functionals over [0, 0.5]
            "small-data" => (
                GridSection { n: 32, box_length: two_pi() },
                FrankSection { k1: 1.0, k2: 1.5, k3: 2.0 },
                time(Some(1e-3), 0.5),
                InitSection {
                    kind: InitKind::Mixed,
                    amplitude: 0.005,
                    director_amplitude: Some(0.004),
                    modes: 1,
                    seed: 11,
                    d_star: [0.0, 0.0, 1.0],
                },
            ),
            "energy-balance" => (
                GridSection { n: 32, box_length: two_pi() },
                FrankSection { k1: 1.0, k2: 1.0, k3: 1.0 },
                time(Some(1e-4), 0.2),
                InitSection {
                    kind: InitKind::Mixed,
                    amplitude: 0.2,
                    director_amplitude: Some(0.1),
                    modes: 2,
                    seed: 7,
                    d_star: [0.0, 0.0, 1.0],
                },
            ),
            "equilibrium" => (
                GridSection { n: 16, box_length: two_pi() },
                FrankSection { k1: 1.0, k2: 1.5, k3: 2.0 },
                time(Some(1e-3), 0.01),
                InitSection {
                    kind: InitKind::Equilibrium,
                    amplitude: 0.0,
                    director_amplitude: None,
                    modes: 2,
                    seed: 0,
                    d_star: [0.0, 0.6, 0.8],
                },
            ),
            other => bail!("unknown preset `{other}` (expected one of {})", PRESETS.join(", ")),
        };
        Ok(Self { grid, frank, time, init, output: OutputSection::default(), tolerances: ToleranceSection::default() })
    }

    #[cfg(test)]
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// Reads a file (or a preset), then applies the environment and the
    /// `key=value` overrides in order.
    pub fn load(path: Option<&Path>, preset: Option<&str>, overrides: &[String]) -> Result<Self> {
        let base = match (path, preset) {
            (Some(_), Some(_)) => bail!("--config and --preset are mutually exclusive"),
            (Some(p), None) => {
                std::fs::read_to_string(p).with_context(|| format!("cannot read config {}", p.display()))?
            }
            (None, Some(name)) => Self::preset(name)?.to_toml()?,
            (None, None) => Self::preset("energy-balance")?.to_toml()?,
        };
        let mut table: toml::Table = base.parse().context("config is not valid TOML")?;
        if let Ok(dir) = std::env::var("NEMFLOW_OUTPUT_DIR") {
            set_dotted(&mut table, "output.dir", toml::Value::String(dir))?;
        }
        for o in overrides {
            let (key, raw) = o.split_once('=').ok_or_else(|| anyhow!("override `{o}` is not key=value"))?;
            set_dotted(&mut table, key.trim(), parse_value(raw.trim()))?;
        }
        let cfg: Self = table.try_into().context("invalid configuration")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        self.solver_config()?;
        let ds = self.init.d_star;
        let len = (ds[0] * ds[0] + ds[1] * ds[1] + ds[2] * ds[2]).sqrt();
        if (len - 1.0).abs() > 1e-12 {
            bail!("init.d_star must be a unit vector (|d_star| = {len})");
        }
        if self.output.csv_name.is_empty() {
            bail!("output.csv_name must not be empty");
        }
        let t = &self.tolerances;
        for (name, v) in [("unit_tol", t.unit_tol), ("div_tol", t.div_tol), ("residual_tol", t.residual_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                bail!("tolerances.{name} = {v} must be positive");
            }
        }
        if !(t.blowup_factor > 1.0) {
            bail!("tolerances.blowup_factor must exceed 1");
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid<f64>> {
        Ok(Grid::new(self.grid.n, self.grid.box_length)?)
    }

    pub fn constants(&self) -> Result<FrankConstants<f64>> {
        Ok(FrankConstants::new(self.frank.k1, self.frank.k2, self.frank.k3)?)
    }

    pub fn solver_config(&self) -> Result<SolverConfig<f64>> {
        let t = &self.time;
        let policy = match (t.dt, t.cfl_safety) {
            (Some(_), Some(_)) => bail!("time.dt and time.cfl_safety are mutually exclusive"),
            (Some(dt), None) => DtPolicy::Fixed(dt),
            (None, _) => DtPolicy::Adaptive { max_dt: t.max_dt },
        };
        let mut cfg = SolverConfig::new(self.constants()?, policy, t.t_end)?;
        if let Some(s) = t.cfl_safety {
            cfg.cfl_safety = s;
        }
        cfg.unit_tol = self.tolerances.unit_tol;
        cfg.div_tol = self.tolerances.div_tol;
        cfg.output_every = t.output_every;
        cfg.max_halvings = t.max_halvings;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn init_spec(&self) -> InitSpec<f64> {
        let i = &self.init;
        InitSpec {
            kind: i.kind,
            amplitude: i.amplitude,
            director_amplitude: i.director_amplitude.unwrap_or(i.amplitude),
            modes: i.modes,
            seed: i.seed,
            d_star: i.d_star,
        }
    }
}

fn time(dt: Option<f64>, t_end: f64) -> TimeSection {
    TimeSection { dt, cfl_safety: None, max_dt: None, t_end, output_every: 1, max_halvings: default_halvings() }
}

fn parse_value(raw: &str) -> toml::Value {
    let wrapped = format!("v = {raw}");
    match wrapped.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.into())),
        Err(_) => toml::Value::String(raw.into()),
    }
}

fn set_dotted(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<()> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().filter(|s| !s.is_empty()).ok_or_else(|| anyhow!("empty override key"))?;
    let mut cur = table;
    for p in parts {
        cur = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| anyhow!("`{p}` in `{key}` is not a section"))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_round_trip() {
        for name in PRESETS {
            let cfg = RunConfig::preset(name).unwrap();
            let text = cfg.to_toml().unwrap();
            assert_eq!(RunConfig::from_toml(&text).unwrap(), cfg, "{name}");
        }
    }

    #[test]
    fn overrides_apply_in_order() {
        let cfg = RunConfig::load(
            None,
            Some("equilibrium"),
            &["grid.n=24".into(), "init.kind=taylor-green".into(), "grid.n=20".into(), "output.dir=/tmp/x".into()],
        )
        .unwrap();
        assert_eq!(cfg.grid.n, 20);
        assert_eq!(cfg.init.kind, InitKind::TaylorGreen);
        assert_eq!(cfg.output.dir, PathBuf::from("/tmp/x"));
    }

    #[test]
    fn invalid_values_are_rejected() {
        let bad = |o: &str| RunConfig::load(None, Some("equilibrium"), &[o.to_string()]).is_err();
        assert!(bad("frank.k2=0.0"));
        assert!(bad("grid.n=7"));
        assert!(bad("init.d_star=[1.0, 1.0, 0.0]"));
        assert!(bad("init.kind=vortex"));
        assert!(bad("time.cfl_safety=0.5"));
        assert!(bad("grid.colour=1"));
        assert!(bad("noequals"));
    }

    #[test]
    fn defaults_fill_optional_sections() {
        let text = "[grid]\nn = 16\n[frank]\nk1 = 1.0\nk2 = 1.0\nk3 = 1.0\n[time]\nt_end = 0.1\n\
                    [init]\nkind = \"equilibrium\"\nd_star = [0.0, 0.0, 1.0]\n";
        let cfg = RunConfig::from_toml(text).unwrap();
        assert_eq!(cfg.grid.box_length, std::f64::consts::TAU);
        assert_eq!(cfg.output, OutputSection::default());
        assert!(matches!(cfg.solver_config().unwrap().dt_policy, DtPolicy::Adaptive { max_dt: None }));
    }
}
