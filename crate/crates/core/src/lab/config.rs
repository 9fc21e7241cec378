//! Experiment configuration, written as TOML.
//!
//! ```toml
//! version = 1
//! name = "soliton-sanity"
//! p = 2
//! t_final = 20.0
//! frame_stride = 1000
//! output_dir = "out/soliton-sanity"
//!
//! [grid]
//! length = 128.0
//! n = 1024
//! dt = 1e-3
//!
//! [initial]
//! kind = "soliton"
//! c = 1.0
//! x0 = -20.0
//!
//! [[diagnostics]]
//! kind = "conservation"
//! ```

use crate::error::{Error, Result};
use crate::field::{Exponent, GridSpec};
use crate::modulation::ModulationMode;
use crate::profiles::InitialData;
use crate::solver::SolverOptions;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

pub const CONFIG_VERSION: u32 = 1;

fn default_name() -> String {
    "experiment".into()
}

fn default_stride() -> usize {
    100
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    #[serde(default = "default_name")]
    pub name: String,
    pub p: Exponent,
    pub grid: GridSpec,
    pub t_final: f64,
    #[serde(default = "default_stride")]
    pub frame_stride: usize,
    pub output_dir: PathBuf,
    /// Write initial and final snapshots.
    #[serde(default = "default_true")]
    pub snapshots: bool,
    #[serde(default)]
    pub plots: bool,
    #[serde(default)]
    pub solver: SolverConfig,
    pub initial: InitialData,
    #[serde(default)]
    pub diagnostics: Vec<DiagnosticSpec>,
}

/// Solver limits. Disabling the boundary watchdog is only sound for diagnostics that stay
/// valid when radiation wraps around the periodic cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub blowup_cap: f64,
    pub boundary_threshold: f64,
    pub boundary_watchdog: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = SolverOptions::default();
        SolverConfig {
            blowup_cap: d.blowup_cap,
            boundary_threshold: d.boundary_threshold.unwrap_or(1e-8),
            boundary_watchdog: true,
        }
    }
}

impl SolverConfig {
    pub fn options(&self) -> SolverOptions {
        SolverOptions {
            blowup_cap: self.blowup_cap,
            boundary_threshold: self.boundary_watchdog.then_some(self.boundary_threshold),
            ..SolverOptions::default()
        }
    }
}

/// Where the per-frame partitions of the localized quantities come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionSource {
    /// Modulation-tracked centers.
    #[default]
    Tracked,
    /// Centers x0 + ct of the initial solitons.
    Ballistic,
}

fn default_samples() -> usize {
    100
}

fn default_h1_size() -> f64 {
    1e-2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DiagnosticSpec {
    /// Mass, energy, the H² invariant (p = 2) and boundary amplitude per stored frame.
    Conservation,
    /// Mass left of ρt − R.
    Nondispersion { rho: f64, r: f64 },
    /// Per-frame decomposition; also yields the pre/post speed table.
    Modulation {
        #[serde(default = "default_mode")]
        mode: ModulationMode,
        /// Number of solitons; default the count in the initial data.
        count: Option<usize>,
    },
    /// Localized masses and energies over per-frame partitions.
    Monotonicity {
        kappa: f64,
        nu: f64,
        c1: f64,
        #[serde(default)]
        partition: PartitionSource,
    },
    /// I_{(t0,x0)} with m̃(t) = slope_m·t and a fitted C₁.
    MonotoneFunctional {
        kappa: f64,
        f_slope: f64,
        m_slope: f64,
        x0: Vec<f64>,
    },
    /// Temporal decay of ‖u − ΣR‖_{H¹} along the modulation track and spatial decay θ of the final frame.
    Decay {
        #[serde(default)]
        s: u32,
    },
    /// Discrete spectrum of the initial data (p = 2 or 3).
    Scattering { points: Option<usize> },
    /// Coercivity sample around the initial solitons.
    Coercivity {
        nu: f64,
        #[serde(default = "default_samples")]
        samples: usize,
        #[serde(default = "default_h1_size")]
        h1_size: f64,
        #[serde(default)]
        seed: u64,
    },
}

fn default_mode() -> ModulationMode {
    ModulationMode::Full
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive (got {v})")))
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical serialization, so formatting does not change the hash.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Checks every parameter before anything is computed. Errors are `Config`.
    pub fn validate(&self) -> Result<()> {
        let cfg = |e: Error| match e {
            Error::Config(_) => e,
            other => Error::Config(other.to_string()),
        };
        if self.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "config version {} is not supported (expected {CONFIG_VERSION})",
                self.version
            )));
        }
        self.grid.validate().map_err(cfg)?;
        positive("dt", self.grid.dt)?;
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(Error::Config(format!(
                "t_final must be nonnegative (got {})",
                self.t_final
            )));
        }
        let steps = self.t_final / self.grid.dt;
        if (steps - steps.round()).abs() > 1e-6 * steps.max(1.0) {
            return Err(Error::Config(format!(
                "t_final {} is not a multiple of dt {}",
                self.t_final, self.grid.dt
            )));
        }
        positive("blowup_cap", self.solver.blowup_cap)?;
        positive("boundary_threshold", self.solver.boundary_threshold)?;
        if self.frame_stride == 0 {
            return Err(Error::Config("frame_stride must be positive".into()));
        }
        if self.output_dir.as_os_str().is_empty() {
            return Err(Error::Config("output_dir is empty".into()));
        }
        match &self.initial {
            InitialData::FromFile { path } if !path.exists() => {
                return Err(Error::Config(format!(
                    "initial snapshot {} does not exist",
                    path.display()
                )));
            }
            InitialData::FromFile { .. } => {}
            other => {
                other.realize(self.p, &self.grid).map_err(cfg)?;
            }
        }
        let n_sol = self.initial.solitons().len();
        for d in &self.diagnostics {
            match d {
                DiagnosticSpec::Conservation => {}
                DiagnosticSpec::Nondispersion { rho, r } => {
                    positive("rho", *rho)?;
                    positive("r", *r)?;
                }
                DiagnosticSpec::Modulation { count, .. } => {
                    if count.unwrap_or(n_sol) == 0 {
                        return Err(Error::Config("modulation needs a soliton count".into()));
                    }
                }
                DiagnosticSpec::Monotonicity {
                    kappa,
                    nu,
                    c1,
                    partition,
                } => {
                    positive("kappa", *kappa)?;
                    positive("nu", *nu)?;
                    positive("c1", *c1)?;
                    if *kappa >= c1 / 4.0 {
                        return Err(Error::Config(format!(
                            "kappa {kappa} must be below c1/4 = {}",
                            c1 / 4.0
                        )));
                    }
                    if n_sol == 0 {
                        return Err(Error::Config("monotonicity needs solitons in the initial data".into()));
                    }
                    if *partition == PartitionSource::Tracked
                        && !self
                            .diagnostics
                            .iter()
                            .any(|d| matches!(d, DiagnosticSpec::Modulation { .. }))
                    {
                        return Err(Error::Config("tracked partitions need a modulation diagnostic".into()));
                    }
                }
                DiagnosticSpec::MonotoneFunctional {
                    kappa,
                    f_slope,
                    m_slope,
                    x0,
                } => {
                    positive("kappa", *kappa)?;
                    if !(f_slope.is_finite() && m_slope.is_finite()) {
                        return Err(Error::Config("slopes must be finite".into()));
                    }
                    if x0.is_empty() || x0.iter().any(|x| !x.is_finite()) {
                        return Err(Error::Config("x0 must list finite positions".into()));
                    }
                }
                DiagnosticSpec::Decay { s } => {
                    if *s > 3 {
                        return Err(Error::Config(format!("derivative order {s} must be at most 3")));
                    }
                    if !self
                        .diagnostics
                        .iter()
                        .any(|d| matches!(d, DiagnosticSpec::Modulation { .. }))
                    {
                        return Err(Error::Config("decay needs a modulation diagnostic".into()));
                    }
                }
                DiagnosticSpec::Scattering { points } => {
                    if !matches!(self.p.get(), 2 | 3) {
                        return Err(Error::Config(format!(
                            "scattering needs p = 2 or 3 (got {})",
                            self.p.get()
                        )));
                    }
                    if let Some(m) = points {
                        if *m < self.grid.n || !m.is_power_of_two() {
                            return Err(Error::Config(format!(
                                "scattering points {m} must be a power of two >= N"
                            )));
                        }
                    }
                }
                DiagnosticSpec::Coercivity {
                    nu, samples, h1_size, ..
                } => {
                    positive("nu", *nu)?;
                    positive("h1_size", *h1_size)?;
                    if *samples == 0 || n_sol == 0 {
                        return Err(Error::Config("coercivity needs samples and initial solitons".into()));
                    }
                }
            }
        }
        Ok(())
    }
}
