//! TOML run configuration and the manifest written next to every run.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use cascade_core::{AnalysisOptions, RunSummary, SimulationConfig};
use serde::{Deserialize, Serialize};

/// Contents of a `--config` file: a `[simulation]` table and an optional
/// `[analysis]` table. Missing analysis keys take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub simulation: SimulationConfig,
    #[serde(default)]
    pub analysis: AnalysisOptions,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: RunConfig = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        cfg.simulation
            .validate()
            .with_context(|| format!("invalid simulation in {}", path.display()))?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Seeds {
    pub forcing: Option<u64>,
    pub initial: Option<u64>,
    pub analysis: u64,
}

impl Seeds {
    pub fn of(cfg: &RunConfig) -> Self {
        use cascade_core::solver::InitialCondition;
        Self {
            forcing: cfg.simulation.forcing.map(|f| f.seed),
            initial: match cfg.simulation.initial {
                InitialCondition::Random { seed, .. } => Some(seed),
                _ => None,
            },
            analysis: cfg.analysis.seed,
        }
    }
}

/// Files of a run, relative to the run directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct RunFiles {
    pub snapshots: Vec<PathBuf>,
    pub series_json: PathBuf,
    pub series_csv: PathBuf,
    pub summary: PathBuf,
    pub force: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WallClock {
    /// Seconds since the Unix epoch at start.
    pub started: u64,
    pub elapsed_s: f64,
}

/// Everything needed to re-execute a run and locate its outputs. The
/// configuration is echoed with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: String,
    pub code_version: String,
    pub config: RunConfig,
    pub seeds: Seeds,
    pub files: RunFiles,
    pub attractor_certified: bool,
    pub t_stats_start: f64,
    pub wall_clock: WallClock,
}

pub const MANIFEST: &str = "manifest.json";
pub const MANIFEST_SCHEMA: &str = "cascade-scope.run.v1";

impl RunManifest {
    pub fn new(config: RunConfig, files: RunFiles, summary: &RunSummary, wall_clock: WallClock) -> Self {
        Self {
            schema: MANIFEST_SCHEMA.into(),
            code_version: env!("CARGO_PKG_VERSION").into(),
            seeds: Seeds::of(&config),
            config,
            files,
            attractor_certified: summary.attractor.is_some_and(|a| a.certified),
            t_stats_start: summary.t_stats_start,
            wall_clock,
        }
    }

    pub fn load(run: &Path) -> Result<Self> {
        let path = run.join(MANIFEST);
        let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        let m: RunManifest = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        if m.schema != MANIFEST_SCHEMA {
            anyhow::bail!("{}: unknown manifest schema {}", path.display(), m.schema);
        }
        Ok(m)
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

pub fn unix_now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}
