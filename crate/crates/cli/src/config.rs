//! Run configuration: a JSON file, then command-line overrides.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use rotforge::cost::{load_protocols, ErrorGrid, Level3Protocol, TableConfig};
use rotforge::synthesis::{SrTable, SynthesisModel};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub eps_raw: f64,
    pub l_max: u32,
    pub targets: Vec<f64>,
    /// Error buckets per decade in the cost tables.
    pub grid: u32,
    pub seed: u64,
    /// Level-3 protocol definitions; the built-in set when absent.
    pub protocols: Option<PathBuf>,
    /// Tabulated synthesis counts (`epsilon,tcount[,angle]`); the analytic
    /// model when absent or empty.
    pub sr_table: Option<PathBuf>,
    /// Per-command default when absent: CSV for `sweep`, JSON otherwise.
    pub format: Option<Format>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            eps_raw: 1e-3,
            l_max: 40,
            targets: vec![1e-5, 1e-10, 1e-15, 1e-20],
            grid: 20,
            seed: 0,
            protocols: None,
            sr_table: None,
            format: None,
        }
    }
}

impl RunConfig {
    /// Relative paths inside the file are taken from the file's directory.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
        let mut cfg: Self = serde_json::from_str(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.protocols, &mut cfg.sr_table].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        anyhow::ensure!(self.eps_raw > 0.0 && self.eps_raw < 0.5, "eps_raw={} outside (0, 0.5)", self.eps_raw);
        anyhow::ensure!((3..=60).contains(&self.l_max), "l_max={} outside 3..=60", self.l_max);
        anyhow::ensure!(!self.targets.is_empty(), "no targets");
        for &t in &self.targets {
            anyhow::ensure!(t > 0.0 && t < 1.0, "target {t} outside (0, 1)");
        }
        anyhow::ensure!((1..=200).contains(&self.grid), "grid={} outside 1..=200", self.grid);
        for p in self.protocols.iter().chain(&self.sr_table) {
            anyhow::ensure!(p.is_file(), "{} is not a file", p.display());
        }
        Ok(())
    }

    pub fn format_or(&self, fallback: Format) -> Format {
        self.format.unwrap_or(fallback)
    }

    pub fn level3_protocols(&self) -> anyhow::Result<Vec<Level3Protocol>> {
        Ok(match &self.protocols {
            Some(p) => load_protocols(p)?,
            None => Level3Protocol::defaults(),
        })
    }

    pub fn table_config(&self) -> anyhow::Result<TableConfig> {
        let grid = ErrorGrid::new(ErrorGrid::default().top, ErrorGrid::default().floor, self.grid)?;
        let cfg = TableConfig { grid, protocols: self.level3_protocols()?, ..TableConfig::new(self.eps_raw, self.l_max) };
        cfg.validate()?;
        Ok(cfg)
    }

    /// The SR comparator: the table when one is configured and non-empty.
    pub fn sr_model(&self) -> anyhow::Result<SynthesisModel> {
        if let Some(path) = &self.sr_table {
            let table = SrTable::from_path(path)?;
            if !table.is_empty() {
                return Ok(SynthesisModel::SrTable { table });
            }
        }
        Ok(SynthesisModel::sr_analytic())
    }
}
