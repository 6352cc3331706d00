use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Svg,
    Both,
}

impl OutputFormat {
    pub fn csv(self) -> bool {
        matches!(self, Self::Csv | Self::Both)
    }

    pub fn svg(self) -> bool {
        matches!(self, Self::Svg | Self::Both)
    }
}

/// Settings shared by the `figures` and `violation` runs.
///
/// Every field has a default, so `{}` is a valid config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub samples: usize,
    pub p_values: Vec<f64>,
    /// `(lo, hi, steps)`, endpoints included.
    pub z_grid: (f64, f64, usize),
    pub out_dir: PathBuf,
    pub format: OutputFormat,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 20240601,
            samples: 100,
            p_values: vec![0.2, 0.5, 0.8],
            z_grid: (0.75, 1.0, 50),
            out_dir: PathBuf::from("out"),
            format: OutputFormat::Both,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::OutOfRange("samples must be at least 1".into()));
        }
        if let Some(p) = self.p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::OutOfRange(format!("p = {p} outside [0, 1]")));
        }
        let (lo, hi, steps) = self.z_grid;
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi || steps == 0 {
            return Err(Error::OutOfRange(format!(
                "z grid ({lo}, {hi}, {steps}) must satisfy 0 <= lo <= hi <= 1 with steps >= 1"
            )));
        }
        Ok(())
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(json)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn z_values(&self) -> Vec<f64> {
        let (lo, hi, steps) = self.z_grid;
        if steps == 1 {
            return vec![lo];
        }
        (0..steps)
            .map(|i| {
                if i + 1 == steps {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (steps - 1) as f64
                }
            })
            .collect()
    }
}
