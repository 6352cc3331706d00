//! Multiplicativity deviations `||E(rho)E(sigma) - E(rho sigma)||_F` of the
//! non-Schur SIO pair over Ginibre qubit states, with a Schur control run.

use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;

use super::config::ExperimentConfig;
use super::output::{fmt_num, Plot, Series, Table, PALETTE};
use super::sampling::{ginibre_state, task_rng};
use crate::channels::{multiplicativity_deviation, non_schur_sio_fixture, schur_kraus, KrausChannel, SchurChannel};
use crate::error::Result;
use crate::qmat::{ComplexMatrix, DensityMatrix};

/// Floor for plotting zero deviations on the log axis.
const LOG_FLOOR: f64 = 1e-18;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScatterRecord {
    pub sample_index: usize,
    pub deviation: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Summary {
    pub min: f64,
    pub median: f64,
    pub max: f64,
    /// Fraction of samples with deviation above `1e-3`.
    pub above_1e3: f64,
}

impl Summary {
    pub fn of(records: &[ScatterRecord]) -> Self {
        let mut v: Vec<f64> = records.iter().map(|r| r.deviation).collect();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let median = if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        };
        Self {
            min: v[0],
            median,
            max: v[n - 1],
            above_1e3: v.iter().filter(|&&x| x > 1e-3).count() as f64 / n as f64,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ViolationReport {
    pub seed: u64,
    /// The non-Schur SIO with `sigma = diag(0.3, 0.7)`.
    pub records: Vec<ScatterRecord>,
    /// A Schur channel on the same states and `sigma`.
    pub control: Vec<ScatterRecord>,
    /// The non-Schur SIO with the degenerate `sigma = I/2`.
    pub degenerate: Vec<ScatterRecord>,
    pub summary: Summary,
    pub control_summary: Summary,
    pub degenerate_summary: Summary,
}

/// Schur channel sharing the diagonal Kraus operator of the fixture:
/// coefficient matrix `[[1, sqrt(0.6)], [sqrt(0.6), 1]]`.
pub fn control_channel() -> KrausChannel {
    let c = 0.6f64.sqrt();
    let coeff = ComplexMatrix::from_real_rows(&[vec![1.0, c], vec![c, 1.0]]).expect("square");
    schur_kraus(&SchurChannel::new(coeff).expect("valid coefficients")).expect("PSD")
}

/// Deviations of `channel` against `sigma` on the seeded Ginibre qubit ensemble.
pub fn violation_with(
    channel: &KrausChannel,
    sigma: &DensityMatrix,
    seed: u64,
    samples: usize,
) -> Result<Vec<ScatterRecord>> {
    (0..samples)
        .into_par_iter()
        .map(|k| {
            let rho = ginibre_state(channel.dim(), &mut task_rng(seed, k as u64));
            Ok(ScatterRecord {
                sample_index: k,
                deviation: multiplicativity_deviation(channel, &rho, sigma)?,
            })
        })
        .collect()
}

pub fn violation_experiment(cfg: &ExperimentConfig) -> Result<ViolationReport> {
    cfg.validate()?;
    let sigma = DensityMatrix::incoherent(&[0.3, 0.7])?;
    let fixture = non_schur_sio_fixture();
    let records = violation_with(&fixture, &sigma, cfg.seed, cfg.samples)?;
    let control = violation_with(&control_channel(), &sigma, cfg.seed, cfg.samples)?;
    let degenerate = violation_with(&fixture, &DensityMatrix::maximally_mixed(2), cfg.seed, cfg.samples)?;
    Ok(ViolationReport {
        seed: cfg.seed,
        summary: Summary::of(&records),
        control_summary: Summary::of(&control),
        degenerate_summary: Summary::of(&degenerate),
        records,
        control,
        degenerate,
    })
}

impl ViolationReport {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&["sample_index", "deviation", "control_deviation", "degenerate_deviation"]);
        t.comments.push(format!("seed={}", self.seed));
        t.comments.push("sigma=diag(0.3,0.7); control=Schur [[1,sqrt0.6],[sqrt0.6,1]]; degenerate sigma=I/2".into());
        for ((r, c), g) in self.records.iter().zip(&self.control).zip(&self.degenerate) {
            t.rows.push(vec![
                r.sample_index.to_string(),
                fmt_num(r.deviation),
                fmt_num(c.deviation),
                fmt_num(g.deviation),
            ]);
        }
        for (name, s) in [
            ("fixture", &self.summary),
            ("control", &self.control_summary),
            ("degenerate", &self.degenerate_summary),
        ] {
            t.footer.push(format!(
                "{name} min={} median={} max={} frac_above_1e-3={}",
                fmt_num(s.min),
                fmt_num(s.median),
                fmt_num(s.max),
                fmt_num(s.above_1e3)
            ));
        }
        t
    }

    pub fn to_plot(&self) -> Plot {
        let pts = |rs: &[ScatterRecord]| -> Vec<(f64, f64)> {
            rs.iter().map(|r| (r.sample_index as f64, r.deviation)).collect()
        };
        let mut fixture = Series::line("non-Schur SIO", PALETTE[1], pts(&self.records));
        fixture.markers = true;
        let mut control = Series::line("Schur control", PALETTE[0], pts(&self.control));
        control.markers = true;
        Plot {
            title: "Multiplicativity deviation on Ginibre states".into(),
            x_label: "sample".into(),
            y_label: "log10 deviation".into(),
            log_y: true,
            log_floor: LOG_FLOOR,
            series: vec![fixture, control],
        }
    }
}

/// Writes `violation.csv` and/or `violation.svg`.
pub fn write_violation(report: &ViolationReport, cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(&cfg.out_dir)?;
    let mut written = Vec::new();
    if cfg.format.csv() {
        let path = cfg.out_dir.join("violation.csv");
        report.to_table().write(&path)?;
        written.push(path);
    }
    if cfg.format.svg() {
        let path = cfg.out_dir.join("violation.svg");
        report.to_plot().write(&path)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Closed form for the fixture with `sigma = diag(0.3, 0.7)` and
    /// `rho = [[a, c], [c*, 1 - a]]`:
    /// `eps^2 = (0.328 a - 0.048)^2 + 0.168^2 (1 - a)^2 + 2 * 0.28^2 * 0.6 |c|^2`.
    fn oracle(rho: &DensityMatrix) -> f64 {
        let a = rho[(0, 0)].re;
        let c = rho[(0, 1)].norm_sqr();
        ((0.328 * a - 0.048).powi(2) + (0.168 * (1.0 - a)).powi(2) + 2.0 * 0.0784 * 0.6 * c).sqrt()
    }

    #[test]
    fn deviations_match_closed_form_and_control_vanishes() {
        let cfg = ExperimentConfig::default();
        let report = violation_experiment(&cfg).unwrap();
        assert_eq!(report.records.len(), 100);
        for r in &report.records {
            let rho = ginibre_state(2, &mut task_rng(cfg.seed, r.sample_index as u64));
            assert!((r.deviation - oracle(&rho)).abs() < 1e-12);
        }
        // the closed form is bounded below by its minimum at a = 0.3238, c = 0
        assert!(report.summary.min > 0.1276);
        assert_eq!(report.summary.above_1e3, 1.0);
        assert!(report.control_summary.max <= 1e-12);
        assert!(report.degenerate_summary.median > 1e-3);
    }

    #[test]
    fn summary_statistics() {
        let recs: Vec<ScatterRecord> = [3.0, 1.0, 2.0, 4.0]
            .iter()
            .enumerate()
            .map(|(i, &d)| ScatterRecord { sample_index: i, deviation: d })
            .collect();
        let s = Summary::of(&recs);
        assert_eq!((s.min, s.median, s.max), (1.0, 2.5, 4.0));
    }

    #[test]
    fn deterministic_output() {
        let cfg = ExperimentConfig { samples: 20, ..ExperimentConfig::default() };
        let a = violation_experiment(&cfg).unwrap().to_table().to_bytes().unwrap();
        let b = violation_experiment(&cfg).unwrap().to_table().to_bytes().unwrap();
        assert_eq!(a, b);
        let svg = violation_experiment(&cfg).unwrap().to_plot().render();
        assert_eq!(svg.matches("<polyline").count(), 2);
    }
}
