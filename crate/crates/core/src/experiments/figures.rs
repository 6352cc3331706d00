//! Coherence fraction of the dephased input and of the processed state
//! across `(p, z)`.

use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;

use super::config::ExperimentConfig;
use super::output::{fmt_num, Plot, Series, Table, PALETTE};
use crate::catalysis::{cf_direct_formula, cf_processed_formula, run_qutrit_example};
use crate::error::Result;

/// Margin by which `processed` must beat `direct` to count as a crossing.
const CROSSING_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct CurvePoint {
    pub p: f64,
    pub z: f64,
    pub direct: f64,
    pub processed: f64,
    pub processed_formula: f64,
    pub catalyst_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FigureData {
    pub seed: u64,
    pub points: Vec<CurvePoint>,
}

impl FigureData {
    pub fn p_values(&self) -> Vec<f64> {
        let mut ps: Vec<f64> = Vec::new();
        for pt in &self.points {
            if !ps.contains(&pt.p) {
                ps.push(pt.p);
            }
        }
        ps
    }

    pub fn curve(&self, p: f64) -> Vec<&CurvePoint> {
        self.points.iter().filter(|pt| pt.p == p).collect()
    }

    /// Smallest grid `z` with `processed > direct`.
    pub fn grid_crossover(&self, p: f64) -> Option<f64> {
        self.curve(p)
            .into_iter()
            .find(|pt| pt.processed > pt.direct + CROSSING_MARGIN)
            .map(|pt| pt.z)
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&["p", "z", "direct", "processed", "processed_formula", "catalyst_error"]);
        t.comments.push(format!("seed={}", self.seed));
        for pt in &self.points {
            t.rows.push(vec![
                fmt_num(pt.p),
                fmt_num(pt.z),
                fmt_num(pt.direct),
                fmt_num(pt.processed),
                fmt_num(pt.processed_formula),
                fmt_num(pt.catalyst_error),
            ]);
        }
        for p in self.p_values() {
            let grid = self
                .grid_crossover(p)
                .map_or_else(|| "none".to_string(), fmt_num);
            let exact = analytic_crossover(p).map_or_else(|| "none".to_string(), fmt_num);
            t.footer.push(format!("crossover p={} grid_z={grid} analytic_z={exact}", fmt_num(p)));
        }
        t
    }

    pub fn to_plot(&self) -> Plot {
        let mut series = Vec::new();
        for (k, p) in self.p_values().into_iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            let curve = self.curve(p);
            series.push(Series::line(
                format!("processed p={p}"),
                color,
                curve.iter().map(|pt| (pt.z, pt.processed)).collect(),
            ));
            let mut direct = Series::line(
                format!("direct p={p}"),
                color,
                curve.iter().map(|pt| (pt.z, pt.direct)).collect(),
            );
            direct.dashed = true;
            series.push(direct);
        }
        Plot {
            title: "Coherence fraction after qutrit dephasing".into(),
            x_label: "z".into(),
            y_label: "C_F".into(),
            log_y: false,
            log_floor: 0.0,
            series,
        }
    }
}

/// Where `cf_processed` first exceeds `cf_direct`: both closed forms differ by
/// `(1-p)/3 * (z + sqrt(z(1-z)/3) - 1)`, positive exactly on `(3/4, 1)`.
pub fn analytic_crossover(p: f64) -> Option<f64> {
    (p < 1.0).then_some(0.75)
}

/// Evaluates every `(p, z)` grid point through the full protocol and the
/// coherence-fraction optimizer.
pub fn figure_curves(cfg: &ExperimentConfig) -> Result<FigureData> {
    cfg.validate()?;
    let zs = cfg.z_values();
    let tasks: Vec<(f64, f64)> = cfg
        .p_values
        .iter()
        .flat_map(|&p| zs.iter().map(move |&z| (p, z)))
        .collect();
    let points = tasks
        .par_iter()
        .map(|&(p, z)| -> Result<CurvePoint> {
            let ex = run_qutrit_example(z, p)?;
            debug_assert!((ex.cf_direct - cf_direct_formula(p)).abs() < 1e-6);
            Ok(CurvePoint {
                p,
                z,
                direct: ex.cf_direct,
                processed: ex.cf_processed,
                processed_formula: cf_processed_formula(z, p),
                catalyst_error: ex.trace.catalyst_restored_error,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FigureData {
        seed: cfg.seed,
        points,
    })
}

/// Writes `figures.csv` and/or `figures.svg` into the configured directory.
pub fn write_figures(data: &FigureData, cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(&cfg.out_dir)?;
    let mut written = Vec::new();
    if cfg.format.csv() {
        let path = cfg.out_dir.join("figures.csv");
        data.to_table().write(&path)?;
        written.push(path);
    }
    if cfg.format.svg() {
        let path = cfg.out_dir.join("figures.svg");
        data.to_plot().write(&path)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> ExperimentConfig {
        ExperimentConfig {
            p_values: vec![0.2, 1.0],
            z_grid: (0.75, 1.0, 6),
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn curves_match_closed_forms() {
        let data = figure_curves(&small_cfg()).unwrap();
        assert_eq!(data.points.len(), 12);
        for pt in &data.points {
            assert!((pt.processed - pt.processed_formula).abs() < 1e-6);
            assert!((pt.direct - cf_direct_formula(pt.p)).abs() < 1e-9);
        }
        for pt in data.curve(1.0) {
            assert!((pt.processed - 1.0 / 3.0).abs() < 1e-9);
            assert!((pt.direct - 1.0 / 3.0).abs() < 1e-9);
        }
        assert!((data.grid_crossover(0.2).unwrap() - 0.8).abs() < 1e-12);
        assert_eq!(data.grid_crossover(1.0), None);
    }

    #[test]
    fn worked_value_at_p02_z09() {
        let expected = 1.0 / 3.0 + 0.8 * 0.9 / 3.0 + 0.8 * 0.09f64.sqrt() / (3.0 * 3f64.sqrt());
        assert!((expected - 0.6195).abs() < 1e-4);
        let ex = run_qutrit_example(0.9, 0.2).unwrap();
        assert!((ex.cf_processed - expected).abs() < 1e-6);
    }

    #[test]
    fn table_and_plot_shapes() {
        let data = figure_curves(&small_cfg()).unwrap();
        let text = String::from_utf8(data.to_table().to_bytes().unwrap()).unwrap();
        assert!(text.starts_with("# seed="));
        assert!(text.contains("# crossover p=2.00000000000e-1 grid_z=8.00000000000e-1 analytic_z=7.50000000000e-1"));
        assert!(text.contains("grid_z=none analytic_z=none"));
        assert_eq!(data.to_plot().render().matches("<polyline").count(), 4);
    }
}
