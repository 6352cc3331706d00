//! `coherence-lab`: experiments, channel classification and coherence
//! measures from the command line.
//!
//! Exit codes: 0 on success, 2 when an input fails validation, 3 when a
//! solver does not converge, 1 for anything else (I/O, usage).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use coherence_core::catalysis::{cf_direct_formula, cf_processed_formula, run_qutrit_example, TraceSummary};
use coherence_core::channels::{classify, parse_channel_json, SchurChannel};
use coherence_core::experiments::output::{fmt_num, Table};
use coherence_core::experiments::{
    figure_curves, violation_experiment, write_figures, write_violation, ExperimentConfig,
};
use coherence_core::measures::{advantage_ratio, measure_report};
use coherence_core::phasedisc::{incoherent_baseline, optimal_success, sweep_games, GameFamily, PhaseGame};
use coherence_core::qmat::{parse_matrix, ComplexMatrix, DensityMatrix, C64};
use coherence_core::Error;

#[derive(Parser)]
#[command(name = "coherence-lab", version, about = "Numerical laboratory for quantum coherence")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Coherence fraction of the dephased input and processed state over (p, z).
    Figures {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides `out_dir` from the config.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Multiplicativity deviations of the non-Schur SIO on Ginibre qubit states.
    Violation {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Reports MIO/IO/SIO membership and any Schur-multiplier form of a channel file.
    Classify { channel: PathBuf },
    /// Runs the two-copy catalysis protocol on the qutrit example.
    CatalysisDemo {
        #[arg(long)]
        z: f64,
        #[arg(long)]
        p: f64,
        /// Number of copies; the worked example is defined for 2 only.
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Writes the full protocol trace as JSON.
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
    /// Optimal success of a phase-discrimination game, or a sweep over games.
    PhaseDisc {
        /// State file; defaults to |+><+|.
        #[arg(long)]
        state: Option<PathBuf>,
        /// Comma-separated phases in radians.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        phases: Vec<f64>,
        /// Comma-separated priors; uniform when omitted.
        #[arg(long, value_delimiter = ',')]
        priors: Vec<f64>,
        /// Sweep arithmetic-progression games instead of solving one game.
        #[arg(long)]
        sweep: bool,
        /// CSV destination for the sweep; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// l1-norm, robustness and coherence fraction of a state file.
    Measures {
        state: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_state(path: &Path) -> Result<DensityMatrix> {
    let text = read(path)?;
    let m = parse_matrix(&text).with_context(|| format!("in {}", path.display()))?;
    Ok(DensityMatrix::new(m).with_context(|| format!("{} is not a density matrix", path.display()))?)
}

fn load_config(path: Option<&Path>, out_dir: Option<PathBuf>) -> Result<ExperimentConfig> {
    let mut cfg = match path {
        Some(p) => ExperimentConfig::from_json(&read(p)?).with_context(|| format!("in {}", p.display()))?,
        None => ExperimentConfig::default(),
    };
    if let Some(dir) = out_dir {
        cfg.out_dir = dir;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn yes_no(b: bool) -> &'static str {
    if b { "yes" } else { "no" }
}

fn fmt_c(z: C64) -> String {
    if z.im.abs() < 5e-7 {
        format!("{:.6}", z.re)
    } else {
        format!("{:.6}{:+.6}i", z.re, z.im)
    }
}

fn fmt_matrix(m: &ComplexMatrix) -> String {
    let rows: Vec<String> = (0..m.dim())
        .map(|i| {
            let cells: Vec<String> = (0..m.dim()).map(|j| fmt_c(m[(i, j)])).collect();
            format!("[{}]", cells.join(", "))
        })
        .collect();
    format!("[{}]", rows.join(", "))
}

fn describe_schur(s: &SchurChannel) -> String {
    let d = s.dim();
    let identity_perm = s.perm().iter().enumerate().all(|(i, &p)| i == p);
    let coeff = if s.coeff().max_abs_diff(&ComplexMatrix::identity(d)) < 1e-9 {
        "I".to_string()
    } else {
        fmt_matrix(s.coeff())
    };
    if identity_perm {
        format!("coeff = {coeff}")
    } else {
        format!("coeff = {coeff}, perm = {:?}", s.perm())
    }
}

fn cmd_classify(path: &Path) -> Result<()> {
    let text = read(path)?;
    let ch = parse_channel_json(&text).with_context(|| format!("in {}", path.display()))?;
    let class = classify(&ch);
    println!("channel: {} (dim {}, {} Kraus operators)", path.display(), ch.dim(), ch.kraus().len());
    println!("MIO on basis: {}", yes_no(class.is_mio_on_basis));
    println!("IO: {}", yes_no(class.is_io));
    if class.is_sio {
        let form = class.schur_form.as_ref().map_or_else(|| "none".to_string(), describe_schur);
        println!("SIO: yes, Schur form: {form}");
    } else {
        println!("SIO: no");
    }
    Ok(())
}

fn cmd_figures(cfg: ExperimentConfig) -> Result<()> {
    let data = figure_curves(&cfg)?;
    for path in write_figures(&data, &cfg)? {
        println!("wrote {}", path.display());
    }
    for p in data.p_values() {
        match data.grid_crossover(p) {
            Some(z) => println!("p = {p}: processed exceeds direct from z = {z:.6}"),
            None => println!("p = {p}: no crossing on the grid"),
        }
    }
    Ok(())
}

fn cmd_violation(cfg: ExperimentConfig) -> Result<()> {
    let report = violation_experiment(&cfg)?;
    for path in write_violation(&report, &cfg)? {
        println!("wrote {}", path.display());
    }
    for (name, s) in [
        ("fixture", &report.summary),
        ("control", &report.control_summary),
        ("degenerate", &report.degenerate_summary),
    ] {
        println!(
            "{name:<10} min {:.4e}  median {:.4e}  max {:.4e}  above 1e-3 {:.0}%",
            s.min,
            s.median,
            s.max,
            100.0 * s.above_1e3
        );
    }
    Ok(())
}

fn cmd_catalysis(z: f64, p: f64, n: usize, json_out: Option<&Path>) -> Result<()> {
    if n != 2 {
        anyhow::bail!(Error::OutOfRange(format!("--n {n}: the qutrit example uses two copies")));
    }
    let ex = run_qutrit_example(z, p)?;
    println!("z = {z}, p = {p}");
    println!("C_F direct:    {:.9}  (closed form {:.9})", ex.cf_direct, cf_direct_formula(p));
    println!("C_F processed: {:.9}  (closed form {:.9})", ex.cf_processed, cf_processed_formula(z, p));
    println!("catalyst restoration error: {:.3e}", ex.trace.catalyst_restored_error);
    println!("rho' = {}", fmt_matrix(ex.trace.processed.matrix()));
    if let Some(path) = json_out {
        let doc = serde_json::json!({
            "z": z,
            "p": p,
            "cf_direct": ex.cf_direct,
            "cf_processed": ex.cf_processed,
            "cf_direct_formula": cf_direct_formula(p),
            "cf_processed_formula": cf_processed_formula(z, p),
            "trace": TraceSummary::from(&ex.trace),
        });
        std::fs::write(path, serde_json::to_string_pretty(&doc)?)
            .with_context(|| format!("writing {}", path.display()))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_phase_disc(
    state: Option<&Path>,
    phases: &[f64],
    priors: &[f64],
    sweep: bool,
    out: Option<&Path>,
) -> Result<()> {
    let rho = match state {
        Some(p) => load_state(p)?,
        None => DensityMatrix::maximally_coherent(2),
    };
    let d = rho.dim();
    if sweep {
        let res = sweep_games(&rho, &GameFamily::default())?;
        let mut t = Table::new(&["m", "spacing", "ratio"]);
        for pt in &res.points {
            t.rows.push(vec![pt.m.to_string(), fmt_num(pt.spacing), fmt_num(pt.ratio)]);
        }
        t.footer.push(format!("best_ratio={} bound={}", fmt_num(res.best_ratio), fmt_num(res.bound)));
        match out {
            Some(path) => {
                t.write(path)?;
                println!("wrote {}", path.display());
                println!("best ratio {:.9}, bound 1 + C_R = {:.9}", res.best_ratio, res.bound);
            }
            None => print!("{}", String::from_utf8(t.to_bytes()?)?),
        }
        return Ok(());
    }
    if phases.is_empty() {
        anyhow::bail!(Error::Parse("--phases is required unless --sweep is given".into()));
    }
    let game = if priors.is_empty() {
        PhaseGame::uniform(phases, d)?
    } else {
        if priors.len() != phases.len() {
            anyhow::bail!(Error::Parse(format!(
                "{} priors given for {} phases",
                priors.len(),
                phases.len()
            )));
        }
        PhaseGame::new(priors.iter().copied().zip(phases.iter().copied()).collect(), d)?
    };
    let (value, povm) = optimal_success(&game, &rho)?;
    let baseline = incoherent_baseline(&game);
    println!("hypotheses: {}", game.len());
    println!("optimal success: {value:.9}");
    println!("incoherent baseline: {baseline:.9}");
    println!("advantage ratio: {:.9}", value / baseline);
    println!("bound 1 + C_R: {:.9}", advantage_ratio(&rho)?);
    for (k, e) in povm.elements().iter().enumerate() {
        println!("M_{k} = {}", fmt_matrix(e));
    }
    Ok(())
}

fn cmd_measures(path: &Path, json: bool) -> Result<()> {
    let rho = load_state(path)?;
    let report = measure_report(&rho)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        println!("dimension: {}", rho.dim());
        println!("l1 coherence: {:.9}", report.l1);
        println!("robustness: {:.9}", report.robustness);
        println!(
            "coherence fraction: {:.9}{}",
            report.fraction,
            if report.certified { " (closed form)" } else { "" }
        );
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Figures { config, out_dir } => cmd_figures(load_config(config.as_deref(), out_dir)?),
        Command::Violation { config, out_dir } => cmd_violation(load_config(config.as_deref(), out_dir)?),
        Command::Classify { channel } => cmd_classify(&channel),
        Command::CatalysisDemo { z, p, n, json_out } => cmd_catalysis(z, p, n, json_out.as_deref()),
        Command::PhaseDisc { state, phases, priors, sweep, out } => {
            cmd_phase_disc(state.as_deref(), &phases, &priors, sweep, out.as_deref())
        }
        Command::Measures { state, json } => cmd_measures(&state, json),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<Error>()) {
        Some(Error::NotConverged { .. }) => 3,
        Some(Error::Io(_)) | None => 1,
        Some(_) => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
