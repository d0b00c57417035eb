//! Replicated estimation runs on the congestion-window model, driven by a
//! flat `key = value` configuration file, with per-replicate and summary CSV
//! output. Replicates run in parallel but are seeded and collected by index,
//! so all output files are byte-for-byte reproducible.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::basis::{default_truncation, parse_basis};
use crate::error::{Error, Result};
use crate::estimators::estimate_all;
use crate::stats::quantile_type7;
use crate::tcp::{tcp_model, Scenario};
use crate::trajectory::fmt17;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    /// Grid size N; states are {0, 1/N, ..., (N-1)/N}.
    pub n_states: usize,
    /// Jumps per simulated trajectory.
    pub n_jumps: usize,
    pub replicates: usize,
    /// Basis name as understood by the basis parser (`spline5`,
    /// `fourier:<k>`, `legendre:<k>`).
    pub basis: String,
    /// Expansion cutoff; when absent a sample-size driven default is used.
    pub truncation: Option<usize>,
    pub seed: u64,
    /// Starting state; defaults to the first grid point.
    pub initial_state: Option<f64>,
    pub output_dir: PathBuf,
    /// Floor negative rate estimates at zero in the output files.
    pub clamp_negative: bool,
}

impl ExperimentConfig {
    /// Parses the `key = value` format. Lines starting with `#` and blank
    /// lines are skipped. `n`, `replicates`, and `output_dir` are required;
    /// everything else has a default. Unknown or repeated keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut scenario = None;
        let mut n_states = None;
        let mut n_jumps = None;
        let mut replicates = None;
        let mut basis = None;
        let mut truncation = None;
        let mut seed = None;
        let mut initial_state = None;
        let mut output_dir = None;
        let mut clamp_negative = None;

        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: line_no,
                msg: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            let dup = |k: &str| Error::Parse {
                line: line_no,
                msg: format!("key `{k}` given twice"),
            };
            let parse_err = |what: &str| Error::Parse {
                line: line_no,
                msg: format!("unreadable {what}: `{value}`"),
            };
            match key {
                "scenario" => {
                    if scenario.replace(Scenario::parse(value)?).is_some() {
                        return Err(dup(key));
                    }
                }
                "N" => {
                    let v = value.parse().map_err(|_| parse_err("grid size"))?;
                    if n_states.replace(v).is_some() {
                        return Err(dup(key));
                    }
                }
                "n" => {
                    let v = value.parse().map_err(|_| parse_err("jump count"))?;
                    if n_jumps.replace(v).is_some() {
                        return Err(dup(key));
                    }
                }
                "replicates" => {
                    let v = value.parse().map_err(|_| parse_err("replicate count"))?;
                    if replicates.replace(v).is_some() {
                        return Err(dup(key));
                    }
                }
                "basis" => {
                    if basis.replace(value.to_string()).is_some() {
                        return Err(dup(key));
                    }
                }
                "tau" => {
                    let v = value.parse().map_err(|_| parse_err("truncation"))?;
                    if truncation.replace(v).is_some() {
                        return Err(dup(key));
                    }
                }
                "seed" => {
                    let v = value.parse().map_err(|_| parse_err("seed"))?;
                    if seed.replace(v).is_some() {
                        return Err(dup(key));
                    }
                }
                "x0" => {
                    let v = value.parse().map_err(|_| parse_err("initial state"))?;
                    if initial_state.replace(v).is_some() {
                        return Err(dup(key));
                    }
                }
                "output_dir" => {
                    if output_dir.replace(PathBuf::from(value)).is_some() {
                        return Err(dup(key));
                    }
                }
                "clamp_negative" => {
                    let v = value.parse().map_err(|_| parse_err("flag"))?;
                    if clamp_negative.replace(v).is_some() {
                        return Err(dup(key));
                    }
                }
                other => {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("unknown key `{other}`"),
                    });
                }
            }
        }

        let missing = |k: &str| Error::Parse { line: 0, msg: format!("missing required key `{k}`") };
        let cfg = ExperimentConfig {
            scenario: scenario.unwrap_or(Scenario::Const { rate: 5.0 }),
            n_states: n_states.unwrap_or(10),
            n_jumps: n_jumps.ok_or_else(|| missing("n"))?,
            replicates: replicates.ok_or_else(|| missing("replicates"))?,
            basis: basis.unwrap_or_else(|| "spline5".into()),
            truncation,
            seed: seed.unwrap_or(42),
            initial_state,
            output_dir: output_dir.ok_or_else(|| missing("output_dir"))?,
            clamp_negative: clamp_negative.unwrap_or(false),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    fn validate(&self) -> Result<()> {
        if self.n_jumps == 0 {
            return Err(Error::InvalidArgument("need at least one jump per trajectory".into()));
        }
        if self.replicates == 0 {
            return Err(Error::InvalidArgument("need at least one replicate".into()));
        }
        Ok(())
    }
}

/// Five-number summary of the rate estimates at one grid state.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub x: f64,
    /// min, first quartile, median, third quartile, max; absent when no
    /// replicate produced an estimate at this state.
    pub quartiles: Option<[f64; 5]>,
    /// Number of replicates contributing an estimate.
    pub count: usize,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub truncation: usize,
    pub replicates: usize,
    pub summary: Vec<SummaryRow>,
    pub warning_count: usize,
}

/// Runs every replicate, writes `replicate_NNNN.csv` files, `summary.csv`,
/// and `warnings.log` under the configured output directory, and returns the
/// summary.
pub fn run_replicates(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let model = tcp_model(cfg.n_states, cfg.scenario)?;
    let basis = parse_basis(&cfg.basis)?;
    let tau = cfg.truncation.unwrap_or_else(|| default_truncation(&basis, cfg.n_jumps));
    if tau >= basis.len() {
        return Err(Error::InvalidArgument(format!(
            "truncation {tau} out of range for a basis of {} functions",
            basis.len()
        )));
    }
    let grid = model.grid();
    let x0 = match cfg.initial_state {
        Some(x) => {
            grid.require_index(x)?;
            x
        }
        None => grid.value(0),
    };
    let exit_times = model.exit_times();
    fs::create_dir_all(&cfg.output_dir).map_err(|e| Error::io(&cfg.output_dir, e))?;

    let points = grid.points().to_vec();
    let per_replicate: Vec<(Vec<Option<f64>>, Vec<String>)> = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| {
            let seed = cfg.seed ^ r as u64;
            let traj = model.simulate(x0, cfg.n_jumps, seed)?;
            let est = estimate_all(&traj, grid, &exit_times, &basis, tau)?;
            let estimates: Vec<Option<f64>> = est
                .jump_rate
                .iter()
                .map(|v| v.map(|rate| if cfg.clamp_negative { rate.max(0.0) } else { rate }))
                .collect();

            let path = cfg.output_dir.join(format!("replicate_{r:04}.csv"));
            write_estimate_file(&path, &points, &estimates, Some(cfg.scenario))?;

            let mut warnings = Vec::new();
            for (i, v) in est.jump_rate.iter().enumerate() {
                if v.is_none() {
                    warnings.push(format!("replicate {r:04}: state {} never visited", points[i]));
                }
            }
            for &(xi, yi) in &est.unobserved_pairs {
                warnings.push(format!(
                    "replicate {r:04}: transition {} -> {} never observed",
                    points[xi], points[yi]
                ));
            }
            Ok((estimates, warnings))
        })
        .collect::<Result<_>>()?;

    let summary: Vec<SummaryRow> = points
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let mut values: Vec<f64> =
                per_replicate.iter().filter_map(|(est, _)| est[i]).collect();
            values.sort_by(f64::total_cmp);
            let quartiles = if values.is_empty() {
                None
            } else {
                Some([
                    values[0],
                    quantile_type7(&values, 0.25),
                    quantile_type7(&values, 0.5),
                    quantile_type7(&values, 0.75),
                    *values.last().unwrap(),
                ])
            };
            SummaryRow { x, quartiles, count: values.len() }
        })
        .collect();

    let summary_path = cfg.output_dir.join("summary.csv");
    let mut w = BufWriter::new(fs::File::create(&summary_path).map_err(|e| Error::io(&summary_path, e))?);
    let werr = |e| Error::io(&summary_path, e);
    writeln!(w, "x,min,q1,median,q3,max").map_err(werr)?;
    for row in &summary {
        match row.quartiles {
            Some(q) => writeln!(
                w,
                "{},{},{},{},{},{}",
                fmt17(row.x),
                fmt17(q[0]),
                fmt17(q[1]),
                fmt17(q[2]),
                fmt17(q[3]),
                fmt17(q[4])
            )
            .map_err(werr)?,
            None => writeln!(w, "{},,,,,", fmt17(row.x)).map_err(werr)?,
        }
    }
    w.flush().map_err(werr)?;

    let log_path = cfg.output_dir.join("warnings.log");
    let mut log = BufWriter::new(fs::File::create(&log_path).map_err(|e| Error::io(&log_path, e))?);
    let mut warning_count = 0;
    for (_, warnings) in &per_replicate {
        for line in warnings {
            writeln!(log, "{line}").map_err(|e| Error::io(&log_path, e))?;
            warning_count += 1;
        }
    }
    log.flush().map_err(|e| Error::io(&log_path, e))?;

    Ok(ExperimentOutcome {
        truncation: tau,
        replicates: cfg.replicates,
        summary,
        warning_count,
    })
}

/// Writes an `x,lambda_hat,lambda_true` CSV. Missing estimates leave the
/// middle field empty; the truth column is filled from the scenario when one
/// is given and left empty otherwise.
pub fn write_estimate_file(
    path: &Path,
    points: &[f64],
    estimates: &[Option<f64>],
    scenario: Option<Scenario>,
) -> Result<()> {
    debug_assert_eq!(points.len(), estimates.len());
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let werr = |e| Error::io(path, e);
    writeln!(w, "x,lambda_hat,lambda_true").map_err(werr)?;
    for (&x, est) in points.iter().zip(estimates) {
        let hat = est.map(fmt17).unwrap_or_default();
        let truth = scenario.map(|sc| fmt17(sc.rate_at(x))).unwrap_or_default();
        writeln!(w, "{},{},{}", fmt17(x), hat, truth).map_err(werr)?;
    }
    w.flush().map_err(werr)
}
