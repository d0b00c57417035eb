//! Command-line front end for the `pdmp` crate: simulate trajectories of the
//! congestion-window process, estimate the jump rate from a saved trajectory,
//! run multi-replicate experiments from a config file, test individual hazard
//! coefficients for nullity, and print ground-truth quantities for the built-in
//! scenarios.
//!
//! Every number is printed with 17 significant digits so outputs round-trip
//! exactly through their decimal representation.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use pdmp::oracle;
use pdmp::{
    chi2_decision, default_truncation, estimate_all, fmt17, parse_basis, tcp_model,
    test_statistic, write_estimate_file, ExperimentConfig, OracleConfig, Scenario, Trajectory,
};

#[derive(Parser)]
#[command(name = "pdmp", version, about = "PDMP simulation and jump-rate estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one trajectory and write it to <out>/trajectory.csv
    Simulate {
        /// Rate scenario: const5, linear20x, const:<v>, or linear:<a>
        #[arg(long, default_value = "const5")]
        scenario: String,
        /// Number of grid states
        #[arg(long = "N", default_value_t = 10)]
        n_states: usize,
        /// Number of jumps to simulate
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Initial state (must be a grid point; defaults to the lowest)
        #[arg(long)]
        x0: Option<f64>,
        /// Output directory (created if missing)
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate the jump rate from a trajectory; writes <out>/estimates.csv
    Estimate {
        /// Trajectory file produced by `simulate`
        #[arg(long)]
        traj: PathBuf,
        /// Scenario the trajectory was simulated under (fixes the grid
        /// geometry and fills the truth column)
        #[arg(long, default_value = "const5")]
        scenario: String,
        #[arg(long = "N", default_value_t = 10)]
        n_states: usize,
        /// Basis family: spline<m>, fourier:<k>, or legendre:<k>
        #[arg(long, default_value = "spline5")]
        basis: String,
        /// Truncation index (defaults to a sample-size-based rule)
        #[arg(long)]
        tau: Option<usize>,
        /// Clamp negative rate estimates to zero
        #[arg(long)]
        clamp_negative: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a multi-replicate experiment described by a key = value config file
    Experiment {
        #[arg(long)]
        config: PathBuf,
    },
    /// Chi-squared nullity test for hazard coefficients
    Test {
        #[arg(long)]
        traj: PathBuf,
        #[arg(long, default_value = "const5")]
        scenario: String,
        #[arg(long = "N", default_value_t = 10)]
        n_states: usize,
        #[arg(long, default_value = "spline5")]
        basis: String,
        #[arg(long)]
        tau: Option<usize>,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Restrict to one transition, written as "x,y" in state values
        #[arg(long)]
        pair: Option<String>,
        /// Restrict to one coefficient index
        #[arg(long)]
        p: Option<usize>,
    },
    /// Print ground-truth quantities computed by numerical integration
    Oracle {
        #[arg(long, default_value = "const5")]
        scenario: String,
        #[arg(long = "N", default_value_t = 10)]
        n_states: usize,
        /// Transition "x,y"; when omitted, prints a per-state rate table
        #[arg(long)]
        pair: Option<String>,
        #[arg(long, default_value = "spline5")]
        basis: String,
        /// How many coefficients to print for a pair (defaults to the full basis)
        #[arg(long)]
        tau: Option<usize>,
    },
}

fn parse_pair(text: &str) -> Result<(f64, f64)> {
    let (a, b) = text
        .split_once(',')
        .with_context(|| format!("pair must be written as x,y; got {text:?}"))?;
    let x: f64 = a.trim().parse().with_context(|| format!("bad pair component {a:?}"))?;
    let y: f64 = b.trim().parse().with_context(|| format!("bad pair component {b:?}"))?;
    Ok((x, y))
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate { scenario, n_states, n, seed, x0, out } => {
            let model = tcp_model(n_states, Scenario::parse(&scenario)?)?;
            let x0 = match x0 {
                Some(x) => {
                    model.grid().require_index(x)?;
                    x
                }
                None => model.grid().value(0),
            };
            let traj = model.simulate(x0, n, seed)?;
            std::fs::create_dir_all(&out)
                .with_context(|| format!("cannot create {}", out.display()))?;
            let path = out.join("trajectory.csv");
            traj.write_to_file(&path)?;
            println!("{}", path.display());
        }
        Command::Estimate { traj, scenario, n_states, basis, tau, clamp_negative, out } => {
            let scenario = Scenario::parse(&scenario)?;
            let model = tcp_model(n_states, scenario)?;
            let traj = Trajectory::read_from_file(&traj)?;
            let basis = parse_basis(&basis)?;
            let tau = tau.unwrap_or_else(|| default_truncation(&basis, traj.len()));
            let est = estimate_all(&traj, model.grid(), &model.exit_times(), &basis, tau)?;

            let points = model.grid().points();
            for (i, v) in est.jump_rate.iter().enumerate() {
                if v.is_none() {
                    eprintln!("warning: state {} never visited", points[i]);
                }
            }
            for &(xi, yi) in &est.unobserved_pairs {
                eprintln!("warning: transition {} -> {} never observed", points[xi], points[yi]);
            }

            let estimates: Vec<Option<f64>> = est
                .jump_rate
                .iter()
                .map(|v| v.map(|r| if clamp_negative { r.max(0.0) } else { r }))
                .collect();
            std::fs::create_dir_all(&out)
                .with_context(|| format!("cannot create {}", out.display()))?;
            let path = out.join("estimates.csv");
            write_estimate_file(&path, points, &estimates, Some(scenario))?;
            println!("{}", path.display());
        }
        Command::Experiment { config } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let outcome = pdmp::run_replicates(&cfg)?;
            println!("x,min,q1,median,q3,max,count");
            for row in &outcome.summary {
                match row.quartiles {
                    Some(q) => println!(
                        "{},{},{},{},{},{},{}",
                        fmt17(row.x),
                        fmt17(q[0]),
                        fmt17(q[1]),
                        fmt17(q[2]),
                        fmt17(q[3]),
                        fmt17(q[4]),
                        row.count
                    ),
                    None => println!("{},,,,,,0", fmt17(row.x)),
                }
            }
            if outcome.warning_count > 0 {
                eprintln!(
                    "{} warning(s); see {}",
                    outcome.warning_count,
                    cfg.output_dir.join("warnings.log").display()
                );
            }
        }
        Command::Test { traj, scenario, n_states, basis, tau, alpha, pair, p } => {
            let model = tcp_model(n_states, Scenario::parse(&scenario)?)?;
            let traj = Trajectory::read_from_file(&traj)?;
            let basis = parse_basis(&basis)?;
            let tau = tau.unwrap_or_else(|| default_truncation(&basis, traj.len()));
            let est = estimate_all(&traj, model.grid(), &model.exit_times(), &basis, tau)?;

            let points = model.grid().points();
            let pairs: Vec<(usize, usize)> = match pair.as_deref() {
                Some(text) => {
                    let (x, y) = parse_pair(text)?;
                    vec![(model.grid().require_index(x)?, model.grid().require_index(y)?)]
                }
                None => (0..points.len())
                    .flat_map(|x| (0..points.len()).map(move |y| (x, y)))
                    .collect(),
            };
            let indices: Vec<usize> = match p {
                Some(p) if p > tau => bail!("coefficient index {p} exceeds truncation {tau}"),
                Some(p) => vec![p],
                None => (0..=tau).collect(),
            };

            println!("x,y,p,statistic,quantile,reject");
            for &(xi, yi) in &pairs {
                for &p in &indices {
                    let Some(var) = est.variance(p, xi, yi) else {
                        if pair.is_some() {
                            bail!(
                                "transition {} -> {} never observed; nothing to test",
                                points[xi],
                                points[yi]
                            );
                        }
                        continue;
                    };
                    let stat =
                        test_statistic(est.coefficients[p][xi][yi], var, est.sample_size)?;
                    let outcome = chi2_decision(stat, alpha)?;
                    println!(
                        "{},{},{},{},{},{}",
                        fmt17(points[xi]),
                        fmt17(points[yi]),
                        p,
                        fmt17(outcome.statistic),
                        fmt17(outcome.quantile),
                        outcome.reject
                    );
                }
            }
        }
        Command::Oracle { scenario, n_states, pair, basis, tau } => {
            let model = tcp_model(n_states, Scenario::parse(&scenario)?)?;
            let cfg = OracleConfig::default();
            match pair {
                Some(text) => {
                    let (x, y) = parse_pair(&text)?;
                    model.grid().require_index(x)?;
                    model.grid().require_index(y)?;
                    let basis = parse_basis(&basis)?;
                    let tau = tau.unwrap_or(basis.len() - 1);
                    println!("quantity,value");
                    println!("exit_time,{}", fmt17(model.exit_time(x)));
                    let r = oracle::transition_probability(&model, x, y, &cfg)?;
                    println!("transition_probability,{}", fmt17(r));
                    let h0 = oracle::transition_hazard(&model, x, y, 0.0, &cfg)?;
                    println!("hazard_at_zero,{}", fmt17(h0));
                    for (p, theta) in oracle::basis_coefficients(&model, &basis, tau, x, y, &cfg)?
                        .iter()
                        .enumerate()
                    {
                        println!("theta_{p},{}", fmt17(*theta));
                    }
                }
                None => {
                    println!("x,rate,characterization_residual");
                    for &x in model.grid().points() {
                        let residual = oracle::characterization_residual(&model, x, &cfg)?;
                        println!("{},{},{}", fmt17(x), fmt17(model.rate(x)), fmt17(residual));
                    }
                }
            }
        }
    }
    Ok(())
}
