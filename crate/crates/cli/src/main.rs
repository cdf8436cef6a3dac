//! `aoi-lab` — AoI/transmission-cost experiments on a slotted erasure link.

mod commands;
mod config;
mod csvfmt;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "aoi-lab",
    version,
    about = "Age-of-information vs transmission-cost laboratory: closed forms, Monte Carlo simulation, CMDP baseline, CSV/SVG output"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by the experiment subcommands. Values omitted on the
/// command line fall back to the `--config` file (same key names), then to
/// the built-in defaults.
#[derive(Args, Debug)]
struct CommonArgs {
    /// Bernoulli packet arrival rate per slot, in (0, 1]
    #[arg(long)]
    lambda: Option<f64>,
    /// Erasure probability per transmission, in [0, 1)
    #[arg(long)]
    epsilon: Option<f64>,
    /// Base seed for the pinned splitmix64 generator
    #[arg(long)]
    seed: Option<u64>,
    /// Plain-text `key = value` configuration file; flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Analytical AoI distribution under a single threshold policy,
    /// optionally cross-checked against a simulated histogram
    Pmf {
        #[command(flatten)]
        common: CommonArgs,
        /// Threshold of the single threshold policy
        #[arg(long)]
        delta: Option<u32>,
        /// Largest age with its own row
        #[arg(long)]
        jmax: Option<usize>,
        /// When set, also simulate this many slots and emit the empirical
        /// column plus the total variation distance
        #[arg(long = "sim-slots")]
        sim_slots: Option<u64>,
    },
    /// Closed-form and simulated AoI/cost across a threshold range
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long = "delta-min")]
        delta_min: Option<u32>,
        #[arg(long = "delta-max")]
        delta_max: Option<u32>,
        /// Simulated slots per threshold
        #[arg(long = "sim-slots")]
        sim_slots: Option<u64>,
    },
    /// AoI achieved by each policy family across a cost-budget grid
    Tradeoff {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated budgets in (0, 1]
        #[arg(long = "eta-grid", value_delimiter = ',')]
        eta_grid: Option<Vec<f64>>,
        /// Comma-separated subset of lb,single,random,double,cmdp
        #[arg(long, value_delimiter = ',')]
        policies: Option<Vec<String>>,
        #[arg(long = "sim-slots")]
        sim_slots: Option<u64>,
        #[arg(long = "dt-cap")]
        dt_cap: Option<u32>,
        #[arg(long = "dr-cap")]
        dr_cap: Option<u32>,
        /// Cost-bracket tolerance of the constrained solver
        #[arg(long)]
        tol: Option<f64>,
        /// Bound of the exhaustive double-threshold search over delta1
        #[arg(long = "delta1-max")]
        delta1_max: Option<u32>,
        /// Bound of the exhaustive double-threshold search over delta2
        #[arg(long = "delta2-max")]
        delta2_max: Option<u32>,
        /// Also render the tradeoff chart to this SVG path
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Solve the budget-constrained MDP and export the policy table
    Cmdp {
        #[command(flatten)]
        common: CommonArgs,
        /// Long-term average transmission budget in (0, 1]
        #[arg(long = "eta-max")]
        eta_max: Option<f64>,
        #[arg(long = "dt-cap")]
        dt_cap: Option<u32>,
        #[arg(long = "dr-cap")]
        dr_cap: Option<u32>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Run one policy and report its statistics
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Policy spec: plgfs | single:D | mixed:D:Q | double:D1:D2 |
        /// random:G
        #[arg(long)]
        policy: Option<String>,
        #[arg(long = "sim-slots")]
        sim_slots: Option<u64>,
        /// Largest age bucket tracked individually
        #[arg(long = "pmf-cap")]
        pmf_cap: Option<usize>,
        /// Write the per-slot trace (tab-separated) to this path
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Render a CSV produced by the other subcommands as a static SVG chart
    Plot {
        /// Input CSV path
        #[arg(long)]
        input: PathBuf,
        /// Output SVG path
        #[arg(long)]
        output: PathBuf,
        /// Column for the x axis
        #[arg(long)]
        x: String,
        /// Comma-separated columns for the y axis
        #[arg(long, value_delimiter = ',')]
        y: Vec<String>,
        /// Chart title
        #[arg(long, default_value = "")]
        title: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Pmf {
            common,
            delta,
            jmax,
            sim_slots,
        } => commands::pmf::run(common, delta, jmax, sim_slots),
        Command::Sweep {
            common,
            delta_min,
            delta_max,
            sim_slots,
        } => commands::sweep::run(common, delta_min, delta_max, sim_slots),
        Command::Tradeoff {
            common,
            eta_grid,
            policies,
            sim_slots,
            dt_cap,
            dr_cap,
            tol,
            delta1_max,
            delta2_max,
            svg,
        } => commands::tradeoff::run(commands::tradeoff::Flags {
            common,
            eta_grid,
            policies,
            sim_slots,
            dt_cap,
            dr_cap,
            tol,
            delta1_max,
            delta2_max,
            svg,
        }),
        Command::Cmdp {
            common,
            eta_max,
            dt_cap,
            dr_cap,
            tol,
        } => commands::cmdp_cmd::run(common, eta_max, dt_cap, dr_cap, tol),
        Command::Simulate {
            common,
            policy,
            sim_slots,
            pmf_cap,
            trace,
        } => commands::simulate_cmd::run(common, policy, sim_slots, pmf_cap, trace),
        Command::Plot {
            input,
            output,
            x,
            y,
            title,
        } => commands::plot::run(&input, &output, &x, &y, &title),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

/// 2 for usage/input problems, 3 for numerical non-convergence.
fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<aoi_lab::Error>() {
        Some(aoi_lab::Error::Convergence { .. }) => 3,
        _ => 2,
    }
}
