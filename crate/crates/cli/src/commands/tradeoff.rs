use std::collections::BTreeSet;
use std::path::PathBuf;

use anyhow::{bail, Context};
use rayon::prelude::*;

use aoi_lab::analytics::{lower_bound, random_benchmark, select_threshold};
use aoi_lab::cmdp::{build_mdp, calibrate_mixed_q, solve_constrained_on, TruncatedMdp};
use aoi_lab::policies::PolicySpec;
use aoi_lab::rng::substream_seed;
use aoi_lab::simulator::{self, SimConfig};
use aoi_lab::NetworkParams;

use crate::config::Settings;
use crate::csvfmt::{cell_empty, cell_f64, emit_csv, g9, Cell, CsvTable};
use crate::CommonArgs;

pub struct Flags {
    pub common: CommonArgs,
    pub eta_grid: Option<Vec<f64>>,
    pub policies: Option<Vec<String>>,
    pub sim_slots: Option<u64>,
    pub dt_cap: Option<u32>,
    pub dr_cap: Option<u32>,
    pub tol: Option<f64>,
    pub delta1_max: Option<u32>,
    pub delta2_max: Option<u32>,
    pub svg: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Family {
    Lb,
    Single,
    Random,
    Double,
    Cmdp,
}

fn parse_families(names: &[String]) -> anyhow::Result<BTreeSet<Family>> {
    let mut set = BTreeSet::new();
    for name in names {
        set.insert(match name.as_str() {
            "lb" => Family::Lb,
            "single" => Family::Single,
            "random" => Family::Random,
            "double" => Family::Double,
            "cmdp" => Family::Cmdp,
            other => bail!("unknown policy family '{other}' (expected lb,single,random,double,cmdp)"),
        });
    }
    Ok(set)
}

pub fn run(flags: Flags) -> anyhow::Result<()> {
    let settings = Settings::load(flags.common.config.as_deref())?;
    let (params, seed) = super::resolve_common(&flags.common, &settings, 1)?;
    let eta_grid = match flags.eta_grid {
        Some(g) => g,
        None => vec![0.15, 0.2, 0.25, 0.3, 0.4, 0.5],
    };
    if eta_grid.is_empty() {
        bail!("eta grid is empty");
    }
    for &eta in &eta_grid {
        if !(eta > 0.0 && eta <= 1.0) {
            bail!("eta grid value {eta} outside (0, 1]");
        }
    }
    let mut eta_grid = eta_grid;
    eta_grid.sort_by(|a, b| a.total_cmp(b));
    eta_grid.dedup();

    let families = match &flags.policies {
        Some(names) => parse_families(names)?,
        None => BTreeSet::from([
            Family::Lb,
            Family::Single,
            Family::Random,
            Family::Double,
            Family::Cmdp,
        ]),
    };
    let sim_slots = settings.resolve(flags.sim_slots, "sim-slots", 1_000_000)?;
    let dt_cap = settings.resolve(flags.dt_cap, "dt-cap", 60)?;
    let dr_cap = settings.resolve(flags.dr_cap, "dr-cap", 400)?;
    let tol = settings.resolve(flags.tol, "tol", 1e-6)?;
    let delta1_max = settings.resolve(flags.delta1_max, "delta1-max", 8)?;
    let delta2_max = settings.resolve(flags.delta2_max, "delta2-max", 15)?;

    let needs_chain = families.contains(&Family::Single) || families.contains(&Family::Cmdp);
    let mdp = if needs_chain {
        Some(build_mdp(&params, dt_cap, dr_cap)?)
    } else {
        None
    };

    // Double-threshold cells are budget-independent: simulate the whole
    // grid once with common random numbers, then filter by cost per budget.
    let double_cells = if families.contains(&Family::Double) {
        simulate_double_grid(&params, delta1_max, delta2_max, sim_slots, seed)
    } else {
        Vec::new()
    };

    let single_col: Vec<Option<f64>> = if families.contains(&Family::Single) {
        let mdp = mdp.as_ref().expect("chain built for single");
        eta_grid
            .iter()
            .enumerate()
            .map(|(i, &eta)| {
                simulate_mixed_single(&params, mdp, eta, sim_slots, substream_seed(seed, 1000 + i as u64))
                    .map_err(|e| eprintln!("warning: single-threshold cell eta={eta} failed: {e:#}"))
                    .ok()
            })
            .collect()
    } else {
        vec![None; eta_grid.len()]
    };

    let cmdp_col: Vec<Option<f64>> = if families.contains(&Family::Cmdp) {
        let mdp = mdp.as_ref().expect("chain built for cmdp");
        eta_grid
            .par_iter()
            .map(|&eta| match solve_constrained_on(mdp, eta, tol) {
                Ok(sol) => {
                    if sol.cap_mass > 1e-6 {
                        eprintln!(
                            "warning: cap mass {} at eta={eta}; consider larger --dt-cap/--dr-cap",
                            g9(sol.cap_mass)
                        );
                    }
                    Some(sol.avg_aoi)
                }
                Err(e) => {
                    eprintln!("warning: cmdp cell eta={eta} failed: {e:#}");
                    None
                }
            })
            .collect()
    } else {
        vec![None; eta_grid.len()]
    };

    let mut rows: Vec<Vec<Cell>> = Vec::with_capacity(eta_grid.len());
    for (i, &eta) in eta_grid.iter().enumerate() {
        let mut row = vec![cell_f64(eta)];
        row.push(if families.contains(&Family::Lb) {
            cell_f64(lower_bound(&params, eta))
        } else {
            cell_empty()
        });
        row.push(single_col[i].map(cell_f64).unwrap_or_default());
        row.push(if families.contains(&Family::Random) {
            match random_benchmark(&params, eta) {
                Ok((_, point)) => cell_f64(point.avg_aoi),
                Err(e) => {
                    eprintln!("warning: random-transmission cell eta={eta} failed: {e:#}");
                    cell_empty()
                }
            }
        } else {
            cell_empty()
        });
        row.push(if families.contains(&Family::Double) {
            match best_double_cell(&double_cells, eta) {
                Some(aoi) => cell_f64(aoi),
                None => {
                    eprintln!("warning: no feasible double-threshold cell at eta={eta}");
                    cell_empty()
                }
            }
        } else {
            cell_empty()
        });
        row.push(cmdp_col[i].map(cell_f64).unwrap_or_default());
        rows.push(row);
    }

    let header = [
        "eta_max",
        "lower_bound",
        "aoi_single_mixed",
        "aoi_random",
        "aoi_double_best",
        "aoi_cmdp",
    ];
    let comments = vec![
        format!(
            "params: lambda={} epsilon={} sim-slots={sim_slots} seed={seed}",
            g9(params.lambda()),
            g9(params.epsilon())
        ),
        format!(
            "solver: dt-cap={dt_cap} dr-cap={dr_cap} tol={} delta1-max={delta1_max} delta2-max={delta2_max}",
            g9(tol)
        ),
    ];
    emit_csv(
        flags.common.out.as_deref(),
        "tradeoff",
        &comments,
        &header,
        &rows,
    )?;

    if let Some(svg_path) = &flags.svg {
        let input = flags
            .common
            .out
            .as_deref()
            .context("--svg requires --out so the chart has a CSV to read")?;
        let table = CsvTable::read(input)?;
        let ys: Vec<String> = header[1..].iter().map(|s| s.to_string()).collect();
        super::plot::render_chart(&table, svg_path, "eta_max", &ys, "AoI vs transmission budget")?;
    }
    Ok(())
}

struct DoubleCell {
    avg_aoi: f64,
    avg_cost: f64,
}

fn simulate_double_grid(
    params: &NetworkParams,
    delta1_max: u32,
    delta2_max: u32,
    sim_slots: u64,
    seed: u64,
) -> Vec<DoubleCell> {
    let cells: Vec<(u32, u32)> = (0..=delta1_max)
        .flat_map(|d1| (0..=delta2_max).map(move |d2| (d1, d2)))
        .collect();
    cells
        .par_iter()
        .enumerate()
        .map(|(idx, &(delta1, delta2))| {
            let cfg = SimConfig::new(
                *params,
                PolicySpec::DoubleThreshold { delta1, delta2 },
                sim_slots,
                substream_seed(seed, idx as u64),
            );
            let stats = simulator::run(&cfg);
            DoubleCell {
                avg_aoi: stats.avg_aoi,
                avg_cost: stats.avg_cost,
            }
        })
        .collect()
}

fn best_double_cell(cells: &[DoubleCell], eta_max: f64) -> Option<f64> {
    cells
        .iter()
        .filter(|c| c.avg_cost <= eta_max)
        .map(|c| c.avg_aoi)
        .min_by(f64::total_cmp)
}

/// Simulated AoI of the budget-calibrated mixed single-threshold policy.
fn simulate_mixed_single(
    params: &NetworkParams,
    mdp: &TruncatedMdp,
    eta_max: f64,
    sim_slots: u64,
    seed: u64,
) -> anyhow::Result<f64> {
    let policy = mixed_policy_for_budget(params, mdp, eta_max)?;
    let cfg = SimConfig::new(*params, policy, sim_slots, seed);
    Ok(simulator::run(&cfg).avg_aoi)
}

/// The deployable single-threshold policy for a budget: the deterministic
/// threshold when it already fits, otherwise boundary randomization with
/// the coin calibrated on the truncated chain so the long-run cost meets
/// the budget (the analytic linear interpolation overshoots slightly).
pub fn mixed_policy_for_budget(
    params: &NetworkParams,
    mdp: &TruncatedMdp,
    eta_max: f64,
) -> anyhow::Result<PolicySpec> {
    let mixed = select_threshold(params, eta_max);
    if mixed.delta_high == 0 || mixed.q >= 1.0 {
        return Ok(PolicySpec::SingleThreshold {
            delta: mixed.delta_low,
        });
    }
    let calibrated = calibrate_mixed_q(mdp, mixed.delta_low, eta_max)?;
    Ok(PolicySpec::RandomizedSingleThreshold {
        delta: mixed.delta_low,
        q: calibrated.q,
    })
}
