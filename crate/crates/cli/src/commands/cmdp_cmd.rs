use aoi_lab::cmdp::{build_mdp, solve_constrained_on};

use crate::config::Settings;
use crate::csvfmt::{cell_u64, emit_csv, g9, Cell};
use crate::CommonArgs;

pub fn run(
    common: CommonArgs,
    eta_max: Option<f64>,
    dt_cap: Option<u32>,
    dr_cap: Option<u32>,
    tol: Option<f64>,
) -> anyhow::Result<()> {
    let settings = Settings::load(common.config.as_deref())?;
    let (params, _seed) = super::resolve_common(&common, &settings, 1)?;
    let eta_max = settings.resolve(eta_max, "eta-max", 0.25)?;
    let dt_cap = settings.resolve(dt_cap, "dt-cap", 60)?;
    let dr_cap = settings.resolve(dr_cap, "dr-cap", 400)?;
    let tol = settings.resolve(tol, "tol", 1e-6)?;

    let mdp = build_mdp(&params, dt_cap, dr_cap)?;
    let sol = solve_constrained_on(&mdp, eta_max, tol)?;
    if sol.cap_mass > 1e-6 {
        eprintln!(
            "warning: stationary mass {} near the caps exceeds 1e-6; enlarge --dt-cap/--dr-cap",
            g9(sol.cap_mass)
        );
    }

    // policy table: the budget-feasible bracket policy
    let comments = vec![
        format!(
            "params: lambda={} epsilon={} eta-max={} dt-cap={dt_cap} dr-cap={dr_cap}",
            g9(params.lambda()),
            g9(params.epsilon()),
            g9(eta_max)
        ),
        format!(
            "solution: mu={} mix-weight={} avg-aoi={} avg-cost={} iterations={} cap-mass={}",
            g9(sol.multiplier),
            g9(sol.mix_weight),
            g9(sol.avg_aoi),
            g9(sol.avg_cost),
            sol.iterations,
            g9(sol.cap_mass)
        ),
    ];
    let rows: Vec<Vec<Cell>> = mdp
        .states()
        .iter()
        .zip(&sol.policy_high)
        .map(|(&(t, r), &a)| {
            vec![
                cell_u64(t as u64),
                cell_u64(r as u64),
                cell_u64(a as u64),
            ]
        })
        .collect();
    emit_csv(
        common.out.as_deref(),
        "cmdp-policy",
        &comments,
        &["delta_t", "delta_r", "action"],
        &rows,
    )?;

    println!(
        "mu {} avg_aoi {} avg_cost {} iterations {} cap_mass {}",
        g9(sol.multiplier),
        g9(sol.avg_aoi),
        g9(sol.avg_cost),
        sol.iterations,
        g9(sol.cap_mass)
    );
    Ok(())
}
