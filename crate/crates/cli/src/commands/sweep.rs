use anyhow::bail;
use rayon::prelude::*;

use aoi_lab::analytics::{avg_aoi_closed, avg_cost_closed};
use aoi_lab::policies::PolicySpec;
use aoi_lab::rng::substream_seed;
use aoi_lab::simulator::{self, SimConfig};

use crate::config::Settings;
use crate::csvfmt::{cell_f64, cell_u64, emit_csv, g9};
use crate::CommonArgs;

pub fn run(
    common: CommonArgs,
    delta_min: Option<u32>,
    delta_max: Option<u32>,
    sim_slots: Option<u64>,
) -> anyhow::Result<()> {
    let settings = Settings::load(common.config.as_deref())?;
    let (params, seed) = super::resolve_common(&common, &settings, 1)?;
    let delta_min = settings.resolve(delta_min, "delta-min", 0)?;
    let delta_max = settings.resolve(delta_max, "delta-max", 10)?;
    let sim_slots = settings.resolve(sim_slots, "sim-slots", 1_000_000)?;
    if delta_min > delta_max {
        bail!("empty threshold range: delta-min {delta_min} > delta-max {delta_max}");
    }

    let deltas: Vec<u32> = (delta_min..=delta_max).collect();
    let rows: Vec<_> = deltas
        .par_iter()
        .map(|&delta| {
            let aoi_closed = avg_aoi_closed(&params, delta);
            let cost_closed = avg_cost_closed(&params, delta);
            let cfg = SimConfig::new(
                params,
                PolicySpec::SingleThreshold { delta },
                sim_slots,
                substream_seed(seed, delta as u64),
            );
            let stats = simulator::run(&cfg);
            vec![
                cell_u64(delta as u64),
                cell_f64(aoi_closed),
                cell_f64(cost_closed),
                cell_f64(stats.avg_aoi),
                cell_f64(stats.avg_cost),
                cell_f64((stats.avg_aoi - aoi_closed).abs() / aoi_closed),
                cell_f64((stats.avg_cost - cost_closed).abs() / cost_closed),
            ]
        })
        .collect();

    let comments = vec![format!(
        "params: lambda={} epsilon={} delta-min={delta_min} delta-max={delta_max} sim-slots={sim_slots} seed={seed}",
        g9(params.lambda()),
        g9(params.epsilon())
    )];
    emit_csv(
        common.out.as_deref(),
        "sweep",
        &comments,
        &[
            "delta",
            "aoi_closed",
            "cost_closed",
            "aoi_sim",
            "cost_sim",
            "aoi_rel_err",
            "cost_rel_err",
        ],
        &rows,
    )?;
    Ok(())
}
