use aoi_lab::analytics::{aoi_pmf, default_jmax};
use aoi_lab::policies::PolicySpec;
use aoi_lab::simulator::{self, empirical_vs_analytical, SimConfig};

use crate::config::Settings;
use crate::csvfmt::{self, cell_f64, cell_u64, emit_csv, g9};
use crate::CommonArgs;

pub fn run(
    common: CommonArgs,
    delta: Option<u32>,
    jmax: Option<usize>,
    sim_slots: Option<u64>,
) -> anyhow::Result<()> {
    let settings = Settings::load(common.config.as_deref())?;
    let (params, seed) = super::resolve_common(&common, &settings, 1)?;
    let delta = settings.resolve(delta, "delta", 2)?;
    let jmax = settings.resolve(jmax, "jmax", default_jmax(&params, delta))?;
    let sim_slots = settings.resolve_opt(sim_slots, "sim-slots")?;

    let pmf = aoi_pmf(&params, delta, jmax)?;

    let mut comments = vec![format!(
        "params: lambda={} epsilon={} delta={delta} jmax={jmax} seed={seed}",
        g9(params.lambda()),
        g9(params.epsilon())
    )];
    let mut header = vec!["j", "p_analytical"];
    let mut rows: Vec<Vec<csvfmt::Cell>> = (1..=jmax)
        .map(|j| vec![cell_u64(j as u64), cell_f64(pmf.mass(j))])
        .collect();

    if let Some(slots) = sim_slots {
        let mut cfg = SimConfig::new(params, PolicySpec::SingleThreshold { delta }, slots, seed);
        cfg.pmf_cap = jmax;
        let stats = simulator::run(&cfg);
        let tv = empirical_vs_analytical(&stats, &pmf)?;
        comments.push(format!("sim-slots={slots} tv={}", g9(tv)));
        header.extend(["p_empirical", "abs_error"]);
        for (j, row) in rows.iter_mut().enumerate() {
            let emp = stats.frequency(j + 1);
            row.push(cell_f64(emp));
            row.push(cell_f64((emp - pmf.mass(j + 1)).abs()));
        }
        println!("tv {}", g9(tv));
    }

    emit_csv(common.out.as_deref(), "pmf", &comments, &header, &rows)?;
    Ok(())
}
