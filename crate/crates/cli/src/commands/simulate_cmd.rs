use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use aoi_lab::policies::PolicySpec;
use aoi_lab::simulator::{self, run_with_trace, SimConfig};

use crate::config::Settings;
use crate::csvfmt::{cell_f64, cell_u64, emit_csv, g9, Cell};
use crate::CommonArgs;

pub fn run(
    common: CommonArgs,
    policy: Option<String>,
    sim_slots: Option<u64>,
    pmf_cap: Option<usize>,
    trace_path: Option<PathBuf>,
) -> anyhow::Result<()> {
    let settings = Settings::load(common.config.as_deref())?;
    let (params, seed) = super::resolve_common(&common, &settings, 1)?;
    let policy_text = settings.resolve(policy, "policy", "plgfs".to_string())?;
    let policy: PolicySpec = policy_text.parse()?;
    let sim_slots = settings.resolve(sim_slots, "sim-slots", 100_000)?;

    let mut cfg = SimConfig::new(params, policy, sim_slots, seed);
    if let Some(cap) = settings.resolve_opt(pmf_cap, "pmf-cap")? {
        cfg.pmf_cap = cap;
    }
    cfg.record_trace = trace_path.is_some();

    let stats = if let Some(path) = &trace_path {
        let (stats, trace) = run_with_trace(&cfg);
        let mut w = BufWriter::new(File::create(path)?);
        for rec in &trace {
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{}\t{}",
                rec.slot,
                rec.delta_t,
                rec.delta_r,
                rec.action as u8,
                rec.success as u8,
                rec.occupied as u8
            )?;
        }
        w.flush()?;
        stats
    } else {
        simulator::run(&cfg)
    };

    println!(
        "policy {policy} slots {sim_slots} seed {seed} avg_aoi {} avg_cost {} throughput {} empty_buffer_freq {}",
        g9(stats.avg_aoi),
        g9(stats.avg_cost),
        g9(stats.throughput),
        g9(stats.empty_buffer_freq)
    );

    let comments = vec![format!(
        "params: lambda={} epsilon={} policy={policy} sim-slots={sim_slots} seed={seed} pmf-cap={}",
        g9(params.lambda()),
        g9(params.epsilon()),
        cfg.pmf_cap
    )];
    let mut rows: Vec<Vec<Cell>> = vec![
        vec!["avg_aoi".into(), cell_f64(stats.avg_aoi)],
        vec!["avg_cost".into(), cell_f64(stats.avg_cost)],
        vec!["throughput".into(), cell_f64(stats.throughput)],
        vec![
            "empty_buffer_freq".into(),
            cell_f64(stats.empty_buffer_freq),
        ],
        vec!["slots".into(), cell_u64(stats.slots)],
        vec!["seed".into(), cell_u64(stats.seed)],
    ];
    for j in 1..=cfg.pmf_cap {
        rows.push(vec![format!("pmf_{j}"), cell_f64(stats.frequency(j))]);
    }
    rows.push(vec![
        "pmf_overflow".into(),
        cell_f64(stats.overflow_frequency()),
    ]);
    emit_csv(
        common.out.as_deref(),
        "simulate",
        &comments,
        &["metric", "value"],
        &rows,
    )?;
    Ok(())
}
