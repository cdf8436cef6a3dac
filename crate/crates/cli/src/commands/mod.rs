pub mod cmdp_cmd;
pub mod plot;
pub mod pmf;
pub mod simulate_cmd;
pub mod sweep;
pub mod tradeoff;

use crate::config::Settings;
use crate::CommonArgs;
use aoi_lab::NetworkParams;

/// Shared resolution of (lambda, epsilon, seed) against the config file.
pub fn resolve_common(
    common: &CommonArgs,
    settings: &Settings,
    default_seed: u64,
) -> anyhow::Result<(NetworkParams, u64)> {
    let lambda = settings.resolve(common.lambda, "lambda", 0.5)?;
    let epsilon = settings.resolve(common.epsilon, "epsilon", 0.2)?;
    let seed = settings.resolve(common.seed, "seed", default_seed)?;
    let params = NetworkParams::new(lambda, epsilon, None)?;
    Ok((params, seed))
}
