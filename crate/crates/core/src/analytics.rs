//! Closed-form performance of threshold scheduling on the erasure link.
//!
//! Under the single threshold policy (transmit when the buffer is occupied
//! and the freshness gap is at least `delta`), the receiver AoI has an
//! explicit PMF with normalizer
//!
//! ```text
//! beta = delta + eps/(1-eps) + (1-eps)(1-lam)/((1-eps+lam*eps)*lam)
//!        + ((1-lam)*eps)^delta / (1-eps+lam*eps)
//! ```
//!
//! from which the long-term average AoI and the average transmission cost
//! `eta = 1/((1-eps)*beta)` follow. The same distribution also solves a
//! renewal recurrence over the two ways the AoI can land on a value `j`
//! (delivered packet of age `j`, or an undelivered stretch on top of an
//! earlier AoI); [`aoi_pmf_recurrence`] solves that system numerically and
//! is the evaluation route of record on the line `eps + lam = 1`, where the
//! closed form's `j > delta` branch degenerates to 0/0.

use crate::error::{Error, Result};
use crate::model::NetworkParams;

/// `|eps + lam - 1|` below this routes evaluation through the recurrence.
const SINGULAR_TOL: f64 = 1e-9;

/// Iteration cap for the recurrence fixed point (it stabilizes in two
/// passes; the cap bounds pathological inputs).
const FIXED_POINT_CAP: usize = 10_000;

const FIXED_POINT_TOL: f64 = 1e-13;

/// Truncated PMF of the receiver AoI under a single threshold policy.
///
/// `masses[k]` is `P(delta_r = k+1)`; `tail_mass` is the probability beyond
/// `jmax`, and `tail_decay` the dominant geometric rate of that tail,
/// `max(eps, 1-lam)`.
#[derive(Clone, Debug)]
pub struct AoiPmf {
    pub delta: u32,
    pub masses: Vec<f64>,
    pub tail_mass: f64,
    pub beta: f64,
    tail_decay: f64,
}

impl AoiPmf {
    pub fn jmax(&self) -> usize {
        self.masses.len()
    }

    /// `P(delta_r = j)`, 1-based; zero outside the truncated support.
    pub fn mass(&self, j: usize) -> f64 {
        if j >= 1 && j <= self.masses.len() {
            self.masses[j - 1]
        } else {
            0.0
        }
    }

    pub fn tail_decay(&self) -> f64 {
        self.tail_decay
    }

    /// Tail-corrected mean: the truncated sum plus a geometric-tail
    /// estimate `tail_mass * (jmax + 1/(1-tail_decay))`.
    pub fn mean(&self) -> f64 {
        let head: f64 = self
            .masses
            .iter()
            .enumerate()
            .map(|(k, p)| (k + 1) as f64 * p)
            .sum();
        head + self.tail_mass * (self.jmax() as f64 + 1.0 / (1.0 - self.tail_decay))
    }

    /// `P(delta_r >= j)` including the tail beyond the truncation.
    pub fn mass_at_or_above(&self, j: usize) -> f64 {
        let from = j.max(1);
        let head: f64 = self.masses.iter().skip(from - 1).sum();
        head + self.tail_mass
    }
}

/// Provenance of a point on the AoI/cost tradeoff plane.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointSource {
    ClosedForm,
    Simulated,
    Cmdp,
    LowerBound,
    RandomBenchmark,
    DoubleThreshold,
}

/// One (average AoI, average cost) pair with provenance.
#[derive(Clone, Debug)]
pub struct TradeoffPoint {
    pub avg_aoi: f64,
    pub avg_cost: f64,
    pub source: PointSource,
    pub label: String,
}

/// Pair of adjacent thresholds plus the probability of the aggressive one,
/// chosen so the expected cost meets a budget exactly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixedThreshold {
    pub delta_low: u32,
    /// `delta_low + 1` whenever randomization is active (`q` in `(0,1)`).
    pub delta_high: u32,
    /// Probability of using `delta_low`.
    pub q: f64,
}

/// Long-run probability that the buffer is empty at decision time when the
/// transmitter sends whenever the buffer is occupied:
/// `(1-eps)(1-lam) / (1-eps+eps*lam)`.
pub fn p_empty(params: &NetworkParams) -> f64 {
    let (lam, eps) = (params.lambda(), params.epsilon());
    (1.0 - eps) * (1.0 - lam) / (1.0 - eps + eps * lam)
}

/// `X = (eps*(1-lam))^delta`, in log space for large exponents so underflow
/// cannot contaminate `beta` in wide threshold sweeps.
fn x_term(lam: f64, eps: f64, delta: u32) -> f64 {
    let base = eps * (1.0 - lam);
    if delta <= 64 {
        base.powi(delta as i32)
    } else if base == 0.0 {
        0.0
    } else {
        (delta as f64 * base.ln()).exp()
    }
}

/// Normalizer of the AoI PMF; also `1 / ((1-eps) * eta(delta))`.
pub fn beta(params: &NetworkParams, delta: u32) -> f64 {
    let (lam, eps) = (params.lambda(), params.epsilon());
    let denom = 1.0 - eps + lam * eps;
    delta as f64
        + eps / (1.0 - eps)
        + (1.0 - eps) * (1.0 - lam) / (denom * lam)
        + x_term(lam, eps, delta) / denom
}

/// Default truncation depth: `delta` plus enough slots for the geometric
/// tail `max(eps, 1-lam)^k` to fall below ~1e-26.
pub fn default_jmax(params: &NetworkParams, delta: u32) -> usize {
    let r = params.epsilon().max(1.0 - params.lambda()).max(1e-3);
    delta as usize + (60.0 / -r.ln()).ceil() as usize
}

fn tail_decay_rate(params: &NetworkParams) -> f64 {
    params.epsilon().max(1.0 - params.lambda())
}

/// AoI PMF from the closed form. On the singular line `eps + lam = 1` the
/// masses are computed by [`aoi_pmf_recurrence`] instead, which evaluates
/// the same distribution without the degenerate denominator.
pub fn aoi_pmf(params: &NetworkParams, delta: u32, jmax: usize) -> Result<AoiPmf> {
    if jmax < delta as usize + 1 {
        return Err(Error::Domain(format!(
            "jmax ({jmax}) must be at least delta + 1 ({})",
            delta + 1
        )));
    }
    let (lam, eps) = (params.lambda(), params.epsilon());
    if (eps + lam - 1.0).abs() < SINGULAR_TOL {
        return aoi_pmf_recurrence(params, delta, jmax);
    }

    let b = beta(params, delta);
    let d = delta as usize;
    // pow_q[k] = (1-lam)^k, pow_e[k] = eps^k
    let (pow_q, pow_e) = power_tables(lam, eps, jmax + 1);
    let xs = eps + lam - 1.0;
    let mut masses = Vec::with_capacity(jmax);
    for j in 1..=jmax {
        let p = if j <= d {
            (1.0 - pow_q[j] * pow_e[j]) / b
        } else {
            let num = lam * pow_e[j - d + 1] - lam * pow_e[d] * pow_q[j]
                + (1.0 - eps) * pow_q[d] * pow_e[j]
                - (1.0 - eps) * pow_q[j - d + 1];
            num / (b * xs)
        };
        masses.push(p);
    }
    let tail_mass = (1.0 - masses.iter().sum::<f64>()).max(0.0);
    Ok(AoiPmf {
        delta,
        masses,
        tail_mass,
        beta: b,
        tail_decay: tail_decay_rate(params),
    })
}

fn power_tables(lam: f64, eps: f64, len: usize) -> (Vec<f64>, Vec<f64>) {
    let mut pow_q = Vec::with_capacity(len + 1);
    let mut pow_e = Vec::with_capacity(len + 1);
    let (mut q, mut e) = (1.0, 1.0);
    for _ in 0..=len {
        pow_q.push(q);
        pow_e.push(e);
        q *= 1.0 - lam;
        e *= eps;
    }
    (pow_q, pow_e)
}

/// AoI PMF from the renewal recurrence, solved by fixed-point iteration on
/// the activation probability `P(delta_r >= delta)`.
///
/// Each pass recomputes the masses forward from the current activation
/// probability and renormalizes; the map is affine in that scalar, so it
/// stabilizes in two passes. Agrees with [`aoi_pmf`] away from the line
/// `eps + lam = 1` and is the authoritative value on it.
pub fn aoi_pmf_recurrence(params: &NetworkParams, delta: u32, jmax: usize) -> Result<AoiPmf> {
    if jmax < delta as usize + 1 {
        return Err(Error::Domain(format!(
            "jmax ({jmax}) must be at least delta + 1 ({})",
            delta + 1
        )));
    }
    let (lam, eps) = (params.lambda(), params.epsilon());
    let d = delta as usize;
    // Solve on a support deep enough that the ignored tail is ~1e-26, then
    // truncate to the requested jmax.
    let jm = jmax.max(default_jmax(params, delta));
    let (pow_q, pow_e) = power_tables(lam, eps, jm + 1);

    let mut p = vec![0.0_f64; jm + 1]; // p[j] = P(delta_r = j), p[0] unused
    let mut p_delta = 1.0_f64;
    let mut converged = false;
    for _ in 0..FIXED_POINT_CAP {
        for j in 1..=jm {
            // Delivered: the latest packet arrived j slots ago, transmission
            // was activated on arrival, and at least one of the j attempts
            // got through.
            let c1 = p_delta * pow_q[j - 1] * lam * (1.0 - pow_e[j]);
            // Undelivered: AoI was j-m when the latest packet arrived m
            // slots ago, and either the gap was below threshold (no
            // activation) or all m attempts were erased.
            let mut c2 = 0.0;
            let lo = if j > d { j - d + 1 } else { 1 };
            for m in lo..j {
                c2 += p[j - m] * pow_q[m - 1] * lam;
            }
            if j > d {
                for m in 1..=(j - d) {
                    c2 += p[j - m] * pow_q[m - 1] * lam * pow_e[m];
                }
            }
            p[j] = c1 + c2;
        }
        let total: f64 = p[1..].iter().sum();
        if total <= 0.0 || !total.is_finite() {
            return Err(Error::Convergence {
                what: "AoI PMF fixed point",
                limit: FIXED_POINT_CAP,
            });
        }
        for v in &mut p[1..] {
            *v /= total;
        }
        let next = if d <= 1 {
            1.0
        } else {
            p[d..].iter().sum::<f64>()
        };
        if (next - p_delta).abs() < FIXED_POINT_TOL {
            converged = true;
            break;
        }
        p_delta = next;
    }
    if !converged {
        return Err(Error::Convergence {
            what: "AoI PMF fixed point",
            limit: FIXED_POINT_CAP,
        });
    }

    let masses: Vec<f64> = p[1..=jmax].to_vec();
    let tail_mass = (1.0 - masses.iter().sum::<f64>()).max(0.0);
    Ok(AoiPmf {
        delta,
        masses,
        tail_mass,
        beta: beta(params, delta),
        tail_decay: tail_decay_rate(params),
    })
}

/// Long-term average receiver AoI of the single threshold policy.
///
/// Evaluates the closed form away from `eps + lam = 1`; on that line the
/// value is the tail-corrected mean of the recurrence PMF.
pub fn avg_aoi_closed(params: &NetworkParams, delta: u32) -> f64 {
    let (lam, eps) = (params.lambda(), params.epsilon());
    let s = eps + lam - 1.0;
    if s.abs() < SINGULAR_TOL {
        let jmax = default_jmax(params, delta);
        return aoi_pmf_recurrence(params, delta, jmax)
            .expect("recurrence converges for valid params")
            .mean();
    }
    let b = beta(params, delta);
    let x = x_term(lam, eps, delta);
    let d = delta as f64;
    let denom = 1.0 - eps + lam * eps;
    let t1 = d * (d + 1.0) / 2.0 - ((1.0 - lam) * eps / (denom * denom)) * (1.0 - x)
        + lam * eps * eps / ((1.0 - eps) * (1.0 - eps) * s)
        - (1.0 - eps) * (1.0 - lam) * (1.0 - lam) / (s * lam * lam)
        + x / ((1.0 - eps) * lam);
    let t2 = d * ((lam * eps + (1.0 - eps) * (1.0 - lam)) / ((1.0 - eps) * lam) + x / denom);
    (t1 + t2) / b
}

/// Long-term average transmission cost `eta(delta) = 1/((1-eps)*beta)`.
pub fn avg_cost_closed(params: &NetworkParams, delta: u32) -> f64 {
    1.0 / ((1.0 - params.epsilon()) * beta(params, delta))
}

/// The unconstrained-optimum corner of the tradeoff curve: transmit
/// whenever the buffer is occupied (threshold zero).
pub fn plgfs_metrics(params: &NetworkParams) -> TradeoffPoint {
    let (lam, eps) = (params.lambda(), params.epsilon());
    TradeoffPoint {
        avg_aoi: 1.0 / lam + eps / (1.0 - eps),
        avg_cost: lam / (1.0 - (1.0 - lam) * eps),
        source: PointSource::ClosedForm,
        label: "plgfs".to_string(),
    }
}

/// Generate-at-will reference point (a fresh packet available every slot);
/// equals the threshold closed forms at `lam = 1`. Meaningful for
/// `delta >= 1`.
pub fn gaw_metrics(epsilon: f64, delta: u32) -> TradeoffPoint {
    let d = delta as f64;
    let w = d * (1.0 - epsilon) + epsilon;
    TradeoffPoint {
        avg_aoi: (w * w + epsilon) / (2.0 * (1.0 - epsilon) * w) + 0.5,
        avg_cost: 1.0 / w,
        source: PointSource::ClosedForm,
        label: format!("gaw delta={delta}"),
    }
}

/// AoI floor under a budget `eta_max`:
/// `1/2 * (1 / min(lam, eta_max*(1-eps)) + 1)`.
pub fn lower_bound(params: &NetworkParams, eta_max: f64) -> f64 {
    let cap = params.lambda().min(eta_max * (1.0 - params.epsilon()));
    0.5 * (1.0 / cap + 1.0)
}

/// Smallest threshold meeting the budget, paired with its predecessor and
/// the mixing probability solving
/// `q*eta(delta_low) + (1-q)*eta(delta_high) = eta_max`.
///
/// When even threshold 0 fits the budget, returns `(0, 0, q = 1)`: no
/// randomization is needed. Thresholds 0 and 1 define the same policy
/// (transmission already requires an occupied buffer), so the search never
/// lands on `delta_high = 1`.
pub fn select_threshold(params: &NetworkParams, eta_max: f64) -> MixedThreshold {
    assert!(
        eta_max > 0.0 && eta_max <= 1.0,
        "eta_max must be in (0, 1], got {eta_max}"
    );
    let mut delta_det = 0u32;
    while avg_cost_closed(params, delta_det) > eta_max {
        delta_det += 1;
        assert!(delta_det < 1_000_000, "threshold search runaway");
    }
    if delta_det == 0 {
        return MixedThreshold {
            delta_low: 0,
            delta_high: 0,
            q: 1.0,
        };
    }
    let delta_low = delta_det - 1;
    let eta_low = avg_cost_closed(params, delta_low);
    let eta_high = avg_cost_closed(params, delta_det);
    let q = ((eta_max - eta_high) / (eta_low - eta_high)).clamp(0.0, 1.0);
    MixedThreshold {
        delta_low,
        delta_high: delta_det,
        q,
    }
}

/// Random-transmission benchmark: transmit an occupied buffer with
/// probability `gamma`, equivalent to threshold-zero scheduling over an
/// effective erasure probability `1 - gamma*(1-eps)`. `gamma` is calibrated
/// so the cost equals `eta_max` exactly (clamped to 1 when the budget
/// exceeds the unconstrained cost).
pub fn random_benchmark(params: &NetworkParams, eta_max: f64) -> Result<(f64, TradeoffPoint)> {
    let (lam, eps) = (params.lambda(), params.epsilon());
    let unconstrained = plgfs_metrics(params);
    if eta_max >= unconstrained.avg_cost {
        return Ok((
            1.0,
            TradeoffPoint {
                label: "random gamma=1".to_string(),
                source: PointSource::RandomBenchmark,
                ..unconstrained
            },
        ));
    }
    let denom = lam - eta_max * (1.0 - lam) * (1.0 - eps);
    let gamma = eta_max * lam / denom;
    if !(gamma > 0.0 && gamma <= 1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "random-transmission calibration produced gamma = {gamma}"
        )));
    }
    let gamma = gamma.min(1.0);
    let eps_eff = 1.0 - gamma * (1.0 - eps);
    let avg_aoi = 1.0 / lam + eps_eff / (1.0 - eps_eff);
    let avg_cost = gamma * lam / (1.0 - (1.0 - lam) * eps_eff);
    Ok((
        gamma,
        TradeoffPoint {
            avg_aoi,
            avg_cost,
            source: PointSource::RandomBenchmark,
            label: format!("random gamma={gamma}"),
        },
    ))
}
