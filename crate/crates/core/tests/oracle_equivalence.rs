//! Cross-route agreement of the AoI distribution and its moments.
//!
//! Three independent evaluation routes must coincide: the closed-form PMF,
//! the renewal-recurrence fixed point, and the stationary distribution of
//! the truncated (delta_t, delta_r) chain under the same threshold policy.

use aoi_lab::analytics::{
    aoi_pmf, aoi_pmf_recurrence, avg_aoi_closed, avg_cost_closed, default_jmax, lower_bound,
};
use aoi_lab::cmdp::{build_mdp, stationary_distribution, threshold_policy};
use aoi_lab::NetworkParams;

const LAMBDAS: [f64; 4] = [0.2, 0.5, 0.8, 1.0];
const EPSILONS: [f64; 3] = [0.0, 0.2, 0.5];
const DELTAS: [u32; 5] = [0, 1, 2, 5, 10];

fn params(lam: f64, eps: f64) -> NetworkParams {
    NetworkParams::new(lam, eps, None).unwrap()
}

/// delta_t cap deep enough that P(delta_t beyond it) is ~1e-12.
fn dt_cap_for(lam: f64) -> u32 {
    if lam >= 1.0 {
        1
    } else {
        ((-12.0 * std::f64::consts::LN_10) / (1.0 - lam).ln()).ceil() as u32
    }
}

fn tv(pmf_masses: &[f64], pmf_tail: f64, other_masses: &[f64], other_tail: f64) -> f64 {
    assert_eq!(pmf_masses.len(), other_masses.len());
    let head: f64 = pmf_masses
        .iter()
        .zip(other_masses)
        .map(|(a, b)| (a - b).abs())
        .sum();
    0.5 * (head + (pmf_tail - other_tail).abs())
}

#[test]
fn closed_form_recurrence_and_chain_agree_on_grid() {
    let dr_cap = 400u32;
    for &lam in &LAMBDAS {
        for &eps in &EPSILONS {
            let p = params(lam, eps);
            let mdp = build_mdp(&p, dt_cap_for(lam), dr_cap).unwrap();
            for &delta in &DELTAS {
                let jmax = default_jmax(&p, delta).min(dr_cap as usize - 20);
                let closed = aoi_pmf(&p, delta, jmax).unwrap();
                let rec = aoi_pmf_recurrence(&p, delta, jmax).unwrap();
                let d_cr = tv(&closed.masses, closed.tail_mass, &rec.masses, rec.tail_mass);
                assert!(
                    d_cr < 1e-6,
                    "closed vs recurrence TV {d_cr:.2e} at lam={lam} eps={eps} delta={delta}"
                );

                let pi = stationary_distribution(&mdp, &threshold_policy(&mdp, delta)).unwrap();
                let mut marginal = vec![0.0; dr_cap as usize + 1];
                for (&(_, r), &mass) in mdp.states().iter().zip(&pi) {
                    marginal[r as usize] += mass;
                }
                let chain_masses: Vec<f64> = (1..=jmax).map(|j| marginal[j]).collect();
                let chain_tail: f64 = marginal[jmax + 1..].iter().sum();
                let d_cc = tv(&closed.masses, closed.tail_mass, &chain_masses, chain_tail);
                assert!(
                    d_cc < 1e-6,
                    "closed vs chain TV {d_cc:.2e} at lam={lam} eps={eps} delta={delta}"
                );
            }
        }
    }
}

#[test]
fn moments_are_consistent_across_routes() {
    for &lam in &LAMBDAS {
        for &eps in &EPSILONS {
            let p = params(lam, eps);
            for &delta in &DELTAS {
                let pmf = aoi_pmf(&p, delta, default_jmax(&p, delta)).unwrap();
                let mean_direct = avg_aoi_closed(&p, delta);
                assert!(
                    (pmf.mean() - mean_direct).abs() < 1e-8,
                    "mean mismatch at lam={lam} eps={eps} delta={delta}: {} vs {mean_direct}",
                    pmf.mean()
                );
                let total: f64 = pmf.masses.iter().sum::<f64>() + pmf.tail_mass;
                assert!((total - 1.0).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn bound_never_exceeds_achieved_aoi() {
    for &lam in &LAMBDAS {
        for &eps in &EPSILONS {
            let p = params(lam, eps);
            for &delta in &DELTAS {
                let eta = avg_cost_closed(&p, delta);
                let lb = lower_bound(&p, eta);
                let aoi = avg_aoi_closed(&p, delta);
                assert!(
                    lb <= aoi + 1e-10,
                    "bound {lb} above AoI {aoi} at lam={lam} eps={eps} delta={delta}"
                );
            }
        }
    }
}

#[test]
fn degeneracy_of_thresholds_zero_and_one() {
    for &lam in &LAMBDAS {
        for &eps in &EPSILONS {
            let p = params(lam, eps);
            assert!(
                (avg_aoi_closed(&p, 0) - avg_aoi_closed(&p, 1)).abs() < 1e-10,
                "AoI differs at lam={lam} eps={eps}"
            );
            assert!(
                (avg_cost_closed(&p, 0) - avg_cost_closed(&p, 1)).abs() < 1e-10,
                "cost differs at lam={lam} eps={eps}"
            );
        }
    }
}
