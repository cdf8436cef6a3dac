//! Constrained-MDP baseline on the truncated `(delta_t, delta_r)` space.
//!
//! States pair the post-arrival transmitter freshness with the previous
//! slot's receiver AoI; the buffer is occupied exactly when
//! `delta_r > delta_t`. Transitions are derived mechanically from the same
//! slot dynamics the simulator executes, with ages saturating at the caps.
//! The stage reward is the negative end-of-slot receiver AoI and each
//! transmission costs one unit.
//!
//! The constrained problem is solved the standard way: relative value
//! iteration on the Lagrangian reward `-delta_r - mu * a`, bisection on the
//! multiplier until the achieved costs of the two bracketing deterministic
//! policies straddle the budget, then cost-space interpolation between
//! them. Reported solutions carry a cap-mass diagnostic so truncation
//! adequacy is measurable rather than assumed.

use crate::error::{Error, Result};
use crate::model::{end_of_slot_receiver_age, next_slot_freshness, NetworkParams};

/// Hard limit on the truncated state count.
pub const STATE_LIMIT: usize = 4_000_000;

const RVIA_DEFAULT_TOL: f64 = 1e-9;
const RVIA_DEFAULT_MAX_ITER: usize = 200_000;
const STATIONARY_TOL: f64 = 1e-12;
const STATIONARY_MAX_ITER: usize = 2_000_000;

/// Truncated MDP: state enumeration, per-action sparse transitions, and
/// expected immediate rewards.
#[derive(Clone, Debug)]
pub struct TruncatedMdp {
    dt_cap: u32,
    dr_cap: u32,
    states: Vec<(u32, u32)>,
    occupied: Vec<bool>,
    // CSR per action
    offsets: [Vec<u32>; 2],
    targets: [Vec<u32>; 2],
    probs: [Vec<f64>; 2],
    reward: [Vec<f64>; 2],
}

impl TruncatedMdp {
    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    /// `(delta_t, delta_r)` per state index.
    pub fn states(&self) -> &[(u32, u32)] {
        &self.states
    }

    pub fn dt_cap(&self) -> u32 {
        self.dt_cap
    }

    pub fn dr_cap(&self) -> u32 {
        self.dr_cap
    }

    pub fn is_occupied(&self, s: usize) -> bool {
        self.occupied[s]
    }

    /// Sparse transition row for `(state, action)`.
    pub fn transitions(&self, action: usize, s: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (lo, hi) = (
            self.offsets[action][s] as usize,
            self.offsets[action][s + 1] as usize,
        );
        self.targets[action][lo..hi]
            .iter()
            .zip(&self.probs[action][lo..hi])
            .map(|(&t, &p)| (t as usize, p))
    }

    /// Expected immediate reward `E[-delta_r(i) | s, a]`.
    pub fn reward(&self, action: usize, s: usize) -> f64 {
        self.reward[action][s]
    }

    fn effective_action(&self, s: usize, transmit: bool) -> usize {
        usize::from(transmit && self.occupied[s])
    }
}

/// Builds the truncated chain for the given caps.
///
/// Requires `dr_cap >= dt_cap >= 1`; states with `delta_r < delta_t` are
/// unreachable and excluded.
pub fn build_mdp(params: &NetworkParams, dt_cap: u32, dr_cap: u32) -> Result<TruncatedMdp> {
    if dt_cap < 1 || dr_cap < dt_cap {
        return Err(Error::Domain(format!(
            "caps must satisfy dr_cap >= dt_cap >= 1, got dt_cap={dt_cap}, dr_cap={dr_cap}"
        )));
    }
    let mut states = Vec::new();
    for t in 0..=dt_cap {
        for r in t.max(1)..=dr_cap {
            states.push((t, r));
        }
    }
    let n = states.len();
    if n > STATE_LIMIT {
        return Err(Error::Capacity {
            states: n,
            limit: STATE_LIMIT,
        });
    }
    // dense (t, r) -> index lookup
    let stride = (dr_cap + 1) as usize;
    let mut index = vec![u32::MAX; (dt_cap as usize + 1) * stride];
    for (i, &(t, r)) in states.iter().enumerate() {
        index[t as usize * stride + r as usize] = i as u32;
    }
    let lookup = |t: u32, r: u32| -> u32 {
        let id = index[t as usize * stride + r as usize];
        debug_assert!(id != u32::MAX, "unreachable state ({t}, {r})");
        id
    };

    let (lam, eps) = (params.lambda(), params.epsilon());
    let occupied: Vec<bool> = states.iter().map(|&(t, r)| r > t).collect();

    let mut offsets = [vec![0u32; n + 1], vec![0u32; n + 1]];
    let mut targets = [Vec::new(), Vec::new()];
    let mut probs = [Vec::new(), Vec::new()];
    let mut reward = [vec![0.0; n], vec![0.0; n]];

    let sat_r = |age: u64| -> u32 { (age as u32).min(dr_cap) };
    let sat_t = |age: u64| -> u32 { (age as u32).min(dt_cap) };

    for action in 0..2usize {
        let mut row: Vec<(u32, f64)> = Vec::with_capacity(4);
        for (s, &(t, r)) in states.iter().enumerate() {
            row.clear();
            if action == 0 || occupied[s] {
                // outcome probabilities of (delivered, arrival-next-slot),
                // composed from the simulator's slot dynamics
                let deliver_prob = if action == 1 { 1.0 - eps } else { 0.0 };
                for (delivered, p_deliver) in [(true, deliver_prob), (false, 1.0 - deliver_prob)] {
                    if p_deliver == 0.0 {
                        continue;
                    }
                    let r_end = sat_r(end_of_slot_receiver_age(t as u64, r as u64, delivered));
                    for (arrival, p_arrive) in [(true, lam), (false, 1.0 - lam)] {
                        if p_arrive == 0.0 {
                            continue;
                        }
                        let t_next = sat_t(next_slot_freshness(t as u64, arrival));
                        let target = lookup(t_next, r_end);
                        let p = p_deliver * p_arrive;
                        match row.iter_mut().find(|(id, _)| *id == target) {
                            Some((_, acc)) => *acc += p,
                            None => row.push((target, p)),
                        }
                    }
                }
                let r_success = sat_r(t as u64 + 1) as f64;
                let r_fail = sat_r(r as u64 + 1) as f64;
                reward[action][s] = -(deliver_prob * r_success + (1.0 - deliver_prob) * r_fail);
            }
            for &(target, p) in &row {
                targets[action].push(target);
                probs[action].push(p);
            }
            offsets[action][s + 1] = targets[action].len() as u32;
        }
    }

    Ok(TruncatedMdp {
        dt_cap,
        dr_cap,
        states,
        occupied,
        offsets,
        targets,
        probs,
        reward,
    })
}

/// Deterministic single-threshold policy as an action table on `mdp`.
pub fn threshold_policy(mdp: &TruncatedMdp, delta: u32) -> Vec<bool> {
    mdp.states()
        .iter()
        .map(|&(t, r)| r > t && r - t >= delta)
        .collect()
}

/// Average-reward relative value iteration on the Lagrangian stage reward
/// `-delta_r - mu * a`.
///
/// Returns the optimizing deterministic policy and its average Lagrangian
/// reward (the gain). Iteration stops when the span of the value-function
/// increments falls below `tol`; exact ties prefer staying silent.
pub fn rvia(
    mdp: &TruncatedMdp,
    mu: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<bool>, f64)> {
    let mut h = vec![0.0; mdp.state_count()];
    let (policy, gain, _) = rvia_from(mdp, mu, tol, max_iter, &mut h)?;
    Ok((policy, gain))
}

/// RVIA with caller-owned value function for warm starting across
/// multiplier steps. Returns (policy, gain, sweeps).
fn rvia_from(
    mdp: &TruncatedMdp,
    mu: f64,
    tol: f64,
    max_iter: usize,
    h: &mut Vec<f64>,
) -> Result<(Vec<bool>, f64, usize)> {
    let n = mdp.state_count();
    assert!(mu >= 0.0, "multiplier must be nonnegative");
    if h.len() != n {
        *h = vec![0.0; n];
    }
    let mut next = vec![0.0; n];
    for sweep in 1..=max_iter {
        let mut d_min = f64::INFINITY;
        let mut d_max = f64::NEG_INFINITY;
        for s in 0..n {
            let v = bellman_value(mdp, mu, h, s).0;
            // half-step keeps the iteration aperiodic without changing the
            // optimizing policy; the per-sweep increment tends to gain/2
            let damped = 0.5 * h[s] + 0.5 * v;
            let d = damped - h[s];
            d_min = d_min.min(d);
            d_max = d_max.max(d);
            next[s] = damped;
        }
        let reference = next[0];
        for s in 0..n {
            h[s] = next[s] - reference;
        }
        if d_max - d_min < tol {
            let gain = d_max + d_min;
            let policy = (0..n).map(|s| bellman_value(mdp, mu, h, s).1).collect();
            return Ok((policy, gain, sweep));
        }
    }
    Err(Error::Convergence {
        what: "relative value iteration",
        limit: max_iter,
    })
}

#[inline]
fn bellman_value(mdp: &TruncatedMdp, mu: f64, h: &[f64], s: usize) -> (f64, bool) {
    let mut q0 = mdp.reward(0, s);
    for (t, p) in mdp.transitions(0, s) {
        q0 += p * h[t];
    }
    if !mdp.is_occupied(s) {
        return (q0, false);
    }
    let mut q1 = mdp.reward(1, s) - mu;
    for (t, p) in mdp.transitions(1, s) {
        q1 += p * h[t];
    }
    if q1 > q0 {
        (q1, true)
    } else {
        (q0, false)
    }
}

struct Evaluation {
    avg_aoi: f64,
    avg_cost: f64,
    pi: Vec<f64>,
}

/// Exact long-run metrics of a deterministic action table via the
/// stationary distribution.
///
/// Transmit entries on empty-buffer states are treated as silent. Errors
/// when the induced chain is not unichain or the power iteration fails to
/// reach the residual target.
pub fn evaluate_policy(mdp: &TruncatedMdp, policy: &[bool]) -> Result<(f64, f64)> {
    let probs: Vec<f64> = (0..mdp.state_count())
        .map(|s| mdp.effective_action(s, policy[s]) as f64)
        .collect();
    let eval = evaluate_transmit_probs(mdp, &probs, None)?;
    Ok((eval.avg_aoi, eval.avg_cost))
}

/// Exact long-run metrics of a randomized policy given per-state transmit
/// probabilities (forced to zero on empty-buffer states).
pub fn evaluate_randomized(mdp: &TruncatedMdp, transmit_prob: &[f64]) -> Result<(f64, f64)> {
    let eval = evaluate_transmit_probs(mdp, transmit_prob, None)?;
    Ok((eval.avg_aoi, eval.avg_cost))
}

/// Stationary distribution of the chain induced by a deterministic action
/// table, indexed like [`TruncatedMdp::states`].
pub fn stationary_distribution(mdp: &TruncatedMdp, policy: &[bool]) -> Result<Vec<f64>> {
    let probs: Vec<f64> = (0..mdp.state_count())
        .map(|s| mdp.effective_action(s, policy[s]) as f64)
        .collect();
    Ok(evaluate_transmit_probs(mdp, &probs, None)?.pi)
}

fn evaluate_transmit_probs(
    mdp: &TruncatedMdp,
    transmit_prob: &[f64],
    warm: Option<&[f64]>,
) -> Result<Evaluation> {
    let n = mdp.state_count();
    assert_eq!(transmit_prob.len(), n, "action table must cover all states");
    let a_prob: Vec<f64> = (0..n)
        .map(|s| {
            let p = transmit_prob[s];
            assert!((0.0..=1.0).contains(&p), "transmit probability {p}");
            if mdp.is_occupied(s) {
                p
            } else {
                0.0
            }
        })
        .collect();

    check_unichain(mdp, &a_prob)?;

    let mut pi: Vec<f64> = match warm {
        Some(w) if w.len() == n => w.to_vec(),
        _ => vec![1.0 / n as f64; n],
    };
    let mut next = vec![0.0; n];
    let mut converged = false;
    for _ in 0..STATIONARY_MAX_ITER {
        // damped step pi <- pi * (I + P) / 2
        for v in next.iter_mut() {
            *v = 0.0;
        }
        for s in 0..n {
            let mass = pi[s];
            if mass == 0.0 {
                continue;
            }
            let a = a_prob[s];
            if a < 1.0 {
                let w = mass * (1.0 - a);
                for (t, p) in mdp.transitions(0, s) {
                    next[t] += w * p;
                }
            }
            if a > 0.0 {
                let w = mass * a;
                for (t, p) in mdp.transitions(1, s) {
                    next[t] += w * p;
                }
            }
        }
        let mut residual = 0.0;
        for s in 0..n {
            let blended = 0.5 * (pi[s] + next[s]);
            residual += (blended - pi[s]).abs();
            pi[s] = blended;
        }
        // successive change of the damped step is half the stationarity
        // residual of the undamped kernel
        if 2.0 * residual < STATIONARY_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Convergence {
            what: "stationary distribution power iteration",
            limit: STATIONARY_MAX_ITER,
        });
    }

    let mut avg_aoi = 0.0;
    let mut avg_cost = 0.0;
    for s in 0..n {
        let a = a_prob[s];
        avg_aoi -= pi[s] * (a * mdp.reward(1, s) + (1.0 - a) * mdp.reward(0, s));
        avg_cost += pi[s] * a;
    }
    Ok(Evaluation {
        avg_aoi,
        avg_cost,
        pi,
    })
}

/// Stationary mass within `margin` states of either cap; the truncation
/// adequacy diagnostic.
fn mass_near_caps(mdp: &TruncatedMdp, pi: &[f64], margin: u32) -> f64 {
    let t_edge = mdp.dt_cap().saturating_sub(margin);
    let r_edge = mdp.dr_cap().saturating_sub(margin);
    mdp.states()
        .iter()
        .zip(pi)
        .filter(|(&(t, r), _)| t >= t_edge || r >= r_edge)
        .map(|(_, &p)| p)
        .sum()
}

/// Verifies the chain induced by the transmit probabilities has exactly one
/// recurrent class (terminal strongly connected component).
fn check_unichain(mdp: &TruncatedMdp, a_prob: &[f64]) -> Result<()> {
    let n = mdp.state_count();
    // effective edge set
    let mut adj_offsets = Vec::with_capacity(n + 1);
    let mut adj = Vec::new();
    adj_offsets.push(0u32);
    for (s, &a) in a_prob.iter().enumerate() {
        if a < 1.0 {
            for (t, p) in mdp.transitions(0, s) {
                if p > 0.0 {
                    adj.push(t as u32);
                }
            }
        }
        if a > 0.0 {
            for (t, p) in mdp.transitions(1, s) {
                if p > 0.0 {
                    adj.push(t as u32);
                }
            }
        }
        adj_offsets.push(adj.len() as u32);
    }

    let comp = tarjan_components(n, &adj_offsets, &adj);
    let comp_count = comp.iter().copied().max().map_or(0, |m| m as usize + 1);
    let mut terminal = vec![true; comp_count];
    for s in 0..n {
        for &t in &adj[adj_offsets[s] as usize..adj_offsets[s + 1] as usize] {
            if comp[s] != comp[t as usize] {
                terminal[comp[s] as usize] = false;
            }
        }
    }
    let recurrent_classes = terminal.iter().filter(|&&t| t).count();
    if recurrent_classes != 1 {
        return Err(Error::Nondegenerate(recurrent_classes));
    }
    Ok(())
}

/// Iterative Tarjan SCC; returns the component id of every node.
fn tarjan_components(n: usize, offsets: &[u32], adj: &[u32]) -> Vec<u32> {
    const UNSET: u32 = u32::MAX;
    let mut index = vec![UNSET; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNSET; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut next_index = 0u32;
    let mut comp_count = 0u32;
    let mut call: Vec<(u32, u32)> = Vec::new(); // (node, next edge cursor)

    for root in 0..n as u32 {
        if index[root as usize] != UNSET {
            continue;
        }
        call.push((root, 0));
        index[root as usize] = next_index;
        low[root as usize] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root as usize] = true;

        while let Some(&mut (v, ref mut cursor)) = call.last_mut() {
            let vi = v as usize;
            let edge_end = offsets[vi + 1];
            let mut advanced = false;
            while offsets[vi] + *cursor < edge_end {
                let w = adj[(offsets[vi] + *cursor) as usize];
                *cursor += 1;
                let wi = w as usize;
                if index[wi] == UNSET {
                    index[wi] = next_index;
                    low[wi] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[wi] = true;
                    call.push((w, 0));
                    advanced = true;
                    break;
                } else if on_stack[wi] {
                    low[vi] = low[vi].min(index[wi]);
                }
            }
            if advanced {
                continue;
            }
            // all edges of v processed
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                let pi = parent as usize;
                low[pi] = low[pi].min(low[vi]);
            }
            if low[vi] == index[vi] {
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w as usize] = false;
                    comp[w as usize] = comp_count;
                    if w == v {
                        break;
                    }
                }
                comp_count += 1;
            }
        }
    }
    comp
}

/// Constrained solution: the two bracketing deterministic policies, the
/// cost-space mixing weight, and the interpolated metrics.
#[derive(Clone, Debug)]
pub struct CmdpSolution {
    /// Optimal policy at the lower multiplier (cost at or above budget).
    pub policy_low: Vec<bool>,
    /// Optimal policy at the higher multiplier (cost within budget).
    pub policy_high: Vec<bool>,
    /// Weight on `policy_low` matching the budget by linear interpolation.
    pub mix_weight: f64,
    pub avg_aoi: f64,
    pub avg_cost: f64,
    pub multiplier: f64,
    /// Total RVIA sweeps spent across the bisection.
    pub iterations: u64,
    /// Stationary mass within 5 states of either cap (max over the two
    /// bracket policies); enlarge the caps when this is not negligible.
    pub cap_mass: f64,
}

/// Solves the budget-constrained problem on freshly built caps.
pub fn solve_constrained(
    params: &NetworkParams,
    eta_max: f64,
    dt_cap: u32,
    dr_cap: u32,
    tol: f64,
) -> Result<CmdpSolution> {
    let mdp = build_mdp(params, dt_cap, dr_cap)?;
    solve_constrained_on(&mdp, eta_max, tol)
}

/// Solves the budget-constrained problem on an existing truncated chain.
///
/// Bisection on the multiplier runs until the bracketing costs close to
/// within `tol` or the multiplier interval falls below 1e-6.
pub fn solve_constrained_on(
    mdp: &TruncatedMdp,
    eta_max: f64,
    tol: f64,
) -> Result<CmdpSolution> {
    if !(eta_max > 0.0 && eta_max <= 1.0) {
        return Err(Error::Domain(format!(
            "eta_max must be in (0, 1], got {eta_max}"
        )));
    }
    let mut h = vec![0.0; mdp.state_count()];
    let mut sweeps_total = 0u64;
    let mut pi_warm: Option<Vec<f64>> = None;

    let solve_at = |mu: f64,
                    h: &mut Vec<f64>,
                    pi_warm: &mut Option<Vec<f64>>,
                    sweeps_total: &mut u64|
     -> Result<(Vec<bool>, f64, f64, f64)> {
        let (policy, _gain, sweeps) =
            rvia_from(mdp, mu, RVIA_DEFAULT_TOL, RVIA_DEFAULT_MAX_ITER, h)?;
        *sweeps_total += sweeps as u64;
        let probs: Vec<f64> = (0..mdp.state_count())
            .map(|s| mdp.effective_action(s, policy[s]) as f64)
            .collect();
        let eval = evaluate_transmit_probs(mdp, &probs, pi_warm.as_deref())?;
        let cap = mass_near_caps(mdp, &eval.pi, 5);
        *pi_warm = Some(eval.pi);
        Ok((policy, eval.avg_aoi, eval.avg_cost, cap))
    };

    // unconstrained end of the bracket
    let (pol0, aoi0, cost0, cap0) = solve_at(0.0, &mut h, &mut pi_warm, &mut sweeps_total)?;
    if cost0 <= eta_max {
        return Ok(CmdpSolution {
            policy_low: pol0.clone(),
            policy_high: pol0,
            mix_weight: 1.0,
            avg_aoi: aoi0,
            avg_cost: cost0,
            multiplier: 0.0,
            iterations: sweeps_total,
            cap_mass: cap0,
        });
    }

    let mut mu_lo = 0.0;
    let (mut pol_lo, mut aoi_lo, mut cost_lo, mut cap_lo) = (pol0, aoi0, cost0, cap0);

    // grow the upper multiplier until its policy fits the budget
    let mut mu_hi = mdp.dr_cap() as f64;
    let (mut pol_hi, mut aoi_hi, mut cost_hi, mut cap_hi);
    loop {
        let (p, a, c, m) = solve_at(mu_hi, &mut h, &mut pi_warm, &mut sweeps_total)?;
        if c <= eta_max {
            (pol_hi, aoi_hi, cost_hi, cap_hi) = (p, a, c, m);
            break;
        }
        (pol_lo, aoi_lo, cost_lo, cap_lo) = (p, a, c, m);
        mu_lo = mu_hi;
        mu_hi *= 2.0;
        if mu_hi > 1e12 {
            return Err(Error::Convergence {
                what: "multiplier bracket growth",
                limit: 40,
            });
        }
    }

    while mu_hi - mu_lo > 1e-6 && (cost_lo - cost_hi).abs() > tol {
        let mid = 0.5 * (mu_lo + mu_hi);
        let (p, a, c, m) = solve_at(mid, &mut h, &mut pi_warm, &mut sweeps_total)?;
        if c > eta_max {
            (pol_lo, aoi_lo, cost_lo, cap_lo) = (p, a, c, m);
            mu_lo = mid;
        } else {
            (pol_hi, aoi_hi, cost_hi, cap_hi) = (p, a, c, m);
            mu_hi = mid;
        }
    }

    let mix_weight = if (cost_lo - cost_hi).abs() < 1e-15 {
        // both bracket policies achieve the same cost; it is within budget
        0.0
    } else {
        ((eta_max - cost_hi) / (cost_lo - cost_hi)).clamp(0.0, 1.0)
    };
    Ok(CmdpSolution {
        policy_low: pol_lo,
        policy_high: pol_hi,
        mix_weight,
        avg_aoi: mix_weight * aoi_lo + (1.0 - mix_weight) * aoi_hi,
        avg_cost: mix_weight * cost_lo + (1.0 - mix_weight) * cost_hi,
        multiplier: 0.5 * (mu_lo + mu_hi),
        iterations: sweeps_total,
        cap_mass: cap_lo.max(cap_hi),
    })
}

/// Calibrated boundary randomization between thresholds `delta_low` and
/// `delta_low + 1`.
#[derive(Clone, Copy, Debug)]
pub struct CalibratedMixed {
    /// Transmit probability in the boundary state.
    pub q: f64,
    /// Exact long-run metrics of the calibrated policy on the truncated
    /// chain.
    pub avg_aoi: f64,
    pub avg_cost: f64,
}

/// Tunes the boundary-coin probability `q` of the randomized single
/// threshold policy so its exact long-run cost on the truncated chain
/// meets `eta_max`.
///
/// The linear interpolation `q*eta(d) + (1-q)*eta(d+1)` that selects `q`
/// analytically is only approximate under per-slot boundary randomization;
/// this routine closes the gap by bisection on the true stationary cost,
/// which is monotone in `q`.
pub fn calibrate_mixed_q(
    mdp: &TruncatedMdp,
    delta_low: u32,
    eta_max: f64,
) -> Result<CalibratedMixed> {
    let probs_at = |q: f64| -> Vec<f64> {
        mdp.states()
            .iter()
            .map(|&(t, r)| {
                if r <= t {
                    0.0
                } else {
                    let gap = (r - t) as u64;
                    if gap > delta_low as u64 {
                        1.0
                    } else if gap == delta_low as u64 {
                        q
                    } else {
                        0.0
                    }
                }
            })
            .collect()
    };

    let mut warm: Option<Vec<f64>> = None;
    let eval_at = |q: f64, warm: &mut Option<Vec<f64>>| -> Result<(f64, f64)> {
        let eval = evaluate_transmit_probs(mdp, &probs_at(q), warm.as_deref())?;
        let out = (eval.avg_aoi, eval.avg_cost);
        *warm = Some(eval.pi);
        Ok(out)
    };

    let (aoi_lo, cost_lo) = eval_at(0.0, &mut warm)?;
    if cost_lo >= eta_max {
        return Ok(CalibratedMixed {
            q: 0.0,
            avg_aoi: aoi_lo,
            avg_cost: cost_lo,
        });
    }
    let (aoi_hi, cost_hi) = eval_at(1.0, &mut warm)?;
    if cost_hi <= eta_max {
        return Ok(CalibratedMixed {
            q: 1.0,
            avg_aoi: aoi_hi,
            avg_cost: cost_hi,
        });
    }
    let (mut q_lo, mut q_hi) = (0.0, 1.0);
    let mut best = CalibratedMixed {
        q: 0.0,
        avg_aoi: aoi_lo,
        avg_cost: cost_lo,
    };
    for _ in 0..60 {
        let mid = 0.5 * (q_lo + q_hi);
        let (aoi, cost) = eval_at(mid, &mut warm)?;
        best = CalibratedMixed {
            q: mid,
            avg_aoi: aoi,
            avg_cost: cost,
        };
        if (cost - eta_max).abs() < 1e-10 {
            break;
        }
        if cost < eta_max {
            q_lo = mid;
        } else {
            q_hi = mid;
        }
    }
    Ok(best)
}
