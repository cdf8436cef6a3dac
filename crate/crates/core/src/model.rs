//! Core domain types and the slot-level dynamics shared by the analytics,
//! the simulator, and the CMDP builder.
//!
//! Time is slotted. A fresh packet arrives at the transmitter with
//! probability `lambda` per slot, preempting any buffered packet. A
//! transmitted packet is erased independently with probability `epsilon`;
//! success is acknowledged instantly. `delta_t` is the transmitter-side
//! freshness at the start of a slot, `delta_r` the receiver AoI observed at
//! the end of a slot (`delta_r = slot - u_latest + 1`).

use crate::error::{Error, Result};

/// Physics of one experiment: arrival rate, erasure probability, and the
/// optional long-term average transmission budget.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NetworkParams {
    lambda: f64,
    epsilon: f64,
    eta_max: Option<f64>,
}

impl NetworkParams {
    /// Validates `0 < lambda <= 1`, `0 <= epsilon < 1` and, when present,
    /// `0 < eta_max <= 1`.
    ///
    /// `lambda = 0` is rejected here: without arrivals every long-term
    /// metric diverges. `epsilon = 1` is rejected because nothing is ever
    /// delivered.
    pub fn new(lambda: f64, epsilon: f64, eta_max: Option<f64>) -> Result<Self> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::Domain(format!(
                "lambda must be in (0, 1], got {lambda}"
            )));
        }
        if !(0.0..1.0).contains(&epsilon) {
            return Err(Error::Domain(format!(
                "epsilon must be in [0, 1), got {epsilon}"
            )));
        }
        if let Some(eta) = eta_max {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(Error::Domain(format!(
                    "eta_max must be in (0, 1], got {eta}"
                )));
            }
        }
        Ok(Self {
            lambda,
            epsilon,
            eta_max,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn eta_max(&self) -> Option<f64> {
        self.eta_max
    }
}

/// Decision-time snapshot of the link at slot `slot`.
///
/// `delta_t` already reflects the arrival (or not) of the current slot;
/// `delta_r_prev` is the receiver AoI observed at the end of the previous
/// slot. This pair is exactly the CMDP state, and buffer occupancy is
/// equivalent to `delta_r_prev - delta_t >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LinkState {
    pub slot: u64,
    pub delta_t: u64,
    pub delta_r_prev: u64,
    pub buffer_occupied: bool,
    /// Arrival slot of the latest packet.
    pub g_latest: u64,
    /// Arrival slot of the latest delivered packet.
    pub u_latest: u64,
}

impl LinkState {
    /// State before the first slot: both ages zero, buffer empty. The
    /// fictitious packet at slot 0 never transmits because the buffer
    /// starts empty.
    pub fn initial() -> Self {
        Self {
            slot: 0,
            delta_t: 0,
            delta_r_prev: 0,
            buffer_occupied: false,
            g_latest: 0,
            u_latest: 0,
        }
    }

    /// Freshness difference every threshold test is taken on.
    ///
    /// Equals `g_latest - u_latest` for an occupied buffer, which is
    /// `delta_r_prev - delta_t` from the first delivery onward. Before it,
    /// the `delta_r(0) = 0` convention shifts the age difference down by
    /// one, while the arrival-slot difference already carries the +1 of the
    /// AoI definition.
    pub fn freshness_gap(&self) -> u64 {
        if self.buffer_occupied {
            debug_assert!(self.g_latest > self.u_latest);
            self.g_latest - self.u_latest
        } else {
            0
        }
    }

    /// Occupancy identity `buffer_occupied <=> delta_r_prev - delta_t >= 1`;
    /// exact from the first delivery onward (`u_latest >= 1`), vacuous
    /// during the convention-shifted prefix.
    pub fn occupancy_consistent(&self) -> bool {
        if self.u_latest == 0 {
            return true;
        }
        self.buffer_occupied == (self.delta_r_prev > self.delta_t)
    }
}

/// Transmitter action for one slot. `transmit` requires an occupied buffer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Action {
    pub transmit: bool,
}

/// Receiver AoI at the end of a slot: on delivery it restarts from the age
/// of the delivered packet, otherwise it grows by one.
#[inline]
pub fn end_of_slot_receiver_age(delta_t: u64, delta_r_prev: u64, delivered: bool) -> u64 {
    if delivered {
        delta_t + 1
    } else {
        delta_r_prev + 1
    }
}

/// Transmitter freshness at the start of the next slot: an arrival resets
/// it, otherwise it grows by one.
#[inline]
pub fn next_slot_freshness(delta_t: u64, arrival: bool) -> u64 {
    if arrival {
        0
    } else {
        delta_t + 1
    }
}
