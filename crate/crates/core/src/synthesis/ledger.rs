//! Phase bookkeeping for the channel-1 pulses.
//!
//! A Stark pulse addressed to row `k` leaves the populations of every other
//! row alone (in the ideal limit) but rotates their phases. Before a row is
//! superposed onto the carried amplitude, its amplitude has to be in phase
//! with it, so the flip-back pulse of the spreading stage pre-compensates
//! everything the row will pick up until then.
//!
//! Besides those spectator phases, the compensation absorbs the phase left by
//! the row's own spreading sweep and the sign flip the carrier imprints on the
//! carried amplitude at every superposing step.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::iontools::{Channel, TrapParams};
use crate::propagator::{
    channel1_offres_phase, offres_phase_closed_form, DetuningConvention, PulseOp,
};

/// Agreement required between phases that should coincide.
pub const PHASE_TOLERANCE: f64 = 1e-9;

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_phase(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Distance between two angles on the circle.
pub fn phase_distance(a: f64, b: f64) -> f64 {
    wrap_phase(a - b).abs()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub m: usize,
    /// Compensation phase used in the flip-back pulse of row `m`.
    pub phi_applied: f64,
    /// Same bookkeeping with the closed-form spectator phase, unit detuning.
    #[serde(rename = "phi_eq11_conv1")]
    pub phi_closed_unit: f64,
    /// Same bookkeeping with the closed-form spectator phase, half detuning.
    #[serde(rename = "phi_eq11_conv_half")]
    pub phi_closed_half: f64,
    /// The reference compensation formula (Step-A pulses of lower rows as one
    /// pi rotation, superposing angles `arctan(1/sqrt(N-k+1))`), unit detuning.
    pub phi_reference_unit: f64,
    /// As `phi_reference_unit`, half detuning.
    pub phi_reference_half: f64,
    /// Phase left by the row's spreading sweep.
    pub spread_phase: f64,
    /// Total spectator phase the row accumulates before it is superposed.
    pub spectator_phase: f64,
}

/// A channel-1 pulse as seen by the ledger.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StarkEvent {
    pub row: usize,
    pub rotation: f64,
    /// Whether this pulse superposes its row onto the carried amplitude.
    pub superposes: bool,
}

/// Channel-1 pulses of a full schedule in execution order.
pub fn stark_events(n_max: usize, mixing_angles: &[f64]) -> Vec<StarkEvent> {
    let mut events = Vec::with_capacity(2 * (n_max + 1) + n_max + 1);
    for m in (0..=n_max).rev() {
        for _ in 0..2 {
            events.push(StarkEvent {
                row: m,
                rotation: FRAC_PI_2,
                superposes: false,
            });
        }
    }
    events.push(StarkEvent {
        row: n_max,
        rotation: FRAC_PI_2,
        superposes: true,
    });
    for m in (0..n_max).rev() {
        events.push(StarkEvent {
            row: m,
            rotation: mixing_angles[m],
            superposes: true,
        });
    }
    events
}

/// Channel-1 events recovered from an assembled pulse list.
pub fn events_from_pulses(pulses: &[PulseOp], step_a_len: usize) -> Vec<StarkEvent> {
    pulses
        .iter()
        .enumerate()
        .filter_map(|(i, p)| match p.channel {
            Channel::Stark1 { row_m } => Some(StarkEvent {
                row: row_m,
                rotation: p.area.norm(),
                superposes: i >= step_a_len,
            }),
            _ => None,
        })
        .collect()
}

/// Spectator phase accumulated by each register row before its superposing pulse.
pub fn spectator_phases<F>(n_max: usize, events: &[StarkEvent], mut phase: F) -> Vec<f64>
where
    F: FnMut(usize, usize, f64) -> f64,
{
    let mut acc = vec![0.0; n_max + 1];
    let mut done = vec![false; n_max + 1];
    for e in events {
        for (row, total) in acc.iter_mut().enumerate() {
            if row != e.row && !done[row] {
                *total += phase(e.row, row, e.rotation);
            }
        }
        if e.superposes {
            done[e.row] = true;
        }
    }
    acc
}

fn compensation(n_max: usize, m: usize, spread_phase: f64, spectator: f64) -> f64 {
    let carrier_signs = ((n_max - m) % 2) as f64 * PI;
    wrap_phase(-FRAC_PI_2 + carrier_signs + spread_phase - spectator)
}

fn exact_phase(params: &TrapParams) -> impl FnMut(usize, usize, f64) -> f64 + '_ {
    move |addressed, spectator, rotation| {
        channel1_offres_phase(addressed, spectator, Complex64::new(rotation, 0.0), params)
    }
}

/// The per-row compensation phases of one schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseLedger {
    pub entries: Vec<LedgerEntry>,
    /// The closed-form convention that reproduces the applied phases, if exactly one does.
    pub matching_convention: Option<DetuningConvention>,
}

impl PhaseLedger {
    /// Builds the ledger for a register of `N + 1` rows given each row's
    /// spreading phase and the superposing angles `theta_0 .. theta_{N-1}`.
    pub fn build(
        params: &TrapParams,
        spread_phases: &[f64],
        mixing_angles: &[f64],
    ) -> Result<Self> {
        let n = params.n_max;
        if spread_phases.len() != n + 1 || mixing_angles.len() != n {
            return Err(Error::Dimension(format!(
                "ledger for N = {n} needs {} spread phases and {n} mixing angles",
                n + 1
            )));
        }
        let events = stark_events(n, mixing_angles);
        let exact = spectator_phases(n, &events, exact_phase(params));
        let closed = |conv: DetuningConvention| {
            spectator_phases(n, &events, |addressed, spectator, rotation| {
                offres_phase_closed_form(addressed, spectator, rotation, params, conv)
            })
        };
        let unit = closed(DetuningConvention::Unit);
        let half = closed(DetuningConvention::Half);
        let reference_unit = reference_compensation(params, DetuningConvention::Unit);
        let reference_half = reference_compensation(params, DetuningConvention::Half);

        let entries: Vec<LedgerEntry> = (0..=n)
            .map(|m| LedgerEntry {
                m,
                phi_applied: compensation(n, m, spread_phases[m], exact[m]),
                phi_closed_unit: compensation(n, m, spread_phases[m], unit[m]),
                phi_closed_half: compensation(n, m, spread_phases[m], half[m]),
                phi_reference_unit: reference_unit[m],
                phi_reference_half: reference_half[m],
                spread_phase: spread_phases[m],
                spectator_phase: exact[m],
            })
            .collect();

        let matches = |pick: fn(&LedgerEntry) -> f64| {
            entries
                .iter()
                .all(|e| phase_distance(e.phi_applied, pick(e)) <= PHASE_TOLERANCE)
        };
        let matching_convention = match (
            matches(|e| e.phi_closed_unit),
            matches(|e| e.phi_closed_half),
        ) {
            (true, false) => Some(DetuningConvention::Unit),
            (false, true) => Some(DetuningConvention::Half),
            _ => None,
        };
        Ok(PhaseLedger {
            entries,
            matching_convention,
        })
    }

    /// Compensation phase `phi_m` for the flip-back pulse of row `m`.
    pub fn phase_compensation(&self, m: usize) -> f64 {
        self.entries[m].phi_applied
    }

    /// Recomputes the spectator phases from an assembled schedule and checks
    /// them against the phases its flip-back pulses carry.
    pub fn verify(&self, params: &TrapParams, pulses: &[PulseOp], step_a_len: usize) -> Result<()> {
        let n = params.n_max;
        let events = events_from_pulses(pulses, step_a_len);
        let spectator = spectator_phases(n, &events, exact_phase(params));
        let mut seen = vec![0usize; n + 1];
        for pulse in &pulses[..step_a_len] {
            if let Channel::Stark1 { row_m } = pulse.channel {
                seen[row_m] += 1;
                if seen[row_m] == 2 {
                    let entry = &self.entries[row_m];
                    // flip-back area is -(pi/2) e^{i phi}
                    let carried = wrap_phase((-pulse.area).arg());
                    let expected = compensation(n, row_m, entry.spread_phase, spectator[row_m]);
                    let gap = phase_distance(carried, expected)
                        .max(phase_distance(entry.phi_applied, expected));
                    if gap > PHASE_TOLERANCE {
                        return Err(Error::Internal(format!(
                            "phase ledger inconsistent on row {row_m}: off by {gap:e}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// The compensation formula in its reference form:
/// `-pi/2 - sum_{k<m} f(k -> m, pi) - sum_{k>m} f(k -> m, arctan(1/sqrt(N-k+1)))`.
pub fn reference_compensation(params: &TrapParams, convention: DetuningConvention) -> Vec<f64> {
    let n = params.n_max;
    (0..=n)
        .map(|m| {
            let lower: f64 = (0..m)
                .map(|k| offres_phase_closed_form(k, m, PI, params, convention))
                .sum();
            let upper: f64 = (m + 1..=n)
                .map(|k| {
                    let angle = (1.0 / ((n - k + 1) as f64).sqrt()).atan();
                    offres_phase_closed_form(k, m, angle, params, convention)
                })
                .sum();
            wrap_phase(-FRAC_PI_2 - lower - upper)
        })
        .collect()
}
