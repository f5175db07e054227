//! Compiling a target operator into a pulse schedule.
//!
//! The schedule runs in two stages on `|psi, 0> ⊗ |a>`:
//!
//! 1. *Spreading*, rows `m = N .. 0`: flip row `m` from `a` to `b`, spread
//!    `|m, 0, b>` into `sum_n V[n][m] / r_m |m, n, b>` with alternating carrier
//!    and y-sideband pulses, flip back to `a` with the compensation phase
//!    `phi_m` from the [`PhaseLedger`].
//! 2. *Superposing*: flip row N to `b`, then for `m = N-1 .. 0` lower the
//!    carried `b` amplitude one x-phonon (x sideband plus carrier) and mix it
//!    with row `m` through a partial channel-1 flip.
//!
//! Projecting onto `b` leaves `|0> ⊗ V|psi> / |V|_F`; for unitary targets the
//! success probability is `1 / (N + 1)` for every input. Column norms `r_m`
//! weight the superposing stage, so non-unitary targets are implemented
//! exactly as well, with an input-dependent success probability.

mod ledger;
mod spread;
mod superpose;

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

pub use ledger::{
    events_from_pulses, phase_distance, reference_compensation, spectator_phases, stark_events,
    wrap_phase, LedgerEntry, PhaseLedger, StarkEvent, PHASE_TOLERANCE,
};
pub use spread::{plan_row_spread, zeroing_pulse, RowSpread, RESIDUAL_TOLERANCE, ZERO_AMPLITUDE};
pub use superpose::{mixing_angles, plan_step_b};

use crate::error::{Error, Result};
use crate::fockspace::Level;
use crate::iontools::TrapParams;
use crate::propagator::{DetuningConvention, PulseOp};
use crate::targets::TargetOperator;

#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    pub params: TrapParams,
    pub target_name: String,
    pub target_digest: String,
    /// Success probability per unit `|V psi|^2`, i.e. `1 / |V|_F^2`;
    /// equals `1 / (N + 1)` for unitary targets.
    pub nominal_success_prob: f64,
    pub projection_level: Level,
    pub column_norms: Vec<f64>,
    /// Number of leading pulses that belong to the spreading stage.
    pub step_a_len: usize,
    pub pulses: Vec<PulseOp>,
    pub phase_ledger: Vec<LedgerEntry>,
    pub matching_convention: Option<DetuningConvention>,
}

impl Schedule {
    pub fn n_max(&self) -> usize {
        self.params.n_max
    }

    pub fn step_a(&self) -> &[PulseOp] {
        &self.pulses[..self.step_a_len]
    }

    pub fn step_b(&self) -> &[PulseOp] {
        &self.pulses[self.step_a_len..]
    }

    /// Checks pulse shapes, stage layout and the recorded compensation phases.
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let n = self.params.n_max;
        if self.pulses.len() != pulse_count(n) || self.step_a_len != step_a_count(n) {
            return Err(Error::Contract(format!(
                "schedule for N = {n} must hold {} + {} pulses, found {} with {} in the first stage",
                step_a_count(n),
                pulse_count(n) - step_a_count(n),
                self.pulses.len(),
                self.step_a_len
            )));
        }
        if self.phase_ledger.len() != n + 1 || self.column_norms.len() != n + 1 {
            return Err(Error::Contract(
                "ledger and column norms must cover every row".into(),
            ));
        }
        for p in &self.pulses {
            p.validate(&self.params)?;
        }
        let ledger = PhaseLedger {
            entries: self.phase_ledger.clone(),
            matching_convention: self.matching_convention,
        };
        ledger.verify(&self.params, &self.pulses, self.step_a_len)
    }
}

/// Diagnostics of one synthesis.
#[derive(Clone, Debug)]
pub struct SynthesisRecord {
    pub rows: Vec<RowSpread>,
    pub mixing_angles: Vec<f64>,
}

impl SynthesisRecord {
    pub fn max_residual(&self) -> f64 {
        self.rows
            .iter()
            .flat_map(|r| r.residuals.iter().copied())
            .fold(0.0, f64::max)
    }
}

/// Pulses of the spreading stage: two flips and `2N` sweep pulses per row.
pub fn step_a_count(n_max: usize) -> usize {
    (n_max + 1) * (2 * n_max + 2)
}

/// Total schedule length `2 (N+1)^2 + 3N + 1`.
pub fn pulse_count(n_max: usize) -> usize {
    step_a_count(n_max) + 3 * n_max + 1
}

/// Spreading-stage pulses, rows processed from `m = N` down to 0.
pub fn plan_step_a(
    rows: &[RowSpread],
    params: &TrapParams,
    ledger: &PhaseLedger,
) -> Result<Vec<PulseOp>> {
    let n = params.n_max;
    if rows.len() != n + 1 || ledger.entries.len() != n + 1 {
        return Err(Error::Dimension(format!(
            "spreading stage needs {} rows",
            n + 1
        )));
    }
    let mut pulses = Vec::with_capacity(step_a_count(n));
    for row in rows.iter().rev() {
        let m = row.m;
        let phi = ledger.phase_compensation(m);
        pulses.push(PulseOp::stark(m, Complex64::new(FRAC_PI_2, 0.0), params));
        pulses.extend_from_slice(&row.pulses);
        pulses.push(PulseOp::stark(
            m,
            -Complex64::from_polar(FRAC_PI_2, phi),
            params,
        ));
    }
    Ok(pulses)
}

pub fn synthesize(target: &TargetOperator, params: &TrapParams) -> Result<Schedule> {
    synthesize_with_record(target, params).map(|(s, _)| s)
}

pub fn synthesize_with_record(
    target: &TargetOperator,
    params: &TrapParams,
) -> Result<(Schedule, SynthesisRecord)> {
    params.validate()?;
    let n = params.n_max;
    if target.dim() != n + 1 {
        return Err(Error::Dimension(format!(
            "target acts on {} levels but the trap register holds N + 1 = {}",
            target.dim(),
            n + 1
        )));
    }
    let norms = target.column_norms.clone();
    let rows = (0..=n)
        .map(|m| {
            let column: Vec<Complex64> = (0..=n).map(|k| target.get(k, m) / norms[m]).collect();
            plan_row_spread(&column, m, params)
        })
        .collect::<Result<Vec<_>>>()?;
    let angles = mixing_angles(&norms);
    let spread_phases: Vec<f64> = rows.iter().map(|r| r.spread_phase).collect();
    let ledger = PhaseLedger::build(params, &spread_phases, &angles)?;

    let mut pulses = plan_step_a(&rows, params, &ledger)?;
    let step_a_len = pulses.len();
    pulses.extend(plan_step_b(params, &angles)?);

    let frobenius_sq: f64 = norms.iter().map(|r| r * r).sum();
    let schedule = Schedule {
        params: params.clone(),
        target_name: target.name.clone(),
        target_digest: target.digest(),
        nominal_success_prob: 1.0 / frobenius_sq,
        projection_level: Level::B,
        column_norms: norms,
        step_a_len,
        pulses,
        phase_ledger: ledger.entries,
        matching_convention: ledger.matching_convention,
    };
    schedule.validate()?;
    Ok((
        schedule,
        SynthesisRecord {
            rows,
            mixing_angles: angles,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::targets;

    #[test]
    fn counts() {
        assert_eq!(pulse_count(0), 3);
        assert_eq!(pulse_count(1), 12);
        assert_eq!(pulse_count(5), 88);
    }

    #[test]
    fn schedule_shape() {
        let p = TrapParams::new(3);
        let v = targets::qft(4).unwrap();
        let s = synthesize(&v, &p).unwrap();
        assert_eq!(s.pulses.len(), pulse_count(3));
        assert!((s.nominal_success_prob - 0.25).abs() < 1e-12);
        assert_eq!(s.projection_level, Level::B);
        assert_eq!(s.matching_convention, Some(DetuningConvention::Unit));
        s.validate().unwrap();
    }

    #[test]
    fn tampered_phase_is_caught() {
        let p = TrapParams::new(2);
        let v = targets::random_unitary(3, 5).unwrap();
        let mut s = synthesize(&v, &p).unwrap();
        let flip_back = 2 * 2 + 1; // first row's second channel-1 pulse
        s.pulses[flip_back].area *= Complex64::from_polar(1.0, 1e-6);
        assert!(matches!(s.validate(), Err(Error::Internal(_))));
    }

    #[test]
    fn dimension_mismatch() {
        let p = TrapParams::new(3);
        let v = targets::qft(3).unwrap();
        assert!(matches!(synthesize(&v, &p), Err(Error::Dimension(_))));
    }
}
