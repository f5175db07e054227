//! Time evolution under a single laser pulse.
//!
//! Every channel splits the composite space into independent one- and
//! two-dimensional blocks, so [`apply_pulse`] works block by block with the
//! closed-form propagator of a driven two-level system. [`expm_reference`]
//! builds the dense Hamiltonian and exponentiates it through a Hermitian
//! eigendecomposition; it shares no code with the block path beyond the
//! Hamiltonian definitions and is used as the test oracle.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fockspace::{Level, StateVector};
use crate::iontools::{
    build_hamiltonian_with_coupling, sideband_coupling, stark_shift, Channel, OperatorMatrix,
    TrapParams,
};

pub type Mat2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Whether channel-1 pulses flip populations on rows they do not address.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Infinite `chi / |g1|`: spectator rows only pick up the diagonal phases.
    Ideal,
    /// Finite `chi / |g1|`: the effective Hamiltonians are evolved exactly.
    Full,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Ideal => "ideal",
            Mode::Full => "full",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ideal" => Ok(Mode::Ideal),
            "full" => Ok(Mode::Full),
            other => Err(Error::Usage(format!(
                "unknown mode '{other}' (expected ideal|full)"
            ))),
        }
    }
}

/// One elementary laser operation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseOp {
    pub channel: Channel,
    /// The product `g_p * tau` as one complex number.
    pub area: Complex64,
    /// Laser detuning of the Stark channel; `None` for the other channels.
    pub delta_y: Option<f64>,
}

impl PulseOp {
    /// Channel-1 pulse resonant with row `row_m` (`delta_y = -s_m`).
    pub fn stark(row_m: usize, area: Complex64, params: &TrapParams) -> Self {
        PulseOp {
            channel: Channel::Stark1 { row_m },
            area,
            delta_y: Some(-stark_shift(row_m, params)),
        }
    }

    pub fn carrier(area: Complex64) -> Self {
        PulseOp {
            channel: Channel::Carrier3,
            area,
            delta_y: None,
        }
    }

    pub fn sideband_y(area: Complex64) -> Self {
        PulseOp {
            channel: Channel::SidebandY2,
            area,
            delta_y: None,
        }
    }

    pub fn sideband_x(area: Complex64) -> Self {
        PulseOp {
            channel: Channel::SidebandX4,
            area,
            delta_y: None,
        }
    }

    /// Structural checks, plus agreement of a Stark pulse's detuning with its row.
    pub fn validate(&self, params: &TrapParams) -> Result<()> {
        self.check_shape(params)?;
        if let (Channel::Stark1 { row_m }, Some(delta)) = (self.channel, self.delta_y) {
            let expected = -stark_shift(row_m, params);
            if (delta - expected).abs() > 1e-12 * expected.abs().max(1.0) {
                return Err(Error::Contract(format!(
                    "stark pulse on row {row_m} has delta_y {delta}, expected {expected}"
                )));
            }
        }
        Ok(())
    }

    fn check_shape(&self, params: &TrapParams) -> Result<()> {
        if !self.area.re.is_finite() || !self.area.im.is_finite() {
            return Err(Error::Contract(format!(
                "non-finite pulse area {}",
                self.area
            )));
        }
        match (self.channel, self.delta_y) {
            (Channel::Stark1 { row_m }, Some(delta)) => {
                if row_m > params.n_max {
                    return Err(Error::Contract(format!(
                        "stark pulse addresses row {row_m} beyond N = {}",
                        params.n_max
                    )));
                }
                if !delta.is_finite() {
                    return Err(Error::Contract("non-finite delta_y".into()));
                }
            }
            (Channel::Stark1 { .. }, None) => {
                return Err(Error::Contract("stark pulse without delta_y".into()));
            }
            (_, Some(_)) => {
                return Err(Error::Contract(format!(
                    "delta_y given for non-stark channel {}",
                    self.channel.name()
                )));
            }
            (_, None) => {}
        }
        Ok(())
    }
}

/// `exp(-i [[delta, w], [conj(w), -delta]])` for the ordered pair `(upper, lower)`.
///
/// `delta` and `w` are already multiplied by the pulse duration.
pub fn two_level_propagator(delta: f64, w: Complex64) -> Mat2 {
    let omega = (delta * delta + w.norm_sqr()).sqrt();
    if omega == 0.0 {
        return [[ONE, ZERO], [ZERO, ONE]];
    }
    let (sin, cos) = omega.sin_cos();
    let s = sin / omega;
    let minus_i = Complex64::new(0.0, -1.0);
    [
        [Complex64::new(cos, -s * delta), minus_i * s * w],
        [minus_i * s * w.conj(), Complex64::new(cos, s * delta)],
    ]
}

#[inline]
fn rotate(amps: &mut [Complex64], upper: usize, lower: usize, u: &Mat2) {
    let (x, y) = (amps[upper], amps[lower]);
    amps[upper] = u[0][0] * x + u[0][1] * y;
    amps[lower] = u[1][0] * x + u[1][1] * y;
}

fn unit_phase(z: Complex64) -> Complex64 {
    let r = z.norm();
    if r == 0.0 {
        ONE
    } else {
        z / r
    }
}

/// Block parameters `(delta * tau, g * tau)` of the Stark channel on one row.
fn stark_block(row_detuning: f64, area: Complex64, g_mag: f64) -> (f64, Complex64) {
    let tau = area.norm() / g_mag;
    (row_detuning * tau, area)
}

/// Applies `exp(-i H tau)` of one pulse.
pub fn apply_pulse(
    state: &StateVector,
    pulse: &PulseOp,
    params: &TrapParams,
    mode: Mode,
) -> Result<StateVector> {
    let mut out = state.clone();
    apply_pulse_mut(&mut out, pulse, params, mode)?;
    Ok(out)
}

pub(crate) fn apply_pulse_mut(
    state: &mut StateVector,
    pulse: &PulseOp,
    params: &TrapParams,
    mode: Mode,
) -> Result<()> {
    pulse.check_shape(params)?;
    let dims = state.dims();
    if dims != params.dims() {
        return Err(Error::Dimension(format!(
            "state dims ({}, {}) do not match trap truncation {}",
            dims.dx,
            dims.dy,
            params.phonon_dim()
        )));
    }
    if pulse.area == ZERO {
        return Ok(());
    }
    let d = dims.dx;
    let amps = state.amplitudes_mut();
    match pulse.channel {
        Channel::Stark1 { row_m } => {
            let delta_y = pulse.delta_y.expect("checked above");
            for k in 0..d {
                let (delta, w) =
                    stark_block(delta_y + stark_shift(k, params), pulse.area, params.g1);
                let mut u = two_level_propagator(delta, w);
                if mode == Mode::Ideal && k != row_m {
                    u = [[unit_phase(u[0][0]), ZERO], [ZERO, unit_phase(u[1][1])]];
                }
                for n in 0..d {
                    rotate(
                        amps,
                        dims.index(k, n, Level::A),
                        dims.index(k, n, Level::B),
                        &u,
                    );
                }
            }
        }
        Channel::Carrier3 => {
            let u = two_level_propagator(0.0, pulse.area);
            for m in 0..d {
                for n in 0..d {
                    rotate(
                        amps,
                        dims.index(m, n, Level::B),
                        dims.index(m, n, Level::C),
                        &u,
                    );
                }
            }
        }
        Channel::SidebandY2 => {
            for n in 0..d - 1 {
                let u = two_level_propagator(0.0, pulse.area * sideband_coupling(n, params.eta_y));
                for m in 0..d {
                    rotate(
                        amps,
                        dims.index(m, n + 1, Level::B),
                        dims.index(m, n, Level::C),
                        &u,
                    );
                }
            }
        }
        Channel::SidebandX4 => {
            for m in 0..d - 1 {
                let u = two_level_propagator(0.0, pulse.area * sideband_coupling(m, params.eta_x));
                for n in 0..d {
                    rotate(
                        amps,
                        dims.index(m + 1, n, Level::B),
                        dims.index(m, n, Level::C),
                        &u,
                    );
                }
            }
        }
    }
    Ok(())
}

/// Full propagator `exp(-i H tau)` from a Hermitian eigendecomposition of the dense Hamiltonian.
pub fn expm_propagator(
    channel: Channel,
    params: &TrapParams,
    delta_y: f64,
    area: Complex64,
) -> Result<OperatorMatrix> {
    let len = params.dims().len();
    if area == ZERO {
        return Ok(DMatrix::identity(len, len));
    }
    let g_mag = params.coupling(channel);
    let tau = area.norm() / g_mag;
    let g = Complex64::from_polar(g_mag, area.arg());
    let h = build_hamiltonian_with_coupling(channel, params, delta_y, g);
    let asym = (&h - h.adjoint()).norm();
    if asym > 1e-12 {
        return Err(Error::Internal(format!(
            "Hamiltonian not Hermitian: |H - H^dag| = {asym}"
        )));
    }
    let eig = SymmetricEigen::new(h);
    let phases = DVector::from_iterator(
        len,
        eig.eigenvalues
            .iter()
            .map(|&lambda| Complex64::from_polar(1.0, -lambda * tau)),
    );
    let v = &eig.eigenvectors;
    Ok(v * DMatrix::from_diagonal(&phases) * v.adjoint())
}

/// Evolves `state` with [`expm_propagator`].
pub fn expm_reference(
    channel: Channel,
    params: &TrapParams,
    delta_y: f64,
    area: Complex64,
    state: &StateVector,
) -> Result<StateVector> {
    if state.dims() != params.dims() {
        return Err(Error::Dimension(
            "state dims do not match trap truncation".into(),
        ));
    }
    let u = expm_propagator(channel, params, delta_y, area)?;
    let psi = DVector::from_column_slice(state.amplitudes());
    let out = u * psi;
    StateVector::from_amplitudes(state.dims(), out.iter().copied().collect())
}

/// Which detuning enters the closed-form off-resonant phase.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetuningConvention {
    /// Block diagonal `±(s_k - s_m)`, as in the Stark Hamiltonian.
    Unit,
    /// Block diagonal `±(s_k - s_m) / 2`.
    Half,
}

impl DetuningConvention {
    pub fn factor(self) -> f64 {
        match self {
            DetuningConvention::Unit => 1.0,
            DetuningConvention::Half => 0.5,
        }
    }
}

/// Phase picked up by the `|a>` amplitude of spectator row `k` during a
/// channel-1 pulse resonant with row `m`, read off the exact block diagonal.
/// The `|b>` amplitude acquires the opposite phase.
pub fn channel1_offres_phase(m: usize, k: usize, area: Complex64, params: &TrapParams) -> f64 {
    let detuning = stark_shift(k, params) - stark_shift(m, params);
    let (delta, w) = stark_block(detuning, area, params.g1);
    two_level_propagator(delta, w)[0][0].arg()
}

/// Closed form `arg[cos(W t) + i (s_m - s_k) c / W sin(W t)]`, `W = sqrt(c^2 (s_m - s_k)^2 + |g1|^2)`,
/// for a pulse of rotation angle `|g1| t = rotation` addressing row `m`, seen on row `k`.
pub fn offres_phase_closed_form(
    m: usize,
    k: usize,
    rotation: f64,
    params: &TrapParams,
    convention: DetuningConvention,
) -> f64 {
    let g = params.g1;
    let tau = rotation / g;
    let d = convention.factor() * (stark_shift(m, params) - stark_shift(k, params));
    let omega = (d * d + g * g).sqrt();
    let (sin, cos) = (omega * tau).sin_cos();
    Complex64::new(cos, d / omega * sin).arg()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::Dims;
    use std::f64::consts::FRAC_PI_2;

    fn params() -> TrapParams {
        TrapParams::new(2).with_chi_ratio(20.0)
    }

    #[test]
    fn carrier_half_period_transfers_population() {
        let p = params();
        let d = p.dims();
        for (m, n) in [(0, 0), (1, 2), (3, 1)] {
            let s = StateVector::basis_state(d, m, n, Level::C).unwrap();
            let out = apply_pulse(
                &s,
                &PulseOp::carrier(Complex64::new(0.0, -FRAC_PI_2)),
                &p,
                Mode::Full,
            )
            .unwrap();
            assert!((out.amplitude(m, n, Level::B).norm() - 1.0).abs() < 1e-15);
            assert!(out.amplitude(m, n, Level::C).norm() < 1e-15);
        }
    }

    #[test]
    fn zero_area_is_identity() {
        let p = params();
        let s = StateVector::basis_state(p.dims(), 1, 1, Level::A).unwrap();
        for pulse in [
            PulseOp::stark(1, ZERO, &p),
            PulseOp::carrier(ZERO),
            PulseOp::sideband_x(ZERO),
            PulseOp::sideband_y(ZERO),
        ] {
            for mode in [Mode::Ideal, Mode::Full] {
                assert_eq!(apply_pulse(&s, &pulse, &p, mode).unwrap(), s);
            }
        }
    }

    #[test]
    fn two_level_matches_rotation_formula() {
        let u = two_level_propagator(0.0, Complex64::new(FRAC_PI_2, 0.0));
        assert!((u[0][1] - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        assert!(u[0][0].norm() < 1e-15);
        let u = two_level_propagator(0.3, Complex64::new(0.4, -0.2));
        let uu = [
            [
                u[0][0].conj() * u[0][0] + u[1][0].conj() * u[1][0],
                u[0][0].conj() * u[0][1] + u[1][0].conj() * u[1][1],
            ],
            [
                u[0][1].conj() * u[0][0] + u[1][1].conj() * u[1][0],
                u[0][1].conj() * u[0][1] + u[1][1].conj() * u[1][1],
            ],
        ];
        assert!((uu[0][0] - ONE).norm() < 1e-15 && (uu[1][1] - ONE).norm() < 1e-15);
        assert!(uu[0][1].norm() < 1e-15 && uu[1][0].norm() < 1e-15);
    }

    #[test]
    fn resonant_stark_flip_only_on_addressed_row() {
        let p = params();
        let d = p.dims();
        let mut amps = vec![ZERO; d.len()];
        amps[d.index(0, 0, Level::A)] = Complex64::new(0.6, 0.0);
        amps[d.index(2, 1, Level::A)] = Complex64::new(0.0, 0.8);
        let s = StateVector::from_amplitudes(d, amps).unwrap();
        let out = apply_pulse(
            &s,
            &PulseOp::stark(2, Complex64::new(FRAC_PI_2, 0.0), &p),
            &p,
            Mode::Ideal,
        )
        .unwrap();
        assert!((out.amplitude(2, 1, Level::B).norm() - 0.8).abs() < 1e-14);
        assert!((out.amplitude(0, 0, Level::A).norm() - 0.6).abs() < 1e-15);
        assert_eq!(out.amplitude(0, 0, Level::B), ZERO);
        assert!((out.norm_sqr() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn stark_matches_expm_in_full_mode() {
        let p = TrapParams::new(2).with_chi_ratio(3.0);
        let d = p.dims();
        let amps: Vec<Complex64> = (0..d.len())
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.91).cos()))
            .collect();
        let s = StateVector::from_amplitudes(d, amps)
            .unwrap()
            .normalized()
            .unwrap();
        let area = Complex64::new(0.7, -1.1);
        let pulse = PulseOp::stark(1, area, &p);
        let block = apply_pulse(&s, &pulse, &p, Mode::Full).unwrap();
        let dense = expm_reference(pulse.channel, &p, pulse.delta_y.unwrap(), area, &s).unwrap();
        let err = block
            .amplitudes()
            .iter()
            .zip(dense.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "max deviation {err}");
    }

    #[test]
    fn offres_phase_edge_cases() {
        let p = TrapParams::new(4).with_eta(0.0, 0.0).with_chi_ratio(100.0);
        // degenerate rows: plain resonant diagonal cos(theta)
        let phi = channel1_offres_phase(0, 3, Complex64::new(0.3, 0.0), &p);
        assert!(phi.abs() < 1e-15);
        let phi = channel1_offres_phase(0, 3, Complex64::new(2.0, 0.0), &p);
        assert!((phi.abs() - std::f64::consts::PI).abs() < 1e-12);

        let p = TrapParams::new(4).with_chi_ratio(100.0);
        let tiny = channel1_offres_phase(0, 3, Complex64::new(1e-12, 0.0), &p);
        assert!(tiny.abs() < 1e-8);
    }

    #[test]
    fn closed_form_unit_convention_is_block_diagonal() {
        let p = TrapParams::new(5).with_chi_ratio(100.0);
        for (m, k) in [(0, 3), (4, 5), (2, 1)] {
            let exact = channel1_offres_phase(m, k, Complex64::new(FRAC_PI_2, 0.0), &p);
            let unit = offres_phase_closed_form(m, k, FRAC_PI_2, &p, DetuningConvention::Unit);
            let half = offres_phase_closed_form(m, k, FRAC_PI_2, &p, DetuningConvention::Half);
            assert!((exact - unit).abs() < 1e-12);
            assert!((exact - half).abs() > 1e-6);
        }
    }

    #[test]
    fn rejects_bad_pulses() {
        let p = params();
        let s = StateVector::zeros(p.dims());
        let bad = PulseOp {
            channel: Channel::Stark1 { row_m: 1 },
            area: ONE,
            delta_y: None,
        };
        assert!(matches!(
            apply_pulse(&s, &bad, &p, Mode::Full),
            Err(Error::Contract(_))
        ));
        let mut wrong = PulseOp::stark(1, ONE, &p);
        wrong.delta_y = Some(0.0);
        assert!(wrong.validate(&p).is_err());
        assert!(PulseOp::stark(1, ONE, &p).validate(&p).is_ok());
        let other = StateVector::zeros(Dims::square(2));
        assert!(matches!(
            apply_pulse(&other, &PulseOp::carrier(ONE), &p, Mode::Full),
            Err(Error::Dimension(_))
        ));
    }
}
