//! Trap parameters, special functions and the four effective interaction
//! Hamiltonians of an ion with two vibrational modes and three internal levels.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fockspace::{Dims, Level};

/// Dense operator over the composite basis, indexed like [`Dims::index`].
pub type OperatorMatrix = DMatrix<Complex64>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrapParams {
    /// Highest addressed phonon number N; the register holds N + 1 levels.
    pub n_max: usize,
    pub eta_x: f64,
    pub eta_y: f64,
    /// Stark strength, in the same units as the coupling magnitudes.
    pub chi: f64,
    pub g1: f64,
    pub g2: f64,
    pub g3: f64,
    pub g4: f64,
    /// Extra phonon levels kept above N in both modes.
    pub guard: usize,
}

impl Default for TrapParams {
    fn default() -> Self {
        TrapParams {
            n_max: 5,
            eta_x: 0.4,
            eta_y: 0.4,
            chi: 100.0,
            g1: 1.0,
            g2: 1.0,
            g3: 1.0,
            g4: 1.0,
            guard: 2,
        }
    }
}

impl TrapParams {
    pub fn new(n_max: usize) -> Self {
        TrapParams {
            n_max,
            ..TrapParams::default()
        }
    }

    pub fn with_eta(mut self, eta_x: f64, eta_y: f64) -> Self {
        self.eta_x = eta_x;
        self.eta_y = eta_y;
        self
    }

    /// Sets `chi` so that `chi / |g1|` equals `ratio`.
    pub fn with_chi_ratio(mut self, ratio: f64) -> Self {
        self.chi = ratio * self.g1;
        self
    }

    pub fn chi_ratio(&self) -> f64 {
        self.chi / self.g1
    }

    pub fn register_dim(&self) -> usize {
        self.n_max + 1
    }

    /// Phonon truncation including guard levels.
    pub fn phonon_dim(&self) -> usize {
        self.n_max + 1 + self.guard
    }

    pub fn dims(&self) -> Dims {
        Dims::square(self.phonon_dim())
    }

    pub fn coupling(&self, channel: Channel) -> f64 {
        match channel {
            Channel::Stark1 { .. } => self.g1,
            Channel::SidebandY2 => self.g2,
            Channel::Carrier3 => self.g3,
            Channel::SidebandX4 => self.g4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.eta_x, self.eta_y, self.chi, self.g1, self.g2, self.g3, self.g4,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Contract("trap parameters must be finite".into()));
        }
        if self.eta_x < 0.0 || self.eta_y < 0.0 {
            return Err(Error::Contract("Lamb-Dicke parameters must be >= 0".into()));
        }
        if self.chi <= 0.0 {
            return Err(Error::Contract("Stark strength chi must be > 0".into()));
        }
        if [self.g1, self.g2, self.g3, self.g4]
            .iter()
            .any(|g| *g <= 0.0)
        {
            return Err(Error::Contract("coupling magnitudes must be > 0".into()));
        }
        if self.guard < 1 {
            return Err(Error::Contract(
                "at least one guard level is required".into(),
            ));
        }
        Ok(())
    }
}

/// One of the four laser interaction channels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Channel {
    /// Stark-shift-addressed `a <-> b` flip on the row with `row_m` x-phonons.
    Stark1 { row_m: usize },
    /// Red sideband on the y mode: `|n, c> <-> |n+1, b>`.
    SidebandY2,
    /// Carrier: `b <-> c`, no phonon change.
    Carrier3,
    /// Red sideband on the x mode: `|m, c> <-> |m+1, b>`.
    SidebandX4,
}

impl Channel {
    pub fn name(&self) -> &'static str {
        match self {
            Channel::Stark1 { .. } => "stark1",
            Channel::SidebandY2 => "sideband_y",
            Channel::Carrier3 => "carrier",
            Channel::SidebandX4 => "sideband_x",
        }
    }
}

/// Generalized Laguerre polynomial `L^alpha_m(x)` by upward recurrence.
pub fn laguerre(m: usize, alpha: u32, x: f64) -> f64 {
    let a = alpha as f64;
    let mut prev = 1.0;
    if m == 0 {
        return prev;
    }
    let mut cur = 1.0 + a - x;
    for k in 1..m {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 + a - x) * cur - (k + a) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Dynamical Stark shift `s_m = chi [1 + exp(-2 eta_x^2) L0_m(4 eta_x^2)]`.
pub fn stark_shift(m: usize, params: &TrapParams) -> f64 {
    let eta2 = params.eta_x * params.eta_x;
    params.chi * (1.0 + (-2.0 * eta2).exp() * laguerre(m, 0, 4.0 * eta2))
}

/// Stark shifts for every x-phonon row of the truncated space.
pub fn stark_shifts(params: &TrapParams) -> Vec<f64> {
    (0..params.phonon_dim())
        .map(|m| stark_shift(m, params))
        .collect()
}

/// Nonlinear `|n> <-> |n+1>` sideband element `exp(-eta^2/2) L1_n(eta^2) / sqrt(n+1)`.
///
/// Reduces to `sqrt(n+1)` in the Lamb-Dicke limit. The sign is kept.
pub fn sideband_coupling(n: usize, eta: f64) -> f64 {
    let eta2 = eta * eta;
    (-eta2 / 2.0).exp() * laguerre(n, 1, eta2) / ((n + 1) as f64).sqrt()
}

/// Dense Hamiltonian of a channel with the coupling magnitude taken from `params`.
pub fn build_hamiltonian(channel: Channel, params: &TrapParams, delta_y: f64) -> OperatorMatrix {
    let g = Complex64::new(params.coupling(channel), 0.0);
    build_hamiltonian_with_coupling(channel, params, delta_y, g)
}

/// Dense Hamiltonian with an explicit complex coupling `g_p`.
///
/// `delta_y` only enters the Stark channel. Sideband couplings that would
/// leave the truncated space are dropped.
pub fn build_hamiltonian_with_coupling(
    channel: Channel,
    params: &TrapParams,
    delta_y: f64,
    g: Complex64,
) -> OperatorMatrix {
    hamiltonian_on(params.dims(), channel, params, delta_y, g)
}

/// Same as [`build_hamiltonian_with_coupling`] on an arbitrary square phonon truncation.
pub fn hamiltonian_on(
    dims: Dims,
    channel: Channel,
    params: &TrapParams,
    delta_y: f64,
    g: Complex64,
) -> OperatorMatrix {
    let d = dims.dx;
    let mut h = OperatorMatrix::zeros(dims.len(), dims.len());
    fn couple(h: &mut OperatorMatrix, upper: usize, lower: usize, w: Complex64) {
        h[(upper, lower)] += w;
        h[(lower, upper)] += w.conj();
    }
    match channel {
        Channel::Stark1 { .. } => {
            for m in 0..d {
                let detuning = delta_y + stark_shift(m, params);
                for n in 0..d {
                    let a = dims.index(m, n, Level::A);
                    let b = dims.index(m, n, Level::B);
                    couple(&mut h, a, b, g);
                    h[(a, a)] += Complex64::new(detuning, 0.0);
                    h[(b, b)] -= Complex64::new(detuning, 0.0);
                }
            }
        }
        Channel::SidebandY2 => {
            for m in 0..d {
                for n in 0..d - 1 {
                    let w = g * sideband_coupling(n, params.eta_y);
                    couple(
                        &mut h,
                        dims.index(m, n + 1, Level::B),
                        dims.index(m, n, Level::C),
                        w,
                    );
                }
            }
        }
        Channel::Carrier3 => {
            for m in 0..d {
                for n in 0..d {
                    couple(
                        &mut h,
                        dims.index(m, n, Level::B),
                        dims.index(m, n, Level::C),
                        g,
                    );
                }
            }
        }
        Channel::SidebandX4 => {
            for m in 0..d - 1 {
                let w = g * sideband_coupling(m, params.eta_x);
                for n in 0..d {
                    couple(
                        &mut h,
                        dims.index(m + 1, n, Level::B),
                        dims.index(m, n, Level::C),
                        w,
                    );
                }
            }
        }
    }
    h
}
