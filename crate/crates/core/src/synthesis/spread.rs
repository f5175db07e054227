//! Spreading `|m, 0, b>` over one row of the lattice.
//!
//! The pulse areas come from the inverse task: starting from the target
//! superposition `sum_n v_n |m, n, b>`, the highest occupied rung is emptied
//! with a y-sideband pulse into `|n-1, c>`, that in turn with a carrier pulse
//! into `|n-1, b>`, and so on down to the vacuum. Reversing that sequence and
//! negating every area gives the forward preparation.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::iontools::{sideband_coupling, TrapParams};
use crate::propagator::{two_level_propagator, PulseOp};

/// Amplitudes below this are treated as exact zeros by the sweep.
pub const ZERO_AMPLITUDE: f64 = 1e-12;
/// Largest amplitude tolerated in an emptied slot.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Rotation `w = theta e^{i phi}` whose resonant propagator
/// `exp(-i [[0, w], [conj(w), 0]])`, acting on `(keep, kill)`, empties `kill`.
///
/// `theta` lies in `[0, pi/2]`. When `keep` is zero the phase is set to 0.
pub fn zeroing_pulse(keep: Complex64, kill: Complex64) -> Result<Complex64> {
    let (p, q) = (keep.norm(), kill.norm());
    if p <= ZERO_AMPLITUDE && q <= ZERO_AMPLITUDE {
        return Err(Error::DegenerateInput(
            "zeroing pulse needs at least one non-zero amplitude".into(),
        ));
    }
    if q <= ZERO_AMPLITUDE {
        return Ok(ZERO);
    }
    if p <= ZERO_AMPLITUDE {
        return Ok(Complex64::new(std::f64::consts::FRAC_PI_2, 0.0));
    }
    let theta = q.atan2(p);
    let phi = keep.arg() - kill.arg() + std::f64::consts::FRAC_PI_2;
    Ok(Complex64::from_polar(theta, phi))
}

/// Solved preparation of one row.
#[derive(Clone, Debug)]
pub struct RowSpread {
    pub m: usize,
    /// Forward pulses in execution order (carrier first).
    pub pulses: Vec<PulseOp>,
    /// Areas of the inverse sweep, in the order they were solved.
    pub inverse_areas: Vec<Complex64>,
    /// Magnitude left in each emptied slot right after its zeroing pulse.
    pub residuals: Vec<f64>,
    /// Phase `gamma` with `inverse sweep (target) = e^{i gamma} |0, b>`.
    pub spread_phase: f64,
}

/// One row of the lattice restricted to levels `b` and `c`.
struct Ladder {
    b: Vec<Complex64>,
    c: Vec<Complex64>,
    kappa: Vec<f64>,
}

impl Ladder {
    fn carrier(&mut self, area: Complex64) {
        let u = two_level_propagator(0.0, area);
        for n in 0..self.b.len() {
            let (x, y) = (self.b[n], self.c[n]);
            self.b[n] = u[0][0] * x + u[0][1] * y;
            self.c[n] = u[1][0] * x + u[1][1] * y;
        }
    }

    fn sideband(&mut self, area: Complex64) {
        for n in 0..self.b.len() - 1 {
            let u = two_level_propagator(0.0, area * self.kappa[n]);
            let (x, y) = (self.b[n + 1], self.c[n]);
            self.b[n + 1] = u[0][0] * x + u[0][1] * y;
            self.c[n] = u[1][0] * x + u[1][1] * y;
        }
    }
}

fn sideband_area(h: Complex64, kappa: f64, n: usize) -> Result<Complex64> {
    if kappa.abs() <= ZERO_AMPLITUDE {
        return Err(Error::Contract(format!(
            "y sideband coupling vanishes between n = {n} and n = {}",
            n + 1
        )));
    }
    Ok(h / kappa)
}

/// Solves the pulses that map `|m, 0, b>` onto `sum_n column[n] |m, n, b>`
/// (up to the returned spread phase).
pub fn plan_row_spread(column: &[Complex64], m: usize, params: &TrapParams) -> Result<RowSpread> {
    let n_max = params.n_max;
    if column.len() != n_max + 1 {
        return Err(Error::Dimension(format!(
            "column has {} entries, register holds {}",
            column.len(),
            n_max + 1
        )));
    }
    let norm: f64 = column.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > RESIDUAL_TOLERANCE {
        return Err(Error::Contract(format!(
            "column {m} has norm {norm}, expected 1"
        )));
    }
    let d = params.phonon_dim();
    let mut ladder = Ladder {
        b: vec![ZERO; d],
        c: vec![ZERO; d],
        kappa: (0..d).map(|n| sideband_coupling(n, params.eta_y)).collect(),
    };
    ladder.b[..=n_max].copy_from_slice(column);

    let mut inverse = Vec::with_capacity(2 * n_max);
    let mut residuals = Vec::with_capacity(2 * n_max);
    for k in (1..=n_max).rev() {
        // |k, b> into |k-1, c>; the block is ordered (b_k, c_{k-1}) so the
        // zeroing rotation is the conjugate of the physical coupling.
        let w = zeroing_pulse(ladder.c[k - 1], ladder.b[k]).unwrap_or(ZERO);
        let area = sideband_area(w.conj(), ladder.kappa[k - 1], k - 1)?;
        ladder.sideband(area);
        residuals.push(ladder.b[k].norm());
        inverse.push(PulseOp::sideband_y(area));

        let w = zeroing_pulse(ladder.b[k - 1], ladder.c[k - 1]).unwrap_or(ZERO);
        ladder.carrier(w);
        residuals.push(ladder.c[k - 1].norm());
        inverse.push(PulseOp::carrier(w));
    }

    let leftover = ladder.b[1..]
        .iter()
        .chain(&ladder.c)
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let worst = residuals.iter().copied().fold(leftover, f64::max);
    if worst > RESIDUAL_TOLERANCE {
        return Err(Error::Internal(format!(
            "row {m}: inverse sweep left amplitude {worst:e} outside the vacuum"
        )));
    }

    let inverse_areas = inverse.iter().map(|p| p.area).collect();
    let pulses = inverse
        .into_iter()
        .rev()
        .map(|p| PulseOp { area: -p.area, ..p })
        .collect();
    Ok(RowSpread {
        m,
        pulses,
        inverse_areas,
        residuals,
        spread_phase: ladder.b[0].arg(),
    })
}
