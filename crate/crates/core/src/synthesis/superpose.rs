//! Superposing the rows of the lattice into the `m = 0` row.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::iontools::{sideband_coupling, TrapParams};
use crate::propagator::PulseOp;

/// Mixing angles `theta_0 .. theta_{N-1}` for rows weighted by `weights`.
///
/// After the mixing pulse on row `m` the carried `b` amplitude holds
/// `sum_{k>=m} w_k x_k / W_m`, `W_m^2 = sum_{k>=m} w_k^2`, which needs
/// `tan(theta_m) = w_m / W_{m+1}`. Equal weights give `arctan(1/sqrt(N-m))`.
pub fn mixing_angles(weights: &[f64]) -> Vec<f64> {
    let n = weights.len().saturating_sub(1);
    let mut tail = vec![0.0; weights.len() + 1];
    for m in (0..weights.len()).rev() {
        tail[m] = tail[m + 1] + weights[m] * weights[m];
    }
    (0..n)
        .map(|m| weights[m].atan2(tail[m + 1].sqrt()))
        .collect()
}

/// Pulses of the superposing stage in execution order: the full flip of row
/// N, then for `m = N-1 .. 0` the x sideband, the carrier and the mixing flip.
pub fn plan_step_b(params: &TrapParams, mixing_angles: &[f64]) -> Result<Vec<PulseOp>> {
    let n = params.n_max;
    if mixing_angles.len() != n {
        return Err(Error::Dimension(format!(
            "N = {n} needs {n} mixing angles, got {}",
            mixing_angles.len()
        )));
    }
    let minus_i = Complex64::new(0.0, -1.0);
    let mut pulses = Vec::with_capacity(3 * n + 1);
    pulses.push(PulseOp::stark(n, minus_i * FRAC_PI_2, params));
    for m in (0..n).rev() {
        let kappa = sideband_coupling(m, params.eta_x);
        if kappa.abs() <= 1e-12 {
            return Err(Error::Contract(format!(
                "x sideband coupling vanishes between m = {m} and m = {}",
                m + 1
            )));
        }
        pulses.push(PulseOp::sideband_x(minus_i * FRAC_PI_2 / kappa));
        pulses.push(PulseOp::carrier(minus_i * FRAC_PI_2));
        pulses.push(PulseOp::stark(m, minus_i * mixing_angles[m], params));
    }
    Ok(pulses)
}
