//! Closed-form block propagation against a dense Hermitian eigendecomposition.

use ionsynth::propagator::{apply_pulse, expm_reference};
use ionsynth::{Level, Mode, PulseOp, StateVector, TrapParams};
use num_complex::Complex64;

fn main() -> ionsynth::Result<()> {
    let p = TrapParams::new(3).with_eta(0.4, 0.55).with_chi_ratio(40.0);
    let dims = p.dims();
    let amps = (0..dims.len())
        .map(|i| Complex64::from_polar(1.0 + (i % 5) as f64, 0.37 * i as f64))
        .collect();
    let state = StateVector::from_amplitudes(dims, amps)?.normalized()?;

    let area = Complex64::from_polar(1.3, 0.8);
    let pulses = [
        PulseOp::stark(2, area, &p),
        PulseOp::carrier(area),
        PulseOp::sideband_y(area),
        PulseOp::sideband_x(area),
    ];
    for pulse in &pulses {
        let block = apply_pulse(&state, pulse, &p, Mode::Full)?;
        let dense = expm_reference(
            pulse.channel,
            &p,
            pulse.delta_y.unwrap_or(0.0),
            pulse.area,
            &state,
        )?;
        let gap = block
            .amplitudes()
            .iter()
            .zip(dense.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        println!("{:<11} max difference {gap:.2e}", pulse.channel.name());
    }

    // spectator rows keep their population in the ideal limit only
    let flip = PulseOp::stark(0, Complex64::new(std::f64::consts::FRAC_PI_2, 0.0), &p);
    let spectator = StateVector::basis_state(dims, 1, 0, Level::A)?;
    for mode in [Mode::Full, Mode::Ideal] {
        let out = apply_pulse(&spectator, &flip, &p, mode)?;
        println!(
            "{:<5} row 1 leaks {:.3e} into b",
            mode.name(),
            out.amplitude(1, 0, Level::B).norm_sqr()
        );
    }
    Ok(())
}
