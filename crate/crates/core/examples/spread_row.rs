//! Solve the carrier/sideband pulses that write one column of a target into
//! a row of the phonon lattice, then check them by forward simulation.

use ionsynth::propagator::apply_pulse;
use ionsynth::synthesis::plan_row_spread;
use ionsynth::{Level, Mode, StateVector, TrapParams};
use num_complex::Complex64;

fn main() -> ionsynth::Result<()> {
    let params = TrapParams::new(3).with_eta(0.4, 0.4);
    let raw = [
        Complex64::new(0.5, 0.1),
        Complex64::new(-0.2, 0.4),
        Complex64::new(0.0, -0.6),
        Complex64::new(0.3, 0.3),
    ];
    let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let column: Vec<Complex64> = raw.iter().map(|z| z / norm).collect();

    let m = 2;
    let row = plan_row_spread(&column, m, &params)?;
    for (i, p) in row.pulses.iter().enumerate() {
        println!(
            "{i:>2}  {:<11} area {:+.6} {:+.6}i",
            p.channel.name(),
            p.area.re,
            p.area.im
        );
    }
    println!("spread phase {:.6}", row.spread_phase);

    let mut state = StateVector::basis_state(params.dims(), m, 0, Level::B)?;
    for p in &row.pulses {
        state = apply_pulse(&state, p, &params, Mode::Full)?;
    }
    let turn = Complex64::from_polar(1.0, row.spread_phase);
    for (n, v) in column.iter().enumerate() {
        let got = state.amplitude(m, n, Level::B) * turn;
        println!("n = {n}: want {v:.6}, got {got:.6}");
    }
    Ok(())
}
