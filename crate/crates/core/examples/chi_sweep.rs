//! Fidelity of the Fourier transform and the cyclic shift on six levels as
//! the Stark strength grows relative to the channel-1 coupling.

use ionsynth::harness::{sweep_chi, uniform_input};
use ionsynth::{targets, Mode, TrapParams};

fn main() -> ionsynth::Result<()> {
    let ratios = [20.0, 50.0, 100.0, 200.0, 500.0, 1000.0, 1e4, 1e6];
    let base = TrapParams::new(5).with_eta(0.4, 0.4);
    let input = uniform_input(6);
    for target in [targets::qft(6)?, targets::cyclic_rotation(6)?] {
        println!("{}", target.name);
        for row in sweep_chi(&target, &ratios, &input, &base, Mode::Full)? {
            println!(
                "  chi/g1 = {:>9}  fidelity = {:.6}  success = {:.6}",
                row.chi_ratio,
                row.fidelity.unwrap_or(f64::NAN),
                row.success_prob.unwrap_or(f64::NAN)
            );
        }
    }
    Ok(())
}
