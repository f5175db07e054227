//! Compile the six-level Fourier transform and run it on the uniform input.

use ionsynth::harness::{run, schedule_to_json, uniform_input};
use ionsynth::{synthesize, targets, Mode, TrapParams};

fn main() -> ionsynth::Result<()> {
    let v = targets::qft(6)?;
    let params = TrapParams::new(5).with_eta(0.4, 0.4).with_chi_ratio(500.0);
    let schedule = synthesize(&v, &params)?;
    println!(
        "{} pulses ({} spreading, {} superposing)",
        schedule.pulses.len(),
        schedule.step_a().len(),
        schedule.step_b().len()
    );

    let input = uniform_input(6);
    for mode in [Mode::Ideal, Mode::Full] {
        let r = run(&schedule, &v, &input, mode)?;
        println!(
            "{:<5}  fidelity {:.8}  success {:.8}  guard {:.2e}",
            mode.name(),
            r.fidelity_vs_ideal.unwrap_or(f64::NAN),
            r.success_prob,
            r.guard_occupancy
        );
    }

    if let Some(path) = std::env::args().nth(1) {
        std::fs::write(&path, schedule_to_json(&schedule)?).expect("writable path");
        println!("schedule written to {path}");
    }
    Ok(())
}
