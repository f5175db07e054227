//! The compensation phase of every row, as applied and as predicted by the
//! closed-form spectator phase under both detuning conventions.

use ionsynth::{synthesize, targets, TrapParams};

fn main() -> ionsynth::Result<()> {
    let ratio = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(100.0);
    let params = TrapParams::new(5).with_eta(0.4, 0.4).with_chi_ratio(ratio);
    let schedule = synthesize(&targets::qft(6)?, &params)?;

    println!(" m    applied     unit       half   reference");
    for e in &schedule.phase_ledger {
        println!(
            "{:>2} {:>10.6} {:>10.6} {:>10.6} {:>10.6}",
            e.m, e.phi_applied, e.phi_closed_unit, e.phi_closed_half, e.phi_reference_unit
        );
    }
    println!("matching convention: {:?}", schedule.matching_convention);
    Ok(())
}
