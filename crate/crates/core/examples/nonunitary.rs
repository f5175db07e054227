//! A non-unitary target is still realized exactly after normalization, but
//! the success probability now depends on the input.

use ionsynth::harness::run;
use ionsynth::{synthesize, Mode, TargetOperator, TrapParams};
use nalgebra::DMatrix;
use num_complex::Complex64;

fn main() -> ionsynth::Result<()> {
    let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        Complex64::new(1.0, 0.0),
        Complex64::new(0.5, 0.0),
    ]));
    let v = TargetOperator::from_matrix("diag(1, 1/2)", m)?;
    let schedule = synthesize(&v, &TrapParams::new(1))?;
    println!(
        "unitary: {}, |V|_F^2 = {}",
        v.unitary,
        v.frobenius_norm().powi(2)
    );

    for theta in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let angle = theta * std::f64::consts::FRAC_PI_2;
        let c = [
            Complex64::new(angle.cos(), 0.0),
            Complex64::new(angle.sin(), 0.0),
        ];
        let r = run(&schedule, &v, &c, Mode::Ideal)?;
        println!(
            "input ({:.3}, {:.3}): fidelity {:.12}, success {:.6}",
            c[0].re,
            c[1].re,
            r.fidelity_vs_ideal.unwrap_or(f64::NAN),
            r.success_prob
        );
    }
    Ok(())
}
