//! In the infinite-Stark limit the schedule is exact: every Haar-random
//! unitary is reproduced with success probability 1/(N+1), whatever the input.

use ionsynth::harness::run;
use ionsynth::{synthesize, targets, Mode, TrapParams};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn main() -> ionsynth::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for dim in 2..=8 {
        let params = TrapParams::new(dim - 1);
        let mut worst: f64 = 0.0;
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for seed in 0..5 {
            let v = targets::random_unitary(dim, seed)?;
            let schedule = synthesize(&v, &params)?;
            for _ in 0..20 {
                let c: Vec<Complex64> = (0..dim)
                    .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                    .collect();
                let norm = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                let c: Vec<Complex64> = c.iter().map(|z| z / norm).collect();
                let r = run(&schedule, &v, &c, Mode::Ideal)?;
                worst = worst.max(1.0 - r.fidelity_vs_ideal.unwrap_or(0.0));
                lo = lo.min(r.success_prob);
                hi = hi.max(r.success_prob);
            }
        }
        println!(
            "N+1 = {dim}: max infidelity {worst:.1e}, success in [{lo:.12}, {hi:.12}] (1/(N+1) = {:.12})",
            1.0 / dim as f64
        );
    }
    Ok(())
}
