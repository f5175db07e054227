//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use ionsynth::harness::{self, initial_state, run, simulate, sweep_chi, uniform_input, SweepRow};
use ionsynth::propagator::{apply_pulse, expm_propagator, expm_reference, DetuningConvention};
use ionsynth::synthesis::{phase_distance, synthesize_with_record};
use ionsynth::targets::{self, TargetOperator};
use ionsynth::{synthesize, Level, Mode, PulseOp, StateVector, TrapParams};

const RATIOS: [f64; 6] = [20.0, 50.0, 100.0, 200.0, 500.0, 1000.0];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn random_input(rng: &mut ChaCha8Rng, dim: usize) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter().map(|z| z / norm).collect()
}

/// Worst values over the ideal-mode exactness runs.
#[derive(Default)]
struct IdealStats {
    min_fidelity: f64,
    max_prob_error: f64,
    max_prob_spread: f64,
    max_guard: f64,
    runs: usize,
    elapsed: Duration,
}

fn ideal_exactness() -> ionsynth::Result<IdealStats> {
    let start = Instant::now();
    let mut stats = IdealStats {
        min_fidelity: 1.0,
        ..IdealStats::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for dim in 2..=8 {
        let p = TrapParams::new(dim - 1);
        for k in 0..5u64 {
            let v = targets::random_unitary(dim, 100 * dim as u64 + k)?;
            let s = synthesize(&v, &p)?;
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for _ in 0..20 {
                let input = random_input(&mut rng, dim);
                let r = run(&s, &v, &input, Mode::Ideal)?;
                stats.min_fidelity = stats.min_fidelity.min(r.fidelity_vs_ideal.unwrap_or(0.0));
                stats.max_prob_error = stats
                    .max_prob_error
                    .max((r.success_prob - 1.0 / dim as f64).abs());
                stats.max_guard = stats.max_guard.max(r.guard_occupancy);
                lo = lo.min(r.success_prob);
                hi = hi.max(r.success_prob);
                stats.runs += 1;
            }
            stats.max_prob_spread = stats.max_prob_spread.max(hi - lo);
        }
    }
    stats.elapsed = start.elapsed();
    Ok(stats)
}

/// Largest deviations from the intermediate amplitudes after each stage, and the worst guard occupancy.
fn intermediate_states() -> ionsynth::Result<(f64, f64, f64)> {
    let p = TrapParams::new(4);
    let v = targets::random_unitary(5, 77)?;
    let s = synthesize(&v, &p)?;
    let c = random_input(&mut ChaCha8Rng::seed_from_u64(78), 5);
    let start = initial_state(&p, &c)?;
    let after_a = simulate(&s, &start, Mode::Ideal, 0..s.step_a_len)?;
    let after_b = simulate(&s, &after_a, Mode::Ideal, s.step_a_len..s.pulses.len())?;
    let mut err_a: f64 = 0.0;
    for (m, cm) in c.iter().enumerate() {
        for n in 0..5 {
            let expected = (v.get(n, m) * cm).norm();
            err_a = err_a.max((after_a.amplitude(m, n, Level::A).norm() - expected).abs());
        }
    }
    let out = v.apply(&c)?;
    let mut err_b: f64 = 0.0;
    for (n, z) in out.iter().enumerate() {
        err_b =
            err_b.max((after_b.amplitude(0, n, Level::B).norm() - z.norm() / 5f64.sqrt()).abs());
    }
    let guard = [after_a.occupancy_from(5), after_b.occupancy_from(5)]
        .into_iter()
        .fold(0.0, f64::max);
    Ok((err_a, err_b, guard))
}

fn reference_sweep(target: &TargetOperator) -> ionsynth::Result<(Vec<SweepRow>, Duration)> {
    let start = Instant::now();
    let base = TrapParams::new(5).with_eta(0.4, 0.4);
    let rows = sweep_chi(target, &RATIOS, &uniform_input(6), &base, Mode::Full)?;
    Ok((rows, start.elapsed()))
}

fn sweep_trend(target: &TargetOperator) -> ionsynth::Result<Outcome> {
    let (rows, elapsed) = reference_sweep(target)?;
    let fid = |i: usize| rows[i].fidelity.unwrap_or(f64::NAN);
    let (low, high) = (fid(0), fid(rows.len() - 1));
    let curve: Vec<String> = rows
        .iter()
        .map(|r| format!("{:.4}", r.fidelity.unwrap_or(f64::NAN)))
        .collect();
    Ok(outcome(
        high > low && high >= 0.95 && elapsed.as_secs_f64() < 120.0,
        format!(
            "{}: F(20) = {low:.6}, F(1000) = {high:.6}; curve [{}]; {:.2} s",
            target.name,
            curve.join(", "),
            elapsed.as_secs_f64()
        ),
    ))
}

fn propagator_oracle() -> ionsynth::Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut worst_gap, mut worst_norm, mut worst_unitarity): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for i in 0..100 {
        let p = TrapParams::new(rng.random_range(1..=4))
            .with_eta(rng.random_range(0.0..0.8), rng.random_range(0.0..0.8))
            .with_chi_ratio(rng.random_range(5.0..500.0));
        let area = Complex64::from_polar(rng.random_range(0.0..4.0), rng.random_range(-3.2..3.2));
        let pulse = match i % 4 {
            0 => PulseOp::stark(rng.random_range(0..=p.n_max), area, &p),
            1 => PulseOp::sideband_y(area),
            2 => PulseOp::carrier(area),
            _ => PulseOp::sideband_x(area),
        };
        let dims = p.dims();
        let amps: Vec<Complex64> = (0..dims.len())
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let state = StateVector::from_amplitudes(dims, amps)?.normalized()?;
        let block = apply_pulse(&state, &pulse, &p, Mode::Full)?;
        let delta = pulse.delta_y.unwrap_or(0.0);
        let dense = expm_reference(pulse.channel, &p, delta, area, &state)?;
        let gap = block
            .amplitudes()
            .iter()
            .zip(dense.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        worst_gap = worst_gap.max(gap);
        worst_norm = worst_norm
            .max((block.norm_sqr() - 1.0).abs())
            .max((dense.norm_sqr() - 1.0).abs());
        let u = expm_propagator(pulse.channel, &p, delta, area)?;
        let n = u.nrows();
        worst_unitarity =
            worst_unitarity.max((u.adjoint() * &u - DMatrix::<Complex64>::identity(n, n)).norm());
    }
    Ok(outcome(
        worst_gap < 1e-10 && worst_norm < 1e-12 && worst_unitarity < 1e-12,
        format!("100 pulses: max |block - expm| = {worst_gap:.2e}, norm drift {worst_norm:.2e}, |U^dag U - I| = {worst_unitarity:.2e}"),
    ))
}

fn non_unitary() -> ionsynth::Result<Outcome> {
    let m = DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.5, 0.0),
        ],
    );
    let v = TargetOperator::from_matrix("diag(1, 1/2)", m)?;
    let s = synthesize(&v, &TrapParams::new(1))?;
    let mut probs = Vec::new();
    let mut min_fid: f64 = 1.0;
    let mut inputs = vec![
        vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    inputs.extend((0..10).map(|_| random_input(&mut rng, 2)));
    for input in &inputs {
        let r = run(&s, &v, input, Mode::Ideal)?;
        min_fid = min_fid.min(r.fidelity_vs_ideal.unwrap_or(0.0));
        probs.push(r.success_prob);
    }
    let margin = (probs[0] - probs[1]).abs();
    Ok(outcome(
        (min_fid - 1.0).abs() < 1e-9 && margin > 0.0,
        format!(
            "min fidelity {min_fid:.12}; P(e0) = {:.6}, P(e1) = {:.6}, margin {margin:.6}",
            probs[0], probs[1]
        ),
    ))
}

fn ledger_convention() -> ionsynth::Result<Outcome> {
    let p = TrapParams::new(5).with_eta(0.4, 0.4).with_chi_ratio(100.0);
    let (s, _) = synthesize_with_record(&targets::qft(6)?, &p)?;
    let gap = |conv: DetuningConvention| {
        s.phase_ledger
            .iter()
            .map(|e| {
                let closed = match conv {
                    DetuningConvention::Unit => e.phi_closed_unit,
                    DetuningConvention::Half => e.phi_closed_half,
                };
                phase_distance(e.phi_applied, closed)
            })
            .fold(0.0, f64::max)
    };
    let (unit, half) = (gap(DetuningConvention::Unit), gap(DetuningConvention::Half));
    let exactly_one = (unit <= 1e-9) != (half <= 1e-9);
    let reported = match s.matching_convention {
        Some(DetuningConvention::Unit) => unit <= 1e-9,
        Some(DetuningConvention::Half) => half <= 1e-9,
        None => false,
    };
    Ok(outcome(
        exactly_one && reported,
        format!(
            "max gap unit = {unit:.2e}, half = {half:.2e}; reported {:?}",
            s.matching_convention
        ),
    ))
}

fn cli_reproduction() -> ionsynth::Result<Outcome> {
    let dir = std::env::temp_dir().join(format!("ionsynth-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| ionsynth::Error::Internal(e.to_string()))?;
    let mut outputs = Vec::new();
    for k in 0..2 {
        let out = dir.join(format!("qft_sweep_{k}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_ionsynth"))
            .args([
                "sweep",
                "--target",
                "qft",
                "--dim",
                "6",
                "--chi-ratios",
                "20,50,100,200,500,1000",
                "--input",
                "uniform",
                "--out",
            ])
            .arg(&out)
            .output()
            .map_err(|e| ionsynth::Error::Internal(e.to_string()))?;
        if !status.status.success() {
            return Ok(outcome(false, format!("exit {:?}", status.status.code())));
        }
        outputs.push(std::fs::read(&out).map_err(|e| ionsynth::Error::Internal(e.to_string()))?);
    }
    let _ = std::fs::remove_dir_all(&dir);
    let (rows, _) = reference_sweep(&targets::qft(6)?)?;
    let in_memory = harness::sweep_csv(&rows)?;
    let lines = outputs[0].iter().filter(|&&b| b == b'\n').count();
    Ok(outcome(
        outputs[0] == outputs[1] && outputs[0] == in_memory && lines == RATIOS.len() + 1,
        format!(
            "two runs identical: {}; matches library sweep: {}; {} bytes, {lines} lines",
            outputs[0] == outputs[1],
            outputs[0] == in_memory,
            outputs[0].len()
        ),
    ))
}

fn report(results: &mut Vec<bool>, number: usize, title: &str, result: ionsynth::Result<Outcome>) {
    let o = result.unwrap_or_else(|e| outcome(false, format!("error: {e}")));
    println!(
        "criterion {number:>2} [{}] {title}: {}",
        if o.pass { "PASS" } else { "FAIL" },
        o.detail
    );
    results.push(o.pass);
}

fn main() {
    let mut results = Vec::new();
    let ideal = ideal_exactness();
    let intermediate = intermediate_states();

    report(
        &mut results,
        1,
        "ideal-mode exactness",
        ideal
            .as_ref()
            .map(|s| {
                outcome(
                    s.min_fidelity >= 1.0 - 1e-9 && s.elapsed.as_secs_f64() < 60.0,
                    format!(
                        "{} runs, min fidelity 1 - {:.2e}, {:.2} s",
                        s.runs,
                        1.0 - s.min_fidelity,
                        s.elapsed.as_secs_f64()
                    ),
                )
            })
            .map_err(|e| ionsynth::Error::Internal(e.to_string())),
    );
    report(
        &mut results,
        2,
        "success probability 1/(N+1)",
        ideal
            .as_ref()
            .map(|s| {
                outcome(
                    s.max_prob_error < 1e-10 && s.max_prob_spread < 1e-10,
                    format!(
                        "max |P - 1/(N+1)| = {:.2e}, max spread over inputs = {:.2e}",
                        s.max_prob_error, s.max_prob_spread
                    ),
                )
            })
            .map_err(|e| ionsynth::Error::Internal(e.to_string())),
    );
    report(
        &mut results,
        3,
        "intermediate amplitudes after each stage",
        intermediate
            .as_ref()
            .map(|(a, b, _)| {
                outcome(
                    *a < 1e-9 && *b < 1e-9,
                    format!("N = 4: spreading error {a:.2e}, superposing error {b:.2e}"),
                )
            })
            .map_err(|e| ionsynth::Error::Internal(e.to_string())),
    );
    report(
        &mut results,
        4,
        "fidelity trend, Fourier transform",
        targets::qft(6).and_then(|v| sweep_trend(&v)),
    );
    report(
        &mut results,
        5,
        "fidelity trend, cyclic shift",
        targets::cyclic_rotation(6).and_then(|v| sweep_trend(&v)),
    );
    report(
        &mut results,
        6,
        "block propagator vs dense exponential",
        propagator_oracle(),
    );
    let guard = match (&ideal, &intermediate) {
        (Ok(s), Ok((_, _, g))) => Ok(outcome(
            s.max_guard.max(*g) < 1e-12,
            format!("max guard occupancy {:.2e}", s.max_guard.max(*g)),
        )),
        _ => Err(ionsynth::Error::Internal("ideal runs failed".into())),
    };
    report(&mut results, 7, "truncation hygiene", guard);
    report(
        &mut results,
        8,
        "non-unitary target diag(1, 1/2)",
        non_unitary(),
    );
    report(
        &mut results,
        9,
        "phase ledger vs closed form",
        ledger_convention(),
    );
    report(
        &mut results,
        10,
        "CLI sweep reproducibility",
        cli_reproduction(),
    );

    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
