//! Running schedules: state preparation, pulse evolution, post-selection on
//! `b`, fidelity against the ideal output, and `chi / |g1|` sweeps.

use std::ops::Range;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fockspace::{self, Level, StateVector, NORM_TOLERANCE};
use crate::iontools::{Channel, TrapParams};
use crate::propagator::{apply_pulse_mut, DetuningConvention, Mode, PulseOp};
use crate::synthesis::{synthesize, LedgerEntry, Schedule};
use crate::targets::TargetOperator;

/// Header of the sweep CSV.
pub const SWEEP_HEADER: [&str; 9] = [
    "chi_ratio",
    "target",
    "n_dim",
    "eta_x",
    "eta_y",
    "mode",
    "fidelity",
    "success_prob",
    "guard_occupancy",
];

/// Register coefficients parsed from `uniform`, `basis:k` or a JSON file
/// holding either `[[re, im], ...]` or `[x, ...]`.
pub fn parse_input(spec: &str, dim: usize) -> Result<Vec<Complex64>> {
    if spec == "uniform" {
        return Ok(uniform_input(dim));
    }
    if let Some(k) = spec.strip_prefix("basis:") {
        let k: usize = k.parse().map_err(|_| {
            Error::Usage(format!(
                "--input basis:{k}: expected a non-negative integer"
            ))
        })?;
        if k >= dim {
            return Err(Error::Dimension(format!(
                "basis:{k} outside a register of {dim} levels"
            )));
        }
        let mut c = vec![Complex64::new(0.0, 0.0); dim];
        c[k] = Complex64::new(1.0, 0.0);
        return Ok(c);
    }
    let path = Path::new(spec);
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let coeffs = parse_coefficients(spec, &text)?;
    if coeffs.len() != dim {
        return Err(Error::Dimension(format!(
            "{spec}: {} coefficients for a register of {dim} levels",
            coeffs.len()
        )));
    }
    Ok(coeffs)
}

fn parse_coefficients(name: &str, text: &str) -> Result<Vec<Complex64>> {
    let values: Vec<serde_json::Value> = serde_json::from_str(text)
        .map_err(|e| Error::parse(format!("{name}:{}:{}", e.line(), e.column()), e.to_string()))?;
    values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let bad = || {
                Error::parse(
                    format!("{name}: [{i}]"),
                    "expected a number or a [re, im] pair",
                )
            };
            if let Some(x) = v.as_f64() {
                return Ok(Complex64::new(x, 0.0));
            }
            match v.as_array().map(|a| a.as_slice()) {
                Some([re, im]) => Ok(Complex64::new(
                    re.as_f64().ok_or_else(bad)?,
                    im.as_f64().ok_or_else(bad)?,
                )),
                _ => Err(bad()),
            }
        })
        .collect()
}

pub fn uniform_input(dim: usize) -> Vec<Complex64> {
    vec![Complex64::new(1.0 / (dim as f64).sqrt(), 0.0); dim]
}

fn check_input(coefficients: &[Complex64], dim: usize) -> Result<()> {
    if coefficients.len() != dim {
        return Err(Error::Dimension(format!(
            "input has {} coefficients, register holds {dim}",
            coefficients.len()
        )));
    }
    let norm = coefficients
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::Contract(format!(
            "input coefficients have norm {norm}, expected 1"
        )));
    }
    Ok(())
}

/// `|psi, 0> ⊗ |a>` with `psi` on the x mode.
pub fn initial_state(params: &TrapParams, coefficients: &[Complex64]) -> Result<StateVector> {
    check_input(coefficients, params.register_dim())?;
    let dims = params.dims();
    let mut amps = vec![Complex64::new(0.0, 0.0); dims.len()];
    for (m, c) in coefficients.iter().enumerate() {
        amps[dims.index(m, 0, Level::A)] = *c;
    }
    StateVector::from_amplitudes(dims, amps)
}

/// `|0, V psi / |V psi|> ⊗ |b>`, or `None` when `V psi` vanishes.
pub fn ideal_output(
    params: &TrapParams,
    target: &TargetOperator,
    coefficients: &[Complex64],
) -> Result<Option<StateVector>> {
    let out = target.apply(coefficients)?;
    let norm = out.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Ok(None);
    }
    let dims = params.dims();
    let mut amps = vec![Complex64::new(0.0, 0.0); dims.len()];
    for (n, z) in out.iter().enumerate() {
        amps[dims.index(0, n, Level::B)] = z / norm;
    }
    StateVector::from_amplitudes(dims, amps).map(Some)
}

/// Applies `pulses` in order.
pub fn evolve(
    state: &mut StateVector,
    pulses: &[PulseOp],
    params: &TrapParams,
    mode: Mode,
) -> Result<()> {
    pulses
        .iter()
        .try_for_each(|p| apply_pulse_mut(state, p, params, mode))
}

/// Applies the pulses of `schedule` with indices in `range` to a copy of `state`.
pub fn simulate(
    schedule: &Schedule,
    state: &StateVector,
    mode: Mode,
    range: Range<usize>,
) -> Result<StateVector> {
    let pulses = schedule.pulses.get(range.clone()).ok_or_else(|| {
        Error::Dimension(format!(
            "pulse range {range:?} outside a schedule of {}",
            schedule.pulses.len()
        ))
    })?;
    let mut out = state.clone();
    evolve(&mut out, pulses, &schedule.params, mode)?;
    Ok(out)
}

/// SHA-256 of the amplitudes as little-endian `(re, im)` bytes.
pub fn state_digest(state: &StateVector) -> String {
    let mut hasher = Sha256::new();
    hasher.update((state.dims().dx as u64).to_le_bytes());
    hasher.update((state.dims().dy as u64).to_le_bytes());
    for z in state.amplitudes() {
        hasher.update(z.re.to_le_bytes());
        hasher.update(z.im.to_le_bytes());
    }
    hex::encode(hasher.finalize())
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub pre_projection_digest: String,
    /// Probability of finding the ion in `b` after the schedule.
    pub success_prob: f64,
    /// Normalized state after the projection (and the optional mode swap).
    pub post_state: Option<StateVector>,
    /// `None` when the projection or the ideal output vanishes.
    pub fidelity_vs_ideal: Option<f64>,
    /// Probability at phonon numbers above N in either mode, before projection.
    pub guard_occupancy: f64,
    pub mode: Mode,
    pub swapped: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Exchange the two modes after the projection, moving `V psi` onto x.
    pub mode_swap: bool,
}

pub fn run(
    schedule: &Schedule,
    target: &TargetOperator,
    input: &[Complex64],
    mode: Mode,
) -> Result<RunResult> {
    run_with(schedule, target, input, mode, RunOptions::default())
}

pub fn run_with(
    schedule: &Schedule,
    target: &TargetOperator,
    input: &[Complex64],
    mode: Mode,
    options: RunOptions,
) -> Result<RunResult> {
    let params = &schedule.params;
    if target.dim() != params.register_dim() {
        return Err(Error::Dimension(format!(
            "schedule built for {} levels, target has {}",
            params.register_dim(),
            target.dim()
        )));
    }
    if target.digest() != schedule.target_digest {
        return Err(Error::Contract(format!(
            "schedule was compiled for a different operator than '{}'",
            target.name
        )));
    }
    let mut state = initial_state(params, input)?;
    evolve(&mut state, &schedule.pulses, params, mode)?;
    let guard_occupancy = state.occupancy_from(params.register_dim());
    let projection = fockspace::project_internal(&state, schedule.projection_level);
    let mut ideal = ideal_output(params, target, input)?;
    let mut post = projection.state;
    if options.mode_swap {
        post = post.map(|s| fockspace::mode_swap(&s)).transpose()?;
        ideal = ideal.map(|s| fockspace::mode_swap(&s)).transpose()?;
    }
    let fidelity_vs_ideal = match (&post, &ideal) {
        (Some(p), Some(i)) => Some(fockspace::fidelity(p, i)?),
        _ => None,
    };
    Ok(RunResult {
        pre_projection_digest: state_digest(&state),
        success_prob: projection.probability,
        post_state: post,
        fidelity_vs_ideal,
        guard_occupancy,
        mode,
        swapped: options.mode_swap,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub chi_ratio: f64,
    pub target: String,
    pub n_dim: usize,
    pub eta_x: f64,
    pub eta_y: f64,
    pub mode: Mode,
    pub fidelity: Option<f64>,
    pub success_prob: Option<f64>,
    pub guard_occupancy: Option<f64>,
    /// Message of a failed row; the sweep carries on past it.
    pub error: Option<String>,
}

/// One synthesized and simulated run per ratio, in the order given.
pub fn sweep_chi(
    target: &TargetOperator,
    ratios: &[f64],
    input: &[Complex64],
    base: &TrapParams,
    mode: Mode,
) -> Result<Vec<SweepRow>> {
    if let Some(r) = ratios.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
        return Err(Error::Usage(format!(
            "chi ratios must be positive, got {r}"
        )));
    }
    if ratios.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Usage("chi ratios must be sorted ascending".into()));
    }
    check_input(input, target.dim())?;
    Ok(ratios
        .par_iter()
        .map(|&ratio| {
            let params = base.clone().with_chi_ratio(ratio);
            let outcome = synthesize(target, &params).and_then(|s| run(&s, target, input, mode));
            let mut row = SweepRow {
                chi_ratio: ratio,
                target: target.name.clone(),
                n_dim: target.dim(),
                eta_x: params.eta_x,
                eta_y: params.eta_y,
                mode,
                fidelity: None,
                success_prob: None,
                guard_occupancy: None,
                error: None,
            };
            match outcome {
                Ok(r) => {
                    row.fidelity = r.fidelity_vs_ideal;
                    row.success_prob = Some(r.success_prob);
                    row.guard_occupancy = Some(r.guard_occupancy);
                }
                Err(e) => row.error = Some(e.to_string()),
            }
            row
        })
        .collect())
}

fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_real).unwrap_or_default()
}

/// The sweep CSV as bytes; missing values are left empty.
pub fn sweep_csv(rows: &[SweepRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let internal = |e: csv::Error| Error::Internal(format!("csv: {e}"));
    w.write_record(SWEEP_HEADER).map_err(internal)?;
    for r in rows {
        w.write_record([
            fmt_real(r.chi_ratio),
            r.target.clone(),
            r.n_dim.to_string(),
            fmt_real(r.eta_x),
            fmt_real(r.eta_y),
            r.mode.name().to_string(),
            fmt_opt(r.fidelity),
            fmt_opt(r.success_prob),
            fmt_opt(r.guard_occupancy),
        ])
        .map_err(internal)?;
    }
    w.into_inner()
        .map_err(|e| Error::Internal(format!("csv: {e}")))
}

#[derive(Serialize, Deserialize)]
struct PulseRecord {
    channel: String,
    row_m: Option<usize>,
    delta_y: Option<f64>,
    area: [f64; 2],
}

#[derive(Serialize, Deserialize)]
struct ScheduleFile {
    params: TrapParams,
    target_name: String,
    target_digest: String,
    nominal_success_prob: f64,
    projection_level: Level,
    column_norms: Vec<f64>,
    step_a_len: usize,
    pulse_count: usize,
    matching_convention: Option<DetuningConvention>,
    pulses: Vec<PulseRecord>,
    phase_ledger: Vec<LedgerEntry>,
}

fn pulse_record(p: &PulseOp) -> PulseRecord {
    PulseRecord {
        channel: p.channel.name().to_string(),
        row_m: match p.channel {
            Channel::Stark1 { row_m } => Some(row_m),
            _ => None,
        },
        delta_y: p.delta_y,
        area: [p.area.re, p.area.im],
    }
}

fn pulse_from_record(i: usize, r: &PulseRecord) -> Result<PulseOp> {
    let channel = match (r.channel.as_str(), r.row_m) {
        ("stark1", Some(row_m)) => Channel::Stark1 { row_m },
        ("stark1", None) => {
            return Err(Error::parse(
                format!("pulses[{i}]"),
                "stark1 pulse without row_m",
            ))
        }
        ("carrier", _) => Channel::Carrier3,
        ("sideband_y", _) => Channel::SidebandY2,
        ("sideband_x", _) => Channel::SidebandX4,
        (other, _) => {
            return Err(Error::parse(
                format!("pulses[{i}]"),
                format!("unknown channel '{other}'"),
            ))
        }
    };
    Ok(PulseOp {
        channel,
        area: Complex64::new(r.area[0], r.area[1]),
        delta_y: r.delta_y,
    })
}

pub fn schedule_to_json(schedule: &Schedule) -> Result<String> {
    let file = ScheduleFile {
        params: schedule.params.clone(),
        target_name: schedule.target_name.clone(),
        target_digest: schedule.target_digest.clone(),
        nominal_success_prob: schedule.nominal_success_prob,
        projection_level: schedule.projection_level,
        column_norms: schedule.column_norms.clone(),
        step_a_len: schedule.step_a_len,
        pulse_count: schedule.pulses.len(),
        matching_convention: schedule.matching_convention,
        pulses: schedule.pulses.iter().map(pulse_record).collect(),
        phase_ledger: schedule.phase_ledger.clone(),
    };
    serde_json::to_string_pretty(&file).map_err(|e| Error::Internal(format!("schedule json: {e}")))
}

/// Reads a schedule written by [`schedule_to_json`] and validates it.
pub fn schedule_from_json(name: &str, text: &str) -> Result<Schedule> {
    let file: ScheduleFile = serde_json::from_str(text)
        .map_err(|e| Error::parse(format!("{name}:{}:{}", e.line(), e.column()), e.to_string()))?;
    if file.pulse_count != file.pulses.len() {
        return Err(Error::parse(
            name,
            format!(
                "pulse_count {} but {} pulses listed",
                file.pulse_count,
                file.pulses.len()
            ),
        ));
    }
    let pulses = file
        .pulses
        .iter()
        .enumerate()
        .map(|(i, r)| pulse_from_record(i, r))
        .collect::<Result<Vec<_>>>()?;
    let schedule = Schedule {
        params: file.params,
        target_name: file.target_name,
        target_digest: file.target_digest,
        nominal_success_prob: file.nominal_success_prob,
        projection_level: file.projection_level,
        column_norms: file.column_norms,
        step_a_len: file.step_a_len,
        pulses,
        phase_ledger: file.phase_ledger,
        matching_convention: file.matching_convention,
    };
    schedule.validate()?;
    Ok(schedule)
}

pub fn load_schedule(path: &Path) -> Result<Schedule> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    schedule_from_json(&path.display().to_string(), &text)
}

#[derive(Serialize)]
struct RunResultFile<'a> {
    pre_projection_digest: &'a str,
    success_prob: f64,
    post_state: Option<Vec<[f64; 2]>>,
    fidelity_vs_ideal: Option<f64>,
    guard_occupancy: f64,
    mode: Mode,
    swapped: bool,
}

pub fn run_result_to_json(result: &RunResult) -> Result<String> {
    let file = RunResultFile {
        pre_projection_digest: &result.pre_projection_digest,
        success_prob: result.success_prob,
        post_state: result.post_state.as_ref().map(|s| s.to_pairs()),
        fidelity_vs_ideal: result.fidelity_vs_ideal,
        guard_occupancy: result.guard_occupancy,
        mode: result.mode,
        swapped: result.swapped,
    };
    serde_json::to_string_pretty(&file).map_err(|e| Error::Internal(format!("run json: {e}")))
}

/// Where [`write_outputs`] puts each artifact; `None` skips it.
#[derive(Clone, Debug, Default)]
pub struct OutputPaths<'a> {
    pub schedule: Option<&'a Path>,
    pub run: Option<&'a Path>,
    pub sweep: Option<&'a Path>,
}

pub fn write_outputs(
    paths: &OutputPaths<'_>,
    schedule: Option<&Schedule>,
    run: Option<&RunResult>,
    sweep: Option<&[SweepRow]>,
) -> Result<()> {
    let write =
        |path: &Path, bytes: &[u8]| std::fs::write(path, bytes).map_err(|e| Error::io(path, e));
    if let (Some(path), Some(s)) = (paths.schedule, schedule) {
        write(path, schedule_to_json(s)?.as_bytes())?;
    }
    if let (Some(path), Some(r)) = (paths.run, run) {
        write(path, run_result_to_json(r)?.as_bytes())?;
    }
    if let (Some(path), Some(rows)) = (paths.sweep, sweep) {
        write(path, &sweep_csv(rows)?)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::targets;

    fn basis(dim: usize, k: usize) -> Vec<Complex64> {
        parse_input(&format!("basis:{k}"), dim).unwrap()
    }

    #[test]
    fn identity_on_vacuum() {
        let p = TrapParams::new(3);
        let v = targets::identity(4).unwrap();
        let s = synthesize(&v, &p).unwrap();
        let r = run(&s, &v, &basis(4, 0), Mode::Ideal).unwrap();
        assert!((r.fidelity_vs_ideal.unwrap() - 1.0).abs() < 1e-10);
        assert!((r.success_prob - 0.25).abs() < 1e-10);
    }

    #[test]
    fn rotation_shifts_vacuum() {
        let p = TrapParams::new(2);
        let v = targets::cyclic_rotation(3).unwrap();
        let s = synthesize(&v, &p).unwrap();
        let r = run(&s, &v, &basis(3, 0), Mode::Ideal).unwrap();
        let post = r.post_state.unwrap();
        assert!((post.amplitude(0, 1, Level::B).norm() - 1.0).abs() < 1e-10);
        assert!((r.fidelity_vs_ideal.unwrap() - 1.0).abs() < 1e-10);

        let swapped = run_with(
            &s,
            &v,
            &basis(3, 0),
            Mode::Ideal,
            RunOptions { mode_swap: true },
        )
        .unwrap();
        let post = swapped.post_state.unwrap();
        assert!((post.amplitude(1, 0, Level::B).norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = TrapParams::new(1);
        let v = targets::identity(2).unwrap();
        let s = synthesize(&v, &p).unwrap();
        let half = vec![Complex64::new(0.5, 0.0); 2];
        assert!(matches!(
            run(&s, &v, &half, Mode::Ideal),
            Err(Error::Contract(_))
        ));
        let other = targets::qft(2).unwrap();
        assert!(matches!(
            run(&s, &other, &basis(2, 0), Mode::Ideal),
            Err(Error::Contract(_))
        ));
        assert!(matches!(
            parse_input("basis:2", 2),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(parse_input("basis:x", 2), Err(Error::Usage(_))));
    }

    #[test]
    fn csv_shapes() {
        let empty = String::from_utf8(sweep_csv(&[]).unwrap()).unwrap();
        assert_eq!(empty, format!("{}\n", SWEEP_HEADER.join(",")));
        let v = targets::qft(2).unwrap();
        let rows = sweep_chi(
            &v,
            &[50.0],
            &uniform_input(2),
            &TrapParams::new(1),
            Mode::Full,
        )
        .unwrap();
        let text = String::from_utf8(sweep_csv(&rows).unwrap()).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text
            .lines()
            .nth(1)
            .unwrap()
            .starts_with("5.0000000000000000e1,qft,2,"));
    }

    #[test]
    fn sweep_checks_ratios() {
        let v = targets::qft(2).unwrap();
        let base = TrapParams::new(1);
        let input = uniform_input(2);
        assert!(sweep_chi(&v, &[10.0, 5.0], &input, &base, Mode::Full).is_err());
        assert!(sweep_chi(&v, &[0.0], &input, &base, Mode::Full).is_err());
    }

    #[test]
    fn schedule_json_roundtrip() {
        let p = TrapParams::new(2).with_chi_ratio(37.0);
        let v = targets::random_unitary(3, 11).unwrap();
        let s = synthesize(&v, &p).unwrap();
        let text = schedule_to_json(&s).unwrap();
        let back = schedule_from_json("mem", &text).unwrap();
        assert_eq!(back, s);
        let input = uniform_input(3);
        assert_eq!(
            run(&s, &v, &input, Mode::Full).unwrap(),
            run(&back, &v, &input, Mode::Full).unwrap()
        );
    }

    #[test]
    fn coefficient_files() {
        let c = parse_coefficients("x", "[[0.6, 0.0], 0.8]").unwrap();
        assert_eq!(c, vec![Complex64::new(0.6, 0.0), Complex64::new(0.8, 0.0)]);
        assert!(matches!(
            parse_coefficients("x", "[\"a\"]"),
            Err(Error::Parse { .. })
        ));
    }
}
