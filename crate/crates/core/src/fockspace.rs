//! State vectors on two truncated vibrational modes times three internal levels.
//!
//! Amplitudes are stored row-major over `(m, n, level)`: the x-mode phonon
//! number `m` is the outermost index, so every fixed-`m` row is one contiguous
//! block of `3 * dy` amplitudes.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the norm for operations that require a normalized state.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Internal electronic level of the ion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Level {
    A,
    B,
    C,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::A, Level::B, Level::C];

    pub fn offset(self) -> usize {
        match self {
            Level::A => 0,
            Level::B => 1,
            Level::C => 2,
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Level::A => "a",
            Level::B => "b",
            Level::C => "c",
        };
        f.write_str(s)
    }
}

/// Phonon truncation of the two modes; the internal space is always three levels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub dx: usize,
    pub dy: usize,
}

impl Dims {
    pub fn new(dx: usize, dy: usize) -> Self {
        Dims { dx, dy }
    }

    pub fn square(d: usize) -> Self {
        Dims { dx: d, dy: d }
    }

    pub fn len(&self) -> usize {
        self.dx * self.dy * 3
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flattened position of `|m, n> ⊗ |level>`. Does not bounds-check.
    #[inline]
    pub fn index(&self, m: usize, n: usize, level: Level) -> usize {
        (m * self.dy + n) * 3 + level.offset()
    }

    pub fn check(&self, m: usize, n: usize) -> Result<()> {
        if m >= self.dx || n >= self.dy {
            return Err(Error::Dimension(format!(
                "basis index (m={m}, n={n}) outside dims ({}, {}, 3)",
                self.dx, self.dy
            )));
        }
        Ok(())
    }

    /// Inverse of [`Dims::index`].
    pub fn basis(&self, flat: usize) -> BasisIndex {
        let level = Level::ALL[flat % 3];
        let mn = flat / 3;
        BasisIndex {
            m: mn / self.dy,
            n: mn % self.dy,
            level,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BasisIndex {
    pub m: usize,
    pub n: usize,
    pub level: Level,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    dims: Dims,
    amps: Vec<Complex64>,
}

/// Outcome of a conditional measurement of the internal level.
#[derive(Clone, Debug)]
pub struct Projection {
    /// Pre-normalization probability of the selected level.
    pub probability: f64,
    /// Normalized post-measurement state, `None` when the probability is zero.
    pub state: Option<StateVector>,
}

impl Projection {
    pub fn is_zero(&self) -> bool {
        self.state.is_none()
    }
}

impl StateVector {
    pub fn zeros(dims: Dims) -> Self {
        StateVector {
            dims,
            amps: vec![Complex64::new(0.0, 0.0); dims.len()],
        }
    }

    pub fn basis_state(dims: Dims, m: usize, n: usize, level: Level) -> Result<Self> {
        dims.check(m, n)?;
        let mut s = StateVector::zeros(dims);
        s.amps[dims.index(m, n, level)] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn from_amplitudes(dims: Dims, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != dims.len() {
            return Err(Error::Dimension(format!(
                "expected {} amplitudes for dims ({}, {}, 3), got {}",
                dims.len(),
                dims.dx,
                dims.dy,
                amps.len()
            )));
        }
        if let Some(pos) = amps
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::Contract(format!(
                "non-finite amplitude at index {pos}"
            )));
        }
        Ok(StateVector { dims, amps })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    /// Panics when `(m, n)` is outside the dims.
    pub fn amplitude(&self, m: usize, n: usize, level: Level) -> Complex64 {
        assert!(
            m < self.dims.dx && n < self.dims.dy,
            "basis index out of range"
        );
        self.amps[self.dims.index(m, n, level)]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr().sqrt() - 1.0).abs() <= NORM_TOLERANCE
    }

    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if norm == 0.0 {
            return Err(Error::DegenerateInput(
                "cannot normalize the zero vector".into(),
            ));
        }
        Ok(StateVector {
            dims: self.dims,
            amps: self.amps.iter().map(|z| z / norm).collect(),
        })
    }

    /// Total probability carried by basis states with `m` or `n` at or above `first_guard`.
    pub fn occupancy_from(&self, first_guard: usize) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                let b = self.dims.basis(*i);
                b.m >= first_guard || b.n >= first_guard
            })
            .map(|(_, z)| z.norm_sqr())
            .sum()
    }

    /// `[[re, im], ...]` pairs, the amplitude dump format.
    pub fn to_pairs(&self) -> Vec<[f64; 2]> {
        self.amps.iter().map(|z| [z.re, z.im]).collect()
    }
}

fn same_dims(lhs: &StateVector, rhs: &StateVector) -> Result<()> {
    if lhs.dims != rhs.dims {
        return Err(Error::Dimension(format!(
            "dims mismatch: ({}, {}) vs ({}, {})",
            lhs.dims.dx, lhs.dims.dy, rhs.dims.dx, rhs.dims.dy
        )));
    }
    Ok(())
}

/// `<lhs|rhs>`, conjugating the left argument.
pub fn inner_product(lhs: &StateVector, rhs: &StateVector) -> Result<Complex64> {
    same_dims(lhs, rhs)?;
    Ok(lhs
        .amps
        .iter()
        .zip(&rhs.amps)
        .map(|(l, r)| l.conj() * r)
        .sum())
}

/// Squared overlap `|<lhs|rhs>|^2` of two normalized states.
pub fn fidelity(lhs: &StateVector, rhs: &StateVector) -> Result<f64> {
    for (name, s) in [("lhs", lhs), ("rhs", rhs)] {
        if !s.is_normalized() {
            return Err(Error::Contract(format!(
                "fidelity needs normalized states; {name} has norm {}",
                s.norm_sqr().sqrt()
            )));
        }
    }
    let overlap = inner_product(lhs, rhs)?.norm_sqr();
    Ok(overlap.clamp(0.0, 1.0))
}

/// Projects onto one internal level and renormalizes.
pub fn project_internal(state: &StateVector, level: Level) -> Projection {
    let mut amps = state.amps.clone();
    for (i, z) in amps.iter_mut().enumerate() {
        if i % 3 != level.offset() {
            *z = Complex64::new(0.0, 0.0);
        }
    }
    let probability: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
    if probability == 0.0 {
        return Projection {
            probability,
            state: None,
        };
    }
    let norm = probability.sqrt();
    amps.iter_mut().for_each(|z| *z /= norm);
    Projection {
        probability,
        state: Some(StateVector {
            dims: state.dims,
            amps,
        }),
    }
}

/// Exchanges the two vibrational modes: `|m, n> -> |n, m>`.
pub fn mode_swap(state: &StateVector) -> Result<StateVector> {
    let d = state.dims;
    if d.dx != d.dy {
        return Err(Error::Dimension(format!(
            "mode swap needs equal truncations, got ({}, {})",
            d.dx, d.dy
        )));
    }
    let mut out = StateVector::zeros(d);
    for m in 0..d.dx {
        for n in 0..d.dy {
            for level in Level::ALL {
                out.amps[d.index(n, m, level)] = state.amps[d.index(m, n, level)];
            }
        }
    }
    Ok(out)
}
