//! Target operators `V` on the (N+1)-dimensional register, `V[(n, m)] = <n|V|m>`.

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Columns with a norm at or below this are treated as zero.
pub const ZERO_COLUMN_TOLERANCE: f64 = 1e-12;
/// Bound on `|V^dag V - I|` (Frobenius) for the unitary flag.
pub const UNITARY_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct TargetOperator {
    pub name: String,
    pub matrix: DMatrix<Complex64>,
    pub unitary: bool,
    pub column_norms: Vec<f64>,
    /// Remarks about how this operator was constructed.
    pub notes: Vec<String>,
}

impl TargetOperator {
    /// Wraps a square matrix, computing the unitarity flag and column norms.
    pub fn from_matrix(name: impl Into<String>, matrix: DMatrix<Complex64>) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        if rows != cols || rows == 0 {
            return Err(Error::Dimension(format!(
                "target must be square and non-empty, got {rows}x{cols}"
            )));
        }
        let column_norms: Vec<f64> = matrix.column_iter().map(|c| c.norm()).collect();
        if let Some(m) = column_norms
            .iter()
            .position(|&r| r <= ZERO_COLUMN_TOLERANCE)
        {
            return Err(Error::DegenerateTarget(format!(
                "column {m} of the target is zero"
            )));
        }
        let unitary = unitarity_defect(&matrix) < UNITARY_TOLERANCE;
        Ok(TargetOperator {
            name: name.into(),
            matrix,
            unitary,
            column_norms,
            notes: Vec::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Highest register index N.
    pub fn n_max(&self) -> usize {
        self.dim() - 1
    }

    pub fn get(&self, n: usize, m: usize) -> Complex64 {
        self.matrix[(n, m)]
    }

    /// `V |psi>` on register coefficients.
    pub fn apply(&self, coefficients: &[Complex64]) -> Result<Vec<Complex64>> {
        if coefficients.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "input has {} coefficients, target acts on {}",
                coefficients.len(),
                self.dim()
            )));
        }
        Ok((0..self.dim())
            .map(|n| {
                (0..self.dim())
                    .map(|m| self.matrix[(n, m)] * coefficients[m])
                    .sum()
            })
            .collect())
    }

    /// Frobenius norm, the square root of the summed squared column norms.
    pub fn frobenius_norm(&self) -> f64 {
        self.column_norms.iter().map(|r| r * r).sum::<f64>().sqrt()
    }

    /// SHA-256 over the dimension and the row-major `(re, im)` little-endian bytes.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.dim() as u64).to_le_bytes());
        for n in 0..self.dim() {
            for m in 0..self.dim() {
                let z = self.matrix[(n, m)];
                hasher.update(z.re.to_le_bytes());
                hasher.update(z.im.to_le_bytes());
            }
        }
        hex::encode(hasher.finalize())
    }
}

/// Frobenius norm of `V^dag V - I`.
pub fn unitarity_defect(matrix: &DMatrix<Complex64>) -> f64 {
    let n = matrix.ncols();
    (matrix.adjoint() * matrix - DMatrix::<Complex64>::identity(n, n)).norm()
}

pub fn identity(dim: usize) -> Result<TargetOperator> {
    check_dim(dim)?;
    TargetOperator::from_matrix("identity", DMatrix::identity(dim, dim))
}

/// Discrete Fourier transform `exp(2 pi i m n / dim) / sqrt(dim)`, indices over the full `0..dim`.
pub fn qft(dim: usize) -> Result<TargetOperator> {
    check_dim(dim)?;
    let scale = 1.0 / (dim as f64).sqrt();
    let matrix = DMatrix::from_fn(dim, dim, |n, m| {
        // reduce mod dim before scaling the angle to keep the phases exact for large m n
        let k = (m * n) % dim;
        Complex64::from_polar(scale, 2.0 * PI * k as f64 / dim as f64)
    });
    let mut op = TargetOperator::from_matrix("qft", matrix)?;
    op.notes.push(
        "indices run over 0..=N with 1/sqrt(N+1) normalization so that the transform is unitary"
            .into(),
    );
    Ok(op)
}

/// Cyclic shift `|j> -> |j+1 mod dim>` (the exponential phase operator).
pub fn cyclic_rotation(dim: usize) -> Result<TargetOperator> {
    check_dim(dim)?;
    let matrix = DMatrix::from_fn(dim, dim, |n, m| {
        if n == (m + 1) % dim {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let mut op = TargetOperator::from_matrix("rotation", matrix)?;
    op.notes
        .push("implemented as the bare cyclic permutation, without a 1/sqrt(N+1) prefactor".into());
    Ok(op)
}

/// Haar-random unitary from the QR decomposition of a seeded complex Gaussian matrix.
pub fn random_unitary(dim: usize, seed: u64) -> Result<TargetOperator> {
    check_dim(dim)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gaussian = DMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) / std::f64::consts::SQRT_2
    });
    let qr = gaussian.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for (j, mut col) in q.column_iter_mut().enumerate() {
        let d = r[(j, j)];
        let phase = if d.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            d / d.norm()
        };
        col *= phase;
    }
    TargetOperator::from_matrix(format!("random:{seed}"), q)
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::Dimension("target dimension must be >= 1".into()));
    }
    Ok(())
}

#[derive(Deserialize)]
struct MatrixFile {
    dim: usize,
    elements: Vec<serde_json::Value>,
}

/// Parses the matrix JSON format `{"dim": d, "elements": [[re, im], ...]}` (row-major).
pub fn parse_matrix(name: &str, text: &str) -> Result<TargetOperator> {
    let file: MatrixFile = serde_json::from_str(text)
        .map_err(|e| Error::parse(format!("{name}:{}:{}", e.line(), e.column()), e.to_string()))?;
    if file.dim == 0 {
        return Err(Error::Dimension(format!("{name}: dim must be >= 1")));
    }
    if file.elements.len() != file.dim * file.dim {
        return Err(Error::Dimension(format!(
            "{name}: dim {} needs {} elements, found {}",
            file.dim,
            file.dim * file.dim,
            file.elements.len()
        )));
    }
    let mut values = Vec::with_capacity(file.elements.len());
    for (i, v) in file.elements.iter().enumerate() {
        let (row, col) = (i / file.dim, i % file.dim);
        let location = format!("{name}: elements[{i}] (row {row}, column {col})");
        let pair = v
            .as_array()
            .filter(|a| a.len() == 2)
            .ok_or_else(|| Error::parse(&location, "expected a [re, im] pair"))?;
        let re = pair[0]
            .as_f64()
            .ok_or_else(|| Error::parse(&location, "real part is not a number"))?;
        let im = pair[1]
            .as_f64()
            .ok_or_else(|| Error::parse(&location, "imaginary part is not a number"))?;
        values.push(Complex64::new(re, im));
    }
    let matrix = DMatrix::from_row_slice(file.dim, file.dim, &values);
    TargetOperator::from_matrix(name, matrix)
}

pub fn load_matrix(path: &Path) -> Result<TargetOperator> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "matrix".into());
    parse_matrix(&name, &text)
}

/// Serializes a matrix into the matrix JSON format.
pub fn matrix_to_json(matrix: &DMatrix<Complex64>) -> serde_json::Value {
    let dim = matrix.nrows();
    let elements: Vec<[f64; 2]> = (0..dim)
        .flat_map(|n| (0..dim).map(move |m| (n, m)))
        .map(|(n, m)| [matrix[(n, m)].re, matrix[(n, m)].im])
        .collect();
    serde_json::json!({ "dim": dim, "elements": elements })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn two_point_fourier() {
        let v = qft(2).unwrap();
        let expected = [[1.0, 1.0], [1.0, -1.0]];
        for (n, row) in expected.iter().enumerate() {
            for (m, x) in row.iter().enumerate() {
                assert!((v.get(n, m) - Complex64::new(x * FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
            }
        }
        let v4 = qft(4).unwrap();
        assert!((v4.get(1, 1) - Complex64::new(0.0, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn fourier_is_unitary() {
        for dim in 1..=16 {
            let v = qft(dim).unwrap();
            assert!(unitarity_defect(&v.matrix) < 1e-12, "dim {dim}");
            assert!(v.unitary);
            let uniform = vec![Complex64::new(1.0 / (dim as f64).sqrt(), 0.0); dim];
            let out = v.apply(&uniform).unwrap();
            assert!((out[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
            assert!(out[1..].iter().all(|z| z.norm() < 1e-12));
        }
    }

    #[test]
    fn rotation_cycles() {
        let v = cyclic_rotation(3).unwrap();
        for j in 0..3 {
            let mut e = vec![Complex64::new(0.0, 0.0); 3];
            e[j] = Complex64::new(1.0, 0.0);
            let out = v.apply(&e).unwrap();
            assert_eq!(out[(j + 1) % 3], Complex64::new(1.0, 0.0));
        }
        for dim in 1..10 {
            let v = cyclic_rotation(dim).unwrap();
            assert!(v.unitary);
            let mut power = DMatrix::<Complex64>::identity(dim, dim);
            for _ in 0..dim {
                power = &v.matrix * power;
            }
            assert_eq!(power, DMatrix::identity(dim, dim));
        }
    }

    #[test]
    fn random_unitary_is_seeded_and_unitary() {
        let a = random_unitary(5, 42).unwrap();
        let b = random_unitary(5, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.matrix, random_unitary(5, 43).unwrap().matrix);
        assert!(unitarity_defect(&a.matrix) < 1e-12);
        assert!(a.column_norms.iter().all(|r| (r - 1.0).abs() < 1e-12));
    }

    #[test]
    fn matrix_files() {
        let id =
            parse_matrix("id", r#"{"dim": 2, "elements": [[1,0],[0,0],[0,0],[1,0]]}"#).unwrap();
        assert!(id.unitary);

        let zero_col = parse_matrix("z", r#"{"dim": 2, "elements": [[1,0],[0,0],[0,0],[0,0]]}"#);
        assert!(matches!(zero_col, Err(Error::DegenerateTarget(_))));

        let half = parse_matrix(
            "h",
            r#"{"dim": 2, "elements": [[1,0],[0,0],[0,0],[0.5,0]]}"#,
        )
        .unwrap();
        assert!(!half.unitary);
        assert_eq!(half.column_norms, vec![1.0, 0.5]);

        let short = parse_matrix("s", r#"{"dim": 2, "elements": [[1,0]]}"#);
        assert!(matches!(short, Err(Error::Dimension(_))));

        match parse_matrix(
            "bad",
            r#"{"dim": 2, "elements": [[1,0],[0,0],[0,"x"],[1,0]]}"#,
        ) {
            Err(Error::Parse { location, .. }) => {
                assert!(location.contains("row 1, column 0"), "{location}")
            }
            other => panic!("unexpected {other:?}"),
        }
        match parse_matrix("syntax", "{\"dim\": 2,\n \"elements\": [") {
            Err(Error::Parse { location, .. }) => assert!(location.starts_with("syntax:2:")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn json_roundtrip_preserves_digest() {
        let v = random_unitary(4, 7).unwrap();
        let text = matrix_to_json(&v.matrix).to_string();
        let back = parse_matrix("random:7", &text).unwrap();
        assert_eq!(back.digest(), v.digest());
    }
}
