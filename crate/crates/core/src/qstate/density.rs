use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::{QuantumSystem, StateError, MATRIX_TOLERANCE};

/// Largest register, in qubits, for which density matrices are built.
/// A 10-qubit matrix already holds 2^20 complex entries.
pub const MAX_DENSITY_QUBITS: usize = 10;

/// Density operator as a dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl DensityMatrix {
    pub(crate) fn from_entries_unchecked(dim: usize, entries: Vec<Complex64>) -> Self {
        debug_assert_eq!(entries.len(), dim * dim);
        Self { dim, entries }
    }

    /// Builds a matrix from row-major entries and checks the density-operator
    /// invariants.
    pub fn from_entries(dim: usize, entries: Vec<Complex64>) -> Result<Self, StateError> {
        if entries.len() != dim * dim {
            return Err(StateError::LengthMismatch {
                left: entries.len(),
                right: dim * dim,
            });
        }
        let rho = Self { dim, entries };
        rho.validate()?;
        Ok(rho)
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn from_pure(amps: &[Complex64]) -> Self {
        let dim = amps.len();
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                entries[i * dim + j] = amps[i] * amps[j].conj();
            }
        }
        Self { dim, entries }
    }

    /// `2^{-k} I` over `k` qubits.
    pub fn maximally_mixed(qubits: usize) -> Self {
        let dim = 1usize << qubits;
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        let w = 1.0 / dim as f64;
        for i in 0..dim {
            entries[i * dim + i] = Complex64::new(w, 0.0);
        }
        Self { dim, entries }
    }

    /// `Σ wᵢ ρᵢ`; weights must be non-negative and sum to one.
    pub fn mixture<'a, I>(parts: I) -> Result<Self, StateError>
    where
        I: IntoIterator<Item = (f64, &'a DensityMatrix)>,
    {
        let mut acc: Option<DensityMatrix> = None;
        let mut total = 0.0;
        for (w, rho) in parts {
            if w < 0.0 {
                return Err(StateError::InvalidWeights);
            }
            total += w;
            match acc.as_mut() {
                None => {
                    let mut first = rho.clone();
                    first.scale(w);
                    acc = Some(first);
                }
                Some(a) => a.add_scaled(w, rho)?,
            }
        }
        if (total - 1.0).abs() > MATRIX_TOLERANCE {
            return Err(StateError::InvalidWeights);
        }
        acc.ok_or(StateError::InvalidWeights)
    }

    /// Weighted mixture of the reduced states of `labels` across an ensemble
    /// of systems.
    pub fn ensemble(parts: &[(f64, &QuantumSystem)], labels: &[usize]) -> Result<Self, StateError> {
        let reduced = parts
            .iter()
            .map(|(w, s)| Ok((*w, s.reduced_density(labels)?)))
            .collect::<Result<Vec<_>, StateError>>()?;
        Self::mixture(reduced.iter().map(|(w, r)| (*w, r)))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&mut self, w: f64) {
        for e in &mut self.entries {
            *e *= w;
        }
    }

    /// `self += w · other`.
    pub fn add_scaled(&mut self, w: f64, other: &DensityMatrix) -> Result<(), StateError> {
        self.same_dim(other)?;
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            *a += b * w;
        }
        Ok(())
    }

    fn same_dim(&self, other: &DensityMatrix) -> Result<(), StateError> {
        if self.dim != other.dim {
            return Err(StateError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }

    /// `self ⊗ other`.
    pub fn kron(&self, other: &DensityMatrix) -> DensityMatrix {
        let dim = self.dim * other.dim;
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..self.dim {
            for j in 0..self.dim {
                let a = self.get(i, j);
                for k in 0..other.dim {
                    for l in 0..other.dim {
                        entries[(i * other.dim + k) * dim + j * other.dim + l] = a * other.get(k, l);
                    }
                }
            }
        }
        Self { dim, entries }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (0..self.dim).all(|i| (i..self.dim).all(|j| (self.get(i, j) - self.get(j, i).conj()).norm() <= tol))
    }

    /// Eigenvalues, ascending. Assumes the matrix is Hermitian.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(self.dim, &self.entries)
    }

    /// Hermitian, unit trace and positive semidefinite, each within
    /// `MATRIX_TOLERANCE`.
    pub fn validate(&self) -> Result<(), StateError> {
        if !self.is_hermitian(MATRIX_TOLERANCE) {
            return Err(StateError::NotDensity("not Hermitian"));
        }
        if (self.trace() - Complex64::new(1.0, 0.0)).norm() > MATRIX_TOLERANCE {
            return Err(StateError::NotDensity("trace is not one"));
        }
        if self.eigenvalues().first().is_some_and(|&l| l < -MATRIX_TOLERANCE) {
            return Err(StateError::NotDensity("negative eigenvalue"));
        }
        Ok(())
    }
}

/// Trace distance `½‖a − b‖₁`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64, StateError> {
    a.same_dim(b)?;
    let diff: Vec<Complex64> = a.entries.iter().zip(&b.entries).map(|(x, y)| x - y).collect();
    let sum: f64 = hermitian_eigenvalues(a.dim, &diff).iter().map(|l| l.abs()).sum();
    Ok((0.5 * sum).clamp(0.0, 1.0))
}

/// Eigenvalues of a Hermitian matrix `H = A + iB` via the real symmetric
/// embedding `[[A, -B], [B, A]]`, whose spectrum is that of `H` with every
/// eigenvalue doubled.
fn hermitian_eigenvalues(dim: usize, entries: &[Complex64]) -> Vec<f64> {
    let n = 2 * dim;
    let mut m = vec![0.0; n * n];
    for i in 0..dim {
        for j in 0..dim {
            let z = entries[i * dim + j];
            m[i * n + j] = z.re;
            m[(i + dim) * n + j + dim] = z.re;
            m[i * n + j + dim] = -z.im;
            m[(i + dim) * n + j] = z.im;
        }
    }
    let mut doubled = jacobi_eigenvalues(n, m);
    doubled.sort_by(f64::total_cmp);
    doubled.into_iter().step_by(2).collect()
}

/// Cyclic Jacobi rotations on a real symmetric matrix.
fn jacobi_eigenvalues(n: usize, mut a: Vec<f64>) -> Vec<f64> {
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}
