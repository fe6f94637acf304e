//! Dense complex matrices sized for qudit pairs (up to 81×81).
//!
//! Storage is row-major. Qutrit levels use the ordering `{|2⟩, |1⟩, |0⟩}`
//! mapped to indices `{0, 1, 2}`, so the ground state sits in the last
//! row and column; two-qutrit basis states `|ab⟩` sit at `3·i(a) + i(b)`.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default validation tolerance for Hermiticity, trace and positivity.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Off-diagonal Frobenius norm (relative to `max(1, ‖H‖_F)`) at which
/// the Jacobi iteration stops.
pub const JACOBI_THRESHOLD: f64 = 1e-14;

/// Sweep budget for the Jacobi iteration.
pub const JACOBI_MAX_SWEEPS: usize = 50;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Builds a `dim × dim` matrix from row-major entries.
    pub fn new(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyMatrix);
        }
        if data.len() != dim * dim {
            return Err(Error::NotSquare {
                expected: dim * dim,
                found: data.len(),
            });
        }
        if let Some(k) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite {
                row: k / dim,
                col: k % dim,
            });
        }
        Ok(Self { dim, data })
    }

    pub fn from_real(dim: usize, data: &[f64]) -> Result<Self> {
        Self::new(dim, data.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_fn(dim, |_, _| ZERO)
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        Self::from_fn(diag.len(), |i, j| if i == j { diag[i] } else { ZERO })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        Self::from_fn(diag.len(), |i, j| {
            if i == j {
                Complex64::new(diag[i], 0.0)
            } else {
                ZERO
            }
        })
    }

    /// `|ψ⟩⟨φ|`.
    pub fn outer(ket: &[Complex64], bra: &[Complex64]) -> Self {
        assert_eq!(ket.len(), bra.len(), "outer product of unequal lengths");
        Self::from_fn(ket.len(), |i, j| ket[i] * bra[j].conj())
    }

    /// `|i⟩⟨j|` in a `dim`-dimensional space.
    pub fn unit(dim: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(dim);
        m[(i, j)] = ONE;
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.dim).map(|i| self[(i, i)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn scale(&self, factor: f64) -> Self {
        self.map(|z| z * factor)
    }

    pub fn scale_complex(&self, factor: Complex64) -> Self {
        self.map(|z| z * factor)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    /// `A X A†`.
    pub fn conjugate_by(&self, a: &ComplexMatrix) -> Self {
        &(a * self) * &a.adjoint()
    }

    /// `A† X A`.
    pub fn conjugate_by_adjoint(&self, a: &ComplexMatrix) -> Self {
        &(&a.adjoint() * self) * a
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!(self.dim, other.dim, "comparing matrices of unequal dimension");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest `|H_ij − conj(H_ji)|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `(H + H†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.dim, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix product of unequal dimensions");
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                let row = &rhs.data[k * n..(k + 1) * n];
                for (o, b) in out[i * n..(i + 1) * n].iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        ComplexMatrix { dim: n, data: out }
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix sum of unequal dimensions");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix difference of unequal dimensions");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Which factor of a bipartite space an operation acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Kronecker product; entry `(i₁n + i₂, j₁n + j₂) = a[i₁][j₁]·b[i₂][j₂]`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let n = b.dim;
    ComplexMatrix::from_fn(a.dim * n, |i, j| a[(i / n, j / n)] * b[(i % n, j % n)])
}

fn check_bipartite(rho: &ComplexMatrix, (m, n): (usize, usize)) -> Result<()> {
    if m == 0 || n == 0 || rho.dim != m * n {
        return Err(Error::DimensionMismatch {
            expected: m * n,
            found: rho.dim,
        });
    }
    Ok(())
}

/// Traces out one factor of an `m ⊗ n` operator, keeping `keep`.
pub fn partial_trace(
    rho: &ComplexMatrix,
    dims: (usize, usize),
    keep: Subsystem,
) -> Result<ComplexMatrix> {
    check_bipartite(rho, dims)?;
    let (m, n) = dims;
    Ok(match keep {
        Subsystem::A => ComplexMatrix::from_fn(m, |i, j| {
            (0..n).map(|k| rho[(i * n + k, j * n + k)]).sum()
        }),
        Subsystem::B => ComplexMatrix::from_fn(n, |i, j| {
            (0..m).map(|k| rho[(k * n + i, k * n + j)]).sum()
        }),
    })
}

/// Transposes the indices of one factor of an `m ⊗ n` operator.
pub fn partial_transpose(
    rho: &ComplexMatrix,
    dims: (usize, usize),
    side: Subsystem,
) -> Result<ComplexMatrix> {
    check_bipartite(rho, dims)?;
    let (_, n) = dims;
    Ok(ComplexMatrix::from_fn(rho.dim, |r, c| {
        let (i1, i2) = (r / n, r % n);
        let (j1, j2) = (c / n, c % n);
        match side {
            Subsystem::A => rho[(j1 * n + i2, i1 * n + j2)],
            Subsystem::B => rho[(i1 * n + j2, j1 * n + i2)],
        }
    }))
}

/// Real eigenvalues of a Hermitian matrix, sorted non-increasing.
///
/// Cyclic complex Jacobi: each pivot `(p, q)` is first rotated to a real
/// off-diagonal by a phase, then annihilated with the classical real
/// rotation. Iteration stops once the off-diagonal Frobenius norm drops
/// below `JACOBI_THRESHOLD · max(1, ‖H‖_F)`.
pub fn hermitian_eigenvalues(h: &ComplexMatrix) -> Result<Vec<f64>> {
    let scale = h.frobenius_norm().max(1.0);
    let deviation = h.hermiticity_deviation();
    if deviation > DEFAULT_TOLERANCE * scale {
        return Err(Error::NotHermitian { deviation });
    }

    let n = h.dim;
    let mut a = h.hermitian_part();
    let threshold = JACOBI_THRESHOLD * scale;

    let off_norm = |a: &ComplexMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut off = off_norm(&a);
    let mut sweeps = 0;
    while off >= threshold {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                off_norm: off,
            });
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, p, q);
            }
        }
        sweeps += 1;
        off = off_norm(&a);
    }

    let mut eig: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    eig.sort_by(|x, y| y.total_cmp(x));
    Ok(eig)
}

/// One Jacobi rotation `A ← J† A J` zeroing `A[p][q]`, where
/// `J = diag(1, e^{-iφ}) · [[c, s], [−s, c]]` on the `(p, q)` plane.
fn rotate(a: &mut ComplexMatrix, p: usize, q: usize) {
    let beta = a[(p, q)];
    let r = beta.norm();
    if r == 0.0 {
        return;
    }
    let n = a.dim;
    let phase = beta / r;
    let alpha = a[(p, p)].re;
    let delta = a[(q, q)].re;

    let theta = (delta - alpha) / (2.0 * r);
    let t = if theta >= 0.0 {
        1.0 / (theta + (theta * theta + 1.0).sqrt())
    } else {
        -1.0 / (-theta + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let conj_phase = phase.conj();

    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c - akq * conj_phase * s;
        a[(k, q)] = akp * s + akq * conj_phase * c;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c - aqk * phase * s;
        a[(q, k)] = apk * s + aqk * phase * c;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = Complex64::new(alpha - t * r, 0.0);
    a[(q, q)] = Complex64::new(delta + t * r, 0.0);
}

/// Trace norm `Σ|μᵢ|` of a Hermitian matrix.
pub fn trace_norm(h: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(h)?.iter().map(|x| x.abs()).sum())
}

/// `½‖ρ − σ‖₁`.
pub fn trace_distance(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    Ok(trace_norm(&(rho - sigma))? / 2.0)
}

/// A validated quantum state: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
    tolerance: f64,
}

impl DensityMatrix {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(mat, DEFAULT_TOLERANCE)
    }

    pub fn with_tolerance(mat: ComplexMatrix, tolerance: f64) -> Result<Self> {
        let deviation = mat.hermiticity_deviation();
        if deviation > tolerance {
            return Err(Error::NotHermitian { deviation });
        }
        let trace = mat.trace();
        if (trace - ONE).norm() > tolerance {
            return Err(Error::TraceNotUnity { trace: trace.re });
        }
        let min_eigenvalue = *hermitian_eigenvalues(&mat)?
            .last()
            .expect("matrix dimension is positive");
        if min_eigenvalue < -tolerance {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        Ok(Self { mat, tolerance })
    }

    /// Normalizes a positive operator by its trace and validates the result.
    pub fn from_unnormalized(mat: &ComplexMatrix) -> Result<Self> {
        let trace = mat.trace().re;
        if !(trace > 0.0) {
            return Err(Error::TraceNotUnity { trace });
        }
        Self::new(mat.scale(1.0 / trace))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.dim
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn purity(&self) -> f64 {
        (&self.mat * &self.mat).trace().re
    }
}

impl AsRef<ComplexMatrix> for DensityMatrix {
    fn as_ref(&self) -> &ComplexMatrix {
        &self.mat
    }
}
