//! Generalized Gell-Mann expansion of bipartite states and the geometric
//! discord computed from it.
//!
//! Generators are ordered canonically: symmetric pairs `E_jk + E_kj`, then
//! antisymmetric pairs `−i(E_jk − E_kj)`, each lexicographic in `(j, k)`
//! with `j < k`, then the diagonal generators for `l = 1, …, m−1`. The
//! normalization is `Tr(λ_i λ_j) = 2δ_ij`. For `m = 2` this yields
//! `(σ_x, σ_y, σ_z)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, tensor, ComplexMatrix, DensityMatrix};

/// Bound on `|Im Tr(ρ λ_i ⊗ λ_j)|` beyond the state's own Hermiticity tolerance.
const IMAG_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    Symmetric,
    Antisymmetric,
    Diagonal,
}

#[derive(Debug, Clone)]
pub struct GeneratorSet {
    m: usize,
    generators: Vec<ComplexMatrix>,
    kinds: Vec<GeneratorKind>,
    // (row, col, value) triples of each generator; at most m nonzeros each.
    sparse: Vec<Vec<(usize, usize, Complex64)>>,
}

impl GeneratorSet {
    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generators(&self) -> &[ComplexMatrix] {
        &self.generators
    }

    pub fn kind(&self, i: usize) -> GeneratorKind {
        self.kinds[i]
    }

    pub fn get(&self, i: usize) -> &ComplexMatrix {
        &self.generators[i]
    }
}

/// The `m² − 1` generalized Gell-Mann matrices of SU(m).
pub fn gellmann(m: usize) -> Result<GeneratorSet> {
    if m < 2 {
        return Err(Error::InvalidParameter {
            name: "m",
            value: m as f64,
            reason: "SU(m) generators need m >= 2",
        });
    }
    let one = Complex64::new(1.0, 0.0);
    let i_unit = Complex64::new(0.0, 1.0);
    let mut sparse = Vec::with_capacity(m * m - 1);
    let mut kinds = Vec::with_capacity(m * m - 1);

    for j in 0..m {
        for k in j + 1..m {
            sparse.push(vec![(j, k, one), (k, j, one)]);
            kinds.push(GeneratorKind::Symmetric);
        }
    }
    for j in 0..m {
        for k in j + 1..m {
            sparse.push(vec![(j, k, -i_unit), (k, j, i_unit)]);
            kinds.push(GeneratorKind::Antisymmetric);
        }
    }
    for l in 1..m {
        let norm = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut entries: Vec<_> = (0..l).map(|j| (j, j, one * norm)).collect();
        entries.push((l, l, Complex64::new(-(l as f64) * norm, 0.0)));
        sparse.push(entries);
        kinds.push(GeneratorKind::Diagonal);
    }

    let generators = sparse
        .iter()
        .map(|entries| {
            let mut g = ComplexMatrix::zeros(m);
            for &(r, c, v) in entries {
                g[(r, c)] = v;
            }
            g
        })
        .collect();

    Ok(GeneratorSet {
        m,
        generators,
        kinds,
        sparse,
    })
}

/// Coefficients of `ρ = (1/mn)(I⊗I + Σ xᵢ λᵢ⊗I + Σ yⱼ I⊗λⱼ + Σ tᵢⱼ λᵢ⊗λⱼ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochDecomposition {
    pub m: usize,
    pub n: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Row-major `(m²−1) × (n²−1)`.
    pub t: Vec<f64>,
}

impl BlochDecomposition {
    pub fn t(&self, i: usize, j: usize) -> f64 {
        self.t[i * (self.n * self.n - 1) + j]
    }

    /// Rebuilds the density operator from the coefficients.
    pub fn reconstruct(&self) -> Result<ComplexMatrix> {
        let ga = gellmann(self.m)?;
        let gb = gellmann(self.n)?;
        let ia = ComplexMatrix::identity(self.m);
        let ib = ComplexMatrix::identity(self.n);
        let mut acc = ComplexMatrix::identity(self.m * self.n);
        for (i, &xi) in self.x.iter().enumerate() {
            acc = &acc + &tensor(ga.get(i), &ib).scale(xi);
        }
        for (j, &yj) in self.y.iter().enumerate() {
            acc = &acc + &tensor(&ia, gb.get(j)).scale(yj);
        }
        for i in 0..ga.len() {
            for j in 0..gb.len() {
                acc = &acc + &tensor(ga.get(i), gb.get(j)).scale(self.t(i, j));
            }
        }
        Ok(acc.scale(1.0 / (self.m * self.n) as f64))
    }
}

/// `Tr(ρ (A ⊗ B))` from the sparse entries of `A` and `B`.
fn trace_against(
    rho: &ComplexMatrix,
    n: usize,
    a: &[(usize, usize, Complex64)],
    b: &[(usize, usize, Complex64)],
) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &(ar, ac, av) in a {
        for &(br, bc, bv) in b {
            acc += rho[(ac * n + bc, ar * n + br)] * av * bv;
        }
    }
    acc
}

fn identity_entries(n: usize) -> Vec<(usize, usize, Complex64)> {
    (0..n).map(|k| (k, k, Complex64::new(1.0, 0.0))).collect()
}

fn real_part(z: Complex64, allowance: f64) -> Result<f64> {
    if z.im.abs() > allowance {
        return Err(Error::ComplexCorrelation { imag: z.im });
    }
    Ok(z.re)
}

pub fn bloch_decompose(rho: &DensityMatrix, m: usize, n: usize) -> Result<BlochDecomposition> {
    if rho.dim() != m * n {
        return Err(Error::DimensionMismatch {
            expected: m * n,
            found: rho.dim(),
        });
    }
    let ga = gellmann(m)?;
    let gb = gellmann(n)?;
    let mat = rho.matrix();
    let allowance = IMAG_TOLERANCE + rho.tolerance();
    let ia = identity_entries(m);
    let ib = identity_entries(n);

    let x = ga
        .sparse
        .iter()
        .map(|a| real_part(trace_against(mat, n, a, &ib), allowance).map(|v| v * m as f64 / 2.0))
        .collect::<Result<Vec<_>>>()?;
    let y = gb
        .sparse
        .iter()
        .map(|b| real_part(trace_against(mat, n, &ia, b), allowance).map(|v| v * n as f64 / 2.0))
        .collect::<Result<Vec<_>>>()?;
    let scale = (m * n) as f64 / 4.0;
    let mut t = Vec::with_capacity(ga.len() * gb.len());
    for a in &ga.sparse {
        for b in &gb.sparse {
            t.push(real_part(trace_against(mat, n, a, b), allowance)? * scale);
        }
    }
    Ok(BlochDecomposition { m, n, x, y, t })
}

/// The real `m² × n²` matrix `C = [Tr(ρ Xᵢ ⊗ Yⱼ)]` in the orthonormal bases
/// `X₀ = I/√m`, `X_{i>0} = λᵢ/√2` (likewise `Y`).
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl CorrelationMatrix {
    pub fn from_bloch(b: &BlochDecomposition) -> Self {
        let (m, n) = (b.m as f64, b.n as f64);
        let rows = b.m * b.m;
        let cols = b.n * b.n;
        let mut entries = vec![0.0; rows * cols];
        entries[0] = 1.0 / (m * n).sqrt();
        let top = 2f64.sqrt() / (n * m.sqrt());
        for (j, &yj) in b.y.iter().enumerate() {
            entries[j + 1] = top * yj;
        }
        let left = 2f64.sqrt() / (m * n.sqrt());
        for (i, &xi) in b.x.iter().enumerate() {
            entries[(i + 1) * cols] = left * xi;
        }
        let block = 2.0 / (m * n);
        for i in 0..rows - 1 {
            for j in 0..cols - 1 {
                entries[(i + 1) * cols + j + 1] = block * b.t(i, j);
            }
        }
        Self {
            rows,
            cols,
            entries,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    /// `C Cᵀ` (equal to `C C†`, since `C` is real).
    pub fn gram(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.rows, |i, k| {
            let s: f64 = (0..self.cols).map(|j| self.get(i, j) * self.get(k, j)).sum();
            Complex64::new(s, 0.0)
        })
    }

    /// `Tr(C Cᵀ)`, which equals the purity `Tr ρ²`.
    pub fn frobenius_sq(&self) -> f64 {
        self.entries.iter().map(|c| c * c).sum()
    }
}

pub fn correlation_matrix(rho: &DensityMatrix, m: usize, n: usize) -> Result<CorrelationMatrix> {
    Ok(CorrelationMatrix::from_bloch(&bloch_decompose(rho, m, n)?))
}

/// `Σ_{i>m} μᵢ` over the eigenvalues of `CC†` sorted non-increasing, without
/// clamping. May come out slightly negative on zero-discord states.
pub fn gqd_lower_bound_raw(rho: &DensityMatrix, m: usize, n: usize) -> Result<f64> {
    let c = correlation_matrix(rho, m, n)?;
    let mu = hermitian_eigenvalues(&c.gram())?;
    Ok(mu[m..].iter().sum())
}

/// Lower bound on the geometric discord (measured on subsystem A), clamped at 0.
pub fn gqd_lower_bound(rho: &DensityMatrix, m: usize, n: usize) -> Result<f64> {
    let raw = gqd_lower_bound_raw(rho, m, n)?;
    Ok(if raw > 0.0 { raw } else { 0.0 })
}

/// Exact geometric discord of a two-qubit state,
/// `(‖x‖² + ‖T‖² − μ_max(xxᵀ + TTᵀ)) / 4`.
pub fn gqd_two_qubit(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: rho.dim(),
        });
    }
    let b = bloch_decompose(rho, 2, 2)?;
    let k = ComplexMatrix::from_fn(3, |i, j| {
        let tt: f64 = (0..3).map(|l| b.t(i, l) * b.t(j, l)).sum();
        Complex64::new(b.x[i] * b.x[j] + tt, 0.0)
    });
    let mu_max = hermitian_eigenvalues(&k)?[0];
    let x_sq: f64 = b.x.iter().map(|v| v * v).sum();
    let t_sq: f64 = b.t.iter().map(|v| v * v).sum();
    Ok((x_sq + t_sq - mu_max) / 4.0)
}
