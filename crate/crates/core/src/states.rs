//! Named two-qutrit states and seeded random states.
//!
//! Random matrices draw i.i.d. standard complex Gaussian entries from
//! ChaCha20 (`rand_chacha::ChaCha20Rng::seed_from_u64`), filled row-major,
//! real part before imaginary part.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::linalg::{ComplexMatrix, DensityMatrix};

/// Matrix index of qutrit level `|level⟩` (`|2⟩ → 0`, `|1⟩ → 1`, `|0⟩ → 2`).
pub const fn level_index(level: usize) -> usize {
    2 - level
}

/// Matrix index of the two-qutrit basis state `|ab⟩`.
pub const fn pair_index(a: usize, b: usize) -> usize {
    3 * level_index(a) + level_index(b)
}

/// `|ab⟩⟨cd|` as a 9×9 matrix.
pub fn pair_op(ab: (usize, usize), cd: (usize, usize)) -> ComplexMatrix {
    ComplexMatrix::unit(9, pair_index(ab.0, ab.1), pair_index(cd.0, cd.1))
}

/// `(|22⟩ + |11⟩ + |00⟩)/√3`.
pub fn bell_qutrit_vector() -> Vec<Complex64> {
    let mut psi = vec![Complex64::new(0.0, 0.0); 9];
    let amp = Complex64::new(1.0 / 3f64.sqrt(), 0.0);
    for k in 0..3 {
        psi[pair_index(k, k)] = amp;
    }
    psi
}

fn bell_projector() -> ComplexMatrix {
    let psi = bell_qutrit_vector();
    ComplexMatrix::outer(&psi, &psi)
}

pub fn bell_qutrit() -> DensityMatrix {
    DensityMatrix::new(bell_projector()).expect("pure state is valid")
}

/// `|00⟩⟨00|`.
pub fn ground_ground() -> DensityMatrix {
    DensityMatrix::new(pair_op((0, 0), (0, 0))).expect("pure state is valid")
}

/// `(1−η) I₉/9 + η |ψ₀⟩⟨ψ₀|`.
pub fn werner(eta: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(invalid("eta", eta, "must lie in [0, 1]"));
    }
    let mixed = ComplexMatrix::identity(9).scale((1.0 - eta) / 9.0);
    DensityMatrix::new(&mixed + &bell_projector().scale(eta))
}

/// `σ₊ = (|01⟩⟨01| + |12⟩⟨12| + |20⟩⟨20|)/3`.
pub fn sigma_plus() -> ComplexMatrix {
    diagonal_triple([(0, 1), (1, 2), (2, 0)])
}

/// `σ₋ = (|10⟩⟨10| + |21⟩⟨21| + |02⟩⟨02|)/3`.
pub fn sigma_minus() -> ComplexMatrix {
    diagonal_triple([(1, 0), (2, 1), (0, 2)])
}

fn diagonal_triple(kets: [(usize, usize); 3]) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(9);
    for ab in kets {
        let k = pair_index(ab.0, ab.1);
        m[(k, k)] = Complex64::new(1.0 / 3.0, 0.0);
    }
    m
}

/// `(2/7)|ψ₀⟩⟨ψ₀| + (α/7)σ₊ + ((5−α)/7)σ₋`.
pub fn horodecki(alpha: f64) -> Result<DensityMatrix> {
    if !(0.0..=5.0).contains(&alpha) {
        return Err(invalid("alpha", alpha, "must lie in [0, 5]"));
    }
    let m = &(&bell_projector().scale(2.0 / 7.0) + &sigma_plus().scale(alpha / 7.0))
        + &sigma_minus().scale((5.0 - alpha) / 7.0);
    DensityMatrix::new(m)
}

fn ginibre(seed: u64, dim: usize) -> ComplexMatrix {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    ComplexMatrix::from_fn(dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    })
}

/// `GG†/Tr(GG†)` with `G` a seeded complex Ginibre matrix.
pub fn random_density(seed: u64, dim: usize) -> Result<DensityMatrix> {
    if dim < 2 {
        return Err(invalid("dim", dim as f64, "must be at least 2"));
    }
    let g = ginibre(seed, dim);
    DensityMatrix::from_unnormalized(&(&g * &g.adjoint()))
}

/// A seeded random unitary: Gram-Schmidt on the columns of a Ginibre matrix.
pub fn random_unitary(seed: u64, dim: usize) -> ComplexMatrix {
    let g = ginibre(seed, dim);
    let mut cols: Vec<Vec<Complex64>> = (0..dim)
        .map(|j| (0..dim).map(|i| g[(i, j)]).collect())
        .collect();
    for j in 0..dim {
        for k in 0..j {
            let (done, rest) = cols.split_at_mut(j);
            let (prev, cur) = (&done[k], &mut rest[0]);
            let overlap: Complex64 = prev.iter().zip(cur.iter()).map(|(a, b)| a.conj() * b).sum();
            for (c, v) in cur.iter_mut().zip(prev) {
                *c -= overlap * v;
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in &mut cols[j] {
            *z /= norm;
        }
    }
    ComplexMatrix::from_fn(dim, |i, j| cols[j][i])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateFamily {
    Werner(f64),
    Horodecki(f64),
    BellQutrit,
    GroundGround,
    RandomGinibre { seed: u64, dim: usize },
}

impl StateFamily {
    pub fn build(&self) -> Result<DensityMatrix> {
        match *self {
            StateFamily::Werner(eta) => werner(eta),
            StateFamily::Horodecki(alpha) => horodecki(alpha),
            StateFamily::BellQutrit => Ok(bell_qutrit()),
            StateFamily::GroundGround => Ok(ground_ground()),
            StateFamily::RandomGinibre { seed, dim } => random_density(seed, dim),
        }
    }
}
