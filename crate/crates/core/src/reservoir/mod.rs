//! Amplitude damping of a V-type qutrit coupled to a zero-temperature
//! Lorentzian reservoir at resonance.
//!
//! The two excited levels decay through the eigenmodes `±` of the
//! dissipative coupling. In the rotated frame given by
//! [`diagonalizing_unitary`], the mode amplitudes evolve as
//! `c±(t) = G±(t)·c±(0)` and the channel has three Kraus operators.
//! Rates and times are in units of the reference rate `γ₁`.

pub mod oracle;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::linalg::{tensor, ComplexMatrix, DensityMatrix};

/// Slack allowed on `|G±| ≤ 1` before the Kraus construction refuses a snapshot.
const MODULUS_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReservoirParams {
    pub gamma1: f64,
    pub gamma2: f64,
    pub lambda: f64,
    pub theta: f64,
}

impl ReservoirParams {
    pub fn new(gamma1: f64, gamma2: f64, lambda: f64, theta: f64) -> Result<Self> {
        if !(gamma1 > 0.0 && gamma1.is_finite()) {
            return Err(invalid("gamma1", gamma1, "must be positive and finite"));
        }
        if !(gamma2 > 0.0 && gamma2.is_finite()) {
            return Err(invalid("gamma2", gamma2, "must be positive and finite"));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(invalid("lambda", lambda, "must be positive and finite"));
        }
        if !(theta.abs() <= 1.0) {
            return Err(invalid("theta", theta, "must lie in [-1, 1]"));
        }
        Ok(Self {
            gamma1,
            gamma2,
            lambda,
            theta,
        })
    }

    /// Equal decay rates `γ₁ = γ₂ = 1`.
    pub fn symmetric(lambda: f64, theta: f64) -> Result<Self> {
        Self::new(1.0, 1.0, lambda, theta)
    }

    pub fn has_equal_rates(&self) -> bool {
        self.gamma1 == self.gamma2
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureConstants {
    pub h: f64,
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    pub d_plus: Complex64,
    pub d_minus: Complex64,
}

/// `h = √((γ₁−γ₂)² + 4γ₁γ₂θ²)`, `γ± = (γ₁+γ₂±h)/2`, `d± = √(λ² − 2λγ±)`.
///
/// `d±` uses the principal complex root, so it is purely imaginary in the
/// oscillatory regime `λ < 2γ±`.
pub fn structure_constants(r: &ReservoirParams) -> StructureConstants {
    let diff = r.gamma1 - r.gamma2;
    let h = (diff * diff + 4.0 * r.gamma1 * r.gamma2 * r.theta * r.theta).sqrt();
    let gamma_plus = (r.gamma1 + r.gamma2 + h) / 2.0;
    let gamma_minus = (r.gamma1 + r.gamma2 - h) / 2.0;
    let d = |g: f64| Complex64::new(r.lambda * r.lambda - 2.0 * r.lambda * g, 0.0).sqrt();
    StructureConstants {
        h,
        gamma_plus,
        gamma_minus,
        d_plus: d(gamma_plus),
        d_minus: d(gamma_minus),
    }
}

/// `sinh(x)/x`, with its Taylor series near the origin.
fn sinhc(x: Complex64) -> Complex64 {
    if x.norm() < 1e-2 {
        let x2 = x * x;
        1.0 + x2 / 6.0 * (1.0 + x2 / 20.0 * (1.0 + x2 / 42.0 * (1.0 + x2 / 72.0)))
    } else {
        x.sinh() / x
    }
}

/// `e^{−λt/2}(cosh(dt/2) + (λ/d) sinh(dt/2))`, written through `sinh(x)/x`
/// so that `d → 0` reduces to `e^{−λt/2}(1 + λt/2)` without a branch.
fn decay_amplitude(lambda: f64, d: Complex64, t: f64) -> Complex64 {
    let x = d * (t / 2.0);
    let damp = lambda * t / 2.0;
    if x.norm() < 1.0 {
        return (-damp).exp() * (x.cosh() + damp * sinhc(x));
    }
    // e^{-a}cosh x and e^{-a}sinh x from exponentials, so large real x
    // cannot overflow.
    let up = (x - damp).exp();
    let down = (-x - damp).exp();
    (up + down) / 2.0 + (lambda / d) * (up - down) / 2.0
}

/// Decay amplitudes `G±` at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecaySnapshot {
    pub t: f64,
    pub g_plus: Complex64,
    pub g_minus: Complex64,
}

impl DecaySnapshot {
    /// Builds a snapshot from given amplitudes; both moduli must be at most 1.
    pub fn from_amplitudes(t: f64, g_plus: Complex64, g_minus: Complex64) -> Result<Self> {
        for (name, g) in [("|G+|", g_plus), ("|G-|", g_minus)] {
            if !(g.norm() <= 1.0 + MODULUS_SLACK) {
                return Err(invalid(name, g.norm(), "decay amplitude modulus exceeds 1"));
            }
        }
        Ok(Self {
            t,
            g_plus,
            g_minus,
        })
    }

    pub fn modulus_plus(&self) -> f64 {
        self.g_plus.norm()
    }

    pub fn modulus_minus(&self) -> f64 {
        self.g_minus.norm()
    }

    /// `|G₊|²`.
    pub fn population_plus(&self) -> f64 {
        self.g_plus.norm_sqr()
    }

    /// `|G₋|²`.
    pub fn population_minus(&self) -> f64 {
        self.g_minus.norm_sqr()
    }

    /// `φ₊ = arg G₊`.
    pub fn phase_plus(&self) -> f64 {
        self.g_plus.arg()
    }

    /// `φ₋ = arg G₋`.
    pub fn phase_minus(&self) -> f64 {
        self.g_minus.arg()
    }
}

pub fn decay_functions(r: &ReservoirParams, t: f64) -> Result<DecaySnapshot> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid("t", t, "time must be finite and non-negative"));
    }
    let sc = structure_constants(r);
    Ok(DecaySnapshot {
        t,
        g_plus: decay_amplitude(r.lambda, sc.d_plus, t),
        g_minus: decay_amplitude(r.lambda, sc.d_minus, t),
    })
}

/// The 3×3 frame rotation mixing `|2⟩, |1⟩` into the `±` decay modes and
/// leaving the ground state alone.
///
/// When `h = 0` (equal rates, no interference) the modes are already
/// decoupled and the identity is returned.
pub fn diagonalizing_unitary(r: &ReservoirParams) -> ComplexMatrix {
    let h = structure_constants(r).h;
    if h == 0.0 {
        return ComplexMatrix::identity(3);
    }
    let diff = r.gamma1 - r.gamma2;
    let a = ((h + diff).max(0.0) / (2.0 * h)).sqrt();
    let b = ((h - diff).max(0.0) / (2.0 * h)).sqrt();
    ComplexMatrix::from_real(3, &[a, -b, 0.0, b, a, 0.0, 0.0, 0.0, 1.0])
        .expect("rotation entries are finite")
}

/// `κ₁ = diag(G₊, G₋, 1)`, `κ₂ = √(1−|G₊|²)|g⟩⟨+|`, `κ₃ = √(1−|G₋|²)|g⟩⟨−|`.
pub fn kraus_operators(s: &DecaySnapshot) -> Result<[ComplexMatrix; 3]> {
    let s = DecaySnapshot::from_amplitudes(s.t, s.g_plus, s.g_minus)?;
    let one = Complex64::new(1.0, 0.0);
    let k1 = ComplexMatrix::from_diagonal(&[s.g_plus, s.g_minus, one]);
    let mut k2 = ComplexMatrix::zeros(3);
    k2[(2, 0)] = Complex64::new((1.0 - s.population_plus()).max(0.0).sqrt(), 0.0);
    let mut k3 = ComplexMatrix::zeros(3);
    k3[(2, 1)] = Complex64::new((1.0 - s.population_minus()).max(0.0).sqrt(), 0.0);
    Ok([k1, k2, k3])
}

/// The nine operators `κ_k ⊗ κ_l` of two independent reservoirs.
pub fn two_qutrit_kraus_operators(s: &DecaySnapshot) -> Result<Vec<ComplexMatrix>> {
    let single = kraus_operators(s)?;
    let mut out = Vec::with_capacity(9);
    for a in &single {
        for b in &single {
            out.push(tensor(a, b));
        }
    }
    Ok(out)
}

/// `Σ κ ρ κ†`.
pub fn apply_kraus(ops: &[ComplexMatrix], rho: &ComplexMatrix) -> ComplexMatrix {
    let mut acc = ComplexMatrix::zeros(rho.dim());
    for k in ops {
        acc = &acc + &rho.conjugate_by(k);
    }
    acc
}

fn check_dim(rho: &DensityMatrix, expected: usize) -> Result<()> {
    if rho.dim() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: rho.dim(),
        });
    }
    Ok(())
}

/// `ρ(t) = U† (Σ κᵢ (U ρ₀ U†) κᵢ†) U` for one qutrit.
pub fn apply_channel_single(rho0: &DensityMatrix, r: &ReservoirParams, t: f64) -> Result<DensityMatrix> {
    check_dim(rho0, 3)?;
    let u = diagonalizing_unitary(r);
    let kraus = kraus_operators(&decay_functions(r, t)?)?;
    let framed = rho0.matrix().conjugate_by(&u);
    DensityMatrix::new(apply_kraus(&kraus, &framed).conjugate_by_adjoint(&u))
}

/// Two qutrits, each damped by its own reservoir with the same parameters.
pub fn apply_channel_two_qutrit(
    rho0: &DensityMatrix,
    r: &ReservoirParams,
    t: f64,
) -> Result<DensityMatrix> {
    check_dim(rho0, 9)?;
    let u = diagonalizing_unitary(r);
    let uu = tensor(&u, &u);
    let kraus = two_qutrit_kraus_operators(&decay_functions(r, t)?)?;
    let framed = rho0.matrix().conjugate_by(&uu);
    DensityMatrix::new(apply_kraus(&kraus, &framed).conjugate_by_adjoint(&uu))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn sym(lambda: f64, theta: f64) -> ReservoirParams {
        ReservoirParams::symmetric(lambda, theta).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn params_validation() {
        assert!(ReservoirParams::new(0.0, 1.0, 1.0, 0.0).is_err());
        assert!(ReservoirParams::new(1.0, -1.0, 1.0, 0.0).is_err());
        assert!(ReservoirParams::new(1.0, 1.0, 0.0, 0.0).is_err());
        assert!(ReservoirParams::new(1.0, 1.0, 1.0, 1.5).is_err());
        assert!(ReservoirParams::new(1.0, 1.0, f64::NAN, 0.0).is_err());
        assert!(ReservoirParams::new(1.0, 2.0, 0.5, -1.0).is_ok());
    }

    #[test]
    fn structure_constants_examples() {
        let lam = 3.0;
        let sc = structure_constants(&sym(lam, 0.0));
        assert_eq!(sc.h, 0.0);
        assert_eq!((sc.gamma_plus, sc.gamma_minus), (1.0, 1.0));
        assert!((sc.d_plus - c((lam * lam - 2.0 * lam).sqrt())).norm() < 1e-15);

        let sc = structure_constants(&sym(0.7, 1.0));
        assert_eq!(sc.h, 2.0);
        assert_eq!((sc.gamma_plus, sc.gamma_minus), (2.0, 0.0));
        assert!((sc.d_minus - c(0.7)).norm() < 1e-15);

        let sc = structure_constants(&sym(1.0, 0.0));
        assert!((sc.d_plus - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!((sc.d_minus - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn decay_starts_at_one() {
        for (lam, theta) in [(0.1, 0.0), (1.0, 0.5), (5.0, 1.0)] {
            let s = decay_functions(&sym(lam, theta), 0.0).unwrap();
            assert_eq!(s.g_plus, c(1.0));
            assert_eq!(s.g_minus, c(1.0));
            assert_eq!(s.phase_plus(), 0.0);
        }
    }

    #[test]
    fn decay_at_pi_and_zero_crossing() {
        let r = sym(1.0, 0.0);
        let s = decay_functions(&r, PI).unwrap();
        assert!((s.g_plus - c((-PI / 2.0).exp())).norm() < 1e-14);
        let s = decay_functions(&r, 1.5 * PI).unwrap();
        assert!(s.g_plus.norm() < 1e-14);
    }

    #[test]
    fn removable_singularity_at_d_zero() {
        // γ₊ = γ₋ = λ/2 makes d± vanish exactly.
        let r = sym(2.0, 0.0);
        for t in [0.0, 1e-9, 0.3, 4.0, 20.0] {
            let s = decay_functions(&r, t).unwrap();
            let want = (-t).exp() * (1.0 + t);
            assert!((s.g_plus - c(want)).norm() < 1e-15 * want.max(1.0), "t = {t}");
        }
        // Nearly-degenerate d must be continuous with the limit.
        let near = ReservoirParams::new(1.0, 1.0, 2.0 + 1e-12, 0.0).unwrap();
        let s = decay_functions(&near, 3.0).unwrap();
        assert!((s.g_plus.re - (-3.0f64).exp() * 4.0).abs() < 1e-10);
    }

    #[test]
    fn strongly_markovian_does_not_overflow() {
        let r = sym(2000.0, 0.0);
        let s = decay_functions(&r, 20.0).unwrap();
        assert!(s.g_plus.re.is_finite());
        assert!(s.g_plus.norm() <= 1.0);
    }

    #[test]
    fn decay_rejects_negative_time() {
        assert!(decay_functions(&sym(1.0, 0.0), -1.0).is_err());
        assert!(decay_functions(&sym(1.0, 0.0), f64::INFINITY).is_err());
    }

    #[test]
    fn unitary_for_equal_rates_with_interference() {
        let u = diagonalizing_unitary(&sym(1.0, 0.4));
        for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            assert!((u[(i, j)].norm() - FRAC_1_SQRT_2).abs() < 1e-15);
        }
        assert_eq!(diagonalizing_unitary(&sym(1.0, 0.0)), ComplexMatrix::identity(3));
    }

    #[test]
    fn unitary_limits_of_decoupled_rates() {
        // γ₁ ≫ γ₂ leaves the frame untouched; γ₂ ≫ γ₁ swaps the two excited levels.
        let u = diagonalizing_unitary(&ReservoirParams::new(100.0, 1.0, 1.0, 1e-6).unwrap());
        assert!(u.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-6);
        let u = diagonalizing_unitary(&ReservoirParams::new(1.0, 100.0, 1.0, 1e-6).unwrap());
        let swap = ComplexMatrix::from_real(3, &[0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(u.max_abs_diff(&swap) < 1e-6);
    }

    #[test]
    fn unitary_is_unitary() {
        for (g1, g2, th) in [(1.0, 1.0, 0.3), (1.0, 2.5, 0.0), (3.0, 0.5, -0.8), (1.0, 1.0, 1.0)] {
            let u = diagonalizing_unitary(&ReservoirParams::new(g1, g2, 1.0, th).unwrap());
            assert!((&u * &u.adjoint()).max_abs_diff(&ComplexMatrix::identity(3)) < 1e-12);
        }
    }

    fn completeness(ops: &[ComplexMatrix]) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(ops[0].dim());
        for k in ops {
            acc = &acc + &(&k.adjoint() * k);
        }
        acc
    }

    #[test]
    fn kraus_at_time_zero() {
        let [k1, k2, k3] = kraus_operators(&decay_functions(&sym(1.0, 0.0), 0.0).unwrap()).unwrap();
        assert_eq!(k1, ComplexMatrix::identity(3));
        assert_eq!(k2, ComplexMatrix::zeros(3));
        assert_eq!(k3, ComplexMatrix::zeros(3));
    }

    #[test]
    fn kraus_direct_substitution() {
        let s = DecaySnapshot::from_amplitudes(1.0, c(0.5), c(0.8)).unwrap();
        let ops = kraus_operators(&s).unwrap();
        assert!((ops[1][(2, 0)].re - 0.75f64.sqrt()).abs() < 1e-15);
        assert!((ops[2][(2, 1)].re - 0.6).abs() < 1e-15);
        assert!(completeness(&ops).max_abs_diff(&ComplexMatrix::identity(3)) < 1e-12);
    }

    #[test]
    fn kraus_long_time_markovian() {
        let s = decay_functions(&sym(10.0, 0.0), 200.0).unwrap();
        let ops = kraus_operators(&s).unwrap();
        assert!(ops[0].max_abs_diff(&ComplexMatrix::from_real_diagonal(&[0.0, 0.0, 1.0])) < 1e-12);
    }

    #[test]
    fn kraus_rejects_amplitude_above_one() {
        assert!(DecaySnapshot::from_amplitudes(0.0, c(1.1), c(0.5)).is_err());
        let bad = DecaySnapshot {
            t: 0.0,
            g_plus: c(0.2),
            g_minus: c(-1.01),
        };
        assert!(kraus_operators(&bad).is_err());
    }

    #[test]
    fn two_qutrit_kraus_completeness() {
        let s = decay_functions(&sym(0.1, 0.5), 3.3).unwrap();
        let ops = two_qutrit_kraus_operators(&s).unwrap();
        assert_eq!(ops.len(), 9);
        assert!(completeness(&ops).max_abs_diff(&ComplexMatrix::identity(9)) < 1e-12);
    }

    fn ground() -> DensityMatrix {
        DensityMatrix::new(ComplexMatrix::unit(3, 2, 2)).unwrap()
    }

    #[test]
    fn ground_state_is_dark() {
        for t in [0.0, 1.0, 7.5] {
            let out = apply_channel_single(&ground(), &sym(0.1, 0.3), t).unwrap();
            assert!(out.matrix().max_abs_diff(ground().matrix()) < 1e-15);
        }
        let gg = DensityMatrix::new(ComplexMatrix::unit(9, 8, 8)).unwrap();
        let out = apply_channel_two_qutrit(&gg, &sym(1.0, 0.7), 2.0).unwrap();
        assert!(out.matrix().max_abs_diff(gg.matrix()) < 1e-15);
    }

    #[test]
    fn channel_is_identity_at_time_zero() {
        let rho = DensityMatrix::new(
            ComplexMatrix::from_real(3, &[0.5, 0.1, 0.2, 0.1, 0.3, 0.0, 0.2, 0.0, 0.2]).unwrap(),
        )
        .unwrap();
        let out = apply_channel_single(&rho, &sym(1.0, 0.6), 0.0).unwrap();
        assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-15);
    }

    #[test]
    fn excited_population_after_time_pi() {
        let top = DensityMatrix::new(ComplexMatrix::unit(3, 0, 0)).unwrap();
        let out = apply_channel_single(&top, &sym(1.0, 0.0), PI).unwrap();
        let want = (-PI).exp();
        assert!((out.matrix()[(0, 0)].re - want).abs() < 1e-14);
        assert!((out.matrix()[(2, 2)].re - (1.0 - want)).abs() < 1e-14);
    }

    #[test]
    fn channel_rejects_wrong_dimension() {
        let rho = DensityMatrix::new(ComplexMatrix::unit(9, 8, 8)).unwrap();
        assert!(apply_channel_single(&rho, &sym(1.0, 0.0), 1.0).is_err());
        assert!(apply_channel_two_qutrit(&ground(), &sym(1.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn independent_reservoirs_factorize() {
        let a = DensityMatrix::new(
            ComplexMatrix::from_real(3, &[0.5, 0.1, 0.2, 0.1, 0.3, 0.0, 0.2, 0.0, 0.2]).unwrap(),
        )
        .unwrap();
        let b = DensityMatrix::new(ComplexMatrix::from_real_diagonal(&[0.2, 0.7, 0.1])).unwrap();
        let r = ReservoirParams::new(1.0, 1.7, 0.4, 0.6).unwrap();
        let t = 2.2;
        let joint = DensityMatrix::new(tensor(a.matrix(), b.matrix())).unwrap();
        let lhs = apply_channel_two_qutrit(&joint, &r, t).unwrap();
        let rhs = tensor(
            apply_channel_single(&a, &r, t).unwrap().matrix(),
            apply_channel_single(&b, &r, t).unwrap().matrix(),
        );
        assert!(lhs.matrix().max_abs_diff(&rhs) < 1e-14);
    }
}
