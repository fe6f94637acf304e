//! Weak measurement and measurement reversal around the damping channel.
//!
//! The pipeline for one qutrit (two qutrits use the twofold tensor power of
//! every operator):
//!
//! 1. rotate into the decay-mode frame, `ϱ = U ρ₀ U†`;
//! 2. weak measurement `M_w = diag(√(1−p), √(1−q), 1)`;
//! 3. damping channel `Σ κᵢ · κᵢ†`;
//! 4. reversal `M_r = diag(√(1−q_r), √(1−p_r), √((1−q_r)(1−p_r)))` at the
//!    optimal strengths;
//! 5. phase removal `V† · V` with `V = diag(e^{iφ₊}, e^{iφ₋}, 1)`;
//! 6. rotate back, `U† · U`, and normalize once.
//!
//! All stages are linear, so the single trace normalization at the end is
//! the post-selection success probability.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::linalg::{tensor, ComplexMatrix, DensityMatrix};
use crate::reservoir::{
    apply_kraus, decay_functions, diagonalizing_unitary, kraus_operators,
    two_qutrit_kraus_operators, DecaySnapshot, ReservoirParams,
};
use crate::states::{horodecki, pair_op, werner};

/// Smallest success probability the pipeline will normalize.
///
/// Every stage multiplies by diagonal factors, so the unnormalized state
/// keeps full relative precision until the probability underflows.
pub const MIN_SUCCESS_PROBABILITY: f64 = f64::MIN_POSITIVE;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakMeasurementParams {
    pub p: f64,
    pub q: f64,
}

impl WeakMeasurementParams {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        check_strength("p", p)?;
        check_strength("q", q)?;
        Ok(Self { p, q })
    }

    /// `p = q`.
    pub fn symmetric(p: f64) -> Result<Self> {
        Self::new(p, p)
    }

    pub fn none() -> Self {
        Self { p: 0.0, q: 0.0 }
    }

    pub fn operator(&self) -> ComplexMatrix {
        ComplexMatrix::from_real_diagonal(&[(1.0 - self.p).sqrt(), (1.0 - self.q).sqrt(), 1.0])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReversalParams {
    pub p_r: f64,
    pub q_r: f64,
}

impl ReversalParams {
    pub fn new(p_r: f64, q_r: f64) -> Result<Self> {
        check_strength("p_r", p_r)?;
        check_strength("q_r", q_r)?;
        Ok(Self { p_r, q_r })
    }

    /// Note the crossed assignment: `q_r` sits on the first level, `p_r` on the second.
    pub fn operator(&self) -> ComplexMatrix {
        reversal_operator(1.0 - self.p_r, 1.0 - self.q_r)
    }
}

/// `M_r` from the transmissions `1 − p_r` and `1 − q_r`.
fn reversal_operator(keep_p: f64, keep_q: f64) -> ComplexMatrix {
    ComplexMatrix::from_real_diagonal(&[keep_q.sqrt(), keep_p.sqrt(), (keep_p * keep_q).sqrt()])
}

fn check_strength(name: &'static str, v: f64) -> Result<()> {
    if !(0.0..1.0).contains(&v) {
        return Err(invalid(name, v, "measurement strength must lie in [0, 1)"));
    }
    Ok(())
}

/// `p_r = 1 − (1−p)|G₊|²`, `q_r = 1 − (1−q)|G₋|²`.
///
/// At a zero of `G±` this yields a strength of exactly 1, which the
/// pipeline then reports as a degenerate outcome.
pub fn optimal_reversal(w: &WeakMeasurementParams, s: &DecaySnapshot) -> ReversalParams {
    ReversalParams {
        p_r: 1.0 - (1.0 - w.p) * s.population_plus(),
        q_r: 1.0 - (1.0 - w.q) * s.population_minus(),
    }
}

/// Raises a single-qutrit operator to the number of qutrits in `rho`.
fn lift(op: ComplexMatrix, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    match rho.dim() {
        3 => Ok(op),
        9 => Ok(tensor(&op, &op)),
        found => Err(Error::DimensionMismatch { expected: 9, found }),
    }
}

/// `M_w ρ M_w†` (or with `M_w ⊗ M_w` on two qutrits).
pub fn weak_measure(rho: &ComplexMatrix, w: &WeakMeasurementParams) -> Result<ComplexMatrix> {
    Ok(rho.conjugate_by(&lift(w.operator(), rho)?))
}

/// `M_r ρ M_r†` (or with `M_r ⊗ M_r` on two qutrits).
pub fn reversal_measure(rho: &ComplexMatrix, rv: &ReversalParams) -> Result<ComplexMatrix> {
    Ok(rho.conjugate_by(&lift(rv.operator(), rho)?))
}

/// `V† ρ V` with `V = diag(e^{iφ₊}, e^{iφ₋}, 1)` (or `V ⊗ V`).
pub fn phase_removal(rho: &ComplexMatrix, s: &DecaySnapshot) -> Result<ComplexMatrix> {
    let v = ComplexMatrix::from_diagonal(&[
        Complex64::from_polar(1.0, s.phase_plus()),
        Complex64::from_polar(1.0, s.phase_minus()),
        Complex64::new(1.0, 0.0),
    ]);
    Ok(rho.conjugate_by_adjoint(&lift(v, rho)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolResult {
    pub state: DensityMatrix,
    /// Normalization factor: the pipeline trace, or `N_w`/`N_α` for the
    /// closed forms.
    pub norm: f64,
    /// Trace of the state before normalization.
    pub success_prob: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reversal {
    Optimal,
    Fixed(ReversalParams),
    Disabled,
}

/// Which stages of the pipeline run. The damping channel always runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineStages {
    pub weak: WeakMeasurementParams,
    pub reversal: Reversal,
    pub phase_correction: bool,
}

impl PipelineStages {
    pub fn full(weak: WeakMeasurementParams) -> Self {
        Self {
            weak,
            reversal: Reversal::Optimal,
            phase_correction: true,
        }
    }

    /// Only the damping channel.
    pub fn channel_only() -> Self {
        Self {
            weak: WeakMeasurementParams::none(),
            reversal: Reversal::Disabled,
            phase_correction: false,
        }
    }
}

/// Runs the selected stages on a one- or two-qutrit state.
pub fn run_pipeline(
    rho0: &DensityMatrix,
    r: &ReservoirParams,
    t: f64,
    stages: &PipelineStages,
) -> Result<ProtocolResult> {
    let rho = rho0.matrix();
    let snapshot = decay_functions(r, t)?;
    let u = lift(diagonalizing_unitary(r), rho)?;
    let kraus = match rho.dim() {
        3 => kraus_operators(&snapshot)?.to_vec(),
        _ => two_qutrit_kraus_operators(&snapshot)?,
    };

    let mut state = rho.conjugate_by(&u);
    state = weak_measure(&state, &stages.weak)?;
    state = apply_kraus(&kraus, &state);
    match stages.reversal {
        Reversal::Optimal => {
            // Built from (1−p)|G±|² directly; going through p_r would cancel
            // catastrophically once |G±|² is small.
            let keep_p = (1.0 - stages.weak.p) * snapshot.population_plus();
            let keep_q = (1.0 - stages.weak.q) * snapshot.population_minus();
            state = state.conjugate_by(&lift(reversal_operator(keep_p, keep_q), &state)?);
        }
        Reversal::Fixed(rv) => state = reversal_measure(&state, &rv)?,
        Reversal::Disabled => {}
    }
    if stages.phase_correction {
        state = phase_removal(&state, &snapshot)?;
    }
    state = state.conjugate_by_adjoint(&u);

    let success_prob = state.trace().re;
    if !(success_prob >= MIN_SUCCESS_PROBABILITY) {
        return Err(Error::DegenerateOutcome { success_prob });
    }
    Ok(ProtocolResult {
        state: DensityMatrix::new(state.scale(1.0 / success_prob))?,
        norm: success_prob,
        success_prob,
    })
}

fn require_equal_rates(r: &ReservoirParams) -> Result<()> {
    if !r.has_equal_rates() {
        return Err(invalid(
            "gamma2",
            r.gamma2,
            "the protection protocol needs gamma1 == gamma2",
        ));
    }
    Ok(())
}

fn require_dim(rho: &DensityMatrix, expected: usize) -> Result<()> {
    if rho.dim() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: rho.dim(),
        });
    }
    Ok(())
}

/// Full protection of one qutrit; the result equals
/// `(ρ₀ + f′|0⟩⟨0|)/(1 + f′)` with success probability `R(1 + f′)`.
pub fn protect_single(
    rho0: &DensityMatrix,
    r: &ReservoirParams,
    w: &WeakMeasurementParams,
    t: f64,
) -> Result<ProtocolResult> {
    require_dim(rho0, 3)?;
    require_equal_rates(r)?;
    run_pipeline(rho0, r, t, &PipelineStages::full(*w))
}

pub fn protect_two_qutrit(
    rho0: &DensityMatrix,
    r: &ReservoirParams,
    w: &WeakMeasurementParams,
    t: f64,
) -> Result<ProtocolResult> {
    require_dim(rho0, 9)?;
    require_equal_rates(r)?;
    run_pipeline(rho0, r, t, &PipelineStages::full(*w))
}

/// The damping-dependent coefficients shared by the two-qutrit closed forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormCoefficients {
    /// `R = (1−p)(1−q)|G₊|²|G₋|²`.
    pub r: f64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    pub s4: f64,
}

impl ClosedFormCoefficients {
    pub fn new(w: &WeakMeasurementParams, s: &DecaySnapshot) -> Self {
        let (gp, gm) = (s.population_plus(), s.population_minus());
        let a = (1.0 - w.p) * (1.0 - gp);
        let b = (1.0 - w.q) * (1.0 - gm);
        let s1 = a * a + b * b;
        Self {
            r: (1.0 - w.p) * (1.0 - w.q) * gp * gm,
            s1,
            s2: s1 + 2.0 * a * b,
            s3: a + b,
            s4: b - a,
        }
    }
}

/// `|20⟩⟨20| + |02⟩⟨02| + |10⟩⟨10| + |01⟩⟨01|`.
fn excited_ground_populations() -> ComplexMatrix {
    [(2, 0), (0, 2), (1, 0), (0, 1)]
        .into_iter()
        .fold(ComplexMatrix::zeros(9), |acc, k| &acc + &pair_op(k, k))
}

/// `|10⟩⟨20| + |01⟩⟨02| + |20⟩⟨10| + |02⟩⟨01|`.
fn excited_ground_coherences() -> ComplexMatrix {
    [((1, 0), (2, 0)), ((0, 1), (0, 2)), ((2, 0), (1, 0)), ((0, 2), (0, 1))]
        .into_iter()
        .fold(ComplexMatrix::zeros(9), |acc, (a, b)| &acc + &pair_op(a, b))
}

fn closed_form_result(bracket: ComplexMatrix, relative_norm: f64, r: f64) -> Result<ProtocolResult> {
    let norm = r * r * relative_norm;
    Ok(ProtocolResult {
        state: DensityMatrix::new(bracket.scale(1.0 / relative_norm))?,
        norm,
        success_prob: norm,
    })
}

/// The protected Werner state assembled directly from `s₁…s₄`.
///
/// `R²` cancels between the bracket and `N_w`, so the normalized state is
/// finite even where the success probability vanishes. The expression is
/// written in the frame where the decay modes are the symmetric and
/// antisymmetric combinations of `|2⟩, |1⟩`; with `θ = 0` it agrees with
/// the pipeline whenever `p = q`.
pub fn closed_form_werner(
    eta: f64,
    r: &ReservoirParams,
    w: &WeakMeasurementParams,
    t: f64,
) -> Result<ProtocolResult> {
    require_equal_rates(r)?;
    let rho0 = werner(eta)?;
    let c = ClosedFormCoefficients::new(w, &decay_functions(r, t)?);

    let ground = (eta / 3.0) * c.s1 + (1.0 - eta) / 9.0 * (c.s2 + 2.0 * c.s3);
    let bracket = [
        pair_op((0, 0), (0, 0)).scale(ground),
        excited_ground_populations().scale((eta + 2.0) / 18.0 * c.s3),
        excited_ground_coherences().scale(eta / 6.0 * c.s4),
    ]
    .iter()
    .fold(rho0.into_matrix(), |acc, m| &acc + m);

    let relative_norm = 1.0 + (eta / 3.0) * c.s1 + (1.0 - eta) / 9.0 * c.s2 + (2.0 / 3.0) * c.s3;
    closed_form_result(bracket, relative_norm, c.r)
}

/// The protected Horodecki state assembled directly from `s₁…s₄`.
///
/// The α-weighted population shift carries `(5−α)`: it is the `σ₋`
/// component of the input, the one holding `|21⟩` and `|02⟩`, that feeds
/// `|20⟩` and `|01⟩` after damping.
pub fn closed_form_horodecki(
    alpha: f64,
    r: &ReservoirParams,
    w: &WeakMeasurementParams,
    t: f64,
) -> Result<ProtocolResult> {
    require_equal_rates(r)?;
    let rho0 = horodecki(alpha)?;
    let c = ClosedFormCoefficients::new(w, &decay_functions(r, t)?);

    let tilt = &(&pair_op((2, 0), (2, 0)) + &pair_op((0, 1), (0, 1)))
        - &(&pair_op((1, 0), (1, 0)) + &pair_op((0, 2), (0, 2)));
    let lifted = &pair_op((1, 0), (1, 0)) + &pair_op((0, 2), (0, 2));
    let bracket = [
        pair_op((0, 0), (0, 0)).scale((2.0 * c.s1 + 1.25 * c.s2 + 5.0 * c.s3) / 21.0),
        excited_ground_populations().scale(c.s3 / 21.0),
        excited_ground_coherences().scale(c.s4 / 21.0),
        tilt.scale((5.0 - alpha) / 42.0 * c.s3),
        lifted.scale(5.0 / 42.0 * c.s3),
    ]
    .iter()
    .fold(rho0.into_matrix(), |acc, m| &acc + m);

    let relative_norm = 1.0 + (2.0 * c.s1 + 1.25 * c.s2 + 14.0 * c.s3) / 21.0;
    closed_form_result(bracket, relative_norm, c.r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::trace_distance;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn snapshot(gp: f64, gm: f64) -> DecaySnapshot {
        DecaySnapshot::from_amplitudes(1.0, c(gp), c(gm)).unwrap()
    }

    fn qutrit_state() -> DensityMatrix {
        let i = Complex64::new(0.0, 1.0);
        DensityMatrix::new(
            ComplexMatrix::new(
                3,
                vec![
                    c(0.4),
                    c(0.1) + 0.05 * i,
                    c(0.15),
                    c(0.1) - 0.05 * i,
                    c(0.35),
                    c(0.05) - 0.1 * i,
                    c(0.15),
                    c(0.05) + 0.1 * i,
                    c(0.25),
                ],
            )
            .unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn strength_validation() {
        assert!(WeakMeasurementParams::new(1.0, 0.0).is_err());
        assert!(WeakMeasurementParams::new(0.0, -0.1).is_err());
        assert!(ReversalParams::new(0.5, 1.0).is_err());
        assert!(WeakMeasurementParams::symmetric(0.999).is_ok());
    }

    #[test]
    fn optimal_reversal_substitutions() {
        let none = WeakMeasurementParams::none();
        assert_eq!(
            optimal_reversal(&none, &snapshot(1.0, 1.0)),
            ReversalParams { p_r: 0.0, q_r: 0.0 }
        );
        assert!((optimal_reversal(&none, &snapshot(0.5, 1.0)).p_r - 0.75).abs() < 1e-15);
        let strong = WeakMeasurementParams::symmetric(0.99).unwrap();
        let rv = optimal_reversal(&strong, &snapshot(FRAC_1_SQRT_2, 1.0));
        assert!((rv.p_r - 0.995).abs() < 1e-14);
    }

    #[test]
    fn weak_measurement_examples() {
        let rho = qutrit_state();
        let out = weak_measure(rho.matrix(), &WeakMeasurementParams::none()).unwrap();
        assert_eq!(&out, rho.matrix());

        let ground = ComplexMatrix::unit(3, 2, 2);
        let w = WeakMeasurementParams::new(0.3, 0.8).unwrap();
        assert!(weak_measure(&ground, &w).unwrap().max_abs_diff(&ground) < 1e-16);

        let mixed = ComplexMatrix::identity(3).scale(1.0 / 3.0);
        let out = weak_measure(&mixed, &WeakMeasurementParams::symmetric(0.5).unwrap()).unwrap();
        let want = ComplexMatrix::from_real_diagonal(&[1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0]);
        assert!(out.max_abs_diff(&want) < 1e-16);
        assert!((out.trace().re - 2.0 / 3.0).abs() < 1e-15);
        assert!(weak_measure(&ComplexMatrix::identity(4), &w).is_err());
    }

    #[test]
    fn reversal_examples() {
        let rho = qutrit_state();
        let zero = ReversalParams::new(0.0, 0.0).unwrap();
        assert_eq!(&reversal_measure(rho.matrix(), &zero).unwrap(), rho.matrix());
        let top = ComplexMatrix::unit(3, 0, 0);
        let out = reversal_measure(&top, &ReversalParams::new(0.0, 0.75).unwrap()).unwrap();
        assert!(out.max_abs_diff(&top.scale(0.25)) < 1e-16);
    }

    #[test]
    fn reversal_undoes_damping_on_superposition() {
        // κ₁ then optimal reversal leaves a pure superposition unchanged up to scale.
        let psi = [c(0.6), c(0.0), c(0.8)];
        let rho = ComplexMatrix::outer(&psi, &psi);
        let s = snapshot(0.7, 0.4);
        let w = WeakMeasurementParams::none();
        let [k1, _, _] = kraus_operators(&s).unwrap();
        let out = reversal_measure(&rho.conjugate_by(&k1), &optimal_reversal(&w, &s)).unwrap();
        let scale = out[(0, 0)].re / rho[(0, 0)].re;
        assert!(out.max_abs_diff(&rho.scale(scale)) < 1e-15);
    }

    #[test]
    fn phase_removal_examples() {
        let rho = qutrit_state();
        // Markovian: G± real positive, V = I.
        let r = ReservoirParams::symmetric(5.0, 0.0).unwrap();
        let s = decay_functions(&r, 3.0).unwrap();
        assert!(phase_removal(rho.matrix(), &s).unwrap().max_abs_diff(rho.matrix()) < 1e-16);

        let diag = ComplexMatrix::from_real_diagonal(&[0.2, 0.3, 0.5]);
        let s = DecaySnapshot::from_amplitudes(1.0, Complex64::from_polar(0.5, 1.2), Complex64::from_polar(0.3, -2.0))
            .unwrap();
        assert!(phase_removal(&diag, &s).unwrap().max_abs_diff(&diag) < 1e-16);

        let r = ReservoirParams::symmetric(0.1, 0.0).unwrap();
        let s = decay_functions(&r, 8.0).unwrap();
        let out = phase_removal(rho.matrix(), &s).unwrap();
        let want = rho.matrix()[(0, 2)] * Complex64::from_polar(1.0, -s.phase_plus());
        assert!((out[(0, 2)] - want).norm() < 1e-16);
    }

    #[test]
    fn phase_removal_flips_sign_of_negative_amplitude() {
        let rho = qutrit_state();
        let s = snapshot(-0.5, 0.5);
        let out = phase_removal(rho.matrix(), &s).unwrap();
        assert!((out[(0, 2)] + rho.matrix()[(0, 2)]).norm() < 1e-15);
        assert!((out[(1, 2)] - rho.matrix()[(1, 2)]).norm() < 1e-15);
    }

    /// `(ρ₀ + f′|0⟩⟨0|)/(1+f′)` with `f′` written out in the entries a, b, d
    /// of `ρ₀` for the 45° decay frame.
    fn single_closed_form(rho0: &ComplexMatrix, w: &WeakMeasurementParams, s: &DecaySnapshot) -> (ComplexMatrix, f64) {
        let (a, b, d) = (rho0[(0, 0)], rho0[(0, 1)], rho0[(1, 1)]);
        let minus = (a - b.conj() - b + d).re / 2.0;
        let plus = (a + b.conj() + b + d).re / 2.0;
        let f = minus * (1.0 - w.p) * (1.0 - s.population_plus())
            + plus * (1.0 - w.q) * (1.0 - s.population_minus());
        let r = (1.0 - w.p) * (1.0 - w.q) * s.population_plus() * s.population_minus();
        let state = (rho0 + &ComplexMatrix::unit(3, 2, 2).scale(f)).scale(1.0 / (1.0 + f));
        (state, r * (1.0 + f))
    }

    #[test]
    fn single_qutrit_matches_closed_form() {
        let rho = qutrit_state();
        let r = ReservoirParams::symmetric(0.3, 0.6).unwrap();
        let w = WeakMeasurementParams::new(0.4, 0.7).unwrap();
        for t in [0.5, 2.0, 9.0] {
            let got = protect_single(&rho, &r, &w, t).unwrap();
            let (want, n) = single_closed_form(rho.matrix(), &w, &decay_functions(&r, t).unwrap());
            assert!(got.state.matrix().max_abs_diff(&want) < 1e-12, "t = {t}");
            assert!((got.success_prob - n).abs() < 1e-14);
        }
    }

    #[test]
    fn single_qutrit_identity_at_time_zero() {
        let rho = qutrit_state();
        let r = ReservoirParams::symmetric(1.0, 0.0).unwrap();
        let w = WeakMeasurementParams::symmetric(0.6).unwrap();
        let out = protect_single(&rho, &r, &w, 0.0).unwrap();
        assert!(out.state.matrix().max_abs_diff(rho.matrix()) < 1e-15);
        assert!((out.success_prob - 0.16).abs() < 1e-15);
    }

    #[test]
    fn single_qutrit_maximally_mixed() {
        let rho = DensityMatrix::new(ComplexMatrix::identity(3).scale(1.0 / 3.0)).unwrap();
        let r = ReservoirParams::symmetric(0.1, 0.0).unwrap();
        let p = 0.5;
        let w = WeakMeasurementParams::symmetric(p).unwrap();
        let t = 4.0;
        let s = decay_functions(&r, t).unwrap();
        let f = ((1.0 - p) * (1.0 - s.population_plus()) + (1.0 - p) * (1.0 - s.population_minus())) / 3.0;
        let want = (rho.matrix() + &ComplexMatrix::unit(3, 2, 2).scale(f)).scale(1.0 / (1.0 + f));
        let got = protect_single(&rho, &r, &w, t).unwrap();
        assert!(got.state.matrix().max_abs_diff(&want) < 1e-14);
    }

    #[test]
    fn strong_measurement_keeps_state_close() {
        let rho = qutrit_state();
        let w = WeakMeasurementParams::symmetric(0.99).unwrap();
        for lambda in [0.1, 1.0] {
            let r = ReservoirParams::symmetric(lambda, 0.0).unwrap();
            for k in 0..=40 {
                let t = 0.5 * k as f64;
                let out = protect_single(&rho, &r, &w, t).unwrap();
                let d = trace_distance(out.state.matrix(), rho.matrix()).unwrap();
                assert!(d < 0.02, "λ = {lambda}, t = {t}, distance {d}");
            }
        }
    }

    #[test]
    fn zero_of_decay_amplitude_is_degenerate() {
        let rho = qutrit_state();
        let r = ReservoirParams::symmetric(1.0, 0.0).unwrap();
        let w = WeakMeasurementParams::none();
        let t = 1.5 * std::f64::consts::PI;
        // |G|² ≈ 1e-32 is still normalizable; an exact zero is not.
        let out = protect_single(&rho, &r, &w, t);
        assert!(out.is_ok() || matches!(out, Err(Error::DegenerateOutcome { .. })));
        let s = DecaySnapshot::from_amplitudes(t, c(0.0), c(0.0)).unwrap();
        let rv = optimal_reversal(&w, &s);
        assert_eq!((rv.p_r, rv.q_r), (1.0, 1.0));
        let stages = PipelineStages {
            weak: w,
            reversal: Reversal::Fixed(ReversalParams { p_r: 1.0, q_r: 1.0 }),
            phase_correction: true,
        };
        assert!(matches!(
            run_pipeline(&rho, &r, 2.0, &stages),
            Err(Error::DegenerateOutcome { .. })
        ));
    }

    #[test]
    fn protocol_requires_equal_rates_and_dimension() {
        let rho = qutrit_state();
        let unequal = ReservoirParams::new(1.0, 2.0, 1.0, 0.0).unwrap();
        let w = WeakMeasurementParams::none();
        assert!(protect_single(&rho, &unequal, &w, 1.0).is_err());
        assert!(closed_form_werner(0.5, &unequal, &w, 1.0).is_err());
        let r = ReservoirParams::symmetric(1.0, 0.0).unwrap();
        assert!(protect_two_qutrit(&rho, &r, &w, 1.0).is_err());
        assert!(protect_single(&werner(0.5).unwrap(), &r, &w, 1.0).is_err());
    }

    #[test]
    fn werner_closed_form_at_time_zero() {
        let r = ReservoirParams::symmetric(1.0, 0.0).unwrap();
        let w = WeakMeasurementParams::symmetric(0.5).unwrap();
        let out = closed_form_werner(0.7, &r, &w, 0.0).unwrap();
        assert!(out.state.matrix().max_abs_diff(werner(0.7).unwrap().matrix()) < 1e-16);
        assert!((out.norm - 0.0625).abs() < 1e-16);
    }

    #[test]
    fn s4_vanishes_for_equal_strengths_without_interference() {
        let r = ReservoirParams::symmetric(0.1, 0.0).unwrap();
        let w = WeakMeasurementParams::symmetric(0.3).unwrap();
        let cf = ClosedFormCoefficients::new(&w, &decay_functions(&r, 6.0).unwrap());
        assert_eq!(cf.s4, 0.0);
        assert!((cf.s2 - cf.s3 * cf.s3).abs() < 1e-16);
    }

    #[test]
    fn werner_closed_form_matches_pipeline() {
        let r = ReservoirParams::symmetric(1.0, 0.0).unwrap();
        let w = WeakMeasurementParams::symmetric(0.5).unwrap();
        let cf = closed_form_werner(0.8, &r, &w, 2.0).unwrap();
        let pipe = protect_two_qutrit(&werner(0.8).unwrap(), &r, &w, 2.0).unwrap();
        assert!(cf.state.matrix().max_abs_diff(pipe.state.matrix()) < 1e-10);
        assert!((cf.norm - pipe.success_prob).abs() < 1e-10);
    }

    #[test]
    fn closed_forms_match_pipeline_with_interference_and_unequal_strengths() {
        // With θ ≠ 0 the decay frame is the 45° rotation the closed forms
        // are written in, so p ≠ q is covered too.
        let r = ReservoirParams::symmetric(0.4, 0.5).unwrap();
        let w = WeakMeasurementParams::new(0.3, 0.6).unwrap();
        for t in [0.7, 3.0] {
            let cf = closed_form_werner(0.6, &r, &w, t).unwrap();
            let pipe = protect_two_qutrit(&werner(0.6).unwrap(), &r, &w, t).unwrap();
            assert!(cf.state.matrix().max_abs_diff(pipe.state.matrix()) < 1e-12);
            assert!((cf.norm - pipe.success_prob).abs() < 1e-12);

            let cf = closed_form_horodecki(1.3, &r, &w, t).unwrap();
            let pipe = protect_two_qutrit(&horodecki(1.3).unwrap(), &r, &w, t).unwrap();
            assert!(cf.state.matrix().max_abs_diff(pipe.state.matrix()) < 1e-12);
            assert!((cf.norm - pipe.success_prob).abs() < 1e-12);
        }
    }

    #[test]
    fn horodecki_closed_form_matches_pipeline() {
        let r = ReservoirParams::symmetric(0.1, 0.0).unwrap();
        let w = WeakMeasurementParams::symmetric(0.99).unwrap();
        let cf = closed_form_horodecki(3.0, &r, &w, 5.0).unwrap();
        let pipe = protect_two_qutrit(&horodecki(3.0).unwrap(), &r, &w, 5.0).unwrap();
        assert!(cf.state.matrix().max_abs_diff(pipe.state.matrix()) < 1e-10);
        assert!((cf.norm - pipe.success_prob).abs() < 1e-10);
        let at_zero = closed_form_horodecki(3.0, &r, &w, 0.0).unwrap();
        assert!(at_zero.state.matrix().max_abs_diff(horodecki(3.0).unwrap().matrix()) < 1e-16);
    }

    #[test]
    fn channel_only_stages_reproduce_bare_channel() {
        let rho = werner(0.9).unwrap();
        let r = ReservoirParams::symmetric(0.1, 0.0).unwrap();
        for t in [1.0, 12.0, 17.5] {
            let pipe = run_pipeline(&rho, &r, t, &PipelineStages::channel_only()).unwrap();
            let bare = crate::reservoir::apply_channel_two_qutrit(&rho, &r, t).unwrap();
            assert!(pipe.state.matrix().max_abs_diff(bare.matrix()) < 1e-15);
            assert!((pipe.success_prob - 1.0).abs() < 1e-14);
        }
    }
}
