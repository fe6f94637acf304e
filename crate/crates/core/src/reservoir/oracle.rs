//! Direct time integration of the excited-level amplitudes, used to check
//! the closed-form decay amplitudes.
//!
//! The memory-kernel equations
//!
//! ```text
//! ċ_l(t) = −Σ_m ∫₀ᵗ f_lm(t−s) c_m(s) ds,   f_lm(τ) = (λ Γ_lm / 2) e^{−λτ}
//! ```
//!
//! with `Γ = [[γ₂, √(γ₁γ₂)θ], [√(γ₁γ₂)θ, γ₁]]` close into a local system by
//! introducing the pseudomode integrals `I_l(t) = ∫₀ᵗ e^{−λ(t−s)} c_l(s) ds`:
//!
//! ```text
//! ċ = −(λ/2) Γ I,    İ = c − λ I,    c(0) = v,  I(0) = 0.
//! ```
//!
//! Starting from an eigenvector `v±` of `Γ` (eigenvalue `γ±`), the
//! amplitude stays along `v±` and `G±(t) = v±ᵀ c(t)`. The system is
//! integrated with classical fourth-order Runge-Kutta in the level basis,
//! without using the structure constants of the closed form.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::reservoir::ReservoirParams;

/// Largest change in `G±` tolerated when the step is halved.
pub const STEP_CONVERGENCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSample {
    pub t: f64,
    pub g_plus: Complex64,
    pub g_minus: Complex64,
}

type State = [f64; 4];

fn derivative(y: &State, lambda: f64, gamma: &[[f64; 2]; 2]) -> State {
    let (c, i) = ([y[0], y[1]], [y[2], y[3]]);
    let k = -lambda / 2.0;
    [
        k * (gamma[0][0] * i[0] + gamma[0][1] * i[1]),
        k * (gamma[1][0] * i[0] + gamma[1][1] * i[1]),
        c[0] - lambda * i[0],
        c[1] - lambda * i[1],
    ]
}

fn axpy(y: &State, h: f64, k: &State) -> State {
    [y[0] + h * k[0], y[1] + h * k[1], y[2] + h * k[2], y[3] + h * k[3]]
}

fn rk4_trajectory(
    start: [f64; 2],
    lambda: f64,
    gamma: &[[f64; 2]; 2],
    dt: f64,
    steps: usize,
) -> Vec<[f64; 2]> {
    let mut y: State = [start[0], start[1], 0.0, 0.0];
    let mut out = Vec::with_capacity(steps + 1);
    out.push([y[0], y[1]]);
    for _ in 0..steps {
        let k1 = derivative(&y, lambda, gamma);
        let k2 = derivative(&axpy(&y, dt / 2.0, &k1), lambda, gamma);
        let k3 = derivative(&axpy(&y, dt / 2.0, &k2), lambda, gamma);
        let k4 = derivative(&axpy(&y, dt, &k3), lambda, gamma);
        for n in 0..4 {
            y[n] += dt / 6.0 * (k1[n] + 2.0 * k2[n] + 2.0 * k3[n] + k4[n]);
        }
        out.push([y[0], y[1]]);
    }
    out
}

/// Orthonormal eigenvectors of the real symmetric 2×2 coupling matrix,
/// larger eigenvalue first.
fn coupling_eigenvectors(gamma: &[[f64; 2]; 2]) -> ([f64; 2], [f64; 2]) {
    let (a, k, b) = (gamma[0][0], gamma[0][1], gamma[1][1]);
    if k == 0.0 {
        return if a >= b {
            ([1.0, 0.0], [0.0, 1.0])
        } else {
            ([0.0, 1.0], [1.0, 0.0])
        };
    }
    let mean = (a + b) / 2.0;
    let radius = (((a - b) / 2.0).powi(2) + k * k).sqrt();
    let unit = |mu: f64| {
        let v = [k, mu - a];
        let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
        [v[0] / n, v[1] / n]
    };
    (unit(mean + radius), unit(mean - radius))
}

fn integrate(r: &ReservoirParams, t_max: f64, steps: usize) -> Vec<OracleSample> {
    let coupling = (r.gamma1 * r.gamma2).sqrt() * r.theta;
    let gamma = [[r.gamma2, coupling], [coupling, r.gamma1]];
    let (v_plus, v_minus) = coupling_eigenvectors(&gamma);
    let dt = t_max / steps as f64;
    let plus = rk4_trajectory(v_plus, r.lambda, &gamma, dt, steps);
    let minus = rk4_trajectory(v_minus, r.lambda, &gamma, dt, steps);
    let project = |v: [f64; 2], c: [f64; 2]| Complex64::new(v[0] * c[0] + v[1] * c[1], 0.0);
    plus.iter()
        .zip(&minus)
        .enumerate()
        .map(|(n, (cp, cm))| OracleSample {
            t: n as f64 * dt,
            g_plus: project(v_plus, *cp),
            g_minus: project(v_minus, *cm),
        })
        .collect()
}

/// Samples `G±` at `t = k·t_max/steps` for `k = 0, …, steps`.
///
/// The run is repeated with half the step; if any shared sample moves by
/// more than [`STEP_CONVERGENCE`] the step is rejected.
pub fn decay_ode_oracle(r: &ReservoirParams, t_max: f64, steps: usize) -> Result<Vec<OracleSample>> {
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(invalid("t_max", t_max, "must be positive and finite"));
    }
    if steps == 0 {
        return Err(invalid("steps", 0.0, "must be positive"));
    }
    let coarse = integrate(r, t_max, steps);
    let fine = integrate(r, t_max, 2 * steps);
    let change = coarse
        .iter()
        .zip(fine.iter().step_by(2))
        .map(|(a, b)| (a.g_plus - b.g_plus).norm().max((a.g_minus - b.g_minus).norm()))
        .fold(0.0, f64::max);
    if change > STEP_CONVERGENCE {
        return Err(Error::StepNotConverged { change });
    }
    Ok(fine.into_iter().step_by(2).collect())
}
