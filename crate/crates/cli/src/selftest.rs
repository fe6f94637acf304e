//! Oracle-equivalence and analytic-value checks, printed as CSV.

use std::io::Write;

use gqd_core::bloch::{gqd_lower_bound, gqd_two_qubit};
use gqd_core::linalg::{hermitian_eigenvalues, partial_transpose, ComplexMatrix, DensityMatrix, Subsystem};
use gqd_core::protocol::{closed_form_horodecki, closed_form_werner, protect_two_qutrit, WeakMeasurementParams};
use gqd_core::reservoir::oracle::decay_ode_oracle;
use gqd_core::reservoir::{decay_functions, kraus_operators, ReservoirParams};
use gqd_core::states::{bell_qutrit, horodecki, werner};
use gqd_core::Result;
use num_complex::Complex64;

struct Check {
    name: &'static str,
    error: f64,
    tolerance: f64,
}

impl Check {
    fn passed(&self) -> bool {
        self.error <= self.tolerance
    }
}

fn decay_oracle() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for lambda in [0.1, 1.0] {
        for theta in [0.0, 0.5, 1.0] {
            let r = ReservoirParams::symmetric(lambda, theta)?;
            for o in decay_ode_oracle(&r, 20.0, 4000)? {
                let s = decay_functions(&r, o.t)?;
                worst = worst.max((s.g_plus - o.g_plus).norm()).max((s.g_minus - o.g_minus).norm());
            }
        }
    }
    Ok(worst)
}

fn kraus_completeness() -> Result<f64> {
    let mut worst: f64 = 0.0;
    let values = [0.1, 0.5, 1.0, 2.0, 5.0];
    for lambda in values {
        for g1 in values {
            for g2 in values {
                for theta in [0.0, 0.25, 0.5, 0.75, 1.0] {
                    let r = ReservoirParams::new(g1, g2, lambda, theta)?;
                    for k in 0..10 {
                        let ops = kraus_operators(&decay_functions(&r, 2.0 * k as f64)?)?;
                        let sum = ops.iter().fold(ComplexMatrix::zeros(3), |acc, k| &acc + &(&k.adjoint() * k));
                        worst = worst.max(sum.max_abs_diff(&ComplexMatrix::identity(3)));
                    }
                }
            }
        }
    }
    Ok(worst)
}

fn werner_analytic() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in 0..=10 {
        let eta = k as f64 / 10.0;
        worst = worst.max((gqd_lower_bound(&werner(eta)?, 3, 3)? - 2.0 * eta * eta / 3.0).abs());
    }
    Ok(worst)
}

fn two_qubit_bell() -> Result<f64> {
    let amp = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let psi = [amp, zero, zero, amp];
    let rho = DensityMatrix::new(ComplexMatrix::outer(&psi, &psi))?;
    Ok((gqd_two_qubit(&rho)? - 0.5).abs())
}

/// Worst (state, norm) disagreement between closed form and pipeline.
fn closed_form_grid(horodecki_family: bool) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in 0..=10 {
        let param = if horodecki_family { k as f64 / 2.0 } else { k as f64 / 10.0 };
        let rho0 = if horodecki_family { horodecki(param)? } else { werner(param)? };
        for p in [0.0, 0.5, 0.99] {
            let w = WeakMeasurementParams::symmetric(p)?;
            for lambda in [0.1, 1.0] {
                let r = ReservoirParams::symmetric(lambda, 0.0)?;
                for t in [0.0, 1.0, 2.0, 5.0, 10.0, 20.0] {
                    let cf = if horodecki_family {
                        closed_form_horodecki(param, &r, &w, t)?
                    } else {
                        closed_form_werner(param, &r, &w, t)?
                    };
                    let pipe = protect_two_qutrit(&rho0, &r, &w, t)?;
                    worst = worst
                        .max(cf.state.matrix().max_abs_diff(pipe.state.matrix()))
                        .max((cf.norm - pipe.success_prob).abs());
                }
            }
        }
    }
    Ok(worst)
}

fn horodecki_mirror() -> Result<f64> {
    let mut worst: f64 = 0.0;
    let r = ReservoirParams::symmetric(1.0, 0.0)?;
    for alpha in [0.0, 1.0, 2.0] {
        for p in [0.0, 0.99] {
            let w = WeakMeasurementParams::symmetric(p)?;
            for t in [0.0, 5.0] {
                let a = protect_two_qutrit(&horodecki(alpha)?, &r, &w, t)?;
                let b = protect_two_qutrit(&horodecki(5.0 - alpha)?, &r, &w, t)?;
                worst = worst.max((gqd_lower_bound(&a.state, 3, 3)? - gqd_lower_bound(&b.state, 3, 3)?).abs());
            }
        }
    }
    Ok(worst)
}

fn min_pt_eigenvalue(eta: f64) -> Result<f64> {
    let pt = partial_transpose(werner(eta)?.matrix(), (3, 3), Subsystem::B)?;
    Ok(*hermitian_eigenvalues(&pt)?.last().expect("non-empty spectrum"))
}

fn checks() -> Result<Vec<Check>> {
    let mixed = DensityMatrix::new(ComplexMatrix::identity(9).scale(1.0 / 9.0))?;
    Ok(vec![
        Check { name: "decay_ode_oracle", error: decay_oracle()?, tolerance: 1e-6 },
        Check { name: "kraus_completeness", error: kraus_completeness()?, tolerance: 1e-12 },
        Check { name: "werner_analytic", error: werner_analytic()?, tolerance: 1e-9 },
        Check {
            name: "bell_qutrit_analytic",
            error: (gqd_lower_bound(&bell_qutrit(), 3, 3)? - 2.0 / 3.0).abs(),
            tolerance: 1e-9,
        },
        Check { name: "maximally_mixed_zero", error: gqd_lower_bound(&mixed, 3, 3)?, tolerance: 1e-9 },
        Check { name: "two_qubit_bell", error: two_qubit_bell()?, tolerance: 1e-9 },
        Check { name: "werner_closed_form", error: closed_form_grid(false)?, tolerance: 1e-10 },
        Check { name: "horodecki_closed_form", error: closed_form_grid(true)?, tolerance: 1e-10 },
        Check { name: "horodecki_mirror", error: horodecki_mirror()?, tolerance: 1e-10 },
        Check { name: "werner_ppt_boundary", error: (-min_pt_eigenvalue(0.25)?).max(0.0), tolerance: 1e-12 },
        Check { name: "werner_npt_above_boundary", error: (min_pt_eigenvalue(0.3)? + 1e-4).max(0.0), tolerance: 0.0 },
    ])
}

/// Prints one line per check; `Ok(false)` when any check fails.
pub fn run<W: Write>(out: &mut W) -> anyhow::Result<bool> {
    let checks = checks()?;
    writeln!(out, "check,max_error,tolerance,status")?;
    for c in &checks {
        let status = if c.passed() { "pass" } else { "fail" };
        writeln!(out, "{},{:?},{:?},{}", c.name, c.error, c.tolerance, status)?;
    }
    Ok(checks.iter().all(Check::passed))
}
