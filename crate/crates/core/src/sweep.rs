//! Parameter sweeps over (η | α) × γt and their CSV form.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rayon::prelude::*;

use crate::bloch::gqd_lower_bound;
use crate::error::{invalid, Error, Result};
use crate::protocol::{protect_two_qutrit, WeakMeasurementParams};
use crate::reservoir::{apply_channel_two_qutrit, ReservoirParams};
use crate::states::{horodecki, werner};

pub const CSV_HEADER: &str = "family,param,gamma_t,p,q,lambda,theta,mode,gqd";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Werner,
    Horodecki,
}

impl Family {
    /// Legal interval of the state parameter (η or α).
    pub fn param_bounds(self) -> (f64, f64) {
        match self {
            Family::Werner => (0.0, 1.0),
            Family::Horodecki => (0.0, 5.0),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Werner => "werner",
            Family::Horodecki => "horodecki",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "werner" => Ok(Family::Werner),
            "horodecki" => Ok(Family::Horodecki),
            other => Err(format!("unknown family '{other}' (expected werner or horodecki)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Weak measurement, channel, optimal reversal.
    Protected,
    /// The damping channel alone.
    Bare,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Protected => "protected",
            Mode::Bare => "bare",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "protected" => Ok(Mode::Protected),
            "bare" => Ok(Mode::Bare),
            other => Err(format!("unknown mode '{other}' (expected protected or bare)")),
        }
    }
}

/// One grid point, independent of any sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointQuery {
    pub family: Family,
    pub param: f64,
    pub gamma_t: f64,
    pub p: f64,
    pub q: f64,
    pub lambda: f64,
    pub theta: f64,
    pub mode: Mode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub family: Family,
    pub param_min: f64,
    pub param_max: f64,
    pub param_steps: usize,
    pub t_max: f64,
    pub t_steps: usize,
    pub p: f64,
    /// Pinned to `p` when absent.
    pub q: Option<f64>,
    pub lambda: f64,
    pub theta: f64,
    pub mode: Mode,
}

impl SweepConfig {
    /// Figure-sized grid (41 × 81, γt ≤ 20) over the whole parameter range.
    pub fn figure(family: Family, mode: Mode, p: f64, lambda: f64) -> Self {
        let (lo, hi) = family.param_bounds();
        Self {
            family,
            param_min: lo,
            param_max: hi,
            param_steps: 41,
            t_max: 20.0,
            t_steps: 81,
            p,
            q: None,
            lambda,
            theta: 0.0,
            mode,
        }
    }

    pub fn q_resolved(&self) -> f64 {
        self.q.unwrap_or(self.p)
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.family.param_bounds();
        if self.param_steps < 2 {
            return Err(invalid("param_steps", self.param_steps as f64, "must be at least 2"));
        }
        if self.t_steps < 2 {
            return Err(invalid("t_steps", self.t_steps as f64, "must be at least 2"));
        }
        for (name, v) in [("param_min", self.param_min), ("param_max", self.param_max)] {
            if !(lo..=hi).contains(&v) {
                return Err(invalid(name, v, "outside the family's parameter range"));
            }
        }
        if self.param_min > self.param_max {
            return Err(invalid("param_max", self.param_max, "must not be below param_min"));
        }
        if !(self.t_max >= 0.0 && self.t_max.is_finite()) {
            return Err(invalid("t_max", self.t_max, "must be non-negative and finite"));
        }
        check_point_settings(self.p, self.q_resolved(), self.lambda, self.theta, self.mode)
    }

    pub fn param_grid(&self) -> Vec<f64> {
        linspace(self.param_min, self.param_max, self.param_steps)
    }

    pub fn time_grid(&self) -> Vec<f64> {
        linspace(0.0, self.t_max, self.t_steps)
    }

    /// Resolved settings as `key = value` pairs, in a fixed order.
    pub fn echo(&self) -> Vec<(&'static str, String)> {
        vec![
            ("family", self.family.to_string()),
            ("param_min", fmt_f64(self.param_min)),
            ("param_max", fmt_f64(self.param_max)),
            ("param_steps", self.param_steps.to_string()),
            ("t_max", fmt_f64(self.t_max)),
            ("t_steps", self.t_steps.to_string()),
            ("p", fmt_f64(self.p)),
            ("q", fmt_f64(self.q_resolved())),
            ("lambda", fmt_f64(self.lambda)),
            ("theta", fmt_f64(self.theta)),
            ("mode", self.mode.to_string()),
        ]
    }
}

fn check_point_settings(p: f64, q: f64, lambda: f64, theta: f64, mode: Mode) -> Result<()> {
    ReservoirParams::symmetric(lambda, theta)?;
    match mode {
        Mode::Protected => WeakMeasurementParams::new(p, q).map(|_| ()),
        Mode::Bare if p != 0.0 => Err(invalid("p", p, "bare mode has no weak measurement")),
        Mode::Bare if q != 0.0 => Err(invalid("q", q, "bare mode has no weak measurement")),
        Mode::Bare => Ok(()),
    }
}

/// `steps` evenly spaced values, endpoints exact.
fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    let last = (steps - 1) as f64;
    (0..steps)
        .map(|i| if i + 1 == steps { hi } else { lo + (hi - lo) * (i as f64) / last })
        .collect()
}

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRecord {
    pub family: Family,
    pub param: f64,
    pub gamma_t: f64,
    pub p: f64,
    pub q: f64,
    pub lambda: f64,
    pub theta: f64,
    pub mode: Mode,
    pub gqd: f64,
}

impl SweepRecord {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.family,
            fmt_f64(self.param),
            fmt_f64(self.gamma_t),
            fmt_f64(self.p),
            fmt_f64(self.q),
            fmt_f64(self.lambda),
            fmt_f64(self.theta),
            self.mode,
            fmt_f64(self.gqd)
        )
    }
}

pub fn evaluate_point(query: &PointQuery) -> Result<SweepRecord> {
    let PointQuery { family, param, gamma_t, p, q, lambda, theta, mode } = *query;
    check_point_settings(p, q, lambda, theta, mode)?;
    let r = ReservoirParams::symmetric(lambda, theta)?;
    let rho0 = match family {
        Family::Werner => werner(param)?,
        Family::Horodecki => horodecki(param)?,
    };
    let rho = match mode {
        Mode::Protected => protect_two_qutrit(&rho0, &r, &WeakMeasurementParams::new(p, q)?, gamma_t)?.state,
        Mode::Bare => apply_channel_two_qutrit(&rho0, &r, gamma_t)?,
    };
    let gqd = gqd_lower_bound(&rho, 3, 3)?;
    if !gqd.is_finite() {
        return Err(invalid("gqd", gqd, "discord bound is not finite"));
    }
    Ok(SweepRecord {
        family,
        param,
        gamma_t,
        p,
        q,
        lambda,
        theta,
        mode,
        // `+ 0.0` turns a clamped -0.0 into 0.0.
        gqd: gqd + 0.0,
    })
}

/// Evaluates the grid, parameter-major then time, on `threads` workers
/// (rayon's default when `None`). Output order never depends on scheduling.
pub fn run_sweep(cfg: &SweepConfig, threads: Option<usize>) -> Result<Vec<SweepRecord>> {
    cfg.validate()?;
    let times = cfg.time_grid();
    let queries: Vec<PointQuery> = cfg
        .param_grid()
        .into_iter()
        .flat_map(|param| {
            times.iter().map(move |&gamma_t| PointQuery {
                family: cfg.family,
                param,
                gamma_t,
                p: cfg.p,
                q: cfg.q_resolved(),
                lambda: cfg.lambda,
                theta: cfg.theta,
                mode: cfg.mode,
            })
        })
        .collect();

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::ThreadPool(e.to_string()))?;
    pool.install(|| queries.par_iter().map(evaluate_point).collect())
}

/// Config echo as `#` comments, the header, then one line per record.
pub fn write_csv<W: Write>(out: &mut W, cfg: &SweepConfig, records: &[SweepRecord]) -> io::Result<()> {
    for (key, value) in cfg.echo() {
        writeln!(out, "# {key} = {value}")?;
    }
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(out, "{}", r.csv_line())?;
    }
    Ok(())
}
