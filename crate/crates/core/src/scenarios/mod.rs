//! Scenario packs: concrete models wired to the solvers, with the property
//! checks that certify each run.
//!
//! * `efrw_q0`, `efrw_q`: Wheeler–DeWitt equation of the empty FRW universe
//!   in Misner time, without and with the factor-ordering damping Q.
//! * `xyz`: the generalized oscillator H = 1/2 [X q^2 + 2 Y q p + Z p^2]
//!   driven around a slow loop, Berry phase and Hannay angle.
//! * `helmholtz_power`, `lewis_m`, `lewis_n`: Helmholtz waveguides with a
//!   power-law index profile and Lewis's closed-form amplitudes.

mod efrw;
mod optics;
mod xyz;

use std::fmt;
use std::str::FromStr;

pub use efrw::{efrw_coefficient_table, efrw_psi, efrw_q, efrw_q0, EfrwBundle};
pub use optics::{
    adiabatic_error, helmholtz_coefficients, helmholtz_power, lewis_m_solution, lewis_n_solution, lewis_n_term_count,
    lewis_rho_m, lewis_rho_m_state, lewis_rho_n, lewis_rho_n_state, milne_reconstruct, power_law_geometric_angle,
    power_law_rho0, HelmholtzBundle,
};
pub use xyz::{tilted_loop, xyz_scenario, XyzBundle, XyzRow, DEFAULT_EPS_SWEEP, LOOP_AMPLITUDE};

use crate::angles::{angle_series, AngleBundle};
use crate::error::{Error, Result};
use crate::invariants::{action_integral_oracle, drift_report, Drift, InvariantSeries};
use crate::ode::Trajectory;
use crate::pinney::PinneySolution;

/// Number of samples in every scenario time series.
pub const SAMPLES: usize = 201;

/// Fixed-time rings used by the action-integral check, and their node count.
pub const RING_TIMES: usize = 5;
pub const RING_NODES: usize = 512;

/// Relative drift allowed for an invariant series.
pub const DRIFT_BOUND: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ScenarioName {
    EfrwQ,
    EfrwQ0,
    HelmholtzPower,
    LewisM,
    LewisN,
    Xyz,
}

impl ScenarioName {
    /// All scenarios, sorted by key.
    pub const ALL: [ScenarioName; 6] = [
        ScenarioName::EfrwQ,
        ScenarioName::EfrwQ0,
        ScenarioName::HelmholtzPower,
        ScenarioName::LewisM,
        ScenarioName::LewisN,
        ScenarioName::Xyz,
    ];

    pub fn key(self) -> &'static str {
        match self {
            ScenarioName::EfrwQ => "efrw_q",
            ScenarioName::EfrwQ0 => "efrw_q0",
            ScenarioName::HelmholtzPower => "helmholtz_power",
            ScenarioName::LewisM => "lewis_m",
            ScenarioName::LewisN => "lewis_n",
            ScenarioName::Xyz => "xyz",
        }
    }

    /// Figures reproduced by the scenario, or what it produces instead.
    pub fn figures(self) -> &'static str {
        match self {
            ScenarioName::EfrwQ => "fig 5-12",
            ScenarioName::EfrwQ0 => "fig 1-4",
            ScenarioName::HelmholtzPower => "geometric angle and adiabatic scaling table",
            ScenarioName::LewisM => "closed-form amplitude for a power-law profile",
            ScenarioName::LewisN => "finite-sum amplitude for m = -4n/(2n+1)",
            ScenarioName::Xyz => "Berry phase / Hannay angle convergence table",
        }
    }

    /// Parameters the scenario reads from its configuration.
    pub fn parameters(self) -> &'static [&'static str] {
        match self {
            ScenarioName::EfrwQ => &["kappa", "Q", "h", "t0", "t1", "tol"],
            ScenarioName::EfrwQ0 => &["kappa", "h", "t0", "t1", "tol"],
            ScenarioName::HelmholtzPower => &["m", "b", "lambda", "t0", "t1", "tol"],
            ScenarioName::LewisM => &["m", "b", "lambda", "t0", "t1", "tol"],
            ScenarioName::LewisN => &["n-index", "b", "lambda", "t0", "t1", "tol"],
            ScenarioName::Xyz => &["tol"],
        }
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for ScenarioName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioName::ALL.into_iter().find(|n| n.key() == s).ok_or_else(|| Error::Config {
            field: "scenario",
            message: format!("unknown scenario `{s}`"),
        })
    }
}

/// Parameters of a scenario run. Fields a scenario does not use are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: ScenarioName,
    /// Spatial curvature, +1 closed or -1 open.
    pub kappa: i32,
    /// Factor-ordering parameter.
    pub q: f64,
    /// Auxiliary angular momentum.
    pub h: f64,
    /// Power-law exponent of the index profile.
    pub m: f64,
    pub b: f64,
    /// Helmholtz eigenvalue.
    pub lambda: f64,
    pub n_index: i32,
    pub window: (f64, f64),
    pub tol: f64,
}

impl ScenarioConfig {
    /// Defaults: Misner-time window [-1, 2] for cosmology, t in [1, 4] for
    /// the optical profiles.
    pub fn defaults(name: ScenarioName) -> Self {
        let window = match name {
            ScenarioName::EfrwQ | ScenarioName::EfrwQ0 => (-1.0, 2.0),
            ScenarioName::Xyz => (0.0, 1.0),
            _ => (1.0, 4.0),
        };
        ScenarioConfig {
            name,
            kappa: 1,
            q: if name == ScenarioName::EfrwQ { 1.0 } else { 0.0 },
            h: 1.0,
            m: 2.0,
            b: 1.0,
            lambda: 100.0,
            n_index: 1,
            window,
            // The periodic amplitude of the xyz loop comes from a monodromy
            // matrix, so it needs the tighter integration.
            tol: if name == ScenarioName::Xyz { 1e-12 } else { 1e-10 },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &'static str, message: String| Err(Error::Config { field, message });
        let (t0, t1) = self.window;
        if !(t0.is_finite() && t1.is_finite()) || t0 >= t1 {
            return bad("t0", format!("window [{t0}, {t1}] must be finite with t0 < t1"));
        }
        if !(1e-14..=1e-3).contains(&self.tol) {
            return bad("tol", format!("{} outside [1e-14, 1e-3]", self.tol));
        }
        match self.name {
            ScenarioName::EfrwQ0 | ScenarioName::EfrwQ => {
                if self.kappa != 1 && self.kappa != -1 {
                    return bad("kappa", format!("must be +1 or -1, got {}", self.kappa));
                }
                if !(self.h > 0.0 && self.h.is_finite()) {
                    return bad("h", format!("must be positive, got {}", self.h));
                }
                if !self.q.is_finite() {
                    return bad("Q", format!("must be finite, got {}", self.q));
                }
            }
            ScenarioName::HelmholtzPower | ScenarioName::LewisM | ScenarioName::LewisN => {
                if !(self.lambda > 0.0 && self.lambda.is_finite()) {
                    return bad("lambda", format!("must be positive, got {}", self.lambda));
                }
                if !(self.b > 0.0 && self.b.is_finite()) {
                    return bad("b", format!("must be positive, got {}", self.b));
                }
                if self.name != ScenarioName::LewisN && (!self.m.is_finite() || self.m == -2.0) {
                    return bad("m", format!("must be finite and != -2, got {}", self.m));
                }
                if self.name == ScenarioName::LewisN && self.n_index == 0 {
                    return bad("n_index", "must be a nonzero integer".into());
                }
                if t0 <= 0.0 {
                    return bad("t0", format!("profile window must lie in t > 0, got t0 = {t0}"));
                }
            }
            ScenarioName::Xyz => {}
        }
        Ok(())
    }
}

/// Acceptance bound of a check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    /// value < x
    Below(f64),
    /// value > x
    Above(f64),
    /// lo <= value <= hi
    Within(f64, f64),
}

impl Bound {
    fn admits(self, v: f64) -> bool {
        match self {
            Bound::Below(x) => v < x,
            Bound::Above(x) => v > x,
            Bound::Within(lo, hi) => lo <= v && v <= hi,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let num = |x: f64| if x == 0.0 || !x.is_finite() || (1e-3..1e4).contains(&x.abs()) { format!("{x}") } else { format!("{x:e}") };
        match *self {
            Bound::Below(x) => write!(f, "< {}", num(x)),
            Bound::Above(x) => write!(f, "> {}", num(x)),
            Bound::Within(lo, hi) => write!(f, "in [{}, {}]", num(lo), num(hi)),
        }
    }
}

/// A named property with its measured value and verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: Bound,
    pub passed: bool,
}

impl Check {
    /// NaN never passes.
    pub fn new(name: impl Into<String>, value: f64, bound: Bound) -> Self {
        Check { name: name.into(), value, passed: bound.admits(value), bound }
    }
}

/// A named output column.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
}

impl Column {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        Column { name: name.into(), values }
    }
}

/// Output of [`run`]: equal-length columns, the invariant drift (absent for
/// table-only scenarios) and the checks.
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub config: ScenarioConfig,
    pub columns: Vec<Column>,
    pub drift: Option<Drift>,
    pub checks: Vec<Check>,
}

impl ScenarioRun {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|c| c.name == name).map(|c| c.values.as_slice())
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// `n` equally spaced times covering the window, endpoints included.
pub fn sample_times(window: (f64, f64), n: usize) -> Vec<f64> {
    let (a, b) = window;
    (0..n).map(|i| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1).max(1) as f64 }).collect()
}

/// Validates the configuration and runs the scenario it names.
pub fn run(config: &ScenarioConfig) -> Result<ScenarioRun> {
    config.validate()?;
    let c = config;
    let (columns, drift, checks) = match c.name {
        ScenarioName::EfrwQ0 => efrw_q0(c.kappa, c.h, c.window, c.tol)?.report()?,
        ScenarioName::EfrwQ => {
            let mut out = efrw_q(c.kappa, c.q, c.h, c.window, c.tol)?.report()?;
            if c.q != 0.0 {
                out.2.push(efrw::continuity_check(c.kappa, c.h, c.window, c.tol)?);
            }
            out
        }
        ScenarioName::HelmholtzPower => helmholtz_power(c.m, c.b, c.lambda, c.window, c.tol)?.report()?,
        ScenarioName::LewisM => optics::lewis_m_report(c.m, c.b, c.lambda, c.window, c.tol)?,
        ScenarioName::LewisN => optics::lewis_n_report(c.n_index, c.b, c.lambda, c.window, c.tol)?,
        ScenarioName::Xyz => {
            let bundle = xyz_scenario(|eps| tilted_loop(eps, LOOP_AMPLITUDE), &DEFAULT_EPS_SWEEP, 0, c.tol)?;
            let (cols, checks) = bundle.report()?;
            (cols, None, checks)
        }
    };
    debug_assert!(columns.windows(2).all(|w| w[0].values.len() == w[1].values.len()));
    Ok(ScenarioRun { config: config.clone(), columns, drift, checks })
}

/// Invariant, angles and the checks shared by every orbit-type scenario.
pub(crate) struct OrbitReport {
    pub series: InvariantSeries,
    pub angles: Vec<AngleBundle>,
    pub drift: Drift,
    pub checks: Vec<Check>,
}

/// Evaluates the invariant of `x` against `rho` and the angle split on
/// `times`; `claim` is the value the invariant should take, if known.
pub(crate) fn orbit_report(x: &Trajectory, rho: &PinneySolution, times: &[f64], claim: Option<f64>) -> Result<OrbitReport> {
    let series = InvariantSeries::ermakov_lewis(x, rho, times)?;
    let drift = drift_report(&series);
    let mut checks = vec![Check::new("invariant_drift", drift.rel.unwrap_or(drift.abs), Bound::Below(DRIFT_BOUND))];
    if let Some(i) = claim {
        let gap = (series.reference() - i).abs() / i.abs().max(1e-300);
        checks.push(Check::new("invariant_value", gap, Bound::Below(DRIFT_BOUND)));
    }

    let angles = angle_series(rho, times)?;
    let defect = angles.iter().map(|a| a.split_defect().abs()).fold(0.0, f64::max);
    checks.push(Check::new("angle_sum", defect, Bound::Below(1e-8)));
    let step = angles.windows(2).map(|w| w[1].total - w[0].total).fold(f64::INFINITY, f64::min);
    checks.push(Check::new("total_angle_monotone", step, Bound::Above(0.0)));

    let i_ref = series.reference();
    let mut ring: f64 = 0.0;
    for k in 0..RING_TIMES {
        let t = times[(k * (times.len() - 1)) / (RING_TIMES - 1)];
        let action = action_integral_oracle(rho, i_ref, t, RING_NODES)?;
        ring = ring.max((action - i_ref).abs() / i_ref.abs().max(1.0));
    }
    checks.push(Check::new("ring_oracle", ring, Bound::Below(1e-8)));
    checks.push(Check::new("pinney_residual", rho.max_residual()?, Bound::Below(1e-6)));
    Ok(OrbitReport { series, angles, drift, checks })
}

/// The standard columns t, q, I, dtheta_d, dtheta_g, dtheta_t, rho, rho_dot.
pub(crate) fn orbit_columns(time_name: &str, x: &Trajectory, rho: &PinneySolution, rep: &OrbitReport) -> Vec<Column> {
    let t = rep.series.times();
    vec![
        Column::new(time_name, t.to_vec()),
        Column::new("q", t.iter().map(|&s| x.value(s)).collect()),
        Column::new("I", rep.series.values().to_vec()),
        Column::new("dtheta_d", rep.angles.iter().map(|a| a.dynamical).collect()),
        Column::new("dtheta_g", rep.angles.iter().map(|a| a.geometrical).collect()),
        Column::new("dtheta_t", rep.angles.iter().map(|a| a.total).collect()),
        Column::new("rho", t.iter().map(|&s| rho.rho(s)).collect()),
        Column::new("rho_dot", t.iter().map(|&s| rho.rho_dot(s)).collect()),
    ]
}

pub(crate) type Report = (Vec<Column>, Option<Drift>, Vec<Check>);
