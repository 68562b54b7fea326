//! Empty FRW universe in Misner time W:
//!
//! ```text
//!     Psi'' + Q Psi' - kappa exp(-4W) Psi = 0,    mass M = exp(Q W)
//! ```
//!
//! With z = exp(-2W)/2 and a = Q/4 the solutions are (2z)^a Z_a(z), where
//! Z is I or K for kappa = +1 and J or Y for kappa = -1. Initial data sit
//! at the present era W = 0 and Psi = psi1 + psi2.

use crate::error::{Error, Result};
use crate::ode::{self, CoefficientSet, Profile, RhsKind, Trajectory};
use crate::pinney::{
    abel_wronskian, initial_condition_combo, pinney_damped_2eg, pinney_from_linear, solve_direct, PinneySolution,
};
use crate::quantum::squeeze_coeffs;
use crate::specfun::{bessel_with_deriv, BesselKind};

use super::{orbit_columns, orbit_report, sample_times, Bound, Check, OrbitReport, Report, SAMPLES};

/// Everything computed for one EFRW run.
#[derive(Debug, Clone)]
pub struct EfrwBundle {
    pub kappa: i32,
    pub q: f64,
    pub h: f64,
    pub window: (f64, f64),
    pub tol: f64,
    pub coeffs: CoefficientSet,
    /// Bessel-form solutions (psi1, psi2).
    pub psi: (Trajectory, Trajectory),
    /// x1 = 1, x1' = 0 and x2 = 0, x2' = 1 at W = 0.
    pub pair: (Trajectory, Trajectory),
    /// Psi = psi1 + psi2 in closed form.
    pub wavefunction: Trajectory,
    /// Psi integrated numerically from its data at the window start.
    pub state: Trajectory,
    pub rho: PinneySolution,
    pub times: Vec<f64>,
}

fn coefficients(kappa: i32, q: f64) -> CoefficientSet {
    let k = kappa as f64;
    CoefficientSet::new(Profile::from_fn(move |w| -k * (-4.0 * w).exp())).with_hamiltonian_damping(Profile::Constant(q))
}

fn kinds(kappa: i32) -> Result<(BesselKind, BesselKind)> {
    match kappa {
        1 => Ok((BesselKind::I, BesselKind::K)),
        -1 => Ok((BesselKind::J, BesselKind::Y)),
        _ => Err(Error::Config { field: "kappa", message: format!("must be +1 or -1, got {kappa}") }),
    }
}

/// [psi, psi'] for (2z)^a Z_|a|(z); Bessel's equation is even in the order,
/// so |a| serves for negative Q as well.
fn psi_state(kind: BesselKind, a: f64, w: f64) -> Result<[f64; 2]> {
    let z = 0.5 * (-2.0 * w).exp();
    let pre = (-2.0 * a * w).exp();
    let (f, fp) = bessel_with_deriv(kind, a.abs(), z)?;
    Ok([pre * f, -2.0 * pre * (a * f + z * fp)])
}

/// The Bessel-form pair on `window` extended to contain W = 0.
pub fn efrw_psi(kappa: i32, q: f64, window: (f64, f64)) -> Result<(Trajectory, Trajectory)> {
    let (k1, k2) = kinds(kappa)?;
    let a = q / 4.0;
    let w = (window.0.min(0.0), window.1.max(0.0));
    let eq = coefficients(kappa, q);
    let mk = |kind: BesselKind| -> Result<Trajectory> {
        for t in super::sample_times(w, 21) {
            psi_state(kind, a, t).map_err(|e| e.at(t))?;
        }
        Ok(Trajectory::analytic(w, move |t| psi_state(kind, a, t).unwrap_or([f64::NAN; 2])).with_equation(eq.clone()))
    };
    Ok((mk(k1)?, mk(k2)?))
}

/// Coefficients (a, b, c, d) with x1 = a psi1 + b psi2, x2 = c psi1 + d psi2
/// taking unit initial data at W = 0, from the recurrences of the Bessel
/// functions at z = 1/2 (Q >= 0).
///
/// Closed: with N_K = K_{a+1} - Q K_a, N_I = I_{a+1} + Q I_a and
/// D = I_{a+1} K_a + K_{a+1} I_a, (a, b, c, d) = (N_K, N_I, -K_a, I_a) / D.
/// Open: with N_J = J_{a+1} - Q J_a, N_Y = Y_{a+1} - Q Y_a and
/// D = J_{a+1} Y_a - Y_{a+1} J_a, (a, b, c, d) = (-N_Y, N_J, Y_a, -J_a) / D.
pub fn efrw_coefficient_table(kappa: i32, q: f64) -> Result<[f64; 4]> {
    if !(q >= 0.0) {
        return Err(Error::Domain(format!("coefficient table needs Q >= 0, got {q}")));
    }
    let a = q / 4.0;
    let f = |kind, nu| crate::specfun::bessel(kind, nu, 0.5);
    match kinds(kappa)? {
        (BesselKind::I, BesselKind::K) => {
            let (i0, i1) = (f(BesselKind::I, a)?, f(BesselKind::I, a + 1.0)?);
            let (k0, k1) = (f(BesselKind::K, a)?, f(BesselKind::K, a + 1.0)?);
            let d = i1 * k0 + k1 * i0;
            Ok([(k1 - q * k0) / d, (i1 + q * i0) / d, -k0 / d, i0 / d])
        }
        _ => {
            let (j0, j1) = (f(BesselKind::J, a)?, f(BesselKind::J, a + 1.0)?);
            let (y0, y1) = (f(BesselKind::Y, a)?, f(BesselKind::Y, a + 1.0)?);
            let d = j1 * y0 - y1 * j0;
            Ok([-(y1 - q * y0) / d, (j1 - q * j0) / d, y0 / d, -j0 / d])
        }
    }
}

struct Parts {
    coeffs: CoefficientSet,
    psi: (Trajectory, Trajectory),
    pair: (Trajectory, Trajectory),
    wavefunction: Trajectory,
    a0: f64,
    b0: f64,
}

fn parts(kappa: i32, q: f64, h: f64, window: (f64, f64)) -> Result<Parts> {
    if !(h > 0.0) {
        return Err(Error::Config { field: "h", message: format!("must be positive, got {h}") });
    }
    let psi = efrw_psi(kappa, q, window)?;
    let pair = initial_condition_combo(&psi.0, &psi.1, 0.0)?;
    let wavefunction = Trajectory::combine(1.0, &psi.0, 1.0, &psi.1);
    let [a0, b0] = wavefunction.try_state(0.0)?;
    if a0.abs() < 1e-300 {
        return Err(Error::Degenerate("Psi vanishes at W = 0".into()));
    }
    Ok(Parts { coeffs: coefficients(kappa, q), psi, pair, wavefunction, a0, b0 })
}

fn finish(kappa: i32, q: f64, h: f64, window: (f64, f64), tol: f64, p: Parts, rho: PinneySolution) -> Result<EfrwBundle> {
    let y0 = p.wavefunction.try_state(window.0)?;
    let state = ode::integrate(&p.coeffs, &RhsKind::Linear, y0, window, tol)?.with_equation(p.coeffs.clone());
    Ok(EfrwBundle {
        kappa,
        q,
        h,
        window,
        tol,
        coeffs: p.coeffs,
        psi: p.psi,
        pair: p.pair,
        wavefunction: p.wavefunction,
        state,
        rho,
        times: sample_times(window, SAMPLES),
    })
}

/// Q = 0: rho = [Psi^2 + h^2 x2^2 / W^2]^{1/2} with W = W[Psi, x2] = Psi(0),
/// which makes the invariant of Psi equal h^2/2.
pub fn efrw_q0(kappa: i32, h: f64, window: (f64, f64), tol: f64) -> Result<EfrwBundle> {
    let p = parts(kappa, 0.0, h, window)?;
    let rho = pinney_from_linear(&p.wavefunction, &p.pair.1, -h * h)?;
    finish(kappa, 0.0, h, window, tol, p, rho)
}

/// General Q: rho^2 = (a0 x1 + b0 x2)^2 + (h/a0)^2 x2^2 where (a0, b0) are
/// Psi and Psi' at W = 0, built as the damped quadratic form.
pub fn efrw_q(kappa: i32, q: f64, h: f64, window: (f64, f64), tol: f64) -> Result<EfrwBundle> {
    let p = parts(kappa, q, h, window)?;
    let (a0, b0) = (p.a0, p.b0);
    let (a, b, c) = (a0 * a0, b0 * b0 + h * h / (a0 * a0), a0 * b0);
    let rho = pinney_damped_2eg(&p.pair.0, &p.pair.1, a, b, c, h * h, &Profile::Constant(q))?;
    finish(kappa, q, h, window, tol, p, rho)
}

/// Largest relative gap of rho between `efrw_q` at Q = 0 and
/// `efrw_q0`.
pub(crate) fn continuity_check(kappa: i32, h: f64, window: (f64, f64), tol: f64) -> Result<Check> {
    let a = efrw_q(kappa, 0.0, h, window, tol)?;
    let b = efrw_q0(kappa, h, window, tol)?;
    Ok(Check::new("q0_continuity", a.rho.max_relative_gap(&b.rho), Bound::Below(1e-8)))
}

impl EfrwBundle {
    /// Max relative residual of psi1, psi2 in the linear equation.
    pub fn exact_pair_residual(&self) -> Result<f64> {
        let mut m: f64 = 0.0;
        let d = 2e-4;
        let (a, b) = self.window;
        for t in sample_times((a + 2.0 * d, b - 2.0 * d), 101) {
            for x in [&self.psi.0, &self.psi.1] {
                m = m.max(ode::linear_residual(x, &self.coeffs, t, d)?);
            }
        }
        Ok(m)
    }

    /// Max relative deviation of W[x1, x2] exp(∫P) from its value at W = 0.
    pub fn abel_drift(&self) -> Result<f64> {
        let w0 = abel_wronskian(&self.pair.0, &self.pair.1, &self.coeffs, 0.0)?;
        let mut m: f64 = 0.0;
        for &t in &self.times {
            m = m.max(((abel_wronskian(&self.pair.0, &self.pair.1, &self.coeffs, t)? - w0) / w0).abs());
        }
        Ok(m)
    }

    /// Direct integration of the Pinney equation from the closed form's
    /// data at the window start, compared pointwise.
    pub fn direct_gap(&self) -> Result<f64> {
        let [r0, rd0] = self.rho.state(self.window.0);
        let direct = solve_direct(&self.coeffs, r0, rd0, self.h, self.window, self.tol)?;
        Ok(direct.max_relative_gap(&self.rho))
    }

    /// max | |mu|^2 - |nu|^2 - 1 | along rho, reference frequency 1.
    pub fn squeeze_defect(&self) -> Result<f64> {
        let mut m: f64 = 0.0;
        for &t in &self.times {
            let [r, rd] = self.rho.state(t);
            m = m.max(squeeze_coeffs(r, rd, 1.0, self.q, t, 1.0)?.unitarity_defect().abs());
        }
        Ok(m)
    }

    fn orbit(&self) -> Result<OrbitReport> {
        orbit_report(&self.state, &self.rho, &self.times, Some(0.5 * self.h * self.h))
    }

    pub(crate) fn report(&self) -> Result<Report> {
        let rep = self.orbit()?;
        let mut checks = rep.checks.clone();
        checks.push(Check::new("exact_pair_residual", self.exact_pair_residual()?, Bound::Below(1e-8)));
        checks.push(Check::new("wronskian_abel", self.abel_drift()?, Bound::Below(1e-8)));
        checks.push(Check::new("construction_equivalence", self.direct_gap()?, Bound::Below(1e-6)));
        checks.push(Check::new("squeeze_unitarity", self.squeeze_defect()?, Bound::Below(1e-10)));
        let mut cols = orbit_columns("Omega", &self.state, &self.rho, &rep);
        cols.push(super::Column::new(
            "Psi_exact",
            self.times.iter().map(|&t| self.wavefunction.value(t)).collect(),
        ));
        Ok((cols, Some(rep.drift), checks))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_matches_initial_condition_combo() {
        for (kappa, q) in [(1, 0.0), (1, 3.0), (-1, 0.0), (-1, 1.0), (1, 0.6)] {
            let [a, b, c, d] = efrw_coefficient_table(kappa, q).unwrap();
            let (p1, p2) = efrw_psi(kappa, q, (-0.5, 0.5)).unwrap();
            let (x1, x2) = initial_condition_combo(&p1, &p2, 0.0).unwrap();
            for t in [-0.4, 0.1, 0.45] {
                let y1 = a * p1.value(t) + b * p2.value(t);
                let y2 = c * p1.value(t) + d * p2.value(t);
                assert!((y1 - x1.value(t)).abs() < 1e-12 * (1.0 + y1.abs()), "kappa {kappa} Q {q}");
                assert!((y2 - x2.value(t)).abs() < 1e-12 * (1.0 + y2.abs()), "kappa {kappa} Q {q}");
            }
        }
    }

    #[test]
    fn wronskian_at_origin() {
        // Closed, Q = 0: W = I_1 K_0 + K_1 I_0 = 1/z = 2 at z = 1/2.
        let (p1, p2) = efrw_psi(1, 0.0, (-1.0, 1.0)).unwrap();
        let w = ode::wronskian(&p1, &p2, 0.0).unwrap();
        assert!((w.abs() - 2.0).abs() < 1e-12, "{w}");
        // Open, Q = 0: |W| = 4/pi.
        let (p1, p2) = efrw_psi(-1, 0.0, (-1.0, 1.0)).unwrap();
        let w = ode::wronskian(&p1, &p2, 0.0).unwrap();
        assert!((w.abs() - 4.0 / std::f64::consts::PI).abs() < 1e-12, "{w}");
    }

    #[test]
    fn invariant_is_half_h_squared() {
        for (kappa, q, h) in [(1, 0.0, 1.0), (-1, 0.0, 1.0), (1, 3.0, 1.0), (-1, 1.0, 2.0), (1, -1.0, 1.5)] {
            let b = if q == 0.0 { efrw_q0(kappa, h, (-1.0, 2.0), 1e-10) } else { efrw_q(kappa, q, h, (-1.0, 2.0), 1e-10) }
                .unwrap();
            let rep = b.orbit().unwrap();
            let failed: Vec<_> = rep.checks.iter().filter(|c| !c.passed).collect();
            assert!(failed.is_empty(), "kappa {kappa} Q {q}: {failed:?}");
            assert!((rep.series.reference() - 0.5 * h * h).abs() < 1e-8);
        }
    }

    #[test]
    fn q_zero_is_continuous() {
        for kappa in [1, -1] {
            assert!(continuity_check(kappa, 1.0, (-1.0, 2.0), 1e-10).unwrap().passed);
        }
    }
}
