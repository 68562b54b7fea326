//! The generalized oscillator H = 1/2 [X q^2 + 2 Y q p + Z p^2] carried
//! slowly around a closed loop in (X, Y, Z); compares the adiabatic Berry
//! phase with the exact cyclic phase of the periodic Pinney amplitude.

use std::f64::consts::PI;

use crate::angles::{berry_phase_exact, berry_phase_lewis_route, berry_phase_xyz, hannay_cyclic, hannay_xyz, periodic_rho, SmoothFn, XYZParams};
use crate::error::{Error, Result};

use super::{Bound, Check, Column};

/// Default slowness values, each half the previous. The loop period 2pi/eps
/// keeps 1/eps a third away from an integer, clear of the parametric
/// resonances where the periodic amplitude is not unique.
pub const DEFAULT_EPS_SWEEP: [f64; 4] = [0.3, 0.15, 0.075, 0.0375];

/// Amplitude of Y on the default loop.
pub const LOOP_AMPLITUDE: f64 = 0.1;

/// X = Z = 1, Y = amp sin(eps t), one loop per period 2 pi / eps.
pub fn tilted_loop(eps: f64, amp: f64) -> Result<XYZParams> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("slowness must be positive, got {eps}")));
    }
    let y = SmoothFn::with_derivatives(
        move |t| amp * (eps * t).sin(),
        move |t| amp * eps * (eps * t).cos(),
        move |t| -amp * eps * eps * (eps * t).sin(),
    );
    XYZParams::new(SmoothFn::constant(1.0), y, SmoothFn::constant(1.0), 2.0 * PI / eps)
}

/// Phases for one loop at slowness `eps` and level n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XyzRow {
    pub eps: f64,
    pub adiabatic: f64,
    pub exact: f64,
    pub lewis_route: f64,
    /// Adiabatic Hannay angle and its value from -(gamma_{n+1} - gamma_n).
    pub hannay: f64,
    pub hannay_fd: f64,
    /// Exact counterpart: -∮ rho' d rho and the difference in n of the
    /// exact phase.
    pub hannay_exact: f64,
    pub hannay_exact_fd: f64,
}

impl XyzRow {
    pub fn gap(&self) -> f64 {
        (self.exact - self.adiabatic).abs()
    }
}

#[derive(Debug, Clone)]
pub struct XyzBundle {
    pub n: u32,
    pub rows: Vec<XyzRow>,
}

/// Runs the loop family over the sweep of slowness values.
pub fn xyz_scenario(
    family: impl Fn(f64) -> Result<XYZParams>,
    eps_sweep: &[f64],
    n: u32,
    tol: f64,
) -> Result<XyzBundle> {
    let mut rows = Vec::with_capacity(eps_sweep.len());
    for &eps in eps_sweep {
        let p = family(eps)?;
        let rho = periodic_rho(&p, tol)?;
        let adiabatic = berry_phase_xyz(&p, n)?;
        let exact = berry_phase_exact(&rho, p.period, n)?;
        rows.push(XyzRow {
            eps,
            adiabatic,
            exact,
            lewis_route: berry_phase_lewis_route(&p, &rho, n)?,
            hannay: hannay_xyz(&p)?,
            hannay_fd: -(berry_phase_xyz(&p, n + 1)? - adiabatic),
            hannay_exact: hannay_cyclic(&rho, p.period)?,
            hannay_exact_fd: -(berry_phase_exact(&rho, p.period, n + 1)? - exact),
        });
    }
    Ok(XyzBundle { n, rows })
}

impl XyzBundle {
    /// gap(eps_k) / gap(eps_{k+1}) for consecutive sweep entries.
    pub fn halving_ratios(&self) -> Vec<f64> {
        self.rows.windows(2).map(|w| w[0].gap() / w[1].gap()).collect()
    }

    pub(crate) fn report(&self) -> Result<(Vec<Column>, Vec<Check>)> {
        let col = |name: &str, f: fn(&XyzRow) -> f64| Column::new(name, self.rows.iter().map(f).collect());
        let cols = vec![
            col("eps", |r| r.eps),
            col("berry_adiabatic", |r| r.adiabatic),
            col("berry_exact", |r| r.exact),
            col("berry_lewis_route", |r| r.lewis_route),
            col("gap", XyzRow::gap),
            col("hannay", |r| r.hannay),
            col("hannay_exact", |r| r.hannay_exact),
        ];
        let worst = |f: fn(&XyzRow) -> f64| self.rows.iter().map(f).fold(0.0, f64::max);
        let ratio = self.halving_ratios().into_iter().fold(f64::INFINITY, f64::min);
        let mut checks = vec![
            Check::new("berry_gap_halving", ratio, Bound::Within(1.8, f64::INFINITY)),
            Check::new("hannay_fd", worst(|r| (r.hannay_fd - r.hannay).abs()), Bound::Below(1e-10)),
            // Difference in n of the exact phase, an integral of rho rho'' - rho'^2,
            // against the cyclic form -∮ rho' d rho; they agree only as far as
            // the numerically built amplitude is periodic.
            Check::new("hannay_exact_cyclic", worst(|r| (r.hannay_exact_fd - r.hannay_exact).abs()), Bound::Below(1e-6)),
        ];
        let flat = xyz_scenario(|eps| tilted_loop(eps, 0.0), &[0.3], self.n, 1e-12)?;
        let r = flat.rows[0];
        checks.push(Check::new("zero_loop_berry_adiabatic", r.adiabatic.abs(), Bound::Below(1e-12)));
        checks.push(Check::new("zero_loop_berry_exact", r.exact.abs(), Bound::Below(1e-9)));
        Ok((cols, checks))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_sweep_converges() {
        let b = xyz_scenario(|e| tilted_loop(e, LOOP_AMPLITUDE), &DEFAULT_EPS_SWEEP, 0, 1e-12).unwrap();
        let (cols, checks) = b.report().unwrap();
        let failed: Vec<_> = checks.iter().filter(|c| !c.passed).collect();
        assert!(failed.is_empty(), "{failed:?} ratios {:?}", b.halving_ratios());
        assert_eq!(cols[0].values.len(), DEFAULT_EPS_SWEEP.len());
        // The loop encloses no area in the Y direction alone: the adiabatic
        // phase vanishes.
        assert!(b.rows.iter().all(|r| r.adiabatic.abs() < 1e-12));
    }
}
