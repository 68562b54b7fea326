//! Action–angle variables, the split of the angle advance into dynamical
//! and geometric parts, and cyclic phases.
//!
//! For mass M(t) the angle pieces over [t0, t1] are
//!
//! ```text
//!     total      = ∫ 1/(M rho^2)
//!     geometric  = 1/2 [M rho rho']_{t0}^{t1} - ∫ M rho'^2
//!     dynamical  = ∫ (1/(M rho^2) + M rho'^2) - 1/2 [M rho rho']_{t0}^{t1}
//! ```
//!
//! with the boundary terms taken as endpoint differences.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::invariants::PhasePoint;
use crate::ode::{fundamental_pair, CoefficientSet, Profile, RealFn};
use crate::pinney::{pinney_general_eg, PinneySolution};
use crate::quantum::{quantum_geometric_phase, EigenState};
use crate::quad::{integrate, integrate_pieces, QuadTol};

/// Advance of the angle variable over a window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleBundle {
    pub dynamical: f64,
    pub geometrical: f64,
    pub total: f64,
    pub window: (f64, f64),
}

impl AngleBundle {
    /// dynamical + geometrical - total.
    pub fn split_defect(&self) -> f64 {
        self.dynamical + self.geometrical - self.total
    }
}

/// S(q, I) = eps M rho' q^2 / (2 rho)
///         + (1/(eps h)) [I asin(k q / sqrt(2I)) + (k q / 2) sqrt(2I - k^2 q^2)],
/// k = eps h / rho, with zero integration constant. For eps h = 1 this is
/// q^2 rho'/(2 rho) + I asin(q / sqrt(2 I rho^2)) + q sqrt(2 I rho^2 - q^2) / (2 rho^2).
pub fn generating_function(q: f64, i: f64, rho: &PinneySolution, t: f64) -> Result<f64> {
    if !(i > 0.0) {
        return Err(Error::Domain(format!("action must be positive, got {i}")));
    }
    let c = rho.equation();
    let [r, rd] = rho.curve().try_state(t)?;
    let eh = c.epsilon * rho.h();
    let k = eh / r;
    let s = k * q / (2.0 * i).sqrt();
    if s.abs() > 1.0 {
        return Err(Error::Domain(format!("q = {q} lies outside the ring of action {i}")));
    }
    let first = c.epsilon * c.mass(t)? * rd * q * q / (2.0 * r);
    let rest = i * s.asin() + 0.5 * k * q * (2.0 * i - k * k * q * q).max(0.0).sqrt();
    Ok(first + rest / eh)
}

/// Principal-branch angle asin(q / sqrt(2 I rho^2)) in [-pi/2, pi/2].
pub fn angle_theta(q: f64, i: f64, rho_val: f64) -> Result<f64> {
    let s = q / (2.0 * i * rho_val * rho_val).sqrt();
    if !(s.abs() <= 1.0) {
        return Err(Error::Domain(format!("asin argument {s} outside [-1, 1]")));
    }
    Ok(s.asin())
}

/// Angle on the full circle: the quadrant comes from the sign of
/// rho p - eps M rho' q, so the result lies in (-pi, pi].
pub fn angle_full(pt: PhasePoint, rho: &PinneySolution) -> Result<f64> {
    let c = rho.equation();
    let [r, rd] = rho.curve().try_state(pt.t)?;
    let sin_part = c.epsilon * rho.h() * pt.q / r;
    let cos_part = r * pt.p - c.epsilon * c.mass(pt.t)? * rd * pt.q;
    Ok(sin_part.atan2(cos_part))
}

/// Removes 2pi jumps from a sequence of wrapped angles.
pub fn unwrap(angles: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(angles.len());
    let mut shift = 0.0;
    for (k, &a) in angles.iter().enumerate() {
        if k > 0 {
            let d = a + shift - out[k - 1];
            shift -= 2.0 * PI * (d / (2.0 * PI)).round();
        }
        out.push(a + shift);
    }
    out
}

fn tol() -> QuadTol {
    QuadTol::default()
}

fn pieces<F: FnMut(f64) -> f64>(f: F, rho: &PinneySolution, a: f64, b: f64) -> Result<f64> {
    integrate_pieces(f, a, b, rho.curve().breakpoints(), tol())
}

fn mass_fn(c: &CoefficientSet) -> impl Fn(f64) -> f64 + '_ {
    move |t| c.mass(t).unwrap_or(f64::NAN)
}

/// Dynamical, geometric and total angle advance over `window`.
pub fn angle_bundle(rho: &PinneySolution, window: (f64, f64)) -> Result<AngleBundle> {
    let (a, b) = window;
    let c = rho.equation();
    let m = mass_fn(c);
    for t in [a, b] {
        rho.curve().try_state(t)?;
    }
    let total = pieces(|t| 1.0 / (m(t) * rho.rho(t).powi(2)), rho, a, b)?;
    let kinetic = pieces(|t| m(t) * rho.rho_dot(t).powi(2), rho, a, b)?;
    let both = pieces(
        |t| {
            let [r, rd] = rho.state(t);
            let mt = m(t);
            1.0 / (mt * r * r) + mt * rd * rd
        },
        rho,
        a,
        b,
    )?;
    let edge = |t: f64| {
        let [r, rd] = rho.state(t);
        0.5 * c.mass(t).map(|mt| mt * r * rd)
            .unwrap_or(f64::NAN)
    };
    let boundary = edge(b) - edge(a);
    let out = AngleBundle { dynamical: both - boundary, geometrical: boundary - kinetic, total, window };
    if !(out.dynamical.is_finite() && out.geometrical.is_finite() && total.is_finite()) {
        return Err(Error::NonFinite { t: b });
    }
    Ok(out)
}

/// Angle bundles from `times[0]` to each sample, accumulated piece by piece.
pub fn angle_series(rho: &PinneySolution, times: &[f64]) -> Result<Vec<AngleBundle>> {
    let Some(&t0) = times.first() else { return Ok(Vec::new()) };
    let mut acc = AngleBundle { dynamical: 0.0, geometrical: 0.0, total: 0.0, window: (t0, t0) };
    let mut out = vec![acc];
    for w in times.windows(2) {
        let step = angle_bundle(rho, (w[0], w[1]))?;
        acc = AngleBundle {
            dynamical: acc.dynamical + step.dynamical,
            geometrical: acc.geometrical + step.geometrical,
            total: acc.total + step.total,
            window: (t0, w[1]),
        };
        out.push(acc);
    }
    Ok(out)
}

/// Nonadiabatic Hannay angle -∮ rho' d rho over one period starting at the
/// window start (negative `period`: traversed backwards from the window end).
pub fn hannay_cyclic(rho: &PinneySolution, period: f64) -> Result<f64> {
    let (lo, hi) = rho.window();
    let (a, b) = if period >= 0.0 { (lo, lo + period) } else { (hi, hi + period) };
    let [ra, da] = rho.curve().try_state(a)?;
    let [rb, db] = rho.curve().try_state(b)?;
    let gap = (ra - rb).abs().max((da - db).abs());
    if gap > 1e-6 {
        return Err(Error::Constraint { what: "rho is not periodic with the given period".into(), residual: gap });
    }
    Ok(-pieces(|t| rho.rho_dot(t).powi(2), rho, a, b)?)
}

/// Lewis phase -(n + 1/2) ∫ dt / (M rho^2) with hbar = 1.
pub fn lewis_phase(n: u32, rho: &PinneySolution, window: (f64, f64)) -> Result<f64> {
    let m = mass_fn(rho.equation());
    let total = pieces(|t| 1.0 / (m(t) * rho.rho(t).powi(2)), rho, window.0, window.1)?;
    Ok(-(n as f64 + 0.5) * total)
}

/// Leading adiabatic amplitude (w2)^{-1/4}.
pub fn adiabatic_rho0(omega2: &Profile, t: f64) -> Result<f64> {
    let w2 = omega2.value(t);
    if w2 > 0.0 {
        Ok(w2.powf(-0.25))
    } else {
        Err(Error::Domain(format!("squared frequency {w2} <= 0 at t = {t}: turning point")))
    }
}

/// A smooth coefficient with optional analytic first and second derivatives.
#[derive(Clone)]
pub struct SmoothFn {
    f: RealFn,
    d1: Option<RealFn>,
    d2: Option<RealFn>,
    /// Step for the difference formulas used when derivatives are absent.
    step: f64,
}

impl fmt::Debug for SmoothFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SmoothFn {{ analytic: {} }}", self.d1.is_some() && self.d2.is_some())
    }
}

impl SmoothFn {
    pub fn constant(c: f64) -> Self {
        SmoothFn {
            f: Arc::new(move |_| c),
            d1: Some(Arc::new(|_| 0.0)),
            d2: Some(Arc::new(|_| 0.0)),
            step: 1e-3,
        }
    }

    /// Derivatives by fourth-order central differences with the given step.
    pub fn from_fn(f: impl Fn(f64) -> f64 + Send + Sync + 'static, step: f64) -> Self {
        SmoothFn { f: Arc::new(f), d1: None, d2: None, step }
    }

    pub fn with_derivatives(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        SmoothFn { f: Arc::new(f), d1: Some(Arc::new(d1)), d2: Some(Arc::new(d2)), step: 1e-3 }
    }

    pub fn value(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    pub fn d1(&self, t: f64) -> f64 {
        match &self.d1 {
            Some(d) => d(t),
            None => {
                let (f, h) = (&self.f, self.step);
                (f(t - 2.0 * h) - 8.0 * f(t - h) + 8.0 * f(t + h) - f(t + 2.0 * h)) / (12.0 * h)
            }
        }
    }

    pub fn d2(&self, t: f64) -> f64 {
        match &self.d2 {
            Some(d) => d(t),
            None => {
                let (f, h) = (&self.f, self.step);
                (-f(t - 2.0 * h) + 16.0 * f(t - h) - 30.0 * f(t) + 16.0 * f(t + h) - f(t + 2.0 * h))
                    / (12.0 * h * h)
            }
        }
    }
}

/// Periodic coefficients of H = 1/2 [X q^2 + 2 Y q p + Z p^2].
#[derive(Clone, Debug)]
pub struct XYZParams {
    pub x: SmoothFn,
    pub y: SmoothFn,
    pub z: SmoothFn,
    pub period: f64,
}

impl XYZParams {
    /// Checks Z != 0 and XZ - Y^2 > 0 on a grid over one period.
    pub fn new(x: SmoothFn, y: SmoothFn, z: SmoothFn, period: f64) -> Result<Self> {
        if !(period > 0.0) {
            return Err(Error::Domain(format!("period must be positive, got {period}")));
        }
        let p = XYZParams { x, y, z, period };
        for k in 0..=400 {
            let t = period * k as f64 / 400.0;
            if p.z.value(t) == 0.0 {
                return Err(Error::Singular { t });
            }
            if !(p.frequency2(t) > 0.0) {
                return Err(Error::Domain(format!("XZ - Y^2 <= 0 at t = {t}")));
            }
        }
        Ok(p)
    }

    /// XZ - Y^2, the square of the adiabatic frequency.
    pub fn frequency2(&self, t: f64) -> f64 {
        let y = self.y.value(t);
        self.x.value(t) * self.z.value(t) - y * y
    }

    /// (Z'Y - Y'Z) / (Z sqrt(XZ - Y^2)).
    pub fn curvature_term(&self, t: f64) -> f64 {
        let (y, z) = (self.y.value(t), self.z.value(t));
        (self.z.d1(t) * y - self.y.d1(t) * z) / (z * self.frequency2(t).sqrt())
    }

    /// Undamped equation Q'' + W^2 Q = 0 for Q = q / sqrt(Z).
    pub fn coefficients(&self) -> CoefficientSet {
        let p = self.clone();
        CoefficientSet::new(Profile::from_fn(move |t| omega2_from_xyz(&p, t)))
    }
}

/// W^2 = XZ - Y^2 + (Z'Y - Y'Z)/Z + 1/2 (Z''/Z - Z'^2/Z^2) - 1/4 (Z'/Z)^2.
pub fn omega2_from_xyz(p: &XYZParams, t: f64) -> f64 {
    let (y, z) = (p.y.value(t), p.z.value(t));
    let (zd, zdd) = (p.z.d1(t), p.z.d2(t));
    let r = zd / z;
    p.frequency2(t) + (zd * y - p.y.d1(t) * z) / z + 0.5 * (zdd / z - r * r) - 0.25 * r * r
}

fn cyclic(p: &XYZParams, f: impl FnMut(f64) -> f64) -> Result<f64> {
    integrate(f, 0.0, p.period, tol())
}

/// Adiabatic Berry phase -1/2 (n + 1/2) ∮ (Z'Y - Y'Z) / (Z sqrt(XZ - Y^2)).
pub fn berry_phase_xyz(p: &XYZParams, n: u32) -> Result<f64> {
    Ok(-0.5 * (n as f64 + 0.5) * cyclic(p, |t| p.curvature_term(t))?)
}

/// Hannay angle 1/2 ∮ (Z'Y - Y'Z) / (Z sqrt(XZ - Y^2)).
pub fn hannay_xyz(p: &XYZParams) -> Result<f64> {
    Ok(0.5 * cyclic(p, |t| p.curvature_term(t))?)
}

/// The periodic unit-h Pinney amplitude of Q'' + W^2 Q = 0, built from the
/// monodromy matrix [[a, b], [c, d]] of the fundamental pair: with
/// cos mu = (a + d)/2, rho(0)^2 = b / sin mu and rho rho'(0) = (d - a) / (2 sin mu).
pub fn periodic_rho(p: &XYZParams, tol: f64) -> Result<PinneySolution> {
    let c = p.coefficients();
    let t1 = p.period;
    let (x1, x2) = fundamental_pair(&c, 0.0, (0.0, t1), tol)?;
    let [a, _] = x1.try_state(t1)?;
    let [b, d] = x2.try_state(t1)?;
    let half_trace = 0.5 * (a + d);
    if half_trace.abs() >= 1.0 {
        return Err(Error::Degenerate(format!("unstable monodromy, half trace {half_trace}")));
    }
    let mut s = (1.0 - half_trace * half_trace).sqrt();
    if b / s < 0.0 {
        s = -s;
    }
    let aa = b / s;
    let cr = (d - a) / (2.0 * s);
    pinney_general_eg(&x1, &x2, aa, (1.0 + cr * cr) / aa, cr, 1.0)
}

/// Exact cyclic Berry phase -1/2 (n + 1/2) ∫_0^T (rho rho'' - rho'^2) with
/// rho'' taken from the Pinney equation.
pub fn berry_phase_exact(rho: &PinneySolution, period: f64, n: u32) -> Result<f64> {
    let a = rho.window().0;
    quantum_geometric_phase(EigenState::new(n, 1.0)?, rho, (a, a + period))
}

/// Geometric part of the Lewis phase: Lewis phase minus the dynamical phase
/// -(n + 1/2) ∮ sqrt(XZ - Y^2).
pub fn berry_phase_lewis_route(p: &XYZParams, rho: &PinneySolution, n: u32) -> Result<f64> {
    let a = rho.window().0;
    let lewis = lewis_phase(n, rho, (a, a + p.period))?;
    let dynamical = -(n as f64 + 0.5) * cyclic(p, |t| p.frequency2(t).sqrt())?;
    Ok(lewis - dynamical)
}
