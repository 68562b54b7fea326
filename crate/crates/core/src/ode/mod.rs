//! Second-order linear and Pinney-type equations
//!
//! ```text
//!     q'' + P(t) q' + w2(t) q = 0
//!     rho'' + P(t) rho' + w2(t) rho = h^2 exp(-2 int_anchor^t P) / rho^3
//! ```
//!
//! `w2` is always the effective stiffness of the equation actually
//! integrated. Lewis's form eps^2 q'' + W^2 q = 0 is expressed through
//! [`CoefficientSet::lewis`], which stores w2 = W^2/eps^2 and keeps eps for
//! the momentum normalization p = eps M q'.

mod dopri;
mod trajectory;

use std::fmt;
use std::sync::Arc;

pub use dopri::{solve, solve_fixed, DenseSolution, OdeSystem};
pub use trajectory::Trajectory;

use crate::error::{Error, Result};
use crate::quad::{self, QuadTol};

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A scalar function of time, with enough structure to integrate it cheaply.
#[derive(Clone)]
pub enum Profile {
    Zero,
    Constant(f64),
    Func { f: RealFn, primitive: Option<RealFn> },
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Zero => write!(f, "Zero"),
            Profile::Constant(c) => write!(f, "Constant({c})"),
            Profile::Func { primitive, .. } => {
                write!(f, "Func {{ primitive: {} }}", primitive.is_some())
            }
        }
    }
}

impl Profile {
    pub fn from_fn(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Profile::Func { f: Arc::new(f), primitive: None }
    }

    /// A function together with an antiderivative.
    pub fn with_primitive(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        prim: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Profile::Func { f: Arc::new(f), primitive: Some(Arc::new(prim)) }
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            Profile::Zero => 0.0,
            Profile::Constant(c) => *c,
            Profile::Func { f, .. } => f(t),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Profile::Zero) || matches!(self, Profile::Constant(c) if *c == 0.0)
    }

    /// ∫_a^b of the profile.
    pub fn integral(&self, a: f64, b: f64) -> Result<f64> {
        match self {
            Profile::Zero => Ok(0.0),
            Profile::Constant(c) => Ok(c * (b - a)),
            Profile::Func { primitive: Some(p), .. } => Ok(p(b) - p(a)),
            Profile::Func { f, .. } => quad::integrate(|t| f(t), a, b, QuadTol::default()),
        }
    }
}

/// Coefficients of the equations above.
#[derive(Clone, Debug)]
pub struct CoefficientSet {
    /// Effective stiffness w2(t).
    pub omega2: Profile,
    /// Friction coefficient P(t).
    pub damping: Profile,
    /// d/dt ln M for the mass M(t) entering p = eps M q'.
    pub mass_log_rate: Profile,
    /// Lewis's small parameter; 1 unless the model carries one.
    pub epsilon: f64,
    /// Lower limit of the integrals of P and of ln M.
    pub anchor: f64,
}

impl CoefficientSet {
    pub fn new(omega2: Profile) -> Self {
        CoefficientSet {
            omega2,
            damping: Profile::Zero,
            mass_log_rate: Profile::Zero,
            epsilon: 1.0,
            anchor: 0.0,
        }
    }

    pub fn constant(omega2: f64) -> Self {
        Self::new(Profile::Constant(omega2))
    }

    /// eps^2 q'' + W^2(t) q = 0.
    pub fn lewis(big_omega2: Profile, eps: f64) -> Self {
        let e2 = eps * eps;
        let omega2 = match big_omega2 {
            Profile::Zero => Profile::Zero,
            Profile::Constant(c) => Profile::Constant(c / e2),
            Profile::Func { f, .. } => Profile::from_fn(move |t| f(t) / e2),
        };
        CoefficientSet { epsilon: eps, ..Self::new(omega2) }
    }

    /// Damped equation derived from a Hamiltonian with mass exp(∫P):
    /// sets both the friction and the mass growth rate to P.
    pub fn with_hamiltonian_damping(mut self, p: Profile) -> Self {
        self.mass_log_rate = p.clone();
        self.damping = p;
        self
    }

    pub fn with_damping(mut self, p: Profile) -> Self {
        self.damping = p;
        self
    }

    pub fn with_epsilon(mut self, eps: f64) -> Self {
        self.epsilon = eps;
        self
    }

    pub fn with_anchor(mut self, anchor: f64) -> Self {
        self.anchor = anchor;
        self
    }

    /// ∫_anchor^t P.
    pub fn damping_integral(&self, t: f64) -> Result<f64> {
        self.damping.integral(self.anchor, t)
    }

    /// exp(-∫_anchor^t P); the Abel factor of the Wronskian.
    pub fn abel_factor(&self, t: f64) -> Result<f64> {
        Ok((-self.damping_integral(t)?).exp())
    }

    /// M(t) = exp(∫_anchor^t d ln M).
    pub fn mass(&self, t: f64) -> Result<f64> {
        Ok(self.mass_log_rate.integral(self.anchor, t)?.exp())
    }
}

/// Right-hand side selector for [`integrate`].
#[derive(Clone)]
pub enum RhsKind {
    Linear,
    /// Pinney equation with the given h^2.
    Pinney { h2: f64 },
    /// Arbitrary (t, [y, y']) -> [y', y''].
    Custom(Arc<dyn Fn(f64, [f64; 2]) -> [f64; 2] + Send + Sync>),
}

struct LinearSys<'a>(&'a CoefficientSet);

impl OdeSystem for LinearSys<'_> {
    fn dim(&self) -> usize {
        2
    }
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        let c = self.0;
        dy[0] = y[1];
        dy[1] = -c.damping.value(t) * y[1] - c.omega2.value(t) * y[0];
    }
}

/// Pinney equation; the third component carries ∫_anchor^t P.
struct PinneySys<'a> {
    c: &'a CoefficientSet,
    h2: f64,
}

impl OdeSystem for PinneySys<'_> {
    fn dim(&self) -> usize {
        3
    }
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        let p = self.c.damping.value(t);
        let r = y[0];
        dy[0] = y[1];
        dy[1] = -p * y[1] - self.c.omega2.value(t) * r + self.h2 * (-2.0 * y[2]).exp() / (r * r * r);
        dy[2] = p;
    }
    fn validate(&self, t: f64, y: &[f64]) -> Result<()> {
        if y[0] > 1e-150 && y[0].is_finite() {
            Ok(())
        } else {
            Err(Error::Singular { t })
        }
    }
}

struct CustomSys<'a>(&'a (dyn Fn(f64, [f64; 2]) -> [f64; 2] + Send + Sync));

impl OdeSystem for CustomSys<'_> {
    fn dim(&self) -> usize {
        2
    }
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        let d = (self.0)(t, [y[0], y[1]]);
        dy[0] = d[0];
        dy[1] = d[1];
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if (1e-14..=1e-3).contains(&tol) {
        Ok(())
    } else {
        Err(Error::Domain(format!("tolerance {tol:e} outside [1e-14, 1e-3]")))
    }
}

/// Integrates from `window.0` (where `y0` is imposed) to `window.1`.
///
/// The window may run backwards; the returned trajectory always covers
/// `[min, max]` of it. States are (q, q') or (rho, rho').
pub fn integrate(
    coeffs: &CoefficientSet,
    kind: &RhsKind,
    y0: [f64; 2],
    window: (f64, f64),
    tol: f64,
) -> Result<Trajectory> {
    check_tol(tol)?;
    let (t0, t1) = window;
    let sol = match kind {
        RhsKind::Linear => solve(&LinearSys(coeffs), &y0, t0, t1, tol)?,
        RhsKind::Pinney { h2 } => {
            if y0[0] <= 0.0 {
                return Err(Error::Domain(format!("Pinney start needs rho(t0) > 0, got {}", y0[0])));
            }
            let f0 = coeffs.damping_integral(t0)?;
            solve(&PinneySys { c: coeffs, h2: *h2 }, &[y0[0], y0[1], f0], t0, t1, tol)?
        }
        RhsKind::Custom(f) => solve(&CustomSys(f.as_ref()), &y0, t0, t1, tol)?,
    };
    Ok(Trajectory::dense(sol).with_equation(coeffs.clone()))
}

/// Solutions with x1 = 1, x1' = 0 and x2 = 0, x2' = 1 at t0.
///
/// t0 may sit anywhere inside the window; each solution is then
/// integrated outward in both directions and stitched.
pub fn fundamental_pair(
    coeffs: &CoefficientSet,
    t0: f64,
    window: (f64, f64),
    tol: f64,
) -> Result<(Trajectory, Trajectory)> {
    let x1 = integrate_through(coeffs, &RhsKind::Linear, [1.0, 0.0], t0, window, tol)?;
    let x2 = integrate_through(coeffs, &RhsKind::Linear, [0.0, 1.0], t0, window, tol)?;
    Ok((x1, x2))
}

/// Like [`integrate`] but with the initial data imposed at an interior
/// point t0 of the window.
pub fn integrate_through(
    coeffs: &CoefficientSet,
    kind: &RhsKind,
    y0: [f64; 2],
    t0: f64,
    window: (f64, f64),
    tol: f64,
) -> Result<Trajectory> {
    let (lo, hi) = (window.0.min(window.1), window.0.max(window.1));
    if !(lo..=hi).contains(&t0) {
        return Err(Error::OutOfWindow { t: t0, lo, hi });
    }
    if t0 == lo {
        return integrate(coeffs, kind, y0, (lo, hi), tol);
    }
    if t0 == hi {
        return integrate(coeffs, kind, y0, (hi, lo), tol);
    }
    let left = integrate(coeffs, kind, y0, (t0, lo), tol)?;
    let right = integrate(coeffs, kind, y0, (t0, hi), tol)?;
    Ok(Trajectory::stitch(left, right, t0))
}

/// x1 x2' - x2 x1' at t.
pub fn wronskian(x1: &Trajectory, x2: &Trajectory, t: f64) -> Result<f64> {
    let a = x1.try_state(t)?;
    let b = x2.try_state(t)?;
    Ok(a[0] * b[1] - b[0] * a[1])
}

/// Fourth-order central difference of g at t with step d.
pub fn central_difference(g: impl Fn(f64) -> f64, t: f64, d: f64) -> f64 {
    (g(t - 2.0 * d) - 8.0 * g(t - d) + 8.0 * g(t + d) - g(t + 2.0 * d)) / (12.0 * d)
}

/// Relative residual of x'' + P x' + w2 x = 0 at t, with x'' from
/// differencing x' with step `d`.
pub fn linear_residual(x: &Trajectory, c: &CoefficientSet, t: f64, d: f64) -> Result<f64> {
    let [q, qd] = x.try_state(t)?;
    x.try_state(t - 2.0 * d)?;
    x.try_state(t + 2.0 * d)?;
    let qdd = central_difference(|s| x.derivative(s), t, d);
    let terms = [qdd, c.damping.value(t) * qd, c.omega2.value(t) * q];
    let scale: f64 = terms.iter().map(|v| v.abs()).sum();
    let sum: f64 = terms.iter().sum();
    Ok(if scale == 0.0 { 0.0 } else { sum.abs() / scale })
}
