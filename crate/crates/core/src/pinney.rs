//! Solutions of Pinney's equation
//!
//! ```text
//!     rho'' + P rho' + w2 rho = h^2 exp(-2 int_anchor^t P) / rho^3
//! ```
//!
//! built either by direct integration or from solutions of the linear
//! equation. Every construction returns a [`PinneySolution`], which knows its
//! governing equation and can report its own residual, so the routes can be
//! checked against one another.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ode::{self, CoefficientSet, OdeSystem, RhsKind, Trajectory};

/// Which construction produced a solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Direct,
    FromLinear,
    GeneralQuadratic,
    DampedQuadratic,
    FromInvariants,
    FromParticular,
    ClosedForm,
    Adiabatic,
}

/// Sign of the cross term in the general-from-particular formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// Grid size used for positivity and residual scans.
pub const SCAN_POINTS: usize = 200;

/// A positive solution rho(t) of Pinney's equation on a window.
#[derive(Clone, Debug)]
pub struct PinneySolution {
    curve: Trajectory,
    h2: f64,
    equation: CoefficientSet,
    provenance: Provenance,
}

fn grid(window: (f64, f64), n: usize) -> impl Iterator<Item = f64> {
    let (a, b) = window;
    (0..n).map(move |i| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 })
}

impl PinneySolution {
    /// Wraps a (rho, rho') curve; rejects curves that are not strictly
    /// positive on the window.
    pub fn new(curve: Trajectory, h2: f64, equation: CoefficientSet, provenance: Provenance) -> Result<Self> {
        let s = PinneySolution { curve, h2, equation, provenance };
        let w = s.window();
        for t in s.curve.times().iter().copied().chain(grid(w, SCAN_POINTS)) {
            let r = s.rho(t);
            if !r.is_finite() {
                return Err(Error::NonFinite { t });
            }
            if r <= 0.0 {
                return Err(Error::Singular { t });
            }
        }
        Ok(s)
    }

    pub fn rho(&self, t: f64) -> f64 {
        self.curve.value(t)
    }

    pub fn rho_dot(&self, t: f64) -> f64 {
        self.curve.derivative(t)
    }

    pub fn state(&self, t: f64) -> [f64; 2] {
        self.curve.state(t)
    }

    /// rho'' taken from the governing equation, not from differencing.
    pub fn rho_ddot(&self, t: f64) -> Result<f64> {
        let [r, rd] = self.state(t);
        let c = &self.equation;
        let e = c.abel_factor(t)?;
        Ok(-c.damping.value(t) * rd - c.omega2.value(t) * r + self.h2 * e * e / (r * r * r))
    }

    pub fn curve(&self) -> &Trajectory {
        &self.curve
    }

    pub fn window(&self) -> (f64, f64) {
        self.curve.window()
    }

    pub fn h2(&self) -> f64 {
        self.h2
    }

    /// The auxiliary angular momentum h (NaN when h^2 < 0).
    pub fn h(&self) -> f64 {
        self.h2.sqrt()
    }

    pub fn equation(&self) -> &CoefficientSet {
        &self.equation
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Relative residual of the equation at t, with rho'' obtained by
    /// central differencing of rho'. The step is capped by the local scales
    /// rho/|rho'| and (rho/|rho''|)^{1/2} so that narrow dips stay resolved.
    pub fn residual(&self, t: f64) -> Result<f64> {
        let (a, b) = self.window();
        let [r, rd] = self.state(t);
        let mut d = 1e-4 * (b - a).abs().max(1e-2);
        for scale in [r / rd.abs(), (r / self.rho_ddot(t)?.abs()).sqrt()] {
            if scale.is_finite() {
                d = d.min(1e-2 * scale);
            }
        }
        let t = t.clamp(a + 2.0 * d, b - 2.0 * d);
        let rdd = ode::central_difference(|s| self.rho_dot(s), t, d);
        let [r, rd] = self.state(t);
        let c = &self.equation;
        let e = c.abel_factor(t)?;
        let terms = [rdd, c.damping.value(t) * rd, c.omega2.value(t) * r, -self.h2 * e * e / (r * r * r)];
        let sum: f64 = terms.iter().sum();
        let scale: f64 = terms.iter().map(|v| v.abs()).sum();
        Ok(if scale == 0.0 { 0.0 } else { sum.abs() / scale })
    }

    /// Largest [`residual`](Self::residual) over an interior grid.
    pub fn max_residual(&self) -> Result<f64> {
        let mut m: f64 = 0.0;
        for t in grid(self.window(), SCAN_POINTS) {
            m = m.max(self.residual(t)?);
        }
        Ok(m)
    }

    /// max |rho_a - rho_b| / rho_b over the common window.
    pub fn max_relative_gap(&self, other: &PinneySolution) -> f64 {
        let w = (self.window().0.max(other.window().0), self.window().1.min(other.window().1));
        grid(w, SCAN_POINTS)
            .map(|t| ((self.rho(t) - other.rho(t)) / other.rho(t)).abs())
            .fold(0.0, f64::max)
    }
}

/// Integrates Pinney's equation from (rho0, rho_dot0) at `window.0`.
pub fn solve_direct(
    coeffs: &CoefficientSet,
    rho0: f64,
    rho_dot0: f64,
    h: f64,
    window: (f64, f64),
    tol: f64,
) -> Result<PinneySolution> {
    let h2 = h * h;
    let curve = ode::integrate(coeffs, &RhsKind::Pinney { h2 }, [rho0, rho_dot0], window, tol)?;
    PinneySolution::new(curve, h2, coeffs.clone(), Provenance::Direct)
}

fn common_window(a: &Trajectory, b: &Trajectory) -> Result<(f64, f64)> {
    let w = (a.window().0.max(b.window().0), a.window().1.min(b.window().1));
    if w.0 < w.1 {
        Ok(w)
    } else {
        Err(Error::Degenerate("trajectories share no common window".into()))
    }
}

fn shared_equation(a: &Trajectory, b: &Trajectory) -> Result<CoefficientSet> {
    a.equation()
        .or(b.equation())
        .cloned()
        .ok_or_else(|| Error::Degenerate("trajectories carry no governing equation".into()))
}

/// Wronskian y1 y2' - y2 y1' multiplied by exp(∫_anchor^t P); constant for
/// solutions of the damped linear equation.
pub fn abel_wronskian(y1: &Trajectory, y2: &Trajectory, c: &CoefficientSet, t: f64) -> Result<f64> {
    Ok(ode::wronskian(y1, y2, t)? / c.abel_factor(t)?)
}

/// rho^2 = A y1^2 + B y2^2 + 2 C y1 y2.
fn quadratic(
    y1: &Trajectory,
    y2: &Trajectory,
    (a, b, c): (f64, f64, f64),
    h2: f64,
    equation: CoefficientSet,
    provenance: Provenance,
) -> Result<PinneySolution> {
    let w = common_window(y1, y2)?;
    let (u, v) = (y1.clone(), y2.clone());
    let mut bps: Vec<f64> = y1.breakpoints().iter().chain(y2.breakpoints()).copied().collect();
    bps.sort_by(f64::total_cmp);
    bps.dedup();
    let curve = Trajectory::analytic(w, move |t| {
        let [p, pd] = u.state(t);
        let [q, qd] = v.state(t);
        let r2 = a * p * p + b * q * q + 2.0 * c * p * q;
        let r = r2.sqrt();
        let rrd = a * p * pd + b * q * qd + c * (pd * q + p * qd);
        [r, rrd / r]
    })
    .with_breakpoints(bps);
    PinneySolution::new(curve, h2, equation, provenance)
}

/// rho = [U^2 - C V^2 / W^2]^{1/2}, solving Pinney's equation with h^2 = -C.
///
/// W is the Abel-normalized Wronskian of (U, V), computed here from the
/// curves themselves.
pub fn pinney_from_linear(u: &Trajectory, v: &Trajectory, c: f64) -> Result<PinneySolution> {
    let eq = shared_equation(u, v)?;
    let t0 = common_window(u, v)?.0;
    let w = abel_wronskian(u, v, &eq, t0)?;
    if w.abs() < 1e-300 {
        return Err(Error::Degenerate("U and V are linearly dependent".into()));
    }
    quadratic(u, v, (1.0, -c / (w * w), 0.0), -c, eq, Provenance::FromLinear)
}

fn check_quadratic_constraint(
    y1: &Trajectory,
    y2: &Trajectory,
    (a, b, c): (f64, f64, f64),
    lambda: f64,
    eq: &CoefficientSet,
) -> Result<()> {
    let t0 = common_window(y1, y2)?.0;
    let w = ode::wronskian(y1, y2, t0)?;
    let rhs = lambda / (w * w) * eq.abel_factor(t0)?.powi(2);
    let lhs = a * b - c * c;
    let scale = (a * b).abs() + (c * c).abs() + rhs.abs();
    let residual = (lhs - rhs).abs() / scale.max(1e-300);
    if residual <= 1e-12 {
        Ok(())
    } else {
        Err(Error::Constraint { what: format!("AB - C^2 = {lhs} but the Wronskian requires {rhs}"), residual })
    }
}

/// rho = (A y1^2 + B y2^2 + 2 C y1 y2)^{1/2} with AB - C^2 = lambda / W^2.
pub fn pinney_general_eg(
    y1: &Trajectory,
    y2: &Trajectory,
    a: f64,
    b: f64,
    c: f64,
    lambda: f64,
) -> Result<PinneySolution> {
    let eq = shared_equation(y1, y2)?;
    check_quadratic_constraint(y1, y2, (a, b, c), lambda, &eq)?;
    quadratic(y1, y2, (a, b, c), lambda, eq, Provenance::GeneralQuadratic)
}

/// Damped version: AB - C^2 = (lambda / W(t0)^2) exp(-2 ∫_anchor^{t0} P).
///
/// By Abel's theorem the right-hand side does not depend on t0, so the
/// check is made at the start of the common window.
pub fn pinney_damped_2eg(
    y1: &Trajectory,
    y2: &Trajectory,
    a: f64,
    b: f64,
    c: f64,
    lambda: f64,
    damping: &ode::Profile,
) -> Result<PinneySolution> {
    let eq = shared_equation(y1, y2)?.with_damping(damping.clone());
    check_quadratic_constraint(y1, y2, (a, b, c), lambda, &eq)?;
    quadratic(y1, y2, (a, b, c), lambda, eq, Provenance::DampedQuadratic)
}

/// rho = (1/W) [I1 x2^2 + I2 x1^2 + 2 x1 x2 (I1 I2 - W^2)^{1/2}]^{1/2}
/// from two linear solutions and two values of the quadratic invariants.
pub fn pinney_from_invariants(x1: &Trajectory, x2: &Trajectory, i1: f64, i2: f64) -> Result<PinneySolution> {
    let eq = shared_equation(x1, x2)?;
    let t0 = common_window(x1, x2)?.0;
    let w = abel_wronskian(x1, x2, &eq, t0)?;
    let w2 = w * w;
    let disc = i1 * i2 - w2;
    if disc < -1e-12 * (i1 * i2).abs().max(w2) {
        return Err(Error::Domain(format!("I1 I2 = {} must be at least W^2 = {w2}", i1 * i2)));
    }
    let root = disc.max(0.0).sqrt();
    quadratic(x1, x2, (i2 / w2, i1 / w2, root / w2), 1.0, eq, Provenance::FromInvariants)
}

struct Phase<F>(F);

impl<F: Fn(f64) -> f64> OdeSystem for Phase<F> {
    fn dim(&self) -> usize {
        2
    }
    fn rhs(&self, t: f64, _y: &[f64], dy: &mut [f64]) {
        dy[0] = (self.0)(t);
        dy[1] = 0.0;
    }
}

/// The auxiliary angle phi with phi' = h exp(-∫P) / rho^2, phi(t0) = 0 at the
/// window start; returned as [phi, phi'].
pub fn auxiliary_phase(rho: &PinneySolution) -> Result<Trajectory> {
    let (a, b) = rho.window();
    let h = rho.h();
    if !(h > 0.0) {
        return Err(Error::Domain(format!("auxiliary phase needs h > 0, got h^2 = {}", rho.h2())));
    }
    let eq = rho.equation().clone();
    let r = rho.clone();
    // exp(-∫P) by quadrature is too slow inside an ODE right-hand side, so
    // it is carried by the Pinney solution's equation only when cheap.
    let rate = {
        let r = r.clone();
        let eq = eq.clone();
        move |t: f64| {
            let e = eq.abel_factor(t).unwrap_or(f64::NAN);
            let rv = r.rho(t);
            h * e / (rv * rv)
        }
    };
    let sol = ode::solve(&Phase(rate.clone()), &[0.0, 0.0], a, b, 1e-13)?;
    let dense = Arc::new(sol);
    let curve = Trajectory::analytic((a, b), move |t| [dense.component(t, 0), rate(t)]);
    Ok(curve.with_breakpoints(rho.curve().breakpoints().to_vec()))
}

/// General solution from a particular one:
/// rho = rho~ [I1 sin^2 phi + I2 cos^2 phi + (I1 I2 - 1)^{1/2} sin 2phi]^{1/2}.
pub fn pinney_from_particular(rho_tilde: &PinneySolution, i1: f64, i2: f64) -> Result<PinneySolution> {
    pinney_from_particular_signed(rho_tilde, i1, i2, Branch::Plus)
}

/// As [`pinney_from_particular`] with a chosen sign of the cross term.
pub fn pinney_from_particular_signed(
    rho_tilde: &PinneySolution,
    i1: f64,
    i2: f64,
    branch: Branch,
) -> Result<PinneySolution> {
    if !(i1 > 0.0 && i2 > 0.0) || i1 * i2 < 1.0 - 1e-12 {
        return Err(Error::Domain(format!("need I1, I2 > 0 and I1 I2 >= 1, got ({i1}, {i2})")));
    }
    let phase = auxiliary_phase(rho_tilde)?;
    let cross = branch.sign() * (i1 * i2 - 1.0).max(0.0).sqrt();
    let base = rho_tilde.clone();
    let curve = Trajectory::analytic(rho_tilde.window(), move |t| {
        let [phi, dphi] = phase.state(t);
        let [r, rd] = base.state(t);
        let (s, c) = phi.sin_cos();
        let (s2, c2) = (2.0 * phi).sin_cos();
        let f = i1 * s * s + i2 * c * c + cross * s2;
        let fd = dphi * ((i1 - i2) * s2 + 2.0 * cross * c2);
        let sf = f.sqrt();
        [r * sf, rd * sf + r * fd / (2.0 * sf)]
    })
    .with_breakpoints(rho_tilde.curve().breakpoints().to_vec());
    PinneySolution::new(curve, rho_tilde.h2(), rho_tilde.equation().clone(), Provenance::FromParticular)
}

/// x1 = rho cos phi, x2 = rho sin phi: two linear solutions whose
/// Wronskian is h exp(-∫P).
pub fn linear_from_pinney(rho: &PinneySolution) -> Result<(Trajectory, Trajectory)> {
    let phase = auxiliary_phase(rho)?;
    let mk = |shift: f64| {
        let (phase, r) = (phase.clone(), rho.clone());
        Trajectory::analytic(rho.window(), move |t| {
            let [phi, dphi] = phase.state(t);
            let [rv, rd] = r.state(t);
            let (s, c) = (phi - shift).sin_cos();
            [rv * c, rd * c - rv * dphi * s]
        })
        .with_breakpoints(rho.curve().breakpoints().to_vec())
        .with_equation(rho.equation().clone())
    };
    Ok((mk(0.0), mk(std::f64::consts::FRAC_PI_2)))
}

/// The combinations of psi1, psi2 meeting x1 = 1, x1' = 0, x2 = 0, x2' = 1 at t0.
pub fn initial_condition_combo(psi1: &Trajectory, psi2: &Trajectory, t0: f64) -> Result<(Trajectory, Trajectory)> {
    let [p1, d1] = psi1.try_state(t0)?;
    let [p2, d2] = psi2.try_state(t0)?;
    let w0 = p1 * d2 - p2 * d1;
    if w0.abs() <= 1e-14 * ((p1 * d2).abs() + (p2 * d1).abs()) || w0 == 0.0 {
        return Err(Error::Degenerate(format!("psi1 and psi2 are dependent at t0 = {t0}")));
    }
    let x1 = Trajectory::combine(d2 / w0, psi1, -d1 / w0, psi2);
    let x2 = Trajectory::combine(-p2 / w0, psi1, p1 / w0, psi2);
    Ok((x1, x2))
}
