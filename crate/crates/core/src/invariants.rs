//! The Ermakov–Lewis invariant and its relatives.
//!
//! With a Pinney amplitude rho of angular momentum h, mass M and Lewis
//! parameter eps, the invariant in canonical variables (q, p = eps M q') is
//!
//! ```text
//!     I = 1/2 [ (eps h q / rho)^2 + (rho p - eps M rho' q)^2 ]
//! ```
//!
//! which equals h^2/2 on the auxiliary planar motion and reduces to the
//! usual 1/2[q^2/rho^2 + (rho p - rho' q)^2] for eps = h = M = 1.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::ode::{Profile, Trajectory};
use crate::pinney::PinneySolution;

/// A point of phase space at a given time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub q: f64,
    pub p: f64,
    pub t: f64,
}

impl PhasePoint {
    pub fn new(q: f64, p: f64, t: f64) -> Result<Self> {
        if q.is_finite() && p.is_finite() && t.is_finite() {
            Ok(PhasePoint { q, p, t })
        } else {
            Err(Error::NonFinite { t })
        }
    }

    /// Canonical point from a trajectory sample, p = eps M q'.
    pub fn on(x: &Trajectory, rho: &PinneySolution, t: f64) -> Result<Self> {
        let [q, qd] = x.try_state(t)?;
        let c = rho.equation();
        Self::new(q, c.epsilon * c.mass(t)? * qd, t)
    }
}

/// The generalized Ermakov–Lewis invariant (see the module docs); eps and
/// the mass come from the equation attached to `rho`.
pub fn ermakov_lewis(pt: PhasePoint, rho: &PinneySolution) -> Result<f64> {
    let c = rho.equation();
    let [r, rd] = rho.curve().try_state(pt.t)?;
    let eh = c.epsilon * rho.h();
    let m = c.mass(pt.t)?;
    let a = eh * pt.q / r;
    let b = r * pt.p - c.epsilon * m * rd * pt.q;
    Ok(0.5 * (a * a + b * b))
}

/// I = h^2 x^2/rho^2 + (rho' x - rho x')^2 exp(2 ∫P), written in terms of
/// the velocity x' (carried in `pt.p`). There is no 1/2 in front; set
/// `normalized` to divide by two for comparison with [`ermakov_lewis`].
pub fn ermakov_lewis_damped(pt: PhasePoint, rho: &PinneySolution, h: f64, normalized: bool) -> Result<f64> {
    let [r, rd] = rho.curve().try_state(pt.t)?;
    let g = 1.0 / rho.equation().abel_factor(pt.t)?;
    let w = rd * pt.q - r * pt.p;
    let v = h * h * pt.q * pt.q / (r * r) + w * w * g * g;
    Ok(if normalized { 0.5 * v } else { v })
}

/// Coupling functions of the two-sided generalization
/// x'' + w2 x = g(rho/x)/(rho x^2), rho'' + w2 rho = f(x/rho)/(x rho^2).
#[derive(Clone, Debug)]
pub struct Coupling {
    pub f: Profile,
    pub g: Profile,
}

impl Coupling {
    /// The Ermakov–Lewis case f(u) = u, g = 0.
    pub fn ermakov() -> Self {
        Coupling { f: Profile::with_primitive(|u| u, |u| 0.5 * u * u), g: Profile::Zero }
    }

    /// phi(u) = 2 ∫_0^u f.
    pub fn phi(&self, u: f64) -> Result<f64> {
        Ok(2.0 * self.f.integral(0.0, u)?)
    }

    /// theta(v) = 2 ∫_1^v g; anchored at 1 so that g may be singular at 0.
    pub fn theta(&self, v: f64) -> Result<f64> {
        Ok(2.0 * self.g.integral(1.0, v)?)
    }
}

/// I_{f,g} = 1/2 [phi(x/rho) + theta(rho/x) + (x rho' - rho x')^2], with
/// each point carrying the value and the velocity.
pub fn ray_reid(x: PhasePoint, rho: PhasePoint, coupling: &Coupling) -> Result<f64> {
    let mut sum = (x.q * rho.p - rho.q * x.p).powi(2);
    if !coupling.f.is_zero() {
        if rho.q == 0.0 {
            return Err(Error::Singular { t: rho.t });
        }
        sum += coupling.phi(x.q / rho.q)?;
    }
    if !coupling.g.is_zero() {
        if x.q == 0.0 {
            return Err(Error::Singular { t: x.t });
        }
        sum += coupling.theta(rho.q / x.q)?;
    }
    Ok(0.5 * sum)
}

/// Noether's conserved quantity
/// 1/2 (xi x'^2 + [xi w2 + xi''/2] x^2 - xi' x x').
pub fn noether_phi(x: f64, xdot: f64, xi: f64, xidot: f64, xiddot: f64, omega2: f64) -> f64 {
    0.5 * (xi * xdot * xdot + (xi * omega2 + 0.5 * xiddot) * x * x - xidot * x * xdot)
}

/// xi xi'' - xi'^2/2 + 2 xi^2 w2; constant along solutions of
/// xi''' + 4 w2 xi' + 2 (w2)' xi = 0. For xi = rho^2 it equals 2 h^2.
pub fn xi_first_integral(xi: f64, xidot: f64, xiddot: f64, omega2: f64) -> f64 {
    xi * xiddot - 0.5 * xidot * xidot + 2.0 * xi * xi * omega2
}

/// (p y' - y p')^2 - phi(y/p) with phi(z) = 2 ∫_0^z f; constant along
/// solutions of p y'' - y p'' = f(y/p)/p^2.
pub fn ermakov2e_integral(y: f64, ydot: f64, p: f64, pdot: f64, f: &Profile) -> Result<f64> {
    if p == 0.0 {
        return Err(Error::Domain("p vanishes".into()));
    }
    Ok((p * ydot - y * pdot).powi(2) - 2.0 * f.integral(0.0, y / p)?)
}

/// Values of a conserved quantity sampled along a run.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantSeries {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl InvariantSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(Error::Domain("series must be nonempty with matching lengths".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("series times must increase strictly".into()));
        }
        Ok(InvariantSeries { times, values })
    }

    /// Samples I_EL of the linear solution `x` at the given times.
    pub fn ermakov_lewis(x: &Trajectory, rho: &PinneySolution, times: &[f64]) -> Result<Self> {
        let values = times
            .iter()
            .map(|&t| ermakov_lewis(PhasePoint::on(x, rho, t)?, rho))
            .collect::<Result<Vec<_>>>()?;
        Self::new(times.to_vec(), values)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn reference(&self) -> f64 {
        self.values[0]
    }
}

/// Deviation of a series from its first value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Drift {
    pub abs: f64,
    /// `None` when the reference value is zero.
    pub rel: Option<f64>,
}

pub fn drift_report(series: &InvariantSeries) -> Drift {
    let r = series.reference();
    let abs = series.values.iter().map(|v| (v - r).abs()).fold(0.0, f64::max);
    Drift { abs, rel: (r != 0.0).then(|| abs / r.abs()) }
}

/// eps h (1/2pi) ∮ p dq around the fixed-time level set I(q, p) = i_claim.
///
/// The ring is traced with eps h q / rho = sqrt(2 I) sin(theta); for each q
/// the momentum is the root of the quadratic I(q, p) = i_claim (evaluated
/// through [`ermakov_lewis`]) on the branch matching the sign of cos(theta).
/// The loop integral uses the trapezoid rule on `n_theta` nodes.
pub fn action_integral_oracle(rho: &PinneySolution, i_claim: f64, t: f64, n_theta: usize) -> Result<f64> {
    if !(i_claim > 0.0) || n_theta < 3 {
        return Err(Error::Domain(format!("need I > 0 and at least 3 nodes, got {i_claim}, {n_theta}")));
    }
    let c = rho.equation();
    let eh = c.epsilon * rho.h();
    let r = rho.curve().try_state(t)?[0];
    let amp = (2.0 * i_claim).sqrt() * r / eh;
    let inv = |q: f64, p: f64| ermakov_lewis(PhasePoint { q, p, t }, rho);
    // Centre of the ring's momentum at each q (the shear of the ellipse) and
    // its half-width; any values work, these keep the probes well scaled.
    let rd = rho.rho_dot(t);
    let pc = |q: f64| c.epsilon * c.mass(t).unwrap_or(1.0) * rd * q / r;
    let width = (2.0 * i_claim).sqrt() / r;
    let mut sum = 0.0;
    for k in 0..n_theta {
        let th = 2.0 * PI * k as f64 / n_theta as f64;
        let (s, co) = th.sin_cos();
        let q = amp * s;
        // I(q, pc + u) = a u^2 + b u + c0, recovered from three evaluations
        // around a probe centre pc on the scale s of the ring's momenta.
        let (i0, ip, im) = (inv(q, pc(q))?, inv(q, pc(q) + width)?, inv(q, pc(q) - width)?);
        let a = (0.5 * (ip + im) - i0) / (width * width);
        let b = 0.5 * (ip - im) / width;
        let disc = (b * b - 4.0 * a * (i0 - i_claim)).max(0.0).sqrt();
        let p = pc(q) + (-b + co.signum() * disc) / (2.0 * a);
        sum += p * amp * co;
    }
    Ok(eh * sum / n_theta as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::CoefficientSet;
    use crate::pinney::{linear_from_pinney, solve_direct};

    fn stationary(w: f64) -> PinneySolution {
        solve_direct(&CoefficientSet::constant(w * w), w.powf(-0.5), 0.0, 1.0, (0.0, 2.0), 1e-12).unwrap()
    }

    #[test]
    fn constant_frequency_is_energy_over_omega() {
        let rho = stationary(1.7);
        let pt = PhasePoint::new(0.3, -0.8, 1.0).unwrap();
        let h = 0.5 * (0.8f64 * 0.8 + 1.7 * 1.7 * 0.09);
        assert!((ermakov_lewis(pt, &rho).unwrap() - h / 1.7).abs() < 1e-12);
        assert_eq!(ermakov_lewis(PhasePoint::new(0.0, 0.0, 1.0).unwrap(), &rho).unwrap(), 0.0);
    }

    #[test]
    fn planar_motion_gives_half_h_squared() {
        let eq = CoefficientSet::new(Profile::from_fn(|t| 2.0 + t.sin()));
        let rho = solve_direct(&eq, 0.9, 0.2, 1.3, (0.0, 4.0), 1e-11).unwrap();
        let (x1, x2) = linear_from_pinney(&rho).unwrap();
        for t in [0.0, 1.1, 3.9] {
            for x in [&x1, &x2] {
                let i = ermakov_lewis(PhasePoint::on(x, &rho, t).unwrap(), &rho).unwrap();
                assert!((i - 0.5 * 1.69).abs() < 1e-9, "{i}");
            }
        }
    }

    #[test]
    fn damped_form_without_damping_is_twice_undamped() {
        let rho = stationary(1.0);
        let pt = PhasePoint::new(0.4, 0.7, 0.5).unwrap();
        let a = ermakov_lewis_damped(pt, &rho, 1.0, false).unwrap();
        let b = ermakov_lewis(pt, &rho).unwrap();
        assert!((a - 2.0 * b).abs() < 1e-14);
        assert!((ermakov_lewis_damped(pt, &rho, 1.0, true).unwrap() - b).abs() < 1e-14);
    }

    #[test]
    fn ray_reid_ermakov_case_matches() {
        let rho = stationary(1.3);
        let t = 0.7;
        let pt = PhasePoint::new(0.4, -0.2, t).unwrap();
        let [r, rd] = rho.state(t);
        let v = ray_reid(pt, PhasePoint::new(r, rd, t).unwrap(), &Coupling::ermakov()).unwrap();
        assert!((v - ermakov_lewis(pt, &rho).unwrap()).abs() < 1e-12);
        let free = Coupling { f: Profile::Zero, g: Profile::Zero };
        let w = ray_reid(pt, PhasePoint::new(r, rd, t).unwrap(), &free).unwrap();
        assert!((w - 0.5 * (0.4 * rd + 0.2 * r).powi(2)).abs() < 1e-15);
    }

    #[test]
    fn noether_reductions() {
        let w = 2.0;
        let (x, xd) = (0.3, 0.5);
        let phi = noether_phi(x, xd, 1.0 / w, 0.0, 0.0, w * w);
        assert!((phi - 0.5 * (xd * xd + w * w * x * x) / w).abs() < 1e-15);
        assert_eq!(noether_phi(0.0, 0.0, 1.0, 2.0, 3.0, 4.0), 0.0);
    }

    #[test]
    fn drift_of_constructed_series() {
        let s = InvariantSeries::new(vec![0.0, 1.0, 2.0], vec![2.0, 2.1, 2.2]).unwrap();
        let d = drift_report(&s);
        assert!((d.abs - 0.2).abs() < 1e-15 && (d.rel.unwrap() - 0.1).abs() < 1e-15);
        let z = InvariantSeries::new(vec![0.0, 1.0], vec![0.0, 0.5]).unwrap();
        assert_eq!(drift_report(&z).rel, None);
        assert!(InvariantSeries::new(vec![1.0, 1.0], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn ring_on_unit_circle() {
        let rho = stationary(1.0);
        let v = action_integral_oracle(&rho, 0.5, 1.0, 512).unwrap();
        assert!((v - 0.5).abs() < 1e-14);
        let v4 = action_integral_oracle(&rho, 2.0, 1.0, 512).unwrap();
        assert!((v4 - 4.0 * v).abs() < 1e-13);
    }
}
