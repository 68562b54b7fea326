//! Quantum side of the invariant.
//!
//! Conventions: H = (1/2eps)(p^2 + W2 q^2) with Lewis's squared frequency W2,
//! [a, a+] = hbar, and the invariant
//! I = 1/2 [q^2/rho^2 + (rho p - eps rho' q)^2] whose eigenvalues are
//! (n + 1/2) hbar. The ladder operators are
//! a = 2^{-1/2} [q/rho + i (rho p - eps rho' q)].

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pinney::PinneySolution;
use crate::quad::{integrate_pieces, QuadTol};
use crate::specfun::{gauss_hermite, hermite, MAX_HERMITE_DEGREE};

/// Level n of the invariant, in units with the given hbar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenState {
    pub n: u32,
    pub hbar: f64,
}

impl EigenState {
    pub fn new(n: u32, hbar: f64) -> Result<Self> {
        if hbar > 0.0 && (n as usize) <= MAX_HERMITE_DEGREE {
            Ok(EigenState { n, hbar })
        } else {
            Err(Error::Domain(format!("need hbar > 0 and n <= {MAX_HERMITE_DEGREE}, got ({n}, {hbar})")))
        }
    }

    fn level(&self) -> f64 {
        self.n as f64 + 0.5
    }
}

/// Instantaneous amplitude data entering the eigenstates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amplitude {
    pub rho: f64,
    pub rho_dot: f64,
    pub eps: f64,
}

impl Amplitude {
    pub fn new(rho: f64, rho_dot: f64, eps: f64) -> Result<Self> {
        if rho > 0.0 && rho_dot.is_finite() && eps > 0.0 {
            Ok(Amplitude { rho, rho_dot, eps })
        } else {
            Err(Error::Domain(format!("need rho > 0, eps > 0, got rho = {rho}, eps = {eps}")))
        }
    }
}

pub fn eigenvalue(state: EigenState) -> f64 {
    state.level() * state.hbar
}

/// psi_n(q) = (pi hbar)^{-1/4} (2^n n!)^{-1/2} rho^{-1/2}
///            exp(i eps rho' q^2 / (2 hbar rho)) exp(-q^2 / (2 hbar rho^2)) H_n(q / (sqrt(hbar) rho)).
pub fn eigenfunction(state: EigenState, q: f64, amp: Amplitude) -> Complex64 {
    let Amplitude { rho, rho_dot, eps } = amp;
    let hb = state.hbar;
    let n = state.n as usize;
    let log_fact: f64 = (1..=n).map(|k| (k as f64).ln()).sum();
    let log_norm = -0.25 * (std::f64::consts::PI * hb).ln() - 0.5 * (n as f64 * 2f64.ln() + log_fact)
        - 0.5 * rho.ln();
    let x = q / (hb.sqrt() * rho);
    let modulus = (log_norm - 0.5 * x * x).exp() * hermite(n, x);
    Complex64::from_polar(modulus, eps * rho_dot * q * q / (2.0 * hb * rho))
}

/// Orthonormal Hermite functions h_k(x) = H_k(x) / sqrt(2^k k! sqrt(pi)), k = 0..=n.
fn hermite_orthonormal(n: usize, x: f64) -> Vec<f64> {
    let mut h = Vec::with_capacity(n + 1);
    h.push(std::f64::consts::PI.powf(-0.25));
    if n >= 1 {
        h.push(2f64.sqrt() * x * h[0]);
    }
    for k in 1..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * h[k] - (kf / (kf + 1.0)).sqrt() * h[k - 1];
        h.push(next);
    }
    h
}

/// psi_n and psi_n'' stripped of the common factor exp(-x^2/2), as functions
/// of x = q / (sqrt(hbar) rho); differentiated analytically.
fn psi_and_second(n: usize, x: f64, amp: Amplitude, hb: f64) -> (Complex64, Complex64) {
    let Amplitude { rho, rho_dot, eps } = amp;
    let s = 1.0 / (hb.sqrt() * rho);
    let q = x / s;
    let h = hermite_orthonormal(n, x);
    let hn = h[n];
    let d1 = if n >= 1 { (2.0 * n as f64).sqrt() * h[n - 1] } else { 0.0 };
    let d2 = if n >= 2 { (4.0 * (n * (n - 1)) as f64).sqrt() * h[n - 2] } else { 0.0 };
    // psi = N h_n(x) e^{g(q)}, g = -q^2/(2 hbar rho^2) + i eps rho' q^2/(2 hbar rho); g' = c q.
    let c = Complex64::new(-1.0 / (hb * rho * rho), eps * rho_dot / (hb * rho));
    let gp = c * q;
    let phase = Complex64::from_polar((s).sqrt(), eps * rho_dot * q * q / (2.0 * hb * rho));
    let psi = phase * hn;
    let psi2 = phase * (s * s * d2 + 2.0 * s * gp * d1 + (gp * gp + c) * hn);
    (psi, psi2)
}

/// <psi_m | H | psi_n> by Gauss–Hermite quadrature with `rule_size` nodes.
pub fn matrix_element_h(
    m: u32,
    n: u32,
    hbar: f64,
    amp: Amplitude,
    omega2: f64,
    rule_size: usize,
) -> Result<Complex64> {
    let rule = gauss_hermite(rule_size)?;
    let s = 1.0 / (hbar.sqrt() * amp.rho);
    let mut acc = Complex64::new(0.0, 0.0);
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let (pm, _) = psi_and_second(m as usize, x, amp, hbar);
        let (pn, pn2) = psi_and_second(n as usize, x, amp, hbar);
        let q = x / s;
        let hpsi = (-hbar * hbar * pn2 + omega2 * q * q * pn) / (2.0 * amp.eps);
        acc += w * pm.conj() * hpsi;
    }
    // dq = dx / s; the exp(-x^2) weight is supplied by the rule.
    Ok(acc / s)
}

/// <psi_m | psi_n> by Gauss–Hermite quadrature.
pub fn overlap(m: u32, n: u32, hbar: f64, amp: Amplitude, rule_size: usize) -> Result<Complex64> {
    let rule = gauss_hermite(rule_size)?;
    let s = 1.0 / (hbar.sqrt() * amp.rho);
    let mut acc = Complex64::new(0.0, 0.0);
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let (pm, _) = psi_and_second(m as usize, x, amp, hbar);
        let (pn, _) = psi_and_second(n as usize, x, amp, hbar);
        acc += w * pm.conj() * pn;
    }
    Ok(acc / s)
}

/// (1/2eps)(rho^{-2} + W2 rho^2 + eps^2 rho'^2)(n + 1/2) hbar.
pub fn expectation_h_closed(state: EigenState, amp: Amplitude, omega2: f64) -> f64 {
    let Amplitude { rho, rho_dot, eps } = amp;
    (1.0 / rho.powi(2) + omega2 * rho * rho + eps * eps * rho_dot * rho_dot) * state.level() * state.hbar
        / (2.0 * eps)
}

/// <psi_n | H | psi_n> by quadrature; the rule must have at least n + 8
/// nodes, and the value is cross-checked against a rule of twice the size.
pub fn expectation_h_quadrature(state: EigenState, amp: Amplitude, omega2: f64, rule_size: usize) -> Result<f64> {
    if rule_size < state.n as usize + 8 {
        return Err(Error::Domain(format!("rule of {rule_size} nodes is too small for level {}", state.n)));
    }
    let v = matrix_element_h(state.n, state.n, state.hbar, amp, omega2, rule_size)?;
    let check = matrix_element_h(state.n, state.n, state.hbar, amp, omega2, (2 * rule_size).min(128))?;
    let gap = (v - check).norm() / v.norm().max(1e-300);
    if gap > 1e-10 {
        return Err(Error::NoConvergence(format!("expectation unstable under rule doubling: {gap}")));
    }
    Ok(v.re)
}

/// f = (1/4eps)(eps^2 rho'^2 + 2i eps rho'/rho - 1/rho^2 + W2 rho^2), the
/// coefficient of a+^2 in H.
pub fn raising_coefficient(amp: Amplitude, omega2: f64) -> Complex64 {
    let Amplitude { rho, rho_dot, eps } = amp;
    Complex64::new(eps * eps * rho_dot * rho_dot - 1.0 / (rho * rho) + omega2 * rho * rho, 2.0 * eps * rho_dot / rho)
        / (4.0 * eps)
}

/// <n+2 | H | n> = f hbar sqrt((n+1)(n+2)).
pub fn off_diagonal_h_closed(state: EigenState, amp: Amplitude, omega2: f64) -> Complex64 {
    let n = state.n as f64;
    raising_coefficient(amp, omega2) * state.hbar * ((n + 1.0) * (n + 2.0)).sqrt()
}

/// -1/2 (n + 1/2) ∫ (rho rho'' - rho'^2) over `window`, with rho'' from the
/// Pinney equation.
pub fn quantum_geometric_phase(state: EigenState, rho: &PinneySolution, window: (f64, f64)) -> Result<f64> {
    for t in [window.0, window.1] {
        rho.curve().try_state(t)?;
    }
    let v = integrate_pieces(
        |t| {
            let [r, rd] = rho.state(t);
            r * rho.rho_ddot(t).unwrap_or(f64::NAN) - rd * rd
        },
        window.0,
        window.1,
        rho.curve().breakpoints(),
        QuadTol::default(),
    )?;
    if !v.is_finite() {
        return Err(Error::NonFinite { t: window.1 });
    }
    Ok(-0.5 * state.level() * v)
}

/// Cyclic form (n + 1/2) ∮ rho' d rho over one period from the window start.
pub fn quantum_geometric_phase_cyclic(state: EigenState, rho: &PinneySolution, period: f64) -> Result<f64> {
    Ok(-state.level() * crate::angles::hannay_cyclic(rho, period)?)
}

/// Bogoliubov coefficients relating the invariant's ladder to that of a
/// reference oscillator of frequency omega0, with the implied uncertainties.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeCoeffs {
    pub mu: Complex64,
    pub nu: Complex64,
    pub omega0: f64,
    pub qc: f64,
    pub hbar: f64,
}

impl SqueezeCoeffs {
    pub fn unitarity_defect(&self) -> f64 {
        self.mu.norm_sqr() - self.nu.norm_sqr() - 1.0
    }

    /// (Δq)^2 = (hbar / 2 omega0) |mu - nu|^2.
    pub fn var_q(&self) -> f64 {
        self.hbar / (2.0 * self.omega0) * (self.mu - self.nu).norm_sqr()
    }

    /// (Δp)^2 = (hbar omega0 / 2) |mu + nu|^2.
    pub fn var_p(&self) -> f64 {
        0.5 * self.hbar * self.omega0 * (self.mu + self.nu).norm_sqr()
    }

    pub fn uncertainty_product(&self) -> f64 {
        (self.var_q() * self.var_p()).sqrt()
    }
}

/// mu, nu = (4 omega0)^{-1/2} [1/rho - i exp(Qc T) rho' ± omega0 rho] at
/// time T.
pub fn squeeze_coeffs(rho: f64, rho_dot: f64, omega0: f64, qc: f64, time: f64, hbar: f64) -> Result<SqueezeCoeffs> {
    if !(rho > 0.0 && omega0 > 0.0 && hbar > 0.0) {
        return Err(Error::Domain(format!("need rho, omega0, hbar > 0, got ({rho}, {omega0}, {hbar})")));
    }
    let k = (4.0 * omega0).sqrt().recip();
    let im = -(qc * time).exp() * rho_dot;
    let mu = Complex64::new(1.0 / rho + omega0 * rho, im) * k;
    let nu = Complex64::new(1.0 / rho - omega0 * rho, im) * k;
    Ok(SqueezeCoeffs { mu, nu, omega0, qc, hbar })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn amp(r: f64, rd: f64) -> Amplitude {
        Amplitude::new(r, rd, 1.0).unwrap()
    }

    #[test]
    fn ladder() {
        assert_eq!(eigenvalue(EigenState::new(0, 1.0).unwrap()), 0.5);
        assert_eq!(eigenvalue(EigenState::new(3, 1.0).unwrap()), 3.5);
        assert!(EigenState::new(1, 0.0).is_err());
    }

    #[test]
    fn harmonic_limit() {
        let w2: f64 = 2.25;
        let a = amp(w2.powf(-0.25), 0.0);
        for n in 0..4 {
            let s = EigenState::new(n, 1.0).unwrap();
            assert!((expectation_h_closed(s, a, w2) - 1.5 * (n as f64 + 0.5)).abs() < 1e-14);
        }
        assert_eq!(expectation_h_closed(EigenState::new(0, 1.0).unwrap(), amp(1.0, 0.0), 1.0), 0.5);
    }

    #[test]
    fn ground_state_is_gaussian() {
        let s = EigenState::new(0, 1.0).unwrap();
        let v = eigenfunction(s, 0.7, amp(1.0, 0.0));
        let want = std::f64::consts::PI.powf(-0.25) * (-0.245f64).exp();
        assert!((v.re - want).abs() < 1e-15 && v.im == 0.0);
    }

    #[test]
    fn ground_state_is_annihilated() {
        // a psi_0 = 0 with a = [q/rho + i(rho p - eps rho' q)] / sqrt 2, p = -i hbar d/dq.
        let (r, rd, hb, eps) = (1.3, 0.4, 0.7, 0.5);
        let a = Amplitude::new(r, rd, eps).unwrap();
        let s = EigenState::new(0, hb).unwrap();
        let q = 0.35;
        let d = 1e-6;
        let dpsi = (eigenfunction(s, q + d, a) - eigenfunction(s, q - d, a)) / (2.0 * d);
        let psi = eigenfunction(s, q, a);
        let i = Complex64::i();
        let out = psi * (q / r) + i * (r * (-i * hb) * dpsi - psi * (eps * rd * q));
        assert!(out.norm() < 1e-8, "{out}");
    }

    #[test]
    fn quadrature_matches_closed_form() {
        let a = Amplitude::new(0.8, -0.3, 1.0).unwrap();
        for n in 0..6 {
            let s = EigenState::new(n, 1.0).unwrap();
            let q = expectation_h_quadrature(s, a, 1.7, 40).unwrap();
            let c = expectation_h_closed(s, a, 1.7);
            assert!(((q - c) / c).abs() < 1e-12, "{n}: {q} vs {c}");
        }
        assert!(expectation_h_quadrature(EigenState::new(5, 1.0).unwrap(), a, 1.7, 10).is_err());
    }

    #[test]
    fn raising_element_structure() {
        let a = Amplitude::new(1.1, 0.25, 0.9).unwrap();
        let w2 = 1.4;
        for n in 0..4 {
            let s = EigenState::new(n, 0.8).unwrap();
            let el = matrix_element_h(n + 2, n, 0.8, a, w2, 40).unwrap();
            assert!((el - off_diagonal_h_closed(s, a, w2)).norm() < 1e-12);
            assert!(matrix_element_h(n + 1, n, 0.8, a, w2, 40).unwrap().norm() < 1e-12);
            assert!(matrix_element_h(n + 3, n, 0.8, a, w2, 40).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn squeeze_unitarity_and_coherent_limit() {
        let s = squeeze_coeffs(0.6, 1.3, 2.0, 0.5, 0.4, 1.0).unwrap();
        assert!(s.unitarity_defect().abs() < 1e-14);
        let c = squeeze_coeffs(0.5f64.sqrt(), 0.0, 2.0, 0.0, 0.0, 1.0).unwrap();
        assert!(c.nu.norm() < 1e-15);
        assert!((c.uncertainty_product() - 0.5).abs() < 1e-15);
        assert!(s.uncertainty_product() > 0.5);
    }

    #[test]
    fn minimum_uncertainty_is_stationary_amplitude() {
        // Delta q Delta p = (hbar/2) sqrt(1 + rho^2 rho'^2): minimal iff rho' = 0,
        // which does not force nu = 0.
        let s = squeeze_coeffs(2.0, 0.0, 1.0, 0.0, 0.0, 1.0).unwrap();
        assert!((s.uncertainty_product() - 0.5).abs() < 1e-15);
        assert!(s.nu.norm() > 0.5);
        let g = squeeze_coeffs(0.7, 0.3, 1.5, 0.2, 0.9, 1.0).unwrap();
        let m = 0.18f64.exp();
        let want = 0.5 * (1.0 + (0.7 * 0.3 * m).powi(2)).sqrt();
        assert!((g.uncertainty_product() - want).abs() < 1e-14);
    }
}
