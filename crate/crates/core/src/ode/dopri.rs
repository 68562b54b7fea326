//! Dormand–Prince 5(4) with Hairer's continuous extension.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const MAX_STEPS: usize = 2_000_000;

/// A first-order system y' = f(t, y).
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]);
    /// Rejects states the system cannot continue from.
    fn validate(&self, _t: f64, _y: &[f64]) -> Result<()> {
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Segment {
    t: f64,
    h: f64,
    rc: Vec<f64>,
}

/// Piecewise-quartic dense output of an adaptive run.
#[derive(Debug, Clone)]
pub struct DenseSolution {
    dim: usize,
    times: Vec<f64>,
    segments: Vec<Segment>,
    lo: f64,
    hi: f64,
}

impl DenseSolution {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Step boundaries in increasing order.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn span(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn steps(&self) -> usize {
        self.segments.len()
    }

    fn segment(&self, t: f64) -> &Segment {
        // Segments are stored with increasing left edges min(t, t+h).
        let idx = self
            .segments
            .partition_point(|s| s.t.min(s.t + s.h) <= t)
            .saturating_sub(1);
        &self.segments[idx]
    }

    /// Interpolated component `i` at time t.
    pub fn component(&self, t: f64, i: usize) -> f64 {
        let s = self.segment(t);
        let th = (t - s.t) / s.h;
        let th1 = 1.0 - th;
        let n = self.dim;
        let r = |k: usize| s.rc[k * n + i];
        r(0) + th * (r(1) + th1 * (r(2) + th * (r(3) + th1 * r(4))))
    }

    pub fn state(&self, t: f64) -> Vec<f64> {
        (0..self.dim).map(|i| self.component(t, i)).collect()
    }
}

fn error_norm(y0: &[f64], y1: &[f64], err: &[f64], tol: f64) -> f64 {
    let n = y0.len() as f64;
    let s: f64 = y0
        .iter()
        .zip(y1)
        .zip(err)
        .map(|((a, b), e)| {
            let sk = tol + tol * a.abs().max(b.abs());
            (e / sk).powi(2)
        })
        .sum();
    (s / n).sqrt()
}

fn eval<S: OdeSystem>(sys: &S, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
    sys.rhs(t, y, dy);
    if dy.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { t })
    }
}

struct Stages {
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
}

impl Stages {
    fn new(n: usize) -> Self {
        Stages { k: std::array::from_fn(|_| vec![0.0; n]), tmp: vec![0.0; n] }
    }

    /// One DP5 step from (t, y) with k[0] = f(t, y) already filled.
    /// Writes the fifth-order result into `y1`, k[6] = f(t+h, y1).
    fn step<S: OdeSystem>(&mut self, sys: &S, t: f64, y: &[f64], h: f64, y1: &mut [f64]) -> Result<()> {
        let n = y.len();
        let (k, tmp) = (&mut self.k, &mut self.tmp);
        for i in 0..n {
            tmp[i] = y[i] + h * A21 * k[0][i];
        }
        eval(sys, t + C2 * h, tmp, &mut k[1])?;
        for i in 0..n {
            tmp[i] = y[i] + h * (A31 * k[0][i] + A32 * k[1][i]);
        }
        eval(sys, t + C3 * h, tmp, &mut k[2])?;
        for i in 0..n {
            tmp[i] = y[i] + h * (A41 * k[0][i] + A42 * k[1][i] + A43 * k[2][i]);
        }
        eval(sys, t + C4 * h, tmp, &mut k[3])?;
        for i in 0..n {
            tmp[i] = y[i] + h * (A51 * k[0][i] + A52 * k[1][i] + A53 * k[2][i] + A54 * k[3][i]);
        }
        eval(sys, t + C5 * h, tmp, &mut k[4])?;
        for i in 0..n {
            tmp[i] = y[i]
                + h * (A61 * k[0][i] + A62 * k[1][i] + A63 * k[2][i] + A64 * k[3][i] + A65 * k[4][i]);
        }
        eval(sys, t + h, tmp, &mut k[5])?;
        for i in 0..n {
            y1[i] = y[i]
                + h * (A71 * k[0][i] + A73 * k[2][i] + A74 * k[3][i] + A75 * k[4][i] + A76 * k[5][i]);
        }
        eval(sys, t + h, y1, &mut k[6])?;
        Ok(())
    }

    fn error(&self, h: f64, out: &mut [f64]) {
        let k = &self.k;
        for (i, e) in out.iter_mut().enumerate() {
            *e = h
                * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i]
                    + E7 * k[6][i]);
        }
    }

    fn dense(&self, y: &[f64], y1: &[f64], h: f64) -> Vec<f64> {
        let n = y.len();
        let k = &self.k;
        let mut rc = vec![0.0; 5 * n];
        for i in 0..n {
            let ydiff = y1[i] - y[i];
            let bspl = h * k[0][i] - ydiff;
            rc[i] = y[i];
            rc[n + i] = ydiff;
            rc[2 * n + i] = bspl;
            rc[3 * n + i] = ydiff - h * k[6][i] - bspl;
            rc[4 * n + i] = h
                * (D1 * k[0][i] + D3 * k[2][i] + D4 * k[3][i] + D5 * k[4][i] + D6 * k[5][i]
                    + D7 * k[6][i]);
        }
        rc
    }
}

fn initial_step<S: OdeSystem>(sys: &S, t0: f64, y0: &[f64], f0: &[f64], dir: f64, tol: f64, span: f64) -> Result<f64> {
    let n = y0.len() as f64;
    let sk = |v: f64| tol + tol * v.abs();
    let d0 = (y0.iter().map(|v| (v / sk(*v)).powi(2)).sum::<f64>() / n).sqrt();
    let d1 = (f0.iter().zip(y0).map(|(f, v)| (f / sk(*v)).powi(2)).sum::<f64>() / n).sqrt();
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(span);
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, f)| y + dir * h0 * f).collect();
    let mut f1 = vec![0.0; y0.len()];
    eval(sys, t0 + dir * h0, &y1, &mut f1)?;
    let d2 = (f1.iter().zip(f0).zip(y0).map(|((a, b), v)| ((a - b) / sk(*v)).powi(2)).sum::<f64>() / n)
        .sqrt()
        / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    Ok((100.0 * h0).min(h1).min(span))
}

/// Adaptive integration from t0 to t1 (either direction) with mixed
/// absolute/relative tolerance `tol` per component.
pub fn solve<S: OdeSystem>(sys: &S, y0: &[f64], t0: f64, t1: f64, tol: f64) -> Result<DenseSolution> {
    let n = sys.dim();
    assert_eq!(y0.len(), n, "initial state has wrong dimension");
    if !(t0.is_finite() && t1.is_finite()) || t0 == t1 {
        return Err(Error::Domain(format!("degenerate integration window [{t0}, {t1}]")));
    }
    sys.validate(t0, y0)?;
    let dir = (t1 - t0).signum();
    let span = (t1 - t0).abs();

    let mut st = Stages::new(n);
    let mut y = y0.to_vec();
    let mut y1 = vec![0.0; n];
    let mut err = vec![0.0; n];
    eval(sys, t0, &y, &mut st.k[0])?;
    let mut h = dir * initial_step(sys, t0, &y, &st.k[0].clone(), dir, tol, span)?;
    let mut t = t0;
    let mut times = vec![t0];
    let mut segments = Vec::new();
    let mut last_rejected = false;

    for _ in 0..MAX_STEPS {
        let remaining = t1 - t;
        if remaining.abs() <= 1e-15 * t1.abs().max(1.0) {
            break;
        }
        let last = h.abs() >= remaining.abs();
        if last {
            h = remaining;
        }
        if h.abs() < 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepUnderflow { t });
        }
        match st.step(sys, t, &y, h, &mut y1) {
            Ok(()) => {}
            Err(Error::NonFinite { .. }) => {
                // Treat as a failed step and shrink.
                h *= 0.2;
                last_rejected = true;
                if h.abs() < 1e-14 * t.abs().max(1.0) {
                    return Err(Error::NonFinite { t });
                }
                continue;
            }
            Err(e) => return Err(e),
        }
        st.error(h, &mut err);
        let e = error_norm(&y, &y1, &err, tol);
        let mut fac = if e == 0.0 { 10.0 } else { 0.9 * e.powf(-0.2) };
        if e <= 1.0 {
            fac = fac.clamp(0.2, if last_rejected { 1.0 } else { 10.0 });
            let t_new = if last { t1 } else { t + h };
            sys.validate(t_new, &y1)?;
            segments.push(Segment { t, h, rc: st.dense(&y, &y1, h) });
            y.copy_from_slice(&y1);
            st.k[0] = st.k[6].clone();
            t = t_new;
            times.push(t);
            last_rejected = false;
            if last {
                break;
            }
            h *= fac;
        } else {
            h *= fac.clamp(0.2, 1.0);
            last_rejected = true;
        }
    }
    if t != t1 {
        return Err(Error::NoConvergence(format!("step budget exhausted at t = {t}")));
    }
    if dir < 0.0 {
        times.reverse();
        segments.reverse();
    }
    let (lo, hi) = (t0.min(t1), t0.max(t1));
    Ok(DenseSolution { dim: n, times, segments, lo, hi })
}

/// Fixed-step DP5 run returning the final state; used for order checks.
pub fn solve_fixed<S: OdeSystem>(sys: &S, y0: &[f64], t0: f64, t1: f64, steps: usize) -> Result<Vec<f64>> {
    let n = sys.dim();
    let h = (t1 - t0) / steps as f64;
    let mut st = Stages::new(n);
    let mut y = y0.to_vec();
    let mut y1 = vec![0.0; n];
    eval(sys, t0, &y, &mut st.k[0])?;
    for i in 0..steps {
        let t = t0 + i as f64 * h;
        st.step(sys, t, &y, h, &mut y1)?;
        y.copy_from_slice(&y1);
        st.k[0] = st.k[6].clone();
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Harmonic;
    impl OdeSystem for Harmonic {
        fn dim(&self) -> usize {
            2
        }
        fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
            dy[0] = y[1];
            dy[1] = -y[0];
        }
    }

    #[test]
    fn cosine_quarter_period() {
        let sol = solve(&Harmonic, &[1.0, 0.0], 0.0, std::f64::consts::FRAC_PI_2, 1e-10).unwrap();
        assert!(sol.component(std::f64::consts::FRAC_PI_2, 0).abs() < 1e-9);
    }

    #[test]
    fn dense_output_between_nodes() {
        let sol = solve(&Harmonic, &[1.0, 0.0], 0.0, 10.0, 1e-10).unwrap();
        for i in 0..1000 {
            let t = i as f64 * 0.01 + 0.0037;
            assert!((sol.component(t, 0) - t.cos()).abs() < 1e-8, "t={t}");
        }
    }

    #[test]
    fn backward_run_is_sorted() {
        let sol = solve(&Harmonic, &[1.0, 0.0], 3.0, -2.0, 1e-9).unwrap();
        assert!(sol.times().windows(2).all(|w| w[0] < w[1]));
        assert_eq!(sol.span(), (-2.0, 3.0));
        let t = -1.3;
        assert!((sol.component(t, 0) - (t - 3.0f64).cos()).abs() < 1e-7);
    }

    #[test]
    fn fixed_step_is_fifth_order() {
        let exact = 5.0f64.cos();
        let err = |n| (solve_fixed(&Harmonic, &[1.0, 0.0], 0.0, 5.0, n).unwrap()[0] - exact).abs();
        let (e1, e2) = (err(100), err(200));
        assert!(e1 / e2 > 20.0, "ratio {}", e1 / e2);
    }
}
