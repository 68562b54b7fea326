use std::fmt;
use std::sync::Arc;

use super::{CoefficientSet, DenseSolution};
use crate::error::{Error, Result};

type StateFn = Arc<dyn Fn(f64) -> [f64; 2] + Send + Sync>;

#[derive(Clone)]
enum Curve {
    Dense(Arc<DenseSolution>),
    Stitched { left: Box<Trajectory>, right: Box<Trajectory>, at: f64 },
    Analytic(StateFn),
}

/// A solution curve (value, first derivative) on a closed window.
///
/// Either the dense output of an integration run or a closed form; cheap
/// to clone and immutable once built.
#[derive(Clone)]
pub struct Trajectory {
    curve: Curve,
    window: (f64, f64),
    times: Arc<Vec<f64>>,
    breaks: Arc<Vec<f64>>,
    equation: Option<Arc<CoefficientSet>>,
}

impl fmt::Debug for Trajectory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.curve {
            Curve::Dense(_) => "dense",
            Curve::Stitched { .. } => "stitched",
            Curve::Analytic(_) => "analytic",
        };
        write!(f, "Trajectory({kind}, [{}, {}], {} nodes)", self.window.0, self.window.1, self.times.len())
    }
}

/// Relative slack allowed when evaluating at the window edges.
const EDGE_SLACK: f64 = 1e-9;

/// Sample count used as the node set of closed-form curves.
pub const ANALYTIC_NODES: usize = 201;

impl Trajectory {
    pub(crate) fn dense(sol: DenseSolution) -> Self {
        let window = sol.span();
        let times = Arc::new(sol.times().to_vec());
        Trajectory { curve: Curve::Dense(Arc::new(sol)), window, breaks: times.clone(), times, equation: None }
    }

    pub(crate) fn stitch(left: Trajectory, right: Trajectory, at: f64) -> Self {
        let window = (left.window.0, right.window.1);
        let mut times: Vec<f64> = left.times.iter().copied().filter(|&t| t < at).collect();
        times.extend(right.times.iter().copied().filter(|&t| t >= at));
        let equation = left.equation.clone();
        let times = Arc::new(times);
        Trajectory { curve: Curve::Stitched { left: Box::new(left), right: Box::new(right), at }, window, breaks: times.clone(), times, equation }
    }

    /// Closed-form curve t -> [value, derivative] on `window`.
    pub fn analytic(window: (f64, f64), f: impl Fn(f64) -> [f64; 2] + Send + Sync + 'static) -> Self {
        let (lo, hi) = (window.0.min(window.1), window.0.max(window.1));
        let n = ANALYTIC_NODES;
        let times = (0..n)
            .map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
            .collect();
        Trajectory {
            curve: Curve::Analytic(Arc::new(f)),
            window: (lo, hi),
            times: Arc::new(times),
            breaks: Arc::new(Vec::new()),
            equation: None,
        }
    }

    /// Attaches the linear equation this curve solves.
    pub fn with_equation(mut self, c: CoefficientSet) -> Self {
        self.equation = Some(Arc::new(c));
        self
    }

    pub fn equation(&self) -> Option<&CoefficientSet> {
        self.equation.as_deref()
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    /// Node times: integrator steps, or a uniform grid for closed forms.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Points where the interpolant may lose smoothness (step boundaries).
    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    /// Declares the breakpoints of a closed form built from other curves.
    pub fn with_breakpoints(mut self, breaks: Vec<f64>) -> Self {
        self.breaks = Arc::new(breaks);
        self
    }

    pub fn contains(&self, t: f64) -> bool {
        let (lo, hi) = self.window;
        let slack = EDGE_SLACK * (hi - lo).abs().max(1.0);
        t >= lo - slack && t <= hi + slack
    }

    /// [value, derivative] at t. Inside the window (plus a hair of slack)
    /// this is the interpolant; farther out it extrapolates, so callers that
    /// care should use [`Trajectory::try_state`].
    pub fn state(&self, t: f64) -> [f64; 2] {
        match &self.curve {
            Curve::Dense(sol) => [sol.component(t, 0), sol.component(t, 1)],
            Curve::Stitched { left, right, at } => {
                if t < *at {
                    left.state(t)
                } else {
                    right.state(t)
                }
            }
            Curve::Analytic(f) => f(t),
        }
    }

    pub fn try_state(&self, t: f64) -> Result<[f64; 2]> {
        if self.contains(t) {
            Ok(self.state(t))
        } else {
            Err(Error::OutOfWindow { t, lo: self.window.0, hi: self.window.1 })
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.state(t)[0]
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.state(t)[1]
    }

    /// a·x + b·y on the intersection of the two windows.
    pub fn combine(a: f64, x: &Trajectory, b: f64, y: &Trajectory) -> Trajectory {
        let (xc, yc) = (x.clone(), y.clone());
        let window = (x.window.0.max(y.window.0), x.window.1.min(y.window.1));
        let mut out = Trajectory::analytic(window, move |t| {
            let (u, v) = (xc.state(t), yc.state(t));
            [a * u[0] + b * v[0], a * u[1] + b * v[1]]
        });
        let mut bps: Vec<f64> = x.breakpoints().iter().chain(y.breakpoints()).copied().collect();
        bps.sort_by(f64::total_cmp);
        bps.dedup();
        out.breaks = Arc::new(bps);
        out.equation = x.equation.clone().or_else(|| y.equation.clone());
        out
    }
}
