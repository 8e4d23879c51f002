//! Fixed-step method-of-steps integration of the delayed mass-action
//! dynamics with cubic Hermite dense output.

use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::field::delayed_field;
use crate::history::HistoryFunction;
use crate::network::{monomial, Network};
use crate::rational::{self, Rational};
use crate::segment::Segment;

/// Step used when none is requested.
pub const DEFAULT_STEP: f64 = 0.001;
/// Every positive delay spans at least this many steps.
pub const MIN_STEPS_PER_DELAY: u32 = 10;

/// The step actually used and the number of steps spanned by each reaction
/// delay.
#[derive(Clone, Debug, PartialEq)]
pub struct StepPlan {
    pub step: f64,
    pub delay_steps: Vec<usize>,
}

/// Shrinks `requested` so that it divides the rational gcd of the positive
/// delays and is at most a tenth of the smallest one.
pub fn plan_step(net: &Network, requested: f64) -> Result<StepPlan> {
    if !(requested.is_finite() && requested > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {requested}")));
    }
    let delays = net.delays();
    let positive: Vec<&Rational> = delays.iter().filter(|d| !d.is_zero()).collect();
    let Some(g) = rational::gcd_all(positive.iter().copied()) else {
        return Ok(StepPlan {
            step: requested,
            delay_steps: vec![0; delays.len()],
        });
    };
    let tau_min = positive.iter().map(|d| rational::to_f64(d)).fold(f64::INFINITY, f64::min);
    let cap = requested.min(tau_min / MIN_STEPS_PER_DELAY as f64);
    let g_f = rational::to_f64(&g);
    let per_gcd = ((g_f / cap) - 1e-9).ceil().max(1.0) as u64;
    let delay_steps = delays
        .iter()
        .map(|d| {
            let units = d / &g;
            debug_assert!(units.is_integer());
            (units.to_integer() * per_gcd).to_usize().expect("delay step count fits in usize")
        })
        .collect();
    Ok(StepPlan {
        step: g_f / per_gcd as f64,
        delay_steps,
    })
}

/// Right-hand side terms grouped by delay.
struct Rhs {
    /// Distinct delay step counts.
    lags: Vec<usize>,
    /// `(lag index, exponents, coefficient)`.
    terms: Vec<(usize, Vec<i32>, Vec<f64>)>,
    dim: usize,
}

impl Rhs {
    fn new(net: &Network, plan: &StepPlan) -> Self {
        let step_of = |delay: &Rational| -> usize {
            if delay.is_zero() {
                return 0;
            }
            net.reactions()
                .iter()
                .zip(&plan.delay_steps)
                .find(|(r, _)| &r.delay == delay)
                .map(|(_, &m)| m)
                .expect("field delays come from reactions")
        };
        let field = delayed_field(net);
        let mut lags: Vec<usize> = Vec::new();
        let mut terms = Vec::new();
        for (key, coefficient) in field.terms() {
            let m = step_of(&key.delay);
            let lag = match lags.iter().position(|&l| l == m) {
                Some(p) => p,
                None => {
                    lags.push(m);
                    lags.len() - 1
                }
            };
            let exponents = key.exponents.exponents().expect("integral reactant");
            terms.push((lag, exponents, coefficient.iter().map(rational::to_f64).collect()));
        }
        Self {
            lags,
            terms,
            dim: net.species_count(),
        }
    }

    /// `delayed[l]` is the state lagged by `lags[l]` steps.
    fn eval(&self, delayed: &[Vec<f64>], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (lag, e, c) in &self.terms {
            let m = monomial(&delayed[*lag], e);
            for (o, ci) in out.iter_mut().zip(c) {
                *o += m * ci;
            }
        }
    }
}

/// Cubic Hermite interpolant on `[0, h]` at fraction `c`.
pub fn hermite(x0: &[f64], f0: &[f64], x1: &[f64], f1: &[f64], h: f64, c: f64) -> Vec<f64> {
    let c2 = c * c;
    let c3 = c2 * c;
    let h00 = 2.0 * c3 - 3.0 * c2 + 1.0;
    let h10 = c3 - 2.0 * c2 + c;
    let h01 = -2.0 * c3 + 3.0 * c2;
    let h11 = c3 - c2;
    (0..x0.len())
        .map(|j| h00 * x0[j] + h10 * h * f0[j] + h01 * x1[j] + h11 * h * f1[j])
        .collect()
}

/// A computed solution on `[-tau_max, t_end]`.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub species: Vec<String>,
    pub step: f64,
    pub tau_max: f64,
    /// The requested end time.
    pub horizon: f64,
    /// `grid[k] = k * step`; the last point may exceed the requested end by
    /// less than one step.
    pub grid: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub derivatives: Vec<Vec<f64>>,
    pub history: HistoryFunction,
}

/// Integrates `net` from `history` up to `t_end` with RK4 on the planned
/// step. Aborts if a state leaves the positive orthant.
pub fn simulate(net: &Network, history: &HistoryFunction, t_end: f64, step: f64) -> Result<Trajectory> {
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(Error::InvalidArgument(format!("t_end must be non-negative, got {t_end}")));
    }
    let tau_max = net.max_delay();
    history.validate(net.species_count(), tau_max)?;
    let plan = plan_step(net, step)?;
    let h = plan.step;
    let rhs = Rhs::new(net, &plan);
    let n_steps = if t_end == 0.0 { 0 } else { (t_end / h - 1e-9).ceil() as usize };

    let mut traj = Trajectory {
        species: net.species().to_vec(),
        step: h,
        tau_max,
        horizon: t_end,
        grid: Vec::with_capacity(n_steps + 1),
        states: Vec::with_capacity(n_steps + 1),
        derivatives: Vec::with_capacity(n_steps + 1),
        history: history.clone(),
    };
    traj.grid.push(0.0);
    traj.states.push(history.eval(0.0));

    let dim = rhs.dim;
    let mut delayed = vec![vec![0.0; dim]; rhs.lags.len()];
    let mut k = [vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]];
    let mut stage = vec![0.0; dim];

    let first = traj.derivative_at(0, &rhs, &mut delayed)?;
    traj.derivatives.push(first);
    for n in 0..n_steps {
        let x = traj.states[n].clone();
        k[0].copy_from_slice(&traj.derivatives[n]);
        for (s, (c, w)) in [(0.5, 0.5), (0.5, 0.5), (1.0, 1.0)].into_iter().enumerate() {
            for j in 0..dim {
                stage[j] = x[j] + w * h * k[s][j];
            }
            traj.fill_delayed(n, c, &stage, &rhs, &mut delayed);
            rhs.eval(&delayed, &mut k[s + 1]);
        }
        let next: Vec<f64> = (0..dim)
            .map(|j| x[j] + h / 6.0 * (k[0][j] + 2.0 * k[1][j] + 2.0 * k[2][j] + k[3][j]))
            .collect();
        let t = (n + 1) as f64 * h;
        check_state(t, &next)?;
        traj.grid.push(t);
        traj.states.push(next);
        let f = traj.derivative_at(n + 1, &rhs, &mut delayed)?;
        traj.derivatives.push(f);
    }
    Ok(traj)
}

fn check_state(t: f64, x: &[f64]) -> Result<()> {
    for (j, &v) in x.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite(t));
        }
        if v <= 0.0 {
            return Err(Error::PositivityLost {
                time: t,
                species: j,
                value: v,
            });
        }
    }
    Ok(())
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.species.len()
    }

    pub fn t_end(&self) -> f64 {
        *self.grid.last().expect("grid holds t = 0")
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("grid holds t = 0")
    }

    /// `x(t)`: the history for `t < 0`, stored states at grid points, cubic
    /// Hermite in between.
    pub fn lookup(&self, t: f64) -> Result<Vec<f64>> {
        let lo = -self.tau_max;
        let hi = self.t_end();
        let slack = 1e-12 * (1.0 + hi.abs().max(lo.abs()));
        if !(t >= lo - slack && t <= hi + slack) {
            return Err(Error::OutOfRange { t, lo, hi });
        }
        Ok(self.eval(t.min(hi)))
    }

    fn eval(&self, t: f64) -> Vec<f64> {
        if t < 0.0 {
            return self.history.eval(t);
        }
        let last = self.grid.len() - 1;
        let r = (t / self.step).round() as usize;
        if r <= last && self.grid[r] == t {
            return self.states[r].clone();
        }
        if last == 0 {
            return self.states[0].clone();
        }
        let k = ((t / self.step).floor() as usize).min(last - 1);
        let c = (t - self.grid[k]) / self.step;
        self.interpolate(k, c)
    }

    fn interpolate(&self, k: usize, c: f64) -> Vec<f64> {
        if c == 0.0 {
            return self.states[k].clone();
        }
        if c == 1.0 {
            return self.states[k + 1].clone();
        }
        hermite(
            &self.states[k],
            &self.derivatives[k],
            &self.states[k + 1],
            &self.derivatives[k + 1],
            self.step,
            c,
        )
    }

    /// Delayed states for the stage at `t_n + c h`; zero lags take `current`.
    fn fill_delayed(&self, n: usize, c: f64, current: &[f64], rhs: &Rhs, out: &mut [Vec<f64>]) {
        for (slot, &m) in out.iter_mut().zip(&rhs.lags) {
            if m == 0 {
                slot.copy_from_slice(current);
            } else if n >= m {
                *slot = self.interpolate(n - m, c);
            } else {
                let t = ((n as f64 - m as f64) + c) * self.step;
                *slot = self.history.eval(t.min(0.0));
            }
        }
    }

    fn derivative_at(&self, n: usize, rhs: &Rhs, delayed: &mut [Vec<f64>]) -> Result<Vec<f64>> {
        let x = self.states[n].clone();
        self.fill_delayed(n, 0.0, &x, rhs, delayed);
        let mut f = vec![0.0; rhs.dim];
        rhs.eval(delayed, &mut f);
        if f.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(self.grid[n]));
        }
        Ok(f)
    }

    /// Sample times `0, dt, 2 dt, ...` not beyond the requested end time.
    pub fn sample_times(&self, dt: f64) -> Vec<f64> {
        let end = self.horizon.min(self.t_end());
        let count = (end / dt + 1e-9).floor() as usize;
        (0..=count).map(|k| k as f64 * dt).collect()
    }

    /// The segment `x_t(s) = x(t + s)`, `s in [-tau_max, 0]`.
    pub fn window(&self, t: f64) -> Result<TrajectoryWindow<'_>> {
        self.lookup(t)?;
        Ok(TrajectoryWindow { traj: self, t })
    }
}

/// `x_t`, as consumed by the functionals.
#[derive(Clone, Copy, Debug)]
pub struct TrajectoryWindow<'a> {
    traj: &'a Trajectory,
    t: f64,
}

impl TrajectoryWindow<'_> {
    pub fn time(&self) -> f64 {
        self.t
    }
}

impl Segment for TrajectoryWindow<'_> {
    fn dim(&self) -> usize {
        self.traj.dim()
    }

    fn value(&self, s: f64) -> Vec<f64> {
        self.traj.eval((self.t + s).min(self.traj.t_end()))
    }

    /// Splits at `t = 0` and at grid times; Simpson on each grid piece.
    fn integrate(&self, lo: f64, hi: f64, g: &dyn Fn(&[f64]) -> f64) -> f64 {
        let (a, b) = (self.t + lo, self.t + hi);
        if b <= a {
            return 0.0;
        }
        let mut total = 0.0;
        if a < 0.0 {
            total += self.traj.history.integrate(a, b.min(0.0), g);
        }
        if b <= 0.0 {
            return total;
        }
        let traj = self.traj;
        let h = traj.step;
        let start = a.max(0.0);
        let last = traj.grid.len() - 1;
        let mut k = ((start / h).floor() as usize).min(last.saturating_sub(1));
        while k < last && traj.grid[k] < b {
            let p = start.max(traj.grid[k]);
            let q = b.min(traj.grid[k + 1]);
            if q > p {
                let cp = (p - traj.grid[k]) / h;
                let cq = (q - traj.grid[k]) / h;
                let fa = g(&traj.interpolate(k, cp));
                let fm = g(&traj.interpolate(k, 0.5 * (cp + cq)));
                let fb = g(&traj.interpolate(k, cq));
                total += (q - p) / 6.0 * (fa + 4.0 * fm + fb);
            }
            k += 1;
        }
        total
    }
}
