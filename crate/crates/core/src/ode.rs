//! Adaptive explicit Runge-Kutta integration with dense output and event location.
//!
//! The stepper is the Dormand-Prince 5(4) embedded pair with its free
//! fourth-order continuous extension. Every accepted step stores the
//! interpolation polynomial, so a [`Trajectory`] can be evaluated at any time
//! inside its span and events (indicator sign changes) can be refined by
//! bisection on the interpolant after the fact.

use thiserror::Error;

/// Tolerances and step limits for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct IntegratorConfig {
    /// Relative tolerance per step.
    pub rel_tol: f64,
    /// Absolute tolerance per step; also the target for event refinement.
    pub abs_tol: f64,
    /// Largest step magnitude the controller may take.
    pub max_step: f64,
    /// Smallest step magnitude before the integration gives up.
    pub min_step: f64,
    /// Cap on attempted steps (accepted + rejected).
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: f64::INFINITY,
            min_step: 1e-14,
            max_steps: 1_000_000,
        }
    }
}

impl IntegratorConfig {
    /// Same tolerances with a different step ceiling.
    pub fn with_max_step(mut self, max_step: f64) -> Self {
        self.max_step = max_step;
        self
    }

    /// Same limits with different tolerances.
    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    fn validate(&self) -> Result<(), OdeError> {
        let positive = |v: f64| v.is_finite() && v > 0.0 || v == f64::INFINITY;
        if !positive(self.rel_tol) || !positive(self.abs_tol) {
            return Err(OdeError::InvalidInput("tolerances must be positive".into()));
        }
        if !positive(self.min_step) || self.min_step > self.max_step || self.max_step.is_nan() {
            return Err(OdeError::InvalidInput(
                "need 0 < min_step <= max_step".into(),
            ));
        }
        if self.max_steps == 0 {
            return Err(OdeError::InvalidInput("max_steps must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum OdeError {
    #[error("step size underflow at t = {t} (required step below min_step)")]
    StepUnderflow { t: f64 },
    #[error("maximum number of steps exceeded at t = {t}")]
    MaxStepsExceeded { t: f64 },
    #[error("state became non-finite near t = {t}")]
    NonFiniteState { t: f64 },
    #[error("event indicator does not change sign on the trajectory span")]
    NoSignChange,
    #[error("time {t} outside the trajectory span [{lo}, {hi}]")]
    OutOfSpan { t: f64, lo: f64, hi: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Which indicator sign changes count as a crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventDirection {
    Any,
    /// Indicator goes from negative to non-negative.
    Rising,
    /// Indicator goes from positive to non-positive.
    Falling,
}

type Indicator<const N: usize> = Box<dyn Fn(f64, &[f64; N]) -> f64 + Send + Sync>;

/// A scalar indicator whose zero crossings along the trajectory are located.
pub struct EventSpec<const N: usize> {
    indicator: Indicator<N>,
    pub direction: EventDirection,
    pub terminal: bool,
}

impl<const N: usize> EventSpec<N> {
    pub fn new(
        direction: EventDirection,
        terminal: bool,
        indicator: impl Fn(f64, &[f64; N]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            indicator: Box::new(indicator),
            direction,
            terminal,
        }
    }

    pub fn eval(&self, t: f64, y: &[f64; N]) -> f64 {
        (self.indicator)(t, y)
    }

    fn crosses(&self, g_prev: f64, g_new: f64) -> bool {
        match self.direction {
            EventDirection::Rising => g_prev < 0.0 && g_new >= 0.0,
            EventDirection::Falling => g_prev > 0.0 && g_new <= 0.0,
            EventDirection::Any => {
                (g_prev < 0.0 && g_new >= 0.0) || (g_prev > 0.0 && g_new <= 0.0)
            }
        }
    }
}

/// A located indicator crossing.
#[derive(Debug, Clone, Copy)]
pub struct EventHit<const N: usize> {
    /// Index into the event list passed to [`integrate`].
    pub event: usize,
    pub t: f64,
    pub y: [f64; N],
}

/// One accepted step's dense-output polynomial (quartic in the step fraction).
#[derive(Debug, Clone, Copy)]
struct DenseSegment<const N: usize> {
    t0: f64,
    h: f64,
    cont: [[f64; N]; 5],
}

impl<const N: usize> DenseSegment<N> {
    fn eval(&self, t: f64) -> [f64; N] {
        let theta = (t - self.t0) / self.h;
        let theta1 = 1.0 - theta;
        let mut y = [0.0; N];
        for i in 0..N {
            let c = &self.cont;
            y[i] = c[0][i]
                + theta * (c[1][i] + theta1 * (c[2][i] + theta * (c[3][i] + theta1 * c[4][i])));
        }
        y
    }
}

/// Dense numerical solution of an initial value problem.
///
/// `times` and `states` hold the accepted step endpoints (strictly monotone in
/// the integration direction); the stored interpolants reproduce the states at
/// the nodes exactly and give fourth-order accurate values in between.
pub struct Trajectory<const N: usize> {
    times: Vec<f64>,
    states: Vec<[f64; N]>,
    segments: Vec<DenseSegment<N>>,
    events: Vec<EventHit<N>>,
    terminated: bool,
    abs_tol: f64,
}

impl<const N: usize> Trajectory<N> {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[[f64; N]] {
        &self.states
    }

    /// All event crossings located during integration, in time order.
    pub fn events(&self) -> &[EventHit<N>] {
        &self.events
    }

    /// True when integration stopped at a terminal event rather than the
    /// requested end time.
    pub fn terminated_by_event(&self) -> bool {
        self.terminated
    }

    pub fn start_time(&self) -> f64 {
        self.times[0]
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn end_state(&self) -> [f64; N] {
        *self.states.last().unwrap()
    }

    fn forward(&self) -> bool {
        self.times.len() < 2 || self.times[1] > self.times[0]
    }

    fn segment_index(&self, t: f64) -> Result<usize, OdeError> {
        let (lo, hi) = if self.forward() {
            (self.start_time(), self.end_time())
        } else {
            (self.end_time(), self.start_time())
        };
        // Tolerate endpoint roundoff.
        let slack = 1e-12 * (1.0 + hi.abs().max(lo.abs()));
        if t < lo - slack || t > hi + slack {
            return Err(OdeError::OutOfSpan { t, lo, hi });
        }
        let n = self.segments.len();
        let idx = if self.forward() {
            self.times.partition_point(|&tk| tk <= t)
        } else {
            self.times.partition_point(|&tk| tk >= t)
        };
        Ok(idx.saturating_sub(1).min(n - 1))
    }

    /// State at any time inside the span, from the stored interpolants.
    pub fn eval(&self, t: f64) -> Result<[f64; N], OdeError> {
        let i = self.segment_index(t)?;
        Ok(self.segments[i].eval(t))
    }

    /// Locate the first crossing of `event` over the stored steps.
    ///
    /// The crossing is bracketed at step endpoints and refined by bisection on
    /// the dense interpolant until the indicator magnitude drops below the
    /// trajectory's `abs_tol` (or the bracket reaches roundoff width).
    pub fn locate_event(&self, event: &EventSpec<N>) -> Result<(f64, [f64; N]), OdeError> {
        let mut g_prev = event.eval(self.times[0], &self.states[0]);
        for i in 0..self.segments.len() {
            let t_next = self.times[i + 1];
            let g_next = event.eval(t_next, &self.states[i + 1]);
            if event.crosses(g_prev, g_next) {
                return Ok(refine_crossing(
                    &self.segments[i],
                    event,
                    self.times[i],
                    t_next,
                    g_prev,
                    self.abs_tol,
                ));
            }
            g_prev = g_next;
        }
        Err(OdeError::NoSignChange)
    }
}

/// Bisection for the indicator zero inside one dense segment.
fn refine_crossing<const N: usize>(
    seg: &DenseSegment<N>,
    event: &EventSpec<N>,
    t_lo: f64,
    t_hi: f64,
    g_lo: f64,
    abs_tol: f64,
) -> (f64, [f64; N]) {
    let mut lo = t_lo;
    let mut hi = t_hi;
    let mut sign_lo = g_lo.signum();
    if sign_lo == 0.0 {
        sign_lo = -event.eval(t_hi, &seg.eval(t_hi)).signum();
    }
    let mut best_t = hi;
    let mut best_y = seg.eval(hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let y = seg.eval(mid);
        let g = event.eval(mid, &y);
        best_t = mid;
        best_y = y;
        if g.abs() <= abs_tol {
            break;
        }
        if g.signum() == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo).abs() <= f64::EPSILON * (1.0 + mid.abs()) {
            break;
        }
    }
    (best_t, best_y)
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
/// Fifth-order weights (row seven of A; FSAL).
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
/// Error weights b - b_hat.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
/// Dense-output weights for the fifth contribution vector.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

fn rms_scaled<const N: usize>(v: &[f64; N], scale: &[f64; N]) -> f64 {
    let mut s = 0.0;
    for i in 0..N {
        let r = v[i] / scale[i];
        s += r * r;
    }
    (s / N as f64).sqrt()
}

/// Initial step heuristic (two trial derivative evaluations).
fn initial_step<const N: usize, F: Fn(f64, &[f64; N]) -> [f64; N]>(
    rhs: &F,
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    direction: f64,
    span: f64,
    config: &IntegratorConfig,
) -> f64 {
    let mut scale = [0.0; N];
    for i in 0..N {
        scale[i] = config.abs_tol + config.rel_tol * y0[i].abs();
    }
    let d0 = rms_scaled(y0, &scale);
    let d1 = rms_scaled(f0, &scale);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min(span).min(config.max_step);
    let mut y1 = [0.0; N];
    for i in 0..N {
        y1[i] = y0[i] + direction * h0 * f0[i];
    }
    let f1 = rhs(t0 + direction * h0, &y1);
    let mut df = [0.0; N];
    for i in 0..N {
        df[i] = f1[i] - f0[i];
    }
    let d2 = rms_scaled(&df, &scale) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span).min(config.max_step)
}

/// Integrate `y' = rhs(t, y)` from `t0` to `t1` (either direction).
///
/// Returns the dense trajectory over the span, or up to the first terminal
/// event. Local error per step is controlled against `rel_tol`/`abs_tol` by
/// the embedded fourth-order estimate.
pub fn integrate<const N: usize, F: Fn(f64, &[f64; N]) -> [f64; N]>(
    rhs: F,
    y0: [f64; N],
    t0: f64,
    t1: f64,
    config: &IntegratorConfig,
    events: &[EventSpec<N>],
) -> Result<Trajectory<N>, OdeError> {
    config.validate()?;
    if t0 == t1 {
        return Err(OdeError::InvalidInput("empty integration span".into()));
    }
    let f0 = rhs(t0, &y0);
    if !y0.iter().all(|v| v.is_finite()) || !f0.iter().all(|v| v.is_finite()) {
        return Err(OdeError::InvalidInput(
            "initial state or derivative not finite".into(),
        ));
    }

    let direction = (t1 - t0).signum();
    let span = (t1 - t0).abs();
    let mut h = initial_step(&rhs, t0, &y0, &f0, direction, span, config);

    let mut traj = Trajectory {
        times: vec![t0],
        states: vec![y0],
        segments: Vec::new(),
        events: Vec::new(),
        terminated: false,
        abs_tol: config.abs_tol,
    };

    let mut t = t0;
    let mut y = y0;
    let mut k1 = f0;
    let mut g_prev: Vec<f64> = events.iter().map(|e| e.eval(t0, &y0)).collect();
    let mut steps = 0usize;

    'outer: while direction * (t1 - t) > 0.0 {
        if steps >= config.max_steps {
            return Err(OdeError::MaxStepsExceeded { t });
        }
        steps += 1;

        h = h.min(config.max_step).min((t1 - t).abs());
        if h < config.min_step {
            // The remaining gap itself can be below min_step; land exactly.
            if (t1 - t).abs() <= config.min_step {
                h = (t1 - t).abs();
            } else {
                return Err(OdeError::StepUnderflow { t });
            }
        }
        let hd = direction * h;

        // Stages 2..7 (k1 carried over, FSAL).
        let mut k = [[0.0; N]; 7];
        k[0] = k1;
        let mut finite = true;
        for s in 0..6 {
            let mut ys = [0.0; N];
            for i in 0..N {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(s + 1) {
                    acc += A[s][j] * kj[i];
                }
                ys[i] = y[i] + hd * acc;
            }
            k[s + 1] = rhs(t + C[s] * hd, &ys);
            if !k[s + 1].iter().all(|v| v.is_finite()) {
                finite = false;
                break;
            }
        }

        let mut y_new = [0.0; N];
        let mut err_vec = [0.0; N];
        if finite {
            for i in 0..N {
                let mut acc = 0.0;
                let mut eac = 0.0;
                for j in 0..7 {
                    acc += B[j] * k[j][i];
                    eac += E[j] * k[j][i];
                }
                y_new[i] = y[i] + hd * acc;
                err_vec[i] = hd * eac;
            }
            finite = y_new.iter().all(|v| v.is_finite());
        }

        if !finite {
            // Retry with a halved step; report only if that cannot make progress.
            h *= 0.5;
            if h < config.min_step {
                return Err(OdeError::NonFiniteState { t });
            }
            continue;
        }

        let mut scale = [0.0; N];
        for i in 0..N {
            scale[i] = config.abs_tol + config.rel_tol * y[i].abs().max(y_new[i].abs());
        }
        let err = rms_scaled(&err_vec, &scale);

        if err <= 1.0 {
            // Accept: build the dense segment, then test events on it.
            let t_new = if (t1 - (t + hd)).abs() < 1e-14 * span {
                t1
            } else {
                t + hd
            };
            let mut cont = [[0.0; N]; 5];
            for i in 0..N {
                let ydiff = y_new[i] - y[i];
                let bspl = hd * k[0][i] - ydiff;
                cont[0][i] = y[i];
                cont[1][i] = ydiff;
                cont[2][i] = bspl;
                cont[3][i] = ydiff - hd * k[6][i] - bspl;
                let mut dacc = 0.0;
                for j in 0..7 {
                    dacc += D[j] * k[j][i];
                }
                cont[4][i] = hd * dacc;
            }
            let seg = DenseSegment {
                t0: t,
                h: t_new - t,
                cont,
            };

            let mut terminal_hit: Option<EventHit<N>> = None;
            for (ei, ev) in events.iter().enumerate() {
                let g_new = ev.eval(t_new, &y_new);
                if ev.crosses(g_prev[ei], g_new) {
                    let (te, ye) =
                        refine_crossing(&seg, ev, t, t_new, g_prev[ei], config.abs_tol);
                    let hit = EventHit {
                        event: ei,
                        t: te,
                        y: ye,
                    };
                    if ev.terminal {
                        match &terminal_hit {
                            Some(prev) if direction * (prev.t - te) <= 0.0 => {}
                            _ => terminal_hit = Some(hit),
                        }
                    } else {
                        traj.events.push(hit);
                    }
                }
                g_prev[ei] = g_new;
            }

            traj.segments.push(seg);
            if let Some(hit) = terminal_hit {
                traj.times.push(hit.t);
                traj.states.push(hit.y);
                traj.events.push(hit);
                traj.terminated = true;
                break 'outer;
            }

            traj.times.push(t_new);
            traj.states.push(y_new);
            t = t_new;
            y = y_new;
            k1 = k[6];
        }

        // PI-free step controller with the usual clamps.
        let fac = if err == 0.0 {
            10.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 10.0)
        };
        h = (h * fac).min(config.max_step);
    }

    Ok(traj)
}

/// Fixed-step schemes used by the convergence probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixedScheme {
    /// The classical four-stage fourth-order method.
    ClassicRk4,
    /// The fifth-order row of the adaptive pair.
    Dopri5,
}

/// Integrate with `n` equal steps of the chosen scheme; no error control.
pub fn fixed_step<const N: usize, F: Fn(f64, &[f64; N]) -> [f64; N]>(
    rhs: &F,
    y0: [f64; N],
    t0: f64,
    t1: f64,
    n: usize,
    scheme: FixedScheme,
) -> [f64; N] {
    let h = (t1 - t0) / n as f64;
    let mut t = t0;
    let mut y = y0;
    for _ in 0..n {
        y = match scheme {
            FixedScheme::ClassicRk4 => {
                let k1 = rhs(t, &y);
                let mut ytmp = [0.0; N];
                for i in 0..N {
                    ytmp[i] = y[i] + 0.5 * h * k1[i];
                }
                let k2 = rhs(t + 0.5 * h, &ytmp);
                for i in 0..N {
                    ytmp[i] = y[i] + 0.5 * h * k2[i];
                }
                let k3 = rhs(t + 0.5 * h, &ytmp);
                for i in 0..N {
                    ytmp[i] = y[i] + h * k3[i];
                }
                let k4 = rhs(t + h, &ytmp);
                let mut out = y;
                for i in 0..N {
                    out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
                out
            }
            FixedScheme::Dopri5 => {
                let mut k = [[0.0; N]; 7];
                k[0] = rhs(t, &y);
                for s in 0..6 {
                    let mut ys = [0.0; N];
                    for i in 0..N {
                        let mut acc = 0.0;
                        for (j, kj) in k.iter().enumerate().take(s + 1) {
                            acc += A[s][j] * kj[i];
                        }
                        ys[i] = y[i] + h * acc;
                    }
                    k[s + 1] = rhs(t + C[s] * h, &ys);
                }
                let mut out = y;
                for i in 0..N {
                    let mut acc = 0.0;
                    for j in 0..7 {
                        acc += B[j] * k[j][i];
                    }
                    out[i] += h * acc;
                }
                out
            }
        };
        t += h;
    }
    y
}

/// Estimate the global order of `scheme` on a problem with known endpoint.
///
/// Runs fixed-step integrations at step sizes H, H/2, and H/4 and returns
/// the mean log2 error ratio.
pub fn convergence_order<const N: usize, F: Fn(f64, &[f64; N]) -> [f64; N]>(
    rhs: F,
    y0: [f64; N],
    t0: f64,
    t1: f64,
    reference_final: [f64; N],
    base_steps: usize,
    scheme: FixedScheme,
) -> f64 {
    let err = |n: usize| -> f64 {
        let yf = fixed_step(&rhs, y0, t0, t1, n, scheme);
        let mut s = 0.0;
        for i in 0..N {
            let d = yf[i] - reference_final[i];
            s += d * d;
        }
        s.sqrt()
    };
    let e0 = err(base_steps);
    let e1 = err(2 * base_steps);
    let e2 = err(4 * base_steps);
    0.5 * ((e0 / e1).log2() + (e1 / e2).log2())
}
