//! The soliton profile ODE, the shooting search for the soliton constant, and
//! the evaluable metric profile on the orbit interval.
//!
//! The profile function `h` solves `2hh'' + 4h'^2 - 4 + h^2(1 + c h'^2) = 0`
//! starting from the maximum `h(0) = sqrt(6)`, `h'(0) = 0`. For exactly one
//! constant `c0` the first minimum lands on `sqrt(2)`, which is what the
//! smooth closure of the metric requires; `find_c0` locates it by bisection on
//! the first-minimum value and `cao_root` cross-checks it against the root of
//! `k(x) = e^{2x}(2 - 4x + 3x^2) - 2 + x^2`.

use crate::ode::{
    integrate, EventDirection, EventSpec, IntegratorConfig, OdeError, Trajectory,
};
use thiserror::Error;

pub const SQRT6: f64 = 2.449489742783178;
pub const SQRT2: f64 = std::f64::consts::SQRT_2;

#[derive(Debug, Error)]
pub enum SolitonError {
    #[error("profile degenerate: h = {h} is not positive")]
    DegenerateProfile { h: f64 },
    #[error("no first minimum found within t <= {horizon} (escaping trajectory)")]
    NoMinimumFound { horizon: f64 },
    #[error("bracket ({lo}, {hi}) does not straddle the target minimum: miss({lo}) = {miss_lo}, miss({hi}) = {miss_hi}")]
    InvalidBracket {
        lo: f64,
        hi: f64,
        miss_lo: f64,
        miss_hi: f64,
    },
    #[error("boundary invariant violated: {what} = {value} (limit {limit})")]
    BoundaryViolation {
        what: &'static str,
        value: f64,
        limit: f64,
    },
    #[error("time {t} outside the profile domain [0, {beta}]")]
    OutOfDomain { t: f64, beta: f64 },
    #[error(transparent)]
    Integrator(#[from] OdeError),
}

/// Phase-plane right-hand side: `(h', v') = (v, 2/h - 2v^2/h - (h/2)(1 + c v^2))`.
pub fn soliton_rhs(h: f64, v: f64, c: f64) -> Result<(f64, f64), SolitonError> {
    if h <= 0.0 {
        return Err(SolitonError::DegenerateProfile { h });
    }
    Ok((v, h_second(h, v, c)))
}

/// Second derivative from the profile equation solved for `h''`.
pub fn h_second(h: f64, v: f64, c: f64) -> f64 {
    (4.0 - h * h - 4.0 * v * v - c * h * h * v * v) / (2.0 * h)
}

/// Third derivative; the factor `h'` keeps it finite at critical points.
pub fn h_third(h: f64, v: f64, c: f64) -> Result<f64, SolitonError> {
    if h <= 0.0 {
        return Err(SolitonError::DegenerateProfile { h });
    }
    let d2 = h_second(h, v, c);
    Ok(-v * (5.0 * d2 / h + 1.0 + c * (h * d2 + v * v)))
}

/// Shooting run parameters.
#[derive(Debug, Clone, Copy)]
pub struct SolitonParams {
    /// Soliton constant to integrate with.
    pub c: f64,
    /// Initial profile value; the canonical profile starts at `sqrt(6)`.
    pub h0: f64,
    pub integrator: IntegratorConfig,
    /// Give up on finding a minimum beyond this time.
    pub horizon: f64,
}

impl SolitonParams {
    /// Canonical shooting setup: start at `sqrt(6)` with tight tolerances.
    pub fn shooting(c: f64) -> Self {
        Self {
            c,
            h0: SQRT6,
            integrator: IntegratorConfig::default()
                .with_tolerances(1e-12, 1e-14)
                .with_max_step(0.25),
            horizon: 50.0,
        }
    }
}

/// First critical time after the start and the profile value there.
#[derive(Debug, Clone, Copy)]
pub struct MinimumRecord {
    pub beta_c: f64,
    pub m_c: f64,
}

fn v_zero_event() -> EventSpec<2> {
    EventSpec::new(EventDirection::Rising, true, |_t, y: &[f64; 2]| y[1])
}

fn integrate_orbit(params: &SolitonParams) -> Result<Trajectory<2>, SolitonError> {
    let c = params.c;
    if params.h0 <= 2.0 {
        return Err(SolitonError::DegenerateProfile { h: params.h0 });
    }
    let rhs = move |_t: f64, y: &[f64; 2]| -> [f64; 2] {
        let (h, v) = (y[0], y[1]);
        if h <= 0.0 {
            return [f64::NAN, f64::NAN];
        }
        [v, h_second(h, v, c)]
    };
    let traj = integrate(
        rhs,
        [params.h0, 0.0],
        0.0,
        params.horizon,
        &params.integrator,
        &[v_zero_event()],
    )?;
    Ok(traj)
}

/// Integrate from `(h0, 0)` until `h'` crosses back to zero from below.
///
/// Starting above the equilibrium `h = 2`, the slope turns negative
/// immediately, so the first rising zero of `v` is the first minimum.
pub fn first_minimum(params: &SolitonParams) -> Result<MinimumRecord, SolitonError> {
    let traj = integrate_orbit(params)?;
    if !traj.terminated_by_event() {
        return Err(SolitonError::NoMinimumFound {
            horizon: params.horizon,
        });
    }
    let beta_c = traj.end_time();
    let m_c = traj.end_state()[0];
    Ok(MinimumRecord { beta_c, m_c })
}

/// One bisection step of the `c` search, kept for the CLI's bracket history.
#[derive(Debug, Clone, Copy)]
pub struct SearchStep {
    pub c: f64,
    pub miss: f64,
}

/// Result of the soliton-constant search.
#[derive(Debug, Clone)]
pub struct C0Search {
    pub c0: f64,
    /// Final `m_c - sqrt(2)` at the returned constant.
    pub miss: f64,
    pub history: Vec<SearchStep>,
}

/// Find the soliton constant by bisection on the first-minimum value.
///
/// The first-minimum value is strictly decreasing in `c` (the phase-plane
/// comparison argument: integral curves for smaller `c` pass above), so a
/// valid bracket has `m(lo) > sqrt(2) > m(hi)`. Both endpoint misses are
/// checked before the search starts.
pub fn find_c0(bracket: (f64, f64), target_tol: f64) -> Result<C0Search, SolitonError> {
    let (mut lo, mut hi) = bracket;
    let miss_at = |c: f64| -> Result<f64, SolitonError> {
        Ok(first_minimum(&SolitonParams::shooting(c))?.m_c - SQRT2)
    };
    let miss_lo = miss_at(lo)?;
    let miss_hi = miss_at(hi)?;
    if miss_lo <= 0.0 || miss_hi >= 0.0 {
        return Err(SolitonError::InvalidBracket {
            lo,
            hi,
            miss_lo,
            miss_hi,
        });
    }

    let mut history = Vec::new();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let miss = miss_at(mid)?;
        history.push(SearchStep { c: mid, miss });
        if miss.abs() <= target_tol || (hi - lo).abs() <= 4.0 * f64::EPSILON * mid.abs() {
            return Ok(C0Search {
                c0: mid,
                miss,
                history,
            });
        }
        if miss > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let last = *history.last().unwrap();
    Ok(C0Search {
        c0: last.c,
        miss: last.miss,
        history,
    })
}

/// Cao's root function `k(x) = e^{2x}(2 - 4x + 3x^2) - 2 + x^2`.
pub fn cao_k(x: f64) -> f64 {
    (2.0 * x).exp() * (2.0 - 4.0 * x + 3.0 * x * x) - 2.0 + x * x
}

/// The nonzero root of `k` in (-1, 0); `x = 0` is also a root and is excluded
/// by the bracket.
pub fn cao_root() -> Result<f64, SolitonError> {
    let (mut lo, mut hi) = (-1.0, -0.4);
    let (k_lo, k_hi) = (cao_k(lo), cao_k(hi));
    if k_lo <= 0.0 || k_hi >= 0.0 {
        return Err(SolitonError::InvalidBracket {
            lo,
            hi,
            miss_lo: k_lo,
            miss_hi: k_hi,
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let k_mid = cao_k(mid);
        if k_mid.abs() <= 1e-15 || (hi - lo).abs() <= 2.0 * f64::EPSILON * mid.abs() {
            return Ok(mid);
        }
        if k_mid > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Profile value and derivatives up to third order at one time.
#[derive(Debug, Clone, Copy)]
pub struct ProfilePoint {
    pub h: f64,
    pub dh: f64,
    pub d2h: f64,
    pub d3h: f64,
}

/// The solved metric profile on `[0, beta]`.
///
/// `h` and `h'` come from the integrator's dense interpolant; `h''` and `h'''`
/// are the exact closures of the profile equation, so every downstream
/// curvature formula stays consistent with the ODE.
pub struct SolitonProfile {
    c: f64,
    beta: f64,
    traj: Trajectory<2>,
}

impl SolitonProfile {
    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn eval(&self, t: f64) -> Result<ProfilePoint, SolitonError> {
        let slack = 1e-9 * (1.0 + self.beta);
        if t < -slack || t > self.beta + slack {
            return Err(SolitonError::OutOfDomain { t, beta: self.beta });
        }
        let y = self.traj.eval(t.clamp(0.0, self.beta))?;
        let (h, v) = (y[0], y[1]);
        Ok(ProfilePoint {
            h,
            dh: v,
            d2h: h_second(h, v, self.c),
            d3h: h_third(h, v, self.c)?,
        })
    }

    /// Uniform sample grid including both endpoints.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        let n = n.max(2);
        (0..n)
            .map(|i| self.beta * i as f64 / (n - 1) as f64)
            .collect()
    }
}

/// Boundary checks applied after integration; limit per the profile contract.
const BOUNDARY_LIMIT: f64 = 1e-6;

/// Build the canonical profile by integrating to the first minimum.
///
/// Fails with `BoundaryViolation` when `c` is not close enough to the soliton
/// constant for the closed-orbit endpoint conditions to hold.
pub fn build_profile(c: f64) -> Result<SolitonProfile, SolitonError> {
    build_profile_with(c, SolitonParams::shooting(c).integrator)
}

pub fn build_profile_with(
    c: f64,
    integrator: IntegratorConfig,
) -> Result<SolitonProfile, SolitonError> {
    let params = SolitonParams {
        integrator,
        ..SolitonParams::shooting(c)
    };
    let traj = integrate_orbit(&params)?;
    if !traj.terminated_by_event() {
        return Err(SolitonError::NoMinimumFound {
            horizon: params.horizon,
        });
    }
    let beta = traj.end_time();
    let profile = SolitonProfile { c, beta, traj };

    let left = profile.eval(0.0)?;
    let right = profile.eval(beta)?;
    let checks = [
        ("h(beta) - sqrt(2)", right.h - SQRT2),
        ("h(0) h''(0) + 1", left.h * left.d2h + 1.0),
        ("h(beta) h''(beta) - 1", right.h * right.d2h - 1.0),
        ("h'(0)", left.dh),
    ];
    for (what, value) in checks {
        if value.abs() > BOUNDARY_LIMIT {
            return Err(SolitonError::BoundaryViolation {
                what,
                value,
                limit: BOUNDARY_LIMIT,
            });
        }
    }
    Ok(profile)
}
