//! The radial Yamabe equation on the profile, solved by Taylor-regularized
//! double shooting, plus the scan that witnesses uniqueness of the solution.
//!
//! Both endpoints of the orbit interval are regular-singular (the Laplacian
//! drift behaves like one over the distance to the endpoint), so integration
//! starts at each endpoint from a second-order Taylor seed and the two shots
//! meet at an interior matching time. A two-variable Newton iteration on the
//! value and slope gaps at the match point produces the solution; scanning the
//! left boundary value and recording the slope mismatch of the best value
//! match exhibits exactly one sign change.

use crate::geometry::{Geometry, GeometryError, RadialFunction};
use crate::ode::{
    integrate, EventDirection, EventSpec, IntegratorConfig, OdeError, Trajectory,
};
use crate::soliton::{SolitonError, SolitonProfile};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum YamabeError {
    #[error("shot blew up at t = {t} (|phi| = {phi_abs} beyond the guard)")]
    BlowUp { t: f64, phi_abs: f64 },
    #[error("Newton did not converge after {iterations} iterations (gap {gap})")]
    NoConvergence { iterations: usize, gap: f64 },
    #[error("scan shows no sign change of the slope mismatch")]
    BracketNotFound,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Soliton(#[from] SolitonError),
    #[error(transparent)]
    Integrator(#[from] OdeError),
}

/// Double-shooting parameters.
#[derive(Debug, Clone, Copy)]
pub struct ShootingConfig {
    /// Taylor-seed offset from each endpoint, as a fraction of `beta`.
    pub eps_frac: f64,
    /// Matching time as a fraction of `beta`.
    pub t_match_frac: f64,
    /// Tolerances for the solve and solution assembly.
    pub integrator: IntegratorConfig,
    /// Looser tolerances for the scan's many inner shots.
    pub scan_integrator: IntegratorConfig,
    /// Blow-up guard at `guard_factor * sqrt(S(0))`.
    pub guard_factor: f64,
    /// Sample count of the assembled solution grid.
    pub grid: usize,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        Self {
            eps_frac: 1e-4,
            t_match_frac: 0.5,
            integrator: IntegratorConfig::default()
                .with_tolerances(1e-12, 1e-13)
                .with_max_step(0.25),
            scan_integrator: IntegratorConfig::default()
                .with_tolerances(1e-10, 1e-12)
                .with_max_step(0.25),
            guard_factor: 10.0,
            grid: 2001,
        }
    }
}

/// One point of the assembled solution.
#[derive(Debug, Clone, Copy)]
pub struct SolutionSample {
    pub t: f64,
    pub phi: f64,
    pub dphi: f64,
    /// Pointwise equation residual; the two endpoint rows carry the
    /// regularized endpoint identity, which the seeds satisfy exactly.
    pub residual: f64,
}

/// The solved conformal factor.
#[derive(Debug, Clone)]
pub struct YamabeSolution {
    pub s0: f64,
    pub s_beta: f64,
    /// Fixed by the normalization that removes homothety freedom.
    pub lambda: f64,
    pub samples: Vec<SolutionSample>,
    pub residual_rms: f64,
    /// Value and slope gaps at the matching time after Newton.
    pub gaps: (f64, f64),
    pub newton_iters: usize,
    /// `|12 phi''(0) - phi(0)(phi(0)^2 - S(0))|` with the second derivative
    /// fitted from the integrated solution, and the mirrored residual at beta.
    pub endpoint_identity: (f64, f64),
}

impl YamabeSolution {
    /// Largest interior slope; negative means strictly decreasing.
    pub fn max_interior_slope(&self) -> f64 {
        self.samples[1..self.samples.len() - 1]
            .iter()
            .map(|s| s.dphi)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn radial_function(&self) -> RadialFunction {
        RadialFunction {
            ts: self.samples.iter().map(|s| s.t).collect(),
            phi: self.samples.iter().map(|s| s.phi).collect(),
            dphi: self.samples.iter().map(|s| s.dphi).collect(),
        }
    }
}

/// One row of the uniqueness scan. `None` entries mean the left shot blew up
/// or no right boundary value matches the left shot at the matching time.
#[derive(Debug, Clone, Copy)]
pub struct ScanRecord {
    pub s0: f64,
    pub s_beta: Option<f64>,
    pub miss: Option<f64>,
}

/// Count sign changes of `miss` over consecutive valid records.
pub fn scan_sign_changes(records: &[ScanRecord]) -> usize {
    records
        .windows(2)
        .filter(|w| match (w[0].miss, w[1].miss) {
            (Some(a), Some(b)) => a.signum() * b.signum() < 0.0,
            _ => false,
        })
        .count()
}

/// Monotonicity report for the difference of two left shots.
#[derive(Debug, Clone, Copy)]
pub struct ComparisonReport {
    /// `F(0) = s0_b - s0_a`.
    pub f_at_zero: f64,
    /// `F''(0) = (v(s0_b) - v(s0_a)) / 12` with `v(x) = x^3 - S(0) x`.
    pub fpp_at_zero: f64,
    /// First time where `F' < 0`, if any, over the commonly covered span.
    pub first_slope_violation: Option<f64>,
    pub checked_until: f64,
}

enum ShotOutcome {
    Reached(Trajectory<2>),
    BlewUp { sign: f64, t: f64 },
}

/// The Yamabe boundary value problem over a fixed profile.
pub struct YamabeProblem<'a> {
    geo: Geometry<'a>,
    cfg: ShootingConfig,
    beta: f64,
    s_left: f64,
    s_right: f64,
    guard: f64,
}

impl<'a> YamabeProblem<'a> {
    pub fn new(profile: &'a SolitonProfile) -> Self {
        Self::with_config(profile, ShootingConfig::default())
    }

    pub fn with_config(profile: &'a SolitonProfile, cfg: ShootingConfig) -> Self {
        let geo = Geometry::new(profile);
        let s_left = geo.s_left();
        let s_right = geo.s_right();
        Self {
            geo,
            cfg,
            beta: profile.beta(),
            s_left,
            s_right,
            guard: cfg.guard_factor * s_left.sqrt(),
        }
    }

    pub fn geometry(&self) -> &Geometry<'a> {
        &self.geo
    }

    pub fn config(&self) -> &ShootingConfig {
        &self.cfg
    }

    /// Admissible range of the left boundary value,
    /// `[sqrt(S(beta)) + delta, sqrt(S(0))]`.
    pub fn default_scan_range(&self) -> (f64, f64) {
        (self.s_right.sqrt() + 1e-3, self.s_left.sqrt())
    }

    fn eps(&self) -> f64 {
        self.cfg.eps_frac * self.beta
    }

    fn t_match(&self) -> f64 {
        self.cfg.t_match_frac * self.beta
    }

    /// Second derivative from the equation at an interior time.
    pub fn rhs(&self, t: f64, phi: f64, dphi: f64) -> Result<f64, YamabeError> {
        let a = self.geo.laplacian_coefficient(t)?;
        let s = self.geo.scalar_curvature(t)?;
        Ok((phi * phi * phi - s * phi) / 6.0 - a * dphi)
    }

    /// Taylor seed at `t = eps`: the regularized equation forces the
    /// curvature of the solution at the endpoint.
    pub fn seed_left(&self, s0: f64, eps: f64) -> (f64, f64) {
        let q = s0 * (s0 * s0 - self.s_left) / 12.0;
        (s0 + 0.5 * q * eps * eps, q * eps)
    }

    /// Mirrored seed at `t = beta - eps`.
    pub fn seed_right(&self, s_beta: f64, eps: f64) -> (f64, f64) {
        let q = s_beta * (s_beta * s_beta - self.s_right) / 12.0;
        (s_beta + 0.5 * q * eps * eps, -q * eps)
    }

    fn shoot(
        &self,
        from_left: bool,
        boundary_value: f64,
        t_end: f64,
        config: &IntegratorConfig,
    ) -> Result<ShotOutcome, YamabeError> {
        let eps = self.eps();
        let (t_start, y0) = if from_left {
            let (phi, dphi) = self.seed_left(boundary_value, eps);
            (eps, [phi, dphi])
        } else {
            let (phi, dphi) = self.seed_right(boundary_value, eps);
            (self.beta - eps, [phi, dphi])
        };
        let profile = self.geo.profile();
        let c = self.geo.c();
        let rhs = move |t: f64, y: &[f64; 2]| -> [f64; 2] {
            match profile.eval(t) {
                Ok(p) => {
                    let a = p.d2h / p.dh + 3.0 * p.dh / p.h;
                    let s = 4.0 * c * p.dh * p.dh + 2.0 * c * p.h * p.d2h + 4.0;
                    [y[1], (y[0] * y[0] * y[0] - s * y[0]) / 6.0 - a * y[1]]
                }
                Err(_) => [f64::NAN, f64::NAN],
            }
        };
        let guard = self.guard;
        let guard_event = EventSpec::new(EventDirection::Rising, true, move |_t, y: &[f64; 2]| {
            y[0].abs() - guard
        });
        let traj = integrate(rhs, y0, t_start, t_end, config, &[guard_event])?;
        if traj.terminated_by_event() {
            let t = traj.end_time();
            let sign = traj.end_state()[0].signum();
            return Ok(ShotOutcome::BlewUp { sign, t });
        }
        Ok(ShotOutcome::Reached(traj))
    }

    /// Value and slope gaps `(phi_L - phi_R, phi_L' - phi_R')` at the
    /// matching time.
    pub fn shoot_pair(&self, s0: f64, s_beta: f64) -> Result<(f64, f64), YamabeError> {
        let tm = self.t_match();
        let left = match self.shoot(true, s0, tm, &self.cfg.integrator)? {
            ShotOutcome::Reached(t) => t,
            ShotOutcome::BlewUp { sign, t } => {
                return Err(YamabeError::BlowUp {
                    t,
                    phi_abs: sign * self.guard,
                })
            }
        };
        let right = match self.shoot(false, s_beta, tm, &self.cfg.integrator)? {
            ShotOutcome::Reached(t) => t,
            ShotOutcome::BlewUp { sign, t } => {
                return Err(YamabeError::BlowUp {
                    t,
                    phi_abs: sign * self.guard,
                })
            }
        };
        let l = left.end_state();
        let r = right.end_state();
        Ok((l[0] - r[0], l[1] - r[1]))
    }

    /// One scan row: best-matching right value and the slope mismatch there.
    fn scan_record(&self, s0: f64) -> ScanRecord {
        let missing = ScanRecord {
            s0,
            s_beta: None,
            miss: None,
        };
        let tm = self.t_match();
        let left = match self.shoot(true, s0, tm, &self.cfg.scan_integrator) {
            Ok(ShotOutcome::Reached(t)) => t,
            _ => return missing,
        };
        let (phi_l, dphi_l) = {
            let y = left.end_state();
            (y[0], y[1])
        };

        // Value gap as a function of the right boundary value; a blown-up
        // right shot still determines the sign of the gap.
        let big = 1e6;
        let gap_at = |sb: f64| -> f64 {
            match self.shoot(false, sb, tm, &self.cfg.scan_integrator) {
                Ok(ShotOutcome::Reached(t)) => phi_l - t.end_state()[0],
                Ok(ShotOutcome::BlewUp { sign, .. }) => {
                    if sign > 0.0 {
                        -big
                    } else {
                        big
                    }
                }
                Err(_) => f64::NAN,
            }
        };

        let (mut lo, mut hi) = (self.s_right.sqrt(), s0);
        let g_lo = gap_at(lo);
        let g_hi = gap_at(hi);
        if !g_lo.is_finite() || !g_hi.is_finite() || g_lo * g_hi > 0.0 {
            return missing;
        }
        let sign_lo = g_lo.signum();
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let g = gap_at(mid);
            if !g.is_finite() {
                return missing;
            }
            if g.signum() == sign_lo {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-12 {
                break;
            }
        }
        let sb = 0.5 * (lo + hi);
        match self.shoot(false, sb, tm, &self.cfg.scan_integrator) {
            Ok(ShotOutcome::Reached(t)) => ScanRecord {
                s0,
                s_beta: Some(sb),
                miss: Some(dphi_l - t.end_state()[1]),
            },
            _ => missing,
        }
    }

    /// Scan the slope mismatch over a grid of left boundary values.
    ///
    /// Records are independent; `jobs > 1` computes them on that many threads
    /// with identical results in identical order.
    pub fn uniqueness_scan(
        &self,
        range: (f64, f64),
        grid_size: usize,
        jobs: usize,
    ) -> Result<Vec<ScanRecord>, YamabeError> {
        let (lo, hi) = range;
        if lo >= hi || grid_size < 2 {
            return Err(YamabeError::InvalidInput(
                "scan range must be increasing with at least two points".into(),
            ));
        }
        let s0s: Vec<f64> = (0..grid_size)
            .map(|i| lo + (hi - lo) * i as f64 / (grid_size - 1) as f64)
            .collect();
        let jobs = jobs.max(1).min(grid_size);
        if jobs == 1 {
            return Ok(s0s.iter().map(|&s0| self.scan_record(s0)).collect());
        }
        let mut records: Vec<Option<ScanRecord>> = vec![None; grid_size];
        let chunk = grid_size.div_ceil(jobs);
        std::thread::scope(|scope| {
            for (s0_chunk, out_chunk) in s0s.chunks(chunk).zip(records.chunks_mut(chunk)) {
                scope.spawn(move || {
                    for (s0, out) in s0_chunk.iter().zip(out_chunk.iter_mut()) {
                        *out = Some(self.scan_record(*s0));
                    }
                });
            }
        });
        Ok(records.into_iter().map(|r| r.expect("chunk filled")).collect())
    }

    /// Solve the boundary value problem, seeding Newton from a fresh scan.
    pub fn solve(&self) -> Result<YamabeSolution, YamabeError> {
        let records = self.uniqueness_scan(self.default_scan_range(), 64, 1)?;
        self.solve_from_scan(&records)
    }

    /// Solve from an existing scan's sign-change bracket.
    pub fn solve_from_scan(&self, records: &[ScanRecord]) -> Result<YamabeSolution, YamabeError> {
        // Locate the sign change among consecutive valid records.
        let mut bracket = None;
        for w in records.windows(2) {
            if let (Some(m0), Some(m1)) = (w[0].miss, w[1].miss) {
                if m0.signum() * m1.signum() < 0.0 {
                    bracket = Some((w[0], w[1]));
                    break;
                }
            }
        }
        let (lo, hi) = bracket.ok_or(YamabeError::BracketNotFound)?;
        let (m0, m1) = (lo.miss.unwrap(), hi.miss.unwrap());
        let frac = m0 / (m0 - m1);
        let mut s0 = lo.s0 + frac * (hi.s0 - lo.s0);
        let sb_lo = lo.s_beta.unwrap();
        let sb_hi = hi.s_beta.unwrap();
        let mut sb = sb_lo + frac * (sb_hi - sb_lo);

        // Damped Newton with a forward-difference Jacobian.
        let gap_tol = 1e-11;
        let fd = 1e-7;
        let mut gaps = self.shoot_pair(s0, sb)?;
        let mut iters = 0;
        while gaps.0.abs().max(gaps.1.abs()) > gap_tol && iters < 50 {
            iters += 1;
            let g_s0 = self.shoot_pair(s0 + fd, sb)?;
            let g_sb = self.shoot_pair(s0, sb + fd)?;
            let j = [
                [(g_s0.0 - gaps.0) / fd, (g_sb.0 - gaps.0) / fd],
                [(g_s0.1 - gaps.1) / fd, (g_sb.1 - gaps.1) / fd],
            ];
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            if det.abs() < 1e-12 {
                break;
            }
            let ds0 = (gaps.0 * j[1][1] - gaps.1 * j[0][1]) / det;
            let dsb = (gaps.1 * j[0][0] - gaps.0 * j[1][0]) / det;

            let norm0 = gaps.0.abs().max(gaps.1.abs());
            let mut lambda = 1.0;
            let mut accepted = false;
            for _ in 0..6 {
                let cand = (s0 - lambda * ds0, sb - lambda * dsb);
                match self.shoot_pair(cand.0, cand.1) {
                    Ok(g) if g.0.abs().max(g.1.abs()) < 2.0 * norm0 => {
                        s0 = cand.0;
                        sb = cand.1;
                        gaps = g;
                        accepted = true;
                        break;
                    }
                    _ => lambda *= 0.5,
                }
            }
            if !accepted {
                break;
            }
        }
        let gap = gaps.0.abs().max(gaps.1.abs());
        if gap > 1e-9 {
            return Err(YamabeError::NoConvergence {
                iterations: iters,
                gap,
            });
        }

        self.assemble(s0, sb, gaps, iters)
    }

    fn assemble(
        &self,
        s0: f64,
        sb: f64,
        gaps: (f64, f64),
        newton_iters: usize,
    ) -> Result<YamabeSolution, YamabeError> {
        let eps = self.eps();
        let tm = self.t_match();
        let beta = self.beta;
        let fd = 1e-5 * beta.max(1.0);
        let overlap = 10.0 * fd;

        let left = match self.shoot(true, s0, tm + overlap, &self.cfg.integrator)? {
            ShotOutcome::Reached(t) => t,
            ShotOutcome::BlewUp { t, sign } => {
                return Err(YamabeError::BlowUp {
                    t,
                    phi_abs: sign * self.guard,
                })
            }
        };
        let right = match self.shoot(false, sb, tm - overlap, &self.cfg.integrator)? {
            ShotOutcome::Reached(t) => t,
            ShotOutcome::BlewUp { t, sign } => {
                return Err(YamabeError::BlowUp {
                    t,
                    phi_abs: sign * self.guard,
                })
            }
        };

        // Piecewise evaluation: seeds outside [eps, beta - eps], the owning
        // shot elsewhere (left of the matching time -> left shot).
        let eval = |t: f64| -> Result<(f64, f64), YamabeError> {
            if t <= eps {
                let q = s0 * (s0 * s0 - self.s_left) / 12.0;
                Ok((s0 + 0.5 * q * t * t, q * t))
            } else if t >= beta - eps {
                let e = beta - t;
                let q = sb * (sb * sb - self.s_right) / 12.0;
                Ok((sb + 0.5 * q * e * e, -q * e))
            } else if t < tm {
                let y = left.eval(t)?;
                Ok((y[0], y[1]))
            } else {
                let y = right.eval(t)?;
                Ok((y[0], y[1]))
            }
        };

        let grid = self.geo.profile().grid(self.cfg.grid);
        let mut samples = Vec::with_capacity(grid.len());
        let mut sq_sum = 0.0;
        let mut count = 0usize;
        for &t in &grid {
            let (phi, dphi) = eval(t)?;
            let interior = t >= eps + fd && t <= beta - eps - fd;
            let residual = if interior {
                // Independent second derivative: centered differences of the
                // integrated slope, kept on the owning side of the match.
                let (_, dp_f) = eval(t + fd)?;
                let (_, dp_b) = eval(t - fd)?;
                let d2 = (dp_f - dp_b) / (2.0 * fd);
                let a = self.geo.laplacian_coefficient(t)?;
                let s = self.geo.scalar_curvature(t)?;
                let r = 6.0 * d2 + 6.0 * a * dphi + s * phi - phi * phi * phi;
                sq_sum += r * r;
                count += 1;
                r
            } else {
                0.0
            };
            samples.push(SolutionSample {
                t,
                phi,
                dphi,
                residual,
            });
        }
        let residual_rms = (sq_sum / count.max(1) as f64).sqrt();

        // Endpoint identities with the curvature fitted from integrated
        // values well beyond the seed offset.
        let t_fit = 1e-3 * beta;
        let (phi_fit, _) = eval(t_fit)?;
        let q_left = 2.0 * (phi_fit - s0) / (t_fit * t_fit);
        let id_left = (12.0 * q_left - s0 * (s0 * s0 - self.s_left)).abs();
        let (phi_fit_r, _) = eval(beta - t_fit)?;
        let q_right = 2.0 * (phi_fit_r - sb) / (t_fit * t_fit);
        let id_right = (12.0 * q_right - sb * (sb * sb - self.s_right)).abs();

        Ok(YamabeSolution {
            s0,
            s_beta: sb,
            lambda: 1.0,
            samples,
            residual_rms,
            gaps,
            newton_iters,
            endpoint_identity: (id_left, id_right),
        })
    }

    /// Compare two left shots, reproducing the difference-function argument.
    pub fn compare_pair(&self, s0_a: f64, s0_b: f64) -> Result<ComparisonReport, YamabeError> {
        if s0_a >= s0_b {
            return Err(YamabeError::InvalidInput("need s0_a < s0_b".into()));
        }
        let v = |x: f64| x * x * x - self.s_left * x;
        let tm = self.t_match();
        let shot_end = |outcome: &ShotOutcome| -> f64 {
            match outcome {
                ShotOutcome::Reached(t) => t.end_time(),
                ShotOutcome::BlewUp { t, .. } => *t,
            }
        };
        let a = self.shoot(true, s0_a, tm, &self.cfg.integrator)?;
        let b = self.shoot(true, s0_b, tm, &self.cfg.integrator)?;
        let t_end = shot_end(&a).min(shot_end(&b)) - 1e-9;
        let (ta, tb) = match (&a, &b) {
            (ShotOutcome::Reached(ta), ShotOutcome::Reached(tb)) => (ta, tb),
            (ShotOutcome::BlewUp { .. }, _) | (_, ShotOutcome::BlewUp { .. }) => {
                return Err(YamabeError::BlowUp {
                    t: t_end,
                    phi_abs: self.guard,
                })
            }
        };

        let eps = self.eps();
        let n = 400;
        let mut first_violation = None;
        for i in 0..=n {
            let t = eps + (t_end - eps) * i as f64 / n as f64;
            let fa = ta.eval(t)?;
            let fb = tb.eval(t)?;
            if fb[1] - fa[1] < 0.0 {
                first_violation = Some(t);
                break;
            }
        }
        Ok(ComparisonReport {
            f_at_zero: s0_b - s0_a,
            fpp_at_zero: (v(s0_b) - v(s0_a)) / 12.0,
            first_slope_violation: first_violation,
            checked_until: t_end,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::soliton::{build_profile, cao_root};
    use std::sync::OnceLock;

    /// Scalar curvature at the midpoint, frozen from an independent run.
    const S_MID: f64 = 3.734608716027;
    /// Solution boundary values, frozen from an independent double-shooting run.
    const S0_STAR: f64 = 2.0937559839386;
    const SB_STAR: f64 = 1.8823700248729;

    fn profile() -> &'static SolitonProfile {
        static CELL: OnceLock<SolitonProfile> = OnceLock::new();
        CELL.get_or_init(|| build_profile(cao_root().unwrap()).unwrap())
    }

    fn solution() -> &'static YamabeSolution {
        static CELL: OnceLock<YamabeSolution> = OnceLock::new();
        CELL.get_or_init(|| YamabeProblem::new(profile()).solve().unwrap())
    }

    #[test]
    fn rhs_balance_points() {
        let prob = YamabeProblem::new(profile());
        let t = 1.1;
        let s = prob.geometry().scalar_curvature(t).unwrap();
        // phi = sqrt(S(t)) with zero slope balances the reaction term.
        assert!(prob.rhs(t, s.sqrt(), 0.0).unwrap().abs() < 1e-14);
        // At a critical point the equation reduces to 6 phi'' = phi(phi^2 - S).
        let tm = prob.t_match();
        let s_mid = prob.geometry().scalar_curvature(tm).unwrap();
        assert!((s_mid - S_MID).abs() < 1e-6, "S(beta/2) = {s_mid}");
        let expected = (8.0 - 2.0 * s_mid) / 6.0;
        assert!((prob.rhs(tm, 2.0, 0.0).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn seeds_follow_the_endpoint_curvature() {
        let prob = YamabeProblem::new(profile());
        let s0_bound = prob.geometry().s_left().sqrt();
        let eps = 3e-4;

        // At the bound the seed is constant to second order.
        let (phi, dphi) = prob.seed_left(s0_bound, eps);
        assert!((phi - s0_bound).abs() < 1e-15 && dphi.abs() < 1e-15);

        // q = s0 (s0^2 - S(0)) / 12 at s0 = 2.
        let (phi, dphi) = prob.seed_left(2.0, eps);
        let q = dphi / eps;
        assert!((q - (-0.17587)).abs() < 1e-4, "q = {q}");
        assert!((phi - 2.0 - 0.5 * q * eps * eps).abs() < 1e-15);

        // Halving eps quarters the value offset.
        let (phi_half, _) = prob.seed_left(2.0, eps / 2.0);
        let ratio = (phi - 2.0) / (phi_half - 2.0);
        assert!((ratio - 4.0).abs() < 1e-3 * 4.0);

        // Right seed: zero curvature at the bound, mirrored slope sign.
        let sb_bound = prob.geometry().s_right().sqrt();
        let (phi, dphi) = prob.seed_right(sb_bound, eps);
        assert!((phi - sb_bound).abs() < 1e-15 && dphi.abs() < 1e-15);
        let (_, dphi) = prob.seed_right(1.8, eps);
        let q = -dphi / eps;
        assert!((q - 0.044295).abs() < 1e-4, "right q = {q}");
        assert!(dphi < 0.0, "slope decreases into beta when q > 0");
    }

    #[test]
    fn gaps_at_the_bound_extremes_are_nonzero() {
        let prob = YamabeProblem::new(profile());
        let s0 = prob.geometry().s_left().sqrt();
        let sb = prob.geometry().s_right().sqrt();
        let (vg, sg) = prob.shoot_pair(s0, sb).unwrap();
        assert!(vg.abs() > 0.1, "value gap {vg}");
        assert!(sg.abs() > 0.1, "slope gap {sg}");
    }

    #[test]
    fn shot_blows_up_beyond_the_guard() {
        let prob = YamabeProblem::new(profile());
        assert!(matches!(
            prob.shoot_pair(6.0, 1.8),
            Err(YamabeError::BlowUp { .. })
        ));
    }

    #[test]
    fn finite_difference_jacobian_is_stable() {
        let prob = YamabeProblem::new(profile());
        let (s0, sb) = (2.05, 1.85);
        let base = prob.shoot_pair(s0, sb).unwrap();
        let jac = |d: f64| {
            let g0 = prob.shoot_pair(s0 + d, sb).unwrap();
            let g1 = prob.shoot_pair(s0, sb + d).unwrap();
            [
                (g0.0 - base.0) / d,
                (g1.0 - base.0) / d,
                (g0.1 - base.1) / d,
                (g1.1 - base.1) / d,
            ]
        };
        let j1 = jac(1e-6);
        let j2 = jac(5e-7);
        for (a, b) in j1.iter().zip(&j2) {
            assert!((a - b).abs() < 1e-4, "{a} vs {b}");
        }
    }

    #[test]
    fn solve_matches_frozen_boundary_values() {
        let sol = solution();
        assert!((sol.s0 - S0_STAR).abs() < 1e-7, "s0 = {:.13}", sol.s0);
        assert!(
            (sol.s_beta - SB_STAR).abs() < 1e-7,
            "s_beta = {:.13}",
            sol.s_beta
        );
        assert!(sol.gaps.0.abs().max(sol.gaps.1.abs()) <= 1e-9);
        assert!(sol.residual_rms <= 1e-6, "rms = {}", sol.residual_rms);
        assert_eq!(sol.lambda, 1.0);
    }

    #[test]
    fn solution_is_decreasing_within_the_bounds() {
        let sol = solution();
        let prob = YamabeProblem::new(profile());
        let lo = prob.geometry().s_right().sqrt();
        let hi = prob.geometry().s_left().sqrt();
        assert!(lo < sol.s_beta && sol.s_beta < sol.s0 && sol.s0 < hi);
        assert!(1.716 < sol.s_beta && sol.s0 < 2.2483);
        assert!(sol.max_interior_slope() < 0.0);
        for s in &sol.samples {
            assert!(s.phi > 0.0);
        }
    }

    #[test]
    fn endpoint_identities_hold() {
        let sol = solution();
        assert!(sol.endpoint_identity.0 <= 1e-5, "{}", sol.endpoint_identity.0);
        assert!(sol.endpoint_identity.1 <= 1e-5, "{}", sol.endpoint_identity.1);
    }

    #[test]
    fn scan_has_exactly_one_sign_change() {
        let prob = YamabeProblem::new(profile());
        let records = prob
            .uniqueness_scan(prob.default_scan_range(), 64, 2)
            .unwrap();
        assert_eq!(records.len(), 64);
        assert_eq!(scan_sign_changes(&records), 1);

        let valid: Vec<&ScanRecord> = records.iter().filter(|r| r.miss.is_some()).collect();
        assert!(valid.len() >= 16, "only {} valid records", valid.len());
        let first = valid.first().unwrap().miss.unwrap();
        let last = valid.last().unwrap().miss.unwrap();
        assert!(
            first < 0.0 && last > 0.0,
            "extreme misses {first} and {last}"
        );

        // The bracket contains the solved left boundary value.
        let sol = solution();
        let bracket = records
            .windows(2)
            .find(|w| match (w[0].miss, w[1].miss) {
                (Some(a), Some(b)) => a.signum() * b.signum() < 0.0,
                _ => false,
            })
            .unwrap();
        assert!(bracket[0].s0 <= sol.s0 && sol.s0 <= bracket[1].s0);

        // Continuity: no jump dwarfs the typical increment.
        let misses: Vec<f64> = valid.iter().map(|r| r.miss.unwrap()).collect();
        let mut jumps: Vec<f64> = misses.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        jumps.sort_by(f64::total_cmp);
        let median = jumps[jumps.len() / 2];
        assert!(jumps.last().unwrap() <= &(10.0 * median));
    }

    #[test]
    fn parallel_scan_matches_serial() {
        let prob = YamabeProblem::new(profile());
        let range = (2.0, 2.2);
        let serial = prob.uniqueness_scan(range, 9, 1).unwrap();
        let parallel = prob.uniqueness_scan(range, 9, 4).unwrap();
        for (a, b) in serial.iter().zip(&parallel) {
            assert_eq!(a.s0, b.s0);
            assert_eq!(a.miss, b.miss);
            assert_eq!(a.s_beta, b.s_beta);
        }
    }

    #[test]
    fn comparison_report_matches_the_cubic() {
        let prob = YamabeProblem::new(profile());
        let report = prob.compare_pair(1.8, 2.0).unwrap();
        assert_eq!(report.f_at_zero, 2.0 - 1.8);
        let s0 = prob.geometry().s_left();
        let v = |x: f64| x * x * x - s0 * x;
        assert!((report.fpp_at_zero - (v(2.0) - v(1.8)) / 12.0).abs() < 1e-15);
        assert!(report.fpp_at_zero > 0.0);
        // v is increasing on (sqrt(S(0)/3), sqrt(S(0))).
        let x_lo = (s0 / 3.0).sqrt();
        assert!((x_lo - 1.2981).abs() < 1e-4);
        assert!(3.0 * 1.8 * 1.8 - s0 > 0.0, "v' > 0 at 1.8");
    }

    #[test]
    fn quotient_of_solution_is_finite_and_recorded() {
        // The energy quotient of the solved conformal factor, frozen from an
        // independent quadrature run. It sits slightly above the quotient of
        // the constant test function (32 pi at the default normalization).
        let sol = solution();
        let geo = crate::geometry::Geometry::new(profile());
        let y_sol = geo.yamabe_quotient(&sol.radial_function()).unwrap();
        assert!((y_sol - 101.520776).abs() < 1e-3, "Y(phi*) = {y_sol}");
        let one = crate::geometry::RadialFunction::constant(1.0, profile().grid(2001));
        let y_one = geo.yamabe_quotient(&one).unwrap();
        assert!(y_sol > y_one, "{y_sol} vs {y_one}");
    }

    #[test]
    fn solution_insensitive_to_matching_point_and_seed_offset() {
        let sol = solution();
        let mut cfg = ShootingConfig {
            t_match_frac: 1.0 / 3.0,
            ..ShootingConfig::default()
        };
        let moved = YamabeProblem::with_config(profile(), cfg).solve().unwrap();
        assert!((moved.s0 - sol.s0).abs() <= 1e-7);
        assert!((moved.s_beta - sol.s_beta).abs() <= 1e-7);

        cfg = ShootingConfig {
            eps_frac: 5e-5,
            ..ShootingConfig::default()
        };
        let halved = YamabeProblem::with_config(profile(), cfg).solve().unwrap();
        assert!((halved.s0 - sol.s0).abs() <= 1e-7);
        assert!((halved.s_beta - sol.s_beta).abs() <= 1e-7);
    }

    #[test]
    fn residual_shrinks_with_tighter_tolerances() {
        let loose_cfg = ShootingConfig {
            integrator: IntegratorConfig::default()
                .with_tolerances(1e-8, 1e-9)
                .with_max_step(0.25),
            ..ShootingConfig::default()
        };
        let loose = YamabeProblem::with_config(profile(), loose_cfg)
            .solve()
            .unwrap();
        let tight = solution();
        assert!(
            tight.residual_rms < loose.residual_rms,
            "{} !< {}",
            tight.residual_rms,
            loose.residual_rms
        );
    }
}
