//! Metric quantities along the profile: warp function, soliton potential,
//! Ricci components, scalar curvature, the radial Laplacian drift, volume
//! weight, and the Yamabe quotient.
//!
//! Sign convention: the Laplacian here is the geometers' positive one,
//! `L psi = -psi'' - a(t) psi'` with drift `a = h''/h' + 3h'/h`. Many
//! libraries use the opposite sign; every formula below follows this one.

use crate::soliton::{ProfilePoint, SolitonProfile};
use thiserror::Error;

/// Default orbit-volume normalization (Hopf fibration of the unit 3-sphere).
pub const DEFAULT_VOLUME_CONSTANT: f64 = 8.0 * std::f64::consts::PI * std::f64::consts::PI;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("time {t} outside the profile domain [0, {beta}]")]
    OutOfDomain { t: f64, beta: f64 },
    #[error("Laplacian drift singular at t = {t}: |h'| = {dh_abs} below threshold")]
    EndpointSingularity { t: f64, dh_abs: f64 },
    #[error("test function must be positive; found {value} at t = {t}")]
    NonPositiveTestFunction { t: f64, value: f64 },
    #[error("invalid radial function samples: {0}")]
    BadSamples(String),
}

/// Slope magnitude below which the drift coefficient is declared singular.
const SLOPE_THRESHOLD: f64 = 1e-12;
/// Step for the finite-difference second derivative of the warp function.
const FD_STEP: f64 = 1e-5;

/// Curvature data at one time.
#[derive(Debug, Clone, Copy)]
pub struct CurvatureSample {
    pub t: f64,
    /// `Ric(H, H) = Ric(X/f, X/f)` on the canonical profile.
    pub ric_h: f64,
    /// `Ric(Y/h, Y/h) = Ric(Z/h, Z/h)`.
    pub ric_y: f64,
    pub s: f64,
    pub ds: f64,
}

/// Read-only curvature view over an immutable profile.
///
/// The evaluation constant defaults to the profile's own `c`;
/// [`Geometry::with_constant`] deliberately mismatches it, which is how the
/// verification suite produces its negative controls.
#[derive(Clone, Copy)]
pub struct Geometry<'a> {
    profile: &'a SolitonProfile,
    c: f64,
    pub volume_constant: f64,
}

impl<'a> Geometry<'a> {
    pub fn new(profile: &'a SolitonProfile) -> Self {
        Self {
            profile,
            c: profile.c(),
            volume_constant: DEFAULT_VOLUME_CONSTANT,
        }
    }

    pub fn with_constant(profile: &'a SolitonProfile, c: f64) -> Self {
        Self {
            profile,
            c,
            volume_constant: DEFAULT_VOLUME_CONSTANT,
        }
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn beta(&self) -> f64 {
        self.profile.beta()
    }

    pub fn profile(&self) -> &'a SolitonProfile {
        self.profile
    }

    fn point(&self, t: f64) -> Result<ProfilePoint, GeometryError> {
        self.profile.eval(t).map_err(|_| GeometryError::OutOfDomain {
            t,
            beta: self.profile.beta(),
        })
    }

    /// Warp function of the collapsing Hopf fiber, `f = -h h'`.
    pub fn warp_f(&self, t: f64) -> Result<f64, GeometryError> {
        let p = self.point(t)?;
        Ok(-p.h * p.dh)
    }

    /// `f' = -(h'^2 + h h'')`, the closed-form derivative of the warp.
    pub fn warp_f_prime(&self, t: f64) -> Result<f64, GeometryError> {
        let p = self.point(t)?;
        Ok(-(p.dh * p.dh + p.h * p.d2h))
    }

    /// Soliton potential `u = -c h^2 / 2`.
    pub fn potential_u(&self, t: f64) -> Result<f64, GeometryError> {
        let p = self.point(t)?;
        Ok(-self.c * p.h * p.h / 2.0)
    }

    /// `u' = -c h h' = c f`, pointwise.
    pub fn potential_u_prime(&self, t: f64) -> Result<f64, GeometryError> {
        let p = self.point(t)?;
        Ok(-self.c * p.h * p.dh)
    }

    /// Diagonal Ricci components `(Ric(H,H), Ric(Y/h,Y/h))`.
    pub fn ricci_components(&self, t: f64) -> Result<(f64, f64), GeometryError> {
        let p = self.point(t)?;
        let ric_h = 1.0 + self.c * (p.h * p.d2h + p.dh * p.dh);
        let ric_y = 1.0 + self.c * p.dh * p.dh;
        Ok((ric_h, ric_y))
    }

    /// Scalar curvature `S = 4 c h'^2 + 2 c h h'' + 4`.
    pub fn scalar_curvature(&self, t: f64) -> Result<f64, GeometryError> {
        let p = self.point(t)?;
        Ok(4.0 * self.c * p.dh * p.dh + 2.0 * self.c * p.h * p.d2h + 4.0)
    }

    /// `S' = 10 c h' h'' + 2 c h h'''`.
    pub fn scalar_derivative(&self, t: f64) -> Result<f64, GeometryError> {
        let p = self.point(t)?;
        Ok(10.0 * self.c * p.dh * p.d2h + 2.0 * self.c * p.h * p.d3h)
    }

    /// Scalar curvature at the left endpoint.
    pub fn s_left(&self) -> f64 {
        self.scalar_curvature(0.0).expect("t = 0 is in-domain")
    }

    /// Scalar curvature at the right endpoint.
    pub fn s_right(&self) -> f64 {
        self.scalar_curvature(self.profile.beta())
            .expect("t = beta is in-domain")
    }

    /// Drift coefficient `a = h''/h' + 3 h'/h` of the radial Laplacian,
    /// singular like `1/t` at the endpoints.
    pub fn laplacian_coefficient(&self, t: f64) -> Result<f64, GeometryError> {
        let p = self.point(t)?;
        if p.dh.abs() < SLOPE_THRESHOLD {
            return Err(GeometryError::EndpointSingularity {
                t,
                dh_abs: p.dh.abs(),
            });
        }
        Ok(p.d2h / p.dh + 3.0 * p.dh / p.h)
    }

    /// Soliton-equation residuals at an interior time.
    ///
    /// The trace residual `S - L u - 4` (with `L u` assembled through the
    /// drift coefficient) is a floating-point consistency check: the closed
    /// forms cancel algebraically for any evaluation constant. The Hessian
    /// residual is the real test: it rebuilds the diagonal Ricci entries from
    /// the raw warp/profile formulas, with `f''` by centered differences of
    /// the closed-form `f'`, and reports the worst of the four directions of
    /// `Ric + Hess(u) - g`. A mismatched evaluation constant shows up here.
    pub fn soliton_residual(&self, t: f64) -> Result<(f64, f64), GeometryError> {
        let beta = self.profile.beta();
        if t < 2.0 * FD_STEP || t > beta - 2.0 * FD_STEP {
            return Err(GeometryError::EndpointSingularity {
                t,
                dh_abs: self.point(t)?.dh.abs(),
            });
        }
        let p = self.point(t)?;
        let a = self.laplacian_coefficient(t)?;
        let c = self.c;

        let u_p = -c * p.h * p.dh;
        let u_pp = -c * (p.dh * p.dh + p.h * p.d2h);
        let laplace_u = -u_p * a - u_pp;
        let s = self.scalar_curvature(t)?;
        let trace_residual = s - laplace_u - 4.0;

        let f = -p.h * p.dh;
        let f_p = -(p.dh * p.dh + p.h * p.d2h);
        let f_pp = (self.warp_f_prime(t + FD_STEP)? - self.warp_f_prime(t - FD_STEP)?)
            / (2.0 * FD_STEP);

        let ric_h_raw = -f_pp / f - 2.0 * p.d2h / p.h;
        let ric_x_raw = -f_pp / f - 2.0 * f_p * p.dh / (f * p.h)
            + 2.0 * f * f / (p.h * p.h * p.h * p.h);
        let ric_y_raw = -p.d2h / p.h - f_p * p.dh / (f * p.h) - p.dh * p.dh / (p.h * p.h)
            + 4.0 / (p.h * p.h)
            - 2.0 * f * f / (p.h * p.h * p.h * p.h);

        let res_h = ric_h_raw + u_pp - 1.0;
        let res_x = ric_x_raw + f_p * u_p / f - 1.0;
        let res_y = ric_y_raw + p.dh * u_p / p.h - 1.0;
        let hessian_residual = res_h.abs().max(res_x.abs()).max(res_y.abs());

        Ok((trace_residual, hessian_residual))
    }

    /// Relative orbit-volume density `w = f h^2` (normalization applied by
    /// the integral helpers).
    pub fn volume_weight(&self, t: f64) -> Result<f64, GeometryError> {
        let p = self.point(t)?;
        Ok(-p.h * p.dh * p.h * p.h)
    }

    /// Total volume by composite Simpson on an `n`-point uniform grid.
    pub fn total_volume(&self, n: usize) -> f64 {
        let grid = self.profile.grid(n);
        let w: Vec<f64> = grid
            .iter()
            .map(|&t| self.volume_weight(t).expect("grid point in-domain"))
            .collect();
        self.volume_constant * simpson(&grid, &w)
    }

    /// Full curvature sample at one time.
    pub fn sample(&self, t: f64) -> Result<CurvatureSample, GeometryError> {
        let (ric_h, ric_y) = self.ricci_components(t)?;
        Ok(CurvatureSample {
            t,
            ric_h,
            ric_y,
            s: self.scalar_curvature(t)?,
            ds: self.scalar_derivative(t)?,
        })
    }

    /// Yamabe quotient of a radial test function,
    /// `[int (6 phi'^2 + S phi^2) dv] / [int phi^4 dv]^(1/2)`.
    ///
    /// Scale-invariant in `phi`; the volume normalization enters both
    /// integrals and only rescales the quotient globally.
    pub fn yamabe_quotient(&self, phi: &RadialFunction) -> Result<f64, GeometryError> {
        phi.check()?;
        let n = phi.ts.len();
        let mut num = Vec::with_capacity(n);
        let mut den = Vec::with_capacity(n);
        for i in 0..n {
            let t = phi.ts[i];
            let w = self.volume_weight(t)? * self.volume_constant;
            let s = self.scalar_curvature(t)?;
            let (p, dp) = (phi.phi[i], phi.dphi[i]);
            num.push((6.0 * dp * dp + s * p * p) * w);
            den.push(p * p * p * p * w);
        }
        Ok(simpson(&phi.ts, &num) / simpson(&phi.ts, &den).sqrt())
    }
}

/// A radial (U(2)-invariant) test function sampled on an ascending grid.
#[derive(Debug, Clone)]
pub struct RadialFunction {
    pub ts: Vec<f64>,
    pub phi: Vec<f64>,
    pub dphi: Vec<f64>,
}

impl RadialFunction {
    pub fn new(ts: Vec<f64>, phi: Vec<f64>, dphi: Vec<f64>) -> Result<Self, GeometryError> {
        let rf = Self { ts, phi, dphi };
        rf.check_shape()?;
        Ok(rf)
    }

    /// The constant function on the given grid.
    pub fn constant(value: f64, ts: Vec<f64>) -> Self {
        let n = ts.len();
        Self {
            ts,
            phi: vec![value; n],
            dphi: vec![0.0; n],
        }
    }

    /// Pointwise positive rescaling.
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            ts: self.ts.clone(),
            phi: self.phi.iter().map(|v| k * v).collect(),
            dphi: self.dphi.iter().map(|v| k * v).collect(),
        }
    }

    fn check_shape(&self) -> Result<(), GeometryError> {
        if self.ts.len() < 3 || self.ts.len() != self.phi.len() || self.ts.len() != self.dphi.len()
        {
            return Err(GeometryError::BadSamples(
                "need >= 3 samples with matching lengths".into(),
            ));
        }
        if self.ts.windows(2).any(|w| w[1] <= w[0]) {
            return Err(GeometryError::BadSamples("grid must be ascending".into()));
        }
        Ok(())
    }

    fn check(&self) -> Result<(), GeometryError> {
        self.check_shape()?;
        for (t, v) in self.ts.iter().zip(&self.phi) {
            if v.is_nan() || *v <= 0.0 {
                return Err(GeometryError::NonPositiveTestFunction { t: *t, value: *v });
            }
        }
        Ok(())
    }
}

/// Composite Simpson on a uniform grid; a 3/8 tail handles an odd interval
/// count.
pub fn simpson(xs: &[f64], ys: &[f64]) -> f64 {
    assert!(xs.len() == ys.len() && xs.len() >= 3);
    let n = xs.len() - 1;
    let h = (xs[n] - xs[0]) / n as f64;
    let simpson_chunk = |lo: usize, hi: usize| -> f64 {
        let mut acc = ys[lo] + ys[hi];
        for (offset, &y) in ys[lo + 1..hi].iter().enumerate() {
            acc += if offset % 2 == 0 { 4.0 } else { 2.0 } * y;
        }
        acc * h / 3.0
    };
    if n.is_multiple_of(2) {
        simpson_chunk(0, n)
    } else if n >= 4 {
        let tail = 3.0 * h / 8.0 * (ys[n - 3] + 3.0 * ys[n - 2] + 3.0 * ys[n - 1] + ys[n]);
        simpson_chunk(0, n - 3) + tail
    } else {
        // Three intervals total: single 3/8 rule.
        3.0 * h / 8.0 * (ys[0] + 3.0 * ys[1] + 3.0 * ys[2] + ys[3])
    }
}
