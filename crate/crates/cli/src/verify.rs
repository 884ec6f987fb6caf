//! The `verify` command: run every module's invariant checks and print a
//! pass/fail table.

use crate::commands::CliError;
use crate::config::Settings;
use koiso_cao::geometry::{Geometry, RadialFunction};
use koiso_cao::ode::{
    convergence_order, integrate, EventDirection, EventSpec, FixedScheme, IntegratorConfig,
};
use koiso_cao::soliton::{
    build_profile, cao_root, find_c0, first_minimum, SolitonParams, SQRT2, SQRT6,
};
use koiso_cao::yamabe::{scan_sign_changes, ShootingConfig, YamabeProblem};

struct CheckTable {
    results: Vec<(String, bool, String)>,
}

impl CheckTable {
    fn new() -> Self {
        Self {
            results: Vec::new(),
        }
    }

    fn push(&mut self, name: &str, ok: bool, detail: String) {
        println!("[{}] {name:<24} {detail}", if ok { "PASS" } else { "FAIL" });
        self.results.push((name.into(), ok, detail));
    }

    fn finish(self) -> Result<(), CliError> {
        let failed: Vec<&(String, bool, String)> =
            self.results.iter().filter(|(_, ok, _)| !ok).collect();
        println!(
            "verification: {}/{} checks passed",
            self.results.len() - failed.len(),
            self.results.len()
        );
        match failed.first() {
            None => Ok(()),
            Some((name, _, detail)) => Err(CliError::Numeric(format!(
                "invariant '{name}' failed: {detail}"
            ))),
        }
    }
}

pub fn cmd_verify(settings: &Settings, quick: bool) -> Result<(), CliError> {
    let mut table = CheckTable::new();
    let tau = 2.0 * std::f64::consts::PI;
    let oscillator = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
    let decay = |_t: f64, y: &[f64; 1]| [-y[0]];

    // Integrator order on problems with closed-form endpoints.
    let p5 = convergence_order(
        oscillator,
        [1.0, 0.0],
        0.0,
        tau,
        [1.0, 0.0],
        32,
        FixedScheme::Dopri5,
    );
    let p4 = convergence_order(
        oscillator,
        [1.0, 0.0],
        0.0,
        tau,
        [1.0, 0.0],
        32,
        FixedScheme::ClassicRk4,
    );
    table.push(
        "integrator-order",
        p5 >= 3.8 && (3.8..=4.2).contains(&p4),
        format!("adaptive pair {p5:.2}, classic four-stage {p4:.2}"),
    );

    // Forward-backward round trip within the documented budget.
    let cfg = IntegratorConfig::default();
    let fwd = integrate(oscillator, [1.0, 0.0], 0.0, tau, &cfg, &[])?;
    let back = integrate(oscillator, fwd.end_state(), tau, 0.0, &cfg, &[])?;
    let rt = (back.end_state()[0] - 1.0)
        .abs()
        .max(back.end_state()[1].abs());
    let budget = 10.0 * (cfg.rel_tol + cfg.abs_tol);
    table.push(
        "integrator-round-trip",
        rt <= budget,
        format!("return error {rt:.2e} (budget {budget:.2e})"),
    );

    // Event time must not depend on the step ceiling.
    let half_life = |cfg: IntegratorConfig| -> Result<f64, CliError> {
        let ev = EventSpec::new(EventDirection::Falling, true, |_t, y: &[f64; 1]| y[0] - 0.5);
        Ok(integrate(decay, [1.0], 0.0, 10.0, &cfg, &[ev])?.end_time())
    };
    let dt = (half_life(cfg)? - half_life(cfg.with_max_step(0.03))?).abs();
    table.push(
        "event-max-step",
        dt <= 1e-9,
        format!("event-time shift {dt:.2e} under max_step change"),
    );

    // Soliton constant: search against the closed-form root.
    let root = cao_root()?;
    let c0 = if quick {
        root
    } else {
        let search = find_c0((settings.bracket_lo, settings.bracket_hi), settings.c0_tol)?;
        let agree = (search.c0 - root).abs();
        table.push(
            "constant-agreement",
            agree <= 1e-8,
            format!("|shooting - root| = {agree:.2e}"),
        );
        search.c0
    };

    let profile = build_profile(c0)?;
    let beta = profile.beta();
    // An explicit --c mismatches the evaluation constant against the
    // canonical profile; the identity checks below are the negative control.
    let c_eval = settings.c.unwrap_or(c0);
    let mut geo = Geometry::with_constant(&profile, c_eval);
    geo.volume_constant = settings.volume_constant;

    let left = profile.eval(0.0)?;
    let right = profile.eval(beta)?;
    table.push(
        "profile-boundary",
        (right.h - SQRT2).abs() <= 1e-8
            && (left.h * left.d2h + 1.0).abs() <= 1e-6
            && (right.h * right.d2h - 1.0).abs() <= 1e-6,
        format!(
            "|h(b)-sqrt2| = {:.1e}, |h h''+1|(0) = {:.1e}, |h h''-1|(b) = {:.1e}",
            (right.h - SQRT2).abs(),
            (left.h * left.d2h + 1.0).abs(),
            (right.h * right.d2h - 1.0).abs()
        ),
    );

    // Profile equation residual with an interpolation-only second derivative.
    let grid = profile.grid(201);
    let fd = 1e-5;
    let mut worst = 0.0f64;
    for &t in &grid[1..200] {
        let p = profile.eval(t)?;
        let d2 = (profile.eval(t + fd)?.dh - profile.eval(t - fd)?.dh) / (2.0 * fd);
        let res = 2.0 * p.h * d2 + 4.0 * p.dh * p.dh - 4.0
            + p.h * p.h * (1.0 + profile.c() * p.dh * p.dh);
        worst = worst.max(res.abs());
    }
    table.push(
        "profile-ode-residual",
        worst <= 1e-7,
        format!("max interpolated residual {worst:.2e}"),
    );

    // Range and slope-sign structure of the orbit.
    let mut range_ok = true;
    let mut slope_ok = true;
    for (i, &t) in grid.iter().enumerate() {
        let p = profile.eval(t)?;
        range_ok &= p.h >= SQRT2 - 1e-9 && p.h <= SQRT6 + 1e-9;
        if i > 0 && i + 1 < grid.len() {
            slope_ok &= p.dh < 0.0;
        }
    }
    table.push(
        "profile-range",
        range_ok && slope_ok,
        format!("sqrt2 <= h <= sqrt6: {range_ok}, interior h' < 0: {slope_ok}"),
    );

    // First-minimum value strictly decreasing in c.
    let cs = [-0.60, -0.55, -0.50, -0.45];
    let mut ms = Vec::new();
    for &c in &cs {
        ms.push(first_minimum(&SolitonParams::shooting(c))?.m_c);
    }
    let monotone = ms.windows(2).all(|w| w[0] > w[1]);
    table.push(
        "minimum-monotone",
        monotone,
        format!("m over c grid = {ms:.6?}"),
    );

    // Algebraic trace of the diagonal Ricci.
    let mut trace_ok = true;
    for &t in &grid {
        let (rh, ry) = geo.ricci_components(t)?;
        trace_ok &= (geo.scalar_curvature(t)? - 2.0 * (rh + ry)).abs() <= 1e-12;
    }
    table.push(
        "ricci-trace",
        trace_ok,
        "S = 2 ric_H + 2 ric_Y at every sample".into(),
    );

    // Soliton equation residuals; sensitive to a mismatched constant.
    let mut worst_trace = 0.0f64;
    let mut worst_hess = 0.0f64;
    for &t in &grid[1..200] {
        let (tr, hess) = geo.soliton_residual(t)?;
        worst_trace = worst_trace.max(tr.abs());
        worst_hess = worst_hess.max(hess);
    }
    table.push(
        "soliton-identity",
        worst_trace <= 1e-8 && worst_hess <= 1e-5,
        format!("trace {worst_trace:.2e}, componentwise {worst_hess:.2e}"),
    );

    let mut min_rh = f64::INFINITY;
    let mut min_ry = f64::INFINITY;
    let mut claim_ok = true;
    let mut fp_ok = true;
    for (i, &t) in grid.iter().enumerate() {
        let (rh, ry) = geo.ricci_components(t)?;
        min_rh = min_rh.min(rh);
        min_ry = min_ry.min(ry);
        let p = profile.eval(t)?;
        claim_ok &= 1.0 + c_eval * p.dh * p.dh > 0.0;
        if i + 1 < grid.len() {
            fp_ok &= geo.warp_f_prime(t)? > -1.0;
        }
    }
    table.push(
        "ricci-positivity",
        min_rh > 0.0 && min_ry > 0.0 && claim_ok && fp_ok,
        format!("min ric_H = {min_rh:.4}, min ric_Y = {min_ry:.4}"),
    );

    let (s0v, sbv) = (geo.s_left(), geo.s_right());
    table.push(
        "scalar-endpoints",
        (s0v - 5.0552).abs() <= 5e-4
            && (sbv - 2.9447).abs() <= 5e-4
            && (s0v + sbv - 8.0).abs() <= 1e-10,
        format!("S(0) = {s0v:.5}, S(beta) = {sbv:.5}"),
    );

    let mut decreasing = true;
    let mut prev = f64::INFINITY;
    let mut interior_ds_ok = true;
    for (i, &t) in grid.iter().enumerate() {
        let s = geo.scalar_curvature(t)?;
        decreasing &= s < prev;
        prev = s;
        if i > 0 && i + 1 < grid.len() {
            interior_ds_ok &= geo.scalar_derivative(t)? < 0.0;
        }
    }
    table.push(
        "scalar-monotone",
        decreasing && interior_ds_ok,
        format!("decreasing = {decreasing}, interior S' < 0 = {interior_ds_ok}"),
    );

    let volume = geo.total_volume(2001) / geo.volume_constant;
    let volume_fine = geo.total_volume(4001) / geo.volume_constant;
    table.push(
        "volume-quadrature",
        (volume - 8.0).abs() <= 8e-8 && (volume - volume_fine).abs() <= 8e-8,
        format!("int w dt = {volume:.12} (exact 8)"),
    );

    let one = RadialFunction::constant(1.0, profile.grid(2001));
    let y1 = geo.yamabe_quotient(&one)?;
    let y2 = geo.yamabe_quotient(&one.scaled(2.0))?;
    let vol_identity = (y1 - 4.0 * geo.total_volume(2001).sqrt()).abs();
    table.push(
        "quotient-invariance",
        (y1 - y2).abs() <= 1e-10 * y1 && vol_identity <= 1e-6 * y1,
        format!("Y(1) = {y1:.8}, scale drift {:.1e}", (y1 - y2).abs()),
    );

    if !quick {
        let problem = YamabeProblem::new(&profile);
        let records = problem.uniqueness_scan(problem.default_scan_range(), settings.scan_size, settings.jobs)?;
        let solution = problem.solve_from_scan(&records)?;
        let gap = solution.gaps.0.abs().max(solution.gaps.1.abs());
        table.push(
            "yamabe-solution",
            gap <= 1e-9
                && solution.residual_rms <= 1e-6
                && 1.716 < solution.s_beta
                && solution.s_beta < solution.s0
                && solution.s0 < 2.2483
                && solution.max_interior_slope() < 0.0,
            format!(
                "phi(0) = {:.10}, phi(beta) = {:.10}, rms = {:.2e}",
                solution.s0, solution.s_beta, solution.residual_rms
            ),
        );
        table.push(
            "yamabe-scan",
            scan_sign_changes(&records) == 1,
            format!("{} sign changes over the admissible range", scan_sign_changes(&records)),
        );
        table.push(
            "endpoint-regularity",
            solution.endpoint_identity.0 <= 1e-5 && solution.endpoint_identity.1 <= 1e-5,
            format!(
                "identity residuals {:.2e} / {:.2e}",
                solution.endpoint_identity.0, solution.endpoint_identity.1
            ),
        );

        let moved = YamabeProblem::with_config(
            &profile,
            ShootingConfig {
                t_match_frac: 1.0 / 3.0,
                ..ShootingConfig::default()
            },
        )
        .solve()?;
        let halved = YamabeProblem::with_config(
            &profile,
            ShootingConfig {
                eps_frac: 5e-5,
                ..ShootingConfig::default()
            },
        )
        .solve()?;
        let shift = (moved.s0 - solution.s0)
            .abs()
            .max((moved.s_beta - solution.s_beta).abs())
            .max((halved.s0 - solution.s0).abs())
            .max((halved.s_beta - solution.s_beta).abs());
        table.push(
            "yamabe-insensitivity",
            shift <= 1e-7,
            format!("max boundary shift {shift:.2e} under eps/t_match changes"),
        );
    }

    table.finish()
}
