//! The four pipeline commands: constant search, profile export, Yamabe solve,
//! and the invariant suite.

use crate::config::{C0Method, Settings};
use crate::output::{fmt_f64, OutputDir};
use koiso_cao::geometry::Geometry;
use koiso_cao::soliton::{build_profile, cao_k, cao_root, find_c0, C0Search, SolitonProfile};
use koiso_cao::yamabe::{scan_sign_changes, ScanRecord, ShootingConfig, YamabeProblem};

/// Command failure split by exit code: configuration errors exit with 2,
/// numerical failures with 1.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numeric(m) => m,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Numeric(format!("i/o error: {e}"))
    }
}

macro_rules! numeric_from {
    ($($ty:ty),*) => {$(
        impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::Numeric(e.to_string())
            }
        }
    )*};
}
numeric_from!(
    koiso_cao::SolitonError,
    koiso_cao::YamabeError,
    koiso_cao::GeometryError,
    koiso_cao::OdeError
);

/// Soliton constant from the settings: explicit override or bisection search.
fn resolve_c0(settings: &Settings) -> Result<(f64, Option<C0Search>), CliError> {
    if let Some(c) = settings.c {
        return Ok((c, None));
    }
    let search = find_c0((settings.bracket_lo, settings.bracket_hi), settings.c0_tol)?;
    Ok((search.c0, Some(search)))
}

pub fn cmd_find_c0(settings: &Settings) -> Result<(), CliError> {
    let mut out = OutputDir::new(&settings.out_dir, "find-c0", settings.resolved())?;
    println!("method = {}", settings.method.name());

    let shooting = match settings.method {
        C0Method::Shooting | C0Method::Both => {
            Some(find_c0((settings.bracket_lo, settings.bracket_hi), settings.c0_tol)?)
        }
        C0Method::CaoRoot => None,
    };
    let root = match settings.method {
        C0Method::CaoRoot | C0Method::Both => Some(cao_root()?),
        C0Method::Shooting => None,
    };

    let c0 = shooting.as_ref().map(|s| s.c0).or(root).expect("some method ran");
    println!("c0 = {c0:.16}");
    println!("k(c0) = {:.3e}", cao_k(c0));
    if let Some(search) = &shooting {
        println!("miss(c0) = {:.3e}", search.miss);
        println!("bracket history ({} steps):", search.history.len());
        for (i, step) in search.history.iter().enumerate() {
            println!(
                "  step {:3}: c = {:.16}  miss = {:+.6e}",
                i + 1,
                step.c,
                step.miss
            );
        }
    }
    if let (Some(search), Some(x)) = (&shooting, root) {
        println!("cao_root = {x:.16}");
        println!("|c0 - cao_root| = {:.3e}", (search.c0 - x).abs());
    }

    out.set_constants(c0, None);
    out.finish()?;
    Ok(())
}

/// CSV rows for the profile grid: `t,h,dh,d2h,d3h`.
fn profile_csv(profile: &SolitonProfile, grid: usize) -> String {
    let mut csv = String::from("t,h,dh,d2h,d3h\n");
    for t in profile.grid(grid) {
        let p = profile.eval(t).expect("grid point in-domain");
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(t),
            fmt_f64(p.h),
            fmt_f64(p.dh),
            fmt_f64(p.d2h),
            fmt_f64(p.d3h)
        ));
    }
    csv
}

/// CSV rows for curvature quantities: `t,f,u,ric_H,ric_Y,S,dS,w`.
fn curvature_csv(geo: &Geometry, grid: usize) -> Result<String, CliError> {
    let mut csv = String::from("t,f,u,ric_H,ric_Y,S,dS,w\n");
    for t in geo.profile().grid(grid) {
        let (ric_h, ric_y) = geo.ricci_components(t)?;
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            fmt_f64(t),
            fmt_f64(geo.warp_f(t)?),
            fmt_f64(geo.potential_u(t)?),
            fmt_f64(ric_h),
            fmt_f64(ric_y),
            fmt_f64(geo.scalar_curvature(t)?),
            fmt_f64(geo.scalar_derivative(t)?),
            fmt_f64(geo.volume_weight(t)?)
        ));
    }
    Ok(csv)
}

pub fn cmd_profile(settings: &Settings) -> Result<(), CliError> {
    let mut out = OutputDir::new(&settings.out_dir, "profile", settings.resolved())?;
    let (c0, _) = resolve_c0(settings)?;
    let profile = build_profile(c0)?;
    let mut geo = Geometry::new(&profile);
    geo.volume_constant = settings.volume_constant;

    out.set_constants(c0, Some(profile.beta()));
    out.emit("profile.csv", &profile_csv(&profile, settings.grid))?;
    out.emit("curvature.csv", &curvature_csv(&geo, settings.grid)?)?;
    out.finish()?;
    println!(
        "profile: c0 = {c0:.16}, beta = {:.16}, {} rows -> {}",
        profile.beta(),
        settings.grid,
        settings.out_dir.display()
    );
    Ok(())
}

fn scan_csv(records: &[ScanRecord]) -> String {
    let mut csv = String::from("s0,s_beta,miss\n");
    for r in records {
        csv.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(r.s0),
            fmt_f64(r.s_beta.unwrap_or(f64::NAN)),
            fmt_f64(r.miss.unwrap_or(f64::NAN))
        ));
    }
    csv
}

pub fn cmd_yamabe(settings: &Settings) -> Result<(), CliError> {
    let mut out = OutputDir::new(&settings.out_dir, "yamabe", settings.resolved())?;
    let (c0, _) = resolve_c0(settings)?;
    let profile = build_profile(c0)?;

    let cfg = ShootingConfig {
        eps_frac: settings.eps_frac,
        t_match_frac: settings.t_match_frac,
        grid: settings.grid,
        ..ShootingConfig::default()
    };
    let problem = YamabeProblem::with_config(&profile, cfg);
    let default_range = problem.default_scan_range();
    let range = (
        settings.scan_lo.unwrap_or(default_range.0),
        settings.scan_hi.unwrap_or(default_range.1),
    );
    let records = problem.uniqueness_scan(range, settings.scan_size, settings.jobs)?;
    let solution = problem.solve_from_scan(&records)?;

    let mut yamabe_csv = String::from("t,phi,dphi,residual\n");
    for s in &solution.samples {
        yamabe_csv.push_str(&format!(
            "{},{},{},{}\n",
            fmt_f64(s.t),
            fmt_f64(s.phi),
            fmt_f64(s.dphi),
            fmt_f64(s.residual)
        ));
    }

    let sqrt_s0 = problem.geometry().s_left().sqrt();
    let sqrt_sb = problem.geometry().s_right().sqrt();
    let summary = serde_json::json!({
        "c0": c0,
        "beta": profile.beta(),
        "s0": solution.s0,
        "s_beta": solution.s_beta,
        "lambda": solution.lambda,
        "residual_rms": solution.residual_rms,
        "gap_value": solution.gaps.0,
        "gap_slope": solution.gaps.1,
        "newton_iters": solution.newton_iters,
        "sign_changes": scan_sign_changes(&records),
        "scan_valid_records": records.iter().filter(|r| r.miss.is_some()).count(),
        "bound_lower_ok": sqrt_sb <= solution.s_beta,
        "bound_order_ok": solution.s_beta <= solution.s0,
        "bound_upper_ok": solution.s0 <= sqrt_s0,
        "decreasing": solution.max_interior_slope() < 0.0,
        "endpoint_identity_left": solution.endpoint_identity.0,
        "endpoint_identity_right": solution.endpoint_identity.1,
    });

    out.set_constants(c0, Some(profile.beta()));
    out.emit("yamabe.csv", &yamabe_csv)?;
    out.emit("scan.csv", &scan_csv(&records))?;
    out.emit(
        "summary.json",
        &format!("{}\n", serde_json::to_string_pretty(&summary).expect("flat json")),
    )?;
    out.finish()?;
    println!(
        "yamabe: phi(0) = {:.12}, phi(beta) = {:.12}, residual rms = {:.3e} -> {}",
        solution.s0,
        solution.s_beta,
        solution.residual_rms,
        settings.out_dir.display()
    );
    Ok(())
}
