//! Run configuration with the precedence chain defaults < config file < flags.
//!
//! The config file is a flat `key = value` list (a TOML-compatible subset):
//! blank lines and `#` comments are ignored, values are bare numbers or
//! strings, keys match the long flag names with underscores.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use koiso_cao::geometry::DEFAULT_VOLUME_CONSTANT;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum C0Method {
    Shooting,
    CaoRoot,
    Both,
}

impl C0Method {
    pub fn parse(s: &str) -> Result<Self, String> {
        match s {
            "shooting" => Ok(Self::Shooting),
            "cao-root" => Ok(Self::CaoRoot),
            "both" => Ok(Self::Both),
            other => Err(format!(
                "unknown method '{other}' (expected shooting, cao-root, or both)"
            )),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Shooting => "shooting",
            Self::CaoRoot => "cao-root",
            Self::Both => "both",
        }
    }
}

/// Fully resolved run settings; every command reads the subset it needs.
#[derive(Debug, Clone)]
pub struct Settings {
    pub out_dir: PathBuf,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub c0_tol: f64,
    pub method: C0Method,
    pub grid: usize,
    /// Explicit soliton constant; `None` means search for it.
    pub c: Option<f64>,
    pub scan_size: usize,
    pub scan_lo: Option<f64>,
    pub scan_hi: Option<f64>,
    pub eps_frac: f64,
    pub t_match_frac: f64,
    pub jobs: usize,
    pub volume_constant: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            out_dir: PathBuf::from("."),
            bracket_lo: -0.6,
            bracket_hi: -0.4,
            c0_tol: 1e-10,
            method: C0Method::Shooting,
            grid: 2001,
            c: None,
            scan_size: 64,
            scan_lo: None,
            scan_hi: None,
            eps_frac: 1e-4,
            t_match_frac: 0.5,
            jobs: 1,
            volume_constant: DEFAULT_VOLUME_CONSTANT,
        }
    }
}

impl Settings {
    /// Apply `key = value` pairs from a config file.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", lineno + 1))?;
            let key = key.trim();
            let value = value.trim().trim_matches('"');
            self.apply_kv(key, value)
                .map_err(|e| format!("line {}: {e}", lineno + 1))?;
        }
        Ok(())
    }

    fn apply_kv(&mut self, key: &str, value: &str) -> Result<(), String> {
        let f = |v: &str| -> Result<f64, String> {
            v.parse::<f64>().map_err(|_| format!("bad number '{v}'"))
        };
        let u = |v: &str| -> Result<usize, String> {
            v.parse::<usize>().map_err(|_| format!("bad count '{v}'"))
        };
        match key {
            "out_dir" => self.out_dir = PathBuf::from(value),
            "bracket_lo" => self.bracket_lo = f(value)?,
            "bracket_hi" => self.bracket_hi = f(value)?,
            "c0_tol" => self.c0_tol = f(value)?,
            "method" => self.method = C0Method::parse(value)?,
            "grid" => self.grid = u(value)?,
            "c" => self.c = Some(f(value)?),
            "scan_size" => self.scan_size = u(value)?,
            "scan_lo" => self.scan_lo = Some(f(value)?),
            "scan_hi" => self.scan_hi = Some(f(value)?),
            "eps_frac" => self.eps_frac = f(value)?,
            "t_match_frac" => self.t_match_frac = f(value)?,
            "jobs" => self.jobs = u(value)?,
            "volume_constant" => self.volume_constant = f(value)?,
            other => return Err(format!("unknown key '{other}'")),
        }
        Ok(())
    }

    /// Validate every numeric parameter against the module preconditions.
    pub fn validate(&self) -> Result<(), String> {
        if self.bracket_lo >= self.bracket_hi {
            return Err("bracket_lo must be below bracket_hi".into());
        }
        if !(self.c0_tol > 0.0 && self.c0_tol.is_finite()) {
            return Err("c0_tol must be positive".into());
        }
        if self.grid < 3 {
            return Err("grid needs at least 3 points".into());
        }
        if self.scan_size < 2 {
            return Err("scan_size needs at least 2 points".into());
        }
        if let (Some(lo), Some(hi)) = (self.scan_lo, self.scan_hi) {
            if lo >= hi {
                return Err("scan_lo must be below scan_hi".into());
            }
        }
        if !(self.eps_frac > 0.0 && self.eps_frac < 0.1) {
            return Err("eps_frac must lie in (0, 0.1)".into());
        }
        if !(self.t_match_frac > 2.0 * self.eps_frac && self.t_match_frac < 1.0 - 2.0 * self.eps_frac)
        {
            return Err("t_match_frac must lie strictly between the seed offsets".into());
        }
        if self.jobs == 0 {
            return Err("jobs must be at least 1".into());
        }
        if !(self.volume_constant > 0.0 && self.volume_constant.is_finite()) {
            return Err("volume_constant must be positive".into());
        }
        Ok(())
    }

    /// Flat view of the resolved configuration for the run manifest.
    pub fn resolved(&self) -> BTreeMap<String, String> {
        let mut map = BTreeMap::new();
        map.insert("out_dir".into(), self.out_dir.display().to_string());
        map.insert("bracket_lo".into(), format!("{:.16e}", self.bracket_lo));
        map.insert("bracket_hi".into(), format!("{:.16e}", self.bracket_hi));
        map.insert("c0_tol".into(), format!("{:.16e}", self.c0_tol));
        map.insert("method".into(), self.method.name().into());
        map.insert("grid".into(), self.grid.to_string());
        map.insert(
            "c".into(),
            self.c.map_or("auto".into(), |c| format!("{c:.16e}")),
        );
        map.insert("scan_size".into(), self.scan_size.to_string());
        map.insert(
            "scan_lo".into(),
            self.scan_lo.map_or("auto".into(), |v| format!("{v:.16e}")),
        );
        map.insert(
            "scan_hi".into(),
            self.scan_hi.map_or("auto".into(), |v| format!("{v:.16e}")),
        );
        map.insert("eps_frac".into(), format!("{:.16e}", self.eps_frac));
        map.insert("t_match_frac".into(), format!("{:.16e}", self.t_match_frac));
        map.insert("jobs".into(), self.jobs.to_string());
        map.insert(
            "volume_constant".into(),
            format!("{:.16e}", self.volume_constant),
        );
        map
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn file_overrides_defaults() {
        let dir = std::env::temp_dir();
        let path = dir.join(format!("kc-config-{}.cfg", std::process::id()));
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(f, "# comment\ngrid = 501\nc0_tol = 1e-9\nmethod = both").unwrap();
        let mut s = Settings::default();
        s.apply_file(&path).unwrap();
        std::fs::remove_file(&path).ok();
        assert_eq!(s.grid, 501);
        assert_eq!(s.c0_tol, 1e-9);
        assert_eq!(s.method, C0Method::Both);
    }

    #[test]
    fn unknown_key_rejected() {
        let mut s = Settings::default();
        assert!(s.apply_kv("no_such_key", "1").is_err());
    }

    #[test]
    fn validation_catches_bad_values() {
        let bad = [("grid", "2"), ("bracket_lo", "-0.3"), ("eps_frac", "0.4")];
        for (key, value) in bad {
            let mut s = Settings::default();
            s.apply_kv(key, value).unwrap();
            assert!(s.validate().is_err(), "{key} = {value} must be rejected");
        }
        assert!(Settings::default().validate().is_ok());
    }
}
