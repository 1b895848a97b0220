use crate::error::{Error, Result};

/// Numeric tolerances shared by every module.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Config {
    /// Relative magnitude below which a series term is dropped.
    pub series_tol: f64,
    /// Residual at which a Newton iteration is accepted.
    pub newton_tol: f64,
    /// Relative tolerance of the adaptive ODE integrator.
    pub ode_rtol: f64,
    /// Threshold under which a scalar counts as zero.
    pub zero_tol: f64,
    /// Minimal admissible distance to a lattice pole.
    pub pole_floor: f64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            series_tol: 1e-18,
            newton_tol: 1e-12,
            ode_rtol: 1e-11,
            zero_tol: 1e-10,
            pole_floor: 1e-8,
        }
    }
}

impl Config {
    /// Parses `key = value` lines; `#` starts a comment, unknown keys are rejected.
    pub fn parse(text: &str) -> Result<Config> {
        let mut cfg = Config::default();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", no + 1)))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("line {}: bad number `{}`", no + 1, value.trim())))?;
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::Config(format!("line {}: value must be positive", no + 1)));
            }
            match key.trim() {
                "series_tol" => cfg.series_tol = value,
                "newton_tol" => cfg.newton_tol = value,
                "ode_rtol" => cfg.ode_rtol = value,
                "zero_tol" => cfg.zero_tol = value,
                "pole_floor" => cfg.pole_floor = value,
                other => return Err(Error::Config(format!("line {}: unknown key `{}`", no + 1, other))),
            }
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_overrides_and_comments() {
        let cfg = Config::parse("# tolerances\nzero_tol = 1e-9\n\npole_floor=1e-7 # tighter\n").unwrap();
        assert_eq!(cfg.zero_tol, 1e-9);
        assert_eq!(cfg.pole_floor, 1e-7);
        assert_eq!(cfg.series_tol, Config::default().series_tol);
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        assert!(Config::parse("bogus = 1").is_err());
        assert!(Config::parse("zero_tol 1").is_err());
        assert!(Config::parse("zero_tol = -1").is_err());
    }
}
