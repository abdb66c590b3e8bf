//! Parsing of angles, model selectors and seeds.

use std::f64::consts::PI;

use crate::error::{HvError, Result};
use crate::models::{
    anticorrelated_coin, discretize_paper_model, load_model, Model, PaperModel, SingletReference,
};

pub const DEFAULT_SEED: u64 = 42;
pub const SEED_ENV: &str = "HVLAB_SEED";

/// Parses decimal radians or a fraction of π such as `pi`, `pi/4`,
/// `3pi/4`, `3*pi/4` or `-pi/2`. A fraction `n·pi/d` resolves to `(n/d)·π`.
pub fn parse_angle(text: &str) -> std::result::Result<f64, String> {
    let s = text.trim();
    let bad = || format!("malformed angle `{text}` (expected radians or a fraction like 3pi/4)");
    let value = match s.find("pi") {
        None => s.parse::<f64>().map_err(|_| bad())?,
        Some(at) => {
            let (sign, head) = match &s[..at] {
                h if h.starts_with('-') => (-1.0, &h[1..]),
                h if h.starts_with('+') => (1.0, &h[1..]),
                h => (1.0, h),
            };
            let head = head.strip_suffix('*').unwrap_or(head).trim();
            let num = if head.is_empty() {
                1.0
            } else {
                head.parse::<f64>().map_err(|_| bad())?
            };
            let tail = s[at + 2..].trim();
            let den = match tail.strip_prefix('/') {
                Some(d) => d.trim().parse::<f64>().map_err(|_| bad())?,
                None if tail.is_empty() => 1.0,
                None => return Err(bad()),
            };
            if den == 0.0 {
                return Err(bad());
            }
            sign * (num / den) * PI
        }
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}

/// The selector as a file path, or `None` for a builtin model.
pub fn model_file_path(selector: &str) -> Option<&str> {
    let builtin = matches!(selector, "paper" | "singlet" | "local-coin")
        || selector.starts_with("paper-grid:");
    (!builtin).then_some(selector)
}

/// `paper`, `singlet`, `local-coin`, `paper-grid:N`, or a path to a model file.
pub fn resolve_model(selector: &str) -> Result<Model> {
    match selector {
        "paper" => Ok(Model::Paper(PaperModel)),
        "singlet" => Ok(Model::Singlet(SingletReference)),
        "local-coin" => Ok(Model::Discrete(anticorrelated_coin())),
        s => match s.strip_prefix("paper-grid:") {
            Some(n) => {
                let n = n.parse::<usize>().map_err(|_| {
                    HvError::Domain(format!("`{s}`: grid size must be a positive integer"))
                })?;
                Ok(Model::Discrete(discretize_paper_model(n)?))
            }
            None => Ok(Model::Discrete(load_model(s)?)),
        },
    }
}

/// Flag wins over the environment, which wins over [`DEFAULT_SEED`].
pub fn resolve_seed(flag: Option<u64>, env: Option<&str>) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match env {
        Some(v) => v
            .trim()
            .parse()
            .map_err(|_| HvError::Domain(format!("{SEED_ENV}=`{v}` is not an unsigned integer"))),
        None => Ok(DEFAULT_SEED),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn fractions_of_pi() {
        assert_eq!(parse_angle("pi/4").unwrap(), FRAC_PI_4);
        assert_eq!(parse_angle("3pi/4").unwrap(), 3.0 * FRAC_PI_4);
        assert_eq!(parse_angle("3*pi/4").unwrap(), 3.0 * FRAC_PI_4);
        assert_eq!(parse_angle("-pi/2").unwrap(), -FRAC_PI_2);
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert_eq!(parse_angle("2pi").unwrap(), 2.0 * PI);
        assert_eq!(parse_angle("0.5").unwrap(), 0.5);
    }

    #[test]
    fn malformed_angles() {
        for s in ["", "pie", "pi/0", "x", "pi/", "3pi4", "nan", "inf"] {
            assert!(parse_angle(s).is_err(), "{s}");
        }
    }

    #[test]
    fn seed_precedence() {
        assert_eq!(resolve_seed(Some(1), Some("2")).unwrap(), 1);
        assert_eq!(resolve_seed(None, Some("2")).unwrap(), 2);
        assert_eq!(resolve_seed(None, None).unwrap(), DEFAULT_SEED);
        assert!(resolve_seed(None, Some("x")).is_err());
    }

    #[test]
    fn builtin_selectors() {
        assert_eq!(resolve_model("paper").unwrap().name(), "paper");
        assert_eq!(
            resolve_model("paper-grid:8").unwrap().name(),
            "paper-grid:8"
        );
        assert!(resolve_model("paper-grid:x").is_err());
        assert!(matches!(
            resolve_model("/no/such/file.json"),
            Err(HvError::Io { .. })
        ));
    }
}
