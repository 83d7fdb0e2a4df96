//! Substitution and flow configuration files (JSON or TOML).
//!
//! ```json
//! { "alphabet": 2, "images": ["12", "1112"], "roof": [1.0, 1.0] }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::algebraic::AlgebraicInteger;
use crate::error::{Error, Result};
use crate::substitution::Substitution;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub alphabet: usize,
    pub images: Vec<String>,
    /// Roof vector for the suspension flow; omitted means self-similar.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roof: Option<Vec<f64>>,
    /// Integer polynomial, highest degree first, for the Diophantine and
    /// Bernoulli commands.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poly: Option<Vec<i64>>,
}

impl Config {
    /// Parses JSON when the first non-blank character is `{`, TOML otherwise.
    pub fn parse_str(text: &str) -> Result<Config> {
        let cfg: Config = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| Error::Config(format!("JSON line {} column {}: {e}", e.line(), e.column())))?
        } else {
            toml::from_str(text).map_err(|e| {
                let at = e.span().map(|s| line_col(text, s.start)).map(|(l, c)| format!("TOML line {l} column {c}: ")).unwrap_or_default();
                Error::Config(format!("{at}{}", e.message()))
            })?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Config::parse_str(&text)
    }

    fn validate(&self) -> Result<()> {
        self.substitution()?;
        if let Some(r) = &self.roof {
            if r.len() != self.alphabet {
                return Err(Error::Config(format!("roof has {} entries for {} letters", r.len(), self.alphabet)));
            }
            if r.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
                return Err(Error::Config("roof entries must be positive and finite".into()));
            }
        }
        if let Some(p) = &self.poly {
            if p.len() < 2 || p[0] != 1 {
                return Err(Error::Config("poly must be monic of degree ≥ 1, highest coefficient first".into()));
            }
        }
        Ok(())
    }

    pub fn substitution(&self) -> Result<Substitution> {
        let refs: Vec<&str> = self.images.iter().map(String::as_str).collect();
        Substitution::parse(self.alphabet, &refs).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn algebraic(&self) -> Result<Option<AlgebraicInteger>> {
        self.poly.as_ref().map(|p| AlgebraicInteger::from_high_first(p)).transpose()
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |s| s.chars().count()) + 1;
    (line, col)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_and_toml_agree() {
        let a = Config::parse_str(r#"{ "alphabet": 2, "images": ["12", "1112"] }"#).unwrap();
        let b = Config::parse_str("alphabet = 2\nimages = [\"12\", \"1112\"]\n").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.substitution().unwrap().image(1), &[0, 0, 0, 1]);
    }

    #[test]
    fn malformed_reports_line() {
        let e = Config::parse_str("{\n \"alphabet\": 2,\n \"images\": [\"12\" \"1\"]\n}").unwrap_err();
        let Error::Config(msg) = e else { panic!() };
        assert!(msg.contains("line 3"), "{msg}");
        let e = Config::parse_str("alphabet = 2\nimages = [\"12\", \"3\"]\n").unwrap_err();
        assert!(matches!(e, Error::Config(_)));
        let e = Config::parse_str("alphabet = 2\nimages = [\"12\"\n").unwrap_err();
        let Error::Config(msg) = e else { panic!() };
        assert!(msg.contains("line"), "{msg}");
    }
}
