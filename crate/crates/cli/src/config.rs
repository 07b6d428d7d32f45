//! Run options: built-in defaults, then a `key=value` file, then flags.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use regcorr::rc::Framework;

pub const KEYS: [&str; 6] = ["n", "levels", "a", "framework", "threshold", "out"];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub levels: usize,
    pub a: f64,
    pub framework: Framework,
    pub threshold: f64,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 16,
            levels: 5,
            a: 0.0,
            framework: Framework::Point,
            threshold: regcorr::detect::DetectionParams::default().score_threshold,
            out: None,
        }
    }
}

/// Flags given on the command line; `None` leaves the lower layer alone.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub n: Option<usize>,
    pub levels: Option<usize>,
    pub a: Option<f64>,
    pub framework: Option<Framework>,
    pub threshold: Option<f64>,
    pub out: Option<PathBuf>,
}

pub fn parse_framework(s: &str) -> Result<Framework> {
    match s {
        "point" => Ok(Framework::Point),
        "cell" => Ok(Framework::Cell),
        other => bail!("framework must be `point` or `cell`, got `{other}`"),
    }
}

impl RunConfig {
    /// Applies `key=value` lines. Blank lines and `#` comments are skipped;
    /// unknown keys are an error.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .with_context(|| format!("line {}: expected key=value", i + 1))?;
            let (key, value) = (key.trim(), value.trim());
            let ctx = || format!("line {}: bad value for `{key}`", i + 1);
            match key {
                "n" => self.n = value.parse().with_context(ctx)?,
                "levels" => self.levels = value.parse().with_context(ctx)?,
                "a" => self.a = value.parse().with_context(ctx)?,
                "framework" => self.framework = parse_framework(value).with_context(ctx)?,
                "threshold" => self.threshold = value.parse().with_context(ctx)?,
                "out" => self.out = Some(PathBuf::from(value)),
                other => bail!(
                    "line {}: unknown key `{other}` (known: {})",
                    i + 1,
                    KEYS.join(", ")
                ),
            }
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        self.apply_text(&text)
            .with_context(|| format!("in config {}", path.display()))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = o.n {
            self.n = v;
        }
        if let Some(v) = o.levels {
            self.levels = v;
        }
        if let Some(v) = o.a {
            self.a = v;
        }
        if let Some(v) = o.framework {
            self.framework = v;
        }
        if let Some(v) = o.threshold {
            self.threshold = v;
        }
        if let Some(v) = &o.out {
            self.out = Some(v.clone());
        }
    }

    pub fn detection(&self) -> regcorr::detect::DetectionParams {
        regcorr::detect::DetectionParams {
            score_threshold: self.threshold,
            ..Default::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layering() {
        let mut c = RunConfig::default();
        c.apply_text("# comment\nn = 64\nframework=cell\n\nthreshold=4.5\n")
            .unwrap();
        c.apply(&Overrides {
            n: Some(32),
            ..Default::default()
        });
        assert_eq!(c.n, 32);
        assert_eq!(c.framework, Framework::Cell);
        assert_eq!(c.threshold, 4.5);
        assert_eq!(c.levels, 5);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::default()
            .apply_text("n=8\ncolour=blue\n")
            .unwrap_err();
        assert!(err.to_string().contains("unknown key `colour`"));
        assert!(RunConfig::default().apply_text("levels=many").is_err());
        assert!(RunConfig::default().apply_text("just words").is_err());
    }
}
