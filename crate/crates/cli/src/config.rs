//! Flat `key = value` configuration files merged under command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ermakov::scenarios::{ScenarioConfig, ScenarioName};
use ermakov::Error;

/// Settings collected from a file or from flags; `None` means unset.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub scenario: Option<ScenarioName>,
    pub kappa: Option<i32>,
    pub q: Option<f64>,
    pub h: Option<f64>,
    pub m: Option<f64>,
    pub b: Option<f64>,
    pub lambda: Option<f64>,
    pub n_index: Option<i32>,
    pub t0: Option<f64>,
    pub t1: Option<f64>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
}

fn config_error(field: &'static str, message: impl Into<String>) -> Error {
    Error::Config { field, message: message.into() }
}

fn parse<T: FromStr>(field: &'static str, raw: &str) -> Result<T, Error> {
    raw.parse().map_err(|_| config_error(field, format!("cannot parse `{raw}`")))
}

impl Overrides {
    /// Parses `key = value` lines; `#` starts a comment, blank lines are
    /// skipped and keys may use `-` or `_`.
    pub fn parse_flat(text: &str) -> Result<Self, Error> {
        let mut o = Overrides::default();
        let mut seen = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(config_error("config", format!("line {}: expected `key = value`", lineno + 1)));
            };
            let key = key.trim().replace('-', "_");
            let value = value.trim().trim_matches('"');
            if seen.insert(key.clone(), lineno).is_some() {
                return Err(config_error("config", format!("line {}: `{key}` given twice", lineno + 1)));
            }
            match key.as_str() {
                "scenario" => o.scenario = Some(value.parse()?),
                "kappa" => o.kappa = Some(parse("kappa", value)?),
                "Q" | "q" => o.q = Some(parse("Q", value)?),
                "h" => o.h = Some(parse("h", value)?),
                "m" => o.m = Some(parse("m", value)?),
                "b" => o.b = Some(parse("b", value)?),
                "lambda" => o.lambda = Some(parse("lambda", value)?),
                "n_index" => o.n_index = Some(parse("n_index", value)?),
                "t0" => o.t0 = Some(parse("t0", value)?),
                "t1" => o.t1 = Some(parse("t1", value)?),
                "tol" => o.tol = Some(parse("tol", value)?),
                "out" => o.out = Some(PathBuf::from(value)),
                other => return Err(config_error("config", format!("line {}: unknown key `{other}`", lineno + 1))),
            }
        }
        Ok(o)
    }

    pub fn from_file(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error("config", format!("cannot read {}: {e}", path.display())))?;
        Self::parse_flat(&text)
    }

    /// Fields set in `top` win over those set in `self`.
    pub fn under(self, top: Overrides) -> Overrides {
        Overrides {
            scenario: top.scenario.or(self.scenario),
            kappa: top.kappa.or(self.kappa),
            q: top.q.or(self.q),
            h: top.h.or(self.h),
            m: top.m.or(self.m),
            b: top.b.or(self.b),
            lambda: top.lambda.or(self.lambda),
            n_index: top.n_index.or(self.n_index),
            t0: top.t0.or(self.t0),
            t1: top.t1.or(self.t1),
            tol: top.tol.or(self.tol),
            out: top.out.or(self.out),
        }
    }

    /// Applies the settings over the scenario defaults and validates.
    pub fn resolve(&self) -> Result<ScenarioConfig, Error> {
        let name = self.scenario.ok_or_else(|| config_error("scenario", "no scenario given"))?;
        let mut c = ScenarioConfig::defaults(name);
        c.kappa = self.kappa.unwrap_or(c.kappa);
        c.q = self.q.unwrap_or(c.q);
        c.h = self.h.unwrap_or(c.h);
        c.m = self.m.unwrap_or(c.m);
        c.b = self.b.unwrap_or(c.b);
        c.lambda = self.lambda.unwrap_or(c.lambda);
        c.n_index = self.n_index.unwrap_or(c.n_index);
        c.window = (self.t0.unwrap_or(c.window.0), self.t1.unwrap_or(c.window.1));
        c.tol = self.tol.unwrap_or(c.tol);
        c.validate()?;
        Ok(c)
    }
}
