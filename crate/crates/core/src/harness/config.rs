//! `key = value` run settings shared by the config file and the CLI.

use std::path::PathBuf;

use super::errors::ErrorConvention;
use super::study::{ProblemSpec, RunConfig, SolverChoice};
use crate::error::{Error, Result};
use crate::fem::GMode;
use crate::geometry::LevelSetParams;

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub levelset: String,
    pub radius: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub example: Option<u32>,
    pub n0: usize,
    /// Inverse mesh sizes.
    pub levels: Vec<usize>,
    pub solver: SolverChoice,
    pub g_mode: GMode,
    pub out: PathBuf,
    pub ratios: Option<Vec<f64>>,
    pub convention: ErrorConvention,
    pub tol: f64,
    pub max_iters: usize,
    betas_set: bool,
}

impl Default for Settings {
    fn default() -> Self {
        let run = RunConfig::default();
        Self {
            levelset: "circle".into(),
            radius: LevelSetParams::default().radius,
            beta1: 1.0,
            beta2: 1.0,
            example: None,
            n0: run.n0,
            levels: run.levels,
            solver: run.solver,
            g_mode: run.g_mode,
            out: PathBuf::from("out"),
            ratios: None,
            convention: run.convention,
            tol: run.mg.stopping_tol,
            max_iters: run.mg.max_iters,
            betas_set: false,
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("{key}: cannot parse '{v}'")))
}

/// Parses `2^-7`, `0.0078125` or `128` into an inverse mesh size.
pub fn parse_inv_h(v: &str) -> Result<usize> {
    let v = v.trim();
    let bad = || Error::InvalidArgument(format!("mesh size '{v}' (expected e.g. 2^-7, 0.0078125 or 128)"));
    if let Some(e) = v.strip_prefix("2^") {
        let e: i32 = e.parse().map_err(|_| bad())?;
        if !(-30..=0).contains(&e) {
            return Err(bad());
        }
        return Ok(1usize << (-e));
    }
    let x: f64 = v.parse().map_err(|_| bad())?;
    let inv = if x < 1.0 { 1.0 / x } else { x };
    let k = inv.round();
    if !(k >= 1.0) || (inv - k).abs() > 1e-9 * k {
        return Err(bad());
    }
    Ok(k as usize)
}

fn list<T>(v: &str, f: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    v.split(',').filter(|s| !s.trim().is_empty()).map(|s| f(s.trim())).collect()
}

impl Settings {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim().replace('_', "-").as_str() {
            "levelset" => self.levelset = value.to_string(),
            "radius" => self.radius = num(key, value)?,
            "beta1" => {
                self.beta1 = num(key, value)?;
                self.betas_set = true;
            }
            "beta2" => {
                self.beta2 = num(key, value)?;
                self.betas_set = true;
            }
            "example" => self.example = if value == "none" { None } else { Some(num(key, value)?) },
            "n0" => self.n0 = num(key, value)?,
            "levels" => self.levels = list(value, |s| num("levels", s))?,
            "h" => self.levels = list(value, parse_inv_h)?,
            "solver" => self.solver = value.parse()?,
            "g-mode" => self.g_mode = value.parse()?,
            "out" => self.out = PathBuf::from(value),
            "ratios" => self.ratios = Some(list(value, |s| num("ratios", s))?),
            "convention" => {
                self.convention = match value {
                    "element" => ErrorConvention::ElementRegion,
                    "interface" => ErrorConvention::TrueInterface,
                    _ => return Err(Error::InvalidArgument(format!("convention '{value}' (element or interface)"))),
                }
            }
            "tol" => self.tol = num(key, value)?,
            "max-iters" => self.max_iters = num(key, value)?,
            k => return Err(Error::InvalidArgument(format!("unknown setting '{k}'"))),
        }
        Ok(())
    }

    /// Applies a config file body: one `key = value` per line, `#` starts a
    /// comment.
    pub fn apply_config(&mut self, text: &str) -> Result<()> {
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("config line {}: expected key = value", no + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn betas_explicit(&self) -> bool {
        self.betas_set
    }

    pub fn spec(&self) -> Result<ProblemSpec> {
        let spec = match self.example {
            Some(id) => ProblemSpec::example(id, self.beta1, self.beta2)?,
            None => ProblemSpec { levelset: self.levelset.clone(), beta1: self.beta1, beta2: self.beta2, ..ProblemSpec::default() },
        };
        Ok(ProblemSpec { params: LevelSetParams { radius: self.radius }, ..spec })
    }

    pub fn run_config(&self) -> Result<RunConfig> {
        if self.levels.is_empty() {
            return Err(Error::InvalidArgument("levels must not be empty".into()));
        }
        let mut run = RunConfig {
            levels: self.levels.clone(),
            solver: self.solver,
            g_mode: self.g_mode,
            n0: self.n0,
            convention: self.convention,
            out_dir: Some(self.out.clone()),
            ..RunConfig::default()
        };
        run.mg.stopping_tol = self.tol;
        run.mg.max_iters = self.max_iters;
        run.ratios = match &self.ratios {
            Some(r) => r.clone(),
            None if self.betas_set => vec![self.beta1 / self.beta2],
            None => run.ratios,
        };
        Ok(run)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mesh_size_syntax() {
        assert_eq!(parse_inv_h("2^-7").unwrap(), 128);
        assert_eq!(parse_inv_h("0.0078125").unwrap(), 128);
        assert_eq!(parse_inv_h("32").unwrap(), 32);
        assert!(parse_inv_h("0.3").is_err());
        assert!(parse_inv_h("2^x").is_err());
    }

    #[test]
    fn config_then_override() {
        let mut s = Settings::default();
        s.apply_config("# sweep\nexample = 2\nbeta1 = 1e3 # ratio\n\nlevels = 16, 32\ng_mode = exact\n").unwrap();
        assert_eq!(s.example, Some(2));
        assert_eq!(s.levels, vec![16, 32]);
        assert_eq!(s.g_mode, GMode::Exact);
        s.set("levels", "64").unwrap();
        assert_eq!(s.levels, vec![64]);
        let run = s.run_config().unwrap();
        assert_eq!(run.ratios, vec![1e3]);
        assert_eq!(s.spec().unwrap().levelset, "cardioid");
        assert!(s.apply_config("nonsense").is_err());
        assert!(s.set("colour", "red").is_err());
    }
}
