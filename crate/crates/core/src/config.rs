//! Flat `key = value` run configuration.
//!
//! One entry per line; `#` starts a comment. List-valued keys (`gamma`,
//! `psi`, `phi`) are repeated, one element per line:
//!
//! ```text
//! energy = 5.0
//! width = 0.5
//! order = 2
//! gamma = 0.1            # γ(ω) = 0.1 + 0.02 ω
//! gamma = 0.02
//! psi = 1.0 1 1.0 0.0    # a m Re(c) Im(c): c/(ω − ia)^m
//! t_min = 0
//! t_max = 20
//! t_steps = 41
//! ```

use num_complex::Complex64;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::jordan::{GamowSubspace, Normalization};
use crate::smatrix::{BackgroundPhase, RationalTerm, RationalTestFunction, ResonancePole, SMatrixModel, TestFunctionPair};

#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        match self.steps {
            0 => Vec::new(),
            1 => vec![self.min],
            n => (0..n)
                .map(|i| {
                    if i == n - 1 {
                        self.max
                    } else {
                        self.min + (self.max - self.min) * i as f64 / (n - 1) as f64
                    }
                })
                .collect(),
        }
    }

    fn validate(&self, name: &str) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::ConfigInvalid(format!("{name} grid is empty")));
        }
        if !(self.min.is_finite() && self.max.is_finite()) || self.max < self.min {
            return Err(Error::ConfigInvalid(format!(
                "{name} grid needs finite bounds with min <= max, got [{}, {}]",
                self.min, self.max
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub energy: f64,
    pub width: f64,
    pub order: usize,
    pub gamma: Vec<f64>,
    pub absorb_gauge: bool,
    pub normalization: Normalization,
    pub psi: Vec<RationalTerm>,
    pub phi: Vec<RationalTerm>,
    pub time: Option<Grid>,
    pub energy_grid: Option<Grid>,
    /// Time at which `jordan-info` samples `T(t)`.
    pub t_sample: f64,
    pub output: Option<PathBuf>,
    pub format: Option<String>,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        text.parse()
    }

    pub fn pole(&self) -> Result<ResonancePole> {
        ResonancePole::new(self.energy, self.width, self.order).map_err(to_config)
    }

    pub fn model(&self) -> Result<SMatrixModel> {
        let background = match self.gamma.as_slice() {
            [] => BackgroundPhase::Constant(0.0),
            [c] => BackgroundPhase::Constant(*c),
            many => BackgroundPhase::Polynomial(many.to_vec()),
        };
        Ok(SMatrixModel::new(self.pole()?)
            .with_background(background)
            .map_err(to_config)?
            .with_absorb_gauge(self.absorb_gauge))
    }

    pub fn space(&self) -> Result<GamowSubspace> {
        Ok(GamowSubspace::new(self.pole()?, self.normalization))
    }

    pub fn pair(&self) -> TestFunctionPair {
        TestFunctionPair::new(
            RationalTestFunction::new(self.psi.clone()),
            RationalTestFunction::new(self.phi.clone()),
        )
    }

    pub fn time_points(&self) -> Result<Vec<f64>> {
        let grid = self.time.as_ref().ok_or_else(|| Error::ConfigInvalid("time grid is missing".into()))?;
        grid.validate("time")?;
        if grid.min < 0.0 {
            return Err(Error::ConfigInvalid(format!("times must be >= 0, got t_min = {}", grid.min)));
        }
        Ok(grid.points())
    }

    /// Energy grid, defaulting to `E_R ± 5Γ` with 1001 points.
    pub fn energy_points(&self) -> Result<Vec<f64>> {
        let grid = self.energy_grid.clone().unwrap_or(Grid {
            min: self.energy - 5.0 * self.width,
            max: self.energy + 5.0 * self.width,
            steps: 1001,
        });
        grid.validate("energy")?;
        Ok(grid.points())
    }
}

fn to_config(e: Error) -> Error {
    match e {
        Error::InvalidParameter(msg) => Error::ConfigInvalid(msg),
        other => other,
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str, line: usize) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::ConfigInvalid(format!("line {line}: cannot parse {key} = {value:?}")))
}

fn parse_term(key: &str, value: &str, line: usize) -> Result<RationalTerm> {
    let fields: Vec<&str> = value.split_whitespace().collect();
    let [a, m, re, im] = fields.as_slice() else {
        return Err(Error::ConfigInvalid(format!(
            "line {line}: {key} needs four fields `a m re im`, got {value:?}"
        )));
    };
    let a: f64 = parse_num(key, a, line)?;
    let m: u32 = parse_num(key, m, line)?;
    let c = Complex64::new(parse_num(key, re, line)?, parse_num(key, im, line)?);
    RationalTerm::new(a, m, c).map_err(|e| Error::ConfigInvalid(format!("line {line}: {e}")))
}

impl FromStr for RunConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut energy = None;
        let mut width = None;
        let mut order = None;
        let mut cfg = RunConfig {
            energy: 0.0,
            width: 0.0,
            order: 0,
            gamma: Vec::new(),
            absorb_gauge: true,
            normalization: Normalization::Derivative,
            psi: Vec::new(),
            phi: Vec::new(),
            time: None,
            energy_grid: None,
            t_sample: 1.0,
            output: None,
            format: None,
        };
        let (mut t_min, mut t_max, mut t_steps) = (None, None, None);
        let (mut e_min, mut e_max, mut e_steps) = (None, None, None);

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(Error::ConfigInvalid(format!("line {line}: expected `key = value`")));
            };
            let (key, value) = (key.trim(), value.trim());
            match key {
                "energy" => energy = Some(parse_num(key, value, line)?),
                "width" => width = Some(parse_num(key, value, line)?),
                "order" => order = Some(parse_num(key, value, line)?),
                "gamma" => cfg.gamma.push(parse_num(key, value, line)?),
                "absorb_gauge" => cfg.absorb_gauge = parse_num(key, value, line)?,
                "normalization" => {
                    cfg.normalization = value.parse().map_err(|e| Error::ConfigInvalid(format!("line {line}: {e}")))?
                }
                "psi" => cfg.psi.push(parse_term(key, value, line)?),
                "phi" => cfg.phi.push(parse_term(key, value, line)?),
                "t_min" => t_min = Some(parse_num(key, value, line)?),
                "t_max" => t_max = Some(parse_num(key, value, line)?),
                "t_steps" => t_steps = Some(parse_num(key, value, line)?),
                "e_min" => e_min = Some(parse_num(key, value, line)?),
                "e_max" => e_max = Some(parse_num(key, value, line)?),
                "e_steps" => e_steps = Some(parse_num(key, value, line)?),
                "t_sample" => cfg.t_sample = parse_num(key, value, line)?,
                "output" => cfg.output = Some(PathBuf::from(value)),
                "format" => cfg.format = Some(value.to_string()),
                other => return Err(Error::ConfigInvalid(format!("line {line}: unknown key {other:?}"))),
            }
        }

        let require = |v: Option<f64>, name: &str| v.ok_or_else(|| Error::ConfigInvalid(format!("missing {name}")));
        cfg.energy = require(energy, "energy")?;
        cfg.width = require(width, "width")?;
        cfg.order = order.ok_or_else(|| Error::ConfigInvalid("missing order".into()))?;
        cfg.pole()?;
        if cfg.t_sample.is_nan() || cfg.t_sample < 0.0 {
            return Err(Error::ConfigInvalid(format!("t_sample must be >= 0, got {}", cfg.t_sample)));
        }

        cfg.time = grid(t_min, t_max, t_steps, "t")?;
        cfg.energy_grid = grid(e_min, e_max, e_steps, "e")?;
        Ok(cfg)
    }
}

fn grid(min: Option<f64>, max: Option<f64>, steps: Option<usize>, prefix: &str) -> Result<Option<Grid>> {
    match (min, max, steps) {
        (None, None, None) => Ok(None),
        (Some(min), Some(max), Some(steps)) => Ok(Some(Grid { min, max, steps })),
        _ => Err(Error::ConfigInvalid(format!(
            "{prefix}_min, {prefix}_max and {prefix}_steps must be given together"
        ))),
    }
}
