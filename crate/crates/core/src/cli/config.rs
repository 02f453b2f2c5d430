//! Experiment configuration: flat `key = value` file grammar with
//! comma-separated lists, overridable by CLI flags. A config (plus the
//! build) fully determines the output bytes of the deterministic reports.

use std::path::{Path, PathBuf};

use crate::engine::Method;
use crate::error::{Error, Result};
use crate::products::{MarketParams, ProductKind};

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub products: Vec<ProductKind>,
    pub strikes: Vec<f64>,
    pub steps: Vec<usize>,
    pub methods: Vec<Method>,
    pub paths: usize,
    pub runs: usize,
    /// Path counts for the error-vs-paths curves, before the budget cap.
    pub path_sweep: Vec<usize>,
    /// Budget cap applied to the sweep (keeps the default grid affordable).
    pub sweep_cap: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// 0 means use all available cores.
    pub workers: usize,
    pub block_size: usize,
    pub s0: f64,
    pub sigma: f64,
    pub rate: f64,
    pub maturity: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            products: vec![
                ProductKind::ArithmeticAsian,
                ProductKind::BinaryAsian,
                ProductKind::Lookback,
            ],
            strikes: vec![90.0, 100.0, 110.0],
            steps: vec![64, 256],
            methods: Method::ALL.to_vec(),
            paths: 1 << 13,
            runs: 50,
            path_sweep: (12..=19).map(|i| 1usize << i).collect(),
            sweep_cap: 1 << 16,
            seed: 7,
            out_dir: PathBuf::from("out"),
            workers: 0,
            block_size: 64,
            s0: 100.0,
            sigma: 0.2,
            rate: 0.1,
            maturity: 1.0,
        }
    }
}

impl ExperimentConfig {
    pub fn market(&self) -> Result<MarketParams> {
        MarketParams::new(self.s0, self.sigma, self.rate, self.maturity)
    }

    /// The sweep after the budget cap.
    pub fn effective_sweep(&self) -> Vec<usize> {
        self.path_sweep
            .iter()
            .copied()
            .filter(|&p| p <= self.sweep_cap)
            .collect()
    }

    pub fn effective_workers(&self) -> usize {
        if self.workers == 0 {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        } else {
            self.workers
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    /// Applies `key = value` lines on top of the current values.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "config line {}: expected 'key = value', got '{line}'",
                    lineno + 1
                ))
            })?;
            self.set(key.trim(), value.trim()).map_err(|e| {
                Error::Config(format!("config line {}: {e}", lineno + 1))
            })?;
        }
        Ok(())
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "products" => {
                self.products = split_list(value)
                    .map(ProductKind::parse)
                    .collect::<Result<_>>()?
            }
            "strikes" => self.strikes = parse_list(value, "strike")?,
            "steps" => self.steps = parse_list(value, "steps")?,
            "methods" => {
                self.methods = split_list(value)
                    .map(Method::parse)
                    .collect::<Result<_>>()?
            }
            "paths" => self.paths = parse_one(value, "paths")?,
            "runs" => self.runs = parse_one(value, "runs")?,
            "path_sweep" => self.path_sweep = parse_list(value, "path_sweep")?,
            "sweep_cap" => self.sweep_cap = parse_one(value, "sweep_cap")?,
            "seed" => self.seed = parse_one(value, "seed")?,
            "out" => self.out_dir = PathBuf::from(value),
            "workers" => self.workers = parse_one(value, "workers")?,
            "block_size" => self.block_size = parse_one(value, "block_size")?,
            "s0" => self.s0 = parse_one(value, "s0")?,
            "sigma" => self.sigma = parse_one(value, "sigma")?,
            "rate" => self.rate = parse_one(value, "rate")?,
            "maturity" => self.maturity = parse_one(value, "maturity")?,
            other => {
                return Err(Error::Config(format!("unknown config key '{other}'")));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.products.is_empty()
            || self.strikes.is_empty()
            || self.steps.is_empty()
            || self.methods.is_empty()
        {
            return Err(Error::Config(
                "products, strikes, steps and methods must be non-empty".into(),
            ));
        }
        if self.paths == 0 || self.runs == 0 {
            return Err(Error::Config("paths and runs must be positive".into()));
        }
        self.market()?;
        for &s in &self.strikes {
            if !(s > 0.0) {
                return Err(Error::Config(format!("strikes must be positive, got {s}")));
            }
        }
        for &d in &self.steps {
            if d == 0 {
                return Err(Error::Config("steps must be positive".into()));
            }
        }
        Ok(())
    }
}

fn split_list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_list<T: std::str::FromStr>(value: &str, what: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    split_list(value)
        .map(|item| {
            item.parse::<T>()
                .map_err(|e| Error::Config(format!("bad {what} value '{item}': {e}")))
        })
        .collect()
}

fn parse_one<T: std::str::FromStr>(value: &str, what: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| Error::Config(format!("bad {what} value '{value}': {e}")))
}
