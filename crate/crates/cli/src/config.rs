//! Run configuration: defaults, then a TOML file, then flags.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;
use sip_sampling::{Complex64, Exponent, SamplingSystem};

use crate::UsageError;

/// Names the config file when `--config` is absent.
pub const CONFIG_ENV: &str = "SIPSAMP_CONFIG";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Sampling weights: one value for all `j`, or per-index overrides of 1.
#[derive(Debug, Clone, PartialEq)]
pub enum Weights {
    Uniform(Complex64),
    PerIndex(Vec<(i64, Complex64)>),
}

impl FromStr for Weights {
    type Err = String;

    /// `2`, `1+0.5i`, or `0=2,3=1-1i`.
    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if !s.contains('=') {
            return parse_complex(s).map(Weights::Uniform);
        }
        s.split(',')
            .map(|item| {
                let (j, v) = item
                    .split_once('=')
                    .ok_or_else(|| format!("expected j=value, got `{item}`"))?;
                let j: i64 = j.trim().parse().map_err(|_| format!("bad index `{j}`"))?;
                Ok((j, parse_complex(v)?))
            })
            .collect::<Result<_, String>>()
            .map(Weights::PerIndex)
    }
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let v = Complex64::from_str(s.trim()).map_err(|_| format!("bad complex number `{s}`"))?;
    if !v.is_finite() {
        return Err(format!("non-finite value `{s}`"));
    }
    Ok(v)
}

/// `J=δ`: move node `t_J` by `δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbation {
    pub index: i64,
    pub delta: f64,
}

impl FromStr for Perturbation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (j, d) = s
            .split_once('=')
            .ok_or_else(|| format!("expected J=delta, got `{s}`"))?;
        let index = j.trim().parse().map_err(|_| format!("bad node index `{j}`"))?;
        let delta: f64 = d.trim().parse().map_err(|_| format!("bad node shift `{d}`"))?;
        if !delta.is_finite() {
            return Err(format!("non-finite node shift `{d}`"));
        }
        Ok(Self { index, delta })
    }
}

/// `a:b:n` (n evenly spaced points, both ends included) or a single value.
#[derive(Debug, Clone, PartialEq)]
pub struct Range(pub Vec<f64>);

impl FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |x: &str| -> Result<f64, String> {
            let v: f64 = x
                .trim()
                .parse()
                .map_err(|_| format!("bad number `{x}` in range `{s}`"))?;
            v.is_finite()
                .then_some(v)
                .ok_or_else(|| format!("non-finite bound in range `{s}`"))
        };
        match parts.as_slice() {
            [x] => Ok(Range(vec![num(x)?])),
            [a, b, n] => {
                let (a, b) = (num(a)?, num(b)?);
                let n: usize = n
                    .trim()
                    .parse()
                    .map_err(|_| format!("bad point count in range `{s}`"))?;
                match n {
                    0 => Err(format!("range `{s}` has no points")),
                    1 if a == b => Ok(Range(vec![a])),
                    1 => Err(format!("range `{s}` needs at least 2 points")),
                    _ => Ok(Range((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect())),
                }
            }
            _ => Err(format!("expected a:b:n or a single value, got `{s}`")),
        }
    }
}

/// Every field optional; unset fields fall back to the layer below.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    pub p: Option<f64>,
    pub n_trunc: Option<usize>,
    pub grid_order: Option<usize>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub tol: Option<f64>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub weights: Option<String>,
    pub perturb_node: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub p: f64,
    pub n_trunc: usize,
    pub grid_order: usize,
    pub seed: u64,
    pub trials: usize,
    pub tol: f64,
    /// `None` picks the command's natural format.
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub weights: Option<Weights>,
    pub perturb_node: Vec<Perturbation>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            p: 2.0,
            n_trunc: 32,
            grid_order: 16,
            seed: 42,
            trials: 2000,
            tol: 1e-8,
            format: None,
            out: None,
            weights: None,
            perturb_node: Vec::new(),
        }
    }
}

impl RunConfig {
    pub fn apply(&mut self, layer: ConfigLayer) -> Result<(), UsageError> {
        macro_rules! take {
            ($($f:ident),*) => { $(if let Some(v) = layer.$f { self.$f = v; })* };
        }
        take!(p, n_trunc, grid_order, seed, trials, tol);
        if layer.format.is_some() {
            self.format = layer.format;
        }
        if layer.out.is_some() {
            self.out = layer.out;
        }
        if let Some(w) = layer.weights {
            self.weights = Some(w.parse().map_err(UsageError)?);
        }
        if let Some(list) = layer.perturb_node {
            self.perturb_node = list
                .iter()
                .map(|s| s.parse())
                .collect::<Result<_, _>>()
                .map_err(UsageError)?;
        }
        Ok(())
    }

    pub fn load_file(path: &Path) -> Result<ConfigLayer, UsageError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| UsageError(format!("bad config {}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), UsageError> {
        let bad = |m: String| Err(UsageError(m));
        if !(self.p > 1.0 && self.p.is_finite()) {
            return bad(format!("p must lie in (1, inf), got {}", self.p));
        }
        if self.n_trunc < 1 {
            return bad("n-trunc must be >= 1".into());
        }
        if self.grid_order < 8 {
            return bad(format!("grid-order must be >= 8, got {}", self.grid_order));
        }
        if !(self.tol > 0.0) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        Ok(())
    }

    pub fn exponent(&self) -> Exponent {
        Exponent::new(self.p).expect("validated")
    }

    /// The sinc system with the configured weights and node shifts.
    pub fn system(&self) -> Result<SamplingSystem, UsageError> {
        self.system_with(self.n_trunc)
    }

    /// As [`Self::system`] with another window half-width.
    pub fn system_with(&self, n_trunc: usize) -> Result<SamplingSystem, UsageError> {
        let mut sys = SamplingSystem::sinc(n_trunc, self.exponent());
        let n = n_trunc as i64;
        if let Some(w) = &self.weights {
            let w = w.clone();
            if let Weights::PerIndex(list) = &w {
                if let Some((j, _)) = list.iter().find(|(j, _)| j.abs() > n) {
                    return Err(UsageError(format!("weight index {j} outside |j| <= {n}")));
                }
            }
            sys = sys
                .with_weights(move |j| match &w {
                    Weights::Uniform(a) => *a,
                    Weights::PerIndex(list) => list
                        .iter()
                        .rev()
                        .find(|(i, _)| *i == j)
                        .map_or(Complex64::new(1.0, 0.0), |(_, a)| *a),
                })
                .map_err(|e| UsageError(e.to_string()))?;
        }
        for p in &self.perturb_node {
            sys = sys
                .with_node_shift(p.index, p.delta)
                .map_err(|e| UsageError(e.to_string()))?;
        }
        Ok(sys)
    }
}
