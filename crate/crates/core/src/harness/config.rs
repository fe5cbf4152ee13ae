use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::data::{random_unit, LabelModel, MarginalSpec};
use crate::error::{Error, Result};
use crate::numerics::Rng;
use crate::ptas::PtasConfig;
use crate::surrogate::{Activation, ProbeSpec, SolverConfig};

/// RNG stream ids; each dataset and the random teacher get their own stream.
pub const STREAM_TRAIN: u64 = 0;
pub const STREAM_FRESH: u64 = 1;
pub const STREAM_HOLDOUT: u64 = 2;
pub const STREAM_TEACHER: u64 = 3;
pub const STREAM_PROBE: u64 = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WStarSpec {
    Explicit(Vec<f64>),
    /// Uniform random direction scaled to norm `scale`.
    RandomUnit {
        #[serde(default = "one")]
        scale: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn relu() -> Activation {
    Activation::Relu
}

/// Dataset and model locations; anything unset lives under `out_dir`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataPaths {
    pub train: Option<PathBuf>,
    pub fresh: Option<PathBuf>,
    pub holdout: Option<PathBuf>,
    pub model: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub label: Option<String>,
    pub seed: u64,
    pub marginal: MarginalSpec,
    pub labels: LabelModel,
    pub w_star: WStarSpec,
    pub m_train: usize,
    pub m_fresh: usize,
    pub m_holdout: usize,
    #[serde(default = "relu")]
    pub activation: Activation,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub ptas: Option<PtasConfig>,
    /// Band multipliers tried by `ptas`; the one with the lowest holdout loss wins.
    #[serde(default)]
    pub gamma_sweep: Vec<f64>,
    #[serde(default)]
    pub probe: Option<ProbeSpec>,
    pub out_dir: PathBuf,
    #[serde(default)]
    pub data: DataPaths,
}

impl ExperimentConfig {
    pub fn from_value(value: Value) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_value(value)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>, overrides: &[String]) -> Result<Self> {
        let mut value = load_json(path)?;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        Self::from_value(value)
    }

    pub fn validate(&self) -> Result<()> {
        self.marginal.validate()?;
        self.labels.validate()?;
        self.activation.validate()?;
        self.solver.validate()?;
        if let Some(p) = &self.ptas {
            p.validate()?;
        }
        if let Some(p) = &self.probe {
            p.validate()?;
        }
        for (name, m) in [("m_train", self.m_train), ("m_fresh", self.m_fresh), ("m_holdout", self.m_holdout)] {
            if m == 0 {
                return Err(Error::InvalidSpec(format!("{name} must be at least 1")));
            }
        }
        if self.gamma_sweep.iter().any(|g| !(*g > 0.0 && g.is_finite())) {
            return Err(Error::config("gamma_sweep", "entries must be positive and finite"));
        }
        match &self.w_star {
            WStarSpec::Explicit(w) if w.len() != self.marginal.d => Err(Error::config(
                "w_star",
                format!("has {} entries but marginal.d = {}", w.len(), self.marginal.d),
            )),
            WStarSpec::RandomUnit { scale } if !(*scale >= 0.0 && *scale <= 1.0) => {
                Err(Error::config("w_star.random_unit.scale", "must lie in [0, 1]"))
            }
            _ => Ok(()),
        }
    }

    pub fn resolve_w_star(&self) -> Vec<f64> {
        match &self.w_star {
            WStarSpec::Explicit(w) => w.clone(),
            WStarSpec::RandomUnit { scale } => {
                let mut rng = Rng::with_stream(self.seed, STREAM_TEACHER);
                random_unit(self.marginal.d, &mut rng).into_iter().map(|v| v * scale).collect()
            }
        }
    }

    pub fn train_path(&self) -> PathBuf {
        self.data.train.clone().unwrap_or_else(|| self.out_dir.join("train.csv"))
    }

    pub fn fresh_path(&self) -> PathBuf {
        self.data.fresh.clone().unwrap_or_else(|| self.out_dir.join("fresh.csv"))
    }

    pub fn holdout_path(&self) -> PathBuf {
        self.data.holdout.clone().unwrap_or_else(|| self.out_dir.join("holdout.csv"))
    }

    pub fn model_path(&self) -> PathBuf {
        self.data.model.clone().unwrap_or_else(|| self.out_dir.join("model.json"))
    }
}

pub(crate) fn load_json(path: impl AsRef<Path>) -> Result<Value> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Applies `a.b.c=value` to a JSON tree. The value is parsed as JSON when possible and
/// taken as a string otherwise; missing intermediate objects are created.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::config(assignment, "override must have the form key=value"))?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(Error::config(key, "empty path segment in override key"));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    let mut segments = key.split('.').peekable();
    while let Some(seg) = segments.next() {
        if node.is_null() {
            *node = Value::Object(Default::default());
        }
        let obj = node
            .as_object_mut()
            .ok_or_else(|| Error::config(key, format!("`{seg}` does not index into an object")))?;
        if segments.peek().is_none() {
            obj.insert(seg.to_string(), value);
            return Ok(());
        }
        node = obj.entry(seg.to_string()).or_insert(Value::Null);
    }
    unreachable!("split always yields a segment")
}
