//! Experiment configuration as a flat table of dotted keys.
//!
//! Files use TOML syntax, so both `backbone.epochs = 50` and a `[backbone]`
//! section work. Every key must appear in [`CONFIG_KEYS`]; unknown keys and
//! ill-typed values are rejected before anything runs.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::analytic::{autocorrelation_updates, classifier_learners};
use crate::backbone::TrainConfig;
use crate::error::{Error, Result};
use crate::graph::{generate_synthetic, load_dataset, DatasetFormat, Graph, SyntheticSpec};

use super::scope::evaluation_scopes;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    Integer,
    Real,
    Bool,
    Text,
}

/// Every accepted key: `(name, kind, description)`.
pub const CONFIG_KEYS: &[(&str, ValueKind, &str)] = &[
    (
        "data.path",
        ValueKind::Text,
        "dataset directory in the plain-text format",
    ),
    (
        "data.row_normalize",
        ValueKind::Bool,
        "L1-normalize feature rows after loading (default false)",
    ),
    (
        "data.synthetic.classes",
        ValueKind::Integer,
        "synthetic graph: number of classes (default 4)",
    ),
    (
        "data.synthetic.nodes_per_class",
        ValueKind::Integer,
        "synthetic graph: nodes per class (default 50)",
    ),
    (
        "data.synthetic.features",
        ValueKind::Integer,
        "synthetic graph: feature dimension (default 16)",
    ),
    (
        "data.synthetic.homophily",
        ValueKind::Real,
        "synthetic graph: intra-class edge probability (default 0.9)",
    ),
    (
        "protocol.base_classes",
        ValueKind::Integer,
        "classes in the base session (default ceil(C/2))",
    ),
    (
        "protocol.increment",
        ValueKind::Integer,
        "classes per incremental session (default 1)",
    ),
    (
        "protocol.shuffle_classes",
        ValueKind::Bool,
        "shuffle the class order with the data seed (default false)",
    ),
    (
        "backbone.hidden",
        ValueKind::Integer,
        "GCN hidden units (default 256)",
    ),
    (
        "backbone.epochs",
        ValueKind::Integer,
        "base-session training epochs (default 50)",
    ),
    (
        "backbone.lr",
        ValueKind::Real,
        "Adam learning rate (default 0.001)",
    ),
    (
        "backbone.dropout",
        ValueKind::Real,
        "dropout rate on the hidden layer (default 0.5)",
    ),
    (
        "backbone.weight_decay",
        ValueKind::Real,
        "L2 coefficient added to gradients (default 5e-4)",
    ),
    (
        "expander.dim",
        ValueKind::Integer,
        "expanded feature dimension d_feg (default 2048)",
    ),
    (
        "expander.uses_adjacency",
        ValueKind::Bool,
        "expand as ReLU(A H W) instead of ReLU(H W) (default false)",
    ),
    (
        "analytic.gamma",
        ValueKind::Real,
        "ridge regularization gamma > 0 (default 1)",
    ),
    (
        "analytic.r_update",
        ValueKind::Text,
        "autocorrelation update rule: auto, woodbury, direct",
    ),
    (
        "analytic.learner",
        ValueKind::Text,
        "classifier learner: recursive, joint",
    ),
    (
        "eval.scope",
        ValueKind::Text,
        "evaluation graph per task: task, union",
    ),
    (
        "seed.global",
        ValueKind::Integer,
        "seed from which unset seeds derive (default 42)",
    ),
    (
        "seed.data",
        ValueKind::Integer,
        "seed for synthetic data and class shuffling",
    ),
    (
        "seed.backbone",
        ValueKind::Integer,
        "seed for GCN initialization and dropout",
    ),
    (
        "seed.expander",
        ValueKind::Integer,
        "seed for the random expansion weights",
    ),
];

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Directory(PathBuf),
    Synthetic {
        classes: usize,
        nodes_per_class: usize,
        features: usize,
        homophily: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Seeds {
    pub global: u64,
    pub data: Option<u64>,
    pub backbone: Option<u64>,
    pub expander: Option<u64>,
}

/// Seeds after derivation of unset entries from the global seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResolvedSeeds {
    pub data: u64,
    pub backbone: u64,
    pub expander: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Seeds {
    pub fn resolve(&self) -> ResolvedSeeds {
        let derive = |stream: u64| splitmix64(self.global ^ splitmix64(stream));
        ResolvedSeeds {
            data: self.data.unwrap_or_else(|| derive(1)),
            backbone: self.backbone.unwrap_or_else(|| derive(2)),
            expander: self.expander.unwrap_or_else(|| derive(3)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub data: DataSource,
    pub row_normalize: bool,
    pub base_classes: Option<usize>,
    pub increment: usize,
    pub shuffle_classes: bool,
    pub hidden: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub dropout: f64,
    pub weight_decay: f64,
    pub expander_dim: usize,
    pub expander_uses_adjacency: bool,
    pub gamma: f64,
    pub r_update: String,
    pub learner: String,
    pub eval_scope: String,
    pub seeds: Seeds,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            data: DataSource::Synthetic {
                classes: 4,
                nodes_per_class: 50,
                features: 16,
                homophily: 0.9,
            },
            row_normalize: false,
            base_classes: None,
            increment: 1,
            shuffle_classes: false,
            hidden: 256,
            epochs: 50,
            learning_rate: 1e-3,
            dropout: 0.5,
            weight_decay: 5e-4,
            expander_dim: 2048,
            expander_uses_adjacency: false,
            gamma: 1.0,
            r_update: "auto".into(),
            learner: "recursive".into(),
            eval_scope: "task".into(),
            seeds: Seeds {
                global: 42,
                data: None,
                backbone: None,
                expander: None,
            },
        }
    }
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, toml::Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            toml::Value::Table(t) => flatten(&key, t, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

fn key_kind(key: &str) -> Result<ValueKind> {
    CONFIG_KEYS
        .iter()
        .find(|(k, _, _)| *k == key)
        .map(|(_, kind, _)| *kind)
        .ok_or_else(|| Error::param(key, "unknown configuration key"))
}

/// Parses the text of an override value: TOML literal syntax, else a bare string.
pub fn parse_override_value(text: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {text}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(text.to_string()))
}

fn as_u64(key: &str, v: &toml::Value) -> Result<u64> {
    match v {
        toml::Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        _ => Err(Error::param(
            key,
            format!("expected a non-negative integer, got {v}"),
        )),
    }
}

fn as_usize(key: &str, v: &toml::Value) -> Result<usize> {
    usize::try_from(as_u64(key, v)?).map_err(|_| Error::param(key, "integer too large"))
}

fn as_f64(key: &str, v: &toml::Value) -> Result<f64> {
    match v {
        toml::Value::Float(f) => Ok(*f),
        toml::Value::Integer(i) => Ok(*i as f64),
        _ => Err(Error::param(
            key,
            format!("expected a real number, got {v}"),
        )),
    }
}

fn as_bool(key: &str, v: &toml::Value) -> Result<bool> {
    v.as_bool()
        .ok_or_else(|| Error::param(key, format!("expected true or false, got {v}")))
}

fn as_text(key: &str, v: &toml::Value) -> Result<String> {
    v.as_str()
        .map(str::to_string)
        .ok_or_else(|| Error::param(key, format!("expected a string, got {v}")))
}

impl ExperimentConfig {
    /// Parses a config document, then applies `key=value` overrides in order.
    pub fn from_toml_str(text: &str, overrides: &[(String, String)]) -> Result<Self> {
        let table: toml::Table =
            toml::from_str(text).map_err(|e| Error::param("config", e.to_string()))?;
        let mut flat = BTreeMap::new();
        flatten("", &table, &mut flat);
        for (k, v) in overrides {
            flat.insert(k.clone(), parse_override_value(v));
        }
        Self::from_entries(&flat)
    }

    pub fn from_entries(entries: &BTreeMap<String, toml::Value>) -> Result<Self> {
        let mut cfg = Self::default();
        let mut path = None;
        let mut synthetic_keys = false;
        let (mut classes, mut per, mut feats, mut homophily) = (4, 50, 16, 0.9);
        for (key, value) in entries {
            key_kind(key)?;
            match key.as_str() {
                "data.path" => path = Some(PathBuf::from(as_text(key, value)?)),
                "data.row_normalize" => cfg.row_normalize = as_bool(key, value)?,
                "data.synthetic.classes" => {
                    synthetic_keys = true;
                    classes = as_usize(key, value)?
                }
                "data.synthetic.nodes_per_class" => {
                    synthetic_keys = true;
                    per = as_usize(key, value)?
                }
                "data.synthetic.features" => {
                    synthetic_keys = true;
                    feats = as_usize(key, value)?
                }
                "data.synthetic.homophily" => {
                    synthetic_keys = true;
                    homophily = as_f64(key, value)?
                }
                "protocol.base_classes" => cfg.base_classes = Some(as_usize(key, value)?),
                "protocol.increment" => cfg.increment = as_usize(key, value)?,
                "protocol.shuffle_classes" => cfg.shuffle_classes = as_bool(key, value)?,
                "backbone.hidden" => cfg.hidden = as_usize(key, value)?,
                "backbone.epochs" => cfg.epochs = as_usize(key, value)?,
                "backbone.lr" => cfg.learning_rate = as_f64(key, value)?,
                "backbone.dropout" => cfg.dropout = as_f64(key, value)?,
                "backbone.weight_decay" => cfg.weight_decay = as_f64(key, value)?,
                "expander.dim" => cfg.expander_dim = as_usize(key, value)?,
                "expander.uses_adjacency" => cfg.expander_uses_adjacency = as_bool(key, value)?,
                "analytic.gamma" => cfg.gamma = as_f64(key, value)?,
                "analytic.r_update" => cfg.r_update = as_text(key, value)?,
                "analytic.learner" => cfg.learner = as_text(key, value)?,
                "eval.scope" => cfg.eval_scope = as_text(key, value)?,
                "seed.global" => cfg.seeds.global = as_u64(key, value)?,
                "seed.data" => cfg.seeds.data = Some(as_u64(key, value)?),
                "seed.backbone" => cfg.seeds.backbone = Some(as_u64(key, value)?),
                "seed.expander" => cfg.seeds.expander = Some(as_u64(key, value)?),
                other => unreachable!("key {other} is registered but not handled"),
            }
        }
        cfg.data = match path {
            Some(_) if synthetic_keys => {
                return Err(Error::param(
                    "data.path",
                    "set either data.path or data.synthetic.*, not both",
                ))
            }
            Some(p) => DataSource::Directory(p),
            None => DataSource::Synthetic {
                classes,
                nodes_per_class: per,
                features: feats,
                homophily,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every field without touching the data.
    pub fn validate(&self) -> Result<()> {
        if let DataSource::Synthetic {
            classes,
            nodes_per_class,
            features,
            homophily,
        } = &self.data
        {
            if *classes < 2 {
                return Err(Error::param(
                    "data.synthetic.classes",
                    "need at least 2 classes",
                ));
            }
            if *nodes_per_class < 2 {
                return Err(Error::param(
                    "data.synthetic.nodes_per_class",
                    "need at least 2",
                ));
            }
            if *features == 0 {
                return Err(Error::param("data.synthetic.features", "must be positive"));
            }
            if !(0.0..=1.0).contains(homophily) {
                return Err(Error::param(
                    "data.synthetic.homophily",
                    "must lie in [0, 1]",
                ));
            }
        }
        if self.base_classes == Some(0) {
            return Err(Error::param("protocol.base_classes", "must be positive"));
        }
        if self.increment == 0 {
            return Err(Error::param("protocol.increment", "must be positive"));
        }
        self.train_config(0).validate()?;
        if self.expander_dim <= self.hidden {
            return Err(Error::param(
                "expander.dim",
                format!("must exceed backbone.hidden ({})", self.hidden),
            ));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::param(
                "analytic.gamma",
                format!("must be a positive finite real, got {}", self.gamma),
            ));
        }
        for (key, name, names) in [
            (
                "analytic.r_update",
                &self.r_update,
                autocorrelation_updates().names(),
            ),
            (
                "analytic.learner",
                &self.learner,
                classifier_learners().names(),
            ),
            ("eval.scope", &self.eval_scope, evaluation_scopes().names()),
        ] {
            if !names.contains(&name.as_str()) {
                return Err(Error::param(
                    key,
                    format!("unknown value `{name}` (available: {})", names.join(", ")),
                ));
            }
        }
        Ok(())
    }

    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            hidden_dim: self.hidden,
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            dropout: self.dropout,
            weight_decay: self.weight_decay,
            seed,
        }
    }

    pub fn load_graph(&self) -> Result<Graph> {
        let seeds = self.seeds.resolve();
        let mut graph = match &self.data {
            DataSource::Directory(path) => {
                let format = DatasetFormat {
                    row_normalize: false,
                    ..Default::default()
                };
                load_dataset(path, &format)?
            }
            DataSource::Synthetic {
                classes,
                nodes_per_class,
                features,
                homophily,
            } => generate_synthetic(&SyntheticSpec::new(
                *classes,
                *nodes_per_class,
                *features,
                *homophily,
                seeds.data,
            ))?,
        };
        if self.row_normalize {
            graph.row_normalize_features();
        }
        Ok(graph)
    }

    /// Every key with its effective value, sorted by key, for report echoes.
    pub fn entries(&self) -> Vec<(String, String)> {
        let seeds = self.seeds.resolve();
        let mut out: Vec<(String, String)> = Vec::new();
        let mut put = |k: &str, v: String| out.push((k.to_string(), v));
        match &self.data {
            DataSource::Directory(p) => put("data.path", p.display().to_string()),
            DataSource::Synthetic {
                classes,
                nodes_per_class,
                features,
                homophily,
            } => {
                put("data.synthetic.classes", classes.to_string());
                put(
                    "data.synthetic.nodes_per_class",
                    nodes_per_class.to_string(),
                );
                put("data.synthetic.features", features.to_string());
                put("data.synthetic.homophily", format!("{homophily:?}"));
            }
        }
        put("data.row_normalize", self.row_normalize.to_string());
        put(
            "protocol.base_classes",
            self.base_classes
                .map_or_else(|| "auto".to_string(), |c| c.to_string()),
        );
        put("protocol.increment", self.increment.to_string());
        put("protocol.shuffle_classes", self.shuffle_classes.to_string());
        put("backbone.hidden", self.hidden.to_string());
        put("backbone.epochs", self.epochs.to_string());
        put("backbone.lr", format!("{:?}", self.learning_rate));
        put("backbone.dropout", format!("{:?}", self.dropout));
        put("backbone.weight_decay", format!("{:?}", self.weight_decay));
        put("expander.dim", self.expander_dim.to_string());
        put(
            "expander.uses_adjacency",
            self.expander_uses_adjacency.to_string(),
        );
        put("analytic.gamma", format!("{:?}", self.gamma));
        put("analytic.r_update", self.r_update.clone());
        put("analytic.learner", self.learner.clone());
        put("eval.scope", self.eval_scope.clone());
        put("seed.global", self.seeds.global.to_string());
        put("seed.data", seeds.data.to_string());
        put("seed.backbone", seeds.backbone.to_string());
        put("seed.expander", seeds.expander.to_string());
        out.sort();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reference_setup() {
        let c = ExperimentConfig::from_toml_str("", &[]).unwrap();
        assert_eq!(c.hidden, 256);
        assert_eq!(c.epochs, 50);
        assert_eq!(c.learning_rate, 1e-3);
        assert_eq!(c.dropout, 0.5);
        assert_eq!(c.weight_decay, 5e-4);
        assert_eq!(c.expander_dim, 2048);
        assert_eq!(c.seeds.global, 42);
    }

    #[test]
    fn dotted_keys_and_sections() {
        let a = ExperimentConfig::from_toml_str("backbone.epochs = 7\nanalytic.gamma = 2\n", &[])
            .unwrap();
        let b = ExperimentConfig::from_toml_str(
            "[backbone]\nepochs = 7\n[analytic]\ngamma = 2.0\n",
            &[],
        )
        .unwrap();
        assert_eq!(a, b);
        assert_eq!(a.gamma, 2.0);
    }

    #[test]
    fn unknown_key_rejected() {
        let err = ExperimentConfig::from_toml_str("backbone.epoch = 7", &[]).unwrap_err();
        assert!(err.is_config_error());
        assert!(err.to_string().contains("backbone.epoch"));
    }

    #[test]
    fn zero_gamma_names_field() {
        let err = ExperimentConfig::from_toml_str("analytic.gamma = 0", &[]).unwrap_err();
        assert!(err.to_string().contains("analytic.gamma"), "{err}");
    }

    #[test]
    fn overrides_apply_last() {
        let c = ExperimentConfig::from_toml_str(
            "backbone.epochs = 7",
            &[
                ("backbone.epochs".into(), "9".into()),
                ("analytic.learner".into(), "joint".into()),
            ],
        )
        .unwrap();
        assert_eq!(c.epochs, 9);
        assert_eq!(c.learner, "joint");
    }

    #[test]
    fn wrong_types_rejected() {
        assert!(ExperimentConfig::from_toml_str("backbone.epochs = 1.5", &[]).is_err());
        assert!(ExperimentConfig::from_toml_str("backbone.epochs = -1", &[]).is_err());
        assert!(ExperimentConfig::from_toml_str("data.row_normalize = 1", &[]).is_err());
        assert!(ExperimentConfig::from_toml_str("eval.scope = \"global\"", &[]).is_err());
        assert!(ExperimentConfig::from_toml_str(
            "data.path = \"x\"\ndata.synthetic.classes = 3",
            &[]
        )
        .is_err());
    }

    #[test]
    fn every_key_is_handled() {
        for (key, kind, _) in CONFIG_KEYS {
            let value = match kind {
                ValueKind::Integer => "3000",
                ValueKind::Real => "0.25",
                ValueKind::Bool => "true",
                ValueKind::Text => match *key {
                    "analytic.r_update" => "\"woodbury\"",
                    "analytic.learner" => "\"joint\"",
                    "eval.scope" => "\"union\"",
                    _ => "\"somewhere\"",
                },
            };
            let mut entries = BTreeMap::new();
            entries.insert(key.to_string(), parse_override_value(value));
            // must not hit the unreachable arm; validation errors are fine
            let _ = ExperimentConfig::from_entries(&entries);
        }
    }

    #[test]
    fn seeds_derive_from_global() {
        let s = Seeds {
            global: 42,
            data: None,
            backbone: Some(7),
            expander: None,
        };
        let r = s.resolve();
        assert_eq!(r.backbone, 7);
        assert_ne!(r.data, r.expander);
        assert_eq!(r, s.resolve());
        let other = Seeds { global: 43, ..s }.resolve();
        assert_ne!(other.data, r.data);
    }
}
