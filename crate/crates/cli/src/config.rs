use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sica_core::table::{
    merge_equivalent, power_transform, row_closure, sign_transform, CountTable,
};
use sica_core::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum TransformStep {
    Power { alpha: f64 },
    Sign,
    Closure,
    Merge { tol: f64 },
}

impl std::fmt::Display for TransformStep {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TransformStep::Power { alpha } => write!(f, "power({alpha})"),
            TransformStep::Sign => f.write_str("sign"),
            TransformStep::Closure => f.write_str("closure"),
            TransformStep::Merge { .. } => f.write_str("merge"),
        }
    }
}

impl TransformStep {
    pub fn apply(&self, t: &CountTable) -> Result<CountTable> {
        match *self {
            TransformStep::Power { alpha } => power_transform(t, alpha),
            TransformStep::Sign => Ok(sign_transform(t)),
            TransformStep::Closure => row_closure(t),
            TransformStep::Merge { tol } => Ok(merge_equivalent(t, tol).merged),
        }
    }
}

/// Applies the chain left to right.
pub fn apply_chain(t: &CountTable, chain: &[TransformStep]) -> Result<CountTable> {
    chain
        .iter()
        .try_fold(t.clone(), |acc, step| step.apply(&acc))
}

pub fn describe_chain(chain: &[TransformStep]) -> String {
    if chain.is_empty() {
        "none".to_string()
    } else {
        chain
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(" -> ")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinkhornSettings {
    pub iters: usize,
    pub tol: f64,
    pub zero_tol: Option<f64>,
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionSettings {
    pub method: String,
    pub k: Option<usize>,
    pub dims: Option<(usize, usize)>,
}

/// Everything a run depends on, written next to the report artifacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub input: Option<PathBuf>,
    pub transforms: Vec<TransformStep>,
    pub sinkhorn: SinkhornSettings,
    pub decomposition: Option<DecompositionSettings>,
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    #[cfg(test)]
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips() {
        let cfg = RunConfig {
            command: "report".into(),
            input: Some("rodent.csv".into()),
            transforms: vec![
                TransformStep::Sign,
                TransformStep::Power { alpha: 0.25 },
                TransformStep::Closure,
                TransformStep::Merge { tol: 1e-9 },
            ],
            sinkhorn: SinkhornSettings {
                iters: 500,
                tol: 1e-8,
                zero_tol: Some(0.01),
                epsilon: None,
            },
            decomposition: Some(DecompositionSettings {
                method: "mfca".into(),
                k: None,
                dims: Some((4, 5)),
            }),
            output: Some("out".into()),
            seed: Some(7),
        };
        let back = RunConfig::from_json(&cfg.to_json().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn chain_order_matters() {
        let t = CountTable::from_rows(&[vec![0.0, 2.0, 6.0], vec![1.0, 1.0, 0.0]]).unwrap();
        let a = apply_chain(&t, &[TransformStep::Closure, TransformStep::Sign]).unwrap();
        let b = apply_chain(&t, &[TransformStep::Sign, TransformStep::Closure]).unwrap();
        assert_ne!(a.values(), b.values());
        assert_eq!(
            describe_chain(&[TransformStep::Sign, TransformStep::Closure]),
            "sign -> closure"
        );
        assert_eq!(describe_chain(&[]), "none");
    }
}
