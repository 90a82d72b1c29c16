//! Explainer registry.
//!
//! Explainer leaves resolve their `explainer_id` here. An adapter is any type
//! implementing [`ExplainerAdapter`]; [`Registry::with_mocks`] mounts the
//! deterministic stand-ins shipped with this crate. Adapters must be pure
//! functions of `(target, params)` plus their fixture data.

mod mocks;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bt::Value;

pub use mocks::{
    CaseTwin, Counterfactual, CounterfactualRule, FeatureAttribution, GlobalEffects, MockFixtures,
    NearestNeighbours,
};

pub type Params = BTreeMap<String, Value>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Feature {
    pub name: String,
    pub value: Value,
}

/// The entity being explained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub id: String,
    /// Schema tag such as `image` or `tabular`; `None` matches any adapter.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub label: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub outcome: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attachment: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub features: Vec<Feature>,
}

impl Target {
    pub fn bare(id: impl Into<String>) -> Self {
        Target {
            id: id.into(),
            kind: None,
            label: String::new(),
            outcome: String::new(),
            attachment: None,
            features: Vec::new(),
        }
    }

    pub fn feature(&self, name: &str) -> Option<&Value> {
        self.features.iter().find(|f| f.name == name).map(|f| &f.value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modality {
    Text,
    ImageRef,
    Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplainerManifest {
    pub explainer_id: String,
    pub intents: Vec<String>,
    /// Required `Target::kind`; `None` accepts any target.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_kind: Option<String>,
    pub modality: Modality,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureChange {
    pub feature: String,
    pub from: Value,
    pub to: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectCurve {
    pub feature: String,
    pub points: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExplanationBody {
    Neighbours { ids: Vec<String> },
    Attribution { weights: Vec<(String, f64)> },
    Counterfactual { changes: Vec<FeatureChange>, reaches_threshold: bool },
    Effects { curves: Vec<EffectCurve> },
    Twin { twin_id: String, ignored: Vec<String>, outcome_changed: bool },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationPayload {
    pub explainer_id: String,
    pub rendering: String,
    pub body: ExplanationBody,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub attachments: Vec<String>,
    /// `mock` for the shipped stand-ins.
    pub provenance: String,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegistryError {
    #[error("explainer `{0}` is already registered")]
    DuplicateId(String),
    #[error("explainer `{0}` is not registered")]
    UnknownExplainer(String),
    #[error("explainer `{explainer}` needs a `{expected}` target, got `{got}`")]
    TargetSchemaMismatch { explainer: String, expected: String, got: String },
    #[error("explainer `{explainer}`: {detail}")]
    Adapter { explainer: String, detail: String },
}

pub trait ExplainerAdapter: Send + Sync {
    fn explain(&self, target: &Target, params: &Params) -> Result<ExplanationPayload, String>;
}

struct Entry {
    manifest: ExplainerManifest,
    adapter: Box<dyn ExplainerAdapter>,
}

#[derive(Default)]
pub struct Registry {
    entries: BTreeMap<String, Entry>,
}

impl fmt::Debug for Registry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.entries.keys()).finish()
    }
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry holding every shipped mock, backed by the embedded fixtures.
    pub fn with_mocks() -> Self {
        Self::with_mock_fixtures(MockFixtures::embedded())
    }

    pub fn with_mock_fixtures(fixtures: MockFixtures) -> Self {
        let mut r = Registry::new();
        for (id, intents) in [
            ("integrated_gradients", &["transparency"][..]),
            ("lime", &["transparency"][..]),
            ("shap", &["transparency"][..]),
        ] {
            r.register(
                manifest(id, intents, None, Modality::ImageRef),
                Box::new(FeatureAttribution::new(id)),
            )
            .expect("fresh registry");
        }
        let mocks: [(ExplainerManifest, Box<dyn ExplainerAdapter>); 4] = [
            (
                manifest("nearest_neighbours", &["trust", "education"], None, Modality::ImageRef),
                Box::new(NearestNeighbours::new(fixtures.neighbours.clone())),
            ),
            (
                manifest("dice", &["actionable recourse"], Some("tabular"), Modality::Table),
                Box::new(Counterfactual::new(fixtures.counterfactual_rules.clone())),
            ),
            (
                manifest("ale", &["scrutability", "transparency"], Some("tabular"), Modality::Table),
                Box::new(GlobalEffects),
            ),
            (manifest("twin_cbr", &["scrutability"], Some("tabular"), Modality::Text), Box::new(CaseTwin)),
        ];
        for (m, a) in mocks {
            r.register(m, a).expect("fresh registry");
        }
        r
    }

    pub fn register(
        &mut self,
        manifest: ExplainerManifest,
        adapter: Box<dyn ExplainerAdapter>,
    ) -> Result<(), RegistryError> {
        if self.entries.contains_key(&manifest.explainer_id) {
            return Err(RegistryError::DuplicateId(manifest.explainer_id));
        }
        self.entries.insert(manifest.explainer_id.clone(), Entry { manifest, adapter });
        Ok(())
    }

    pub fn contains(&self, id: &str) -> bool {
        self.entries.contains_key(id)
    }

    pub fn manifest(&self, id: &str) -> Option<&ExplainerManifest> {
        self.entries.get(id).map(|e| &e.manifest)
    }

    pub fn manifests(&self) -> impl Iterator<Item = &ExplainerManifest> {
        self.entries.values().map(|e| &e.manifest)
    }

    /// Intents served by at least one registered explainer.
    pub fn served_intents(&self) -> std::collections::BTreeSet<&str> {
        self.manifests().flat_map(|m| m.intents.iter().map(String::as_str)).collect()
    }

    pub fn invoke(
        &self,
        id: &str,
        target: &Target,
        params: &Params,
    ) -> Result<ExplanationPayload, RegistryError> {
        let entry = self.entries.get(id).ok_or_else(|| RegistryError::UnknownExplainer(id.to_owned()))?;
        if let (Some(expected), Some(got)) = (&entry.manifest.target_kind, &target.kind) {
            if expected != got {
                return Err(RegistryError::TargetSchemaMismatch {
                    explainer: id.to_owned(),
                    expected: expected.clone(),
                    got: got.clone(),
                });
            }
        }
        entry
            .adapter
            .explain(target, params)
            .map_err(|detail| RegistryError::Adapter { explainer: id.to_owned(), detail })
    }
}

fn manifest(id: &str, intents: &[&str], kind: Option<&str>, modality: Modality) -> ExplainerManifest {
    ExplainerManifest {
        explainer_id: id.to_owned(),
        intents: intents.iter().map(|s| (*s).to_owned()).collect(),
        target_kind: kind.map(str::to_owned),
        modality,
    }
}
