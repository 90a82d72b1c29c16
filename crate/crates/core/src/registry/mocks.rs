//! Deterministic stand-ins for real explainer back-ends.

use std::collections::BTreeMap;
use std::path::Path;
use std::{fs, io};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    EffectCurve, ExplainerAdapter, ExplanationBody, ExplanationPayload, FeatureChange, Params, Target,
};
use crate::bt::Value;

const PROVENANCE: &str = "mock";
const IMAGE_REGIONS: [&str; 4] = ["top left", "top right", "bottom left", "bottom right"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterfactualRule {
    pub feature: String,
    pub to: Value,
    /// Score added to the prediction when this change is applied.
    pub gain: f64,
}

/// Data backing the mocks: neighbour corpora and counterfactual rule lists,
/// both keyed by corpus name.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MockFixtures {
    #[serde(default)]
    pub neighbours: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub counterfactual_rules: BTreeMap<String, Vec<CounterfactualRule>>,
}

impl MockFixtures {
    pub fn embedded() -> Self {
        serde_json::from_str(include_str!("../../fixtures/corpora/mocks.json"))
            .expect("embedded mock fixtures are valid")
    }

    pub fn load(path: &Path) -> io::Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(io::Error::other)
    }
}

fn fnv1a(parts: &[&str]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for part in parts {
        for b in part.bytes().chain([0xff]) {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

fn num_param(params: &Params, key: &str, default: f64) -> f64 {
    params.get(key).and_then(Value::as_f64).unwrap_or(default)
}

fn str_param<'a>(params: &'a Params, key: &str) -> Option<&'a str> {
    params.get(key).and_then(Value::as_str)
}

fn is_image(target: &Target) -> bool {
    target.kind.as_deref() == Some("image")
}

fn feature_names(target: &Target) -> Vec<String> {
    if target.features.is_empty() || is_image(target) {
        IMAGE_REGIONS.iter().map(|s| (*s).to_owned()).collect()
    } else {
        target.features.iter().map(|f| f.name.clone()).collect()
    }
}

fn seeded(params: &Params, parts: &[&str]) -> ChaCha8Rng {
    let seed = num_param(params, "seed", 0.0) as u64;
    ChaCha8Rng::seed_from_u64(seed ^ fnv1a(parts))
}

/// Similar cases by rank distance inside a fixed corpus. Params: `k`
/// (default 2), `corpus`, `call` (pages through further neighbours).
#[derive(Debug, Clone)]
pub struct NearestNeighbours {
    corpora: BTreeMap<String, Vec<String>>,
}

impl NearestNeighbours {
    pub fn new(corpora: BTreeMap<String, Vec<String>>) -> Self {
        NearestNeighbours { corpora }
    }

    /// Corpus members ordered by distance from `target`, nearest first.
    pub fn ranked(corpus: &[String], target: &str) -> Vec<String> {
        let mut sorted: Vec<&String> = corpus.iter().collect();
        sorted.sort();
        sorted.dedup();
        let Some(pos) = sorted.iter().position(|id| *id == target) else {
            return sorted.into_iter().cloned().collect();
        };
        let mut others: Vec<(usize, &String)> = sorted
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != pos)
            .map(|(i, id)| (i.abs_diff(pos), *id))
            .collect();
        others.sort();
        others.into_iter().map(|(_, id)| id.clone()).collect()
    }
}

impl ExplainerAdapter for NearestNeighbours {
    fn explain(&self, target: &Target, params: &Params) -> Result<ExplanationPayload, String> {
        let (name, corpus) = match str_param(params, "corpus") {
            Some(name) => {
                self.corpora.get_key_value(name).ok_or_else(|| format!("unknown corpus `{name}`"))?
            }
            None => self
                .corpora
                .iter()
                .find(|(_, ids)| ids.contains(&target.id))
                .ok_or_else(|| format!("no corpus contains `{}`", target.id))?,
        };
        let ranked = Self::ranked(corpus, &target.id);
        if ranked.is_empty() {
            return Err(format!("corpus `{name}` has no other cases"));
        }
        let k = (num_param(params, "k", 2.0) as usize).max(1);
        let call = num_param(params, "call", 0.0) as usize;
        let start = (call * k) % ranked.len();
        let ids: Vec<String> = ranked.iter().cycle().skip(start).take(k.min(ranked.len())).cloned().collect();

        let attachments = if is_image(target) {
            ids.iter().map(|id| format!("{name}/{id}.png")).collect()
        } else {
            Vec::new()
        };
        Ok(ExplanationPayload {
            explainer_id: "nearest_neighbours".into(),
            rendering: format!("The most similar cases to {} are {}.", target.id, ids.join(", ")),
            body: ExplanationBody::Neighbours { ids },
            attachments,
            provenance: PROVENANCE.into(),
        })
    }
}

/// Seeded per-feature weights that sum to one. Image targets get one weight
/// per quadrant.
#[derive(Debug, Clone)]
pub struct FeatureAttribution {
    method: String,
}

impl FeatureAttribution {
    pub fn new(method: impl Into<String>) -> Self {
        FeatureAttribution { method: method.into() }
    }
}

impl ExplainerAdapter for FeatureAttribution {
    fn explain(&self, target: &Target, params: &Params) -> Result<ExplanationPayload, String> {
        let names = feature_names(target);
        let mut rng = seeded(params, &[&self.method, &target.id]);
        let raw: Vec<f64> = names.iter().map(|_| rng.random::<f64>() + 0.05).collect();
        let total: f64 = raw.iter().sum();
        let mut weights: Vec<(String, f64)> =
            names.into_iter().zip(raw.into_iter().map(|w| w / total)).collect();
        weights.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

        let listed =
            weights.iter().map(|(n, w)| format!("{n} ({:.0}%)", w * 100.0)).collect::<Vec<_>>().join(", ");
        let attachments = match (&target.attachment, is_image(target)) {
            (Some(path), true) => {
                let stem = path.rsplit_once('.').map_or(path.as_str(), |(s, _)| s);
                vec![format!("{stem}.{}.png", self.method)]
            }
            _ => Vec::new(),
        };
        Ok(ExplanationPayload {
            explainer_id: self.method.clone(),
            rendering: format!("Contribution to the outcome for {}: {listed}.", target.id),
            body: ExplanationBody::Attribution { weights },
            attachments,
            provenance: PROVENANCE.into(),
        })
    }
}

/// Applies the shortest prefix of a corpus rule list that lifts `score`
/// (default 0.35) to `threshold` (default 0.5).
#[derive(Debug, Clone)]
pub struct Counterfactual {
    rules: BTreeMap<String, Vec<CounterfactualRule>>,
}

impl Counterfactual {
    pub fn new(rules: BTreeMap<String, Vec<CounterfactualRule>>) -> Self {
        Counterfactual { rules }
    }
}

impl ExplainerAdapter for Counterfactual {
    fn explain(&self, target: &Target, params: &Params) -> Result<ExplanationPayload, String> {
        let rules = match str_param(params, "corpus") {
            Some(name) => self.rules.get(name).ok_or_else(|| format!("unknown corpus `{name}`"))?,
            None => self.rules.values().next().ok_or("no counterfactual rules loaded")?,
        };
        let threshold = num_param(params, "threshold", 0.5);
        let mut score = num_param(params, "score", 0.35);
        let mut changes = Vec::new();
        for rule in rules {
            if score >= threshold {
                break;
            }
            score += rule.gain;
            changes.push(FeatureChange {
                feature: rule.feature.clone(),
                from: target.feature(&rule.feature).cloned().unwrap_or(Value::Str("unknown".into())),
                to: rule.to.clone(),
            });
        }
        let reaches_threshold = score >= threshold;
        let rendering = if !reaches_threshold {
            "None of the available changes would alter the outcome.".to_owned()
        } else if changes.is_empty() {
            "The outcome already meets the threshold.".to_owned()
        } else {
            let listed = changes
                .iter()
                .map(|c| format!("{} from {} to {}", c.feature, c.from, c.to))
                .collect::<Vec<_>>()
                .join(" and ");
            format!("The outcome would change if {listed}.")
        };
        Ok(ExplanationPayload {
            explainer_id: "dice".into(),
            rendering,
            body: ExplanationBody::Counterfactual { changes, reaches_threshold },
            attachments: Vec::new(),
            provenance: PROVENANCE.into(),
        })
    }
}

/// Five-point seeded effect curve per feature.
#[derive(Debug, Clone, Copy)]
pub struct GlobalEffects;

impl ExplainerAdapter for GlobalEffects {
    fn explain(&self, target: &Target, params: &Params) -> Result<ExplanationPayload, String> {
        let mut rng = seeded(params, &["ale", &target.id]);
        let curves: Vec<EffectCurve> = feature_names(target)
            .into_iter()
            .map(|feature| EffectCurve {
                feature,
                points: (0..5).map(|_| rng.random_range(-1.0..1.0)).collect(),
            })
            .collect();
        let strongest = curves
            .iter()
            .map(|c| (c, c.points.iter().fold(0.0_f64, |m, p| m.max(p.abs()))))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(c, _)| c.feature.clone())
            .unwrap_or_default();
        Ok(ExplanationPayload {
            explainer_id: "ale".into(),
            rendering: format!(
                "Across all cases, {strongest} has the strongest average effect on the prediction."
            ),
            body: ExplanationBody::Effects { curves },
            attachments: Vec::new(),
            provenance: PROVENANCE.into(),
        })
    }
}

/// Compares a case to its twin that differs only in the `ignore` features
/// (comma separated, default `race,sex`).
#[derive(Debug, Clone, Copy)]
pub struct CaseTwin;

impl ExplainerAdapter for CaseTwin {
    fn explain(&self, target: &Target, params: &Params) -> Result<ExplanationPayload, String> {
        let ignored: Vec<String> = str_param(params, "ignore")
            .unwrap_or("race,sex")
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_owned)
            .collect();
        let joined = ignored.join(",");
        let outcome_changed = fnv1a(&[&target.id, &joined]) & 1 == 1;
        let twin_id = format!("{}-twin", target.id);
        let rendering = if outcome_changed {
            format!("A case identical except for {} received a different outcome.", ignored.join(" and "))
        } else {
            format!("A case identical except for {} received the same outcome.", ignored.join(" and "))
        };
        Ok(ExplanationPayload {
            explainer_id: "twin_cbr".into(),
            rendering,
            body: ExplanationBody::Twin { twin_id, ignored, outcome_changed },
            attachments: Vec::new(),
            provenance: PROVENANCE.into(),
        })
    }
}
