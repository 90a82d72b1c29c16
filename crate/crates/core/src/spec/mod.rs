//! XAI system specifications: the `.xaispec.json` file format, its
//! validation, and compilation of the explanation strategy into an
//! engine-ready tree.

mod compile;
mod dump;
mod model;

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bt::{validate_tree_with, NodeKind, Violation};
use crate::registry::Registry;

pub use compile::{compile_strategy, CompileError, INTENT_KEY, MORE_REQUESTED_KEY};
pub use dump::field_dump;
pub use model::{
    AiSystemDesc, Assessment, DataDesc, EvaluationStrategy, ExplanationNeed, InterpretationPolicy,
    KnowledgeLevel, PersonaDesc, PolicyKind, QuestionItem, StrategyExplainer, StrategySpec, XaiSpec,
};

pub const SPEC_EXTENSION: &str = ".xaispec.json";

const REQUIRED_KEYS: [&str; 6] = ["spec_id", "system", "persona", "needs", "strategy", "evaluation"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    /// Missing, unknown or mistyped field; carries the field name when known.
    #[error("schema error: {0}")]
    Schema(String),
    #[error("value out of range: {0}")]
    Range(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

pub fn parse_spec(document: &str) -> Result<XaiSpec, SpecError> {
    let value: serde_json::Value = serde_json::from_str(document).map_err(|e| SpecError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let object = value.as_object().ok_or_else(|| SpecError::Schema("document must be an object".into()))?;
    if let Some(missing) = REQUIRED_KEYS.iter().find(|k| !object.contains_key(**k)) {
        return Err(SpecError::Schema((*missing).to_owned()));
    }
    let spec: XaiSpec = serde_json::from_value(value).map_err(|e| classify(&e.to_string()))?;
    check_ranges(&spec)?;
    Ok(spec)
}

pub fn load_spec(path: &Path) -> Result<XaiSpec, SpecError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| SpecError::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_spec(&text)
}

/// Pretty-printed JSON with a trailing newline.
pub fn serialize_spec(spec: &XaiSpec) -> String {
    let mut out = serde_json::to_string_pretty(spec).expect("specs always serialize");
    out.push('\n');
    out
}

fn classify(message: &str) -> SpecError {
    if message.starts_with("invalid value") {
        return SpecError::Range(message.to_owned());
    }
    for prefix in ["missing field `", "unknown field `"] {
        if let Some(rest) = message.strip_prefix(prefix) {
            if let Some(end) = rest.find('`') {
                return SpecError::Schema(rest[..end].to_owned());
            }
        }
    }
    SpecError::Schema(message.to_owned())
}

fn check_ranges(spec: &XaiSpec) -> Result<(), SpecError> {
    let value = spec.system.assessment.value;
    if !(0.0..=1.0).contains(&value) {
        return Err(SpecError::Range(format!("system.assessment.value = {value}")));
    }
    if spec.system.data.instance_count == 0 {
        return Err(SpecError::Range("system.data.instance_count = 0".into()));
    }
    let t = spec.evaluation.policy.positive_threshold;
    if !(t > 0.0 && t <= 1.0) {
        return Err(SpecError::Range(format!("evaluation.policy.positive_threshold = {t}")));
    }
    Ok(())
}

/// A spec invariant that does not hold.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "violation", content = "at", rename_all = "snake_case")]
pub enum SpecViolation {
    NoNeeds,
    EmptyIntent(String),
    DuplicateQuestion(String),
    UnknownIntent(String),
    UnlistedExplainer(String),
    IntentMismatch { explainer: String, listed: String, leaf: String },
    EmptyQuestionnaire,
    DuplicateQuestionId(String),
    EmptyScale(String),
    PositiveOutsideScale { question: String, option: String },
    PolicyArity { k: usize, n: usize },
    UnknownPolicyQuestion(String),
    Tree(Violation),
}

impl fmt::Display for SpecViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpecViolation::NoNeeds => f.write_str("NoNeeds"),
            SpecViolation::EmptyIntent(q) => write!(f, "EmptyIntent({q})"),
            SpecViolation::DuplicateQuestion(q) => write!(f, "DuplicateQuestion({q})"),
            SpecViolation::UnknownIntent(i) => write!(f, "UnknownIntent({i})"),
            SpecViolation::UnlistedExplainer(x) => write!(f, "UnlistedExplainer({x})"),
            SpecViolation::IntentMismatch { explainer, listed, leaf } => {
                write!(f, "IntentMismatch({explainer}: listed {listed}, leaf {leaf})")
            }
            SpecViolation::EmptyQuestionnaire => f.write_str("EmptyQuestionnaire"),
            SpecViolation::DuplicateQuestionId(q) => write!(f, "DuplicateQuestionId({q})"),
            SpecViolation::EmptyScale(q) => write!(f, "EmptyScale({q})"),
            SpecViolation::PositiveOutsideScale { question, option } => {
                write!(f, "PositiveOutsideScale({question}: {option})")
            }
            SpecViolation::PolicyArity { k, n } => write!(f, "PolicyArity({k} of {n})"),
            SpecViolation::UnknownPolicyQuestion(q) => write!(f, "UnknownPolicyQuestion({q})"),
            SpecViolation::Tree(v) => write!(f, "{v}"),
        }
    }
}

/// All violations across the spec, including those of the strategy tree.
/// Empty means the spec can be run.
pub fn validate_spec(spec: &XaiSpec, registry: &Registry) -> Vec<SpecViolation> {
    let mut out = Vec::new();

    if spec.needs.is_empty() {
        out.push(SpecViolation::NoNeeds);
    }
    let mut questions = HashSet::new();
    for need in &spec.needs {
        if need.intent.trim().is_empty() {
            out.push(SpecViolation::EmptyIntent(need.question.clone()));
        }
        if !questions.insert(crate::text::normalize(&need.question)) {
            out.push(SpecViolation::DuplicateQuestion(need.question.clone()));
        }
    }
    let intents: BTreeSet<&str> = spec.needs.iter().map(|n| n.intent.as_str()).collect();

    let mut unknown = BTreeSet::new();
    for listed in &spec.strategy.explainers {
        if !intents.contains(listed.intent.as_str()) {
            unknown.insert(listed.intent.clone());
        }
    }
    for node in spec.strategy.tree.iter() {
        let NodeKind::Explainer(x) = &node.kind else { continue };
        if !intents.contains(x.intent.as_str()) {
            unknown.insert(x.intent.clone());
        }
        match spec.strategy.explainers.iter().find(|e| e.explainer_id == x.explainer_id) {
            None => out.push(SpecViolation::UnlistedExplainer(x.explainer_id.clone())),
            Some(listed) if listed.intent != x.intent => out.push(SpecViolation::IntentMismatch {
                explainer: x.explainer_id.clone(),
                listed: listed.intent.clone(),
                leaf: x.intent.clone(),
            }),
            Some(_) => {}
        }
    }
    out.extend(unknown.into_iter().map(SpecViolation::UnknownIntent));

    let eval = &spec.evaluation;
    if eval.questionnaire.is_empty() {
        out.push(SpecViolation::EmptyQuestionnaire);
    }
    let mut ids = HashSet::new();
    for q in &eval.questionnaire {
        if !ids.insert(q.question_id.as_str()) {
            out.push(SpecViolation::DuplicateQuestionId(q.question_id.clone()));
        }
        if q.scale.is_empty() {
            out.push(SpecViolation::EmptyScale(q.question_id.clone()));
        }
        for option in q.positive_set.iter().flatten() {
            if !q.scale.contains(option) {
                out.push(SpecViolation::PositiveOutsideScale {
                    question: q.question_id.clone(),
                    option: option.clone(),
                });
            }
        }
    }
    let policy = &eval.policy;
    for id in &policy.questions {
        if !ids.contains(id.as_str()) {
            out.push(SpecViolation::UnknownPolicyQuestion(id.clone()));
        }
    }
    if policy.kind == PolicyKind::AtLeastKOfN {
        let n = policy.questions.len();
        match policy.k {
            Some(k) if k <= n && k > 0 => {}
            k => out.push(SpecViolation::PolicyArity { k: k.unwrap_or(0), n }),
        }
    }

    let external = compile::external_keys();
    out.extend(
        validate_tree_with(&spec.strategy.tree, registry, &external).into_iter().map(SpecViolation::Tree),
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
      "spec_id": "tiny",
      "system": {
        "name": "Tiny", "domain": "toys", "task": "t", "method": "m",
        "data": {"instance_count": 3, "feature_description": "f"},
        "assessment": {"metric_name": "accuracy", "value": 0.5}
      },
      "persona": {"name": "p", "ai_knowledge": "Novice", "domain_knowledge": "expert"},
      "needs": [{"question": "Why?", "intent": "transparency", "target_schema": "x"}],
      "strategy": {
        "explainers": [{"explainer_id": "lime", "intent": "transparency", "display_name": "LIME"}],
        "tree": {"id": "lime_leaf", "kind": "explainer",
                 "payload": {"explainer_id": "lime", "intent": "transparency"}}
      },
      "evaluation": {
        "questionnaire": [{"question_id": "q1", "text": "Good?", "scale": ["No", "Yes"]}],
        "policy": {"kind": "all_positive", "questions": ["q1"]}
      }
    }"#;

    #[test]
    fn minimal_parses_and_validates() {
        let spec = parse_spec(MINIMAL).unwrap();
        assert_eq!(spec.persona.ai_knowledge, KnowledgeLevel::Novice);
        assert_eq!(spec.evaluation.policy.positive_threshold, 0.5);
        assert!(validate_spec(&spec, &Registry::with_mocks()).is_empty());
        assert_eq!(parse_spec(&serialize_spec(&spec)).unwrap(), spec);
    }

    #[test]
    fn error_classes() {
        assert!(matches!(parse_spec("{\n  \"spec_id\": }"), Err(SpecError::Syntax { line: 2, .. })));
        let mut v: serde_json::Value = serde_json::from_str(MINIMAL).unwrap();
        v.as_object_mut().unwrap().remove("evaluation");
        assert_eq!(parse_spec(&v.to_string()), Err(SpecError::Schema("evaluation".into())));

        let mut v: serde_json::Value = serde_json::from_str(MINIMAL).unwrap();
        v["persona"]["shoe_size"] = 9.into();
        assert_eq!(parse_spec(&v.to_string()), Err(SpecError::Schema("shoe_size".into())));

        let mut v: serde_json::Value = serde_json::from_str(MINIMAL).unwrap();
        v["system"]["assessment"]["value"] = 1.5.into();
        assert!(matches!(parse_spec(&v.to_string()), Err(SpecError::Range(_))));

        let mut v: serde_json::Value = serde_json::from_str(MINIMAL).unwrap();
        v["persona"]["ai_knowledge"] = "guru".into();
        assert!(matches!(parse_spec(&v.to_string()), Err(SpecError::Range(_))));
    }

    #[test]
    fn cross_reference_violations() {
        let mut spec = parse_spec(MINIMAL).unwrap();
        if let NodeKind::Explainer(x) = &mut spec.strategy.tree.root.kind {
            x.intent = "debugging".into();
        }
        spec.strategy.explainers[0].intent = "debugging".into();
        assert_eq!(
            validate_spec(&spec, &Registry::with_mocks()),
            [SpecViolation::UnknownIntent("debugging".into())]
        );

        let mut spec = parse_spec(MINIMAL).unwrap();
        spec.evaluation.policy.kind = PolicyKind::AtLeastKOfN;
        spec.evaluation.policy.k = Some(4);
        assert_eq!(
            validate_spec(&spec, &Registry::with_mocks()),
            [SpecViolation::PolicyArity { k: 4, n: 1 }]
        );

        let mut spec = parse_spec(MINIMAL).unwrap();
        spec.evaluation.questionnaire.clear();
        let v = validate_spec(&spec, &Registry::with_mocks());
        assert!(v.contains(&SpecViolation::EmptyQuestionnaire));
        assert!(v.contains(&SpecViolation::UnknownPolicyQuestion("q1".into())));
    }
}
