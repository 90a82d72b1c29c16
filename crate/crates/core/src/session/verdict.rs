use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spec::EvaluationStrategy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictResult {
    Pass,
    NeedsModification,
}

impl VerdictResult {
    pub fn as_str(self) -> &'static str {
        match self {
            VerdictResult::Pass => "pass",
            VerdictResult::NeedsModification => "needs_modification",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionResult {
    pub question_id: String,
    /// Share of respondents choosing a positive option.
    pub positive_fraction: f64,
    pub positive: bool,
}

/// Whether a strategy is judged effective by its own questionnaire.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyVerdict {
    pub spec_id: String,
    pub result: VerdictResult,
    pub questions: Vec<QuestionResult>,
    /// Policy questions judged positive.
    pub positive_questions: usize,
    pub policy_questions: usize,
    /// Sessions that answered every question.
    pub respondents: usize,
    /// Sessions that answered some but not all questions; not aggregated.
    pub partial: usize,
}

impl fmt::Display for StrategyVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({}/{} positive)", self.result.as_str(), self.positive_questions, self.policy_questions)
    }
}

/// Questionnaire answers collected outside a running service.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseSet {
    pub spec_id: String,
    pub responses: Vec<BTreeMap<String, usize>>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerdictError {
    #[error("no fully evaluated sessions for `{0}`")]
    NoEvaluations(String),
}

/// Aggregates questionnaire responses (question id → option index) from
/// many sessions and applies the interpretation policy.
pub fn aggregate(
    spec_id: &str,
    eval: &EvaluationStrategy,
    responses: &[BTreeMap<String, usize>],
) -> Result<StrategyVerdict, VerdictError> {
    let complete =
        |r: &BTreeMap<String, usize>| eval.questionnaire.iter().all(|q| r.contains_key(&q.question_id));
    let full: Vec<_> = responses.iter().filter(|r| complete(r)).collect();
    let partial = responses.iter().filter(|r| !r.is_empty() && !complete(r)).count();
    if full.is_empty() {
        return Err(VerdictError::NoEvaluations(spec_id.to_owned()));
    }

    let questions: Vec<QuestionResult> = eval
        .questionnaire
        .iter()
        .map(|q| {
            let hits = full.iter().filter(|r| q.is_positive(r[&q.question_id])).count();
            let positive_fraction = hits as f64 / full.len() as f64;
            QuestionResult {
                question_id: q.question_id.clone(),
                positive_fraction,
                positive: positive_fraction >= eval.policy.positive_threshold,
            }
        })
        .collect();
    let positive_questions = eval
        .policy
        .questions
        .iter()
        .filter(|id| questions.iter().any(|q| &q.question_id == *id && q.positive))
        .count();
    let result = if positive_questions >= eval.policy.required() {
        VerdictResult::Pass
    } else {
        VerdictResult::NeedsModification
    };
    Ok(StrategyVerdict {
        spec_id: spec_id.to_owned(),
        result,
        questions,
        positive_questions,
        policy_questions: eval.policy.questions.len(),
        respondents: full.len(),
        partial,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::{InterpretationPolicy, PolicyKind, QuestionItem};

    fn eval(kind: PolicyKind, k: Option<usize>) -> EvaluationStrategy {
        let five: Vec<String> = ["Strongly Disagree", "Disagree", "Neutral", "Agree", "Strongly Agree"]
            .map(String::from)
            .to_vec();
        EvaluationStrategy {
            questionnaire: ["q1", "q2", "q3"]
                .iter()
                .map(|id| QuestionItem {
                    question_id: (*id).into(),
                    text: String::new(),
                    scale: five.clone(),
                    positive_set: None,
                })
                .collect(),
            policy: InterpretationPolicy {
                kind,
                k,
                questions: vec!["q1".into(), "q2".into(), "q3".into()],
                positive_threshold: 0.5,
            },
            description: String::new(),
        }
    }

    fn answers(a: [usize; 3]) -> BTreeMap<String, usize> {
        BTreeMap::from([("q1".into(), a[0]), ("q2".into(), a[1]), ("q3".into(), a[2])])
    }

    #[test]
    fn two_of_three() {
        let e = eval(PolicyKind::AtLeastKOfN, Some(2));
        let v = aggregate("x", &e, &[answers([4, 3, 0])]).unwrap();
        assert_eq!(v.to_string(), "pass (2/3 positive)");
        let all = eval(PolicyKind::AllPositive, None);
        let v = aggregate("x", &all, &[answers([4, 3, 0])]).unwrap();
        assert_eq!(v.result, VerdictResult::NeedsModification);
    }

    #[test]
    fn partial_sessions_are_set_aside() {
        let e = eval(PolicyKind::AllPositive, None);
        let partial = BTreeMap::from([("q1".to_owned(), 0)]);
        assert_eq!(
            aggregate("x", &e, std::slice::from_ref(&partial)),
            Err(VerdictError::NoEvaluations("x".into()))
        );
        let v = aggregate("x", &e, &[partial, answers([3, 3, 4]), BTreeMap::new()]).unwrap();
        assert_eq!((v.respondents, v.partial, v.result), (1, 1, VerdictResult::Pass));
    }

    #[test]
    fn fractions_use_the_threshold() {
        let e = eval(PolicyKind::AllPositive, None);
        let v = aggregate("x", &e, &[answers([4, 4, 4]), answers([0, 4, 4]), answers([0, 0, 4])]).unwrap();
        let f: Vec<f64> = v.questions.iter().map(|q| q.positive_fraction).collect();
        assert_eq!(f, [1.0 / 3.0, 2.0 / 3.0, 1.0]);
        assert_eq!(v.positive_questions, 2);
    }
}
