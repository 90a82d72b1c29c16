use std::collections::BTreeMap;
use std::fmt;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::bt::Tree;
use crate::registry::Target;

/// Machine-readable description of one XAI system for one persona.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XaiSpec {
    pub spec_id: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub comment: String,
    pub system: AiSystemDesc,
    pub persona: PersonaDesc,
    pub needs: Vec<ExplanationNeed>,
    /// The decision instance explained in conversations built from this spec.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<Target>,
    pub strategy: StrategySpec,
    pub evaluation: EvaluationStrategy,
    /// Node id to annotation letters, used to label transcript rows.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub annotations: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AiSystemDesc {
    pub name: String,
    /// Short phrase naming the domain, used in persona questions.
    pub domain: String,
    pub task: String,
    pub method: String,
    pub data: DataDesc,
    pub assessment: Assessment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataDesc {
    pub instance_count: u64,
    pub feature_description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Assessment {
    pub metric_name: String,
    pub value: f64,
}

impl Assessment {
    /// Value as a whole percentage, e.g. `83` for 0.834.
    pub fn percent(&self) -> u32 {
        (self.value * 100.0 + 1e-9).floor() as u32
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PersonaDesc {
    pub name: String,
    pub ai_knowledge: KnowledgeLevel,
    pub domain_knowledge: KnowledgeLevel,
    #[serde(default)]
    pub resources: Vec<String>,
}

/// Six-level knowledge scale, ordered from least to most knowledgeable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum KnowledgeLevel {
    NoKnowledge,
    Novice,
    AdvancedBeginner,
    Competent,
    Proficient,
    Expert,
}

impl KnowledgeLevel {
    pub const ALL: [KnowledgeLevel; 6] = [
        KnowledgeLevel::NoKnowledge,
        KnowledgeLevel::Novice,
        KnowledgeLevel::AdvancedBeginner,
        KnowledgeLevel::Competent,
        KnowledgeLevel::Proficient,
        KnowledgeLevel::Expert,
    ];

    pub fn label(self) -> &'static str {
        match self {
            KnowledgeLevel::NoKnowledge => "no knowledge",
            KnowledgeLevel::Novice => "novice",
            KnowledgeLevel::AdvancedBeginner => "advanced beginner",
            KnowledgeLevel::Competent => "competent",
            KnowledgeLevel::Proficient => "proficient",
            KnowledgeLevel::Expert => "expert",
        }
    }

    /// 0 for no knowledge up to 5 for expert.
    pub fn rank(self) -> u8 {
        self as u8
    }

    pub fn parse(s: &str) -> Option<Self> {
        let wanted = s.trim().to_lowercase();
        Self::ALL.into_iter().find(|l| l.label() == wanted)
    }
}

impl fmt::Display for KnowledgeLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl Serialize for KnowledgeLevel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

impl<'de> Deserialize<'de> for KnowledgeLevel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        KnowledgeLevel::parse(&s).ok_or_else(|| {
            de::Error::invalid_value(de::Unexpected::Str(&s), &"a level from no knowledge to expert")
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplanationNeed {
    pub question: String,
    pub intent: String,
    pub target_schema: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyExplainer {
    pub explainer_id: String,
    pub intent: String,
    pub display_name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategySpec {
    pub explainers: Vec<StrategyExplainer>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub tree: Tree,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuestionItem {
    pub question_id: String,
    pub text: String,
    /// Option labels ordered from most negative to most positive.
    pub scale: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positive_set: Option<Vec<String>>,
}

impl QuestionItem {
    /// Options counted as positive: the declared set, or the conventional
    /// top box of the scale.
    pub fn positive_options(&self) -> Vec<&str> {
        if let Some(set) = &self.positive_set {
            return set.iter().map(String::as_str).collect();
        }
        let n = self.scale.len();
        if let Some(yes) = self.scale.iter().find(|s| s.eq_ignore_ascii_case("yes")) {
            if n == 2 {
                return vec![yes.as_str()];
            }
        }
        let top = match n {
            5 => 2,
            3 => 1,
            _ => (n / 2).max(1),
        };
        self.scale[n.saturating_sub(top)..].iter().map(String::as_str).collect()
    }

    pub fn is_positive(&self, option_index: usize) -> bool {
        self.scale.get(option_index).is_some_and(|label| self.positive_options().contains(&label.as_str()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    AtLeastKOfN,
    AllPositive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterpretationPolicy {
    pub kind: PolicyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub questions: Vec<String>,
    /// Share of respondents that must answer positively for a question to
    /// count as positive.
    #[serde(default = "default_threshold")]
    pub positive_threshold: f64,
}

fn default_threshold() -> f64 {
    0.5
}

impl InterpretationPolicy {
    /// Number of positive questions required to pass.
    pub fn required(&self) -> usize {
        match self.kind {
            PolicyKind::AtLeastKOfN => self.k.unwrap_or(self.questions.len()),
            PolicyKind::AllPositive => self.questions.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationStrategy {
    pub questionnaire: Vec<QuestionItem>,
    pub policy: InterpretationPolicy,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
}

impl EvaluationStrategy {
    pub fn question(&self, id: &str) -> Option<&QuestionItem> {
        self.questionnaire.iter().find(|q| q.question_id == id)
    }
}
