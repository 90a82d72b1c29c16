use std::collections::BTreeMap;
use std::path::Path;
use std::{fs, io};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bt::{Reaction, UserEvent};
use crate::spec::ExplanationNeed;
use crate::text::{contains_phrase, normalize};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MatchResult {
    Intent { index: usize, intent: String },
    Unmatched,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatchError {
    #[error("choice {index} is out of range ({available} questions)")]
    ChoiceOutOfRange { index: usize, available: usize },
    #[error("no explanation needs to match against")]
    NoNeeds,
}

/// Resolves a reply to the need-selection prompt. Free text matches a need
/// only when it equals that need's question after normalization.
pub fn match_question(event: &UserEvent, needs: &[ExplanationNeed]) -> Result<MatchResult, MatchError> {
    if needs.is_empty() {
        return Err(MatchError::NoNeeds);
    }
    match event {
        UserEvent::ChoiceIndex(index) => match needs.get(*index) {
            Some(need) => Ok(MatchResult::Intent { index: *index, intent: need.intent.clone() }),
            None => Err(MatchError::ChoiceOutOfRange { index: *index, available: needs.len() }),
        },
        UserEvent::FreeText(text) => {
            let wanted = normalize(text);
            let mut hits = needs.iter().enumerate().filter(|(_, n)| normalize(&n.question) == wanted);
            match (hits.next(), hits.next()) {
                (Some((index, need)), None) => Ok(MatchResult::Intent { index, intent: need.intent.clone() }),
                _ => Ok(MatchResult::Unmatched),
            }
        }
        UserEvent::QuestionnaireAnswer { .. } => Ok(MatchResult::Unmatched),
    }
}

/// Phrase lists used to read free-text replies: reaction classes, yes/no
/// synonyms, and cue words for "question 2" style references.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhraseTable {
    pub reactions: BTreeMap<Reaction, Vec<String>>,
    pub yes: Vec<String>,
    pub no: Vec<String>,
    pub ordinal_cues: Vec<String>,
}

/// Checked in this order; the first class with a matching phrase wins.
const PRECEDENCE: [Reaction; 4] =
    [Reaction::Disagree, Reaction::NewQuestion, Reaction::MoreOfSame, Reaction::Satisfied];

impl PhraseTable {
    pub fn embedded() -> Self {
        Self::from_json(include_str!("../../fixtures/phrases.json")).expect("embedded phrase table is valid")
    }

    pub fn load(path: &Path) -> io::Result<Self> {
        Self::from_json(&fs::read_to_string(path)?).map_err(io::Error::other)
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        let mut table: PhraseTable = serde_json::from_str(text)?;
        let norm = |v: &mut Vec<String>| v.iter_mut().for_each(|p| *p = normalize(p));
        table.reactions.values_mut().for_each(norm);
        norm(&mut table.yes);
        norm(&mut table.no);
        norm(&mut table.ordinal_cues);
        Ok(table)
    }

    pub fn classify(&self, text: &str) -> Option<Reaction> {
        let text = normalize(text);
        PRECEDENCE.into_iter().find(|r| {
            self.reactions.get(r).is_some_and(|phrases| phrases.iter().any(|p| contains_phrase(&text, p)))
        })
    }

    /// `Some(true)` for an unambiguous yes, `Some(false)` for an unambiguous no.
    pub fn yes_no(&self, text: &str) -> Option<bool> {
        let text = normalize(text);
        let hit = |list: &[String]| list.iter().any(|p| contains_phrase(&text, p));
        match (hit(&self.yes), hit(&self.no)) {
            (true, false) => Some(true),
            (false, true) => Some(false),
            _ => None,
        }
    }

    /// Zero-based index named by "question 2", "option two" and the like.
    pub fn ordinal(&self, text: &str) -> Option<usize> {
        let text = normalize(text);
        let words: Vec<&str> = text.split(' ').collect();
        words.windows(2).find_map(|w| {
            if !self.ordinal_cues.iter().any(|c| c == w[0]) {
                return None;
            }
            let n = w[1].parse::<usize>().ok().or_else(|| number_word(w[1]))?;
            n.checked_sub(1)
        })
    }
}

fn number_word(w: &str) -> Option<usize> {
    ["one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten"]
        .iter()
        .position(|n| *n == w)
        .map(|i| i + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn needs() -> Vec<ExplanationNeed> {
        [
            ("Why is this Radiograph marked as \"fracture\"?", "transparency"),
            ("Are there similar Radiographs that are also marked as \"fracture\"?", "trust"),
        ]
        .iter()
        .map(|(q, i)| ExplanationNeed {
            question: (*q).into(),
            intent: (*i).into(),
            target_schema: String::new(),
        })
        .collect()
    }

    #[test]
    fn choice_and_text_matching() {
        let n = needs();
        assert_eq!(
            match_question(&UserEvent::ChoiceIndex(1), &n),
            Ok(MatchResult::Intent { index: 1, intent: "trust".into() })
        );
        assert_eq!(
            match_question(&UserEvent::text("why is this radiograph marked as fracture"), &n),
            Ok(MatchResult::Intent { index: 0, intent: "transparency".into() })
        );
        assert_eq!(match_question(&UserEvent::text("can I appeal"), &n), Ok(MatchResult::Unmatched));
        assert_eq!(
            match_question(&UserEvent::ChoiceIndex(2), &n),
            Err(MatchError::ChoiceOutOfRange { index: 2, available: 2 })
        );
    }

    #[test]
    fn transcript_reactions() {
        let t = PhraseTable::embedded();
        let cases = [
            ("Okay. I see why the system thinks this is a fracture. What else can you tell me about this Radiograph?", Reaction::MoreOfSame),
            ("I'm not sure I agree", Reaction::Disagree),
            ("Okay!", Reaction::Satisfied),
            ("Can I see two more similar Radiographs?", Reaction::MoreOfSame),
            ("Okay. Thanks!", Reaction::Satisfied),
            ("I have another question", Reaction::NewQuestion),
        ];
        for (text, want) in cases {
            assert_eq!(t.classify(text), Some(want), "{text}");
        }
        assert_eq!(t.classify("hmm"), None);
    }

    #[test]
    fn yes_no_and_ordinals() {
        let t = PhraseTable::embedded();
        assert_eq!(t.yes_no("Yes of course!"), Some(true));
        assert_eq!(t.yes_no("yes this is correct!"), Some(true));
        assert_eq!(t.yes_no("Sure"), Some(true));
        assert_eq!(t.yes_no("not now"), Some(false));
        assert_eq!(t.yes_no("yes and no"), None);
        assert_eq!(t.ordinal("Question 2 sounds like what I need to know"), Some(1));
        assert_eq!(t.ordinal("option one please"), Some(0));
        assert_eq!(t.ordinal("no number here"), None);
    }
}
