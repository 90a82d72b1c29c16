//! Text normalization shared by answer matching and phrase classification.

/// Lowercases, replaces punctuation with spaces and collapses whitespace.
pub fn normalize(text: &str) -> String {
    let mapped: String = text
        .chars()
        .map(|c| {
            if c.is_alphanumeric() || c.is_whitespace() {
                c.to_lowercase().next().unwrap_or(c)
            } else if c == '\'' || c == '\u{2019}' {
                // "I'm" and "don't" keep their letters together
                '\0'
            } else {
                ' '
            }
        })
        .filter(|c| *c != '\0')
        .collect();
    mapped.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// True when `phrase` occurs in `text` on word boundaries. Both sides are
/// expected to be normalized already.
pub fn contains_phrase(text: &str, phrase: &str) -> bool {
    if phrase.is_empty() {
        return false;
    }
    let padded = format!(" {text} ");
    padded.contains(&format!(" {phrase} "))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strips_punctuation_and_case() {
        assert_eq!(
            normalize("Why is this Radiograph marked as \"fracture\"?"),
            "why is this radiograph marked as fracture"
        );
        assert_eq!(normalize("  I'm   not sure, I agree!! "), "im not sure i agree");
        assert_eq!(normalize("Okay. Thanks!"), "okay thanks");
    }

    #[test]
    fn phrase_matching_respects_word_boundaries() {
        assert!(contains_phrase("okay thanks", "thanks"));
        assert!(!contains_phrase("thanksgiving plans", "thanks"));
        assert!(contains_phrase("can i see two more similar radiographs", "two more"));
    }
}
