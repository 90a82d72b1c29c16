use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::node::FlagWrite;

/// Scalar stored on the blackboard.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Bool(bool),
    Num(f64),
    Str(String),
}

impl Value {
    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Num(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Num(n) if n.fract() == 0.0 && n.abs() < 1e15 => write!(f, "{}", *n as i64),
            Value::Num(n) => write!(f, "{n}"),
            Value::Str(s) => f.write_str(s),
        }
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

impl From<f64> for Value {
    fn from(n: f64) -> Self {
        Value::Num(n)
    }
}

impl From<i64> for Value {
    fn from(n: i64) -> Self {
        Value::Num(n as f64)
    }
}

impl From<usize> for Value {
    fn from(n: usize) -> Self {
        Value::Num(n as f64)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Str(s.to_owned())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Str(s)
    }
}

/// Per-session key/value memory shared by every node of a tree.
///
/// Absent keys read as `false`. `revision` counts writes.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Blackboard {
    entries: BTreeMap<String, Value>,
    revision: u64,
    /// Node whose prompt is awaiting a reply, as left by the last tick.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    awaiting: Option<String>,
}

impl Blackboard {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, key: &str) -> Value {
        self.entries.get(key).cloned().unwrap_or(Value::Bool(false))
    }

    pub fn lookup(&self, key: &str) -> Option<&Value> {
        self.entries.get(key)
    }

    pub fn flag(&self, key: &str) -> bool {
        self.entries.get(key).and_then(Value::as_bool).unwrap_or(false)
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl Into<Value>) {
        self.entries.insert(key.into(), value.into());
        self.revision += 1;
    }

    /// Removes every key beginning with `prefix`; counts as one write.
    pub fn clear_prefix(&mut self, prefix: &str) {
        self.entries.retain(|k, _| !k.starts_with(prefix));
        self.revision += 1;
    }

    pub fn apply(&mut self, write: &FlagWrite) {
        match write {
            FlagWrite::Set { set, to } => self.set(set.clone(), to.clone()),
            FlagWrite::ClearPrefix { clear_prefix } => self.clear_prefix(clear_prefix),
        }
    }

    pub fn apply_all<'a>(&mut self, writes: impl IntoIterator<Item = &'a FlagWrite>) {
        for w in writes {
            self.apply(w);
        }
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn awaiting(&self) -> Option<&str> {
        self.awaiting.as_deref()
    }

    pub(crate) fn set_awaiting(&mut self, node: Option<String>) {
        self.awaiting = node;
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &Value)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Substitutes `{key}` placeholders with blackboard values.
    /// Unknown keys render as the empty string.
    pub fn render(&self, template: &str) -> String {
        let mut out = String::with_capacity(template.len());
        let mut rest = template;
        while let Some(start) = rest.find('{') {
            out.push_str(&rest[..start]);
            let after = &rest[start + 1..];
            match after.find('}') {
                Some(end) if is_key(&after[..end]) => {
                    if let Some(v) = self.entries.get(&after[..end]) {
                        out.push_str(&v.to_string());
                    }
                    rest = &after[end + 1..];
                }
                _ => {
                    out.push('{');
                    rest = after;
                }
            }
        }
        out.push_str(rest);
        out
    }
}

fn is_key(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-'))
}

/// Free-function form of [`Blackboard::set`].
pub fn set_flag(blackboard: &mut Blackboard, key: &str, value: impl Into<Value>) {
    blackboard.set(key, value);
}

/// Free-function form of [`Blackboard::get`].
pub fn get_flag(blackboard: &Blackboard, key: &str) -> Value {
    blackboard.get(key)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn absent_flag_reads_false() {
        let bb = Blackboard::new();
        assert_eq!(get_flag(&bb, "needs_complete"), Value::Bool(false));
        assert!(!bb.flag("needs_complete"));
    }

    #[test]
    fn read_your_writes() {
        let mut bb = Blackboard::new();
        set_flag(&mut bb, "intent", "trust");
        assert_eq!(get_flag(&bb, "intent"), Value::from("trust"));
    }

    #[test]
    fn revision_counts_sets() {
        let mut bb = Blackboard::new();
        let initial = bb.revision();
        bb.set("a", true);
        bb.set("b", 2i64);
        bb.set("a", false);
        assert_eq!(bb.revision(), initial + 3);
    }

    #[test]
    fn clear_prefix_removes_namespace() {
        let mut bb = Blackboard::new();
        bb.set("exec.a", true);
        bb.set("exec.b", true);
        bb.set("calls.a", 1i64);
        bb.clear_prefix("exec.");
        assert!(!bb.flag("exec.a"));
        assert_eq!(bb.get("calls.a"), Value::from(1i64));
    }

    #[test]
    fn render_substitutes_known_keys() {
        let mut bb = Blackboard::new();
        bb.set("target.label", "Radiograph");
        bb.set("pct", 83i64);
        assert_eq!(
            bb.render("This {target.label} is right {pct}% of the time {x} {not a key}"),
            "This Radiograph is right 83% of the time  {not a key}"
        );
    }
}
