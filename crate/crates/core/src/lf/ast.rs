//! AST of the logical-form planning language.
//!
//! A plan step pairs a natural-language sentence with one expression built
//! from four functions: `Retrieval` (SPO lookup), `Deduce` (LLM reasoning),
//! `Math` (arithmetic) and `Output` (answer formatting). Values flow between
//! steps through aliases (`o1`, `s2`, …) in expressions and `#n` placeholders
//! in step text.

use serde::{Deserialize, Serialize};

/// One term of an SPO triple. A term either introduces a variable (it
/// carries a type and/or a name) or is a bare back-reference to a variable
/// introduced earlier, in which case both are absent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpoTerm {
    pub alias: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entity_type: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl SpoTerm {
    pub fn bare(alias: impl Into<String>) -> Self {
        SpoTerm { alias: alias.into(), entity_type: None, name: None }
    }

    pub fn typed(alias: impl Into<String>, entity_type: impl Into<String>) -> Self {
        SpoTerm { alias: alias.into(), entity_type: Some(entity_type.into()), name: None }
    }

    pub fn named(
        alias: impl Into<String>,
        entity_type: impl Into<String>,
        name: impl Into<String>,
    ) -> Self {
        SpoTerm {
            alias: alias.into(),
            entity_type: Some(entity_type.into()),
            name: Some(name.into()),
        }
    }

    /// Bare terms reference a variable instead of introducing one.
    pub fn is_bare(&self) -> bool {
        self.entity_type.is_none() && self.name.is_none()
    }
}

/// `alias.key = value` filter applied to one term of the same expression.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyConstraint {
    pub subject_alias: String,
    pub key: String,
    pub value: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DeduceOp {
    Extract,
    Judgement,
    Entailment,
    Choice,
    MultiChoice,
}

impl DeduceOp {
    pub const ALL: [DeduceOp; 5] = [
        DeduceOp::Extract,
        DeduceOp::Judgement,
        DeduceOp::Entailment,
        DeduceOp::Choice,
        DeduceOp::MultiChoice,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            DeduceOp::Extract => "extract",
            DeduceOp::Judgement => "judgement",
            DeduceOp::Entailment => "entailment",
            DeduceOp::Choice => "choice",
            DeduceOp::MultiChoice => "multiChoice",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|op| op.as_str() == s)
    }
}

/// Item of a `content=[…]` list: either a back-reference to a variable or a
/// verbatim text condition. Quoted items whose text matches the alias shape
/// are references; everything else is literal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContentItem {
    Ref { alias: String },
    Literal { text: String },
}

impl ContentItem {
    pub fn from_text(text: &str) -> Self {
        if is_alias(text) {
            ContentItem::Ref { alias: text.to_string() }
        } else {
            ContentItem::Literal { text: text.to_string() }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetrievalExpr {
    pub s: SpoTerm,
    pub p: SpoTerm,
    pub o: SpoTerm,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub constraints: Vec<PropertyConstraint>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeduceExpr {
    pub op: DeduceOp,
    pub content: Vec<ContentItem>,
    pub target: String,
    pub out_alias: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MathExpr {
    pub content: Vec<ContentItem>,
    pub target: String,
    pub out_alias: String,
}

/// References may be aliases (`o1`) or step results (`#1`); both resolve to
/// the producing step during validation and execution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputExpr {
    pub refs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Action {
    Retrieval(RetrievalExpr),
    Deduce(DeduceExpr),
    Math(MathExpr),
    Output(OutputExpr),
}

impl Action {
    pub fn kind(&self) -> &'static str {
        match self {
            Action::Retrieval(_) => "Retrieval",
            Action::Deduce(_) => "Deduce",
            Action::Math(_) => "Math",
            Action::Output(_) => "Output",
        }
    }

    /// Aliases this expression introduces: typed/named SPO terms and the
    /// `->alias` result variable.
    pub fn defined_aliases(&self) -> Vec<&str> {
        match self {
            Action::Retrieval(r) => [&r.s, &r.p, &r.o]
                .into_iter()
                .filter(|t| !t.is_bare())
                .map(|t| t.alias.as_str())
                .collect(),
            Action::Deduce(d) => vec![d.out_alias.as_str()],
            Action::Math(m) => vec![m.out_alias.as_str()],
            Action::Output(_) => Vec::new(),
        }
    }

    /// The variable carrying this step's result: the object alias of a
    /// retrieval, or the `->alias` of a deduction/calculation. Output steps
    /// produce no variable.
    pub fn result_alias(&self) -> Option<&str> {
        match self {
            Action::Retrieval(r) => Some(r.o.alias.as_str()),
            Action::Deduce(d) => Some(d.out_alias.as_str()),
            Action::Math(m) => Some(m.out_alias.as_str()),
            Action::Output(_) => None,
        }
    }
}

/// Every alias referenced but not defined by `action`, in order of first
/// appearance: bare SPO terms, `content` references and output references
/// (including `#n` forms).
pub fn extract_refs(action: &Action) -> Vec<String> {
    let mut refs: Vec<String> = Vec::new();
    let mut push = |alias: &str| {
        if !refs.iter().any(|r| r == alias) {
            refs.push(alias.to_string());
        }
    };
    match action {
        Action::Retrieval(r) => {
            for term in [&r.s, &r.p, &r.o] {
                if term.is_bare() {
                    push(&term.alias);
                }
            }
        }
        Action::Deduce(DeduceExpr { content, .. }) | Action::Math(MathExpr { content, .. }) => {
            for item in content {
                if let ContentItem::Ref { alias } = item {
                    push(alias);
                }
            }
        }
        Action::Output(o) => {
            for r in &o.refs {
                push(r);
            }
        }
    }
    refs
}

/// One plan step: the natural-language sentence and its expression form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    /// 1-based position in the plan.
    pub index: usize,
    pub nl_text: String,
    pub action: Action,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct Plan {
    pub think_text: String,
    pub steps: Vec<Step>,
}

/// Alias shape: letters (with optional underscores) followed by the index
/// digits of the step that introduces it, e.g. `o1`, `p12`, `math6`.
pub fn is_alias(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    let rest: Vec<char> = chars.collect();
    let digit_start = rest.iter().position(|c| c.is_ascii_digit());
    match digit_start {
        None => false,
        Some(i) => {
            rest[..i].iter().all(|c| c.is_ascii_alphabetic() || *c == '_')
                && rest[i..].iter().all(|c| c.is_ascii_digit())
        }
    }
}

/// `#n` step-result reference.
pub fn is_hash_ref(s: &str) -> bool {
    s.strip_prefix('#')
        .map(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
        .unwrap_or(false)
}

/// Trailing step-index digits of an alias, e.g. `o12` → 12.
pub fn alias_step_digits(alias: &str) -> Option<usize> {
    let start = alias.find(|c: char| c.is_ascii_digit())?;
    alias[start..].parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alias_shapes() {
        for ok in ["s1", "o12", "math6", "deduce_5", "p2"] {
            assert!(is_alias(ok), "{ok}");
        }
        for bad in ["", "1s", "#1", "s", "o1x", "o 1", "s1_"] {
            assert!(!is_alias(bad), "{bad}");
        }
        assert!(is_hash_ref("#1"));
        assert!(is_hash_ref("#12"));
        assert!(!is_hash_ref("#"));
        assert!(!is_hash_ref("#x"));
        assert_eq!(alias_step_digits("o12"), Some(12));
        assert_eq!(alias_step_digits("deduce_5"), Some(5));
    }

    #[test]
    fn refs_skip_defined_terms() {
        let action = Action::Retrieval(RetrievalExpr {
            s: SpoTerm::bare("o1"),
            p: SpoTerm::typed("p2", "deathtime"),
            o: SpoTerm::typed("o2", "deathtime"),
            constraints: vec![],
        });
        assert_eq!(extract_refs(&action), vec!["o1"]);
        assert_eq!(action.defined_aliases(), vec!["p2", "o2"]);
        assert_eq!(action.result_alias(), Some("o2"));
    }

    #[test]
    fn refs_from_content_and_output() {
        let deduce = Action::Deduce(DeduceExpr {
            op: DeduceOp::Choice,
            content: vec![
                ContentItem::Ref { alias: "o2".into() },
                ContentItem::Literal { text: "a known fact".into() },
                ContentItem::Ref { alias: "o4".into() },
                ContentItem::Ref { alias: "o2".into() },
            ],
            target: "t".into(),
            out_alias: "o5".into(),
        });
        assert_eq!(extract_refs(&deduce), vec!["o2", "o4"]);

        let output = Action::Output(OutputExpr { refs: vec!["o1".into(), "#2".into()] });
        assert_eq!(extract_refs(&output), vec!["o1", "#2"]);
    }

    #[test]
    fn fully_literal_retrieval_has_no_refs() {
        let action = Action::Retrieval(RetrievalExpr {
            s: SpoTerm::named("s1", "film", "Hit Parade Of 1947"),
            p: SpoTerm::typed("p1", "director"),
            o: SpoTerm::typed("o1", "director"),
            constraints: vec![],
        });
        assert!(extract_refs(&action).is_empty());
    }

    #[test]
    fn content_item_classification() {
        assert_eq!(ContentItem::from_text("o2"), ContentItem::Ref { alias: "o2".into() });
        assert_eq!(
            ContentItem::from_text("weight=16kg"),
            ContentItem::Literal { text: "weight=16kg".into() }
        );
    }
}
