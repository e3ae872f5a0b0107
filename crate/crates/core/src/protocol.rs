//! Special tokens of the multi-turn solving protocol and helpers for
//! extracting tagged spans from completions.
//!
//! The token strings are wire format and must not change: conversations are
//! replayed byte-for-byte from recorded fixtures.

use std::ops::Range;

pub const THINK_OPEN: &str = "<think>";
pub const THINK_CLOSE: &str = "</think>";
pub const ANSWER_OPEN: &str = "<answer>";
pub const ANSWER_CLOSE: &str = "</answer>";
pub const SEARCH_OPEN: &str = "<search>";
pub const SEARCH_CLOSE: &str = "</search>";
pub const REFERENCES_OPEN: &str = "<references>";
pub const REFERENCES_CLOSE: &str = "</references>";
pub const BOXED_OPEN: &str = "\\boxed{";

/// First `open…close` block in `text`. Returns the inner content and its
/// byte range. A missing close tag runs the block to the end of the text.
pub fn tag_block<'a>(text: &'a str, open: &str, close: &str) -> Option<(&'a str, Range<usize>)> {
    let start = text.find(open)? + open.len();
    let end = match text[start..].find(close) {
        Some(off) => start + off,
        None => text.len(),
    };
    Some((&text[start..end], start..end))
}

/// Content of the first `<think>` block, or `""` when absent.
pub fn think_text(text: &str) -> &str {
    tag_block(text, THINK_OPEN, THINK_CLOSE)
        .map(|(t, _)| t)
        .unwrap_or("")
}

/// Innermost `\boxed{…}` content inside the first `<answer>` block, with the
/// byte range of that content in the full completion text.
pub fn boxed_in_answer(text: &str) -> Option<(String, Range<usize>)> {
    let (_, range) = tag_block(text, ANSWER_OPEN, ANSWER_CLOSE)?;
    innermost_boxed(text, range)
}

/// Innermost `\boxed{…}` content within `region` of `text`.
fn innermost_boxed(text: &str, region: Range<usize>) -> Option<(String, Range<usize>)> {
    let hay = &text[region.clone()];
    let open = hay.find(BOXED_OPEN)?;
    let content_start = region.start + open + BOXED_OPEN.len();
    let mut depth = 1usize;
    let mut content_end = None;
    for (i, c) in text[content_start..].char_indices() {
        match c {
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth == 0 {
                    content_end = Some(content_start + i);
                    break;
                }
            }
            _ => {}
        }
    }
    let content_end = content_end?;
    // Recurse when the content itself contains another boxed span.
    if text[content_start..content_end].contains(BOXED_OPEN) {
        return innermost_boxed(text, content_start..content_end);
    }
    Some((
        text[content_start..content_end].to_string(),
        content_start..content_end,
    ))
}

const REFUSAL_PHRASES: [&str; 2] = [
    "can't answer this question",
    "need to retrieve external knowledge",
];

/// Whether the completion declines to answer from internal knowledge.
pub fn is_refusal(text: &str) -> bool {
    let lower = text.to_lowercase();
    REFUSAL_PHRASES.iter().any(|p| lower.contains(p))
}
