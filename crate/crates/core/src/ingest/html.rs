//! Code segment extraction from answer HTML.
//!
//! Only `<pre><code>` blocks count; inline `<code>` spans are ignored. Each
//! block is checked by a false-positive filter that rejects single-line
//! blocks and prose that happens to sit inside code tags.

use std::sync::LazyLock;

use regex::Regex;

use super::{CodeSegment, SegmentId};
use crate::textproc::{tokenize, StopLists, TokenMode};

static PRE_CODE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?is)<pre\b[^>]*>\s*<code\b[^>]*>(.*?)</code>\s*</pre>").expect("valid regex")
});
static TAG: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?s)<[^>]*>").expect("valid regex"));
static IDENTIFIER: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^(?:[a-z][a-z0-9]*[A-Z]\w*|\w+_\w+|[A-Za-z_]\w*(?:\.\w+)+|.*\(\))$")
        .expect("valid regex")
});

const CODE_CHARS: &str = ";{}()=<>[].&|+-*/\"";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentFilterConfig {
    pub min_lines: usize,
    pub min_code_char_ratio: f64,
    pub min_identifier_ratio: f64,
}

impl Default for SegmentFilterConfig {
    fn default() -> Self {
        Self {
            min_lines: 2,
            min_code_char_ratio: 0.02,
            min_identifier_ratio: 0.10,
        }
    }
}

/// Decoded inner text of every `<pre><code>` block, in document order.
pub fn extract_code_blocks(body_html: &str) -> Vec<String> {
    PRE_CODE
        .captures_iter(body_html)
        .map(|c| {
            let stripped = TAG.replace_all(&c[1], "");
            html_escape::decode_html_entities(&stripped).into_owned()
        })
        .collect()
}

/// Number of lines that are not blank.
pub fn line_count(text: &str) -> usize {
    text.lines().filter(|l| !l.trim().is_empty()).count()
}

/// Fraction of characters drawn from the code punctuation set.
pub fn code_char_ratio(text: &str) -> f64 {
    let total = text.chars().count();
    if total == 0 {
        return 0.0;
    }
    let code = text.chars().filter(|c| CODE_CHARS.contains(*c)).count();
    code as f64 / total as f64
}

/// Fraction of whitespace-separated tokens that look like identifiers:
/// camelCase, snake_case, dotted names or calls ending in `()`.
pub fn identifier_ratio(text: &str) -> f64 {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    if tokens.is_empty() {
        return 0.0;
    }
    let hits = tokens
        .iter()
        .filter(|t| IDENTIFIER.is_match(t.trim_end_matches([';', ',', '.', ':'])))
        .count();
    hits as f64 / tokens.len() as f64
}

pub fn is_false_positive(block: &str, cfg: &SegmentFilterConfig) -> bool {
    line_count(block) < cfg.min_lines
        || (code_char_ratio(block) < cfg.min_code_char_ratio
            && identifier_ratio(block) < cfg.min_identifier_ratio)
}

#[derive(Debug, Clone, Default)]
pub struct SegmentExtraction {
    pub segments: Vec<CodeSegment>,
    /// Blocks found in the body, including rejected ones.
    pub blocks_seen: usize,
    pub blocks_rejected: usize,
}

/// Extracts, filters and tokenizes the code segments of one answer. The
/// ordinal of a segment is the position of its block among all blocks of
/// the body, so rejected blocks leave gaps.
pub fn extract_code_segments(
    answer_id: u64,
    body_html: &str,
    cfg: &SegmentFilterConfig,
    stop: &StopLists,
) -> SegmentExtraction {
    let blocks = extract_code_blocks(body_html);
    let mut out = SegmentExtraction {
        blocks_seen: blocks.len(),
        ..Default::default()
    };
    for (ordinal, block) in blocks.into_iter().enumerate() {
        if is_false_positive(&block, cfg) {
            out.blocks_rejected += 1;
            continue;
        }
        out.segments.push(CodeSegment {
            id: SegmentId {
                answer_id,
                ordinal: ordinal as u32,
            },
            answer_id,
            line_count: line_count(&block),
            tokens: tokenize(&block, TokenMode::Code, stop),
            raw_text: block,
        });
    }
    out
}
