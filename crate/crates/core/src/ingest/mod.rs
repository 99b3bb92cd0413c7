//! Stack Exchange dump ingestion: posts, comments and the code segments of
//! answer bodies.

mod dump;
mod filter;
mod html;
mod index;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;
use crate::textproc::TokenMultiset;

pub use dump::{parse_comments, parse_posts, parse_users, DumpFormat, ParsedComments, ParsedPosts};
pub use filter::{apply_corpus_filters, CorpusFilter, FilterProfile};
pub use html::{
    code_char_ratio, extract_code_blocks, extract_code_segments, identifier_ratio,
    is_false_positive, line_count, SegmentExtraction, SegmentFilterConfig,
};
pub use index::{
    build_index, hash_inputs, ingest_dump, DumpPaths, Index, IngestConfig, IngestStats, Manifest,
    INDEX_SCHEMA_VERSION,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionRecord {
    pub id: u64,
    pub title: String,
    pub view_count: u64,
    pub tags: Vec<String>,
    pub body_html: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accepted_answer_id: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerRecord {
    pub id: u64,
    pub question_id: u64,
    pub is_accepted: bool,
    pub score: i64,
    pub body_html: String,
    /// Stored separately in `segments.jsonl`.
    #[serde(skip)]
    pub segments: Vec<CodeSegment>,
}

impl AnswerRecord {
    pub fn total_code_lines(&self) -> usize {
        self.segments.iter().map(|s| s.line_count).sum()
    }
}

/// `answer_id` plus the position of the `<pre><code>` block in the body.
/// Rendered as `"<answer_id>-<ordinal>"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SegmentId {
    pub answer_id: u64,
    pub ordinal: u32,
}

impl fmt::Display for SegmentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.answer_id, self.ordinal)
    }
}

impl FromStr for SegmentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::InvalidInput(format!("bad segment id `{s}`"));
        let (a, o) = s.rsplit_once('-').ok_or_else(bad)?;
        Ok(SegmentId {
            answer_id: a.parse().map_err(|_| bad())?,
            ordinal: o.parse().map_err(|_| bad())?,
        })
    }
}

impl Serialize for SegmentId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SegmentId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeSegment {
    pub id: SegmentId,
    pub answer_id: u64,
    pub raw_text: String,
    pub line_count: usize,
    pub tokens: TokenMultiset,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscussionComment {
    pub id: u64,
    pub post_id: u64,
    pub author_id: i64,
    pub author_display_name: String,
    pub text: String,
    pub score: u64,
    /// Position among the answer's comments ordered by ascending id.
    pub sequence_index: usize,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub gold_candidate: bool,
}
