//! Finds indexed segments similar to a query snippet and recommends their
//! refined insightful comments.

use std::cmp::Ordering;

use serde::Serialize;

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::ingest::{Index, SegmentId};
use crate::ranker::{HeuristicScores, Recommender};
use crate::refine::{refine_comment, RefinementRules};
use crate::textproc::{cosine_similarity, tokenize, StopListCatalog, TokenMode};

/// Version of the JSON emitted by `recommend --json`.
pub const OUTPUT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatcherConfig {
    /// Minimum similarity, in `[0, 1]`.
    pub tau: f64,
    pub top_n: usize,
}

impl Default for MatcherConfig {
    fn default() -> Self {
        Self { tau: 0.3, top_n: 5 }
    }
}

impl MatcherConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(Error::Config(format!(
                "tau must lie in [0, 1], got {}",
                self.tau
            )));
        }
        if self.top_n == 0 {
            return Err(Error::Config("top_n must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentMatch {
    pub segment_id: SegmentId,
    pub similarity: f64,
    #[serde(rename = "answer_url_id")]
    pub answer_id: u64,
    pub question_title: String,
}

/// Segments whose similarity to `query_code` is at least `tau`, best first,
/// ties by segment id. With a domain, only segments of questions carrying
/// that tag are considered.
pub fn match_segments(
    index: &Index,
    query_code: &str,
    domain: Option<Domain>,
    cfg: &MatcherConfig,
    stop_lists: &StopListCatalog,
) -> Result<Vec<SegmentMatch>> {
    cfg.validate()?;
    let query = tokenize(query_code, TokenMode::Code, &stop_lists.for_domain(domain));
    if query.is_empty() {
        return Err(Error::InvalidInput(
            "query code has no tokens left after filtering".into(),
        ));
    }
    let mut matches: Vec<SegmentMatch> = index
        .answers()
        .filter_map(|a| Some((a, index.question(a.question_id)?)))
        .filter(|(_, q)| domain.is_none_or(|d| q.tags.iter().any(|t| t == d.tag())))
        .flat_map(|(a, q)| {
            a.segments.iter().map(|s| SegmentMatch {
                segment_id: s.id,
                similarity: cosine_similarity(&query, &s.tokens),
                answer_id: a.id,
                question_title: q.title.clone(),
            })
        })
        .filter(|m| m.similarity > 0.0 && m.similarity >= cfg.tau)
        .collect();
    matches.sort_by(|a, b| {
        b.similarity
            .partial_cmp(&a.similarity)
            .unwrap_or(Ordering::Equal)
            .then(a.segment_id.cmp(&b.segment_id))
    });
    matches.truncate(cfg.top_n);
    Ok(matches)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinedComment {
    pub id: u64,
    pub text_refined: String,
    pub scores: HeuristicScores,
    pub frequency: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchResult {
    #[serde(flatten)]
    pub segment: SegmentMatch,
    pub comments: Vec<RefinedComment>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchStatus {
    Ok,
    NoSimilarSegment,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CodeRecommendation {
    pub schema_version: u32,
    pub status: MatchStatus,
    pub results: Vec<MatchResult>,
}

/// Matches `query_code`, ranks the comments of every matched segment and
/// refines the selected ones.
pub fn recommend_for_code(
    recommender: &Recommender<'_>,
    query_code: &str,
    domain: Option<Domain>,
    cfg: &MatcherConfig,
    stop_lists: &StopListCatalog,
    rules: &RefinementRules,
) -> Result<CodeRecommendation> {
    let index = recommender.index();
    let matches = match_segments(index, query_code, domain, cfg, stop_lists)?;
    let mut results = Vec::with_capacity(matches.len());
    for m in matches {
        let segment = index
            .segment(m.segment_id)
            .ok_or_else(|| Error::NotFound(format!("segment {}", m.segment_id)))?;
        let ranking = recommender.rank_segment(segment)?;
        let comments = ranking
            .recommendation
            .comments
            .iter()
            .filter_map(|r| {
                let comment = index.comment(r.comment_id)?;
                let scores = ranking
                    .scores
                    .iter()
                    .find(|s| s.comment_id == r.comment_id)?;
                Some(RefinedComment {
                    id: r.comment_id,
                    text_refined: refine_comment(&comment.text, rules),
                    scores: *scores,
                    frequency: r.frequency,
                })
            })
            .collect();
        results.push(MatchResult {
            segment: m,
            comments,
        });
    }
    Ok(CodeRecommendation {
        schema_version: OUTPUT_SCHEMA_VERSION,
        status: if results.is_empty() {
            MatchStatus::NoSimilarSegment
        } else {
            MatchStatus::Ok
        },
        results,
    })
}
