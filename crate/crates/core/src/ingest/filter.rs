//! Corpus selection profiles applied after ingestion.

use std::fmt;
use std::str::FromStr;

use super::index::Index;
use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FilterProfile {
    #[default]
    None,
    ApiStudy,
    GoldStyle,
}

impl FilterProfile {
    pub const ALL: [FilterProfile; 3] = [Self::None, Self::ApiStudy, Self::GoldStyle];

    pub fn name(self) -> &'static str {
        match self {
            Self::None => "none",
            Self::ApiStudy => "api-study",
            Self::GoldStyle => "gold-style",
        }
    }

    pub fn thresholds(self) -> CorpusFilter {
        match self {
            Self::None => CorpusFilter::default(),
            Self::ApiStudy => CorpusFilter {
                accepted_only: true,
                min_views: 500,
                min_segment_lines: 3,
                min_comments: 10,
                ..CorpusFilter::default()
            },
            Self::GoldStyle => CorpusFilter {
                min_total_code_lines: 10,
                gold_vote_min: Some(5),
                ..Self::ApiStudy.thresholds()
            },
        }
    }
}

impl fmt::Display for FilterProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FilterProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Self::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                Error::InvalidInput(format!(
                    "unknown filter profile `{s}` (expected none, api-study or gold-style)"
                ))
            })
    }
}

/// Thresholds of a profile. Every field at its default keeps everything.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CorpusFilter {
    pub accepted_only: bool,
    pub min_views: u64,
    /// At least one segment must have this many lines.
    pub min_segment_lines: usize,
    pub min_comments: usize,
    pub min_total_code_lines: usize,
    /// Comments with at least this score become gold candidates.
    pub gold_vote_min: Option<u64>,
}

impl CorpusFilter {
    fn keeps(&self, index: &Index, answer_id: u64) -> bool {
        let (Some(answer), Some(question)) =
            (index.answer(answer_id), index.question_of(answer_id))
        else {
            return false;
        };
        (!self.accepted_only || answer.is_accepted)
            && question.view_count >= self.min_views
            && (self.min_segment_lines == 0
                || answer
                    .segments
                    .iter()
                    .any(|s| s.line_count >= self.min_segment_lines))
            && index.comments_for(answer_id).len() >= self.min_comments
            && answer.total_code_lines() >= self.min_total_code_lines
    }
}

/// Keeps the answers that pass `filter`, their questions and their comments.
pub fn apply_corpus_filters(index: &Index, filter: &CorpusFilter) -> Index {
    let kept: Vec<u64> = index
        .answers()
        .map(|a| a.id)
        .filter(|&id| filter.keeps(index, id))
        .collect();
    let answers: Vec<_> = kept
        .iter()
        .filter_map(|&id| index.answer(id).cloned())
        .collect();
    let questions: Vec<_> = index
        .questions()
        .filter(|q| answers.iter().any(|a| a.question_id == q.id))
        .cloned()
        .collect();
    let comments: Vec<_> = kept
        .iter()
        .flat_map(|&id| index.comments_for(id).iter().cloned())
        .collect();
    let mut out = Index::from_parts(questions, answers, comments);
    if let Some(min) = filter.gold_vote_min {
        for c in out.comments_mut() {
            c.gold_candidate = c.score >= min;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{AnswerRecord, CodeSegment, DiscussionComment, QuestionRecord, SegmentId};
    use crate::textproc::TokenMultiset;

    fn question(id: u64, views: u64) -> QuestionRecord {
        QuestionRecord {
            id,
            title: format!("q{id}"),
            view_count: views,
            tags: vec!["java".into()],
            body_html: String::new(),
            accepted_answer_id: Some(id + 100),
        }
    }

    fn answer(qid: u64, lines: &[usize]) -> AnswerRecord {
        let id = qid + 100;
        AnswerRecord {
            id,
            question_id: qid,
            is_accepted: true,
            score: 1,
            body_html: String::new(),
            segments: lines
                .iter()
                .enumerate()
                .map(|(i, &n)| CodeSegment {
                    id: SegmentId {
                        answer_id: id,
                        ordinal: i as u32,
                    },
                    answer_id: id,
                    raw_text: "x();\n".repeat(n),
                    line_count: n,
                    tokens: TokenMultiset::new(),
                })
                .collect(),
        }
    }

    fn comments(post: u64, n: usize, score: u64) -> Vec<DiscussionComment> {
        (0..n)
            .map(|i| DiscussionComment {
                id: post * 1000 + i as u64,
                post_id: post,
                author_id: i as i64,
                author_display_name: format!("u{i}"),
                text: "ok".into(),
                score,
                sequence_index: i,
                gold_candidate: false,
            })
            .collect()
    }

    /// Six answers; only questions 1 and 6 satisfy views, lines and comments.
    fn fixture() -> Index {
        let spec: [(u64, u64, &[usize], usize); 6] = [
            (1, 500, &[3], 10),
            (2, 499, &[5], 12),
            (3, 900, &[2, 2], 15),
            (4, 900, &[4], 9),
            (5, 100, &[1], 3),
            (6, 2000, &[12], 11),
        ];
        let mut qs = Vec::new();
        let mut ans = Vec::new();
        let mut cs = Vec::new();
        for (qid, views, lines, n) in spec {
            qs.push(question(qid, views));
            ans.push(answer(qid, lines));
            cs.extend(comments(qid + 100, n, qid));
        }
        Index::from_parts(qs, ans, cs)
    }

    #[test]
    fn api_study_keeps_two_of_six() {
        let out = apply_corpus_filters(&fixture(), &FilterProfile::ApiStudy.thresholds());
        let ids: Vec<u64> = out.answers().map(|a| a.id).collect();
        assert_eq!(ids, [101, 106]);
        assert_eq!(out.question_count(), 2);
        assert_eq!(out.comment_count(), 21);
        assert!(out.all_comments().all(|c| !c.gold_candidate));
    }

    #[test]
    fn gold_style_needs_ten_lines_and_marks_candidates() {
        let out = apply_corpus_filters(&fixture(), &FilterProfile::GoldStyle.thresholds());
        let ids: Vec<u64> = out.answers().map(|a| a.id).collect();
        assert_eq!(ids, [106]);
        assert!(out.all_comments().all(|c| c.gold_candidate));
    }

    #[test]
    fn none_keeps_everything() {
        let index = fixture();
        assert_eq!(
            apply_corpus_filters(&index, &FilterProfile::None.thresholds()),
            index
        );
    }

    #[test]
    fn non_accepted_answers_are_dropped() {
        let mut a = answer(1, &[3]);
        a.is_accepted = false;
        let index = Index::from_parts([question(1, 600)], [a], comments(101, 10, 1));
        assert!(apply_corpus_filters(&index, &FilterProfile::ApiStudy.thresholds()).is_empty());
    }

    #[test]
    fn profile_names() {
        for p in FilterProfile::ALL {
            assert_eq!(p.name().parse::<FilterProfile>().unwrap(), p);
        }
        assert!("strict".parse::<FilterProfile>().is_err());
    }
}
