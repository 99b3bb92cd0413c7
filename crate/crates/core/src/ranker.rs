//! Heuristic comment ranking and rank fusion.
//!
//! Comments of one answer that pass the vote filter are scored with five
//! heuristics, ranked once per heuristic, and the top of each list votes for
//! the final selection. A comment's fusion frequency is the number of
//! truncated lists that contain it.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphrank::{build_interaction_network, pagerank, PageRankConfig};
use crate::ingest::{CodeSegment, DiscussionComment, Index, SegmentId};
use crate::sentiment::SentimentScorer;
use crate::textproc::{
    cosine_similarity, tfidf_cosine_similarity, tokenize, IdfTable, StopLists, TokenMode,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Heuristic {
    #[serde(rename = "P")]
    Popularity,
    #[serde(rename = "WC")]
    WordCount,
    #[serde(rename = "R")]
    Relevance,
    #[serde(rename = "CR")]
    CommentRank,
    #[serde(rename = "S")]
    Sentiment,
}

impl Heuristic {
    pub const ALL: [Heuristic; 5] = [
        Self::Popularity,
        Self::WordCount,
        Self::Relevance,
        Self::CommentRank,
        Self::Sentiment,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Self::Popularity => "P",
            Self::WordCount => "WC",
            Self::Relevance => "R",
            Self::CommentRank => "CR",
            Self::Sentiment => "S",
        }
    }

    /// Sentiment ranks ascending, so the most negative comment comes first.
    pub fn descending(self) -> bool {
        self != Self::Sentiment
    }

    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Heuristic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        Self::ALL
            .into_iter()
            .find(|h| h.symbol().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidInput(format!("unknown heuristic `{s}`")))
    }
}

/// A subset of the five heuristics.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct HeuristicSet(u8);

impl HeuristicSet {
    pub const EMPTY: HeuristicSet = HeuristicSet(0);

    pub fn all() -> Self {
        Self::from_iter(Heuristic::ALL)
    }

    pub fn contains(self, h: Heuristic) -> bool {
        self.0 & h.bit() != 0
    }

    pub fn with(self, h: Heuristic) -> Self {
        Self(self.0 | h.bit())
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = Heuristic> {
        Heuristic::ALL
            .into_iter()
            .filter(move |h| self.contains(*h))
    }

    /// The incremental ablation rows: {P}, {P,R}, {P,R,CR}, {P,R,CR,WC} and
    /// all five.
    pub fn ablation() -> Vec<HeuristicSet> {
        use Heuristic::*;
        let mut sets = Vec::new();
        let mut acc = Self::EMPTY;
        for h in [Popularity, Relevance, CommentRank, WordCount, Sentiment] {
            acc = acc.with(h);
            sets.push(acc);
        }
        sets
    }
}

impl Default for HeuristicSet {
    fn default() -> Self {
        Self::all()
    }
}

impl FromIterator<Heuristic> for HeuristicSet {
    fn from_iter<I: IntoIterator<Item = Heuristic>>(iter: I) -> Self {
        iter.into_iter().fold(Self::EMPTY, Self::with)
    }
}

impl fmt::Display for HeuristicSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.iter().map(Heuristic::symbol).collect();
        write!(f, "{{{}}}", names.join(","))
    }
}

impl fmt::Debug for HeuristicSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for HeuristicSet {
    type Err = Error;

    /// Accepts `P,R,CR`, optionally wrapped in braces, or `all`.
    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches('{').trim_end_matches('}');
        if inner.eq_ignore_ascii_case("all") {
            return Ok(Self::all());
        }
        let set = inner
            .split([',', '+', ' '])
            .filter(|p| !p.is_empty())
            .map(str::parse)
            .collect::<Result<HeuristicSet>>()?;
        if set.is_empty() {
            return Err(Error::InvalidInput(format!("empty heuristic set `{s}`")));
        }
        Ok(set)
    }
}

impl Serialize for HeuristicSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeuristicScores {
    pub comment_id: u64,
    pub popularity: u64,
    pub word_count: usize,
    pub relevance: f64,
    pub comment_rank: f64,
    pub sentiment: i32,
}

/// Real-valued scores are compared at this resolution so that values equal
/// up to rounding noise tie and fall back to comment id.
const SCORE_RESOLUTION: f64 = 1e9;

fn quantize(x: f64) -> i64 {
    (x * SCORE_RESOLUTION).round() as i64
}

impl HeuristicScores {
    /// Sort key where larger means ranked earlier.
    fn key(&self, h: Heuristic) -> i64 {
        match h {
            Heuristic::Popularity => self.popularity as i64,
            Heuristic::WordCount => self.word_count as i64,
            Heuristic::Relevance => quantize(self.relevance),
            Heuristic::CommentRank => quantize(self.comment_rank),
            Heuristic::Sentiment => -i64::from(self.sentiment),
        }
    }

    pub fn value(&self, h: Heuristic) -> f64 {
        match h {
            Heuristic::Popularity => self.popularity as f64,
            Heuristic::WordCount => self.word_count as f64,
            Heuristic::Relevance => self.relevance,
            Heuristic::CommentRank => self.comment_rank,
            Heuristic::Sentiment => f64::from(self.sentiment),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankerConfig {
    pub vote_filter_min: u64,
    pub per_list_depth: usize,
    pub k: usize,
    pub enabled: HeuristicSet,
    /// Drops comments with fewer whitespace-separated words. Off by default.
    pub min_words: Option<usize>,
    /// Weight relevance by tf-idf over the indexed segments.
    pub tfidf: bool,
}

impl Default for RankerConfig {
    fn default() -> Self {
        Self {
            vote_filter_min: 1,
            per_list_depth: 5,
            k: 3,
            enabled: HeuristicSet::all(),
            min_words: None,
            tfidf: false,
        }
    }
}

impl RankerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.enabled.is_empty() {
            return Err(Error::Config(
                "at least one heuristic must be enabled".into(),
            ));
        }
        if self.per_list_depth == 0 {
            return Err(Error::Config("per_list_depth must be positive".into()));
        }
        let max_k = self.per_list_depth * self.enabled.len();
        if self.k == 0 || self.k > max_k {
            return Err(Error::Config(format!(
                "k must lie in 1..={max_k} for depth {} and {} heuristics, got {}",
                self.per_list_depth,
                self.enabled.len(),
                self.k
            )));
        }
        Ok(())
    }

    pub fn with_heuristics(&self, enabled: HeuristicSet) -> Self {
        Self {
            enabled,
            ..self.clone()
        }
    }
}

pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

/// Comments with at least `vote_filter_min` up-votes and, when set, at least
/// `min_words` words. Order is preserved.
pub fn filter_by_votes(
    comments: &[DiscussionComment],
    cfg: &RankerConfig,
) -> Vec<DiscussionComment> {
    comments
        .iter()
        .filter(|c| c.score >= cfg.vote_filter_min)
        .filter(|c| cfg.min_words.is_none_or(|m| word_count(&c.text) >= m))
        .cloned()
        .collect()
}

/// Everything `score_all` needs besides the comments and the segment.
#[derive(Clone, Copy)]
pub struct ScoringContext<'a> {
    /// Used in prose mode, so keywords are not consulted.
    pub stop_lists: &'a StopLists,
    pub sentiment: &'a dyn SentimentScorer,
    pub pagerank: &'a PageRankConfig,
    pub idf: Option<&'a IdfTable>,
}

/// Scores `candidates`, one answer's filtered comments in sequence order,
/// against `segment`.
pub fn score_all(
    candidates: &[DiscussionComment],
    segment: &CodeSegment,
    ctx: &ScoringContext<'_>,
) -> Result<Vec<HeuristicScores>> {
    let graph = build_interaction_network(candidates);
    let ranks = pagerank(&graph, ctx.pagerank)?;
    Ok(candidates
        .iter()
        .map(|c| {
            let tokens = tokenize(&c.text, TokenMode::Prose, ctx.stop_lists);
            let relevance = match ctx.idf {
                Some(idf) => tfidf_cosine_similarity(&tokens, &segment.tokens, idf),
                None => cosine_similarity(&tokens, &segment.tokens),
            };
            HeuristicScores {
                comment_id: c.id,
                popularity: c.score,
                word_count: word_count(&c.text),
                relevance,
                comment_rank: ranks.score(c.id),
                sentiment: ctx.sentiment.score(&c.text),
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankedList {
    pub heuristic: Heuristic,
    /// Comment ids, best first, at most `per_list_depth` long.
    pub ids: Vec<u64>,
}

/// Orders comments by one heuristic; ties go to the lower comment id.
pub fn rank_by(scores: &[HeuristicScores], h: Heuristic) -> Vec<u64> {
    let mut order: Vec<&HeuristicScores> = scores.iter().collect();
    order.sort_by(|a, b| {
        b.key(h)
            .cmp(&a.key(h))
            .then(a.comment_id.cmp(&b.comment_id))
    });
    order.into_iter().map(|s| s.comment_id).collect()
}

/// One truncated list per enabled heuristic.
pub fn rank_per_heuristic(scores: &[HeuristicScores], cfg: &RankerConfig) -> Vec<RankedList> {
    cfg.enabled
        .iter()
        .map(|h| {
            let mut ids = rank_by(scores, h);
            ids.truncate(cfg.per_list_depth);
            RankedList { heuristic: h, ids }
        })
        .collect()
}

/// The values consulted when fusion frequencies tie.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TieBreak {
    pub popularity: u64,
    pub relevance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Recommended {
    pub comment_id: u64,
    pub frequency: usize,
    pub tie_break: TieBreak,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RankedRecommendation {
    pub comments: Vec<Recommended>,
}

impl RankedRecommendation {
    pub fn ids(&self) -> Vec<u64> {
        self.comments.iter().map(|c| c.comment_id).collect()
    }

    pub fn len(&self) -> usize {
        self.comments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comments.is_empty()
    }

    /// 1-based rank of `comment_id`.
    pub fn position(&self, comment_id: u64) -> Option<usize> {
        self.comments
            .iter()
            .position(|c| c.comment_id == comment_id)
            .map(|p| p + 1)
    }
}

/// Number of lists containing each scored comment.
pub fn fusion_frequencies(
    lists: &[RankedList],
    scores: &[HeuristicScores],
) -> BTreeMap<u64, usize> {
    scores
        .iter()
        .map(|s| {
            let f = lists
                .iter()
                .filter(|l| l.ids.contains(&s.comment_id))
                .count();
            (s.comment_id, f)
        })
        .collect()
}

/// Picks the `k` comments with the highest fusion frequency. Ties go to
/// higher popularity, then higher relevance, then lower id.
pub fn fuse_and_select(
    lists: &[RankedList],
    scores: &[HeuristicScores],
    cfg: &RankerConfig,
) -> RankedRecommendation {
    let freq = fusion_frequencies(lists, scores);
    let mut pool: Vec<&HeuristicScores> = scores.iter().collect();
    pool.sort_by(|a, b| {
        freq[&b.comment_id]
            .cmp(&freq[&a.comment_id])
            .then(b.popularity.cmp(&a.popularity))
            .then(quantize(b.relevance).cmp(&quantize(a.relevance)))
            .then(a.comment_id.cmp(&b.comment_id))
    });
    RankedRecommendation {
        comments: pool
            .into_iter()
            .take(cfg.k)
            .map(|s| Recommended {
                comment_id: s.comment_id,
                frequency: freq[&s.comment_id],
                tie_break: TieBreak {
                    popularity: s.popularity,
                    relevance: s.relevance,
                },
            })
            .collect(),
    }
}

/// Full ranking of one answer segment, kept for inspection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnswerRanking {
    pub answer_id: u64,
    pub segment_id: SegmentId,
    pub scores: Vec<HeuristicScores>,
    pub lists: Vec<RankedList>,
    pub recommendation: RankedRecommendation,
}

impl AnswerRanking {
    /// TSV with columns id, P, WC, R, CR, S, frequency.
    pub fn explain_tsv(&self) -> String {
        let freq = fusion_frequencies(&self.lists, &self.scores);
        let mut out = String::from("id\tP\tWC\tR\tCR\tS\tfrequency\n");
        for s in &self.scores {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{:.6}\t{:.6}\t{}\t{}",
                s.comment_id,
                s.popularity,
                s.word_count,
                s.relevance,
                s.comment_rank,
                s.sentiment,
                freq[&s.comment_id]
            );
        }
        out
    }
}

/// Ranks the comments of indexed answers.
pub struct Recommender<'a> {
    index: &'a Index,
    prose_stops: StopLists,
    sentiment: &'a dyn SentimentScorer,
    pagerank: PageRankConfig,
    config: RankerConfig,
    idf: Option<IdfTable>,
}

impl<'a> Recommender<'a> {
    pub fn new(
        index: &'a Index,
        prose_stops: StopLists,
        sentiment: &'a dyn SentimentScorer,
        pagerank: PageRankConfig,
        config: RankerConfig,
    ) -> Result<Self> {
        config.validate()?;
        pagerank.validate()?;
        let idf = config
            .tfidf
            .then(|| IdfTable::build(index.segments().map(|s| &s.tokens)));
        Ok(Self {
            index,
            prose_stops,
            sentiment,
            pagerank,
            config,
            idf,
        })
    }

    pub fn index(&self) -> &'a Index {
        self.index
    }

    pub fn config(&self) -> &RankerConfig {
        &self.config
    }

    /// The same recommender with a different heuristic subset.
    pub fn with_heuristics(&self, enabled: HeuristicSet) -> Result<Self> {
        let config = self.config.with_heuristics(enabled);
        config.validate()?;
        Ok(Self {
            index: self.index,
            prose_stops: self.prose_stops.clone(),
            sentiment: self.sentiment,
            pagerank: self.pagerank,
            config,
            idf: self.idf.clone(),
        })
    }

    /// Ranks the comments of `answer_id` against one of its segments, the
    /// first one when `ordinal` is `None`.
    pub fn recommend_for_answer(
        &self,
        answer_id: u64,
        ordinal: Option<u32>,
    ) -> Result<AnswerRanking> {
        let answer = self
            .index
            .answer(answer_id)
            .ok_or_else(|| Error::NotFound(format!("answer {answer_id} is not in the index")))?;
        let segment = match ordinal {
            None => answer.segments.first().ok_or_else(|| {
                Error::InvalidTarget(format!("answer {answer_id} has no code segments"))
            })?,
            Some(o) => answer
                .segments
                .iter()
                .find(|s| s.id.ordinal == o)
                .ok_or_else(|| {
                    Error::InvalidTarget(format!("answer {answer_id} has no segment {o}"))
                })?,
        };
        self.rank_segment(segment)
    }

    pub fn rank_segment(&self, segment: &CodeSegment) -> Result<AnswerRanking> {
        let candidates = filter_by_votes(self.index.comments_for(segment.answer_id), &self.config);
        let ctx = ScoringContext {
            stop_lists: &self.prose_stops,
            sentiment: self.sentiment,
            pagerank: &self.pagerank,
            idf: self.idf.as_ref(),
        };
        let scores = score_all(&candidates, segment, &ctx)?;
        let lists = rank_per_heuristic(&scores, &self.config);
        let recommendation = fuse_and_select(&lists, &scores, &self.config);
        Ok(AnswerRanking {
            answer_id: segment.answer_id,
            segment_id: segment.id,
            scores,
            lists,
            recommendation,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(id: u64, p: u64, wc: usize, r: f64, cr: f64, sent: i32) -> HeuristicScores {
        HeuristicScores {
            comment_id: id,
            popularity: p,
            word_count: wc,
            relevance: r,
            comment_rank: cr,
            sentiment: sent,
        }
    }

    fn comment(id: u64, score: u64, text: &str) -> DiscussionComment {
        DiscussionComment {
            id,
            post_id: 1,
            author_id: id as i64,
            author_display_name: format!("user{id}"),
            text: text.into(),
            score,
            sequence_index: 0,
            gold_candidate: false,
        }
    }

    #[test]
    fn vote_filter() {
        let cs = [comment(1, 0, "a"), comment(2, 1, "b"), comment(3, 5, "c")];
        let kept = filter_by_votes(&cs, &RankerConfig::default());
        assert_eq!(kept.iter().map(|c| c.id).collect::<Vec<_>>(), [2, 3]);
        let zeros = [comment(1, 0, "a"), comment(2, 0, "b")];
        assert!(filter_by_votes(&zeros, &RankerConfig::default()).is_empty());
    }

    #[test]
    fn min_words_filter_is_optional() {
        let cs = [
            comment(1, 2, "thanks"),
            comment(2, 2, "this leaks the cursor"),
        ];
        let cfg = RankerConfig {
            min_words: Some(3),
            ..Default::default()
        };
        assert_eq!(filter_by_votes(&cs, &cfg).len(), 1);
        assert_eq!(filter_by_votes(&cs, &RankerConfig::default()).len(), 2);
    }

    #[test]
    fn sentiment_ranks_ascending() {
        let scores = [
            s(1, 0, 0, 0.0, 0.0, 1),
            s(2, 0, 0, 0.0, 0.0, -2),
            s(3, 0, 0, 0.0, 0.0, 0),
        ];
        assert_eq!(rank_by(&scores, Heuristic::Sentiment), [2, 3, 1]);
    }

    #[test]
    fn ties_go_to_lower_id() {
        let scores = [
            s(9, 4, 0, 0.0, 0.0, 0),
            s(3, 4, 0, 0.0, 0.0, 0),
            s(5, 7, 0, 0.0, 0.0, 0),
        ];
        assert_eq!(rank_by(&scores, Heuristic::Popularity), [5, 3, 9]);
    }

    #[test]
    fn lists_are_truncated() {
        let scores: Vec<_> = (1..=7).map(|i| s(i, i, 1, 0.1, 0.2, 0)).collect();
        let lists = rank_per_heuristic(&scores, &RankerConfig::default());
        assert_eq!(lists.len(), 5);
        assert!(lists.iter().all(|l| l.ids.len() == 5));
    }

    #[test]
    fn frequency_five_ranks_first() {
        let scores = [
            s(1, 9, 30, 0.9, 2.0, -2),
            s(2, 1, 1, 0.0, 0.1, 2),
            s(3, 1, 2, 0.1, 0.2, 1),
            s(4, 2, 3, 0.2, 0.3, 1),
            s(5, 3, 4, 0.3, 0.4, 1),
            s(6, 4, 5, 0.4, 0.5, 1),
            s(7, 5, 6, 0.5, 0.6, 2),
        ];
        let cfg = RankerConfig::default();
        let rec = fuse_and_select(&rank_per_heuristic(&scores, &cfg), &scores, &cfg);
        assert_eq!(rec.comments[0].comment_id, 1);
        assert_eq!(rec.comments[0].frequency, 5);
        assert_eq!(rec.len(), 3);
    }

    #[test]
    fn frequency_tie_prefers_popularity() {
        let lists = [
            RankedList {
                heuristic: Heuristic::Popularity,
                ids: vec![1, 2],
            },
            RankedList {
                heuristic: Heuristic::WordCount,
                ids: vec![2, 1],
            },
        ];
        let scores = [s(1, 3, 0, 0.9, 0.0, 0), s(2, 8, 0, 0.1, 0.0, 0)];
        let cfg = RankerConfig {
            enabled: [Heuristic::Popularity, Heuristic::WordCount]
                .into_iter()
                .collect(),
            ..Default::default()
        };
        assert_eq!(fuse_and_select(&lists, &scores, &cfg).ids(), [2, 1]);
    }

    #[test]
    fn pool_smaller_than_k() {
        let scores = [s(4, 1, 3, 0.0, 0.15, 0)];
        let cfg = RankerConfig::default();
        let rec = fuse_and_select(&rank_per_heuristic(&scores, &cfg), &scores, &cfg);
        assert_eq!(rec.ids(), [4]);
    }

    #[test]
    fn config_bounds() {
        assert!(RankerConfig::default().validate().is_ok());
        let bad = RankerConfig {
            k: 6,
            enabled: HeuristicSet::from_iter([Heuristic::Popularity]),
            ..Default::default()
        };
        assert!(matches!(bad.validate(), Err(Error::Config(_))));
        let none = RankerConfig {
            enabled: HeuristicSet::EMPTY,
            ..Default::default()
        };
        assert!(none.validate().is_err());
    }

    #[test]
    fn heuristic_set_text() {
        let rows: Vec<String> = HeuristicSet::ablation()
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(
            rows,
            ["{P}", "{P,R}", "{P,R,CR}", "{P,WC,R,CR}", "{P,WC,R,CR,S}"].map(String::from)
        );
        assert_eq!("P,R,CR".parse::<HeuristicSet>().unwrap().len(), 3);
        assert_eq!(
            "{p, s}".parse::<HeuristicSet>().unwrap().to_string(),
            "{P,S}"
        );
        assert_eq!("all".parse::<HeuristicSet>().unwrap(), HeuristicSet::all());
        assert!("P,X".parse::<HeuristicSet>().is_err());
        assert!("".parse::<HeuristicSet>().is_err());
    }
}
