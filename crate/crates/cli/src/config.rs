//! Flat `key = value` configuration file.
//!
//! Values set here are overridden by command-line flags. Unknown keys are
//! rejected so typos do not pass silently.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use insight_core::graphrank::PageRankConfig;
use insight_core::ingest::{FilterProfile, SegmentFilterConfig};
use insight_core::matcher::MatcherConfig;
use insight_core::ranker::RankerConfig;
use insight_core::sentiment::{SentimentConfig, SentimentProvider};
use insight_core::topics::TopicModelConfig;
use insight_core::Error;

#[derive(Debug, Clone, PartialEq)]
pub struct AppConfig {
    pub index_dir: PathBuf,
    pub data_dir: Option<PathBuf>,
    pub threads: Option<usize>,
    pub sentiment_provider: SentimentProvider,
    pub filter_profile: FilterProfile,
    pub segment_filter: SegmentFilterConfig,
    pub ranker: RankerConfig,
    pub pagerank: PageRankConfig,
    pub sentiment: SentimentConfig,
    pub matcher: MatcherConfig,
    pub topics: TopicModelConfig,
}

impl Default for AppConfig {
    fn default() -> Self {
        Self {
            index_dir: PathBuf::from("index"),
            data_dir: None,
            threads: None,
            sentiment_provider: SentimentProvider::default(),
            filter_profile: FilterProfile::default(),
            segment_filter: SegmentFilterConfig::default(),
            ranker: RankerConfig::default(),
            pagerank: PageRankConfig::default(),
            sentiment: SentimentConfig::default(),
            matcher: MatcherConfig::default(),
            topics: TopicModelConfig::default(),
        }
    }
}

fn parse<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T, Error> {
    value.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid value `{value}` for `{key}`"),
    })
}

impl AppConfig {
    pub fn load(path: &Path) -> Result<Self, Error> {
        if !path.is_file() {
            return Err(Error::InputNotFound(path.to_path_buf()));
        }
        let text = fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), Error> {
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let row = raw.trim();
            if row.is_empty() || row.starts_with('#') {
                continue;
            }
            let (key, value) = row.split_once('=').ok_or_else(|| Error::Parse {
                line,
                message: format!("expected `key = value`, got `{row}`"),
            })?;
            self.set(line, key.trim(), value.trim())?;
        }
        Ok(())
    }

    fn set(&mut self, line: usize, key: &str, v: &str) -> Result<(), Error> {
        match key {
            "index_dir" => self.index_dir = PathBuf::from(v),
            "data_dir" => self.data_dir = Some(PathBuf::from(v)),
            "threads" => self.threads = Some(parse(line, key, v)?),
            "sentiment_provider" => self.sentiment_provider = parse(line, key, v)?,
            "filter_profile" => self.filter_profile = parse(line, key, v)?,
            "segment.min_lines" => self.segment_filter.min_lines = parse(line, key, v)?,
            "segment.min_code_char_ratio" => {
                self.segment_filter.min_code_char_ratio = parse(line, key, v)?
            }
            "segment.min_identifier_ratio" => {
                self.segment_filter.min_identifier_ratio = parse(line, key, v)?
            }
            "ranker.vote_filter_min" => self.ranker.vote_filter_min = parse(line, key, v)?,
            "ranker.per_list_depth" => self.ranker.per_list_depth = parse(line, key, v)?,
            "ranker.k" => self.ranker.k = parse(line, key, v)?,
            "ranker.heuristics" => self.ranker.enabled = parse(line, key, v)?,
            "ranker.min_words" => {
                self.ranker.min_words = match v {
                    "" | "off" | "none" => None,
                    n => Some(parse(line, key, n)?),
                }
            }
            "ranker.tfidf" => self.ranker.tfidf = parse(line, key, v)?,
            "pagerank.damping" => self.pagerank.damping = parse(line, key, v)?,
            "pagerank.epsilon" => self.pagerank.epsilon = parse(line, key, v)?,
            "pagerank.max_iterations" => self.pagerank.max_iterations = parse(line, key, v)?,
            "sentiment.weak_threshold" => self.sentiment.weak_threshold = parse(line, key, v)?,
            "sentiment.strong_threshold" => self.sentiment.strong_threshold = parse(line, key, v)?,
            "sentiment.negation_window" => self.sentiment.negation_window = parse(line, key, v)?,
            "matcher.tau" => self.matcher.tau = parse(line, key, v)?,
            "matcher.top_n" => self.matcher.top_n = parse(line, key, v)?,
            "topics.k" => self.topics.k = parse(line, key, v)?,
            "topics.alpha" => self.topics.alpha = Some(parse(line, key, v)?),
            "topics.beta" => self.topics.beta = parse(line, key, v)?,
            "topics.iterations" => self.topics.iterations = parse(line, key, v)?,
            "topics.words_per_topic" => self.topics.words_per_topic = parse(line, key, v)?,
            "topics.top_topics_per_doc" => self.topics.top_topics_per_doc = parse(line, key, v)?,
            "topics.prominence_threshold" => {
                self.topics.prominence_threshold = parse(line, key, v)?
            }
            "topics.seed" => self.topics.seed = parse(line, key, v)?,
            other => {
                return Err(Error::Parse {
                    line,
                    message: format!("unknown configuration key `{other}`"),
                })
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), Error> {
        self.ranker.validate()?;
        self.pagerank.validate()?;
        self.sentiment.validate()?;
        self.matcher.validate()?;
        self.topics.validate()?;
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be positive".into()));
        }
        Ok(())
    }
}
