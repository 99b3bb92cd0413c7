//! Sentence-level lexicon sentiment on a five-class `-2..=2` scale.
//!
//! Each sentence's raw valence is the sum of its lexicon hits, with a hit's
//! sign flipped when a negator occurs within the preceding window. The raw
//! value is bucketed and a comment's score is the sum of its sentence
//! buckets.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Word valences in `[-5, 5]` plus the negator words.
#[derive(Debug, Clone, Default)]
pub struct SentimentLexicon {
    entries: HashMap<String, i32>,
    negators: HashSet<String>,
}

impl SentimentLexicon {
    pub fn new(
        entries: impl IntoIterator<Item = (String, i32)>,
        negators: impl IntoIterator<Item = String>,
    ) -> Result<Self> {
        let mut map = HashMap::new();
        for (word, valence) in entries {
            let word = normalize_word(&word);
            if word.is_empty() {
                return Err(Error::Config("empty word in sentiment lexicon".into()));
            }
            if !(-5..=5).contains(&valence) {
                return Err(Error::Config(format!(
                    "valence {valence} for `{word}` outside [-5, 5]"
                )));
            }
            map.insert(word, valence);
        }
        Ok(Self {
            entries: map,
            negators: negators.into_iter().map(|n| normalize_word(&n)).collect(),
        })
    }

    /// Parses `word<TAB>valence` lines; `#` starts a comment line.
    pub fn parse(lexicon: &str, negators: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in lexicon.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (word, valence) = line.rsplit_once(['\t', ' ']).ok_or_else(|| Error::Parse {
                line: i + 1,
                message: format!("expected `word<TAB>valence`, got `{line}`"),
            })?;
            let valence = valence.trim().parse::<i32>().map_err(|e| Error::Parse {
                line: i + 1,
                message: format!("bad valence `{valence}`: {e}"),
            })?;
            entries.push((word.trim().to_string(), valence));
        }
        let negators = crate::resources::parse_word_list(negators);
        Self::new(entries, negators)
    }

    pub fn valence(&self, word: &str) -> Option<i32> {
        self.entries.get(word).copied()
    }

    pub fn is_negator(&self, word: &str) -> bool {
        self.negators.contains(word)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn normalize_word(w: &str) -> String {
    w.trim().replace('\u{2019}', "'").to_lowercase()
}

/// Bucket boundaries mapping a raw valence sum onto `-2..=2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SentimentConfig {
    /// `|raw|` at or above this is a weak (±1) sentence.
    pub weak_threshold: i32,
    /// `|raw|` at or above this is a strong (±2) sentence.
    pub strong_threshold: i32,
    /// How many preceding tokens are searched for a negator.
    pub negation_window: usize,
}

impl Default for SentimentConfig {
    fn default() -> Self {
        Self {
            weak_threshold: 1,
            strong_threshold: 4,
            negation_window: 3,
        }
    }
}

impl SentimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.weak_threshold < 1 || self.strong_threshold <= self.weak_threshold {
            return Err(Error::Config(format!(
                "sentiment thresholds must satisfy 1 <= weak < strong, got weak={} strong={}",
                self.weak_threshold, self.strong_threshold
            )));
        }
        Ok(())
    }

    pub fn bucket(&self, raw: i32) -> i32 {
        let class = if raw.abs() >= self.strong_threshold {
            2
        } else if raw.abs() >= self.weak_threshold {
            1
        } else {
            0
        };
        class * raw.signum()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CommentSentiment {
    pub sentence_scores: Vec<i32>,
    pub total: i32,
}

/// Splits on `.`, `!` or `?` runs that are followed by whitespace or the end
/// of the text. Backtick spans are never split.
pub fn split_sentences(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut sentences = Vec::new();
    let mut current = String::new();
    let mut in_code = false;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        current.push(c);
        if c == '`' {
            in_code = !in_code;
        } else if !in_code && matches!(c, '.' | '!' | '?') {
            while i + 1 < chars.len() && matches!(chars[i + 1], '.' | '!' | '?') {
                i += 1;
                current.push(chars[i]);
            }
            if chars.get(i + 1).is_none_or(|n| n.is_whitespace()) {
                push_trimmed(&mut sentences, &mut current);
            }
        }
        i += 1;
    }
    push_trimmed(&mut sentences, &mut current);
    sentences
}

fn push_trimmed(out: &mut Vec<String>, buf: &mut String) {
    let s = buf.trim();
    if !s.is_empty() {
        out.push(s.to_string());
    }
    buf.clear();
}

fn words(sentence: &str) -> Vec<String> {
    sentence
        .replace('\u{2019}', "'")
        .split(|c: char| !(c.is_alphanumeric() || c == '\''))
        .map(|w| w.trim_matches('\'').to_lowercase())
        .filter(|w| !w.is_empty())
        .collect()
}

pub fn score_sentence(sentence: &str, lex: &SentimentLexicon, cfg: &SentimentConfig) -> i32 {
    let words = words(sentence);
    let mut raw = 0;
    for (i, w) in words.iter().enumerate() {
        let Some(valence) = lex.valence(w) else {
            continue;
        };
        let start = i.saturating_sub(cfg.negation_window);
        let negated = words[start..i].iter().any(|p| lex.is_negator(p));
        raw += if negated { -valence } else { valence };
    }
    cfg.bucket(raw)
}

pub fn score_comment(
    text: &str,
    lex: &SentimentLexicon,
    cfg: &SentimentConfig,
) -> CommentSentiment {
    let sentence_scores: Vec<i32> = split_sentences(text)
        .iter()
        .map(|s| score_sentence(s, lex, cfg))
        .collect();
    CommentSentiment {
        total: sentence_scores.iter().sum(),
        sentence_scores,
    }
}

/// Anything that maps comment text to an integer sentiment. The ranker only
/// sees the integer.
pub trait SentimentScorer: Send + Sync {
    fn score(&self, text: &str) -> i32;
}

#[derive(Debug, Clone)]
pub struct LexiconScorer {
    pub lexicon: SentimentLexicon,
    pub config: SentimentConfig,
}

impl SentimentScorer for LexiconScorer {
    fn score(&self, text: &str) -> i32 {
        score_comment(text, &self.lexicon, &self.config).total
    }
}

/// Scores every comment 0, which removes the sentiment signal.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeutralScorer;

impl SentimentScorer for NeutralScorer {
    fn score(&self, _text: &str) -> i32 {
        0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SentimentProvider {
    #[default]
    Lexicon,
    Neutral,
}

impl FromStr for SentimentProvider {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lexicon" => Ok(Self::Lexicon),
            "neutral" => Ok(Self::Neutral),
            other => Err(Error::Config(format!(
                "unknown sentiment provider `{other}`"
            ))),
        }
    }
}

impl fmt::Display for SentimentProvider {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Lexicon => "lexicon",
            Self::Neutral => "neutral",
        })
    }
}
