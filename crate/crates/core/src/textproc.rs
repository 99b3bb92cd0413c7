//! Tokenization shared by relevance scoring, segment matching and the topic
//! corpus builder.
//!
//! Raw tokens are maximal runs of alphanumerics, `_` and `.`. Every raw token
//! goes through [`split_identifier`], so `java.util.HashMap` contributes
//! `java`, `util`, `hashmap`, `hash` and `map`. No stemming is applied in
//! either mode.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::domain::Domain;

/// Bag of lowercase tokens with positive counts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenMultiset {
    counts: BTreeMap<String, u32>,
}

impl TokenMultiset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, token: impl Into<String>) {
        self.insert_n(token, 1);
    }

    /// Adds `n` occurrences. `n == 0` and empty tokens are ignored.
    pub fn insert_n(&mut self, token: impl Into<String>, n: u32) {
        let token = token.into();
        if n == 0 || token.is_empty() {
            return;
        }
        *self.counts.entry(token).or_insert(0) += n;
    }

    pub fn get(&self, token: &str) -> u32 {
        self.counts.get(token).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Number of distinct tokens.
    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    /// Sum of all counts.
    pub fn total(&self) -> u64 {
        self.counts.values().map(|&c| u64::from(c)).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u32)> {
        self.counts.iter().map(|(k, &v)| (k.as_str(), v))
    }

    /// Every count multiplied by `factor` (`factor == 0` yields an empty set).
    pub fn scaled(&self, factor: u32) -> Self {
        let mut out = Self::new();
        for (token, count) in self.iter() {
            out.insert_n(token, count * factor);
        }
        out
    }

    pub fn merge(&mut self, other: &TokenMultiset) {
        for (token, count) in other.iter() {
            self.insert_n(token, count);
        }
    }

    fn gcd(&self) -> u32 {
        self.counts.values().fold(0, |acc, &c| gcd(acc, c))
    }
}

impl<S: Into<String>> FromIterator<S> for TokenMultiset {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        let mut out = Self::new();
        for token in iter {
            out.insert(token);
        }
        out
    }
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Tokenization mode. `Code` additionally removes programming keywords.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenMode {
    Code,
    Prose,
}

/// Stop lists resolved for one domain. Lookups are case-insensitive because
/// every entry and every candidate token is lowercased.
#[derive(Debug, Clone, Default)]
pub struct StopLists {
    pub english_stop_words: HashSet<String>,
    pub programming_keywords: HashSet<String>,
    pub punctuation_tokens: HashSet<String>,
}

impl StopLists {
    pub fn new(
        english: impl IntoIterator<Item = String>,
        keywords: impl IntoIterator<Item = String>,
        punctuation: impl IntoIterator<Item = String>,
    ) -> Self {
        Self {
            english_stop_words: lowercase_set(english),
            programming_keywords: lowercase_set(keywords),
            punctuation_tokens: lowercase_set(punctuation),
        }
    }

    pub fn is_stop_word(&self, token: &str) -> bool {
        self.english_stop_words.contains(&token.to_lowercase())
    }

    pub fn is_keyword(&self, token: &str) -> bool {
        self.programming_keywords.contains(&token.to_lowercase())
    }

    pub fn is_punctuation(&self, token: &str) -> bool {
        self.punctuation_tokens.contains(token)
    }
}

/// The full set of stop lists: one English list, one punctuation list and
/// one keyword list per domain.
#[derive(Debug, Clone, Default)]
pub struct StopListCatalog {
    pub english: Vec<String>,
    pub punctuation: Vec<String>,
    pub keywords: HashMap<Domain, Vec<String>>,
}

impl StopListCatalog {
    /// Resolves the lists for `domain`. Without a domain the keyword lists of
    /// every domain are combined.
    pub fn for_domain(&self, domain: Option<Domain>) -> StopLists {
        let keywords: Vec<String> = match domain {
            Some(d) => self.keywords.get(&d).cloned().unwrap_or_default(),
            None => self.keywords.values().flatten().cloned().collect(),
        };
        StopLists::new(
            self.english.iter().cloned(),
            keywords,
            self.punctuation.iter().cloned(),
        )
    }
}

fn lowercase_set(items: impl IntoIterator<Item = String>) -> HashSet<String> {
    items.into_iter().map(|s| s.to_lowercase()).collect()
}

fn is_raw_token_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '.'
}

/// Splits one source token into lowercase subtokens.
///
/// Dotted tokens are split on `.`. Each part is emitted whole (lowercased),
/// followed by its pieces when it breaks at a lower-to-upper case boundary,
/// an underscore or a digit run. Digit runs themselves are dropped.
pub fn split_identifier(token: &str) -> Vec<String> {
    let mut out = Vec::new();
    for part in token.split('.').filter(|p| !p.is_empty()) {
        let pieces = split_part(part);
        let whole = part.trim_matches('_').to_lowercase();
        if whole.chars().any(|c| c.is_alphabetic()) {
            out.push(whole);
        }
        if pieces.len() > 1 {
            out.extend(pieces);
        }
    }
    out
}

fn split_part(part: &str) -> Vec<String> {
    let mut pieces = Vec::new();
    let mut current = String::new();
    let mut prev: Option<char> = None;
    for c in part.chars() {
        if c == '_' || c.is_numeric() {
            if !current.is_empty() {
                pieces.push(std::mem::take(&mut current));
            }
            prev = None;
            continue;
        }
        if let Some(p) = prev {
            if p.is_lowercase() && c.is_uppercase() && !current.is_empty() {
                pieces.push(std::mem::take(&mut current));
            }
        }
        current.extend(c.to_lowercase());
        prev = Some(c);
    }
    if !current.is_empty() {
        pieces.push(current);
    }
    pieces
}

/// Tokens of `text` in order of appearance, after splitting and filtering.
pub fn token_sequence(text: &str, mode: TokenMode, stop: &StopLists) -> Vec<String> {
    let mut out = Vec::new();
    for raw in text.split(|c: char| !is_raw_token_char(c)) {
        if raw.is_empty() {
            continue;
        }
        for token in split_identifier(raw) {
            if token.chars().count() < 2
                || token.chars().all(|c| c.is_numeric())
                || stop.is_stop_word(&token)
                || stop.is_punctuation(&token)
                || (mode == TokenMode::Code && stop.is_keyword(&token))
            {
                continue;
            }
            out.push(token);
        }
    }
    out
}

pub fn tokenize(text: &str, mode: TokenMode, stop: &StopLists) -> TokenMultiset {
    token_sequence(text, mode, stop).into_iter().collect()
}

/// Cosine similarity over raw term frequencies, in `[0, 1]`.
///
/// Counts are reduced by their gcd first and the arithmetic stays in
/// integers until the final division, so the result is exactly symmetric and
/// exactly invariant under uniform scaling of either argument.
pub fn cosine_similarity(a: &TokenMultiset, b: &TokenMultiset) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let (ga, gb) = (u64::from(a.gcd()), u64::from(b.gcd()));
    let norm_sq = |m: &TokenMultiset, g: u64| -> u128 {
        m.iter()
            .map(|(_, c)| {
                let c = u128::from(u64::from(c) / g);
                c * c
            })
            .sum()
    };
    let (small, large, gs, gl) = if a.distinct() <= b.distinct() {
        (a, b, ga, gb)
    } else {
        (b, a, gb, ga)
    };
    let dot: u128 = small
        .iter()
        .map(|(t, c)| u128::from(u64::from(c) / gs) * u128::from(u64::from(large.get(t)) / gl))
        .sum();
    if dot == 0 {
        return 0.0;
    }
    let denom = ((norm_sq(a, ga) as f64) * (norm_sq(b, gb) as f64)).sqrt();
    (dot as f64 / denom).clamp(0.0, 1.0)
}

/// Inverse document frequencies over a fixed document collection.
#[derive(Debug, Clone, Default)]
pub struct IdfTable {
    idf: HashMap<String, f64>,
    documents: usize,
}

impl IdfTable {
    pub fn build<'a>(docs: impl IntoIterator<Item = &'a TokenMultiset>) -> Self {
        let mut df: HashMap<String, usize> = HashMap::new();
        let mut documents = 0;
        for doc in docs {
            documents += 1;
            for (token, _) in doc.iter() {
                *df.entry(token.to_string()).or_insert(0) += 1;
            }
        }
        let n = documents as f64;
        let idf = df
            .into_iter()
            .map(|(t, d)| (t, ((1.0 + n) / (1.0 + d as f64)).ln() + 1.0))
            .collect();
        Self { idf, documents }
    }

    /// Weight of a term unseen in the collection.
    fn unseen(&self) -> f64 {
        (1.0 + self.documents as f64).ln() + 1.0
    }

    pub fn weight(&self, token: &str) -> f64 {
        self.idf
            .get(token)
            .copied()
            .unwrap_or_else(|| self.unseen())
    }
}

fn tfidf_weights<'a>(m: &'a TokenMultiset, idf: &IdfTable) -> BTreeMap<&'a str, f64> {
    m.iter()
        .map(|(t, c)| (t, f64::from(c) * idf.weight(t)))
        .collect()
}

/// Cosine similarity with tf-idf weights. Falls back to the same `[0, 1]`
/// range and empty-input behaviour as [`cosine_similarity`].
pub fn tfidf_cosine_similarity(a: &TokenMultiset, b: &TokenMultiset, idf: &IdfTable) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let (wa, wb) = (tfidf_weights(a, idf), tfidf_weights(b, idf));
    let dot: f64 = wa
        .iter()
        .filter_map(|(t, x)| wb.get(t).map(|y| x * y))
        .sum();
    let na: f64 = wa.values().map(|x| x * x).sum();
    let nb: f64 = wb.values().map(|x| x * x).sum();
    if dot == 0.0 {
        return 0.0;
    }
    (dot / (na * nb).sqrt()).clamp(0.0, 1.0)
}
