//! LDA topic analysis of the API names used in answer code.
//!
//! Each accepted answer becomes one document made of the identifier
//! subtokens of its code segments. Topics are fit by collapsed Gibbs
//! sampling, filtered by prominence (a topic's share of all token
//! assignments) and ranked by how many documents list them among their top
//! topics.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::ingest::Index;
use crate::textproc::{token_sequence, StopListCatalog, TokenMode};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ApiDocument {
    pub answer_id: u64,
    pub tokens: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ApiCorpus {
    pub domain: Option<Domain>,
    pub documents: Vec<ApiDocument>,
}

impl ApiCorpus {
    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn vocabulary(&self) -> BTreeSet<&str> {
        self.documents
            .iter()
            .flat_map(|d| d.tokens.iter().map(String::as_str))
            .collect()
    }
}

/// One document per accepted answer whose question carries the domain tag
/// (any question when `domain` is `None`). Documents without tokens are
/// dropped.
pub fn build_api_corpus(
    index: &Index,
    domain: Option<Domain>,
    stop_lists: &StopListCatalog,
) -> ApiCorpus {
    let stop = stop_lists.for_domain(domain);
    let documents = index
        .answers()
        .filter(|a| a.is_accepted)
        .filter(|a| {
            domain.is_none_or(|d| {
                index
                    .question(a.question_id)
                    .is_some_and(|q| q.tags.iter().any(|t| t == d.tag()))
            })
        })
        .map(|a| ApiDocument {
            answer_id: a.id,
            tokens: a
                .segments
                .iter()
                .flat_map(|s| token_sequence(&s.raw_text, TokenMode::Code, &stop))
                .collect(),
        })
        .filter(|d| !d.tokens.is_empty())
        .collect();
    ApiCorpus { domain, documents }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicModelConfig {
    pub k: usize,
    /// Per-topic document prior; `1/k` when `None`.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iterations: usize,
    pub words_per_topic: usize,
    pub top_topics_per_doc: usize,
    /// Topics whose share of token assignments is below this are dropped.
    pub prominence_threshold: f64,
    pub seed: u64,
}

impl Default for TopicModelConfig {
    fn default() -> Self {
        Self {
            k: 150,
            alpha: None,
            beta: 0.006,
            iterations: 1000,
            words_per_topic: 6,
            top_topics_per_doc: 5,
            prominence_threshold: 0.006,
            seed: 42,
        }
    }
}

impl TopicModelConfig {
    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(1.0 / self.k as f64)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.k == 0 {
            return fail("k must be positive".into());
        }
        if self.alpha().is_nan() || self.alpha() <= 0.0 {
            return fail(format!("alpha must be positive, got {}", self.alpha()));
        }
        if self.beta.is_nan() || self.beta <= 0.0 {
            return fail(format!("beta must be positive, got {}", self.beta));
        }
        if self.iterations == 0 || self.words_per_topic == 0 || self.top_topics_per_doc == 0 {
            return fail(
                "iterations, words_per_topic and top_topics_per_doc must be positive".into(),
            );
        }
        if !(0.0..=1.0).contains(&self.prominence_threshold) {
            return fail(format!(
                "prominence_threshold must lie in [0, 1], got {}",
                self.prominence_threshold
            ));
        }
        Ok(())
    }
}

/// Collapsed Gibbs sampler state. Every token holds exactly one topic.
pub struct LdaSampler {
    k: usize,
    alpha: f64,
    beta: f64,
    vocab: Vec<String>,
    doc_ids: Vec<u64>,
    docs: Vec<Vec<usize>>,
    assignments: Vec<Vec<usize>>,
    doc_topic: Vec<Vec<u32>>,
    topic_word: Vec<Vec<u32>>,
    topic_total: Vec<u32>,
    rng: ChaCha8Rng,
    weights: Vec<f64>,
}

impl LdaSampler {
    /// Random initial assignment drawn from the seeded generator.
    pub fn new(corpus: &ApiCorpus, cfg: &TopicModelConfig) -> Result<Self> {
        cfg.validate()?;
        if corpus.is_empty() {
            return Err(Error::InvalidInput("topic corpus has no documents".into()));
        }
        let vocab: Vec<String> = corpus.vocabulary().into_iter().map(String::from).collect();
        if cfg.k > vocab.len() {
            return Err(Error::Config(format!(
                "k = {} exceeds the vocabulary size {}",
                cfg.k,
                vocab.len()
            )));
        }
        let docs: Vec<Vec<usize>> = corpus
            .documents
            .iter()
            .map(|d| {
                d.tokens
                    .iter()
                    .map(|t| vocab.binary_search(t).expect("token is in vocabulary"))
                    .collect()
            })
            .collect();
        let k = cfg.k;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut doc_topic = vec![vec![0u32; k]; docs.len()];
        let mut topic_word = vec![vec![0u32; vocab.len()]; k];
        let mut topic_total = vec![0u32; k];
        let assignments = docs
            .iter()
            .enumerate()
            .map(|(d, words)| {
                words
                    .iter()
                    .map(|&w| {
                        let z = rng.random_range(0..k);
                        doc_topic[d][z] += 1;
                        topic_word[z][w] += 1;
                        topic_total[z] += 1;
                        z
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            k,
            alpha: cfg.alpha(),
            beta: cfg.beta,
            vocab,
            doc_ids: corpus.documents.iter().map(|d| d.answer_id).collect(),
            docs,
            assignments,
            doc_topic,
            topic_word,
            topic_total,
            rng,
            weights: vec![0.0; k],
        })
    }

    /// Resamples every token once.
    pub fn sweep(&mut self) {
        let v_beta = self.vocab.len() as f64 * self.beta;
        for d in 0..self.docs.len() {
            for i in 0..self.docs[d].len() {
                let w = self.docs[d][i];
                let old = self.assignments[d][i];
                self.doc_topic[d][old] -= 1;
                self.topic_word[old][w] -= 1;
                self.topic_total[old] -= 1;

                let mut total = 0.0;
                for t in 0..self.k {
                    total += (f64::from(self.doc_topic[d][t]) + self.alpha)
                        * (f64::from(self.topic_word[t][w]) + self.beta)
                        / (f64::from(self.topic_total[t]) + v_beta);
                    self.weights[t] = total;
                }
                let u = self.rng.random::<f64>() * total;
                let new = self
                    .weights
                    .iter()
                    .position(|&c| u < c)
                    .unwrap_or(self.k - 1);

                self.assignments[d][i] = new;
                self.doc_topic[d][new] += 1;
                self.topic_word[new][w] += 1;
                self.topic_total[new] += 1;
            }
        }
    }

    pub fn total_assignments(&self) -> u64 {
        self.topic_total.iter().map(|&n| u64::from(n)).sum()
    }

    pub fn token_count(&self) -> u64 {
        self.docs.iter().map(|d| d.len() as u64).sum()
    }

    pub fn into_model(self, words_per_topic: usize) -> TopicModel {
        let total = self.total_assignments().max(1) as f64;
        let prominence = self
            .topic_total
            .iter()
            .map(|&n| f64::from(n) / total)
            .collect();
        let top_words = self
            .topic_word
            .iter()
            .map(|counts| {
                let mut order: Vec<usize> = (0..counts.len()).filter(|&w| counts[w] > 0).collect();
                order.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
                order
                    .into_iter()
                    .take(words_per_topic)
                    .map(|w| self.vocab[w].clone())
                    .collect()
            })
            .collect();
        TopicModel {
            k: self.k,
            alpha: self.alpha,
            beta: self.beta,
            vocab: self.vocab,
            doc_ids: self.doc_ids,
            doc_topic_counts: self.doc_topic,
            topic_word_counts: self.topic_word,
            topic_totals: self.topic_total,
            top_words,
            prominence,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicModel {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub vocab: Vec<String>,
    pub doc_ids: Vec<u64>,
    pub doc_topic_counts: Vec<Vec<u32>>,
    pub topic_word_counts: Vec<Vec<u32>>,
    pub topic_totals: Vec<u32>,
    pub top_words: Vec<Vec<String>>,
    /// Share of all token assignments held by each topic.
    pub prominence: Vec<f64>,
}

impl TopicModel {
    pub fn doc_topic_distribution(&self, doc: usize) -> Vec<f64> {
        let counts = &self.doc_topic_counts[doc];
        let n: u32 = counts.iter().sum();
        let denom = f64::from(n) + self.k as f64 * self.alpha;
        counts
            .iter()
            .map(|&c| (f64::from(c) + self.alpha) / denom)
            .collect()
    }

    pub fn topic_word_distribution(&self, topic: usize) -> Vec<f64> {
        let denom = f64::from(self.topic_totals[topic]) + self.vocab.len() as f64 * self.beta;
        self.topic_word_counts[topic]
            .iter()
            .map(|&c| (f64::from(c) + self.beta) / denom)
            .collect()
    }

    /// Topics of a document by assignment count, ties by topic id, limited
    /// to topics that hold at least one of its tokens.
    pub fn top_topics(&self, doc: usize, n: usize) -> Vec<usize> {
        let counts = &self.doc_topic_counts[doc];
        let mut order: Vec<usize> = (0..self.k).filter(|&t| counts[t] > 0).collect();
        order.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
        order.truncate(n);
        order
    }
}

/// Runs the sampler for `cfg.iterations` sweeps.
pub fn fit_lda(corpus: &ApiCorpus, cfg: &TopicModelConfig) -> Result<TopicModel> {
    let mut sampler = LdaSampler::new(corpus, cfg)?;
    for _ in 0..cfg.iterations {
        sampler.sweep();
    }
    Ok(sampler.into_model(cfg.words_per_topic))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopicEntry {
    pub rank: usize,
    pub topic_id: usize,
    pub doc_frequency: usize,
    pub prominence: f64,
    pub words: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopicReport {
    pub entries: Vec<TopicEntry>,
    /// Topics removed by the prominence threshold.
    pub dropped: usize,
}

impl TopicReport {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_frequency(&self) -> usize {
        self.entries.iter().map(|e| e.doc_frequency).sum()
    }

    pub fn to_tsv(&self, words_per_topic: usize) -> String {
        let mut out = String::from("rank\ttopic_id\tdoc_frequency");
        for i in 1..=words_per_topic {
            let _ = write!(out, "\tword{i}");
        }
        out.push('\n');
        for e in &self.entries {
            let _ = write!(out, "{}\t{}\t{}", e.rank, e.topic_id, e.doc_frequency);
            for i in 0..words_per_topic {
                out.push('\t');
                out.push_str(e.words.get(i).map_or("", String::as_str));
            }
            out.push('\n');
        }
        out
    }
}

/// Drops low-prominence topics and ranks the rest by the number of
/// documents listing them among their top topics.
pub fn rank_topics(model: &TopicModel, cfg: &TopicModelConfig) -> TopicReport {
    let surviving: Vec<bool> = model
        .prominence
        .iter()
        .map(|&p| p >= cfg.prominence_threshold)
        .collect();
    let mut frequency = vec![0usize; model.k];
    for doc in 0..model.doc_topic_counts.len() {
        let listed = model
            .top_topics(doc, model.k)
            .into_iter()
            .filter(|&t| surviving[t])
            .take(cfg.top_topics_per_doc);
        for t in listed {
            frequency[t] += 1;
        }
    }
    let mut ids: Vec<usize> = (0..model.k).filter(|&t| surviving[t]).collect();
    ids.sort_by(|&a, &b| frequency[b].cmp(&frequency[a]).then(a.cmp(&b)));
    let entries: Vec<TopicEntry> = ids
        .into_iter()
        .enumerate()
        .map(|(i, t)| TopicEntry {
            rank: i + 1,
            topic_id: t,
            doc_frequency: frequency[t],
            prominence: model.prominence[t],
            words: model.top_words[t].clone(),
        })
        .collect();
    let dropped = model.k - entries.len();
    if entries.is_empty() {
        log::warn!(
            "all {} topics fall below the prominence threshold {}",
            model.k,
            cfg.prominence_threshold
        );
    }
    TopicReport { entries, dropped }
}
