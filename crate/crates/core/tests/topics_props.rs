use insight_core::topics::{
    fit_lda, rank_topics, ApiCorpus, ApiDocument, LdaSampler, TopicModelConfig,
};
use proptest::prelude::*;

/// Half the documents draw from `a0..a9`, half from `b0..b9`.
fn planted(docs: usize, len: usize, seed: u64) -> ApiCorpus {
    let documents = (0..docs)
        .map(|d| {
            let prefix = if d % 2 == 0 { "a" } else { "b" };
            let tokens = (0..len)
                .map(|i| format!("{prefix}{}", (i * 7 + d * 3 + seed as usize) % 10))
                .collect();
            ApiDocument {
                answer_id: d as u64,
                tokens,
            }
        })
        .collect();
    ApiCorpus {
        domain: None,
        documents,
    }
}

fn small(k: usize, iterations: usize, seed: u64) -> TopicModelConfig {
    TopicModelConfig {
        k,
        iterations,
        seed,
        ..TopicModelConfig::default()
    }
}

#[test]
fn planted_topics_separate() {
    let model = fit_lda(&planted(40, 15, 0), &small(2, 200, 3)).unwrap();
    for counts in &model.topic_word_counts {
        let a: u32 = model
            .vocab
            .iter()
            .zip(counts)
            .filter(|(w, _)| w.starts_with('a'))
            .map(|(_, &c)| c)
            .sum();
        let total: u32 = counts.iter().sum();
        let purity = f64::from(a.max(total - a)) / f64::from(total);
        assert!(purity >= 0.9, "purity {purity}");
    }
}

#[test]
fn k_above_vocabulary_is_a_config_error() {
    let err = fit_lda(&planted(4, 5, 0), &small(21, 5, 0)).unwrap_err();
    assert!(matches!(err, insight_core::Error::Config(_)));
}

#[test]
fn report_ranks_by_document_frequency() {
    let cfg = TopicModelConfig {
        prominence_threshold: 0.0,
        ..small(4, 50, 9)
    };
    let model = fit_lda(&planted(30, 10, 1), &cfg).unwrap();
    let report = rank_topics(&model, &cfg);
    assert!(!report.is_empty());
    for pair in report.entries.windows(2) {
        assert!(pair[0].doc_frequency >= pair[1].doc_frequency);
    }
    let tsv = report.to_tsv(cfg.words_per_topic);
    assert!(tsv.starts_with("rank\ttopic_id\tdoc_frequency\tword1"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sweeps_conserve_token_assignments(docs in 2usize..12, len in 5usize..12, k in 2usize..6, seed in any::<u64>()) {
        let corpus = planted(docs, len, seed % 5);
        let mut s = LdaSampler::new(&corpus, &small(k, 10, seed)).unwrap();
        let tokens = s.token_count();
        prop_assert_eq!(s.total_assignments(), tokens);
        for _ in 0..10 {
            s.sweep();
            prop_assert_eq!(s.total_assignments(), tokens);
        }
    }

    #[test]
    fn same_seed_same_model(seed in any::<u64>()) {
        let corpus = planted(10, 8, 2);
        let cfg = small(3, 20, seed);
        prop_assert_eq!(fit_lda(&corpus, &cfg).unwrap(), fit_lda(&corpus, &cfg).unwrap());
    }
}
