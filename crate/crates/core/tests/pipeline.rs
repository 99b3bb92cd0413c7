use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use insight_core::eval::{evaluate, load_gold, Category};
use insight_core::graphrank::{build_interaction_network, PageRankConfig};
use insight_core::ingest::{
    apply_corpus_filters, ingest_dump, CorpusFilter, DumpPaths, FilterProfile, Index, IngestConfig,
};
use insight_core::matcher::{match_segments, recommend_for_code, MatchStatus, MatcherConfig};
use insight_core::ranker::{filter_by_votes, HeuristicSet, RankerConfig, Recommender};
use insight_core::sentiment::{LexiconScorer, SentimentConfig};
use insight_core::{Domain, Resources};
use proptest::prelude::*;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn ingest(name: &str, profile: FilterProfile) -> (Index, insight_core::ingest::Manifest) {
    let res = Resources::embedded();
    let paths = DumpPaths::in_dir(&fixture(name)).unwrap();
    ingest_dump(&paths, profile, &IngestConfig::default(), &res.stop_lists).unwrap()
}

fn scorer(res: &Resources) -> LexiconScorer {
    LexiconScorer {
        lexicon: res.lexicon.clone(),
        config: SentimentConfig::default(),
    }
}

fn recommender<'a>(index: &'a Index, res: &Resources, s: &'a LexiconScorer) -> Recommender<'a> {
    Recommender::new(
        index,
        res.stop_lists.for_domain(None),
        s,
        PageRankConfig::default(),
        RankerConfig::default(),
    )
    .unwrap()
}

#[test]
fn showcase_thread_yields_the_three_insightful_comments() {
    let (index, _) = ingest("showcase", FilterProfile::None);
    let res = Resources::embedded();
    let s = scorer(&res);
    let ranking = recommender(&index, &res, &s)
        .recommend_for_answer(2, None)
        .unwrap();
    let got: BTreeSet<u64> = ranking.recommendation.ids().into_iter().collect();
    assert_eq!(got, BTreeSet::from([101, 107, 111]));
    assert_eq!(index.comments_for(2).len(), 11);
}

#[test]
fn showcase_reference_edge_points_back_to_the_stimulus() {
    let (index, _) = ingest("showcase", FilterProfile::None);
    let filtered = filter_by_votes(index.comments_for(2), &RankerConfig::default());
    let g = build_interaction_network(&filtered);
    assert!(g.has_edge(105, 101));
    assert!(g.has_edge(101, 102) && g.has_edge(102, 101));
}

#[test]
fn listing_query_finds_the_dialog_segment() {
    let (index, _) = ingest("showcase", FilterProfile::None);
    let res = Resources::embedded();
    let s = scorer(&res);
    let query = std::fs::read_to_string(fixture("showcase/query.java")).unwrap();
    let out = recommend_for_code(
        &recommender(&index, &res, &s),
        &query,
        None,
        &MatcherConfig::default(),
        &res.stop_lists,
        &res.refinement,
    )
    .unwrap();
    assert_eq!(out.status, MatchStatus::Ok);
    let top = &out.results[0];
    assert_eq!(top.segment.segment_id.to_string(), "2-0");
    assert_eq!(top.comments.len(), 3);
    assert!(top.comments.iter().all(|c| !c.text_refined.contains('@')));
}

#[test]
fn eval_fixture_discards_a_plausible_share_of_blocks() {
    let (_, manifest) = ingest("eval", FilterProfile::None);
    let pct = manifest.stats.discarded_percentage();
    assert!((6.0..=13.0).contains(&pct), "{pct}");
}

#[test]
fn full_heuristics_do_not_lose_c4_recall() {
    let (index, _) = ingest("eval", FilterProfile::None);
    let res = Resources::embedded();
    let s = scorer(&res);
    let gold = load_gold(&fixture("eval/gold.csv")).unwrap();
    let insightful = gold
        .labels
        .iter()
        .filter(|l| l.category.is_insightful())
        .count();
    assert!(insightful >= 40);
    let sets = ["P".parse().unwrap(), HeuristicSet::all()];
    let report = evaluate(&recommender(&index, &res, &s), &gold.labels, &sets).unwrap();
    let p = report.rows[0].total(Category::C4).recall().unwrap();
    let all = report.rows[1].total(Category::C4).recall().unwrap();
    assert!(all >= p, "{all} < {p}");
}

#[test]
fn positions_fixture_has_the_hand_computed_mrr() {
    let (index, _) = ingest("positions", FilterProfile::None);
    let res = Resources::embedded();
    let s = scorer(&res);
    let gold = load_gold(&fixture("positions/gold.csv")).unwrap();
    let report = evaluate(
        &recommender(&index, &res, &s),
        &gold.labels,
        &["P".parse().unwrap()],
    )
    .unwrap();
    let cell = report.rows[0].cell(Domain::Java, Category::C3);
    assert!((cell.mrr().unwrap() - 11.0 / 24.0).abs() < 1e-12);
    assert_eq!((cell.retrieved, cell.gold), (3, 4));
}

#[test]
fn profiles_nest() {
    let ids = |p| -> BTreeSet<u64> { ingest("eval", p).0.answers().map(|a| a.id).collect() };
    let (none, api, gold) = (
        ids(FilterProfile::None),
        ids(FilterProfile::ApiStudy),
        ids(FilterProfile::GoldStyle),
    );
    assert!(api.is_subset(&none));
    assert!(gold.is_subset(&api));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn stricter_filters_keep_subsets(views in 0u64..50_000, extra in 0u64..50_000, lines in 0usize..6, comments in 0usize..10) {
        let (index, _) = ingest("eval", FilterProfile::None);
        let loose = CorpusFilter { min_views: views, min_segment_lines: lines, min_comments: comments, ..CorpusFilter::default() };
        let strict = CorpusFilter { min_views: views + extra, min_segment_lines: lines + 1, min_comments: comments + 1, ..loose };
        let a: BTreeSet<u64> = apply_corpus_filters(&index, &loose).answers().map(|a| a.id).collect();
        let b: BTreeSet<u64> = apply_corpus_filters(&index, &strict).answers().map(|a| a.id).collect();
        prop_assert!(b.is_subset(&a));
    }

    #[test]
    fn raising_tau_shrinks_the_match_set(lo in 0.0f64..1.0, step in 0.0f64..0.5) {
        let (index, _) = ingest("eval", FilterProfile::None);
        let res = Resources::embedded();
        let query = "String input = \"42\";\nint value = Integer.parseInt(input);";
        let run = |tau| -> BTreeSet<String> {
            let cfg = MatcherConfig { tau, top_n: 100 };
            match_segments(&index, query, None, &cfg, &res.stop_lists)
                .unwrap()
                .into_iter()
                .map(|m| m.segment_id.to_string())
                .collect()
        };
        let hi = (lo + step).min(1.0);
        prop_assert!(run(hi).is_subset(&run(lo)));
    }

    #[test]
    fn metrics_stay_in_unit_interval(keep in prop::collection::vec(any::<bool>(), 217)) {
        let (index, _) = ingest("eval", FilterProfile::None);
        let res = Resources::embedded();
        let s = scorer(&res);
        let gold = load_gold(&fixture("eval/gold.csv")).unwrap();
        let labels: Vec<_> = gold.labels.iter().zip(keep.iter().cycle()).filter(|(_, &k)| k).map(|(l, _)| *l).collect();
        let report = evaluate(&recommender(&index, &res, &s), &labels, &HeuristicSet::ablation()).unwrap();
        for row in &report.rows {
            for c in Category::INSIGHTFUL {
                for v in [row.average_recall(c), row.average_mrr(c)].into_iter().flatten() {
                    prop_assert!((0.0..=1.0).contains(&v));
                }
            }
        }
    }
}
