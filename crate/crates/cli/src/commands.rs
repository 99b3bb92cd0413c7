use std::fs;
use std::io::{self, Write};
use std::path::Path;

use anyhow::Context;
use insight_core::eval::{evaluate_set, load_gold, resolve_targets, EvalReport, EvalRow};
use insight_core::graphrank::build_interaction_network;
use insight_core::ingest::{ingest_dump, DumpPaths, Index, IngestConfig, Manifest};
use insight_core::matcher::{recommend_for_code, MatchStatus};
use insight_core::ranker::{filter_by_votes, HeuristicSet, Recommender};
use insight_core::sentiment::{LexiconScorer, NeutralScorer, SentimentProvider, SentimentScorer};
use insight_core::topics::{build_api_corpus, fit_lda, rank_topics};
use insight_core::{Domain, Error, Resources};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::AppConfig;
use crate::{EvalArgs, IngestArgs, RankArgs, RecommendArgs, TopicsArgs};

/// Version of every JSON document printed with `--json`.
const JSON_SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct Versioned<T: Serialize> {
    schema_version: u32,
    #[serde(flatten)]
    body: T,
}

fn print_json<T: Serialize>(body: T) -> anyhow::Result<()> {
    let doc = Versioned {
        schema_version: JSON_SCHEMA_VERSION,
        body,
    };
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, &doc)?;
    writeln!(out)?;
    Ok(())
}

fn emit(text: &str, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
            eprintln!("report written to {}", path.display());
        }
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn resources(cfg: &AppConfig) -> Result<Resources, Error> {
    match &cfg.data_dir {
        Some(dir) => Resources::load(dir),
        None => Ok(Resources::embedded()),
    }
}

fn load_index(cfg: &AppConfig) -> Result<(Index, Manifest), Error> {
    Index::load(&cfg.index_dir)
}

fn scorer(cfg: &AppConfig, res: &Resources) -> Box<dyn SentimentScorer> {
    match cfg.sentiment_provider {
        SentimentProvider::Lexicon => Box::new(LexiconScorer {
            lexicon: res.lexicon.clone(),
            config: cfg.sentiment,
        }),
        SentimentProvider::Neutral => Box::new(NeutralScorer),
    }
}

fn recommender<'a>(
    cfg: &AppConfig,
    index: &'a Index,
    res: &Resources,
    scorer: &'a dyn SentimentScorer,
) -> Result<Recommender<'a>, Error> {
    Recommender::new(
        index,
        res.stop_lists.for_domain(None),
        scorer,
        cfg.pagerank,
        cfg.ranker.clone(),
    )
}

fn parse_domain(raw: Option<&str>) -> Result<Option<Domain>, Error> {
    raw.map(str::parse).transpose()
}

pub fn ingest(cfg: &mut AppConfig, args: &IngestArgs) -> anyhow::Result<()> {
    if let Some(p) = &args.profile {
        cfg.filter_profile = p.parse()?;
    }
    cfg.validate()?;
    let paths = match (&args.posts, &args.comments, &args.input) {
        (Some(posts), Some(comments), _) => DumpPaths {
            posts: posts.clone(),
            comments: comments.clone(),
            users: args.users.clone(),
        },
        (None, None, Some(dir)) => {
            let mut paths = DumpPaths::in_dir(dir)?;
            if args.users.is_some() {
                paths.users.clone_from(&args.users);
            }
            paths
        }
        _ => {
            return Err(Error::InvalidInput(
                "give --input DIR or both --posts and --comments".into(),
            )
            .into())
        }
    };
    let res = resources(cfg)?;
    let ingest_cfg = IngestConfig {
        segment_filter: cfg.segment_filter,
    };
    let (index, manifest) = ingest_dump(&paths, cfg.filter_profile, &ingest_cfg, &res.stop_lists)?;
    index.save(&cfg.index_dir, &manifest)?;
    if args.json {
        return print_json(&manifest);
    }
    let s = &manifest.stats;
    let mut out = io::stdout().lock();
    writeln!(out, "profile:        {}", manifest.filter_profile)?;
    writeln!(out, "questions:      {}", s.questions)?;
    writeln!(out, "answers:        {}", s.answers)?;
    writeln!(out, "segments:       {}", s.segments)?;
    writeln!(out, "comments:       {}", s.comments)?;
    writeln!(
        out,
        "code blocks:    {} seen, {} discarded ({:.1}%)",
        s.code_blocks_seen,
        s.code_blocks_discarded,
        s.discarded_percentage()
    )?;
    writeln!(out, "malformed rows: {}", s.malformed_rows)?;
    writeln!(out, "orphan answers: {}", s.orphan_answers)?;
    writeln!(out, "index:          {}", cfg.index_dir.display())?;
    Ok(())
}

pub fn rank(cfg: &mut AppConfig, args: &RankArgs) -> anyhow::Result<()> {
    if let Some(h) = &args.heuristics {
        cfg.ranker.enabled = h.parse()?;
    }
    if let Some(k) = args.k {
        cfg.ranker.k = k;
    }
    cfg.validate()?;
    let res = resources(cfg)?;
    let (index, _) = load_index(cfg)?;
    let scorer = scorer(cfg, &res);
    let rec = recommender(cfg, &index, &res, scorer.as_ref())?;
    let ranking = rec.recommend_for_answer(args.answer_id, args.segment)?;

    if let Some(path) = &args.dump_graph {
        let candidates = filter_by_votes(index.comments_for(args.answer_id), &cfg.ranker);
        let dot =
            build_interaction_network(&candidates).to_dot(&format!("answer {}", args.answer_id));
        fs::write(path, dot).with_context(|| format!("writing {}", path.display()))?;
    }
    if args.json {
        return print_json(&ranking);
    }
    if args.explain {
        return emit(&ranking.explain_tsv(), None);
    }
    let mut out = io::stdout().lock();
    writeln!(
        out,
        "answer {} segment {}: {} candidate comments, heuristics {}",
        ranking.answer_id,
        ranking.segment_id,
        ranking.scores.len(),
        cfg.ranker.enabled
    )?;
    for (i, r) in ranking.recommendation.comments.iter().enumerate() {
        let text = index.comment(r.comment_id).map_or("", |c| c.text.as_str());
        writeln!(
            out,
            "{}. comment {} (frequency {}): {}",
            i + 1,
            r.comment_id,
            r.frequency,
            text
        )?;
    }
    Ok(())
}

pub fn recommend(cfg: &mut AppConfig, args: &RecommendArgs) -> anyhow::Result<()> {
    if let Some(n) = args.top_n {
        cfg.matcher.top_n = n;
    }
    if let Some(t) = args.tau {
        cfg.matcher.tau = t;
    }
    cfg.validate()?;
    let domain = parse_domain(args.domain.as_deref())?;
    if !args.code.is_file() {
        return Err(Error::InputNotFound(args.code.clone()).into());
    }
    let code = fs::read_to_string(&args.code)
        .with_context(|| format!("reading {}", args.code.display()))?;
    let res = resources(cfg)?;
    let (index, _) = load_index(cfg)?;
    if index.is_empty() {
        return Err(Error::Index(format!(
            "index at {} holds no answers; re-run `insight ingest` with a non-empty dump",
            cfg.index_dir.display()
        ))
        .into());
    }
    let scorer = scorer(cfg, &res);
    let rec = recommender(cfg, &index, &res, scorer.as_ref())?;
    let result = recommend_for_code(
        &rec,
        &code,
        domain,
        &cfg.matcher,
        &res.stop_lists,
        &res.refinement,
    )?;
    if args.json {
        let mut out = io::stdout().lock();
        serde_json::to_writer_pretty(&mut out, &result)?;
        writeln!(out)?;
        return Ok(());
    }
    let mut out = io::stdout().lock();
    if result.status == MatchStatus::NoSimilarSegment {
        writeln!(out, "no similar segment (tau = {})", cfg.matcher.tau)?;
        return Ok(());
    }
    for m in &result.results {
        writeln!(
            out,
            "segment {} (similarity {:.3}) answer {}: {}",
            m.segment.segment_id,
            m.segment.similarity,
            m.segment.answer_id,
            m.segment.question_title
        )?;
        for (i, c) in m.comments.iter().enumerate() {
            writeln!(out, "  {}. {}", i + 1, c.text_refined)?;
        }
    }
    Ok(())
}

fn parse_sets(raw: &str) -> Result<Vec<HeuristicSet>, Error> {
    match raw.trim() {
        "ablation" => Ok(HeuristicSet::ablation()),
        "all" => Ok(vec![HeuristicSet::all()]),
        list => list.split(';').map(str::parse).collect(),
    }
}

pub fn eval(cfg: &mut AppConfig, args: &EvalArgs) -> anyhow::Result<()> {
    cfg.validate()?;
    let sets = parse_sets(&args.sets)?;
    let gold = load_gold(&args.gold)?;
    let res = resources(cfg)?;
    let (index, _) = load_index(cfg)?;
    let scorer = scorer(cfg, &res);
    let rec = recommender(cfg, &index, &res, scorer.as_ref())?;
    let targets = resolve_targets(&index, &gold.labels);
    let rows = sets
        .par_iter()
        .map(|&s| evaluate_set(&rec, &targets, s))
        .collect::<Result<Vec<EvalRow>, Error>>()?;
    let report = EvalReport {
        rows,
        unknown_comments: targets.unknown_comments,
        skipped_answers: targets.skipped_answers,
    };
    if args.json {
        return print_json(&report);
    }
    emit(&report.to_tsv(), args.out.as_deref())
}

pub fn topics(cfg: &mut AppConfig, args: &TopicsArgs) -> anyhow::Result<()> {
    if let Some(k) = args.k {
        cfg.topics.k = k;
    }
    if let Some(b) = args.beta {
        cfg.topics.beta = b;
    }
    if let Some(n) = args.iterations {
        cfg.topics.iterations = n;
    }
    if let Some(s) = args.seed {
        cfg.topics.seed = s;
    }
    cfg.validate()?;
    let domain = parse_domain(args.domain.as_deref())?;
    let res = resources(cfg)?;
    let (index, _) = load_index(cfg)?;
    let corpus = build_api_corpus(&index, domain, &res.stop_lists);
    if corpus.is_empty() {
        return Err(Error::InvalidInput("no answer in the index yields API tokens".into()).into());
    }
    let model = fit_lda(&corpus, &cfg.topics)?;
    let report = rank_topics(&model, &cfg.topics);
    if report.is_empty() {
        eprintln!("warning: every topic fell below the prominence threshold");
    }
    if args.json {
        return print_json(&report);
    }
    emit(
        &report.to_tsv(cfg.topics.words_per_topic),
        args.out.as_deref(),
    )
}
