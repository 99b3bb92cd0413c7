//! Recall and MRR of the ranker against manually labeled gold comments.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::{self, Write as _};
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::ingest::Index;
use crate::ranker::{HeuristicSet, Recommender};

/// Comment taxonomy used for gold labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    /// Clarification question.
    C1,
    /// Code documentation.
    C2,
    /// Tips and complementary information.
    C3,
    /// Bugs, concerns and limitations.
    C4,
    /// Strength statement.
    C5,
    /// Miscellaneous.
    C6,
    /// Non-informative.
    C7,
}

impl Category {
    pub const ALL: [Category; 7] = [
        Self::C1,
        Self::C2,
        Self::C3,
        Self::C4,
        Self::C5,
        Self::C6,
        Self::C7,
    ];

    /// The categories that count as insightful.
    pub const INSIGHTFUL: [Category; 2] = [Self::C3, Self::C4];

    pub fn is_insightful(self) -> bool {
        Self::INSIGHTFUL.contains(&self)
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        Self::ALL
            .into_iter()
            .find(|c| c.to_string().eq_ignore_ascii_case(t))
            .ok_or_else(|| Error::InvalidInput(format!("unknown category `{t}` (expected C1..C7)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldLabel {
    pub comment_id: u64,
    pub category: Category,
    pub domain: Domain,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GoldFile {
    pub labels: Vec<GoldLabel>,
    /// 1-based lines whose comment id was already labeled; the first label
    /// wins.
    pub duplicate_lines: Vec<usize>,
}

/// Parses `comment_id,category,domain` lines. A header line and blank lines
/// are skipped.
pub fn parse_gold(text: &str) -> Result<GoldFile> {
    let mut out = GoldFile::default();
    let mut seen = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let row = raw.trim();
        if row.is_empty() || row.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = row.split(',').map(str::trim).collect();
        if line == 1 && fields[0].eq_ignore_ascii_case("comment_id") {
            continue;
        }
        let parse_err = |message: String| Error::Parse { line, message };
        let [id, category, domain] = fields[..] else {
            return Err(parse_err(format!(
                "expected 3 fields, found {}",
                fields.len()
            )));
        };
        let label = GoldLabel {
            comment_id: id
                .parse()
                .map_err(|_| parse_err(format!("bad comment id `{id}`")))?,
            category: category
                .parse()
                .map_err(|e: Error| parse_err(e.to_string()))?,
            domain: domain
                .parse()
                .map_err(|e: Error| parse_err(e.to_string()))?,
        };
        if seen.insert(label.comment_id) {
            out.labels.push(label);
        } else {
            log::warn!("gold line {line}: duplicate comment id {id} ignored");
            out.duplicate_lines.push(line);
        }
    }
    Ok(out)
}

pub fn load_gold(path: &Path) -> Result<GoldFile> {
    if !path.is_file() {
        return Err(Error::InputNotFound(path.to_path_buf()));
    }
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_gold(&text)
}

/// `1 / position` of the first recommended comment in `gold`, 0 on a miss.
pub fn reciprocal_rank(recommended: &[u64], gold: &BTreeSet<u64>) -> f64 {
    recommended
        .iter()
        .position(|id| gold.contains(id))
        .map_or(0.0, |p| 1.0 / (p as f64 + 1.0))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct CellStats {
    pub retrieved: usize,
    pub gold: usize,
    pub rr_sum: f64,
    /// Answers with at least one gold comment of the category.
    pub trials: usize,
}

impl CellStats {
    pub fn recall(&self) -> Option<f64> {
        (self.gold > 0).then(|| self.retrieved as f64 / self.gold as f64)
    }

    pub fn mrr(&self) -> Option<f64> {
        (self.trials > 0).then(|| self.rr_sum / self.trials as f64)
    }

    /// Adds one answer's outcome.
    pub fn record(&mut self, recommended: &[u64], gold: &BTreeSet<u64>) {
        self.gold += gold.len();
        self.retrieved += gold.iter().filter(|g| recommended.contains(g)).count();
        self.rr_sum += reciprocal_rank(recommended, gold);
        self.trials += 1;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalRow {
    pub heuristics: HeuristicSet,
    pub cells: BTreeMap<Domain, BTreeMap<Category, CellStats>>,
}

impl EvalRow {
    pub fn cell(&self, domain: Domain, category: Category) -> CellStats {
        self.cells
            .get(&domain)
            .and_then(|c| c.get(&category))
            .copied()
            .unwrap_or_default()
    }

    /// Macro mean of per-domain recall over domains with gold comments.
    pub fn average_recall(&self, category: Category) -> Option<f64> {
        mean(
            Domain::ALL
                .iter()
                .filter_map(|&d| self.cell(d, category).recall()),
        )
    }

    pub fn average_mrr(&self, category: Category) -> Option<f64> {
        mean(
            Domain::ALL
                .iter()
                .filter_map(|&d| self.cell(d, category).mrr()),
        )
    }

    /// Pooled counts across domains.
    pub fn total(&self, category: Category) -> CellStats {
        Domain::ALL
            .iter()
            .map(|&d| self.cell(d, category))
            .fold(CellStats::default(), |a, b| CellStats {
                retrieved: a.retrieved + b.retrieved,
                gold: a.gold + b.gold,
                rr_sum: a.rr_sum + b.rr_sum,
                trials: a.trials + b.trials,
            })
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
    /// Gold labels whose comment is not in the index.
    pub unknown_comments: usize,
    /// Answers skipped because they have no code segment.
    pub skipped_answers: usize,
}

impl EvalReport {
    pub fn row(&self, heuristics: HeuristicSet) -> Option<&EvalRow> {
        self.rows.iter().find(|r| r.heuristics == heuristics)
    }

    /// Table layout: one block of CE, Recall and MRR lines per heuristic
    /// set, with a C3 and a C4 column per domain plus the macro average.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("heuristics\tmetric");
        for d in Domain::ALL {
            for c in Category::INSIGHTFUL {
                let _ = write!(out, "\t{}_{c}", d.tag());
            }
        }
        for c in Category::INSIGHTFUL {
            let _ = write!(out, "\taverage_{c}");
        }
        out.push('\n');
        let pct = |v: Option<f64>| v.map_or("--".into(), |x| format!("{:.2}%", 100.0 * x));
        let dec = |v: Option<f64>| v.map_or("--".into(), |x| format!("{x:.4}"));
        for row in &self.rows {
            let mut ce = format!("{}\tCE", row.heuristics);
            let mut recall = format!("{}\tRecall", row.heuristics);
            let mut mrr = format!("{}\tMRR", row.heuristics);
            for d in Domain::ALL {
                for c in Category::INSIGHTFUL {
                    let cell = row.cell(d, c);
                    let _ = write!(ce, "\t{:02}({:02})", cell.retrieved, cell.gold);
                    let _ = write!(recall, "\t{}", pct(cell.recall()));
                    let _ = write!(mrr, "\t{}", dec(cell.mrr()));
                }
            }
            for c in Category::INSIGHTFUL {
                ce.push_str("\t--");
                let _ = write!(recall, "\t{}", pct(row.average_recall(c)));
                let _ = write!(mrr, "\t{}", dec(row.average_mrr(c)));
            }
            for line in [ce, recall, mrr] {
                out.push_str(&line);
                out.push('\n');
            }
        }
        out
    }
}

/// Gold C3/C4 comment ids grouped by answer, domain and category.
type GoldByAnswer = BTreeMap<u64, BTreeMap<(Domain, Category), BTreeSet<u64>>>;

/// Insightful gold labels resolved against an index, ready for ranking.
#[derive(Debug, Clone, Default)]
pub struct EvalTargets {
    by_answer: GoldByAnswer,
    /// Answers with a code segment, ascending.
    answers: Vec<u64>,
    pub unknown_comments: usize,
    pub skipped_answers: usize,
}

impl EvalTargets {
    pub fn answers(&self) -> &[u64] {
        &self.answers
    }
}

pub fn resolve_targets(index: &Index, gold: &[GoldLabel]) -> EvalTargets {
    let mut t = EvalTargets::default();
    for label in gold.iter().filter(|l| l.category.is_insightful()) {
        match index.comment(label.comment_id) {
            Some(c) => {
                t.by_answer
                    .entry(c.post_id)
                    .or_default()
                    .entry((label.domain, label.category))
                    .or_default()
                    .insert(label.comment_id);
            }
            None => {
                log::warn!("gold comment {} is not in the index", label.comment_id);
                t.unknown_comments += 1;
            }
        }
    }
    for &a in t.by_answer.keys() {
        if index.answer(a).is_some_and(|a| !a.segments.is_empty()) {
            t.answers.push(a);
        } else {
            log::warn!("answer {a} has no code segment; its gold comments are skipped");
            t.skipped_answers += 1;
        }
    }
    t
}

/// One table row: every target answer ranked against its first segment.
pub fn evaluate_set(
    recommender: &Recommender<'_>,
    targets: &EvalTargets,
    set: HeuristicSet,
) -> Result<EvalRow> {
    let rec = recommender.with_heuristics(set)?;
    let mut row = EvalRow {
        heuristics: set,
        cells: BTreeMap::new(),
    };
    for &answer in &targets.answers {
        let ids = rec.recommend_for_answer(answer, None)?.recommendation.ids();
        for (&(domain, category), gold_ids) in &targets.by_answer[&answer] {
            row.cells
                .entry(domain)
                .or_default()
                .entry(category)
                .or_default()
                .record(&ids, gold_ids);
        }
    }
    Ok(row)
}

/// Runs the recommender once per heuristic set on every answer holding an
/// insightful gold comment.
pub fn evaluate(
    recommender: &Recommender<'_>,
    gold: &[GoldLabel],
    sets: &[HeuristicSet],
) -> Result<EvalReport> {
    let targets = resolve_targets(recommender.index(), gold);
    Ok(EvalReport {
        rows: sets
            .iter()
            .map(|&s| evaluate_set(recommender, &targets, s))
            .collect::<Result<_>>()?,
        unknown_comments: targets.unknown_comments,
        skipped_answers: targets.skipped_answers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_labels() {
        let g = parse_gold("comment_id,category,domain\n123,C4,android\n7, c3 , c#\n").unwrap();
        assert_eq!(
            g.labels,
            [
                GoldLabel {
                    comment_id: 123,
                    category: Category::C4,
                    domain: Domain::Android
                },
                GoldLabel {
                    comment_id: 7,
                    category: Category::C3,
                    domain: Domain::CSharp
                },
            ]
        );
    }

    #[test]
    fn unknown_category_reports_line() {
        match parse_gold("123,C9,java") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_gold("1,C1,java\n2,C1"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_gold("x,C1,java"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn duplicates_keep_the_first() {
        let text: String = (1..=9)
            .map(|i| format!("{i},C3,java\n"))
            .chain(["4,C4,java\n".to_string()])
            .collect();
        let g = parse_gold(&text).unwrap();
        assert_eq!(g.labels.len(), 9);
        assert_eq!(g.duplicate_lines, [10]);
        assert_eq!(g.labels[3].category, Category::C3);
    }

    #[test]
    fn reciprocal_ranks() {
        let gold: BTreeSet<u64> = [5].into();
        assert_eq!(reciprocal_rank(&[5, 1, 2], &gold), 1.0);
        assert_eq!(reciprocal_rank(&[1, 5, 2], &gold), 0.5);
        assert_eq!(reciprocal_rank(&[1, 2, 3], &gold), 0.0);
    }

    #[test]
    fn cell_statistics() {
        let mut cell = CellStats::default();
        cell.record(&[1, 2, 3], &[1].into());
        cell.record(&[4, 5, 6], &[5, 9].into());
        cell.record(&[7, 8, 10], &[11].into());
        assert_eq!((cell.retrieved, cell.gold, cell.trials), (2, 4, 3));
        assert_eq!(cell.recall(), Some(0.5));
        assert!((cell.mrr().unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(CellStats::default().recall(), None);
    }
}
