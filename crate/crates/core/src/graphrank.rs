//! Comment interaction network and PageRank scores (the CR heuristic).
//!
//! Nodes are the vote-filtered comments of one answer. Consecutive comments
//! are linked in both directions. A comment that mentions an earlier
//! participant with `@Name` gets an extra edge towards that participant's
//! most recent earlier comment.
//!
//! Scores follow the non-normalized recurrence
//! `PR(A) = (1 - d) + d * sum(PR(T) / C(T))` over the in-neighbours `T` of
//! `A`, where `C(T)` is the out-degree of `T`. Dangling nodes pass on no mass.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use regex::Regex;
use std::sync::LazyLock;

use crate::error::{Error, Result};
use crate::ingest::DiscussionComment;

/// Minimum mention length that may prefix-match a display name.
pub const MIN_MENTION_LEN: usize = 3;

static MENTION: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?:^|[^\w@])@([\w][\w.\-]*)").expect("valid regex"));

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CommentGraph {
    nodes: Vec<u64>,
    edges: BTreeSet<(u64, u64)>,
    out_degree: BTreeMap<u64, usize>,
}

impl CommentGraph {
    pub fn new(nodes: impl IntoIterator<Item = u64>) -> Self {
        let mut seen = BTreeSet::new();
        let nodes: Vec<u64> = nodes.into_iter().filter(|n| seen.insert(*n)).collect();
        let out_degree = nodes.iter().map(|&n| (n, 0)).collect();
        Self {
            nodes,
            edges: BTreeSet::new(),
            out_degree,
        }
    }

    /// Adds `from -> to`. Self-loops, unknown endpoints and duplicates are
    /// ignored; returns whether the edge was new.
    pub fn add_edge(&mut self, from: u64, to: u64) -> bool {
        if from == to || !self.out_degree.contains_key(&from) || !self.out_degree.contains_key(&to)
        {
            return false;
        }
        if self.edges.insert((from, to)) {
            *self.out_degree.get_mut(&from).expect("checked above") += 1;
            true
        } else {
            false
        }
    }

    pub fn nodes(&self) -> &[u64] {
        &self.nodes
    }

    pub fn edges(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, from: u64, to: u64) -> bool {
        self.edges.contains(&(from, to))
    }

    pub fn out_degree(&self, node: u64) -> usize {
        self.out_degree.get(&node).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// DOT rendering for inspection.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = format!("digraph \"{}\" {{\n", name.replace('"', "'"));
        for n in &self.nodes {
            let _ = writeln!(out, "  \"{n}\";");
        }
        for (a, b) in &self.edges {
            let _ = writeln!(out, "  \"{a}\" -> \"{b}\";");
        }
        out.push_str("}\n");
        out
    }
}

fn normalize_name(name: &str) -> String {
    name.chars()
        .filter(|c| !c.is_whitespace())
        .flat_map(char::to_lowercase)
        .collect()
}

/// `@Name` mentions in `text`, lowercased, trailing `.`/`-` trimmed.
pub fn mentions(text: &str) -> Vec<String> {
    MENTION
        .captures_iter(text)
        .map(|c| c[1].trim_end_matches(['.', '-']).to_lowercase())
        .filter(|m| !m.is_empty())
        .collect()
}

/// Builds the network over `comments`, which must be one answer's
/// vote-filtered comments in posting order.
pub fn build_interaction_network(comments: &[DiscussionComment]) -> CommentGraph {
    let mut graph = CommentGraph::new(comments.iter().map(|c| c.id));
    for pair in comments.windows(2) {
        graph.add_edge(pair[0].id, pair[1].id);
        graph.add_edge(pair[1].id, pair[0].id);
    }
    for (i, comment) in comments.iter().enumerate() {
        for mention in mentions(&comment.text) {
            if mention.chars().count() < MIN_MENTION_LEN {
                continue;
            }
            let target = comments[..i]
                .iter()
                .rev()
                .find(|earlier| normalize_name(&earlier.author_display_name).starts_with(&mention));
            if let Some(target) = target {
                graph.add_edge(comment.id, target.id);
            }
        }
    }
    graph
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PageRankConfig {
    pub damping: f64,
    pub epsilon: f64,
    pub max_iterations: usize,
}

impl Default for PageRankConfig {
    fn default() -> Self {
        Self {
            damping: 0.85,
            epsilon: 1e-6,
            max_iterations: 100,
        }
    }
}

impl PageRankConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(Error::Config(format!(
                "damping must lie in (0, 1), got {}",
                self.damping
            )));
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(Error::Config(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PageRankResult {
    pub scores: BTreeMap<u64, f64>,
    pub iterations: usize,
    /// Largest per-node change in the final iteration.
    pub delta: f64,
    pub converged: bool,
}

impl PageRankResult {
    pub fn score(&self, node: u64) -> f64 {
        self.scores.get(&node).copied().unwrap_or(0.0)
    }
}

/// Jacobi power iteration from an initial score of 1.0 per node, until the
/// largest per-node change drops below `epsilon` or the iteration budget
/// runs out.
pub fn pagerank(graph: &CommentGraph, cfg: &PageRankConfig) -> Result<PageRankResult> {
    cfg.validate()?;
    let n = graph.nodes.len();
    if n == 0 {
        return Ok(PageRankResult {
            scores: BTreeMap::new(),
            iterations: 0,
            delta: 0.0,
            converged: true,
        });
    }
    let index: BTreeMap<u64, usize> = graph
        .nodes
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, i))
        .collect();
    let mut inbound: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(from, to) in &graph.edges {
        inbound[index[&to]].push(index[&from]);
    }
    let out_degree: Vec<f64> = graph
        .nodes
        .iter()
        .map(|v| graph.out_degree(*v) as f64)
        .collect();

    let d = cfg.damping;
    let mut scores = vec![1.0_f64; n];
    let mut next = vec![0.0_f64; n];
    let mut iterations = 0;
    let mut delta = f64::INFINITY;
    while iterations < cfg.max_iterations {
        for (a, slot) in next.iter_mut().enumerate() {
            let inflow: f64 = inbound[a].iter().map(|&t| scores[t] / out_degree[t]).sum();
            *slot = (1.0 - d) + d * inflow;
        }
        delta = scores
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut scores, &mut next);
        iterations += 1;
        if delta < cfg.epsilon {
            break;
        }
    }
    Ok(PageRankResult {
        scores: graph.nodes.iter().copied().zip(scores).collect(),
        iterations,
        delta,
        converged: delta < cfg.epsilon,
    })
}

/// Largest per-node gap between each score and the right-hand side of the
/// recurrence evaluated at those scores.
pub fn recurrence_residual(graph: &CommentGraph, scores: &BTreeMap<u64, f64>, damping: f64) -> f64 {
    graph
        .nodes
        .iter()
        .map(|&a| {
            let inflow: f64 = graph
                .edges
                .iter()
                .filter(|&&(_, to)| to == a)
                .map(|&(from, _)| scores[&from] / graph.out_degree(from) as f64)
                .sum();
            (scores[&a] - ((1.0 - damping) + damping * inflow)).abs()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn comment(id: u64, author: &str, text: &str) -> DiscussionComment {
        DiscussionComment {
            id,
            post_id: 1,
            author_id: id as i64 * 10,
            author_display_name: author.into(),
            text: text.into(),
            score: 1,
            sequence_index: 0,
            gold_candidate: false,
        }
    }

    fn graph(nodes: &[u64], edges: &[(u64, u64)]) -> CommentGraph {
        let mut g = CommentGraph::new(nodes.iter().copied());
        for &(a, b) in edges {
            g.add_edge(a, b);
        }
        g
    }

    #[test]
    fn two_comments_link_both_ways() {
        let g = build_interaction_network(&[comment(1, "a", "x"), comment(2, "b", "y")]);
        assert_eq!(g.edges().collect::<Vec<_>>(), [(1, 2), (2, 1)]);
    }

    #[test]
    fn single_comment_has_no_edges() {
        let g = build_interaction_network(&[comment(1, "a", "x")]);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn mention_links_to_stimulus() {
        let thread = [
            comment(1, "Stephen", "first"),
            comment(2, "mhradek", "second"),
            comment(3, "joe", "third"),
            comment(4, "ann", "fourth"),
            comment(5, "tidbeck", "@Stephen I had the same problem"),
        ];
        let g = build_interaction_network(&thread);
        assert!(g.has_edge(5, 1));
        assert!(!g.has_edge(1, 5));
        assert_eq!(g.edge_count(), 9);
        assert_eq!(g.out_degree(5), 2);
    }

    #[test]
    fn mention_rules() {
        let thread = [
            comment(1, "bo", "a"),
            comment(2, "Stephen King", "b"),
            comment(3, "Stephen King", "c"),
            comment(4, "zed", "d"),
            comment(
                5,
                "x",
                "@Step @StephenKing @bo @nobody mail me at a@stephenking.com",
            ),
        ];
        let g = build_interaction_network(&thread);
        assert!(
            g.has_edge(5, 3),
            "most recent earlier comment of the author"
        );
        assert!(!g.has_edge(5, 2));
        assert!(
            !g.has_edge(5, 1),
            "mentions shorter than three characters are ignored"
        );
        assert_eq!(mentions("hi @Bob. and a@b.c"), ["bob"]);
    }

    #[test]
    fn later_participant_is_not_a_target() {
        let thread = [comment(1, "a", "@zed hi"), comment(2, "zed", "yo")];
        let g = build_interaction_network(&thread);
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn isolated_node_scores_one_minus_d() {
        let r = pagerank(&graph(&[7], &[]), &PageRankConfig::default()).unwrap();
        assert_eq!(r.score(7), 1.0 - 0.85);
    }

    #[test]
    fn symmetric_cycle_is_fixed_point() {
        let r = pagerank(
            &graph(&[1, 2], &[(1, 2), (2, 1)]),
            &PageRankConfig::default(),
        )
        .unwrap();
        assert_eq!(r.score(1), 1.0);
        assert_eq!(r.score(2), 1.0);
        assert_eq!(r.iterations, 1);
    }

    #[test]
    fn empty_graph() {
        let r = pagerank(&CommentGraph::default(), &PageRankConfig::default()).unwrap();
        assert!(r.scores.is_empty());
    }

    #[test]
    fn chain_middle_is_highest() {
        let g = graph(&[1, 2, 3], &[(1, 2), (2, 1), (2, 3), (3, 2)]);
        let r = pagerank(&g, &PageRankConfig::default()).unwrap();
        assert!(r.score(2) > r.score(1) && r.score(2) > r.score(3));
        assert!(recurrence_residual(&g, &r.scores, 0.85) < 1e-5);
    }

    #[test]
    fn rejects_bad_config() {
        let g = graph(&[1], &[]);
        for cfg in [
            PageRankConfig {
                damping: 1.0,
                ..Default::default()
            },
            PageRankConfig {
                damping: 0.0,
                ..Default::default()
            },
            PageRankConfig {
                epsilon: 0.0,
                ..Default::default()
            },
            PageRankConfig {
                max_iterations: 0,
                ..Default::default()
            },
        ] {
            assert!(matches!(pagerank(&g, &cfg), Err(Error::Config(_))));
        }
    }

    #[test]
    fn graph_ignores_invalid_edges() {
        let mut g = graph(&[1, 2], &[]);
        assert!(!g.add_edge(1, 1));
        assert!(!g.add_edge(1, 9));
        assert!(g.add_edge(1, 2));
        assert!(!g.add_edge(1, 2));
        assert_eq!(g.out_degree(1), 1);
    }

    #[test]
    fn dot_output() {
        let g = graph(&[1, 2], &[(1, 2)]);
        let dot = g.to_dot("answer 5");
        assert!(dot.starts_with("digraph \"answer 5\" {"));
        assert!(dot.contains("\"1\" -> \"2\";"));
    }
}
