//! The immutable in-memory index and its JSON-lines persistence.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::dump::{
    parse_comments, parse_posts, parse_users, DumpFormat, ParsedComments, ParsedPosts,
};
use super::filter::{apply_corpus_filters, FilterProfile};
use super::html::{extract_code_segments, SegmentFilterConfig};
use super::{AnswerRecord, CodeSegment, DiscussionComment, QuestionRecord, SegmentId};
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::textproc::StopListCatalog;

/// Bumped whenever the on-disk layout changes; older indexes are rejected.
pub const INDEX_SCHEMA_VERSION: u32 = 1;

const QUESTIONS_FILE: &str = "questions.jsonl";
const ANSWERS_FILE: &str = "answers.jsonl";
const SEGMENTS_FILE: &str = "segments.jsonl";
const COMMENTS_FILE: &str = "comments.jsonl";
const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Default)]
pub struct IngestConfig {
    pub segment_filter: SegmentFilterConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub questions: usize,
    pub answers: usize,
    pub segments: usize,
    pub comments: usize,
    pub code_blocks_seen: usize,
    pub code_blocks_discarded: usize,
    pub malformed_rows: usize,
    pub orphan_answers: usize,
    /// Comments whose post is not an indexed answer.
    pub unattached_comments: usize,
}

impl IngestStats {
    pub fn discarded_percentage(&self) -> f64 {
        if self.code_blocks_seen == 0 {
            0.0
        } else {
            100.0 * self.code_blocks_discarded as f64 / self.code_blocks_seen as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub dump_hash: String,
    pub filter_profile: String,
    pub stats: IngestStats,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Index {
    questions: BTreeMap<u64, QuestionRecord>,
    answers: BTreeMap<u64, AnswerRecord>,
    /// Per answer, in sequence order.
    comments: BTreeMap<u64, Vec<DiscussionComment>>,
    comment_posts: HashMap<u64, u64>,
}

impl Index {
    /// Assembles an index, dropping answers without a question and comments
    /// without an answer.
    pub fn from_parts(
        questions: impl IntoIterator<Item = QuestionRecord>,
        answers: impl IntoIterator<Item = AnswerRecord>,
        comments: impl IntoIterator<Item = DiscussionComment>,
    ) -> Self {
        let questions: BTreeMap<u64, QuestionRecord> =
            questions.into_iter().map(|q| (q.id, q)).collect();
        let answers: BTreeMap<u64, AnswerRecord> = answers
            .into_iter()
            .filter(|a| questions.contains_key(&a.question_id))
            .map(|a| (a.id, a))
            .collect();
        let mut threads: BTreeMap<u64, Vec<DiscussionComment>> = BTreeMap::new();
        for c in comments {
            if answers.contains_key(&c.post_id) {
                threads.entry(c.post_id).or_default().push(c);
            }
        }
        for thread in threads.values_mut() {
            thread.sort_by_key(|c| c.id);
            for (i, c) in thread.iter_mut().enumerate() {
                c.sequence_index = i;
            }
        }
        let comment_posts = threads
            .values()
            .flatten()
            .map(|c| (c.id, c.post_id))
            .collect();
        Self {
            questions,
            answers,
            comments: threads,
            comment_posts,
        }
    }

    pub fn questions(&self) -> impl Iterator<Item = &QuestionRecord> {
        self.questions.values()
    }

    pub fn answers(&self) -> impl Iterator<Item = &AnswerRecord> {
        self.answers.values()
    }

    pub fn question(&self, id: u64) -> Option<&QuestionRecord> {
        self.questions.get(&id)
    }

    pub fn answer(&self, id: u64) -> Option<&AnswerRecord> {
        self.answers.get(&id)
    }

    pub fn question_of(&self, answer_id: u64) -> Option<&QuestionRecord> {
        self.answer(answer_id)
            .and_then(|a| self.questions.get(&a.question_id))
    }

    pub fn domain_of(&self, answer_id: u64) -> Option<Domain> {
        self.question_of(answer_id)
            .and_then(|q| Domain::from_tags(&q.tags))
    }

    /// Comments of an answer in sequence order.
    pub fn comments_for(&self, answer_id: u64) -> &[DiscussionComment] {
        self.comments
            .get(&answer_id)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn comment(&self, id: u64) -> Option<&DiscussionComment> {
        let post = self.comment_posts.get(&id)?;
        self.comments_for(*post).iter().find(|c| c.id == id)
    }

    pub fn all_comments(&self) -> impl Iterator<Item = &DiscussionComment> {
        self.comments.values().flatten()
    }

    pub fn segments(&self) -> impl Iterator<Item = &CodeSegment> {
        self.answers.values().flat_map(|a| a.segments.iter())
    }

    pub fn segment(&self, id: SegmentId) -> Option<&CodeSegment> {
        self.answer(id.answer_id)?
            .segments
            .iter()
            .find(|s| s.id == id)
    }

    pub fn is_empty(&self) -> bool {
        self.answers.is_empty()
    }

    pub fn question_count(&self) -> usize {
        self.questions.len()
    }

    pub fn answer_count(&self) -> usize {
        self.answers.len()
    }

    pub fn segment_count(&self) -> usize {
        self.segments().count()
    }

    pub fn comment_count(&self) -> usize {
        self.comment_posts.len()
    }

    pub(crate) fn comments_mut(&mut self) -> impl Iterator<Item = &mut DiscussionComment> {
        self.comments.values_mut().flatten()
    }

    /// Writes `{questions,answers,segments,comments}.jsonl` and
    /// `manifest.json` into `dir`. Output depends only on the index content.
    pub fn save(&self, dir: &Path, manifest: &Manifest) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_jsonl(&dir.join(QUESTIONS_FILE), self.questions.values())?;
        write_jsonl(&dir.join(ANSWERS_FILE), self.answers.values())?;
        write_jsonl(&dir.join(SEGMENTS_FILE), self.segments())?;
        write_jsonl(&dir.join(COMMENTS_FILE), self.all_comments())?;
        let path = dir.join(MANIFEST_FILE);
        let json = serde_json::to_string_pretty(manifest).map_err(|source| Error::Json {
            context: path.display().to_string(),
            source,
        })?;
        fs::write(&path, json + "\n").map_err(|e| Error::io(path, e))
    }

    /// Loads an index written by [`Index::save`].
    pub fn load(dir: &Path) -> Result<(Self, Manifest)> {
        let manifest = Self::load_manifest(dir)?;
        let questions: Vec<QuestionRecord> = read_jsonl(&dir.join(QUESTIONS_FILE))?;
        let mut answers: Vec<AnswerRecord> = read_jsonl(&dir.join(ANSWERS_FILE))?;
        let segments: Vec<CodeSegment> = read_jsonl(&dir.join(SEGMENTS_FILE))?;
        let comments: Vec<DiscussionComment> = read_jsonl(&dir.join(COMMENTS_FILE))?;
        let mut by_answer: BTreeMap<u64, Vec<CodeSegment>> = BTreeMap::new();
        for s in segments {
            by_answer.entry(s.answer_id).or_default().push(s);
        }
        for a in &mut answers {
            a.segments = by_answer.remove(&a.id).unwrap_or_default();
            a.segments.sort_by_key(|s| s.id);
        }
        if let Some(id) = by_answer.keys().next() {
            return Err(Error::Index(format!(
                "segments reference unknown answer {id}; re-run ingest"
            )));
        }
        Ok((Self::from_parts(questions, answers, comments), manifest))
    }

    pub fn load_manifest(dir: &Path) -> Result<Manifest> {
        let path = dir.join(MANIFEST_FILE);
        if !path.is_file() {
            return Err(Error::Index(format!(
                "no index at {} (missing {MANIFEST_FILE}); run `insight ingest` first",
                dir.display()
            )));
        }
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let manifest: Manifest = serde_json::from_str(&text)
            .map_err(|e| Error::Index(format!("unreadable manifest {}: {e}", path.display())))?;
        if manifest.schema_version != INDEX_SCHEMA_VERSION {
            return Err(Error::Index(format!(
                "index schema version {} does not match expected {INDEX_SCHEMA_VERSION}; re-run `insight ingest`",
                manifest.schema_version
            )));
        }
        Ok(manifest)
    }
}

fn write_jsonl<'a, T: Serialize + 'a>(
    path: &Path,
    items: impl Iterator<Item = &'a T>,
) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut w, item).map_err(|source| Error::Json {
            context: path.display().to_string(),
            source,
        })?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path)
        .map_err(|e| Error::Index(format!("cannot open {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| Error::Index(format!("{}:{}: {e}", path.display(), n + 1)))?,
        );
    }
    Ok(out)
}

/// SHA-256 over the concatenated input files, hex encoded.
pub fn hash_inputs(paths: &[&Path]) -> Result<String> {
    let mut hasher = Sha256::new();
    for path in paths {
        let bytes = fs::read(path).map_err(|e| Error::io(*path, e))?;
        hasher.update((bytes.len() as u64).to_le_bytes());
        hasher.update(&bytes);
    }
    Ok(hex::encode(hasher.finalize()))
}

/// Extracts code segments for every answer and assembles the index.
pub fn build_index(
    posts: ParsedPosts,
    comments: ParsedComments,
    cfg: &IngestConfig,
    stop_lists: &StopListCatalog,
) -> (Index, IngestStats) {
    let question_domains: HashMap<u64, Option<Domain>> = posts
        .questions
        .iter()
        .map(|q| (q.id, Domain::from_tags(&q.tags)))
        .collect();
    let mut stop_cache = HashMap::new();
    let mut stats = IngestStats {
        malformed_rows: posts.malformed + comments.malformed,
        orphan_answers: posts.orphans,
        ..Default::default()
    };
    let mut answers = posts.answers;
    for answer in &mut answers {
        let domain = question_domains.get(&answer.question_id).copied().flatten();
        let stop = stop_cache
            .entry(domain)
            .or_insert_with(|| stop_lists.for_domain(domain));
        let extraction =
            extract_code_segments(answer.id, &answer.body_html, &cfg.segment_filter, stop);
        stats.code_blocks_seen += extraction.blocks_seen;
        stats.code_blocks_discarded += extraction.blocks_rejected;
        answer.segments = extraction.segments;
    }
    let total_comments = comments.comments.len();
    let index = Index::from_parts(posts.questions, answers, comments.comments);
    stats.questions = index.question_count();
    stats.answers = index.answer_count();
    stats.segments = index.segment_count();
    stats.comments = index.comment_count();
    stats.unattached_comments = total_comments - stats.comments;
    (index, stats)
}

/// Dump files for one ingestion run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DumpPaths {
    pub posts: PathBuf,
    pub comments: PathBuf,
    pub users: Option<PathBuf>,
}

impl DumpPaths {
    /// Looks for `Posts.xml`/`posts.jsonl`, `Comments.xml`/`comments.jsonl`
    /// and the optional `Users.xml`/`users.jsonl` in `dir`.
    pub fn in_dir(dir: &Path) -> Result<Self> {
        let find = |stem_xml: &str, stem_jsonl: &str| {
            [stem_xml, stem_jsonl]
                .into_iter()
                .map(|n| dir.join(n))
                .find(|p| p.is_file())
        };
        Ok(Self {
            posts: find("Posts.xml", "posts.jsonl")
                .ok_or_else(|| Error::InputNotFound(dir.join("Posts.xml")))?,
            comments: find("Comments.xml", "comments.jsonl")
                .ok_or_else(|| Error::InputNotFound(dir.join("Comments.xml")))?,
            users: find("Users.xml", "users.jsonl"),
        })
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    if !path.is_file() {
        return Err(Error::InputNotFound(path.to_path_buf()));
    }
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

/// Parses the dump, builds the index and applies `profile`. The manifest
/// counts describe the filtered index.
pub fn ingest_dump(
    paths: &DumpPaths,
    profile: FilterProfile,
    cfg: &IngestConfig,
    stop_lists: &StopListCatalog,
) -> Result<(Index, Manifest)> {
    let posts = parse_posts(open(&paths.posts)?, DumpFormat::from_path(&paths.posts))?;
    let mut comments = parse_comments(
        open(&paths.comments)?,
        DumpFormat::from_path(&paths.comments),
    )?;
    let mut hashed: Vec<&Path> = vec![&paths.posts, &paths.comments];
    if let Some(users) = &paths.users {
        comments.fill_display_names(&parse_users(open(users)?, DumpFormat::from_path(users))?);
        hashed.push(users);
    }
    let (index, mut stats) = build_index(posts, comments, cfg, stop_lists);
    let index = apply_corpus_filters(&index, &profile.thresholds());
    stats.questions = index.question_count();
    stats.answers = index.answer_count();
    stats.segments = index.segment_count();
    stats.comments = index.comment_count();
    let manifest = Manifest {
        schema_version: INDEX_SCHEMA_VERSION,
        dump_hash: hash_inputs(&hashed)?,
        filter_profile: profile.name().to_string(),
        stats,
    };
    Ok((index, manifest))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{parse_comments, parse_posts, DumpFormat};
    use crate::resources::Resources;

    const POSTS: &str = r#"<row Id="1" PostTypeId="1" AcceptedAnswerId="2" ViewCount="800" Title="Sort a list" Tags="&lt;java&gt;" />
<row Id="2" PostTypeId="2" ParentId="1" Score="4" Body="&lt;pre&gt;&lt;code&gt;List&amp;lt;String&amp;gt; xs = new ArrayList&amp;lt;&amp;gt;();&#xA;Collections.sort(xs);&lt;/code&gt;&lt;/pre&gt;&lt;pre&gt;&lt;code&gt;oops&lt;/code&gt;&lt;/pre&gt;" />"#;
    const COMMENTS: &str = r#"<row Id="5" PostId="2" Score="3" Text="Collections.sort is stable" UserId="1" UserDisplayName="Ann" />
<row Id="6" PostId="1" Score="1" Text="on the question" UserId="2" />"#;

    fn fixture() -> (Index, IngestStats) {
        let posts = parse_posts(POSTS.as_bytes(), DumpFormat::Xml).unwrap();
        let comments = parse_comments(COMMENTS.as_bytes(), DumpFormat::Xml).unwrap();
        build_index(
            posts,
            comments,
            &IngestConfig::default(),
            &Resources::embedded().stop_lists,
        )
    }

    #[test]
    fn builds_segments_and_attaches_comments() {
        let (index, stats) = fixture();
        assert_eq!(stats.questions, 1);
        assert_eq!(stats.answers, 1);
        assert_eq!(stats.segments, 1);
        assert_eq!(stats.code_blocks_seen, 2);
        assert_eq!(stats.code_blocks_discarded, 1);
        assert_eq!(stats.discarded_percentage(), 50.0);
        assert_eq!(stats.comments, 1);
        assert_eq!(stats.unattached_comments, 1);
        let seg = index.segments().next().unwrap();
        assert!(seg.raw_text.starts_with("List<String> xs"));
        assert_eq!(seg.tokens.get("collections"), 1);
        assert_eq!(index.domain_of(2), Some(Domain::Java));
        assert_eq!(index.comment(5).unwrap().post_id, 2);
        assert!(index.comment(6).is_none());
    }

    #[test]
    fn save_load_is_byte_stable() {
        let (index, stats) = fixture();
        let manifest = Manifest {
            schema_version: INDEX_SCHEMA_VERSION,
            dump_hash: "abc".into(),
            filter_profile: "none".into(),
            stats,
        };
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        index.save(a.path(), &manifest).unwrap();
        let (loaded, m2) = Index::load(a.path()).unwrap();
        assert_eq!(loaded, index);
        assert_eq!(m2, manifest);
        loaded.save(b.path(), &m2).unwrap();
        for f in [
            QUESTIONS_FILE,
            ANSWERS_FILE,
            SEGMENTS_FILE,
            COMMENTS_FILE,
            MANIFEST_FILE,
        ] {
            assert_eq!(
                fs::read(a.path().join(f)).unwrap(),
                fs::read(b.path().join(f)).unwrap(),
                "{f}"
            );
        }
    }

    #[test]
    fn missing_or_stale_index() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(Index::load(dir.path()), Err(Error::Index(_))));
        fs::write(
            dir.path().join(MANIFEST_FILE),
            r#"{"schema_version": 0, "dump_hash": "", "filter_profile": "none", "stats": {"questions":0,"answers":0,"segments":0,"comments":0,"code_blocks_seen":0,"code_blocks_discarded":0,"malformed_rows":0,"orphan_answers":0,"unattached_comments":0}}"#,
        )
        .unwrap();
        assert!(matches!(Index::load(dir.path()), Err(Error::Index(_))));
    }

    #[test]
    fn input_hash_is_stable() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.xml");
        fs::write(&p, "x").unwrap();
        assert_eq!(hash_inputs(&[&p]).unwrap(), hash_inputs(&[&p]).unwrap());
        assert_eq!(hash_inputs(&[&p]).unwrap().len(), 64);
    }
}
