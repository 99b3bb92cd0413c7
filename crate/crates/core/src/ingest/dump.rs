//! Row-level readers for `Posts.xml` / `Comments.xml` / `Users.xml` and
//! their JSON-lines equivalents.
//!
//! Stack Exchange dumps hold one `<row .../>` element per line, so each line
//! is parsed on its own and a broken line only loses that record.

use std::collections::{BTreeMap, HashMap};
use std::io::BufRead;
use std::path::Path;

use quick_xml::events::Event;
use quick_xml::Reader;

use super::{AnswerRecord, DiscussionComment, QuestionRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DumpFormat {
    Xml,
    JsonLines,
}

impl DumpFormat {
    /// `.jsonl` / `.json` files are JSON lines, anything else XML.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("json") => DumpFormat::JsonLines,
            _ => DumpFormat::Xml,
        }
    }
}

type Row = BTreeMap<String, String>;

fn xml_row(line: &str) -> std::result::Result<Option<Row>, String> {
    // callers only pass lines that start with `<row`
    let mut reader = Reader::from_str(line);
    loop {
        match reader.read_event() {
            Ok(Event::Empty(e)) | Ok(Event::Start(e)) if e.name().as_ref() == b"row" => {
                let mut row = Row::new();
                for attr in e.attributes() {
                    let attr = attr.map_err(|e| e.to_string())?;
                    let key = String::from_utf8_lossy(attr.key.as_ref()).into_owned();
                    let value = attr.unescape_value().map_err(|e| e.to_string())?;
                    row.insert(key, value.into_owned());
                }
                return Ok(Some(row));
            }
            Ok(Event::Eof) => return Err("incomplete row element".into()),
            Ok(_) => {}
            Err(e) => return Err(e.to_string()),
        }
    }
}

fn json_row(line: &str) -> std::result::Result<Option<Row>, String> {
    let value: serde_json::Value = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let obj = value.as_object().ok_or("expected a JSON object")?;
    let mut row = Row::new();
    for (k, v) in obj {
        let s = match v {
            serde_json::Value::Null => continue,
            serde_json::Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        row.insert(k.clone(), s);
    }
    Ok(Some(row))
}

/// Calls `f` on every parsed row; returns the number of unparseable lines.
fn for_each_row(
    reader: impl BufRead,
    format: DumpFormat,
    mut f: impl FnMut(&Row),
) -> Result<usize> {
    let mut malformed = 0;
    for (n, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Xml(format!("read failed at line {}: {e}", n + 1)))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let parsed = match format {
            DumpFormat::Xml if trimmed.starts_with("<row") => xml_row(trimmed),
            DumpFormat::Xml => continue,
            DumpFormat::JsonLines => json_row(trimmed),
        };
        match parsed {
            Ok(Some(row)) => f(&row),
            Ok(None) => {}
            Err(e) => {
                log::warn!("skipping malformed row at line {}: {e}", n + 1);
                malformed += 1;
            }
        }
    }
    Ok(malformed)
}

fn field<T: std::str::FromStr>(row: &Row, key: &str) -> Option<T> {
    row.get(key).and_then(|v| v.trim().parse().ok())
}

/// Accepts both `<java><android>` and `|java|android|` tag encodings.
pub(crate) fn parse_tags(raw: &str) -> Vec<String> {
    raw.split(['<', '>', '|'])
        .map(|t| t.trim().to_lowercase())
        .filter(|t| !t.is_empty())
        .collect()
}

#[derive(Debug, Clone, Default)]
pub struct ParsedPosts {
    pub questions: Vec<QuestionRecord>,
    pub answers: Vec<AnswerRecord>,
    /// Rows that could not be parsed or lacked required attributes.
    pub malformed: usize,
    /// Answers whose `ParentId` matched no question row.
    pub orphans: usize,
}

/// Reads question (`PostTypeId=1`) and answer (`PostTypeId=2`) rows. Other
/// post types are ignored.
pub fn parse_posts(reader: impl BufRead, format: DumpFormat) -> Result<ParsedPosts> {
    let mut questions: BTreeMap<u64, QuestionRecord> = BTreeMap::new();
    let mut answers: Vec<AnswerRecord> = Vec::new();
    let mut bad_rows = 0;
    let mut malformed = for_each_row(reader, format, |row| {
        let (Some(id), Some(kind)) = (field::<u64>(row, "Id"), field::<u32>(row, "PostTypeId"))
        else {
            bad_rows += 1;
            return;
        };
        match kind {
            1 => {
                questions.insert(
                    id,
                    QuestionRecord {
                        id,
                        title: row.get("Title").cloned().unwrap_or_default(),
                        view_count: field(row, "ViewCount").unwrap_or(0),
                        tags: row.get("Tags").map(|t| parse_tags(t)).unwrap_or_default(),
                        body_html: row.get("Body").cloned().unwrap_or_default(),
                        accepted_answer_id: field(row, "AcceptedAnswerId"),
                    },
                );
            }
            2 => {
                let Some(parent) = field::<u64>(row, "ParentId") else {
                    bad_rows += 1;
                    return;
                };
                answers.push(AnswerRecord {
                    id,
                    question_id: parent,
                    is_accepted: false,
                    score: field(row, "Score").unwrap_or(0),
                    body_html: row.get("Body").cloned().unwrap_or_default(),
                    segments: Vec::new(),
                });
            }
            _ => {}
        }
    })?;
    malformed += bad_rows;

    let before = answers.len();
    answers.retain(|a| questions.contains_key(&a.question_id));
    let orphans = before - answers.len();
    if orphans > 0 {
        log::warn!("{orphans} answer(s) reference unknown questions and were dropped");
    }
    for a in &mut answers {
        a.is_accepted = questions[&a.question_id].accepted_answer_id == Some(a.id);
    }
    answers.sort_by_key(|a| a.id);
    Ok(ParsedPosts {
        questions: questions.into_values().collect(),
        answers,
        malformed,
        orphans,
    })
}

#[derive(Debug, Clone, Default)]
pub struct ParsedComments {
    /// Ordered by post id, then by comment id.
    pub comments: Vec<DiscussionComment>,
    pub malformed: usize,
}

impl ParsedComments {
    /// Fills missing author names from a user table.
    pub fn fill_display_names(&mut self, users: &HashMap<i64, String>) {
        for c in &mut self.comments {
            if c.author_display_name.is_empty() {
                if let Some(name) = users.get(&c.author_id) {
                    c.author_display_name.clone_from(name);
                }
            }
        }
    }
}

/// Reads comment rows and assigns `sequence_index` per post by ascending id.
pub fn parse_comments(reader: impl BufRead, format: DumpFormat) -> Result<ParsedComments> {
    let mut by_post: BTreeMap<u64, BTreeMap<u64, DiscussionComment>> = BTreeMap::new();
    let mut bad_rows = 0;
    let malformed = for_each_row(reader, format, |row| {
        let (Some(id), Some(post_id)) = (field::<u64>(row, "Id"), field::<u64>(row, "PostId"))
        else {
            bad_rows += 1;
            return;
        };
        let score = field::<i64>(row, "Score").unwrap_or(0).max(0) as u64;
        by_post.entry(post_id).or_default().insert(
            id,
            DiscussionComment {
                id,
                post_id,
                author_id: field(row, "UserId").unwrap_or(-1),
                author_display_name: row.get("UserDisplayName").cloned().unwrap_or_default(),
                text: row.get("Text").cloned().unwrap_or_default(),
                score,
                sequence_index: 0,
                gold_candidate: false,
            },
        );
    })?;
    let mut comments = Vec::new();
    for (_, thread) in by_post {
        for (i, (_, mut c)) in thread.into_iter().enumerate() {
            c.sequence_index = i;
            comments.push(c);
        }
    }
    Ok(ParsedComments {
        comments,
        malformed: malformed + bad_rows,
    })
}

/// `Id -> DisplayName` from a `Users.xml`-style dump, used to fill comment
/// author names when the comment rows do not carry them.
pub fn parse_users(reader: impl BufRead, format: DumpFormat) -> Result<HashMap<i64, String>> {
    let mut users = HashMap::new();
    for_each_row(reader, format, |row| {
        if let (Some(id), Some(name)) = (field::<i64>(row, "Id"), row.get("DisplayName")) {
            users.insert(id, name.clone());
        }
    })?;
    Ok(users)
}

#[cfg(test)]
mod tests {
    use super::*;

    const POSTS: &str = r#"<?xml version="1.0" encoding="utf-8"?>
<posts>
  <row Id="1" PostTypeId="1" AcceptedAnswerId="10" ViewCount="500" Score="3" Title="Q one" Tags="&lt;java&gt;&lt;android&gt;" Body="&lt;p&gt;q&lt;/p&gt;" />
  <row Id="2" PostTypeId="1" ViewCount="12" Title="Q two" Tags="|c#|linq|" Body="" />
  <row Id="3" PostTypeId="1" ViewCount="7" Title="Q three" Body="" />
  <row Id="10" PostTypeId="2" ParentId="1" Score="5" Body="&lt;pre&gt;&lt;code&gt;x&lt;/code&gt;&lt;/pre&gt;" />
  <row Id="11" PostTypeId="2" ParentId="99" Score="1" Body="" />
</posts>
"#;

    #[test]
    fn five_row_fixture() {
        let parsed = parse_posts(POSTS.as_bytes(), DumpFormat::Xml).unwrap();
        assert_eq!(parsed.questions.len(), 3);
        assert_eq!(parsed.answers.len(), 1);
        assert_eq!(parsed.orphans, 1);
        assert_eq!(parsed.malformed, 0);
        let q = &parsed.questions[0];
        assert_eq!(q.view_count, 500);
        assert_eq!(q.tags, ["java", "android"]);
        assert_eq!(parsed.questions[1].tags, ["c#", "linq"]);
        let a = &parsed.answers[0];
        assert!(a.is_accepted);
        assert_eq!(a.body_html, "<pre><code>x</code></pre>");
    }

    #[test]
    fn non_accepted_answer() {
        let xml = r#"<row Id="1" PostTypeId="1" AcceptedAnswerId="3" Title="t" />
<row Id="2" PostTypeId="2" ParentId="1" />
<row Id="3" PostTypeId="2" ParentId="1" />"#;
        let parsed = parse_posts(xml.as_bytes(), DumpFormat::Xml).unwrap();
        let flags: Vec<bool> = parsed.answers.iter().map(|a| a.is_accepted).collect();
        assert_eq!(flags, [false, true]);
    }

    #[test]
    fn malformed_rows_are_counted() {
        let xml = r#"<row Id="1" PostTypeId="1" Title="t" />
<row Id="x" PostTypeId="1" />
<row Id="2" PostTypeId="2" />
<row Id="3" PostTypeId="1" Title="unterminated
<row Id="4" PostTypeId="5" />"#;
        let parsed = parse_posts(xml.as_bytes(), DumpFormat::Xml).unwrap();
        assert_eq!(parsed.questions.len(), 1);
        assert_eq!(parsed.malformed, 3);
    }

    #[test]
    fn comment_sequence_by_id() {
        let xml = r#"<row Id="9" PostId="5" Score="2" Text="c" UserId="1" UserDisplayName="a" />
<row Id="4" PostId="5" Score="0" Text="a" UserId="2" />
<row Id="7" PostId="5" Text="b" UserId="3" />"#;
        let parsed = parse_comments(xml.as_bytes(), DumpFormat::Xml).unwrap();
        let seq: Vec<(u64, usize)> = parsed
            .comments
            .iter()
            .map(|c| (c.id, c.sequence_index))
            .collect();
        assert_eq!(seq, [(4, 0), (7, 1), (9, 2)]);
        assert_eq!(parsed.comments[1].score, 0);
    }

    #[test]
    fn ten_comments_two_posts() {
        let mut xml = String::new();
        for (id, post) in [
            (1, 100),
            (2, 200),
            (3, 100),
            (4, 100),
            (5, 200),
            (6, 200),
            (7, 100),
            (8, 200),
            (9, 100),
            (10, 100),
        ] {
            xml.push_str(&format!(
                "<row Id=\"{id}\" PostId=\"{post}\" Score=\"1\" Text=\"t\" />\n"
            ));
        }
        let parsed = parse_comments(xml.as_bytes(), DumpFormat::Xml).unwrap();
        let seq = |post: u64| -> Vec<usize> {
            parsed
                .comments
                .iter()
                .filter(|c| c.post_id == post)
                .map(|c| c.sequence_index)
                .collect()
        };
        assert_eq!(seq(100), [0, 1, 2, 3, 4, 5]);
        assert_eq!(seq(200), [0, 1, 2, 3]);
    }

    #[test]
    fn json_lines_use_the_same_field_names() {
        let posts = r#"{"Id": 1, "PostTypeId": 1, "AcceptedAnswerId": 2, "ViewCount": 900, "Title": "t", "Tags": "<java>"}
{"Id": "2", "PostTypeId": 2, "ParentId": 1, "Score": -1, "Body": "<p>b</p>"}
not json"#;
        let parsed = parse_posts(posts.as_bytes(), DumpFormat::JsonLines).unwrap();
        assert_eq!(parsed.questions[0].view_count, 900);
        assert!(parsed.answers[0].is_accepted);
        assert_eq!(parsed.answers[0].score, -1);
        assert_eq!(parsed.malformed, 1);

        let comments =
            r#"{"Id": 3, "PostId": 2, "Text": "hi", "UserId": 8, "UserDisplayName": "Ann"}"#;
        let parsed = parse_comments(comments.as_bytes(), DumpFormat::JsonLines).unwrap();
        assert_eq!(parsed.comments[0].score, 0);
        assert_eq!(parsed.comments[0].author_display_name, "Ann");
    }

    #[test]
    fn users() {
        let xml = r#"<row Id="8" DisplayName="Stephen" />"#;
        let users = parse_users(xml.as_bytes(), DumpFormat::Xml).unwrap();
        assert_eq!(users[&8], "Stephen");
    }

    #[test]
    fn format_from_extension() {
        assert_eq!(
            DumpFormat::from_path(Path::new("a/posts.jsonl")),
            DumpFormat::JsonLines
        );
        assert_eq!(
            DumpFormat::from_path(Path::new("a/Posts.xml")),
            DumpFormat::Xml
        );
    }
}
