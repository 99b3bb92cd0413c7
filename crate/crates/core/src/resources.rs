//! Data files: stop lists, keyword lists, the sentiment lexicon and the
//! refinement tables.
//!
//! Every file has a built-in default. A data directory may override any
//! subset of them by providing a file with the same relative path.

use std::fs;
use std::path::Path;

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::refine::RefinementRules;
use crate::sentiment::SentimentLexicon;
use crate::textproc::StopListCatalog;

const STOPWORDS_EN: &str = include_str!("../data/stopwords_en.txt");
const PUNCTUATION: &str = include_str!("../data/punctuation.txt");
const KEYWORDS_JAVA: &str = include_str!("../data/keywords_java.txt");
const KEYWORDS_ANDROID: &str = include_str!("../data/keywords_android.txt");
const KEYWORDS_CSHARP: &str = include_str!("../data/keywords_csharp.txt");
const SENTIMENT_LEXICON: &str = include_str!("../data/sentiment_lexicon.txt");
const NEGATORS: &str = include_str!("../data/negators.txt");
const PRONOUNS: &str = include_str!("../data/refine/pronouns.txt");
const CONTRACTIONS: &str = include_str!("../data/refine/contractions.txt");

/// One token per line, blank lines and `#` comments skipped.
pub fn parse_word_list(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

/// `key<TAB>value` lines, blank lines and `#` comments skipped.
pub fn parse_tab_map(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (k, v) = trimmed.split_once('\t').ok_or_else(|| Error::Parse {
            line: i + 1,
            message: format!("expected `key<TAB>value`, got `{trimmed}`"),
        })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct Resources {
    pub stop_lists: StopListCatalog,
    pub lexicon: SentimentLexicon,
    pub refinement: RefinementRules,
}

impl Resources {
    /// The built-in data files.
    pub fn embedded() -> Self {
        Self::from_loader(|_, default| Ok(default.to_string()))
            .expect("embedded data files are well-formed")
    }

    /// Built-in data with per-file overrides from `dir`.
    pub fn load(dir: &Path) -> Result<Self> {
        Self::from_loader(|rel, default| {
            let path = dir.join(rel);
            if path.is_file() {
                fs::read_to_string(&path).map_err(|e| Error::io(path, e))
            } else {
                Ok(default.to_string())
            }
        })
    }

    fn from_loader(load: impl Fn(&str, &str) -> Result<String>) -> Result<Self> {
        let mut stop_lists = StopListCatalog {
            english: parse_word_list(&load("stopwords_en.txt", STOPWORDS_EN)?),
            punctuation: parse_word_list(&load("punctuation.txt", PUNCTUATION)?),
            ..Default::default()
        };
        for (domain, default) in [
            (Domain::Java, KEYWORDS_JAVA),
            (Domain::Android, KEYWORDS_ANDROID),
            (Domain::CSharp, KEYWORDS_CSHARP),
        ] {
            let rel = format!("keywords_{}.txt", domain.file_stem());
            stop_lists
                .keywords
                .insert(domain, parse_word_list(&load(&rel, default)?));
        }
        let lexicon = SentimentLexicon::parse(
            &load("sentiment_lexicon.txt", SENTIMENT_LEXICON)?,
            &load("negators.txt", NEGATORS)?,
        )?;
        let refinement = RefinementRules::new(
            parse_tab_map(&load("refine/pronouns.txt", PRONOUNS)?)?,
            parse_tab_map(&load("refine/contractions.txt", CONTRACTIONS)?)?,
        );
        Ok(Self {
            stop_lists,
            lexicon,
            refinement,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedded_data_loads() {
        let r = Resources::embedded();
        assert!(r.stop_lists.english.contains(&"the".to_string()));
        assert_eq!(r.stop_lists.keywords.len(), 3);
        assert!(r.lexicon.len() > 100);
        assert_eq!(r.lexicon.valence("best"), Some(3));
        assert!(r.lexicon.is_negator("not"));
    }

    #[test]
    fn directory_overrides_single_file() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("stopwords_en.txt"), "foo\n# c\n\nbar\n").unwrap();
        let r = Resources::load(dir.path()).unwrap();
        assert_eq!(r.stop_lists.english, ["foo", "bar"]);
        assert!(r.lexicon.len() > 100);
    }

    #[test]
    fn malformed_tab_map_reports_line() {
        match parse_tab_map("# x\nyou\tone\nbroken\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }
}
