use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Programming domain of a question, derived from its tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Java,
    Android,
    #[serde(rename = "c#")]
    CSharp,
}

impl Domain {
    pub const ALL: [Domain; 3] = [Domain::Java, Domain::Android, Domain::CSharp];

    /// The tag that identifies the domain on Stack Overflow.
    pub fn tag(self) -> &'static str {
        match self {
            Domain::Java => "java",
            Domain::Android => "android",
            Domain::CSharp => "c#",
        }
    }

    /// Stem used in data file names (`keywords_<stem>.txt`).
    pub fn file_stem(self) -> &'static str {
        match self {
            Domain::Java => "java",
            Domain::Android => "android",
            Domain::CSharp => "csharp",
        }
    }

    /// Android wins over Java because Android questions are usually tagged
    /// with both.
    pub fn from_tags<S: AsRef<str>>(tags: &[S]) -> Option<Domain> {
        let has = |d: Domain| {
            tags.iter()
                .any(|t| t.as_ref().eq_ignore_ascii_case(d.tag()))
        };
        [Domain::Android, Domain::CSharp, Domain::Java]
            .into_iter()
            .find(|&d| has(d))
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "java" => Ok(Domain::Java),
            "android" => Ok(Domain::Android),
            "c#" | "csharp" | "cs" => Ok(Domain::CSharp),
            other => Err(Error::InvalidInput(format!("unknown domain `{other}`"))),
        }
    }
}
