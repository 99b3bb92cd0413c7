//! Rewrites a selected discussion comment into a neutral code comment.
//!
//! Rules run word by word over the text outside backtick spans:
//! user mentions are deleted, contractions expanded, personal pronouns
//! replaced and small integers spelled out. Identifier-looking words are
//! never touched.

use std::collections::HashMap;

#[derive(Debug, Clone, Default)]
pub struct RefinementRules {
    pronouns: HashMap<String, String>,
    contractions: HashMap<String, String>,
}

impl RefinementRules {
    pub fn new(
        pronouns: impl IntoIterator<Item = (String, String)>,
        contractions: impl IntoIterator<Item = (String, String)>,
    ) -> Self {
        Self {
            pronouns: normalized(pronouns),
            contractions: normalized(contractions),
        }
    }

    pub fn pronoun(&self, word: &str) -> Option<&str> {
        self.pronouns.get(&normalize_key(word)).map(String::as_str)
    }

    pub fn contraction(&self, word: &str) -> Option<&str> {
        self.contractions
            .get(&normalize_key(word))
            .map(String::as_str)
    }
}

fn normalized(pairs: impl IntoIterator<Item = (String, String)>) -> HashMap<String, String> {
    pairs
        .into_iter()
        .map(|(k, v)| (normalize_key(&k), v))
        .collect()
}

fn normalize_key(w: &str) -> String {
    w.replace('\u{2019}', "'").to_lowercase()
}

const ONES: [&str; 20] = [
    "zero",
    "one",
    "two",
    "three",
    "four",
    "five",
    "six",
    "seven",
    "eight",
    "nine",
    "ten",
    "eleven",
    "twelve",
    "thirteen",
    "fourteen",
    "fifteen",
    "sixteen",
    "seventeen",
    "eighteen",
    "nineteen",
];
const TENS: [&str; 10] = [
    "", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety",
];

/// English words for `0..=999`; `None` above that.
pub fn number_words(n: u32) -> Option<String> {
    fn below_hundred(n: u32) -> String {
        match n {
            0..=19 => ONES[n as usize].to_string(),
            _ if n.is_multiple_of(10) => TENS[(n / 10) as usize].to_string(),
            _ => format!("{}-{}", TENS[(n / 10) as usize], ONES[(n % 10) as usize]),
        }
    }
    match n {
        0..=99 => Some(below_hundred(n)),
        100..=999 if n.is_multiple_of(100) => Some(format!("{} hundred", ONES[(n / 100) as usize])),
        100..=999 => Some(format!(
            "{} hundred {}",
            ONES[(n / 100) as usize],
            below_hundred(n % 100)
        )),
        _ => None,
    }
}

/// Splits `text` into `(is_code, piece)` runs. Code pieces keep their
/// backticks. An unmatched trailing backtick is plain text.
pub(crate) fn code_spans(text: &str) -> Vec<(bool, &str)> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(open) = rest.find('`') {
        let Some(close_rel) = rest[open + 1..].find('`') else {
            break;
        };
        let close = open + 1 + close_rel;
        if open > 0 {
            out.push((false, &rest[..open]));
        }
        out.push((true, &rest[open..=close]));
        rest = &rest[close + 1..];
    }
    if !rest.is_empty() {
        out.push((false, rest));
    }
    out
}

const LEADING: &[char] = &['"', '\'', '(', '[', '{', '<', '\u{201c}', '\u{2018}'];
const TRAILING: &[char] = &[
    '.', ',', ';', ':', '!', '?', '"', '\'', ')', ']', '}', '>', '\u{201d}', '\u{2019}',
];

fn is_identifier_like(word: &str, core: &str) -> bool {
    if word.contains("()") || core.contains('_') || core.contains('.') {
        return true;
    }
    let chars: Vec<char> = core.chars().collect();
    chars
        .windows(2)
        .any(|w| w[0].is_lowercase() && w[1].is_uppercase())
}

fn match_case(original: &str, replacement: &str, capitalize: bool) -> String {
    let letters: Vec<char> = original.chars().filter(|c| c.is_alphabetic()).collect();
    if letters.len() > 1 && letters.iter().all(|c| c.is_uppercase()) {
        return replacement.to_uppercase();
    }
    if capitalize {
        let mut chars = replacement.chars();
        match chars.next() {
            Some(first) => first.to_uppercase().chain(chars).collect(),
            None => String::new(),
        }
    } else {
        replacement.to_string()
    }
}

fn small_integer(core: &str) -> Option<String> {
    if core.is_empty() || core.len() > 3 || !core.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if core.len() > 1 && core.starts_with('0') {
        return None;
    }
    number_words(core.parse().ok()?)
}

enum Rewrite {
    Keep,
    Delete,
    Replace(String),
}

struct WordRewriter<'a> {
    rules: &'a RefinementRules,
    sentence_start: bool,
}

impl WordRewriter<'_> {
    fn rewrite(&mut self, word: &str) -> Rewrite {
        let start = word.len() - word.trim_start_matches(LEADING).len();
        let inner = &word[start..];
        let core = inner.trim_end_matches(TRAILING);
        let lead = &word[..start];
        let trail = &inner[core.len()..];
        let at_start = self.sentence_start;
        self.sentence_start = trail.contains(['.', '!', '?']);

        if core.len() > 1 && core.starts_with('@') {
            let trail = trail.strip_prefix([',', ':']).unwrap_or(trail);
            self.sentence_start = at_start;
            return if lead.is_empty() && trail.is_empty() {
                Rewrite::Delete
            } else {
                Rewrite::Replace(format!("{lead}{trail}"))
            };
        }
        if core.is_empty() || is_identifier_like(word, core) {
            return Rewrite::Keep;
        }
        let first_upper = core.chars().next().is_some_and(char::is_uppercase);
        let replaced = if let Some(exp) = self.rules.contraction(core) {
            match_case(core, exp, first_upper)
        } else if let Some(rep) = self.rules.pronoun(core) {
            let capitalize = if core.eq_ignore_ascii_case("i") {
                at_start
            } else {
                first_upper
            };
            match_case(core, rep, capitalize)
        } else if let Some(words) = small_integer(core) {
            words
        } else {
            return Rewrite::Keep;
        };
        Rewrite::Replace(format!("{lead}{replaced}{trail}"))
    }
}

fn refine_plain(text: &str, rewriter: &mut WordRewriter<'_>) -> String {
    let mut pieces: Vec<(bool, String)> = Vec::new();
    let mut rest = text;
    while !rest.is_empty() {
        let ws = rest.len() - rest.trim_start().len();
        if ws > 0 {
            pieces.push((true, rest[..ws].to_string()));
            rest = &rest[ws..];
            continue;
        }
        let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
        let word = &rest[..end];
        match rewriter.rewrite(word) {
            Rewrite::Keep => pieces.push((false, word.to_string())),
            Rewrite::Replace(s) => pieces.push((false, s)),
            Rewrite::Delete => {
                let following_ws = rest[end..].len() - rest[end..].trim_start().len();
                if following_ws > 0 {
                    rest = &rest[end + following_ws..];
                    continue;
                }
                if matches!(pieces.last(), Some((true, _))) {
                    pieces.pop();
                }
            }
        }
        rest = &rest[end..];
    }
    pieces.into_iter().map(|(_, s)| s).collect()
}

pub fn refine_comment(text: &str, rules: &RefinementRules) -> String {
    let mut rewriter = WordRewriter {
        rules,
        sentence_start: true,
    };
    let mut out = String::with_capacity(text.len());
    for (is_code, piece) in code_spans(text) {
        if is_code {
            out.push_str(piece);
            rewriter.sentence_start = false;
        } else {
            out.push_str(&refine_plain(piece, &mut rewriter));
        }
    }
    out
}
