//! Word-boundary keyword matching for commit messages.
//!
//! Keywords match whole words case-insensitively; tokens embedded in longer
//! identifiers do not match ("prefix" contains no word "fix"). Multi-word
//! keywords match across any run of whitespace.

use regex::Regex;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct KeywordMatcher {
    regex: Option<Regex>,
}

impl KeywordMatcher {
    pub fn new<S: AsRef<str>>(keywords: &[S]) -> Result<KeywordMatcher> {
        let alternatives: Vec<String> = keywords
            .iter()
            .map(|k| k.as_ref().trim())
            .filter(|k| !k.is_empty())
            .map(|k| {
                k.split_whitespace()
                    .map(regex::escape)
                    .collect::<Vec<_>>()
                    .join(r"\s+")
            })
            .collect();
        if alternatives.is_empty() {
            return Ok(KeywordMatcher { regex: None });
        }
        let pattern = format!(r"(?i)\b(?:{})\b", alternatives.join("|"));
        let regex = Regex::new(&pattern)
            .map_err(|e| Error::Config(format!("bad keyword pattern: {e}")))?;
        Ok(KeywordMatcher { regex: Some(regex) })
    }

    pub fn matches(&self, text: &str) -> bool {
        self.regex.as_ref().map_or(false, |r| r.is_match(text))
    }
}

/// Default indicators that a commit message describes a refactoring.
pub fn default_refactor_keywords() -> Vec<String> {
    ["refactor", "refactoring", "refactored", "cleanup", "clean up", "restructure", "simplify", "extract"]
        .into_iter()
        .map(String::from)
        .collect()
}

/// Default indicators that a commit is corrective (a bug fix).
pub fn default_corrective_keywords() -> Vec<String> {
    ["fix", "fixes", "fixed", "bug", "bugs", "defect", "error", "fail", "failure", "fault", "patch", "repair"]
        .into_iter()
        .map(String::from)
        .collect()
}
