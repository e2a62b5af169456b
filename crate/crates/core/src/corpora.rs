//! Word lists shipped with the crate.

use crate::alphabet::Corpus;
use crate::error::{Error, Result};

/// Declined Latin nouns (35 words).
pub const LATIN: &str = include_str!("../data/latin.txt");

/// Turkish pronouns and inflected nouns (42 words).
pub const TURKISH: &str = include_str!("../data/turkish.txt");

/// Prefix marking a built-in corpus in place of a file path.
pub const BUILTIN_PREFIX: &str = "builtin:";

pub fn latin() -> Corpus {
    Corpus::parse(LATIN, "builtin:latin", None).expect("embedded Latin corpus parses")
}

pub fn turkish() -> Corpus {
    Corpus::parse(TURKISH, "builtin:turkish", None).expect("embedded Turkish corpus parses")
}

/// Looks up `builtin:latin` or `builtin:turkish`.
pub fn builtin(name: &str) -> Result<Corpus> {
    match name.strip_prefix(BUILTIN_PREFIX).unwrap_or(name) {
        "latin" => Ok(latin()),
        "turkish" => Ok(turkish()),
        other => Err(Error::InvalidConfig(format!("no built-in corpus named {other:?}"))),
    }
}

/// Raw text of a built-in corpus.
pub fn builtin_text(name: &str) -> Option<&'static str> {
    match name.strip_prefix(BUILTIN_PREFIX).unwrap_or(name) {
        "latin" => Some(LATIN),
        "turkish" => Some(TURKISH),
        _ => None,
    }
}
