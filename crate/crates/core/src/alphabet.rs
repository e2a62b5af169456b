//! Sound inventories, words, and corpora.
//!
//! A sound is one extended grapheme cluster of NFC-normalized text, or one
//! entry of an optional digraph table that glues several clusters into a
//! single symbol. Symbols are numbered in order of first appearance; that
//! order is the tie-break order used everywhere else in the crate.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::Deref;

use sha2::{Digest, Sha256};
use unicode_normalization::UnicodeNormalization;
use unicode_segmentation::UnicodeSegmentation;

use crate::error::{Error, Result};

/// Multi-cluster sequences that should be read as one sound, mapped to the
/// symbol they stand for.
pub type DigraphTable = BTreeMap<String, String>;

/// Composed (NFC) form of `s`.
pub fn normalize(s: &str) -> String {
    s.nfc().collect()
}

/// Splits corpus text into words: whitespace and commas separate words,
/// lines whose first non-blank character is `#` are comments.
pub fn split_words(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .filter(|line| !line.trim_start().starts_with('#'))
        .flat_map(|line| line.split(|c: char| c == ',' || c.is_whitespace()))
        .filter(|w| !w.is_empty())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<String>,
    index: HashMap<String, usize>,
    digraphs: DigraphTable,
}

impl Alphabet {
    /// Builds an alphabet with an explicit symbol order.
    pub fn from_symbols<I, S>(symbols: I, digraphs: DigraphTable) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut alphabet = Alphabet {
            symbols: Vec::new(),
            index: HashMap::new(),
            digraphs: digraphs
                .into_iter()
                .map(|(k, v)| (normalize(&k), normalize(&v)))
                .collect(),
        };
        for symbol in symbols {
            let symbol = normalize(&symbol.into());
            if symbol.is_empty() {
                return Err(Error::InvalidConfig("empty symbol".into()));
            }
            if alphabet.index.contains_key(&symbol) {
                return Err(Error::InvalidConfig(format!("duplicate symbol {symbol:?}")));
            }
            alphabet.index.insert(symbol.clone(), alphabet.symbols.len());
            alphabet.symbols.push(symbol);
        }
        if alphabet.symbols.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        Ok(alphabet)
    }

    /// Number of distinct sounds.
    pub fn size(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn digraphs(&self) -> &DigraphTable {
        &self.digraphs
    }

    pub fn symbol(&self, index: usize) -> Option<&str> {
        self.symbols.get(index).map(String::as_str)
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.index.get(symbol).copied()
    }

    /// Converts `s` to a word. Byte offsets in errors refer to the
    /// normalized string.
    pub fn tokenize(&self, s: &str) -> Result<Word> {
        let normalized = normalize(s);
        let mut sounds = Vec::new();
        for (offset, unit) in sound_units(&normalized, &self.digraphs) {
            let symbol = self.digraphs.get(unit).map(String::as_str).unwrap_or(unit);
            match self.index.get(symbol) {
                Some(&i) => sounds.push(i),
                None => {
                    return Err(Error::UnknownSymbol {
                        cluster: unit.to_string(),
                        offset,
                    })
                }
            }
        }
        Ok(Word(sounds))
    }

    pub fn detokenize(&self, word: &[usize]) -> Result<String> {
        let mut out = String::new();
        for &i in word {
            let symbol = self.symbols.get(i).ok_or(Error::IndexOutOfRange {
                index: i,
                size: self.size(),
            })?;
            out.push_str(symbol);
        }
        Ok(out)
    }

    /// Detokenizes a word already known to be valid.
    pub fn render(&self, word: &[usize]) -> String {
        word.iter().map(|&i| self.symbols[i].as_str()).collect()
    }

    pub fn validate(&self, word: &[usize]) -> Result<()> {
        match word.iter().find(|&&i| i >= self.size()) {
            Some(&index) => Err(Error::IndexOutOfRange {
                index,
                size: self.size(),
            }),
            None => Ok(()),
        }
    }
}

/// Collects the symbol inventory of `lines` in first-appearance order.
pub fn build_inventory<S: AsRef<str>>(lines: &[S], digraphs: Option<&DigraphTable>) -> Result<Alphabet> {
    let digraphs: DigraphTable = digraphs
        .map(|t| t.iter().map(|(k, v)| (normalize(k), normalize(v))).collect())
        .unwrap_or_default();
    let mut seen = HashMap::new();
    let mut symbols = Vec::new();
    for line in lines {
        for word in split_words(line.as_ref()) {
            let word = normalize(word);
            for (_, unit) in sound_units(&word, &digraphs) {
                let symbol = digraphs.get(unit).map(String::as_str).unwrap_or(unit);
                if !seen.contains_key(symbol) {
                    seen.insert(symbol.to_string(), symbols.len());
                    symbols.push(symbol.to_string());
                }
            }
        }
    }
    if symbols.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Alphabet::from_symbols(symbols, digraphs)
}

/// Splits normalized text into sound units with their byte offsets,
/// preferring the longest digraph that starts and ends on cluster
/// boundaries.
fn sound_units<'a>(s: &'a str, digraphs: &DigraphTable) -> Vec<(usize, &'a str)> {
    let bounds: Vec<usize> = s
        .grapheme_indices(true)
        .map(|(i, _)| i)
        .chain(std::iter::once(s.len()))
        .collect();
    let mut units = Vec::new();
    let mut k = 0;
    while k + 1 < bounds.len() {
        let start = bounds[k];
        let mut next = k + 1;
        if !digraphs.is_empty() {
            for j in (k + 2..bounds.len()).rev() {
                if digraphs.contains_key(&s[start..bounds[j]]) {
                    next = j;
                    break;
                }
            }
        }
        units.push((start, &s[start..bounds[next]]));
        k = next;
    }
    units
}

/// A sequence of sound indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<usize>);

impl Word {
    pub fn new(sounds: Vec<usize>) -> Self {
        Word(sounds)
    }

    pub fn sounds(&self) -> &[usize] {
        &self.0
    }

    pub fn push(&mut self, sound: usize) {
        self.0.push(sound);
    }

    /// `self` followed by `rest`.
    pub fn concat(&self, rest: &[usize]) -> Word {
        let mut sounds = Vec::with_capacity(self.len() + rest.len());
        sounds.extend_from_slice(&self.0);
        sounds.extend_from_slice(rest);
        Word(sounds)
    }

    /// `self` with one more sound.
    pub fn extended(&self, sound: usize) -> Word {
        let mut w = self.clone();
        w.push(sound);
        w
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }
}

impl Deref for Word {
    type Target = [usize];

    fn deref(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for Word {
    fn from(v: Vec<usize>) -> Self {
        Word(v)
    }
}

impl From<&[usize]> for Word {
    fn from(v: &[usize]) -> Self {
        Word(v.to_vec())
    }
}

/// A tokenized word list together with its alphabet.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub alphabet: Alphabet,
    pub words: Vec<Word>,
    pub source: String,
}

impl Corpus {
    /// Parses corpus text, deriving the alphabet from it.
    pub fn parse(text: &str, source: impl Into<String>, digraphs: Option<&DigraphTable>) -> Result<Self> {
        let alphabet = build_inventory(&[text], digraphs)?;
        Self::parse_with_alphabet(text, alphabet, source)
    }

    /// Parses corpus bytes, reporting the first line that is not valid UTF-8.
    pub fn from_bytes(bytes: &[u8], source: impl Into<String>, digraphs: Option<&DigraphTable>) -> Result<Self> {
        let text = decode_lines(bytes)?;
        Self::parse(&text, source, digraphs)
    }

    /// Parses corpus text against an existing alphabet.
    pub fn parse_with_alphabet(text: &str, alphabet: Alphabet, source: impl Into<String>) -> Result<Self> {
        let words = split_words(text)
            .map(|w| alphabet.tokenize(w))
            .collect::<Result<Vec<_>>>()?;
        let words: Vec<Word> = words.into_iter().filter(|w| !w.is_empty()).collect();
        if words.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        Ok(Corpus {
            alphabet,
            words,
            source: source.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, word: &[usize]) -> bool {
        self.words.iter().any(|w| w.sounds() == word)
    }

    /// Words having `prefix` as a proper or improper prefix.
    pub fn starting_with<'a>(&'a self, prefix: &'a [usize]) -> impl Iterator<Item = &'a Word> + 'a {
        self.words.iter().filter(move |w| w.starts_with(prefix))
    }

    /// Surface forms, in corpus order.
    pub fn surface_words(&self) -> Vec<String> {
        self.words.iter().map(|w| self.alphabet.render(w)).collect()
    }

    /// SHA-256 over the newline-joined surface forms.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        for (i, w) in self.surface_words().iter().enumerate() {
            if i > 0 {
                hasher.update(b"\n");
            }
            hasher.update(w.as_bytes());
        }
        hex::encode(hasher.finalize())
    }
}

/// Decodes `bytes` line by line so that a bad byte sequence can be reported
/// with its 1-based line number.
pub fn decode_lines(bytes: &[u8]) -> Result<String> {
    let mut out = String::with_capacity(bytes.len());
    for (n, line) in bytes.split(|&b| b == b'\n').enumerate() {
        let line = std::str::from_utf8(line).map_err(|_| Error::MalformedText { line: n + 1 })?;
        if n > 0 {
            out.push('\n');
        }
        out.push_str(line);
    }
    Ok(out)
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbols.join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atd() -> Alphabet {
        build_inventory(&["ata", "tad"], None).unwrap()
    }

    #[test]
    fn three_sound_inventory() {
        let a = atd();
        assert_eq!(a.symbols(), ["a", "t", "d"]);
        assert_eq!(a.size(), 3);
    }

    #[test]
    fn duplicates_collapse() {
        let a = build_inventory(&["a", "a", "a"], None).unwrap();
        assert_eq!(a.symbols(), ["a"]);
    }

    #[test]
    fn empty_input_is_an_error() {
        let lines: [&str; 0] = [];
        assert!(matches!(build_inventory(&lines, None), Err(Error::EmptyCorpus)));
        assert!(matches!(
            build_inventory(&["# only a comment", "  ,, "], None),
            Err(Error::EmptyCorpus)
        ));
    }

    #[test]
    fn malformed_bytes_report_line() {
        let bytes = b"ata\ntad\n\xff\xfe\n";
        match Corpus::from_bytes(bytes, "test", None) {
            Err(Error::MalformedText { line }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn tokenize_ata() {
        let a = atd();
        assert_eq!(a.tokenize("ata").unwrap().sounds(), [0, 1, 0]);
        assert!(a.tokenize("").unwrap().is_empty());
        assert_eq!(a.detokenize(&[0, 1, 0]).unwrap(), "ata");
        assert_eq!(a.detokenize(&[]).unwrap(), "");
    }

    #[test]
    fn unknown_symbol_names_cluster_and_offset() {
        let a = atd();
        match a.tokenize("atāx") {
            Err(Error::UnknownSymbol { cluster, offset }) => {
                assert_eq!(cluster, "ā");
                assert_eq!(offset, 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn detokenize_out_of_range() {
        assert!(matches!(
            atd().detokenize(&[0, 7]),
            Err(Error::IndexOutOfRange { index: 7, size: 3 })
        ));
    }

    #[test]
    fn combining_and_precomposed_macrons_agree() {
        let composed = build_inventory(&["pāstōrēs"], None).unwrap();
        let decomposed = "pa\u{0304}sto\u{0304}re\u{0304}s";
        let w = composed.tokenize(decomposed).unwrap();
        assert_eq!(w.len(), 8);
        assert_eq!(composed.detokenize(&w).unwrap(), "pāstōrēs");
    }

    #[test]
    fn digraphs_become_single_symbols() {
        let mut table = DigraphTable::new();
        table.insert("dʒ".into(), "dʒ".into());
        table.insert("tʃ".into(), "tʃ".into());
        let a = build_inventory(&["dʒatʃ"], Some(&table)).unwrap();
        assert_eq!(a.symbols(), ["dʒ", "a", "tʃ"]);
        let w = a.tokenize("tʃadʒ").unwrap();
        assert_eq!(w.sounds(), [2, 1, 0]);
        assert_eq!(a.render(&w), "tʃadʒ");
    }

    #[test]
    fn commas_and_comments_separate_words() {
        let c = Corpus::parse("# header\nata, tad\ntata,\n", "inline", None).unwrap();
        assert_eq!(c.surface_words(), ["ata", "tad", "tata"]);
    }

    #[test]
    fn explicit_order_rejects_duplicates() {
        assert!(Alphabet::from_symbols(["a", "b", "a"], DigraphTable::new()).is_err());
        let a = Alphabet::from_symbols(["t", "a"], DigraphTable::new()).unwrap();
        assert_eq!(a.tokenize("ta").unwrap().sounds(), [0, 1]);
    }
}
