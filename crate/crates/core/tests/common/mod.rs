//! Reference computations written directly from the definitions, sharing no
//! code with the library beyond reading model parameters.

#![allow(dead_code)]

use std::collections::BTreeSet;

use phonomem::InteractionModel;
use unicode_normalization::UnicodeNormalization;

/// Sum over every ordered pair `i < j` with `j - i <= R` of `g0 - g(j-i)`.
pub fn energy(m: &InteractionModel, w: &[usize]) -> f64 {
    let mut e = 0.0;
    for i in 0..w.len() {
        for j in i + 1..w.len() {
            let r = j - i;
            if r <= m.range() {
                e += m.g0() - m.interaction(r).get(w[i], w[j]);
            }
        }
    }
    e
}

/// Sum of the pair terms that straddle the gap after position `gap`.
pub fn severed(m: &InteractionModel, w: &[usize], gap: usize) -> f64 {
    let mut e = 0.0;
    for i in 0..=gap {
        for j in gap + 1..w.len() {
            if j - i <= m.range() {
                e += m.g0() - m.interaction(j - i).get(w[i], w[j]);
            }
        }
    }
    e
}

/// `P(s | prefix)` from oracle energies via log-sum-exp.
pub fn conditional(m: &InteractionModel, prefix: &[usize], s: usize, beta: f64) -> f64 {
    let logits: Vec<f64> = (0..m.size())
        .map(|t| {
            let mut w = prefix.to_vec();
            w.push(t);
            -beta * energy(m, &w)
        })
        .collect();
    let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = logits.iter().map(|l| (l - top).exp()).sum();
    (logits[s] - top).exp() / z
}

/// Lowest-energy next sound by exhaustive evaluation, lowest index on ties.
pub fn argmin_next(m: &InteractionModel, prefix: &[usize]) -> usize {
    let mut best = (0, f64::INFINITY);
    for s in 0..m.size() {
        let mut w = prefix.to_vec();
        w.push(s);
        let e = energy(m, &w);
        if e < best.1 {
            best = (s, e);
        }
    }
    best.0
}

/// Counts of `(s, t)` at distance `r` over all words, as `[r-1][s*d+t]`.
pub fn pair_counts(words: &[Vec<usize>], d: usize, range: usize) -> Vec<Vec<f64>> {
    let mut c = vec![vec![0.0; d * d]; range];
    for w in words {
        for i in 0..w.len() {
            for r in 1..=range {
                if i + r < w.len() {
                    c[r - 1][w[i] * d + w[i + r]] += 1.0;
                }
            }
        }
    }
    c
}

/// Words of a corpus file: comment lines dropped, split on commas and
/// whitespace, NFC-normalized.
pub fn raw_words(text: &str) -> Vec<String> {
    text.lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .flat_map(|l| l.split(|c: char| c == ',' || c.is_whitespace()))
        .filter(|w| !w.is_empty())
        .map(|w| w.nfc().collect())
        .collect()
}

/// Distinct characters of the corpus words.
pub fn distinct_chars(words: &[String]) -> BTreeSet<char> {
    words.iter().flat_map(|w| w.chars()).collect()
}

/// All words of length `n` over `d` sounds, in lexicographic order.
pub fn all_words(d: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|w| {
                (0..d).map(move |s| {
                    let mut v = w.clone();
                    v.push(s);
                    v
                })
            })
            .collect();
    }
    out
}

pub const TURKISH_FRONT: [&str; 4] = ["e", "i", "ö", "ü"];
pub const TURKISH_BACK: [&str; 4] = ["a", "ı", "o", "u"];
