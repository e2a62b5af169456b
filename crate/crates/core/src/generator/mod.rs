//! Speaker and listener games played on a trained model.
//!
//! Words are grown one sound at a time: at every step the `d` candidate
//! continuations are scored by the energy of the extended word and the
//! lowest one is taken, ties going to the lower alphabet index. Exact
//! sequences can be forbidden through a [`PenaltySet`], which is how
//! next-to-lowest choices and the branching space are reached.

mod branch;

use std::cmp::Ordering;
use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::alphabet::{Corpus, Word};
use crate::error::{Error, Result};
use crate::model::{boundary_evaluations, EnergyProfile, InteractionModel};

pub use branch::{enumerate_branch_space, BranchNode, BranchSpace, EdgeKind, NodeId};

/// Sequences that may not be produced. A candidate is skipped when the word
/// it would produce is in the set.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PenaltySet {
    excluded: HashSet<Word>,
}

impl PenaltySet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, word: Word) -> bool {
        self.excluded.insert(word)
    }

    pub fn contains(&self, word: &[usize]) -> bool {
        // HashSet<Word> lookup needs an owned key; words are short.
        self.excluded.contains(&Word::from(word))
    }

    pub fn len(&self) -> usize {
        self.excluded.len()
    }

    pub fn is_empty(&self) -> bool {
        self.excluded.is_empty()
    }
}

impl FromIterator<Word> for PenaltySet {
    fn from_iter<I: IntoIterator<Item = Word>>(iter: I) -> Self {
        PenaltySet {
            excluded: iter.into_iter().collect(),
        }
    }
}

/// Result of a growth run, with the number of boundary energies computed.
#[derive(Debug, Clone, PartialEq)]
pub struct Growth {
    pub word: Word,
    pub evaluations: usize,
}

/// Candidates after `prefix`, sorted by energy then by index.
pub fn ranked_candidates(model: &InteractionModel, prefix: &[usize]) -> Vec<(usize, f64)> {
    let mut ranked: Vec<(usize, f64)> = model.next_sound_energies(prefix).into_iter().enumerate().collect();
    ranked.sort_by(|a, b| cmp_candidates(*a, *b));
    ranked
}

fn cmp_candidates(a: (usize, f64), b: (usize, f64)) -> Ordering {
    a.1.total_cmp(&b.1).then(a.0.cmp(&b.0))
}

/// Appends `steps` lowest-energy sounds to `prefix`.
pub fn grow_greedy(
    model: &InteractionModel,
    prefix: &[usize],
    steps: usize,
    penalties: &PenaltySet,
) -> Result<Word> {
    grow_counted(model, prefix, steps, None, penalties).map(|g| g.word)
}

/// Greedy growth that stops early once the gap opened by the next sound
/// would carry more than `tau` energy.
pub fn grow_until(
    model: &InteractionModel,
    prefix: &[usize],
    max_steps: usize,
    tau: f64,
    penalties: &PenaltySet,
) -> Result<Word> {
    grow_counted(model, prefix, max_steps, Some(tau), penalties).map(|g| g.word)
}

/// Greedy growth reporting how many candidate energies were evaluated.
pub fn grow_counted(
    model: &InteractionModel,
    prefix: &[usize],
    steps: usize,
    stop_tau: Option<f64>,
    penalties: &PenaltySet,
) -> Result<Growth> {
    let mut word = Word::from(prefix);
    let start = boundary_evaluations();
    for step in 0..steps {
        let energies = model.next_sound_energies(&word);
        let mut best: Option<(usize, f64)> = None;
        for (s, &e) in energies.iter().enumerate() {
            if !penalties.is_empty() && penalties.contains(&word.extended(s)) {
                continue;
            }
            if best.is_none_or(|b| cmp_candidates((s, e), b) == Ordering::Less) {
                best = Some((s, e));
            }
        }
        let (s, _) = best.ok_or(Error::SectorExhausted { step })?;
        if let Some(tau) = stop_tau {
            if appended_gap_energy(model, &word, s) > tau {
                break;
            }
        }
        word.push(s);
    }
    let evaluations = usize::try_from(boundary_evaluations() - start).expect("count fits in usize");
    Ok(Growth { word, evaluations })
}

/// Energy of the new last gap when `sound` is appended to `word`: the sum of
/// all pair terms ending on the new sound.
pub fn appended_gap_energy(model: &InteractionModel, word: &[usize], sound: usize) -> f64 {
    let n = word.len();
    (1..=model.range().min(n))
        .map(|r| model.pair_energy(r, word[n - r], sound))
        .sum()
}

/// The sound with the `rank`-th lowest energy after `prefix` (0 = greedy).
pub fn next_ranked(model: &InteractionModel, prefix: &[usize], rank: usize) -> Result<usize> {
    if rank >= model.size() {
        return Err(Error::RankOutOfRange {
            rank,
            size: model.size(),
        });
    }
    Ok(ranked_candidates(model, prefix)[rank].0)
}

/// How gibberish chooses between the lowest and next-to-lowest sound.
#[derive(Debug, Clone, PartialEq)]
pub struct GibberishPolicy {
    /// Probability of taking the next-to-lowest sound.
    pub p_next: f64,
    pub seed: u64,
    /// Length of the finished word, prefix included.
    pub max_length: usize,
}

impl Default for GibberishPolicy {
    fn default() -> Self {
        // A five-sided die: one face in five moves down a rank.
        GibberishPolicy {
            p_next: 0.2,
            seed: 0,
            max_length: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gibberish {
    pub word: Word,
    pub profile: EnergyProfile,
    /// Rank taken at each grown position.
    pub ranks: Vec<usize>,
}

pub fn gibberish(model: &InteractionModel, prefix: &[usize], policy: &GibberishPolicy) -> Result<Gibberish> {
    if !(0.0..=1.0).contains(&policy.p_next) {
        return Err(Error::InvalidConfig(format!(
            "p_next must lie in [0, 1], got {}",
            policy.p_next
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(policy.seed);
    let mut word = Word::from(prefix);
    let mut ranks = Vec::new();
    let top = model.size() - 1;
    while word.len() < policy.max_length {
        let roll: f64 = rng.gen();
        let rank = if roll < policy.p_next { 1.min(top) } else { 0 };
        let ranked = ranked_candidates(model, &word);
        word.push(ranked[rank].0);
        ranks.push(rank);
    }
    let profile = model.energy_profile(&word);
    Ok(Gibberish { word, profile, ranks })
}

/// Smallest period `p <= window` for which the last `2p` sounds repeat.
pub fn detect_steady_state(word: &[usize], window: usize) -> Option<usize> {
    let n = word.len();
    (1..=window)
        .take_while(|p| 2 * p <= n)
        .find(|&p| word[n - 2 * p..n - p] == word[n - p..])
}

/// Gap indices whose local energy exceeds `threshold`.
pub fn cut_points(model: &InteractionModel, word: &[usize], threshold: f64) -> Vec<usize> {
    model
        .energy_profile(word)
        .gaps
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > threshold)
        .map(|(x, _)| x)
        .collect()
}

/// Splits `word` after each listed gap index.
pub fn split_at_gaps(word: &[usize], gaps: &[usize]) -> Vec<Word> {
    let mut parts = Vec::with_capacity(gaps.len() + 1);
    let mut start = 0;
    for &g in gaps {
        parts.push(Word::from(&word[start..=g]));
        start = g + 1;
    }
    parts.push(Word::from(&word[start..]));
    parts
}

/// Inserts a void at every gap whose local energy exceeds `threshold`;
/// pair terms spanning a void no longer count.
pub fn segment(model: &InteractionModel, word: &[usize], threshold: f64) -> Vec<Word> {
    if word.is_empty() {
        return vec![Word::default()];
    }
    split_at_gaps(word, &cut_points(model, word, threshold))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Completion {
    pub word: Word,
    pub probability: f64,
}

/// Lexicon words starting with `prefix`, most probable continuation first.
pub fn predict_completions(
    model: &InteractionModel,
    prefix: &[usize],
    lexicon: &Corpus,
    beta: f64,
) -> Vec<Completion> {
    let mut seen = HashSet::new();
    let mut out: Vec<Completion> = lexicon
        .starting_with(prefix)
        .filter(|w| seen.insert(w.sounds().to_vec()))
        .map(|w| Completion {
            word: w.clone(),
            probability: model.sequence_probability(prefix, &w[prefix.len()..], beta),
        })
        .collect();
    out.sort_by(|a, b| b.probability.total_cmp(&a.probability).then_with(|| a.word.cmp(&b.word)));
    out
}
