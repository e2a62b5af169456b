//! Interaction tensors and the energies they assign to words.
//!
//! A model holds one `d × d` interaction matrix per distance `r = 1..=R`
//! and an energy shift `g0`. Every pair of sounds `(s, s')` at distance `r`
//! inside a word contributes `g0 - g(r)[s][s']`; pairs that would reach
//! past either end of the word are dropped. Lower energy means a more
//! familiar arrangement of sounds.

use std::cell::Cell;

use serde::{Deserialize, Serialize};

use crate::alphabet::Alphabet;
use crate::error::{Error, Result};
use crate::trainer::TrainConfig;

/// Interaction range used when none is given.
pub const DEFAULT_RANGE: usize = 3;

/// Energy shift of an untrained model.
pub const DEFAULT_G0: f64 = 1.0;

thread_local! {
    static BOUNDARY_EVALUATIONS: Cell<u64> = const { Cell::new(0) };
}

/// Running count of [`InteractionModel::boundary_energy`] calls made on the
/// current thread. Only differences between two readings are meaningful.
pub fn boundary_evaluations() -> u64 {
    BOUNDARY_EVALUATIONS.with(Cell::get)
}

/// A square, row-major matrix of couplings between sounds.
#[derive(Debug, Clone, PartialEq)]
pub struct Interaction {
    size: usize,
    data: Vec<f64>,
}

impl Interaction {
    pub fn zeros(size: usize) -> Self {
        Self::filled(size, 0.0)
    }

    pub fn filled(size: usize, value: f64) -> Self {
        Interaction {
            size,
            data: vec![value; size * size],
        }
    }

    pub fn from_row_major(size: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != size * size {
            return Err(Error::MalformedModel(format!(
                "matrix has {} entries, expected {}",
                data.len(),
                size * size
            )));
        }
        Ok(Interaction { size, data })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.data[from * self.size + to]
    }

    #[inline]
    pub fn set(&mut self, from: usize, to: usize, value: f64) {
        self.data[from * self.size + to] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.data.len() as f64
    }

    pub fn row(&self, from: usize) -> &[f64] {
        &self.data[from * self.size..(from + 1) * self.size]
    }
}

/// Where a model came from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<TrainConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus_source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus_hash: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus_words: Option<usize>,
    /// Seconds since the Unix epoch at which the model was saved.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    /// Ranges zeroed by [`InteractionModel::ablate`].
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ablated: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InteractionModel {
    alphabet: Alphabet,
    g0: f64,
    interactions: Vec<Interaction>,
    pub meta: ModelMeta,
}

/// Per-gap local energies of a word. `gaps[x]` is the energy carried by the
/// gap between sounds `x` and `x + 1`; a pair term at distance `r` is
/// counted on each of the `r` gaps it spans.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyProfile {
    pub gaps: Vec<f64>,
}

impl EnergyProfile {
    pub fn mean(&self) -> f64 {
        if self.gaps.is_empty() {
            0.0
        } else {
            self.gaps.iter().sum::<f64>() / self.gaps.len() as f64
        }
    }

    pub fn max(&self) -> Option<f64> {
        self.gaps.iter().copied().reduce(f64::max)
    }
}

/// Thermal distribution over the next sound given a prefix.
#[derive(Debug, Clone, PartialEq)]
pub struct NextSoundDistribution {
    pub energies: Vec<f64>,
    pub probabilities: Vec<f64>,
    pub beta: f64,
}

impl InteractionModel {
    pub fn new(alphabet: Alphabet, g0: f64, interactions: Vec<Interaction>) -> Result<Self> {
        let d = alphabet.size();
        if interactions.is_empty() {
            return Err(Error::InvalidConfig("interaction range must be at least 1".into()));
        }
        if !g0.is_finite() {
            return Err(Error::InvalidConfig(format!("g0 must be finite, got {g0}")));
        }
        for (r, g) in interactions.iter().enumerate() {
            if g.size() != d {
                return Err(Error::MalformedModel(format!(
                    "g({}) is {}x{}, alphabet has {d} symbols",
                    r + 1,
                    g.size(),
                    g.size()
                )));
            }
            if let Some(bad) = g.as_slice().iter().find(|v| !v.is_finite() || **v < 0.0) {
                return Err(Error::MalformedModel(format!(
                    "g({}) has entry {bad}; entries must be finite and nonnegative",
                    r + 1
                )));
            }
        }
        Ok(InteractionModel {
            alphabet,
            g0,
            interactions,
            meta: ModelMeta::default(),
        })
    }

    /// All couplings zero.
    pub fn untrained(alphabet: Alphabet, range: usize, g0: f64) -> Result<Self> {
        let d = alphabet.size();
        Self::new(alphabet, g0, vec![Interaction::zeros(d); range])
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    /// Number of sounds `d`.
    pub fn size(&self) -> usize {
        self.alphabet.size()
    }

    /// Maximum interaction distance `R`.
    pub fn range(&self) -> usize {
        self.interactions.len()
    }

    pub fn g0(&self) -> f64 {
        self.g0
    }

    /// `g(r)` for `1 <= r <= R`.
    pub fn interaction(&self, r: usize) -> &Interaction {
        &self.interactions[r - 1]
    }

    pub fn interactions(&self) -> &[Interaction] {
        &self.interactions
    }

    /// Energy of sound `from` followed `r` positions later by `to`.
    #[inline]
    pub fn pair_energy(&self, r: usize, from: usize, to: usize) -> f64 {
        self.g0 - self.interactions[r - 1].get(from, to)
    }

    pub fn word_energy(&self, word: &[usize]) -> f64 {
        self.chain_energy(word.len(), |i| word[i])
    }

    /// Energy of `prefix` followed by `rest`; identical to the energy of the
    /// concatenated word.
    pub fn boundary_energy(&self, prefix: &[usize], rest: &[usize]) -> f64 {
        BOUNDARY_EVALUATIONS.with(|c| c.set(c.get() + 1));
        let split = prefix.len();
        self.chain_energy(split + rest.len(), |i| {
            if i < split {
                prefix[i]
            } else {
                rest[i - split]
            }
        })
    }

    fn chain_energy(&self, n: usize, sound: impl Fn(usize) -> usize) -> f64 {
        let mut energy = 0.0;
        for x in 0..n {
            let s = sound(x);
            for r in 1..=self.range().min(n - 1 - x) {
                energy += self.pair_energy(r, s, sound(x + r));
            }
        }
        energy
    }

    pub fn energy_profile(&self, word: &[usize]) -> EnergyProfile {
        let n = word.len();
        let mut gaps = vec![0.0; n.saturating_sub(1)];
        for x in 0..n {
            for r in 1..=self.range().min(n.saturating_sub(1 + x)) {
                let term = self.pair_energy(r, word[x], word[x + r]);
                for gap in &mut gaps[x..x + r] {
                    *gap += term;
                }
            }
        }
        EnergyProfile { gaps }
    }

    /// Energy of `prefix + [s]` for every sound `s`.
    pub fn next_sound_energies(&self, prefix: &[usize]) -> Vec<f64> {
        (0..self.size())
            .map(|s| self.boundary_energy(prefix, &[s]))
            .collect()
    }

    /// Boltzmann weights over the next sound at inverse temperature `beta`.
    ///
    /// Panics if `beta` is negative or NaN.
    pub fn next_sound_distribution(&self, prefix: &[usize], beta: f64) -> NextSoundDistribution {
        let energies = self.next_sound_energies(prefix);
        let probabilities = boltzmann(&energies, beta);
        NextSoundDistribution {
            energies,
            probabilities,
            beta,
        }
    }

    /// Probability of producing `continuation` sound by sound after `prefix`.
    pub fn sequence_probability(&self, prefix: &[usize], continuation: &[usize], beta: f64) -> f64 {
        let mut context = prefix.to_vec();
        let mut p = 1.0;
        for &s in continuation {
            p *= self.next_sound_distribution(&context, beta).probabilities[s];
            context.push(s);
        }
        p
    }

    /// Copy of the model with `g(r) = 0` for each `r` in `ranges`.
    pub fn ablate(&self, ranges: &[usize]) -> Result<InteractionModel> {
        let mut out = self.clone();
        for &r in ranges {
            if r == 0 || r > self.range() {
                return Err(Error::InvalidRange {
                    range: r,
                    max: self.range(),
                });
            }
            out.interactions[r - 1] = Interaction::zeros(self.size());
            if !out.meta.ablated.contains(&r) {
                out.meta.ablated.push(r);
            }
        }
        out.meta.ablated.sort_unstable();
        Ok(out)
    }

    /// Average of the `d²` entries of `g(r)`.
    ///
    /// Panics unless `1 <= r <= R`.
    pub fn mean_interaction(&self, r: usize) -> f64 {
        assert!(r >= 1 && r <= self.range(), "range {r} outside 1..={}", self.range());
        self.interactions[r - 1].mean()
    }

    /// `(g0 - g(r))^{-1}` entrywise; `None` where the denominator is zero.
    pub fn reciprocal(&self, r: usize) -> Vec<Option<f64>> {
        self.interaction(r)
            .as_slice()
            .iter()
            .map(|&g| {
                let denom = self.g0 - g;
                (denom != 0.0).then(|| 1.0 / denom)
            })
            .collect()
    }
}

/// Softmax of `-beta * energies`, shifted by the minimum energy.
pub fn boltzmann(energies: &[f64], beta: f64) -> Vec<f64> {
    assert!(beta >= 0.0, "inverse temperature must be nonnegative, got {beta}");
    let min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = energies
        .iter()
        .map(|&e| if beta == 0.0 { 1.0 } else { (-beta * (e - min)).exp() })
        .collect();
    let z: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / z).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::build_inventory;

    fn atd() -> Alphabet {
        build_inventory(&["ata", "tad"], None).unwrap()
    }

    /// {a, t, d} with R = 1, g0 = 0, g_ta = g_at = 2, g_tt = 0.5.
    fn cv_toy() -> InteractionModel {
        let mut g = Interaction::zeros(3);
        g.set(1, 0, 2.0);
        g.set(0, 1, 2.0);
        g.set(1, 1, 0.5);
        InteractionModel::new(atd(), 0.0, vec![g]).unwrap()
    }

    /// Energy computed from one-hot vectors: n(x)^T (g0 - g(r)) n(x+r).
    #[allow(clippy::needless_range_loop)]
    fn one_hot_energy(m: &InteractionModel, word: &[usize]) -> f64 {
        let d = m.size();
        let one_hot = |s: usize| {
            let mut v = vec![0.0; d];
            v[s] = 1.0;
            v
        };
        let mut total = 0.0;
        for x in 0..word.len() {
            for r in 1..=m.range() {
                if x + r >= word.len() {
                    continue;
                }
                let (left, right) = (one_hot(word[x]), one_hot(word[x + r]));
                for i in 0..d {
                    for j in 0..d {
                        total += left[i] * (m.g0() - m.interaction(r).get(i, j)) * right[j];
                    }
                }
            }
        }
        total
    }

    #[test]
    fn untrained_four_sound_word() {
        let m = InteractionModel::untrained(atd(), 3, 1.0).unwrap();
        assert_eq!(m.word_energy(&[0, 1, 0, 2]), 6.0);
        assert_eq!(m.word_energy(&[1]), 0.0);
        assert_eq!(m.word_energy(&[]), 0.0);
    }

    #[test]
    fn cv_syllables_are_lower_in_energy() {
        let m = cv_toy();
        let a = m.alphabet();
        let tata = a.tokenize("tata").unwrap();
        let atta = a.tokenize("atta").unwrap();
        assert_eq!(m.word_energy(&tata), -6.0);
        assert_eq!(m.word_energy(&atta), -4.5);
        assert_eq!(one_hot_energy(&m, &tata), -6.0);
        assert_eq!(one_hot_energy(&m, &atta), -4.5);
    }

    #[test]
    fn boundary_matches_concatenation() {
        let m = cv_toy();
        let ta = m.alphabet().tokenize("ta").unwrap();
        assert_eq!(m.boundary_energy(&ta, &ta), -6.0);
        assert_eq!(m.boundary_energy(&[], &ta), m.word_energy(&ta));
        assert_eq!(m.boundary_energy(&ta, &[]), m.word_energy(&ta));
    }

    #[test]
    fn untrained_profile() {
        let m = InteractionModel::untrained(atd(), 3, 1.0).unwrap();
        assert_eq!(m.energy_profile(&[0, 1, 0, 2]).gaps, [3.0, 4.0, 3.0]);
        let long = [0; 10];
        let gaps = m.energy_profile(&long).gaps;
        assert_eq!(gaps[0], 3.0);
        assert_eq!(gaps[4], 6.0);
        assert_eq!(gaps[8], 3.0);
        assert!(m.energy_profile(&[1]).gaps.is_empty());
    }

    #[test]
    fn next_sound_energies_untrained() {
        let m = InteractionModel::untrained(atd(), 3, 1.0).unwrap();
        assert_eq!(m.next_sound_energies(&[]), [0.0; 3]);
        assert_eq!(m.next_sound_energies(&[0, 1, 2]), [6.0; 3]);
        // Relative to the prefix's own energy each candidate adds three unit terms.
        let base = m.word_energy(&[0, 1, 2]);
        for e in m.next_sound_energies(&[0, 1, 2]) {
            assert_eq!(e - base, 3.0);
        }
    }

    #[test]
    fn distribution_limits() {
        let m = cv_toy();
        let uniform = m.next_sound_distribution(&[1], 0.0);
        for p in &uniform.probabilities {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
        // After "t", "a" has energy -2, "t" -0.5, "d" 0.
        let cold = m.next_sound_distribution(&[1], 1e6);
        assert!(cold.probabilities[0] >= 1.0 - 1e-6);
    }

    #[test]
    fn two_state_softmax() {
        let p = boltzmann(&[0.0, std::f64::consts::LN_2], 1.0);
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((p[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn sequence_probability_of_empty_and_uniform() {
        let m = InteractionModel::untrained(atd(), 3, 0.0).unwrap();
        assert_eq!(m.sequence_probability(&[0], &[], 1.0), 1.0);
        let p = m.sequence_probability(&[0], &[1, 2, 0, 0], 1.0);
        assert!((p - 3f64.powi(-4)).abs() < 1e-15);
    }

    #[test]
    fn ablation() {
        let m = cv_toy();
        let same = m.ablate(&[]).unwrap();
        assert_eq!(same, m);
        let off = m.ablate(&[1]).unwrap();
        assert_eq!(off.interaction(1).sum(), 0.0);
        assert_eq!(m.interaction(1).get(1, 0), 2.0);
        assert_eq!(off.meta.ablated, [1]);
        assert!(matches!(m.ablate(&[2]), Err(Error::InvalidRange { range: 2, max: 1 })));
        assert!(m.ablate(&[0]).is_err());

        let mut g = Interaction::filled(3, 0.7);
        g.set(0, 0, 5.0);
        let m = InteractionModel::new(atd(), 1.0, vec![g.clone(), g.clone(), g]).unwrap();
        let flat = m.ablate(&[1, 2, 3]).unwrap();
        for n in 0..8usize {
            let w = vec![0; n];
            let expected: usize = (1..=3).map(|r| n.saturating_sub(r)).sum();
            assert_eq!(flat.word_energy(&w), expected as f64);
        }
    }

    #[test]
    fn means() {
        let m = InteractionModel::untrained(atd(), 3, 1.0).unwrap();
        assert_eq!(m.mean_interaction(2), 0.0);
        let ones = InteractionModel::new(atd(), 1.0, vec![Interaction::filled(3, 1.0)]).unwrap();
        assert_eq!(ones.mean_interaction(1), 1.0);
    }

    #[test]
    fn reciprocal_marks_singular_entries() {
        let ones = InteractionModel::new(atd(), 1.0, vec![Interaction::filled(3, 1.0)]).unwrap();
        assert!(ones.reciprocal(1).iter().all(Option::is_none));
        let zero = InteractionModel::untrained(atd(), 1, 2.0).unwrap();
        assert!(zero.reciprocal(1).iter().all(|v| *v == Some(0.5)));
    }

    #[test]
    fn rejects_bad_tensors() {
        let a = atd();
        assert!(InteractionModel::new(a.clone(), 1.0, vec![]).is_err());
        assert!(InteractionModel::new(a.clone(), 1.0, vec![Interaction::zeros(2)]).is_err());
        assert!(InteractionModel::new(a.clone(), 1.0, vec![Interaction::filled(3, -1.0)]).is_err());
        assert!(InteractionModel::new(a.clone(), 1.0, vec![Interaction::filled(3, f64::NAN)]).is_err());
        assert!(InteractionModel::new(a, f64::INFINITY, vec![Interaction::zeros(3)]).is_err());
    }
}
