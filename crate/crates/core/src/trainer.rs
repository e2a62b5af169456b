//! Fitting interaction tensors to a word list.
//!
//! The loss is the summed energy of the input words. Its gradient with
//! respect to `g(r)[s][s']` is minus the number of times `s` is followed
//! `r` sounds later by `s'`, independent of `g`, so gradient flow simply
//! accumulates scaled pair counts.

use serde::{Deserialize, Serialize};

use crate::alphabet::Corpus;
use crate::error::{Error, Result};
use crate::model::{Interaction, InteractionModel, ModelMeta, DEFAULT_G0, DEFAULT_RANGE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalize {
    /// Unbounded accumulation.
    #[default]
    None,
    /// After every step, rescale each `g(r)` so its entries sum to `d²`.
    PerRangeSum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Step size of one timestep.
    pub eta: f64,
    pub timesteps: u64,
    /// Value every coupling starts from.
    pub g_init: f64,
    /// Clip couplings at zero after each step.
    pub clamp: bool,
    pub normalize: Normalize,
    /// Unused by the deterministic flows; kept so configurations round-trip.
    pub seed: u64,
    /// Maximum interaction distance `R`.
    pub range: usize,
    pub g0: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            eta: 1e-4,
            timesteps: 10_000,
            g_init: 0.0,
            clamp: true,
            normalize: Normalize::None,
            seed: 0,
            range: DEFAULT_RANGE,
            g0: DEFAULT_G0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidConfig(format!("eta must be positive, got {}", self.eta)));
        }
        if !(self.g_init >= 0.0 && self.g_init.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "g_init must be nonnegative, got {}",
                self.g_init
            )));
        }
        if self.range == 0 {
            return Err(Error::InvalidConfig("range must be at least 1".into()));
        }
        if !self.g0.is_finite() {
            return Err(Error::InvalidConfig(format!("g0 must be finite, got {}", self.g0)));
        }
        Ok(())
    }
}

/// `counts[r - 1][s * d + s']` = occurrences of `s` followed `r` sounds
/// later by `s'`, over all words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairCounts {
    size: usize,
    counts: Vec<Vec<u64>>,
}

impl PairCounts {
    pub fn get(&self, r: usize, from: usize, to: usize) -> u64 {
        self.counts[r - 1][from * self.size + to]
    }

    pub fn range(&self) -> usize {
        self.counts.len()
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Total number of pairs at distance `r`.
    pub fn total(&self, r: usize) -> u64 {
        self.counts[r - 1].iter().sum()
    }

    pub fn matrix(&self, r: usize) -> &[u64] {
        &self.counts[r - 1]
    }
}

pub fn count_pairs(corpus: &Corpus, range: usize) -> PairCounts {
    let d = corpus.alphabet.size();
    let mut counts = vec![vec![0u64; d * d]; range];
    for word in &corpus.words {
        for (x, &s) in word.iter().enumerate() {
            for (r, table) in counts.iter_mut().enumerate() {
                if let Some(&t) = word.get(x + r + 1) {
                    table[s * d + t] += 1;
                }
            }
        }
    }
    PairCounts { size: d, counts }
}

pub fn train(corpus: &Corpus, cfg: &TrainConfig) -> Result<InteractionModel> {
    cfg.validate()?;
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let d = corpus.alphabet.size();
    let counts = count_pairs(corpus, cfg.range);
    let mut interactions = vec![Interaction::filled(d, cfg.g_init); cfg.range];

    match cfg.normalize {
        Normalize::None => {
            // The gradient is constant, so the flow integrates in closed form.
            let scale = cfg.eta * cfg.timesteps as f64;
            for (r, g) in interactions.iter_mut().enumerate() {
                for (v, &c) in g.as_mut_slice().iter_mut().zip(counts.matrix(r + 1)) {
                    *v += scale * c as f64;
                    if cfg.clamp {
                        *v = v.max(0.0);
                    }
                }
            }
        }
        Normalize::PerRangeSum => {
            let mass = (d * d) as f64;
            for _ in 0..cfg.timesteps {
                for (r, g) in interactions.iter_mut().enumerate() {
                    for (v, &c) in g.as_mut_slice().iter_mut().zip(counts.matrix(r + 1)) {
                        *v += cfg.eta * c as f64;
                        if cfg.clamp {
                            *v = v.max(0.0);
                        }
                    }
                    let total = g.sum();
                    if total > 0.0 {
                        let k = mass / total;
                        g.as_mut_slice().iter_mut().for_each(|v| *v *= k);
                    }
                }
            }
        }
    }

    let mut model = InteractionModel::new(corpus.alphabet.clone(), cfg.g0, interactions)?;
    model.meta = ModelMeta {
        config: Some(cfg.clone()),
        corpus_source: Some(corpus.source.clone()),
        corpus_hash: Some(corpus.hash()),
        corpus_words: Some(corpus.len()),
        ..ModelMeta::default()
    };
    Ok(model)
}

/// Whether mean coupling strength is non-increasing with distance.
pub fn verify_decay(model: &InteractionModel) -> bool {
    (1..model.range()).all(|r| model.mean_interaction(r) >= model.mean_interaction(r + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::DigraphTable;
    use crate::alphabet::Alphabet;

    fn corpus(text: &str) -> Corpus {
        Corpus::parse(text, "test", None).unwrap()
    }

    #[test]
    fn counts_for_ata() {
        let c = count_pairs(&corpus("ata"), 2);
        // a = 0, t = 1
        assert_eq!(c.get(1, 0, 1), 1);
        assert_eq!(c.get(1, 1, 0), 1);
        assert_eq!(c.get(1, 0, 0), 0);
        assert_eq!(c.get(2, 0, 0), 1);
        assert_eq!(c.total(1), 2);
        assert_eq!(c.total(2), 1);
    }

    #[test]
    fn counts_for_empty_corpus_are_zero() {
        let alphabet = Alphabet::from_symbols(["a", "t"], DigraphTable::new()).unwrap();
        let empty = Corpus {
            alphabet,
            words: vec![],
            source: "empty".into(),
        };
        let c = count_pairs(&empty, 3);
        assert!((1..=3).all(|r| c.total(r) == 0));
        assert!(matches!(train(&empty, &TrainConfig::default()), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn single_step_equals_counts() {
        let cfg = TrainConfig {
            eta: 1.0,
            timesteps: 1,
            ..TrainConfig::default()
        };
        let m = train(&corpus("ata"), &cfg).unwrap();
        let g1 = m.interaction(1);
        assert_eq!(g1.get(0, 1), 1.0);
        assert_eq!(g1.get(1, 0), 1.0);
        assert_eq!(g1.get(0, 0), 0.0);
        assert_eq!(g1.get(1, 1), 0.0);
    }

    #[test]
    fn zero_steps_leave_initial_fill() {
        let cfg = TrainConfig {
            timesteps: 0,
            g_init: 0.25,
            ..TrainConfig::default()
        };
        let m = train(&corpus("ata tad"), &cfg).unwrap();
        for r in 1..=3 {
            assert!(m.interaction(r).as_slice().iter().all(|&v| v == 0.25));
        }
    }

    #[test]
    fn normalized_flow_keeps_unit_mean() {
        let cfg = TrainConfig {
            eta: 0.01,
            timesteps: 50,
            normalize: Normalize::PerRangeSum,
            ..TrainConfig::default()
        };
        let m = train(&corpus("tata atad data"), &cfg).unwrap();
        for r in 1..=3 {
            assert!((m.mean_interaction(r) - 1.0).abs() < 1e-12);
        }
        assert!(verify_decay(&m));
    }

    #[test]
    fn decay_check() {
        let alphabet = Alphabet::from_symbols(["a", "t"], DigraphTable::new()).unwrap();
        let zero = InteractionModel::untrained(alphabet.clone(), 3, 1.0).unwrap();
        assert!(verify_decay(&zero));
        let bad = InteractionModel::new(
            alphabet,
            1.0,
            vec![Interaction::filled(2, 1.0), Interaction::filled(2, 2.0)],
        )
        .unwrap();
        assert!(!verify_decay(&bad));
    }

    #[test]
    fn rejects_bad_config() {
        let c = corpus("ata");
        for cfg in [
            TrainConfig { eta: 0.0, ..TrainConfig::default() },
            TrainConfig { eta: f64::NAN, ..TrainConfig::default() },
            TrainConfig { g_init: -1.0, ..TrainConfig::default() },
            TrainConfig { range: 0, ..TrainConfig::default() },
        ] {
            assert!(matches!(train(&c, &cfg), Err(Error::InvalidConfig(_))));
        }
    }

    #[test]
    fn meta_records_provenance() {
        let c = corpus("ata");
        let m = train(&c, &TrainConfig::default()).unwrap();
        assert_eq!(m.meta.corpus_hash.as_deref(), Some(c.hash().as_str()));
        assert_eq!(m.meta.config.as_ref().unwrap().timesteps, 10_000);
    }
}
