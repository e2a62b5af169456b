//! Phonotactic memory from locally interacting sounds.
//!
//! Words are chains of sounds. Sounds up to `R` positions apart interact
//! through learned `d × d` matrices, giving each word an energy. Training
//! lowers the energy of a word list; afterwards the model regrows those
//! words sound by sound, invents plausible new ones, and scores, segments
//! and completes sound sequences.
//!
//! ```
//! use phonomem::{corpora, generator, trainer};
//!
//! let corpus = corpora::latin();
//! let model = trainer::train(&corpus, &trainer::TrainConfig::default()).unwrap();
//! let serv = corpus.alphabet.tokenize("serv").unwrap();
//! let word = generator::grow_greedy(&model, &serv, 2, &Default::default()).unwrap();
//! assert_eq!(word.len(), 6);
//! ```

pub mod alphabet;
pub mod corpora;
pub mod error;
pub mod export;
pub mod generator;
pub mod model;
pub mod persist;
pub mod trainer;

pub use alphabet::{build_inventory, Alphabet, Corpus, Word};
pub use error::{Error, Result};
pub use model::{EnergyProfile, Interaction, InteractionModel, NextSoundDistribution};
pub use trainer::{count_pairs, train, verify_decay, TrainConfig};
