//! Versioned JSON model files.
//!
//! Tensors are written row-major with an explicit shape. Floats use the
//! shortest decimal form that parses back to the same bits, so a saved
//! model reloads bit-for-bit.

use serde::{Deserialize, Serialize};

use crate::alphabet::{Alphabet, DigraphTable};
use crate::error::{Error, Result};
use crate::model::{Interaction, InteractionModel, ModelMeta};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub alphabet: Vec<String>,
    #[serde(default, skip_serializing_if = "DigraphTable::is_empty")]
    pub digraphs: DigraphTable,
    pub range: usize,
    pub g0: f64,
    pub tensors: Vec<TensorRecord>,
    #[serde(default)]
    pub meta: ModelMeta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorRecord {
    /// Interaction distance `r`.
    pub range: usize,
    pub shape: [usize; 2],
    pub data: Vec<f64>,
}

impl From<&InteractionModel> for ModelFile {
    fn from(model: &InteractionModel) -> Self {
        let d = model.size();
        ModelFile {
            format_version: FORMAT_VERSION,
            alphabet: model.alphabet().symbols().to_vec(),
            digraphs: model.alphabet().digraphs().clone(),
            range: model.range(),
            g0: model.g0(),
            tensors: model
                .interactions()
                .iter()
                .enumerate()
                .map(|(r, g)| TensorRecord {
                    range: r + 1,
                    shape: [d, d],
                    data: g.as_slice().to_vec(),
                })
                .collect(),
            meta: model.meta.clone(),
        }
    }
}

impl ModelFile {
    pub fn into_model(self) -> Result<InteractionModel> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::VersionMismatch {
                found: self.format_version,
                expected: FORMAT_VERSION,
            });
        }
        let alphabet = Alphabet::from_symbols(self.alphabet, self.digraphs)?;
        let d = alphabet.size();
        if self.tensors.len() != self.range {
            return Err(Error::MalformedModel(format!(
                "range is {} but {} tensors are stored",
                self.range,
                self.tensors.len()
            )));
        }
        let mut interactions = Vec::with_capacity(self.range);
        for (i, t) in self.tensors.into_iter().enumerate() {
            if t.range != i + 1 {
                return Err(Error::MalformedModel(format!(
                    "tensor {i} is labelled range {}, expected {}",
                    t.range,
                    i + 1
                )));
            }
            if t.shape != [d, d] {
                return Err(Error::MalformedModel(format!(
                    "tensor for range {} has shape {:?}, expected [{d}, {d}]",
                    t.range, t.shape
                )));
            }
            interactions.push(Interaction::from_row_major(d, t.data)?);
        }
        let mut model = InteractionModel::new(alphabet, self.g0, interactions)?;
        model.meta = self.meta;
        Ok(model)
    }
}

pub fn to_json(model: &InteractionModel) -> Result<String> {
    Ok(serde_json::to_string_pretty(&ModelFile::from(model))?)
}

pub fn from_json(text: &str) -> Result<InteractionModel> {
    // Check the version before the schema so old files get a clear message.
    let value: serde_json::Value = serde_json::from_str(text)?;
    let found = value
        .get("format_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| Error::MalformedModel("missing format_version".into()))?;
    if found != u64::from(FORMAT_VERSION) {
        return Err(Error::VersionMismatch {
            found: u32::try_from(found).unwrap_or(u32::MAX),
            expected: FORMAT_VERSION,
        });
    }
    let file: ModelFile = serde_json::from_value(value)?;
    file.into_model()
}

pub fn save(model: &InteractionModel, path: impl AsRef<std::path::Path>) -> Result<()> {
    let mut text = to_json(model)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn load(path: impl AsRef<std::path::Path>) -> Result<InteractionModel> {
    from_json(&std::fs::read_to_string(path)?)
}
