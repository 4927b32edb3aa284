//! JSON model files.
//!
//! ```json
//! {"q_x": [0.5, 0.5],
//!  "enc": [{"type": "bsc", "p": 0.03}],
//!  "dec": [{"type": "bsc", "p": 0.10}, {"type": "matrix", "rows": [[0.9, 0.1], [0.2, 0.8]]}],
//!  "kind": "hidden"}
//! ```
//!
//! Unknown fields are rejected. Validation errors name the offending field
//! (`q_x`, `enc[1].rows`, ...).

use serde::{Deserialize, Serialize};

use super::{make_bsc, Channel, SourceKind, SourceModel};
use crate::error::{Error, Result};
use crate::info_math::ProbVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ChannelSpec {
    Bsc { p: f64 },
    Matrix { rows: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub q_x: Vec<f64>,
    pub enc: Vec<ChannelSpec>,
    pub dec: Vec<ChannelSpec>,
    pub kind: SourceKind,
}

fn field_err(field: String, e: impl std::fmt::Display) -> Error {
    Error::InvalidModel(format!("{field}: {e}"))
}

impl ChannelSpec {
    fn to_channel(&self, field: String) -> Result<Channel> {
        match self {
            ChannelSpec::Bsc { p } => make_bsc(*p).map_err(|e| field_err(format!("{field}.p"), e)),
            ChannelSpec::Matrix { rows } => {
                Channel::from_rows(rows.clone()).map_err(|e| field_err(format!("{field}.rows"), e))
            }
        }
    }

    fn from_channel(ch: &Channel) -> Self {
        match ch.bsc_crossover() {
            Some(p) => ChannelSpec::Bsc { p },
            None => ChannelSpec::Matrix {
                rows: ch.rows().iter().map(|r| r.weights().to_vec()).collect(),
            },
        }
    }
}

impl ModelFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidModel(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model files always serialize")
    }

    pub fn to_model(&self) -> Result<SourceModel> {
        let q_x = ProbVector::new(self.q_x.clone()).map_err(|e| field_err("q_x".into(), e))?;
        let nx = q_x.len();
        let side = |name: &str, specs: &[ChannelSpec]| -> Result<Vec<Channel>> {
            if specs.is_empty() {
                return Err(field_err(name.into(), "at least one measurement is required"));
            }
            specs
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let field = format!("{name}[{i}]");
                    let ch = s.to_channel(field.clone())?;
                    if ch.in_size() != nx {
                        return Err(field_err(
                            field,
                            format!("{} input letters, but q_x has {nx}", ch.in_size()),
                        ));
                    }
                    Ok(ch)
                })
                .collect()
        };
        let enc = side("enc", &self.enc)?;
        let dec = side("dec", &self.dec)?;
        if self.kind == SourceKind::Visible {
            let deterministic = enc.len() == 1
                && enc[0]
                    .rows()
                    .iter()
                    .all(|r| r.weights().iter().all(|&p| p == 0.0 || p == 1.0));
            if !deterministic {
                return Err(field_err(
                    "kind".into(),
                    "a visible model needs one noise-free encoder measurement",
                ));
            }
        }
        SourceModel::new(q_x, enc, dec, self.kind)
    }

    pub fn from_model(m: &SourceModel) -> Self {
        Self {
            q_x: m.q_x().weights().to_vec(),
            enc: m.enc_channels().iter().map(ChannelSpec::from_channel).collect(),
            dec: m.dec_channels().iter().map(ChannelSpec::from_channel).collect(),
            kind: m.kind(),
        }
    }
}

impl SourceModel {
    /// Parses and validates a JSON model file.
    pub fn from_json(text: &str) -> Result<Self> {
        ModelFile::from_json(text)?.to_model()
    }
}
