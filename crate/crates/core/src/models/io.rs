//! JSON model files.
//!
//! ```json
//! {"schema_version": 1, "class": "arum_cs", "K": 2,
//!  "atoms": [{"eps": ["0.5", 0], "S": [0, 1], "w": "0.6"},
//!            {"eps": ["0.5", 0], "S": [1], "w": "0.4"}]}
//! ```
//!
//! Numbers may be JSON numbers or decimal/fraction strings; strings are parsed
//! exactly in rational mode. `"-inf"` (ASCII or U+2212 minus) marks a `-inf`
//! shock and is only legal for `arum_e`. `S` lists 0-based alternatives and is
//! required for `arum_cs` only.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::scalar::Scalar;

use super::{
    ArumCsDistribution, ArumDistribution, ArumEDistribution, ConsiderationAtom, EpsilonAtom, Model, ModelClass,
};

pub const NEG_INF_LITERAL: &str = "-inf";
pub const MODEL_SCHEMA_VERSION: u32 = 1;

fn default_version() -> u32 {
    MODEL_SCHEMA_VERSION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    #[serde(default = "default_version")]
    pub schema_version: u32,
    pub class: ModelClass,
    #[serde(rename = "K")]
    pub k: usize,
    pub atoms: Vec<AtomEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomEntry {
    pub eps: Vec<Value>,
    #[serde(rename = "S", default, skip_serializing_if = "Option::is_none")]
    pub s: Option<Vec<usize>>,
    pub w: Value,
}

pub(crate) fn parse_number<T: Scalar>(v: &Value) -> Result<T> {
    match v {
        // serde_json prints the shortest round-trip form, so "0.6" stays 3/5.
        Value::Number(n) => T::parse(&n.to_string()),
        Value::String(s) => T::parse(s),
        other => Err(Error::Parse(format!("expected a number, got {other}"))),
    }
}

fn parse_extended<T: Scalar>(v: &Value) -> Result<ExtendedReal<T>> {
    match v {
        Value::String(s) if is_neg_inf(s) => Ok(ExtendedReal::NegInfinity),
        other => parse_number(other).map(ExtendedReal::Finite),
    }
}

fn is_neg_inf(s: &str) -> bool {
    matches!(s.trim(), "-inf" | "\u{2212}inf")
}

impl ModelFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if file.schema_version != MODEL_SCHEMA_VERSION {
            return Err(Error::Parse(format!("unsupported model schema_version {}", file.schema_version)));
        }
        Ok(file)
    }

    pub fn to_model<T: Scalar>(&self) -> Result<Model<T>> {
        for (i, a) in self.atoms.iter().enumerate() {
            if a.eps.len() != self.k {
                return Err(Error::Invalid(format!("atom {i} has {} shocks but K = {}", a.eps.len(), self.k)));
            }
            if a.s.is_some() != (self.class == ModelClass::ArumCs) {
                return Err(Error::Invalid(format!(
                    "atom {i}: field S is required for arum_cs and forbidden otherwise"
                )));
            }
        }
        Ok(match self.class {
            ModelClass::Arum | ModelClass::ArumE => {
                let atoms = self
                    .atoms
                    .iter()
                    .map(|a| {
                        Ok(EpsilonAtom::new(
                            a.eps.iter().map(parse_extended).collect::<Result<_>>()?,
                            parse_number(&a.w)?,
                        ))
                    })
                    .collect::<Result<Vec<_>>>()?;
                if self.class == ModelClass::Arum {
                    Model::Arum(ArumDistribution::new(atoms)?)
                } else {
                    Model::ArumE(ArumEDistribution::new(atoms)?)
                }
            }
            ModelClass::ArumCs => Model::ArumCs(ArumCsDistribution::new(
                self.atoms
                    .iter()
                    .map(|a| {
                        Ok(ConsiderationAtom::new(
                            a.eps.iter().map(parse_number).collect::<Result<_>>()?,
                            a.s.clone().unwrap_or_default(),
                            parse_number(&a.w)?,
                        ))
                    })
                    .collect::<Result<Vec<_>>>()?,
            )?),
        })
    }

    pub fn from_model<T: Scalar>(model: &Model<T>) -> Self {
        let eps_entry = |a: &EpsilonAtom<T>| AtomEntry {
            eps: a
                .eps
                .iter()
                .map(|e| match e {
                    ExtendedReal::Finite(x) => Value::String(x.repr()),
                    ExtendedReal::NegInfinity => Value::String(NEG_INF_LITERAL.into()),
                })
                .collect(),
            s: None,
            w: Value::String(a.weight.repr()),
        };
        let (k, atoms) = match model {
            Model::Arum(d) => (d.atoms()[0].eps.len(), d.atoms().iter().map(eps_entry).collect()),
            Model::ArumE(d) => (d.atoms()[0].eps.len(), d.atoms().iter().map(eps_entry).collect()),
            Model::ArumCs(d) => (
                d.atoms()[0].eps.len(),
                d.atoms()
                    .iter()
                    .map(|a| AtomEntry {
                        eps: a.eps.iter().map(|x| Value::String(x.repr())).collect(),
                        s: Some(a.consideration_set.clone()),
                        w: Value::String(a.weight.repr()),
                    })
                    .collect(),
            ),
        };
        ModelFile { schema_version: MODEL_SCHEMA_VERSION, class: model.class(), k, atoms }
    }

    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("model file serialises")
    }
}

impl<T: Scalar> Model<T> {
    pub fn from_json(text: &str) -> Result<Self> {
        ModelFile::from_json(text)?.to_model()
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&ModelFile::from_model(self)).expect("model file serialises")
    }
}
