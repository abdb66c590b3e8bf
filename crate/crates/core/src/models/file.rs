//! JSON model files. The schema is documented in `docs/model-schema.md`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{HvError, Result};
use crate::models::discrete::DiscreteModel;

/// A probability written either as a decimal string (preferred) or a bare number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Prob {
    Text(String),
    Number(f64),
}

impl Prob {
    pub fn decimal(p: f64) -> Self {
        Prob::Text(format!("{p}"))
    }

    pub(crate) fn resolve(&self, table: &str, row: impl ToString) -> Result<f64> {
        let p = match self {
            Prob::Number(p) => *p,
            Prob::Text(s) => s.trim().parse::<f64>().map_err(|_| {
                HvError::validation(
                    table,
                    row.to_string(),
                    format!("`{s}` is not a decimal probability"),
                )
            })?,
        };
        if !p.is_finite() {
            return Err(HvError::validation(
                table,
                row,
                format!("probability {p} is not finite"),
            ));
        }
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UvEntryFile {
    pub u: usize,
    pub v: usize,
    pub p: Prob,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlocalRowFile {
    pub a: usize,
    pub b: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<usize>,
    /// `[w index, probability]` pairs.
    pub w: Vec<(usize, Prob)>,
}

/// Alice's response row: `plus[k]` is `P(X = +1 | a, u_k, w)`. The optional
/// `b` and `v` keys only appear in audit tables that list remote indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XRowFile {
    pub a: usize,
    pub w: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<usize>,
    pub plus: Vec<Prob>,
}

/// Bob's response row: `plus[k]` is `P(Y = +1 | b, v_k, w)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct YRowFile {
    pub b: usize,
    pub w: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<usize>,
    pub plus: Vec<Prob>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub settings_a: Vec<f64>,
    pub settings_b: Vec<f64>,
    pub support_u: Vec<f64>,
    pub support_v: Vec<f64>,
    pub support_w: Vec<f64>,
    pub p_uv: Vec<UvEntryFile>,
    pub p_w_given_abuv: Vec<NonlocalRowFile>,
    pub p_x_given_auw: Vec<XRowFile>,
    pub p_y_given_bvw: Vec<YRowFile>,
}

impl ModelFile {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| HvError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| HvError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }

    /// True when any response row lists a remote setting or remote HV index.
    pub fn has_remote_indices(&self) -> bool {
        self.p_x_given_auw
            .iter()
            .any(|r| r.b.is_some() || r.v.is_some())
            || self
                .p_y_given_bvw
                .iter()
                .any(|r| r.a.is_some() || r.u.is_some())
    }
}

/// Reads and validates a model file.
pub fn load_model(path: impl AsRef<Path>) -> Result<DiscreteModel> {
    let file = ModelFile::read(path.as_ref())?;
    DiscreteModel::from_file(&file)
}

pub fn save_model(model: &DiscreteModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string(&model.to_file()).expect("model file serializes");
    fs::write(path, text + "\n").map_err(|source| HvError::Io {
        path: path.to_path_buf(),
        source,
    })
}
