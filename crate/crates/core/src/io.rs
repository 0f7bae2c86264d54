//! JSON files for set functions.
//!
//! `{"n": 3, "kind": "table" | "linear" | "symmetric", "values": [...]}`:
//! tables are ordered by mask, linear values are `[c0, c1, ..., cn]` and
//! symmetric values are indexed by cardinality.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{Evaluator, LinearFunction, SetFunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Table,
    Linear,
    Symmetric,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionFile {
    pub n: usize,
    pub kind: Kind,
    pub values: Vec<f64>,
}

impl FunctionFile {
    pub fn from_linear(g: &LinearFunction) -> Self {
        Self {
            n: g.n(),
            kind: Kind::Linear,
            values: std::iter::once(g.c0).chain(g.coeffs.iter().copied()).collect(),
        }
    }

    /// Linear and symmetric functions keep their compact form; anything
    /// else is tabulated.
    pub fn from_function(f: &SetFunction) -> Result<Self> {
        Ok(match f.evaluator() {
            Evaluator::Linear(g) => Self::from_linear(g),
            Evaluator::Symmetric(v) => Self {
                n: f.n(),
                kind: Kind::Symmetric,
                values: v.clone(),
            },
            _ => Self {
                n: f.n(),
                kind: Kind::Table,
                values: f.to_table()?.as_table().expect("tabulated").to_vec(),
            },
        })
    }

    pub fn to_function(&self) -> Result<SetFunction> {
        let expected = match self.kind {
            Kind::Table => {
                if self.n > crate::function::MAX_TABLE_ITEMS {
                    return Err(Error::Format(format!("table files support n <= 24, got {}", self.n)));
                }
                1usize << self.n
            }
            Kind::Linear | Kind::Symmetric => self.n + 1,
        };
        if self.values.len() != expected {
            return Err(Error::Format(format!(
                "{:?} file with n={} needs {expected} values, got {}",
                self.kind,
                self.n,
                self.values.len()
            )));
        }
        if let Some(i) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Format(format!("value {i} is not finite")));
        }
        match self.kind {
            Kind::Table => SetFunction::table(self.n, self.values.clone()),
            Kind::Linear => SetFunction::linear(self.linear().expect("checked kind")),
            Kind::Symmetric => SetFunction::symmetric(self.values.clone()),
        }
    }

    pub fn linear(&self) -> Option<LinearFunction> {
        (self.kind == Kind::Linear && self.values.len() == self.n + 1)
            .then(|| LinearFunction::new(self.values[0], self.values[1..].to_vec()))
    }
}

pub fn parse(text: &str) -> Result<FunctionFile> {
    serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
}

pub fn load(path: &Path) -> Result<SetFunction> {
    parse(&std::fs::read_to_string(path)?)?.to_function()
}

pub fn save(path: &Path, f: &SetFunction) -> Result<()> {
    let text = serde_json::to_string(&FunctionFile::from_function(f)?)?;
    std::fs::write(path, text)?;
    Ok(())
}
