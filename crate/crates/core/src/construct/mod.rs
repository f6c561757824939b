//! End-to-end constructions and their serializable artifacts.

mod prescribed;
mod transfer;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::Report;

pub use prescribed::{construct_prescribed, verify_prescribed, PrescribedArtifact};
pub use transfer::{construct_transfer, verify_transfer, TransferArtifact, TransferOptions};

pub const ARTIFACT_VERSION: u32 = 1;

/// Either kind of construction result, tagged by `"kind"` in JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Artifact {
    Prescribed(PrescribedArtifact),
    Transfer(TransferArtifact),
}

impl Artifact {
    pub fn verify(&self) -> Report {
        match self {
            Artifact::Prescribed(a) => verify_prescribed(a),
            Artifact::Transfer(t) => verify_transfer(t),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let a: Artifact = serde_json::from_str(text)?;
        let version = match &a {
            Artifact::Prescribed(p) => p.version,
            Artifact::Transfer(t) => t.version,
        };
        if version != ARTIFACT_VERSION {
            return Err(Error::InvalidArgument(format!(
                "unsupported artifact version {version}"
            )));
        }
        Ok(a)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }
}
