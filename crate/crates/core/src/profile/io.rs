//! Versioned JSON persistence of profiles.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{EndStates, ShockProfile, SolverMeta};
use crate::error::{Error, Result};

pub const PROFILE_FORMAT: &str = "nsplab-profile";
pub const PROFILE_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ProfileDoc {
    format: String,
    version: u32,
    endstates: EndStates,
    meta: SolverMeta,
    anchor_index: usize,
    xi: Vec<f64>,
    vbar: Vec<f64>,
    ubar: Vec<f64>,
    phibar: Vec<f64>,
    ebar: Vec<f64>,
    dvbar: Vec<f64>,
    dphibar: Vec<f64>,
}

impl ShockProfile {
    pub fn to_json(&self) -> Result<String> {
        let doc = ProfileDoc {
            format: PROFILE_FORMAT.into(),
            version: PROFILE_FORMAT_VERSION,
            endstates: self.endstates,
            meta: self.meta.clone(),
            anchor_index: self.anchor_index,
            xi: self.xi_nodes.clone(),
            vbar: self.vbar.clone(),
            ubar: self.ubar.clone(),
            phibar: self.phibar.clone(),
            ebar: self.ebar.clone(),
            dvbar: self.dvbar.clone(),
            dphibar: self.dphibar.clone(),
        };
        Ok(serde_json::to_string(&doc)?)
    }

    /// Parses a document written by [`ShockProfile::to_json`]. `ubar` is
    /// rebuilt from `vbar`; the stored copy is only cross-checked.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ProfileDoc = serde_json::from_str(text)?;
        if doc.format != PROFILE_FORMAT {
            return Err(Error::Format(format!("expected format '{PROFILE_FORMAT}', found '{}'", doc.format)));
        }
        if doc.version != PROFILE_FORMAT_VERSION {
            return Err(Error::Format(format!(
                "profile format version {} is not supported (expected {PROFILE_FORMAT_VERSION})",
                doc.version
            )));
        }
        let profile = ShockProfile::from_states(
            doc.endstates,
            doc.xi,
            doc.vbar,
            doc.phibar,
            doc.ebar,
            doc.dvbar,
            doc.dphibar,
            doc.anchor_index,
            doc.meta,
        )?;
        crate::error::check_len(profile.len(), doc.ubar.len())?;
        if profile.ubar.iter().zip(&doc.ubar).any(|(a, b)| (a - b).abs() > 1e-12) {
            return Err(Error::Format("stored ubar disagrees with the RH reconstruction".into()));
        }
        Ok(profile)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
