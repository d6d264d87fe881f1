//! Mirror description files (TOML).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::control::{DriveConfig, PllGains};
use crate::error::{Error, Result};
use crate::params::MirrorParams;

pub const FORMAT: &str = "memsvib-mirror/1";

/// Text of the built-in mirror description.
pub const DEFAULT_MIRROR: &str = include_str!("../default.mirror");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MirrorFile {
    pub format: String,
    pub mirror: MirrorParams,
    #[serde(default)]
    pub drive: DriveConfig,
    #[serde(default)]
    pub pll: PllGains,
}

impl MirrorFile {
    pub fn parse(text: &str) -> Result<Self> {
        let f: MirrorFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if f.format != FORMAT {
            return Err(Error::Config(format!("unsupported format {:?}, expected {FORMAT:?}", f.format)));
        }
        f.drive.validate()?;
        Ok(f)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn builtin() -> Self {
        Self::parse(DEFAULT_MIRROR).expect("built-in mirror file is valid")
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}
