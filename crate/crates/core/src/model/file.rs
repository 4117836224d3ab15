//! TOML model files.
//!
//! ```toml
//! kind = "jackson"
//! lambda1 = 0.1
//! lambda2 = 0.1
//! sigma1 = 0.4
//! sigma2 = 0.4
//! q1 = 0.5
//! q2 = 0.5
//! ```
//!
//! or a general walk with one table per region, keyed by `"dx,dy"`:
//!
//! ```toml
//! kind = "general"
//! [origin]
//! "0,0" = 0.8
//! "1,0" = 0.1
//! "0,1" = 0.1
//! [face1]
//! # ...
//! [face2]
//! [interior]
//! ```
//!
//! Unknown keys are rejected.

use std::collections::BTreeMap;

use serde::Deserialize;

use super::{jackson_spec, JacksonParams, Offset, RandomWalkSpec, Region, TransitionLaw};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum ModelFile {
    Jackson(JacksonParams),
    General(RandomWalkSpec),
}

impl ModelFile {
    pub fn spec(&self) -> RandomWalkSpec {
        match self {
            ModelFile::Jackson(p) => jackson_spec(p),
            ModelFile::General(s) => s.clone(),
        }
    }

    pub fn jackson(&self) -> Option<&JacksonParams> {
        match self {
            ModelFile::Jackson(p) => Some(p),
            ModelFile::General(_) => None,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JacksonFile {
    #[allow(dead_code)]
    kind: String,
    lambda1: f64,
    lambda2: f64,
    sigma1: f64,
    sigma2: f64,
    q1: f64,
    q2: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneralFile {
    #[allow(dead_code)]
    kind: String,
    origin: BTreeMap<String, f64>,
    face1: BTreeMap<String, f64>,
    face2: BTreeMap<String, f64>,
    interior: BTreeMap<String, f64>,
}

fn parse_offset(key: &str) -> Result<Offset> {
    let (a, b) = key
        .split_once(',')
        .ok_or_else(|| Error::Parse(format!("offset key {key:?} is not of the form \"dx,dy\"")))?;
    let num = |s: &str| {
        s.trim()
            .parse::<i8>()
            .map_err(|_| Error::Parse(format!("offset key {key:?} has a non-integer component")))
    };
    Offset::new(num(a)?, num(b)?).map_err(|e| Error::Parse(e.to_string()))
}

fn law(region: Region, table: &BTreeMap<String, f64>) -> Result<TransitionLaw> {
    let pairs = table
        .iter()
        .map(|(k, &p)| parse_offset(k).map(|o| (o, p)))
        .collect::<Result<Vec<_>>>()?;
    TransitionLaw::new(region, pairs).map_err(|e| Error::Parse(e.to_string()))
}

/// Parses a model file. Syntax errors carry the TOML line/column.
pub fn parse_model(text: &str) -> Result<ModelFile> {
    let table: toml::Table = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let kind = table
        .get("kind")
        .and_then(|v| v.as_str())
        .ok_or_else(|| Error::Parse("missing string key `kind` (\"jackson\" or \"general\")".into()))?;
    match kind {
        "jackson" => {
            let f: JacksonFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
            let p = JacksonParams::new(f.lambda1, f.lambda2, f.sigma1, f.sigma2, f.q1, f.q2)?;
            Ok(ModelFile::Jackson(p))
        }
        "general" => {
            let f: GeneralFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
            let spec = RandomWalkSpec::new(
                law(Region::Origin, &f.origin)?,
                law(Region::Face1, &f.face1)?,
                law(Region::Face2, &f.face2)?,
                law(Region::Interior, &f.interior)?,
            )?;
            Ok(ModelFile::General(spec))
        }
        other => Err(Error::Parse(format!("unknown kind {other:?}; expected \"jackson\" or \"general\""))),
    }
}
