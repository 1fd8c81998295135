//! JSON document format for complexes (`specschema-1`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCHEMA: &str = "specschema-1";

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ComplexSpec {
    #[serde(default = "default_schema")]
    pub schema: String,
    pub dimension: usize,
    pub vertices: Vec<String>,
    #[serde(default)]
    pub edges: Vec<EdgeSpec>,
    #[serde(default)]
    pub faces: Vec<FaceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<GroupSpec>,
}

fn default_schema() -> String {
    SCHEMA.to_string()
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub id: String,
    pub ends: [String; 2],
    pub length: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FaceSpec {
    pub id: String,
    /// Boundary cycle.
    pub vertices: Vec<String>,
    /// Planar coordinates of `vertices`, in the same order.
    pub chart: Vec<[f64; 2]>,
    /// Optional boundary edge ids; checked against the cycle when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(default)]
    pub gluing: Vec<GlueSpec>,
}

/// Cell `from` in copy g is identified with cell `to` in copy g·s, where s is
/// the signed generator letter `generator` (1-based; negative = inverse).
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GlueSpec {
    pub from: String,
    pub generator: i32,
    pub to: String,
}

impl ComplexSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ComplexSpec = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if spec.schema != SCHEMA {
            return Err(Error::Parse(format!("unsupported schema `{}`", spec.schema)));
        }
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }
}
