//! JSON documents exchanged by the commands.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use tagphys::physmap::{PhysicsParams, Provenance, FIELD_COUNT, FIELD_NAMES};
use tagphys::tagparse::{
    normalize_family, parse_tag, validate_attributes, FabricAttributes, FiberComposition, StructureType,
};
use tagphys::Vocabulary;

use crate::error::CliError;

const ATTRIBUTE_KEYS: &[&str] = &["id", "composition", "family", "structure", "density_gsm", "thickness_mm"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberShareDoc {
    pub fiber: String,
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CompositionDoc {
    Entries(Vec<FiberShareDoc>),
    Text(String),
}

/// One garment's predicted fabric attributes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub composition: CompositionDoc,
    pub family: String,
    pub structure: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density_gsm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thickness_mm: Option<f64>,
}

impl AttributeDocument {
    pub fn to_attributes(&self, vocab: &Vocabulary) -> Result<FabricAttributes, CliError> {
        let (composition, headers) = match &self.composition {
            CompositionDoc::Entries(e) => {
                let parts: Vec<(&str, f64)> = e.iter().map(|s| (s.fiber.as_str(), s.percent)).collect();
                (FiberComposition::from_raw(vocab, &parts)?, Vec::new())
            }
            CompositionDoc::Text(t) => {
                let layered = parse_tag(vocab, t)?;
                (layered.primary, layered.headers)
            }
        };
        let mut attrs =
            FabricAttributes::new(composition, normalize_family(vocab, &self.family)?, StructureType::parse(&self.structure)?);
        attrs.layer_headers = headers;
        attrs.density = self.density_gsm;
        attrs.thickness = self.thickness_mm;
        let report = validate_attributes(vocab, &attrs);
        if !report.is_clean() {
            let msgs: Vec<String> = report.violations.iter().map(ToString::to_string).collect();
            return Err(CliError::Domain(msgs.join("; ")));
        }
        Ok(attrs)
    }
}

/// One object or an array of objects.
fn items(value: Value) -> Vec<Value> {
    match value {
        Value::Array(v) => v,
        other => vec![other],
    }
}

pub fn parse_json_value(label: &str, text: &str) -> Result<Value, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Domain(format!("{label}: malformed JSON: {e}")))
}

/// Parses attribute documents; with `strict`, unknown keys are rejected.
/// Returns whether the input was a single object.
pub fn parse_attribute_docs(label: &str, text: &str, strict: bool) -> Result<(Vec<AttributeDocument>, bool), CliError> {
    let value = parse_json_value(label, text)?;
    let single = !value.is_array();
    let mut docs = Vec::new();
    for (i, mut item) in items(value).into_iter().enumerate() {
        let Value::Object(map) = &mut item else {
            return Err(CliError::Domain(format!("{label}: item {i} is not an object")));
        };
        if let Some(k) = map.keys().find(|k| !ATTRIBUTE_KEYS.contains(&k.as_str())) {
            if strict {
                return Err(CliError::Domain(format!("{label}: item {i}: unknown key `{k}`")));
            }
        }
        map.retain(|k, _| ATTRIBUTE_KEYS.contains(&k.as_str()));
        let doc: AttributeDocument =
            serde_json::from_value(item).map_err(|e| CliError::Domain(format!("{label}: item {i}: {e}")))?;
        docs.push(doc);
    }
    Ok((docs, single))
}

/// Physics output with the tag fields, every parameter, and provenance.
#[derive(Debug, Clone, Serialize)]
pub struct PhysicsDocument {
    pub id: String,
    pub composition: String,
    pub family: String,
    pub structure: String,
    #[serde(flatten)]
    pub physics: PhysicsParams,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Serialize)]
pub struct BaselineProvenance {
    pub kind: &'static str,
    pub seed: u64,
    pub bounds_source: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct BaselineDocument {
    pub id: String,
    #[serde(flatten)]
    pub physics: PhysicsParams,
    pub provenance: BaselineProvenance,
}

/// Reads parameter sets from any document carrying the parameter field
/// names (other keys are ignored).
pub fn parse_physics_docs(label: &str, text: &str) -> Result<Vec<(Option<String>, PhysicsParams)>, CliError> {
    let value = parse_json_value(label, text)?;
    items(value)
        .into_iter()
        .enumerate()
        .map(|(i, item)| {
            let id = item.get("id").and_then(Value::as_str).map(str::to_string);
            let mut v = [0.0; FIELD_COUNT];
            for (k, name) in FIELD_NAMES.iter().enumerate() {
                v[k] = item
                    .get(*name)
                    .and_then(Value::as_f64)
                    .ok_or_else(|| CliError::Domain(format!("{label}: item {i}: missing numeric `{name}`")))?;
            }
            let p = PhysicsParams::from_array(&v);
            p.validate().map_err(|e| CliError::Domain(format!("{label}: item {i}: {e}")))?;
            Ok((id, p))
        })
        .collect()
}
