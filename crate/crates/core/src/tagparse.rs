//! Garment-tag parsing: fiber compositions, fabric families, structure types
//! and the attribute consistency checks applied before data is used.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::TagError;
use crate::vocab::{lookup_key, Vocabulary};

/// Allowed deviation of a composition's total from 100, in percentage points.
pub const SUM_TOLERANCE: f64 = 0.5;
pub const MAX_FIBERS: usize = 6;

/// Upper (exclusive) plausibility bounds for the scalar attributes.
pub const MAX_DENSITY_GSM: f64 = 2000.0;
pub const MAX_THICKNESS_MM: f64 = 20.0;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CanonicalFiber(String);

impl CanonicalFiber {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CanonicalFiber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FabricFamily(String);

impl FabricFamily {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for FabricFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StructureType {
    Knit,
    Woven,
    Lining,
    Others,
}

impl StructureType {
    pub const ALL: [StructureType; 4] =
        [StructureType::Knit, StructureType::Woven, StructureType::Lining, StructureType::Others];

    pub fn parse(raw: &str) -> Result<Self, TagError> {
        match lookup_key(raw).as_str() {
            "knit" | "knitted" | "knitwear" => Ok(Self::Knit),
            "woven" | "weave" => Ok(Self::Woven),
            "lining" => Ok(Self::Lining),
            "others" | "other" | "non-woven" | "nonwoven" => Ok(Self::Others),
            _ => Err(TagError::UnknownStructure(raw.trim().to_string())),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Knit => "knit",
            Self::Woven => "woven",
            Self::Lining => "lining",
            Self::Others => "others",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for StructureType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberShare {
    pub fiber: CanonicalFiber,
    pub percent: f64,
}

/// Fiber breakdown of a fabric, sorted by descending percentage with ties
/// broken by fiber name.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct FiberComposition {
    entries: Vec<FiberShare>,
}

impl FiberComposition {
    /// Validates and sorts; fibers must already be canonical.
    pub fn new(entries: Vec<(CanonicalFiber, f64)>) -> Result<Self, TagError> {
        if entries.is_empty() {
            return Err(TagError::EmptyComposition);
        }
        if entries.len() > MAX_FIBERS {
            return Err(TagError::TooManyFibers(entries.len()));
        }
        let mut seen = BTreeSet::new();
        for (fiber, pct) in &entries {
            if !pct.is_finite() || *pct <= 0.0 || *pct > 100.0 {
                return Err(TagError::MalformedPercentage(format!("{pct}")));
            }
            if !seen.insert(fiber.clone()) {
                return Err(TagError::DuplicateFiber(fiber.to_string()));
            }
        }
        let total: f64 = entries.iter().map(|(_, p)| p).sum();
        if (total - 100.0).abs() > SUM_TOLERANCE {
            return Err(TagError::SumViolation(total));
        }
        let mut entries: Vec<FiberShare> =
            entries.into_iter().map(|(fiber, percent)| FiberShare { fiber, percent }).collect();
        entries.sort_by(|a, b| b.percent.total_cmp(&a.percent).then_with(|| a.fiber.cmp(&b.fiber)));
        Ok(Self { entries })
    }

    /// Builds from raw (possibly synonym) fiber names.
    pub fn from_raw(vocab: &Vocabulary, entries: &[(&str, f64)]) -> Result<Self, TagError> {
        let canon = entries
            .iter()
            .map(|(name, pct)| Ok((canonicalize_fiber(vocab, name)?, *pct)))
            .collect::<Result<Vec<_>, TagError>>()?;
        Self::new(canon)
    }

    pub fn entries(&self) -> &[FiberShare] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Highest-percentage fiber (ties resolved by name).
    pub fn primary(&self) -> &CanonicalFiber {
        &self.entries[0].fiber
    }

    pub fn fiber_set(&self) -> BTreeSet<&CanonicalFiber> {
        self.entries.iter().map(|e| &e.fiber).collect()
    }

    pub fn percent_of(&self, fiber: &CanonicalFiber) -> f64 {
        self.entries.iter().find(|e| &e.fiber == fiber).map_or(0.0, |e| e.percent)
    }

    /// Vendor tag form, e.g. `95% Polyester, 5% Elastane`.
    pub fn render(&self) -> String {
        self.entries
            .iter()
            .map(|e| format!("{}% {}", e.percent, e.fiber))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

impl fmt::Display for FiberComposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Headers vendors use to label garment layers, e.g. `Main: ...; Lining: ...`.
pub const LAYER_HEADERS: &[&str] = &[
    "main", "shell", "lining", "upper", "outer", "inner", "body", "trim", "contrast", "filling",
    "padding", "pocket", "sleeves", "insulation", "face", "back",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FabricAttributes {
    pub composition: FiberComposition,
    pub family: FabricFamily,
    pub structure: StructureType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thickness: Option<f64>,
    /// Layer headers seen on the tag; more than one marks a multi-layer garment.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub layer_headers: Vec<String>,
}

impl FabricAttributes {
    pub fn new(composition: FiberComposition, family: FabricFamily, structure: StructureType) -> Self {
        Self { composition, family, structure, density: None, thickness: None, layer_headers: Vec::new() }
    }

    pub fn with_scalars(mut self, density: f64, thickness: f64) -> Self {
        self.density = Some(density);
        self.thickness = Some(thickness);
        self
    }
}

impl<'de> Deserialize<'de> for FiberComposition {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let entries = Vec::<FiberShare>::deserialize(d)?;
        FiberComposition::new(entries.into_iter().map(|e| (e.fiber, e.percent)).collect())
            .map_err(serde::de::Error::custom)
    }
}

pub fn canonicalize_fiber(vocab: &Vocabulary, raw: &str) -> Result<CanonicalFiber, TagError> {
    let trimmed = raw.trim();
    if trimmed.is_empty() {
        return Err(TagError::UnrecognizedFiber(String::new()));
    }
    vocab
        .fiber_index(trimmed)
        .map(|i| CanonicalFiber(vocab.fibers()[i].clone()))
        .ok_or_else(|| TagError::UnrecognizedFiber(trimmed.to_string()))
}

fn is_separator(c: char) -> bool {
    c.is_whitespace() || matches!(c, ',' | ';' | '/' | '&' | '+')
}

fn trim_separators(s: &str) -> &str {
    let s = s.trim_matches(is_separator);
    // A trailing or leading conjunction ("60% Cotton and 40% Wool").
    let s = s.strip_suffix(" and").unwrap_or(s);
    s.strip_prefix("and ").unwrap_or(s).trim_matches(is_separator)
}

/// Parses `<number>% <fiber>` tokens separated by commas or whitespace.
pub fn parse_composition(vocab: &Vocabulary, text: &str) -> Result<FiberComposition, TagError> {
    if text.trim().is_empty() {
        return Err(TagError::EmptyComposition);
    }
    let percents: Vec<usize> = text.match_indices('%').map(|(i, _)| i).collect();
    if percents.is_empty() {
        return Err(TagError::MalformedPercentage(text.trim().to_string()));
    }

    // Each '%' is preceded by a number token; locate where those tokens start.
    let mut number_spans = Vec::with_capacity(percents.len());
    for &p in &percents {
        let before = text[..p].trim_end();
        let start = before
            .char_indices()
            .rev()
            .find(|&(_, c)| is_separator(c) || c == '%')
            .map_or(0, |(i, c)| i + c.len_utf8());
        let token = &before[start..];
        if token.is_empty() {
            return Err(TagError::MalformedPercentage("%".into()));
        }
        number_spans.push((start, token, p + 1));
    }

    if !trim_separators(&text[..number_spans[0].0]).is_empty() {
        return Err(TagError::MalformedPercentage(text[..number_spans[0].0].trim().to_string()));
    }

    let mut entries = Vec::with_capacity(number_spans.len());
    for (k, &(_, token, name_start)) in number_spans.iter().enumerate() {
        let pct: f64 = token.parse().map_err(|_| TagError::MalformedPercentage(token.to_string()))?;
        if !pct.is_finite() || pct <= 0.0 || pct > 100.0 {
            return Err(TagError::MalformedPercentage(token.to_string()));
        }
        let name_end = number_spans.get(k + 1).map_or(text.len(), |next| next.0);
        let name = trim_separators(&text[name_start..name_end]);
        if name.is_empty() {
            return Err(TagError::MissingFiberName(token.to_string()));
        }
        entries.push((canonicalize_fiber(vocab, name)?, pct));
    }
    FiberComposition::new(entries)
}

/// A tag composition split by layer header.
#[derive(Debug, Clone, PartialEq)]
pub struct LayeredComposition {
    pub headers: Vec<String>,
    /// Composition under the first (primary) header.
    pub primary: FiberComposition,
}

/// Parses tags such as `Main: 100% Cotton; Lining: 100% Polyester`.
/// Text without headers is treated as a single unlabeled layer.
pub fn parse_tag(vocab: &Vocabulary, text: &str) -> Result<LayeredComposition, TagError> {
    let mut sections: Vec<(String, String)> = Vec::new();
    let mut rest = text;
    let mut current: Option<String> = None;
    let mut buf = String::new();
    while !rest.is_empty() {
        if let Some(colon) = rest.find(':') {
            let head = &rest[..colon];
            let header_start = head
                .char_indices()
                .rev()
                .find(|&(_, c)| !c.is_alphabetic())
                .map_or(0, |(i, c)| i + c.len_utf8());
            let candidate = lookup_key(&head[header_start..]);
            if LAYER_HEADERS.contains(&candidate.as_str()) {
                buf.push_str(&head[..header_start]);
                if current.is_some() || !buf.trim_matches(is_separator).is_empty() {
                    sections.push((current.take().unwrap_or_default(), std::mem::take(&mut buf)));
                }
                buf.clear();
                current = Some(candidate);
                rest = &rest[colon + 1..];
                continue;
            }
            buf.push_str(&rest[..=colon]);
            rest = &rest[colon + 1..];
        } else {
            buf.push_str(rest);
            rest = "";
        }
    }
    if current.is_some() || !buf.trim_matches(is_separator).is_empty() {
        sections.push((current.unwrap_or_default(), buf));
    }
    let (first_header, first_text) = sections.first().ok_or(TagError::EmptyComposition)?;
    let primary = parse_composition(vocab, first_text)?;
    let headers = if sections.len() == 1 && first_header.is_empty() {
        Vec::new()
    } else {
        sections.iter().map(|(h, _)| h.clone()).collect()
    };
    Ok(LayeredComposition { headers, primary })
}

const FAMILY_SUFFIXES: &[&str] =
    &["-like weave", " like weave", "-like", " like", "-style", " style", " weave", " fabric", " knit fabric"];

/// Maps a free-form family descriptor onto the canonical family list.
pub fn normalize_family(vocab: &Vocabulary, raw: &str) -> Result<FabricFamily, TagError> {
    let key = lookup_key(raw);
    if key.is_empty() {
        return Err(TagError::UnknownFamily(String::new()));
    }
    let canonical = |i: usize| FabricFamily(vocab.families()[i].clone());
    if let Some(i) = vocab.family_index(&key) {
        return Ok(canonical(i));
    }
    let mut stem = key.as_str();
    loop {
        let before = stem;
        for suffix in FAMILY_SUFFIXES {
            if let Some(s) = stem.strip_suffix(suffix) {
                stem = s.trim();
                if let Some(i) = vocab.family_index(stem) {
                    return Ok(canonical(i));
                }
            }
        }
        if stem == before {
            break;
        }
    }
    Err(TagError::UnknownFamily(raw.trim().to_string()))
}

/// As [`normalize_family`], but unknown descriptors map to the `unknown`
/// family when the vocabulary has one.
pub fn normalize_family_or_unknown(vocab: &Vocabulary, raw: &str) -> Result<FabricFamily, TagError> {
    match normalize_family(vocab, raw) {
        Err(TagError::UnknownFamily(_)) if vocab.canonical_family_position("unknown").is_some() => {
            Ok(FabricFamily("unknown".into()))
        }
        other => other,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    FamilyStructureContradiction { family: String, structure: StructureType },
    MultiLayer { headers: Vec<String> },
    DensityOutOfRange { value: f64 },
    ThicknessOutOfRange { value: f64 },
    UnknownFamily { family: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::FamilyStructureContradiction { family, structure } => {
                write!(f, "family/structure contradiction ({structure} {family})")
            }
            Self::MultiLayer { headers } => write!(f, "multi-layer ({})", headers.join("+")),
            Self::DensityOutOfRange { value } => {
                write!(f, "density > 0 and < {MAX_DENSITY_GSM} (got {value})")
            }
            Self::ThicknessOutOfRange { value } => {
                write!(f, "thickness > 0 and < {MAX_THICKNESS_MM} (got {value})")
            }
            Self::UnknownFamily { family } => write!(f, "family `{family}` not in vocabulary"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_attributes(vocab: &Vocabulary, attrs: &FabricAttributes) -> ValidationReport {
    let mut violations = Vec::new();
    let family = attrs.family.as_str();
    if vocab.canonical_family_position(family).is_none() {
        violations.push(Violation::UnknownFamily { family: family.to_string() });
    }
    if let Some(allowed) = vocab.allowed_structures(family) {
        if !allowed.contains(&attrs.structure) {
            violations.push(Violation::FamilyStructureContradiction {
                family: family.to_string(),
                structure: attrs.structure,
            });
        }
    }
    if attrs.layer_headers.len() > 1 {
        violations.push(Violation::MultiLayer { headers: attrs.layer_headers.clone() });
    }
    if let Some(d) = attrs.density {
        if !(d > 0.0 && d < MAX_DENSITY_GSM) {
            violations.push(Violation::DensityOutOfRange { value: d });
        }
    }
    if let Some(t) = attrs.thickness {
        if !(t > 0.0 && t < MAX_THICKNESS_MM) {
            violations.push(Violation::ThicknessOutOfRange { value: t });
        }
    }
    ValidationReport { violations }
}

/// Parses a complete tag: composition text (possibly layered), family and
/// structure descriptors.
pub fn parse_attributes(
    vocab: &Vocabulary,
    composition: &str,
    family: &str,
    structure: &str,
) -> Result<FabricAttributes, TagError> {
    let layered = parse_tag(vocab, composition)?;
    let mut attrs = FabricAttributes::new(
        layered.primary,
        normalize_family(vocab, family)?,
        StructureType::parse(structure)?,
    );
    attrs.layer_headers = layered.headers;
    Ok(attrs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab() -> Vocabulary {
        Vocabulary::builtin()
    }

    fn pairs(c: &FiberComposition) -> Vec<(String, f64)> {
        c.entries().iter().map(|e| (e.fiber.to_string(), e.percent)).collect()
    }

    #[test]
    fn vendor_format_parses() {
        let c = parse_composition(&vocab(), "95% Polyester, 5% Elastane").unwrap();
        assert_eq!(pairs(&c), vec![("Polyester".into(), 95.0), ("Elastane".into(), 5.0)]);
        let c = parse_composition(&vocab(), "100% Cotton").unwrap();
        assert_eq!(pairs(&c), vec![("Cotton".into(), 100.0)]);
    }

    #[test]
    fn cork_is_not_in_vocabulary() {
        assert_eq!(
            parse_composition(&vocab(), "70% Cork 30% Cotton"),
            Err(TagError::UnrecognizedFiber("Cork".into()))
        );
    }

    #[test]
    fn spacing_decimals_and_order() {
        let c = parse_composition(&vocab(), "5 % spandex 62.5% cotton,32.5 %Polyester").unwrap();
        assert_eq!(
            pairs(&c),
            vec![("Cotton".into(), 62.5), ("Polyester".into(), 32.5), ("Elastane".into(), 5.0)]
        );
        let c = parse_composition(&vocab(), "60% Cotton and 40% Wool").unwrap();
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn ties_break_by_name() {
        let c = parse_composition(&vocab(), "50% Wool, 50% Cotton").unwrap();
        assert_eq!(c.primary().as_str(), "Cotton");
    }

    #[test]
    fn thirds_within_tolerance() {
        assert!(parse_composition(&vocab(), "33.3% Cotton 33.3% Wool 33.3% Silk").is_ok());
        assert!(matches!(
            parse_composition(&vocab(), "33% Cotton 33% Wool 33% Silk"),
            Err(TagError::SumViolation(_))
        ));
    }

    #[test]
    fn malformed_percentages() {
        let v = vocab();
        for bad in ["-5% Cotton, 105% Wool", "0% Cotton 100% Wool", "abc% Cotton", "Cotton", "% Cotton"] {
            assert!(
                matches!(parse_composition(&v, bad), Err(TagError::MalformedPercentage(_))),
                "{bad}"
            );
        }
        assert!(matches!(parse_composition(&v, "Fabric 100% Cotton"), Err(TagError::MalformedPercentage(_))));
        assert!(matches!(parse_composition(&v, "100%"), Err(TagError::MissingFiberName(_))));
        assert!(matches!(parse_composition(&v, "  "), Err(TagError::EmptyComposition)));
    }

    #[test]
    fn duplicate_after_canonicalization() {
        assert_eq!(
            parse_composition(&vocab(), "90% Cotton, 5% Spandex, 5% Lycra"),
            Err(TagError::DuplicateFiber("Elastane".into()))
        );
    }

    #[test]
    fn too_many_fibers() {
        let text = "20% Cotton 20% Wool 20% Silk 10% Linen 10% Hemp 10% Jute 10% Modal";
        assert_eq!(parse_composition(&vocab(), text), Err(TagError::TooManyFibers(7)));
    }

    #[test]
    fn canonicalization() {
        let v = vocab();
        assert_eq!(canonicalize_fiber(&v, "Spandex").unwrap().as_str(), "Elastane");
        assert_eq!(canonicalize_fiber(&v, "cotton").unwrap().as_str(), "Cotton");
        assert_eq!(canonicalize_fiber(&v, "Lycra Elastane").unwrap().as_str(), "Elastane");
        assert_eq!(canonicalize_fiber(&v, "  PE (Polyethylene) ").unwrap().as_str(), "Polyethylene");
        assert!(matches!(canonicalize_fiber(&v, "   "), Err(TagError::UnrecognizedFiber(_))));
    }

    #[test]
    fn family_variants() {
        let v = vocab();
        let norm = |s: &str| normalize_family(&v, s).unwrap().to_string();
        assert_eq!(norm("satin-style"), "satin");
        assert_eq!(norm("sateen"), "satin");
        assert_eq!(norm("ribbed knit"), "rib knit");
        assert_eq!(norm("satin"), "satin");
        assert_eq!(norm("denim-like weave"), "denim");
        assert_eq!(norm("mesh lace"), "mesh");
        assert_eq!(norm("Crepe / CDC"), "crepe");
        assert!(matches!(normalize_family(&v, "moon rock"), Err(TagError::UnknownFamily(_))));
        assert_eq!(normalize_family_or_unknown(&v, "moon rock").unwrap().as_str(), "unknown");
    }

    #[test]
    fn structure_parsing() {
        assert_eq!(StructureType::parse("Knit").unwrap(), StructureType::Knit);
        assert_eq!(StructureType::parse(" woven ").unwrap(), StructureType::Woven);
        assert_eq!(StructureType::parse("other").unwrap(), StructureType::Others);
        assert!(StructureType::parse("felted").is_err());
    }

    fn attrs(family: &str, structure: StructureType) -> FabricAttributes {
        let v = vocab();
        FabricAttributes::new(
            parse_composition(&v, "100% Cotton").unwrap(),
            normalize_family(&v, family).unwrap(),
            structure,
        )
    }

    #[test]
    fn contradiction_check() {
        let v = vocab();
        let report = validate_attributes(&v, &attrs("jersey", StructureType::Woven));
        assert_eq!(report.violations.len(), 1);
        assert!(report.violations[0].to_string().starts_with("family/structure contradiction"));
        assert!(validate_attributes(&v, &attrs("denim", StructureType::Woven)).is_clean());
        assert!(validate_attributes(&v, &attrs("lace", StructureType::Others)).is_clean());
    }

    #[test]
    fn multilayer_tag_is_flagged() {
        let v = vocab();
        let a = parse_attributes(&v, "Main: 100% Cotton; Lining: 100% Polyester", "poplin", "woven").unwrap();
        assert_eq!(a.layer_headers, vec!["main".to_string(), "lining".to_string()]);
        assert_eq!(a.composition.primary().as_str(), "Cotton");
        let report = validate_attributes(&v, &a);
        assert!(matches!(report.violations.as_slice(), [Violation::MultiLayer { .. }]));
        assert!(report.violations[0].to_string().starts_with("multi-layer"));

        let single = parse_attributes(&v, "Main: 95% Polyester, 5% Elastane", "jersey", "knit").unwrap();
        assert_eq!(single.layer_headers, vec!["main".to_string()]);
        assert!(validate_attributes(&v, &single).is_clean());

        let plain = parse_tag(&v, "100% Cotton").unwrap();
        assert!(plain.headers.is_empty());
    }

    #[test]
    fn scalar_ranges() {
        let v = vocab();
        let a = attrs("denim", StructureType::Woven).with_scalars(300.0, -1.0);
        let report = validate_attributes(&v, &a);
        assert_eq!(report.violations, vec![Violation::ThicknessOutOfRange { value: -1.0 }]);
        assert!(report.violations[0].to_string().starts_with("thickness > 0"));
        let a = attrs("denim", StructureType::Woven).with_scalars(2000.0, 1.0);
        assert_eq!(validate_attributes(&v, &a).violations.len(), 1);
    }

    #[test]
    fn validation_does_not_mutate() {
        let v = vocab();
        let a = attrs("jersey", StructureType::Woven).with_scalars(0.0, 50.0);
        let before = a.clone();
        let _ = validate_attributes(&v, &a);
        assert_eq!(a, before);
    }

    #[test]
    fn render_uses_shortest_float_form() {
        let c = parse_composition(&vocab(), "62.5% Cotton, 37.5% Wool").unwrap();
        assert_eq!(c.render(), "62.5% Cotton, 37.5% Wool");
        let c = parse_composition(&vocab(), "100% Cotton").unwrap();
        assert_eq!(c.render(), "100% Cotton");
    }

    #[test]
    fn composition_json_validates() {
        let c: FiberComposition =
            serde_json::from_str(r#"[{"fiber":"Cotton","percent":40},{"fiber":"Wool","percent":60}]"#).unwrap();
        assert_eq!(c.primary().as_str(), "Wool");
        assert!(serde_json::from_str::<FiberComposition>(r#"[{"fiber":"Cotton","percent":40}]"#).is_err());
    }
}
