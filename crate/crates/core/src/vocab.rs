//! Controlled vocabularies: canonical fibers, fabric families, their synonym
//! tables and the family/structure compatibility table.
//!
//! The tables are plain UTF-8 line files (`canonical<TAB>synonym`). The
//! builtin copies are compiled in; [`Vocabulary::from_dir`] loads edited
//! copies from disk so vocabularies can grow without a rebuild.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::VocabError;
use crate::tagparse::StructureType;

const FIBERS: &str = include_str!("../data/fibers.txt");
const FIBER_SYNONYMS: &str = include_str!("../data/fiber_synonyms.tsv");
const FAMILIES: &str = include_str!("../data/families.txt");
const FAMILY_VARIANTS: &str = include_str!("../data/family_variants.tsv");
const FAMILY_STRUCTURES: &str = include_str!("../data/family_structures.tsv");

pub const FIBERS_FILE: &str = "fibers.txt";
pub const FIBER_SYNONYMS_FILE: &str = "fiber_synonyms.tsv";
pub const FAMILIES_FILE: &str = "families.txt";
pub const FAMILY_VARIANTS_FILE: &str = "family_variants.tsv";
pub const FAMILY_STRUCTURES_FILE: &str = "family_structures.tsv";

/// Lookup key: lowercase, trademark glyphs dropped, whitespace collapsed.
pub fn lookup_key(raw: &str) -> String {
    let cleaned: String = raw
        .chars()
        .filter(|c| !matches!(c, '™' | '®' | '©'))
        .collect::<String>()
        .replace("\\texttrademark", "");
    cleaned
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    fibers: Vec<String>,
    fiber_lookup: BTreeMap<String, usize>,
    families: Vec<String>,
    family_lookup: BTreeMap<String, usize>,
    /// Families restricted to a subset of structure types.
    allowed_structures: BTreeMap<String, BTreeSet<StructureType>>,
    fingerprint: String,
}

struct Sources<'a> {
    fibers: &'a str,
    fiber_synonyms: &'a str,
    families: &'a str,
    family_variants: &'a str,
    family_structures: &'a str,
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
}

fn pairs<'a>(file: &'static str, text: &'a str) -> Result<Vec<(&'a str, &'a str)>, VocabError> {
    data_lines(text)
        .map(|(line, l)| {
            let mut parts = l.splitn(2, '\t');
            match (parts.next(), parts.next()) {
                (Some(a), Some(b)) if !a.trim().is_empty() && !b.trim().is_empty() => {
                    Ok((a.trim(), b.trim()))
                }
                _ => Err(VocabError::Malformed {
                    file,
                    line,
                    reason: "expected `canonical<TAB>value`".into(),
                }),
            }
        })
        .collect()
}

impl Vocabulary {
    pub fn builtin() -> Self {
        Self::from_sources(&Sources {
            fibers: FIBERS,
            fiber_synonyms: FIBER_SYNONYMS,
            families: FAMILIES,
            family_variants: FAMILY_VARIANTS,
            family_structures: FAMILY_STRUCTURES,
        })
        .expect("builtin vocabulary tables are well formed")
    }

    /// Loads the five table files from `dir`, falling back to the builtin
    /// copy for any file that is absent.
    pub fn from_dir(dir: &Path) -> Result<Self, VocabError> {
        let read = |name: &str, fallback: &'static str| -> Result<String, VocabError> {
            let path = dir.join(name);
            if path.exists() {
                fs::read_to_string(&path).map_err(|source| VocabError::Io {
                    path: path.display().to_string(),
                    source,
                })
            } else {
                Ok(fallback.to_string())
            }
        };
        let fibers = read(FIBERS_FILE, FIBERS)?;
        let fiber_synonyms = read(FIBER_SYNONYMS_FILE, FIBER_SYNONYMS)?;
        let families = read(FAMILIES_FILE, FAMILIES)?;
        let family_variants = read(FAMILY_VARIANTS_FILE, FAMILY_VARIANTS)?;
        let family_structures = read(FAMILY_STRUCTURES_FILE, FAMILY_STRUCTURES)?;
        Self::from_sources(&Sources {
            fibers: &fibers,
            fiber_synonyms: &fiber_synonyms,
            families: &families,
            family_variants: &family_variants,
            family_structures: &family_structures,
        })
    }

    fn from_sources(src: &Sources<'_>) -> Result<Self, VocabError> {
        let fibers: Vec<String> = data_lines(src.fibers).map(|(_, l)| l.trim().to_string()).collect();
        let mut fiber_lookup = BTreeMap::new();
        for (i, f) in fibers.iter().enumerate() {
            if fiber_lookup.insert(lookup_key(f), i).is_some() {
                return Err(VocabError::Duplicate { file: FIBERS_FILE, value: f.clone() });
            }
        }
        for (canonical, synonym) in pairs(FIBER_SYNONYMS_FILE, src.fiber_synonyms)? {
            let idx = *fiber_lookup.get(&lookup_key(canonical)).ok_or_else(|| {
                VocabError::UnknownCanonical { file: FIBER_SYNONYMS_FILE, value: canonical.into() }
            })?;
            let key = lookup_key(synonym);
            match fiber_lookup.get(&key) {
                Some(&existing) if existing != idx => {
                    return Err(VocabError::Duplicate { file: FIBER_SYNONYMS_FILE, value: synonym.into() })
                }
                _ => {
                    fiber_lookup.insert(key, idx);
                }
            }
        }

        let families: Vec<String> =
            data_lines(src.families).map(|(_, l)| lookup_key(l)).collect();
        let mut family_lookup = BTreeMap::new();
        for (i, f) in families.iter().enumerate() {
            if family_lookup.insert(f.clone(), i).is_some() {
                return Err(VocabError::Duplicate { file: FAMILIES_FILE, value: f.clone() });
            }
        }
        for (canonical, variant) in pairs(FAMILY_VARIANTS_FILE, src.family_variants)? {
            let idx = *family_lookup.get(&lookup_key(canonical)).ok_or_else(|| {
                VocabError::UnknownCanonical { file: FAMILY_VARIANTS_FILE, value: canonical.into() }
            })?;
            let key = lookup_key(variant);
            match family_lookup.get(&key) {
                Some(&existing) if existing != idx => {
                    return Err(VocabError::Duplicate { file: FAMILY_VARIANTS_FILE, value: variant.into() })
                }
                _ => {
                    family_lookup.insert(key, idx);
                }
            }
        }

        let mut allowed_structures = BTreeMap::new();
        for (family, structures) in pairs(FAMILY_STRUCTURES_FILE, src.family_structures)? {
            let idx = *family_lookup.get(&lookup_key(family)).ok_or_else(|| {
                VocabError::UnknownCanonical { file: FAMILY_STRUCTURES_FILE, value: family.into() }
            })?;
            let set = structures
                .split(',')
                .map(|s| {
                    StructureType::parse(s).map_err(|_| VocabError::Malformed {
                        file: FAMILY_STRUCTURES_FILE,
                        line: 0,
                        reason: format!("unknown structure `{}`", s.trim()),
                    })
                })
                .collect::<Result<BTreeSet<_>, _>>()?;
            allowed_structures.insert(families[idx].clone(), set);
        }

        let mut hasher = Sha256::new();
        for part in [
            src.fibers,
            src.fiber_synonyms,
            src.families,
            src.family_variants,
            src.family_structures,
        ] {
            // Hash the parsed content so comments and blank lines do not matter.
            for (_, l) in data_lines(part) {
                hasher.update(l.trim().as_bytes());
                hasher.update(b"\n");
            }
            hasher.update([0u8]);
        }
        let fingerprint = hex(&hasher.finalize());

        Ok(Self { fibers, fiber_lookup, families, family_lookup, allowed_structures, fingerprint })
    }

    pub fn fibers(&self) -> &[String] {
        &self.fibers
    }

    pub fn families(&self) -> &[String] {
        &self.families
    }

    /// Index of the canonical fiber matching `raw` directly or by synonym.
    pub fn fiber_index(&self, raw: &str) -> Option<usize> {
        self.fiber_lookup.get(&lookup_key(raw)).copied()
    }

    pub fn family_index(&self, raw: &str) -> Option<usize> {
        self.family_lookup.get(&lookup_key(raw)).copied()
    }

    /// Canonical-only family position (variants are not consulted).
    pub fn canonical_family_position(&self, canonical: &str) -> Option<usize> {
        self.families.iter().position(|f| f == canonical)
    }

    pub fn canonical_fiber_position(&self, canonical: &str) -> Option<usize> {
        self.fibers.iter().position(|f| f == canonical)
    }

    /// Structure types a family admits; `None` means unrestricted.
    pub fn allowed_structures(&self, family: &str) -> Option<&BTreeSet<StructureType>> {
        self.allowed_structures.get(family)
    }

    /// SHA-256 over the parsed table contents.
    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }
}

impl Default for Vocabulary {
    fn default() -> Self {
        Self::builtin()
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
