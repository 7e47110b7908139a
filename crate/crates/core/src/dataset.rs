//! Tag-to-physics records: ingestion from CSV/JSON, feature vectors, and
//! deterministic stratified splitting.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{DatasetError, RowDiagnostic};
use crate::physmap::{PhysicsParams, FIELD_COUNT, FIELD_NAMES};
use crate::tagparse::{
    normalize_family, parse_attributes, validate_attributes, FabricAttributes, FiberComposition,
    StructureType,
};
use crate::vocab::Vocabulary;

/// Non-physics columns, in schema order.
pub const ATTRIBUTE_COLUMNS: [&str; 4] = ["id", "composition", "family", "structure"];

pub fn schema_columns() -> Vec<&'static str> {
    ATTRIBUTE_COLUMNS.iter().chain(FIELD_NAMES.iter()).copied().collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct T2PRecord {
    pub id: String,
    /// Density and thickness are always present on dataset records.
    pub attributes: FabricAttributes,
    pub physics: PhysicsParams,
}

impl T2PRecord {
    pub fn density(&self) -> f64 {
        self.physics.density
    }

    pub fn thickness(&self) -> f64 {
        self.physics.thickness
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct T2PDataset {
    records: Vec<T2PRecord>,
    vocab_fingerprint: String,
}

impl T2PDataset {
    /// Validates every record and id uniqueness.
    pub fn new(vocab: &Vocabulary, records: Vec<T2PRecord>) -> Result<Self, DatasetError> {
        let mut ids = HashSet::new();
        let mut bad = Vec::new();
        for (i, r) in records.iter().enumerate() {
            if !ids.insert(r.id.as_str()) {
                return Err(DatasetError::Schema(format!("duplicate id `{}` (row {})", r.id, i + 1)));
            }
            let problems = record_problems(vocab, r);
            if !problems.is_empty() {
                bad.push(RowDiagnostic { row: i + 1, problems });
            }
        }
        if !bad.is_empty() {
            return Err(DatasetError::Validation(bad));
        }
        Ok(Self { records, vocab_fingerprint: vocab.fingerprint().to_string() })
    }

    pub fn records(&self) -> &[T2PRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn vocab_fingerprint(&self) -> &str {
        &self.vocab_fingerprint
    }

    /// Records at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> T2PDataset {
        T2PDataset {
            records: indices.iter().map(|&i| self.records[i].clone()).collect(),
            vocab_fingerprint: self.vocab_fingerprint.clone(),
        }
    }
}

fn record_problems(vocab: &Vocabulary, r: &T2PRecord) -> Vec<String> {
    let mut problems: Vec<String> =
        validate_attributes(vocab, &r.attributes).violations.iter().map(ToString::to_string).collect();
    if r.attributes.density.is_none() {
        problems.push("density_gsm required".into());
    }
    if r.attributes.thickness.is_none() {
        problems.push("thickness_mm required".into());
    }
    // Physics-side density/thickness mirror the attributes; the attribute
    // check above already reports their range problems.
    problems.extend(
        r.physics
            .problems()
            .into_iter()
            .filter(|p| !p.starts_with("density_gsm") && !p.starts_with("thickness_mm")),
    );
    problems
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    Csv,
    Json,
}

impl DataFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" => Some(Self::Csv),
            "json" => Some(Self::Json),
            _ => None,
        }
    }
}

impl FromStr for DataFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(format!("unknown format `{s}` (expected csv or json)")),
        }
    }
}

/// A row before validation: string attributes plus numeric columns.
struct RawRow {
    id: String,
    composition: RawComposition,
    family: String,
    structure: String,
    values: [Option<String>; FIELD_COUNT],
}

enum RawComposition {
    Text(String),
    Entries(Vec<(String, f64)>),
}

fn build_record(vocab: &Vocabulary, raw: RawRow) -> Result<T2PRecord, Vec<String>> {
    let mut problems = Vec::new();
    let mut values = [0.0; FIELD_COUNT];
    for (i, v) in raw.values.iter().enumerate() {
        match v.as_deref().map(str::trim) {
            None | Some("") => problems.push(format!("{} missing", FIELD_NAMES[i])),
            Some(s) => match s.parse::<f64>() {
                Ok(x) => values[i] = x,
                Err(_) => problems.push(format!("{} not a number: `{s}`", FIELD_NAMES[i])),
            },
        }
    }
    let attributes = match &raw.composition {
        RawComposition::Text(text) => parse_attributes(vocab, text, &raw.family, &raw.structure),
        RawComposition::Entries(entries) => {
            let pairs: Vec<(&str, f64)> = entries.iter().map(|(f, p)| (f.as_str(), *p)).collect();
            FiberComposition::from_raw(vocab, &pairs).and_then(|c| {
                Ok(FabricAttributes::new(
                    c,
                    normalize_family(vocab, &raw.family)?,
                    StructureType::parse(&raw.structure)?,
                ))
            })
        }
    };
    let attributes = match attributes {
        Ok(a) => a,
        Err(e) => {
            problems.push(e.to_string());
            return Err(problems);
        }
    };
    if !problems.is_empty() {
        return Err(problems);
    }
    let record = T2PRecord {
        id: raw.id,
        attributes: attributes.with_scalars(values[0], values[1]),
        physics: PhysicsParams::from_array(&values),
    };
    let problems = record_problems(vocab, &record);
    if problems.is_empty() {
        Ok(record)
    } else {
        Err(problems)
    }
}

fn assemble(vocab: &Vocabulary, rows: Vec<RawRow>) -> Result<T2PDataset, DatasetError> {
    let mut seen = HashSet::new();
    for (i, r) in rows.iter().enumerate() {
        if r.id.trim().is_empty() {
            return Err(DatasetError::Schema(format!("empty id (row {})", i + 1)));
        }
        if !seen.insert(r.id.clone()) {
            return Err(DatasetError::Schema(format!("duplicate id `{}` (row {})", r.id, i + 1)));
        }
    }
    let mut records = Vec::with_capacity(rows.len());
    let mut bad = Vec::new();
    for (i, raw) in rows.into_iter().enumerate() {
        match build_record(vocab, raw) {
            Ok(r) => records.push(r),
            Err(problems) => bad.push(RowDiagnostic { row: i + 1, problems }),
        }
    }
    if !bad.is_empty() {
        return Err(DatasetError::Validation(bad));
    }
    T2PDataset::new(vocab, records)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io { path: path.display().to_string(), source }
}

pub fn load_t2p(vocab: &Vocabulary, path: &Path, format: DataFormat) -> Result<T2PDataset, DatasetError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    match format {
        DataFormat::Csv => parse_csv(vocab, &text),
        DataFormat::Json => parse_json(vocab, &text),
    }
}

pub fn parse_csv(vocab: &Vocabulary, text: &str) -> Result<T2PDataset, DatasetError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| DatasetError::Schema(e.to_string()))?.clone();
    let mut position = BTreeMap::new();
    for (i, h) in headers.iter().enumerate() {
        if !schema_columns().contains(&h) {
            return Err(DatasetError::Schema(format!("unknown column `{h}`")));
        }
        if position.insert(h.to_string(), i).is_some() {
            return Err(DatasetError::Schema(format!("duplicate column `{h}`")));
        }
    }
    if let Some(missing) = schema_columns().into_iter().find(|c| !position.contains_key(*c)) {
        return Err(DatasetError::Schema(format!("missing column `{missing}`")));
    }
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| DatasetError::Schema(format!("row {}: {e}", i + 1)))?;
        let get = |c: &str| rec.get(position[c]).unwrap_or("").to_string();
        let values = std::array::from_fn(|k| Some(get(FIELD_NAMES[k])));
        rows.push(RawRow {
            id: get("id"),
            composition: RawComposition::Text(get("composition")),
            family: get("family"),
            structure: get("structure"),
            values,
        });
    }
    assemble(vocab, rows)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum JsonComposition {
    Text(String),
    Entries(Vec<JsonShare>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonShare {
    fiber: String,
    percent: f64,
}

pub fn parse_json(vocab: &Vocabulary, text: &str) -> Result<T2PDataset, DatasetError> {
    let items: Vec<serde_json::Map<String, serde_json::Value>> =
        serde_json::from_str(text).map_err(|e| DatasetError::Schema(e.to_string()))?;
    let columns = schema_columns();
    let mut rows = Vec::with_capacity(items.len());
    for (i, obj) in items.into_iter().enumerate() {
        let row = i + 1;
        if let Some(k) = obj.keys().find(|k| !columns.contains(&k.as_str())) {
            return Err(DatasetError::Schema(format!("row {row}: unknown key `{k}`")));
        }
        let string = |k: &str| -> Result<String, DatasetError> {
            match obj.get(k) {
                Some(serde_json::Value::String(s)) => Ok(s.clone()),
                Some(serde_json::Value::Number(n)) if k == "id" => Ok(n.to_string()),
                _ => Err(DatasetError::Schema(format!("row {row}: `{k}` must be a string"))),
            }
        };
        let composition = match obj.get("composition").cloned().map(serde_json::from_value::<JsonComposition>) {
            Some(Ok(JsonComposition::Text(s))) => RawComposition::Text(s),
            Some(Ok(JsonComposition::Entries(e))) => {
                RawComposition::Entries(e.into_iter().map(|s| (s.fiber, s.percent)).collect())
            }
            _ => {
                return Err(DatasetError::Schema(format!(
                    "row {row}: `composition` must be a string or an array of {{fiber, percent}}"
                )))
            }
        };
        let values = std::array::from_fn(|k| {
            obj.get(FIELD_NAMES[k]).map(|v| match v {
                serde_json::Value::Number(n) => n.to_string(),
                serde_json::Value::String(s) => s.clone(),
                other => other.to_string(),
            })
        });
        rows.push(RawRow {
            id: string("id")?,
            composition,
            family: string("family")?,
            structure: string("structure")?,
            values,
        });
    }
    assemble(vocab, rows)
}

/// Schema-ordered JSON object for one record.
#[derive(Serialize)]
struct JsonRecordOut<'a> {
    id: &'a str,
    composition: String,
    family: &'a str,
    structure: &'a str,
    #[serde(flatten)]
    physics: crate::physmap::FlatPhysics,
}

pub fn to_json(ds: &T2PDataset) -> String {
    let rows: Vec<JsonRecordOut<'_>> = ds
        .records
        .iter()
        .map(|r| JsonRecordOut {
            id: &r.id,
            composition: r.attributes.composition.render(),
            family: r.attributes.family.as_str(),
            structure: r.attributes.structure.as_str(),
            physics: r.physics.into(),
        })
        .collect();
    serde_json::to_string_pretty(&rows).expect("dataset serializes")
}

pub fn to_csv(ds: &T2PDataset) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(schema_columns()).expect("in-memory write");
    for r in &ds.records {
        let mut row = vec![
            r.id.clone(),
            r.attributes.composition.render(),
            r.attributes.family.to_string(),
            r.attributes.structure.to_string(),
        ];
        row.extend(r.physics.to_array().iter().map(|v| v.to_string()));
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

pub fn save(ds: &T2PDataset, path: &Path, format: DataFormat) -> Result<(), DatasetError> {
    let text = match format {
        DataFormat::Csv => to_csv(ds),
        DataFormat::Json => to_json(ds),
    };
    fs::write(path, text).map_err(io_err(path))
}

/// Fixed-length model input for one fabric.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub fiber_fractions: Vec<f64>,
    pub family_onehot: Vec<f64>,
    pub structure_onehot: Vec<f64>,
    pub log_density: f64,
    pub log_thickness: f64,
}

impl FeatureVector {
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.len());
        v.extend_from_slice(&self.fiber_fractions);
        v.extend_from_slice(&self.family_onehot);
        v.extend_from_slice(&self.structure_onehot);
        v.push(self.log_density);
        v.push(self.log_thickness);
        v
    }

    pub fn len(&self) -> usize {
        self.fiber_fractions.len() + self.family_onehot.len() + self.structure_onehot.len() + 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

pub fn feature_len(vocab: &Vocabulary) -> usize {
    vocab.fibers().len() + vocab.families().len() + StructureType::ALL.len() + 2
}

pub fn feature_names(vocab: &Vocabulary) -> Vec<String> {
    let mut names: Vec<String> = vocab.fibers().iter().map(|f| format!("fiber:{f}")).collect();
    names.extend(vocab.families().iter().map(|f| format!("family:{f}")));
    names.extend(StructureType::ALL.iter().map(|s| format!("structure:{s}")));
    names.push("log1p_density".into());
    names.push("log1p_thickness".into());
    names
}

/// Fiber shares normalized to sum to one, one-hot family and structure, and
/// `ln(1 + x)` of density and thickness.
pub fn featurize(vocab: &Vocabulary, attrs: &FabricAttributes) -> Result<FeatureVector, DatasetError> {
    let density = attrs.density.ok_or(DatasetError::MissingScalar("density"))?;
    let thickness = attrs.thickness.ok_or(DatasetError::MissingScalar("thickness"))?;
    if !(density.is_finite() && density > 0.0) {
        return Err(DatasetError::InvalidScalar("density"));
    }
    if !(thickness.is_finite() && thickness > 0.0) {
        return Err(DatasetError::InvalidScalar("thickness"));
    }
    let total: f64 = attrs.composition.entries().iter().map(|e| e.percent).sum();
    let mut fiber_fractions = vec![0.0; vocab.fibers().len()];
    for e in attrs.composition.entries() {
        let i = vocab.canonical_fiber_position(e.fiber.as_str()).ok_or(DatasetError::FingerprintMismatch)?;
        fiber_fractions[i] = e.percent / total;
    }
    let mut family_onehot = vec![0.0; vocab.families().len()];
    let fi = vocab.canonical_family_position(attrs.family.as_str()).ok_or(DatasetError::FingerprintMismatch)?;
    family_onehot[fi] = 1.0;
    let mut structure_onehot = vec![0.0; StructureType::ALL.len()];
    structure_onehot[attrs.structure.index()] = 1.0;
    Ok(FeatureVector {
        fiber_fractions,
        family_onehot,
        structure_onehot,
        log_density: density.ln_1p(),
        log_thickness: thickness.ln_1p(),
    })
}

/// Feature matrix for every record, row-aligned with the dataset.
pub fn feature_matrix(vocab: &Vocabulary, ds: &T2PDataset) -> Result<Vec<Vec<f64>>, DatasetError> {
    ds.records.iter().map(|r| featurize(vocab, &r.attributes).map(|f| f.to_vec())).collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StratifyBy {
    #[default]
    Structure,
    Family,
    FamilyStructure,
}

impl StratifyBy {
    pub fn key(self, r: &T2PRecord) -> String {
        match self {
            Self::Structure => r.attributes.structure.to_string(),
            Self::Family => r.attributes.family.to_string(),
            Self::FamilyStructure => format!("{}|{}", r.attributes.family, r.attributes.structure),
        }
    }
}

impl FromStr for StratifyBy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "structure" => Ok(Self::Structure),
            "family" => Ok(Self::Family),
            "family-structure" | "family_structure" => Ok(Self::FamilyStructure),
            _ => Err(format!("unknown stratification `{s}`")),
        }
    }
}

/// Index lists into the source dataset; each list is sorted.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub holdout: Vec<usize>,
}

/// Largest-remainder apportionment of `n` items over `ratios`; ties in the
/// remainders go to the earlier slot.
pub fn apportion(n: usize, ratios: &[f64]) -> Vec<usize> {
    let quotas: Vec<f64> = ratios.iter().map(|r| r * n as f64).collect();
    // Nudge so 0.7 * 100 style products land on their integer value.
    let mut sizes: Vec<usize> = quotas.iter().map(|q| (q + 1e-9).floor() as usize).collect();
    let assigned: usize = sizes.iter().sum();
    let mut order: Vec<usize> = (0..ratios.len()).collect();
    let rem = |i: usize| quotas[i] - sizes[i] as f64;
    order.sort_by(|&a, &b| rem(b).total_cmp(&rem(a)).then(a.cmp(&b)));
    for &i in order.iter().take(n.saturating_sub(assigned)) {
        sizes[i] += 1;
    }
    sizes
}

/// Strata in key order, members sorted by id then shuffled, so the result
/// depends on membership and seed only, not on input order.
fn shuffled_strata(ds: &T2PDataset, by: StratifyBy, rng: &mut ChaCha8Rng) -> Vec<(String, Vec<usize>)> {
    let mut strata: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, r) in ds.records.iter().enumerate() {
        strata.entry(by.key(r)).or_default().push(i);
    }
    strata
        .into_iter()
        .map(|(k, mut members)| {
            members.sort_by(|&a, &b| ds.records[a].id.cmp(&ds.records[b].id));
            members.shuffle(rng);
            (k, members)
        })
        .collect()
}

pub fn stratified_split(
    ds: &T2PDataset,
    ratios: [f64; 3],
    by: StratifyBy,
    seed: u64,
) -> Result<Split, DatasetError> {
    if ds.is_empty() {
        return Err(DatasetError::EmptyDataset);
    }
    if ratios.iter().any(|r| !(r.is_finite() && *r >= 0.0)) || (ratios.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(DatasetError::InvalidRatios);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut split = Split::default();
    for (key, members) in shuffled_strata(ds, by, &mut rng) {
        if members.len() < 3 {
            split.warnings.push(format!(
                "degenerate stratum `{key}` ({} records) assigned to train",
                members.len()
            ));
            split.train.extend(members);
            continue;
        }
        let sizes = apportion(members.len(), &ratios);
        let (train, rest) = members.split_at(sizes[0]);
        let (val, test) = rest.split_at(sizes[1]);
        split.train.extend_from_slice(train);
        split.val.extend_from_slice(val);
        split.test.extend_from_slice(test);
    }
    split.train.sort_unstable();
    split.val.sort_unstable();
    split.test.sort_unstable();
    Ok(split)
}

/// K folds dealt round-robin within each stratum; the dealing position carries
/// over between strata so fold sizes stay balanced overall.
pub fn stratified_kfold(ds: &T2PDataset, k: usize, by: StratifyBy, seed: u64) -> Result<Vec<Fold>, DatasetError> {
    if k < 2 {
        return Err(DatasetError::InvalidFolds(k));
    }
    if ds.is_empty() {
        return Err(DatasetError::EmptyDataset);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut holdouts = vec![Vec::new(); k];
    let mut next = 0usize;
    for (_, members) in shuffled_strata(ds, by, &mut rng) {
        for m in members {
            holdouts[next % k].push(m);
            next += 1;
        }
    }
    Ok(holdouts
        .into_iter()
        .map(|mut holdout| {
            holdout.sort_unstable();
            let held: HashSet<usize> = holdout.iter().copied().collect();
            let train = (0..ds.len()).filter(|i| !held.contains(i)).collect();
            Fold { train, holdout }
        })
        .collect())
}


#[cfg(test)]
mod props {
    use super::*;
    use crate::synth;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn ids(ds: &T2PDataset, idx: &[usize]) -> BTreeSet<String> {
        idx.iter().map(|&i| ds.records()[i].id.clone()).collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn split_is_partition_and_order_free(n in 5usize..80, seed in 0u64..1000, perm_seed in 0u64..1000) {
            let v = Vocabulary::builtin();
            let ds = synth::t2p_like(&v, n, 7, 0.05);
            let s = stratified_split(&ds, [0.7, 0.15, 0.15], StratifyBy::Structure, seed).unwrap();
            let mut all: Vec<usize> = s.train.iter().chain(&s.val).chain(&s.test).copied().collect();
            all.sort();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());

            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(perm_seed));
            let shuffled = ds.subset(&order);
            let s2 = stratified_split(&shuffled, [0.7, 0.15, 0.15], StratifyBy::Structure, seed).unwrap();
            prop_assert_eq!(ids(&ds, &s.train), ids(&shuffled, &s2.train));
            prop_assert_eq!(ids(&ds, &s.val), ids(&shuffled, &s2.val));
            prop_assert_eq!(ids(&ds, &s.test), ids(&shuffled, &s2.test));
        }

        #[test]
        fn kfold_balanced_per_stratum(n in 5usize..80, k in 2usize..7, seed in 0u64..1000) {
            let v = Vocabulary::builtin();
            let ds = synth::t2p_like(&v, n, 11, 0.05);
            let folds = stratified_kfold(&ds, k, StratifyBy::Structure, seed).unwrap();
            let mut seen = vec![0usize; n];
            for f in &folds {
                for &i in &f.holdout { seen[i] += 1; }
                prop_assert_eq!(f.train.len() + f.holdout.len(), n);
            }
            prop_assert!(seen.iter().all(|&c| c == 1));
            for s in StructureType::ALL {
                let counts: Vec<usize> = folds
                    .iter()
                    .map(|f| f.holdout.iter().filter(|&&i| ds.records()[i].attributes.structure == s).count())
                    .collect();
                let (lo, hi) = (counts.iter().min().unwrap(), counts.iter().max().unwrap());
                prop_assert!(hi - lo <= 1);
            }
        }
    }
}
