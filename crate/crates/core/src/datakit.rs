//! Labeled text corpora in CSV form.
//!
//! Each row is a 1-based class label followed by one or more text fields,
//! comma-separated, with double-quote quoting and `""` as an escaped quote:
//!
//! ```text
//! 3,"Wall St. Bears Claw Back","Reuters - Short-sellers, ..."
//! ```

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use rand::seq::SliceRandom;

use crate::config::{split_list, KeyValues};
use crate::trainer::TextExample;
use crate::{seeded_rng, Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    /// 0-based class index.
    pub label: usize,
    pub fields: Vec<String>,
    /// 1-based line of the record in its source file (0 when built in memory).
    pub line: u64,
}

impl Sample {
    pub fn new(label: usize, fields: Vec<String>) -> Self {
        Sample {
            label,
            fields,
            line: 0,
        }
    }
}

/// How raw file labels become classes: listed labels map to a class, dropped
/// labels discard the row, anything else is an error.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelMap {
    pub map: BTreeMap<u64, usize>,
    pub drop: HashSet<u64>,
}

impl LabelMap {
    /// Negative for raw labels 1 and 2, positive for 4 and 5, 3 dropped.
    pub fn polarity() -> Self {
        LabelMap {
            map: [(1, 0), (2, 0), (4, 1), (5, 1)].into_iter().collect(),
            drop: [3].into_iter().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub class_names: Vec<String>,
    /// Names of the text fields; empty means "whatever the first row has".
    pub field_names: Vec<String>,
    /// Field indices in the order they are joined; empty means natural order.
    pub concat_order: Vec<usize>,
    /// Reverse the characters of the joined text.
    pub reverse_text: bool,
    pub separator: String,
    pub label_map: Option<LabelMap>,
    /// Keep only samples whose joined text has at least this many characters.
    pub min_length: Option<usize>,
    /// Keep only samples whose joined text has at most this many characters.
    pub max_length: Option<usize>,
    /// Fields whose exact equality marks a duplicate; `None` disables dedupe.
    pub dedupe_fields: Option<Vec<usize>>,
}

impl DatasetSpec {
    pub fn new(class_names: Vec<String>) -> Self {
        DatasetSpec {
            class_names,
            field_names: Vec::new(),
            concat_order: Vec::new(),
            reverse_text: false,
            separator: " ".into(),
            label_map: None,
            min_length: None,
            max_length: None,
            dedupe_fields: None,
        }
    }

    /// Classes named "1".."n".
    pub fn numbered(class_count: usize) -> Self {
        Self::new((1..=class_count).map(|i| i.to_string()).collect())
    }

    pub fn with_fields(mut self, names: &[&str]) -> Self {
        self.field_names = names.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn reversed(mut self) -> Self {
        let n = self.field_names.len();
        self.concat_order = (0..n).rev().collect();
        self
    }

    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    pub fn field_index(&self, name: &str) -> Result<usize> {
        if let Some(i) = self.field_names.iter().position(|f| f == name) {
            return Ok(i);
        }
        match name.parse::<usize>() {
            Ok(n) if n >= 1 && (self.field_names.is_empty() || n <= self.field_names.len()) => Ok(n - 1),
            _ => Err(Error::Config(format!(
                "unknown field {name:?} (fields: {})",
                self.field_names.join(", ")
            ))),
        }
    }

    fn class_index(&self, name: &str) -> Result<usize> {
        if let Some(i) = self.class_names.iter().position(|c| c == name) {
            return Ok(i);
        }
        match name.parse::<usize>() {
            Ok(n) if (1..=self.class_count()).contains(&n) => Ok(n - 1),
            _ => Err(Error::Config(format!("unknown class {name:?}"))),
        }
    }

    /// Reads the dataset keys of a configuration. `classes` is either a
    /// comma-separated list of names or a class count. `label-map` entries
    /// look like `1:negative` (raw label, then class name or 1-based number).
    /// `concat-order` is `natural`, `reversed` or a field list.
    pub fn from_config(kv: &KeyValues) -> Result<Self> {
        let classes = kv
            .get("classes")
            .ok_or_else(|| Error::Config("missing required key `classes`".into()))?;
        let mut spec = match classes.trim().parse::<usize>() {
            Ok(n) if n >= 2 => Self::numbered(n),
            Ok(n) => return Err(Error::Config(format!("`classes` must be at least 2, got {n}"))),
            Err(_) => Self::new(split_list(classes).map(str::to_string).collect()),
        };
        if let Some(fields) = kv.get("fields") {
            spec.field_names = split_list(fields).map(str::to_string).collect();
        }
        if let Some(order) = kv.get("concat-order") {
            spec.concat_order = match order.trim() {
                "natural" => Vec::new(),
                "reversed" => {
                    if spec.field_names.is_empty() {
                        return Err(Error::Config(
                            "`concat-order = reversed` needs `fields` to be set".into(),
                        ));
                    }
                    (0..spec.field_names.len()).rev().collect()
                }
                list => split_list(list)
                    .map(|f| spec.field_index(f))
                    .collect::<Result<_>>()?,
            };
        }
        if let Some(v) = kv.flag("reverse-text")? {
            spec.reverse_text = v;
        }
        if let Some(sep) = kv.get("separator") {
            spec.separator = sep.to_string();
        }
        if kv.contains("label-map") || kv.contains("drop-labels") {
            let mut lm = LabelMap::default();
            for item in kv.get("label-map").map(split_list).into_iter().flatten() {
                let (raw, class) = item.split_once(':').ok_or_else(|| {
                    Error::Config(format!("`label-map` item {item:?}: expected raw:class"))
                })?;
                let raw = raw.trim().parse::<u64>().map_err(|e| {
                    Error::Config(format!("`label-map` item {item:?}: {e}"))
                })?;
                lm.map.insert(raw, spec.class_index(class.trim())?);
            }
            for v in kv.list::<u64>("drop-labels")?.unwrap_or_default() {
                lm.drop.insert(v);
            }
            spec.label_map = Some(lm);
        }
        spec.min_length = kv.parsed("min-length")?;
        spec.max_length = kv.parsed("max-length")?;
        if let Some(d) = kv.get("dedupe") {
            spec.dedupe_fields = match d.trim() {
                "false" | "no" | "off" => None,
                "true" | "yes" | "on" | "all" => Some(Vec::new()),
                list => Some(
                    split_list(list)
                        .map(|f| spec.field_index(f))
                        .collect::<Result<_>>()?,
                ),
            };
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.class_names.len() < 2 {
            return Err(Error::Config("a dataset needs at least 2 classes".into()));
        }
        if !self.concat_order.is_empty() {
            let mut sorted = self.concat_order.clone();
            sorted.sort_unstable();
            let is_perm = sorted.iter().enumerate().all(|(i, &v)| i == v);
            let right_len = self.field_names.is_empty() || sorted.len() == self.field_names.len();
            if !is_perm || !right_len {
                return Err(Error::Config(format!(
                    "concat order {:?} is not a permutation of the fields",
                    self.concat_order
                )));
            }
        }
        if let Some(lm) = &self.label_map {
            let mut image: Vec<usize> = lm.map.values().copied().collect();
            image.sort_unstable();
            image.dedup();
            if image != (0..self.class_count()).collect::<Vec<_>>() {
                return Err(Error::Config(format!(
                    "label map must cover classes 0..{} exactly, covers {image:?}",
                    self.class_count()
                )));
            }
            if let Some(both) = lm.map.keys().find(|k| lm.drop.contains(k)) {
                return Err(Error::Config(format!("label {both} is both mapped and dropped")));
            }
        }
        Ok(())
    }
}

/// Joins the sample's fields in `spec.concat_order` with `spec.separator`.
pub fn concat_fields(sample: &Sample, spec: &DatasetSpec) -> String {
    let joined = if spec.concat_order.is_empty() {
        sample.fields.join(&spec.separator)
    } else {
        spec.concat_order
            .iter()
            .filter_map(|&i| sample.fields.get(i).map(String::as_str))
            .collect::<Vec<_>>()
            .join(&spec.separator)
    };
    if spec.reverse_text {
        joined.chars().rev().collect()
    } else {
        joined
    }
}

/// Counts from one load.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub rows: usize,
    pub dropped_labels: usize,
    pub outside_length_window: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub spec: DatasetSpec,
    pub samples: Vec<Sample>,
    pub report: LoadReport,
}

impl Dataset {
    pub fn new(spec: DatasetSpec, samples: Vec<Sample>) -> Self {
        Dataset {
            spec,
            samples,
            report: LoadReport::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.spec.class_count()];
        for s in &self.samples {
            counts[s.label] += 1;
        }
        counts
    }

    pub fn text(&self, i: usize) -> String {
        concat_fields(&self.samples[i], &self.spec)
    }

    /// Joined texts with their labels, ready for training.
    pub fn examples(&self) -> Vec<TextExample> {
        self.samples
            .iter()
            .map(|s| TextExample::new(concat_fields(s, &self.spec), s.label))
            .collect()
    }

    fn with_samples(&self, samples: Vec<Sample>) -> Dataset {
        Dataset {
            spec: self.spec.clone(),
            samples,
            report: LoadReport::default(),
        }
    }
}

/// One raw CSV record and its 1-based line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRecord {
    pub line: u64,
    pub fields: Vec<String>,
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| format!(" line {}", p.line())).unwrap_or_default();
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        kind => Error::Data(format!("{}{line}: malformed CSV: {kind:?}", path.display())),
    }
}

/// Reads every record of a headerless CSV file without interpreting it.
pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<RawRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_records_from(file, path)
}

fn read_records_from(reader: impl std::io::Read, path: &Path) -> Result<Vec<RawRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        out.push(RawRecord {
            line,
            fields: rec.iter().map(str::to_string).collect(),
        });
    }
    Ok(out)
}

/// Writes records as CSV, quoting only where needed.
pub fn write_records(path: impl AsRef<Path>, records: &[RawRecord]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::WriterBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    for r in records {
        w.write_record(&r.fields).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Loads and labels a CSV corpus, applying the label map and length window.
pub fn load_csv(path: impl AsRef<Path>, spec: &DatasetSpec) -> Result<Dataset> {
    let path = path.as_ref();
    let records = read_records(path)?;
    dataset_from_records(&records, spec, &path.display().to_string())
}

/// Parses in-memory CSV text; `source` names it in error messages.
pub fn parse_csv(text: &str, spec: &DatasetSpec, source: &str) -> Result<Dataset> {
    let records = read_records_from(text.as_bytes(), Path::new(source))?;
    dataset_from_records(&records, spec, source)
}

fn dataset_from_records(records: &[RawRecord], spec: &DatasetSpec, source: &str) -> Result<Dataset> {
    spec.validate()?;
    let mut report = LoadReport {
        rows: records.len(),
        ..Default::default()
    };
    let mut field_count = (!spec.field_names.is_empty()).then_some(spec.field_names.len());
    let mut samples = Vec::with_capacity(records.len());
    for rec in records {
        let at = || format!("{source} line {}", rec.line);
        if rec.fields.len() < 2 {
            return Err(Error::Data(format!(
                "{}: expected a label and at least one text field",
                at()
            )));
        }
        let n = rec.fields.len() - 1;
        match field_count {
            Some(expected) if expected != n => {
                return Err(Error::Data(format!(
                    "{}: expected {expected} text fields, found {n}",
                    at()
                )))
            }
            None => field_count = Some(n),
            _ => {}
        }
        let raw_label = rec.fields[0].trim();
        let raw: u64 = raw_label
            .parse()
            .map_err(|_| Error::Data(format!("{}: label {raw_label:?} is not a number", at())))?;
        let label = match &spec.label_map {
            Some(lm) if lm.drop.contains(&raw) => {
                report.dropped_labels += 1;
                continue;
            }
            Some(lm) => *lm.map.get(&raw).ok_or_else(|| {
                Error::Data(format!("{}: label {raw} is not in the label map", at()))
            })?,
            None => {
                if raw == 0 || raw > spec.class_count() as u64 {
                    return Err(Error::Data(format!(
                        "{}: label {raw} outside 1..={}",
                        at(),
                        spec.class_count()
                    )));
                }
                raw as usize - 1
            }
        };
        let sample = Sample {
            label,
            fields: rec.fields[1..].to_vec(),
            line: rec.line,
        };
        if spec.min_length.is_some() || spec.max_length.is_some() {
            let len = concat_fields(&sample, spec).chars().count();
            if spec.min_length.is_some_and(|m| len < m) || spec.max_length.is_some_and(|m| len > m) {
                report.outside_length_window += 1;
                continue;
            }
        }
        samples.push(sample);
    }
    Ok(Dataset {
        spec: spec.clone(),
        samples,
        report,
    })
}

/// Per-class disjoint train and test draws of exact sizes.
pub fn stratified_sample(
    dataset: &Dataset,
    per_class_train: usize,
    per_class_test: usize,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); dataset.spec.class_count()];
    for (i, s) in dataset.samples.iter().enumerate() {
        by_class[s.label].push(i);
    }
    let need = per_class_train + per_class_test;
    let mut rng = seeded_rng(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (c, idx) in by_class.iter_mut().enumerate() {
        if idx.len() < need {
            return Err(Error::Data(format!(
                "class {:?} has {} samples, {need} requested",
                dataset.spec.class_names[c],
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        train.extend_from_slice(&idx[..per_class_train]);
        test.extend_from_slice(&idx[per_class_train..need]);
    }
    train.sort_unstable();
    test.sort_unstable();
    let pick = |ids: &[usize]| ids.iter().map(|&i| dataset.samples[i].clone()).collect();
    Ok((dataset.with_samples(pick(&train)), dataset.with_samples(pick(&test))))
}

/// Drops samples whose `key_fields` (all fields when empty) equal those of an
/// earlier sample. Returns the survivors and how many were removed.
pub fn dedupe(dataset: &Dataset, key_fields: &[usize]) -> (Dataset, usize) {
    let mut seen: HashSet<Vec<&str>> = HashSet::new();
    let mut kept = Vec::with_capacity(dataset.len());
    for s in &dataset.samples {
        let key: Vec<&str> = if key_fields.is_empty() {
            s.fields.iter().map(String::as_str).collect()
        } else {
            key_fields
                .iter()
                .map(|&i| s.fields.get(i).map_or("", String::as_str))
                .collect()
        };
        if seen.insert(key) {
            kept.push(s.clone());
        }
    }
    let removed = dataset.len() - kept.len();
    (dataset.with_samples(kept), removed)
}
