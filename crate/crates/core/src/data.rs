//! Dataset parsing, min-max scaling, zero post-padding and the canonical
//! binary dataset format.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ClassId = u32;

/// Beat categories of the MIT-BIH heartbeat export, indexed by class id.
pub const MITBIH_CLASSES: [&str; 5] = ["N", "S", "V", "F", "Q"];

/// Padded length shared by every dataset in the default experiment.
pub const DEFAULT_L_MAX: usize = 187;

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub values: Vec<f32>,
    pub original_length: usize,
    pub label: ClassId,
}

impl TimeSeries {
    pub fn new(values: Vec<f32>, label: ClassId) -> Self {
        Self {
            original_length: values.len(),
            values,
            label,
        }
    }

    /// The samples before any padding.
    pub fn prefix(&self) -> &[f32] {
        &self.values[..self.original_length]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Train,
    Validation,
    Test,
}

impl Role {
    fn to_byte(self) -> u8 {
        match self {
            Role::Train => 0,
            Role::Validation => 1,
            Role::Test => 2,
        }
    }

    fn from_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(Role::Train),
            1 => Some(Role::Validation),
            2 => Some(Role::Test),
            _ => None,
        }
    }
}

impl std::str::FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Role::Train),
            "validation" | "val" => Ok(Role::Validation),
            "test" => Ok(Role::Test),
            other => Err(Error::InvalidArgument(format!("unknown dataset role `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub role: Role,
    pub series: Vec<TimeSeries>,
    /// Class id → display name.
    pub label_names: Vec<String>,
    /// Longest series length; after padding, the shared length of every series.
    pub l_max: usize,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.label_names.len()
    }

    pub fn with_role(mut self, role: Role) -> Self {
        self.role = role;
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn class_name(&self, id: ClassId) -> &str {
        self.label_names.get(id as usize).map(String::as_str).unwrap_or("?")
    }

    /// Indices of the members of every class, in class-id order.
    pub fn class_members(&self) -> Vec<Vec<usize>> {
        let mut members = vec![Vec::new(); self.label_names.len()];
        for (i, s) in self.series.iter().enumerate() {
            members[s.label as usize].push(i);
        }
        members
    }

    /// True when every series already has `l_max` stored samples.
    pub fn is_padded(&self) -> bool {
        self.series.iter().all(|s| s.values.len() == self.l_max)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, s) in self.series.iter().enumerate() {
            if s.label as usize >= self.label_names.len() {
                return Err(Error::InvalidArgument(format!(
                    "{}: series {i} has label {} outside the {}-entry label table",
                    self.name,
                    s.label,
                    self.label_names.len()
                )));
            }
            if s.original_length == 0 || s.original_length > s.values.len() || s.values.len() > self.l_max {
                return Err(Error::InvalidArgument(format!(
                    "{}: series {i} has inconsistent lengths (original {}, stored {}, l_max {})",
                    self.name,
                    s.original_length,
                    s.values.len(),
                    self.l_max
                )));
            }
        }
        Ok(())
    }

    /// Concatenates datasets, merging their label tables by name.
    pub fn concat(name: impl Into<String>, parts: Vec<Dataset>) -> Result<Dataset> {
        let Some(first) = parts.first() else {
            return Err(Error::InvalidArgument("concat: no datasets given".into()));
        };
        let role = first.role;
        let mut names: Vec<String> = Vec::new();
        for p in &parts {
            for n in &p.label_names {
                if !names.contains(n) {
                    names.push(n.clone());
                }
            }
        }
        sort_label_names(&mut names);
        let mut series = Vec::new();
        let mut l_max = 0;
        for p in parts {
            l_max = l_max.max(p.l_max);
            let remap: Vec<ClassId> = p
                .label_names
                .iter()
                .map(|n| names.iter().position(|m| m == n).unwrap() as ClassId)
                .collect();
            series.extend(p.series.into_iter().map(|mut s| {
                s.label = remap[s.label as usize];
                s
            }));
        }
        Ok(Dataset {
            name: name.into(),
            role,
            series,
            label_names: names,
            l_max,
        })
    }

    /// One-line summary: size, original length → padded length, class count.
    pub fn summary(&self, original_length: usize) -> String {
        format!(
            "{}: {}, {}→{}, {} classes",
            self.name,
            self.len(),
            original_length,
            self.l_max,
            self.num_classes()
        )
    }

    /// Longest unpadded prefix in the dataset.
    pub fn max_original_length(&self) -> usize {
        self.series.iter().map(|s| s.original_length).max().unwrap_or(0)
    }
}

/// Numeric labels sort numerically, everything else lexicographically.
fn sort_label_names(names: &mut [String]) {
    names.sort_by(|a, b| match (a.parse::<f64>(), b.parse::<f64>()) {
        (Ok(x), Ok(y)) => x.total_cmp(&y),
        _ => a.cmp(b),
    });
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Delimiter {
    /// Tab if the first line contains one, else comma if present, else runs
    /// of whitespace.
    Auto,
    Tab,
    Comma,
    Whitespace,
}

impl Delimiter {
    fn detect(first_line: &str) -> Self {
        if first_line.contains('\t') {
            Delimiter::Tab
        } else if first_line.contains(',') {
            Delimiter::Comma
        } else {
            Delimiter::Whitespace
        }
    }

    fn split<'a>(self, line: &'a str) -> Box<dyn Iterator<Item = &'a str> + 'a> {
        match self {
            Delimiter::Tab => Box::new(line.split('\t').map(str::trim)),
            Delimiter::Comma => Box::new(line.split(',').map(str::trim)),
            Delimiter::Whitespace | Delimiter::Auto => Box::new(line.split_whitespace()),
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if text.trim().is_empty() {
        return Err(Error::EmptyInput(path.display().to_string()));
    }
    Ok(text)
}

/// Dataset name from a file stem, without a `_TRAIN` / `_TEST` suffix.
fn stem_name(path: &Path) -> String {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("dataset");
    stem.trim_end_matches("_TRAIN").trim_end_matches("_TEST").to_string()
}

fn parse_sample(field: &str, source: &str, line: usize) -> Result<f32> {
    field.parse::<f32>().ok().filter(|v| v.is_finite()).ok_or_else(|| Error::Parse {
        path: source.to_string(),
        line,
        message: format!("`{field}` is not a finite number"),
    })
}

/// Canonical text for a UCR class label: integral values print without a
/// fractional part, so `1.0000000e+00` and `1` name the same class.
fn label_key(field: &str, source: &str, line: usize) -> Result<String> {
    let v: f64 = field.parse().map_err(|_| Error::Parse {
        path: source.to_string(),
        line,
        message: format!("label `{field}` is not numeric"),
    })?;
    if v.fract() == 0.0 && v.abs() < 1e15 {
        Ok(format!("{}", v as i64))
    } else {
        Ok(field.to_string())
    }
}

/// Parses a UCR-archive text file: one series per line, class label first.
/// Series keep their raw values and lengths.
pub fn parse_ucr(path: impl AsRef<Path>, delimiter: Delimiter) -> Result<Dataset> {
    let path = path.as_ref();
    let text = read_text(path)?;
    parse_ucr_str(&stem_name(path), &path.display().to_string(), &text, delimiter)
}

pub fn parse_ucr_str(name: &str, source: &str, text: &str, delimiter: Delimiter) -> Result<Dataset> {
    let mut delimiter = delimiter;
    let mut rows: Vec<(String, Vec<f32>)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        if delimiter == Delimiter::Auto {
            delimiter = Delimiter::detect(line);
        }
        let mut fields = delimiter.split(line).filter(|f| !f.is_empty());
        let label = label_key(fields.next().unwrap_or(""), source, lineno)?;
        let values = fields
            .map(|f| parse_sample(f, source, lineno))
            .collect::<Result<Vec<_>>>()?;
        if values.is_empty() {
            return Err(Error::Parse {
                path: source.to_string(),
                line: lineno,
                message: "record has a label but no samples".into(),
            });
        }
        rows.push((label, values));
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput(source.to_string()));
    }

    let mut names: Vec<String> = rows.iter().map(|(l, _)| l.clone()).collect();
    sort_label_names(&mut names);
    names.dedup();
    let index: BTreeMap<&str, ClassId> = names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i as ClassId))
        .collect();
    let series: Vec<TimeSeries> = rows
        .iter()
        .map(|(l, v)| TimeSeries::new(v.clone(), index[l.as_str()]))
        .collect();
    let l_max = series.iter().map(|s| s.values.len()).max().unwrap_or(0);
    Ok(Dataset {
        name: name.to_string(),
        role: Role::Train,
        series,
        label_names: names,
        l_max,
    })
}

/// Parses the MIT-BIH heartbeat CSV export: samples followed by a trailing
/// integer class in `0..=4` (N, S, V, F, Q).
pub fn parse_mitbih(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = read_text(path)?;
    parse_mitbih_str("MIT-BIH", &path.display().to_string(), &text)
}

pub fn parse_mitbih_str(name: &str, source: &str, text: &str) -> Result<Dataset> {
    let mut series = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let (label_field, samples) = fields.split_last().expect("split yields one field");
        let label = label_field
            .parse::<f64>()
            .ok()
            .filter(|v| v.fract() == 0.0 && (0.0..MITBIH_CLASSES.len() as f64).contains(v))
            .ok_or_else(|| Error::Parse {
                path: source.to_string(),
                line: lineno,
                message: format!("class label `{label_field}` is not one of 0..=4"),
            })? as ClassId;
        if samples.is_empty() {
            return Err(Error::Parse {
                path: source.to_string(),
                line: lineno,
                message: "record has a label but no samples".into(),
            });
        }
        let values = samples
            .iter()
            .map(|f| parse_sample(f, source, lineno))
            .collect::<Result<Vec<_>>>()?;
        series.push(TimeSeries::new(values, label));
    }
    if series.is_empty() {
        return Err(Error::EmptyInput(source.to_string()));
    }
    let l_max = series.iter().map(|s| s.values.len()).max().unwrap_or(0);
    Ok(Dataset {
        name: name.to_string(),
        role: Role::Test,
        series,
        label_names: MITBIH_CLASSES.iter().map(|s| s.to_string()).collect(),
        l_max,
    })
}

/// Loads `<dir>/<name>_TRAIN.*` and `<dir>/<name>_TEST.*` as one dataset.
/// `.tsv`, `.csv` and extension-less files are tried in that order.
pub fn load_ucr_archive(dir: impl AsRef<Path>, name: &str, delimiter: Delimiter) -> Result<Dataset> {
    let dir = dir.as_ref();
    let find = |split: &str| -> Result<std::path::PathBuf> {
        ["tsv", "csv", "txt", ""]
            .iter()
            .map(|ext| {
                let file = if ext.is_empty() {
                    format!("{name}_{split}")
                } else {
                    format!("{name}_{split}.{ext}")
                };
                dir.join(file)
            })
            .find(|p| p.is_file())
            .ok_or_else(|| {
                Error::io(
                    dir.join(format!("{name}_{split}.tsv")),
                    std::io::Error::from(std::io::ErrorKind::NotFound),
                )
            })
    };
    let train = parse_ucr(find("TRAIN")?, delimiter)?;
    let test = parse_ucr(find("TEST")?, delimiter)?;
    Dataset::concat(name, vec![train, test])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScalingMode {
    /// Each series is mapped onto [0, 1] by its own extremes.
    #[default]
    PerSeries,
    /// All series share the dataset-wide extremes.
    PerDataset,
}

fn rescale(values: &mut [f32], min: f32, max: f32) {
    let range = max - min;
    if range > 0.0 && range.is_finite() {
        values.iter_mut().for_each(|v| *v = (*v - min) / range);
    } else {
        values.iter_mut().for_each(|v| *v = 0.0);
    }
}

fn extremes(values: &[f32]) -> (f32, f32) {
    values
        .iter()
        .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

/// Min-max scales the unpadded prefix; padding stays zero and a constant
/// prefix becomes all zeros.
pub fn scale_minmax(series: &TimeSeries) -> TimeSeries {
    let mut out = series.clone();
    let (lo, hi) = extremes(series.prefix());
    rescale(&mut out.values[..series.original_length], lo, hi);
    out
}

pub fn scale_dataset(dataset: &Dataset, mode: ScalingMode) -> Dataset {
    let mut out = dataset.clone();
    match mode {
        ScalingMode::PerSeries => {
            out.series = dataset.series.iter().map(scale_minmax).collect();
        }
        ScalingMode::PerDataset => {
            let (lo, hi) = dataset
                .series
                .iter()
                .map(|s| extremes(s.prefix()))
                .fold((f32::INFINITY, f32::NEG_INFINITY), |(a, b), (c, d)| (a.min(c), b.max(d)));
            for s in &mut out.series {
                let n = s.original_length;
                rescale(&mut s.values[..n], lo, hi);
            }
        }
    }
    out
}

/// Appends zeros up to `l_max`, keeping `original_length`.
pub fn pad_to(series: &TimeSeries, l_max: usize) -> Result<TimeSeries> {
    if series.values.len() > l_max {
        return Err(Error::InvalidArgument(format!(
            "series of length {} does not fit in l_max {l_max}",
            series.values.len()
        )));
    }
    let mut out = series.clone();
    out.values.resize(l_max, 0.0);
    Ok(out)
}

/// Scales, then pads every series to `l_max`.
pub fn prepare(dataset: &Dataset, l_max: usize, mode: ScalingMode) -> Result<Dataset> {
    let scaled = scale_dataset(dataset, mode);
    let series = scaled
        .series
        .iter()
        .map(|s| pad_to(s, l_max))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| match e {
            Error::InvalidArgument(m) => Error::InvalidArgument(format!("{}: {m}", dataset.name)),
            other => other,
        })?;
    Ok(Dataset {
        series,
        l_max,
        ..scaled
    })
}

const MAGIC: [u8; 4] = *b"FSTS";
pub const CANONICAL_VERSION: u16 = 1;

/// Encodes a padded dataset in the canonical little-endian layout:
///
/// ```text
/// "FSTS" | version u16 | role u8 | name (u32 len + UTF-8) | l_max u32
/// | label count u32 | labels (u32 len + UTF-8 each) | series count u64
/// | per series: label u32, original length u32, l_max × f32
/// ```
pub fn encode_canonical(dataset: &Dataset) -> Result<Vec<u8>> {
    if dataset.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "refusing to save empty dataset `{}`",
            dataset.name
        )));
    }
    dataset.validate()?;
    if !dataset.is_padded() {
        return Err(Error::InvalidArgument(format!(
            "dataset `{}` must be padded to l_max {} before saving",
            dataset.name, dataset.l_max
        )));
    }
    let mut buf = Vec::with_capacity(32 + dataset.len() * (8 + 4 * dataset.l_max));
    buf.extend_from_slice(&MAGIC);
    buf.extend_from_slice(&CANONICAL_VERSION.to_le_bytes());
    buf.push(dataset.role.to_byte());
    put_str(&mut buf, &dataset.name);
    buf.extend_from_slice(&(dataset.l_max as u32).to_le_bytes());
    buf.extend_from_slice(&(dataset.label_names.len() as u32).to_le_bytes());
    for n in &dataset.label_names {
        put_str(&mut buf, n);
    }
    buf.extend_from_slice(&(dataset.len() as u64).to_le_bytes());
    for s in &dataset.series {
        buf.extend_from_slice(&s.label.to_le_bytes());
        buf.extend_from_slice(&(s.original_length as u32).to_le_bytes());
        for v in &s.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(buf)
}

fn put_str(buf: &mut Vec<u8>, s: &str) {
    buf.extend_from_slice(&(s.len() as u32).to_le_bytes());
    buf.extend_from_slice(s.as_bytes());
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &'static str) -> Result<&'a [u8]> {
        let available = self.bytes.len() - self.pos;
        if n > available {
            return Err(Error::Truncated {
                what,
                needed: n,
                available,
            });
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u8(&mut self, what: &'static str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u16(&mut self, what: &'static str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    fn u32(&mut self, what: &'static str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &'static str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn string(&mut self, what: &'static str) -> Result<String> {
        let n = self.u32(what)? as usize;
        let raw = self.take(n, what)?;
        String::from_utf8(raw.to_vec())
            .map_err(|_| Error::InvalidArgument(format!("{what} is not valid UTF-8")))
    }
}

pub fn decode_canonical(bytes: &[u8]) -> Result<Dataset> {
    let mut r = Reader { bytes, pos: 0 };
    let magic: [u8; 4] = r.take(4, "magic")?.try_into().unwrap();
    if magic != MAGIC {
        return Err(Error::BadMagic {
            expected: MAGIC,
            found: magic,
        });
    }
    let version = r.u16("version")?;
    if version != CANONICAL_VERSION {
        return Err(Error::UnsupportedVersion {
            found: version as u32,
            supported: CANONICAL_VERSION as u32,
        });
    }
    let role_byte = r.u8("role")?;
    let role = Role::from_byte(role_byte)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown role byte {role_byte}")))?;
    let name = r.string("dataset name")?;
    let l_max = r.u32("l_max")? as usize;
    let n_labels = r.u32("label count")? as usize;
    let label_names = (0..n_labels)
        .map(|_| r.string("label name"))
        .collect::<Result<Vec<_>>>()?;
    let count = r.u64("series count")? as usize;
    let record = 8 + 4 * l_max;
    let remaining = bytes.len() - r.pos;
    if count.saturating_mul(record) > remaining {
        return Err(Error::Truncated {
            what: "series payload",
            needed: count.saturating_mul(record),
            available: remaining,
        });
    }
    let mut series = Vec::with_capacity(count);
    for _ in 0..count {
        let label = r.u32("series label")?;
        let original_length = r.u32("series length")? as usize;
        let values = r
            .take(4 * l_max, "series samples")?
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        series.push(TimeSeries {
            values,
            original_length,
            label,
        });
    }
    if r.pos != bytes.len() {
        return Err(Error::InvalidArgument(format!(
            "{} trailing bytes after canonical dataset",
            bytes.len() - r.pos
        )));
    }
    let ds = Dataset {
        name,
        role,
        series,
        label_names,
        l_max,
    };
    ds.validate()?;
    Ok(ds)
}

pub fn save_canonical(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_canonical(dataset)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn load_canonical(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_canonical(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(values: &[f32], label: ClassId) -> TimeSeries {
        TimeSeries::new(values.to_vec(), label)
    }

    #[test]
    fn single_line_tab() {
        let ds = parse_ucr_str("x", "x", "1\t0.5\t0.7\n", Delimiter::Auto).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.series[0].values, vec![0.5, 0.7]);
        assert_eq!(ds.label_names, vec!["1"]);
    }

    #[test]
    fn labels_sorted_numerically_and_canonicalized() {
        let text = "1.0000000e+00 1 2\n-1 3 4\n10,5\n";
        let ds = parse_ucr_str("x", "x", &text.replace(",", " "), Delimiter::Auto).unwrap();
        assert_eq!(ds.label_names, vec!["-1", "1", "10"]);
        assert_eq!(ds.series.iter().map(|s| s.label).collect::<Vec<_>>(), vec![1, 0, 2]);
        assert_eq!(ds.l_max, 2);
    }

    #[test]
    fn ragged_lengths_allowed() {
        let ds = parse_ucr_str("x", "x", "0,1,2,3\n1,4\n", Delimiter::Comma).unwrap();
        assert_eq!(ds.series[0].original_length, 3);
        assert_eq!(ds.series[1].original_length, 1);
        assert_eq!(ds.l_max, 3);
        assert!(!ds.is_padded());
    }

    #[test]
    fn non_numeric_reports_line() {
        let err = parse_ucr_str("x", "f.tsv", "1\t0.5\n2\tabc\n", Delimiter::Tab).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_input_rejected() {
        assert!(matches!(
            parse_ucr_str("x", "x", "\n  \n", Delimiter::Auto),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn mitbih_zero_line() {
        let line = format!("{},0\n", vec!["0.0"; 187].join(","));
        let ds = parse_mitbih_str("m", "m", &line).unwrap();
        assert_eq!(ds.series[0].values, vec![0.0; 187]);
        assert_eq!(ds.class_name(ds.series[0].label), "N");
        assert_eq!(ds.num_classes(), 5);
        assert_eq!(ds.l_max, 187);
    }

    #[test]
    fn mitbih_rejects_label_seven() {
        let text = "0.1,0.2,0.0\n0.1,0.2,7\n";
        match parse_mitbih_str("m", "m", text).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn minmax_examples() {
        assert_eq!(scale_minmax(&ts(&[2.0, 4.0, 6.0], 0)).values, vec![0.0, 0.5, 1.0]);
        assert_eq!(scale_minmax(&ts(&[5.0, 5.0, 5.0], 0)).values, vec![0.0; 3]);
    }

    #[test]
    fn padding_examples() {
        let p = pad_to(&ts(&[0.1, 0.2], 0), 4).unwrap();
        assert_eq!(p.values, vec![0.1, 0.2, 0.0, 0.0]);
        assert_eq!(p.original_length, 2);
        assert!(pad_to(&ts(&[0.0; 200], 0), 187).is_err());
    }

    #[test]
    fn scaling_ignores_padding() {
        let mut s = ts(&[3.0, 5.0], 0);
        s = pad_to(&s, 4).unwrap();
        s.values[2] = -100.0; // would dominate the minimum if included
        let scaled = scale_minmax(&s);
        assert_eq!(&scaled.values[..2], &[0.0, 1.0]);
    }

    #[test]
    fn per_dataset_scaling() {
        let ds = Dataset {
            name: "d".into(),
            role: Role::Train,
            series: vec![ts(&[0.0, 2.0], 0), ts(&[4.0, 4.0], 1)],
            label_names: vec!["a".into(), "b".into()],
            l_max: 2,
        };
        let out = scale_dataset(&ds, ScalingMode::PerDataset);
        assert_eq!(out.series[0].values, vec![0.0, 0.5]);
        assert_eq!(out.series[1].values, vec![1.0, 1.0]);
    }

    #[test]
    fn concat_merges_labels() {
        let a = parse_ucr_str("a", "a", "1,0,1\n2,1,0\n", Delimiter::Comma).unwrap();
        let b = parse_ucr_str("b", "b", "2,5,5,5\n3,1,1\n", Delimiter::Comma).unwrap();
        let ds = Dataset::concat("ab", vec![a, b]).unwrap();
        assert_eq!(ds.label_names, vec!["1", "2", "3"]);
        assert_eq!(ds.series.iter().map(|s| s.label).collect::<Vec<_>>(), vec![0, 1, 1, 2]);
        assert_eq!(ds.l_max, 3);
    }

    fn sample_dataset() -> Dataset {
        let raw = parse_ucr_str("toy", "toy", "1,1,2,3\n2,9,8\n1,0.5,0.25,4,4\n", Delimiter::Comma).unwrap();
        prepare(&raw, 6, ScalingMode::PerSeries).unwrap().with_role(Role::Validation)
    }

    #[test]
    fn canonical_round_trip() {
        let ds = sample_dataset();
        let bytes = encode_canonical(&ds).unwrap();
        assert_eq!(&bytes[..4], b"FSTS");
        assert_eq!(decode_canonical(&bytes).unwrap(), ds);
    }

    #[test]
    fn canonical_distinct_errors() {
        let bytes = encode_canonical(&sample_dataset()).unwrap();

        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(decode_canonical(&bad), Err(Error::BadMagic { .. })));

        let mut bad = bytes.clone();
        bad[4] = 9;
        assert!(matches!(decode_canonical(&bad), Err(Error::UnsupportedVersion { found: 9, .. })));

        assert!(matches!(
            decode_canonical(&bytes[..bytes.len() - 3]),
            Err(Error::Truncated { .. })
        ));
    }

    #[test]
    fn empty_dataset_not_saved() {
        let mut ds = sample_dataset();
        ds.series.clear();
        assert!(encode_canonical(&ds).is_err());
    }

    #[test]
    fn unpadded_dataset_not_saved() {
        let raw = parse_ucr_str("toy", "toy", "1,1,2,3\n2,9,8\n", Delimiter::Comma).unwrap();
        assert!(encode_canonical(&raw).is_err());
    }
}
