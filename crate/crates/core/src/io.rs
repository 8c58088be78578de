//! CSV input and output for partitions and labeled datasets, and the JSON
//! comparison report.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::clustering::Dataset;
use crate::concordance::{CardinalIndices, ComparisonResult};
use crate::crisp::{ari_cardinals, pair_counts, rand_index, related_indices};
use crate::expectation::ExpectationMode;
use crate::partition::{CrispPartition, FuzzyPartition};
use crate::{Error, Result};

/// Parsing options for membership matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CsvOptions {
    pub delimiter: u8,
    /// `None` detects a header from the first row.
    pub header: Option<bool>,
    /// Divide each row by its sum instead of rejecting rows that do not sum to 1.
    pub renormalize: bool,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            delimiter: b',',
            header: None,
            renormalize: false,
        }
    }
}

struct Table {
    path: PathBuf,
    /// 1-based source line of each record.
    lines: Vec<usize>,
    records: Vec<Vec<String>>,
}

impl Table {
    fn read(path: &Path, delimiter: u8) -> Result<Self> {
        let file = File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .delimiter(delimiter)
            .from_reader(file);
        let mut lines = Vec::new();
        let mut records = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            if rec.iter().all(str::is_empty) {
                continue;
            }
            lines.push(rec.position().map_or(0, |p| p.line() as usize));
            records.push(rec.iter().map(str::to_string).collect());
        }
        if records.is_empty() {
            return Err(Error::Empty);
        }
        Ok(Self {
            path: path.to_path_buf(),
            lines,
            records,
        })
    }

    fn parse_error(&self, rec: usize, col: usize, msg: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line: self.lines[rec],
            col: col + 1,
            msg: msg.into(),
        }
    }

    fn width(&self) -> usize {
        self.records[0].len()
    }
}

fn is_number(s: &str) -> bool {
    s.parse::<f64>().is_ok()
}

/// A first row is a header when any cell is non-numeric while the cell below
/// it is numeric, or when every cell is non-numeric.
fn looks_like_header(records: &[Vec<String>], skip_col: Option<usize>) -> bool {
    let first = &records[0];
    let cols = || (0..first.len()).filter(|&j| Some(j) != skip_col);
    if cols().all(|j| !is_number(&first[j])) {
        return true;
    }
    match records.get(1) {
        Some(second) => cols().any(|j| !is_number(&first[j]) && second.get(j).is_some_and(|s| is_number(s))),
        None => false,
    }
}

/// Read an `n x K` membership matrix.
pub fn read_membership_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<FuzzyPartition> {
    let t = Table::read(path.as_ref(), opts.delimiter)?;
    let header = opts.header.unwrap_or_else(|| looks_like_header(&t.records, None));
    let start = usize::from(header);
    if t.records.len() <= start {
        return Err(Error::Empty);
    }
    let k = t.records[start].len();
    let mut data = Vec::with_capacity((t.records.len() - start) * k);
    for rec in start..t.records.len() {
        let row = &t.records[rec];
        if row.len() != k {
            return Err(t.parse_error(
                rec,
                row.len().min(k),
                format!("expected {k} columns, found {}", row.len()),
            ));
        }
        for (j, cell) in row.iter().enumerate() {
            let v: f64 = cell
                .parse()
                .map_err(|_| t.parse_error(rec, j, format!("not a number: {cell:?}")))?;
            data.push(v);
        }
    }
    let n = t.records.len() - start;
    let built = if opts.renormalize {
        FuzzyPartition::renormalized(data, n, k)
    } else {
        FuzzyPartition::new(data, n, k)
    };
    built.map_err(|e| match e {
        Error::RowSum { row, sum, tolerance } => t.parse_error(
            row + start,
            0,
            format!("row {row} sums to {sum}, expected 1 within {tolerance:e} (use renormalize to rescale)"),
        ),
        Error::MembershipOutOfRange { row, col, value } => {
            t.parse_error(row + start, col, format!("membership {value} outside [0, 1]"))
        }
        Error::NonFinite { row, col } => t.parse_error(row + start, col, "non-finite membership"),
        other => other,
    })
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Write memberships with shortest round-trip formatting, so reading the file
/// back yields bit-identical values.
pub fn write_membership_csv(path: impl AsRef<Path>, p: &FuzzyPartition, header: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path.as_ref())?);
    if header {
        w.write_record((1..=p.k()).map(|c| format!("cluster_{c}")))?;
    }
    for row in p.rows() {
        w.write_record(row.iter().map(f64::to_string))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Map raw label strings to `0..K` in sorted order of the distinct values.
/// Values are compared numerically when every label parses as a number.
pub fn encode_labels(raw: &[String]) -> Result<CrispPartition> {
    let numeric: Option<Vec<f64>> = raw.iter().map(|s| s.parse::<f64>().ok()).collect();
    let labels = match numeric {
        Some(vals) => {
            let mut distinct = vals.clone();
            distinct.sort_by(f64::total_cmp);
            distinct.dedup();
            vals.iter()
                .map(|v| distinct.binary_search_by(|d| d.total_cmp(v)).expect("value present"))
                .collect()
        }
        None => {
            let mut distinct: Vec<&str> = raw.iter().map(String::as_str).collect();
            distinct.sort_unstable();
            distinct.dedup();
            raw.iter()
                .map(|s| distinct.binary_search(&s.as_str()).expect("value present"))
                .collect()
        }
    };
    CrispPartition::new(labels)
}

/// Read a one-column label file (integers or strings, optional header).
pub fn read_labels(path: impl AsRef<Path>) -> Result<CrispPartition> {
    let t = Table::read(path.as_ref(), b',')?;
    if let Some(rec) = t.records.iter().position(|r| r.len() != 1) {
        return Err(t.parse_error(
            rec,
            1,
            format!("label files have one column, found {}", t.records[rec].len()),
        ));
    }
    let header = t.records.len() > 1 && !is_number(&t.records[0][0]) && is_number(&t.records[1][0]);
    let raw: Vec<String> = t.records[usize::from(header)..].iter().map(|r| r[0].clone()).collect();
    encode_labels(&raw)
}

pub fn write_labels(path: impl AsRef<Path>, p: &CrispPartition) -> Result<()> {
    let mut f = std::io::BufWriter::new(create(path.as_ref())?);
    let io_err = |source| Error::Io {
        path: path.as_ref().to_path_buf(),
        source,
    };
    for l in p.labels() {
        writeln!(f, "{l}").map_err(io_err)?;
    }
    f.flush().map_err(io_err)?;
    Ok(())
}

/// How to interpret a partition file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputFormat {
    /// One integer column is a label file, anything else a membership matrix.
    #[default]
    Auto,
    Labels,
    Membership,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PartitionInput {
    Crisp(CrispPartition),
    Fuzzy(FuzzyPartition),
}

impl PartitionInput {
    pub fn to_fuzzy(&self) -> FuzzyPartition {
        match self {
            Self::Crisp(c) => c.to_fuzzy(),
            Self::Fuzzy(f) => f.clone(),
        }
    }

    /// Crisp view: label files directly, membership files if every row is one-hot.
    pub fn as_crisp(&self) -> Option<CrispPartition> {
        match self {
            Self::Crisp(c) => Some(c.clone()),
            Self::Fuzzy(f) => f.to_crisp(),
        }
    }
}

pub fn read_partition(path: impl AsRef<Path>, format: InputFormat, opts: &CsvOptions) -> Result<PartitionInput> {
    let path = path.as_ref();
    let format = match format {
        InputFormat::Auto => {
            let t = Table::read(path, opts.delimiter)?;
            let body = &t.records[usize::from(t.records.len() > 1 && !is_number(&t.records[0][0]))..];
            let one_int_column = t.width() == 1
                && t.records.iter().all(|r| r.len() == 1)
                && body.iter().all(|r| r[0].parse::<i64>().is_ok());
            if one_int_column {
                InputFormat::Labels
            } else {
                InputFormat::Membership
            }
        }
        f => f,
    };
    match format {
        InputFormat::Labels => read_labels(path).map(PartitionInput::Crisp),
        _ => read_membership_csv(path, opts).map(PartitionInput::Fuzzy),
    }
}

/// Which column of a dataset file holds the class labels.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum LabelColumn {
    #[default]
    Last,
    /// 0-based column index.
    Index(usize),
    /// Header name; requires a header row.
    Name(String),
}

impl std::str::FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(if s == "last" {
            Self::Last
        } else if let Ok(i) = s.parse() {
            Self::Index(i)
        } else {
            Self::Name(s.to_string())
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledFile {
    pub data: Dataset,
    /// `None` when no label column was requested.
    pub labels: Option<CrispPartition>,
    pub feature_names: Vec<String>,
    pub dropped: Vec<String>,
}

impl LabeledFile {
    /// Labels, or an error naming the file when none were read.
    pub fn require_labels(&self) -> Result<&CrispPartition> {
        self.labels
            .as_ref()
            .ok_or_else(|| Error::Config("a label column is required".into()))
    }
}

/// Read a dataset whose columns are features plus one label column.
///
/// Feature columns that are not entirely numeric are dropped (logged at info
/// level). Fails with [`Error::NoNumericFeatures`] if none remain.
pub fn read_labeled_dataset(path: impl AsRef<Path>, label: &LabelColumn, delimiter: u8) -> Result<LabeledFile> {
    read_table_dataset(path.as_ref(), Some(label), delimiter)
}

/// Read a dataset with no label column. Non-numeric columns are dropped.
pub fn read_dataset(path: impl AsRef<Path>, delimiter: u8) -> Result<LabeledFile> {
    read_table_dataset(path.as_ref(), None, delimiter)
}

fn read_table_dataset(path: &Path, label: Option<&LabelColumn>, delimiter: u8) -> Result<LabeledFile> {
    let t = Table::read(path, delimiter)?;
    let width = t.width();
    if let Some(rec) = t.records.iter().position(|r| r.len() != width) {
        return Err(t.parse_error(
            rec,
            t.records[rec].len().min(width),
            format!("expected {width} columns, found {}", t.records[rec].len()),
        ));
    }
    let label_col = match label {
        None => None,
        Some(LabelColumn::Last) => Some(width - 1),
        Some(LabelColumn::Index(i)) if *i < width => Some(*i),
        Some(LabelColumn::Index(i)) => {
            return Err(Error::Config(format!(
                "label column {i} out of range for {width} columns"
            )))
        }
        Some(LabelColumn::Name(name)) => Some(
            t.records[0]
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Config(format!("no column named {name:?}")))?,
        ),
    };
    let header = matches!(label, Some(LabelColumn::Name(_))) || looks_like_header(&t.records, label_col);
    let body = &t.records[usize::from(header)..];
    if body.len() < 2 {
        return Err(Error::TooFewObjects(body.len()));
    }
    let name_of = |j: usize| {
        if header {
            t.records[0][j].clone()
        } else {
            format!("column {}", j + 1)
        }
    };
    let mut features = Vec::new();
    let mut dropped = Vec::new();
    for j in (0..width).filter(|&j| Some(j) != label_col) {
        let numeric = body.iter().all(|r| r[j].parse::<f64>().is_ok_and(f64::is_finite));
        if numeric {
            features.push(j);
        } else {
            log::info!("dropping non-numeric column {:?}", name_of(j));
            dropped.push(name_of(j));
        }
    }
    if features.is_empty() {
        return Err(Error::NoNumericFeatures);
    }
    let data = body
        .iter()
        .flat_map(|r| {
            features
                .iter()
                .map(move |&j| r[j].parse::<f64>().expect("checked numeric"))
        })
        .collect();
    let labels = match label_col {
        Some(col) => Some(encode_labels(&body.iter().map(|r| r[col].clone()).collect::<Vec<_>>())?),
        None => None,
    };
    Ok(LabeledFile {
        data: Dataset::new(data, body.len(), features.len())?,
        labels,
        feature_names: features.into_iter().map(name_of).collect(),
        dropped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportCardinals {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub mode: ExpectationMode,
    pub h: usize,
    pub seed: u64,
    pub enumeration_limit: usize,
}

/// Classical indices, present when both inputs are crisp.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrispReport {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
    pub rand: f64,
    pub ari: Option<f64>,
    pub jaccard: Option<f64>,
    pub fowlkes_mallows: Option<f64>,
    pub mirkin: f64,
    pub dice: Option<f64>,
}

impl CrispReport {
    pub fn new(p: &CrispPartition, q: &CrispPartition) -> Result<Self> {
        let pc = pair_counts(p, q)?;
        let idx = related_indices(&pc);
        Ok(Self {
            a: pc.a,
            b: pc.b,
            c: pc.c,
            d: pc.d,
            rand: rand_index(&pc)?,
            ari: ari_cardinals(&pc).ok(),
            jaccard: idx.jaccard,
            fowlkes_mallows: idx.fowlkes_mallows,
            mirkin: idx.mirkin,
            dice: idx.dice,
        })
    }
}

/// Flat JSON report of one comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub version: String,
    pub ndc: f64,
    pub expected_ndc: f64,
    pub aci: f64,
    pub aci_clamped: f64,
    pub mc_std_error: Option<f64>,
    pub degenerate: bool,
    pub cardinals: ReportCardinals,
    pub indices: CardinalIndices,
    pub config: ReportConfig,
    pub m: usize,
    pub n: usize,
    pub crisp: Option<CrispReport>,
}

impl ComparisonReport {
    pub fn new(r: &ComparisonResult, crisp: Option<CrispReport>) -> Self {
        Self {
            version: crate::VERSION.to_string(),
            ndc: r.ndc,
            expected_ndc: r.expected_ndc,
            aci: r.aci,
            aci_clamped: r.aci_clamped,
            mc_std_error: r.mc_std_error,
            degenerate: r.degenerate,
            cardinals: ReportCardinals {
                a: r.cardinals.a,
                b: r.cardinals.b,
                c: r.cardinals.c,
                d: r.cardinals.d,
            },
            indices: r.indices,
            config: ReportConfig {
                mode: r.config.mode,
                h: r.config.h,
                seed: r.config.seed,
                enumeration_limit: r.config.enumeration_limit,
            },
            m: r.m,
            n: r.n,
            crisp,
        }
    }

    /// Plain-text summary, 4 decimals.
    pub fn to_text(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "undefined".to_string(), |v| format!("{v:.4}"));
        let mut s = format!(
            "n = {}, pairs = {}\nNDC            {:.4}\nexpected NDC   {:.4} ({}",
            self.n, self.m, self.ndc, self.expected_ndc, self.config.mode
        );
        if let Some(se) = self.mc_std_error {
            s += &format!(", h = {}, seed = {}, s.e. = {se:.2e}", self.config.h, self.config.seed);
        }
        s += ")\n";
        s += &format!(
            "ACI            {:.4}\nACI (clamped)  {:.4}\n",
            self.aci, self.aci_clamped
        );
        if self.degenerate {
            s += "note: expected NDC is 1, ACI reported as 0\n";
        }
        let c = &self.cardinals;
        s += &format!(
            "cardinals      a = {:.4}, b = {:.4}, c = {:.4}, d = {:.4}\n",
            c.a, c.b, c.c, c.d
        );
        s += &format!(
            "fuzzy indices  rand = {}, jaccard = {}, fowlkes_mallows = {}, dice = {}, mirkin = {:.4}\n",
            opt(self.indices.rand),
            opt(self.indices.jaccard),
            opt(self.indices.fowlkes_mallows),
            opt(self.indices.dice),
            self.indices.mirkin
        );
        if let Some(k) = &self.crisp {
            s += &format!(
                "crisp          a = {}, b = {}, c = {}, d = {}\n               RI = {:.4}, ARI = {}, jaccard = {}, fowlkes_mallows = {}, mirkin = {}, dice = {}\n",
                k.a,
                k.b,
                k.c,
                k.d,
                k.rand,
                opt(k.ari),
                opt(k.jaccard),
                opt(k.fowlkes_mallows),
                k.mirkin,
                opt(k.dice)
            );
        }
        s
    }
}
