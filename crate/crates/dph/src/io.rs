//! File formats: headerless dataset CSV, model JSON, the generating-direction
//! sidecar, and result tables.

use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use dph_core::data::normalize_dataset;
use dph_core::{Dataset, Label, LabeledExample};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Reads `label,x1,...,xd` rows with labels `+1`/`-1`. Rows are scaled to unit
/// norm unless `normalize` is false.
pub fn read_dataset(path: &Path, normalize: bool) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 1;
        let record = record.map_err(|e| csv_error(path, e))?;
        let parse_err = |msg: String| CliError::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        let mut fields = record.iter();
        let label = fields.next().unwrap_or("");
        let y = label
            .trim_start_matches('+')
            .parse::<i64>()
            .ok()
            .and_then(Label::from_i64)
            .ok_or_else(|| parse_err(format!("label must be +1 or -1, got {label:?}")))?;
        let x = fields
            .map(|f| f.parse::<f64>().map_err(|_| parse_err(format!("not a number: {f:?}"))))
            .collect::<Result<Vec<f64>>>()?;
        if x.is_empty() || x.iter().any(|v| !v.is_finite()) {
            return Err(parse_err("need at least one finite coordinate".into()));
        }
        rows.push((x, y));
    }
    let ds = if normalize {
        normalize_dataset(rows)?
    } else {
        Dataset::new(rows.into_iter().map(|(x, y)| LabeledExample::new(x, y)).collect())?
    };
    Ok(ds)
}

pub fn write_dataset(path: &Path, data: &Dataset) -> Result<()> {
    let mut w = create(path)?;
    for e in data.iter() {
        write!(w, "{}", e.y.as_i8()).map_err(|err| CliError::io(path, err))?;
        for v in &e.x {
            write!(w, ",{v}").map_err(|err| CliError::io(path, err))?;
        }
        writeln!(w).map_err(|err| CliError::io(path, err))?;
    }
    w.flush().map_err(|err| CliError::io(path, err))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::Parse {
            path: path.to_path_buf(),
            line,
            msg: format!("{other:?}"),
        },
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

/// Generating direction of a synthetic dataset. Evaluation input only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WStarFile {
    pub d: usize,
    pub gamma: f64,
    pub seed: u64,
    pub w_star: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelMetadata {
    pub m: usize,
    pub m_overridden: bool,
    pub beta_jl: f64,
    pub projection_seed: u64,
    pub projection_resampled: bool,
    pub runs: Option<usize>,
    pub sigma2: Option<f64>,
    pub eps_run: Option<f64>,
    pub delta_run: Option<f64>,
    pub eps_select: f64,
    pub net_size: Option<u64>,
    pub net_spacing: Option<f64>,
    pub degenerate_output: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub millis: Option<u64>,
}

impl ModelMetadata {
    pub fn new(meta: &dph_core::LearnerMetadata, millis: Option<u64>) -> Self {
        ModelMetadata {
            m: meta.m,
            m_overridden: meta.m_overridden,
            beta_jl: meta.beta_jl,
            projection_seed: meta.projection_seed,
            projection_resampled: meta.projection_resampled,
            runs: meta.runs,
            sigma2: meta.sigma2,
            eps_run: meta.eps_run,
            delta_run: meta.delta_run,
            eps_select: meta.eps_select,
            net_size: meta.net_size,
            net_spacing: meta.net_spacing,
            degenerate_output: meta.degenerate_output,
            millis,
        }
    }
}

/// A learned classifier with the parameters that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub algo: String,
    pub d: usize,
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    /// Unit-norm direction in the input space.
    pub w: Vec<f64>,
    /// Direction chosen in the projected space.
    pub w_projected: Vec<f64>,
    pub metadata: ModelMetadata,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("plain data serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        msg: e.to_string(),
    })
}

/// Default sidecar location next to a dataset file.
pub fn wstar_path(dataset: &Path) -> PathBuf {
    let mut s = dataset.as_os_str().to_owned();
    s.push(".wstar.json");
    PathBuf::from(s)
}

/// Where CSV tables go.
pub enum Sink {
    Stdout,
    File(PathBuf),
}

impl Sink {
    pub fn from_option(path: &Option<PathBuf>) -> Self {
        match path {
            Some(p) => Sink::File(p.clone()),
            None => Sink::Stdout,
        }
    }
}

/// Writes `header` and `rows`. With `append` and an existing non-empty file the
/// rows are added after a header check instead.
pub fn write_table(sink: &Sink, header: &[&str], rows: &[Vec<String>], append: bool) -> Result<()> {
    match sink {
        Sink::Stdout => {
            let mut w = csv::Writer::from_writer(std::io::stdout().lock());
            emit(&mut w, Some(header), rows).map_err(|e| csv_error(Path::new("<stdout>"), e))
        }
        Sink::File(path) => {
            let existing = append && std::fs::metadata(path).map(|m| m.len() > 0).unwrap_or(false);
            if existing {
                let (found, _) = read_table(path)?;
                if found != header {
                    return Err(CliError::Parse {
                        path: path.clone(),
                        line: 1,
                        msg: "unexpected CSV header".into(),
                    });
                }
                let file = OpenOptions::new()
                    .append(true)
                    .open(path)
                    .map_err(|e| CliError::io(path, e))?;
                let mut w = csv::Writer::from_writer(file);
                emit(&mut w, None, rows).map_err(|e| csv_error(path, e))
            } else {
                let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
                emit(&mut w, Some(header), rows).map_err(|e| csv_error(path, e))
            }
        }
    }
}

fn emit<W: Write>(w: &mut csv::Writer<W>, header: Option<&[&str]>, rows: &[Vec<String>]) -> csv::Result<()> {
    if let Some(h) = header {
        w.write_record(h)?;
    }
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Header and rows of a CSV file written by [`write_table`].
pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let header = reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for r in reader.records() {
        rows.push(r.map_err(|e| csv_error(path, e))?.iter().map(str::to_string).collect());
    }
    Ok((header, rows))
}
