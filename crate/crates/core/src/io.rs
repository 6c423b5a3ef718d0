//! File formats: Jester ratings, route lists, fixed-loss vectors and the
//! results CSV with its metadata sidecar.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::RegretSeries;
use crate::scalar::Scalar;

/// Rating value that marks an unrated joke in the Jester distribution files.
pub const JESTER_UNRATED: f64 = 99.0;

/// Header line of the results CSV.
pub const RESULTS_HEADER: &str = "round,mean_cum_regret,std_cum_regret";

/// Dense users × items matrix with entries in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingsMatrix<T> {
    rows: Vec<Vec<T>>,
    source_user_ids: Vec<usize>,
}

impl<T: Scalar> RatingsMatrix<T> {
    pub fn new(rows: Vec<Vec<T>>, source_user_ids: Vec<usize>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyDataset("ratings matrix has no users".into()));
        }
        if rows.len() != source_user_ids.len() {
            return Err(Error::Shape(
                "one source id per user row is required".into(),
            ));
        }
        let items = rows[0].len();
        if items == 0 {
            return Err(Error::EmptyDataset("ratings matrix has no items".into()));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != items {
                return Err(Error::Shape(format!(
                    "user row {i} has {} items, expected {items}",
                    r.len()
                )));
            }
            if r.iter().any(|v| !(*v >= T::zero() && *v <= T::one())) {
                return Err(Error::Domain(format!(
                    "user row {i} has a rating outside [0, 1]"
                )));
            }
        }
        Ok(Self {
            rows,
            source_user_ids,
        })
    }

    pub fn users(&self) -> usize {
        self.rows.len()
    }

    pub fn items(&self) -> usize {
        self.rows[0].len()
    }

    pub fn row(&self, user: usize) -> &[T] {
        &self.rows[user]
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.rows
    }

    /// Zero-based line index of each retained user in the source file.
    pub fn source_user_ids(&self) -> &[usize] {
        &self.source_user_ids
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

/// Load a Jester ratings file.
///
/// Each line is `count, r_1, r_2, ...` with ratings in `[-10, 10]` and `99`
/// for unrated. The first `d` ratings are kept, users with any unrated joke
/// among them are dropped, and ratings are mapped to `(r + 10) / 20`.
pub fn ingest_jester(path: &Path, d: usize) -> Result<RatingsMatrix<f64>> {
    parse_jester(&read(path)?, d, path)
}

pub fn parse_jester(text: &str, d: usize, origin: &Path) -> Result<RatingsMatrix<f64>> {
    if d == 0 {
        return Err(Error::InvalidDimension(
            "jester item count must be >= 1".into(),
        ));
    }
    let mut rows = Vec::new();
    let mut ids = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() < d + 1 {
            return Err(parse_err(
                origin,
                lineno,
                format!(
                    "expected a count and at least {d} ratings, found {} fields",
                    fields.len()
                ),
            ));
        }
        fields[0].parse::<f64>().map_err(|e| {
            parse_err(
                origin,
                lineno,
                format!("bad rated-count field {:?}: {e}", fields[0]),
            )
        })?;
        let mut row = Vec::with_capacity(d);
        let mut unrated = false;
        for (col, f) in fields[1..=d].iter().enumerate() {
            let x: f64 = f.parse().map_err(|e| {
                parse_err(
                    origin,
                    lineno,
                    format!("bad rating {f:?} in column {}: {e}", col + 1),
                )
            })?;
            if x == JESTER_UNRATED {
                unrated = true;
                continue;
            }
            if !(-10.0..=10.0).contains(&x) {
                return Err(parse_err(
                    origin,
                    lineno,
                    format!("rating {x} in column {} outside [-10, 10]", col + 1),
                ));
            }
            row.push((x + 10.0) / 20.0);
        }
        if !unrated {
            rows.push(row);
            ids.push(idx);
        }
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset(format!(
            "no user in {} rated all of the first {d} jokes",
            origin.display()
        )));
    }
    RatingsMatrix::new(rows, ids)
}

/// Route list: one route per line, comma-separated zero-based edge indices.
/// Blank lines and lines starting with `#` are skipped.
pub fn read_routes(path: &Path) -> Result<Vec<Vec<usize>>> {
    parse_routes(&read(path)?, path)
}

pub fn parse_routes(text: &str, origin: &Path) -> Result<Vec<Vec<usize>>> {
    let mut routes = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let route = line
            .split(',')
            .map(|f| {
                f.trim()
                    .parse::<usize>()
                    .map_err(|e| parse_err(origin, idx + 1, format!("bad edge index {f:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        routes.push(route);
    }
    Ok(routes)
}

/// A single line of `d` comma-separated losses in `[0, 1]`.
pub fn read_loss_vector(path: &Path) -> Result<Vec<f64>> {
    parse_loss_vector(&read(path)?, path)
}

pub fn parse_loss_vector(text: &str, origin: &Path) -> Result<Vec<f64>> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (idx, line) = lines
        .next()
        .ok_or_else(|| parse_err(origin, 1, "loss file is empty"))?;
    if let Some((extra, _)) = lines.next() {
        return Err(parse_err(
            origin,
            extra + 1,
            "loss file must contain a single line",
        ));
    }
    line.split(',')
        .map(|f| {
            let v: f64 = f
                .trim()
                .parse()
                .map_err(|e| parse_err(origin, idx + 1, format!("bad loss {f:?}: {e}")))?;
            if !(0.0..=1.0).contains(&v) {
                return Err(parse_err(
                    origin,
                    idx + 1,
                    format!("loss {v} outside [0, 1]"),
                ));
            }
            Ok(v)
        })
        .collect()
}

/// `%.{digits}g`-style rendering: shortest of fixed or scientific notation with
/// trailing zeros removed.
pub fn format_significant(v: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci
        .split_once('e')
        .expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        format!("{}e{exp}", trim_zeros(mantissa))
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Path of the metadata sidecar written next to a results file.
pub fn sidecar_path(results: &Path) -> PathBuf {
    let mut s = results.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// Path of the per-round factorization trace written in verbose mode.
pub fn trace_path(results: &Path) -> PathBuf {
    let mut s = results.as_os_str().to_owned();
    s.push(".trace.csv");
    PathBuf::from(s)
}

pub fn render_results_csv<T: Scalar>(series: &RegretSeries<T>) -> String {
    let mut out = String::with_capacity(32 * (series.mean.len() + 1));
    out.push_str(RESULTS_HEADER);
    out.push('\n');
    for (t, (m, s)) in series.mean.iter().zip(&series.std).enumerate() {
        let _ = writeln!(
            out,
            "{},{},{}",
            t + 1,
            format_significant(m.as_f64(), 9),
            format_significant(s.as_f64(), 9)
        );
    }
    out
}

/// Write `round,mean_cum_regret,std_cum_regret` rows plus a JSON sidecar with
/// `metadata` (configuration, seeds, resolved parameters).
pub fn write_results_csv<T: Scalar, M: Serialize>(
    series: &RegretSeries<T>,
    metadata: &M,
    path: &Path,
) -> Result<()> {
    if series.mean.is_empty() {
        return Err(Error::InvalidHorizon(
            "refusing to write an empty regret series".into(),
        ));
    }
    fs::write(path, render_results_csv(series)).map_err(|e| Error::io(path, e))?;
    let meta = serde_json::to_string_pretty(metadata)
        .map_err(|e| Error::Config(format!("cannot serialize metadata: {e}")))?;
    let side = sidecar_path(path);
    fs::write(&side, meta + "\n").map_err(|e| Error::io(side, e))
}
