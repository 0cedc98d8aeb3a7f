//! JSON distribution files and header-free CSV parameter files.
//!
//! ```json
//! { "family": "lcfusn", "mu": "mu.csv", "sigma": "sigma.csv", "delta": [[0.5], [0.3]] }
//! ```
//!
//! Parameters may be inline numbers, vectors, or matrices, or a path to a CSV
//! file (relative to the JSON file). Univariate families take `sigma` as the
//! scale or `sigma2` as the variance.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::information::LsnSpec;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Param {
    Scalar(f64),
    Vector(Vec<f64>),
    Matrix(Vec<Vec<f64>>),
    Path(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    family: String,
    mu: Option<Param>,
    sigma: Option<Param>,
    sigma2: Option<f64>,
    alpha: Option<Param>,
    delta: Option<Param>,
}

/// Reads a header-free, comma-separated numeric table.
pub fn read_csv_matrix(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_csv_matrix(&text, &path.display().to_string(), false)
}

/// Like [`read_csv_matrix`] but skips a leading non-numeric header row.
pub fn read_points(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_csv_matrix(&text, &path.display().to_string(), true)
}

fn parse_csv_matrix(text: &str, origin: &str, allow_header: bool) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse(format!("{origin}: {e}")))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        let row = match parsed {
            Ok(r) => r,
            Err(_) if allow_header && rows.is_empty() && line == 1 => continue,
            Err(e) => return Err(Error::Parse(format!("{origin}:{line}: {e}"))),
        };
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse(format!(
                    "{origin}:{line}: expected {} columns, found {}",
                    first.len(),
                    row.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse(format!("{origin}: no data rows")));
    }
    Ok(rows)
}

fn resolve(p: &Param, base: &Path) -> Result<Vec<Vec<f64>>> {
    Ok(match p {
        Param::Scalar(v) => vec![vec![*v]],
        Param::Vector(v) => v.iter().map(|&x| vec![x]).collect(),
        Param::Matrix(m) => {
            if let Some(first) = m.first() {
                if m.iter().any(|r| r.len() != first.len()) {
                    return Err(Error::Parse("ragged inline matrix".into()));
                }
            }
            m.clone()
        }
        Param::Path(s) => read_csv_matrix(&base.join(s))?,
    })
}

fn to_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 {
        return Err(Error::Parse("empty matrix".into()));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

/// Row or column vector, flattened.
fn to_vector(rows: &[Vec<f64>], what: &str) -> Result<DVector<f64>> {
    let m = to_matrix(rows)?;
    if m.ncols() != 1 && m.nrows() != 1 {
        return Err(Error::Parse(format!(
            "{what} must be a vector, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(DVector::from_iterator(m.len(), m.iter().copied()))
}

fn to_scalar(rows: &[Vec<f64>], what: &str) -> Result<f64> {
    match rows {
        [row] if row.len() == 1 => Ok(row[0]),
        _ => Err(Error::Parse(format!("{what} must be a scalar"))),
    }
}

fn need<'a>(p: &'a Option<Param>, what: &str, family: &str) -> Result<&'a Param> {
    p.as_ref()
        .ok_or_else(|| Error::Parse(format!("family '{family}' needs '{what}'")))
}

fn univariate_scale(raw: &RawSpec, base: &Path) -> Result<f64> {
    match (&raw.sigma, raw.sigma2) {
        (Some(_), Some(_)) => Err(Error::Parse("give either 'sigma' or 'sigma2', not both".into())),
        (Some(s), None) => to_scalar(&resolve(s, base)?, "sigma"),
        (None, Some(v)) if v > 0.0 => Ok(v.sqrt()),
        (None, Some(v)) => Err(Error::InvalidParameter(format!("sigma2 must be positive, got {v}"))),
        (None, None) => Ok(1.0),
    }
}

fn json_error(origin: &str, e: serde_json::Error) -> Error {
    Error::Parse(format!("{origin}:{}:{}: {e}", e.line(), e.column()))
}

fn parse_raw(text: &str, origin: &str) -> Result<RawSpec> {
    serde_json::from_str(text).map_err(|e| json_error(origin, e))
}

/// Builds a spec from JSON text; CSV paths are resolved against `base`.
pub fn parse_spec(text: &str, base: &Path, origin: &str) -> Result<DistributionSpec> {
    let raw = parse_raw(text, origin)?;
    let fam = raw.family.to_ascii_lowercase();
    let scalar = |p: &Option<Param>, what: &str, default: f64| -> Result<f64> {
        match p {
            Some(p) => to_scalar(&resolve(p, base)?, what),
            None => Ok(default),
        }
    };
    match fam.as_str() {
        "normal" | "lognormal" | "sn" | "lsn" => {
            if raw.delta.is_some() {
                return Err(Error::Parse(format!("{origin}: family '{fam}' takes no 'delta'")));
            }
            let mu = scalar(&raw.mu, "mu", 0.0)?;
            let sigma = univariate_scale(&raw, base)?;
            let alpha = || scalar(&raw.alpha, "alpha", 0.0);
            match fam.as_str() {
                "normal" => DistributionSpec::normal(mu, sigma),
                "lognormal" => DistributionSpec::log_normal(mu, sigma),
                "sn" => DistributionSpec::skew_normal(mu, sigma, alpha()?),
                _ => DistributionSpec::log_skew_normal(mu, sigma, alpha()?),
            }
        }
        "cfusn" | "lcfusn" => {
            if raw.alpha.is_some() || raw.sigma2.is_some() {
                return Err(Error::Parse(format!("{origin}: family '{fam}' takes mu, sigma, delta")));
            }
            let delta = to_matrix(&resolve(need(&raw.delta, "delta", &fam)?, base)?)?;
            let n = delta.nrows();
            let mu = match &raw.mu {
                Some(p) => to_vector(&resolve(p, base)?, "mu")?,
                None => DVector::zeros(n),
            };
            let sigma = match &raw.sigma {
                Some(p) => to_matrix(&resolve(p, base)?)?,
                None => DMatrix::identity(n, n),
            };
            if fam == "cfusn" {
                DistributionSpec::cfusn(mu, sigma, delta)
            } else {
                DistributionSpec::lcfusn(mu, sigma, delta)
            }
        }
        other => Err(Error::Parse(format!("{origin}: unknown family '{other}'"))),
    }
}

/// Builds a (possibly multivariate) LSN law from JSON text with
/// `family: "lsn"`, vector `mu`/`alpha` and matrix `sigma`.
pub fn parse_lsn(text: &str, base: &Path, origin: &str) -> Result<LsnSpec> {
    let raw = parse_raw(text, origin)?;
    if !raw.family.eq_ignore_ascii_case("lsn") {
        return Err(Error::Parse(format!(
            "{origin}: expected family 'lsn', got '{}'",
            raw.family
        )));
    }
    if raw.delta.is_some() {
        return Err(Error::Parse(format!("{origin}: family 'lsn' takes no 'delta'")));
    }
    let alpha = to_vector(&resolve(need(&raw.alpha, "alpha", "lsn")?, base)?, "alpha")?;
    let n = alpha.len();
    let mu = match &raw.mu {
        Some(p) => to_vector(&resolve(p, base)?, "mu")?,
        None => DVector::zeros(n),
    };
    let sigma = match (&raw.sigma, raw.sigma2) {
        (Some(p), None) => {
            let m = to_matrix(&resolve(p, base)?)?;
            if n == 1 && m.len() == 1 {
                // univariate files give the scale, not the variance
                DMatrix::from_element(1, 1, m[(0, 0)] * m[(0, 0)])
            } else {
                m
            }
        }
        (None, Some(v)) if n == 1 => DMatrix::from_element(1, 1, v),
        (None, None) => DMatrix::identity(n, n),
        _ => return Err(Error::Parse(format!("{origin}: ambiguous scale for 'lsn'"))),
    };
    LsnSpec::new(mu, sigma, alpha)
}

fn read_text(path: &Path) -> Result<(String, PathBuf)> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((text, base))
}

pub fn load_spec(path: &Path) -> Result<DistributionSpec> {
    let (text, base) = read_text(path)?;
    parse_spec(&text, &base, &path.display().to_string())
}

pub fn load_lsn(path: &Path) -> Result<LsnSpec> {
    let (text, base) = read_text(path)?;
    parse_lsn(&text, &base, &path.display().to_string())
}
