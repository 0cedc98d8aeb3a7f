//! Shannon entropy (nats) for the six families.
//!
//! Every skew entropy splits into an analytic part and the single
//! expectation `E[ln(2^m Phi_m(Delta' X0 | Delta*))]`, `X0 ~ CFUSN_{n,m}(Delta)`,
//! which is estimated by Monte Carlo.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::distributions::{alpha_to_delta, Cfusn, DistributionSpec, SkewnessMatrix};
use crate::error::{Error, Result};
use crate::numerics::normal::{half_normal_mean, log_std_normal_cdf, LN2};
use crate::numerics::SymPosDefMatrix;
use crate::stream::{sharded_moments, Moments, SeedStream};
use rand::Rng;
use rand_distr::StandardNormal;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// A point estimate split into its analytic and sampled parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub value: f64,
    /// Monte Carlo standard error of `mc_part`; 0 when nothing is sampled.
    pub std_error: f64,
    pub n_samples: usize,
    pub closed_form_part: f64,
    pub mc_part: f64,
    /// Upper bound on the bias from inexact CDF evaluation.
    pub bias_bound: f64,
}

impl McEstimate {
    pub fn exact(value: f64) -> Self {
        McEstimate {
            value,
            std_error: 0.0,
            n_samples: 0,
            closed_form_part: value,
            mc_part: 0.0,
            bias_bound: 0.0,
        }
    }

    fn from_parts(closed: f64, mc: f64, std_error: f64, n_samples: usize, bias_bound: f64) -> Self {
        McEstimate {
            value: closed + mc,
            std_error,
            n_samples,
            closed_form_part: closed,
            mc_part: mc,
            bias_bound,
        }
    }

    fn from_moments(closed: f64, sign: f64, m: &Moments) -> Self {
        Self::from_parts(closed, sign * m.mean, m.std_error(), m.count as usize, m.bias)
    }

    /// All fields multiplied by `factor` (e.g. `1 / ln 2` for bits).
    pub fn scaled(&self, factor: f64) -> Self {
        McEstimate {
            value: self.value * factor,
            std_error: self.std_error * factor.abs(),
            n_samples: self.n_samples,
            closed_form_part: self.closed_form_part * factor,
            mc_part: self.mc_part * factor,
            bias_bound: self.bias_bound * factor.abs(),
        }
    }
}

/// `H_N(mu, sigma^2) = ln(sigma^2)/2 + (1 + ln 2 pi)/2`.
pub fn normal_entropy(sigma: f64) -> f64 {
    0.5 * (sigma * sigma).ln() + 0.5 * (1.0 + LN_2PI)
}

/// `ln|Sigma|/2 + n(1 + ln 2 pi)/2`.
pub fn mvn_entropy(sigma: &SymPosDefMatrix) -> f64 {
    0.5 * sigma.logdet() + 0.5 * sigma.dim() as f64 * (1.0 + LN_2PI)
}

/// Entropy of the exactly solvable families: Normal, Log-Normal, and the
/// multivariate (log-)normal given as CFUSN / LCFUSN with `Delta = 0`.
pub fn entropy_closed(spec: &DistributionSpec) -> Result<f64> {
    match spec {
        DistributionSpec::Normal { sigma, .. } => Ok(normal_entropy(*sigma)),
        DistributionSpec::LogNormal { mu, sigma } => Ok(normal_entropy(*sigma) + mu),
        DistributionSpec::Cfusn(c) if c.skew().is_zero() => Ok(mvn_entropy(c.loc().sigma())),
        DistributionSpec::LogCfusn(c) if c.skew().is_zero() => Ok(mvn_entropy(c.loc().sigma()) + c.loc().mu().sum()),
        other => Err(Error::Unsupported(format!(
            "no closed-form entropy for {}",
            other.describe()
        ))),
    }
}

/// `E[ln(2^m Phi_m(Delta' X0 | Delta*))]` with `X0 ~ CFUSN_{n,m}(Delta)`.
pub fn skew_correction(delta: &SkewnessMatrix, stream: &SeedStream, n_samples: usize) -> Result<McEstimate> {
    check_samples(n_samples)?;
    if delta.is_zero() {
        return Ok(McEstimate::from_parts(0.0, 0.0, 0.0, n_samples, 0.0));
    }
    let m = sharded_moments(stream, n_samples, |rng| {
        let x0 = delta.sample_canonical(rng);
        delta.log_skew_factor(x0.as_slice())
    })?;
    Ok(McEstimate::from_moments(0.0, 1.0, &m))
}

/// `E[ln 2 Phi(alpha X0)]` with `X0 ~ SN(0, 1, alpha)`, on the scalar
/// erf path.
pub fn skew_correction_univariate(alpha: f64, stream: &SeedStream, n_samples: usize) -> Result<McEstimate> {
    check_samples(n_samples)?;
    if alpha == 0.0 {
        return Ok(McEstimate::from_parts(0.0, 0.0, 0.0, n_samples, 0.0));
    }
    let r = (1.0 + alpha * alpha).sqrt();
    let (d, c) = (alpha / r, 1.0 / r);
    let m = sharded_moments(stream, n_samples, |rng| {
        let u: f64 = rng.sample::<f64, _>(StandardNormal).abs();
        let v: f64 = rng.sample(StandardNormal);
        let x0 = d * u + c * v;
        Ok((LN2 + log_std_normal_cdf(alpha * x0), 0.0))
    })?;
    Ok(McEstimate::from_moments(0.0, 1.0, &m))
}

fn check_samples(n_samples: usize) -> Result<()> {
    if n_samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be positive".into()));
    }
    Ok(())
}

/// Residuals this close to zero are rounding noise from cancelling terms.
fn snap(residual: f64, delta: &SkewnessMatrix) -> f64 {
    let scale = delta.n() as f64 + delta.matrix().norm_squared();
    if residual.abs() <= 64.0 * f64::EPSILON * scale {
        0.0
    } else {
        residual
    }
}

/// `(1/2) sum_i E(X_i0^2) - n/2` from the first two moments of `X0`.
fn second_moment_excess(delta: &SkewnessMatrix) -> f64 {
    let mean = delta.canonical_mean();
    let var = delta.canonical_variance();
    let excess: f64 = (0..delta.n()).map(|i| (var[(i, i)] - 1.0) + mean[i] * mean[i]).sum();
    snap(0.5 * excess, delta)
}

/// `(1/pi)[-sum_ij Delta_ij^2 + sum_i (sum_j Delta_ij)^2]`.
pub fn expansion_bracket(delta: &DMatrix<f64>) -> f64 {
    let sq: f64 = delta.iter().map(|v| v * v).sum();
    let rows: f64 = delta.row_iter().map(|r| r.sum().powi(2)).sum();
    (rows - sq) / std::f64::consts::PI
}

/// `sum_i E(X_i)` for `X ~ CFUSN(mu, Sigma, Delta)`.
fn mean_sum(c: &Cfusn) -> f64 {
    c.mean().sum()
}

fn cfusn_closed(c: &Cfusn) -> f64 {
    mvn_entropy(c.loc().sigma()) + second_moment_excess(c.skew())
}

/// Monte Carlo entropy. Normal kernels are returned exactly.
pub fn entropy_mc(spec: &DistributionSpec, stream: &SeedStream, n_samples: usize) -> Result<McEstimate> {
    match *spec {
        DistributionSpec::Normal { .. } | DistributionSpec::LogNormal { .. } => {
            Ok(McEstimate::exact(entropy_closed(spec)?))
        }
        DistributionSpec::SkewNormal { sigma, alpha, .. } => {
            let s = skew_correction_univariate(alpha, stream, n_samples)?;
            Ok(combine(normal_entropy(sigma), &s))
        }
        DistributionSpec::LogSkewNormal { mu, sigma, alpha } => {
            let s = skew_correction_univariate(alpha, stream, n_samples)?;
            let mean = mu + sigma * half_normal_mean() * alpha_to_delta(alpha);
            Ok(combine(normal_entropy(sigma) + mean, &s))
        }
        DistributionSpec::Cfusn(ref c) => {
            let s = skew_correction(c.skew(), stream, n_samples)?;
            Ok(combine(cfusn_closed(c), &s))
        }
        DistributionSpec::LogCfusn(ref c) => {
            let s = skew_correction(c.skew(), stream, n_samples)?;
            Ok(combine(cfusn_closed(c) + mean_sum(c), &s))
        }
    }
}

fn combine(closed: f64, skew: &McEstimate) -> McEstimate {
    McEstimate::from_parts(
        closed,
        0.0 - skew.mc_part,
        skew.std_error,
        skew.n_samples,
        skew.bias_bound,
    )
}

/// Closed form where one exists, Monte Carlo otherwise.
pub fn entropy(spec: &DistributionSpec, stream: &SeedStream, n_samples: usize) -> Result<McEstimate> {
    match entropy_closed(spec) {
        Ok(v) => Ok(McEstimate::exact(v)),
        Err(Error::Unsupported(_)) => entropy_mc(spec, stream, n_samples),
        Err(e) => Err(e),
    }
}

/// CFUSN entropy with the second-moment sum replaced by its explicit
/// polynomial in `Delta`. The polynomial vanishes when `Delta' Delta` is
/// diagonal.
pub fn entropy_expanded_cfusn(
    delta: &SkewnessMatrix,
    sigma: &SymPosDefMatrix,
    stream: &SeedStream,
    n_samples: usize,
) -> Result<McEstimate> {
    if sigma.dim() != delta.n() {
        return Err(Error::DimensionMismatch {
            expected: delta.n(),
            found: sigma.dim(),
        });
    }
    let closed = mvn_entropy(sigma) + snap(expansion_bracket(delta.matrix()), delta);
    let s = skew_correction(delta, stream, n_samples)?;
    Ok(combine(closed, &s))
}

/// Grid families for entropy curves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurveFamily {
    /// `SN(0, sigma^2, alpha)` over `alpha`.
    SkewNormal { sigma: f64 },
    /// `LSN(0, sigma^2, alpha)` over `alpha`.
    LogSkewNormal { sigma: f64 },
    /// `CFUSN_{1,2}((d1, d2))` over `(d1, d2)`.
    Cfusn12,
}

impl CurveFamily {
    pub fn arity(&self) -> usize {
        match self {
            CurveFamily::Cfusn12 => 2,
            _ => 1,
        }
    }

    pub fn spec(&self, point: &[f64]) -> Result<DistributionSpec> {
        if point.len() != self.arity() {
            return Err(Error::DimensionMismatch {
                expected: self.arity(),
                found: point.len(),
            });
        }
        match *self {
            CurveFamily::SkewNormal { sigma } => DistributionSpec::skew_normal(0.0, sigma, point[0]),
            CurveFamily::LogSkewNormal { sigma } => DistributionSpec::log_skew_normal(0.0, sigma, point[0]),
            CurveFamily::Cfusn12 => DistributionSpec::cfusn(
                nalgebra::DVector::zeros(1),
                DMatrix::identity(1, 1),
                DMatrix::from_row_slice(1, 2, point),
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub coords: Vec<f64>,
    pub estimate: McEstimate,
}

/// Entropy at each grid point. Every point reuses the same random stream,
/// so neighbouring estimates share their sampling noise.
pub fn entropy_curve(
    family: CurveFamily,
    grid: &[Vec<f64>],
    stream: &SeedStream,
    n_samples: usize,
) -> Result<Vec<CurvePoint>> {
    grid.iter()
        .map(|p| {
            let spec = family.spec(p)?;
            Ok(CurvePoint {
                coords: p.clone(),
                estimate: entropy_mc(&spec, stream, n_samples)?,
            })
        })
        .collect()
}
