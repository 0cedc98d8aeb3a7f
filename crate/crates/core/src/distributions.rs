//! The six distribution families: Normal, Log-Normal, Skew-Normal,
//! Log-Skew-Normal, the canonical fundamental skew-normal (CFUSN) in
//! location-scale form, and its componentwise exponential (LCFUSN).
//!
//! CFUSN draws use the convolution representation
//! `X0 = Delta |U| + (I_n - Delta Delta')^{1/2} V` with `U ~ N_m(0, I)` and
//! `V ~ N_n(0, I)`, followed by `X = mu + Sigma^{1/2} X0`.

use std::fmt;
use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numerics::normal::{half_normal_mean, log_std_normal_cdf, log_std_normal_pdf, LN2};
use crate::numerics::{chol_decompose, sym_inv_sqrt, sym_sqrt, MvnCdf, MvnOptions, SymPosDefMatrix};

/// Anything with a log-density on `R^n` (or the positive orthant).
pub trait LogDensity {
    fn dim(&self) -> usize;
    fn log_pdf(&self, x: &[f64]) -> Result<f64>;
    /// True when the support is the open positive orthant.
    fn positive_support(&self) -> bool;
}

/// Skewness matrix `Delta` (n x m) with `||Delta a|| < 1` for all unit `a`.
#[derive(Debug, Clone)]
pub struct SkewnessMatrix {
    delta: DMatrix<f64>,
    delta_star: SymPosDefMatrix,
    cdf: MvnCdf,
    /// `(I_n - Delta Delta')^{1/2}`
    residual_root: DMatrix<f64>,
    zero: bool,
}

impl PartialEq for SkewnessMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.delta == other.delta
    }
}

impl SkewnessMatrix {
    pub fn new(delta: DMatrix<f64>) -> Result<Self> {
        Self::with_options(delta, MvnOptions::default())
    }

    pub fn with_options(delta: DMatrix<f64>, opts: MvnOptions) -> Result<Self> {
        let (n, m) = delta.shape();
        if n == 0 || m == 0 {
            return Err(Error::InvalidParameter(format!(
                "skewness matrix must be non-empty, got {n}x{m}"
            )));
        }
        if delta.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("skewness matrix has non-finite entries".into()));
        }
        let ds = DMatrix::identity(m, m) - delta.transpose() * &delta;
        let delta_star = chol_decompose(&ds).map_err(|e| match e {
            Error::NotPositiveDefinite { pivot, value } => Error::InvalidSkewness { pivot, value },
            other => other,
        })?;
        let residual = DMatrix::identity(n, n) - &delta * delta.transpose();
        let residual_root = sym_sqrt(&chol_decompose(&residual).map_err(|e| match e {
            Error::NotPositiveDefinite { pivot, value } => Error::InvalidSkewness { pivot, value },
            other => other,
        })?);
        let zero = delta.iter().all(|&v| v == 0.0);
        Ok(SkewnessMatrix {
            cdf: MvnCdf::new(delta_star.clone(), opts),
            delta,
            delta_star,
            residual_root,
            zero,
        })
    }

    pub fn zeros(n: usize, m: usize) -> Result<Self> {
        Self::new(DMatrix::zeros(n, m))
    }

    /// Column vector `(d_1, .., d_n)'` as an n x 1 matrix.
    pub fn column(values: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_column_slice(values.len(), 1, values))
    }

    pub fn n(&self) -> usize {
        self.delta.nrows()
    }

    pub fn m(&self) -> usize {
        self.delta.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.delta
    }

    /// `I_m - Delta' Delta`
    pub fn delta_star(&self) -> &SymPosDefMatrix {
        &self.delta_star
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    /// `ln(2^m Phi_m(Delta' z | Delta*))` and a bound on its error coming
    /// from the CDF evaluation.
    pub fn log_skew_factor(&self, z: &[f64]) -> Result<(f64, f64)> {
        if z.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: z.len(),
            });
        }
        if self.zero {
            return Ok((0.0, 0.0));
        }
        let upper: Vec<f64> = (0..self.m())
            .map(|j| (0..self.n()).map(|i| self.delta[(i, j)] * z[i]).sum())
            .collect();
        let (ln_p, err) = self.cdf.log_eval(&upper)?;
        let bias = if err == 0.0 { 0.0 } else { err / ln_p.exp() };
        Ok((self.m() as f64 * LN2 + ln_p, bias))
    }

    /// Rows `range` of `Delta` as a skewness matrix with the same `m`.
    pub fn rows(&self, range: Range<usize>) -> Result<SkewnessMatrix> {
        if range.start >= range.end || range.end > self.n() {
            return Err(Error::InvalidPartition(format!(
                "row range {range:?} outside 0..{}",
                self.n()
            )));
        }
        let block = self.delta.rows(range.start, range.end - range.start).into_owned();
        SkewnessMatrix::with_options(block, *self.cdf.options())
    }

    /// One draw of `X0 ~ CFUSN_{n,m}(Delta)`.
    pub fn sample_canonical<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let n = self.n();
        let mut x = DVector::zeros(n);
        for j in 0..self.m() {
            let u: f64 = rng.sample::<f64, _>(StandardNormal).abs();
            for i in 0..n {
                x[i] += self.delta[(i, j)] * u;
            }
        }
        let v: DVector<f64> = DVector::from_fn(n, |_, _| rng.sample(StandardNormal));
        x + &self.residual_root * v
    }

    /// `E(X0) = sqrt(2/pi) Delta 1_m`.
    pub fn canonical_mean(&self) -> DVector<f64> {
        DVector::from_fn(self.n(), |i, _| {
            half_normal_mean() * self.delta.row(i).iter().sum::<f64>()
        })
    }

    /// `Var(X0) = I_n - (2/pi) Delta Delta'`.
    pub fn canonical_variance(&self) -> DMatrix<f64> {
        let c = half_normal_mean().powi(2);
        DMatrix::identity(self.n(), self.n()) - &self.delta * self.delta.transpose() * c
    }
}

/// Location vector and positive-definite scale matrix with cached roots.
#[derive(Debug, Clone, PartialEq)]
pub struct LocationScale {
    mu: DVector<f64>,
    sigma: SymPosDefMatrix,
    root: DMatrix<f64>,
    inv_root: DMatrix<f64>,
}

impl LocationScale {
    pub fn new(mu: DVector<f64>, sigma: DMatrix<f64>) -> Result<Self> {
        if mu.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("location has non-finite entries".into()));
        }
        let sigma = chol_decompose(&sigma)?;
        if sigma.dim() != mu.len() {
            return Err(Error::DimensionMismatch {
                expected: mu.len(),
                found: sigma.dim(),
            });
        }
        let root = sym_sqrt(&sigma);
        let inv_root = sym_inv_sqrt(&sigma);
        Ok(LocationScale {
            mu,
            sigma,
            root,
            inv_root,
        })
    }

    pub fn canonical(n: usize) -> Self {
        LocationScale {
            mu: DVector::zeros(n),
            sigma: SymPosDefMatrix::identity(n),
            root: DMatrix::identity(n, n),
            inv_root: DMatrix::identity(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }

    pub fn sigma(&self) -> &SymPosDefMatrix {
        &self.sigma
    }

    /// Symmetric root `Sigma^{1/2}`.
    pub fn root(&self) -> &DMatrix<f64> {
        &self.root
    }

    pub fn inv_root(&self) -> &DMatrix<f64> {
        &self.inv_root
    }

    pub fn is_canonical(&self) -> bool {
        self.mu.iter().all(|&v| v == 0.0) && self.sigma.entries() == &DMatrix::identity(self.dim(), self.dim())
    }

    /// `Sigma^{-1/2} (x - mu)`
    pub fn standardize(&self, x: &[f64]) -> DVector<f64> {
        let d = DVector::from_fn(self.dim(), |i, _| x[i] - self.mu[i]);
        &self.inv_root * d
    }
}

/// `CFUSN_{n,m}(mu, Sigma, Delta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cfusn {
    loc: LocationScale,
    skew: SkewnessMatrix,
}

impl Cfusn {
    pub fn new(loc: LocationScale, skew: SkewnessMatrix) -> Result<Self> {
        if loc.dim() != skew.n() {
            return Err(Error::DimensionMismatch {
                expected: loc.dim(),
                found: skew.n(),
            });
        }
        Ok(Cfusn { loc, skew })
    }

    pub fn canonical(skew: SkewnessMatrix) -> Self {
        Cfusn {
            loc: LocationScale::canonical(skew.n()),
            skew,
        }
    }

    pub fn loc(&self) -> &LocationScale {
        &self.loc
    }

    pub fn skew(&self) -> &SkewnessMatrix {
        &self.skew
    }

    pub fn n(&self) -> usize {
        self.skew.n()
    }

    pub fn m(&self) -> usize {
        self.skew.m()
    }

    fn log_pdf(&self, w: &[f64]) -> Result<f64> {
        check_dim(self.n(), w)?;
        let z = self.loc.standardize(w);
        let kernel: f64 = z.iter().map(|&v| log_std_normal_pdf(v)).sum();
        let (skew, _) = self.skew.log_skew_factor(z.as_slice())?;
        Ok(kernel - 0.5 * self.loc.sigma.logdet() + skew)
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let x0 = self.skew.sample_canonical(rng);
        &self.loc.mu + &self.loc.root * x0
    }

    /// `E(X) = mu + sqrt(2/pi) Sigma^{1/2} Delta 1_m`.
    pub fn mean(&self) -> DVector<f64> {
        &self.loc.mu + &self.loc.root * self.skew.canonical_mean()
    }

    /// `Var(X) = Sigma - (2/pi) Sigma^{1/2} Delta Delta' Sigma^{1/2}`.
    pub fn variance(&self) -> DMatrix<f64> {
        let c = half_normal_mean().powi(2);
        let dd = self.skew.matrix() * self.skew.matrix().transpose();
        self.loc.sigma.entries() - &self.loc.root * dd * &self.loc.root * c
    }
}

/// Split of an n-vector into a leading block of `n1` and a trailing block of
/// `n2` coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Partition {
    n1: usize,
    n2: usize,
    swapped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    First,
    Second,
}

impl Partition {
    pub fn new(n1: usize, n2: usize) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(Error::InvalidPartition(format!(
                "both blocks must be non-empty, got ({n1}, {n2})"
            )));
        }
        Ok(Partition { n1, n2, swapped: false })
    }

    pub fn n(&self) -> usize {
        self.n1 + self.n2
    }

    /// The same split with the block labels exchanged: `First` names the
    /// trailing coordinates.
    pub fn swapped(&self) -> Self {
        Partition {
            swapped: !self.swapped,
            ..*self
        }
    }

    pub fn range(&self, which: Block) -> Range<usize> {
        let leading = 0..self.n1;
        let trailing = self.n1..self.n1 + self.n2;
        match (which, self.swapped) {
            (Block::First, false) | (Block::Second, true) => leading,
            _ => trailing,
        }
    }

    pub fn check(&self, n: usize) -> Result<()> {
        if self.n() != n {
            return Err(Error::InvalidPartition(format!(
                "blocks ({}, {}) do not add up to {n}",
                self.n1, self.n2
            )));
        }
        Ok(())
    }

    /// `(Delta_1, Delta_2)` for the labelled blocks.
    pub fn split(&self, skew: &SkewnessMatrix) -> Result<(SkewnessMatrix, SkewnessMatrix)> {
        self.check(skew.n())?;
        Ok((
            skew.rows(self.range(Block::First))?,
            skew.rows(self.range(Block::Second))?,
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Normal,
    LogNormal,
    SkewNormal,
    LogSkewNormal,
    Cfusn,
    LogCfusn,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Normal => "normal",
            Family::LogNormal => "lognormal",
            Family::SkewNormal => "sn",
            Family::LogSkewNormal => "lsn",
            Family::Cfusn => "cfusn",
            Family::LogCfusn => "lcfusn",
        }
    }

    pub fn parse(name: &str) -> Option<Family> {
        Some(match name.to_ascii_lowercase().as_str() {
            "normal" | "n" => Family::Normal,
            "lognormal" | "ln" => Family::LogNormal,
            "sn" | "skewnormal" => Family::SkewNormal,
            "lsn" | "logskewnormal" => Family::LogSkewNormal,
            "cfusn" => Family::Cfusn,
            "lcfusn" => Family::LogCfusn,
            _ => return None,
        })
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A fully validated distribution. Univariate families carry the scale
/// `sigma` (standard deviation), not the variance.
#[derive(Debug, Clone, PartialEq)]
pub enum DistributionSpec {
    Normal { mu: f64, sigma: f64 },
    LogNormal { mu: f64, sigma: f64 },
    SkewNormal { mu: f64, sigma: f64, alpha: f64 },
    LogSkewNormal { mu: f64, sigma: f64, alpha: f64 },
    Cfusn(Cfusn),
    LogCfusn(Cfusn),
}

fn check_scale(mu: f64, sigma: f64) -> Result<()> {
    if !mu.is_finite() {
        return Err(Error::InvalidParameter(format!("location must be finite, got {mu}")));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!("scale must be positive, got {sigma}")));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("shape must be finite, got {alpha}")));
    }
    Ok(())
}

fn check_dim(n: usize, x: &[f64]) -> Result<()> {
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x.len(),
        });
    }
    Ok(())
}

/// Maps positive `x` to `ln x`; `Ok(None)` on the boundary, where the
/// density is taken to be zero.
fn log_coords(x: &[f64]) -> Result<Option<Vec<f64>>> {
    if x.iter().any(|&v| v < 0.0 || v.is_nan()) {
        return Err(Error::OutOfSupport(x.to_vec()));
    }
    if x.contains(&0.0) {
        return Ok(None);
    }
    Ok(Some(x.iter().map(|v| v.ln()).collect()))
}

/// `delta = alpha / sqrt(1 + alpha^2)`
pub fn alpha_to_delta(alpha: f64) -> f64 {
    alpha / (1.0 + alpha * alpha).sqrt()
}

/// `alpha = delta / sqrt(1 - delta^2)`
pub fn delta_to_alpha(delta: f64) -> f64 {
    delta / (1.0 - delta * delta).sqrt()
}

fn sn_log_pdf(mu: f64, sigma: f64, alpha: f64, x: f64) -> f64 {
    let z = (x - mu) / sigma;
    LN2 - sigma.ln() + log_std_normal_pdf(z) + log_std_normal_cdf(alpha * z)
}

fn sn_draw<R: Rng + ?Sized>(rng: &mut R, mu: f64, sigma: f64, alpha: f64) -> f64 {
    let u: f64 = rng.sample::<f64, _>(StandardNormal).abs();
    let v: f64 = rng.sample(StandardNormal);
    let r = (1.0 + alpha * alpha).sqrt();
    mu + sigma * ((alpha / r) * u + v / r)
}

impl DistributionSpec {
    pub fn normal(mu: f64, sigma: f64) -> Result<Self> {
        check_scale(mu, sigma)?;
        Ok(DistributionSpec::Normal { mu, sigma })
    }

    pub fn log_normal(mu: f64, sigma: f64) -> Result<Self> {
        check_scale(mu, sigma)?;
        Ok(DistributionSpec::LogNormal { mu, sigma })
    }

    pub fn skew_normal(mu: f64, sigma: f64, alpha: f64) -> Result<Self> {
        check_scale(mu, sigma)?;
        check_alpha(alpha)?;
        Ok(DistributionSpec::SkewNormal { mu, sigma, alpha })
    }

    pub fn log_skew_normal(mu: f64, sigma: f64, alpha: f64) -> Result<Self> {
        check_scale(mu, sigma)?;
        check_alpha(alpha)?;
        Ok(DistributionSpec::LogSkewNormal { mu, sigma, alpha })
    }

    pub fn cfusn(mu: DVector<f64>, sigma: DMatrix<f64>, delta: DMatrix<f64>) -> Result<Self> {
        let skew = SkewnessMatrix::new(delta)?;
        Ok(DistributionSpec::Cfusn(Cfusn::new(
            LocationScale::new(mu, sigma)?,
            skew,
        )?))
    }

    pub fn lcfusn(mu: DVector<f64>, sigma: DMatrix<f64>, delta: DMatrix<f64>) -> Result<Self> {
        let skew = SkewnessMatrix::new(delta)?;
        Ok(DistributionSpec::LogCfusn(Cfusn::new(
            LocationScale::new(mu, sigma)?,
            skew,
        )?))
    }

    pub fn family(&self) -> Family {
        match self {
            DistributionSpec::Normal { .. } => Family::Normal,
            DistributionSpec::LogNormal { .. } => Family::LogNormal,
            DistributionSpec::SkewNormal { .. } => Family::SkewNormal,
            DistributionSpec::LogSkewNormal { .. } => Family::LogSkewNormal,
            DistributionSpec::Cfusn(_) => Family::Cfusn,
            DistributionSpec::LogCfusn(_) => Family::LogCfusn,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            DistributionSpec::Cfusn(c) | DistributionSpec::LogCfusn(c) => c.n(),
            _ => 1,
        }
    }

    /// Columns of the skewing CDF: 0 for the normal kernels, 1 for the
    /// univariate skew families.
    pub fn skew_dim(&self) -> usize {
        match self {
            DistributionSpec::Normal { .. } | DistributionSpec::LogNormal { .. } => 0,
            DistributionSpec::SkewNormal { .. } | DistributionSpec::LogSkewNormal { .. } => 1,
            DistributionSpec::Cfusn(c) | DistributionSpec::LogCfusn(c) => c.m(),
        }
    }

    pub fn is_log_family(&self) -> bool {
        matches!(
            self,
            DistributionSpec::LogNormal { .. } | DistributionSpec::LogSkewNormal { .. } | DistributionSpec::LogCfusn(_)
        )
    }

    /// The law of `ln Y` for log families; `self` otherwise.
    pub fn base(&self) -> DistributionSpec {
        match self {
            DistributionSpec::LogNormal { mu, sigma } => DistributionSpec::Normal { mu: *mu, sigma: *sigma },
            DistributionSpec::LogSkewNormal { mu, sigma, alpha } => DistributionSpec::SkewNormal {
                mu: *mu,
                sigma: *sigma,
                alpha: *alpha,
            },
            DistributionSpec::LogCfusn(c) => DistributionSpec::Cfusn(c.clone()),
            other => other.clone(),
        }
    }

    /// Rewrites a univariate family as the equivalent `CFUSN_{1,1}` (or
    /// `LCFUSN_{1,1}`); normal kernels get `Delta = 0`.
    pub fn canonicalize(&self) -> Result<DistributionSpec> {
        let one = |mu: f64, sigma: f64, delta: f64| -> Result<Cfusn> {
            Cfusn::new(
                LocationScale::new(DVector::from_element(1, mu), DMatrix::from_element(1, 1, sigma * sigma))?,
                SkewnessMatrix::new(DMatrix::from_element(1, 1, delta))?,
            )
        };
        Ok(match *self {
            DistributionSpec::Normal { mu, sigma } => DistributionSpec::Cfusn(one(mu, sigma, 0.0)?),
            DistributionSpec::LogNormal { mu, sigma } => DistributionSpec::LogCfusn(one(mu, sigma, 0.0)?),
            DistributionSpec::SkewNormal { mu, sigma, alpha } => {
                DistributionSpec::Cfusn(one(mu, sigma, alpha_to_delta(alpha))?)
            }
            DistributionSpec::LogSkewNormal { mu, sigma, alpha } => {
                DistributionSpec::LogCfusn(one(mu, sigma, alpha_to_delta(alpha))?)
            }
            ref multi => multi.clone(),
        })
    }

    /// Inverse of [`canonicalize`](Self::canonicalize) for `n = m = 1`.
    pub fn to_univariate(&self) -> Result<DistributionSpec> {
        let (c, log) = match self {
            DistributionSpec::Cfusn(c) => (c, false),
            DistributionSpec::LogCfusn(c) => (c, true),
            other => return Ok(other.clone()),
        };
        if c.n() != 1 || c.m() != 1 {
            return Err(Error::Unsupported(format!(
                "CFUSN_{{{},{}}} has no univariate counterpart",
                c.n(),
                c.m()
            )));
        }
        let mu = c.loc.mu[0];
        let sigma = c.loc.sigma.entries()[(0, 0)].sqrt();
        let alpha = delta_to_alpha(c.skew.matrix()[(0, 0)]);
        Ok(if log {
            DistributionSpec::LogSkewNormal { mu, sigma, alpha }
        } else {
            DistributionSpec::SkewNormal { mu, sigma, alpha }
        })
    }

    /// One draw.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        match *self {
            DistributionSpec::Normal { mu, sigma } => {
                DVector::from_element(1, mu + sigma * rng.sample::<f64, _>(StandardNormal))
            }
            DistributionSpec::LogNormal { mu, sigma } => {
                DVector::from_element(1, (mu + sigma * rng.sample::<f64, _>(StandardNormal)).exp())
            }
            DistributionSpec::SkewNormal { mu, sigma, alpha } => {
                DVector::from_element(1, sn_draw(rng, mu, sigma, alpha))
            }
            DistributionSpec::LogSkewNormal { mu, sigma, alpha } => {
                DVector::from_element(1, sn_draw(rng, mu, sigma, alpha).exp())
            }
            DistributionSpec::Cfusn(ref c) => c.draw(rng),
            DistributionSpec::LogCfusn(ref c) => c.draw(rng).map(f64::exp),
        }
    }

    /// `count` i.i.d. draws as rows of a `count x n` matrix.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> DMatrix<f64> {
        let n = self.dim();
        let mut out = DMatrix::zeros(count, n);
        for r in 0..count {
            let x = self.draw(rng);
            out.row_mut(r).copy_from(&x.transpose());
        }
        out
    }

    pub fn mean(&self) -> Result<DVector<f64>> {
        match *self {
            DistributionSpec::Normal { mu, .. } => Ok(DVector::from_element(1, mu)),
            DistributionSpec::SkewNormal { mu, sigma, alpha } => Ok(DVector::from_element(
                1,
                mu + sigma * half_normal_mean() * alpha_to_delta(alpha),
            )),
            DistributionSpec::Cfusn(ref c) => Ok(c.mean()),
            _ => Err(Error::Unsupported(format!(
                "closed-form mean of the {} family",
                self.family()
            ))),
        }
    }

    pub fn variance(&self) -> Result<DMatrix<f64>> {
        match *self {
            DistributionSpec::Normal { sigma, .. } => Ok(DMatrix::from_element(1, 1, sigma * sigma)),
            DistributionSpec::SkewNormal { sigma, alpha, .. } => {
                let a2 = alpha * alpha;
                Ok(DMatrix::from_element(
                    1,
                    1,
                    sigma * sigma * (1.0 - 2.0 * a2 / (std::f64::consts::PI * (1.0 + a2))),
                ))
            }
            DistributionSpec::Cfusn(ref c) => Ok(c.variance()),
            _ => Err(Error::Unsupported(format!(
                "closed-form variance of the {} family",
                self.family()
            ))),
        }
    }

    /// Marginal law of one block of a canonical CFUSN / LCFUSN vector:
    /// `CFUSN_{n_i,m}(Delta_i)`, keeping `m`.
    pub fn marginal(&self, part: &Partition, which: Block) -> Result<DistributionSpec> {
        let (c, log) = match self {
            DistributionSpec::Cfusn(c) => (c, false),
            DistributionSpec::LogCfusn(c) => (c, true),
            other => {
                return Err(Error::Unsupported(format!(
                    "marginals of the {} family",
                    other.family()
                )))
            }
        };
        if !c.loc.is_canonical() {
            return Err(Error::Unsupported(
                "marginals are available for the canonical form (mu = 0, Sigma = I) only".into(),
            ));
        }
        part.check(c.n())?;
        let block = Cfusn::canonical(c.skew.rows(part.range(which))?);
        Ok(if log {
            DistributionSpec::LogCfusn(block)
        } else {
            DistributionSpec::Cfusn(block)
        })
    }

    /// A point-wise description for the CSV `family` column and messages.
    pub fn describe(&self) -> String {
        match self {
            DistributionSpec::Normal { mu, sigma } => format!("N({mu}, {})", sigma * sigma),
            DistributionSpec::LogNormal { mu, sigma } => format!("LN({mu}, {})", sigma * sigma),
            DistributionSpec::SkewNormal { mu, sigma, alpha } => {
                format!("SN({mu}, {}, {alpha})", sigma * sigma)
            }
            DistributionSpec::LogSkewNormal { mu, sigma, alpha } => {
                format!("LSN({mu}, {}, {alpha})", sigma * sigma)
            }
            DistributionSpec::Cfusn(c) => format!("CFUSN_{{{},{}}}", c.n(), c.m()),
            DistributionSpec::LogCfusn(c) => format!("LCFUSN_{{{},{}}}", c.n(), c.m()),
        }
    }
}

impl LogDensity for DistributionSpec {
    fn dim(&self) -> usize {
        DistributionSpec::dim(self)
    }

    fn positive_support(&self) -> bool {
        self.is_log_family()
    }

    /// Natural log of the density at `x`. Log families return `-inf` on the
    /// boundary of the orthant and `OutOfSupport` for negative coordinates.
    fn log_pdf(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x)?;
        if x.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidParameter("NaN coordinate".into()));
        }
        match *self {
            DistributionSpec::Normal { mu, sigma } => Ok(log_std_normal_pdf((x[0] - mu) / sigma) - sigma.ln()),
            DistributionSpec::SkewNormal { mu, sigma, alpha } => Ok(sn_log_pdf(mu, sigma, alpha, x[0])),
            DistributionSpec::Cfusn(ref c) => c.log_pdf(x),
            ref log_family => {
                let Some(lx) = log_coords(x)? else {
                    return Ok(f64::NEG_INFINITY);
                };
                let jac: f64 = lx.iter().sum();
                Ok(log_family.base().log_pdf(&lx)? - jac)
            }
        }
    }
}
