//! Mutual information between the blocks of a canonical LCFUSN vector and
//! Kullback-Leibler divergence between LCFUSN and multivariate LSN laws.

use nalgebra::{DMatrix, DVector};

use crate::distributions::{Block, Cfusn, DistributionSpec, LocationScale, LogDensity, Partition, SkewnessMatrix};
use crate::entropy::McEstimate;
use crate::error::{Error, Result};
use crate::numerics::normal::{log_std_normal_cdf, log_std_normal_pdf, LN2};
use crate::numerics::SymPosDefMatrix;
use crate::stream::{sharded_moments, SeedStream};

/// Multivariate log-skew-normal `LSN_n(mu, Sigma, alpha)`: the law of
/// `exp(X)` where `X` has density
/// `2 phi_n(x; mu, Sigma) Phi(alpha' omega^{-1} (x - mu))`,
/// `omega = diag(Sigma)^{1/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LsnSpec {
    loc: LocationScale,
    alpha: DVector<f64>,
    omega: DVector<f64>,
    /// `Sigma^{1/2} omega^{-1} alpha`, the slope in standardized coordinates.
    lambda: DVector<f64>,
}

impl LsnSpec {
    pub fn new(mu: DVector<f64>, sigma: DMatrix<f64>, alpha: DVector<f64>) -> Result<Self> {
        let loc = LocationScale::new(mu, sigma)?;
        Self::from_loc(loc, alpha)
    }

    fn from_loc(loc: LocationScale, alpha: DVector<f64>) -> Result<Self> {
        if alpha.len() != loc.dim() {
            return Err(Error::DimensionMismatch {
                expected: loc.dim(),
                found: alpha.len(),
            });
        }
        if alpha.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("shape vector has non-finite entries".into()));
        }
        let omega = loc.sigma().entries().diagonal().map(f64::sqrt);
        let scaled = alpha.component_div(&omega);
        let lambda = loc.root() * scaled;
        Ok(LsnSpec {
            loc,
            alpha,
            omega,
            lambda,
        })
    }

    /// The LSN law equal to `LCFUSN_{n,1}(mu, Sigma, Delta)`:
    /// `alpha = omega Sigma^{-1/2} Delta / sqrt(1 - Delta' Delta)`.
    pub fn matching(c: &Cfusn) -> Result<Self> {
        if c.m() != 1 {
            return Err(Error::Unsupported(format!(
                "an LSN law matches LCFUSN only for m = 1, got m = {}",
                c.m()
            )));
        }
        let d = c.skew().matrix().column(0).into_owned();
        let lambda = &d / (1.0 - d.norm_squared()).sqrt();
        let omega = c.loc().sigma().entries().diagonal().map(f64::sqrt);
        let alpha = (c.loc().inv_root() * lambda).component_mul(&omega);
        Self::from_loc(c.loc().clone(), alpha)
    }

    pub fn dim(&self) -> usize {
        self.loc.dim()
    }

    pub fn mu(&self) -> &DVector<f64> {
        self.loc.mu()
    }

    pub fn sigma(&self) -> &SymPosDefMatrix {
        self.loc.sigma()
    }

    pub fn alpha(&self) -> &DVector<f64> {
        &self.alpha
    }

    pub fn omega(&self) -> &DVector<f64> {
        &self.omega
    }

    pub fn lambda(&self) -> &DVector<f64> {
        &self.lambda
    }

    /// The same law as `LCFUSN_{n,1}(mu, Sigma, lambda / sqrt(1 + lambda' lambda))`.
    pub fn to_lcfusn(&self) -> Result<DistributionSpec> {
        let d = &self.lambda / (1.0 + self.lambda.norm_squared()).sqrt();
        let skew = SkewnessMatrix::new(DMatrix::from_column_slice(self.dim(), 1, d.as_slice()))?;
        Ok(DistributionSpec::LogCfusn(Cfusn::new(self.loc.clone(), skew)?))
    }

    /// `ln(2 Phi(lambda' x0))`, 0 when `alpha = 0`.
    fn log_skew(&self, x0: &[f64]) -> f64 {
        if self.alpha.iter().all(|&a| a == 0.0) {
            return 0.0;
        }
        let s: f64 = self.lambda.iter().zip(x0).map(|(l, x)| l * x).sum();
        LN2 + log_std_normal_cdf(s)
    }
}

impl LogDensity for LsnSpec {
    fn dim(&self) -> usize {
        self.loc.dim()
    }

    fn positive_support(&self) -> bool {
        true
    }

    fn log_pdf(&self, y: &[f64]) -> Result<f64> {
        if y.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: y.len(),
            });
        }
        if y.iter().any(|&v| v < 0.0 || v.is_nan()) {
            return Err(Error::OutOfSupport(y.to_vec()));
        }
        if y.contains(&0.0) {
            return Ok(f64::NEG_INFINITY);
        }
        let x: Vec<f64> = y.iter().map(|v| v.ln()).collect();
        let z = self.loc.standardize(&x);
        let kernel: f64 = z.iter().map(|&v| log_std_normal_pdf(v)).sum();
        Ok(kernel - 0.5 * self.loc.sigma().logdet() + self.log_skew(z.as_slice()) - x.iter().sum::<f64>())
    }
}

/// Mutual information `I(Y_1, Y_2)` between the two blocks of
/// `Y ~ LCFUSN_{n,m}(Delta)` (equivalently of the underlying CFUSN vector).
///
/// The per-sample term is
/// `ln Phi_m(Delta'x|Delta*) - m ln 2 - ln Phi_m(Delta_1'x_1|..) - ln Phi_m(Delta_2'x_2|..)`.
/// The two block terms are added before subtracting, so exchanging the
/// block labels gives a bit-identical estimate.
pub fn mutual_information(
    delta: &SkewnessMatrix,
    part: &Partition,
    stream: &SeedStream,
    n_samples: usize,
) -> Result<McEstimate> {
    if n_samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be positive".into()));
    }
    let (d1, d2) = part.split(delta)?;
    let r1 = part.range(Block::First);
    let r2 = part.range(Block::Second);
    let m_ln2 = delta.m() as f64 * LN2;
    let m = sharded_moments(stream, n_samples, |rng| {
        let x = delta.sample_canonical(rng);
        let xs = x.as_slice();
        let (joint, b0) = delta.log_skew_factor(xs)?;
        let (f1, b1) = d1.log_skew_factor(&xs[r1.clone()])?;
        let (f2, b2) = d2.log_skew_factor(&xs[r2.clone()])?;
        let blocks = (f1 - m_ln2) + (f2 - m_ln2);
        Ok(((joint - m_ln2) - blocks, b0 + b1 + b2))
    })?;
    Ok(McEstimate {
        value: -m_ln2 + m.mean,
        std_error: m.std_error(),
        n_samples: m.count as usize,
        closed_form_part: -m_ln2,
        mc_part: m.mean,
        bias_bound: m.bias,
    })
}

/// [`mutual_information`] for a spec, which must be a canonical CFUSN or
/// LCFUSN.
pub fn mutual_information_of(
    spec: &DistributionSpec,
    part: &Partition,
    stream: &SeedStream,
    n_samples: usize,
) -> Result<McEstimate> {
    match spec {
        DistributionSpec::Cfusn(c) | DistributionSpec::LogCfusn(c) if c.loc().is_canonical() => {
            mutual_information(c.skew(), part, stream, n_samples)
        }
        DistributionSpec::Cfusn(_) | DistributionSpec::LogCfusn(_) => Err(Error::Unsupported(
            "mutual information needs the canonical form (mu = 0, Sigma = I)".into(),
        )),
        other => Err(Error::Unsupported(format!(
            "mutual information of the {} family",
            other.family()
        ))),
    }
}

/// Which way round the divergence is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Direction {
    /// `D(f_Z || f_Y)`, expectation under the LCFUSN law.
    #[default]
    ZToY,
    /// `D(f_Y || f_Z)`, expectation under the LSN law.
    YToZ,
}

fn same_location_scale(a: &LocationScale, b: &LocationScale) -> Result<()> {
    let tol = |x: f64, y: f64| (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1.0);
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    if !a.mu().iter().zip(b.mu().iter()).all(|(x, y)| tol(*x, *y)) {
        return Err(Error::MismatchedLocationScale("locations differ".into()));
    }
    let (sa, sb) = (a.sigma().entries(), b.sigma().entries());
    if !sa.iter().zip(sb.iter()).all(|(x, y)| tol(*x, *y)) {
        return Err(Error::MismatchedLocationScale("scale matrices differ".into()));
    }
    Ok(())
}

/// Divergence between `Z ~ LCFUSN_{n,m}(mu, Sigma, Delta)` and
/// `Y ~ LSN_n(mu, Sigma, alpha)` sharing `(mu, Sigma)`.
///
/// The normal kernels and Jacobians cancel, leaving
/// `E[(m-1) ln 2 + ln Phi_m(Delta'X0|Delta*) - ln Phi(lambda'X0)]` over
/// `X0 ~ CFUSN_{n,m}(Delta)` for [`Direction::ZToY`].
pub fn kl_lcfusn_vs_lsn(
    z: &DistributionSpec,
    y: &LsnSpec,
    direction: Direction,
    stream: &SeedStream,
    n_samples: usize,
) -> Result<McEstimate> {
    let DistributionSpec::LogCfusn(c) = z else {
        return Err(Error::Unsupported(format!(
            "expected an LCFUSN law, got {}",
            z.family()
        )));
    };
    if n_samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be positive".into()));
    }
    same_location_scale(c.loc(), &y.loc)?;
    let skew = c.skew();
    let per_sample = |x0: &[f64]| -> Result<(f64, f64)> {
        let (zf, bias) = skew.log_skew_factor(x0)?;
        Ok((zf - y.log_skew(x0), bias))
    };
    let m = match direction {
        Direction::ZToY => sharded_moments(stream, n_samples, |rng| {
            let x0 = skew.sample_canonical(rng);
            per_sample(x0.as_slice())
        })?,
        Direction::YToZ => {
            let d = &y.lambda / (1.0 + y.lambda.norm_squared()).sqrt();
            let ysk = SkewnessMatrix::new(DMatrix::from_column_slice(y.dim(), 1, d.as_slice()))?;
            sharded_moments(stream, n_samples, |rng| {
                let x0 = ysk.sample_canonical(rng);
                per_sample(x0.as_slice()).map(|(v, b)| (-v, b))
            })?
        }
    };
    Ok(McEstimate {
        value: m.mean,
        std_error: m.std_error(),
        n_samples: m.count as usize,
        closed_form_part: 0.0,
        mc_part: m.mean,
        bias_bound: m.bias,
    })
}

/// `E_f[ln f(X) - ln g(X)]` by sampling from `f`, for any pair of
/// densities on the same support.
pub fn kl_direct<G: LogDensity + Sync>(
    f: &DistributionSpec,
    g: &G,
    stream: &SeedStream,
    n_samples: usize,
) -> Result<McEstimate> {
    if f.positive_support() != g.positive_support() {
        return Err(Error::SupportMismatch);
    }
    if LogDensity::dim(f) != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: LogDensity::dim(f),
            found: g.dim(),
        });
    }
    if n_samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be positive".into()));
    }
    let m = sharded_moments(stream, n_samples, |rng| {
        let x = f.draw(rng);
        let lf = f.log_pdf(x.as_slice())?;
        let lg = g.log_pdf(x.as_slice())?;
        if lf == f64::NEG_INFINITY {
            // underflow of exp at the boundary; contributes nothing
            return Ok((0.0, 0.0));
        }
        Ok((lf - lg, 0.0))
    })?;
    Ok(McEstimate {
        value: m.mean,
        std_error: m.std_error(),
        n_samples: m.count as usize,
        closed_form_part: 0.0,
        mc_part: m.mean,
        bias_bound: m.bias,
    })
}
