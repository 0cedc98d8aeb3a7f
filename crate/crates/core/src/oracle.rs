//! Deterministic quadrature of entropy, mutual information and
//! Kullback-Leibler integrals for dimensions 1 and 2.
//!
//! Integrals run over a box of `domain_halfwidth` kernel standard
//! deviations around the kernel location. Log families are integrated in
//! log coordinates `x = ln y`, where the integrand is smooth and the
//! `1/y` factor disappears.

use crate::distributions::{Block, DistributionSpec, LogDensity, Partition, SkewnessMatrix};
use crate::error::{Error, Result};
use crate::numerics::normal::{std_normal_cdf, std_normal_pdf};
use crate::numerics::quad::{integrate, uniform_breaks, QuadTolerance};

const SEGMENTS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    /// Half-width of the integration box in kernel standard deviations.
    pub domain_halfwidth: f64,
    /// Subdivision budget for each one-dimensional integral.
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            abs_tol: 1e-7,
            domain_halfwidth: 10.0,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureConfig {
    pub fn new(abs_tol: f64, domain_halfwidth: f64, max_subdivisions: usize) -> Result<Self> {
        let cfg = QuadratureConfig {
            abs_tol,
            domain_halfwidth,
            max_subdivisions,
        };
        if abs_tol.is_nan()
            || abs_tol <= 0.0
            || domain_halfwidth.is_nan()
            || domain_halfwidth <= 0.0
            || max_subdivisions == 0
        {
            return Err(Error::InvalidParameter(format!("invalid quadrature settings {cfg:?}")));
        }
        if cfg.tail_bound(2, 2) > abs_tol / 10.0 {
            return Err(Error::InvalidParameter(format!(
                "half-width {domain_halfwidth} leaves tail mass above abs_tol / 10"
            )));
        }
        Ok(cfg)
    }

    /// Bound on the `-f ln f` mass outside the box for an n-dimensional
    /// kernel skewed by at most `2^m`: per coordinate,
    /// `int_{|z|>h} phi(z)(z^2/2 + c) dz <= h phi(h) + (1 + 2c) Q(h)`.
    pub fn tail_bound(&self, n: usize, m: usize) -> f64 {
        let h = self.domain_halfwidth;
        let q = std_normal_cdf(-h);
        let c = 0.5 * (2.0 * std::f64::consts::PI).ln() + m as f64 * std::f64::consts::LN_2 + h;
        let per = h * std_normal_pdf(h) + (1.0 + 2.0 * c) * q;
        n as f64 * 2f64.powi(m as i32) * per
    }
}

/// Location and kernel scale per coordinate of the base (pre-exp) law.
fn kernel_box(spec: &DistributionSpec) -> (Vec<f64>, Vec<f64>) {
    match spec.base() {
        DistributionSpec::Normal { mu, sigma } | DistributionSpec::SkewNormal { mu, sigma, .. } => {
            (vec![mu], vec![sigma])
        }
        DistributionSpec::Cfusn(c) => (
            c.loc().mu().iter().copied().collect(),
            c.loc().sigma().entries().diagonal().iter().map(|v| v.sqrt()).collect(),
        ),
        _ => unreachable!("base() never returns a log family"),
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n > 2 {
        return Err(Error::DimensionTooLarge { max: 2, found: n });
    }
    Ok(())
}

/// Integrates `f` over the box `[lo, hi]` in one or two dimensions by
/// nested adaptive Gauss-Kronrod.
fn integrate_box<F>(f: F, lo: &[f64], hi: &[f64], cfg: &QuadratureConfig) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let mut err: Option<Error> = None;
    let value = match lo.len() {
        1 => {
            let tol = QuadTolerance::new(cfg.abs_tol, 0.0, cfg.max_subdivisions);
            integrate(
                |x| {
                    f(&[x]).unwrap_or_else(|e| {
                        err.get_or_insert(e);
                        0.0
                    })
                },
                &uniform_breaks(lo[0], hi[0], SEGMENTS),
                tol,
            )?
            .value
        }
        2 => {
            let outer = QuadTolerance::new(0.5 * cfg.abs_tol, 0.0, cfg.max_subdivisions);
            let inner = QuadTolerance::new(0.25 * cfg.abs_tol / (hi[0] - lo[0]), 0.0, cfg.max_subdivisions);
            let inner_breaks = uniform_breaks(lo[1], hi[1], SEGMENTS);
            let mut inner_err: Option<Error> = None;
            let v = integrate(
                |x| {
                    let r = integrate(
                        |y| {
                            f(&[x, y]).unwrap_or_else(|e| {
                                inner_err.get_or_insert(e);
                                0.0
                            })
                        },
                        &inner_breaks,
                        inner,
                    );
                    match r {
                        Ok(r) => r.value,
                        Err(e) => {
                            inner_err.get_or_insert(e);
                            0.0
                        }
                    }
                },
                &uniform_breaks(lo[0], hi[0], SEGMENTS),
                outer,
            )?
            .value;
            if let Some(e) = inner_err {
                err = Some(e);
            }
            v
        }
        n => return Err(Error::DimensionTooLarge { max: 2, found: n }),
    };
    match err {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

fn bounds(spec: &DistributionSpec, cfg: &QuadratureConfig) -> (Vec<f64>, Vec<f64>) {
    let (c, s) = kernel_box(spec);
    let h = cfg.domain_halfwidth;
    (
        c.iter().zip(&s).map(|(c, s)| c - h * s).collect(),
        c.iter().zip(&s).map(|(c, s)| c + h * s).collect(),
    )
}

/// `ln f` of `spec` at the point whose base coordinates are `x`, together
/// with the log of the Jacobian `prod_i y_i` for log families.
fn log_density_at(spec: &DistributionSpec, x: &[f64]) -> Result<(f64, f64)> {
    if spec.is_log_family() {
        let y: Vec<f64> = x.iter().map(|v| v.exp()).collect();
        Ok((spec.log_pdf(&y)?, x.iter().sum()))
    } else {
        Ok((spec.log_pdf(x)?, 0.0))
    }
}

/// `-int f ln f`, with `0 ln 0 = 0`.
pub fn entropy_quadrature(spec: &DistributionSpec, cfg: &QuadratureConfig) -> Result<f64> {
    check_dim(spec.dim())?;
    let (lo, hi) = bounds(spec, cfg);
    integrate_box(
        |x| {
            let (lf, jac) = log_density_at(spec, x)?;
            if lf == f64::NEG_INFINITY {
                return Ok(0.0);
            }
            Ok(-(lf + jac).exp() * lf)
        },
        &lo,
        &hi,
        cfg,
    )
}

/// Entropy of a univariate log family integrated directly over `y > 0`,
/// on geometrically spaced segments. Less accurate than
/// [`entropy_quadrature`]; kept as a check on the change of variables.
pub fn entropy_quadrature_direct(spec: &DistributionSpec, cfg: &QuadratureConfig) -> Result<f64> {
    if spec.dim() != 1 || !spec.is_log_family() {
        return Err(Error::Unsupported(
            "direct quadrature is for univariate log families".into(),
        ));
    }
    let (lo, hi) = bounds(spec, cfg);
    let breaks: Vec<f64> = uniform_breaks(lo[0], hi[0], 4 * SEGMENTS)
        .iter()
        .map(|t| t.exp())
        .collect();
    let mut err: Option<Error> = None;
    let r = integrate(
        |y| match spec.log_pdf(&[y]) {
            Ok(l) if l == f64::NEG_INFINITY => 0.0,
            Ok(l) => -l.exp() * l,
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        },
        &breaks,
        QuadTolerance::new(cfg.abs_tol, 0.0, cfg.max_subdivisions),
    )?;
    match err {
        Some(e) => Err(e),
        None => Ok(r.value),
    }
}

/// Mutual information between the two coordinates of
/// `CFUSN_{2,m}(Delta)` (equal to that of `LCFUSN_{2,m}(Delta)`).
pub fn mi_quadrature(delta: &SkewnessMatrix, part: &Partition, cfg: &QuadratureConfig) -> Result<f64> {
    check_dim(delta.n())?;
    part.check(delta.n())?;
    let joint = DistributionSpec::Cfusn(crate::distributions::Cfusn::canonical(delta.clone()));
    let f1 = joint.marginal(part, Block::First)?;
    let f2 = joint.marginal(part, Block::Second)?;
    let (i1, i2) = (part.range(Block::First).start, part.range(Block::Second).start);
    let h = cfg.domain_halfwidth;
    integrate_box(
        |x| {
            let lf = joint.log_pdf(x)?;
            if lf == f64::NEG_INFINITY {
                return Ok(0.0);
            }
            let l1 = f1.log_pdf(&[x[i1]])?;
            let l2 = f2.log_pdf(&[x[i2]])?;
            Ok(lf.exp() * (lf - (l1 + l2)))
        },
        &[-h, -h],
        &[h, h],
        cfg,
    )
}

/// `int f ln(f / g)`. Both laws must live on the same support.
pub fn kl_quadrature<G: LogDensity>(f: &DistributionSpec, g: &G, cfg: &QuadratureConfig) -> Result<f64> {
    check_dim(f.dim())?;
    if f.positive_support() != g.positive_support() {
        return Err(Error::SupportMismatch);
    }
    if f.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: g.dim(),
        });
    }
    let (lo, hi) = bounds(f, cfg);
    integrate_box(
        |x| {
            let (lf, jac) = log_density_at(f, x)?;
            if lf == f64::NEG_INFINITY {
                return Ok(0.0);
            }
            let lg = if f.is_log_family() {
                let y: Vec<f64> = x.iter().map(|v| v.exp()).collect();
                g.log_pdf(&y)?
            } else {
                g.log_pdf(x)?
            };
            Ok((lf + jac).exp() * (lf - lg))
        },
        &lo,
        &hi,
        cfg,
    )
}
