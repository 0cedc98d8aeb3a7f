#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use skewinfo::numerics::normal::std_normal_cdf;
use skewinfo::oracle::QuadratureConfig;
use skewinfo::DistributionSpec;

pub const H_N01: f64 = 1.418_938_533_204_672_7;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random SPD matrix with diagonal roughly in [0.3, 3].
pub fn random_sigma(r: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| r.random_range(-1.0..1.0));
    let s = &a * a.transpose() / n as f64 + DMatrix::identity(n, n) * r.random_range(0.3..1.0);
    0.5 * (&s + s.transpose())
}

/// Random skewness matrix with spectral norm in [0.05, max_norm].
pub fn random_delta(r: &mut ChaCha8Rng, n: usize, m: usize, max_norm: f64) -> DMatrix<f64> {
    let raw = DMatrix::from_fn(n, m, |_, _| r.random_range(-1.0..1.0));
    let norm: f64 = raw.clone().svd(false, false).singular_values.max();
    let target = r.random_range(0.05..max_norm);
    raw * (target / norm.max(1e-12))
}

pub fn random_mu(r: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| r.random_range(-1.0..1.0))
}

pub fn random_cfusn(r: &mut ChaCha8Rng, n: usize, m: usize, log: bool) -> DistributionSpec {
    let mu = random_mu(r, n);
    let sigma = random_sigma(r, n);
    let delta = random_delta(r, n, m, 0.9);
    if log {
        DistributionSpec::lcfusn(mu, sigma, delta).unwrap()
    } else {
        DistributionSpec::cfusn(mu, sigma, delta).unwrap()
    }
}

/// `n x m` skewness with orthogonal columns of length below one.
pub fn orthogonal_delta(r: &mut ChaCha8Rng, n: usize, m: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, m, |_, _| r.random_range(-1.0..1.0));
    let q = a.qr().q();
    let scales = DMatrix::from_diagonal(&DVector::from_fn(m, |_, _| r.random_range(0.1..0.9)));
    q.columns(0, m).into_owned() * scales
}

pub fn quad_cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

/// Kolmogorov-Smirnov statistic of `draws` against a continuous CDF.
pub fn ks_statistic(draws: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    draws.sort_by(f64::total_cmp);
    let n = draws.len() as f64;
    draws
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic 1% critical value of the one-sample KS statistic.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.627_6 / (n as f64).sqrt()
}

/// CDF tabulated by integrating `pdf` on a fine grid of `[lo, hi]`, with
/// linear interpolation between nodes.
pub struct TabulatedCdf {
    nodes: Vec<f64>,
    values: Vec<f64>,
}

impl TabulatedCdf {
    pub fn new(pdf: impl Fn(f64) -> f64, lo: f64, hi: f64, cells: usize) -> Self {
        use skewinfo::numerics::quad::{integrate, QuadTolerance};
        let h = (hi - lo) / cells as f64;
        let mut nodes = vec![lo];
        let mut values = vec![0.0];
        let mut acc = 0.0;
        for i in 0..cells {
            let a = lo + i as f64 * h;
            let b = a + h;
            acc += integrate(&pdf, &[a, b], QuadTolerance::new(1e-13, 1e-10, 50))
                .unwrap()
                .value;
            nodes.push(b);
            values.push(acc);
        }
        TabulatedCdf { nodes, values }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.nodes.len();
        if x <= self.nodes[0] {
            return 0.0;
        }
        if x >= self.nodes[n - 1] {
            return self.values[n - 1];
        }
        let h = self.nodes[1] - self.nodes[0];
        let i = (((x - self.nodes[0]) / h) as usize).min(n - 2);
        let t = (x - self.nodes[i]) / h;
        self.values[i] + t * (self.values[i + 1] - self.values[i])
    }

    pub fn total(&self) -> f64 {
        *self.values.last().unwrap()
    }
}

pub fn phi(x: f64) -> f64 {
    std_normal_cdf(x)
}

pub fn combined_se(ses: &[f64]) -> f64 {
    ses.iter().map(|s| s * s).sum::<f64>().sqrt()
}
