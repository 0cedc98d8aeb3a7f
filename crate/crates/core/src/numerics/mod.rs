//! Linear algebra and normal-distribution kernels shared by every other
//! module.

pub mod linalg;
pub mod mvn;
pub mod normal;
pub mod quad;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub use linalg::{chol_decompose, sym_inv_sqrt, sym_sqrt, SymPosDefMatrix};
pub use mvn::{mvn_cdf, GaussianKernelResult, MvnCdf, MvnOptions};
pub use normal::{log_std_normal_cdf, std_normal_cdf, std_normal_pdf, std_normal_quantile};

/// Fills `out` with i.i.d. standard normal draws.
pub fn fill_std_normal<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    for v in out.iter_mut() {
        *v = rng.sample(StandardNormal);
    }
}

/// Draws `mean + scale_root * z` with `z ~ N(0, I)`.
pub fn mvn_sample<R: Rng + ?Sized>(
    rng: &mut R,
    mean: &DVector<f64>,
    scale_root: &DMatrix<f64>,
) -> Result<DVector<f64>> {
    let n = mean.len();
    if scale_root.nrows() != n || scale_root.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: scale_root.nrows().max(scale_root.ncols()),
        });
    }
    let mut z = DVector::zeros(n);
    fill_std_normal(rng, z.as_mut_slice());
    Ok(mean + scale_root * z)
}
