//! Small complex-vector helpers shared across modules.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

/// Conjugated inner product `a^H b`.
pub(crate) fn cdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Squared Euclidean norm.
pub(crate) fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum()
}

/// `y += alpha * x`, elementwise.
pub(crate) fn axpy(y: &mut [Complex64], alpha: Complex64, x: &[Complex64]) {
    debug_assert_eq!(y.len(), x.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// One draw from a circularly-symmetric complex Gaussian with the given
/// variance (total power split evenly between real and imaginary parts).
pub(crate) fn complex_normal<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let scale = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(scale * re, scale * im)
}
