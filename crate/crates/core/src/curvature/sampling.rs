//! Random shape operators and spectra for fuzzing the algebra.

use nalgebra::DMatrix;
use rand::Rng;

use super::PrincipalSpectrum;

/// Symmetric `m x m` form with entries uniform in `[-1, 1]`.
pub fn random_symmetric_form<R: Rng + ?Sized>(rng: &mut R, m: usize) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(m, m);
    for r in 0..m {
        for c in r..m {
            let v = rng.gen_range(-1.0..=1.0);
            a[(r, c)] = v;
            a[(c, r)] = v;
        }
    }
    a
}

/// Spectrum with entries uniform in `(0, 1]`.
pub fn random_positive_spectrum<R: Rng + ?Sized>(rng: &mut R, m: usize) -> PrincipalSpectrum {
    let k = (0..m).map(|_| 1.0 - rng.gen::<f64>()).collect();
    PrincipalSpectrum::new(k).expect("finite positive spectrum")
}

/// Orthogonal matrix from the QR factorization of a Gaussian-like matrix.
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R, m: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(m, m, |_, _| rng.gen_range(-1.0..=1.0));
    g.qr().q()
}
