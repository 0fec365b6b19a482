//! Random algebra elements for axiom checks and randomized tests.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::algebra::{c64, AlgebraElement, BlockShape, Matrix, C64};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c64(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn gaussian_matrix<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Matrix {
    Matrix::from_fn(d, d, |_, _| gaussian(rng))
}

/// Complex Gaussian entries scaled by `1/sqrt(d)` per block.
pub fn random_element<R: Rng + ?Sized>(shape: &BlockShape, rng: &mut R) -> AlgebraElement {
    let blocks = shape
        .dims()
        .iter()
        .map(|&d| gaussian_matrix(d, rng) / c64((d as f64).sqrt(), 0.0))
        .collect();
    AlgebraElement::from_blocks(blocks).expect("shape has valid blocks")
}

/// Haar-distributed unitary from the QR factorization of a Gaussian matrix,
/// with the phases of `R`'s diagonal divided out.
pub fn random_unitary_matrix<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Matrix {
    let qr = gaussian_matrix(d, rng).qr();
    let q = qr.q();
    let r = qr.r();
    let phases = DVector::from_fn(d, |i, _| {
        let x = r[(i, i)];
        if x.norm() > 0.0 {
            x / x.norm()
        } else {
            c64(1.0, 0.0)
        }
    });
    Matrix::from_fn(d, d, |i, j| q[(i, j)] * phases[j])
}

pub fn random_unitary<R: Rng + ?Sized>(shape: &BlockShape, rng: &mut R) -> AlgebraElement {
    let blocks = shape
        .dims()
        .iter()
        .map(|&d| random_unitary_matrix(d, rng))
        .collect();
    AlgebraElement::from_blocks(blocks).expect("shape has valid blocks")
}

/// `W diag(lambda) W*` with `W` Haar unitary and `lambda` drawn from `eigen`.
pub fn random_hermitian_with<R: Rng + ?Sized>(
    shape: &BlockShape,
    rng: &mut R,
    mut eigen: impl FnMut(&mut R) -> f64,
) -> AlgebraElement {
    let blocks = shape
        .dims()
        .iter()
        .map(|&d| {
            let w = random_unitary_matrix(d, rng);
            let lambda = Matrix::from_diagonal(&DVector::from_fn(d, |_, _| c64(eigen(rng), 0.0)));
            &w * lambda * w.adjoint()
        })
        .collect();
    AlgebraElement::from_blocks(blocks).expect("shape has valid blocks")
}

/// Positive element with spectrum in `[0, 1]`.
pub fn random_positive_contraction<R: Rng + ?Sized>(
    shape: &BlockShape,
    rng: &mut R,
) -> AlgebraElement {
    random_hermitian_with(shape, rng, |r| r.random::<f64>())
}

/// Self-adjoint element with spectrum in `[-1, 1]`.
pub fn random_hermitian_contraction<R: Rng + ?Sized>(
    shape: &BlockShape,
    rng: &mut R,
) -> AlgebraElement {
    random_hermitian_with(shape, rng, |r| r.random_range(-1.0..=1.0))
}
