//! Small dense-matrix helpers shared by the other modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Entrywise max-norm.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_vec(v: &CVector) -> f64 {
    v.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// `max |A - B|` over entries; panics on shape mismatch.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).fold(0.0_f64, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `<a|b>` with the conjugate on the left.
pub fn inner(a: &CVector, b: &CVector) -> Complex64 {
    a.dotc(b)
}

pub fn norm_sqr(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// `A^K` by repeated squaring.
pub fn matrix_power(a: &CMatrix, k: usize) -> CMatrix {
    assert!(k >= 1);
    let mut result: Option<CMatrix> = None;
    let mut base = a.clone();
    let mut e = k;
    loop {
        if e & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => &base * r,
            });
        }
        e >>= 1;
        if e == 0 {
            break;
        }
        base = &base * &base;
    }
    result.expect("k >= 1")
}

pub fn basis_vector(n: usize, j: usize) -> CVector {
    let mut v = CVector::zeros(n);
    v[j] = Complex64::new(1.0, 0.0);
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_matches_repeated_product() {
        let a = CMatrix::from_fn(4, 4, |i, j| Complex64::new((i + 2 * j) as f64 * 0.1, (i as f64 - j as f64) * 0.05));
        let mut direct = a.clone();
        for _ in 1..7 {
            direct = &a * direct;
        }
        assert!(max_abs_diff(&matrix_power(&a, 7), &direct) < 1e-12);
        assert_eq!(matrix_power(&a, 1), a);
    }
}
