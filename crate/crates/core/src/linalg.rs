//! Thin helpers over `nalgebra` for the complex vectors and matrices used
//! throughout the receivers.

use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64 as C64;

pub type CVec = DVector<C64>;
pub type CMat = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// `aᴴ b`, accumulated left to right.
pub fn dotc(a: &CVec, b: &CVec) -> C64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = ZERO;
    for (x, y) in a.iter().zip(b.iter()) {
        acc += x.conj() * y;
    }
    acc
}

pub fn norm_sqr(a: &CVec) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

pub fn norm(a: &CVec) -> f64 {
    norm_sqr(a).sqrt()
}

/// `Aᴴ x` without materializing the adjoint.
pub fn adjoint_mul(a: &CMat, x: &CVec) -> CVec {
    debug_assert_eq!(a.nrows(), x.len());
    let mut out = CVec::zeros(a.ncols());
    for j in 0..a.ncols() {
        let col = a.column(j);
        let mut acc = ZERO;
        for i in 0..a.nrows() {
            acc += col[i].conj() * x[i];
        }
        out[j] = acc;
    }
    out
}

pub fn real_to_complex(m: &DMatrix<f64>) -> CMat {
    m.map(|x| C64::new(x, 0.0))
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// `[I_D | 0]ᵀ`, the M×D initial transformation.
pub fn padded_identity(m: usize, d: usize) -> CMat {
    let mut t = CMat::zeros(m, d);
    for i in 0..d.min(m) {
        t[(i, i)] = ONE;
    }
    t
}

/// Replaces `a` by `(a + aᴴ)/2`.
pub fn hermitize(a: &mut CMat) {
    let n = a.nrows();
    for i in 0..n {
        a[(i, i)] = C64::new(a[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let avg = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            a[(i, j)] = avg;
            a[(j, i)] = avg.conj();
        }
    }
}

pub fn is_finite_vec(a: &CVec) -> bool {
    a.iter().all(|x| x.re.is_finite() && x.im.is_finite())
}

pub fn is_finite_mat(a: &CMat) -> bool {
    a.iter().all(|x| x.re.is_finite() && x.im.is_finite())
}

/// Largest entrywise modulus of `a − b`.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn max_abs_diff_vec(a: &CVec, b: &CVec) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn frobenius(a: &CMat) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}
