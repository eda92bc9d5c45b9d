//! Convexity certificate and receiver metrics.

use nalgebra::SymmetricEigen;

use crate::linalg::{dotc, norm, norm_sqr, CMat, CVec, C64};

/// Smallest eigenvalue of `2ε̃ε̃ᴴ + (E₁v² − 1)I`.
pub fn hessian_min_eigenvalue(eps_tilde: &CVec, e1: f64, v: f64) -> f64 {
    let n = eps_tilde.len();
    if n == 0 {
        return e1 * v * v - 1.0;
    }
    let h = (eps_tilde * eps_tilde.adjoint()) * C64::new(2.0, 0.0)
        + CMat::identity(n, n) * C64::new(e1 * v * v - 1.0, 0.0);
    SymmetricEigen::new(h)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// SINR of a linear filter `f` in linear units.
///
/// `desired` is `√E₁ p₁`; `interference` lists every other unit-variance
/// symbol's signature already scaled by its amplitude.
pub fn sinr_linear(f: &CVec, desired: &CVec, interference: &[CVec], noise_var: f64) -> f64 {
    let signal = dotc(f, desired).norm_sqr();
    let mut denom = noise_var * norm_sqr(f);
    for s in interference {
        denom += dotc(f, s).norm_sqr();
    }
    if denom > 0.0 {
        signal / denom
    } else {
        f64::INFINITY
    }
}

pub fn sinr_db(f: &CVec, desired: &CVec, interference: &[CVec], noise_var: f64) -> f64 {
    10.0 * sinr_linear(f, desired, interference, noise_var).log10()
}

/// SINR of `(T, w̄)`.
pub fn sinr_of(
    t: &CMat,
    w: &CVec,
    p1: &CVec,
    e1: f64,
    interference: &[CVec],
    noise_var: f64,
) -> f64 {
    let f = t * w;
    let d = p1 * C64::new(e1.sqrt(), 0.0);
    sinr_db(&f, &d, interference, noise_var)
}

fn first_significant(h: &CVec) -> Option<usize> {
    h.iter().position(|x| x.norm() > 1e-6)
}

/// `‖e^{−jθ}ĥ − h‖²`, with `θ` aligning `ĥ` to `h` at `h`'s first significant tap.
pub fn channel_mse(h_hat: &CVec, h: &CVec) -> f64 {
    let rot = match first_significant(h) {
        Some(l) if h_hat[l].norm() > 0.0 => {
            let ph = (h_hat[l] / h[l]).arg();
            C64::from_polar(1.0, -ph)
        }
        _ => C64::new(1.0, 0.0),
    };
    h_hat
        .iter()
        .zip(h.iter())
        .map(|(a, b)| (a * rot - b).norm_sqr())
        .sum()
}

/// Distance between unit-normalized signatures at the best common phase:
/// `2 − 2|p̂ᴴp|/(‖p̂‖‖p‖)`.
pub fn signature_mse(p_hat: &CVec, p: &CVec) -> f64 {
    let c = dotc(p_hat, p).norm() / (norm(p_hat) * norm(p));
    2.0 - 2.0 * c
}

/// Share of `‖h‖²` that `A` cannot see (energy in the null space of `A`).
pub fn unidentifiable_fraction(a: &CMat, h: &CVec) -> f64 {
    let svd = a.clone().svd(false, true);
    let vt = svd.v_t.expect("requested");
    let tol = svd.singular_values.max() * 1e-10 * a.nrows().max(a.ncols()) as f64;
    let mut seen = 0.0;
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > tol {
            seen += (vt.row(k) * h)[0].norm_sqr();
        }
    }
    let total = norm_sqr(h);
    (total - seen).max(0.0) / total
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn hessian_examples() {
        assert!((hessian_min_eigenvalue(&CVec::zeros(3), 2.0, 1.0) - 1.0).abs() < 1e-12);
        let eps = CVec::from_vec(vec![C64::new(0.01, 0.0), C64::new(0.0, 0.02)]);
        let v = hessian_min_eigenvalue(&eps, 0.5, 1.0);
        assert!((v + 0.5).abs() < 1e-9);
    }

    #[test]
    fn matched_filter_bound() {
        let p = CVec::from_vec(vec![C64::new(1.0, 1.0), C64::new(0.5, -2.0)]);
        let f = &p / C64::new(norm(&p), 0.0);
        assert!((sinr_linear(&f, &p, &[], 1.0) - norm_sqr(&p)).abs() < 1e-12);
        let a = sinr_db(&f, &p, &[], 1.0);
        let b = sinr_db(&f, &p, &[], 2.0);
        assert!((a - b - 10.0 * 2f64.log10()).abs() < 1e-12);
    }

    #[test]
    fn analytic_sinr_matches_monte_carlo() {
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        let m = 6;
        let rv = |rng: &mut ChaCha12Rng| CVec::from_fn(m, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let d = rv(&mut rng);
        let ints: Vec<CVec> = (0..4).map(|_| rv(&mut rng) * C64::new(0.5, 0.0)).collect();
        let f = rv(&mut rng) + &d;
        let nv = 0.05;
        let (mut sig, mut rest) = (0.0, 0.0);
        let n = 100_000;
        for _ in 0..n {
            let b: f64 = if rng.random() { 1.0 } else { -1.0 };
            let mut r = &d * C64::new(b, 0.0);
            for s in &ints {
                let bi: f64 = if rng.random() { 1.0 } else { -1.0 };
                r += s * C64::new(bi, 0.0);
            }
            let sd = (nv / 2.0f64).sqrt();
            for x in r.iter_mut() {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                *x += C64::new(sd * re, sd * im);
            }
            let y = dotc(&f, &r);
            let ys = dotc(&f, &d) * b;
            sig += ys.norm_sqr();
            rest += (y - ys).norm_sqr();
        }
        let mc = 10.0 * (sig / rest).log10();
        let an = sinr_db(&f, &d, &ints, nv);
        assert!((mc - an).abs() < 0.2, "MC {mc} vs analytic {an}");
    }

    #[test]
    fn channel_mse_examples() {
        let h = CVec::from_vec(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]);
        assert!(channel_mse(&h, &h) < 1e-15);
        assert!(channel_mse(&(&h * C64::from_polar(1.0, 2.1)), &h) < 1e-15);
        let orth = CVec::from_vec(vec![C64::new(0.8, 0.0), C64::new(0.0, -0.6)]);
        assert!((dotc(&orth, &h)).norm() < 1e-15);
        assert!((channel_mse(&orth, &h) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn unidentifiable_fraction_of_rank_deficient_map() {
        let a = CMat::from_vec(2, 3, vec![
            C64::new(1.0, 0.0), C64::new(0.0, 0.0),
            C64::new(0.0, 0.0), C64::new(1.0, 0.0),
            C64::new(0.0, 0.0), C64::new(0.0, 0.0),
        ]);
        let h = CVec::from_vec(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.0), C64::new(0.8, 0.0)]);
        assert!((unidentifiable_fraction(&a, &h) - 0.64).abs() < 1e-12);
    }
}
