#![allow(dead_code)]

use quadform::{DiagonalForm, Matrix, QuadraticForm};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_vec(rng: &mut ChaCha8Rng, p: usize, half_width: f64) -> Vec<f64> {
    (0..p).map(|_| rng.random_range(-half_width..half_width)).collect()
}

pub fn random_diag(rng: &mut ChaCha8Rng, p: usize, half_width: f64) -> DiagonalForm {
    let a = uniform_vec(rng, p, half_width);
    let b = uniform_vec(rng, p, half_width);
    DiagonalForm::new(a, b).unwrap()
}

pub fn random_matrix(rng: &mut ChaCha8Rng, p: usize, half_width: f64) -> Matrix {
    Matrix::new(p, uniform_vec(rng, p * p, half_width)).unwrap()
}

pub fn random_matrix_form(rng: &mut ChaCha8Rng, p: usize, half_width: f64) -> QuadraticForm {
    let m = random_matrix(rng, p, half_width);
    QuadraticForm::new(m, uniform_vec(rng, p, half_width)).unwrap()
}

/// Orthonormal matrix from Gram–Schmidt on a random square matrix.
pub fn random_orthonormal(rng: &mut ChaCha8Rng, p: usize) -> Matrix {
    let raw = random_matrix(rng, p, 1.0);
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(p);
    for j in 0..p {
        let mut v = raw.column(j);
        for _ in 0..2 {
            for c in &cols {
                let dot: f64 = v.iter().zip(c).map(|(x, y)| x * y).sum();
                for (vi, ci) in v.iter_mut().zip(c) {
                    *vi -= dot * ci;
                }
            }
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        cols.push(v.into_iter().map(|x| x / n).collect());
    }
    let mut u = Matrix::zeros(p);
    for (j, c) in cols.iter().enumerate() {
        for (i, &v) in c.iter().enumerate() {
            u[(i, j)] = v;
        }
    }
    u
}

/// Adaptive Simpson quadrature, independent of the crate's Gauss–Kronrod code.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 60)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// `log E exp(y(az² + bz))` by quadrature against the standard normal density
/// over ±12 standard deviations.
pub fn log_mgf_by_quadrature(a: f64, b: f64, y: f64) -> f64 {
    let norm = (2.0 * std::f64::consts::PI).sqrt();
    let f = |z: f64| (y * (a * z * z + b * z) - 0.5 * z * z).exp() / norm;
    simpson(&f, -12.0, 12.0, 1e-14).ln()
}

pub fn rel_close(got: f64, want: f64, tol: f64) -> bool {
    (got - want).abs() <= tol * (1.0 + want.abs())
}
