//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Coefficients `c_0..c_n` of `det(λI − A) = Σ c_k λ^k` by Faddeev–LeVerrier.
pub fn charpoly(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    let mut m = DMatrix::<f64>::zeros(n, n);
    for k in 1..=n {
        m = a * &m + DMatrix::identity(n, n) * c[n + 1 - k];
        c[n - k] = -(a * &m).trace() / k as f64;
    }
    c
}

/// All roots of a monic polynomial by Durand–Kerner iteration.
pub fn poly_roots(c: &[f64]) -> Vec<Complex64> {
    let n = c.len() - 1;
    let eval = |z: Complex64| c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &k| acc * z + k);
    let bound = 1.0 + c[..n].iter().map(|v| v.abs()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32) * bound.min(2.0)).collect();
    for _ in 0..5000 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    den *= z[i] - z[j];
                }
            }
            let step = eval(z[i]) / den;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 {
            break;
        }
    }
    // Polish each root with Newton steps on the polynomial itself.
    let deriv: Vec<f64> = (1..=n).map(|k| c[k] * k as f64).collect();
    let eval_d = |z: Complex64| deriv.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &k| acc * z + k);
    for r in z.iter_mut() {
        for _ in 0..5 {
            let d = eval_d(*r);
            if d.norm() > 0.0 {
                *r -= eval(*r) / d;
            }
        }
    }
    z
}

/// Largest distance between two multisets of complex numbers under greedy
/// nearest matching.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut pool = b.to_vec();
    let mut worst = 0.0f64;
    for z in a {
        let (idx, d) = pool
            .iter()
            .enumerate()
            .map(|(i, w)| (i, (z - w).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        worst = worst.max(d);
        pool.swap_remove(idx);
    }
    worst
}

/// `reach[i][j]`: `j` can be reached from `i` following "receives from" arcs.
pub fn reachability(s: &DMatrix<f64>) -> Vec<Vec<bool>> {
    let n = s.nrows();
    let mut r: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| i == j || s[(i, j)] != 0.0).collect()).collect();
    for k in 0..n {
        for i in 0..n {
            if r[i][k] {
                for j in 0..n {
                    if r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
    }
    r
}

/// Whether some ±1 labelling of `nodes` makes every internal link agree with
/// the labels: nonnegative within a side, nonpositive across.
pub fn brute_force_balanced(s: &DMatrix<f64>, nodes: &[usize]) -> bool {
    let k = nodes.len();
    (0u32..1 << k).any(|mask| {
        let sign = |p: usize| if mask >> p & 1 == 1 { -1.0 } else { 1.0 };
        nodes.iter().enumerate().all(|(p, &i)| {
            nodes
                .iter()
                .enumerate()
                .all(|(q, &j)| i == j || sign(p) * sign(q) * s[(i, j)] >= 0.0)
        })
    })
}

/// Random sign pattern with entries in {−1, 0, 1}, zero diagonal.
pub fn random_sign_pattern(n: usize, rng: &mut ChaCha8Rng, density: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| {
        if i == j || !rng.random_bool(density) {
            0.0
        } else if rng.random_bool(0.5) {
            1.0
        } else {
            -1.0
        }
    })
}
