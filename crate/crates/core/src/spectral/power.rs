//! Power iteration for the spectral radius. Used only as an independent
//! cross-check of the dense solver.
//!
//! A real dominant eigenvalue is tracked with the ordinary Rayleigh
//! quotient. A complex-conjugate dominant pair makes the iterates rotate, so
//! each step also fits the monic quadratic `λ² + c₁λ + c₀` that best
//! annihilates `(v, Av, A²v)` in least squares; its roots are the dominant pair.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct PowerOptions {
    pub max_iters: usize,
    pub tol: f64,
    /// Seed for the deterministic start vector.
    pub seed: u64,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self {
            max_iters: 20_000,
            tol: 1e-10,
            seed: 0x5eed,
        }
    }
}

fn start_vector(n: usize, seed: u64) -> DVector<f64> {
    // splitmix64, so the oracle does not share an RNG path with the generators.
    let mut state = seed;
    DVector::from_fn(n, |_, _| {
        state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
        (z >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    })
}

/// Estimate of the dominant eigenvalue modulus together with the residual of
/// the model that produced it.
fn step_estimate(v: &DVector<f64>, w1: &DVector<f64>, w2: &DVector<f64>) -> (f64, f64) {
    let w1n = w1.norm();
    if w1n == 0.0 {
        return (0.0, 0.0);
    }
    // Real model: w1 ≈ λ v.
    let lambda = v.dot(w1);
    let real_res = (w1 - v * lambda).norm() / w1n;

    // Quadratic model: w2 + c1 w1 + c0 v ≈ 0.
    let g11 = w1.dot(w1);
    let g10 = w1.dot(v);
    let g00 = v.dot(v);
    let b1 = -w2.dot(w1);
    let b0 = -w2.dot(v);
    let det = g11 * g00 - g10 * g10;
    let mut best = (lambda.abs(), real_res);
    if det > 1e-12 * g11 * g00 {
        let c1 = (b1 * g00 - b0 * g10) / det;
        let c0 = (g11 * b0 - g10 * b1) / det;
        let w2n = w2.norm().max(f64::MIN_POSITIVE);
        let quad_res = (w2 + w1 * c1 + v * c0).norm() / w2n;
        let disc = c1 * c1 - 4.0 * c0;
        let modulus = if disc < 0.0 {
            c0.abs().sqrt()
        } else {
            let s = disc.sqrt();
            ((-c1 + s) / 2.0).abs().max(((-c1 - s) / 2.0).abs())
        };
        // Prefer the quadratic fit only when the real model clearly fails.
        if quad_res < real_res * 1e-3 {
            best = (modulus, quad_res);
        }
    }
    best
}

/// Power-iteration estimate of ρ(A).
pub fn power_radius(a: &DMatrix<f64>, opts: PowerOptions) -> Result<f64> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::Precondition("power iteration needs a square matrix".into()));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    if n == 0 {
        return Ok(0.0);
    }
    let mut v = start_vector(n, opts.seed);
    v /= v.norm();
    let mut last = f64::NAN;
    let mut stable = 0;
    for _ in 0..opts.max_iters {
        let w1 = a * &v;
        let w2 = a * &w1;
        let (est, res) = step_estimate(&v, &w1, &w2);
        if est == 0.0 {
            return Ok(0.0);
        }
        if (est - last).abs() <= opts.tol * est && res < opts.tol.sqrt() {
            stable += 1;
            if stable >= 3 {
                return Ok(est);
            }
        } else {
            stable = 0;
        }
        last = est;
        let norm = w2.norm();
        if norm == 0.0 {
            return Ok(0.0);
        }
        v = w2 / norm;
    }
    Err(Error::PowerIteration {
        iterations: opts.max_iters,
        last_estimate: last,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::dmatrix;

    #[test]
    fn diagonal() {
        let a = dmatrix![0.9, 0.0; 0.0, 0.1];
        let r = power_radius(&a, PowerOptions::default()).unwrap();
        assert_abs_diff_eq!(r, 0.9, epsilon = 1e-9);
    }

    #[test]
    fn rotation_pair_dominant() {
        // Eigenvalues 0.5 ± 0.5i (modulus √0.5) and 0.1.
        let a = dmatrix![0.5, 0.5, 0.0; -0.5, 0.5, 0.0; 0.0, 0.0, 0.1];
        let r = power_radius(&a, PowerOptions::default()).unwrap();
        assert_abs_diff_eq!(r, 0.5f64.sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn negative_dominant() {
        let a = dmatrix![-0.8, 0.1; 0.0, 0.3];
        let r = power_radius(&a, PowerOptions::default()).unwrap();
        assert_abs_diff_eq!(r, 0.8, epsilon = 1e-9);
    }

    #[test]
    fn nilpotent_is_zero() {
        let a = dmatrix![0.0, 1.0; 0.0, 0.0];
        assert_eq!(power_radius(&a, PowerOptions::default()).unwrap(), 0.0);
    }

    #[test]
    fn plus_minus_one_pair_fits_quadratic() {
        // Eigenvalues ±1: the iterate alternates, λ² − 1 annihilates it.
        let a = dmatrix![0.0, 1.0; 1.0, 0.0];
        let r = power_radius(&a, PowerOptions::default()).unwrap();
        assert_abs_diff_eq!(r, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn three_way_modulus_tie_cannot_settle() {
        // Eigenvalues ±i and -1: no two-term recurrence annihilates the iterates.
        let a = dmatrix![0.0, -1.0, 0.0; 1.0, 0.0, 0.0; 0.0, 0.0, -1.0];
        let opts = PowerOptions {
            max_iters: 50,
            ..Default::default()
        };
        match power_radius(&a, opts) {
            Ok(r) => assert_abs_diff_eq!(r, 1.0, epsilon = 1e-6),
            Err(Error::PowerIteration { last_estimate, iterations }) => {
                assert_eq!(iterations, 50);
                assert!(last_estimate.is_finite());
            }
            Err(e) => panic!("unexpected error {e}"),
        }
    }
}
