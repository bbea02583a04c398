//! Dense eigencomputation, modulus ordering and the rate rule that turns a
//! computed spectrum into a convergence rate.

mod hqr;
#[cfg(feature = "lapack")]
mod lapack;
mod power;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::theory::EllipsePrediction;

pub use power::{power_radius, PowerOptions};

/// Largest matrix the dense solver accepts.
pub const SOLVER_CAP: usize = 3000;

/// QR sweeps allowed per unit of dimension.
pub const SWEEPS_PER_DIMENSION: usize = 30;

/// Default distance from +1 under which an eigenvalue counts as part of the
/// unit cluster.
pub const DEFAULT_ONE_TOL: f64 = 1e-8;

/// Largest spectral radius still accepted as coming from a normalized
/// influence matrix.
const RADIUS_SLACK: f64 = 1e-6;

/// Eigenvalue multiset of a real matrix, stored in decreasing modulus order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    eigenvalues: Vec<Complex64>,
    moduli_sorted: Vec<f64>,
    solver_residual: f64,
}

impl Spectrum {
    /// Builds a spectrum from an arbitrary eigenvalue list (no residual).
    pub fn from_eigenvalues(eigenvalues: impl IntoIterator<Item = Complex64>) -> Self {
        Self::with_residual(eigenvalues.into_iter().collect(), 0.0)
    }

    fn with_residual(mut eigenvalues: Vec<Complex64>, solver_residual: f64) -> Self {
        eigenvalues.sort_by(|a, b| {
            b.norm()
                .total_cmp(&a.norm())
                .then(b.re.total_cmp(&a.re))
                .then(b.im.total_cmp(&a.im))
        });
        let moduli_sorted = eigenvalues.iter().map(|z| z.norm()).collect();
        Self {
            eigenvalues,
            moduli_sorted,
            solver_residual,
        }
    }

    /// Eigenvalues in decreasing modulus order.
    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    /// ρ₁ ≥ ρ₂ ≥ … with multiplicity.
    pub fn moduli_sorted(&self) -> &[f64] {
        &self.moduli_sorted
    }

    pub fn spectral_radius(&self) -> f64 {
        self.moduli_sorted.first().copied().unwrap_or(0.0)
    }

    /// Relative trace-identity mismatch reported by the solver.
    pub fn solver_residual(&self) -> f64 {
        self.solver_residual
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Largest distance between an eigenvalue with nonzero imaginary part and
    /// the nearest eigenvalue to its conjugate.
    pub fn conjugate_asymmetry(&self) -> f64 {
        self.eigenvalues
            .iter()
            .filter(|z| z.im != 0.0)
            .map(|z| {
                let c = z.conj();
                self.eigenvalues
                    .iter()
                    .map(|w| (w - c).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    }
}

fn check_input(a: &DMatrix<f64>) -> Result<usize> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::Precondition(format!(
            "eigenvalues need a square matrix, got {}x{}",
            n,
            a.ncols()
        )));
    }
    if n > SOLVER_CAP {
        return Err(Error::TooLarge { n, cap: SOLVER_CAP });
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(n)
}

fn finish(a: &DMatrix<f64>, eigenvalues: Vec<Complex64>) -> Spectrum {
    let n = a.nrows();
    let trace = a.trace();
    let sum: Complex64 = eigenvalues.iter().sum();
    let scale = a.norm().max(f64::MIN_POSITIVE) * (n.max(1) as f64);
    let residual = ((sum.re - trace).abs() + sum.im.abs()) / scale;
    Spectrum::with_residual(eigenvalues, residual)
}

/// Full spectrum of a dense real matrix.
///
/// Uses the system LAPACK when the `lapack` feature is on and the built-in
/// QR solver ([`eigenvalues_qr`]) otherwise.
pub fn eigenvalues(a: &DMatrix<f64>) -> Result<Spectrum> {
    #[cfg(feature = "lapack")]
    {
        let n = check_input(a)?;
        let mut buf = a.as_slice().to_vec();
        let eig = lapack::eigenvalues_in_place(&mut buf, n)?;
        Ok(finish(a, eig))
    }
    #[cfg(not(feature = "lapack"))]
    eigenvalues_qr(a)
}

/// Full spectrum by the built-in balancing + Hessenberg + double-shift QR
/// solver. Slower than LAPACK at large n but dependency free.
pub fn eigenvalues_qr(a: &DMatrix<f64>) -> Result<Spectrum> {
    let n = check_input(a)?;
    // nalgebra is column-major; the solver wants rows contiguous.
    let mut buf: Vec<f64> = a.transpose().as_slice().to_vec();
    let outcome = hqr::eigenvalues_in_place(&mut buf, n, SWEEPS_PER_DIMENSION * n.max(1))?;
    Ok(finish(a, outcome.eigenvalues))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateRegime {
    SubunitRadius,
    UnitRadiusSecond,
    AllUnit,
}

/// Convergence rate read off a spectrum, in nats per step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalRateResult {
    /// `f64::INFINITY` when every eigenvalue sits in the unit cluster.
    pub rate: f64,
    pub governing_modulus: f64,
    pub regime: RateRegime,
}

impl EmpiricalRateResult {
    pub fn is_infinite(&self) -> bool {
        self.rate.is_infinite()
    }
}

/// Lemma-7 style rule: the spectral radius governs when it is below one,
/// otherwise the largest modulus left after removing the eigenvalues at +1.
pub fn rate_from_spectrum(spec: &Spectrum, one_tol: f64) -> Result<EmpiricalRateResult> {
    let rho = spec.spectral_radius();
    if rho > 1.0 + RADIUS_SLACK {
        return Err(Error::NotNormalized(rho));
    }
    if rho < 1.0 - one_tol {
        return Ok(EmpiricalRateResult {
            rate: -rho.ln(),
            governing_modulus: rho,
            regime: RateRegime::SubunitRadius,
        });
    }
    let one = Complex64::new(1.0, 0.0);
    let rest = spec
        .eigenvalues()
        .iter()
        .filter(|z| (*z - one).norm() > one_tol)
        .map(|z| z.norm())
        .fold(None, |acc: Option<f64>, m| Some(acc.map_or(m, |a| a.max(m))));
    Ok(match rest {
        Some(mu) => EmpiricalRateResult {
            rate: -mu.ln(),
            governing_modulus: mu,
            regime: RateRegime::UnitRadiusSecond,
        },
        None => EmpiricalRateResult {
            rate: f64::INFINITY,
            governing_modulus: 1.0,
            regime: RateRegime::AllUnit,
        },
    })
}

/// Which eigenvalues to leave out before testing ellipse containment.
#[derive(Debug, Clone, Default)]
pub struct Exclusions {
    /// Drop every eigenvalue within this distance of +1.
    pub unit_cluster: Option<f64>,
    /// For each predicted outlier, drop the eigenvalue nearest to it.
    pub outliers: Vec<Complex64>,
}

/// Fraction of the (non-excluded) eigenvalues lying outside the ellipse
/// scaled by `1 + inflate`.
pub fn ellipse_containment(
    spec: &Spectrum,
    ellipse: &EllipsePrediction,
    inflate: f64,
    exclude: &Exclusions,
) -> Result<f64> {
    if !(ellipse.a > 0.0 && ellipse.b > 0.0) {
        return Err(Error::DegenerateEllipse {
            a: ellipse.a,
            b: ellipse.b,
        });
    }
    let one = Complex64::new(1.0, 0.0);
    let mut pool: Vec<Complex64> = spec
        .eigenvalues()
        .iter()
        .copied()
        .filter(|z| exclude.unit_cluster.is_none_or(|tol| (*z - one).norm() > tol))
        .collect();
    for target in &exclude.outliers {
        if let Some((idx, _)) = pool
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| (*a - target).norm().total_cmp(&(*b - target).norm()))
        {
            pool.swap_remove(idx);
        }
    }
    if pool.is_empty() {
        return Ok(0.0);
    }
    let a = ellipse.a * (1.0 + inflate);
    let b = ellipse.b * (1.0 + inflate);
    let outside = pool
        .iter()
        .filter(|z| {
            let u = (z.re - ellipse.center_x) / a;
            let v = z.im / b;
            u * u + v * v > 1.0
        })
        .count();
    Ok(outside as f64 / pool.len() as f64)
}
