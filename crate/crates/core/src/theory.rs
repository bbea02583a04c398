//! Closed-form predictions of the spectrum and the convergence rate.
//!
//! The off-diagonal weights behave like a random matrix with mean `𝔼`,
//! variance `𝕍` and mirror correlation `τ`. Their bulk fills an ellipse
//! centered at `W_ii − 𝔼` with semi-axes `√(n𝕍)(1 ± τ)`; a large mean
//! expels one real outlier. The convergence rate is `−ln` of whichever
//! modulus governs: the bulk edge, the outlier, or, for trust-only networks
//! whose outlier is exactly 1, the bulk edge again.
//!
//! The ellipse offset used in the edge moduli is the center `W_ii − 𝔼` (a
//! bare `d` there would not be an eigenvalue coordinate).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netgen::{derived_stats, InteractionType, Mixture, MomentStats, Proportions, Scenario, ScenarioConfig};

/// Spectral bulk of a random mixture: a disc on the real axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CirclePrediction {
    pub center_x: f64,
    pub radius: f64,
}

/// Spectral bulk of a complex mixture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipsePrediction {
    pub center_x: f64,
    /// Horizontal semi-axis.
    pub a: f64,
    /// Vertical semi-axis.
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Geometry {
    Circle(CirclePrediction),
    Ellipse(EllipsePrediction),
}

impl Geometry {
    /// The bulk as an ellipse (a circle has equal semi-axes).
    pub fn as_ellipse(&self) -> EllipsePrediction {
        match *self {
            Geometry::Circle(c) => EllipsePrediction {
                center_x: c.center_x,
                a: c.radius,
                b: c.radius,
            },
            Geometry::Ellipse(e) => e,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PredictionRegime {
    /// `|n𝔼| ≤ √(n𝕍)`: every eigenvalue sits in the bulk.
    Bulk,
    /// `|n𝔼| > √(n𝕍)`: one real outlier outside the bulk.
    Outlier,
    /// Trust-only network: the outlier is the exact eigenvalue 1, which the
    /// rate rule excludes, so the bulk edge governs.
    UnitOutlier,
}

impl PredictionRegime {
    pub fn label(self) -> &'static str {
        match self {
            PredictionRegime::Bulk => "bulk",
            PredictionRegime::Outlier => "outlier",
            PredictionRegime::UnitOutlier => "unit-outlier",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePrediction {
    pub regime: PredictionRegime,
    /// Largest modulus over the bulk, `max(Δ₁, Δ₂)`.
    pub m_e: f64,
    /// Modulus of the horizontal vertex farthest from the origin.
    pub delta1: f64,
    /// Modulus of the upper vertex.
    pub delta2: f64,
    pub lambda_outlier: Option<f64>,
    pub governing_modulus: f64,
    /// Nats per step.
    pub rate: f64,
    pub assumption1_ok: bool,
    pub assumption2_ok: bool,
    pub stats: MomentStats,
    pub geometry: Geometry,
}

/// Bulk geometry and edge moduli shared by every branch.
struct Bulk {
    ellipse: EllipsePrediction,
    delta1: f64,
    delta2: f64,
    m_e: f64,
}

fn bulk(n: usize, st: &MomentStats) -> Bulk {
    let s = st.bulk_scale(n);
    let center = st.w_ii - st.mean;
    let a = s * (1.0 + st.tau);
    let b = s * (1.0 - st.tau);
    let delta1 = a + center.abs();
    let delta2 = (b * b + center * center).sqrt();
    Bulk {
        ellipse: EllipsePrediction { center_x: center, a, b },
        delta1,
        delta2,
        m_e: delta1.max(delta2),
    }
}

/// Whether the mean expels an outlier; ties count as bulk.
pub fn has_outlier(n: usize, st: &MomentStats) -> bool {
    (n as f64 * st.mean).abs() > st.bulk_scale(n)
}

/// Low-rank perturbation estimate `(n−1)𝔼 + (𝕋−𝔼²)/𝔼 + W_ii` of the outlier.
pub fn outlier_estimate(n: usize, st: &MomentStats) -> f64 {
    (n as f64 - 1.0) * st.mean + (st.cross - st.mean * st.mean) / st.mean + st.w_ii
}

fn finish(
    regime: PredictionRegime,
    b: Bulk,
    lambda_outlier: Option<f64>,
    governing_modulus: f64,
    report: &AssumptionReport,
    stats: MomentStats,
    geometry: Geometry,
) -> Result<RatePrediction> {
    if !(governing_modulus > 0.0) || !governing_modulus.is_finite() {
        return Err(Error::FormulaRegime(format!(
            "governing modulus {governing_modulus} is not a positive finite number"
        )));
    }
    Ok(RatePrediction {
        regime,
        m_e: b.m_e,
        delta1: b.delta1,
        delta2: b.delta2,
        lambda_outlier,
        governing_modulus,
        rate: -governing_modulus.ln(),
        assumption1_ok: report.assumption1_ok,
        assumption2_ok: report.assumption2_ok,
        stats,
        geometry,
    })
}

/// Prediction for whatever mixture `cfg` describes.
pub fn predict(cfg: &ScenarioConfig) -> Result<RatePrediction> {
    match cfg.proportions {
        Mixture::Random => predict_random_mixture(cfg),
        Mixture::Complex(_) => predict_complex_mixture(cfg),
    }
}

/// Independent signed draws: a disc of radius `√(nPσ²)/(C+d)` around `W_ii`
/// and spectral radius `(√(nPσ²)+d)/(C+d)`.
pub fn predict_random_mixture(cfg: &ScenarioConfig) -> Result<RatePrediction> {
    if cfg.proportions != Mixture::Random {
        return Err(Error::Config("configuration is not a random mixture".into()));
    }
    let st = derived_stats(cfg)?;
    let report = check_assumptions(cfg)?;
    let b = bulk(cfg.n, &st);
    let radius = b.ellipse.a;
    let circle = CirclePrediction {
        center_x: b.ellipse.center_x,
        radius,
    };
    let rho = radius + st.w_ii;
    finish(PredictionRegime::Bulk, b, None, rho, &report, st, Geometry::Circle(circle))
}

/// Five-type mixture. Trust-only and mistrust-only mixtures (all pure types
/// included) take the specialized branches.
pub fn predict_complex_mixture(cfg: &ScenarioConfig) -> Result<RatePrediction> {
    let Mixture::Complex(p) = cfg.proportions else {
        return Err(Error::Config("configuration is not a complex mixture".into()));
    };
    let st = derived_stats(cfg)?;
    let report = check_assumptions(cfg)?;
    let n = cfg.n;
    let b = bulk(n, &st);
    let geometry = Geometry::Ellipse(b.ellipse);

    if p.mm + p.pm + p.m0 == 0.0 {
        // Nonnegative W with |W| row-stochastic: W·1 = 1 exactly.
        let m_e = b.m_e;
        return finish(PredictionRegime::UnitOutlier, b, Some(1.0), m_e, &report, st, geometry);
    }
    if p.pp + p.pm + p.p0 == 0.0 {
        return predict_mistrust(cfg, st, b, &report);
    }
    if has_outlier(n, &st) {
        let lambda = outlier_estimate(n, &st);
        let governing = lambda.abs().max(b.m_e);
        finish(PredictionRegime::Outlier, b, Some(lambda), governing, &report, st, geometry)
    } else {
        let m_e = b.m_e;
        finish(PredictionRegime::Bulk, b, None, m_e, &report, st, geometry)
    }
}

/// Mutual and unilateral mistrust only: the outlier is `−1 + 2(W_ii − 𝔼)`,
/// of modulus `((n−3)·P·P̂·𝔼|Z| − d)/((n−1)·P·P̂·𝔼|Z| + d)`. The bulk edge
/// governs once it reaches past the outlier, which happens at large `d`.
fn predict_mistrust(
    cfg: &ScenarioConfig,
    st: MomentStats,
    b: Bulk,
    report: &AssumptionReport,
) -> Result<RatePrediction> {
    let k = cfg.p * st.p_hat * cfg.dist.abs_mean();
    let n = cfg.n as f64;
    let modulus = ((n - 3.0) * k - cfg.d) / ((n - 1.0) * k + cfg.d);
    if !(modulus > 0.0) {
        return Err(Error::FormulaRegime(format!(
            "mistrust outlier modulus {modulus} is not positive (n = {}, P = {}, d = {})",
            cfg.n, cfg.p, cfg.d
        )));
    }
    let geometry = Geometry::Ellipse(b.ellipse);
    let governing = modulus.max(b.m_e);
    finish(PredictionRegime::Outlier, b, Some(-modulus), governing, report, st, geometry)
}

/// Prediction for a network made of a single interaction type.
pub fn predict_pure_type(t: InteractionType, cfg: &ScenarioConfig) -> Result<RatePrediction> {
    let mut c = cfg.clone();
    c.proportions = Mixture::Complex(Proportions::pure(t));
    predict_complex_mixture(&c)
}

/// Mutual trust with proportion `p_pp`, mutual mistrust with the rest.
pub fn predict_mixture_pp_mm(p_pp: f64, cfg: &ScenarioConfig) -> Result<RatePrediction> {
    predict_complex_mixture(&with_pp_mm(p_pp, cfg)?)
}

/// Mutual mistrust with proportion `p_mm`, unilateral mistrust with the rest.
pub fn predict_mixture_mm_m0(p_mm: f64, cfg: &ScenarioConfig) -> Result<RatePrediction> {
    predict_complex_mixture(&with_mm_m0(p_mm, cfg)?)
}

fn unit_fraction(x: f64, name: &str) -> Result<f64> {
    if (0.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(Error::Config(format!("{name} must lie in [0, 1], got {x}")))
    }
}

pub fn with_pp_mm(p_pp: f64, cfg: &ScenarioConfig) -> Result<ScenarioConfig> {
    let p_pp = unit_fraction(p_pp, "P_pp")?;
    let mut c = cfg.clone();
    c.proportions = Mixture::Complex(Proportions {
        pp: p_pp,
        mm: 1.0 - p_pp,
        ..Default::default()
    });
    Ok(c)
}

pub fn with_mm_m0(p_mm: f64, cfg: &ScenarioConfig) -> Result<ScenarioConfig> {
    let p_mm = unit_fraction(p_mm, "P_mm")?;
    let mut c = cfg.clone();
    c.proportions = Mixture::Complex(Proportions {
        mm: p_mm,
        m0: 1.0 - p_mm,
        ..Default::default()
    });
    Ok(c)
}

/// Largest modulus on the ellipse `((x+c)/(1+N_a))² + (y/(1−N_b))² ≤ 1`,
/// attained at a horizontal vertex: `1 + N_a + |c|`.
pub fn ellipse_extreme_modulus(n_a: f64, n_b: f64, c: f64) -> Result<f64> {
    if !(n_b > 0.0 && n_a > n_b) || !c.is_finite() || !n_a.is_finite() {
        return Err(Error::Precondition(format!(
            "extreme-modulus formula needs N_a > N_b > 0, got N_a = {n_a}, N_b = {n_b}"
        )));
    }
    Ok(1.0 + n_a + c.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub m1: f64,
    pub m2: f64,
    /// Lower bound `max(M₁, M₂)` on the self-confidence level.
    pub d_lower: f64,
    pub assumption2_ok: bool,
    /// Trust and mistrust both present.
    pub assumption1_ok: bool,
    pub p_hat: f64,
    pub p_bar: f64,
}

/// Tolerance for the trust-only / mistrust-only tests on proportions.
const COEXIST_TOL: f64 = 1e-12;

pub fn check_assumptions(cfg: &ScenarioConfig) -> Result<AssumptionReport> {
    let st = derived_stats(cfg)?;
    let sigma2 = cfg.dist.variance();
    let m = cfg.dist.abs_mean();
    let m1 = (sigma2 + m * m).powi(2) / (sigma2 * m);
    let radicand = 2.0 * sigma2 * m * m - cfg.p * m.powi(4);
    let m2 = if radicand > 0.0 {
        2.0 * sigma2 * sigma2 / radicand.sqrt() + cfg.p * m / 2.0
    } else {
        f64::INFINITY
    };
    let d_lower = m1.max(m2);
    let assumption1_ok = match cfg.proportions {
        Mixture::Random => true,
        Mixture::Complex(p) => {
            (p.pp + p.p0 - 1.0).abs() > COEXIST_TOL && (p.mm + p.m0 - 1.0).abs() > COEXIST_TOL
        }
    };
    Ok(AssumptionReport {
        m1,
        m2,
        d_lower,
        assumption2_ok: cfg.d > d_lower,
        assumption1_ok,
        p_hat: st.p_hat,
        p_bar: st.p_bar,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Increasing,
    Decreasing,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Increasing => 1.0,
            Direction::Decreasing => -1.0,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Direction::Increasing => '+',
            Direction::Decreasing => '-',
        }
    }
}

/// Claimed direction of the rate as population size, connectivity and
/// self-confidence grow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Monotonicity {
    pub n: Direction,
    pub p: Direction,
    pub d: Direction,
}

pub fn monotonicity_table(scenario: Scenario) -> Result<Monotonicity> {
    use Direction::*;
    match scenario {
        Scenario::RandomMixture
        | Scenario::Pure(InteractionType::PlusPlus)
        | Scenario::Pure(InteractionType::PlusMinus)
        | Scenario::Pure(InteractionType::PlusZero) => Ok(Monotonicity {
            n: Increasing,
            p: Increasing,
            d: Decreasing,
        }),
        Scenario::Pure(InteractionType::MinusMinus) | Scenario::Pure(InteractionType::MinusZero) => Ok(Monotonicity {
            n: Decreasing,
            p: Decreasing,
            d: Increasing,
        }),
        Scenario::Mixed => Err(Error::Config("no monotonicity claim for a general mixture".into())),
    }
}

/// Where the trust/mistrust balance sweep changes behavior.
///
/// Below `switch_lower` and above `switch_upper` the outlier governs the
/// rate; between `bulk_lower` and `bulk_upper` there is no outlier at all.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureBoundaries {
    /// Lower root of `|n𝔼| = √(n𝕍)`.
    pub bulk_lower: f64,
    pub bulk_upper: f64,
    /// Lower root of `|λ_outlier| = M_e`.
    pub switch_lower: f64,
    pub switch_upper: f64,
}

impl MixtureBoundaries {
    /// Distance of the lower switch below one half.
    pub fn xi1(&self) -> f64 {
        0.5 - self.switch_lower
    }

    pub fn xi2(&self) -> f64 {
        self.switch_upper - 0.5
    }
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let flo = f(lo)?;
    let fhi = f(hi)?;
    if flo.signum() == fhi.signum() {
        return Err(Error::Precondition(format!(
            "no sign change on [{lo}, {hi}] ({flo}, {fhi})"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if f(mid)?.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Regime boundaries of the mutual-trust / mutual-mistrust mixture, found by
/// bisection on the generic formulas.
pub fn mixture_pp_mm_boundaries(cfg: &ScenarioConfig) -> Result<MixtureBoundaries> {
    let n = cfg.n;
    let stats = |p: f64| derived_stats(&with_pp_mm(p, cfg)?);
    let excess = |p: f64| -> Result<f64> {
        let st = stats(p)?;
        Ok((n as f64 * st.mean).abs() - st.bulk_scale(n))
    };
    let gap = |p: f64| -> Result<f64> {
        let st = stats(p)?;
        Ok(outlier_estimate(n, &st).abs() - bulk(n, &st).m_e)
    };
    let bulk_lower = bisect(0.0, 0.5, excess)?;
    let bulk_upper = bisect(0.5, 1.0, excess)?;
    // Where the outlier already dominates as it leaves the bulk, the two
    // boundaries coincide.
    let switch_lower = if gap(bulk_lower)? >= 0.0 {
        bulk_lower
    } else {
        bisect(0.0, bulk_lower, gap)?
    };
    let switch_upper = if gap(bulk_upper)? >= 0.0 {
        bulk_upper
    } else {
        bisect(bulk_upper, 1.0, gap)?
    };
    Ok(MixtureBoundaries {
        bulk_lower,
        bulk_upper,
        switch_lower,
        switch_upper,
    })
}
