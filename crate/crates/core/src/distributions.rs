//! Closed-form families used as test laws, with their exact relative Fisher
//! information where it is known.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{self, build_from_pdf, GridDensity, ProductMeasure};
use crate::scalar::{c, Real};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function for `x > 0` (Lanczos, g = 7, nine terms).
pub fn gamma_fn<T: Real>(x: T) -> Result<T> {
    if !(x > T::zero()) || !x.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "gamma_fn needs a positive finite argument, got {x}"
        )));
    }
    Ok(gamma_pos(x))
}

fn gamma_pos<T: Real>(x: T) -> T {
    // integers up to 171 are exact as factorials
    if x == x.floor() && x <= c(171.0) {
        let mut acc = T::one();
        let mut k = T::one() + T::one();
        while k < x {
            acc = acc * k;
            k = k + T::one();
        }
        return acc;
    }
    if x < c(0.5) {
        return gamma_pos(x + T::one()) / x;
    }
    let z = x - T::one();
    let mut acc = c::<T>(LANCZOS_COEF[0]);
    for (i, &coef) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc = acc + c::<T>(coef) / (z + T::of_usize(i));
    }
    let t = z + c(LANCZOS_G + 0.5);
    T::TAU().sqrt() * t.powf(z + c(0.5)) * (-t).exp() * acc
}

/// A one-dimensional law from the test corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DistributionSpec {
    Gaussian,
    /// Unit-variance density `c exp(-b |x|^beta)`.
    GeneralizedGaussian {
        beta: f64,
    },
    /// Student t rescaled to unit variance.
    StudentT {
        theta: f64,
    },
    /// Uniform on `[-sqrt 3, sqrt 3]`; only admitted where no score is needed.
    UniformSqrt3,
    GaussianMixture {
        weights: Vec<f64>,
        means: Vec<f64>,
        sds: Vec<f64>,
    },
}

/// Normalizing and rate constants `(c_beta, b_beta)` of the generalized Gaussian.
pub fn generalized_gaussian_constants(beta: f64) -> Result<(f64, f64)> {
    if !(beta > 1.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "beta must exceed 1, got {beta}"
        )));
    }
    let g1 = gamma_pos(1.0 / beta);
    let g3 = gamma_pos(3.0 / beta);
    let ratio = g3 / g1;
    let cb = beta / (2.0 * g1) * ratio.sqrt();
    let bb = ratio.powf(beta / 2.0);
    Ok((cb, bb))
}

/// Normalizing constant of the unit-variance Student density.
pub fn student_constant(theta: f64) -> Result<f64> {
    if !(theta > 2.0 && theta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "theta must exceed 2, got {theta}"
        )));
    }
    Ok(gamma_pos((theta + 1.0) / 2.0)
        / ((std::f64::consts::PI * (theta - 2.0)).sqrt() * gamma_pos(theta / 2.0)))
}

/// `J` of the unit-variance generalized Gaussian:
/// `beta^2 Γ(3/β) Γ(2 - 1/β) / Γ(1/β)^2 - 1`.
pub fn closed_form_j_beta(beta: f64) -> Result<f64> {
    if !(beta > 1.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "beta must exceed 1, got {beta}"
        )));
    }
    let g1 = gamma_fn(1.0 / beta)?;
    Ok(beta * beta * gamma_fn(3.0 / beta)? * gamma_fn(2.0 - 1.0 / beta)? / (g1 * g1) - 1.0)
}

/// `J` of the unit-variance Student law: `6 / ((θ - 2)(θ + 3))`.
pub fn closed_form_j_theta(theta: f64) -> Result<f64> {
    if !(theta > 2.0 && theta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "theta must exceed 2, got {theta}"
        )));
    }
    Ok(6.0 / ((theta - 2.0) * (theta + 3.0)))
}

impl DistributionSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Gaussian | Self::UniformSqrt3 => Ok(()),
            Self::GeneralizedGaussian { beta } => generalized_gaussian_constants(*beta).map(|_| ()),
            Self::StudentT { theta } => student_constant(*theta).map(|_| ()),
            Self::GaussianMixture {
                weights,
                means,
                sds,
            } => {
                if weights.is_empty() || weights.len() != means.len() || weights.len() != sds.len()
                {
                    return Err(Error::InvalidParameter(
                        "mixture needs equally many weights, means and sds".into(),
                    ));
                }
                if weights.iter().any(|w| !(*w > 0.0 && w.is_finite()))
                    || sds.iter().any(|s| !(*s > 0.0 && s.is_finite()))
                    || means.iter().any(|m| !m.is_finite())
                {
                    return Err(Error::InvalidParameter(
                        "mixture weights and sds must be positive and finite".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// Short label used in reports, e.g. `q_4` or `t_6`.
    pub fn label(&self) -> String {
        match self {
            Self::Gaussian => "gaussian".into(),
            Self::GeneralizedGaussian { beta } => format!("q_{beta}"),
            Self::StudentT { theta } => format!("t_{theta}"),
            Self::UniformSqrt3 => "uniform_sqrt3".into(),
            Self::GaussianMixture { weights, .. } => format!("mixture_{}", weights.len()),
        }
    }

    /// Whether the law has a score function (the uniform law does not).
    pub fn admits_score(&self) -> bool {
        !matches!(self, Self::UniformSqrt3)
    }

    /// Exact `J` when the family has a closed form.
    pub fn exact_relative_fisher(&self) -> Option<f64> {
        match self {
            Self::Gaussian => Some(0.0),
            Self::GeneralizedGaussian { beta } => closed_form_j_beta(*beta).ok(),
            Self::StudentT { theta } => closed_form_j_theta(*theta).ok(),
            _ => None,
        }
    }

    /// The (unnormalized for mixtures, otherwise exact) density.
    pub fn pdf(&self) -> Result<Box<dyn Fn(f64) -> f64 + Send + Sync>> {
        self.validate()?;
        Ok(match self.clone() {
            Self::Gaussian => {
                Box::new(|x: f64| (-x * x / 2.0).exp() / std::f64::consts::TAU.sqrt())
            }
            Self::GeneralizedGaussian { beta } => {
                let (cb, bb) = generalized_gaussian_constants(beta)?;
                Box::new(move |x: f64| cb * (-bb * x.abs().powf(beta)).exp())
            }
            Self::StudentT { theta } => {
                let ct = student_constant(theta)?;
                Box::new(move |x: f64| {
                    ct * (1.0 + x * x / (theta - 2.0)).powf(-(theta + 1.0) / 2.0)
                })
            }
            Self::UniformSqrt3 => {
                let r = 3f64.sqrt();
                Box::new(move |x: f64| if x.abs() <= r { 1.0 / (2.0 * r) } else { 0.0 })
            }
            Self::GaussianMixture {
                weights,
                means,
                sds,
            } => {
                let total: f64 = weights.iter().sum();
                Box::new(move |x: f64| {
                    weights
                        .iter()
                        .zip(&means)
                        .zip(&sds)
                        .map(|((w, m), s)| {
                            let z = (x - m) / s;
                            w / total * (-z * z / 2.0).exp() / (std::f64::consts::TAU.sqrt() * s)
                        })
                        .sum()
                })
            }
        })
    }

    fn mixture_moments(weights: &[f64], means: &[f64], sds: &[f64]) -> (f64, f64) {
        let total: f64 = weights.iter().sum();
        let mean: f64 = weights.iter().zip(means).map(|(w, m)| w * m).sum::<f64>() / total;
        let second: f64 = weights
            .iter()
            .zip(means)
            .zip(sds)
            .map(|((w, m), s)| w * (s * s + m * m))
            .sum::<f64>()
            / total;
        (mean, second - mean * mean)
    }
}

/// Grid density of the law, standardized to mean 0 and variance 1
/// (the uniform law is returned on its exact support `[-sqrt 3, sqrt 3]`).
pub fn make_density<T: Real>(spec: &DistributionSpec, n_points: usize) -> Result<GridDensity<T>> {
    spec.validate()?;
    match spec {
        DistributionSpec::UniformSqrt3 => {
            let r = c::<T>(3.0).sqrt();
            let v = (r + r).recip();
            grid::normalize(&GridDensity::from_values(-r, r, vec![v; n_points])?)
        }
        DistributionSpec::GaussianMixture {
            weights,
            means,
            sds,
        } => {
            let pdf = spec.pdf()?;
            let (mean, var) = DistributionSpec::mixture_moments(weights, means, sds);
            let g = build_from_pdf(
                |x: T| T::lit(pdf(x.to_f64_lossy())),
                c(mean),
                c(var.sqrt()),
                n_points,
            )?;
            grid::standardize(&g)
        }
        DistributionSpec::StudentT { .. } => {
            let pdf = spec.pdf()?;
            let cap = polynomial_tail_cap(&pdf);
            grid::build_from_pdf_with(
                |x: T| T::lit(pdf(x.to_f64_lossy())),
                T::zero(),
                T::one(),
                n_points,
                c(cap),
            )
        }
        _ => {
            let pdf = spec.pdf()?;
            build_from_pdf(
                |x: T| T::lit(pdf(x.to_f64_lossy())),
                T::zero(),
                T::one(),
                n_points,
            )
        }
    }
}

/// Density level below which a polynomial tail is cut off.
pub const TAIL_DENSITY_FLOOR: f64 = 1e-14;

/// Smallest half-width (at least [`grid::MAX_HALF_WIDTH`]) where a symmetric,
/// decreasing pdf drops below [`TAIL_DENSITY_FLOOR`].
fn polynomial_tail_cap(pdf: &dyn Fn(f64) -> f64) -> f64 {
    let floor = grid::MAX_HALF_WIDTH;
    if pdf(floor) < TAIL_DENSITY_FLOOR {
        return floor;
    }
    let (mut a, mut b) = (floor, 2.0 * floor);
    while pdf(b) >= TAIL_DENSITY_FLOOR && b < 1e6 {
        a = b;
        b *= 2.0;
    }
    for _ in 0..40 {
        let m = 0.5 * (a + b);
        if pdf(m) < TAIL_DENSITY_FLOOR {
            b = m;
        } else {
            a = m;
        }
    }
    b
}

/// `d` independent copies of the standardized law.
pub fn product_iid<T: Real>(
    spec: &DistributionSpec,
    d: usize,
    n_points: usize,
) -> Result<ProductMeasure<T>> {
    if d == 0 {
        return Err(Error::InvalidParameter(
            "dimension must be at least 1".into(),
        ));
    }
    ProductMeasure::iid(make_density(spec, n_points)?, d)
}
