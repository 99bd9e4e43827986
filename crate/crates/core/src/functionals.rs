//! Score functions and the information functionals built on them.
//!
//! Scores are finite differences of the log-density. Nodes below
//! `P_FLOOR_REL * max(p)` are excluded from every integral; the floor also
//! keeps the logarithm finite.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{moments, GridDensity, GridMeta, ProductMeasure};
use crate::quadrature::trap_weight;
use crate::scalar::{c, Real};

/// Relative density floor below which nodes are treated as empty.
pub const P_FLOOR_REL: f64 = 1e-12;

/// Largest tolerated `|E[rho(X)]|` for a score field.
pub const SCORE_MEAN_TOL: f64 = 1e-4;

// eighth-order central first-derivative weights for offsets 1..=4
const D8: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
const D6: [f64; 3] = [3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0];
const D4: [f64; 2] = [2.0 / 3.0, -1.0 / 12.0];
const D2: [f64; 1] = [1.0 / 2.0];

/// Derivative of sampled data: eighth-order central differences in the
/// interior, lower-order central near the ends and one-sided at the ends.
pub fn differentiate<T: Real>(f: &[T], h: T) -> Vec<T> {
    let n = f.len();
    assert!(n >= 3, "differentiation needs at least three samples");
    (0..n)
        .map(|i| {
            if i == 0 {
                (c::<T>(-3.0) * f[0] + c::<T>(4.0) * f[1] - f[2]) / (h + h)
            } else if i == n - 1 {
                (c::<T>(3.0) * f[n - 1] - c::<T>(4.0) * f[n - 2] + f[n - 3]) / (h + h)
            } else {
                let reach = i.min(n - 1 - i).min(4);
                let w: &[f64] = match reach {
                    1 => &D2,
                    2 => &D4,
                    3 => &D6,
                    _ => &D8,
                };
                let s: T = w
                    .iter()
                    .enumerate()
                    .map(|(k, &wk)| c::<T>(wk) * (f[i + k + 1] - f[i - k - 1]))
                    .sum();
                s / h
            }
        })
        .collect()
}

/// `rho = (log p)'` on the nodes of a grid density.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreField<T> {
    meta: GridMeta,
    lo: T,
    h: T,
    scores: Vec<T>,
    valid: Vec<bool>,
}

impl<T: Real> ScoreField<T> {
    pub fn scores(&self) -> &[T] {
        &self.scores
    }

    pub fn valid_mask(&self) -> &[bool] {
        &self.valid
    }

    pub fn meta(&self) -> GridMeta {
        self.meta
    }

    pub fn node(&self, i: usize) -> T {
        self.lo + self.h * T::of_usize(i)
    }

    /// Linear interpolation of the scores (only meaningful on the valid mask).
    pub fn eval(&self, x: T) -> T {
        let n = self.scores.len();
        let pos = ((x - self.lo) / self.h).max(T::zero());
        let i = pos.floor().to_usize().unwrap_or(0).min(n - 2);
        let frac = (pos - T::of_usize(i)).min(T::one());
        self.scores[i] * (T::one() - frac) + self.scores[i + 1] * frac
    }

    /// `(E[rho(X)], E[X rho(X)])` under the density the field came from.
    pub fn moments(&self, g: &GridDensity<T>) -> (T, T) {
        let n = g.len();
        let h = g.spacing();
        let mut m0 = T::zero();
        let mut m1 = T::zero();
        for (i, (&p, &r)) in g.values().iter().zip(&self.scores).enumerate() {
            if self.valid[i] {
                let w = trap_weight(i, n, h) * p * r;
                m0 = m0 + w;
                m1 = m1 + w * g.node(i);
            }
        }
        (m0, m1)
    }
}

fn floor_of<T: Real>(g: &GridDensity<T>) -> T {
    g.max_value() * c(P_FLOOR_REL)
}

/// Score of a normalized grid density.
pub fn score<T: Real>(g: &GridDensity<T>) -> Result<ScoreField<T>> {
    let field = score_unchecked(g)?;
    let (m0, _) = field.moments(g);
    if m0.abs() > c(SCORE_MEAN_TOL) {
        return Err(Error::ScoreIdentity(m0.to_f64_lossy()));
    }
    Ok(field)
}

/// Score without the mean-zero check (used for intermediate tables).
pub(crate) fn score_unchecked<T: Real>(g: &GridDensity<T>) -> Result<ScoreField<T>> {
    if g.len() < 3 {
        return Err(Error::TooFewPoints {
            got: g.len(),
            min: 3,
        });
    }
    let floor = floor_of(g);
    let logs: Vec<T> = g.values().iter().map(|&p| p.max(floor).ln()).collect();
    let scores = differentiate(&logs, g.spacing());
    let valid = g.values().iter().map(|&p| p >= floor).collect();
    Ok(ScoreField {
        meta: g.meta(),
        lo: g.lo(),
        h: g.spacing(),
        scores,
        valid,
    })
}

fn fisher_with<T: Real>(g: &GridDensity<T>, field: &ScoreField<T>) -> T {
    let n = g.len();
    let h = g.spacing();
    g.values()
        .iter()
        .zip(field.scores())
        .enumerate()
        .filter(|(i, _)| field.valid[*i])
        .map(|(i, (&p, &r))| trap_weight(i, n, h) * r * r * p)
        .sum()
}

/// `I(X) = E[rho(X)^2]`.
pub fn fisher_information<T: Real>(g: &GridDensity<T>) -> Result<T> {
    Ok(fisher_with(g, &score(g)?))
}

/// `J(X)` relative to the Gaussian with the same variance, through the
/// identity `J = I(standardized X) - 1 = Var(X) I(X) - 1`.
pub fn relative_fisher<T: Real>(g: &GridDensity<T>) -> Result<T> {
    let m = moments(g);
    if !(m.variance > T::zero()) {
        return Err(Error::ZeroVariance(m.variance.to_f64_lossy()));
    }
    Ok(m.variance * fisher_information(g)? - T::one())
}

/// `J(X)` by direct quadrature of `E[sigma^2 (rho + (X - mu)/sigma^2)^2]`.
/// Kept as an independent route for `relative_fisher`.
pub fn relative_fisher_direct<T: Real>(g: &GridDensity<T>) -> Result<T> {
    let m = moments(g);
    if !(m.variance > T::zero()) {
        return Err(Error::ZeroVariance(m.variance.to_f64_lossy()));
    }
    let field = score(g)?;
    let n = g.len();
    let h = g.spacing();
    Ok((0..n)
        .filter(|&i| field.valid[i])
        .map(|i| {
            let d = field.scores[i] + (g.node(i) - m.mean) / m.variance;
            trap_weight(i, n, h) * m.variance * d * d * g.values()[i]
        })
        .sum())
}

/// `-E[log p(X)]` in nats, with `0 log 0 = 0` below the floor.
pub fn differential_entropy<T: Real>(g: &GridDensity<T>) -> T {
    let floor = floor_of(g);
    let n = g.len();
    let h = g.spacing();
    -g.values()
        .iter()
        .enumerate()
        .filter(|(_, &p)| p >= floor && p > T::zero())
        .map(|(i, &p)| trap_weight(i, n, h) * p * p.ln())
        .sum::<T>()
}

/// `Ent(X|Z)` against the standard normal, through
/// `-h(X) + log(2 pi)/2 + E[X^2]/2`.
pub fn relative_entropy_to_gaussian<T: Real>(g: &GridDensity<T>) -> T {
    let second = g.expect(|x| x * x) / g.integral();
    -differential_entropy(g) + T::TAU().ln() / c(2.0) + second / c(2.0)
}

/// `Ent(X|Z)` by direct quadrature of `p log(p / phi)`.
pub fn relative_entropy_direct<T: Real>(g: &GridDensity<T>) -> T {
    let floor = floor_of(g);
    let n = g.len();
    let h = g.spacing();
    let half_log_tau = T::TAU().ln() / c(2.0);
    g.values()
        .iter()
        .enumerate()
        .filter(|(_, &p)| p >= floor && p > T::zero())
        .map(|(i, &p)| {
            let x = g.node(i);
            let log_phi = -x * x / c(2.0) - half_log_tau;
            trap_weight(i, n, h) * p * (p.ln() - log_phi)
        })
        .sum()
}

/// The functionals of one density (or the coordinate sums of a product).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfoProfile<T> {
    pub mean: T,
    pub variance: T,
    pub diff_entropy: T,
    pub rel_entropy: T,
    pub fisher: T,
    pub rel_fisher: T,
    pub grid_meta: GridMeta,
}

pub fn profile<T: Real>(g: &GridDensity<T>) -> Result<InfoProfile<T>> {
    let m = moments(g);
    if !(m.variance > T::zero()) {
        return Err(Error::ZeroVariance(m.variance.to_f64_lossy()));
    }
    let fisher = fisher_information(g)?;
    Ok(InfoProfile {
        mean: m.mean,
        variance: m.variance,
        diff_entropy: differential_entropy(g),
        rel_entropy: relative_entropy_to_gaussian(g),
        fisher,
        rel_fisher: m.variance * fisher - T::one(),
        grid_meta: g.meta(),
    })
}

/// Coordinate sums of entropy and Fisher functionals; `mean` and
/// `variance` are the coordinate averages (0 and 1 for isotropic laws).
pub fn product_profile<T: Real>(m: &ProductMeasure<T>) -> Result<InfoProfile<T>> {
    let first = profile(&m.coords()[0])?;
    let rest = if m.is_iid() {
        vec![first.clone(); m.dim() - 1]
    } else {
        m.coords()[1..]
            .iter()
            .map(profile)
            .collect::<Result<Vec<_>>>()?
    };
    let d = T::of_usize(m.dim());
    let mut acc = first.clone();
    for p in &rest {
        acc.mean = acc.mean + p.mean;
        acc.variance = acc.variance + p.variance;
        acc.diff_entropy = acc.diff_entropy + p.diff_entropy;
        acc.rel_entropy = acc.rel_entropy + p.rel_entropy;
        acc.fisher = acc.fisher + p.fisher;
        acc.rel_fisher = acc.rel_fisher + p.rel_fisher;
    }
    acc.mean = acc.mean / d;
    acc.variance = acc.variance / d;
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{
        closed_form_j_beta, generalized_gaussian_constants, make_density, DistributionSpec,
    };
    use crate::grid::{build_from_pdf, scale, shift, standardize};

    fn gauss(var: f64) -> GridDensity<f64> {
        build_from_pdf(
            move |x: f64| (-x * x / (2.0 * var)).exp() / (std::f64::consts::TAU * var).sqrt(),
            0.0,
            var.sqrt(),
            4096,
        )
        .unwrap()
    }

    fn q(beta: f64) -> GridDensity<f64> {
        make_density(&DistributionSpec::GeneralizedGaussian { beta }, 4096).unwrap()
    }

    #[test]
    fn differentiation_orders() {
        let h = 0.01;
        let f: Vec<f64> = (0..200).map(|i| (i as f64 * h).sin()).collect();
        let d = differentiate(&f, h);
        for (i, v) in d.iter().enumerate().skip(4).take(190) {
            assert!((v - (i as f64 * h).cos()).abs() < 1e-12);
        }
        assert!((d[0] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn gaussian_scores() {
        let g = gauss(1.0);
        let s = score(&g).unwrap();
        let worst = g
            .nodes()
            .zip(s.scores())
            .filter(|(x, _)| x.abs() <= 4.0)
            .map(|(x, r)| (r + x).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-3, "{worst}");
        let g4 = gauss(4.0);
        let s4 = score(&g4).unwrap();
        let worst4 = g4
            .nodes()
            .zip(s4.scores())
            .filter(|(x, _)| x.abs() <= 8.0)
            .map(|(x, r)| (r + x / 4.0).abs())
            .fold(0.0, f64::max);
        assert!(worst4 < 1e-3);
    }

    #[test]
    fn generalized_gaussian_score() {
        let g = q(4.0);
        let (_, b) = generalized_gaussian_constants(4.0).unwrap();
        let s = score(&g).unwrap();
        for (x, r) in g.nodes().zip(s.scores()) {
            if (0.5..=2.0).contains(&x.abs()) {
                let exact = -4.0 * b * x.powi(3);
                assert!(((r - exact) / exact).abs() < 1e-2);
            }
        }
    }

    #[test]
    fn gaussian_fisher_and_entropy() {
        let g = gauss(1.0);
        assert!((fisher_information(&g).unwrap() - 1.0).abs() < 1e-4);
        assert!(relative_fisher(&g).unwrap().abs() < 1e-6);
        let h = 0.5 * (std::f64::consts::TAU * std::f64::consts::E).ln();
        assert!((differential_entropy(&g) - h).abs() < 1e-5);
        assert!(relative_entropy_to_gaussian(&g).abs() < 1e-6);
        let g4 = gauss(4.0);
        assert!((fisher_information(&g4).unwrap() - 0.25).abs() < 1e-4);
        let h4 = 0.5 * (std::f64::consts::TAU * std::f64::consts::E * 4.0).ln();
        assert!((differential_entropy(&g4) - h4).abs() < 1e-5);
    }

    #[test]
    fn uniform_entropy() {
        let u = make_density::<f64>(&DistributionSpec::UniformSqrt3, 4096).unwrap();
        assert!((differential_entropy(&u) - (2.0 * 3f64.sqrt()).ln()).abs() < 1e-5);
    }

    #[test]
    fn gaussian_relative_entropy_closed_form() {
        let g = gauss(2.0);
        let expect = 0.5 * (2.0 - 1.0 - 2f64.ln());
        assert!((relative_entropy_to_gaussian(&g) - expect).abs() < 1e-5);
    }

    #[test]
    fn two_entropy_routes_agree() {
        let g = q(4.0);
        let a = relative_entropy_to_gaussian(&g);
        let b = relative_entropy_direct(&g);
        assert!(a > 0.0);
        assert!((a - b).abs() < 1e-6, "{a} {b}");
    }

    #[test]
    fn fisher_of_q4_matches_closed_form() {
        let g = q(4.0);
        let j = closed_form_j_beta(4.0).unwrap();
        assert!((fisher_information(&g).unwrap() - (1.0 + j)).abs() < 1e-4);
        let jr = relative_fisher(&g).unwrap();
        assert!(((jr - j) / j).abs() < 1e-5, "{jr} {j}");
        let jd = relative_fisher_direct(&g).unwrap();
        assert!(((jd - j) / j).abs() < 1e-5, "{jd} {j}");
    }

    #[test]
    fn relative_fisher_is_affine_invariant() {
        for (mu, var) in [(0.0f64, 1.0f64), (1.5, 0.3), (-2.0, 5.0)] {
            let g = build_from_pdf(
                move |x: f64| {
                    (-(x - mu) * (x - mu) / (2.0 * var)).exp()
                        / (std::f64::consts::TAU * var).sqrt()
                },
                mu,
                var.sqrt(),
                4096,
            )
            .unwrap();
            assert!(relative_fisher(&g).unwrap().abs() < 1e-5);
        }
        let base = standardize(&q(3.0)).unwrap();
        let j0 = relative_fisher(&base).unwrap();
        for (a, b) in [(2.0, 0.0), (0.5, 1.0)] {
            let moved = standardize(&shift(&scale(&base, a).unwrap(), b)).unwrap();
            assert!((relative_fisher(&moved).unwrap() - j0).abs() < 1e-4);
        }
    }

    #[test]
    fn profile_bundles_functionals() {
        let p = profile(&gauss(1.0)).unwrap();
        assert!(p.mean.abs() < 1e-8 && (p.variance - 1.0).abs() < 1e-8);
        assert!(p.rel_entropy.abs() < 1e-6 && p.rel_fisher.abs() < 1e-6);
        assert!((p.fisher - 1.0).abs() < 1e-4);
        assert!((p.rel_fisher - (p.fisher - 1.0)).abs() < 1e-6);
        assert_eq!(p.grid_meta.n_points, 4096);
    }

    #[test]
    fn product_profile_adds() {
        let g = q(4.0);
        let single = profile(&g).unwrap();
        let pm = ProductMeasure::iid(g, 2).unwrap();
        let pp = product_profile(&pm).unwrap();
        assert!((pp.rel_fisher - 2.0 * single.rel_fisher).abs() < 1e-12);
        assert!((pp.rel_entropy - 2.0 * single.rel_entropy).abs() < 1e-12);
        let mixed = ProductMeasure::new(vec![gauss(1.0), q(4.0), gauss(1.0)]).unwrap();
        let pm = product_profile(&mixed).unwrap();
        assert!((pm.rel_fisher - single.rel_fisher).abs() < 1e-5);
    }

    #[test]
    fn score_needs_points() {
        let g = gauss(1.0);
        assert!(score(&g).is_ok());
        let lopsided =
            GridDensity::from_values(0.0, 1.0, (0..100).map(|i| (i as f64).exp()).collect())
                .unwrap();
        assert!(matches!(
            score(&crate::grid::normalize(&lopsided).unwrap()),
            Err(Error::ScoreIdentity(_))
        ));
    }
}
