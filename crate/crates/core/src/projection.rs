//! Exact quadrature of the score projections for two summands (`n = 2`,
//! one dimension).
//!
//! Every expectation over `(X_1, X_2)` is the tensor trapezoid rule on the
//! base grid. On that rule `S_2 = X_1 + X_2` lives on the lattice
//! `2 lo + k h`, so conditional expectations given `S_2` are exact
//! discrete sums.

use rayon::prelude::*;
use serde::Serialize;

use crate::convolve::clt_density;
use crate::error::{Error, Result};
use crate::fft::linear_convolve;
use crate::functionals::{
    differentiate, fisher_information, relative_fisher, score, score_unchecked, P_FLOOR_REL,
};
use crate::grid::{GridDensity, GridMeta};
use crate::quadrature::trap_weight;
use crate::scalar::{c, Real};

/// Largest tolerated base mass outside the 2-D quadrature region.
pub const EXCLUDED_MASS_TOL: f64 = 1e-8;

/// `S_2` on the lattice induced by the base grid, with
/// `E[rho_{X_1}(X_1) | S_2]` and the finite-difference score of `S_2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalScore<T> {
    /// Density of `S_2` on the lattice (spacing equal to the base spacing).
    pub sum_density: GridDensity<T>,
    /// `E[rho_{X_1}(X_1) | S_2 = s]` at the lattice nodes.
    pub conditional: Vec<T>,
    /// `rho_{S_2}` at the lattice nodes.
    pub sum_score: Vec<T>,
    /// Nodes where the `S_2` density is above the floor.
    pub valid: Vec<bool>,
}

impl<T: Real> ConditionalScore<T> {
    fn weighted_sum<F: Fn(usize) -> T>(&self, f: F) -> T {
        let g = &self.sum_density;
        let (n, h) = (g.len(), g.spacing());
        (0..n)
            .filter(|&k| self.valid[k])
            .map(|k| trap_weight(k, n, h) * g.values()[k] * f(k))
            .sum()
    }

    /// Weighted `L^2` distance between the conditional expectation and the
    /// score of the sum.
    pub fn identity_residual(&self) -> T {
        self.weighted_sum(|k| {
            let d = self.conditional[k] - self.sum_score[k];
            d * d
        })
        .sqrt()
    }

    /// Relative gap between `E[phi(S) E[rho_1 | S]]` and `E[phi(S) rho_S(S)]`.
    pub fn test_function_gap<F: Fn(T) -> T>(&self, phi: F) -> T {
        let g = &self.sum_density;
        let lhs = self.weighted_sum(|k| phi(g.node(k)) * self.conditional[k]);
        let rhs = self.weighted_sum(|k| phi(g.node(k)) * self.sum_score[k]);
        (lhs - rhs).abs() / rhs.abs().max(c(1e-12))
    }
}

fn trapezoid_weighted<T: Real>(g: &GridDensity<T>) -> Vec<T> {
    let (n, h) = (g.len(), g.spacing());
    g.values()
        .iter()
        .enumerate()
        .map(|(i, &p)| trap_weight(i, n, h) * p)
        .collect()
}

/// `s -> E[rho_{X_1}(X_1) | X_1 + X_2 = s]` for independent copies of `base`.
pub fn conditional_score<T: Real>(base: &GridDensity<T>) -> Result<ConditionalScore<T>> {
    let rho = score(base)?;
    let h = base.spacing();
    let a = trapezoid_weighted(base);
    let a_rho: Vec<T> = a.iter().zip(rho.scores()).map(|(&w, &r)| w * r).collect();
    let mass: Vec<T> = linear_convolve(&a, &a);
    let num = linear_convolve(&a_rho, &a);
    let values: Vec<T> = mass.iter().map(|&m| (m / h).max(T::zero())).collect();
    let lo = base.lo() + base.lo();
    let hi = lo + h * T::of_usize(values.len() - 1);
    let sum_density = GridDensity::from_values(lo, hi, values)?;
    let floor = sum_density.max_value() * c(P_FLOOR_REL);
    let valid: Vec<bool> = sum_density.values().iter().map(|&p| p >= floor).collect();
    let conditional = num
        .iter()
        .zip(&mass)
        .zip(&valid)
        .map(|((&nu, &m), &ok)| {
            if ok && m > T::zero() {
                nu / m
            } else {
                T::zero()
            }
        })
        .collect();
    let sum_score = score_unchecked(&sum_density)?.scores().to_vec();
    Ok(ConditionalScore {
        sum_density,
        conditional,
        sum_score,
        valid,
    })
}

/// `(E[rho(X)], E[X rho(X)])`; `(0, -1)` for any density with a score.
pub fn score_moments_check<T: Real>(g: &GridDensity<T>) -> Result<(T, T)> {
    Ok(score_unchecked(g)?.moments(g))
}

/// Every quantity of the two-summand projection argument.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionReport<T> {
    pub n: usize,
    pub grid_meta: GridMeta,
    /// Weighted `L^2` gap between `E[rho_{X_1} | S_2]` and `rho_{S_2}`.
    pub identity_residual: T,
    /// Relative gaps of the projection identity tested against `s` and `s^3`.
    pub test_gap_linear: T,
    pub test_gap_cubic: T,
    /// `Delta_2 = E|f_2(Z_2) - f_1(X_1/sqrt 2) - g(X_2)/sqrt 2|^2`.
    pub delta2: T,
    /// `E|V - V_hat|^2` with `V = rho_{Z_2}(Z_2) + Z_2` and `V_hat` its
    /// additive projection.
    pub ridge_minus_additive: T,
    /// `E|V|^2`, the relative Fisher information of `Z_2` on the lattice.
    pub v_sq: T,
    /// `E|V_hat|^2 = E|g(X_1) + X_1|^2`.
    pub hat_v_sq: T,
    /// `M = E[g'(X_1)]`.
    pub m_scalar: T,
    pub fisher_x1: T,
    pub rel_fisher_x1: T,
    pub fisher_z2: T,
    pub rel_fisher_z2: T,
    /// `E|g(X_1) - M X_1|^2`.
    pub g_affine_gap: T,
    /// `E[(g(X_1) + X_1) X_1]`, zero by the score moment identities.
    pub orthogonality: T,
    /// Largest `|f_1(u / sqrt 2) - g(u) / sqrt 2|` over the base nodes
    /// with mass (the two routes to `g`).
    pub g_route_gap: T,
    /// Base mass left out of the 2-D quadrature region.
    pub excluded_mass: T,
    pub r_used: T,
    /// `Delta_2 - E|g - M X|^2 / (2 I(X_1) R)`.
    pub lower_bound_slack: T,
    /// `J(Z_2) - J(Z_2)^2 / J(X_1) - E|g - M X|^2 / (2 R I(X_1))`.
    pub prop_fi_slack: T,
    /// `|(E|V|^2 - E|V_hat|^2) - E|V - V_hat|^2|`.
    pub pythagoras_gap: T,
    /// `E|V_hat|^2 - J(Z_2)^2 / J(X_1)`.
    pub cauchy_schwarz_slack: T,
    #[serde(skip)]
    pub g_nodes: Vec<T>,
    #[serde(skip)]
    pub g_values: Vec<T>,
}

/// `J(Z)^2 / J(X)`, with the Gaussian `0/0` read as 0.
fn squared_ratio<T: Real>(jz: T, jx: T) -> T {
    if jx.abs() < c(1e-12) {
        T::zero()
    } else {
        jz * jz / jx
    }
}

/// Builds the projection report for `Z_2` of `base` (standardized) with
/// Poincaré constant `r`.
pub fn projection_report_n2<T: Real>(base: &GridDensity<T>, r: T) -> Result<ProjectionReport<T>> {
    if !(r >= T::one()) {
        return Err(Error::InvalidParameter(format!(
            "Poincaré constant of a standardized law is at least 1, got {r}"
        )));
    }
    let n = base.len();
    let h = base.spacing();
    let p = base.values();
    let a = trapezoid_weighted(base);
    let root2 = c::<T>(2.0).sqrt();

    let cs = conditional_score(base)?;
    let identity_residual = cs.identity_residual();
    let test_gap_linear = cs.test_function_gap(|s| s);
    let test_gap_cubic = cs.test_function_gap(|s| s * s * s);
    let rho_s = &cs.sum_score;

    // g(u) = 2 E[rho_{S_2}(u + X_2)] on the base nodes, as a correlation.
    let a_rev: Vec<T> = a.iter().rev().copied().collect();
    let corr = linear_convolve(&a_rev, rho_s);
    let g_values: Vec<T> = (0..n).map(|i| c::<T>(2.0) * corr[i + n - 1]).collect();
    let g_nodes: Vec<T> = base.nodes().collect();

    let floor = base.max_value() * c(P_FLOOR_REL);
    let inside: Vec<usize> = (0..n).filter(|&i| p[i] >= floor).collect();
    let inner_mass: T = inside.iter().map(|&i| a[i]).sum();
    let excluded_mass = (T::one() - inner_mass * inner_mass).max(T::zero());
    if excluded_mass > c(EXCLUDED_MASS_TOL) {
        return Err(Error::Resolution(excluded_mass.to_f64_lossy()));
    }

    // ridge minus additive field and E|V|^2 on the aligned lattice
    let (ridge_minus_additive, v_sq) = inside
        .par_iter()
        .map(|&i| {
            inside
                .iter()
                .fold((T::zero(), T::zero()), |(acc_d, acc_v), &j| {
                    let w = a[i] * a[j];
                    let d = root2 * rho_s[i + j] - (g_values[i] + g_values[j]) / root2;
                    let v = root2 * rho_s[i + j] + (base.node(i) + base.node(j)) / root2;
                    (acc_d + w * d * d, acc_v + w * v * v)
                })
        })
        .collect::<Vec<(T, T)>>()
        .into_iter()
        .fold((T::zero(), T::zero()), |(x, y), (d, v)| (x + d, y + v));

    // Delta_2 through the density of Z_2 built by clt_density and its score
    let z2 = clt_density(base, 2)?;
    let f2 = score_unchecked(&z2)?;
    let f1: Vec<T> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = base.node(i);
            inside
                .iter()
                .map(|&j| a[j] * f2.eval((x + base.node(j)) / root2))
                .sum::<T>()
        })
        .collect();
    let delta2: T = inside
        .par_iter()
        .map(|&i| {
            let xi = base.node(i);
            inside
                .iter()
                .map(|&j| {
                    let d = f2.eval((xi + base.node(j)) / root2) - f1[i] - g_values[j] / root2;
                    a[i] * a[j] * d * d
                })
                .sum::<T>()
        })
        .collect::<Vec<T>>()
        .into_iter()
        .sum();
    let g_route_gap = inside
        .iter()
        .map(|&i| (f1[i] - g_values[i] / root2).abs() * (p[i] / base.max_value()))
        .fold(T::zero(), T::max);

    let dg = differentiate(&g_values, h);
    let m_scalar: T = inside.iter().map(|&i| a[i] * dg[i]).sum();
    let expect = |f: &dyn Fn(usize) -> T| -> T { inside.iter().map(|&i| a[i] * f(i)).sum() };
    let g_affine_gap = expect(&|i| {
        let d = g_values[i] - m_scalar * base.node(i);
        d * d
    });
    let hat_v_sq = expect(&|i| {
        let d = g_values[i] + base.node(i);
        d * d
    });
    let orthogonality = expect(&|i| (g_values[i] + base.node(i)) * base.node(i));

    let fisher_x1 = fisher_information(base)?;
    let rel_fisher_x1 = relative_fisher(base)?;
    let fisher_z2 = fisher_information(&z2)?;
    let rel_fisher_z2 = relative_fisher(&z2)?;
    let lower_rhs = g_affine_gap / (c::<T>(2.0) * fisher_x1 * r);
    let ratio = squared_ratio(rel_fisher_z2, rel_fisher_x1);
    Ok(ProjectionReport {
        n: 2,
        grid_meta: base.meta(),
        identity_residual,
        test_gap_linear,
        test_gap_cubic,
        delta2,
        ridge_minus_additive,
        v_sq,
        hat_v_sq,
        m_scalar,
        fisher_x1,
        rel_fisher_x1,
        fisher_z2,
        rel_fisher_z2,
        g_affine_gap,
        orthogonality,
        g_route_gap,
        excluded_mass,
        r_used: r,
        lower_bound_slack: delta2 - lower_rhs,
        prop_fi_slack: rel_fisher_z2 - ratio - lower_rhs,
        pythagoras_gap: ((v_sq - hat_v_sq) - ridge_minus_additive).abs(),
        cauchy_schwarz_slack: hat_v_sq - ratio,
        g_nodes,
        g_values,
    })
}

/// Slack of `J(Z_2) - J(Z_2)^2/J(X_1) >= E|g - M X|^2 / (2 R I(X_1))`.
pub fn prop_fi_chain_check_n2<T: Real>(base: &GridDensity<T>, r: T) -> Result<T> {
    projection_report_n2(base, r).map(|rep| rep.prop_fi_slack)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{make_density, DistributionSpec};
    use crate::poincare::spectral_gap_1d;

    fn dens(s: DistributionSpec) -> GridDensity<f64> {
        make_density(&s, 2048).unwrap()
    }

    fn r_of(g: &GridDensity<f64>) -> f64 {
        spectral_gap_1d(g).unwrap().c_p * 1.01
    }

    #[test]
    fn gaussian_conditional_score_is_half() {
        let g = dens(DistributionSpec::Gaussian);
        let cs = conditional_score(&g).unwrap();
        let s = &cs.sum_density;
        for k in 0..s.len() {
            let x = s.node(k);
            if x.abs() <= 4.0 {
                assert!((cs.conditional[k] + x / 2.0).abs() < 1e-3, "s = {x}");
            }
        }
    }

    #[test]
    fn gaussian_report_is_exact() {
        let g = dens(DistributionSpec::Gaussian);
        let rep = projection_report_n2(&g, r_of(&g)).unwrap();
        assert!(rep.delta2.abs() < 1e-5);
        assert!(rep.ridge_minus_additive.abs() < 1e-5);
        assert!((rep.m_scalar + 1.0).abs() < 1e-5);
        assert!(rep.lower_bound_slack.abs() < 1e-5);
        assert!(rep.prop_fi_slack.abs() < 1e-5);
        for (x, gx) in rep.g_nodes.iter().zip(&rep.g_values) {
            if x.abs() < 4.0 {
                assert!((gx + x).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn q4_report() {
        let g = dens(DistributionSpec::GeneralizedGaussian { beta: 4.0 });
        let rep = projection_report_n2(&g, r_of(&g)).unwrap();
        assert!(rep.identity_residual < 1e-4);
        assert!((rep.ridge_minus_additive - rep.delta2).abs() / rep.delta2.max(1e-12) < 1e-3);
        assert!((rep.m_scalar + rep.fisher_z2).abs() < 1e-3);
        assert!(rep.lower_bound_slack >= -1e-4);
        assert!(rep.prop_fi_slack >= -1e-4);
        assert!(rep.orthogonality.abs() < 1e-4);
        assert!(rep.cauchy_schwarz_slack >= -1e-4);
        assert!(rep.pythagoras_gap < 1e-3 * rep.v_sq);
        assert!((rep.v_sq - rep.rel_fisher_z2).abs() < 1e-3 * rep.rel_fisher_z2);
    }

    #[test]
    fn score_moments() {
        for s in [
            DistributionSpec::Gaussian,
            DistributionSpec::GeneralizedGaussian { beta: 4.0 },
            DistributionSpec::StudentT { theta: 8.0 },
        ] {
            let (m0, m1) = score_moments_check(&dens(s)).unwrap();
            assert!(m0.abs() < 1e-4 && (m1 + 1.0).abs() < 1e-4);
        }
    }

    #[test]
    fn rejects_sub_unit_constant() {
        let g = dens(DistributionSpec::Gaussian);
        assert!(projection_report_n2(&g, 0.5).is_err());
    }
}
