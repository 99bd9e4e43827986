//! The Ornstein–Uhlenbeck flow `X(t) = e^{-t} X + sqrt(1 - e^{-2t}) Z` and
//! the entropy/Fisher identities and inequalities along it.

use rayon::prelude::*;

use crate::convolve::TRIM_REL;
use crate::error::{Error, Result};
use crate::fft::gaussian_smooth;
use crate::functionals::{relative_entropy_to_gaussian, relative_fisher};
use crate::grid::{normalize, scale, GridDensity};
use crate::quadrature::{trap_weight, GaussLegendre};
use crate::scalar::{c, Real};

/// Below this time the flow is the identity.
pub const SMALL_T: f64 = 1e-6;

/// Default Gauss–Legendre nodes per unit of time in the de Bruijn integral.
pub const NODES_PER_UNIT: usize = 16;

/// Kernel support in standard deviations.
const KERNEL_REACH: f64 = 10.0;

/// Target output spacing, in kernel standard deviations, once the kernel
/// is wide enough to make the input resolution wasteful.
const NODES_PER_SIGMA: f64 = 128.0;

/// Convolution with `N(0, s^2)` for `s` wide compared to the spacing: a
/// direct sum over a lattice-normalized kernel, written on every `m`-th
/// node of the input lattice.
fn wide_gaussian_convolve<T: Real>(g: &GridDensity<T>, s: T, m: usize) -> Result<GridDensity<T>> {
    let h = g.spacing();
    let n = g.len();
    let reach = (s * c(KERNEL_REACH) / h)
        .ceil()
        .to_usize()
        .unwrap_or(usize::MAX);
    let blocks = reach.div_ceil(m);
    let pad = blocks * m;
    let n_out = (n - 1 + 2 * pad) / m + 1;
    let two_var = s * s * c(2.0);
    let raw: Vec<T> = (0..=reach)
        .map(|k| {
            let x = h * T::of_usize(k);
            (-x * x / two_var).exp()
        })
        .collect();
    let z = h * (raw[0] + c::<T>(2.0) * raw[1..].iter().copied().sum::<T>());
    let kern: Vec<T> = raw.iter().map(|&v| v / z).collect();
    let weighted: Vec<T> = g
        .values()
        .iter()
        .enumerate()
        .map(|(i, &p)| trap_weight(i, n, h) * p)
        .collect();
    let values: Vec<T> = (0..n_out)
        .into_par_iter()
        .map(|j| {
            // input index of output node j, shifted by the padding
            let centre = j * m;
            let first = centre.saturating_sub(pad + reach);
            let last = (centre + reach).saturating_sub(pad).min(n - 1);
            if centre + reach < pad {
                return T::zero();
            }
            (first..=last)
                .map(|i| {
                    let k = (centre as isize - pad as isize - i as isize).unsigned_abs();
                    weighted[i] * kern[k]
                })
                .sum()
        })
        .collect();
    let lo = g.lo() - h * T::of_usize(pad);
    let hi = lo + h * T::of_usize(m * (n_out - 1));
    GridDensity::from_values(lo, hi, values)
}

/// Density of `X + s Z` with `Z` standard normal and independent of `X`.
pub fn add_gaussian<T: Real>(g: &GridDensity<T>, s: T) -> Result<GridDensity<T>> {
    if !(s >= T::zero() && s.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "noise level must be nonnegative, got {s}"
        )));
    }
    let h = g.spacing();
    let ratio = s / h;
    let out = if ratio <= c(NODES_PER_SIGMA) {
        let pad = (ratio * c(KERNEL_REACH)).ceil().to_usize().unwrap_or(0) + 2;
        let values: Vec<T> = gaussian_smooth(g.values(), h, s, pad)
            .into_iter()
            .map(|v| v.max(T::zero()))
            .collect();
        let lo = g.lo() - h * T::of_usize(pad);
        let hi = lo + h * T::of_usize(values.len() - 1);
        GridDensity::from_values(lo, hi, values)?
    } else {
        let m = (ratio / c(NODES_PER_SIGMA))
            .floor()
            .to_usize()
            .unwrap_or(1)
            .max(1);
        wide_gaussian_convolve(g, s, m)?
    };
    normalize(&out.with_tail_mass(g.tail_mass()).trimmed(c(TRIM_REL)))
}

/// Law of `X(t) = e^{-t} (X + sqrt(e^{2t} - 1) Z)`, which equals
/// `e^{-t} X + sqrt(1 - e^{-2t}) Z`.
pub fn ou_evolve<T: Real>(g: &GridDensity<T>, t: T) -> Result<GridDensity<T>> {
    if !(t >= T::zero() && t.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "time must be nonnegative, got {t}"
        )));
    }
    if t < c(SMALL_T) {
        return Ok(g.clone());
    }
    let s = (t + t).exp_m1().sqrt();
    scale(&add_gaussian(g, s)?, (-t).exp())
}

/// `Ent(X(t)|Z)` and `J(X(t))` sampled along the flow, with the de Bruijn
/// residuals `|Ent(X|Z) - Ent(X(t)|Z) - int_0^t J(X(s)) ds|`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowTrace<T> {
    pub t_nodes: Vec<T>,
    pub ent_values: Vec<T>,
    pub j_values: Vec<T>,
    pub j_integrals: Vec<T>,
    pub debruijn_residuals: Vec<T>,
}

impl<T: Real> FlowTrace<T> {
    /// Largest increase of `values` between consecutive nodes (0 if monotone).
    fn worst_rise(values: &[T]) -> T {
        values
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(T::zero(), T::max)
    }

    pub fn ent_worst_rise(&self) -> T {
        Self::worst_rise(&self.ent_values)
    }

    pub fn j_worst_rise(&self) -> T {
        Self::worst_rise(&self.j_values)
    }
}

/// `int_0^t J(X(s)) ds` by Gauss–Legendre on unit panels.
pub fn fisher_time_integral<T: Real>(g: &GridDensity<T>, t: T, nodes_per_unit: usize) -> Result<T> {
    if t <= T::zero() {
        return Ok(T::zero());
    }
    let rule = GaussLegendre::<T>::new(nodes_per_unit.max(1));
    let panels = t.ceil().to_usize().unwrap_or(1).max(1);
    let width = t / T::of_usize(panels);
    let points: Vec<(T, T)> = (0..panels)
        .flat_map(|k| {
            let a = width * T::of_usize(k);
            rule.mapped(a, a + width).collect::<Vec<_>>()
        })
        .collect();
    let terms = points
        .par_iter()
        .map(|&(s, w)| Ok(w * relative_fisher(&ou_evolve(g, s)?)?))
        .collect::<Result<Vec<T>>>()?;
    Ok(terms.into_iter().sum())
}

/// Samples the flow at `t_nodes` (ascending) and checks the de Bruijn identity.
pub fn flow_trace<T: Real>(g: &GridDensity<T>, t_nodes: &[T]) -> Result<FlowTrace<T>> {
    flow_trace_with(g, t_nodes, NODES_PER_UNIT)
}

/// [`flow_trace`] with an explicit quadrature density.
pub fn flow_trace_with<T: Real>(
    g: &GridDensity<T>,
    t_nodes: &[T],
    nodes_per_unit: usize,
) -> Result<FlowTrace<T>> {
    if t_nodes.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("t_nodes must be ascending".into()));
    }
    let ent0 = relative_entropy_to_gaussian(g);
    let rows = t_nodes
        .par_iter()
        .map(|&t| {
            let x = ou_evolve(g, t)?;
            let ent = relative_entropy_to_gaussian(&x);
            let j = relative_fisher(&x)?;
            let integral = fisher_time_integral(g, t, nodes_per_unit)?;
            Ok((ent, j, integral))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut trace = FlowTrace {
        t_nodes: t_nodes.to_vec(),
        ent_values: Vec::with_capacity(rows.len()),
        j_values: Vec::with_capacity(rows.len()),
        j_integrals: Vec::with_capacity(rows.len()),
        debruijn_residuals: Vec::with_capacity(rows.len()),
    };
    for (ent, j, integral) in rows {
        trace.ent_values.push(ent);
        trace.j_values.push(j);
        trace.j_integrals.push(integral);
        trace.debruijn_residuals.push((ent0 - ent - integral).abs());
    }
    Ok(trace)
}

/// `e^{-2t} J(X) - J(X(t))` at each `t`.
pub fn fisher_decay_check<T: Real>(g: &GridDensity<T>, t_nodes: &[T]) -> Result<Vec<(T, T)>> {
    let j0 = relative_fisher(g)?;
    t_nodes
        .par_iter()
        .map(|&t| {
            let jt = relative_fisher(&ou_evolve(g, t)?)?;
            Ok((t, (-(t + t)).exp() * j0 - jt))
        })
        .collect()
}

fn positive_time<T: Real>(t: T) -> Result<()> {
    if t > T::zero() && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "time must be positive, got {t}"
        )))
    }
}

/// `W2^2 / (2 (e^{2t} - 1)) - Ent(X(t)|Z)`; nonnegative by the entropy-cost
/// inequality. `w2_sq` is `W2^2(X, Z)`.
pub fn entropy_cost_check<T: Real>(g: &GridDensity<T>, t: T, w2_sq: T) -> Result<T> {
    positive_time(t)?;
    let bound = w2_sq / (c::<T>(2.0) * (t + t).exp_m1());
    Ok(bound - relative_entropy_to_gaussian(&ou_evolve(g, t)?))
}

/// `W2^2 / (2 (e^{2t} - 1)) + (1 - e^{-2t}) J / 2` for given `W2^2` and `J`.
pub fn ent_w2_fi_rhs<T: Real>(t: T, w2_sq: T, j: T) -> Result<T> {
    positive_time(t)?;
    Ok(w2_sq / (c::<T>(2.0) * (t + t).exp_m1()) - (-(t + t)).exp_m1() * j / c(2.0))
}

/// Upper bound on `Ent(X|Z)` obtained by running the flow for time `t`.
pub fn ent_w2_fi_bound<T: Real>(g: &GridDensity<T>, t: T, w2_sq: T) -> Result<T> {
    ent_w2_fi_rhs(t, w2_sq, relative_fisher(g)?)
}

/// Minimizer of [`ent_w2_fi_rhs`] over `t > 0`: `e^{2t} - 1 = W / (sqrt(J) - W)`.
/// `None` when `W >= sqrt(J)`, where the infimum is the `t -> inf` limit `J/2`.
pub fn hwi_optimal_time<T: Real>(w2: T, j: T) -> Option<T> {
    let sj = j.max(T::zero()).sqrt();
    if !(w2 > T::zero() && w2 < sj) {
        return None;
    }
    Some((w2 / (sj - w2)).ln_1p() / c(2.0))
}

/// `W sqrt(J) - W^2 / 2`, the optimized value of [`ent_w2_fi_rhs`].
pub fn hwi_value<T: Real>(w2: T, j: T) -> T {
    w2 * j.max(T::zero()).sqrt() - w2 * w2 / c(2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{make_density, DistributionSpec};
    use crate::grid::moments;

    fn dens(s: DistributionSpec) -> GridDensity<f64> {
        make_density(&s, 4096).unwrap()
    }

    fn q(beta: f64) -> GridDensity<f64> {
        dens(DistributionSpec::GeneralizedGaussian { beta })
    }

    fn phi(x: f64) -> f64 {
        (-x * x / 2.0).exp() / std::f64::consts::TAU.sqrt()
    }

    #[test]
    fn zero_time_is_identity() {
        let g = q(4.0);
        assert_eq!(ou_evolve(&g, 0.0).unwrap(), g);
        assert_eq!(ou_evolve(&g, 1e-7).unwrap(), g);
        assert!(ou_evolve(&g, -0.1).is_err());
    }

    #[test]
    fn gaussian_is_stationary() {
        let g = dens(DistributionSpec::Gaussian);
        for t in [0.01, 0.3, 1.0, 3.0] {
            let x = ou_evolve(&g, t).unwrap();
            assert!(x.sup_distance_to(phi) < 1e-6, "t = {t}");
        }
    }

    #[test]
    fn variance_is_preserved() {
        let g = q(4.0);
        for t in [0.001, 0.05, 0.5, 2.0] {
            let v = moments(&ou_evolve(&g, t).unwrap()).variance;
            assert!((v - 1.0).abs() < 1e-5, "t = {t}: {v}");
        }
    }

    #[test]
    fn relaxes_to_equilibrium() {
        let x = ou_evolve(&q(4.0), 5.0).unwrap();
        assert!(relative_entropy_to_gaussian(&x) < 1e-4);
    }

    #[test]
    fn semigroup() {
        let g = q(4.0);
        let two_step = ou_evolve(&ou_evolve(&g, 0.3).unwrap(), 0.7).unwrap();
        let one_step = ou_evolve(&g, 1.0).unwrap();
        assert!(two_step.sup_distance(&one_step) < 1e-5);
    }

    #[test]
    fn gaussian_trace_is_null() {
        let tr = flow_trace(&dens(DistributionSpec::Gaussian), &[0.1, 0.5, 1.0]).unwrap();
        for i in 0..3 {
            assert!(tr.ent_values[i].abs() < 1e-8);
            assert!(tr.j_values[i].abs() < 1e-8);
            assert!(tr.debruijn_residuals[i] < 1e-8);
        }
    }

    #[test]
    fn debruijn_q4() {
        let tr = flow_trace(&q(4.0), &[0.1, 0.5, 1.0]).unwrap();
        assert!(
            tr.debruijn_residuals.iter().all(|&r| r < 1e-3),
            "{:?}",
            tr.debruijn_residuals
        );
        assert!(tr.ent_worst_rise() <= 1e-5 && tr.j_worst_rise() <= 1e-5);
    }

    #[test]
    fn fisher_decays() {
        for g in [q(3.0), q(4.0)] {
            for (t, slack) in fisher_decay_check(&g, &[0.0, 0.1, 0.5, 1.0, 2.0]).unwrap() {
                assert!(slack >= -1e-5, "t = {t}: {slack}");
                if t == 0.0 {
                    assert!(slack.abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn optimized_rhs_is_hwi() {
        let (w, j) = (0.05f64, 0.37f64);
        let t = hwi_optimal_time(w, j).unwrap();
        let rhs = ent_w2_fi_rhs(t, w * w, j).unwrap();
        assert!((rhs - hwi_value(w, j)).abs() < 1e-12);
        for dt in [-0.01, 0.01] {
            assert!(ent_w2_fi_rhs(t + dt, w * w, j).unwrap() >= rhs);
        }
        assert!(hwi_optimal_time(0.7, 0.25).is_none());
    }

    #[test]
    fn log_sobolev_limit() {
        let j = 0.13f64;
        let far = ent_w2_fi_rhs(40.0, 0.01, j).unwrap();
        assert!((far - j / 2.0).abs() < 1e-12);
        assert!(ent_w2_fi_rhs(0.0, 0.1, j).is_err());
    }
}
