//! Poincaré constants of one-dimensional grid densities.
//!
//! `1/C_P` is the smallest nonzero eigenvalue of `-(p f')' = lambda p f`
//! with the natural boundary condition. On the grid this becomes
//! `K f = lambda M f`, `M` diagonal (trapezoid mass) and `K` tridiagonal
//! (midpoint density over `h`); after the symmetric scaling
//! `A = M^{-1/2} K M^{-1/2}` eigenvalues are located by Sturm counts.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{moments, normalize, GridDensity, GridMeta, ProductMeasure};
use crate::scalar::{c, Real};

/// Nodes below this fraction of the peak are outside the effective support.
pub const SUPPORT_REL: f64 = 1e-10;

/// Relative change between the `h` and `2h` solutions counted as converged.
pub const CONVERGENCE_REL: f64 = 5e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PoincareMethod {
    Spectral,
    Muckenhoupt,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoincareEstimate<T> {
    pub c_p: T,
    /// `1 / c_p`.
    pub gap: T,
    pub method: PoincareMethod,
    pub grid_meta: GridMeta,
    /// Whether the `2h` solution agrees within [`CONVERGENCE_REL`].
    pub converged: bool,
    /// `c_p` from every other node of the effective support.
    pub coarse_c_p: T,
}

/// Index range of the nodes at or above `SUPPORT_REL * max`; errors when
/// they do not form one block.
fn effective_support<T: Real>(values: &[T]) -> Result<(usize, usize)> {
    let thr = values.iter().copied().fold(T::zero(), T::max) * c(SUPPORT_REL);
    let inside: Vec<bool> = values.iter().map(|&v| v >= thr && v > T::zero()).collect();
    let blocks = inside
        .iter()
        .enumerate()
        .filter(|&(i, &b)| b && (i == 0 || !inside[i - 1]))
        .count();
    if blocks != 1 {
        return Err(Error::DisconnectedSupport(blocks));
    }
    let first = inside.iter().position(|&b| b).expect("one block exists");
    let last = inside.iter().rposition(|&b| b).expect("one block exists");
    if last - first < 2 {
        return Err(Error::TooFewPoints {
            got: last - first + 1,
            min: 3,
        });
    }
    Ok((first, last))
}

/// Number of eigenvalues of the symmetric tridiagonal matrix `(d, e)` below `x`.
fn sturm_count<T: Real>(d: &[T], e: &[T], x: T) -> usize {
    let tiny = T::min_positive_value().sqrt();
    let mut count = 0;
    let mut q = d[0] - x;
    if q < T::zero() {
        count += 1;
    }
    for i in 1..d.len() {
        let prev = if q.abs() < tiny { tiny } else { q };
        q = d[i] - x - e[i - 1] * e[i - 1] / prev;
        if q < T::zero() {
            count += 1;
        }
    }
    count
}

/// Smallest nonzero eigenvalue of `K f = lambda M f` for density samples
/// `p` at spacing `h`.
fn weighted_gap<T: Real>(p: &[T], h: T) -> T {
    let n = p.len();
    let mass: Vec<T> = (0..n)
        .map(|i| {
            let w = if i == 0 || i == n - 1 { h / c(2.0) } else { h };
            w * p[i]
        })
        .collect();
    let k: Vec<T> = p.windows(2).map(|w| (w[0] + w[1]) / (h + h)).collect();
    let d: Vec<T> = (0..n)
        .map(|i| {
            let left = if i > 0 { k[i - 1] } else { T::zero() };
            let right = if i + 1 < n { k[i] } else { T::zero() };
            (left + right) / mass[i]
        })
        .collect();
    let e: Vec<T> = (0..n - 1)
        .map(|i| -k[i] / (mass[i] * mass[i + 1]).sqrt())
        .collect();
    // the constant mode sits at zero; bracket the second eigenvalue
    let mut hi = T::one();
    while sturm_count(&d, &e, hi) < 2 {
        hi = hi * c(2.0);
    }
    let mut lo = T::zero();
    for _ in 0..200 {
        let mid = (lo + hi) / c(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(&d, &e, mid) >= 2 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo + hi) / c(2.0)
}

fn support_samples<T: Real>(g: &GridDensity<T>) -> Result<Vec<T>> {
    let (first, last) = effective_support(g.values())?;
    Ok(g.values()[first..=last].to_vec())
}

/// The law whose constant [`spectral_gap_1d`] measures: `g` restricted to
/// its effective support and renormalized.
pub fn restrict_to_support<T: Real>(g: &GridDensity<T>) -> Result<GridDensity<T>> {
    let (first, last) = effective_support(g.values())?;
    let r = GridDensity::from_values(
        g.node(first),
        g.node(last),
        g.values()[first..=last].to_vec(),
    )?;
    normalize(&r)
}

/// `c_p` on the effective support, using every `stride`-th node.
fn c_p_with_stride<T: Real>(p: &[T], h: T, stride: usize) -> T {
    let thinned: Vec<T> = p.iter().step_by(stride).copied().collect();
    weighted_gap(&thinned, h * T::of_usize(stride)).recip()
}

/// Poincaré constant by the discrete spectral gap.
pub fn spectral_gap_1d<T: Real>(g: &GridDensity<T>) -> Result<PoincareEstimate<T>> {
    let p = support_samples(g)?;
    let h = g.spacing();
    let c_p = c_p_with_stride(&p, h, 1);
    let coarse_c_p = if p.len() >= 6 {
        c_p_with_stride(&p, h, 2)
    } else {
        c_p
    };
    Ok(PoincareEstimate {
        c_p,
        gap: c_p.recip(),
        method: PoincareMethod::Spectral,
        grid_meta: g.meta(),
        converged: ((coarse_c_p - c_p) / c_p).abs() < c(CONVERGENCE_REL),
        coarse_c_p,
    })
}

/// `c_p` on spacings `2^(levels-1) h, ..., 2h, h` (coarsest first).
pub fn refinement_sequence<T: Real>(g: &GridDensity<T>, levels: usize) -> Result<Vec<T>> {
    let p = support_samples(g)?;
    let h = g.spacing();
    Ok((0..levels)
        .rev()
        .map(|k| c_p_with_stride(&p, h, 1 << k))
        .collect())
}

/// Muckenhoupt's quantity `B = max(B+, B-)` with
/// `B+ = sup_{x > m} P(X > x) int_m^x 1/p` (`m` the median), on the
/// effective support. `B <= C_P <= 4B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MuckenhouptBound<T> {
    pub b: T,
    /// `4B`, an upper bound on `C_P`.
    pub upper: T,
}

pub fn muckenhoupt<T: Real>(g: &GridDensity<T>) -> Result<MuckenhouptBound<T>> {
    let p = support_samples(g)?;
    let h = g.spacing();
    let n = p.len();
    let mut cdf = vec![T::zero(); n];
    for i in 1..n {
        cdf[i] = cdf[i - 1] + (p[i - 1] + p[i]) * h / c(2.0);
    }
    let total = cdf[n - 1];
    let half = total / c(2.0);
    let m = cdf.partition_point(|&v| v < half).min(n - 1);
    let side = |range: Box<dyn Iterator<Item = usize>>| -> T {
        let mut inv = T::zero();
        let mut prev = m;
        let mut best = T::zero();
        for i in range {
            inv = inv + (p[prev].recip() + p[i].recip()) * h / c(2.0);
            prev = i;
            let beyond = if i > m { total - cdf[i] } else { cdf[i] } / total;
            best = best.max(beyond * inv);
        }
        best
    };
    let b = side(Box::new(m + 1..n)).max(side(Box::new((0..m).rev())));
    Ok(MuckenhouptBound {
        b,
        upper: b * c(4.0),
    })
}

/// The upper end `4B` of the Muckenhoupt sandwich.
pub fn muckenhoupt_bound<T: Real>(g: &GridDensity<T>) -> Result<T> {
    muckenhoupt(g).map(|m| m.upper)
}

/// Poincaré constant of a product of independent coordinates: the largest
/// coordinate constant.
pub fn poincare_product<T: Real>(m: &ProductMeasure<T>) -> Result<T> {
    if m.is_iid() {
        return spectral_gap_1d(&m.coords()[0]).map(|e| e.c_p);
    }
    m.coords()
        .iter()
        .map(|g| spectral_gap_1d(g).map(|e| e.c_p))
        .try_fold(T::zero(), |acc, v| v.map(|v| acc.max(v)))
}

/// `c_p - Var(X)`, nonnegative by the universal lower bound `C_P >= Var`.
pub fn variance_slack<T: Real>(g: &GridDensity<T>) -> Result<T> {
    Ok(spectral_gap_1d(g)?.c_p - moments(g).variance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convolve::convolve;
    use crate::distributions::{make_density, DistributionSpec};
    use crate::grid::build_from_pdf;

    fn dens(s: DistributionSpec) -> GridDensity<f64> {
        make_density(&s, 4096).unwrap()
    }

    const UNIFORM_CP: f64 = 12.0 / (std::f64::consts::PI * std::f64::consts::PI);

    #[test]
    fn gaussian_constant_is_one() {
        let e = spectral_gap_1d(&dens(DistributionSpec::Gaussian)).unwrap();
        assert!((e.c_p - 1.0).abs() < 1e-2, "{}", e.c_p);
        assert!(e.converged);
        assert!((e.gap * e.c_p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_is_neumann_laplacian() {
        let e = spectral_gap_1d(&dens(DistributionSpec::UniformSqrt3)).unwrap();
        assert!((e.c_p / UNIFORM_CP - 1.0).abs() < 1e-2, "{}", e.c_p);
    }

    #[test]
    fn scaling() {
        let s = 1.3f64;
        let g = build_from_pdf(
            |x: f64| (-x * x / (2.0 * s * s)).exp() / (std::f64::consts::TAU * s * s).sqrt(),
            0.0,
            s,
            4096,
        )
        .unwrap();
        let e = spectral_gap_1d(&g).unwrap();
        assert!((e.c_p / (s * s) - 1.0).abs() < 1e-2);
    }

    #[test]
    fn sandwich_and_lower_bound() {
        for s in [
            DistributionSpec::Gaussian,
            DistributionSpec::GeneralizedGaussian { beta: 3.0 },
            DistributionSpec::GeneralizedGaussian { beta: 4.0 },
            DistributionSpec::StudentT { theta: 8.0 },
            DistributionSpec::UniformSqrt3,
        ] {
            let g = dens(s.clone());
            let cp = spectral_gap_1d(&g).unwrap().c_p;
            let m = muckenhoupt(&g).unwrap();
            assert!(
                m.b <= cp && cp <= m.upper,
                "{}: {} {} {}",
                s.label(),
                m.b,
                cp,
                m.upper
            );
            assert!(cp >= moments(&g).variance - 1e-3);
        }
    }

    #[test]
    fn product_takes_the_max() {
        let g = dens(DistributionSpec::Gaussian);
        let u = dens(DistributionSpec::UniformSqrt3);
        let mixed = ProductMeasure::new(vec![g.clone(), u]).unwrap();
        assert!((poincare_product(&mixed).unwrap() / UNIFORM_CP - 1.0).abs() < 1e-2);
        let iid = ProductMeasure::iid(g, 3).unwrap();
        assert!((poincare_product(&iid).unwrap() - 1.0).abs() < 1e-2);
    }

    #[test]
    fn refinement_differences_shrink() {
        let g = dens(DistributionSpec::GeneralizedGaussian { beta: 4.0 });
        let seq = refinement_sequence(&g, 3).unwrap();
        let (d1, d2) = ((seq[1] - seq[0]).abs(), (seq[2] - seq[1]).abs());
        assert!(d2 <= d1 / 2.0, "{seq:?}");
    }

    #[test]
    fn convolution_subadditive() {
        let q = dens(DistributionSpec::GeneralizedGaussian { beta: 4.0 });
        let cq = spectral_gap_1d(&q).unwrap().c_p;
        let cqq = spectral_gap_1d(&convolve(&q, &q).unwrap()).unwrap().c_p;
        assert!(cqq <= 2.0 * cq + 2e-3);
    }

    #[test]
    fn disconnected_support_is_rejected() {
        let mut v = vec![1.0f64; 128];
        v[60..70].iter_mut().for_each(|x| *x = 0.0);
        let g = GridDensity::from_values(0.0, 1.0, v).unwrap();
        assert!(matches!(
            spectral_gap_1d(&g),
            Err(Error::DisconnectedSupport(2))
        ));
    }
}
