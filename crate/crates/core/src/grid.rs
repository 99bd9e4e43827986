//! Uniform-grid densities, product measures and the affine maps between them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{trap_weight, trapezoid};
use crate::scalar::{c, Real};

/// Smallest admissible grid.
pub const MIN_POINTS: usize = 64;

/// Default number of nodes used by every constructor that is not told otherwise.
pub const DEFAULT_POINTS: usize = 4096;

/// Tail mass the domain search aims for.
pub const TAIL_TARGET: f64 = 1e-10;

/// The domain is tightened to the narrowest half-width (within the last
/// doubling step) whose tail is below this; the margin under [`TAIL_TARGET`]
/// keeps truncation out of the second-moment functionals.
pub const TIGHT_TAIL_TARGET: f64 = 1e-12;

/// Half-width cap for the domain search (polynomial tails never reach the target).
pub const MAX_HALF_WIDTH: f64 = 200.0;

/// A probability density tabulated at `n` equally spaced nodes of `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity<T> {
    lo: T,
    hi: T,
    values: Vec<T>,
    tail_mass: T,
}

/// Grid descriptor attached to every reported number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub lo: f64,
    pub hi: f64,
    pub n_points: usize,
    pub spacing: f64,
    pub tail_mass: f64,
}

/// Mean and variance of a grid density (trapezoid rule).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSummary<T> {
    pub mean: T,
    pub variance: T,
}

impl<T: Real> GridDensity<T> {
    /// Wraps raw samples. Values must be finite and nonnegative; no
    /// normalization is performed.
    pub fn from_values(lo: T, hi: T, values: Vec<T>) -> Result<Self> {
        if values.len() < MIN_POINTS {
            return Err(Error::TooFewPoints {
                got: values.len(),
                min: MIN_POINTS,
            });
        }
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::Construction(format!(
                "invalid interval [{lo}, {hi}]"
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < T::zero()) {
            return Err(Error::Construction(format!(
                "density value {v} is negative or not finite"
            )));
        }
        Ok(Self {
            lo,
            hi,
            values,
            tail_mass: T::zero(),
        })
    }

    pub fn with_tail_mass(mut self, tail_mass: T) -> Self {
        self.tail_mass = tail_mass;
        self
    }

    pub fn lo(&self) -> T {
        self.lo
    }

    pub fn hi(&self) -> T {
        self.hi
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Tail mass outside `[lo, hi]` estimated when the grid was built.
    pub fn tail_mass(&self) -> T {
        self.tail_mass
    }

    pub fn spacing(&self) -> T {
        (self.hi - self.lo) / T::of_usize(self.values.len() - 1)
    }

    #[inline]
    pub fn node(&self, i: usize) -> T {
        self.lo + self.spacing() * T::of_usize(i)
    }

    pub fn nodes(&self) -> impl Iterator<Item = T> + '_ {
        let h = self.spacing();
        let lo = self.lo;
        (0..self.values.len()).map(move |i| lo + h * T::of_usize(i))
    }

    pub fn max_value(&self) -> T {
        self.values.iter().copied().fold(T::zero(), T::max)
    }

    /// Trapezoid integral of the samples.
    pub fn integral(&self) -> T {
        trapezoid(&self.values, self.spacing())
    }

    /// Trapezoid integral of `f(x) p(x)`.
    pub fn expect<F: Fn(T) -> T>(&self, f: F) -> T {
        let h = self.spacing();
        let n = self.len();
        self.values
            .iter()
            .enumerate()
            .map(|(i, &p)| trap_weight(i, n, h) * f(self.lo + h * T::of_usize(i)) * p)
            .sum()
    }

    /// Linear interpolation of the samples; zero outside the grid.
    pub fn eval(&self, x: T) -> T {
        if x < self.lo || x > self.hi {
            return T::zero();
        }
        let h = self.spacing();
        let pos = (x - self.lo) / h;
        let i = pos.floor().to_usize().unwrap_or(0).min(self.len() - 2);
        let frac = pos - T::of_usize(i);
        self.values[i] * (T::one() - frac) + self.values[i + 1] * frac
    }

    pub fn meta(&self) -> GridMeta {
        GridMeta {
            lo: self.lo.to_f64_lossy(),
            hi: self.hi.to_f64_lossy(),
            n_points: self.len(),
            spacing: self.spacing().to_f64_lossy(),
            tail_mass: self.tail_mass.to_f64_lossy(),
        }
    }

    /// Drops leading and trailing nodes whose value is below `rel * max`,
    /// never going under [`MIN_POINTS`] nodes.
    pub fn trimmed(&self, rel: T) -> Self {
        let thr = self.max_value() * rel;
        let n = self.len();
        let mut first = self.values.iter().position(|&v| v > thr).unwrap_or(0);
        let mut last = self.values.iter().rposition(|&v| v > thr).unwrap_or(n - 1);
        // keep one zero-ish node on each side as a boundary
        first = first.saturating_sub(1);
        last = (last + 1).min(n - 1);
        while last + 1 - first < MIN_POINTS {
            first = first.saturating_sub(1);
            if last + 1 < n {
                last += 1;
            }
            if first == 0 && last + 1 == n {
                break;
            }
        }
        if first == 0 && last + 1 == n {
            return self.clone();
        }
        Self {
            lo: self.node(first),
            hi: self.node(last),
            values: self.values[first..=last].to_vec(),
            tail_mass: self.tail_mass,
        }
    }

    /// Sup-norm distance to a reference function over the grid nodes.
    pub fn sup_distance_to<F: Fn(T) -> T>(&self, f: F) -> T {
        self.nodes()
            .zip(&self.values)
            .map(|(x, &p)| (p - f(x)).abs())
            .fold(T::zero(), T::max)
    }

    /// Sup-norm distance between two grids, evaluated at the nodes of both.
    pub fn sup_distance(&self, other: &Self) -> T {
        let a = self.sup_distance_to(|x| other.eval(x));
        let b = other.sup_distance_to(|x| self.eval(x));
        a.max(b)
    }
}

/// Tabulates `pdf` on a symmetric domain around `center_hint`, doubling the
/// half-width from `scale_hint` until the estimated tail mass drops below
/// [`TAIL_TARGET`] (or [`MAX_HALF_WIDTH`] is reached), then normalizes.
pub fn build_from_pdf<T: Real, F: Fn(T) -> T>(
    pdf: F,
    center_hint: T,
    scale_hint: T,
    n_points: usize,
) -> Result<GridDensity<T>> {
    build_from_pdf_with(pdf, center_hint, scale_hint, n_points, c(MAX_HALF_WIDTH))
}

/// [`build_from_pdf`] with an explicit half-width cap.
pub fn build_from_pdf_with<T: Real, F: Fn(T) -> T>(
    pdf: F,
    center_hint: T,
    scale_hint: T,
    n_points: usize,
    max_half_width: T,
) -> Result<GridDensity<T>> {
    if !(scale_hint > T::zero() && scale_hint.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "scale_hint must be positive, got {scale_hint}"
        )));
    }
    if n_points < MIN_POINTS {
        return Err(Error::TooFewPoints {
            got: n_points,
            min: MIN_POINTS,
        });
    }
    let sample = |x: T| -> Result<T> {
        let v = pdf(x);
        if v.is_nan() {
            Err(Error::Construction(format!("pdf returned NaN at {x}")))
        } else if v < T::zero() {
            Err(Error::Construction(format!("pdf negative at {x}")))
        } else {
            Ok(v)
        }
    };
    let mass_on = |a: T, b: T| -> Result<T> {
        let h = (b - a) / T::of_usize(n_points - 1);
        let vals = (0..n_points)
            .map(|i| sample(a + h * T::of_usize(i)))
            .collect::<Result<Vec<_>>>()?;
        Ok(trapezoid(&vals, h))
    };

    let target: T = c(TAIL_TARGET);
    let tail_at = |w: T| -> Result<T> {
        let core = mass_on(center_hint - w, center_hint + w)?;
        let annulus = mass_on(center_hint + w, center_hint + w * c(4.0))?
            + mass_on(center_hint - w * c(4.0), center_hint - w)?;
        let total = core + annulus;
        if !(total.is_finite()) {
            return Err(Error::Construction("pdf is not integrable".into()));
        }
        if total <= T::zero() {
            return Err(Error::Construction(
                "pdf vanishes on the search domain".into(),
            ));
        }
        Ok(annulus / total)
    };
    let mut w = scale_hint.min(max_half_width);
    let mut tail = tail_at(w)?;
    let mut failed = None;
    while !(tail < target) && w < max_half_width {
        failed = Some(w);
        w = (w * c(2.0)).min(max_half_width);
        tail = tail_at(w)?;
    }
    // Tighten the last doubling step: a narrower domain means a finer grid.
    let tight: T = c(TIGHT_TAIL_TARGET);
    if let (Some(mut bad), true) = (failed, tail < tight) {
        for _ in 0..10 {
            let mid = (bad + w) * c(0.5);
            let t = tail_at(mid)?;
            if t < tight {
                w = mid;
                tail = t;
            } else {
                bad = mid;
            }
        }
    }
    // Keep a node on the center: odd counts are symmetric, even counts get
    // one extra node on the right.
    let lo = center_hint - w;
    let cells = if n_points % 2 == 1 {
        n_points - 1
    } else {
        n_points - 2
    };
    let h = (w + w) / T::of_usize(cells);
    let hi = lo + h * T::of_usize(n_points - 1);
    let values = (0..n_points)
        .map(|i| sample(lo + h * T::of_usize(i)))
        .collect::<Result<Vec<_>>>()?;
    let g = GridDensity::from_values(lo, hi, values)?.with_tail_mass(tail);
    normalize(&g)
}

/// Divides by the trapezoid integral.
pub fn normalize<T: Real>(g: &GridDensity<T>) -> Result<GridDensity<T>> {
    let mass = g.integral();
    if !(mass > T::zero() && mass.is_finite()) {
        return Err(Error::NonPositiveMass(mass.to_f64_lossy()));
    }
    let mut out = g.clone();
    out.values.iter_mut().for_each(|v| *v = *v / mass);
    Ok(out)
}

pub fn moments<T: Real>(g: &GridDensity<T>) -> MomentSummary<T> {
    let mass = g.integral();
    let mean = g.expect(|x| x) / mass;
    // central second moment avoids cancellation for shifted densities
    let variance = g.expect(|x| (x - mean) * (x - mean)) / mass;
    MomentSummary { mean, variance }
}

/// Density of `aX`: nodes are multiplied by `a`, values divided by `|a|`.
/// The affine image of a uniform grid is uniform, so no interpolation occurs.
pub fn scale<T: Real>(g: &GridDensity<T>, a: T) -> Result<GridDensity<T>> {
    if a == T::zero() || !a.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "scale factor must be nonzero and finite, got {a}"
        )));
    }
    let inv = a.abs().recip();
    let mut values: Vec<T> = g.values.iter().map(|&v| v * inv).collect();
    let (lo, hi) = if a > T::zero() {
        (g.lo * a, g.hi * a)
    } else {
        values.reverse();
        (g.hi * a, g.lo * a)
    };
    normalize(&GridDensity {
        lo,
        hi,
        values,
        tail_mass: g.tail_mass,
    })
}

/// Density of `X + b`.
pub fn shift<T: Real>(g: &GridDensity<T>, b: T) -> GridDensity<T> {
    GridDensity {
        lo: g.lo + b,
        hi: g.hi + b,
        values: g.values.clone(),
        tail_mass: g.tail_mass,
    }
}

/// Density of `(X - mean) / sd`.
pub fn standardize<T: Real>(g: &GridDensity<T>) -> Result<GridDensity<T>> {
    let m = moments(g);
    if !(m.variance > T::zero()) {
        return Err(Error::ZeroVariance(m.variance.to_f64_lossy()));
    }
    scale(&shift(g, -m.mean), m.variance.sqrt().recip())
}

/// Linear interpolation onto a fresh uniform grid, clamped at zero, renormalized.
pub fn resample<T: Real>(
    g: &GridDensity<T>,
    lo: T,
    hi: T,
    n_points: usize,
) -> Result<GridDensity<T>> {
    if n_points < MIN_POINTS {
        return Err(Error::TooFewPoints {
            got: n_points,
            min: MIN_POINTS,
        });
    }
    let h = (hi - lo) / T::of_usize(n_points - 1);
    let values = (0..n_points)
        .map(|i| g.eval(lo + h * T::of_usize(i)).max(T::zero()))
        .collect();
    normalize(&GridDensity::from_values(lo, hi, values)?.with_tail_mass(g.tail_mass))
}

/// Independent coordinates of a product measure on `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductMeasure<T> {
    coords: Vec<GridDensity<T>>,
    iid: bool,
}

impl<T: Real> ProductMeasure<T> {
    pub fn new(coords: Vec<GridDensity<T>>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidParameter(
                "product measure needs at least one coordinate".into(),
            ));
        }
        let iid = coords.windows(2).all(|w| w[0] == w[1]);
        Ok(Self { coords, iid })
    }

    pub fn iid(g: GridDensity<T>, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter(
                "dimension must be at least 1".into(),
            ));
        }
        Ok(Self {
            coords: vec![g; d],
            iid: true,
        })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[GridDensity<T>] {
        &self.coords
    }

    pub fn is_iid(&self) -> bool {
        self.iid
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn normal_pdf(mu: f64, var: f64) -> impl Fn(f64) -> f64 {
        move |x| {
            (-(x - mu) * (x - mu) / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
        }
    }

    fn std_normal(n: usize) -> GridDensity<f64> {
        build_from_pdf(normal_pdf(0.0, 1.0), 0.0, 1.0, n).unwrap()
    }

    #[test]
    fn gaussian_grid_moments() {
        let g = std_normal(2048);
        let m = moments(&g);
        assert!(m.mean.abs() < 1e-8);
        assert!((m.variance - 1.0).abs() < 1e-8, "{}", m.variance);
        assert!(g.tail_mass() < TAIL_TARGET);
        assert!((g.integral() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shifted_gaussian_moments() {
        let g = build_from_pdf(normal_pdf(2.0, 9.0), 2.0, 3.0, 4096).unwrap();
        let m = moments(&g);
        assert!((m.mean - 2.0).abs() < 1e-6);
        assert!((m.variance - 9.0).abs() < 1e-6);
    }

    #[test]
    fn construction_errors() {
        assert!(build_from_pdf(|_x: f64| 0.0, 0.0, 1.0, 256).is_err());
        assert!(build_from_pdf(|_x: f64| f64::NAN, 0.0, 1.0, 256).is_err());
        assert!(build_from_pdf(normal_pdf(0.0, 1.0), 0.0, -1.0, 256).is_err());
        assert!(build_from_pdf(normal_pdf(0.0, 1.0), 0.0, 1.0, 16).is_err());
        // not integrable: the cap is hit and the result is still a valid grid,
        // but a constant pdf reports a large tail
        let flat = build_from_pdf(|_x: f64| 1.0, 0.0, 1.0, 256).unwrap();
        assert!(flat.tail_mass() > 0.5);
    }

    #[test]
    fn normalize_scales_and_is_idempotent() {
        let g = std_normal(1024);
        let doubled =
            GridDensity::from_values(g.lo(), g.hi(), g.values().iter().map(|v| 2.0 * v).collect())
                .unwrap();
        assert!((doubled.integral() - 2.0).abs() < 1e-10);
        let n = normalize(&doubled).unwrap();
        assert!((n.integral() - 1.0).abs() < 1e-12);
        let nn = normalize(&n).unwrap();
        assert!(n
            .values()
            .iter()
            .zip(nn.values())
            .all(|(a, b)| (a - b).abs() < 1e-12));
        let zero = GridDensity::from_values(0.0, 1.0, vec![0.0; 128]).unwrap();
        assert!(matches!(normalize(&zero), Err(Error::NonPositiveMass(_))));
    }

    #[test]
    fn from_values_rejects_bad_samples() {
        assert!(GridDensity::from_values(0.0, 1.0, vec![1.0; 10]).is_err());
        let mut v = vec![1.0; 100];
        v[3] = -0.1;
        assert!(GridDensity::from_values(0.0, 1.0, v).is_err());
        assert!(GridDensity::from_values(1.0, 0.0, vec![1.0; 100]).is_err());
    }

    #[test]
    fn scaling_gaussian() {
        let g = std_normal(4096);
        let same = scale(&g, 1.0).unwrap();
        assert!(same.sup_distance(&g) < 1e-14);
        let wide = scale(&g, 2.0).unwrap();
        assert!((moments(&wide).variance - 4.0).abs() < 1e-6);
        let flipped = scale(&g, -2.0).unwrap();
        assert!((moments(&flipped).variance - 4.0).abs() < 1e-6);
        assert!(flipped.lo() < flipped.hi());
        assert!(scale(&g, 0.0).is_err());
    }

    #[test]
    fn scale_round_trip() {
        let g = std_normal(4096);
        for a in [0.5, 2.0] {
            let back = scale(&scale(&g, a).unwrap(), 1.0 / a).unwrap();
            assert!(back.sup_distance(&g) < 1e-6);
        }
    }

    #[test]
    fn standardize_affine_gaussian() {
        let g = build_from_pdf(normal_pdf(3.0, 4.0), 3.0, 2.0, 4096).unwrap();
        let s = standardize(&g).unwrap();
        let m = moments(&s);
        assert!(m.mean.abs() < 1e-6 && (m.variance - 1.0).abs() < 1e-6);
        assert!(s.sup_distance_to(normal_pdf(0.0, 1.0)) < 1e-4);
        let again = standardize(&s).unwrap();
        assert!(again.sup_distance(&s) < 1e-6);
    }

    #[test]
    fn standardize_triangle() {
        let tri = |x: f64| {
            if (0.0..=2.0).contains(&x) {
                1.0 - (x - 1.0).abs()
            } else {
                0.0
            }
        };
        let g = build_from_pdf(tri, 1.0, 1.0, 4097).unwrap();
        let s = standardize(&g).unwrap();
        let m = moments(&s);
        assert!(
            m.mean.abs() < 1e-6 && (m.variance - 1.0).abs() < 1e-6,
            "{m:?}"
        );
    }

    #[test]
    fn zero_variance_is_rejected() {
        let mut v = vec![0.0; 129];
        v[64] = 1.0;
        let spike = GridDensity::from_values(-1.0, 1.0, v).unwrap();
        // trapezoid moments of a single node at the origin vanish
        assert!(matches!(standardize(&spike), Err(Error::ZeroVariance(_))));
    }

    #[test]
    fn grid_refinement_moves_moments_little() {
        let a = moments(&std_normal(2048));
        let b = moments(&std_normal(4096));
        assert!((a.variance - b.variance).abs() < 1e-6);
        assert!((a.mean - b.mean).abs() < 1e-6);
    }

    #[test]
    fn trimming_and_resampling() {
        let g = build_from_pdf(normal_pdf(0.0, 1.0), 0.0, 16.0, 4096).unwrap();
        let t = g.trimmed(1e-14);
        assert!(t.len() < g.len());
        assert!((t.integral() - 1.0).abs() < 1e-12);
        let r = resample(&g, -6.0, 6.0, 8001).unwrap();
        assert!(r.sup_distance_to(normal_pdf(0.0, 1.0)) < 1e-5);
    }

    #[test]
    fn product_measure_flags() {
        let g = std_normal(512);
        let p = ProductMeasure::iid(g.clone(), 3).unwrap();
        assert!(p.is_iid() && p.dim() == 3);
        let wide = scale(&g, 2.0).unwrap();
        let q = ProductMeasure::new(vec![g.clone(), wide]).unwrap();
        assert!(!q.is_iid());
        let r = ProductMeasure::new(vec![g.clone(), g]).unwrap();
        assert!(r.is_iid());
        assert!(ProductMeasure::<f64>::new(vec![]).is_err());
        assert!(ProductMeasure::iid(std_normal(512), 0).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let g = build_from_pdf(
            |x: f32| (-x * x / 2.0).exp() / (2.0 * std::f32::consts::PI).sqrt(),
            0.0,
            1.0,
            1024,
        )
        .unwrap();
        let m = moments(&g);
        assert!((m.variance - 1.0).abs() < 1e-4);
    }
}
