//! Wasserstein-2 distances through quantile functions.

use crate::error::{Error, Result};
use crate::grid::{GridDensity, GridMeta, ProductMeasure};
use crate::quadrature::{cumulative_trapezoid, GaussLegendre};
use crate::scalar::{c, Real};

/// Initial node count of the global rule in [`w2_1d_global`].
pub const W2_NODES: usize = 512;

/// The global rule is doubled until `W2` moves by less than this.
pub const W2_TOL: f64 = 1e-5;

const W2_MAX_NODES: usize = 16384;

/// Gauss–Legendre nodes per piece in [`w2_1d`].
pub const W2_PIECE_NODES: usize = 8;

/// Cumulative distribution of a grid density, exact for its piecewise
/// linear interpolant.
#[derive(Debug, Clone, PartialEq)]
pub struct CdfTable<T> {
    meta: GridMeta,
    lo: T,
    h: T,
    density: Vec<T>,
    cdf_values: Vec<T>,
}

impl<T: Real> CdfTable<T> {
    pub fn meta(&self) -> GridMeta {
        self.meta
    }

    pub fn cdf_values(&self) -> &[T] {
        &self.cdf_values
    }

    /// `F(x)`, clamped to `[0, 1]` outside the grid.
    pub fn eval(&self, x: T) -> T {
        let n = self.cdf_values.len();
        if x <= self.lo {
            return T::zero();
        }
        let pos = (x - self.lo) / self.h;
        let i = pos.floor().to_usize().unwrap_or(usize::MAX);
        if i >= n - 1 {
            return T::one();
        }
        let s = (pos - T::of_usize(i)) * self.h;
        let (p0, p1) = (self.density[i], self.density[i + 1]);
        (self.cdf_values[i] + p0 * s + (p1 - p0) * s * s / (self.h + self.h)).min(T::one())
    }
}

/// Cumulative trapezoid integral scaled so the last entry is exactly 1.
pub fn cdf<T: Real>(g: &GridDensity<T>) -> CdfTable<T> {
    let raw = cumulative_trapezoid(g.values(), g.spacing());
    let total = *raw.last().expect("grids are nonempty");
    CdfTable {
        meta: g.meta(),
        lo: g.lo(),
        h: g.spacing(),
        density: g.values().iter().map(|&p| p / total).collect(),
        cdf_values: raw.iter().map(|&v| (v / total).min(T::one())).collect(),
    }
}

/// Inverse of [`CdfTable::eval`]: inside each cell the density is linear,
/// so the cdf is a monotone quadratic and is inverted in closed form.
pub fn quantile<T: Real>(table: &CdfTable<T>, u: T) -> Result<T> {
    if !(u > T::zero() && u < T::one()) {
        return Err(Error::InvalidParameter(format!(
            "quantile level {u} is not in (0, 1)"
        )));
    }
    let f = &table.cdf_values;
    // first cell whose right end lies strictly above u
    let i = f
        .partition_point(|&v| v <= u)
        .saturating_sub(1)
        .min(f.len() - 2);
    let r = u - f[i];
    let b = table.density[i];
    let a = (table.density[i + 1] - b) / (table.h + table.h);
    let disc = (b * b + c::<T>(4.0) * a * r).max(T::zero());
    let denom = b + disc.sqrt();
    let s = if denom > T::zero() {
        (r + r) / denom
    } else {
        T::zero()
    };
    Ok(table.lo + table.h * T::of_usize(i) + s.min(table.h))
}

fn w2_sq_with<T: Real>(qa: &CdfTable<T>, qb: &CdfTable<T>, nodes: usize) -> Result<T> {
    let rule = GaussLegendre::<T>::new(nodes);
    let mut acc = T::zero();
    for (u, w) in rule.mapped(T::zero(), T::one()) {
        let d = quantile(qa, u)? - quantile(qb, u)?;
        acc = acc + w * d * d;
    }
    Ok(acc)
}

/// `W2(a, b)` for one-dimensional laws: the `L^2(0, 1)` distance between
/// quantile functions.
///
/// Between consecutive cdf levels of either grid both quantile functions
/// are closed-form and smooth, so a short Gauss–Legendre rule on each of
/// those pieces integrates the squared difference to near machine precision.
pub fn w2_1d<T: Real>(a: &GridDensity<T>, b: &GridDensity<T>) -> Result<T> {
    let (qa, qb) = (cdf(a), cdf(b));
    let mut levels: Vec<T> = qa
        .cdf_values
        .iter()
        .chain(&qb.cdf_values)
        .copied()
        .filter(|&u| u > T::zero() && u < T::one())
        .collect();
    levels.push(T::zero());
    levels.push(T::one());
    levels.sort_by(|x, y| x.partial_cmp(y).expect("cdf levels are finite"));
    levels.dedup();
    let rule = GaussLegendre::<T>::new(W2_PIECE_NODES);
    let mut acc = T::zero();
    for w in levels.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        for (u, wt) in rule.mapped(w[0], w[1]) {
            // pieces narrower than an ulp near 0 or 1 round nodes onto the ends
            if !(u > T::zero() && u < T::one()) {
                continue;
            }
            let d = quantile(&qa, u)? - quantile(&qb, u)?;
            acc = acc + wt * d * d;
        }
    }
    Ok(acc.max(T::zero()).sqrt())
}

/// `W2(a, b)` with a single Gauss–Legendre rule on `(0, 1)`, starting at
/// [`W2_NODES`] and doubling until the value moves by less than [`W2_TOL`].
/// Converges slowly for heavy tails; kept as an independent check.
pub fn w2_1d_global<T: Real>(a: &GridDensity<T>, b: &GridDensity<T>) -> Result<T> {
    let (qa, qb) = (cdf(a), cdf(b));
    let mut nodes = W2_NODES;
    let mut prev = w2_sq_with(&qa, &qb, nodes)?.max(T::zero()).sqrt();
    while nodes < W2_MAX_NODES {
        nodes *= 2;
        let next = w2_sq_with(&qa, &qb, nodes)?.max(T::zero()).sqrt();
        let done = (next - prev).abs() < c(W2_TOL);
        prev = next;
        if done {
            break;
        }
    }
    Ok(prev)
}

/// `W2` between products: optimal couplings tensorize, so squared
/// coordinate distances add.
pub fn w2_product<T: Real>(a: &ProductMeasure<T>, b: &ProductMeasure<T>) -> Result<T> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    if a.is_iid() && b.is_iid() {
        let w = w2_1d(&a.coords()[0], &b.coords()[0])?;
        return Ok(w * T::of_usize(a.dim()).sqrt());
    }
    let mut acc = T::zero();
    for (x, y) in a.coords().iter().zip(b.coords()) {
        let w = w2_1d(x, y)?;
        acc = acc + w * w;
    }
    Ok(acc.sqrt())
}
