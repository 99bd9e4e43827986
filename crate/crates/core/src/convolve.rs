//! Densities of independent sums and of the normalized sum `Z_n = S_n / sqrt(n)`.

use crate::distributions::{make_density, DistributionSpec};
use crate::error::{Error, Result};
use crate::fft::linear_convolve;
use crate::grid::{normalize, resample, scale, GridDensity};
use crate::scalar::{c, Real};

/// Largest tolerated mass removed by clamping negative FFT output.
pub const CLAMP_TOL: f64 = 1e-9;

/// Nodes below this fraction of the peak are trimmed from convolution output.
pub const TRIM_REL: f64 = 1e-16;

/// Diagnostics of one convolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvolveStats<T> {
    /// Trapezoid mass of the raw output, before clamping and renormalizing.
    pub raw_mass: T,
    /// Mass removed by clamping negative values.
    pub clamped_mass: T,
}

/// Brings `b` onto the spacing of `a` (if it differs) by linear interpolation.
fn common_spacing<T: Real>(a: &GridDensity<T>, b: &GridDensity<T>) -> Result<GridDensity<T>> {
    let (ha, hb) = (a.spacing(), b.spacing());
    if ((ha - hb) / ha).abs() < c(1e-12) {
        return Ok(b.clone());
    }
    let width = b.hi() - b.lo();
    let cells = (width / ha)
        .ceil()
        .to_usize()
        .ok_or_else(|| Error::Construction("spacing ratio is not representable".into()))?;
    resample(b, b.lo(), b.lo() + ha * T::of_usize(cells), cells + 1)
}

/// Density of the sum of independent variables with densities `a` and `b`,
/// with diagnostics.
pub fn convolve_with_stats<T: Real>(
    a: &GridDensity<T>,
    b: &GridDensity<T>,
) -> Result<(GridDensity<T>, ConvolveStats<T>)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Construction("cannot convolve an empty grid".into()));
    }
    let (a, b) = if a.spacing() <= b.spacing() {
        (a.clone(), common_spacing(a, b)?)
    } else {
        (common_spacing(b, a)?, b.clone())
    };
    let h = a.spacing();
    // Trapezoid weights on both factors: the output then carries exactly
    // the product of the input masses, jumps at the ends included.
    let half = |v: &[T]| -> Vec<T> {
        let mut w = v.to_vec();
        let last = w.len() - 1;
        w[0] = w[0] * c(0.5);
        w[last] = w[last] * c(0.5);
        w
    };
    let mut values: Vec<T> = linear_convolve(&half(a.values()), &half(b.values()))
        .into_iter()
        .map(|v| v * h)
        .collect();
    let lo = a.lo() + b.lo();
    let hi = lo + h * T::of_usize(values.len() - 1);
    let mut clamped = T::zero();
    for v in values.iter_mut() {
        if *v < T::zero() {
            clamped = clamped - *v;
            *v = T::zero();
        }
    }
    let clamped_mass = clamped * h;
    if clamped_mass > c(CLAMP_TOL) {
        return Err(Error::Resolution(clamped_mass.to_f64_lossy()));
    }
    let raw =
        GridDensity::from_values(lo, hi, values)?.with_tail_mass(a.tail_mass() + b.tail_mass());
    let raw_mass = raw.integral();
    let out = normalize(&raw.trimmed(c(TRIM_REL)))?;
    Ok((
        out,
        ConvolveStats {
            raw_mass,
            clamped_mass,
        },
    ))
}

/// Density of the sum of independent variables with densities `a` and `b`.
pub fn convolve<T: Real>(a: &GridDensity<T>, b: &GridDensity<T>) -> Result<GridDensity<T>> {
    convolve_with_stats(a, b).map(|(g, _)| g)
}

/// Density of `S_n = X_1 + ... + X_n` by binary powering.
pub fn sum_density<T: Real>(base: &GridDensity<T>, n: usize) -> Result<GridDensity<T>> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let mut acc: Option<GridDensity<T>> = None;
    let mut power = base.clone();
    let mut k = n;
    loop {
        if k & 1 == 1 {
            acc = Some(match acc {
                None => power.clone(),
                Some(s) => convolve(&s, &power)?,
            });
        }
        k >>= 1;
        if k == 0 {
            break;
        }
        power = convolve(&power, &power)?;
    }
    Ok(acc.expect("n >= 1 sets at least one bit"))
}

/// Density of `Z_n = S_n / sqrt(n)`.
pub fn clt_density<T: Real>(base: &GridDensity<T>, n: usize) -> Result<GridDensity<T>> {
    if n == 1 {
        return Ok(base.clone());
    }
    let s = sum_density(base, n)?;
    scale(&s, T::of_usize(n).sqrt().recip())
}

/// `Z_n` by `n - 1` sequential convolutions; slow reference for small `n`.
pub fn clt_density_sequential<T: Real>(base: &GridDensity<T>, n: usize) -> Result<GridDensity<T>> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let mut s = base.clone();
    for _ in 1..n {
        s = convolve(&s, base)?;
    }
    scale(&s, T::of_usize(n).sqrt().recip())
}

/// Per-coordinate densities of `Z_n` for a list of `n`.
#[derive(Debug, Clone)]
pub struct CltSweep<T> {
    pub base: DistributionSpec,
    pub d: usize,
    /// `(n, density of one coordinate of Z_n)`, ascending in `n`.
    pub densities: Vec<(usize, GridDensity<T>)>,
}

impl<T: Real> CltSweep<T> {
    pub fn get(&self, n: usize) -> Option<&GridDensity<T>> {
        self.densities.iter().find(|(m, _)| *m == n).map(|(_, g)| g)
    }
}

/// Builds the `Z_n` densities of `base` for every `n` in `n_list`.
///
/// Coordinates of a product are independent copies, so the same
/// one-dimensional density serves every coordinate.
pub fn clt_sweep<T: Real>(
    base: &DistributionSpec,
    n_list: &[usize],
    d: usize,
    n_points: usize,
) -> Result<CltSweep<T>> {
    if d == 0 {
        return Err(Error::InvalidParameter(
            "dimension must be at least 1".into(),
        ));
    }
    if n_list.is_empty() {
        return Err(Error::InvalidParameter("n_list is empty".into()));
    }
    let g = make_density::<T>(base, n_points)?;
    let mut ns = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let densities = ns
        .iter()
        .map(|&n| clt_density(&g, n).map(|z| (n, z)))
        .collect::<Result<Vec<_>>>()?;
    Ok(CltSweep {
        base: base.clone(),
        d,
        densities,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::{fisher_information, relative_entropy_to_gaussian};
    use crate::grid::moments;

    fn gauss(n: usize) -> GridDensity<f64> {
        make_density(&DistributionSpec::Gaussian, n).unwrap()
    }

    fn phi(var: f64) -> impl Fn(f64) -> f64 {
        move |x| (-x * x / (2.0 * var)).exp() / (std::f64::consts::TAU * var).sqrt()
    }

    #[test]
    fn gaussian_pair_gives_variance_two() {
        let g = gauss(4096);
        let s = convolve(&g, &g).unwrap();
        assert!(s.sup_distance_to(phi(2.0)) < 1e-6);
    }

    #[test]
    fn uniform_pair_is_triangular() {
        let u = make_density::<f64>(&DistributionSpec::UniformSqrt3, 4096).unwrap();
        let (t, stats) = convolve_with_stats(&u, &u).unwrap();
        let peak = t.max_value();
        assert!((peak - 1.0 / (2.0 * 3f64.sqrt())).abs() < 1e-4);
        // the kinks at the ends of the support cost O(h^2) in trapezoid mass
        let h = u.spacing();
        assert!((stats.raw_mass - 1.0).abs() < h * h / 10.0);
    }

    #[test]
    fn q4_variance_adds() {
        let q = make_density::<f64>(&DistributionSpec::GeneralizedGaussian { beta: 4.0 }, 4096)
            .unwrap();
        let (s, stats) = convolve_with_stats(&q, &q).unwrap();
        assert!((moments(&s).variance - 2.0).abs() < 1e-5);
        assert!((stats.raw_mass - 1.0).abs() < 1e-9);
        assert!(stats.clamped_mass < 1e-9);
    }

    #[test]
    fn mismatched_spacings_are_resampled() {
        let a = gauss(4096);
        let b = gauss(1024);
        let s = convolve(&a, &b).unwrap();
        assert!((moments(&s).variance - 2.0).abs() < 1e-4);
    }

    #[test]
    fn n_one_is_identity() {
        let q = make_density::<f64>(&DistributionSpec::GeneralizedGaussian { beta: 3.0 }, 1024)
            .unwrap();
        assert_eq!(clt_density(&q, 1).unwrap(), q);
        assert!(clt_density(&q, 0).is_err());
    }

    #[test]
    fn gaussian_is_stable() {
        let g = gauss(4096);
        for n in [2, 3, 5, 8] {
            let z = clt_density(&g, n).unwrap();
            assert!(z.sup_distance_to(phi(1.0)) < 1e-6, "n = {n}");
        }
    }

    #[test]
    fn binary_matches_sequential() {
        let q = make_density::<f64>(&DistributionSpec::GeneralizedGaussian { beta: 4.0 }, 1024)
            .unwrap();
        for n in [2, 3, 6, 7] {
            let a = clt_density(&q, n).unwrap();
            let b = clt_density_sequential(&q, n).unwrap();
            assert!(a.sup_distance(&b) < 1e-9, "n = {n}");
        }
    }

    #[test]
    fn entropy_decreases_with_n() {
        let q = make_density::<f64>(&DistributionSpec::GeneralizedGaussian { beta: 4.0 }, 4096)
            .unwrap();
        let e4 = relative_entropy_to_gaussian(&clt_density(&q, 4).unwrap());
        let e16 = relative_entropy_to_gaussian(&clt_density(&q, 16).unwrap());
        assert!(e16 < e4);
    }

    #[test]
    fn stam_inequality() {
        let g = gauss(4096);
        let q3 = make_density::<f64>(&DistributionSpec::GeneralizedGaussian { beta: 3.0 }, 4096)
            .unwrap();
        let q4 = make_density::<f64>(&DistributionSpec::GeneralizedGaussian { beta: 4.0 }, 4096)
            .unwrap();
        let all = [&g, &q3, &q4];
        for a in all {
            for b in all {
                let ia = fisher_information(a).unwrap();
                let ib = fisher_information(b).unwrap();
                let iab = fisher_information(&convolve(a, b).unwrap()).unwrap();
                assert!(1.0 / iab >= 1.0 / ia + 1.0 / ib - 1e-4);
            }
        }
    }

    #[test]
    fn sweep_moments_and_order() {
        let sw = clt_sweep::<f64>(
            &DistributionSpec::StudentT { theta: 5.0 },
            &[8, 1, 4, 2],
            2,
            4096,
        )
        .unwrap();
        let ns: Vec<usize> = sw.densities.iter().map(|(n, _)| *n).collect();
        assert_eq!(ns, [1, 2, 4, 8]);
        for (_, z) in &sw.densities {
            let m = moments(z);
            assert!(m.mean.abs() < 2e-4 && (m.variance - 1.0).abs() < 2e-4);
        }
        let one = clt_sweep::<f64>(
            &DistributionSpec::StudentT { theta: 5.0 },
            &[1, 2, 4, 8],
            1,
            4096,
        )
        .unwrap();
        for ((_, a), (_, b)) in sw.densities.iter().zip(&one.densities) {
            assert_eq!(a, b);
        }
    }
}
