//! FFT kernels: linear convolution and Gaussian smoothing of sampled data.

use num_traits::Zero;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::scalar::Real;

/// Discrete linear convolution `out[k] = sum_i a[i] b[k - i]`, length
/// `a.len() + b.len() - 1`, computed through a zero-padded FFT so there is
/// no circular wraparound.
pub fn linear_convolve<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let out_len = a.len() + b.len() - 1;
    let size = out_len.next_power_of_two();
    let mut planner = FftPlanner::<T>::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);

    let mut fa = padded(a, size);
    let mut fb = padded(b, size);
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x = *x * *y;
    }
    inv.process(&mut fa);
    let scale = T::of_usize(size).recip();
    fa.iter().take(out_len).map(|z| z.re * scale).collect()
}

/// Convolves samples (spacing `h`) with the N(0, sigma^2) density by
/// multiplying their DFT by the Gaussian characteristic function.
///
/// The input is zero-padded by `pad` nodes on each side and the padded
/// result, of length `values.len() + 2 * pad`, is returned.
pub fn gaussian_smooth<T: Real>(values: &[T], h: T, sigma: T, pad: usize) -> Vec<T> {
    let len = values.len() + 2 * pad;
    // extra room so the periodic extension cannot fold mass back in
    let size = (len + 2 * pad).next_power_of_two();
    let mut buf = vec![Complex::zero(); size];
    for (slot, &v) in buf[pad..].iter_mut().zip(values) {
        *slot = Complex::new(v, T::zero());
    }
    let mut planner = FftPlanner::<T>::new();
    planner.plan_fft_forward(size).process(&mut buf);
    let two_pi = T::TAU();
    let length = h * T::of_usize(size);
    let half_var = sigma * sigma / T::lit(2.0);
    for (k, z) in buf.iter_mut().enumerate() {
        let kk = if k <= size / 2 {
            T::of_usize(k)
        } else {
            -T::of_usize(size - k)
        };
        let omega = two_pi * kk / length;
        *z = *z * (-half_var * omega * omega).exp();
    }
    planner.plan_fft_inverse(size).process(&mut buf);
    let scale = T::of_usize(size).recip();
    buf.iter().take(len).map(|z| z.re * scale).collect()
}

fn padded<T: Real>(x: &[T], size: usize) -> Vec<Complex<T>> {
    let mut v = vec![Complex::zero(); size];
    for (slot, &val) in v.iter_mut().zip(x) {
        *slot = Complex::new(val, T::zero());
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_direct_convolution() {
        let a = [1.0f64, 2.0, 3.0];
        let b = [0.5, -1.0];
        let c = linear_convolve(&a, &b);
        let expect = [0.5, 0.0, -0.5, -3.0];
        for (x, y) in c.iter().zip(expect) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn gaussian_smoothing_adds_variance() {
        let h = 0.01;
        let n = 1601;
        let vals: Vec<f64> = (0..n)
            .map(|i| {
                let x = -8.0 + i as f64 * h;
                (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt()
            })
            .collect();
        let pad = 300;
        let out = gaussian_smooth(&vals, h, 0.75, pad);
        let mass: f64 = out.iter().sum::<f64>() * h;
        assert!((mass - 1.0).abs() < 1e-6);
        let var: f64 = out
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let x = -8.0 - pad as f64 * h + i as f64 * h;
                x * x * p
            })
            .sum::<f64>()
            * h;
        assert!((var - 1.5625).abs() < 1e-5, "{var}");
    }
}
