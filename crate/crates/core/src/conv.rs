//! Causal ("online") convolution: the output at step `m` depends on the
//! inputs produced before it, so the FFT is applied to blocks as they
//! complete. Cost is `O(N log^2 N)`.

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

const BASE: usize = 32;

struct Plans {
    planner: FftPlanner<f64>,
    /// FFT of `kernel[0..size]` for each block size.
    kernel_hat: HashMap<usize, Vec<Complex64>>,
    forward: HashMap<usize, Arc<dyn Fft<f64>>>,
    inverse: HashMap<usize, Arc<dyn Fft<f64>>>,
}

impl Plans {
    fn forward(&mut self, n: usize) -> Arc<dyn Fft<f64>> {
        let planner = &mut self.planner;
        self.forward.entry(n).or_insert_with(|| planner.plan_fft_forward(n)).clone()
    }

    fn inverse(&mut self, n: usize) -> Arc<dyn Fft<f64>> {
        let planner = &mut self.planner;
        self.inverse.entry(n).or_insert_with(|| planner.plan_fft_inverse(n)).clone()
    }
}

/// Runs `y_m = step(m, acc_m)` for `m = 0..n`, where
/// `acc_m = sum_{i<m} kernel[m - i] * y_i`. `kernel[0]` is never used.
pub(crate) fn causal<F>(kernel: &[Complex64], n: usize, mut step: F) -> Vec<Complex64>
where
    F: FnMut(usize, Complex64) -> Complex64,
{
    let size = n.next_power_of_two().max(1);
    let mut k = vec![Complex64::new(0.0, 0.0); size];
    let m = kernel.len().min(size);
    k[..m].copy_from_slice(&kernel[..m]);
    let mut y = vec![Complex64::new(0.0, 0.0); size];
    let mut acc = vec![Complex64::new(0.0, 0.0); size];
    let mut plans = Plans {
        planner: FftPlanner::new(),
        kernel_hat: HashMap::new(),
        forward: HashMap::new(),
        inverse: HashMap::new(),
    };
    solve(0, size, n, &k, &mut y, &mut acc, &mut plans, &mut step);
    y.truncate(n);
    y
}

#[allow(clippy::too_many_arguments)]
fn solve<F>(
    lo: usize,
    hi: usize,
    n: usize,
    k: &[Complex64],
    y: &mut [Complex64],
    acc: &mut [Complex64],
    plans: &mut Plans,
    step: &mut F,
) where
    F: FnMut(usize, Complex64) -> Complex64,
{
    if lo >= n {
        return;
    }
    if hi - lo <= BASE {
        for m in lo..hi.min(n) {
            let mut s = acc[m];
            for i in lo..m {
                s += k[m - i] * y[i];
            }
            acc[m] = s;
            y[m] = step(m, s);
        }
        return;
    }
    let mid = lo + (hi - lo) / 2;
    solve(lo, mid, n, k, y, acc, plans, step);
    if mid < n {
        // cyclic length hi - lo suffices: wrapped terms land below mid - lo
        let len = hi - lo;
        let fwd = plans.forward(len);
        let inv = plans.inverse(len);
        let kh = plans.kernel_hat.entry(len).or_insert_with(|| {
            let mut v = k[..len].to_vec();
            fwd.process(&mut v);
            v
        });
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        buf[..mid - lo].copy_from_slice(&y[lo..mid]);
        fwd.process(&mut buf);
        for (b, kk) in buf.iter_mut().zip(kh.iter()) {
            *b *= kk;
        }
        inv.process(&mut buf);
        let scale = 1.0 / len as f64;
        for m in mid..hi.min(n) {
            acc[m] += buf[m - lo] * scale;
        }
    }
    solve(mid, hi, n, k, y, acc, plans, step);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_direct_sum() {
        let n = 300;
        let kernel: Vec<Complex64> = (0..n)
            .map(|j| Complex64::new((0.3 * j as f64).cos(), 1.0 / (1.0 + j as f64)))
            .collect();
        let fast = causal(&kernel, n, |m, a| a * 0.01 + Complex64::new(1.0, m as f64 * 1e-3));
        let mut slow = vec![Complex64::new(0.0, 0.0); n];
        for m in 0..n {
            let mut a = Complex64::new(0.0, 0.0);
            for i in 0..m {
                a += kernel[m - i] * slow[i];
            }
            slow[m] = a * 0.01 + Complex64::new(1.0, m as f64 * 1e-3);
        }
        for (f, s) in fast.iter().zip(&slow) {
            assert!((f - s).norm() < 1e-12 * s.norm().max(1.0));
        }
    }
}
