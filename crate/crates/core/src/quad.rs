//! Quadrature building blocks: adaptive Gauss-Kronrod for complex
//! integrands and fixed Gauss-Legendre panel rules.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;

use crate::error::{DecayError, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_73,
    0.054_755_896_574_351_996,
    0.075_039_674_810_919_95,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_85,
    0.134_709_217_311_473_33,
    0.142_775_938_577_060_08,
    0.147_739_104_901_338_5,
    0.149_445_554_002_916_9,
];

// Gauss weights for the nodes XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_36,
    0.295_524_224_714_752_87,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: Complex64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-13,
            rel: 1e-11,
            max_intervals: 4000,
        }
    }
}

fn gk21<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[10];
    let mut gauss = Complex64::new(0.0, 0.0);
    for j in 0..10 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += s * WGK[j];
        if j % 2 == 1 {
            gauss += s * WG[j / 2];
        }
    }
    let kron = kron * h;
    let gauss = gauss * h;
    (kron, (kron - gauss).norm())
}

struct Segment {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// Adaptive 21-point Gauss-Kronrod integration over the finite interval
/// `[a, b]`, bisecting the worst interval until the global estimate meets
/// `max(abs, rel * |I|)`.
pub fn integrate<F>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<Integral>
where
    F: FnMut(f64) -> Complex64,
{
    integrate_breaks(&mut f, &[a, b], tol)
}

/// Like [`integrate`] but starts from the given breakpoints.
pub fn integrate_breaks<F>(f: &mut F, breaks: &[f64], tol: Tolerance) -> Result<Integral>
where
    F: FnMut(f64) -> Complex64,
{
    let mut heap = BinaryHeap::new();
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    for w in breaks.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let (v, e) = gk21(f, w[0], w[1]);
        total += v;
        err += e;
        heap.push(Segment {
            a: w[0],
            b: w[1],
            value: v,
            error: e,
        });
    }
    let mut count = heap.len();
    while err > tol.abs.max(tol.rel * total.norm()) {
        if count >= tol.max_intervals {
            let worst = heap.peek().map(|s| 0.5 * (s.a + s.b)).unwrap_or(f64::NAN);
            return Err(DecayError::Quadrature {
                requested: tol.abs.max(tol.rel * total.norm()),
                achieved: err,
                location: worst,
            });
        }
        let Some(seg) = heap.pop() else { break };
        let m = 0.5 * (seg.a + seg.b);
        if m <= seg.a || m >= seg.b {
            // interval exhausted at machine resolution
            heap.push(Segment { error: 0.0, ..seg });
            err -= seg.error;
            continue;
        }
        let (v1, e1) = gk21(f, seg.a, m);
        let (v2, e2) = gk21(f, m, seg.b);
        total += v1 + v2 - seg.value;
        err += e1 + e2 - seg.error;
        heap.push(Segment {
            a: seg.a,
            b: m,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: m,
            b: seg.b,
            value: v2,
            error: e2,
        });
        count += 1;
    }
    // re-sum to shed drift from the incremental updates
    let value = heap.iter().fold(Complex64::new(0.0, 0.0), |acc, s| acc + s.value);
    let error = heap.iter().map(|s| s.error).sum();
    Ok(Integral { value, error })
}

/// Integral over `[a, inf)` through the map `x = a + s t / (1 - t)`.
/// `breaks` are interior points of the original variable that should
/// start as panel edges.
pub fn integrate_to_infinity<F>(
    mut f: F,
    a: f64,
    scale: f64,
    breaks: &[f64],
    tol: Tolerance,
) -> Result<Integral>
where
    F: FnMut(f64) -> Complex64,
{
    let mut g = |t: f64| {
        if t >= 1.0 {
            return Complex64::new(0.0, 0.0);
        }
        let one_minus = 1.0 - t;
        let x = a + scale * t / one_minus;
        f(x) * (scale / (one_minus * one_minus))
    };
    let mut ts = vec![0.0];
    for &x in breaks {
        if x > a {
            let u = (x - a) / scale;
            ts.push(u / (1.0 + u));
        }
    }
    ts.push(1.0);
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    integrate_breaks(&mut g, &ts, tol)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    let n = NonZeroUsize::new(order.max(1)).expect("nonzero order");
    let mut pairs: Vec<(f64, f64)> = GaussLegendre::new(n).as_node_weight_pairs().to_vec();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    pairs
}

/// A fixed quadrature rule: nodes and weights on the real line.
#[derive(Debug, Clone, Default)]
pub struct PanelRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl PanelRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Gauss-Legendre rule of the given order on every panel between
    /// consecutive breakpoints.
    pub fn from_breaks(breaks: &[f64], order: usize) -> PanelRule {
        let base = gauss_legendre(order);
        let mut rule = PanelRule::default();
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            let c = 0.5 * (a + b);
            let h = 0.5 * (b - a);
            for &(x, wt) in &base {
                rule.nodes.push(c + h * x);
                rule.weights.push(h * wt);
            }
        }
        rule
    }

    /// Rule for `[0, inf)`: one panel on `[0, lo]`, then geometric panels
    /// with `per_decade` panels per factor of ten up to `hi`.
    pub fn geometric(lo: f64, hi: f64, per_decade: usize, order: usize) -> PanelRule {
        let mut breaks = vec![0.0, lo];
        let ratio = 10f64.powf(1.0 / per_decade as f64);
        let mut x = lo;
        while x < hi {
            x *= ratio;
            breaks.push(x);
        }
        PanelRule::from_breaks(&breaks, order)
    }

    pub fn sum<F: FnMut(f64) -> Complex64>(&self, mut f: F) -> Complex64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(Complex64::new(0.0, 0.0), |acc, (&x, &w)| acc + f(x) * w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk_polynomial_exact() {
        let r = integrate(|x| Complex64::new(x.powi(7), 0.0), 0.0, 2.0, Tolerance::default()).unwrap();
        assert!((r.value.re - 32.0).abs() < 1e-12);
    }

    #[test]
    fn gk_endpoint_singularity() {
        let r = integrate(
            |x| Complex64::new(x.sqrt().recip(), 0.0),
            0.0,
            1.0,
            Tolerance::default(),
        )
        .unwrap();
        assert!((r.value.re - 2.0).abs() < 1e-9);
    }

    #[test]
    fn infinite_range() {
        let r = integrate_to_infinity(
            |x| Complex64::new((-x).exp(), 0.0),
            0.0,
            1.0,
            &[],
            Tolerance::default(),
        )
        .unwrap();
        assert!((r.value.re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn geometric_rule_exponential() {
        let rule = PanelRule::geometric(1e-8, 60.0, 4, 16);
        let v = rule.sum(|u| Complex64::new(0.0, -u).exp() * (-u).exp());
        // integral of exp(-(1+i)u) on [0, inf)
        let exact = Complex64::new(1.0, 1.0).inv();
        assert!((v - exact).norm() < 1e-14);
    }
}
