//! Globally adaptive Gauss–Kronrod (10/21-point) quadrature for real and complex integrands.

use std::collections::BinaryHeap;
use std::cmp::Ordering;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_208_745_217,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

// Gauss weights for the odd-indexed Kronrod nodes XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

/// Values the integrator can accumulate.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Estimate<T> {
    pub value: T,
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
        Self {
            abs: 1e-10,
            rel: 1e-12,
            max_intervals: 20_000,
        }
    }
}

impl Tolerance {
    pub fn absolute(abs: f64) -> Self {
        Self {
            abs,
            rel: 0.0,
            ..Self::default()
        }
    }
}

fn kronrod<T: QuadValue, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> (T, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[10];
    let mut gauss = T::zero();
    for j in 0..10 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kron = kron + pair * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + pair * WG[j / 2];
        }
    }
    let kron = kron * half;
    let gauss = gauss * half;
    let err = (kron - gauss).magnitude();
    (kron, err)
}

struct Piece<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Piece<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Piece<T> {}
impl<T> PartialOrd for Piece<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Piece<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrates `f` over `[a, b]`, first splitting at the supplied breakpoints
/// (any outside the interval are ignored), then bisecting the worst piece
/// until the summed error estimate meets the tolerance.
pub fn integrate<T, F>(mut f: F, a: f64, b: f64, breaks: &[f64], tol: Tolerance) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    if a == b {
        return Ok(Estimate {
            value: T::zero(),
            error: 0.0,
        });
    }
    if a > b {
        let e = integrate(f, b, a, breaks, tol)?;
        return Ok(Estimate {
            value: e.value * -1.0,
            error: e.error,
        });
    }
    let mut cuts: Vec<f64> = Vec::with_capacity(breaks.len() + 2);
    cuts.push(a);
    cuts.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut heap = BinaryHeap::new();
    for w in cuts.windows(2) {
        let (value, error) = kronrod(&mut f, w[0], w[1]);
        heap.push(Piece {
            a: w[0],
            b: w[1],
            value,
            error,
        });
    }
    loop {
        let (total, err) = heap.iter().fold((T::zero(), 0.0), |(v, e), p| (v + p.value, e + p.error));
        let target = tol.abs.max(tol.rel * total.magnitude());
        if err <= target {
            return Ok(Estimate { value: total, error: err });
        }
        if heap.len() >= tol.max_intervals {
            return Err(Error::Quadrature { a, b, error: err });
        }
        let worst = heap.pop().expect("non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval cannot be split further in f64
            return Err(Error::Quadrature { a, b, error: err });
        }
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let (value, error) = kronrod(&mut f, lo, hi);
            heap.push(Piece { a: lo, b: hi, value, error });
        }
    }
}

/// Breakpoints every `period / 2` across `[a, b]`, for integrands oscillating with the given period.
pub fn oscillation_breaks(a: f64, b: f64, period: f64) -> Vec<f64> {
    if !(period.is_finite() && period > 0.0) {
        return Vec::new();
    }
    let step = 0.5 * period;
    let n = ((b - a) / step).floor() as usize;
    (1..=n).map(|k| a + k as f64 * step).filter(|&x| x < b).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_exact() {
        let e = integrate(|x: f64| x * x * x - 2.0 * x, 0.0, 2.0, &[], Tolerance::default()).unwrap();
        assert!((e.value - 0.0).abs() < 1e-14);
    }

    #[test]
    fn kinked_integrand_with_breaks() {
        let e = integrate(|x: f64| x.abs(), -1.0, 2.0, &[0.0], Tolerance::default()).unwrap();
        assert!((e.value - 2.5).abs() < 1e-14);
    }

    #[test]
    fn reversed_limits_negate() {
        let e = integrate(|x: f64| x.exp(), 1.0, 0.0, &[], Tolerance::default()).unwrap();
        assert!((e.value + (1f64.exp() - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn oscillatory_complex() {
        let w = 40.0;
        let br = oscillation_breaks(0.0, 1.0, 2.0 * PI / w);
        let e = integrate(|x: f64| Complex64::new(0.0, w * x).exp(), 0.0, 1.0, &br, Tolerance::default()).unwrap();
        let exact = (Complex64::new(0.0, w).exp() - 1.0) / Complex64::new(0.0, w);
        assert!((e.value - exact).norm() < 1e-12);
    }

    #[test]
    fn singular_endpoint_converges() {
        let e = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, &[], Tolerance::absolute(1e-9)).unwrap();
        assert!((e.value - 2.0).abs() < 1e-8);
    }
}
