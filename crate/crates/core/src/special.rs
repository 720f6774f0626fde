//! Gamma-family special functions for complex arguments and the Bernoulli numbers used by
//! the Euler–Maclaurin and Stirling expansions.

use std::f64::consts::PI;

use num_complex::Complex64;

/// B_2, B_4, ..., B_20.
pub const BERNOULLI_EVEN: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_741_780_329_736_4;
const STIRLING_MIN: f64 = 15.0;

/// Principal branch of log Γ(z), continuous on Re z > 0.
///
/// For Re z < 0 the reflection formula is used; the imaginary part there is only
/// determined modulo 2π.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re < 0.0 {
        let sin = (z * PI).sin();
        return Complex64::new(PI.ln(), 0.0) - sin.ln() - ln_gamma(Complex64::new(1.0, 0.0) - z);
    }
    let mut shift = Complex64::new(0.0, 0.0);
    let mut w = z;
    while w.norm() < STIRLING_MIN {
        shift += w.ln();
        w += 1.0;
    }
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut pow = inv;
    for (k, b) in BERNOULLI_EVEN.iter().take(8).enumerate() {
        let n = 2.0 * (k as f64 + 1.0);
        series += pow * (b / (n * (n - 1.0)));
        pow *= inv2;
    }
    (w - 0.5) * w.ln() - w + LN_SQRT_2PI + series - shift
}

/// Γ(z) for complex z off the poles.
pub fn gamma(z: Complex64) -> Complex64 {
    ln_gamma(z).exp()
}

/// Digamma ψ(x) for real x > 0.
pub fn digamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut acc = 0.0;
    let mut y = x;
    while y < 10.0 {
        acc -= 1.0 / y;
        y += 1.0;
    }
    let inv2 = 1.0 / (y * y);
    let mut pow = inv2;
    let mut series = 0.0;
    for (k, b) in BERNOULLI_EVEN.iter().take(8).enumerate() {
        let n = 2.0 * (k as f64 + 1.0);
        series += b / n * pow;
        pow *= inv2;
    }
    acc + y.ln() - 0.5 / y - series
}

/// Compensated (Neumaier) accumulator; used wherever a long reduction must not depend on
/// how the terms happen to be ordered in magnitude.
#[derive(Debug, Clone, Copy, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Pairwise sum of a slice; the association order depends only on the length.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

pub fn pairwise_sum_complex(xs: &[Complex64]) -> Complex64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum_complex(a) + pairwise_sum_complex(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_real_values() {
        assert!((ln_gamma(Complex64::new(1.0, 0.0))).norm() < 1e-14);
        assert!((ln_gamma(Complex64::new(0.5, 0.0)).re - PI.sqrt().ln()).abs() < 1e-14);
        // ln Γ(10) = ln 362880
        assert!((ln_gamma(Complex64::new(10.0, 0.0)).re - 362_880f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn ln_gamma_recurrence_and_branch() {
        for &(x, y) in &[(0.25, 3.0), (0.75, -40.0), (1.3, 250.0), (0.25, 499.0)] {
            let z = Complex64::new(x, y);
            let lhs = ln_gamma(z + 1.0);
            let rhs = ln_gamma(z) + z.ln();
            // the continuous branch satisfies the recurrence exactly, without a 2πi jump
            assert!((lhs - rhs).norm() < 1e-10 * (1.0 + lhs.norm()), "{z}");
        }
    }

    #[test]
    fn gamma_modulus_on_vertical_line() {
        // |Γ(1/2 + it)|² = π / cosh(πt)
        for &t in &[0.0, 1.0, 5.0, 20.0] {
            let g = gamma(Complex64::new(0.5, t));
            let expected = PI / (PI * t).cosh();
            assert!((g.norm_sqr() / expected - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn reflection_matches_shift() {
        let z = Complex64::new(-0.3, 0.2);
        let g = gamma(z);
        let via = gamma(z + 1.0) / z;
        assert!((g - via).norm() < 1e-12 * g.norm());
    }

    #[test]
    fn digamma_values() {
        let euler_gamma = 0.577_215_664_901_532_9;
        assert!((digamma(1.0) + euler_gamma).abs() < 1e-14);
        assert!((digamma(0.5) + euler_gamma + 2.0 * 2f64.ln()).abs() < 1e-14);
        assert!((digamma(0.25) - (-euler_gamma - PI / 2.0 - 3.0 * 2f64.ln())).abs() < 1e-13);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut acc = Neumaier::default();
        acc.add(1e16);
        acc.add(1.0);
        acc.add(-1e16);
        assert_eq!(acc.value(), 1.0);
        let xs: Vec<f64> = (1..=1000).map(|k| k as f64).collect();
        assert_eq!(pairwise_sum(&xs), 500_500.0);
    }
}
