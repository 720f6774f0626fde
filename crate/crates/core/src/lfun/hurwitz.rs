//! Hurwitz zeta ζ(s, a) by Euler–Maclaurin summation, plus a per-modulus evaluator that
//! produces ζ(½ + it, a/q) for every unit a at once.

use num_complex::Complex64;

use crate::arith::gcd;
use crate::error::{Error, Result};
use crate::special::BERNOULLI_EVEN;

/// Heights beyond which the fixed-order Euler–Maclaurin budget is no longer trusted.
pub const MAX_HEIGHT: f64 = 1000.0;

// B_{2k}/(2k)! for k = 1..=10
const EM_COEFFS: [f64; 10] = {
    let mut out = [0.0; 10];
    let mut fact = 1.0;
    let mut k = 0;
    while k < 10 {
        let n = 2 * (k + 1);
        fact *= ((n - 1) * n) as f64;
        out[k] = BERNOULLI_EVEN[k] / fact;
        k += 1;
    }
    out
};

fn cutoff(s: Complex64) -> usize {
    s.im.abs().max(s.re.abs()).max(20.0).ceil() as usize
}

/// Euler–Maclaurin tail at x = N + a: x^{1−s}/(s−1) + x^{−s}/2 + Σ_k B_{2k}/(2k)! (s)_{2k−1} x^{−s−2k+1}.
fn em_tail(s: Complex64, x: f64, x_pow_neg_s: Complex64) -> Complex64 {
    let inv_x = 1.0 / x;
    let inv_x2 = inv_x * inv_x;
    let mut acc = x_pow_neg_s * x / (s - 1.0) + x_pow_neg_s * 0.5;
    let mut poch = s;
    let mut xp = x_pow_neg_s * inv_x;
    for (k, c) in EM_COEFFS.iter().enumerate() {
        acc += poch * xp * *c;
        let j = 2.0 * k as f64 + 1.0;
        poch = poch * (s + j) * (s + j + 1.0);
        xp *= inv_x2;
    }
    acc
}

fn check_args(s: Complex64, a: f64) -> Result<()> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::OutOfRange {
            what: "Hurwitz shift a",
            value: a,
            limit: 1.0,
        });
    }
    if s.re == 1.0 && s.im == 0.0 {
        return Err(Error::Pole { re: 1.0, im: 0.0 });
    }
    if s.im.abs() > MAX_HEIGHT {
        return Err(Error::OutOfRange {
            what: "|Im s|",
            value: s.im.abs(),
            limit: MAX_HEIGHT,
        });
    }
    Ok(())
}

/// ζ(s, a) = Σ_{n≥0} (n + a)^{−s} for a ∈ (0, 1], s ≠ 1, |Im s| ≤ [`MAX_HEIGHT`].
pub fn hurwitz_zeta(s: Complex64, a: f64) -> Result<Complex64> {
    check_args(s, a)?;
    let n = cutoff(s);
    let mut head = Complex64::new(0.0, 0.0);
    // smallest terms first
    for k in (0..n).rev() {
        head += (-s * (k as f64 + a).ln()).exp();
    }
    let x = n as f64 + a;
    let xs = (-s * x.ln()).exp();
    Ok(head + em_tail(s, x, xs))
}

/// Riemann ζ(s).
pub fn zeta(s: Complex64) -> Result<Complex64> {
    hurwitz_zeta(s, 1.0)
}

/// Tabulated logs and square roots for ζ(½ + it, a/q), every unit a mod q, |t| ≤ height.
#[derive(Debug, Clone)]
pub struct LineEvaluator {
    modulus: u64,
    units: Vec<u64>,
    height: f64,
    terms: usize,
    // per unit: ln(n + a/q) and (n + a/q)^{−1/2} for n < terms
    logs: Vec<f64>,
    rsqrt: Vec<f64>,
}

impl LineEvaluator {
    pub fn new(q: u64, height: f64) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidConfig("modulus must be positive".into()));
        }
        if !(0.0..=MAX_HEIGHT).contains(&height) {
            return Err(Error::OutOfRange {
                what: "height",
                value: height,
                limit: MAX_HEIGHT,
            });
        }
        let units: Vec<u64> = (1..=q).filter(|&a| gcd(a, q) == 1).collect();
        let terms = cutoff(Complex64::new(0.5, height));
        let mut logs = Vec::with_capacity(units.len() * terms);
        let mut rsqrt = Vec::with_capacity(units.len() * terms);
        for &a in &units {
            let alpha = a as f64 / q as f64;
            for n in 0..terms {
                let x = n as f64 + alpha;
                logs.push(x.ln());
                rsqrt.push(1.0 / x.sqrt());
            }
        }
        Ok(Self {
            modulus: q,
            units,
            height,
            terms,
            logs,
            rsqrt,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Units a ∈ [1, q] in increasing order; results are indexed the same way.
    pub fn units(&self) -> &[u64] {
        &self.units
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    /// ζ(½ + it, a/q) for every unit a, written into `out`.
    pub fn eval_into(&self, t: f64, out: &mut [Complex64]) {
        debug_assert!(t.abs() <= self.height + 1.0);
        let s = Complex64::new(0.5, t);
        let n = cutoff(s).min(self.terms);
        for (u, slot) in out.iter_mut().enumerate().take(self.units.len()) {
            let logs = &self.logs[u * self.terms..u * self.terms + n];
            let rs = &self.rsqrt[u * self.terms..u * self.terms + n];
            let (mut re, mut im) = (0.0, 0.0);
            for k in (0..n).rev() {
                let (sin, cos) = (t * logs[k]).sin_cos();
                re += rs[k] * cos;
                im -= rs[k] * sin;
            }
            let alpha = self.units[u] as f64 / self.modulus as f64;
            let x = n as f64 + alpha;
            let lx = x.ln();
            let (sin, cos) = (t * lx).sin_cos();
            let xs = Complex64::new(cos, -sin) / x.sqrt();
            *slot = Complex64::new(re, im) + em_tail(s, x, xs);
        }
    }

    /// ζ(½ + i(t ∓ δ), a/q) for every unit a, sharing one sincos per term. Requires
    /// δ·log(N) ≤ 10⁻³ so that the small rotation is exact to rounding by its Taylor series.
    pub fn eval_pair_into(&self, t: f64, delta: f64, lo: &mut [Complex64], hi: &mut [Complex64]) {
        let n = cutoff(Complex64::new(0.5, t.abs() + delta)).min(self.terms);
        debug_assert!(delta * (n as f64 + 1.0).ln() <= 1e-3);
        for u in 0..self.units.len() {
            let logs = &self.logs[u * self.terms..u * self.terms + n];
            let rs = &self.rsqrt[u * self.terms..u * self.terms + n];
            let (mut re, mut im, mut dre, mut dim) = (0.0, 0.0, 0.0, 0.0);
            for k in (0..n).rev() {
                let (sin, cos) = (t * logs[k]).sin_cos();
                let d = delta * logs[k];
                let d2 = d * d;
                let c = 1.0 - 0.5 * d2 + d2 * d2 / 24.0;
                let sd = d * (1.0 - d2 / 6.0 + d2 * d2 / 120.0);
                // x^{−½−it}: (cos − i sin); the shift multiplies by cos(δl) ± i sin(δl)
                re += rs[k] * cos * c;
                im -= rs[k] * sin * c;
                dre += rs[k] * sin * sd;
                dim += rs[k] * cos * sd;
            }
            let alpha = self.units[u] as f64 / self.modulus as f64;
            let x = n as f64 + alpha;
            let lx = x.ln();
            for (sign, out) in [(-1.0, &mut *lo), (1.0, &mut *hi)] {
                let tt = t + sign * delta;
                let (sin, cos) = (tt * lx).sin_cos();
                let xs = Complex64::new(cos, -sin) / x.sqrt();
                // t − δ multiplies x^{−it} by e^{+iδl}: adds (sin·sd, cos·sd)
                let head = Complex64::new(re - sign * dre, im - sign * dim);
                out[u] = head + em_tail(Complex64::new(0.5, tt), x, xs);
            }
        }
    }

    pub fn eval(&self, t: f64) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.units.len()];
        self.eval_into(t, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn classical_values() {
        let z2 = zeta(Complex64::new(2.0, 0.0)).unwrap();
        assert!((z2.re - PI * PI / 6.0).abs() < 1e-14 && z2.im == 0.0);
        let h = hurwitz_zeta(Complex64::new(2.0, 0.0), 0.5).unwrap();
        assert!((h.re - PI * PI / 2.0).abs() < 1e-13);
        let z3 = zeta(Complex64::new(3.0, 0.0)).unwrap();
        // direct series to 1e-12
        let direct: f64 = (1..200_000u64).rev().map(|n| (n as f64).powi(-3)).sum();
        assert!((z3.re - direct).abs() < 1e-10);
        assert!((z3.re - 1.202_056_903_159_594_3).abs() < 1e-14);
    }

    #[test]
    fn half_shift_identity_off_axis() {
        // ζ(s, 1/2) = (2^s − 1) ζ(s)
        for &(x, y) in &[(0.5, 10.0), (0.5, 123.4), (2.5, -40.0), (-1.5, 7.0)] {
            let s = Complex64::new(x, y);
            let lhs = hurwitz_zeta(s, 0.5).unwrap();
            let rhs = (Complex64::new(2.0, 0.0).powc(s) - 1.0) * zeta(s).unwrap();
            assert!((lhs - rhs).norm() < 1e-10 * rhs.norm().max(1.0), "{s}");
        }
    }

    #[test]
    fn zeta_half() {
        let v = zeta(Complex64::new(0.5, 0.0)).unwrap();
        assert!((v.re + 1.460_354_508_809_586_8).abs() < 1e-13);
    }

    #[test]
    fn errors_signaled() {
        assert!(matches!(zeta(Complex64::new(1.0, 0.0)), Err(Error::Pole { .. })));
        assert!(hurwitz_zeta(Complex64::new(0.5, 2000.0), 1.0).is_err());
        assert!(hurwitz_zeta(Complex64::new(2.0, 0.0), 0.0).is_err());
        assert!(hurwitz_zeta(Complex64::new(2.0, 0.0), 1.5).is_err());
    }

    #[test]
    fn pair_evaluation_matches_separate() {
        let ev = LineEvaluator::new(7, 200.0).unwrap();
        let n = ev.units().len();
        for &t in &[0.3, 50.0, 199.0] {
            let delta = 5e-5;
            let mut lo = vec![Complex64::new(0.0, 0.0); n];
            let mut hi = lo.clone();
            ev.eval_pair_into(t, delta, &mut lo, &mut hi);
            let a = ev.eval(t - delta);
            let b = ev.eval(t + delta);
            for i in 0..n {
                assert!((lo[i] - a[i]).norm() < 1e-12 * a[i].norm().max(1.0));
                assert!((hi[i] - b[i]).norm() < 1e-12 * b[i].norm().max(1.0));
            }
        }
    }

    #[test]
    fn line_evaluator_matches_scalar() {
        let ev = LineEvaluator::new(12, 300.0).unwrap();
        assert_eq!(ev.units(), &[1, 5, 7, 11]);
        for &t in &[0.0, 3.3, -17.0, 150.5, 299.0] {
            let vals = ev.eval(t);
            for (i, &a) in ev.units().iter().enumerate() {
                let direct = hurwitz_zeta(Complex64::new(0.5, t), a as f64 / 12.0).unwrap();
                assert!((vals[i] - direct).norm() < 1e-11 * direct.norm().max(1.0));
            }
        }
    }
}
