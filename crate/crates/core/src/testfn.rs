//! Mellin pairs (Φ, Φ̂): the sinc² pair with Φ̂(ix) = (sin x/x)², user-supplied test
//! functions, and the smooth weight W on (1,2).

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::{integrate, oscillation_breaks, Tolerance};

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type ComplexFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

const MELLIN_TOL: f64 = 1e-11;

/// Guarantee |Φ̂(ix)| ≤ constant · |x|^{−exponent}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decay {
    pub exponent: f64,
    pub constant: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestKind {
    SincSquared,
    Custom,
}

/// Anything with compact support in (0, ∞) whose Mellin transform can be taken numerically.
pub trait MellinSource {
    /// Support endpoints (a, b), 0 < a < b.
    fn support(&self) -> (f64, f64);
    fn eval(&self, x: f64) -> f64;
    /// Points in u = log x where f(e^u) is not smooth.
    fn log_breaks(&self) -> Vec<f64> {
        Vec::new()
    }
}

#[derive(Clone)]
pub struct TestFunction {
    kind: TestKind,
    support: (f64, f64),
    scale: f64,
    decay: Decay,
    breaks: Vec<f64>,
    point: Option<RealFn>,
    transform: Option<ComplexFn>,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("kind", &self.kind)
            .field("support", &self.support)
            .field("scale", &self.scale)
            .field("decay", &self.decay)
            .finish()
    }
}

impl TestFunction {
    /// Φ(x) = ½ − ¼|log x| on (e⁻², e²), the pair of Φ̂(s) = (sinh s / s)².
    pub fn sinc_squared() -> Self {
        Self {
            kind: TestKind::SincSquared,
            support: ((-2f64).exp(), 2f64.exp()),
            scale: 1.0,
            decay: Decay {
                exponent: 2.0,
                constant: 1.0,
            },
            breaks: vec![0.0],
            point: None,
            transform: None,
        }
    }

    /// A test function given by its values on (a, b); Φ̂ is computed by quadrature unless a
    /// closed form is attached with [`TestFunction::with_transform`].
    pub fn custom<F>(support: (f64, f64), f: F, decay: Decay, log_breaks: Vec<f64>) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let (a, b) = support;
        if !(a > 0.0 && a < b && b.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "test function support ({a}, {b}) must satisfy 0 < a < b"
            )));
        }
        if !(decay.exponent > 0.0 && decay.constant >= 0.0) {
            return Err(Error::InvalidConfig(format!("invalid decay contract {decay:?}")));
        }
        Ok(Self {
            kind: TestKind::Custom,
            support,
            scale: 1.0,
            decay,
            breaks: log_breaks,
            point: Some(Arc::new(f)),
            transform: None,
        })
    }

    pub fn with_transform<F>(mut self, hat: F) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        self.transform = Some(Arc::new(hat));
        self
    }

    /// c·Φ; the transform and decay constant scale with it.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.scale *= c;
        out.decay.constant *= c.abs();
        out
    }

    /// The identically zero test function (kept with the sinc² support).
    pub fn zero() -> Self {
        Self::sinc_squared().scaled(0.0)
    }

    pub fn kind(&self) -> TestKind {
        self.kind
    }

    pub fn decay(&self) -> Decay {
        self.decay
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn is_zero(&self) -> bool {
        self.scale == 0.0
    }

    /// Φ(x); zero outside the support.
    pub fn phi(&self, x: f64) -> f64 {
        let (a, b) = self.support;
        if !(x > a && x < b) {
            return 0.0;
        }
        let base = match (&self.kind, &self.point) {
            (TestKind::SincSquared, _) => 0.5 - 0.25 * x.ln().abs(),
            (TestKind::Custom, Some(f)) => f(x),
            (TestKind::Custom, None) => unreachable!("custom test function without evaluator"),
        };
        self.scale * base
    }

    /// Φ̂(s) = ∫₀^∞ Φ(x) x^{s−1} dx.
    pub fn phi_hat(&self, s: Complex64) -> Result<Complex64> {
        if self.scale == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        match (&self.kind, &self.transform) {
            (TestKind::SincSquared, _) => Ok(phi_hat_sinc(s) * self.scale),
            (_, Some(h)) => Ok(h(s) * self.scale),
            _ => mellin_numeric(self, s),
        }
    }

    /// Φ̂(ix), the weight attached to a zero at height x.
    pub fn phi_hat_i(&self, x: f64) -> Complex64 {
        self.phi_hat(Complex64::new(0.0, x))
            .expect("transform on the imaginary axis")
    }

    /// True when Φ̂(ix) is real for real x (Φ(x) = Φ(1/x)).
    pub fn is_self_reciprocal(&self) -> bool {
        self.kind == TestKind::SincSquared
    }

    /// (1/2π)∫|Φ̂(ix)|² dx, evaluated on the Φ side as ∫Φ(e^{−u})² du.
    pub fn l2_norm_sq(&self) -> Result<f64> {
        if self.kind == TestKind::SincSquared {
            return Ok(self.scale * self.scale / 3.0);
        }
        let (a, b) = self.support;
        let e = integrate(
            |u: f64| self.phi((-u).exp()).powi(2),
            -b.ln(),
            -a.ln(),
            &self.breaks.iter().map(|u| -u).collect::<Vec<_>>(),
            Tolerance::absolute(1e-12),
        )?;
        Ok(e.value)
    }
}

impl MellinSource for TestFunction {
    fn support(&self) -> (f64, f64) {
        self.support
    }
    fn eval(&self, x: f64) -> f64 {
        self.phi(x)
    }
    fn log_breaks(&self) -> Vec<f64> {
        self.breaks.clone()
    }
}

/// Φ(x) for the sinc² pair: ½ − ¼ log x on [1, e²], mirrored on [e⁻², 1], 0 outside.
pub fn phi_sinc(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::InvalidConfig(format!("Φ is defined for x > 0, got {x}")));
    }
    Ok((0.5 - 0.25 * x.ln().abs()).max(0.0))
}

/// Φ̂(s) = ((e^s − e^{−s})/2s)², entire with value 1 at s = 0.
pub fn phi_hat_sinc(s: Complex64) -> Complex64 {
    let ratio = if s.norm() < 1e-3 {
        let s2 = s * s;
        Complex64::new(1.0, 0.0) + s2 / 6.0 + s2 * s2 / 120.0
    } else {
        s.sinh() / s
    };
    ratio * ratio
}

/// The standard bump exp(−1/((x−1)(2−x))) on (1, 2).
pub fn w_bump(x: f64) -> f64 {
    if x > 1.0 && x < 2.0 {
        (-1.0 / ((x - 1.0) * (2.0 - x))).exp()
    } else {
        0.0
    }
}

/// Ŵ(s) of the standard bump.
pub fn w_hat(s: Complex64) -> Result<Complex64> {
    mellin_numeric(&SmoothWeight::bump(), s)
}

#[derive(Clone)]
enum WeightKind {
    Bump,
    Zero,
    Custom(RealFn),
}

/// Smooth weight W compactly supported in (1, 2).
#[derive(Clone)]
pub struct SmoothWeight {
    kind: WeightKind,
    support: (f64, f64),
    hat_one: f64,
}

impl fmt::Debug for SmoothWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            WeightKind::Bump => "bump",
            WeightKind::Zero => "zero",
            WeightKind::Custom(_) => "custom",
        };
        f.debug_struct("SmoothWeight")
            .field("kind", &kind)
            .field("support", &self.support)
            .field("hat_one", &self.hat_one)
            .finish()
    }
}

impl SmoothWeight {
    pub fn bump() -> Self {
        let mut w = Self {
            kind: WeightKind::Bump,
            support: (1.0, 2.0),
            hat_one: 0.0,
        };
        w.hat_one = w.hat(Complex64::new(1.0, 0.0)).expect("bump transform").re;
        w
    }

    pub fn zero() -> Self {
        Self {
            kind: WeightKind::Zero,
            support: (1.0, 2.0),
            hat_one: 0.0,
        }
    }

    /// A weight given on a sub-interval of (1, 2); it must vanish outside.
    pub fn custom<F>(support: (f64, f64), f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let (a, b) = support;
        if !(a >= 1.0 && b <= 2.0 && a < b) {
            return Err(Error::InvalidConfig(format!(
                "weight support ({a}, {b}) must lie inside (1, 2)"
            )));
        }
        let mut w = Self {
            kind: WeightKind::Custom(Arc::new(f)),
            support,
            hat_one: 0.0,
        };
        w.hat_one = w.hat(Complex64::new(1.0, 0.0))?.re;
        Ok(w)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, WeightKind::Zero)
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn w(&self, x: f64) -> f64 {
        let (a, b) = self.support;
        if !(x > a && x < b) {
            return 0.0;
        }
        match &self.kind {
            WeightKind::Bump => w_bump(x),
            WeightKind::Zero => 0.0,
            WeightKind::Custom(f) => f(x),
        }
    }

    pub fn hat(&self, s: Complex64) -> Result<Complex64> {
        if self.is_zero() {
            return Ok(Complex64::new(0.0, 0.0));
        }
        mellin_numeric(self, s)
    }

    /// Ŵ(1) = ∫ W(x) dx.
    pub fn hat_one(&self) -> f64 {
        self.hat_one
    }
}

impl MellinSource for SmoothWeight {
    fn support(&self) -> (f64, f64) {
        self.support
    }
    fn eval(&self, x: f64) -> f64 {
        self.w(x)
    }
}

/// ∫ f(x) x^{s−1} dx over the support, as ∫ f(e^u) e^{us} du with the u-range split at
/// the integrand's half-periods and at the source's kinks.
pub fn mellin_numeric<M: MellinSource + ?Sized>(f: &M, s: Complex64) -> Result<Complex64> {
    let (a, b) = f.support();
    let (lo, hi) = (a.ln(), b.ln());
    if !(hi > lo) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut breaks = f.log_breaks();
    if s.im != 0.0 {
        breaks.extend(oscillation_breaks(lo, hi, 2.0 * PI / s.im.abs()));
    }
    let e = integrate(
        |u: f64| (s * u).exp() * f.eval(u.exp()),
        lo,
        hi,
        &breaks,
        Tolerance::absolute(MELLIN_TOL),
    )?;
    Ok(e.value)
}

/// Both sides of Mellin–Plancherel: (1/2π)∫|Φ̂(ix)|²dx and ∫Φ(e^{−u})²du.
///
/// The left side is truncated at |x| = 10⁴ (or earlier, when the decay contract already
/// puts the remainder below 10⁻⁹) and the analytic tail bound is added.
pub fn plancherel_check(phi: &TestFunction) -> Result<(f64, f64)> {
    let Decay { exponent, constant } = phi.decay();
    if exponent < 1.5 {
        return Err(Error::InvalidConfig(format!(
            "decay exponent {exponent} < 3/2: Plancherel integral cannot be truncated reliably"
        )));
    }
    let tail_at = |x: f64| constant * constant * x.powf(1.0 - 2.0 * exponent) / (PI * (2.0 * exponent - 1.0));
    let mut cutoff = 1e4;
    if phi.kind() == TestKind::Custom && constant > 0.0 {
        let target = 1e-9;
        let x = (target * PI * (2.0 * exponent - 1.0) / (constant * constant)).powf(1.0 / (1.0 - 2.0 * exponent));
        cutoff = x.clamp(10.0, 1e4);
    }
    let step = if phi.kind() == TestKind::SincSquared { PI } else { 1.0 };
    let breaks = oscillation_breaks(0.0, cutoff, 2.0 * step);
    let body = integrate(
        |x: f64| phi.phi_hat_i(x).norm_sqr(),
        0.0,
        cutoff,
        &breaks,
        Tolerance {
            abs: 1e-11,
            rel: 0.0,
            max_intervals: 200_000,
        },
    )?;
    let lhs = body.value / PI + tail_at(cutoff);
    let rhs = phi.l2_norm_sq()?;
    Ok((lhs, rhs))
}

/// ∫_{−X}^{X} (sin x/x)⁴ dx by quadrature, with the bound 2X⁻³/3 on the omitted tails.
pub fn sinc4_integral(cutoff: f64) -> Result<(f64, f64)> {
    let breaks = oscillation_breaks(0.0, cutoff, 2.0 * PI);
    let e = integrate(
        |x: f64| {
            if x == 0.0 {
                1.0
            } else {
                (x.sin() / x).powi(4)
            }
        },
        0.0,
        cutoff,
        &breaks,
        Tolerance {
            abs: 1e-12,
            rel: 0.0,
            max_intervals: 200_000,
        },
    )?;
    Ok((2.0 * e.value, 2.0 * cutoff.powi(-3) / 3.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn phi_piecewise_values() {
        assert_eq!(phi_sinc(1.0).unwrap(), 0.5);
        assert!(phi_sinc(2f64.exp()).unwrap().abs() < 1e-15);
        assert_eq!(phi_sinc(10.0).unwrap(), 0.0);
        assert!(phi_sinc(0.0).is_err());
        assert!(phi_sinc(-1.0).is_err());
        for &x in &[0.2, 0.5, 1.7, 3.0, 7.0] {
            assert!(close(phi_sinc(x).unwrap(), phi_sinc(1.0 / x).unwrap(), 1e-15));
        }
        let f = TestFunction::sinc_squared();
        assert_eq!(f.phi(1.0), 0.5);
        assert_eq!(f.phi(3.0), phi_sinc(3.0).unwrap());
    }

    #[test]
    fn phi_hat_values() {
        assert!((phi_hat_sinc(Complex64::new(0.0, 0.0)) - 1.0).norm() < 1e-15);
        assert!(phi_hat_sinc(Complex64::new(0.0, PI)).norm() < 1e-15);
        let v = phi_hat_sinc(Complex64::new(0.0, 1.0));
        assert!((v.re - 1f64.sin().powi(2)).abs() < 1e-15 && v.im.abs() < 1e-15);
        assert!((v.re - 0.708_073_418).abs() < 1e-8);
        // series branch continuous with the closed form
        let s = Complex64::new(0.0009, 0.0004);
        let direct = (s.sinh() / s).powu(2);
        assert!((phi_hat_sinc(s) - direct).norm() < 1e-14);
    }

    #[test]
    fn phi_hat_pointwise_bound() {
        for k in 0..2000 {
            let x = -100.0 + 0.1 * k as f64;
            let v = phi_hat_sinc(Complex64::new(0.0, x)).norm();
            assert!(v <= 1.0_f64.min(1.0 / (x * x)) + 1e-15);
        }
    }

    #[test]
    fn mellin_matches_closed_form() {
        let f = TestFunction::sinc_squared();
        for &x in &[0.5, 1.0, 2.0, 5.0] {
            let s = Complex64::new(0.0, x);
            let num = mellin_numeric(&f, s).unwrap();
            assert!((num - (x.sin() / x).powi(2)).norm() < 1e-8);
        }
        let s = Complex64::new(0.5, 0.0);
        assert!((mellin_numeric(&f, s).unwrap() - phi_hat_sinc(s)).norm() < 1e-10);
    }

    #[test]
    fn mellin_empty_support() {
        struct Empty;
        impl MellinSource for Empty {
            fn support(&self) -> (f64, f64) {
                (1.0, 1.0)
            }
            fn eval(&self, _: f64) -> f64 {
                1.0
            }
        }
        assert_eq!(mellin_numeric(&Empty, Complex64::new(0.0, 3.0)).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn bump_values() {
        assert_eq!(w_bump(1.0), 0.0);
        assert_eq!(w_bump(2.0), 0.0);
        assert!((w_bump(1.5) - (-4f64).exp()).abs() < 1e-17);
        assert!((w_bump(1.5) - 0.018_315_6).abs() < 1e-7);
        let w = SmoothWeight::bump();
        assert!(w.hat_one() > 0.0);
        assert!((w_hat(Complex64::new(1.0, 0.0)).unwrap().re - w.hat_one()).abs() < 1e-15);
        assert!(SmoothWeight::custom((0.5, 2.0), |_| 1.0).is_err());
    }

    #[test]
    fn weight_transform_decays() {
        // t^5 |Ŵ(σ+it)| has turned over by the top of the tested range
        let w = SmoothWeight::bump();
        for &sigma in &[0.0, 1.0, 2.0] {
            let scaled = |t: f64| w.hat(Complex64::new(sigma, t)).unwrap().norm() * t.powi(5);
            let window_max = |a: f64| (0..=10).map(|k| scaled(a + k as f64)).fold(0.0, f64::max);
            assert!(window_max(90.0) < window_max(70.0), "sigma={sigma}");
            assert!(scaled(100.0).is_finite());
        }
    }

    #[test]
    fn plancherel_sinc() {
        let (lhs, rhs) = plancherel_check(&TestFunction::sinc_squared()).unwrap();
        assert!((lhs - 1.0 / 3.0).abs() < 1e-6);
        assert!((rhs - 1.0 / 3.0).abs() < 1e-12);
        let (l2, r2) = plancherel_check(&TestFunction::sinc_squared().scaled(3.0)).unwrap();
        assert!((l2 - 9.0 * lhs).abs() < 1e-9 && (r2 - 9.0 * rhs).abs() < 1e-12);
    }

    #[test]
    fn plancherel_custom_bump() {
        let delta = 0.5;
        let g = move |x: f64| {
            let u = x.ln() / delta;
            if u.abs() < 1.0 {
                (-1.0 / (1.0 - u * u)).exp()
            } else {
                0.0
            }
        };
        let f = TestFunction::custom(
            ((-delta).exp(), delta.exp()),
            g,
            Decay {
                exponent: 3.0,
                constant: 150.0,
            },
            vec![],
        )
        .unwrap();
        let (lhs, rhs) = plancherel_check(&f).unwrap();
        assert!((lhs - rhs).abs() < 1e-6, "{lhs} {rhs}");
        assert!((rhs - 0.066_543_060_422_497_1).abs() < 1e-9);
    }

    #[test]
    fn plancherel_rejects_slow_decay() {
        let f = TestFunction::custom(
            (0.5, 2.0),
            |_| 1.0,
            Decay {
                exponent: 1.0,
                constant: 1.0,
            },
            vec![],
        )
        .unwrap();
        assert!(plancherel_check(&f).is_err());
        assert!(TestFunction::custom((0.0, 2.0), |_| 1.0, f.decay(), vec![]).is_err());
    }

    #[test]
    fn sinc_fourth_power_integral() {
        let (v, tail) = sinc4_integral(1e4).unwrap();
        assert!((v - 2.0 * PI / 3.0).abs() < 1e-8 + tail);
    }
}
