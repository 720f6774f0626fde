//! Euler products A₀, K(s), g(s) with prime-zeta tail corrections, the local products
//! B_s(m), R_s(m), the φ-sum identity and the Özlük proportion.
//!
//! A truncated product ∏_{p≤P} f_p is completed by expanding log f_p as a series of
//! monomials c·p^{−E}. Monomials with Re E < [`EXACT_BELOW`] are summed over p > P exactly
//! through the prime zeta function; the rest are bounded by ∫_P^∞ x^{−Re E} dx.

use std::fmt;

use num_complex::Complex64;

use crate::arith::{factorize, gcd, prime_sieve, totient, totient_sieve};
use crate::error::{Error, Result};
use crate::lfun::zeta;
use crate::special::Neumaier;
use crate::testfn::SmoothWeight;

/// Monomials p^{−E} with Re E below this are summed exactly over the tail primes.
pub const EXACT_BELOW: f64 = 6.0;
/// Primes up to at least this are multiplied in directly before the series takes over.
pub const SERIES_START: u64 = 1000;
/// Series order in y = 1/p.
const ORDER: usize = 24;
const MAX_J: usize = 2 * ORDER;

/// ζ(2)ζ(3)/ζ(6), the mean value of n/φ(n).
pub const MEAN_N_OVER_PHI: f64 = 1.943_596_436_820_759_2;

/// Which Euler product to evaluate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProductSpec {
    /// ∏ (1 − p⁻² − p⁻³)
    A0,
    /// ∏ (1 + 1/((p − 1)p^{s+1}))
    K(Complex64),
    /// ∏ (1 − 1/((p−1)p^s) + 1/((p−1)p^{2s}) − 1/p^{2s+1})
    G(Complex64),
    /// ∏ (1 + 1/((p−1)p^{2−s}) − 1/((p−1)p^{3−2s})), the factor K(−s)/ζ(2−s)
    KReflection(Complex64),
}

impl fmt::Display for ProductSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::A0 => write!(f, "A0"),
            Self::K(s) => write!(f, "K({s})"),
            Self::G(s) => write!(f, "g({s})"),
            Self::KReflection(s) => write!(f, "K_refl({s})"),
        }
    }
}

type Poly = Vec<[f64; MAX_J + 1]>;

fn poly_zero() -> Poly {
    vec![[0.0; MAX_J + 1]; ORDER + 1]
}

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = poly_zero();
    for i1 in 0..=ORDER {
        for j1 in 0..=MAX_J {
            let c1 = a[i1][j1];
            if c1 == 0.0 {
                continue;
            }
            for i2 in 0..=ORDER - i1 {
                for j2 in 0..=MAX_J - j1 {
                    let c2 = b[i2][j2];
                    if c2 != 0.0 {
                        out[i1 + i2][j1 + j2] += c1 * c2;
                    }
                }
            }
        }
    }
    out
}

impl ProductSpec {
    /// Exponent σ with u = p^{−σ} in the factor's series.
    fn sigma(&self) -> Complex64 {
        match *self {
            Self::A0 => Complex64::new(0.0, 0.0),
            Self::K(s) | Self::G(s) => s,
            Self::KReflection(s) => -s,
        }
    }

    fn check_region(&self) -> Result<()> {
        let (ok, what, value, limit) = match *self {
            Self::A0 => (true, "", 0.0, 0.0),
            Self::K(s) => (s.re > -1.0, "Re s for K(s) (must exceed)", s.re, -1.0),
            Self::G(s) => (s.re > 0.0, "Re s for g(s) (must exceed)", s.re, 0.0),
            Self::KReflection(s) => (s.re < 1.0, "Re s for K(-s)/zeta(2-s)", s.re, 1.0),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::OutOfRange { what, value, limit })
        }
    }

    /// f_p evaluated directly.
    pub fn factor(&self, p: u64) -> Complex64 {
        let pf = p as f64;
        let lp = pf.ln();
        let pow = |e: Complex64| (-e * lp).exp();
        let one = Complex64::new(1.0, 0.0);
        match *self {
            Self::A0 => one * (1.0 - 1.0 / (pf * pf) - 1.0 / (pf * pf * pf)),
            Self::K(s) => one + pow(s + 1.0) / (pf - 1.0),
            Self::G(s) => {
                let u = pow(s);
                one - u / (pf - 1.0) + u * u / (pf - 1.0) - u * u / pf
            }
            Self::KReflection(s) => {
                one + pow(2.0 - s) / (pf - 1.0) - pow(3.0 - 2.0 * s) / (pf - 1.0)
            }
        }
    }

    /// Coefficients of V = f_p − 1 in y = 1/p and u = p^{−σ}.
    fn v_series(&self) -> Poly {
        let mut v = poly_zero();
        match self {
            Self::A0 => {
                v[2][0] = -1.0;
                v[3][0] = -1.0;
            }
            Self::K(_) => {
                for row in v.iter_mut().skip(2) {
                    row[1] = 1.0;
                }
            }
            Self::G(_) => {
                for (i, row) in v.iter_mut().enumerate().skip(1) {
                    row[1] = -1.0;
                    if i >= 2 {
                        row[2] = 1.0;
                    }
                }
            }
            Self::KReflection(_) => {
                for (i, row) in v.iter_mut().enumerate().skip(3) {
                    row[1] = 1.0;
                    if i >= 4 {
                        row[2] = -1.0;
                    }
                }
            }
        }
        v
    }

    /// log(1 + V) truncated at order [`ORDER`] in y.
    fn log_series(&self) -> Poly {
        let v = self.v_series();
        let mut out = poly_zero();
        let mut pw = v.clone();
        for m in 1..=ORDER {
            let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
            for i in 0..=ORDER {
                for j in 0..=MAX_J {
                    out[i][j] += sign * pw[i][j] / m as f64;
                }
            }
            pw = poly_mul(&pw, &v);
        }
        out
    }
}

/// A completed Euler product.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerProductValue {
    pub spec: ProductSpec,
    pub truncation_prime: u64,
    /// ∏_{p ≤ P} f_p.
    pub truncated: Complex64,
    /// The truncated product times the series estimate of ∏_{p > P} f_p.
    pub value: Complex64,
    /// Bound on |log(full product) − log(value)|.
    pub tail_bound: f64,
}

impl EulerProductValue {
    pub fn real(&self) -> f64 {
        self.value.re
    }
}

fn ln_1p(z: Complex64) -> Complex64 {
    if z.norm() < 1e-4 {
        let z2 = z * z;
        z - z2 * 0.5 + z2 * z / 3.0 - z2 * z2 * 0.25
    } else {
        (1.0 + z).ln()
    }
}

fn reduce_im(z: Complex64) -> Complex64 {
    use std::f64::consts::{PI, TAU};
    let mut im = z.im.rem_euclid(TAU);
    if im > PI {
        im -= TAU;
    }
    Complex64::new(z.re, im)
}

/// Σ_{p > P} p^{−E} for Re E > 1, via Σ_k μ(k)/k · log ζ_P(kE) with ζ_P the zeta
/// function stripped of its Euler factors at p ≤ P. Returns the value and a rounding bound.
pub fn prime_zeta_tail(e: Complex64, primes: &[u64], p_max: u64) -> Result<(Complex64, f64)> {
    if !(e.re > 1.0) {
        return Err(Error::OutOfRange {
            what: "Re E for prime zeta (must exceed)",
            value: e.re,
            limit: 1.0,
        });
    }
    let logs: Vec<f64> = primes.iter().map(|&p| (p as f64).ln()).collect();
    let pm = p_max.max(1) as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    for k in 1u64.. {
        let x = e * k as f64;
        let mu = crate::arith::moebius(k);
        // |log ζ_P(x)| ≤ 2 P^{1 − Re x}/(Re x − 1)
        let size = 2.0 * pm.powf(1.0 - x.re) / (x.re - 1.0);
        if size < 1e-22 && k > 1 {
            break;
        }
        if k > 200 {
            break;
        }
        if mu == 0 {
            continue;
        }
        let (mut re, mut im) = (Neumaier::default(), Neumaier::default());
        let mut mag = 0.0;
        let lz = zeta(x)?.ln();
        re.add(lz.re);
        im.add(lz.im);
        mag += lz.norm();
        for &l in logs.iter().rev() {
            let t = ln_1p(-(-x * l).exp());
            re.add(t.re);
            im.add(t.im);
            mag += t.norm();
        }
        let lzp = reduce_im(Complex64::new(re.value(), im.value()));
        acc += lzp * (mu as f64 / k as f64);
        err += 8.0 * f64::EPSILON * mag / k as f64;
    }
    Ok((acc, err))
}

/// Truncate the product at P and complete it with the prime-zeta tail series.
pub fn euler_product(spec: ProductSpec, truncation_prime: u64) -> Result<EulerProductValue> {
    spec.check_region()?;
    let split = truncation_prime.max(SERIES_START);
    let primes = prime_sieve(split as usize);

    let (mut re, mut im) = (Neumaier::default(), Neumaier::default());
    let mut mag = 0.0f64;
    let mut truncated_log = Complex64::new(0.0, 0.0);
    for &p in &primes {
        if p > truncation_prime && truncated_log == Complex64::new(0.0, 0.0) {
            truncated_log = Complex64::new(re.value(), im.value());
        }
        let f = spec.factor(p);
        if f.norm() < 1e-300 {
            return Err(Error::VanishingFactor { prime: p });
        }
        let l = ln_1p(f - 1.0);
        re.add(l.re);
        im.add(l.im);
        mag = mag.max(l.norm());
    }
    let direct_log = Complex64::new(re.value(), im.value());
    if primes.last().map_or(true, |&p| p <= truncation_prime) {
        truncated_log = direct_log;
    }
    let mut tail_bound = 4.0 * f64::EPSILON * primes.len() as f64 * mag;

    let sigma = spec.sigma();
    let series = spec.log_series();
    let mut tail = Complex64::new(0.0, 0.0);
    let sf = split as f64;
    for (i, row) in series.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let e = sigma * j as f64 + i as f64;
            if e.re < EXACT_BELOW {
                let (t, err) = prime_zeta_tail(e, &primes, split)?;
                tail += t * c;
                tail_bound += c.abs() * err;
            } else {
                tail_bound += c.abs() * sf.powf(1.0 - e.re) / (e.re - 1.0);
            }
        }
    }
    // monomials beyond the series order: |y^i u^j| ≤ p^{−i/2} in every supported region
    tail_bound += 4.0 * sf.powf(1.0 - 0.5 * (ORDER + 1) as f64);

    Ok(EulerProductValue {
        spec,
        truncation_prime,
        truncated: truncated_log.exp(),
        value: (direct_log + tail).exp(),
        tail_bound,
    })
}

/// A = Ŵ(1)·A₀; the ratio A/Ŵ(1) reproduces A₀ to rounding.
pub fn constant_a(w: &SmoothWeight, truncation_prime: u64) -> Result<(f64, EulerProductValue)> {
    let a0 = euler_product(ProductSpec::A0, truncation_prime)?;
    let hat = w.hat_one();
    let a = hat * a0.real();
    if hat != 0.0 {
        let back = a / hat;
        let tol = 4.0 * f64::EPSILON * a0.real().abs();
        if (back - a0.real()).abs() > tol {
            return Err(Error::Inconsistent {
                what: "A / W^(1) vs A0",
                lhs: back,
                rhs: a0.real(),
                tol,
            });
        }
    }
    Ok((a, a0))
}

/// B_s(m) = ∏_{p|m}(1 − p^{−s−1}) and R_s(m) = ∏_{p|m}(1 + 1/((p−1)p^{s+1}))⁻¹.
pub fn bsm_rsm(s: Complex64, m: u64) -> Result<(Complex64, Complex64)> {
    if m == 0 {
        return Err(Error::InvalidConfig("m must be positive".into()));
    }
    let one = Complex64::new(1.0, 0.0);
    let (mut b, mut r) = (one, one);
    for (p, _) in factorize(m) {
        let pf = p as f64;
        let ps = (-(s + 1.0) * pf.ln()).exp();
        b *= one - ps;
        let den = one + ps / (pf - 1.0);
        if den.norm() < 1e-12 {
            return Err(Error::VanishingFactor { prime: p });
        }
        r /= den;
    }
    Ok((b, r))
}

/// Truncated Σ_{d ≤ N, (d,m)=1} 1/(φ(ad) d^s) against (1/φ(a)) ζ(1+s) K(s) B_s(m) R_s(a) R_s(m).
pub fn sum_varphi_identity_check(a: u64, m: u64, s: Complex64, n: u64) -> Result<(Complex64, Complex64)> {
    if a == 0 || m == 0 {
        return Err(Error::InvalidConfig("a and m must be positive".into()));
    }
    let g = gcd(a, m);
    if g != 1 {
        return Err(Error::NotCoprime { a, b: m, gcd: g });
    }
    if !(s.re > 0.0) {
        return Err(Error::OutOfRange {
            what: "Re s (must exceed)",
            value: s.re,
            limit: 0.0,
        });
    }
    let phi = totient_sieve(n as usize);
    let phi_a = totient(a) as f64;
    let (mut re, mut im) = (Neumaier::default(), Neumaier::default());
    for d in (1..=n).rev() {
        if gcd(d, m) != 1 {
            continue;
        }
        // φ(ad) = φ(a)φ(d)·g/φ(g) with g = gcd(a, d)
        let gd = gcd(a, d);
        let phi_ad = phi_a * phi[d as usize] as f64 * gd as f64 / totient(gd) as f64;
        let t = (-s * (d as f64).ln()).exp() / phi_ad;
        re.add(t.re);
        im.add(t.im);
    }
    let lhs = Complex64::new(re.value(), im.value());

    let k = euler_product(ProductSpec::K(s), 1_000_000)?.value;
    let (b_m, r_m) = bsm_rsm(s, m)?;
    let (_, r_a) = bsm_rsm(s, a)?;
    let rhs = zeta(s + 1.0)? * k * b_m * r_a * r_m / phi_a;
    Ok((lhs, rhs))
}

/// K(−s) as a direct product against ζ(2 − s)·∏(1 + 1/((ℓ−1)ℓ^{2−s}) − 1/((ℓ−1)ℓ^{3−2s})).
pub fn k_reflection_check(s: Complex64, truncation_prime: u64) -> Result<(Complex64, Complex64)> {
    let lhs = euler_product(ProductSpec::K(-s), truncation_prime)?.value;
    let rest = euler_product(ProductSpec::KReflection(s), truncation_prime)?.value;
    let rhs = zeta(Complex64::new(2.0, 0.0) - s)? * rest;
    Ok((lhs, rhs))
}

/// Σ_{d ≤ D} 1/(dφ(d)) plus the tail estimate c/D, with c the mean of d/φ(d).
#[derive(Debug, Clone, PartialEq)]
pub struct DivisorSeries {
    pub cutoff: u64,
    pub partial: f64,
    pub value: f64,
    /// Bound on |series − value|.
    pub tail_bound: f64,
}

pub fn inverse_d_phi_series(cutoff: u64) -> Result<DivisorSeries> {
    if cutoff == 0 {
        return Err(Error::InvalidConfig("cutoff must be positive".into()));
    }
    let phi = totient_sieve(cutoff as usize);
    let mut acc = Neumaier::default();
    for d in (1..=cutoff as usize).rev() {
        acc.add(1.0 / (d as f64 * phi[d] as f64));
    }
    let partial = acc.value();
    let df = cutoff as f64;
    Ok(DivisorSeries {
        cutoff,
        partial,
        value: partial + MEAN_N_OVER_PHI / df,
        tail_bound: 2.0 * (df.ln() + 1.0) / (df * df),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OzlukConstant {
    pub value: f64,
    /// Propagated bound from the series tail and the A₀ tail.
    pub error_bound: f64,
    pub series: DivisorSeries,
    pub a0: EulerProductValue,
}

/// (11/12)·(Σ_d 1/(dφ(d)))⁻¹·A₀⁻¹ with the series cut at D = 10⁷ and A₀ at P = 10⁶.
pub fn ozluk_constant() -> Result<OzlukConstant> {
    ozluk_constant_with(10_000_000, 1_000_000)
}

pub fn ozluk_constant_with(cutoff: u64, truncation_prime: u64) -> Result<OzlukConstant> {
    let series = inverse_d_phi_series(cutoff)?;
    let a0 = euler_product(ProductSpec::A0, truncation_prime)?;
    let value = 11.0 / 12.0 / (series.value * a0.real());
    let rel = series.tail_bound / series.value + a0.tail_bound;
    Ok(OzlukConstant {
        value,
        error_bound: value * rel,
        series,
        a0,
    })
}
