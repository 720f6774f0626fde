//! Prime sums, zero sums and the explicit formula; the family statistics N_Φ and F_Φ;
//! the S = S_D + S_N decomposition; the pair-correlation prediction and the BDH variance.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{gcd, totient, ArithmeticTables};
use crate::characters::{character_group, DeltaContext, DirichletCharacter};
use crate::constants::constant_a;
use crate::error::{Error, Result};
use crate::lfun::{find_zeros, lfunction_data, LFunctionData, ZeroFamily, ZeroScan};
use crate::quad::{integrate, Tolerance};
use crate::special::{digamma, pairwise_sum, Neumaier};
use crate::testfn::{Decay, MellinSource, SmoothWeight, TestFunction};

/// Largest sieve the prime sums will build.
pub const SIEVE_LIMIT: u64 = 50_000_000;
/// Grid step used when a statistic has to compute its own zeros.
pub const DEFAULT_GRID_STEP: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatKind {
    NPhi,
    FPhi,
    STotal,
    SDiag,
    SOffdiag,
    MBdh,
    Prediction,
}

impl fmt::Display for StatKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::NPhi => "N_phi",
            Self::FPhi => "F_phi",
            Self::STotal => "S_total",
            Self::SDiag => "S_diag",
            Self::SOffdiag => "S_offdiag",
            Self::MBdh => "M_bdh",
            Self::Prediction => "prediction",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfigSnapshot {
    pub scale: f64,
    pub alpha: f64,
    pub t_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatResult {
    pub kind: StatKind,
    pub value: f64,
    pub config: ConfigSnapshot,
    /// Estimated absolute truncation error.
    pub truncation_budget: f64,
    /// Half-width of an uncertainty band for predictions, when one is reported.
    pub band: Option<f64>,
}

impl StatResult {
    fn new(kind: StatKind, value: f64, config: ConfigSnapshot, budget: f64) -> Self {
        Self {
            kind,
            value,
            config,
            truncation_budget: budget,
            band: None,
        }
    }
}

/// Family-statistic configuration; X = Q^α.
#[derive(Debug, Clone)]
pub struct PairCorrConfig {
    pub scale: f64,
    pub alpha: f64,
    pub t_max: f64,
    pub weight: SmoothWeight,
    pub phi: TestFunction,
    /// U/L cut parameter C for verification runs.
    pub cut: Option<f64>,
}

impl PairCorrConfig {
    pub fn new(scale: f64, alpha: f64, t_max: f64) -> Result<Self> {
        let cfg = Self {
            scale,
            alpha,
            t_max,
            weight: SmoothWeight::bump(),
            phi: TestFunction::sinc_squared(),
            cut: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_alpha(&self, alpha: f64) -> Self {
        Self {
            alpha,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha.abs() > 2.0 {
            return Err(Error::OutOfRange {
                what: "|alpha|",
                value: self.alpha.abs(),
                limit: 2.0,
            });
        }
        if !(self.scale > 1.0) {
            return Err(Error::InvalidConfig(format!("scale Q = {} must exceed 1", self.scale)));
        }
        if !(self.t_max > 0.0) {
            return Err(Error::InvalidConfig(format!("T_max = {} must be positive", self.t_max)));
        }
        Ok(())
    }

    pub fn x(&self) -> f64 {
        self.scale.powf(self.alpha)
    }

    fn snapshot(&self) -> ConfigSnapshot {
        ConfigSnapshot {
            scale: self.scale,
            alpha: self.alpha,
            t_max: self.t_max,
        }
    }
}

/// f(α) = min(|α|, 1).
pub fn f_alpha(alpha: f64) -> f64 {
    alpha.abs().min(1.0)
}

fn check_sieve(limit: f64) -> Result<()> {
    if limit > SIEVE_LIMIT as f64 {
        return Err(Error::OutOfRange {
            what: "sieve limit",
            value: limit,
            limit: SIEVE_LIMIT as f64,
        });
    }
    Ok(())
}

/// Sieve large enough for prime sums at X with this test function.
pub fn tables_for(x: f64, phi: &TestFunction) -> Result<ArithmeticTables> {
    let top = (x * phi.support().1).ceil().max(2.0);
    check_sieve(top)?;
    ArithmeticTables::build(top as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrimeSumKind {
    /// Σ_n Λ(n)χ(n)Φ(n/X)/√n over all prime powers.
    Full,
    /// Σ_p log p χ(p)Φ(p/X)/√p over primes only.
    PrimeOnly,
}

/// Σ Λ(n)χ(n)Φ(n/X)/√n, optionally restricted to primes.
pub fn prime_sum(
    chi: &DirichletCharacter,
    x: f64,
    phi: &TestFunction,
    tables: &ArithmeticTables,
    kind: PrimeSumKind,
) -> Result<Complex64> {
    let (a, b) = phi.support();
    let hi = (b * x).floor() as u64;
    check_sieve(b * x)?;
    if hi > tables.limit() {
        return Err(Error::OutOfRange {
            what: "X*b beyond sieve",
            value: b * x,
            limit: tables.limit() as f64,
        });
    }
    let lo = (a * x).floor() as u64 + 1;
    let lam = tables.mangoldt_table();
    let (mut re, mut im) = (Neumaier::default(), Neumaier::default());
    for n in lo.max(2)..=hi {
        let l = lam[n as usize];
        if l == 0.0 {
            continue;
        }
        if kind == PrimeSumKind::PrimeOnly && !tables.is_prime(n)? {
            continue;
        }
        let w = phi.phi(n as f64 / x);
        if w == 0.0 {
            continue;
        }
        let v = chi.value(n) * (l * w / (n as f64).sqrt());
        re.add(v.re);
        im.add(v.im);
    }
    Ok(Complex64::new(re.value(), im.value()))
}

/// Σ Λ(n)χ̄(n)Φ(1/(nX))/√n.
pub fn dual_prime_sum(chi: &DirichletCharacter, x: f64, phi: &TestFunction) -> Result<Complex64> {
    let (a, _) = phi.support();
    let hi = (1.0 / (a * x)).floor();
    if hi < 2.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let tables = ArithmeticTables::build(hi as u64)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for n in 2..=hi as u64 {
        let l = tables.mangoldt(n)?;
        if l == 0.0 {
            continue;
        }
        let w = phi.phi(1.0 / (n as f64 * x));
        acc += chi.value(n).conj() * (l * w / (n as f64).sqrt());
    }
    Ok(acc)
}

/// Tail of Σ_{|γ|>T} |Φ̂(iγ)|^m for |Φ̂(ix)| ≤ C|x|^{−β}: C^m · 2 log(qT)/((mβ − 1) T^{mβ−1}).
pub fn zero_tail_bound(q: u64, t_max: f64, decay: Decay, power: u32) -> f64 {
    let e = power as f64 * decay.exponent;
    let c = decay.constant.powi(power as i32);
    if e <= 1.0 {
        return f64::INFINITY;
    }
    c * 2.0 * (q as f64 * t_max).max(std::f64::consts::E).ln() / ((e - 1.0) * t_max.powf(e - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroSum {
    pub value: Complex64,
    pub tail: f64,
    pub terms: usize,
}

/// Σ_{|γ| ≤ T} Φ̂(iγ) X^{iγ} with multiplicities, plus the tail estimate.
pub fn zero_sum(q: u64, scan: &ZeroScan, x: f64, phi: &TestFunction, t_max: f64) -> Result<ZeroSum> {
    if !scan.complete || scan.height < t_max {
        return Err(Error::IncompleteZeros {
            modulus: q,
            index: usize::MAX,
            height: t_max,
        });
    }
    let lx = x.ln();
    let mut re = Neumaier::default();
    let mut im = Neumaier::default();
    let mut terms = 0;
    for z in &scan.zeros {
        if z.ordinate.abs() > t_max {
            continue;
        }
        let v = phi.phi_hat_i(z.ordinate) * Complex64::from_polar(z.multiplicity as f64, z.ordinate * lx);
        re.add(v.re);
        im.add(v.im);
        terms += 1;
    }
    Ok(ZeroSum {
        value: Complex64::new(re.value(), im.value()),
        tail: zero_tail_bound(q, t_max, phi.decay(), 1),
        terms,
    })
}

/// The Γ-factor contribution (1/2π)∫ Φ̂(½+ir)X^{½+ir}... written on the Φ side:
/// g(0)ψ(a) + ½∫₀^∞ e^{−at}/(1 − e^{−t}) [2g(0) − g(t/2) − g(−t/2)] dt,
/// with g(u) = Φ(e^u/X) and a = ¼ + κ/2.
pub fn archimedean_term(x: f64, parity: u32, phi: &TestFunction) -> Result<f64> {
    let a = 0.25 + 0.5 * parity as f64;
    let lx = x.ln();
    let g = |u: f64| phi.phi((u - lx).exp());
    let g0 = g(0.0);
    let (sa, sb) = phi.support();
    // g(±t/2) vanish once t/2 exceeds max |log X + log support endpoint|
    let t0 = 2.0 * (lx + sa.ln()).abs().max((lx + sb.ln()).abs());
    let mut breaks: Vec<f64> = phi
        .log_breaks()
        .into_iter()
        .chain([sa.ln(), sb.ln()])
        .map(|b| 2.0 * (lx + b).abs())
        .filter(|&t| t > 0.0 && t < t0)
        .collect();
    breaks.sort_by(f64::total_cmp);
    let body = integrate(
        |t: f64| {
            let den = -(-t).exp_m1();
            (-a * t).exp() / den * (2.0 * g0 - g(0.5 * t) - g(-0.5 * t))
        },
        0.0,
        t0,
        &breaks,
        Tolerance::absolute(1e-11),
    )?;
    // beyond t0 only 2g(0) survives: ½·2g(0)∫_{t0}^∞ e^{−at}/(1−e^{−t}) dt = g(0)Σ_k e^{−(a+k)t0}/(a+k)
    let mut tail = 0.0;
    if g0 != 0.0 {
        for k in 0..10_000 {
            let ak = a + k as f64;
            let term = (-ak * t0).exp() / ak;
            tail += term;
            if term < 1e-18 {
                break;
            }
        }
    }
    Ok(g0 * digamma(a) + 0.5 * body.value + g0 * tail)
}

/// All terms of the explicit formula for one primitive character at one X.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitFormula {
    pub modulus: u64,
    pub x: f64,
    pub t_max: f64,
    pub zero_sum: Complex64,
    pub zero_tail: f64,
    /// E(χ)Φ̂(½)X^{½}
    pub polar: Complex64,
    /// E(χ)Φ̂(−½)X^{−½}, from the pole at s = 0 of the dual side
    pub polar_dual: Complex64,
    pub prime_sum: Complex64,
    pub dual_prime_sum: Complex64,
    /// Φ(1/X) log(q/π)
    pub conductor_term: f64,
    pub archimedean: f64,
    /// zero side minus (polar − prime sum + conductor term)
    pub displayed_difference: Complex64,
    /// zero side minus the complete right side
    pub complete_difference: Complex64,
}

impl ExplicitFormula {
    /// |LHS − RHS| with the three displayed right-side terms.
    pub fn residual(&self) -> f64 {
        self.displayed_difference.norm()
    }

    /// |LHS − RHS| with the dual polar term, the dual prime sum and the Γ-factor term added.
    pub fn complete_residual(&self) -> f64 {
        self.complete_difference.norm()
    }
}

/// Assemble the explicit formula from a zero scan.
pub fn explicit_formula(
    data: &LFunctionData,
    scan: &ZeroScan,
    x: f64,
    phi: &TestFunction,
    t_max: f64,
) -> Result<ExplicitFormula> {
    if !(x >= 1.0) {
        return Err(Error::OutOfRange {
            what: "X (must be at least)",
            value: x,
            limit: 1.0,
        });
    }
    let chi = &data.character;
    let q = chi.modulus();
    let zs = zero_sum(q, scan, x, phi, t_max)?;
    let (polar, polar_dual) = if chi.is_principal() {
        (
            phi.phi_hat(Complex64::new(0.5, 0.0))? * x.sqrt(),
            phi.phi_hat(Complex64::new(-0.5, 0.0))? / x.sqrt(),
        )
    } else {
        (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
    };
    let tables = tables_for(x, phi)?;
    let prime = prime_sum(chi, x, phi, &tables, PrimeSumKind::Full)?;
    let dual = dual_prime_sum(chi, x, phi)?;
    let conductor_term = phi.phi(1.0 / x) * (q as f64 / PI).ln();
    let arch = archimedean_term(x, data.parity, phi)?;
    let displayed = polar - prime + conductor_term;
    let complete = displayed + polar_dual - dual + arch;
    Ok(ExplicitFormula {
        modulus: q,
        x,
        t_max,
        zero_sum: zs.value,
        zero_tail: zs.tail,
        polar,
        polar_dual,
        prime_sum: prime,
        dual_prime_sum: dual,
        conductor_term,
        archimedean: arch,
        displayed_difference: zs.value - displayed,
        complete_difference: zs.value - complete,
    })
}

/// Explicit-formula residual inside the accuracy envelope q ≤ 20, 1 ≤ X ≤ 10³, T ≥ 500.
pub fn explicit_formula_residual(
    chi: &DirichletCharacter,
    x: f64,
    phi: &TestFunction,
    t_max: f64,
) -> Result<ExplicitFormula> {
    let q = chi.modulus();
    if q > 20 {
        return Err(Error::OutOfRange {
            what: "q in explicit-formula envelope",
            value: q as f64,
            limit: 20.0,
        });
    }
    if x > 1e3 {
        return Err(Error::OutOfRange {
            what: "X in explicit-formula envelope",
            value: x,
            limit: 1e3,
        });
    }
    if t_max < 500.0 {
        return Err(Error::OutOfRange {
            what: "T_max in explicit-formula envelope (at least)",
            value: t_max,
            limit: 500.0,
        });
    }
    let data = lfunction_data(chi)?;
    let scan = find_zeros(&data, t_max, DEFAULT_GRID_STEP)?;
    explicit_formula(&data, &scan, x, phi, t_max)
}

/// One primitive character of the family with its weight W(q/Q)/φ(q) and the pairs
/// (γ, m·Φ̂(iγ)) for |γ| ≤ T_max.
#[derive(Debug, Clone)]
pub struct WeightedCharacter {
    pub modulus: u64,
    pub weight: f64,
    pub ordinates: Vec<f64>,
    pub coefficients: Vec<Complex64>,
    pub multiplicities: Vec<u32>,
}

/// Family zeros prepared for the pair-correlation sums.
#[derive(Debug, Clone)]
pub struct WeightedFamily {
    pub scale: f64,
    pub t_max: f64,
    pub decay: Decay,
    pub characters: Vec<WeightedCharacter>,
}

impl WeightedFamily {
    pub fn new(family: &ZeroFamily, cfg: &PairCorrConfig) -> Result<Self> {
        if (family.scale - cfg.scale).abs() > 1e-12 * cfg.scale {
            return Err(Error::InvalidConfig(format!(
                "zero family at Q = {} used for Q = {}",
                family.scale, cfg.scale
            )));
        }
        family.require_complete(cfg.t_max)?;
        let mut characters = Vec::new();
        for m in &family.moduli {
            let wq = cfg.weight.w(m.modulus as f64 / cfg.scale);
            if wq == 0.0 {
                continue;
            }
            let weight = wq / totient(m.modulus) as f64;
            for c in &m.characters {
                let mut ordinates = Vec::new();
                let mut coefficients = Vec::new();
                let mut multiplicities = Vec::new();
                for z in &c.scan.zeros {
                    if z.ordinate.abs() <= cfg.t_max {
                        ordinates.push(z.ordinate);
                        coefficients.push(cfg.phi.phi_hat_i(z.ordinate) * z.multiplicity as f64);
                        multiplicities.push(z.multiplicity);
                    }
                }
                characters.push(WeightedCharacter {
                    modulus: m.modulus,
                    weight,
                    ordinates,
                    coefficients,
                    multiplicities,
                });
            }
        }
        Ok(Self {
            scale: cfg.scale,
            t_max: cfg.t_max,
            decay: cfg.phi.decay(),
            characters,
        })
    }

    /// Σ_γ m Φ̂(iγ) e^{iγ·β log Q} for one character.
    pub fn inner_sum(&self, c: &WeightedCharacter, beta: f64) -> Complex64 {
        let w = beta * self.scale.ln();
        let parts: Vec<Complex64> = c
            .ordinates
            .iter()
            .zip(&c.coefficients)
            .map(|(&g, &h)| h * Complex64::from_polar(1.0, g * w))
            .collect();
        crate::special::pairwise_sum_complex(&parts)
    }
}

/// N_Φ(Q) = Σ_q (W(q/Q)/φ(q)) Σ*_χ Σ_γ |Φ̂(iγ)|², truncated at T_max.
pub fn n_phi(cfg: &PairCorrConfig, family: &ZeroFamily) -> Result<StatResult> {
    cfg.validate()?;
    n_phi_weighted(cfg, &WeightedFamily::new(family, cfg)?)
}

pub fn n_phi_weighted(cfg: &PairCorrConfig, wf: &WeightedFamily) -> Result<StatResult> {
    let parts: Vec<(f64, f64)> = wf
        .characters
        .par_iter()
        .map(|c| {
            // |m Φ̂|²/m counts each zero m times with weight |Φ̂|²
            let terms: Vec<f64> = c
                .coefficients
                .iter()
                .zip(&c.multiplicities)
                .map(|(h, &m)| h.norm_sqr() / m as f64)
                .collect();
            let tail = zero_tail_bound(c.modulus, wf.t_max, wf.decay, 2);
            (c.weight * pairwise_sum(&terms), c.weight * tail)
        })
        .collect();
    let value = pairwise_sum(&parts.iter().map(|p| p.0).collect::<Vec<_>>());
    let budget = pairwise_sum(&parts.iter().map(|p| p.1).collect::<Vec<_>>());
    Ok(StatResult::new(StatKind::NPhi, value, cfg.snapshot(), budget))
}

/// F_Φ(Q^α; W) = N_Φ⁻¹ Σ_q (W(q/Q)/φ(q)) Σ*_χ |Σ_γ Φ̂(iγ)Q^{iγα}|².
pub fn f_phi(cfg: &PairCorrConfig, family: &ZeroFamily) -> Result<StatResult> {
    cfg.validate()?;
    let wf = WeightedFamily::new(family, cfg)?;
    let n = n_phi_weighted(cfg, &wf)?;
    f_phi_weighted(cfg, &wf, &n)
}

pub fn f_phi_weighted(cfg: &PairCorrConfig, wf: &WeightedFamily, n: &StatResult) -> Result<StatResult> {
    cfg.validate()?;
    if n.value <= 0.0 {
        return Ok(StatResult::new(StatKind::FPhi, 0.0, cfg.snapshot(), 0.0));
    }
    let parts: Vec<(f64, f64)> = wf
        .characters
        .par_iter()
        .map(|c| {
            let s = wf.inner_sum(c, cfg.alpha);
            let tau = zero_tail_bound(c.modulus, wf.t_max, wf.decay, 1);
            (c.weight * s.norm_sqr(), c.weight * (2.0 * s.norm() * tau + tau * tau))
        })
        .collect();
    let num = pairwise_sum(&parts.iter().map(|p| p.0).collect::<Vec<_>>());
    let num_budget = pairwise_sum(&parts.iter().map(|p| p.1).collect::<Vec<_>>());
    let value = num / n.value;
    let budget = num_budget / n.value + value * n.truncation_budget / n.value;
    Ok(StatResult::new(StatKind::FPhi, value, cfg.snapshot(), budget))
}

/// f(α) + Φ(Q^{−|α|})² log Q / ((1/2π)∫|Φ̂|²), with band Φ(Q^{−|α|})√(f(α) log Q).
pub fn pair_correlation_prediction(cfg: &PairCorrConfig) -> Result<StatResult> {
    cfg.validate()?;
    let f = f_alpha(cfg.alpha);
    let lq = cfg.scale.ln();
    let p = cfg.phi.phi(cfg.scale.powf(-cfg.alpha.abs()));
    let l2 = cfg.phi.l2_norm_sq()?;
    let value = if p == 0.0 { f } else { f + p * p * lq / l2 };
    let mut r = StatResult::new(StatKind::Prediction, value, cfg.snapshot(), 0.0);
    r.band = Some(p.abs() * (f * lq).sqrt());
    Ok(r)
}

/// (A/2π) Q log Q ∫|Φ̂(ix)|² dx = A·Q log Q·(1/2π)∫|Φ̂|².
pub fn n_phi_asymptotic(cfg: &PairCorrConfig) -> Result<f64> {
    let (a, _) = constant_a(&cfg.weight, 1_000_000)?;
    Ok(a * cfg.scale * cfg.scale.ln() * cfg.phi.l2_norm_sq()?)
}

/// S computed by both routes, and its diagonal/off-diagonal split.
#[derive(Debug, Clone, PartialEq)]
pub struct SDecomposition {
    pub total: StatResult,
    pub diag: StatResult,
    pub offdiag: StatResult,
    /// Route (i): Σ_q (W/φ) Σ*_χ |Σ_p a_p χ(p)|².
    pub character_route: f64,
    /// Route (ii): Σ_{p,r} a_p a_r Δ(p,r).
    pub delta_route: f64,
}

/// a_p = log p Φ(p/X)/√p for the primes in the support of Φ(·/X).
pub fn prime_coefficients(x: f64, phi: &TestFunction, tables: &ArithmeticTables) -> Vec<(u64, f64)> {
    let (a, b) = phi.support();
    tables
        .primes_in((a * x).floor() as u64, (b * x).floor() as u64)
        .iter()
        .filter_map(|&p| {
            let w = phi.phi(p as f64 / x);
            (w != 0.0).then(|| (p, (p as f64).ln() * w / (p as f64).sqrt()))
        })
        .collect()
}

/// S = Σ_{p,r} a_p a_r Δ(p,r) both by characters and by Δ; asserted equal to 10⁻⁶ relative.
pub fn s_decomposition(scale: f64, x: f64, weight: &SmoothWeight, phi: &TestFunction) -> Result<SDecomposition> {
    if !(scale > 1.0 && x > 1.0) {
        return Err(Error::InvalidConfig(format!("need Q > 1 and X > 1, got Q = {scale}, X = {x}")));
    }
    check_sieve(2.0 * scale)?;
    let tables = tables_for(x, phi)?;
    let coeffs = prime_coefficients(x, phi, &tables);
    let ctx = DeltaContext::new(scale, weight)?;

    // route (i)
    let moduli: Vec<(u64, f64)> = ctx.weighted_moduli().collect();
    let per_q: Vec<f64> = moduli
        .par_iter()
        .map(|&(q, w)| -> Result<f64> {
            let mut bucket = vec![0.0; q as usize];
            for &(p, ap) in &coeffs {
                if q % p != 0 {
                    bucket[(p % q) as usize] += ap;
                }
            }
            let hit: Vec<(u64, f64)> = bucket
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .map(|(r, &v)| (r as u64, v))
                .collect();
            let group = character_group(q)?;
            let mut acc = Neumaier::default();
            for chi in group.primitive() {
                let s: Complex64 = hit.iter().map(|&(r, v)| chi.value(r) * v).sum();
                acc.add(s.norm_sqr());
            }
            Ok(w * acc.value())
        })
        .collect::<Result<Vec<_>>>()?;
    let route_i = pairwise_sum(&per_q);

    // route (ii): p ≤ r, off-diagonal pairs doubled
    let rows: Vec<(f64, f64)> = (0..coeffs.len())
        .into_par_iter()
        .map(|i| {
            let (p, ap) = coeffs[i];
            let diag = ap * ap * ctx.delta(p, p);
            let mut off = Neumaier::default();
            for &(r, ar) in &coeffs[i + 1..] {
                off.add(2.0 * ap * ar * ctx.delta(p, r));
            }
            (diag, off.value())
        })
        .collect();
    let s_d = pairwise_sum(&rows.iter().map(|r| r.0).collect::<Vec<_>>());
    let s_n = pairwise_sum(&rows.iter().map(|r| r.1).collect::<Vec<_>>());
    let route_ii = s_d + s_n;

    let diff = (route_i - route_ii).abs();
    let tol = 1e-6 * route_i.abs().max(route_ii.abs()) + 1e-12;
    if diff > tol {
        return Err(Error::Inconsistent {
            what: "S by characters vs S by Delta",
            lhs: route_i,
            rhs: route_ii,
            tol,
        });
    }
    let snap = ConfigSnapshot {
        scale,
        alpha: x.ln() / scale.ln(),
        t_max: 0.0,
    };
    Ok(SDecomposition {
        total: StatResult::new(StatKind::STotal, route_ii, snap, diff),
        diag: StatResult::new(StatKind::SDiag, s_d, snap, 0.0),
        offdiag: StatResult::new(StatKind::SOffdiag, s_n, snap, diff),
        character_route: route_i,
        delta_route: route_ii,
    })
}

/// A·Q·log X·(1/2π)∫|Φ̂|², the diagonal main term.
pub fn s_diag_main_term(scale: f64, x: f64, weight: &SmoothWeight, phi: &TestFunction) -> Result<f64> {
    let (a, _) = constant_a(weight, 1_000_000)?;
    Ok(a * scale * x.ln() * phi.l2_norm_sq()?)
}

/// Σ_p log²p Φ²(p/X)/p.
pub fn prime_log_square_sum(x: f64, phi: &TestFunction, tables: &ArithmeticTables) -> f64 {
    let terms: Vec<f64> = prime_coefficients(x, phi, tables)
        .into_iter()
        .map(|(_, a)| a * a)
        .collect();
    pairwise_sum(&terms)
}

/// Σ_p log p Φ(p/X) B_{−s}(p) R_{−s}(p) / p^{½+z} against Φ̂(½ − z) X^{½−z}.
pub fn shifted_prime_sum(x: f64, z: Complex64, s: Complex64, phi: &TestFunction, tables: &ArithmeticTables) -> Result<(Complex64, Complex64)> {
    let (a, b) = phi.support();
    let mut acc = Complex64::new(0.0, 0.0);
    for &p in tables.primes_in((a * x).floor() as u64, (b * x).floor() as u64) {
        let w = phi.phi(p as f64 / x);
        if w == 0.0 {
            continue;
        }
        let (bp, rp) = crate::constants::bsm_rsm(-s, p)?;
        let lp = (p as f64).ln();
        acc += bp * rp * (lp * w) * (-(z + 0.5) * lp).exp();
    }
    let half = Complex64::new(0.5, 0.0);
    let rhs = phi.phi_hat(half - z)? * ((half - z) * x.ln()).exp();
    Ok((acc, rhs))
}

/// M(x, Q) = Σ_{q ≤ Q} Σ_{(a,q)=1} (ψ(x; q, a) − x/φ(q))².
pub fn bdh_variance(x: f64, q_max: u64) -> Result<StatResult> {
    if !(x >= 1.0) || q_max == 0 {
        return Err(Error::InvalidConfig(format!("need x ≥ 1 and Q ≥ 1, got x = {x}, Q = {q_max}")));
    }
    check_sieve(x)?;
    let tables = ArithmeticTables::build(x.floor().max(2.0) as u64)?;
    let lam = tables.mangoldt_table();
    let powers: Vec<(u64, f64)> = (2..=x.floor() as u64)
        .filter_map(|n| {
            let l = lam[n as usize];
            (l != 0.0).then_some((n, l))
        })
        .collect();
    let per_q: Vec<f64> = (1..=q_max)
        .into_par_iter()
        .map(|q| {
            let mut cells = vec![Neumaier::default(); q as usize];
            for &(n, l) in &powers {
                cells[(n % q) as usize].add(l);
            }
            let mean = x / totient(q) as f64;
            let mut acc = Neumaier::default();
            for a in 1..=q {
                if gcd(a, q) == 1 {
                    let d = cells[(a % q) as usize].value() - mean;
                    acc.add(d * d);
                }
            }
            acc.value()
        })
        .collect();
    let value = pairwise_sum(&per_q);
    Ok(StatResult::new(
        StatKind::MBdh,
        value,
        ConfigSnapshot {
            scale: q_max as f64,
            alpha: q_max as f64 / x,
            t_max: 0.0,
        },
        0.0,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lfun::scan_family;

    fn sinc() -> TestFunction {
        TestFunction::sinc_squared()
    }

    #[test]
    fn f_alpha_values() {
        assert_eq!(f_alpha(0.0), 0.0);
        assert_eq!(f_alpha(0.5), 0.5);
        assert_eq!(f_alpha(-0.5), 0.5);
        assert_eq!(f_alpha(1.5), 1.0);
    }

    #[test]
    fn empty_prime_sum() {
        let chi = DirichletCharacter::principal(1).unwrap();
        let t = tables_for(0.2, &sinc()).unwrap();
        // support below 2 for X < 2/e²
        let v = prime_sum(&chi, 0.2, &sinc(), &t, PrimeSumKind::Full).unwrap();
        assert_eq!(v, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn principal_prime_sum_main_term() {
        let x = 1e4;
        let phi = sinc();
        let tables = tables_for(x, &phi).unwrap();
        for q in [1u64, 3, 10, 12] {
            let chi = DirichletCharacter::principal(q).unwrap();
            let v = prime_sum(&chi, x, &phi, &tables, PrimeSumKind::Full).unwrap();
            let mut local = 0.0;
            for (p, _) in crate::arith::factorize(q) {
                let mut pk = p;
                while (pk as f64) < phi.support().1 * x {
                    local += (p as f64).ln() * phi.phi(pk as f64 / x) / (pk as f64).sqrt();
                    pk *= p;
                }
            }
            let main = phi.phi_hat(Complex64::new(0.5, 0.0)).unwrap().re * x.sqrt() - local;
            assert!((v.re / main - 1.0).abs() < 0.1, "q={q}: {} vs {main}", v.re);
        }
    }

    #[test]
    fn prime_powers_contribute_little() {
        let phi = sinc();
        for &x in &[1e2, 1e4, 1e6] {
            let tables = tables_for(x, &phi).unwrap();
            for q in [1u64, 5, 7, 16] {
                let g = character_group(q).unwrap();
                for chi in g.characters().iter().take(4) {
                    let full = prime_sum(chi, x, &phi, &tables, PrimeSumKind::Full).unwrap();
                    let primes = prime_sum(chi, x, &phi, &tables, PrimeSumKind::PrimeOnly).unwrap();
                    assert!((full - primes).norm() <= 5.0);
                }
            }
        }
    }

    #[test]
    fn log_square_sum_bounded() {
        let phi = sinc();
        for &x in &[1e3, 1e4, 1e5, 1e6] {
            let tables = tables_for(x, &phi).unwrap();
            let dev = prime_log_square_sum(x, &phi, &tables) - phi.l2_norm_sq().unwrap() * x.ln();
            assert!(dev.abs() <= 5.0, "X={x}: {dev}");
        }
    }

    #[test]
    fn shifted_prime_sum_main_term() {
        let phi = sinc();
        let x = 1e5;
        let tables = tables_for(x, &phi).unwrap();
        for z in [Complex64::new(0.0, 0.05), Complex64::new(0.0, -0.05)] {
            let (l, r) = shifted_prime_sum(x, z, Complex64::new(-0.1, 0.0), &phi, &tables).unwrap();
            assert!((l - r).norm() / r.norm() < 0.15, "{l} vs {r}");
        }
    }

    #[test]
    fn archimedean_matches_gamma_integral() {
        // (1/2π)∫ Φ̂(½+ir)... on the transform side: (1/2π)∫ h(r) Re ψ(a + ir/2) dr
        // with h(r) = Φ̂(ir) X^{ir} for the sinc² pair
        let phi = sinc();
        for &(x, kappa) in &[(1.0, 0u32), (2.0, 1), (5.0, 0), (30.0, 1)] {
            let a = 0.25 + 0.5 * kappa as f64;
            let lx: f64 = x;
            let lx = lx.ln();
            let f = |r: f64| {
                let h = phi.phi_hat_i(r) * Complex64::from_polar(1.0, r * lx);
                let psi = digamma_complex(Complex64::new(a, 0.5 * r));
                (h * psi.re).re / (2.0 * PI)
            };
            let cutoff = 4000.0;
            let breaks = crate::quad::oscillation_breaks(-cutoff, cutoff, PI);
            let direct = integrate(f, -cutoff, cutoff, &breaks, Tolerance::absolute(1e-9)).unwrap();
            // |h| ≤ 1/r² and |Re ψ| ≤ log r: tail ≤ 2(log R + 1)/R /(2π)
            let tail = 2.0 * (cutoff.ln() + 1.0) / cutoff / (2.0 * PI);
            let arch = archimedean_term(x, kappa, &phi).unwrap();
            assert!((direct.value - arch).abs() < tail + 1e-6, "X={x}: {} vs {arch}", direct.value);
        }
    }

    fn digamma_complex(z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut w = z;
        while w.norm() < 20.0 {
            acc -= w.inv();
            w += 1.0;
        }
        let inv2 = (w * w).inv();
        acc + w.ln() - w.inv() * 0.5 - inv2 / 12.0 + inv2 * inv2 / 120.0 - inv2 * inv2 * inv2 / 252.0
    }

    #[test]
    fn explicit_formula_zeta_complete() {
        let chi = DirichletCharacter::principal(1).unwrap();
        let phi = sinc();
        for &x in &[1.0, 2.0, 5.0, 10.0] {
            let ef = explicit_formula_residual(&chi, x, &phi, 500.0).unwrap();
            assert!(ef.complete_residual() < ef.zero_tail, "X={x}: {:?}", ef);
        }
    }

    #[test]
    fn quadratic_character_real_residual() {
        let g = character_group(5).unwrap();
        let chi = g.primitive().find(|c| c.is_real()).unwrap();
        let ef = explicit_formula_residual(chi, 5.0, &sinc(), 500.0).unwrap();
        assert!(ef.displayed_difference.im.abs() < 1e-8);
        assert!(ef.complete_residual() < ef.zero_tail);
    }

    #[test]
    fn conductor_term_isolation() {
        let g = character_group(7).unwrap();
        let chi = g.primitive().next().unwrap();
        let ef = explicit_formula_residual(chi, 1.01, &sinc(), 500.0).unwrap();
        let phi_inv = sinc().phi(1.0 / 1.01);
        assert!((phi_inv - 0.5).abs() < 0.01);
        let without = ef.displayed_difference + ef.conductor_term;
        let expected = phi_inv * (7.0 / PI).ln();
        assert!((ef.conductor_term - expected).abs() < 1e-14);
        // dropping the term moves the residual by exactly its size
        assert!(((without - ef.displayed_difference).norm() - expected).abs() < 1e-12);
    }

    #[test]
    fn envelope_enforced() {
        let chi = DirichletCharacter::principal(1).unwrap();
        assert!(explicit_formula_residual(&chi, 5.0, &sinc(), 100.0).is_err());
        assert!(explicit_formula_residual(&chi, 2e3, &sinc(), 500.0).is_err());
        let big = character_group(23).unwrap();
        assert!(explicit_formula_residual(big.primitive().next().unwrap(), 5.0, &sinc(), 500.0).is_err());
    }

    #[test]
    fn zero_sum_at_one_is_nonnegative() {
        let g = character_group(8).unwrap();
        for chi in g.primitive() {
            let d = lfunction_data(chi).unwrap();
            let scan = find_zeros(&d, 100.0, 0.1).unwrap();
            let zs = zero_sum(8, &scan, 1.0, &sinc(), 100.0).unwrap();
            assert!(zs.value.re > 0.0 && zs.value.im.abs() < 1e-14);
        }
        let tail = zero_tail_bound(20, 500.0, sinc().decay(), 1);
        assert!(tail < 0.05);
    }

    #[test]
    fn prediction_examples() {
        let cfg = PairCorrConfig::new(25.0, 0.0, 100.0).unwrap();
        let p = pair_correlation_prediction(&cfg).unwrap();
        assert!((p.value - 0.75 * 25f64.ln()).abs() < 1e-12);
        for a in [0.3, 0.9, 1.7] {
            let plus = pair_correlation_prediction(&cfg.with_alpha(a)).unwrap().value;
            let minus = pair_correlation_prediction(&cfg.with_alpha(-a)).unwrap().value;
            assert_eq!(plus, minus);
        }
        // Q^{−α} < e⁻²
        let far = PairCorrConfig::new(1e3, 0.5, 100.0).unwrap();
        assert_eq!(pair_correlation_prediction(&far).unwrap().value, 0.5);
        assert!(PairCorrConfig::new(25.0, 2.5, 100.0).is_err());
    }

    #[test]
    fn family_statistics_small() {
        let fam = scan_family(8.0, 60.0, 0.1).unwrap();
        let cfg = PairCorrConfig::new(8.0, 0.5, 60.0).unwrap();
        let n = n_phi(&cfg, &fam).unwrap();
        assert!(n.value > 0.0);
        let f = f_phi(&cfg, &fam).unwrap();
        let fm = f_phi(&cfg.with_alpha(-0.5), &fam).unwrap();
        assert!(f.value >= 0.0);
        assert!((f.value - fm.value).abs() < 1e-9);
        // truncation consistency
        let half = n_phi(&PairCorrConfig::new(8.0, 0.5, 30.0).unwrap(), &fam).unwrap();
        assert!((n.value - half.value).abs() <= half.truncation_budget);
        // zero weight
        let mut zero = cfg.clone();
        zero.weight = SmoothWeight::zero();
        assert_eq!(n_phi(&zero, &fam).unwrap().value, 0.0);
        // incomplete cache
        assert!(n_phi(&PairCorrConfig::new(8.0, 0.5, 80.0).unwrap(), &fam).is_err());
    }

    #[test]
    fn conjugate_characters_contribute_equally() {
        let phi = sinc();
        let d = lfunction_data(character_group(13).unwrap().primitive().find(|c| !c.is_real()).unwrap()).unwrap();
        let a = find_zeros(&d, 60.0, 0.1).unwrap();
        let b = find_zeros(&d.conjugate(), 60.0, 0.1).unwrap();
        for x in [1.0, 13f64.powf(0.7)] {
            let sa = zero_sum(13, &a, x, &phi, 60.0).unwrap().value.norm_sqr();
            let sb = zero_sum(13, &b, x, &phi, 60.0).unwrap().value.norm_sqr();
            assert!((sa - sb).abs() < 1e-9 * sa.max(1.0));
        }
    }

    #[test]
    fn s_routes_agree() {
        let w = SmoothWeight::bump();
        let phi = sinc();
        let s = s_decomposition(50.0, 100.0, &w, &phi).unwrap();
        assert!((s.character_route - s.delta_route).abs() <= 1e-6 * s.delta_route.abs());
        assert!((s.total.value - s.diag.value - s.offdiag.value).abs() < 1e-9 * s.total.value.abs());
        for (q, x) in [(20.0, 30.0), (100.0, 1000.0), (37.0, 5.0)] {
            s_decomposition(q, x, &w, &phi).unwrap();
        }
        assert!(s_decomposition(50.0, 1.0, &w, &phi).is_err());
    }

    #[test]
    fn bdh_small_cases() {
        let m1 = bdh_variance(100.0, 1).unwrap();
        let t = ArithmeticTables::build(100).unwrap();
        let psi: f64 = (2..=100).map(|n| t.mangoldt(n).unwrap()).sum();
        assert!((m1.value - (psi - 100.0).powi(2)).abs() < 1e-9);
        let mut prev = 0.0;
        for q in 1..=30 {
            let m = bdh_variance(500.0, q).unwrap().value;
            assert!(m >= prev);
            prev = m;
        }
    }
}
