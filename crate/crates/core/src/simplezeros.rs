//! Fejér kernel pair, the pairing identity ∫F_Φ(Q^β)r̃(β)dβ, closed-form kernel integrals,
//! multiplicity detection and the empirical simple-zero bound.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lfun::{ZeroFamily, ZeroRecord};
use crate::quad::{integrate, Tolerance};
use crate::special::pairwise_sum;
use crate::stats::{f_alpha, n_phi_weighted, zero_tail_bound, PairCorrConfig, WeightedFamily};
use crate::testfn::{MellinSource, TestFunction};

/// Default merge distance for coincident ordinates.
pub const MULTIPLICITY_TOLERANCE: f64 = 1e-6;
/// Zeros with |Φ̂(iγ)| below this are dropped from the kernel double sum.
pub const COEFFICIENT_CUTOFF: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub alpha: f64,
}

impl KernelSpec {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 1.0 && alpha <= 2.0) {
            return Err(Error::InvalidConfig(format!("kernel alpha = {alpha} must lie in (1, 2]")));
        }
        Ok(Self { alpha })
    }

    /// r(u) = (sin παu / παu)².
    pub fn r(&self, u: f64) -> f64 {
        let x = PI * self.alpha * u;
        if x.abs() < 1e-4 {
            // 1 − x²/3 + 2x⁴/45
            let x2 = x * x;
            return 1.0 - x2 / 3.0 + 2.0 * x2 * x2 / 45.0;
        }
        let s = x.sin() / x;
        s * s
    }

    /// r̃(β) = (α − |β|)/α² on |β| < α.
    pub fn r_tilde(&self, beta: f64) -> f64 {
        let b = beta.abs();
        if b < self.alpha {
            (self.alpha - b) / (self.alpha * self.alpha)
        } else {
            0.0
        }
    }
}

pub fn fejer_pair(u: f64, beta: f64, spec: &KernelSpec) -> (f64, f64) {
    (spec.r(u), spec.r_tilde(beta))
}

/// ∫_{−α}^{α} f(β)r̃(β)dβ = 1 + 1/(3α²) − 1/α for 1 < α < 2.
pub fn kernel_integral_f(alpha: f64) -> Result<f64> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(Error::InvalidConfig(format!("closed form needs 1 < alpha < 2, got {alpha}")));
    }
    Ok(1.0 + 1.0 / (3.0 * alpha * alpha) - 1.0 / alpha)
}

/// The same integral by quadrature.
pub fn kernel_integral_f_quadrature(alpha: f64) -> Result<f64> {
    let spec = KernelSpec { alpha };
    let est = integrate(
        |b: f64| f_alpha(b) * spec.r_tilde(b),
        -alpha,
        alpha,
        &[-1.0, 0.0, 1.0],
        Tolerance::absolute(1e-14),
    )?;
    Ok(est.value)
}

/// (2/α²)∫₀¹ Φ(Q^{−β})²(α − β)dβ · log Q · ((1/2π)∫|Φ̂|²)⁻¹, tending to 1/α.
pub fn phi_term_integral(alpha: f64, scale: f64, phi: &TestFunction) -> Result<f64> {
    if !(alpha > 1.0 && alpha <= 2.0) {
        return Err(Error::InvalidConfig(format!("alpha = {alpha} must lie in (1, 2]")));
    }
    if !(scale >= 10.0) {
        return Err(Error::InvalidConfig(format!("Q = {scale} must be at least 10")));
    }
    let lq = scale.ln();
    let (a, b) = phi.support();
    // Φ(Q^{−β}) breaks where Q^{−β} hits a break or a support end
    let mut breaks: Vec<f64> = phi
        .log_breaks()
        .into_iter()
        .chain([a.ln(), b.ln()])
        .map(|l| -l / lq)
        .filter(|&x| x > 0.0 && x < 1.0)
        .collect();
    breaks.sort_by(f64::total_cmp);
    let est = integrate(
        |beta: f64| {
            let v = phi.phi((-beta * lq).exp());
            v * v * (alpha - beta)
        },
        0.0,
        1.0,
        &breaks,
        Tolerance::absolute(1e-14),
    )?;
    if est.value == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 / (alpha * alpha) * est.value * lq / phi.l2_norm_sq()?)
}

/// Merge ordinates closer than `tol` into one record per cluster.
pub fn multiplicity_detect(zeros: &[ZeroRecord], tol: f64) -> Result<Vec<ZeroRecord>> {
    let widest = zeros.iter().map(|z| z.bracket).fold(0.0, f64::max);
    if tol < 2.0 * widest {
        return Err(Error::InvalidConfig(format!(
            "multiplicity tolerance {tol:e} below twice the bracket width {widest:e}"
        )));
    }
    let mut out: Vec<ZeroRecord> = Vec::with_capacity(zeros.len());
    let mut sum = 0.0;
    for z in zeros {
        match out.last_mut() {
            Some(last) if z.ordinate - last.ordinate < tol && z.ordinate >= last.ordinate - tol => {
                sum += z.ordinate * z.multiplicity as f64;
                last.multiplicity += z.multiplicity;
                last.ordinate = sum / last.multiplicity as f64;
                last.bracket = last.bracket.max(z.bracket);
            }
            _ => {
                sum = z.ordinate * z.multiplicity as f64;
                out.push(*z);
            }
        }
    }
    Ok(out)
}

/// Σ_{i,j} r((γ_i − γ_j) log Q / 2π) Re(c_i c̄_j).
pub fn kernel_double_sum(ordinates: &[f64], coefficients: &[Complex64], log_q: f64, spec: &KernelSpec) -> f64 {
    let keep: Vec<(f64, Complex64)> = ordinates
        .iter()
        .zip(coefficients)
        .filter(|(_, c)| c.norm() > COEFFICIENT_CUTOFF)
        .map(|(&g, &c)| (g, c))
        .collect();
    let scale = log_q / (2.0 * PI);
    let rows: Vec<f64> = (0..keep.len())
        .map(|i| {
            let (gi, ci) = keep[i];
            let mut row = ci.norm_sqr();
            for &(gj, cj) in &keep[i + 1..] {
                row += 2.0 * spec.r((gi - gj) * scale) * (ci * cj.conj()).re;
            }
            row
        })
        .collect();
    pairwise_sum(&rows)
}

fn family_for(cfg: &PairCorrConfig, family: &ZeroFamily, tol: f64) -> Result<WeightedFamily> {
    let mut wf = WeightedFamily::new(family, cfg)?;
    // coincident ordinates share one record so the double sum sees m² Φ̂²
    for c in &mut wf.characters {
        let records: Vec<ZeroRecord> = c
            .ordinates
            .iter()
            .zip(&c.multiplicities)
            .map(|(&g, &m)| ZeroRecord {
                ordinate: g,
                bracket: 0.0,
                multiplicity: m,
            })
            .collect();
        let merged = multiplicity_detect(&records, tol)?;
        if merged.len() != records.len() {
            c.ordinates = merged.iter().map(|z| z.ordinate).collect();
            c.multiplicities = merged.iter().map(|z| z.multiplicity).collect();
            c.coefficients = merged
                .iter()
                .map(|z| cfg.phi.phi_hat_i(z.ordinate) * z.multiplicity as f64)
                .collect();
        }
    }
    Ok(wf)
}

/// Both sides of ∫F_Φ(Q^β)r̃(β)dβ = N_Φ⁻¹ Σ (W/φ) Σ* Σ_{γ,γ'} r((γ−γ')log Q/2π)Φ̂(iγ)Φ̂(iγ')‾.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairingIdentity {
    pub lhs: f64,
    pub rhs: f64,
    /// Quadrature error estimate of the β integral.
    pub quadrature_budget: f64,
    /// Truncation of the zero sums at T_max.
    pub truncation_budget: f64,
    pub n_phi: f64,
    pub intervals: usize,
}

impl PairingIdentity {
    pub fn budget(&self) -> f64 {
        self.quadrature_budget + self.truncation_budget
    }
}

struct Pairing<'a> {
    wf: WeightedFamily,
    cfg: &'a PairCorrConfig,
    n: f64,
    n_budget: f64,
}

impl<'a> Pairing<'a> {
    fn new(cfg: &'a PairCorrConfig, family: &ZeroFamily) -> Result<Self> {
        cfg.validate()?;
        let wf = family_for(cfg, family, MULTIPLICITY_TOLERANCE)?;
        let n = n_phi_weighted(cfg, &wf)?;
        Ok(Self {
            wf,
            cfg,
            n: n.value,
            n_budget: n.truncation_budget,
        })
    }

    fn double_sum(&self, spec: &KernelSpec) -> f64 {
        let lq = self.cfg.scale.ln();
        let parts: Vec<f64> = self
            .wf
            .characters
            .par_iter()
            .map(|c| c.weight * kernel_double_sum(&c.ordinates, &c.coefficients, lq, spec))
            .collect();
        pairwise_sum(&parts)
    }

    /// Un-normalized F numerator at β.
    fn f_numerator(&self, beta: f64) -> f64 {
        let parts: Vec<f64> = self
            .wf
            .characters
            .iter()
            .map(|c| c.weight * self.wf.inner_sum(c, beta).norm_sqr())
            .collect();
        pairwise_sum(&parts)
    }

    /// Simpson on [0, α] with `n` intervals (F and r̃ are even in β).
    fn simpson(&self, spec: &KernelSpec, n: usize) -> f64 {
        let h = spec.alpha / n as f64;
        let vals: Vec<f64> = (0..=n)
            .into_par_iter()
            .map(|k| {
                let b = k as f64 * h;
                let w = if k == 0 || k == n {
                    1.0
                } else if k % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                w * self.f_numerator(b) * spec.r_tilde(b)
            })
            .collect();
        2.0 * h / 3.0 * pairwise_sum(&vals)
    }

    fn truncation(&self, value: f64) -> f64 {
        if self.n <= 0.0 {
            return 0.0;
        }
        let parts: Vec<f64> = self
            .wf
            .characters
            .iter()
            .map(|c| {
                let abs: f64 = c.coefficients.iter().map(|h| h.norm()).sum();
                let tau = zero_tail_bound(c.modulus, self.wf.t_max, self.wf.decay, 1);
                c.weight * (2.0 * abs * tau + tau * tau)
            })
            .collect();
        pairwise_sum(&parts) / self.n + value * self.n_budget / self.n
    }
}

/// Simpson intervals resolving the fastest oscillation e^{2iTβ log Q} with h·ω ≤ 1/4.
pub fn pairing_intervals(cfg: &PairCorrConfig, spec: &KernelSpec) -> usize {
    let omega = 2.0 * cfg.t_max * cfg.scale.ln();
    let n = (spec.alpha * omega / 0.25).ceil() as usize;
    (n.max(64) + 1) & !1
}

pub fn pairing_identity_check(cfg: &PairCorrConfig, family: &ZeroFamily, spec: &KernelSpec) -> Result<PairingIdentity> {
    pairing_identity_with(cfg, family, spec, pairing_intervals(cfg, spec))
}

/// As `pairing_identity_check` with an explicit (even) number of Simpson intervals on [0, α].
pub fn pairing_identity_with(
    cfg: &PairCorrConfig,
    family: &ZeroFamily,
    spec: &KernelSpec,
    intervals: usize,
) -> Result<PairingIdentity> {
    if intervals < 2 || intervals % 2 != 0 {
        return Err(Error::InvalidConfig(format!("Simpson needs an even interval count, got {intervals}")));
    }
    let p = Pairing::new(cfg, family)?;
    if p.n <= 0.0 {
        return Ok(PairingIdentity {
            lhs: 0.0,
            rhs: 0.0,
            quadrature_budget: 0.0,
            truncation_budget: 0.0,
            n_phi: 0.0,
            intervals,
        });
    }
    let lhs = p.double_sum(spec) / p.n;
    let fine = p.simpson(spec, intervals) / p.n;
    let coarse = p.simpson(spec, intervals / 2 + (intervals / 2) % 2) / p.n;
    Ok(PairingIdentity {
        lhs,
        rhs: fine,
        quadrature_budget: (fine - coarse).abs(),
        truncation_budget: p.truncation(lhs),
        n_phi: p.n,
        intervals,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimpleZeroBound {
    /// 2 − N_Φ⁻¹ Σ (W/φ) Σ* Σ_{γ,γ'} r(…)Φ̂Φ̂‾
    pub empirical: f64,
    /// 1 − 1/(3α²)
    pub asymptotic: f64,
    /// N_Φ⁻¹ Σ (W/φ) Σ* Σ_{γ simple} |Φ̂(iγ)|²
    pub simple_proportion: f64,
    pub n_phi: f64,
    pub truncation_budget: f64,
}

pub fn asymptotic_simple_bound(alpha: f64) -> f64 {
    1.0 - 1.0 / (3.0 * alpha * alpha)
}

pub fn simple_zero_bound(cfg: &PairCorrConfig, family: &ZeroFamily, spec: &KernelSpec) -> Result<SimpleZeroBound> {
    let p = Pairing::new(cfg, family)?;
    let asymptotic = asymptotic_simple_bound(spec.alpha);
    if p.n <= 0.0 {
        return Ok(SimpleZeroBound {
            empirical: 0.0,
            asymptotic,
            simple_proportion: 0.0,
            n_phi: 0.0,
            truncation_budget: 0.0,
        });
    }
    let lhs = p.double_sum(spec) / p.n;
    let simple: Vec<f64> = p
        .wf
        .characters
        .iter()
        .map(|c| {
            let s: f64 = c
                .coefficients
                .iter()
                .zip(&c.multiplicities)
                .filter(|(_, &m)| m == 1)
                .map(|(h, _)| h.norm_sqr())
                .sum();
            c.weight * s
        })
        .collect();
    Ok(SimpleZeroBound {
        empirical: 2.0 - lhs,
        asymptotic,
        simple_proportion: pairwise_sum(&simple) / p.n,
        n_phi: p.n,
        truncation_budget: p.truncation(lhs),
    })
}
