//! Dirichlet L-values through Hurwitz zeta, the completed function Λ(s, χ), Gauss sums,
//! root numbers and the rotated real function Z(t) on the critical line.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use super::hurwitz::hurwitz_zeta;
use crate::characters::DirichletCharacter;
use crate::error::{Error, Result};
use crate::special::{digamma, ln_gamma};

/// Largest tolerated |Im(e^{iθ}L)| relative to max(1, |L|) before the rotation is declared broken.
pub const ROTATION_TOLERANCE: f64 = 1e-8;

/// L(s, χ) = q^{−s} Σ_{a mod q} χ(a) ζ(s, a/q).
pub fn dirichlet_l(s: Complex64, chi: &DirichletCharacter) -> Result<Complex64> {
    let q = chi.modulus();
    if s.re == 1.0 && s.im == 0.0 {
        if chi.is_principal() {
            return Err(Error::Pole { re: 1.0, im: 0.0 });
        }
        // the Hurwitz poles cancel; L(1, χ) = −(1/q) Σ χ(a) ψ(a/q)
        let mut acc = Complex64::new(0.0, 0.0);
        for a in 1..=q {
            let v = chi.value(a);
            if v.norm_sqr() > 0.0 {
                acc += v * digamma(a as f64 / q as f64);
            }
        }
        return Ok(-acc / q as f64);
    }
    let qf = q as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for a in 1..=q {
        let v = chi.value(a);
        if v.norm_sqr() > 0.0 {
            acc += v * hurwitz_zeta(s, a as f64 / qf)?;
        }
    }
    Ok(acc * (-s * qf.ln()).exp())
}

/// τ(χ) = Σ_a χ(a) e^{2πia/q}.
pub fn gauss_sum(chi: &DirichletCharacter) -> Complex64 {
    let q = chi.modulus();
    let mut acc = Complex64::new(0.0, 0.0);
    for a in 1..=q {
        let v = chi.value(a);
        if v.norm_sqr() > 0.0 {
            acc += v * Complex64::from_polar(1.0, TAU * (a % q) as f64 / q as f64);
        }
    }
    acc
}

/// Functional-equation data of a primitive character.
#[derive(Debug, Clone)]
pub struct LFunctionData {
    pub character: DirichletCharacter,
    /// κ = (1 − χ(−1))/2.
    pub parity: u32,
    pub gauss_sum: Complex64,
    pub root_number: Complex64,
}

/// Gauss sum and root number ε = τ/(i^κ √q) for a primitive character.
pub fn lfunction_data(chi: &DirichletCharacter) -> Result<LFunctionData> {
    if !chi.is_primitive() {
        return Err(Error::NotPrimitive {
            modulus: chi.modulus(),
            index: chi.index(),
            conductor: chi.conductor(),
        });
    }
    let q = chi.modulus() as f64;
    let parity = chi.parity();
    let tau = gauss_sum(chi);
    if (tau.norm_sqr() - q).abs() > 1e-9 {
        return Err(Error::Inconsistent {
            what: "|tau|^2 vs q",
            lhs: tau.norm_sqr(),
            rhs: q,
            tol: 1e-9,
        });
    }
    let i_kappa = if parity == 0 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::new(0.0, 1.0)
    };
    let eps = tau / (i_kappa * q.sqrt());
    if (eps.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::Inconsistent {
            what: "|root number|",
            lhs: eps.norm(),
            rhs: 1.0,
            tol: 1e-10,
        });
    }
    Ok(LFunctionData {
        character: chi.clone(),
        parity,
        gauss_sum: tau,
        root_number: eps,
    })
}

impl LFunctionData {
    pub fn modulus(&self) -> u64 {
        self.character.modulus()
    }

    /// Data of the conjugate character: ε(χ̄) = conj ε(χ).
    pub fn conjugate(&self) -> Self {
        let chi = self.character.conjugate();
        let sign = if self.parity == 0 { 1.0 } else { -1.0 };
        Self {
            character: chi,
            parity: self.parity,
            gauss_sum: self.gauss_sum.conj() * sign,
            root_number: self.root_number.conj(),
        }
    }

    /// θ(t) such that e^{iθ(t)} L(½ + it, χ) is real.
    pub fn theta(&self, t: f64) -> f64 {
        theta_base(self.modulus(), self.parity, t) - 0.5 * self.root_number.arg()
    }
}

/// Im log Γ((½ + κ + it)/2) + (t/2) log(q/π): the part of θ that depends only on (q, κ).
pub fn theta_base(q: u64, parity: u32, t: f64) -> f64 {
    let z = Complex64::new(0.25 + 0.5 * parity as f64, 0.5 * t);
    ln_gamma(z).im + 0.5 * t * (q as f64 / PI).ln()
}

/// Λ(s, χ) = (q/π)^{(s+κ)/2} Γ((s+κ)/2) L(s, χ).
pub fn completed(s: Complex64, data: &LFunctionData) -> Result<Complex64> {
    let q = data.modulus() as f64;
    let w = (s + data.parity as f64) * 0.5;
    let l = dirichlet_l(s, &data.character)?;
    Ok((w * (q / PI).ln() + ln_gamma(w)).exp() * l)
}

/// Rotate L(½ + it) by e^{iθ(t)}; fails when the imaginary residue is not negligible.
pub fn rotate(theta: f64, l: Complex64) -> Result<f64> {
    let z = Complex64::from_polar(1.0, theta) * l;
    let tol = ROTATION_TOLERANCE * l.norm().max(1.0);
    if z.im.abs() > tol {
        return Err(Error::Inconsistent {
            what: "imaginary residue of rotated L",
            lhs: z.im,
            rhs: 0.0,
            tol,
        });
    }
    Ok(z.re)
}

/// Z(t) = e^{iθ(t)} L(½ + it, χ), real on the critical line.
pub fn hardy_z(t: f64, data: &LFunctionData) -> Result<f64> {
    let l = dirichlet_l(Complex64::new(0.5, t), &data.character)?;
    rotate(data.theta(t), l)
}
