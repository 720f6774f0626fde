//! Critical-line zeros from sign changes of Z(t) on a shared per-modulus Hurwitz grid.
//!
//! Grid values are interpolated with a 12-point barycentric Lagrange stencil; the
//! interpolant is bisected and the resulting ordinate is certified by evaluating the true
//! Z at γ ± [`BRACKET`]. Intervals where certification fails are bisected on the true Z.

use std::f64::consts::{E, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::hurwitz::{LineEvaluator, MAX_HEIGHT};
use super::lfunction::{rotate, theta_base, LFunctionData};
use crate::error::{Error, Result};

/// Half-width of the certified bracket around each ordinate.
pub const BRACKET: f64 = 5e-10;
/// Largest admissible grid step.
pub const MAX_GRID_STEP: f64 = 0.1;
/// How many times the grid step is halved when the zero count looks short.
pub const MAX_REFINEMENTS: u32 = 3;

const STENCIL: usize = 12;
const STENCIL_LEFT: i64 = 5;
const PAD: i64 = 7;
const CLOSE_PAIR_SAMPLES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroRecord {
    pub ordinate: f64,
    pub bracket: f64,
    pub multiplicity: u32,
}

impl ZeroRecord {
    pub fn simple(ordinate: f64, bracket: f64) -> Self {
        Self {
            ordinate,
            bracket,
            multiplicity: 1,
        }
    }
}

/// Outcome of scanning one character on (−T, T].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroScan {
    pub zeros: Vec<ZeroRecord>,
    pub height: f64,
    pub grid_step: f64,
    /// (T/π) log(qT/2πe), or 0 when qT ≤ 2πe.
    pub main_term: f64,
    pub slack: f64,
    pub complete: bool,
}

impl ZeroScan {
    pub fn count(&self) -> usize {
        self.zeros.iter().map(|z| z.multiplicity as usize).sum()
    }

    pub fn ordinates(&self) -> impl DoubleEndedIterator<Item = f64> + ExactSizeIterator + '_ {
        self.zeros.iter().map(|z| z.ordinate)
    }

    /// Error unless the completeness check passed.
    pub fn require_complete(&self, modulus: u64, index: usize) -> Result<()> {
        if self.complete {
            Ok(())
        } else {
            Err(Error::IncompleteZeros {
                modulus,
                index,
                height: self.height,
            })
        }
    }
}

/// (T/π) log(qT/2πe).
pub fn zero_count_main_term(q: u64, t: f64) -> Result<f64> {
    let qt = q as f64 * t;
    if !(qt > 1.0) {
        return Err(Error::OutOfRange {
            what: "qT (must exceed 1)",
            value: qt,
            limit: 1.0,
        });
    }
    Ok(t / PI * (qt / (TAU * E)).ln())
}

/// Allowed |count − main term|: 2 + 2 log(qT).
pub fn zero_count_slack(q: u64, t: f64) -> f64 {
    2.0 + 2.0 * (q as f64 * t).max(1.0).ln()
}

/// ζ(½ + i k h, a/q) for every unit a and k = 0..=K, with K h ≥ T + 7h.
#[derive(Debug, Clone)]
pub struct ModulusGrid {
    evaluator: LineEvaluator,
    step: f64,
    height: f64,
    last: i64,
    values: Vec<Complex64>,
}

impl ModulusGrid {
    pub fn new(q: u64, height: f64, step: f64) -> Result<Self> {
        if !(step > 0.0 && step <= MAX_GRID_STEP) {
            return Err(Error::OutOfRange {
                what: "grid step",
                value: step,
                limit: MAX_GRID_STEP,
            });
        }
        if !(height >= 0.0) {
            return Err(Error::InvalidConfig(format!("height {height} must be nonnegative")));
        }
        let last = (height / step).ceil() as i64 + PAD;
        let reach = last as f64 * step;
        if reach > MAX_HEIGHT {
            return Err(Error::OutOfRange {
                what: "grid reach",
                value: reach,
                limit: MAX_HEIGHT,
            });
        }
        let evaluator = LineEvaluator::new(q, reach)?;
        let units = evaluator.units().len();
        let mut values = vec![Complex64::new(0.0, 0.0); units * (last as usize + 1)];
        for (k, row) in values.chunks_mut(units).enumerate() {
            evaluator.eval_into(k as f64 * step, row);
        }
        Ok(Self {
            evaluator,
            step,
            height,
            last,
            values,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.evaluator.modulus()
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn evaluator(&self) -> &LineEvaluator {
        &self.evaluator
    }

    fn units(&self) -> usize {
        self.evaluator.units().len()
    }

    /// Grid indices run over −last..=last.
    pub fn last_index(&self) -> i64 {
        self.last
    }

    /// Character values at the units, in the evaluator's unit order.
    fn coefficients(&self, data: &LFunctionData) -> Vec<Complex64> {
        self.evaluator
            .units()
            .iter()
            .map(|&a| data.character.value(a))
            .collect()
    }

    /// Z(jh) for j = −last..=last.
    pub fn z_values(&self, data: &LFunctionData) -> Result<Vec<f64>> {
        let q = self.modulus();
        if data.modulus() != q {
            return Err(Error::InvalidConfig(format!(
                "character mod {} on grid mod {q}",
                data.modulus()
            )));
        }
        let coeffs = self.coefficients(data);
        let units = self.units();
        let ln_q = (q as f64).ln();
        let phase0 = -0.5 * data.root_number.arg();
        let n = 2 * self.last as usize + 1;
        let mut out = vec![0.0; n];
        for k in 0..=self.last as usize {
            let row = &self.values[k * units..(k + 1) * units];
            let t = k as f64 * self.step;
            let (mut plus, mut minus) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            for (c, z) in coeffs.iter().zip(row) {
                plus += c * z;
                minus += c * z.conj();
            }
            let base = theta_base(q, data.parity, t);
            // q^{−½ ∓ it}
            let scale = 1.0 / (q as f64).sqrt();
            let lp = plus * Complex64::from_polar(scale, -t * ln_q);
            out[self.last as usize + k] = rotate(base + phase0, lp)?;
            if k > 0 {
                // θ_base is odd in t
                let lm = minus * Complex64::from_polar(scale, t * ln_q);
                out[self.last as usize - k] = rotate(-base + phase0, lm)?;
            }
        }
        Ok(out)
    }

    /// True Z at t − δ and t + δ from one pass over the cached logarithms.
    fn z_pair(&self, data: &LFunctionData, coeffs: &[Complex64], t: f64, delta: f64) -> Result<(f64, f64)> {
        let q = self.modulus() as f64;
        let units = self.units();
        let mut lo = vec![Complex64::new(0.0, 0.0); units];
        let mut hi = vec![Complex64::new(0.0, 0.0); units];
        self.evaluator.eval_pair_into(t, delta, &mut lo, &mut hi);
        let finish = |vals: &[Complex64], t: f64| -> Result<f64> {
            let mut acc = Complex64::new(0.0, 0.0);
            for (c, z) in coeffs.iter().zip(vals) {
                acc += c * z;
            }
            let l = acc * Complex64::from_polar(1.0 / q.sqrt(), -t * q.ln());
            rotate(data.theta(t), l)
        };
        Ok((finish(&lo, t - delta)?, finish(&hi, t + delta)?))
    }

    fn z_true(&self, data: &LFunctionData, coeffs: &[Complex64], t: f64) -> Result<f64> {
        let mut vals = vec![Complex64::new(0.0, 0.0); self.units()];
        self.evaluator.eval_into(t, &mut vals);
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, z) in coeffs.iter().zip(&vals) {
            acc += c * z;
        }
        let q = self.modulus() as f64;
        rotate(data.theta(t), acc * Complex64::from_polar(1.0 / q.sqrt(), -t * q.ln()))
    }

    /// Scan one primitive character on (−T, T] with this grid's step.
    pub fn scan(&self, data: &LFunctionData) -> Result<ZeroScan> {
        let z = self.z_values(data)?;
        let coeffs = self.coefficients(data);
        let h = self.step;
        let last = self.last;
        let at = |j: i64| z[(j + last) as usize];
        let t_of = |j: i64| j as f64 * h;
        let height = self.height;
        let mut zeros = Vec::new();

        if height > 0.0 {
            let lo = -((height / h).ceil() as i64) - 1;
            let hi = (height / h).ceil() as i64;
            for j in lo..hi {
                let (a, b) = (at(j), at(j + 1));
                if (a >= 0.0) != (b >= 0.0) {
                    let r = self.locate(data, &coeffs, &z, j, t_of(j), t_of(j + 1), a)?;
                    zeros.push(r);
                } else if j > lo {
                    // local minimum of |Z| without a sign change: look for a hidden pair
                    let m = at(j).abs();
                    if m < at(j - 1).abs() && m <= at(j + 1).abs() {
                        self.close_pair(data, &coeffs, &z, j, &mut zeros)?;
                    }
                }
            }
            zeros.retain(|r: &ZeroRecord| r.ordinate > -height && r.ordinate <= height);
            zeros.sort_by(|a, b| a.ordinate.total_cmp(&b.ordinate));
            zeros.dedup_by(|b, a| (b.ordinate - a.ordinate).abs() < 2.0 * BRACKET);
        }

        let q = self.modulus();
        let main_term = if q as f64 * height > TAU * E {
            zero_count_main_term(q, height)?
        } else {
            0.0
        };
        let slack = zero_count_slack(q, height);
        let count = zeros.len() as f64;
        Ok(ZeroScan {
            zeros,
            height,
            grid_step: h,
            main_term,
            slack,
            complete: (count - main_term).abs() <= slack,
        })
    }

    /// Barycentric interpolant of the grid Z on the 12-point stencil around [t_j, t_{j+1}].
    fn interpolant<'a>(&self, z: &'a [f64], j: i64) -> impl Fn(f64) -> f64 + 'a {
        let h = self.step;
        let last = self.last;
        let start = (j - STENCIL_LEFT).clamp(-last, last - STENCIL as i64 + 1);
        let nodes: Vec<(f64, f64, f64)> = (0..STENCIL)
            .map(|i| {
                let k = start + i as i64;
                let w = binom11(i) * if i % 2 == 0 { 1.0 } else { -1.0 };
                (k as f64 * h, z[(k + last) as usize], w)
            })
            .collect();
        move |x: f64| {
            let (mut num, mut den) = (0.0, 0.0);
            for &(t, f, w) in &nodes {
                let d = x - t;
                if d == 0.0 {
                    return f;
                }
                let c = w / d;
                num += c * f;
                den += c;
            }
            num / den
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn locate(
        &self,
        data: &LFunctionData,
        coeffs: &[Complex64],
        z: &[f64],
        j: i64,
        a: f64,
        b: f64,
        fa: f64,
    ) -> Result<ZeroRecord> {
        let p = self.interpolant(z, j);
        let guess = bisect(&p, a, b, fa >= 0.0, 1e-14);
        let (lo, hi) = self.z_pair(data, coeffs, guess, BRACKET)?;
        if (lo >= 0.0) != (hi >= 0.0) {
            return Ok(ZeroRecord::simple(guess, BRACKET));
        }
        // interpolant disagrees with Z near the root: bisect the true function instead
        let f = |t: f64| self.z_true(data, coeffs, t);
        let (mut a, mut b) = (a, b);
        let sa = fa >= 0.0;
        while b - a > 2.0 * BRACKET {
            let m = 0.5 * (a + b);
            if (f(m)? >= 0.0) == sa {
                a = m;
            } else {
                b = m;
            }
        }
        Ok(ZeroRecord::simple(0.5 * (a + b), 0.5 * (b - a)))
    }

    fn close_pair(
        &self,
        data: &LFunctionData,
        coeffs: &[Complex64],
        z: &[f64],
        j: i64,
        out: &mut Vec<ZeroRecord>,
    ) -> Result<()> {
        let h = self.step;
        let (a, b) = ((j - 1) as f64 * h, (j + 1) as f64 * h);
        let p = self.interpolant(z, j);
        let n = CLOSE_PAIR_SAMPLES;
        let mut prev_t = a;
        let mut prev = p(a);
        for i in 1..=n {
            let t = a + (b - a) * i as f64 / n as f64;
            let v = p(t);
            if (v >= 0.0) != (prev >= 0.0) {
                let guess = bisect(&p, prev_t, t, prev >= 0.0, 1e-14);
                let (lo, hi) = self.z_pair(data, coeffs, guess, BRACKET)?;
                if (lo >= 0.0) != (hi >= 0.0) {
                    out.push(ZeroRecord::simple(guess, BRACKET));
                }
            }
            prev_t = t;
            prev = v;
        }
        Ok(())
    }
}

fn binom11(i: usize) -> f64 {
    const C: [f64; 12] = [1., 11., 55., 165., 330., 462., 462., 330., 165., 55., 11., 1.];
    C[i]
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, sign_a: bool, tol: f64) -> f64 {
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if (f(m) >= 0.0) == sign_a {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Zeros of a primitive L-function on (−T, T], refining the grid up to [`MAX_REFINEMENTS`]
/// times while the count misses the main term by more than the slack.
pub fn find_zeros(data: &LFunctionData, height: f64, grid_step: f64) -> Result<ZeroScan> {
    let q = data.modulus();
    let mut step = grid_step;
    let mut scan = ModulusGrid::new(q, height, step)?.scan(data)?;
    for _ in 0..MAX_REFINEMENTS {
        if scan.complete {
            break;
        }
        step *= 0.5;
        scan = ModulusGrid::new(q, height, step)?.scan(data)?;
    }
    Ok(scan)
}

/// Scan every given character on one shared grid, halving the step for the whole modulus
/// if any scan comes out incomplete.
pub fn scan_modulus(q: u64, chars: &[LFunctionData], height: f64, grid_step: f64) -> Result<Vec<ZeroScan>> {
    use rayon::prelude::*;
    let mut step = grid_step;
    let mut attempt = 0;
    loop {
        let grid = ModulusGrid::new(q, height, step)?;
        let scans = chars
            .par_iter()
            .map(|d| grid.scan(d))
            .collect::<Result<Vec<_>>>()?;
        if attempt == MAX_REFINEMENTS || scans.iter().all(|s| s.complete) {
            return Ok(scans);
        }
        attempt += 1;
        step *= 0.5;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::{character_group, DirichletCharacter};
    use crate::lfun::lfunction::{hardy_z, lfunction_data};

    fn zeta_data() -> LFunctionData {
        lfunction_data(&DirichletCharacter::principal(1).unwrap()).unwrap()
    }

    #[test]
    fn empty_at_zero_height() {
        let s = find_zeros(&zeta_data(), 0.0, 0.1).unwrap();
        assert!(s.zeros.is_empty());
    }

    #[test]
    fn first_zeta_zeros() {
        let s = find_zeros(&zeta_data(), 30.0, 0.1).unwrap();
        let ords: Vec<f64> = s.ordinates().collect();
        let known = [14.134_725_141_734_693, 21.022_039_638_771_555, 25.010_857_580_145_688];
        assert_eq!(ords.len(), 6);
        for (k, &g) in known.iter().enumerate() {
            assert!((ords[3 + k] - g).abs() < 1e-9);
            assert!((ords[2 - k] + g).abs() < 1e-9);
        }
        for r in &s.zeros {
            assert!(r.bracket <= 1e-9);
            let d = zeta_data();
            let lo = hardy_z(r.ordinate - r.bracket, &d).unwrap();
            let hi = hardy_z(r.ordinate + r.bracket, &d).unwrap();
            assert!(lo * hi < 0.0);
        }
    }

    #[test]
    fn zeta_count_to_100() {
        let s = find_zeros(&zeta_data(), 100.0, 0.1).unwrap();
        assert_eq!(s.count(), 58);
        assert!((s.main_term - 56.254).abs() < 1e-3);
        assert!(s.complete);
    }

    #[test]
    fn main_term_values() {
        assert!((zero_count_main_term(1, 100.0).unwrap() - 56.254).abs() < 1e-3);
        let v = zero_count_main_term(3, 50.0).unwrap();
        assert!((v - 50.0 / PI * (150.0 / (TAU * E)).ln()).abs() < 1e-12);
        assert!(zero_count_main_term(1, 0.5).is_err());
        let mut prev = zero_count_main_term(7, 3.0).unwrap();
        for k in 1..100 {
            let v = zero_count_main_term(7, 3.0 + k as f64).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn mod_three_matches_main_term() {
        let g = character_group(3).unwrap();
        let chi = g.primitive().next().unwrap();
        let s = find_zeros(&lfunction_data(chi).unwrap(), 50.0, 0.1).unwrap();
        assert!(s.complete);
        assert!((s.count() as f64 - s.main_term).abs() <= s.slack);
    }

    #[test]
    fn conjugate_ordinates_negate() {
        let g = character_group(7).unwrap();
        for chi in g.primitive().filter(|c| !c.is_real()) {
            let d = lfunction_data(chi).unwrap();
            let a = find_zeros(&d, 30.0, 0.1).unwrap();
            let b = find_zeros(&d.conjugate(), 30.0, 0.1).unwrap();
            assert_eq!(a.zeros.len(), b.zeros.len());
            for (x, y) in a.ordinates().zip(b.ordinates().rev()) {
                assert!((x + y).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn shared_grid_equals_single_scans() {
        let g = character_group(11).unwrap();
        let data: Vec<_> = g.primitive().map(|c| lfunction_data(c).unwrap()).collect();
        let shared = scan_modulus(11, &data, 20.0, 0.1).unwrap();
        for (d, s) in data.iter().zip(&shared) {
            assert_eq!(&find_zeros(d, 20.0, 0.1).unwrap(), s);
        }
    }
}
