//! Dirichlet characters stored as exponent tuples over a CRT generator decomposition of
//! (Z/qZ)*, their conductors, and the finite character-sum identities built on them:
//! primitive orthogonality, Δ(p,r), its U/L partition and the Möbius flip.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::{self, gcd, mod_pow, ArithmeticTables};
use crate::error::{Error, Result};
use crate::testfn::SmoothWeight;

const NON_UNIT: u32 = u32::MAX;

/// One cyclic factor of (Z/qZ)*.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclicFactor {
    /// The prime whose power this factor lives in.
    pub prime: u64,
    pub prime_power: u64,
    /// Generator lifted to a residue mod q that is 1 modulo the other prime powers.
    pub generator: u64,
    pub order: u64,
}

/// The generator decomposition and discrete-log table of (Z/qZ)*, shared by every
/// character mod q.
#[derive(Debug)]
pub struct GroupStructure {
    modulus: u64,
    factors: Vec<CyclicFactor>,
    exponent: u64,
    dlog: Vec<u32>,
    roots: Vec<Complex64>,
}

fn mod_inverse(a: u64, m: u64) -> u64 {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let k = r0 / r1;
        (r0, r1) = (r1, r0 - k * r1);
        (s0, s1) = (s1, s0 - k * s1);
    }
    debug_assert_eq!(r0, 1, "{a} not invertible mod {m}");
    s0.rem_euclid(m as i128) as u64
}

fn primitive_root_prime_power(p: u64, k: u32) -> u64 {
    let pm1 = arith::factorize(p - 1);
    let mut g = 2;
    loop {
        if pm1.iter().all(|&(l, _)| mod_pow(g, (p - 1) / l, p) != 1) {
            break;
        }
        g += 1;
    }
    if k >= 2 && mod_pow(g, p - 1, p * p) == 1 {
        g += p;
    }
    g
}

impl GroupStructure {
    pub fn new(q: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidConfig("modulus must be positive".into()));
        }
        if q > u32::MAX as u64 / 4 {
            return Err(Error::OutOfRange {
                what: "modulus",
                value: q as f64,
                limit: (u32::MAX / 4) as f64,
            });
        }
        let mut factors = Vec::new();
        for (p, k) in arith::factorize(q) {
            let pk = p.pow(k);
            let rest = q / pk;
            let lift = |g: u64| -> u64 {
                if rest == 1 {
                    return g % q;
                }
                // x ≡ g (mod p^k), x ≡ 1 (mod rest)
                let t = ((g + pk - 1) % pk) * mod_inverse(rest % pk, pk) % pk;
                (1 + rest * t) % q
            };
            if p == 2 {
                if k >= 2 {
                    factors.push(CyclicFactor {
                        prime: 2,
                        prime_power: pk,
                        generator: lift(pk - 1),
                        order: 2,
                    });
                }
                if k >= 3 {
                    factors.push(CyclicFactor {
                        prime: 2,
                        prime_power: pk,
                        generator: lift(5),
                        order: pk / 4,
                    });
                }
            } else {
                let g = primitive_root_prime_power(p, k);
                factors.push(CyclicFactor {
                    prime: p,
                    prime_power: pk,
                    generator: lift(g),
                    order: pk / p * (p - 1),
                });
            }
        }
        let exponent = factors.iter().fold(1, |acc, f| arith::lcm(acc, f.order));
        let r = factors.len();
        let n = q as usize;
        let mut dlog = vec![NON_UNIT; n * r.max(1)];
        let mut unit_count = 0u64;
        if r == 0 {
            // q = 1 or 2: trivial group, residue 0 (q = 1) or 1 (q = 2)
            let one = (1 % q) as usize;
            dlog[one] = 0;
            unit_count = 1;
        } else {
            let mut tuple = vec![0u64; r];
            let mut value = 1 % q;
            loop {
                let slot = value as usize * r;
                debug_assert_eq!(dlog[slot], NON_UNIT, "generator tuple collision mod {q}");
                for (i, &e) in tuple.iter().enumerate() {
                    dlog[slot + i] = e as u32;
                }
                unit_count += 1;
                // mixed-radix increment, first factor fastest
                let mut i = 0;
                loop {
                    if i == r {
                        break;
                    }
                    tuple[i] += 1;
                    value = (value as u128 * factors[i].generator as u128 % q as u128) as u64;
                    if tuple[i] < factors[i].order {
                        break;
                    }
                    tuple[i] = 0;
                    // g_i^{order} = 1, so value is already back to its pre-cycle state
                    i += 1;
                }
                if i == r {
                    break;
                }
            }
        }
        debug_assert_eq!(unit_count, arith::totient(q));
        let roots = (0..exponent)
            .map(|k| Complex64::from_polar(1.0, TAU * k as f64 / exponent as f64))
            .collect();
        Ok(Self {
            modulus: q,
            factors,
            exponent,
            dlog,
            roots,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn factors(&self) -> &[CyclicFactor] {
        &self.factors
    }

    /// Exponent of the group: every character value is a power of e^{2πi/exponent}.
    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    pub fn order(&self) -> u64 {
        self.factors.iter().map(|f| f.order).product()
    }

    pub fn is_unit(&self, a: u64) -> bool {
        let a = (a % self.modulus) as usize;
        if self.factors.is_empty() {
            return gcd(a as u64, self.modulus) == 1;
        }
        self.dlog[a * self.factors.len()] != NON_UNIT
    }

    /// Generator exponents of the unit `a`, or `None` for non-units.
    pub fn discrete_log(&self, a: u64) -> Option<Vec<u32>> {
        if !self.is_unit(a) {
            return None;
        }
        let r = self.factors.len();
        let a = (a % self.modulus) as usize;
        Some(self.dlog[a * r..a * r + r].to_vec())
    }

    /// e^{2πik/exponent}.
    pub fn root(&self, k: u64) -> Complex64 {
        self.roots[(k % self.exponent) as usize]
    }

    fn raw_exponent(&self, tuple: &[u32], a: u64) -> Option<u64> {
        let r = self.factors.len();
        let a = (a % self.modulus) as usize;
        if r == 0 {
            return if gcd(a as u64, self.modulus) == 1 { Some(0) } else { None };
        }
        let row = &self.dlog[a * r..a * r + r];
        if row[0] == NON_UNIT {
            return None;
        }
        let m = self.exponent;
        let mut acc = 0u64;
        for ((&j, &e), f) in tuple.iter().zip(row).zip(&self.factors) {
            acc = (acc + j as u64 * e as u64 % f.order * (m / f.order)) % m;
        }
        Some(acc)
    }

    fn tuple_index(&self, tuple: &[u32]) -> usize {
        let mut idx = 0usize;
        let mut radix = 1usize;
        for (&j, f) in tuple.iter().zip(&self.factors) {
            idx += j as usize * radix;
            radix *= f.order as usize;
        }
        idx
    }

    fn tuple_of(&self, mut index: usize) -> Vec<u32> {
        self.factors
            .iter()
            .map(|f| {
                let j = index % f.order as usize;
                index /= f.order as usize;
                j as u32
            })
            .collect()
    }
}

/// Serializable identity of a character: modulus plus generator-exponent tuple.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CharacterId {
    pub modulus: u64,
    pub tuple: Vec<u32>,
}

impl fmt::Display for CharacterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.modulus)?;
        for (i, j) in self.tuple.iter().enumerate() {
            if i > 0 {
                write!(f, ".")?;
            }
            write!(f, "{j}")?;
        }
        Ok(())
    }
}

/// A Dirichlet character mod q, χ(g_i) = e^{2πi j_i / n_i} on the CRT generators.
#[derive(Clone)]
pub struct DirichletCharacter {
    group: Arc<GroupStructure>,
    tuple: Vec<u32>,
    index: usize,
    order: u64,
    conductor: u64,
}

impl fmt::Debug for DirichletCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DirichletCharacter")
            .field("modulus", &self.group.modulus)
            .field("tuple", &self.tuple)
            .field("order", &self.order)
            .field("conductor", &self.conductor)
            .finish()
    }
}

impl PartialEq for DirichletCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.group.modulus == other.group.modulus && self.tuple == other.tuple
    }
}

impl DirichletCharacter {
    /// Character with the given generator-exponent tuple.
    pub fn from_tuple(group: Arc<GroupStructure>, tuple: Vec<u32>) -> Result<Self> {
        if tuple.len() != group.factors.len()
            || tuple.iter().zip(&group.factors).any(|(&j, f)| j as u64 >= f.order)
        {
            return Err(Error::InvalidConfig(format!(
                "tuple {tuple:?} does not index a character mod {}",
                group.modulus
            )));
        }
        let m = group.exponent;
        let g = tuple
            .iter()
            .zip(&group.factors)
            .fold(m, |acc, (&j, f)| gcd(acc, j as u64 * (m / f.order)));
        let order = m / g;
        let index = group.tuple_index(&tuple);
        let mut chi = Self {
            group,
            tuple,
            index,
            order,
            conductor: 0,
        };
        chi.conductor = chi.find_conductor();
        Ok(chi)
    }

    pub fn from_index(group: Arc<GroupStructure>, index: usize) -> Result<Self> {
        let tuple = group.tuple_of(index);
        if index as u64 >= group.order() {
            return Err(Error::InvalidConfig(format!(
                "index {index} out of range mod {}",
                group.modulus
            )));
        }
        Self::from_tuple(group, tuple)
    }

    pub fn principal(q: u64) -> Result<Self> {
        let group = Arc::new(GroupStructure::new(q)?);
        let r = group.factors.len();
        Self::from_tuple(group, vec![0; r])
    }

    pub fn modulus(&self) -> u64 {
        self.group.modulus
    }

    pub fn group(&self) -> &Arc<GroupStructure> {
        &self.group
    }

    pub fn tuple(&self) -> &[u32] {
        &self.tuple
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn id(&self) -> CharacterId {
        CharacterId {
            modulus: self.modulus(),
            tuple: self.tuple.clone(),
        }
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor == self.group.modulus
    }

    pub fn is_principal(&self) -> bool {
        self.order == 1
    }

    /// χ(a) = e^{2πi k/order}; returns k, or `None` when gcd(a, q) > 1.
    pub fn exponent(&self, a: u64) -> Option<u64> {
        let m = self.group.exponent;
        self.group
            .raw_exponent(&self.tuple, a)
            .map(|k| k / (m / self.order))
    }

    /// Exponent in units of the group exponent, e^{2πik/exponent}.
    pub fn raw_exponent(&self, a: u64) -> Option<u64> {
        self.group.raw_exponent(&self.tuple, a)
    }

    pub fn value(&self, a: u64) -> Complex64 {
        match self.raw_exponent(a) {
            Some(k) => self.group.root(k),
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Value at a negative integer, χ(−a).
    pub fn value_neg(&self, a: u64) -> Complex64 {
        let q = self.modulus();
        self.value((q - a % q) % q)
    }

    /// Exponent table over residues 0..q (in units of 1/order).
    pub fn values(&self) -> Vec<Option<u64>> {
        (0..self.modulus()).map(|a| self.exponent(a)).collect()
    }

    /// Complex value table over residues 0..q.
    pub fn value_table(&self) -> Vec<Complex64> {
        (0..self.modulus()).map(|a| self.value(a)).collect()
    }

    /// True when χ(−1) = 1.
    pub fn is_even(&self) -> bool {
        let q = self.modulus();
        self.raw_exponent(q - 1 % q).map_or(true, |k| k == 0)
    }

    /// κ = (1 − χ(−1))/2.
    pub fn parity(&self) -> u32 {
        if self.is_even() {
            0
        } else {
            1
        }
    }

    pub fn conjugate(&self) -> Self {
        let tuple = self
            .tuple
            .iter()
            .zip(&self.group.factors)
            .map(|(&j, f)| ((f.order - j as u64) % f.order) as u32)
            .collect::<Vec<_>>();
        let index = self.group.tuple_index(&tuple);
        Self {
            group: self.group.clone(),
            tuple,
            index,
            order: self.order,
            conductor: self.conductor,
        }
    }

    pub fn is_real(&self) -> bool {
        self.order <= 2
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.modulus() != other.modulus() {
            return Err(Error::InvalidConfig(format!(
                "cannot multiply characters mod {} and mod {}",
                self.modulus(),
                other.modulus()
            )));
        }
        let tuple = self
            .tuple
            .iter()
            .zip(&other.tuple)
            .zip(&self.group.factors)
            .map(|((&a, &b), f)| ((a as u64 + b as u64) % f.order) as u32)
            .collect();
        Self::from_tuple(self.group.clone(), tuple)
    }

    /// Whether χ is trivial on units a ≡ 1 (mod d), i.e. factors through (Z/dZ)*.
    pub fn trivial_mod(&self, d: u64) -> bool {
        let q = self.modulus();
        if q % d != 0 {
            return false;
        }
        let mut a = 1 % q;
        for _ in 0..q / d {
            if let Some(k) = self.raw_exponent(a) {
                if k != 0 {
                    return false;
                }
            }
            a = (a + d) % q;
        }
        true
    }

    // The divisors d | q through which χ factors are closed under gcd, so descending one
    // prime at a time from q reaches the least such d.
    fn find_conductor(&self) -> u64 {
        let mut d = self.modulus();
        'descend: loop {
            for (p, _) in arith::factorize(d) {
                if self.trivial_mod(d / p) {
                    d /= p;
                    continue 'descend;
                }
            }
            return d;
        }
    }

    /// The primitive character mod the conductor that induces χ.
    pub fn induced_primitive(&self) -> Result<Self> {
        let f = self.conductor;
        let q = self.modulus();
        let group = Arc::new(GroupStructure::new(f)?);
        let m_star = group.exponent;
        let m = self.group.exponent;
        let mut tuple = Vec::with_capacity(group.factors.len());
        for factor in &group.factors {
            // a ≡ g (mod f) coprime to q
            let mut a = factor.generator % f;
            while gcd(a, q) != 1 {
                a += f;
            }
            let k = self.raw_exponent(a).expect("lifted generator is a unit");
            // χ*(g) = e^{2πik/m} = e^{2πij/order_g}
            let num = k as u128 * factor.order as u128;
            debug_assert_eq!(num % m as u128, 0);
            tuple.push((num / m as u128) as u32);
        }
        let _ = m_star;
        let star = Self::from_tuple(group, tuple)?;
        if !star.is_primitive() {
            return Err(Error::NotPrimitive {
                modulus: f,
                index: star.index,
                conductor: star.conductor,
            });
        }
        Ok(star)
    }
}

/// The full character group mod q in deterministic tuple order.
#[derive(Debug, Clone)]
pub struct CharacterGroup {
    structure: Arc<GroupStructure>,
    characters: Vec<DirichletCharacter>,
}

impl CharacterGroup {
    pub fn new(q: u64) -> Result<Self> {
        let structure = Arc::new(GroupStructure::new(q)?);
        let n = structure.order() as usize;
        let characters = (0..n)
            .map(|i| DirichletCharacter::from_index(structure.clone(), i))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            structure,
            characters,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.structure.modulus
    }

    pub fn structure(&self) -> &Arc<GroupStructure> {
        &self.structure
    }

    pub fn characters(&self) -> &[DirichletCharacter] {
        &self.characters
    }

    pub fn primitive(&self) -> impl Iterator<Item = &DirichletCharacter> {
        self.characters.iter().filter(|c| c.is_primitive())
    }

    pub fn primitive_count(&self) -> usize {
        self.primitive().count()
    }

    pub fn get(&self, tuple: &[u32]) -> Option<&DirichletCharacter> {
        self.characters.iter().find(|c| c.tuple == tuple)
    }

    /// Σ_χ χ(p)χ̄(r) over the whole group, decided exactly from exponents: the value is φ(q)
    /// when every exponent vanishes and 0 when they are equidistributed over a nontrivial
    /// subgroup of roots of unity. Returns `None` if neither holds (which would be a bug).
    pub fn full_orthogonality_exact(&self, p: u64, r: u64) -> Option<u64> {
        let m = self.structure.exponent;
        let mut hist = vec![0u64; m as usize];
        for chi in &self.characters {
            let (a, b) = (chi.raw_exponent(p)?, chi.raw_exponent(r)?);
            hist[((a + m - b) % m) as usize] += 1;
        }
        let n = self.characters.len() as u64;
        if hist[0] == n {
            return Some(n);
        }
        let support: Vec<usize> = (0..m as usize).filter(|&k| hist[k] > 0).collect();
        let step = support.get(1).copied()?;
        let even = support.iter().enumerate().all(|(i, &k)| k == i * step)
            && support.len() * step == m as usize
            && support.iter().all(|&k| hist[k] == hist[0]);
        even.then_some(0)
    }

    /// Σ*_χ χ(p)χ̄(r) over primitive characters, by direct summation, checked against the
    /// divisor sum Σ_{d | gcd(q, p−r)} φ(d)μ(q/d) to 1e-9.
    pub fn primitive_orthogonality_sum(&self, p: u64, r: u64) -> Result<Complex64> {
        let q = self.modulus();
        let g = gcd(p * r % q, q);
        if gcd(p, q) != 1 || gcd(r, q) != 1 {
            return Err(Error::NotCoprime {
                a: p * r,
                b: q,
                gcd: g.max(gcd(p, q)).max(gcd(r, q)),
            });
        }
        let m = self.structure.exponent;
        let mut direct = Complex64::new(0.0, 0.0);
        for chi in self.primitive() {
            let a = chi.raw_exponent(p).expect("unit");
            let b = chi.raw_exponent(r).expect("unit");
            direct += self.structure.root((a + m - b) % m);
        }
        let divisor = primitive_orthogonality_divisor(q, p, r) as f64;
        let err = (direct - divisor).norm();
        if err > 1e-9 {
            return Err(Error::Inconsistent {
                what: "primitive orthogonality",
                lhs: direct.re,
                rhs: divisor,
                tol: 1e-9,
            });
        }
        Ok(direct)
    }
}

pub fn character_group(q: u64) -> Result<CharacterGroup> {
    CharacterGroup::new(q)
}

pub fn conductor(chi: &DirichletCharacter) -> u64 {
    chi.conductor()
}

/// Divisor form of the primitive orthogonality sum: Σ_{d | q, d | p−r} φ(d)μ(q/d).
pub fn primitive_orthogonality_divisor(q: u64, p: u64, r: u64) -> i64 {
    let g = gcd(q, p.abs_diff(r));
    arith::divisors_of(g)
        .into_iter()
        .map(|d| arith::totient(d) as i64 * arith::moebius(q / d))
        .sum()
}

pub fn primitive_orthogonality_sum(q: u64, p: u64, r: u64) -> Result<Complex64> {
    CharacterGroup::new(q)?.primitive_orthogonality_sum(p, r)
}

fn is_prime(n: u64) -> bool {
    n >= 2 && arith::factorize(n).len() == 1 && arith::factorize(n)[0].1 == 1
}

fn check_primes(p: u64, r: u64) -> Result<()> {
    for x in [p, r] {
        if !is_prime(x) {
            return Err(Error::InvalidConfig(format!("{x} is not prime")));
        }
    }
    Ok(())
}

/// Per-modulus data for the family q ∈ (Q, 2Q) weighted by W(q/Q)/φ(q), shared by every
/// Δ(p,r) evaluation at one scale.
pub struct DeltaContext {
    scale: f64,
    tables: ArithmeticTables,
    moduli: Vec<u64>,
    weights: Vec<f64>,
}

impl DeltaContext {
    pub fn new(scale: f64, w: &SmoothWeight) -> Result<Self> {
        let (lo, hi) = w.support();
        if !(lo >= 1.0 && hi <= 2.0 && lo < hi) {
            return Err(Error::InvalidConfig(format!(
                "weight support ({lo}, {hi}) is not inside (1, 2)"
            )));
        }
        if !(scale.is_finite() && scale >= 0.0) {
            return Err(Error::InvalidConfig(format!("scale Q = {scale} must be nonnegative")));
        }
        let top = (2.0 * scale).ceil().max(2.0) as u64;
        let tables = ArithmeticTables::build(top)?;
        let mut moduli = Vec::new();
        let mut weights = Vec::new();
        for q in 1..=top {
            let x = q as f64 / scale;
            if x > lo && x < hi {
                let wq = w.w(x);
                if wq != 0.0 {
                    moduli.push(q);
                    weights.push(wq / tables.totient(q)? as f64);
                }
            }
        }
        Ok(Self {
            scale,
            tables,
            moduli,
            weights,
        })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn tables(&self) -> &ArithmeticTables {
        &self.tables
    }

    /// Moduli carrying nonzero weight together with W(q/Q)/φ(q).
    pub fn weighted_moduli(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.moduli.iter().copied().zip(self.weights.iter().copied())
    }

    fn mu(&self, n: u64) -> i64 {
        self.tables.moebius(n).expect("within table") as i64
    }

    fn phi(&self, n: u64) -> i64 {
        self.tables.totient(n).expect("within table") as i64
    }

    fn orthogonality(&self, q: u64, diff: u64) -> i64 {
        let g = gcd(q, diff);
        if g == 1 {
            return self.mu(q);
        }
        if g == q {
            return self.tables.primitive_count(q).expect("within table") as i64;
        }
        self.tables
            .divisors(g)
            .expect("within table")
            .into_iter()
            .map(|d| self.phi(d) * self.mu(q / d))
            .sum()
    }

    /// Δ(p,r) via the divisor form of primitive orthogonality.
    pub fn delta(&self, p: u64, r: u64) -> f64 {
        let pr_odd = |q: u64| q % p != 0 && q % r != 0;
        let diff = p.abs_diff(r);
        let mut acc = 0.0;
        for (q, w) in self.weighted_moduli() {
            if pr_odd(q) {
                acc += w * self.orthogonality(q, diff) as f64;
            }
        }
        acc
    }

    /// (U, L): the terms n = cd of Δ(p,r) with c > C and with c ≤ C.
    pub fn split(&self, p: u64, r: u64, cut: f64) -> (f64, f64) {
        let diff = p.abs_diff(r);
        let (mut upper, mut lower) = (0.0, 0.0);
        for (q, w) in self.weighted_moduli() {
            if q % p == 0 || q % r == 0 {
                continue;
            }
            for d in self.tables.divisors(q).expect("within table") {
                if diff % d != 0 {
                    continue;
                }
                let c = q / d;
                let term = w * (self.phi(d) * self.mu(c)) as f64;
                if c as f64 > cut {
                    upper += term;
                } else {
                    lower += term;
                }
            }
        }
        (upper, lower)
    }

    /// (Σ_{c>C}, Σ_{c≤C}) of μ(c)W(cd/Q)/φ(cd) over all c, d with (cd, pr) = 1.
    pub fn mobius_flip(&self, p: u64, r: u64, cut: f64) -> (f64, f64) {
        let (mut upper, mut lower) = (0.0, 0.0);
        for (q, w) in self.weighted_moduli() {
            if q % p == 0 || q % r == 0 {
                continue;
            }
            for c in self.tables.divisors(q).expect("within table") {
                let term = w * self.mu(c) as f64;
                if c as f64 > cut {
                    upper += term;
                } else {
                    lower += term;
                }
            }
        }
        (upper, lower)
    }

    /// Δ(p,r) by summing χ(p)χ̄(r) over primitive characters of each modulus.
    pub fn delta_characters(&self, p: u64, r: u64) -> Result<f64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (q, w) in self.weighted_moduli() {
            if q % p == 0 || q % r == 0 {
                continue;
            }
            let group = CharacterGroup::new(q)?;
            let m = group.structure.exponent;
            let mut inner = Complex64::new(0.0, 0.0);
            for chi in group.primitive() {
                let a = chi.raw_exponent(p).expect("unit");
                let b = chi.raw_exponent(r).expect("unit");
                inner += group.structure.root((a + m - b) % m);
            }
            acc += inner * w;
        }
        if acc.im.abs() >= 1e-9 {
            return Err(Error::Inconsistent {
                what: "imaginary part of delta",
                lhs: acc.im,
                rhs: 0.0,
                tol: 1e-9,
            });
        }
        Ok(acc.re)
    }
}

/// Δ(p,r) = Σ_{(q,pr)=1} (W(q/Q)/φ(q)) Σ*_χ χ(p)χ̄(r).
pub fn delta_pr(p: u64, r: u64, scale: f64, w: &SmoothWeight) -> Result<f64> {
    check_primes(p, r)?;
    Ok(DeltaContext::new(scale, w)?.delta(p, r))
}

/// The (U, L) partition of Δ(p,r) at cut C; U + L = Δ for every C ≥ 0.
pub fn delta_split(p: u64, r: u64, scale: f64, w: &SmoothWeight, cut: f64) -> Result<(f64, f64)> {
    check_primes(p, r)?;
    if cut < 0.0 {
        return Err(Error::InvalidConfig(format!("cut C = {cut} must be nonnegative")));
    }
    Ok(DeltaContext::new(scale, w)?.split(p, r, cut))
}

/// Both sides of the Möbius flip Σ_{c>C} = −Σ_{c≤C}, valid whenever 1 ∉ (Q, 2Q).
pub fn mobius_flip(p: u64, r: u64, scale: f64, w: &SmoothWeight, cut: f64) -> Result<(f64, f64)> {
    check_primes(p, r)?;
    Ok(DeltaContext::new(scale, w)?.mobius_flip(p, r, cut))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn modulus_one() {
        let g = CharacterGroup::new(1).unwrap();
        assert_eq!(g.characters().len(), 1);
        let chi = &g.characters()[0];
        assert!(chi.is_principal() && chi.is_primitive());
        assert_eq!(chi.conductor(), 1);
        assert_eq!(chi.value(0), Complex64::new(1.0, 0.0));
        assert_eq!(chi.value(17), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn zero_modulus_rejected() {
        assert!(CharacterGroup::new(0).is_err());
    }

    #[test]
    fn order_multiset_mod_5() {
        let g = CharacterGroup::new(5).unwrap();
        let mut orders: Vec<u64> = g.characters().iter().map(|c| c.order()).collect();
        orders.sort_unstable();
        assert_eq!(orders, vec![1, 2, 4, 4]);
    }

    #[test]
    fn primitive_count_mod_8() {
        let g = CharacterGroup::new(8).unwrap();
        assert_eq!(g.characters().len(), 4);
        assert_eq!(g.primitive_count(), 2);
    }

    #[test]
    fn conductor_examples() {
        let g3 = CharacterGroup::new(3).unwrap();
        let nontrivial = g3.characters().iter().find(|c| !c.is_principal()).unwrap();
        assert_eq!(nontrivial.conductor(), 3);
        let g6 = CharacterGroup::new(6).unwrap();
        let induced = g6.characters().iter().find(|c| !c.is_principal()).unwrap();
        assert_eq!(induced.conductor(), 3);
        assert!(!induced.is_primitive());
        let star = induced.induced_primitive().unwrap();
        assert_eq!(star.modulus(), 3);
        for a in 1..30u64 {
            if gcd(a, 6) == 1 {
                assert!((star.value(a) - induced.value(a)).norm() < 1e-15);
            }
        }
        for q in [7u64, 12, 30] {
            let g = CharacterGroup::new(q).unwrap();
            assert_eq!(g.characters()[0].conductor(), 1);
        }
    }

    #[test]
    fn conductor_brute_force() {
        // least d | q with χ trivial on units ≡ 1 mod d, searched over every divisor
        for q in 1..=60u64 {
            let g = CharacterGroup::new(q).unwrap();
            for chi in g.characters() {
                let brute = arith::divisors_of(q)
                    .into_iter()
                    .find(|&d| chi.trivial_mod(d))
                    .unwrap();
                assert_eq!(chi.conductor(), brute, "q={q} tuple={:?}", chi.tuple());
            }
        }
    }

    #[test]
    fn group_axioms_small_moduli() {
        for q in 1..=50u64 {
            let g = CharacterGroup::new(q).unwrap();
            assert_eq!(g.characters().len() as u64, arith::totient(q));
            for chi in g.characters() {
                assert_eq!(chi.exponent(1), Some(0));
                for a in 0..q {
                    let unit = gcd(a, q) == 1;
                    assert_eq!(chi.exponent(a).is_some(), unit);
                    if unit {
                        // χ(a)^order = 1
                        let k = chi.exponent(a).unwrap();
                        assert!(k < chi.order());
                    }
                }
                for a in 1..q {
                    for b in 1..q {
                        if gcd(a * b, q) == 1 {
                            let ab = chi.exponent(a * b % q).unwrap();
                            let sum = (chi.exponent(a).unwrap() + chi.exponent(b).unwrap()) % chi.order();
                            assert_eq!(ab, sum);
                        }
                    }
                }
                let prod = chi.mul(&chi.conjugate()).unwrap();
                assert!(prod.is_principal());
                assert!(g.get(chi.conjugate().tuple()).is_some());
            }
        }
    }

    #[test]
    fn full_group_orthogonality_exact() {
        for q in 1..=50u64 {
            let g = CharacterGroup::new(q).unwrap();
            for p in 1..q.max(2) {
                for r in 1..q.max(2) {
                    if gcd(p * r, q) != 1 {
                        continue;
                    }
                    let expected = if (p + q - r % q) % q == 0 { arith::totient(q) } else { 0 };
                    assert_eq!(g.full_orthogonality_exact(p, r), Some(expected), "q={q} p={p} r={r}");
                }
            }
        }
    }

    #[test]
    fn primitive_counts_match_divisor_formula() {
        let t = ArithmeticTables::build(200).unwrap();
        let mut total = 0u64;
        let mut enumerated = 0u64;
        for q in 1..=200u64 {
            let g = CharacterGroup::new(q).unwrap();
            let count = g.primitive_count() as u64;
            assert_eq!(count, t.primitive_count(q).unwrap(), "q={q}");
            total += t.primitive_count(q).unwrap();
            enumerated += count;
        }
        assert_eq!(total, enumerated);
    }

    #[test]
    fn orthogonality_examples() {
        assert_eq!(primitive_orthogonality_sum(7, 3, 3).unwrap().re.round() as u64, 5);
        let v = primitive_orthogonality_sum(5, 2, 3).unwrap();
        assert!((v - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
        let v = primitive_orthogonality_sum(4, 5, 1).unwrap();
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(matches!(
            primitive_orthogonality_sum(6, 3, 5),
            Err(Error::NotCoprime { .. })
        ));
    }

    #[test]
    fn delta_trivial_cases() {
        let w = SmoothWeight::bump();
        assert_eq!(delta_pr(3, 5, 0.4, &w).unwrap(), 0.0);
        let ctx = DeltaContext::new(200.0, &w).unwrap();
        let (u, l) = ctx.split(3, 7, 400.0);
        assert_eq!(u, 0.0);
        assert!((l - ctx.delta(3, 7)).abs() < 1e-12);
        let (u, l) = ctx.split(3, 7, 0.0);
        assert_eq!(l, 0.0);
        assert!((u - ctx.delta(3, 7)).abs() < 1e-12);
        assert!(delta_pr(4, 5, 10.0, &w).is_err());
    }

    #[test]
    fn delta_diagonal_two_orders() {
        let w = SmoothWeight::bump();
        let ctx = DeltaContext::new(60.0, &w).unwrap();
        let t = ctx.tables();
        for p in [2u64, 3, 11, 61] {
            let direct: f64 = (61..120u64)
                .filter(|q| q % p != 0)
                .map(|q| {
                    w.w(q as f64 / 60.0) * t.primitive_count(q).unwrap() as f64
                        / t.totient(q).unwrap() as f64
                })
                .sum();
            assert!((ctx.delta(p, p) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn delta_matches_character_route() {
        let w = SmoothWeight::bump();
        let ctx = DeltaContext::new(20.0, &w).unwrap();
        for &(p, r) in &[(2u64, 3u64), (5, 5), (7, 19), (13, 2)] {
            let a = ctx.delta(p, r);
            let b = ctx.delta_characters(p, r).unwrap();
            assert!((a - b).abs() < 1e-9, "{p} {r}: {a} vs {b}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn delta_symmetric_and_split_exact(pi in 0usize..15, ri in 0usize..15, scale in 1.0f64..150.0, cut in 0.0f64..300.0) {
            const PRIMES: [u64; 15] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47];
            let (p, r) = (PRIMES[pi], PRIMES[ri]);
            let w = SmoothWeight::bump();
            let ctx = DeltaContext::new(scale, &w).unwrap();
            let d = ctx.delta(p, r);
            prop_assert!((d - ctx.delta(r, p)).abs() < 1e-12);
            let (u, l) = ctx.split(p, r, cut);
            prop_assert!((u + l - d).abs() < 1e-9);
            let (hi, lo) = ctx.mobius_flip(p, r, cut);
            prop_assert!((hi + lo).abs() < 1e-9);
        }
    }
}
