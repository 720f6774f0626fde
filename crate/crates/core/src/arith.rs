//! Sieve-backed arithmetic tables: primes, von Mangoldt, Möbius, Euler totient.

use crate::error::{Error, Result};

/// Arithmetic functions tabulated on `1..=limit` from a single smallest-prime-factor sieve.
#[derive(Debug, Clone)]
pub struct ArithmeticTables {
    limit: u64,
    spf: Vec<u32>,
    mangoldt: Vec<f64>,
    moebius: Vec<i8>,
    totient: Vec<u32>,
    primes: Vec<u64>,
}

impl ArithmeticTables {
    /// Builds every table up to `limit` (inclusive).
    pub fn build(limit: u64) -> Result<Self> {
        if limit < 2 {
            return Err(Error::InvalidConfig(format!(
                "table limit must be at least 2, got {limit}"
            )));
        }
        if limit > u32::MAX as u64 {
            return Err(Error::OutOfRange {
                what: "table limit",
                value: limit as f64,
                limit: u32::MAX as f64,
            });
        }
        let n = limit as usize;
        let mut spf = vec![0u32; n + 1];
        let mut primes = Vec::new();
        // linear sieve: every composite is struck exactly once by its smallest prime factor
        for i in 2..=n {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u64);
            }
            let si = spf[i] as u64;
            for &p in &primes {
                let m = p as usize * i;
                if p > si || m > n {
                    break;
                }
                spf[m] = p as u32;
            }
        }

        let mut mangoldt = vec![0.0; n + 1];
        let mut moebius = vec![0i8; n + 1];
        let mut totient = vec![0u32; n + 1];
        moebius[1] = 1;
        totient[1] = 1;
        for i in 2..=n {
            let p = spf[i] as usize;
            let rest = i / p;
            if rest % p == 0 {
                moebius[i] = 0;
                totient[i] = totient[rest] * p as u32;
            } else {
                moebius[i] = -moebius[rest];
                totient[i] = totient[rest] * (p as u32 - 1);
            }
            // prime power iff stripping every copy of p leaves 1
            let mut m = i;
            while m % p == 0 {
                m /= p;
            }
            if m == 1 {
                mangoldt[i] = (p as f64).ln();
            }
        }

        Ok(Self {
            limit,
            spf,
            mangoldt,
            moebius,
            totient,
            primes,
        })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Primes in the half-open range `(lo, hi]`.
    pub fn primes_in(&self, lo: u64, hi: u64) -> &[u64] {
        let start = self.primes.partition_point(|&p| p <= lo);
        let end = self.primes.partition_point(|&p| p <= hi);
        &self.primes[start..end.max(start)]
    }

    fn check(&self, n: u64) -> Result<usize> {
        if n == 0 || n > self.limit {
            return Err(Error::OutOfRange {
                what: "argument",
                value: n as f64,
                limit: self.limit as f64,
            });
        }
        Ok(n as usize)
    }

    pub fn mangoldt(&self, n: u64) -> Result<f64> {
        Ok(self.mangoldt[self.check(n)?])
    }

    pub fn moebius(&self, n: u64) -> Result<i8> {
        Ok(self.moebius[self.check(n)?])
    }

    pub fn totient(&self, n: u64) -> Result<u64> {
        Ok(self.totient[self.check(n)?] as u64)
    }

    /// Raw von Mangoldt table indexed by `n` (entry 0 is unused).
    pub fn mangoldt_table(&self) -> &[f64] {
        &self.mangoldt
    }

    pub fn is_prime(&self, n: u64) -> Result<bool> {
        let i = self.check(n)?;
        Ok(i >= 2 && self.spf[i] as usize == i)
    }

    /// Prime factorization as `(p, k)` pairs in increasing order of `p`.
    pub fn factor(&self, n: u64) -> Result<Vec<(u64, u32)>> {
        let mut m = self.check(n)?;
        let mut out: Vec<(u64, u32)> = Vec::new();
        while m > 1 {
            let p = self.spf[m] as u64;
            match out.last_mut() {
                Some((q, k)) if *q == p => *k += 1,
                _ => out.push((p, 1)),
            }
            m /= p as usize;
        }
        Ok(out)
    }

    /// Complete divisor list of `n`, strictly increasing.
    pub fn divisors(&self, n: u64) -> Result<Vec<u64>> {
        let factors = self.factor(n)?;
        let mut divs = vec![1u64];
        for (p, k) in factors {
            let len = divs.len();
            let mut pk = 1;
            for _ in 0..k {
                pk *= p;
                for i in 0..len {
                    divs.push(divs[i] * pk);
                }
            }
        }
        divs.sort_unstable();
        Ok(divs)
    }

    /// Number of primitive characters modulo `q`, as the divisor sum
    /// `φ*(q) = Σ_{cd=q} φ(d) μ(c)`.
    pub fn primitive_count(&self, q: u64) -> Result<u64> {
        let mut total: i64 = 0;
        for d in self.divisors(q)? {
            total += self.totient(d)? as i64 * self.moebius(q / d)? as i64;
        }
        debug_assert!(total >= 0);
        Ok(total as u64)
    }
}

/// Convenience wrapper for [`ArithmeticTables::build`].
pub fn build_tables(limit: u64) -> Result<ArithmeticTables> {
    ArithmeticTables::build(limit)
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        0
    } else {
        a / gcd(a, b) * b
    }
}

pub fn mod_pow(base: u64, mut exp: u64, modulus: u64) -> u64 {
    if modulus == 1 {
        return 0;
    }
    let m = modulus as u128;
    let mut acc: u128 = 1;
    let mut b = base as u128 % m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

/// Prime factorization by trial division, for arguments beyond any table.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut k = 0;
            while n % p == 0 {
                n /= p;
                k += 1;
            }
            out.push((p, k));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn totient(n: u64) -> u64 {
    factorize(n)
        .into_iter()
        .fold(n, |acc, (p, _)| acc / p * (p - 1))
}

pub fn moebius(n: u64) -> i64 {
    let f = factorize(n);
    if f.iter().any(|&(_, k)| k > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Divisors of `n` in increasing order, by trial division.
pub fn divisors_of(n: u64) -> Vec<u64> {
    let mut divs = vec![1u64];
    for (p, k) in factorize(n) {
        let len = divs.len();
        let mut pk = 1;
        for _ in 0..k {
            pk *= p;
            for i in 0..len {
                divs.push(divs[i] * pk);
            }
        }
    }
    divs.sort_unstable();
    divs
}

/// Euler totient for every `n <= limit`, without the other tables.
pub fn totient_sieve(limit: usize) -> Vec<u32> {
    let mut phi: Vec<u32> = (0..=limit as u32).collect();
    for i in 2..=limit {
        if phi[i] == i as u32 {
            let mut j = i;
            while j <= limit {
                phi[j] -= phi[j] / i as u32;
                j += i;
            }
        }
    }
    phi
}

/// Primes up to `limit` by a plain Eratosthenes bitmap.
pub fn prime_sieve(limit: usize) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; limit + 1];
    let mut out = Vec::with_capacity(limit / 10);
    for i in 2..=limit {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= limit {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tables() -> ArithmeticTables {
        ArithmeticTables::build(10_000).unwrap()
    }

    #[test]
    fn small_values() {
        let t = tables();
        assert!((t.mangoldt(9).unwrap() - 3f64.ln()).abs() < 1e-15);
        assert_eq!(t.mangoldt(12).unwrap(), 0.0);
        assert_eq!(t.mangoldt(1).unwrap(), 0.0);
        assert_eq!(t.moebius(30).unwrap(), -1);
        assert_eq!(t.moebius(12).unwrap(), 0);
        assert_eq!(t.totient(10).unwrap(), 4);
        assert_eq!(t.totient(1).unwrap(), 1);
    }

    #[test]
    fn rejects_tiny_limit() {
        assert!(ArithmeticTables::build(0).is_err());
        assert!(ArithmeticTables::build(1).is_err());
        assert!(ArithmeticTables::build(2).is_ok());
    }

    #[test]
    fn out_of_range_lookup() {
        let t = ArithmeticTables::build(100).unwrap();
        assert!(t.totient(101).is_err());
        assert!(t.primitive_count(0).is_err());
    }

    #[test]
    fn divisor_lists() {
        let t = tables();
        assert_eq!(t.divisors(1).unwrap(), vec![1]);
        assert_eq!(t.divisors(12).unwrap(), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(t.divisors(97).unwrap(), vec![1, 97]);
    }

    #[test]
    fn primitive_counts() {
        let t = tables();
        assert_eq!(t.primitive_count(1).unwrap(), 1);
        // φ(4)μ(1) + φ(2)μ(2) + φ(1)μ(4) = 2 - 1 + 0
        assert_eq!(t.primitive_count(4).unwrap(), 1);
        assert_eq!(t.primitive_count(8).unwrap(), 2);
    }

    #[test]
    fn primitive_count_vanishes_exactly_at_2_mod_4() {
        let t = tables();
        for q in 1..=10_000u64 {
            let c = t.primitive_count(q).unwrap();
            assert_eq!(c == 0, q % 4 == 2, "q = {q}");
        }
    }

    #[test]
    fn totient_and_moebius_divisor_sums() {
        let t = ArithmeticTables::build(3000).unwrap();
        for n in 1..=3000u64 {
            let divs = t.divisors(n).unwrap();
            let phi_sum: u64 = divs.iter().map(|&d| t.totient(d).unwrap()).sum();
            assert_eq!(phi_sum, n);
            let mu_sum: i64 = divs.iter().map(|&d| t.moebius(d).unwrap() as i64).sum();
            assert_eq!(mu_sum, (n == 1) as i64);
        }
    }

    #[test]
    fn mangoldt_positive_iff_prime_power() {
        let t = tables();
        for n in 2..=10_000u64 {
            let f = t.factor(n).unwrap();
            let lam = t.mangoldt(n).unwrap();
            if f.len() == 1 {
                assert!((lam - (f[0].0 as f64).ln()).abs() < 1e-14);
            } else {
                assert_eq!(lam, 0.0);
            }
        }
    }

    #[test]
    fn standalone_sieves_agree_with_tables() {
        let t = tables();
        let phi = totient_sieve(10_000);
        for n in 1..=10_000u64 {
            assert_eq!(phi[n as usize] as u64, t.totient(n).unwrap());
        }
        assert_eq!(prime_sieve(10_000), t.primes());
        assert_eq!(t.primes_in(10, 30), &[11, 13, 17, 19, 23, 29]);
    }

    #[test]
    fn modular_helpers() {
        assert_eq!(gcd(12, 18), 6);
        assert_eq!(lcm(4, 6), 12);
        assert_eq!(mod_pow(3, 4, 7), 4);
        assert_eq!(mod_pow(5, 0, 1), 0);
    }

    #[test]
    fn trial_division_matches_tables() {
        let t = ArithmeticTables::build(5000).unwrap();
        for n in 1..=5000u64 {
            assert_eq!(factorize(n), t.factor(n).unwrap());
            assert_eq!(totient(n), t.totient(n).unwrap());
            assert_eq!(moebius(n), t.moebius(n).unwrap() as i64);
            assert_eq!(divisors_of(n), t.divisors(n).unwrap());
        }
    }
}
