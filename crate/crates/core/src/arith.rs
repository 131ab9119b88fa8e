//! Integer number theory: factorization, φ, μ, squarefree divisor counts,
//! divisor lattices, and the analytic bounds on φ(n)/n and W(n).

use std::sync::OnceLock;

use num_integer::Integer;

use crate::error::{Error, Result};

/// e^γ, γ the Euler–Mascheroni constant.
pub const EXP_GAMMA: f64 = 1.781_072_417_990_197_9;

/// The single n ≥ 3 for which the φ(n)/n lower bound fails.
pub const PHI_BOUND_EXCEPTION: u64 = 223_092_870;

const TRIAL_LIMIT: u64 = 1_000_000;
const MAX_INPUT: u64 = (1 << 63) - 1;

/// Canonical prime factorization of a positive integer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    value: u64,
    factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn value(&self) -> u64 {
        self.value
    }

    /// `(prime, exponent)` pairs with strictly increasing primes.
    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    pub fn num_distinct_primes(&self) -> usize {
        self.factors.len()
    }

    pub fn phi(&self) -> u64 {
        self.factors
            .iter()
            .fold(1u64, |acc, &(p, e)| acc * (p - 1) * p.pow(e - 1))
    }

    pub fn moebius(&self) -> i8 {
        if self.factors.iter().any(|&(_, e)| e > 1) {
            0
        } else if self.factors.len() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// W(n) = 2^ω(n).
    pub fn squarefree_divisor_count(&self) -> u64 {
        1u64 << self.factors.len()
    }

    /// Product of the distinct primes.
    pub fn radical(&self) -> u64 {
        self.primes().product()
    }

    /// All divisors, or only the squarefree ones, in increasing order.
    pub fn divisors(&self, squarefree_only: bool) -> Vec<u64> {
        let mut out = vec![1u64];
        for &(p, e) in &self.factors {
            let top = if squarefree_only { 1 } else { e };
            let mut next = Vec::with_capacity(out.len() * (top as usize + 1));
            for &d in &out {
                let mut pk = 1u64;
                for _ in 0..=top {
                    next.push(d * pk);
                    pk = pk.saturating_mul(p);
                }
            }
            out = next;
        }
        out.sort_unstable();
        out
    }
}

fn small_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| primes_up_to(TRIAL_LIMIT))
}

/// Sieve of Eratosthenes.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Brent's variant of Pollard rho; `n` must be an odd composite.
fn pollard_rho(n: u64) -> u64 {
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = x.abs_diff(y).gcd(&n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

fn split_large(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let d = pollard_rho(n);
    split_large(d, out);
    split_large(n / d, out);
}

pub fn factorize(n: u64) -> Result<Factorization> {
    if n == 0 {
        return Err(Error::invalid("cannot factor 0"));
    }
    if n > MAX_INPUT {
        return Err(Error::invalid(format!("{n} exceeds 2^63-1")));
    }
    let mut rest = n;
    let mut factors = Vec::new();
    for &p in small_primes() {
        if p * p > rest {
            break;
        }
        if rest % p == 0 {
            let mut e = 0;
            while rest % p == 0 {
                rest /= p;
                e += 1;
            }
            factors.push((p, e));
        }
    }
    if rest > 1 {
        let mut big = Vec::new();
        split_large(rest, &mut big);
        big.sort_unstable();
        for p in big {
            match factors.last_mut() {
                Some((last, e)) if *last == p => *e += 1,
                _ => factors.push((p, 1)),
            }
        }
    }
    Ok(Factorization { value: n, factors })
}

fn factor_positive(n: u64, op: &str) -> Result<Factorization> {
    if n == 0 {
        return Err(Error::invalid(format!("{op} requires n >= 1")));
    }
    factorize(n)
}

pub fn euler_phi(n: u64) -> Result<u64> {
    Ok(factor_positive(n, "euler_phi")?.phi())
}

pub fn moebius(n: u64) -> Result<i8> {
    Ok(factor_positive(n, "moebius")?.moebius())
}

/// W(t): number of squarefree divisors of t.
pub fn squarefree_divisor_count(t: u64) -> Result<u64> {
    Ok(factor_positive(t, "squarefree_divisor_count")?.squarefree_divisor_count())
}

pub fn divisors(n: u64, squarefree_only: bool) -> Result<Vec<u64>> {
    Ok(factor_positive(n, "divisors")?.divisors(squarefree_only))
}

/// Lower bound on φ(n)/n from the Rosser–Schoenfeld estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiRatioBound {
    pub value: f64,
    /// n is the one integer for which the bound is known to fail.
    pub exceptional: bool,
}

/// 2·ln ln n / (2·e^γ·(ln ln n)² + 5).
pub fn phi_ratio_lower_bound(n: u64) -> Result<PhiRatioBound> {
    if n < 3 {
        return Err(Error::invalid(format!(
            "phi_ratio_lower_bound requires n >= 3, got {n}"
        )));
    }
    let ll = (n as f64).ln().ln();
    Ok(PhiRatioBound {
        value: 2.0 * ll / (2.0 * EXP_GAMMA * ll * ll + 5.0),
        exceptional: n == PHI_BOUND_EXCEPTION,
    })
}

/// t^(0.96 / ln ln t), an upper bound for W(t − 1).
pub fn w_upper_bound(t: f64) -> Result<f64> {
    if !(t >= 3.0) {
        return Err(Error::invalid(format!(
            "w_upper_bound requires t >= 3, got {t}"
        )));
    }
    Ok(t.powf(0.96 / t.ln().ln()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FermatPrimeTest {
    pub is_fermat_prime: bool,
    /// `l` with q = 2^(2^l) + 1, when q is a Fermat prime.
    pub l: Option<u32>,
}

impl FermatPrimeTest {
    /// q is a Fermat prime with l > 0, i.e. q > 3.
    pub fn l_positive(&self) -> bool {
        matches!(self.l, Some(l) if l > 0)
    }
}

pub fn is_fermat_prime(q: u64) -> FermatPrimeTest {
    let no = FermatPrimeTest {
        is_fermat_prime: false,
        l: None,
    };
    if q < 3 || !is_prime(q) {
        return no;
    }
    let m = q - 1;
    if !m.is_power_of_two() {
        return no;
    }
    let k = m.trailing_zeros();
    if !k.is_power_of_two() {
        return no;
    }
    FermatPrimeTest {
        is_fermat_prime: true,
        l: Some(k.trailing_zeros()),
    }
}

/// Product of the primes ≤ n.
pub fn primorial(n: u64) -> u128 {
    primes_up_to(n).into_iter().map(u128::from).product()
}

/// Decomposes q = p^n, failing when q is not a prime power.
pub fn prime_power(q: u64) -> Result<(u64, u32)> {
    if q < 2 {
        return Err(Error::invalid(format!("{q} is not a prime power")));
    }
    let f = factorize(q)?;
    match f.factors() {
        [(p, n)] => Ok((*p, *n)),
        _ => Err(Error::invalid(format!("{q} is not a prime power"))),
    }
}

/// Odd prime powers in `[lo, hi]`, increasing.
pub fn odd_prime_powers(lo: u64, hi: u64) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::new();
    for p in primes_up_to(hi).into_iter().skip(1) {
        let mut q = p;
        loop {
            if q >= lo {
                out.push(q);
            }
            match q.checked_mul(p) {
                Some(next) if next <= hi => q = next,
                _ => break,
            }
        }
    }
    out.sort_unstable();
    out
}

/// All prime powers in `[2, hi]`, increasing.
pub fn prime_powers_up_to(hi: u64) -> Vec<u64> {
    let mut out = odd_prime_powers(2, hi);
    let mut q = 2u64;
    while q <= hi {
        out.push(q);
        q *= 2;
    }
    out.sort_unstable();
    out
}
