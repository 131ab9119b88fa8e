//! Table-driven arithmetic in GF(p^n).
//!
//! A [`FieldCtx`] is fully materialized at construction: the defining
//! modulus, a primitive element `g`, and exp/log/Zech tables over F_q^*.
//! Nonzero elements are stored as their discrete logarithm base `g`, so
//! multiplication, inversion and order queries are exponent arithmetic and
//! addition is a single Zech-table lookup.
//!
//! Elements are also addressed by their *integer encoding*: the coefficient
//! vector `c_0 + c_1 θ + … + c_{n-1} θ^{n-1}` (θ a root of the modulus) read
//! as the base-p integer `c_0 + c_1 p + … + c_{n-1} p^{n-1}`. For prime
//! fields this is the usual residue.

use std::fmt;

use num_integer::Integer;
use serde::Serialize;

use crate::arith::{factorize, is_prime, Factorization};
use crate::error::{Error, Result};

/// Default upper limit on q; tables take about 12 bytes per element.
pub const DEFAULT_CAP: u64 = 1 << 24;

const ZERO_TAG: u32 = u32::MAX;

/// An element of a [`FieldCtx`]: zero, or `g^k` with `k` in `[0, q-2]`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FqElem(u32);

impl FqElem {
    pub const ZERO: FqElem = FqElem(ZERO_TAG);
    pub const ONE: FqElem = FqElem(0);

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == ZERO_TAG
    }

    /// Discrete logarithm base the field's generator; `None` for zero.
    #[inline]
    pub fn exponent(self) -> Option<u32> {
        (!self.is_zero()).then_some(self.0)
    }
}

impl fmt::Debug for FqElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exponent() {
            None => write!(f, "0"),
            Some(k) => write!(f, "g^{k}"),
        }
    }
}

/// Polynomials over GF(p), constant term first, no trailing zeros.
mod gfp {
    pub(super) type Poly = Vec<u64>;

    pub(super) fn trim(a: &mut Poly) {
        while a.last() == Some(&0) {
            a.pop();
        }
    }

    pub(super) fn sub(a: &[u64], b: &[u64], p: u64) -> Poly {
        let mut out = vec![0; a.len().max(b.len())];
        for (i, o) in out.iter_mut().enumerate() {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            *o = (x + p - y) % p;
        }
        trim(&mut out);
        out
    }

    fn inv_mod(a: u64, p: u64) -> u64 {
        super::pow_u64(a, p - 2, p)
    }

    /// `a mod f`, `f` monic or not.
    pub(super) fn rem(a: &[u64], f: &[u64], p: u64) -> Poly {
        let mut r = a.to_vec();
        trim(&mut r);
        let df = f.len() - 1;
        let lead_inv = inv_mod(f[df], p);
        while r.len() > df {
            let top = r.len() - 1;
            let c = r[top] * lead_inv % p;
            if c != 0 {
                let shift = top - df;
                for (i, &fc) in f.iter().enumerate() {
                    r[shift + i] = (r[shift + i] + p - c * fc % p) % p;
                }
            }
            r.pop();
            trim(&mut r);
        }
        r
    }

    pub(super) fn mul_mod(a: &[u64], b: &[u64], f: &[u64], p: u64) -> Poly {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut prod = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % p;
            }
        }
        rem(&prod, f, p)
    }

    pub(super) fn pow_mod(a: &[u64], mut e: u128, f: &[u64], p: u64) -> Poly {
        let mut acc = rem(&[1], f, p);
        let mut base = rem(a, f, p);
        while e > 0 {
            if e & 1 == 1 {
                acc = mul_mod(&acc, &base, f, p);
            }
            base = mul_mod(&base, &base, f, p);
            e >>= 1;
        }
        acc
    }

    pub(super) fn gcd(a: &[u64], b: &[u64], p: u64) -> Poly {
        let mut x = a.to_vec();
        let mut y = b.to_vec();
        trim(&mut x);
        trim(&mut y);
        while !y.is_empty() {
            let r = rem(&x, &y, p);
            x = y;
            y = r;
        }
        x
    }

    /// Rabin's test.
    pub(super) fn is_irreducible(f: &[u64], p: u64, prime_divisors_of_n: &[u64]) -> bool {
        let n = f.len() - 1;
        if n == 1 {
            return true;
        }
        if f[0] == 0 {
            return false;
        }
        let x: Poly = vec![0, 1];
        // frob[k] = x^(p^k) mod f
        let mut frob = vec![rem(&x, f, p)];
        for _ in 0..n {
            let last = frob.last().unwrap();
            frob.push(pow_mod(last, p as u128, f, p));
        }
        if frob[n] != rem(&x, f, p) {
            return false;
        }
        prime_divisors_of_n.iter().all(|&l| {
            let k = n / l as usize;
            let g = gcd(f, &sub(&frob[k], &x, p), p);
            g.len() == 1
        })
    }
}

fn pow_u64(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = (acc as u128 * b as u128 % m as u128) as u64;
        }
        b = (b as u128 * b as u128 % m as u128) as u64;
        e >>= 1;
    }
    acc
}

fn encode_poly(c: &[u64], p: u64) -> u64 {
    c.iter().rev().fold(0u64, |acc, &d| acc * p + d)
}

fn decode_poly(mut v: u64, p: u64, n: usize) -> gfp::Poly {
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(v % p);
        v /= p;
    }
    gfp::trim(&mut out);
    out
}

/// Metadata describing a constructed field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FieldInfo {
    pub p: u64,
    pub n: u32,
    pub q: u64,
    /// Monic modulus, constant coefficient first.
    pub modulus: Vec<u64>,
    /// Integer encoding of the chosen primitive element.
    pub generator: u64,
}

/// A fully materialized finite field GF(p^n).
pub struct FieldCtx {
    p: u64,
    n: u32,
    q: u64,
    modulus: Vec<u64>,
    generator: u64,
    exp: Vec<u32>,
    log: Vec<u32>,
    zech: Vec<u32>,
    neg_one: u32,
    order_factorization: Factorization,
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldCtx")
            .field("p", &self.p)
            .field("n", &self.n)
            .field("modulus", &self.modulus)
            .field("generator", &self.generator)
            .finish()
    }
}

impl FieldCtx {
    /// GF(p^n) with the default cap.
    pub fn new(p: u64, n: u32) -> Result<Self> {
        Self::with_cap(p, n, DEFAULT_CAP)
    }

    /// GF(q) for a prime power q.
    pub fn of_order(q: u64) -> Result<Self> {
        Self::of_order_with_cap(q, DEFAULT_CAP)
    }

    pub fn of_order_with_cap(q: u64, cap: u64) -> Result<Self> {
        if q > cap {
            return Err(Error::CapExceeded { q: q as u128, cap });
        }
        let (p, n) = crate::arith::prime_power(q)?;
        Self::with_cap(p, n, cap)
    }

    /// Deterministic construction: the modulus is the monic irreducible of
    /// degree n with the smallest encoding of its lower coefficients, and the
    /// generator is the primitive element with the smallest encoding.
    pub fn with_cap(p: u64, n: u32, cap: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::invalid(format!("{p} is not prime")));
        }
        if n == 0 {
            return Err(Error::invalid("extension degree must be at least 1"));
        }
        let q = (p as u128).checked_pow(n).unwrap_or(u128::MAX);
        if q > cap as u128 || q > u32::MAX as u128 {
            return Err(Error::CapExceeded { q, cap });
        }
        let q = q as u64;
        let modulus = smallest_irreducible(p, n)?;
        let order_factorization = factorize(q - 1)?;
        let generator = smallest_generator(p, &modulus, q, &order_factorization);

        let m = (q - 1) as usize;
        let mut exp = vec![0u32; m];
        let mut log = vec![ZERO_TAG; q as usize];
        if n == 1 {
            let mut cur = 1u64;
            for (k, slot) in exp.iter_mut().enumerate() {
                *slot = cur as u32;
                log[cur as usize] = k as u32;
                cur = cur * generator % p;
            }
        } else {
            let g = decode_poly(generator, p, n as usize);
            let mut cur: gfp::Poly = vec![1];
            for (k, slot) in exp.iter_mut().enumerate() {
                let e = encode_poly(&cur, p);
                *slot = e as u32;
                log[e as usize] = k as u32;
                cur = gfp::mul_mod(&cur, &g, &modulus, p);
            }
        }
        let zech = exp
            .iter()
            .map(|&e| {
                let e = e as u64;
                let c0 = e % p;
                let shifted = e - c0 + (c0 + 1) % p;
                if shifted == 0 {
                    ZERO_TAG
                } else {
                    log[shifted as usize]
                }
            })
            .collect();
        let neg_one = if p == 2 { 0 } else { ((q - 1) / 2) as u32 };
        Ok(FieldCtx {
            p,
            n,
            q,
            modulus,
            generator,
            exp,
            log,
            zech,
            neg_one,
            order_factorization,
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// q − 1, the order of F_q^*.
    pub fn group_order(&self) -> u64 {
        self.q - 1
    }

    pub fn group_order_factorization(&self) -> &Factorization {
        &self.order_factorization
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn generator(&self) -> FqElem {
        self.from_exponent(1)
    }

    pub fn info(&self) -> FieldInfo {
        FieldInfo {
            p: self.p,
            n: self.n,
            q: self.q,
            modulus: self.modulus.clone(),
            generator: self.generator,
        }
    }

    /// `g^k`, with k reduced modulo q − 1.
    #[inline]
    pub fn from_exponent(&self, k: u64) -> FqElem {
        FqElem((k % (self.q - 1)) as u32)
    }

    pub fn from_encoding(&self, v: u64) -> Result<FqElem> {
        if v >= self.q {
            return Err(Error::invalid(format!(
                "encoding {v} out of range for GF({})",
                self.q
            )));
        }
        Ok(FqElem(self.log[v as usize]))
    }

    /// Image of an integer in the prime subfield.
    pub fn from_int(&self, v: i64) -> FqElem {
        let r = v.rem_euclid(self.p as i64) as usize;
        FqElem(self.log[r])
    }

    #[inline]
    pub fn encode(&self, x: FqElem) -> u64 {
        match x.exponent() {
            None => 0,
            Some(k) => self.exp[k as usize] as u64,
        }
    }

    #[inline]
    pub fn mul(&self, a: FqElem, b: FqElem) -> FqElem {
        if a.is_zero() || b.is_zero() {
            return FqElem::ZERO;
        }
        let m = (self.q - 1) as u32;
        let s = a.0 as u64 + b.0 as u64;
        FqElem((s % m as u64) as u32)
    }

    #[inline]
    pub fn add(&self, a: FqElem, b: FqElem) -> FqElem {
        if a.is_zero() {
            return b;
        }
        if b.is_zero() {
            return a;
        }
        let m = self.q - 1;
        let diff = (b.0 as u64 + m - a.0 as u64) % m;
        let z = self.zech[diff as usize];
        if z == ZERO_TAG {
            FqElem::ZERO
        } else {
            FqElem(((a.0 as u64 + z as u64) % m) as u32)
        }
    }

    #[inline]
    pub fn neg(&self, a: FqElem) -> FqElem {
        if a.is_zero() {
            a
        } else {
            FqElem(((a.0 as u64 + self.neg_one as u64) % (self.q - 1)) as u32)
        }
    }

    #[inline]
    pub fn sub(&self, a: FqElem, b: FqElem) -> FqElem {
        self.add(a, self.neg(b))
    }

    pub fn inv(&self, a: FqElem) -> Result<FqElem> {
        match a.exponent() {
            None => Err(Error::invalid("zero has no inverse")),
            Some(k) => Ok(self.from_exponent(self.q - 1 - k as u64)),
        }
    }

    pub fn div(&self, a: FqElem, b: FqElem) -> Result<FqElem> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `a^e` for e ≥ 0, with `0^0 = 1`.
    #[inline]
    pub fn pow(&self, a: FqElem, e: u64) -> FqElem {
        match a.exponent() {
            None if e == 0 => FqElem::ONE,
            None => FqElem::ZERO,
            Some(k) => {
                let m = self.q - 1;
                FqElem(((k as u128 * e as u128) % m as u128) as u32)
            }
        }
    }

    /// `a^e` for any integer e; negative exponents need a ≠ 0.
    pub fn pow_signed(&self, a: FqElem, e: i64) -> Result<FqElem> {
        if e >= 0 {
            Ok(self.pow(a, e as u64))
        } else {
            Ok(self.pow(self.inv(a)?, e.unsigned_abs()))
        }
    }

    /// Least m ≥ 1 with x^m = 1.
    pub fn element_order(&self, x: FqElem) -> Result<u64> {
        match x.exponent() {
            None => Err(Error::invalid("zero has no multiplicative order")),
            Some(k) => {
                let m = self.q - 1;
                Ok(m / (k as u64).gcd(&m))
            }
        }
    }

    pub fn is_primitive(&self, x: FqElem) -> bool {
        match x.exponent() {
            None => false,
            Some(k) => (k as u64).gcd(&(self.q - 1)) == 1,
        }
    }

    /// All generators of F_q^*, sorted by integer encoding.
    pub fn primitive_elements(&self) -> Vec<FqElem> {
        let m = self.q - 1;
        let mut out: Vec<FqElem> = (0..m)
            .filter(|k| k.gcd(&m) == 1)
            .map(|k| FqElem(k as u32))
            .collect();
        out.sort_by_key(|&x| self.encode(x));
        out
    }

    /// Every element: zero first, then g^0, g^1, ….
    pub fn elements(&self) -> impl Iterator<Item = FqElem> + '_ {
        std::iter::once(FqElem::ZERO).chain(self.nonzero_elements())
    }

    pub fn nonzero_elements(&self) -> impl Iterator<Item = FqElem> + '_ {
        (0..(self.q - 1) as u32).map(FqElem)
    }

    /// Absolute trace to GF(p), as a residue in `[0, p)`.
    pub fn trace(&self, x: FqElem) -> u64 {
        let Some(k) = x.exponent() else { return 0 };
        let m = self.q - 1;
        let mut acc = FqElem::ZERO;
        let mut e = k as u64;
        for _ in 0..self.n {
            acc = self.add(acc, FqElem(e as u32));
            e = (e as u128 * self.p as u128 % m as u128) as u64;
        }
        let t = self.encode(acc);
        debug_assert!(t < self.p);
        t
    }

    /// `trace(g^k)` for every k.
    pub fn trace_table(&self) -> Vec<u32> {
        if self.n == 1 {
            return self.exp.clone();
        }
        self.nonzero_elements().map(|x| self.trace(x) as u32).collect()
    }

    /// Embedding of this field into a larger field of the same
    /// characteristic whose degree is a multiple of ours.
    pub fn embedding_into(&self, big: &FieldCtx) -> Result<Embedding> {
        if big.p != self.p || big.n % self.n != 0 {
            return Err(Error::invalid(format!(
                "GF({}) does not contain GF({})",
                big.q, self.q
            )));
        }
        let eval = |coeffs: &[u64], at: FqElem| {
            coeffs.iter().rev().fold(FqElem::ZERO, |acc, &c| {
                big.add(big.mul(acc, at), big.from_int(c as i64))
            })
        };
        let root = big
            .elements()
            .find(|&a| eval(&self.modulus, a).is_zero())
            .ok_or_else(|| Error::Integrity("modulus has no root in extension".into()))?;
        let g_coeffs = decode_poly(self.generator, self.p, self.n as usize);
        let image = eval(&g_coeffs, root);
        let image_exp = image
            .exponent()
            .ok_or_else(|| Error::Integrity("generator mapped to zero".into()))?;
        Ok(Embedding {
            image_exp,
            big_order: big.q - 1,
        })
    }
}

/// Field homomorphism GF(q) → GF(q^j), determined by the image of `g`.
#[derive(Debug, Clone, Copy)]
pub struct Embedding {
    image_exp: u32,
    big_order: u64,
}

impl Embedding {
    pub fn map(&self, x: FqElem) -> FqElem {
        match x.exponent() {
            None => FqElem::ZERO,
            Some(k) => FqElem(((k as u64 * self.image_exp as u64) % self.big_order) as u32),
        }
    }
}

fn smallest_irreducible(p: u64, n: u32) -> Result<Vec<u64>> {
    if n == 1 {
        return Ok(vec![0, 1]);
    }
    let ndiv: Vec<u64> = factorize(n as u64)?.primes().collect();
    let count = p.pow(n);
    for enc in 0..count {
        let mut f = decode_poly(enc, p, n as usize);
        f.resize(n as usize, 0);
        f.push(1);
        if gfp::is_irreducible(&f, p, &ndiv) {
            return Ok(f);
        }
    }
    Err(Error::Integrity(format!(
        "no irreducible polynomial of degree {n} over GF({p})"
    )))
}

fn smallest_generator(p: u64, modulus: &[u64], q: u64, fact: &Factorization) -> u64 {
    let m = q - 1;
    let n = modulus.len() - 1;
    let one: gfp::Poly = vec![1];
    for enc in 1..q {
        let is_gen = if n == 1 {
            fact.primes().all(|l| pow_u64(enc, m / l, p) != 1)
        } else {
            let a = decode_poly(enc, p, n);
            fact.primes()
                .all(|l| gfp::pow_mod(&a, (m / l) as u128, modulus, p) != one)
        };
        if is_gen {
            return enc;
        }
    }
    // q = 2: F_2^* is trivial and 1 generates it.
    1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{euler_phi, prime_powers_up_to};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn el(ctx: &FieldCtx, v: u64) -> FqElem {
        ctx.from_encoding(v).unwrap()
    }

    #[test]
    fn build_examples() {
        let f5 = FieldCtx::new(5, 1).unwrap();
        assert_eq!(f5.q(), 5);
        assert_eq!(f5.encode(f5.generator()), 2);

        let f9 = FieldCtx::new(3, 2).unwrap();
        assert_eq!(f9.q(), 9);
        assert_eq!(f9.modulus(), &[1, 0, 1]);

        let f2 = FieldCtx::new(2, 1).unwrap();
        assert_eq!(f2.group_order(), 1);
        assert!(f2.is_primitive(f2.from_int(1)));
        assert_eq!(f2.primitive_elements().len(), 1);
    }

    #[test]
    fn build_errors() {
        assert!(matches!(FieldCtx::new(4, 1), Err(Error::InvalidInput(_))));
        assert!(matches!(
            FieldCtx::new(2, 30),
            Err(Error::CapExceeded { .. })
        ));
        assert!(matches!(
            FieldCtx::with_cap(101, 2, 1000),
            Err(Error::CapExceeded { .. })
        ));
        assert!(FieldCtx::of_order(12).is_err());
    }

    #[test]
    fn generator_is_smallest_primitive_encoding() {
        for q in prime_powers_up_to(300) {
            let ctx = FieldCtx::of_order(q).unwrap();
            let g = ctx.encode(ctx.generator());
            assert_eq!(ctx.element_order(ctx.generator()).unwrap(), q - 1);
            for v in 1..g {
                assert!(!ctx.is_primitive(el(&ctx, v)));
            }
        }
    }

    #[test]
    fn modulus_is_smallest_irreducible() {
        // brute force: a monic polynomial of degree 2 or 3 is irreducible iff it has no root
        for (p, n) in [(2u64, 2u32), (2, 3), (3, 2), (3, 3), (5, 2), (7, 3)] {
            let ctx = FieldCtx::new(p, n).unwrap();
            let has_root = |f: &[u64]| {
                (0..p).any(|x| {
                    f.iter().rev().fold(0u64, |acc, &c| (acc * x + c) % p) == 0
                })
            };
            let enc_of = |f: &[u64]| encode_poly(&f[..n as usize], p);
            assert!(!has_root(ctx.modulus()));
            for enc in 0..enc_of(ctx.modulus()) {
                let mut f = decode_poly(enc, p, n as usize);
                f.resize(n as usize, 0);
                f.push(1);
                assert!(has_root(&f), "p={p} n={n} enc={enc}");
            }
        }
    }

    #[test]
    fn arithmetic_examples() {
        let f5 = FieldCtx::new(5, 1).unwrap();
        assert_eq!(f5.encode(f5.mul(el(&f5, 2), el(&f5, 3))), 1);
        assert_eq!(f5.pow(el(&f5, 2), 4), FqElem::ONE);
        let f9 = FieldCtx::new(3, 2).unwrap();
        for x in f9.elements() {
            assert!(f9.add(x, f9.neg(x)).is_zero());
        }
        assert!(f5.inv(FqElem::ZERO).is_err());
        assert_eq!(f5.pow(FqElem::ZERO, 0), FqElem::ONE);
        assert_eq!(
            f5.pow_signed(el(&f5, 2), -1).unwrap(),
            el(&f5, 3)
        );
    }

    #[test]
    fn prime_field_matches_integer_arithmetic() {
        let p = 101u64;
        let ctx = FieldCtx::new(p, 1).unwrap();
        for a in 0..p {
            for b in 0..p {
                let (x, y) = (el(&ctx, a), el(&ctx, b));
                assert_eq!(ctx.encode(ctx.add(x, y)), (a + b) % p);
                assert_eq!(ctx.encode(ctx.mul(x, y)), a * b % p);
                assert_eq!(ctx.encode(ctx.sub(x, y)), (a + p - b) % p);
            }
        }
    }

    #[test]
    fn extension_addition_is_digitwise() {
        for q in [4u64, 8, 9, 25, 27, 49, 64, 81, 125] {
            let ctx = FieldCtx::of_order(q).unwrap();
            let p = ctx.p();
            let n = ctx.n() as usize;
            for a in 0..q {
                for b in 0..q {
                    let da = decode_poly(a, p, n);
                    let db = decode_poly(b, p, n);
                    let sum: Vec<u64> = (0..n)
                        .map(|i| {
                            (da.get(i).copied().unwrap_or(0) + db.get(i).copied().unwrap_or(0)) % p
                        })
                        .collect();
                    assert_eq!(ctx.encode(ctx.add(el(&ctx, a), el(&ctx, b))), encode_poly(&sum, p));
                }
            }
        }
    }

    #[test]
    fn extension_multiplication_matches_polynomial_product() {
        for q in [8u64, 9, 27, 49, 81] {
            let ctx = FieldCtx::of_order(q).unwrap();
            let (p, n) = (ctx.p(), ctx.n() as usize);
            for a in 0..q {
                for b in 0..q {
                    let prod = gfp::mul_mod(
                        &decode_poly(a, p, n),
                        &decode_poly(b, p, n),
                        ctx.modulus(),
                        p,
                    );
                    assert_eq!(ctx.encode(ctx.mul(el(&ctx, a), el(&ctx, b))), encode_poly(&prod, p));
                }
            }
        }
    }

    #[test]
    fn sampled_field_axioms() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for q in [7u64, 16, 27, 49, 121, 343, 1024] {
            let ctx = FieldCtx::of_order(q).unwrap();
            for _ in 0..10_000 {
                let [a, b, c] = [0; 3].map(|_| el(&ctx, rng.gen_range(0..q)));
                assert_eq!(ctx.add(ctx.add(a, b), c), ctx.add(a, ctx.add(b, c)));
                assert_eq!(ctx.mul(ctx.mul(a, b), c), ctx.mul(a, ctx.mul(b, c)));
                assert_eq!(ctx.add(a, b), ctx.add(b, a));
                assert_eq!(ctx.mul(a, b), ctx.mul(b, a));
                assert_eq!(
                    ctx.mul(a, ctx.add(b, c)),
                    ctx.add(ctx.mul(a, b), ctx.mul(a, c))
                );
            }
        }
    }

    #[test]
    fn frobenius_fixes_everything() {
        for q in prime_powers_up_to(512) {
            let ctx = FieldCtx::of_order(q).unwrap();
            for x in ctx.elements() {
                assert_eq!(ctx.pow(x, q), x);
            }
        }
    }

    #[test]
    fn tables_are_inverse_bijections() {
        for q in prime_powers_up_to(2048) {
            let ctx = FieldCtx::of_order(q).unwrap();
            let mut seen = vec![false; q as usize];
            for x in ctx.nonzero_elements() {
                let e = ctx.encode(x);
                assert!(e > 0 && !seen[e as usize]);
                seen[e as usize] = true;
                assert_eq!(ctx.from_encoding(e).unwrap(), x);
            }
        }
    }

    #[test]
    fn primitive_counts() {
        for q in prime_powers_up_to(2048) {
            let ctx = FieldCtx::of_order(q).unwrap();
            assert_eq!(
                ctx.primitive_elements().len() as u64,
                euler_phi(q - 1).unwrap(),
                "q={q}"
            );
        }
        let enc = |q: u64| {
            let ctx = FieldCtx::of_order(q).unwrap();
            ctx.primitive_elements()
                .into_iter()
                .map(|x| ctx.encode(x))
                .collect::<Vec<_>>()
        };
        assert_eq!(enc(13), vec![2, 6, 7, 11]);
        assert_eq!(enc(7), vec![3, 5]);
        assert_eq!(enc(5), vec![2, 3]);
        let ctx = FieldCtx::new(5, 1).unwrap();
        assert!(!ctx.is_primitive(FqElem::ZERO));
    }

    #[test]
    fn element_orders() {
        let f7 = FieldCtx::new(7, 1).unwrap();
        assert_eq!(f7.element_order(el(&f7, 2)).unwrap(), 3);
        assert_eq!(f7.element_order(el(&f7, 3)).unwrap(), 6);
        assert_eq!(f7.element_order(FqElem::ONE).unwrap(), 1);
        assert!(f7.element_order(FqElem::ZERO).is_err());
        // order by repeated multiplication
        for q in [31u64, 32, 49] {
            let ctx = FieldCtx::of_order(q).unwrap();
            for x in ctx.nonzero_elements() {
                let mut acc = x;
                let mut m = 1;
                while acc != FqElem::ONE {
                    acc = ctx.mul(acc, x);
                    m += 1;
                }
                assert_eq!(ctx.element_order(x).unwrap(), m);
            }
        }
    }

    #[test]
    fn trace_examples() {
        let f13 = FieldCtx::new(13, 1).unwrap();
        for v in 0..13 {
            assert_eq!(f13.trace(el(&f13, v)), v);
        }
        let f9 = FieldCtx::new(3, 2).unwrap();
        assert_eq!(f9.trace(FqElem::ONE), 2);
        for q in [4u64, 8, 9, 25, 27, 49, 64, 81, 125, 243, 256] {
            let ctx = FieldCtx::of_order(q).unwrap();
            let zeros = ctx.elements().filter(|&x| ctx.trace(x) == 0).count() as u64;
            assert_eq!(zeros, q / ctx.p(), "q={q}");
            // direct sum of conjugates
            for x in ctx.elements() {
                let mut acc = FqElem::ZERO;
                let mut conj = x;
                for _ in 0..ctx.n() {
                    acc = ctx.add(acc, conj);
                    conj = ctx.pow(conj, ctx.p());
                }
                assert_eq!(ctx.encode(acc), ctx.trace(x));
            }
        }
    }

    #[test]
    fn embeddings_are_homomorphisms() {
        for (small, big) in [(3u64, 27u64), (9, 81), (9, 729), (4, 64), (2, 8), (25, 625)] {
            let s = FieldCtx::of_order(small).unwrap();
            let b = FieldCtx::of_order(big).unwrap();
            let e = s.embedding_into(&b).unwrap();
            for x in s.elements() {
                for y in s.elements() {
                    assert_eq!(e.map(s.add(x, y)), b.add(e.map(x), e.map(y)));
                    assert_eq!(e.map(s.mul(x, y)), b.mul(e.map(x), e.map(y)));
                }
            }
        }
        let s = FieldCtx::of_order(9).unwrap();
        let b = FieldCtx::of_order(27).unwrap();
        assert!(s.embedding_into(&b).is_err());
    }
}
