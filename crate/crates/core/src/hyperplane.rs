//! Exact primitive counts on hyperplanes a₁x₁ + ⋯ + a_sx_s = b over a
//! Fermat prime q > 3, evaluated in ℚ(√q), together with the diagonal
//! quadratic-form counts they are assembled from.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::is_fermat_prime;
use crate::error::{Error, Result};
use crate::field::{FieldCtx, FqElem};

/// r + t·√q with exact rational r, t.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadExt {
    rational: BigRational,
    surd: BigRational,
    q: u64,
}

impl QuadExt {
    pub fn new(rational: BigRational, surd: BigRational, q: u64) -> Self {
        QuadExt { rational, surd, q }
    }

    pub fn from_int(v: i64, q: u64) -> Self {
        QuadExt::new(BigRational::from_integer(v.into()), BigRational::zero(), q)
    }

    /// c·√q.
    pub fn sqrt_q(c: i64, q: u64) -> Self {
        QuadExt::new(BigRational::zero(), BigRational::from_integer(c.into()), q)
    }

    pub fn rational(&self) -> &BigRational {
        &self.rational
    }

    pub fn surd(&self) -> &BigRational {
        &self.surd
    }

    pub fn radicand(&self) -> u64 {
        self.q
    }

    pub fn is_integral(&self) -> bool {
        self.surd.is_zero() && self.rational.is_integer()
    }

    pub fn to_integer(&self) -> Option<BigInt> {
        self.is_integral().then(|| self.rational.to_integer())
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        QuadExt::new(&self.rational * c, &self.surd * c, self.q)
    }

    pub fn to_f64(&self) -> f64 {
        self.rational.to_f64().unwrap_or(f64::NAN)
            + self.surd.to_f64().unwrap_or(f64::NAN) * (self.q as f64).sqrt()
    }

    fn same_field(&self, other: &QuadExt) {
        assert_eq!(self.q, other.q, "mixing different quadratic fields");
    }
}

impl Add for &QuadExt {
    type Output = QuadExt;
    fn add(self, rhs: &QuadExt) -> QuadExt {
        self.same_field(rhs);
        QuadExt::new(&self.rational + &rhs.rational, &self.surd + &rhs.surd, self.q)
    }
}

impl Sub for &QuadExt {
    type Output = QuadExt;
    fn sub(self, rhs: &QuadExt) -> QuadExt {
        self.same_field(rhs);
        QuadExt::new(&self.rational - &rhs.rational, &self.surd - &rhs.surd, self.q)
    }
}

impl Mul for &QuadExt {
    type Output = QuadExt;
    fn mul(self, rhs: &QuadExt) -> QuadExt {
        self.same_field(rhs);
        let q = BigRational::from_integer(self.q.into());
        QuadExt::new(
            &self.rational * &rhs.rational + &self.surd * &rhs.surd * q,
            &self.rational * &rhs.surd + &self.surd * &rhs.rational,
            self.q,
        )
    }
}

impl Neg for &QuadExt {
    type Output = QuadExt;
    fn neg(self) -> QuadExt {
        QuadExt::new(-&self.rational, -&self.surd, self.q)
    }
}

impl Add for QuadExt {
    type Output = QuadExt;
    fn add(self, rhs: QuadExt) -> QuadExt {
        &self + &rhs
    }
}

impl Sub for QuadExt {
    type Output = QuadExt;
    fn sub(self, rhs: QuadExt) -> QuadExt {
        &self - &rhs
    }
}

impl Mul for QuadExt {
    type Output = QuadExt;
    fn mul(self, rhs: QuadExt) -> QuadExt {
        &self * &rhs
    }
}

impl Neg for QuadExt {
    type Output = QuadExt;
    fn neg(self) -> QuadExt {
        -&self
    }
}

impl fmt::Display for QuadExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.surd.is_zero() {
            write!(f, "{}", self.rational)
        } else if self.surd.is_negative() {
            write!(f, "{} - {}*sqrt({})", self.rational, -&self.surd, self.q)
        } else {
            write!(f, "{} + {}*sqrt({})", self.rational, self.surd, self.q)
        }
    }
}

/// χ₂(x) ∈ {−1, 0, 1}; q odd.
pub fn quadratic_char(x: FqElem) -> i64 {
    match x.exponent() {
        None => 0,
        Some(k) if k % 2 == 0 => 1,
        Some(_) => -1,
    }
}

/// ν(0) = q − 1, ν(b) = −1 otherwise.
pub fn nu(q: u64, b: FqElem) -> i64 {
    if b.is_zero() {
        q as i64 - 1
    } else {
        -1
    }
}

/// #{x ∈ F_q^s : Σ a_i x_i² = b} for nonzero a_i, q odd.
pub fn quad_solution_count(ctx: &FieldCtx, a: &[FqElem], b: FqElem) -> Result<u64> {
    let q = ctx.q();
    if q % 2 == 0 {
        return Err(Error::invalid("quadratic form counts need odd q"));
    }
    if a.is_empty() {
        return Err(Error::invalid("at least one coefficient is required"));
    }
    if a.iter().any(|x| x.is_zero()) {
        return Err(Error::invalid("quadratic form coefficients must be nonzero"));
    }
    let s = a.len() as u32;
    let delta = a.iter().fold(FqElem::ONE, |acc, &x| ctx.mul(acc, x));
    let minus_one = ctx.neg(FqElem::ONE);
    let q = q as i128;
    let value = if s % 2 == 0 {
        let sign = ctx.mul(ctx.pow(minus_one, (s / 2) as u64), delta);
        q.pow(s - 1) + q.pow((s - 2) / 2) * nu(ctx.q(), b) as i128 * quadratic_char(sign) as i128
    } else {
        let sign = ctx.mul(ctx.mul(ctx.pow(minus_one, ((s - 1) / 2) as u64), b), delta);
        q.pow(s - 1) + q.pow((s - 1) / 2) * quadratic_char(sign) as i128
    };
    u64::try_from(value).map_err(|_| Error::invalid("count does not fit in 64 bits"))
}

fn require_fermat_prime(q: u64) -> Result<()> {
    if !is_fermat_prime(q).l_positive() {
        return Err(Error::precondition(format!("{q} is not a Fermat prime > 3")));
    }
    Ok(())
}

/// q^{|I|−1}: N_I of a hyperplane twist with some r_i = 1 on I.
pub fn ni_linear(q: u64, size: u32) -> Result<u64> {
    if size == 0 {
        return Err(Error::invalid("|I| must be at least 1"));
    }
    q.checked_pow(size - 1)
        .ok_or_else(|| Error::invalid("q^(|I|-1) overflows"))
}

/// N_I of a hyperplane twisted by r_i = 2 on all of I; `a` holds the
/// coefficients indexed by I.
pub fn ni_quadratic(ctx: &FieldCtx, a: &[FqElem], b: FqElem) -> Result<u64> {
    require_fermat_prime(ctx.q())?;
    if a.is_empty() {
        return Err(Error::invalid("|I| must be at least 1"));
    }
    if a.iter().any(|x| x.is_zero()) {
        return Err(Error::invalid("coefficients must be nonzero"));
    }
    let q = ctx.q() as i128;
    let n = a.len() as u32;
    let chi_a = a.iter().map(|&x| quadratic_char(x)).product::<i64>() as i128;
    let value = if n % 2 == 0 {
        q.pow(n - 1) + q.pow((n - 2) / 2) * nu(ctx.q(), b) as i128 * chi_a
    } else {
        q.pow(n - 1) + q.pow((n - 1) / 2) * quadratic_char(b) as i128 * chi_a
    };
    u64::try_from(value).map_err(|_| Error::invalid("count does not fit in 64 bits"))
}

fn phi_main_term(q: u64, s: usize) -> BigRational {
    // q − 1 = 2^{2^l}, so φ(q−1) = (q−1)/2
    let phi = BigInt::from((q - 1) / 2);
    BigRational::new(num_traits::pow(phi, s), BigInt::from(q))
}

fn finish(value: QuadExt, what: &str) -> Result<u64> {
    value
        .to_integer()
        .and_then(|v| v.to_u64())
        .ok_or_else(|| Error::Integrity(format!("{what} evaluated to {value}, not a nonnegative integer")))
}

/// Π (√q·c_i + shift).
fn signed_product(q: u64, chis: &[i64], shift: i64) -> QuadExt {
    chis.iter().fold(QuadExt::from_int(1, q), |acc, &c| {
        &acc * &(QuadExt::sqrt_q(c, q) + QuadExt::from_int(shift, q))
    })
}

/// Closed form for P_q(a₁x₁ + ⋯ + a_sx_s − b), q a Fermat prime > 3.
pub fn primitive_count_hyperplane_exact(ctx: &FieldCtx, a: &[FqElem], b: FqElem) -> Result<u64> {
    let q = ctx.q();
    require_fermat_prime(q)?;
    if a.is_empty() {
        return Err(Error::invalid("at least one coefficient is required"));
    }
    if a.iter().any(|x| x.is_zero()) {
        return Err(Error::invalid("coefficients must be nonzero"));
    }
    let s = a.len();
    let chis: Vec<i64> = a.iter().map(|&x| quadratic_char(x)).collect();
    let nu_b = QuadExt::from_int(nu(q, b), q);
    let root_b = QuadExt::sqrt_q(quadratic_char(b), q);
    let tau0 = &nu_b + &root_b;
    let tau1 = &nu_b - &root_b;
    let mut first = &tau0 * &signed_product(q, &chis, 1);
    if s % 2 == 1 {
        first = -first;
    }
    let bracket = first + &tau1 * &signed_product(q, &chis, -1);
    let denom = BigInt::from(q) << (s + 1);
    let correction = bracket.scale(&BigRational::new(BigInt::one(), denom));
    let main = QuadExt::new(phi_main_term(q, s), BigRational::zero(), q);
    finish(main + correction, "hyperplane closed form")
}

/// P_q(x₁ + ⋯ + x_s) from the corollary formula.
pub fn corollary_count(q: u64, s: usize) -> Result<u64> {
    require_fermat_prime(q)?;
    if s < 2 {
        return Err(Error::invalid("the corollary needs s >= 2"));
    }
    let minus = signed_product(q, &vec![1; s], -1);
    let mut plus = signed_product(q, &vec![1; s], 1);
    if s % 2 == 1 {
        plus = -plus;
    }
    let factor = BigRational::new(BigInt::from(q - 1), BigInt::from(q) << (s + 1));
    let main = QuadExt::new(phi_main_term(q, s), BigRational::zero(), q);
    finish(main + (minus + plus).scale(&factor), "corollary formula")
}

/// (q² − 6q + 5)/8 as an exact integer, if integral.
pub fn cubic_closed_form(q: u64) -> Option<u64> {
    let v = (q as u128).pow(2) + 5 - 6 * q as u128;
    (v % 8 == 0).then(|| (v / 8) as u64)
}

/// corollary_count(q, 3) = (q² − 6q + 5)/8.
pub fn cubic_identity_check(q: u64) -> Result<bool> {
    let c = corollary_count(q, 3)?;
    Ok(cubic_closed_form(q) == Some(c))
}

/// Σ over subsets I of even (resp. odd) size of q^{|I|/2} Π_{j∈I} χ_j,
/// summed term by term.
pub fn subset_parity_sums(q: u64, chis: &[i64]) -> (QuadExt, QuadExt) {
    let s = chis.len();
    let mut even = QuadExt::from_int(0, q);
    let mut odd = QuadExt::from_int(0, q);
    for mask in 0u32..(1 << s) {
        let size = mask.count_ones();
        let sign: i64 = (0..s).filter(|&i| mask >> i & 1 == 1).map(|i| chis[i]).product();
        let mut term = QuadExt::from_int(sign, q);
        for _ in 0..size {
            term = &term * &QuadExt::sqrt_q(1, q);
        }
        if size % 2 == 0 {
            even = even + term;
        } else {
            odd = odd + term;
        }
    }
    (even, odd)
}

/// Closed forms of [`subset_parity_sums`]:
/// even = [Π(√qχ+1) + (−1)^s Π(√qχ−1)]/2, odd = [Π(√qχ+1) − (−1)^s Π(√qχ−1)]/2.
pub fn subset_parity_closed_forms(q: u64, chis: &[i64]) -> (QuadExt, QuadExt) {
    let plus = signed_product(q, chis, 1);
    let mut minus = signed_product(q, chis, -1);
    if chis.len() % 2 == 1 {
        minus = -minus;
    }
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    ((&plus + &minus).scale(&half), (&plus - &minus).scale(&half))
}
