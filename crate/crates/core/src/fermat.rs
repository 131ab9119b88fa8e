//! Primitive points on Fermat hypersurfaces a₁x₁^{d₁} + ⋯ + a_sx_s^{d_s} = b
//! with every d_i | q−1: exact counts, the Jacobi-sum expansion, the bounds
//! built on them, the prime sieve and the sphere scanner.

use std::collections::{BTreeSet, HashMap};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{factorize, is_prime, odd_prime_powers, w_upper_bound};
use crate::budget::WorkBudget;
use crate::charsum::{CharTable, MulCharacter, ZeroConvention};
use crate::count::{
    count_free_solutions, count_primitive_brute, primitive_main_term, CountReport,
};
use crate::error::{Error, Result};
use crate::field::{FieldCtx, FqElem, DEFAULT_CAP};
use crate::poly::{dwork_regularity_check, DworkStatus, FermatShape, MultiPoly, DEFAULT_MAX_EXTENSION};

fn check_exponents(q: u64, d: &[u64]) -> Result<()> {
    if d.is_empty() {
        return Err(Error::invalid("at least one exponent is required"));
    }
    if let Some(&bad) = d.iter().find(|&&di| di == 0 || (q - 1) % di != 0) {
        return Err(Error::precondition(format!(
            "exponent {bad} does not divide q-1 = {}",
            q - 1
        )));
    }
    Ok(())
}

#[inline]
fn dense(x: FqElem, m: usize) -> usize {
    x.exponent().map_or(m, |k| k as usize)
}

#[inline]
fn undense(ctx: &FieldCtx, i: usize) -> FqElem {
    if i as u64 == ctx.group_order() {
        FqElem::ZERO
    } else {
        ctx.from_exponent(i as u64)
    }
}

/// Elements of order exactly (q−1)/d.
fn elements_of_cofactor_order(ctx: &FieldCtx, d: u64) -> Vec<FqElem> {
    let m = ctx.group_order();
    (0..m)
        .filter(|k| k.gcd(&m) == d)
        .map(|k| ctx.from_exponent(k))
        .collect()
}

/// M = #{y ∈ (F_q^*)^s : Σ a_i y_i = b, ord(y_i) = (q−1)/d_i}.
pub fn count_order_restricted(ctx: &FieldCtx, shape: &FermatShape, budget: WorkBudget) -> Result<u64> {
    let q = ctx.q();
    check_exponents(q, &shape.exps)?;
    let s = shape.vars();
    let m = ctx.group_order() as usize;
    let allowed: Vec<Vec<FqElem>> = shape
        .exps
        .iter()
        .map(|&d| elements_of_cofactor_order(ctx, d))
        .collect();
    let widest = allowed.iter().map(Vec::len).max().unwrap_or(0) as u128;
    budget.check(
        "order-restricted count",
        (s as u128) * (q as u128) * widest.max(1),
    )?;

    let mut dist = vec![0u128; m + 1];
    dist[m] = 1;
    for i in 0..s - 1 {
        let a = shape.coeffs[i];
        let steps: Vec<FqElem> = allowed[i].iter().map(|&y| ctx.mul(a, y)).collect();
        let mut next = vec![0u128; m + 1];
        for (v, &c) in dist.iter().enumerate().filter(|(_, &c)| c != 0) {
            let x = undense(ctx, v);
            for &step in &steps {
                next[dense(ctx.add(x, step), m)] += c;
            }
        }
        dist = next;
    }
    let a = shape.coeffs[s - 1];
    let total: u128 = allowed[s - 1]
        .iter()
        .map(|&y| dist[dense(ctx.sub(shape.b, ctx.mul(a, y)), m)])
        .sum();
    Ok(total as u64)
}

/// ε_i = φ(q−1)/φ((q−1)/d_i), the number of primitive d_i-th roots of an
/// element of order (q−1)/d_i.
fn root_multiplicities(ctx: &FieldCtx, d: &[u64]) -> Result<Vec<u64>> {
    let m = ctx.group_order();
    let phi = ctx.group_order_factorization().phi();
    d.iter()
        .map(|&di| Ok(phi / factorize(m / di)?.phi()))
        .collect()
}

/// P_q of the Fermat shape as Π ε_i · M.
pub fn primitive_count_fermat_exact(ctx: &FieldCtx, shape: &FermatShape, budget: WorkBudget) -> Result<u64> {
    let m = count_order_restricted(ctx, shape, budget)?;
    let mult: u64 = root_multiplicities(ctx, &shape.exps)?.iter().product();
    Ok(mult * m)
}

struct PlanTerm {
    subset: Vec<usize>,
    chars: Vec<MulCharacter>,
    /// (−1)^{s−|I|} Π μ/φ · J_b(λ)
    coeff: Complex64,
    all_trivial: bool,
}

/// J_0 of the characters with sorted indices `key`, by direct summation
/// organised as repeated additive convolution over shared prefixes.
fn zero_jacobi(
    table: &CharTable,
    key: &[u64],
    prefixes: &mut HashMap<Vec<u64>, Vec<Complex64>>,
) -> Complex64 {
    let ctx = table.ctx();
    let chi = |k: u64| MulCharacter::new(ctx, k);
    let (last, head) = key.split_last().expect("nonempty character tuple");
    if head.is_empty() {
        return table.eval(chi(*last), FqElem::ZERO, ZeroConvention::TrivialIsOne);
    }
    for len in 1..=head.len() {
        if prefixes.contains_key(&head[..len]) {
            continue;
        }
        let f = if len == 1 {
            table.char_values(chi(head[0]))
        } else {
            table.convolve_with(&prefixes[&head[..len - 1]], chi(head[len - 1]))
        };
        prefixes.insert(head[..len].to_vec(), f);
    }
    table.convolution_at(&prefixes[head], chi(*last), FqElem::ZERO)
}

/// The Jacobi-sum expansion of P_q for fixed (q, d, b), reusable across
/// coefficient vectors a.
pub struct CharsumPlan {
    table: Arc<CharTable>,
    s: usize,
    eps_pow: f64,
    r_b: f64,
    terms: Vec<PlanTerm>,
}

impl CharsumPlan {
    pub fn new(table: Arc<CharTable>, d: &[u64], b: FqElem, budget: WorkBudget) -> Result<Self> {
        let ctx = table.ctx().clone();
        let q = ctx.q();
        check_exponents(q, d)?;
        let s = d.len();
        if s > 16 {
            return Err(Error::invalid("too many variables for the character expansion"));
        }
        let m = ctx.group_order();
        let fm = factorize(m)?;
        let eps = fm.phi() as f64 / m as f64;

        // (λ, μ(r/(r,d))/φ(r/(r,d))) per coordinate
        let mut options: Vec<Vec<(MulCharacter, f64)>> = Vec::with_capacity(s);
        for &di in d {
            let mut opts = Vec::new();
            for r in fm.divisors(false) {
                let red = factorize(r / r.gcd(&di))?;
                let mu = red.moebius();
                if mu == 0 {
                    continue;
                }
                let w = mu as f64 / red.phi() as f64;
                for chi in table.characters_of_order(r)? {
                    opts.push((chi, w));
                }
            }
            options.push(opts);
        }

        let tuples = options
            .iter()
            .fold(1u128, |acc, o| acc.saturating_mul(o.len() as u128 + 1));
        let cost = if b.is_zero() {
            let prefixes = options[..s - 1]
                .iter()
                .fold(1u128, |acc, o| acc.saturating_mul(o.len() as u128 + 1));
            let q = q as u128;
            prefixes.saturating_mul(q * q).saturating_add(tuples.saturating_mul(q))
        } else {
            tuples
        };
        budget.check("character expansion", cost)?;

        let mut cache: HashMap<Vec<u64>, Complex64> = HashMap::new();
        let mut prefixes: HashMap<Vec<u64>, Vec<Complex64>> = HashMap::new();
        let mut terms = Vec::new();
        for mask in 1u32..(1 << s) {
            let subset: Vec<usize> = (0..s).filter(|&i| mask >> i & 1 == 1).collect();
            let sign = if (s - subset.len()) % 2 == 0 { 1.0 } else { -1.0 };
            let mut idx = vec![0usize; subset.len()];
            'tuples: loop {
                let chars: Vec<MulCharacter> = subset
                    .iter()
                    .zip(&idx)
                    .map(|(&i, &k)| options[i][k].0)
                    .collect();
                let weight: f64 = subset
                    .iter()
                    .zip(&idx)
                    .map(|(&i, &k)| options[i][k].1)
                    .product();
                let mut key: Vec<u64> = chars.iter().map(|c| c.index()).collect();
                key.sort_unstable();
                let j = match cache.get(&key) {
                    Some(&j) => j,
                    None => {
                        let j = if b.is_zero() {
                            zero_jacobi(&table, &key, &mut prefixes)
                        } else {
                            table.jacobi_sum_fast(&chars, b, budget)?
                        };
                        cache.insert(key, j);
                        j
                    }
                };
                if j.norm() > 0.0 {
                    terms.push(PlanTerm {
                        subset: subset.clone(),
                        all_trivial: chars.iter().all(|c| c.is_trivial()),
                        chars,
                        coeff: j * (sign * weight),
                    });
                }
                let mut pos = 0;
                loop {
                    if pos == idx.len() {
                        break 'tuples;
                    }
                    idx[pos] += 1;
                    if idx[pos] < options[subset[pos]].len() {
                        break;
                    }
                    idx[pos] = 0;
                    pos += 1;
                }
            }
        }

        let eps_pow = eps.powi(s as i32);
        let r_b = if b.is_zero() {
            if s % 2 == 0 {
                eps_pow
            } else {
                -eps_pow
            }
        } else {
            0.0
        };
        Ok(CharsumPlan {
            table,
            s,
            eps_pow,
            r_b,
            terms,
        })
    }

    /// Unrounded value of the expansion for coefficients a.
    pub fn evaluate(&self, a: &[FqElem]) -> Result<f64> {
        if a.len() != self.s {
            return Err(Error::invalid("coefficient vector has the wrong length"));
        }
        if a.iter().any(|x| x.is_zero()) {
            return Err(Error::invalid("Fermat coefficients must be nonzero"));
        }
        let total: Complex64 = self
            .terms
            .iter()
            .map(|t| {
                let twist: Complex64 = t
                    .subset
                    .iter()
                    .zip(&t.chars)
                    .map(|(&i, &chi)| self.table.eval(chi, a[i], ZeroConvention::AllZero).conj())
                    .product();
                t.coeff * twist
            })
            .sum();
        Ok(self.r_b + self.eps_pow * total.re)
    }

    /// Contribution of the all-trivial character tuples, excluding R_b.
    pub fn all_trivial_part(&self) -> f64 {
        self.eps_pow
            * self
                .terms
                .iter()
                .filter(|t| t.all_trivial)
                .map(|t| t.coeff.re)
                .sum::<f64>()
    }
}

/// Rounds a character-sum value, refusing values more than 1e−3 from an integer.
pub fn round_charsum_value(v: f64) -> Result<u64> {
    let r = v.round();
    if (v - r).abs() > 1e-3 || r < 0.0 {
        return Err(Error::Integrity(format!(
            "character expansion gave {v}, not within 1e-3 of a nonnegative integer"
        )));
    }
    Ok(r as u64)
}

/// P_q of the Fermat shape through the Jacobi-sum expansion.
pub fn primitive_count_fermat_charsum(
    table: Arc<CharTable>,
    shape: &FermatShape,
    budget: WorkBudget,
) -> Result<u64> {
    let plan = CharsumPlan::new(table, &shape.exps, shape.b, budget)?;
    round_charsum_value(plan.evaluate(&shape.coeffs)?)
}

/// (ε^s, Π [1 + (d_i W((q−1)/d_i) − 1)√q]).
fn diagonal_bound_parts(q: u64, d: &[u64]) -> Result<(f64, f64)> {
    check_exponents(q, d)?;
    let m = q - 1;
    let eps = factorize(m)?.phi() as f64 / m as f64;
    let sq = (q as f64).sqrt();
    let mut prod = 1.0;
    for &di in d {
        let w = factorize(m / di)?.squarefree_divisor_count();
        prod *= 1.0 + ((di * w) as f64 - 1.0) * sq;
    }
    Ok((eps.powi(d.len() as i32), prod))
}

/// ε^s q^{−1/2} Π [1 + (d_i W((q−1)/d_i) − 1)√q] + δ_b.
///
/// For b = 0 this can be exceeded (q = 9, d = (1,1), g^7 x + g^6 y = 0 has
/// no primitive solution); see [`theorem2_bound_at_zero`].
pub fn theorem2_bound(q: u64, d: &[u64], b_is_zero: bool) -> Result<f64> {
    let (eps_s, prod) = diagonal_bound_parts(q, d)?;
    Ok(eps_s * prod / (q as f64).sqrt() + if b_is_zero { eps_s } else { 0.0 })
}

/// ε^s (q−1)/q Π [1 + (d_i W((q−1)/d_i) − 1)√q], a bound for b = 0.
///
/// At b = 0 a Jacobi sum of k nontrivial characters with trivial product has
/// modulus (q−1)q^{k/2−1}, one factor √q more than for b ≠ 0.
pub fn theorem2_bound_at_zero(q: u64, d: &[u64]) -> Result<f64> {
    let (eps_s, prod) = diagonal_bound_parts(q, d)?;
    Ok(eps_s * prod * (q - 1) as f64 / q as f64)
}

pub fn theorem2_check(ctx: &Arc<FieldCtx>, shape: &FermatShape, budget: WorkBudget) -> Result<CountReport> {
    let start = std::time::Instant::now();
    let count = primitive_count_fermat_exact(ctx, shape, budget)?;
    let bound = theorem2_bound(ctx.q(), &shape.exps, shape.b.is_zero())?;
    let text = shape.to_poly(ctx.clone())?.to_string();
    Ok(CountReport::new(
        ctx,
        text,
        "fermat-exact",
        count,
        primitive_main_term(ctx, shape.vars()),
        Some(bound),
    )
    .with_elapsed(start.elapsed()))
}

/// (d√q + 1)^s W(q−1)^s.
pub fn dwork_bound(q: u64, d: u64, s: usize) -> Result<f64> {
    let w = factorize(q - 1)?.squarefree_divisor_count() as f64;
    Ok(((d as f64) * (q as f64).sqrt() + 1.0).powi(s as i32) * w.powi(s as i32))
}

/// Compares P_q(f) with the Dwork-regular bound; f must be certified.
pub fn dwork_bound_check(f: &MultiPoly, budget: WorkBudget) -> Result<CountReport> {
    let start = std::time::Instant::now();
    let ctx = f.ctx();
    if dwork_regularity_check(f, DEFAULT_MAX_EXTENSION)? != DworkStatus::RegularCertified {
        return Err(Error::precondition(
            "polynomial is not certified Dwork-regular",
        ));
    }
    let count = count_primitive_brute(f, budget)?;
    let bound = dwork_bound(ctx.q(), f.degree(), f.vars())?;
    Ok(CountReport::new(
        ctx,
        f.to_string(),
        "brute",
        count,
        primitive_main_term(ctx, f.vars()),
        Some(bound),
    )
    .with_elapsed(start.elapsed()))
}

/// n d W((q−1)/n) W(q−1) φ(q−1)^{s+1} (q−1)^{−2} √q.
pub fn superelliptic_bound(q: u64, n: u64, d: u64, s: u32) -> Result<f64> {
    let m = q
        .checked_sub(1)
        .filter(|&m| m > 0)
        .ok_or_else(|| Error::invalid("q must be at least 2"))?;
    if n == 0 || m % n != 0 {
        return Err(Error::precondition(format!("n = {n} does not divide q-1 = {m}")));
    }
    let fm = factorize(m)?;
    let w_n = factorize(m / n)?.squarefree_divisor_count() as f64;
    let w = fm.squarefree_divisor_count() as f64;
    let phi = fm.phi() as f64;
    Ok((n * d) as f64 * w_n * w * phi.powi(s as i32 + 1) / (m as f64).powi(2) * (q as f64).sqrt())
}

/// Sieving data: ℓ_i | (q−1)/d_i and the primes of (q−1)/d_i not dividing ℓ_i.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SieveConfig {
    pub q: u64,
    pub d: Vec<u64>,
    pub ell: Vec<u64>,
    pub primes: Vec<Vec<u64>>,
}

impl SieveConfig {
    /// Takes as sieving primes every prime of (q−1)/d_i that does not divide ℓ_i.
    pub fn new(q: u64, d: Vec<u64>, ell: Vec<u64>) -> Result<Self> {
        check_exponents(q, &d)?;
        if ell.len() != d.len() {
            return Err(Error::invalid("d and ell must have the same length"));
        }
        let mut primes = Vec::with_capacity(d.len());
        for (&di, &li) in d.iter().zip(&ell) {
            let c = (q - 1) / di;
            if li == 0 || c % li != 0 {
                return Err(Error::precondition(format!("ell = {li} does not divide {c}")));
            }
            primes.push(factorize(c)?.primes().filter(|p| li % p != 0).collect());
        }
        Ok(SieveConfig { q, d, ell, primes })
    }

    pub fn t(&self) -> Vec<usize> {
        self.primes.iter().map(Vec::len).collect()
    }

    pub fn t_total(&self) -> usize {
        self.primes.iter().map(Vec::len).sum()
    }

    pub fn delta(&self) -> f64 {
        sieve_delta(&self.primes)
    }

    pub fn w_ell(&self) -> Result<Vec<u64>> {
        self.ell
            .iter()
            .map(|&l| Ok(factorize(l)?.squarefree_divisor_count()))
            .collect()
    }

    /// [`sieve_criterion`] with W(ℓ_i) computed from ℓ.
    pub fn criterion(&self) -> Result<bool> {
        sieve_criterion(self.q, &self.d, &self.w_ell()?, self.t_total() as u64, self.delta())
    }
}

/// δ = 1 − Σ_i Σ_j 1/p_j^{(i)}.
pub fn sieve_delta(primes: &[Vec<u64>]) -> f64 {
    1.0 - primes
        .iter()
        .flatten()
        .map(|&p| 1.0 / p as f64)
        .sum::<f64>()
}

/// (q−1)^s/√q > ((t−1)/δ + 2) Π [1 + (d_i W(ℓ_i) − 1)√q], W(ℓ_i) given.
pub fn sieve_criterion(q: u64, d: &[u64], w_ell: &[u64], t_total: u64, delta: f64) -> Result<bool> {
    if !(delta > 0.0) {
        return Err(Error::invalid(format!("delta must be positive, got {delta}")));
    }
    if d.len() != w_ell.len() || d.is_empty() {
        return Err(Error::invalid("d and W(ell) must be nonempty and of equal length"));
    }
    let (lhs, rhs) = sieve_sides(q, d, w_ell, t_total, delta);
    Ok(lhs > rhs)
}

fn sieve_sides(q: u64, d: &[u64], w_ell: &[u64], t_total: u64, delta: f64) -> (f64, f64) {
    let qf = q as f64;
    let sq = qf.sqrt();
    let lhs = (qf - 1.0).powi(d.len() as i32) / sq;
    let factor = (t_total as f64 - 1.0) / delta + 2.0;
    let prod: f64 = d
        .iter()
        .zip(w_ell)
        .map(|(&di, &w)| 1.0 + ((di * w) as f64 - 1.0) * sq)
        .product();
    (lhs, factor * prod)
}

/// Both sides of the prime-sieve inequality, every term counted exactly.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SieveReport {
    pub q: u64,
    pub lhs: u64,
    pub rhs: i64,
    pub holds: bool,
}

pub fn sieve_lower_bound_check(
    ctx: &FieldCtx,
    config: &SieveConfig,
    a: &[FqElem],
    b: FqElem,
    budget: WorkBudget,
) -> Result<SieveReport> {
    if ctx.q() != config.q {
        return Err(Error::invalid("field and sieve configuration disagree on q"));
    }
    let s = config.d.len();
    let full: Vec<u64> = config.d.iter().map(|&di| (config.q - 1) / di).collect();
    let lhs = count_free_solutions(ctx, a, b, &config.d, &full, budget)?;
    let base = count_free_solutions(ctx, a, b, &config.d, &config.ell, budget)? as i64;
    let mut rhs: i64 = 0;
    for i in 0..s {
        for &p in &config.primes[i] {
            let mut r = config.ell.clone();
            r[i] *= p;
            rhs += count_free_solutions(ctx, a, b, &config.d, &r, budget)? as i64;
        }
    }
    rhs -= (config.t_total() as i64 - 1) * base;
    Ok(SieveReport {
        q: config.q,
        lhs,
        rhs,
        holds: lhs as i64 >= rhs,
    })
}

/// One scanned field: whether x² + y² + z² = 1 has a primitive solution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SphereRecord {
    pub q: u64,
    pub has_primitive: bool,
    /// Integer encodings of a primitive solution.
    pub witness: Option<[u64; 3]>,
}

/// Searches primitive (x, y) for which 1 − x² − y² is the square of a
/// primitive element; q must be odd.
pub fn sphere_witness(q: u64) -> Result<Option<[u64; 3]>> {
    if q % 2 == 0 {
        return Err(Error::invalid("the sphere scan needs odd q"));
    }
    let ctx = FieldCtx::of_order(q)?;
    let m = ctx.group_order() as usize;
    let prims = ctx.primitive_elements();
    // root_of[v] = a primitive z with z² = v
    let mut root_of: Vec<Option<FqElem>> = vec![None; m + 1];
    let squares: Vec<FqElem> = prims.iter().map(|&x| ctx.mul(x, x)).collect();
    for (&z, &z2) in prims.iter().zip(&squares) {
        root_of[dense(z2, m)].get_or_insert(z);
    }
    for (&x, &x2) in prims.iter().zip(&squares) {
        let rest = ctx.sub(FqElem::ONE, x2);
        for (&y, &y2) in prims.iter().zip(&squares) {
            if let Some(z) = root_of[dense(ctx.sub(rest, y2), m)] {
                return Ok(Some([ctx.encode(x), ctx.encode(y), ctx.encode(z)]));
            }
        }
    }
    Ok(None)
}

pub fn sphere_has_primitive(q: u64) -> Result<bool> {
    Ok(sphere_witness(q)?.is_some())
}

pub fn sphere_record(q: u64) -> Result<SphereRecord> {
    let witness = sphere_witness(q)?;
    Ok(SphereRecord {
        q,
        has_primitive: witness.is_some(),
        witness,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScanOutcome {
    /// Odd prime powers without a primitive point, increasing.
    pub exceptional: Vec<u64>,
    /// One record per scanned q, increasing, including resumed ones.
    pub records: Vec<SphereRecord>,
}

fn read_checkpoint(path: &Path) -> Result<Vec<SphereRecord>> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    let mut out = Vec::new();
    let lines: Vec<String> = BufReader::new(file).lines().collect::<std::io::Result<_>>()?;
    let n = lines.len();
    for (i, line) in lines.into_iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<SphereRecord>(&line) {
            Ok(r) => out.push(r),
            // a torn final line from an interrupted run is recomputed
            Err(_) if i + 1 == n => break,
            Err(e) => {
                return Err(Error::Io(format!(
                    "checkpoint line {} is not a sphere record: {e}",
                    i + 1
                )))
            }
        }
    }
    Ok(out)
}

/// Scans every odd prime power q ≤ max_q. With a checkpoint path, records
/// already present are reused and new ones are appended in increasing q.
pub fn sphere_scan(max_q: u64, jobs: usize, checkpoint: Option<&Path>) -> Result<ScanOutcome> {
    if max_q > DEFAULT_CAP {
        return Err(Error::CapExceeded {
            q: max_q as u128,
            cap: DEFAULT_CAP,
        });
    }
    let targets = odd_prime_powers(3, max_q);
    let target_set: BTreeSet<u64> = targets.iter().copied().collect();
    let mut done: HashMap<u64, SphereRecord> = HashMap::new();
    let mut writer = None;
    if let Some(path) = checkpoint {
        let existing = read_checkpoint(path)?;
        // rewrite so a torn tail does not survive
        let mut f = File::create(path)?;
        for r in existing {
            writeln!(f, "{}", serde_json::to_string(&r).expect("serializable"))?;
            done.insert(r.q, r);
        }
        drop(f);
        writer = Some(OpenOptions::new().append(true).open(path)?);
    }
    let pending: Vec<u64> = targets.iter().copied().filter(|q| !done.contains_key(q)).collect();

    let jobs = jobs.max(1).min(pending.len().max(1));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Io(e.to_string()))?;
    for chunk in pending.chunks((jobs * 8).max(16)) {
        let mut recs: Vec<SphereRecord> = pool.install(|| {
            chunk
                .par_iter()
                .map(|&q| sphere_record(q))
                .collect::<Result<Vec<_>>>()
        })?;
        recs.sort_by_key(|r| r.q);
        if let Some(w) = writer.as_mut() {
            for r in &recs {
                writeln!(w, "{}", serde_json::to_string(r).expect("serializable"))?;
            }
            w.flush()?;
        }
        for r in recs {
            done.insert(r.q, r);
        }
    }

    let mut records: Vec<SphereRecord> = done
        .into_values()
        .filter(|r| target_set.contains(&r.q))
        .collect();
    records.sort_by_key(|r| r.q);
    let exceptional = records.iter().filter(|r| !r.has_primitive).map(|r| r.q).collect();
    Ok(ScanOutcome {
        exceptional,
        records,
    })
}

/// Both sides of (q−1)³ > √q [1 + (2B − 1)√q]³ with B = w_upper_bound((q+1)/2).
pub fn sphere_sufficiency_sides(q: f64) -> Result<(f64, f64)> {
    let w = w_upper_bound((q + 1.0) / 2.0)?;
    let sq = q.sqrt();
    Ok(((q - 1.0).powi(3), sq * (1.0 + (2.0 * w - 1.0) * sq).powi(3)))
}

pub fn sphere_sufficiency_holds(q: f64) -> Result<bool> {
    let (l, r) = sphere_sufficiency_sides(q)?;
    Ok(l > r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Threshold {
    /// Real crossing point of the sufficiency inequality.
    pub crossing: f64,
    /// Smallest integer at which the inequality holds.
    pub first_integer: u64,
}

/// Locates where the sphere sufficiency inequality starts to hold in [10⁹, 10¹⁰].
pub fn sufficiency_threshold() -> Result<Threshold> {
    let (mut lo, mut hi) = (1e9_f64, 1e10_f64);
    if sphere_sufficiency_holds(lo)? || !sphere_sufficiency_holds(hi)? {
        return Err(Error::Integrity(
            "sufficiency inequality does not change sign on [1e9, 1e10]".into(),
        ));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sphere_sufficiency_holds(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 0.5 {
            break;
        }
    }
    let mut n = hi.ceil() as u64;
    while !sphere_sufficiency_holds(n as f64)? {
        n += 1;
    }
    while sphere_sufficiency_holds((n - 1) as f64)? {
        n -= 1;
    }
    Ok(Threshold {
        crossing: hi,
        first_integer: n,
    })
}

/// Sieve criterion margin for a table row: returns (lhs, rhs).
pub fn sieve_criterion_sides(q: u64, d: &[u64], w_ell: &[u64], t_total: u64, delta: f64) -> (f64, f64) {
    sieve_sides(q, d, w_ell, t_total, delta)
}

/// Checks that every listed value is a prime; used to validate sieve tables.
pub fn all_prime(ps: &[u64]) -> bool {
    ps.iter().all(|&p| is_prime(p))
}
