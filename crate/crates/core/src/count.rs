//! Exhaustive point counts and the combinatorial identities around them:
//! N, N*, N_I, primitive counts P_q (brute force and Möbius inversion),
//! d-th roots of primitive elements and (R,d)-free solution counts.

use std::time::Duration;

use num_integer::Integer;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::factorize;
use crate::budget::WorkBudget;
use crate::error::{Error, Result};
use crate::field::{FieldCtx, FqElem};
use crate::poly::MultiPoly;

/// One counted quantity next to its main term and an optional bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountReport {
    pub q: u64,
    pub p: u64,
    pub n: u32,
    pub poly: String,
    pub method: String,
    pub count: u64,
    pub main_term: f64,
    pub deviation: f64,
    pub bound: Option<f64>,
    pub holds: Option<bool>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl CountReport {
    pub fn new(
        ctx: &FieldCtx,
        poly: impl Into<String>,
        method: impl Into<String>,
        count: u64,
        main_term: f64,
        bound: Option<f64>,
    ) -> Self {
        let deviation = (count as f64 - main_term).abs();
        CountReport {
            q: ctx.q(),
            p: ctx.p(),
            n: ctx.n(),
            poly: poly.into(),
            method: method.into(),
            count,
            main_term,
            deviation,
            bound,
            holds: bound.map(|b| deviation <= b),
            elapsed: Duration::ZERO,
        }
    }

    pub fn with_elapsed(mut self, elapsed: Duration) -> Self {
        self.elapsed = elapsed;
        self
    }
}

/// φ(q−1)^s / q.
pub fn primitive_main_term(ctx: &FieldCtx, s: usize) -> f64 {
    let phi = ctx.group_order_factorization().phi() as f64;
    phi.powi(s as i32) / ctx.q() as f64
}

/// Position of `x` in the dense index: g^k ↦ k, 0 ↦ q−1.
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

/// Sums `body` over the Cartesian product of `domains`, splitting the first
/// coordinate across threads.
fn sum_over_product<F>(domains: &[&[FqElem]], body: F) -> u128
where
    F: Fn(&[FqElem]) -> u128 + Sync,
{
    let k = domains.len();
    if k == 0 {
        return body(&[]);
    }
    if domains.iter().any(|d| d.is_empty()) {
        return 0;
    }
    domains[0]
        .par_iter()
        .map(|&first| {
            let mut point = vec![first; k];
            let mut idx = vec![0usize; k];
            for i in 1..k {
                point[i] = domains[i][0];
            }
            let mut acc = 0u128;
            loop {
                acc += body(&point);
                let mut pos = 1;
                loop {
                    if pos == k {
                        return acc;
                    }
                    idx[pos] += 1;
                    if idx[pos] < domains[pos].len() {
                        point[pos] = domains[pos][idx[pos]];
                        break;
                    }
                    idx[pos] = 0;
                    point[pos] = domains[pos][0];
                    pos += 1;
                }
            }
        })
        .sum()
}

fn product_size(domains: &[&[FqElem]]) -> u128 {
    domains
        .iter()
        .fold(1u128, |acc, d| acc.saturating_mul(d.len() as u128))
}

/// Additive convolution of two dense histograms.
fn convolve(ctx: &FieldCtx, a: &[u128], b: &[u128]) -> Vec<u128> {
    let m = ctx.group_order() as usize;
    let mut out = vec![0u128; m + 1];
    for (i, &ca) in a.iter().enumerate().filter(|(_, &c)| c != 0) {
        let x = undense(ctx, i);
        for (j, &cb) in b.iter().enumerate().filter(|(_, &c)| c != 0) {
            out[dense(ctx.add(x, undense(ctx, j)), m)] += ca * cb;
        }
    }
    out
}

/// #{x ∈ Π domains : f(x) = 0}.
fn count_zeros_over(f: &MultiPoly, domains: &[&[FqElem]], budget: WorkBudget) -> Result<u64> {
    let ctx = &**f.ctx();
    let q = ctx.q() as u128;
    let s = f.vars();
    let terms = f.terms().len().max(1) as u128;
    let naive_cost = product_size(domains).saturating_mul(terms);

    if let Some((parts, c)) = f.separable_parts() {
        let scan: u128 = domains.iter().map(|d| d.len() as u128).sum::<u128>() * terms;
        let fast_cost = scan + (s as u128).saturating_sub(2) * q * q;
        if s > 0 && fast_cost < naive_cost {
            budget.check("separable point count", fast_cost)?;
            let m = ctx.group_order() as usize;
            let value = |part: &[(u32, FqElem)], x: FqElem| {
                part.iter().fold(FqElem::ZERO, |v, &(e, a)| {
                    ctx.add(v, ctx.mul(a, ctx.pow(x, e as u64)))
                })
            };
            // histogram of c + g_1 + ... + g_{s-1}
            let mut acc = vec![0u128; m + 1];
            acc[dense(c, m)] = 1;
            for (part, dom) in parts.iter().zip(domains).take(s - 1) {
                let mut hist = vec![0u128; m + 1];
                for &x in dom.iter() {
                    hist[dense(value(part, x), m)] += 1;
                }
                acc = convolve(ctx, &acc, &hist);
            }
            let total: u128 = domains[s - 1]
                .iter()
                .map(|&x| acc[dense(ctx.neg(value(&parts[s - 1], x)), m)])
                .sum();
            return Ok(total as u64);
        }
    }

    budget.check("exhaustive point count", naive_cost)?;
    Ok(sum_over_product(domains, |x| f.eval_unchecked(x).is_zero() as u128) as u64)
}

/// N(f): zeros in F_q^s.
pub fn count_points(f: &MultiPoly, budget: WorkBudget) -> Result<u64> {
    let all: Vec<FqElem> = f.ctx().elements().collect();
    let domains = vec![all.as_slice(); f.vars()];
    count_zeros_over(f, &domains, budget)
}

/// N*(f): zeros in (F_q^*)^s.
pub fn count_points_nonzero(f: &MultiPoly, budget: WorkBudget) -> Result<u64> {
    let nz: Vec<FqElem> = f.ctx().nonzero_elements().collect();
    let domains = vec![nz.as_slice(); f.vars()];
    count_zeros_over(f, &domains, budget)
}

/// N*(f) by plain enumeration, never taking the separable shortcut.
pub fn count_points_nonzero_naive(f: &MultiPoly, budget: WorkBudget) -> Result<u64> {
    let nz: Vec<FqElem> = f.ctx().nonzero_elements().collect();
    let domains = vec![nz.as_slice(); f.vars()];
    budget.check(
        "exhaustive point count",
        product_size(&domains).saturating_mul(f.terms().len().max(1) as u128),
    )?;
    Ok(sum_over_product(&domains, |x| f.eval_unchecked(x).is_zero() as u128) as u64)
}

/// N_I(f): coordinates outside `subset` (0-based) pinned to zero, the rest free.
pub fn count_points_zeroed(f: &MultiPoly, subset: &[usize], budget: WorkBudget) -> Result<u64> {
    let s = f.vars();
    if let Some(&bad) = subset.iter().find(|&&i| i >= s) {
        return Err(Error::invalid(format!("index {bad} out of range for {s} variables")));
    }
    let all: Vec<FqElem> = f.ctx().elements().collect();
    let zero = [FqElem::ZERO];
    let domains: Vec<&[FqElem]> = (0..s)
        .map(|i| {
            if subset.contains(&i) {
                all.as_slice()
            } else {
                &zero[..]
            }
        })
        .collect();
    count_zeros_over(f, &domains, budget)
}

fn subset_of_mask(mask: u32, s: usize) -> Vec<usize> {
    (0..s).filter(|&i| mask >> i & 1 == 1).collect()
}

/// Σ_I (−1)^{s−|I|} N_I(f).
pub fn nstar_via_inclusion_exclusion(f: &MultiPoly, budget: WorkBudget) -> Result<u64> {
    let s = f.vars();
    if s > 20 {
        return Err(Error::invalid("too many variables for subset expansion"));
    }
    let mut total: i128 = 0;
    for mask in 0..(1u32 << s) {
        let subset = subset_of_mask(mask, s);
        let n = count_points_zeroed(f, &subset, budget)? as i128;
        if (s - subset.len()) % 2 == 0 {
            total += n;
        } else {
            total -= n;
        }
    }
    u64::try_from(total).map_err(|_| Error::Integrity(format!("negative N* = {total}")))
}

fn primitive_table(ctx: &FieldCtx) -> Vec<bool> {
    let m = ctx.group_order();
    (0..m).map(|k| k.gcd(&m) == 1).collect()
}

/// P_q(f): zeros all of whose coordinates are primitive.
pub fn count_primitive_brute(f: &MultiPoly, budget: WorkBudget) -> Result<u64> {
    let ctx = &**f.ctx();
    let s = f.vars();
    let prims = ctx.primitive_elements();
    let is_prim = primitive_table(ctx);
    let terms = f.terms().len().max(1) as u128;

    if let Some((a, b)) = f.split_linear_last() {
        let domains = vec![prims.as_slice(); s - 1];
        budget.check(
            "primitive point count",
            product_size(&domains).saturating_mul(terms),
        )?;
        let phi = prims.len() as u128;
        let total = sum_over_product(&domains, |prefix| {
            let mut point = prefix.to_vec();
            point.push(FqElem::ONE);
            let av = a.eval_unchecked(&point);
            let bv = b.eval_unchecked(&point);
            match av.exponent() {
                Some(_) => {
                    let x = ctx.div(ctx.neg(bv), av).expect("nonzero divisor");
                    x.exponent().map_or(0, |k| is_prim[k as usize] as u128)
                }
                None => {
                    if bv.is_zero() {
                        phi
                    } else {
                        0
                    }
                }
            }
        });
        return Ok(total as u64);
    }

    let domains = vec![prims.as_slice(); s];
    budget.check(
        "primitive point count",
        product_size(&domains).saturating_mul(terms),
    )?;
    Ok(sum_over_product(&domains, |x| f.eval_unchecked(x).is_zero() as u128) as u64)
}

/// N*(f(x^r)) for r_i | q−1. The map x ↦ x^{r_i} is r_i-to-one from F_q^*
/// onto the subgroup of r_i-th powers, so the count is Π r_i times the
/// number of zeros of f on that product of subgroups.
pub fn twisted_nonzero_count(f: &MultiPoly, r: &[u32], budget: WorkBudget) -> Result<u64> {
    let ctx = &**f.ctx();
    let m = ctx.group_order();
    if r.len() != f.vars() {
        return Err(Error::invalid("twist vector length differs from variable count"));
    }
    let mut subgroups = Vec::with_capacity(r.len());
    for &ri in r {
        check_divides(ri as u64, m, "r | q-1")?;
        subgroups.push(
            (0..m / ri as u64)
                .map(|j| ctx.from_exponent(j * ri as u64))
                .collect::<Vec<_>>(),
        );
    }
    let domains: Vec<&[FqElem]> = subgroups.iter().map(|v| v.as_slice()).collect();
    let fibre: u64 = r.iter().map(|&x| x as u64).product();
    Ok(fibre * count_zeros_over(f, &domains, budget)?)
}

/// Σ_{r_i | q−1 squarefree} Πμ(r_i)/Πr_i · N*(f(x^r)), accumulated exactly.
pub fn primitive_via_moebius(f: &MultiPoly, budget: WorkBudget) -> Result<u64> {
    let ctx = &**f.ctx();
    let s = f.vars();
    let fm = ctx.group_order_factorization();
    let rad = fm.radical() as i128;
    let divs = fm.divisors(true);
    let mus: Vec<i128> = divs
        .iter()
        .map(|&r| factorize(r).map(|fr| fr.moebius() as i128))
        .collect::<Result<_>>()?;
    let overflow = || Error::invalid("Möbius accumulation overflows 128 bits");
    let denom = (0..s).try_fold(1i128, |acc, _| acc.checked_mul(rad).ok_or_else(overflow))?;

    let mut idx = vec![0usize; s];
    let mut numer: i128 = 0;
    loop {
        let r: Vec<u32> = idx.iter().map(|&i| divs[i] as u32).collect();
        let mu: i128 = idx.iter().map(|&i| mus[i]).product();
        let rprod: i128 = r.iter().map(|&x| x as i128).product();
        let n = twisted_nonzero_count(f, &r, budget)? as i128;
        let weight = (denom / rprod).checked_mul(mu * n).ok_or_else(overflow)?;
        numer = numer.checked_add(weight).ok_or_else(overflow)?;

        let mut pos = 0;
        loop {
            if pos == s {
                if numer % denom != 0 || numer < 0 {
                    return Err(Error::Integrity(format!(
                        "Möbius sum {numer}/{denom} is not a nonnegative integer"
                    )));
                }
                return Ok((numer / denom) as u64);
            }
            idx[pos] += 1;
            if idx[pos] < divs.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

fn check_divides(d: u64, n: u64, what: &str) -> Result<()> {
    if d == 0 || n % d != 0 {
        return Err(Error::precondition(format!("{what}: {d} does not divide {n}")));
    }
    Ok(())
}

/// #{x primitive : x^d = y}, requiring ord(y) = (q−1)/d.
pub fn primitive_dth_root_count(ctx: &FieldCtx, d: u64, y: FqElem) -> Result<u64> {
    let m = ctx.group_order();
    check_divides(d, m, "d | q-1")?;
    if y.is_zero() || ctx.element_order(y)? != m / d {
        return Err(Error::precondition(format!("y must have order {}", m / d)));
    }
    Ok(ctx
        .primitive_elements()
        .into_iter()
        .filter(|&x| ctx.pow(x, d) == y)
        .count() as u64)
}

/// Whether h lies in the index-d subgroup C_d and is not an ℓ-th power in
/// C_d for any prime ℓ | R.
pub fn is_free(ctx: &FieldCtx, h: FqElem, r: u64, d: u64) -> Result<bool> {
    let m = ctx.group_order();
    check_divides(d, m, "d | q-1")?;
    check_divides(r, m / d, "R | (q-1)/d")?;
    let Some(k) = h.exponent() else {
        return Ok(false);
    };
    let k = k as u64;
    if k % d != 0 {
        return Ok(false);
    }
    let j = k / d;
    Ok(factorize(r)?.primes().all(|l| j % l != 0))
}

/// N(R_1,…,R_s): solutions of Σ a_i y_i = b with each y_i (R_i, d_i)-free.
pub fn count_free_solutions(
    ctx: &FieldCtx,
    a: &[FqElem],
    b: FqElem,
    d: &[u64],
    r: &[u64],
    budget: WorkBudget,
) -> Result<u64> {
    let s = a.len();
    if s == 0 || d.len() != s || r.len() != s {
        return Err(Error::invalid("a, d and R must be nonempty and of equal length"));
    }
    if a.iter().any(|x| x.is_zero()) {
        return Err(Error::invalid("coefficients must be nonzero"));
    }
    let m = ctx.group_order() as usize;
    let mut allowed: Vec<Vec<FqElem>> = Vec::with_capacity(s);
    for i in 0..s {
        let set = ctx
            .nonzero_elements()
            .map(|h| is_free(ctx, h, r[i], d[i]).map(|ok| ok.then_some(h)))
            .filter_map(|x| x.transpose())
            .collect::<Result<Vec<_>>>()?;
        allowed.push(set);
    }
    let mut last_ok = vec![false; m + 1];
    for &h in &allowed[s - 1] {
        last_ok[dense(h, m)] = true;
    }
    let domains: Vec<&[FqElem]> = allowed[..s - 1].iter().map(|v| v.as_slice()).collect();
    budget.check(
        "free solution count",
        product_size(&domains).saturating_mul(s as u128),
    )?;
    let inv_last = ctx.inv(a[s - 1])?;
    let total = sum_over_product(&domains, |prefix| {
        let partial = prefix
            .iter()
            .zip(a)
            .fold(FqElem::ZERO, |acc, (&y, &ai)| ctx.add(acc, ctx.mul(ai, y)));
        let y = ctx.mul(ctx.sub(b, partial), inv_last);
        last_ok[dense(y, m)] as u128
    });
    Ok(total as u64)
}

/// Π φ(R_i)/(R_i d_i) · [(q−1)^s/q − q^{−1/2} Π (1 + (d_i W(R_i) − 1)√q)].
///
/// For b = 0 the error factor q^{−1/2} becomes (q−1)/q, since a Jacobi sum at 0
/// with k nontrivial characters can reach (q−1)q^{k/2−1}.
pub fn free_solutions_lower_bound(q: u64, d: &[u64], r: &[u64], b_is_zero: bool) -> Result<f64> {
    if d.len() != r.len() || d.is_empty() {
        return Err(Error::invalid("d and R must be nonempty and of equal length"));
    }
    let m = q - 1;
    let sq = (q as f64).sqrt();
    let mut eps = 1.0;
    let mut prod = 1.0;
    for (&di, &ri) in d.iter().zip(r) {
        check_divides(di, m, "d | q-1")?;
        check_divides(ri, m / di, "R | (q-1)/d")?;
        let fr = factorize(ri)?;
        eps *= fr.phi() as f64 / (ri * di) as f64;
        prod *= 1.0 + ((di * fr.squarefree_divisor_count()) as f64 - 1.0) * sq;
    }
    let s = d.len() as i32;
    let main = (m as f64).powi(s) / q as f64;
    let err = if b_is_zero { prod * m as f64 / q as f64 } else { prod / sq };
    Ok(eps * (main - err))
}
