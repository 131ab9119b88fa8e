//! Sparse multivariate polynomials over a [`FieldCtx`].
//!
//! Text format (also the CLI's `--poly` argument):
//!
//! ```text
//! poly   := [sign] term (sign term)*
//! term   := factor ('*' factor)*
//! factor := INT | 'g' ['^' INT] | 'x' INDEX ['^' INT]
//! ```
//!
//! Integer literals are reduced modulo p, `g` is the field's generator and
//! variables are 1-indexed. Whitespace is ignored.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_integer::Integer;

use crate::budget::{saturating_pow, WorkBudget};
use crate::error::{Error, Result};
use crate::field::{Embedding, FieldCtx, FqElem};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub exps: Vec<u32>,
    pub coeff: FqElem,
}

impl Term {
    pub fn degree(&self) -> u64 {
        self.exps.iter().map(|&e| e as u64).sum()
    }
}

/// Graded lexicographic order, largest first.
fn grlex_desc(a: &[u32], b: &[u32]) -> Ordering {
    let da: u64 = a.iter().map(|&e| e as u64).sum();
    let db: u64 = b.iter().map(|&e| e as u64).sum();
    db.cmp(&da).then_with(|| b.cmp(a))
}

#[derive(Clone)]
pub struct MultiPoly {
    ctx: Arc<FieldCtx>,
    vars: usize,
    terms: Vec<Term>,
}

impl PartialEq for MultiPoly {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.ctx, &other.ctx) && self.vars == other.vars && self.terms == other.terms
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiPoly[GF({}), s={}]({})", self.ctx.q(), self.vars, self)
    }
}

impl MultiPoly {
    /// Builds a canonical polynomial: like terms merged, zero terms dropped,
    /// terms sorted.
    pub fn from_terms(
        ctx: Arc<FieldCtx>,
        vars: usize,
        terms: impl IntoIterator<Item = (Vec<u32>, FqElem)>,
    ) -> Result<Self> {
        if vars == 0 {
            return Err(Error::invalid("a polynomial needs at least one variable"));
        }
        let mut merged: BTreeMap<Vec<u32>, FqElem> = BTreeMap::new();
        for (exps, c) in terms {
            if exps.len() != vars {
                return Err(Error::invalid(format!(
                    "exponent vector of length {} in a {vars}-variable polynomial",
                    exps.len()
                )));
            }
            let slot = merged.entry(exps).or_insert(FqElem::ZERO);
            *slot = ctx.add(*slot, c);
        }
        let mut terms: Vec<Term> = merged
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(exps, coeff)| Term { exps, coeff })
            .collect();
        terms.sort_by(|a, b| grlex_desc(&a.exps, &b.exps));
        Ok(MultiPoly { ctx, vars, terms })
    }

    pub fn constant(ctx: Arc<FieldCtx>, vars: usize, c: FqElem) -> Result<Self> {
        Self::from_terms(ctx, vars, [(vec![0; vars], c)])
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; 0 for constants and the zero polynomial.
    pub fn degree(&self) -> u64 {
        self.terms.first().map(Term::degree).unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.degree() == 0
    }

    /// Value of the constant term.
    pub fn constant_term(&self) -> FqElem {
        self.terms
            .iter()
            .find(|t| t.degree() == 0)
            .map(|t| t.coeff)
            .unwrap_or(FqElem::ZERO)
    }

    pub fn eval(&self, point: &[FqElem]) -> Result<FqElem> {
        if point.len() != self.vars {
            return Err(Error::invalid(format!(
                "point has {} coordinates, polynomial has {} variables",
                point.len(),
                self.vars
            )));
        }
        Ok(self.eval_unchecked(point))
    }

    /// Evaluation without the dimension check.
    #[inline]
    pub fn eval_unchecked(&self, point: &[FqElem]) -> FqElem {
        let ctx = &*self.ctx;
        let m = ctx.group_order();
        let mut acc = FqElem::ZERO;
        'terms: for t in &self.terms {
            let mut k = t.coeff.exponent().expect("canonical coefficients are nonzero") as u64;
            for (&e, &x) in t.exps.iter().zip(point) {
                if e == 0 {
                    continue;
                }
                match x.exponent() {
                    None => continue 'terms,
                    Some(kx) => k = (k + kx as u64 * e as u64) % m,
                }
            }
            acc = ctx.add(acc, ctx.from_exponent(k));
        }
        acc
    }

    /// f(x_1^{r_1}, …, x_s^{r_s}).
    pub fn twist(&self, r: &[u32]) -> Result<MultiPoly> {
        if r.len() != self.vars {
            return Err(Error::invalid(format!(
                "twist vector has length {}, polynomial has {} variables",
                r.len(),
                self.vars
            )));
        }
        if r.contains(&0) {
            return Err(Error::invalid("twist exponents must be positive"));
        }
        let terms = self.terms.iter().map(|t| {
            let exps = t.exps.iter().zip(r).map(|(&e, &ri)| e * ri).collect();
            (exps, t.coeff)
        });
        MultiPoly::from_terms(self.ctx.clone(), self.vars, terms)
    }

    /// Sets every variable whose index (0-based) is in `zeroed` to zero.
    pub fn with_zeroed(&self, zeroed: &[usize]) -> MultiPoly {
        let terms = self
            .terms
            .iter()
            .filter(|t| zeroed.iter().all(|&i| t.exps[i] == 0))
            .cloned()
            .collect();
        MultiPoly {
            ctx: self.ctx.clone(),
            vars: self.vars,
            terms,
        }
    }

    /// Homogeneous part of top degree.
    pub fn top_form(&self) -> MultiPoly {
        let d = self.degree();
        let terms = self
            .terms
            .iter()
            .filter(|t| t.degree() == d)
            .cloned()
            .collect();
        MultiPoly {
            ctx: self.ctx.clone(),
            vars: self.vars,
            terms,
        }
    }

    /// ∂f/∂x_i, i 0-based.
    pub fn partial(&self, i: usize) -> MultiPoly {
        let ctx = &self.ctx;
        let terms = self.terms.iter().filter_map(|t| {
            let e = t.exps[i];
            let factor = ctx.from_int((e as u64 % ctx.p()) as i64);
            if e == 0 || factor.is_zero() {
                return None;
            }
            let mut exps = t.exps.clone();
            exps[i] -= 1;
            Some((exps, ctx.mul(t.coeff, factor)))
        });
        MultiPoly::from_terms(self.ctx.clone(), self.vars, terms)
            .expect("derivative keeps the variable count")
    }

    /// Image under a field embedding.
    pub fn map_into(&self, big: Arc<FieldCtx>, emb: &Embedding) -> MultiPoly {
        let terms = self.terms.iter().map(|t| (t.exps.clone(), emb.map(t.coeff)));
        MultiPoly::from_terms(big, self.vars, terms).expect("same variable count")
    }

    /// Splits f = A(x') · x_last + B(x') when f has degree ≤ 1 in the last
    /// variable; `None` otherwise.
    pub fn split_linear_last(&self) -> Option<(MultiPoly, MultiPoly)> {
        let last = self.vars - 1;
        if self.terms.iter().any(|t| t.exps[last] > 1) {
            return None;
        }
        let strip = |keep_linear: bool| {
            let terms = self
                .terms
                .iter()
                .filter(|t| (t.exps[last] == 1) == keep_linear)
                .map(|t| {
                    let mut exps = t.exps.clone();
                    exps[last] = 0;
                    (exps, t.coeff)
                });
            MultiPoly::from_terms(self.ctx.clone(), self.vars, terms).expect("same variable count")
        };
        let a = strip(true);
        if a.is_zero() {
            return None;
        }
        Some((a, strip(false)))
    }

    /// If every variable occurs in at most one term and only as a pure power,
    /// returns f as Σ g_i(x_i) + c with each g_i given as `(exponent, coeff)` lists.
    pub(crate) fn separable_parts(&self) -> Option<(Vec<Vec<(u32, FqElem)>>, FqElem)> {
        let mut parts: Vec<Vec<(u32, FqElem)>> = vec![Vec::new(); self.vars];
        let mut c = FqElem::ZERO;
        for t in &self.terms {
            let nz: Vec<usize> = (0..self.vars).filter(|&i| t.exps[i] > 0).collect();
            match nz.as_slice() {
                [] => c = t.coeff,
                [i] => parts[*i].push((t.exps[*i], t.coeff)),
                _ => return None,
            }
        }
        Some((parts, c))
    }

    /// Detects a₁x₁^{d₁} + ⋯ + a_sx_s^{d_s} − b.
    pub fn as_fermat_shape(&self) -> Option<FermatShape> {
        let mut coeffs = vec![FqElem::ZERO; self.vars];
        let mut exps = vec![0u64; self.vars];
        let mut b = FqElem::ZERO;
        for t in &self.terms {
            let nz: Vec<usize> = (0..self.vars).filter(|&i| t.exps[i] > 0).collect();
            match nz.as_slice() {
                [] => b = self.ctx.neg(t.coeff),
                [i] if exps[*i] == 0 => {
                    coeffs[*i] = t.coeff;
                    exps[*i] = t.exps[*i] as u64;
                }
                _ => return None,
            }
        }
        if exps.contains(&0) {
            return None;
        }
        Some(FermatShape { coeffs, exps, b })
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, t) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, "+")?;
            }
            let enc = self.ctx.encode(t.coeff);
            let coeff = if enc < self.ctx.p() {
                enc.to_string()
            } else {
                format!("g^{}", t.coeff.exponent().unwrap())
            };
            let monomial: Vec<String> = t
                .exps
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| {
                    if e == 1 {
                        format!("x{}", i + 1)
                    } else {
                        format!("x{}^{e}", i + 1)
                    }
                })
                .collect();
            match (monomial.is_empty(), coeff.as_str()) {
                (true, _) => write!(f, "{coeff}")?,
                (false, "1") => write!(f, "{}", monomial.join("*"))?,
                (false, _) => write!(f, "{coeff}*{}", monomial.join("*"))?,
            }
        }
        Ok(())
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

enum Factor {
    Int(u128),
    GenPow(u64),
    Var(usize, u32),
}

impl<'a> Parser<'a> {
    fn err<T>(&self, pos: usize, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            position: pos,
            message: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn number(&mut self) -> Result<u128> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err(start, "expected a number");
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse::<u128>()
            .or_else(|_| self.err(start, "number too large"))
    }

    fn exponent(&mut self) -> Result<u128> {
        if self.peek() != Some(b'^') {
            return Ok(1);
        }
        self.pos += 1;
        if self.peek() == Some(b'-') {
            return self.err(self.pos, "negative exponent");
        }
        self.number()
    }

    fn factor(&mut self) -> Result<Factor> {
        let at = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_digit() => Ok(Factor::Int(self.number()?)),
            Some(b'g') => {
                self.pos += 1;
                let e = self.exponent()?;
                Ok(Factor::GenPow(u64::try_from(e).or_else(|_| self.err(at, "exponent too large"))?))
            }
            Some(b'x') => {
                self.pos += 1;
                let idx_at = self.pos;
                let idx = self.number()?;
                if idx == 0 {
                    return self.err(idx_at, "variables are numbered from 1");
                }
                if idx > 64 {
                    return self.err(idx_at, "variable index too large");
                }
                let e = self.exponent()?;
                let e = u32::try_from(e).or_else(|_| self.err(at, "exponent too large"))?;
                Ok(Factor::Var(idx as usize, e))
            }
            Some(c) => self.err(self.pos, format!("unexpected character '{}'", c as char)),
            None => self.err(self.pos, "unexpected end of input"),
        }
    }
}

/// Parses the textual polynomial format; the variable count is the highest
/// index mentioned (at least 1).
pub fn parse_poly(text: &str, ctx: Arc<FieldCtx>) -> Result<MultiPoly> {
    parse_poly_with_vars(text, ctx, 0)
}

/// As [`parse_poly`], padding to at least `min_vars` variables.
pub fn parse_poly_with_vars(text: &str, ctx: Arc<FieldCtx>, min_vars: usize) -> Result<MultiPoly> {
    let mut ps = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let p = ctx.p() as u128;
    let mut raw: Vec<(BTreeMap<usize, u32>, FqElem)> = Vec::new();
    let mut max_var = 0usize;
    let mut first = true;
    loop {
        let mut negative = false;
        match ps.peek() {
            Some(b'+') | Some(b'-') => {
                negative = ps.src[ps.pos] == b'-';
                ps.pos += 1;
            }
            None if first => return ps.err(ps.pos, "empty polynomial"),
            None => break,
            Some(_) if !first => {
                return ps.err(ps.pos, "expected '+' or '-'");
            }
            Some(_) => {}
        }
        first = false;
        let mut coeff = FqElem::ONE;
        let mut mono: BTreeMap<usize, u32> = BTreeMap::new();
        loop {
            match ps.factor()? {
                Factor::Int(v) => coeff = ctx.mul(coeff, ctx.from_int((v % p) as i64)),
                Factor::GenPow(e) => coeff = ctx.mul(coeff, ctx.pow(ctx.generator(), e)),
                Factor::Var(i, e) => {
                    max_var = max_var.max(i);
                    *mono.entry(i).or_insert(0) += e;
                }
            }
            if ps.peek() == Some(b'*') {
                ps.pos += 1;
            } else {
                break;
            }
        }
        if negative {
            coeff = ctx.neg(coeff);
        }
        raw.push((mono, coeff));
    }
    let vars = max_var.max(min_vars).max(1);
    let terms = raw.into_iter().map(|(mono, c)| {
        let mut exps = vec![0u32; vars];
        for (i, e) in mono {
            exps[i - 1] = e;
        }
        (exps, c)
    });
    MultiPoly::from_terms(ctx, vars, terms)
}

/// a₁x₁^{d₁} + ⋯ + a_sx_s^{d_s} = b.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FermatShape {
    pub coeffs: Vec<FqElem>,
    pub exps: Vec<u64>,
    pub b: FqElem,
}

impl FermatShape {
    pub fn new(coeffs: Vec<FqElem>, exps: Vec<u64>, b: FqElem) -> Result<Self> {
        if coeffs.is_empty() || coeffs.len() != exps.len() {
            return Err(Error::invalid(
                "coefficient and exponent vectors must be nonempty and of equal length",
            ));
        }
        if coeffs.iter().any(|c| c.is_zero()) {
            return Err(Error::invalid("Fermat coefficients must be nonzero"));
        }
        if exps.contains(&0) {
            return Err(Error::invalid("Fermat exponents must be positive"));
        }
        Ok(FermatShape { coeffs, exps, b })
    }

    pub fn vars(&self) -> usize {
        self.coeffs.len()
    }

    /// Σ a_i x_i^{d_i} − b as a polynomial.
    pub fn to_poly(&self, ctx: Arc<FieldCtx>) -> Result<MultiPoly> {
        let s = self.vars();
        let mut terms: Vec<(Vec<u32>, FqElem)> = Vec::with_capacity(s + 1);
        for (i, (&a, &d)) in self.coeffs.iter().zip(&self.exps).enumerate() {
            let mut exps = vec![0u32; s];
            exps[i] = u32::try_from(d).map_err(|_| Error::invalid("exponent too large"))?;
            terms.push((exps, a));
        }
        terms.push((vec![0; s], ctx.neg(self.b)));
        MultiPoly::from_terms(ctx, s, terms)
    }
}

/// Outcome of the Dwork-regularity checker.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DworkStatus {
    /// Diagonal top form with nonzero coefficients, degree prime to p.
    RegularCertified,
    NotRegular,
    Unknown,
}

pub const DEFAULT_MAX_EXTENSION: u32 = 3;

/// Point-evaluation allowance for the singular-point search.
const SINGULAR_SEARCH_BUDGET: WorkBudget = WorkBudget::new(50_000_000);

pub fn dwork_regularity_check(f: &MultiPoly, max_extension: u32) -> Result<DworkStatus> {
    dwork_regularity_check_with_budget(f, max_extension, SINGULAR_SEARCH_BUDGET)
}

pub fn dwork_regularity_check_with_budget(
    f: &MultiPoly,
    max_extension: u32,
    budget: WorkBudget,
) -> Result<DworkStatus> {
    if f.is_constant() {
        return Err(Error::precondition("Dwork regularity needs a nonconstant polynomial"));
    }
    let ctx = f.ctx();
    let d = f.degree();
    if d.gcd(&ctx.p()) != 1 {
        return Ok(DworkStatus::NotRegular);
    }
    let s = f.vars();
    let top = f.top_form();

    // Every proper zeroing must keep the degree.
    let restrictions: Vec<(Vec<usize>, MultiPoly)> = (0u64..(1u64 << s) - 1)
        .map(|mask| {
            let zeroed: Vec<usize> = (0..s).filter(|&i| mask >> i & 1 == 1).collect();
            let g = top.with_zeroed(&zeroed);
            (zeroed, g)
        })
        .collect();
    if restrictions.iter().any(|(_, g)| g.is_zero()) {
        return Ok(DworkStatus::NotRegular);
    }

    let diagonal = top.terms().len() == s
        && top
            .terms()
            .iter()
            .all(|t| t.exps.iter().filter(|&&e| e > 0).count() == 1);
    if diagonal {
        return Ok(DworkStatus::RegularCertified);
    }

    // Search for singular projective points of each restricted top form.
    for j in 1..=max_extension.max(1) {
        let big_q = (ctx.q() as u128).checked_pow(j);
        let Some(big_q) = big_q.filter(|&v| v <= crate::field::DEFAULT_CAP as u128) else {
            break;
        };
        let big = if j == 1 {
            ctx.clone()
        } else {
            Arc::new(FieldCtx::new(ctx.p(), ctx.n() * j)?)
        };
        let emb = ctx.embedding_into(&big)?;
        let mut exhausted = false;
        for (zeroed, g) in &restrictions {
            let live: Vec<usize> = (0..s).filter(|i| !zeroed.contains(i)).collect();
            if live.len() < 2 {
                continue;
            }
            let m = live.len() as u32;
            let points = saturating_pow(big_q, m - 1).saturating_mul(m as u128);
            if budget.check("singular point search", points).is_err() {
                exhausted = true;
                continue;
            }
            let gb = g.map_into(big.clone(), &emb);
            let grads: Vec<MultiPoly> = live.iter().map(|&i| gb.partial(i)).collect();
            if has_singular_point(&big, s, &live, &grads) {
                return Ok(DworkStatus::NotRegular);
            }
        }
        if exhausted {
            break;
        }
    }
    Ok(DworkStatus::Unknown)
}

/// Enumerates projective points (first nonzero live coordinate = 1) and
/// reports whether all gradient components vanish somewhere.
fn has_singular_point(big: &FieldCtx, s: usize, live: &[usize], grads: &[MultiPoly]) -> bool {
    let q = big.q();
    let m = live.len();
    let all: Vec<FqElem> = big.elements().collect();
    let mut point = vec![FqElem::ZERO; s];
    for lead in 0..m {
        // coordinates before `lead` are zero, `lead` is one, the rest free
        let free = m - lead - 1;
        let total = (q as u128).pow(free as u32);
        for mut idx in 0..total {
            for &i in live {
                point[i] = FqElem::ZERO;
            }
            point[live[lead]] = FqElem::ONE;
            for &i in &live[lead + 1..] {
                point[i] = all[(idx % q as u128) as usize];
                idx /= q as u128;
            }
            if grads.iter().all(|g| g.eval_unchecked(&point).is_zero()) {
                return true;
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(q: u64) -> Arc<FieldCtx> {
        Arc::new(FieldCtx::of_order(q).unwrap())
    }

    fn el(ctx: &FieldCtx, v: u64) -> FqElem {
        ctx.from_encoding(v).unwrap()
    }

    #[test]
    fn parse_examples() {
        let f7 = field(7);
        let sphere = parse_poly("x1^2+x2^2+x3^2-1", f7.clone()).unwrap();
        assert_eq!(sphere.terms().len(), 4);
        assert_eq!(sphere.vars(), 3);

        let plane = parse_poly("x1+x2+x3", field(17)).unwrap();
        assert_eq!(plane.terms().len(), 3);

        let f5 = field(5);
        let mono = parse_poly("3*x1^2*x2", f5.clone()).unwrap();
        assert_eq!(mono.terms().len(), 1);
        assert_eq!(f5.encode(mono.terms()[0].coeff), 3);
        assert_eq!(mono.terms()[0].exps, vec![2, 1]);
    }

    #[test]
    fn parse_errors_carry_positions() {
        let f5 = field(5);
        let e = parse_poly("x1^-2", f5.clone()).unwrap_err();
        assert_eq!(e.position(), Some(3));
        let e = parse_poly("x0+1", f5.clone()).unwrap_err();
        assert_eq!(e.position(), Some(1));
        let e = parse_poly("x1 + $", f5.clone()).unwrap_err();
        assert_eq!(e.position(), Some(5));
        assert!(parse_poly("", f5.clone()).is_err());
        assert!(parse_poly("x1 x2", f5.clone()).is_err());
        assert!(parse_poly("x1+", f5).is_err());
    }

    #[test]
    fn parse_reduces_and_merges() {
        let f5 = field(5);
        let f = parse_poly("7*x1 + 3*x1 - x2*x2 + 10", f5.clone()).unwrap();
        // 7+3 = 10 ≡ 0 cancels, constant 10 ≡ 0 drops
        assert_eq!(f.to_string(), "4*x2^2");
        let g = parse_poly("- x1 + g^2", f5.clone()).unwrap();
        assert_eq!(g.to_string(), "4*x1+4");
    }

    #[test]
    fn serialize_parse_identity() {
        for q in [5u64, 9, 16, 49] {
            let ctx = field(q);
            for text in ["x1^2+x2^2+x3^2-1", "3*x1^2*x2 + x2 + 2", "g^3*x1*x2^4 + g*x3 - g^7", "x2"] {
                let f = parse_poly(text, ctx.clone()).unwrap();
                let again = parse_poly(&f.to_string(), ctx.clone()).unwrap();
                assert_eq!(f, again, "q={q} text={text}");
            }
        }
    }

    #[test]
    fn eval_examples() {
        let f5 = field(5);
        let f = parse_poly("x1+x2+x3", f5.clone()).unwrap();
        let two = el(&f5, 2);
        assert_eq!(f5.encode(f.eval(&[two, two, two]).unwrap()), 1);
        assert!(f.eval(&[two, two]).is_err());

        let f7 = field(7);
        let s = parse_poly("x1^2+x2^2+x3^2-1", f7.clone()).unwrap();
        let pt = [el(&f7, 3), el(&f7, 3), el(&f7, 5)];
        assert!(s.eval(&pt).unwrap().is_zero());

        let c = MultiPoly::constant(f7.clone(), 2, el(&f7, 4)).unwrap();
        assert_eq!(f7.encode(c.eval(&[FqElem::ZERO, el(&f7, 6)]).unwrap()), 4);
    }

    #[test]
    fn eval_matches_naive_power_products() {
        let ctx = field(27);
        let f = parse_poly("g*x1^3*x2 + 2*x2^5 + x1*x2*x3 + g^4", ctx.clone()).unwrap();
        let all: Vec<FqElem> = ctx.elements().collect();
        for &a in &all {
            for &b in all.iter().step_by(3) {
                for &c in all.iter().step_by(5) {
                    let naive = {
                        let t1 = ctx.mul(ctx.generator(), ctx.mul(ctx.pow(a, 3), b));
                        let t2 = ctx.mul(ctx.from_int(2), ctx.pow(b, 5));
                        let t3 = ctx.mul(a, ctx.mul(b, c));
                        let t4 = ctx.pow(ctx.generator(), 4);
                        ctx.add(ctx.add(t1, t2), ctx.add(t3, t4))
                    };
                    assert_eq!(f.eval(&[a, b, c]).unwrap(), naive);
                }
            }
        }
    }

    #[test]
    fn twist_examples() {
        let f5 = field(5);
        let f = parse_poly("x1+x2", f5.clone()).unwrap();
        assert_eq!(f.twist(&[2, 1]).unwrap().to_string(), "x1^2+x2");
        let s = parse_poly("x1^2+x2^2+x3^2-1", f5.clone()).unwrap();
        assert_eq!(
            s.twist(&[2, 2, 2]).unwrap(),
            parse_poly("x1^4+x2^4+x3^4-1", f5.clone()).unwrap()
        );
        assert_eq!(s.twist(&[1, 1, 1]).unwrap(), s);
        assert!(s.twist(&[1, 1]).is_err());
    }

    #[test]
    fn twist_commutes_with_evaluation() {
        for q in [4u64, 5, 7, 8, 9, 11, 13, 16, 25, 27, 49] {
            let ctx = field(q);
            let f = parse_poly("x1^2*x2 + 3*x2^3 + g*x1 + 1", ctx.clone()).unwrap();
            for r in [[1u32, 1], [2, 3], [3, 2], [4, 1]] {
                let t = f.twist(&r).unwrap();
                for a in ctx.elements() {
                    for b in ctx.elements() {
                        let lhs = t.eval(&[a, b]).unwrap();
                        let rhs = f
                            .eval(&[ctx.pow(a, r[0] as u64), ctx.pow(b, r[1] as u64)])
                            .unwrap();
                        assert_eq!(lhs, rhs);
                    }
                }
            }
        }
    }

    #[test]
    fn fermat_detection() {
        let f7 = field(7);
        let s = parse_poly("x1^2+x2^2+x3^2-1", f7.clone()).unwrap();
        let shape = s.as_fermat_shape().unwrap();
        assert_eq!(shape.coeffs, vec![FqElem::ONE; 3]);
        assert_eq!(shape.exps, vec![2, 2, 2]);
        assert_eq!(shape.b, FqElem::ONE);

        let f5 = field(5);
        let l = parse_poly("x1+x2", f5.clone()).unwrap().as_fermat_shape().unwrap();
        assert_eq!(l.exps, vec![1, 1]);
        assert!(l.b.is_zero());

        assert!(parse_poly("x1*x2-1", f5.clone()).unwrap().as_fermat_shape().is_none());
        assert!(parse_poly("x1^2+x1+x2", f5.clone()).unwrap().as_fermat_shape().is_none());
        assert!(parse_poly_with_vars("x1+1", f5, 2).unwrap().as_fermat_shape().is_none());
    }

    #[test]
    fn fermat_shape_round_trip() {
        let ctx = field(49);
        let g = ctx.generator();
        let shape = FermatShape::new(
            vec![g, ctx.pow(g, 5), FqElem::ONE],
            vec![3, 1, 8],
            ctx.pow(g, 11),
        )
        .unwrap();
        let back = shape.to_poly(ctx.clone()).unwrap().as_fermat_shape().unwrap();
        assert_eq!(back, shape);
        assert!(FermatShape::new(vec![FqElem::ZERO], vec![1], g).is_err());
    }

    #[test]
    fn dwork_examples() {
        let f5 = field(5);
        let cubic = parse_poly("x1^3+x2^3+x1", f5.clone()).unwrap();
        assert_eq!(
            dwork_regularity_check(&cubic, DEFAULT_MAX_EXTENSION).unwrap(),
            DworkStatus::RegularCertified
        );
        let square = parse_poly("x1^2+2*x1*x2+x2^2", f5.clone()).unwrap();
        assert_eq!(
            dwork_regularity_check(&square, DEFAULT_MAX_EXTENSION).unwrap(),
            DworkStatus::NotRegular
        );
        let fifth = parse_poly("x1^5+x2^5", f5.clone()).unwrap();
        assert_eq!(
            dwork_regularity_check(&fifth, DEFAULT_MAX_EXTENSION).unwrap(),
            DworkStatus::NotRegular
        );
        let constant = parse_poly("3", f5).unwrap();
        assert!(dwork_regularity_check(&constant, 1).is_err());
    }

    #[test]
    fn dwork_degree_drop_and_unknown() {
        let f7 = field(7);
        // zeroing x2 kills the top form
        let drop = parse_poly("x1*x2+x1", f7.clone()).unwrap();
        assert_eq!(dwork_regularity_check(&drop, 1).unwrap(), DworkStatus::NotRegular);
        // x1^2 + x1*x2 + x2^2 is a smooth non-diagonal conic over F_7
        let smooth = parse_poly("x1^2+x1*x2+x2^2", f7).unwrap();
        assert_eq!(dwork_regularity_check(&smooth, 2).unwrap(), DworkStatus::Unknown);
    }
}
