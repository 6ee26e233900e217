//! Sparse multivariate polynomials over the integers in `a1..an`, and the
//! coefficient polynomials of `prod_{g in roots} (x - a_g)`.
//!
//! Every coefficient `C_{i,j}` is a signed elementary symmetric sum with
//! unit monomial coefficients, so a polynomial that vanishes identically
//! over the integers vanishes over every field. The converse fails in
//! positive characteristic; code that cares about a specific field
//! evaluates there instead of trusting the integer picture.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fields::{make_field, FieldElem, FieldSpec};

/// Prime used for randomized zero testing.
pub const PROBE_PRIME: u64 = 2_147_483_647;

/// Product of variables with positive exponents, sorted by variable index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<(u32, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: u32) -> Self {
        Monomial(vec![(v, 1)])
    }

    /// Builds a monomial from `(variable, exponent)` pairs; zero exponents
    /// are dropped and repeated variables merged.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, u32)>) -> Self {
        let mut map = BTreeMap::new();
        for (v, e) in pairs {
            *map.entry(v).or_insert(0) += e;
        }
        Monomial(map.into_iter().filter(|&(_, e)| e > 0).collect())
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn exponent(&self, v: u32) -> u32 {
        self.0
            .binary_search_by_key(&v, |&(var, _)| var)
            .map_or(0, |i| self.0[i].1)
    }

    pub fn factors(&self) -> &[(u32, u32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_var(&self) -> u32 {
        self.0.last().map_or(0, |&(v, _)| v)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    /// The monomial with `v` removed, and the exponent it had.
    pub fn split_off(&self, v: u32) -> (Monomial, u32) {
        match self.0.binary_search_by_key(&v, |&(var, _)| var) {
            Ok(i) => {
                let mut rest = self.0.clone();
                let (_, e) = rest.remove(i);
                (Monomial(rest), e)
            }
            Err(_) => (self.clone(), 0),
        }
    }

    fn with_exponent(&self, v: u32, e: u32) -> Monomial {
        let (mut rest, _) = self.split_off(v);
        if e > 0 {
            let pos = rest.0.partition_point(|&(var, _)| var < v);
            rest.0.insert(pos, (v, e));
        }
        rest
    }
}

/// Graded lexicographic order with `a1 > a2 > ...`.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            let (a, b) = (&self.0, &other.0);
            for (x, y) in a.iter().zip(b.iter()) {
                if x.0 != y.0 {
                    // The side holding the smaller variable has a positive
                    // exponent where the other has zero.
                    return y.0.cmp(&x.0);
                }
                if x.1 != y.1 {
                    return x.1.cmp(&y.1);
                }
            }
            a.len().cmp(&b.len())
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, &(v, e)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            if e == 1 {
                write!(f, "a{v}")?;
            } else {
                write!(f, "a{v}^{e}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct MultiPoly {
    nvars: usize,
    terms: BTreeMap<Monomial, i128>,
}

/// Equality of polynomials; the declared variable count is not compared.
impl PartialEq for MultiPoly {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl Eq for MultiPoly {}

impl MultiPoly {
    pub fn zero(nvars: usize) -> Self {
        MultiPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: i128) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, 1)
    }

    /// The variable `a_v` (1-based).
    pub fn var(nvars: usize, v: u32) -> Self {
        assert!(v >= 1 && v as usize <= nvars, "variable a{v} outside 1..={nvars}");
        let mut p = Self::zero(nvars);
        p.add_term(Monomial::var(v), 1);
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, i128)>) -> Self {
        let mut p = Self::zero(nvars);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in canonical (descending graded-lex) order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, i128)> {
        self.terms.iter().rev().map(|(m, &c)| (m, c))
    }

    pub fn coefficient(&self, m: &Monomial) -> i128 {
        self.terms.get(m).copied().unwrap_or(0)
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(Monomial::degree)
    }

    pub fn add_term(&mut self, m: Monomial, c: i128) {
        if c == 0 {
            return;
        }
        debug_assert!(m.max_var() as usize <= self.nvars);
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if *e.get() == 0 {
                    e.remove();
                }
            }
        }
    }

    pub fn is_identically_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        out.nvars = self.nvars.max(other.nvars);
        for (m, &c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &MultiPoly) -> MultiPoly {
        self.add(&other.scale(-1))
    }

    pub fn scale(&self, c: i128) -> MultiPoly {
        if c == 0 {
            return MultiPoly::zero(self.nvars);
        }
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, &v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn mul(&self, other: &MultiPoly) -> MultiPoly {
        let nvars = self.nvars.max(other.nvars);
        // Constants are common in the determinant expansion.
        if let Some(c) = self.as_constant() {
            let mut out = other.scale(c);
            out.nvars = nvars;
            return out;
        }
        if let Some(c) = other.as_constant() {
            let mut out = self.scale(c);
            out.nvars = nvars;
            return out;
        }
        let mut acc: HashMap<Monomial, i128> = HashMap::with_capacity(self.terms.len() * other.terms.len());
        for (ma, &ca) in &self.terms {
            for (mb, &cb) in &other.terms {
                *acc.entry(ma.mul(mb)).or_insert(0) += ca * cb;
            }
        }
        MultiPoly {
            nvars,
            terms: acc.into_iter().filter(|&(_, c)| c != 0).collect(),
        }
    }

    /// `Some(c)` if the polynomial is the constant `c` (including 0).
    pub fn as_constant(&self) -> Option<i128> {
        match self.terms.len() {
            0 => Some(0),
            1 => self.terms.get(&Monomial::one()).copied(),
            _ => None,
        }
    }

    /// Formal partial derivative with respect to `a_var`, applied `times`
    /// times.
    pub fn derivative(&self, var: u32, times: u32) -> MultiPoly {
        self.differentiate(var, times, |e, t| falling_factorial(e, t))
    }

    /// Divided (Hasse) derivative: `D^(t) a^e = binom(e, t) a^(e-t)`.
    /// Equals the ordinary derivative divided by `t!`.
    pub fn hasse_derivative(&self, var: u32, times: u32) -> MultiPoly {
        self.differentiate(var, times, |e, t| binomial(e, t))
    }

    fn differentiate(&self, var: u32, times: u32, factor: impl Fn(u32, u32) -> i128) -> MultiPoly {
        let mut out = MultiPoly::zero(self.nvars);
        for (m, &c) in &self.terms {
            let e = m.exponent(var);
            if e >= times {
                out.add_term(m.with_exponent(var, e - times), c * factor(e, times));
            }
        }
        out
    }

    /// Evaluates at `point` over `field`; integer coefficients are mapped
    /// into the prime subfield first.
    pub fn eval(&self, point: &BTreeMap<u32, FieldElem>, field: &FieldSpec) -> Result<FieldElem> {
        self.eval_with(field, |v| point.get(&v).copied())
    }

    pub fn eval_with(
        &self,
        field: &FieldSpec,
        lookup: impl Fn(u32) -> Option<FieldElem>,
    ) -> Result<FieldElem> {
        let mut acc = FieldElem::ZERO;
        for (m, &c) in &self.terms {
            let mut t = field.from_int(c);
            for &(v, e) in m.factors() {
                let x = lookup(v).ok_or(Error::MissingAssignment(v))?;
                t = field.mul(t, field.pow(x, e as u64));
            }
            acc = field.add(acc, t);
        }
        Ok(acc)
    }

    /// Randomized zero test over GF([`PROBE_PRIME`]): `false` as soon as
    /// one of `trials` uniform points gives a nonzero value. A `false`
    /// answer is always correct; `true` is wrong with probability at most
    /// `(deg / PROBE_PRIME)^trials`.
    pub fn probably_zero(&self, trials: u32, seed: u64) -> bool {
        if self.is_identically_zero() {
            return true;
        }
        let field = probe_field();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..trials.max(1) {
            let point: Vec<FieldElem> = (0..self.nvars)
                .map(|_| FieldElem::from_raw(rng.random_range(0..PROBE_PRIME)))
                .collect();
            let value = self
                .eval_with(&field, |v| point.get(v as usize - 1).copied())
                .expect("every variable is assigned");
            if !value.is_zero() {
                return false;
            }
        }
        true
    }
}

pub(crate) fn probe_field() -> FieldSpec {
    make_field(PROBE_PRIME).expect("PROBE_PRIME is prime")
}

fn falling_factorial(e: u32, t: u32) -> i128 {
    (0..t).map(|i| (e - i) as i128).product()
}

fn binomial(e: u32, t: u32) -> i128 {
    falling_factorial(e, t) / falling_factorial(t, t)
}

/// Canonical text: terms in descending graded-lex order, each written as
/// a signed integer coefficient followed by `*a<i>` or `*a<i>^<e>` factors,
/// separated by single spaces. The zero polynomial is `0`.
impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            let sign = if c < 0 { '-' } else { '+' };
            write!(f, "{sign}{}", c.unsigned_abs())?;
            if !m.is_one() {
                write!(f, "*{m}")?;
            }
        }
        Ok(())
    }
}

/// Parses the canonical text. The variable count is the largest index
/// that occurs.
impl FromStr for MultiPoly {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        if s == "0" {
            return Ok(MultiPoly::zero(0));
        }
        let mut terms = Vec::new();
        let mut nvars = 0usize;
        for tok in s.split_whitespace() {
            let bad = || Error::Parse(format!("bad term {tok:?}"));
            let (sign, rest) = match tok.as_bytes().first() {
                Some(b'+') => (1, &tok[1..]),
                Some(b'-') => (-1, &tok[1..]),
                _ => return Err(bad()),
            };
            let mut parts = rest.split('*');
            let coef: i128 = parts.next().unwrap_or("").parse().map_err(|_| bad())?;
            let mut pairs = Vec::new();
            for factor in parts {
                let body = factor.strip_prefix('a').ok_or_else(bad)?;
                let (v, e) = match body.split_once('^') {
                    Some((v, e)) => (v, e.parse::<u32>().map_err(|_| bad())?),
                    None => (body, 1),
                };
                let v: u32 = v.parse().map_err(|_| bad())?;
                if v == 0 || e == 0 {
                    return Err(bad());
                }
                nvars = nvars.max(v as usize);
                pairs.push((v, e));
            }
            terms.push((Monomial::from_pairs(pairs), sign * coef));
        }
        Ok(MultiPoly::from_terms(nvars, terms))
    }
}

/// A polynomial in `x` whose coefficients live in the integer polynomial
/// ring; `coeffs[j]` is the coefficient of `x^j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniPolyOverRing {
    coeffs: Vec<MultiPoly>,
}

impl UniPolyOverRing {
    pub fn coeffs(&self) -> &[MultiPoly] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn nvars(&self) -> usize {
        self.coeffs.first().map_or(0, MultiPoly::nvars)
    }
}

/// Expands `prod_{g in roots} (x - a_g)` into `m` coefficient polynomials
/// (low-to-high, zero padded). An empty root set gives the constant 1.
pub fn build_p(roots: &[u32], m: usize, nvars: usize) -> Result<UniPolyOverRing> {
    let mut roots = roots.to_vec();
    roots.sort_unstable();
    roots.dedup();
    let d = roots.len();
    if m == 0 || d > m - 1 {
        return Err(Error::DegreeTooHigh {
            row: None,
            degree: d,
            max: m.saturating_sub(1),
        });
    }
    if let Some(&bad) = roots.iter().find(|&&v| v == 0 || v as usize > nvars) {
        return Err(Error::InvalidFamily(format!("root a{bad} outside a1..a{nvars}")));
    }
    let mut coeffs = vec![MultiPoly::zero(nvars); m];
    // The coefficient of x^(d - t) is (-1)^t e_t(roots).
    for mask in 0u32..(1 << d) {
        let t = mask.count_ones() as usize;
        let mono = Monomial(
            roots
                .iter()
                .enumerate()
                .filter(|&(i, _)| mask >> i & 1 == 1)
                .map(|(_, &v)| (v, 1))
                .collect(),
        );
        let sign = if t % 2 == 0 { 1 } else { -1 };
        coeffs[d - t].add_term(mono, sign);
    }
    Ok(UniPolyOverRing { coeffs })
}

/// Determinant of a square matrix of polynomials by Laplace expansion
/// along rows from the bottom up, memoizing minors by their column set.
pub fn det_cofactor(matrix: &[Vec<MultiPoly>]) -> Result<MultiPoly> {
    let size = matrix.len();
    if matrix.iter().any(|r| r.len() != size) {
        return Err(Error::NonSquare {
            rows: size,
            cols: matrix.first().map_or(0, Vec::len),
        });
    }
    if size > 20 {
        return Err(Error::SizeMismatch(format!("{size}x{size} is too large for cofactor expansion")));
    }
    let nvars = matrix.iter().flatten().map(MultiPoly::nvars).max().unwrap_or(0);
    let mut memo: HashMap<u32, MultiPoly> = HashMap::new();
    let full = if size == 0 { 0 } else { (1u32 << size) - 1 };
    Ok(minor(matrix, full, nvars, &mut memo))
}

fn minor(matrix: &[Vec<MultiPoly>], cols: u32, nvars: usize, memo: &mut HashMap<u32, MultiPoly>) -> MultiPoly {
    let t = cols.count_ones() as usize;
    if t == 0 {
        return MultiPoly::one(nvars);
    }
    if let Some(p) = memo.get(&cols) {
        return p.clone();
    }
    let row = &matrix[t - 1];
    let mut acc = MultiPoly::zero(nvars);
    let mut pos = 0;
    for j in 0..matrix.len() {
        if cols >> j & 1 == 0 {
            continue;
        }
        let entry = &row[j];
        if !entry.is_identically_zero() {
            let sub = minor(matrix, cols & !(1 << j), nvars, memo);
            if !sub.is_identically_zero() {
                let term = entry.mul(&sub);
                acc = if (t - 1 + pos) % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
            }
        }
        pos += 1;
    }
    memo.insert(cols, acc.clone());
    acc
}

/// `W(P_1..P_m)`: the determinant of the matrix whose column `j` holds
/// the coefficients of `P_j` (row `i` = coefficient of `x^i`).
pub fn wdet(polys: &[UniPolyOverRing]) -> Result<MultiPoly> {
    let m = polys.len();
    if let Some(bad) = polys.iter().find(|p| p.len() != m) {
        return Err(Error::SizeMismatch(format!(
            "{m} polynomials but one has {} coefficients",
            bad.len()
        )));
    }
    let nvars = polys.first().map_or(0, UniPolyOverRing::nvars);
    if polys.iter().any(|p| p.nvars() != nvars) {
        return Err(Error::SizeMismatch("polynomials over different variable sets".into()));
    }
    let matrix: Vec<Vec<MultiPoly>> = (0..m)
        .map(|i| polys.iter().map(|p| p.coeffs[i].clone()).collect())
        .collect();
    det_cofactor(&matrix)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(s: &str) -> MultiPoly {
        s.parse().unwrap()
    }

    fn texts(u: &UniPolyOverRing) -> Vec<String> {
        u.coeffs().iter().map(|c| c.to_string()).collect()
    }

    #[test]
    fn build_p_examples() {
        assert_eq!(texts(&build_p(&[], 2, 2).unwrap()), ["+1", "0"]);
        assert_eq!(texts(&build_p(&[1], 2, 2).unwrap()), ["-1*a1", "+1"]);
        assert_eq!(
            texts(&build_p(&[1, 2], 3, 2).unwrap()),
            ["+1*a1*a2", "-1*a1 -1*a2", "+1"]
        );
    }

    #[test]
    fn build_p_degree_too_high() {
        assert!(matches!(
            build_p(&[1, 2], 2, 2),
            Err(Error::DegreeTooHigh { degree: 2, max: 1, .. })
        ));
        assert!(matches!(build_p(&[3], 2, 2), Err(Error::InvalidFamily(_))));
    }

    #[test]
    fn wdet_examples() {
        let p = |r: &[u32]| build_p(r, 2, 1).unwrap();
        assert_eq!(wdet(&[p(&[]), p(&[1])]).unwrap().to_string(), "+1");
        assert!(wdet(&[p(&[1]), p(&[1])]).unwrap().is_identically_zero());
        let q = |r: &[u32]| build_p(r, 2, 2).unwrap();
        // Column j holds P_j: det [[-a1, -a2], [1, 1]] = a2 - a1.
        assert_eq!(wdet(&[q(&[1]), q(&[2])]).unwrap().to_string(), "-1*a1 +1*a2");
    }

    #[test]
    fn wdet_size_mismatch() {
        let a = build_p(&[1], 2, 2).unwrap();
        let b = build_p(&[1], 3, 2).unwrap();
        assert!(matches!(wdet(&[a, b]), Err(Error::SizeMismatch(_))));
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(poly("+1*a1^2").derivative(1, 1).to_string(), "+2*a1");
        assert_eq!(poly("+1*a1*a2").derivative(2, 1).to_string(), "+1*a1");
        assert_eq!(poly("+1*a1^2*a2").derivative(1, 2).to_string(), "+2*a2");
        assert!(poly("+7").derivative(1, 1).is_identically_zero());
        assert_eq!(poly("+1*a1^3").hasse_derivative(1, 2).to_string(), "+3*a1");
    }

    #[test]
    fn identically_zero() {
        assert!(MultiPoly::zero(3).is_identically_zero());
        let a1 = MultiPoly::var(2, 1);
        let a2 = MultiPoly::var(2, 2);
        assert!(a1.sub(&a1).is_identically_zero());
        assert!(!a1.sub(&a2).is_identically_zero());
    }

    #[test]
    fn eval_examples() {
        let f5 = make_field(5).unwrap();
        let pt = |a: u64, b: u64| BTreeMap::from([(1, FieldElem::from_raw(a)), (2, FieldElem::from_raw(b))]);
        assert_eq!(poly("+1*a1 -1*a2").eval(&pt(3, 3), &f5).unwrap(), FieldElem::ZERO);
        assert_eq!(poly("+1*a1*a2").eval(&pt(2, 3), &f5).unwrap(), FieldElem::ONE);
        assert_eq!(poly("+1").eval(&BTreeMap::new(), &f5).unwrap(), FieldElem::ONE);
        assert_eq!(
            poly("+1*a3").eval(&pt(1, 1), &f5),
            Err(Error::MissingAssignment(3))
        );
    }

    #[test]
    fn probably_zero_examples() {
        assert!(MultiPoly::zero(4).probably_zero(1, 0));
        let d = poly("+1*a1 -1*a2");
        assert!(!d.probably_zero(3, 0x5eed));
        assert!(d.sub(&d).probably_zero(3, 0x5eed));
    }

    #[test]
    fn canonical_text_is_graded_lex_descending() {
        let p = MultiPoly::from_terms(
            3,
            [
                (Monomial::from_pairs([(3, 2)]), -1),
                (Monomial::from_pairs([(1, 1), (2, 1)]), 1),
                (Monomial::one(), 4),
                (Monomial::var(2), -2),
                (Monomial::from_pairs([(1, 3)]), 1),
            ],
        );
        assert_eq!(p.to_string(), "+1*a1^3 +1*a1*a2 -1*a3^2 -2*a2 +4");
        assert_eq!(poly(&p.to_string()), p);
    }

    #[test]
    fn parse_rejects_garbage() {
        for bad in ["1*a1", "+x", "+1*b2", "+1*a0", "+1*a1^0", ""] {
            assert!(bad.parse::<MultiPoly>().is_err(), "{bad:?}");
        }
    }
}
