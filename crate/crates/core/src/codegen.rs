//! GRS construction of generator matrices that fit a support matrix.
//!
//! Row `i` of `G` is `P_i` evaluated at the points `a*_1..a*_n`, so every
//! zero that `M` demands is automatic. `G = T V` with `T` the coefficient
//! matrix of the `P_i` and `V` the `m x n` Vandermonde matrix (`V[i][j] =
//! a*_j^i`), and with distinct points `G` is MDS exactly when `det T`,
//! i.e. `W` at the points, is nonzero.

use std::collections::HashMap;

use itertools::Itertools;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{FieldElem, FieldMatrix, FieldSpec};
use crate::polyring::{Monomial, MultiPoly};
use crate::structures::{mds_condition, to_root_family, RootFamily, SupportMatrix};

pub const DEFAULT_SEED: u64 = 0x4d44_5346;
pub const DEFAULT_BUDGET: u64 = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    /// Greedy, then exhaustive if greedy dead-ends.
    #[default]
    Auto,
    Greedy,
    Exhaustive,
    Random,
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Strategy::Auto),
            "greedy" => Ok(Strategy::Greedy),
            "exhaustive" => Ok(Strategy::Exhaustive),
            "random" => Ok(Strategy::Random),
            _ => Err(Error::Parse(format!("unknown strategy {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    pub strategy: Strategy,
    pub seed: u64,
    /// Node budget for exhaustive search, sample count for random search.
    pub budget: u64,
    /// Permit fields below `n + m - 1`.
    pub allow_small_field: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            strategy: Strategy::Auto,
            seed: DEFAULT_SEED,
            budget: DEFAULT_BUDGET,
            allow_small_field: false,
        }
    }
}

/// `m x n` matrix with entry `(i, j) = points[j]^i`.
pub fn vandermonde(field: &FieldSpec, points: &[FieldElem], m: usize) -> FieldMatrix {
    let mut v = FieldMatrix::zeros(field, m, points.len());
    for (j, &x) in points.iter().enumerate() {
        let mut power = FieldElem::ONE;
        for i in 0..m {
            v.set(i, j, power);
            power = field.mul(power, x);
        }
    }
    v
}

/// Coefficients (low-to-high, length `m`) of `prod (x - r)` over the field.
fn numeric_coeffs(field: &FieldSpec, roots: &[FieldElem], m: usize) -> Vec<FieldElem> {
    let mut c = vec![FieldElem::ZERO; m.max(roots.len() + 1)];
    c[0] = FieldElem::ONE;
    for (deg, &r) in roots.iter().enumerate() {
        for j in (0..=deg + 1).rev() {
            let shifted = if j > 0 { c[j - 1] } else { FieldElem::ZERO };
            c[j] = field.sub(shifted, field.mul(r, c[j]));
        }
    }
    c.truncate(m);
    c
}

fn root_values(family: &RootFamily, i: usize, values: &[FieldElem]) -> Result<Vec<FieldElem>> {
    family
        .roots(i)
        .into_iter()
        .map(|v| values.get(v as usize - 1).copied().ok_or(Error::MissingAssignment(v)))
        .collect()
}

/// `T[i][j]` = coefficient of `x^j` in `P_i` at the given variable values
/// (`values[v - 1]` is the value of `a_v`). `det T` equals `W` evaluated
/// at the same point.
pub fn transformation(family: &RootFamily, values: &[FieldElem], field: &FieldSpec) -> Result<FieldMatrix> {
    let m = family.m();
    let mut t = FieldMatrix::zeros(field, m, m);
    for i in 0..m {
        let coeffs = numeric_coeffs(field, &root_values(family, i, values)?, m);
        for (j, c) in coeffs.into_iter().enumerate() {
            t.set(i, j, c);
        }
    }
    Ok(t)
}

/// `P_i(x)` computed directly as a product of linear factors.
fn eval_row_poly(family: &RootFamily, i: usize, values: &[FieldElem], x: FieldElem, field: &FieldSpec) -> Result<FieldElem> {
    Ok(root_values(family, i, values)?
        .into_iter()
        .fold(FieldElem::ONE, |acc, r| field.mul(acc, field.sub(x, r))))
}

/// A polynomial over GF(q) being specialized one variable at a time.
#[derive(Debug, Clone)]
struct Residue {
    terms: HashMap<Monomial, FieldElem>,
}

impl Residue {
    fn new(p: &MultiPoly, field: &FieldSpec) -> Self {
        let terms = p
            .terms()
            .map(|(m, c)| (m.clone(), field.from_int(c)))
            .filter(|(_, c)| !c.is_zero())
            .collect();
        Residue { terms }
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn mentions(&self, v: u32) -> bool {
        self.terms.keys().any(|m| m.exponent(v) > 0)
    }

    fn substitute(&self, v: u32, value: FieldElem, field: &FieldSpec) -> Residue {
        let mut terms: HashMap<Monomial, FieldElem> = HashMap::with_capacity(self.terms.len());
        for (m, &c) in &self.terms {
            let (rest, e) = m.split_off(v);
            let c = if e == 0 { c } else { field.mul(c, field.pow(value, e as u64)) };
            if c.is_zero() {
                continue;
            }
            let slot = terms.entry(rest).or_insert(FieldElem::ZERO);
            *slot = field.add(*slot, c);
        }
        terms.retain(|_, c| !c.is_zero());
        Residue { terms }
    }
}

/// Assigns values to `a1..a_total`, the first `distinct` of them pairwise
/// distinct, such that `w` is nonzero at the result.
struct PointSearch<'a> {
    field: &'a FieldSpec,
    total: usize,
    distinct: usize,
    budget: u64,
    tried: u64,
}

impl PointSearch<'_> {
    fn candidates(&self, level: usize, chosen: &[FieldElem]) -> Vec<FieldElem> {
        self.field
            .elements()
            .filter(|c| level >= self.distinct || !chosen[..level.min(self.distinct)].contains(c))
            .collect()
    }

    fn greedy(&mut self, w: &Residue) -> Option<Vec<FieldElem>> {
        let mut residue = w.clone();
        let mut chosen = Vec::with_capacity(self.total);
        for level in 0..self.total {
            let v = level as u32 + 1;
            let mentions = residue.mentions(v);
            let mut picked = None;
            for c in self.candidates(level, &chosen) {
                self.tried += 1;
                let next = if mentions { residue.substitute(v, c, self.field) } else { residue.clone() };
                if !next.is_zero() {
                    picked = Some((c, next));
                    break;
                }
            }
            let (c, next) = picked?;
            chosen.push(c);
            residue = next;
        }
        Some(chosen)
    }

    fn exhaustive(&mut self, residue: &Residue, chosen: &mut Vec<FieldElem>) -> Option<bool> {
        let level = chosen.len();
        if level == self.total {
            return Some(true);
        }
        let v = level as u32 + 1;
        let mentions = residue.mentions(v);
        for c in self.candidates(level, chosen) {
            self.tried += 1;
            if self.tried > self.budget {
                return None;
            }
            let next = if mentions { residue.substitute(v, c, self.field) } else { residue.clone() };
            if next.is_zero() {
                continue;
            }
            chosen.push(c);
            if self.exhaustive(&next, chosen)? {
                return Some(true);
            }
            chosen.pop();
        }
        Some(false)
    }

    fn random(&mut self, family: &RootFamily, seed: u64) -> Result<Option<Vec<FieldElem>>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = self.field.order();
        while self.tried < self.budget {
            self.tried += 1;
            let mut values: Vec<FieldElem> = sample(&mut rng, q as usize, self.distinct)
                .into_iter()
                .map(|x| FieldElem::from_raw(x as u64))
                .collect();
            values.extend((self.distinct..self.total).map(|_| FieldElem::from_raw(rng.random_range(0..q))));
            if transformation(family, &values, self.field)?.invertible()? {
                return Ok(Some(values));
            }
        }
        Ok(None)
    }
}

fn check_field(field: &FieldSpec, n: usize, m: usize, allow_small: bool) -> Result<()> {
    let q = field.order();
    if q < n as u64 {
        return Err(Error::FieldTooSmall { q, n });
    }
    if !allow_small && q < (n + m - 1) as u64 {
        return Err(Error::FieldBelowBound { q, bound: n + m - 1 });
    }
    Ok(())
}

/// Values for all variables of `family` with the first `distinct`
/// pairwise distinct and `det T ≠ 0`.
fn search_values(family: &RootFamily, distinct: usize, field: &FieldSpec, opts: &SearchOptions) -> Result<Vec<FieldElem>> {
    let mut search = PointSearch {
        field,
        total: family.n(),
        distinct,
        budget: opts.budget,
        tried: 0,
    };
    if opts.strategy == Strategy::Random {
        return search
            .random(family, opts.seed)?
            .ok_or(Error::NotFound { tried: search.tried });
    }
    let w = Residue::new(&family.wdet()?, field);
    if w.is_zero() {
        return Err(Error::NotFound { tried: 0 });
    }
    if matches!(opts.strategy, Strategy::Greedy | Strategy::Auto) {
        if let Some(values) = search.greedy(&w) {
            return Ok(values);
        }
        if opts.strategy == Strategy::Greedy {
            return Err(Error::NotFound { tried: search.tried });
        }
    }
    let mut chosen = Vec::with_capacity(search.total);
    match search.exhaustive(&w, &mut chosen) {
        Some(true) => Ok(chosen),
        _ => Err(Error::NotFound { tried: search.tried }),
    }
}

/// Distinct evaluation points `a*_1..a*_n` making `T` non-singular.
///
/// `exhaustive` returns the lexicographically smallest valid tuple (in the
/// element encoding order); `greedy` fixes one variable at a time, keeping
/// `W` nonzero as a polynomial in the remaining variables; `random` draws
/// seeded distinct tuples and tests `det T` directly.
pub fn find_points(family: &RootFamily, field: &FieldSpec, opts: &SearchOptions) -> Result<Vec<FieldElem>> {
    check_field(field, family.n(), family.m(), opts.allow_small_field)?;
    search_values(family, family.n(), field, opts)
}

/// Outcome of checking a generator matrix against a support matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MdsReport {
    pub minors_checked: usize,
    /// Column sets (0-based) whose `m x m` minor vanishes.
    pub singular_minors: Vec<Vec<usize>>,
    /// Entries `(row, col)` (0-based) that are nonzero where `M` has a 0.
    pub fit_violations: Vec<(usize, usize)>,
    pub passed: bool,
}

/// Checks every `m x m` minor of `g` and that `g` fits `m`.
pub fn verify_mds(g: &FieldMatrix, support: &SupportMatrix) -> Result<MdsReport> {
    if g.rows() != support.m() || g.cols() != support.n() {
        return Err(Error::DimensionMismatch(format!(
            "G is {}x{}, M is {}x{}",
            g.rows(),
            g.cols(),
            support.m(),
            support.n()
        )));
    }
    let mut singular_minors = Vec::new();
    let mut minors_checked = 0;
    for cols in (0..g.cols()).combinations(g.rows()) {
        minors_checked += 1;
        if !g.select_columns(&cols).invertible()? {
            singular_minors.push(cols);
        }
    }
    let fit_violations: Vec<(usize, usize)> = (0..g.rows())
        .cartesian_product(0..g.cols())
        .filter(|&(i, j)| !support.get(i, j) && !g.get(i, j).is_zero())
        .collect();
    let passed = singular_minors.is_empty() && fit_violations.is_empty();
    Ok(MdsReport {
        minors_checked,
        singular_minors,
        fit_violations,
        passed,
    })
}

#[derive(Debug, Clone)]
pub struct CodeInstance {
    pub support: SupportMatrix,
    /// Root family read off the support matrix.
    pub base_family: RootFamily,
    /// Family actually used for `T`. Equal to `base_family` unless padding
    /// was needed, in which case rows of low degree carry extra roots in
    /// auxiliary variables `a_{n+1}, ...`.
    pub family: RootFamily,
    pub field: FieldSpec,
    pub points: Vec<FieldElem>,
    pub aux_values: Vec<FieldElem>,
    pub t: FieldMatrix,
    pub v: FieldMatrix,
    pub g: FieldMatrix,
    pub det_t: FieldElem,
    pub w: MultiPoly,
    pub verification: MdsReport,
}

impl CodeInstance {
    pub fn padded(&self) -> bool {
        self.family.n() > self.base_family.n()
    }
}

/// Raises every root set to size `m - 1` with fresh auxiliary roots.
///
/// Fresh roots belong to one polynomial each, so every intersection of
/// root sets is unchanged and the padded family has the rectangular
/// property exactly when the support matrix fails the MDS condition.
pub fn pad_family(family: &RootFamily) -> Result<RootFamily> {
    let m = family.m();
    let mut next = family.n();
    let mut sets = family.sets();
    for set in &mut sets {
        while set.len() < m - 1 {
            next += 1;
            set.push(next as u32);
        }
    }
    RootFamily::new(next, &sets)
}

/// Builds a GRS generator matrix fitting `support`.
///
/// Uses the root family of `support` directly when its `W` is not
/// identically zero. Otherwise (possible only when some row has more than
/// `n - m + 1` ones) the family is padded with auxiliary roots whose
/// values are searched alongside the evaluation points.
pub fn build_code(support: &SupportMatrix, field: &FieldSpec, opts: &SearchOptions) -> Result<CodeInstance> {
    let check = mds_condition(support);
    if !check.holds {
        return Err(Error::NotMdsCondition {
            witness: check.witness.unwrap_or_default(),
        });
    }
    let (m, n) = (support.m(), support.n());
    check_field(field, n, m, opts.allow_small_field)?;
    let base_family = to_root_family(support)?;
    let base_w = base_family.wdet()?;
    let (family, w) = if base_w.is_identically_zero() && base_family.degrees().iter().any(|&d| d < m - 1) {
        let padded = pad_family(&base_family)?;
        let w = padded.wdet()?;
        (padded, w)
    } else {
        (base_family.clone(), base_w)
    };
    let values = search_values(&family, n, field, opts)?;
    let (points, aux_values) = (values[..n].to_vec(), values[n..].to_vec());

    let t = transformation(&family, &values, field)?;
    let v = vandermonde(field, &points, m);
    let g = t.mul(&v)?;
    for i in 0..m {
        for (j, &x) in points.iter().enumerate() {
            assert_eq!(
                g.get(i, j),
                eval_row_poly(&family, i, &values, x, field)?,
                "G = TV must equal P_i(a*_j)"
            );
        }
    }
    let det_t = t.det()?;
    let verification = verify_mds(&g, support)?;
    Ok(CodeInstance {
        support: support.clone(),
        base_family,
        family,
        field: field.clone(),
        points,
        aux_values,
        t,
        v,
        g,
        det_t,
        w,
        verification,
    })
}

/// Smallest prime power `≥ at_least`.
pub fn smallest_prime_power(at_least: u64) -> u64 {
    (at_least.max(2)..)
        .find(|&q| crate::fields::make_field(q).is_ok())
        .expect("prime powers are unbounded")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::make_field;

    fn el(v: &[u64]) -> Vec<FieldElem> {
        v.iter().map(|&x| FieldElem::from_raw(x)).collect()
    }

    fn matrix(rows: &[&str]) -> SupportMatrix {
        let rows: Vec<Vec<bool>> = rows.iter().map(|r| r.chars().map(|c| c == '1').collect()).collect();
        SupportMatrix::from_rows(&rows).unwrap()
    }

    fn fam(n: usize, sets: &[&[u32]]) -> RootFamily {
        let sets: Vec<Vec<u32>> = sets.iter().map(|s| s.to_vec()).collect();
        RootFamily::new(n, &sets).unwrap()
    }

    #[test]
    fn vandermonde_examples() {
        let f = make_field(5).unwrap();
        let v = vandermonde(&f, &el(&[0, 1, 2]), 2);
        assert_eq!(v, FieldMatrix::from_rows(&f, &[vec![1, 1, 1], vec![0, 1, 2]]).unwrap());
        let col = vandermonde(&f, &el(&[3]), 3);
        assert_eq!(col, FieldMatrix::from_rows(&f, &[vec![1], vec![3], vec![4]]).unwrap());
        let ones = vandermonde(&f, &el(&[2, 3, 4]), 1);
        assert_eq!(ones, FieldMatrix::from_rows(&f, &[vec![1, 1, 1]]).unwrap());
    }

    #[test]
    fn transformation_example() {
        let f = make_field(5).unwrap();
        let t = transformation(&fam(3, &[&[3], &[1]]), &el(&[0, 1, 2]), &f).unwrap();
        assert_eq!(t, FieldMatrix::from_rows(&f, &[vec![3, 1], vec![0, 1]]).unwrap());
        assert_eq!(t.det().unwrap(), FieldElem::from_raw(3));
    }

    #[test]
    fn transformation_equal_rows_singular() {
        let f = make_field(7).unwrap();
        let family = fam(3, &[&[1, 2], &[1, 2], &[3]]);
        for a in 0..7 {
            let t = transformation(&family, &el(&[a, (a + 3) % 7, 5]), &f).unwrap();
            assert_eq!(t.det().unwrap(), FieldElem::ZERO);
        }
    }

    #[test]
    fn transformation_constant_rows() {
        let f = make_field(5).unwrap();
        let t = transformation(&fam(2, &[&[], &[]]), &el(&[1, 2]), &f).unwrap();
        assert_eq!(t, FieldMatrix::from_rows(&f, &[vec![1, 0], vec![1, 0]]).unwrap());
    }

    #[test]
    fn transformation_missing_value() {
        let f = make_field(5).unwrap();
        assert_eq!(
            transformation(&fam(3, &[&[3], &[1]]), &el(&[0, 1]), &f),
            Err(Error::MissingAssignment(3))
        );
    }

    #[test]
    fn find_points_examples() {
        let f = make_field(5).unwrap();
        let family = fam(3, &[&[3], &[1]]);
        for strategy in [Strategy::Auto, Strategy::Greedy, Strategy::Exhaustive] {
            let opts = SearchOptions { strategy, ..Default::default() };
            assert_eq!(find_points(&family, &f, &opts).unwrap(), el(&[0, 1, 2]));
        }
        let opts = SearchOptions { strategy: Strategy::Random, ..Default::default() };
        let pts = find_points(&family, &f, &opts).unwrap();
        assert!(transformation(&family, &pts, &f).unwrap().invertible().unwrap());
    }

    #[test]
    fn find_points_failures() {
        let f = make_field(7).unwrap();
        let same = fam(3, &[&[1], &[1]]);
        for strategy in [Strategy::Auto, Strategy::Exhaustive, Strategy::Random] {
            let opts = SearchOptions { strategy, budget: 500, allow_small_field: true, ..Default::default() };
            assert!(matches!(find_points(&same, &f, &opts), Err(Error::NotFound { .. })));
        }
        let f3 = make_field(3).unwrap();
        let wide = fam(4, &[&[1], &[2]]);
        assert_eq!(
            find_points(&wide, &f3, &SearchOptions::default()),
            Err(Error::FieldTooSmall { q: 3, n: 4 })
        );
        assert_eq!(
            find_points(&fam(4, &[&[1], &[2]]), &make_field(4).unwrap(), &SearchOptions::default()),
            Err(Error::FieldBelowBound { q: 4, bound: 5 })
        );
    }

    #[test]
    fn build_code_worked_example() {
        let f = make_field(5).unwrap();
        let code = build_code(&matrix(&["110", "011"]), &f, &SearchOptions::default()).unwrap();
        assert_eq!(code.points, el(&[0, 1, 2]));
        assert_eq!(code.g, FieldMatrix::from_rows(&f, &[vec![3, 4, 0], vec![0, 1, 2]]).unwrap());
        assert_eq!(code.det_t, FieldElem::from_raw(3));
        assert!(code.verification.passed);
        assert_eq!(code.verification.minors_checked, 3);
        let minors: Vec<u64> = (0..3)
            .combinations(2)
            .map(|c| code.g.select_columns(&c).det().unwrap().raw())
            .collect();
        assert_eq!(minors, vec![3, 1, 3]);
        assert!(!code.padded());
    }

    #[test]
    fn build_code_rejects_non_mds() {
        let f = make_field(5).unwrap();
        assert_eq!(
            build_code(&matrix(&["110", "110"]), &f, &SearchOptions::default()).unwrap_err(),
            Error::NotMdsCondition { witness: vec![0, 1] }
        );
    }

    #[test]
    fn build_code_all_ones() {
        let f = make_field(5).unwrap();
        let code = build_code(&matrix(&["111", "111"]), &f, &SearchOptions::default()).unwrap();
        assert!(code.verification.passed);
        assert!(code.padded());
    }

    #[test]
    fn build_code_unequal_supports_needing_padding() {
        // Rows 1 and 2 are full, so P1 = P2 = 1 and W vanishes identically.
        let f = make_field(5).unwrap();
        let support = matrix(&["111", "111", "001"]);
        assert!(mds_condition(&support).holds);
        assert!(to_root_family(&support).unwrap().wdet().unwrap().is_identically_zero());
        let code = build_code(&support, &f, &SearchOptions::default()).unwrap();
        assert!(code.padded() && code.verification.passed);
    }

    #[test]
    fn verify_mds_reports_failures() {
        let f = make_field(5).unwrap();
        let support = matrix(&["110", "011"]);
        let zero_col = FieldMatrix::from_rows(&f, &[vec![3, 0, 0], vec![0, 0, 2]]).unwrap();
        let r = verify_mds(&zero_col, &support).unwrap();
        assert!(!r.passed);
        assert!(r.singular_minors.iter().all(|c| c.contains(&1)));
        assert_eq!(r.singular_minors.len(), 2);

        let unfit = FieldMatrix::from_rows(&f, &[vec![3, 4, 1], vec![0, 1, 2]]).unwrap();
        let r = verify_mds(&unfit, &support).unwrap();
        assert_eq!(r.fit_violations, vec![(0, 2)]);
        assert!(!r.passed);
    }

    #[test]
    fn prime_power_bound() {
        assert_eq!(smallest_prime_power(10), 11);
        assert_eq!(smallest_prime_power(14), 16);
        assert_eq!(smallest_prime_power(8), 8);
        assert_eq!(smallest_prime_power(0), 2);
    }
}
