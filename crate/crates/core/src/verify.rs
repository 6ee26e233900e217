//! Harness for the "W ≡ 0 implies GRP" conjecture, its converse, the
//! MDS-condition / NRP equivalence and the reduction lemmas.
//!
//! Families are enumerated exhaustively (optionally one per orbit under
//! variable relabeling and swaps of equal-degree polynomials) or sampled
//! with a seeded RNG. Work is spread over rayon; every per-item RNG is
//! derived from `(seed, index)` so reports do not depend on thread count.

use std::collections::BTreeSet;
use std::time::Instant;

use itertools::Itertools;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codegen::transformation;
use crate::error::{Error, Result};
use crate::fields::FieldElem;
use crate::io::{family_to_json, matrix_to_json, FamilyJson, MatrixJson};
use crate::polyring::{probe_field, PROBE_PRIME};
use crate::reduction::{lemma1_check, reduce_all, strongly_reducible_in, weakly_reducible, ReductionTrace};
use crate::structures::{
    all_polys, all_rs_subsets, bits, full_mask, has_grp, has_rp, mds_condition, to_root_family, RootFamily,
    SupportMatrix,
};

pub const DEFAULT_SEED: u64 = crate::codegen::DEFAULT_SEED;

/// Per-item RNG, independent of scheduling.
pub fn item_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

// ---------------------------------------------------------------------------
// Enumeration

/// Maps each membership mask through a permutation of the polynomials.
fn perm_table(perm: &[usize]) -> Vec<u64> {
    let m = perm.len();
    (0..1u64 << m)
        .map(|mask| bits(mask).fold(0, |acc, i| acc | 1 << perm[i]))
        .collect()
}

/// Permutations of `0..m` that keep `degrees` fixed, as mask tables.
fn degree_preserving_perms(degrees: &[usize]) -> Vec<Vec<u64>> {
    let m = degrees.len();
    (0..m)
        .permutations(m)
        .filter(|p| (0..m).all(|i| degrees[p[i]] == degrees[i]))
        .map(|p| perm_table(&p))
        .collect()
}

fn sorted_desc(mut seq: Vec<u64>) -> Vec<u64> {
    seq.sort_unstable_by(|a, b| b.cmp(a));
    seq
}

/// True when `seq` (non-increasing) is the largest of its images.
fn is_orbit_max(seq: &[u64], perms: &[Vec<u64>]) -> bool {
    perms.iter().all(|t| {
        let image = sorted_desc(seq.iter().map(|&c| t[c as usize]).collect());
        image.as_slice() <= seq
    })
}

/// Non-increasing sequences of `n` masks over `m` bits. `target[i]`
/// bounds how many masks may contain bit `i`; with `exact` the bound must
/// be met, otherwise every bit must occur at least once.
struct MaskMultisets<'a> {
    m: usize,
    n: usize,
    target: &'a [usize],
    exact: bool,
    perms: &'a [Vec<u64>],
    out: Vec<Vec<u64>>,
}

impl MaskMultisets<'_> {
    fn run(&mut self, seq: &mut Vec<u64>, counts: &mut [usize], ceiling: u64) {
        let remaining = self.n - seq.len();
        if remaining == 0 {
            let done = if self.exact {
                counts.iter().zip(self.target).all(|(c, t)| c == t)
            } else {
                counts.iter().all(|&c| c > 0)
            };
            if done && is_orbit_max(seq, self.perms) {
                self.out.push(seq.clone());
            }
            return;
        }
        for mask in (0..=ceiling).rev() {
            if bits(mask).any(|i| counts[i] >= self.target[i]) {
                continue;
            }
            for i in bits(mask) {
                counts[i] += 1;
            }
            let left = remaining - 1;
            let feasible = (0..self.m).all(|i| {
                if self.exact {
                    self.target[i] - counts[i] <= left
                } else {
                    counts[i] > 0 || left > 0
                }
            });
            if feasible {
                seq.push(mask);
                self.run(seq, counts, mask);
                seq.pop();
            }
            for i in bits(mask) {
                counts[i] -= 1;
            }
        }
    }
}

/// Column masks in the enumeration use bit `m - 1 - i` for polynomial
/// `i`, so that larger sequences put earlier polynomials first.
fn flip(mask: u64, m: usize) -> u64 {
    bits(mask).fold(0, |acc, i| acc | 1 << (m - 1 - i))
}

fn family_from_columns(m: usize, n: usize, seq: &[u64]) -> RootFamily {
    let mut sets = vec![0u64; m];
    for (j, &col) in seq.iter().enumerate() {
        for i in bits(flip(col, m)) {
            sets[i] |= 1 << j;
        }
    }
    RootFamily::from_masks(n, sets).expect("degrees bounded by the profile")
}

fn variable_columns(family: &RootFamily) -> Vec<u64> {
    (0..family.n())
        .map(|j| family.containing(1 << j))
        .collect()
}

/// Orbit representative of `family` under variable relabeling and
/// permutations of equal-degree polynomials.
///
/// Each variable is described by the set of polynomials containing it,
/// so a family up to relabeling is the multiset of these masks. The
/// representative is the largest (as a non-increasing sequence) over
/// the allowed polynomial permutations; variable `j` of the result is the
/// `j`-th mask of that sequence, which puts unused variables last.
pub fn canonical_form(family: &RootFamily) -> RootFamily {
    let m = family.m();
    let mut degrees = family.degrees();
    degrees.reverse();
    let perms = degree_preserving_perms(&degrees);
    let cols: Vec<u64> = variable_columns(family).into_iter().map(|c| flip(c, m)).collect();
    let best = perms
        .iter()
        .map(|t| sorted_desc(cols.iter().map(|&c| t[c as usize]).collect()))
        .max()
        .expect("identity permutation");
    family_from_columns(m, family.n(), &best)
}

fn check_profile(m: usize, n: usize, profile: &[usize]) -> Result<()> {
    if m < 2 {
        return Err(Error::Precondition(format!("m = {m} must be at least 2")));
    }
    if profile.len() != m {
        return Err(Error::Precondition(format!("profile has {} entries, m = {m}", profile.len())));
    }
    if let Some(&d) = profile.iter().find(|&&d| d > m - 1) {
        return Err(Error::Precondition(format!("degree {d} exceeds m-1 = {}", m - 1)));
    }
    if profile.iter().max() != Some(&(m - 1)) {
        return Err(Error::Precondition("some degree must equal m-1".into()));
    }
    if n > m * (m - 1) || n > crate::structures::MAX_DIM {
        return Err(Error::Precondition(format!("n = {n} exceeds m(m-1) = {}", m * (m - 1))));
    }
    if profile.iter().any(|&d| d > n) {
        return Err(Error::Precondition(format!("n = {n} is smaller than a degree")));
    }
    Ok(())
}

/// Every family on variables `a1..an` with `|N_i| = profile[i]`.
///
/// Families using fewer variables are included, so this covers every
/// `n' ≤ n`. With `canonical`, one representative per orbit (see
/// [`canonical_form`]) is emitted.
pub fn enumerate_families(m: usize, n: usize, profile: &[usize], canonical: bool) -> Result<Vec<RootFamily>> {
    check_profile(m, n, profile)?;
    if canonical {
        let target: Vec<usize> = profile.iter().rev().copied().collect();
        let perms = degree_preserving_perms(&target);
        let mut gen = MaskMultisets {
            m,
            n,
            target: &target,
            exact: true,
            perms: &perms,
            out: Vec::new(),
        };
        gen.run(&mut Vec::with_capacity(n), &mut vec![0; m], full_mask(m));
        return Ok(gen.out.iter().map(|seq| family_from_columns(m, n, seq)).collect());
    }
    let choices: Vec<Vec<u64>> = profile
        .iter()
        .map(|&d| {
            (0..n)
                .combinations(d)
                .map(|c| c.into_iter().fold(0u64, |acc, b| acc | 1 << b))
                .collect()
        })
        .collect();
    Ok(choices
        .into_iter()
        .multi_cartesian_product()
        .map(|sets| RootFamily::from_masks(n, sets).expect("sizes follow the profile"))
        .collect())
}

/// Degree profiles for `m` polynomials with maximum exactly `m - 1`.
/// With `sorted`, only non-decreasing ones.
pub fn all_profiles(m: usize, sorted: bool) -> Vec<Vec<usize>> {
    (0..m)
        .map(|_| 0..m)
        .multi_cartesian_product()
        .filter(|p| p.iter().max() == Some(&(m - 1)))
        .filter(|p| !sorted || p.windows(2).all(|w| w[0] <= w[1]))
        .collect()
}

/// Uniformly random family with the given profile over `a1..an`.
pub fn sample_family<R: Rng>(n: usize, profile: &[usize], rng: &mut R) -> RootFamily {
    let sets = profile
        .iter()
        .map(|&d| sample(rng, n, d).into_iter().fold(0u64, |acc, b| acc | 1 << b))
        .collect();
    RootFamily::from_masks(n, sets).expect("sizes follow the profile")
}

/// Every `m x n` support matrix with no zero row. With `canonical`, one
/// per orbit under row and column permutations.
pub fn enumerate_support_matrices(m: usize, n: usize, canonical: bool) -> Result<Vec<SupportMatrix>> {
    if m < 2 || m > n || n > crate::structures::MAX_DIM {
        return Err(Error::Precondition(format!("need 2 ≤ m ≤ n ≤ 64, got m = {m}, n = {n}")));
    }
    let to_matrix = |cols: &[u64]| {
        let mut rows = vec![0u64; m];
        for (j, &c) in cols.iter().enumerate() {
            for i in bits(c) {
                rows[i] |= 1 << j;
            }
        }
        SupportMatrix::from_masks(n, rows).expect("shape checked")
    };
    if canonical {
        let perms: Vec<Vec<u64>> = (0..m).permutations(m).map(|p| perm_table(&p)).collect();
        let target = vec![n; m];
        let mut gen = MaskMultisets {
            m,
            n,
            target: &target,
            exact: false,
            perms: &perms,
            out: Vec::new(),
        };
        gen.run(&mut Vec::with_capacity(n), &mut vec![0; m], full_mask(m));
        return Ok(gen.out.iter().map(|c| to_matrix(c)).collect());
    }
    if m * n > 24 {
        return Err(Error::Precondition(format!("raw enumeration of 2^{} matrices", m * n)));
    }
    let full = full_mask(n);
    Ok((0..m)
        .map(|_| 1..=full)
        .multi_cartesian_product()
        .map(|rows| SupportMatrix::from_masks(n, rows).expect("shape checked"))
        .collect())
}

/// Random support matrix satisfying the MDS condition. Row weights are
/// drawn uniformly from `n - m + 1..=n`; draws failing the condition are
/// rejected.
pub fn sample_mds_matrix<R: Rng>(m: usize, n: usize, rng: &mut R) -> SupportMatrix {
    loop {
        let rows = (0..m)
            .map(|_| {
                let w = rng.random_range(n - m + 1..=n);
                sample(rng, n, w).into_iter().fold(0u64, |acc, b| acc | 1 << b)
            })
            .collect();
        let matrix = SupportMatrix::from_masks(n, rows).expect("shape checked");
        if mds_condition(&matrix).holds {
            return matrix;
        }
    }
}

// ---------------------------------------------------------------------------
// Conjecture check

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    ConsistentZeroGrp,
    ConsistentNonzeroGnrp,
    /// GRP but `W ≢ 0`: a failure of the converse direction.
    ConsistentNonzeroGrp,
    /// `W ≡ 0` without GRP.
    Counterexample,
}

impl Classification {
    pub fn converse_anomaly(self) -> bool {
        self == Classification::ConsistentNonzeroGrp
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConjectureCheck {
    pub classification: Classification,
    pub zero: bool,
    pub grp: bool,
    /// A randomized verdict was confirmed symbolically.
    pub rechecked: bool,
}

/// Randomized zero test of `W` by evaluating `det T` over GF(2^31 - 1).
pub fn numeric_zero(family: &RootFamily, trials: u32, seed: u64) -> bool {
    let field = probe_field();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials.max(1)).all(|_| {
        let values: Vec<FieldElem> = (0..family.n())
            .map(|_| FieldElem::from_raw(rng.random_range(0..PROBE_PRIME)))
            .collect();
        let t = transformation(family, &values, &field).expect("all variables assigned");
        !t.invertible().expect("square")
    })
}

/// Classifies `family` by whether `W` vanishes identically and whether
/// the family has GRP. With `exact = false` the zero test is randomized
/// (3 trials); a resulting counterexample is confirmed symbolically
/// before being reported.
pub fn check_conjecture(family: &RootFamily, exact: bool, seed: u64) -> Result<ConjectureCheck> {
    let grp = has_grp(family).is_some();
    let mut rechecked = false;
    let zero = if exact {
        family.wdet()?.is_identically_zero()
    } else {
        let z = numeric_zero(family, 3, seed);
        if z && !grp {
            rechecked = true;
            family.wdet()?.is_identically_zero()
        } else {
            z
        }
    };
    let classification = match (zero, grp) {
        (true, true) => Classification::ConsistentZeroGrp,
        (false, false) => Classification::ConsistentNonzeroGnrp,
        (false, true) => Classification::ConsistentNonzeroGrp,
        (true, false) => Classification::Counterexample,
    };
    Ok(ConjectureCheck {
        classification,
        zero,
        grp,
        rechecked,
    })
}

// ---------------------------------------------------------------------------
// Suite

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Exhaustive,
    Random,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(Mode::Exhaustive),
            "random" => Ok(Mode::Random),
            _ => Err(Error::Parse(format!("unknown mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scope {
    pub m: usize,
    /// Variables available; families may use fewer.
    pub n: usize,
    /// `None` covers every profile with maximum degree `m - 1`.
    pub profile: Option<Vec<usize>>,
    pub mode: Mode,
    /// Sample count in random mode.
    pub samples: u64,
    pub seed: u64,
    /// Randomized zero test instead of symbolic `W`.
    pub fast: bool,
    /// Orbit representatives only (exhaustive mode).
    pub canonical: bool,
    /// Cap on families tested in exhaustive mode.
    pub budget: Option<u64>,
}

impl Scope {
    pub fn exhaustive(m: usize, n: usize, profile: Option<Vec<usize>>) -> Self {
        Scope {
            m,
            n,
            profile,
            mode: Mode::Exhaustive,
            samples: 0,
            seed: DEFAULT_SEED,
            fast: false,
            canonical: true,
            budget: None,
        }
    }

    pub fn random(m: usize, n: usize, profile: Option<Vec<usize>>, samples: u64, seed: u64) -> Self {
        Scope {
            m,
            n,
            profile,
            mode: Mode::Random,
            samples,
            seed,
            fast: false,
            canonical: false,
            budget: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlaggedFamily {
    pub family: FamilyJson,
    pub classification: Classification,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct Counts {
    pub tested: u64,
    pub w_zero: u64,
    pub grp: u64,
    pub zero_grp: u64,
    pub nonzero_gnrp: u64,
    pub nonzero_grp: u64,
    pub counterexamples: u64,
    /// Randomized verdicts confirmed symbolically.
    pub rechecked: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub scope: Scope,
    pub counts: Counts,
    pub counterexamples: Vec<FlaggedFamily>,
    pub converse_anomalies: Vec<FlaggedFamily>,
    /// Exhaustive run stopped at the budget.
    pub truncated: bool,
    pub runtime_secs: f64,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.counts.counterexamples == 0
    }
}

fn scope_families(scope: &Scope) -> Result<(Vec<RootFamily>, bool)> {
    let m = scope.m;
    let profiles = match &scope.profile {
        Some(p) => vec![p.clone()],
        None => all_profiles(m, scope.canonical),
    };
    for p in &profiles {
        check_profile(m, scope.n, p)?;
    }
    match scope.mode {
        Mode::Exhaustive => {
            let mut out = Vec::new();
            for p in &profiles {
                out.extend(enumerate_families(m, scope.n, p, scope.canonical)?);
            }
            let truncated = scope.budget.is_some_and(|b| out.len() as u64 > b);
            if let Some(b) = scope.budget {
                out.truncate(b as usize);
            }
            Ok((out, truncated))
        }
        Mode::Random => {
            let out = (0..scope.samples)
                .into_par_iter()
                .map(|i| {
                    let mut rng = item_rng(scope.seed, i);
                    let p = &profiles[rng.random_range(0..profiles.len())];
                    sample_family(scope.n, p, &mut rng)
                })
                .collect();
            Ok((out, false))
        }
    }
}

/// Classifies every family in scope. Deterministic in `(scope, seed)`
/// apart from `runtime_secs`.
pub fn run_suite(scope: &Scope) -> Result<VerifyReport> {
    let start = Instant::now();
    let (families, truncated) = scope_families(scope)?;
    let checks: Vec<(RootFamily, ConjectureCheck)> = families
        .into_par_iter()
        .enumerate()
        .map(|(i, f)| {
            let seed = scope.seed ^ (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
            check_conjecture(&f, !scope.fast, seed).map(|c| (f, c))
        })
        .collect::<Result<_>>()?;

    let mut counts = Counts::default();
    let mut counterexamples = BTreeSet::new();
    let mut anomalies = BTreeSet::new();
    for (family, check) in checks {
        counts.tested += 1;
        counts.w_zero += check.zero as u64;
        counts.grp += check.grp as u64;
        counts.rechecked += check.rechecked as u64;
        match check.classification {
            Classification::ConsistentZeroGrp => counts.zero_grp += 1,
            Classification::ConsistentNonzeroGnrp => counts.nonzero_gnrp += 1,
            Classification::ConsistentNonzeroGrp => {
                counts.nonzero_grp += 1;
                anomalies.insert(family);
            }
            Classification::Counterexample => {
                counts.counterexamples += 1;
                counterexamples.insert(family);
            }
        }
    }
    let flag = |set: BTreeSet<RootFamily>, classification| {
        set.iter()
            .map(|f| FlaggedFamily {
                family: family_to_json(f),
                classification,
            })
            .collect()
    };
    Ok(VerifyReport {
        scope: scope.clone(),
        counts,
        counterexamples: flag(counterexamples, Classification::Counterexample),
        converse_anomalies: flag(anomalies, Classification::ConsistentNonzeroGrp),
        truncated,
        runtime_secs: start.elapsed().as_secs_f64(),
    })
}

// ---------------------------------------------------------------------------
// MDS condition vs NRP

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fact1Report {
    pub m: usize,
    pub n: usize,
    pub exhaustive: bool,
    pub checked: u64,
    /// Matrices satisfying the MDS condition.
    pub mds_true: u64,
    pub violations: Vec<MatrixJson>,
}

/// Checks that the MDS condition holds exactly when the root family has
/// no rectangular property, over matrices whose rows all have `n - m + 1`
/// ones. Exhaustive when there are at most `exhaustive_limit` such
/// matrices, otherwise `exhaustive_limit` seeded samples.
pub fn check_fact1(m: usize, n: usize, exhaustive_limit: u64, seed: u64) -> Result<Fact1Report> {
    if m < 2 || m > n || n > crate::structures::MAX_DIM {
        return Err(Error::Precondition(format!("need 2 ≤ m ≤ n ≤ 64, got m = {m}, n = {n}")));
    }
    let weight = n - m + 1;
    let rows: Vec<u64> = (0..n)
        .combinations(weight)
        .map(|c| c.into_iter().fold(0u64, |acc, b| acc | 1 << b))
        .collect();
    let total = (rows.len() as f64).powi(m as i32);
    let exhaustive = total <= exhaustive_limit as f64;
    let matrices: Vec<SupportMatrix> = if exhaustive {
        (0..m)
            .map(|_| rows.iter().copied())
            .multi_cartesian_product()
            .map(|r| SupportMatrix::from_masks(n, r).expect("shape checked"))
            .collect()
    } else {
        (0..exhaustive_limit)
            .into_par_iter()
            .map(|i| {
                let mut rng = item_rng(seed, i);
                let r = (0..m).map(|_| rows[rng.random_range(0..rows.len())]).collect();
                SupportMatrix::from_masks(n, r).expect("shape checked")
            })
            .collect()
    };
    let results: Vec<(bool, bool)> = matrices
        .par_iter()
        .map(|mat| {
            let mds = mds_condition(mat).holds;
            let rp = has_rp(&to_root_family(mat)?)?.is_some();
            Ok((mds, mds == !rp))
        })
        .collect::<Result<_>>()?;
    let violations = matrices
        .iter()
        .zip(&results)
        .filter(|(_, (_, ok))| !ok)
        .map(|(mat, _)| matrix_to_json(mat))
        .collect();
    Ok(Fact1Report {
        m,
        n,
        exhaustive,
        checked: matrices.len() as u64,
        mds_true: results.iter().filter(|(mds, _)| *mds).count() as u64,
        violations,
    })
}

// ---------------------------------------------------------------------------
// Reduction lemmas

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaViolation {
    /// 1..=6; 0 for a reduction that got stuck or ended badly.
    pub lemma: u8,
    pub family: FamilyJson,
    pub reduction_set: Vec<u32>,
    pub survivor: Option<usize>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct LemmaReport {
    pub m: usize,
    pub n: usize,
    pub profile: Option<Vec<usize>>,
    pub exhaustive: bool,
    pub seed: u64,
    pub families: u64,
    /// Candidates dropped because they have GRP.
    pub excluded_grp: u64,
    pub traces: u64,
    /// Traces on which the derivative identity was checked.
    pub lemma1_checked: u64,
    /// Traces on which the breaking property was checked (its degree regime).
    pub lemma6_checked: u64,
    pub violations: Vec<LemmaViolation>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaScope {
    pub m: usize,
    pub n: usize,
    pub profile: Option<Vec<usize>>,
    /// Enumerate canonical families instead of sampling.
    pub exhaustive: bool,
    /// GNRP families to test when sampling.
    pub samples: u64,
    pub seed: u64,
    pub lemma1: bool,
    /// Randomized comparisons for the derivative identity.
    pub lemma1_fast: bool,
}

/// Degree regime in which every strongly reducible subset of order `m`
/// is broken by the reduction.
pub fn breaking_regime(family: &RootFamily) -> bool {
    let m = family.m();
    m <= 4 || (m == 5 && family.degrees().iter().all(|&d| d == m - 1))
}

fn lemma_violation(family: &RootFamily, trace: Option<&ReductionTrace>, lemma: u8, detail: String) -> LemmaViolation {
    LemmaViolation {
        lemma,
        family: family_to_json(family),
        reduction_set: trace.map(ReductionTrace::reduction_set).unwrap_or_default(),
        survivor: trace.map(|t| t.survivor + 1),
        detail,
    }
}

/// Checks the reduction lemmas on one GNRP family over every distinct
/// reduction outcome.
pub fn check_family_lemmas(family: &RootFamily, lemma1: Option<(bool, u64)>) -> Result<(Vec<LemmaViolation>, u64, u64, u64)> {
    let m = family.m();
    let mut out = Vec::new();
    let all = all_polys(family);
    for s in all_rs_subsets(family, all) {
        if s.r() + s.s() > m {
            out.push(lemma_violation(family, None, 2, format!("{s} has r+s > m")));
        }
    }
    let traces = match reduce_all(family) {
        Ok(t) => t,
        Err(e) => {
            out.push(lemma_violation(family, None, 0, e.to_string()));
            return Ok((out, 0, 0, 0));
        }
    };
    let regime = breaking_regime(family);
    let top = family.top_mask();
    let (mut l1, mut l6) = (0, 0);
    for trace in &traces {
        let star = all & !(1 << trace.survivor);
        let removed = trace.removed_mask();
        let full_order: Vec<_> = all_rs_subsets(family, star)
            .into_iter()
            .filter(|s| s.r() + s.s() == m)
            .collect();
        for s in &full_order {
            if s.members & top == 0 {
                out.push(lemma_violation(family, Some(trace), 3, format!("{s} lies in no degree-(m-1) polynomial")));
            }
            if !weakly_reducible(family, s) {
                out.push(lemma_violation(family, Some(trace), 4, format!("{s} is not weakly reducible")));
            }
        }
        let strong: Vec<_> = strongly_reducible_in(family, star)
            .into_iter()
            .filter(|s| s.r() + s.s() == m)
            .collect();
        for (a, b) in strong.iter().tuple_combinations() {
            if a.members & b.members != 0 {
                out.push(lemma_violation(family, Some(trace), 5, format!("{a} and {b} share a polynomial")));
            }
        }
        if regime {
            l6 += 1;
            for s in &strong {
                if s.elements & removed == 0 {
                    out.push(lemma_violation(family, Some(trace), 6, format!("{s} is not broken")));
                }
            }
        }
        if let Some((exact, seed)) = lemma1 {
            l1 += 1;
            let outcome = lemma1_check(trace, exact, seed)?;
            if !outcome.holds() {
                out.push(lemma_violation(family, Some(trace), 1, format!("{outcome:?}")));
            }
        }
    }
    Ok((out, traces.len() as u64, l1, l6))
}

/// Runs the reduction under every tie-break outcome on GNRP families and
/// checks the lemmas about it.
pub fn check_reduction_lemmas(scope: &LemmaScope) -> Result<LemmaReport> {
    let m = scope.m;
    let profiles = match &scope.profile {
        Some(p) => vec![p.clone()],
        None => all_profiles(m, scope.exhaustive),
    };
    for p in &profiles {
        check_profile(m, scope.n, p)?;
    }
    let candidates: Vec<RootFamily> = if scope.exhaustive {
        let mut v = Vec::new();
        for p in &profiles {
            v.extend(enumerate_families(m, scope.n, p, true)?);
        }
        v
    } else {
        (0..scope.samples)
            .into_par_iter()
            .map(|i| {
                let mut rng = item_rng(scope.seed, i);
                for _ in 0..100_000 {
                    let p = &profiles[rng.random_range(0..profiles.len())];
                    let f = sample_family(scope.n, p, &mut rng);
                    if has_grp(&f).is_none() {
                        return Some(f);
                    }
                }
                None
            })
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    };
    let total = candidates.len() as u64;
    let gnrp: Vec<RootFamily> = candidates.into_iter().filter(|f| has_grp(f).is_none()).collect();
    let lemma1 = scope.lemma1.then_some((!scope.lemma1_fast, scope.seed));
    let results: Vec<_> = gnrp
        .par_iter()
        .map(|f| check_family_lemmas(f, lemma1))
        .collect::<Result<_>>()?;
    let mut report = LemmaReport {
        m,
        n: scope.n,
        profile: scope.profile.clone(),
        exhaustive: scope.exhaustive,
        seed: scope.seed,
        families: gnrp.len() as u64,
        excluded_grp: if scope.exhaustive { total - gnrp.len() as u64 } else { 0 },
        ..Default::default()
    };
    for (violations, traces, l1, l6) in results {
        report.traces += traces;
        report.lemma1_checked += l1;
        report.lemma6_checked += l6;
        report.violations.extend(violations);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(n: usize, sets: &[&[u32]]) -> RootFamily {
        let sets: Vec<Vec<u32>> = sets.iter().map(|s| s.to_vec()).collect();
        RootFamily::new(n, &sets).unwrap()
    }

    #[test]
    fn canonical_examples() {
        let reps = enumerate_families(2, 2, &[1, 1], true).unwrap();
        assert_eq!(reps, vec![fam(2, &[&[1], &[1]]), fam(2, &[&[1], &[2]])]);
        let reps = enumerate_families(2, 2, &[0, 1], true).unwrap();
        assert_eq!(reps, vec![fam(2, &[&[], &[1]])]);
        assert!(matches!(enumerate_families(2, 2, &[2, 1], true), Err(Error::Precondition(_))));
        assert_eq!(enumerate_families(2, 2, &[1, 1], false).unwrap().len(), 4);
    }

    #[test]
    fn canonical_form_is_orbit_invariant() {
        let a = canonical_form(&fam(4, &[&[3, 4], &[1, 4], &[2]]));
        let b = canonical_form(&fam(4, &[&[1, 2], &[2, 3], &[4]]));
        let c = canonical_form(&fam(4, &[&[2, 3], &[1, 2], &[4]]));
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn conjecture_examples() {
        let same = check_conjecture(&fam(1, &[&[1], &[1]]), true, 0).unwrap();
        assert_eq!(same.classification, Classification::ConsistentZeroGrp);
        let distinct = check_conjecture(&fam(2, &[&[1], &[2]]), true, 0).unwrap();
        assert_eq!(distinct.classification, Classification::ConsistentNonzeroGnrp);
        let low = check_conjecture(&fam(1, &[&[], &[1]]), true, 0).unwrap();
        assert_eq!(low.classification, Classification::ConsistentNonzeroGnrp);
        let fast = check_conjecture(&fam(2, &[&[1], &[2]]), false, 7).unwrap();
        assert_eq!(fast.classification, Classification::ConsistentNonzeroGnrp);
    }

    #[test]
    fn suite_m2() {
        let report = run_suite(&Scope::exhaustive(2, 2, None)).unwrap();
        assert!(report.passed());
        assert_eq!(report.counts.tested, 3);
        assert!(report.converse_anomalies.is_empty());
    }

    #[test]
    fn fact1_small() {
        let r = check_fact1(2, 3, 1000, 0).unwrap();
        assert!(r.exhaustive);
        assert_eq!(r.checked, 9);
        assert!(r.violations.is_empty());
        assert_eq!(r.mds_true, 6);
    }

    #[test]
    fn lemmas_m3_exhaustive() {
        let scope = LemmaScope {
            m: 3,
            n: 6,
            profile: Some(vec![2, 2, 2]),
            exhaustive: true,
            samples: 0,
            seed: 1,
            lemma1: true,
            lemma1_fast: false,
        };
        let r = check_reduction_lemmas(&scope).unwrap();
        assert!(r.passed(), "{:?}", r.violations);
        assert!(r.families > 0 && r.excluded_grp > 0);
    }

    #[test]
    fn support_matrix_enumeration() {
        let raw = enumerate_support_matrices(2, 2, false).unwrap();
        assert_eq!(raw.len(), 9);
        let canon = enumerate_support_matrices(2, 2, true).unwrap();
        // Orbits of 2x2 matrices without zero rows under row/column swaps.
        assert_eq!(canon.len(), 4);
    }
}
