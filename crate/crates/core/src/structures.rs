//! Support matrices, root families and the combinatorial predicates on
//! them: the MDS condition, RP/GRP, and `(r,s)`-subsets.
//!
//! Row and polynomial indices are 0-based throughout the API; variables
//! are 1-based (`a1..an`). Sets are stored as `u64` bitmasks, so `n ≤ 64`
//! and `m ≤ 64`.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::polyring::{build_p, wdet, MultiPoly, UniPolyOverRing};

pub const MAX_DIM: usize = 64;

/// Indices of the set bits, ascending.
pub(crate) fn bits(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        (mask != 0).then(|| {
            let i = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            i
        })
    })
}

pub(crate) fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Binary `m x n` matrix; bit `j` of `rows[i]` is entry `(i, j)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SupportMatrix {
    n: usize,
    rows: Vec<u64>,
}

impl SupportMatrix {
    /// Checks `1 < m ≤ n ≤ 64`. Empty rows are allowed here and reported
    /// by [`SupportMatrix::validate`].
    pub fn from_masks(n: usize, rows: Vec<u64>) -> Result<Self> {
        let m = rows.len();
        if m < 2 || m > n || n > MAX_DIM {
            return Err(Error::InvalidMatrix(format!(
                "need 1 < m <= n <= {MAX_DIM}, got m={m}, n={n}"
            )));
        }
        if rows.iter().any(|&r| r & !full_mask(n) != 0) {
            return Err(Error::InvalidMatrix("entry outside the n columns".into()));
        }
        Ok(SupportMatrix { n, rows })
    }

    pub fn from_rows(rows: &[Vec<bool>]) -> Result<Self> {
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidMatrix("ragged rows".into()));
        }
        let masks = rows
            .iter()
            .map(|r| r.iter().enumerate().filter(|(_, &b)| b).fold(0u64, |acc, (j, _)| acc | 1 << j))
            .collect();
        Self::from_masks(n, masks)
    }

    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i] >> j & 1 == 1
    }

    pub fn row_mask(&self, i: usize) -> u64 {
        self.rows[i]
    }

    pub fn row_masks(&self) -> &[u64] {
        &self.rows
    }

    /// Column indices (0-based) of the ones in row `i`.
    pub fn support(&self, i: usize) -> Vec<usize> {
        bits(self.rows[i]).collect()
    }

    pub fn to_bool_rows(&self) -> Vec<Vec<bool>> {
        (0..self.m()).map(|i| (0..self.n).map(|j| self.get(i, j)).collect()).collect()
    }

    /// Every row must have at least one nonzero entry.
    pub fn validate(&self) -> Result<()> {
        match self.rows.iter().position(|&r| r == 0) {
            Some(i) => Err(Error::InvalidMatrix(format!("row {} is all zero", i + 1))),
            None => Ok(()),
        }
    }

    /// Same matrix with entry `(i, j)` set to 1.
    pub fn with_one(&self, i: usize, j: usize) -> SupportMatrix {
        let mut out = self.clone();
        out.rows[i] |= 1 << j;
        out
    }
}

impl fmt::Display for SupportMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.m() {
            let line: String = (0..self.n).map(|j| if self.get(i, j) { '1' } else { '0' }).collect();
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

/// Root sets `N_1..N_m` over the variables `a1..an`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RootFamily {
    n: usize,
    sets: Vec<u64>,
}

impl RootFamily {
    /// Builds a family from 1-based variable indices. Requires `m ≥ 1`,
    /// indices in `1..=n`, and `|N_i| ≤ m - 1`.
    pub fn new(n: usize, sets: &[Vec<u32>]) -> Result<Self> {
        if n > MAX_DIM {
            return Err(Error::InvalidFamily(format!("n = {n} exceeds {MAX_DIM}")));
        }
        let mut masks = Vec::with_capacity(sets.len());
        for set in sets {
            let mut mask = 0u64;
            for &v in set {
                if v == 0 || v as usize > n {
                    return Err(Error::InvalidFamily(format!("root a{v} outside a1..a{n}")));
                }
                if mask >> (v - 1) & 1 == 1 {
                    return Err(Error::InvalidFamily(format!("root a{v} repeated")));
                }
                mask |= 1 << (v - 1);
            }
            masks.push(mask);
        }
        Self::from_masks(n, masks)
    }

    /// Bit `v - 1` of `sets[i]` marks `a_v ∈ N_i`.
    pub fn from_masks(n: usize, sets: Vec<u64>) -> Result<Self> {
        let m = sets.len();
        if m == 0 {
            return Err(Error::InvalidFamily("empty family".into()));
        }
        if n > MAX_DIM || sets.iter().any(|&s| s & !full_mask(n) != 0) {
            return Err(Error::InvalidFamily("root outside the variable range".into()));
        }
        if let Some((row, s)) = sets.iter().enumerate().find(|(_, s)| s.count_ones() as usize > m - 1) {
            return Err(Error::DegreeTooHigh {
                row: Some(row),
                degree: s.count_ones() as usize,
                max: m - 1,
            });
        }
        Ok(RootFamily { n, sets })
    }

    /// Checks `m ≥ 2` and `n ≤ m(m-1)`; the bound on `n` is skipped when
    /// `allow_loose_n` is set.
    pub fn validate(&self, allow_loose_n: bool) -> Result<()> {
        let (m, n) = (self.m(), self.n);
        if m < 2 {
            return Err(Error::InvalidFamily(format!("need at least two polynomials, got {m}")));
        }
        if !allow_loose_n && n > m * (m - 1) {
            return Err(Error::InvalidFamily(format!("n = {n} exceeds m(m-1) = {}", m * (m - 1))));
        }
        Ok(())
    }

    /// At least one polynomial of degree `m - 1`.
    pub fn require_full_degree(&self) -> Result<()> {
        if self.top_mask() == 0 {
            return Err(Error::Precondition(format!(
                "no polynomial has degree m-1 = {}",
                self.m() - 1
            )));
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.sets.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mask(&self, i: usize) -> u64 {
        self.sets[i]
    }

    pub fn masks(&self) -> &[u64] {
        &self.sets
    }

    /// Root indices of `N_i`, ascending.
    pub fn roots(&self, i: usize) -> Vec<u32> {
        bits(self.sets[i]).map(|b| b as u32 + 1).collect()
    }

    pub fn sets(&self) -> Vec<Vec<u32>> {
        (0..self.m()).map(|i| self.roots(i)).collect()
    }

    pub fn degree(&self, i: usize) -> usize {
        self.sets[i].count_ones() as usize
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.m()).map(|i| self.degree(i)).collect()
    }

    /// Polynomials of degree `m - 1`, as a bitmask over indices.
    pub fn top_mask(&self) -> u64 {
        let top = self.m() - 1;
        self.sets
            .iter()
            .enumerate()
            .filter(|(_, s)| s.count_ones() as usize == top)
            .fold(0, |acc, (i, _)| acc | 1 << i)
    }

    /// Intersection of the root sets of the polynomials in `polys`.
    pub fn common_roots(&self, polys: u64) -> u64 {
        bits(polys).fold(u64::MAX, |acc, i| acc & self.sets[i]) & full_mask(self.n)
    }

    /// Polynomials (bitmask) whose root sets contain every element of `s`.
    pub fn containing(&self, s: u64) -> u64 {
        self.sets
            .iter()
            .enumerate()
            .filter(|(_, &set)| set & s == s)
            .fold(0, |acc, (i, _)| acc | 1 << i)
    }

    /// The family with the roots in `removed` deleted from every set.
    pub fn without_roots(&self, removed: u64) -> RootFamily {
        RootFamily {
            n: self.n,
            sets: self.sets.iter().map(|s| s & !removed).collect(),
        }
    }

    /// Reorders the polynomials: position `k` of the result holds
    /// polynomial `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> RootFamily {
        RootFamily {
            n: self.n,
            sets: order.iter().map(|&i| self.sets[i]).collect(),
        }
    }

    /// Keeps only the listed polynomials, re-expanded with `m' = order.len()`.
    pub fn subfamily(&self, order: &[usize]) -> Result<RootFamily> {
        RootFamily::from_masks(self.n, order.iter().map(|&i| self.sets[i]).collect())
    }

    /// Same sets over a larger variable range.
    pub fn with_n(&self, n: usize) -> Result<RootFamily> {
        RootFamily::from_masks(n, self.sets.clone())
    }

    pub fn polynomials(&self) -> Result<Vec<UniPolyOverRing>> {
        (0..self.m()).map(|i| build_p(&self.roots(i), self.m(), self.n)).collect()
    }

    /// `W(P_1..P_m)` computed symbolically.
    pub fn wdet(&self) -> Result<MultiPoly> {
        wdet(&self.polynomials()?)
    }
}

impl fmt::Display for RootFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .sets()
            .iter()
            .map(|s| {
                let items: Vec<String> = s.iter().map(u32::to_string).collect();
                format!("{{{}}}", items.join(","))
            })
            .collect();
        write!(f, "n={} [{}]", self.n, parts.join(" "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MdsCheck {
    pub holds: bool,
    /// A violating row set (0-based) when the condition fails.
    pub witness: Option<Vec<usize>>,
}

/// `|∪_{i∈I} supp(M_i)| ≥ n - m + |I|` for every nonempty `I`, by direct
/// enumeration of the `2^m - 1` row sets. The first violating `I` in
/// increasing bitmask order is returned as witness.
pub fn mds_condition(matrix: &SupportMatrix) -> MdsCheck {
    let (m, n) = (matrix.m(), matrix.n());
    for subset in 1u64..(1 << m) {
        let union = bits(subset).fold(0u64, |acc, i| acc | matrix.row_mask(i));
        let size = subset.count_ones() as usize;
        if (union.count_ones() as usize) + m < n + size {
            return MdsCheck {
                holds: false,
                witness: Some(bits(subset).collect()),
            };
        }
    }
    MdsCheck {
        holds: true,
        witness: None,
    }
}

/// `N_i` = complement of the support of row `i`. The resulting family may
/// exceed `n ≤ m(m-1)`; callers decide whether to validate that.
pub fn to_root_family(matrix: &SupportMatrix) -> Result<RootFamily> {
    let full = full_mask(matrix.n());
    let sets: Vec<u64> = matrix.row_masks().iter().map(|r| !r & full).collect();
    RootFamily::from_masks(matrix.n(), sets)
}

/// Inverse of [`to_root_family`].
pub fn to_support_matrix(family: &RootFamily) -> Result<SupportMatrix> {
    let full = full_mask(family.n());
    SupportMatrix::from_masks(family.n(), family.masks().iter().map(|s| !s & full).collect())
}

/// `k` polynomials with at least `m - k - l + 1` common roots, all of
/// degree at most `m - l - 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyWitness {
    pub polys: Vec<usize>,
    pub common_roots: Vec<u32>,
    pub k: usize,
    pub l: usize,
}

impl PropertyWitness {
    fn new(family: &RootFamily, subset: u64, common: u64, l: usize) -> Self {
        debug_assert!(bits(subset).all(|i| family.degree(i) + l < family.m()));
        PropertyWitness {
            polys: bits(subset).collect(),
            common_roots: bits(common).map(|b| b as u32 + 1).collect(),
            k: subset.count_ones() as usize,
            l,
        }
    }
}

/// Rectangular property: some `k ≥ 2` polynomials share at least
/// `m - k + 1` roots. Requires every degree to be `m - 1`.
pub fn has_rp(family: &RootFamily) -> Result<Option<PropertyWitness>> {
    let m = family.m();
    if let Some(row) = (0..m).find(|&i| family.degree(i) != m - 1) {
        return Err(Error::DegreesNotUniform {
            row: row + 1,
            expected: m - 1,
            found: family.degree(row),
        });
    }
    for subset in 1u64..(1 << m) {
        let k = subset.count_ones() as usize;
        if k < 2 {
            continue;
        }
        let common = family.common_roots(subset);
        if common.count_ones() as usize + k > m {
            return Ok(Some(PropertyWitness::new(family, subset, common, 0)));
        }
    }
    Ok(None)
}

/// Generalized rectangular property.
///
/// For a fixed set `Q` of `k ≥ 2` polynomials the requirement
/// `|∩ N_i| ≥ m - k - l + 1` only gets weaker as `l` grows, while the
/// degree bound `d_i ≤ m - l - 1` caps `l` at `m - 1 - max_{i∈Q} d_i`. So
/// each `Q` is tested once, at the largest admissible `l`.
///
/// `l` ranges over `0..=m-k+1`. The top value makes any `k` polynomials
/// of degree at most `k - 2` a witness (they span at most `k - 1`
/// dimensions); that is the case used for `d_i < m - 1` everywhere
/// (`k = m`, `l = 1`) and for two constant polynomials.
pub fn has_grp(family: &RootFamily) -> Option<PropertyWitness> {
    let m = family.m();
    for subset in 1u64..(1 << m) {
        let k = subset.count_ones() as usize;
        if k < 2 {
            continue;
        }
        let max_deg = bits(subset).map(|i| family.degree(i)).max().unwrap_or(0);
        let l = (m - k + 1).min(m - 1 - max_deg);
        let common = family.common_roots(subset);
        if common.count_ones() as usize + k + l > m {
            return Some(PropertyWitness::new(family, subset, common, l));
        }
    }
    None
}

/// A root subset `S` together with every polynomial (within the scope it
/// was computed for) whose root set contains it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RsSubset {
    pub elements: u64,
    pub members: u64,
}

impl RsSubset {
    pub fn r(&self) -> usize {
        self.members.count_ones() as usize
    }

    pub fn s(&self) -> usize {
        self.elements.count_ones() as usize
    }

    /// Sort key for "higher order": `(r + s, r)`.
    pub fn order(&self) -> (usize, usize) {
        (self.r() + self.s(), self.r())
    }

    pub fn elements(&self) -> Vec<u32> {
        bits(self.elements).map(|b| b as u32 + 1).collect()
    }

    pub fn members(&self) -> Vec<usize> {
        bits(self.members).collect()
    }

    /// Element list as a lexicographic key.
    pub(crate) fn lex_key(&self) -> Vec<u32> {
        self.elements()
    }
}

impl fmt::Display for RsSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e: Vec<String> = self.elements().iter().map(|v| format!("a{v}")).collect();
        write!(f, "{{{}}} ({},{})", e.join(","), self.r(), self.s())
    }
}

/// `a` compared to `b` under the subset order: larger `r + s` wins, then
/// larger `r`.
pub fn higher_order(a: &RsSubset, b: &RsSubset) -> Ordering {
    a.order().cmp(&b.order())
}

/// Every nonempty `S` contained in the root set of some polynomial in
/// `scope`, reported with its exact membership within `scope`. Sorted by
/// element list.
pub fn all_rs_subsets(family: &RootFamily, scope: u64) -> Vec<RsSubset> {
    let mut seen = std::collections::BTreeSet::new();
    for i in bits(scope) {
        let set = family.mask(i);
        // Enumerate submasks of `set`.
        let mut sub = set;
        while sub != 0 {
            seen.insert(sub);
            sub = (sub - 1) & set;
        }
    }
    let mut out: Vec<RsSubset> = seen
        .into_iter()
        .map(|s| RsSubset {
            elements: s,
            members: family.containing(s) & scope,
        })
        .collect();
    out.sort_by_cached_key(RsSubset::lex_key);
    out
}

/// Bitmask of all `m` polynomials.
pub fn all_polys(family: &RootFamily) -> u64 {
    full_mask(family.m())
}
