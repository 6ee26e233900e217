//! Degree reduction of a root family.
//!
//! Each round picks a strongly reducible subset `S` (weakly reducible and
//! of maximal `(r + s, r)` order), removes from every root set the
//! removable element of `S` that lies in the most degree-`(m-1)`
//! polynomials, and repeats until a single polynomial of degree `m - 1`
//! is left. The removed roots form the reduction set `R`.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::polyring::MultiPoly;
use crate::structures::{all_polys, all_rs_subsets, bits, RootFamily, RsSubset};

/// How to resolve the free choices of subset and removed root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Lowest element list first, then lowest root index.
    #[default]
    Lex,
    /// Highest element list first, then highest root index.
    Reverse,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Round {
    pub index: usize,
    /// The subset broken this round, with membership over all polynomials.
    pub subset: RsSubset,
    pub beta: u32,
    /// Number of root sets containing `beta` when it was removed.
    pub n_beta: usize,
    pub degrees_after: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionTrace {
    pub initial: RootFamily,
    pub rounds: Vec<Round>,
    pub final_family: RootFamily,
    /// Index of the polynomial that keeps degree `m - 1`.
    pub survivor: usize,
    /// Reindexing that puts the survivor last: position `k` holds the
    /// original polynomial `permutation[k]`. The others are ordered by
    /// final degree, then index.
    pub permutation: Vec<usize>,
}

impl ReductionTrace {
    /// `R` as a bitmask over variables.
    pub fn removed_mask(&self) -> u64 {
        self.rounds.iter().fold(0, |acc, r| acc | 1 << (r.beta - 1))
    }

    /// `R` in removal order.
    pub fn reduction_set(&self) -> Vec<u32> {
        self.rounds.iter().map(|r| r.beta).collect()
    }

    /// `(root, n_r)` pairs in removal order.
    pub fn multiplicities(&self) -> Vec<(u32, usize)> {
        self.rounds.iter().map(|r| (r.beta, r.n_beta)).collect()
    }

    pub fn final_degrees(&self) -> Vec<usize> {
        self.final_family.degrees()
    }

    /// Exactly one polynomial of degree `m - 1` at the end, and it is the
    /// recorded survivor.
    pub fn check_acceptable(&self) -> Result<()> {
        let top = self.final_family.top_mask();
        if top.count_ones() != 1 || top != 1 << self.survivor {
            return Err(Error::NotAcceptable {
                degrees: self.final_degrees(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for ReductionTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:>5}  {:<16} {:>2} {:>2}  {:>5}  degrees", "round", "S", "r", "s", "beta")?;
        for r in &self.rounds {
            let s: Vec<String> = r.subset.elements().iter().map(|v| format!("a{v}")).collect();
            writeln!(
                f,
                "{:>5}  {:<16} {:>2} {:>2}  {:>5}  {:?}",
                r.index,
                format!("{{{}}}", s.join(",")),
                r.subset.r(),
                r.subset.s(),
                format!("a{}", r.beta),
                r.degrees_after
            )?;
        }
        let rs: Vec<String> = self.reduction_set().iter().map(|v| format!("a{v}")).collect();
        writeln!(f, "R = {{{}}}", rs.join(","))?;
        write!(
            f,
            "final degrees {:?}, survivor P{}",
            self.final_degrees(),
            self.survivor + 1
        )
    }
}

/// Elements of `s` (bitmask over variables) that are roots of some but
/// not all degree-`(m-1)` polynomials.
pub fn removable_elements(family: &RootFamily, s: u64) -> u64 {
    let top = family.top_mask();
    let tops = top.count_ones();
    bits(s)
        .filter(|&b| {
            let count = (family.containing(1 << b) & top).count_ones();
            count >= 1 && count < tops
        })
        .fold(0, |acc, b| acc | 1 << b)
}

/// `S` lies in the root set of a degree-`(m-1)` polynomial and has a
/// removable element.
pub fn weakly_reducible(family: &RootFamily, subset: &RsSubset) -> bool {
    family.containing(subset.elements) & family.top_mask() != 0
        && removable_elements(family, subset.elements) != 0
}

/// Weakly reducible subsets among the `(r,s)`-subsets of `scope`, keeping
/// only those of maximal order.
pub fn strongly_reducible_in(family: &RootFamily, scope: u64) -> Vec<RsSubset> {
    let weak: Vec<RsSubset> = all_rs_subsets(family, scope)
        .into_iter()
        .filter(|s| weakly_reducible(family, s))
        .collect();
    let Some(best) = weak.iter().map(RsSubset::order).max() else {
        return Vec::new();
    };
    weak.into_iter().filter(|s| s.order() == best).collect()
}

pub fn strongly_reducible_subsets(family: &RootFamily) -> Vec<RsSubset> {
    strongly_reducible_in(family, all_polys(family))
}

/// Every admissible `(S, beta)` for the next round, in lexicographic
/// order of `S` then `beta`.
fn choices(family: &RootFamily) -> Vec<(RsSubset, u32)> {
    let top = family.top_mask();
    let mut out = Vec::new();
    for s in strongly_reducible_subsets(family) {
        let removable = removable_elements(family, s.elements);
        let reach = |b: usize| (family.containing(1 << b) & top).count_ones();
        let best = bits(removable).map(reach).max().unwrap_or(0);
        out.extend(bits(removable).filter(|&b| reach(b) == best).map(|b| (s, b as u32 + 1)));
    }
    out
}

fn stuck(family: &RootFamily) -> Error {
    let mut tops = bits(family.top_mask());
    let first = tops.next().unwrap_or(0);
    let second = tops.next().unwrap_or(first);
    debug_assert_eq!(family.mask(first), family.mask(second));
    Error::StuckGrp { first, second }
}

fn apply(current: &RootFamily, index: usize, subset: RsSubset, beta: u32) -> (RootFamily, Round) {
    let bit = 1u64 << (beta - 1);
    let n_beta = current.containing(bit).count_ones() as usize;
    let next = current.without_roots(bit);
    let round = Round {
        index,
        subset,
        beta,
        n_beta,
        degrees_after: next.degrees(),
    };
    (next, round)
}

fn finish(initial: &RootFamily, rounds: Vec<Round>, final_family: RootFamily) -> Result<ReductionTrace> {
    let top = final_family.top_mask();
    if top.count_ones() != 1 {
        return Err(Error::NotAcceptable {
            degrees: final_family.degrees(),
        });
    }
    let survivor = top.trailing_zeros() as usize;
    let mut permutation: Vec<usize> = (0..initial.m()).filter(|&i| i != survivor).collect();
    permutation.sort_by_key(|&i| (final_family.degree(i), i));
    permutation.push(survivor);
    let trace = ReductionTrace {
        initial: initial.clone(),
        rounds,
        final_family,
        survivor,
        permutation,
    };
    trace.check_acceptable()?;
    Ok(trace)
}

/// Runs the reduction with a single-path tie-break policy.
pub fn reduce(family: &RootFamily, policy: TieBreak) -> Result<ReductionTrace> {
    family.require_full_degree()?;
    let budget: usize = family.degrees().iter().sum();
    let mut current = family.clone();
    let mut rounds = Vec::new();
    while current.top_mask().count_ones() > 1 {
        let options = choices(&current);
        let pick = match policy {
            TieBreak::Lex => options.first(),
            TieBreak::Reverse => options.last(),
        };
        let Some(&(subset, beta)) = pick else {
            return Err(stuck(&current));
        };
        let (next, round) = apply(&current, rounds.len() + 1, subset, beta);
        assert!(next.top_mask() != 0, "a removable root never empties the top degree");
        assert!(rounds.len() < budget, "reduction exceeded sum of degrees");
        rounds.push(round);
        current = next;
    }
    finish(family, rounds, current)
}

/// Every distinct outcome of the reduction over all admissible choices.
///
/// The family after a sequence of removals depends only on the set of
/// removed roots, so the search is over reachable sets; one trace is
/// returned per terminal reduction set (the first path found in
/// lexicographic order). Fails with `StuckGrp` if any reachable state is
/// stuck.
pub fn reduce_all(family: &RootFamily) -> Result<Vec<ReductionTrace>> {
    family.require_full_degree()?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut path = Vec::new();
    explore(family, family.clone(), &mut path, &mut seen, &mut out)?;
    Ok(out)
}

fn explore(
    initial: &RootFamily,
    current: RootFamily,
    path: &mut Vec<Round>,
    seen: &mut HashSet<u64>,
    out: &mut Vec<ReductionTrace>,
) -> Result<()> {
    if current.top_mask().count_ones() <= 1 {
        out.push(finish(initial, path.clone(), current)?);
        return Ok(());
    }
    let options = choices(&current);
    if options.is_empty() {
        return Err(stuck(&current));
    }
    let removed_so_far = path.iter().fold(0u64, |acc, r| acc | 1 << (r.beta - 1));
    for (subset, beta) in options {
        let key = removed_so_far | 1 << (beta - 1);
        if !seen.insert(key) {
            continue;
        }
        let (next, round) = apply(&current, path.len() + 1, subset, beta);
        path.push(round);
        explore(initial, next, path, seen, out)?;
        path.pop();
    }
    Ok(())
}

/// Result of checking the derivative identity for one accepted trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lemma1Outcome {
    /// `∂^{n_R} W(P) = (∏ n_r!) (-1)^{Σ n_r} W(P~)` with ordinary
    /// derivatives.
    pub derivative_identity: bool,
    /// `D^{n_R} W(P) = (-1)^{Σ n_r} W(P~)` with divided derivatives.
    pub hasse_identity: bool,
    /// `W(P~_1..P~_m) = W(P~_1..P~_{m-1})` after moving the survivor last.
    pub minor_identity: bool,
    /// Whether the identity also holds with the factorial factor dropped.
    pub unscaled_identity: bool,
    pub sign: i128,
    pub factorial_scale: i128,
    /// True when the comparisons were exact rather than randomized.
    pub exact: bool,
}

impl Lemma1Outcome {
    pub fn holds(&self) -> bool {
        self.derivative_identity && self.hasse_identity && self.minor_identity
    }
}

/// Verifies the derivative identity relating `W(P_1..P_m)` to the reduced
/// family. With `exact = false` each comparison is a randomized zero test
/// of the difference (seeded).
pub fn lemma1_check(trace: &ReductionTrace, exact: bool, seed: u64) -> Result<Lemma1Outcome> {
    trace
        .check_acceptable()
        .map_err(|e| Error::Precondition(format!("trace is not accepted: {e}")))?;
    let perm = &trace.permutation;
    let m = trace.initial.m();
    let original = trace.initial.permuted(perm);
    let reduced = trace.final_family.permuted(perm);

    let w = original.wdet()?;
    let w_reduced = reduced.wdet()?;
    let w_minor = trace.final_family.subfamily(&perm[..m - 1])?.wdet()?;

    let mut ordinary = w.clone();
    let mut hasse = w;
    let mut total = 0usize;
    let mut scale: i128 = 1;
    for (root, times) in trace.multiplicities() {
        ordinary = ordinary.derivative(root, times as u32);
        hasse = hasse.hasse_derivative(root, times as u32);
        total += times;
        scale *= (1..=times as i128).product::<i128>();
    }
    let sign = if total % 2 == 0 { 1 } else { -1 };
    let signed = w_reduced.scale(sign);

    let same = |a: &MultiPoly, b: &MultiPoly, salt: u64| {
        if exact {
            a == b
        } else {
            a.sub(b).probably_zero(3, seed ^ salt)
        }
    };
    Ok(Lemma1Outcome {
        derivative_identity: same(&ordinary, &signed.scale(scale), 1),
        hasse_identity: same(&hasse, &signed, 2),
        minor_identity: same(&w_reduced, &w_minor, 3),
        unscaled_identity: same(&ordinary, &signed, 4),
        sign,
        factorial_scale: scale,
        exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(n: usize, sets: &[&[u32]]) -> RootFamily {
        let sets: Vec<Vec<u32>> = sets.iter().map(|s| s.to_vec()).collect();
        RootFamily::new(n, &sets).unwrap()
    }

    fn triangle() -> RootFamily {
        fam(3, &[&[1, 2], &[1, 3], &[2, 3]])
    }

    #[test]
    fn removable_examples() {
        let f = triangle();
        assert_eq!(removable_elements(&f, 0b001), 0b001);
        // a1 in every degree-2 polynomial.
        let every = fam(3, &[&[1, 2], &[1, 3], &[1, 3]]);
        assert_eq!(removable_elements(&every, 0b001), 0);
        // a3 appears in no degree-2 polynomial.
        let h = fam(3, &[&[1, 2], &[1, 2], &[3]]);
        assert_eq!(removable_elements(&h, 0b100), 0);
    }

    #[test]
    fn weak_reducibility_examples() {
        let f = triangle();
        let s = RsSubset {
            elements: 0b001,
            members: 0b011,
        };
        assert!(weakly_reducible(&f, &s));
        // {a3} only inside the degree-1 polynomial.
        let g = fam(3, &[&[1, 2], &[1, 2], &[3]]);
        let t = RsSubset {
            elements: 0b100,
            members: 0b100,
        };
        assert!(!weakly_reducible(&g, &t));
        // {a1} inside every degree-2 polynomial: nothing removable.
        let h = fam(3, &[&[1, 2], &[1, 3], &[1]]);
        let u = RsSubset {
            elements: 0b001,
            members: 0b111,
        };
        assert!(!weakly_reducible(&h, &u));
    }

    #[test]
    fn strongly_reducible_triangle() {
        let subs = strongly_reducible_subsets(&triangle());
        let elems: Vec<Vec<u32>> = subs.iter().map(RsSubset::elements).collect();
        assert_eq!(elems, vec![vec![1], vec![2], vec![3]]);
        assert!(subs.iter().all(|s| s.order() == (3, 2)));
    }

    #[test]
    fn strongly_reducible_prefers_larger_r() {
        // m = 4: {a1} is a (3,1)-subset, {a1,a2} a (2,2)-subset.
        let f = fam(9, &[&[1, 2, 3], &[1, 2, 4], &[1, 5, 6], &[7, 8, 9]]);
        let subs = strongly_reducible_subsets(&f);
        assert_eq!(subs.len(), 1);
        assert_eq!((subs[0].elements(), subs[0].r()), (vec![1], 3));
    }

    #[test]
    fn nothing_reducible_without_top_degree_membership() {
        let f = fam(4, &[&[1, 2], &[1, 2], &[3]]);
        assert!(strongly_reducible_subsets(&f).is_empty());
    }

    #[test]
    fn triangle_lex_trace() {
        let t = reduce(&triangle(), TieBreak::Lex).unwrap();
        assert_eq!(t.reduction_set(), vec![1]);
        assert_eq!(t.final_degrees(), vec![1, 1, 2]);
        assert_eq!(t.rounds[0].subset.elements(), vec![1]);
        assert_eq!(t.multiplicities(), vec![(1, 2)]);
        assert_eq!(t.survivor, 2);
        assert_eq!(t.permutation, vec![0, 1, 2]);
    }

    #[test]
    fn two_linear_polynomials() {
        let f = fam(2, &[&[1], &[2]]);
        let lex = reduce(&f, TieBreak::Lex).unwrap();
        assert_eq!((lex.reduction_set(), lex.final_degrees()), (vec![1], vec![0, 1]));
        let rev = reduce(&f, TieBreak::Reverse).unwrap();
        assert_eq!((rev.reduction_set(), rev.final_degrees()), (vec![2], vec![1, 0]));
        assert_eq!(reduce_all(&f).unwrap().len(), 2);
    }

    #[test]
    fn identical_top_polynomials_are_stuck() {
        let g = fam(3, &[&[1, 2], &[1, 2], &[3]]);
        assert_eq!(reduce(&g, TieBreak::Lex), Err(Error::StuckGrp { first: 0, second: 1 }));
        assert!(matches!(reduce_all(&g), Err(Error::StuckGrp { .. })));
        // With a third top-degree polynomial, {a1,a2} is breakable.
        let f = fam(4, &[&[1, 2], &[1, 2], &[3, 4]]);
        assert_eq!(reduce(&f, TieBreak::Lex).unwrap().final_degrees(), vec![1, 1, 2]);
    }

    #[test]
    fn requires_a_top_degree_polynomial() {
        let f = fam(3, &[&[1], &[2], &[3]]);
        assert!(matches!(reduce(&f, TieBreak::Lex), Err(Error::Precondition(_))));
    }

    #[test]
    fn lemma1_triangle() {
        let t = reduce(&triangle(), TieBreak::Lex).unwrap();
        let out = lemma1_check(&t, true, 0).unwrap();
        assert!(out.holds());
        assert_eq!(out.factorial_scale, 2);
        // The reduced W is nonzero, so dropping the 2! cannot balance.
        assert!(!out.unscaled_identity);
    }

    #[test]
    fn lemma1_two_linear() {
        let t = reduce(&fam(2, &[&[1], &[2]]), TieBreak::Lex).unwrap();
        let out = lemma1_check(&t, true, 0).unwrap();
        assert!(out.holds() && out.unscaled_identity);
        assert_eq!((out.sign, out.factorial_scale), (-1, 1));
        let randomized = lemma1_check(&t, false, 7).unwrap();
        assert!(randomized.holds() && !randomized.exact);
    }

    #[test]
    fn lemma1_rejects_unaccepted_trace() {
        let mut t = reduce(&triangle(), TieBreak::Lex).unwrap();
        t.final_family = t.initial.clone();
        assert!(matches!(lemma1_check(&t, true, 0), Err(Error::Precondition(_))));
    }
}
