use std::collections::{BTreeMap, BTreeSet, HashSet};

use itertools::Itertools;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mdsfit::codegen::{build_code, find_points, smallest_prime_power, transformation, verify_mds, SearchOptions};
use mdsfit::io::{matrix_to_json, parse_matrix};
use mdsfit::polyring::det_cofactor;
use mdsfit::reduction::{reduce, TieBreak};
use mdsfit::structures::{all_polys, all_rs_subsets, to_support_matrix};
use mdsfit::verify::{canonical_form, enumerate_families, run_suite, sample_family, sample_mds_matrix, Scope};
use mdsfit::{
    build_p, has_grp, has_rp, make_field, mds_condition, to_root_family, FieldElem, FieldMatrix, FieldSpec, Monomial,
    MultiPoly, RootFamily, SupportMatrix,
};

const FIELDS: [u64; 10] = [2, 3, 4, 5, 7, 8, 9, 16, 25, 27];

fn field_and_elems(count: usize) -> impl Strategy<Value = (FieldSpec, Vec<FieldElem>)> {
    prop::sample::select(FIELDS.to_vec()).prop_flat_map(move |q| {
        prop::collection::vec(0..q, count)
            .prop_map(move |v| (make_field(q).unwrap(), v.into_iter().map(FieldElem::from_raw).collect()))
    })
}

/// `(m, n, profile)` with maximum degree `m - 1`.
fn family_strategy(max_m: usize, max_n: usize) -> impl Strategy<Value = RootFamily> {
    (2..=max_m)
        .prop_flat_map(move |m| {
            let n = (m - 1)..=max_n.min(m * (m - 1)).max(m - 1);
            (Just(m), n, prop::collection::vec(0..m, m), 0..m, any::<u64>())
        })
        .prop_map(|(m, n, mut profile, top, seed)| {
            profile[top] = m - 1;
            let profile: Vec<usize> = profile.into_iter().map(|d| d.min(n)).collect();
            sample_family(n, &profile, &mut ChaCha8Rng::seed_from_u64(seed))
        })
}

fn matrix_strategy(max_m: usize, max_n: usize) -> impl Strategy<Value = SupportMatrix> {
    (2..=max_m)
        .prop_flat_map(move |m| (Just(m), m..=max_n))
        .prop_flat_map(|(m, n)| prop::collection::vec(1..(1u64 << n), m).prop_map(move |rows| (n, rows)))
        .prop_map(|(n, rows)| SupportMatrix::from_masks(n, rows).unwrap())
}

fn random_point(nvars: usize, field: &FieldSpec, seed: u64) -> BTreeMap<u32, FieldElem> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (1..=nvars as u32)
        .map(|v| (v, FieldElem::from_raw(rng.random_range(0..field.order()))))
        .collect()
}

/// Leibniz-formula determinant, independent of the cofactor routine.
fn leibniz(matrix: &[Vec<MultiPoly>], nvars: usize) -> MultiPoly {
    let m = matrix.len();
    let mut total = MultiPoly::zero(nvars);
    for perm in (0..m).permutations(m) {
        let inversions = (0..m).tuple_combinations().filter(|&(i, j)| perm[i] > perm[j]).count();
        let mut term = MultiPoly::constant(nvars, if inversions % 2 == 0 { 1 } else { -1 });
        for (row, &col) in perm.iter().enumerate() {
            term = term.mul(&matrix[row][col]);
        }
        total = total.add(&term);
    }
    total
}

fn small_poly() -> impl Strategy<Value = MultiPoly> {
    prop::collection::vec((prop::collection::vec((1u32..=3, 1u32..=3), 0..3), -5i128..=5), 0..5).prop_map(|terms| {
        MultiPoly::from_terms(3, terms.into_iter().map(|(pairs, c)| (Monomial::from_pairs(pairs), c)))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn field_axioms((f, e) in field_and_elems(3)) {
        let (a, b, c) = (e[0], e[1], e[2]);
        prop_assert_eq!(f.add(a, b), f.add(b, a));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.add(a, f.neg(a)), FieldElem::ZERO);
        prop_assert_eq!(f.sub(f.add(a, b), b), a);
        match f.inv(a) {
            Some(i) => prop_assert_eq!(f.mul(a, i), FieldElem::ONE),
            None => prop_assert!(a.is_zero()),
        }
        prop_assert_eq!(f.pow(a, f.order()), a);
    }

    #[test]
    fn det_is_multiplicative(a in prop::collection::vec(0u64..7, 9), b in prop::collection::vec(0u64..7, 9)) {
        let f = make_field(7).unwrap();
        let to = |v: &[u64]| FieldMatrix::from_rows(&f, &v.chunks(3).map(<[u64]>::to_vec).collect::<Vec<_>>()).unwrap();
        let (ma, mb) = (to(&a), to(&b));
        let lhs = ma.mul(&mb).unwrap().det().unwrap();
        prop_assert_eq!(lhs, f.mul(ma.det().unwrap(), mb.det().unwrap()));
    }

    #[test]
    fn build_p_evaluates_to_product(roots in prop::collection::btree_set(1u32..=6, 0..4), seed in any::<u64>(), x in 0u64..11) {
        let roots: Vec<u32> = roots.into_iter().collect();
        let f = make_field(11).unwrap();
        let p = build_p(&roots, 4, 6).unwrap();
        let point = random_point(6, &f, seed);
        let x = FieldElem::from_raw(x);
        let mut horner = FieldElem::ZERO;
        for c in p.coeffs().iter().rev() {
            horner = f.add(f.mul(horner, x), c.eval(&point, &f).unwrap());
        }
        let direct = roots.iter().fold(FieldElem::ONE, |acc, v| f.mul(acc, f.sub(x, point[v])));
        prop_assert_eq!(horner, direct);
    }

    #[test]
    fn wdet_matches_leibniz(family in family_strategy(3, 4)) {
        let m = family.m();
        let polys = family.polynomials().unwrap();
        let matrix: Vec<Vec<MultiPoly>> = (0..m).map(|row| polys.iter().map(|p| p.coeffs()[row].clone()).collect()).collect();
        let w = family.wdet().unwrap();
        prop_assert_eq!(&w, &leibniz(&matrix, family.n()));
        prop_assert_eq!(&w, &det_cofactor(&matrix).unwrap());
    }

    #[test]
    fn derivative_rules(p in small_poly(), q in small_poly(), v in 1u32..=3) {
        prop_assert_eq!(p.add(&q).derivative(v, 1), p.derivative(v, 1).add(&q.derivative(v, 1)));
        let lhs = p.mul(&q).derivative(v, 1);
        let rhs = p.derivative(v, 1).mul(&q).add(&p.mul(&q.derivative(v, 1)));
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(p.derivative(v, 2), p.derivative(v, 1).derivative(v, 1));
        prop_assert_eq!(p.derivative(v, 2), p.hasse_derivative(v, 2).scale(2));
    }

    #[test]
    fn text_round_trip(p in small_poly()) {
        let back: MultiPoly = p.to_string().parse().unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn zero_w_vanishes_everywhere(family in family_strategy(4, 6), seed in any::<u64>()) {
        let w = family.wdet().unwrap();
        if w.is_identically_zero() {
            for q in [4u64, 5, 7] {
                let f = make_field(q).unwrap();
                prop_assert!(w.eval(&random_point(family.n(), &f, seed), &f).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn det_t_equals_w(family in family_strategy(5, 7), q in prop::sample::select(vec![7u64, 11, 16]), seed in any::<u64>()) {
        let f = make_field(q).unwrap();
        let point = random_point(family.n(), &f, seed);
        let values: Vec<FieldElem> = point.values().copied().collect();
        let det = transformation(&family, &values, &f).unwrap().det().unwrap();
        prop_assert_eq!(det, family.wdet().unwrap().eval(&point, &f).unwrap());
    }

    #[test]
    fn mds_condition_iff_nrp(m in 2usize..=4, extra in 0usize..=2, seed in any::<u64>()) {
        let n = m + extra;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = (0..m)
            .map(|_| rand::seq::index::sample(&mut rng, n, n - m + 1).into_iter().fold(0u64, |a, b| a | 1 << b))
            .collect();
        let mat = SupportMatrix::from_masks(n, rows).unwrap();
        let rp = has_rp(&to_root_family(&mat).unwrap()).unwrap().is_some();
        prop_assert_eq!(mds_condition(&mat).holds, !rp);
    }

    #[test]
    fn gnrp_bounds_subset_order(family in family_strategy(5, 10)) {
        if has_grp(&family).is_none() {
            let m = family.m();
            for s in all_rs_subsets(&family, all_polys(&family)) {
                prop_assert!(s.r() + s.s() <= m, "{}", s);
            }
        }
    }

    #[test]
    fn rp_implies_grp(m in 2usize..=5, seed in any::<u64>()) {
        let n = m * (m - 1) / 2 + 1;
        let f = sample_family(n, &vec![m - 1; m], &mut ChaCha8Rng::seed_from_u64(seed));
        if has_rp(&f).unwrap().is_some() {
            prop_assert!(has_grp(&f).is_some());
        }
    }

    #[test]
    fn mds_condition_is_monotone(mat in matrix_strategy(4, 7), i in 0usize..4, j in 0usize..7) {
        let (i, j) = (i % mat.m(), j % mat.n());
        if mds_condition(&mat).holds {
            prop_assert!(mds_condition(&mat.with_one(i, j)).holds);
        }
    }

    #[test]
    fn matrix_formats_round_trip(mat in matrix_strategy(4, 8)) {
        let json = serde_json::to_string(&matrix_to_json(&mat)).unwrap();
        prop_assert_eq!(parse_matrix(&json).unwrap(), mat.clone());
        prop_assert_eq!(parse_matrix(&mat.to_string()).unwrap(), mat.clone());
        if let Ok(family) = to_root_family(&mat) {
            prop_assert_eq!(to_support_matrix(&family).unwrap(), mat);
        }
    }

    #[test]
    fn canonical_form_is_invariant(family in family_strategy(4, 7), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut relabel: Vec<u32> = (1..=family.n() as u32).collect();
        relabel.shuffle(&mut rng);
        let mut order: Vec<usize> = (0..family.m()).collect();
        order.shuffle(&mut rng);
        let degrees = family.degrees();
        // Only swaps among equal degrees are part of the quotient.
        order.sort_by_key(|&i| degrees[i]);
        let mut by_degree: Vec<usize> = (0..family.m()).collect();
        by_degree.sort_by_key(|&i| degrees[i]);
        let mut perm = vec![0; family.m()];
        for (slot, &i) in by_degree.iter().enumerate() {
            perm[i] = order[slot];
        }
        let sets: Vec<Vec<u32>> = perm
            .iter()
            .map(|&i| family.roots(i).iter().map(|&v| relabel[v as usize - 1]).collect())
            .collect();
        let image = RootFamily::new(family.n(), &sets).unwrap();
        let canon = canonical_form(&family);
        prop_assert_eq!(canonical_form(&image), canon.clone());
        prop_assert_eq!(canonical_form(&canon), canon.clone());
        prop_assert_eq!(canon.degrees(), family.degrees());
    }

    #[test]
    fn multiplicity_matches_original(family in family_strategy(4, 9)) {
        if has_grp(&family).is_none() {
            let t = reduce(&family, TieBreak::Lex).unwrap();
            for (root, n_r) in t.multiplicities() {
                prop_assert!(n_r >= 1);
                prop_assert_eq!(n_r, family.containing(1 << (root - 1)).count_ones() as usize);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn found_points_give_mds_codes(m in 2usize..=4, extra in 0usize..=3, seed in any::<u64>()) {
        let n = m + extra;
        let mat = sample_mds_matrix(m, n, &mut ChaCha8Rng::seed_from_u64(seed));
        let field = make_field(smallest_prime_power((n + m - 1) as u64)).unwrap();
        let code = build_code(&mat, &field, &SearchOptions::default()).unwrap();
        prop_assert!(code.verification.passed);
        let family = to_root_family(&mat).unwrap();
        if !code.padded() {
            let points = find_points(&family, &field, &SearchOptions::default()).unwrap();
            let distinct: HashSet<_> = points.iter().collect();
            prop_assert_eq!(distinct.len(), n);
            prop_assert_eq!(&points, &code.points);
            prop_assert!(verify_mds(&code.g, &mat).unwrap().passed);
        }
    }
}

/// Expanding every orbit representative reproduces the raw enumeration.
#[test]
fn canonical_enumeration_is_a_quotient() {
    for (m, n, profile) in [
        (2, 2, vec![1, 1]),
        (2, 2, vec![0, 1]),
        (4, 5, vec![3, 3, 2, 3]),
        (3, 3, vec![2, 2, 2]),
        (3, 4, vec![1, 2, 2]),
        (3, 5, vec![2, 1, 2]),
        (3, 4, vec![0, 2, 1]),
    ] {
        let raw: BTreeSet<RootFamily> = enumerate_families(m, n, &profile, false).unwrap().into_iter().collect();
        let reps = enumerate_families(m, n, &profile, true).unwrap();
        let mut union = BTreeSet::new();
        let mut total = 0;
        for rep in &reps {
            let mut orbit = BTreeSet::new();
            for relabel in (1..=n as u32).permutations(n) {
                for order in (0..m).permutations(m) {
                    if (0..m).any(|i| rep.degree(order[i]) != profile[i]) {
                        continue;
                    }
                    let sets: Vec<Vec<u32>> = order
                        .iter()
                        .map(|&i| rep.roots(i).iter().map(|&v| relabel[v as usize - 1]).collect())
                        .collect();
                    orbit.insert(RootFamily::new(n, &sets).unwrap());
                }
            }
            total += orbit.len();
            union.extend(orbit);
        }
        assert_eq!(total, raw.len(), "orbits overlap or miss families for {profile:?}");
        assert_eq!(union, raw);
    }
}

#[test]
fn suite_is_deterministic() {
    let scope = Scope::random(4, 8, None, 200, 99);
    let mut a = run_suite(&scope).unwrap();
    let mut b = run_suite(&scope).unwrap();
    a.runtime_secs = 0.0;
    b.runtime_secs = 0.0;
    assert_eq!(a, b);
    assert_eq!(a.counts.tested, a.counts.zero_grp + a.counts.nonzero_gnrp + a.counts.nonzero_grp + a.counts.counterexamples);
}
