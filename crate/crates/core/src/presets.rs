//! Named measures used throughout tests, benchmarks and the shipped configs.

use crate::group::{FiniteMeasure, GroupElement, Rational};

/// `[A, A^{-1}, B, B^{-1}]` with `A = [[1,2],[0,1]]`, `B = [[1,0],[2,1]]`: free
/// generators of a finite-index subgroup of SL(2,Z).
pub fn sanov_generators() -> [GroupElement; 4] {
    let el = |rows: &[&[i64]], gen: usize, exp: i64| {
        GroupElement::from_integers(rows).expect("unimodular").with_word(vec![(gen, exp)])
    };
    [
        el(&[&[1, 2], &[0, 1]], 0, 1),
        el(&[&[1, -2], &[0, 1]], 0, -1),
        el(&[&[1, 0], &[2, 1]], 1, 1),
        el(&[&[1, 0], &[-2, 1]], 1, -1),
    ]
}

/// Uniform measure on the Sanov generators and their inverses.
pub fn sanov_uniform() -> FiniteMeasure {
    let mut m = FiniteMeasure::uniform(sanov_generators().to_vec()).expect("valid measure");
    m.nondegenerate = true;
    m
}

/// Non-symmetric weights on the same support: `A: 2/5, A^{-1}: 1/10, B: 2/5, B^{-1}: 1/10`.
pub fn sanov_skewed() -> FiniteMeasure {
    let [a, ai, b, bi] = sanov_generators();
    let w = |n, d| Rational::new(n, d).expect("nonzero denominator");
    let mut m = FiniteMeasure::new(vec![(a, w(2, 5)), (ai, w(1, 10)), (b, w(2, 5)), (bi, w(1, 10))])
        .expect("valid measure");
    m.nondegenerate = true;
    m
}

/// `gamma = A B = [[5,2],[2,1]]`, an R-regular element of the Sanov group.
pub fn sanov_gamma() -> GroupElement {
    let [a, _, b, _] = sanov_generators();
    a.mul(&b).expect("small entries")
}

/// Elementary matrices `E_12(2), E_23(2), E_31(2)` and their inverses with
/// non-symmetric weights; the support generates a Zariski-dense subgroup of
/// SL(3,R).
pub fn elementary_d3() -> FiniteMeasure {
    let e = |p: usize, q: usize, t: i64, gen: usize| {
        let mut rows = [[0i64; 3]; 3];
        for (i, row) in rows.iter_mut().enumerate() {
            row[i] = 1;
        }
        rows[p][q] = t;
        let refs: Vec<&[i64]> = rows.iter().map(|r| &r[..]).collect();
        GroupElement::from_integers(&refs).expect("unimodular").with_word(vec![(gen, t.signum())])
    };
    let w = |n, d| Rational::new(n, d).expect("nonzero denominator");
    let mut m = FiniteMeasure::new(vec![
        (e(0, 1, 2, 0), w(1, 4)),
        (e(0, 1, -2, 0), w(1, 12)),
        (e(1, 2, 2, 1), w(1, 6)),
        (e(1, 2, -2, 1), w(1, 6)),
        (e(2, 0, 2, 2), w(1, 4)),
        (e(2, 0, -2, 2), w(1, 12)),
    ])
    .expect("valid measure");
    m.nondegenerate = true;
    m
}

/// `{U, U^{-1}}` with `U = [[1,1],[0,1]]`: the walk lives in a copy of Z.
pub fn abelian_unipotent() -> FiniteMeasure {
    let u = GroupElement::from_integers(&[&[1, 1], &[0, 1]]).expect("unimodular");
    let ui = u.inverse().expect("invertible");
    FiniteMeasure::uniform(vec![u, ui]).expect("valid measure")
}
