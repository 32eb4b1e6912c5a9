use nalgebra::{DMatrix, DVector};

use super::matrix::SquareMatrix;
use crate::error::{Error, Result};

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, j| acc * (n - j) / (j + 1))
}

/// All increasing index tuples `j_1 < ... < j_i` of `0..d` in lexicographic
/// order; this ordering fixes the basis `e_{j1} ^ ... ^ e_{ji}` of the
/// exterior power.
pub fn subsets(d: usize, i: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, d: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for j in start..=d - left {
            cur.push(j);
            rec(j + 1, d, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::with_capacity(binomial(d, i));
    rec(0, d, i, &mut Vec::with_capacity(i), &mut out);
    out
}

fn minor(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> f64 {
    let k = rows.len();
    match k {
        0 => 1.0,
        1 => m[(rows[0], cols[0])],
        2 => {
            m[(rows[0], cols[0])] * m[(rows[1], cols[1])] - m[(rows[0], cols[1])] * m[(rows[1], cols[0])]
        }
        _ => DMatrix::from_fn(k, k, |a, b| m[(rows[a], cols[b])]).determinant(),
    }
}

/// Matrix of the i-th exterior power in the lexicographic basis. Entry
/// `(I, J)` is the minor of `g` on rows `I` and columns `J`.
pub fn exterior_power_of(g: &DMatrix<f64>, i: usize) -> Result<DMatrix<f64>> {
    let d = g.nrows();
    if i == 0 || i > d {
        return Err(Error::RankOutOfRange { rank: i, max: d, d });
    }
    let idx = subsets(d, i);
    let n = idx.len();
    Ok(DMatrix::from_fn(n, n, |a, b| minor(g, &idx[a], &idx[b])))
}

/// The i-th exterior power for `1 <= i <= d-1`.
pub fn exterior_power(g: &SquareMatrix, i: usize) -> Result<SquareMatrix> {
    let d = g.dim();
    if i == 0 || i >= d {
        return Err(Error::RankOutOfRange { rank: i, max: d - 1, d });
    }
    SquareMatrix::new(exterior_power_of(g.as_matrix(), i)?)
}

/// Plücker coordinates of the columns of a `d x i` frame: the exterior
/// product of the columns expressed in the lexicographic basis.
pub fn plucker(frame: &DMatrix<f64>) -> DVector<f64> {
    let (d, i) = frame.shape();
    let cols: Vec<usize> = (0..i).collect();
    let idx = subsets(d, i);
    DVector::from_iterator(idx.len(), idx.iter().map(|rows| minor(frame, rows, &cols)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_are_lexicographic() {
        assert_eq!(subsets(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(subsets(4, 2).len(), 6);
        assert_eq!(binomial(6, 3), 20);
    }

    #[test]
    fn diagonal_products() {
        let g = SquareMatrix::diagonal(&[2.0, 1.0, 0.5]);
        let w = exterior_power(&g, 2).unwrap();
        assert!(w.max_abs_diff(&SquareMatrix::diagonal(&[2.0, 1.0, 0.5])) < 1e-15);
    }

    #[test]
    fn first_power_is_identity_map() {
        let g = SquareMatrix::from_rows(&[&[1.0, 2.0, 0.0], &[0.0, 1.0, 0.0], &[3.0, 1.0, 1.0]]);
        assert_eq!(exterior_power(&g, 1).unwrap(), g);
    }

    #[test]
    fn rank_range_is_checked() {
        let g = SquareMatrix::identity(3);
        assert!(exterior_power(&g, 0).is_err());
        assert!(exterior_power(&g, 3).is_err());
    }
}
