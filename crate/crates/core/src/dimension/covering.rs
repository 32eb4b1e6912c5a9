use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harmonic::EmpiricalMeasure;
use crate::linalg::wedge_distance;
use crate::stats;

/// Greedy count of closed `r`-balls centred at sample points whose union
/// carries empirical mass at least `1 - eps`.
///
/// Each round takes the ball with the largest uncovered mass, ties going to
/// the lowest sample index; the result bounds the minimal covering number
/// from above.
pub fn covering_number(nu: &EmpiricalMeasure, r: f64, eps: f64) -> Result<usize> {
    Ok(covering_numbers(nu, r, &[eps])?[0])
}

/// Greedy covering counts for several `eps` at one radius. The greedy
/// order does not depend on `eps`, so one run to a full cover answers all
/// of them: `N(r, eps)` is the number of picks after which the covered
/// mass first reaches `1 - eps`.
pub fn covering_numbers(nu: &EmpiricalMeasure, r: f64, epsilons: &[f64]) -> Result<Vec<usize>> {
    if epsilons.iter().any(|e| !(0.0..1.0).contains(e)) {
        return Err(Error::Precondition("eps must lie in [0, 1)".into()));
    }
    if !(r > 0.0) {
        return Err(Error::Precondition("radius must be positive".into()));
    }
    let n = nu.len();
    if n == 0 {
        return Err(Error::EmptyMeasure);
    }
    let covered_after = greedy_cover(nu, r);
    Ok(epsilons
        .iter()
        .map(|&eps| {
            // integer target: covered / n >= 1 - eps, guarding against rounding
            let target = ((1.0 - eps) * n as f64 - 1e-9).ceil().max(0.0) as usize;
            covered_after.partition_point(|&c| c < target) + usize::from(target > 0)
        })
        .collect())
}

/// Runs the greedy cover to completion and returns the covered point count
/// after each pick.
///
/// Ball membership is symmetric, so the neighbor list of a point is both
/// its ball and the set of centres whose ball contains it: covering a point
/// decrements exactly those gains. Gains only shrink, so every heap entry
/// bounds its centre's gain from above (lazy greedy): a popped entry that
/// is stale goes back with its current gain, and a fresh one is the exact
/// greedy choice.
fn greedy_cover(nu: &EmpiricalMeasure, r: f64) -> Vec<usize> {
    let n = nu.len();
    let neighbors: Vec<Vec<u32>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let z = nu.wedge(j);
            (0..n as u32).filter(|&l| wedge_distance(z, nu.wedge(l as usize)) <= r).collect()
        })
        .collect();
    let mut gain: Vec<usize> = neighbors.iter().map(Vec::len).collect();
    let mut heap: BinaryHeap<(usize, Reverse<usize>)> = gain.iter().enumerate().map(|(j, &g)| (g, Reverse(j))).collect();
    let mut covered = vec![false; n];
    let mut total = 0usize;
    let mut out = Vec::new();
    while total < n {
        let Some((g, Reverse(j))) = heap.pop() else { break };
        if g != gain[j] {
            if gain[j] > 0 {
                heap.push((gain[j], Reverse(j)));
            }
            continue;
        }
        for &l in &neighbors[j] {
            let l = l as usize;
            if !covered[l] {
                covered[l] = true;
                total += 1;
                for &c in &neighbors[l] {
                    gain[c as usize] -= 1;
                }
            }
        }
        out.push(total);
    }
    out
}

/// Covering counts `N(r, eps)` with rows indexed by `eps` and columns by `r`.
#[derive(Debug, Clone, Serialize)]
pub struct CoveringTable {
    pub radii: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub counts: Vec<Vec<usize>>,
}

impl CoveringTable {
    pub fn compute(nu: &EmpiricalMeasure, radii: &[f64], epsilons: &[f64]) -> Result<Self> {
        // radii run one at a time: each holds every neighbor list in memory
        let by_radius: Vec<Vec<usize>> = radii.iter().map(|&r| covering_numbers(nu, r, epsilons)).collect::<Result<_>>()?;
        let counts = (0..epsilons.len()).map(|e| by_radius.iter().map(|c| c[e]).collect()).collect();
        Ok(Self { radii: radii.to_vec(), epsilons: epsilons.to_vec(), counts })
    }

    /// `log N(r, eps) / log(1/r)` for one row.
    pub fn ratios(&self, row: usize) -> Vec<f64> {
        self.counts[row].iter().zip(&self.radii).map(|(&c, r)| (c as f64).ln() / -r.ln()).collect()
    }

    /// Least-squares slopes of `log N` against `log(1/r)` over every run of
    /// `width` consecutive radii starting at index `from` or later.
    pub fn window_slopes(&self, row: usize, width: usize, from: usize) -> Vec<f64> {
        let x: Vec<f64> = self.radii.iter().map(|r| -r.ln()).collect();
        let y: Vec<f64> = self.counts[row].iter().map(|&c| (c as f64).ln()).collect();
        let width = width.clamp(2, x.len().max(2));
        let last = x.len().saturating_sub(width);
        (from.min(last)..=last).filter_map(|s| stats::ls_slope(&x[s..s + width], &y[s..s + width])).collect()
    }
}

/// Liminf/limsup proxies of `log N / log(1/r)` over the reliable radii:
/// the min and max of least-squares slopes over sliding windows spanning
/// half the grid. The limits are taken as `r -> 0`, so the coarsest third
/// of the grid, where `r` is comparable to the spread of the measure, only
/// enters through the first window. Ledrappier-style values take the sup
/// over `eps > 0`, box values use a full cover (`eps = 0`).
#[derive(Debug, Clone, Serialize)]
pub struct LedrappierBoxSummary {
    pub lower_ledrappier: f64,
    pub upper_ledrappier: f64,
    pub lower_box: f64,
    pub upper_box: f64,
    pub slope_window: usize,
    pub first_window_start: usize,
    pub table: CoveringTable,
}

/// Default width of the sliding slope window: half the grid, at least three radii.
pub fn default_slope_window(grid_len: usize) -> usize {
    grid_len.div_ceil(2).max(3)
}

pub fn ledrappier_box_summary(nu: &EmpiricalMeasure, radii: &[f64], epsilons: &[f64]) -> Result<LedrappierBoxSummary> {
    if radii.len() < 2 || epsilons.is_empty() {
        return Err(Error::Precondition("need at least two radii and one eps".into()));
    }
    if epsilons.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
        return Err(Error::Precondition("Ledrappier eps must lie in (0, 1)".into()));
    }
    let mut all_eps = vec![0.0];
    all_eps.extend_from_slice(epsilons);
    let table = CoveringTable::compute(nu, radii, &all_eps)?;
    let width = default_slope_window(radii.len());
    let from = radii.len() / 3;
    let bounds = |row: usize| {
        let s = table.window_slopes(row, width, from);
        let lo = s.iter().copied().fold(f64::INFINITY, f64::min).max(0.0);
        let hi = s.iter().copied().fold(f64::NEG_INFINITY, f64::max).max(0.0);
        (lo, hi)
    };
    let (lower_box, upper_box) = bounds(0);
    let (mut lower_ledrappier, mut upper_ledrappier) = (0.0f64, 0.0f64);
    for row in 1..all_eps.len() {
        let (lo, hi) = bounds(row);
        lower_ledrappier = lower_ledrappier.max(lo);
        upper_ledrappier = upper_ledrappier.max(hi);
    }
    Ok(LedrappierBoxSummary {
        lower_ledrappier,
        upper_ledrappier,
        lower_box,
        upper_box,
        slope_window: width,
        first_window_start: from,
        table,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dimension::benchmarks;
    use crate::dimension::pointwise::RadiusWindow;
    use crate::linalg::GrassmannPoint;

    fn lines(angles_and_counts: &[(f64, usize)]) -> EmpiricalMeasure {
        let pts = angles_and_counts
            .iter()
            .flat_map(|&(t, c)| std::iter::repeat_n(GrassmannPoint::from_vectors(&[&[t.cos(), t.sin()]]).unwrap(), c))
            .collect();
        EmpiricalMeasure::from_points(1, pts).unwrap()
    }

    #[test]
    fn single_atom_needs_one_ball() {
        let nu = benchmarks::atom(50, 3);
        for eps in [0.0, 0.3, 0.9] {
            assert_eq!(covering_number(&nu, 0.01, eps).unwrap(), 1);
        }
    }

    #[test]
    fn two_atoms() {
        // perpendicular lines are at distance 1
        let heavy = lines(&[(0.0, 6), (std::f64::consts::FRAC_PI_2, 4)]);
        assert_eq!(covering_number(&heavy, 0.4, 0.4).unwrap(), 1);
        let even = lines(&[(0.0, 5), (std::f64::consts::FRAC_PI_2, 5)]);
        assert_eq!(covering_number(&even, 0.4, 0.4).unwrap(), 2);
        assert_eq!(covering_number(&even, 0.4, 0.5).unwrap(), 1);
        assert_eq!(covering_number(&even, 1.0, 0.0).unwrap(), 1);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        // three equally heavy atoms; any one ball is optimal, the count is 1 either way,
        // and relabeling the sample does not change the count
        let a = lines(&[(0.0, 3), (1.0, 3), (2.0, 3)]);
        let b = lines(&[(2.0, 3), (0.0, 3), (1.0, 3)]);
        for eps in [0.1, 0.5, 0.7] {
            assert_eq!(covering_number(&a, 0.05, eps).unwrap(), covering_number(&b, 0.05, eps).unwrap());
        }
    }

    #[test]
    fn circle_covering_slope() {
        let nu = benchmarks::circle(4000, std::f64::consts::FRAC_PI_4, 3).unwrap();
        let w = RadiusWindow::down_to_floor(&nu, 0.3, 8).unwrap();
        let s = ledrappier_box_summary(&nu, &w.radii, &[0.05, 0.1]).unwrap();
        for v in [s.lower_ledrappier, s.upper_ledrappier, s.lower_box, s.upper_box] {
            assert!((v - 1.0).abs() < 0.15, "{s:?}");
        }
    }

    #[test]
    fn bad_eps_rejected() {
        let nu = benchmarks::atom(5, 2);
        assert!(covering_number(&nu, 0.1, 1.0).is_err());
        assert!(ledrappier_box_summary(&nu, &[0.5, 0.1], &[0.0]).is_err());
    }
}
