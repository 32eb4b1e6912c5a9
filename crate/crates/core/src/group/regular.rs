use nalgebra::{Complex, DMatrix};
use serde::Serialize;

use super::element::GroupElement;
use crate::error::{Error, Result};
use crate::linalg::{svd_sorted, SquareMatrix};
use crate::tolerances;

/// A real diagonalization `g = h^{-1} diag(delta) h` with `|delta_1| >= ... >= |delta_d|`.
#[derive(Debug, Clone, Serialize)]
pub struct Diagonalization {
    pub delta: Vec<f64>,
    pub h: SquareMatrix,
    pub h_inv: SquareMatrix,
    /// `||h|| * ||h^{-1}||`.
    pub condition: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Regularity {
    /// Diagonalizable over R with pairwise distinct eigenvalue moduli.
    pub regular: bool,
    /// Diagonalizable over R with some eigenvalue of modulus different from 1.
    pub weakly_regular: bool,
    #[serde(serialize_with = "ser_complex")]
    pub eigenvalues: Vec<Complex<f64>>,
    pub diagonalization: Option<Diagonalization>,
}

fn ser_complex<S: serde::Serializer>(v: &[Complex<f64>], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for z in v {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

/// Eigen-analysis of a real matrix for R-regularity.
pub fn analyze_regularity(g: &SquareMatrix) -> Result<Regularity> {
    let t = tolerances::current();
    let d = g.dim();
    let m = g.as_matrix().clone();
    let schur = m
        .clone()
        .try_schur(1e-15, 10_000)
        .ok_or_else(|| Error::Numeric("eigenvalue iteration did not converge".into()))?;
    let mut eig: Vec<Complex<f64>> = schur.complex_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then(b.re.total_cmp(&a.re)));

    let all_real = eig.iter().all(|z| z.im.abs() <= t.eigen_imag_rel * z.norm().max(1e-300));
    let scale = g.op_norm().max(1.0);

    let mut diag = None;
    if all_real {
        // group numerically equal eigenvalues and compare algebraic vs geometric multiplicity
        let reals: Vec<f64> = eig.iter().map(|z| z.re).collect();
        let mut vectors: Vec<(f64, nalgebra::DVector<f64>)> = Vec::with_capacity(d);
        let mut j = 0;
        let mut ok = true;
        while j < d {
            let lam = reals[j];
            let mut mult = 1;
            while j + mult < d && (reals[j + mult] - lam).abs() <= 1e-7 * lam.abs().max(1.0) {
                mult += 1;
            }
            let shifted = &m - DMatrix::<f64>::identity(d, d) * lam;
            let svd = svd_sorted(&shifted)?;
            let null = svd.singular_values.iter().filter(|&&s| s <= 1e-7 * scale).count();
            if null < mult {
                ok = false;
                break;
            }
            for c in 0..mult {
                let row = svd.v_t.row(d - 1 - c).transpose();
                vectors.push((lam, row));
            }
            j += mult;
        }
        if ok {
            let p = DMatrix::from_fn(d, d, |r, c| vectors[c].1[r]);
            if let Some(pinv) = p.clone().try_inverse() {
                let h = SquareMatrix::new(pinv)?;
                let h_inv = SquareMatrix::new(p)?;
                let condition = h.op_norm() * h_inv.op_norm();
                diag = Some(Diagonalization { delta: vectors.iter().map(|v| v.0).collect(), h, h_inv, condition });
            }
        }
    }

    let diagonalizable = diag.is_some();
    let moduli: Vec<f64> = eig.iter().map(|z| z.norm()).collect();
    let distinct = moduli.windows(2).all(|w| w[0] - w[1] >= t.eigen_moduli_rel * w[0]);
    let off_unit = moduli.iter().any(|&r| (r - 1.0).abs() > t.eigen_moduli_rel);
    Ok(Regularity {
        regular: diagonalizable && distinct,
        weakly_regular: diagonalizable && off_unit,
        eigenvalues: eig,
        diagonalization: diag,
    })
}

/// `(is R-regular, eigenvalues)` for an exact group element.
pub fn is_r_regular(g: &GroupElement) -> Result<(bool, Vec<Complex<f64>>)> {
    let r = analyze_regularity(&g.to_matrix())?;
    Ok((r.regular, r.eigenvalues))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn diagonal_is_regular() {
        let r = analyze_regularity(&SquareMatrix::diagonal(&[2.0, 0.5])).unwrap();
        assert!(r.regular && r.weakly_regular);
    }

    #[test]
    fn elliptic_is_not() {
        let r = analyze_regularity(&SquareMatrix::rotation(2, 0, 1, std::f64::consts::FRAC_PI_3)).unwrap();
        assert!(!r.regular && !r.weakly_regular);
        // the same rotation up to conjugacy, with integer entries
        let g = GroupElement::from_integers(&[&[0, -1], &[1, 1]]).unwrap();
        assert!(!is_r_regular(&g).unwrap().0);
    }

    #[test]
    fn golden_matrix() {
        let g = GroupElement::from_integers(&[&[2, 1], &[1, 1]]).unwrap();
        let (ok, eig) = is_r_regular(&g).unwrap();
        assert!(ok);
        assert_abs_diff_eq!(eig[0].re, (3.0 + 5f64.sqrt()) / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eig[1].re, (3.0 - 5f64.sqrt()) / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn unipotent_is_not_diagonalizable() {
        let g = GroupElement::from_integers(&[&[1, 2], &[0, 1]]).unwrap();
        let r = analyze_regularity(&g.to_matrix()).unwrap();
        assert!(!r.regular && !r.weakly_regular && r.diagonalization.is_none());
    }

    #[test]
    fn diagonalization_reconstructs() {
        let g = SquareMatrix::from_rows(&[&[5.0, 2.0], &[2.0, 1.0]]);
        let r = analyze_regularity(&g).unwrap();
        let dg = r.diagonalization.unwrap();
        let back = &(&dg.h_inv * &SquareMatrix::diagonal(&dg.delta)) * &dg.h;
        assert!(back.max_abs_diff(&g) < 1e-10);
        assert!(dg.delta[0].abs() > 1.0 && dg.delta[1].abs() < 1.0);
    }
}
