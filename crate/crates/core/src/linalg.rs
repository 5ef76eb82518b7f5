//! Dense helpers: sign and log-magnitude determinants, and the null
//! direction of a nearly singular matrix.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Determinant as `sign * exp(log_abs)`; `sign == 0` for an exactly singular
/// matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet {
    pub sign: f64,
    pub log_abs: f64,
}

/// Determinant by partial-pivot LU after scaling each row to unit max norm.
pub fn log_det(a: &DMatrix<f64>) -> LogDet {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "determinant of a non-square matrix");
    let mut m = a.clone();
    let mut sign = 1.0;
    let mut log_abs = 0.0;
    for i in 0..n {
        let norm = m.row(i).iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        if norm == 0.0 {
            return LogDet { sign: 0.0, log_abs: f64::NEG_INFINITY };
        }
        log_abs += norm.ln();
        for x in m.row_mut(i).iter_mut() {
            *x /= norm;
        }
    }
    for col in 0..n {
        let (piv, val) = (col..n)
            .map(|r| (r, m[(r, col)].abs()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if val == 0.0 {
            return LogDet { sign: 0.0, log_abs: f64::NEG_INFINITY };
        }
        if piv != col {
            m.swap_rows(piv, col);
            sign = -sign;
        }
        let d = m[(col, col)];
        if d < 0.0 {
            sign = -sign;
        }
        log_abs += d.abs().ln();
        for r in col + 1..n {
            let f = m[(r, col)] / d;
            if f != 0.0 {
                for c in col + 1..n {
                    let t = m[(col, c)];
                    m[(r, c)] -= f * t;
                }
            }
        }
    }
    LogDet { sign, log_abs }
}

/// Right singular vector of the smallest singular value with the two
/// smallest singular values and the largest one.
#[derive(Debug, Clone)]
pub struct NullDirection {
    pub vector: DVector<f64>,
    pub s_min: f64,
    pub s_next: f64,
    pub s_max: f64,
}

/// Null direction of `a`, rejected when the smallest singular value is not
/// separated from the next one by a factor 1000.
pub fn null_direction(a: &DMatrix<f64>) -> Result<NullDirection> {
    let svd = a.clone().svd(false, true);
    let v_t = svd.v_t.as_ref().ok_or_else(|| Error::NotConverged("SVD did not converge".into()))?;
    let s = &svd.singular_values;
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&i, &j| s[i].partial_cmp(&s[j]).unwrap_or(std::cmp::Ordering::Equal));
    let s_min = s[order[0]];
    let s_next = if s.len() > 1 { s[order[1]] } else { f64::INFINITY };
    let s_max = s[*order.last().unwrap()];
    if s_min > 1e-3 * s_next {
        return Err(Error::NullspaceNotRankOne { s_min, s_next });
    }
    let vector = v_t.row(order[0]).transpose();
    Ok(NullDirection { vector, s_min, s_next, s_max })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_det_matches_nalgebra() {
        let a = DMatrix::from_fn(7, 7, |i, j| ((i * 7 + j) as f64 * 0.37).sin() + if i == j { 0.5 } else { 0.0 });
        let d = a.clone().determinant();
        let l = log_det(&a);
        assert_eq!(l.sign, d.signum());
        assert!((l.log_abs - d.abs().ln()).abs() < 1e-12);
    }

    #[test]
    fn log_det_survives_underflow() {
        let a = DMatrix::from_diagonal_element(400, 400, 1e-3);
        let l = log_det(&a);
        assert_eq!(l.sign, 1.0);
        assert!((l.log_abs - 400.0 * 1e-3f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn null_direction_of_rank_deficient_matrix() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0]);
        let n = null_direction(&a).unwrap();
        assert!((&a * &n.vector).norm() < 1e-12);
        let id = DMatrix::<f64>::identity(3, 3);
        assert!(matches!(null_direction(&id), Err(Error::NullspaceNotRankOne { .. })));
    }
}
