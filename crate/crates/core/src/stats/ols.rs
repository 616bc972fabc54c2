//! Least squares through a Householder QR factorization.

use nalgebra::{DMatrix, DVector};

use super::StatsError;

/// Relative size below which an `R` diagonal entry marks a column as linearly
/// dependent on the columns before it.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    pub rss: f64,
}

/// Solves `min ||target - design * b||`.
///
/// `names` labels the design columns in errors; a rank-deficient design
/// reports the first dependent column together with the earlier columns it is
/// a combination of.
pub fn ols(design: &DMatrix<f64>, target: &[f64], names: &[&str]) -> Result<OlsFit, StatsError> {
    let (rows, cols) = design.shape();
    assert_eq!(rows, target.len(), "design and target lengths differ");
    assert_eq!(cols, names.len(), "one name per column");
    if rows < cols {
        return Err(StatsError::Underdetermined { rows, cols });
    }
    let qr = design.clone().qr();
    let r = qr.r();
    for j in 0..cols {
        let scale = design.column(j).norm();
        if scale == 0.0 || r[(j, j)].abs() <= RANK_TOL * scale {
            return Err(StatsError::Singular {
                columns: dependent_columns(&r, j, scale)
                    .into_iter()
                    .map(|i| names[i].to_string())
                    .collect(),
            });
        }
    }
    let y = DVector::from_column_slice(target);
    let qty = qr.q().transpose() * &y;
    let coef = r
        .solve_upper_triangular(&qty)
        .expect("nonzero diagonal checked above");
    let resid = &y - design * &coef;
    Ok(OlsFit {
        coefficients: coef.iter().copied().collect(),
        rss: resid.norm_squared(),
    })
}

/// Column `j` together with the earlier columns that combine into it.
fn dependent_columns(r: &DMatrix<f64>, j: usize, scale: f64) -> Vec<usize> {
    let mut out = Vec::new();
    if j > 0 && scale > 0.0 {
        let lead = r.view((0, 0), (j, j)).into_owned();
        let rhs = r.view((0, j), (j, 1)).into_owned();
        if let Some(c) = lead.solve_upper_triangular(&rhs) {
            out.extend((0..j).filter(|&i| c[i].abs() > 1e-8));
        }
    }
    out.push(j);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_design() {
        let fit = ols(
            &DMatrix::identity(3, 3),
            &[1.0, -2.0, 0.5],
            &["a", "b", "c"],
        )
        .unwrap();
        assert_eq!(fit.coefficients.len(), 3);
        for (c, t) in fit.coefficients.iter().zip([1.0, -2.0, 0.5]) {
            assert!((c - t).abs() < 1e-15);
        }
        assert!(fit.rss < 1e-28);
    }

    #[test]
    fn exact_line() {
        let xs = [0.5, 1.0, 2.0, 3.5, 7.0];
        let design = DMatrix::from_fn(5, 2, |i, j| if j == 0 { 1.0 } else { xs[i] });
        let y: Vec<f64> = xs.iter().map(|x| 2.0 * x).collect();
        let fit = ols(&design, &y, &["const", "x"]).unwrap();
        assert!(fit.coefficients[0].abs() < 1e-12);
        assert!((fit.coefficients[1] - 2.0).abs() < 1e-12);
        assert!(fit.rss < 1e-10);
    }

    #[test]
    fn residual_orthogonal_to_design() {
        let design = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 1.0, 1.0, 1.0, 2.0, 1.0, 3.0]);
        let y = [1.0, 3.0, 2.0, 5.0];
        let fit = ols(&design, &y, &["c", "x"]).unwrap();
        // slope 1.1, intercept 1.1 by hand
        assert!((fit.coefficients[0] - 1.1).abs() < 1e-12);
        assert!((fit.coefficients[1] - 1.1).abs() < 1e-12);
        assert!((fit.rss - 2.7).abs() < 1e-12);
    }

    #[test]
    fn collinear_columns_named() {
        let design = DMatrix::from_row_slice(
            4,
            3,
            &[1.0, 1.0, 2.0, 1.0, 2.0, 4.0, 1.0, 3.0, 6.0, 1.0, 5.0, 10.0],
        );
        let err = ols(&design, &[1.0; 4], &["const", "y_lag1", "x_lag1"]).unwrap_err();
        match err {
            StatsError::Singular { columns } => assert_eq!(columns, ["y_lag1", "x_lag1"]),
            other => panic!("{other:?}"),
        }
        let zero = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        assert!(matches!(
            ols(&zero, &[1.0; 3], &["const", "z"]),
            Err(StatsError::Singular { columns }) if columns == ["z"]
        ));
    }

    #[test]
    fn too_few_rows() {
        assert!(matches!(
            ols(&DMatrix::zeros(1, 2), &[1.0], &["a", "b"]),
            Err(StatsError::Underdetermined { rows: 1, cols: 2 })
        ));
    }
}
