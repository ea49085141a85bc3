use crate::data::BinaryDataset;
use crate::error::{IsingError, Result};
use crate::model::{log_two_cosh, IsingModel};

fn check_data(model: &IsingModel, data: &BinaryDataset) -> Result<()> {
    if model.p() != data.p() {
        return Err(IsingError::DimensionMismatch {
            expected: model.p(),
            found: data.p(),
        });
    }
    Ok(())
}

fn check_node(i: usize, p: usize) -> Result<()> {
    if i >= p {
        return Err(IsingError::IndexOutOfRange { index: i, p });
    }
    Ok(())
}

/// Full log-likelihood `sum_rows [sum_i tau_i x_i + sum_{i<j} omega_ij x_i x_j] - N ln Z`.
pub fn log_likelihood(model: &IsingModel, data: &BinaryDataset) -> Result<f64> {
    check_data(model, data)?;
    let m = model.absorb_beta();
    let log_z = m.log_partition_function()?;
    let mut x = vec![0.0; data.p()];
    let mut total = 0.0;
    for row in data.rows() {
        for (xi, &v) in x.iter_mut().zip(row) {
            *xi = f64::from(v);
        }
        total += m.exponent_f64(&x);
    }
    Ok(total - data.n() as f64 * log_z)
}

/// Sum over rows of `ln Pr(x_i | x_rest)`.
pub fn node_conditional_loglik(model: &IsingModel, data: &BinaryDataset, i: usize) -> Result<f64> {
    check_data(model, data)?;
    check_node(i, data.p())?;
    let mut x = vec![0.0; data.p()];
    let mut total = 0.0;
    for row in data.rows() {
        for (xi, &v) in x.iter_mut().zip(row) {
            *xi = f64::from(v);
        }
        let eta = model.local_field(i, &x);
        total += x[i] * eta - log_two_cosh(eta);
    }
    Ok(total)
}

/// `ln PL = sum_i L_i`.
pub fn pseudolikelihood(model: &IsingModel, data: &BinaryDataset) -> Result<f64> {
    (0..model.p()).try_fold(0.0, |acc, i| Ok(acc + node_conditional_loglik(model, data, i)?))
}

/// Gradient of `L_i` with respect to node `i`'s parameters.
///
/// `omega_row[i]` is ignored. In the returned vector entry `i` is the
/// derivative with respect to `tau_i` and entry `j != i` with respect to
/// `omega_ij`.
pub fn gradient_node_loglik(data: &BinaryDataset, i: usize, tau_i: f64, omega_row: &[f64]) -> Result<Vec<f64>> {
    check_node(i, data.p())?;
    if omega_row.len() != data.p() {
        return Err(IsingError::DimensionMismatch {
            expected: data.p(),
            found: omega_row.len(),
        });
    }
    let mut grad = vec![0.0; data.p()];
    for row in data.rows() {
        let mut eta = tau_i;
        for (j, &v) in row.iter().enumerate() {
            if j != i {
                eta += omega_row[j] * f64::from(v);
            }
        }
        let resid = f64::from(row[i]) - eta.tanh();
        for (j, g) in grad.iter_mut().enumerate() {
            *g += if j == i { resid } else { resid * f64::from(row[j]) };
        }
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn chain() -> IsingModel {
        IsingModel::from_edges(vec![-0.1; 3], &[(0, 1, 0.5), (1, 2, 0.5)]).unwrap()
    }

    fn rows(r: Vec<Vec<i8>>) -> BinaryDataset {
        BinaryDataset::from_rows(r).unwrap()
    }

    #[test]
    fn loglik_cases() {
        let one = rows(vec![vec![-1, -1, -1]]);
        assert_abs_diff_eq!(log_likelihood(&chain(), &one).unwrap(), -1.0458846676883944, epsilon = 1e-12);
        let two = rows(vec![vec![-1, -1, -1]; 2]);
        assert_eq!(
            log_likelihood(&chain(), &two).unwrap(),
            2.0 * log_likelihood(&chain(), &one).unwrap()
        );
        let zero = IsingModel::zeros(3).unwrap();
        let d = rows(vec![vec![1, -1, 1], vec![-1, -1, 1], vec![1, 1, 1]]);
        assert_abs_diff_eq!(log_likelihood(&zero, &d).unwrap(), -9.0 * 2f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(pseudolikelihood(&zero, &d).unwrap(), -9.0 * 2f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn conditional_cases() {
        let d = rows(vec![vec![1, 1, 1]]);
        assert_abs_diff_eq!(
            node_conditional_loglik(&chain(), &d, 1).unwrap(),
            -0.15297761052607417,
            epsilon = 1e-12
        );
        let low = rows(vec![vec![-1, -1, -1]]);
        assert_abs_diff_eq!(pseudolikelihood(&chain(), &low).unwrap(), -0.6316482544447581, epsilon = 1e-12);
        assert!(node_conditional_loglik(&chain(), &d, 3).is_err());
    }

    #[test]
    fn gradient_symmetry_and_additivity() {
        let d = rows(vec![vec![1, -1], vec![-1, 1]]);
        let g = gradient_node_loglik(&d, 0, 0.0, &[0.0, 0.0]).unwrap();
        assert_eq!(g[0], 0.0);
        let data = rows(vec![vec![1, -1, 1], vec![-1, -1, 1], vec![1, 1, -1]]);
        let g1 = gradient_node_loglik(&data, 2, 0.3, &[0.2, -0.4, 9.0]).unwrap();
        let g2 = gradient_node_loglik(&data.concat(&data).unwrap(), 2, 0.3, &[0.2, -0.4, 9.0]).unwrap();
        for (a, b) in g1.iter().zip(&g2) {
            assert_eq!(2.0 * a, *b);
        }
    }
}
