//! Joint pseudolikelihood: all node conditionals in one optimisation with
//! `omega_ij = omega_ji` tied.

use super::solver::{minimize, ElasticNet, SmoothObjective};
use super::{check_fittable, joint_result, pair_list, FitConfig, FitMethod, FitResult};
use crate::data::BinaryDataset;
use crate::error::Result;
use crate::model::log_two_cosh;

struct JointPlObjective {
    p: usize,
    n: usize,
    x: Vec<f64>,
    /// `pair_index[i * p + j]` is the parameter slot of `omega_ij`.
    pair_index: Vec<usize>,
    n_pairs: usize,
}

impl JointPlObjective {
    fn new(data: &BinaryDataset) -> Self {
        let p = data.p();
        let pairs = pair_list(p);
        let mut pair_index = vec![usize::MAX; p * p];
        for (k, &(i, j)) in pairs.iter().enumerate() {
            pair_index[i * p + j] = p + k;
            pair_index[j * p + i] = p + k;
        }
        Self {
            p,
            n: data.n(),
            x: data.rows().flat_map(|r| r.iter().map(|&v| f64::from(v))).collect(),
            pair_index,
            n_pairs: pairs.len(),
        }
    }

    fn eta(&self, row: &[f64], i: usize, theta: &[f64]) -> f64 {
        let mut eta = theta[i];
        for (j, &xj) in row.iter().enumerate() {
            if j != i {
                eta += theta[self.pair_index[i * self.p + j]] * xj;
            }
        }
        eta
    }
}

impl SmoothObjective for JointPlObjective {
    fn dim(&self) -> usize {
        self.p + self.n_pairs
    }

    fn value(&self, theta: &[f64]) -> f64 {
        let mut total = 0.0;
        for row in self.x.chunks_exact(self.p) {
            for i in 0..self.p {
                let eta = self.eta(row, i, theta);
                total += log_two_cosh(eta) - row[i] * eta;
            }
        }
        total / self.n as f64
    }

    fn evaluate(&self, theta: &[f64], grad: &mut [f64], hess: &mut [f64]) -> f64 {
        let p = self.p;
        let dim = self.dim();
        grad.iter_mut().for_each(|g| *g = 0.0);
        hess.iter_mut().for_each(|h| *h = 0.0);
        // sparse derivative of eta_i: slot i with 1, pair slots with x_j
        let mut slots = vec![0usize; p];
        let mut coef = vec![0.0; p];
        let mut total = 0.0;
        for row in self.x.chunks_exact(p) {
            for i in 0..p {
                let eta = self.eta(row, i, theta);
                total += log_two_cosh(eta) - row[i] * eta;
                let t = eta.tanh();
                let resid = t - row[i];
                let w = 1.0 - t * t;
                for j in 0..p {
                    if j == i {
                        slots[j] = i;
                        coef[j] = 1.0;
                    } else {
                        slots[j] = self.pair_index[i * p + j];
                        coef[j] = row[j];
                    }
                }
                for a in 0..p {
                    grad[slots[a]] += resid * coef[a];
                    let wa = w * coef[a];
                    for b in 0..p {
                        hess[slots[a] * dim + slots[b]] += wa * coef[b];
                    }
                }
            }
        }
        let inv_n = 1.0 / self.n as f64;
        grad.iter_mut().for_each(|g| *g *= inv_n);
        hess.iter_mut().for_each(|h| *h *= inv_n);
        total * inv_n
    }
}

/// Maximum pseudolikelihood estimate with tied weights, optionally penalised.
pub fn fit_joint_pl(data: &BinaryDataset, cfg: &FitConfig) -> Result<FitResult> {
    cfg.validate()?;
    let penalty = cfg.fixed_penalty()?;
    check_fittable(data, penalty.lambda)?;
    let p = data.p();
    let objective = JointPlObjective::new(data);
    let dim = objective.dim();
    let mask: Vec<bool> = (0..dim).map(|k| k >= p).collect();
    let pen = ElasticNet {
        lambda: penalty.lambda,
        alpha: penalty.alpha,
        penalized: &mask,
    };
    let mut theta = vec![0.0; dim];
    let n = data.n() as f64;
    for (i, &count) in data.positive_counts().iter().enumerate() {
        theta[i] = (2.0 * count as f64 / n - 1.0).clamp(-0.999, 0.999).atanh();
    }
    let out = minimize(&objective, &pen, &mut theta, &cfg.solver_options());
    if !out.converged {
        log::warn!("joint pseudolikelihood did not converge in {} iterations", out.iterations);
    }
    Ok(joint_result(
        FitMethod::JointPl,
        &theta,
        p,
        penalty,
        out.iterations,
        out.converged,
        cfg,
    ))
}
