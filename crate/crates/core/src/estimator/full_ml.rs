//! Maximum likelihood by exact enumeration.
//!
//! The mean negative log-likelihood `ln Z(theta) - theta' m` has gradient
//! `E[s] - m` and Hessian `Cov[s]`, where `s` are the sufficient statistics
//! (`x_i` and `x_i x_j`) and `m` their sample means.

use super::solver::{minimize, ElasticNet, SmoothObjective};
use super::{check_fittable, joint_result, pair_list, FitConfig, FitMethod, FitResult};
use crate::data::BinaryDataset;
use crate::error::{IsingError, Result};

struct FullMlObjective {
    p: usize,
    pairs: Vec<(usize, usize)>,
    means: Vec<f64>,
    /// Sufficient statistics of every state, row-major `2^P x dim`.
    stats: Vec<f64>,
}

impl FullMlObjective {
    fn new(data: &BinaryDataset) -> Self {
        let p = data.p();
        let pairs = pair_list(p);
        let dim = p + pairs.len();
        let stat = |x: &dyn Fn(usize) -> f64, out: &mut Vec<f64>| {
            for i in 0..p {
                out.push(x(i));
            }
            for &(i, j) in &pairs {
                out.push(x(i) * x(j));
            }
        };
        let mut stats = Vec::with_capacity((1 << p) * dim);
        for s in 0..1usize << p {
            stat(&|i| if (s >> i) & 1 == 1 { 1.0 } else { -1.0 }, &mut stats);
        }
        let mut means = vec![0.0; dim];
        let mut row_stats = Vec::with_capacity(dim);
        for row in data.rows() {
            row_stats.clear();
            stat(&|i| f64::from(row[i]), &mut row_stats);
            for (m, v) in means.iter_mut().zip(&row_stats) {
                *m += v;
            }
        }
        let n = data.n() as f64;
        means.iter_mut().for_each(|m| *m /= n);
        Self { p, pairs, means, stats }
    }

    fn log_weights(&self, theta: &[f64]) -> (Vec<f64>, f64) {
        let dim = self.dim();
        let lw: Vec<f64> = self
            .stats
            .chunks_exact(dim)
            .map(|s| s.iter().zip(theta).map(|(a, b)| a * b).sum())
            .collect();
        let max = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let log_z = max + lw.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        (lw, log_z)
    }

    fn linear_term(&self, theta: &[f64]) -> f64 {
        self.means.iter().zip(theta).map(|(a, b)| a * b).sum()
    }
}

impl SmoothObjective for FullMlObjective {
    fn dim(&self) -> usize {
        self.p + self.pairs.len()
    }

    fn value(&self, theta: &[f64]) -> f64 {
        self.log_weights(theta).1 - self.linear_term(theta)
    }

    fn evaluate(&self, theta: &[f64], grad: &mut [f64], hess: &mut [f64]) -> f64 {
        let dim = self.dim();
        let (lw, log_z) = self.log_weights(theta);
        let mut mean = vec![0.0; dim];
        hess.iter_mut().for_each(|h| *h = 0.0);
        for (s, &l) in self.stats.chunks_exact(dim).zip(&lw) {
            let w = (l - log_z).exp();
            for a in 0..dim {
                mean[a] += w * s[a];
                let wa = w * s[a];
                for b in a..dim {
                    hess[a * dim + b] += wa * s[b];
                }
            }
        }
        for a in 0..dim {
            grad[a] = mean[a] - self.means[a];
            for b in a..dim {
                let v = hess[a * dim + b] - mean[a] * mean[b];
                hess[a * dim + b] = v;
                hess[b * dim + a] = v;
            }
        }
        log_z - self.linear_term(theta)
    }
}

/// Maximum likelihood estimate, optionally elastic-net penalised on the weights.
pub fn fit_full_ml(data: &BinaryDataset, cfg: &FitConfig) -> Result<FitResult> {
    cfg.validate()?;
    let p = data.p();
    if p > cfg.full_ml_max_nodes {
        return Err(IsingError::InvalidConfig(format!(
            "full maximum likelihood is limited to {} nodes, data has {p}",
            cfg.full_ml_max_nodes
        )));
    }
    let penalty = cfg.fixed_penalty()?;
    check_fittable(data, penalty.lambda)?;
    let objective = FullMlObjective::new(data);
    let dim = objective.dim();
    let mask: Vec<bool> = (0..dim).map(|k| k >= p).collect();
    let pen = ElasticNet {
        lambda: penalty.lambda,
        alpha: penalty.alpha,
        penalized: &mask,
    };
    let mut theta = vec![0.0; dim];
    for (t, m) in theta.iter_mut().zip(&objective.means[..p]) {
        *t = m.atanh();
    }
    let out = minimize(&objective, &pen, &mut theta, &cfg.solver_options());
    if !out.converged {
        log::warn!("full maximum likelihood did not converge in {} iterations", out.iterations);
    }
    Ok(joint_result(
        FitMethod::FullMl,
        &theta,
        p,
        penalty,
        out.iterations,
        out.converged,
        cfg,
    ))
}
