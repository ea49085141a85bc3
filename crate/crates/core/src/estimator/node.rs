//! Penalised logistic regression of one node on all others.
//!
//! The objective minimised is the mean negative conditional log-likelihood
//! plus the elastic-net penalty on the slopes,
//!
//! ```text
//! (1/N) sum_r [ln 2cosh(eta_r) - y_r eta_r] + lambda sum_j [(1-alpha) w_j^2 / 2 + alpha |w_j|]
//! ```
//!
//! with `eta_r = tau + sum_j w_j x_rj`.

use serde::{Deserialize, Serialize};

use super::solver::{minimize, ElasticNet, SmoothObjective, SolverOptions};
use super::Penalty;
use crate::data::BinaryDataset;
use crate::error::{IsingError, Result};
use crate::model::log_two_cosh;

/// Response and predictors of one node, reused across penalties.
#[derive(Clone, Debug)]
pub struct NodeDesign {
    node: usize,
    p: usize,
    n: usize,
    y: Vec<f64>,
    /// Row-major `n x p`: a leading one, then the other nodes in index order,
    /// each multiplied by its entry of `scale`.
    x: Vec<f64>,
    scale: Vec<f64>,
    mask: Vec<bool>,
    n_pos: usize,
}

/// Estimates for one node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeFit {
    pub tau: f64,
    /// Length `P`, zero at the node itself.
    pub omega: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Constant response under a positive penalty: slopes are zero and the
    /// threshold is a smoothed log-odds.
    #[serde(default)]
    pub degenerate: bool,
}

impl NodeFit {
    pub fn nonzero(&self) -> usize {
        self.omega.iter().filter(|&&w| w != 0.0).count()
    }

    /// Natural parameter for a full `+-1` row.
    pub fn eta(&self, row: &[i8]) -> f64 {
        self.tau
            + self
                .omega
                .iter()
                .zip(row)
                .map(|(w, &v)| w * f64::from(v))
                .sum::<f64>()
    }
}

impl NodeDesign {
    pub fn new(data: &BinaryDataset, node: usize) -> Result<Self> {
        Self::build(data, node, false)
    }

    /// Predictors rescaled by `1 / (2 sd)`, so that the penalty acts on the
    /// slopes of unit-variance 0/1 predictors. Estimates are reported on the
    /// original scale.
    pub fn standardized(data: &BinaryDataset, node: usize) -> Result<Self> {
        Self::build(data, node, true)
    }

    pub(crate) fn with_config(data: &BinaryDataset, node: usize, standardize: bool) -> Result<Self> {
        Self::build(data, node, standardize)
    }

    fn build(data: &BinaryDataset, node: usize, standardize: bool) -> Result<Self> {
        let p = data.p();
        if node >= p {
            return Err(IsingError::IndexOutOfRange { index: node, p });
        }
        let n = data.n();
        let mut y = Vec::with_capacity(n);
        let mut x = Vec::with_capacity(n * p);
        for row in data.rows() {
            y.push(f64::from(row[node]));
            x.push(1.0);
            x.extend(
                row.iter()
                    .enumerate()
                    .filter(|&(j, _)| j != node)
                    .map(|(_, &v)| f64::from(v)),
            );
        }
        let n_pos = y.iter().filter(|&&v| v > 0.0).count();
        let mut scale = vec![1.0; p];
        if standardize {
            for (k, s) in scale.iter_mut().enumerate().skip(1) {
                let mean = (0..n).map(|r| x[r * p + k]).sum::<f64>() / n as f64;
                let sd = (1.0 - mean * mean).max(0.0).sqrt();
                if sd > 0.0 {
                    *s = 0.5 / sd;
                }
            }
            for row in x.chunks_exact_mut(p) {
                for (v, s) in row.iter_mut().zip(&scale) {
                    *v *= s;
                }
            }
        }
        let mut mask = vec![true; p];
        mask[0] = false;
        Ok(Self {
            node,
            p,
            n,
            y,
            x,
            scale,
            mask,
            n_pos,
        })
    }

    pub fn node(&self) -> usize {
        self.node
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn response_constant(&self) -> bool {
        self.n_pos == 0 || self.n_pos == self.n
    }

    /// Column index (in data coordinates) of predictor slot `k >= 1`.
    fn column_of(&self, k: usize) -> usize {
        if k - 1 < self.node {
            k - 1
        } else {
            k
        }
    }

    fn constant_predictor(&self) -> Option<usize> {
        (1..self.p).find(|&k| {
            let first = self.x[k];
            (1..self.n).all(|r| self.x[r * self.p + k] == first)
        })
        .map(|k| self.column_of(k))
    }

    /// Mean log-likelihood of the response under coefficients in design order.
    fn mean_loglik(&self, beta: &[f64]) -> f64 {
        -self.value(beta)
    }

    /// Threshold of the intercept-only fit, `atanh(mean y)`.
    pub fn null_threshold(&self) -> f64 {
        0.5 * (self.n_pos as f64 / (self.n - self.n_pos) as f64).ln()
    }

    /// Smallest `lambda` at which every slope is zero for mixing `alpha`;
    /// infinite for ridge.
    pub fn lambda_max(&self, alpha: f64) -> f64 {
        if self.response_constant() {
            return 0.0;
        }
        let ybar = self.y.iter().sum::<f64>() / self.n as f64;
        let mut best = 0.0f64;
        for k in 1..self.p {
            let s: f64 = (0..self.n).map(|r| (self.y[r] - ybar) * self.x[r * self.p + k]).sum();
            best = best.max((s / self.n as f64).abs());
        }
        if alpha > 0.0 {
            best / alpha
        } else if best > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    }

    fn to_design(&self, fit: &NodeFit) -> Vec<f64> {
        let mut beta = Vec::with_capacity(self.p);
        beta.push(fit.tau);
        beta.extend(
            fit.omega
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != self.node)
                .map(|(_, &w)| w),
        );
        for (b, s) in beta.iter_mut().zip(&self.scale) {
            *b /= s;
        }
        beta
    }

    fn from_design(&self, beta: &[f64], iterations: usize, converged: bool, degenerate: bool) -> NodeFit {
        let mut omega = vec![0.0; self.p];
        for k in 1..self.p {
            omega[self.column_of(k)] = beta[k] * self.scale[k];
        }
        NodeFit {
            tau: beta[0],
            omega,
            iterations,
            converged,
            degenerate,
        }
    }

    /// Penalised fit, optionally warm-started from a previous solution.
    pub fn fit(&self, penalty: &Penalty, opts: &SolverOptions, warm: Option<&NodeFit>) -> Result<NodeFit> {
        penalty.validate()?;
        if penalty.lambda == 0.0 {
            if self.response_constant() {
                return Err(IsingError::Separation { node: self.node });
            }
            if let Some(column) = self.constant_predictor() {
                return Err(IsingError::ConstantPredictor { column });
            }
        } else if self.response_constant() {
            let pos = self.n_pos as f64 + 0.5;
            let neg = (self.n - self.n_pos) as f64 + 0.5;
            let mut beta = vec![0.0; self.p];
            beta[0] = 0.5 * (pos / neg).ln();
            return Ok(self.from_design(&beta, 0, true, true));
        }
        let mut beta = match warm {
            Some(w) if !w.degenerate => self.to_design(w),
            _ => {
                let mut b = vec![0.0; self.p];
                b[0] = self.null_threshold();
                b
            }
        };
        let pen = ElasticNet {
            lambda: penalty.lambda,
            alpha: penalty.alpha,
            penalized: &self.mask,
        };
        let out = minimize(self, &pen, &mut beta, opts);
        if !out.converged {
            log::warn!(
                "node {} did not converge in {} iterations (lambda {}, alpha {})",
                self.node + 1,
                out.iterations,
                penalty.lambda,
                penalty.alpha
            );
        }
        Ok(self.from_design(&beta, out.iterations, out.converged, false))
    }

    /// Unscaled conditional log-likelihood `L_i` of the fitted coefficients.
    pub fn loglik(&self, fit: &NodeFit) -> f64 {
        self.n as f64 * self.mean_loglik(&self.to_design(fit))
    }
}

impl SmoothObjective for NodeDesign {
    fn dim(&self) -> usize {
        self.p
    }

    fn value(&self, beta: &[f64]) -> f64 {
        let mut total = 0.0;
        for (row, &y) in self.x.chunks_exact(self.p).zip(&self.y) {
            let eta: f64 = row.iter().zip(beta).map(|(a, b)| a * b).sum();
            total += log_two_cosh(eta) - y * eta;
        }
        total / self.n as f64
    }

    fn evaluate(&self, beta: &[f64], grad: &mut [f64], hess: &mut [f64]) -> f64 {
        let p = self.p;
        grad.iter_mut().for_each(|g| *g = 0.0);
        hess.iter_mut().for_each(|h| *h = 0.0);
        let mut total = 0.0;
        for (row, &y) in self.x.chunks_exact(p).zip(&self.y) {
            let eta: f64 = row.iter().zip(beta).map(|(a, b)| a * b).sum();
            total += log_two_cosh(eta) - y * eta;
            let t = eta.tanh();
            let resid = t - y;
            let w = 1.0 - t * t;
            for a in 0..p {
                grad[a] += resid * row[a];
                let wa = w * row[a];
                let h = &mut hess[a * p..(a + 1) * p];
                for b in a..p {
                    h[b] += wa * row[b];
                }
            }
        }
        let inv_n = 1.0 / self.n as f64;
        for g in grad.iter_mut() {
            *g *= inv_n;
        }
        for a in 0..p {
            for b in a..p {
                let v = hess[a * p + b] * inv_n;
                hess[a * p + b] = v;
                hess[b * p + a] = v;
            }
        }
        total * inv_n
    }
}

/// Fits node `i` of `data` under `penalty`.
pub fn fit_node_penalized(data: &BinaryDataset, i: usize, penalty: &Penalty, opts: &SolverOptions) -> Result<NodeFit> {
    NodeDesign::new(data, i)?.fit(penalty, opts, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn data() -> BinaryDataset {
        BinaryDataset::from_rows(vec![
            vec![1, 1, -1],
            vec![1, -1, -1],
            vec![-1, -1, 1],
            vec![-1, 1, 1],
            vec![1, 1, 1],
            vec![-1, -1, -1],
            vec![1, 1, -1],
        ])
        .unwrap()
    }

    #[test]
    fn large_lambda_gives_intercept_only() {
        let d = data();
        let design = NodeDesign::new(&d, 0).unwrap();
        let lmax = design.lambda_max(1.0);
        let fit = design.fit(&Penalty::new(lmax * 1.0001, 1.0).unwrap(), &SolverOptions::default(), None).unwrap();
        assert_eq!(fit.nonzero(), 0);
        assert_abs_diff_eq!(fit.tau, 0.5 * (4.0f64 / 3.0).ln(), epsilon = 1e-9);
        let below = design.fit(&Penalty::new(lmax * 0.9, 1.0).unwrap(), &SolverOptions::default(), None).unwrap();
        assert!(below.nonzero() > 0);
    }

    #[test]
    fn separation_and_constant_handling() {
        let d = BinaryDataset::from_rows(vec![vec![1, 1], vec![1, -1], vec![1, 1]]).unwrap();
        let opts = SolverOptions::default();
        assert!(matches!(
            fit_node_penalized(&d, 0, &Penalty::new(0.0, 1.0).unwrap(), &opts),
            Err(IsingError::Separation { node: 0 })
        ));
        assert!(matches!(
            fit_node_penalized(&d, 1, &Penalty::new(0.0, 1.0).unwrap(), &opts),
            Err(IsingError::ConstantPredictor { column: 0 })
        ));
        let fit = fit_node_penalized(&d, 0, &Penalty::new(0.1, 1.0).unwrap(), &opts).unwrap();
        assert!(fit.degenerate);
        assert_eq!(fit.omega, vec![0.0, 0.0]);
        assert_abs_diff_eq!(fit.tau, 0.5 * 7f64.ln(), epsilon = 1e-12);
        let fit = fit_node_penalized(&d, 1, &Penalty::new(0.1, 0.5).unwrap(), &opts).unwrap();
        assert_eq!(fit.omega, vec![0.0, 0.0]);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let d = data();
        let design = NodeDesign::new(&d, 1).unwrap();
        let beta = [0.2, -0.3, 0.7];
        let mut g = vec![0.0; 3];
        let mut h = vec![0.0; 9];
        design.evaluate(&beta, &mut g, &mut h);
        for k in 0..3 {
            let mut up = beta;
            let mut dn = beta;
            up[k] += 1e-6;
            dn[k] -= 1e-6;
            let fd = (design.value(&up) - design.value(&dn)) / 2e-6;
            assert_abs_diff_eq!(g[k], fd, epsilon = 1e-8);
        }
    }
}
