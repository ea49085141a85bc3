//! Estimation of Ising models from `+-1` data.
//!
//! Three methods are available: full maximum likelihood for small networks,
//! joint pseudolikelihood, and disjoint per-node penalised logistic
//! regressions with EBIC or cross-validated tuning.

mod cv;
mod disjoint;
mod full_ml;
mod joint_pl;
mod likelihood;
mod node;
pub mod solver;

pub use cv::{cross_validate, fold_assignment, write_cv_csv, CvSurface};
pub use disjoint::{combine_node_fits, fit_disjoint};
pub use full_ml::fit_full_ml;
pub use joint_pl::fit_joint_pl;
pub use likelihood::{gradient_node_loglik, log_likelihood, node_conditional_loglik, pseudolikelihood};
pub use node::{fit_node_penalized, NodeDesign, NodeFit};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::data::BinaryDataset;
use crate::error::{IsingError, Result};
use crate::io::rows_matrix;
use crate::model::IsingModel;
use solver::SolverOptions;

/// Elastic-net penalty `lambda * sum [(1 - alpha) w^2 / 2 + alpha |w|]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Penalty {
    pub lambda: f64,
    /// 1 is the LASSO, 0 is ridge.
    pub alpha: f64,
}

impl Penalty {
    pub fn new(lambda: f64, alpha: f64) -> Result<Self> {
        let p = Self { lambda, alpha };
        p.validate()?;
        Ok(p)
    }

    pub fn none() -> Self {
        Self {
            lambda: 0.0,
            alpha: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(IsingError::InvalidConfig(format!(
                "lambda must be a non-negative number, got {}",
                self.lambda
            )));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(IsingError::InvalidConfig(format!(
                "alpha must lie in [0, 1], got {}",
                self.alpha
            )));
        }
        Ok(())
    }

    /// Penalty value for a vector of edge weights.
    pub fn value(&self, weights: &[f64]) -> f64 {
        self.lambda
            * weights
                .iter()
                .map(|w| 0.5 * (1.0 - self.alpha) * w * w + self.alpha * w.abs())
                .sum::<f64>()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    FullMl,
    JointPl,
    DisjointPl,
}

/// How the two node-wise estimates of an edge are combined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum EdgeRule {
    /// Keep an edge only when both regressions select it.
    #[default]
    And,
    /// Keep an edge when either regression selects it.
    Or,
}

/// What EBIC is computed over when a penalty grid is given.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EbicScope {
    /// One `lambda` per node from its conditional likelihood.
    #[default]
    Node,
    /// Experimental: one `lambda` for the whole network from `ln PL`
    /// and the total number of retained edges.
    Global,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltySpec {
    Fixed(Penalty),
    /// A `lambda` path at fixed `alpha`, tuned by EBIC.
    Grid { alpha: f64, lambdas: Vec<f64> },
}

impl PenaltySpec {
    fn validate(&self) -> Result<()> {
        match self {
            PenaltySpec::Fixed(p) => p.validate(),
            PenaltySpec::Grid { alpha, lambdas } => {
                if lambdas.is_empty() {
                    return Err(IsingError::InvalidConfig("lambda grid is empty".into()));
                }
                lambdas.iter().try_for_each(|&l| Penalty::new(l, *alpha).map(|_| ()))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub method: FitMethod,
    pub penalty: PenaltySpec,
    pub edge_rule: EdgeRule,
    pub ebic_gamma: f64,
    #[serde(default)]
    pub ebic_scope: EbicScope,
    pub max_iter: usize,
    pub tol: f64,
    pub cv_folds: usize,
    pub seed: u64,
    /// Node count above which full maximum likelihood refuses to run.
    pub full_ml_max_nodes: usize,
    /// Penalise node-wise slopes of standardised 0/1 predictors instead of
    /// the weights themselves (node-wise estimators only).
    #[serde(default)]
    pub standardize: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            method: FitMethod::DisjointPl,
            penalty: PenaltySpec::Fixed(Penalty::none()),
            edge_rule: EdgeRule::And,
            ebic_gamma: 0.25,
            ebic_scope: EbicScope::Node,
            max_iter: 10_000,
            tol: 1e-8,
            cv_folds: 10,
            seed: 0,
            full_ml_max_nodes: 10,
            standardize: false,
        }
    }
}

impl FitConfig {
    pub fn with_method(mut self, method: FitMethod) -> Self {
        self.method = method;
        self
    }

    pub fn with_penalty(mut self, penalty: Penalty) -> Self {
        self.penalty = PenaltySpec::Fixed(penalty);
        self
    }

    pub fn with_lambda_grid(mut self, alpha: f64, lambdas: Vec<f64>) -> Self {
        self.penalty = PenaltySpec::Grid { alpha, lambdas };
        self
    }

    pub fn with_edge_rule(mut self, rule: EdgeRule) -> Self {
        self.edge_rule = rule;
        self
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ebic_gamma >= 0.0) {
            return Err(IsingError::InvalidConfig(format!(
                "ebic_gamma must be non-negative, got {}",
                self.ebic_gamma
            )));
        }
        if !(self.tol > 0.0) {
            return Err(IsingError::InvalidConfig(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(IsingError::InvalidConfig("max_iter must be positive".into()));
        }
        self.penalty.validate()
    }

    fn fixed_penalty(&self) -> Result<Penalty> {
        match &self.penalty {
            PenaltySpec::Fixed(p) => Ok(*p),
            PenaltySpec::Grid { alpha, lambdas } if lambdas.len() == 1 => Penalty::new(lambdas[0], *alpha),
            PenaltySpec::Grid { .. } => Err(IsingError::InvalidConfig(format!(
                "{:?} takes a single penalty; lambda grids are tuned with disjoint_pl",
                self.method
            ))),
        }
    }
}

/// Per-node record of a fit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeSummary {
    pub node: usize,
    /// Raw threshold and weight row before symmetrisation.
    pub tau: f64,
    pub omega: Vec<f64>,
    pub lambda: f64,
    pub alpha: f64,
    pub ebic: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    #[serde(default)]
    pub degenerate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub method: FitMethod,
    pub edge_rule: Option<EdgeRule>,
    pub tau_hat: Vec<f64>,
    pub omega_hat: Vec<Vec<f64>>,
    pub per_node: Vec<NodeSummary>,
    pub iterations: usize,
    pub converged: bool,
    pub config: FitConfig,
}

impl FitResult {
    pub fn p(&self) -> usize {
        self.tau_hat.len()
    }

    pub fn omega_matrix(&self) -> DMatrix<f64> {
        rows_matrix(&self.omega_hat, self.p(), self.p()).expect("square omega_hat")
    }

    pub fn model(&self) -> Result<IsingModel> {
        IsingModel::new(self.tau_hat.clone(), self.omega_matrix(), 1.0)
    }

    /// Number of non-zero edges `i < j`.
    pub fn edge_count(&self) -> usize {
        let p = self.p();
        (0..p)
            .flat_map(|i| ((i + 1)..p).map(move |j| (i, j)))
            .filter(|&(i, j)| self.omega_hat[i][j] != 0.0)
            .count()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let p = self.p();
        (0..p)
            .flat_map(|i| ((i + 1)..p).map(move |j| (i, j)))
            .filter(|&(i, j)| self.omega_hat[i][j] != 0.0)
            .collect()
    }
}

/// Runs the estimator selected by `cfg.method`.
pub fn fit(data: &BinaryDataset, cfg: &FitConfig) -> Result<FitResult> {
    match cfg.method {
        FitMethod::FullMl => fit_full_ml(data, cfg),
        FitMethod::JointPl => fit_joint_pl(data, cfg),
        FitMethod::DisjointPl => fit_disjoint(data, cfg),
    }
}

/// `-2 L + df ln N + 2 gamma df ln(k - 1)` for a node regression with `df`
/// non-zero weights among `k - 1` candidates.
pub fn ebic(loglik: f64, df: usize, n: usize, p_nodes: usize, gamma: f64) -> f64 {
    let mut value = -2.0 * loglik;
    if df > 0 {
        let df = df as f64;
        value += df * (n as f64).ln();
        if p_nodes > 1 {
            value += 2.0 * gamma * df * ((p_nodes - 1) as f64).ln();
        }
    }
    value
}

/// `count` values spaced evenly on the log scale from `lo` to `hi` inclusive.
pub fn log_spaced_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo) || count == 0 {
        return Err(IsingError::InvalidConfig(format!(
            "log grid needs 0 < lo <= hi and count >= 1, got [{lo}, {hi}] x {count}"
        )));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / (count - 1) as f64;
    Ok((0..count)
        .map(|k| match k {
            0 => lo,
            _ if k == count - 1 => hi,
            _ => (a + step * k as f64).exp(),
        })
        .collect())
}

/// `count` values spaced evenly from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(hi >= lo) || count == 0 {
        return Err(IsingError::InvalidConfig(format!(
            "linear grid needs lo <= hi and count >= 1, got [{lo}, {hi}] x {count}"
        )));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let step = (hi - lo) / (count - 1) as f64;
    Ok((0..count)
        .map(|k| if k == count - 1 { hi } else { lo + step * k as f64 })
        .collect())
}

/// 100 log-spaced values in `[0.001, 1]`.
pub fn default_lambda_grid() -> Vec<f64> {
    log_spaced_grid(0.001, 1.0, 100).expect("valid default grid")
}

/// 100 evenly spaced values in `[0, 1]`.
pub fn default_alpha_grid() -> Vec<f64> {
    linear_grid(0.0, 1.0, 100).expect("valid default grid")
}

/// Converts a 0/1-coded logistic regression (`logit Pr(u_i = 1) = b0 + b'u`)
/// to the `+-1` threshold and weights of the same conditional.
pub fn pm_from_zero_one(b0: f64, b: &[f64]) -> (f64, Vec<f64>) {
    let tau = 0.5 * b0 + 0.25 * b.iter().sum::<f64>();
    (tau, b.iter().map(|v| 0.25 * v).collect())
}

/// Inverse of [`pm_from_zero_one`]: `b0 = 2 tau - 2 sum omega`, `b = 4 omega`.
pub fn zero_one_from_pm(tau: f64, omega: &[f64]) -> (f64, Vec<f64>) {
    let b0 = 2.0 * tau - 2.0 * omega.iter().sum::<f64>();
    (b0, omega.iter().map(|w| 4.0 * w).collect())
}

pub(crate) fn check_fittable(data: &BinaryDataset, lambda: f64) -> Result<()> {
    if lambda == 0.0 {
        if let Some(&node) = data.constant_columns().first() {
            return Err(IsingError::Separation { node });
        }
    }
    Ok(())
}

/// Index of pair `(i, j)`, `i < j`, in the upper-triangle layout used by the
/// joint estimators (parameters are `tau_0..tau_{P-1}` followed by the pairs).
pub(crate) fn pair_list(p: usize) -> Vec<(usize, usize)> {
    (0..p).flat_map(|i| ((i + 1)..p).map(move |j| (i, j))).collect()
}

pub(crate) fn joint_result(
    method: FitMethod,
    theta: &[f64],
    p: usize,
    penalty: Penalty,
    iterations: usize,
    converged: bool,
    cfg: &FitConfig,
) -> FitResult {
    let mut omega = vec![vec![0.0; p]; p];
    for (k, &(i, j)) in pair_list(p).iter().enumerate() {
        omega[i][j] = theta[p + k];
        omega[j][i] = theta[p + k];
    }
    let tau = theta[..p].to_vec();
    let per_node = (0..p)
        .map(|i| NodeSummary {
            node: i,
            tau: tau[i],
            omega: omega[i].clone(),
            lambda: penalty.lambda,
            alpha: penalty.alpha,
            ebic: None,
            iterations,
            converged,
            degenerate: false,
        })
        .collect();
    FitResult {
        method,
        edge_rule: None,
        tau_hat: tau,
        omega_hat: omega,
        per_node,
        iterations,
        converged,
        config: cfg.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ebic_arithmetic() {
        assert_abs_diff_eq!(ebic(-100.0, 3, 500, 10, 0.25), 221.9396611612709, epsilon = 1e-10);
        assert_eq!(ebic(-100.0, 0, 500, 10, 0.25), 200.0);
        assert_abs_diff_eq!(ebic(-100.0, 3, 500, 10, 0.0), 200.0 + 3.0 * 500f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn grids() {
        let l = default_lambda_grid();
        assert_eq!(l.len(), 100);
        assert_eq!(l[0], 0.001);
        assert_eq!(l[99], 1.0);
        assert!(l.windows(2).all(|w| w[0] < w[1]));
        assert_abs_diff_eq!(l[1] / l[0], l[99] / l[98], epsilon = 1e-10);
        let a = default_alpha_grid();
        assert_eq!((a[0], a[99]), (0.0, 1.0));
        assert_abs_diff_eq!(a[1], 1.0 / 99.0, epsilon = 1e-15);
        assert!(log_spaced_grid(0.0, 1.0, 5).is_err());
    }

    #[test]
    fn coding_conversion() {
        // logistic(b0 + b'u) must equal Pr(x_i = +1) = logistic(2 eta)
        let (b0, b) = (-0.7, vec![1.2, -0.4, 0.9]);
        let (tau, omega) = pm_from_zero_one(b0, &b);
        for s in 0..8usize {
            let u: Vec<f64> = (0..3).map(|k| ((s >> k) & 1) as f64).collect();
            let lin = b0 + b.iter().zip(&u).map(|(x, y)| x * y).sum::<f64>();
            let eta = tau + omega.iter().zip(&u).map(|(w, v)| w * (2.0 * v - 1.0)).sum::<f64>();
            assert_abs_diff_eq!(lin, 2.0 * eta, epsilon = 1e-12);
        }
        let (b0b, bb) = zero_one_from_pm(tau, &omega);
        assert_abs_diff_eq!(b0b, b0, epsilon = 1e-12);
        for (x, y) in bb.iter().zip(&b) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = FitConfig::default().with_lambda_grid(1.0, vec![0.1, 0.01]);
        let s = serde_json::to_string(&cfg).unwrap();
        assert!(s.contains("\"AND\""));
        let back: FitConfig = serde_json::from_str(&s).unwrap();
        assert_eq!(back, cfg);
        assert!(Penalty::new(-1.0, 0.5).is_err());
        assert!(Penalty::new(0.1, 1.5).is_err());
    }
}
