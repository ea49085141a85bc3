//! K-fold cross-validation over an `(alpha, lambda)` grid.
//!
//! For every fold and node the training rows are fitted along the lambda path
//! (descending, warm-started) for each alpha. Held-out responses are predicted
//! from the node's own regression and scored by the squared difference
//! between the predicted probability of `+1` and the response coded `{0, 1}`.

use std::io::Write;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::node::{NodeDesign, NodeFit};
use super::{FitConfig, Penalty};
use crate::data::BinaryDataset;
use crate::error::{IsingError, Result};
use crate::model::spin_up_probability;
use crate::rng::{stream_rng, STREAM_FOLDS};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvSurface {
    pub lambda_grid: Vec<f64>,
    pub alpha_grid: Vec<f64>,
    /// `accuracy[a][l]`: negative mean squared prediction error at
    /// `alpha_grid[a]`, `lambda_grid[l]`, averaged over folds.
    pub accuracy: Vec<Vec<f64>>,
    pub best_alpha: f64,
    pub best_lambda: f64,
    pub best_index: (usize, usize),
    pub folds: usize,
}

impl CvSurface {
    pub fn best_accuracy(&self) -> f64 {
        self.accuracy[self.best_index.0][self.best_index.1]
    }

    /// Accuracy of every alpha at lambda index `l`.
    pub fn lambda_column(&self, l: usize) -> Vec<f64> {
        self.accuracy.iter().map(|row| row[l]).collect()
    }
}

/// Fold label of every row: a seeded shuffle dealt round-robin into `k` folds.
pub fn fold_assignment(n: usize, k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(IsingError::InvalidConfig(format!("need at least 2 folds, got {k}")));
    }
    if k > n {
        return Err(IsingError::InvalidConfig(format!(
            "{k} folds requested for {n} observations"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut stream_rng(seed, STREAM_FOLDS));
    let mut fold = vec![0; n];
    for (pos, &row) in order.iter().enumerate() {
        fold[row] = pos % k;
    }
    Ok(fold)
}

fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(IsingError::InvalidConfig(format!("{name} grid is empty")));
    }
    Ok(())
}

/// Squared prediction errors summed over the test rows, one per grid cell
/// (`alpha` major, lambda in grid order).
fn node_task(
    train: &BinaryDataset,
    test: &BinaryDataset,
    node: usize,
    lambda_grid: &[f64],
    alpha_grid: &[f64],
    cfg: &FitConfig,
) -> Result<Vec<f64>> {
    let design = NodeDesign::with_config(train, node, cfg.standardize)?;
    let opts = cfg.solver_options();
    let mut order: Vec<usize> = (0..lambda_grid.len()).collect();
    order.sort_by(|&a, &b| lambda_grid[b].partial_cmp(&lambda_grid[a]).expect("finite lambda"));
    let mut sse = vec![0.0; alpha_grid.len() * lambda_grid.len()];
    for (a, &alpha) in alpha_grid.iter().enumerate() {
        let mut warm: Option<NodeFit> = None;
        for &l in &order {
            let fit = design.fit(&Penalty::new(lambda_grid[l], alpha)?, &opts, warm.as_ref())?;
            let mut err = 0.0;
            for row in test.rows() {
                let prob = spin_up_probability(fit.eta(row));
                let observed = if row[node] > 0 { 1.0 } else { 0.0 };
                err += (prob - observed) * (prob - observed);
            }
            sse[a * lambda_grid.len() + l] = err;
            warm = Some(fit);
        }
    }
    Ok(sse)
}

pub fn cross_validate(
    data: &BinaryDataset,
    lambda_grid: &[f64],
    alpha_grid: &[f64],
    cfg: &FitConfig,
) -> Result<CvSurface> {
    cfg.validate()?;
    check_grid("lambda", lambda_grid)?;
    check_grid("alpha", alpha_grid)?;
    for &l in lambda_grid {
        for &a in alpha_grid {
            Penalty::new(l, a)?;
        }
    }
    let k = cfg.cv_folds;
    let fold = fold_assignment(data.n(), k, cfg.seed)?;
    let p = data.p();
    let splits: Vec<(BinaryDataset, BinaryDataset)> = (0..k)
        .map(|f| {
            let train: Vec<usize> = (0..data.n()).filter(|&r| fold[r] != f).collect();
            let test: Vec<usize> = (0..data.n()).filter(|&r| fold[r] == f).collect();
            Ok((data.select_rows(&train)?, data.select_rows(&test)?))
        })
        .collect::<Result<_>>()?;

    let tasks: Vec<(usize, usize)> = (0..k).flat_map(|f| (0..p).map(move |i| (f, i))).collect();
    let results: Vec<Vec<f64>> = tasks
        .par_iter()
        .map(|&(f, i)| {
            let (train, test) = &splits[f];
            node_task(train, test, i, lambda_grid, alpha_grid, cfg)
                .map_err(|e| e.at_node(i).context(format!("fold {}", f + 1)))
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<_>>()?;

    let cells = alpha_grid.len() * lambda_grid.len();
    let mut mean_mse = vec![0.0; cells];
    for f in 0..k {
        let mut fold_sse = vec![0.0; cells];
        for i in 0..p {
            for (acc, v) in fold_sse.iter_mut().zip(&results[f * p + i]) {
                *acc += v;
            }
        }
        let denom = (splits[f].1.n() * p) as f64;
        for (m, s) in mean_mse.iter_mut().zip(&fold_sse) {
            *m += s / denom / k as f64;
        }
    }

    let accuracy: Vec<Vec<f64>> = mean_mse
        .chunks_exact(lambda_grid.len())
        .map(|row| row.iter().map(|m| -m).collect())
        .collect();
    let mut best_index = (0, 0);
    let mut best = f64::NEG_INFINITY;
    for (a, row) in accuracy.iter().enumerate() {
        for (l, &v) in row.iter().enumerate() {
            if v > best {
                best = v;
                best_index = (a, l);
            }
        }
    }
    Ok(CvSurface {
        lambda_grid: lambda_grid.to_vec(),
        alpha_grid: alpha_grid.to_vec(),
        best_alpha: alpha_grid[best_index.0],
        best_lambda: lambda_grid[best_index.1],
        best_index,
        accuracy,
        folds: k,
    })
}

/// Long format `alpha,lambda,fold_mean_accuracy`, alpha major.
pub fn write_cv_csv<W: Write>(surface: &CvSurface, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["alpha", "lambda", "fold_mean_accuracy"])?;
    for (a, row) in surface.accuracy.iter().enumerate() {
        for (l, v) in row.iter().enumerate() {
            wtr.write_record([
                surface.alpha_grid[a].to_string(),
                surface.lambda_grid[l].to_string(),
                v.to_string(),
            ])?;
        }
    }
    wtr.flush()?;
    Ok(())
}
