use rayon::prelude::*;

use super::node::{NodeDesign, NodeFit};
use super::{ebic, EbicScope, EdgeRule, FitConfig, FitMethod, FitResult, NodeSummary, Penalty, PenaltySpec};
use crate::data::BinaryDataset;
use crate::error::Result;

/// Symmetric weight matrix from node-wise rows: the edge rule decides which
/// pairs survive, surviving pairs get the mean of the two estimates.
pub fn combine_node_fits(rows: &[Vec<f64>], rule: EdgeRule) -> Vec<Vec<f64>> {
    let p = rows.len();
    let mut omega = vec![vec![0.0; p]; p];
    for i in 0..p {
        for j in (i + 1)..p {
            let (a, b) = (rows[i][j], rows[j][i]);
            let keep = match rule {
                EdgeRule::And => a != 0.0 && b != 0.0,
                EdgeRule::Or => a != 0.0 || b != 0.0,
            };
            if keep {
                let w = 0.5 * (a + b);
                omega[i][j] = w;
                omega[j][i] = w;
            }
        }
    }
    omega
}

struct Selected {
    fit: NodeFit,
    penalty: Penalty,
    ebic: Option<f64>,
}

/// Fits along `lambdas` sorted descending with warm starts.
fn path(design: &NodeDesign, alpha: f64, lambdas: &[f64], cfg: &FitConfig) -> Result<Vec<NodeFit>> {
    let opts = cfg.solver_options();
    let mut fits: Vec<NodeFit> = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let fit = design.fit(&Penalty::new(lambda, alpha)?, &opts, fits.last())?;
        fits.push(fit);
    }
    Ok(fits)
}

fn descending(lambdas: &[f64]) -> Vec<f64> {
    let mut l = lambdas.to_vec();
    l.sort_by(|a, b| b.partial_cmp(a).expect("finite lambda"));
    l.dedup();
    l
}

/// Disjoint pseudolikelihood: one penalised logistic regression per node,
/// tuned per node by EBIC when a lambda grid is given, then symmetrised.
pub fn fit_disjoint(data: &BinaryDataset, cfg: &FitConfig) -> Result<FitResult> {
    cfg.validate()?;
    let p = data.p();
    let n = data.n();
    let selected: Vec<Selected> = match (&cfg.penalty, cfg.ebic_scope) {
        (PenaltySpec::Fixed(penalty), _) => (0..p)
            .into_par_iter()
            .map(|i| {
                let design = NodeDesign::with_config(data, i, cfg.standardize)?;
                let fit = design.fit(penalty, &cfg.solver_options(), None)?;
                let e = ebic(design.loglik(&fit), fit.nonzero(), n, p, cfg.ebic_gamma);
                Ok(Selected {
                    fit,
                    penalty: *penalty,
                    ebic: Some(e),
                })
            })
            .collect::<Vec<Result<_>>>()
            .into_iter()
            .enumerate()
            .map(|(i, r)| r.map_err(|e| e.at_node(i)))
            .collect::<Result<_>>()?,
        (PenaltySpec::Grid { alpha, lambdas }, EbicScope::Node) => {
            let lambdas = descending(lambdas);
            (0..p)
                .into_par_iter()
                .map(|i| {
                    let design = NodeDesign::with_config(data, i, cfg.standardize)?;
                    let fits = path(&design, *alpha, &lambdas, cfg)?;
                    let mut best: Option<(usize, f64)> = None;
                    for (k, fit) in fits.iter().enumerate() {
                        let e = ebic(design.loglik(fit), fit.nonzero(), n, p, cfg.ebic_gamma);
                        // later entries have smaller lambda and win ties
                        if best.is_none_or(|(_, b)| e <= b) {
                            best = Some((k, e));
                        }
                    }
                    let (k, e) = best.expect("non-empty grid");
                    Ok(Selected {
                        fit: fits[k].clone(),
                        penalty: Penalty::new(lambdas[k], *alpha)?,
                        ebic: Some(e),
                    })
                })
                .collect::<Vec<Result<_>>>()
                .into_iter()
                .enumerate()
                .map(|(i, r)| r.map_err(|e| e.at_node(i)))
                .collect::<Result<_>>()?
        }
        (PenaltySpec::Grid { alpha, lambdas }, EbicScope::Global) => {
            let lambdas = descending(lambdas);
            let paths: Vec<(NodeDesign, Vec<NodeFit>)> = (0..p)
                .into_par_iter()
                .map(|i| {
                    let design = NodeDesign::with_config(data, i, cfg.standardize)?;
                    let fits = path(&design, *alpha, &lambdas, cfg)?;
                    Ok((design, fits))
                })
                .collect::<Vec<Result<_>>>()
                .into_iter()
                .enumerate()
                .map(|(i, r)| r.map_err(|e| e.at_node(i)))
                .collect::<Result<_>>()?;
            let candidates = (p * p.saturating_sub(1) / 2).max(1) as f64;
            let mut best: Option<(usize, f64)> = None;
            for k in 0..lambdas.len() {
                let rows: Vec<Vec<f64>> = paths.iter().map(|(_, f)| f[k].omega.clone()).collect();
                let omega = combine_node_fits(&rows, cfg.edge_rule);
                let edges = (0..p)
                    .flat_map(|i| ((i + 1)..p).map(move |j| (i, j)))
                    .filter(|&(i, j)| omega[i][j] != 0.0)
                    .count() as f64;
                let pl: f64 = paths.iter().map(|(d, f)| d.loglik(&f[k])).sum();
                let e = -2.0 * pl + edges * (n as f64).ln() + 2.0 * cfg.ebic_gamma * edges * candidates.ln();
                if best.is_none_or(|(_, b)| e <= b) {
                    best = Some((k, e));
                }
            }
            let (k, e) = best.expect("non-empty grid");
            paths
                .iter()
                .map(|(_, f)| {
                    Ok(Selected {
                        fit: f[k].clone(),
                        penalty: Penalty::new(lambdas[k], *alpha)?,
                        ebic: Some(e),
                    })
                })
                .collect::<Result<_>>()?
        }
    };

    let rows: Vec<Vec<f64>> = selected.iter().map(|s| s.fit.omega.clone()).collect();
    let omega_hat = combine_node_fits(&rows, cfg.edge_rule);
    let per_node: Vec<NodeSummary> = selected
        .into_iter()
        .enumerate()
        .map(|(i, s)| NodeSummary {
            node: i,
            tau: s.fit.tau,
            omega: s.fit.omega,
            lambda: s.penalty.lambda,
            alpha: s.penalty.alpha,
            ebic: s.ebic,
            iterations: s.fit.iterations,
            converged: s.fit.converged,
            degenerate: s.fit.degenerate,
        })
        .collect();
    Ok(FitResult {
        method: FitMethod::DisjointPl,
        edge_rule: Some(cfg.edge_rule),
        tau_hat: per_node.iter().map(|s| s.tau).collect(),
        omega_hat,
        iterations: per_node.iter().map(|s| s.iterations).max().unwrap_or(0),
        converged: per_node.iter().all(|s| s.converged),
        per_node,
        config: cfg.clone(),
    })
}
