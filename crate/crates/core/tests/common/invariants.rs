//! Structural invariants checked on randomised inputs.

use super::{random_model, rng};
use isingnet::bridge::{ising_to_mirt, ising_to_mirt_with_shift, mirt_marginal_all, mirt_to_ising, DEFAULT_RANK_TOL};
use isingnet::estimator::{fit_disjoint, EdgeRule, FitConfig, Penalty};
use isingnet::sampler::{sample, SamplerConfig};
use isingnet::{BinaryState, IsingModel};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::seq::SliceRandom;

fn permuted_model(model: &IsingModel, order: &[usize]) -> IsingModel {
    let p = model.p();
    let tau = order.iter().map(|&k| model.tau()[k]).collect();
    let omega = DMatrix::from_fn(p, p, |i, j| model.weight(order[i], order[j]));
    IsingModel::new(tau, omega, model.beta()).unwrap()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn estimates_are_symmetric_with_zero_diagonal(seed: u64, p: usize, or: bool) -> Result<(), TestCaseError> {
    let mut r = rng(seed);
    let data = sample(&random_model(&mut r, p, 0.8), &SamplerConfig::exact(120, seed)).unwrap();
    let rule = if or { EdgeRule::Or } else { EdgeRule::And };
    let cfg = FitConfig::default().with_penalty(Penalty::new(0.05, 0.7).unwrap()).with_edge_rule(rule);
    let result = fit_disjoint(&data, &cfg).unwrap();
    for i in 0..p {
        prop_assert_eq!(result.omega_hat[i][i], 0.0);
        for j in 0..p {
            prop_assert_eq!(result.omega_hat[i][j], result.omega_hat[j][i]);
        }
    }
    let model = result.model().unwrap();
    let (tau01, omega01) = model.to_zero_one();
    let back = IsingModel::from_zero_one(&tau01, &omega01).unwrap();
    prop_assert!(back.omega().iter().zip(model.omega().iter()).all(|(a, b)| (a - b).abs() < 1e-12));
    prop_assert!((0..p).all(|i| back.omega()[(i, i)] == 0.0));
    Ok(())
}

pub fn relabelling_nodes_relabels_everything(seed: u64, p: usize) -> Result<(), TestCaseError> {
    let mut r = rng(seed);
    let model = random_model(&mut r, p, 1.0);
    let mut order: Vec<usize> = (0..p).collect();
    order.shuffle(&mut r);
    let moved = permuted_model(&model, &order);
    let dist = model.full_distribution().unwrap();
    for x in dist.states() {
        let y: Vec<i8> = order.iter().map(|&k| x.values()[k]).collect();
        let q = moved.state_probability(&BinaryState::new(y).unwrap()).unwrap();
        prop_assert!((q - dist.probabilities[x.index()]).abs() < 1e-12);
    }

    let data = sample(&model, &SamplerConfig::exact(150, seed)).unwrap();
    let cfg = FitConfig::default().with_penalty(Penalty::new(0.04, 0.5).unwrap());
    let base = fit_disjoint(&data, &cfg).unwrap();
    let fit = fit_disjoint(&data.permute_columns(&order).unwrap(), &cfg).unwrap();
    for i in 0..p {
        prop_assert!((fit.tau_hat[i] - base.tau_hat[order[i]]).abs() < 1e-5);
        for j in 0..p {
            prop_assert!((fit.omega_hat[i][j] - base.omega_hat[order[i]][order[j]]).abs() < 1e-5);
        }
    }
    Ok(())
}

pub fn bridge_ignores_extra_diagonal(seed: u64, p: usize, extra: f64) -> Result<(), TestCaseError> {
    let mut r = rng(seed);
    let model = random_model(&mut r, p, 1.0);
    let (shifted, bridge) = ising_to_mirt_with_shift(&model, extra, DEFAULT_RANK_TOL).unwrap();
    let back = mirt_to_ising(&shifted).unwrap();
    for i in 0..p {
        prop_assert!((back.tau()[i] - model.tau()[i]).abs() < 1e-12);
        for j in 0..p {
            if i != j {
                prop_assert!((back.weight(i, j) - model.weight(i, j)).abs() < 1e-9);
            }
        }
    }
    let min = ising_to_mirt(&model, DEFAULT_RANK_TOL).unwrap().1.shift_c;
    prop_assert!((bridge.shift_c - min - extra).abs() < 1e-12);
    let exact = model.full_distribution().unwrap().probabilities;
    let quad = mirt_marginal_all(&shifted, 40, 20).unwrap();
    prop_assert!(max_diff(&quad, &exact) < 1e-6);
    Ok(())
}

pub fn sign_flips_leave_marginals_unchanged(seed: u64, p: usize, dim: usize) -> Result<(), TestCaseError> {
    let mut r = rng(seed);
    let model = random_model(&mut r, p, 1.0);
    let (mirt, _) = ising_to_mirt(&model, DEFAULT_RANK_TOL).unwrap();
    let flipped = mirt.flip_dimension(dim % p);
    let base = mirt_marginal_all(&mirt, 40, 20).unwrap();
    prop_assert!(max_diff(&base, &mirt_marginal_all(&flipped, 40, 20).unwrap()) < 1e-12);
    let same = mirt_to_ising(&flipped).unwrap();
    prop_assert!(same.omega().iter().zip(model.omega().iter()).all(|(a, b)| (a - b).abs() < 1e-9));

    let negated = IsingModel::new(model.tau().iter().map(|t| -t).collect(), model.omega().clone(), 1.0).unwrap();
    for x in model.full_distribution().unwrap().states() {
        let a = model.state_probability(&x).unwrap();
        let b = negated.state_probability(&x.negated()).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }
    Ok(())
}

pub fn markov_property_factorises(seed: u64, p: usize) -> Result<(), TestCaseError> {
    let mut r = rng(seed);
    let dense = random_model(&mut r, p, 1.0);
    let (k, l) = (0, p - 1);
    let mut omega = dense.omega().clone();
    omega[(k, l)] = 0.0;
    omega[(l, k)] = 0.0;
    let model = IsingModel::new(dense.tau().to_vec(), omega, 1.0).unwrap();
    let dist = model.full_distribution().unwrap();
    for s in 0..1usize << (p - 2) {
        let rest: Vec<i8> = (0..p - 2).map(|b| if s >> b & 1 == 1 { 1 } else { -1 }).collect();
        let t = model.condition_pair(k, l, &rest).unwrap();
        prop_assert!((t[1][1] * t[0][0] - t[1][0] * t[0][1]).abs() < 1e-12);
    }
    for x in dist.states() {
        for i in 0..p {
            let mut up = x.values().to_vec();
            up[i] = 1;
            let mut down = up.clone();
            down[i] = -1;
            let pu = dist.probabilities[BinaryState::new(up).unwrap().index()];
            let pd = dist.probabilities[BinaryState::new(down).unwrap().index()];
            let c = model.conditional_in_state(i, &x).unwrap();
            prop_assert!((c - pu / (pu + pd)).abs() < 1e-12);
        }
    }
    Ok(())
}
