#![allow(dead_code)]

pub mod invariants;

use isingnet::{BinaryDataset, BinaryState, IsingModel};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `(x1, x2, x3, potential, probability)` for the three-node chain.
pub const TABLE1: [(i8, i8, i8, f64, f64); 8] = [
    (-1, -1, -1, 3.6693, 0.3514),
    (1, -1, -1, 1.1052, 0.1058),
    (-1, 1, -1, 0.4066, 0.0389),
    (1, 1, -1, 0.9048, 0.0866),
    (-1, -1, 1, 1.1052, 0.1058),
    (1, -1, 1, 0.3329, 0.0319),
    (-1, 1, 1, 0.9048, 0.0866),
    (1, 1, 1, 2.0138, 0.1928),
];

pub fn chain_model() -> IsingModel {
    IsingModel::from_edges(vec![-0.1; 3], &[(0, 1, 0.5), (1, 2, 0.5)]).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Thresholds and weights uniform in `[-scale, scale]`.
pub fn random_model(rng: &mut impl Rng, p: usize, scale: f64) -> IsingModel {
    let tau = (0..p).map(|_| rng.random_range(-scale..=scale)).collect();
    let mut omega = DMatrix::zeros(p, p);
    for i in 0..p {
        for j in (i + 1)..p {
            let w = rng.random_range(-scale..=scale);
            omega[(i, j)] = w;
            omega[(j, i)] = w;
        }
    }
    IsingModel::new(tau, omega, 1.0).unwrap()
}

pub fn state(values: &[i8]) -> BinaryState {
    BinaryState::new(values.to_vec()).unwrap()
}

/// Brute-force `exp(sum tau x + sum_{i<j} omega x x)`.
pub fn potential(model: &IsingModel, x: &[i8]) -> f64 {
    let p = model.p();
    let mut e = 0.0;
    for i in 0..p {
        e += model.tau()[i] * f64::from(x[i]);
        for j in (i + 1)..p {
            e += model.omega()[(i, j)] * f64::from(x[i]) * f64::from(x[j]);
        }
    }
    (model.beta() * e).exp()
}

/// Every `+-1` vector of length `p`, node 0 varying fastest.
pub fn all_states(p: usize) -> Vec<Vec<i8>> {
    (0..1usize << p)
        .map(|s| (0..p).map(|i| if s >> i & 1 == 1 { 1 } else { -1 }).collect())
        .collect()
}

/// Unpenalised Newton-Raphson for `sum ln 2cosh(eta) - y eta`.
pub fn newton_oracle(data: &BinaryDataset, node: usize) -> Vec<f64> {
    let p = data.p();
    let x = DMatrix::from_fn(data.n(), p, |r, c| {
        if c == 0 {
            1.0
        } else {
            let j = if c <= node { c - 1 } else { c };
            f64::from(data.get(r, j))
        }
    });
    let y = DVector::from_fn(data.n(), |r, _| f64::from(data.get(r, node)));
    let mut beta = DVector::zeros(p);
    for _ in 0..100 {
        let eta = &x * &beta;
        let t = eta.map(f64::tanh);
        let grad = x.transpose() * (&t - &y);
        let w = t.map(|v| 1.0 - v * v);
        let hess = x.transpose() * DMatrix::from_diagonal(&w) * &x;
        let step = hess.lu().solve(&grad).unwrap();
        beta -= &step;
        if step.amax() < 1e-14 {
            break;
        }
    }
    beta.iter().copied().collect()
}
