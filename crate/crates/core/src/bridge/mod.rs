//! Equivalence between the Ising model and a multidimensional two-parameter
//! logistic (MIRT) model with a Gaussian latent posterior.
//!
//! Shifting the diagonal of `Omega` by `c = -lambda_min` makes it positive
//! semi-definite, `Omega + cI = Q Lambda Q'`. With `delta = -tau` and
//! discrimination columns `a_j = -2 sqrt(lambda_j / 2) q_j` the Ising
//! distribution is the marginal of
//!
//! ```text
//! Pr(x | theta) = prod_i exp(x_i (a_i' theta - delta_i)) / sum_{x_i} exp(...)
//! ```
//!
//! under a latent density that is a mixture of `N(a' x / 2, sqrt(1/2) I)`
//! components weighted by the Ising state probabilities. Equivalently
//! `Omega + cI = A A' / 2`.
//!
//! Eigenvectors are only defined up to sign. Each column of `Q` is flipped so
//! that its largest-magnitude entry (the first one, on ties) is negative,
//! which makes the matching entry of `a_j` positive.

mod quadrature;

pub use quadrature::gauss_hermite;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{IsingError, Result};
use crate::io::{matrix_rows, rows_matrix};
use crate::model::{log_two_cosh, spin_up_probability, BinaryState, IsingModel};

pub const DEFAULT_RANK_TOL: f64 = 1e-8;
pub const DEFAULT_QUADRATURE_NODES: usize = 40;
/// Largest number of non-zero latent dimensions integrated by tensor quadrature.
pub const MAX_QUADRATURE_DIMS: usize = 3;

const SIGN_TIE_TOL: f64 = 1e-9;

/// Discriminations `a` (items x dimensions) and difficulties `delta`.
#[derive(Clone, Debug, PartialEq)]
pub struct MirtModel {
    a: DMatrix<f64>,
    delta: Vec<f64>,
}

impl MirtModel {
    pub fn new(a: DMatrix<f64>, delta: Vec<f64>) -> Result<Self> {
        if a.ncols() == 0 {
            return Err(IsingError::InvalidModel("MIRT model needs at least one dimension".into()));
        }
        if a.nrows() != delta.len() {
            return Err(IsingError::DimensionMismatch {
                expected: delta.len(),
                found: a.nrows(),
            });
        }
        if a.iter().chain(delta.iter()).any(|v| !v.is_finite()) {
            return Err(IsingError::InvalidModel("non-finite MIRT parameter".into()));
        }
        Ok(Self { a, delta })
    }

    pub fn p(&self) -> usize {
        self.delta.len()
    }

    pub fn m(&self) -> usize {
        self.a.ncols()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn delta(&self) -> &[f64] {
        &self.delta
    }

    /// Same model with the sign of latent dimension `dim` reversed.
    pub fn flip_dimension(&self, dim: usize) -> Self {
        let mut a = self.a.clone();
        a.column_mut(dim).neg_mut();
        Self {
            a,
            delta: self.delta.clone(),
        }
    }

    fn check_state(&self, x: &BinaryState) -> Result<()> {
        if x.len() != self.p() {
            return Err(IsingError::DimensionMismatch {
                expected: self.p(),
                found: x.len(),
            });
        }
        Ok(())
    }

    /// `a_i' theta - delta_i`.
    fn item_field(&self, i: usize, theta: &[f64]) -> f64 {
        (0..self.m()).map(|k| self.a[(i, k)] * theta[k]).sum::<f64>() - self.delta[i]
    }

    /// `(A' x)_k / 2` for every dimension.
    fn weighted_sumscores(&self, x: &BinaryState) -> Vec<f64> {
        (0..self.m())
            .map(|k| {
                0.5 * x
                    .values()
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| self.a[(i, k)] * f64::from(v))
                    .sum::<f64>()
            })
            .collect()
    }
}

/// Spectral data behind an Ising-to-MIRT conversion.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenBridge {
    /// Constant added to the diagonal of `Omega` before decomposition.
    pub shift_c: f64,
    /// Orthonormal eigenvectors as columns, sign-normalised.
    pub q: DMatrix<f64>,
    /// Eigenvalues of `Omega + cI`, descending, clamped at zero.
    pub lambda: Vec<f64>,
    /// Number of eigenvalues above the rank tolerance.
    pub rank: usize,
}

/// Gaussian posterior of the latent traits given a response pattern.
#[derive(Clone, Debug, PartialEq)]
pub struct LatentPosterior {
    pub mean: Vec<f64>,
    /// Common standard deviation of every (independent) dimension, `sqrt(1/2)`.
    pub sd: f64,
}

impl LatentPosterior {
    pub fn density(&self, theta: &[f64]) -> f64 {
        self.mean
            .iter()
            .zip(theta)
            .map(|(&mu, &t)| normal_pdf(t, mu, self.sd))
            .product()
    }
}

fn normal_pdf(t: f64, mean: f64, sd: f64) -> f64 {
    let z = (t - mean) / sd;
    (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
}

/// Posterior standard deviation shared by all latent dimensions.
pub fn posterior_sd() -> f64 {
    0.5f64.sqrt()
}

/// Eigen-decomposition of `Omega + cI` with `c = -lambda_min + extra_shift`,
/// eigenvalues descending and eigenvector signs normalised.
fn shifted_spectrum(model: &IsingModel, extra_shift: f64) -> (f64, Vec<f64>, DMatrix<f64>) {
    let omega = model.absorb_beta().omega().clone();
    let p = omega.nrows();
    let eig = SymmetricEigen::new(omega);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("finite eigenvalues")
            .then(a.cmp(&b))
    });
    let raw: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let lambda_min = raw[p - 1];
    let shift_c = -lambda_min + extra_shift;
    let lambda = raw.iter().map(|l| (l - lambda_min + extra_shift).max(0.0)).collect();
    let mut q = DMatrix::zeros(p, p);
    for (col, &k) in order.iter().enumerate() {
        let v = eig.eigenvectors.column(k);
        let max_abs = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let pivot = v
            .iter()
            .position(|x| x.abs() >= max_abs - SIGN_TIE_TOL)
            .unwrap_or(0);
        let sign = if v[pivot] > 0.0 { -1.0 } else { 1.0 };
        for i in 0..p {
            q[(i, col)] = sign * v[i];
        }
    }
    (shift_c, lambda, q)
}

fn rank_threshold(lambda: &[f64], rank_tol: f64) -> f64 {
    let top = lambda.first().copied().unwrap_or(0.0);
    rank_tol * top
}

/// Equivalent MIRT model with `M = P` dimensions; dimensions whose eigenvalue
/// does not exceed `rank_tol` times the largest one get zero discriminations.
pub fn ising_to_mirt(model: &IsingModel, rank_tol: f64) -> Result<(MirtModel, EigenBridge)> {
    ising_to_mirt_with_shift(model, 0.0, rank_tol)
}

/// As [`ising_to_mirt`], with the diagonal shifted by an extra `extra_shift >= 0`
/// beyond the minimal one.
pub fn ising_to_mirt_with_shift(
    model: &IsingModel,
    extra_shift: f64,
    rank_tol: f64,
) -> Result<(MirtModel, EigenBridge)> {
    if !(extra_shift >= 0.0 && extra_shift.is_finite()) {
        return Err(IsingError::InvalidConfig(format!(
            "extra diagonal shift must be non-negative, got {extra_shift}"
        )));
    }
    let p = model.p();
    let (shift_c, lambda, q) = shifted_spectrum(model, extra_shift);
    let threshold = rank_threshold(&lambda, rank_tol);
    let mut a = DMatrix::zeros(p, p);
    let mut rank = 0;
    for (j, &l) in lambda.iter().enumerate() {
        if l > threshold && l > 0.0 {
            rank += 1;
            let scale = -2.0 * (l / 2.0).sqrt();
            for i in 0..p {
                a[(i, j)] = scale * q[(i, j)];
            }
        }
    }
    let beta_model = model.absorb_beta();
    let delta = beta_model.tau().iter().map(|t| -t).collect();
    Ok((
        MirtModel::new(a, delta)?,
        EigenBridge {
            shift_c,
            q,
            lambda,
            rank,
        },
    ))
}

/// `Omega = A A' / 2` with the diagonal dropped, and `tau = -delta`.
pub fn mirt_to_ising(mirt: &MirtModel) -> Result<IsingModel> {
    let omega = (&mirt.a * mirt.a.transpose()) * 0.5;
    let tau = mirt.delta.iter().map(|d| -d).collect();
    IsingModel::with_arbitrary_diagonal(tau, omega, 1.0)
}

/// The diagonal `c` implied by `A A' / 2`; constant when `A` came from [`ising_to_mirt`].
pub fn implied_shift(mirt: &MirtModel) -> Vec<f64> {
    (0..mirt.p())
        .map(|i| 0.5 * mirt.a.row(i).iter().map(|v| v * v).sum::<f64>())
        .collect()
}

/// `Pr(X = x | theta)` under local independence.
pub fn mirt_conditional(mirt: &MirtModel, x: &BinaryState, theta: &[f64]) -> Result<f64> {
    mirt.check_state(x)?;
    if theta.len() != mirt.m() {
        return Err(IsingError::DimensionMismatch {
            expected: mirt.m(),
            found: theta.len(),
        });
    }
    Ok(x
        .values()
        .iter()
        .enumerate()
        .map(|(i, &v)| spin_up_probability(f64::from(v) * mirt.item_field(i, theta)))
        .product())
}

/// Tensor Gauss–Hermite grid over the non-zero latent dimensions.
struct LatentGrid {
    /// Row-major `nodes x items` item fields `a_i' theta - delta_i`.
    fields: Vec<f64>,
    log_weights: Vec<f64>,
    p: usize,
}

impl LatentGrid {
    fn new(mirt: &MirtModel, n_nodes: usize) -> Result<Self> {
        if n_nodes == 0 {
            return Err(IsingError::InvalidConfig("quadrature needs at least one node".into()));
        }
        let active: Vec<usize> = (0..mirt.m())
            .filter(|&k| mirt.a.column(k).iter().any(|&v| v != 0.0))
            .collect();
        if active.len() > MAX_QUADRATURE_DIMS {
            return Err(IsingError::QuadratureDimension {
                dims: active.len(),
                max: MAX_QUADRATURE_DIMS,
            });
        }
        let (nodes, weights) = gauss_hermite(n_nodes);
        let log_w: Vec<f64> = weights.iter().map(|w| w.ln()).collect();
        let d = active.len();
        let total = n_nodes.pow(d as u32);
        let p = mirt.p();
        let mut fields = Vec::with_capacity(total * p);
        let mut log_weights = Vec::with_capacity(total);
        let mut theta = vec![0.0; mirt.m()];
        for cell in 0..total {
            let mut rem = cell;
            let mut lw = 0.0;
            for &k in &active {
                let idx = rem % n_nodes;
                rem /= n_nodes;
                theta[k] = nodes[idx];
                lw += log_w[idx];
            }
            log_weights.push(lw);
            fields.extend((0..p).map(|i| mirt.item_field(i, &theta)));
        }
        Ok(Self {
            fields,
            log_weights,
            p,
        })
    }

    fn cell_fields(&self, cell: usize) -> &[f64] {
        &self.fields[cell * self.p..(cell + 1) * self.p]
    }

    fn log_normaliser(&self) -> f64 {
        log_sum_exp((0..self.log_weights.len()).map(|c| {
            self.log_weights[c] + self.cell_fields(c).iter().map(|&f| log_two_cosh(f)).sum::<f64>()
        }))
    }

    fn log_unnormalised(&self, x: &BinaryState) -> f64 {
        log_sum_exp((0..self.log_weights.len()).map(|c| {
            self.log_weights[c]
                + self
                    .cell_fields(c)
                    .iter()
                    .zip(x.values())
                    .map(|(&f, &v)| f * f64::from(v))
                    .sum::<f64>()
        }))
    }
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Marginal probability of `x` with the latent traits integrated out by
/// Gauss–Hermite quadrature (`quadrature_nodes` points per non-zero dimension).
///
/// Normalised by the integral of `prod_i sum_{x_i} exp(...)`, so the values
/// over all `2^P` states sum to one.
pub fn mirt_marginal(mirt: &MirtModel, x: &BinaryState, quadrature_nodes: usize) -> Result<f64> {
    mirt.check_state(x)?;
    let grid = LatentGrid::new(mirt, quadrature_nodes)?;
    Ok((grid.log_unnormalised(x) - grid.log_normaliser()).exp())
}

/// [`mirt_marginal`] for every state in canonical order, sharing one grid.
pub fn mirt_marginal_all(mirt: &MirtModel, quadrature_nodes: usize, enumeration_cap: usize) -> Result<Vec<f64>> {
    if mirt.p() > enumeration_cap {
        return Err(IsingError::EnumerationCapExceeded {
            p: mirt.p(),
            cap: enumeration_cap,
        });
    }
    let grid = LatentGrid::new(mirt, quadrature_nodes)?;
    let log_norm = grid.log_normaliser();
    Ok((0..1usize << mirt.p())
        .map(|s| (grid.log_unnormalised(&BinaryState::from_index(s, mirt.p())) - log_norm).exp())
        .collect())
}

/// `theta | x ~ N(A' x / 2, sqrt(1/2) I)`.
pub fn latent_posterior(mirt: &MirtModel, x: &BinaryState) -> Result<LatentPosterior> {
    mirt.check_state(x)?;
    Ok(LatentPosterior {
        mean: mirt.weighted_sumscores(x),
        sd: posterior_sd(),
    })
}

/// Joint latent density `f(theta) = sum_x f(theta | x) Pr(x)` with exact Ising weights.
pub fn latent_density(mirt: &MirtModel, theta: &[f64]) -> Result<f64> {
    if theta.len() != mirt.m() {
        return Err(IsingError::DimensionMismatch {
            expected: mirt.m(),
            found: theta.len(),
        });
    }
    let dist = mirt_to_ising(mirt)?.full_distribution()?;
    let mut total = 0.0;
    for (s, state) in dist.states().enumerate() {
        total += dist.probabilities[s] * latent_posterior(mirt, &state)?.density(theta);
    }
    Ok(total)
}

/// Marginal density of latent dimension `dim` evaluated on `grid`.
pub fn latent_marginal_density(mirt: &MirtModel, dim: usize, grid: &[f64]) -> Result<Vec<f64>> {
    if dim >= mirt.m() {
        return Err(IsingError::IndexOutOfRange { index: dim, p: mirt.m() });
    }
    let dist = mirt_to_ising(mirt)?.full_distribution()?;
    let sd = posterior_sd();
    let components: Vec<(f64, f64)> = dist
        .states()
        .enumerate()
        .map(|(s, state)| (dist.probabilities[s], mirt.weighted_sumscores(&state)[dim]))
        .collect();
    Ok(grid
        .iter()
        .map(|&t| components.iter().map(|&(w, mu)| w * normal_pdf(t, mu, sd)).sum())
        .collect())
}

/// Eigenvalues of the minimally shifted weight matrix and its numerical rank.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkRank {
    pub rank: usize,
    /// Descending eigenvalues of `Omega + cI`.
    pub eigenvalues: Vec<f64>,
    pub shift_c: f64,
}

pub fn rank_of_network(model: &IsingModel, rank_tol: f64) -> NetworkRank {
    let (shift_c, lambda, _) = shifted_spectrum(model, 0.0);
    let threshold = rank_threshold(&lambda, rank_tol);
    NetworkRank {
        rank: lambda.iter().filter(|&&l| l > threshold && l > 0.0).count(),
        eigenvalues: lambda,
        shift_c,
    }
}

/// On-disk MIRT model: `{"p", "m", "a", "delta", "shift_c"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MirtFile {
    pub p: usize,
    pub m: usize,
    pub a: Vec<Vec<f64>>,
    pub delta: Vec<f64>,
    #[serde(default)]
    pub shift_c: f64,
    /// Shifted eigenvalues, present when written by a conversion.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
}

impl MirtFile {
    pub fn from_model(mirt: &MirtModel, bridge: Option<&EigenBridge>) -> Self {
        Self {
            p: mirt.p(),
            m: mirt.m(),
            a: matrix_rows(&mirt.a),
            delta: mirt.delta.clone(),
            shift_c: bridge.map_or_else(
                || implied_shift(mirt).first().copied().unwrap_or(0.0),
                |b| b.shift_c,
            ),
            lambda: bridge.map(|b| b.lambda.clone()),
            rank: bridge.map(|b| b.rank),
        }
    }

    pub fn to_model(&self) -> Result<MirtModel> {
        if self.delta.len() != self.p {
            return Err(IsingError::DimensionMismatch {
                expected: self.p,
                found: self.delta.len(),
            });
        }
        MirtModel::new(rows_matrix(&self.a, self.p, self.m)?, self.delta.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn chain() -> IsingModel {
        IsingModel::from_edges(vec![-0.1; 3], &[(0, 1, 0.5), (1, 2, 0.5)]).unwrap()
    }

    fn st(v: &[i8]) -> BinaryState {
        BinaryState::new(v.to_vec()).unwrap()
    }

    #[test]
    fn worked_example_spectrum_and_discriminations() {
        let (mirt, bridge) = ising_to_mirt(&chain(), DEFAULT_RANK_TOL).unwrap();
        let expect_l = [1.414, 0.707, 0.0];
        for (l, e) in bridge.lambda.iter().zip(expect_l) {
            assert_abs_diff_eq!(*l, e, epsilon = 1e-3);
        }
        assert_eq!(bridge.rank, 2);
        assert_abs_diff_eq!(bridge.shift_c, 0.5f64.sqrt(), epsilon = 1e-12);
        let expect_a = [[0.841, 0.841, 0.0], [1.189, 0.0, 0.0], [0.841, -0.841, 0.0]];
        for i in 0..3 {
            assert_abs_diff_eq!(mirt.delta()[i], 0.1, epsilon = 1e-12);
            for j in 0..3 {
                assert_abs_diff_eq!(mirt.a()[(i, j)], expect_a[i][j], epsilon = 1e-3);
            }
        }
        let qtq = bridge.q.transpose() * &bridge.q;
        assert!((qtq - DMatrix::identity(3, 3)).abs().max() < 1e-10);
    }

    #[test]
    fn zero_network() {
        let m = IsingModel::new(vec![0.2, -0.4], DMatrix::zeros(2, 2), 1.0).unwrap();
        let (mirt, bridge) = ising_to_mirt(&m, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(bridge.rank, 0);
        assert!(bridge.lambda.iter().all(|&l| l == 0.0));
        assert!(mirt.a().iter().all(|&v| v == 0.0));
        assert_eq!(mirt.delta(), &[-0.2, 0.4]);
        assert_eq!(rank_of_network(&m, DEFAULT_RANK_TOL).rank, 0);
        let back = mirt_to_ising(&mirt).unwrap();
        assert!(back.omega().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn mirt_back_to_ising() {
        let a = DMatrix::from_row_slice(3, 3, &[0.841, 0.841, 0.0, 1.189, 0.0, 0.0, 0.841, -0.841, 0.0]);
        let mirt = MirtModel::new(a, vec![0.1; 3]).unwrap();
        let m = mirt_to_ising(&mirt).unwrap();
        assert_abs_diff_eq!(m.weight(0, 1), 0.5, epsilon = 1e-3);
        assert_abs_diff_eq!(m.weight(1, 2), 0.5, epsilon = 1e-3);
        assert_abs_diff_eq!(m.weight(0, 2), 0.0, epsilon = 1e-3);
        assert!(m.tau().iter().all(|&t| (t + 0.1).abs() < 1e-12));
    }

    #[test]
    fn conditional_cases() {
        let zero = MirtModel::new(DMatrix::zeros(3, 2), vec![0.0; 3]).unwrap();
        assert_abs_diff_eq!(mirt_conditional(&zero, &st(&[1, -1, 1]), &[0.4, -2.0]).unwrap(), 0.125, epsilon = 1e-15);
        let one = MirtModel::new(DMatrix::from_element(1, 1, 1.3), vec![0.65]).unwrap();
        assert_abs_diff_eq!(mirt_conditional(&one, &st(&[1]), &[0.5]).unwrap(), 0.5, epsilon = 1e-15);
        let (mirt, _) = ising_to_mirt(&chain(), DEFAULT_RANK_TOL).unwrap();
        let expected = ((-0.1f64).exp() / ((-0.1f64).exp() + 0.1f64.exp())).powi(3);
        assert_abs_diff_eq!(mirt_conditional(&mirt, &st(&[1, 1, 1]), &[0.0; 3]).unwrap(), expected, epsilon = 1e-14);
        assert_abs_diff_eq!(expected, 0.091226, epsilon = 1e-6);
        assert!(mirt_conditional(&mirt, &st(&[1, 1]), &[0.0; 3]).is_err());
        assert!(mirt_conditional(&mirt, &st(&[1, 1, 1]), &[0.0; 2]).is_err());
    }

    #[test]
    fn marginal_reproduces_table() {
        let m = chain();
        let (mirt, _) = ising_to_mirt(&m, DEFAULT_RANK_TOL).unwrap();
        let exact = m.full_distribution().unwrap();
        for s in 0..8 {
            let q = mirt_marginal(&mirt, &exact.state(s), DEFAULT_QUADRATURE_NODES).unwrap();
            assert_abs_diff_eq!(q, exact.probabilities[s], epsilon = 1e-10);
        }
        let zero = MirtModel::new(DMatrix::zeros(4, 4), vec![0.0; 4]).unwrap();
        for q in mirt_marginal_all(&zero, 40, 20).unwrap() {
            assert_eq!(q, 1.0 / 16.0);
        }
    }

    #[test]
    fn quadrature_dimension_guard() {
        let a = DMatrix::from_fn(4, 4, |i, j| if i == j { 1.0 } else { 0.0 });
        let mirt = MirtModel::new(a, vec![0.0; 4]).unwrap();
        assert!(matches!(
            mirt_marginal(&mirt, &st(&[1, 1, 1, 1]), 10),
            Err(IsingError::QuadratureDimension { dims: 4, max: 3 })
        ));
    }

    #[test]
    fn posterior_means() {
        let zero = MirtModel::new(DMatrix::zeros(2, 2), vec![0.0; 2]).unwrap();
        let post = latent_posterior(&zero, &st(&[1, -1])).unwrap();
        assert_eq!(post.mean, vec![0.0, 0.0]);
        assert_eq!(post.sd, 0.5f64.sqrt());
        let (mirt, _) = ising_to_mirt(&chain(), DEFAULT_RANK_TOL).unwrap();
        let post = latent_posterior(&mirt, &st(&[1, 1, 1])).unwrap();
        assert_abs_diff_eq!(post.mean[0], 1.4355, epsilon = 1e-3);
        assert_abs_diff_eq!(post.mean[1], 0.0, epsilon = 1e-12);
        let neg = latent_posterior(&mirt, &st(&[-1, -1, -1])).unwrap();
        for (a, b) in post.mean.iter().zip(&neg.mean) {
            assert_eq!(*a, -b);
        }
    }

    #[test]
    fn latent_marginals() {
        let (mirt, _) = ising_to_mirt(&chain(), DEFAULT_RANK_TOL).unwrap();
        let grid: Vec<f64> = (0..=800).map(|k| -8.0 + 0.02 * k as f64).collect();
        let sd = posterior_sd();
        let third = latent_marginal_density(&mirt, 2, &grid).unwrap();
        for (t, d) in grid.iter().zip(&third) {
            assert_abs_diff_eq!(*d, normal_pdf(*t, 0.0, sd), epsilon = 1e-14);
        }
        let first = latent_marginal_density(&mirt, 0, &grid).unwrap();
        let area: f64 = first.windows(2).map(|w| 0.01 * (w[0] + w[1])).sum();
        assert_abs_diff_eq!(area, 1.0, epsilon = 1e-4);
        // negative thresholds pull mass towards the all-minus sumscore
        let at = |t: f64| first[((t + 8.0) / 0.02).round() as usize];
        assert!(at(-1.44) > at(0.0));
        assert!(at(-1.44) > at(1.44));
        assert!(latent_marginal_density(&mirt, 3, &grid).is_err());
    }

    #[test]
    fn rasch_structure_has_equal_discriminations() {
        let w = 0.3;
        let omega = DMatrix::from_fn(5, 5, |i, j| if i == j { 0.0 } else { w });
        let m = IsingModel::new(vec![0.1, -0.2, 0.0, 0.3, 0.5], omega, 1.0).unwrap();
        let (mirt, bridge) = ising_to_mirt(&m, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(bridge.rank, 1);
        let first = mirt.a()[(0, 0)];
        for i in 1..5 {
            assert_abs_diff_eq!(mirt.a()[(i, 0)], first, epsilon = 1e-8);
        }
        assert_abs_diff_eq!(first, 2.0 * (5.0 * w / 2.0 / 5.0f64).sqrt(), epsilon = 1e-10);
    }

    #[test]
    fn rank_one_construction() {
        let v = [0.9, -0.4, 0.7, 0.2];
        let full = DMatrix::from_fn(4, 4, |i, j| v[i] * v[j]);
        let m = IsingModel::with_arbitrary_diagonal(vec![0.0; 4], full, 1.0).unwrap();
        let r = rank_of_network(&m, DEFAULT_RANK_TOL);
        // zeroing the diagonal subtracts diag(v^2); re-shifting restores a
        // dominant direction whose eigenvalue exceeds |v|^2 - max v_i^2
        let norm2: f64 = v.iter().map(|x| x * x).sum();
        let vmax2 = v.iter().map(|x| x * x).fold(0.0, f64::max);
        assert!(r.eigenvalues[0] >= norm2 - vmax2);
        assert!(r.eigenvalues[0] > 2.0 * r.eigenvalues[1]);
        assert_eq!(*r.eigenvalues.last().unwrap(), 0.0);
    }

    #[test]
    fn beta_is_absorbed() {
        let hot = chain().with_beta(2.0).unwrap();
        let (mirt, _) = ising_to_mirt(&hot, DEFAULT_RANK_TOL).unwrap();
        let exact = hot.full_distribution().unwrap();
        let q = mirt_marginal_all(&mirt, 40, 20).unwrap();
        for (a, b) in q.iter().zip(&exact.probabilities) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-10);
        }
    }

    #[test]
    fn mirt_file_round_trip() {
        let (mirt, bridge) = ising_to_mirt(&chain(), DEFAULT_RANK_TOL).unwrap();
        let file = MirtFile::from_model(&mirt, Some(&bridge));
        let json = serde_json::to_string(&file).unwrap();
        let back: MirtFile = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_model().unwrap(), mirt);
        assert_eq!(back.shift_c, bridge.shift_c);
    }
}
