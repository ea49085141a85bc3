//! Data generation: exact and Gibbs sampling from an Ising model, plus the two
//! synthetic generators used by the simulation study (a scale-free network and
//! a multidimensional Rasch dataset).

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bridge::MirtModel;
use crate::data::BinaryDataset;
use crate::error::{IsingError, Result};
use crate::model::{spin_up_probability, IsingModel};
use crate::rng::{stream_rng, StreamRng, STREAM_EXACT, STREAM_GIBBS, STREAM_MIRT, STREAM_NETWORK};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMethod {
    Exact,
    Gibbs,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub method: SamplingMethod,
    pub n_samples: usize,
    /// Sweeps discarded before the first recorded state (Gibbs only).
    pub burn_in: usize,
    /// Sweeps between recorded states (Gibbs only).
    pub thin: usize,
    pub seed: u64,
}

impl SamplerConfig {
    pub fn exact(n_samples: usize, seed: u64) -> Self {
        Self {
            method: SamplingMethod::Exact,
            n_samples,
            burn_in: 0,
            thin: 1,
            seed,
        }
    }

    pub fn gibbs(n_samples: usize, seed: u64) -> Self {
        Self {
            method: SamplingMethod::Gibbs,
            n_samples,
            burn_in: 1000,
            thin: 1,
            seed,
        }
    }

    pub fn with_burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn with_thin(mut self, thin: usize) -> Self {
        self.thin = thin;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(IsingError::InvalidConfig("n_samples must be at least 1".into()));
        }
        if self.thin == 0 {
            return Err(IsingError::InvalidConfig("thin must be at least 1".into()));
        }
        Ok(())
    }
}

pub fn sample(model: &IsingModel, cfg: &SamplerConfig) -> Result<BinaryDataset> {
    match cfg.method {
        SamplingMethod::Exact => sample_exact(model, cfg),
        SamplingMethod::Gibbs => sample_gibbs(model, cfg),
    }
}

/// Independent draws by inverting the CDF of the enumerated distribution.
pub fn sample_exact(model: &IsingModel, cfg: &SamplerConfig) -> Result<BinaryDataset> {
    cfg.validate()?;
    let dist = model.full_distribution()?;
    let mut cdf = Vec::with_capacity(dist.len());
    let mut acc = 0.0;
    for p in &dist.probabilities {
        acc += p;
        cdf.push(acc);
    }
    let p = model.p();
    let mut rng = stream_rng(cfg.seed, STREAM_EXACT);
    let mut values = Vec::with_capacity(cfg.n_samples * p);
    for _ in 0..cfg.n_samples {
        let u: f64 = rng.random::<f64>() * acc;
        let s = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
        values.extend((0..p).map(|i| if (s >> i) & 1 == 1 { 1i8 } else { -1 }));
    }
    BinaryDataset::from_flat(cfg.n_samples, p, values)
}

/// Sequential-scan Gibbs sampler: every sweep redraws nodes `1..P` in order
/// from their conditional distributions.
pub fn sample_gibbs(model: &IsingModel, cfg: &SamplerConfig) -> Result<BinaryDataset> {
    cfg.validate()?;
    let p = model.p();
    let mut rng = stream_rng(cfg.seed, STREAM_GIBBS);
    let mut x: Vec<f64> = (0..p)
        .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
        .collect();
    let sweep = |x: &mut Vec<f64>, rng: &mut StreamRng| {
        for i in 0..p {
            let up = spin_up_probability(model.local_field(i, x));
            x[i] = if rng.random::<f64>() < up { 1.0 } else { -1.0 };
        }
    };
    for _ in 0..cfg.burn_in {
        sweep(&mut x, &mut rng);
    }
    let mut values = Vec::with_capacity(cfg.n_samples * p);
    for _ in 0..cfg.n_samples {
        for _ in 0..cfg.thin {
            sweep(&mut x, &mut rng);
        }
        values.extend(x.iter().map(|&v| v as i8));
    }
    BinaryDataset::from_flat(cfg.n_samples, p, values)
}

/// Settings for the random scale-free network generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkGenConfig {
    pub p: usize,
    /// Probability that a pair outside the attachment tree becomes an edge.
    pub attach_prob: f64,
    pub weight_low: f64,
    pub weight_high: f64,
    pub thresh_low: f64,
    pub thresh_high: f64,
    pub seed: u64,
}

impl NetworkGenConfig {
    /// 5% extra connections, weights `U(0.75, 1)`, thresholds `U(-3, -1)`.
    pub fn study_defaults(p: usize, seed: u64) -> Self {
        Self {
            p,
            attach_prob: 0.05,
            weight_low: 0.75,
            weight_high: 1.0,
            thresh_low: -3.0,
            thresh_high: -1.0,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.p < 2 {
            return Err(IsingError::InvalidConfig("network needs at least 2 nodes".into()));
        }
        if !(0.0..=1.0).contains(&self.attach_prob) {
            return Err(IsingError::InvalidConfig(format!(
                "attach_prob {} outside [0, 1]",
                self.attach_prob
            )));
        }
        if !(self.weight_low <= self.weight_high) || !self.weight_low.is_finite() || !self.weight_high.is_finite() {
            return Err(IsingError::InvalidConfig("invalid weight range".into()));
        }
        if !(self.thresh_low <= self.thresh_high) || !self.thresh_low.is_finite() || !self.thresh_high.is_finite() {
            return Err(IsingError::InvalidConfig("invalid threshold range".into()));
        }
        Ok(())
    }
}

/// Edge set of a preferential-attachment tree (one link per arriving node,
/// target chosen proportionally to degree) topped up with independent extra
/// links, each remaining pair joining with probability `attach_prob`.
pub fn scale_free_edges(cfg: &NetworkGenConfig) -> Result<Vec<(usize, usize)>> {
    cfg.validate()?;
    Ok(draw_skeleton(cfg, &mut stream_rng(cfg.seed, STREAM_NETWORK)))
}

fn draw_skeleton(cfg: &NetworkGenConfig, rng: &mut StreamRng) -> Vec<(usize, usize)> {
    let p = cfg.p;
    let mut adjacent = vec![vec![false; p]; p];
    let mut degree = vec![0usize; p];
    for new in 1..p {
        let total: usize = degree[..new].iter().sum();
        let target = if total == 0 {
            0
        } else {
            let mut r = rng.random_range(0..total);
            let mut t = 0;
            while r >= degree[t] {
                r -= degree[t];
                t += 1;
            }
            t
        };
        adjacent[new][target] = true;
        adjacent[target][new] = true;
        degree[new] += 1;
        degree[target] += 1;
    }
    for i in 0..p {
        for j in (i + 1)..p {
            if !adjacent[i][j] && rng.random::<f64>() < cfg.attach_prob {
                adjacent[i][j] = true;
                adjacent[j][i] = true;
            }
        }
    }
    let mut edges = Vec::new();
    for (i, row) in adjacent.iter().enumerate() {
        for (j, &linked) in row.iter().enumerate().skip(i + 1) {
            if linked {
                edges.push((i, j));
            }
        }
    }
    edges
}

/// Scale-free skeleton from [`scale_free_edges`], then one uniform weight per
/// edge (in edge order) and one uniform threshold per node.
pub fn generate_scale_free_model(cfg: &NetworkGenConfig) -> Result<IsingModel> {
    cfg.validate()?;
    let mut rng = stream_rng(cfg.seed, STREAM_NETWORK);
    let edges = draw_skeleton(cfg, &mut rng);
    let weighted: Vec<_> = edges
        .iter()
        .map(|&(i, j)| (i, j, rng.random_range(cfg.weight_low..=cfg.weight_high)))
        .collect();
    let tau = (0..cfg.p)
        .map(|_| rng.random_range(cfg.thresh_low..=cfg.thresh_high))
        .collect();
    IsingModel::from_edges(tau, &weighted)
}

/// Settings for the multidimensional Rasch data generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MirtGenConfig {
    pub n: usize,
    pub p: usize,
    /// Correlation between every pair of factors.
    pub factor_corr: f64,
    /// Factor index for each item.
    pub loading: Vec<usize>,
    /// Common discrimination of an item on its factor.
    pub discrimination: f64,
    /// Fixed difficulties; drawn from a standard normal when absent.
    pub difficulties: Option<Vec<f64>>,
    /// Multiplies the standardised latent draws; 0 pins every person at `theta_shift`.
    pub theta_scale: f64,
    pub theta_shift: f64,
    pub seed: u64,
}

impl MirtGenConfig {
    /// Two correlated factors, first half of the items on factor 1 and the rest on factor 2.
    pub fn two_factor(n: usize, p: usize, factor_corr: f64, seed: u64) -> Self {
        Self {
            n,
            p,
            factor_corr,
            loading: (0..p).map(|i| usize::from(i >= p / 2)).collect(),
            discrimination: 1.0,
            difficulties: None,
            theta_scale: 1.0,
            theta_shift: 0.0,
            seed,
        }
    }

    pub fn n_factors(&self) -> usize {
        self.loading.iter().copied().max().map_or(0, |m| m + 1)
    }
}

/// Generating parameters of a simulated MIRT dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct MirtTruth {
    pub mirt: MirtModel,
    /// One latent vector per person.
    pub theta: Vec<Vec<f64>>,
}

pub fn generate_mirt_dataset(cfg: &MirtGenConfig) -> Result<(BinaryDataset, MirtTruth)> {
    if cfg.p < 2 {
        return Err(IsingError::InvalidConfig("need at least 2 items".into()));
    }
    if cfg.n == 0 {
        return Err(IsingError::InvalidConfig("need at least 1 observation".into()));
    }
    if !(cfg.factor_corr.abs() < 1.0) {
        return Err(IsingError::InvalidConfig(format!(
            "factor correlation {} must lie in (-1, 1)",
            cfg.factor_corr
        )));
    }
    if cfg.loading.len() != cfg.p {
        return Err(IsingError::DimensionMismatch {
            expected: cfg.p,
            found: cfg.loading.len(),
        });
    }
    let m = cfg.n_factors();
    let corr = DMatrix::from_fn(m, m, |a, b| if a == b { 1.0 } else { cfg.factor_corr });
    let chol = corr.cholesky().ok_or_else(|| {
        IsingError::InvalidConfig("factor correlation matrix is not positive definite".into())
    })?;
    let lower = chol.l();

    let mut rng = stream_rng(cfg.seed, STREAM_MIRT);
    let delta: Vec<f64> = match &cfg.difficulties {
        Some(d) if d.len() != cfg.p => {
            return Err(IsingError::DimensionMismatch {
                expected: cfg.p,
                found: d.len(),
            })
        }
        Some(d) => d.clone(),
        None => (0..cfg.p).map(|_| rng.sample(StandardNormal)).collect(),
    };
    let mut a = DMatrix::zeros(cfg.p, m);
    for (i, &f) in cfg.loading.iter().enumerate() {
        a[(i, f)] = cfg.discrimination;
    }

    let mut theta = Vec::with_capacity(cfg.n);
    let mut values = Vec::with_capacity(cfg.n * cfg.p);
    for _ in 0..cfg.n {
        let z = DVector::from_fn(m, |_, _| rng.sample::<f64, _>(StandardNormal));
        let t: Vec<f64> = (&lower * z)
            .iter()
            .map(|v| cfg.theta_shift + cfg.theta_scale * v)
            .collect();
        for i in 0..cfg.p {
            let eta: f64 = (0..m).map(|k| a[(i, k)] * t[k]).sum::<f64>() - delta[i];
            let up = spin_up_probability(eta);
            values.push(if rng.random::<f64>() < up { 1 } else { -1 });
        }
        theta.push(t);
    }
    let data = BinaryDataset::from_flat(cfg.n, cfg.p, values)?;
    let mirt = MirtModel::new(a, delta)?;
    Ok((data, MirtTruth { mirt, theta }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> IsingModel {
        IsingModel::from_edges(vec![-0.1; 3], &[(0, 1, 0.5), (1, 2, 0.5)]).unwrap()
    }

    fn frequencies(data: &BinaryDataset) -> Vec<f64> {
        let mut counts = vec![0.0; 1 << data.p()];
        for row in data.rows() {
            let s = row
                .iter()
                .enumerate()
                .fold(0, |acc, (i, &v)| acc | (usize::from(v > 0) << i));
            counts[s] += 1.0;
        }
        counts.iter().map(|c| c / data.n() as f64).collect()
    }

    #[test]
    fn exact_sampler_frequencies() {
        let data = sample_exact(&chain(), &SamplerConfig::exact(100_000, 7)).unwrap();
        let f = frequencies(&data);
        assert!((f[0] - 0.3514).abs() < 0.01);

        let u = sample_exact(&IsingModel::zeros(3).unwrap(), &SamplerConfig::exact(100_000, 8)).unwrap();
        for v in frequencies(&u) {
            assert!((v - 0.125).abs() < 0.01);
        }
        let one = sample_exact(&chain(), &SamplerConfig::exact(1, 1)).unwrap();
        assert_eq!(one.n(), 1);
    }

    #[test]
    fn gibbs_matches_table() {
        let cfg = SamplerConfig::gibbs(100_000, 11);
        let f = frequencies(&sample_gibbs(&chain(), &cfg).unwrap());
        let exact = chain().full_distribution().unwrap().probabilities;
        for (a, b) in f.iter().zip(&exact) {
            assert!((a - b).abs() < 0.01, "{a} vs {b}");
        }
    }

    #[test]
    fn gibbs_independent_and_degenerate() {
        let tau = vec![0.4, -0.3];
        let m = IsingModel::new(tau.clone(), DMatrix::zeros(2, 2), 1.0).unwrap();
        let d = sample_gibbs(&m, &SamplerConfig::gibbs(100_000, 3)).unwrap();
        for (i, c) in d.positive_counts().iter().enumerate() {
            let expected = 1.0 / (1.0 + (-2.0 * tau[i]).exp());
            assert!((*c as f64 / 1e5 - expected).abs() < 0.01);
        }
        let hot = IsingModel::new(vec![10.0; 3], DMatrix::zeros(3, 3), 1.0).unwrap();
        let d = sample_gibbs(&hot, &SamplerConfig::gibbs(1000, 5).with_burn_in(10)).unwrap();
        assert!(d.rows().all(|r| r.iter().all(|&v| v == 1)));
    }

    #[test]
    fn samplers_are_deterministic() {
        let cfg = SamplerConfig::gibbs(200, 9).with_thin(3);
        assert_eq!(sample_gibbs(&chain(), &cfg).unwrap(), sample_gibbs(&chain(), &cfg).unwrap());
        let cfg = SamplerConfig::exact(200, 9);
        assert_eq!(sample_exact(&chain(), &cfg).unwrap(), sample_exact(&chain(), &cfg).unwrap());
        assert!(sample(&chain(), &SamplerConfig::exact(0, 1)).is_err());
        assert!(sample(&chain(), &SamplerConfig::gibbs(5, 1).with_thin(0)).is_err());
    }

    #[test]
    fn scale_free_ranges_and_skeleton() {
        let cfg = NetworkGenConfig::study_defaults(10, 42);
        let m = generate_scale_free_model(&cfg).unwrap();
        for i in 0..10 {
            assert!((-3.0..=-1.0).contains(&m.tau()[i]));
            assert_eq!(m.weight(i, i), 0.0);
            for j in 0..10 {
                let w = m.weight(i, j);
                assert_eq!(w, m.weight(j, i));
                assert!(w == 0.0 || (0.75..=1.0).contains(&w));
            }
        }
        for seed in 0..20 {
            let tree = NetworkGenConfig { attach_prob: 0.0, ..NetworkGenConfig::study_defaults(12, seed) };
            assert_eq!(scale_free_edges(&tree).unwrap().len(), 11);
        }
        let full = NetworkGenConfig { attach_prob: 1.0, ..NetworkGenConfig::study_defaults(6, 1) };
        assert_eq!(scale_free_edges(&full).unwrap().len(), 15);
        let two = generate_scale_free_model(&NetworkGenConfig::study_defaults(2, 3)).unwrap();
        assert!((0.75..=1.0).contains(&two.weight(0, 1)));
        assert!(generate_scale_free_model(&NetworkGenConfig::study_defaults(1, 3)).is_err());
        let bad = NetworkGenConfig { weight_low: 2.0, ..NetworkGenConfig::study_defaults(4, 1) };
        assert!(generate_scale_free_model(&bad).is_err());
    }

    #[test]
    fn mirt_generator() {
        let cfg = MirtGenConfig::two_factor(500, 10, 0.5, 1);
        let (data, truth) = generate_mirt_dataset(&cfg).unwrap();
        assert_eq!((data.n(), data.p()), (500, 10));
        assert_eq!(truth.theta.len(), 500);
        assert_eq!(truth.mirt.a()[(0, 0)], 1.0);
        assert_eq!(truth.mirt.a()[(0, 1)], 0.0);
        assert_eq!(truth.mirt.a()[(9, 1)], 1.0);

        let flat = MirtGenConfig {
            factor_corr: 0.0,
            difficulties: Some(vec![0.0; 4]),
            theta_scale: 0.0,
            ..MirtGenConfig::two_factor(20_000, 4, 0.0, 2)
        };
        let (d, _) = generate_mirt_dataset(&flat).unwrap();
        for c in d.positive_counts() {
            assert!((c as f64 / 20_000.0 - 0.5).abs() < 0.015);
        }

        let easy = MirtGenConfig {
            loading: vec![0; 3],
            difficulties: Some(vec![0.0, 0.0, -10.0]),
            ..MirtGenConfig::two_factor(2000, 3, 0.0, 3)
        };
        let (d, _) = generate_mirt_dataset(&easy).unwrap();
        assert!(d.positive_counts()[2] >= 1995);

        let shifted = MirtGenConfig {
            difficulties: Some(vec![0.0; 6]),
            theta_shift: 8.0,
            ..MirtGenConfig::two_factor(1000, 6, 0.3, 4)
        };
        let (d, _) = generate_mirt_dataset(&shifted).unwrap();
        assert!(d.positive_counts().iter().all(|&c| c >= 995));

        let bad = MirtGenConfig { factor_corr: 1.0, ..cfg.clone() };
        assert!(generate_mirt_dataset(&bad).is_err());
        assert_eq!(generate_mirt_dataset(&cfg).unwrap().0, data);
    }
}
