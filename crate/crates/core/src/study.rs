//! Two simulated datasets analysed with cross-validated elastic-net Ising
//! estimation: one from a two-factor Rasch model (dense, low rank) and one
//! from a sparse scale-free network.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bridge::{rank_of_network, DEFAULT_RANK_TOL};
use crate::data::BinaryDataset;
use crate::error::{IsingError, Result};
use crate::estimator::{
    cross_validate, fit_disjoint, fold_assignment, linear_grid, log_spaced_grid, write_cv_csv, CvSurface, EdgeRule,
    FitConfig, FitResult, NodeDesign, Penalty,
};
use crate::io::{write_dataset_csv, write_model_json};
use crate::model::{spin_up_probability, IsingModel};
use crate::sampler::{
    generate_mirt_dataset, generate_scale_free_model, sample, MirtGenConfig, NetworkGenConfig, SamplerConfig,
    SamplingMethod,
};

/// Ratio by which a leading eigenvalue must exceed the next to count as dominant.
pub const DOMINANCE_RATIO: f64 = 2.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub n: usize,
    pub p: usize,
    pub lambda_grid: Vec<f64>,
    pub alpha_grid: Vec<f64>,
    pub folds: usize,
    pub seed_a: u64,
    pub seed_b: u64,
    pub seed_cv: u64,
    pub factor_corr: f64,
    pub sampling_b: SamplingMethod,
    pub burn_in: usize,
    pub thin: usize,
    pub edge_rule: EdgeRule,
    pub tol: f64,
    pub max_iter: usize,
    /// Passed on to [`FitConfig::standardize`].
    #[serde(default)]
    pub standardize: bool,
}

impl StudyConfig {
    /// 500 x 10 datasets, 100 x 100 grid, 10 folds.
    pub fn full(seed: u64) -> Self {
        Self::with_grid(seed, 100, 100)
    }

    /// The same study on a coarser `n_alpha x n_lambda` grid over the same ranges.
    pub fn with_grid(seed: u64, n_alpha: usize, n_lambda: usize) -> Self {
        Self {
            n: 500,
            p: 10,
            lambda_grid: log_spaced_grid(0.001, 1.0, n_lambda).expect("valid grid"),
            alpha_grid: linear_grid(0.0, 1.0, n_alpha).expect("valid grid"),
            folds: 10,
            seed_a: seed,
            seed_b: seed,
            seed_cv: seed,
            factor_corr: 0.5,
            sampling_b: SamplingMethod::Gibbs,
            burn_in: 2000,
            thin: 10,
            edge_rule: EdgeRule::And,
            tol: 1e-8,
            max_iter: 10_000,
            standardize: false,
        }
    }

    pub fn reduced(seed: u64) -> Self {
        Self::with_grid(seed, 20, 20)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, grid) in [("lambda", &self.lambda_grid), ("alpha", &self.alpha_grid)] {
            if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) {
                return Err(IsingError::InvalidConfig(format!(
                    "{name} grid must be non-empty and strictly increasing"
                )));
            }
        }
        if self.folds < 2 {
            return Err(IsingError::InvalidConfig("need at least 2 folds".into()));
        }
        Ok(())
    }

    fn fit_config(&self) -> FitConfig {
        FitConfig {
            edge_rule: self.edge_rule,
            tol: self.tol,
            max_iter: self.max_iter,
            cv_folds: self.folds,
            seed: self.seed_cv,
            standardize: self.standardize,
            ..FitConfig::default()
        }
    }
}

/// Qualitative conclusions drawn from one dataset's artifacts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdicts {
    /// `"ridge"` when the best alpha lies in the lower half of `[0, 1]`, else `"lasso"`.
    pub penalty_preference: String,
    /// Largest `k <= P/2` whose eigenvalue exceeds the next by [`DOMINANCE_RATIO`], 0 if none.
    pub dominant_components: usize,
    /// Whether the two leading eigenvalues both exceed the third by [`DOMINANCE_RATIO`].
    pub two_dominant: bool,
    /// The same check on the unshifted spectrum of `Omega_hat`.
    pub two_dominant_graph: bool,
    /// Best accuracy strictly above the mean of the smallest-lambda column.
    pub regularization_helps: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub name: String,
    pub best_alpha: f64,
    pub best_lambda: f64,
    pub best_accuracy: f64,
    pub min_lambda_column_mean: f64,
    pub independence_accuracy: f64,
    pub eigenvalues: Vec<f64>,
    /// Descending eigenvalues of `Omega_hat` itself, without the diagonal shift.
    pub graph_eigenvalues: Vec<f64>,
    pub edge_count: usize,
    pub verdicts: Verdicts,
}

#[derive(Clone, Debug)]
pub struct DatasetAnalysis {
    pub data: BinaryDataset,
    pub surface: CvSurface,
    pub fit: FitResult,
    pub summary: DatasetSummary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub config: StudyConfig,
    pub scoring: String,
    pub dataset_a: DatasetSummary,
    pub dataset_b: DatasetSummary,
}

#[derive(Clone, Debug)]
pub struct StudyReport {
    pub config: StudyConfig,
    pub a: DatasetAnalysis,
    pub b: DatasetAnalysis,
    pub model_b_true: IsingModel,
}

const SCORING: &str = "negative mean squared difference between the predicted probability of +1 \
     and the held-out response coded 0/1, averaged over nodes and rows within a fold, then over folds";

/// Descending eigenvalues of the minimally shifted `Omega_hat`.
pub fn eigen_report(fit: &FitResult) -> Result<Vec<f64>> {
    Ok(rank_of_network(&fit.model()?, DEFAULT_RANK_TOL).eigenvalues)
}

/// Descending eigenvalues of `Omega_hat` with its zero diagonal.
pub fn graph_eigenvalues(fit: &FitResult) -> Vec<f64> {
    let mut values: Vec<f64> = fit.omega_matrix().symmetric_eigen().eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalue"));
    values
}

fn two_dominant(eigenvalues: &[f64]) -> bool {
    eigenvalues.len() >= 3 && eigenvalues[1] > DOMINANCE_RATIO * eigenvalues[2]
}

/// Largest `k <= P/2` with `lambda_k > ratio * lambda_{k+1}`.
pub fn dominant_components(eigenvalues: &[f64], ratio: f64) -> usize {
    let half = eigenvalues.len() / 2;
    (1..=half)
        .rev()
        .find(|&k| k < eigenvalues.len() && eigenvalues[k - 1] > ratio * eigenvalues[k])
        .unwrap_or(0)
}

/// Cross-validated accuracy of the model with every weight fixed at zero.
pub fn independence_accuracy(data: &BinaryDataset, folds: usize, seed: u64) -> Result<f64> {
    let fold = fold_assignment(data.n(), folds, seed)?;
    let zero = Penalty::new(f64::MAX.sqrt(), 1.0)?;
    let mut total = 0.0;
    for f in 0..folds {
        let train: Vec<usize> = (0..data.n()).filter(|&r| fold[r] != f).collect();
        let test: Vec<usize> = (0..data.n()).filter(|&r| fold[r] == f).collect();
        let train = data.select_rows(&train)?;
        let test = data.select_rows(&test)?;
        let mut err = 0.0;
        for i in 0..data.p() {
            let fit = NodeDesign::new(&train, i)?.fit(&zero, &Default::default(), None)?;
            let prob = spin_up_probability(fit.tau);
            for row in test.rows() {
                let obs = if row[i] > 0 { 1.0 } else { 0.0 };
                err += (prob - obs) * (prob - obs);
            }
        }
        total += err / (test.n() * data.p()) as f64;
    }
    Ok(-total / folds as f64)
}

fn analyse(name: &str, data: BinaryDataset, cfg: &StudyConfig) -> Result<DatasetAnalysis> {
    let fit_cfg = cfg.fit_config();
    let surface = cross_validate(&data, &cfg.lambda_grid, &cfg.alpha_grid, &fit_cfg)?;
    let best = Penalty::new(surface.best_lambda, surface.best_alpha)?;
    let fit = fit_disjoint(&data, &fit_cfg.clone().with_penalty(best))?;
    let eigenvalues = eigen_report(&fit)?;
    let graph = graph_eigenvalues(&fit);
    let column = surface.lambda_column(
        (0..cfg.lambda_grid.len())
            .min_by(|&a, &b| cfg.lambda_grid[a].partial_cmp(&cfg.lambda_grid[b]).expect("finite"))
            .expect("non-empty grid"),
    );
    let min_lambda_column_mean = column.iter().sum::<f64>() / column.len() as f64;
    let best_accuracy = surface.best_accuracy();
    let verdicts = Verdicts {
        penalty_preference: if surface.best_alpha < 0.5 { "ridge" } else { "lasso" }.into(),
        dominant_components: dominant_components(&eigenvalues, DOMINANCE_RATIO),
        two_dominant: two_dominant(&eigenvalues),
        two_dominant_graph: two_dominant(&graph),
        regularization_helps: best_accuracy > min_lambda_column_mean,
    };
    let summary = DatasetSummary {
        name: name.into(),
        best_alpha: surface.best_alpha,
        best_lambda: surface.best_lambda,
        best_accuracy,
        min_lambda_column_mean,
        independence_accuracy: independence_accuracy(&data, cfg.folds, cfg.seed_cv)?,
        eigenvalues,
        graph_eigenvalues: graph,
        edge_count: fit.edge_count(),
        verdicts,
    };
    Ok(DatasetAnalysis {
        data,
        surface,
        fit,
        summary,
    })
}

/// Dataset A: two-factor Rasch responses.
pub fn simulate_dataset_a(cfg: &StudyConfig) -> Result<BinaryDataset> {
    let gen = MirtGenConfig::two_factor(cfg.n, cfg.p, cfg.factor_corr, cfg.seed_a);
    Ok(generate_mirt_dataset(&gen)?.0)
}

/// Dataset B and its generating network. The drawn thresholds and weights
/// are read on the 0/1 response scale and converted to `+-1` parameters.
pub fn simulate_dataset_b(cfg: &StudyConfig) -> Result<(BinaryDataset, IsingModel)> {
    let drawn = generate_scale_free_model(&NetworkGenConfig::study_defaults(cfg.p, cfg.seed_b))?;
    let model = IsingModel::from_zero_one(drawn.tau(), drawn.omega())?;
    let sampler = match cfg.sampling_b {
        SamplingMethod::Gibbs => SamplerConfig::gibbs(cfg.n, cfg.seed_b)
            .with_burn_in(cfg.burn_in)
            .with_thin(cfg.thin),
        SamplingMethod::Exact => SamplerConfig::exact(cfg.n, cfg.seed_b),
    };
    Ok((sample(&model, &sampler)?, model))
}

pub fn run_study(cfg: &StudyConfig) -> Result<StudyReport> {
    cfg.validate()?;
    let data_a = simulate_dataset_a(cfg).map_err(|e| e.context("dataset A"))?;
    let (data_b, model_b_true) = simulate_dataset_b(cfg).map_err(|e| e.context("dataset B"))?;
    let a = analyse("A", data_a, cfg).map_err(|e| e.context("dataset A"))?;
    let b = analyse("B", data_b, cfg).map_err(|e| e.context("dataset B"))?;
    Ok(StudyReport {
        config: cfg.clone(),
        a,
        b,
        model_b_true,
    })
}

impl StudyReport {
    pub fn report_file(&self) -> ReportFile {
        ReportFile {
            config: self.config.clone(),
            scoring: SCORING.into(),
            dataset_a: self.a.summary.clone(),
            dataset_b: self.b.summary.clone(),
        }
    }

    /// Writes every artifact into `dir`, creating it if needed.
    pub fn write_to_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let create = |name: &str| -> Result<BufWriter<File>> { Ok(BufWriter::new(File::create(dir.join(name))?)) };
        write_dataset_csv(&self.a.data, create("datasetA.csv")?)?;
        write_dataset_csv(&self.b.data, create("datasetB.csv")?)?;
        write_model_json(&self.model_b_true, create("model_b_true.json")?)?;
        for (tag, analysis) in [("a", &self.a), ("b", &self.b)] {
            write_cv_csv(&analysis.surface, create(&format!("cv_surface_{tag}.csv"))?)?;
            serde_json::to_writer_pretty(create(&format!("fit_{tag}.json"))?, &analysis.fit)?;
            let mut wtr = csv::Writer::from_writer(create(&format!("eigen_{tag}.csv"))?);
            wtr.write_record(["index", "eigenvalue"])?;
            for (k, v) in analysis.summary.eigenvalues.iter().enumerate() {
                wtr.write_record([(k + 1).to_string(), v.to_string()])?;
            }
            wtr.flush()?;
        }
        serde_json::to_writer_pretty(create("report.json")?, &self.report_file())?;
        Ok(())
    }
}
