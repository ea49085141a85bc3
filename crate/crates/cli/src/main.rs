use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use isingnet::bridge::{
    self, ising_to_mirt_with_shift, latent_marginal_density, mirt_marginal_all, mirt_to_ising, rank_of_network,
    MirtFile,
};
use isingnet::estimator::{
    self, cross_validate, default_alpha_grid, default_lambda_grid, log_likelihood, node_conditional_loglik,
    pseudolikelihood, EbicScope, EdgeRule, FitConfig, FitMethod, FitResult, Penalty, PenaltySpec,
};
use isingnet::io::{read_dataset_csv, read_model_json, write_dataset_csv, write_distribution_csv, ModelFile};
use isingnet::sampler::{sample, SamplerConfig, SamplingMethod};
use isingnet::study::{run_study, StudyConfig};
use isingnet::{BinaryDataset, BinaryState, IsingError, IsingModel};

#[derive(Parser, Debug)]
#[command(name = "isingnet", version, about = "Ising network models: exact computation, sampling, estimation and the MIRT bridge")]
struct Cli {
    /// Worker threads for parallel sections [default: available cores]
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output format on stdout
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a dataset from a model
    Sample(SampleArgs),
    /// Estimate a model from data
    Estimate(EstimateArgs),
    /// Log-likelihood, pseudolikelihood or a node conditional log-likelihood
    Loglik(LoglikArgs),
    /// Convert between Ising and MIRT parameterisations
    Convert(ConvertArgs),
    /// MIRT marginal state probabilities by quadrature, or a latent marginal density
    Density(DensityArgs),
    /// Eigenvalues of the shifted weight matrix and its rank
    Eigen(EigenArgs),
    /// Entropy of a model
    Entropy(EntropyArgs),
    /// Potentials and probabilities of every state
    Table(TableArgs),
    /// Run the two-dataset cross-validation study and write its artifacts
    Replicate(ReplicateArgs),
}

#[derive(Args, Debug)]
struct SampleArgs {
    /// Model JSON
    #[arg(long)]
    model: PathBuf,
    /// Number of rows
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum, default_value = "exact")]
    method: SampleMethod,
    /// Gibbs sweeps discarded before recording
    #[arg(long, default_value_t = 1000)]
    burn_in: usize,
    /// Gibbs sweeps per recorded row
    #[arg(long, default_value_t = 1)]
    thin: usize,
    #[arg(long)]
    seed: u64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SampleMethod {
    Exact,
    Gibbs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    FullMl,
    JointPl,
    Disjoint,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RuleArg {
    And,
    Or,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ScopeArg {
    Node,
    Global,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    /// Dataset CSV with a header row
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value = "disjoint")]
    method: MethodArg,
    /// Fixed penalty; without it disjoint fits tune lambda by EBIC over the default grid
    #[arg(long)]
    lambda: Option<f64>,
    /// Elastic-net mixing, 1 = LASSO, 0 = ridge
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Comma-separated lambda grid for EBIC tuning
    #[arg(long, value_delimiter = ',', conflicts_with = "lambda")]
    lambda_grid: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value = "and")]
    edge_rule: RuleArg,
    #[arg(long, default_value_t = 0.25)]
    ebic_gamma: f64,
    #[arg(long, value_enum, default_value = "node")]
    ebic_scope: ScopeArg,
    /// Tune (alpha, lambda) by K-fold cross-validation over the default 100 x 100 grid
    #[arg(long, conflicts_with_all = ["lambda", "lambda_grid"])]
    cv: bool,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    /// Number of alpha values in the cross-validation grid
    #[arg(long)]
    alpha_points: Option<usize>,
    /// Number of lambda values in the cross-validation grid
    #[arg(long)]
    lambda_points: Option<usize>,
    /// Seed for the fold assignment (required with --cv)
    #[arg(long, required_if_eq("cv", "true"))]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
    /// Node limit for full maximum likelihood
    #[arg(long, default_value_t = 10)]
    max_nodes: usize,
    /// Penalise slopes of standardised 0/1 predictors (disjoint and CV only)
    #[arg(long)]
    standardize: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum LoglikKind {
    Full,
    Pseudo,
    Node,
}

#[derive(Args, Debug)]
struct LoglikArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value = "full")]
    kind: LoglikKind,
    /// 1-based node for --kind node
    #[arg(long, required_if_eq("kind", "node"))]
    node: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Target {
    Mirt,
    Ising,
}

#[derive(Args, Debug)]
struct ConvertArgs {
    #[arg(long, value_enum)]
    to: Target,
    /// Ising model JSON (for --to mirt)
    #[arg(long, required_if_eq("to", "mirt"))]
    model: Option<PathBuf>,
    /// MIRT model JSON (for --to ising)
    #[arg(long, required_if_eq("to", "ising"))]
    mirt: Option<PathBuf>,
    /// Diagonal shift added beyond the minimal one
    #[arg(long, default_value_t = 0.0)]
    extra_shift: f64,
    /// Relative eigenvalue tolerance for the rank
    #[arg(long, default_value_t = bridge::DEFAULT_RANK_TOL)]
    rank_tol: f64,
}

#[derive(Args, Debug)]
struct DensityArgs {
    /// Ising model JSON, converted with the minimal shift
    #[arg(long, conflicts_with = "mirt")]
    model: Option<PathBuf>,
    /// MIRT model JSON
    #[arg(long)]
    mirt: Option<PathBuf>,
    /// Gauss-Hermite points per latent dimension
    #[arg(long, default_value_t = bridge::DEFAULT_QUADRATURE_NODES)]
    quadrature: usize,
    /// 1-based latent dimension; switches to the latent marginal density
    #[arg(long)]
    latent_dim: Option<usize>,
    #[arg(long, default_value_t = -4.0, allow_negative_numbers = true)]
    from: f64,
    #[arg(long, default_value_t = 4.0, allow_negative_numbers = true)]
    to: f64,
    #[arg(long, default_value_t = 81)]
    points: usize,
}

#[derive(Args, Debug)]
struct EigenArgs {
    /// Ising model JSON
    #[arg(long, conflicts_with = "fit", required_unless_present = "fit")]
    model: Option<PathBuf>,
    /// Fit result JSON from `estimate`
    #[arg(long)]
    fit: Option<PathBuf>,
    #[arg(long, default_value_t = bridge::DEFAULT_RANK_TOL)]
    rank_tol: f64,
}

#[derive(Args, Debug)]
struct EntropyArgs {
    #[arg(long)]
    model: PathBuf,
    /// Override the model's inverse temperature
    #[arg(long)]
    beta: Option<f64>,
}

#[derive(Args, Debug)]
struct TableArgs {
    #[arg(long)]
    model: PathBuf,
    /// Round potentials and probabilities
    #[arg(long)]
    decimals: Option<usize>,
}

#[derive(Args, Debug)]
struct ReplicateArgs {
    /// Output directory
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    alpha_points: usize,
    #[arg(long, default_value_t = 100)]
    lambda_points: usize,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    /// Sample dataset B exactly instead of by Gibbs sampling
    #[arg(long)]
    exact_b: bool,
    /// Penalise slopes of standardised 0/1 predictors
    #[arg(long)]
    standardize: bool,
}

enum Failure {
    Usage(IsingError),
    Numerical(IsingError),
    NotConverged(String),
}

impl From<IsingError> for Failure {
    fn from(e: IsingError) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e)
        } else {
            Failure::Usage(e)
        }
    }
}

type CliResult = Result<(), Failure>;

fn open(path: &Path) -> Result<BufReader<File>, IsingError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| IsingError::from(e).context(path.display().to_string()))
}

fn load_model(path: &Path) -> Result<IsingModel, IsingError> {
    read_model_json(open(path)?).map_err(|e| e.context(path.display().to_string()))
}

fn load_data(path: &Path) -> Result<BinaryDataset, IsingError> {
    read_dataset_csv(open(path)?).map_err(|e| e.context(path.display().to_string()))
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, IsingError> {
    serde_json::from_reader(open(path)?).map_err(|e| IsingError::from(e).context(path.display().to_string()))
}

fn echo(command: &str, config: Value) {
    eprintln!("{}", json!({ "command": command, "config": config }));
}

fn print_json(value: &impl serde::Serialize) -> Result<(), IsingError> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn print_csv(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), IsingError> {
    let mut wtr = csv::Writer::from_writer(std::io::stdout().lock());
    wtr.write_record(header)?;
    for row in rows {
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

fn node_header(p: usize, first: &[&str]) -> Vec<String> {
    first
        .iter()
        .map(|s| s.to_string())
        .chain((1..=p).map(|j| format!("x{j}")))
        .collect()
}

fn cmd_sample(args: &SampleArgs, format: Format) -> CliResult {
    let model = load_model(&args.model)?;
    let cfg = match args.method {
        SampleMethod::Exact => SamplerConfig::exact(args.n, args.seed),
        SampleMethod::Gibbs => SamplerConfig::gibbs(args.n, args.seed)
            .with_burn_in(args.burn_in)
            .with_thin(args.thin),
    };
    echo("sample", json!(cfg));
    let data = sample(&model, &cfg)?;
    match format {
        Format::Csv => write_dataset_csv(&data, std::io::stdout().lock())?,
        Format::Json => print_json(&json!({
            "n": data.n(),
            "p": data.p(),
            "rows": data.rows().collect::<Vec<_>>(),
        }))?,
    }
    Ok(())
}

fn estimate_config(args: &EstimateArgs) -> Result<FitConfig, IsingError> {
    let method = match args.method {
        MethodArg::FullMl => FitMethod::FullMl,
        MethodArg::JointPl => FitMethod::JointPl,
        MethodArg::Disjoint => FitMethod::DisjointPl,
    };
    let penalty = match (args.lambda, &args.lambda_grid, method) {
        (Some(l), _, _) => PenaltySpec::Fixed(Penalty::new(l, args.alpha)?),
        (None, Some(grid), _) => PenaltySpec::Grid {
            alpha: args.alpha,
            lambdas: grid.clone(),
        },
        (None, None, FitMethod::DisjointPl) => PenaltySpec::Grid {
            alpha: args.alpha,
            lambdas: default_lambda_grid(),
        },
        (None, None, _) => PenaltySpec::Fixed(Penalty::none()),
    };
    let cfg = FitConfig {
        method,
        penalty,
        edge_rule: match args.edge_rule {
            RuleArg::And => EdgeRule::And,
            RuleArg::Or => EdgeRule::Or,
        },
        ebic_gamma: args.ebic_gamma,
        ebic_scope: match args.ebic_scope {
            ScopeArg::Node => EbicScope::Node,
            ScopeArg::Global => EbicScope::Global,
        },
        max_iter: args.max_iter,
        tol: args.tol,
        cv_folds: args.folds,
        seed: args.seed.unwrap_or(0),
        full_ml_max_nodes: args.max_nodes,
        standardize: args.standardize,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn grid_or_default(points: Option<usize>, default: Vec<f64>, make: impl Fn(usize) -> Result<Vec<f64>, IsingError>) -> Result<Vec<f64>, IsingError> {
    points.map_or(Ok(default), make)
}

fn print_fit(fit: &FitResult, format: Format) -> Result<(), IsingError> {
    match format {
        Format::Json => print_json(fit),
        Format::Csv => print_csv(
            &node_header(fit.p(), &["node", "tau"]),
            (0..fit.p()).map(|i| {
                [(i + 1).to_string(), fit.tau_hat[i].to_string()]
                    .into_iter()
                    .chain(fit.omega_hat[i].iter().map(|w| w.to_string()))
                    .collect()
            }),
        ),
    }
}

fn cmd_estimate(args: &EstimateArgs, format: Format) -> CliResult {
    let data = load_data(&args.data)?;
    let mut cfg = estimate_config(args)?;
    let fit = if args.cv {
        let lambdas = grid_or_default(args.lambda_points, default_lambda_grid(), |n| {
            estimator::log_spaced_grid(0.001, 1.0, n)
        })?;
        let alphas = grid_or_default(args.alpha_points, default_alpha_grid(), |n| estimator::linear_grid(0.0, 1.0, n))?;
        cfg.method = FitMethod::DisjointPl;
        echo(
            "estimate",
            json!({ "fit": cfg, "cv": { "alpha_grid": alphas, "lambda_grid": lambdas } }),
        );
        let surface = cross_validate(&data, &lambdas, &alphas, &cfg)?;
        eprintln!(
            "{}",
            json!({ "cv_best": { "alpha": surface.best_alpha, "lambda": surface.best_lambda, "accuracy": surface.best_accuracy() } })
        );
        cfg.penalty = PenaltySpec::Fixed(Penalty::new(surface.best_lambda, surface.best_alpha)?);
        estimator::fit(&data, &cfg)?
    } else {
        echo("estimate", json!(cfg));
        estimator::fit(&data, &cfg)?
    };
    print_fit(&fit, format)?;
    if !fit.converged {
        return Err(Failure::NotConverged(format!(
            "optimiser stopped after {} iterations without meeting tol {}",
            fit.iterations, cfg.tol
        )));
    }
    Ok(())
}

fn cmd_loglik(args: &LoglikArgs, format: Format) -> CliResult {
    let model = load_model(&args.model)?;
    let data = load_data(&args.data)?;
    echo(
        "loglik",
        json!({ "model": args.model, "data": args.data, "kind": format!("{:?}", args.kind).to_lowercase(), "node": args.node }),
    );
    let (name, value) = match args.kind {
        LoglikKind::Full => ("loglik", log_likelihood(&model, &data)?),
        LoglikKind::Pseudo => ("pseudolikelihood", pseudolikelihood(&model, &data)?),
        LoglikKind::Node => {
            let node = args.node.expect("required by clap");
            if node == 0 {
                return Err(IsingError::IndexOutOfRange { index: 0, p: model.p() }.into());
            }
            ("node_loglik", node_conditional_loglik(&model, &data, node - 1)?)
        }
    };
    match format {
        Format::Json => print_json(&json!({ name: value, "n": data.n() }))?,
        Format::Csv => print_csv(&["quantity".into(), "value".into()], [vec![name.to_string(), value.to_string()]])?,
    }
    Ok(())
}

fn cmd_convert(args: &ConvertArgs, format: Format) -> CliResult {
    echo(
        "convert",
        json!({ "to": format!("{:?}", args.to).to_lowercase(), "model": args.model, "mirt": args.mirt, "extra_shift": args.extra_shift, "rank_tol": args.rank_tol }),
    );
    match args.to {
        Target::Mirt => {
            let model = load_model(args.model.as_deref().expect("required by clap"))?;
            let (mirt, eig) = ising_to_mirt_with_shift(&model, args.extra_shift, args.rank_tol)?;
            let file = MirtFile::from_model(&mirt, Some(&eig));
            match format {
                Format::Json => print_json(&file)?,
                Format::Csv => print_csv(
                    &["item".to_string(), "delta".to_string()]
                        .into_iter()
                        .chain((1..=file.m).map(|k| format!("a{k}")))
                        .collect::<Vec<_>>(),
                    (0..file.p).map(|i| {
                        [(i + 1).to_string(), file.delta[i].to_string()]
                            .into_iter()
                            .chain(file.a[i].iter().map(|v| v.to_string()))
                            .collect()
                    }),
                )?,
            }
        }
        Target::Ising => {
            let file: MirtFile = load_json(args.mirt.as_deref().expect("required by clap"))?;
            let model = mirt_to_ising(&file.to_model()?)?;
            print_model(&model, format)?;
        }
    }
    Ok(())
}

fn print_model(model: &IsingModel, format: Format) -> Result<(), IsingError> {
    let file = ModelFile::from(model);
    match format {
        Format::Json => print_json(&file),
        Format::Csv => print_csv(
            &node_header(file.p, &["node", "tau"]),
            (0..file.p).map(|i| {
                [(i + 1).to_string(), file.tau[i].to_string()]
                    .into_iter()
                    .chain(file.omega[i].iter().map(|w| w.to_string()))
                    .collect()
            }),
        ),
    }
}

fn cmd_density(args: &DensityArgs, format: Format) -> CliResult {
    echo(
        "density",
        json!({ "model": args.model, "mirt": args.mirt, "quadrature": args.quadrature, "latent_dim": args.latent_dim, "from": args.from, "to": args.to, "points": args.points }),
    );
    let mirt = match (&args.model, &args.mirt) {
        (Some(path), _) => {
            let model = load_model(path)?;
            ising_to_mirt_with_shift(&model, 0.0, bridge::DEFAULT_RANK_TOL)?.0
        }
        (None, Some(path)) => load_json::<MirtFile>(path)?.to_model()?,
        (None, None) => {
            return Err(Failure::Usage(IsingError::InvalidConfig(
                "one of --model or --mirt is required".into(),
            )))
        }
    };
    match args.latent_dim {
        None => {
            let probs = mirt_marginal_all(&mirt, args.quadrature, isingnet::model::DEFAULT_ENUMERATION_CAP)?;
            let p = mirt.p();
            let states: Vec<BinaryState> = (0..probs.len()).map(|s| BinaryState::from_index(s, p)).collect();
            match format {
                Format::Csv => print_csv(
                    &(1..=p).map(|j| format!("x{j}")).chain(["probability".to_string()]).collect::<Vec<_>>(),
                    states.iter().zip(&probs).map(|(s, pr)| {
                        s.values()
                            .iter()
                            .map(|v| v.to_string())
                            .chain([pr.to_string()])
                            .collect()
                    }),
                )?,
                Format::Json => print_json(
                    &states
                        .iter()
                        .zip(&probs)
                        .map(|(s, pr)| json!({ "state": s.values(), "probability": pr }))
                        .collect::<Vec<_>>(),
                )?,
            }
        }
        Some(dim) => {
            if dim == 0 || args.points < 2 || !(args.to > args.from) {
                return Err(Failure::Usage(IsingError::InvalidConfig(
                    "latent grid needs --latent-dim >= 1, --points >= 2 and --to > --from".into(),
                )));
            }
            let grid = estimator::linear_grid(args.from, args.to, args.points)?;
            let dens = latent_marginal_density(&mirt, dim - 1, &grid)?;
            match format {
                Format::Csv => print_csv(
                    &["theta".into(), "density".into()],
                    grid.iter().zip(&dens).map(|(t, d)| vec![t.to_string(), d.to_string()]),
                )?,
                Format::Json => print_json(&json!({ "theta": grid, "density": dens }))?,
            }
        }
    }
    Ok(())
}

fn cmd_eigen(args: &EigenArgs, format: Format) -> CliResult {
    echo("eigen", json!({ "model": args.model, "fit": args.fit, "rank_tol": args.rank_tol }));
    let model = match (&args.model, &args.fit) {
        (Some(path), _) => load_model(path)?,
        (None, Some(path)) => load_json::<FitResult>(path)?.model()?,
        (None, None) => unreachable!("enforced by clap"),
    };
    let rank = rank_of_network(&model, args.rank_tol);
    match format {
        Format::Json => print_json(&rank)?,
        Format::Csv => print_csv(
            &["index".into(), "eigenvalue".into()],
            rank.eigenvalues
                .iter()
                .enumerate()
                .map(|(k, v)| vec![(k + 1).to_string(), v.to_string()]),
        )?,
    }
    Ok(())
}

fn cmd_entropy(args: &EntropyArgs, format: Format) -> CliResult {
    let mut model = load_model(&args.model)?;
    if let Some(beta) = args.beta {
        model = model.with_beta(beta)?;
    }
    echo("entropy", json!({ "model": args.model, "beta": model.beta() }));
    let h = model.entropy()?;
    match format {
        Format::Json => print_json(&json!({ "entropy": h, "beta": model.beta() }))?,
        Format::Csv => print_csv(&["beta".into(), "entropy".into()], [vec![model.beta().to_string(), h.to_string()]])?,
    }
    Ok(())
}

fn cmd_table(args: &TableArgs, format: Format) -> CliResult {
    let model = load_model(&args.model)?;
    echo("table", json!({ "model": args.model, "decimals": args.decimals }));
    let dist = model.full_distribution()?;
    match format {
        Format::Csv => write_distribution_csv(&dist, args.decimals, std::io::stdout().lock())?,
        Format::Json => print_json(&json!({
            "z": dist.z(),
            "states": dist
                .states()
                .enumerate()
                .map(|(s, st)| json!({
                    "state": st.values(),
                    "potential": dist.potentials[s],
                    "probability": dist.probabilities[s],
                }))
                .collect::<Vec<_>>(),
        }))?,
    }
    Ok(())
}

fn cmd_replicate(args: &ReplicateArgs, format: Format) -> CliResult {
    let mut cfg = StudyConfig::with_grid(args.seed, args.alpha_points, args.lambda_points);
    cfg.folds = args.folds;
    if args.exact_b {
        cfg.sampling_b = SamplingMethod::Exact;
    }
    cfg.standardize = args.standardize;
    echo("replicate", json!({ "out": args.out, "study": cfg }));
    let report = run_study(&cfg)?;
    report.write_to_dir(&args.out)?;
    let file = report.report_file();
    match format {
        Format::Json => print_json(&file)?,
        Format::Csv => print_csv(
            &[
                "dataset",
                "best_alpha",
                "best_lambda",
                "best_accuracy",
                "penalty_preference",
                "dominant_components",
                "regularization_helps",
            ]
            .map(String::from),
            [&file.dataset_a, &file.dataset_b].map(|d| {
                vec![
                    d.name.clone(),
                    d.best_alpha.to_string(),
                    d.best_lambda.to_string(),
                    d.best_accuracy.to_string(),
                    d.verdicts.penalty_preference.clone(),
                    d.verdicts.dominant_components.to_string(),
                    d.verdicts.regularization_helps.to_string(),
                ]
            }),
        )?,
    }
    Ok(())
}

fn run(cli: &Cli) -> CliResult {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(IsingError::InvalidConfig(format!("thread pool: {e}"))))?;
    }
    let csv_default = Format::Csv;
    let json_default = Format::Json;
    match &cli.command {
        Command::Sample(a) => cmd_sample(a, cli.format.unwrap_or(csv_default)),
        Command::Estimate(a) => cmd_estimate(a, cli.format.unwrap_or(json_default)),
        Command::Loglik(a) => cmd_loglik(a, cli.format.unwrap_or(json_default)),
        Command::Convert(a) => cmd_convert(a, cli.format.unwrap_or(json_default)),
        Command::Density(a) => cmd_density(a, cli.format.unwrap_or(csv_default)),
        Command::Eigen(a) => cmd_eigen(a, cli.format.unwrap_or(json_default)),
        Command::Entropy(a) => cmd_entropy(a, cli.format.unwrap_or(json_default)),
        Command::Table(a) => cmd_table(a, cli.format.unwrap_or(csv_default)),
        Command::Replicate(a) => cmd_replicate(a, cli.format.unwrap_or(json_default)),
    }
}

fn report_error(kind: &str, message: String) {
    let mut err = BufWriter::new(std::io::stderr().lock());
    let _ = writeln!(err, "{}", json!({ "error": kind, "message": message }));
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            report_error(e.kind(), e.to_string());
            ExitCode::from(2)
        }
        Err(Failure::Numerical(e)) => {
            report_error(e.kind(), e.to_string());
            ExitCode::from(3)
        }
        Err(Failure::NotConverged(msg)) => {
            report_error("not_converged", msg);
            ExitCode::from(3)
        }
    }
}
