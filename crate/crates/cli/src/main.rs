use std::path::PathBuf;
use std::process::ExitCode;

use attrition::tabular::{load_csv, SchemaPolicy};
use attrition_cli::artifacts::RunDir;
use attrition_cli::config::ExperimentConfig;
use attrition_cli::{experiment, inspect, llm, load_config, RunOptions, Stage, StageContext, StageError};
use attrition_llm::MockConfig;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "attrition", version, about = "Employee attrition experiment: preprocessing, seven classifiers, weighted metrics and a fine-tuning client")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Experiment config (TOML). Defaults to the bundled configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the SMOTE neighbour count.
    #[arg(long)]
    smote_k: Option<usize>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Never contact the fine-tuning service.
    #[arg(long)]
    no_llm: bool,
    /// Override the fine-tuning service URL.
    #[arg(long)]
    llm_url: Option<String>,
}

#[derive(Args)]
struct RunDirArg {
    /// Run directory written by `prepare`.
    #[arg(long = "in", alias = "out", value_name = "DIR")]
    dir: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Descriptive statistics, class balance and histograms of the dataset.
    Inspect {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Read this CSV instead of the configured dataset.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Only this numeric column.
        #[arg(long)]
        column: Option<String>,
    },
    /// Load, preprocess and balance the data into a run directory.
    Prepare(ConfigArgs),
    /// Fit every configured learner.
    Train(RunDirArg),
    /// Score the fitted models on the test split.
    Evaluate(RunDirArg),
    /// Write report.txt and report.csv.
    Report(RunDirArg),
    /// All stages in order.
    Run(ConfigArgs),
    /// Write the prompt/completion corpus.
    LlmPrepare {
        #[command(flatten)]
        run: RunDirArg,
        /// Add the SMOTE rows to the corpus.
        #[arg(long)]
        include_synthetic: bool,
    },
    /// Upload the corpus and fine-tune (credential from LLM_API_KEY).
    LlmFinetune {
        #[command(flatten)]
        run: RunDirArg,
        #[arg(long)]
        llm_url: Option<String>,
    },
    /// Query the fine-tuned model for every test row.
    LlmPredict {
        #[command(flatten)]
        run: RunDirArg,
        #[arg(long)]
        llm_url: Option<String>,
    },
    /// Serve the offline stand-in for the fine-tuning service.
    LlmMock {
        #[arg(long, default_value = "127.0.0.1:8089")]
        addr: String,
        /// Status polls before a job finishes.
        #[arg(long, default_value_t = 3)]
        polls: usize,
        /// Make every job fail.
        #[arg(long)]
        fail_jobs: bool,
    },
}

fn base_config(path: Option<&PathBuf>) -> Result<ExperimentConfig, StageError> {
    match path {
        Some(p) => load_config(p).stage(Stage::Config),
        None => ExperimentConfig::bundled().stage(Stage::Config),
    }
}

fn resolve(args: &ConfigArgs) -> Result<ExperimentConfig, StageError> {
    let mut config = base_config(args.config.as_ref())?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(k) = args.smote_k {
        config.smote.k_neighbors = k;
    }
    if let Some(out) = &args.out {
        config.output_dir = out.clone();
    }
    if args.no_llm {
        config.llm.enabled = false;
    }
    if let Some(url) = &args.llm_url {
        config.llm.service_url = url.clone();
    }
    config.validate().stage(Stage::Config)?;
    Ok(config)
}

fn execute(command: Command) -> Result<(), StageError> {
    match command {
        Command::Inspect { config, data, column } => {
            let (path, target, skew) = match (data, config) {
                (Some(d), _) => (d, "Attrition".to_string(), 0.5),
                (None, c) => {
                    let c = base_config(c.as_ref())?;
                    (c.dataset, c.pipeline.target, c.pipeline.skew_threshold)
                }
            };
            let table = load_csv(&path, &SchemaPolicy::Infer).stage(Stage::Load)?;
            print!("{}", inspect::inspect(&table, &target, column.as_deref(), skew)?);
        }
        Command::Prepare(args) => {
            let config = resolve(&args)?;
            let dir = RunDir::create(&config.output_dir, Stage::Config)?;
            let m = experiment::prepare(&config, &dir)?;
            let c = &m.counts;
            println!(
                "prepared {}: train {} ({}/{}), test {}, balanced {}/{}",
                dir.root().display(),
                c.train_classes.total(),
                c.train_classes.negative,
                c.train_classes.positive,
                c.test_classes.total(),
                c.balanced_classes.negative,
                c.balanced_classes.positive
            );
        }
        Command::Train(a) => {
            let dir = RunDir::open(a.dir, Stage::Train)?;
            let models = experiment::train(&dir)?;
            println!("trained {} models", models.len());
        }
        Command::Evaluate(a) => {
            let dir = RunDir::open(a.dir, Stage::Evaluate)?;
            for m in experiment::evaluate(&dir)? {
                println!("{:<20} f1 {:.4}", m.name, m.report.f1);
            }
        }
        Command::Report(a) => {
            let dir = RunDir::open(a.dir, Stage::Report)?;
            print!("{}", experiment::report(&dir)?.text);
        }
        Command::Run(args) => {
            let config = resolve(&args)?;
            experiment::run_experiment(&config, RunOptions { no_llm: args.no_llm })?;
            let dir = RunDir::open(&config.output_dir, Stage::Report)?;
            let text = std::fs::read_to_string(dir.path(attrition_cli::artifacts::REPORT_TEXT_FILE)).stage(Stage::Report)?;
            print!("{text}");
        }
        Command::LlmPrepare { run, include_synthetic } => {
            let dir = RunDir::open(run.dir, Stage::LlmPrepare)?;
            let s = llm::prepare_corpus(&dir, include_synthetic.then_some(true))?;
            println!("wrote {} records (sha256 {})", s.corpus_lines, s.corpus_sha256);
        }
        Command::LlmFinetune { run, llm_url } => {
            let dir = RunDir::open(run.dir, Stage::LlmFinetune)?;
            let job = llm::finetune(&dir, llm_url.as_deref())?;
            println!("job {} succeeded: {}", job.id, job.fine_tuned_model.unwrap_or_default());
        }
        Command::LlmPredict { run, llm_url } => {
            let dir = RunDir::open(run.dir, Stage::LlmPredict)?;
            let records = llm::predict(&dir, llm_url.as_deref())?;
            println!("wrote {} predictions", records.len());
        }
        Command::LlmMock { addr, polls, fail_jobs } => {
            let cfg = MockConfig {
                polls_to_finish: polls,
                fail_jobs,
                ..MockConfig::default()
            };
            llm::serve_mock(&addr, cfg)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
