use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use linclass::dataset::{binarize_majority, parse_arff, parse_csv, Dataset, Schema};
use linclass::discretizer::Method;
use linclass::eval::{bias_variance, cross_validate, ClassifierKind, EvalError, EvaluationReport, ExperimentSpec};
use linclass::objectives::ObjectiveError;
use linclass::solvers::{SolverConfig, SolverError, SolverKind};

const USAGE: u8 = 2;
const DATA: u8 = 3;
const NUMERIC: u8 = 4;

/// Cross-validate a linear classifier on an ARFF (or CSV) dataset.
#[derive(Debug, Parser)]
#[command(name = "linclass", disable_version_flag = true)]
struct Args {
    /// Dataset path (.arff, or .csv together with --schema).
    #[arg(short = 't', value_name = "PATH")]
    dataset: PathBuf,

    /// Rounds of cross-validation.
    #[arg(short = 'i', default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..))]
    rounds: u32,

    /// Folds per round.
    #[arg(short = 'x', default_value_t = 2, value_parser = clap::value_parser!(u32).range(2..))]
    folds: u32,

    /// Classifier: LR, SVC, SVC-OVA or ANN0.
    #[arg(short = 'W', value_name = "NAME")]
    classifier: ClassifierKind,

    /// Solver: GD, QN, CG, Tron or SGD.
    #[arg(short = 'O', value_name = "NAME", default_value = "Tron")]
    solver: SolverKind,

    /// Discretize quantitative attributes before training.
    #[arg(short = 'D')]
    discretize: bool,

    /// Print per-iteration objective values to standard error.
    #[arg(short = 'V')]
    verbose: bool,

    /// Discretization method (requires -D).
    #[arg(long, value_name = "ewd|efd|mdlp")]
    disc_method: Option<Method>,

    /// Interval count for ewd/efd [default: 3] (requires -D).
    #[arg(long, value_name = "K", value_parser = clap::value_parser!(u32).range(1..))]
    bins: Option<u32>,

    /// Regularization weight [default: 0 for LR and ANN0, 1 for SVC].
    #[arg(long)]
    lambda: Option<f64>,

    /// Seed for fold assignment and SGD shuffling.
    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// Write the JSON report here instead of standard output.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Directory for per-fold solver trace CSVs.
    #[arg(long, value_name = "DIR")]
    trace: Option<PathBuf>,

    /// Also estimate bias and variance over this many 2-fold trials.
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u32).range(2..))]
    bv_trials: Option<u32>,

    /// Collapse a multiclass dataset to majority class vs the rest.
    #[arg(long)]
    binarize: bool,

    /// JSON schema describing a CSV dataset.
    #[arg(long, value_name = "PATH")]
    schema: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: USAGE, message: message.into() }
    }

    fn data(message: impl Into<String>) -> Self {
        Failure { code: DATA, message: message.into() }
    }
}

impl From<EvalError> for Failure {
    fn from(e: EvalError) -> Self {
        let code = match &e {
            EvalError::NumericFailure { .. } => NUMERIC,
            EvalError::InvalidSpec(_)
            | EvalError::Solver(SolverError::InvalidConfig(_) | SolverError::UnknownSolver(_))
            | EvalError::Objective(ObjectiveError::InvalidLambda(_)) => USAGE,
            _ => DATA,
        };
        let mut message = e.to_string();
        if let EvalError::NotBinary { .. } = e {
            message.push_str("\nhint: pass --binarize to train majority-vs-rest, or use -W SVC-OVA");
        }
        Failure { code, message }
    }
}

fn load(args: &Args) -> Result<Dataset, Failure> {
    let text = fs::read_to_string(&args.dataset)
        .map_err(|e| Failure::data(format!("cannot read {}: {e}", args.dataset.display())))?;
    let is_csv = args.dataset.extension().is_some_and(|ext| ext.eq_ignore_ascii_case("csv"));
    let data = match (&args.schema, is_csv) {
        (Some(path), true) => {
            let schema_text = fs::read_to_string(path)
                .map_err(|e| Failure::data(format!("cannot read {}: {e}", path.display())))?;
            let schema: Schema = serde_json::from_str(&schema_text)
                .map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
            parse_csv(&text, &schema)
        }
        (None, true) => return Err(Failure::usage("CSV input needs --schema")),
        (Some(_), false) => return Err(Failure::usage("--schema only applies to .csv datasets")),
        (None, false) => parse_arff(&text),
    };
    let data = data.map_err(|e| Failure::data(format!("{}: {e}", args.dataset.display())))?;
    if args.binarize {
        binarize_majority(&data).map_err(|e| Failure::data(e.to_string()))
    } else {
        Ok(data)
    }
}

fn spec_from(args: &Args) -> Result<ExperimentSpec, Failure> {
    if !args.discretize && (args.disc_method.is_some() || args.bins.is_some()) {
        return Err(Failure::usage("--disc-method and --bins require -D"));
    }
    let method = args.disc_method.unwrap_or(Method::Mdlp);
    if method == Method::Mdlp && args.bins.is_some() {
        return Err(Failure::usage("--bins does not apply to mdlp, which chooses its own intervals"));
    }
    let mut spec = ExperimentSpec::new(args.classifier);
    spec.discretize = args.discretize;
    spec.method = method;
    spec.bins = args.bins.unwrap_or(3) as usize;
    spec.lambda = args.lambda;
    spec.solver = SolverConfig::new(args.solver);
    spec.rounds = args.rounds as usize;
    spec.folds = args.folds as usize;
    spec.seed = args.seed;
    spec.validate()?;
    Ok(spec)
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::data(format!("cannot write {}: {e}", path.display())))
}

fn run(args: &Args) -> Result<(), Failure> {
    let spec = spec_from(args)?;
    let data = load(args)?;
    let mut folds = cross_validate(&spec, &data)?;

    if args.verbose {
        for f in &folds {
            for (c, trace) in f.traces.iter().enumerate() {
                for e in &trace.entries {
                    eprintln!(
                        "round {} fold {} run {c} iter {} objective {:.10e} grad_norm {:.3e}",
                        f.round, f.fold, e.iteration, e.objective, e.grad_norm
                    );
                }
            }
        }
    }

    if let Some(dir) = &args.trace {
        fs::create_dir_all(dir).map_err(|e| Failure::data(format!("cannot create {}: {e}", dir.display())))?;
        for f in &mut folds {
            let many = f.traces.len() > 1;
            let mut files = Vec::new();
            for (c, trace) in f.traces.iter().enumerate() {
                let name = if many {
                    format!("round{}_fold{}_class{c}.csv", f.round, f.fold)
                } else {
                    format!("round{}_fold{}.csv", f.round, f.fold)
                };
                let path = dir.join(name);
                write(&path, &trace.to_csv())?;
                files.push(path.display().to_string());
            }
            f.trace_files = files;
        }
    }

    let mut report = EvaluationReport::new(spec.clone(), &data, folds);
    if let Some(trials) = args.bv_trials {
        report.bias_variance = Some(bias_variance(&spec, &data, trials as usize)?);
    }
    let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    match &args.out {
        Some(path) => write(path, &json),
        None => {
            print!("{json}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
